//! Cheeger constants of curved tubes and spherical shells.
//!
//! Closed forms for tubes around closed curves and for spherical shells,
//! numerical vector-field certificates of the lower bound, and an
//! independent voxel min-cut estimate of the constant.

pub mod certify;
pub mod curves;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod shell;
pub mod tube;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Curve64 = curves::CurveSpec<f64>;
pub type Curve32 = curves::CurveSpec<f32>;
pub type Tube64 = tube::TubeSpec<f64>;
pub type Tube32 = tube::TubeSpec<f32>;
pub type Shell64 = shell::ShellSpec<f64>;
pub type Shell32 = shell::ShellSpec<f32>;
pub type TubeGeometry64 = tube::TubeGeometry<f64>;
