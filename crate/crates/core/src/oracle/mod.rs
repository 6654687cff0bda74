//! Discrete Cheeger constants of voxelized domains.

mod cut;
mod maxflow;
mod stencil;
mod voxel;

pub use cut::{dinkelbach_cheeger, min_cut, CutGraph, CutResult, OracleOptions, TraceEntry};
pub use maxflow::{FlowGraph, MinCut};
pub use stencil::Stencil;
pub use voxel::{rasterize, read_mask, svg_2d, write_mask, VoxelDomain, MAX_RESOLUTION_3D, MIN_RESOLUTION};
