//! Scalar abstraction shared by the closed-form and curve geometry code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln Γ(m/2 + 1)` for a non-negative integer `m`, summed in log space.
///
/// Uses the half-integer recurrence `Γ(x + 1) = x Γ(x)` down to `Γ(1) = 1` or
/// `Γ(1/2) = √π`, which is exact up to rounding for every `m` we need.
pub fn ln_gamma_half_plus_one<T: Scalar>(m: u32) -> T {
    let two = T::lit(2.0);
    let mut acc = T::zero();
    let mut k = m;
    // Γ(k/2 + 1) = (k/2) Γ(k/2)
    while k >= 2 {
        acc = acc + (T::from_u32(k).unwrap() / two).ln();
        k -= 2;
    }
    if k == 1 {
        // Γ(3/2) = √π / 2
        acc = acc + T::PI().sqrt().ln() - two.ln();
    }
    acc
}
