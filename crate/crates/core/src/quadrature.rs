//! One-dimensional quadrature rules used by the arc-length table.

use crate::scalar::Scalar;

// Kronrod 15-point nodes (non-negative half) and weights; every odd index is
// also a Gauss 7-point node.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

// Gauss–Legendre 8-point nodes and weights (positive half).
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gk15<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let fc = f(c);
    let mut kronrod = fc * T::lit(WK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = h * T::lit(XK[j]);
        let pair = f(c - dx) + f(c + dx);
        kronrod = kronrod + pair * T::lit(WK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]` to the
/// relative tolerance `rel_tol`. Returns the estimate and the accumulated
/// error estimate.
pub fn integrate_adaptive<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, rel_tol: T) -> (T, T) {
    let (whole, err) = gk15(f, a, b);
    let target = (rel_tol * whole.abs()).max(T::epsilon() * T::lit(50.0) * whole.abs());
    if err <= target {
        return (whole, err);
    }
    recurse(f, a, b, whole, target, 0)
}

fn recurse<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, whole: T, tol: T, depth: u32) -> (T, T) {
    let mid = (a + b) * T::lit(0.5);
    let (left, el) = gk15(f, a, mid);
    let (right, er) = gk15(f, mid, b);
    let err = el + er;
    if err <= tol || depth >= 40 || (left + right - whole).abs() <= T::epsilon() * whole.abs() {
        return (left + right, err);
    }
    let half_tol = tol * T::lit(0.5);
    let (l, el) = recurse(f, a, mid, left, half_tol, depth + 1);
    let (r, er) = recurse(f, mid, b, right, half_tol, depth + 1);
    (l + r, el + er)
}

/// Fixed 8-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre8<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let half = T::lit(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let mut acc = T::zero();
    for (&x, &w) in GL8_X.iter().zip(&GL8_W) {
        let dx = h * T::lit(x);
        acc = acc + T::lit(w) * (f(c - dx) + f(c + dx));
    }
    acc * h
}
