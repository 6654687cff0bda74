//! Neighbourhood stencils and their perimeter weights.
//!
//! A cut edge along the integer direction `v` contributes `c_v Δ^{d−1}` to
//! the discrete perimeter. In 2D the coefficients are the Crofton
//! quadrature weights that make straight lines along every stencil
//! direction exact. In 3D they are the Cauchy–Crofton weights
//! `Ω_v / (π |v|)`, with `Ω_v` the solid angle of the spherical Voronoi cell
//! of `v/|v|` among all `±` stencil directions.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stencil {
    N4,
    N8,
    N16,
    N6,
    N18,
    N26,
}

impl Stencil {
    pub fn dim(self) -> usize {
        match self {
            Stencil::N4 | Stencil::N8 | Stencil::N16 => 2,
            _ => 3,
        }
    }

    /// Number of neighbours of an interior cell.
    pub fn neighbors(self) -> usize {
        match self {
            Stencil::N4 => 4,
            Stencil::N8 => 8,
            Stencil::N16 => 16,
            Stencil::N6 => 6,
            Stencil::N18 => 18,
            Stencil::N26 => 26,
        }
    }

    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Stencil::N16),
            3 => Ok(Stencil::N18),
            _ => Err(Error::Config(format!("no stencil for dimension {dim}; voxel oracle supports d = 2, 3"))),
        }
    }

    /// Stencil with `neighbors` neighbours in dimension `dim`.
    pub fn from_neighbors(dim: usize, neighbors: usize) -> Result<Self> {
        match (dim, neighbors) {
            (2, 4) => Ok(Stencil::N4),
            (2, 8) => Ok(Stencil::N8),
            (2, 16) => Ok(Stencil::N16),
            (3, 6) => Ok(Stencil::N6),
            (3, 18) => Ok(Stencil::N18),
            (3, 26) => Ok(Stencil::N26),
            _ => Err(Error::Config(format!(
                "unsupported stencil: {neighbors} neighbours in {dim}D (use 4/8/16 in 2D, 6/18/26 in 3D)"
            ))),
        }
    }

    /// One representative of every `±v` pair, first non-zero entry positive.
    pub fn directions(self) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = match self.dim() {
            2 => vec![vec![1, 0], vec![0, 1]],
            _ => vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
        };
        match self {
            Stencil::N8 | Stencil::N16 => {
                out.extend([vec![1, 1], vec![1, -1]]);
                if self == Stencil::N16 {
                    out.extend([vec![2, 1], vec![1, 2], vec![2, -1], vec![1, -2]]);
                }
            }
            Stencil::N18 | Stencil::N26 => {
                out.extend([[1, 1, 0], [1, -1, 0], [1, 0, 1], [1, 0, -1], [0, 1, 1], [0, 1, -1]].map(Vec::from));
                if self == Stencil::N26 {
                    out.extend([[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]].map(Vec::from));
                }
            }
            _ => {}
        }
        out
    }

    /// Dimensionless weight `c_v` per entry of [`Stencil::directions`].
    pub fn coefficients(self) -> Vec<f64> {
        let dirs = self.directions();
        if self.dim() == 2 {
            line_exact_2d(&dirs)
        } else {
            crofton_3d(&dirs)
        }
    }
}

/// Symmetry class of a direction: sorted absolute components.
fn class_of(v: &[i64]) -> Vec<i64> {
    let mut c: Vec<i64> = v.iter().map(|x| x.abs()).collect();
    c.sort_unstable();
    c
}

fn classes(dirs: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<usize>) {
    let mut reps: Vec<Vec<i64>> = Vec::new();
    let mut of = Vec::with_capacity(dirs.len());
    for v in dirs {
        let c = class_of(v);
        let k = reps.iter().position(|r| class_of(r) == c).unwrap_or_else(|| {
            reps.push(v.clone());
            reps.len() - 1
        });
        of.push(k);
    }
    (reps, of)
}

/// Per-class weights with `Σ_v c_v |det(v, t)| = 1` for `t` along each class
/// representative (crossings per unit length of a straight line).
fn line_exact_2d(dirs: &[Vec<i64>]) -> Vec<f64> {
    let (reps, of) = classes(dirs);
    let m = reps.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, t) in reps.iter().enumerate() {
        let len = ((t[0] * t[0] + t[1] * t[1]) as f64).sqrt();
        for (v, &k) in dirs.iter().zip(&of) {
            a[row][k] += ((v[0] * t[1] - v[1] * t[0]) as f64).abs() / len;
        }
        a[row][m] = 1.0;
    }
    let c = solve(a);
    of.iter().map(|&k| c[k]).collect()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for col in 0..m {
        let p = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..=m {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    (0..m).map(|i| a[i][m] / a[i][i]).collect()
}

/// Solid angles of the Voronoi cells of `±v/|v|` from a Fibonacci lattice on
/// the sphere, averaged over symmetry classes.
fn crofton_3d(dirs: &[Vec<i64>]) -> Vec<f64> {
    const POINTS: usize = 1 << 20;
    let units: Vec<[f64; 3]> = dirs
        .iter()
        .map(|v| {
            let n = ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) as f64).sqrt();
            [v[0] as f64 / n, v[1] as f64 / n, v[2] as f64 / n]
        })
        .collect();
    let mut hits = vec![0usize; dirs.len()];
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for i in 0..POINTS {
        let z = 1.0 - (2 * i + 1) as f64 / POINTS as f64;
        let r = (1.0 - z * z).sqrt();
        let (s, c) = (golden * i as f64).sin_cos();
        let p = [r * c, r * s, z];
        let best = (0..units.len())
            .max_by(|&a, &b| {
                let da = (units[a][0] * p[0] + units[a][1] * p[1] + units[a][2] * p[2]).abs();
                let db = (units[b][0] * p[0] + units[b][1] * p[1] + units[b][2] * p[2]).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        hits[best] += 1;
    }
    let (reps, of) = classes(dirs);
    let mut class_hits = vec![0usize; reps.len()];
    let mut class_size = vec![0usize; reps.len()];
    for (&k, &h) in of.iter().zip(&hits) {
        class_hits[k] += h;
        class_size[k] += 1;
    }
    dirs.iter()
        .zip(&of)
        .map(|(v, &k)| {
            // solid angle of the +v cell; the −v cell is its mirror image
            let omega = 2.0 * std::f64::consts::PI * class_hits[k] as f64 / (class_size[k] * POINTS) as f64;
            let len = ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) as f64).sqrt();
            omega / (std::f64::consts::PI * len)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(v: &[i64], t: [f64; 2]) -> f64 {
        (v[0] as f64 * t[1] - v[1] as f64 * t[0]).abs()
    }

    #[test]
    fn two_d_weights_are_exact_on_stencil_lines() {
        for st in [Stencil::N4, Stencil::N8, Stencil::N16] {
            let dirs = st.directions();
            let c = st.coefficients();
            assert_eq!(2 * dirs.len(), st.neighbors());
            for t in &dirs {
                let len = ((t[0] * t[0] + t[1] * t[1]) as f64).sqrt();
                let tu = [t[0] as f64 / len, t[1] as f64 / len];
                let est: f64 = dirs.iter().zip(&c).map(|(v, w)| w * det(v, tu)).sum();
                assert!((est - 1.0).abs() < 1e-12, "{st:?} {t:?}: {est}");
            }
        }
        // hand-solved 16-neighbour system
        let c = Stencil::N16.coefficients();
        assert!((c[0] - 0.236_067_977).abs() < 1e-8);
        assert!((c[2] - 0.114_747_627).abs() < 1e-8);
        assert!((c[4] - 0.089_072_789).abs() < 1e-8);
        // the 4-neighbour stencil measures the ℓ¹ length
        assert_eq!(Stencil::N4.coefficients(), vec![1.0, 1.0]);
    }

    #[test]
    fn sixteen_neighbour_error_is_small_at_every_angle() {
        let dirs = Stencil::N16.directions();
        let c = Stencil::N16.coefficients();
        let worst = (0..3600)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / 3600.0;
                let est: f64 = dirs.iter().zip(&c).map(|(v, w)| w * det(v, [th.cos(), th.sin()])).sum();
                est - 1.0
            })
            .fold(0.0f64, |m, e| m.max(e.abs()));
        assert!(worst < 0.03, "{worst}");
    }

    #[test]
    fn three_d_solid_angles_cover_the_hemisphere() {
        for st in [Stencil::N6, Stencil::N18, Stencil::N26] {
            let dirs = st.directions();
            assert_eq!(2 * dirs.len(), st.neighbors());
            let total: f64 = dirs
                .iter()
                .zip(st.coefficients())
                .map(|(v, c)| c * std::f64::consts::PI * ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) as f64).sqrt())
                .sum();
            assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-9, "{st:?}: {total}");
        }
        let c6 = Stencil::N6.coefficients();
        assert!(c6.iter().all(|&c| (c - 2.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn averaged_plane_area_is_unbiased() {
        // mean over random plane normals of Σ c_v |v·ν| is 1 for Crofton weights
        let dirs = Stencil::N18.directions();
        let c = Stencil::N18.coefficients();
        let n = 200_000;
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let mut mean = 0.0;
        for i in 0..n {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let nu = [r * (golden * i as f64).cos(), r * (golden * i as f64).sin(), z];
            mean += dirs
                .iter()
                .zip(&c)
                .map(|(v, w)| w * (v[0] as f64 * nu[0] + v[1] as f64 * nu[1] + v[2] as f64 * nu[2]).abs())
                .sum::<f64>();
        }
        assert!((mean / n as f64 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn unsupported_combinations() {
        assert!(matches!(Stencil::from_neighbors(2, 6), Err(Error::Config(_))));
        assert!(Stencil::default_for(4).is_err());
        assert_eq!(Stencil::from_neighbors(3, 26).unwrap(), Stencil::N26);
    }
}
