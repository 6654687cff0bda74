//! Vector fields sampled on a regular grid, evaluated by multilinear
//! interpolation.
//!
//! Text format: `#` comments, a header of `dims`, `origin` and `spacing`
//! lines (one value per axis), then one row of `d` field components per
//! grid node in row-major order with the last axis fastest.

use std::fmt::Write as _;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedField {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    /// `values[node * d + component]`.
    values: Vec<f64>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

impl TabulatedField {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let d = dims.len();
        if d == 0 || origin.len() != d || spacing.len() != d {
            return Err(domain("dims, origin and spacing must have one entry per axis"));
        }
        if dims.iter().any(|&n| n < 2) {
            return Err(domain("every axis needs at least two nodes"));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) || origin.iter().any(|o| !o.is_finite()) {
            return Err(domain("spacing must be positive and origin finite"));
        }
        let nodes: usize = dims.iter().product();
        if values.len() != nodes * d {
            return Err(domain(format!("expected {} values, got {}", nodes * d, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("tabulated field value"));
        }
        Ok(Self { dims, origin, spacing, values })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(
        dims: Vec<usize>,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        mut f: impl FnMut(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let d = dims.len();
        let nodes: usize = dims.iter().product();
        let mut values = Vec::with_capacity(nodes * d);
        let mut x = vec![0.0; d];
        for node in 0..nodes {
            let mut rest = node;
            for k in (0..d).rev() {
                x[k] = origin[k] + spacing[k] * (rest % dims[k]) as f64;
                rest /= dims[k];
            }
            let v = f(&x);
            if v.len() != d {
                return Err(domain("field function returned the wrong number of components"));
            }
            values.extend(v);
        }
        Self::new(dims, origin, spacing, values)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut dims = None;
        let mut origin = None;
        let mut spacing = None;
        let mut values = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let head = words.next().unwrap();
            let floats = |w: std::str::SplitWhitespace| {
                w.map(|t| t.parse::<f64>().map_err(|e| parse_err(i + 1, format!("{t:?}: {e}"))))
                    .collect::<Result<Vec<f64>>>()
            };
            match head {
                "dims" => {
                    let v = words
                        .map(|t| t.parse::<usize>().map_err(|e| parse_err(i + 1, format!("{t:?}: {e}"))))
                        .collect::<Result<Vec<usize>>>()?;
                    dims = Some(v);
                }
                "origin" => origin = Some(floats(words)?),
                "spacing" => spacing = Some(floats(words)?),
                _ => {
                    let d = dims.as_ref().map(Vec::len).ok_or_else(|| parse_err(i + 1, "data before the dims line"))?;
                    let row = floats(line.split_whitespace())?;
                    if row.len() != d {
                        return Err(parse_err(i + 1, format!("expected {d} components, got {}", row.len())));
                    }
                    values.extend(row);
                }
            }
        }
        let missing = |what: &str| parse_err(0, format!("missing {what} line"));
        Self::new(
            dims.ok_or_else(|| missing("dims"))?,
            origin.ok_or_else(|| missing("origin"))?,
            spacing.ok_or_else(|| missing("spacing"))?,
            values,
        )
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let dims: Vec<String> = self.dims.iter().map(usize::to_string).collect();
        writeln!(out, "dims {}", dims.join(" ")).unwrap();
        writeln!(out, "origin {}", join(&self.origin)).unwrap();
        writeln!(out, "spacing {}", join(&self.spacing)).unwrap();
        for row in self.values.chunks(self.dim()) {
            writeln!(out, "{}", join(row)).unwrap();
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Lower and upper corners of the grid.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = (0..self.dim()).map(|k| self.origin[k] + self.spacing[k] * (self.dims[k] - 1) as f64).collect();
        (self.origin.clone(), hi)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if x.len() != d {
            return Err(domain(format!("point has {} coordinates, field dimension is {d}", x.len())));
        }
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for k in 0..d {
            let g = (x[k] - self.origin[k]) / self.spacing[k];
            let last = (self.dims[k] - 1) as f64;
            if !(g >= 0.0 && g <= last) {
                return Err(domain(format!("coordinate {k} = {} outside the tabulated grid", x[k])));
            }
            let i = (g.floor() as usize).min(self.dims[k] - 2);
            base[k] = i;
            frac[k] = g - i as f64;
        }
        let mut out = vec![0.0; d];
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut node = 0;
            for k in 0..d {
                let bit = (corner >> (d - 1 - k)) & 1;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                node = node * self.dims[k] + base[k] + bit;
            }
            if w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(&self.values[node * d..(node + 1) * d]) {
                *o += w * v;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation_plus_shear() -> TabulatedField {
        TabulatedField::from_fn(vec![4, 5], vec![-1.0, 0.0], vec![0.5, 0.25], |x| vec![-x[1] + 0.3 * x[0], x[0]]).unwrap()
    }

    #[test]
    fn linear_fields_are_reproduced() {
        let f = rotation_plus_shear();
        for x in [[-1.0, 0.0], [0.37, 0.91], [0.5, 1.0], [-0.2, 0.6]] {
            let v = f.eval(&x).unwrap();
            assert!((v[0] - (-x[1] + 0.3 * x[0])).abs() < 1e-15);
            assert!((v[1] - x[0]).abs() < 1e-15);
        }
        assert!(f.eval(&[0.6, 0.5]).is_err());
        assert!(f.eval(&[0.0, -0.01]).is_err());
    }

    #[test]
    fn bilinear_cell_value() {
        // corners 0, 1, 2, 4: the centre is their mean
        let f = TabulatedField::new(vec![2, 2], vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 4.0, 0.0])
            .unwrap();
        assert_eq!(f.eval(&[0.5, 0.5]).unwrap()[0], 1.75);
        // row-major, last axis fastest: node (0, 1) holds 1
        assert_eq!(f.eval(&[0.0, 1.0]).unwrap()[0], 1.0);
    }

    #[test]
    fn text_round_trip() {
        let f = rotation_plus_shear();
        let g = TabulatedField::parse(&f.to_text()).unwrap();
        assert_eq!(f, g);
        let text = "# demo\ndims 2 2\norigin 0 0\nspacing 1 1\n1 0\n1 0\n1 0\n1 0 # last\n";
        let v = TabulatedField::parse(text).unwrap().eval(&[0.3, 0.3]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1] == 0.0);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(TabulatedField::parse("1 2\n"), Err(Error::Parse { line: 1, .. })));
        let short = "dims 2 2\norigin 0 0\nspacing 1 1\n1 0\n";
        assert!(TabulatedField::parse(short).is_err());
        let bad = "dims 2 2\norigin 0 0\nspacing 1 1\n1 x\n";
        assert!(matches!(TabulatedField::parse(bad), Err(Error::Parse { line: 4, .. })));
        assert!(TabulatedField::parse("dims 2 2\norigin 0 0\n").is_err());
    }
}
