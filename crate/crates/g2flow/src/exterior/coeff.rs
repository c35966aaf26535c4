//! Scalar coefficients: constants, or functions of the warping coordinate u
//! sampled on a grid.
//!
//! A field coefficient stores its value samples together with an optional
//! chain of analytic derivative samples (a truncated jet). Arithmetic
//! propagates the jet by the Leibniz rule, so analytic u-derivatives survive
//! through wedge products, Hodge stars and linear solves. When no analytic
//! derivatives are available, `derivative` falls back to 4th-order finite
//! differences.

use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::grid::{derivative4, Grid};

#[derive(Clone, Debug)]
pub enum Coefficient {
    Const(f64),
    Field(Arc<FieldData>),
}

#[derive(Clone, Debug)]
pub struct FieldData {
    pub grid: Grid,
    /// `jet[0]` holds the value samples, `jet[m]` the m-th derivative samples.
    pub jet: Vec<Vec<f64>>,
}

fn binom(m: usize, i: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..i {
        c = c * (m - j) as f64 / (j + 1) as f64;
    }
    c
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Const(0.0)
    }

    pub fn one() -> Self {
        Coefficient::Const(1.0)
    }

    pub fn field(grid: Grid, samples: Vec<f64>) -> Self {
        assert_eq!(samples.len(), grid.count, "sample count must match grid");
        Coefficient::Field(Arc::new(FieldData { grid, jet: vec![samples] }))
    }

    pub fn field_with_jet(grid: Grid, jet: Vec<Vec<f64>>) -> Self {
        assert!(!jet.is_empty());
        for level in &jet {
            assert_eq!(level.len(), grid.count);
        }
        Coefficient::Field(Arc::new(FieldData { grid, jet }))
    }

    /// The coordinate function u itself, carrying `depth` analytic derivatives.
    pub fn coordinate(grid: Grid, depth: usize) -> Self {
        let mut jet = vec![grid.points()];
        if depth >= 1 {
            jet.push(vec![1.0; grid.count]);
        }
        for _ in 2..=depth {
            jet.push(vec![0.0; grid.count]);
        }
        Coefficient::field_with_jet(grid, jet)
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, Coefficient::Const(c) if *c == 0.0)
    }

    pub fn grid(&self) -> Option<Grid> {
        match self {
            Coefficient::Const(_) => None,
            Coefficient::Field(f) => Some(f.grid),
        }
    }

    /// Number of analytic derivative levels carried (`None` for constants,
    /// which differentiate exactly to any order).
    pub fn depth(&self) -> Option<usize> {
        match self {
            Coefficient::Const(_) => None,
            Coefficient::Field(f) => Some(f.jet.len() - 1),
        }
    }

    pub fn eval(&self, sample: usize) -> f64 {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Field(f) => f.jet[0][sample],
        }
    }

    /// Value of the m-th derivative at a sample; analytic levels only.
    pub fn eval_deriv(&self, order: usize, sample: usize) -> f64 {
        match self {
            Coefficient::Const(c) => {
                if order == 0 {
                    *c
                } else {
                    0.0
                }
            }
            Coefficient::Field(f) => f.jet.get(order).map_or(0.0, |l| l[sample]),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Coefficient::Const(c) => c.abs(),
            Coefficient::Field(f) => f.jet[0].iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Field(f) => f.jet[0].iter().fold(f64::INFINITY, |m, v| m.min(*v)),
        }
    }

    /// Drops analytic derivative levels, keeping the value samples.
    pub fn strip_jets(&self) -> Coefficient {
        match self {
            Coefficient::Const(c) => Coefficient::Const(*c),
            Coefficient::Field(f) => Coefficient::field(f.grid, f.jet[0].clone()),
        }
    }

    /// Overwrites one value sample. Analytic derivative levels become stale
    /// and are dropped. Constants are promoted to fields on `grid` (no-op
    /// when the value already matches).
    pub fn set_sample(&mut self, grid: Grid, sample: usize, value: f64) {
        let mut samples = match self {
            Coefficient::Const(c) => {
                if *c == value {
                    return;
                }
                vec![*c; grid.count]
            }
            Coefficient::Field(f) => {
                assert_eq!(f.grid, grid);
                if f.jet.len() == 1 && f.jet[0][sample] == value {
                    return;
                }
                f.jet[0].clone()
            }
        };
        samples[sample] = value;
        *self = Coefficient::field(grid, samples);
    }

    /// Derivative with respect to u. Uses the analytic jet when present,
    /// otherwise 4th-order finite differences.
    pub fn derivative(&self) -> Coefficient {
        match self {
            Coefficient::Const(_) => Coefficient::Const(0.0),
            Coefficient::Field(f) => {
                if f.jet.len() > 1 {
                    Coefficient::field_with_jet(f.grid, f.jet[1..].to_vec())
                } else {
                    Coefficient::field(f.grid, derivative4(&f.jet[0], f.grid.spacing()))
                }
            }
        }
    }

    pub fn neg(&self) -> Coefficient {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Coefficient {
        match self {
            Coefficient::Const(c) => Coefficient::Const(c * s),
            Coefficient::Field(f) => {
                let jet = f.jet.iter().map(|l| l.iter().map(|v| v * s).collect()).collect();
                Coefficient::field_with_jet(f.grid, jet)
            }
        }
    }

    pub fn add(&self, other: &Coefficient) -> Coefficient {
        match (self, other) {
            (Coefficient::Const(a), Coefficient::Const(b)) => Coefficient::Const(a + b),
            (Coefficient::Const(a), Coefficient::Field(f))
            | (Coefficient::Field(f), Coefficient::Const(a)) => {
                let mut jet = f.jet.clone();
                jet[0].iter_mut().for_each(|v| *v += a);
                Coefficient::field_with_jet(f.grid, jet)
            }
            (Coefficient::Field(a), Coefficient::Field(b)) => {
                assert_eq!(a.grid, b.grid, "coefficient grids must match");
                let depth = (a.jet.len() - 1).min(b.jet.len() - 1);
                let jet = (0..=depth)
                    .map(|m| a.jet[m].iter().zip(&b.jet[m]).map(|(x, y)| x + y).collect())
                    .collect();
                Coefficient::field_with_jet(a.grid, jet)
            }
        }
    }

    pub fn sub(&self, other: &Coefficient) -> Coefficient {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Coefficient) -> Coefficient {
        match (self, other) {
            (Coefficient::Const(a), Coefficient::Const(b)) => Coefficient::Const(a * b),
            (Coefficient::Const(a), _) => other.scale(*a),
            (_, Coefficient::Const(b)) => self.scale(*b),
            (Coefficient::Field(a), Coefficient::Field(b)) => {
                assert_eq!(a.grid, b.grid, "coefficient grids must match");
                let depth = (a.jet.len() - 1).min(b.jet.len() - 1);
                let n = a.grid.count;
                let mut jet = Vec::with_capacity(depth + 1);
                for m in 0..=depth {
                    let mut level = vec![0.0; n];
                    for i in 0..=m {
                        let c = binom(m, i);
                        let (x, y) = (&a.jet[i], &b.jet[m - i]);
                        for s in 0..n {
                            level[s] += c * x[s] * y[s];
                        }
                    }
                    jet.push(level);
                }
                Coefficient::field_with_jet(a.grid, jet)
            }
        }
    }

    pub fn div(&self, other: &Coefficient) -> Coefficient {
        match other {
            Coefficient::Const(b) => self.scale(1.0 / b),
            Coefficient::Field(b) => {
                let (grid, depth_b) = (b.grid, b.jet.len() - 1);
                let depth = match self.depth() {
                    None => depth_b,
                    Some(d) => d.min(depth_b),
                };
                let n = grid.count;
                let mut jet: Vec<Vec<f64>> = Vec::with_capacity(depth + 1);
                for m in 0..=depth {
                    let mut level = vec![0.0; n];
                    for s in 0..n {
                        let mut acc = self.eval_deriv(m, s);
                        for i in 0..m {
                            acc -= binom(m, i) * jet[i][s] * b.jet[m - i][s];
                        }
                        level[s] = acc / b.jet[0][s];
                    }
                    jet.push(level);
                }
                Coefficient::field_with_jet(grid, jet)
            }
        }
    }

    pub fn recip(&self) -> Coefficient {
        Coefficient::Const(1.0).div(self)
    }

    pub fn sqrt(&self) -> Coefficient {
        match self {
            Coefficient::Const(c) => Coefficient::Const(c.sqrt()),
            Coefficient::Field(f) => {
                let depth = f.jet.len() - 1;
                let n = f.grid.count;
                let mut jet: Vec<Vec<f64>> = Vec::with_capacity(depth + 1);
                jet.push(f.jet[0].iter().map(|v| v.sqrt()).collect());
                for m in 1..=depth {
                    let mut level = vec![0.0; n];
                    for s in 0..n {
                        let mut acc = f.jet[m][s];
                        for i in 1..m {
                            acc -= binom(m, i) * jet[i][s] * jet[m - i][s];
                        }
                        level[s] = acc / (2.0 * jet[0][s]);
                    }
                    jet.push(level);
                }
                Coefficient::field_with_jet(f.grid, jet)
            }
        }
    }

    pub fn exp(&self) -> Coefficient {
        match self {
            Coefficient::Const(c) => Coefficient::Const(c.exp()),
            Coefficient::Field(f) => {
                let depth = f.jet.len() - 1;
                let n = f.grid.count;
                let mut jet: Vec<Vec<f64>> = Vec::with_capacity(depth + 1);
                jet.push(f.jet[0].iter().map(|v| v.exp()).collect());
                for m in 1..=depth {
                    // r^(m) = (g' r)^(m-1)
                    let mut level = vec![0.0; n];
                    for s in 0..n {
                        let mut acc = 0.0;
                        for i in 0..m {
                            acc += binom(m - 1, i) * f.jet[i + 1][s] * jet[m - 1 - i][s];
                        }
                        level[s] = acc;
                    }
                    jet.push(level);
                }
                Coefficient::field_with_jet(f.grid, jet)
            }
        }
    }

    pub fn ln(&self) -> Coefficient {
        match self {
            Coefficient::Const(c) => Coefficient::Const(c.ln()),
            Coefficient::Field(f) => {
                let depth = f.jet.len() - 1;
                let values: Vec<f64> = f.jet[0].iter().map(|v| v.ln()).collect();
                if depth == 0 {
                    return Coefficient::field(f.grid, values);
                }
                // derivatives of ln a are the jet of a'/a shifted by one
                let q = self.derivative().div(self);
                let mut jet = vec![values];
                if let Coefficient::Field(qf) = q {
                    jet.extend(qf.jet.iter().cloned());
                }
                Coefficient::field_with_jet(f.grid, jet)
            }
        }
    }

    pub fn powf(&self, p: f64) -> Coefficient {
        match self {
            Coefficient::Const(c) => Coefficient::Const(c.powf(p)),
            _ => self.ln().scale(p).exp(),
        }
    }

    pub fn powi(&self, p: i32) -> Coefficient {
        match p {
            0 => Coefficient::one(),
            _ if p < 0 => self.powi(-p).recip(),
            _ => {
                let mut acc = self.clone();
                for _ in 1..p {
                    acc = acc.mul(self);
                }
                acc
            }
        }
    }
}

// JSON shape: a bare number for constants, an object with grid and samples
// (and optional derivative levels) for fields.
impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Coefficient::Const(c) => ser.serialize_f64(*c),
            Coefficient::Field(f) => {
                #[derive(Serialize)]
                struct FieldJson<'a> {
                    grid: Grid,
                    samples: &'a [f64],
                    #[serde(skip_serializing_if = "Vec::is_empty")]
                    derivatives: Vec<&'a [f64]>,
                }
                FieldJson {
                    grid: f.grid,
                    samples: &f.jet[0],
                    derivatives: f.jet[1..].iter().map(|l| l.as_slice()).collect(),
                }
                .serialize(ser)
            }
        }
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Const(f64),
            Field {
                grid: Grid,
                samples: Vec<f64>,
                #[serde(default)]
                derivatives: Vec<Vec<f64>>,
            },
        }
        match Repr::deserialize(de)? {
            Repr::Const(c) => Ok(Coefficient::Const(c)),
            Repr::Field { grid, samples, derivatives } => {
                let mut jet = vec![samples];
                jet.extend(derivatives);
                for level in &jet {
                    if level.len() != grid.count {
                        return Err(D::Error::custom("sample count does not match grid"));
                    }
                }
                Ok(Coefficient::field_with_jet(grid, jet))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(-1.0, 1.0, 21).unwrap()
    }

    fn max_jet_err(c: &Coefficient, order: usize, f: impl Fn(f64) -> f64) -> f64 {
        let g = c.grid().unwrap();
        g.points()
            .iter()
            .enumerate()
            .map(|(s, &u)| (c.eval_deriv(order, s) - f(u)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn jets_propagate_through_arithmetic() {
        let u = Coefficient::coordinate(grid(), 4);
        // w = exp(2u) / sqrt(1 + u^2)
        let w = u
            .scale(2.0)
            .exp()
            .div(&u.mul(&u).add(&Coefficient::one()).sqrt());
        let f = |x: f64| (2.0 * x).exp() / (1.0 + x * x).sqrt();
        let df = |x: f64| {
            (2.0 * x).exp() * (2.0 / (1.0 + x * x).sqrt() - x / (1.0 + x * x).powf(1.5))
        };
        assert!(max_jet_err(&w, 0, f) < 1e-12);
        assert!(max_jet_err(&w, 1, df) < 1e-11);
        assert_eq!(w.depth(), Some(4));
    }

    #[test]
    fn powf_jets_match_analytic_derivatives() {
        let g = Grid::new(0.5, 2.0, 17).unwrap();
        let u = Coefficient::coordinate(g, 5);
        let w = u.scale(3.0).powf(1.0 / 3.0); // (3u)^{1/3}
        let f = |x: f64| (3.0 * x).powf(1.0 / 3.0);
        let d3 = |x: f64| {
            // third derivative of (3u)^{1/3}
            3.0f64.powi(3) * (1.0 / 3.0) * (1.0 / 3.0 - 1.0) * (1.0 / 3.0 - 2.0)
                * (3.0 * x).powf(1.0 / 3.0 - 3.0)
        };
        let gg = w.grid().unwrap();
        let err: f64 = gg
            .points()
            .iter()
            .enumerate()
            .map(|(s, &x)| (w.eval_deriv(3, s) - d3(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "err={err}");
        assert!((w.eval(0) - f(0.5)).abs() < 1e-13);
    }

    #[test]
    fn fd_fallback_when_no_jet() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let c = Coefficient::field(g, g.sample(|u| (2.0 * u).sin()));
        let d = c.derivative();
        let err = max_jet_err(&d, 0, |u| 2.0 * (2.0 * u).cos());
        assert!(err < 1e-6, "err={err}");
    }

    #[test]
    fn json_round_trip() {
        let g = grid();
        let c = Coefficient::coordinate(g, 1);
        let s = serde_json::to_string(&c).unwrap();
        let back: Coefficient = serde_json::from_str(&s).unwrap();
        assert_eq!(back.depth(), Some(1));
        assert!((back.eval(3) - c.eval(3)).abs() == 0.0);
        let k = Coefficient::Const(2.5);
        assert_eq!(serde_json::to_string(&k).unwrap(), "2.5");
    }
}
