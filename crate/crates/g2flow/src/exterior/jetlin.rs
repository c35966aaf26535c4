//! Per-sample linear algebra on matrices of coefficients.
//!
//! A `JetMat` evaluates a matrix of `Coefficient`s on the grid, keeping the
//! analytic derivative levels shared by all entries. Solves factorize the
//! value matrix per sample and obtain derivative levels of the solution by
//! differentiating A x = b:
//!
//!   A x^(m) = b^(m) - sum_{i=1..m} C(m,i) A^(i) x^(m-i)
//!
//! so analytic u-derivatives survive through matrix inversion. Matrices built
//! entirely from constants are flagged `exact`: every derivative level beyond
//! those stored is exactly zero.

use nalgebra::{DMatrix, LU};

use crate::error::{Error, Result};

use super::coeff::Coefficient;
use super::grid::Grid;

fn binom(m: usize, i: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..i {
        c = c * (m - j) as f64 / (j + 1) as f64;
    }
    c
}

#[derive(Clone, Debug)]
pub struct JetMat {
    pub rows: usize,
    pub cols: usize,
    pub grid: Option<Grid>,
    /// Missing levels of an `exact` matrix are zero.
    exact: bool,
    /// data[order][sample]
    data: Vec<Vec<DMatrix<f64>>>,
}

/// Depth bookkeeping: `None` means exact to all orders.
fn combine_depth(a: &JetMat, b: &JetMat) -> Option<usize> {
    match (a.exact, b.exact) {
        (true, true) => None,
        (true, false) => Some(b.depth()),
        (false, true) => Some(a.depth()),
        (false, false) => Some(a.depth().min(b.depth())),
    }
}

impl JetMat {
    pub fn from_coeffs(rows: usize, cols: usize, entries: &[Coefficient]) -> Result<JetMat> {
        assert_eq!(entries.len(), rows * cols);
        let mut grid: Option<Grid> = None;
        let mut depth: Option<usize> = None;
        for c in entries {
            if let Some(g) = c.grid() {
                match grid {
                    None => grid = Some(g),
                    Some(s) if s == g => {}
                    Some(s) => return Err(Error::Grid(format!("{s:?} vs {g:?}"))),
                }
                depth = Some(match depth {
                    None => c.depth().unwrap(),
                    Some(d) => d.min(c.depth().unwrap()),
                });
            }
        }
        let exact = grid.is_none();
        let n_samples = grid.map_or(1, |g| g.count);
        let depth = depth.unwrap_or(0);
        let mut data = Vec::with_capacity(depth + 1);
        for order in 0..=depth {
            let mut per_sample = Vec::with_capacity(n_samples);
            for s in 0..n_samples {
                let m = DMatrix::from_fn(rows, cols, |r, c| {
                    entries[r * cols + c].eval_deriv(order, s)
                });
                per_sample.push(m);
            }
            data.push(per_sample);
        }
        Ok(JetMat { rows, cols, grid, exact, data })
    }

    pub fn identity(n: usize) -> JetMat {
        JetMat {
            rows: n,
            cols: n,
            grid: None,
            exact: true,
            data: vec![vec![DMatrix::identity(n, n)]],
        }
    }

    pub fn depth(&self) -> usize {
        self.data.len() - 1
    }

    pub fn n_samples(&self) -> usize {
        self.data[0].len()
    }

    pub fn value(&self, sample: usize) -> &DMatrix<f64> {
        &self.data[0][sample]
    }

    /// Level access; `None` stands for an exactly-zero level.
    fn level(&self, order: usize, sample: usize) -> Option<&DMatrix<f64>> {
        self.data.get(order).map(|lvl| &lvl[if lvl.len() == 1 { 0 } else { sample }])
    }

    pub fn transpose(&self) -> JetMat {
        JetMat {
            rows: self.cols,
            cols: self.rows,
            grid: self.grid,
            exact: self.exact,
            data: self
                .data
                .iter()
                .map(|lvl| lvl.iter().map(|m| m.transpose()).collect())
                .collect(),
        }
    }

    fn merge_grid(&self, other: &JetMat) -> Result<Option<Grid>> {
        match (self.grid, other.grid) {
            (None, g) | (g, None) => Ok(g),
            (Some(a), Some(b)) if a == b => Ok(Some(a)),
            (Some(a), Some(b)) => Err(Error::Grid(format!("{a:?} vs {b:?}"))),
        }
    }

    pub fn mul(&self, other: &JetMat) -> Result<JetMat> {
        assert_eq!(self.cols, other.rows);
        let grid = self.merge_grid(other)?;
        let depth_opt = combine_depth(self, other);
        let depth = depth_opt.unwrap_or(0);
        let exact = depth_opt.is_none();
        let n_samples = self.n_samples().max(other.n_samples());
        let mut data = Vec::with_capacity(depth + 1);
        for m in 0..=depth {
            let mut per_sample = Vec::with_capacity(n_samples);
            for s in 0..n_samples {
                let mut acc = DMatrix::zeros(self.rows, other.cols);
                for i in 0..=m {
                    if let (Some(a), Some(b)) = (self.level(i, s), other.level(m - i, s)) {
                        acc += a * b * binom(m, i);
                    }
                }
                per_sample.push(acc);
            }
            data.push(per_sample);
        }
        Ok(JetMat { rows: self.rows, cols: other.cols, grid, exact, data })
    }

    /// Solve A x = b per sample (square A), propagating derivative levels.
    pub fn solve(&self, rhs: &JetMat) -> Result<JetMat> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(rhs.rows, self.rows);
        let grid = self.merge_grid(rhs)?;
        let depth_opt = combine_depth(self, rhs);
        let depth = depth_opt.unwrap_or(0);
        let exact = depth_opt.is_none();
        let n_samples = self.n_samples().max(rhs.n_samples());
        let mut data: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(depth + 1);
        let mut lus: Vec<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = Vec::with_capacity(n_samples);
        for s in 0..n_samples {
            lus.push(LU::new(
                self.level(0, s).expect("value level always present").clone(),
            ));
        }
        for m in 0..=depth {
            let mut per_sample = Vec::with_capacity(n_samples);
            for s in 0..n_samples {
                let mut b = match rhs.level(m, s) {
                    Some(l) => l.clone(),
                    None => DMatrix::zeros(rhs.rows, rhs.cols),
                };
                for i in 1..=m {
                    if let Some(ai) = self.level(i, s) {
                        b -= ai * &data[m - i][s] * binom(m, i);
                    }
                }
                let x = lus[s]
                    .solve(&b)
                    .ok_or_else(|| Error::Metric(format!("singular matrix at sample {s}")))?;
                per_sample.push(x);
            }
            data.push(per_sample);
        }
        Ok(JetMat { rows: self.rows, cols: rhs.cols, grid, exact, data })
    }

    /// Least-squares solve via the normal equations, per sample.
    pub fn lsq_solve(&self, rhs: &JetMat) -> Result<JetMat> {
        let at = self.transpose();
        let ata = at.mul(self)?;
        let atb = at.mul(rhs)?;
        ata.solve(&atb)
    }

    pub fn inverse(&self) -> Result<JetMat> {
        assert_eq!(self.rows, self.cols);
        self.solve(&JetMat::identity(self.rows))
    }

    /// Entry-wise u-derivative, one level shallower.
    fn shift(&self) -> JetMat {
        debug_assert!(self.depth() >= 1);
        JetMat {
            rows: self.rows,
            cols: self.cols,
            grid: self.grid,
            exact: self.exact,
            data: self.data[1..].to_vec(),
        }
    }

    /// Determinant with derivative levels (via det' = det * tr(A^-1 A')).
    pub fn det(&self) -> Result<Vec<Vec<f64>>> {
        assert_eq!(self.rows, self.cols);
        let n_samples = self.n_samples();
        let values: Vec<f64> = (0..n_samples).map(|s| self.data[0][s].determinant()).collect();
        let depth = self.depth();
        let mut jet = vec![values];
        if depth >= 1 {
            let q = self.inverse()?.mul(&self.shift())?;
            for m in 1..=depth {
                let mut level = vec![0.0; n_samples];
                for (s, lv) in level.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for i in 0..m {
                        if let Some(qi) = q.level(i, s) {
                            acc += binom(m - 1, i) * qi.trace() * jet[m - 1 - i][s];
                        }
                    }
                    *lv = acc;
                }
                jet.push(level);
            }
        }
        Ok(jet)
    }

    /// Repackage as coefficients (constants when no grid is involved).
    pub fn to_coeffs(&self) -> Vec<Coefficient> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(self.entry_coeff(r, c));
            }
        }
        out
    }

    pub fn entry_coeff(&self, r: usize, c: usize) -> Coefficient {
        match self.grid {
            None => Coefficient::Const(self.data[0][0][(r, c)]),
            Some(g) => {
                let jet = self
                    .data
                    .iter()
                    .map(|lvl| lvl.iter().map(|m| m[(r, c)]).collect())
                    .collect();
                Coefficient::field_with_jet(g, jet)
            }
        }
    }

    pub fn jet_to_coeff(&self, jet: Vec<Vec<f64>>) -> Coefficient {
        match self.grid {
            None => Coefficient::Const(jet[0][0]),
            Some(g) => Coefficient::field_with_jet(g, jet),
        }
    }
}
