//! Exterior forms over a fixed coframe with dense coefficient storage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::coeff::Coefficient;
use super::comb;
use super::grid::Grid;

/// A degree-k exterior form on an n-dimensional coframe. Coefficients are
/// stored densely over all C(n,k) increasing multi-indices.
#[derive(Clone, Debug)]
pub struct Form {
    n: usize,
    degree: usize,
    coeffs: Vec<Coefficient>,
}

impl Form {
    pub fn zero(n: usize, degree: usize) -> Self {
        assert!(n <= comb::MAX_N && degree <= n);
        Form { n, degree, coeffs: vec![Coefficient::zero(); comb::binomial(n, degree)] }
    }

    /// Basis monomial e^{i1...ik} for a strictly increasing 1-based tuple.
    pub fn basis(n: usize, indices: &[usize]) -> Self {
        let mut f = Form::zero(n, indices.len());
        let mask = comb::mask_of(indices, n).expect("indices must be strictly increasing");
        f.coeffs[comb::rank(n, mask)] = Coefficient::one();
        f
    }

    pub fn from_terms(n: usize, degree: usize, terms: &[(&[usize], Coefficient)]) -> Result<Self> {
        let mut f = Form::zero(n, degree);
        for (idx, c) in terms {
            let mask = comb::mask_of(idx, n).ok_or_else(|| {
                Error::Dimension(format!("invalid index tuple {idx:?} for n={n}"))
            })?;
            if idx.len() != degree {
                return Err(Error::Degree(format!(
                    "tuple {idx:?} has length {} but form has degree {degree}",
                    idx.len()
                )));
            }
            let r = comb::rank(n, mask);
            f.coeffs[r] = f.coeffs[r].add(c);
        }
        f.check_grids()?;
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    pub fn coeff_mut(&mut self, indices: &[usize]) -> &mut Coefficient {
        let mask = comb::mask_of(indices, self.n).expect("invalid tuple");
        let r = comb::rank(self.n, mask);
        &mut self.coeffs[r]
    }

    pub fn coeff(&self, indices: &[usize]) -> &Coefficient {
        let mask = comb::mask_of(indices, self.n).expect("invalid tuple");
        &self.coeffs[comb::rank(self.n, mask)]
    }

    /// Coefficient at a layout position (the rank of its index mask among
    /// same-degree masks in ascending numeric order).
    pub fn coeff_by_rank(&self, r: usize) -> &Coefficient {
        &self.coeffs[r]
    }

    pub fn set_by_rank(&mut self, r: usize, c: Coefficient) {
        self.coeffs[r] = c;
    }

    pub(crate) fn from_raw(n: usize, degree: usize, coeffs: Vec<Coefficient>) -> Self {
        debug_assert_eq!(coeffs.len(), comb::binomial(n, degree));
        Form { n, degree, coeffs }
    }

    /// The common grid of all field coefficients, if any.
    pub fn grid(&self) -> Option<Grid> {
        self.coeffs.iter().find_map(|c| c.grid())
    }

    /// Verifies all field coefficients share one grid.
    pub fn check_grids(&self) -> Result<()> {
        let mut seen: Option<Grid> = None;
        for c in &self.coeffs {
            if let Some(g) = c.grid() {
                match seen {
                    None => seen = Some(g),
                    Some(s) if s == g => {}
                    Some(s) => {
                        return Err(Error::Grid(format!(
                            "mixed grids within one form: {s:?} vs {g:?}"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    fn compatible(&self, other: &Form) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "frame dimensions differ: {} vs {}",
                self.n, other.n
            )));
        }
        if let (Some(a), Some(b)) = (self.grid(), other.grid()) {
            if a != b {
                return Err(Error::Grid(format!("{a:?} vs {b:?}")));
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::Degree(format!(
                "cannot add degree {} to degree {}",
                self.degree, other.degree
            )));
        }
        let coeffs =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect();
        Ok(Form::from_raw(self.n, self.degree, coeffs))
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Form {
        let coeffs = self.coeffs.iter().map(|c| c.scale(s)).collect();
        Form::from_raw(self.n, self.degree, coeffs)
    }

    pub fn scale_coeff(&self, s: &Coefficient) -> Form {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.is_const_zero() { Coefficient::zero() } else { c.mul(s) })
            .collect();
        Form::from_raw(self.n, self.degree, coeffs)
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        self.compatible(other)?;
        let k = self.degree + other.degree;
        if k > self.n {
            // identically zero; reported as a zero form of top degree
            return Ok(Form::zero(self.n, self.n));
        }
        let mut out = Form::zero(self.n, k);
        let a_masks = comb::masks(self.n, self.degree);
        let b_masks = comb::masks(self.n, other.degree);
        for (ra, &ma) in a_masks.iter().enumerate() {
            let ca = &self.coeffs[ra];
            if ca.is_const_zero() {
                continue;
            }
            for (rb, &mb) in b_masks.iter().enumerate() {
                let cb = &other.coeffs[rb];
                if cb.is_const_zero() || ma & mb != 0 {
                    continue;
                }
                let sign = comb::merge_sign(ma, mb);
                let r = comb::rank(self.n, ma | mb);
                let term = ca.mul(cb).scale(sign);
                out.coeffs[r] = out.coeffs[r].add(&term);
            }
        }
        Ok(out)
    }

    /// Interior product with the basis vector e_i (1-based).
    pub fn contract_basis(&self, i: usize) -> Result<Form> {
        if self.degree == 0 {
            return Err(Error::Degree("cannot contract a 0-form".into()));
        }
        if i == 0 || i > self.n {
            return Err(Error::Dimension(format!("vector index {i} out of range")));
        }
        let mut out = Form::zero(self.n, self.degree - 1);
        let bit = 1u8 << (i - 1);
        for (r, &m) in comb::masks(self.n, self.degree).iter().enumerate() {
            if m & bit == 0 || self.coeffs[r].is_const_zero() {
                continue;
            }
            let sign = comb::contract_sign(i, m);
            let rr = comb::rank(self.n, m & !bit);
            out.coeffs[rr] = out.coeffs[rr].add(&self.coeffs[r].scale(sign));
        }
        Ok(out)
    }

    /// Interior product with a coefficient-weighted vector.
    pub fn contract(&self, v: &[Coefficient]) -> Result<Form> {
        if v.len() != self.n {
            return Err(Error::Dimension(format!(
                "vector has {} components, frame has {}",
                v.len(),
                self.n
            )));
        }
        if self.degree == 0 {
            return Err(Error::Degree("cannot contract a 0-form".into()));
        }
        let mut out = Form::zero(self.n, self.degree - 1);
        for (i, vi) in v.iter().enumerate() {
            if vi.is_const_zero() {
                continue;
            }
            out = out.add(&self.contract_basis(i + 1)?.scale_coeff(vi))?;
        }
        Ok(out)
    }

    /// Pullback along the linear map sending e_j to sum_i A[(i,j)] e_i.
    /// On 1-forms this is (A*α)(v) = α(Av).
    pub fn pullback(&self, a: &nalgebra::DMatrix<f64>) -> Form {
        assert_eq!(a.nrows(), self.n);
        assert_eq!(a.ncols(), self.n);
        let k = self.degree;
        let mut out = Form::zero(self.n, k);
        let masks = comb::masks(self.n, k);
        for (ri, &mi) in masks.iter().enumerate() {
            if self.coeffs[ri].is_const_zero() {
                continue;
            }
            let rows = comb::tuple(mi);
            for (rj, &mj) in masks.iter().enumerate() {
                let cols = comb::tuple(mj);
                let mut minor = nalgebra::DMatrix::zeros(k, k);
                for (p, &r) in rows.iter().enumerate() {
                    for (q, &c) in cols.iter().enumerate() {
                        minor[(p, q)] = a[(r - 1, c - 1)];
                    }
                }
                let det = if k == 0 { 1.0 } else { minor.determinant() };
                if det != 0.0 {
                    out.coeffs[rj] = out.coeffs[rj].add(&self.coeffs[ri].scale(det));
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Form) -> f64 {
        match self.sub(other) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Number of grid samples (1 if all coefficients are constant).
    pub fn n_samples(&self) -> usize {
        self.grid().map_or(1, |g| g.count)
    }

    /// Coefficient values at one sample, in layout order.
    pub fn eval_sample(&self, s: usize) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.eval(s)).collect()
    }

    pub fn map_coeffs(&self, f: impl Fn(&Coefficient) -> Coefficient) -> Form {
        Form::from_raw(self.n, self.degree, self.coeffs.iter().map(f).collect())
    }
}

impl std::fmt::Display for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (r, &m) in comb::masks(self.n, self.degree).iter().enumerate() {
            let c = &self.coeffs[r];
            if c.max_abs() < 1e-13 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let idx: String = comb::tuple(m).iter().map(|i| i.to_string()).collect();
            match c {
                Coefficient::Const(v) => write!(f, "{v:.6}*e{idx}")?,
                Coefficient::Field(_) => {
                    // constant-valued fields print as their value
                    let (lo, hi) = (c.min_value(), c.max_abs());
                    if (c.scale(-1.0).min_value() + lo).abs() < 1e-12 * hi.max(1.0) {
                        write!(f, "{lo:.6}*e{idx}")?;
                    } else {
                        write!(f, "f(u)*e{idx}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    idx: Vec<usize>,
    coeff: Coefficient,
}

#[derive(Serialize, Deserialize)]
struct FormJson {
    n: usize,
    degree: usize,
    terms: Vec<TermJson>,
}

impl Serialize for Form {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = comb::masks(self.n, self.degree)
            .iter()
            .enumerate()
            .filter(|(r, _)| !self.coeffs[*r].is_const_zero())
            .map(|(r, &m)| TermJson { idx: comb::tuple(m), coeff: self.coeffs[r].clone() })
            .collect();
        FormJson { n: self.n, degree: self.degree, terms }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = FormJson::deserialize(de)?;
        if raw.n > comb::MAX_N || raw.degree > raw.n {
            return Err(D::Error::custom(format!(
                "invalid form shape n={} degree={}",
                raw.n, raw.degree
            )));
        }
        let terms: Vec<(&[usize], Coefficient)> =
            raw.terms.iter().map(|t| (t.idx.as_slice(), t.coeff.clone())).collect();
        Form::from_terms(raw.n, raw.degree, &terms).map_err(D::Error::custom)
    }
}
