//! Riemannian metrics on a coframe, the induced inner products on each
//! exterior power and the Hodge star.
//!
//! Convention: increasing wedge monomials of an orthonormal coframe are
//! orthonormal (no k! weights), and the volume form is
//! orientation * sqrt(det g) e^{1..n}.

use nalgebra::DMatrix;
use once_cell::sync::OnceCell;

use crate::error::{Error, Result};

use super::coeff::Coefficient;
use super::comb;
use super::form::Form;
use super::frame::FrameStructure;
use super::grid::Grid;
use super::jetlin::JetMat;

/// Symmetric n x n tensor of coefficients (packed upper triangle).
#[derive(Clone, Debug)]
pub struct SymTensor {
    n: usize,
    entries: Vec<Coefficient>,
}

fn pack_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // row i (0-based), column j >= i
    i * n - i * (i + 1) / 2 + j
}

impl SymTensor {
    pub fn zero(n: usize) -> Self {
        SymTensor { n, entries: vec![Coefficient::zero(); n * (n + 1) / 2] }
    }

    pub fn from_diag(diag: &[Coefficient]) -> Self {
        let n = diag.len();
        let mut t = SymTensor::zero(n);
        for (i, c) in diag.iter().enumerate() {
            t.set(i + 1, i + 1, c.clone());
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 1-based access.
    pub fn get(&self, i: usize, j: usize) -> &Coefficient {
        &self.entries[pack_index(self.n, i - 1, j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, c: Coefficient) {
        self.entries[pack_index(self.n, i - 1, j - 1)] = c;
    }

    pub fn add(&self, other: &SymTensor) -> SymTensor {
        assert_eq!(self.n, other.n);
        SymTensor {
            n: self.n,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &SymTensor) -> SymTensor {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> SymTensor {
        SymTensor { n: self.n, entries: self.entries.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn scale_coeff(&self, s: &Coefficient) -> SymTensor {
        SymTensor { n: self.n, entries: self.entries.iter().map(|c| c.mul(s)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &SymTensor) -> f64 {
        self.sub(other).max_abs()
    }

    /// Full row-major n x n coefficient list.
    pub fn full_entries(&self) -> Vec<Coefficient> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 1..=self.n {
            for j in 1..=self.n {
                out.push(self.get(i, j).clone());
            }
        }
        out
    }

    pub fn grid(&self) -> Option<Grid> {
        self.entries.iter().find_map(|c| c.grid())
    }

    /// Trace with respect to a metric: g^{ij} t_{ij}.
    pub fn metric_trace(&self, g: &Metric) -> Coefficient {
        let ginv = g.inverse();
        let n = self.n;
        let mut acc = Coefficient::zero();
        for i in 1..=n {
            for j in 1..=n {
                acc = acc.add(&ginv[(i - 1) * n + (j - 1)].mul(self.get(i, j)));
            }
        }
        acc
    }
}

/// Small determinants over the coefficient ring.
fn det_coeff(m: &[Coefficient], k: usize) -> Coefficient {
    match k {
        0 => Coefficient::one(),
        1 => m[0].clone(),
        2 => m[0].mul(&m[3]).sub(&m[1].mul(&m[2])),
        3 => {
            let a = m[0].mul(&m[4].mul(&m[8]).sub(&m[5].mul(&m[7])));
            let b = m[1].mul(&m[3].mul(&m[8]).sub(&m[5].mul(&m[6])));
            let c = m[2].mul(&m[3].mul(&m[7]).sub(&m[4].mul(&m[6])));
            a.sub(&b).add(&c)
        }
        _ => unreachable!("minor size {k} not needed for n <= 7"),
    }
}

/// Riemannian metric: symmetric positive tensor plus an orientation sign.
#[derive(Clone, Debug)]
pub struct Metric {
    sym: SymTensor,
    orientation: f64,
    inv: OnceCell<Vec<Coefficient>>,
    det: OnceCell<Coefficient>,
    sqrt_det: OnceCell<Coefficient>,
    grams: [OnceCell<Vec<Coefficient>>; comb::MAX_N + 1],
}

impl Metric {
    /// Builds a metric, verifying positive definiteness at every sample by
    /// Cholesky factorization.
    pub fn new(sym: SymTensor, orientation: f64) -> Result<Self> {
        assert!(orientation == 1.0 || orientation == -1.0, "orientation must be +/-1");
        let n = sym.n;
        let n_samples = sym.grid().map_or(1, |g| g.count);
        for s in 0..n_samples {
            let m = DMatrix::from_fn(n, n, |i, j| sym.get(i + 1, j + 1).eval(s));
            if nalgebra::Cholesky::new(m).is_none() {
                return Err(Error::Metric(format!(
                    "not positive definite at sample {s}"
                )));
            }
        }
        Ok(Metric {
            sym,
            orientation,
            inv: OnceCell::new(),
            det: OnceCell::new(),
            sqrt_det: OnceCell::new(),
            grams: Default::default(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Metric::new(SymTensor::from_diag(&vec![Coefficient::one(); n]), 1.0).unwrap()
    }

    pub fn n(&self) -> usize {
        self.sym.n
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn tensor(&self) -> &SymTensor {
        &self.sym
    }

    pub fn grid(&self) -> Option<Grid> {
        self.sym.grid()
    }

    fn jet_mat(&self) -> JetMat {
        JetMat::from_coeffs(self.n(), self.n(), &self.sym.full_entries()).expect("metric grid")
    }

    /// Inverse metric entries, row-major n x n.
    pub fn inverse(&self) -> &Vec<Coefficient> {
        self.inv.get_or_init(|| {
            self.jet_mat().inverse().expect("positive definite").to_coeffs()
        })
    }

    pub fn det(&self) -> &Coefficient {
        self.det.get_or_init(|| {
            let m = self.jet_mat();
            let jet = m.det().expect("determinant");
            m.jet_to_coeff(jet)
        })
    }

    pub fn sqrt_det(&self) -> &Coefficient {
        self.sqrt_det.get_or_init(|| self.det().sqrt())
    }

    pub fn vol(&self) -> Form {
        let n = self.n();
        let mut v = Form::zero(n, n);
        let idx: Vec<usize> = (1..=n).collect();
        *v.coeff_mut(&idx) = self.sqrt_det().scale(self.orientation);
        v
    }

    /// Gram matrix of the induced inner product on degree-k forms,
    /// G_k[I, J] = det of the (I, J) minor of the inverse metric.
    pub fn gram(&self, k: usize) -> &Vec<Coefficient> {
        let n = self.n();
        assert!(k <= n);
        self.grams[k].get_or_init(|| {
            let masks = comb::masks(n, k);
            let c = masks.len();
            let mut out = vec![Coefficient::zero(); c * c];
            let small = k <= n - k;
            let source: Vec<Coefficient> = if small {
                self.inverse().clone()
            } else {
                self.sym.full_entries()
            };
            let det_inv = if small { None } else { Some(self.det().recip()) };
            for (ri, &mi) in masks.iter().enumerate() {
                for (rj, &mj) in masks.iter().enumerate().skip(ri) {
                    let entry = if small {
                        minor(&source, n, mi, mj, k)
                    } else {
                        // Jacobi's complementary-minor identity:
                        // det(ginv[I,J]) = s(I) s(J) det(g[J^c, I^c]) / det g
                        let ic = comb::complement(n, mi);
                        let jc = comb::complement(n, mj);
                        let sign = tuple_sign(mi) * tuple_sign(mj);
                        minor(&source, n, jc, ic, n - k)
                            .mul(det_inv.as_ref().unwrap())
                            .scale(sign)
                    };
                    out[ri * c + rj] = entry.clone();
                    out[rj * c + ri] = entry;
                }
            }
            out
        })
    }

    /// Pointwise inner product of two k-forms.
    pub fn inner(&self, a: &Form, b: &Form) -> Result<Coefficient> {
        if a.degree() != b.degree() || a.n() != self.n() || b.n() != self.n() {
            return Err(Error::Degree("inner product needs equal degrees and frames".into()));
        }
        let k = a.degree();
        let g = self.gram(k);
        let c = comb::binomial(self.n(), k);
        let mut acc = Coefficient::zero();
        for i in 0..c {
            if a.coeff_by_rank(i).is_const_zero() {
                continue;
            }
            let mut row = Coefficient::zero();
            for j in 0..c {
                if b.coeff_by_rank(j).is_const_zero() {
                    continue;
                }
                row = row.add(&g[i * c + j].mul(b.coeff_by_rank(j)));
            }
            acc = acc.add(&a.coeff_by_rank(i).mul(&row));
        }
        Ok(acc)
    }

    pub fn norm_sq(&self, a: &Form) -> Result<Coefficient> {
        self.inner(a, a)
    }

    /// Hodge star: b ^ *a = <b, a> vol for every b.
    pub fn star(&self, a: &Form) -> Result<Form> {
        let n = self.n();
        if a.n() != n {
            return Err(Error::Dimension("form and metric frames differ".into()));
        }
        let k = a.degree();
        let g = self.gram(k);
        let c = comb::binomial(n, k);
        let masks = comb::masks(n, k);
        let sd = self.sqrt_det().scale(self.orientation);
        let mut out = Form::zero(n, n - k);
        for (ri, &mi) in masks.iter().enumerate() {
            let mut raised = Coefficient::zero();
            for j in 0..c {
                if a.coeff_by_rank(j).is_const_zero() {
                    continue;
                }
                raised = raised.add(&g[ri * c + j].mul(a.coeff_by_rank(j)));
            }
            if raised.is_const_zero() {
                continue;
            }
            let mc = comb::complement(n, mi);
            let sign = comb::merge_sign(mi, mc);
            let rr = comb::rank(n, mc);
            out.set_by_rank(rr, out.coeff_by_rank(rr).add(&raised.mul(&sd).scale(sign)));
        }
        Ok(out)
    }

    /// Codifferential on k-forms: (-1)^{n(k+1)+1} * d *.
    pub fn codifferential(&self, a: &Form, fs: &FrameStructure) -> Result<Form> {
        let n = self.n();
        let k = a.degree();
        if k == 0 {
            return Ok(Form::zero(n, 0));
        }
        let sign = if (n * (k + 1) + 1) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(self.star(&fs.d(&self.star(a)?)?)?.scale(sign))
    }
}

fn minor(entries: &[Coefficient], n: usize, rows: u8, cols: u8, k: usize) -> Coefficient {
    let rt = comb::tuple(rows);
    let ct = comb::tuple(cols);
    let mut m = Vec::with_capacity(k * k);
    for &r in &rt {
        for &c in &ct {
            m.push(entries[(r - 1) * n + (c - 1)].clone());
        }
    }
    det_coeff(&m, k)
}

/// (-1)^{sum of 1-based indices in the mask}.
fn tuple_sign(mask: u8) -> f64 {
    let s: usize = comb::tuple(mask).iter().sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Endomorphism of the frame with coefficient entries; entry (i, j) is the
/// e_i component of the image of e_j.
#[derive(Clone, Debug)]
pub struct Endo {
    n: usize,
    entries: Vec<Coefficient>,
}

impl Endo {
    pub fn from_entries(n: usize, entries: Vec<Coefficient>) -> Self {
        assert_eq!(entries.len(), n * n);
        Endo { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let mut e = Endo { n, entries: vec![Coefficient::zero(); n * n] };
        for i in 0..n {
            e.entries[i * n + i] = Coefficient::one();
        }
        e
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 1-based entry J^i_j.
    pub fn get(&self, i: usize, j: usize) -> &Coefficient {
        &self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn compose(&self, other: &Endo) -> Endo {
        let n = self.n;
        let mut entries = vec![Coefficient::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Coefficient::zero();
                for k in 0..n {
                    acc = acc.add(&self.entries[i * n + k].mul(&other.entries[k * n + j]));
                }
                entries[i * n + j] = acc;
            }
        }
        Endo { n, entries }
    }

    pub fn scale_coeff(&self, s: &Coefficient) -> Endo {
        Endo { n: self.n, entries: self.entries.iter().map(|c| c.mul(s)).collect() }
    }

    pub fn add(&self, other: &Endo) -> Endo {
        Endo {
            n: self.n,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Endo {
        Endo { n: self.n, entries: self.entries.iter().map(|c| c.scale(s)).collect() }
    }

    /// Residual of J^2 + Id, zero for an almost complex structure.
    pub fn complex_structure_residual(&self) -> f64 {
        let sq = self.compose(self);
        let mut max = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let expect = if i == j { -1.0 } else { 0.0 };
                max = max.max(
                    sq.entries[i * self.n + j].sub(&Coefficient::Const(expect)).max_abs(),
                );
            }
        }
        max
    }

    /// Action on 1-forms: (J alpha)(v) = alpha(J v).
    pub fn apply_oneform(&self, alpha: &Form) -> Form {
        assert_eq!(alpha.degree(), 1);
        let n = self.n;
        let mut out = Form::zero(n, 1);
        for i in 1..=n {
            let mut acc = Coefficient::zero();
            for k in 1..=n {
                let ak = alpha.coeff(&[k]);
                if !ak.is_const_zero() {
                    acc = acc.add(&ak.mul(self.get(k, i)));
                }
            }
            *out.coeff_mut(&[i]) = acc;
        }
        out
    }

    /// Action on 2-forms: (J beta)(u, v) = beta(J u, J v).
    pub fn apply_twoform(&self, beta: &Form) -> Form {
        assert_eq!(beta.degree(), 2);
        let n = self.n;
        let mut out = Form::zero(n, 2);
        for i in 1..=n {
            for j in (i + 1)..=n {
                let mut acc = Coefficient::zero();
                for k in 1..=n {
                    for l in 1..=n {
                        if k == l {
                            continue;
                        }
                        let b = if k < l {
                            beta.coeff(&[k, l]).clone()
                        } else {
                            beta.coeff(&[l, k]).neg()
                        };
                        if b.is_const_zero() {
                            continue;
                        }
                        acc = acc.add(&b.mul(self.get(k, i)).mul(self.get(l, j)));
                    }
                }
                *out.coeff_mut(&[i, j]) = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent star for the identity metric: *e^I = sign(I, I^c) e^{I^c}.
    fn brute_star_identity(a: &Form) -> Form {
        let n = a.n();
        let mut out = Form::zero(n, n - a.degree());
        for (r, &m) in comb::masks(n, a.degree()).iter().enumerate() {
            let mc = comb::complement(n, m);
            let sign = comb::merge_sign(m, mc);
            let rr = comb::rank(n, mc);
            out.set_by_rank(rr, a.coeff_by_rank(r).scale(sign));
        }
        out
    }

    #[test]
    fn star_matches_brute_force_on_identity_metric() {
        let g = Metric::identity(7);
        for idx in [vec![], vec![1], vec![1, 2, 3], vec![2, 4, 6], vec![1, 3, 5, 7]] {
            let a = Form::basis(7, &idx);
            let s = g.star(&a).unwrap();
            assert_eq!(s.distance(&brute_star_identity(&a)), 0.0, "idx={idx:?}");
        }
    }

    #[test]
    fn star_star_sign_rule() {
        // random SPD metric
        let mut rng = 41u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let n = 6;
        let a = DMatrix::from_fn(n, n, |_, _| 0.3 * next());
        let spd = &a * a.transpose() + DMatrix::identity(n, n);
        let mut sym = SymTensor::zero(n);
        for i in 1..=n {
            for j in i..=n {
                sym.set(i, j, Coefficient::Const(spd[(i - 1, j - 1)]));
            }
        }
        let g = Metric::new(sym, 1.0).unwrap();
        for k in 0..=n {
            let masks = comb::masks(n, k);
            let mut form = Form::zero(n, k);
            for (r, _) in masks.iter().enumerate() {
                form.set_by_rank(r, Coefficient::Const(next()));
            }
            let ss = g.star(&g.star(&form).unwrap()).unwrap();
            let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                ss.distance(&form.scale(sign)) < 1e-10,
                "k={k} err={}",
                ss.distance(&form.scale(sign))
            );
        }
    }

    #[test]
    fn inner_product_pairs_with_wedge() {
        // <a,b> vol = a ^ *b, and symmetry in a, b
        let mut rng = 7u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let n = 7;
        let a = DMatrix::from_fn(n, n, |_, _| 0.25 * next());
        let spd = &a * a.transpose() + DMatrix::identity(n, n);
        let mut sym = SymTensor::zero(n);
        for i in 1..=n {
            for j in i..=n {
                sym.set(i, j, Coefficient::Const(spd[(i - 1, j - 1)]));
            }
        }
        let g = Metric::new(sym, 1.0).unwrap();
        for k in [2usize, 3] {
            let c = comb::binomial(n, k);
            let mut fa = Form::zero(n, k);
            let mut fb = Form::zero(n, k);
            for r in 0..c {
                fa.set_by_rank(r, Coefficient::Const(next()));
                fb.set_by_rank(r, Coefficient::Const(next()));
            }
            let lhs = fa.wedge(&g.star(&fb).unwrap()).unwrap();
            let ip = g.inner(&fa, &fb).unwrap();
            let vol = g.vol();
            let expected = vol.scale_coeff(&ip);
            assert!(lhs.distance(&expected) < 1e-12);
            let ip2 = g.inner(&fb, &fa).unwrap();
            assert!(ip.sub(&ip2).max_abs() < 1e-13);
        }
    }

    #[test]
    fn negative_orientation_flips_star() {
        let mut sym = SymTensor::zero(6);
        for i in 1..=6 {
            sym.set(i, i, Coefficient::one());
        }
        let gp = Metric::new(sym.clone(), 1.0).unwrap();
        let gm = Metric::new(sym, -1.0).unwrap();
        let a = Form::basis(6, &[1, 2]);
        assert_eq!(
            gm.star(&a).unwrap().distance(&gp.star(&a).unwrap().neg()),
            0.0
        );
    }

    #[test]
    fn rejects_indefinite_metric() {
        let mut sym = SymTensor::zero(3);
        sym.set(1, 1, Coefficient::one());
        sym.set(2, 2, Coefficient::Const(-1.0));
        sym.set(3, 3, Coefficient::one());
        assert!(Metric::new(sym, 1.0).is_err());
    }
}
