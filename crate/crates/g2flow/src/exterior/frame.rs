//! Coframe structure constants and the exterior derivative they induce.

use crate::error::{Error, Result};

use super::coeff::Coefficient;
use super::comb;
use super::form::Form;
use super::grid::Grid;

/// Structure constants de^i = sum_{j<k} c^i_{jk} e^{jk}, an optional warping
/// coordinate direction du and its sample grid.
#[derive(Clone, Debug)]
pub struct FrameStructure {
    n: usize,
    /// de^i as constant-coefficient 2-forms, one per coframe element.
    differentials: Vec<Form>,
    u_index: Option<usize>,
    grid: Option<Grid>,
}

impl FrameStructure {
    pub fn new(
        n: usize,
        differentials: Vec<Form>,
        u_index: Option<usize>,
        grid: Option<Grid>,
    ) -> Result<Self> {
        if n > comb::MAX_N {
            return Err(Error::Dimension(format!("frame dimension {n} exceeds {}", comb::MAX_N)));
        }
        if differentials.len() != n {
            return Err(Error::Dimension(format!(
                "expected {n} coframe differentials, got {}",
                differentials.len()
            )));
        }
        for (i, df) in differentials.iter().enumerate() {
            if df.n() != n || df.degree() != 2 {
                return Err(Error::Dimension(format!("de^{} must be a 2-form on n={n}", i + 1)));
            }
            if df.grid().is_some() {
                return Err(Error::Config("structure constants must be constant".into()));
            }
        }
        if let Some(u) = u_index {
            if u == 0 || u > n {
                return Err(Error::Dimension(format!("u index {u} out of range")));
            }
            if differentials[u - 1].max_abs() != 0.0 {
                return Err(Error::Config("du must be closed: de^u = 0".into()));
            }
        }
        let fs = FrameStructure { n, differentials, u_index, grid };
        // d.d = 0 on every coframe element (Jacobi identity)
        for i in 1..=n {
            let dde = fs.d(&fs.differentials[i - 1])?;
            if dde.max_abs() > 1e-12 {
                return Err(Error::Jacobi(format!("d(de^{i}) != 0, max |coeff| = {}", dde.max_abs())));
            }
        }
        Ok(fs)
    }

    /// Flat frame: all structure constants zero.
    pub fn flat(n: usize) -> Self {
        FrameStructure::new(n, (0..n).map(|_| Form::zero(n, 2)).collect(), None, None).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn u_index(&self) -> Option<usize> {
        self.u_index
    }

    pub fn grid(&self) -> Option<Grid> {
        self.grid
    }

    pub fn with_grid(&self, grid: Grid) -> Self {
        let mut fs = self.clone();
        fs.grid = Some(grid);
        fs
    }

    pub fn coframe_differential(&self, i: usize) -> &Form {
        &self.differentials[i - 1]
    }

    /// Exterior derivative: invariant part from the structure constants plus
    /// du wedge the coefficient-wise u-derivative.
    pub fn d(&self, a: &Form) -> Result<Form> {
        if a.n() != self.n {
            return Err(Error::Dimension(format!(
                "form lives on n={}, frame has n={}",
                a.n(),
                self.n
            )));
        }
        let has_fields = a.grid().is_some();
        if has_fields {
            let u = self
                .u_index
                .ok_or_else(|| Error::Config("field coefficients need a u direction".into()))?;
            let fg = self
                .grid
                .ok_or_else(|| Error::Config("field coefficients need a frame grid".into()))?;
            if a.grid() != Some(fg) {
                return Err(Error::Grid(format!("form grid {:?} vs frame grid {fg:?}", a.grid())));
            }
            let _ = u;
        }
        if a.degree() == self.n {
            // top degree: d vanishes identically
            return Ok(Form::zero(self.n, self.n));
        }
        let mut out = Form::zero(self.n, a.degree() + 1);
        let masks = comb::masks(self.n, a.degree());
        for (r, &m) in masks.iter().enumerate() {
            let c = a.coeff_by_rank(r);
            if !c.is_const_zero() {
                // invariant part: sum over i in I of +/- c * de^i ^ e^{I\i}
                for i in comb::tuple(m) {
                    let de = &self.differentials[i - 1];
                    if de.max_abs() == 0.0 {
                        continue;
                    }
                    let rest_mask = m & !(1u8 << (i - 1));
                    let sign = comb::contract_sign(i, m);
                    let rest = Form::from_raw(
                        self.n,
                        a.degree() - 1,
                        {
                            let mut v =
                                vec![Coefficient::zero(); comb::binomial(self.n, a.degree() - 1)];
                            v[comb::rank(self.n, rest_mask)] = c.scale(sign);
                            v
                        },
                    );
                    out = out.add(&de.wedge(&rest)?)?;
                }
                // warped part: du ^ dc/du e^I
                if let Some(u) = self.u_index {
                    let ubit = 1u8 << (u - 1);
                    if m & ubit == 0 {
                        let dc = c.derivative();
                        if !dc.is_const_zero() {
                            let sign = comb::merge_sign(ubit, m);
                            let rr = comb::rank(self.n, m | ubit);
                            let cur = out.coeff_by_rank(rr).add(&dc.scale(sign));
                            out.set_by_rank(rr, cur);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Cartan formula L_V = d(V .) + V . d.
    pub fn lie_derivative(&self, v: &[Coefficient], a: &Form) -> Result<Form> {
        let da = self.d(a)?;
        if a.degree() == 0 {
            return da.contract(v);
        }
        let term1 = self.d(&a.contract(v)?)?;
        let term2 = da.contract(v)?;
        term1.add(&term2)
    }

    pub fn lie_derivative_basis(&self, i: usize, a: &Form) -> Result<Form> {
        let mut v = vec![Coefficient::zero(); self.n];
        v[i - 1] = Coefficient::one();
        self.lie_derivative(&v, a)
    }
}

/// Registered frames.
///
/// "fernandez7": the 2-step nilpotent algebra (0,0,0,0,0,12,13).
/// "as7": the nilmanifold algebra (0,0,0,0,13-24,14+23) extended by du = e^7.
/// "flat7"/"flat6": abelian frames.
pub fn registry(key: &str, grid: Option<Grid>) -> Result<FrameStructure> {
    match key {
        "fernandez7" => {
            let mut d = vec![Form::zero(7, 2); 7];
            d[5] = Form::basis(7, &[1, 2]);
            d[6] = Form::basis(7, &[1, 3]);
            FrameStructure::new(7, d, None, None)
        }
        "as7" => {
            let mut d = vec![Form::zero(7, 2); 7];
            d[4] = Form::basis(7, &[1, 3]).sub(&Form::basis(7, &[2, 4])).unwrap();
            d[5] = Form::basis(7, &[1, 4]).add(&Form::basis(7, &[2, 3])).unwrap();
            FrameStructure::new(7, d, Some(7), grid)
        }
        "flat7" => Ok(if let Some(g) = grid {
            let mut fs = FrameStructure::flat(7);
            fs.u_index = Some(7);
            fs.grid = Some(g);
            fs
        } else {
            FrameStructure::flat(7)
        }),
        "flat6" => Ok(FrameStructure::flat(6)),
        _ => Err(Error::Config(format!("unknown frame key '{key}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fernandez_differentials() {
        let fs = registry("fernandez7", None).unwrap();
        let de6 = fs.d(&Form::basis(7, &[6])).unwrap();
        assert_eq!(de6.distance(&Form::basis(7, &[1, 2])), 0.0);
        let de1 = fs.d(&Form::basis(7, &[1])).unwrap();
        assert_eq!(de1.max_abs(), 0.0);
    }

    #[test]
    fn jacobi_violation_rejected() {
        // de^4 = e^{12}, de^2 = e^{34}: d(de^4) = -e^1 ^ e^{34} != 0
        let mut d = vec![Form::zero(4, 2); 4];
        d[3] = Form::basis(4, &[1, 2]);
        d[1] = Form::basis(4, &[3, 4]);
        assert!(FrameStructure::new(4, d, None, None).is_err());
    }

    #[test]
    fn warped_derivative() {
        let g = Grid::new(0.0, 1.0, 33).unwrap();
        let fs = registry("flat7", Some(g)).unwrap();
        let u = Coefficient::coordinate(g, 3);
        // d(h(u) du) = 0
        let mut hdu = Form::zero(7, 1);
        *hdu.coeff_mut(&[7]) = u.mul(&u);
        assert_eq!(fs.d(&hdu).unwrap().max_abs(), 0.0);
        // d(u^2 e^1) = 2u du ^ e^1 = -2u e^{17}
        let mut f = Form::zero(7, 1);
        *f.coeff_mut(&[1]) = u.mul(&u);
        let df = fs.d(&f).unwrap();
        let expect = -2.0 * g.point(5);
        assert!((df.coeff(&[1, 7]).eval(5) - expect).abs() < 1e-12);
    }

    #[test]
    fn d_squared_vanishes_on_nilpotent_frames() {
        for key in ["fernandez7", "as7"] {
            let fs = registry(key, None).unwrap();
            for idx in [vec![6], vec![5, 6], vec![1, 4, 6], vec![2, 5, 7]] {
                let a = Form::basis(7, &idx);
                let dda = fs.d(&fs.d(&a).unwrap()).unwrap();
                assert_eq!(dda.max_abs(), 0.0, "dd(e^{idx:?}) != 0 on {key}");
            }
        }
    }

    #[test]
    fn lie_derivative_of_warped_function() {
        let g = Grid::new(0.0, 2.0, 41).unwrap();
        let fs = registry("flat7", Some(g)).unwrap();
        let u = Coefficient::coordinate(g, 4);
        let mut hdu = Form::zero(7, 1);
        *hdu.coeff_mut(&[7]) = u.scale(0.5).exp();
        // L_{d/du}(h du) = h' du
        let mut v = vec![Coefficient::zero(); 7];
        v[6] = Coefficient::one();
        let lie = fs.lie_derivative(&v, &hdu).unwrap();
        let expect = u.scale(0.5).exp().scale(0.5);
        assert!(lie.coeff(&[7]).sub(&expect).max_abs() < 1e-12);
    }
}
