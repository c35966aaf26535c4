//! Property-based invariants of the exterior layer: graded algebra laws,
//! contraction antiderivation, Hodge pairing, Cartan/derivation properties
//! and the d.d = 0 guarantees.

use proptest::prelude::*;

use g2flow::exterior::comb::binomial;
use g2flow::exterior::{registry, Coefficient, Form, FrameStructure, Grid, Metric, SymTensor};

fn form_with(n: usize, k: usize, values: &[f64]) -> Form {
    let mut f = Form::zero(n, k);
    for (r, v) in values.iter().enumerate() {
        f.set_by_rank(r, Coefficient::Const(*v));
    }
    f
}

fn degree() -> impl Strategy<Value = usize> {
    1usize..=3
}

fn spd_metric(n: usize, seed: &[f64]) -> Metric {
    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.3 * seed[i * n + j]);
    let spd = &a * a.transpose() + nalgebra::DMatrix::identity(n, n);
    let mut sym = SymTensor::zero(n);
    for i in 1..=n {
        for j in i..=n {
            sym.set(i, j, Coefficient::Const(spd[(i - 1, j - 1)]));
        }
    }
    Metric::new(sym, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn wedge_is_associative(
        (ka, kb, kc) in (degree(), degree(), degree()),
        seed in prop::collection::vec(-2.0..2.0f64, 3 * 35),
    ) {
        let a = form_with(7, ka, &seed[0..binomial(7, ka)]);
        let b = form_with(7, kb, &seed[35..35 + binomial(7, kb)]);
        let c = form_with(7, kc, &seed[70..70 + binomial(7, kc)]);
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert!(left.distance(&right) < 1e-12);
    }

    #[test]
    fn wedge_is_graded_antisymmetric(
        (ka, kb) in (degree(), degree()),
        seed in prop::collection::vec(-2.0..2.0f64, 2 * 35),
    ) {
        let a = form_with(7, ka, &seed[0..binomial(7, ka)]);
        let b = form_with(7, kb, &seed[35..35 + binomial(7, kb)]);
        let sign = if (ka * kb) % 2 == 0 { 1.0 } else { -1.0 };
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap().scale(sign);
        // summation order differs between the two products
        prop_assert!(ab.distance(&ba) < 1e-13);
    }

    #[test]
    fn contraction_is_an_antiderivation(
        (ka, kb) in (degree(), degree()),
        seed in prop::collection::vec(-2.0..2.0f64, 2 * 35),
        vseed in prop::collection::vec(-2.0..2.0f64, 7),
    ) {
        let a = form_with(7, ka, &seed[0..binomial(7, ka)]);
        let b = form_with(7, kb, &seed[35..35 + binomial(7, kb)]);
        let v: Vec<Coefficient> = vseed.iter().map(|x| Coefficient::Const(*x)).collect();
        let lhs = a.wedge(&b).unwrap().contract(&v).unwrap();
        let sign = if ka % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = a
            .contract(&v)
            .unwrap()
            .wedge(&b)
            .unwrap()
            .add(&a.wedge(&b.contract(&v).unwrap()).unwrap().scale(sign))
            .unwrap();
        prop_assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn double_contraction_vanishes(
        k in 2usize..=4,
        seed in prop::collection::vec(-2.0..2.0f64, 35),
        vseed in prop::collection::vec(-2.0..2.0f64, 7),
    ) {
        let a = form_with(7, k, &seed[0..binomial(7, k)]);
        let v: Vec<Coefficient> = vseed.iter().map(|x| Coefficient::Const(*x)).collect();
        let double = a.contract(&v).unwrap().contract(&v).unwrap();
        prop_assert!(double.max_abs() < 1e-12);
    }

    #[test]
    fn hodge_pairing_and_involution(
        k in 0usize..=6,
        seed in prop::collection::vec(-1.0..1.0f64, 2 * 20 + 36),
    ) {
        let n = 6;
        let g = spd_metric(n, &seed[40..40 + 36]);
        let a = form_with(n, k, &seed[0..binomial(n, k)]);
        let b = form_with(n, k, &seed[20..20 + binomial(n, k)]);
        // a ^ *b = <a, b> vol, symmetric in a and b
        let lhs = a.wedge(&g.star(&b).unwrap()).unwrap();
        let ip = g.inner(&a, &b).unwrap();
        prop_assert!(lhs.distance(&g.vol().scale_coeff(&ip)) < 1e-10);
        let ip_t = g.inner(&b, &a).unwrap();
        prop_assert!(ip.sub(&ip_t).max_abs() < 1e-11);
        // *.* = (-1)^{k(n-k)}
        let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
        let ss = g.star(&g.star(&a).unwrap()).unwrap();
        prop_assert!(ss.distance(&a.scale(sign)) < 1e-10);
    }

    #[test]
    fn lie_derivative_is_a_derivation(
        (ka, kb) in (1usize..=2, 1usize..=2),
        seed in prop::collection::vec(-2.0..2.0f64, 2 * 35),
        vseed in prop::collection::vec(-2.0..2.0f64, 7),
    ) {
        let fs = registry("fernandez7", None).unwrap();
        let a = form_with(7, ka, &seed[0..binomial(7, ka)]);
        let b = form_with(7, kb, &seed[35..35 + binomial(7, kb)]);
        let v: Vec<Coefficient> = vseed.iter().map(|x| Coefficient::Const(*x)).collect();
        let lhs = fs.lie_derivative(&v, &a.wedge(&b).unwrap()).unwrap();
        let rhs = fs
            .lie_derivative(&v, &a)
            .unwrap()
            .wedge(&b)
            .unwrap()
            .add(&a.wedge(&fs.lie_derivative(&v, &b).unwrap()).unwrap())
            .unwrap();
        prop_assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn d_squared_vanishes_with_analytic_jets(
        k in 1usize..=2,
        seed in prop::collection::vec(-1.0..1.0f64, 3 * 21),
    ) {
        let grid = Grid::new(-1.0, 1.0, 33).unwrap();
        let fs = registry("as7", Some(grid)).unwrap();
        let u = Coefficient::coordinate(grid, 4);
        let mut a = Form::zero(7, k);
        for (r, chunk) in seed.chunks(3).take(binomial(7, k)).enumerate() {
            // polynomial coefficient c0 + c1 u + c2 u^2 with analytic jets
            let c = Coefficient::Const(chunk[0])
                .add(&u.scale(chunk[1]))
                .add(&u.mul(&u).scale(chunk[2]));
            a.set_by_rank(r, c);
        }
        let dda = fs.d(&fs.d(&a).unwrap()).unwrap();
        prop_assert!(dda.max_abs() < 1e-13, "dd = {}", dda.max_abs());
    }
}

/// d.d on sampled (finite-difference) coefficients stays within the
/// truncation bound C du^4; in fact it vanishes to round-off because the
/// coefficient-wise derivative operator commutes with the constant
/// invariant part of d.
#[test]
fn d_squared_fd_truncation_bound() {
    for count in [101usize, 201] {
        let grid = Grid::new(-1.0, 1.0, count).unwrap();
        let fs = registry("as7", Some(grid)).unwrap();
        let mut a = Form::zero(7, 2);
        *a.coeff_mut(&[1, 2]) = Coefficient::field(grid, grid.sample(|u| (1.5 * u).exp()));
        *a.coeff_mut(&[3, 5]) = Coefficient::field(grid, grid.sample(|u| (2.0 * u).sin()));
        *a.coeff_mut(&[4, 7]) = Coefficient::field(grid, grid.sample(|u| 1.0 / (2.0 + u)));
        *a.coeff_mut(&[5, 6]) = Coefficient::field(grid, grid.sample(|u| (0.7 * u).cos()));
        let dd = fs.d(&fs.d(&a).unwrap()).unwrap().max_abs();
        let bound = 50.0 * grid.spacing().powi(4);
        assert!(dd <= bound, "N={count}: d.d = {dd:.3e} exceeds C du^4 = {bound:.3e}");
        assert!(dd < 1e-12, "N={count}: d.d = {dd:.3e} should sit at round-off");
    }
}

/// The identity-metric star agrees with the permutation-sign formula on all
/// degrees, and the G2 model identities hold for the standard 3-form.
#[test]
fn flat_model_sanity() {
    let g = Metric::identity(7);
    let phi = g2flow::catalog::standard_phi();
    let star_phi = g.star(&phi).unwrap();
    assert!(phi.wedge(&star_phi).unwrap().distance(&g.vol().scale(7.0)) < 1e-13);
    let e1_phi = phi.contract_basis(1).unwrap();
    let mut expect = Form::zero(7, 2);
    for idx in [[2usize, 3], [4, 5], [6, 7]] {
        *expect.coeff_mut(&idx) = Coefficient::one();
    }
    assert_eq!(e1_phi.distance(&expect), 0.0);
}

/// Frame structures reject field coefficients without a grid or u direction.
#[test]
fn warped_preconditions() {
    let grid = Grid::new(0.0, 1.0, 17).unwrap();
    let flat: FrameStructure = registry("flat7", None).unwrap();
    let mut a = Form::zero(7, 1);
    *a.coeff_mut(&[1]) = Coefficient::field(grid, grid.sample(|u| u));
    assert!(flat.d(&a).is_err(), "missing u direction must be a configuration error");
    let with_grid = registry("flat7", Some(Grid::new(0.0, 2.0, 17).unwrap())).unwrap();
    assert!(with_grid.d(&a).is_err(), "grid mismatch must be rejected");
}
