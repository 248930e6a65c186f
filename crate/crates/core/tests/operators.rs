mod common;

use common::{random_symmetric, sampled_pucci};
use kslab::grid::norm;
use kslab::operators::{
    gradient, hessian, laplacian, linear_apply, pucci, pucci_field, pucci_minus, pucci_plus,
    pucci_sandwich_residual, second_difference, Ellipticity, LinearCoefficients, MatrixField, PucciSign,
    SymMatrix, VectorField,
};
use kslab::{pt, Grid, ScalarField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(h: f64) -> Grid {
    Grid::cube(2, h, 1.0).unwrap()
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn derivatives_exact_on_quadratics() {
    let g = Grid::cube(3, 0.125, 1.0).unwrap();
    let x1 = ScalarField::from_fn(&g, |p| p[0]).unwrap();
    let grad = gradient(&x1).unwrap();
    for v in &grad.values {
        assert!((v[0] - 1.0).abs() <= 1e-12 && v[1].abs() <= 1e-12 && v[2].abs() <= 1e-12);
    }
    assert!(hessian(&x1).unwrap().values.iter().all(|m| m.frobenius() <= 1e-10));

    let g2 = square(0.1);
    let saddle = ScalarField::from_fn(&g2, |p| p[0] * p[0] - p[1] * p[1]).unwrap();
    assert!(max_abs(laplacian(&saddle).unwrap().values().iter().copied()) <= 1e-10);
    for m in &hessian(&saddle).unwrap().values {
        assert!((m.get(0, 0) - 2.0).abs() <= 1e-10);
        assert!((m.get(1, 1) + 2.0).abs() <= 1e-10);
        assert!(m.get(0, 1).abs() <= 1e-10);
    }
    let mixed = ScalarField::from_fn(&g2, |p| p[0] * p[1]).unwrap();
    assert!(hessian(&mixed).unwrap().values.iter().all(|m| (m.get(0, 1) - 1.0).abs() <= 1e-10));
}

#[test]
fn laplacian_of_sine_is_second_order() {
    let mut errs = Vec::new();
    for n in [16.0, 32.0, 64.0] {
        let g = square(1.0 / n);
        let u = ScalarField::from_fn(&g, |p| p[0].sin()).unwrap();
        let lap = laplacian(&u).unwrap();
        let gi = lap.grid().clone();
        errs.push(max_abs((0..gi.len()).map(|i| lap.at(i) + gi.point(i)[0].sin())));
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() <= 0.2, "order {order} from {errs:?}");
    }
}

#[test]
fn derivatives_need_three_nodes() {
    let g = Grid::new(1, 0.5, &[0.0], &[3]).unwrap();
    let u = ScalarField::from_fn(&g, |p| p[0] * p[0]).unwrap();
    let lap = laplacian(&u).unwrap();
    assert_eq!(lap.values().len(), 1);
    assert!((lap.at(0) - 2.0).abs() < 1e-12);
}

#[test]
fn pucci_examples() {
    let ell = Ellipticity::new(1.0, 2.0).unwrap();
    let id = SymMatrix::identity(2);
    assert_eq!(pucci_minus(&id, &ell), 2.0);
    assert_eq!(pucci_plus(&id, &ell), 4.0);
    let d = SymMatrix::diag(&[1.0, -1.0]);
    assert_eq!(pucci_minus(&d, &ell), -1.0);
    assert_eq!(pucci_plus(&d, &ell), 1.0);
    assert!(Ellipticity::new(0.0, 1.0).is_err());
    assert!(Ellipticity::new(2.0, 1.0).is_err());
}

#[test]
fn pucci_matches_sampled_extremum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ell = Ellipticity::new(0.5, 2.0).unwrap();
    for k in 0..40 {
        let n = 2 + k % 2;
        let m = random_symmetric(&mut rng, n);
        for sign in [PucciSign::Minus, PucciSign::Plus] {
            let formula = pucci(&m, &ell, sign);
            let sampled = sampled_pucci(&m, &ell, sign, 10_000, &mut rng);
            let (beyond, gap) = match sign {
                PucciSign::Minus => (formula - sampled, sampled - formula),
                PucciSign::Plus => (sampled - formula, formula - sampled),
            };
            assert!(beyond <= 1e-12, "sampled value beats the formula: {sampled} vs {formula}");
            assert!(gap <= 1e-6, "n={n} {sign:?}: formula {formula}, sampled {sampled}");
        }
    }
}

#[test]
fn eigenvalues_agree_with_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let m = random_symmetric(&mut rng, 3);
        let a = m.eigenvalues();
        let (b, vecs) = m.eigen_jacobi();
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() <= 1e-10, "{a:?} vs {b:?}");
        }
        let back = SymMatrix::from_eigen(&vecs, &b);
        assert!(back.sub(&m).frobenius() <= 1e-10);
    }
    // repeated eigenvalues take the diagonal branch
    let ev = SymMatrix::diag(&[2.0, -1.0, 2.0]).eigenvalues();
    assert_eq!(ev, [-1.0, 2.0, 2.0]);
}

#[test]
fn pucci_field_examples() {
    let g = square(1.0 / 16.0);
    let ell = Ellipticity::new(1.0, 2.0).unwrap();
    let bowl = ScalarField::from_fn(&g, |p| 0.5 * (p[0] * p[0] + p[1] * p[1])).unwrap();
    let pm = pucci_field(&bowl, &ell, PucciSign::Minus).unwrap();
    assert!(pm.values().iter().all(|v| (v - 2.0).abs() <= 1e-10));
    let saddle = ScalarField::from_fn(&g, |p| p[0] * p[0] - p[1] * p[1]).unwrap();
    let lap = Ellipticity::laplacian();
    for sign in [PucciSign::Minus, PucciSign::Plus] {
        let v = pucci_field(&saddle, &lap, sign).unwrap();
        assert!(max_abs(v.values().iter().copied()) <= 1e-10);
    }
}

#[test]
fn pucci_kills_the_critical_radial_power() {
    // n = 2, λ = 1, Λ = 2: α = Λ(n−1)/λ − 1 = 1
    let ell = Ellipticity::new(1.0, 2.0).unwrap();
    let mut errs = Vec::new();
    for n in [32.0, 64.0, 128.0] {
        let g = square(1.0 / n);
        let u = ScalarField::from_fn(&g, |p| 1.0 / norm(p).max(1e-3)).unwrap();
        let pm = pucci_field(&u, &ell, PucciSign::Minus).unwrap();
        let gi = pm.grid().clone();
        let err = (0..gi.len())
            .filter(|&i| (0.5..0.9).contains(&norm(&gi.point(i))))
            .map(|i| pm.at(i).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[2] < 1e-2, "{errs:?}");
    assert!((errs[1] / errs[2]).log2() > 1.8, "{errs:?}");
}

fn coefficients(g: &Grid, a: MatrixField) -> LinearCoefficients {
    LinearCoefficients {
        a,
        b: VectorField::new(g.clone(), vec![[0.0; 3]; g.len()]).unwrap(),
        c: ScalarField::constant(g, 0.0).unwrap(),
        f: ScalarField::constant(g, 0.0).unwrap(),
    }
}

#[test]
fn linear_apply_examples() {
    let g = square(1.0 / 16.0);
    let u = ScalarField::from_fn(&g, |p| (2.0 * p[0]).sin() * p[1] + p[1] * p[1]).unwrap();
    let id = coefficients(&g, MatrixField::constant(&g, SymMatrix::identity(2)).unwrap());
    let a = linear_apply(&u, &id).unwrap();
    let b = laplacian(&u).unwrap();
    assert_eq!(a.grid(), b.grid());
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() <= 1e-9);
    }
    let sq = ScalarField::from_fn(&g, |p| p[0] * p[0]).unwrap();
    let d = coefficients(&g, MatrixField::constant(&g, SymMatrix::diag(&[2.0, 1.0])).unwrap());
    assert!(linear_apply(&sq, &d).unwrap().values().iter().all(|v| (v - 4.0).abs() <= 1e-9));

    // drift and zeroth order terms
    let mut full = coefficients(&g, MatrixField::constant(&g, SymMatrix::zeros(2)).unwrap());
    full.b = VectorField::new(g.clone(), vec![[1.0, 0.0, 0.0]; g.len()]).unwrap();
    full.c = ScalarField::constant(&g, 2.0).unwrap();
    let out = linear_apply(&sq, &full).unwrap();
    let gi = out.grid().clone();
    for i in 0..gi.len() {
        let x = gi.point(i)[0];
        assert!((out.at(i) - (2.0 * x + 2.0 * x * x)).abs() <= 1e-9);
    }
}

#[test]
fn linear_apply_is_sandwiched_by_pucci() {
    let g = square(1.0 / 24.0);
    let ell = Ellipticity::new(0.5, 3.0).unwrap();
    let mats: Vec<SymMatrix> = (0..g.len())
        .map(|i| {
            let p = g.point(i);
            let th = 3.0 * p[0] + p[1];
            let q = [[th.cos(), -th.sin(), 0.0], [th.sin(), th.cos(), 0.0], [0.0; 3]];
            let d = [1.75 + 1.25 * (5.0 * p[1]).sin(), 1.75 + 1.25 * (4.0 * p[0]).cos()];
            SymMatrix::from_eigen(&q, &d)
        })
        .collect();
    let coeffs = coefficients(&g, MatrixField::new(g.clone(), mats).unwrap());
    coeffs.check_ellipticity(&ell, 1e-12).unwrap();
    let u = ScalarField::from_fn(&g, |p| (2.0 * p[0] * p[1]).cos() + p[0].powi(3)).unwrap();
    let lu = linear_apply(&u, &coeffs).unwrap();
    let lo = pucci_field(&u, &ell, PucciSign::Minus).unwrap();
    let hi = pucci_field(&u, &ell, PucciSign::Plus).unwrap();
    for i in 0..lu.values().len() {
        assert!(lo.at(i) <= lu.at(i) + 1e-12 && lu.at(i) <= hi.at(i) + 1e-12);
    }
    let narrow = Ellipticity::new(1.0, 1.5).unwrap();
    assert!(coeffs.check_ellipticity(&narrow, 1e-12).is_err());
}

#[test]
fn sandwich_residual_examples() {
    let g = square(1.0 / 16.0);
    let lap = Ellipticity::laplacian();
    let harmonic = ScalarField::from_fn(&g, |p| p[0] * p[0] - p[1] * p[1]).unwrap();
    let zero = ScalarField::constant(&g, 0.0).unwrap();
    let rep = pucci_sandwich_residual(&harmonic, &zero, &lap, 1e-9).unwrap();
    assert!(rep.pass && rep.lhs <= 1e-9);

    let ell = Ellipticity::new(1.0, 2.0).unwrap();
    let bowl = ScalarField::from_fn(&g, |p| 0.5 * (p[0] * p[0] + p[1] * p[1])).unwrap();
    let f = ScalarField::constant(&g, 2.0 * 2.0).unwrap();
    assert!(pucci_sandwich_residual(&bowl, &f, &ell, 1e-9).unwrap().pass);
    let rep = pucci_sandwich_residual(&bowl, &zero, &ell, 1e-9).unwrap();
    assert!(!rep.pass);
    assert!((rep.lhs - 2.0).abs() <= 1e-9, "violation {}", rep.lhs);

    let negative = ScalarField::constant(&g, -1.0).unwrap();
    assert!(pucci_sandwich_residual(&bowl, &negative, &ell, 1e-9).is_err());
}

#[test]
fn second_difference_examples() {
    let g = square(1.0 / 16.0);
    let sq = ScalarField::from_fn(&g, |p| p[0] * p[0]).unwrap();
    for s in [1.0, 3.0, 8.0] {
        let v = second_difference(&sq, &[1.0, 0.0], s / 16.0).unwrap();
        assert!(v.values().iter().all(|x| (x - 2.0).abs() <= 1e-9));
    }
    let lin = ScalarField::from_fn(&g, |p| 3.0 * p[0] - p[1] + 1.0).unwrap();
    let e = [0.6, 0.8];
    let v = second_difference(&lin, &e, 5.0 / 16.0).unwrap();
    assert!(max_abs(v.values().iter().copied()) <= 1e-9);
    assert!(second_difference(&lin, &e, 1.0 / 16.0).is_err());
    assert!(second_difference(&lin, &[1.0, 0.0], 2.0).is_err());
    assert!(second_difference(&lin, &[1.0, 1.0], 1.0 / 16.0).is_err());

    let fine = Grid::new(1, 1.0 / 512.0, &[-1.0], &[1025]).unwrap();
    let u = ScalarField::from_fn(&fine, |p| p[0].sin()).unwrap();
    let mut errs = Vec::new();
    for k in [32.0, 16.0, 8.0] {
        let v = second_difference(&u, &[1.0], k / 512.0).unwrap();
        let x = pt(&[0.5]);
        errs.push((v.at_point(&x).unwrap() + 0.5f64.sin()).abs());
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() <= 0.2, "order {order}");
    }
}

#[test]
fn touching_pairs_have_ordered_hessians() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = square(1.0 / 32.0);
    for _ in 0..20 {
        let x0 = g.point(g.nearest(&pt(&[rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)])));
        let (a, b, c) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..1.0));
        let u = ScalarField::from_fn(&g, |p| (a * p[0]).sin() * (b * p[1]).cos()).unwrap();
        // v = u + c|x − x₀|² + (x−x₀)₁⁴ ≥ u, equality at x₀
        let v = ScalarField::from_fn(&g, |p| {
            let (dx, dy) = (p[0] - x0[0], p[1] - x0[1]);
            (a * p[0]).sin() * (b * p[1]).cos() + c * (dx * dx + dy * dy) + dx.powi(4)
        })
        .unwrap();
        assert!(u.values().iter().zip(v.values()).all(|(p, q)| p <= q));
        let hu = hessian(&u).unwrap();
        let hv = hessian(&v).unwrap();
        let i = hu.grid.locate(&x0).unwrap();
        let gap = hv.values[i].sub(&hu.values[i]).min_eigenvalue();
        assert!(gap >= -1e-9, "min eigenvalue of D²v − D²u = {gap}");
    }
}

fn sym_strategy(n: usize) -> impl Strategy<Value = SymMatrix> {
    proptest::collection::vec(-3.0f64..3.0, 6).prop_map(move |e| {
        SymMatrix::from_fn(n, |i, j| e[i * 3 + j - i * (i + 1) / 2])
    })
}

fn ell_strategy() -> impl Strategy<Value = Ellipticity> {
    (0.1f64..2.0, 1.0f64..4.0).prop_map(|(l, r)| Ellipticity::new(l, l * r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pucci_bounds_every_admissible_contraction(
        n in 1usize..=3, seed in any::<u64>(), ell in ell_strategy()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_symmetric(&mut rng, n);
        let lo = pucci_minus(&m, &ell);
        let hi = pucci_plus(&m, &ell);
        for _ in 0..1000 {
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let ph: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (c1, s1, c2, s2) = (th.cos(), th.sin(), ph.cos(), ph.sin());
            let q = match n {
                1 => [[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]],
                2 => [[c1, -s1, 0.0], [s1, c1, 0.0], [0.0; 3]],
                _ => [[c1, -s1 * c2, s1 * s2], [s1, c1 * c2, -c1 * s2], [0.0, s2, c2]],
            };
            let d: Vec<f64> = (0..n).map(|_| rng.gen_range(ell.lambda..=ell.big_lambda)).collect();
            let v = SymMatrix::from_eigen(&q, &d).contract(&m);
            prop_assert!(lo <= v + 1e-10 && v <= hi + 1e-10);
        }
    }

    #[test]
    fn pucci_algebra(m in sym_strategy(3), k in sym_strategy(3), ell in ell_strategy()) {
        prop_assert!((pucci_minus(&m.scale(-1.0), &ell) + pucci_plus(&m, &ell)).abs() <= 1e-10);
        prop_assert!(pucci_minus(&m.add(&k), &ell) >= pucci_minus(&m, &ell) + pucci_minus(&k, &ell) - 1e-10);
        let diff = pucci_plus(&m, &ell) - pucci_plus(&k, &ell);
        let d = m.sub(&k);
        prop_assert!(pucci_minus(&d, &ell) <= diff + 1e-10 && diff <= pucci_plus(&d, &ell) + 1e-10);
    }

    #[test]
    fn pucci_on_psd_is_lambda_trace(m in sym_strategy(3), ell in ell_strategy()) {
        // m·mᵀ-like psd matrix via squaring
        let sq = SymMatrix::from_fn(3, |i, j| (0..3).map(|k| m.get(i, k) * m.get(k, j)).sum());
        let v = pucci_minus(&sq, &ell);
        prop_assert!((v - ell.lambda * sq.trace()).abs() <= 1e-9 * (1.0 + sq.trace()));
    }
}
