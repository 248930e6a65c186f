use kslab::operators::{pucci_field, Ellipticity, PucciSign};
use kslab::solvers::*;
use kslab::{pt, Grid, Region, ScalarField};
use proptest::prelude::*;

fn max_err(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn r2(p: &[f64; 3]) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

#[test]
fn poisson_reproduces_quadratics() {
    let g = Grid::cube(2, 1.0 / 32.0, 1.0).unwrap();
    let exact = ScalarField::from_fn(&g, |p| r2(p) + 0.5 * p[0] * p[1]).unwrap();
    let f = ScalarField::constant(&g, 4.0).unwrap();
    // start from zero inside so the solve has work to do
    let bd = BoundaryData::from_fn(&g, |p| if r2(p) < 1.0 { 0.0 } else { r2(p) + 0.5 * p[0] * p[1] }).unwrap();
    for mode in [SolverMode::GaussSeidelRedBlack, SolverMode::Jacobi, SolverMode::PseudoTime] {
        let mut cfg = SolverConfig::with_mode(mode);
        cfg.tolerance = 1e-9;
        let s = solve_poisson(&Region::ball([0.0; 3], 1.0), &f, &bd, &cfg).unwrap();
        assert!(s.residual <= 1e-9 && s.iterations > 0);
        // residual 1e-9 against an O(1/h²) operator leaves O(1e-9) error
        assert!(max_err(&s.field, &exact) <= 1e-8, "{mode:?}: {}", max_err(&s.field, &exact));
    }
}

#[test]
fn poisson_sine_converges_at_second_order() {
    let mut errs = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        let g = Grid::cube(2, h, 1.0).unwrap();
        let k = std::f64::consts::PI;
        let exact = ScalarField::from_fn(&g, |p| (k * p[0]).sin() * (k * p[1]).sin()).unwrap();
        let f = exact.map(|v| -2.0 * k * k * v).unwrap();
        let bd = BoundaryData::constant(&g, 0.0).unwrap();
        let s = solve_poisson(&Region::All, &f, &bd, &SolverConfig::default()).unwrap();
        errs.push(max_err(&s.field, &exact));
    }
    let order = (errs[0] / errs[1]).log2();
    assert!(order > 1.9, "{errs:?}");
}

#[test]
fn solver_errors() {
    let g = Grid::cube(2, 1.0 / 8.0, 1.0).unwrap();
    let f = ScalarField::constant(&g, 0.0).unwrap();
    let bd = BoundaryData::constant(&g, 0.0).unwrap();
    let mut cfg = SolverConfig::default();
    cfg.omega = Some(2.0);
    assert!(solve_poisson(&Region::All, &f, &bd, &cfg).is_err());
    assert!(solve_poisson(&Region::ball(pt(&[5.0, 5.0]), 0.1), &f, &bd, &SolverConfig::default()).is_err());
    let ell = Ellipticity::new(1.0, 2.0).unwrap();
    let cfg = SolverConfig { mode: SolverMode::PseudoTime, tau: Some(1.0), ..Default::default() };
    assert!(solve_pucci(&Region::All, PucciSign::Plus, &f, &bd, &ell, &cfg).is_err());
    let other = Grid::cube(2, 1.0 / 4.0, 1.0).unwrap();
    let bad = BoundaryData::constant(&other, 0.0).unwrap();
    assert!(solve_poisson(&Region::All, &f, &bad, &SolverConfig::default()).is_err());
    let starved = SolverConfig { max_iterations: 2, ..Default::default() };
    let one = ScalarField::constant(&g, 1.0).unwrap();
    assert!(solve_poisson(&Region::All, &one, &bd, &starved).is_err());
}

#[test]
fn pucci_with_equal_constants_is_scaled_poisson() {
    let g = Grid::cube(2, 1.0 / 16.0, 1.0).unwrap();
    let ell = Ellipticity::new(1.5, 1.5).unwrap();
    let f = ScalarField::from_fn(&g, |p| 3.0 * (p[0] - p[1])).unwrap();
    let bd = BoundaryData::from_fn(&g, |p| p[0] * p[1]).unwrap();
    let cfg = SolverConfig { mode: SolverMode::NonlinearGaussSeidel, tolerance: 1e-9, ..Default::default() };
    let a = solve_pucci(&Region::All, PucciSign::Minus, &f, &bd, &ell, &cfg).unwrap();
    let f2 = f.map(|v| v / 1.5).unwrap();
    let b = solve_poisson(&Region::All, &f2, &bd, &SolverConfig { tolerance: 1e-10, ..Default::default() }).unwrap();
    assert!(max_err(&a.field, &b.field) <= 1e-8, "{}", max_err(&a.field, &b.field));
}

#[test]
fn pucci_radial_solution_converges() {
    let ell = Ellipticity::new(1.0, 2.0).unwrap();
    let exact = |p: &[f64; 3]| 1.0 / r2(p).sqrt().max(1e-9);
    let dom = Region::annulus([0.0; 3], 0.25, 1.0);
    let mut errs = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        let g = Grid::cube(2, h, 1.0).unwrap();
        let f = ScalarField::constant(&g, 0.0).unwrap();
        let init = BoundaryData::from_fn(&g, |p| if dom.contains(p) { 0.0 } else { exact(p) }).unwrap();
        let cfg = SolverConfig { mode: SolverMode::NonlinearGaussSeidel, tolerance: 1e-8, ..Default::default() };
        let s = solve_pucci(&dom, PucciSign::Minus, &f, &init, &ell, &cfg).unwrap();
        let want = ScalarField::from_fn(&g, exact).unwrap();
        errs.push(max_err(&s.field, &want));
        // the computed field is a discrete solution
        let p = pucci_field(&s.field, &ell, PucciSign::Minus).unwrap();
        let worst = dom.nodes(p.grid()).into_iter().map(|i| p.at(i).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-7, "{worst}");
    }
    assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
}

#[test]
fn pucci_modes_agree() {
    let g = Grid::cube(2, 1.0 / 8.0, 1.0).unwrap();
    let ell = Ellipticity::new(0.5, 2.0).unwrap();
    let f = ScalarField::constant(&g, -1.0).unwrap();
    let bd = BoundaryData::from_fn(&g, |p| p[0] * p[0] - 0.5 * p[1]).unwrap();
    let sols: Vec<ScalarField> = [SolverMode::NonlinearGaussSeidel, SolverMode::PseudoTime]
        .into_iter()
        .map(|mode| {
            let cfg = SolverConfig { mode, tolerance: 1e-9, ..Default::default() };
            solve_pucci(&Region::All, PucciSign::Plus, &f, &bd, &ell, &cfg).unwrap().field
        })
        .collect();
    assert!(max_err(&sols[0], &sols[1]) <= 1e-8);
}

#[test]
fn walk_matches_discrete_harmonic_oracle() {
    let g = Grid::cube(2, 1.0 / 32.0, 1.0 + 2.0 / 32.0).unwrap();
    let target = Region::half_space([-1.0, 0.0, 0.0], 0.0).intersect(Region::closed_ball([0.0; 3], 0.25));
    let dom = Region::ball([0.0; 3], 1.0);
    let v = discrete_hitting_probability(&g, &dom, &target).unwrap();
    let start = pt(&[-0.25, 0.25]);
    let est = random_walk_hitting(&g, &dom, &target, &start, &WalkConfig::new(20_000, 5)).unwrap();
    let oracle = v.at_point(&start).unwrap();
    let sigma = est.halfwidth / 1.96;
    assert!((est.probability - oracle).abs() <= 3.0 * sigma, "{} vs {oracle}", est.probability);
    assert_eq!(est.capped, 0);
    let again = random_walk_hitting(&g, &dom, &target, &start, &WalkConfig::new(20_000, 5)).unwrap();
    assert_eq!(est, again);
}

#[test]
fn one_dimensional_hitting_is_linear() {
    // gambler's ruin on 0 < x < 1: hitting x ≥ 1 first has probability x
    let g = Grid::new(1, 1.0 / 16.0, &[-0.125], &[21]).unwrap();
    let dom = Region::open_half_space([-1.0, 0.0, 0.0], 0.0);
    let target = Region::half_space([-1.0, 0.0, 0.0], -1.0);
    let v = discrete_hitting_probability(&g, &dom, &target).unwrap();
    for k in 0..=16 {
        let x = k as f64 / 16.0;
        let got = v.at_point(&pt(&[x])).unwrap();
        assert!((got - x).abs() <= 1e-9, "x = {x}: {got}");
    }
    let est = random_walk_hitting(&g, &dom, &target, &pt(&[0.75]), &WalkConfig::new(4000, 1)).unwrap();
    assert!((est.probability - 0.75).abs() <= 3.0 * est.halfwidth / 1.96);
}

#[test]
fn trivial_and_invalid_walks() {
    let g = Grid::cube(2, 1.0 / 8.0, 1.25).unwrap();
    let dom = Region::ball([0.0; 3], 1.0);
    let target = Region::closed_ball([0.0; 3], 0.25);
    let est = random_walk_hitting(&g, &dom, &target, &pt(&[0.0, 0.0]), &WalkConfig::new(10, 0)).unwrap();
    assert!(est.trivial && est.probability == 1.0 && est.halfwidth == 0.0);
    assert!(random_walk_hitting(&g, &dom, &target, &pt(&[0.01, 0.0]), &WalkConfig::new(10, 0)).is_err());
    assert!(random_walk_hitting(&g, &dom, &target, &pt(&[1.125, 0.0]), &WalkConfig::new(10, 0)).is_err());
    assert!(random_walk_hitting(&g, &dom, &target, &pt(&[0.5, 0.0]), &WalkConfig::new(0, 0)).is_err());
    let mut capped = WalkConfig::new(50, 0);
    capped.max_steps = 1;
    let est = random_walk_hitting(&g, &dom, &target, &pt(&[0.75, 0.0]), &capped).unwrap();
    assert_eq!(est.capped, 50);
    assert!(est.capped_fraction() == 1.0);
}

#[test]
fn probabilistic_harnack_on_quarter_ball() {
    let g = Grid::cube(2, 1.0 / 16.0, 1.0 + 2.0 / 16.0).unwrap();
    let quarter = Region::half_space([-1.0, 0.0, 0.0], 0.0).intersect(Region::half_space([0.0, -1.0, 0.0], 0.0));
    let rep = probabilistic_harnack_check(&g, 0.25, &quarter, 2000, 7, None).unwrap();
    assert!(rep.pass, "{:?}", rep.notes);
    assert!(probabilistic_harnack_check(&g, 0.4, &quarter, 2000, 7, None).is_err());
    assert!(probabilistic_harnack_check(&g, 0.25, &quarter, 50, 7, None).is_err());
    let small = Grid::cube(2, 1.0 / 16.0, 0.5).unwrap();
    assert!(probabilistic_harnack_check(&small, 0.25, &quarter, 2000, 7, None).is_err());
}

#[test]
fn spike_family_is_normalized() {
    let ell = Ellipticity::new(1.0, 2.0).unwrap();
    let fam = spike_supersolutions(1.0 / 8.0, &ell, 3, 2).unwrap();
    assert_eq!(fam.len(), 2);
    let g = fam[0].field.grid().clone();
    let q3 = Region::cube([0.0; 3], 3.0).nodes(&g);
    for s in &fam {
        let m = q3.iter().map(|&i| s.field.at(i)).fold(f64::INFINITY, f64::min);
        assert!((m - 1.0).abs() <= 1e-12, "{m}");
        assert!(s.rhs.max() <= 0.0 && s.residual <= 1e-7);
    }
    assert_ne!(fam[0].field, fam[1].field);
    let again = spike_supersolutions(1.0 / 8.0, &ell, 3, 1).unwrap();
    assert_eq!(again[0].field, fam[0].field);
}

#[test]
fn pplus_family_solves_its_equation() {
    let ell = Ellipticity::new(1.0, 2.0).unwrap();
    let fam = pplus_solutions(1.0 / 16.0, &ell, 14, 2).unwrap();
    for s in &fam {
        let p = pucci_field(&s.field, &ell, PucciSign::Plus).unwrap();
        let worst = Region::ball([0.0; 3], 1.0).nodes(p.grid()).into_iter().map(|i| p.at(i).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-7, "{worst}");
    }
}

#[test]
fn library_families_build() {
    let g = Grid::cube(2, 1.0 / 16.0, 1.0).unwrap();
    let params = FieldParams::new().with("z0", 1.5).with("z1", 0.5);
    for name in FAMILIES {
        let lf = field_library(name, &g, &params).unwrap();
        assert_eq!(lf.name, *name);
        assert!(lf.field.values().iter().all(|v| v.is_finite()), "{name}");
    }
    assert!(field_library("nope", &g, &params).is_err());
    let line = Grid::cube(1, 1.0 / 16.0, 1.0).unwrap();
    assert!(field_library("harmonic_saddle", &line, &params).is_err());
    assert!(field_library("abs_power", &g, &FieldParams::new().with("alpha", 0.0)).is_err());
    // exponent Λ(n−1)/λ − 1 vanishes in 2D when λ = Λ
    assert!(field_library("pucci_radial", &g, &FieldParams::new().with("lambda", 2.0).with("Lambda", 2.0)).is_err());
    let line_radial = field_library("pucci_radial", &line, &FieldParams::new());
    assert!(line_radial.is_err());
}

#[test]
fn library_masks_singularities() {
    let g = Grid::cube(2, 1.0 / 32.0, 1.0).unwrap();
    let lf = field_library("fundamental", &g, &FieldParams::new()).unwrap();
    let ex = lf.excluded_indices().unwrap();
    assert!(ex.contains(&g.nearest(&pt(&[0.0, 0.0]))));
    assert!(ex.iter().all(|&i| kslab::grid::norm(&g.point(i)) < 4.0 / 32.0));
    let h = field_library("huber", &g, &FieldParams::new().with("eps", 0.25)).unwrap();
    assert!(h.excluded.is_none());
    assert_eq!(h.field.at_point(&pt(&[0.0, 0.0])).unwrap(), 0.0);
    assert!((h.field.at_point(&pt(&[0.75, 0.0])).unwrap() - 0.625).abs() < 1e-15);
}

#[test]
fn pucci_radial_family_is_a_discrete_near_solution() {
    let g = Grid::cube(2, 1.0 / 64.0, 1.0).unwrap();
    let ell = Ellipticity::new(1.0, 2.0).unwrap();
    let lf = field_library("pucci_radial", &g, &FieldParams::new().with("lambda", 1.0).with("Lambda", 2.0)).unwrap();
    let p = pucci_field(&lf.field, &ell, PucciSign::Minus).unwrap();
    let ann = Region::annulus([0.0; 3], 0.5, 0.9);
    let worst = ann.nodes(p.grid()).into_iter().map(|i| p.at(i).abs()).fold(0.0, f64::max);
    assert!(worst <= 0.05, "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn poisson_solution_satisfies_maximum_principle(c in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let g = Grid::cube(2, 1.0 / 8.0, 1.0).unwrap();
        let bd = BoundaryData::from_fn(&g, |p| c[0] * p[0] + c[1] * p[1] + c[2] * p[0] * p[1] + c[3] * (3.0 * p[0]).sin()).unwrap();
        let zero = ScalarField::constant(&g, 0.0).unwrap();
        let s = solve_poisson(&Region::All, &zero, &bd, &SolverConfig::default()).unwrap();
        let edge: Vec<f64> = (0..g.len()).filter(|&i| g.on_edge(g.multi(i))).map(|i| bd.field().at(i)).collect();
        let hi = edge.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = edge.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(s.field.max() <= hi + 1e-9 && s.field.min() >= lo - 1e-9);
    }

    #[test]
    fn hitting_estimates_are_probabilities(seed in 0u64..1000) {
        let g = Grid::cube(2, 1.0 / 8.0, 1.25).unwrap();
        let est = random_walk_hitting(
            &g,
            &Region::ball([0.0; 3], 1.0),
            &Region::closed_ball(pt(&[0.5, 0.0]), 0.2),
            &pt(&[-0.25, 0.25]),
            &WalkConfig::new(200, seed),
        ).unwrap();
        prop_assert!((0.0..=1.0).contains(&est.probability));
        prop_assert_eq!(est.hits + est.capped <= est.samples, true);
    }
}
