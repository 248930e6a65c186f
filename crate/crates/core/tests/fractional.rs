use kslab::grid::norm;
use kslab::operators::{fractional_laplacian, fractional_laplacian_at, near_field_moment, FractionalParams, TailSpec};
use kslab::{pt, Grid, Region, ScalarField};

fn line(h: f64, half: f64) -> Grid {
    Grid::cube(1, h, half).unwrap()
}

/// ∫_ℝ (u(y)+u(−y)−2u(0))/|y|^{1+σ} dy for the Gaussian, by Simpson on [0, 40]
/// plus the exact remainder of the constant part beyond 40.
fn gaussian_oracle(sigma: f64, width: f64) -> f64 {
    let s = 1.0 + sigma;
    let g = |y: f64| {
        if y == 0.0 {
            // finite limit for s ≤ 2; for s > 2 the y^{2−s} singularity is
            // integrable and the endpoint sample is dropped
            if s == 2.0 { -2.0 / (width * width) } else { 0.0 }
        } else {
            (2.0 * (-(y / width).powi(2)).exp() - 2.0) / y.powf(s)
        }
    };
    let (a, b, n) = (0.0, 40.0, 400_000usize);
    let dx = (b - a) / n as f64;
    let mut acc = g(a) + g(b);
    for k in 1..n {
        acc += g(a + k as f64 * dx) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    let body = acc * dx / 3.0;
    let tail = -2.0 * b.powf(1.0 - s) / (s - 1.0);
    2.0 * (body + tail)
}

#[test]
fn oracle_matches_closed_form() {
    // σ = 1: 4∫₀^∞ (e^{−y²} − 1)/y² dy = −4√π
    let v = gaussian_oracle(1.0, 1.0);
    assert!((v + 4.0 * std::f64::consts::PI.sqrt()).abs() < 1e-4, "{v}");
}

#[test]
fn gaussian_at_level_three_within_one_percent() {
    let g = line(1.0 / 64.0, 6.5);
    let u = ScalarField::from_fn(&g, |p| (-p[0] * p[0]).exp()).unwrap();
    let params = FractionalParams::new(1.0, 6.0);
    let s = fractional_laplacian_at(&u, g.nearest(&pt(&[0.0])), &params, &TailSpec::Zero).unwrap();
    let oracle = gaussian_oracle(1.0, 1.0);
    let rel = (s.value - oracle).abs() / oracle.abs();
    assert!(rel <= 0.01, "lattice {} oracle {oracle} rel {rel}", s.value);
    assert!(s.quadrature_error < 0.05 * oracle.abs());
    assert_eq!(s.tail_error, 0.0);
}

#[test]
fn other_orders_against_oracle() {
    let g = line(1.0 / 64.0, 8.5);
    let u = ScalarField::from_fn(&g, |p| (-p[0] * p[0]).exp()).unwrap();
    for sigma in [0.5, 1.5] {
        let params = FractionalParams::new(sigma, 8.0);
        let s = fractional_laplacian_at(&u, g.nearest(&pt(&[0.0])), &params, &TailSpec::Zero).unwrap();
        let oracle = gaussian_oracle(sigma, 1.0);
        let rel = (s.value - oracle).abs() / oracle.abs();
        assert!(rel <= 0.02, "σ={sigma}: lattice {} oracle {oracle}", s.value);
    }
}

#[test]
fn linear_field_gives_zero() {
    let g = Grid::cube(2, 1.0 / 16.0, 2.0).unwrap();
    let u = ScalarField::from_fn(&g, |p| 0.3 * p[0] - 2.0 * p[1]).unwrap();
    let mut params = FractionalParams::new(0.8, 1.9);
    params.level = 2;
    // the zero-tail term still sees u(x) ≠ 0 outside B_R; evaluate where u = 0
    let s = fractional_laplacian_at(&u, g.nearest(&pt(&[0.0, 0.0])), &params, &TailSpec::Zero).unwrap();
    assert!(s.value.abs() <= 1e-9, "{}", s.value);
}

#[test]
fn strict_maximum_gives_nonpositive_value() {
    let g = Grid::cube(2, 1.0 / 16.0, 2.0).unwrap();
    let u = ScalarField::from_fn(&g, |p| 1.0 / (1.0 + 4.0 * (p[0] * p[0] + p[1] * p[1]))).unwrap();
    let params = FractionalParams::new(1.2, 1.9);
    let s = fractional_laplacian_at(&u, g.nearest(&pt(&[0.0, 0.0])), &params, &TailSpec::Zero).unwrap();
    assert!(s.value < 0.0, "{}", s.value);
}

#[test]
fn dilation_scales_by_two_to_minus_sigma() {
    let g = line(1.0 / 64.0, 12.5);
    let sigma = 0.6;
    let params = FractionalParams::new(sigma, 12.0);
    let u = ScalarField::from_fn(&g, |p| (-p[0] * p[0]).exp()).unwrap();
    let w = ScalarField::from_fn(&g, |p| (-p[0] * p[0] / 4.0).exp()).unwrap();
    let c = g.nearest(&pt(&[0.0]));
    let a = fractional_laplacian_at(&u, c, &params, &TailSpec::Zero).unwrap();
    let b = fractional_laplacian_at(&w, c, &params, &TailSpec::Zero).unwrap();
    let ratio = b.value / a.value;
    let tol = (a.quadrature_error / a.value.abs() + b.quadrature_error / b.value.abs()).max(2e-3);
    assert!((ratio - 2f64.powf(-sigma)).abs() <= tol, "ratio {ratio} tol {tol}");
}

#[test]
fn region_evaluation_and_errors() {
    let g = Grid::cube(2, 1.0 / 8.0, 2.0).unwrap();
    let u = ScalarField::from_fn(&g, |p| (-norm(p).powi(2)).exp()).unwrap();
    let params = FractionalParams::new(1.0, 2.0);
    let samples = fractional_laplacian(&u, &Region::ball(pt(&[0.0, 0.0]), 0.3), &params, &TailSpec::Zero).unwrap();
    assert!(!samples.is_empty());
    assert!(samples.iter().all(|s| s.value < 0.0));
    let tail = TailSpec::PowerLaw { bound: 1.0, decay: 2.0 };
    let s = fractional_laplacian_at(&u, samples[0].node, &params, &tail).unwrap();
    assert!(s.tail_error > 0.0 && s.tail_error.is_finite());

    assert!(fractional_laplacian(&u, &Region::ball(pt(&[0.0, 0.0]), 0.3), &FractionalParams::new(2.0, 2.0), &TailSpec::Zero).is_err());
    assert!(fractional_laplacian(&u, &Region::ball(pt(&[0.0, 0.0]), 0.3), &FractionalParams::new(1.0, 3.0), &TailSpec::Zero).is_err());
    let edge = g.nearest(&pt(&[1.6, 0.0]));
    assert!(fractional_laplacian_at(&u, edge, &params, &TailSpec::Zero).is_err());
    let mut bad = params;
    bad.kernel_exponent = Some(4.5);
    assert!(fractional_laplacian_at(&u, samples[0].node, &bad, &TailSpec::Zero).is_err());
}

#[test]
fn near_field_moment_matches_frozen_values() {
    // ∫_{[−1,1]^n} |y|^{2−s} dy from adaptive cubature over the symmetric wedge
    let frozen = [(1usize, 1.5, 4.0 / 3.0), (2, 2.7, 5.626_588_300_676_866), (3, 3.4, 10.896_541_258_573_205)];
    for (n, s, want) in frozen {
        let k = near_field_moment(n, s);
        assert!((k - want).abs() <= 1e-9 * want, "n={n}: {k} vs {want}");
    }
}
