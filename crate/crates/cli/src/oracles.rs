//! Independent references used by the suites: a sampling search for the
//! Pucci extremum, closed-form harmonic fields, a Gaussian quadrature oracle
//! for the 1D fractional Laplacian and random convex regions.

use kslab::grid::Region;
use kslab::operators::{Ellipticity, PucciSign, SymMatrix};
use kslab::{Grid, ScalarField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Mat = [[f64; 3]; 3];

fn orthonormalize(q: &mut Mat, n: usize) {
    for j in 0..n {
        for k in 0..j {
            let d: f64 = (0..n).map(|i| q[i][j] * q[i][k]).sum();
            for i in 0..n {
                q[i][j] -= d * q[i][k];
            }
        }
        let len: f64 = (0..n).map(|i| q[i][j] * q[i][j]).sum::<f64>().sqrt();
        for row in q.iter_mut().take(n) {
            row[j] /= len;
        }
    }
}

fn haar<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let mut q = [[0.0; 3]; 3];
    for row in q.iter_mut().take(n) {
        for v in row.iter_mut().take(n) {
            *v = rng.sample(StandardNormal);
        }
    }
    orthonormalize(&mut q, n);
    q
}

fn contract(q: &Mat, d: &[f64], m: &SymMatrix) -> f64 {
    SymMatrix::from_eigen(q, d).contract(m)
}

/// Extremum of A:M over sampled admissible A = Q diag(d) Qᵀ, λ ≤ dᵢ ≤ Λ.
///
/// A quarter of the budget draws Haar rotations with d at the corners or
/// uniform; the rest perturbs the incumbent with a geometrically shrinking
/// step. Only A:M evaluations are used, no eigen-decomposition of M.
pub fn sampled_pucci<R: Rng>(m: &SymMatrix, ell: &Ellipticity, sign: PucciSign, samples: usize, rng: &mut R) -> f64 {
    let n = m.dim();
    let better = |a: f64, b: f64| match sign {
        PucciSign::Minus => a < b,
        PucciSign::Plus => a > b,
    };
    let (lo, hi) = (ell.lambda, ell.big_lambda);
    let mut best_q = haar(rng, n);
    let mut best_d = vec![lo; n];
    let mut best = contract(&best_q, &best_d, m);
    let global = samples / 4;
    for s in 0..samples {
        let (q, d) = if s < global {
            let q = haar(rng, n);
            let d: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { if rng.gen_bool(0.5) { lo } else { hi } } else { rng.gen_range(lo..=hi) })
                .collect();
            (q, d)
        } else {
            let t = (s - global) as f64 / (samples - global) as f64;
            let step = 0.3 * (1e-6f64 / 0.3).powf(t);
            let mut q = best_q;
            for row in q.iter_mut().take(n) {
                for v in row.iter_mut().take(n) {
                    *v += step * rng.sample::<f64, _>(StandardNormal);
                }
            }
            orthonormalize(&mut q, n);
            let d: Vec<f64> = best_d
                .iter()
                .map(|&x| (x + step * (hi - lo) * rng.sample::<f64, _>(StandardNormal)).clamp(lo, hi))
                .collect();
            (q, d)
        };
        let v = contract(&q, &d, m);
        if better(v, best) {
            best = v;
            best_q = q;
            best_d = d;
        }
    }
    best
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> SymMatrix {
    let e: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SymMatrix::from_fn(n, |i, j| e[3 * i + j])
}


fn cpow(x: f64, y: f64, k: i32) -> (f64, f64) {
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..k {
        (re, im) = (re * x - im * y, re * y + im * x);
    }
    (re, im)
}

/// Twenty closed-form harmonic fields in 2D: real and imaginary parts of
/// shifted powers, exponentials, logarithms and Poisson kernels with poles
/// off the unit square.
pub fn harmonic_fields(g: &Grid) -> kslab::Result<Vec<(String, ScalarField)>> {
    let mut out = Vec::new();
    let shifts = [(0.0, 0.0), (0.3, -0.2), (-0.4, 0.1), (0.2, 0.5)];
    for k in 1..=4 {
        let (a, b) = shifts[(k - 1) as usize];
        out.push((format!("re(z-z0)^{k}"), ScalarField::from_fn(g, |p| cpow(p[0] - a, p[1] - b, k).0)?));
        out.push((format!("im(z-z0)^{k}"), ScalarField::from_fn(g, |p| cpow(p[0] - a, p[1] - b, k).1)?));
    }
    for a in [1.0, 2.0] {
        out.push((format!("exp{a}x cos"), ScalarField::from_fn(g, |p| (a * p[0]).exp() * (a * p[1]).cos())?));
        out.push((format!("exp{a}y sin"), ScalarField::from_fn(g, |p| (a * p[1]).exp() * (a * p[0]).sin())?));
    }
    for q in [[1.6, 0.3], [-1.8, -0.5], [0.2, 2.0], [-1.4, 1.4]] {
        out.push((
            format!("log|x-({},{})|", q[0], q[1]),
            ScalarField::from_fn(g, |p| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).ln() * 0.5)?,
        ));
    }
    for z in [[1.8, 0.0], [0.0, -2.2], [1.5, 1.5], [-2.0, 1.0]] {
        out.push((format!("poisson({},{})", z[0], z[1]), poisson_kernel(g, z)?));
    }
    Ok(out)
}

/// (|z|² − |x|²)/(|z| |x − z|²), positive on B_{|z|}.
pub fn poisson_kernel(g: &Grid, z: [f64; 2]) -> kslab::Result<ScalarField> {
    let rz = z[0].hypot(z[1]);
    ScalarField::from_fn(g, |p| {
        let d2 = (p[0] - z[0]).powi(2) + (p[1] - z[1]).powi(2);
        (rz * rz - p[0] * p[0] - p[1] * p[1]) / (rz * d2)
    })
}

/// Ten harmonic fields positive on B̄₁ in 2D.
pub fn positive_harmonic_fields(g: &Grid) -> kslab::Result<Vec<(String, ScalarField)>> {
    let mut out = Vec::new();
    for a in [0.5, 0.9] {
        out.push((format!("1+{a}x1"), ScalarField::from_fn(g, |p| 1.0 + a * p[0])?));
    }
    out.push(("2+x1x2".into(), ScalarField::from_fn(g, |p| 2.0 + p[0] * p[1])?));
    out.push(("1.5+saddle".into(), ScalarField::from_fn(g, |p| 1.5 + p[0] * p[0] - p[1] * p[1])?));
    out.push(("2+exp cos".into(), ScalarField::from_fn(g, |p| 2.0 + p[0].exp() * p[1].cos() - 1.0)?));
    out.push(("3-log".into(), ScalarField::from_fn(g, |p| 3.0 - 0.5 * ((p[0] - 2.0).powi(2) + p[1] * p[1]).ln())?));
    for z in [[1.6, 0.0], [0.0, 2.0], [-1.3, 1.3], [2.5, -1.0]] {
        out.push((format!("poisson({},{})", z[0], z[1]), poisson_kernel(g, z)?));
    }
    Ok(out)
}

/// ∫_ℝ (u(y)+u(−y)−2u(0))/|y|^{1+σ} dy for e^{−y²}: Simpson on [0, 40]
/// plus the exact tail of the constant part.
pub fn gaussian_oracle(sigma: f64) -> f64 {
    let s = 1.0 + sigma;
    let f = |y: f64| {
        if y == 0.0 {
            if s == 2.0 { -2.0 } else { 0.0 }
        } else {
            (2.0 * (-y * y).exp() - 2.0) / y.powf(s)
        }
    };
    let (b, n) = (40.0, 400_000usize);
    let dx = b / n as f64;
    let mut acc = f(0.0) + f(b);
    for k in 1..n {
        acc += f(k as f64 * dx) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * (acc * dx / 3.0 - 2.0 * b.powf(1.0 - s) / (s - 1.0))
}

pub fn random_convex_region(rng: &mut ChaCha8Rng, dim: usize) -> Region {
    let piece = |rng: &mut ChaCha8Rng| {
        let mut c = [0.0; 3];
        for v in c.iter_mut().take(dim) {
            *v = rng.gen_range(-0.5..0.5);
        }
        match rng.gen_range(0..4) {
            0 => Region::ball(c, rng.gen_range(0.1..0.8)),
            1 => Region::closed_ball(c, rng.gen_range(0.1..0.8)),
            2 => Region::cube(c, rng.gen_range(0.2..1.2)),
            _ => {
                let mut n = [0.0; 3];
                for v in n.iter_mut().take(dim) {
                    *v = rng.gen_range(-1.0..1.0);
                }
                if rng.gen_bool(0.5) {
                    Region::half_space(n, rng.gen_range(-0.2..0.4))
                } else {
                    Region::open_half_space(n, rng.gen_range(-0.2..0.4))
                }
            }
        }
    };
    let mut r = piece(rng);
    for _ in 0..rng.gen_range(0..3) {
        r = r.intersect(piece(rng));
    }
    r
}
