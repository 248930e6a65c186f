//! Separable lower envelopes of parabolas: inf/sup-convolutions and squared
//! distance transforms share this kernel.

use crate::error::{invalid, Result};
use crate::grid::{Grid, ScalarField};
use rayon::prelude::*;

/// out(j) = min_i input(i) + c·|i − j|² with |i − j| measured in index units.
///
/// Axes are processed in order, so the value at j is
/// `(..((input + c·d₀²) + c·d₁²) + c·d₂²)` for the best i, evaluated in that
/// order. `+inf` entries are ignored; an all-`inf` line stays `inf`.
pub(crate) fn min_plus_quadratic(grid: &Grid, input: &[f64], c: f64) -> Vec<f64> {
    let counts = grid.counts().to_vec();
    let mut data = input.to_vec();
    for axis in 0..grid.dim() {
        let stride: usize = counts[axis + 1..].iter().product();
        let len = counts[axis];
        let bases: Vec<usize> = (0..data.len())
            .filter(|&i| (i / stride) % len == 0)
            .collect();
        let lines: Vec<Vec<f64>> = bases
            .par_iter()
            .map(|&b| {
                let f: Vec<f64> = (0..len).map(|k| data[b + k * stride]).collect();
                let mut out = vec![0.0; len];
                envelope_1d(&f, c, &mut out);
                out
            })
            .collect();
        for (b, line) in bases.iter().zip(lines) {
            for (k, v) in line.into_iter().enumerate() {
                data[b + k * stride] = v;
            }
        }
    }
    data
}

fn envelope_1d(f: &[f64], c: f64, out: &mut [f64]) {
    let n = f.len();
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    let key = |q: usize| f[q] + c * (q as f64) * (q as f64);
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        if v.is_empty() {
            v.push(q);
            z.push(f64::NEG_INFINITY);
            continue;
        }
        loop {
            let p = *v.last().unwrap();
            let s = (key(q) - key(p)) / (2.0 * c * (q as f64 - p as f64));
            if s <= *z.last().unwrap() && v.len() > 1 {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
    }
    if v.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let eval = |q: usize, p: usize| {
        let d = p as f64 - q as f64;
        f[q] + c * (d * d)
    };
    let mut k = 0;
    for (p, slot) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < p as f64 {
            k += 1;
        }
        // Rounding in the breakpoints can misplace a near tie by one piece.
        let mut best = eval(v[k], p);
        if k > 0 {
            best = best.min(eval(v[k - 1], p));
        }
        if k + 1 < v.len() {
            best = best.min(eval(v[k + 1], p));
        }
        *slot = best;
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return invalid(format!("eps must be positive and finite, got {eps}"));
    }
    Ok(())
}

/// u_ε(y) = min over nodes x of u(x) + |x − y|²/(2ε).
pub fn inf_convolution(field: &ScalarField, eps: f64) -> Result<ScalarField> {
    check_eps(eps)?;
    let g = field.grid();
    let c = g.h() * g.h() / (2.0 * eps);
    ScalarField::new(g.clone(), min_plus_quadratic(g, field.values(), c))
}

/// u^ε(y) = max over nodes x of u(x) − |x − y|²/(2ε).
pub fn sup_convolution(field: &ScalarField, eps: f64) -> Result<ScalarField> {
    check_eps(eps)?;
    let g = field.grid();
    let c = g.h() * g.h() / (2.0 * eps);
    let neg: Vec<f64> = field.values().iter().map(|v| -v).collect();
    let out = min_plus_quadratic(g, &neg, c).into_iter().map(|v| -v).collect();
    ScalarField::new(g.clone(), out)
}

/// Γ_ε = (u_ε)^ε, the largest function below u touched from below at every
/// point by a concave paraboloid of opening 1/ε.
pub fn paraboloid_envelope(field: &ScalarField, eps: f64) -> Result<ScalarField> {
    sup_convolution(&inf_convolution(field, eps)?, eps)
}
