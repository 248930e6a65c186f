//! Oscillation-decay profiles and the Hölder modulus they imply.

use crate::error::{invalid, LabError, Result};
use crate::grid::{oscillation, Point, Region, ScalarField};
use crate::report::{CheckReport, EstimateConstants, GridSummary};
use serde::{Deserialize, Serialize};

/// Oscillations of a field over concentric closed balls of radii ρ^k r₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub center: Point,
    pub rho: f64,
    pub r0: f64,
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
    pub grid: Option<GridSummary>,
}

impl DecayProfile {
    /// Profile from given oscillations at radii ρ^k r₀.
    pub fn from_values(center: Point, rho: f64, r0: f64, oscillations: Vec<f64>) -> Result<DecayProfile> {
        if !(rho > 0.0 && rho < 1.0) {
            return invalid(format!("rho = {rho} not in (0,1)"));
        }
        if !(r0 > 0.0) {
            return invalid("r0 must be positive");
        }
        if oscillations.iter().any(|o| !(o.is_finite() && *o >= 0.0)) {
            return invalid("oscillations must be finite and non-negative");
        }
        let radii = (0..oscillations.len()).map(|k| r0 * rho.powi(k as i32)).collect();
        Ok(DecayProfile { center, rho, r0, radii, oscillations, grid: None })
    }

    /// CSV with columns r, osc, bound (bound = C (r/r₀)^α osc₀ for the given θ).
    pub fn to_csv(&self, theta: Option<f64>) -> String {
        let mut s = String::from("r,osc,bound\n");
        let ac = theta.and_then(|t| holder_from_decay(t, self.rho).ok());
        let o0 = self.oscillations.first().copied().unwrap_or(0.0);
        for (r, o) in self.radii.iter().zip(&self.oscillations) {
            let b = match ac {
                Some((a, c)) => format!("{}", c * (r / self.r0).powf(a) * o0),
                None => String::new(),
            };
            s.push_str(&format!("{r},{o},{b}\n"));
        }
        s
    }
}

/// osc over closed balls B̄_{ρ^k r₀}(center), k = 0..=depth.
pub fn oscillation_profile(
    field: &ScalarField,
    center: &Point,
    rho: f64,
    r0: f64,
    depth: usize,
) -> Result<DecayProfile> {
    if !(rho > 0.0 && rho < 1.0) {
        return invalid(format!("rho = {rho} not in (0,1)"));
    }
    let g = field.grid();
    if !g.covers_box(center, r0) {
        return Err(LabError::OutsideGrid(format!("ball of radius {r0} leaves the grid")));
    }
    let inner = r0 * rho.powi(depth as i32);
    if inner < 2.0 * g.h() * (1.0 - 1e-12) {
        return Err(LabError::GridTooSmall(format!(
            "innermost radius {inner:e} is below 2h = {:e}",
            2.0 * g.h()
        )));
    }
    let mut osc = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let r = r0 * rho.powi(k as i32);
        osc.push(oscillation(field, &Region::closed_ball(*center, r))?);
    }
    let mut p = DecayProfile::from_values(*center, rho, r0, osc)?;
    p.grid = Some(GridSummary { h: g.h(), dim: g.dim() });
    Ok(p)
}

/// α = ln(1−θ)/ln ρ and C = 1/(1−θ).
pub fn holder_from_decay(theta: f64, rho: f64) -> Result<(f64, f64)> {
    if !(theta > 0.0 && theta < 1.0) {
        return invalid(format!("theta = {theta} not in (0,1)"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return invalid(format!("rho = {rho} not in (0,1)"));
    }
    Ok(((1.0 - theta).ln() / rho.ln(), 1.0 / (1.0 - theta)))
}

/// Checks the step inequality osc_{k+1} ≤ (1−θ) osc_k, then the modulus
/// osc_{B_r} ≤ C (r/r₀)^α osc₀ for every r ∈ (ρ^{K+1} r₀, r₀].
///
/// Only the recorded radii are sampled. For r ∈ (ρ^{k+1} r₀, ρ^k r₀] the
/// left side is at most osc_k and the right side at least C ρ^{(k+1)α} osc₀,
/// so the worst case on each shell is compared; geometric profiles meet it
/// with equality.
pub fn decay_implies_modulus_check(profile: &DecayProfile, theta: f64) -> Result<CheckReport> {
    let (alpha, c) = holder_from_decay(theta, profile.rho)?;
    let osc = &profile.oscillations;
    if osc.is_empty() {
        return invalid("empty profile");
    }
    let o0 = osc[0];
    let tol = 1e-12 * o0.max(f64::MIN_POSITIVE);
    for k in 0..osc.len().saturating_sub(1) {
        if osc[k + 1] > (1.0 - theta) * osc[k] + tol {
            return Err(LabError::Hypothesis(format!(
                "step inequality fails at k = {k}: osc_{} = {:e} > (1-theta) osc_{k} = {:e}",
                k + 1,
                osc[k + 1],
                (1.0 - theta) * osc[k]
            )));
        }
    }
    let mut worst = (f64::INFINITY, 0.0, 0.0, 0usize);
    for (k, &o) in osc.iter().enumerate() {
        // C ρ^{(k+1)α} = (1−θ)^k since ρ^α = 1−θ; the reduced form keeps
        // geometric profiles bit-exact
        let bound = (1.0 - theta).powi(k as i32) * o0;
        if bound - o < worst.0 {
            worst = (bound - o, o, bound, k);
        }
    }
    let summary = profile.grid.unwrap_or(GridSummary { h: 0.0, dim: 0 });
    let mut r = CheckReport::with_summary("decay_implies_modulus", worst.1, worst.2, tol, summary)
        .with_constants(EstimateConstants {
            theta: Some(theta),
            rho: Some(profile.rho),
            alpha: Some(alpha),
            c: Some(c),
            ..Default::default()
        });
    r.note(format!("tightest shell k = {}", worst.3));
    r.note("only radii rho^k r0 are sampled; intermediate radii follow by monotonicity");
    Ok(r)
}

/// Least-squares slope of ln osc against ln r, and its R².
pub fn fit_holder_exponent(profile: &DecayProfile) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = profile
        .radii
        .iter()
        .zip(&profile.oscillations)
        .filter(|(_, o)| **o > 0.0)
        .map(|(r, o)| (r.ln(), o.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(LabError::InvalidParameter(format!(
            "degenerate profile: {} points with positive oscillation, need 3",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, r2))
}
