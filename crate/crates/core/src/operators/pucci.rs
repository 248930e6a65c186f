use super::SymMatrix;
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Ellipticity bounds 0 < λ ≤ Λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipticity {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
}

impl Ellipticity {
    pub fn new(lambda: f64, big_lambda: f64) -> Result<Ellipticity> {
        if !(lambda > 0.0 && lambda <= big_lambda && big_lambda.is_finite()) {
            return invalid(format!("need 0 < lambda <= Lambda, got {lambda}, {big_lambda}"));
        }
        Ok(Ellipticity { lambda, big_lambda })
    }

    /// λ = Λ = 1: both Pucci operators reduce to the trace.
    pub fn laplacian() -> Ellipticity {
        Ellipticity { lambda: 1.0, big_lambda: 1.0 }
    }

    /// True when λI ≤ A ≤ ΛI up to `tol`.
    pub fn admits(&self, a: &SymMatrix, tol: f64) -> bool {
        let ev = a.eigenvalues();
        ev[..a.dim()]
            .iter()
            .all(|&e| e >= self.lambda - tol && e <= self.big_lambda + tol)
    }
}

/// Which extremal operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PucciSign {
    Minus,
    Plus,
}

/// P⁻(M) = λ Σ e₊ − Λ Σ e₋ over the eigenvalues e of M.
pub fn pucci_minus(m: &SymMatrix, ell: &Ellipticity) -> f64 {
    let ev = m.eigenvalues();
    ev[..m.dim()]
        .iter()
        .map(|&e| if e > 0.0 { ell.lambda * e } else { ell.big_lambda * e })
        .sum()
}

/// P⁺(M) = Λ Σ e₊ − λ Σ e₋.
pub fn pucci_plus(m: &SymMatrix, ell: &Ellipticity) -> f64 {
    let ev = m.eigenvalues();
    ev[..m.dim()]
        .iter()
        .map(|&e| if e > 0.0 { ell.big_lambda * e } else { ell.lambda * e })
        .sum()
}

pub fn pucci(m: &SymMatrix, ell: &Ellipticity, sign: PucciSign) -> f64 {
    match sign {
        PucciSign::Minus => pucci_minus(m, ell),
        PucciSign::Plus => pucci_plus(m, ell),
    }
}
