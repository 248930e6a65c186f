//! Check records shared by every estimate.

use crate::grid::Grid;
use serde::{Deserialize, Serialize};

/// Constants a check was run with; each is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub h: f64,
    pub dim: usize,
}

/// One inequality check: `lhs ≤ rhs` up to `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub constants: EstimateConstants,
    pub grid: GridSummary,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64, grid: &Grid) -> CheckReport {
        CheckReport::with_summary(name, lhs, rhs, tolerance, GridSummary { h: grid.h(), dim: grid.dim() })
    }

    pub fn with_summary(name: &str, lhs: f64, rhs: f64, tolerance: f64, grid: GridSummary) -> CheckReport {
        let margin = rhs - lhs;
        CheckReport {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            constants: EstimateConstants::default(),
            grid,
            seed: None,
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn with_constants(mut self, constants: EstimateConstants) -> CheckReport {
        self.constants = constants;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> CheckReport {
        self.seed = Some(seed);
        self
    }
}
