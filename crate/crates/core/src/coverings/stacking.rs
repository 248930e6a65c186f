use crate::error::{invalid, Result};
use crate::report::{CheckReport, GridSummary};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type Rational = Ratio<i128>;

/// Dyadic cylinder Q × [t − r, t] of Z̄₁ = Q̄₁ × [−1, 0]: Q the generation-k
/// dyadic cube at `coords`, r = 4^{−k}, t − r = −1 + slot·r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cylinder {
    pub k: u32,
    pub coords: [u64; 3],
    pub slot: u64,
}

impl Cylinder {
    pub fn duration(&self) -> Rational {
        Rational::new(1, 1i128 << (2 * self.k))
    }

    pub fn bottom(&self) -> Rational {
        Rational::from_integer(-1) + self.duration() * Rational::from_integer(self.slot as i128)
    }

    pub fn top(&self) -> Rational {
        self.bottom() + self.duration()
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.k > 20 {
            return invalid("cylinder generation above 20");
        }
        let side = 1u64 << self.k;
        let ok_space = (0..3).all(|a| if a < dim { self.coords[a] < side } else { self.coords[a] == 0 });
        if !ok_space || self.slot >= 1u64 << (2 * self.k) {
            return invalid(format!("non-dyadic cylinder {self:?}"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackingReport {
    /// |∪ Z^m| exactly
    pub stacked: Rational,
    /// |∪ (Z^m ∪ Z)| exactly
    pub total: Rational,
    pub m: Rational,
    /// stacked ≥ m/(m+1)·total
    pub holds: bool,
    pub report: CheckReport,
}

fn union_length(mut iv: Vec<(Rational, Rational)>) -> Rational {
    iv.sort();
    let mut total = Rational::zero();
    let mut cur: Option<(Rational, Rational)> = None;
    for (a, b) in iv {
        cur = match cur {
            Some((s, e)) if a <= e => Some((s, e.max(b))),
            Some((s, e)) => {
                total += e - s;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((s, e)) = cur {
        total += e - s;
    }
    total
}

/// |∪ Z^m| ≥ m/(m+1)·|∪ (Z^m ∪ Z)| with Z^m = Q × [t, t + m·r], computed
/// exactly column by column over the finest spatial cubes present.
pub fn stacking(cylinders: &[Cylinder], m: Rational, dim: usize) -> Result<StackingReport> {
    if !(1..=3).contains(&dim) {
        return invalid(format!("dimension {dim} not in 1..=3"));
    }
    if m < Rational::from_integer(1) {
        return invalid("stack factor m must be ≥ 1");
    }
    for c in cylinders {
        c.validate(dim)?;
    }
    let finest = cylinders.iter().map(|c| c.k).max().unwrap_or(0);
    if finest as usize * dim > 24 {
        return invalid("cylinders too fine for column enumeration");
    }
    let mut shifted: HashMap<[u64; 3], Vec<(Rational, Rational)>> = HashMap::new();
    let mut full: HashMap<[u64; 3], Vec<(Rational, Rational)>> = HashMap::new();
    for c in cylinders {
        let span = 1u64 << (finest - c.k);
        let range = |a: usize| if a < dim { c.coords[a] * span..(c.coords[a] + 1) * span } else { 0..1 };
        let top = c.top();
        let up = top + m * c.duration();
        for i in range(0) {
            for j in range(1) {
                for l in range(2) {
                    shifted.entry([i, j, l]).or_default().push((top, up));
                    full.entry([i, j, l]).or_default().push((c.bottom(), up));
                }
            }
        }
    }
    let column = Rational::new(1, 1i128 << (finest as usize * dim));
    let measure = |map: HashMap<[u64; 3], Vec<(Rational, Rational)>>| {
        map.into_values().fold(Rational::zero(), |acc, iv| acc + union_length(iv) * column)
    };
    let stacked = measure(shifted);
    let total = measure(full);
    let bound = m / (m + Rational::from_integer(1)) * total;
    let holds = stacked >= bound;
    let f = |r: Rational| r.to_f64().unwrap_or(f64::NAN);
    let mut report = CheckReport::with_summary(
        "stacking",
        f(bound),
        f(stacked),
        0.0,
        GridSummary { h: (-(finest as f64)).exp2(), dim },
    );
    // The float margin can round; the exact comparison decides.
    report.pass = holds;
    report.margin = f(stacked - bound);
    report.note(format!("stacked = {stacked}, total = {total}, m = {m}"));
    Ok(StackingReport { stacked, total, m, holds, report })
}
