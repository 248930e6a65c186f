use crate::error::{invalid, LabError, Result};
use crate::grid::{dist2, norm, Point, Region};
use crate::operators::SymMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ParaboloidSign {
    /// φ(x) = −(M/2)|x − y₀|² + offset
    Concave,
    /// φ(x) = (M/2)|x − y₀|² + offset
    Convex,
}

/// Paraboloids of fixed opening sliding over a set of centers.
#[derive(Clone, Debug)]
pub struct ParaboloidFamily {
    pub opening: f64,
    pub sign: ParaboloidSign,
    pub centers: Region,
    pub offset: f64,
}

impl ParaboloidFamily {
    pub fn new(opening: f64, sign: ParaboloidSign, centers: Region, offset: f64) -> Result<ParaboloidFamily> {
        if !(opening > 0.0) || !opening.is_finite() {
            return invalid(format!("paraboloid opening must be positive, got {opening}"));
        }
        Ok(ParaboloidFamily { opening, sign, centers, offset })
    }

    pub fn concave(opening: f64, centers: Region) -> Result<ParaboloidFamily> {
        ParaboloidFamily::new(opening, ParaboloidSign::Concave, centers, 0.0)
    }

    pub fn eval(&self, center: &Point, x: &Point) -> f64 {
        let q = 0.5 * self.opening * dist2(x, center);
        match self.sign {
            ParaboloidSign::Concave => self.offset - q,
            ParaboloidSign::Convex => self.offset + q,
        }
    }
}

/// φ_{y₀}(x) = C₀·C₁·(q(|x − y₀|) − q(1 − ρ/2)), q(r) = min(r^{−α}, (ρ/2)^{−α}),
/// C₁ = 1/(q(1/2 + ρ/2) − q(1 − ρ/2)).
#[derive(Clone, Debug)]
pub struct RadialProfileFamily {
    pub alpha: f64,
    pub rho: f64,
    pub c0: f64,
    pub c1: f64,
    pub centers: Region,
}

impl RadialProfileFamily {
    pub fn new(alpha: f64, rho: f64, c0: f64, centers: Region) -> Result<RadialProfileFamily> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return invalid(format!("alpha must be ≥ 1, got {alpha}"));
        }
        if !(rho > 0.0 && rho < 0.5) {
            return invalid(format!("rho must lie in (0, 1/2), got {rho}"));
        }
        if !(c0 >= 1.0) || !c0.is_finite() {
            return invalid(format!("C0 must be ≥ 1, got {c0}"));
        }
        let q = |r: f64| r.powf(-alpha).min((rho / 2.0).powf(-alpha));
        let c1 = 1.0 / (q(0.5 + rho / 2.0) - q(1.0 - rho / 2.0));
        Ok(RadialProfileFamily { alpha, rho, c0, c1, centers })
    }

    /// The family for ellipticity (λ, Λ) in dimension n: α = Λn/λ and C₀ the
    /// smallest power of two with P⁻(D²φ) ≥ 1 wherever |x − y₀| ≤ 1 + ρ/2.
    pub fn for_ellipticity(lambda: f64, big_lambda: f64, n: usize, rho: f64) -> Result<RadialProfileFamily> {
        let alpha = big_lambda * n as f64 / lambda;
        let mut fam = RadialProfileFamily::new(alpha, rho, 1.0, Region::ball([0.0; 3], rho / 2.0))?;
        let gain = lambda * (alpha + 1.0) - big_lambda * (n as f64 - 1.0);
        if gain <= 0.0 {
            return invalid("profile is not a strict subsolution for these constants");
        }
        let floor = fam.c1 * alpha * (1.0 + rho / 2.0).powf(-alpha - 2.0) * gain;
        while fam.c0 * floor < 1.0 {
            fam.c0 *= 2.0;
        }
        Ok(fam)
    }

    pub fn profile(&self, r: f64) -> f64 {
        r.powf(-self.alpha).min((self.rho / 2.0).powf(-self.alpha))
    }

    pub fn scale(&self) -> f64 {
        self.c0 * self.c1
    }

    pub fn eval(&self, center: &Point, x: &Point) -> f64 {
        let r = dist2(x, center).sqrt();
        self.scale() * (self.profile(r) - self.profile(1.0 - self.rho / 2.0))
    }

    /// M := sup φ.
    pub fn supremum(&self) -> f64 {
        self.scale() * ((self.rho / 2.0).powf(-self.alpha) - self.profile(1.0 - self.rho / 2.0))
    }

    /// D²φ₀(z) for |z| > ρ/2.
    pub fn hessian(&self, z: &Point, dim: usize) -> SymMatrix {
        let r = norm(z);
        let k = self.scale() * self.alpha * r.powf(-self.alpha - 2.0);
        SymMatrix::from_fn(dim, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            k * ((self.alpha + 2.0) * z[i] * z[j] / (r * r) - id)
        })
    }

    /// Largest |eigenvalue| of D²φ₀ on the smooth part |z| ≥ ρ/2.
    pub fn hessian_bound(&self) -> f64 {
        self.scale() * self.alpha * (self.alpha + 1.0) * (self.rho / 2.0).powf(-self.alpha - 2.0)
    }

    /// z with Dφ₀(z) = p, valid only outside B̄_{ρ/2}.
    pub fn invert_gradient(&self, p: &[f64; 3]) -> Result<Point> {
        let size = norm(p);
        let not_invertible = || LabError::Hypothesis("profile gradient not invertible here".into());
        if size == 0.0 {
            return Err(not_invertible());
        }
        let r = (self.scale() * self.alpha / size).powf(1.0 / (self.alpha + 1.0));
        if !(r > self.rho / 2.0) {
            return Err(not_invertible());
        }
        Ok([-p[0] / size * r, -p[1] / size * r, -p[2] / size * r])
    }
}

/// Either sliding family.
#[derive(Clone, Debug)]
pub enum Family {
    Paraboloid(ParaboloidFamily),
    Radial(RadialProfileFamily),
}

impl Family {
    pub fn centers(&self) -> &Region {
        match self {
            Family::Paraboloid(f) => &f.centers,
            Family::Radial(f) => &f.centers,
        }
    }

    pub fn eval(&self, center: &Point, x: &Point) -> f64 {
        match self {
            Family::Paraboloid(f) => f.eval(center, x),
            Family::Radial(f) => f.eval(center, x),
        }
    }

    /// Operator-norm bound of D²φ used for the contact tolerance.
    pub fn hessian_bound(&self) -> f64 {
        match self {
            Family::Paraboloid(f) => f.opening,
            Family::Radial(f) => f.hessian_bound(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Family::Paraboloid(f) => format!(
                "paraboloid {:?} M={} offset={} centers={}",
                f.sign,
                f.opening,
                f.offset,
                f.centers.describe()
            ),
            Family::Radial(f) => format!(
                "radial alpha={} rho={} C0={} C1={} centers={}",
                f.alpha,
                f.rho,
                f.c0,
                f.c1,
                f.centers.describe()
            ),
        }
    }
}

impl From<ParaboloidFamily> for Family {
    fn from(f: ParaboloidFamily) -> Family {
        Family::Paraboloid(f)
    }
}

impl From<RadialProfileFamily> for Family {
    fn from(f: RadialProfileFamily) -> Family {
        Family::Radial(f)
    }
}
