//! Field generation for `generate` and `plot-data`: closed-form families,
//! Dirichlet solves and the solved test families.

use anyhow::{bail, Context, Result};
use kslab::grid::{Grid, Region, ScalarField};
use kslab::io::{load_field, FieldRecord};
use kslab::operators::{Ellipticity, PucciSign};
use kslab::solvers::*;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::Path;

pub const SOLVED: &[&str] = &["poisson", "pucci", "spike_supersolution", "pplus_solution"];

#[derive(Clone, Debug)]
pub struct FieldOpts {
    pub h: f64,
    pub dim: usize,
    pub ell: Ellipticity,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
}

impl FieldOpts {
    fn num(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    /// The cube [−w, w]^dim with w = `half_width` (default 1).
    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::cube(self.dim, self.h, self.num("half_width", 1.0))?)
    }

    fn library_params(&self, family: &str) -> FieldParams {
        let mut p = FieldParams(self.params.clone());
        p.0.remove("half_width");
        if family == "pucci_radial" {
            p.0.entry("lambda".into()).or_insert(self.ell.lambda);
            p.0.entry("Lambda".into()).or_insert(self.ell.big_lambda);
        }
        p
    }
}

pub fn known(family: &str) -> bool {
    FAMILIES.contains(&family) || SOLVED.contains(&family)
}

pub fn family_list() -> String {
    FAMILIES.iter().chain(SOLVED).copied().collect::<Vec<_>>().join(", ")
}

/// A closed-form family member with its mask and provenance.
pub fn library_record(family: &str, opts: &FieldOpts) -> Result<FieldRecord> {
    let grid = opts.grid()?;
    let params = opts.library_params(family);
    let lf = field_library(family, &grid, &params)?;
    let mut rec = FieldRecord::new(family, lf.field.clone());
    rec.excluded = lf.excluded_indices();
    rec.provenance = Some(json!({
        "generator": "field_library",
        "family": family,
        "params": params.0,
        "h": opts.h,
        "dim": opts.dim,
    }));
    Ok(rec)
}

/// `src` is an fld-json path if one exists, otherwise a library family.
fn source(src: &str, grid: &Grid, opts: &FieldOpts) -> Result<ScalarField> {
    let path = Path::new(src);
    if path.exists() {
        let rec = load_field(path).with_context(|| format!("loading {src}"))?;
        if rec.field.grid() != grid {
            bail!("{src}: grid differs from the requested --h/--dim grid");
        }
        return Ok(rec.field);
    }
    if !FAMILIES.contains(&src) {
        bail!("'{src}' is neither a file nor a library family ({})", FAMILIES.join(", "));
    }
    Ok(field_library(src, grid, &opts.library_params(src))?.field)
}

fn solver_config(opts: &FieldOpts) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    cfg.tolerance = opts.num("solver_tol", cfg.tolerance);
    cfg.max_iterations = opts.num("max_iterations", cfg.max_iterations as f64) as usize;
    cfg
}

/// Builds any known family. `f` and `g` name the right-hand side and the
/// Dirichlet data of the solved families.
pub fn build(family: &str, opts: &FieldOpts, f: Option<&str>, g: Option<&str>) -> Result<FieldRecord> {
    match family {
        "poisson" | "pucci" => {
            let (Some(f), Some(g)) = (f, g) else { bail!("{family} needs --f and --g") };
            let grid = opts.grid()?;
            let rhs = source(f, &grid, opts)?;
            let bd = BoundaryData::from_field(source(g, &grid, opts)?)?;
            // the grid's interior unless a ball radius is given
            let domain = match opts.params.get("radius") {
                Some(&r) => Region::ball([0.0; 3], r),
                None => Region::All,
            };
            let cfg = solver_config(opts);
            let sol = if family == "poisson" {
                solve_poisson(&domain, &rhs, &bd, &cfg)?
            } else {
                let sign = if opts.num("sign", -1.0) < 0.0 { PucciSign::Minus } else { PucciSign::Plus };
                solve_pucci(&domain, sign, &rhs, &bd, &opts.ell, &cfg)?
            };
            if sol.residual > cfg.tolerance {
                bail!("{family} solve stopped at residual {:e} > {:e}", sol.residual, cfg.tolerance);
            }
            let mut prov = sol.provenance.clone();
            prov["f"] = json!(f);
            prov["g"] = json!(g);
            let mut rec = FieldRecord::new(family, sol.field);
            rec.provenance = Some(prov);
            Ok(rec)
        }
        "spike_supersolution" | "pplus_solution" => {
            let member = opts.num("member", 0.0) as usize;
            let fam = if family == "pplus_solution" {
                pplus_solutions(opts.h, &opts.ell, opts.seed, member + 1)?
            } else {
                spike_supersolutions(opts.h, &opts.ell, opts.seed, member + 1)?
            };
            let s = fam.into_iter().nth(member).context("family returned too few members")?;
            let mut rec = FieldRecord::new(family, s.field);
            rec.provenance = Some(json!({
                "generator": family,
                "member": member,
                "seed": s.seed,
                "residual": s.residual,
                "ellipticity": opts.ell,
                "h": opts.h,
            }));
            Ok(rec)
        }
        _ if FAMILIES.contains(&family) => library_record(family, opts),
        _ => bail!("unknown family '{family}' (known: {})", family_list()),
    }
}
