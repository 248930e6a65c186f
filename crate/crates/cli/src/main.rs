//! `kslab`: run verification suites, generate fields, emit figure data and
//! merge reports.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
//! or I/O errors.

mod fields;
mod oracles;
mod plot;
mod report;
mod suites;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fields::FieldOpts;
use kslab::io::{load_field, save_field};
use kslab::operators::Ellipticity;
use report::{Environment, ReportDocument};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use suites::Ctx;

#[derive(Parser)]
#[command(name = "kslab", version, about = "Numerical checks of Krylov-Safonov regularity estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Grid spacing, as a decimal or a fraction such as 1/64
    #[arg(long, value_parser = parse_h)]
    h: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Lower ellipticity constant
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Upper ellipticity constant
    #[arg(long = "Lambda", default_value_t = 2.0)]
    big_lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Numeric parameter override, repeatable
    #[arg(long = "suite-param", visible_alias = "param", value_name = "KEY=VALUE", value_parser = parse_kv)]
    params: Vec<(String, f64)>,
}

impl Common {
    fn ell(&self) -> Result<Ellipticity> {
        Ok(Ellipticity::new(self.lambda, self.big_lambda)?)
    }

    fn param_map(&self) -> BTreeMap<String, f64> {
        self.params.iter().cloned().collect()
    }

    fn field_opts(&self) -> Result<FieldOpts> {
        Ok(FieldOpts {
            h: self.h.unwrap_or(1.0 / 64.0),
            dim: self.dim.unwrap_or(2),
            ell: self.ell()?,
            seed: self.seed,
            params: self.param_map(),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write its report
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(suites::SUITE_NAMES))]
        suite: String,
        #[command(flatten)]
        common: Common,
        /// Output directory for <suite>.json (and CSVs with --csv); stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the suite's figure data (requires --out)
        #[arg(long)]
        csv: bool,
    },
    /// Write a field (closed-form family or Dirichlet solve) as fld-json
    Generate {
        family: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Store values in a raw little-endian f64 sidecar
        #[arg(long)]
        binary: bool,
        /// Right-hand side for poisson/pucci: a family name or an fld-json file
        #[arg(long)]
        f: Option<String>,
        /// Dirichlet data for poisson/pucci: a family name or an fld-json file
        #[arg(long)]
        g: Option<String>,
    },
    /// Emit CSV figure data
    PlotData {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(plot::KINDS))]
        kind: String,
        #[command(flatten)]
        common: Common,
        /// Input fld-json field
        #[arg(long, conflicts_with = "family")]
        input: Option<PathBuf>,
        /// Closed-form family generated on the fly
        #[arg(long)]
        family: Option<String>,
        /// CSV path; stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report utilities
    Report {
        #[command(subcommand)]
        action: ReportAction,
    },
}

#[derive(Subcommand)]
enum ReportAction {
    /// Concatenate reports in argument order
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_h(s: &str) -> std::result::Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
            a / b
        }
        None => s.parse().map_err(|e| format!("{e}"))?,
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("spacing must be positive, got {s}"))
    }
}

fn parse_kv(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s}"))?;
    let v = parse_number(v.trim()).ok_or_else(|| format!("{k}: '{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_number(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
    .filter(|v: &f64| v.is_finite())
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn verify(suite: &str, common: &Common, out: Option<&Path>, csv: bool) -> Result<bool> {
    let checks = suites::lookup(suite).context("unknown suite")?;
    let params = common.param_map();
    suites::validate_keys(&checks, &params)?;
    if csv && out.is_none() {
        bail!("--csv needs --out");
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let ell = common.ell()?;
    let ctx = Ctx { h: common.h, dim: common.dim, ell, seed: common.seed, params: params.clone() };
    let results = suites::run_checks(&checks, &ctx)?;
    for (name, reps) in &results {
        let failed: Vec<_> = reps.iter().filter(|r| !r.pass).collect();
        let tag = if failed.is_empty() { "PASS" } else { "FAIL" };
        eprintln!("{tag} {name}: {} of {} reports pass", reps.len() - failed.len(), reps.len());
        for r in failed {
            eprintln!("    {}: lhs {:e} rhs {:e} tolerance {:e}", r.name, r.lhs, r.rhs, r.tolerance);
        }
    }
    let env = Environment {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: common.seed,
        h: common.h,
        dim: common.dim,
        ellipticity: ell,
    };
    let doc = ReportDocument::new(suite, params, results, env, suites::constants(&ell)?);
    let json = doc.to_json()?;
    match out {
        Some(dir) => {
            write_out(Some(&dir.join(format!("{suite}.json"))), &json)?;
            if csv {
                for (name, text) in suite_csv(suite, common)? {
                    write_out(Some(&dir.join(name)), &text)?;
                }
            }
        }
        None => write_out(None, &json)?,
    }
    Ok(doc.passed())
}

/// Figure data attached to a suite run.
fn suite_csv(suite: &str, common: &Common) -> Result<Vec<(String, String)>> {
    let all = suite == "full";
    let with = |dim: usize, key: &str, v: f64| -> Result<FieldOpts> {
        let mut o = common.field_opts()?;
        o.dim = dim;
        o.params = BTreeMap::from([(key.to_string(), v)]);
        Ok(o)
    };
    let mut files = Vec::new();
    if all || suite == "laplacian-core" {
        let u = fields::library_record("abs_power", &with(common.dim.unwrap_or(2), "alpha", 0.5)?)?.field;
        let theta = BTreeMap::from([("theta".to_string(), 0.25)]);
        files.push(("decay.csv".into(), plot::decay(&u, &theta)?));
    }
    if all || suite == "uniformly-elliptic-core" {
        let s = kslab::solvers::spike_supersolutions(1.0 / 16.0, &common.ell()?, common.seed + 11, 1)?;
        files.push(("distribution.csv".into(), plot::distribution(&s[0].field, &BTreeMap::new())?));
    }
    if all || suite == "contact-geometry" {
        let u = fields::library_record("constant", &with(2, "value", 0.0)?)?.field;
        files.push(("contact.csv".into(), plot::contact(&u)?));
    }
    if all || suite == "coverings" {
        files.push(("covering.csv".into(), plot::covering(1, &BTreeMap::new())?));
    }
    Ok(files)
}

fn generate(family: &str, common: &Common, out: &Path, binary: bool, f: Option<&str>, g: Option<&str>) -> Result<()> {
    if !fields::known(family) {
        bail!("unknown family '{family}' (known: {})", fields::family_list());
    }
    let rec = fields::build(family, &common.field_opts()?, f, g)?;
    save_field(out, &rec, binary)?;
    eprintln!("wrote {} ({} values)", out.display(), rec.field.values().len());
    Ok(())
}

fn plot_data(kind: &str, common: &Common, input: Option<&Path>, family: Option<&str>, out: Option<&Path>) -> Result<()> {
    let params = common.param_map();
    let field = || -> Result<kslab::ScalarField> {
        match (input, family) {
            (Some(p), _) => Ok(load_field(p).with_context(|| format!("loading {}", p.display()))?.field),
            (None, Some(f)) => Ok(fields::library_record(f, &common.field_opts()?)?.field),
            (None, None) => bail!("plot-data {kind} needs --input or --family"),
        }
    };
    let text = match kind {
        "decay" => plot::decay(&field()?, &params)?,
        "contact" => plot::contact(&field()?)?,
        "distribution" => plot::distribution(&field()?, &params)?,
        "covering" => {
            if input.is_some() || family.is_some() {
                bail!("plot-data covering builds its own region; it takes no field");
            }
            plot::covering(common.dim.unwrap_or(1), &params)?
        }
        _ => bail!("unknown plot kind {kind}"),
    };
    write_out(out, &text)
}

fn merge(inputs: &[PathBuf], out: Option<&Path>) -> Result<bool> {
    let docs = inputs.iter().map(|p| ReportDocument::load(p)).collect::<Result<Vec<_>>>()?;
    let merged = report::merge(docs).context("nothing to merge")?;
    write_out(out, &merged.to_json()?)?;
    Ok(merged.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Verify { suite, common, out, csv } => verify(suite, common, out.as_deref(), *csv),
        Command::Generate { family, common, out, binary, f, g } => {
            generate(family, common, out, *binary, f.as_deref(), g.as_deref()).map(|_| true)
        }
        Command::PlotData { kind, common, input, family, out } => {
            plot_data(kind, common, input.as_deref(), family.as_deref(), out.as_deref()).map(|_| true)
        }
        Command::Report { action: ReportAction::Merge { inputs, out } } => merge(inputs, out.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
