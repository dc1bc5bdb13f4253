//! `solve` and `probe-green`.

use std::fs;
use std::path::{Path, PathBuf};

use biharmonic_core::domain::DomainKind;
use biharmonic_core::fd::{sign_probe, ProbeMode, SignReport};
use biharmonic_core::solver::{SolveReport, Start};
use biharmonic_core::{Domain, Solver};
use serde::Serialize;

use crate::config::{self, RunConfig};
use crate::manifest::{digest_file, Outputs, RunManifest};
use crate::CliError;

/// Options of `solve`.
#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub config: Option<PathBuf>,
    pub domain: Option<String>,
    pub alpha: Option<f64>,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SolveFile<'a> {
    domain: &'a Domain,
    #[serde(flatten)]
    report: &'a SolveReport,
}

/// Loads the config, applies overrides and validates the result.
pub fn resolve_config(opts: &SolveOptions) -> Result<(RunConfig, Vec<PathBuf>), CliError> {
    let mut inputs = Vec::new();
    let mut cfg = match &opts.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            inputs.push(p.clone());
            config::parse(&text, &p.display().to_string())?
        }
        None => RunConfig::default(),
    };
    if let Some(d) = &opts.domain {
        cfg.domain = parse_domain(d)?;
    }
    if let Some(a) = opts.alpha {
        cfg.solver.alpha = a;
    }
    cfg.solver.validate()?;
    Ok((cfg, inputs))
}

pub fn parse_domain(text: &str) -> Result<Domain, CliError> {
    let d: Domain = serde_json::from_str(text)
        .map_err(|e| CliError::usage(format!("--domain: {e}")))?;
    d.validate()?;
    Ok(d)
}

/// Solves on a ball and writes `report.json`, `field.csv` and `manifest.json`.
pub fn solve(opts: &SolveOptions) -> Result<SolveReport, CliError> {
    let (cfg, inputs) = resolve_config(opts)?;
    let DomainKind::UnitBall { n } = cfg.domain.kind else {
        return Err(CliError::usage(
            "the solver needs a positive Green function and runs on unit balls only",
        ));
    };
    let digests = inputs.iter().map(|p| digest_file(p)).collect::<Result<Vec<_>, _>>()?;
    let snapshot = serde_json::to_value(&cfg).expect("config serializes");
    let mut out = Outputs::create(&opts.out, RunManifest::new("solve", snapshot, None, digests))?;
    let solver = Solver::new(n, cfg.solver.clone())?;
    let sol = solver.solve(Start::Midpoint)?;
    let report = solver.report(&sol, None);
    out.json(
        "report.json",
        &SolveFile {
            domain: &cfg.domain,
            report: &report,
        },
    )?;
    out.csv("field.csv", |w| sol.write_csv(w))?;
    out.finish()?;
    Ok(report)
}

/// Options of `probe-green`.
#[derive(Clone, Debug)]
pub struct ProbeOptions {
    pub domain: String,
    pub h: Option<f64>,
    pub dense: bool,
    pub columns: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ProbeFile<'a> {
    domain: &'a Domain,
    #[serde(flatten)]
    report: &'a SignReport,
}

/// Scans the discrete or exact Green function for negative entries.
pub fn probe_green(opts: &ProbeOptions) -> Result<SignReport, CliError> {
    let domain = parse_domain(&opts.domain)?;
    if domain.dimension() != 2 {
        return Err(CliError::usage("sign probes need a planar domain"));
    }
    let h = opts
        .h
        .or(domain.h)
        .ok_or_else(|| CliError::usage("grid spacing missing: pass --h or set \"h\" in the domain"))?;
    let mode = if opts.dense {
        ProbeMode::Dense
    } else {
        ProbeMode::Subsample {
            columns: opts.columns,
            seed: opts.seed,
        }
    };
    let snapshot = serde_json::json!({ "domain": domain, "h": h, "mode": mode });
    let seed = (!opts.dense).then_some(opts.seed);
    let mut out = Outputs::create(&opts.out, RunManifest::new("probe-green", snapshot, seed, vec![]))?;
    let report = sign_probe(&domain, h, mode)?;
    out.json(
        "sign_report.json",
        &ProbeFile {
            domain: &domain,
            report: &report,
        },
    )?;
    out.finish()?;
    Ok(report)
}

/// Reads `report.json` and `field.csv` of a solve output directory.
pub fn load_fixture(dir: &Path) -> Result<Fixture, CliError> {
    let report_path = dir.join("report.json");
    let field_path = dir.join("field.csv");
    let text = fs::read_to_string(&report_path).map_err(|e| CliError::io(&report_path, e))?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", report_path.display())))?;
    let get = |k: &str| {
        v.get(k)
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| CliError::usage(format!("{}: missing `{k}`", report_path.display())))
    };
    let alpha = get("alpha")?;
    let dimension = get("dimension")? as usize;
    let nodes = get("nodes")? as usize;
    let csv = fs::read_to_string(&field_path).map_err(|e| CliError::io(&field_path, e))?;
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| CliError::usage(format!("{}: empty", field_path.display())))?
        .split(',')
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| CliError::usage(format!("{}: no `{name}` column", field_path.display())))
    };
    let (cx, cd, cu) = (col("x")?, col("delta")?, col("u")?);
    let mut r = Vec::new();
    let mut delta = Vec::new();
    let mut u = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let num = |c: usize| {
            f.get(c).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| {
                CliError::usage(format!("{}: bad value on data row {}", field_path.display(), i + 1))
            })
        };
        r.push(num(cx)?);
        delta.push(num(cd)?);
        u.push(num(cu)?);
    }
    Ok(Fixture {
        alpha,
        dimension,
        nodes,
        r,
        delta,
        u,
        digests: vec![digest_file(&report_path)?, digest_file(&field_path)?],
    })
}

/// A solve output used as verification input.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub alpha: f64,
    pub dimension: usize,
    pub nodes: usize,
    pub r: Vec<f64>,
    pub delta: Vec<f64>,
    pub u: Vec<f64>,
    pub digests: Vec<crate::manifest::InputDigest>,
}
