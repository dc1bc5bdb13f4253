//! Verification suites run by `verify`.

use std::path::PathBuf;

use biharmonic_core::solver::{contraction_round, uniqueness_certificate, RadialKernelK, Start};
use biharmonic_core::verification::{
    check_green_bound, check_lower_bound, compare_rates, fit_boundary_rate, regularity_probe, ww_chain,
    BoundCase, BoundReport, BoundSpec, RadialLevel, RateFit, Verdict,
};
use biharmonic_core::{Boggio, Config, Error, Solver};
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{load_fixture, Fixture};
use crate::manifest::{Outputs, RunManifest};
use crate::{exit, CliError};

pub const SUITES: [&str; 5] = ["bounds", "rate", "uniqueness", "regularity", "all"];

/// Options of `verify`.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub suite: String,
    pub fixture: Option<PathBuf>,
    pub seed: u64,
    pub pairs: usize,
    pub out: PathBuf,
}

/// One named check.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub statistic: f64,
    pub detail: Value,
}

/// Aggregated outcome written to `verify.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub failed: Vec<String>,
    pub verdict: Verdict,
}

impl Summary {
    pub fn exit_code(&self) -> u8 {
        if self.verdict == Verdict::Fail {
            exit::VERIFICATION
        } else {
            exit::OK
        }
    }
}

fn check(name: impl Into<String>, verdict: Verdict, statistic: f64, detail: Value) -> Check {
    Check {
        name: name.into(),
        verdict,
        statistic,
        detail,
    }
}

/// Turns violations detected by a check into a failed check; other errors propagate.
fn failing(name: &str, e: Error) -> Result<Check, CliError> {
    match e {
        Error::RateViolation(_) | Error::LowerBound(_) | Error::Positivity(_) | Error::SignIndefinite { .. } => {
            Ok(check(name, Verdict::Fail, f64::NAN, json!({ "error": e.to_string() })))
        }
        other => Err(other.into()),
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn solve(n: usize, alpha: f64, nodes: usize, start: Start) -> Result<(Solver, biharmonic_core::solver::RadialSolution<f64>), CliError> {
    let mut cfg = Config::with_alpha(alpha)?;
    cfg.nodes = nodes;
    let s = Solver::new(n, cfg)?;
    let sol = s.solve(start)?;
    Ok((s, sol))
}

/// Cases of the kernel bounds checked by the `bounds` suite.
pub const BOUND_CASES: [(&str, usize, usize, BoundCase); 8] = [
    ("ii1_n5_k0", 5, 0, BoundCase::Ii1),
    ("ii4_n2_k0", 2, 0, BoundCase::Ii4),
    ("ii4_n3_k0", 3, 0, BoundCase::Ii4),
    ("ii3_n2_k1", 2, 1, BoundCase::Ii3),
    ("ii2_n3_k1", 3, 1, BoundCase::Ii2),
    ("i2_n2_k2", 2, 2, BoundCase::I2),
    ("i1_n2_k3", 2, 3, BoundCase::I1),
    ("i1_n3_k3", 3, 3, BoundCase::I1),
];

fn bound_check(name: &str, r: &BoundReport, verdict: Verdict) -> Check {
    check(
        name,
        verdict,
        r.statistic,
        json!({
            "spec": r.spec,
            "seed": r.seed,
            "samples": r.samples,
            "statistic_doubled": r.statistic_doubled,
            "growth": r.growth,
            "argmax": r.argmax,
        }),
    )
}

fn bounds(o: &VerifyOptions, out: &mut Outputs) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for (name, n, k, case) in BOUND_CASES {
        let spec = BoundSpec::new(n, k, case)?;
        let r = check_green_bound(&spec, &Boggio::new(n)?, o.pairs, o.seed)?;
        out.csv(&format!("bound_{name}.csv"), |w| r.write_csv(w))?;
        checks.push(bound_check(&format!("bounds.{name}"), &r, r.verdict));
    }
    // reductions used for u ≤ c δ²; looser than the kernel bounds, reported only
    for n in [2usize, 3, 4, 5] {
        let spec = BoundSpec::weighted(n, 0.5, None)?;
        let r = check_green_bound(&spec, &Boggio::new(n)?, o.pairs, o.seed)?;
        checks.push(bound_check(&format!("bounds.weighted_n{n}"), &r, Verdict::Reported));
    }
    let (_, sol) = solve(5, 0.5, 128, Start::Midpoint)?;
    let w = ww_chain(&sol.nodes, &sol.u, 5, 0.5, 4)?;
    checks.push(check("bounds.integral_chain_n5", w.verdict, w.statistic, serde_json::to_value(&w).unwrap()));
    Ok(checks)
}

fn rate_detail(f: &RateFit) -> Value {
    serde_json::to_value(f).expect("fit serializes")
}

/// `(a, sup f)` for the ball weight at the given radii.
fn weight_and_load(n: usize, alpha: f64, r: &[f64]) -> Result<(Vec<f64>, f64), CliError> {
    let k = RadialKernelK::new(n, alpha)?;
    let a = r.iter().map(|&r| k.weight(r)).collect();
    let sup_f = (0..=4096)
        .map(|i| k.profile().load(i as f64 / 4096.0).abs())
        .fold(0.0, f64::max);
    Ok((a, sup_f))
}

fn lower_bound_checks(prefix: &str, n: usize, alpha: f64, r: &[f64], delta: &[f64], u: &[f64]) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let fit = match fit_boundary_rate(u, delta, (0.0, 0.1)) {
        Ok(f) => f,
        Err(e) => return Ok(vec![failing(&format!("{prefix}.fit"), e)?]),
    };
    checks.push(check(
        format!("{prefix}.fit"),
        pass_if(fit.c1 > 0.0 && fit.c2.is_finite()),
        fit.spread(),
        rate_detail(&fit),
    ));
    let (a, sup_f) = weight_and_load(n, alpha, r)?;
    match check_lower_bound(u, &a, sup_f, alpha) {
        Ok(lb) => {
            let inf_ratio = a
                .iter()
                .zip(delta)
                .map(|(a, d)| a / (d * d))
                .fold(f64::INFINITY, f64::min);
            let lhs = lb.m * inf_ratio;
            checks.push(check(format!("{prefix}.lower_bound"), lb.verdict, lb.m, serde_json::to_value(&lb).unwrap()));
            checks.push(check(
                format!("{prefix}.consistency"),
                pass_if(lhs <= fit.c1 && fit.c1 <= fit.c2),
                lhs,
                json!({ "m_inf_a_over_delta2": lhs, "c1": fit.c1, "c2": fit.c2 }),
            ));
        }
        Err(e) => checks.push(failing(&format!("{prefix}.lower_bound"), e)?),
    }
    Ok(checks)
}

fn refinement_check(name: String, n: usize, alpha: f64, nodes: usize, coarse: Result<RateFit, Error>) -> Result<Check, CliError> {
    let coarse = match coarse {
        Ok(f) => f,
        Err(e) => return failing(&name, e),
    };
    let (_, fine_sol) = solve(n, alpha, 2 * nodes, Start::Midpoint)?;
    let fine = match fit_boundary_rate(&fine_sol.u, &fine_sol.delta(), (0.0, 0.05)) {
        Ok(f) => f,
        Err(e) => return failing(&name, e),
    };
    let r = compare_rates(coarse, fine);
    Ok(check(name, r.verdict, r.statistic, serde_json::to_value(&r).unwrap()))
}

fn rate(fixture: Option<&Fixture>) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    match fixture {
        Some(fx) => {
            checks.extend(lower_bound_checks("rate.fixture", fx.dimension, fx.alpha, &fx.r, &fx.delta, &fx.u)?);
            let coarse = fit_boundary_rate(&fx.u, &fx.delta, (0.0, 0.1));
            checks.push(refinement_check(
                format!("rate.refinement_alpha_{}", fx.alpha),
                fx.dimension,
                fx.alpha,
                fx.nodes,
                coarse,
            )?);
        }
        None => {
            for alpha in [0.25, 0.5, 0.75] {
                let (_, sol) = solve(2, alpha, 512, Start::Midpoint)?;
                let delta = sol.delta();
                if alpha == 0.5 {
                    checks.extend(lower_bound_checks("rate.disk", 2, alpha, &sol.nodes, &delta, &sol.u)?);
                }
                let coarse = fit_boundary_rate(&sol.u, &delta, (0.0, 0.1));
                checks.push(refinement_check(format!("rate.refinement_alpha_{alpha}"), 2, alpha, 512, coarse)?);
            }
        }
    }
    Ok(checks)
}

fn uniqueness(n: usize, alpha: f64, nodes: usize) -> Result<Vec<Check>, CliError> {
    let (s, lo) = solve(n, alpha, nodes, Start::Lower)?;
    let hi = s.solve(Start::Upper)?;
    let a = uniqueness_certificate(&lo.u, &hi.u)?;
    let mut checks = vec![check(
        "uniqueness.multistart",
        pass_if(a - 1.0 <= 1e-5),
        a - 1.0,
        json!({ "a_star": a, "alpha": alpha, "nodes": nodes, "iterations": [lo.iteration.iterations, hi.iteration.iterations] }),
    )];
    let doubled: Vec<f64> = lo.u.iter().map(|u| 2.0 * u).collect();
    let c = contraction_round(|u: &[f64]| s.solution_operator(u), alpha, &lo.u, &doubled, 1e-12)?;
    let rel = (c.after / c.bound - 1.0).abs();
    checks.push(check(
        "uniqueness.contraction",
        pass_if(c.holds || rel <= 0.01),
        rel,
        serde_json::to_value(&c).unwrap(),
    ));
    Ok(checks)
}

fn regularity() -> Result<Vec<Check>, CliError> {
    let mut reports = Vec::new();
    for alpha in [0.25, 0.75] {
        let levels = [256usize, 512, 1024]
            .iter()
            .map(|&m| {
                let (_, sol) = solve(2, alpha, m, Start::Midpoint)?;
                Ok(RadialLevel {
                    h: 1.0 / m as f64,
                    u: sol.u,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        reports.push(regularity_probe(&levels, alpha)?);
    }
    let mut checks: Vec<Check> = reports
        .iter()
        .map(|r| {
            check(
                format!("regularity.alpha_{}", r.alpha),
                r.verdict,
                r.exponent_d3,
                serde_json::to_value(r).unwrap(),
            )
        })
        .collect();
    let gap = reports[0].exponent_d3 - reports[1].exponent_d3;
    checks.push(check(
        "regularity.ordering",
        pass_if(gap > 0.0),
        gap,
        json!({ "exponent_alpha_0.25": reports[0].exponent_d3, "exponent_alpha_0.75": reports[1].exponent_d3 }),
    ));
    Ok(checks)
}

/// Runs a suite and writes `verify.json` (plus per-case ratio CSVs for `bounds`).
pub fn verify(o: &VerifyOptions) -> Result<Summary, CliError> {
    if !SUITES.contains(&o.suite.as_str()) {
        return Err(CliError::usage(format!(
            "unknown suite `{}`; expected one of {}",
            o.suite,
            SUITES.join(", ")
        )));
    }
    if o.pairs == 0 {
        return Err(CliError::usage("--pairs must be positive"));
    }
    let fixture = o.fixture.as_deref().map(load_fixture).transpose()?;
    let digests = fixture.as_ref().map(|f| f.digests.clone()).unwrap_or_default();
    let snapshot = json!({ "suite": o.suite, "pairs": o.pairs });
    let mut out = Outputs::create(&o.out, RunManifest::new("verify", snapshot, Some(o.seed), digests))?;
    let want = |s: &str| o.suite == s || o.suite == "all";
    let mut checks = Vec::new();
    if want("bounds") {
        checks.extend(bounds(o, &mut out)?);
    }
    if want("rate") {
        checks.extend(rate(fixture.as_ref())?);
    }
    if want("uniqueness") {
        let (n, alpha, nodes) = fixture
            .as_ref()
            .map_or((2, 0.5, 512), |f| (f.dimension, f.alpha, f.nodes));
        checks.extend(uniqueness(n, alpha, nodes)?);
    }
    if want("regularity") {
        checks.extend(regularity()?);
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| c.verdict == Verdict::Fail)
        .map(|c| c.name.clone())
        .collect();
    let summary = Summary {
        suite: o.suite.clone(),
        seed: o.seed,
        samples: o.pairs,
        verdict: pass_if(failed.is_empty()),
        failed,
        checks,
    };
    out.json("verify.json", &summary)?;
    out.finish()?;
    Ok(summary)
}
