//! Acceptance criteria for the workspace, each returning a one-line finding.
//!
//! The `acceptance` test target runs [`CRITERIA`] and prints one PASS/FAIL
//! line per criterion.

use std::f64::consts::PI;
use std::path::Path;

use biharmonic_core::boggio::{GreenKernel, LoadQuadrature};
use biharmonic_core::fd::{sign_probe, ProbeMode};
use biharmonic_core::solver::{
    choose_epsilon, contraction_round, estimate_m, iterate, uniqueness_certificate, Bracket, NystromOperator, Start,
};
use biharmonic_core::spectral::{eigenpair, first_bessel_zero, radial_eigenpair};
use biharmonic_core::verification::{
    check_green_bound, compare_rates, fit_boundary_rate, regularity_probe, BoundCase, BoundSpec, RadialLevel, Verdict,
};
use biharmonic_core::{Boggio, Config, Domain, Solver};
use biharmonic_cli::commands::{self, ProbeOptions, SolveOptions};
use biharmonic_cli::suites::{verify, VerifyOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `Ok(finding)` on pass, `Err(finding)` on failure.
pub type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn disk(alpha: f64, nodes: usize) -> Result<Solver, String> {
    let mut cfg = Config::with_alpha(alpha).map_err(err)?;
    cfg.nodes = nodes;
    Solver::new(2, cfg).map_err(err)
}

const ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];

fn load_error(q: LoadQuadrature, radii: usize) -> Result<f64, String> {
    let k = Boggio::new(2).map_err(err)?;
    let mut worst: f64 = 0.0;
    for i in 0..radii {
        let r = 0.98 * i as f64 / (radii - 1) as f64;
        let x = [r * 0.6, r * 0.8];
        let got = k.constant_load_potential(&x, &q).map_err(err)?;
        worst = worst.max((got / ((1.0 - r * r).powi(2) / 64.0) - 1.0).abs());
    }
    Ok(worst)
}

pub fn kernel_exactness() -> Outcome {
    let e = load_error(LoadQuadrature::default(), 50)?;
    // 2-point Gauss panels: fourth order under panel doubling
    let rule = |p| LoadQuadrature {
        radial_panels: p,
        radial_points: 2,
        angular_order: 16,
    };
    let errs = [load_error(rule(4), 20)?, load_error(rule(8), 20)?, load_error(rule(16), 20)?];
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(
        e < 1e-6 && orders.iter().all(|o| (o - 4.0).abs() < 0.5),
        format!("max rel err {e:.2e} at 50 radii; 2-point Gauss orders {orders:.2?} (expected 4)"),
    )
}

fn ball_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if x.iter().map(|c| c * c).sum::<f64>() < 1.0 {
            return x;
        }
    }
}

pub fn ball_positivity() -> Outcome {
    let mut parts = Vec::new();
    let mut bad = 0usize;
    for n in [2, 3, 5] {
        let k = Boggio::new(n).map_err(err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(2024 + n as u64);
        let mut min = f64::INFINITY;
        for _ in 0..10_000 {
            let (x, y) = (ball_point(&mut rng, n), ball_point(&mut rng, n));
            let g = k.green(&x, &y).map_err(err)?;
            if !(g > 0.0) {
                bad += 1;
            }
            min = min.min(g);
        }
        parts.push(format!("n={n} min {min:.2e}"));
    }
    ensure(bad == 0, format!("{bad} nonpositive of 30000; {}", parts.join(", ")))
}

pub fn sign_counterexamples() -> Outcome {
    let probe = |d: Domain, h: f64, mode: ProbeMode| sign_probe(&d, h, mode).map_err(err);
    let sq = probe(Domain::rectangle(1.0, 1.0).map_err(err)?, 1.0 / 65.0, ProbeMode::Dense)?;
    let thin = probe(Domain::ellipse(1.0, 0.5).map_err(err)?, 0.02, ProbeMode::Dense)?;
    let round = probe(Domain::ellipse(1.0, 0.95).map_err(err)?, 0.028, ProbeMode::Dense)?;
    let round_fine = probe(
        Domain::ellipse(1.0, 0.95).map_err(err)?,
        0.02,
        ProbeMode::Subsample { columns: 400, seed: 1 },
    )?;
    let line = |name: &str, r: &biharmonic_core::fd::SignReport| {
        format!(
            "{name} h={:.4} {} unknowns {} min {:.2e} neg {:.4}",
            r.h, r.unknowns, r.mode, r.min, r.negative_fraction
        )
    };
    let budget = [&sq, &thin, &round].iter().all(|r| r.unknowns <= 4096);
    ensure(
        budget && sq.min < 0.0 && thin.min < 0.0 && round.negative_fraction == 0.0 && round_fine.negative_fraction == 0.0,
        [
            line("square", &sq),
            line("ellipse(1,0.5)", &thin),
            line("ellipse(1,0.95)", &round),
            line("ellipse(1,0.95)", &round_fine),
        ]
        .join("; "),
    )
}

pub fn eigenvalues() -> Outcome {
    let sq = Domain::rectangle(1.0, 1.0).map_err(err)?;
    let l = [16.0, 32.0, 64.0]
        .iter()
        .map(|&m| eigenpair(&sq, 1.0 / m, 0).map(|e| e.lambda))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(err)?;
    let sq_err = l[2] / (2.0 * PI * PI) - 1.0;
    let order = ((l[1] - l[0]) / (l[2] - l[1])).log2();
    let j = first_bessel_zero(0.0);
    let d = radial_eigenpair::<f64>(2, 1.0 / 64.0).map_err(err)?.lambda;
    let d_err = d / (j * j) - 1.0;
    ensure(
        sq_err.abs() < 5e-3 && (order - 2.0).abs() < 0.2 && d_err.abs() < 5e-3,
        format!("square rel err {sq_err:.2e} at h=1/64, Richardson order {order:.3}; disk (radial FV, h=1/64) rel err {d_err:.2e} vs j0,1^2 = {:.6}", j * j),
    )
}

pub fn bracket() -> Outcome {
    let mut out = Vec::new();
    let mut ok = true;
    for alpha in ALPHAS {
        let s = disk(alpha, 512)?;
        let b = s.bracket();
        let mut viol = 0usize;
        let mut min_v = f64::INFINITY;
        for start in [Start::Midpoint, Start::Lower, Start::Upper] {
            let sol = s.solve(start).map_err(err)?;
            viol += sol
                .iteration
                .bracket_trace
                .iter()
                .filter(|[lo, hi]| *lo < b.v1 * (1.0 - 1e-12) || *hi > b.v2 * (1.0 + 1e-12))
                .count();
            min_v = min_v.min(sol.v().iter().copied().fold(f64::INFINITY, f64::min));
        }
        ok &= viol == 0 && min_v >= b.epsilon;
        out.push(format!("α={alpha}: {viol} violations, min v {min_v:.3e} ≥ ε {:.3e}", b.epsilon));
    }
    ensure(ok, out.join("; "))
}

pub fn fixed_point() -> Outcome {
    let mut out = Vec::new();
    let mut ok = true;
    for alpha in ALPHAS {
        let sol = disk(alpha, 512)?.solve(Start::Midpoint).map_err(err)?;
        ok &= sol.residual <= 1e-4;
        out.push(format!("α={alpha} residual {:.2e}", sol.residual));
    }
    let mut worst: f64 = 0.0;
    for (c, alpha) in [(0.5f64, 0.3f64), (2.0, 0.5), (7.0, 0.9)] {
        let op = NystromOperator::constant(c, 16).map_err(err)?;
        let m = estimate_m(&[c]).map_err(err)?;
        let b = Bracket::new(m, choose_epsilon(m, alpha).map_err(err)?, alpha).map_err(err)?;
        let mut cfg = Config::with_alpha(alpha).map_err(err)?;
        cfg.tolerance = 1e-15;
        let it = iterate(&op, &b, &cfg, Start::Upper).map_err(err)?;
        let want = c.powf(1.0 / (1.0 + alpha));
        worst = it.v.iter().fold(worst, |w, v| w.max((v - want).abs() / want));
    }
    ok &= worst <= 1e-10;
    out.push(format!("constant kernel rel err {worst:.1e}"));
    ensure(ok, out.join("; "))
}

pub fn boundary_rate() -> Outcome {
    let mut out = Vec::new();
    let mut ok = true;
    for alpha in ALPHAS {
        let c = disk(alpha, 512)?.solve(Start::Midpoint).map_err(err)?;
        let f = disk(alpha, 1024)?.solve(Start::Midpoint).map_err(err)?;
        let coarse = fit_boundary_rate(&c.u, &c.delta(), (0.0, 0.1)).map_err(err)?;
        let fine = fit_boundary_rate(&f.u, &f.delta(), (0.0, 0.05)).map_err(err)?;
        let (s0, s1) = (coarse.spread(), fine.spread());
        let r = compare_rates(coarse, fine);
        ok &= r.verdict == Verdict::Pass;
        out.push(format!("α={alpha}: c2/c1 {s0:.4} -> {s1:.4}, change {:.1}%", 100.0 * r.statistic));
    }
    ensure(ok, out.join("; "))
}

pub fn uniqueness() -> Outcome {
    let mut out = Vec::new();
    let mut ok = true;
    for alpha in ALPHAS {
        let s = disk(alpha, 512)?;
        let lo = s.solve(Start::Lower).map_err(err)?;
        let hi = s.solve(Start::Upper).map_err(err)?;
        let a = uniqueness_certificate(&lo.u, &hi.u).map_err(err)?;
        let u2: Vec<f64> = lo.u.iter().map(|u| 2.0 * u).collect();
        let c = contraction_round(|u: &[f64]| s.solution_operator(u), alpha, &lo.u, &u2, 1e-12).map_err(err)?;
        let rel = c.after / c.bound - 1.0;
        ok &= a - 1.0 <= 1e-5 && rel.abs() <= 0.01;
        out.push(format!("α={alpha}: A*-1 {:.1e}, after/2^(α²) - 1 = {rel:.1e}", a - 1.0));
    }
    ensure(ok, out.join("; "))
}

pub fn bound_stability() -> Outcome {
    let mut out = Vec::new();
    let mut ok = true;
    for (n, k, case) in [
        (5, 0, BoundCase::Ii1),
        (2, 0, BoundCase::Ii4),
        (3, 0, BoundCase::Ii4),
        (2, 1, BoundCase::Ii3),
    ] {
        let spec = BoundSpec::new(n, k, case).map_err(err)?;
        let r = check_green_bound(&spec, &Boggio::new(n).map_err(err)?, 10_000, 7).map_err(err)?;
        ok &= r.verdict == Verdict::Pass;
        out.push(format!("{case:?} n={n} |k|={k}: c {:.4e}, growth {:.2}%", r.statistic, 100.0 * r.growth));
    }
    ensure(ok, out.join("; "))
}

pub fn regularity() -> Outcome {
    let mut exps = Vec::new();
    for alpha in [0.25, 0.75] {
        let levels = [256usize, 512, 1024]
            .iter()
            .map(|&m| {
                let sol = disk(alpha, m)?.solve(Start::Midpoint).map_err(err)?;
                Ok(RadialLevel { h: 1.0 / m as f64, u: sol.u })
            })
            .collect::<Result<Vec<_>, String>>()?;
        exps.push(regularity_probe(&levels, alpha).map_err(err)?.exponent_d3);
    }
    ensure(
        exps[0] > exps[1],
        format!("third-difference exponent {:.3} at α=0.25 vs {:.3} at α=0.75", exps[0], exps[1]),
    )
}

pub fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(err)?;
    let out = |name: &str, rep: usize| tmp.path().join(format!("{name}{rep}"));
    let mut found = Vec::new();
    let mut ok = true;
    for name in ["solve", "probe-green", "verify"] {
        let mut bytes = Vec::new();
        for rep in 0..2 {
            let dir = out(name, rep);
            let file = match name {
                "solve" => {
                    commands::solve(&SolveOptions {
                        config: None,
                        domain: None,
                        alpha: Some(0.5),
                        out: dir.clone(),
                    })
                    .map_err(err)?;
                    "report.json"
                }
                "probe-green" => {
                    commands::probe_green(&ProbeOptions {
                        domain: r#"{"kind":"ellipse","a":1,"b":0.5}"#.into(),
                        h: Some(0.05),
                        dense: false,
                        columns: 50,
                        seed: 3,
                        out: dir.clone(),
                    })
                    .map_err(err)?;
                    "sign_report.json"
                }
                _ => {
                    verify(&VerifyOptions {
                        suite: "bounds".into(),
                        fixture: None,
                        seed: 7,
                        pairs: 2000,
                        out: dir.clone(),
                    })
                    .map_err(err)?;
                    "verify.json"
                }
            };
            bytes.push(std::fs::read(Path::new(&dir).join(file)).map_err(err)?);
        }
        let same = bytes[0] == bytes[1];
        ok &= same;
        found.push(format!("{name} {} bytes {}", bytes[0].len(), if same { "identical" } else { "DIFFER" }));
    }
    ensure(ok, found.join("; "))
}

/// A named criterion.
pub type Criterion = (&'static str, fn() -> Outcome);

/// The criteria in order.
pub const CRITERIA: [Criterion; 11] = [
    ("boggio kernel exactness", kernel_exactness),
    ("ball positivity", ball_positivity),
    ("sign counterexamples", sign_counterexamples),
    ("eigenpair accuracy", eigenvalues),
    ("bracket invariance", bracket),
    ("fixed-point residual", fixed_point),
    ("boundary rate stability", boundary_rate),
    ("uniqueness", uniqueness),
    ("kernel bound stability", bound_stability),
    ("regularity ordering", regularity),
    ("cli determinism", determinism),
];
