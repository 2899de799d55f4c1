//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{params_strategy, rel_err, table51};
use mestim::cli::report::{build_report, render_text};
use mestim::estimators::{evaluate, SampleSummary};
use mestim::montecarlo::{run_simulation, PopulationModel, SimulationConfig, SimulationResult, WeightPolicy};
use mestim::theory::{
    analyze, analyze_t1, analyze_t2, analyze_weighted, build_quadratic, mse_at_weights, optimize_weights,
    grover_kaur_printed_weights, regression_closed_form, WeightQuadratic, PRINTED_TP_MIN_MSE,
};
use mestim::{derive_moments, EstimatorId, PopulationParams, TpMode, WeightPair};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

/// Reproduction of printed table values.
const TABLE_REL: f64 = 2.5e-3;
/// Ratio-estimator row, which the printed table matches closely.
const T1_REL: f64 = 5e-4;
/// Internal identities.
const IDENTITY_REL: f64 = 1e-12;
const MC_REPS: u64 = 100_000;
const SEED: u64 = 20_240_501;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(name: &str, got: f64, printed: f64, tol: f64) -> Result<(), String> {
    let r = rel_err(got, printed);
    check(r <= tol, format!("{name}: {got:.6} vs printed {printed} (rel {r:.2e} > {tol:.1e})"))
}

/// Collects every failing sub-check instead of stopping at the first.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn add(&mut self, r: Result<(), String>) {
        if let Err(e) = r {
            self.failures.push(e);
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self) -> Outcome {
        if self.failures.is_empty() {
            Ok(self.notes.join("; "))
        } else {
            Err(self.failures.join("; "))
        }
    }
}

fn c1_mean_row() -> Outcome {
    let p = table51();
    let r = analyze(EstimatorId::Mean, &p, TpMode::Corrected).map_err(|e| e.to_string())?;
    let mut c = Checks::default();
    for (name, got, want) in [
        ("mse_error_free", r.mse_error_free, 127.8),
        ("me_contribution", r.me_contribution, 3.6),
        ("mse_total", r.mse_total, 131.4),
        ("pre", r.pre.unwrap_or(f64::NAN), 100.0),
    ] {
        c.add(check((got - want).abs() <= 1e-9, format!("{name}: {got} vs {want}")));
    }
    c.add(check(
        (derive_moments(&p).unwrap().v_ym - 131.4).abs() <= 1e-9,
        "v_ym differs from 131.4",
    ));
    c.note(format!("{:.3} / {:.3} / {:.3} / {:.3}", r.mse_error_free, r.me_contribution, r.mse_total, r.pre.unwrap()));
    c.finish()
}

fn c2_t1_row() -> Outcome {
    let r = analyze_t1(&table51()).map_err(|e| e.to_string())?;
    let mut c = Checks::default();
    c.add(within("mse_error_free", r.mse_error_free, 16.181, T1_REL));
    c.add(within("me_contribution", r.me_contribution, 5.609, T1_REL));
    c.add(within("mse_total", r.mse_total, 21.790, T1_REL));
    c.add(within("pre", r.pre.unwrap_or(f64::NAN), 603.011, T1_REL));
    c.note(format!("{:.4} / {:.4} / {:.4} / {:.4}", r.mse_error_free, r.me_contribution, r.mse_total, r.pre.unwrap()));
    c.finish()
}

fn c3_t2_row() -> Outcome {
    let r = analyze_t2(&table51()).map_err(|e| e.to_string())?;
    let mut c = Checks::default();
    c.add(within("mse_total", r.mse_total, 30.027, TABLE_REL));
    c.add(within("pre", r.pre.unwrap_or(f64::NAN), 437.596, TABLE_REL));
    c.note(format!("total {:.4}, pre {:.3}", r.mse_total, r.pre.unwrap()));
    c.finish()
}

fn c4_t3_row() -> Outcome {
    let p = table51();
    let r = analyze_weighted(EstimatorId::T3, &p, TpMode::Corrected).map_err(|e| e.to_string())?;
    let mut c = Checks::default();
    c.add(within("mse_error_free", r.mse_error_free, 9.000, TABLE_REL));
    c.add(within("mse_total", r.mse_total, 13.882, TABLE_REL));
    c.add(within("pre", r.pre.unwrap_or(f64::NAN), 946.540, TABLE_REL));

    let opt = optimize_weights(&build_quadratic(EstimatorId::T3, &p, TpMode::Corrected).unwrap()).unwrap();
    let (closed_w, closed_min) = regression_closed_form(&p).unwrap();
    c.add(check(rel_err(opt.weights.w1, closed_w.w1) <= IDENTITY_REL, "w1 differs from closed form"));
    c.add(check(rel_err(opt.weights.w2, closed_w.w2) <= IDENTITY_REL, "w2 differs from closed form"));
    c.add(check(rel_err(opt.min_mse, closed_min) <= IDENTITY_REL, "minimum differs from closed form"));
    c.note(format!(
        "{:.4} / {:.4} / {:.3}; closed-form agreement ok",
        r.mse_error_free, r.mse_total, r.pre.unwrap()
    ));
    c.finish()
}

fn c5_t4_row() -> Outcome {
    let p = table51();
    let r = analyze_weighted(EstimatorId::T4, &p, TpMode::Corrected).map_err(|e| e.to_string())?;
    let mut c = Checks::default();
    c.add(within("mse_total", r.mse_total, 13.904, TABLE_REL));
    let q = build_quadratic(EstimatorId::T4, &p, TpMode::Corrected).unwrap();
    let printed = grover_kaur_printed_weights(&p).unwrap();
    let at_printed = mse_at_weights(&q, printed);
    c.add(check(
        at_printed > 100.0 && rel_err(at_printed, 13.904) > TABLE_REL,
        format!("published weights reproduce the table: {at_printed}"),
    ));
    c.note(format!("total {:.4}; published weights give {:.1}", r.mse_total, at_printed));
    c.finish()
}

fn coefficients(q: &WeightQuadratic) -> [f64; 5] {
    [q.c0, q.c11, q.c22, q.c12, q.c1]
}

fn c6_tp_errata() -> Outcome {
    let p = table51();
    let mut c = Checks::default();

    let corrected = build_quadratic(EstimatorId::Tp, &p, TpMode::Corrected).unwrap();
    let t4 = build_quadratic(EstimatorId::T4, &p, TpMode::Corrected).unwrap();
    for (a, b) in coefficients(&corrected).iter().zip(coefficients(&t4)) {
        c.add(check(rel_err(*a, b) <= IDENTITY_REL, format!("(a) coefficient {a} vs {b}")));
    }
    let min_tp = optimize_weights(&corrected).unwrap().min_mse;
    let min_t4 = optimize_weights(&t4).unwrap().min_mse;
    c.add(check(rel_err(min_tp, min_t4) <= IDENTITY_REL, "(a) minima differ"));

    let printed = optimize_weights(&build_quadratic(EstimatorId::Tp, &p, TpMode::AsPrinted).unwrap()).unwrap();
    c.add(check(
        !printed.hessian_pd,
        format!(
            "(b) as-printed quadratic reports hessian_pd = true (4 c11 c22 - c12^2 = {:.6e} > 0, c11 > 0)",
            build_quadratic(EstimatorId::Tp, &p, TpMode::AsPrinted).unwrap().discriminant()
        ),
    ));
    c.add(check(printed.min_mse < 0.0, format!("(b) stationary value {} is not negative", printed.min_mse)));

    let text = render_text(&build_report(&p, TpMode::Corrected, None).unwrap());
    for needle in [
        format!("{PRINTED_TP_MIN_MSE:.3}"),
        format!("{min_tp:.3}"),
        format!("{:.3}", printed.min_mse),
    ] {
        c.add(check(text.contains(&needle), format!("(c) footnote lacks {needle}")));
    }
    c.note(format!(
        "corrected min {min_tp:.3} = t4; as-printed stationary {:.3}, hessian_pd {}, admissible {}",
        printed.min_mse, printed.hessian_pd, printed.admissible
    ));
    c.finish()
}

fn simulate(p: PopulationParams, id: EstimatorId, weights: Option<WeightPolicy>) -> Result<(SimulationResult, Duration), String> {
    let model = PopulationModel::new(p).map_err(|e| e.to_string())?;
    let mut config = SimulationConfig::new(id, MC_REPS, SEED);
    if let Some(w) = weights {
        config = config.with_weights(w);
    }
    let start = Instant::now();
    let r = run_simulation(&model, &config).map_err(|e| e.to_string())?;
    Ok((r, start.elapsed()))
}

fn c7_mc_mean() -> Outcome {
    let (r, took) = simulate(table51(), EstimatorId::Mean, None)?;
    let z = (r.empirical_mse - 131.4) / r.mc_standard_error_of_mse;
    let mut c = Checks::default();
    c.add(check(z.abs() <= 3.0, format!("z = {z:.2}")));
    c.add(check(took < Duration::from_secs(10), format!("took {took:?}")));
    c.note(format!("empirical {:.3} +- {:.3}, z = {z:.2}, {took:.2?}", r.empirical_mse, r.mc_standard_error_of_mse));
    c.finish()
}

fn c8_mc_first_order() -> Outcome {
    let p = table51().with_n(200);
    let mut c = Checks::default();
    let start = Instant::now();
    for id in [EstimatorId::T1, EstimatorId::T2] {
        let theory = analyze(id, &p, TpMode::Corrected).unwrap().mse_total;
        let (r, _) = simulate(p, id, None)?;
        let band = (3.0 * r.mc_standard_error_of_mse).max(0.02 * theory);
        let diff = r.empirical_mse - theory;
        c.add(check(diff.abs() <= band, format!("{id}: empirical {:.5} vs theory {theory:.5}", r.empirical_mse)));
        c.note(format!("{id} {:.4} vs {theory:.4} (z {:.2})", r.empirical_mse, diff / r.mc_standard_error_of_mse));
    }
    let took = start.elapsed();
    c.add(check(took < Duration::from_secs(60), format!("took {took:?}")));
    c.finish()
}

fn c9_mc_adjudication() -> Outcome {
    let p = table51().with_n(200);
    let t4_form = optimize_weights(&build_quadratic(EstimatorId::Tp, &p, TpMode::Corrected).unwrap())
        .unwrap()
        .min_mse;
    let (r, _) = simulate(p, EstimatorId::Tp, Some(WeightPolicy::OracleOptimal(TpMode::Corrected)))?;
    let se = r.mc_standard_error_of_mse;
    let claim = PRINTED_TP_MIN_MSE * 10.0 / 200.0;
    let z_theory = (r.empirical_mse - t4_form) / se;
    let z_claim = (r.empirical_mse - claim) / se;
    let mut c = Checks::default();
    c.add(check(
        z_theory.abs() <= 3.0,
        format!("empirical {:.5} vs t4-form minimum {t4_form:.5}: z = {z_theory:.2}", r.empirical_mse),
    ));
    c.add(check(z_claim.abs() >= 5.0, format!("within 5 SE of published claim {claim:.5}: z = {z_claim:.2}")));
    c.note(format!(
        "empirical {:.5} +- {se:.5}; z vs t4-form {z_theory:.2}; z vs published {z_claim:.2}",
        r.empirical_mse
    ));
    c.finish()
}

fn run_property<F>(name: &str, cases: u32, f: F) -> Result<(), String>
where
    F: Fn(PopulationParams, &mut TestRng) -> Result<(), String>,
{
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = params_strategy();
    for _ in 0..cases {
        let p = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        f(p, runner.rng()).map_err(|e| format!("{name}: {e} at {p:?}"))?;
    }
    Ok(())
}

fn c10_properties() -> Outcome {
    use proptest::prelude::RngExt;
    const CASES: u32 = 1000;
    let mut c = Checks::default();

    c.add(run_property("identity reductions", CASES, |p, rng| {
        let ybar = rng.random_range(-1000.0..1000.0);
        let w = WeightPair { w1: rng.random_range(-2.0..2.0), w2: rng.random_range(-2.0..2.0) };
        let s = SampleSummary::new(ybar, p.mu_x, p.n);
        let at = |id| evaluate(id, &s, p.mu_x, Some(w)).unwrap();
        check(rel_err(at(EstimatorId::T1), ybar) <= 2.0 * f64::EPSILON, "ratio")?;
        check(at(EstimatorId::T2) == ybar, "exponential ratio")?;
        check(at(EstimatorId::T3) == w.w1 * ybar, "regression")?;
        check(at(EstimatorId::T4) == w.w1 * ybar, "grover-kaur")?;
        check(at(EstimatorId::Tp) == w.w1 * ybar, "proposed")
    }));

    c.add(run_property("decomposition additivity", CASES, |p, _| {
        for id in EstimatorId::ALL {
            let r = analyze(id, &p, TpMode::Corrected).map_err(|e| e.to_string())?;
            check(r.mse_total == r.mse_error_free + r.me_contribution, format!("{id} not additive"))?;
        }
        let v = p.sigma2_y / p.n as f64 * (1.0 - p.rho * p.rho);
        let mu2 = p.mu_y * p.mu_y;
        let classic = mu2 * v / (mu2 + v);
        for id in [EstimatorId::T3, EstimatorId::T4, EstimatorId::Tp] {
            let free = analyze(id, &p, TpMode::Corrected).unwrap().mse_error_free;
            check(
                (free - classic).abs() <= 1e-12 * mu2 + 1e-9 * classic,
                format!("{id} error-free {free} vs classic optimum {classic}"),
            )?;
        }
        Ok(())
    }));

    let families = [
        (EstimatorId::T3, TpMode::Corrected),
        (EstimatorId::T4, TpMode::Corrected),
        (EstimatorId::Tp, TpMode::Corrected),
        (EstimatorId::Tp, TpMode::AsPrinted),
    ];

    c.add(run_property("optimizer beats 100 random weight pairs", CASES, |p, rng| {
        for (id, mode) in families {
            let q = build_quadratic(id, &p, mode).unwrap();
            let opt = optimize_weights(&q).map_err(|e| e.to_string())?;
            if !opt.hessian_pd {
                continue;
            }
            for _ in 0..100 {
                let w = WeightPair { w1: rng.random_range(-2.0..2.0), w2: rng.random_range(-2.0..2.0) };
                let f = mse_at_weights(&q, w);
                check(opt.min_mse <= f + 1e-12 * q.magnitude(w), format!("{id}: {} > {f} at {w:?}", opt.min_mse))?;
            }
        }
        Ok(())
    }));

    c.add(run_property("finite-difference stationarity", CASES, |p, _| {
        for (id, mode) in families {
            let q = build_quadratic(id, &p, mode).unwrap();
            let w = optimize_weights(&q).map_err(|e| e.to_string())?.weights;
            let scale = q.magnitude(w);
            let h1 = 1e-6 * (1.0 + w.w1.abs());
            let h2 = 1e-6 * (1.0 + w.w2.abs());
            let g1 = (mse_at_weights(&q, WeightPair { w1: w.w1 + h1, ..w })
                - mse_at_weights(&q, WeightPair { w1: w.w1 - h1, ..w }))
                / (2.0 * h1);
            let g2 = (mse_at_weights(&q, WeightPair { w2: w.w2 + h2, ..w })
                - mse_at_weights(&q, WeightPair { w2: w.w2 - h2, ..w }))
                / (2.0 * h2);
            check(
                g1.abs() * (1.0 + w.w1.abs()) <= 1e-6 * scale && g2.abs() * (1.0 + w.w2.abs()) <= 1e-6 * scale,
                format!("{id}/{mode}: gradient ({g1:e}, {g2:e}) at scale {scale:e}"),
            )?;
        }
        Ok(())
    }));

    c.add(run_property("determinism across worker counts", CASES, |p, rng| {
        let model = PopulationModel::new(p).map_err(|e| e.to_string())?;
        let id = EstimatorId::ALL[rng.random_range(0..EstimatorId::ALL.len())];
        let config = SimulationConfig::new(id, 48, rng.random());
        let one = run_simulation(&model, &config.with_workers(1));
        let many = run_simulation(&model, &config.with_workers(4));
        check(one == many, format!("{id}: {one:?} vs {many:?}"))
    }));

    c.note(format!("5 suites x {CASES} parameter sets"));
    c.finish()
}

fn c11_cli() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let out = Command::new(env!("CARGO_BIN_EXE_mestim"))
        .args(["analyze", "--params"])
        .arg(dir.join("table51.params"))
        .args(["--format", "csv"])
        .output()
        .map_err(|e| e.to_string())?;
    let mut c = Checks::default();
    c.add(check(out.status.code() == Some(0), format!("exit status {:?}", out.status.code())));
    let csv = String::from_utf8_lossy(&out.stdout).into_owned();
    let golden = std::fs::read_to_string(dir.join("table51.golden.csv")).map_err(|e| e.to_string())?;
    c.add(check(csv == golden, "output differs from golden csv"));

    let rows: Vec<Vec<String>> = csv.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect();
    let cell = |id: &str, col: usize| -> f64 {
        rows.iter().find(|r| r[0] == id).and_then(|r| r[col].parse().ok()).unwrap_or(f64::NAN)
    };
    // columns: 1 error-free, 2 contribution, 3 total, 4 pre
    let expected: [(&str, usize, f64, f64); 13] = [
        ("mean", 1, 127.800, 1e-9),
        ("mean", 2, 3.600, 1e-9),
        ("mean", 3, 131.400, 1e-9),
        ("mean", 4, 100.0, 1e-9),
        ("t1", 1, 16.181, T1_REL),
        ("t1", 2, 5.609, T1_REL),
        ("t1", 3, 21.790, T1_REL),
        ("t1", 4, 603.011, T1_REL),
        ("t2", 3, 30.027, TABLE_REL),
        ("t2", 4, 437.596, TABLE_REL),
        ("t3", 1, 9.000, TABLE_REL),
        ("t3", 3, 13.882, TABLE_REL),
        ("t4", 3, 13.904, TABLE_REL),
    ];
    for (id, col, printed, tol) in expected {
        c.add(within(&format!("{id} column {col}"), cell(id, col), printed, tol));
    }
    c.add(within("t3 column 4", cell("t3", 4), 946.540, TABLE_REL));
    c.note("golden csv reproduced, exit 0");
    c.finish()
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("C1", "Table row ybar", c1_mean_row),
        ("C2", "Table row t1", c2_t1_row),
        ("C3", "Table row t2", c3_t2_row),
        ("C4", "Table row t3 + closed forms", c4_t3_row),
        ("C5", "Table row t4 + transposed weights", c5_t4_row),
        ("C6", "tp errata properties", c6_tp_errata),
        ("C7", "Monte Carlo exact check (mean)", c7_mc_mean),
        ("C8", "Monte Carlo first-order check (t1, t2, n=200)", c8_mc_first_order),
        ("C9", "Monte Carlo adjudication (tp, n=200)", c9_mc_adjudication),
        ("C10", "Property suites", c10_properties),
        ("C11", "CLI end-to-end golden csv", c11_cli),
    ];
    let mut failed = 0;
    for (tag, title, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("[PASS] {tag} {title} ({took:.2?}) {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {tag} {title} ({took:.2?}) {why}");
            }
        }
    }
    println!("\nacceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
