//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use piv_cli::commands::{
    bound_report, replicate, replication_report, simulation_beliefs, simulation_check,
    simulation_null_belief,
};
use piv_cli::config::{builtin_config, BELIEF_1, BELIEF_1_VARIANT, BELIEF_2, MINUS_SEVEN};
use piv_core::fixtures::retention_stats;
use piv_core::ideal::{control_saturation, treated_saturation};
use piv_core::oracle::{run_deterministic_checks, EQUIVALENCE_TOLERANCE};
use piv_core::{
    ideal_correlation, piv, probit_piv, CounterfactualBelief, EstimateSign, ObservedStats,
    Threshold,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Result<Outcome, String> {
    Ok(Outcome { passed, detail })
}

fn published_bound(belief: &str, target: f64) -> Result<Outcome, String> {
    let report = bound_report(&builtin_config(), belief).map_err(|e| e.to_string())?;
    let got = report.bound.piv_min;
    check(
        (got - target).abs() <= 0.005,
        format!(
            "lower bound {got:.6} at ({:.4}, {:.4}), target {target} ± 0.005",
            report.bound.argmin.y_t_un, report.bound.argmin.y_c_un
        ),
    )
}

/// T-ratio written out from the ideal-sample moments, sharing no code with the engine.
fn independent_t_ratio(b: &CounterfactualBelief, s: &ObservedStats) -> f64 {
    let p = s.pi;
    let treated = (1.0 - p) * b.y_t_un + p * s.y_t_ob;
    let control = p * b.y_c_un + (1.0 - p) * s.y_c_ob;
    let gap = treated - control;
    let spread = 0.5 * s.var_t
        + 0.5 * s.var_c
        + 0.5 * p * (1.0 - p) * ((b.y_t_un - s.y_t_ob).powi(2) + (b.y_c_un - s.y_c_ob).powi(2))
        + 0.25 * gap * gap;
    let r = 0.5 * gap / spread.sqrt();
    r / ((1.0 - s.r_squared) / (2.0 * s.n_ob as f64)).sqrt()
}

fn probit_identity() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    let mut worst_rebuilt: f64 = 0.0;
    for _ in 0..1000 {
        let stats = ObservedStats::new(
            rng.gen_range(0.0..0.95),
            rng.gen_range(10..100_000),
            rng.gen_range(-100.0..100.0),
            rng.gen_range(-100.0..100.0),
            rng.gen_range(0.1..500.0),
            rng.gen_range(0.1..500.0),
            rng.gen_range(0.01..0.99),
        )
        .map_err(|e| e.to_string())?;
        let belief = CounterfactualBelief {
            y_t_un: rng.gen_range(-200.0..200.0),
            y_c_un: rng.gen_range(-200.0..200.0),
        };
        let sign = if rng.gen_bool(0.5) {
            EstimateSign::Positive
        } else {
            EstimateSign::Negative
        };
        let threshold = Threshold::Statistical {
            critical_magnitude: rng.gen_range(0.5..3.5),
        };
        let result = piv(&belief, &stats, sign, &threshold).map_err(|e| e.to_string())?;
        let c = threshold
            .signed_critical(sign)
            .expect("statistical threshold");
        let expected = match sign {
            EstimateSign::Positive => result.t_ratio - c,
            EstimateSign::Negative => c - result.t_ratio,
        };
        let direct = probit_piv(&belief, &stats, sign, &threshold).map_err(|e| e.to_string())?;
        worst = worst
            .max((result.probit_piv - expected).abs())
            .max((direct - expected).abs());

        let t = independent_t_ratio(&belief, &stats);
        let rebuilt = match sign {
            EstimateSign::Positive => t - c,
            EstimateSign::Negative => c - t,
        };
        worst_rebuilt =
            worst_rebuilt.max((result.probit_piv - rebuilt).abs() / rebuilt.abs().max(1.0));
    }
    check(
        worst <= 1e-12 && worst_rebuilt <= 1e-12,
        format!(
            "1000 tuples, max |probit - (T - C)| = {worst:.3e}, against T rebuilt from the means {worst_rebuilt:.3e} relative (tolerance 1e-12)"
        ),
    )
}

fn oracle_equivalence() -> Result<Outcome, String> {
    let report = run_deterministic_checks(0..128).map_err(|e| e.to_string())?;
    let passed = report.max_equivalence_error <= EQUIVALENCE_TOLERANCE
        && report.max_block_inverse_error <= 1e-9
        && report.max_bayes_error <= 1e-9;
    check(
        passed,
        format!(
            "{} datasets, equivalence {:.2e}, block inverse {:.2e}, combination {:.2e}",
            report.specs,
            report.max_equivalence_error,
            report.max_block_inverse_error,
            report.max_bayes_error
        ),
    )
}

fn monte_carlo() -> Result<Outcome, String> {
    let reps = 10_000;
    let mut lines = Vec::new();
    let mut passed = true;
    let null = simulation_check(
        "null",
        simulation_null_belief().map_err(|e| e.to_string())?,
        reps,
        11,
        true,
    )
    .map_err(|e| e.to_string())?;
    passed &= null.passed;
    lines.push(format!(
        "size {:.4} vs {:.4}",
        null.simulated, null.closed_form
    ));
    for (i, (label, belief)) in simulation_beliefs().into_iter().enumerate() {
        let c = simulation_check(label, belief, reps, 12 + i as u64, false)
            .map_err(|e| e.to_string())?;
        passed &= c.passed;
        lines.push(format!("{:.3}/{:.3}", c.simulated, c.closed_form));
    }
    check(
        passed,
        format!("n_ob 2000, 10^4 reps: {}", lines.join(", ")),
    )
}

fn saturation() -> Result<Outcome, String> {
    let stats = retention_stats();
    let (lt, lc) = (treated_saturation(&stats), control_saturation(&stats));
    let at = |t, c| {
        ideal_correlation(
            &CounterfactualBelief {
                y_t_un: t,
                y_c_un: c,
            },
            &stats,
        )
    };
    let m = stats.y_c_ob;
    let gaps = [
        (at(1e6, m).map_err(|e| e.to_string())? - lt).abs(),
        (at(-1e6, m).map_err(|e| e.to_string())? + lt).abs(),
        (at(m, 1e6).map_err(|e| e.to_string())? + lc).abs(),
        (at(m, -1e6).map_err(|e| e.to_string())? - lc).abs(),
    ];
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    check(
        worst <= 1e-4,
        format!("limits {lt:.6} / {lc:.6}, max gap {worst:.2e} (tolerance 1e-4)"),
    )
}

fn prefactor() -> Result<Outcome, String> {
    let report = replication_report().map_err(|e| e.to_string())?;
    let out = std::env::temp_dir().join(format!("piv-acceptance-{}.csv", std::process::id()));
    let text = replicate(&out, None).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_file(&out);
    let p = &report.prefactor;
    let reported = text.contains("prefactor check PASS") && text.contains("109.25");
    check(
        p.passes() && reported && (p.piv_printed - 0.92).abs() > 0.2,
        format!(
            "k = {:.2} gives {:.4}; printed {} gives {:.4}",
            p.derived, p.piv_derived, p.printed, p.piv_printed
        ),
    )
}

type Criterion = (
    &'static str,
    Duration,
    Box<dyn Fn() -> Result<Outcome, String>>,
);

fn main() -> ExitCode {
    let second = Duration::from_secs(1);
    let criteria: Vec<Criterion> = vec![
        (
            "belief 1 bound",
            second,
            Box::new(|| published_bound(BELIEF_1, 0.92)),
        ),
        (
            "belief 1 variant bound",
            second,
            Box::new(|| published_bound(BELIEF_1_VARIANT, 0.82)),
        ),
        (
            "belief 2 bound",
            second,
            Box::new(|| published_bound(BELIEF_2, 0.936)),
        ),
        (
            "-7 anchor bound",
            second,
            Box::new(|| published_bound(MINUS_SEVEN, 0.795)),
        ),
        ("probit identity", Duration::MAX, Box::new(probit_identity)),
        (
            "least-squares equivalence",
            Duration::from_secs(30),
            Box::new(oracle_equivalence),
        ),
        (
            "simulated power",
            Duration::from_secs(60),
            Box::new(monte_carlo),
        ),
        (
            "correlation saturation",
            Duration::MAX,
            Box::new(saturation),
        ),
        ("prefactor resolution", Duration::MAX, Box::new(prefactor)),
    ];

    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(o) => (o.passed && elapsed <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget_note = if *budget == Duration::MAX {
            String::new()
        } else {
            format!(", budget {:.0?}", budget)
        };
        println!(
            "criterion {} {:<26} {}  {} [{:.3?}{}]",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            detail,
            elapsed,
            budget_note
        );
        failures += usize::from(!passed);
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
