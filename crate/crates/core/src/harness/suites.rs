//! Named verification suites, each a list of pass/fail checks.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{
    check_balls_in_bins, exhaustive_optimality, random_optimality, run_monte_carlo, Algorithm, Assertion, BinsSpec, Check,
    ExperimentSpec, OptimalityReport,
};
use crate::error::{Error, Result};
use crate::online::OnlineMode;
use crate::params::Efficiency;

pub const T1_EXHAUSTIVE_PERIOD: usize = 8;
pub const T1_RANDOM_PERIOD: usize = 12;
pub const T1_DEFAULT_TRIALS: usize = 500;
pub const MC_PERIOD: usize = 1000;
pub const MC_DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    T1,
    T2,
    T4,
    Bins,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::T1 => "t1",
            Suite::T2 => "t2",
            Suite::T4 => "t4",
            Suite::Bins => "bins",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::T1, Suite::T2, Suite::T4, Suite::Bins, Suite::All]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::parameter("suite", format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    /// One resolved-configuration line per sub-suite.
    pub config: Vec<String>,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn optimality_check(r: &OptimalityReport) -> Check {
    let mut detail = format!("offline equals oracle (sync, async) in {}/{} instances", r.agreements, r.instances);
    if let Some(m) = r.mismatches.first() {
        detail += &format!("; first mismatch A={:?} B={:?} offline={:?} oracle={:?}", m.set_a, m.set_b, m.offline, m.oracle);
    }
    Check {
        name: format!("optimality[{}]", r.label),
        passed: r.passed(),
        observed: r.agreements as f64,
        threshold: r.instances as f64,
        detail,
    }
}

fn t1(trials: usize, seed: u64, report: &mut SuiteReport) -> Result<()> {
    let eta = Efficiency::DEFAULT;
    let p_values: Vec<f64> = (2..=9).map(|k| k as f64 / 10.0).collect();
    report.config.push(format!(
        "t1: exhaustive |T|<={T1_EXHAUSTIVE_PERIOD}; random |T|={T1_RANDOM_PERIOD} instances={trials} p={p_values:?} eta={eta} seed={seed}"
    ));
    report.checks.push(optimality_check(&exhaustive_optimality(T1_EXHAUSTIVE_PERIOD, eta)?));
    report.checks.push(optimality_check(&random_optimality(T1_RANDOM_PERIOD, &p_values, trials, eta, seed)?));
    Ok(())
}

fn monte_carlo(
    name: &str,
    p_values: Vec<f64>,
    algorithms: Vec<Algorithm>,
    assertions: Vec<Assertion>,
    trials: usize,
    seed: u64,
    report: &mut SuiteReport,
) -> Result<()> {
    let spec = ExperimentSpec {
        period_len: MC_PERIOD,
        p_values,
        eta: Efficiency::DEFAULT,
        trials,
        seed,
        modes: OnlineMode::ALL.to_vec(),
        algorithms,
        assertions,
    };
    report.config.push(format!(
        "{name}: |T|={} p={:?} eta={} trials={trials} seed={seed}",
        spec.period_len, spec.p_values, spec.eta
    ));
    report.checks.extend(run_monte_carlo(&spec)?.checks);
    Ok(())
}

fn bins(trials: usize, seed: u64, report: &mut SuiteReport) -> Result<()> {
    let spec = BinsSpec { balls: 500, bins: 1000, subset: 300, epsilon: 0.05, trials, seed };
    report.config.push(format!(
        "bins: n={} m={} |A|={} epsilon={} trials={trials} seed={seed}",
        spec.balls, spec.bins, spec.subset, spec.epsilon
    ));
    let r = check_balls_in_bins(&spec)?;
    report.checks.push(Check {
        name: "bins_concentration".into(),
        passed: r.bound_holds,
        observed: r.event_freq,
        threshold: r.prob_bound,
        detail: format!(
            "P(S >= {:.4}) observed {:.4} vs bound 1-2e^(-eps^2 m/2) = {:.4}",
            r.threshold, r.event_freq, r.prob_bound
        ),
    });
    let rel = (r.occupied.mean - r.exact_mean).abs() / r.exact_mean;
    report.checks.push(Check {
        name: "bins_mean".into(),
        passed: rel <= 0.02,
        observed: r.occupied.mean,
        threshold: r.exact_mean,
        detail: format!(
            "mean S {:.4} (stderr {:.4}) vs exact |A|(1-(1-1/m)^n) = {:.4}, off by {:.3}% (tolerance 2%)",
            r.occupied.mean,
            r.occupied.stderr,
            r.exact_mean,
            rel * 100.0
        ),
    });
    Ok(())
}

/// Runs `suite`. `trials` overrides each sub-suite's default count (random
/// instances for `t1`, Monte Carlo trials otherwise).
pub fn verify_suite(suite: Suite, trials: Option<usize>, seed: u64) -> Result<SuiteReport> {
    if trials == Some(0) {
        return Err(Error::parameter("trials", "must be at least 1"));
    }
    let mut report = SuiteReport { config: Vec::new(), checks: Vec::new() };
    let run = |s: Suite| matches!(suite, Suite::All) || s == suite;
    if run(Suite::T1) {
        t1(trials.unwrap_or(T1_DEFAULT_TRIALS), seed, &mut report)?;
    }
    let mc_trials = trials.unwrap_or(MC_DEFAULT_TRIALS);
    if run(Suite::T2) {
        monte_carlo(
            "t2",
            vec![0.2, 0.5, 0.8],
            vec![Algorithm::Offline],
            vec![Assertion::ExpectedCat { rel_tol: 0.01 }],
            mc_trials,
            seed,
            &mut report,
        )?;
    }
    if run(Suite::T4) {
        monte_carlo(
            "t4",
            vec![0.3, 0.5, 0.8],
            vec![Algorithm::Offline, Algorithm::Online],
            vec![Assertion::RatioBound { sigmas: 3.0 }, Assertion::Dominance],
            mc_trials,
            seed,
            &mut report,
        )?;
    }
    if run(Suite::Bins) {
        bins(mc_trials, seed, &mut report)?;
    }
    Ok(report)
}
