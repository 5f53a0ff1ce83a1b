//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criterion 2 (closed-form expected offline CAT) is known not to hold for
//! the model as implemented; see the README. It is evaluated at full
//! tolerance and reported as FAIL. The target exits non-zero when the set of
//! failing criteria differs from the known set in either direction.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use dutycycle::harness::{exhaustive_optimality, heterogeneity_sweep, random_optimality, SweepSpec, TESTBED_PERIOD};
use dutycycle::state_graph::check_edges_harvested;
use dutycycle::{
    build_graph, check_energy_budget, generate_pair, offline_duty_cycle, online_duty_cycle, schedule_from_matching,
    verify_suite, Activation, DeviceId, Edge, Efficiency, EnergyTrace, OnlineConfig, OnlineMode, Probability, Suite,
};

const SEED: u64 = 2015;
const KNOWN_FAILURES: &[u32] = &[2];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.passed &= elapsed < limit;
    o.detail += &format!(" [{:.1}s, limit {}s]", elapsed.as_secs_f64(), limit.as_secs());
    o
}

fn suite_outcome(suite: Suite, keep: impl Fn(&str) -> bool) -> Outcome {
    let report = verify_suite(suite, None, SEED).expect("suite runs");
    let checks: Vec<_> = report.checks.iter().filter(|c| keep(&c.name)).collect();
    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    let detail = checks.iter().map(|c| c.line()).collect::<Vec<_>>().join("\n    ");
    Outcome { passed, detail: format!("{} checks\n    {detail}\n   ", checks.len()) }
}

fn criterion_1() -> Outcome {
    timed(Duration::from_secs(120), || {
        let eta = Efficiency::DEFAULT;
        let ex = exhaustive_optimality(8, eta).unwrap();
        let p: Vec<f64> = (2..=9).map(|k| k as f64 / 10.0).collect();
        let rnd = random_optimality(12, &p, 500, eta, SEED).unwrap();
        Outcome {
            passed: ex.passed() && rnd.passed() && rnd.instances == 500,
            detail: format!(
                "exhaustive |T|<=8: {}/{} agree; random |T|=12: {}/{} agree",
                ex.agreements, ex.instances, rnd.agreements, rnd.instances
            ),
        }
    })
}

fn criterion_2() -> Outcome {
    timed(Duration::from_secs(60), || suite_outcome(Suite::T2, |_| true))
}

fn criterion_3() -> Outcome {
    timed(Duration::from_secs(120), || suite_outcome(Suite::T4, |name| name.starts_with("ratio_bound")))
}

fn criterion_4() -> Outcome {
    timed(Duration::from_secs(30), || suite_outcome(Suite::Bins, |_| true))
}

fn criterion_5() -> Outcome {
    let mut schedules = 0usize;
    let mut violations = Vec::new();
    for i in 0..1000u64 {
        let pu = (i % 11) as f64 / 10.0;
        let pv = ((i / 11) % 11) as f64 / 10.0;
        let len = 1 + (i as usize * 7919) % TESTBED_PERIOD;
        let seed = SEED.wrapping_add(i);
        let (u, v) = generate_pair(pu, pv, len, seed).unwrap();
        let off = offline_duty_cycle(&build_graph(&u, &v, Efficiency::DEFAULT).unwrap());
        let mut checks = vec![(
            "offline".to_string(),
            schedule_from_matching(&off.matching, len).and_then(|s| check_energy_budget(&s, &u, &v)),
        )];
        let activations = [
            Activation::Fixed { u: Probability::new(pu).unwrap(), v: Probability::new(pv).unwrap() },
            Activation::Warmup { slots: 60 },
        ];
        for mode in OnlineMode::ALL {
            for activation in activations {
                let on = online_duty_cycle(&u, &v, &OnlineConfig { activation, eta: Efficiency::DEFAULT, seed, mode }).unwrap();
                let ok = check_energy_budget(&on.schedule, &u, &v).and_then(|_| check_edges_harvested(&on.matching, &u, &v));
                checks.push((format!("online-{}", mode.name()), ok));
            }
        }
        for (name, result) in checks {
            schedules += 1;
            if let Err(e) = result {
                violations.push(format!("instance {i} {name}: {e}"));
            }
        }
    }
    Outcome {
        passed: violations.is_empty(),
        detail: format!(
            "{schedules} schedules over 1000 instances, {} prefix-budget violations{}",
            violations.len(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    }
}

fn criterion_6() -> Outcome {
    let u = EnergyTrace::from_slots(DeviceId::new("u"), 9, &[1, 4, 6, 8]).unwrap();
    let v = EnergyTrace::from_slots(DeviceId::new("v"), 9, &[1, 3, 6, 9]).unwrap();
    let r = offline_duty_cycle(&build_graph(&u, &v, Efficiency::new(0.75).unwrap()).unwrap());
    let mut edges: Vec<(usize, usize)> = r.matching.edges().iter().map(|e: &Edge| (e.u_slot, e.v_slot)).collect();
    edges.sort_unstable();
    let want = vec![(1, 1), (4, 3), (6, 6), (8, 9)];
    Outcome {
        passed: r.cat_total == 3.5 && r.sat_total == 2.0 && edges == want,
        detail: format!("CAT {} SAT {} edges {edges:?}", r.cat_total, r.sat_total),
    }
}

fn criterion_7() -> Outcome {
    let invocations: [&[&str]; 4] = [
        &["run", "--prob", "0.5", "--algo", "both", "--seed", "42"],
        &["run", "--prob", "0.3", "--algo", "both", "--mode", "slotsim", "--seed", "42", "--format", "csv"],
        &["verify", "--suite", "t1", "--trials", "100", "--seed", "42"],
        &["verify", "--suite", "bins", "--trials", "500", "--seed", "42"],
    ];
    let mut differing = Vec::new();
    for args in invocations {
        let once = || Command::new(env!("CARGO_BIN_EXE_dutycycle")).args(args).env_remove("DUTYCYCLE_SEED").output().unwrap();
        let (a, b) = (once(), once());
        if a.stdout != b.stdout || a.status != b.status || a.stdout.is_empty() {
            differing.push(args.join(" "));
        }
    }
    Outcome {
        passed: differing.is_empty(),
        detail: format!("{} invocation pairs byte-identical; differing: {differing:?}", invocations.len() - differing.len()),
    }
}

fn criterion_8() -> Outcome {
    let spec = |mode| SweepSpec {
        period_len: TESTBED_PERIOD,
        grid: SweepSpec::default_grid(),
        eta: Efficiency::DEFAULT,
        trials: 200,
        seed: SEED,
        mode,
        bin_width: 0.1,
    };
    let r = heterogeneity_sweep(&spec(OnlineMode::SlotSim)).unwrap();
    let m = heterogeneity_sweep(&spec(OnlineMode::Matching)).unwrap();
    let ratios = |bins: &[dutycycle::harness::SweepBin]| bins.iter().map(|b| format!("{:.3}", b.ratio)).collect::<Vec<_>>().join(" ");
    let cats = r.by_heterogeneity.iter().map(|b| format!("{:.1}", b.offline_cat)).collect::<Vec<_>>().join(" ");
    Outcome {
        passed: r.ratio_rises_with_min_prob
            && r.cat_falls_with_heterogeneity
            && r.by_min_prob.iter().all(|b| b.ratio <= 1.0),
        detail: format!(
            "slotsim ratio by min(p) 0.2..0.9: {}; offline CAT by heterogeneity bin: {cats}\n    \
             (matching mode, reported only: ratio by min(p): {}; monotone={})",
            ratios(&r.by_min_prob),
            ratios(&m.by_min_prob),
            m.ratio_rises_with_min_prob
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "offline optimality vs oracle", criterion_1),
        (2, "expected offline CAT closed form", criterion_2),
        (3, "online ratio bound", criterion_3),
        (4, "balls-in-bins concentration", criterion_4),
        (5, "energy feasibility", criterion_5),
        (6, "worked example", criterion_6),
        (7, "determinism", criterion_7),
        (8, "heterogeneity trends", criterion_8),
    ];
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        let o = f();
        let known = if !o.passed && KNOWN_FAILURES.contains(&id) { " (known failure)" } else { "" };
        println!("{} criterion {id} ({name}){known}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed.push(id);
        }
    }
    if failed == KNOWN_FAILURES {
        println!("acceptance: failures match the known set {KNOWN_FAILURES:?}");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing {failed:?}, known {KNOWN_FAILURES:?}");
        ExitCode::FAILURE
    }
}
