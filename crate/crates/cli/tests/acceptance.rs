//! Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.
//!
//! Runs as a plain program (`harness = false`) so the lines are visible
//! under `cargo test`; exits non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use detflow::catalog;
use detflow::coding::{self, SimulationConfig};
use detflow::cutset;
use detflow::document;
use detflow::entropy::{EntropyEngine, ProductDistribution};
use detflow::generate::{self, GeneralParams, LinearParams};
use detflow::suites::{self, Suite};
use detflow::unfolding::{self, CutEngine, CutEvaluator};
use detflow::{rng, Limits, RelayNetwork};
use rand::Rng;

const BIN: &str = env!("CARGO_BIN_EXE_detflow");

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn detflow(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("run detflow")
}

fn write_doc(dir: &Path, name: &str, net: &RelayNetwork) -> String {
    let path = dir.join(name);
    std::fs::write(&path, document::serialize(net)).unwrap();
    path.to_str().unwrap().to_owned()
}

fn rank_entropy_equivalence() -> Verdict {
    let limits = Limits::default();
    let mut g = rng::seeded(1001);
    let params = LinearParams {
        max_destinations: 2,
        ..LinearParams::default()
    };
    let (mut cuts, mut worst) = (0usize, 0.0f64);
    for _ in 0..120 {
        let net = generate::random_linear(&params, &mut g);
        let engine = EntropyEngine::new(&net, &limits).unwrap();
        let u = ProductDistribution::uniform(&net).unwrap();
        for &d in net.destinations() {
            for omega in cutset::enumerate_cuts(&net, d, &limits).unwrap() {
                let r = cutset::rank_cut_value(&net, omega).unwrap();
                let h = engine.cut_value(&u, omega).unwrap();
                worst = worst.max((r - h).abs());
                cuts += 1;
            }
        }
    }
    verdict(
        worst <= 1e-9,
        format!("120 networks, {cuts} cuts, max |entropy - rank| = {worst:.3e} bits"),
    )
}

fn diamond_capacity(dir: &Path) -> Verdict {
    let file = write_doc(dir, "diamond.json", &catalog::diamond());
    let out = detflow(&["--json", "capacity", &file, "--list-cuts"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &v["result"];
    let values: Vec<f64> = r["per_destination"][0]["cuts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["bits"].as_f64().unwrap())
        .collect();
    let text = String::from_utf8(detflow(&["capacity", &file]).stdout).unwrap();
    let ok = out.status.code() == Some(0)
        && r["bits"].as_f64() == Some(2.0)
        && r["min_cut"] == serde_json::json!(["S"])
        && values == [2.0, 2.0, 4.0, 2.0]
        && text.starts_with("2.000000000 bits, min cut {S}");
    verdict(
        ok,
        format!(
            "capacity {} bits, min cut {}, cut values {values:?}",
            r["bits"], r["min_cut"]
        ),
    )
}

fn union_bound() -> Verdict {
    let net = catalog::single_edge(2, 2);
    let cfg = SimulationConfig::new(1.0, 4, 10_000, 2024);
    let r = coding::estimate_error_rate(&net, &cfg, &Limits::default()).unwrap();
    let bound = r.union_bound.unwrap();
    let se = (bound * (1.0 - bound) / r.trials as f64).sqrt();
    verdict(
        bound == 0.0625 && r.error_rate <= bound + 3.0 * se,
        format!(
            "error rate {:.4} ({} / {}), union bound {bound}, limit {:.4}",
            r.error_rate,
            r.errors,
            r.trials,
            bound + 3.0 * se
        ),
    )
}

fn above_capacity() -> Verdict {
    let net = catalog::single_edge(2, 2);
    let c = cutset::linear_capacity(&net, &Limits::default())
        .unwrap()
        .bits;
    let cfg = SimulationConfig::new(c + 1.0, 6, 1_000, 77);
    let r = coding::estimate_error_rate(&net, &cfg, &Limits::default()).unwrap();
    verdict(
        r.error_rate >= 0.9,
        format!(
            "R = {} bits, error rate {:.4} over {} trials",
            c + 1.0,
            r.error_rate,
            r.trials
        ),
    )
}

fn block_diagonal_identity() -> Verdict {
    let limits = Limits::default();
    let mut g = rng::seeded(5005);
    let (mut cuts, mut mismatches) = (0, 0);
    for _ in 0..50 {
        let depth = g.gen_range(1..=4);
        let net = generate::random_layered_linear(depth, 2, &LinearParams::default(), &mut g);
        for omega in cutset::enumerate_cuts(&net, net.destinations()[0], &limits).unwrap() {
            cuts += 1;
            if coding::layer_error_exponent(&net, omega).unwrap()
                != cutset::cut_rank(&net, omega).unwrap()
            {
                mismatches += 1;
            }
        }
    }
    verdict(
        mismatches == 0,
        format!("50 layered networks, {cuts} cuts, {mismatches} mismatches"),
    )
}

fn unfolded_sandwich() -> Verdict {
    let limits = Limits::default();
    let net = catalog::unequal_paths();
    let c = cutset::linear_capacity(&net, &limits).unwrap().bits;
    let l = unfolding::cut_count(&net) as f64;
    let uniform = ProductDistribution::uniform(&net).unwrap();
    let mut ok = l == 2.0;
    let mut normalized = Vec::new();
    let mut checked = 0;
    for k in 2..=8usize {
        let kf = k as f64;
        let unf = unfolding::unfold(&net, k).unwrap();
        let eval = CutEvaluator::new(&unf, &CutEngine::Rank, &limits).unwrap();
        let mut min = f64::INFINITY;
        for cut in unfolding::enumerate_unfolded_cuts(&unf, 0, &limits).unwrap() {
            let v = eval.direct_rank_value(&cut, 0).unwrap();
            ok &= v == eval.value(&cut).unwrap();
            ok &= v >= (kf - l + 1.0) * c;
            min = min.min(v);
            checked += 1;
        }
        let n = min / kf;
        ok &= n >= (kf - l + 1.0) / kf * c && n <= c;
        ok &= unfolding::loop_bound_check(&unf, &uniform, &limits)
            .unwrap()
            .iter()
            .all(|r| r.passed);
        normalized.push(n);
    }
    ok &= normalized.windows(2).all(|w| w[1] >= w[0]);
    verdict(
        ok,
        format!("K = 2..8, {checked} unfolded cuts, normalized min-cuts {normalized:?}"),
    )
}

fn steady_lift() -> Verdict {
    let limits = Limits::default();
    let mut g = rng::seeded(7007);
    let params = LinearParams {
        max_destinations: 2,
        ..LinearParams::default()
    };
    let (mut checked, mut mismatches) = (0, 0);
    for _ in 0..20 {
        let net = generate::random_linear(&params, &mut g);
        for k in 1..=5 {
            let unf = unfolding::unfold(&net, k).unwrap();
            let eval = CutEvaluator::new(&unf, &CutEngine::Rank, &limits).unwrap();
            for (di, &d) in net.destinations().iter().enumerate() {
                for omega in cutset::enumerate_cuts(&net, d, &limits).unwrap() {
                    let cut = unfolding::lift_steady_cut(&unf, omega);
                    let expected = k as f64 * cutset::rank_cut_value(&net, omega).unwrap();
                    checked += 1;
                    if eval.direct_rank_value(&cut, di).unwrap() != expected
                        || eval.value(&cut).unwrap() != expected
                    {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    verdict(
        mismatches == 0,
        format!("20 networks, K = 1..5, {checked} lifted cuts, {mismatches} mismatches"),
    )
}

fn appendix_suite() -> Verdict {
    let limits = Limits::default();
    let mut g = rng::seeded(8008);
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut worst_loop = f64::INFINITY;
    for k in 0..1000u64 {
        let net = generate::random_linear(&LinearParams::default(), &mut g);
        let r = suites::run_suite(&net, Suite::Counting, 1, k, &limits).unwrap();
        checks += r.checks;
        failures.extend(r.first_failure);
    }
    let binary = GeneralParams {
        min_alphabet: 2,
        max_alphabet: 2,
        ..GeneralParams::default()
    };
    for k in 0..1000u64 {
        let net = generate::random_general(&binary, &mut g);
        let r = suites::run_suite(&net, Suite::Loop, 1, k, &limits).unwrap();
        checks += r.checks;
        worst_loop = worst_loop.min(r.worst_slack);
        failures.extend(r.first_failure);
    }
    let r = suites::run_suite(&catalog::diamond(), Suite::Kway, 1000, 8008, &limits).unwrap();
    checks += r.checks;
    failures.extend(r.first_failure);
    verdict(
        failures.is_empty(),
        format!(
            "{checks} checks, worst loop slack {worst_loop:.3e}, worst k-way slack {:.3e}, {} failures{}",
            r.worst_slack,
            failures.len(),
            failures.first().map_or(String::new(), |f| format!(": {f}"))
        ),
    )
}

fn general_layered_identity() -> Verdict {
    let limits = Limits::default();
    let mut g = rng::seeded(9009);
    let params = GeneralParams {
        max_alphabet: 3,
        ..GeneralParams::default()
    };
    let (mut cuts, mut worst) = (0, 0.0f64);
    for _ in 0..30 {
        let depth = g.gen_range(1..=4);
        let net = generate::random_layered_general(depth, 2, &params, &mut g);
        let engine = EntropyEngine::new(&net, &limits).unwrap();
        for _ in 0..3 {
            let dist = generate::random_distribution(&net, &mut g).unwrap();
            for omega in cutset::enumerate_cuts(&net, net.destinations()[0], &limits).unwrap() {
                let layers = coding::general_layer_exponent(&engine, omega, &dist).unwrap();
                let whole = engine.cut_value(&dist, omega).unwrap();
                worst = worst.max((layers - whole).abs());
                cuts += 1;
            }
        }
    }
    verdict(
        worst <= 1e-9,
        format!("30 networks x 3 distributions, {cuts} cuts, max |difference| = {worst:.3e} bits"),
    )
}

fn cli_contract(dir: &Path) -> Verdict {
    let mut problems = Vec::new();
    let mut g = rng::seeded(1010);
    for i in 0..50 {
        let net = match i % 4 {
            0 => generate::random_linear(&LinearParams::default(), &mut g),
            1 => generate::random_general(&GeneralParams::default(), &mut g),
            2 => generate::random_layered_linear(3, 2, &LinearParams::default(), &mut g),
            _ => generate::random_layered_general(2, 2, &GeneralParams::default(), &mut g),
        };
        let text = document::serialize(&net);
        let back = document::parse(&text).unwrap();
        if document::serialize(&back) != text || back != net {
            problems.push(format!("network {i} does not round-trip"));
        }
        let file = write_doc(dir, &format!("net{i}.json"), &net);
        if detflow(&["--json", "rate", &file]).status.code() != Some(0) {
            problems.push(format!("network {i} rejected by the CLI"));
        }
    }

    let diamond = write_doc(dir, "d.json", &catalog::diamond());
    let or = write_doc(dir, "or.json", &catalog::or_network());
    let syntax = dir.join("syntax.json");
    std::fs::write(&syntax, "{\"model\": linear}").unwrap();
    let schema = dir.join("schema.json");
    std::fs::write(
        &schema,
        document::serialize(&catalog::single_edge(2, 1)).replace("[[1]]", "[[2]]"),
    )
    .unwrap();
    let invalid = dir.join("invalid.json");
    std::fs::write(
        &invalid,
        document::serialize(&catalog::single_edge(2, 1))
            .replace(r#""destinations":["D"]"#, r#""destinations":["S"]"#),
    )
    .unwrap();
    let (syntax, schema, invalid) = (
        syntax.to_str().unwrap(),
        schema.to_str().unwrap(),
        invalid.to_str().unwrap(),
    );
    let limited = Command::new(BIN)
        .env(detflow::limits::LIMIT_ENV, "3")
        .args(["capacity", &diamond])
        .output()
        .unwrap();
    let cases: Vec<(&str, Output, i32)> = vec![
        ("capacity", detflow(&["capacity", &diamond]), 0),
        (
            "unknown flag",
            detflow(&["capacity", &diamond, "--bogus"]),
            1,
        ),
        ("missing command", detflow(&[]), 1),
        ("syntax error", detflow(&["capacity", syntax]), 2),
        ("schema error", detflow(&["capacity", schema]), 2),
        ("invalid network", detflow(&["capacity", invalid]), 3),
        (
            "capacity of a general network",
            detflow(&["capacity", &or]),
            3,
        ),
        ("enumeration limit", limited, 4),
        (
            "failed suite",
            detflow(&["verify", &diamond, "--suite", "kway", "--min-slack", "1"]),
            5,
        ),
        (
            "passing suite",
            detflow(&[
                "verify", &diamond, "--suite", "counting", "--trials", "100", "--seed", "7",
            ]),
            0,
        ),
    ];
    for (name, out, code) in &cases {
        if out.status.code() != Some(*code) {
            problems.push(format!(
                "{name}: exit {:?}, expected {code}",
                out.status.code()
            ));
        }
        if (1..=4).contains(code) && !out.stdout.is_empty() {
            problems.push(format!("{name}: wrote to stdout on error"));
        }
    }

    let runs: [&[&str]; 4] = [
        &[
            "simulate",
            &diamond,
            "--rate",
            "1",
            "--block-length",
            "4",
            "--trials",
            "3000",
            "--seed",
            "5",
        ],
        &[
            "verify", &or, "--suite", "loop", "--trials", "200", "--seed", "3",
        ],
        &["rate", &or, "--dist", "ascent:4", "--seed", "9"],
        &["converge", &diamond, "--max-stages", "3"],
    ];
    for args in runs {
        let with = |t: &str| {
            let mut a = vec!["--json", "--threads", t];
            a.extend_from_slice(args);
            detflow(&a)
        };
        let (one, four, again) = (with("1"), with("4"), with("4"));
        if one.status.code() != Some(0) || one.stdout != four.stdout || four.stdout != again.stdout
        {
            problems.push(format!(
                "`{}` is not reproducible across thread counts",
                args[0]
            ));
        }
    }
    verdict(
        problems.is_empty(),
        format!(
            "50 round-trips, {} exit-code cases, 4 reproducibility runs{}",
            cases.len(),
            problems.first().map_or(String::new(), |p| format!("; {p}"))
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;
    let criteria: Vec<(&str, Option<Duration>, Check)> = vec![
        (
            "rank-entropy equivalence",
            Some(Duration::from_secs(60)),
            Box::new(rank_entropy_equivalence),
        ),
        (
            "diamond capacity",
            Some(Duration::from_secs(1)),
            Box::new(|| diamond_capacity(dir)),
        ),
        (
            "union bound",
            Some(Duration::from_secs(30)),
            Box::new(union_bound),
        ),
        (
            "above-capacity collapse",
            Some(Duration::from_secs(30)),
            Box::new(above_capacity),
        ),
        (
            "block-diagonal identity",
            None,
            Box::new(block_diagonal_identity),
        ),
        (
            "unfolded cut sandwich",
            Some(Duration::from_secs(120)),
            Box::new(unfolded_sandwich),
        ),
        ("steady-cut lift", None, Box::new(steady_lift)),
        (
            "submodularity suite",
            Some(Duration::from_secs(180)),
            Box::new(appendix_suite),
        ),
        (
            "general layered identity",
            None,
            Box::new(general_layered_identity),
        ),
        ("CLI contract", None, Box::new(|| cli_contract(dir))),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = budget.map_or(true, |b| elapsed <= b);
        let passed = v.passed && in_time;
        if !passed {
            failed += 1;
        }
        let budget = budget.map_or(String::new(), |b| format!(" of {} s", b.as_secs()));
        println!(
            "[{}] {:>2}. {name}: {} ({:.2} s{budget})",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
