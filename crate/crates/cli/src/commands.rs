use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use detflow::coding::{self, SimulationConfig, SimulationReport};
use detflow::cutset::{self, CutValue, SearchMethod};
use detflow::document::{self, format_bits};
use detflow::suites::{self, SuiteReport};
use detflow::unfolding::{self, CutEngine};
use detflow::{Error, Limits, NodeId, NodeSet, ProductDistribution, RelayNetwork};

use crate::{exit, Cli, Command, Failure, SimulateArgs};

/// A finished command: result object for `--json`, text otherwise.
struct Report {
    command: &'static str,
    seed: Option<u64>,
    result: Value,
    text: String,
    code: i32,
}

impl Report {
    fn new(command: &'static str, seed: Option<u64>, result: Value, text: String) -> Self {
        Report {
            command,
            seed,
            result,
            text,
            code: exit::SUCCESS,
        }
    }

    fn render(self, json: bool) -> (i32, String) {
        let out = if json {
            let envelope = json!({
                "command": self.command,
                "generator": detflow::rng::GENERATOR_ID,
                "result": self.result,
                "seed": self.seed,
                "version": detflow::VERSION,
            });
            document::canonical_json(&envelope) + "\n"
        } else {
            let seed = self.seed.map_or("none".to_owned(), |s| s.to_string());
            format!(
                "{}detflow {}, seed {seed}, generator {}\n",
                self.text,
                detflow::VERSION,
                detflow::rng::GENERATOR_ID
            )
        };
        (self.code, out)
    }
}

pub(crate) fn execute(cli: &Cli) -> Result<(i32, String), Failure> {
    let limits = Limits::from_env();
    let report = match &cli.command {
        Command::Capacity {
            file,
            destination,
            list_cuts,
        } => capacity(&load(file)?, destination.as_deref(), *list_cuts, &limits)?,
        Command::Rate { file, dist, seed } => rate(&load(file)?, dist, *seed, &limits)?,
        Command::Simulate(args) => simulate(&load(&args.file)?, args, &limits)?,
        Command::Unfold { file, stages, emit } => {
            unfold(&load(file)?, *stages as usize, emit.as_deref(), &limits)?
        }
        Command::Converge {
            file,
            max_stages,
            engine,
        } => converge(
            &load(file)?,
            *max_stages as usize,
            engine.as_deref(),
            &limits,
        )?,
        Command::Verify {
            file,
            suite,
            trials,
            seed,
            min_slack,
        } => verify(&load(file)?, *suite, *trials, *seed, *min_slack, &limits)?,
    };
    Ok(report.render(cli.json))
}

fn load(path: &Path) -> Result<RelayNetwork, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: exit::PARSE,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    Ok(document::parse(&text)?)
}

fn set_names(net: &RelayNetwork, s: NodeSet) -> Vec<&str> {
    s.iter().map(|v| net.name(v)).collect()
}

fn show_set(net: &RelayNetwork, s: NodeSet) -> String {
    format!("{{{}}}", set_names(net, s).join(", "))
}

fn cut_json(net: &RelayNetwork, c: &CutValue) -> Value {
    json!({"cut": set_names(net, c.omega), "bits": c.bits, "rank": c.rank})
}

/// First cut of minimum value; ranks compare exactly.
fn first_min(cuts: &[CutValue]) -> &CutValue {
    let mut best = &cuts[0];
    for c in &cuts[1..] {
        let better = match (c.rank, best.rank) {
            (Some(a), Some(b)) => a < b,
            _ => c.bits < best.bits - 1e-12,
        };
        if better {
            best = c;
        }
    }
    best
}

/// Per-destination cut tables and their minimum, as JSON and text.
fn cut_tables(
    net: &RelayNetwork,
    tables: Vec<(NodeId, Vec<CutValue>)>,
    list_cuts: bool,
) -> (Value, String) {
    let mut text = String::new();
    let mut per = Vec::new();
    let mut overall: Option<(NodeId, CutValue)> = None;
    for (d, cuts) in &tables {
        let m = first_min(cuts);
        if overall
            .as_ref()
            .map_or(true, |(_, o)| m.bits < o.bits - 1e-12)
        {
            overall = Some((*d, m.clone()));
        }
        let mut entry = json!({"destination": net.name(*d), "min": cut_json(net, m)});
        if list_cuts {
            entry["cuts"] = cuts.iter().map(|c| cut_json(net, c)).collect();
        }
        per.push(entry);
    }
    let (d, m) = overall.expect("at least one destination");
    let _ = writeln!(
        text,
        "{} bits, min cut {}",
        format_bits(m.bits),
        show_set(net, m.omega)
    );
    for (dest, cuts) in &tables {
        if tables.len() > 1 {
            let m = first_min(cuts);
            let _ = writeln!(
                text,
                "  destination {}: {} bits, min cut {}",
                net.name(*dest),
                format_bits(m.bits),
                show_set(net, m.omega)
            );
        }
        if list_cuts {
            for c in cuts {
                let rank = c.rank.map_or(String::new(), |r| format!(" (rank {r})"));
                let _ = writeln!(
                    text,
                    "  cut {} -> {}: {} bits{rank}",
                    show_set(net, c.omega),
                    net.name(*dest),
                    format_bits(c.bits)
                );
            }
        }
    }
    let result = json!({
        "bits": m.bits,
        "destination": net.name(d),
        "min_cut": set_names(net, m.omega),
        "per_destination": per,
    });
    (result, text)
}

fn destinations(net: &RelayNetwork, only: Option<&str>) -> Result<Vec<NodeId>, Failure> {
    match only {
        None => Ok(net.destinations().to_vec()),
        Some(name) => {
            let id = net.node_id(name)?;
            if !net.destinations().contains(&id) {
                return Err(Error::Precondition(format!("`{name}` is not a destination")).into());
            }
            Ok(vec![id])
        }
    }
}

fn capacity(
    net: &RelayNetwork,
    only: Option<&str>,
    list_cuts: bool,
    limits: &Limits,
) -> Result<Report, Failure> {
    if !net.is_linear() {
        return Err(Failure {
            code: exit::SEMANTIC,
            message:
                "capacity is defined for linear networks; use `detflow rate` for general networks"
                    .into(),
        });
    }
    let tables = destinations(net, only)?
        .into_iter()
        .map(|d| Ok((d, cutset::rank_cut_values(net, d, limits)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let (mut result, text) = cut_tables(net, tables, list_cuts);
    result["unit"] = "bits".into();
    Ok(Report::new("capacity", None, result, text))
}

fn parse_method(spec: &str, seed: u64) -> Result<SearchMethod, Failure> {
    let usage = || Failure {
        code: exit::USAGE,
        message: format!(
            "invalid --dist `{spec}`; expected uniform, grid:RESOLUTION or ascent:RESTARTS"
        ),
    };
    let number = |s: &str| s.parse::<u32>().ok().filter(|&n| n >= 1).ok_or_else(usage);
    match spec.split_once(':') {
        None if spec == "uniform" => Ok(SearchMethod::Uniform),
        Some(("grid", r)) => Ok(SearchMethod::Grid {
            resolution: number(r)?,
        }),
        Some(("ascent", r)) => Ok(SearchMethod::CoordinateAscent {
            restarts: number(r)?,
            seed,
        }),
        _ => Err(usage()),
    }
}

fn distribution_json(net: &RelayNetwork, dist: &ProductDistribution) -> Value {
    net.nodes()
        .map(|v| (net.name(v).to_owned(), json!(dist.pmf(v))))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn rate(net: &RelayNetwork, spec: &str, seed: u64, limits: &Limits) -> Result<Report, Failure> {
    let method = parse_method(spec, seed)?;
    let found = cutset::optimize_distribution(net, method, limits)?;
    let engine = detflow::EntropyEngine::new(net, limits)?;
    let tables = net
        .destinations()
        .iter()
        .map(|&d| {
            Ok((
                d,
                cutset::entropy_cut_values(&engine, &found.distribution, d, limits)?,
            ))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let (mut result, mut text) = cut_tables(net, tables, false);
    result["label"] = found.label.into();
    result["method"] = serde_json::to_value(found.method).expect("method serializes");
    result["distribution"] = distribution_json(net, &found.distribution);
    text = text.replacen(" bits,", &format!(" bits ({}),", found.label), 1);
    let _ = writeln!(text, "distribution:");
    for v in net.nodes() {
        let pmf: Vec<String> = found
            .distribution
            .pmf(v)
            .iter()
            .map(|&p| format_bits(p))
            .collect();
        let _ = writeln!(text, "  {}: [{}]", net.name(v), pmf.join(", "));
    }
    let seed = matches!(method, SearchMethod::CoordinateAscent { .. }).then_some(seed);
    Ok(Report::new("rate", seed, result, text))
}

fn simulation_text(r: &SimulationReport) -> String {
    let mut text = String::new();
    let _ = writeln!(
        text,
        "mode {}, rate {} bits per use, block length {}, {} messages",
        r.mode,
        format_bits(r.rate),
        r.block_length,
        r.messages
    );
    let _ = writeln!(
        text,
        "errors {}/{}, error rate {} +/- {} (95%)",
        r.errors,
        r.trials,
        format_bits(r.error_rate),
        format_bits(r.half_width)
    );
    match r.union_bound {
        Some(b) => {
            let _ = writeln!(text, "union bound {}", format_bits(b));
        }
        None => {
            let _ = writeln!(text, "union bound unavailable");
        }
    }
    text
}

fn simulate(net: &RelayNetwork, args: &SimulateArgs, limits: &Limits) -> Result<Report, Failure> {
    let mut config = SimulationConfig::new(args.rate, args.block_length, args.trials, args.seed);
    config.delta = args.delta;
    let r = coding::estimate_error_rate(net, &config, limits)?;
    let text = simulation_text(&r);
    Ok(Report::new("simulate", Some(args.seed), to_json(&r), text))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize to JSON")
}

fn unfold(
    net: &RelayNetwork,
    stages: usize,
    emit: Option<&Path>,
    _limits: &Limits,
) -> Result<Report, Failure> {
    let unf = unfolding::unfold(net, stages)?;
    let u = unf.network();
    let doc = document::serialize(u);
    let mut text = format!(
        "unfolded {} over {stages} stages: {} nodes, {} edges, {} unbounded links\n",
        net.title().unwrap_or("network"),
        u.node_count(),
        u.edges().len(),
        u.unbounded().len()
    );
    let mut result = json!({
        "stages": stages,
        "nodes": u.node_count(),
        "edges": u.edges().len(),
        "unbounded": u.unbounded().len(),
    });
    match emit {
        Some(path) => {
            std::fs::write(path, format!("{doc}\n")).map_err(|e| Failure {
                code: exit::USAGE,
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            let _ = writeln!(text, "written to {}", path.display());
            result["emitted"] = path.display().to_string().into();
        }
        None => {
            let _ = writeln!(text, "{doc}");
            result["document"] = serde_json::from_str(&doc).expect("canonical document is JSON");
        }
    }
    Ok(Report::new("unfold", None, result, text))
}

fn converge(
    net: &RelayNetwork,
    max_stages: usize,
    engine: Option<&str>,
    limits: &Limits,
) -> Result<Report, Failure> {
    let engine = match engine {
        Some("rank") => CutEngine::Rank,
        Some("uniform") => CutEngine::Entropy(ProductDistribution::uniform(net)?),
        None if net.is_linear() => CutEngine::Rank,
        None => CutEngine::Entropy(ProductDistribution::uniform(net)?),
        Some(other) => {
            return Err(Failure {
                code: exit::USAGE,
                message: format!("invalid --engine `{other}`; expected rank or uniform"),
            })
        }
    };
    let r = unfolding::convergence_report(net, 1..=max_stages, &engine, limits)?;
    let mut text = format!(
        "original min-cut {} bits, {} cuts\n{:>3} {:>14} {:>12} {:>12} {:>12} {:>7}\n",
        format_bits(r.original_min_cut),
        r.cut_count,
        "K",
        "unfolded",
        "normalized",
        "lower",
        "upper",
        "steady"
    );
    for row in &r.rows {
        let _ = writeln!(
            text,
            "{:>3} {:>14} {:>12} {:>12} {:>12} {:>7}",
            row.stages,
            format_bits(row.unfolded_min_cut),
            format_bits(row.normalized),
            format_bits(row.lower),
            format_bits(row.upper),
            if row.argmin_steady { "yes" } else { "no" }
        );
    }
    let yes = |b: bool| if b { "yes" } else { "no" };
    let _ = writeln!(
        text,
        "monotone: {}, bracketed: {}",
        yes(r.monotone),
        yes(r.bracketed)
    );
    let mut result = to_json(&r);
    result["engine"] = match engine {
        CutEngine::Rank => "rank",
        CutEngine::Entropy(_) => "uniform",
    }
    .into();
    Ok(Report::new("converge", None, result, text))
}

fn verify(
    net: &RelayNetwork,
    suite: suites::Suite,
    trials: usize,
    seed: u64,
    min_slack: f64,
    limits: &Limits,
) -> Result<Report, Failure> {
    let r: SuiteReport = suites::run_suite_with(net, suite, trials, seed, min_slack, limits)?;
    let mut text = format!(
        "suite {}: {}, {} trials, {} checks, {} failures, worst slack {}\n",
        r.suite,
        if r.passed { "passed" } else { "FAILED" },
        r.trials,
        r.checks,
        r.failures,
        format_bits(r.worst_slack)
    );
    if let Some(f) = &r.first_failure {
        let _ = writeln!(text, "first failure: {f}");
    }
    let code = if r.passed {
        exit::SUCCESS
    } else {
        exit::VERIFY
    };
    let mut report = Report::new("verify", Some(seed), to_json(&r), text);
    report.code = code;
    Ok(report)
}
