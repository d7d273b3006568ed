//! Randomized verification suites over a given network.
//!
//! Trial `k` draws its instance from `derive_seed(seed, k)`, so a report
//! depends only on the network, the trial count and the seed. Trials run in
//! parallel and are reduced in trial order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cutset;
use crate::entropy::{EntropyEngine, ProductDistribution};
use crate::error::{Error, Result};
use crate::generate;
use crate::limits::Limits;
use crate::network::RelayNetwork;
use crate::nodeset::NodeSet;
use crate::rng;
use crate::submodularity::{self, JointPmf, SLACK_TOLERANCE};
use crate::unfolding;

/// Equality tolerance for entropy identities, in bits.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Longest random family drawn by the suites.
pub const MAX_FAMILY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Loop inequality on random distributions and cyclic families.
    Loop,
    /// Counting lemma, nesting and membership of tilde families.
    Counting,
    /// k-way submodularity of joint entropy on random 4-variable pmfs.
    Kway,
    /// Unfolded cut bound on every valid unfolded cut.
    LoopBound,
    /// Uniform entropy cut values against rank cut values.
    RankEntropy,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Loop,
        Suite::Counting,
        Suite::Kway,
        Suite::LoopBound,
        Suite::RankEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Loop => "loop",
            Suite::Counting => "counting",
            Suite::Kway => "kway",
            Suite::LoopBound => "lemma2",
            Suite::RankEntropy => "rank-entropy",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub min_slack: f64,
    pub checks: u64,
    pub failures: u64,
    /// Smallest slack over all inequality checks; `0` for exact checks.
    pub worst_slack: f64,
    pub first_failure: Option<String>,
    pub passed: bool,
}

/// Outcome of one trial.
#[derive(Debug, Clone, Default)]
struct Tally {
    min_slack: f64,
    checks: u64,
    failures: u64,
    worst_slack: f64,
    first_failure: Option<String>,
}

impl Tally {
    fn new(min_slack: f64) -> Self {
        Tally {
            min_slack,
            worst_slack: f64::INFINITY,
            ..Default::default()
        }
    }

    /// Records an inequality check with the given slack.
    fn slack(&mut self, slack: f64, what: impl FnOnce() -> String) {
        self.check(slack >= self.min_slack, slack, what);
    }

    /// Records an exact check; a failure counts as slack `-1`.
    fn exact(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.check(ok, if ok { 0.0 } else { -1.0 }, what);
    }

    fn check(&mut self, ok: bool, slack: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        self.worst_slack = self.worst_slack.min(slack);
        if !ok {
            self.failures += 1;
            self.first_failure.get_or_insert_with(what);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.failures += other.failures;
        self.worst_slack = self.worst_slack.min(other.worst_slack);
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure;
        }
        self
    }
}

pub fn run_suite(
    net: &RelayNetwork,
    suite: Suite,
    trials: usize,
    seed: u64,
    limits: &Limits,
) -> Result<SuiteReport> {
    run_suite_with(net, suite, trials, seed, SLACK_TOLERANCE, limits)
}

/// [`run_suite`] with inequality checks failing below `min_slack` instead
/// of the default tolerance.
pub fn run_suite_with(
    net: &RelayNetwork,
    suite: Suite,
    trials: usize,
    seed: u64,
    min_slack: f64,
    limits: &Limits,
) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(Error::Precondition("at least one trial is required".into()));
    }
    let engine = match suite {
        Suite::Loop | Suite::LoopBound | Suite::RankEntropy => {
            Some(EntropyEngine::new(net, limits)?)
        }
        Suite::Counting | Suite::Kway => None,
    };
    if suite == Suite::RankEntropy {
        net.linear()?;
    }
    let tallies = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut g = rng::seeded(rng::derive_seed(seed, k as u64));
            let mut t = Tally::new(min_slack);
            match suite {
                Suite::Counting => counting_trial(net, k, &mut g, &mut t, limits)?,
                Suite::Kway => kway_trial(k, &mut g, &mut t, limits)?,
                Suite::Loop => loop_trial(
                    net,
                    engine.as_ref().expect("engine"),
                    k,
                    &mut g,
                    &mut t,
                    limits,
                )?,
                Suite::LoopBound => loop_bound_trial(net, k, &mut g, &mut t, limits)?,
                Suite::RankEntropy => rank_entropy_trial(
                    net,
                    engine.as_ref().expect("engine"),
                    k,
                    &mut g,
                    &mut t,
                    limits,
                )?,
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = tallies
        .into_iter()
        .fold(Tally::new(min_slack), Tally::merge);
    Ok(SuiteReport {
        suite,
        trials,
        seed,
        min_slack,
        checks: total.checks,
        failures: total.failures,
        worst_slack: if total.checks == 0 {
            0.0
        } else {
            total.worst_slack
        },
        passed: total.failures == 0,
        first_failure: total.first_failure,
    })
}

fn family_len<R: Rng>(g: &mut R, max: usize) -> usize {
    g.gen_range(1..=max.min(MAX_FAMILY))
}

fn counting_trial<R: Rng>(
    net: &RelayNetwork,
    k: usize,
    g: &mut R,
    t: &mut Tally,
    limits: &Limits,
) -> Result<()> {
    let n = net.node_count();
    let universe = NodeSet::full(n).bits();
    let len = family_len(g, limits.family_size);
    let masks = generate::random_masks(n, len, g);
    let report = submodularity::counting_check(&masks, universe, limits.family_size)?;
    t.exact(report.passed, || {
        format!("trial {k}: counting identity fails for {masks:?}")
    });
    let tilde = submodularity::tilde_family(&masks, limits.family_size)?;
    t.exact(submodularity::is_nested(&tilde), || {
        format!("trial {k}: tilde family of {masks:?} is not nested")
    });

    let dest = net.destinations()[g.gen_range(0..net.destinations().len())];
    let family = generate::random_family(net, dest, family_len(g, limits.family_size), g)?;
    for s in family.tilde(limits.family_size)? {
        t.exact(s.contains(dest) && !s.contains(net.source()), || {
            format!("trial {k}: tilde member {s:?} is not a cut complement")
        });
    }
    Ok(())
}

fn kway_trial<R: Rng>(k: usize, g: &mut R, t: &mut Tally, limits: &Limits) -> Result<()> {
    let cards: Vec<usize> = (0..4).map(|_| g.gen_range(2..=3)).collect();
    let pmf = JointPmf::random(cards, g);
    let masks = generate::random_masks(4, g.gen_range(2..=6), g);
    let r = submodularity::k_way_submodularity_check(
        |m| Ok(pmf.entropy(m)),
        &masks,
        limits.family_size,
    )?;
    t.slack(r.slack, || {
        format!(
            "trial {k}: entropy sums over {masks:?} and its tilde family differ by {}",
            r.slack
        )
    });

    let marginals: Vec<Vec<f64>> = (0..4)
        .map(|_| {
            let w: Vec<f64> = (0..g.gen_range(2..=3))
                .map(|_| g.gen::<f64>() + 1e-3)
                .collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let (a, b) = submodularity::entropy_sum_identity(&marginals, &masks, limits.family_size)?;
    t.exact((a - b).abs() <= IDENTITY_TOLERANCE, || {
        format!("trial {k}: independent entropy sums differ ({a} vs {b})")
    });
    Ok(())
}

/// Per-destination min-cut under `dist`.
fn min_cuts(
    engine: &EntropyEngine,
    dist: &ProductDistribution,
    limits: &Limits,
) -> Result<Vec<f64>> {
    Ok(cutset::achievable_rate_with(engine, dist, limits)?
        .per_destination
        .iter()
        .map(|d| d.cut.bits)
        .collect())
}

fn loop_trial<R: Rng>(
    net: &RelayNetwork,
    engine: &EntropyEngine,
    k: usize,
    g: &mut R,
    t: &mut Tally,
    limits: &Limits,
) -> Result<()> {
    let dist = ProductDistribution::random(net, g)?;
    let di = g.gen_range(0..net.destinations().len());
    let dest = net.destinations()[di];
    let family = generate::random_family(net, dest, family_len(g, limits.family_size), g)?;
    let r = submodularity::loop_inequality_check(engine, &dist, &family, limits.family_size)?;
    let sets = family.sets();
    t.slack(r.inequality.slack, || {
        format!(
            "trial {k}: loop inequality slack {} for {sets:?}",
            r.inequality.slack
        )
    });
    t.slack(r.composite.slack, || {
        format!(
            "trial {k}: composite submodularity slack {} for {sets:?}",
            r.composite.slack
        )
    });
    t.exact(r.passed(), || {
        format!("trial {k}: loop proof step fails for {sets:?}")
    });
    let c = min_cuts(engine, &dist, limits)?[di];
    for s in family.tilde(limits.family_size)? {
        let v = engine.psi(&dist, s, s)?;
        t.slack(v - c, || {
            format!("trial {k}: tilde member {s:?} has value {v} below the min-cut {c}")
        });
    }
    Ok(())
}

fn loop_bound_trial<R: Rng>(
    net: &RelayNetwork,
    k: usize,
    g: &mut R,
    t: &mut Tally,
    limits: &Limits,
) -> Result<()> {
    let free = net.node_count().saturating_sub(2);
    let l = unfolding::cut_count(net) as usize;
    let by_limit = if free == 0 {
        usize::MAX
    } else {
        limits.unfolded_free_nodes / free
    };
    let max_stages = (l + 2).min(by_limit.saturating_sub(1));
    if max_stages == 0 {
        return Err(Error::limit(
            "free unfolded nodes",
            2 * free as u64,
            limits.unfolded_free_nodes as u64,
        ));
    }
    let stages = 1 + k % max_stages;
    let dist = ProductDistribution::random(net, g)?;
    let unf = unfolding::unfold(net, stages)?;
    for r in unfolding::loop_bound_check(&unf, &dist, limits)? {
        t.slack(r.worst_slack, || {
            format!(
                "trial {k}: K = {stages} unfolded cut slack {}",
                r.worst_slack
            )
        });
        t.exact(r.passed, || {
            format!("trial {k}: K = {stages} cycle decomposition check fails")
        });
    }
    Ok(())
}

fn rank_entropy_trial<R: Rng>(
    net: &RelayNetwork,
    engine: &EntropyEngine,
    k: usize,
    g: &mut R,
    t: &mut Tally,
    limits: &Limits,
) -> Result<()> {
    // trial 0 checks equality under the uniform distribution; others check
    // that no product distribution exceeds the rank
    let dist = if k == 0 {
        ProductDistribution::uniform(net)?
    } else {
        ProductDistribution::random(net, g)?
    };
    for &d in net.destinations() {
        for omega in cutset::enumerate_cuts(net, d, limits)? {
            let rank = cutset::rank_cut_value(net, omega)?;
            let h = engine.cut_value(&dist, omega)?;
            if k == 0 {
                let diff = (h - rank).abs();
                t.check(diff <= IDENTITY_TOLERANCE, -diff, || {
                    format!("cut {omega:?}: uniform entropy {h} differs from rank value {rank}")
                });
            } else {
                t.slack(rank - h, || {
                    format!("trial {k}: cut {omega:?} entropy {h} exceeds rank value {rank}")
                });
            }
        }
    }
    Ok(())
}
