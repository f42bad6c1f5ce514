//! Exact and Monte Carlo estimation of acceptance probabilities.
//!
//! Exact mode replays a round once per discrete branch: every call into the
//! round's [`RandomSource`] becomes a choice point, a depth-first odometer
//! walks all assignments with probability above the impossibility cutoff,
//! and leaf probabilities (products of branch probabilities) are summed
//! with compensated addition. Monte Carlo mode samples independent rounds
//! in parallel, one derived stream per trial, and reports Wilson 95%
//! intervals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::protocols::Challenge;
use crate::rng::{RandomSource, RngStream, MIN_BRANCH_PROB};
use crate::scenario::{run_round, ConfigError, Mode, ScenarioConfig};
use crate::simnet::SimError;

/// Hard cap on enumerated leaves.
pub const MAX_BRANCHES: u64 = 1 << 24;

/// z for a two-sided 95% interval.
const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("branch explosion: more than {max} enumeration leaves")]
    BranchExplosion { max: u64 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(#[from] ConfigError),
    #[error("round failed: {0}")]
    Round(String),
    #[error("basis is not normalized: |α|^2 + |β|^2 = {norm_sqr}")]
    BasisNotNormalized { norm_sqr: f64 },
}

impl From<SimError> for AnalysisError {
    fn from(e: SimError) -> Self {
        AnalysisError::Round(e.to_string())
    }
}

/// Monte Carlo acceptance estimate with a Wilson 95% interval.
#[derive(Clone, Debug, Serialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: u64,
    pub successes: u64,
    pub seed: u64,
    /// Rates of auxiliary per-round events (success conditions, reported
    /// z = 1, late verdicts).
    pub condition_rates: BTreeMap<String, f64>,
}

/// Exact enumeration result.
#[derive(Clone, Debug, Serialize)]
pub struct ExactResult {
    /// Acceptance probability.
    pub probability: f64,
    /// Number of enumerated leaves.
    pub branch_count: u64,
    /// Total probability mass of the leaves (1 up to float error).
    pub prob_mass: f64,
    pub condition_rates: BTreeMap<String, f64>,
}

impl ExactResult {
    /// `P(event)` from the condition-rate table.
    pub fn rate(&self, key: &str) -> f64 {
        self.condition_rates.get(key).copied().unwrap_or(0.0)
    }

    /// `P(reported z = 1 | condition)`.
    pub fn z1_given_cond(&self) -> f64 {
        let cond = self.rate("cond");
        if cond > 0.0 {
            self.rate("z1_and_cond") / cond
        } else {
            0.0
        }
    }
}

// ---------------------------------------------------------------------------
// Exhaustive branch enumeration.

/// Replaying random source: forced choices up to a prefix, first live
/// branch beyond it, recording probabilities for the odometer.
pub struct EnumSource {
    prefix: Vec<u32>,
    trace: Vec<(Vec<f64>, u32)>,
    cursor: usize,
    prob: f64,
}

impl EnumSource {
    fn with_prefix(prefix: Vec<u32>) -> Self {
        EnumSource {
            prefix,
            trace: Vec::new(),
            cursor: 0,
            prob: 1.0,
        }
    }

    pub fn leaf_probability(&self) -> f64 {
        self.prob
    }
}

impl RandomSource for EnumSource {
    fn choose(&mut self, probs: &[f64]) -> usize {
        let pick = if self.cursor < self.prefix.len() {
            self.prefix[self.cursor] as usize
        } else {
            probs
                .iter()
                .position(|&p| p >= MIN_BRANCH_PROB)
                .expect("at least one possible branch")
        };
        self.trace.push((probs.to_vec(), pick as u32));
        self.cursor += 1;
        self.prob *= probs[pick];
        pick
    }

    fn is_enumerating(&self) -> bool {
        true
    }
}

/// Next prefix in depth-first order: advance the deepest choice that still
/// has a live sibling.
fn next_prefix(trace: &[(Vec<f64>, u32)]) -> Option<Vec<u32>> {
    for i in (0..trace.len()).rev() {
        let (probs, chosen) = &trace[i];
        let next = ((*chosen as usize + 1)..probs.len()).find(|&j| probs[j] >= MIN_BRANCH_PROB);
        if let Some(next) = next {
            let mut prefix: Vec<u32> = trace[..i].iter().map(|(_, c)| *c).collect();
            prefix.push(next as u32);
            return Some(prefix);
        }
    }
    None
}

/// Compensated (Kahan) accumulator.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// What one enumerated leaf contributes.
#[derive(Clone, Copy, Debug, Default)]
pub struct Leaf {
    pub accept: bool,
    pub late: bool,
    /// Attack-specific success condition, where the strategy defines one.
    pub cond: Option<bool>,
    /// Reported response value (z for two-qubit protocols).
    pub reported: Option<bool>,
}

#[derive(Default)]
struct Aggregate {
    mass: Kahan,
    accept: Kahan,
    late: Kahan,
    cond: Kahan,
    accept_and_cond: Kahan,
    z1: Kahan,
    z1_and_cond: Kahan,
    branches: u64,
}

impl Aggregate {
    fn add(&mut self, p: f64, leaf: Leaf) {
        self.branches += 1;
        self.mass.add(p);
        if leaf.accept {
            self.accept.add(p);
        }
        if leaf.late {
            self.late.add(p);
        }
        let cond = leaf.cond.unwrap_or(false);
        if cond {
            self.cond.add(p);
            if leaf.accept {
                self.accept_and_cond.add(p);
            }
        }
        if leaf.reported == Some(true) {
            self.z1.add(p);
            if cond {
                self.z1_and_cond.add(p);
            }
        }
    }

    fn into_result(self) -> ExactResult {
        let mut rates = BTreeMap::new();
        rates.insert("cond".into(), self.cond.sum);
        rates.insert("accept_and_cond".into(), self.accept_and_cond.sum);
        rates.insert("z1".into(), self.z1.sum);
        rates.insert("z1_and_cond".into(), self.z1_and_cond.sum);
        rates.insert("late".into(), self.late.sum);
        ExactResult {
            probability: self.accept.sum,
            branch_count: self.branches,
            prob_mass: self.mass.sum,
            condition_rates: rates,
        }
    }
}

/// Enumerate every discrete branch of a stochastic computation. The closure
/// must be deterministic given the choices it draws from the source.
pub fn enumerate<F>(run: F) -> Result<ExactResult, AnalysisError>
where
    F: FnMut(&mut EnumSource) -> Result<Leaf, AnalysisError>,
{
    enumerate_capped(run, MAX_BRANCHES)
}

/// [`enumerate`] with an explicit leaf cap.
pub fn enumerate_capped<F>(mut run: F, max_branches: u64) -> Result<ExactResult, AnalysisError>
where
    F: FnMut(&mut EnumSource) -> Result<Leaf, AnalysisError>,
{
    let mut agg = Aggregate::default();
    let mut prefix = Vec::new();
    loop {
        let mut source = EnumSource::with_prefix(prefix);
        let leaf = run(&mut source)?;
        agg.add(source.prob, leaf);
        if agg.branches > max_branches {
            return Err(AnalysisError::BranchExplosion { max: max_branches });
        }
        match next_prefix(&source.trace) {
            Some(p) => prefix = p,
            None => break,
        }
    }
    Ok(agg.into_result())
}

fn leaf_of_round(out: &crate::scenario::RoundOutcome) -> Leaf {
    Leaf {
        accept: out.verdict.accept,
        late: out
            .verdict
            .per_verifier
            .contains(&crate::simnet::Reason::Late),
        cond: out.transcript.telemetry.cond_ok,
        reported: out.transcript.telemetry.reported,
    }
}

/// Size of the challenge space, a lower bound on the enumeration's leaf
/// count; lets oversized scenarios fail fast.
fn challenge_space(config: &ScenarioConfig) -> u64 {
    use crate::protocols::ProtocolKind::*;
    match config.protocol {
        P1 => 4,
        P1Mod | P2 => 8,
        P2Mod => 32,
        P1Oracle => 2u64 << (2 * config.n),
        P2Oracle => 8u64 << (2 * config.n),
    }
}

/// Exact acceptance probability of `config`, enumerating challenges, oracle
/// bits on queried inputs, and every measurement branch.
pub fn exact_success(config: &ScenarioConfig) -> Result<ExactResult, AnalysisError> {
    config.validate()?;
    if challenge_space(config) > MAX_BRANCHES {
        return Err(AnalysisError::BranchExplosion { max: MAX_BRANCHES });
    }
    enumerate(|source| {
        let out = run_round(config, source, None)?;
        Ok(leaf_of_round(&out))
    })
}

/// Exact result with the challenge pinned, for per-challenge distribution
/// checks.
pub fn exact_conditional(
    config: &ScenarioConfig,
    challenge: &Challenge,
) -> Result<ExactResult, AnalysisError> {
    config.validate()?;
    enumerate(|source| {
        let out = run_round(config, source, Some(challenge))?;
        Ok(leaf_of_round(&out))
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo.

/// Wilson 95% score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "empty sample");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the exact endpoints the bound is 0 or 1; don't let rounding in
    // center - half leak past the point estimate.
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Default, Clone, Copy)]
struct TrialCounts {
    accepts: u64,
    late: u64,
    cond: u64,
    accept_and_cond: u64,
    z1: u64,
    z1_and_cond: u64,
}

impl TrialCounts {
    fn merge(self, other: Self) -> Self {
        TrialCounts {
            accepts: self.accepts + other.accepts,
            late: self.late + other.late,
            cond: self.cond + other.cond,
            accept_and_cond: self.accept_and_cond + other.accept_and_cond,
            z1: self.z1 + other.z1,
            z1_and_cond: self.z1_and_cond + other.z1_and_cond,
        }
    }
}

/// Estimate acceptance probability over `trials` independent rounds.
/// Trials run in parallel; each derives its own stream from `(seed, index)`
/// and the merge is associative, so results are reproducible regardless of
/// thread scheduling.
pub fn monte_carlo(
    config: &ScenarioConfig,
    trials: u64,
    seed: u64,
) -> Result<Estimate, AnalysisError> {
    config.validate()?;
    let counts = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut source = RngStream::for_trial(seed, i);
            let out = run_round(config, &mut source, None)?;
            let leaf = leaf_of_round(&out);
            let cond = leaf.cond.unwrap_or(false);
            Ok(TrialCounts {
                accepts: u64::from(leaf.accept),
                late: u64::from(leaf.late),
                cond: u64::from(cond),
                accept_and_cond: u64::from(leaf.accept && cond),
                z1: u64::from(leaf.reported == Some(true)),
                z1_and_cond: u64::from(leaf.reported == Some(true) && cond),
            })
        })
        .try_reduce(TrialCounts::default, |a, b| Ok(a.merge(b)))
        .map_err(|e: SimError| AnalysisError::from(e))?;

    let (ci_lo, ci_hi) = wilson_interval(counts.accepts, trials);
    let n = trials as f64;
    let mut rates = BTreeMap::new();
    rates.insert("cond".into(), counts.cond as f64 / n);
    rates.insert("accept_and_cond".into(), counts.accept_and_cond as f64 / n);
    rates.insert("z1".into(), counts.z1 as f64 / n);
    rates.insert("z1_and_cond".into(), counts.z1_and_cond as f64 / n);
    rates.insert("late".into(), counts.late as f64 / n);
    Ok(Estimate {
        p_hat: counts.accepts as f64 / n,
        ci_lo,
        ci_hi,
        trials,
        successes: counts.accepts,
        seed,
        condition_rates: rates,
    })
}

// ---------------------------------------------------------------------------
// Identification error of the local-measurement strategy.

/// `P_err = |αβ|^2 + |α+β|^2 |α-β|^2 / 4`: the probability that comparing
/// local outcomes in the basis `{(α, β), (-β*, α*)}` misidentifies whether
/// the two challenge qubits carried equal bits.
pub fn inference_error(alpha: Complex64, beta: Complex64) -> Result<f64, AnalysisError> {
    let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
    if (norm_sqr - 1.0).abs() > 1e-9 {
        return Err(AnalysisError::BasisNotNormalized { norm_sqr });
    }
    let prod = (alpha * beta).norm_sqr();
    let plus = (alpha + beta).norm_sqr();
    let minus = (alpha - beta).norm_sqr();
    Ok(prod + 0.25 * plus * minus)
}

/// The same error computed by exhaustive simulation: enumerate challenges
/// and measurement branches, guess "equal bits" exactly when the outcomes
/// agree, and return the misidentification probability.
pub fn inference_error_simulated(
    alpha: Complex64,
    beta: Complex64,
) -> Result<f64, AnalysisError> {
    let basis = [[alpha, beta], [-beta.conj(), alpha.conj()]];
    let result = enumerate(|source| {
        let x0 = source.bit();
        let x1 = source.bit();
        let theta = source.bit();
        let mut engine = crate::qstate::Engine::new();
        let mut state = |x: bool| {
            let q = engine.alloc_basis(x);
            if theta {
                engine.apply_gate(q, crate::qstate::Gate1Q::H).unwrap();
            }
            q
        };
        let q0 = state(x0);
        let q1 = state(x1);
        let m0 = engine.measure_in_basis(q0, &basis, source).unwrap();
        let m1 = engine.measure_in_basis(q1, &basis, source).unwrap();
        let guessed_equal = m0 == m1;
        Ok(Leaf {
            accept: guessed_equal != (x0 == x1), // accept := misidentified
            ..Leaf::default()
        })
    })?;
    Ok(result.probability)
}

// ---------------------------------------------------------------------------
// Parameter sweeps.

/// Which scenario parameter a sweep varies.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    M,
    N,
    Trials,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::M => "m",
            SweepParam::N => "n",
            SweepParam::Trials => "trials",
        }
    }
}

/// One row of a sweep: the parameter value and whichever results the mode
/// asked for.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub param: &'static str,
    pub value: u64,
    pub estimate: Option<Estimate>,
    pub exact: Option<ExactResult>,
}

/// Apply `param = value` to a copy of the template and run it per the
/// template's mode.
pub fn sweep(
    template: &ScenarioConfig,
    param: SweepParam,
    values: &[u64],
) -> Result<Vec<SweepRow>, AnalysisError> {
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut config = template.clone();
        match param {
            SweepParam::M => {
                config.attack = match config.attack {
                    Some(crate::adversaries::AttackKind::P1OracleHybrid { .. }) | None => {
                        Some(crate::adversaries::AttackKind::P1OracleHybrid { m: value })
                    }
                    other => other,
                };
            }
            SweepParam::N => config.n = value as usize,
            SweepParam::Trials => config.trials = value,
        }
        config.validate()?;
        let estimate = match config.mode {
            Mode::Mc | Mode::Both => Some(monte_carlo(&config, config.trials, config.seed)?),
            Mode::Exact => None,
        };
        let exact = match config.mode {
            Mode::Exact | Mode::Both => Some(exact_success(&config)?),
            Mode::Mc => None,
        };
        rows.push(SweepRow {
            param: param.name(),
            value,
            estimate,
            exact,
        });
    }
    Ok(rows)
}
