//! Scenario wiring: protocol + attack + geometry -> one runnable round.

use serde::{Deserialize, Serialize};
use std::rc::Rc;
use thiserror::Error;

use crate::adversaries::{build_attack, AttackGeometry, AttackKind};
use crate::protocols::{
    accept_predicate, draw_challenge, prepare_items, Challenge, HonestProver, OracleTable,
    ProtocolKind, Verifier,
};
use crate::qstate::Engine;
use crate::rng::{splitmix64, RandomSource};
use crate::simnet::{verdict, Network, PartyName, Position, Round, RoundTranscript, SimError, Verdict};

const ORACLE_SEED_SALT: u64 = 0x0f0e_1d2c_3b4a_5968;

/// Seed of the fixed random-oracle table a sampled run of `config` uses,
/// for oracle protocols. Recorded in reports so a run can be reproduced.
pub fn oracle_seed(config: &ScenarioConfig) -> Option<u64> {
    config
        .protocol
        .uses_oracle()
        .then(|| splitmix64(config.seed ^ ORACLE_SEED_SALT))
}

/// How results are computed.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Mc,
    Exact,
    Both,
}

/// Full description of a runnable scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub protocol: ProtocolKind,
    /// `None` runs the honest prover.
    pub attack: Option<AttackKind>,
    /// Verifier-to-prover distance (V0 at 0, V1 at 2d).
    pub d: f64,
    /// Adversary coordinates; defaults are the segment midpoints.
    pub e0_pos: f64,
    pub e1_pos: f64,
    /// Oracle input half-width.
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub mode: Mode,
}

impl ScenarioConfig {
    pub fn new(protocol: ProtocolKind) -> Self {
        ScenarioConfig {
            protocol,
            attack: None,
            d: 1.0,
            e0_pos: 0.5,
            e1_pos: 1.5,
            n: 3,
            trials: 100_000,
            seed: 0,
            mode: Mode::Mc,
        }
    }

    pub fn with_attack(mut self, attack: AttackKind) -> Self {
        self.attack = Some(attack);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    /// Check cross-field consistency; returns the normalized config.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(ConfigError::Distance(self.d));
        }
        if !(self.e0_pos > 0.0 && self.e0_pos < self.d) {
            return Err(ConfigError::E0Position {
                pos: self.e0_pos,
                d: self.d,
            });
        }
        if !(self.e1_pos > self.d && self.e1_pos < 2.0 * self.d) {
            return Err(ConfigError::E1Position {
                pos: self.e1_pos,
                d: self.d,
            });
        }
        if self.protocol.uses_oracle() && !(1..=16).contains(&self.n) {
            return Err(ConfigError::OracleWidth(self.n));
        }
        if self.trials == 0 {
            return Err(ConfigError::Trials);
        }
        if let Some(attack) = &self.attack {
            if !attack.compatible_with(self.protocol) {
                return Err(ConfigError::AttackProtocolMismatch {
                    attack: attack.cli_name().into(),
                    protocol: self.protocol.cli_name().into(),
                    expected: attack
                        .compatible_protocols()
                        .iter()
                        .map(|p| p.cli_name())
                        .collect::<Vec<_>>()
                        .join(", "),
                });
            }
            if let AttackKind::P1OracleHybrid { m } = attack {
                let max = 1u64 << self.n;
                if *m > max {
                    return Err(ConfigError::BankTooLarge { m: *m, max });
                }
            }
            if let AttackKind::P2LocalMeasure { alpha, beta } = attack {
                let norm = alpha[0] * alpha[0]
                    + alpha[1] * alpha[1]
                    + beta[0] * beta[0]
                    + beta[1] * beta[1];
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(ConfigError::BasisNotNormalized { norm_sqr: norm });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("attack/protocol mismatch: attack '{attack}' does not apply to protocol '{protocol}' (expected one of: {expected})")]
    AttackProtocolMismatch {
        attack: String,
        protocol: String,
        expected: String,
    },
    #[error("E0 must lie in (0, d): got {pos} with d = {d}")]
    E0Position { pos: f64, d: f64 },
    #[error("E1 must lie in (d, 2d): got {pos} with d = {d}")]
    E1Position { pos: f64, d: f64 },
    #[error("d must be positive and finite, got {0}")]
    Distance(f64),
    #[error("oracle width n must be in 1..=16, got {0}")]
    OracleWidth(usize),
    #[error("hybrid bank size m = {m} exceeds 2^n = {max}")]
    BankTooLarge { m: u64, max: u64 },
    #[error("measurement basis is not normalized: |α|^2 + |β|^2 = {norm_sqr}")]
    BasisNotNormalized { norm_sqr: f64 },
    #[error("trials must be >= 1")]
    Trials,
}

/// Everything produced by a single round.
#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub verdict: Verdict,
    pub transcript: RoundTranscript,
    pub challenge: Challenge,
}

/// Run one complete round of `config`.
///
/// All randomness (challenge, oracle bits when enumerating, shared coins,
/// Born-rule outcomes) flows through `source`. With a sampling source the
/// oracle is a fixed seeded table derived from `config.seed`; with an
/// enumerating source the oracle is lazily sampled so its bits become
/// branches, and attack handlers receive the challenge as a coalescing
/// hint.
///
/// Pre-round coordination costs nothing: the verifiers agree on the
/// challenge and the adversaries share entanglement before the launch time,
/// off the simulated clock.
pub fn run_round(
    config: &ScenarioConfig,
    source: &mut dyn RandomSource,
    fixed_challenge: Option<&Challenge>,
) -> Result<RoundOutcome, SimError> {
    let t_launch = 0.0;
    let d = config.d;
    let mut engine = Engine::new();
    let mut net = Network::new(t_launch);
    net.add_party(PartyName::V0, Position(0.0));
    net.add_party(PartyName::V1, Position(2.0 * d));

    let oracle = oracle_seed(config).map(|seed| {
        Rc::new(if source.is_enumerating() {
            OracleTable::lazy(config.n)
        } else {
            OracleTable::seeded(seed, config.n)
        })
    });

    let challenge = match fixed_challenge {
        Some(c) => c.clone(),
        None => draw_challenge(config.protocol, config.n, source),
    };

    // Pre-round: adversaries position themselves and share entanglement.
    let attack = if let Some(kind) = &config.attack {
        net.add_party(PartyName::E0, Position(config.e0_pos));
        net.add_party(PartyName::E1, Position(config.e1_pos));
        net.intercept_from(PartyName::V0, PartyName::E0);
        net.intercept_from(PartyName::V1, PartyName::E1);
        let hint = if source.is_enumerating() {
            Some(&challenge)
        } else {
            None
        };
        Some(build_attack(
            kind,
            config.protocol,
            config.n,
            &mut engine,
            &mut net,
            oracle.clone(),
            source,
            hint,
            AttackGeometry {
                d,
                e0_pos: config.e0_pos,
                e1_pos: config.e1_pos,
            },
        ))
    } else {
        net.add_party(PartyName::P, Position(d));
        None
    };

    // Launch: both items leave the verifiers at t_launch.
    let (item0, item1) = prepare_items(
        config.protocol,
        &challenge,
        &mut engine,
        oracle.as_deref(),
        source,
    )?;
    for q in item0.qubits() {
        net.assign_qubit(q, PartyName::V0);
    }
    for q in item1.qubits() {
        net.assign_qubit(q, PartyName::V1);
    }
    net.send(PartyName::V0, PartyName::P, item0, t_launch)?;
    net.send(PartyName::V1, PartyName::P, item1, t_launch)?;

    let mut round = Round::new(net, engine);
    round.register(PartyName::V0, Box::new(Verifier));
    round.register(PartyName::V1, Box::new(Verifier));
    let bank = match attack {
        Some(handlers) => {
            round.register(PartyName::E0, handlers.e0);
            round.register(PartyName::E1, handlers.e1);
            Some(handlers.bank)
        }
        None => {
            round.register(
                PartyName::P,
                Box::new(HonestProver::new(config.protocol, oracle.clone())),
            );
            None
        }
    };

    let mut transcript = round.run(source)?;
    if let Some(bank) = &bank {
        transcript.telemetry.pairs_consumed = bank.touched_count();
    }
    if let Some(oracle) = &oracle {
        transcript.telemetry.oracle_queries = oracle.distinct_queries();
    }

    // The verifiers judge the responses. For the oracle two-qubit protocol
    // the consistency predicate needs f(y0, y1); the verifiers hold oracle
    // access themselves.
    let oracle_w = if config.protocol == ProtocolKind::P2Oracle {
        let (a, b) = challenge.oracle_inputs().expect("oracle challenge");
        Some(
            oracle
                .as_deref()
                .expect("oracle protocol has a table")
                .query(a, b, source)
                .map_err(SimError::from)?,
        )
    } else {
        None
    };
    let pred = |v: bool| accept_predicate(config.protocol, &challenge, v, oracle_w);
    let verdict = verdict(&transcript, [&pred, &pred], t_launch, d);

    Ok(RoundOutcome {
        verdict,
        transcript,
        challenge,
    })
}
