//! Attack strategies for colluding adversaries E0 and E1.
//!
//! Each attack is a pair of event handlers, one per adversary, that run
//! inside the network's causality constraints: classical coordination
//! crosses the E0–E1 gap at light speed, and a handler may only touch
//! qubits its party currently holds. Pre-shared resources (the entanglement
//! bank, a pre-agreed coin) are set up before the round launches.
//!
//! Teleport-based attacks keep a Pauli frame: a Bell outcome `(k0, k1)` on
//! the sending side leaves the remote half in `X^k0 Z^k1 |ψ>`, and decoding
//! folds `k` into the measured bit via `λ ⊕ k_w`.

mod oracle;
mod p1;
mod p2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::bits::bits_to_uint;
use crate::protocols::{Challenge, OracleTable, ProtocolKind};
use crate::qstate::{Engine, QubitId};
use crate::rng::RandomSource;
use crate::simnet::{Network, PartyHandler, PartyName};

/// Closed enumeration of the implemented attack strategies. Serialized
/// names match the CLI vocabulary.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AttackKind {
    /// Minimum-error discrimination at E0, no entanglement.
    #[serde(rename = "intercept")]
    P1Intercept,
    /// Teleport through one shared pair; decodes x with certainty.
    #[serde(rename = "teleport-1epr")]
    P1Teleport1Epr,
    /// Two labeled pairs defeat the product-basis variant.
    #[serde(rename = "2epr")]
    P1Mod2Epr,
    /// One pair against the product-basis variant: E1 guesses the basis.
    #[serde(rename = "1epr-heuristic")]
    P1Mod1Epr,
    /// Local measurements in a fixed basis `{(α, β), (-β*, α*)}`.
    #[serde(rename = "local")]
    P2LocalMeasure { alpha: [f64; 2], beta: [f64; 2] },
    /// Entanglement swapping: both adversaries Bell-measure against one
    /// shared pair, making the effective projection a Bell state.
    #[serde(rename = "1epr")]
    P2OneEpr,
    /// Five labeled pairs; succeeds when both return teleports come out
    /// correction-free.
    #[serde(rename = "5epr")]
    P2Mod5Epr,
    /// One pair per oracle label: 2^n pairs decode x with certainty.
    #[serde(rename = "2n")]
    P1Oracle2n,
    /// Bank of m <= 2^n labeled pairs, falling back to discrimination when
    /// the drawn label is uncovered.
    #[serde(rename = "hybrid")]
    P1OracleHybrid { m: u64 },
    /// 2^(n+1)+1 pairs against the two-qubit oracle protocol.
    #[serde(rename = "full")]
    P2OracleFull,
    /// Timing-failure baseline: wait for the relayed item, answer late.
    #[serde(rename = "naive-wait")]
    NaiveWait,
}

impl AttackKind {
    pub fn cli_name(&self) -> &'static str {
        match self {
            AttackKind::P1Intercept => "intercept",
            AttackKind::P1Teleport1Epr => "teleport-1epr",
            AttackKind::P1Mod2Epr => "2epr",
            AttackKind::P1Mod1Epr => "1epr-heuristic",
            AttackKind::P2LocalMeasure { .. } => "local",
            AttackKind::P2OneEpr => "1epr",
            AttackKind::P2Mod5Epr => "5epr",
            AttackKind::P1Oracle2n => "2n",
            AttackKind::P1OracleHybrid { .. } => "hybrid",
            AttackKind::P2OracleFull => "full",
            AttackKind::NaiveWait => "naive-wait",
        }
    }

    /// Protocols this strategy is defined against.
    pub fn compatible_protocols(&self) -> Vec<ProtocolKind> {
        match self {
            AttackKind::P1Intercept | AttackKind::P1Teleport1Epr => vec![ProtocolKind::P1],
            AttackKind::P1Mod2Epr | AttackKind::P1Mod1Epr => vec![ProtocolKind::P1Mod],
            AttackKind::P2LocalMeasure { .. } => vec![
                ProtocolKind::P2,
                ProtocolKind::P2Mod,
                ProtocolKind::P2Oracle,
            ],
            AttackKind::P2OneEpr => vec![ProtocolKind::P2],
            AttackKind::P2Mod5Epr => vec![ProtocolKind::P2Mod],
            AttackKind::P1Oracle2n | AttackKind::P1OracleHybrid { .. } => {
                vec![ProtocolKind::P1Oracle]
            }
            AttackKind::P2OracleFull => vec![ProtocolKind::P2Oracle],
            AttackKind::NaiveWait => ProtocolKind::ALL.to_vec(),
        }
    }

    pub fn compatible_with(&self, protocol: ProtocolKind) -> bool {
        self.compatible_protocols().contains(&protocol)
    }

    /// Entangled pairs this strategy shares before the round.
    pub fn bank_size(&self, n: usize) -> u64 {
        match self {
            AttackKind::P1Intercept | AttackKind::P2LocalMeasure { .. } | AttackKind::NaiveWait => 0,
            AttackKind::P1Teleport1Epr | AttackKind::P1Mod1Epr | AttackKind::P2OneEpr => 1,
            AttackKind::P1Mod2Epr => 2,
            AttackKind::P2Mod5Epr => 5,
            AttackKind::P1Oracle2n => 1 << n,
            AttackKind::P1OracleHybrid { m } => *m,
            AttackKind::P2OracleFull => (1 << (n + 1)) + 1,
        }
    }
}

/// Label of one shared pair: a plain index, or the `(b0, b1)` scheme used
/// against the two-qubit oracle protocol.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub enum PairLabel {
    Plain(u64),
    Tagged(bool, u64),
}

/// The adversaries' pre-shared entangled pairs, labeled and with one half
/// held on each side. The label map is public coordination data agreed
/// before the round; the qubit halves stay with their owners.
#[derive(Debug)]
pub struct EntanglementBank {
    pairs: BTreeMap<PairLabel, (QubitId, QubitId)>,
    touched: RefCell<BTreeSet<PairLabel>>,
}

impl EntanglementBank {
    /// Allocate one EPR pair per label; E0 holds the first half.
    pub fn allocate(
        engine: &mut Engine,
        net: &mut Network,
        labels: impl IntoIterator<Item = PairLabel>,
    ) -> Self {
        let mut pairs = BTreeMap::new();
        for label in labels {
            let (a, b) = engine.alloc_epr();
            net.assign_qubit(a, PartyName::E0);
            net.assign_qubit(b, PartyName::E1);
            pairs.insert(label, (a, b));
        }
        EntanglementBank {
            pairs,
            touched: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn size(&self) -> u64 {
        self.pairs.len() as u64
    }

    pub fn labels(&self) -> impl Iterator<Item = PairLabel> + '_ {
        self.pairs.keys().copied()
    }

    pub fn e0_half(&self, label: PairLabel) -> QubitId {
        self.pairs[&label].0
    }

    pub fn e1_half(&self, label: PairLabel) -> QubitId {
        self.pairs[&label].1
    }

    /// Record that a half of `label` was measured this round.
    pub fn touch(&self, label: PairLabel) {
        self.touched.borrow_mut().insert(label);
    }

    /// Pairs with at least one half measured this round.
    pub fn touched_count(&self) -> u32 {
        self.touched.borrow().len() as u32
    }
}

/// Geometry the strategies need for scheduling: the verifier-prover
/// distance and both interception coordinates.
#[derive(Clone, Copy, Debug)]
pub struct AttackGeometry {
    pub d: f64,
    pub e0_pos: f64,
    pub e1_pos: f64,
}

/// A built attack: the two handlers plus the shared bank for accounting.
pub struct AttackHandlers {
    pub e0: Box<dyn PartyHandler>,
    pub e1: Box<dyn PartyHandler>,
    pub bank: Rc<EntanglementBank>,
}

/// Instantiate `kind` against `protocol`: allocate the bank, draw pre-shared
/// randomness, and wire both handlers.
///
/// `exact_hint` carries the round's challenge in exhaustive-enumeration mode
/// so the oracle attacks can coalesce outcome-irrelevant junk measurements
/// (every skipped draw is uniform and unused by any accept decision; Monte
/// Carlo runs never set it and measure everything).
#[allow(clippy::too_many_arguments)]
pub fn build_attack(
    kind: &AttackKind,
    protocol: ProtocolKind,
    n: usize,
    engine: &mut Engine,
    net: &mut Network,
    oracle: Option<Rc<OracleTable>>,
    source: &mut dyn RandomSource,
    exact_hint: Option<&Challenge>,
    geometry: AttackGeometry,
) -> AttackHandlers {
    assert!(
        kind.compatible_with(protocol),
        "attack {kind:?} incompatible with {protocol:?}"
    );
    match kind {
        AttackKind::P1Intercept => {
            let bank = Rc::new(EntanglementBank::allocate(engine, net, []));
            AttackHandlers {
                e0: Box::new(p1::InterceptE0),
                e1: Box::new(p1::InterceptE1),
                bank,
            }
        }
        AttackKind::P1Teleport1Epr => {
            let bank = Rc::new(EntanglementBank::allocate(
                engine,
                net,
                [PairLabel::Plain(0)],
            ));
            AttackHandlers {
                e0: Box::new(p1::TeleportE0::new(bank.clone())),
                e1: Box::new(p1::TeleportE1::new(bank.clone())),
                bank,
            }
        }
        AttackKind::P1Mod2Epr => {
            let bank = Rc::new(EntanglementBank::allocate(
                engine,
                net,
                [PairLabel::Plain(0), PairLabel::Plain(1)],
            ));
            AttackHandlers {
                e0: Box::new(p1::Mod2EprE0::new(bank.clone())),
                e1: Box::new(p1::Mod2EprE1::new(bank.clone())),
                bank,
            }
        }
        AttackKind::P1Mod1Epr => {
            let bank = Rc::new(EntanglementBank::allocate(
                engine,
                net,
                [PairLabel::Plain(0)],
            ));
            AttackHandlers {
                e0: Box::new(p1::Mod1EprE0::new(bank.clone())),
                e1: Box::new(p1::Mod1EprE1::new(bank.clone())),
                bank,
            }
        }
        AttackKind::P2LocalMeasure { alpha, beta } => {
            let bank = Rc::new(EntanglementBank::allocate(engine, net, []));
            let alpha = Complex64::new(alpha[0], alpha[1]);
            let beta = Complex64::new(beta[0], beta[1]);
            // Pre-agreed coin used to report z=1 on half the disagreements.
            let coin = source.bit();
            AttackHandlers {
                e0: Box::new(p2::LocalMeasure::new(
                    PartyName::E0,
                    alpha,
                    beta,
                    coin,
                )),
                e1: Box::new(p2::LocalMeasure::new(
                    PartyName::E1,
                    alpha,
                    beta,
                    coin,
                )),
                bank,
            }
        }
        AttackKind::P2OneEpr => {
            let bank = Rc::new(EntanglementBank::allocate(
                engine,
                net,
                [PairLabel::Plain(0)],
            ));
            AttackHandlers {
                e0: Box::new(p2::OneEpr::new(PartyName::E0, bank.clone())),
                e1: Box::new(p2::OneEpr::new(PartyName::E1, bank.clone())),
                bank,
            }
        }
        AttackKind::P2Mod5Epr => {
            let bank = Rc::new(EntanglementBank::allocate(
                engine,
                net,
                (0..5).map(PairLabel::Plain),
            ));
            AttackHandlers {
                e0: Box::new(p2::Mod5EprE0::new(bank.clone(), geometry)),
                e1: Box::new(p2::Mod5EprE1::new(bank.clone())),
                bank,
            }
        }
        AttackKind::P1Oracle2n | AttackKind::P1OracleHybrid { .. } => {
            let m = match kind {
                AttackKind::P1OracleHybrid { m } => *m,
                _ => 1 << n,
            };
            let bank = Rc::new(EntanglementBank::allocate(
                engine,
                net,
                (0..m).map(PairLabel::Plain),
            ));
            let oracle = oracle.expect("oracle attack needs the shared table");
            let hint = exact_hint.and_then(real_label_p1);
            AttackHandlers {
                e0: Box::new(oracle::P1OracleE0::new(m, n, bank.clone(), oracle.clone())),
                e1: Box::new(oracle::P1OracleE1::new(m, n, bank.clone(), oracle, hint)),
                bank,
            }
        }
        AttackKind::P2OracleFull => {
            let labels = std::iter::once(PairLabel::Plain(0)).chain(
                [false, true]
                    .into_iter()
                    .flat_map(|b0| (0..1u64 << n).map(move |b1| PairLabel::Tagged(b0, b1))),
            );
            let bank = Rc::new(EntanglementBank::allocate(engine, net, labels));
            let oracle = oracle.expect("oracle attack needs the shared table");
            let hint = exact_hint.and_then(real_label_p2);
            AttackHandlers {
                e0: Box::new(oracle::P2OracleE0::new(
                    n,
                    bank.clone(),
                    oracle,
                    geometry,
                    hint,
                )),
                e1: Box::new(oracle::P2OracleE1::new(n, bank.clone())),
                bank,
            }
        }
        AttackKind::NaiveWait => {
            let bank = Rc::new(EntanglementBank::allocate(engine, net, []));
            AttackHandlers {
                e0: Box::new(p1::NaiveWaitE0::new(protocol, oracle)),
                e1: Box::new(p1::NaiveWaitE1),
                bank,
            }
        }
    }
}

fn real_label_p1(challenge: &Challenge) -> Option<u64> {
    match challenge {
        Challenge::P1Oracle { theta0, .. } => Some(bits_to_uint(theta0)),
        _ => None,
    }
}

fn real_label_p2(challenge: &Challenge) -> Option<u64> {
    match challenge {
        Challenge::P2Oracle { y1, .. } => Some(bits_to_uint(y1)),
        _ => None,
    }
}
