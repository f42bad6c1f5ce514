//! The six verification protocols: challenge generation, item preparation,
//! honest-prover behaviour, the shared classical random oracle and the
//! per-protocol acceptance predicates.
//!
//! Naming follows the protocol families:
//! - `P1` / `P1Mod` / `P1Oracle`: one qubit travels from V0; the prover
//!   measures it in a basis derived from classical bits (directly, as a
//!   product, or through the oracle) and returns the outcome bit.
//! - `P2` / `P2Mod` / `P2Oracle`: both verifiers send a qubit; the prover
//!   (after an optional Hadamard pair) projects onto `|Ψ+>` and reports
//!   whether the projection succeeded.

use serde::{Deserialize, Serialize};
use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::rc::Rc;
use thiserror::Error;

use crate::bits::{bits_to_uint, BitString};
use crate::qstate::{Engine, QubitId};
use crate::rng::{splitmix64, RandomSource};
use crate::simnet::{Ctx, Message, PartyHandler, PartyName, Payload, SimError};

/// Closed enumeration of the implemented protocols.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    P1,
    P1Mod,
    P2,
    P2Mod,
    P1Oracle,
    P2Oracle,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 6] = [
        ProtocolKind::P1,
        ProtocolKind::P1Mod,
        ProtocolKind::P2,
        ProtocolKind::P2Mod,
        ProtocolKind::P1Oracle,
        ProtocolKind::P2Oracle,
    ];

    /// One-qubit protocols return the decoded bit x'; two-qubit protocols
    /// return the projection flag z.
    pub fn is_p1_family(self) -> bool {
        matches!(
            self,
            ProtocolKind::P1 | ProtocolKind::P1Mod | ProtocolKind::P1Oracle
        )
    }

    pub fn uses_oracle(self) -> bool {
        matches!(self, ProtocolKind::P1Oracle | ProtocolKind::P2Oracle)
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            ProtocolKind::P1 => "p1",
            ProtocolKind::P1Mod => "p1-mod",
            ProtocolKind::P2 => "p2",
            ProtocolKind::P2Mod => "p2-mod",
            ProtocolKind::P1Oracle => "p1-oracle",
            ProtocolKind::P2Oracle => "p2-oracle",
        }
    }
}

/// The verifiers' per-round secret randomness.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Challenge {
    P1 {
        x: bool,
        theta: bool,
    },
    P1Mod {
        x: bool,
        theta0: bool,
        theta1: bool,
    },
    P2 {
        x0: bool,
        x1: bool,
        theta: bool,
    },
    P2Mod {
        x0: bool,
        x1: bool,
        theta: bool,
        y0: bool,
        y1: bool,
    },
    P1Oracle {
        x: bool,
        theta0: BitString,
        theta1: BitString,
    },
    P2Oracle {
        x0: bool,
        x1: bool,
        theta: bool,
        y0: BitString,
        y1: BitString,
    },
}

impl Challenge {
    pub fn kind(&self) -> ProtocolKind {
        match self {
            Challenge::P1 { .. } => ProtocolKind::P1,
            Challenge::P1Mod { .. } => ProtocolKind::P1Mod,
            Challenge::P2 { .. } => ProtocolKind::P2,
            Challenge::P2Mod { .. } => ProtocolKind::P2Mod,
            Challenge::P1Oracle { .. } => ProtocolKind::P1Oracle,
            Challenge::P2Oracle { .. } => ProtocolKind::P2Oracle,
        }
    }

    /// The bit the P1-family verifiers compare the response against.
    pub fn expected_x(&self) -> Option<bool> {
        match self {
            Challenge::P1 { x, .. }
            | Challenge::P1Mod { x, .. }
            | Challenge::P1Oracle { x, .. } => Some(*x),
            _ => None,
        }
    }

    /// The pair of n-bit strings fed to the oracle, for oracle protocols.
    pub fn oracle_inputs(&self) -> Option<(&BitString, &BitString)> {
        match self {
            Challenge::P1Oracle { theta0, theta1, .. } => Some((theta0, theta1)),
            Challenge::P2Oracle { y0, y1, .. } => Some((y0, y1)),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("oracle input length mismatch: expected {expected} bits, got {got}")]
    OracleLength { expected: usize, got: usize },
    #[error("challenge does not match protocol {0:?}")]
    ChallengeMismatch(ProtocolKind),
    #[error("prover items incomplete: {0}")]
    MissingItem(&'static str),
}

impl From<ProtocolError> for SimError {
    fn from(e: ProtocolError) -> Self {
        SimError::Malformed(e.to_string())
    }
}

/// Draw a fresh uniform challenge. `n` is the oracle input half-width and is
/// only used by the oracle protocols.
pub fn draw_challenge(kind: ProtocolKind, n: usize, source: &mut dyn RandomSource) -> Challenge {
    match kind {
        ProtocolKind::P1 => Challenge::P1 {
            x: source.bit(),
            theta: source.bit(),
        },
        ProtocolKind::P1Mod => Challenge::P1Mod {
            x: source.bit(),
            theta0: source.bit(),
            theta1: source.bit(),
        },
        ProtocolKind::P2 => Challenge::P2 {
            x0: source.bit(),
            x1: source.bit(),
            theta: source.bit(),
        },
        ProtocolKind::P2Mod => Challenge::P2Mod {
            x0: source.bit(),
            x1: source.bit(),
            theta: source.bit(),
            y0: source.bit(),
            y1: source.bit(),
        },
        ProtocolKind::P1Oracle => Challenge::P1Oracle {
            x: source.bit(),
            theta0: (0..n).map(|_| source.bit()).collect(),
            theta1: (0..n).map(|_| source.bit()).collect(),
        },
        ProtocolKind::P2Oracle => Challenge::P2Oracle {
            x0: source.bit(),
            x1: source.bit(),
            theta: source.bit(),
            y0: (0..n).map(|_| source.bit()).collect(),
            y1: (0..n).map(|_| source.bit()).collect(),
        },
    }
}

/// Classical random oracle `f : {0,1}^2n -> {0,1}` shared by all parties.
///
/// A seeded table derives each output bit from `(seed, input)`; a lazy table
/// samples fresh bits from the round's [`RandomSource`] on first query, which
/// lets exact enumeration branch over exactly the inputs a round touches.
/// Either way, outputs are memoized, so all parties observe one consistent
/// function.
#[derive(Debug)]
pub struct OracleTable {
    seed: Option<u64>,
    n: usize,
    memo: RefCell<BTreeMap<u64, bool>>,
    distinct: Cell<u32>,
}

impl OracleTable {
    pub fn seeded(seed: u64, n: usize) -> Self {
        OracleTable {
            seed: Some(seed),
            n,
            memo: RefCell::new(BTreeMap::new()),
            distinct: Cell::new(0),
        }
    }

    pub fn lazy(n: usize) -> Self {
        OracleTable {
            seed: None,
            n,
            memo: RefCell::new(BTreeMap::new()),
            distinct: Cell::new(0),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Distinct inputs queried so far.
    pub fn distinct_queries(&self) -> u32 {
        self.distinct.get()
    }

    pub fn query(
        &self,
        a: &[bool],
        b: &[bool],
        source: &mut dyn RandomSource,
    ) -> Result<bool, ProtocolError> {
        if a.len() != self.n || b.len() != self.n {
            return Err(ProtocolError::OracleLength {
                expected: self.n,
                got: if a.len() != self.n { a.len() } else { b.len() },
            });
        }
        let key = (bits_to_uint(a) << self.n) | bits_to_uint(b);
        if let Some(&bit) = self.memo.borrow().get(&key) {
            return Ok(bit);
        }
        let bit = match self.seed {
            Some(seed) => splitmix64(seed ^ splitmix64(key.wrapping_add(0x6f4a7c15))) & 1 == 1,
            None => source.bit(),
        };
        self.memo.borrow_mut().insert(key, bit);
        self.distinct.set(self.distinct.get() + 1);
        Ok(bit)
    }
}

/// Prepare `(item0, item1)` exactly as the verifiers send them: `item0`
/// leaves V0, `item1` leaves V1. Qubits are allocated in `engine`; callers
/// assign ownership from the payloads.
pub fn prepare_items(
    kind: ProtocolKind,
    challenge: &Challenge,
    engine: &mut Engine,
    oracle: Option<&OracleTable>,
    source: &mut dyn RandomSource,
) -> Result<(Payload, Payload), ProtocolError> {
    let alloc_state = |engine: &mut Engine, x: bool, h: bool| {
        let q = engine.alloc_basis(x);
        if h {
            engine
                .apply_gate(q, crate::qstate::Gate1Q::H)
                .expect("fresh qubit is live");
        }
        q
    };
    match (kind, challenge) {
        (ProtocolKind::P1, Challenge::P1 { x, theta }) => {
            let q = alloc_state(engine, *x, *theta);
            Ok((Payload::Qubit(q), Payload::bit(*theta)))
        }
        (ProtocolKind::P1Mod, Challenge::P1Mod { x, theta0, theta1 }) => {
            let q = alloc_state(engine, *x, *theta0 && *theta1);
            Ok((
                Payload::Composite(vec![Payload::Qubit(q), Payload::bit(*theta0)]),
                Payload::bit(*theta1),
            ))
        }
        (ProtocolKind::P2, Challenge::P2 { x0, x1, theta }) => {
            let q0 = alloc_state(engine, *x0, *theta);
            let q1 = alloc_state(engine, *x1, *theta);
            Ok((Payload::Qubit(q0), Payload::Qubit(q1)))
        }
        (
            ProtocolKind::P2Mod,
            Challenge::P2Mod {
                x0,
                x1,
                theta,
                y0,
                y1,
            },
        ) => {
            let q0 = alloc_state(engine, *x0, *theta);
            let q1 = alloc_state(engine, *x1, *theta);
            Ok((
                Payload::Composite(vec![Payload::Qubit(q0), Payload::bit(*y0)]),
                Payload::Composite(vec![Payload::Qubit(q1), Payload::bit(*y1)]),
            ))
        }
        (ProtocolKind::P1Oracle, Challenge::P1Oracle { x, theta0, theta1 }) => {
            let oracle = oracle.expect("oracle protocol requires a table");
            let w = oracle.query(theta0, theta1, source)?;
            let q = alloc_state(engine, *x, w);
            Ok((
                Payload::Composite(vec![Payload::Qubit(q), Payload::Bits(theta0.clone())]),
                Payload::Bits(theta1.clone()),
            ))
        }
        (
            ProtocolKind::P2Oracle,
            Challenge::P2Oracle {
                x0,
                x1,
                theta,
                y0,
                y1,
            },
        ) => {
            let q0 = alloc_state(engine, *x0, *theta);
            let q1 = alloc_state(engine, *x1, *theta);
            Ok((
                Payload::Composite(vec![Payload::Qubit(q0), Payload::Bits(y0.clone())]),
                Payload::Composite(vec![Payload::Qubit(q1), Payload::Bits(y1.clone())]),
            ))
        }
        _ => Err(ProtocolError::ChallengeMismatch(kind)),
    }
}

/// Destructure an item into its qubit and classical parts.
pub fn split_item(item: &Payload) -> (Option<QubitId>, Option<&BitString>) {
    let mut qubit = None;
    let mut bits = None;
    for part in item.parts() {
        match part {
            Payload::Qubit(q) => qubit = Some(*q),
            Payload::Bits(b) => bits = Some(b),
            Payload::Composite(_) => {}
        }
    }
    (qubit, bits)
}

/// The honest prover's operation once both items are in hand. Returns x'
/// for the one-qubit family and z for the two-qubit family.
pub fn honest_prover(
    kind: ProtocolKind,
    item0: &Payload,
    item1: &Payload,
    oracle: Option<&OracleTable>,
    engine: &mut Engine,
    source: &mut dyn RandomSource,
) -> Result<bool, ProtocolError> {
    let (q0, bits0) = split_item(item0);
    let (q1, bits1) = split_item(item1);
    let missing = ProtocolError::MissingItem;
    match kind {
        ProtocolKind::P1 => {
            let q = q0.ok_or(missing("qubit from V0"))?;
            let theta = bits1.ok_or(missing("theta from V1"))?[0];
            Ok(engine
                .measure_basis(q, theta, source)
                .expect("delivered qubit is live"))
        }
        ProtocolKind::P1Mod => {
            let q = q0.ok_or(missing("qubit from V0"))?;
            let theta0 = bits0.ok_or(missing("theta0 from V0"))?[0];
            let theta1 = bits1.ok_or(missing("theta1 from V1"))?[0];
            Ok(engine
                .measure_basis(q, theta0 && theta1, source)
                .expect("delivered qubit is live"))
        }
        ProtocolKind::P1Oracle => {
            let q = q0.ok_or(missing("qubit from V0"))?;
            let theta0 = bits0.ok_or(missing("theta0 from V0"))?;
            let theta1 = bits1.ok_or(missing("theta1 from V1"))?;
            let w = oracle
                .expect("oracle protocol requires a table")
                .query(theta0, theta1, source)?;
            Ok(engine
                .measure_basis(q, w, source)
                .expect("delivered qubit is live"))
        }
        ProtocolKind::P2 | ProtocolKind::P2Mod | ProtocolKind::P2Oracle => {
            let a = q0.ok_or(missing("qubit from V0"))?;
            let b = q1.ok_or(missing("qubit from V1"))?;
            let w = match kind {
                ProtocolKind::P2 => false,
                ProtocolKind::P2Mod => {
                    bits0.ok_or(missing("y0 from V0"))?[0] && bits1.ok_or(missing("y1 from V1"))?[0]
                }
                _ => oracle.expect("oracle protocol requires a table").query(
                    bits0.ok_or(missing("y0 from V0"))?,
                    bits1.ok_or(missing("y1 from V1"))?,
                    source,
                )?,
            };
            if w {
                engine
                    .apply_gate(a, crate::qstate::Gate1Q::H)
                    .expect("delivered qubit is live");
                engine
                    .apply_gate(b, crate::qstate::Gate1Q::H)
                    .expect("delivered qubit is live");
            }
            Ok(engine
                .project_psi_plus(a, b, source)
                .expect("delivered qubits are live"))
        }
    }
}

/// Exact probability that the honest prover reports z = 1 for a two-qubit
/// challenge, computed by amplitude contraction. `oracle_w` supplies
/// `f(y0, y1)` for the oracle variant and is ignored otherwise.
pub fn honest_z_distribution(
    kind: ProtocolKind,
    challenge: &Challenge,
    oracle_w: Option<bool>,
) -> f64 {
    let (x0, x1, theta, w) = match (kind, challenge) {
        (ProtocolKind::P2, Challenge::P2 { x0, x1, theta }) => (*x0, *x1, *theta, false),
        (
            ProtocolKind::P2Mod,
            Challenge::P2Mod {
                x0,
                x1,
                theta,
                y0,
                y1,
            },
        ) => (*x0, *x1, *theta, *y0 && *y1),
        (ProtocolKind::P2Oracle, Challenge::P2Oracle { x0, x1, theta, .. }) => (
            *x0,
            *x1,
            *theta,
            oracle_w.expect("oracle protocol needs f(y0, y1)"),
        ),
        _ => panic!("honest_z_distribution is defined for two-qubit challenges"),
    };
    // Single-qubit state H^w H^theta |x> as an amplitude pair.
    let ket = |x: bool| -> [f64; 2] {
        let mut v = if x { [0.0, 1.0] } else { [1.0, 0.0] };
        for flag in [theta, w] {
            if flag {
                v = [FRAC_1_SQRT_2 * (v[0] + v[1]), FRAC_1_SQRT_2 * (v[0] - v[1])];
            }
        }
        v
    };
    let a = ket(x0);
    let b = ket(x1);
    // <Ψ+| (a ⊗ b) = (a1 b0 + a0 b1)/√2.
    let amp = FRAC_1_SQRT_2 * (a[1] * b[0] + a[0] * b[1]);
    amp * amp
}

/// Per-round acceptance of a response value (timing is judged separately by
/// the network verdict). One-qubit family: the reported bit must equal x.
/// Two-qubit family: the reported z must have nonzero honest probability.
pub fn accept_predicate(
    kind: ProtocolKind,
    challenge: &Challenge,
    response: bool,
    oracle_w: Option<bool>,
) -> bool {
    if kind.is_p1_family() {
        challenge.expected_x() == Some(response)
    } else {
        let p1 = honest_z_distribution(kind, challenge, oracle_w);
        let p = if response { p1 } else { 1.0 - p1 };
        p > crate::rng::MIN_BRANCH_PROB
    }
}

/// Event handler for the honest prover: waits for both items, performs the
/// protocol measurement, and broadcasts the result to both verifiers.
pub struct HonestProver {
    kind: ProtocolKind,
    oracle: Option<Rc<OracleTable>>,
    item0: Option<Payload>,
    item1: Option<Payload>,
}

impl HonestProver {
    pub fn new(kind: ProtocolKind, oracle: Option<Rc<OracleTable>>) -> Self {
        HonestProver {
            kind,
            oracle,
            item0: None,
            item1: None,
        }
    }
}

impl PartyHandler for HonestProver {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V0 => self.item0 = Some(msg.payload.clone()),
            PartyName::V1 => self.item1 = Some(msg.payload.clone()),
            other => {
                return Err(SimError::Malformed(format!(
                    "honest prover got mail from {other}"
                )))
            }
        }
        if let (Some(item0), Some(item1)) = (self.item0.clone(), self.item1.clone()) {
            let value = honest_prover(
                self.kind,
                &item0,
                &item1,
                self.oracle.as_deref(),
                ctx.engine,
                ctx.source,
            )?;
            ctx.telemetry().reported = Some(value);
            ctx.send(PartyName::V0, Payload::bit(value))?;
            ctx.send(PartyName::V1, Payload::bit(value))?;
        }
        Ok(())
    }
}

/// Verifier handler: records the first response bit that reaches it.
pub struct Verifier;

impl PartyHandler for Verifier {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        let bits = msg
            .payload
            .as_bits()
            .ok_or_else(|| SimError::Malformed("verifier expects a classical bit".into()))?;
        ctx.record_response(bits[0]);
        Ok(())
    }
}
