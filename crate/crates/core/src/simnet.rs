//! 1-D geometry, light-speed message scheduling and deadline verdicts.
//!
//! All parties sit on a line with the verifiers at coordinates `0` and `2d`
//! and the prover position at `d`. With `c = 1`, a message emitted at
//! `t_emit` arrives at `t_emit + |dst - src|`, exactly. Local computation is
//! instantaneous: handlers run at the delivery time and may emit new
//! messages at that same time, never earlier. A round accepts only when both
//! verifiers hold an expected response by the light-cone deadline
//! `t_launch + 2d`.

use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use thiserror::Error;

use crate::bits::{format_bits, BitString};
use crate::qstate::{Engine, EngineError, Gate1Q, QubitId};
use crate::rng::RandomSource;

/// Deadline comparisons allow this much slack so that arrivals at the exact
/// light-cone boundary survive floating-point rounding.
pub const DEADLINE_SLACK: f64 = 1e-12;

/// A coordinate on the verification line, in units of light-time.
#[derive(Clone, Copy, PartialEq, PartialOrd, Debug, Serialize)]
pub struct Position(pub f64);

impl Position {
    pub fn coord(self) -> f64 {
        self.0
    }

    pub fn distance(self, other: Position) -> f64 {
        (self.0 - other.0).abs()
    }
}

/// The five possible parties of a round.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub enum PartyName {
    V0,
    V1,
    P,
    E0,
    E1,
}

impl PartyName {
    /// 0 for V0, 1 for V1, None otherwise.
    pub fn verifier_index(self) -> Option<usize> {
        match self {
            PartyName::V0 => Some(0),
            PartyName::V1 => Some(1),
            _ => None,
        }
    }
}

impl std::fmt::Display for PartyName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Message content: classical bits, a qubit handle, or a composite of both.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Bits(BitString),
    Qubit(QubitId),
    Composite(Vec<Payload>),
}

impl Payload {
    pub fn bit(b: bool) -> Self {
        Payload::Bits(vec![b])
    }

    pub fn as_bits(&self) -> Option<&BitString> {
        match self {
            Payload::Bits(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_qubit(&self) -> Option<QubitId> {
        match self {
            Payload::Qubit(q) => Some(*q),
            _ => None,
        }
    }

    pub fn parts(&self) -> &[Payload] {
        match self {
            Payload::Composite(v) => v,
            _ => std::slice::from_ref(self),
        }
    }

    /// All qubit handles contained anywhere in the payload.
    pub fn qubits(&self) -> Vec<QubitId> {
        match self {
            Payload::Bits(_) => vec![],
            Payload::Qubit(q) => vec![*q],
            Payload::Composite(v) => v.iter().flat_map(|p| p.qubits()).collect(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Payload::Bits(_) => "classical",
            Payload::Qubit(_) => "qubit",
            Payload::Composite(_) => "composite",
        }
    }
}

impl Serialize for Payload {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            Payload::Bits(b) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("bits", &format_bits(b))?;
                m.end()
            }
            Payload::Qubit(q) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("qubit", &q.raw())?;
                m.end()
            }
            Payload::Composite(v) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("parts", v)?;
                m.end()
            }
        }
    }
}

/// A timestamped message in flight between two positioned parties.
#[derive(Clone, Debug, Serialize)]
pub struct Message {
    pub src: PartyName,
    pub dst: PartyName,
    pub payload: Payload,
    pub t_emit: f64,
    pub t_arrive: f64,
}

/// One delivered event, as recorded in the transcript.
#[derive(Clone, Debug, Serialize)]
pub struct EventRecord {
    pub t: f64,
    pub src: PartyName,
    pub dst: PartyName,
    pub kind: &'static str,
    pub payload: Payload,
}

/// A verifier's recorded response.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Response {
    pub value: bool,
    pub t_arrive: f64,
}

/// Per-round side-channel data recorded by strategy handlers: teleportation
/// outcomes, measured bit vectors, the reported answer and the
/// success-branch condition. Not visible to any party; used by analysis and
/// written to the JSON transcript.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Telemetry {
    /// Labeled Bell outcomes, e.g. "k", "k1" (k'), "k2" (k'').
    pub bell: BTreeMap<&'static str, [bool; 2]>,
    /// Measured bit vector λ where an attack produces one.
    pub lambda: Option<BitString>,
    /// E0's and E1's local measurement outcomes, for strategies built on
    /// per-side projective measurements.
    pub local_outcomes: [Option<bool>; 2],
    /// The value the strategy reported to the verifiers.
    pub reported: Option<bool>,
    /// Attack-specific success condition (e.g. k' = k'' = 0).
    pub cond_ok: Option<bool>,
    /// Entangled pairs consumed this round (at least one half measured).
    pub pairs_consumed: u32,
    /// Distinct random-oracle inputs queried this round.
    pub oracle_queries: u32,
}

/// Everything that happened in one protocol round.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RoundTranscript {
    pub t_launch: f64,
    pub events: Vec<EventRecord>,
    /// First response received by V0 and V1.
    pub responses: [Option<Response>; 2],
    pub telemetry: Telemetry,
}

impl RoundTranscript {
    /// One JSON object per delivered event.
    pub fn to_json_lines(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("event serializes"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Why a round was accepted or rejected.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    Ok,
    Late,
    WrongAnswer,
    Missing,
}

/// Outcome of the verifiers' deadline-and-consistency check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Verdict {
    pub accept: bool,
    pub reason: Reason,
    /// Individual verdicts for V0 and V1.
    pub per_verifier: [Reason; 2],
}

/// Apply the acceptance rule: both verifiers must have received a response
/// satisfying their predicate no later than `t_launch + 2d` (plus
/// floating-point slack).
pub fn verdict(
    transcript: &RoundTranscript,
    expected: [&dyn Fn(bool) -> bool; 2],
    t_launch: f64,
    d: f64,
) -> Verdict {
    let deadline = t_launch + 2.0 * d + DEADLINE_SLACK;
    let mut per = [Reason::Ok; 2];
    for i in 0..2 {
        per[i] = match transcript.responses[i] {
            None => Reason::Missing,
            Some(r) if r.t_arrive > deadline => Reason::Late,
            Some(r) if !expected[i](r.value) => Reason::WrongAnswer,
            Some(_) => Reason::Ok,
        };
    }
    let accept = per == [Reason::Ok, Reason::Ok];
    let reason = [Reason::Missing, Reason::Late, Reason::WrongAnswer]
        .into_iter()
        .find(|r| per.contains(r))
        .unwrap_or(Reason::Ok);
    Verdict {
        accept,
        reason,
        per_verifier: per,
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{party} emitted a message at t={t_emit} before its local time {now}")]
    CausalityViolation {
        party: PartyName,
        t_emit: f64,
        now: f64,
    },
    #[error("{party} does not own qubit {qubit:?}")]
    QubitNotOwned { party: PartyName, qubit: QubitId },
    #[error("no handler registered for {0}")]
    NoHandler(PartyName),
    #[error("party {0} is not part of this round")]
    UnknownParty(PartyName),
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Owner {
    Party(PartyName),
    InFlight,
}

#[derive(Debug)]
struct Queued {
    t_arrive: f64,
    seq: u64,
    msg: Message,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // Reversed so BinaryHeap pops the earliest (t_arrive, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .t_arrive
            .total_cmp(&self.t_arrive)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Positions, routing, the in-flight message queue, qubit ownership and the
/// growing transcript of one round.
#[derive(Debug)]
pub struct Network {
    positions: BTreeMap<PartyName, Position>,
    /// Interception: messages from `src` addressed to the prover position
    /// are delivered to the mapped party instead.
    intercept: BTreeMap<PartyName, PartyName>,
    queue: BinaryHeap<Queued>,
    next_seq: u64,
    now: f64,
    owners: BTreeMap<QubitId, Owner>,
    pub transcript: RoundTranscript,
}

impl Network {
    pub fn new(t_launch: f64) -> Self {
        Network {
            positions: BTreeMap::new(),
            intercept: BTreeMap::new(),
            queue: BinaryHeap::new(),
            next_seq: 0,
            now: f64::NEG_INFINITY,
            owners: BTreeMap::new(),
            transcript: RoundTranscript {
                t_launch,
                ..RoundTranscript::default()
            },
        }
    }

    pub fn add_party(&mut self, name: PartyName, pos: Position) {
        self.positions.insert(name, pos);
    }

    pub fn position(&self, name: PartyName) -> Result<Position, SimError> {
        self.positions
            .get(&name)
            .copied()
            .ok_or(SimError::UnknownParty(name))
    }

    /// Route messages addressed to the prover from `src` to `actual`
    /// (adversary interception on the respective segment).
    pub fn intercept_from(&mut self, src: PartyName, actual: PartyName) {
        self.intercept.insert(src, actual);
    }

    /// Record that `owner` holds `q` (setup-time assignment).
    pub fn assign_qubit(&mut self, q: QubitId, owner: PartyName) {
        self.owners.insert(q, Owner::Party(owner));
    }

    pub fn owner_of(&self, q: QubitId) -> Option<PartyName> {
        match self.owners.get(&q) {
            Some(Owner::Party(p)) => Some(*p),
            _ => None,
        }
    }

    fn check_owned(&self, party: PartyName, qubits: &[QubitId]) -> Result<(), SimError> {
        for &q in qubits {
            if self.owner_of(q) != Some(party) {
                return Err(SimError::QubitNotOwned { party, qubit: q });
            }
        }
        Ok(())
    }

    /// Enqueue a message. `t_arrive` is fixed by the geometry:
    /// `t_emit + dis(src, dst)`. Qubit payloads leave the sender's hands
    /// immediately and reach the recipient at delivery.
    pub fn send(
        &mut self,
        src: PartyName,
        dst: PartyName,
        payload: Payload,
        t_emit: f64,
    ) -> Result<Message, SimError> {
        if t_emit < self.now - DEADLINE_SLACK {
            return Err(SimError::CausalityViolation {
                party: src,
                t_emit,
                now: self.now,
            });
        }
        let dst = if dst == PartyName::P {
            self.intercept.get(&src).copied().unwrap_or(dst)
        } else {
            dst
        };
        let qubits = payload.qubits();
        self.check_owned(src, &qubits)?;
        for q in qubits {
            self.owners.insert(q, Owner::InFlight);
        }
        let t_arrive = t_emit + self.position(src)?.distance(self.position(dst)?);
        let msg = Message {
            src,
            dst,
            payload,
            t_emit,
            t_arrive,
        };
        self.queue.push(Queued {
            t_arrive,
            seq: self.next_seq,
            msg: msg.clone(),
        });
        self.next_seq += 1;
        Ok(msg)
    }

    fn pop(&mut self) -> Option<Message> {
        let q = self.queue.pop()?;
        debug_assert!(q.t_arrive >= self.now || self.now == f64::NEG_INFINITY);
        self.now = q.t_arrive;
        for qb in q.msg.payload.qubits() {
            self.owners.insert(qb, Owner::Party(q.msg.dst));
        }
        self.transcript.events.push(EventRecord {
            t: q.t_arrive,
            src: q.msg.src,
            dst: q.msg.dst,
            kind: q.msg.payload.kind(),
            payload: q.msg.payload.clone(),
        });
        Some(q.msg)
    }

    fn record_response(&mut self, verifier: PartyName, value: bool, t: f64) {
        if let Some(i) = verifier.verifier_index() {
            if self.transcript.responses[i].is_none() {
                self.transcript.responses[i] = Some(Response { value, t_arrive: t });
            }
        }
    }
}

/// What a handler sees when a message is delivered to it: its own clock and
/// name, the shared quantum engine (ownership-checked), the round's
/// randomness, and the network for sending.
pub struct Ctx<'a> {
    pub me: PartyName,
    pub now: f64,
    pub engine: &'a mut Engine,
    pub source: &'a mut dyn RandomSource,
    pub net: &'a mut Network,
}

impl Ctx<'_> {
    /// Send `payload` to `dst` now (instantaneous local processing).
    pub fn send(&mut self, dst: PartyName, payload: Payload) -> Result<(), SimError> {
        self.net.send(self.me, dst, payload, self.now)?;
        Ok(())
    }

    /// Schedule a local wake-up for this party at time `t >= now`.
    pub fn note_to_self_at(&mut self, t: f64, tag: BitString) -> Result<(), SimError> {
        if t < self.now - DEADLINE_SLACK {
            return Err(SimError::CausalityViolation {
                party: self.me,
                t_emit: t,
                now: self.now,
            });
        }
        // Zero-distance delivery to self; arrives at t.
        let seq = self.net.next_seq;
        self.net.next_seq += 1;
        self.net.queue.push(Queued {
            t_arrive: t,
            seq,
            msg: Message {
                src: self.me,
                dst: self.me,
                payload: Payload::Bits(tag),
                t_emit: t,
                t_arrive: t,
            },
        });
        Ok(())
    }

    /// Record this verifier's response value (first one wins).
    pub fn record_response(&mut self, value: bool) {
        self.net.record_response(self.me, value, self.now);
    }

    pub fn telemetry(&mut self) -> &mut Telemetry {
        &mut self.net.transcript.telemetry
    }

    fn claim(&self, qubits: &[QubitId]) -> Result<(), SimError> {
        self.net.check_owned(self.me, qubits)
    }

    // Ownership-checked engine operations: a party may only touch qubits it
    // currently holds.

    pub fn apply_gate(&mut self, q: QubitId, g: Gate1Q) -> Result<(), SimError> {
        self.claim(&[q])?;
        Ok(self.engine.apply_gate(q, g)?)
    }

    pub fn measure_basis(&mut self, q: QubitId, theta: bool) -> Result<bool, SimError> {
        self.claim(&[q])?;
        Ok(self.engine.measure_basis(q, theta, self.source)?)
    }

    pub fn min_error_measure(&mut self, q: QubitId) -> Result<bool, SimError> {
        self.claim(&[q])?;
        Ok(self.engine.min_error_measure(q, self.source)?)
    }

    pub fn measure_in_basis(
        &mut self,
        q: QubitId,
        basis: &[[num_complex::Complex64; 2]; 2],
    ) -> Result<bool, SimError> {
        self.claim(&[q])?;
        Ok(self.engine.measure_in_basis(q, basis, self.source)?)
    }

    pub fn bell_measure(
        &mut self,
        q1: QubitId,
        q2: QubitId,
    ) -> Result<crate::qstate::BellOutcome, SimError> {
        self.claim(&[q1, q2])?;
        Ok(self.engine.bell_measure(q1, q2, self.source)?)
    }

    pub fn project_psi_plus(&mut self, q1: QubitId, q2: QubitId) -> Result<bool, SimError> {
        self.claim(&[q1, q2])?;
        Ok(self.engine.project_psi_plus(q1, q2, self.source)?)
    }
}

/// A party's event callback.
pub trait PartyHandler {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError>;
}

/// One round: a network plus registered handlers and the shared engine.
pub struct Round {
    pub net: Network,
    pub engine: Engine,
    handlers: BTreeMap<PartyName, Box<dyn PartyHandler>>,
}

impl Round {
    pub fn new(net: Network, engine: Engine) -> Self {
        Round {
            net,
            engine,
            handlers: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: PartyName, handler: Box<dyn PartyHandler>) {
        self.handlers.insert(name, handler);
    }

    /// Drive the event loop until no messages remain, then hand back the
    /// transcript. Events are processed in nondecreasing time order; ties
    /// break by insertion sequence.
    pub fn run(mut self, source: &mut dyn RandomSource) -> Result<RoundTranscript, SimError> {
        while let Some(msg) = self.net.pop() {
            let mut handler = self
                .handlers
                .remove(&msg.dst)
                .ok_or(SimError::NoHandler(msg.dst))?;
            let mut ctx = Ctx {
                me: msg.dst,
                now: msg.t_arrive,
                engine: &mut self.engine,
                source,
                net: &mut self.net,
            };
            let res = handler.on_message(&mut ctx, &msg);
            self.handlers.insert(msg.dst, handler);
            res?;
        }
        Ok(self.net.transcript)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn line(d: f64) -> Network {
        let mut net = Network::new(0.0);
        net.add_party(PartyName::V0, Position(0.0));
        net.add_party(PartyName::V1, Position(2.0 * d));
        net.add_party(PartyName::P, Position(d));
        net.add_party(PartyName::E0, Position(d / 2.0));
        net.add_party(PartyName::E1, Position(1.5 * d));
        net
    }

    #[test]
    fn arrival_times_follow_distance() {
        let mut net = line(1.0);
        let m = net
            .send(PartyName::V0, PartyName::P, Payload::bit(false), 0.0)
            .unwrap();
        assert_eq!(m.t_arrive, 1.0);

        let m = net
            .send(PartyName::E0, PartyName::E1, Payload::bit(true), 0.5)
            .unwrap();
        assert_eq!(m.t_arrive, 1.5);

        let m = net
            .send(PartyName::P, PartyName::V1, Payload::bit(true), 1.0)
            .unwrap();
        assert_eq!(m.t_arrive, 2.0);

        // A far-verifier answer that waits for a cross message misses the
        // deadline: leaving E1 at 3d/2 reaches V0 at 3d.
        let m = net
            .send(PartyName::E1, PartyName::V0, Payload::bit(true), 1.5)
            .unwrap();
        assert_eq!(m.t_arrive, 3.0);
    }

    #[test]
    fn interception_reroutes_prover_mail() {
        let mut net = line(1.0);
        net.intercept_from(PartyName::V0, PartyName::E0);
        let m = net
            .send(PartyName::V0, PartyName::P, Payload::bit(false), 0.0)
            .unwrap();
        assert_eq!(m.dst, PartyName::E0);
        assert_eq!(m.t_arrive, 0.5);
        // Direct mail is not rerouted.
        let m = net
            .send(PartyName::V0, PartyName::V1, Payload::bit(false), 0.0)
            .unwrap();
        assert_eq!(m.dst, PartyName::V1);
    }

    #[test]
    fn sending_unowned_qubit_fails() {
        let mut net = line(1.0);
        let mut engine = Engine::new();
        let q = engine.alloc_basis(false);
        net.assign_qubit(q, PartyName::V1);
        let err = net
            .send(PartyName::V0, PartyName::P, Payload::Qubit(q), 0.0)
            .unwrap_err();
        assert!(matches!(err, SimError::QubitNotOwned { .. }));
    }

    #[test]
    fn qubit_ownership_transfers_on_delivery() {
        let mut net = line(1.0);
        let mut engine = Engine::new();
        let q = engine.alloc_basis(false);
        net.assign_qubit(q, PartyName::V0);
        net.send(PartyName::V0, PartyName::E1, Payload::Qubit(q), 0.0)
            .unwrap();
        // In flight: nobody owns it.
        assert_eq!(net.owner_of(q), None);
        let msg = net.pop().unwrap();
        assert_eq!(msg.dst, PartyName::E1);
        assert_eq!(net.owner_of(q), Some(PartyName::E1));
    }

    struct Echo;
    impl PartyHandler for Echo {
        fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
            ctx.send(msg.src, msg.payload.clone())
        }
    }

    struct Recorder;
    impl PartyHandler for Recorder {
        fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
            let v = msg.payload.as_bits().and_then(|b| b.first().copied());
            if let Some(v) = v {
                ctx.record_response(v);
            }
            Ok(())
        }
    }

    #[test]
    fn echo_round_trip_hits_deadline_exactly() {
        let mut net = line(1.0);
        net.send(PartyName::V0, PartyName::P, Payload::bit(true), 0.0)
            .unwrap();
        let mut round = Round::new(net, Engine::new());
        round.register(PartyName::P, Box::new(Echo));
        round.register(PartyName::V0, Box::new(Recorder));
        round.register(PartyName::V1, Box::new(Recorder));
        let mut rng = RngStream::from_seed(0);
        let t = round.run(&mut rng).unwrap();
        let r = t.responses[0].unwrap();
        assert!((r.t_arrive - 2.0).abs() < 1e-12);
        assert!(r.value);
        // Transcript events are time-ordered.
        for w in t.events.windows(2) {
            assert!(w[0].t <= w[1].t);
        }
    }

    #[test]
    fn ties_break_by_insertion_order() {
        let mut net = line(1.0);
        net.send(PartyName::V0, PartyName::V1, Payload::bit(false), 0.0)
            .unwrap();
        net.send(PartyName::V0, PartyName::V1, Payload::bit(true), 0.0)
            .unwrap();
        let first = net.pop().unwrap();
        let second = net.pop().unwrap();
        assert_eq!(first.payload, Payload::bit(false));
        assert_eq!(second.payload, Payload::bit(true));
    }

    struct TimeTraveler;
    impl PartyHandler for TimeTraveler {
        fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
            ctx.net
                .send(ctx.me, msg.src, Payload::bit(false), ctx.now - 1.0)?;
            Ok(())
        }
    }

    #[test]
    fn causality_violation_aborts_round() {
        let mut net = line(1.0);
        net.send(PartyName::V0, PartyName::P, Payload::bit(false), 0.0)
            .unwrap();
        let mut round = Round::new(net, Engine::new());
        round.register(PartyName::P, Box::new(TimeTraveler));
        let mut rng = RngStream::from_seed(0);
        let err = round.run(&mut rng).unwrap_err();
        assert!(matches!(err, SimError::CausalityViolation { .. }));
    }

    #[test]
    fn verdict_cases() {
        let ok = |_: bool| true;
        let want_true = |v: bool| v;
        let mk = |r0: Option<(bool, f64)>, r1: Option<(bool, f64)>| RoundTranscript {
            t_launch: 0.0,
            events: vec![],
            responses: [
                r0.map(|(value, t_arrive)| Response { value, t_arrive }),
                r1.map(|(value, t_arrive)| Response { value, t_arrive }),
            ],
            telemetry: Telemetry::default(),
        };

        // On-time, correct.
        let v = verdict(
            &mk(Some((true, 2.0)), Some((true, 2.0))),
            [&want_true, &want_true],
            0.0,
            1.0,
        );
        assert!(v.accept);
        assert_eq!(v.reason, Reason::Ok);

        // On-time but wrong at V1.
        let v = verdict(
            &mk(Some((true, 2.0)), Some((false, 2.0))),
            [&want_true, &want_true],
            0.0,
            1.0,
        );
        assert!(!v.accept);
        assert_eq!(v.reason, Reason::WrongAnswer);

        // Correct but a quarter-leg late.
        let v = verdict(
            &mk(Some((true, 2.0)), Some((true, 2.25))),
            [&want_true, &want_true],
            0.0,
            1.0,
        );
        assert!(!v.accept);
        assert_eq!(v.reason, Reason::Late);
        assert_eq!(v.per_verifier, [Reason::Ok, Reason::Late]);

        // Missing one response.
        let v = verdict(&mk(Some((true, 2.0)), None), [&ok, &ok], 0.0, 1.0);
        assert!(!v.accept);
        assert_eq!(v.reason, Reason::Missing);

        // Exactly at the boundary passes.
        let v = verdict(
            &mk(Some((true, 2.0 + 5e-13)), Some((true, 2.0))),
            [&ok, &ok],
            0.0,
            1.0,
        );
        assert!(v.accept);
    }
}
