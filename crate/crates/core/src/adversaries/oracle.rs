//! Attacks on the random-oracle protocols. The bank grows with the oracle
//! input width: one pair per possible label on the one-qubit variant, and
//! 2^(n+1)+1 pairs on the two-qubit variant.
//!
//! In exhaustive-enumeration mode the handlers accept a hint naming the one
//! label that carries the teleported state. Measurements on the other
//! labels produce uniform bits that no accept decision ever reads, so the
//! hint lets exact mode skip them; Monte Carlo runs never set the hint and
//! measure every pair.

use std::rc::Rc;

use super::{AttackGeometry, EntanglementBank, PairLabel};
use crate::bits::{bits_to_uint, uint_to_bits, BitString};
use crate::protocols::OracleTable;
use crate::qstate::{BellOutcome, Gate1Q};
use crate::simnet::{Ctx, Message, PartyHandler, PartyName, Payload, SimError};

fn expect_bits(msg: &Message) -> Result<&[bool], SimError> {
    msg.payload
        .as_bits()
        .map(Vec::as_slice)
        .ok_or_else(|| SimError::Malformed(format!("expected bits from {}", msg.src)))
}

/// E0 against the one-qubit oracle protocol with a bank covering labels
/// `0..m`. If the drawn θ0 is covered, teleport through that pair;
/// otherwise fall back to minimum-error discrimination.
pub struct P1OracleE0 {
    m: u64,
    n: usize,
    bank: Rc<EntanglementBank>,
    oracle: Rc<OracleTable>,
    theta0: Option<BitString>,
    k: Option<BellOutcome>,
}

impl P1OracleE0 {
    pub fn new(m: u64, n: usize, bank: Rc<EntanglementBank>, oracle: Rc<OracleTable>) -> Self {
        P1OracleE0 {
            m,
            n,
            bank,
            oracle,
            theta0: None,
            k: None,
        }
    }
}

impl PartyHandler for P1OracleE0 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V0 => {
                let (q, bits) = crate::protocols::split_item(&msg.payload);
                let q = q.ok_or_else(|| SimError::Malformed("missing challenge qubit".into()))?;
                let theta0 = bits
                    .ok_or_else(|| SimError::Malformed("missing theta0".into()))?
                    .clone();
                let label = bits_to_uint(&theta0);
                if label < self.m {
                    let k = ctx.bell_measure(q, self.bank.e0_half(PairLabel::Plain(label)))?;
                    self.bank.touch(PairLabel::Plain(label));
                    ctx.telemetry().bell.insert("k", [k.k0, k.k1]);
                    self.k = Some(k);
                    let mut wire = vec![true, k.k0, k.k1];
                    wire.extend_from_slice(&theta0);
                    ctx.send(PartyName::E1, Payload::Bits(wire))?;
                } else {
                    // Uncovered label: discriminate and broadcast the guess.
                    let g = ctx.min_error_measure(q)?;
                    ctx.telemetry().reported = Some(g);
                    ctx.send(PartyName::E1, Payload::Bits(vec![false, g]))?;
                    ctx.send(PartyName::V0, Payload::bit(g))?;
                }
                self.theta0 = Some(theta0);
            }
            PartyName::E1 => {
                let Some(k) = self.k else {
                    return Ok(()); // fallback branch already answered
                };
                let bits = expect_bits(msg)?;
                let theta1 = bits[..self.n].to_vec();
                let lambda = &bits[self.n..];
                let theta0 = self.theta0.as_ref().expect("item precedes E1's reply");
                let w = self.oracle.query(theta0, &theta1, ctx.source)?;
                let x = lambda[bits_to_uint(theta0) as usize] ^ k.k_for_basis(w);
                ctx.send(PartyName::V0, Payload::bit(x))?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// E1 against the one-qubit oracle protocol: measure every banked half in
/// its oracle-determined basis and ship the outcome vector λ.
pub struct P1OracleE1 {
    m: u64,
    n: usize,
    bank: Rc<EntanglementBank>,
    oracle: Rc<OracleTable>,
    hint: Option<u64>,
    theta1: Option<BitString>,
    lambda: Option<Vec<bool>>,
}

impl P1OracleE1 {
    pub fn new(
        m: u64,
        n: usize,
        bank: Rc<EntanglementBank>,
        oracle: Rc<OracleTable>,
        hint: Option<u64>,
    ) -> Self {
        P1OracleE1 {
            m,
            n,
            bank,
            oracle,
            hint,
            theta1: None,
            lambda: None,
        }
    }
}

impl PartyHandler for P1OracleE1 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V1 => {
                let theta1 = expect_bits(msg)?.to_vec();
                let mut lambda = Vec::with_capacity(self.m as usize);
                for a in 0..self.m {
                    if self.hint.is_some_and(|h| h != a) {
                        lambda.push(false);
                        continue;
                    }
                    let w_a = self
                        .oracle
                        .query(&uint_to_bits(a, self.n), &theta1, ctx.source)?;
                    let bit = ctx.measure_basis(self.bank.e1_half(PairLabel::Plain(a)), w_a)?;
                    self.bank.touch(PairLabel::Plain(a));
                    lambda.push(bit);
                }
                ctx.telemetry().lambda = Some(lambda.clone());
                let mut wire = theta1.clone();
                wire.extend_from_slice(&lambda);
                ctx.send(PartyName::E0, Payload::Bits(wire))?;
                self.theta1 = Some(theta1);
                self.lambda = Some(lambda);
            }
            PartyName::E0 => {
                let bits = expect_bits(msg)?;
                if !bits[0] {
                    // Fallback branch: echo E0's guess.
                    ctx.send(PartyName::V1, Payload::bit(bits[1]))?;
                    return Ok(());
                }
                let k = BellOutcome {
                    k0: bits[1],
                    k1: bits[2],
                };
                let theta0 = bits[3..3 + self.n].to_vec();
                let theta1 = self.theta1.as_ref().expect("V1's item precedes E0's reply");
                let lambda = self.lambda.as_ref().expect("V1's item precedes E0's reply");
                let w = self.oracle.query(&theta0, theta1, ctx.source)?;
                let x = lambda[bits_to_uint(&theta0) as usize] ^ k.k_for_basis(w);
                ctx.send(PartyName::V1, Payload::bit(x))?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// E0 against the two-qubit oracle protocol, holding pair 0 plus the
/// `(b0, b1)` channel grid.
pub struct P2OracleE0 {
    n: usize,
    bank: Rc<EntanglementBank>,
    oracle: Rc<OracleTable>,
    geometry: AttackGeometry,
    hint: Option<u64>,
    y0: Option<BitString>,
    k: Option<BellOutcome>,
    success: Option<Vec<bool>>,
    y1: Option<BitString>,
}

impl P2OracleE0 {
    pub fn new(
        n: usize,
        bank: Rc<EntanglementBank>,
        oracle: Rc<OracleTable>,
        geometry: AttackGeometry,
        hint: Option<u64>,
    ) -> Self {
        P2OracleE0 {
            n,
            bank,
            oracle,
            geometry,
            hint,
            y0: None,
            k: None,
            success: None,
            y1: None,
        }
    }

    fn answer_if_ready(&mut self, ctx: &mut Ctx<'_>) -> Result<(), SimError> {
        if let (Some(s), Some(y1)) = (&self.success, &self.y1) {
            let z = s[bits_to_uint(y1) as usize];
            ctx.telemetry().reported = Some(z);
            ctx.send(PartyName::V0, Payload::bit(z))?;
            self.y1 = None;
        }
        Ok(())
    }
}

impl PartyHandler for P2OracleE0 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V0 => {
                let (q, bits) = crate::protocols::split_item(&msg.payload);
                let q = q.ok_or_else(|| SimError::Malformed("missing challenge qubit".into()))?;
                let y0 = bits
                    .ok_or_else(|| SimError::Malformed("missing y0".into()))?
                    .clone();
                let k = ctx.bell_measure(q, self.bank.e0_half(PairLabel::Plain(0)))?;
                self.bank.touch(PairLabel::Plain(0));
                ctx.telemetry().bell.insert("k", [k.k0, k.k1]);
                self.y0 = Some(y0);
                self.k = Some(k);
                let g = self.geometry;
                let t = (2.0 * g.d - g.e1_pos).max(ctx.now);
                ctx.note_to_self_at(t, vec![])?;
            }
            PartyName::E0 => {
                // Wake-up after E1's return teleports: fix the Pauli frame,
                // apply the oracle-indexed Hadamards, Bell-measure each
                // channel pair.
                let k = self.k.expect("wake-up follows the interception");
                let y0 = self.y0.clone().expect("wake-up follows the interception");
                let mut success = Vec::with_capacity(1 << self.n);
                for b1 in 0..(1u64 << self.n) {
                    if self.hint.is_some_and(|h| h != b1) {
                        success.push(false);
                        continue;
                    }
                    let ch0 = self.bank.e0_half(PairLabel::Tagged(false, b1));
                    let ch1 = self.bank.e0_half(PairLabel::Tagged(true, b1));
                    // The returned challenge state sits on the (1, b1)
                    // channel; undo this side's teleport correction there.
                    if k.k1 {
                        ctx.apply_gate(ch1, Gate1Q::Z)?;
                    }
                    if k.k0 {
                        ctx.apply_gate(ch1, Gate1Q::X)?;
                    }
                    let w = self
                        .oracle
                        .query(&y0, &uint_to_bits(b1, self.n), ctx.source)?;
                    if w {
                        ctx.apply_gate(ch0, Gate1Q::H)?;
                        ctx.apply_gate(ch1, Gate1Q::H)?;
                    }
                    let o = ctx.bell_measure(ch0, ch1)?;
                    self.bank.touch(PairLabel::Tagged(false, b1));
                    self.bank.touch(PairLabel::Tagged(true, b1));
                    success.push(o == BellOutcome { k0: true, k1: false });
                }
                let mut wire = vec![k.k0, k.k1];
                wire.extend_from_slice(&y0);
                wire.extend_from_slice(&success);
                ctx.send(PartyName::E1, Payload::Bits(wire))?;
                self.success = Some(success);
                self.answer_if_ready(ctx)?;
            }
            PartyName::E1 => {
                self.y1 = Some(expect_bits(msg)?.to_vec());
                self.answer_if_ready(ctx)?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// E1 against the two-qubit oracle protocol: send the intercepted state
/// leftward on channel (0, y1) and return the pair-0 state on (1, y1).
pub struct P2OracleE1 {
    n: usize,
    bank: Rc<EntanglementBank>,
    y1: Option<BitString>,
}

impl P2OracleE1 {
    pub fn new(n: usize, bank: Rc<EntanglementBank>) -> Self {
        P2OracleE1 {
            n,
            bank,
            y1: None,
        }
    }
}

impl PartyHandler for P2OracleE1 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V1 => {
                let (q, bits) = crate::protocols::split_item(&msg.payload);
                let q = q.ok_or_else(|| SimError::Malformed("missing challenge qubit".into()))?;
                let y1 = bits
                    .ok_or_else(|| SimError::Malformed("missing y1".into()))?
                    .clone();
                let idx = bits_to_uint(&y1);
                let out = PairLabel::Tagged(false, idx);
                let back = PairLabel::Tagged(true, idx);
                let k1 = ctx.bell_measure(q, self.bank.e1_half(out))?;
                let k2 = ctx.bell_measure(
                    self.bank.e1_half(PairLabel::Plain(0)),
                    self.bank.e1_half(back),
                )?;
                self.bank.touch(out);
                self.bank.touch(back);
                self.bank.touch(PairLabel::Plain(0));
                let t = ctx.telemetry();
                t.bell.insert("k1", [k1.k0, k1.k1]);
                t.bell.insert("k2", [k2.k0, k2.k1]);
                t.cond_ok = Some(!k1.k0 && !k1.k1 && !k2.k0 && !k2.k1);
                ctx.send(PartyName::E0, Payload::Bits(y1.clone()))?;
                self.y1 = Some(y1);
            }
            PartyName::E0 => {
                let bits = expect_bits(msg)?;
                let success = &bits[2 + self.n..];
                let y1 = self.y1.as_ref().expect("interception precedes E0's report");
                let z = success[bits_to_uint(y1) as usize];
                ctx.send(PartyName::V1, Payload::bit(z))?;
            }
            _ => {}
        }
        Ok(())
    }
}
