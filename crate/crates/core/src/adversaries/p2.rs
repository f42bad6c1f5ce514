//! Attacks on the two-qubit protocol family.

use num_complex::Complex64;
use std::rc::Rc;

use super::{AttackGeometry, EntanglementBank, PairLabel};
use crate::qstate::{BellOutcome, Gate1Q};
use crate::simnet::{Ctx, Message, PartyHandler, PartyName, Payload, SimError};

fn expect_bits(msg: &Message) -> Result<&[bool], SimError> {
    msg.payload
        .as_bits()
        .map(Vec::as_slice)
        .ok_or_else(|| SimError::Malformed(format!("expected bits from {}", msg.src)))
}

/// Entanglement-free strategy: measure the intercepted qubit in the fixed
/// basis `{(α, β), (-β*, α*)}`, exchange outcomes, report z=1 on half of
/// the disagreements (using a pre-agreed coin so both sides report the same
/// bit).
pub struct LocalMeasure {
    me: PartyName,
    basis: [[Complex64; 2]; 2],
    coin: bool,
    mine: Option<bool>,
    theirs: Option<bool>,
}

impl LocalMeasure {
    pub fn new(me: PartyName, alpha: Complex64, beta: Complex64, coin: bool) -> Self {
        LocalMeasure {
            me,
            basis: [[alpha, beta], [-beta.conj(), alpha.conj()]],
            coin,
            mine: None,
            theirs: None,
        }
    }

    fn near_verifier(&self) -> PartyName {
        if self.me == PartyName::E0 {
            PartyName::V0
        } else {
            PartyName::V1
        }
    }

    fn peer(&self) -> PartyName {
        if self.me == PartyName::E0 {
            PartyName::E1
        } else {
            PartyName::E0
        }
    }
}

impl PartyHandler for LocalMeasure {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        if msg.src.verifier_index().is_some() {
            let (q, _) = crate::protocols::split_item(&msg.payload);
            let q = q.ok_or_else(|| SimError::Malformed("expected a challenge qubit".into()))?;
            let m = ctx.measure_in_basis(q, &self.basis)?;
            let idx = usize::from(self.me == PartyName::E1);
            ctx.telemetry().local_outcomes[idx] = Some(m);
            self.mine = Some(m);
            ctx.send(self.peer(), Payload::bit(m))?;
        } else if msg.src == self.peer() {
            self.theirs = Some(expect_bits(msg)?[0]);
        }
        if let (Some(mine), Some(theirs)) = (self.mine, self.theirs) {
            let z = mine != theirs && self.coin;
            ctx.telemetry().reported = Some(z);
            ctx.send(self.near_verifier(), Payload::bit(z))?;
        }
        Ok(())
    }
}

/// Single-pair entanglement-swap: each side Bell-measures its intercepted
/// qubit against its half of the shared pair. The pair of outcomes fixes
/// which Bell state the verifiers' joint state was effectively projected
/// onto; report z=1 exactly when that state is |Ψ+>.
pub struct OneEpr {
    me: PartyName,
    bank: Rc<EntanglementBank>,
    mine: Option<BellOutcome>,
    theirs: Option<BellOutcome>,
}

impl OneEpr {
    pub fn new(me: PartyName, bank: Rc<EntanglementBank>) -> Self {
        OneEpr {
            me,
            bank,
            mine: None,
            theirs: None,
        }
    }
}

impl PartyHandler for OneEpr {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        let (peer, near, half, label) = if self.me == PartyName::E0 {
            (
                PartyName::E1,
                PartyName::V0,
                self.bank.e0_half(PairLabel::Plain(0)),
                "k",
            )
        } else {
            (
                PartyName::E0,
                PartyName::V1,
                self.bank.e1_half(PairLabel::Plain(0)),
                "k1",
            )
        };
        if msg.src.verifier_index().is_some() {
            let q = msg
                .payload
                .as_qubit()
                .ok_or_else(|| SimError::Malformed("expected a challenge qubit".into()))?;
            let k = ctx.bell_measure(q, half)?;
            self.bank.touch(PairLabel::Plain(0));
            ctx.telemetry().bell.insert(label, [k.k0, k.k1]);
            self.mine = Some(k);
            ctx.send(peer, Payload::Bits(vec![k.k0, k.k1]))?;
        } else if msg.src == peer {
            let bits = expect_bits(msg)?;
            self.theirs = Some(BellOutcome {
                k0: bits[0],
                k1: bits[1],
            });
        }
        if let (Some(a), Some(b)) = (self.mine, self.theirs) {
            // Effective projection index is the XOR of the two outcomes;
            // |Ψ+> is (k0, k1) = (1, 0).
            let z = (a.k0 ^ b.k0) && !(a.k1 ^ b.k1);
            ctx.telemetry().reported = Some(z);
            ctx.send(near, Payload::bit(z))?;
        }
        Ok(())
    }
}

/// E0 of the five-pair attack on the classical-bit two-qubit variant.
///
/// Pair 0 carries the challenge qubit rightward; E1 sends both states back
/// on pairs (2 y1 + 1, 2 y1 + 2). E0 undoes her own teleport correction on
/// the possible return channels, applies `H^{y0}` to channels 3 and 4
/// (which applies `H^{y0 y1}` to whichever channels hold the states), and
/// Bell-measures both channel pairs.
pub struct Mod5EprE0 {
    bank: Rc<EntanglementBank>,
    geometry: AttackGeometry,
    y0: Option<bool>,
    k: Option<BellOutcome>,
    success: Option<[bool; 2]>,
    y1: Option<bool>,
}

impl Mod5EprE0 {
    pub fn new(bank: Rc<EntanglementBank>, geometry: AttackGeometry) -> Self {
        Mod5EprE0 {
            bank,
            geometry,
            y0: None,
            k: None,
            success: None,
            y1: None,
        }
    }

    fn answer_if_ready(&mut self, ctx: &mut Ctx<'_>) -> Result<(), SimError> {
        if let (Some(s), Some(y1)) = (self.success, self.y1) {
            let z = s[usize::from(y1)];
            ctx.telemetry().reported = Some(z);
            ctx.send(PartyName::V0, Payload::bit(z))?;
            self.y1 = None;
        }
        Ok(())
    }
}

impl PartyHandler for Mod5EprE0 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V0 => {
                let (q, bits) = crate::protocols::split_item(&msg.payload);
                let q = q.ok_or_else(|| SimError::Malformed("missing challenge qubit".into()))?;
                let y0 = bits.ok_or_else(|| SimError::Malformed("missing y0".into()))?[0];
                let k = ctx.bell_measure(q, self.bank.e0_half(PairLabel::Plain(0)))?;
                self.bank.touch(PairLabel::Plain(0));
                ctx.telemetry().bell.insert("k", [k.k0, k.k1]);
                self.y0 = Some(y0);
                self.k = Some(k);
                // The channel measurements need E1's return teleports, which
                // happen at her interception time; wake up no earlier.
                let g = self.geometry;
                let t = (2.0 * g.d - g.e1_pos).max(ctx.now);
                ctx.note_to_self_at(t, vec![])?;
            }
            PartyName::E0 => {
                // Wake-up: run the channel-pair measurements and report.
                let k = self.k.expect("wake-up follows the interception");
                let y0 = self.y0.expect("wake-up follows the interception");
                let halves: Vec<_> = (1..5)
                    .map(|i| self.bank.e0_half(PairLabel::Plain(i)))
                    .collect();
                // Undo this side's teleport correction on both possible
                // return channels (2 and 4): apply X^k0 Z^k1.
                for &ch in &[halves[1], halves[3]] {
                    if k.k1 {
                        ctx.apply_gate(ch, Gate1Q::Z)?;
                    }
                    if k.k0 {
                        ctx.apply_gate(ch, Gate1Q::X)?;
                    }
                }
                if y0 {
                    ctx.apply_gate(halves[2], Gate1Q::H)?;
                    ctx.apply_gate(halves[3], Gate1Q::H)?;
                }
                let o12 = ctx.bell_measure(halves[0], halves[1])?;
                let o34 = ctx.bell_measure(halves[2], halves[3])?;
                for i in 1..5 {
                    self.bank.touch(PairLabel::Plain(i));
                }
                let psi_plus = BellOutcome { k0: true, k1: false };
                let s = [o12 == psi_plus, o34 == psi_plus];
                self.success = Some(s);
                ctx.send(
                    PartyName::E1,
                    Payload::Bits(vec![k.k0, k.k1, y0, s[0], s[1]]),
                )?;
                self.answer_if_ready(ctx)?;
            }
            PartyName::E1 => {
                self.y1 = Some(expect_bits(msg)?[0]);
                self.answer_if_ready(ctx)?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// E1 of the five-pair attack: teleport the intercepted state to E0 through
/// pair 2 y1 + 1 and return the state received on pair 0 through pair
/// 2 y1 + 2.
pub struct Mod5EprE1 {
    bank: Rc<EntanglementBank>,
    y1: Option<bool>,
}

impl Mod5EprE1 {
    pub fn new(bank: Rc<EntanglementBank>) -> Self {
        Mod5EprE1 { bank, y1: None }
    }
}

impl PartyHandler for Mod5EprE1 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V1 => {
                let (q, bits) = crate::protocols::split_item(&msg.payload);
                let q = q.ok_or_else(|| SimError::Malformed("missing challenge qubit".into()))?;
                let y1 = bits.ok_or_else(|| SimError::Malformed("missing y1".into()))?[0];
                let out_label = PairLabel::Plain(2 * u64::from(y1) + 1);
                let back_label = PairLabel::Plain(2 * u64::from(y1) + 2);
                let k1 = ctx.bell_measure(q, self.bank.e1_half(out_label))?;
                let k2 =
                    ctx.bell_measure(self.bank.e1_half(PairLabel::Plain(0)), self.bank.e1_half(back_label))?;
                self.bank.touch(out_label);
                self.bank.touch(back_label);
                self.bank.touch(PairLabel::Plain(0));
                let t = ctx.telemetry();
                t.bell.insert("k1", [k1.k0, k1.k1]);
                t.bell.insert("k2", [k2.k0, k2.k1]);
                t.cond_ok = Some(!k1.k0 && !k1.k1 && !k2.k0 && !k2.k1);
                self.y1 = Some(y1);
                ctx.send(PartyName::E0, Payload::Bits(vec![y1]))?;
            }
            PartyName::E0 => {
                let bits = expect_bits(msg)?;
                let (s12, s34) = (bits[3], bits[4]);
                let y1 = self.y1.expect("interception precedes E0's report");
                let z = if y1 { s34 } else { s12 };
                ctx.send(PartyName::V1, Payload::bit(z))?;
            }
            _ => {}
        }
        Ok(())
    }
}
