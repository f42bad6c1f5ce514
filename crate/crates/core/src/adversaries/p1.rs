//! Attacks on the one-qubit protocol family, plus the naive waiting
//! baseline.

use std::rc::Rc;

use super::{EntanglementBank, PairLabel};
use crate::protocols::{honest_prover, OracleTable, ProtocolKind};
use crate::qstate::BellOutcome;
use crate::simnet::{Ctx, Message, PartyHandler, PartyName, Payload, SimError};

fn expect_bits(msg: &Message) -> Result<&[bool], SimError> {
    msg.payload
        .as_bits()
        .map(Vec::as_slice)
        .ok_or_else(|| SimError::Malformed(format!("expected bits from {}", msg.src)))
}

/// E0 for the no-entanglement intercept: minimum-error discrimination on
/// the challenge qubit, broadcast the guess.
pub struct InterceptE0;

impl PartyHandler for InterceptE0 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        if msg.src != PartyName::V0 {
            return Ok(());
        }
        let q = msg
            .payload
            .as_qubit()
            .ok_or_else(|| SimError::Malformed("intercept expects the challenge qubit".into()))?;
        let guess = ctx.min_error_measure(q)?;
        ctx.telemetry().reported = Some(guess);
        ctx.send(PartyName::E1, Payload::bit(guess))?;
        ctx.send(PartyName::V0, Payload::bit(guess))?;
        Ok(())
    }
}

/// E1 for the intercept: relays E0's guess to the far verifier. The basis
/// bit from V1 arrives but is useless without entanglement.
pub struct InterceptE1;

impl PartyHandler for InterceptE1 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        if msg.src == PartyName::E0 {
            let g = expect_bits(msg)?[0];
            ctx.send(PartyName::V1, Payload::bit(g))?;
        }
        Ok(())
    }
}

/// E0 for the single-pair teleport attack.
pub struct TeleportE0 {
    bank: Rc<EntanglementBank>,
    k: Option<BellOutcome>,
}

impl TeleportE0 {
    pub fn new(bank: Rc<EntanglementBank>) -> Self {
        TeleportE0 { bank, k: None }
    }
}

impl PartyHandler for TeleportE0 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V0 => {
                let q = msg.payload.as_qubit().ok_or_else(|| {
                    SimError::Malformed("teleport attack expects the challenge qubit".into())
                })?;
                let half = self.bank.e0_half(PairLabel::Plain(0));
                let k = ctx.bell_measure(q, half)?;
                self.bank.touch(PairLabel::Plain(0));
                ctx.telemetry().bell.insert("k", [k.k0, k.k1]);
                self.k = Some(k);
                ctx.send(PartyName::E1, Payload::Bits(vec![k.k0, k.k1]))?;
            }
            PartyName::E1 => {
                let bits = expect_bits(msg)?;
                let (theta, lambda) = (bits[0], bits[1]);
                let k = self.k.expect("Bell outcome precedes E1's reply");
                // λ (-1)^{k_θ} = (-1)^x.
                let x = lambda ^ k.k_for_basis(theta);
                ctx.send(PartyName::V0, Payload::bit(x))?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// E1 for the single-pair teleport attack.
pub struct TeleportE1 {
    bank: Rc<EntanglementBank>,
    theta: Option<bool>,
    lambda: Option<bool>,
}

impl TeleportE1 {
    pub fn new(bank: Rc<EntanglementBank>) -> Self {
        TeleportE1 {
            bank,
            theta: None,
            lambda: None,
        }
    }
}

impl PartyHandler for TeleportE1 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V1 => {
                let theta = expect_bits(msg)?[0];
                let half = self.bank.e1_half(PairLabel::Plain(0));
                // Measure H^θ Z H^θ on the shared half: outcome (-1)^{x ⊕ k_θ}.
                let lambda = ctx.measure_basis(half, theta)?;
                self.bank.touch(PairLabel::Plain(0));
                self.theta = Some(theta);
                self.lambda = Some(lambda);
                ctx.send(PartyName::E0, Payload::Bits(vec![theta, lambda]))?;
            }
            PartyName::E0 => {
                let bits = expect_bits(msg)?;
                let k = BellOutcome {
                    k0: bits[0],
                    k1: bits[1],
                };
                let theta = self.theta.expect("V1's basis precedes E0's reply");
                let lambda = self.lambda.expect("measurement precedes E0's reply");
                let x = lambda ^ k.k_for_basis(theta);
                ctx.send(PartyName::V1, Payload::bit(x))?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// E0 against the product-basis variant, two labeled pairs: teleport
/// through the pair selected by θ0.
pub struct Mod2EprE0 {
    bank: Rc<EntanglementBank>,
    theta0: Option<bool>,
    k: Option<BellOutcome>,
}

impl Mod2EprE0 {
    pub fn new(bank: Rc<EntanglementBank>) -> Self {
        Mod2EprE0 {
            bank,
            theta0: None,
            k: None,
        }
    }
}

impl PartyHandler for Mod2EprE0 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V0 => {
                let (q, bits) = crate::protocols::split_item(&msg.payload);
                let q = q.ok_or_else(|| SimError::Malformed("missing challenge qubit".into()))?;
                let theta0 =
                    bits.ok_or_else(|| SimError::Malformed("missing theta0".into()))?[0];
                let label = PairLabel::Plain(u64::from(theta0));
                let k = ctx.bell_measure(q, self.bank.e0_half(label))?;
                self.bank.touch(label);
                ctx.telemetry().bell.insert("k", [k.k0, k.k1]);
                self.theta0 = Some(theta0);
                self.k = Some(k);
                ctx.send(PartyName::E1, Payload::Bits(vec![k.k0, k.k1, theta0]))?;
            }
            PartyName::E1 => {
                let bits = expect_bits(msg)?;
                let (theta1, lambda) = (bits[0], [bits[1], bits[2]]);
                let theta0 = self.theta0.expect("item precedes E1's reply");
                let k = self.k.expect("item precedes E1's reply");
                let theta = theta0 && theta1;
                // The λ entry from the teleport pair carries x ⊕ k_θ.
                let x = lambda[usize::from(theta0)] ^ k.k_for_basis(theta);
                ctx.send(PartyName::V0, Payload::bit(x))?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// E1 for the two-pair attack: Z on pair 0, the θ1-basis on pair 1.
pub struct Mod2EprE1 {
    bank: Rc<EntanglementBank>,
    theta1: Option<bool>,
    lambda: Option<[bool; 2]>,
}

impl Mod2EprE1 {
    pub fn new(bank: Rc<EntanglementBank>) -> Self {
        Mod2EprE1 {
            bank,
            theta1: None,
            lambda: None,
        }
    }
}

impl PartyHandler for Mod2EprE1 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V1 => {
                let theta1 = expect_bits(msg)?[0];
                let l0 = ctx.measure_basis(self.bank.e1_half(PairLabel::Plain(0)), false)?;
                let l1 = ctx.measure_basis(self.bank.e1_half(PairLabel::Plain(1)), theta1)?;
                self.bank.touch(PairLabel::Plain(0));
                self.bank.touch(PairLabel::Plain(1));
                ctx.telemetry().lambda = Some(vec![l0, l1]);
                self.theta1 = Some(theta1);
                self.lambda = Some([l0, l1]);
                ctx.send(PartyName::E0, Payload::Bits(vec![theta1, l0, l1]))?;
            }
            PartyName::E0 => {
                let bits = expect_bits(msg)?;
                let k = BellOutcome {
                    k0: bits[0],
                    k1: bits[1],
                };
                let theta0 = bits[2];
                let theta1 = self.theta1.expect("V1's bit precedes E0's reply");
                let lambda = self.lambda.expect("measurement precedes E0's reply");
                let theta = theta0 && theta1;
                let x = lambda[usize::from(theta0)] ^ k.k_for_basis(theta);
                ctx.send(PartyName::V1, Payload::bit(x))?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// E0 for the single-pair heuristic against the product-basis variant:
/// teleport through the only pair and decode with E1's guessed basis.
pub struct Mod1EprE0 {
    bank: Rc<EntanglementBank>,
    k: Option<BellOutcome>,
}

impl Mod1EprE0 {
    pub fn new(bank: Rc<EntanglementBank>) -> Self {
        Mod1EprE0 { bank, k: None }
    }
}

impl PartyHandler for Mod1EprE0 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V0 => {
                let (q, bits) = crate::protocols::split_item(&msg.payload);
                let q = q.ok_or_else(|| SimError::Malformed("missing challenge qubit".into()))?;
                let theta0 =
                    bits.ok_or_else(|| SimError::Malformed("missing theta0".into()))?[0];
                let k = ctx.bell_measure(q, self.bank.e0_half(PairLabel::Plain(0)))?;
                self.bank.touch(PairLabel::Plain(0));
                ctx.telemetry().bell.insert("k", [k.k0, k.k1]);
                self.k = Some(k);
                ctx.send(PartyName::E1, Payload::Bits(vec![k.k0, k.k1, theta0]))?;
            }
            PartyName::E1 => {
                let bits = expect_bits(msg)?;
                let (theta1, lambda) = (bits[0], bits[1]);
                let k = self.k.expect("item precedes E1's reply");
                // E1 measured assuming θ = θ1; decode in that frame.
                let x = lambda ^ k.k_for_basis(theta1);
                ctx.send(PartyName::V0, Payload::bit(x))?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// E1 for the single-pair heuristic: without θ0 she bets the effective
/// basis equals θ1 (exact when θ0 = 1, and harmless when θ1 = 0).
pub struct Mod1EprE1 {
    bank: Rc<EntanglementBank>,
    theta1: Option<bool>,
    lambda: Option<bool>,
}

impl Mod1EprE1 {
    pub fn new(bank: Rc<EntanglementBank>) -> Self {
        Mod1EprE1 {
            bank,
            theta1: None,
            lambda: None,
        }
    }
}

impl PartyHandler for Mod1EprE1 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V1 => {
                let theta1 = expect_bits(msg)?[0];
                let lambda = ctx.measure_basis(self.bank.e1_half(PairLabel::Plain(0)), theta1)?;
                self.bank.touch(PairLabel::Plain(0));
                self.theta1 = Some(theta1);
                self.lambda = Some(lambda);
                ctx.send(PartyName::E0, Payload::Bits(vec![theta1, lambda]))?;
            }
            PartyName::E0 => {
                let bits = expect_bits(msg)?;
                let k = BellOutcome {
                    k0: bits[0],
                    k1: bits[1],
                };
                let theta1 = self.theta1.expect("V1's bit precedes E0's reply");
                let lambda = self.lambda.expect("measurement precedes E0's reply");
                let x = lambda ^ k.k_for_basis(theta1);
                ctx.send(PartyName::V1, Payload::bit(x))?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// Timing-failure baseline, E0 side: hold the intercepted item until E1's
/// relay arrives, act like the honest prover, answer both verifiers. The
/// near verifier is satisfied; the far one necessarily sees a late answer.
pub struct NaiveWaitE0 {
    kind: ProtocolKind,
    oracle: Option<Rc<OracleTable>>,
    item0: Option<Payload>,
    relayed: Option<Payload>,
}

impl NaiveWaitE0 {
    pub fn new(kind: ProtocolKind, oracle: Option<Rc<OracleTable>>) -> Self {
        NaiveWaitE0 {
            kind,
            oracle,
            item0: None,
            relayed: None,
        }
    }
}

impl PartyHandler for NaiveWaitE0 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        match msg.src {
            PartyName::V0 => self.item0 = Some(msg.payload.clone()),
            PartyName::E1 => self.relayed = Some(msg.payload.clone()),
            _ => {}
        }
        if let (Some(item0), Some(item1)) = (self.item0.clone(), self.relayed.clone()) {
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

/// Timing-failure baseline, E1 side: forward V1's item verbatim.
pub struct NaiveWaitE1;

impl PartyHandler for NaiveWaitE1 {
    fn on_message(&mut self, ctx: &mut Ctx<'_>, msg: &Message) -> Result<(), SimError> {
        if msg.src == PartyName::V1 {
            ctx.send(PartyName::E0, msg.payload.clone())?;
        }
        Ok(())
    }
}
