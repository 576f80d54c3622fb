//! Step-level machinery shared by every protocol driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::transcript::{CheckRecord, PassRecord};
use super::{Channel, CheckMode, Direction, PassInfo, Payload, ProtocolError, RunOptions};
use crate::bits::BitString;
use crate::boolfn::BooleanFunction;
use crate::oracle::{self, OracleError};
use crate::statevector::{QuantumState, NORM_TOL};

/// A party as seen by the engine: its session function, its own
/// identification key and its copy of the peer's key.
#[derive(Debug, Clone)]
pub(crate) struct Participant {
    pub name: String,
    pub session_fn: BooleanFunction,
    pub own_id: Option<BooleanFunction>,
    pub peer_id: Option<BooleanFunction>,
    /// Honest parties enforce checks and refuse to drop entangled registers
    /// in strict runs. Eve does neither.
    pub honest: bool,
}

impl Participant {
    pub fn honest(name: &str, session_fn: &BooleanFunction) -> Self {
        Self {
            name: name.to_string(),
            session_fn: session_fn.clone(),
            own_id: None,
            peer_id: None,
            honest: true,
        }
    }

    pub fn with_ids(mut self, own: Option<&BooleanFunction>, peer: Option<&BooleanFunction>) -> Self {
        self.own_id = own.cloned();
        self.peer_id = peer.cloned();
        self
    }

    fn own_id(&self) -> Result<&BooleanFunction, ProtocolError> {
        self.own_id.as_ref().ok_or_else(|| ProtocolError::MissingIdKey(self.name.clone()))
    }

    fn peer_id(&self) -> Result<&BooleanFunction, ProtocolError> {
        self.peer_id.as_ref().ok_or_else(|| ProtocolError::MissingIdKey(self.name.clone()))
    }
}

/// Smallest zero probability a post-selected check continues on.
pub(crate) const POSTSELECT_FLOOR: f64 = 1e-15;

pub(crate) const TAG_A: &str = "II";
pub(crate) const TAG_B: &str = "III";

pub(crate) struct Session<'o> {
    pub state: QuantumState,
    pub passes: Vec<PassRecord>,
    pub checks: Vec<CheckRecord>,
    pub signals: Vec<String>,
    pub aborted_at: Option<String>,
    opts: &'o RunOptions,
    rng: ChaCha8Rng,
}

impl<'o> Session<'o> {
    pub fn new(state: QuantumState, opts: &'o RunOptions) -> Self {
        let seed = match opts.checks {
            CheckMode::Sample { seed } => seed,
            _ => 0,
        };
        Self {
            state,
            passes: Vec::new(),
            checks: Vec::new(),
            signals: Vec::new(),
            aborted_at: None,
            opts,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn oracle(&mut self, f: &BooleanFunction, source: &str, target: &str) -> Result<(), ProtocolError> {
        self.state = oracle::apply_oracle(&self.state, f, source, target)?;
        Ok(())
    }

    pub fn xor_constant(&mut self, register: &str, mask: u64) -> Result<(), ProtocolError> {
        self.state = oracle::apply_xor_constant(&self.state, register, mask)?;
        Ok(())
    }

    pub fn permutation(&mut self, s: &BooleanFunction, register: &str) -> Result<(), ProtocolError> {
        self.state = oracle::apply_permutation(&self.state, s, register)?;
        Ok(())
    }

    pub fn hadamard(&mut self, register: &str) -> Result<(), ProtocolError> {
        self.state = oracle::apply_hadamard(&self.state, register)?;
        Ok(())
    }

    pub fn attach(&mut self, register: &str, width: usize) -> Result<(), ProtocolError> {
        self.state = oracle::attach_register(&self.state, register, width)?;
        Ok(())
    }

    /// Records the outgoing state and hands it to the channel.
    pub fn send(
        &mut self,
        channel: &mut dyn Channel,
        step: &str,
        direction: Direction,
        message_register: &str,
        in_flight: &[&str],
    ) -> Result<(), ProtocolError> {
        let info = PassInfo {
            index: self.passes.len() + 1,
            step: step.to_string(),
            direction,
            message_register: message_register.to_string(),
            in_flight: in_flight.iter().map(|s| s.to_string()).collect(),
        };
        let sent = self.state.clone();
        let received = channel.transmit(&info, sent.clone())?;
        let tampered = received != sent;
        self.passes.push(PassRecord {
            index: info.index,
            step: info.step,
            direction,
            in_flight: info.in_flight,
            snapshot: sent,
            tampered,
        });
        self.state = received;
        Ok(())
    }

    /// Zero-check of `register`. Returns `false` when the run must stop.
    pub fn check(&mut self, party: &Participant, label: &str, register: &str) -> Result<bool, ProtocolError> {
        let p = self.state.zero_probability(register)?;
        let mut record = CheckRecord {
            label: label.to_string(),
            party: party.name.clone(),
            register: register.to_string(),
            zero_probability: p,
            accepted: p >= 1.0 - NORM_TOL,
            sampled: None,
        };
        if !party.honest {
            self.checks.push(record);
            return Ok(true);
        }
        let proceed = match self.opts.checks {
            CheckMode::Exact => record.accepted,
            CheckMode::PostSelect => {
                record.accepted = p > POSTSELECT_FLOOR;
                record.accepted
            }
            CheckMode::Sample { .. } => {
                let out = self.state.measure_register_with(register, &mut self.rng)?;
                record.sampled = Some(out.value.value());
                record.accepted = out.value.value() == 0;
                if record.accepted {
                    self.state = out.post_state;
                }
                record.accepted
            }
        };
        if proceed && !matches!(self.opts.checks, CheckMode::Sample { .. }) {
            if let (_, Some(post)) = self.state.project(register, 0)? {
                self.state = post;
            }
        }
        self.checks.push(record);
        if !proceed {
            self.aborted_at = Some(label.to_string());
        }
        Ok(proceed)
    }

    /// Drops a tag register that should be cleared. A register that cannot
    /// be detached is either an error (strict run, honest party) or kept in
    /// the global state under the party's name.
    pub fn discard(&mut self, party: &Participant, register: &str) -> Result<(), ProtocolError> {
        match oracle::detach_register(&self.state, register) {
            Ok(s) => {
                self.state = s;
                Ok(())
            }
            Err(OracleError::EntangledRegister(_)) => {
                if party.honest && self.opts.strict {
                    return Err(ProtocolError::Tampering {
                        step: format!("{} discards register {register}", party.name),
                        reason: "register is entangled and not cleared".into(),
                    });
                }
                let mut name = format!("{}.{register}", party.name);
                let mut n = 2;
                while self.state.layout().contains(&name) {
                    name = format!("{}.{register}#{n}", party.name);
                    n += 1;
                }
                self.state = self.state.rename_register(register, &name)?;
                if party.honest {
                    self.signals.push(format!("{} kept uncleared register {register} as {name}", party.name));
                }
                Ok(())
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Receiver-side decoding: fidelity for quantum payloads, Hadamard and a
    /// computational-basis readout for classical ones.
    pub fn decode(&mut self, payload: &Payload, register: &str) -> Result<Decoded, ProtocolError> {
        match payload {
            Payload::Quantum(amps) => Ok(Decoded {
                fidelity: self.state.register_fidelity(register, amps)?,
                recovered: None,
                recovered_probability: None,
            }),
            Payload::Classical(bits) => {
                self.hadamard(register)?;
                let probs = self.state.register_probabilities(register)?;
                let value = match self.opts.checks {
                    CheckMode::Sample { .. } => {
                        let out = self.state.measure_register_with(register, &mut self.rng)?;
                        self.state = out.post_state;
                        out.value.value()
                    }
                    _ => {
                        let (v, p) = argmax(&probs);
                        if self.opts.strict && p < 1.0 - NORM_TOL {
                            return Err(ProtocolError::Tampering {
                                step: "receiver readout".into(),
                                reason: format!("message register is not in a basis state (max probability {p})"),
                            });
                        }
                        v
                    }
                };
                Ok(Decoded {
                    fidelity: probs[bits.value() as usize],
                    recovered: Some(BitString::new(value, bits.len()).expect("register width")),
                    recovered_probability: Some(probs[value as usize]),
                })
            }
        }
    }
}

pub(crate) struct Decoded {
    pub fidelity: f64,
    pub recovered: Option<BitString>,
    pub recovered_probability: Option<f64>,
}

pub(crate) fn argmax(probs: &[f64]) -> (u64, f64) {
    probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(v, p)| (v as u64, *p))
        .unwrap_or((0, 0.0))
}

/// Steps 1–4 of the three-pass exchange on register `msg`, with or without
/// the identification-key checks. Returns `false` if a check aborted the run.
pub(crate) fn three_pass(
    session: &mut Session<'_>,
    channel: &mut dyn Channel,
    alice: &Participant,
    bob: &Participant,
    msg: &str,
    authenticated: bool,
) -> Result<bool, ProtocolError> {
    let n = alice.session_fn.width();
    // 1. Alice: |m⟩|0⟩ → |m⟩|F_A(m)⟩
    session.attach(TAG_A, n)?;
    session.oracle(&alice.session_fn, msg, TAG_A)?;
    session.send(channel, "alice-encrypt", Direction::AliceToBob, msg, &[msg, TAG_A])?;

    // 2. Bob: (⊕ s_B on II), then F_B into a fresh III
    if authenticated {
        session.oracle(bob.own_id()?, msg, TAG_A)?;
    }
    session.attach(TAG_B, n)?;
    session.oracle(&bob.session_fn, msg, TAG_B)?;
    session.send(channel, "bob-encrypt", Direction::BobToAlice, msg, &[msg, TAG_A, TAG_B])?;

    // 3. Alice: remove (s_B and) F_A from II, verify, (⊕ s_A on III)
    if authenticated {
        session.oracle(alice.peer_id()?, msg, TAG_A)?;
        session.oracle(&alice.session_fn, msg, TAG_A)?;
        if !session.check(alice, "alice-verify", TAG_A)? {
            return Ok(false);
        }
        session.oracle(alice.own_id()?, msg, TAG_B)?;
    } else {
        session.oracle(&alice.session_fn, msg, TAG_A)?;
    }
    session.discard(alice, TAG_A)?;
    session.send(channel, "alice-decrypt", Direction::AliceToBob, msg, &[msg, TAG_B])?;

    // 4. Bob: remove (s_A and) F_B from III, verify
    if authenticated {
        session.oracle(bob.peer_id()?, msg, TAG_B)?;
    }
    session.oracle(&bob.session_fn, msg, TAG_B)?;
    if authenticated && !session.check(bob, "bob-verify", TAG_B)? {
        return Ok(false);
    }
    session.discard(bob, TAG_B)?;
    Ok(true)
}
