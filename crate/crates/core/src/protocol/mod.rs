//! Protocol drivers.
//!
//! Every run evolves one global [`QuantumState`]. The message sits in
//! register `I`; Alice's tag register is `II`, Bob's is `III`. Each
//! transmission goes through a [`Channel`], which is the identity for honest
//! runs and the attack seam for [`crate::adversary`].

mod alt;
pub(crate) mod engine;
mod transcript;

pub use alt::random_keys;
pub use transcript::{
    snapshot_json, CheckRecord, Outcome, PassRecord, ProtocolTranscript, RunStatus, SnapshotMode,
};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{BitString, BitsError};
use crate::boolfn::{BoolFnError, BooleanFunction};
use crate::oracle::OracleError;
use crate::statevector::{random_amplitudes, QuantumState, RegisterLayout, StateError, INPUT_TOL};
use engine::{Participant, Session};

/// Name of the message register.
pub const MESSAGE_REGISTER: &str = "I";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    BoolFn(#[from] BoolFnError),
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("identification keys must differ (s_A = s_B)")]
    IdenticalIdKeys,
    #[error("{0} has no identification key")]
    MissingIdKey(String),
    #[error("scheme requires bijective s")]
    NotBijective,
    #[error("protocol {protocol} cannot run with {detail}")]
    Incompatible { protocol: ProtocolId, detail: String },
    #[error("tampering detected at {step}: {reason}")]
    Tampering { step: String, reason: String },
    #[error("channel failure: {0}")]
    Channel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolId {
    #[serde(rename = "basic")]
    Basic,
    #[serde(rename = "classical")]
    Classical,
    #[serde(rename = "authenticated")]
    Authenticated,
    #[serde(rename = "alt-19")]
    Alt19,
    #[serde(rename = "alt-20")]
    Alt20,
    #[serde(rename = "alt-keystring")]
    AltKeystring,
    #[serde(rename = "alt-21")]
    Alt21,
    #[serde(rename = "alt-22")]
    Alt22,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 8] = [
        ProtocolId::Basic,
        ProtocolId::Classical,
        ProtocolId::Authenticated,
        ProtocolId::Alt19,
        ProtocolId::Alt20,
        ProtocolId::AltKeystring,
        ProtocolId::Alt21,
        ProtocolId::Alt22,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolId::Basic => "basic",
            ProtocolId::Classical => "classical",
            ProtocolId::Authenticated => "authenticated",
            ProtocolId::Alt19 => "alt-19",
            ProtocolId::Alt20 => "alt-20",
            ProtocolId::AltKeystring => "alt-keystring",
            ProtocolId::Alt21 => "alt-21",
            ProtocolId::Alt22 => "alt-22",
        }
    }

    /// Whether the protocol uses the three-pass tag registers `II`/`III`.
    pub fn is_three_pass(&self) -> bool {
        matches!(self, ProtocolId::Basic | ProtocolId::Classical | ProtocolId::Authenticated)
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown protocol `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "alice->bob")]
    AliceToBob,
    #[serde(rename = "bob->alice")]
    BobToAlice,
}

/// What is being sent: an arbitrary pure state of register `I`, or a
/// classical bit string carried in the Hadamard encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Quantum(Vec<C64>),
    Classical(BitString),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PayloadRepr {
    Quantum(Vec<[f64; 2]>),
    Classical(BitString),
}

impl Serialize for Payload {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Payload::Quantum(a) => PayloadRepr::Quantum(a.iter().map(|z| [z.re, z.im]).collect()),
            Payload::Classical(b) => PayloadRepr::Classical(*b),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Payload {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match PayloadRepr::deserialize(deserializer)? {
            PayloadRepr::Quantum(a) => {
                Payload::quantum(a.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                    .map_err(serde::de::Error::custom)
            }
            PayloadRepr::Classical(b) => Ok(Payload::Classical(b)),
        }
    }
}

impl Payload {
    /// Validates a message state (length `2^k`, norm within tolerance) and
    /// renormalizes it.
    pub fn quantum(amplitudes: Vec<C64>) -> Result<Self, ProtocolError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(StateError::LengthMismatch { expected: len.next_power_of_two().max(2), got: len }.into());
        }
        let n = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(StateError::ZeroVector.into());
        }
        if (n - 1.0).abs() > INPUT_TOL {
            return Err(StateError::NotNormalized(n).into());
        }
        Ok(Payload::Quantum(amplitudes.into_iter().map(|a| a / n).collect()))
    }

    /// Computational basis state `|m⟩` as a quantum payload.
    pub fn basis(m: &BitString) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << m.len()];
        amps[m.value() as usize] = C64::new(1.0, 0.0);
        Payload::Quantum(amps)
    }

    pub fn random_quantum(k: usize, seed: u64) -> Self {
        Payload::Quantum(random_amplitudes(k, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    /// Number of message qubits `k`.
    pub fn width(&self) -> usize {
        match self {
            Payload::Quantum(a) => a.len().trailing_zeros() as usize,
            Payload::Classical(b) => b.len(),
        }
    }

    /// The basis value this payload stands for, when there is one.
    pub fn intended_value(&self) -> Option<u64> {
        match self {
            Payload::Classical(b) => Some(b.value()),
            Payload::Quantum(a) => a.iter().position(|z| (z.norm_sqr() - 1.0).abs() < 1e-12).map(|i| i as u64),
        }
    }

    /// Register-`I` state put on the wire before any key is applied.
    pub(crate) fn initial_state(&self) -> Result<QuantumState, ProtocolError> {
        let layout = RegisterLayout::new([(MESSAGE_REGISTER, self.width())])?;
        match self {
            Payload::Quantum(a) => Ok(QuantumState::make_state(layout, a)?),
            Payload::Classical(b) => {
                let s = QuantumState::basis(layout, &[(MESSAGE_REGISTER, b.value())])?;
                Ok(crate::oracle::apply_hadamard(&s, MESSAGE_REGISTER)?)
            }
        }
    }
}

/// A party's secrets: its session function (`F_A` or `F_B`) and, for the
/// authenticated protocol, its preshared identification key (`s_A`, `s_B`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartySecrets {
    pub session_fn: BooleanFunction,
    pub id_key: Option<BooleanFunction>,
}

impl PartySecrets {
    pub fn new(session_fn: BooleanFunction) -> Self {
        Self { session_fn, id_key: None }
    }

    pub fn with_id(session_fn: BooleanFunction, id_key: BooleanFunction) -> Self {
        Self { session_fn, id_key: Some(id_key) }
    }
}

impl From<crate::boolfn::KeyPair> for PartySecrets {
    fn from(kp: crate::boolfn::KeyPair) -> Self {
        Self::with_id(kp.session().clone(), kp.id_key().clone())
    }
}

/// Key material for each protocol family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Keys {
    /// Basic and classical protocols.
    ThreePass { fa: BooleanFunction, fb: BooleanFunction },
    Authenticated { alice: PartySecrets, bob: PartySecrets },
    /// `|m⟩ → |m ⊕ s_A⟩ → |m ⊕ s_A ⊕ s_B⟩ → |m ⊕ s_B⟩ → |m⟩`.
    BasisShift { sa: BitString, sb: BitString },
    /// `|m⟩|F_A(m)⟩ → |m⟩|F_A(m) ⊕ F_B(m)⟩ → |m⟩|F_B(m)⟩ → |m⟩`.
    Auxiliary { fa: BooleanFunction, fb: BooleanFunction },
    /// Shared random string used as `|m⟩ → |m ⊕ s⟩ → |m⟩`.
    KeyString { s: BitString },
    /// Shared bijection, `|m⟩ → |s(m)⟩ → |m⟩`.
    Permutation { s: BooleanFunction },
    /// Shared function, `|m⟩ → |m⟩|s(m)⟩ → |m⟩`.
    AppendOracle { s: BooleanFunction },
}

impl Keys {
    fn kind(&self) -> &'static str {
        match self {
            Keys::ThreePass { .. } => "three-pass keys",
            Keys::Authenticated { .. } => "authenticated keys",
            Keys::BasisShift { .. } => "basis-shift keys",
            Keys::Auxiliary { .. } => "auxiliary-register keys",
            Keys::KeyString { .. } => "a key string",
            Keys::Permutation { .. } => "a permutation key",
            Keys::AppendOracle { .. } => "an append-oracle key",
        }
    }
}

/// Everything that determines an honest run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub protocol: ProtocolId,
    pub payload: Payload,
    pub keys: Keys,
}

fn expect_shape(what: &str, f: &BooleanFunction, k: usize, n: Option<usize>) -> Result<(), ProtocolError> {
    if f.arity() != k {
        return Err(ProtocolError::Shape(format!("{what} has arity {}, message has {k} qubits", f.arity())));
    }
    if let Some(n) = n {
        if f.width() != n {
            return Err(ProtocolError::Shape(format!("{what} has width {}, expected {n}", f.width())));
        }
    }
    Ok(())
}

fn expect_len(what: &str, s: &BitString, k: usize) -> Result<(), ProtocolError> {
    if s.len() != k {
        return Err(ProtocolError::Shape(format!("{what} has {} bits, message has {k}", s.len())));
    }
    Ok(())
}

impl ProtocolSpec {
    pub fn new(protocol: ProtocolId, payload: Payload, keys: Keys) -> Result<Self, ProtocolError> {
        let spec = Self { protocol, payload, keys };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let k = self.payload.width();
        let incompatible = |detail: String| ProtocolError::Incompatible { protocol: self.protocol, detail };
        match (self.protocol, &self.payload) {
            (ProtocolId::Basic, Payload::Classical(_)) => {
                return Err(incompatible("a classical payload (use the classical protocol)".into()))
            }
            (ProtocolId::Classical, Payload::Quantum(_)) => {
                return Err(incompatible("a quantum payload (use the basic protocol)".into()))
            }
            _ => {}
        }
        match (self.protocol, &self.keys) {
            (ProtocolId::Basic | ProtocolId::Classical, Keys::ThreePass { fa, fb })
            | (ProtocolId::Alt20, Keys::Auxiliary { fa, fb }) => {
                expect_shape("F_A", fa, k, None)?;
                expect_shape("F_B", fb, k, Some(fa.width()))?;
            }
            (ProtocolId::Authenticated, Keys::Authenticated { alice, bob }) => {
                let n = alice.session_fn.width();
                expect_shape("F_A", &alice.session_fn, k, None)?;
                expect_shape("F_B", &bob.session_fn, k, Some(n))?;
                let sa = alice.id_key.as_ref().ok_or_else(|| ProtocolError::MissingIdKey("alice".into()))?;
                let sb = bob.id_key.as_ref().ok_or_else(|| ProtocolError::MissingIdKey("bob".into()))?;
                expect_shape("s_A", sa, k, Some(n))?;
                expect_shape("s_B", sb, k, Some(n))?;
                if sa == sb {
                    return Err(ProtocolError::IdenticalIdKeys);
                }
            }
            (ProtocolId::Alt19, Keys::BasisShift { sa, sb }) => {
                expect_len("s_A", sa, k)?;
                expect_len("s_B", sb, k)?;
            }
            (ProtocolId::AltKeystring, Keys::KeyString { s }) => expect_len("s", s, k)?,
            (ProtocolId::Alt21, Keys::Permutation { s }) => {
                expect_shape("s", s, k, Some(k))?;
                if !s.is_permutation()? {
                    return Err(ProtocolError::NotBijective);
                }
            }
            (ProtocolId::Alt22, Keys::AppendOracle { s }) => expect_shape("s", s, k, None)?,
            (_, keys) => return Err(incompatible(keys.kind().into())),
        }
        Ok(())
    }
}

/// What a pass exposes to the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PassInfo {
    pub index: usize,
    pub step: String,
    pub direction: Direction,
    pub message_register: String,
    pub in_flight: Vec<String>,
}

/// A transmission medium. Receives the global state after the sender's
/// operations and returns what arrives at the receiver.
pub trait Channel {
    fn transmit(&mut self, pass: &PassInfo, state: QuantumState) -> Result<QuantumState, ProtocolError>;
}

/// The identity channel.
#[derive(Debug, Clone, Copy, Default)]
pub struct Honest;

impl Channel for Honest {
    fn transmit(&mut self, _pass: &PassInfo, state: QuantumState) -> Result<QuantumState, ProtocolError> {
        Ok(state)
    }
}

impl<F> Channel for F
where
    F: FnMut(&PassInfo, QuantumState) -> Result<QuantumState, ProtocolError>,
{
    fn transmit(&mut self, pass: &PassInfo, state: QuantumState) -> Result<QuantumState, ProtocolError> {
        self(pass, state)
    }
}

/// How zero-checks are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    /// Accept iff the zero probability is 1 within tolerance, else abort.
    #[default]
    Exact,
    /// Record the zero probability and continue on the accepting branch
    /// (renormalized). Used for exact attack analysis.
    PostSelect,
    /// Projective measurement with a seeded generator.
    Sample { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub checks: CheckMode,
    /// Honest parties refuse to discard entangled registers.
    pub strict: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { checks: CheckMode::Exact, strict: true }
    }
}

/// Runs any protocol described by `spec`.
pub fn run(spec: &ProtocolSpec, channel: &mut dyn Channel, opts: &RunOptions) -> Result<ProtocolTranscript, ProtocolError> {
    spec.validate()?;
    let mut session = Session::new(spec.payload.initial_state()?, opts);
    let weakness = match (&spec.keys, spec.protocol) {
        (Keys::ThreePass { fa, fb }, _) => {
            let alice = Participant::honest("alice", fa);
            let bob = Participant::honest("bob", fb);
            engine::three_pass(&mut session, channel, &alice, &bob, MESSAGE_REGISTER, false)?;
            None
        }
        (Keys::Authenticated { alice, bob }, _) => {
            let a = Participant::honest("alice", &alice.session_fn)
                .with_ids(alice.id_key.as_ref(), bob.id_key.as_ref());
            let b = Participant::honest("bob", &bob.session_fn)
                .with_ids(bob.id_key.as_ref(), alice.id_key.as_ref());
            engine::three_pass(&mut session, channel, &a, &b, MESSAGE_REGISTER, true)?;
            None
        }
        (keys, id) => Some(alt::run_scheme(&mut session, channel, id, keys)?),
    };
    finish(spec, session, weakness)
}

pub(crate) fn finish(
    spec: &ProtocolSpec,
    mut session: Session<'_>,
    weakness: Option<String>,
) -> Result<ProtocolTranscript, ProtocolError> {
    let (status, decoded) = match session.aborted_at.clone() {
        Some(check) => (RunStatus::Aborted { check }, None),
        None => (RunStatus::Completed, Some(session.decode(&spec.payload, MESSAGE_REGISTER)?)),
    };
    Ok(ProtocolTranscript {
        protocol: spec.protocol,
        payload: spec.payload.clone(),
        keys: spec.keys.clone(),
        outcome: Outcome {
            status,
            fidelity: decoded.as_ref().map(|d| d.fidelity),
            recovered: decoded.as_ref().and_then(|d| d.recovered),
            recovered_probability: decoded.as_ref().and_then(|d| d.recovered_probability),
            final_state: session.state,
        },
        passes: session.passes,
        checks: session.checks,
        signals: session.signals,
        weakness,
    })
}

/// Quantum-message protocol: `Σ α_m |m⟩` delivered through three passes.
pub fn run_basic_protocol(
    message: &[C64],
    fa: &BooleanFunction,
    fb: &BooleanFunction,
    channel: &mut dyn Channel,
) -> Result<ProtocolTranscript, ProtocolError> {
    let spec = ProtocolSpec::new(
        ProtocolId::Basic,
        Payload::quantum(message.to_vec())?,
        Keys::ThreePass { fa: fa.clone(), fb: fb.clone() },
    )?;
    run(&spec, channel, &RunOptions::default())
}

/// Classical-message protocol: `|m'⟩` is Hadamard-encoded, sent through the
/// three passes and read out by the receiver after a second Hadamard.
pub fn run_classical_protocol(
    m_prime: &BitString,
    fa: &BooleanFunction,
    fb: &BooleanFunction,
    channel: &mut dyn Channel,
) -> Result<ProtocolTranscript, ProtocolError> {
    let spec = ProtocolSpec::new(
        ProtocolId::Classical,
        Payload::Classical(*m_prime),
        Keys::ThreePass { fa: fa.clone(), fb: fb.clone() },
    )?;
    run(&spec, channel, &RunOptions::default())
}

/// Three-pass protocol with preshared identification keys; Alice verifies
/// register `II` and Bob register `III`.
pub fn run_authenticated_protocol(
    payload: Payload,
    alice: &PartySecrets,
    bob: &PartySecrets,
    channel: &mut dyn Channel,
) -> Result<ProtocolTranscript, ProtocolError> {
    let spec = ProtocolSpec::new(
        ProtocolId::Authenticated,
        payload,
        Keys::Authenticated { alice: alice.clone(), bob: bob.clone() },
    )?;
    run(&spec, channel, &RunOptions::default())
}

/// One of the alternative schemes (`alt-19`, `alt-20`, `alt-keystring`,
/// `alt-21`, `alt-22`).
pub fn run_alt_scheme(
    scheme: ProtocolId,
    payload: Payload,
    keys: Keys,
    channel: &mut dyn Channel,
) -> Result<ProtocolTranscript, ProtocolError> {
    if scheme.is_three_pass() {
        return Err(ProtocolError::Incompatible { protocol: scheme, detail: "run_alt_scheme".into() });
    }
    run(&ProtocolSpec::new(scheme, payload, keys)?, channel, &RunOptions::default())
}

/// Key handling across a sequence of message states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyPolicy {
    /// New `F_A`, `F_B` for every state.
    FreshPerState,
    /// One `F_A`, `F_B` pair for the whole sequence.
    Reused,
}

impl FromStr for KeyPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fresh" | "fresh-per-state" => Ok(KeyPolicy::FreshPerState),
            "reused" | "reuse" => Ok(KeyPolicy::Reused),
            other => Err(format!("unknown key policy `{other}` (fresh | reused)")),
        }
    }
}

/// Runs the basic protocol over a sequence of message states. Functions of
/// width `n` are drawn from a generator seeded with `seed`.
pub fn run_sequence(
    messages: &[Vec<C64>],
    policy: KeyPolicy,
    n: usize,
    seed: u64,
    channel: &mut dyn Channel,
) -> Result<Vec<ProtocolTranscript>, ProtocolError> {
    let Some(first) = messages.first() else {
        return Ok(Vec::new());
    };
    if messages.iter().any(|m| m.len() != first.len()) {
        return Err(ProtocolError::Shape("messages in a sequence must share k".into()));
    }
    let k = Payload::quantum(first.clone())?.width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<(BooleanFunction, BooleanFunction), ProtocolError> {
        Ok((BooleanFunction::random_with(k, n, rng)?, BooleanFunction::random_with(k, n, rng)?))
    };
    let mut keys = draw(&mut rng)?;
    let mut out = Vec::with_capacity(messages.len());
    for (i, message) in messages.iter().enumerate() {
        if i > 0 && policy == KeyPolicy::FreshPerState {
            keys = draw(&mut rng)?;
        }
        out.push(run_basic_protocol(message, &keys.0, &keys.1, channel)?);
    }
    Ok(out)
}

/// Draws `s_A ≠ s_B` uniformly.
pub fn random_distinct_ids<R: Rng + ?Sized>(
    k: usize,
    n: usize,
    rng: &mut R,
) -> Result<(BooleanFunction, BooleanFunction), ProtocolError> {
    let sa = BooleanFunction::random_with(k, n, rng)?;
    loop {
        let sb = BooleanFunction::random_with(k, n, rng)?;
        if sb != sa {
            return Ok((sa, sb));
        }
    }
}
