//! Eve: channel strategies, attack execution and what she can learn.
//!
//! Exact mode evolves one global state per configuration. Honest checks are
//! post-selected and their zero probabilities multiplied out; Eve's
//! measurements are deferred (copied into her own registers). Monte Carlo
//! mode samples every measurement instead. Reports carry numbers only.

mod channel;
mod view;

pub use view::{
    compare_views, eve_view, eve_view_pair, key_distinguishability, key_space, sample_keys, EveView, KeyEnsemble,
};

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::boolfn::{BoolFnError, BooleanFunction};
use crate::oracle;
use crate::protocol::engine::{self, argmax, Participant, Session};
use crate::protocol::{
    self, CheckMode, Honest, Keys, PartySecrets, Payload, ProtocolError, ProtocolId, ProtocolSpec,
    ProtocolTranscript, RunOptions, MESSAGE_REGISTER,
};
use crate::statevector::StateError;
use channel::{basis_copy, EveChannel};

/// Largest number of key tuples averaged exactly.
pub const KEY_SPACE_LIMIT: usize = 1 << 20;
/// Default number of Monte Carlo trials.
pub const DEFAULT_TRIALS: usize = 10_000;
/// Eve's copy of the message in a full man-in-the-middle run.
pub const EVE_MESSAGE_REGISTER: &str = "E.msg";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    BoolFn(#[from] BoolFnError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Bits(#[from] crate::bits::BitsError),
    #[error("{strategy} does not apply to {protocol}: {reason}")]
    Inapplicable { strategy: String, protocol: ProtocolId, reason: String },
    #[error("key space has {size} tuples, more than the exact limit {limit}; sample instead")]
    KeySpaceTooLarge { size: u128, limit: usize },
    #[error("empty ensemble")]
    EmptyEnsemble,
}

impl From<oracle::OracleError> for AttackError {
    fn from(e: oracle::OracleError) -> Self {
        AttackError::Protocol(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EveStrategy {
    /// Forwards everything untouched.
    PassiveInspect,
    /// Measures the listed registers in the computational basis on one pass.
    InterceptMeasureResend { pass: usize, registers: Vec<String> },
    /// Replaces `target` with a fresh register holding `F_E(m)`, computed
    /// from the in-flight message register. The original register is kept
    /// by Eve (`keep_original`) or dropped into the environment.
    SubstituteOracle { fe: BooleanFunction, target: String, pass: usize, keep_original: bool },
    Bitflip { register: String, mask: u64, pass: usize },
    /// Eve completes the protocol with Alice as a fake Bob (using `fe1`)
    /// and with Bob as a fake Alice (using `fe2`). Missing guesses of the
    /// identification keys are averaged over (exact) or drawn uniformly
    /// (Monte Carlo).
    FullMitm {
        fe1: BooleanFunction,
        fe2: BooleanFunction,
        guess_sa: Option<BooleanFunction>,
        guess_sb: Option<BooleanFunction>,
    },
}

impl EveStrategy {
    /// Substitution of register `II` on Bob's reply.
    pub fn substitute(fe: BooleanFunction) -> Self {
        EveStrategy::SubstituteOracle { fe, target: "II".into(), pass: 2, keep_original: true }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EveStrategy::PassiveInspect => "passive-inspect",
            EveStrategy::InterceptMeasureResend { .. } => "intercept-measure-resend",
            EveStrategy::SubstituteOracle { .. } => "substitute-oracle",
            EveStrategy::Bitflip { .. } => "bitflip",
            EveStrategy::FullMitm { .. } => "full-mitm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum AttackMode {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub protocol: ProtocolId,
    pub strategy: EveStrategy,
    pub mode: AttackMode,
    pub alice_accept_prob: f64,
    /// Conditional on Alice accepting; absent when she never does.
    pub bob_accept_prob: Option<f64>,
    pub joint_accept_prob: f64,
    /// Conditional on both accepting. For classical payloads, the
    /// probability that Bob reads the sent bits.
    pub delivered_fidelity: Option<f64>,
    /// Eve's most likely readout of her message copy.
    pub eve_recovered: Option<BitString>,
    /// Probability (given Alice accepts) that Eve's readout equals the sent
    /// message, when the message is a basis state.
    pub eve_recovery_prob: Option<f64>,
    pub eve_distinguishability: Option<f64>,
    /// Distinct signals raised by honest parties (uncleared registers).
    pub signals: Vec<String>,
    pub configurations: usize,
    pub trials: usize,
    pub seeds: Vec<u64>,
}

/// One attacked run: honest inputs plus Eve's strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub spec: ProtocolSpec,
    pub strategy: EveStrategy,
}

/// Seed of Monte Carlo trial `trial`, derived from the master seed.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng.next_u64()
}

fn inapplicable(spec: &ProtocolSpec, strategy: &EveStrategy, reason: impl Into<String>) -> AttackError {
    AttackError::Inapplicable { strategy: strategy.name().into(), protocol: spec.protocol, reason: reason.into() }
}

fn expect_shape(
    spec: &ProtocolSpec,
    strategy: &EveStrategy,
    what: &str,
    f: &BooleanFunction,
    k: usize,
    n: usize,
) -> Result<(), AttackError> {
    if f.arity() != k || f.width() != n {
        return Err(inapplicable(
            spec,
            strategy,
            format!("{what} is {}→{}, protocol needs {k}→{n}", f.arity(), f.width()),
        ));
    }
    Ok(())
}

/// Width `n` of the three-pass tag registers.
fn tag_width(keys: &Keys) -> Option<usize> {
    match keys {
        Keys::ThreePass { fa, .. } => Some(fa.width()),
        Keys::Authenticated { alice, .. } => Some(alice.session_fn.width()),
        _ => None,
    }
}

/// Rejects strategies that touch registers not on the wire.
pub fn check_applicable(spec: &ProtocolSpec, strategy: &EveStrategy) -> Result<(), AttackError> {
    spec.validate()?;
    let k = spec.payload.width();
    if let EveStrategy::FullMitm { fe1, fe2, guess_sa, guess_sb } = strategy {
        let n = tag_width(&spec.keys)
            .ok_or_else(|| inapplicable(spec, strategy, "Eve needs a three-pass protocol to impersonate"))?;
        expect_shape(spec, strategy, "F_E1", fe1, k, n)?;
        expect_shape(spec, strategy, "F_E2", fe2, k, n)?;
        for (what, g) in [("guess of s_A", guess_sa), ("guess of s_B", guess_sb)] {
            if let Some(g) = g {
                expect_shape(spec, strategy, what, g, k, n)?;
            }
        }
        return Ok(());
    }
    let honest = protocol::run(spec, &mut Honest, &RunOptions::default())?;
    let on_pass = |p: usize| {
        honest
            .passes
            .get(p.wrapping_sub(1))
            .ok_or_else(|| inapplicable(spec, strategy, format!("protocol has {} passes, not {p}", honest.passes.len())))
    };
    let in_flight = |p: usize, reg: &str| -> Result<usize, AttackError> {
        let pass = on_pass(p)?;
        if !pass.in_flight.iter().any(|r| r == reg) {
            return Err(inapplicable(spec, strategy, format!("register {reg} is not in flight on pass {p}")));
        }
        Ok(pass.snapshot.layout().width(reg)?)
    };
    match strategy {
        EveStrategy::PassiveInspect | EveStrategy::FullMitm { .. } => {}
        EveStrategy::InterceptMeasureResend { pass, registers } => {
            if registers.is_empty() {
                return Err(inapplicable(spec, strategy, "no registers to measure"));
            }
            for reg in registers {
                in_flight(*pass, reg)?;
            }
        }
        EveStrategy::SubstituteOracle { fe, target, pass, .. } => {
            if target == MESSAGE_REGISTER {
                return Err(inapplicable(spec, strategy, "F_E is computed from the message register"));
            }
            let width = in_flight(*pass, target)?;
            expect_shape(spec, strategy, "F_E", fe, k, width)?;
        }
        EveStrategy::Bitflip { register, mask, pass } => {
            let width = in_flight(*pass, register)?;
            if mask >> width != 0 {
                return Err(inapplicable(spec, strategy, format!("mask {mask} is wider than {register}")));
            }
        }
    }
    Ok(())
}

fn parties(keys: &Keys) -> Option<(Participant, Participant, bool)> {
    match keys {
        Keys::ThreePass { fa, fb } => Some((Participant::honest("alice", fa), Participant::honest("bob", fb), false)),
        Keys::Authenticated { alice, bob } => Some((
            Participant::honest("alice", &alice.session_fn).with_ids(alice.id_key.as_ref(), bob.id_key.as_ref()),
            Participant::honest("bob", &bob.session_fn).with_ids(bob.id_key.as_ref(), alice.id_key.as_ref()),
            true,
        )),
        _ => None,
    }
}

fn eve(session_fn: &BooleanFunction, own: Option<&BooleanFunction>, peer: Option<&BooleanFunction>) -> Participant {
    Participant { honest: false, ..Participant::honest("eve", session_fn).with_ids(own, peer) }
}

/// Eve keeps a computational-basis copy of the message she received as
/// fake Bob. Classical payloads are read in the Hadamard basis.
fn record_message(session: &mut Session<'_>, payload: &Payload) -> Result<(), ProtocolError> {
    let classical = matches!(payload, Payload::Classical(_));
    if classical {
        session.hadamard(MESSAGE_REGISTER)?;
    }
    session.state = basis_copy(&session.state, MESSAGE_REGISTER, EVE_MESSAGE_REGISTER)?;
    if classical {
        session.hadamard(MESSAGE_REGISTER)?;
    }
    Ok(())
}

fn full_mitm(
    spec: &ProtocolSpec,
    strategy: &EveStrategy,
    opts: &RunOptions,
) -> Result<ProtocolTranscript, AttackError> {
    let EveStrategy::FullMitm { fe1, fe2, guess_sa, guess_sb } = strategy else {
        unreachable!("caller matched full-mitm")
    };
    let (alice, bob, authenticated) =
        parties(&spec.keys).ok_or_else(|| inapplicable(spec, strategy, "not a three-pass protocol"))?;
    if authenticated && (guess_sa.is_none() || guess_sb.is_none()) {
        return Err(inapplicable(spec, strategy, "a single run needs concrete guesses of s_A and s_B"));
    }
    let fake_bob = eve(fe1, guess_sb.as_ref(), guess_sa.as_ref());
    let fake_alice = eve(fe2, guess_sa.as_ref(), guess_sb.as_ref());
    let mut session = Session::new(spec.payload.initial_state()?, opts);
    if engine::three_pass(&mut session, &mut Honest, &alice, &fake_bob, MESSAGE_REGISTER, authenticated)? {
        record_message(&mut session, &spec.payload)?;
        engine::three_pass(&mut session, &mut Honest, &fake_alice, &bob, MESSAGE_REGISTER, authenticated)?;
    }
    Ok(protocol::finish(spec, session, None)?)
}

/// One attacked evolution. Checks are post-selected unless `checks` is
/// `Sample`, in which case Eve's own measurements use a stream derived from
/// the same seed. Guesses in a full man-in-the-middle must be concrete.
pub fn attack_transcript(
    spec: &ProtocolSpec,
    strategy: &EveStrategy,
    checks: CheckMode,
) -> Result<ProtocolTranscript, AttackError> {
    let opts = RunOptions { checks, strict: false };
    if matches!(strategy, EveStrategy::FullMitm { .. }) {
        return full_mitm(spec, strategy, &opts);
    }
    let eve_rng = match checks {
        CheckMode::Sample { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            Some(rng)
        }
        _ => None,
    };
    Ok(protocol::run(spec, &mut EveChannel::new(strategy, eve_rng), &opts)?)
}

fn honest_check<'t>(t: &'t ProtocolTranscript, label: &str, party: &str) -> Option<&'t protocol::CheckRecord> {
    t.checks.iter().find(|c| c.label == label && c.party == party)
}

/// All functions `k → n` (as guesses), or an error past the limit.
fn all_functions(k: usize, n: usize) -> Result<Vec<BooleanFunction>, AttackError> {
    BooleanFunction::enumerate_all(k, n, KEY_SPACE_LIMIT)?
        .ok_or(AttackError::KeySpaceTooLarge { size: 1u128 << (n << k).min(127), limit: KEY_SPACE_LIMIT })
}

/// Replaces missing full-mitm guesses with every possible guess.
fn expand_guesses(config: &AttackConfig) -> Result<Vec<AttackConfig>, AttackError> {
    let EveStrategy::FullMitm { fe1, fe2, guess_sa, guess_sb } = &config.strategy else {
        return Ok(vec![config.clone()]);
    };
    if !matches!(config.spec.keys, Keys::Authenticated { .. }) || (guess_sa.is_some() && guess_sb.is_some()) {
        return Ok(vec![config.clone()]);
    }
    let all = all_functions(fe1.arity(), fe1.width())?;
    let options = |g: &Option<BooleanFunction>| g.as_ref().map_or_else(|| all.clone(), |g| vec![g.clone()]);
    let (sa, sb) = (options(guess_sa), options(guess_sb));
    if sa.len() * sb.len() > KEY_SPACE_LIMIT {
        return Err(AttackError::KeySpaceTooLarge { size: (sa.len() * sb.len()) as u128, limit: KEY_SPACE_LIMIT });
    }
    let mut out = Vec::with_capacity(sa.len() * sb.len());
    for ga in &sa {
        for gb in &sb {
            out.push(AttackConfig {
                spec: config.spec.clone(),
                strategy: EveStrategy::FullMitm {
                    fe1: fe1.clone(),
                    fe2: fe2.clone(),
                    guess_sa: Some(ga.clone()),
                    guess_sb: Some(gb.clone()),
                },
            });
        }
    }
    Ok(out)
}

/// Draws any missing guesses uniformly.
fn sample_guesses<R: Rng + ?Sized>(config: &AttackConfig, rng: &mut R) -> Result<AttackConfig, AttackError> {
    let mut config = config.clone();
    if let (EveStrategy::FullMitm { fe1, guess_sa, guess_sb, .. }, Keys::Authenticated { .. }) =
        (&mut config.strategy, &config.spec.keys)
    {
        for g in [guess_sa, guess_sb] {
            if g.is_none() {
                *g = Some(BooleanFunction::random_with(fe1.arity(), fe1.width(), rng)?);
            }
        }
    }
    Ok(config)
}

#[derive(Default)]
struct ExactTally {
    alice: f64,
    joint: f64,
    fidelity: f64,
    eve_hist: Vec<f64>,
    eve_hit: f64,
    eve_hit_defined: bool,
    signals: BTreeSet<String>,
}

fn exact_one(config: &AttackConfig, tally: &mut ExactTally) -> Result<(), AttackError> {
    let t = attack_transcript(&config.spec, &config.strategy, CheckMode::PostSelect)?;
    let alice = honest_check(&t, "alice-verify", "alice").map_or(1.0, |c| c.zero_probability);
    let alice_passed = honest_check(&t, "alice-verify", "alice").is_none_or(|c| c.accepted);
    let bob = if alice_passed {
        honest_check(&t, "bob-verify", "bob").map_or(1.0, |c| c.zero_probability)
    } else {
        0.0
    };
    let joint = alice * bob;
    tally.alice += alice;
    tally.joint += joint;
    if let Some(f) = t.outcome.fidelity {
        tally.fidelity += joint * f;
    }
    if alice_passed && t.outcome.final_state.layout().contains(EVE_MESSAGE_REGISTER) {
        let probs = t.outcome.final_state.register_probabilities(EVE_MESSAGE_REGISTER)?;
        tally.eve_hist.resize(probs.len(), 0.0);
        for (acc, p) in tally.eve_hist.iter_mut().zip(&probs) {
            *acc += alice * p;
        }
        if let Some(v) = config.spec.payload.intended_value() {
            tally.eve_hit_defined = true;
            tally.eve_hit += alice * probs[v as usize];
        }
    }
    tally.signals.extend(t.signals.iter().cloned());
    Ok(())
}

#[derive(Default)]
struct SampledTally {
    alice: usize,
    joint: usize,
    fidelity: f64,
    eve_hist: BTreeMap<u64, usize>,
    eve_hit: usize,
    eve_hit_defined: bool,
    signals: BTreeSet<String>,
}

fn sampled_one<R: Rng + ?Sized>(config: &AttackConfig, rng: &mut R, tally: &mut SampledTally) -> Result<(), AttackError> {
    let config = sample_guesses(config, rng)?;
    let check_seed = rng.next_u64();
    let t = attack_transcript(&config.spec, &config.strategy, CheckMode::Sample { seed: check_seed })?;
    let alice_passed = honest_check(&t, "alice-verify", "alice").is_none_or(|c| c.accepted);
    if !alice_passed {
        return Ok(());
    }
    tally.alice += 1;
    if t.is_completed() {
        tally.joint += 1;
        tally.fidelity += match (&config.spec.payload, t.outcome.recovered) {
            (Payload::Classical(m), Some(r)) => f64::from(u8::from(*m == r)),
            _ => t.outcome.fidelity.unwrap_or(0.0),
        };
    }
    if t.outcome.final_state.layout().contains(EVE_MESSAGE_REGISTER) {
        let mut eve_rng = ChaCha8Rng::seed_from_u64(check_seed);
        eve_rng.set_stream(2);
        let read = t.outcome.final_state.measure_register_with(EVE_MESSAGE_REGISTER, &mut eve_rng)?.value.value();
        *tally.eve_hist.entry(read).or_default() += 1;
        if let Some(v) = config.spec.payload.intended_value() {
            tally.eve_hit_defined = true;
            tally.eve_hit += usize::from(read == v);
        }
    }
    tally.signals.extend(t.signals.iter().cloned());
    Ok(())
}

fn message_bits(config: &AttackConfig, value: u64) -> Option<BitString> {
    BitString::new(value, config.spec.payload.width()).ok()
}

/// Attack against one set of honest inputs.
pub fn attack(spec: &ProtocolSpec, strategy: &EveStrategy, mode: AttackMode) -> Result<AttackReport, AttackError> {
    attack_ensemble(&[AttackConfig { spec: spec.clone(), strategy: strategy.clone() }], mode)
}

/// Attack averaged uniformly over `configs`. Monte Carlo mode draws one
/// configuration per trial.
pub fn attack_ensemble(configs: &[AttackConfig], mode: AttackMode) -> Result<AttackReport, AttackError> {
    let first = configs.first().ok_or(AttackError::EmptyEnsemble)?;
    for c in configs {
        check_applicable(&c.spec, &c.strategy)?;
    }
    let mut report = AttackReport {
        protocol: first.spec.protocol,
        strategy: first.strategy.clone(),
        mode,
        alice_accept_prob: 0.0,
        bob_accept_prob: None,
        joint_accept_prob: 0.0,
        delivered_fidelity: None,
        eve_recovered: None,
        eve_recovery_prob: None,
        eve_distinguishability: None,
        signals: Vec::new(),
        configurations: configs.len(),
        trials: 0,
        seeds: Vec::new(),
    };
    match mode {
        AttackMode::Exact => {
            let mut expanded = Vec::new();
            for c in configs {
                expanded.extend(expand_guesses(c)?);
                if expanded.len() > KEY_SPACE_LIMIT {
                    return Err(AttackError::KeySpaceTooLarge { size: expanded.len() as u128, limit: KEY_SPACE_LIMIT });
                }
            }
            let mut tally = ExactTally::default();
            for c in &expanded {
                exact_one(c, &mut tally)?;
            }
            let total = expanded.len() as f64;
            report.configurations = expanded.len();
            report.alice_accept_prob = tally.alice / total;
            report.joint_accept_prob = tally.joint / total;
            report.bob_accept_prob = (tally.alice > 0.0).then(|| tally.joint / tally.alice);
            report.delivered_fidelity = (tally.joint > 0.0).then(|| tally.fidelity / tally.joint);
            if tally.alice > 0.0 && !tally.eve_hist.is_empty() {
                report.eve_recovered = message_bits(first, argmax(&tally.eve_hist).0);
                report.eve_recovery_prob = tally.eve_hit_defined.then(|| tally.eve_hit / tally.alice);
            }
            report.signals = tally.signals.into_iter().collect();
        }
        AttackMode::MonteCarlo { trials, seed } => {
            let mut tally = SampledTally::default();
            for trial in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial as u64));
                let config = &configs[if configs.len() == 1 { 0 } else { rng.random_range(0..configs.len()) }];
                sampled_one(config, &mut rng, &mut tally)?;
            }
            report.trials = trials;
            report.seeds = vec![seed];
            report.alice_accept_prob = tally.alice as f64 / trials.max(1) as f64;
            report.joint_accept_prob = tally.joint as f64 / trials.max(1) as f64;
            report.bob_accept_prob = (tally.alice > 0).then(|| tally.joint as f64 / tally.alice as f64);
            report.delivered_fidelity = (tally.joint > 0).then(|| tally.fidelity / tally.joint as f64);
            if let Some((&value, _)) = tally.eve_hist.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) {
                report.eve_recovered = message_bits(first, value);
                report.eve_recovery_prob =
                    (tally.eve_hit_defined && tally.alice > 0).then(|| tally.eve_hit as f64 / tally.alice as f64);
            }
            report.signals = tally.signals.into_iter().collect();
        }
    }
    Ok(report)
}

/// Whether a sampled frequency agrees with an exact probability: within
/// three standard deviations of a binomial with `trials` draws.
pub fn within_three_sigma(exact: f64, sampled: f64, trials: usize) -> bool {
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    (exact - sampled).abs() <= (3.0 * sigma).max(1e-12)
}

/// Substitution of register `II` on pass 2, over every
/// `(F_A, F_B, s_A ≠ s_B, F_E)` with functions `k → n`.
pub fn substitution_ensemble(payload: &Payload, n: usize) -> Result<Vec<AttackConfig>, AttackError> {
    let k = payload.width();
    let all = all_functions(k, n)?;
    let size = (all.len() as u128).pow(4);
    if size > KEY_SPACE_LIMIT as u128 {
        return Err(AttackError::KeySpaceTooLarge { size, limit: KEY_SPACE_LIMIT });
    }
    let mut out = Vec::new();
    for fa in &all {
        for fb in &all {
            for sa in &all {
                for sb in all.iter().filter(|sb| *sb != sa) {
                    for fe in &all {
                        out.push(AttackConfig {
                            spec: ProtocolSpec::new(
                                ProtocolId::Authenticated,
                                payload.clone(),
                                Keys::Authenticated {
                                    alice: PartySecrets::with_id(fa.clone(), sa.clone()),
                                    bob: PartySecrets::with_id(fb.clone(), sb.clone()),
                                },
                            )?,
                            strategy: EveStrategy::substitute(fe.clone()),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Full man-in-the-middle against the authenticated protocol with Eve
/// ignorant of both identification keys: every `F_A` and `s_A ≠ s_B`, with
/// Eve's guesses left open (averaged by [`attack_ensemble`]).
pub fn mitm_ensemble(
    payload: &Payload,
    fb: &BooleanFunction,
    fe1: &BooleanFunction,
    fe2: &BooleanFunction,
) -> Result<Vec<AttackConfig>, AttackError> {
    let all = all_functions(payload.width(), fb.width())?;
    let mut out = Vec::new();
    for fa in &all {
        for sa in &all {
            for sb in all.iter().filter(|sb| *sb != sa) {
                out.push(AttackConfig {
                    spec: ProtocolSpec::new(
                        ProtocolId::Authenticated,
                        payload.clone(),
                        Keys::Authenticated {
                            alice: PartySecrets::with_id(fa.clone(), sa.clone()),
                            bob: PartySecrets::with_id(fb.clone(), sb.clone()),
                        },
                    )?,
                    strategy: EveStrategy::FullMitm { fe1: fe1.clone(), fe2: fe2.clone(), guess_sa: None, guess_sb: None },
                });
            }
        }
    }
    Ok(out)
}

/// Full man-in-the-middle against the classical protocol and against the
/// authenticated protocol (Eve guessing both identification keys).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitmDemo {
    pub unauthenticated: AttackReport,
    pub authenticated: AttackReport,
}

/// Keys, Eve's functions and the identification keys are drawn from `seed`
/// with `n = k`.
pub fn mitm_demo(message: &BitString, seed: u64) -> Result<MitmDemo, AttackError> {
    let k = message.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || BooleanFunction::random_with(k, k, &mut rng);
    let (fa, fb, fe1, fe2) = (draw()?, draw()?, draw()?, draw()?);
    let (sa, sb) = protocol::random_distinct_ids(k, k, &mut rng)?;
    let strategy = EveStrategy::FullMitm { fe1, fe2, guess_sa: None, guess_sb: None };
    let payload = Payload::Classical(*message);
    let plain = ProtocolSpec::new(
        ProtocolId::Classical,
        payload.clone(),
        Keys::ThreePass { fa: fa.clone(), fb: fb.clone() },
    )?;
    let auth = ProtocolSpec::new(
        ProtocolId::Authenticated,
        payload,
        Keys::Authenticated { alice: PartySecrets::with_id(fa, sa), bob: PartySecrets::with_id(fb, sb) },
    )?;
    Ok(MitmDemo {
        unauthenticated: attack(&plain, &strategy, AttackMode::Exact)?,
        authenticated: attack(&auth, &strategy, AttackMode::Exact)?,
    })
}

#[cfg(test)]
mod tests;
