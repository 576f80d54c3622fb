//! Fully specified command configurations and their execution.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::CliError;
use crate::adversary::{self, AttackMode, EveStrategy, KeyEnsemble};
use crate::bits::BitString;
use crate::boolfn::BooleanFunction;
use crate::protocol::{
    self, Honest, KeyPolicy, Keys, PartySecrets, Payload, ProtocolId, ProtocolSpec, RunOptions, SnapshotMode,
};
use crate::statevector::random_amplitudes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Run,
    Attack,
    Analyze,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum MessageSpec {
    /// Bit string: classical payload for the classical protocol, basis
    /// state otherwise.
    Bits(String),
    Amplitudes(Vec<[f64; 2]>),
    Random,
}

/// Key material as given on the command line; `None` means drawn from the
/// seed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeySpec {
    pub fa: Option<String>,
    pub fb: Option<String>,
    pub sa: Option<String>,
    pub sb: Option<String>,
    pub s: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub strategy: String,
    pub fe: Option<String>,
    pub fe2: Option<String>,
    pub guess_sa: Option<String>,
    pub guess_sb: Option<String>,
    pub pass: Option<usize>,
    pub register: Option<String>,
    pub mask: u64,
    pub keep_original: bool,
    /// Monte Carlo trials; exact when absent.
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisSpec {
    pub pass: usize,
    pub messages: Option<Vec<String>>,
    pub known_message: Option<String>,
    /// Sampled key ensemble size; exhaustive when absent.
    pub samples: Option<usize>,
}

/// Everything a command needs; identical configs give identical output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub protocol: ProtocolId,
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub message: MessageSpec,
    pub keys: KeySpec,
    pub count: usize,
    pub key_policy: Option<KeyPolicy>,
    pub attack: Option<AttackSpec>,
    pub analysis: Option<AnalysisSpec>,
    pub snapshots: SnapshotMode,
}

/// Output of one command.
pub struct Execution {
    pub document: Value,
    pub summary: String,
    /// A protocol check rejected.
    pub check_failed: bool,
}

// stream ids for seed derivation
const MESSAGE_STREAM: u64 = 1 << 32;
const ATTACK_STREAM: u64 = 2 << 32;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn parse_fn(what: &str, spec: &str, k: usize, n: usize) -> Result<BooleanFunction, CliError> {
    let f = BooleanFunction::parse_spec(spec).map_err(|e| CliError::Usage(format!("--{what}: {e}")))?;
    if f.arity() != k || f.width() != n {
        return Err(CliError::Usage(format!(
            "--{what} is a {}→{} function, expected {k}→{n}",
            f.arity(),
            f.width()
        )));
    }
    Ok(f)
}

fn parse_bits(what: &str, spec: &str, k: usize) -> Result<BitString, CliError> {
    let b: BitString = spec.parse().map_err(|e| CliError::Usage(format!("--{what}: {e}")))?;
    if b.len() != k {
        return Err(CliError::Usage(format!("--{what} has {} bits, expected {k}", b.len())));
    }
    Ok(b)
}

impl RunConfig {
    fn payload(&self, index: usize) -> Result<Payload, CliError> {
        let classical = self.protocol == ProtocolId::Classical;
        match &self.message {
            MessageSpec::Bits(s) => {
                let b = parse_bits("message", s, self.k)?;
                Ok(if classical { Payload::Classical(b) } else { Payload::basis(&b) })
            }
            MessageSpec::Amplitudes(a) => {
                if classical {
                    return Err(CliError::Usage("the classical protocol takes a bit string message".into()));
                }
                let amps = a.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                Payload::quantum(amps).map_err(|e| CliError::Usage(format!("amplitudes: {e}")))
            }
            MessageSpec::Random => {
                let mut rng = stream(self.seed, MESSAGE_STREAM + index as u64);
                Ok(if classical {
                    Payload::Classical(BitString::new(rand::Rng::random_range(&mut rng, 0..1u64 << self.k), self.k)?)
                } else {
                    Payload::Quantum(random_amplitudes(self.k, &mut rng))
                })
            }
        }
    }

    /// Keys for round `round` (always 0 unless keys are fresh per state).
    fn keys(&self, round: usize) -> Result<Keys, CliError> {
        let (k, n) = (self.k, self.n);
        let given = &self.keys;
        let base = round as u64 * 8;
        let func = |what: &str, spec: &Option<String>, id: u64| -> Result<BooleanFunction, CliError> {
            match spec {
                Some(s) => parse_fn(what, s, k, n),
                None => Ok(BooleanFunction::random_with(k, n, &mut stream(self.seed, base + id))?),
            }
        };
        let string = |what: &str, spec: &Option<String>, id: u64| -> Result<BitString, CliError> {
            match spec {
                Some(s) => parse_bits(what, s, k),
                None => Ok(BitString::new(rand::Rng::random_range(&mut stream(self.seed, base + id), 0..1u64 << k), k)?),
            }
        };
        Ok(match self.protocol {
            ProtocolId::Basic | ProtocolId::Classical => {
                Keys::ThreePass { fa: func("fa", &given.fa, 0)?, fb: func("fb", &given.fb, 1)? }
            }
            ProtocolId::Alt20 => Keys::Auxiliary { fa: func("fa", &given.fa, 0)?, fb: func("fb", &given.fb, 1)? },
            ProtocolId::Authenticated => {
                let fa = func("fa", &given.fa, 0)?;
                let fb = func("fb", &given.fb, 1)?;
                let sa = func("sa", &given.sa, 2)?;
                let mut sb = func("sb", &given.sb, 3)?;
                if given.sb.is_none() {
                    let mut rng = stream(self.seed, base + 3);
                    while sb == sa {
                        sb = BooleanFunction::random_with(k, n, &mut rng)?;
                    }
                }
                Keys::Authenticated { alice: PartySecrets::with_id(fa, sa), bob: PartySecrets::with_id(fb, sb) }
            }
            ProtocolId::Alt19 => Keys::BasisShift { sa: string("sa", &given.sa, 2)?, sb: string("sb", &given.sb, 3)? },
            ProtocolId::AltKeystring => Keys::KeyString { s: string("s", &given.s, 4)? },
            ProtocolId::Alt21 => match &given.s {
                Some(s) => {
                    let f = BooleanFunction::parse_spec(s).map_err(|e| CliError::Usage(format!("--s: {e}")))?;
                    Keys::Permutation { s: f }
                }
                None => protocol::random_keys(ProtocolId::Alt21, k, k, &mut stream(self.seed, base + 4))?,
            },
            ProtocolId::Alt22 => Keys::AppendOracle { s: func("s", &given.s, 4)? },
        })
    }

    pub fn spec(&self, index: usize) -> Result<ProtocolSpec, CliError> {
        let round = match self.key_policy {
            Some(KeyPolicy::FreshPerState) => index,
            _ => 0,
        };
        Ok(ProtocolSpec::new(self.protocol, self.payload(index)?, self.keys(round)?)?)
    }

    fn strategy(&self) -> Result<EveStrategy, CliError> {
        let a = self.attack.as_ref().ok_or_else(|| CliError::Usage("missing attack specification".into()))?;
        let (k, n) = (self.k, self.n);
        let eve_fn = |what: &str, spec: &Option<String>, id: u64, width: usize| match spec {
            Some(s) => parse_fn(what, s, k, width),
            None => Ok(BooleanFunction::random_with(k, width, &mut stream(self.seed, ATTACK_STREAM + id))?),
        };
        Ok(match a.strategy.as_str() {
            "passive-inspect" | "passive" => EveStrategy::PassiveInspect,
            "intercept-measure-resend" | "intercept" => EveStrategy::InterceptMeasureResend {
                pass: a.pass.unwrap_or(1),
                registers: vec![a.register.clone().unwrap_or_else(|| "I".into())],
            },
            "substitute-oracle" | "substitute" => {
                let target = a.register.clone().unwrap_or_else(|| "II".into());
                EveStrategy::SubstituteOracle {
                    fe: eve_fn("fe", &a.fe, 0, n)?,
                    target,
                    pass: a.pass.unwrap_or(2),
                    keep_original: a.keep_original,
                }
            }
            "bitflip" => EveStrategy::Bitflip {
                register: a.register.clone().unwrap_or_else(|| {
                    if self.protocol.is_three_pass() { "III" } else { "I" }.into()
                }),
                mask: a.mask,
                pass: a.pass.unwrap_or(if self.protocol.is_three_pass() { 3 } else { 1 }),
            },
            "full-mitm" | "mitm" => EveStrategy::FullMitm {
                fe1: eve_fn("fe", &a.fe, 0, n)?,
                fe2: eve_fn("fe2", &a.fe2, 1, n)?,
                guess_sa: a.guess_sa.as_ref().map(|s| parse_fn("guess-sa", s, k, n)).transpose()?,
                guess_sb: a.guess_sb.as_ref().map(|s| parse_fn("guess-sb", s, k, n)).transpose()?,
            },
            other => return Err(CliError::Usage(format!("unknown strategy `{other}`"))),
        })
    }

    pub fn execute(&self) -> Result<Execution, CliError> {
        let (result, summary, check_failed) = match self.command {
            CommandKind::Run => self.execute_run()?,
            CommandKind::Attack => self.execute_attack()?,
            CommandKind::Analyze => self.execute_analyze()?,
        };
        let document = json!({
            "tool": "qnokey",
            "version": env!("CARGO_PKG_VERSION"),
            "config": self,
            "result": result,
        });
        Ok(Execution { document, summary, check_failed })
    }

    fn execute_run(&self) -> Result<(Value, String, bool), CliError> {
        if self.count > 1 && self.key_policy.is_none() {
            return Err(CliError::Usage("--count above 1 needs --key-policy fresh|reused".into()));
        }
        let mut transcripts = Vec::new();
        let mut summary = String::new();
        let mut failed = false;
        for i in 0..self.count.max(1) {
            let t = protocol::run(&self.spec(i)?, &mut Honest, &RunOptions::default())?;
            if self.count > 1 {
                summary.push_str(&format!("== state {} ==\n", i + 1));
            }
            summary.push_str(&super::summary::transcript(&t, self.snapshots));
            failed |= !t.is_completed();
            transcripts.push(t.to_json(self.snapshots));
        }
        Ok((json!({ "transcripts": transcripts }), summary, failed))
    }

    fn execute_attack(&self) -> Result<(Value, String, bool), CliError> {
        let spec = self.spec(0)?;
        let strategy = self.strategy()?;
        let trials = self.attack.as_ref().and_then(|a| a.trials);
        let mode = match trials {
            Some(trials) => AttackMode::MonteCarlo { trials, seed: self.seed },
            None => AttackMode::Exact,
        };
        let report = adversary::attack(&spec, &strategy, mode)?;
        let summary = super::summary::report(&report);
        let result = json!({
            "spec": spec,
            "report": report,
        });
        Ok((result, summary, false))
    }

    fn execute_analyze(&self) -> Result<(Value, String, bool), CliError> {
        let a = self.analysis.as_ref().ok_or_else(|| CliError::Usage("missing analysis specification".into()))?;
        let ensemble = match a.samples {
            Some(count) => KeyEnsemble::Sampled { count, seed: self.seed },
            None => KeyEnsemble::Exhaustive,
        };
        let n = if self.protocol == ProtocolId::Alt21 { self.k } else { self.n };
        let keys = ensemble.resolve(self.protocol, self.k, n)?;
        let payload = |bits: &str| -> Result<Payload, CliError> {
            let b = parse_bits("messages", bits, self.k)?;
            Ok(if self.protocol == ProtocolId::Classical { Payload::Classical(b) } else { Payload::basis(&b) })
        };
        if let Some(known) = &a.known_message {
            let d = adversary::key_distinguishability(self.protocol, a.pass, &payload(known)?, &keys)?;
            let summary = format!(
                "protocol: {}\npass: {}\nknown message: {known}\nkeys compared: {}\nmin trace distance between keys: {}\n",
                self.protocol,
                a.pass,
                keys.len(),
                super::summary::num(d)
            );
            let result = json!({
                "pass": a.pass,
                "known_message": known,
                "ensemble": ensemble,
                "keys": keys.len(),
                "min_key_trace_distance": d,
            });
            return Ok((result, summary, false));
        }
        let messages = a.messages.as_ref().ok_or_else(|| CliError::Usage("give --messages a,b or --known-message m".into()))?;
        let [ma, mb] = messages.as_slice() else {
            return Err(CliError::Usage("--messages takes exactly two bit strings".into()));
        };
        let view = adversary::eve_view_pair(self.protocol, a.pass, &payload(ma)?, &payload(mb)?, &keys)?;
        let summary = format!(
            "protocol: {}\npass: {}\nmessages: {ma} vs {mb}\nkeys averaged: {}\ntrace distance: {}\n",
            self.protocol,
            a.pass,
            keys.len(),
            super::summary::num(view.trace_distance)
        );
        let result = json!({
            "pass": a.pass,
            "messages": messages,
            "ensemble": ensemble,
            "keys": keys.len(),
            "view": view,
        });
        Ok((result, summary, false))
    }
}
