//! Command-line interface: `run`, `attack`, `analyze` and `verify`.
//!
//! Every output file is canonical JSON embedding the command's
//! [`RunConfig`] and the tool version, so `verify` can re-execute it.
//! Exit codes: 0 success, 1 usage error, 2 check failure or verification
//! mismatch, 3 internal error.

mod config;
mod summary;
mod verify;

pub use config::{AnalysisSpec, AttackSpec, CommandKind, Execution, KeySpec, MessageSpec, RunConfig};
pub use verify::{verify, Verdict, VERIFY_TOL};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::adversary::AttackError;
use crate::bits::BitsError;
use crate::boolfn::BoolFnError;
use crate::canonical;
use crate::protocol::{KeyPolicy, ProtocolError, ProtocolId, SnapshotMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
    #[error("{0}")]
    Internal(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Check(_) => EXIT_CHECK,
            CliError::Internal(_) | CliError::Io { .. } => EXIT_INTERNAL,
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Tampering { .. } => CliError::Check(e.to_string()),
            ProtocolError::State(_) | ProtocolError::Oracle(_) | ProtocolError::Channel(_) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        match e {
            AttackError::Protocol(p) => p.into(),
            AttackError::State(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<BoolFnError> for CliError {
    fn from(e: BoolFnError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<BitsError> for CliError {
    fn from(e: BitsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "qnokey", version, about = "Quantum no-key protocol simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a protocol over an honest channel and write its transcript.
    Run(RunArgs),
    /// Run a protocol with Eve on the channel and report acceptance rates.
    Attack(AttackArgs),
    /// Eve's averaged view of one pass and how well it separates messages.
    Analyze(AnalyzeArgs),
    /// Re-execute a saved output and compare.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    protocol: ProtocolId,
    /// Message qubits; inferred from --message when omitted, else 1.
    #[arg(long)]
    k: Option<usize>,
    /// Tag register width; defaults to k.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Message as a bit string.
    #[arg(long, conflicts_with_all = ["amplitudes", "message_random"])]
    message: Option<String>,
    /// JSON file with the message amplitudes as [[re, im], ...].
    #[arg(long)]
    amplitudes: Option<PathBuf>,
    /// Draw the message from the seed (the default).
    #[arg(long)]
    message_random: bool,
    /// Alice's session function: 0, 1, x, xbar or k:n:hex,...
    #[arg(long, conflicts_with = "fa_random")]
    fa: Option<String>,
    #[arg(long)]
    fa_random: bool,
    #[arg(long, conflicts_with = "fb_random")]
    fb: Option<String>,
    #[arg(long)]
    fb_random: bool,
    /// Identification key (function) or basis shift (bit string).
    #[arg(long)]
    sa: Option<String>,
    #[arg(long)]
    sb: Option<String>,
    /// Shared key of the single-key schemes.
    #[arg(long)]
    s: Option<String>,
    /// Store SHA-256 digests instead of full state snapshots.
    #[arg(long)]
    digest: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of message states sent in sequence.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// fresh | reused; required when --count is above 1.
    #[arg(long)]
    key_policy: Option<KeyPolicy>,
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// passive-inspect | intercept-measure-resend | substitute-oracle | bitflip | full-mitm
    #[arg(long)]
    strategy: String,
    /// Eve's function (substitute-oracle, or her fake-Bob function in full-mitm).
    #[arg(long)]
    fe: Option<String>,
    /// Eve's fake-Alice function in full-mitm.
    #[arg(long)]
    fe2: Option<String>,
    #[arg(long)]
    guess_sa: Option<String>,
    #[arg(long)]
    guess_sb: Option<String>,
    #[arg(long)]
    pass: Option<usize>,
    #[arg(long)]
    register: Option<String>,
    #[arg(long, default_value_t = 1)]
    mask: u64,
    /// Substitute-oracle: drop the original register instead of keeping it.
    #[arg(long)]
    discard_original: bool,
    /// Exact evolution (the default).
    #[arg(long, conflicts_with = "trials")]
    exact: bool,
    /// Monte Carlo with this many trials.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    protocol: ProtocolId,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pass: usize,
    /// Two messages to compare, e.g. 0,1.
    #[arg(long, value_delimiter = ',', conflicts_with = "known_message")]
    messages: Option<Vec<String>>,
    /// Fixed message; compares Eve's views across keys instead.
    #[arg(long)]
    known_message: Option<String>,
    /// Average over the whole key space (the default).
    #[arg(long, conflicts_with = "samples")]
    exact: bool,
    /// Average over this many sampled keys.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    file: PathBuf,
}

fn infer_k(k: Option<usize>, bits: Option<&str>) -> Result<usize, CliError> {
    let k = match (k, bits) {
        (Some(k), _) => k,
        (None, Some(b)) => b.trim().len(),
        (None, None) => 1,
    };
    if k == 0 {
        return Err(CliError::Usage("k must be at least 1".into()));
    }
    Ok(k)
}

fn read_amplitudes(path: &PathBuf) -> Result<Vec<[f64; 2]>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn base_config(command: CommandKind, c: &CommonArgs) -> Result<RunConfig, CliError> {
    let message = match (&c.message, &c.amplitudes) {
        (Some(bits), _) => MessageSpec::Bits(bits.trim().to_string()),
        (None, Some(path)) => MessageSpec::Amplitudes(read_amplitudes(path)?),
        (None, None) => MessageSpec::Random,
    };
    let k = match &message {
        MessageSpec::Amplitudes(a) if c.k.is_none() => {
            if !a.len().is_power_of_two() || a.len() < 2 {
                return Err(CliError::Usage(format!("{} amplitudes is not a power of two", a.len())));
            }
            a.len().trailing_zeros() as usize
        }
        _ => infer_k(c.k, c.message.as_deref())?,
    };
    Ok(RunConfig {
        command,
        protocol: c.protocol,
        k,
        n: c.n.unwrap_or(k),
        seed: c.seed,
        message,
        keys: KeySpec { fa: c.fa.clone(), fb: c.fb.clone(), sa: c.sa.clone(), sb: c.sb.clone(), s: c.s.clone() },
        count: 1,
        key_policy: None,
        attack: None,
        analysis: None,
        snapshots: if c.digest { SnapshotMode::Digest } else { SnapshotMode::Full },
    })
}

fn write_output(path: &PathBuf, doc: &serde_json::Value) -> Result<(), CliError> {
    let mut text = canonical::to_string(doc);
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })
}

fn execute(config: RunConfig, out_path: Option<&PathBuf>, out: &mut dyn Write) -> Result<i32, CliError> {
    let exec = config.execute()?;
    if let Some(path) = out_path {
        write_output(path, &exec.document)?;
    }
    let _ = out.write_all(exec.summary.as_bytes());
    if let Some(path) = out_path {
        let _ = writeln!(out, "written: {}", path.display());
    }
    Ok(if exec.check_failed { EXIT_CHECK } else { EXIT_OK })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Run(a) => {
            let mut config = base_config(CommandKind::Run, &a.common)?;
            config.count = a.count;
            config.key_policy = a.key_policy;
            execute(config, a.common.out.as_ref(), out)
        }
        Command::Attack(a) => {
            let mut config = base_config(CommandKind::Attack, &a.common)?;
            config.attack = Some(AttackSpec {
                strategy: a.strategy,
                fe: a.fe,
                fe2: a.fe2,
                guess_sa: a.guess_sa,
                guess_sb: a.guess_sb,
                pass: a.pass,
                register: a.register,
                mask: a.mask,
                keep_original: !a.discard_original,
                trials: a.trials,
            });
            execute(config, a.common.out.as_ref(), out)
        }
        Command::Analyze(a) => {
            let first = a.known_message.as_deref().or(a.messages.as_ref().and_then(|m| m.first()).map(String::as_str));
            let k = infer_k(a.k, first)?;
            let config = RunConfig {
                command: CommandKind::Analyze,
                protocol: a.protocol,
                k,
                n: a.n.unwrap_or(k),
                seed: a.seed,
                message: MessageSpec::Random,
                keys: KeySpec::default(),
                count: 1,
                key_policy: None,
                attack: None,
                analysis: Some(AnalysisSpec {
                    pass: a.pass,
                    messages: a.messages,
                    known_message: a.known_message,
                    samples: a.samples,
                }),
                snapshots: SnapshotMode::Full,
            };
            execute(config, a.out.as_ref(), out)
        }
        Command::Verify(a) => {
            let text = std::fs::read_to_string(&a.file).map_err(|source| CliError::Io { path: a.file.clone(), source })?;
            let saved: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", a.file.display())))?;
            match verify(&saved)? {
                Verdict::Match => {
                    let _ = writeln!(out, "verify: pass");
                    Ok(EXIT_OK)
                }
                Verdict::Diverged { path, detail } => {
                    let _ = writeln!(out, "verify: fail\nfirst divergence: {path}\n{detail}");
                    Ok(EXIT_CHECK)
                }
            }
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
