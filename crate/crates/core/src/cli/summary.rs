//! Human-readable summaries printed to stdout.

use std::fmt::Write;

use crate::adversary::AttackReport;
use crate::protocol::{snapshot_json, ProtocolTranscript, RunStatus, SnapshotMode};
use crate::statevector::QuantumState;

/// States up to this many qubits are printed in full.
const PRINT_QUBITS: usize = 9;

pub(crate) fn num(x: f64) -> String {
    format!("{:.9}", if x == 0.0 { 0.0 } else { x })
}

fn ket(state: &QuantumState) -> String {
    let regs = state.layout().registers();
    let names: Vec<&str> = regs.iter().map(|r| r.name.as_str()).collect();
    let mut out = String::new();
    for (i, a) in state.amplitudes().iter().enumerate() {
        if a.norm() < 1e-12 {
            continue;
        }
        let values: Vec<String> = names
            .iter()
            .map(|n| {
                let f = state.layout().field(n).expect("own register");
                format!("{:0w$b}", f.get(i), w = f.width)
            })
            .collect();
        let coeff = if a.im.abs() < 1e-12 {
            format!("{:+.6}", a.re)
        } else {
            format!("({:+.6}{:+.6}i)", a.re, a.im)
        };
        let _ = write!(out, " {coeff}|{}⟩", values.join(","));
    }
    format!("[{}]{out}", names.join(","))
}

fn state_line(state: &QuantumState, mode: SnapshotMode) -> String {
    if mode == SnapshotMode::Full && state.layout().total_width() <= PRINT_QUBITS {
        ket(state)
    } else {
        let digest = crate::canonical::digest(&snapshot_json(state, SnapshotMode::Full));
        format!("sha256 {digest}")
    }
}

pub(crate) fn transcript(t: &ProtocolTranscript, mode: SnapshotMode) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "protocol: {}", t.protocol);
    for p in &t.passes {
        let dir = serde_json::to_value(p.direction).expect("direction serializes");
        let _ = writeln!(out, "pass {} {} ({}): {}", p.index, p.step, dir.as_str().unwrap_or(""), state_line(&p.snapshot, mode));
    }
    for c in &t.checks {
        let verdict = if c.accepted { "accepted" } else { "rejected" };
        let _ = writeln!(out, "check {} [{}]: zero probability {} {verdict}", c.label, c.register, num(c.zero_probability));
    }
    for s in &t.signals {
        let _ = writeln!(out, "signal: {s}");
    }
    if let Some(w) = &t.weakness {
        let _ = writeln!(out, "weakness: {w}");
    }
    match &t.outcome.status {
        RunStatus::Completed => {
            let _ = writeln!(out, "final: {}", state_line(&t.outcome.final_state, mode));
            if let Some(f) = t.outcome.fidelity {
                let _ = writeln!(out, "fidelity: {}", num(f));
            }
            if let Some(r) = &t.outcome.recovered {
                let _ = writeln!(out, "recovered: {r}");
            }
        }
        RunStatus::Aborted { check } => {
            let _ = writeln!(out, "aborted at: {check}");
        }
    }
    out
}

pub(crate) fn report(r: &AttackReport) -> String {
    let opt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), num);
    let mut out = String::new();
    let _ = writeln!(out, "protocol: {}", r.protocol);
    let _ = writeln!(out, "strategy: {}", r.strategy.name());
    match r.mode {
        crate::adversary::AttackMode::Exact => {
            let _ = writeln!(out, "mode: exact ({} configurations)", r.configurations);
        }
        crate::adversary::AttackMode::MonteCarlo { trials, seed } => {
            let _ = writeln!(out, "mode: monte-carlo ({trials} trials, seed {seed})");
        }
    }
    let _ = writeln!(out, "alice_accept_prob: {}", num(r.alice_accept_prob));
    let _ = writeln!(out, "bob_accept_prob: {}", opt(r.bob_accept_prob));
    let _ = writeln!(out, "joint_accept_prob: {}", num(r.joint_accept_prob));
    let _ = writeln!(out, "delivered_fidelity: {}", opt(r.delivered_fidelity));
    for s in &r.signals {
        let _ = writeln!(out, "signal: {s}");
    }
    if let Some(e) = &r.eve_recovered {
        let _ = writeln!(out, "eve_recovery_prob: {}", opt(r.eve_recovery_prob));
        let _ = writeln!(out, "eve_recovered: {e}");
    }
    out
}
