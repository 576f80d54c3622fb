//! Unitary actions on [`QuantumState`]: XOR oracles `U_F`, register-wise
//! Hadamard, register attach/detach and a gate-level oracle decomposition.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolfn::BooleanFunction;
use crate::statevector::{QuantumState, StateError, NORM_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("register `{register}` has width {actual}, function needs {expected}")]
    WidthMismatch { register: String, expected: usize, actual: usize },
    #[error("source and target are the same register `{0}`")]
    SameRegister(String),
    #[error("register `{0}` is entangled and not cleared; it cannot be detached")]
    EntangledRegister(String),
    #[error("function is not a bijection")]
    NotBijective,
    #[error("qubit {qubit} outside a {width}-qubit layout")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("gate target {0} is also a control")]
    ControlIsTarget(usize),
}

fn expect_width(state: &QuantumState, register: &str, expected: usize) -> Result<(), OracleError> {
    let actual = state.layout().width(register)?;
    if actual != expected {
        return Err(OracleError::WidthMismatch { register: register.to_string(), expected, actual });
    }
    Ok(())
}

/// Applies a basis permutation `index → perm(index)`.
fn permute(state: &QuantumState, perm: impl Fn(usize) -> usize) -> QuantumState {
    let mut out = vec![C64::new(0.0, 0.0); state.amplitudes().len()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        out[perm(i)] = *a;
    }
    QuantumState::from_parts(state.layout().clone(), out)
}

/// `U_F |m⟩_source |y⟩_target = |m⟩_source |y ⊕ F(m)⟩_target`.
pub fn apply_oracle(
    state: &QuantumState,
    f: &BooleanFunction,
    source: &str,
    target: &str,
) -> Result<QuantumState, OracleError> {
    if source == target {
        return Err(OracleError::SameRegister(source.to_string()));
    }
    expect_width(state, source, f.arity())?;
    expect_width(state, target, f.width())?;
    let src = state.layout().field(source)?;
    let tgt = state.layout().field(target)?;
    Ok(permute(state, |i| tgt.xor(i, f.eval_index(src.get(i)))))
}

/// XORs a constant into a register (`|m⟩ → |m ⊕ s⟩`), i.e. `X` on every
/// qubit whose mask bit is set.
pub fn apply_xor_constant(state: &QuantumState, register: &str, mask: u64) -> Result<QuantumState, OracleError> {
    let field = state.layout().field(register)?;
    if mask >> field.width != 0 {
        return Err(StateError::ValueOutOfRange { register: register.to_string(), value: mask }.into());
    }
    Ok(permute(state, |i| field.xor(i, mask)))
}

/// `|m⟩ → |s(m)⟩` in place; `s` must be a bijection.
pub fn apply_permutation(state: &QuantumState, s: &BooleanFunction, register: &str) -> Result<QuantumState, OracleError> {
    if !s.is_permutation().unwrap_or(false) {
        return Err(OracleError::NotBijective);
    }
    expect_width(state, register, s.arity())?;
    let field = state.layout().field(register)?;
    Ok(permute(state, |i| field.set(i, s.eval_index(field.get(i)))))
}

/// Hadamard on every qubit of `register`:
/// `|m'⟩ → 2^{-k/2} Σ_m (-1)^{m·m'} |m⟩`.
pub fn apply_hadamard(state: &QuantumState, register: &str) -> Result<QuantumState, OracleError> {
    let field = state.layout().field(register)?;
    let mut amps = state.amplitudes().to_vec();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for bit in field.shift..field.shift + field.width {
        let stride = 1usize << bit;
        for i in 0..amps.len() {
            if i & stride == 0 {
                let (a, b) = (amps[i], amps[i | stride]);
                amps[i] = (a + b) * h;
                amps[i | stride] = (a - b) * h;
            }
        }
    }
    Ok(QuantumState::from_parts(state.layout().clone(), amps))
}

/// Appends a fresh register in `|0⟩` as the least significant register.
pub fn attach_register(state: &QuantumState, name: &str, width: usize) -> Result<QuantumState, OracleError> {
    let layout = state.layout().with_appended(name, width)?;
    let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        amps[i << width] = *a;
    }
    Ok(QuantumState::from_parts(layout, amps))
}

/// Removes a register that is either cleared (reads `0` with probability 1)
/// or unentangled from the rest, both within [`NORM_TOL`]. Any other
/// register cannot be dropped without disturbing the remaining state.
pub fn detach_register(state: &QuantumState, name: &str) -> Result<QuantumState, OracleError> {
    let field = state.layout().field(name)?;
    let value = if state.zero_probability(name)? >= 1.0 - NORM_TOL {
        0
    } else {
        let rho = state.reduced_density_matrix(&[name])?;
        if rho.purity() < 1.0 - NORM_TOL {
            return Err(OracleError::EntangledRegister(name.to_string()));
        }
        let probs = state.register_probabilities(name)?;
        probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(v, _)| v as u64)
            .unwrap_or(0)
    };
    let layout = state.layout().without(name)?;
    let low_mask = (1usize << field.shift) - 1;
    let mut amps = Vec::with_capacity(layout.dim());
    for rest in 0..layout.dim() {
        let base = ((rest >> field.shift) << (field.shift + field.width)) | (rest & low_mask);
        amps.push(state.amplitudes()[field.set(base, value)]);
    }
    let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n != 1.0 {
        amps.iter_mut().for_each(|a| *a /= n);
    }
    Ok(QuantumState::from_parts(layout, amps))
}

/// One gate of a decomposed oracle. Qubit indices are global: qubit 0 is the
/// most significant bit of the first register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    X { target: usize },
    Cx { control: usize, target: usize },
    Mcx { controls: Vec<usize>, target: usize },
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    gate: String,
    controls: Vec<usize>,
    target: usize,
}

impl Gate {
    fn from_controls(controls: Vec<usize>, target: usize) -> Self {
        match controls.len() {
            0 => Gate::X { target },
            1 => Gate::Cx { control: controls[0], target },
            _ => Gate::Mcx { controls, target },
        }
    }

    pub fn target(&self) -> usize {
        match self {
            Gate::X { target } | Gate::Cx { target, .. } | Gate::Mcx { target, .. } => *target,
        }
    }

    pub fn controls(&self) -> Vec<usize> {
        match self {
            Gate::X { .. } => vec![],
            Gate::Cx { control, .. } => vec![*control],
            Gate::Mcx { controls, .. } => controls.clone(),
        }
    }
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let name = match self {
            Gate::X { .. } => "X",
            Gate::Cx { .. } => "CX",
            Gate::Mcx { .. } => "MCX",
        };
        GateRecord { gate: name.into(), controls: self.controls(), target: self.target() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rec = GateRecord::deserialize(deserializer)?;
        let expected = match rec.gate.as_str() {
            "X" => 0..=0,
            "CX" => 1..=1,
            "MCX" => 2..=usize::MAX,
            other => return Err(serde::de::Error::custom(format!("unknown gate `{other}`"))),
        };
        if !expected.contains(&rec.controls.len()) {
            return Err(serde::de::Error::custom(format!(
                "gate {} with {} controls",
                rec.gate,
                rec.controls.len()
            )));
        }
        Ok(Gate::from_controls(rec.controls, rec.target))
    }
}

/// Decomposes `U_F` into X / CNOT / multi-controlled-X gates.
///
/// Output bits that are constant 1 become a single `X`. Every other output
/// bit `j` gets one multi-controlled X per input `m` with bit `j` of `F(m)`
/// set, controlled on the source pattern `m` (0-controls conjugated by `X`).
/// Adjacent identical `X` gates are cancelled.
pub fn compile_oracle(
    f: &BooleanFunction,
    source: &[usize],
    target: &[usize],
) -> Result<Vec<Gate>, OracleError> {
    if source.len() != f.arity() {
        return Err(OracleError::WidthMismatch { register: "source".into(), expected: f.arity(), actual: source.len() });
    }
    if target.len() != f.width() {
        return Err(OracleError::WidthMismatch { register: "target".into(), expected: f.width(), actual: target.len() });
    }
    if let Some(&q) = target.iter().find(|q| source.contains(q)) {
        return Err(OracleError::ControlIsTarget(q));
    }
    let k = f.arity();
    let n = f.width();
    let mut gates = Vec::new();
    for (j, &tq) in target.iter().enumerate() {
        let bit = n - 1 - j; // target[0] is the output's most significant bit
        let ones: Vec<u64> = (0..1u64 << k).filter(|&m| (f.eval_index(m) >> bit) & 1 == 1).collect();
        if ones.len() == 1 << k {
            gates.push(Gate::X { target: tq });
            continue;
        }
        for m in ones {
            let zeros: Vec<usize> = (0..k).filter(|&i| (m >> (k - 1 - i)) & 1 == 0).map(|i| source[i]).collect();
            gates.extend(zeros.iter().map(|&q| Gate::X { target: q }));
            gates.push(Gate::from_controls(source.to_vec(), tq));
            gates.extend(zeros.iter().map(|&q| Gate::X { target: q }));
        }
    }
    let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
    for g in gates {
        if matches!(g, Gate::X { .. }) && out.last() == Some(&g) {
            out.pop();
        } else {
            out.push(g);
        }
    }
    Ok(out)
}

/// Applies a gate list to a state.
pub fn apply_gates(state: &QuantumState, gates: &[Gate]) -> Result<QuantumState, OracleError> {
    let layout = state.layout();
    let width = layout.total_width();
    let mut amps = state.amplitudes().to_vec();
    for g in gates {
        let target = g.target();
        let controls = g.controls();
        for &q in controls.iter().chain(std::iter::once(&target)) {
            if q >= width {
                return Err(OracleError::QubitOutOfRange { qubit: q, width });
            }
        }
        if controls.contains(&target) {
            return Err(OracleError::ControlIsTarget(target));
        }
        let cmask = controls.iter().fold(0usize, |m, &q| m | 1 << layout.qubit_shift(q));
        let tbit = 1usize << layout.qubit_shift(target);
        for i in 0..amps.len() {
            if i & tbit == 0 && i & cmask == cmask {
                amps.swap(i, i | tbit);
            }
        }
    }
    Ok(QuantumState::from_parts(layout.clone(), amps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{random_amplitudes, RegisterLayout};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn plus_zero() -> QuantumState {
        let layout = RegisterLayout::new([("I", 1), ("II", 1)]).unwrap();
        QuantumState::make_state(layout, &[c(H), c(H)]).unwrap()
    }

    fn random_state(widths: &[(&str, usize)], seed: u64) -> QuantumState {
        let layout = RegisterLayout::new(widths.iter().copied()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = random_amplitudes(layout.total_width(), &mut rng);
        QuantumState::from_amplitudes(layout, amps).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let s = plus_zero();
        let zero = BooleanFunction::zero(1, 1).unwrap();
        assert_eq!(apply_oracle(&s, &zero, "I", "II").unwrap(), s);

        let x = BooleanFunction::named("x").unwrap();
        let out = apply_oracle(&s, &x, "I", "II").unwrap();
        assert_eq!(out.amplitudes(), &[c(H), c(0.0), c(0.0), c(H)]);

        for seed in 0..20 {
            let f = BooleanFunction::random(3, 2, seed).unwrap();
            let s = random_state(&[("I", 3), ("II", 2)], seed);
            let twice = apply_oracle(&apply_oracle(&s, &f, "I", "II").unwrap(), &f, "I", "II").unwrap();
            assert_eq!(twice, s);
        }
    }

    #[test]
    fn oracle_errors() {
        let s = plus_zero();
        let x = BooleanFunction::named("x").unwrap();
        assert!(matches!(apply_oracle(&s, &x, "I", "I"), Err(OracleError::SameRegister(_))));
        let wide = BooleanFunction::zero(2, 1).unwrap();
        assert!(matches!(apply_oracle(&s, &wide, "I", "II"), Err(OracleError::WidthMismatch { .. })));
        assert!(matches!(
            apply_oracle(&s, &x, "I", "III"),
            Err(OracleError::State(StateError::UnknownRegister(_)))
        ));
    }

    #[test]
    fn hadamard_examples() {
        let layout = RegisterLayout::new([("I", 1)]).unwrap();
        let zero = QuantumState::basis(layout, &[]).unwrap();
        let plus = apply_hadamard(&zero, "I").unwrap();
        assert!((plus.amplitudes()[0] - c(H)).norm() < 1e-15);
        assert!((plus.amplitudes()[1] - c(H)).norm() < 1e-15);

        let layout = RegisterLayout::new([("I", 2)]).unwrap();
        let s = QuantumState::basis(layout, &[("I", 0b11)]).unwrap();
        let out = apply_hadamard(&s, "I").unwrap();
        for (got, want) in out.amplitudes().iter().zip([0.5, -0.5, -0.5, 0.5]) {
            assert!((got - c(want)).norm() < 1e-15);
        }

        for seed in 0..10 {
            let s = random_state(&[("I", 3)], seed);
            let back = apply_hadamard(&apply_hadamard(&s, "I").unwrap(), "I").unwrap();
            assert!(back.max_amplitude_error(&s).unwrap() < 1e-12);
        }
        assert!(apply_hadamard(&s, "II").is_err());
    }

    #[test]
    fn hadamard_only_touches_its_register() {
        let s = random_state(&[("a", 1), ("b", 2), ("c", 1)], 4);
        let via_b = apply_hadamard(&s, "b").unwrap();
        // H on `b` leaves the reduced state of (a, c) unchanged
        let before = s.reduced_density_matrix(&["a", "c"]).unwrap();
        let after = via_b.reduced_density_matrix(&["a", "c"]).unwrap();
        assert!((before.matrix() - after.matrix()).camax() < 1e-12);
    }

    #[test]
    fn attach_detach_examples() {
        let s = random_state(&[("I", 2)], 1);
        let back = detach_register(&attach_register(&s, "II", 3).unwrap(), "II").unwrap();
        assert_eq!(back, s);

        let bell = apply_oracle(&plus_zero(), &BooleanFunction::named("x").unwrap(), "I", "II").unwrap();
        assert!(matches!(detach_register(&bell, "II"), Err(OracleError::EntangledRegister(_))));
        assert!(matches!(
            attach_register(&s, "I", 1),
            Err(OracleError::State(StateError::DuplicateRegister(_)))
        ));
    }

    #[test]
    fn detach_unentangled_nonzero_register() {
        // |ψ⟩_I ⊗ |1⟩_II: not cleared but a product state
        let s = random_state(&[("I", 2)], 2);
        let with = apply_xor_constant(&attach_register(&s, "II", 1).unwrap(), "II", 1).unwrap();
        let back = detach_register(&with, "II").unwrap();
        assert!((back.fidelity(&s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detach_cleared_register_from_eq5_state() {
        // Σ α_m |m⟩_I |0⟩_II |F_B(m)⟩_III  →  Σ α_m |m⟩_I |F_B(m)⟩_III
        let fb = BooleanFunction::random(2, 2, 8).unwrap();
        let layout = RegisterLayout::new([("I", 2), ("II", 2), ("III", 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let alpha = random_amplitudes(2, &mut rng);
        let s = QuantumState::make_state(layout, &alpha).unwrap();
        let s = apply_oracle(&s, &fb, "I", "III").unwrap();
        let out = detach_register(&s, "II").unwrap();
        assert_eq!(out.layout().registers().len(), 2);
        for m in 0..4u64 {
            let a = out.amplitude(&[("I", m), ("III", fb.eval_index(m))]).unwrap();
            assert_eq!(a, s.amplitude(&[("I", m), ("III", fb.eval_index(m))]).unwrap());
        }
    }

    #[test]
    fn permutation_and_xor_constant() {
        let s = random_state(&[("I", 2)], 6);
        let perm = BooleanFunction::new(2, 2, vec![2, 0, 3, 1]).unwrap();
        let moved = apply_permutation(&s, &perm, "I").unwrap();
        for m in 0..4u64 {
            assert_eq!(moved.amplitudes()[perm.eval_index(m) as usize], s.amplitudes()[m as usize]);
        }
        let back = apply_permutation(&moved, &perm.inverse().unwrap(), "I").unwrap();
        assert_eq!(back, s);
        let constant = BooleanFunction::zero(2, 2).unwrap();
        assert!(matches!(apply_permutation(&s, &constant, "I"), Err(OracleError::NotBijective)));

        let shifted = apply_xor_constant(&s, "I", 0b10).unwrap();
        assert_eq!(shifted.amplitudes()[0b11], s.amplitudes()[0b01]);
        assert!(apply_xor_constant(&s, "I", 0b100).is_err());
    }

    #[test]
    fn compile_examples() {
        let x = BooleanFunction::named("x").unwrap();
        assert_eq!(compile_oracle(&x, &[0], &[1]).unwrap(), vec![Gate::Cx { control: 0, target: 1 }]);
        let one = BooleanFunction::named("1").unwrap();
        assert_eq!(compile_oracle(&one, &[0], &[1]).unwrap(), vec![Gate::X { target: 1 }]);
        let xbar = BooleanFunction::named("xbar").unwrap();
        assert_eq!(
            compile_oracle(&xbar, &[0], &[1]).unwrap(),
            vec![Gate::X { target: 0 }, Gate::Cx { control: 0, target: 1 }, Gate::X { target: 0 }]
        );
        assert!(compile_oracle(&x, &[0], &[0]).is_err());
        assert!(compile_oracle(&x, &[0, 1], &[2]).is_err());
    }

    #[test]
    fn compiled_gates_match_direct_oracle() {
        for seed in 0..30u64 {
            let k = 1 + (seed % 3) as usize;
            let n = 1 + (seed % 2) as usize;
            let f = BooleanFunction::random(k, n, 500 + seed).unwrap();
            let s = random_state(&[("I", k), ("II", n)], seed);
            let src: Vec<usize> = s.layout().qubits("I").unwrap().collect();
            let tgt: Vec<usize> = s.layout().qubits("II").unwrap().collect();
            let gates = compile_oracle(&f, &src, &tgt).unwrap();
            let via_gates = apply_gates(&s, &gates).unwrap();
            assert_eq!(via_gates, apply_oracle(&s, &f, "I", "II").unwrap());
        }
    }

    #[test]
    fn apply_gates_validates_indices() {
        let s = plus_zero();
        assert!(matches!(
            apply_gates(&s, &[Gate::X { target: 2 }]),
            Err(OracleError::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            apply_gates(&s, &[Gate::Mcx { controls: vec![0, 1], target: 1 }]),
            Err(OracleError::ControlIsTarget(1))
        ));
    }

    #[test]
    fn gate_json_format() {
        let gates = vec![
            Gate::X { target: 2 },
            Gate::Cx { control: 0, target: 2 },
            Gate::Mcx { controls: vec![0, 1], target: 3 },
        ];
        let json = serde_json::to_string(&gates).unwrap();
        assert_eq!(
            json,
            r#"[{"gate":"X","controls":[],"target":2},{"gate":"CX","controls":[0],"target":2},{"gate":"MCX","controls":[0,1],"target":3}]"#
        );
        let back: Vec<Gate> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, gates);
        assert!(serde_json::from_str::<Gate>(r#"{"gate":"CX","controls":[],"target":1}"#).is_err());
    }
}
