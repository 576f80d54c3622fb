//! Dense pure states over named qubit registers.
//!
//! A [`QuantumState`] stores all `2^total_width` amplitudes of a pure state.
//! Basis indices concatenate register contents in layout order (see
//! [`RegisterLayout`]). Everything here is immutable: operations return new
//! states.

mod density;
mod layout;

pub use density::{trace_distance, DensityMatrix, MatrixRows};
pub use layout::{Register, RegisterField, RegisterLayout};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;

/// Default cap on the total number of qubits in a layout.
pub const DEFAULT_MAX_QUBITS: usize = 24;
/// Environment variable overriding [`DEFAULT_MAX_QUBITS`].
pub const MAX_QUBITS_ENV: &str = "QNOKEY_MAX_QUBITS";
/// Tolerance for internal invariants (norms, cleared registers).
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance for user supplied amplitude vectors, which are then renormalized.
pub const INPUT_TOL: f64 = 1e-6;
/// Largest matrix dimension handed to the eigensolver.
pub const MAX_EIGEN_DIM: usize = 1 << 12;

pub fn max_qubits() -> usize {
    std::env::var(MAX_QUBITS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("register `{0}` must have width at least 1")]
    ZeroWidth(String),
    #[error("duplicate register name `{0}`")]
    DuplicateRegister(String),
    #[error("layout needs {total} qubits but the limit is {max}")]
    TooManyQubits { total: usize, max: usize },
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("value {value} does not fit register `{register}`")]
    ValueOutOfRange { register: String, value: u64 },
    #[error("expected {expected} amplitudes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("amplitude vector is zero")]
    ZeroVector,
    #[error("amplitude vector has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("states have different register layouts")]
    LayoutMismatch,
    #[error("register set is empty")]
    EmptyRegisterSet,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix dimension {dim} exceeds the eigensolver limit {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
}

/// Result of measuring one register in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub register: String,
    pub value: BitString,
    pub probability: f64,
    pub post_state: QuantumState,
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    layout: RegisterLayout,
    amplitudes: Vec<C64>,
}

fn norm(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

impl QuantumState {
    /// Accepts amplitudes whose norm is within [`INPUT_TOL`] of 1 and
    /// renormalizes them exactly.
    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: Vec<C64>) -> Result<Self, StateError> {
        if amplitudes.len() != layout.dim() {
            return Err(StateError::LengthMismatch { expected: layout.dim(), got: amplitudes.len() });
        }
        let n = norm(&amplitudes);
        if n == 0.0 {
            return Err(StateError::ZeroVector);
        }
        if (n - 1.0).abs() > INPUT_TOL {
            return Err(StateError::NotNormalized(n));
        }
        Ok(Self::from_parts(layout, amplitudes.into_iter().map(|a| a / n).collect()))
    }

    pub(crate) fn from_parts(layout: RegisterLayout, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(layout.dim(), amplitudes.len());
        Self { layout, amplitudes }
    }

    /// `Σ α_m |m⟩_I |0⟩_II ...`: the message goes into the first register of
    /// `layout`, every other register starts at zero.
    pub fn make_state(layout: RegisterLayout, message: &[C64]) -> Result<Self, StateError> {
        let first = layout.registers()[0].name.clone();
        let field = layout.field(&first)?;
        let expected = 1usize << field.width;
        if message.len() != expected {
            return Err(StateError::LengthMismatch { expected, got: message.len() });
        }
        let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
        for (m, a) in message.iter().enumerate() {
            amps[field.set(0, m as u64)] = *a;
        }
        Self::from_amplitudes(layout, amps)
    }

    /// Computational basis state; registers not named are zero.
    pub fn basis(layout: RegisterLayout, values: &[(&str, u64)]) -> Result<Self, StateError> {
        let index = layout.index_of(values)?;
        let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self::from_parts(layout, amps))
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, values: &[(&str, u64)]) -> Result<C64, StateError> {
        Ok(self.amplitudes[self.layout.index_of(values)?])
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `|⟨a|b⟩|²`.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64, StateError> {
        if self.layout != other.layout {
            return Err(StateError::LayoutMismatch);
        }
        let overlap: C64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr().min(1.0))
    }

    /// `⟨ψ|ρ_R|ψ⟩` where `ρ_R` is the reduced state of `register` and `ψ` a
    /// pure state of that register. Equals [`fidelity`](Self::fidelity) when
    /// the register is unentangled.
    pub fn register_fidelity(&self, register: &str, target: &[C64]) -> Result<f64, StateError> {
        let field = self.layout.field(register)?;
        let sub = 1usize << field.width;
        if target.len() != sub {
            return Err(StateError::LengthMismatch { expected: sub, got: target.len() });
        }
        // For each setting of the other registers, project onto ψ.
        let rest_dim = self.layout.dim() >> field.width;
        let low_mask = (1usize << field.shift) - 1;
        let mut total = 0.0;
        for rest in 0..rest_dim {
            let base = ((rest >> field.shift) << (field.shift + field.width)) | (rest & low_mask);
            let inner: C64 = (0..sub)
                .map(|m| target[m].conj() * self.amplitudes[field.set(base, m as u64)])
                .sum();
            total += inner.norm_sqr();
        }
        Ok(total.min(1.0))
    }

    /// Born-rule distribution of a register's value.
    pub fn register_probabilities(&self, register: &str) -> Result<Vec<f64>, StateError> {
        let field = self.layout.field(register)?;
        let mut probs = vec![0.0; 1 << field.width];
        for (i, a) in self.amplitudes.iter().enumerate() {
            probs[field.get(i) as usize] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Probability that `register` reads all zeros.
    pub fn zero_probability(&self, register: &str) -> Result<f64, StateError> {
        let field = self.layout.field(register)?;
        let mask = field.mask();
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .min(1.0))
    }

    /// Projects `register` onto `value`. Returns the outcome probability and
    /// the renormalized post-measurement state (`None` when the probability
    /// is zero).
    pub fn project(&self, register: &str, value: u64) -> Result<(f64, Option<QuantumState>), StateError> {
        let field = self.layout.field(register)?;
        if value >> field.width != 0 {
            return Err(StateError::ValueOutOfRange { register: register.to_string(), value });
        }
        let mut amps = self.amplitudes.clone();
        let mut p = 0.0;
        for (i, a) in amps.iter_mut().enumerate() {
            if field.get(i) == value {
                p += a.norm_sqr();
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        if p <= 0.0 {
            return Ok((0.0, None));
        }
        let n = p.sqrt();
        amps.iter_mut().for_each(|a| *a /= n);
        Ok((p.min(1.0), Some(Self::from_parts(self.layout.clone(), amps))))
    }

    /// Computational-basis measurement of `register`, seeded with a
    /// ChaCha8 generator.
    pub fn measure_register(&self, register: &str, seed: u64) -> Result<MeasurementOutcome, StateError> {
        self.measure_register_with(register, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn measure_register_with<R: Rng + ?Sized>(
        &self,
        register: &str,
        rng: &mut R,
    ) -> Result<MeasurementOutcome, StateError> {
        let probs = self.register_probabilities(register)?;
        let width = self.layout.width(register)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = None;
        for (v, p) in probs.iter().enumerate() {
            if *p <= 0.0 {
                continue;
            }
            acc += p;
            chosen = Some(v);
            if u < acc {
                break;
            }
        }
        // round-off can leave acc slightly below u; fall back to the last
        // value with non-zero weight
        let value = chosen.ok_or(StateError::ZeroVector)? as u64;
        let (probability, post) = self.project(register, value)?;
        Ok(MeasurementOutcome {
            register: register.to_string(),
            value: BitString::new(value, width).expect("register width fits in a bit string"),
            probability,
            post_state: post.ok_or(StateError::ZeroVector)?,
        })
    }

    /// Partial trace over every register not in `keep`. Kept registers stay
    /// in layout order.
    pub fn reduced_density_matrix(&self, keep: &[&str]) -> Result<DensityMatrix, StateError> {
        if keep.is_empty() {
            return Err(StateError::EmptyRegisterSet);
        }
        for name in keep {
            self.layout.field(name)?;
        }
        let kept: Vec<RegisterField> = self
            .layout
            .registers()
            .iter()
            .filter(|r| keep.contains(&r.name.as_str()))
            .map(|r| self.layout.field(&r.name).unwrap())
            .collect();
        let traced: Vec<RegisterField> = self
            .layout
            .registers()
            .iter()
            .filter(|r| !keep.contains(&r.name.as_str()))
            .map(|r| self.layout.field(&r.name).unwrap())
            .collect();
        let pack = |fields: &[RegisterField], i: usize| {
            fields.iter().fold(0usize, |acc, f| (acc << f.width) | f.get(i) as usize)
        };
        let kept_width: usize = kept.iter().map(|f| f.width).sum();
        let kdim = 1usize << kept_width;
        let rdim = self.layout.dim() >> kept_width;
        // rows: traced index, cols: kept index
        let mut block = vec![C64::new(0.0, 0.0); rdim * kdim];
        for (i, a) in self.amplitudes.iter().enumerate() {
            block[pack(&traced, i) * kdim + pack(&kept, i)] = *a;
        }
        let mut rho = nalgebra::DMatrix::<C64>::zeros(kdim, kdim);
        for r in 0..rdim {
            let row = &block[r * kdim..(r + 1) * kdim];
            for (a, x) in row.iter().enumerate() {
                if *x == C64::new(0.0, 0.0) {
                    continue;
                }
                for (b, y) in row.iter().enumerate() {
                    rho[(a, b)] += x * y.conj();
                }
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(rho))
    }

    /// Same amplitudes with a register renamed.
    pub fn rename_register(&self, from: &str, to: &str) -> Result<QuantumState, StateError> {
        Ok(Self::from_parts(self.layout.renamed(from, to)?, self.amplitudes.clone()))
    }

    /// Largest absolute amplitude difference to `other`.
    pub fn max_amplitude_error(&self, other: &QuantumState) -> Result<f64, StateError> {
        if self.layout != other.layout {
            return Err(StateError::LayoutMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Random normalized amplitude vector of length `2^width` (complex Gaussian
/// entries, i.e. Haar-distributed direction).
pub fn random_amplitudes<R: Rng + ?Sized>(width: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..1usize << width)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

/// On-disk form of a state: `{"layout": [["I",k],...], "amplitudes": [[re,im],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateSnapshot {
    pub layout: Vec<(String, usize)>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&QuantumState> for StateSnapshot {
    fn from(s: &QuantumState) -> Self {
        StateSnapshot {
            layout: s.layout.pairs(),
            amplitudes: s.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<StateSnapshot> for QuantumState {
    type Error = StateError;

    fn try_from(s: StateSnapshot) -> Result<Self, Self::Error> {
        let layout = RegisterLayout::new(s.layout)?;
        let amps = s.amplitudes.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        QuantumState::from_amplitudes(layout, amps)
    }
}

impl Serialize for QuantumState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        StateSnapshot::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let snap = StateSnapshot::deserialize(deserializer)?;
        QuantumState::try_from(snap).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn two(a: &str, b: &str) -> RegisterLayout {
        RegisterLayout::new([(a, 1), (b, 1)]).unwrap()
    }

    fn bell() -> QuantumState {
        QuantumState::from_amplitudes(two("I", "II"), vec![c(H), c(0.0), c(0.0), c(H)]).unwrap()
    }

    #[test]
    fn make_state_examples() {
        let s = QuantumState::make_state(two("I", "II"), &[c(1.0), c(0.0)]).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);

        let s = QuantumState::make_state(two("I", "II"), &[c(H), c(H)]).unwrap();
        assert_eq!(s.amplitude(&[("I", 0), ("II", 0)]).unwrap(), c(H));
        assert_eq!(s.amplitude(&[("I", 1), ("II", 0)]).unwrap(), c(H));
        assert_eq!(s.amplitude(&[("I", 1), ("II", 1)]).unwrap(), c(0.0));

        let layout = RegisterLayout::new([("I", 2), ("II", 2)]).unwrap();
        let s = QuantumState::make_state(layout, &[c(0.6), c(0.0), c(0.0), c(0.8)]).unwrap();
        for i in 0..16usize {
            let (m, y) = (i >> 2, i & 3);
            let expected = match (m, y) {
                (0, 0) => 0.6,
                (3, 0) => 0.8,
                _ => 0.0,
            };
            assert!((s.amplitudes()[i] - c(expected)).norm() < 1e-15, "index {i}");
        }
    }

    #[test]
    fn make_state_errors() {
        let layout = two("I", "II");
        assert!(matches!(
            QuantumState::make_state(layout.clone(), &[c(1.0)]),
            Err(StateError::LengthMismatch { .. })
        ));
        assert!(matches!(
            QuantumState::make_state(layout.clone(), &[c(0.0), c(0.0)]),
            Err(StateError::ZeroVector)
        ));
        assert!(matches!(
            QuantumState::make_state(layout, &[c(1.0), c(1.0)]),
            Err(StateError::NotNormalized(_))
        ));
    }

    #[test]
    fn slightly_off_input_is_renormalized() {
        let s = QuantumState::make_state(two("I", "II"), &[c(0.6 + 1e-7), c(0.8)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let layout = RegisterLayout::new([("I", 1)]).unwrap();
        let zero = QuantumState::basis(layout.clone(), &[("I", 0)]).unwrap();
        let one = QuantumState::basis(layout.clone(), &[("I", 1)]).unwrap();
        let plus = QuantumState::from_amplitudes(layout, vec![c(H), c(H)]).unwrap();
        assert!((plus.fidelity(&plus).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(zero.fidelity(&one).unwrap(), 0.0);
        assert!((plus.fidelity(&zero).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(bell().fidelity(&zero), Err(StateError::LayoutMismatch)));
    }

    #[test]
    fn measure_examples() {
        let s = QuantumState::basis(two("I", "II"), &[]).unwrap();
        let out = s.measure_register("II", 3).unwrap();
        assert_eq!(out.value.value(), 0);
        assert_eq!(out.probability, 1.0);
        assert_eq!(out.post_state, s);

        let mut seen = [false; 2];
        for seed in 0..64 {
            let out = bell().measure_register("II", seed).unwrap();
            assert!((out.probability - 0.5).abs() < 1e-12);
            let v = out.value.value();
            seen[v as usize] = true;
            let expected = QuantumState::basis(two("I", "II"), &[("I", v), ("II", v)]).unwrap();
            assert!(out.post_state.max_amplitude_error(&expected).unwrap() < 1e-12);
        }
        assert_eq!(seen, [true, true]);

        assert!(matches!(bell().measure_register("III", 0), Err(StateError::UnknownRegister(_))));
    }

    #[test]
    fn measurement_is_seed_deterministic() {
        let a = bell().measure_register("I", 99).unwrap();
        let b = bell().measure_register("I", 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_probability_examples() {
        let s = QuantumState::make_state(two("I", "II"), &[c(0.6), c(0.8)]).unwrap();
        assert!((s.zero_probability("II").unwrap() - 1.0).abs() < 1e-15);
        assert!((bell().zero_probability("II").unwrap() - 0.5).abs() < 1e-15);
        assert!(bell().zero_probability("X").is_err());
    }

    #[test]
    fn reduced_density_examples() {
        let product = QuantumState::basis(two("I", "II"), &[]).unwrap();
        let rho = product.reduced_density_matrix(&["I"]).unwrap();
        assert!((rho.get(0, 0) - c(1.0)).norm() < 1e-15);
        assert!(rho.get(1, 1).norm() < 1e-15);

        let rho = bell().reduced_density_matrix(&["I"]).unwrap();
        assert!((rho.get(0, 0) - c(0.5)).norm() < 1e-15);
        assert!((rho.get(1, 1) - c(0.5)).norm() < 1e-15);
        assert!(rho.get(0, 1).norm() < 1e-15);

        assert!(matches!(bell().reduced_density_matrix(&[]), Err(StateError::EmptyRegisterSet)));
        assert!(bell().reduced_density_matrix(&["Q"]).is_err());
    }

    #[test]
    fn reduced_density_keeps_layout_order() {
        // |0⟩_a |1⟩_b |0⟩_c keeping {c, a} gives index (a, c) = 00
        let layout = RegisterLayout::new([("a", 1), ("b", 1), ("c", 1)]).unwrap();
        let s = QuantumState::basis(layout, &[("a", 1), ("b", 1)]).unwrap();
        let rho = s.reduced_density_matrix(&["c", "a"]).unwrap();
        assert!((rho.get(2, 2) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn register_fidelity_matches_density_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let layout = RegisterLayout::new([("I", 2), ("II", 1)]).unwrap();
        let s = QuantumState::from_amplitudes(layout, random_amplitudes(3, &mut rng)).unwrap();
        let psi = random_amplitudes(2, &mut rng);
        let rho = s.reduced_density_matrix(&["I"]).unwrap();
        let mut expected = C64::new(0.0, 0.0);
        for a in 0..4 {
            for b in 0..4 {
                expected += psi[a].conj() * rho.get(a, b) * psi[b];
            }
        }
        assert!((s.register_fidelity("I", &psi).unwrap() - expected.re).abs() < 1e-12);
    }

    #[test]
    fn snapshot_round_trip() {
        let json = serde_json::to_string(&bell()).unwrap();
        assert!(json.starts_with("{\"layout\":[[\"I\",1],[\"II\",1]],\"amplitudes\":[["));
        let back: QuantumState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, bell());
    }
}
