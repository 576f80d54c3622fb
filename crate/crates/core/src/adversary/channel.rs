//! Eve as a channel: everything she does happens to in-flight registers or
//! to ancillas she brings herself.

use rand_chacha::ChaCha8Rng;

use super::EveStrategy;
use crate::boolfn::BooleanFunction;
use crate::oracle;
use crate::protocol::{Channel, PassInfo, ProtocolError};
use crate::statevector::QuantumState;

/// First free name of the form `base`, `base#2`, ...
pub(crate) fn fresh_name(state: &QuantumState, base: &str) -> String {
    let mut name = base.to_string();
    let mut n = 2;
    while state.layout().contains(&name) {
        name = format!("{base}#{n}");
        n += 1;
    }
    name
}

/// Copies `register` into a fresh Eve register in the computational basis
/// (a fan-out of CNOTs). Tracing the copy out is the same as measuring.
pub(crate) fn basis_copy(state: &QuantumState, register: &str, into: &str) -> Result<QuantumState, ProtocolError> {
    let width = state.layout().width(register)?;
    let name = fresh_name(state, into);
    let s = oracle::attach_register(state, &name, width)?;
    Ok(oracle::apply_oracle(&s, &BooleanFunction::identity(width)?, register, &name)?)
}

pub(crate) struct EveChannel<'a> {
    strategy: &'a EveStrategy,
    /// Present when Eve's measurements are sampled rather than deferred.
    rng: Option<ChaCha8Rng>,
}

impl<'a> EveChannel<'a> {
    pub fn new(strategy: &'a EveStrategy, rng: Option<ChaCha8Rng>) -> Self {
        Self { strategy, rng }
    }
}

impl Channel for EveChannel<'_> {
    fn transmit(&mut self, pass: &PassInfo, state: QuantumState) -> Result<QuantumState, ProtocolError> {
        match self.strategy {
            EveStrategy::PassiveInspect => Ok(state),
            EveStrategy::InterceptMeasureResend { pass: p, registers } if *p == pass.index => {
                let mut state = state;
                for reg in registers {
                    state = match &mut self.rng {
                        Some(rng) => state.measure_register_with(reg, rng)?.post_state,
                        None => basis_copy(&state, reg, &format!("E.{reg}@{p}"))?,
                    };
                }
                Ok(state)
            }
            EveStrategy::SubstituteOracle { fe, target, pass: p, keep_original } if *p == pass.index => {
                let keep = if *keep_original { "E" } else { "env" };
                let name = fresh_name(&state, &format!("{keep}.{target}"));
                let s = state.rename_register(target, &name)?;
                let s = oracle::attach_register(&s, target, fe.width())?;
                Ok(oracle::apply_oracle(&s, fe, &pass.message_register, target)?)
            }
            EveStrategy::Bitflip { register, mask, pass: p } if *p == pass.index => {
                Ok(oracle::apply_xor_constant(&state, register, *mask)?)
            }
            EveStrategy::FullMitm { .. } => {
                Err(ProtocolError::Channel("full-mitm is not a channel strategy".into()))
            }
            _ => Ok(state),
        }
    }
}
