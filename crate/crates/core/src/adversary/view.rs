//! What a passive Eve sees on one pass, averaged over the secret keys.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{all_functions, AttackError, KEY_SPACE_LIMIT};
use crate::bits::BitString;
use crate::boolfn::BooleanFunction;
use crate::protocol::{self, Honest, Keys, PartySecrets, Payload, ProtocolId, ProtocolSpec, RunOptions};
use crate::statevector::{trace_distance, DensityMatrix};

/// Which keys Eve's view is averaged over (uniformly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KeyEnsemble {
    /// The whole key space; refused past [`KEY_SPACE_LIMIT`].
    Exhaustive,
    Sampled { count: usize, seed: u64 },
    Fixed { keys: Vec<Keys> },
}

impl KeyEnsemble {
    pub fn resolve(&self, protocol: ProtocolId, k: usize, n: usize) -> Result<Vec<Keys>, AttackError> {
        match self {
            KeyEnsemble::Exhaustive => key_space(protocol, k, n),
            KeyEnsemble::Sampled { count, seed } => sample_keys(protocol, k, n, *count, *seed),
            KeyEnsemble::Fixed { keys } => Ok(keys.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveView {
    pub rho_a: DensityMatrix,
    pub rho_b: DensityMatrix,
    pub trace_distance: f64,
}

fn factorial(x: u128) -> u128 {
    (1..=x).try_fold(1u128, |acc, i| acc.checked_mul(i)).unwrap_or(u128::MAX)
}

fn key_space_size(protocol: ProtocolId, k: usize, n: usize) -> u128 {
    let pow2 = |e: usize| if e >= 127 { u128::MAX } else { 1u128 << e };
    let funcs = pow2(n.saturating_mul(1 << k.min(63)));
    let strings = pow2(k);
    match protocol {
        ProtocolId::Basic | ProtocolId::Classical | ProtocolId::Alt20 => funcs.saturating_mul(funcs),
        ProtocolId::Authenticated => funcs.saturating_pow(3).saturating_mul(funcs.saturating_sub(1)),
        ProtocolId::Alt19 => strings.saturating_mul(strings),
        ProtocolId::AltKeystring => strings,
        ProtocolId::Alt21 => factorial(strings),
        ProtocolId::Alt22 => funcs,
    }
}

fn permutations(len: usize) -> Vec<Vec<u64>> {
    fn go(prefix: &mut Vec<u64>, rest: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..len as u64).collect(), &mut out);
    out
}

/// Every key choice for `protocol` with message width `k` and tag width
/// `n`, each listed once (so uniform averaging over the list is uniform
/// over keys). The permutation scheme uses `n = k`.
pub fn key_space(protocol: ProtocolId, k: usize, n: usize) -> Result<Vec<Keys>, AttackError> {
    let size = key_space_size(protocol, k, n);
    if size > KEY_SPACE_LIMIT as u128 {
        return Err(AttackError::KeySpaceTooLarge { size, limit: KEY_SPACE_LIMIT });
    }
    let strings = || (0..1u64 << k).map(move |v| BitString::new(v, k));
    let mut out = Vec::new();
    match protocol {
        ProtocolId::Basic | ProtocolId::Classical | ProtocolId::Alt20 => {
            let all = all_functions(k, n)?;
            for fa in &all {
                for fb in &all {
                    let (fa, fb) = (fa.clone(), fb.clone());
                    out.push(if protocol == ProtocolId::Alt20 {
                        Keys::Auxiliary { fa, fb }
                    } else {
                        Keys::ThreePass { fa, fb }
                    });
                }
            }
        }
        ProtocolId::Authenticated => {
            let all = all_functions(k, n)?;
            for fa in &all {
                for fb in &all {
                    for sa in &all {
                        for sb in all.iter().filter(|sb| *sb != sa) {
                            out.push(Keys::Authenticated {
                                alice: PartySecrets::with_id(fa.clone(), sa.clone()),
                                bob: PartySecrets::with_id(fb.clone(), sb.clone()),
                            });
                        }
                    }
                }
            }
        }
        ProtocolId::Alt19 => {
            for sa in strings() {
                let sa = sa?;
                for sb in strings() {
                    out.push(Keys::BasisShift { sa, sb: sb? });
                }
            }
        }
        ProtocolId::AltKeystring => {
            for s in strings() {
                out.push(Keys::KeyString { s: s? });
            }
        }
        ProtocolId::Alt21 => {
            for table in permutations(1 << k) {
                out.push(Keys::Permutation { s: BooleanFunction::new(k, k, table)? });
            }
        }
        ProtocolId::Alt22 => {
            out.extend(all_functions(k, n)?.into_iter().map(|s| Keys::AppendOracle { s }));
        }
    }
    Ok(out)
}

/// `count` keys drawn uniformly (with replacement) from the key space.
pub fn sample_keys(protocol: ProtocolId, k: usize, n: usize, count: usize, seed: u64) -> Result<Vec<Keys>, AttackError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Ok(protocol::random_keys(protocol, k, n, &mut rng)?)).collect()
}

fn single_view(protocol: ProtocolId, pass: usize, payload: &Payload, keys: &Keys) -> Result<DensityMatrix, AttackError> {
    let spec = ProtocolSpec::new(protocol, payload.clone(), keys.clone())?;
    let t = protocol::run(&spec, &mut Honest, &RunOptions::default())?;
    let record = t.passes.get(pass.wrapping_sub(1)).ok_or_else(|| AttackError::Inapplicable {
        strategy: "eve-view".into(),
        protocol,
        reason: format!("protocol has {} passes, not {pass}", t.passes.len()),
    })?;
    let regs: Vec<&str> = record.in_flight.iter().map(String::as_str).collect();
    Ok(record.snapshot.reduced_density_matrix(&regs)?)
}

/// Average state of the in-flight registers on `pass` (1-based) over
/// `keys`, for a fixed message.
pub fn eve_view(protocol: ProtocolId, pass: usize, payload: &Payload, keys: &[Keys]) -> Result<DensityMatrix, AttackError> {
    if keys.is_empty() {
        return Err(AttackError::EmptyEnsemble);
    }
    let views = keys.iter().map(|k| single_view(protocol, pass, payload, k)).collect::<Result<Vec<_>, _>>()?;
    Ok(DensityMatrix::mixture(views.iter().map(|v| (1.0, v)))?)
}

/// Eve's views of two messages and their trace distance, which bounds her
/// advantage in telling them apart from this pass alone.
pub fn eve_view_pair(
    protocol: ProtocolId,
    pass: usize,
    a: &Payload,
    b: &Payload,
    keys: &[Keys],
) -> Result<EveView, AttackError> {
    let rho_a = eve_view(protocol, pass, a, keys)?;
    let rho_b = eve_view(protocol, pass, b, keys)?;
    let trace_distance = compare_views(&rho_a, &rho_b)?;
    Ok(EveView { rho_a, rho_b, trace_distance })
}

pub fn compare_views(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, AttackError> {
    Ok(trace_distance(a, b)?)
}

/// Known-message analysis: the smallest trace distance between Eve's views
/// under two different keys. 1 means every key is identified exactly.
pub fn key_distinguishability(
    protocol: ProtocolId,
    pass: usize,
    payload: &Payload,
    keys: &[Keys],
) -> Result<f64, AttackError> {
    let views = keys.iter().map(|k| single_view(protocol, pass, payload, k)).collect::<Result<Vec<_>, _>>()?;
    let mut min: Option<f64> = None;
    for i in 0..views.len() {
        for j in i + 1..views.len() {
            if keys[i] == keys[j] {
                continue;
            }
            let d = compare_views(&views[i], &views[j])?;
            min = Some(min.map_or(d, |m| m.min(d)));
        }
    }
    min.ok_or(AttackError::EmptyEnsemble)
}
