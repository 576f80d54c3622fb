//! The alternative schemes: basis shifts, the auxiliary-register variant,
//! the shared key string and the two shared-function constructions.

use super::engine::{Participant, Session, TAG_A};
use super::{Channel, Direction, Keys, ProtocolError, ProtocolId, MESSAGE_REGISTER as MSG};
use crate::boolfn::BooleanFunction;

pub(crate) const NO_AUTHENTICATION: &str = "no authentication possible";
pub(crate) const KEY_LEAKS: &str = "no authentication possible; Eve can get information of s";

fn pass(session: &mut Session<'_>, channel: &mut dyn Channel, step: &str, dir: Direction, in_flight: &[&str]) -> Result<(), ProtocolError> {
    session.send(channel, step, dir, MSG, in_flight)
}

/// Runs `id` and returns its weakness tag.
pub(crate) fn run_scheme(
    session: &mut Session<'_>,
    channel: &mut dyn Channel,
    id: ProtocolId,
    keys: &Keys,
) -> Result<String, ProtocolError> {
    use Direction::{AliceToBob as AB, BobToAlice as BA};
    match keys {
        Keys::BasisShift { sa, sb } => {
            session.xor_constant(MSG, sa.value())?;
            pass(session, channel, "alice-shift", AB, &[MSG])?;
            session.xor_constant(MSG, sb.value())?;
            pass(session, channel, "bob-shift", BA, &[MSG])?;
            session.xor_constant(MSG, sa.value())?;
            pass(session, channel, "alice-unshift", AB, &[MSG])?;
            session.xor_constant(MSG, sb.value())?;
            Ok(NO_AUTHENTICATION.into())
        }
        Keys::Auxiliary { fa, fb } => {
            let bob = Participant::honest("bob", fb);
            session.attach(TAG_A, fa.width())?;
            session.oracle(fa, MSG, TAG_A)?;
            pass(session, channel, "alice-encrypt", AB, &[MSG, TAG_A])?;
            session.oracle(fb, MSG, TAG_A)?;
            pass(session, channel, "bob-encrypt", BA, &[MSG, TAG_A])?;
            session.oracle(fa, MSG, TAG_A)?;
            pass(session, channel, "alice-decrypt", AB, &[MSG, TAG_A])?;
            session.oracle(fb, MSG, TAG_A)?;
            session.discard(&bob, TAG_A)?;
            Ok(NO_AUTHENTICATION.into())
        }
        Keys::KeyString { s } => {
            session.xor_constant(MSG, s.value())?;
            pass(session, channel, "alice-encrypt", AB, &[MSG])?;
            session.xor_constant(MSG, s.value())?;
            Ok(KEY_LEAKS.into())
        }
        Keys::Permutation { s } => {
            let inverse = s.inverse().ok_or(ProtocolError::NotBijective)?;
            session.permutation(s, MSG)?;
            pass(session, channel, "alice-encrypt", AB, &[MSG])?;
            session.permutation(&inverse, MSG)?;
            Ok(KEY_LEAKS.into())
        }
        Keys::AppendOracle { s } => {
            let bob = Participant::honest("bob", s);
            session.attach(TAG_A, s.width())?;
            session.oracle(s, MSG, TAG_A)?;
            pass(session, channel, "alice-encrypt", AB, &[MSG, TAG_A])?;
            session.oracle(s, MSG, TAG_A)?;
            session.discard(&bob, TAG_A)?;
            Ok(KEY_LEAKS.into())
        }
        Keys::ThreePass { .. } | Keys::Authenticated { .. } => {
            Err(ProtocolError::Incompatible { protocol: id, detail: "three-pass keys".into() })
        }
    }
}

/// Keys for `id` drawn from `rng`; the permutation scheme gets a uniformly
/// random bijection.
pub fn random_keys<R: rand::Rng + ?Sized>(id: ProtocolId, k: usize, n: usize, rng: &mut R) -> Result<Keys, ProtocolError> {
    use crate::bits::BitString;
    use rand::seq::SliceRandom;
    let bits = |rng: &mut R| BitString::new(rng.random_range(0..1u64 << k), k);
    Ok(match id {
        ProtocolId::Basic | ProtocolId::Classical => Keys::ThreePass {
            fa: BooleanFunction::random_with(k, n, rng)?,
            fb: BooleanFunction::random_with(k, n, rng)?,
        },
        ProtocolId::Authenticated => {
            let fa = BooleanFunction::random_with(k, n, rng)?;
            let fb = BooleanFunction::random_with(k, n, rng)?;
            let (sa, sb) = super::random_distinct_ids(k, n, rng)?;
            Keys::Authenticated {
                alice: super::PartySecrets::with_id(fa, sa),
                bob: super::PartySecrets::with_id(fb, sb),
            }
        }
        ProtocolId::Alt19 => Keys::BasisShift { sa: bits(rng)?, sb: bits(rng)? },
        ProtocolId::Alt20 => Keys::Auxiliary {
            fa: BooleanFunction::random_with(k, n, rng)?,
            fb: BooleanFunction::random_with(k, n, rng)?,
        },
        ProtocolId::AltKeystring => Keys::KeyString { s: bits(rng)? },
        ProtocolId::Alt21 => {
            let mut table: Vec<u64> = (0..1u64 << k).collect();
            table.shuffle(rng);
            Keys::Permutation { s: BooleanFunction::new(k, k, table)? }
        }
        ProtocolId::Alt22 => Keys::AppendOracle { s: BooleanFunction::random_with(k, n, rng)? },
    })
}
