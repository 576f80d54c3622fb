//! Protocol runs checked pass by pass against the reference simulator.

mod common;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{c, Sim};
use qnokey::bits::BitString;
use qnokey::boolfn::BooleanFunction;
use qnokey::protocol::{
    random_keys, run, run_authenticated_protocol, run_classical_protocol, run_sequence, Honest, KeyPolicy, Keys,
    PartySecrets, Payload, ProtocolId, ProtocolSpec, RunOptions,
};
use qnokey::statevector::random_amplitudes;

fn fn_from(k: usize, n: usize, seed: u64) -> BooleanFunction {
    BooleanFunction::random(k, n, seed).unwrap()
}

fn hadamard_encoded(m: u64, k: usize) -> Vec<C64> {
    let scale = ((1u64 << k) as f64).sqrt();
    (0..1u64 << k)
        .map(|x| c(if (x & m).count_ones() % 2 == 1 { -1.0 } else { 1.0 } / scale))
        .collect()
}

fn assert_passes(snapshots: &[qnokey::statevector::QuantumState], reference: &[Sim]) {
    assert_eq!(snapshots.len(), reference.len());
    for (i, (s, r)) in snapshots.iter().zip(reference).enumerate() {
        let d = r.distance(s);
        assert!(d < 1e-12, "pass {} off by {d:e}", i + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn authenticated_matches_reference(k in 1usize..=3, n in 1usize..=2, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (fa, fb) = (fn_from(k, n, seed), fn_from(k, n, seed ^ 1));
        let (sa, sb) = qnokey::protocol::random_distinct_ids(k, n, &mut rng).unwrap();
        let alpha = random_amplitudes(k, &mut rng);
        let t = run_authenticated_protocol(
            Payload::quantum(alpha.clone()).unwrap(),
            &PartySecrets::with_id(fa.clone(), sa.clone()),
            &PartySecrets::with_id(fb.clone(), sb.clone()),
            &mut Honest,
        )
        .unwrap();

        let mut s = Sim::message(&alpha);
        let mut reference = Vec::new();
        s.attach("II", n);
        s.oracle(fa.table(), "I", "II");
        reference.push(s.clone());
        s.oracle(sb.table(), "I", "II");
        s.attach("III", n);
        s.oracle(fb.table(), "I", "III");
        reference.push(s.clone());
        s.oracle(sb.table(), "I", "II");
        s.oracle(fa.table(), "I", "II");
        prop_assert!((s.zero_prob("II") - 1.0).abs() < 1e-12);
        s.oracle(sa.table(), "I", "III");
        s.drop_cleared("II");
        reference.push(s.clone());
        s.oracle(sa.table(), "I", "III");
        s.oracle(fb.table(), "I", "III");
        prop_assert!((s.zero_prob("III") - 1.0).abs() < 1e-12);
        s.drop_cleared("III");

        let snaps: Vec<_> = t.passes.iter().map(|p| p.snapshot.clone()).collect();
        assert_passes(&snaps, &reference);
        prop_assert!(s.distance(&t.outcome.final_state) < 1e-9);
    }

    #[test]
    fn classical_decodes_like_reference(k in 1usize..=3, n in 1usize..=3, m in any::<u64>(), seed in any::<u64>()) {
        let m = m & ((1 << k) - 1);
        let (fa, fb) = (fn_from(k, n, seed), fn_from(k, n, !seed));
        let bits = BitString::new(m, k).unwrap();
        let t = run_classical_protocol(&bits, &fa, &fb, &mut Honest).unwrap();
        let mut s = Sim::message(&hadamard_encoded(m, k));
        s.attach("II", n);
        s.oracle(fa.table(), "I", "II");
        prop_assert!(s.distance(&t.passes[0].snapshot) < 1e-12);
        prop_assert_eq!(t.outcome.recovered, Some(bits));
        prop_assert!((t.outcome.recovered_probability.unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn alternative_schemes_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for id in [ProtocolId::Alt19, ProtocolId::Alt20, ProtocolId::AltKeystring, ProtocolId::Alt21, ProtocolId::Alt22] {
        for k in 1..=3 {
            let keys = random_keys(id, k, k, &mut rng).unwrap();
            let alpha = random_amplitudes(k, &mut rng);
            let spec = ProtocolSpec::new(id, Payload::quantum(alpha.clone()).unwrap(), keys.clone()).unwrap();
            let t = run(&spec, &mut Honest, &RunOptions::default()).unwrap();

            let mut s = Sim::message(&alpha);
            let mut reference = Vec::new();
            match &keys {
                Keys::BasisShift { sa, sb } => {
                    for shift in [sa, sb, sa] {
                        s.xor_const("I", shift.value());
                        reference.push(s.clone());
                    }
                    s.xor_const("I", sb.value());
                }
                Keys::Auxiliary { fa, fb } => {
                    s.attach("II", fa.width());
                    for f in [fa, fb, fa] {
                        s.oracle(f.table(), "I", "II");
                        reference.push(s.clone());
                    }
                    s.oracle(fb.table(), "I", "II");
                    s.drop_cleared("II");
                }
                Keys::KeyString { s: key } => {
                    s.xor_const("I", key.value());
                    reference.push(s.clone());
                    s.xor_const("I", key.value());
                }
                Keys::Permutation { s: perm } => {
                    let mut inverse = vec![0u64; perm.table().len()];
                    for (m, &y) in perm.table().iter().enumerate() {
                        inverse[y as usize] = m as u64;
                    }
                    s.permute(perm.table(), "I");
                    reference.push(s.clone());
                    s.permute(&inverse, "I");
                }
                Keys::AppendOracle { s: f } => {
                    s.attach("II", f.width());
                    s.oracle(f.table(), "I", "II");
                    reference.push(s.clone());
                    s.oracle(f.table(), "I", "II");
                    s.drop_cleared("II");
                }
                other => panic!("unexpected keys {other:?}"),
            }
            let snaps: Vec<_> = t.passes.iter().map(|p| p.snapshot.clone()).collect();
            assert_passes(&snaps, &reference);
            assert!(s.distance(&t.outcome.final_state) < 1e-9, "{id} final state");
            assert!(t.weakness.as_deref().unwrap().starts_with("no authentication possible"));
        }
    }
}

#[test]
fn sequence_of_basis_states() {
    let messages: Vec<Vec<C64>> = (0..8)
        .map(|m| (0..8).map(|x| c(if x == m { 1.0 } else { 0.0 })).collect())
        .collect();
    for policy in [KeyPolicy::Reused, KeyPolicy::FreshPerState] {
        let ts = run_sequence(&messages, policy, 2, 4, &mut Honest).unwrap();
        assert_eq!(ts.len(), 8);
        for (m, t) in ts.iter().enumerate() {
            let Keys::ThreePass { fa, fb } = &t.keys else { panic!("three-pass keys") };
            let (passes, fin) = {
                let mut s = Sim::message(&messages[m]);
                let mut p = Vec::new();
                s.attach("II", 2);
                s.oracle(fa.table(), "I", "II");
                p.push(s.clone());
                s.attach("III", 2);
                s.oracle(fb.table(), "I", "III");
                p.push(s.clone());
                s.oracle(fa.table(), "I", "II");
                s.drop_cleared("II");
                p.push(s.clone());
                s.oracle(fb.table(), "I", "III");
                s.drop_cleared("III");
                (p, s)
            };
            let snaps: Vec<_> = t.passes.iter().map(|p| p.snapshot.clone()).collect();
            assert_passes(&snaps, &passes);
            assert!(fin.distance(&t.outcome.final_state) < 1e-12);
        }
        let distinct = ts.iter().map(|t| format!("{:?}", t.keys)).collect::<std::collections::BTreeSet<_>>().len();
        match policy {
            KeyPolicy::Reused => assert_eq!(distinct, 1),
            KeyPolicy::FreshPerState => assert!(distinct > 1),
        }
    }
}

#[test]
fn exhaustive_single_qubit_identity() {
    // every (F_A, F_B) at k = n = 1 returns each basis state and both
    // uniform superpositions unchanged
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let states = [vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)], vec![c(h), c(h)], vec![c(h), c(-h)]];
    for fa in 0..4u64 {
        for fb in 0..4u64 {
            let fa = BooleanFunction::new(1, 1, vec![fa & 1, fa >> 1]).unwrap();
            let fb = BooleanFunction::new(1, 1, vec![fb & 1, fb >> 1]).unwrap();
            for alpha in &states {
                let t = qnokey::protocol::run_basic_protocol(alpha, &fa, &fb, &mut Honest).unwrap();
                assert!(Sim::message(alpha).distance(&t.outcome.final_state) < 1e-12);
            }
        }
    }
}
