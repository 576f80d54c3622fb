use super::*;

fn f(name: &str) -> BooleanFunction {
    BooleanFunction::named(name).unwrap()
}

fn c(re: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(re, 0.0)
}

fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

fn authenticated(payload: Payload, fa: &str, sa: &str, fb: &str, sb: &str) -> ProtocolSpec {
    ProtocolSpec::new(
        ProtocolId::Authenticated,
        payload,
        Keys::Authenticated {
            alice: PartySecrets::with_id(f(fa), f(sa)),
            bob: PartySecrets::with_id(f(fb), f(sb)),
        },
    )
    .unwrap()
}

fn classical(m: &str, fa: &str, fb: &str) -> ProtocolSpec {
    ProtocolSpec::new(ProtocolId::Classical, Payload::Classical(bits(m)), Keys::ThreePass { fa: f(fa), fb: f(fb) })
        .unwrap()
}

#[test]
fn passive_inspect_changes_nothing() {
    let spec = authenticated(Payload::random_quantum(1, 1), "x", "0", "1", "xbar");
    let r = attack(&spec, &EveStrategy::PassiveInspect, AttackMode::Exact).unwrap();
    assert_eq!(r.alice_accept_prob, 1.0);
    assert_eq!(r.bob_accept_prob, Some(1.0));
    assert!((r.delivered_fidelity.unwrap() - 1.0).abs() < 1e-12);
    assert!(r.signals.is_empty());
}

#[test]
fn substitution_matches_closed_form() {
    // F_E ⊕ s_B ⊕ F_A = 0 ⊕ x ⊕ 1 vanishes only at m = 1
    let payload = Payload::quantum(vec![c(0.6), c(0.8)]).unwrap();
    let spec = authenticated(payload, "1", "0", "x", "x");
    let r = attack(&spec, &EveStrategy::substitute(f("0")), AttackMode::Exact).unwrap();
    assert!((r.alice_accept_prob - 0.64).abs() < 1e-12);
}

#[test]
fn substitution_corrupts_basic_protocol() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let spec = ProtocolSpec::new(
        ProtocolId::Basic,
        Payload::quantum(vec![c(h), c(h)]).unwrap(),
        Keys::ThreePass { fa: f("x"), fb: f("0") },
    )
    .unwrap();
    let r = attack(&spec, &EveStrategy::substitute(f("0")), AttackMode::Exact).unwrap();
    assert_eq!(r.alice_accept_prob, 1.0);
    assert!(r.delivered_fidelity.unwrap() < 1.0 - 1e-6);
    assert!(!r.signals.is_empty());
}

#[test]
fn bitflip_on_cleared_register_is_caught() {
    let spec = authenticated(Payload::random_quantum(1, 2), "x", "0", "1", "xbar");
    let flip = EveStrategy::Bitflip { register: "III".into(), mask: 1, pass: 3 };
    let r = attack(&spec, &flip, AttackMode::Exact).unwrap();
    assert_eq!(r.alice_accept_prob, 1.0);
    assert_eq!(r.bob_accept_prob, Some(0.0));
    assert_eq!(r.joint_accept_prob, 0.0);
}

#[test]
fn inapplicable_strategies() {
    let spec = classical("0", "x", "x");
    let flip = EveStrategy::Bitflip { register: "III".into(), mask: 1, pass: 1 };
    assert!(matches!(attack(&spec, &flip, AttackMode::Exact), Err(AttackError::Inapplicable { .. })));
    let wide = EveStrategy::Bitflip { register: "I".into(), mask: 2, pass: 1 };
    assert!(matches!(attack(&spec, &wide, AttackMode::Exact), Err(AttackError::Inapplicable { .. })));
    let alt = ProtocolSpec::new(ProtocolId::AltKeystring, Payload::basis(&bits("0")), Keys::KeyString { s: bits("1") })
        .unwrap();
    let mitm = EveStrategy::FullMitm { fe1: f("x"), fe2: f("x"), guess_sa: None, guess_sb: None };
    assert!(matches!(attack(&alt, &mitm, AttackMode::Exact), Err(AttackError::Inapplicable { .. })));
}

#[test]
fn full_mitm_breaks_unauthenticated_protocol() {
    for m in ["0", "1"] {
        let spec = classical(m, "xbar", "x");
        let mitm = EveStrategy::FullMitm { fe1: f("1"), fe2: f("x"), guess_sa: None, guess_sb: None };
        let r = attack(&spec, &mitm, AttackMode::Exact).unwrap();
        assert_eq!(r.eve_recovered, Some(bits(m)));
        assert!((r.eve_recovery_prob.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.joint_accept_prob, 1.0);
        assert!((r.delivered_fidelity.unwrap() - 1.0).abs() < 1e-12);
        assert!(r.signals.is_empty());
    }
}

#[test]
fn insider_passes_every_check() {
    let spec = authenticated(Payload::Classical(bits("1")), "x", "0", "1", "xbar");
    let mitm = EveStrategy::FullMitm { fe1: f("1"), fe2: f("0"), guess_sa: Some(f("0")), guess_sb: Some(f("xbar")) };
    let r = attack(&spec, &mitm, AttackMode::Exact).unwrap();
    assert_eq!(r.alice_accept_prob, 1.0);
    assert_eq!(r.bob_accept_prob, Some(1.0));
    assert_eq!(r.eve_recovered, Some(bits("1")));
}

#[test]
fn guessing_eve_is_averaged() {
    let spec = authenticated(Payload::Classical(bits("0")), "x", "0", "1", "xbar");
    let mitm = EveStrategy::FullMitm { fe1: f("1"), fe2: f("0"), guess_sa: None, guess_sb: None };
    let r = attack(&spec, &mitm, AttackMode::Exact).unwrap();
    assert_eq!(r.configurations, 16);
    // Alice accepts on the m with guess(m) = s_B(m): 1/2 on average
    assert!((r.alice_accept_prob - 0.5).abs() < 1e-12);
    assert!(r.joint_accept_prob < r.alice_accept_prob);
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let payload = Payload::quantum(vec![c(0.6), c(0.8)]).unwrap();
    let spec = authenticated(payload, "1", "0", "x", "x");
    let sub = EveStrategy::substitute(f("0"));
    let exact = attack(&spec, &sub, AttackMode::Exact).unwrap();
    let trials = 4000;
    let mc = attack(&spec, &sub, AttackMode::MonteCarlo { trials, seed: 11 }).unwrap();
    assert!(within_three_sigma(exact.alice_accept_prob, mc.alice_accept_prob, trials));
    assert!(within_three_sigma(exact.joint_accept_prob, mc.joint_accept_prob, trials));
    assert_eq!(mc.seeds, vec![11]);
    let again = attack(&spec, &sub, AttackMode::MonteCarlo { trials, seed: 11 }).unwrap();
    assert_eq!(mc, again);
}

#[test]
fn intercept_exact_and_sampled() {
    let spec = authenticated(Payload::random_quantum(1, 5), "x", "0", "1", "xbar");
    let imr = EveStrategy::InterceptMeasureResend { pass: 1, registers: vec!["I".into()] };
    let exact = attack(&spec, &imr, AttackMode::Exact).unwrap();
    // measuring I commutes with every oracle, so both checks still pass
    assert!((exact.alice_accept_prob - 1.0).abs() < 1e-12);
    assert!(exact.delivered_fidelity.unwrap() < 1.0);
    let trials = 2000;
    let mc = attack(&spec, &imr, AttackMode::MonteCarlo { trials, seed: 3 }).unwrap();
    assert_eq!(mc.alice_accept_prob, 1.0);
    let fid = exact.delivered_fidelity.unwrap();
    assert!((mc.delivered_fidelity.unwrap() - fid).abs() < 0.05);
}

#[test]
fn keystring_view_reveals_key() {
    let keys = key_space(ProtocolId::AltKeystring, 2, 2).unwrap();
    assert_eq!(keys.len(), 4);
    let d = key_distinguishability(ProtocolId::AltKeystring, 1, &Payload::basis(&bits("00")), &keys).unwrap();
    assert!((d - 1.0).abs() < 1e-12);
}

#[test]
fn classical_pass_one_view() {
    let keys = key_space(ProtocolId::Classical, 1, 1).unwrap();
    let v = eve_view_pair(
        ProtocolId::Classical,
        1,
        &Payload::Classical(bits("0")),
        &Payload::Classical(bits("1")),
        &keys,
    )
    .unwrap();
    assert_eq!(v.rho_a.dimension(), 4);
    assert!((v.trace_distance - 0.5).abs() < 1e-12);
}

#[test]
fn degenerate_keys_expose_the_message() {
    let keys = vec![Keys::ThreePass { fa: f("0"), fb: f("0") }];
    let v = eve_view_pair(ProtocolId::Basic, 1, &Payload::basis(&bits("0")), &Payload::basis(&bits("1")), &keys)
        .unwrap();
    assert!((v.trace_distance - 1.0).abs() < 1e-12);
}

#[test]
fn key_space_sizes_and_limit() {
    assert_eq!(key_space(ProtocolId::Authenticated, 1, 1).unwrap().len(), 4 * 4 * 12);
    assert_eq!(key_space(ProtocolId::Alt21, 2, 2).unwrap().len(), 24);
    assert_eq!(key_space(ProtocolId::Alt19, 2, 2).unwrap().len(), 16);
    assert!(matches!(key_space(ProtocolId::Basic, 3, 3), Err(AttackError::KeySpaceTooLarge { .. })));
    assert_eq!(sample_keys(ProtocolId::Basic, 3, 3, 5, 0).unwrap().len(), 5);
}

#[test]
fn ensembles_have_expected_size() {
    let payload = Payload::Classical(bits("0"));
    assert_eq!(substitution_ensemble(&payload, 1).unwrap().len(), 768);
    let m = mitm_ensemble(&payload, &f("x"), &f("1"), &f("0")).unwrap();
    assert_eq!(m.len(), 48);
}

#[test]
fn demo_contrasts_protocols() {
    let demo = mitm_demo(&bits("0"), 7).unwrap();
    assert_eq!(demo.unauthenticated.eve_recovered, Some(bits("0")));
    assert_eq!(demo.unauthenticated.joint_accept_prob, 1.0);
    assert!(demo.authenticated.alice_accept_prob < 1.0);
}

#[test]
fn report_round_trips_through_json() {
    let r = attack(&classical("1", "x", "0"), &EveStrategy::PassiveInspect, AttackMode::Exact).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: AttackReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r, back);
}
