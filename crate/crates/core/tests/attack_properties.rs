use braille_pin::sweep::{leakage_sweep, round_trip_sweep};
use braille_pin::{
    brute_force_candidates, canonical_mapping, encode_pin, leakage_report, observe,
    recover_candidates, Digit, DigitMapping, Execution, MappingEntry, ObserverChannel, Pin,
    SessionConfig,
};
use proptest::prelude::*;

fn arb_pin(max_len: usize) -> impl Strategy<Value = Pin> {
    proptest::collection::vec(0u32..10, 1..=max_len)
        .prop_map(|ds| Pin::new(ds.into_iter().map(|d| Digit::new(d).unwrap()).collect()))
}

proptest! {
    #[test]
    fn true_pin_is_always_a_candidate(p in arb_pin(16), seed in any::<u64>()) {
        let m = canonical_mapping();
        let trace = encode_pin(p.digits(), &m);
        let report = leakage_report(&trace, &ObserverChannel::ALL, &m, p.len(), seed).unwrap();
        for ch in ObserverChannel::ALL {
            let set = recover_candidates(&observe(&trace, ch).unwrap(), &m, p.len()).unwrap();
            prop_assert!(set.contains(&p), "{} lost {}", ch, p);
        }
        let n = |ch| report.channel(ch).unwrap().candidate_count;
        prop_assert_eq!(n(ObserverChannel::KeyIdentity), 1);
        prop_assert!(n(ObserverChannel::KeyIdentity) <= n(ObserverChannel::UpDownUnordered));
        prop_assert_eq!(n(ObserverChannel::UpDownUnordered), n(ObserverChannel::DotCountPerDigit));
        prop_assert!(n(ObserverChannel::DotCountPerDigit) <= n(ObserverChannel::PressCountOnly));
        prop_assert_eq!(n(ObserverChannel::PressCountOnly), 10u64.pow(p.len() as u32));
        for c in &report.channels {
            prop_assert!(c.sample_candidates.len() <= 10);
            prop_assert!(c.sample_candidates.len() as u64 == c.candidate_count.min(10));
        }
    }

    #[test]
    fn report_is_a_function_of_its_inputs(p in arb_pin(6), seed in any::<u64>()) {
        let m = canonical_mapping();
        let trace = encode_pin(p.digits(), &m);
        let a = leakage_report(&trace, &ObserverChannel::ALL, &m, p.len(), seed).unwrap();
        let b = leakage_report(&trace, &ObserverChannel::ALL, &m, p.len(), seed).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
    }
}

#[test]
fn unordered_tallies_carry_exactly_the_weight() {
    // Over all 64 patterns, (ups, downs) and the up count partition the
    // patterns identically.
    for a in 0u8..64 {
        for b in 0u8..64 {
            let ud = |v: u8| (v.count_ones(), 6 - v.count_ones());
            assert_eq!(ud(a) == ud(b), a.count_ones() == b.count_ones());
        }
    }
}

#[test]
fn parallel_and_sequential_brute_force_agree() {
    let m = canonical_mapping();
    let p: Pin = "2079".parse().unwrap();
    let trace = encode_pin(p.digits(), &m);
    for ch in ObserverChannel::ALL {
        let obs = observe(&trace, ch).unwrap();
        let seq = brute_force_candidates(&obs, &m, 4, Execution::Sequential).unwrap();
        let par = brute_force_candidates(&obs, &m, 4, Execution::Parallel).unwrap();
        assert_eq!(seq, par, "{ch}");
        assert_eq!(
            seq.count(),
            recover_candidates(&obs, &m, 4).unwrap().count(),
            "{ch}"
        );
    }
}

#[test]
fn exhaustive_sweep_in_both_modes() {
    let cfg = SessionConfig::new(4).unwrap();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let s = round_trip_sweep(&cfg, exec);
        assert_eq!(s.checked, 10_000);
        assert!(s.passed());
    }
}

/// A per-user secret mapping does not help against a keylogger that knows
/// the mapping, but one that assumes the canonical table decodes the wrong PIN.
#[test]
fn secret_mapping_against_public_decoder() {
    let canon = canonical_mapping();
    let vectors: Vec<_> = canon.entries().map(|e| e.vector).collect();
    let secret = DigitMapping::from_entries(canon.entries().map(|e| MappingEntry {
        vector: vectors[(usize::from(e.digit.value()) + 3) % 10],
        digit: e.digit,
    }))
    .unwrap();
    let p: Pin = "1234".parse().unwrap();
    let trace = encode_pin(p.digits(), &secret);
    let obs = observe(&trace, ObserverChannel::KeyIdentity).unwrap();
    let with_secret = recover_candidates(&obs, &secret, 4).unwrap();
    assert_eq!(with_secret.iter().collect::<Vec<_>>(), vec![p.clone()]);
    let with_public = recover_candidates(&obs, &canon, 4).unwrap();
    assert_eq!(with_public.count(), 1);
    assert_ne!(with_public.nth(0).unwrap(), p);

    let reports = leakage_sweep(
        &[p],
        &[ObserverChannel::KeyIdentity],
        &secret,
        0,
        Execution::default(),
    )
    .unwrap();
    assert!(reports[0].channels[0].recovered_exactly);
}
