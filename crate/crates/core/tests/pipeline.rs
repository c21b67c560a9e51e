use num_bigint::BigInt;
use proptest::prelude::*;

use signeq::characters::principal;
use signeq::density::{
    SignFunction, d_independence_check, identity_1q_diagnostic, main_theorem_experiment, multiplicativity_check,
};
use signeq::halfint::HalfIntegralForm;
use signeq::qseries::{SeriesCache, SeriesKey, delta_with};
use signeq::satotate::{st_sample_with, Restriction, restricted_sample, DEFAULT_INTERVALS};
use signeq::shimura::{
    ShimuraParams, SynthMode, delta_lifted, delta_preimage_squares, invert_lift_table, lift, lift_table,
    normalized_eigenvalues, synth_hecke_form,
};
use signeq::Execution;

fn delta_sign_function(x: usize) -> SignFunction {
    let tau = delta_lifted(x, Execution::Parallel);
    let a_sq = delta_preimage_squares(tau.coeffs(), x, Execution::Parallel).unwrap();
    SignFunction::from_square_class(&ShimuraParams::delta_preimage(), &a_sq).unwrap()
}

#[test]
fn delta_sign_function_is_multiplicative() {
    let f = delta_sign_function(10_000);
    assert_eq!(f.sign_f(1), Ok(1));
    assert_eq!(f.sign_f(3), Ok(1));
    assert_eq!(f.sign_f(2), Ok(0));
    let r = multiplicativity_check(&f, 1000, 10_000, 5).unwrap();
    assert_eq!((r.checked, r.violations.len()), (1000, 0));
}

#[test]
fn synthetic_sign_functions_are_multiplicative() {
    let params = ShimuraParams::delta_preimage();
    for seed in 0..20 {
        let mode = if seed % 2 == 0 { SynthMode::IntegerUniform } else { SynthMode::SatoTateRounded };
        let form = synth_hecke_form(6, seed, 5000, mode);
        let a_sq = invert_lift_table(&params, form.coeffs(), 5000, Execution::Parallel).unwrap();
        let f = SignFunction::from_square_class(&params, &a_sq).unwrap();
        let r = multiplicativity_check(&f, 500, 5000, seed).unwrap();
        assert!(r.violations.is_empty(), "seed {seed}: {:?}", r.violations);
    }
}

#[test]
fn delta_class_densities_agree() {
    let f = delta_sign_function(100_000);
    let r = d_independence_check(&f, 5, 100_000, Execution::Parallel).unwrap();
    assert_eq!(r.classes.len(), 4);
    assert!(r.max_deviation <= 0.05, "{r:?}");
    let id = identity_1q_diagnostic(&f, 5, 1, 0.05, 100_000, Execution::Parallel).unwrap();
    assert!(id.value.is_finite() && id.tail_bound > 0.0);
    assert!(identity_1q_diagnostic(&f, 6, 1, 0.05, 100_000, Execution::Parallel).is_err());
}

#[test]
fn execution_modes_agree() {
    let seq = delta_with(3000, Execution::Sequential);
    let par = delta_with(3000, Execution::Parallel);
    assert_eq!(seq, par);
    assert_eq!(st_sample_with(4, 200_000, Execution::Sequential), st_sample_with(4, 200_000, Execution::Parallel));
    let f = delta_sign_function(20_000);
    for d in 1..5 {
        assert_eq!(
            main_theorem_experiment(&f, 5, d, 20_000, &[0.1], Execution::Sequential),
            main_theorem_experiment(&f, 5, d, 20_000, &[0.1], Execution::Parallel)
        );
    }
}

#[test]
fn tabulated_form_through_the_lift() {
    // The weight 13/2 preimage of Δ, written out as a form file and lifted back.
    let params = ShimuraParams::delta_preimage();
    let tau = delta_lifted(400, Execution::Sequential);
    let a_sq = delta_preimage_squares(tau.coeffs(), 20, Execution::Sequential).unwrap();
    let values: Vec<_> = a_sq.iter().map(|v| signeq::cyclotomic::Cyclotomic::integer(1, v.clone())).collect();
    let form = HalfIntegralForm::from_square_class(4, 6, principal(4).unwrap(), 1, &values).unwrap();
    let parsed = HalfIntegralForm::parse(&form.to_text()).unwrap();
    assert_eq!(parsed, form);
    let lifted = lift(&parsed, 20).unwrap();
    for n in 1..=20 {
        let want = signeq::cyclotomic::Cyclotomic::integer(1, tau.coeff(n).unwrap().clone());
        // Away from 2 the level-2 lift agrees with Δ.
        if n % 2 == 1 {
            assert_eq!(lifted.coeff(n), Some(&want), "n = {n}");
        }
    }
    let b = normalized_eigenvalues(&lifted, &params, 19, Execution::Sequential).unwrap();
    assert_eq!(b.primes().collect::<Vec<_>>(), vec![3, 5, 7, 11, 13, 17, 19]);
    assert!(b.values().all(|(_, v)| (-1.0..=1.0).contains(&v)));
}

#[test]
fn cached_tau_feeds_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SeriesCache::new(dir.path());
    let key = SeriesKey::new("delta", "");
    let (series, _) = cache.get_or_build(&key, 5000, |t| delta_with(t, Execution::Parallel)).unwrap();
    let (again, _) = cache.get_or_build(&key, 5000, |_| unreachable!()).unwrap();
    assert_eq!(series, again);
    let tau = signeq::shimura::LiftedForm::new(12, 1, principal(1).unwrap(), series.into_coeffs()).unwrap();
    let b: Vec<(u64, f64)> = normalized_eigenvalues(&tau, &ShimuraParams::delta_preimage(), 5000, Execution::Parallel)
        .unwrap()
        .values()
        .collect();
    let stats = restricted_sample(&b, &Restriction::All, 5000, &DEFAULT_INTERVALS).unwrap();
    assert_eq!(stats.total_primes, 668);
    assert_eq!(stats.bins.iter().map(|b| b.count).sum::<usize>(), 668);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lift_roundtrip_on_random_tables(values in prop::collection::vec(-10_000i64..10_000, 2..300), t in prop::sample::select(vec![1u64, 2, 3, 5, 6]), k in 2u32..8) {
        let params = ShimuraParams::new(12, k, t, principal(12).unwrap()).unwrap();
        let a: Vec<BigInt> = values.iter().map(|&v| BigInt::from(v)).collect();
        let top = a.len() - 1;
        let lifted = lift_table(&params, &a, top, Execution::Sequential).unwrap();
        let back = invert_lift_table(&params, &lifted, top, Execution::Parallel).unwrap();
        prop_assert_eq!(&back[1..], &a[1..]);
    }

    #[test]
    fn counts_are_conserved(raw in prop::collection::vec(-1i8..=1, 2..2000), level in 1u64..30, q in 1u64..13) {
        let x = raw.len() as u64 - 1;
        let f = SignFunction::from_signs(level, raw);
        for d in (1..=q).filter(|&d| num_integer::gcd(d, q) == 1) {
            let r = main_theorem_experiment(&f, q, d, x, &[], Execution::Sequential).unwrap();
            let units = (1..=x).filter(|&n| n % q == d % q && num_integer::gcd(n, level) == 1).count() as u64;
            prop_assert_eq!(r.positive + r.negative + r.zero, units);
            prop_assert!(r.count_identity_holds());
        }
    }
}
