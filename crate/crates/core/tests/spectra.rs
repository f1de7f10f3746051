use orthospec::identities::{basmajian_check, basmajian_term, bridgeman_check, rogers_dilog};
use orthospec::ortho::{ortho_spectrum, systole, OrthoSpectrum};
use orthospec::spectra::{
    granulosity, granulosity_with, mckean_systole_bound, pinching_experiment, poincare_partial,
    GranulosityMode, Topology,
};
use orthospec::surfaces::{build_one_holed_torus, build_pants};
use proptest::prelude::*;

fn lengths() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1..12.0f64, 2..40)
}

proptest! {
    #[test]
    fn granulosity_is_at_least_one_and_non_increasing(s in lengths(), l1 in 1.0..12.0f64, dl in 0.0..4.0f64) {
        let (g1, g2) = (granulosity(&s, l1), granulosity(&s, l1 + dl));
        prop_assert!(g1 >= 1.0 && g2 >= 1.0);
        prop_assert!(g2 <= g1);
    }

    #[test]
    fn granulosity_modes_coincide(s in lengths(), l in 1.0..12.0f64) {
        let a = granulosity_with(&s, l, GranulosityMode::AllPairs);
        let b = granulosity_with(&s, l, GranulosityMode::Consecutive);
        prop_assert!(a == b || (a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn rogers_reflection(x in 0.0..1.0f64) {
        let v = rogers_dilog(x).unwrap() + rogers_dilog(1.0 - x).unwrap();
        prop_assert!((v - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
    }

    #[test]
    fn basmajian_term_is_positive_and_decreasing(l in 0.01..30.0f64, dl in 0.001..3.0f64) {
        let (a, b) = (basmajian_term(l).unwrap(), basmajian_term(l + dl).unwrap());
        prop_assert!(a > 0.0 && b > 0.0 && b < a);
    }
}

fn matrix() -> Vec<(&'static str, orthospec::surfaces::FuchsianSurface)> {
    vec![
        ("pants(2,2,2)", build_pants(2.0, 2.0, 2.0).unwrap()),
        ("pants(1,2,3)", build_pants(1.0, 2.0, 3.0).unwrap()),
        (
            "torus(1,0.3,2.5)",
            build_one_holed_torus(1.0, 0.3, 2.5).unwrap(),
        ),
    ]
}

#[test]
fn partial_sums_increase_towards_their_targets() {
    for (name, s) in matrix() {
        let full = ortho_spectrum(&s, 9.0).unwrap();
        let mut prev = (0.0, 0.0);
        for cutoff in [3.0, 5.0, 7.0, 9.0] {
            let sp = full.truncated(cutoff);
            let b = basmajian_check(&sp, &s, 1.0).unwrap();
            let k = bridgeman_check(&sp, &s, 1.0).unwrap();
            assert!(
                b.partial_sum >= prev.0 && k.partial_sum >= prev.1,
                "{name} at {cutoff}"
            );
            assert!(
                b.partial_sum <= b.target && k.partial_sum <= k.target,
                "{name} at {cutoff}"
            );
            prev = (b.partial_sum, k.partial_sum);
        }
    }
}

#[test]
fn poincare_partial_is_monotone() {
    let s = ortho_spectrum(&build_pants(2.0, 2.0, 2.0).unwrap(), 9.0).unwrap();
    let mut prev = 0.0;
    for c in [4.0, 6.0, 9.0] {
        let v = poincare_partial(&s.truncated(c), 0.5);
        assert!(v >= prev);
        prev = v;
    }
    let hs = [0.3, 0.6, 1.0, 2.0];
    for w in hs.windows(2) {
        assert!(poincare_partial(&s, w[1]) < poincare_partial(&s, w[0]));
    }
}

#[test]
fn spectra_do_not_depend_on_thread_count() {
    let s = build_one_holed_torus(1.0, 0.3, 2.5).unwrap();
    let run = |n: usize| -> OrthoSpectrum {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap();
        pool.install(|| ortho_spectrum(&s, 8.0).unwrap())
    };
    let one = serde_json::to_string(&run(1)).unwrap();
    for n in [2, 4, 7] {
        assert_eq!(one, serde_json::to_string(&run(n)).unwrap(), "{n} threads");
    }
}

#[test]
fn counting_function_grows_exponentially() {
    let s = ortho_spectrum(&build_pants(1.0, 1.0, 1.0).unwrap(), 12.0).unwrap();
    let n = |l: f64| s.entries.iter().filter(|e| e.length <= l).count() as f64;
    let rates: Vec<f64> = [8.0, 10.0, 12.0].iter().map(|&l| n(l).ln() / l).collect();
    assert!(rates.iter().all(|r| r.is_finite() && *r > 0.0));
    // log N(L) / L settles: successive changes shrink
    assert!((rates[2] - rates[1]).abs() < (rates[1] - rates[0]).abs() + 1e-3);
}

#[test]
fn mckean_bound_is_sound() {
    for (name, s) in matrix() {
        let sp = ortho_spectrum(&s, 10.0).unwrap();
        let b = mckean_systole_bound(&sp, Topology::of(&s).unwrap(), None).unwrap();
        let sys = systole(&s, 10.0).unwrap();
        assert!(b.bound <= sys, "{name}: {} > {sys}", b.bound);
        assert!(b.bound >= 0.0);
    }
}

#[test]
fn pinching_arcs_are_found() {
    let r = pinching_experiment(&[0.4, 0.2], 3, 2.0).unwrap();
    assert!(r.all_matched);
    assert!(r.fitted_m.is_finite());
    assert_eq!(r.rows.len(), 6);
}
