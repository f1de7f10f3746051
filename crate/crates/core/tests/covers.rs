use orthospec::covers::{
    build_special_X, cover_family, special_alpha_length, subgroup_from_cyclic_hom,
};
use orthospec::identities::{basmajian_check, bridgeman_check};
use orthospec::ortho::{ortho_spectrum, systole};
use orthospec::spectra::{compare_spectra, multiplicity_audit};
use orthospec::surfaces::{build_one_holed_torus, build_pants};

#[test]
fn regular_covers_multiply_every_multiplicity_by_the_degree() {
    let cases = [
        (
            build_one_holed_torus(1.0, 0.3, 2.5).unwrap(),
            vec![1u64, 0],
            2u64,
            6.0,
        ),
        (
            build_one_holed_torus(0.8, 0.0, 2.0).unwrap(),
            vec![1, 1],
            3,
            5.0,
        ),
        (build_pants(1.5, 2.0, 2.5).unwrap(), vec![1, 0], 2, 7.0),
    ];
    for (base, images, modulus, cutoff) in cases {
        let cover = subgroup_from_cyclic_hom(&base, &images, modulus).unwrap();
        let d = modulus as usize;
        let (sb, sc) = (
            ortho_spectrum(&base, cutoff).unwrap(),
            ortho_spectrum(&cover, cutoff).unwrap(),
        );
        assert!(!sb.entries.is_empty());
        let audit = multiplicity_audit(&sb, &sc, d, 1e-8);
        assert!(audit.is_isospectral(), "{audit:?}");
        assert_eq!(
            cover.euler_characteristic,
            d as i64 * base.euler_characteristic
        );
        assert!((cover.perimeter() - d as f64 * base.perimeter()).abs() < 1e-9);
        assert!((cover.area() - d as f64 * base.area()).abs() < 1e-9);
    }
}

#[test]
fn cover_family_is_isospectral_with_distinct_systoles() {
    for k in 1..=2u32 {
        let n = 1u32 << k;
        let l_alpha = special_alpha_length(n);
        let base = build_special_X(n, 2.0).unwrap();
        let covers: Vec<_> = (0..=k)
            .map(|m| cover_family(k, m, &base).unwrap())
            .collect();
        let spectra: Vec<_> = covers
            .iter()
            .map(|c| ortho_spectrum(c, 5.0).unwrap())
            .collect();
        let mut systoles = Vec::new();
        for (m, c) in covers.iter().enumerate() {
            let expected = l_alpha * (1u64 << (k - m as u32)) as f64;
            let s = systole(c, expected + 1.0).unwrap();
            assert!(
                (s - expected).abs() < 1e-8,
                "k={k} m={m}: {s} vs {expected}"
            );
            systoles.push(s);
        }
        for a in 0..spectra.len() {
            for b in a + 1..spectra.len() {
                assert!(compare_spectra(&spectra[a], &spectra[b], 1e-8).is_isospectral());
                assert!((systoles[a] - systoles[b]).abs() > 1e-3);
            }
        }
    }
}

#[test]
fn identity_partial_sums_scale_with_the_degree() {
    let base = build_special_X(2, 2.0).unwrap();
    let cover = cover_family(1, 0, &base).unwrap();
    let cutoff = 6.0;
    let (sb, sc) = (
        ortho_spectrum(&base, cutoff).unwrap(),
        ortho_spectrum(&cover, cutoff).unwrap(),
    );
    let bb = basmajian_check(&sb, &base, 1.0).unwrap();
    let bc = basmajian_check(&sc, &cover, 1.0).unwrap();
    assert!((bc.partial_sum - 2.0 * bb.partial_sum).abs() < 1e-9);
    assert!((bc.target - 2.0 * bb.target).abs() < 1e-9);
    let kb = bridgeman_check(&sb, &base, 1.0).unwrap();
    let kc = bridgeman_check(&sc, &cover, 1.0).unwrap();
    assert!((kc.partial_sum - 2.0 * kb.partial_sum).abs() < 1e-9);
    assert!((kc.target - 2.0 * kb.target).abs() < 1e-9);
}
