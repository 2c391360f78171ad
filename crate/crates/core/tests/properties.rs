use losr_core::basis::{all_keys, functional, reconstruct};
use losr_core::monotones::*;
use losr_core::resource::*;
use losr_core::{classical_party_free_model, hierarchy_free_model, CMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn specs() -> Vec<ResourceSpec> {
    let (t, c, q) = (SystemSpec::trivial(), SystemSpec::classical(2), SystemSpec::quantum(2));
    vec![
        ResourceSpec::new(c, c, c, c),
        ResourceSpec::new(c, q, c, t),
        ResourceSpec::new(q, q, t, t),
        ResourceSpec::new(c, q, t, q),
        ResourceSpec::new(q, c, q, c),
        ResourceSpec::new(SystemSpec::classical(3), c, c, t),
    ]
}

fn abs_lp(r: &ChoiResource) -> f64 {
    absolute_robustness(r, &classical_party_free_model(r.spec()).unwrap()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sampled_resources_are_valid(seed in any::<u64>(), k in 0usize..6) {
        let spec = specs()[k];
        let r = random_resource(&spec, &mut rng(seed));
        prop_assert!(validate(&r).unwrap().is_valid());
    }

    #[test]
    fn basis_functionals_reconstruct(seed in any::<u64>(), k in 0usize..6) {
        let spec = specs()[k];
        let r = random_resource(&spec, &mut rng(seed));
        let dims = spec.dims();
        let vals: Vec<_> = all_keys(&dims, &[false; 4], false)
            .into_iter()
            .map(|key| { let v = functional(&key, &dims, r.choi()); (key, v) })
            .collect();
        prop_assert!(reconstruct(&dims, &vals).dist_max(r.choi()) < 1e-12);
    }

    #[test]
    fn box_monotones_are_ordered(seed in any::<u64>()) {
        let r = random_box(&mut rng(seed));
        let m = classical_party_free_model(r.spec()).unwrap();
        let a = absolute_robustness(&r, &m).unwrap().value;
        let g = generalized_robustness(&r, &m).unwrap().value;
        let v = absolute_robustness_variant(&r, &m).unwrap().value;
        let w = nonlocal_weight(&r, &m).unwrap().value;
        prop_assert!(a >= 0.0 && g >= 0.0 && v >= 0.0 && w >= 0.0);
        prop_assert!(g <= a + 1e-7);
        prop_assert!((v - a / (1.0 + a)).abs() < 1e-6);
        prop_assert!(w <= 1.0 + 1e-7);
        // free resources score zero on every monotone
        if a < 1e-7 { prop_assert!(w < 1e-6 && g < 1e-7); }
    }

    #[test]
    fn abs_robustness_is_convex(s1 in any::<u64>(), s2 in any::<u64>(), p in 0.0f64..1.0) {
        let (r1, r2) = (random_box(&mut rng(s1)), random_box(&mut rng(s2)));
        let mix = ChoiResource::new(*r1.spec(), &r1.choi().scale(p) + &r2.choi().scale(1.0 - p)).unwrap();
        prop_assert!(abs_lp(&mix) <= p * abs_lp(&r1) + (1.0 - p) * abs_lp(&r2) + 1e-6);
    }

    #[test]
    fn relabeling_outputs_leaves_robustness_unchanged(seed in any::<u64>()) {
        let t = random_box_table(&mut rng(seed));
        let flipped = BoxTable::from_fn(2, 2, 2, 2, |a, b, x, y| t.get(a ^ x, b, x, y));
        let (r, rf) = (make_box(&t).unwrap(), make_box(&flipped).unwrap());
        prop_assert!((abs_lp(&r) - abs_lp(&rf)).abs() < 1e-6);
    }

    #[test]
    fn level_two_is_exact_on_boxes(seed in any::<u64>()) {
        let r = random_box(&mut rng(seed));
        let h = absolute_robustness(&r, &hierarchy_free_model(r.spec(), 2).unwrap()).unwrap().value;
        prop_assert!((h - abs_lp(&r)).abs() < 1e-5);
    }

    #[test]
    fn state_bounds_are_nested(seed in any::<u64>()) {
        let spec = ResourceSpec::new(SystemSpec::quantum(2), SystemSpec::quantum(2), SystemSpec::trivial(), SystemSpec::trivial());
        let r = random_resource(&spec, &mut rng(seed));
        let exact = absolute_robustness(&r, &losr_core::ppt_free_model(&spec).unwrap()).unwrap().value;
        let mut prev = 0.0;
        for n in 1..=3 {
            let v = absolute_robustness(&r, &hierarchy_free_model(&spec, n).unwrap()).unwrap().value;
            prop_assert!(v >= prev - 1e-7);
            prop_assert!(v <= exact + 1e-6);
            prev = v;
        }
    }

    #[test]
    fn certificate_json_roundtrips(seed in any::<u64>()) {
        let r = random_box(&mut rng(seed));
        let res = absolute_robustness(&r, &classical_party_free_model(r.spec()).unwrap()).unwrap();
        let doc: CertificateJson = serde_json::from_str(&res.certificate_json()).unwrap();
        prop_assert_eq!(doc.scale, res.certificate.scale);
        let n: CMatrix = doc.noise_choi.to_matrix().unwrap();
        prop_assert!(n.dist_max(&res.certificate.noise) < 1e-15);
    }
}
