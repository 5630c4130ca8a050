mod common;

use proptest::prelude::*;
use sepcheck::criteria::SpectrumVector;
use sepcheck::state::shannon_entropy_bits;
use sepcheck::typicality::{
    enumerate_likely_strings, likely_counts, multinomial, typical_subspace_projector, typicality_convergence,
};
use sepcheck::zoo::{bell_mixture, random_density};
use sepcheck::BipartiteShape;

fn spectrum(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.05f64..1.0, 1..=len).prop_map(|v| {
        let t: f64 = v.iter().sum();
        v.iter().map(|x| x / t).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn counts_total_and_rounding(s in spectrum(5), n in 1usize..60) {
        let sv = SpectrumVector::new(s.clone()).unwrap();
        let k = likely_counts(&sv, n);
        prop_assert_eq!(k.iter().sum::<usize>(), n);
        let dev: f64 = k.iter().zip(sv.values()).map(|(&ki, &l)| (ki as f64 - n as f64 * l).abs()).sum();
        prop_assert!(dev < sv.values().len() as f64);
    }

    #[test]
    fn counts_exact_when_integral(parts in proptest::collection::vec(1usize..6, 1..5), scale in 1usize..5) {
        let total: usize = parts.iter().sum();
        let s: Vec<f64> = parts.iter().map(|&p| p as f64 / total as f64).collect();
        let n = total * scale;
        let k = likely_counts(&SpectrumVector::new(s).unwrap(), n);
        let mut expected: Vec<usize> = parts.iter().map(|&p| p * scale).collect();
        expected.sort_unstable_by(|a, b| b.cmp(a));
        prop_assert_eq!(k, expected);
    }

    #[test]
    fn rate_and_mass_bounds(s in spectrum(4), n in 1usize..80) {
        let sv = SpectrumVector::new(s.clone()).unwrap();
        let entropy = shannon_entropy_bits(&s);
        let row = &typicality_convergence(&sv, &[n]).unwrap()[0];
        prop_assert!(row.rate <= entropy + 1e-12, "rate {} entropy {}", row.rate, entropy);
        prop_assert!(row.typical_mass <= 1.0 + 1e-12);
        let k = likely_counts(&sv, n);
        prop_assert_eq!(row.exact_count.clone(), multinomial(&k).to_string());
    }
}

#[test]
fn materialized_strings_orthonormal() {
    let cases = [
        (random_density(BipartiteShape::qubits(), 3, 7).unwrap(), 3),
        (random_density(BipartiteShape::new(2, 3).unwrap(), 2, 11).unwrap(), 2),
        (bell_mixture(0.25).unwrap(), 4),
    ];
    for (rho, n) in cases {
        let set = enumerate_likely_strings(&rho, n, true).unwrap();
        let strings = set.strings.as_ref().unwrap();
        for (i, u) in strings.iter().enumerate() {
            for (j, v) in strings.iter().enumerate() {
                let g = common::dot(u, v);
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g.re - target).abs() < 1e-12 && g.im.abs() < 1e-12, "gram[{i}][{j}] = {g}");
            }
        }
        let sub = typical_subspace_projector(&set).unwrap();
        assert_eq!(sub.rank(), strings.len());
    }
}

#[test]
fn single_type_class_mass_decreases() {
    // the one most likely type class carries a shrinking share of the weight
    for s in [vec![0.5, 0.5], vec![0.75, 0.25]] {
        let sv = SpectrumVector::new(s).unwrap();
        let rows = typicality_convergence(&sv, &[4, 8, 12, 16, 20, 40]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].typical_mass < w[0].typical_mass);
            assert!(w[1].typical_mass > 0.0 && w[0].typical_mass <= 1.0);
        }
    }
}
