use pareto_forge::io::{dataset_from_json, dataset_to_json, read_dataset, write_dataset};
use pareto_forge::model::{
    check_concave, check_constraint_shift_invariance, check_monotone, check_shift_invariance, eval_constraint,
    generate_probes, AsGbar, ConstraintFunction, EmpiricalStrategy, ProbeSpec, RpDataset,
};
use pareto_forge::synth::{consistent_dataset, Shape};
use pareto_forge::Error;
use proptest::prelude::*;

#[test]
fn probes_are_shifted_copies_of_the_base() {
    let spec = ProbeSpec {
        base: ConstraintFunction::log_sigmoid(vec![1.0, 0.5], 0.2),
        beta: vec![1.0, 1.0],
        chi: (0.0, 2.0),
        seed: 11,
    };
    let probes = generate_probes(&spec, 25).unwrap();
    assert_eq!(probes.len(), 25);
    for p in &probes {
        assert!((0.0..2.0).contains(&p.a_t));
        // g_t(x + a_t β) = g(x)
        let x = [0.3, 0.7];
        let shifted: Vec<f64> = x.iter().zip(&p.beta).map(|(x, b)| x + p.a_t * b).collect();
        assert!((p.value(&shifted) - spec.base.value(&x)).abs() < 1e-12);
    }
    assert_eq!(probes, generate_probes(&spec, 25).unwrap());
    assert!(generate_probes(&ProbeSpec { chi: (1.0, 1.0), ..spec.clone() }, 3).is_err());
    assert!(generate_probes(&ProbeSpec { beta: vec![0.0, 0.0], ..spec.clone() }, 3).is_err());
    assert!(generate_probes(&ProbeSpec { beta: vec![1.0], ..spec }, 3).is_err());
}

#[test]
fn built_in_families_are_shift_invariant_monotone_and_concave() {
    for base in [
        ConstraintFunction::affine(vec![1.0, 2.0, 0.5], 1.0),
        ConstraintFunction::log_sigmoid(vec![0.3, 1.0, 2.0], -0.5),
    ] {
        assert!(check_constraint_shift_invariance(&base, &[1.0, 0.5, 2.0], 50, 3));
        let f = |x: &[f64]| base.value(x);
        assert!(check_monotone(&f, 3, 200, 4));
        assert!(check_concave(&f, 3, 200, 5));
    }
}

#[test]
fn property_checks_catch_counterexamples() {
    let convex = |x: &[f64]| x[0] * x[0] + x[1] * x[1];
    assert!(!check_concave(&convex, 2, 200, 1));
    let decreasing = |x: &[f64]| -x[0];
    assert!(!check_monotone(&decreasing, 1, 200, 1));
    // Level sets of a radial function are not translates along β.
    let radial = |x: &[f64]| (x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0 + 0.3 * x[0] * x[1];
    assert!(!check_shift_invariance(&radial, 2, &[1.0, 1.0], 100, 2));
}

#[test]
fn constraint_validation() {
    assert!(ConstraintFunction::affine(vec![], 1.0).validate().is_err());
    assert!(ConstraintFunction::affine(vec![-1.0], 1.0).validate().is_err());
    assert!(ConstraintFunction::affine(vec![f64::INFINITY], 1.0).validate().is_err());
    let mut g = ConstraintFunction::affine(vec![1.0, 1.0], 1.0);
    g.beta = vec![1.0];
    assert!(matches!(g.validate(), Err(Error::Dimension { .. })));
    let g = ConstraintFunction::affine(vec![1.0, 1.0], 1.0);
    assert!(matches!(eval_constraint(&g, &[1.0]), Err(Error::Dimension { .. })));
    assert!(matches!(eval_constraint(&g, &[1.0, -0.5]), Err(Error::NegativeCoordinate { index: 1, .. })));
}

#[test]
fn log_sigmoid_is_stable_in_the_tails() {
    let g = ConstraintFunction::log_sigmoid(vec![1.0], 0.0);
    assert!((g.value(&[1e4]) - std::f64::consts::LN_2).abs() < 1e-12);
    let far = ConstraintFunction::log_sigmoid(vec![1.0], 1e4);
    assert!((far.value(&[0.0]) - (std::f64::consts::LN_2 - 1e4)).abs() < 1e-9);
    assert!(g.gradient(&[1e4])[0] >= 0.0);
}

#[test]
fn strategies_and_datasets_reject_bad_input() {
    assert!(EmpiricalStrategy::new(vec![]).is_err());
    assert!(EmpiricalStrategy::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    assert!(EmpiricalStrategy::new(vec![vec![f64::NAN]]).is_err());
    let g = ConstraintFunction::affine(vec![1.0], 1.0);
    let over = RpDataset::new(vec![vec![g.clone()]], vec![vec![EmpiricalStrategy::pure(vec![1.5])]]);
    assert!(matches!(over, Err(Error::InfeasibleSample { t: 0, i: 0, .. })));
    let ragged = RpDataset::new(vec![vec![g.clone()], vec![]], vec![vec![EmpiricalStrategy::pure(vec![0.5])]; 2]);
    assert!(ragged.is_err());
    let ok = RpDataset::new(vec![vec![g]], vec![vec![EmpiricalStrategy::pure(vec![0.25])]]).unwrap();
    assert_eq!(ok.gbar().get(0, 0, 0), -0.75);
}

#[test]
fn gbar_table_indexing() {
    let d = consistent_dataset(Shape { t: 3, m: 2, k: 2, n: 2, spread: 0.05 }, 1).unwrap();
    let g = d.gbar();
    for t in 0..3 {
        for s in 0..3 {
            for i in 0..2 {
                let f = d.constraint(t, i);
                let want: f64 = d.strategy(s, i).samples.iter().map(|x| f.value(x)).sum::<f64>() / 2.0;
                assert!((g.get(t, s, i) - want).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn file_round_trip_is_bit_exact() {
    let d = consistent_dataset(Shape { t: 4, m: 3, k: 2, n: 3, spread: 0.1 }, 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    write_dataset(&path, &d).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back, d);
    assert_eq!(dataset_to_json(&back), std::fs::read_to_string(&path).unwrap().trim_end());
}

#[test]
fn malformed_files_are_reported() {
    let d = consistent_dataset(Shape::pure(2, 1, 2), 2).unwrap();
    let text = dataset_to_json(&d);
    assert!(dataset_from_json(&text[..text.len() / 2]).is_err());
    assert!(dataset_from_json(&text.replace("\"T\": 2", "\"T\": 3")).is_err());
    assert!(dataset_from_json(&text.replacen("\"k\"", "\"extra\": 1, \"k\"", 1)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn json_round_trip(seed in 0u64..100_000, t in 1usize..5, m in 1usize..4, k in 1usize..4, n in 1usize..4) {
        let d = consistent_dataset(Shape { t, m, k, n, spread: 0.1 }, seed).unwrap();
        prop_assert_eq!(dataset_from_json(&dataset_to_json(&d)).unwrap(), d);
    }

    #[test]
    fn affine_value_is_linear(a in prop::collection::vec(0.0f64..3.0, 3), x in prop::collection::vec(0.0f64..3.0, 3),
                              y in prop::collection::vec(0.0f64..3.0, 3), w in 0.0f64..1.0) {
        let g = ConstraintFunction::affine(a, 0.7);
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| w * p + (1.0 - w) * q).collect();
        let lhs = g.value(&mix);
        let rhs = w * g.value(&x) + (1.0 - w) * g.value(&y);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn budget_projection_is_feasible_and_idempotent(a in prop::collection::vec(0.1f64..3.0, 3), z in prop::collection::vec(-2.0f64..4.0, 3)) {
        let set = ConstraintFunction::affine(a, 1.0).budget_set();
        let p = set.project(&z);
        prop_assert!(set.contains(&p, 1e-9));
        let q = set.project(&p);
        for (u, v) in p.iter().zip(&q) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }
}
