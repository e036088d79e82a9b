mod common;

use common::{lp_bisection_gap, random_psi, random_scenario};
use pareto_forge::dro::{
    constraint_violation, exchange_loop, h_from_table, h_value, iteration_ceiling, master_objective, master_solve,
    nearest_sample_distance, robust_gap, sample_scenarios, scenario_table, two_good_instance, wasserstein_ball_check,
    CvOptions, DroConfig, DroContext, MasterOptions, PsiBox, PsiVector, Scenario, ScenarioSet, TwoGoodConfig,
};
use pareto_forge::model::{ConstraintFunction, EmpiricalStrategy, RpDataset};
use pareto_forge::rng;
use proptest::prelude::*;
use rand::Rng as _;

fn instance(t: usize, n: usize, seed: u64) -> RpDataset {
    two_good_instance(&TwoGoodConfig { t, n, seed, ..TwoGoodConfig::default() }).unwrap()
}

/// One-dimensional actions with budgets `x ≤ 1/a`.
fn line_dataset(prices: &[[f64; 2]], samples: &[[[f64; 3]; 2]]) -> RpDataset {
    let constraints =
        prices.iter().map(|row| row.iter().map(|&a| ConstraintFunction::affine(vec![a], 1.0)).collect()).collect();
    let strategies = samples
        .iter()
        .map(|row| {
            row.iter().map(|xs| EmpiricalStrategy::new(xs.iter().map(|&x| vec![x]).collect()).unwrap()).collect()
        })
        .collect();
    RpDataset::new(constraints, strategies).unwrap()
}

#[test]
fn closed_form_matches_lp_bisection() {
    let d = instance(3, 4, 5);
    let b = PsiBox::standard(0.1);
    let ctx = DroContext::new(&d, b).unwrap();
    let mut r = rng::rng(9);
    for _ in 0..25 {
        let psi = random_psi(3, 3, &b, &mut r);
        let phi = random_scenario(&ctx.budgets, 3, 3, &mut r);
        let table = scenario_table(&d, &phi);
        let h = h_from_table(&psi, &table);
        let oracle = lp_bisection_gap(&psi, &table, ctx.h_bound(), 1e-9);
        assert!((h - oracle).abs() < 1e-6, "{h} vs {oracle}");
    }
}

#[test]
fn gap_stays_below_its_bound() {
    let d = instance(4, 3, 2);
    let b = PsiBox::standard(0.1);
    let ctx = DroContext::new(&d, b).unwrap();
    let mut r = rng::rng(4);
    for _ in 0..500 {
        let psi = random_psi(4, 3, &b, &mut r);
        let phi = random_scenario(&ctx.budgets, 4, 3, &mut r);
        let h = h_value(&psi, &d, &phi);
        assert!(h >= 0.0 && h <= ctx.h_bound());
    }
}

#[test]
fn ball_membership_matches_brute_force() {
    let d = instance(2, 3, 8);
    let samples = sample_scenarios(&d).unwrap();
    let ctx = DroContext::new(&d, PsiBox::standard(0.1)).unwrap();
    let mut r = rng::rng(1);
    for _ in 0..50 {
        let phi = random_scenario(&ctx.budgets, 2, 3, &mut r);
        let mut want = 0.0;
        for b in 0..phi.points.len() {
            let mut best = f64::INFINITY;
            for s in &samples {
                let dx = phi.points[b][0] - s.points[b][0];
                let dy = phi.points[b][1] - s.points[b][1];
                best = best.min((dx * dx + dy * dy).sqrt());
            }
            want += best;
        }
        let got = nearest_sample_distance(&phi, &samples);
        assert!((got - want).abs() < 1e-12);
        assert!(wasserstein_ball_check(&phi, &samples, want + 1e-9));
        assert!(!wasserstein_ball_check(&phi, &samples, want - 1e-6));
    }
    assert!(wasserstein_ball_check(&samples[1], &samples, 0.0));
}

#[test]
fn master_without_cuts_is_trivial() {
    let d = instance(2, 3, 3);
    let ctx = DroContext::new(&d, PsiBox::standard(0.1)).unwrap();
    let cuts = ScenarioSet::new(ctx.n());
    let sol = master_solve(&cuts, &ctx, 0.1, ctx.h_bound(), None, &MasterOptions::default(), 0);
    assert_eq!(sol.objective, 0.0);
    assert_eq!(sol.kappa, 0.0);
    assert!(sol.psi.in_box(&ctx.psi_box));
}

#[test]
fn master_improves_on_the_neutral_point() {
    let d = instance(3, 3, 6);
    let ctx = DroContext::new(&d, PsiBox::standard(0.1)).unwrap();
    let mut r = rng::rng(12);
    let mut cuts = ScenarioSet::new(ctx.n());
    for k in 0..ctx.n() {
        for _ in 0..3 {
            cuts.add(&ctx, k, random_scenario(&ctx.budgets, 3, 3, &mut r));
        }
        cuts.add(&ctx, k, ctx.samples[k].clone());
    }
    let eps = 0.5;
    let sol = master_solve(&cuts, &ctx, eps, ctx.h_bound(), None, &MasterOptions::default(), 1);
    assert!(sol.psi.in_box(&ctx.psi_box) && sol.kappa >= 0.0);
    assert!((master_objective(&sol.psi, &cuts, sol.kappa, eps) - sol.objective).abs() < 1e-12);
    let neutral = PsiVector::neutral(3, 3, &ctx.psi_box);
    for kappa in [0.0, 0.1, 1.0, 10.0] {
        assert!(sol.objective <= master_objective(&neutral, &cuts, kappa, eps) + 1e-9);
    }
    // Every v_k covers its cuts.
    for k in 0..ctx.n() {
        for cut in &cuts.cuts[k] {
            assert!(h_from_table(&sol.psi, &cut.table) - sol.kappa * cut.distance <= sol.v[k] + 1e-12);
        }
    }
}

#[test]
fn violation_oracle_matches_a_line_search() {
    let d = line_dataset(
        &[[1.0, 2.0], [0.5, 1.5]],
        &[[[0.2, 0.9, 0.5], [0.1, 0.4, 0.3]], [[1.5, 0.3, 1.9], [0.6, 0.2, 0.5]]],
    );
    let b = PsiBox::standard(0.1);
    let ctx = DroContext::new(&d, b).unwrap();
    let mut r = rng::rng(21);
    for trial in 0..20 {
        let psi = random_psi(2, 2, &b, &mut r);
        let kappa = r.random_range(0.0..3.0);
        let v_k = r.random_range(0.0..1.0);
        for k in 0..3 {
            let sample = &ctx.samples[k];
            let mut want = h_from_table(&psi, &scenario_table(&d, sample));
            for blk in 0..4 {
                let ext = ctx.budgets[blk].extent()[0];
                for j in 0..=20_000 {
                    let y = ext * j as f64 / 20_000.0;
                    let mut phi: Scenario = sample.clone();
                    phi.points[blk] = vec![y];
                    let val = h_value(&psi, &d, &phi) - kappa * (y - sample.points[blk][0]).abs();
                    want = want.max(val);
                }
            }
            let (cv, phi) = constraint_violation(k, &psi, kappa, v_k, &ctx, &CvOptions::default(), trial);
            assert!((cv - (want - v_k)).abs() < 1e-3, "trial {trial} k {k}: {cv} vs {}", want - v_k);
            let attained = h_value(&psi, &d, &phi) - kappa * phi.distance(sample) - v_k;
            assert!((attained - cv).abs() < 1e-9);
        }
    }
}

#[test]
fn prohibitive_transport_price_leaves_the_samples() {
    let d = instance(2, 3, 4);
    let b = PsiBox::standard(0.1);
    let ctx = DroContext::new(&d, b).unwrap();
    let mut r = rng::rng(3);
    let psi = random_psi(2, 3, &b, &mut r);
    for k in 0..3 {
        let (cv, phi) = constraint_violation(k, &psi, 1e6, 0.0, &ctx, &CvOptions::default(), 0);
        let base = h_from_table(&psi, &ctx.sample_tables[k]);
        assert!((cv - base).abs() < 1e-9 && phi == ctx.samples[k]);
    }
    // With κ = 0 the origin of a block is always available.
    let (cv, _) = constraint_violation(0, &PsiVector::neutral(2, 3, &b), 0.0, 0.0, &ctx, &CvOptions::default(), 0);
    assert!(cv >= 1.0 - 1e-9);
}

#[test]
fn robust_gap_grows_with_the_radius() {
    let d = instance(3, 3, 10);
    let b = PsiBox::standard(0.1);
    let ctx = DroContext::new(&d, b).unwrap();
    let mut r = rng::rng(5);
    for _ in 0..5 {
        let psi = random_psi(3, 3, &b, &mut r);
        let at_zero = robust_gap(&psi, &ctx, 0.0, &CvOptions::default(), 0);
        let direct = ctx.sample_tables.iter().map(|t| h_from_table(&psi, t)).fold(0.0, f64::max);
        assert!((at_zero - direct).abs() < 1e-12);
        let mut prev = at_zero;
        for eps in [0.01, 0.1, 0.5, 2.0] {
            let g = robust_gap(&psi, &ctx, eps, &CvOptions::default(), 0);
            assert!(g >= prev - 1e-9, "eps {eps}: {g} < {prev}");
            prev = g;
        }
    }
}

#[test]
fn loose_tolerance_stops_after_one_round() {
    let d = instance(2, 3, 1);
    let res = exchange_loop(&d, 0.1, 1000.0, &DroConfig::default()).unwrap();
    assert_eq!(res.iterations, 1);
    assert!(res.certified && res.trace.len() == 1);
    assert!(exchange_loop(&d, 0.1, 0.0, &DroConfig::default()).is_err());
    assert!(exchange_loop(&d, -1.0, 0.1, &DroConfig::default()).is_err());
}

#[test]
fn exchange_certificate_survives_a_fresh_search() {
    let d = instance(2, 3, 7);
    let delta = 0.05;
    let cfg = DroConfig { seed: 3, ..DroConfig::default() };
    let res = exchange_loop(&d, 0.1, delta, &cfg).unwrap();
    assert!(res.certified, "max cv {}", res.state.max_cv());
    assert!((res.iterations as f64) <= iteration_ceiling(2, 3, delta));
    assert!(res.psi_hat.in_box(&cfg.psi_box));
    assert!(res.robust_gap >= 0.0);
    let ctx = DroContext::new(&d, cfg.psi_box).unwrap();
    for k in 0..ctx.n() {
        let (cv, _) = constraint_violation(
            k,
            &res.psi_hat,
            res.state.kappa(),
            res.state.v_hat[k],
            &ctx,
            &cfg.cv,
            0xfeed + k as u64,
        );
        assert!(cv < 2.0 * delta, "k {k}: {cv}");
    }
    for w in res.trace.windows(2) {
        assert!(w[1].n_cuts_total >= w[0].n_cuts_total);
    }
    assert_eq!(res, exchange_loop(&d, 0.1, delta, &cfg).unwrap());
}

#[test]
fn outputs_have_the_documented_shape() {
    let d = instance(2, 2, 2);
    let res = exchange_loop(&d, 1.0, 0.1, &DroConfig::default()).unwrap();
    let csv = res.trace_csv();
    assert!(csv.starts_with("iter,max_cv,master_objective,n_cuts_total\n"));
    assert_eq!(csv.lines().count(), res.trace.len() + 1);
    let j = res.summary_json();
    for key in ["psi_hat", "robust_gap", "certified", "iterations", "max_cv", "kappa"] {
        assert!(j.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn ceiling_formula() {
    assert_eq!(iteration_ceiling(1, 1, 1.0), 16.0);
    assert!(iteration_ceiling(2, 3, 0.1) > 1e10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_is_invariant_under_joint_scaling(seed in 0u64..10_000, c in 0.05f64..20.0) {
        let d = instance(2, 2, 0);
        let b = PsiBox::standard(0.1);
        let ctx = DroContext::new(&d, b).unwrap();
        let mut r = rng::rng(seed);
        let psi = random_psi(2, 3, &b, &mut r);
        let phi = random_scenario(&ctx.budgets, 2, 3, &mut r);
        let scaled = psi.scaled(c);
        prop_assert!(scaled.in_box(&b.scaled(c)));
        let (h0, h1) = (h_value(&psi, &d, &phi), h_value(&scaled, &d, &phi));
        prop_assert!((h0 - h1).abs() < 1e-9 * (1.0 + h0));
    }
}
