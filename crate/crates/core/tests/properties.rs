use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use ipl_core::earlywarn::{build_warning_tree, parse_rules, pool_from_report, render_rules, PoolTerm};
use ipl_core::interpret::{
    cosine_similarity, perturbation_analysis, rank_features, sparsity_accuracy_sweep, spearman_rho,
    PerturbationConfig, SweepMetric,
};
use ipl_core::polycore::{
    expand_to_monomials, predict_kernel, predict_sparse, CenterSet, CenterStrategy, KernelModel, MultiIndex,
};
use ipl_core::solver::LossKind;
use ipl_core::timeseries::{
    chronological_split, lag_embed, simulate_alarm_series, AlarmConfig, LagSpec, SplitSpec, SupervisedDataset,
};
use ipl_core::{fit_ipl, IplConfig, SolverChoice};

fn names(d: usize) -> Vec<String> {
    (1..=d).map(|k| format!("x{k}")).collect()
}

fn model_strategy() -> impl Strategy<Value = KernelModel> {
    (1usize..5, 1u32..4, 1usize..12).prop_flat_map(|(d, s, n)| {
        (
            prop::collection::vec(-1.0f64..1.0, n * d),
            prop::collection::vec(-2.0f64..2.0, n),
        )
            .prop_map(move |(c, w)| {
                KernelModel::new(
                    s,
                    CenterSet::new(DMatrix::from_row_slice(n, d, &c), CenterStrategy::FirstSamples).unwrap(),
                    DVector::from_vec(w),
                    None,
                    LagSpec::default(),
                    LossKind::Squared,
                    names(d),
                )
                .unwrap()
            })
    })
}

fn dataset(x: &[f64], d: usize, y: Vec<f64>) -> SupervisedDataset {
    SupervisedDataset::from_rows(DMatrix::from_row_slice(y.len(), d, x), y, names(d)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_and_expansion_agree(m in model_strategy(), seed in 0u64..1000) {
        let p = expand_to_monomials(&m).unwrap();
        let d = m.dim();
        for i in 0..20 {
            let x: Vec<f64> = (0..d).map(|k| (((seed + 7 * i + 3 * k as u64) % 97) as f64 / 48.5) - 1.0).collect();
            let a = predict_kernel(&m, &x).unwrap();
            let b = predict_sparse(&p, &x).unwrap();
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn ranks_are_a_permutation(m in model_strategy(), threshold in 0.0f64..3.0) {
        let r = rank_features(&m, threshold, true).unwrap();
        let ranks: Vec<usize> = r.entries.iter().map(|e| e.rank).collect();
        prop_assert_eq!(ranks, (1..=r.len()).collect::<Vec<_>>());
        prop_assert!(r.entries.windows(2).all(|w| w[0].coefficient.abs() >= w[1].coefficient.abs()));
        prop_assert!(r.entries.iter().all(|e| e.coefficient.abs() >= threshold && !e.alpha.is_constant()));
    }

    #[test]
    fn higher_threshold_gives_subset(m in model_strategy(), a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let rl = rank_features(&m, lo, true).unwrap();
        let rh = rank_features(&m, hi, true).unwrap();
        for e in &rh.entries {
            prop_assert!(rl.entries.iter().any(|f| f.alpha == e.alpha && f.coefficient == e.coefficient));
        }
    }

    #[test]
    fn scaling_targets_scales_coefficients(
        x in prop::collection::vec(0.0f64..1.0, 60 * 3),
        c in 0.1f64..10.0,
    ) {
        let y: Vec<f64> = x.chunks(3).map(|r| r[0] - 2.0 * r[1] * r[2] + 0.5).collect();
        let cfg = IplConfig { solver: SolverChoice::Pinv, ..Default::default() };
        let base = fit_ipl(&dataset(&x, 3, y.clone()), &cfg).unwrap();
        let scaled = fit_ipl(&dataset(&x, 3, y.iter().map(|v| c * v).collect()), &cfg).unwrap();
        for ((a, u), (b, v)) in base.expansion.terms().iter().zip(scaled.expansion.terms()) {
            prop_assert_eq!(a, b);
            prop_assert!((c * u - v).abs() <= 1e-7 * (1.0 + v.abs()), "{} * {} vs {}", c, u, v);
        }
    }

    #[test]
    fn deeper_tree_never_worse_on_training_data(
        x in prop::collection::vec(0.0f64..1.0, 80 * 2),
        flips in prop::collection::vec(any::<bool>(), 80),
    ) {
        let labels: Vec<f64> = x
            .chunks(2)
            .zip(&flips)
            .map(|(r, f)| if (r[0] * r[1] > 0.25) ^ *f { 1.0 } else { -1.0 })
            .collect();
        let inputs = DMatrix::from_row_slice(80, 2, &x);
        let pool = vec![
            PoolTerm { name: "x1*x2".into(), alpha: MultiIndex::pair(2, 0, 1) },
            PoolTerm { name: "x1".into(), alpha: MultiIndex::linear(2, 0) },
        ];
        let mut last = 0.0;
        for depth in 1..=5 {
            let t = build_warning_tree(&inputs, &labels, pool.clone(), depth, 1).unwrap();
            let pred = t.predict_matrix(&inputs);
            let acc = pred.iter().zip(&labels).filter(|(p, l)| p == l).count() as f64 / 80.0;
            prop_assert!(acc >= last, "depth {} accuracy {} < {}", depth, acc, last);
            last = acc;
        }
    }

    #[test]
    fn rendered_rules_classify_identically(
        x in prop::collection::vec(0.0f64..1.0, 60 * 3),
        depth in 1usize..4,
    ) {
        let labels: Vec<f64> = x.chunks(3).map(|r| if r[1] + r[2] * r[0] > 0.7 { 1.0 } else { -1.0 }).collect();
        let inputs = DMatrix::from_row_slice(60, 3, &x);
        let n = names(3);
        let pool = [MultiIndex::linear(3, 1), MultiIndex::pair(3, 0, 2), MultiIndex::linear(3, 0)]
            .into_iter()
            .map(|a| PoolTerm { name: a.name(&n), alpha: a })
            .collect();
        let t = build_warning_tree(&inputs, &labels, pool, depth, 2).unwrap();
        let parsed = parse_rules(&render_rules(&t), &n).unwrap();
        prop_assert_eq!(parsed.predict_matrix(&inputs), t.predict_matrix(&inputs));
        prop_assert_eq!(render_rules(&parsed), render_rules(&t));
    }

    #[test]
    fn self_similarity_is_one(v in prop::collection::vec(-5.0f64..5.0, 2..10)) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-6));
        let c = cosine_similarity(&v, &v).unwrap().value;
        prop_assert!((c - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        prop_assert!((cosine_similarity(&neg, &v).unwrap().value + 1.0).abs() < 1e-12);
        let ranks: Vec<f64> = (1..=v.len()).map(|r| r as f64).collect();
        prop_assert_eq!(spearman_rho(&ranks, &ranks).unwrap(), 1.0);
    }
}

fn linear_data(rows: usize, offset: usize) -> SupervisedDataset {
    let x: Vec<f64> = (0..rows * 2)
        .map(|i| (((i + offset) * 7919) % 1000) as f64 / 1000.0)
        .collect();
    let y: Vec<f64> = x
        .chunks(2)
        .enumerate()
        .map(|(i, r)| 3.0 * r[0] + 0.01 * r[1] + 0.05 * (((i * 31) % 17) as f64 / 17.0 - 0.5))
        .collect();
    dataset(&x, 2, y)
}

#[test]
fn perturbation_grows_with_noise_level() {
    let (train, test) = (linear_data(400, 0), linear_data(200, 1234));
    let t = perturbation_analysis(
        &train,
        &test,
        &[0, 1],
        &PerturbationConfig { alphas: vec![0.0, 0.25, 0.5, 1.0], trials: 5, seed: 3 },
    )
    .unwrap();
    let strong: Vec<f64> = t.rows.iter().filter(|r| r.feature == 0).map(|r| r.mean_degradation).collect();
    let weak: Vec<f64> = t.rows.iter().filter(|r| r.feature == 1).map(|r| r.mean_degradation).collect();
    assert_eq!(strong[0], 0.0);
    assert_eq!(weak[0], 0.0);
    assert!(strong.windows(2).all(|w| w[1] > w[0]), "{strong:?}");
    for (s, w) in strong.iter().zip(&weak).skip(1) {
        assert!(s > w);
    }
}

#[test]
fn perturbation_is_reproducible() {
    let (train, test) = (linear_data(100, 0), linear_data(50, 99));
    let cfg = PerturbationConfig::default();
    let a = perturbation_analysis(&train, &test, &[0, 1], &cfg).unwrap();
    let b = perturbation_analysis(&train, &test, &[0, 1], &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_top_interaction_separates_alarm() {
    let s = simulate_alarm_series(&AlarmConfig::default()).unwrap();
    let ds = lag_embed(&s, LagSpec::default()).unwrap();
    let sp = chronological_split(&ds, SplitSpec::Counts { train: 2000, validation: 0, test: 1000 }).unwrap();
    let fit = fit_ipl(&sp.train, &IplConfig::default()).unwrap();
    let report = rank_features(&fit.model, 0.0, true).unwrap();
    assert_eq!(report.entries[0].alpha, MultiIndex::pair(5, 1, 2));
    let r = sparsity_accuracy_sweep(&sp.train, &sp.test, &fit.model, &report, &[1, 2, 3, 50], SweepMetric::Auc)
        .unwrap();
    // the sweep works on scaled coordinates, where the product is not
    // exactly monotone in the raw interaction
    assert!(r.points[0].value >= 0.999, "{:?}", r.points);
    assert!(r.clamped);
    assert_eq!(r.points.last().unwrap().k, report.len());
    assert!(r.points.iter().all(|p| (0.5..=1.0).contains(&p.value)));

    let pool = pool_from_report(&report, 1);
    let t = build_warning_tree(&sp.train.inputs, &sp.train.targets, pool, 1, 5).unwrap();
    let text = render_rules(&t);
    assert!(text.starts_with("IF x2[t]*x3[t] <= 0.3"), "{text}");
}

#[test]
fn zero_model_has_empty_ranking() {
    let m = KernelModel::new(
        2,
        CenterSet::new(DMatrix::from_element(3, 2, 0.5), CenterStrategy::FirstSamples).unwrap(),
        DVector::zeros(3),
        None,
        LagSpec::default(),
        LossKind::Squared,
        names(2),
    )
    .unwrap();
    let r = rank_features(&m, 0.0, true).unwrap();
    assert!(r.is_empty());
    assert_eq!(r.constant, 0.0);
}
