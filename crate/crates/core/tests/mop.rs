use mop_core::dataset::seeded_rng;
use mop_core::mop::{Outcome, SearchLogEntry};
use mop_core::{
    benchmarks, cop_cross_validation, correlations, find_mop, importance_filter, select_winner,
    significance_filter, DesignTable, FilterConfig, ModelKind, MopError, MopOptions, ValidationScheme,
};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian_table(n: usize, m: usize, seed: u64, f: impl Fn(&[f64], f64) -> f64) -> DesignTable<f64> {
    let mut rng = seeded_rng(seed);
    let cols: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let y = (0..n)
        .map(|j| {
            let x: Vec<f64> = cols.iter().map(|c| c[j]).collect();
            f(&x, rng.sample(StandardNormal))
        })
        .collect();
    DesignTable::from_columns(cols).unwrap().with_response("y", y).unwrap()
}

fn quick_options(seed: u64) -> MopOptions<f64> {
    let mut options = MopOptions::default().with_seed(seed);
    options.sensitivity_samples = 2000;
    options
}

#[test]
fn correlation_examples() {
    let x: Vec<f64> = (0..20).map(|j| (j as f64 * 0.37).sin()).collect();
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let table = DesignTable::from_columns(vec![x]).unwrap().with_response("y", neg).unwrap();
    let c = correlations(&table, "y").unwrap();
    assert_eq!(c.linear[0][0], 1.0);
    assert!((c.linear[0][1] + 1.0).abs() < 1e-12);

    let mut rng = seeded_rng(1);
    let x: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let table = DesignTable::from_columns(vec![x]).unwrap().with_response("y", sq).unwrap();
    let c = correlations(&table, "y").unwrap();
    assert!(c.linear[0][1].abs() < 0.15);
    assert!(c.quadratic[0][1] > 0.999);
}

#[test]
fn constant_column_is_rejected() {
    let table = DesignTable::from_columns(vec![vec![1.0, 2.0, 3.0], vec![4.0; 3]])
        .unwrap()
        .with_response("y", vec![1.0, 0.0, 2.0])
        .unwrap();
    assert!(matches!(correlations(&table, "y"), Err(MopError::ConstantColumn(name)) if name == "x2"));
}

#[test]
fn significance_keeps_the_driver_and_drops_noise() {
    let (mut driver_kept, mut noise_dropped, mut noise_total) = (0, 0, 0);
    for seed in 0..50 {
        let table = gaussian_table(200, 8, seed, |x, e| 5.0 * x[0] + e);
        let kept = significance_filter(&correlations(&table, "y").unwrap(), 0.95).unwrap();
        driver_kept += usize::from(kept.contains(&0));
        noise_dropped += (1..8).filter(|i| !kept.contains(i)).count();
        noise_total += 7;
    }
    assert_eq!(driver_kept, 50);
    let rate = noise_dropped as f64 / noise_total as f64;
    assert!(rate >= 0.9, "noise exclusion rate {rate}");
}

#[test]
fn quadratic_channel_detects_symmetric_dependence() {
    let mut rng = seeded_rng(4);
    let cols: Vec<Vec<f64>> = (0..5).map(|_| (0..200).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = cols[0].iter().map(|v| v * v).collect();
    let table = DesignTable::from_columns(cols).unwrap().with_response("y", y).unwrap();
    let c = correlations(&table, "y").unwrap();
    let th = mop_core::mop::significance_thresholds(&c, 0.95).unwrap().unwrap();
    assert!(c.linear[0][5].abs() < th.linear);
    assert!(significance_filter(&c, 0.95).unwrap().contains(&0));
}

#[test]
fn single_input_always_passes() {
    let table = gaussian_table(30, 1, 2, |_, e| e);
    assert_eq!(significance_filter(&correlations(&table, "y").unwrap(), 0.99).unwrap(), vec![0]);
}

#[test]
fn importance_filter_finds_active_pair() {
    let table = benchmarks::active2of8_table::<f64>(200, 3).unwrap();
    let all: Vec<usize> = (0..8).collect();
    assert_eq!(importance_filter(&table, "y", &all, 0.01).unwrap(), vec![0, 1]);
    assert_eq!(importance_filter(&table, "y", &[0, 1], 0.01).unwrap(), vec![0, 1]);
    // x2 carries most of the variance.
    assert_eq!(importance_filter(&table, "y", &all, 0.99).unwrap(), vec![1]);
}

#[test]
fn search_log_covers_grid_and_is_reproducible() {
    let table = benchmarks::quad2d_table::<f64>(60, 5).unwrap();
    let options = quick_options(5);
    let a = find_mop(&table, "y", &options).unwrap();
    let s = &options.search;
    assert_eq!(a.result.runner_up_log.len(), s.kinds.len() * s.quantiles.len() * s.coi_mins.len());
    assert_eq!(a.result.unfiltered_log.len(), s.kinds.len());
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = serial.install(|| find_mop(&table, "y", &options).unwrap());
    assert_eq!(serde_json::to_string(&a.result).unwrap(), serde_json::to_string(&b.result).unwrap());
    assert_eq!(a.model, b.model);
}

#[test]
fn winner_cop_is_recomputable() {
    let table = benchmarks::active2of8_table::<f64>(120, 9).unwrap();
    let options = quick_options(9);
    let mop = find_mop(&table, "y", &options).unwrap();
    let r = &mop.result;
    let ValidationScheme::CrossValidation { q, seed } = r.scheme else { unreachable!() };
    let sub = table.project(&r.retained_variables).unwrap();
    let fresh = cop_cross_validation(&sub, "y", &options.trainer(r.model_kind), q, seed).unwrap();
    assert!((fresh.cop - r.cop).abs() <= 1e-12);
    assert_eq!(mop.quality.cop, r.cop);
}

#[test]
fn in_basis_truth_prefers_polynomial() {
    let table = benchmarks::quad2d_table::<f64>(100, 6).unwrap();
    let mop = find_mop(&table, "y", &quick_options(6)).unwrap();
    assert_eq!(mop.result.model_kind, ModelKind::PolyQuadraticCoupling);
    let mls_best = mop
        .result
        .runner_up_log
        .iter()
        .filter(|e| e.kind.is_mls())
        .filter_map(SearchLogEntry::cop)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(mls_best >= mop.result.cop - 0.03);
}

#[test]
fn zero_delta_takes_the_argmax() {
    let table = benchmarks::ishigami_table::<f64>(150, 2).unwrap();
    let mut options = quick_options(2);
    options.delta_cop = 0.0;
    let mop = find_mop(&table, "y", &options).unwrap();
    let best = mop
        .result
        .runner_up_log
        .iter()
        .chain(&mop.result.unfiltered_log)
        .filter_map(SearchLogEntry::cop)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(mop.result.cop, best);
}

#[test]
fn split_scheme_predicts_test_part() {
    let table = benchmarks::quad2d_table::<f64>(80, 3).unwrap();
    let mut options = quick_options(3);
    options.scheme = ValidationScheme::Split { train_fraction: 0.75, seed: 3 };
    let mop = find_mop(&table, "y", &options).unwrap();
    assert_eq!(mop.validation_predictions.len(), 20);
    let y = table.response("y").unwrap();
    let (obs, hat): (Vec<f64>, Vec<f64>) = mop.validation_predictions.iter().map(|&(j, v)| (y[j], v)).unzip();
    assert!((mop_core::cod(&obs, &hat).unwrap() - mop.result.cop).abs() < 1e-12);
    assert!(mop.result.cop > 0.9);
}

#[test]
fn single_precision_search() {
    let table = benchmarks::quad2d_table::<f32>(60, 1).unwrap();
    let mut options = MopOptions::<f32>::default();
    options.search.kinds = vec![ModelKind::PolyLinear, ModelKind::PolyQuadraticCoupling];
    options.sensitivity_samples = 2000;
    let mop = find_mop(&table, "y", &options).unwrap();
    assert_eq!(mop.result.model_kind, ModelKind::PolyQuadraticCoupling);
    assert!(mop.result.cop > 0.99);
}

#[test]
fn invalid_options_are_rejected() {
    let table = benchmarks::quad2d_table::<f64>(20, 1).unwrap();
    let mut options = quick_options(1);
    options.scheme = ValidationScheme::CrossValidation { q: 1, seed: 0 };
    assert!(matches!(find_mop(&table, "y", &options), Err(MopError::InvalidPartition(_))));
    let mut options = quick_options(1);
    options.search.quantiles.clear();
    assert!(matches!(find_mop(&table, "y", &options), Err(MopError::InvalidArgument(_))));
}

fn entry(kind: ModelKind, retained: usize, cop: Option<f64>) -> SearchLogEntry<f64> {
    SearchLogEntry {
        kind,
        filter: Some(FilterConfig { significance_quantile: 0.95, coi_min: 0.03 }),
        significant: (0..retained).collect(),
        retained: (0..retained).collect(),
        outcome: match cop {
            Some(cop) => Outcome::Evaluated { cop },
            None => Outcome::Failed { reason: "singular".into() },
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn survivors_shrink_as_quantile_grows(seed in any::<u64>(), m in 2usize..7) {
        let table = gaussian_table(60, m, seed, |x, e| x[0] - 0.5 * x[m - 1] * x[m - 1] + e);
        let c = correlations(&table, "y").unwrap();
        let grid = [0.5, 0.75, 0.9, 0.925, 0.95, 0.975, 0.99];
        for w in grid.windows(2) {
            let loose = significance_filter(&c, w[0]).unwrap();
            let strict = significance_filter(&c, w[1]).unwrap();
            prop_assert!(strict.iter().all(|i| loose.contains(i)));
        }
    }

    #[test]
    fn correlation_matrix_shape(seed in any::<u64>(), m in 1usize..5) {
        let table = gaussian_table(40, m, seed, |x, e| x.iter().sum::<f64>() + e);
        let c = correlations(&table, "y").unwrap();
        for i in 0..=m {
            prop_assert_eq!(c.linear[i][i], 1.0);
            for j in 0..=m {
                prop_assert_eq!(c.linear[i][j], c.linear[j][i]);
                prop_assert_eq!(c.quadratic[i][j], c.quadratic[j][i]);
                prop_assert!(c.linear[i][j].abs() <= 1.0 && (0.0..=1.0).contains(&c.quadratic[i][j]));
            }
        }
    }

    #[test]
    fn winner_obeys_preference_order(cops in proptest::collection::vec(proptest::option::of(0.0f64..1.0), 1..12), delta in 0.0f64..0.1) {
        let log: Vec<_> = cops
            .iter()
            .enumerate()
            .map(|(k, &c)| entry(ModelKind::ALL[k % 5], 1 + k % 3, c))
            .collect();
        let best = log.iter().filter_map(SearchLogEntry::cop).fold(None, |a: Option<f64>, c| Some(a.map_or(c, |a| a.max(c))));
        match (select_winner(&log, delta), best) {
            (None, None) => {}
            (Some(w), Some(best)) => {
                let chosen = &log[w];
                let c = chosen.cop().unwrap();
                prop_assert!(c >= best - delta);
                for e in &log {
                    if let Some(other) = e.cop().filter(|&o| o >= best - delta) {
                        let key = (e.kind, e.retained.len());
                        let won = (chosen.kind, chosen.retained.len());
                        prop_assert!(won < key || (won == key && c >= other));
                    }
                }
            }
            _ => prop_assert!(false, "winner and best disagree"),
        }
    }
}
