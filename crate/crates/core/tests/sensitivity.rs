use mop_core::dataset::seeded_rng;
use mop_core::sensitivity::coi_all;
use mop_core::{
    basis_vector, benchmarks, coi, cop_cross_validation, cop_single, fit, fit_mls, scaled_indices, total_indices,
    BasisSpec, DesignTable, Distribution, MlsConfig, Predictor, Result,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

struct Function<F>(usize, F);

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Predictor<f64> for Function<F> {
    fn n_inputs(&self) -> usize {
        self.0
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok((self.1)(x))
    }
}

fn normals(m: usize) -> Vec<Distribution<f64>> {
    vec![Distribution::Normal { mean: 0.0, std_dev: 1.0 }; m]
}

fn ishigami_ranges() -> Vec<Distribution<f64>> {
    let pi = std::f64::consts::PI;
    vec![Distribution::Uniform { lower: -pi, upper: pi }; 3]
}

fn variance(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// Normal table with `y = f(x) + noise_sd * e`.
fn normal_table(n: usize, m: usize, seed: u64, noise_sd: f64, f: impl Fn(&[f64]) -> f64) -> DesignTable<f64> {
    let mut rng = seeded_rng(seed);
    let cols: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let y = (0..n)
        .map(|j| {
            let x: Vec<f64> = cols.iter().map(|c| c[j]).collect();
            let e: f64 = rng.sample(StandardNormal);
            f(&x) + noise_sd * e
        })
        .collect();
    DesignTable::from_columns(cols).unwrap().with_response("y", y).unwrap()
}

/// CoD of a least-squares fit computed through an SVD solve of the raw design.
fn brute_force_cod(table: &DesignTable<f64>, keep: &[usize], spec: BasisSpec) -> f64 {
    let y = table.response("y").unwrap();
    let n = y.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|j| basis_vector(spec, &keep.iter().map(|&k| table.column(k)[j]).collect::<Vec<_>>()))
        .collect();
    let design = DMatrix::from_fn(n, rows[0].len(), |j, k| rows[j][k]);
    let target = DVector::from_column_slice(y);
    let beta = design.clone().svd(true, true).solve(&target, 1e-14).unwrap();
    let resid = &target - design * beta;
    let mean = target.mean();
    1.0 - resid.norm_squared() / target.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
}

#[test]
fn additive_gaussian_totals() {
    let model = Function(2, |x: &[f64]| x[0] + x[1]);
    let s = total_indices(&model, &normals(2), 10_000, 1).unwrap();
    for i in 0..2 {
        assert!((s.total[i] - 0.5).abs() < 0.03, "{:?}", s.total);
    }
    let sum_first: f64 = s.first_order.iter().sum();
    let sum_total: f64 = s.total.iter().sum();
    assert!((sum_first - sum_total).abs() < 0.03);
}

#[test]
fn unequal_additive_gaussian_totals() {
    let model = Function(3, |x: &[f64]| x[0] + 2.0 * x[1] + 3.0 * x[2]);
    let s = total_indices(&model, &normals(3), 10_000, 2).unwrap();
    for (t, w) in s.total.iter().zip([1.0, 4.0, 9.0]) {
        assert!((t - w / 14.0).abs() < 0.03, "{:?}", s.total);
    }
}

#[test]
fn single_carrier_totals() {
    let model = Function(2, |x: &[f64]| x[0]);
    let s = total_indices(&model, &normals(2), 10_000, 3).unwrap();
    assert!((s.total[0] - 1.0).abs() < 0.02);
    assert!(s.total[1].abs() < 0.02);
}

#[test]
fn ishigami_totals_on_the_exact_function() {
    let model = Function(3, |x: &[f64]| benchmarks::ishigami(x, 7.0, 0.1));
    let s = total_indices(&model, &ishigami_ranges(), 10_000, 4).unwrap();
    let exact = benchmarks::ishigami_total_indices(7.0, 0.1);
    for i in 0..3 {
        assert!((s.total[i] - exact[i]).abs() < 0.03, "{:?}", s.total);
        assert!(s.total[i] >= s.first_order[i] - 0.03);
    }
}

#[test]
fn total_dominates_first_order_with_interactions() {
    let model = Function(3, |x: &[f64]| x[0] * x[1] + x[2] + 0.5 * x[0] * x[0]);
    let s = total_indices(&model, &normals(3), 10_000, 5).unwrap();
    for i in 0..3 {
        assert!(s.total[i] >= s.first_order[i] - 0.03, "{:?} vs {:?}", s.total, s.first_order);
    }
    assert!(s.total.iter().sum::<f64>() > 1.0);
}

#[test]
fn coi_examples() {
    let table = normal_table(100, 2, 6, 0.1, |x| x[0]);
    assert!(coi(&table, "y", BasisSpec::LINEAR, 1).unwrap().abs() < 0.02);
    let full = brute_force_cod(&table, &[0, 1], BasisSpec::LINEAR);
    let c1 = coi(&table, "y", BasisSpec::LINEAR, 0).unwrap();
    assert!((c1 - full).abs() < 0.02 && c1 > 0.95);
}

#[test]
fn coi_matches_brute_force_refits() {
    let table = benchmarks::quad2d_table::<f64>(100, 12).unwrap();
    let noisy = {
        let mut rng = seeded_rng(12);
        let y: Vec<f64> =
            table.response("y").unwrap().iter().map(|v| v + 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        table.with_response("y", y).unwrap()
    };
    let spec = BasisSpec::QUADRATIC_COUPLED;
    let scores = coi_all(&noisy, "y", spec).unwrap();
    let full = brute_force_cod(&noisy, &[0, 1], spec);
    let oracle = [full - brute_force_cod(&noisy, &[1], spec), full - brute_force_cod(&noisy, &[0], spec)];
    for i in 0..2 {
        assert!((scores[i] - oracle[i]).abs() < 1e-10, "{scores:?} vs {oracle:?}");
    }
}

#[test]
fn cop_single_of_irrelevant_input() {
    let table = normal_table(100, 2, 7, 0.2, |x| x[0]);
    let v = cop_single(&table, "y", &BasisSpec::LINEAR, 1, 5, 7).unwrap();
    assert!(v.abs() < 0.05);
}

#[test]
fn cop_single_sum_on_additive_model() {
    let gaps: Vec<f64> = (0..12)
        .map(|seed| {
            let inputs = mop_core::sample_lhs(&benchmarks::standard_normal_variables::<f64>(3), 200, seed).unwrap();
            let mut rng = seeded_rng(seed + 1000);
            let y = (0..200)
                .map(|j| {
                    let x = inputs.row(j);
                    let e: f64 = rng.sample(StandardNormal);
                    x[0] + 0.8 * x[1] + 0.5 * x[2] + 0.3 * e
                })
                .collect();
            let table = inputs.with_response("y", y).unwrap();
            let total = cop_cross_validation(&table, "y", &BasisSpec::LINEAR, 5, seed).unwrap().cop;
            let sum: f64 = (0..3).map(|i| cop_single(&table, "y", &BasisSpec::LINEAR, i, 5, seed).unwrap()).sum();
            (sum - total).abs()
        })
        .collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(mean < 0.1, "{gaps:?}");
}

#[test]
fn scaled_totals_of_additive_fit_sum_to_cop() {
    let table = normal_table(200, 3, 9, 0.5, |x| x[0] + 0.8 * x[1] + 0.5 * x[2]);
    let model = fit(&table, "y", BasisSpec::LINEAR).unwrap();
    let cop = cop_cross_validation(&table, "y", &BasisSpec::LINEAR, 5, 9).unwrap().cop;
    let s = total_indices(&model, &normals(3), 10_000, 9).unwrap();
    let sum: f64 = scaled_indices(&s.total, cop).iter().sum();
    assert!((sum - cop).abs() < 0.03, "{sum} vs {cop}");
}

#[test]
fn scaled_totals_with_coupling_exceed_cop() {
    let table = benchmarks::quad2d_table::<f64>(100, 10).unwrap();
    let spec = BasisSpec::QUADRATIC_COUPLED;
    let model = fit(&table, "y", spec).unwrap();
    let cop = cop_cross_validation(&table, "y", &spec, 5, 10).unwrap().cop;
    let s = total_indices(&model, &normals(2), 10_000, 10).unwrap();
    let sum: f64 = scaled_indices(&s.total, cop).iter().sum();
    assert!(sum >= cop - 0.03);
}

#[test]
fn mls_overestimates_single_influence_at_small_n() {
    let config = MlsConfig::new(BasisSpec::LINEAR).with_seed(1);
    let small = benchmarks::quad2d_table::<f64>(20, 1).unwrap();
    let large = benchmarks::quad2d_table::<f64>(500, 1).unwrap();
    for i in 0..2 {
        let a = cop_single(&small, "y", &config, i, 5, 1).unwrap();
        let b = cop_single(&large, "y", &config, i, 5, 1).unwrap();
        assert!(a > b, "x{}: n=20 {a} vs n=500 {b}", i + 1);
    }
}

#[test]
fn indices_converge_faster_than_reduction() {
    let config = MlsConfig::new(BasisSpec::LINEAR);
    let (mut totals, mut reductions) = (vec![Vec::new(); 2], vec![Vec::new(); 2]);
    for seed in 0..20 {
        let table = benchmarks::quad2d_table::<f64>(100, 100 + seed).unwrap();
        let config = config.clone().with_seed(seed);
        let model = fit_mls(&table, "y", &config).unwrap();
        let cop = cop_cross_validation(&table, "y", &config, 5, seed).unwrap().cop;
        let s = total_indices(&model, &normals(2), 2_000, seed).unwrap();
        let scaled = scaled_indices(&s.total, cop);
        for i in 0..2 {
            totals[i].push(scaled[i]);
            reductions[i].push(cop_single(&table, "y", &config, i, 5, seed).unwrap());
        }
    }
    for i in 0..2 {
        assert!(variance(&totals[i]) < variance(&reductions[i]), "x{}", i + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_is_homogeneous(
        indices in proptest::collection::vec(0.0f64..=1.0, 1..8),
        cop in 0.0f64..=1.0,
        factor in 0.0f64..=1.0,
    ) {
        let once = scaled_indices(&indices, cop);
        let scaled = scaled_indices(&indices, cop * factor);
        for (a, b) in once.iter().zip(&scaled) {
            prop_assert!((a * factor - b).abs() <= 1e-15);
        }
        let negative = scaled_indices(&indices, -cop - 0.01);
        prop_assert!(negative.iter().all(|&v| v == 0.0));
    }
}
