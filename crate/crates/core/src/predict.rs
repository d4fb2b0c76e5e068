//! Product-of-linear-terms predictors for fidelity and execution time,
//! fitted by damped Gauss-Newton, plus Pearson correlation and queue-time
//! estimation.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_benchmark, circuit_stats, standard_set, CircuitStats};
use crate::error::{Error, Result};
use crate::fleet::Machine;

/// `prediction(x) = prod_i (a_i + b_i * x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductLinearModel {
    pub terms: Vec<(f64, f64)>,
    pub feature_names: Vec<String>,
}

impl ProductLinearModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.terms.len() {
            return Err(Error::DimensionMismatch {
                expected: self.terms.len(),
                actual: x.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .zip(x)
            .map(|(&(a, b), &xi)| a + b * xi)
            .product())
    }
}

/// Dispatch point matching the operation contract; clamping for fidelity
/// use happens at the scheduler boundary, not here.
pub fn predict(model: &ProductLinearModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ProductLinearModel,
    pub train_pearson: f64,
    pub test_pearson: f64,
    pub split_seed: u64,
    pub train_fraction: f64,
}

/// On-disk model schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SavedModel {
    pub feature_names: Vec<String>,
    pub terms: Vec<(f64, f64)>,
    pub train_pearson: f64,
    pub test_pearson: f64,
    pub split_seed: u64,
}

impl From<&FitReport> for SavedModel {
    fn from(r: &FitReport) -> Self {
        SavedModel {
            feature_names: r.model.feature_names.clone(),
            terms: r.model.terms.clone(),
            train_pearson: r.train_pearson,
            test_pearson: r.test_pearson,
            split_seed: r.split_seed,
        }
    }
}

impl SavedModel {
    pub fn into_model(self) -> ProductLinearModel {
        ProductLinearModel {
            terms: self.terms,
            feature_names: self.feature_names,
        }
    }
}

pub fn save_model(path: impl AsRef<Path>, report: &FitReport) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(&SavedModel::from(report))
        .map_err(|e| Error::Parse(format!("serialize model: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact(path.display().to_string())
        } else {
            Error::io(path.display().to_string(), e)
        }
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub train_fraction: f64,
    pub split_seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            train_fraction: 0.7,
            split_seed: 7,
            max_iter: 200,
            tol: 1e-9,
        }
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid(
            "pearson input",
            format!("need two equal-length series of >= 2 points, got {} / {}", xs.len(), ys.len()),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 {
        return Err(Error::ZeroVariance("first series".into()));
    }
    if vy == 0.0 {
        return Err(Error::ZeroVariance("second series".into()));
    }
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

fn rss(samples: &[(Vec<f64>, f64)], idx: &[usize], model: &ProductLinearModel) -> f64 {
    idx.iter()
        .map(|&j| {
            let (x, y) = &samples[j];
            let r = model.predict(x).expect("dimensions fixed") - y;
            r * r
        })
        .sum()
}

/// Solves `A d = g` for a small dense symmetric system by Gaussian
/// elimination with partial pivoting. Returns None when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut g: Vec<f64>) -> Option<Vec<f64>> {
    let n = g.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        g.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            g[row] -= f * g[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = g[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Fits `prod_i (a_i + b_i x_i)` by Gauss-Newton with multiplicative step
/// damping (halve until the residual decreases, at most 20 halvings),
/// starting from `a_i = 1, b_i = 0`. Features that are constant on the
/// training split keep `b_i = 0`.
pub fn fit_product_linear(
    samples: &[(Vec<f64>, f64)],
    feature_names: &[&str],
    opts: &FitOptions,
) -> Result<FitReport> {
    let n_features = feature_names.len();
    if samples.len() < 2 * n_features {
        return Err(Error::InsufficientSamples {
            needed: 2 * n_features,
            params: 2 * n_features,
            got: samples.len(),
        });
    }
    for (x, y) in samples {
        if x.len() != n_features {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                actual: x.len(),
            });
        }
        if !y.is_finite() {
            return Err(Error::invalid("fit target", "targets must be finite"));
        }
    }
    if !(0.0..1.0).contains(&opts.train_fraction) || opts.train_fraction == 0.0 {
        return Err(Error::invalid("fit options", "train_fraction must be in (0,1)"));
    }

    // deterministic shuffled split
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.split_seed);
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let n_train = ((samples.len() as f64 * opts.train_fraction).round() as usize)
        .clamp(1, samples.len() - 1);
    let (train, test) = order.split_at(n_train);

    // features with no variance on the training split keep b = 0
    let b_free: Vec<bool> = (0..n_features)
        .map(|i| {
            let first = samples[train[0]].0[i];
            train.iter().any(|&j| samples[j].0[i] != first)
        })
        .collect();

    let mut model = ProductLinearModel {
        terms: vec![(1.0, 0.0); n_features],
        feature_names: feature_names.iter().map(|s| s.to_string()).collect(),
    };

    // free-parameter layout: (feature index, is_b)
    let layout: Vec<(usize, bool)> = (0..n_features)
        .flat_map(|i| {
            let mut v = vec![(i, false)];
            if b_free[i] {
                v.push((i, true));
            }
            v
        })
        .collect();

    let mut current_rss = rss(samples, train, &model);
    for _ in 0..opts.max_iter {
        let p = layout.len();
        let mut ata = vec![vec![0.0; p]; p];
        let mut atr = vec![0.0; p];
        for &j in train {
            let (x, y) = &samples[j];
            let terms: Vec<f64> = model
                .terms
                .iter()
                .zip(x)
                .map(|(&(a, b), &xi)| a + b * xi)
                .collect();
            let pred: f64 = terms.iter().product();
            let r = pred - y;
            let mut row = vec![0.0; p];
            for (col, &(i, is_b)) in layout.iter().enumerate() {
                let others: f64 = terms
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .map(|(_, t)| t)
                    .product();
                row[col] = if is_b { x[i] * others } else { others };
            }
            for c1 in 0..p {
                atr[c1] += row[c1] * r;
                for c2 in c1..p {
                    ata[c1][c2] += row[c1] * row[c2];
                }
            }
        }
        for c1 in 0..p {
            for c2 in 0..c1 {
                ata[c1][c2] = ata[c2][c1];
            }
        }
        // tiny ridge keeps the scale-degenerate product model solvable
        let scale = (0..p).map(|i| ata[i][i]).fold(0.0f64, f64::max).max(1.0);
        for (i, row) in ata.iter_mut().enumerate() {
            row[i] += 1e-10 * scale;
        }
        let Some(delta) = solve_dense(ata, atr.iter().map(|v| -v).collect()) else {
            break;
        };

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=20 {
            let mut trial = model.clone();
            for (col, &(i, is_b)) in layout.iter().enumerate() {
                if is_b {
                    trial.terms[i].1 += step * delta[col];
                } else {
                    trial.terms[i].0 += step * delta[col];
                }
            }
            let trial_rss = rss(samples, train, &trial);
            if trial_rss < current_rss {
                let improvement = (current_rss - trial_rss) / current_rss.max(f64::MIN_POSITIVE);
                model = trial;
                current_rss = trial_rss;
                accepted = true;
                if improvement < opts.tol {
                    return Ok(finish(model, samples, train, test, opts));
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(finish(model, samples, train, test, opts))
}

fn finish(
    model: ProductLinearModel,
    samples: &[(Vec<f64>, f64)],
    train: &[usize],
    test: &[usize],
    opts: &FitOptions,
) -> FitReport {
    let corr = |idx: &[usize]| {
        let preds: Vec<f64> = idx
            .iter()
            .map(|&j| model.predict(&samples[j].0).expect("dimensions fixed"))
            .collect();
        let ys: Vec<f64> = idx.iter().map(|&j| samples[j].1).collect();
        pearson(&preds, &ys).unwrap_or(0.0)
    };
    FitReport {
        train_pearson: corr(train),
        test_pearson: corr(test),
        model,
        split_seed: opts.split_seed,
        train_fraction: opts.train_fraction,
    }
}

/// The seven execution-time features of a job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRuntimeFeatures {
    pub batch_size: usize,
    pub shots: u64,
    pub depth: usize,
    pub width: usize,
    pub total_gates: usize,
    pub machine_size: usize,
    pub memory_slots: usize,
}

/// Circuits a machine can hold in one job submission.
pub const MEMORY_SLOT_CAP: usize = 75;

impl JobRuntimeFeatures {
    pub const NAMES: [&'static str; 7] = [
        "batch_size",
        "shots",
        "depth",
        "width",
        "total_gates",
        "machine_size",
        "memory_slots",
    ];

    pub fn new(batch_size: usize, shots: u64, stats: CircuitStats, machine_size: usize) -> Self {
        JobRuntimeFeatures {
            batch_size,
            shots,
            depth: stats.depth,
            width: stats.width,
            total_gates: stats.total_gates,
            machine_size,
            memory_slots: batch_size.min(MEMORY_SLOT_CAP),
        }
    }

    pub fn as_array(&self) -> [f64; 7] {
        [
            self.batch_size as f64,
            self.shots as f64,
            self.depth as f64,
            self.width as f64,
            self.total_gates as f64,
            self.machine_size as f64,
            self.memory_slots as f64,
        ]
    }
}

/// Predicted execution time in seconds, clamped to a positive floor.
pub fn predict_exec_time(
    model: &ProductLinearModel,
    jf: &JobRuntimeFeatures,
    floor_s: f64,
) -> Result<f64> {
    Ok(model.predict(&jf.as_array())?.max(floor_s))
}

/// `Q_M`: time left on the running job plus the predicted execution time
/// of everything queued.
pub fn estimate_queue_time(
    queue: &[JobRuntimeFeatures],
    model: &ProductLinearModel,
    remaining_current: f64,
    floor_s: f64,
) -> Result<f64> {
    let mut total = remaining_current;
    for jf in queue {
        total += predict_exec_time(model, jf, floor_s)?;
    }
    Ok(total)
}

/// Ground-truth coefficients behind the synthetic timing data:
/// `base * batch * (per_circuit + per_shot * shots)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingGenerator {
    pub base: f64,
    pub per_circuit: f64,
    pub per_shot: f64,
}

impl Default for TimingGenerator {
    fn default() -> Self {
        TimingGenerator {
            base: 1.0,
            per_circuit: 4.0,
            per_shot: 0.004,
        }
    }
}

impl TimingGenerator {
    pub fn true_exec(&self, batch_size: usize, shots: u64) -> f64 {
        self.base * batch_size as f64 * (self.per_circuit + self.per_shot * shots as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingDataSpec {
    pub jobs_per_machine: usize,
    pub batch_range: (usize, usize),
    pub shots_range: (u64, u64),
    pub noise: f64,
    pub seed: u64,
    pub generator: TimingGenerator,
}

impl Default for TimingDataSpec {
    fn default() -> Self {
        TimingDataSpec {
            jobs_per_machine: 40,
            batch_range: (1, 75),
            shots_range: (1024, 8192),
            noise: 0.05,
            seed: 11,
            generator: TimingGenerator::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub machine_id: String,
    pub features: JobRuntimeFeatures,
    pub observed: f64,
}

/// Synthetic runtime observations across the fleet: random batch/shot
/// sizes paired with a random benchmark's logical stats, observed as the
/// generator's time under multiplicative noise.
pub fn generate_timing_dataset(fleet: &[Machine], spec: &TimingDataSpec) -> Vec<TimingRow> {
    let bench_stats: Vec<CircuitStats> = standard_set()
        .into_iter()
        .map(|(b, p)| circuit_stats(&build_benchmark(b, &p).expect("standard set builds")))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(fleet.len() * spec.jobs_per_machine);
    for m in fleet {
        for _ in 0..spec.jobs_per_machine {
            let batch = rng.random_range(spec.batch_range.0..=spec.batch_range.1);
            let shots = rng.random_range(spec.shots_range.0..=spec.shots_range.1);
            let stats = bench_stats[rng.random_range(0..bench_stats.len())];
            let noise = 1.0 + spec.noise * (2.0 * rng.random::<f64>() - 1.0);
            rows.push(TimingRow {
                machine_id: m.id.clone(),
                features: JobRuntimeFeatures::new(batch, shots, stats, m.n_qubits),
                observed: spec.generator.true_exec(batch, shots) * noise,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_exact_cases() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let double: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson(&xs, &double).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
        let ys = [1.0, 3.0, 2.0, 4.0];
        assert!((pearson(&xs, &ys).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn pearson_rejects_zero_variance() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn predict_is_a_plain_product() {
        let model = ProductLinearModel {
            terms: vec![(2.0, 0.0), (3.0, 0.0)],
            feature_names: vec!["a".into(), "b".into()],
        };
        assert_eq!(model.predict(&[100.0, -5.0]).unwrap(), 6.0);
        let single = ProductLinearModel {
            terms: vec![(0.0, 1.0)],
            feature_names: vec!["x".into()],
        };
        assert!((single.predict(&[0.7]).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn predict_checks_dimensions() {
        let model = ProductLinearModel {
            terms: vec![(1.0, 0.5)],
            feature_names: vec!["x".into()],
        };
        assert!(matches!(
            model.predict(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn predict_matches_per_term_multiplication_oracle() {
        let model = ProductLinearModel {
            terms: vec![(1.1, -0.3), (0.5, 0.2), (2.0, 0.05)],
            feature_names: vec!["x0".into(), "x1".into(), "x2".into()],
        };
        let x = [0.4, 1.7, -2.2];
        let mut oracle = 1.0;
        for (i, &(a, b)) in model.terms.iter().enumerate() {
            oracle *= a + b * x[i];
        }
        assert!((model.predict(&x).unwrap() - oracle).abs() < 1e-12);
    }

    fn synth_samples(truth: &ProductLinearModel, n: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..truth.terms.len())
                    .map(|_| rng.random::<f64>() * 10.0)
                    .collect();
                let y = truth.predict(&x).unwrap();
                (x, y)
            })
            .collect()
    }

    #[test]
    fn fit_recovers_known_model() {
        let truth = ProductLinearModel {
            terms: vec![(1.0, 0.1), (0.5, -0.2)],
            feature_names: vec!["x0".into(), "x1".into()],
        };
        let samples = synth_samples(&truth, 200, 3);
        let report =
            fit_product_linear(&samples, &["x0", "x1"], &FitOptions::default()).unwrap();
        assert!(
            report.test_pearson >= 0.999,
            "test pearson {}",
            report.test_pearson
        );
    }

    #[test]
    fn fit_constant_target_has_tiny_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<(Vec<f64>, f64)> = (0..50)
            .map(|_| (vec![rng.random::<f64>(), rng.random::<f64>()], 3.5))
            .collect();
        let report = fit_product_linear(&samples, &["x0", "x1"], &FitOptions::default()).unwrap();
        for (x, y) in &samples {
            let r = report.model.predict(x).unwrap() - y;
            assert!(r.abs() < 1e-3, "residual {r}");
        }
    }

    #[test]
    fn fit_constant_feature_keeps_b_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples: Vec<(Vec<f64>, f64)> = (0..60)
            .map(|_| {
                let x1: f64 = rng.random::<f64>() * 4.0;
                (vec![2.0, x1], 3.0 * x1 + 1.0)
            })
            .collect();
        let report = fit_product_linear(&samples, &["const", "x"], &FitOptions::default()).unwrap();
        assert_eq!(report.model.terms[0].1, 0.0);
        assert!(report.test_pearson > 0.999);
    }

    #[test]
    fn fit_needs_enough_samples() {
        let samples = vec![(vec![1.0, 2.0], 1.0); 3];
        assert!(matches!(
            fit_product_linear(&samples, &["a", "b"], &FitOptions::default()),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn exec_time_floor_applies() {
        let model = ProductLinearModel {
            terms: vec![(0.0, 0.0); 7],
            feature_names: JobRuntimeFeatures::NAMES.iter().map(|s| s.to_string()).collect(),
        };
        let jf = JobRuntimeFeatures::new(1, 1024, CircuitStats { width: 2, total_gates: 3, cx_count: 1, depth: 2 }, 5);
        assert_eq!(predict_exec_time(&model, &jf, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn queue_time_is_a_plain_sum() {
        let model = ProductLinearModel {
            terms: vec![
                (0.0, 1.0),
                (1.0, 0.0),
                (1.0, 0.0),
                (1.0, 0.0),
                (1.0, 0.0),
                (1.0, 0.0),
                (1.0, 0.0),
            ],
            feature_names: JobRuntimeFeatures::NAMES.iter().map(|s| s.to_string()).collect(),
        };
        let stats = CircuitStats { width: 2, total_gates: 3, cx_count: 1, depth: 2 };
        let queue: Vec<JobRuntimeFeatures> = [10, 20, 30]
            .into_iter()
            .map(|b| JobRuntimeFeatures::new(b, 1024, stats, 5))
            .collect();
        let got = estimate_queue_time(&queue, &model, 0.0, 1.0).unwrap();
        assert_eq!(got, 60.0);
        assert_eq!(estimate_queue_time(&[], &model, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn memory_slots_cap_at_75() {
        let stats = CircuitStats { width: 2, total_gates: 3, cx_count: 1, depth: 2 };
        assert_eq!(JobRuntimeFeatures::new(200, 1024, stats, 5).memory_slots, 75);
        assert_eq!(JobRuntimeFeatures::new(10, 1024, stats, 5).memory_slots, 10);
    }

    #[test]
    fn timing_dataset_fit_reaches_high_correlation() {
        let spec = crate::fleet::FleetSpec {
            machine_count: 6,
            cycles: 1,
            ..Default::default()
        };
        let fleet = crate::fleet::generate_synthetic_fleet(&spec).unwrap();
        let rows = generate_timing_dataset(&fleet, &TimingDataSpec::default());
        let samples: Vec<(Vec<f64>, f64)> = rows
            .iter()
            .map(|r| (r.features.as_array().to_vec(), r.observed))
            .collect();
        let names: Vec<&str> = JobRuntimeFeatures::NAMES.to_vec();
        let report = fit_product_linear(&samples, &names, &FitOptions::default()).unwrap();
        assert!(report.test_pearson >= 0.95, "pearson {}", report.test_pearson);

        // batch size dominates: bigger batch, strictly longer prediction
        let stats = CircuitStats { width: 4, total_gates: 30, cx_count: 10, depth: 15 };
        let small = JobRuntimeFeatures::new(1, 4096, stats, 16);
        let large = JobRuntimeFeatures::new(75, 4096, stats, 16);
        let t_small = predict_exec_time(&report.model, &small, 1.0).unwrap();
        let t_large = predict_exec_time(&report.model, &large, 1.0).unwrap();
        assert!(t_large > t_small, "{t_large} vs {t_small}");
    }

    #[test]
    fn timing_dataset_is_deterministic() {
        let spec = crate::fleet::FleetSpec {
            machine_count: 3,
            cycles: 1,
            ..Default::default()
        };
        let fleet = crate::fleet::generate_synthetic_fleet(&spec).unwrap();
        let a = generate_timing_dataset(&fleet, &TimingDataSpec::default());
        let b = generate_timing_dataset(&fleet, &TimingDataSpec::default());
        assert_eq!(a, b);
    }

    proptest! {
        // pearson is invariant under positive affine maps and flips sign
        // under negative scaling
        #[test]
        fn pearson_affine_invariance(
            xs in proptest::collection::vec(-100.0f64..100.0, 3..20),
            scale in 0.1f64..10.0,
            shift in -50.0f64..50.0,
        ) {
            let ys: Vec<f64> = xs.iter().map(|x| x * 1.7 + 0.3).collect();
            let zs: Vec<f64> = xs.iter().map(|x| x * scale + shift).collect();
            if pearson(&xs, &ys).is_ok() && pearson(&zs, &ys).is_ok() {
                let base = pearson(&xs, &ys).unwrap();
                let affine = pearson(&zs, &ys).unwrap();
                prop_assert!((base - affine).abs() < 1e-7);
                let flipped: Vec<f64> = zs.iter().map(|z| -z).collect();
                let neg = pearson(&flipped, &ys).unwrap();
                prop_assert!((base + neg).abs() < 1e-7);
            }
        }

        // changing one feature changes exactly one factor
        #[test]
        fn predict_is_multiplicatively_separable(
            x0 in -5.0f64..5.0,
            x1 in -5.0f64..5.0,
            x1b in -5.0f64..5.0,
        ) {
            let model = ProductLinearModel {
                terms: vec![(1.2, 0.4), (0.8, -0.1)],
                feature_names: vec!["x0".into(), "x1".into()],
            };
            let f = |x1v: f64| model.predict(&[x0, x1v]).unwrap();
            let factor = |x1v: f64| 0.8 + -0.1 * x1v;
            if factor(x1).abs() > 1e-6 {
                let ratio = f(x1b) / f(x1);
                let expect = factor(x1b) / factor(x1);
                if ratio.is_finite() && expect.is_finite() {
                    prop_assert!((ratio - expect).abs() < 1e-6);
                }
            }
        }
    }
}
