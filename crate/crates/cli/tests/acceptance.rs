//! The project's exit gate: ten end-to-end checks over the library and the
//! binary, each printing one pass line with its runtime. Small-instance
//! results are compared against brute-force oracles implemented here from
//! scratch (plain double loops, Gaussian elimination).

use std::time::{Duration, Instant};

use bagreg::basis::{BasisSpec, PolyFamily};
use bagreg::moments::{Bag, BagDataset, MomentVector, NormalizationMode};
use bagreg::regression::TrainedModel;
use bagreg::spectrum::{outcome_distribution, project, spectral_decompose};
use bagreg::synthetic::{generate, ExperimentConfig, TargetFunction};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn pick(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    lo + (rng.next_u64() as usize) % (hi - lo + 1)
}

/// Dense linear solve with partial pivoting; the oracle-side inverse.
#[allow(clippy::needless_range_loop)]
fn gauss_solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut aug: Vec<Vec<f64>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(*b);
            r
        })
        .collect();
    for pivot in 0..n {
        let best = (pivot..n)
            .max_by(|&a, &b| aug[a][pivot].abs().total_cmp(&aug[b][pivot].abs()))
            .unwrap();
        aug.swap(pivot, best);
        for below in pivot + 1..n {
            let ratio = aug[below][pivot] / aug[pivot][pivot];
            for col in pivot..=n {
                aug[below][col] -= ratio * aug[pivot][col];
            }
        }
    }
    let mut out = vec![0.0; n];
    for i in (0..n).rev() {
        let mut value = aug[i][n];
        for j in i + 1..n {
            value -= aug[i][j] * out[j];
        }
        out[i] = value / aug[i][i];
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

struct Experiment {
    model: TrainedModel,
}

fn fit_target(target: TargetFunction, seed: u64, degree_count: usize) -> Experiment {
    let config = ExperimentConfig::new(target, 100, 2000, 0.1, seed);
    let dataset = generate(&config).unwrap();
    let (lo, hi) = dataset.observation_range();
    let spec = BasisSpec::covering(PolyFamily::Chebyshev, degree_count, lo, hi).unwrap();
    let model = TrainedModel::fit(&dataset, &spec, NormalizationMode::SizeNormalized).unwrap();
    Experiment { model }
}

fn rmse_on_grid(model: &TrainedModel, xs: &[f64], truth: impl Fn(f64) -> f64, rn: bool) -> f64 {
    let mut total = 0.0;
    for &x in xs {
        let m = model.point_state(x).unwrap();
        let value = if rn {
            model.predict_rn(&m).unwrap()
        } else {
            model.predict_ls(&m).unwrap()
        };
        let err = value - truth(x);
        total += err * err;
    }
    (total / xs.len() as f64).sqrt()
}

fn budget(name: &str, start: Instant, limit: Duration) {
    let elapsed = start.elapsed();
    assert!(
        elapsed < limit,
        "{name} took {elapsed:.2?}, budget {limit:.2?}"
    );
    println!("{name}: pass ({elapsed:.2?})");
}

#[test]
fn criterion_01_small_instances_match_the_brute_force_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..50 {
        let d = pick(&mut rng, 1, 3);
        let bag_count = pick(&mut rng, d.max(2), 6);
        let mode = if trial % 2 == 0 {
            NormalizationMode::RawSum
        } else {
            NormalizationMode::SizeNormalized
        };
        let spec = BasisSpec::chebyshev(d, -1.0, 1.0).unwrap();
        let bags: Vec<Bag> = (0..bag_count)
            .map(|_| {
                let n = pick(&mut rng, 1, 4);
                let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng) * 2.0 - 1.0).collect();
                Bag::new(xs, uniform(&mut rng) * 5.0 - 2.0).unwrap()
            })
            .collect();
        let dataset = BagDataset::new(bags).unwrap();
        let model = TrainedModel::fit(&dataset, &spec, mode).unwrap();

        // Oracle statistics by plain double loops.
        let mut oracle_g = vec![vec![0.0; d]; d];
        let mut oracle_yg = vec![vec![0.0; d]; d];
        let mut oracle_y = vec![0.0; d];
        let mut size_total = 0.0;
        for bag in dataset.bags() {
            let mut sums = vec![0.0; d];
            for &x in bag.observations() {
                let q = spec.evaluate(x).unwrap();
                for k in 0..d {
                    sums[k] += q[k];
                }
            }
            if mode == NormalizationMode::SizeNormalized {
                for s in &mut sums {
                    *s /= bag.observations().len() as f64;
                }
            }
            size_total += bag.observations().len() as f64;
            for q in 0..d {
                oracle_y[q] += bag.label() * sums[q];
                for r in 0..d {
                    oracle_g[q][r] += sums[q] * sums[r];
                    oracle_yg[q][r] += bag.label() * sums[q] * sums[r];
                }
            }
        }
        let g_scale = oracle_g
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
            .max(1.0);
        for q in 0..d {
            assert!(
                (model.label_projection()[q] - oracle_y[q]).abs() <= 1e-10 * g_scale,
                "trial {trial}: Y[{q}]"
            );
            for r in 0..d {
                assert!(
                    (model.gram().get(q, r) - oracle_g[q][r]).abs() <= 1e-10 * g_scale,
                    "trial {trial}: G[{q}][{r}]"
                );
                assert!(
                    (model.label_weighted_gram().get(q, r) - oracle_yg[q][r]).abs()
                        <= 1e-10 * g_scale,
                    "trial {trial}: yG[{q}][{r}]"
                );
            }
        }

        // Both estimators at point states and at random moment vectors.
        let ls_weights = gauss_solve(&oracle_g, &oracle_y);
        let mean_size = size_total / dataset.len() as f64;
        for _ in 0..5 {
            let state: Vec<f64> = if rng.next_u64() % 2 == 0 {
                let x = uniform(&mut rng) * 6.0 - 3.0;
                let q = spec.evaluate(x).unwrap();
                match mode {
                    NormalizationMode::RawSum => q.iter().map(|v| mean_size * v).collect(),
                    NormalizationMode::SizeNormalized => q,
                }
            } else {
                (0..d).map(|_| uniform(&mut rng) * 2.0 - 1.0).collect()
            };
            let m = MomentVector::new(state.clone(), spec.clone(), mode).unwrap();
            let oracle_ls = dot(&state, &ls_weights);
            let got_ls = model.predict_ls(&m).unwrap();
            assert!(
                (got_ls - oracle_ls).abs() <= 1e-10 * oracle_ls.abs().max(1.0),
                "trial {trial}: ls {got_ls} vs {oracle_ls}"
            );
            let z = gauss_solve(&oracle_g, &state);
            let oracle_rn = dot(&z, &mat_vec(&oracle_yg, &z)) / dot(&z, &state);
            let got_rn = model.predict_rn(&m).unwrap();
            assert!(
                (got_rn - oracle_rn).abs() <= 1e-10 * oracle_rn.abs().max(1.0),
                "trial {trial}: rn {got_rn} vs {oracle_rn}"
            );
        }
    }
    budget(
        "criterion 01 (small-instance oracle equivalence)",
        start,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_02_ratio_estimate_never_leaves_the_label_range() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for dataset_index in 0..20 {
        let d = pick(&mut rng, 2, 6);
        let bag_count = pick(&mut rng, d + 2, 40);
        let label_scale = 10.0f64.powi(pick(&mut rng, 0, 3) as i32 - 1);
        let bags: Vec<Bag> = (0..bag_count)
            .map(|_| {
                let n = pick(&mut rng, 1, 8);
                let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng) * 2.0 - 1.0).collect();
                let y = (uniform(&mut rng) * 8.0 - 3.0) * label_scale;
                Bag::new(xs, y).unwrap()
            })
            .collect();
        let dataset = BagDataset::new(bags).unwrap();
        let spec = BasisSpec::chebyshev(d, -1.0, 1.0).unwrap();
        let model = TrainedModel::fit(&dataset, &spec, NormalizationMode::SizeNormalized).unwrap();
        let (lo, hi) = model.label_range();
        for _ in 0..1000 {
            // Evaluation points reach 50x past the data support.
            let x = (uniform(&mut rng) * 2.0 - 1.0) * 50.0;
            let m = model.point_state(x).unwrap();
            let value = model.predict_rn(&m).unwrap();
            assert!(
                value >= lo && value <= hi,
                "dataset {dataset_index}, x = {x}: {value} not in [{lo}, {hi}]"
            );
        }
    }
    budget(
        "criterion 02 (ratio estimate range bound)",
        start,
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_03_singleton_bags_reduce_to_value_to_value_regression() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let d = 4;
    let spec = BasisSpec::chebyshev(d, -1.0, 1.0).unwrap();
    let pairs: Vec<(f64, f64)> = (0..150)
        .map(|_| {
            let x = uniform(&mut rng) * 2.0 - 1.0;
            (x, 1.0 / (1.0 + 25.0 * x * x))
        })
        .collect();
    let bags: Vec<Bag> = pairs
        .iter()
        .map(|&(x, y)| Bag::new(vec![x], y).unwrap())
        .collect();
    let dataset = BagDataset::new(bags).unwrap();
    let model = TrainedModel::fit(&dataset, &spec, NormalizationMode::SizeNormalized).unwrap();

    // Direct value-to-value construction over the (x, y) pairs.
    let mut k = vec![vec![0.0; d]; d];
    let mut yk = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for &(x, y) in &pairs {
        let q = spec.evaluate(x).unwrap();
        for i in 0..d {
            b[i] += y * q[i];
            for j in 0..d {
                k[i][j] += q[i] * q[j];
                yk[i][j] += y * q[i] * q[j];
            }
        }
    }
    let weights = gauss_solve(&k, &b);
    for &x in &grid(-0.95, 0.95, 39) {
        let q = spec.evaluate(x).unwrap();
        let direct_ls = dot(&q, &weights);
        let z = gauss_solve(&k, &q);
        let direct_rn = dot(&z, &mat_vec(&yk, &z)) / dot(&z, &q);
        let m = model.point_state(x).unwrap();
        let got_ls = model.predict_ls(&m).unwrap();
        let got_rn = model.predict_rn(&m).unwrap();
        assert!(
            (got_ls - direct_ls).abs() <= 1e-10 * direct_ls.abs().max(1.0),
            "x={x}: ls"
        );
        assert!(
            (got_rn - direct_rn).abs() <= 1e-10 * direct_rn.abs().max(1.0),
            "x={x}: rn"
        );
    }
    budget(
        "criterion 03 (singleton-bag reduction)",
        start,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_04_constant_labels_collapse_everything_to_the_constant() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let c = 0.625;
    let bags: Vec<Bag> = (0..30)
        .map(|_| {
            let n = pick(&mut rng, 1, 6);
            let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng) * 2.0 - 1.0).collect();
            Bag::new(xs, c).unwrap()
        })
        .collect();
    let dataset = BagDataset::new(bags).unwrap();
    let spec = BasisSpec::chebyshev(4, -1.0, 1.0).unwrap();
    let model = TrainedModel::fit(&dataset, &spec, NormalizationMode::SizeNormalized).unwrap();
    for _ in 0..200 {
        let m = if rng.next_u64() % 2 == 0 {
            model.point_state(uniform(&mut rng) * 10.0 - 5.0).unwrap()
        } else {
            let values: Vec<f64> = (0..4).map(|_| uniform(&mut rng) * 4.0 - 2.0).collect();
            MomentVector::new(values, spec.clone(), NormalizationMode::SizeNormalized).unwrap()
        };
        let value = model.predict_rn(&m).unwrap();
        assert!((value - c).abs() <= 1e-12 * c, "got {value}");
    }
    let spectral = spectral_decompose(&model).unwrap();
    for y in spectral.outcomes() {
        assert_eq!(*y, c);
    }
    budget(
        "criterion 04 (constant-label collapse)",
        start,
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_05_linear_experiment_is_reproduced() {
    let start = Instant::now();
    let experiment = fit_target(TargetFunction::Linear, 42, 10);
    let xs = grid(-0.9, 0.9, 181);
    let ls = rmse_on_grid(&experiment.model, &xs, |x| x, false);
    let rn = rmse_on_grid(&experiment.model, &xs, |x| x, true);
    assert!(ls < 0.05, "ls rmse {ls}");
    // The ratio estimator carries a structural floor near 0.06 here: its
    // training moments are noise-smeared while evaluation states are sharp
    // points, so the linear-case bound is wider than the least-squares one.
    assert!(rn < 0.08, "rn rmse {rn}");
    budget(
        "criterion 05 (linear experiment reproduction)",
        start,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_06_runge_and_step_experiments_behave() {
    let start = Instant::now();
    let full_grid = grid(-1.1, 1.1, 221);
    let inner_grid = grid(-0.9, 0.9, 181);
    for (target, f_min, f_max) in [
        (TargetFunction::Runge, 1.0 / 26.0, 1.0),
        (TargetFunction::Step, 0.0, 1.0),
    ] {
        let experiment = fit_target(target, 42, 10);
        for &x in &full_grid {
            let m = experiment.model.point_state(x).unwrap();
            let value = experiment.model.predict_rn(&m).unwrap();
            assert!(
                value >= f_min && value <= f_max,
                "{target} at {x}: {value}"
            );
        }
        if target == TargetFunction::Step {
            let truth = |x: f64| if x <= 0.0 { 0.0 } else { 1.0 };
            let rn = rmse_on_grid(&experiment.model, &inner_grid, truth, true);
            let ls = rmse_on_grid(&experiment.model, &inner_grid, truth, false);
            assert!(rn <= ls, "step rn {rn} vs ls {ls}");
        }
    }
    budget(
        "criterion 06 (runge and step experiments)",
        start,
        Duration::from_secs(20),
    );
}

#[test]
fn criterion_07_spectrum_identities_hold() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut models = vec![
        fit_target(TargetFunction::Runge, 11, 6).model,
        fit_target(TargetFunction::Step, 12, 5).model,
    ];
    // A rank-deficient case: one bag cannot support two basis functions.
    models.push(
        TrainedModel::fit(
            &BagDataset::new(vec![Bag::new(vec![0.2, 0.3], 1.5).unwrap()]).unwrap(),
            &BasisSpec::chebyshev(2, -1.0, 1.0).unwrap(),
            NormalizationMode::SizeNormalized,
        )
        .unwrap(),
    );
    for model in &models {
        let spectral = spectral_decompose(model).unwrap();
        let (lo, hi) = model.label_range();
        let d = model.basis().degree_count();

        // (a) Eigenvectors are orthonormal in the gram metric.
        for (i, vi) in spectral.vectors().iter().enumerate() {
            let image = model.gram().mul_vec(vi);
            for (j, vj) in spectral.vectors().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = dot(vj, &image);
                assert!((got - want).abs() < 1e-8, "orthonormality [{i}][{j}]: {got}");
            }
        }

        // (d) Every outcome lies in the observed label range.
        for y in spectral.outcomes() {
            assert!(*y >= lo && *y <= hi);
        }

        // (b) Total weight equals the state's self-projection, and
        // (c) the distribution mean equals the ratio estimate.
        for _ in 0..100 {
            let m = if rng.next_u64() % 2 == 0 {
                model.point_state(uniform(&mut rng) * 4.0 - 2.0).unwrap()
            } else {
                let values: Vec<f64> = (0..d).map(|_| uniform(&mut rng) * 2.0 - 1.0).collect();
                MomentVector::new(values, model.basis().clone(), model.mode()).unwrap()
            };
            let dist = match outcome_distribution(&spectral, &m) {
                Ok(dist) => dist,
                // A random vector can fall outside a truncated model's span.
                Err(_) => continue,
            };
            let self_projection = project(model, &m, &m).unwrap();
            assert!(
                (dist.total_weight - self_projection).abs() <= 1e-8 * self_projection.abs(),
                "total weight {} vs self projection {}",
                dist.total_weight,
                self_projection
            );
            let rn = model.predict_rn(&m).unwrap();
            assert!(
                (dist.mean() - rn).abs() <= 1e-8 * rn.abs().max(1e-300),
                "mean {} vs rn {}",
                dist.mean(),
                rn
            );
        }
    }
    budget(
        "criterion 07 (spectrum identities)",
        start,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_08_highest_probability_tracks_the_nearest_outcome() {
    let start = Instant::now();
    let experiment = fit_target(TargetFunction::Linear, 42, 10);
    let spectral = spectral_decompose(&experiment.model).unwrap();
    let points = grid(-1.0, 1.0, 201);
    let mut hits = 0;
    for &x in &points {
        let m = experiment.model.point_state(x).unwrap();
        let dist = outcome_distribution(&spectral, &m).unwrap();
        let most_probable = (0..dist.probabilities.len())
            .max_by(|&a, &b| dist.probabilities[a].total_cmp(&dist.probabilities[b]))
            .unwrap();
        let nearest = (0..dist.outcomes.len())
            .min_by(|&a, &b| {
                (dist.outcomes[a] - x)
                    .abs()
                    .total_cmp(&(dist.outcomes[b] - x).abs())
            })
            .unwrap();
        if most_probable == nearest {
            hits += 1;
        }
    }
    let rate = hits as f64 / points.len() as f64;
    assert!(rate >= 0.85, "hit rate {rate}");
    budget(
        "criterion 08 (probability map reproduction)",
        start,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_09_mode_and_scale_invariances() {
    let start = Instant::now();
    // Equal bag sizes: raw and size-normalized fits predict identically.
    let config = ExperimentConfig::new(TargetFunction::Runge, 4, 250, 0.2, 99);
    let dataset = generate(&config).unwrap();
    let (lo, hi) = dataset.observation_range();
    let spec = BasisSpec::covering(PolyFamily::Chebyshev, 6, lo, hi).unwrap();
    let raw = TrainedModel::fit(&dataset, &spec, NormalizationMode::RawSum).unwrap();
    let norm = TrainedModel::fit(&dataset, &spec, NormalizationMode::SizeNormalized).unwrap();
    for &x in &grid(-1.1, 1.1, 89) {
        let mr = raw.point_state(x).unwrap();
        let mn = norm.point_state(x).unwrap();
        let ls_r = raw.predict_ls(&mr).unwrap();
        let ls_n = norm.predict_ls(&mn).unwrap();
        assert!((ls_r - ls_n).abs() <= 1e-10 * ls_n.abs().max(1.0));
        let rn_r = raw.predict_rn(&mr).unwrap();
        let rn_n = norm.predict_rn(&mn).unwrap();
        assert!((rn_r - rn_n).abs() <= 1e-10 * rn_n.abs().max(1.0));
    }

    // Scaling a state leaves its probabilities untouched: bit-exact when
    // the scaled components round to nothing (sign flips, powers of two),
    // near machine level for every other factor.
    let spectral = spectral_decompose(&norm).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for _ in 0..50 {
        let m = norm.point_state(uniform(&mut rng) * 2.4 - 1.2).unwrap();
        let base = outcome_distribution(&spectral, &m).unwrap();
        for c in [-1.0, 2.0, -0.25, 1024.0, 1.0 / 65536.0] {
            let scaled: Vec<f64> = m.values().iter().map(|v| c * v).collect();
            let sm = MomentVector::new(scaled, spec.clone(), norm.mode()).unwrap();
            let dist = outcome_distribution(&spectral, &sm).unwrap();
            for (a, b) in dist.probabilities.iter().zip(&base.probabilities) {
                assert_eq!(a.to_bits(), b.to_bits(), "factor {c}");
            }
        }
        for c in [3.0, -0.7, 1.7e6, 5.3e-8] {
            let scaled: Vec<f64> = m.values().iter().map(|v| c * v).collect();
            let sm = MomentVector::new(scaled, spec.clone(), norm.mode()).unwrap();
            let dist = outcome_distribution(&spectral, &sm).unwrap();
            for (a, b) in dist.probabilities.iter().zip(&base.probabilities) {
                // Scaling rounds each component once; that noise reaches a
                // probability through its square root (p = projection^2),
                // so the agreement bound scales with sqrt(P).
                assert!(
                    (a - b).abs() <= 1e-14 * b.max(1e-30).sqrt(),
                    "factor {c}: {a} vs {b}"
                );
            }
        }
    }
    budget(
        "criterion 09 (mode and scale invariances)",
        start,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_10_round_trips_and_reruns_are_faithful() {
    let start = Instant::now();

    // Model file round trip preserves predictions.
    let dir = tempfile::tempdir().unwrap();
    let experiment = fit_target(TargetFunction::Runge, 23, 6);
    let model_path = dir.path().join("model.txt");
    bagreg::io::save_model(&experiment.model, &model_path).unwrap();
    let reloaded = bagreg::io::load_model(&model_path).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for _ in 0..200 {
        let x = uniform(&mut rng) * 2.4 - 1.2;
        let m = experiment.model.point_state(x).unwrap();
        let a = experiment.model.predict_rn(&m).unwrap();
        let b = reloaded.predict_rn(&m).unwrap();
        assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
        let a = experiment.model.predict_ls(&m).unwrap();
        let b = reloaded.predict_ls(&m).unwrap();
        assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
    }

    // Dataset file round trip preserves the accumulated statistics bit for
    // bit.
    let config = ExperimentConfig::new(TargetFunction::Step, 7, 120, 0.25, 31);
    let dataset = generate(&config).unwrap();
    let data_path = dir.path().join("bags.jsonl");
    bagreg::io::save_dataset(&dataset, &data_path).unwrap();
    let back = bagreg::io::load_dataset(&data_path).unwrap();
    let (lo, hi) = dataset.observation_range();
    let spec = BasisSpec::covering(PolyFamily::Chebyshev, 5, lo, hi).unwrap();
    let a = TrainedModel::fit(&dataset, &spec, NormalizationMode::RawSum).unwrap();
    let b = TrainedModel::fit(&back, &spec, NormalizationMode::RawSum).unwrap();
    for i in 0..5 {
        assert_eq!(
            a.label_projection()[i].to_bits(),
            b.label_projection()[i].to_bits()
        );
        for j in 0..5 {
            assert_eq!(a.gram().get(i, j).to_bits(), b.gram().get(i, j).to_bits());
            assert_eq!(
                a.label_weighted_gram().get(i, j).to_bits(),
                b.label_weighted_gram().get(i, j).to_bits()
            );
        }
    }

    // Two identical command sequences through the binary produce
    // byte-identical files.
    let binary = env!("CARGO_BIN_EXE_bagreg");
    let run = |tag: &str| -> Vec<(String, Vec<u8>)> {
        let base = dir.path().join(tag);
        std::fs::create_dir_all(&base).unwrap();
        let path = |name: &str| base.join(name).to_str().unwrap().to_string();
        let steps: Vec<Vec<String>> = vec![
            vec![
                "gen".into(),
                "--target".into(),
                "runge".into(),
                "--N".into(),
                "20".into(),
                "--M".into(),
                "200".into(),
                "--R".into(),
                "0.1".into(),
                "--seed".into(),
                "5".into(),
                "--out".into(),
                path("d.jsonl"),
            ],
            vec![
                "fit".into(),
                "--in".into(),
                path("d.jsonl"),
                "--dx".into(),
                "6".into(),
                "--out-model".into(),
                path("m.txt"),
            ],
            vec![
                "predict".into(),
                "--model".into(),
                path("m.txt"),
                "--out".into(),
                path("p.csv"),
            ],
            vec![
                "spectrum".into(),
                "--model".into(),
                path("m.txt"),
                "--out-outcomes".into(),
                path("o.csv"),
                "--out-probabilities".into(),
                path("pr.csv"),
            ],
            vec![
                "eval".into(),
                "--model".into(),
                path("m.txt"),
                "--data".into(),
                path("d.jsonl"),
                "--estimator".into(),
                "rn".into(),
                "--out".into(),
                path("r.txt"),
            ],
        ];
        for step in steps {
            let status = std::process::Command::new(binary)
                .args(&step)
                .status()
                .unwrap();
            assert!(status.success(), "step {step:?} failed");
        }
        ["d.jsonl", "m.txt", "p.csv", "o.csv", "pr.csv", "r.txt"]
            .iter()
            .map(|name| (name.to_string(), std::fs::read(base.join(name)).unwrap()))
            .collect()
    };
    let first = run("first");
    let second = run("second");
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    budget(
        "criterion 10 (round trips and reruns)",
        start,
        Duration::from_secs(30),
    );
}
