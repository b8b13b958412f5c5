//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.
//!
//! The experiment-backed criteria share one fixture: a 20-series synthetic
//! suite (AR(2) regimes + seasonality, fixed seeds) run twice into separate
//! output directories.

use std::sync::OnceLock;
use std::time::Instant;

use fcomb_cli::config::{default_student_spec, ExperimentConfig};
use fcomb_cli::experiment::{leakage_guard, load_records, run_experiment, ResultRecord};
use fcomb_cli::labels;
use fcomb_cli::synth::{generate_suite, write_corpus, SynthOptions};
use fcomb_core::combiners::{project_simplex, Combiner, CombinerConfig, CombinerKind, WarmupData};
use fcomb_core::compression::{distill, fidelity, TeachingSet, TeachingStrategy};
use fcomb_core::evaluation::{average_ranks, bayes_sign_test};
use fcomb_core::learners::{predict_row, train_portfolio, LearnerKind, LearnerSpec, ModelParams};
use fcomb_core::rng::seeded_rng;
use fcomb_core::series::{embed, EmbeddedDataset, IndexRange};
use fcomb_core::TimeSeries;
use rand::Rng;

struct Fixture {
    _dir: tempfile::TempDir,
    config: ExperimentConfig,
    records: Vec<ResultRecord>,
    suite: Vec<TimeSeries>,
    run_seconds: f64,
    scores_a: String,
    scores_b: String,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let corpus = dir.path().join("corpus");
        let suite = generate_suite(&SynthOptions {
            n_series: 20,
            length: 600,
            seed: 7,
        });
        write_corpus(&corpus, &suite).expect("corpus");

        let mut config = ExperimentConfig::default();
        config.corpus_path = corpus;
        config.output_dir = dir.path().join("run_a");
        config.min_series_length = 100;
        config.repetitions = 1;
        config.seed = 11;
        config.students = vec![default_student_spec()];
        config.teaching_strategies = vec![
            TeachingStrategy::Resubstitution,
            TeachingStrategy::PrequentialOob,
        ];

        let start = Instant::now();
        let summary = run_experiment(&config).expect("acceptance run A");
        let run_seconds = start.elapsed().as_secs_f64();
        assert!(
            summary.quarantined.is_empty(),
            "acceptance run quarantined records: {:?}",
            summary.quarantined
        );

        let mut config_b = config.clone();
        config_b.output_dir = dir.path().join("run_b");
        run_experiment(&config_b).expect("acceptance run B");

        let scores_a =
            std::fs::read_to_string(config.output_dir.join("scores.csv")).expect("scores A");
        let scores_b =
            std::fs::read_to_string(config_b.output_dir.join("scores.csv")).expect("scores B");
        let records = load_records(&config.output_dir).expect("records");
        Fixture {
            _dir: dir,
            config,
            records,
            suite,
            run_seconds,
            scores_a,
            scores_b,
        }
    })
}

fn fast_meta_spec() -> LearnerSpec {
    LearnerSpec::new("meta_ridge", LearnerKind::Ridge { penalty: 1e-3 }).unwrap()
}

fn combiner_config(kind: CombinerKind) -> CombinerConfig {
    let mut config = CombinerConfig::new(kind);
    config.meta_spec = fast_meta_spec();
    config
}

fn random_warmup(rng: &mut impl Rng, m: usize, rows: usize) -> WarmupData {
    let features: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let expert_preds: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let targets: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
    WarmupData {
        features,
        expert_preds,
        targets,
    }
}

fn per_series_score(
    records: &[ResultRecord],
    method: &str,
) -> std::collections::BTreeMap<String, f64> {
    // One repetition per series in the fixture config.
    records
        .iter()
        .filter(|r| r.method == method)
        .map(|r| (r.series.clone(), r.mase))
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

/// Criterion 1: every convex combiner keeps its weights on the simplex over
/// 1,000 randomized 200-step streams with m in {2, 5, 30}. Runtime < 30 s.
#[test]
fn criterion_01_simplex_suite() {
    let start = Instant::now();
    let convex: Vec<CombinerKind> = CombinerKind::ALL
        .into_iter()
        .filter(|k| k.is_convex())
        .collect();
    assert_eq!(convex.len(), 11);
    let mut rng = seeded_rng(101);
    let mut checked = 0u64;
    for stream in 0..1000 {
        let m = [2usize, 5, 30][stream % 3];
        let warmup = random_warmup(&mut rng, m, 12);
        let steps: Vec<(Vec<f64>, f64)> = (0..200)
            .map(|_| {
                let preds: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
                (preds, rng.random_range(-5.0..5.0))
            })
            .collect();
        for &kind in &convex {
            let mut state = if kind.requires_warmup() {
                Combiner::warmed(combiner_config(kind), m, &warmup).unwrap()
            } else {
                Combiner::new(combiner_config(kind), m).unwrap()
            };
            for (preds, actual) in &steps {
                state.update(preds, *actual).unwrap();
                let weights = state.weights();
                let sum: f64 = weights.iter().sum();
                assert!(
                    weights.iter().all(|&w| w >= -1e-12),
                    "{kind} stream {stream}: negative weight {weights:?}"
                );
                assert!(
                    (sum - 1.0).abs() <= 1e-9,
                    "{kind} stream {stream}: weight sum {sum}"
                );
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 30.0,
        "simplex suite took {elapsed:.1} s (budget 30 s)"
    );
    println!(
        "ACCEPTANCE 01 simplex-suite: PASS — {checked} weight vectors on the simplex across 1000 streams x 11 convex rules in {elapsed:.1} s"
    );
}

/// Criterion 2: FS(alpha=0) equals EWA elementwise; online Ridge equals a
/// from-scratch batch solve at every step; simplex projection matches a
/// grid-search oracle.
#[test]
fn criterion_02_aggregation_rule_oracles() {
    // FS(alpha = 0) == EWA, elementwise within 1e-12.
    let mut rng = seeded_rng(202);
    for _ in 0..10 {
        let m = 7;
        let mut ewa = Combiner::new(combiner_config(CombinerKind::Ewa), m).unwrap();
        let mut fs_config = combiner_config(CombinerKind::Fs);
        fs_config.alpha = 0.0;
        let mut fs = Combiner::new(fs_config, m).unwrap();
        for _ in 0..200 {
            let preds: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: f64 = rng.random_range(-2.0..2.0);
            ewa.update(&preds, y).unwrap();
            fs.update(&preds, y).unwrap();
            for (a, b) in ewa.weights().iter().zip(fs.weights()) {
                assert!(
                    (a - b).abs() <= 1e-12,
                    "FS(0) diverged from EWA: {a} vs {b}"
                );
            }
        }
    }

    // Online Ridge == batch normal equations re-solved from scratch with a
    // hand-rolled Gauss-Jordan elimination, at every t.
    fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            let diag = a[col][col];
            for j in col..n {
                a[col][j] /= diag;
            }
            b[col] /= diag;
            for row in 0..n {
                if row != col {
                    let factor = a[row][col];
                    for j in col..n {
                        a[row][j] -= factor * a[col][j];
                    }
                    b[row] -= factor * b[col];
                }
            }
        }
        b
    }
    let m = 5;
    let penalty = 0.7;
    let mut config = combiner_config(CombinerKind::Ridge);
    config.ridge_penalty = penalty;
    let mut state = Combiner::new(config, m).unwrap();
    let mut history: Vec<(Vec<f64>, f64)> = Vec::new();
    for _ in 0..80 {
        let preds: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: f64 = rng.random_range(-2.0..2.0);
        state.update(&preds, y).unwrap();
        history.push((preds, y));
        let mut gram = vec![vec![0.0; m]; m];
        let mut cross = vec![0.0; m];
        for (h, y) in &history {
            for i in 0..m {
                cross[i] += y * h[i];
                for j in 0..m {
                    gram[i][j] += h[i] * h[j];
                }
            }
        }
        for (i, row) in gram.iter_mut().enumerate() {
            row[i] += penalty;
        }
        let batch = gauss_solve(gram, cross);
        for (online, oracle) in state.weights().iter().zip(&batch) {
            assert!(
                (online - oracle).abs() <= 1e-6,
                "online ridge {online} vs batch {oracle} at t={}",
                history.len()
            );
        }
    }

    // Simplex projection vs a grid-search oracle on 100 random 3-vectors:
    // objective values agree within 1e-4 (the grid step bounds the oracle's
    // own resolution).
    let objective =
        |w: &[f64], v: &[f64]| -> f64 { w.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum() };
    for case in 0..100 {
        let v: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let proj = project_simplex(&v);
        assert!(proj.iter().all(|&w| w >= -1e-12));
        assert!((proj.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let mut best = f64::INFINITY;
        let steps = 400; // grid step 0.0025
        for i in 0..=steps {
            let w1 = i as f64 / steps as f64;
            for j in 0..=(steps - i) {
                let w2 = j as f64 / steps as f64;
                let w3 = 1.0 - w1 - w2;
                let candidate = objective(&[w1, w2, w3], &v);
                if candidate < best {
                    best = candidate;
                }
            }
        }
        let got = objective(&proj, &v);
        assert!(
            got <= best + 1e-12,
            "case {case}: projection objective {got} worse than grid {best}"
        );
        assert!(
            (got - best).abs() <= 1e-4,
            "case {case}: projection {got} vs grid oracle {best}"
        );
    }
    println!("ACCEPTANCE 02 aggregation-oracles: PASS — FS(0)=EWA <=1e-12; online Ridge = batch <=1e-6 at every step; projection matches grid oracle <=1e-4 on 100 vectors");
}

/// Criterion 3: the EWA regret bound holds on 50/50 random bounded-loss
/// streams (T=1000, m=10, eta = sqrt(8 ln m / T)). Runtime < 10 s.
#[test]
fn criterion_03_ewa_regret_bound() {
    let start = Instant::now();
    let t_steps = 1000usize;
    let m = 10usize;
    let eta = (8.0 * (m as f64).ln() / t_steps as f64).sqrt();
    let bound_slack = (t_steps as f64 / 2.0 * (m as f64).ln()).sqrt();
    let mut holds = 0;
    for stream in 0..50 {
        let mut rng = seeded_rng(3000 + stream);
        let mut config = combiner_config(CombinerKind::Ewa);
        config.eta = eta;
        let mut state = Combiner::new(config, m).unwrap();
        let mut ewa_loss = 0.0;
        let mut expert_loss = vec![0.0f64; m];
        for _ in 0..t_steps {
            // Predictions and outcomes in [0,1] keep squared losses in [0,1].
            let preds: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
            let y: f64 = rng.random_range(0.0..1.0);
            let combined = state.combine(&preds, None).unwrap();
            ewa_loss += (combined - y) * (combined - y);
            for (acc, p) in expert_loss.iter_mut().zip(&preds) {
                *acc += (p - y) * (p - y);
            }
            state.update(&preds, y).unwrap();
        }
        let best = expert_loss.iter().copied().fold(f64::INFINITY, f64::min);
        if ewa_loss <= best + bound_slack {
            holds += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(
        holds, 50,
        "EWA regret bound held on only {holds}/50 streams"
    );
    assert!(
        elapsed < 10.0,
        "regret suite took {elapsed:.1} s (budget 10 s)"
    );
    println!(
        "ACCEPTANCE 03 ewa-regret: PASS — bound held on {holds}/50 streams (slack {bound_slack:.2}) in {elapsed:.1} s"
    );
}

/// Criterion 4: ridge experts + Ridge combiner distilled into a ridge
/// student reproduce the analytically composed linear map within 1e-6 on
/// the training rows.
#[test]
fn criterion_04_distillation_fidelity() {
    let mut rng = seeded_rng(404);
    let n = 150;
    let p = 4;
    let features: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let targets: Vec<f64> = features
        .iter()
        .map(|r: &Vec<f64>| {
            1.5 * r[0] - 2.0 * r[1] + 0.5 * r[2] + 3.0 + rng.random_range(-0.2..0.2)
        })
        .collect();
    let data = EmbeddedDataset {
        features: features.clone(),
        targets: targets.clone(),
        lag_order: p,
    };
    let specs: Vec<LearnerSpec> = [0.0, 0.1, 1.0, 10.0, 100.0]
        .into_iter()
        .enumerate()
        .map(|(i, penalty)| {
            LearnerSpec::new(format!("ridge_{i}"), LearnerKind::Ridge { penalty }).unwrap()
        })
        .collect();
    let portfolio = train_portfolio(&specs, &data).unwrap();
    let expert_preds = portfolio.predict_matrix(&features).unwrap();

    // Warm the Ridge combiner on the expert predictions: its weights become
    // the penalized least-squares solution and stay frozen during target
    // generation (combine only, no updates).
    let mut config = combiner_config(CombinerKind::Ridge);
    config.ridge_penalty = 0.5;
    let state = Combiner::warmed(
        config,
        specs.len(),
        &WarmupData {
            features: features.clone(),
            expert_preds: expert_preds.clone(),
            targets: targets.clone(),
        },
    )
    .unwrap();
    let combiner_weights = state.weights();
    let teacher_targets: Vec<f64> = expert_preds
        .iter()
        .map(|row| state.combine(row, None).unwrap())
        .collect();

    // Oracle: compose the expert coefficient matrices with the combiner
    // weights.
    let mut composed_w = vec![0.0; p];
    let mut composed_c = 0.0;
    for (model, w) in portfolio.models.iter().zip(&combiner_weights) {
        let ModelParams::Linear { weights, intercept } = &model.params else {
            panic!("ridge experts are linear");
        };
        for (acc, coef) in composed_w.iter_mut().zip(weights) {
            *acc += w * coef;
        }
        composed_c += w * intercept;
    }

    let teaching = TeachingSet {
        features: features.clone(),
        teacher_targets: teacher_targets.clone(),
        strategy: TeachingStrategy::Resubstitution,
        teacher_id: "Ridge".into(),
    };
    let student_spec = LearnerSpec::new("student", LearnerKind::Ridge { penalty: 0.0 }).unwrap();
    let distilled = distill(&student_spec, &teaching).unwrap();

    let mut max_err = 0.0f64;
    for row in &features {
        let oracle: f64 = composed_w.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + composed_c;
        let got = predict_row(&distilled.student, row).unwrap();
        max_err = max_err.max((got - oracle).abs());
    }
    assert!(
        max_err <= 1e-6,
        "composite-map discrepancy {max_err} exceeds 1e-6"
    );
    let (_, fid_max) = fidelity(&distilled, &teacher_targets, &features).unwrap();
    assert!(fid_max <= 1e-6, "fidelity max_abs {fid_max}");
    println!(
        "ACCEPTANCE 04 distillation-fidelity: PASS — max training-row discrepancy {max_err:.2e} vs composed linear map (tolerance 1e-6)"
    );
}

/// Criterion 5: with n_rows=1000 and protocol defaults (p=15, lambda=50,
/// 60%/10%, 10 cut points) the harness produces train=600/test=100 with
/// zero leakage per the guard.
#[test]
fn criterion_05_evaluation_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    // Length 1015 embeds to exactly 1000 rows at p=15.
    let suite = generate_suite(&SynthOptions {
        n_series: 1,
        length: 1015,
        seed: 9,
    });
    write_corpus(&corpus, &suite).unwrap();

    let mut config = ExperimentConfig::default();
    config.corpus_path = corpus;
    config.output_dir = dir.path().join("out");
    config.min_series_length = 1000;
    config.combiners = vec!["Simple".into()];
    config.students = Vec::new();
    config.portfolio = Some(vec![
        LearnerSpec::new("r_soft", LearnerKind::Ridge { penalty: 0.1 }).unwrap(),
        LearnerSpec::new("r_hard", LearnerKind::Ridge { penalty: 10.0 }).unwrap(),
        LearnerSpec::new("knn5", LearnerKind::Knn { k: 5 }).unwrap(),
        LearnerSpec::new(
            "tree8",
            LearnerKind::RegressionTree {
                max_depth: 8,
                min_leaf: 5,
            },
        )
        .unwrap(),
    ]);
    assert_eq!(config.lag_order, 15);
    assert_eq!(config.lambda_window, 50);
    assert_eq!(config.repetitions, 10);

    let summary = run_experiment(&config).unwrap();
    assert!(summary.quarantined.is_empty());
    let embedded = embed(&suite[0], config.lag_order).unwrap();
    assert_eq!(embedded.n_rows(), 1000);

    let mut reps_seen = std::collections::BTreeSet::new();
    for record in &summary.records {
        let (ts, te) = record.train_range;
        let (vs, ve) = record.test_range;
        assert_eq!(te - ts, 600, "train length for {}", record.method);
        assert_eq!(ve - vs, 100, "test length for {}", record.method);
        // Independent re-check of the guard on every record.
        leakage_guard(record, &embedded).unwrap();
        reps_seen.insert(record.repetition);
    }
    assert_eq!(reps_seen.len(), 10, "expected 10 repetitions");
    println!(
        "ACCEPTANCE 05 protocol-fidelity: PASS — {} records over 10 repetitions, train=600/test=100, leakage guard green",
        summary.records.len()
    );
}

/// Criterion 6: Bayes sign test behaviour on the all-in-ROPE and symmetric
/// inputs, cross-checked against an independent Dirichlet sampler.
/// Runtime < 5 s.
#[test]
fn criterion_06_bayes_sign_test() {
    let start = Instant::now();

    // All 90 diffs inside the ROPE.
    let in_rope: Vec<f64> = (0..90).map(|i| ((i as f64) * 0.7).sin() * 0.9).collect();
    let rope_result = bayes_sign_test(&in_rope, (-1.0, 1.0), 100_000, 1.0, 61).unwrap();
    assert!(
        rope_result.p_rope > 0.99,
        "p_rope {} should exceed 0.99",
        rope_result.p_rope
    );

    // Perfectly symmetric: 30 at -5, 30 at +5, 30 at 0.
    let mut symmetric = vec![-5.0; 30];
    symmetric.extend(vec![5.0; 30]);
    symmetric.extend(vec![0.0; 30]);
    let sym = bayes_sign_test(&symmetric, (-1.0, 1.0), 100_000, 1.0, 62).unwrap();
    assert!(
        (sym.p_win - sym.p_lose).abs() < 0.02,
        "p_win {} and p_lose {} should agree within 0.02",
        sym.p_win,
        sym.p_lose
    );

    // Independent oracle: Dirichlet sampling via sums of -ln(U) (integer
    // shapes) on a SplitMix64 generator, entirely separate from the
    // implementation's sampler.
    struct SplitMix64(u64);
    impl SplitMix64 {
        fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^ (z >> 31)
        }
        fn uniform(&mut self) -> f64 {
            (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
        }
        fn gamma_int(&mut self, shape: usize) -> f64 {
            -(0..shape)
                .map(|_| self.uniform().max(f64::MIN_POSITIVE).ln())
                .sum::<f64>()
        }
    }
    let mut oracle_rng = SplitMix64(0x1234_5678_9ABC_DEF0);
    let alphas = [30usize, 31, 30]; // win, rope + prior, lose
    let mut hits = [0usize; 3];
    let oracle_samples = 100_000;
    for _ in 0..oracle_samples {
        let draw = [
            oracle_rng.gamma_int(alphas[0]),
            oracle_rng.gamma_int(alphas[1]),
            oracle_rng.gamma_int(alphas[2]),
        ];
        let mut best = 0;
        for i in 1..3 {
            if draw[i] > draw[best] {
                best = i;
            }
        }
        hits[best] += 1;
    }
    let oracle = [
        hits[0] as f64 / oracle_samples as f64,
        hits[1] as f64 / oracle_samples as f64,
        hits[2] as f64 / oracle_samples as f64,
    ];
    for (got, want) in [sym.p_win, sym.p_rope, sym.p_lose].iter().zip(oracle) {
        assert!(
            (got - want).abs() < 0.01,
            "implementation {got} vs oracle {want}"
        );
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 5.0,
        "bayes suite took {elapsed:.1} s (budget 5 s)"
    );
    println!(
        "ACCEPTANCE 06 bayes-sign-test: PASS — p_rope {:.4} > 0.99; |p_win - p_lose| = {:.4} < 0.02; oracle agreement within 0.01; {elapsed:.1} s",
        rope_result.p_rope,
        (sym.p_win - sym.p_lose).abs()
    );
}

/// Criterion 7: on the 20-series suite, the resubstitution-taught model-tree
/// student (Simple teacher) has median MASE <= the OOB-taught student's.
/// Runtime budget 10 min covers the shared fixture run.
#[test]
fn criterion_07_teaching_data_shape() {
    let fx = fixture();
    assert!(
        fx.run_seconds < 600.0,
        "fixture run took {:.0} s (budget 600 s)",
        fx.run_seconds
    );
    let student = &fx.config.students[0].id;
    let resub_label = labels::student_label("Simple", student, TeachingStrategy::Resubstitution);
    let oob_label = labels::student_label("Simple", student, TeachingStrategy::PrequentialOob);
    let resub = per_series_score(&fx.records, &resub_label);
    let oob = per_series_score(&fx.records, &oob_label);
    assert_eq!(resub.len(), 20);
    assert_eq!(oob.len(), 20);
    let mut resub_scores: Vec<f64> = resub.values().copied().collect();
    let mut oob_scores: Vec<f64> = oob.values().copied().collect();
    let resub_median = median(&mut resub_scores);
    let oob_median = median(&mut oob_scores);
    assert!(
        resub_median <= oob_median,
        "resubstitution median {resub_median} should not exceed OOB median {oob_median}"
    );
    println!(
        "ACCEPTANCE 07 teaching-data: PASS — resubstitution median MASE {resub_median:.4} <= OOB median {oob_median:.4} (Simple teacher, model-tree student, 20 series; fixture run {:.0} s)",
        fx.run_seconds
    );
}

/// Criterion 8: the model-tree student distilled from Simple predicts in
/// <= 25% of the 30-member ensemble's wall time and occupies <= 10% of the
/// summed portfolio size (medians across the suite).
#[test]
fn criterion_08_cost_shape() {
    let fx = fixture();
    let student_label = labels::student_label(
        "Simple",
        &fx.config.students[0].id,
        TeachingStrategy::Resubstitution,
    );
    let specs = fx.config.portfolio_specs();
    assert_eq!(specs.len(), 30, "portfolio must have 30 members");

    let by_cell: std::collections::BTreeMap<(String, String), &ResultRecord> = fx
        .records
        .iter()
        .map(|r| ((r.method.clone(), r.series.clone()), r))
        .collect();

    let mut time_ratios = Vec::new();
    let mut size_ratios = Vec::new();
    for series in &fx.suite {
        let teacher = by_cell
            .get(&("Simple".to_string(), series.id.clone()))
            .expect("teacher record");
        let student = by_cell
            .get(&(student_label.clone(), series.id.clone()))
            .expect("student record");
        time_ratios.push(student.cost.predict_seconds / teacher.cost.predict_seconds);

        // The criterion's denominator is the summed portfolio size, not the
        // ensemble profile (which also counts combiner state): refit the
        // portfolio on the recorded training slice and measure it directly.
        let embedded = embed(series, fx.config.lag_order).unwrap();
        let train = embedded.slice(IndexRange::new(
            teacher.train_range.0,
            teacher.train_range.1,
        ));
        let portfolio = train_portfolio(&specs, &train).unwrap();
        let portfolio_bytes = portfolio.total_size_bytes().unwrap();
        size_ratios.push(student.cost.size_bytes as f64 / portfolio_bytes as f64);
    }
    let time_median = median(&mut time_ratios);
    let size_median = median(&mut size_ratios);
    assert!(
        time_median <= 0.25,
        "student/ensemble time ratio median {time_median} exceeds 25%"
    );
    assert!(
        size_median <= 0.10,
        "student/portfolio size ratio median {size_median} exceeds 10%"
    );
    println!(
        "ACCEPTANCE 08 cost-shape: PASS — median time ratio {time_median:.5} <= 0.25; median size ratio {size_median:.5} <= 0.10 (max time {:.5}, max size {:.5})",
        time_ratios.iter().copied().fold(0.0f64, f64::max),
        size_ratios.iter().copied().fold(0.0f64, f64::max),
    );
}

/// Criterion 9 (directional): (a) each distilled student within 15% of its
/// teacher's MASE on >= 70% of series; (b) the Stacking-taught model tree
/// ranks no worse than the raw-target model tree. A directional failure is
/// reported for investigation, not asserted.
#[test]
fn criterion_09_q1_q2_shape() {
    let fx = fixture();
    let student = &fx.config.students[0].id;
    let n_series = fx.suite.len();
    let mut all_pass = true;
    let mut details = Vec::new();
    for kind in fx.config.combiner_kinds() {
        let teacher_scores = per_series_score(&fx.records, kind.label());
        let student_scores = per_series_score(
            &fx.records,
            &labels::student_label(kind.label(), student, TeachingStrategy::Resubstitution),
        );
        let within = teacher_scores
            .iter()
            .filter(|(series, teacher_mase)| student_scores[*series] <= 1.15 * **teacher_mase)
            .count();
        let ok = within * 10 >= n_series * 7;
        all_pass &= ok;
        details.push(format!(
            "{}:{}/{}{}",
            kind.label(),
            within,
            n_series,
            if ok { "" } else { "(FAIL)" }
        ));
    }

    let matrix = fcomb_cli::experiment::score_matrix(&fx.records).unwrap();
    let ranks = average_ranks(&matrix, None).unwrap();
    let rank_of = |method: &str| {
        ranks
            .iter()
            .find(|r| r.method == method)
            .map(|r| r.mean_rank)
            .expect("method ranked")
    };
    let st_stacking = rank_of(&labels::student_label(
        "Stacking",
        student,
        TeachingStrategy::Resubstitution,
    ));
    let raw = rank_of(student);
    let rank_ok = st_stacking <= raw;
    all_pass &= rank_ok;

    let verdict = if all_pass {
        "PASS"
    } else {
        "DIRECTIONAL FAIL — investigate"
    };
    println!(
        "ACCEPTANCE 09 q1-q2-shape: {verdict} — within-15% counts [{}]; ST.Stacking rank {st_stacking:.2} vs raw model tree {raw:.2}",
        details.join(" ")
    );
    if !all_pass {
        eprintln!(
            "criterion 9 is directional: the shortfall above must be investigated and reported, not silently accepted"
        );
    }
}

/// Criterion 10: two full runs of the acceptance config produce
/// byte-identical score CSVs.
#[test]
fn criterion_10_determinism() {
    let fx = fixture();
    assert!(
        !fx.scores_a.is_empty() && fx.scores_a == fx.scores_b,
        "score CSVs from two runs of the acceptance config differ"
    );
    println!(
        "ACCEPTANCE 10 determinism: PASS — two runs produced byte-identical scores.csv ({} bytes)",
        fx.scores_a.len()
    );
}
