use std::path::Path;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;

use aqgan::ansatz::{build_discriminator, build_generator, DiscriminatorSpec, GeneratorSpec};
use aqgan::anomaly::ScoreOrientation;
use aqgan::data::Label;
use aqgan::effdim::{effective_dimension, kappa, FisherEstimate, ModelKind};
use aqgan::experiment::{
    aggregate, effdim_rows, replay, EvaluationFile, Experiment, ExperimentConfig, Family, ModeKind,
};
use aqgan::gan::{self, gan_losses, ClassicalGanModel, GanArchitecture, Mode};
use aqgan::metrics::{roc_auc, Direction, ScoredSample, Truth};
use aqgan::qgan::{
    self, disc_expectation, label_real_prob, train_qgan, DiscriminatorObjective, PreparedState,
    QGanModel, TrainConfig,
};
use aqgan::rng::substream;
use aqgan::sim::{
    finite_difference_gradient, parameter_shift_gradient, sample_z_last, ExpectationMode, Gate,
    NoiseModel, StateVector,
};
use aqgan::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

const BENCH_SEEDS: u64 = 10;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
}

fn parameter_counts() -> Result<Outcome> {
    let g = build_generator::<f64>(GeneratorSpec { n_qubits: 7, depth: 9 })?.n_params();
    let d7 = build_discriminator::<f64>(DiscriminatorSpec { n_qubits: 7, depth: 3 })?.n_params();
    let d3 = build_discriminator::<f64>(DiscriminatorSpec { n_qubits: 3, depth: 2 })?.n_params();
    Ok(Outcome {
        pass: (g, d7, d3) == (70, 66, 21),
        detail: format!("generator(7,9)={g} discriminator(7,3)={d7} discriminator(3,2)={d3}"),
    })
}

fn quantum_gradients() -> Result<Outcome> {
    let h = 1e-5;
    let exact = ExpectationMode::Exact;
    let mut worst = 0.0f64;
    for n in [2usize, 3, 4] {
        let mut rng = substream(n as u64, "gradients");
        for _ in 0..20 {
            let model = QGanModel::<f64>::random(
                GeneratorSpec { n_qubits: n, depth: 2 },
                DiscriminatorSpec { n_qubits: n, depth: 2 },
                std::f64::consts::PI,
                &mut rng,
            )?;
            let points: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect())
                .collect();
            let prepared: Vec<PreparedState<f64>> = points.iter().map(|x| PreparedState::encoded(x)).collect();
            let states: Vec<StateVector<f64>> = prepared.iter().map(|p| p.state.clone()).collect();
            let generated = model.generated()?;
            let disc = model.discriminator_gates()?;

            let with_g = |p: &[f64]| {
                let mut m = model.clone();
                m.theta_g = p.to_vec();
                m
            };
            let with_d = |p: &[f64]| {
                let mut m = model.clone();
                m.theta_d = p.to_vec();
                m
            };

            let ps = parameter_shift_gradient(&model.generator, &model.theta_g, |gates, _| {
                let s = PreparedState::from_gates(n, gates.to_vec())?;
                Ok(label_real_prob(disc_expectation(&s, &disc, &exact, 0)?))
            })?;
            let fd = finite_difference_gradient(&model.theta_g, h, |p| with_g(p).c_generated())?;
            worst = worst.max(max_abs_diff(&ps, &fd));

            let ps = parameter_shift_gradient(&model.discriminator, &model.theta_d, |gates, _| {
                Ok(label_real_prob(disc_expectation(&generated, gates, &exact, 0)?))
            })?;
            let fd = finite_difference_gradient(&model.theta_d, h, |p| with_d(p).c_generated())?;
            worst = worst.max(max_abs_diff(&ps, &fd));

            let ps = parameter_shift_gradient(&model.discriminator, &model.theta_d, |gates, _| {
                let mut acc = 0.0;
                for x in &prepared {
                    acc += label_real_prob(disc_expectation(x, gates, &exact, 0)?);
                }
                Ok(acc / prepared.len() as f64)
            })?;
            let fd = finite_difference_gradient(&model.theta_d, h, |p| with_d(p).c_data(&states))?;
            worst = worst.max(max_abs_diff(&ps, &fd));

            let ps = qgan::generator_gradient(&model, &exact, 0)?;
            let fd = finite_difference_gradient(&model.theta_g, h, |p| with_g(p).generator_loss())?;
            worst = worst.max(max_abs_diff(&ps, &fd));

            let ps = qgan::discriminator_gradient(&model, &prepared, &exact, DiscriminatorObjective::Adversarial, 0)?;
            let fd = finite_difference_gradient(&model.theta_d, h, |p| {
                with_d(p).discriminator_objective(&states, DiscriminatorObjective::Adversarial)
            })?;
            worst = worst.max(max_abs_diff(&ps, &fd));
        }
    }

    let mut worst_rel = 0.0f64;
    for d in [2usize, 3, 4] {
        let mut rng = substream(d as u64, "backprop");
        for _ in 0..20 {
            let model = ClassicalGanModel::<f64>::new(d, &GanArchitecture::standard(d, 8), &mut rng)?;
            let data: Vec<Vec<f64>> = (0..10).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let noise = model.sample_latents(10, &mut rng);

            let (_, analytic) = gan::discriminator_gradient(&model, &data, &noise, Mode::Eval, &mut rng)?;
            let fd = finite_difference_gradient(&model.discriminator.params(), 1e-6, |p| {
                let mut m = model.clone();
                m.discriminator.set_params(p)?;
                Ok(gan_losses(&m, &data, &noise)?.1)
            })?;
            worst_rel = worst_rel.max(max_abs_diff(&analytic, &fd) / max_abs(&fd).max(1e-12));

            let (_, analytic) = gan::generator_gradient(&model, &noise, Mode::Eval, &mut rng)?;
            let fd = finite_difference_gradient(&model.generator.params(), 1e-6, |p| {
                let mut m = model.clone();
                m.generator.set_params(p)?;
                Ok(gan_losses(&m, &data, &noise)?.0)
            })?;
            worst_rel = worst_rel.max(max_abs_diff(&analytic, &fd) / max_abs(&fd).max(1e-12));
        }
    }
    Ok(Outcome {
        pass: worst < 1e-5 && worst_rel < 1e-5,
        detail: format!("quantum max-norm error {worst:.2e}, classical relative error {worst_rel:.2e}"),
    })
}

fn random_gate<R: Rng>(n: usize, rng: &mut R) -> Gate<f64> {
    let q = rng.gen_range(0..n);
    let mut other = rng.gen_range(0..n - 1);
    if other >= q {
        other += 1;
    }
    let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    match rng.gen_range(0..6) {
        0 => Gate::H(q),
        1 => Gate::Rx(q, angle),
        2 => Gate::Ry(q, angle),
        3 => Gate::Rz(q, angle),
        4 => Gate::Cz(q, other),
        _ => Gate::Cnot { control: q, target: other },
    }
}

fn simulator_invariants() -> Result<Outcome> {
    let mut rng = substream(0, "invariants");
    let mut state = StateVector::<f64>::zero(6);
    let mut drift = 0.0f64;
    for _ in 0..10_000 {
        state.apply(&random_gate(6, &mut rng))?;
        drift = drift.max((state.norm_sqr() - 1.0).abs());
    }

    let shots = 1000u64;
    let tolerance = 3.0 / (shots as f64).sqrt();
    let noiseless = NoiseModel::noiseless();
    let mut within = 0usize;
    for _ in 0..1000 {
        let gates: Vec<Gate<f64>> = (0..8).map(|_| random_gate(3, &mut rng)).collect();
        let start = StateVector::zero(3);
        let mut exact = start.clone();
        exact.apply_all(&gates)?;
        let estimate = sample_z_last(&gates, &start, shots, &noiseless, &mut rng)?;
        if (estimate - exact.expectation_z_last()).abs() <= tolerance {
            within += 1;
        }
    }
    Ok(Outcome {
        pass: drift < 1e-10 && within >= 990,
        detail: format!("norm drift {drift:.2e}, {within}/1000 shot estimates within 3/sqrt(shots)"),
    })
}

fn auc_oracle() -> Result<Outcome> {
    let mut rng = substream(0, "auc-oracle");
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n_pos = rng.gen_range(1..=60);
        let n_neg = rng.gen_range(1..=60);
        let tied = rng.gen_bool(0.5);
        let draw = |rng: &mut aqgan::rng::SimRng| {
            if tied || rng.gen_bool(0.3) {
                rng.gen_range(0..6) as f64
            } else {
                rng.gen::<f64>() * 6.0
            }
        };
        let pos: Vec<f64> = (0..n_pos).map(|_| draw(&mut rng)).collect();
        let neg: Vec<f64> = (0..n_neg).map(|_| draw(&mut rng)).collect();
        let mut wins = 0.0;
        for p in &pos {
            for q in &neg {
                wins += if p > q {
                    1.0
                } else if p == q {
                    0.5
                } else {
                    0.0
                };
            }
        }
        let oracle = wins / (n_pos * n_neg) as f64;
        let samples: Vec<ScoredSample<f64>> = pos
            .iter()
            .map(|&score| ScoredSample { score, truth: Truth::Anomaly })
            .chain(neg.iter().map(|&score| ScoredSample { score, truth: Truth::Normal }))
            .collect();
        let auc = roc_auc(&samples, Direction::HigherIsPositive)?.auc;
        worst = worst.max((auc - oracle).abs());
    }
    Ok(Outcome {
        pass: worst < 1e-9,
        detail: format!("max |AUC - Mann-Whitney| {worst:.2e}"),
    })
}

fn single_point_learning() -> Result<Outcome> {
    let mut fidelities = Vec::new();
    for seed in 0..10u64 {
        let mut r = substream(seed, "point");
        let x: Vec<f64> = (0..2).map(|_| r.gen_range(-1.5..1.5)).collect();
        let data = vec![x.clone(); 10];
        let config = TrainConfig::exact(2, seed);
        let trained = train_qgan(
            GeneratorSpec { n_qubits: 2, depth: 2 },
            DiscriminatorSpec { n_qubits: 2, depth: 2 },
            &config,
            &data,
        )?;
        let f = trained.model.generator_state()?.fidelity(&StateVector::product_ry(&x))?;
        fidelities.push(f);
    }
    let hits = fidelities.iter().filter(|&&f| f > 0.9).count();
    Ok(Outcome {
        pass: hits >= 8,
        detail: format!("{hits}/10 seeds above 0.9; fidelities [{}]", fmt_list(&fidelities)),
    })
}

struct BenchRun {
    graviton: f64,
    graviton_as_written: f64,
    higgs: f64,
}

fn benchmark_run(seed: u64, mode: ModeKind, dir: &Path) -> Result<BenchRun> {
    let mut config = ExperimentConfig { seed, ..ExperimentConfig::default() };
    config.qgan.mode = mode;
    config.anomaly.orientation = ScoreOrientation::Inverted;
    let mut exp = Experiment::open(dir, Some(config))?;
    exp.synth()?;
    exp.prep()?;
    exp.train_qgan()?;
    exp.score()?;
    exp.evaluate()?;
    let file: EvaluationFile = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json"))?)?;
    let entry = |kind: Label| {
        file.entries
            .iter()
            .find(|e| e.model_kind == Family::Qgan && e.anomaly_kind == kind)
            .map(|e| &e.report)
            .expect("qgan report entry")
    };
    let g = entry(Label::Graviton);
    Ok(BenchRun {
        graviton: g.auc_max,
        graviton_as_written: g.per_alpha.iter().map(|a| a.auc_flipped).fold(0.0, f64::max),
        higgs: entry(Label::Higgs).auc_max,
    })
}

fn benchmark(mode: ModeKind) -> Result<Vec<BenchRun>> {
    (0..BENCH_SEEDS)
        .map(|seed| {
            let dir = tempfile::tempdir()?;
            let t = Instant::now();
            let run = benchmark_run(seed, mode, dir.path())?;
            eprintln!(
                "  {mode:?} seed {seed}: graviton {:.3} (as written {:.3}) higgs {:.3} in {:.0}s",
                run.graviton,
                run.graviton_as_written,
                run.higgs,
                t.elapsed().as_secs_f64()
            );
            Ok(run)
        })
        .collect()
}

static EXACT_MEDIAN: OnceLock<f64> = OnceLock::new();

fn exact_benchmark() -> Result<Outcome> {
    let runs = benchmark(ModeKind::Exact)?;
    let g: Vec<f64> = runs.iter().map(|r| r.graviton).collect();
    let m = median(g.clone());
    let _ = EXACT_MEDIAN.set(m);
    Ok(Outcome {
        pass: m >= 0.85,
        detail: format!(
            "median best-alpha Graviton AUC {m:.3} [{}]; as-written orientation median {:.3}; Higgs median {:.3}",
            fmt_list(&g),
            median(runs.iter().map(|r| r.graviton_as_written).collect()),
            median(runs.iter().map(|r| r.higgs).collect()),
        ),
    })
}

fn shot_benchmark() -> Result<Outcome> {
    let exact = match EXACT_MEDIAN.get() {
        Some(&m) => m,
        None => median(benchmark(ModeKind::Exact)?.iter().map(|r| r.graviton).collect()),
    };
    let runs = benchmark(ModeKind::Shots)?;
    let g: Vec<f64> = runs.iter().map(|r| r.graviton).collect();
    let m = median(g.clone());
    Ok(Outcome {
        pass: exact - m < 0.15,
        detail: format!(
            "median Graviton AUC {m:.3} in shot mode against {exact:.3} exact (degradation {:.3}) [{}]",
            exact - m,
            fmt_list(&g)
        ),
    })
}

fn effective_dimension_ordering() -> Result<Outcome> {
    let mut config = ExperimentConfig::default();
    config.effdim.features = vec![3, 4, 5];
    config.effdim.seeds = 5;
    let rows = effdim_rows(&config)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [3usize, 4, 5] {
        let of = |kind: ModelKind| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.n_features == n && r.model_kind == kind)
                .map(|r| r.effective_dimension)
                .collect()
        };
        let (q, c) = (of(ModelKind::Quantum), of(ModelKind::Classical));
        let wins = q.iter().zip(&c).filter(|(a, b)| a > b).count();
        pass &= wins >= 4;
        parts.push(format!("n={n}: {wins}/5 (quantum [{}] classical [{}])", fmt_list(&q), fmt_list(&c)));
    }

    let mut identity_error = 0.0f64;
    for p in [3usize, 12, 30] {
        let mut eye = vec![0.0; p * p];
        for i in 0..p {
            eye[i * p + i] = 1.0;
        }
        let est = FisherEstimate { n_params: p, thetas: vec![vec![]; 4], matrices: vec![eye; 4], skipped_outcomes: 0 };
        let k = kappa(1.0, 100);
        let want = p as f64 * (1.0 + k).ln() / k.ln();
        identity_error = identity_error.max((effective_dimension(&est, 1.0, 100)? - want).abs());
    }
    pass &= identity_error < 1e-9;
    parts.push(format!("identity error {identity_error:.2e}"));
    Ok(Outcome { pass, detail: parts.join("; ") })
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) -> Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let path = e.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            out.push((rel, std::fs::read(&path)?));
        }
    }
    Ok(())
}

fn tree(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    Ok(files)
}

fn compare_trees(a: &Path, b: &Path) -> Result<Vec<String>> {
    let (ta, tb) = (tree(a)?, tree(b)?);
    let names = |t: &[(String, Vec<u8>)]| t.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    if names(&ta) != names(&tb) {
        return Ok(vec![format!("file sets differ: {:?} vs {:?}", names(&ta), names(&tb))]);
    }
    Ok(ta.iter().zip(&tb).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.clone()).collect())
}

fn determinism() -> Result<Outcome> {
    let mut config = ExperimentConfig { seed: 11, ..ExperimentConfig::default() };
    config.qgan.epochs = Some(30);
    config.gan.epochs = 30;
    config.effdim.features = vec![3];
    config.effdim.seeds = 2;
    config.effdim.n_theta = 5;

    let root = tempfile::tempdir()?;
    let (original, copy) = (root.path().join("original"), root.path().join("replayed"));
    let t = Instant::now();
    let mut exp = Experiment::open(&original, Some(config))?;
    exp.run_pipeline()?;
    exp.effdim()?;
    let original_time = t.elapsed();

    let t = Instant::now();
    replay(&original, &copy)?;
    let replay_time = t.elapsed();
    let mut differing = compare_trees(&original, &copy)?;

    let (summary, summary_copy) = (root.path().join("summary"), root.path().join("summary-replayed"));
    aggregate(std::slice::from_ref(&original), &summary)?;
    replay(&summary, &summary_copy)?;
    differing.extend(compare_trees(&summary, &summary_copy)?);

    let n_files = tree(&original)?.len() + tree(&summary)?.len();
    let bounded = replay_time <= original_time.mul_f64(1.5) + Duration::from_secs(1);
    Ok(Outcome {
        pass: differing.is_empty() && bounded,
        detail: format!(
            "{} of {n_files} files differ{}; original {:.1}s, replay {:.1}s",
            differing.len(),
            if differing.is_empty() { String::new() } else { format!(" ({})", differing.join(", ")) },
            original_time.as_secs_f64(),
            replay_time.as_secs_f64()
        ),
    })
}

type Criterion = (usize, &'static str, u64, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "parameter counts", 1, parameter_counts),
        (2, "gradient correctness", 120, quantum_gradients),
        (3, "simulator invariants", 120, simulator_invariants),
        (4, "AUC oracle equivalence", 30, auc_oracle),
        (5, "single-point qGAN learning", 600, single_point_learning),
        (6, "exact synthetic benchmark", 3600, exact_benchmark),
        (7, "shot-mode noise robustness", 14_400, shot_benchmark),
        (8, "effective dimension ordering", 1800, effective_dimension_ordering),
        (9, "manifest determinism", 3600, determinism),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .filter_map(|a| a.parse().ok())
        .collect();

    let mut failures = 0;
    for (id, name, limit, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let result = run();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {id} ({name}): {detail} [{:.1}s, limit {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
