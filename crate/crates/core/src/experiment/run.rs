use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::config::{DataSource, ExperimentConfig};
use super::manifest::{file_digest, sha256_hex, CommandRecord, Manifest, MANIFEST_FILE};
use crate::anomaly::{evaluate, restart_seed, AnomalyReport, Detector, ScoreOrientation, ScoreTable};
use crate::ansatz::GeneratorSpec;
use crate::data::{load_csv, synth_generate, EncodedEvent, EventRecord, Label, Preprocessor, SynthConfig};
use crate::effdim::{
    effective_dimension, empirical_fisher, write_effdim_csv, BinnedClassicalModel, EffdimRow, ModelKind,
    QuantumBornModel, StatModel,
};
use crate::error::{EpochLoss, Error, Result};
use crate::gan::{train_gan, ClassicalGanModel, GanTrainConfig};
use crate::qgan::{train_qgan, QGanModel, QGanParams, TrainConfig};
use crate::rng::{child_seed, substream};

pub const COMMANDS: [&str; 7] = ["synth", "prep", "train-qgan", "train-gan", "score", "evaluate", "effdim"];

/// Model families scored by the pipeline, used in artifact names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Qgan,
    Gan,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Qgan => "qgan",
            Family::Gan => "gan",
        }
    }
}

/// Event indices chosen for training and testing; the quantum sets are
/// prefixes of the classical ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub manifest_digest: String,
    pub n_train: usize,
    pub n_test: usize,
    pub sm_train: Vec<usize>,
    pub sm_test: Vec<usize>,
    pub higgs_test: Option<Vec<usize>>,
    pub graviton_test: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QganArtifact {
    pub manifest_digest: String,
    pub features: usize,
    pub train: TrainConfig,
    pub params: QGanParams<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanArtifact {
    pub manifest_digest: String,
    pub features: usize,
    pub train: GanTrainConfig,
    pub model: ClassicalGanModel<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub model_kind: Family,
    pub anomaly_kind: Label,
    pub report: AnomalyReport,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationFile {
    pub manifest_digest: String,
    pub features: usize,
    pub seed: u64,
    pub orientation: ScoreOrientation,
    pub entries: Vec<ReportEntry>,
}

struct RawSets {
    sm: Vec<EventRecord>,
    higgs: Option<Vec<EventRecord>>,
    graviton: Option<Vec<EventRecord>>,
}

/// Event sets for one model family, encoded with its preprocessor.
pub struct EncodedSets {
    pub train: Vec<EncodedEvent>,
    pub normal_test: Vec<EncodedEvent>,
    pub anomalies: Vec<EncodedEvent>,
}

/// A run directory with its manifest.
pub struct Experiment {
    dir: PathBuf,
    manifest: Manifest,
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn csv_bytes(events: &[EventRecord]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    crate::data::write_csv(&mut buf, events)?;
    Ok(buf)
}

fn losses_csv(history: &[EpochLoss]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epoch", "generator_loss", "discriminator_objective"])?;
    for h in history {
        w.write_record([
            h.epoch.to_string(),
            format!("{:?}", h.generator_loss),
            format!("{:?}", h.discriminator_objective),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn permutation(n: usize, seed: u64, label: Label) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut substream(seed, &format!("split/{label}")));
    idx
}

fn take(len: usize, needed: usize) -> Result<()> {
    if len < needed {
        return Err(Error::NotEnoughRecords { needed, got: len });
    }
    Ok(())
}

fn pick(events: &[EventRecord], idx: &[usize]) -> Vec<EventRecord> {
    idx.iter().map(|&i| events[i].clone()).collect()
}

impl Experiment {
    /// Opens `dir`, creating it and its manifest when absent. With an
    /// existing manifest, a supplied `config` must equal the recorded one.
    pub fn open(dir: impl AsRef<Path>, config: Option<ExperimentConfig>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        if dir.join(MANIFEST_FILE).exists() {
            let manifest = Manifest::load(&dir)?;
            if let Some(c) = config {
                if c != manifest.config {
                    return Err(Error::InvalidConfig(format!(
                        "{} was created with a different configuration; use a fresh --out directory",
                        dir.display()
                    )));
                }
            }
            return Ok(Self { dir, manifest });
        }
        let config = config.unwrap_or_default();
        config.validate()?;
        let mut inputs = BTreeMap::new();
        if let DataSource::Files { sm, higgs, graviton } = &config.data.source {
            for p in std::iter::once(sm).chain(higgs).chain(graviton) {
                inputs.insert(p.display().to_string(), file_digest(p)?);
            }
        }
        std::fs::create_dir_all(&dir)?;
        let manifest = Manifest::new(config, inputs)?;
        manifest.save(&dir)?;
        Ok(Self { dir, manifest })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.manifest.config
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.manifest.artifacts.insert(rel.to_string(), sha256_hex(bytes));
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn finish(&mut self, name: &str, args: Vec<String>) -> Result<()> {
        self.manifest.commands.push(CommandRecord { name: name.to_string(), args });
        self.manifest.updated_unix = super::manifest::unix_now();
        self.manifest.save(&self.dir)
    }

    /// Runs one recorded command.
    pub fn execute(&mut self, command: &CommandRecord) -> Result<()> {
        match command.name.as_str() {
            "synth" => self.synth(),
            "prep" => self.prep(),
            "train-qgan" => self.train_qgan(),
            "train-gan" => self.train_gan(),
            "score" => self.score(),
            "evaluate" => self.evaluate(),
            "effdim" => self.effdim(),
            other => Err(Error::InvalidConfig(format!("unknown command {other:?}"))),
        }
    }

    /// The full detection pipeline: data, preprocessing, both models,
    /// scoring and evaluation.
    pub fn run_pipeline(&mut self) -> Result<()> {
        if matches!(self.config().data.source, DataSource::Synthetic { .. }) {
            self.synth()?;
        }
        self.prep()?;
        self.train_qgan()?;
        self.train_gan()?;
        self.score()?;
        self.evaluate()
    }

    /// Surrogate SM, Higgs-like and Graviton-like event files.
    pub fn synth(&mut self) -> Result<()> {
        let c = self.config().clone();
        let DataSource::Synthetic { shift } = c.data.source else {
            return Err(Error::InvalidConfig("synth needs a synthetic data source".into()));
        };
        let mixtures = SynthConfig::mean_shifted(shift);
        let m = c.data.classical_multiplier;
        let n_sm = (c.data.n_train + c.data.n_test) * m;
        let n_anom = c.data.n_test * m;
        for (label, n, file) in [
            (Label::Sm, n_sm, "data/sm.csv"),
            (Label::Higgs, n_anom, "data/higgs.csv"),
            (Label::Graviton, n_anom, "data/graviton.csv"),
        ] {
            let events = synth_generate(mixtures.mixture(label), label, n, c.seed)?;
            self.write(file, &csv_bytes(&events)?)?;
        }
        self.finish("synth", vec![])
    }

    fn raw_sets(&self) -> Result<RawSets> {
        match &self.config().data.source {
            DataSource::Synthetic { .. } => Ok(RawSets {
                sm: load_csv(self.path("data/sm.csv"))?,
                higgs: Some(load_csv(self.path("data/higgs.csv"))?),
                graviton: Some(load_csv(self.path("data/graviton.csv"))?),
            }),
            DataSource::Files { sm, higgs, graviton } => Ok(RawSets {
                sm: load_csv(sm)?,
                higgs: higgs.as_ref().map(load_csv).transpose()?,
                graviton: graviton.as_ref().map(load_csv).transpose()?,
            }),
        }
    }

    /// Train/test split and PCA + range normalizers for both families.
    pub fn prep(&mut self) -> Result<()> {
        let c = self.config().clone();
        let raw = self.raw_sets()?;
        let m = c.data.classical_multiplier;
        let (n_train_c, n_test_c) = (c.data.n_train * m, c.data.n_test * m);
        take(raw.sm.len(), n_train_c + n_test_c)?;
        let perm = permutation(raw.sm.len(), c.seed, Label::Sm);
        let anomaly_split = |set: &Option<Vec<EventRecord>>, label: Label| -> Result<Option<Vec<usize>>> {
            set.as_ref()
                .map(|events| {
                    take(events.len(), n_test_c)?;
                    Ok(permutation(events.len(), c.seed, label)[..n_test_c].to_vec())
                })
                .transpose()
        };
        let split = Split {
            manifest_digest: self.manifest.digest.clone(),
            n_train: c.data.n_train,
            n_test: c.data.n_test,
            sm_train: perm[..n_train_c].to_vec(),
            sm_test: perm[n_train_c..n_train_c + n_test_c].to_vec(),
            higgs_test: anomaly_split(&raw.higgs, Label::Higgs)?,
            graviton_test: anomaly_split(&raw.graviton, Label::Graviton)?,
        };
        let train_c = pick(&raw.sm, &split.sm_train);
        let pre_q = Preprocessor::fit(&train_c[..c.data.n_train], c.features)?;
        let pre_c = Preprocessor::fit(&train_c, c.features)?;
        self.write("split.json", &json_bytes(&split)?)?;
        self.write("preprocessor_qgan.json", (pre_q.to_json()? + "\n").as_bytes())?;
        self.write("preprocessor_gan.json", (pre_c.to_json()? + "\n").as_bytes())?;
        self.finish("prep", vec![])
    }

    /// Encoded training, normal-test and anomaly sets for `family`.
    pub fn encoded_sets(&self, family: Family) -> Result<EncodedSets> {
        let split: Split = read_json(&self.path("split.json"))?;
        let pre = Preprocessor::load(self.path(&format!("preprocessor_{}.json", family.as_str())))?;
        let raw = self.raw_sets()?;
        let (n_train, n_test) = match family {
            Family::Qgan => (split.n_train, split.n_test),
            Family::Gan => (split.sm_train.len(), split.sm_test.len()),
        };
        let mut anomalies = Vec::new();
        for (set, idx) in [(&raw.higgs, &split.higgs_test), (&raw.graviton, &split.graviton_test)] {
            if let (Some(events), Some(idx)) = (set, idx) {
                anomalies.extend(pre.transform_all(&pick(events, &idx[..n_test])));
            }
        }
        Ok(EncodedSets {
            train: pre.transform_all(&pick(&raw.sm, &split.sm_train[..n_train])),
            normal_test: pre.transform_all(&pick(&raw.sm, &split.sm_test[..n_test])),
            anomalies,
        })
    }

    pub fn qgan_seed(&self) -> u64 {
        substream(self.config().seed, "qgan").next_u64()
    }

    pub fn gan_seed(&self) -> u64 {
        substream(self.config().seed, "gan").next_u64()
    }

    pub fn train_qgan(&mut self) -> Result<()> {
        let c = self.config().clone();
        let sets = self.encoded_sets(Family::Qgan)?;
        let data: Vec<Vec<f64>> = sets.train.into_iter().map(|e| e.angles).collect();
        let (g, d) = c.qgan.specs(c.features);
        let train = c.qgan.train_config(c.features, self.qgan_seed());
        let t = train_qgan::<f64>(g, d, &train, &data)?;
        let art = QganArtifact {
            manifest_digest: self.manifest.digest.clone(),
            features: c.features,
            train,
            params: t.model.params(),
        };
        self.write("model_qgan.json", &json_bytes(&art)?)?;
        self.write("losses_qgan.csv", &losses_csv(&t.history)?)?;
        self.finish("train-qgan", vec![])
    }

    pub fn train_gan(&mut self) -> Result<()> {
        let c = self.config().clone();
        let sets = self.encoded_sets(Family::Gan)?;
        let data: Vec<Vec<f64>> = sets.train.into_iter().map(|e| e.angles).collect();
        let train = c.gan.train_config(self.gan_seed());
        let t = train_gan::<f64>(&train, &data)?;
        let art = GanArtifact {
            manifest_digest: self.manifest.digest.clone(),
            features: c.features,
            train,
            model: t.model,
        };
        self.write("model_gan.json", &json_bytes(&art)?)?;
        self.write("losses_gan.csv", &losses_csv(&t.history)?)?;
        self.finish("train-gan", vec![])
    }

    pub fn load_qgan(&self) -> Result<QGanModel<f64>> {
        let art: QganArtifact = read_json(&self.path("model_qgan.json"))?;
        QGanModel::from_params(art.params)
    }

    pub fn load_gan(&self) -> Result<ClassicalGanModel<f64>> {
        let art: GanArtifact = read_json(&self.path("model_gan.json"))?;
        Ok(art.model)
    }

    fn families_present(&self, file: impl Fn(Family) -> String) -> Vec<Family> {
        [Family::Qgan, Family::Gan]
            .into_iter()
            .filter(|f| self.path(&file(*f)).exists())
            .collect()
    }

    /// Scores the normal and anomaly test sets with every trained model.
    pub fn score(&mut self) -> Result<()> {
        let c = self.config().clone();
        let families = self.families_present(|f| format!("model_{}.json", f.as_str()));
        if families.is_empty() {
            return Err(Error::MissingArtifact(self.path("model_qgan.json")));
        }
        for family in families {
            let sets = self.encoded_sets(family)?;
            let table = match family {
                Family::Qgan => {
                    let model = self.load_qgan()?;
                    let mode = c.qgan.expectation_mode();
                    let seed = substream(c.seed, "score-shots").next_u64();
                    Detector::Quantum { model: &model, mode, seed }.score_table(
                        &sets.normal_test,
                        &sets.anomalies,
                        &c.anomaly,
                    )?
                }
                Family::Gan => {
                    let model = self.load_gan()?;
                    Detector::Classical { model: &model, seed: restart_seed(c.seed) }.score_table(
                        &sets.normal_test,
                        &sets.anomalies,
                        &c.anomaly,
                    )?
                }
            };
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            self.write(&format!("scores_{}.csv", family.as_str()), &buf)?;
        }
        self.finish("score", vec![])
    }

    /// ROC analysis per model and anomaly kind over the α grid.
    pub fn evaluate(&mut self) -> Result<()> {
        let c = self.config().clone();
        let families = self.families_present(|f| format!("scores_{}.csv", f.as_str()));
        if families.is_empty() {
            return Err(Error::MissingArtifact(self.path("scores_qgan.csv")));
        }
        let mut entries = Vec::new();
        for family in families {
            let table = ScoreTable::load_csv(self.path(&format!("scores_{}.csv", family.as_str())))?;
            for kind in [Label::Higgs, Label::Graviton] {
                if !table.events.iter().any(|e| e.label == kind) {
                    continue;
                }
                let report = evaluate(&table.restrict(&[kind]), c.anomaly.orientation)?;
                for (i, a) in report.per_alpha.iter().enumerate() {
                    let mut buf = Vec::new();
                    report.write_roc_csv(i, &mut buf)?;
                    let name = format!(
                        "roc_{}_{}_alpha{}.csv",
                        family.as_str(),
                        kind.as_str().to_lowercase(),
                        a.alpha
                    );
                    self.write(&name, &buf)?;
                }
                entries.push(ReportEntry { model_kind: family, anomaly_kind: kind, report });
            }
        }
        let file = EvaluationFile {
            manifest_digest: self.manifest.digest.clone(),
            features: c.features,
            seed: c.seed,
            orientation: c.anomaly.orientation,
            entries,
        };
        self.write("report.json", &json_bytes(&file)?)?;
        self.finish("evaluate", vec![])
    }

    /// Effective dimension of parameter-matched quantum and classical
    /// generators over the configured feature counts.
    pub fn effdim(&mut self) -> Result<()> {
        let rows = effdim_rows(self.config())?;
        let mut buf = Vec::new();
        write_effdim_csv(&rows, &mut buf)?;
        self.write("effdim.csv", &buf)?;
        self.finish("effdim", vec![])
    }
}

/// Quantum generator of depth `n` (`n² + n` parameters) and the dense
/// `n → n` sigmoid generator with the same count.
pub fn matched_generators(n: usize, latent_samples: usize, temperature: f64, seed: u64) -> Result<(QuantumBornModel<f64>, BinnedClassicalModel<f64>)> {
    let q = QuantumBornModel::generator(GeneratorSpec { n_qubits: n, depth: n })?;
    let c = BinnedClassicalModel::dense(n, latent_samples, temperature, seed)?;
    debug_assert_eq!(q.n_params(), c.n_params());
    Ok((q, c))
}

pub fn effdim_rows(config: &ExperimentConfig) -> Result<Vec<EffdimRow>> {
    let e = &config.effdim;
    let base = substream(config.seed, "effdim").next_u64();
    let mut rows = Vec::new();
    for &n in &e.features {
        for s in 0..e.seeds {
            let seed = child_seed(base, s as u64);
            let (q, c) = matched_generators(n, e.latent_samples, e.temperature, seed)?;
            for (kind, model) in [(ModelKind::Quantum, &q as &dyn StatModel), (ModelKind::Classical, &c)] {
                let est = empirical_fisher(model, e.n_theta, e.method, seed)?;
                let value = effective_dimension(&est, e.gamma, e.n_data)?;
                log::info!("effdim n={n} {} seed {s}: {value:.4}", kind.as_str());
                rows.push(EffdimRow {
                    n_features: n,
                    model_kind: kind,
                    param_count: model.n_params(),
                    effective_dimension: value,
                    gamma: e.gamma,
                    n_data: e.n_data,
                    seeds: seed.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

/// Re-executes every command of the manifest in `source` into `out`, and
/// restores the original timestamps so that the new manifest matches.
pub fn replay(source: impl AsRef<Path>, out: impl AsRef<Path>) -> Result<Manifest> {
    let source = source.as_ref();
    let original = if source.is_file() {
        serde_json::from_str::<Manifest>(&std::fs::read_to_string(source)?)?
    } else {
        Manifest::load(source)?
    };
    let out = out.as_ref();
    if original.commands.iter().any(|c| c.name == "report") {
        for c in &original.commands {
            let dirs: Vec<PathBuf> = c.args.iter().map(PathBuf::from).collect();
            super::report::aggregate(&dirs, out)?;
        }
    } else {
        let mut exp = Experiment::open(out, Some(original.config.clone()))?;
        for c in &original.commands {
            exp.execute(c)?;
        }
    }
    let mut m = Manifest::load(out)?;
    m.created_unix = original.created_unix;
    m.updated_unix = original.updated_unix;
    m.save(out)?;
    Ok(m)
}
