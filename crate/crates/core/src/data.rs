//! Instance files, dataset manifests and the seeded synthetic generator.
//!
//! An instance file is pretty-printed JSON:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "id": "vid00000",
//!   "segments": [{"index": 0, "duration_s": 2.5, "features": [0.1], "labels": [{"level": 4}]}],
//!   "ppl": [[0, 1, 0.73]],
//!   "annotations": [[0, 1, "coherent"]],
//!   "force_end_segment": true
//! }
//! ```
//!
//! `annotations` and each segment's `text` and label `group_weight` are optional.
//! A dataset directory holds `manifest.json` plus one file per instance.

use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{LogNormal, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoherenceAnnotation, CoherenceClass, ImportanceLabel, Instance, PplMap, Segment};
use crate::seeding::{hash_str, rng_for};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub count: usize,
    pub seed: u64,
    pub mean_segments: f64,
    pub mean_segment_duration_s: f64,
    /// Log-space spread of segment durations.
    pub duration_sigma: f64,
    pub mean_labels_per_video: f64,
    pub feature_dim: usize,
    pub topic_count: usize,
    /// Probability that a segment keeps the topic of its predecessor.
    pub topic_persistence: f64,
    pub feature_noise: f64,
    pub ppl_low: f64,
    pub ppl_high: f64,
    pub test_fraction: f64,
    pub min_segments: usize,
    /// Keeps every instance within reach of the exhaustive oracle.
    pub max_segments: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            count: 500,
            seed: 0,
            mean_segments: 13.90,
            mean_segment_duration_s: 2.77,
            duration_sigma: 0.45,
            mean_labels_per_video: 30.18,
            feature_dim: 32,
            topic_count: 4,
            topic_persistence: 0.6,
            feature_noise: 0.5,
            ppl_low: 1.0,
            ppl_high: 2.5,
            test_fraction: 0.2,
            min_segments: 3,
            max_segments: 22,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if !(self.ppl_low >= 0.0 && self.ppl_low < self.ppl_high) {
            return bad(format!(
                "thresholds must satisfy 0 <= low < high, got {} / {}",
                self.ppl_low, self.ppl_high
            ));
        }
        if self.feature_dim == 0 || self.topic_count == 0 {
            return bad("feature_dim and topic_count must be positive".into());
        }
        if !(self.mean_segments > 0.0 && self.mean_segment_duration_s > 0.0 && self.mean_labels_per_video > 0.0) {
            return bad("means must be positive".into());
        }
        if !(self.duration_sigma >= 0.0 && self.feature_noise >= 0.0) {
            return bad("spreads must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.test_fraction) || !(0.0..=1.0).contains(&self.topic_persistence) {
            return bad("fractions must lie in [0, 1]".into());
        }
        if self.min_segments == 0 || self.min_segments > self.max_segments {
            return bad(format!(
                "segment bounds {}..={} are empty",
                self.min_segments, self.max_segments
            ));
        }
        Ok(())
    }

    pub fn test_count(&self) -> usize {
        ((self.count as f64) * self.test_fraction).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub train: Vec<Instance>,
    pub test: Vec<Instance>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.train.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (Split, &Instance)> {
        let train = self.train.iter().map(|i| (Split::Train, i));
        train.chain(self.test.iter().map(|i| (Split::Test, i)))
    }
}

/// Summary statistics used for calibration checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetStats {
    pub instances: usize,
    pub mean_segments: f64,
    pub mean_segment_duration_s: f64,
    pub mean_labels_per_video: f64,
    pub annotated_pairs: usize,
    pub coherent_share: f64,
    pub incoherent_share: f64,
    pub uncertain_share: f64,
}

pub fn dataset_stats<'a>(instances: impl IntoIterator<Item = &'a Instance>) -> DatasetStats {
    let (mut n, mut segs, mut dur, mut labels) = (0usize, 0usize, 0.0, 0usize);
    let mut classes = [0usize; 3];
    for inst in instances {
        n += 1;
        segs += inst.len();
        for s in inst.segments() {
            dur += s.duration_s;
            labels += s.labels.len();
        }
        if let Some(ann) = inst.annotations() {
            for (_, c) in ann.iter() {
                classes[match c {
                    CoherenceClass::Coherent => 0,
                    CoherenceClass::Incoherent => 1,
                    CoherenceClass::Uncertain => 2,
                }] += 1;
            }
        }
    }
    let pairs: usize = classes.iter().sum();
    let share = |k: usize| if pairs == 0 { 0.0 } else { classes[k] as f64 / pairs as f64 };
    DatasetStats {
        instances: n,
        mean_segments: segs as f64 / n.max(1) as f64,
        mean_segment_duration_s: dur / segs.max(1) as f64,
        mean_labels_per_video: labels as f64 / n.max(1) as f64,
        annotated_pairs: pairs,
        coherent_share: share(0),
        incoherent_share: share(1),
        uncertain_share: share(2),
    }
}

pub fn class_for_ppl(ppl: f64, low: f64, high: f64) -> CoherenceClass {
    if ppl < low {
        CoherenceClass::Coherent
    } else if ppl > high {
        CoherenceClass::Incoherent
    } else {
        CoherenceClass::Uncertain
    }
}

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

fn prototypes(cfg: &GeneratorConfig) -> Vec<Vec<f64>> {
    let mut rng = rng_for(cfg.seed, &[hash_str("prototypes")]);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (0..cfg.topic_count)
        .map(|_| (0..cfg.feature_dim).map(|_| normal.sample(&mut rng)).collect())
        .collect()
}

fn draw_segment_count<R: Rng>(cfg: &GeneratorConfig, rng: &mut R) -> usize {
    let poisson = Poisson::new(cfg.mean_segments).expect("positive mean");
    loop {
        let m = poisson.sample(rng) as usize;
        if (cfg.min_segments..=cfg.max_segments).contains(&m) {
            return m;
        }
    }
}

/// Level weights for one label at relative position `pos` of a segment on a
/// topic with salience `sal`, both in [0, 1].
fn level_weights(pos: f64, sal: f64) -> [f64; 4] {
    [
        0.1 + (1.0 - pos) * (1.2 - sal),
        0.8,
        0.6 + 0.6 * sal,
        0.2 + 1.5 * pos + 0.8 * sal,
    ]
}

fn draw_labels<R: Rng>(cfg: &GeneratorConfig, pos: f64, sal: f64, last: bool, rng: &mut R) -> Vec<ImportanceLabel> {
    let per_segment = cfg.mean_labels_per_video / cfg.mean_segments;
    let count = if per_segment >= 1.0 {
        1 + Poisson::new(per_segment - 1.0).map_or(0, |p| p.sample(rng) as usize)
    } else {
        usize::from(rng.random_bool(per_segment))
    };
    let mut weights = level_weights(pos, sal);
    let mut levels = Vec::with_capacity(count.max(1));
    if last {
        weights[0] = 0.0;
        levels.push(4);
    }
    let dist = WeightedIndex::new(weights).expect("positive weights");
    while levels.len() < count {
        levels.push(dist.sample(rng) as u8 + 1);
    }
    levels
        .into_iter()
        .map(|l| ImportanceLabel::new(l).expect("level in range"))
        .collect()
}

fn generate_one(cfg: &GeneratorConfig, protos: &[Vec<f64>], index: usize, split: Split) -> Instance {
    let mut rng = rng_for(cfg.seed, &[hash_str("instance"), index as u64]);
    let m = draw_segment_count(cfg, &mut rng);
    let sigma = cfg.duration_sigma;
    let mu = cfg.mean_segment_duration_s.ln() - sigma * sigma / 2.0;
    let durations = LogNormal::new(mu, sigma).expect("finite log-normal");
    let noise = Normal::new(0.0, cfg.feature_noise).expect("finite noise");

    let mut topics = Vec::with_capacity(m);
    for i in 0..m {
        let t = if i > 0 && rng.random_bool(cfg.topic_persistence) {
            topics[i - 1]
        } else {
            rng.random_range(0..cfg.topic_count)
        };
        topics.push(t);
    }

    let segments: Vec<Segment> = (0..m)
        .map(|i| {
            let pos = if m > 1 { i as f64 / (m - 1) as f64 } else { 1.0 };
            let sal = if cfg.topic_count > 1 {
                topics[i] as f64 / (cfg.topic_count - 1) as f64
            } else {
                0.5
            };
            let duration_s = round_to(durations.sample(&mut rng), 0.01).clamp(0.3, 8.0);
            let features = protos[topics[i]]
                .iter()
                .map(|p| round_to(p + noise.sample(&mut rng), 1e-4))
                .collect();
            Segment {
                index: i,
                duration_s,
                features,
                labels: draw_labels(cfg, pos, sal, i + 1 == m, &mut rng),
                text: None,
            }
        })
        .collect();

    let same = Normal::new(0.55, 0.35).expect("finite");
    let differ = Normal::new(3.0, 0.6).expect("finite");
    let mut ppl = PplMap::new();
    for i in 0..m {
        for j in i + 1..m {
            let v: f64 = if topics[i] == topics[j] {
                let base = same.sample(&mut rng);
                if j == i + 1 {
                    base * 0.6
                } else {
                    base
                }
            } else {
                differ.sample(&mut rng)
            };
            ppl.insert(i, j, round_to(v.clamp(0.0, 4.0), 1e-4)).expect("ordered pair");
        }
    }

    let annotations = (split == Split::Test).then(|| {
        let mut ann = CoherenceAnnotation::new();
        for ((i, j), v) in ppl.iter() {
            ann.insert(i, j, class_for_ppl(v, cfg.ppl_low, cfg.ppl_high))
                .expect("ordered pair");
        }
        ann
    });
    Instance::new(format!("vid{index:05}"), segments, ppl, annotations, true).expect("generated instance is valid")
}

/// Seeded synthetic dataset. The last `round(count * test_fraction)`
/// instances form the test split and carry annotations.
pub fn generate(cfg: &GeneratorConfig) -> Result<Dataset> {
    cfg.validate()?;
    let protos = prototypes(cfg);
    let n_train = cfg.count - cfg.test_count();
    let all: Vec<Instance> = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let split = if i < n_train { Split::Train } else { Split::Test };
            generate_one(cfg, &protos, i, split)
        })
        .collect();
    let mut train = all;
    let test = train.split_off(n_train);
    Ok(Dataset { train, test })
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    schema_version: u32,
    id: String,
    segments: Vec<Segment>,
    ppl: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annotations: Option<Vec<(usize, usize, CoherenceClass)>>,
    force_end_segment: bool,
}

impl InstanceFile {
    fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            id: inst.id().to_owned(),
            segments: inst.segments().to_vec(),
            ppl: inst.ppl().iter().map(|((i, j), v)| (i, j, v)).collect(),
            annotations: inst
                .annotations()
                .map(|a| a.iter().map(|((i, j), c)| (i, j, c)).collect()),
            force_end_segment: inst.force_end_segment(),
        }
    }

    fn into_instance(self) -> Result<Instance> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let mut ppl = PplMap::new();
        for (k, &(i, j, v)) in self.ppl.iter().enumerate() {
            ppl.insert(i, j, v).map_err(|e| Error::invalid(format!("ppl[{k}]"), e.to_string()))?;
        }
        let annotations = match self.annotations {
            None => None,
            Some(rows) => {
                let mut ann = CoherenceAnnotation::new();
                for (k, &(i, j, c)) in rows.iter().enumerate() {
                    ann.insert(i, j, c)
                        .map_err(|e| Error::invalid(format!("annotations[{k}]"), e.to_string()))?;
                }
                Some(ann)
            }
        };
        Instance::new(self.id, self.segments, ppl, annotations, self.force_end_segment)
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes");
    s.push('\n');
    s
}

/// Parses one instance file. `file` only labels diagnostics.
pub fn parse_instance(text: &str, file: &Path) -> Result<Instance> {
    let raw: InstanceFile = serde_json::from_str(text).map_err(|e| Error::InstanceFile {
        file: file.to_owned(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    raw.into_instance().map_err(|e| match e {
        Error::Validation { path, msg } => {
            let (line, column) = locate_path(text, &path).unwrap_or((1, 1));
            Error::InstanceFile {
                file: file.to_owned(),
                line,
                column,
                msg: format!("{path}: {msg}"),
            }
        }
        other => other,
    })
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text, path)
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    pub instances: Vec<ManifestEntry>,
}

/// Writes `dir/manifest.json` and one `dir/instances/<id>.json` per instance.
pub fn save_dataset(ds: &Dataset, dir: &Path, generator: Option<&GeneratorConfig>) -> Result<PathBuf> {
    let inst_dir = dir.join("instances");
    std::fs::create_dir_all(&inst_dir).map_err(|e| Error::io(&inst_dir, e))?;
    let entries: Vec<(ManifestEntry, &Instance)> = ds
        .iter()
        .map(|(split, inst)| {
            let path = PathBuf::from("instances").join(format!("{}.json", inst.id()));
            (ManifestEntry { path, split }, inst)
        })
        .collect();
    entries
        .par_iter()
        .try_for_each(|(entry, inst)| save_instance(inst, &dir.join(&entry.path)))?;
    let manifest = DatasetManifest {
        schema_version: SCHEMA_VERSION,
        generator: generator.copied(),
        instances: entries.into_iter().map(|(e, _)| e).collect(),
    };
    let path = dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_owned()
    }
}

/// Loads a dataset from a manifest file or a directory containing one.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let mpath = manifest_path(path);
    let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: mpath.clone(),
        source: e,
    })?;
    let root = mpath.parent().unwrap_or(Path::new("."));
    let loaded: Vec<(Split, Instance)> = manifest
        .instances
        .par_iter()
        .map(|e| Ok((e.split, load_instance(&root.join(&e.path))?)))
        .collect::<Result<_>>()?;
    let mut ds = Dataset::default();
    for (split, inst) in loaded {
        match split {
            Split::Train => ds.train.push(inst),
            Split::Test => ds.test.push(inst),
        }
    }
    Ok(ds)
}

/// Loads instances from a single instance file, a manifest, or a directory
/// (through its manifest when present, otherwise every `*.json` in name order).
pub fn load_instances(path: &Path) -> Result<Vec<Instance>> {
    if path.is_dir() {
        if path.join(MANIFEST_FILE).exists() {
            let ds = load_dataset(path)?;
            return Ok(ds.train.into_iter().chain(ds.test).collect());
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        return files.par_iter().map(|f| load_instance(f)).collect();
    }
    if path.file_name().is_some_and(|n| n == MANIFEST_FILE) {
        let ds = load_dataset(path)?;
        return Ok(ds.train.into_iter().chain(ds.test).collect());
    }
    Ok(vec![load_instance(path)?])
}

#[derive(Debug, Clone, PartialEq)]
enum Step {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> Option<Vec<Step>> {
    let mut steps = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = part.split_at(part.find('[').unwrap_or(part.len()));
        if !key.is_empty() {
            steps.push(Step::Key(key.to_owned()));
        }
        while let Some(stripped) = rest.strip_prefix('[') {
            let end = stripped.find(']')?;
            steps.push(Step::Index(stripped[..end].parse().ok()?));
            rest = &stripped[end + 1..];
        }
    }
    Some(steps)
}

enum Frame {
    Object { key: Option<String> },
    Array { index: usize },
}

/// Line and column (1-based) where the value at `path` (e.g.
/// `segments[3].labels[0]`) starts in the JSON `text`.
fn locate_path(text: &str, path: &str) -> Option<(usize, usize)> {
    let target = parse_path(path)?;
    let current = |stack: &[Frame]| -> Vec<Step> {
        stack
            .iter()
            .filter_map(|f| match f {
                Frame::Object { key } => key.clone().map(Step::Key),
                Frame::Array { index } => Some(Step::Index(*index)),
            })
            .collect()
    };
    let mut stack: Vec<Frame> = Vec::new();
    let mut expect_key = false;
    let (mut line, mut col) = (1, 0);
    let mut chars = text.chars().peekable();
    let mut scalar = false;
    while let Some(c) = chars.next() {
        if c == '\n' {
            line += 1;
            col = 0;
        } else {
            col += 1;
        }
        if scalar {
            if matches!(c, ',' | ']' | '}') || c.is_whitespace() {
                scalar = false;
            } else {
                continue;
            }
        }
        match c {
            '"' => {
                let mut s = String::new();
                while let Some(d) = chars.next() {
                    col += 1;
                    match d {
                        '\\' => {
                            chars.next();
                            col += 1;
                        }
                        '"' => break,
                        _ => s.push(d),
                    }
                }
                if expect_key {
                    if let Some(Frame::Object { key }) = stack.last_mut() {
                        *key = Some(s);
                    }
                    expect_key = false;
                    continue;
                }
                if current(&stack) == target {
                    return Some((line, col - s.len() - 1));
                }
            }
            '{' | '[' => {
                if current(&stack) == target {
                    return Some((line, col));
                }
                if c == '{' {
                    stack.push(Frame::Object { key: None });
                    expect_key = true;
                } else {
                    stack.push(Frame::Array { index: 0 });
                }
            }
            '}' | ']' => {
                stack.pop();
            }
            ',' => match stack.last_mut() {
                Some(Frame::Array { index }) => *index += 1,
                Some(Frame::Object { key }) => {
                    *key = None;
                    expect_key = true;
                }
                None => {}
            },
            ':' => {}
            c if c.is_whitespace() => {}
            _ => {
                if current(&stack) == target {
                    return Some((line, col));
                }
                scalar = true;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema_version": 1,
  "id": "tiny",
  "segments": [
    {"index": 0, "duration_s": 4.0, "features": [0.0, 1.0], "labels": [{"level": 2}]},
    {"index": 1, "duration_s": 5.0, "features": [1.0, 0.0], "labels": [{"level": 4}]}
  ],
  "ppl": [[0, 1, 0.8]],
  "force_end_segment": true
}"#;

    #[test]
    fn minimal_file_parses() {
        let inst = parse_instance(MINIMAL, Path::new("tiny.json")).unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst.ppl().get(0, 1), Some(0.8));
        assert!(inst.annotations().is_none());
    }

    #[test]
    fn reversed_ppl_key_is_rejected_with_its_line() {
        let text = MINIMAL.replace("[[0, 1, 0.8]]", "[[1, 0, 0.8]]");
        match parse_instance(&text, Path::new("tiny.json")) {
            Err(Error::InstanceFile { line, msg, .. }) => {
                assert_eq!(line, 8);
                assert!(msg.starts_with("ppl[0]"), "{msg}");
            }
            other => panic!("expected a line-anchored error, got {other:?}"),
        }
    }

    #[test]
    fn schema_errors_point_at_the_segment() {
        let dup = MINIMAL.replace("\"index\": 1", "\"index\": 0");
        let Err(Error::InstanceFile { line, .. }) = parse_instance(&dup, Path::new("x")) else {
            panic!("duplicate index accepted");
        };
        assert_eq!(line, 6);
        let neg = MINIMAL.replace("\"duration_s\": 4.0", "\"duration_s\": -4.0");
        let Err(Error::InstanceFile { line, msg, .. }) = parse_instance(&neg, Path::new("x")) else {
            panic!("negative duration accepted");
        };
        assert_eq!(line, 5);
        assert!(msg.contains("duration"));
        let far = MINIMAL.replace("[[0, 1, 0.8]]", "[[0, 7, 0.8]]");
        assert!(parse_instance(&far, Path::new("x")).is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let broken = MINIMAL.replace("\"id\": \"tiny\",", "\"id\": \"tiny\"");
        let Err(Error::InstanceFile { line, .. }) = parse_instance(&broken, Path::new("x")) else {
            panic!("syntax error accepted");
        };
        assert_eq!(line, 4);
    }

    #[test]
    fn path_locator_handles_nesting() {
        let text = "{\n \"a\": [1,\n  {\"b\": [true, \"s\"]}]\n}";
        assert_eq!(locate_path(text, "a"), Some((2, 7)));
        assert_eq!(locate_path(text, "a[1].b[1]"), Some((3, 16)));
        assert_eq!(locate_path(text, "a[2]"), None);
    }

    #[test]
    fn small_generation_is_deterministic_and_valid() {
        let cfg = GeneratorConfig {
            count: 20,
            seed: 3,
            ..GeneratorConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.train.len(), a.test.len()), (16, 4));
        for (split, inst) in a.iter() {
            let m = inst.len();
            assert_eq!(inst.ppl().len(), m * (m - 1) / 2);
            assert_eq!(inst.annotations().is_some(), split == Split::Test);
            let last = &inst.segments()[m - 1].labels;
            assert!(last.iter().any(|l| l.level == 4) && last.iter().all(|l| l.level != 1));
            let text = instance_to_json(inst);
            assert_eq!(&parse_instance(&text, Path::new("x")).unwrap(), inst);
        }
    }

    #[test]
    fn zero_count_is_rejected() {
        let cfg = GeneratorConfig {
            count: 0,
            ..GeneratorConfig::default()
        };
        assert!(generate(&cfg).is_err());
        let cfg = GeneratorConfig {
            ppl_low: 3.0,
            ..GeneratorConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn dataset_round_trips_through_disk() {
        let cfg = GeneratorConfig {
            count: 10,
            seed: 5,
            ..GeneratorConfig::default()
        };
        let ds = generate(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = save_dataset(&ds, dir.path(), Some(&cfg)).unwrap();
        assert_eq!(load_dataset(&manifest).unwrap(), ds);
        assert_eq!(load_instances(dir.path()).unwrap().len(), 10);
    }
}
