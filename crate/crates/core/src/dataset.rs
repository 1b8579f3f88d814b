//! Labeling informal/formal corpora with verified dependencies, per-difficulty
//! statistics, and difficulty-stratified test splits.

use std::io::{BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::extract::Extractor;
use crate::index::DependencyIndex;
use crate::par::{self, Execution};
use crate::rng::SplitMix64;

pub const MAX_DIFFICULTY: u8 = 10;
/// Difficulty levels after folding 10 into 9.
pub const LEVELS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSample {
    pub id: String,
    pub informal_statement: String,
    pub formal_statement: String,
    pub difficulty: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub id: String,
    pub informal_statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formal_statement: Option<String>,
    pub dependencies: Vec<String>,
    pub difficulty: u8,
}

pub fn normalize_difficulty(d: u8) -> u8 {
    d.min(9)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct MalformedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Malformed(#[from] MalformedLine),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serializing output: {0}")]
    Json(#[from] serde_json::Error),
}

fn text_field(obj: &serde_json::Map<String, Value>, key: &str) -> Result<String, String> {
    match obj.get(key) {
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.clone()),
        Some(Value::String(_)) => Err(format!("{key} is empty")),
        Some(_) => Err(format!("{key} is not a string")),
        None => Err(format!("missing {key}")),
    }
}

/// Parses one corpus line. Ids may be strings or integers; difficulty must
/// be an integer in 0..=10 (integral floats are accepted).
pub fn parse_corpus_line(line: &str) -> Result<CorpusSample, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let obj = value.as_object().ok_or("line is not a JSON object")?;
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(_) => return Err("id is not a string or number".into()),
        None => return Err("missing id".into()),
    };
    let difficulty = obj
        .get("difficulty")
        .ok_or("missing difficulty")?
        .as_f64()
        .ok_or("difficulty is not a number")?;
    if difficulty.fract() != 0.0 || !(0.0..=MAX_DIFFICULTY as f64).contains(&difficulty) {
        return Err(format!("difficulty {difficulty} outside 0..=10"));
    }
    Ok(CorpusSample {
        id,
        informal_statement: text_field(obj, "informal_statement")?,
        formal_statement: text_field(obj, "formal_statement")?,
        difficulty: difficulty as u8,
    })
}

/// Corpus samples in file order; blank lines are skipped.
pub fn ingest_corpus<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Result<CorpusSample, MalformedLine>, std::io::Error>> {
    reader.lines().enumerate().filter_map(|(n, line)| match line {
        Err(e) => Some(Err(e)),
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok(parse_corpus_line(&l).map_err(|reason| MalformedLine { line: n + 1, reason }))),
    })
}

pub fn label_sample(index: &DependencyIndex, extractor: &Extractor, sample: &CorpusSample) -> LabeledSample {
    let deps = extractor.dependencies(index, &sample.formal_statement);
    LabeledSample {
        id: sample.id.clone(),
        informal_statement: sample.informal_statement.clone(),
        formal_statement: Some(sample.formal_statement.clone()),
        dependencies: deps.dependencies,
        difficulty: normalize_difficulty(sample.difficulty),
    }
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub keep_formal: bool,
    /// Abort on the first malformed line instead of collecting it.
    pub strict: bool,
    pub execution: Execution,
    /// Lines labeled per parallel batch.
    pub chunk_size: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            keep_formal: false,
            strict: false,
            execution: Execution::default(),
            chunk_size: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub processed: usize,
    pub errored: usize,
    pub wall_seconds: f64,
    pub samples_per_second: f64,
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub report: RunReport,
    pub errors: Vec<MalformedLine>,
}

/// Labels a corpus stream into labeled JSON Lines, one output line per valid
/// input line, in input order.
pub fn build_dataset<R: BufRead, W: Write>(
    index: &DependencyIndex,
    extractor: &Extractor,
    corpus: R,
    mut out: W,
    opts: &BuildOptions,
) -> Result<BuildOutcome, DatasetError> {
    let start = Instant::now();
    let mut errors = Vec::new();
    let mut processed = 0usize;
    let mut chunk = Vec::with_capacity(opts.chunk_size);

    let flush = |chunk: &mut Vec<CorpusSample>, out: &mut W| -> Result<usize, DatasetError> {
        let labeled = par::map_ordered(opts.execution, chunk, |s| label_sample(index, extractor, s));
        for mut l in labeled {
            if !opts.keep_formal {
                l.formal_statement = None;
            }
            serde_json::to_writer(&mut *out, &l)?;
            out.write_all(b"\n")?;
        }
        let n = chunk.len();
        chunk.clear();
        Ok(n)
    };

    for item in ingest_corpus(corpus) {
        match item? {
            Ok(sample) => {
                chunk.push(sample);
                if chunk.len() >= opts.chunk_size.max(1) {
                    processed += flush(&mut chunk, &mut out)?;
                }
            }
            Err(bad) if opts.strict => return Err(bad.into()),
            Err(bad) => {
                log::warn!("skipping corpus {bad}");
                errors.push(bad);
            }
        }
    }
    processed += flush(&mut chunk, &mut out)?;
    out.flush()?;

    let wall_seconds = start.elapsed().as_secs_f64();
    Ok(BuildOutcome {
        report: RunReport {
            processed,
            errored: errors.len(),
            wall_seconds,
            samples_per_second: if wall_seconds > 0.0 { processed as f64 / wall_seconds } else { 0.0 },
        },
        errors,
    })
}

/// Reads labeled JSON Lines (as produced by [`build_dataset`]).
pub fn read_labeled<R: BufRead>(reader: R) -> Result<Vec<LabeledSample>, DatasetError> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: LabeledSample = serde_json::from_str(&line).map_err(|e| MalformedLine {
            line: n + 1,
            reason: e.to_string(),
        })?;
        out.push(s);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub difficulty: u8,
    pub num: usize,
    /// Samples with at least one dependency.
    pub dependent: usize,
    pub total_dependencies: usize,
    pub max_dependencies: usize,
    pub depend_rate: f64,
    pub depend_length: f64,
    /// No samples at this level; rate and length are reported as 0.
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub levels: Vec<LevelStats>,
}

impl DatasetStats {
    pub fn level(&self, difficulty: u8) -> &LevelStats {
        &self.levels[normalize_difficulty(difficulty) as usize]
    }
}

pub fn compute_stats<'a, I: IntoIterator<Item = &'a LabeledSample>>(samples: I) -> DatasetStats {
    let mut counts = [(0usize, 0usize, 0usize, 0usize); LEVELS];
    for s in samples {
        let c = &mut counts[normalize_difficulty(s.difficulty) as usize];
        let k = s.dependencies.len();
        c.0 += 1;
        c.1 += usize::from(k > 0);
        c.2 += k;
        c.3 = c.3.max(k);
    }
    let levels = counts
        .iter()
        .enumerate()
        .map(|(d, &(num, dependent, total, max))| LevelStats {
            difficulty: d as u8,
            num,
            dependent,
            total_dependencies: total,
            max_dependencies: max,
            depend_rate: if num == 0 { 0.0 } else { dependent as f64 / num as f64 },
            depend_length: if num == 0 { 0.0 } else { total as f64 / num as f64 },
            empty: num == 0,
        })
        .collect();
    DatasetStats { levels }
}

/// Test-set names, each pooling two adjacent difficulty levels.
pub const TEST_SETS: [&str; 5] = ["Diff01", "Diff23", "Diff45", "Diff67", "Diff89"];
pub const PER_LEVEL: usize = 100;

#[derive(Debug, Clone)]
pub struct TestSet {
    pub name: &'static str,
    pub samples: Vec<LabeledSample>,
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Vec<LabeledSample>,
    pub tests: Vec<TestSet>,
    pub warnings: Vec<String>,
}

/// Samples up to [`PER_LEVEL`] statements per normalized level into the
/// five paired test sets; everything else is training data.
///
/// Selection is a partial Fisher-Yates shuffle of each level's samples (in
/// input order), levels visited 0 through 9, all drawing from one
/// [`SplitMix64`] seeded with `seed`. Swap targets are `i + below(len - i)`.
/// Selected samples keep their input order inside a test set.
pub fn split_corpus(samples: Vec<LabeledSample>, seed: u64) -> Split {
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); LEVELS];
    for (i, s) in samples.iter().enumerate() {
        by_level[normalize_difficulty(s.difficulty) as usize].push(i);
    }

    let mut rng = SplitMix64::new(seed);
    let mut in_test = vec![None; samples.len()];
    let mut warnings = Vec::new();
    for (level, pool) in by_level.iter_mut().enumerate() {
        let take = PER_LEVEL.min(pool.len());
        if take < PER_LEVEL {
            warnings.push(format!(
                "difficulty {level} has {} samples, fewer than {PER_LEVEL}; all are used for testing",
                pool.len()
            ));
        }
        for i in 0..take {
            let j = i + rng.below(pool.len() - i);
            pool.swap(i, j);
        }
        for &idx in &pool[..take] {
            in_test[idx] = Some(level / 2);
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut tests: Vec<TestSet> = TEST_SETS
        .iter()
        .map(|&name| TestSet { name, samples: Vec::new() })
        .collect();
    let mut train = Vec::new();
    for (s, slot) in samples.into_iter().zip(in_test) {
        match slot {
            Some(t) => tests[t].samples.push(s),
            None => train.push(s),
        }
    }
    Split { train, tests, warnings }
}
