//! Suite and figure configuration files.
//!
//! A config is either a bare JSON list of scenarios, or an object:
//!
//! ```json
//! {
//!   "corpora": ["ilan1.csv", "ga.csv"],
//!   "alpha": 0.05,
//!   "sources": { "GA-contested": { "source_tags": ["GA"], "exclusions": ["corroborated"] } },
//!   "scenarios": [ { "test_source": "GA", "reference_source": "Ilan-1",
//!                    "variable": "frequency", "expected_fit": "fit" } ],
//!   "figures": []
//! }
//! ```
//!
//! Corpus paths are relative to the config file. Every `source_tag` found in
//! the corpora is a source on its own; `sources` adds named slices defined by
//! a record filter. A slice without `source_tags` draws on the tag equal to
//! its own name.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use namefit_core::binning::DEFAULT_BINS;
use namefit_core::corpus::{filter_records, OccurrenceRecord, RecordFilter};
use namefit_core::inference::{ScenarioConfig, SuiteData};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    /// Reference-frequency bins.
    #[default]
    Bins,
    Origin,
    /// Most common reference names plus a rare column.
    TopNames,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformSeries {
    #[serde(default = "uniform_name")]
    pub name: String,
    pub draw_size: usize,
    #[serde(default)]
    pub replicates: Option<usize>,
}

fn uniform_name() -> String {
    "Uniform".to_string()
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

fn default_top() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSpec {
    pub name: String,
    pub reference: String,
    pub tests: Vec<String>,
    #[serde(default)]
    pub kind: FigureKind,
    #[serde(default = "default_bins")]
    pub k: usize,
    #[serde(default)]
    pub merge_semitic: bool,
    #[serde(default = "default_top")]
    pub top: usize,
    #[serde(default)]
    pub uniform: Option<UniformSeries>,
    #[serde(default)]
    pub level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    #[serde(default)]
    pub corpora: Vec<PathBuf>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub sources: BTreeMap<String, RecordFilter>,
    #[serde(default)]
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(default)]
    pub figures: Vec<FigureSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawConfig {
    List(Vec<ScenarioConfig>),
    Full(SuiteFile),
}

impl SuiteFile {
    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
            // untagged errors are vague; report the full-form parse error instead
            let detail = serde_json::from_str::<SuiteFile>(text).err().unwrap_or(e);
            CliError::format(path, detail)
        })?;
        let mut file = match raw {
            RawConfig::List(scenarios) => SuiteFile { scenarios, ..Default::default() },
            RawConfig::Full(f) => f,
        };
        let base = path.parent().unwrap_or(Path::new(""));
        for c in &mut file.corpora {
            if c.is_relative() {
                *c = base.join(&*c);
            }
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// Groups records into named sources: one per source tag, plus the
/// configured slices.
pub fn resolve_sources(records: &[OccurrenceRecord], slices: &BTreeMap<String, RecordFilter>) -> SuiteData {
    let mut data = SuiteData::new();
    for r in records {
        data.entry(r.source_tag.clone()).or_default().push(r.clone());
    }
    for (name, filter) in slices {
        let mut filter = filter.clone();
        if filter.source_tags.is_none() {
            filter.source_tags = Some(BTreeSet::from([name.clone()]));
        }
        data.insert(name.clone(), filter_records(records, &filter));
    }
    data
}
