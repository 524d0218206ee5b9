//! Corpus and distribution files.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use namefit_core::corpus::{FrequencyDistribution, OccurrenceRecord};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const CORPUS_COLUMNS: [&str; 11] = [
    "person_id",
    "name",
    "gender",
    "region",
    "date_start",
    "date_end",
    "fictitious",
    "nickname",
    "exclude_category",
    "origin",
    "source_tag",
];

pub const DISTRIBUTION_COLUMNS: [&str; 2] = ["name", "count"];

/// A corpus row that did not become a record. `line` is the 1-based line
/// number in the file, header included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowRejection {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCorpus {
    pub path: PathBuf,
    pub records: Vec<OccurrenceRecord>,
    pub rejections: Vec<RowRejection>,
}

impl LoadedCorpus {
    pub fn rows(&self) -> usize {
        self.records.len() + self.rejections.len()
    }

    pub fn source_tags(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.source_tag.as_str()).collect()
    }
}

fn parse_bool(field: &str, value: &str) -> Result<bool, String> {
    match value.trim() {
        "" | "false" => Ok(false),
        "true" => Ok(true),
        other => Err(format!("{field}: expected true or false, got `{other}`")),
    }
}

fn parse_year(field: &str, value: &str) -> Result<Option<i32>, String> {
    let v = value.trim();
    if v.is_empty() {
        return Ok(None);
    }
    v.parse().map(Some).map_err(|_| format!("{field}: not an integer year: `{v}`"))
}

fn optional(value: &str) -> Option<&str> {
    let v = value.trim();
    (!v.is_empty()).then_some(v)
}

fn parse_row(fields: &[&str; 11]) -> Result<OccurrenceRecord, String> {
    let [person_id, name, gender, region, date_start, date_end, fictitious, nickname, exclude, origin, tag] = *fields;
    let mut r = OccurrenceRecord::new(person_id.trim(), name.trim());
    if let Some(g) = optional(gender) {
        r.gender = g.parse().map_err(|e| format!("{e}"))?;
    }
    if let Some(g) = optional(region) {
        r.region = g.parse().map_err(|e| format!("{e}"))?;
    }
    r.date_start = parse_year("date_start", date_start)?;
    r.date_end = parse_year("date_end", date_end)?;
    r.fictitious = parse_bool("fictitious", fictitious)?;
    r.nickname = parse_bool("nickname", nickname)?;
    r.exclude_category = optional(exclude).map(str::to_string);
    if let Some(o) = optional(origin) {
        r.origin = Some(o.parse().map_err(|e| format!("{e}"))?);
    }
    r.source_tag = tag.trim().to_string();
    r.validate().map_err(|e| e.to_string())?;
    Ok(r)
}

/// Reads a corpus CSV. Missing columns fail the whole load; every data row
/// either becomes a record or a rejection.
pub fn read_corpus<R: Read>(reader: R, path: &Path) -> CliResult<LoadedCorpus> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::format(path, e))?.clone();
    let mut index = [0usize; 11];
    let mut missing = Vec::new();
    for (i, col) in CORPUS_COLUMNS.iter().enumerate() {
        match headers.iter().position(|h| h.trim() == *col) {
            Some(p) => index[i] = p,
            None => missing.push(*col),
        }
    }
    if !missing.is_empty() {
        return Err(CliError::format(path, format!("missing columns: {}", missing.join(", "))));
    }

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line());
                rejections.push(RowRejection { line, reason: format!("unreadable row: {e}") });
                continue;
            }
        };
        let line = row.position().map_or(line, |p| p.line());
        if index.iter().any(|&j| j >= row.len()) {
            rejections.push(RowRejection {
                line,
                reason: format!("expected {} fields, found {}", headers.len(), row.len()),
            });
            continue;
        }
        let fields: [&str; 11] = std::array::from_fn(|c| &row[index[c]]);
        match parse_row(&fields) {
            Ok(r) => records.push(r),
            Err(reason) => rejections.push(RowRejection { line, reason }),
        }
    }
    Ok(LoadedCorpus { path: path.to_path_buf(), records, rejections })
}

pub fn load_corpus(path: &Path) -> CliResult<LoadedCorpus> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_corpus(BufReader::new(file), path)
}

/// Reads a `name,count` CSV. Names must be unique and counts positive.
pub fn read_distribution<R: Read>(reader: R, path: &Path) -> CliResult<FrequencyDistribution> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::format(path, e))?;
    if headers.iter().map(str::trim).collect::<Vec<_>>() != DISTRIBUTION_COLUMNS {
        return Err(CliError::format(path, "expected header name,count"));
    }
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CliError::format(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let name = row.get(0).unwrap_or("").trim().to_string();
        let count: u64 = row
            .get(1)
            .and_then(|c| c.trim().parse().ok())
            .filter(|&c| c > 0)
            .ok_or_else(|| CliError::format(path, format!("line {line}: count must be a positive integer")))?;
        if name.is_empty() {
            return Err(CliError::format(path, format!("line {line}: empty name")));
        }
        if !seen.insert(name.clone()) {
            return Err(CliError::format(path, format!("line {line}: duplicate name `{name}`")));
        }
        pairs.push((name, count));
    }
    Ok(FrequencyDistribution::from_counts(pairs))
}

pub fn load_distribution(path: &Path) -> CliResult<FrequencyDistribution> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_distribution(BufReader::new(file), path)
}

/// Count descending, then name ascending.
pub fn write_distribution<W: Write>(dist: &FrequencyDistribution, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DISTRIBUTION_COLUMNS)?;
    for (name, count) in dist.sorted_by_count() {
        w.write_record([name, &count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Corpus(LoadedCorpus),
    Distribution(FrequencyDistribution),
}

/// Loads either file type, told apart by the header line.
pub fn load_input(path: &Path) -> CliResult<Input> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header).map_err(|e| CliError::io(path, e))?;
    let columns: Vec<&str> = header.trim_start_matches('\u{feff}').trim().split(',').map(str::trim).collect();
    let rest = header.as_bytes().chain(reader);
    if columns == DISTRIBUTION_COLUMNS {
        read_distribution(rest, path).map(Input::Distribution)
    } else {
        read_corpus(rest, path).map(Input::Corpus)
    }
}

pub fn create_file(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| CliError::io(path, e))
}
