//! Occurrence records, filtering, and frequency/origin distributions.
//!
//! A name occurrence is one name attached to one person. How often a person
//! is mentioned does not matter, so distributions count distinct
//! `(person_id, name)` pairs. A person bearing two names contributes two
//! occurrences.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Region {
    Palestine,
    WesternDiaspora,
    EasternDiaspora,
    Other,
    Unknown,
}

/// Name-origin category. The first eight variants are the base categories;
/// `Semitic` only appears after merging the two Semitic groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OriginCategory {
    Biblical,
    Greek,
    Latin,
    Persian,
    Egyptian,
    Arabian,
    SemiticHebrew,
    SemiticGreek,
    Semitic,
}

impl OriginCategory {
    pub const BASE: [OriginCategory; 8] = [
        OriginCategory::Biblical,
        OriginCategory::Greek,
        OriginCategory::Latin,
        OriginCategory::Persian,
        OriginCategory::Egyptian,
        OriginCategory::Arabian,
        OriginCategory::SemiticHebrew,
        OriginCategory::SemiticGreek,
    ];

    pub const MERGED: [OriginCategory; 7] = [
        OriginCategory::Biblical,
        OriginCategory::Greek,
        OriginCategory::Latin,
        OriginCategory::Persian,
        OriginCategory::Egyptian,
        OriginCategory::Arabian,
        OriginCategory::Semitic,
    ];

    pub fn label(self) -> &'static str {
        match self {
            OriginCategory::Biblical => "Biblical",
            OriginCategory::Greek => "Greek",
            OriginCategory::Latin => "Latin",
            OriginCategory::Persian => "Persian",
            OriginCategory::Egyptian => "Egyptian",
            OriginCategory::Arabian => "Arabian",
            OriginCategory::SemiticHebrew => "Semitic-Hebrew",
            OriginCategory::SemiticGreek => "Semitic-Greek",
            OriginCategory::Semitic => "Semitic",
        }
    }

    /// Relabeling applied by the Semitic merge.
    pub fn merged(self) -> OriginCategory {
        match self {
            OriginCategory::SemiticHebrew | OriginCategory::SemiticGreek => OriginCategory::Semitic,
            other => other,
        }
    }
}

impl fmt::Display for OriginCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn normalize_token(s: &str) -> String {
    s.trim()
        .chars()
        .filter(|c| !matches!(c, '-' | '_' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Error returned when a string is not one of the known enum values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseEnumError {
    pub kind: &'static str,
    pub value: String,
    pub valid: &'static [&'static str],
}

impl fmt::Display for ParseEnumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown {} `{}` (valid: {})", self.kind, self.value, self.valid.join(", "))
    }
}

const ORIGIN_NAMES: &[&str] = &[
    "Biblical",
    "Greek",
    "Latin",
    "Persian",
    "Egyptian",
    "Arabian",
    "Semitic-Hebrew",
    "Semitic-Greek",
];

impl FromStr for OriginCategory {
    type Err = ParseEnumError;

    /// Accepts only the eight base categories.
    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let token = normalize_token(s);
        OriginCategory::BASE
            .iter()
            .copied()
            .find(|c| normalize_token(c.label()) == token)
            .ok_or_else(|| ParseEnumError {
                kind: "origin",
                value: s.to_string(),
                valid: ORIGIN_NAMES,
            })
    }
}

impl FromStr for Gender {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match normalize_token(s).as_str() {
            "male" | "m" => Ok(Gender::Male),
            "female" | "f" => Ok(Gender::Female),
            "unknown" => Ok(Gender::Unknown),
            _ => Err(ParseEnumError {
                kind: "gender",
                value: s.to_string(),
                valid: &["male", "female", "unknown"],
            }),
        }
    }
}

impl FromStr for Region {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match normalize_token(s).as_str() {
            "palestine" => Ok(Region::Palestine),
            "westerndiaspora" => Ok(Region::WesternDiaspora),
            "easterndiaspora" => Ok(Region::EasternDiaspora),
            "other" => Ok(Region::Other),
            "unknown" => Ok(Region::Unknown),
            _ => Err(ParseEnumError {
                kind: "region",
                value: s.to_string(),
                valid: &["palestine", "western_diaspora", "eastern_diaspora", "other", "unknown"],
            }),
        }
    }
}

/// One name attached to one person.
///
/// Years are signed with no year zero: -4 is 4 BCE, 73 is 73 CE.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OccurrenceRecord {
    pub person_id: String,
    pub name: String,
    pub gender: Gender,
    pub region: Region,
    pub date_start: Option<i32>,
    pub date_end: Option<i32>,
    pub fictitious: bool,
    pub nickname: bool,
    pub exclude_category: Option<String>,
    pub origin: Option<OriginCategory>,
    pub source_tag: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordError {
    EmptyPersonId,
    EmptyName,
    YearZero,
    InvertedDateRange,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordError::EmptyPersonId => "empty person_id",
            RecordError::EmptyName => "empty name",
            RecordError::YearZero => "year 0 does not exist",
            RecordError::InvertedDateRange => "inverted date range",
        })
    }
}

impl OccurrenceRecord {
    /// A record with default flags: unknown gender/region, no dates.
    pub fn new(person_id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            person_id: person_id.into(),
            name: name.into(),
            gender: Gender::Unknown,
            region: Region::Unknown,
            date_start: None,
            date_end: None,
            fictitious: false,
            nickname: false,
            exclude_category: None,
            origin: None,
            source_tag: String::new(),
        }
    }

    pub fn validate(&self) -> core::result::Result<(), RecordError> {
        if self.person_id.trim().is_empty() {
            return Err(RecordError::EmptyPersonId);
        }
        if self.name.trim().is_empty() {
            return Err(RecordError::EmptyName);
        }
        if self.date_start == Some(0) || self.date_end == Some(0) {
            return Err(RecordError::YearZero);
        }
        if let (Some(s), Some(e)) = (self.date_start, self.date_end) {
            if s > e {
                return Err(RecordError::InvertedDateRange);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DatingPolicy {
    /// Keep every occurrence that cannot be shown to fall outside the window.
    Inclusive,
    /// Keep only occurrences dated entirely inside the window.
    Exclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DateWindow {
    pub start: i32,
    pub end: i32,
    pub policy: DatingPolicy,
}

impl DateWindow {
    pub fn new(start: i32, end: i32, policy: DatingPolicy) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidArgument("date window start after end".into()));
        }
        Ok(Self { start, end, policy })
    }

    pub fn admits(&self, record: &OccurrenceRecord) -> bool {
        match self.policy {
            DatingPolicy::Inclusive => {
                let lo = record.date_start.unwrap_or(i32::MIN);
                let hi = record.date_end.unwrap_or(i32::MAX);
                lo <= self.end && hi >= self.start
            }
            DatingPolicy::Exclusive => match (record.date_start, record.date_end) {
                (Some(lo), Some(hi)) => lo >= self.start && hi <= self.end,
                _ => false,
            },
        }
    }
}

/// How a boolean record flag (fictitious, nickname) is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FlagPolicy {
    #[default]
    Include,
    Exclude,
    Only,
}

impl FlagPolicy {
    fn admits(self, flag: bool) -> bool {
        match self {
            FlagPolicy::Include => true,
            FlagPolicy::Exclude => !flag,
            FlagPolicy::Only => flag,
        }
    }
}

/// Conjunctive record filter. `None` fields do not constrain.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RecordFilter {
    pub window: Option<DateWindow>,
    pub gender: Option<Gender>,
    pub region: Option<Region>,
    pub fictitious: FlagPolicy,
    pub nicknames: FlagPolicy,
    pub exclusions: BTreeSet<String>,
    pub source_tags: Option<BTreeSet<String>>,
}

impl RecordFilter {
    pub fn admits(&self, record: &OccurrenceRecord) -> bool {
        self.window.is_none_or(|w| w.admits(record))
            && self.gender.is_none_or(|g| g == record.gender)
            && self.region.is_none_or(|r| r == record.region)
            && self.fictitious.admits(record.fictitious)
            && self.nicknames.admits(record.nickname)
            && record
                .exclude_category
                .as_ref()
                .is_none_or(|c| !self.exclusions.contains(c))
            && self
                .source_tags
                .as_ref()
                .is_none_or(|tags| tags.contains(&record.source_tag))
    }
}

pub fn filter_records(records: &[OccurrenceRecord], filter: &RecordFilter) -> Vec<OccurrenceRecord> {
    records.iter().filter(|r| filter.admits(r)).cloned().collect()
}

/// Map from name to occurrence count.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyDistribution {
    counts: BTreeMap<String, u64>,
    total: u64,
}

/// Per-name shortfall found while subtracting a test sample.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Shortfall {
    pub name: String,
    pub reference: u64,
    pub test: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Subtraction<D> {
    pub result: D,
    /// Occurrences actually removed from the reference.
    pub removed: u64,
    /// Names whose test count exceeded the reference count; clamped at zero.
    pub shortfalls: Vec<Shortfall>,
}

impl<D> Subtraction<D> {
    pub fn is_exact(&self) -> bool {
        self.shortfalls.is_empty()
    }
}

impl FrequencyDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a distribution from explicit counts; zero counts are dropped,
    /// repeated names are summed.
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut d = Self::new();
        for (name, c) in counts {
            d.add_count(name.into(), c);
        }
        d
    }

    fn add_count(&mut self, name: String, c: u64) {
        if c == 0 {
            return;
        }
        *self.counts.entry(name).or_insert(0) += c;
        self.total += c;
    }

    pub fn count(&self, name: &str) -> u64 {
        self.counts.get(name).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Names in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Count descending, then name ascending.
    pub fn sorted_by_count(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// Per-name sum.
    pub fn merge(&self, other: &FrequencyDistribution) -> FrequencyDistribution {
        let mut out = self.clone();
        for (name, c) in other.iter() {
            out.add_count(name.to_string(), c);
        }
        out
    }

    /// Removes a test sample's occurrences from this reference so the two
    /// become independent samples. Names that reach zero are dropped.
    pub fn subtract_sample(&self, test: &FrequencyDistribution) -> Subtraction<FrequencyDistribution> {
        let mut out = self.clone();
        let mut shortfalls = Vec::new();
        let mut removed = 0;
        for (name, t) in test.iter() {
            let r = self.count(name);
            if t > r {
                shortfalls.push(Shortfall { name: name.to_string(), reference: r, test: t });
            }
            let take = t.min(r);
            if take == 0 {
                continue;
            }
            removed += take;
            out.total -= take;
            if take == r {
                out.counts.remove(name);
            } else if let Some(c) = out.counts.get_mut(name) {
                *c -= take;
            }
        }
        Subtraction { result: out, removed, shortfalls }
    }
}

fn unique_occurrences(records: &[OccurrenceRecord]) -> impl Iterator<Item = &OccurrenceRecord> + '_ {
    let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
    records
        .iter()
        .filter(move |r| seen.insert((r.person_id.as_str(), r.name.as_str())))
}

/// One occurrence per distinct `(person_id, name)` pair.
pub fn build_frequency_distribution(records: &[OccurrenceRecord]) -> FrequencyDistribution {
    let mut d = FrequencyDistribution::new();
    for r in unique_occurrences(records) {
        d.add_count(r.name.clone(), 1);
    }
    d
}

/// Counts per origin category. Every category of the active scheme (8 base,
/// or 7 after the Semitic merge) is present, zeros included.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OriginDistribution {
    counts: BTreeMap<OriginCategory, u64>,
    total: u64,
    merged: bool,
}

impl OriginDistribution {
    pub fn empty(merged: bool) -> Self {
        let cats: &[OriginCategory] = if merged { &OriginCategory::MERGED } else { &OriginCategory::BASE };
        Self {
            counts: cats.iter().map(|&c| (c, 0)).collect(),
            total: 0,
            merged,
        }
    }

    /// Builds from explicit base-category counts.
    pub fn from_counts<I>(counts: I, merge_semitic: bool) -> Self
    where
        I: IntoIterator<Item = (OriginCategory, u64)>,
    {
        let mut d = Self::empty(merge_semitic);
        for (c, n) in counts {
            d.add(c, n);
        }
        d
    }

    fn add(&mut self, category: OriginCategory, n: u64) {
        let key = if self.merged { category.merged() } else { category };
        *self.counts.entry(key).or_insert(0) += n;
        self.total += n;
    }

    pub fn count(&self, category: OriginCategory) -> u64 {
        self.counts.get(&category).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_merged(&self) -> bool {
        self.merged
    }

    pub fn categories(&self) -> impl Iterator<Item = OriginCategory> + '_ {
        self.counts.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (OriginCategory, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Sums the two Semitic groups; a no-op on an already merged distribution.
    pub fn merge_semitic(&self) -> OriginDistribution {
        if self.merged {
            return self.clone();
        }
        Self::from_counts(self.iter(), true)
    }

    pub fn subtract_sample(&self, test: &OriginDistribution) -> Subtraction<OriginDistribution> {
        let test = if self.merged { test.merge_semitic() } else { test.clone() };
        let mut out = self.clone();
        let mut shortfalls = Vec::new();
        let mut removed = 0;
        for (cat, t) in test.iter() {
            let r = self.count(cat);
            if t > r {
                shortfalls.push(Shortfall { name: cat.label().to_string(), reference: r, test: t });
            }
            let take = t.min(r);
            removed += take;
            out.total -= take;
            if let Some(c) = out.counts.get_mut(&cat) {
                *c -= take;
            }
        }
        Subtraction { result: out, removed, shortfalls }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OriginReport {
    pub distribution: OriginDistribution,
    /// Occurrences skipped because the record had no origin.
    pub missing_origin: usize,
}

pub fn build_origin_distribution(records: &[OccurrenceRecord], merge_semitic: bool) -> Result<OriginReport> {
    let mut d = OriginDistribution::empty(merge_semitic);
    let mut missing = 0;
    for r in unique_occurrences(records) {
        match r.origin {
            Some(c) => d.add(c, 1),
            None => missing += 1,
        }
    }
    if d.total == 0 {
        return Err(Error::NoOriginData);
    }
    Ok(OriginReport { distribution: d, missing_origin: missing })
}
