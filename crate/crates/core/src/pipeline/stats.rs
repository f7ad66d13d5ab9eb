//! Harvest statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::name_matching::NameStatus;
use crate::oai_harvester::Language;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatEvent {
    /// A live record whose payload parsed.
    Publication { publication_type: String, language: Language },
    Deleted,
    Malformed,
    Author(NameStatus),
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStatistics {
    pub records_with_metadata: u64,
    pub deleted_records: u64,
    pub malformed_records: u64,
    pub per_type: BTreeMap<String, u64>,
    pub per_language: BTreeMap<Language, u64>,
    pub per_status: BTreeMap<NameStatus, u64>,
    pub duplicates_found: u64,
}

impl Default for RunStatistics {
    fn default() -> Self {
        RunStatistics {
            records_with_metadata: 0,
            deleted_records: 0,
            malformed_records: 0,
            per_type: BTreeMap::new(),
            per_language: BTreeMap::new(),
            per_status: NameStatus::ALL.iter().map(|s| (*s, 0)).collect(),
            duplicates_found: 0,
        }
    }
}

impl RunStatistics {
    pub fn record(&mut self, event: &StatEvent) {
        match event {
            StatEvent::Publication {
                publication_type,
                language,
            } => {
                self.records_with_metadata += 1;
                *self.per_type.entry(publication_type.clone()).or_insert(0) += 1;
                *self.per_language.entry(*language).or_insert(0) += 1;
            }
            StatEvent::Deleted => self.deleted_records += 1,
            StatEvent::Malformed => self.malformed_records += 1,
            StatEvent::Author(status) => *self.per_status.entry(*status).or_insert(0) += 1,
            StatEvent::Duplicate => self.duplicates_found += 1,
        }
    }

    pub fn authors_total(&self) -> u64 {
        self.per_status.values().sum()
    }

    /// Percentage per status, in enumeration order; all zero for no authors.
    pub fn status_percentages(&self) -> Vec<(NameStatus, u64, f64)> {
        let total = self.authors_total();
        NameStatus::ALL
            .iter()
            .map(|s| {
                let n = self.per_status.get(s).copied().unwrap_or(0);
                let pct = if total == 0 { 0.0 } else { n as f64 * 100.0 / total as f64 };
                (*s, n, pct)
            })
            .collect()
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "records with metadata  {:>8}", self.records_with_metadata);
        let _ = writeln!(out, "deleted records        {:>8}", self.deleted_records);
        let _ = writeln!(out, "malformed records      {:>8}", self.malformed_records);
        let _ = writeln!(out, "duplicates in corpus   {:>8}", self.duplicates_found);
        let _ = writeln!(out, "\npublication type");
        for (t, n) in &self.per_type {
            let _ = writeln!(out, "  {t:<30} {n:>8}");
        }
        let _ = writeln!(out, "\nlanguage");
        for (l, n) in &self.per_language {
            let _ = writeln!(out, "  {:<30} {n:>8}", l.tag());
        }
        let _ = writeln!(out, "\nname status");
        for (s, n, pct) in self.status_percentages() {
            let _ = writeln!(out, "  {:<30} {n:>8} {pct:>6.1}%", s.label());
        }
        let _ = writeln!(out, "  {:<30} {:>8}", "total", self.authors_total());
        out
    }
}

pub fn record_statistics<'a>(events: impl IntoIterator<Item = &'a StatEvent>) -> RunStatistics {
    let mut stats = RunStatistics::default();
    for e in events {
        stats.record(e);
    }
    stats
}
