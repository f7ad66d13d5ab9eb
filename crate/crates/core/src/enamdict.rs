//! Reader for ENAMDICT-format proper-name dictionaries.
//!
//! Each line couples a kanji/kana surface, an optional kana reading and one or
//! more slash-delimited senses, each sense carrying a Latin transcription and a
//! round-bracket type block:
//!
//! ```text
//! 森田 [もりだ] /Morida (s)/
//! イブ /(f) Eve/(u) Ib/Ibu (f)/(m) Yves/
//! ```
//!
//! Only person-name types survive parsing. Known syntax slips in the published
//! file (missing terminal slash, stray brackets, a backslash in place of `]`)
//! are salvaged and reported as [`ParseWarning`]s instead of aborting.

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnamdictError {
    #[error("failed to read dictionary line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
}

/// Person-name categories kept from the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NameType {
    /// `s`
    Surname,
    /// `g`
    Given,
    /// `f`
    FemaleGiven,
    /// `m`
    MaleGiven,
    /// `u`
    Unclassified,
}

impl NameType {
    pub const ALL: [NameType; 5] = [
        NameType::Surname,
        NameType::Given,
        NameType::FemaleGiven,
        NameType::MaleGiven,
        NameType::Unclassified,
    ];

    pub fn code(self) -> &'static str {
        match self {
            NameType::Surname => "s",
            NameType::Given => "g",
            NameType::FemaleGiven => "f",
            NameType::MaleGiven => "m",
            NameType::Unclassified => "u",
        }
    }

    pub fn from_code(code: &str) -> Option<NameType> {
        match code {
            "s" => Some(NameType::Surname),
            "g" => Some(NameType::Given),
            "f" => Some(NameType::FemaleGiven),
            "m" => Some(NameType::MaleGiven),
            "u" => Some(NameType::Unclassified),
            _ => None,
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// Small set of [`NameType`]s.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct NameTypes(u8);

impl NameTypes {
    pub const fn empty() -> Self {
        NameTypes(0)
    }

    pub fn insert(&mut self, t: NameType) {
        self.0 |= t.bit();
    }

    pub fn remove(&mut self, t: NameType) {
        self.0 &= !t.bit();
    }

    pub fn contains(self, t: NameType) -> bool {
        self.0 & t.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: NameTypes) -> NameTypes {
        NameTypes(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = NameType> {
        NameType::ALL.into_iter().filter(move |t| self.contains(*t))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Surname, or unclassified.
    pub fn can_be_family(self) -> bool {
        self.contains(NameType::Surname) || self.contains(NameType::Unclassified)
    }

    /// Any given-name type, or unclassified.
    pub fn can_be_given(self) -> bool {
        self.contains(NameType::Given)
            || self.contains(NameType::FemaleGiven)
            || self.contains(NameType::MaleGiven)
            || self.contains(NameType::Unclassified)
    }

    /// Comma-joined type codes, e.g. `"f,m"`.
    pub fn codes(self) -> String {
        self.iter().map(NameType::code).collect::<Vec<_>>().join(",")
    }
}

impl FromIterator<NameType> for NameTypes {
    fn from_iter<I: IntoIterator<Item = NameType>>(iter: I) -> Self {
        let mut set = NameTypes::empty();
        for t in iter {
            set.insert(t);
        }
        set
    }
}

impl Serialize for NameTypes {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.codes())
    }
}

impl<'de> Deserialize<'de> for NameTypes {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.split(',')
            .filter(|c| !c.is_empty())
            .map(|c| {
                NameType::from_code(c)
                    .ok_or_else(|| serde::de::Error::custom(format!("unknown name type {c:?}")))
            })
            .collect()
    }
}

/// One dictionary name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NameRecord {
    pub surface: String,
    pub reading: Option<String>,
    pub latin: String,
    pub types: NameTypes,
}

impl NameRecord {
    /// Serializes the record as a single-sense dictionary line.
    pub fn to_line(&self) -> String {
        match &self.reading {
            Some(r) => format!("{} [{}] /{} ({})/", self.surface, r, self.latin, self.types.codes()),
            None => format!("{} /{} ({})/", self.surface, self.latin, self.types.codes()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WarningKind {
    MissingTerminalSlash,
    StrayBracket,
    MalformedTypeBlock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseWarning {
    pub line: usize,
    pub kind: WarningKind,
    pub raw: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            WarningKind::MissingTerminalSlash => "missing terminal slash",
            WarningKind::StrayBracket => "stray bracket",
            WarningKind::MalformedTypeBlock => "malformed type block",
        };
        write!(f, "line {}: {}: {}", self.line, kind, self.raw)
    }
}

/// Every type code the dictionary uses, person or not.
const VALID_TYPE_CODES: [&str; 10] = ["s", "u", "g", "f", "m", "p", "h", "pr", "co", "st"];

/// Classifies the text of one round-bracket block.
///
/// Returns `None` for commentary (anything that is not a comma-separated list
/// of valid type codes) and otherwise the person-name subset of the listed
/// types, which may be empty for e.g. `(p)`.
fn classify_block(raw: &str) -> Option<NameTypes> {
    if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_lowercase() || b == b',') {
        return None;
    }
    let mut types = NameTypes::empty();
    for code in raw.split(',') {
        if code.is_empty() {
            continue;
        }
        if !VALID_TYPE_CODES.contains(&code) {
            return None;
        }
        if let Some(t) = NameType::from_code(code) {
            types.insert(t);
        }
    }
    Some(types)
}

/// Person-name types listed in a bracket block; commentary yields the empty set.
pub fn filter_types(raw: &str) -> NameTypes {
    classify_block(raw).unwrap_or_default()
}

/// Returns the record plus, when its Latin form contains apostrophes, a copy
/// with the apostrophes stripped.
pub fn apostrophe_variants(record: &NameRecord) -> Vec<NameRecord> {
    if record.latin.contains('\'') {
        let stripped = NameRecord {
            latin: record.latin.replace('\'', ""),
            ..record.clone()
        };
        vec![record.clone(), stripped]
    } else {
        vec![record.clone()]
    }
}

/// Parses one dictionary line, discarding warnings.
pub fn parse_entry_line(line: &str, include_unclassified: bool) -> Vec<NameRecord> {
    let mut warnings = Vec::new();
    parse_entry_line_with_warnings(0, line, include_unclassified, &mut warnings)
}

/// Parses one dictionary line into zero or more records, one per sense whose
/// surviving type set is nonempty.
pub fn parse_entry_line_with_warnings(
    line_no: usize,
    line: &str,
    include_unclassified: bool,
    warnings: &mut Vec<ParseWarning>,
) -> Vec<NameRecord> {
    let trimmed = line.trim_end_matches(['\r', '\n']);
    if trimmed.trim().is_empty() {
        return Vec::new();
    }
    let warn = |warnings: &mut Vec<ParseWarning>, kind| {
        if !warnings.iter().any(|w| w.line == line_no && w.kind == kind && w.raw == trimmed) {
            warnings.push(ParseWarning {
                line: line_no,
                kind,
                raw: trimmed.to_string(),
            });
        }
    };

    let Some(slash) = trimmed.find('/') else {
        warn(warnings, WarningKind::MalformedTypeBlock);
        return Vec::new();
    };
    let (head, body) = (&trimmed[..slash], &trimmed[slash + 1..]);

    let (surface, reading) = match split_head(head) {
        Head::Plain(s, r) => (s, r),
        Head::Salvaged(s, r) => {
            warn(warnings, WarningKind::StrayBracket);
            (s, r)
        }
    };
    if surface.is_empty() {
        warn(warnings, WarningKind::MalformedTypeBlock);
        return Vec::new();
    }

    let body_trimmed = body.trim_end();
    if !body_trimmed.ends_with('/') {
        warn(warnings, WarningKind::MissingTerminalSlash);
    }

    let mut out = Vec::new();
    let mut inherited: Option<NameTypes> = None;
    for sense in body_trimmed.split('/') {
        if sense.trim().is_empty() {
            continue;
        }
        let parsed = parse_sense(sense);
        if parsed.stray_bracket {
            warn(warnings, WarningKind::StrayBracket);
        }
        if parsed.malformed {
            warn(warnings, WarningKind::MalformedTypeBlock);
        }
        // A sense without its own type block continues the previous sense.
        let types = match parsed.types {
            Some(t) => {
                inherited = Some(t);
                t
            }
            None => match inherited {
                Some(t) => t,
                None => {
                    warn(warnings, WarningKind::MalformedTypeBlock);
                    continue;
                }
            },
        };
        let mut kept = types;
        if !include_unclassified {
            kept.remove(NameType::Unclassified);
        }
        if kept.is_empty() || parsed.latin.is_empty() {
            continue;
        }
        out.push(NameRecord {
            surface: surface.to_string(),
            reading: reading.map(str::to_string),
            latin: parsed.latin,
            types: kept,
        });
    }
    out
}

enum Head<'a> {
    Plain(&'a str, Option<&'a str>),
    Salvaged(&'a str, Option<&'a str>),
}

fn split_head(head: &str) -> Head<'_> {
    let head = head.trim();
    match head.find('[') {
        None => {
            if head.contains(']') {
                Head::Salvaged(head.trim_end_matches(']').trim(), None)
            } else {
                Head::Plain(head, None)
            }
        }
        Some(open) => {
            let surface = head[..open].trim();
            let rest = &head[open + 1..];
            match rest.find(']') {
                Some(close) => {
                    let reading = rest[..close].trim();
                    Head::Plain(surface, (!reading.is_empty()).then_some(reading))
                }
                None => {
                    // Backslash typed in place of the closing bracket.
                    let reading = rest.trim().trim_end_matches('\\').trim();
                    Head::Salvaged(surface, (!reading.is_empty()).then_some(reading))
                }
            }
        }
    }
}

struct Sense {
    latin: String,
    types: Option<NameTypes>,
    stray_bracket: bool,
    malformed: bool,
}

fn parse_sense(sense: &str) -> Sense {
    let mut types: Option<NameTypes> = None;
    let mut text = String::new();
    let mut stray_bracket = false;
    let mut malformed = false;

    let mut rest = sense;
    while let Some(pos) = rest.find(['(', ')']) {
        let (before, after) = rest.split_at(pos);
        text.push_str(before);
        if let Some(tail) = after.strip_prefix(')') {
            stray_bracket = true;
            rest = tail;
            continue;
        }
        match after[1..].find(')') {
            Some(close) => {
                let inner = &after[1..1 + close];
                match classify_block(inner) {
                    Some(t) => types = Some(types.unwrap_or_default().union(t)),
                    None => {
                        // Commentary such as "(film)" is not part of the name.
                    }
                }
                rest = &after[close + 2..];
            }
            None => {
                malformed = true;
                rest = "";
            }
        }
    }
    text.push_str(rest);

    Sense {
        latin: text.split_whitespace().collect::<Vec<_>>().join(" "),
        types,
        stray_bracket,
        malformed,
    }
}

/// Parses a whole dictionary stream.
///
/// Records identical in surface, Latin form and types are kept once, in first
/// occurrence order.
pub fn parse_file<R: BufRead>(
    reader: R,
    include_unclassified: bool,
) -> Result<(Vec<NameRecord>, Vec<ParseWarning>), EnamdictError> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut seen: HashSet<(String, String, NameTypes)> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| EnamdictError::Io {
            line: idx + 1,
            source,
        })?;
        for rec in parse_entry_line_with_warnings(idx + 1, &line, include_unclassified, &mut warnings) {
            if seen.insert((rec.surface.clone(), rec.latin.clone(), rec.types)) {
                records.push(rec);
            }
        }
    }
    Ok((records, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn types(codes: &str) -> NameTypes {
        codes.split(',').filter_map(NameType::from_code).collect()
    }

    #[test]
    fn parses_basic_entry() {
        let recs = parse_entry_line("森田 [もりだ] /Morida (s)/", false);
        assert_eq!(
            recs,
            vec![NameRecord {
                surface: "森田".into(),
                reading: Some("もりだ".into()),
                latin: "Morida".into(),
                types: types("s"),
            }]
        );
    }

    #[test]
    fn commentary_and_unclassified_are_dropped() {
        assert!(parse_entry_line("スターウォーズ /(u) Star Wars (film)/", false).is_empty());
        let recs = parse_entry_line("スターウォーズ /(u) Star Wars (film)/", true);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].latin, "Star Wars");
        assert_eq!(recs[0].reading, None);
    }

    #[test]
    fn multi_sense_line() {
        let line = "イブ /(f) Eve/(u) Ib/Ibu (f)/(m) Yves/";
        let recs = parse_entry_line(line, false);
        let got: Vec<_> = recs.iter().map(|r| (r.latin.as_str(), r.types)).collect();
        assert_eq!(got, vec![("Eve", types("f")), ("Ibu", types("f")), ("Yves", types("m"))]);
        let recs = parse_entry_line(line, true);
        assert_eq!(recs.len(), 4);
        assert_eq!(recs[1].latin, "Ib");
        assert_eq!(recs[1].types, types("u"));
    }

    #[test]
    fn full_person_names_are_dropped() {
        assert!(parse_entry_line("中村武志 [なかむらたけし] /Nakamura Takeshi (h)/", true).is_empty());
    }

    #[test]
    fn filter_types_cases() {
        assert_eq!(filter_types("s"), types("s"));
        assert_eq!(filter_types("film"), NameTypes::empty());
        assert_eq!(filter_types("f,m"), types("f,m"));
        assert_eq!(filter_types("p"), NameTypes::empty());
        assert_eq!(filter_types("u,f"), types("u,f"));
        assert_eq!(filter_types("s,x"), NameTypes::empty());
    }

    #[test]
    fn unclassified_union_keeps_person_part() {
        let recs = parse_entry_line("みなみ /(u,f) Minami/", false);
        assert_eq!(recs[0].types, types("f"));
        let recs = parse_entry_line("みなみ /(u,f) Minami/", true);
        assert_eq!(recs[0].types, types("u,f"));
    }

    #[test]
    fn apostrophes() {
        let rec = NameRecord {
            surface: "真一".into(),
            reading: None,
            latin: "Shin'ichi".into(),
            types: types("g"),
        };
        let v = apostrophe_variants(&rec);
        assert_eq!(v.len(), 2);
        assert_eq!(v[0], rec);
        assert_eq!(v[1].latin, "Shinichi");
        let plain = NameRecord { latin: "Morida".into(), ..rec.clone() };
        assert_eq!(apostrophe_variants(&plain), vec![plain.clone()]);
        let junya = NameRecord { latin: "Jun'ya".into(), ..rec };
        let v: Vec<_> = apostrophe_variants(&junya).into_iter().map(|r| r.latin).collect();
        assert_eq!(v, ["Jun'ya", "Junya"]);
    }

    #[test]
    fn inconsistent_lines_are_salvaged() {
        let mut w = Vec::new();
        let recs = parse_entry_line_with_warnings(1, "甲子太郎 [かしたろう] /Kashitarou (m)", false, &mut w);
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].latin, "Kashitarou");
        assert_eq!(w[0].kind, WarningKind::MissingTerminalSlash);

        let mut w = Vec::new();
        let recs = parse_entry_line_with_warnings(
            2,
            "近松秋江 [ちかまつしゅうこう] /Chikamatsu Shuukou) (h)/",
            true,
            &mut w,
        );
        assert!(recs.is_empty());
        assert_eq!(w[0].kind, WarningKind::StrayBracket);

        let mut w = Vec::new();
        let line = "キルギス共和国 [キルギスきょうわこく\\ /(p) Kyrgyz Republic/Kirghiz Republic/";
        let recs = parse_entry_line_with_warnings(3, line, true, &mut w);
        assert!(recs.is_empty());
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].kind, WarningKind::StrayBracket);
        assert_eq!(w[0].raw, line);
    }

    #[test]
    fn untyped_follow_up_sense_inherits() {
        let recs = parse_entry_line("健 [けん] /(m) Ken/Kenn/", false);
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].types, types("m"));
    }

    #[test]
    fn parse_file_dedups_and_handles_empty() {
        let (r, w) = parse_file("".as_bytes(), false).unwrap();
        assert!(r.is_empty() && w.is_empty());
        let text = "森田 [もりだ] /Morida (s)/\n森田 [もりだ] /Morida (s)/\n";
        let (r, _) = parse_file(text.as_bytes(), false).unwrap();
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn invalid_utf8_is_io_error() {
        let bytes: &[u8] = b"\xa4\xa2 /Ai (f)/\n";
        assert!(matches!(parse_file(bytes, false), Err(EnamdictError::Io { line: 1, .. })));
    }
}
