//! Resolution of Japanese author names.
//!
//! An author arrives with a Latin name, a kanji name, or both. The Latin name
//! is split into given and family parts, the kanji name is split by trying
//! every cut point against the name dictionary, and the outcome is summarized
//! as a [`NameStatus`]. Authors with only a kanji name get Latin candidates
//! built from every dictionary reading of each accepted cut.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::enamdict::{apostrophe_variants, NameRecord, NameType, NameTypes};
use crate::transcription::{
    latin_lookup_variants_bounded, normalize_latin, DEFAULT_MAX_VOWEL_SITES,
};

/// A given/family pair in one script.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PersonName {
    pub given: String,
    pub family: String,
}

impl PersonName {
    pub fn new(given: impl Into<String>, family: impl Into<String>) -> Self {
        PersonName {
            given: given.into(),
            family: family.into(),
        }
    }

    /// Western order, `"Given Family"`. A name anomaly repeats the full input
    /// in both parts and is shown once.
    pub fn display_latin(&self) -> String {
        if self.given == self.family {
            return self.family.clone();
        }
        match (self.given.is_empty(), self.family.is_empty()) {
            (true, _) => self.family.clone(),
            (_, true) => self.given.clone(),
            _ => format!("{} {}", self.given, self.family),
        }
    }

    /// `"Family,Given"`, the layout used for original-script names.
    pub fn family_comma_given(&self) -> String {
        format!("{},{}", self.family, self.given)
    }
}

/// Quality verdict for one author's name assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NameStatus {
    Ok,
    UndefinedLatinMissing,
    Abbreviated,
    NotFoundInDictionary,
    NoKanjiMatchingFound,
    BadDataQuality,
    PossibleNameAnomaly,
    NameAnomaly,
}

impl NameStatus {
    pub const ALL: [NameStatus; 8] = [
        NameStatus::Ok,
        NameStatus::UndefinedLatinMissing,
        NameStatus::Abbreviated,
        NameStatus::NotFoundInDictionary,
        NameStatus::NoKanjiMatchingFound,
        NameStatus::BadDataQuality,
        NameStatus::PossibleNameAnomaly,
        NameStatus::NameAnomaly,
    ];

    /// Text written into `status` elements.
    pub fn label(self) -> &'static str {
        match self {
            NameStatus::Ok => "ok",
            NameStatus::UndefinedLatinMissing => "undefined",
            NameStatus::Abbreviated => "abbreviated",
            NameStatus::NotFoundInDictionary => "not found in name dictionary",
            NameStatus::NoKanjiMatchingFound => "no kanji matching found",
            NameStatus::BadDataQuality => "bad data quality in source",
            NameStatus::PossibleNameAnomaly => "possible name anomaly",
            NameStatus::NameAnomaly => "name anomaly",
        }
    }
}

impl fmt::Display for NameStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Resolved author.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorResolution {
    pub latin: Option<PersonName>,
    pub kanji: Option<PersonName>,
    pub candidates: Vec<PersonName>,
    pub status: NameStatus,
}

impl AuthorResolution {
    /// Name shown in author lists: the Latin name, or else the kanji as given.
    pub fn display_name(&self) -> String {
        match (&self.latin, &self.kanji) {
            (Some(l), _) => l.display_latin(),
            (None, Some(k)) => format!("{}{}", k.family, k.given),
            (None, None) => String::new(),
        }
    }
}

/// In-memory name dictionary indexed by Latin spelling and by surface form.
#[derive(Debug, Clone)]
pub struct NameDictionary {
    records: Vec<NameRecord>,
    /// Lowercased Latin keys per record: the spelling as stored plus its
    /// apostrophe-free twin.
    keys: Vec<Vec<String>>,
    by_latin: HashMap<String, Vec<usize>>,
    by_surface: HashMap<String, Vec<usize>>,
    max_vowel_sites: usize,
}

impl NameDictionary {
    /// Builds the indexes. Unclassified types are discarded unless
    /// `include_unclassified` is set.
    pub fn new(records: impl IntoIterator<Item = NameRecord>, include_unclassified: bool) -> Self {
        let mut dict = NameDictionary {
            records: Vec::new(),
            keys: Vec::new(),
            by_latin: HashMap::new(),
            by_surface: HashMap::new(),
            max_vowel_sites: DEFAULT_MAX_VOWEL_SITES,
        };
        let mut seen = HashSet::new();
        for mut rec in records {
            if !include_unclassified {
                rec.types.remove(NameType::Unclassified);
            }
            if rec.types.is_empty() || rec.latin.is_empty() {
                continue;
            }
            if !seen.insert((rec.surface.clone(), rec.latin.clone(), rec.types)) {
                continue;
            }
            let idx = dict.records.len();
            let keys: Vec<String> = apostrophe_variants(&rec)
                .into_iter()
                .map(|r| r.latin.to_lowercase())
                .collect();
            for k in &keys {
                dict.by_latin.entry(k.clone()).or_default().push(idx);
            }
            dict.by_surface.entry(rec.surface.clone()).or_default().push(idx);
            dict.keys.push(keys);
            dict.records.push(rec);
        }
        dict
    }

    pub fn with_max_vowel_sites(mut self, max: usize) -> Self {
        self.max_vowel_sites = max;
        self
    }

    pub fn max_vowel_sites(&self) -> usize {
        self.max_vowel_sites
    }

    pub fn records(&self) -> &[NameRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records whose Latin form equals `latin`, ignoring case; apostrophes
    /// in the stored form are optional.
    pub fn lookup_latin(&self, latin: &str) -> impl Iterator<Item = &NameRecord> {
        self.by_latin
            .get(&latin.to_lowercase())
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    pub fn lookup_surface(&self, surface: &str) -> impl Iterator<Item = &NameRecord> {
        self.by_surface
            .get(surface)
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    fn surface_indices(&self, surface: &str) -> &[usize] {
        self.by_surface.get(surface).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Union of the types of every record any lookup variant of `token` hits.
    pub fn latin_types(&self, token: &str) -> NameTypes {
        let mut types = NameTypes::empty();
        for v in self.variants(token) {
            for rec in self.lookup_latin(&v) {
                types = types.union(rec.types);
            }
        }
        types
    }

    fn variants(&self, token: &str) -> Vec<String> {
        latin_lookup_variants_bounded(token, self.max_vowel_sites).unwrap_or_default()
    }
}

static ALGO_UPPER_FAMILY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([A-Z][a-z]+)([A-Z]{3,})$").unwrap());
static CAMEL_PAIR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([A-Z][a-z]+)([A-Z][a-z]+)$").unwrap());
static ALL_UPPER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Z]{3,}$").unwrap());

fn capitalize_word(s: &str) -> String {
    let lower = s.to_lowercase();
    let mut chars = lower.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn is_initial(token: &str) -> bool {
    let mut chars = token.chars();
    match (chars.next(), chars.next(), chars.next()) {
        (Some(c), None, _) => c.is_alphabetic(),
        (Some(c), Some('.'), None) => c.is_alphabetic(),
        _ => false,
    }
}

/// True when some token of the name is a lone letter, with or without a period.
pub fn detect_abbreviated(raw: &str) -> bool {
    raw.split(|c: char| c.is_whitespace() || c == ',')
        .flat_map(|t| t.split_inclusive('.'))
        .filter(|t| !t.is_empty())
        .any(is_initial)
}

/// Separates a full Latin name into given and family parts.
///
/// The returned status is a hint for the final verdict: `Ok` when the
/// dictionary supports the categorization, `NotFoundInDictionary` when it does
/// not, `BadDataQuality` for run-together names like `NobukazuYOSHIOKA`,
/// `PossibleNameAnomaly` for a lone token, and `NameAnomaly` when nothing can
/// be said.
pub fn split_latin_full_name(raw: &str, dict: &NameDictionary) -> (PersonName, NameStatus) {
    let raw = raw.trim();

    if let Some((family, given)) = raw.split_once(',') {
        let (family, given) = (family.trim(), given.trim());
        let ok = dict.latin_types(family).can_be_family() && dict.latin_types(given).can_be_given();
        let hint = if ok { NameStatus::Ok } else { NameStatus::NotFoundInDictionary };
        return (PersonName::new(given, family), hint);
    }

    let tokens: Vec<&str> = raw.split_whitespace().collect();
    match tokens.as_slice() {
        [] => (PersonName::new("", ""), NameStatus::NameAnomaly),
        [single] => split_single_token(single, dict),
        [a, b] => {
            let (name, found) = categorize_pair(a, b, dict);
            let hint = if found { NameStatus::Ok } else { NameStatus::NotFoundInDictionary };
            (name, hint)
        }
        [rest @ .., last] => {
            let given = rest.join(" ");
            let (name, found) = categorize_pair(&given, last, dict);
            let hint = if found { NameStatus::Ok } else { NameStatus::NotFoundInDictionary };
            (name, hint)
        }
    }
}

fn split_single_token(token: &str, dict: &NameDictionary) -> (PersonName, NameStatus) {
    if let Some(caps) = ALGO_UPPER_FAMILY.captures(token) {
        let given = caps[1].to_string();
        let family = capitalize_word(&caps[2]);
        return (PersonName::new(given, family), NameStatus::BadDataQuality);
    }
    if let Some(caps) = CAMEL_PAIR.captures(token) {
        let (name, _) = categorize_pair(&caps[1], &caps[2], dict);
        return (name, NameStatus::BadDataQuality);
    }
    if ALL_UPPER.is_match(token) {
        return (
            PersonName::new("", capitalize_word(token)),
            NameStatus::PossibleNameAnomaly,
        );
    }
    let types = dict.latin_types(token);
    if types.can_be_family() {
        (PersonName::new("", token), NameStatus::PossibleNameAnomaly)
    } else if types.can_be_given() {
        (PersonName::new(token, ""), NameStatus::PossibleNameAnomaly)
    } else {
        (PersonName::new(token, token), NameStatus::NameAnomaly)
    }
}

/// Orders two tokens as (given, family). Input order wins unless only the
/// reversed order is supported by the dictionary. The flag reports whether any
/// orientation was supported.
fn categorize_pair(a: &str, b: &str, dict: &NameDictionary) -> (PersonName, bool) {
    let types_of = |t: &str| {
        if is_initial(t) {
            // An initial fits either role.
            [NameType::Surname, NameType::Given].into_iter().collect()
        } else {
            dict.latin_types(t)
        }
    };
    let (ta, tb) = (types_of(a), types_of(b));
    if ta.can_be_given() && tb.can_be_family() {
        (PersonName::new(a, b), true)
    } else if ta.can_be_family() && tb.can_be_given() {
        (PersonName::new(b, a), true)
    } else {
        (PersonName::new(a, b), false)
    }
}

enum Probe {
    Any,
    Initial(char),
    Spellings(HashSet<String>),
}

impl Probe {
    fn new(part: &str, dict: &NameDictionary) -> Probe {
        let part = part.trim();
        if part.is_empty() {
            return Probe::Any;
        }
        if is_initial(part) {
            let c = part.chars().next().unwrap_or(' ');
            return Probe::Initial(c.to_ascii_lowercase());
        }
        Probe::Spellings(dict.variants(part).into_iter().map(|v| v.to_lowercase()).collect())
    }

    fn accepts(&self, keys: &[String]) -> bool {
        match self {
            Probe::Any => true,
            Probe::Initial(c) => keys.iter().any(|k| k.starts_with(*c)),
            Probe::Spellings(set) => keys.iter().any(|k| set.contains(k)),
        }
    }

    fn is_initial(&self) -> bool {
        matches!(self, Probe::Initial(_))
    }
}

/// Candidate cut points of a kanji name as (family, given). An explicit comma
/// fixes the cut; otherwise every interior position is tried, left to right.
fn kanji_splits(kanji: &str) -> Vec<(String, String)> {
    if let Some((f, g)) = kanji.split_once([',', '，', '、']) {
        return vec![(f.to_string(), g.to_string())];
    }
    let chars: Vec<char> = kanji.chars().collect();
    (1..chars.len())
        .map(|i| (chars[..i].iter().collect(), chars[i..].iter().collect()))
        .collect()
}

fn compact_kanji(raw: &str) -> String {
    raw.chars().filter(|c| !c.is_whitespace()).collect()
}

fn accepted_splits(latin: &PersonName, kanji: &str, dict: &NameDictionary) -> (Vec<(String, String)>, bool) {
    let family = Probe::new(&latin.family, dict);
    let given = Probe::new(&latin.given, dict);
    let abbreviated = family.is_initial() || given.is_initial();
    let accepted = kanji_splits(kanji)
        .into_iter()
        .filter(|(f, g)| {
            let fam_ok = dict
                .surface_indices(f)
                .iter()
                .any(|&i| dict.records[i].types.can_be_family() && family.accepts(&dict.keys[i]));
            fam_ok
                && dict
                    .surface_indices(g)
                    .iter()
                    .any(|&i| dict.records[i].types.can_be_given() && given.accepts(&dict.keys[i]))
        })
        .collect();
    (accepted, abbreviated)
}

/// Assigns the parts of a kanji name to an already split Latin name.
///
/// The first accepted cut wins. Abbreviated Latin names resolve to
/// `Abbreviated` unless exactly one cut fits the initials, which is reported
/// as a `PossibleNameAnomaly`.
pub fn match_latin_kanji(latin: &PersonName, kanji: &str, dict: &NameDictionary) -> AuthorResolution {
    let kanji = compact_kanji(kanji);
    if kanji.is_empty() {
        let abbreviated = is_initial(&latin.given) || is_initial(&latin.family);
        let status = if abbreviated {
            NameStatus::Abbreviated
        } else if dict.latin_types(&latin.family).can_be_family()
            && dict.latin_types(&latin.given).can_be_given()
        {
            NameStatus::Ok
        } else {
            NameStatus::NotFoundInDictionary
        };
        return AuthorResolution {
            latin: Some(latin.clone()),
            kanji: None,
            candidates: Vec::new(),
            status,
        };
    }

    let (accepted, abbreviated) = accepted_splits(latin, &kanji, dict);
    let (status, split) = if abbreviated {
        if accepted.len() == 1 {
            (NameStatus::PossibleNameAnomaly, accepted.into_iter().next())
        } else {
            (NameStatus::Abbreviated, None)
        }
    } else {
        match accepted.into_iter().next() {
            Some(s) => (NameStatus::Ok, Some(s)),
            None => (NameStatus::NoKanjiMatchingFound, None),
        }
    };
    let kanji_name = match split {
        Some((f, g)) => PersonName::new(g, f),
        None => PersonName::new("", kanji),
    };
    AuthorResolution {
        latin: Some(latin.clone()),
        kanji: Some(kanji_name),
        candidates: Vec::new(),
        status,
    }
}

fn readings(dict: &NameDictionary, surface: &str, family: bool) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for rec in dict.lookup_surface(surface) {
        let fits = if family {
            rec.types.can_be_family()
        } else {
            rec.types.can_be_given()
        };
        if fits && !out.contains(&rec.latin) {
            out.push(rec.latin.clone());
        }
    }
    out
}

/// Latin name candidates for a kanji-only author: every (given × family)
/// reading pair of every accepted cut, given varying fastest.
pub fn kanji_name_candidates(kanji: &str, dict: &NameDictionary) -> Vec<PersonName> {
    let kanji = compact_kanji(kanji);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (f, g) in kanji_splits(&kanji) {
        let families = readings(dict, &f, true);
        let givens = readings(dict, &g, false);
        for family in &families {
            for given in &givens {
                let name = PersonName::new(given.clone(), family.clone());
                if seen.insert(name.clone()) {
                    out.push(name);
                }
            }
        }
    }
    out
}

fn first_candidate_split(kanji: &str, dict: &NameDictionary) -> Option<PersonName> {
    kanji_splits(kanji).into_iter().find_map(|(f, g)| {
        let fam = !readings(dict, &f, true).is_empty();
        let giv = !readings(dict, &g, false).is_empty();
        (fam && giv).then(|| PersonName::new(g, f))
    })
}

/// Resolves one author from whatever name forms the source supplied.
pub fn resolve_author(latin_raw: Option<&str>, kanji_raw: Option<&str>, dict: &NameDictionary) -> AuthorResolution {
    let kanji = kanji_raw.map(compact_kanji).filter(|k| !k.is_empty());
    let latin = latin_raw.and_then(|l| normalize_latin(l).ok());

    let Some(latin) = latin else {
        return match kanji {
            Some(k) => AuthorResolution {
                latin: None,
                candidates: kanji_name_candidates(&k, dict),
                kanji: Some(first_candidate_split(&k, dict).unwrap_or_else(|| PersonName::new("", k.clone()))),
                status: NameStatus::UndefinedLatinMissing,
            },
            None => AuthorResolution {
                latin: None,
                kanji: None,
                candidates: Vec::new(),
                status: NameStatus::NameAnomaly,
            },
        };
    };

    let abbreviated = detect_abbreviated(&latin.text);
    let (name, hint) = split_latin_full_name(&latin.text, dict);

    let Some(kanji) = kanji else {
        let status = if abbreviated { NameStatus::Abbreviated } else { hint };
        return AuthorResolution {
            latin: Some(name),
            kanji: None,
            candidates: Vec::new(),
            status,
        };
    };

    let mut resolution = match_latin_kanji(&name, &kanji, dict);
    let swapped = PersonName::new(name.family.clone(), name.given.clone());
    if resolution.status == NameStatus::NoKanjiMatchingFound && !name.given.is_empty() && !name.family.is_empty() {
        // Family-first Latin input without a comma.
        let retry = match_latin_kanji(&swapped, &kanji, dict);
        if retry.status == NameStatus::Ok {
            resolution = retry;
        }
    }
    if !abbreviated
        && matches!(
            hint,
            NameStatus::BadDataQuality | NameStatus::PossibleNameAnomaly | NameStatus::NameAnomaly
        )
    {
        resolution.status = hint;
    }
    resolution
}
