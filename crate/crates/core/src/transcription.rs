//! Latin transcription handling for Japanese names.
//!
//! Dictionary entries are in Hepburn with doubled long vowels and apostrophe
//! syllable separators. Author names in the wild use kunrei spellings,
//! `h`-lengthened vowels (`Gotoh`), dropped long vowels, `m` before labials,
//! hyphens, fullwidth letters and macrons. The functions here normalize such
//! input and enumerate the spellings worth probing the dictionary with.

use std::collections::HashSet;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Default bound on the number of single-vowel sites that get expanded.
pub const DEFAULT_MAX_VOWEL_SITES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptionError {
    #[error("name is empty after normalization")]
    EmptyName,
    #[error("{sites} vowel sites exceed the expansion cap of {cap}")]
    VariantExplosion { sites: usize, cap: usize },
}

/// Latin text restricted to ASCII, with the indices of vowels known to be long.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalizedLatin {
    pub text: String,
    /// Character indices into `text` of vowels that carried a length mark or
    /// were followed by a lengthening `h`.
    pub lengthening: Vec<usize>,
}

impl NormalizedLatin {
    pub fn plain(text: impl Into<String>) -> Self {
        NormalizedLatin {
            text: text.into(),
            lengthening: Vec::new(),
        }
    }
}

const HEPBURN_TABLE: [(&str, &str); 18] = [
    ("sya", "sha"),
    ("syo", "sho"),
    ("syu", "shu"),
    ("zya", "ja"),
    ("zyo", "jo"),
    ("zyu", "ju"),
    ("tya", "cha"),
    ("tyo", "cho"),
    ("tyu", "chu"),
    ("jya", "ja"),
    ("jyo", "jo"),
    ("jyu", "ju"),
    ("tu", "tsu"),
    ("ti", "chi"),
    ("si", "shi"),
    ("hu", "fu"),
    ("zi", "ji"),
    ("l", "r"),
];

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c.to_ascii_lowercase(), 'a' | 'i' | 'u' | 'e' | 'o')
}

/// Converts kunrei-style spellings to Hepburn.
pub fn to_hepburn(name: &str) -> String {
    to_hepburn_norm(&NormalizedLatin::plain(name)).text
}

/// Hepburn conversion that carries length marks along.
pub(crate) fn to_hepburn_norm(input: &NormalizedLatin) -> NormalizedLatin {
    let chars: Vec<char> = input.text.chars().collect();
    let mut out = String::with_capacity(input.text.len() + 4);
    let mut out_len = 0usize;
    // index map: input char index -> output char index of the same sound
    let mut map = vec![0usize; chars.len()];
    let mut i = 0;
    'scan: while i < chars.len() {
        for (pattern, replacement) in HEPBURN_TABLE {
            let n = pattern.len();
            if i + n > chars.len() {
                continue;
            }
            let window: String = chars[i..i + n].iter().collect();
            let capital = capitalize(pattern);
            let repl = if window == pattern {
                replacement.to_string()
            } else if window == capital {
                capitalize(replacement)
            } else {
                continue;
            };
            // "sh" and "ch" are already Hepburn digraphs.
            if pattern == "hu" && out.ends_with(['s', 'S', 'c', 'C']) {
                continue;
            }
            let r_len = repl.chars().count();
            for k in 0..n {
                map[i + k] = if k == n - 1 {
                    out_len + r_len - 1
                } else {
                    out_len
                };
            }
            out.push_str(&repl);
            out_len += r_len;
            i += n;
            continue 'scan;
        }
        map[i] = out_len;
        out.push(chars[i]);
        out_len += 1;
        i += 1;
    }
    NormalizedLatin {
        text: out,
        lengthening: input.lengthening.iter().map(|&p| map[p]).collect(),
    }
}

fn length_mark(c: char) -> bool {
    // combining macron, combining circumflex
    matches!(c, '\u{0304}' | '\u{0302}')
}

/// Maps fullwidth letters and length-marked vowels to plain ASCII, trims and
/// collapses whitespace. Case is preserved.
pub fn normalize_latin(raw: &str) -> Result<NormalizedLatin, TranscriptionError> {
    let mut text = String::with_capacity(raw.len());
    let mut lengthening = Vec::new();
    let mut pending_space = false;

    for c in raw.nfkc() {
        let mapped = match c {
            '\u{2018}' | '\u{2019}' | '\u{02BC}' | '\u{00B4}' | '`' => Some('\''),
            '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2212}' => Some('-'),
            c if c.is_whitespace() => Some(' '),
            _ => None,
        };
        let (base, marked) = match mapped {
            Some(m) => (m, false),
            None => {
                let mut decomposed = std::iter::once(c).nfd();
                let base = decomposed.next().unwrap_or(c);
                (base, decomposed.any(length_mark))
            }
        };
        if base == ' ' {
            pending_space = !text.is_empty();
            continue;
        }
        if !base.is_ascii() || base.is_ascii_control() {
            continue;
        }
        if pending_space {
            text.push(' ');
            pending_space = false;
        }
        if marked && is_vowel(base) {
            lengthening.push(text.len());
        }
        text.push(base);
    }

    if text.is_empty() {
        return Err(TranscriptionError::EmptyName);
    }
    Ok(NormalizedLatin { text, lengthening })
}

/// Removes `h` used as a vowel lengthener (`Gotoh`, `Ohta`).
pub fn strip_length_h(name: &str) -> NormalizedLatin {
    strip_length_h_norm(&NormalizedLatin::plain(name))
}

/// An `h` is a lengthener when it follows `o` or `u` and precedes a consonant
/// or the end of a word.
pub(crate) fn strip_length_h_norm(input: &NormalizedLatin) -> NormalizedLatin {
    let chars: Vec<char> = input.text.chars().collect();
    let mut out = String::with_capacity(input.text.len());
    let mut map = vec![0usize; chars.len()];
    let mut lengthening = Vec::new();
    let mut out_len = 0usize;
    for (i, &c) in chars.iter().enumerate() {
        let lengthener = matches!(c, 'h' | 'H')
            && i > 0
            && matches!(chars[i - 1].to_ascii_lowercase(), 'o' | 'u')
            && match chars.get(i + 1) {
                None => true,
                Some(&n) => !n.is_ascii_alphabetic() || !is_vowel(n),
            };
        if lengthener {
            map[i] = out_len - 1;
            lengthening.push(out_len - 1);
            continue;
        }
        map[i] = out_len;
        out.push(c);
        out_len += 1;
    }
    lengthening.extend(input.lengthening.iter().map(|&p| map[p]));
    lengthening.sort_unstable();
    lengthening.dedup();
    NormalizedLatin {
        text: out,
        lengthening,
    }
}

const DOUBLED: [(char, char); 7] = [
    ('o', 'u'),
    ('o', 'o'),
    ('e', 'e'),
    ('e', 'i'),
    ('a', 'a'),
    ('i', 'i'),
    ('u', 'u'),
];

fn doublings(v: char) -> &'static [char] {
    match v.to_ascii_lowercase() {
        'a' => &['a'],
        'i' => &['i'],
        'u' => &['u'],
        'e' => &['e', 'i'],
        'o' => &['o', 'u'],
        _ => &[],
    }
}

enum Segment {
    Fixed(String),
    Site(Vec<String>),
}

fn segments(base: &NormalizedLatin) -> Vec<Segment> {
    let chars: Vec<char> = base.text.chars().collect();
    let mut segs = Vec::new();
    let mut fixed = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !is_vowel(c) {
            fixed.push(c);
            i += 1;
            continue;
        }
        if let Some(&n) = chars.get(i + 1) {
            let pair = (c.to_ascii_lowercase(), n.to_ascii_lowercase());
            if DOUBLED.contains(&pair) {
                fixed.push(c);
                fixed.push(n);
                i += 2;
                continue;
            }
        }
        if !fixed.is_empty() {
            segs.push(Segment::Fixed(std::mem::take(&mut fixed)));
        }
        let mut options = Vec::new();
        if !base.lengthening.contains(&i) {
            options.push(c.to_string());
        }
        for &d in doublings(c) {
            options.push(format!("{c}{d}"));
        }
        segs.push(Segment::Site(options));
        i += 1;
    }
    if !fixed.is_empty() {
        segs.push(Segment::Fixed(fixed));
    }
    segs
}

/// Number of single-vowel sites `expand_double_vowels` would vary.
pub fn vowel_site_count(base: &NormalizedLatin) -> usize {
    segments(base)
        .iter()
        .filter(|s| matches!(s, Segment::Site(_)))
        .count()
}

/// Enumerates spellings with each single vowel optionally doubled.
///
/// Vowels at recorded lengthening positions are always doubled. Existing
/// doubled vowels are left alone. The first vowel site varies fastest.
pub fn expand_double_vowels(
    base: &NormalizedLatin,
    max_sites: usize,
) -> Result<Vec<String>, TranscriptionError> {
    let segs = segments(base);
    let sites = segs
        .iter()
        .filter(|s| matches!(s, Segment::Site(_)))
        .count();
    if sites > max_sites {
        return Err(TranscriptionError::VariantExplosion {
            sites,
            cap: max_sites,
        });
    }
    let radices: Vec<usize> = segs
        .iter()
        .filter_map(|s| match s {
            Segment::Site(o) => Some(o.len()),
            Segment::Fixed(_) => None,
        })
        .collect();
    let total: usize = radices.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; radices.len()];
    for _ in 0..total {
        let mut s = String::with_capacity(base.text.len() * 2);
        let mut site = 0;
        for seg in &segs {
            match seg {
                Segment::Fixed(f) => s.push_str(f),
                Segment::Site(options) => {
                    s.push_str(&options[digits[site]]);
                    site += 1;
                }
            }
        }
        out.push(s);
        for (d, &r) in digits.iter_mut().zip(&radices) {
            *d += 1;
            if *d < r {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// The unmodified spelling (when allowed) plus the variant with every single
/// vowel doubled by its first doubling. Used when full expansion is too large.
pub fn minimal_vowel_variants(base: &NormalizedLatin) -> Vec<String> {
    let segs = segments(base);
    let mut plain = String::new();
    let mut doubled = String::new();
    for seg in &segs {
        match seg {
            Segment::Fixed(f) => {
                plain.push_str(f);
                doubled.push_str(f);
            }
            Segment::Site(options) => {
                plain.push_str(&options[0]);
                let full = options.iter().find(|o| o.len() == 2).unwrap_or(&options[0]);
                doubled.push_str(full);
            }
        }
    }
    if plain == doubled {
        vec![plain]
    } else {
        vec![plain, doubled]
    }
}

/// Input plus every combination of `n`/`m` swaps before `b` or `p`.
pub fn consonant_variants(name: &str) -> Vec<String> {
    consonant_variants_norm(&NormalizedLatin::plain(name))
        .into_iter()
        .map(|n| n.text)
        .collect()
}

pub(crate) fn consonant_variants_norm(input: &NormalizedLatin) -> Vec<NormalizedLatin> {
    let chars: Vec<char> = input.text.chars().collect();
    let sites: Vec<usize> = (0..chars.len().saturating_sub(1))
        .filter(|&i| {
            matches!(chars[i], 'm' | 'n' | 'M' | 'N')
                && matches!(chars[i + 1].to_ascii_lowercase(), 'b' | 'p')
        })
        .collect();
    let mut out = Vec::with_capacity(1 << sites.len().min(16));
    for mask in 0u32..(1u32 << sites.len().min(16)) {
        let mut v = chars.clone();
        for (bit, &pos) in sites.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                v[pos] = match v[pos] {
                    'm' => 'n',
                    'n' => 'm',
                    'M' => 'N',
                    _ => 'M',
                };
            }
        }
        out.push(NormalizedLatin {
            text: v.into_iter().collect(),
            lengthening: input.lengthening.clone(),
        });
    }
    out
}

/// Input, hyphens as apostrophes, apostrophes as hyphens, and both removed.
pub fn separator_variants(name: &str) -> Vec<String> {
    separator_variants_norm(&NormalizedLatin::plain(name))
        .into_iter()
        .map(|n| n.text)
        .collect()
}

pub(crate) fn separator_variants_norm(input: &NormalizedLatin) -> Vec<NormalizedLatin> {
    let swap = |from: char, to: char| NormalizedLatin {
        text: input.text.replace(from, &to.to_string()),
        lengthening: input.lengthening.clone(),
    };
    let mut removed = String::with_capacity(input.text.len());
    let mut map = Vec::with_capacity(input.text.len());
    for c in input.text.chars() {
        map.push(removed.len().saturating_sub(usize::from(matches!(c, '\'' | '-'))));
        if !matches!(c, '\'' | '-') {
            removed.push(c);
        }
    }
    let candidates = [
        input.clone(),
        swap('-', '\''),
        swap('\'', '-'),
        NormalizedLatin {
            text: removed,
            lengthening: input.lengthening.iter().map(|&p| map[p]).collect(),
        },
    ];
    let mut seen = HashSet::new();
    candidates
        .into_iter()
        .filter(|c| seen.insert(c.text.clone()))
        .collect()
}

fn variants_from(
    name: &str,
    expand: impl Fn(&NormalizedLatin) -> Result<Vec<String>, TranscriptionError>,
) -> Result<Vec<String>, TranscriptionError> {
    let normalized = normalize_latin(name)?;
    let stripped = strip_length_h_norm(&to_hepburn_norm(&normalized));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |s: String| {
        if seen.insert(s.clone()) {
            out.push(s);
        }
    };
    push(name.to_string());
    for sep in separator_variants_norm(&stripped) {
        for cons in consonant_variants_norm(&sep) {
            for v in expand(&cons)? {
                push(v);
            }
        }
    }
    Ok(out)
}

/// All spellings probed against the dictionary for one Latin name token:
/// Hepburn conversion, lengthening-`h` removal, separator, consonant and
/// vowel-doubling variants. The input comes first.
pub fn latin_lookup_variants(name: &str, max_sites: usize) -> Result<Vec<String>, TranscriptionError> {
    variants_from(name, |n| expand_double_vowels(n, max_sites))
}

/// Like [`latin_lookup_variants`], but names with too many vowel sites get
/// only the unmodified and fully doubled spellings instead of an error.
pub fn latin_lookup_variants_bounded(name: &str, max_sites: usize) -> Result<Vec<String>, TranscriptionError> {
    variants_from(name, |n| match expand_double_vowels(n, max_sites) {
        Err(TranscriptionError::VariantExplosion { .. }) => Ok(minimal_vowel_variants(n)),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(v: Vec<String>) -> BTreeSet<String> {
        v.into_iter().collect()
    }

    fn strs(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn hepburn_examples() {
        assert_eq!(to_hepburn("Kenzi"), "Kenji");
        assert_eq!(to_hepburn("Tiba"), "Chiba");
        assert_eq!(to_hepburn("Nakamura"), "Nakamura");
        assert_eq!(to_hepburn("Syuuhei"), "Shuuhei");
        assert_eq!(to_hepburn("Hukuda"), "Fukuda");
        assert_eq!(to_hepburn("Tyuuzi"), "Chuuji");
        assert_eq!(to_hepburn("Lyo"), "Ryo");
    }

    #[test]
    fn hu_after_digraph_is_kept() {
        assert_eq!(to_hepburn("shu"), "shu");
        assert_eq!(to_hepburn("chu"), "chu");
        assert_eq!(to_hepburn("syu"), "shu");
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_latin("Ｋａｉ").unwrap().text, "Kai");
        let g = normalize_latin("Gotō").unwrap();
        assert_eq!(g.text, "Goto");
        assert_eq!(g.lengthening, vec![3]);
        let g = normalize_latin("Gotô").unwrap();
        assert_eq!(g.lengthening, vec![3]);
        assert_eq!(normalize_latin("  Morida ").unwrap().text, "Morida");
        assert_eq!(normalize_latin(" Shinsuke \t  Mori ").unwrap().text, "Shinsuke Mori");
        assert_eq!(normalize_latin("Ｔｏｒｕ　Ｍｏｔｏ’ｏｋａ").unwrap().text, "Toru Moto'oka");
        assert_eq!(normalize_latin("   "), Err(TranscriptionError::EmptyName));
        assert_eq!(normalize_latin("森"), Err(TranscriptionError::EmptyName));
    }

    #[test]
    fn strip_h_examples() {
        let g = strip_length_h("Gotoh");
        assert_eq!(g.text, "Goto");
        assert_eq!(g.lengthening, vec![3]);
        let h = strip_length_h("Hitoshi");
        assert_eq!(h.text, "Hitoshi");
        assert!(h.lengthening.is_empty());
        let o = strip_length_h("Ohta");
        assert_eq!(o.text, "Ota");
        assert_eq!(o.lengthening, vec![0]);
        assert_eq!(strip_length_h("Kouhei").text, "Kouhei");
        assert_eq!(strip_length_h("Ohya").text, "Oya");
    }

    #[test]
    fn expansion_examples() {
        let gotoh = strip_length_h("Gotoh");
        let v = expand_double_vowels(&gotoh, 8).unwrap();
        assert_eq!(
            set(v),
            strs(&["Gotoo", "Gotou", "Gootoo", "Goutoo", "Gootou", "Goutou"])
        );
        let v = expand_double_vowels(&NormalizedLatin::plain("Goto"), 8).unwrap();
        assert_eq!(v.len(), 9);
        assert_eq!(
            set(v),
            strs(&["Goto", "Gooto", "Gouto", "Gotoo", "Gotou", "Gootoo", "Goutoo", "Gootou", "Goutou"])
        );
        let v = expand_double_vowels(&NormalizedLatin::plain("Mori"), 8).unwrap();
        assert_eq!(v, ["Mori", "Moori", "Mouri", "Morii", "Moorii", "Mourii"]);
    }

    #[test]
    fn existing_doubles_are_one_site() {
        let v = expand_double_vowels(&NormalizedLatin::plain("Yuuta"), 8).unwrap();
        assert_eq!(v, ["Yuuta", "Yuutaa"]);
    }

    #[test]
    fn explosion_cap() {
        let long = NormalizedLatin::plain("Aiueoaiueo");
        assert_eq!(
            expand_double_vowels(&long, 8),
            Err(TranscriptionError::VariantExplosion { sites: 10, cap: 8 })
        );
        assert!(expand_double_vowels(&long, 10).is_ok());
        assert_eq!(minimal_vowel_variants(&NormalizedLatin::plain("Mori")), ["Mori", "Moorii"]);
        let bounded = latin_lookup_variants_bounded("Aiueoaiueo", 8).unwrap();
        assert_eq!(bounded, ["Aiueoaiueo", "Aaiiuueeooaaiiuueeoo"]);
        assert!(matches!(
            latin_lookup_variants("Aiueoaiueo", 8),
            Err(TranscriptionError::VariantExplosion { .. })
        ));
    }

    #[test]
    fn consonant_examples() {
        assert_eq!(consonant_variants("Kambe"), ["Kambe", "Kanbe"]);
        assert_eq!(consonant_variants("Mori"), ["Mori"]);
        assert_eq!(consonant_variants("Kampo"), ["Kampo", "Kanpo"]);
        assert_eq!(consonant_variants("Sampei Kanbe").len(), 4);
    }

    #[test]
    fn separator_examples() {
        let v = separator_variants("Shin-ichi");
        assert!(v.contains(&"Shin'ichi".to_string()));
        assert!(v.contains(&"Shinichi".to_string()));
        assert_eq!(v[0], "Shin-ichi");
        assert_eq!(separator_variants("Shinichi"), ["Shinichi"]);
        let v = separator_variants("Moto'oka");
        assert!(v.contains(&"Motooka".to_string()));
        assert!(v.contains(&"Moto-oka".to_string()));
    }

    #[test]
    fn separator_removal_keeps_lengthening_on_the_vowel() {
        let n = NormalizedLatin {
            text: "Shin'ichi Ko".into(),
            lengthening: vec![11],
        };
        let removed = separator_variants_norm(&n).pop().unwrap();
        assert_eq!(removed.text, "Shinichi Ko");
        assert_eq!(&removed.text[removed.lengthening[0]..removed.lengthening[0] + 1], "o");
    }

    #[test]
    fn lookup_variants() {
        let v = latin_lookup_variants("Gotoh", 8).unwrap();
        assert_eq!(v[0], "Gotoh");
        assert!(v.contains(&"Gotou".to_string()));
        assert!(v.contains(&"Gotoo".to_string()));
        assert!(!v.contains(&"Goto".to_string()));
        let v = latin_lookup_variants("Mori", 8).unwrap();
        for s in ["Mori", "Moori", "Mouri"] {
            assert!(v.contains(&s.to_string()));
        }
        assert_eq!(latin_lookup_variants("Kai", 8).unwrap()[0], "Kai");
        let v = latin_lookup_variants("Shin-ichi", 8).unwrap();
        assert!(v.contains(&"Shin'ichi".to_string()));
        let v = latin_lookup_variants("Kambe", 8).unwrap();
        assert!(v.contains(&"Kanbe".to_string()));
        let v = latin_lookup_variants("Satō", 8).unwrap();
        assert!(v.contains(&"Satou".to_string()) && !v.contains(&"Sato".to_string()));
    }
}
