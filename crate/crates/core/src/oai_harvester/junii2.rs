//! Mapping of junii2 metadata (and the overlapping oai_dc elements) onto
//! [`HarvestedPublication`].
//!
//! | element                         | field            |
//! |---------------------------------|------------------|
//! | `title`, `alternative`          | `titles`         |
//! | `creator`                       | `creators`       |
//! | `NIItype`, else `type`          | publication_type |
//! | `dateofissued`, else `date`     | `date`           |
//! | `volume`                        | `volume`         |
//! | `issue`                         | `number`         |
//! | `spage`, `epage`                | `pages`          |
//! | `language`                      | `language`       |
//! | `URI`, else `identifier` (http) | `source_url`     |
//! | `jtitle`                        | `journal`        |
//! | `contributor`                   | `contributors`   |
//! | `description`                   | `descriptions`   |

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use serde::{Deserialize, Serialize};

use crate::dblp_corpus::resolve_reference;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Ja,
    En,
    Other,
}

impl Language {
    pub fn from_tag(tag: &str) -> Language {
        match tag.trim().to_ascii_lowercase().as_str() {
            "ja" | "jpn" | "jp" | "ja-jp" => Language::Ja,
            "en" | "eng" | "en-us" | "en-gb" => Language::En,
            _ => Language::Other,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Language::Ja => "ja",
            Language::En => "en",
            Language::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Title {
    pub text: String,
    pub lang: Language,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Creator {
    pub latin: Option<String>,
    pub kanji: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestedPublication {
    pub identifier: String,
    pub titles: Vec<Title>,
    pub creators: Vec<Creator>,
    pub publication_type: String,
    pub date: Option<String>,
    pub pages: Option<String>,
    pub volume: Option<String>,
    pub number: Option<String>,
    pub language: Language,
    pub source_url: Option<String>,
    pub journal: Option<String>,
    pub contributors: Vec<String>,
    pub descriptions: Vec<String>,
}

impl HarvestedPublication {
    pub fn title_in(&self, lang: Language) -> Option<&str> {
        self.titles.iter().find(|t| t.lang == lang).map(|t| t.text.as_str())
    }

    /// Year from the leading digits of the date.
    pub fn year(&self) -> Option<u32> {
        self.date.as_deref()?.get(..4)?.parse().ok()
    }

    /// Month number from a `YYYY-MM...` date.
    pub fn month(&self) -> Option<u32> {
        let m: u32 = self.date.as_deref()?.get(5..7)?.parse().ok()?;
        (1..=12).contains(&m).then_some(m)
    }
}

/// True for kana, CJK ideographs and halfwidth katakana.
pub fn is_japanese_char(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF | 0x31F0..=0x31FF | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0xFF66..=0xFF9F)
}

fn detect_lang(text: &str) -> Language {
    if text.chars().any(is_japanese_char) {
        Language::Ja
    } else {
        Language::En
    }
}

fn lang_attr(start: &BytesStart<'_>) -> Option<String> {
    start
        .attributes()
        .flatten()
        .find(|a| a.key.local_name().as_ref() == "lang")
        .and_then(|a| a.normalized_value(XmlVersion::Implicit1_0).ok())
        .map(|v| v.into_owned())
}

#[derive(Default)]
struct Fields {
    titles: Vec<Title>,
    creators: Vec<(bool, String)>,
    nii_type: Option<String>,
    dc_type: Option<String>,
    dateofissued: Option<String>,
    date: Option<String>,
    volume: Option<String>,
    issue: Option<String>,
    spage: Option<String>,
    epage: Option<String>,
    language: Option<String>,
    uri: Option<String>,
    identifier_url: Option<String>,
    jtitle: Option<String>,
    contributors: Vec<String>,
    descriptions: Vec<String>,
}

fn set_once(slot: &mut Option<String>, value: String) {
    if slot.is_none() && !value.is_empty() {
        *slot = Some(value);
    }
}

/// Pairs each creator written in Japanese script with the Latin creator
/// directly after it, the order the repository lists them in.
fn pair_creators(items: Vec<(bool, String)>) -> Vec<Creator> {
    let mut out = Vec::new();
    let mut pending: Option<String> = None;
    for (is_kanji, name) in items {
        if is_kanji {
            if let Some(k) = pending.replace(name) {
                out.push(Creator { latin: None, kanji: Some(k) });
            }
        } else {
            out.push(Creator {
                latin: Some(name),
                kanji: pending.take(),
            });
        }
    }
    if let Some(k) = pending {
        out.push(Creator { latin: None, kanji: Some(k) });
    }
    out
}

/// Maps a junii2 payload. The identifier is left empty for the caller.
pub fn parse_junii2(payload: &str) -> Result<HarvestedPublication, String> {
    let mut reader = Reader::from_str(payload);
    let mut depth = 0usize;
    let mut field: Option<(String, Option<String>)> = None;
    let mut text = String::new();
    let mut f = Fields::default();

    loop {
        let event = reader
            .read_event()
            .map_err(|e| format!("XML error at byte {}: {e}", reader.error_position()))?;
        match event {
            Event::Start(start) => {
                depth += 1;
                if depth == 2 {
                    field = Some((start.local_name().as_ref().to_string(), lang_attr(&start)));
                    text.clear();
                }
            }
            Event::Text(t) if depth >= 2 => text.push_str(&t.xml10_content()),
            Event::CData(c) if depth >= 2 => text.push_str(&c.xml10_content()),
            Event::GeneralRef(r) if depth >= 2 => {
                if let Some(s) = resolve_reference(&r) {
                    text.push_str(&s);
                }
            }
            Event::End(_) => {
                if depth == 2 {
                    if let Some((name, lang)) = field.take() {
                        let value = text.split_whitespace().collect::<Vec<_>>().join(" ");
                        f.accept(&name, lang.as_deref(), value);
                    }
                    text.clear();
                }
                depth = depth.saturating_sub(1);
            }
            Event::Eof => break,
            _ => {}
        }
    }

    if f.titles.is_empty() {
        return Err("no title".to_string());
    }
    let language = match &f.language {
        Some(tag) => Language::from_tag(tag),
        None => f.titles[0].lang,
    };
    let pages = match (f.spage, f.epage) {
        (Some(s), Some(e)) => Some(format!("{s}-{e}")),
        (Some(s), None) => Some(s),
        _ => None,
    };
    Ok(HarvestedPublication {
        identifier: String::new(),
        titles: f.titles,
        creators: pair_creators(f.creators),
        publication_type: f.nii_type.or(f.dc_type).unwrap_or_else(|| "Others".to_string()),
        date: f.dateofissued.or(f.date),
        pages,
        volume: f.volume,
        number: f.issue,
        language,
        source_url: f.uri.or(f.identifier_url),
        journal: f.jtitle,
        contributors: f.contributors,
        descriptions: f.descriptions,
    })
}

impl Fields {
    fn accept(&mut self, name: &str, lang: Option<&str>, value: String) {
        if value.is_empty() {
            return;
        }
        match name {
            "title" | "alternative" => {
                let lang = lang.map(Language::from_tag).unwrap_or_else(|| detect_lang(&value));
                self.titles.push(Title { text: value, lang });
            }
            "creator" => {
                let is_kanji = match lang.map(Language::from_tag) {
                    Some(Language::Ja) => true,
                    Some(Language::En) => false,
                    _ => detect_lang(&value) == Language::Ja,
                };
                self.creators.push((is_kanji, value));
            }
            "NIItype" => set_once(&mut self.nii_type, value),
            "type" => set_once(&mut self.dc_type, value),
            "dateofissued" => set_once(&mut self.dateofissued, value),
            "date" => set_once(&mut self.date, value),
            "volume" => set_once(&mut self.volume, value),
            "issue" => set_once(&mut self.issue, value),
            "spage" => set_once(&mut self.spage, value),
            "epage" => set_once(&mut self.epage, value),
            "language" => set_once(&mut self.language, value),
            "URI" => set_once(&mut self.uri, value),
            "identifier" if value.starts_with("http://") || value.starts_with("https://") => {
                set_once(&mut self.identifier_url, value)
            }
            "jtitle" => set_once(&mut self.jtitle, value),
            "contributor" => self.contributors.push(value),
            "description" => self.descriptions.push(value),
            _ => {}
        }
    }
}
