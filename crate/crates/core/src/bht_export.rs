//! Extended BHT output: one file per publication, then one `all.bht` per
//! directory.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::warn;
use thiserror::Error;
use walkdir::WalkDir;

use crate::name_matching::AuthorResolution;
use crate::oai_harvester::{HarvestedPublication, Language};

pub const ALL_FILE: &str = "all.bht";
pub const DEFAULT_PAGES: &str = "0-";

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

#[derive(Debug, Error)]
pub enum BhtError {
    #[error("BHT root {0} does not exist")]
    MissingRoot(PathBuf),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Escapes `&`, `<` and `>` by name and every non-ASCII code point as an
/// uppercase hexadecimal character reference.
pub fn escape_non_ascii(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c if (c as u32) > 127 => out.push_str(&format!("&#x{:X};", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// [`escape_non_ascii`] plus `"` for attribute values.
pub fn escape_attr(text: &str) -> String {
    escape_non_ascii(text).replace('"', "&quot;")
}

/// Inverse of the escaping above.
pub fn unescape(text: &str) -> Option<String> {
    quick_xml::escape::unescape(text).ok().map(|s| s.into_owned())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Header {
    pub volume: Option<String>,
    pub number: Option<String>,
    /// `"October 2011"`, `"2011"`, or absent.
    pub date_label: Option<String>,
}

impl Header {
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(v) = &self.volume {
            parts.push(format!("Volume {v}"));
        }
        if let Some(n) = &self.number {
            parts.push(format!("Number {n}"));
        }
        if let Some(d) = &self.date_label {
            parts.push(d.clone());
        }
        parts.join(", ")
    }
}

pub fn date_label(year: Option<u32>, month: Option<u32>) -> Option<String> {
    match (year, month) {
        (Some(y), Some(m)) => Some(format!("{} {y}", MONTHS[(m - 1) as usize])),
        (Some(y), None) => Some(y.to_string()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OriginalTitle {
    pub text: String,
    pub lang: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BhtEntry {
    pub header: Header,
    pub authors: Vec<AuthorResolution>,
    pub title: String,
    pub pages: Option<String>,
    pub ee: Option<String>,
    pub original_title: Option<OriginalTitle>,
    pub common_coauthors: Vec<String>,
    pub dblp_key: Option<String>,
}

impl BhtEntry {
    /// Entry for a harvested publication. The English title is preferred for
    /// the BHT title line; a Japanese-language paper also gets its Japanese
    /// title as the original title.
    pub fn from_publication(
        publication: &HarvestedPublication,
        authors: Vec<AuthorResolution>,
        common_coauthors: Vec<String>,
        dblp_key: Option<String>,
    ) -> Self {
        let title = publication
            .title_in(Language::En)
            .or_else(|| publication.titles.first().map(|t| t.text.as_str()))
            .unwrap_or_default()
            .to_string();
        let original_title = match publication.language {
            Language::Ja => publication.title_in(Language::Ja).map(|t| OriginalTitle {
                text: t.to_string(),
                lang: "ja".to_string(),
                kind: publication.publication_type.clone(),
            }),
            _ => None,
        };
        BhtEntry {
            header: Header {
                volume: publication.volume.clone(),
                number: publication.number.clone(),
                date_label: date_label(publication.year(), publication.month()),
            },
            authors,
            title,
            pages: publication.pages.clone(),
            ee: publication.source_url.clone(),
            original_title,
            common_coauthors,
            dblp_key,
        }
    }
}

/// Appends a period unless the title already ends in `.`, `?` or `!`.
pub fn terminate_title(title: &str) -> String {
    let t = title.trim();
    if t.ends_with(['.', '?', '!']) {
        t.to_string()
    } else {
        format!("{t}.")
    }
}

/// Renders one publication in Single Publication Format. Output is ASCII
/// with LF line endings.
pub fn render_spf(entry: &BhtEntry) -> String {
    let mut out = String::new();
    out.push_str(&format!("<h2>{}</h2>\n<ul>\n", escape_non_ascii(&entry.header.label())));
    if entry.authors.is_empty() {
        warn!("publication \"{}\" has no authors", entry.title);
    }
    let names: Vec<String> = entry
        .authors
        .iter()
        .map(|a| escape_non_ascii(&a.display_name()))
        .collect();
    out.push_str(&format!("<li>{}:\n", names.join(", ")));
    out.push_str(&escape_non_ascii(&terminate_title(&entry.title)));
    out.push('\n');
    out.push_str(&escape_non_ascii(entry.pages.as_deref().unwrap_or(DEFAULT_PAGES)));
    out.push('\n');
    if let Some(ee) = &entry.ee {
        out.push_str(&format!("<ee>{}</ee>\n", escape_non_ascii(ee)));
    }
    for author in &entry.authors {
        if let Some(kanji) = &author.kanji {
            let content = escape_non_ascii(&kanji.family_comma_given());
            match &author.latin {
                Some(latin) => out.push_str(&format!(
                    "<originalname latin=\"{}\">{content}</originalname>\n",
                    escape_attr(&latin.display_latin())
                )),
                None => out.push_str(&format!("<originalname>{content}</originalname>\n")),
            }
        }
        out.push_str(&format!(
            "<status name=\"{}\">{}</status>\n",
            escape_attr(&author.display_name()),
            author.status.label()
        ));
        if author.latin.is_none() && !author.candidates.is_empty() {
            let kanji = author
                .kanji
                .as_ref()
                .map(|k| format!("{}{}", k.family, k.given))
                .unwrap_or_default();
            let list: Vec<String> = author.candidates.iter().map(|c| c.display_latin()).collect();
            out.push_str(&format!(
                "<namecandidates kanji=\"{}\">{}</namecandidates>\n",
                escape_attr(&kanji),
                escape_non_ascii(&list.join(", "))
            ));
        }
    }
    if let Some(ot) = &entry.original_title {
        out.push_str(&format!(
            "<originaltitle lang=\"{}\" type=\"{}\">{}</originaltitle>\n",
            escape_attr(&ot.lang),
            escape_attr(&ot.kind),
            escape_non_ascii(&ot.text)
        ));
    }
    if !entry.common_coauthors.is_empty() {
        out.push_str(&format!(
            "<commoncoauthors>{}</commoncoauthors>\n",
            escape_non_ascii(&entry.common_coauthors.join(", "))
        ));
    }
    if let Some(key) = &entry.dblp_key {
        out.push_str(&format!("<dblpkey>{}</dblpkey>\n", escape_non_ascii(key)));
    }
    out.push_str("</ul>\n");
    out
}

/// Lowercase ASCII path component; other characters become their hex code
/// point, punctuation and spaces a single dash.
pub fn slug(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if c.is_ascii() || c.is_whitespace() {
            if !out.is_empty() && !out.ends_with('-') {
                out.push('-');
            }
        } else {
            out.push_str(&format!("{:x}", c as u32));
        }
    }
    let trimmed = out.trim_end_matches('-');
    if trimmed.is_empty() {
        "unknown".to_string()
    } else {
        trimmed.to_string()
    }
}

/// `<journal>/<volume>/<number>/<id>.bht`, relative to the BHT root. The
/// journal falls back to the publication type when no journal title exists.
pub fn spf_relative_path(publication: &HarvestedPublication) -> PathBuf {
    let group = publication
        .journal
        .as_deref()
        .unwrap_or(&publication.publication_type);
    let id = publication
        .identifier
        .rsplit(':')
        .next()
        .unwrap_or(&publication.identifier);
    PathBuf::from(slug(group))
        .join(slug(publication.volume.as_deref().unwrap_or("0")))
        .join(slug(publication.number.as_deref().unwrap_or("0")))
        .join(format!("{}.bht", slug(id)))
}

pub fn write_spf(root: &Path, relative: &Path, content: &str) -> Result<PathBuf, BhtError> {
    let path = root.join(relative);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| BhtError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(&path, content).map_err(|source| BhtError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

#[derive(Debug, Default)]
pub struct ConcatReport {
    pub written: usize,
    pub failures: Vec<(PathBuf, String)>,
}

/// Writes `all.bht` into every directory under `root` that holds SPF files,
/// concatenating them in filename order. An existing `all.bht` is never part
/// of its own input.
pub fn concatenate(root: &Path) -> Result<ConcatReport, BhtError> {
    if !root.is_dir() {
        return Err(BhtError::MissingRoot(root.to_path_buf()));
    }
    let mut report = ConcatReport::default();
    let dirs = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| match e {
            Ok(e) => Some(e),
            Err(err) => {
                let path = err.path().map(Path::to_path_buf).unwrap_or_default();
                warn!("cannot walk {}: {err}", path.display());
                report.failures.push((path, err.to_string()));
                None
            }
        })
        .filter(|e| e.file_type().is_dir())
        .map(|e| e.into_path())
        .collect::<Vec<_>>();
    for dir in dirs {
        if let Err(e) = concatenate_dir(&dir, &mut report) {
            warn!("{e}");
            report.failures.push((dir, e.to_string()));
        }
    }
    Ok(report)
}

fn concatenate_dir(dir: &Path, report: &mut ConcatReport) -> Result<(), BhtError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| BhtError::Io { path, source }
    };
    let mut files: Vec<(String, PathBuf)> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(Result::ok)
        .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
        .filter_map(|e| {
            let name = e.file_name().to_str()?.to_string();
            (name.ends_with(".bht") && name != ALL_FILE).then(|| (name, e.path()))
        })
        .collect();
    if files.is_empty() {
        return Ok(());
    }
    files.sort();
    let mut combined = String::new();
    for (_, path) in &files {
        combined.push_str(&fs::read_to_string(path).map_err(io_err(path))?);
    }
    let target = dir.join(ALL_FILE);
    fs::write(&target, combined).map_err(io_err(&target))?;
    report.written += 1;
    Ok(())
}
