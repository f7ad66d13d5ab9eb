//! Streaming reader for DBLP-style publication XML and the queries the
//! harvest stage runs against it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use log::warn;
use quick_xml::encoding::DecodingReader;
use quick_xml::escape::{resolve_html5_entity, resolve_predefined_entity};
use quick_xml::events::{BytesRef, BytesStart, Event};
use quick_xml::name::QName;
use quick_xml::{Reader, XmlVersion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::similarity::{names_match, MatchConfig};

/// Record elements that describe publications.
pub const PUBLICATION_ELEMENTS: [&str; 7] = [
    "article",
    "inproceedings",
    "proceedings",
    "book",
    "incollection",
    "phdthesis",
    "mastersthesis",
];

/// Record elements skipped without a warning.
const SILENT_SKIP: [&str; 2] = ["www", "person"];

pub const DEFAULT_FLUSH_INTERVAL: usize = 1000;

#[derive(Debug, Error)]
pub enum DblpError {
    #[error("XML error at byte {position}: {source}")]
    Xml {
        position: u64,
        #[source]
        source: quick_xml::Error,
    },
    #[error("batch sink failed: {0}")]
    Sink(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPublication {
    pub id: u64,
    pub key: String,
    pub kind: String,
    pub authors: Vec<String>,
    pub title: String,
    pub year: Option<u32>,
    pub journal: Option<String>,
    pub pages: Option<String>,
    pub volume: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoauthorEdge {
    pub author_a: String,
    pub author_b: String,
    pub publication_id: u64,
}

/// Counts reported after a streaming parse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseSummary {
    pub publications: u64,
    pub edges: u64,
    pub skipped_records: u64,
}

/// Unordered author pairs of one publication, in document order. Repeated
/// names on the same record are paired once.
pub fn coauthor_edges(publication: &CorpusPublication) -> Vec<CoauthorEdge> {
    let mut distinct: Vec<&String> = Vec::new();
    for a in &publication.authors {
        if !distinct.contains(&a) {
            distinct.push(a);
        }
    }
    let mut edges = Vec::new();
    for (i, a) in distinct.iter().enumerate() {
        for b in &distinct[i + 1..] {
            edges.push(CoauthorEdge {
                author_a: (*a).clone(),
                author_b: (*b).clone(),
                publication_id: publication.id,
            });
        }
    }
    edges
}

#[derive(Default)]
struct RecordBuilder {
    kind: String,
    key: String,
    authors: Vec<String>,
    title: Option<String>,
    year: Option<u32>,
    journal: Option<String>,
    booktitle: Option<String>,
    pages: Option<String>,
    volume: Option<String>,
    field: Option<String>,
    text: String,
}

impl RecordBuilder {
    fn close_field(&mut self) {
        let Some(field) = self.field.take() else {
            return;
        };
        let value = collapse_ws(&self.text);
        self.text.clear();
        match field.as_str() {
            "author" => self.authors.push(value),
            "title" => self.title = Some(value),
            "year" => self.year = value.parse().ok(),
            "journal" => self.journal = Some(value),
            "booktitle" => self.booktitle = Some(value),
            "pages" => self.pages = Some(value),
            "volume" => self.volume = Some(value),
            _ => {}
        }
    }

    fn finish(self, id: u64) -> CorpusPublication {
        CorpusPublication {
            id,
            key: self.key,
            kind: self.kind,
            authors: self.authors,
            title: self.title.unwrap_or_default(),
            year: self.year,
            journal: self.journal.or(self.booktitle),
            pages: self.pages,
            volume: self.volume,
        }
    }
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn attr_value(start: &BytesStart<'_>, name: &str) -> Option<String> {
    start
        .attributes()
        .flatten()
        .find(|a| a.key.as_ref() == name)
        .and_then(|a| a.normalized_value(XmlVersion::Implicit1_0).ok().map(|v| v.into_owned()))
}

/// Decodes a general entity reference: numeric references, the XML built-ins
/// and the HTML named entities the DBLP DTD declares.
pub fn resolve_reference(reference: &BytesRef<'_>) -> Option<String> {
    if let Ok(Some(c)) = reference.resolve_char_ref() {
        return Some(c.to_string());
    }
    let name = reference.xml10_content();
    resolve_predefined_entity(&name)
        .or_else(|| resolve_html5_entity(&name))
        .map(str::to_string)
}

/// Streams publications from `input`, handing them to `sink` in batches of at
/// most `flush_interval` publications together with their coauthor edges.
/// Surrogate ids count up from 1 in document order.
pub fn parse_corpus_streaming<R, F>(input: R, flush_interval: usize, mut sink: F) -> Result<ParseSummary, DblpError>
where
    R: BufRead,
    F: FnMut(Vec<CorpusPublication>, Vec<CoauthorEdge>) -> Result<(), DblpError>,
{
    let flush_interval = flush_interval.max(1);
    // The corpus declares ISO-8859-1; the decoding layer turns it into UTF-8.
    let mut reader = Reader::from_reader(DecodingReader::new(input));
    let mut buf = Vec::new();
    let mut skip_buf = Vec::new();
    let mut depth = 0usize;
    let mut current: Option<RecordBuilder> = None;
    let mut batch = Vec::new();
    let mut edges = Vec::new();
    let mut summary = ParseSummary::default();
    let mut seen_keys = std::collections::HashSet::new();

    let xml_err = |reader: &Reader<DecodingReader<R>>, e| DblpError::Xml {
        position: reader.error_position(),
        source: e,
    };

    loop {
        let event = match reader.read_event_into(&mut buf) {
            Ok(ev) => ev,
            Err(e) => return Err(xml_err(&reader, e)),
        };
        match event {
            Event::Start(start) => {
                depth += 1;
                let name = start.local_name().as_ref().to_string();
                if depth == 2 {
                    if PUBLICATION_ELEMENTS.contains(&name.as_str()) {
                        current = Some(RecordBuilder {
                            kind: name,
                            key: attr_value(&start, "key").unwrap_or_default(),
                            ..RecordBuilder::default()
                        });
                    } else {
                        if !SILENT_SKIP.contains(&name.as_str()) {
                            warn!("skipping unknown record element <{name}>");
                        }
                        summary.skipped_records += 1;
                        let qname = start.name().as_ref().to_string();
                        if let Err(e) = reader.read_to_end_into(QName(&qname), &mut skip_buf) {
                            return Err(xml_err(&reader, e));
                        }
                        skip_buf.clear();
                        depth -= 1;
                    }
                } else if depth == 3 {
                    if let Some(rec) = current.as_mut() {
                        rec.field = Some(name);
                        rec.text.clear();
                    }
                }
            }
            Event::Text(text) => {
                if depth >= 3 {
                    if let Some(rec) = current.as_mut() {
                        rec.text.push_str(&text.xml10_content());
                    }
                }
            }
            Event::CData(data) => {
                if depth >= 3 {
                    if let Some(rec) = current.as_mut() {
                        rec.text.push_str(&data.xml10_content());
                    }
                }
            }
            Event::GeneralRef(reference) => {
                if depth >= 3 {
                    if let Some(rec) = current.as_mut() {
                        match resolve_reference(&reference) {
                            Some(s) => rec.text.push_str(&s),
                            None => {
                                let raw = reference.xml10_content();
                                warn!("unknown entity &{raw}; kept verbatim");
                                rec.text.push('&');
                                rec.text.push_str(&raw);
                                rec.text.push(';');
                            }
                        }
                    }
                }
            }
            Event::End(_) => {
                if depth == 3 {
                    if let Some(rec) = current.as_mut() {
                        rec.close_field();
                    }
                } else if depth == 2 {
                    if let Some(rec) = current.take() {
                        if !seen_keys.insert(rec.key.clone()) {
                            warn!("duplicate record key {}; later record skipped", rec.key);
                            summary.skipped_records += 1;
                        } else {
                            summary.publications += 1;
                            let publication = rec.finish(summary.publications);
                            let new_edges = coauthor_edges(&publication);
                            summary.edges += new_edges.len() as u64;
                            edges.extend(new_edges);
                            batch.push(publication);
                            if batch.len() >= flush_interval {
                                sink(std::mem::take(&mut batch), std::mem::take(&mut edges))?;
                            }
                        }
                    }
                }
                depth = depth.saturating_sub(1);
            }
            Event::Decl(decl) => match decl.encoder() {
                Some(encoding) => reader.get_mut().set_encoding(encoding),
                None => warn!("unsupported document encoding {:?}; reading as UTF-8", decl.encoding()),
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !batch.is_empty() || !edges.is_empty() {
        sink(batch, edges)?;
    }
    Ok(summary)
}

/// Reads a whole corpus into memory.
pub fn parse_corpus<R: BufRead>(input: R) -> Result<Corpus, DblpError> {
    let mut pubs = Vec::new();
    let mut edges = Vec::new();
    parse_corpus_streaming(input, DEFAULT_FLUSH_INTERVAL, |p, e| {
        pubs.extend(p);
        edges.extend(e);
        Ok(())
    })?;
    Ok(Corpus::new(pubs, edges))
}

/// Title comparison key: trimmed, whitespace collapsed, case folded, trailing
/// periods removed.
pub fn normalize_title(title: &str) -> String {
    collapse_ws(title).to_lowercase().trim_end_matches('.').trim_end().to_string()
}

/// Publication store with the indexes needed for duplicate and coauthor queries.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    publications: Vec<CorpusPublication>,
    edges: Vec<CoauthorEdge>,
    by_title: HashMap<String, Vec<usize>>,
    by_key: HashMap<String, usize>,
    coauthors: BTreeMap<String, BTreeSet<String>>,
}

impl Corpus {
    pub fn new(publications: Vec<CorpusPublication>, edges: Vec<CoauthorEdge>) -> Self {
        let mut corpus = Corpus {
            publications,
            edges,
            ..Corpus::default()
        };
        for (i, p) in corpus.publications.iter().enumerate() {
            corpus.by_title.entry(normalize_title(&p.title)).or_default().push(i);
            corpus.by_key.insert(p.key.clone(), i);
        }
        for e in &corpus.edges {
            corpus
                .coauthors
                .entry(e.author_a.clone())
                .or_default()
                .insert(e.author_b.clone());
            corpus
                .coauthors
                .entry(e.author_b.clone())
                .or_default()
                .insert(e.author_a.clone());
        }
        corpus
    }

    pub fn publications(&self) -> &[CorpusPublication] {
        &self.publications
    }

    pub fn edges(&self) -> &[CoauthorEdge] {
        &self.edges
    }

    pub fn get(&self, key: &str) -> Option<&CorpusPublication> {
        self.by_key.get(key).map(|&i| &self.publications[i])
    }

    /// Author occurrence counts, sorted by name.
    pub fn author_counts(&self) -> BTreeMap<String, u64> {
        let mut counts = BTreeMap::new();
        for p in &self.publications {
            for a in &p.authors {
                *counts.entry(a.clone()).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Key of the first stored publication with the same title that shares at
    /// least one author.
    pub fn find_publication(&self, title: &str, authors: &[String], cfg: &MatchConfig) -> Option<&str> {
        let candidates = self.by_title.get(&normalize_title(title))?;
        candidates
            .iter()
            .map(|&i| &self.publications[i])
            .find(|p| {
                p.authors
                    .iter()
                    .any(|pa| authors.iter().any(|a| names_match(pa, a, cfg)))
            })
            .map(|p| p.key.as_str())
    }

    /// Corpus authors outside `authors` who have published with at least two
    /// distinct members of `authors`, sorted.
    pub fn common_coauthors(&self, authors: &[String], cfg: &MatchConfig) -> Vec<String> {
        let mut support: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
        for (idx, input) in authors.iter().enumerate() {
            for (corpus_name, partners) in &self.coauthors {
                if !names_match(corpus_name, input, cfg) {
                    continue;
                }
                for partner in partners {
                    support.entry(partner.as_str()).or_default().insert(idx);
                }
            }
        }
        support
            .into_iter()
            .filter(|(name, who)| who.len() >= 2 && !authors.iter().any(|a| names_match(name, a, cfg)))
            .map(|(name, _)| name.to_string())
            .collect()
    }
}
