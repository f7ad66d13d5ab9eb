//! Stage orchestration: corpus ingestion, dictionary build, harvest with
//! name matching and SPF export, and BHT concatenation.

pub mod config;
pub mod stats;
pub mod store;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use serde::Serialize;
use thiserror::Error;

use crate::bht_export::{self, render_spf, spf_relative_path, BhtEntry, BhtError};
use crate::dblp_corpus::{self, CoauthorEdge, Corpus, CorpusPublication, DblpError, ParseSummary};
use crate::enamdict::{self, EnamdictError, NameRecord};
use crate::name_matching::{resolve_author, AuthorResolution, NameDictionary};
use crate::oai_harvester::{
    self, mock::MockProvider, Fetcher, HarvestMode, HarvestSummary, HarvestedPublication, HttpFetcher, Language,
    OaiClient, OaiError, RecordingFetcher,
};

pub use config::{Config, ConfigError};
pub use stats::{record_statistics, RunStatistics, StatEvent};
pub use store::{StoreError, TableStore};

use store::{AuthorCountRow, AuthorRow, HarvestRows, PublicationRow, TextRow, TitleRow};

pub const STATS_FILE: &str = "stats.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage {stage} needs {missing}; {hint}")]
    Prerequisite {
        stage: &'static str,
        missing: String,
        hint: &'static str,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Dblp(#[from] DblpError),
    #[error(transparent)]
    Enamdict(#[from] EnamdictError),
    #[error(transparent)]
    Oai(#[from] OaiError),
    #[error(transparent)]
    Bht(#[from] BhtError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 3,
            PipelineError::Prerequisite { .. } => 4,
            _ => 5,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Stages selected on the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stages {
    pub parse_dblp: bool,
    pub enamdict: bool,
    pub harvest: bool,
    pub concatenate: bool,
}

impl Stages {
    pub fn all() -> Self {
        Stages {
            parse_dblp: true,
            enamdict: true,
            harvest: true,
            concatenate: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == Stages::default()
    }
}

#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub dblp: Option<ParseSummary>,
    pub dictionary_names: Option<usize>,
    pub dictionary_warnings: Option<usize>,
    pub harvest: Option<HarvestSummary>,
    pub statistics: Option<RunStatistics>,
    pub all_files_written: Option<usize>,
}

/// Rejects a stage selection whose inputs neither exist nor are produced
/// earlier in the same run.
pub fn check_prerequisites(cfg: &Config, stages: Stages) -> Result<(), PipelineError> {
    let store_dir = &cfg.db.db;
    let has = |table: &str| store_dir.join(format!("{table}.jsonl")).is_file();
    if stages.harvest {
        if !stages.enamdict && !has(&cfg.japnamesdb.table) {
            return Err(PipelineError::Prerequisite {
                stage: "harvest",
                missing: format!("the name dictionary table {}", cfg.japnamesdb.table),
                hint: "run --enamdict first",
            });
        }
        if !stages.parse_dblp && !(has(&cfg.dblpdb.dblp_table) && has(&cfg.dblpdb.coauthors_table)) {
            return Err(PipelineError::Prerequisite {
                stage: "harvest",
                missing: format!("the DBLP tables {} and {}", cfg.dblpdb.dblp_table, cfg.dblpdb.coauthors_table),
                hint: "run --parse-dblp first",
            });
        }
    }
    if stages.concatenate && !stages.harvest && !cfg.bhtexport.path.is_dir() {
        return Err(PipelineError::Prerequisite {
            stage: "concatenate-bht",
            missing: format!("the BHT directory {}", cfg.bhtexport.path.display()),
            hint: "run --harvest first",
        });
    }
    if stages.parse_dblp && !cfg.dblp.xml_file.is_file() {
        return Err(PipelineError::Prerequisite {
            stage: "parse-dblp",
            missing: format!("the DBLP file {}", cfg.dblp.xml_file.display()),
            hint: "set [dblp] xmlfile",
        });
    }
    if stages.enamdict && !cfg.enamdict.file.is_file() {
        return Err(PipelineError::Prerequisite {
            stage: "enamdict",
            missing: format!("the dictionary file {}", cfg.enamdict.file.display()),
            hint: "set [enamdict] file",
        });
    }
    Ok(())
}

/// Runs the selected stages in pipeline order.
pub fn run(cfg: &Config, stages: Stages) -> Result<RunReport, PipelineError> {
    check_prerequisites(cfg, stages)?;
    if cfg.db.url.is_some() {
        warn!("[db] url is set but only the embedded store is supported; using {}", cfg.db.db.display());
    }
    let store = TableStore::open(&cfg.db.db)?;
    let mut report = RunReport::default();

    if stages.parse_dblp {
        report.dblp = Some(stage_parse_dblp(cfg, &store)?);
    }
    if stages.enamdict {
        let (names, warnings) = stage_enamdict(cfg, &store)?;
        report.dictionary_names = Some(names);
        report.dictionary_warnings = Some(warnings);
    }
    if stages.harvest {
        let (summary, statistics) = stage_harvest(cfg, &store)?;
        report.harvest = Some(summary);
        report.statistics = Some(statistics);
    }
    if stages.concatenate {
        report.all_files_written = Some(stage_concatenate(cfg)?);
    }
    Ok(report)
}

pub fn stage_parse_dblp(cfg: &Config, store: &TableStore) -> Result<ParseSummary, PipelineError> {
    info!("parsing {}", cfg.dblp.xml_file.display());
    let file = File::open(&cfg.dblp.xml_file).map_err(io_error(&cfg.dblp.xml_file))?;
    let mut pubs = store.writer::<CorpusPublication>(&cfg.dblpdb.dblp_table)?;
    let mut edges = store.writer::<CoauthorEdge>(&cfg.dblpdb.coauthors_table)?;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let sink_err = |e: StoreError| DblpError::Sink(e.to_string());
    let summary = dblp_corpus::parse_corpus_streaming(BufReader::new(file), cfg.dblp.flush_interval, |batch, batch_edges| {
        for p in &batch {
            for a in &p.authors {
                *counts.entry(a.clone()).or_insert(0) += 1;
            }
            pubs.append(p).map_err(sink_err)?;
        }
        for e in &batch_edges {
            edges.append(e).map_err(sink_err)?;
        }
        pubs.flush().map_err(sink_err)?;
        edges.flush().map_err(sink_err)?;
        Ok(())
    })?;
    pubs.finish()?;
    edges.finish()?;
    store.write_table(
        &cfg.dblpdb.authors_count_table,
        counts.into_iter().map(|(name, count)| AuthorCountRow { name, count }),
    )?;
    info!(
        "corpus: {} publications, {} coauthor edges, {} records skipped",
        summary.publications, summary.edges, summary.skipped_records
    );
    Ok(summary)
}

/// Stores every person-name record, unclassified ones included; the
/// `useunclassifiednames` switch applies when the dictionary is loaded.
pub fn stage_enamdict(cfg: &Config, store: &TableStore) -> Result<(usize, usize), PipelineError> {
    info!("reading {}", cfg.enamdict.file.display());
    let file = File::open(&cfg.enamdict.file).map_err(io_error(&cfg.enamdict.file))?;
    let (records, warnings) = enamdict::parse_file(BufReader::new(file), true)?;
    for w in &warnings {
        warn!("{w}");
    }
    store.write_table(&cfg.japnamesdb.table, &records)?;
    info!("dictionary: {} names, {} warnings", records.len(), warnings.len());
    Ok((records.len(), warnings.len()))
}

pub fn load_dictionary(cfg: &Config, store: &TableStore) -> Result<NameDictionary, PipelineError> {
    let records: Vec<NameRecord> = store.read_table(&cfg.japnamesdb.table)?;
    Ok(NameDictionary::new(records, cfg.japnamesdb.use_unclassified_names)
        .with_max_vowel_sites(cfg.japnamesdb.max_vowel_sites))
}

pub fn load_corpus(cfg: &Config, store: &TableStore) -> Result<Corpus, PipelineError> {
    let pubs: Vec<CorpusPublication> = store.read_table(&cfg.dblpdb.dblp_table)?;
    let edges: Vec<CoauthorEdge> = store.read_table(&cfg.dblpdb.coauthors_table)?;
    Ok(Corpus::new(pubs, edges))
}

impl<F: Fetcher + ?Sized> Fetcher for Box<F> {
    fn fetch(&mut self, url: &str) -> Result<String, String> {
        (**self).fetch(url)
    }
}

fn build_fetcher(cfg: &Config) -> Result<Box<dyn Fetcher>, PipelineError> {
    let h = &cfg.harvester;
    let base: Box<dyn Fetcher> = match h.endpoint.strip_prefix("dir:") {
        Some(dir) => {
            let dir = Path::new(dir);
            Box::new(MockProvider::from_dir(dir, &h.endpoint, &h.identifier_prefix).map_err(io_error(dir))?)
        }
        None => Box::new(HttpFetcher::new(Duration::from_secs(60))),
    };
    Ok(match &h.files_path {
        Some(dir) => Box::new(RecordingFetcher::new(base, dir).map_err(io_error(dir))?),
        None => base,
    })
}

/// Everything the harvest stage derives from one parsed publication.
pub struct ProcessedPublication {
    pub resolutions: Vec<AuthorResolution>,
    pub dblp_key: Option<String>,
    pub common_coauthors: Vec<String>,
    pub spf_path: PathBuf,
    pub spf: String,
}

/// Resolves authors, checks the corpus for the publication and its common
/// coauthors, and renders the SPF text.
pub fn process_publication(
    publication: &HarvestedPublication,
    dict: &NameDictionary,
    corpus: &Corpus,
    cfg: &Config,
) -> ProcessedPublication {
    let matching = &cfg.bhtexport.matching;
    let resolutions: Vec<AuthorResolution> = publication
        .creators
        .iter()
        .map(|c| resolve_author(c.latin.as_deref(), c.kanji.as_deref(), dict))
        .collect();
    let latin_names: Vec<String> = resolutions
        .iter()
        .filter_map(|r| r.latin.as_ref().map(|l| l.display_latin()))
        .collect();
    let title = publication
        .title_in(Language::En)
        .or_else(|| publication.titles.first().map(|t| t.text.as_str()))
        .unwrap_or_default();
    let dblp_key = corpus
        .find_publication(title, &latin_names, matching)
        .map(str::to_string);
    let common_coauthors = if cfg.bhtexport.show_common_coauthors {
        corpus.common_coauthors(&latin_names, matching)
    } else {
        Vec::new()
    };
    let entry = BhtEntry::from_publication(publication, resolutions.clone(), common_coauthors.clone(), dblp_key.clone());
    ProcessedPublication {
        spf: render_spf(&entry),
        spf_path: spf_relative_path(publication),
        resolutions,
        dblp_key,
        common_coauthors,
    }
}

struct HarvestTables {
    publications: store::TableWriter<PublicationRow>,
    authors: store::TableWriter<AuthorRow>,
    titles: store::TableWriter<TitleRow>,
    contributors: store::TableWriter<TextRow>,
    descriptions: store::TableWriter<TextRow>,
}

impl HarvestTables {
    fn open(cfg: &Config, store: &TableStore) -> Result<Self, StoreError> {
        Ok(HarvestTables {
            publications: store.writer(&cfg.oaidb.publication_table)?,
            authors: store.writer(&cfg.oaidb.authors_table)?,
            titles: store.writer(&cfg.oaidb.titles_table)?,
            contributors: store.writer(&cfg.oaidb.contributors_table)?,
            descriptions: store.writer(&cfg.oaidb.descriptions_table)?,
        })
    }

    fn append(&mut self, rows: &HarvestRows) -> Result<(), StoreError> {
        self.publications.append(&rows.publication)?;
        for r in &rows.authors {
            self.authors.append(r)?;
        }
        for r in &rows.titles {
            self.titles.append(r)?;
        }
        for r in &rows.contributors {
            self.contributors.append(r)?;
        }
        for r in &rows.descriptions {
            self.descriptions.append(r)?;
        }
        Ok(())
    }

    fn finish(self) -> Result<(), StoreError> {
        self.publications.finish()?;
        self.authors.finish()?;
        self.titles.finish()?;
        self.contributors.finish()?;
        self.descriptions.finish()?;
        Ok(())
    }
}

pub fn stage_harvest(cfg: &Config, store: &TableStore) -> Result<(HarvestSummary, RunStatistics), PipelineError> {
    let dict = load_dictionary(cfg, store)?;
    let corpus = load_corpus(cfg, store)?;
    info!(
        "harvesting {} ({} names, {} corpus publications)",
        cfg.harvester.endpoint,
        dict.len(),
        corpus.publications().len()
    );
    let h = &cfg.harvester;
    let mut client = OaiClient::new(build_fetcher(cfg)?, h.endpoint.clone())
        .with_delay(Duration::from_millis(h.delay_ms));
    let mode = if h.use_list_records {
        HarvestMode::List
    } else {
        HarvestMode::IdRange {
            min: h.min_id,
            max: h.max_id,
        }
    };
    let bht_root = &cfg.bhtexport.path;
    fs::create_dir_all(bht_root).map_err(io_error(bht_root))?;
    let mut tables = HarvestTables::open(cfg, store)?;
    let mut stats = RunStatistics::default();
    let mut next_id = 0u64;

    let summary = oai_harvester::harvest(&mut client, &h.metadata_prefix, mode, &h.identifier_prefix, |item| {
        match item.publication {
            None => stats.record(&StatEvent::Deleted),
            Some(Err(_)) => stats.record(&StatEvent::Malformed),
            Some(Ok(publication)) => {
                next_id += 1;
                let processed = process_publication(&publication, &dict, &corpus, cfg);
                stats.record(&StatEvent::Publication {
                    publication_type: publication.publication_type.clone(),
                    language: publication.language,
                });
                for r in &processed.resolutions {
                    stats.record(&StatEvent::Author(r.status));
                }
                if processed.dblp_key.is_some() {
                    stats.record(&StatEvent::Duplicate);
                }
                bht_export::write_spf(bht_root, &processed.spf_path, &processed.spf)
                    .map_err(|e| OaiError::Sink(e.to_string()))?;
                let rows = HarvestRows::new(
                    next_id,
                    &publication,
                    &processed.resolutions,
                    processed.dblp_key,
                    processed.spf_path.to_string_lossy().replace('\\', "/"),
                );
                tables.append(&rows).map_err(|e| OaiError::Sink(e.to_string()))?;
            }
        }
        Ok(())
    })?;
    tables.finish()?;

    let log_dir = &cfg.log.path;
    fs::create_dir_all(log_dir).map_err(io_error(log_dir))?;
    let stats_path = log_dir.join(STATS_FILE);
    let json = serde_json::to_string_pretty(&stats).expect("statistics serialize");
    fs::write(&stats_path, json + "\n").map_err(io_error(&stats_path))?;
    info!(
        "harvest: {} records, {} deleted, {} malformed, {} requests",
        summary.records, summary.deleted, summary.malformed, summary.requests
    );
    Ok((summary, stats))
}

pub fn stage_concatenate(cfg: &Config) -> Result<usize, PipelineError> {
    let report = bht_export::concatenate(&cfg.bhtexport.path)?;
    for (path, message) in &report.failures {
        warn!("concatenation failed in {}: {message}", path.display());
    }
    info!("wrote {} all.bht files", report.written);
    Ok(report.written)
}

/// Reads the harvest tables back into publications, in id order.
pub fn load_harvested(cfg: &Config, store: &TableStore) -> Result<Vec<HarvestedPublication>, PipelineError> {
    let pubs: Vec<PublicationRow> = store.read_table(&cfg.oaidb.publication_table)?;
    let authors: Vec<AuthorRow> = store.read_table(&cfg.oaidb.authors_table)?;
    let titles: Vec<TitleRow> = store.read_table(&cfg.oaidb.titles_table)?;
    let contributors: Vec<TextRow> = store.read_table(&cfg.oaidb.contributors_table)?;
    let descriptions: Vec<TextRow> = store.read_table(&cfg.oaidb.descriptions_table)?;
    let select = |id: u64| HarvestRows {
        publication: pubs.iter().find(|p| p.id == id).cloned().expect("id from table"),
        authors: authors.iter().filter(|r| r.publication_id == id).cloned().collect(),
        titles: titles.iter().filter(|r| r.publication_id == id).cloned().collect(),
        contributors: contributors.iter().filter(|r| r.publication_id == id).cloned().collect(),
        descriptions: descriptions.iter().filter(|r| r.publication_id == id).cloned().collect(),
    };
    Ok(pubs.iter().map(|p| select(p.id).to_publication()).collect())
}

/// Sends log output to a timestamped file under `dir`. Returns the file path.
pub fn init_logging(dir: &Path) -> Result<PathBuf, PipelineError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let path = dir.join(format!("run-{}.log", chrono::Local::now().format("%Y%m%d-%H%M%S")));
    let file = File::create(&path).map_err(io_error(&path))?;
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Pipe(Box::new(file)))
        .format_timestamp_secs()
        .try_init();
    Ok(path)
}
