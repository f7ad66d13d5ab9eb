//! Embedded table store: one JSON-lines file per table inside a directory.
//!
//! Tables are written to a temporary file and renamed into place, so a table
//! either exists completely or not at all.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::name_matching::AuthorResolution;
use crate::oai_harvester::{Creator, HarvestedPublication, Language, Title};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt row {line} in {path}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct TableStore {
    dir: PathBuf,
}

impl TableStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(TableStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn table_path(&self, table: &str) -> PathBuf {
        self.dir.join(format!("{table}.jsonl"))
    }

    pub fn exists(&self, table: &str) -> bool {
        self.table_path(table).is_file()
    }

    pub fn writer<T: Serialize>(&self, table: &str) -> Result<TableWriter<T>, StoreError> {
        let target = self.table_path(table);
        let tmp = self.dir.join(format!("{table}.jsonl.tmp"));
        let file = File::create(&tmp).map_err(io_err(&tmp))?;
        Ok(TableWriter {
            out: BufWriter::new(file),
            tmp,
            target,
            rows: 0,
            _row: std::marker::PhantomData,
        })
    }

    pub fn write_table<T: Serialize>(&self, table: &str, rows: impl IntoIterator<Item = T>) -> Result<u64, StoreError> {
        let mut w = self.writer(table)?;
        for row in rows {
            w.append(&row)?;
        }
        w.finish()
    }

    pub fn read_table<T: DeserializeOwned>(&self, table: &str) -> Result<Vec<T>, StoreError> {
        let path = self.table_path(table);
        let file = File::open(&path).map_err(io_err(&path))?;
        let mut rows = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(&path))?;
            if line.trim().is_empty() {
                continue;
            }
            let row = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                path: path.clone(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            rows.push(row);
        }
        Ok(rows)
    }
}

/// Streaming writer for one table. Rows become visible on [`finish`](Self::finish).
pub struct TableWriter<T> {
    out: BufWriter<File>,
    tmp: PathBuf,
    target: PathBuf,
    rows: u64,
    _row: std::marker::PhantomData<fn(&T)>,
}

impl<T: Serialize> TableWriter<T> {
    pub fn append(&mut self, row: &T) -> Result<(), StoreError> {
        let line = serde_json::to_string(row).map_err(|e| StoreError::Corrupt {
            path: self.tmp.clone(),
            line: self.rows as usize + 1,
            message: e.to_string(),
        })?;
        self.out.write_all(line.as_bytes()).map_err(io_err(&self.tmp))?;
        self.out.write_all(b"\n").map_err(io_err(&self.tmp))?;
        self.rows += 1;
        Ok(())
    }

    /// Flushes buffered rows to the temporary file.
    pub fn flush(&mut self) -> Result<(), StoreError> {
        self.out.flush().map_err(io_err(&self.tmp))
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn finish(mut self) -> Result<u64, StoreError> {
        self.flush()?;
        fs::rename(&self.tmp, &self.target).map_err(io_err(&self.target))?;
        Ok(self.rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorCountRow {
    pub name: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRow {
    pub id: u64,
    pub identifier: String,
    pub publication_type: String,
    pub date: Option<String>,
    pub pages: Option<String>,
    pub volume: Option<String>,
    pub number: Option<String>,
    pub language: Language,
    pub source_url: Option<String>,
    pub journal: Option<String>,
    pub dblp_key: Option<String>,
    pub spf_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorRow {
    pub publication_id: u64,
    pub position: u32,
    pub latin_raw: Option<String>,
    pub kanji_raw: Option<String>,
    pub resolution: AuthorResolution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TitleRow {
    pub publication_id: u64,
    pub position: u32,
    pub text: String,
    pub lang: Language,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRow {
    pub publication_id: u64,
    pub position: u32,
    pub text: String,
}

/// Rows of every harvest table for one publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarvestRows {
    pub publication: PublicationRow,
    pub authors: Vec<AuthorRow>,
    pub titles: Vec<TitleRow>,
    pub contributors: Vec<TextRow>,
    pub descriptions: Vec<TextRow>,
}

fn text_rows(id: u64, items: &[String]) -> Vec<TextRow> {
    items
        .iter()
        .enumerate()
        .map(|(i, t)| TextRow {
            publication_id: id,
            position: i as u32,
            text: t.clone(),
        })
        .collect()
}

impl HarvestRows {
    pub fn new(
        id: u64,
        publication: &HarvestedPublication,
        resolutions: &[AuthorResolution],
        dblp_key: Option<String>,
        spf_path: String,
    ) -> Self {
        HarvestRows {
            publication: PublicationRow {
                id,
                identifier: publication.identifier.clone(),
                publication_type: publication.publication_type.clone(),
                date: publication.date.clone(),
                pages: publication.pages.clone(),
                volume: publication.volume.clone(),
                number: publication.number.clone(),
                language: publication.language,
                source_url: publication.source_url.clone(),
                journal: publication.journal.clone(),
                dblp_key,
                spf_path,
            },
            authors: publication
                .creators
                .iter()
                .zip(resolutions)
                .enumerate()
                .map(|(i, (c, r))| AuthorRow {
                    publication_id: id,
                    position: i as u32,
                    latin_raw: c.latin.clone(),
                    kanji_raw: c.kanji.clone(),
                    resolution: r.clone(),
                })
                .collect(),
            titles: publication
                .titles
                .iter()
                .enumerate()
                .map(|(i, t)| TitleRow {
                    publication_id: id,
                    position: i as u32,
                    text: t.text.clone(),
                    lang: t.lang,
                })
                .collect(),
            contributors: text_rows(id, &publication.contributors),
            descriptions: text_rows(id, &publication.descriptions),
        }
    }

    /// Rebuilds the harvested publication these rows were made from.
    pub fn to_publication(&self) -> HarvestedPublication {
        let p = &self.publication;
        HarvestedPublication {
            identifier: p.identifier.clone(),
            titles: self
                .titles
                .iter()
                .map(|t| Title {
                    text: t.text.clone(),
                    lang: t.lang,
                })
                .collect(),
            creators: self
                .authors
                .iter()
                .map(|a| Creator {
                    latin: a.latin_raw.clone(),
                    kanji: a.kanji_raw.clone(),
                })
                .collect(),
            publication_type: p.publication_type.clone(),
            date: p.date.clone(),
            pages: p.pages.clone(),
            volume: p.volume.clone(),
            number: p.number.clone(),
            language: p.language,
            source_url: p.source_url.clone(),
            journal: p.journal.clone(),
            contributors: self.contributors.iter().map(|t| t.text.clone()).collect(),
            descriptions: self.descriptions.iter().map(|t| t.text.clone()).collect(),
        }
    }
}
