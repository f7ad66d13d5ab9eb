//! `config.ini` loading.
//!
//! Relative paths are resolved against the directory holding the config file.
//! Keys beyond the documented set are accepted where noted below and warned
//! about otherwise.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use thiserror::Error;

use crate::dblp_corpus::DEFAULT_FLUSH_INTERVAL;
use crate::similarity::MatchConfig;
use crate::transcription::DEFAULT_MAX_VOWEL_SITES;

pub const DEFAULT_ENDPOINT: &str = "http://ipsj.ixsq.nii.ac.jp/ej/?action=repository_oaipmh";
pub const DEFAULT_IDENTIFIER_PREFIX: &str = "oai:ipsj.ixsq.nii.ac.jp:";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("invalid value {value:?} for {key}: {reason}")]
    Invalid {
        key: String,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbConfig {
    /// External database server; not used by the embedded store.
    pub url: Option<String>,
    /// Directory of the embedded table store.
    pub db: PathBuf,
    pub user: Option<String>,
    pub password: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JapNamesConfig {
    pub table: String,
    pub use_unclassified_names: bool,
    /// `maxvowelsites`: cap on ambiguous vowel sites per lookup token.
    pub max_vowel_sites: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DblpDbConfig {
    pub authors_count_table: String,
    pub dblp_table: String,
    /// `coauthorstable`: coauthor edge table.
    pub coauthors_table: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OaiDbConfig {
    pub publication_table: String,
    pub authors_table: String,
    pub titles_table: String,
    pub contributors_table: String,
    pub descriptions_table: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnamdictConfig {
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarvesterConfig {
    /// Raw responses are kept here; empty disables keeping them.
    pub files_path: Option<PathBuf>,
    pub min_id: u64,
    pub max_id: u64,
    pub use_list_records: bool,
    /// `dir:<path>` serves a local fixture repository instead of HTTP.
    pub endpoint: String,
    pub metadata_prefix: String,
    pub identifier_prefix: String,
    /// Pause between requests.
    pub delay_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DblpConfig {
    pub xml_file: PathBuf,
    /// Rows buffered before each table flush.
    pub flush_interval: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BhtExportConfig {
    pub path: PathBuf,
    pub show_common_coauthors: bool,
    /// From `levthreshold` and `matchthreshold`.
    pub matching: MatchConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogConfig {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub db: DbConfig,
    pub japnamesdb: JapNamesConfig,
    pub dblpdb: DblpDbConfig,
    pub oaidb: OaiDbConfig,
    pub enamdict: EnamdictConfig,
    pub harvester: HarvesterConfig,
    pub dblp: DblpConfig,
    pub bhtexport: BhtExportConfig,
    pub log: LogConfig,
    /// Unknown sections and keys, reported once logging is up.
    pub warnings: Vec<String>,
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("db", &["url", "db", "user", "password"]),
    ("japnamesdb", &["table", "useunclassifiednames", "maxvowelsites"]),
    ("dblpdb", &["authorscounttable", "dblptable", "coauthorstable"]),
    (
        "oaidb",
        &[
            "publicationtable",
            "authorstable",
            "titlestable",
            "contributorstable",
            "descriptionstable",
        ],
    ),
    ("enamdict", &["file"]),
    (
        "harvester",
        &[
            "filespath",
            "minid",
            "maxid",
            "uselistrecords",
            "endpoint",
            "metadataprefix",
            "identifierprefix",
            "delayms",
        ],
    ),
    ("dblp", &["xmlfile", "flushinterval"]),
    (
        "bhtexport",
        &["path", "showcommoncoauthors", "levthreshold", "matchthreshold"],
    ),
    ("log", &["path"]),
];

struct Reader<'a> {
    ini: &'a Ini,
    base: &'a Path,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.get_from(Some(section), key).map(str::trim)
    }

    fn string(&self, section: &str, key: &str, default: &str) -> String {
        self.raw(section, key).unwrap_or(default).to_string()
    }

    fn optional(&self, section: &str, key: &str) -> Option<String> {
        self.raw(section, key).filter(|v| !v.is_empty()).map(str::to_string)
    }

    fn path(&self, section: &str, key: &str, default: &str) -> Result<PathBuf, ConfigError> {
        let value = self.raw(section, key).unwrap_or(default);
        if value.is_empty() {
            return Err(invalid(section, key, value, "path must not be empty"));
        }
        Ok(self.base.join(value))
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e: T::Err| invalid(section, key, v, &e.to_string())),
        }
    }

    fn boolean(&self, section: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.raw(section, key).map(str::to_ascii_lowercase).as_deref() {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(other) => Err(invalid(section, key, other, "expected true or false")),
        }
    }
}

fn invalid(section: &str, key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        key: format!("{section}.{key}"),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Config::parse(&text, base).map_err(|e| match e {
            ConfigError::Syntax { message, .. } => ConfigError::Syntax {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Parses ini text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Config, ConfigError> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| ConfigError::Syntax {
            path: PathBuf::new(),
            message: e.to_string(),
        })?;
        let warnings = unknown_keys(&ini);
        let r = Reader { ini: &ini, base };

        let lev_threshold = r.parse("bhtexport", "levthreshold", MatchConfig::DEFAULT_LEV_THRESHOLD)?;
        let match_threshold = r.parse("bhtexport", "matchthreshold", MatchConfig::DEFAULT_MATCH_THRESHOLD)?;
        let matching = MatchConfig::new(lev_threshold, match_threshold)
            .map_err(|e| invalid("bhtexport", "matchthreshold", &match_threshold.to_string(), &e.to_string()))?;

        let files_path = match r.raw("harvester", "filespath") {
            Some("") => None,
            Some(p) => Some(base.join(p)),
            None => Some(base.join("./files-harvester")),
        };

        let config = Config {
            db: DbConfig {
                url: r.optional("db", "url"),
                db: r.path("db", "db", "./nihonbib-store")?,
                user: r.optional("db", "user"),
                password: r.optional("db", "password"),
            },
            japnamesdb: JapNamesConfig {
                table: r.string("japnamesdb", "table", "japnames"),
                use_unclassified_names: r.boolean("japnamesdb", "useunclassifiednames", false)?,
                max_vowel_sites: r.parse("japnamesdb", "maxvowelsites", DEFAULT_MAX_VOWEL_SITES)?,
            },
            dblpdb: DblpDbConfig {
                authors_count_table: r.string("dblpdb", "authorscounttable", "dblpauthors"),
                dblp_table: r.string("dblpdb", "dblptable", "dblp"),
                coauthors_table: r.string("dblpdb", "coauthorstable", "dblpcoauthors"),
            },
            oaidb: OaiDbConfig {
                publication_table: r.string("oaidb", "publicationtable", "oai_publications"),
                authors_table: r.string("oaidb", "authorstable", "oai_authors"),
                titles_table: r.string("oaidb", "titlestable", "oai_titles"),
                contributors_table: r.string("oaidb", "contributorstable", "oai_contributors"),
                descriptions_table: r.string("oaidb", "descriptionstable", "oai_descriptions"),
            },
            enamdict: EnamdictConfig {
                file: r.path("enamdict", "file", "./enamdict")?,
            },
            harvester: HarvesterConfig {
                files_path,
                min_id: r.parse("harvester", "minid", 1)?,
                max_id: r.parse("harvester", "maxid", 100_000)?,
                use_list_records: r.boolean("harvester", "uselistrecords", true)?,
                endpoint: resolve_endpoint(&r.string("harvester", "endpoint", DEFAULT_ENDPOINT), base),
                metadata_prefix: r.string("harvester", "metadataprefix", "junii2"),
                identifier_prefix: r.string("harvester", "identifierprefix", DEFAULT_IDENTIFIER_PREFIX),
                delay_ms: r.parse("harvester", "delayms", 0)?,
            },
            dblp: DblpConfig {
                xml_file: r.path("dblp", "xmlfile", "/dblp/dblp.xml")?,
                flush_interval: r.parse("dblp", "flushinterval", DEFAULT_FLUSH_INTERVAL)?,
            },
            bhtexport: BhtExportConfig {
                path: r.path("bhtexport", "path", "./bht")?,
                show_common_coauthors: r.boolean("bhtexport", "showcommoncoauthors", true)?,
                matching,
            },
            log: LogConfig {
                path: r.path("log", "path", "./log")?,
            },
            warnings,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let h = &self.harvester;
        if h.min_id > h.max_id {
            return Err(invalid(
                "harvester",
                "minid",
                &h.min_id.to_string(),
                &format!("must not exceed maxid ({})", h.max_id),
            ));
        }
        if self.dblp.flush_interval == 0 {
            return Err(invalid("dblp", "flushinterval", "0", "must be positive"));
        }
        Ok(())
    }
}

fn resolve_endpoint(endpoint: &str, base: &Path) -> String {
    match endpoint.strip_prefix("dir:") {
        Some(p) => format!("dir:{}", base.join(p).display()),
        None => endpoint.to_string(),
    }
}

fn unknown_keys(ini: &Ini) -> Vec<String> {
    let mut out = Vec::new();
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            for (key, _) in props.iter() {
                out.push(format!("config key {key} outside any section ignored"));
            }
            continue;
        };
        match KNOWN_KEYS.iter().find(|(s, _)| *s == section) {
            None => out.push(format!("unknown config section [{section}] ignored")),
            Some((_, keys)) => {
                for (key, _) in props.iter() {
                    if !keys.contains(&key) {
                        out.push(format!("unknown config key {section}.{key} ignored"));
                    }
                }
            }
        }
    }
    out
}
