//! OAI-PMH client: ListRecords with resumption tokens, GetRecord,
//! ListMetadataFormats, and the junii2 payload mapping.

mod junii2;
pub mod mock;
mod response;

use std::fs;
use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use junii2::{parse_junii2, Creator, HarvestedPublication, Language, Title};
pub use response::{parse_response, OaiResponse};

#[derive(Debug, Error)]
pub enum OaiError {
    #[error("transport failure for {url} after {attempts} attempt(s): {message}")]
    Transport {
        url: String,
        attempts: u32,
        message: String,
    },
    #[error("OAI-PMH error {code}: {message}")]
    Protocol { code: String, message: String },
    #[error("unparseable OAI-PMH response: {0}")]
    Xml(String),
    #[error("malformed record {identifier}: {reason}")]
    MalformedRecord { identifier: String, reason: String },
    #[error("invalid id range {min}..={max}")]
    InvalidRange { min: u64, max: u64 },
    #[error("record sink failed: {0}")]
    Sink(String),
}

impl OaiError {
    pub fn protocol_code(&self) -> Option<&str> {
        match self {
            OaiError::Protocol { code, .. } => Some(code),
            _ => None,
        }
    }
}

/// One protocol record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OaiRecord {
    pub identifier: String,
    pub datestamp: String,
    pub deleted: bool,
    /// Raw XML of the element inside `metadata`.
    pub payload: Option<String>,
}

/// Source of raw response bodies for request URLs.
pub trait Fetcher {
    fn fetch(&mut self, url: &str) -> Result<String, String>;
}

/// Live HTTP transport.
pub struct HttpFetcher {
    agent: ureq::Agent,
}

impl HttpFetcher {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpFetcher { agent }
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&mut self, url: &str) -> Result<String, String> {
        let mut response = self.agent.get(url).call().map_err(|e| e.to_string())?;
        response.body_mut().read_to_string().map_err(|e| e.to_string())
    }
}

/// Wraps a fetcher and keeps every response body under `dir` as
/// `response-NNNNNN.xml`, numbered in request order.
pub struct RecordingFetcher<F> {
    inner: F,
    dir: PathBuf,
    count: u64,
}

impl<F: Fetcher> RecordingFetcher<F> {
    pub fn new(inner: F, dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(RecordingFetcher { inner, dir, count: 0 })
    }

    pub fn into_inner(self) -> F {
        self.inner
    }
}

impl<F: Fetcher> Fetcher for RecordingFetcher<F> {
    fn fetch(&mut self, url: &str) -> Result<String, String> {
        let body = self.inner.fetch(url)?;
        self.count += 1;
        let path = self.dir.join(format!("response-{:06}.xml", self.count));
        if let Err(e) = fs::write(&path, &body) {
            warn!("could not keep response in {}: {e}", path.display());
        }
        Ok(body)
    }
}

const QUERY_VALUE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'_')
    .remove(b'.')
    .remove(b'~')
    .remove(b':');

fn encode(value: &str) -> String {
    utf8_percent_encode(value, QUERY_VALUE).to_string()
}

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

/// Request builder and protocol handling for one Data Provider.
pub struct OaiClient<F> {
    fetcher: F,
    endpoint: String,
    retry: RetryPolicy,
    delay: Duration,
    requests: u64,
    from: Option<String>,
    until: Option<String>,
}

impl<F: Fetcher> OaiClient<F> {
    pub fn new(fetcher: F, endpoint: impl Into<String>) -> Self {
        OaiClient {
            fetcher,
            endpoint: endpoint.into(),
            retry: RetryPolicy::default(),
            delay: Duration::ZERO,
            requests: 0,
            from: None,
            until: None,
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Pause before every request after the first.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    /// Datestamp window for the first ListRecords request.
    pub fn with_window(mut self, from: Option<String>, until: Option<String>) -> Self {
        self.from = from;
        self.until = until;
        self
    }

    pub fn requests_sent(&self) -> u64 {
        self.requests
    }

    pub fn fetcher(&self) -> &F {
        &self.fetcher
    }

    pub fn into_fetcher(self) -> F {
        self.fetcher
    }

    fn url(&self, params: &[(&str, &str)]) -> String {
        let sep = if self.endpoint.contains('?') { '&' } else { '?' };
        let query: Vec<String> = params.iter().map(|(k, v)| format!("{k}={}", encode(v))).collect();
        format!("{}{sep}{}", self.endpoint, query.join("&"))
    }

    pub fn list_records_url(&self, prefix: &str, token: Option<&str>) -> String {
        match token {
            Some(t) => self.url(&[("verb", "ListRecords"), ("resumptionToken", t)]),
            None => {
                let mut params = vec![("verb", "ListRecords"), ("metadataPrefix", prefix)];
                if let Some(f) = &self.from {
                    params.push(("from", f));
                }
                if let Some(u) = &self.until {
                    params.push(("until", u));
                }
                self.url(&params)
            }
        }
    }

    pub fn get_record_url(&self, prefix: &str, identifier: &str) -> String {
        self.url(&[("verb", "GetRecord"), ("metadataPrefix", prefix), ("identifier", identifier)])
    }

    pub fn list_metadata_formats_url(&self) -> String {
        self.url(&[("verb", "ListMetadataFormats")])
    }

    fn request(&mut self, url: &str) -> Result<OaiResponse, OaiError> {
        if self.requests > 0 && !self.delay.is_zero() {
            thread::sleep(self.delay);
        }
        self.requests += 1;
        let attempts = self.retry.attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            debug!("GET {url} (attempt {attempt})");
            match self.fetcher.fetch(url) {
                Ok(body) => return parse_response(&body),
                Err(e) => {
                    warn!("request failed (attempt {attempt}/{attempts}): {e}");
                    last = e;
                    if attempt < attempts {
                        thread::sleep(self.retry.base_delay * 2u32.pow(attempt - 1));
                    }
                }
            }
        }
        Err(OaiError::Transport {
            url: url.to_string(),
            attempts,
            message: last,
        })
    }

    /// One ListRecords page and the token for the next, if any.
    pub fn list_records(&mut self, prefix: &str, token: Option<&str>) -> Result<(Vec<OaiRecord>, Option<String>), OaiError> {
        let url = self.list_records_url(prefix, token);
        let response = self.request(&url)?;
        match response.error {
            Some((code, _)) if code == "noRecordsMatch" => Ok((Vec::new(), None)),
            Some((code, message)) => Err(OaiError::Protocol { code, message }),
            None => Ok((response.records, response.resumption_token)),
        }
    }

    /// The record, or `None` when the provider answers idDoesNotExist.
    pub fn get_record(&mut self, prefix: &str, identifier: &str) -> Result<Option<OaiRecord>, OaiError> {
        let url = self.get_record_url(prefix, identifier);
        let response = self.request(&url)?;
        match response.error {
            Some((code, _)) if code == "idDoesNotExist" => Ok(None),
            Some((code, message)) => Err(OaiError::Protocol { code, message }),
            None => Ok(response.records.into_iter().next()),
        }
    }

    pub fn list_metadata_formats(&mut self) -> Result<Vec<String>, OaiError> {
        let url = self.list_metadata_formats_url();
        let response = self.request(&url)?;
        match response.error {
            Some((code, message)) => Err(OaiError::Protocol { code, message }),
            None => Ok(response.formats),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarvestMode {
    List,
    IdRange { min: u64, max: u64 },
}

/// A retrieved record and, for live records, the outcome of parsing its payload.
#[derive(Debug)]
pub struct HarvestItem {
    pub record: OaiRecord,
    pub publication: Option<Result<HarvestedPublication, OaiError>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestSummary {
    pub requests: u64,
    pub records: u64,
    pub deleted: u64,
    pub parsed: u64,
    pub malformed: u64,
    pub not_found: u64,
}

/// Parses the payload of a live record. Deleted records yield `None`.
pub fn parse_record(record: &OaiRecord) -> Option<Result<HarvestedPublication, OaiError>> {
    if record.deleted {
        return None;
    }
    let result = match &record.payload {
        Some(payload) => parse_junii2(payload).map(|mut p| {
            p.identifier = record.identifier.clone();
            p
        }),
        None => Err("no metadata payload".to_string()),
    };
    Some(result.map_err(|reason| OaiError::MalformedRecord {
        identifier: record.identifier.clone(),
        reason,
    }))
}

/// Retrieves every record of the repository in retrieval order. List mode
/// follows resumption tokens to exhaustion; id-range mode asks for
/// `identifier_prefix` + n for each n in the range and skips ids the provider
/// does not know. Parse failures are passed to `sink`, not raised.
pub fn harvest<F, S>(
    client: &mut OaiClient<F>,
    prefix: &str,
    mode: HarvestMode,
    identifier_prefix: &str,
    mut sink: S,
) -> Result<HarvestSummary, OaiError>
where
    F: Fetcher,
    S: FnMut(HarvestItem) -> Result<(), OaiError>,
{
    let start_requests = client.requests_sent();
    let mut summary = HarvestSummary::default();
    let mut emit = |record: OaiRecord, summary: &mut HarvestSummary| {
        summary.records += 1;
        let publication = parse_record(&record);
        match &publication {
            None => summary.deleted += 1,
            Some(Ok(_)) => summary.parsed += 1,
            Some(Err(e)) => {
                warn!("{e}");
                summary.malformed += 1;
            }
        }
        sink(HarvestItem { record, publication })
    };

    match mode {
        HarvestMode::List => {
            let mut token: Option<String> = None;
            loop {
                let (records, next) = client.list_records(prefix, token.as_deref())?;
                for record in records {
                    emit(record, &mut summary)?;
                }
                match next {
                    Some(t) if !t.is_empty() => token = Some(t),
                    _ => break,
                }
            }
        }
        HarvestMode::IdRange { min, max } => {
            if min > max {
                return Err(OaiError::InvalidRange { min, max });
            }
            for id in min..=max {
                let identifier = format!("{identifier_prefix}{id}");
                match client.get_record(prefix, &identifier)? {
                    Some(record) => emit(record, &mut summary)?,
                    None => summary.not_found += 1,
                }
            }
        }
    }
    summary.requests = client.requests_sent() - start_requests;
    Ok(summary)
}
