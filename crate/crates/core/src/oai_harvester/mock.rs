//! In-process OAI-PMH Data Provider for tests and fixture repositories.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use percent_encoding::percent_decode_str;

use super::Fetcher;

pub const DEFAULT_PAGE_SIZE: usize = 100;
const DATESTAMP: &str = "2012-11-13T00:00:00Z";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockRecord {
    pub datestamp: String,
    /// `None` marks a deleted record.
    pub payload: Option<String>,
}

/// Serves ListRecords, GetRecord and ListMetadataFormats over a fixed record
/// map keyed by the integer identifier suffix.
#[derive(Debug, Clone)]
pub struct MockProvider {
    base_url: String,
    identifier_prefix: String,
    records: BTreeMap<u64, MockRecord>,
    page_size: usize,
    formats: Vec<String>,
    requests: Vec<String>,
    failures_left: usize,
}

impl MockProvider {
    pub fn new(base_url: impl Into<String>, identifier_prefix: impl Into<String>) -> Self {
        MockProvider {
            base_url: base_url.into(),
            identifier_prefix: identifier_prefix.into(),
            records: BTreeMap::new(),
            page_size: DEFAULT_PAGE_SIZE,
            formats: vec!["oai_dc".to_string(), "junii2".to_string()],
            requests: Vec::new(),
            failures_left: 0,
        }
    }

    /// Loads `<n>.xml` files as live records and `<n>.deleted` files as
    /// deleted ones. Other files are ignored.
    pub fn from_dir(dir: &Path, base_url: &str, identifier_prefix: &str) -> std::io::Result<Self> {
        let mut provider = MockProvider::new(base_url, identifier_prefix);
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            let (Some(stem), Some(ext)) = (
                path.file_stem().and_then(|s| s.to_str()),
                path.extension().and_then(|s| s.to_str()),
            ) else {
                continue;
            };
            let Ok(id) = stem.parse::<u64>() else {
                continue;
            };
            match ext {
                "xml" => {
                    let text = fs::read_to_string(&path)?;
                    provider.insert(id, Some(strip_declaration(&text).trim().to_string()));
                }
                "deleted" => provider.insert(id, None),
                _ => {}
            }
        }
        Ok(provider)
    }

    pub fn insert(&mut self, id: u64, payload: Option<String>) {
        self.records.insert(
            id,
            MockRecord {
                datestamp: DATESTAMP.to_string(),
                payload,
            },
        );
    }

    pub fn remove(&mut self, id: u64) {
        self.records.remove(&id);
    }

    pub fn set_page_size(&mut self, size: usize) {
        self.page_size = size.max(1);
    }

    pub fn set_formats(&mut self, formats: &[&str]) {
        self.formats = formats.iter().map(|s| s.to_string()).collect();
    }

    /// Makes the next `n` requests fail at the transport level.
    pub fn fail_next(&mut self, n: usize) {
        self.failures_left = n;
    }

    pub fn requests(&self) -> &[String] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn envelope(&self, verb: &str, body: &str) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\">\n\
             <responseDate>{DATESTAMP}</responseDate>\n\
             <request verb=\"{verb}\">{}</request>\n{body}\n</OAI-PMH>\n",
            xml_escape(&self.base_url)
        )
    }

    fn error(&self, verb: &str, code: &str, message: &str) -> String {
        self.envelope(verb, &format!("<error code=\"{code}\">{}</error>", xml_escape(message)))
    }

    fn record_xml(&self, id: u64, rec: &MockRecord) -> String {
        let status = if rec.payload.is_none() { " status=\"deleted\"" } else { "" };
        let mut out = format!(
            "<record><header{status}><identifier>{}{id}</identifier><datestamp>{}</datestamp></header>",
            xml_escape(&self.identifier_prefix),
            rec.datestamp
        );
        if let Some(p) = &rec.payload {
            out.push_str("<metadata>");
            out.push_str(p);
            out.push_str("</metadata>");
        }
        out.push_str("</record>");
        out
    }

    fn list_records(&self, params: &BTreeMap<String, String>) -> String {
        let verb = "ListRecords";
        let (prefix, offset) = match params.get("resumptionToken") {
            Some(token) => {
                if params.len() != 2 {
                    return self.error(verb, "badArgument", "resumptionToken is exclusive");
                }
                match parse_token(token) {
                    Some((p, o)) if self.formats.contains(&p) && o > 0 && o < self.records.len() => (p, o),
                    _ => return self.error(verb, "badResumptionToken", "invalid or expired token"),
                }
            }
            None => match params.get("metadataPrefix") {
                Some(p) => (p.clone(), 0),
                None => return self.error(verb, "badArgument", "metadataPrefix required"),
            },
        };
        if !self.formats.contains(&prefix) {
            return self.error(verb, "cannotDisseminateFormat", &prefix);
        }
        if self.records.is_empty() {
            return self.error(verb, "noRecordsMatch", "empty repository");
        }
        let mut body = String::from("<ListRecords>\n");
        for (id, rec) in self.records.iter().skip(offset).take(self.page_size) {
            body.push_str(&self.record_xml(*id, rec));
            body.push('\n');
        }
        let next = offset + self.page_size;
        let total = self.records.len();
        if next < total {
            body.push_str(&format!(
                "<resumptionToken completeListSize=\"{total}\" cursor=\"{offset}\">{prefix}!{next}</resumptionToken>\n"
            ));
        } else if offset > 0 {
            body.push_str(&format!("<resumptionToken completeListSize=\"{total}\" cursor=\"{offset}\"/>\n"));
        }
        body.push_str("</ListRecords>");
        self.envelope(verb, &body)
    }

    fn get_record(&self, params: &BTreeMap<String, String>) -> String {
        let verb = "GetRecord";
        let (Some(prefix), Some(identifier)) = (params.get("metadataPrefix"), params.get("identifier")) else {
            return self.error(verb, "badArgument", "metadataPrefix and identifier required");
        };
        if !self.formats.contains(prefix) {
            return self.error(verb, "cannotDisseminateFormat", prefix);
        }
        let found = identifier
            .strip_prefix(&self.identifier_prefix)
            .and_then(|n| n.parse::<u64>().ok())
            .and_then(|n| self.records.get(&n).map(|r| (n, r)));
        match found {
            Some((id, rec)) => self.envelope(verb, &format!("<GetRecord>{}</GetRecord>", self.record_xml(id, rec))),
            None => self.error(verb, "idDoesNotExist", identifier),
        }
    }

    fn list_metadata_formats(&self) -> String {
        let mut body = String::from("<ListMetadataFormats>");
        for f in &self.formats {
            body.push_str(&format!("<metadataFormat><metadataPrefix>{f}</metadataPrefix></metadataFormat>"));
        }
        body.push_str("</ListMetadataFormats>");
        self.envelope("ListMetadataFormats", &body)
    }
}

fn parse_token(token: &str) -> Option<(String, usize)> {
    let (prefix, offset) = token.split_once('!')?;
    Some((prefix.to_string(), offset.parse().ok()?))
}

fn strip_declaration(text: &str) -> &str {
    let t = text.trim_start_matches('\u{feff}').trim_start();
    if t.starts_with("<?xml") {
        if let Some(end) = t.find("?>") {
            return &t[end + 2..];
        }
    }
    t
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn query_params(url: &str) -> BTreeMap<String, String> {
    let query = url.split_once('?').map(|(_, q)| q).unwrap_or("");
    query
        .split('&')
        .filter(|p| !p.is_empty())
        .filter_map(|p| {
            let (k, v) = p.split_once('=')?;
            Some((
                k.to_string(),
                percent_decode_str(v).decode_utf8_lossy().into_owned(),
            ))
        })
        .filter(|(k, _)| k != "action")
        .collect()
}

impl Fetcher for MockProvider {
    fn fetch(&mut self, url: &str) -> Result<String, String> {
        self.requests.push(url.to_string());
        if self.failures_left > 0 {
            self.failures_left -= 1;
            return Err("injected transport failure".to_string());
        }
        let params = query_params(url);
        let body = match params.get("verb").map(String::as_str) {
            Some("ListRecords") => self.list_records(&params),
            Some("GetRecord") => self.get_record(&params),
            Some("ListMetadataFormats") => self.list_metadata_formats(),
            Some(other) => self.error(other, "badVerb", "unsupported verb"),
            None => self.error("", "badVerb", "verb missing"),
        };
        Ok(body)
    }
}
