use quick_xml::events::Event;
use quick_xml::{Reader, XmlVersion};

use super::{OaiError, OaiRecord};
use crate::dblp_corpus::resolve_reference;

/// Parsed OAI-PMH envelope. Only the parts the harvester needs are kept.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OaiResponse {
    /// `(code, message)` of the first error element.
    pub error: Option<(String, String)>,
    pub records: Vec<OaiRecord>,
    /// Next-page token; `None` when absent or empty.
    pub resumption_token: Option<String>,
    pub formats: Vec<String>,
}

#[derive(Default)]
struct PartialRecord {
    identifier: String,
    datestamp: String,
    deleted: bool,
    payload: Option<String>,
}

pub fn parse_response(body: &str) -> Result<OaiResponse, OaiError> {
    let mut reader = Reader::from_str(body);
    let mut out = OaiResponse::default();
    let mut stack: Vec<String> = Vec::new();
    let mut text = String::new();
    let mut record: Option<PartialRecord> = None;
    let mut error_code: Option<String> = None;

    let xml_err = |reader: &Reader<&[u8]>, e: quick_xml::Error| {
        OaiError::Xml(format!("at byte {}: {e}", reader.error_position()))
    };

    loop {
        let event = reader.read_event().map_err(|e| xml_err(&reader, e))?;
        match event {
            Event::Start(start) => {
                let name = start.local_name().as_ref().to_string();
                text.clear();
                match name.as_str() {
                    "record" => record = Some(PartialRecord::default()),
                    "header" => {
                        let deleted = start.attributes().flatten().any(|a| {
                            a.key.local_name().as_ref() == "status"
                                && a.normalized_value(XmlVersion::Implicit1_0)
                                    .map(|v| v == "deleted")
                                    .unwrap_or(false)
                        });
                        if let Some(r) = record.as_mut() {
                            r.deleted = deleted;
                        }
                    }
                    "error" => {
                        error_code = start
                            .attributes()
                            .flatten()
                            .find(|a| a.key.as_ref() == "code")
                            .and_then(|a| a.normalized_value(XmlVersion::Implicit1_0).ok())
                            .map(|v| v.into_owned());
                    }
                    "metadata" if record.is_some() => {
                        let span = reader.read_to_end(start.name()).map_err(|e| xml_err(&reader, e))?;
                        let raw = &body[span.start as usize..span.end as usize];
                        if let Some(r) = record.as_mut() {
                            r.payload = Some(raw.trim().to_string());
                        }
                        continue;
                    }
                    _ => {}
                }
                stack.push(name);
            }
            Event::Empty(empty) => {
                let name = empty.local_name().as_ref().to_string();
                if name == "error" && out.error.is_none() {
                    let code = empty
                        .attributes()
                        .flatten()
                        .find(|a| a.key.as_ref() == "code")
                        .and_then(|a| a.normalized_value(XmlVersion::Implicit1_0).ok())
                        .map(|v| v.into_owned())
                        .unwrap_or_default();
                    out.error = Some((code, String::new()));
                }
            }
            Event::Text(t) => text.push_str(&t.xml10_content()),
            Event::CData(c) => text.push_str(&c.xml10_content()),
            Event::GeneralRef(r) => {
                if let Some(s) = resolve_reference(&r) {
                    text.push_str(&s);
                }
            }
            Event::End(_) => {
                let name = stack.pop().unwrap_or_default();
                let value = text.trim().to_string();
                match name.as_str() {
                    "identifier" if stack.last().map(String::as_str) == Some("header") => {
                        if let Some(r) = record.as_mut() {
                            r.identifier = value;
                        }
                    }
                    "datestamp" if stack.last().map(String::as_str) == Some("header") => {
                        if let Some(r) = record.as_mut() {
                            r.datestamp = value;
                        }
                    }
                    "record" => {
                        if let Some(r) = record.take() {
                            out.records.push(OaiRecord {
                                identifier: r.identifier,
                                datestamp: r.datestamp,
                                deleted: r.deleted,
                                payload: if r.deleted { None } else { r.payload },
                            });
                        }
                    }
                    "resumptionToken" => {
                        out.resumption_token = (!value.is_empty()).then_some(value);
                    }
                    "metadataPrefix" => out.formats.push(value),
                    "error" if out.error.is_none() => {
                        out.error = Some((error_code.take().unwrap_or_default(), value));
                    }
                    _ => {}
                }
                text.clear();
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}
