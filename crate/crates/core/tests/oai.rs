use std::time::Duration;

use nihonbib::oai_harvester::mock::MockProvider;
use nihonbib::oai_harvester::{harvest, Fetcher, HarvestMode, OaiClient, OaiError, RecordingFetcher, RetryPolicy};

const PREFIX: &str = "oai:mock.example:";

fn provider(n: u64) -> MockProvider {
    let mut p = MockProvider::new("http://mock.example/oai", PREFIX);
    for id in 1..=n {
        p.insert(id, Some(format!("<junii2><title>Paper {id}</title></junii2>")));
    }
    p
}

fn fast<F: Fetcher>(client: OaiClient<F>) -> OaiClient<F> {
    client.with_retry(RetryPolicy {
        attempts: 3,
        base_delay: Duration::ZERO,
    })
}

#[test]
fn transient_failures_are_retried() {
    let mut p = provider(3);
    p.fail_next(2);
    let mut client = fast(OaiClient::new(p, "http://mock.example/oai"));
    let summary = harvest(&mut client, "junii2", HarvestMode::List, PREFIX, |_| Ok(())).unwrap();
    assert_eq!(summary.parsed, 3);
    assert_eq!(client.requests_sent(), 1, "retries are not separate requests");
}

#[test]
fn persistent_failure_aborts() {
    let mut p = provider(3);
    p.fail_next(10);
    let mut client = fast(OaiClient::new(p, "http://mock.example/oai"));
    match harvest(&mut client, "junii2", HarvestMode::List, PREFIX, |_| Ok(())) {
        Err(OaiError::Transport { attempts, .. }) => assert_eq!(attempts, 3),
        other => panic!("expected transport error, got {other:?}"),
    }
}

#[test]
fn protocol_errors_surface_with_code() {
    let mut client = fast(OaiClient::new(provider(3), "http://mock.example/oai"));
    let err = client.list_records("junii2", Some("bogus")).unwrap_err();
    assert_eq!(err.protocol_code(), Some("badResumptionToken"));
    let err = client.list_records("marc21", None).unwrap_err();
    assert_eq!(err.protocol_code(), Some("cannotDisseminateFormat"));
}

#[test]
fn empty_repository_lists_nothing() {
    let mut client = fast(OaiClient::new(provider(0), "http://mock.example/oai"));
    let summary = harvest(&mut client, "junii2", HarvestMode::List, PREFIX, |_| Ok(())).unwrap();
    assert_eq!(summary.records, 0);
}

#[test]
fn metadata_formats() {
    let mut client = OaiClient::new(provider(1), "http://mock.example/oai");
    assert_eq!(client.list_metadata_formats().unwrap(), vec!["oai_dc", "junii2"]);
}

#[test]
fn inverted_range_is_rejected() {
    let mut client = OaiClient::new(provider(1), "http://mock.example/oai");
    let err = harvest(&mut client, "junii2", HarvestMode::IdRange { min: 5, max: 1 }, PREFIX, |_| Ok(())).unwrap_err();
    assert!(matches!(err, OaiError::InvalidRange { min: 5, max: 1 }));
}

#[test]
fn malformed_payload_is_reported_not_fatal() {
    let mut p = provider(2);
    p.insert(3, Some("<junii2><creator>No Title</creator></junii2>".into()));
    let mut client = OaiClient::new(p, "http://mock.example/oai");
    let mut bad = Vec::new();
    let summary = harvest(&mut client, "junii2", HarvestMode::List, PREFIX, |item| {
        if let Some(Err(e)) = item.publication {
            bad.push(e.to_string());
        }
        Ok(())
    })
    .unwrap();
    assert_eq!((summary.parsed, summary.malformed), (2, 1));
    assert!(bad[0].contains("oai:mock.example:3"));
}

#[test]
fn identifiers_are_carried_into_publications() {
    let mut client = OaiClient::new(provider(2), "http://mock.example/oai");
    let mut ids = Vec::new();
    harvest(&mut client, "junii2", HarvestMode::IdRange { min: 1, max: 2 }, PREFIX, |item| {
        ids.push(item.publication.unwrap().unwrap().identifier);
        Ok(())
    })
    .unwrap();
    assert_eq!(ids, vec!["oai:mock.example:1", "oai:mock.example:2"]);
}

#[test]
fn recording_fetcher_keeps_responses() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = provider(150);
    p.set_page_size(100);
    let fetcher = RecordingFetcher::new(p, dir.path().join("files")).unwrap();
    let mut client = OaiClient::new(fetcher, "http://mock.example/oai");
    harvest(&mut client, "junii2", HarvestMode::List, PREFIX, |_| Ok(())).unwrap();
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("files"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, vec!["response-000001.xml", "response-000002.xml"]);
}

#[test]
fn sink_error_stops_harvest() {
    let mut client = OaiClient::new(provider(5), "http://mock.example/oai");
    let mut seen = 0;
    let err = harvest(&mut client, "junii2", HarvestMode::List, PREFIX, |_| {
        seen += 1;
        if seen == 2 {
            Err(OaiError::Sink("store full".into()))
        } else {
            Ok(())
        }
    })
    .unwrap_err();
    assert!(matches!(err, OaiError::Sink(_)));
    assert_eq!(seen, 2);
}
