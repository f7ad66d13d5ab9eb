//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints its own line; exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Cursor;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestRunner};

use nihonbib::bht_export::{self, render_spf, BhtEntry};
use nihonbib::dblp_corpus::{coauthor_edges, parse_corpus, CorpusPublication};
use nihonbib::enamdict::{parse_entry_line, parse_file, WarningKind};
use nihonbib::name_matching::{
    detect_abbreviated, kanji_name_candidates, resolve_author, split_latin_full_name, NameDictionary, NameStatus,
    PersonName,
};
use nihonbib::oai_harvester::mock::MockProvider;
use nihonbib::oai_harvester::{self, parse_response, Fetcher, HarvestMode, OaiClient};
use nihonbib::similarity::{jaccard, jaccard_lev, levenshtein, MatchConfig};
use nihonbib::transcription::{expand_double_vowels, strip_length_h, to_hepburn, NormalizedLatin};

const ENAMDICT_BUDGET: Duration = Duration::from_secs(1);
const END_TO_END_BUDGET: Duration = Duration::from_secs(30);
const RANDOM_CASES: u32 = 10_000;
const JACCARD_CASES: u32 = 1_000;
const FLOAT_TOLERANCE: f64 = 1e-12;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(PtConfig {
        cases,
        failure_persistence: None,
        ..PtConfig::default()
    })
}

fn fixture_dictionary() -> NameDictionary {
    let text = fs::read_to_string(fixtures().join("enamdict.txt")).unwrap();
    let (records, _) = parse_file(Cursor::new(text), true).unwrap();
    NameDictionary::new(records, false)
}

fn enamdict_fixture() {
    let text = fs::read_to_string(fixtures().join("enamdict.txt")).unwrap();
    assert!(text.lines().count() >= 30);

    let started = Instant::now();
    let (records, warnings) = parse_file(Cursor::new(text.as_str()), false).unwrap();
    let elapsed = started.elapsed();
    assert!(elapsed < ENAMDICT_BUDGET, "parse took {elapsed:?}");

    let expected: Vec<(&str, Option<&str>, &str, &str)> = vec![
        ("森田", Some("もりだ"), "Morida", "s"),
        ("イブ", None, "Eve", "f"),
        ("イブ", None, "Ibu", "f"),
        ("イブ", None, "Yves", "m"),
        ("甲子太郎", Some("かしたろう"), "Kashitarou", "m"),
        ("森", Some("もり"), "Mori", "s"),
        ("信介", Some("しんすけ"), "Shinsuke", "m"),
        ("坪井", Some("つぼい"), "Tsuboi", "s"),
        ("祐太", Some("ゆうた"), "Yuuta", "m"),
        ("菅谷", Some("すがたに"), "Sugatani", "s"),
        ("菅谷", Some("すがのや"), "Suganoya", "s"),
        ("菅谷", Some("すがや"), "Sugaya", "s"),
        ("菅谷", Some("すげたに"), "Sugetani", "s"),
        ("菅谷", Some("すげのや"), "Sugenoya", "s"),
        ("正弘", Some("しょうぐ"), "Shougu", "m"),
        ("正弘", Some("せいひろ"), "Seihiro", "m"),
        ("正弘", Some("ただひろ"), "Tadahiro", "m"),
        ("正弘", Some("まさひろ"), "Masahiro", "m"),
        ("後藤", Some("ごとう"), "Gotou", "s"),
        ("仁", Some("ひとし"), "Hitoshi", "m"),
        ("真一", Some("しんいち"), "Shin'ichi", "m"),
        ("純也", Some("じゅんや"), "Jun'ya", "m"),
        ("薫", Some("かおる"), "Kaoru", "f,m"),
        ("中村", Some("なかむら"), "Nakamura", "s"),
        ("武志", Some("たけし"), "Takeshi", "m"),
        ("三村", Some("みむら"), "Mimura", "s"),
        ("正人", Some("まさと"), "Masato", "m"),
        ("山田", Some("やまだ"), "Yamada", "s"),
        ("太郎", Some("たろう"), "Tarou", "m"),
        ("吉岡", Some("よしおか"), "Yoshioka", "s"),
        ("信和", Some("のぶかず"), "Nobukazu", "m"),
        ("ゆき", None, "Yuki", "f"),
        ("中田", Some("なかた"), "Nakata", "s"),
        ("中田", Some("なかた"), "Nakata", "g"),
        ("洋介", Some("ようすけ"), "Yousuke", "m"),
    ];
    let multiset = |items: Vec<(String, Option<String>, String, String)>| {
        let mut m: BTreeMap<_, usize> = BTreeMap::new();
        for i in items {
            *m.entry(i).or_default() += 1;
        }
        m
    };
    let got = multiset(
        records
            .iter()
            .map(|r| (r.surface.clone(), r.reading.clone(), r.latin.clone(), r.types.codes()))
            .collect(),
    );
    let want = multiset(
        expected
            .iter()
            .map(|(s, r, l, t)| (s.to_string(), r.map(str::to_string), l.to_string(), t.to_string()))
            .collect(),
    );
    assert_eq!(got, want);

    let kinds: Vec<(usize, WarningKind)> = warnings.iter().map(|w| (w.line, w.kind)).collect();
    assert_eq!(
        kinds,
        vec![
            (5, WarningKind::MissingTerminalSlash),
            (6, WarningKind::StrayBracket),
            (7, WarningKind::StrayBracket),
        ]
    );

    let ib = "イブ /(f) Eve/(u) Ib/Ibu (f)/(m) Yves/";
    assert_eq!(parse_entry_line(ib, false).len(), 3);
    let with_u = parse_entry_line(ib, true);
    assert_eq!(with_u.len(), 4);
    assert!(with_u.iter().any(|r| r.latin == "Ib" && r.types.codes() == "u"));

    let (all, _) = parse_file(Cursor::new(text.as_str()), true).unwrap();
    assert_eq!(all.len(), records.len() + 2);
}

const HEPBURN_TABLE: [(&str, &str); 18] = [
    ("tu", "tsu"),
    ("ti", "chi"),
    ("sya", "sha"),
    ("syo", "sho"),
    ("syu", "shu"),
    ("zya", "ja"),
    ("zyo", "jo"),
    ("zyu", "ju"),
    ("tya", "cha"),
    ("tyo", "cho"),
    ("tyu", "chu"),
    ("si", "shi"),
    ("hu", "fu"),
    ("zi", "ji"),
    ("jya", "ja"),
    ("jyo", "jo"),
    ("jyu", "ju"),
    ("l", "r"),
];

fn capitalized(s: &str) -> String {
    let mut c = s.chars();
    let first = c.next().unwrap().to_ascii_uppercase();
    std::iter::once(first).chain(c).collect()
}

fn hepburn() {
    for (from, to) in HEPBURN_TABLE {
        assert_eq!(to_hepburn(from), to, "{from}");
        assert_eq!(to_hepburn(&capitalized(from)), capitalized(to), "{from}");
        // embedded between neutral letters
        assert_eq!(to_hepburn(&format!("a{from}a")), format!("a{to}a"), "a{from}a");
    }
    runner(RANDOM_CASES)
        .run(&"[A-Za-z]{0,16}", |s| {
            let once = to_hepburn(&s);
            prop_assert_eq!(to_hepburn(&once), once);
            Ok(())
        })
        .unwrap();
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn gotoh_variants() {
    let stripped = strip_length_h("Gotoh");
    assert_eq!(stripped.text, "Goto");
    assert_eq!(stripped.lengthening.len(), 1);
    let with_info: BTreeSet<String> = expand_double_vowels(&stripped, 8).unwrap().into_iter().collect();
    assert_eq!(with_info, set(&["Gotoo", "Gotou", "Gootoo", "Goutoo", "Gootou", "Goutou"]));

    let without: BTreeSet<String> = expand_double_vowels(&NormalizedLatin::plain("Goto"), 8)
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(
        without,
        set(&["Goto", "Gooto", "Gouto", "Gotoo", "Gotou", "Gootoo", "Goutoo", "Gootou", "Goutou"])
    );
}

/// Exhaustive edit-distance search: breadth-first over single edits until
/// `t` is reached. Only usable for short strings.
fn brute_force_levenshtein(s: &str, t: &str) -> usize {
    let alphabet: BTreeSet<char> = s.chars().chain(t.chars()).collect();
    let mut frontier: BTreeSet<String> = BTreeSet::from([s.to_string()]);
    let mut seen = frontier.clone();
    for depth in 0.. {
        if frontier.contains(t) {
            return depth;
        }
        let mut next = BTreeSet::new();
        for w in &frontier {
            let chars: Vec<char> = w.chars().collect();
            let mut push = |v: Vec<char>| {
                let v: String = v.into_iter().collect();
                if seen.insert(v.clone()) {
                    next.insert(v);
                }
            };
            for i in 0..chars.len() {
                let mut del = chars.clone();
                del.remove(i);
                push(del);
                for &c in &alphabet {
                    let mut sub = chars.clone();
                    sub[i] = c;
                    push(sub);
                }
            }
            for i in 0..=chars.len() {
                for &c in &alphabet {
                    let mut ins = chars.clone();
                    ins.insert(i, c);
                    push(ins);
                }
            }
        }
        frontier = next;
    }
    unreachable!()
}

fn similarity() {
    assert_eq!(levenshtein("kitten", "sitting"), 3);
    assert_eq!(brute_force_levenshtein("kitten", "sitting"), 3);

    runner(RANDOM_CASES)
        .run(&("[a-e]{0,8}", "[a-e]{0,8}", "[a-e]{0,8}"), |(a, b, c)| {
            let ab = levenshtein(&a, &b);
            prop_assert_eq!(levenshtein(&a, &a), 0);
            prop_assert_eq!(ab == 0, a == b);
            prop_assert_eq!(ab, levenshtein(&b, &a));
            prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
            let (la, lb) = (a.chars().count(), b.chars().count());
            prop_assert!(la.abs_diff(lb) <= ab && ab <= la.max(lb));
            Ok(())
        })
        .unwrap();

    let cfg = MatchConfig::new(1, MatchConfig::DEFAULT_MATCH_THRESHOLD).unwrap();
    // small alphabet so the sets overlap and near-miss tokens are common
    let token_set = proptest::collection::btree_set("[a-c]{1,3}", 0..6);
    runner(JACCARD_CASES)
        .run(&(token_set.clone(), token_set), |(s, t)| {
            prop_assert!((jaccard_lev(&s, &t, &cfg) - jaccard(&s, &t)).abs() < FLOAT_TOLERANCE);
            Ok(())
        })
        .unwrap();
}

fn name_splitting() {
    let dict = fixture_dictionary();
    assert_eq!(
        split_latin_full_name("NobukazuYOSHIOKA", &dict),
        (PersonName::new("Nobukazu", "Yoshioka"), NameStatus::BadDataQuality)
    );
    assert!(detect_abbreviated("T. Nakamura"));
    let r = resolve_author(Some("T. Nakamura"), None, &dict);
    assert_eq!(r.status, NameStatus::Abbreviated);
    assert_eq!(r.latin.unwrap().family, "Nakamura");

    let candidates: Vec<String> = kanji_name_candidates("菅谷正弘", &dict)
        .iter()
        .map(PersonName::display_latin)
        .collect();
    let mut expected = Vec::new();
    for family in ["Sugatani", "Suganoya", "Sugaya", "Sugetani", "Sugenoya"] {
        for given in ["Shougu", "Seihiro", "Tadahiro", "Masahiro"] {
            expected.push(format!("{given} {family}"));
        }
    }
    assert_eq!(candidates, expected);
}

/// Records the number of records in every response it passes through.
struct PageCounter {
    inner: MockProvider,
    pages: Vec<usize>,
}

impl Fetcher for PageCounter {
    fn fetch(&mut self, url: &str) -> Result<String, String> {
        let body = self.inner.fetch(url)?;
        if let Ok(r) = parse_response(&body) {
            if r.error.is_none() {
                self.pages.push(r.records.len());
            }
        }
        Ok(body)
    }
}

fn mock_oai() {
    const PREFIX: &str = "oai:mock.example:";
    const GAP: u64 = 137;
    let mut provider = MockProvider::new("http://mock.example/oai", PREFIX);
    let mut id = 0;
    let mut inserted = 0;
    while inserted < 250 {
        id += 1;
        if id == GAP {
            continue;
        }
        let payload = (inserted % 50 != 7).then(|| {
            format!("<junii2><title xml:lang=\"en\">Paper {id}</title><creator>Taro Yamada</creator></junii2>")
        });
        provider.insert(id, payload);
        inserted += 1;
    }
    let max_id = id;

    let mut list_items = BTreeSet::new();
    let mut client = OaiClient::new(
        PageCounter {
            inner: provider.clone(),
            pages: vec![],
        },
        "http://mock.example/oai",
    );
    let summary = oai_harvester::harvest(&mut client, "junii2", HarvestMode::List, PREFIX, |item| {
        list_items.insert((item.record.identifier.clone(), item.record.deleted));
        Ok(())
    })
    .unwrap();
    assert_eq!(client.fetcher().pages, vec![100, 100, 50]);
    assert_eq!((summary.records, summary.deleted, summary.parsed), (250, 5, 245));

    let mut range_items = BTreeSet::new();
    let mut client = OaiClient::new(provider, "http://mock.example/oai");
    let summary = oai_harvester::harvest(
        &mut client,
        "junii2",
        HarvestMode::IdRange { min: 1, max: max_id },
        PREFIX,
        |item| {
            range_items.insert((item.record.identifier.clone(), item.record.deleted));
            Ok(())
        },
    )
    .unwrap();
    assert_eq!(range_items, list_items);
    assert_eq!(summary.not_found, 1);
    assert_eq!(client.get_record("junii2", &format!("{PREFIX}{GAP}")).unwrap(), None);
}

fn dblp_fixture() {
    let file = fs::File::open(fixtures().join("dblp.xml")).unwrap();
    let corpus = parse_corpus(std::io::BufReader::new(file)).unwrap();
    let codd = corpus.get("persons/Codd71a").expect("Codd71a parsed");
    assert_eq!(codd.key, "persons/Codd71a");
    assert_eq!(codd.authors, vec!["E. F. Codd".to_string()]);
    assert_eq!(codd.title, "Further Normalization of the Data Base Relational Model.");
    assert_eq!(codd.journal.as_deref(), Some("IBM Research Report, San Jose, California"));
    assert_eq!(codd.volume.as_deref(), Some("RJ909"));
    assert_eq!(codd.year, Some(1971));
    let hall = corpus.get("persons/Hall74").unwrap();
    assert_eq!(hall.authors, vec!["Patrick A. V. Hall".to_string()]);
    assert!(corpus
        .get("persons/Tresch96")
        .unwrap()
        .journal
        .as_deref()
        .unwrap()
        .contains("ETH Zürich"));

    let mut total_edges = 0;
    for p in corpus.publications() {
        let n = p.authors.iter().collect::<BTreeSet<_>>().len();
        let edges = coauthor_edges(p).len();
        assert_eq!(edges, n * (n.saturating_sub(1)) / 2, "{}", p.key);
        total_edges += edges;
    }
    assert_eq!(corpus.edges().len(), total_edges);
    let five = CorpusPublication {
        id: 99,
        key: "x/five".into(),
        kind: "article".into(),
        authors: ["A a", "B b", "C c", "D d", "E e"].map(String::from).to_vec(),
        title: "T.".into(),
        year: None,
        journal: None,
        pages: None,
        volume: None,
    };
    assert_eq!(coauthor_edges(&five).len(), 10);

    let cfg = MatchConfig::default();
    let title = "Pointwise Prediction for Robust, Adaptable Japanese Morphological Analysis";
    let mori = vec!["Shinsuke Mori".to_string()];
    assert_eq!(corpus.find_publication(title, &mori, &cfg), Some("conf/acl/NeubigM11"));
    assert_eq!(
        corpus.find_publication(title, &["Taro Yamada".to_string()], &cfg),
        None,
        "same title, no shared author"
    );
    assert_eq!(
        corpus.find_publication("A Pointwise Approach to Automatic Word Segmentation", &mori, &cfg),
        None,
        "shared author, different title"
    );
}

fn golden_bht() {
    let golden = fs::read_to_string(fixtures().join("golden/78161.bht")).unwrap();
    let payload = fs::read_to_string(fixtures().join("repository/78161.xml")).unwrap();
    let mut publication = oai_harvester::parse_junii2(&payload).unwrap();
    publication.identifier = "oai:ipsj.ixsq.nii.ac.jp:78161".into();

    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let cfg = nihonbib::pipeline::Config::load(&config).unwrap();
    let store = nihonbib::pipeline::TableStore::open(&cfg.db.db).unwrap();
    nihonbib::pipeline::stage_parse_dblp(&cfg, &store).unwrap();
    nihonbib::pipeline::stage_enamdict(&cfg, &store).unwrap();
    let dict = nihonbib::pipeline::load_dictionary(&cfg, &store).unwrap();
    let corpus = nihonbib::pipeline::load_corpus(&cfg, &store).unwrap();
    let processed = nihonbib::pipeline::process_publication(&publication, &dict, &corpus, &cfg);
    assert_eq!(processed.spf, golden);

    let entry = BhtEntry::from_publication(&publication, processed.resolutions.clone(), processed.common_coauthors, None);
    assert_eq!(render_spf(&entry), golden);

    // concatenation: idempotent and independent of creation order
    let tree = |order: &[&str]| {
        let root = tempfile::tempdir().unwrap();
        for name in order {
            let text = golden.replace("2944-2952", name);
            bht_export::write_spf(root.path(), Path::new(&format!("j/52/10/{name}.bht")), &text).unwrap();
        }
        root
    };
    let a = tree(&["1", "2", "10"]);
    let b = tree(&["10", "1", "2"]);
    bht_export::concatenate(a.path()).unwrap();
    let first = fs::read(a.path().join("j/52/10/all.bht")).unwrap();
    bht_export::concatenate(a.path()).unwrap();
    assert_eq!(fs::read(a.path().join("j/52/10/all.bht")).unwrap(), first);
    bht_export::concatenate(b.path()).unwrap();
    assert_eq!(fs::read(b.path().join("j/52/10/all.bht")).unwrap(), first);
    let expected: String = ["1", "10", "2"].iter().map(|n| golden.replace("2944-2952", n)).collect();
    assert_eq!(String::from_utf8(first).unwrap(), expected);
}

fn write_config(dir: &Path) -> PathBuf {
    let fx = fixtures();
    let text = format!(
        "[db]\ndb=./store\n\
         [japnamesdb]\nuseunclassifiednames=false\n\
         [enamdict]\nfile={}\n\
         [harvester]\nfilespath=\nuselistrecords=true\nendpoint=dir:{}\n\
         [dblp]\nxmlfile={}\n\
         [bhtexport]\npath=./bht\nshowcommoncoauthors=true\n\
         [log]\npath=./log\n",
        fx.join("enamdict.txt").display(),
        fx.join("repository").display(),
        fx.join("dblp.xml").display()
    );
    let path = dir.join("config.ini");
    fs::write(&path, text).unwrap();
    path
}

/// Every file below `root` except log files, keyed by relative path.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn end_to_end() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path());
        let started = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_nihonbib"))
            .arg("--all")
            .arg("--config")
            .arg(&config)
            .output()
            .unwrap();
        let elapsed = started.elapsed();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(elapsed < END_TO_END_BUDGET, "run took {elapsed:?}");
        let bht = snapshot(&dir.path().join("bht"));
        let stats = fs::read(dir.path().join("log/stats.json")).unwrap();
        (dir, bht, stats)
    };
    let (_a, bht_a, stats_a) = run();
    let (_b, bht_b, stats_b) = run();
    assert!(bht_a.keys().any(|p| p.ends_with("78161.bht")));
    assert!(bht_a.keys().any(|p| p.ends_with("all.bht")));
    assert_eq!(bht_a, bht_b);
    assert_eq!(stats_a, stats_b);
}

fn main() {
    let criteria: [(&str, fn()); 9] = [
        ("enamdict fixture parses to the expected record multiset", enamdict_fixture),
        ("to_hepburn table and idempotence", hepburn),
        ("Gotoh vowel variants with and without lengthening", gotoh_variants),
        ("levenshtein metric, oracle and jaccard_lev reduction", similarity),
        ("name splitting and abbreviation", name_splitting),
        ("mock OAI provider in list and id-range mode", mock_oai),
        ("DBLP fixture fields, edge counts and dedup", dblp_fixture),
        ("golden BHT and concatenation", golden_bht),
        ("end-to-end determinism and runtime", end_to_end),
    ];
    panic::set_hook(Box::new(|info| eprintln!("    {info}")));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let ok = panic::catch_unwind(AssertUnwindSafe(check)).is_ok();
        if !ok {
            failed += 1;
        }
        println!("criterion {} {:<58} {}", i + 1, name, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
