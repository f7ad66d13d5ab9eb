//! C ABI for the nihonbib library.
//!
//! Strings cross the boundary as NUL-terminated UTF-8. Every function returns
//! an [`NbStatus`]; on failure a message is available from [`nb_last_error`]
//! until the next call on the same thread. Strings handed out by the library
//! must be released with [`nb_string_free`], handles with their `_free`
//! function. Structured results are JSON text.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, Cursor};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nihonbib::bht_export::escape_non_ascii;
use nihonbib::dblp_corpus::{parse_corpus, Corpus};
use nihonbib::enamdict::parse_file;
use nihonbib::name_matching::{kanji_name_candidates, resolve_author, NameDictionary, PersonName};
use nihonbib::oai_harvester::parse_junii2;
use nihonbib::similarity::{levenshtein, names_match, MatchConfig};
use nihonbib::transcription::{latin_lookup_variants, to_hepburn};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    IoError = 5,
    Panic = 6,
}

/// Name dictionary built from ENAMDICT text.
pub struct NbDictionary {
    inner: NameDictionary,
}

/// Parsed DBLP corpus.
pub struct NbCorpus {
    inner: Corpus,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(NbStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> NbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NbStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NbStatus::Panic
        }
    }
}

unsafe fn input<'a>(ptr: *const c_char, name: &str) -> FfiResult<&'a str> {
    if ptr.is_null() {
        return Err(Failure(NbStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| Failure(NbStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn optional_input<'a>(ptr: *const c_char, name: &str) -> FfiResult<Option<&'a str>> {
    if ptr.is_null() {
        Ok(None)
    } else {
        input(ptr, name).map(Some)
    }
}

fn out_ptr<T>(out: *mut T, name: &str) -> FfiResult<()> {
    if out.is_null() {
        Err(Failure(NbStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> FfiResult<()> {
    out_ptr(out, "out")?;
    let c = CString::new(text).map_err(|_| Failure(NbStatus::InvalidArgument, "result contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write_json<T: serde::Serialize + ?Sized>(out: *mut *mut c_char, value: &T) -> FfiResult<()> {
    let text = serde_json::to_string(value).map_err(|e| Failure(NbStatus::ParseError, e.to_string()))?;
    write_string(out, text)
}

unsafe fn dictionary<'a>(dict: *const NbDictionary) -> FfiResult<&'a NameDictionary> {
    dict.as_ref()
        .map(|d| &d.inner)
        .ok_or_else(|| Failure(NbStatus::NullArgument, "dictionary is null".into()))
}

fn match_config(lev_threshold: usize, match_threshold: f64) -> FfiResult<MatchConfig> {
    MatchConfig::new(lev_threshold, match_threshold).map_err(|e| Failure(NbStatus::InvalidArgument, e.to_string()))
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library.
#[no_mangle]
pub extern "C" fn nb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a dictionary from ENAMDICT text held in memory.
///
/// # Safety
/// `text` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nb_dictionary_from_text(
    text: *const c_char,
    include_unclassified: bool,
    out: *mut *mut NbDictionary,
) -> NbStatus {
    guard(|| {
        let text = input(text, "text")?;
        out_ptr(out, "out")?;
        let (records, _) =
            parse_file(Cursor::new(text), true).map_err(|e| Failure(NbStatus::IoError, e.to_string()))?;
        let handle = NbDictionary {
            inner: NameDictionary::new(records, include_unclassified),
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// Builds a dictionary from an ENAMDICT file (UTF-8).
///
/// # Safety
/// `path` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nb_dictionary_load(
    path: *const c_char,
    include_unclassified: bool,
    out: *mut *mut NbDictionary,
) -> NbStatus {
    guard(|| {
        let path = input(path, "path")?;
        out_ptr(out, "out")?;
        let file = File::open(path).map_err(|e| Failure(NbStatus::IoError, format!("{path}: {e}")))?;
        let (records, _) =
            parse_file(BufReader::new(file), true).map_err(|e| Failure(NbStatus::IoError, e.to_string()))?;
        let handle = NbDictionary {
            inner: NameDictionary::new(records, include_unclassified),
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// Number of records in the dictionary; 0 for null.
///
/// # Safety
/// `dict` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nb_dictionary_len(dict: *const NbDictionary) -> usize {
    dict.as_ref().map_or(0, |d| d.inner.len())
}

/// # Safety
/// `dict` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nb_dictionary_free(dict: *mut NbDictionary) {
    if !dict.is_null() {
        drop(Box::from_raw(dict));
    }
}

/// Resolves one author. Either name may be null. Writes the resolution as
/// JSON.
///
/// # Safety
/// `dict` must be a live handle; strings valid or null; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_resolve_author(
    dict: *const NbDictionary,
    latin: *const c_char,
    kanji: *const c_char,
    out_json: *mut *mut c_char,
) -> NbStatus {
    guard(|| {
        let dict = dictionary(dict)?;
        let latin = optional_input(latin, "latin")?;
        let kanji = optional_input(kanji, "kanji")?;
        write_json(out_json, &resolve_author(latin, kanji, dict))
    })
}

/// Latin name candidates for a kanji name as a JSON array of "Given Family".
///
/// # Safety
/// `dict` must be a live handle; `kanji` a valid C string; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_kanji_candidates(
    dict: *const NbDictionary,
    kanji: *const c_char,
    out_json: *mut *mut c_char,
) -> NbStatus {
    guard(|| {
        let dict = dictionary(dict)?;
        let kanji = input(kanji, "kanji")?;
        let names: Vec<String> = kanji_name_candidates(kanji, dict)
            .iter()
            .map(PersonName::display_latin)
            .collect();
        write_json(out_json, &names)
    })
}

/// # Safety
/// `name` must be a valid C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_to_hepburn(name: *const c_char, out: *mut *mut c_char) -> NbStatus {
    guard(|| write_string(out, to_hepburn(input(name, "name")?)))
}

/// Dictionary probe spellings for one Latin token as a JSON array.
///
/// # Safety
/// `name` must be a valid C string; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_lookup_variants(name: *const c_char, max_vowel_sites: usize, out_json: *mut *mut c_char) -> NbStatus {
    guard(|| {
        let name = input(name, "name")?;
        let variants =
            latin_lookup_variants(name, max_vowel_sites).map_err(|e| Failure(NbStatus::InvalidArgument, e.to_string()))?;
        write_json(out_json, &variants)
    })
}

/// # Safety
/// `a` and `b` must be valid C strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_levenshtein(a: *const c_char, b: *const c_char, out: *mut usize) -> NbStatus {
    guard(|| {
        let (a, b) = (input(a, "a")?, input(b, "b")?);
        out_ptr(out, "out")?;
        *out = levenshtein(a, b);
        Ok(())
    })
}

/// # Safety
/// `a` and `b` must be valid C strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_names_match(
    a: *const c_char,
    b: *const c_char,
    lev_threshold: usize,
    match_threshold: f64,
    out: *mut bool,
) -> NbStatus {
    guard(|| {
        let (a, b) = (input(a, "a")?, input(b, "b")?);
        let cfg = match_config(lev_threshold, match_threshold)?;
        out_ptr(out, "out")?;
        *out = names_match(a, b, &cfg);
        Ok(())
    })
}

/// Escapes markup characters and non-ASCII text as BHT character references.
///
/// # Safety
/// `text` must be a valid C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_escape_non_ascii(text: *const c_char, out: *mut *mut c_char) -> NbStatus {
    guard(|| write_string(out, escape_non_ascii(input(text, "text")?)))
}

/// Maps a junii2 metadata payload to a publication, as JSON.
///
/// # Safety
/// `payload` must be a valid C string; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_parse_junii2(payload: *const c_char, out_json: *mut *mut c_char) -> NbStatus {
    guard(|| {
        let publication = parse_junii2(input(payload, "payload")?).map_err(|e| Failure(NbStatus::ParseError, e))?;
        write_json(out_json, &publication)
    })
}

/// Parses a dblp.xml file into memory.
///
/// # Safety
/// `path` must be a valid C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_corpus_load(path: *const c_char, out: *mut *mut NbCorpus) -> NbStatus {
    guard(|| {
        let path = input(path, "path")?;
        out_ptr(out, "out")?;
        let file = File::open(path).map_err(|e| Failure(NbStatus::IoError, format!("{path}: {e}")))?;
        let corpus = parse_corpus(BufReader::new(file)).map_err(|e| Failure(NbStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(NbCorpus { inner: corpus }));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nb_corpus_free(corpus: *mut NbCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

unsafe fn corpus_and_authors<'a>(corpus: *const NbCorpus, authors_json: *const c_char) -> FfiResult<(&'a Corpus, Vec<String>)> {
    let corpus = corpus
        .as_ref()
        .map(|c| &c.inner)
        .ok_or_else(|| Failure(NbStatus::NullArgument, "corpus is null".into()))?;
    let authors: Vec<String> = serde_json::from_str(input(authors_json, "authors_json")?)
        .map_err(|e| Failure(NbStatus::InvalidArgument, format!("authors_json: {e}")))?;
    Ok((corpus, authors))
}

/// Looks a publication up by title and authors (a JSON array of full Latin
/// names). Writes the DBLP key, or null when there is no match.
///
/// # Safety
/// `corpus` must be a live handle; strings valid; `out_key` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_corpus_find_publication(
    corpus: *const NbCorpus,
    title: *const c_char,
    authors_json: *const c_char,
    lev_threshold: usize,
    match_threshold: f64,
    out_key: *mut *mut c_char,
) -> NbStatus {
    guard(|| {
        let (corpus, authors) = corpus_and_authors(corpus, authors_json)?;
        let title = input(title, "title")?;
        let cfg = match_config(lev_threshold, match_threshold)?;
        out_ptr(out_key, "out_key")?;
        match corpus.find_publication(title, &authors, &cfg) {
            Some(key) => write_string(out_key, key.to_string()),
            None => {
                *out_key = ptr::null_mut();
                Ok(())
            }
        }
    })
}

/// Coauthors shared by at least two of the given authors, as a JSON array.
///
/// # Safety
/// `corpus` must be a live handle; `authors_json` valid; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_corpus_common_coauthors(
    corpus: *const NbCorpus,
    authors_json: *const c_char,
    lev_threshold: usize,
    match_threshold: f64,
    out_json: *mut *mut c_char,
) -> NbStatus {
    guard(|| {
        let (corpus, authors) = corpus_and_authors(corpus, authors_json)?;
        let cfg = match_config(lev_threshold, match_threshold)?;
        write_json(out_json, &corpus.common_coauthors(&authors, &cfg))
    })
}
