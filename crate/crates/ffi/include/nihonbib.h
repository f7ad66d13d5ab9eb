#ifndef NIHONBIB_H
#define NIHONBIB_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum NbStatus {
  NB_STATUS_OK = 0,
  NB_STATUS_NULL_ARGUMENT = 1,
  NB_STATUS_INVALID_UTF8 = 2,
  NB_STATUS_INVALID_ARGUMENT = 3,
  NB_STATUS_PARSE_ERROR = 4,
  NB_STATUS_IO_ERROR = 5,
  NB_STATUS_PANIC = 6,
} NbStatus;

/*
 Parsed DBLP corpus.
 */
typedef struct NbCorpus NbCorpus;

/*
 Name dictionary built from ENAMDICT text.
 */
typedef struct NbDictionary NbDictionary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. Owned by the
 library.
 */
const char *nb_last_error(void);

/*
 # Safety
 `s` must be null or a string returned by this library, not yet freed.
 */
void nb_string_free(char *s);

/*
 Builds a dictionary from ENAMDICT text held in memory.

 # Safety
 `text` must be a valid C string; `out` must be writable.
 */
enum NbStatus nb_dictionary_from_text(const char *text,
                                      bool include_unclassified,
                                      struct NbDictionary **out);

/*
 Builds a dictionary from an ENAMDICT file (UTF-8).

 # Safety
 `path` must be a valid C string; `out` must be writable.
 */
enum NbStatus nb_dictionary_load(const char *path,
                                 bool include_unclassified,
                                 struct NbDictionary **out);

/*
 Number of records in the dictionary; 0 for null.

 # Safety
 `dict` must be null or a live handle.
 */
size_t nb_dictionary_len(const struct NbDictionary *dict);

/*
 # Safety
 `dict` must be null or a handle from this library, not yet freed.
 */
void nb_dictionary_free(struct NbDictionary *dict);

/*
 Resolves one author. Either name may be null. Writes the resolution as
 JSON.

 # Safety
 `dict` must be a live handle; strings valid or null; `out_json` writable.
 */
enum NbStatus nb_resolve_author(const struct NbDictionary *dict,
                                const char *latin,
                                const char *kanji,
                                char **out_json);

/*
 Latin name candidates for a kanji name as a JSON array of "Given Family".

 # Safety
 `dict` must be a live handle; `kanji` a valid C string; `out_json` writable.
 */
enum NbStatus nb_kanji_candidates(const struct NbDictionary *dict,
                                  const char *kanji,
                                  char **out_json);

/*
 # Safety
 `name` must be a valid C string; `out` writable.
 */
enum NbStatus nb_to_hepburn(const char *name, char **out);

/*
 Dictionary probe spellings for one Latin token as a JSON array.

 # Safety
 `name` must be a valid C string; `out_json` writable.
 */
enum NbStatus nb_lookup_variants(const char *name, size_t max_vowel_sites, char **out_json);

/*
 # Safety
 `a` and `b` must be valid C strings; `out` writable.
 */
enum NbStatus nb_levenshtein(const char *a, const char *b, size_t *out);

/*
 # Safety
 `a` and `b` must be valid C strings; `out` writable.
 */
enum NbStatus nb_names_match(const char *a,
                             const char *b,
                             size_t lev_threshold,
                             double match_threshold,
                             bool *out);

/*
 Escapes markup characters and non-ASCII text as BHT character references.

 # Safety
 `text` must be a valid C string; `out` writable.
 */
enum NbStatus nb_escape_non_ascii(const char *text, char **out);

/*
 Maps a junii2 metadata payload to a publication, as JSON.

 # Safety
 `payload` must be a valid C string; `out_json` writable.
 */
enum NbStatus nb_parse_junii2(const char *payload, char **out_json);

/*
 Parses a dblp.xml file into memory.

 # Safety
 `path` must be a valid C string; `out` writable.
 */
enum NbStatus nb_corpus_load(const char *path, struct NbCorpus **out);

/*
 # Safety
 `corpus` must be null or a handle from this library, not yet freed.
 */
void nb_corpus_free(struct NbCorpus *corpus);

/*
 Looks a publication up by title and authors (a JSON array of full Latin
 names). Writes the DBLP key, or null when there is no match.

 # Safety
 `corpus` must be a live handle; strings valid; `out_key` writable.
 */
enum NbStatus nb_corpus_find_publication(const struct NbCorpus *corpus,
                                         const char *title,
                                         const char *authors_json,
                                         size_t lev_threshold,
                                         double match_threshold,
                                         char **out_key);

/*
 Coauthors shared by at least two of the given authors, as a JSON array.

 # Safety
 `corpus` must be a live handle; `authors_json` valid; `out_json` writable.
 */
enum NbStatus nb_corpus_common_coauthors(const struct NbCorpus *corpus,
                                         const char *authors_json,
                                         size_t lev_threshold,
                                         double match_threshold,
                                         char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NIHONBIB_H */
