//! Edit distance and token-set similarity for comparing author names across
//! corpora.

use std::collections::BTreeSet;
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("match threshold {0} is outside [0, 1]")]
    ThresholdOutOfRange(f64),
}

/// Thresholds for token-level fuzzy name comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    /// Two tokens pair up when their edit distance is strictly below this.
    lev_threshold: usize,
    /// Minimum similarity for two names to match.
    match_threshold: f64,
}

impl MatchConfig {
    pub const DEFAULT_LEV_THRESHOLD: usize = 2;
    pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.75;

    pub fn new(lev_threshold: usize, match_threshold: f64) -> Result<Self, SimilarityError> {
        if !(0.0..=1.0).contains(&match_threshold) {
            return Err(SimilarityError::ThresholdOutOfRange(match_threshold));
        }
        Ok(MatchConfig {
            lev_threshold,
            match_threshold,
        })
    }

    pub fn lev_threshold(&self) -> usize {
        self.lev_threshold
    }

    pub fn match_threshold(&self) -> f64 {
        self.match_threshold
    }
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            lev_threshold: Self::DEFAULT_LEV_THRESHOLD,
            match_threshold: Self::DEFAULT_MATCH_THRESHOLD,
        }
    }
}

/// Unit-cost Levenshtein distance over Unicode scalar values.
pub fn levenshtein(s: &str, t: &str) -> usize {
    let s: Vec<char> = s.chars().collect();
    let t: Vec<char> = t.chars().collect();
    if s.is_empty() {
        return t.len();
    }
    if t.is_empty() {
        return s.len();
    }
    // Two rows of the (|s|+1) x (|t|+1) matrix.
    let mut prev: Vec<usize> = (0..=t.len()).collect();
    let mut cur = vec![0usize; t.len() + 1];
    for (i, sc) in s.iter().enumerate() {
        cur[0] = i + 1;
        for (j, tc) in t.iter().enumerate() {
            let diag = if sc == tc { prev[j] } else { prev[j] + 1 };
            cur[j + 1] = diag.min(cur[j] + 1).min(prev[j + 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[t.len()]
}

/// |S ∩ T| / |S ∪ T|, and 1 for two empty sets.
pub fn jaccard<T: Ord + Hash>(s: &BTreeSet<T>, t: &BTreeSet<T>) -> f64 {
    let union = s.union(t).count();
    if union == 0 {
        return 1.0;
    }
    s.intersection(t).count() as f64 / union as f64
}

/// Jaccard coefficient where two tokens count as shared when their edit
/// distance is below the configured threshold.
///
/// Tokens are paired one-to-one, greedily in ascending distance; ties break on
/// the lexicographically smaller, then larger, token so the result does not
/// depend on argument order.
pub fn jaccard_lev(s: &BTreeSet<String>, t: &BTreeSet<String>, cfg: &MatchConfig) -> f64 {
    if s.is_empty() && t.is_empty() {
        return 1.0;
    }
    let s_items: Vec<&String> = s.iter().collect();
    let t_items: Vec<&String> = t.iter().collect();
    let mut pairs = Vec::new();
    for (i, a) in s_items.iter().enumerate() {
        for (j, b) in t_items.iter().enumerate() {
            let d = levenshtein(a, b);
            if d < cfg.lev_threshold {
                let (lo, hi) = if a <= b { (*a, *b) } else { (*b, *a) };
                pairs.push((d, lo, hi, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| (x.0, x.1, x.2).cmp(&(y.0, y.1, y.2)));
    let mut used_s = vec![false; s_items.len()];
    let mut used_t = vec![false; t_items.len()];
    let mut matched = 0usize;
    for (_, _, _, i, j) in pairs {
        if !used_s[i] && !used_t[j] {
            used_s[i] = true;
            used_t[j] = true;
            matched += 1;
        }
    }
    matched as f64 / (s.len() + t.len() - matched) as f64
}

/// Lowercased whitespace tokens of a full name.
pub fn name_tokens(name: &str) -> BTreeSet<String> {
    name.split_whitespace().map(str::to_lowercase).collect()
}

/// Whether two full names are similar enough to denote the same person.
pub fn names_match(a: &str, b: &str, cfg: &MatchConfig) -> bool {
    jaccard_lev(&name_tokens(a), &name_tokens(b), cfg) >= cfg.match_threshold
}

/// Precision and recall of an answer set against the relevant set. Each is
/// defined as 1 when its denominator set is empty.
pub fn precision_recall<T: Ord + Hash>(answer: &BTreeSet<T>, relevant: &BTreeSet<T>) -> (f64, f64) {
    let hits = relevant.intersection(answer).count() as f64;
    let precision = if answer.is_empty() {
        1.0
    } else {
        hits / answer.len() as f64
    };
    let recall = if relevant.is_empty() {
        1.0
    } else {
        hits / relevant.len() as f64
    };
    (precision, recall)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("Morishima", "Morishma"), 1);
        assert_eq!(levenshtein("森嶋", "森島"), 1);
    }

    #[test]
    fn jaccard_basics() {
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard(&set(&["a"]), &set(&["b"])), 0.0);
        assert_eq!(jaccard(&set(&["a", "b", "c"]), &set(&["b", "c", "d"])), 0.5);
        assert_eq!(jaccard::<String>(&BTreeSet::new(), &BTreeSet::new()), 1.0);
    }

    #[test]
    fn jaccard_lev_examples() {
        let cfg = MatchConfig::new(2, 0.75).unwrap();
        let a = set(&["Atsuyuki", "Morishima"]);
        let b = set(&["Atsuyuki", "Morishma"]);
        assert_eq!(jaccard_lev(&a, &b, &cfg), 1.0);
        let exact = MatchConfig::new(1, 0.75).unwrap();
        assert_eq!(jaccard_lev(&a, &a, &exact), 1.0);
        assert_eq!(jaccard_lev(&set(&["abc"]), &set(&["xyz"]), &cfg), 0.0);
    }

    #[test]
    fn names_match_examples() {
        let cfg = MatchConfig::new(2, 1.0).unwrap();
        assert!(names_match("Atsuyuki Morishima", "Atsuyuki Morishma", &cfg));
        assert!(names_match("Kenji Taguchi", "Kenji Taguchi", &cfg));
        assert!(names_match("kenji TAGUCHI", "Kenji Taguchi", &cfg));
        let half = MatchConfig::new(2, 0.5).unwrap();
        assert!(!names_match("Kenji Taguchi", "Kiyoshi Itoh", &half));
    }

    #[test]
    fn precision_recall_examples() {
        let a: BTreeSet<u32> = [1, 2, 3, 4].into();
        let r: BTreeSet<u32> = [3, 4, 5].into();
        let (p, rc) = precision_recall(&a, &r);
        assert_eq!(p, 0.5);
        assert!((rc - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(precision_recall(&r, &r), (1.0, 1.0));
        let sub: BTreeSet<u32> = [3].into();
        assert_eq!(precision_recall(&sub, &r).0, 1.0);
        assert_eq!(precision_recall(&BTreeSet::<u32>::new(), &r), (1.0, 0.0));
    }

    #[test]
    fn threshold_validation() {
        assert!(MatchConfig::new(2, 1.5).is_err());
        assert!(MatchConfig::new(2, -0.1).is_err());
        assert!(MatchConfig::new(0, 0.0).is_ok());
    }
}
