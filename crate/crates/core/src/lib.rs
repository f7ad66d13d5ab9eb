//! Japanese author-name matching and bibliography conversion.

pub mod bht_export;
pub mod dblp_corpus;
pub mod enamdict;
pub mod name_matching;
pub mod oai_harvester;
pub mod pipeline;
pub mod similarity;
pub mod transcription;
