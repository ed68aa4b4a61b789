//! Linguistic complexity analysis for prompt/continuation text pairs.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`corpus`] loads JSONL pair files and applies the word-count filters.
//! 2. [`annotate`] turns raw text into sentences of tagged tokens, either with the
//!    bundled lexicon tagger or from gold CoNLL-U and bracketed trees.
//! 3. [`features`] computes the 160-feature battery over an annotated document.
//! 4. [`report`] runs per-feature Welch tests (prompt vs. continuation) and Pearson
//!    correlations (model vs. human continuation), using the kernels in [`stats`].

pub mod annotate;
pub mod corpus;
pub mod features;
pub mod lexicons;
pub mod report;
pub mod stats;

pub use annotate::{AnnotatedDocument, Sentence, Tier, Token, Upos};
pub use corpus::{Corpus, PairRecord};
pub use features::{registry, FeatureDef, FeatureVector, Family};
pub use lexicons::NormLexicon;
