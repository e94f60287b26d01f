//! Distributional lexical-relation classification.
//!
//! The pipeline runs corpus → vocabulary and windowed counts → PPMI space →
//! 18 pair features → random forest → evaluation:
//!
//! ```no_run
//! use distrel::corpus::{build_vocabulary, count_cooccurrences, parse_corpus};
//! use distrel::features::{FeatureExtractor, WordPair};
//! use distrel::space::ppmi_weight;
//! # fn main() -> distrel::Result<()> {
//! let path = std::path::Path::new("corpus.txt");
//! let vocab = build_vocabulary(parse_corpus(path)?, 100)?;
//! let counts = count_cooccurrences(parse_corpus(path)?, &vocab, 2)?;
//! let space = ppmi_weight(&counts)?;
//! let features = FeatureExtractor::new(&vocab, &counts, &space)
//!     .extract(&WordPair::new("dog", "animal", None));
//! # let _ = features;
//! # Ok(())
//! # }
//! ```
//!
//! The `parallel` feature (on by default) runs counting, weighting,
//! feature extraction, training and prediction on the rayon pool. Every
//! parallel entry point has a `_seq` twin that produces identical output.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod io;
pub mod measures;
pub mod relation;
pub mod rng;
pub mod space;
pub mod synth;

pub use error::{Error, Result};
pub use relation::{Label, Task};
