//! Gene family-free median of three genomes.
//!
//! The crate enumerates candidate median genes (similarity triangles) and
//! conserved candidate adjacencies, builds and solves the 0-1 program for
//! the median exactly, accelerates it with ICF-SEG segment acceptance, and
//! scores predicted ortholog triples.
//!
//! ```
//! use ffmedian::candidates::CandidateSet;
//! use ffmedian::fixtures::toy_instance;
//!
//! let instance = toy_instance();
//! let set = CandidateSet::build(&instance);
//! assert_eq!(set.genes.iter().filter(|g| !g.telomere).count(), 4);
//! ```

pub mod candidates;
pub mod cli;
pub mod evaluation;
pub mod fixtures;
pub mod genome;
pub mod hardness;
pub mod ingestion;
pub mod instance;
pub mod matching;
pub mod pipeline;
pub mod segments;
pub mod similarity;
pub mod solver;
pub mod synth;

pub use instance::{Instance, InstanceError};
