//! Corpus construction and evaluation toolchain for multilingual
//! math-reasoning instruction data.
//!
//! The pipeline runs in five stages, each backed by one module:
//!
//! 1. [`calc`] — parse, evaluate and canonicalize the inline
//!    `<<expr=result>>` calculator annotations found in grade-school math
//!    solutions.
//! 2. [`gate`] — translate English problems into target languages and admit
//!    a translation only when its annotation sequence is consistent with the
//!    English source.
//! 3. [`rft`] — sample extra reasoning paths per question, keep the correct
//!    ones, and deduplicate them by formula identity.
//! 4. [`dataset`] — assemble instruction-tuning records under the parallel,
//!    cross, mix and mix-all strategies.
//! 5. [`eval`] — prompt a model over MGSM/MSVAMP-style test sets and report
//!    per-language accuracy.
//!
//! [`llm`] provides the backend abstraction (retries, bounded concurrency,
//! deterministic mocks) shared by the translation, sampling and evaluation
//! stages. [`synth`] generates synthetic corpora for tests and benchmarks.

pub mod answer;
pub mod calc;
pub mod corpus;
pub mod dataset;
pub mod eval;
pub mod gate;
pub mod lang;
pub mod llm;
pub mod rft;
pub mod synth;
pub mod tolerance;

pub use lang::Lang;
pub use tolerance::{Tolerance, Tolerances};
