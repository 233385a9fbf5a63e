//! Compositional question decomposition for video question answering.
//!
//! Question programs are parsed into [`Program`] trees, decomposed into
//! DAGs of sub-questions, answered against spatio-temporal scene graphs,
//! and scored with accuracy, compositional-accuracy and internal-consistency
//! metrics.

pub mod baselines;
pub mod cli;
pub mod consistency;
pub mod corpus;
pub mod decompose;
pub mod error;
pub mod io;
pub mod metrics;
pub mod program;
pub mod propagate;
pub mod scene;
pub mod vocab;

pub use error::{Error, Result};
pub use program::{parse_program, render_program, Answer, Program};
pub use scene::SceneGraph;
pub use vocab::Vocabulary;
