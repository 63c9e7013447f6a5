//! Tsetlin Machine classification over binarized continuous and categorical
//! features, plus the data pipeline and evaluation harness for monthly
//! outbreak forecasting.
//!
//! ```
//! use tsetlin_core::data::generate_artificial;
//! use tsetlin_core::{Binarizer, FitOptions, MachineConfig, TsetlinMachine};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let data = generate_artificial(&mut rng, 500, Some(1.0 / 9.0));
//! let enc = Binarizer::fit(&data.schema(), &data.rows, &FitOptions::default()).unwrap();
//! let xs = enc.encode_rows(&data.rows).unwrap();
//!
//! let cfg = MachineConfig::new(enc.width(), 2, 2).threshold(1).precision(8.0).seed(1);
//! let mut tm = TsetlinMachine::new(cfg).unwrap();
//! tm.fit_seeded(&xs, &data.labels, 20).unwrap();
//! ```

pub mod automaton;
pub mod binarizer;
pub mod clause;
pub mod data;
pub mod error;
pub mod eval;
pub mod explain;
pub mod machine;
pub mod model;

pub use automaton::{Action, TsetlinAutomaton};
pub use binarizer::{Binarizer, FeatureEncoder, FeatureKind, FitOptions, Schema};
pub use clause::{Clause, Mode, Polarity};
pub use error::{Error, Result};
pub use machine::{MachineConfig, NegativeSampling, StateTrace, TrainingMode, TsetlinMachine};
pub use model::Model;
