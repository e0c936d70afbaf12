//! Experiment harness: configuration, conductivity generators, experiment
//! runners, and CSV/JSON persistence behind the command-line tool.

pub mod config;
pub mod decay;
pub mod generate;
pub mod io;
pub mod oracles;
pub mod stability;

pub use config::ExperimentConfig;
pub use decay::{run_decay_experiment, DecaySummary};
pub use generate::{make_conductivity, make_dini_conductivity, make_mu, mu_pair};
pub use oracles::{run_appendix_oracles, OracleReport};
pub use stability::{run_stability_experiment, StabilitySummary};
