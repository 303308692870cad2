//! Manifest-driven runs, fixtures for the worked examples and random
//! instance generation.

pub mod exec;
pub mod fixtures;
pub mod manifest;
pub mod random;
pub mod run;

pub use fixtures::{check_expectation, fixture, fixtures};
pub use manifest::{Manifest, Outcome, Selection};
pub use random::{curved_instance, generate_random_instance, Family};
pub use run::{run, Mode, RunOptions, RunReport};
