//! Scenario files, seeding, running, output and post-processing.

pub mod beverloo;
pub mod config;
pub mod output;
pub mod run;
pub mod scenarios;
pub mod seed;

pub use beverloo::{beverloo_fit, steady_rate, BeverlooFit, FitError};
pub use config::{load_scenario, parse_scenario, validate, LoadError, ParseError, Resolved, ScenarioConfig, ValidationError};
pub use output::{OutputError, Snapshot, TimeSeries};
pub use run::{run, RunError, RunOptions, Simulation};
pub use scenarios::{builtin_scenarios, scenario, Scenario};
pub use seed::{seed_points, SeedError};
