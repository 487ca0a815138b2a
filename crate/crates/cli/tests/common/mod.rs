#![allow(dead_code)]

use std::path::PathBuf;

use jacobi_cli::{load_config, Command, RunConfig};

/// Command and config pairs replayed by the determinism checks.
pub const REGRESSION: &[(Command, &str)] = &[
    (Command::Flow, "oscillator"),
    (Command::Flow, "pendulum"),
    (Command::Flow, "metric"),
    (Command::Flow, "custom"),
    (Command::Jacobi, "oscillator"),
    (Command::Jacobi, "metric"),
    (Command::Curvature, "oscillator"),
    (Command::Curvature, "pendulum"),
    (Command::Curvature, "custom"),
    (Command::Conjugate, "oscillator"),
    (Command::Morse, "morse_oscillator"),
    (Command::Morse, "free_particle"),
    (Command::Maslov, "oscillator"),
    (Command::Reduce, "oscillator_2d"),
    (Command::Reduce, "metric"),
    (Command::Compare, "oscillator_2d"),
    (Command::Hyperbolic, "inverted"),
    (Command::Lderiv, "lderiv"),
    (Command::Lderiv, "lderiv_explicit"),
];

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/configs").join(format!("{name}.toml"))
}

pub fn config(name: &str) -> RunConfig {
    load_config(&config_path(name)).expect("regression config loads")
}
