//! Shared fixtures for the benchmark targets.

use anharmonic::{PotentialSpec, SimpleTrialParams, TrialFunction};

/// The three reference potentials used across tables and benchmarks.
pub fn reference_specs() -> Vec<PotentialSpec> {
    vec![
        PotentialSpec::new(1.0, 2.0).unwrap(),
        PotentialSpec::new(0.0, 1.0).unwrap(),
        PotentialSpec::new(-1.0, 2.0).unwrap(),
    ]
}

/// A matched simple-family trial for (m² = 1, g = 2).
pub fn matched_simple_trial() -> TrialFunction {
    TrialFunction::Simple(SimpleTrialParams::new(1.0, 1.0, 0.0).unwrap())
}
