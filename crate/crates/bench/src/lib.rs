//! Shared fixtures for the step-engine benchmarks.

use pedflow_core::{new_environment, Engine, Model, ScenarioConfig, SimState};

/// A world advanced `warmup` steps so that the bands have started to mix.
pub fn warmed_state(
    width: usize,
    agents_per_side: usize,
    model: Model,
    warmup: u64,
) -> (SimState, ScenarioConfig) {
    let config = ScenarioConfig::small(width, width, agents_per_side, model);
    let mut state = new_environment(&config, 1).expect("valid bench config");
    let engine = Engine::sequential().with_checks(false);
    let policy = config.policy();
    for _ in 0..warmup {
        engine.step(&mut state, &policy).expect("step");
    }
    (state, config)
}
