//! Fixtures shared by the benchmarks in `benches/`.

use rlasso_core::simulation::replication_data;
use rlasso_core::{Dataset, ScenarioKind, SimScenario};

/// First replication of the normal-error simulation scenario at sample size `n`.
pub fn simulated(n: usize) -> (SimScenario, Dataset) {
    let scenario = SimScenario::standard(ScenarioKind::Normal, n, 7);
    let data = replication_data(&scenario, 0).expect("valid scenario");
    (scenario, data)
}
