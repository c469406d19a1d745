//! Fixtures shared by the benches.

use wavemap_cli::{parse_scenario, Scenario};
use wavemap_core::catalog;
use wavemap_core::CatalogEntry;

/// Master fixture with a 3^4 grid, small enough for repeated timing.
pub const MASTER: &str = r#"
catalog = "coupled_pp_wave"
kappa = 1.0
[sampling]
grid = 3
[[checks]]
name = "einstein_residual_ricci"
[[checks]]
name = "ricci_gradient_identity"
[[checks]]
name = "degeneracy"
field = "dv"
[[checks]]
name = "radiation"
field = "dv"
"#;

pub fn master_scenario() -> Scenario {
    parse_scenario(MASTER, "bench", "bench").expect("bench scenario is valid")
}

pub fn entry(name: &str) -> CatalogEntry {
    catalog::build(name, &[]).expect("catalog entry exists")
}

/// A fixed interior point of the entry's chart.
pub fn point(e: &CatalogEntry) -> Vec<f64> {
    e.metric.chart().random_points(1, 42).expect("bounded chart").remove(0)
}
