//! Shared setup for the pipeline benchmarks.

use std::path::{Path, PathBuf};

use fdl_core::config::Config;
use fdl_core::pipeline::Engine;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// The bundled engine, built in memory.
pub fn bundled_engine() -> Engine {
    let config = Config::load(&data_dir().join("fdl.json")).expect("bundled config loads");
    Engine::build(&config).expect("bundled data ingests").0
}

pub const WEEKEND_QUESTION: &str = "What pediatricians are open on the weekend near me?";
pub const WEEKEND_QUERY: &str = "MATCH (p:Provider)-[:HAS_SPECIALTY]->(s:Specialty), (p)-[:WORKS_AT]->(l:Location) \
    WHERE s.name = \"Pediatrics\" AND opens_during(l.hours, \"WEEKEND\") \
    RETURN p, l ORDER BY distance(l.geo, point($lat, $lon)) ASC";
