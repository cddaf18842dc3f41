//! Fixtures shared by the benchmarks.

use std::path::{Path, PathBuf};

use mcdp_cli::quantity::Quantity;
use mcdp_cli::query::{bind, prepare, Prepared};
use mcdp_cli::sweep::{Axis, SweepSpec};
use mcdp_core::lang::{compile_file, CompiledModel};
use mcdp_core::Value;

pub fn model_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(format!("{name}.mcdp"))
}

pub fn compiled(name: &str) -> CompiledModel {
    compile_file(&model_path(name)).expect("bundled model compiles")
}

pub fn prepared(name: &str) -> Prepared {
    prepare(&compiled(name)).expect("bundled model decomposes")
}

fn q(x: f64, unit: &str) -> Quantity {
    Quantity { value: Some(x), unit: Some(unit.to_string()) }
}

/// A feasible drone query near the middle of the swept range.
pub fn drone_query(p: &Prepared) -> Value {
    let b = [
        ("endurance".to_string(), q(1200.0, "s")),
        ("missions".to_string(), q(100.0, "count")),
        ("extra_power".to_string(), q(1.0, "W")),
        ("payload".to_string(), q(100.0, "g")),
    ];
    bind(&p.provides, &b).expect("drone bindings")
}

/// A 10 × 10 log grid over capacity and missions.
pub fn battery_grid() -> SweepSpec {
    SweepSpec {
        x: Axis { name: "capacity".into(), min: 1e4, max: 1e7, steps: 10, log: true, unit: Some("J".into()) },
        y: Some(Axis { name: "missions".into(), min: 1.0, max: 1e3, steps: 10, log: true, unit: None }),
        fixed: Vec::new(),
    }
}
