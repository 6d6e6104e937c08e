#![allow(dead_code)]

use std::path::PathBuf;

use toric_oc::cli::{parse_spec, Geometry};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.fan"))
}

pub fn geometry(name: &str) -> Geometry {
    parse_spec(&fixture_path(name)).unwrap().geometry().unwrap()
}

pub const FIXTURES: [&str; 6] = ["c3_f0", "c3_f1", "c3_f2", "kp2", "c3z3", "a1"];
