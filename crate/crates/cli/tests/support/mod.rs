#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data(name: &str) -> PathBuf {
    manifest_dir().join("tests/data").join(name)
}

/// Runs the binary from the crate directory so relative paths in reports
/// do not depend on the machine.
pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depcov"))
        .args(args)
        .current_dir(manifest_dir())
        .env_remove("DEPCOV_THREADS")
        .output()
        .expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> Vec<u8> {
    let out = run(args);
    assert!(
        out.status.success(),
        "depcov {args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

pub fn json(args: &[&str]) -> Value {
    serde_json::from_slice(&run_ok(args)).expect("stdout is JSON")
}

pub fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exited normally")
}

pub fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

fn load_schema(name: &str) -> Value {
    let path = manifest_dir().join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Validates a report against its published schema, panicking with every
/// violation listed.
pub fn assert_schema(name: &str, instance: &Value) {
    let compute = load_schema("compute");
    let registry = jsonschema::Registry::new()
        .add(compute["$id"].as_str().unwrap(), compute.clone())
        .unwrap()
        .prepare()
        .unwrap();
    let schema = load_schema(name);
    let validator = jsonschema::options().with_registry(&registry).build(&schema).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(
        errors.is_empty(),
        "{name} report violates its schema:\n{}",
        errors.join("\n")
    );
}
