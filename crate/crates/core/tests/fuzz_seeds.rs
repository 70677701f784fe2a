//! The checked-in fuzz corpus seeds are the current kernel graphs of the
//! demos, and every seed passes the checks the fuzz targets make.

use std::path::PathBuf;

use stagekit::codegen::Deg;
use stagekit::demos;
use stagekit::driver::{compile_demo, DriverOptions};
use stagekit::runtime::schedule_deg;

fn corpus(target: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target)
}

#[test]
fn parse_seeds_match_the_demo_graphs() {
    for d in demos::programs() {
        let path = corpus("deg_parse").join(format!("{}.json", d.name));
        let seed = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let deg = compile_demo(d, &DriverOptions::default()).unwrap().deg;
        assert_eq!(seed, deg.to_json(), "stale seed {}", path.display());
    }
}

#[test]
fn schedule_seeds_schedule() {
    for entry in std::fs::read_dir(corpus("deg_schedule")).unwrap() {
        let bytes = std::fs::read(entry.unwrap().path()).unwrap();
        let (&workers, rest) = bytes.split_first().unwrap();
        let deg = Deg::from_json(std::str::from_utf8(rest).unwrap()).unwrap();
        let plan = schedule_deg(&deg, workers as usize).unwrap();
        assert_eq!(plan.kernel_count(), deg.kernels.len());
    }
}
