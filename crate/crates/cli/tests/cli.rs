use std::process::{Command, Output};

fn stagekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stagekit"))
        .args(args)
        .output()
        .expect("run stagekit")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn list_names_every_demo() {
    let out = stagekit(&["list"]);
    assert!(out.status.success());
    let s = text(&out.stdout);
    for d in stagekit::demos::DEMOS {
        assert!(s.lines().any(|l| l.starts_with(d.name)), "{} missing", d.name);
    }
    assert!(s.contains("rejected: IllegalSharing"));
}

#[test]
fn usage_errors_exit_64_with_help() {
    let out = stagekit(&["run"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(text(&out.stderr).contains("Usage:"));
    let out = stagekit(&["build", "hello_avg", "--dump-ir", "parsed"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(text(&out.stderr).contains("unknown phase"));
}

#[test]
fn unknown_demo_exits_64() {
    let out = stagekit(&["stats", "nope"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(text(&out.stderr).contains("unknown demo `nope`"));
}

#[test]
fn stats_report_every_phase() {
    let out = stagekit(&["stats", "axpy"]);
    assert!(out.status.success());
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["program"], "axpy");
    for phase in ["staged", "motioned", "fused", "final"] {
        for key in ["parallelLoopCount", "vectorAllocCount", "recordNodeCount", "statementCount"] {
            assert!(j[phase][key].is_u64(), "{phase}.{key}");
        }
    }
}

#[test]
fn build_dumps_each_phase() {
    for phase in ["staged", "motioned", "fused", "scheduled"] {
        let out = stagekit(&["build", "mean_variance", "--dump-ir", phase]);
        assert!(out.status.success(), "{phase}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn codegen_writes_both_artifacts() {
    let dir = std::env::temp_dir().join(format!("stagekit-cli-{}", std::process::id()));
    let out = stagekit(&["codegen", "axpy", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let minic = std::fs::read_to_string(dir.join("axpy.minic")).unwrap();
    assert!(minic.starts_with("program axpy"));
    let deg = std::fs::read_to_string(dir.join("axpy.deg.json")).unwrap();
    stagekit::codegen::Deg::from_json(&deg).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn run_prints_output_then_result() {
    let out = stagekit(&["run", "bulk_update"]);
    assert!(out.status.success());
    assert_eq!(
        text(&out.stdout),
        "7.5\nresult: [1.5, 0.0, 1.5, 0.0, 1.5, 0.0, 1.5, 0.0, 1.5, 0.0]\n"
    );
}

#[test]
fn interpreter_and_executor_agree() {
    let a = stagekit(&["run", "hello_avg", "--seed", "9", "--interpret"]);
    let b = stagekit(&["run", "hello_avg", "--seed", "9", "--threads", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn pass_toggles_do_not_change_output() {
    let base = stagekit(&["run", "mean_variance", "--seed", "4"]).stdout;
    for flag in ["--no-fusion", "--no-cse", "--no-dce", "--no-code-motion"] {
        let out = stagekit(&[flag, "run", "mean_variance", "--seed", "4"]);
        assert_eq!(out.stdout, base, "{flag}");
    }
}

#[test]
fn rejected_demo_exits_2() {
    let out = stagekit(&["run", "write_to_immutable"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).starts_with("error: write to immutable value"));
}
