use std::process::Command;

fn ccopt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ccopt"))
}

#[test]
fn bench_info_prints_structure() {
    let out = ccopt().args(["bench-info", "--function", "F9"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("groups          10 of size 50"), "{text}");
    assert!(text.contains("500 variables"), "{text}");
}

#[test]
fn bench_info_json_lists_groups() {
    let out = ccopt()
        .args(["bench-info", "--function", "F4", "--dimension", "20", "--group-size", "5", "--json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["groups"].as_array().unwrap().len(), 1);
    assert_eq!(v["separable_count"], 15);
}

#[test]
fn run_one_writes_result() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = ccopt()
        .args(["run-one", "--function", "F7", "--variant", "asmcc", "--seed", "3", "--budget", "3000"])
        .args(["--dimension", "40", "--group-size", "5", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["variant"], "asmcc");
    assert_eq!(v["seed"], 3);
    assert!(v["fes_used"].as_u64().unwrap() <= 3000);
}

#[test]
fn bad_arguments_exit_nonzero() {
    let out = ccopt().args(["bench-info", "--function", "F14"]).output().unwrap();
    assert!(!out.status.success());
    let out = ccopt().args(["report", "--dir", "/nonexistent/ccopt"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_and_report_battery() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = serde_json::json!({
        "functions": ["F2", "F10"],
        "variants": ["shade-cc", "asmcc"],
        "runs": 2,
        "dimension": 30,
        "group_size": 5,
        "algorithm": { "max_fes": 4000 },
        "output_dir": out_dir,
    });
    let cfg_path = dir.path().join("battery.json");
    std::fs::write(&cfg_path, config.to_string()).unwrap();
    let out = ccopt()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .env("CCOPT_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert!(csv.starts_with("function,variant,mean,std,d,mark,rank"));
    assert_eq!(csv.lines().count(), 5);
    assert!(out_dir.join("traces/F10_asmcc_1.json").is_file());

    let out = ccopt().args(["report", "--dir"]).arg(&out_dir).output().unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(out_dir.join("results.csv")).unwrap(), csv);
}

#[test]
fn failed_cells_give_failure_exit() {
    let dir = tempfile::tempdir().unwrap();
    // A population of 4 with q = 10 is rejected when each cell starts.
    let config = serde_json::json!({
        "functions": ["F4"],
        "variants": ["asmcc"],
        "runs": 1,
        "dimension": 20,
        "group_size": 5,
        "algorithm": { "max_fes": 1000, "rbf": { "shade": { "population": 4 } } },
        "output_dir": dir.path().join("out"),
    });
    let cfg_path = dir.path().join("bad.json");
    std::fs::write(&cfg_path, config.to_string()).unwrap();
    let out = ccopt().args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(!out.status.success());
}
