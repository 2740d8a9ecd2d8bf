use std::path::Path;
use std::process::{Command, Output};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/fixture.elf");

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim")).args(args).output().expect("spawn sim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_kernel_exits_zero_and_writes_stats_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (stats, trace) = (dir.path().join("s.json"), dir.path().join("t.csv"));
    let o = sim(&[
        "run",
        "--preset",
        "cva6s+",
        "--kernel",
        "ilp",
        "--iters",
        "100",
        "--cosim",
        "--stats",
        stats.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("exit:       Ebreak"));
    let j = read_json(&stats);
    assert_eq!(j["report_version"], 1);
    let cell = &j["cells"][0];
    assert_eq!(cell["config"], "cva6s+");
    let retired = cell["stats"]["retired"].as_u64().unwrap();
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("cycle,pc,raw,mnemonic,rd,wb_value,events"));
    assert_eq!(lines.count() as u64, retired);
}

#[test]
fn run_elf_exits_through_tohost() {
    let o = sim(&["run", "--preset", "cva6", "--elf", FIXTURE, "--cosim"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let sum: u32 = (0..16).map(|i| i * i).sum();
    assert!(stdout(&o).contains(&format!("Tohost({sum})")), "{}", stdout(&o));
}

#[test]
fn fpu_kernel_on_a_core_without_fpu_traps() {
    let o = sim(&["run", "--preset", "cva6s", "--kernel", "fpu_mix", "--iters", "4"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("IllegalInstruction"));
}

#[test]
fn config_file_sets_keys_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("core.cfg");
    std::fs::write(&cfg, "# narrow core\nissue.width = 1\ndcache.kind = hpd\nmem.latency = 40\n").unwrap();
    let stats = dir.path().join("s.json");
    let o = sim(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--dcache",
        "legacy",
        "--kernel",
        "ilp",
        "--iters",
        "64",
        "--stats",
        stats.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo = &read_json(&stats)["cells"][0]["config_echo"];
    assert_eq!(echo["issue"]["width"], 1);
    assert_eq!(echo["mem"]["mem"]["latency"], 40);
    assert_eq!(echo["mem"]["dcache"]["kind"], "legacy");
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "dcache.colour = blue\n").unwrap();
    let o = sim(&["run", "--config", cfg.to_str().unwrap(), "--kernel", "ilp"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dcache.colour"), "{}", stderr(&o));
}

#[test]
fn unknown_kernel_and_missing_program_are_errors() {
    assert_eq!(sim(&["run", "--kernel", "nope"]).status.code(), Some(1));
    assert_eq!(sim(&["run", "--preset", "cva6"]).status.code(), Some(1));
    assert_eq!(sim(&["run", "--preset", "cva7", "--kernel", "ilp"]).status.code(), Some(1));
}

#[test]
fn step_limit_is_an_error() {
    let o = sim(&["run", "--kernel", "pointer_chase", "--max-cycles", "100"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_prints_gains_and_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("r.json");
    let o = sim(&[
        "compare",
        "--presets",
        "cva6,cva6s+",
        "--kernels",
        "ilp,stream_copy",
        "--ws",
        "4096",
        "--stats",
        stats.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = read_json(&stats);
    assert_eq!(j["cells"].as_array().unwrap().len(), 4);
    assert_eq!(j["comparisons"].as_array().unwrap().len(), 2);
    assert!(j["geomean"][0]["ipc_gain_pct"].as_f64().unwrap() > 0.0);
    assert!(stdout(&o).contains("ilp"));
}
