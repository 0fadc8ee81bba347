use std::path::Path;
use std::process::{Command, Output};

fn rotbec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotbec"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "info")
        .output()
        .expect("binary runs")
}

const SMALL: &str = "
domain.x_min = -6
domain.x_max = 6
domain.y_min = -6
domain.y_max = 6
grid.h = 1/4
time.dt = 1/100
time.t_end = 0.2
time.sample_every = 5
omega = 0.6
lambda = 1
beta.11 = 20
beta.12 = 19
beta.22 = 18
initial = vortex-pair
output.timeseries = out.csv
output.dump_prefix = state
output.dump_times = 0.1
";

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn run_writes_outputs_and_logs_each_sample() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.cfg", SMALL);
    let out = rotbec(&["run", "run.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,N1,N2,N,E,Lz1,Lz2,Lz,sx,sy,sr");
    assert_eq!(lines.len(), 1 + 5);
    assert!(dir.path().join("state_t0.1000.bin").exists());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().filter(|l| l.contains(" N = ") && l.contains(" E = ")).count(), 5);
    assert!(out.stdout.is_empty());
}

#[test]
fn config_errors_exit_with_one_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.cfg", &format!("{SMALL}\nfoo = 3\n"));
    let out = rotbec(&["run", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key `foo`"));
    assert!(!dir.path().join("out.csv").exists());

    let dump = SMALL.replace("initial = vortex-pair", "initial = dump\ninitial.path = none.bin");
    write(dir.path(), "dump.cfg", &dump);
    let out = rotbec(&["run", "dump.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("none.bin"));

    assert_eq!(rotbec(&["run", "missing.cfg"], dir.path()).status.code(), Some(1));
    assert_eq!(rotbec(&["converge", "bad.cfg"], dir.path()).status.code(), Some(1));
    assert_eq!(rotbec(&["frobnicate"], dir.path()).status.code(), Some(1));
}

#[test]
fn output_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("output.timeseries = out.csv", "output.timeseries = no/such/dir/out.csv");
    write(dir.path(), "run.cfg", &text);
    let out = rotbec(&["run", "run.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn converge_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.cfg",
        &format!("{SMALL}\nconverge.dt_ladder = 1/20\nconverge.dt_reference = 1/160\n"),
    );
    let out = rotbec(&["converge", "c.cfg", "--mode", "temporal"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("k-ladder"));
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn normalize_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.cfg", "preset = sec53-case-b\ngrid.h = 3/16\ntime.dt = pi/3000\n");
    let once = rotbec(&["normalize", "a.cfg"], dir.path());
    assert_eq!(once.status.code(), Some(0));
    write(dir.path(), "b.cfg", &String::from_utf8_lossy(&once.stdout));
    let twice = rotbec(&["normalize", "b.cfg"], dir.path());
    assert_eq!(once.stdout, twice.stdout);
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = rotbec(&["verify"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8_lossy(&out.stdout);
    assert_eq!(report.lines().filter(|l| l.starts_with("PASS")).count(), 8);
}
