use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hamgap::parse_config;

fn hamgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamgap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let text = format!(
        "{body}\n[output]\ndir = {:?}\n",
        dir.join("out").display().to_string()
    );
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn rayleigh_default_run_writes_two_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.toml",
        "[scenario]\nname = \"rayleigh\"\na = 0.5\n[time]\nt_end = 2.0",
    );
    let o = hamgap(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    assert_eq!(
        first_line(&out.join("rayleigh_trajectory.csv")),
        "t,q1,p1,H"
    );
    assert_eq!(
        first_line(&out.join("rayleigh_balance.csv")),
        "t,H,diss_cum,balance_residual,ineq_lhs,info_gap_cum"
    );
    assert!(stdout(&o).contains("# verdict = PASS"));
}

#[test]
fn trajectory_header_for_two_degrees_of_freedom() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.toml",
        "[scenario]\nname = \"pure_hamiltonian\"\nn = 2\nq0 = [1.0, 0.5]\n[time]\nt_end = 0.1",
    );
    let o = hamgap(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = dir.path().join("out/pure_hamiltonian_trajectory.csv");
    assert_eq!(first_line(&path), "t,q1,q2,p1,p2,H");
}

#[test]
fn summary_reparses_to_the_same_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.toml",
        "[scenario]\nname = \"friction\"\nmu = 0.3\n[time]\nt_end = 10.0\n[solver]\nseed = 7",
    );
    let o = hamgap(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("out/friction_summary.txt")).unwrap();
    assert_eq!(summary, stdout(&o));
    assert!(summary.contains("# final_state = inside stick band"));
    let original = parse_config(&fs::read_to_string(&cfg).unwrap()).unwrap();
    let echoed = parse_config(&summary).unwrap();
    assert_eq!(echoed.to_canonical(), original.to_canonical());
    assert_eq!(echoed.time, original.time);
    assert_eq!(echoed.solver, original.solver);
}

#[test]
fn untempered_model_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "u.toml",
        "[scenario]\nname = \"generic\"\nmodel = \"always_likely\"",
    );
    let o = hamgap(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("model failed temperedness check"),
        "{}",
        stderr(&o)
    );
    assert!(!dir.path().join("out/generic_trajectory.csv").exists());
}

#[test]
fn invalid_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.toml", "[scenario]\nname = \"rayleigh\"");
    let o = hamgap(&["run", "--config", &cfg, "--set", "time.dt=-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dt must be positive"), "{}", stderr(&o));

    let bad = write_config(dir.path(), "bad.toml", "[scenario]\ndamping_ratio = 0.1");
    let o = hamgap(&["run", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("line 2") && err.contains("damping_ratio") && err.contains("stiffness"),
        "{err}"
    );

    let o = hamgap(&[
        "run",
        "--config",
        &dir.path().join("missing.toml").display().to_string(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_check_exits_two_and_still_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.toml",
        "[scenario]\nname = \"rayleigh\"\n[time]\nt_end = 1.0\n[solver]\nbalance_tol = 1e-300",
    );
    let o = hamgap(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("# check_balance = FAIL"));
    assert!(dir.path().join("out/rayleigh_trajectory.csv").exists());
    assert!(dir.path().join("out/rayleigh_balance.csv").exists());
}

#[test]
fn sweep_writes_isolated_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.toml",
        "[scenario]\nname = \"rayleigh\"\n[time]\nt_end = 1.0",
    );
    let o = hamgap(&["run", "--config", &cfg, "--sweep", "scenario.a=0.1,0.9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let a = fs::read(out.join("rayleigh_a_0_0.1_trajectory.csv")).unwrap();
    let b = fs::read(out.join("rayleigh_a_1_0.9_trajectory.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn list_prints_the_registry() {
    let o = hamgap(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), hamgap::list_scenarios());
}

#[test]
fn check_subcommand_verdicts() {
    let o = hamgap(&["check", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let o = hamgap(&["check", "--samples", "10", "--seed", "5", "--inject-faulty"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    let faulty = text
        .lines()
        .find(|l| l.starts_with("temperedness") && l.contains("faulty"))
        .unwrap();
    assert!(
        faulty.contains("FAIL") && faulty.contains("witness"),
        "{faulty}"
    );
}

#[test]
fn polar_tabulates_and_respects_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("polar.csv");
    let out_s = out.display().to_string();
    let o = hamgap(&[
        "polar",
        "--potential",
        "abs:0.3",
        "--grid",
        "2:81",
        "--at",
        "0.5:5",
        "--out",
        &out_s,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "q1,p1,polar,grid_sup,resolution_bound,closed_form"
    );
    assert_eq!(text.lines().count(), 26);
    assert!(text.contains("UNBOUNDED"));

    let o = hamgap(&[
        "polar",
        "--potential",
        "abs",
        "--grid",
        "2:100000",
        "--out",
        &out_s,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budget"));
}
