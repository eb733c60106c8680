//! End-to-end tests of the binary: exit codes, file outputs, determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperglauber"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write_single_edge(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("single.hg");
    std::fs::write(&path, "hg 1\nn 3 k 3\ne 0 1 2\n").unwrap();
    path
}

#[test]
fn check_conditions_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "check-conditions",
            "--n",
            "30",
            "--k",
            "3",
            "--q",
            "8",
            "--max-deg",
            "4",
            "--K",
            "4",
            "--delta",
            "0.05",
            "--no-timestamp",
        ],
    );
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["result"]["verdict"], "holds");
    assert_eq!(v["result"]["t_delta_ceil"], 426);
    assert_eq!(v["result"]["lll_value"], "3/4");

    let out = run_in(
        dir.path(),
        &[
            "check-conditions",
            "--n",
            "30",
            "--k",
            "3",
            "--q",
            "10",
            "--max-deg",
            "4",
            "--K",
            "4",
            "--delta",
            "0.05",
        ],
    );
    assert!(out.status.success());
    assert_eq!(json_of(&out)["result"]["verdict"], "defer-to-jerrum");
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_single_edge(dir.path());
    let single = single.to_str().unwrap();

    // delta out of range
    let out = run_in(
        dir.path(),
        &[
            "check-conditions",
            "--n",
            "30",
            "--k",
            "3",
            "--q",
            "8",
            "--max-deg",
            "4",
            "--K",
            "4",
            "--delta",
            "1.5",
        ],
    );
    assert_eq!(out.status.code(), Some(1));

    // sample without q or colouring
    let out = run_in(
        dir.path(),
        &["sample", "--instance", single, "--steps", "5"],
    );
    assert_eq!(out.status.code(), Some(1));

    // diagnose with a bad scale
    let col = dir.path().join("x.col");
    std::fs::write(&col, "col 1 q 2\n0 1\n1 1\n2 2\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "diagnose",
            "--instance",
            single,
            "--colouring",
            col.to_str().unwrap(),
            "--scale",
            "3",
        ],
    );
    assert_eq!(out.status.code(), Some(1));

    // unknown flag is a usage error
    let out = run_in(dir.path(), &["sample", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_random_infeasible_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "gen-random",
            "--n",
            "4",
            "--k",
            "3",
            "--edges",
            "4",
            "--max-deg",
            "3",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_random_writes_a_valid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.hg");
    let out = run_in(
        dir.path(),
        &[
            "gen-random",
            "--n",
            "30",
            "--k",
            "3",
            "--edges",
            "40",
            "--max-deg",
            "6",
            "--seed",
            "1",
            "--out",
            path.to_str().unwrap(),
            "--no-timestamp",
        ],
    );
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["result"]["simple"], true);
    assert_eq!(v["result"]["m"], 40);
    let h = hyperglauber::io::read_hypergraph_file(&path).unwrap();
    assert_eq!(h.num_edges(), 40);
    assert!(h.max_degree() <= 6);
}

#[test]
fn gen_blocked_writes_instance_and_colouring() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("blocked");
    let out = run_in(
        dir.path(),
        &[
            "gen-blocked",
            "--m",
            "7",
            "--q",
            "3",
            "--k",
            "3",
            "--seed",
            "1",
            "--out",
            out_dir.to_str().unwrap(),
            "--no-timestamp",
        ],
    );
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["result"]["blocked"], true);
    assert_eq!(v["result"]["simple"], true);
    assert_eq!(v["result"]["proper"], true);
    assert_eq!(v["result"]["n"], 21);
    assert_eq!(v["result"]["m"], 42);

    let h = hyperglauber::io::read_hypergraph_file(out_dir.join("hypergraph.hg")).unwrap();
    let x = hyperglauber::io::read_colouring_file(out_dir.join("colouring.col")).unwrap();
    for v in 0..h.n() {
        assert_eq!(
            hyperglauber::chain::available_colours_of(&h, &x, v),
            vec![x.colour(v)]
        );
    }
}

#[test]
fn components_exit_codes_and_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_single_edge(dir.path());
    let out = run_in(
        dir.path(),
        &[
            "components",
            "--instance",
            single.to_str().unwrap(),
            "--q",
            "2",
            "--no-timestamp",
        ],
    );
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["result"]["sizes"], serde_json::json!([6]));
    assert_eq!(v["result"]["isolated"], 0);

    // Budget refusal on a 3^21 state space.
    let blocked_dir = dir.path().join("b");
    let out = run_in(
        dir.path(),
        &[
            "gen-blocked",
            "--m",
            "7",
            "--q",
            "3",
            "--k",
            "3",
            "--out",
            blocked_dir.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let out = run_in(
        dir.path(),
        &[
            "components",
            "--instance",
            blocked_dir.join("hypergraph.hg").to_str().unwrap(),
            "--q",
            "3",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mix_exact_csv_hits_zero_at_t1() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_single_edge(dir.path());
    let out = run_in(
        dir.path(),
        &[
            "mix-exact",
            "--instance",
            single.to_str().unwrap(),
            "--q",
            "2",
            "--steps",
            "2",
            "--format",
            "csv",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,tv"));
    for (t, line) in lines.enumerate() {
        let (lt, tv) = line.split_once(',').unwrap();
        assert_eq!(lt, t.to_string());
        let tv: f64 = tv.parse().unwrap();
        if t >= 1 {
            assert!(tv < 1e-12, "t = {t}: tv = {tv}");
        }
    }
}

#[test]
fn sample_zero_steps_returns_the_start() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_single_edge(dir.path());
    let col = dir.path().join("x.col");
    std::fs::write(&col, "col 1 q 2\n0 1\n1 1\n2 2\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sample",
            "--instance",
            single.to_str().unwrap(),
            "--colouring",
            col.to_str().unwrap(),
            "--steps",
            "0",
            "--replicas",
            "3",
            "--no-timestamp",
        ],
    );
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["result"]["properness_rate"], 1.0);
    let replicas = v["result"]["replicas"].as_array().unwrap();
    assert_eq!(replicas.len(), 3);
    let h0 = replicas[0]["final_hash"].as_str().unwrap();
    for r in replicas {
        assert_eq!(r["final_hash"].as_str().unwrap(), h0);
        assert_eq!(r["changed"], 0);
    }
}

#[test]
fn sample_log_records_the_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_single_edge(dir.path());
    let log = dir.path().join("walk.csv");
    let out = run_in(
        dir.path(),
        &[
            "sample",
            "--instance",
            single.to_str().unwrap(),
            "--q",
            "2",
            "--steps",
            "25",
            "--replicas",
            "2",
            "--seed",
            "8",
            "--log",
            log.to_str().unwrap(),
            "--format",
            "csv",
        ],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(&log).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,v,old_colour,new_colour,avail_size"));
    assert_eq!(lines.count(), 25);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("replica,seed,proper,"));
}

#[test]
fn couple_reports_coalescence_times() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_single_edge(dir.path());
    let log = dir.path().join("pair.csv");
    let out = run_in(
        dir.path(),
        &[
            "couple",
            "--instance",
            single.to_str().unwrap(),
            "--q",
            "2",
            "--steps",
            "5000",
            "--replicas",
            "5",
            "--seed",
            "3",
            "--no-timestamp",
            "--log",
            log.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["result"]["coalesced_fraction"], 1.0);
    assert_eq!(v["result"]["replicas"].as_array().unwrap().len(), 5);

    let text = std::fs::read_to_string(&log).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,v,avail_x,avail_y,agreed,hamming"));
    let last = lines.last().unwrap();
    assert!(last.ends_with(",0"), "pair 0 should end coalesced: {last}");
}

#[test]
fn trace_on_blocked_instance_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let blocked_dir = dir.path().join("b");
    let out = run_in(
        dir.path(),
        &[
            "gen-blocked",
            "--m",
            "7",
            "--q",
            "3",
            "--k",
            "3",
            "--out",
            blocked_dir.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let out = run_in(
        dir.path(),
        &[
            "trace",
            "--instance",
            blocked_dir.join("hypergraph.hg").to_str().unwrap(),
            "--colouring",
            blocked_dir.join("colouring.col").to_str().unwrap(),
            "--steps",
            "500",
            "--checkpoints",
            "10",
            "--no-timestamp",
        ],
    );
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["result"]["breached"], false);
    for cp in v["result"]["checkpoints"].as_array().unwrap() {
        assert_eq!(cp["max_z_delta"], serde_json::json!([0]));
    }

    // CSV flavour.
    let out = run_in(
        dir.path(),
        &[
            "trace",
            "--instance",
            blocked_dir.join("hypergraph.hg").to_str().unwrap(),
            "--colouring",
            blocked_dir.join("colouring.col").to_str().unwrap(),
            "--steps",
            "500",
            "--checkpoints",
            "10",
            "--format",
            "csv",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,max_z_delta_1,scale2_good"));
}

#[test]
fn diagnose_flags_the_mono_pair() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_single_edge(dir.path());
    let col = dir.path().join("x.col");
    std::fs::write(&col, "col 1 q 2\n0 1\n1 1\n2 2\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "diagnose",
            "--instance",
            single.to_str().unwrap(),
            "--colouring",
            col.to_str().unwrap(),
            "--no-timestamp",
        ],
    );
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["result"]["verdict"], "bad");
    assert_eq!(v["result"]["b_max"], 1);
    let w = &v["result"]["witnesses"][0];
    assert_eq!(w["vertex"], 2);
    assert_eq!(w["i"], 1);
}

#[test]
fn repeated_runs_are_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_single_edge(dir.path());
    let args = [
        "couple",
        "--instance",
        "single.hg",
        "--q",
        "2",
        "--steps",
        "2000",
        "--replicas",
        "4",
        "--seed",
        "11",
        "--no-timestamp",
    ];
    let _ = single;
    let a = run_in(dir.path(), &args);
    let b = run_in(dir.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    // And across thread counts.
    let mut with_threads = args.to_vec();
    with_threads.extend_from_slice(&["--threads", "2"]);
    let c = run_in(dir.path(), &with_threads);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn out_flag_redirects_the_payload() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_single_edge(dir.path());
    let payload = dir.path().join("report.json");
    let out = run_in(
        dir.path(),
        &[
            "components",
            "--instance",
            single.to_str().unwrap(),
            "--q",
            "2",
            "--out",
            payload.to_str().unwrap(),
            "--no-timestamp",
        ],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&payload).unwrap()).unwrap();
    assert_eq!(v["result"]["num_proper"], 6);
}
