//! End-to-end checks of the command-line surface: formats, error paths,
//! infeasible-point reporting, and figure-preset trends.

use std::path::Path;
use std::process::{Command, Output};

use noma_lab::scenario::{parse_scenario, presets, scenario_to_string};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-lab"))
        .args(args)
        .env("NOMA_LAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn write_scenario(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("scenario.txt");
    std::fs::write(&path, scenario_to_string(&presets::default_scenario())).unwrap();
    path
}

#[test]
fn analyze_emits_one_row_per_user() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path());
    let csv = stdout(&run(&["analyze", "--scenario", scenario.to_str().unwrap()]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "cluster,user,legit_rate,eve_rate,secrecy_rate");
    assert_eq!(lines.len(), 1 + 48);
    // Every cell parses back to a float (or integer index).
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 5);
        for cell in cells {
            cell.parse::<f64>().expect("numeric cell");
        }
    }
}

#[test]
fn analyze_csv_round_trips_library_values() {
    let csv = stdout(&run(&["analyze"]));
    let config = presets::default_scenario();
    let model = noma_lab::estimation::compute_rho(&config);
    let report = noma_lab::rates::closed_form_report(&config, &model);
    for (line, row) in csv.lines().skip(1).zip(&report.users) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        // Shortest round-trip float formatting: parse restores the exact bits.
        assert_eq!(cells[2], row.legit);
        assert_eq!(cells[3], row.eve);
        assert_eq!(cells[4], row.secrecy);
    }
}

#[test]
fn invalid_scenario_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "schema_version 1\nn_antennas 8\npilot_length 0\ncluster\neve 0.5 0\nuser 1 1 -2\n").unwrap();
    let output = run(&["analyze", "--scenario", path.to_str().unwrap()]);
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("invalid scenario"), "stderr: {err}");
}

#[test]
fn unwritable_output_is_a_clean_error() {
    let output = run(&["analyze", "--out", "/nonexistent-dir/out.csv"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("cannot write"));
}

#[test]
fn infeasible_optimization_exits_nonzero() {
    // A zero eavesdropping cap with an active attack admits no pilot vector.
    let output = run(&["optimize", "--problem", "op2", "--re", "0"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("infeasible"));
}

#[test]
fn optimize_op4_reports_verified_solution() {
    // A weak attack on a narrow path-loss spread: the per-user rate floor
    // above the eavesdropping cap is reachable, so the max-min search runs.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("weak_attack.txt");
    let config = presets::clustered_with_span(32, 3, 3, 4, 10.0, -5.0, -25.0, 0.4);
    std::fs::write(&path, scenario_to_string(&config)).unwrap();
    let csv = stdout(&run(&[
        "optimize",
        "--problem",
        "op4",
        "--re",
        "0.05",
        "--scenario",
        path.to_str().unwrap(),
    ]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "cluster,user,power,r_o,r_e,objective,achieved_min_rate,max_eve_rate,verified"
    );
    assert_eq!(lines.len(), 1 + 9);
    for line in &lines[1..] {
        assert!(line.ends_with(",true"), "unverified row: {line}");
    }
}

#[test]
fn sweep_reports_na_for_unusable_points_and_continues() {
    // 48 users cannot split into 5 clusters: that point degrades to NA while
    // the others carry numbers.
    let csv = stdout(&run(&["sweep", "--sweep", "cluster-mode=5,6"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("cluster-mode,5,NA,NA"));
    assert!(lines[2].starts_with("cluster-mode,6,"));
    assert!(!lines[2].contains("NA,NA,NA,NA"));
}

#[test]
fn sweep_rejects_unsorted_values() {
    let output = run(&["sweep", "--sweep", "psnr=10,0"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("strictly increasing"));
}

#[test]
fn sweep_antennas_closed_form_grows() {
    let csv = stdout(&run(&["sweep", "--sweep", "n-antennas=32,64,128"]));
    let sums: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(sums[0] < sums[1] && sums[1] < sums[2], "{sums:?}");
}

#[test]
fn preset_fig2_secrecy_rises_then_saturates() {
    let csv = stdout(&run(&["preset", "fig2", "--trials", "150", "--seed", "3"]));
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 11);
    let cf: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    // Monotone nondecreasing across the power sweep...
    for pair in cf.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-9, "sum secrecy dropped: {pair:?}");
    }
    // ...with early growth an order of magnitude above the tail growth.
    let early = cf[1] - cf[0];
    let late = cf[10] - cf[9];
    assert!(late < 0.1 * early, "no saturation: early {early}, late {late}");
    // The interference-free time-shared comparator keeps growing with
    // power while the superposed scheme saturates, so it wins at the top of
    // the sweep.
    let tdma: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(
        tdma[10] > cf[10],
        "time-shared baseline should win at very high power: {} vs {}",
        tdma[10],
        cf[10]
    );
}

#[test]
fn preset_fig5_more_clusters_win() {
    let csv = stdout(&run(&["preset", "fig5"]));
    for line in csv.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        // 24 clusters of 2 beat 16 clusters of 3 beat 12 clusters of 4.
        assert!(cells[1] >= cells[2] && cells[2] >= cells[3], "{cells:?}");
    }
}

#[test]
fn preset_fig6_optimizer_spends_less_than_equal_policy() {
    let csv = stdout(&run(&["preset", "fig6"]));
    let mut compared = 0;
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells[1] != "NA" && cells[2] != "NA" {
            let op3: f64 = cells[1].parse().unwrap();
            let equal: f64 = cells[2].parse().unwrap();
            assert!(op3 <= equal + 1e-9, "{line}");
            compared += 1;
        }
    }
    assert!(compared >= 3, "too few feasible rows to compare");
}

#[test]
fn preset_fig7_allocator_beats_baselines() {
    let csv = stdout(&run(&["preset", "fig7"]));
    let mut compared = 0;
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells[1] == "NA" {
            continue;
        }
        let op4: f64 = cells[1].parse().unwrap();
        let equal: f64 = cells[2].parse().unwrap();
        let fixed: f64 = cells[3].parse().unwrap();
        assert!(op4 >= equal.max(fixed) - 0.01, "{line}");
        compared += 1;
    }
    assert!(compared >= 6, "too few feasible sweep points: {compared}");
}

#[test]
fn default_scenario_preset_round_trips() {
    let text = stdout(&run(&["preset", "default-scenario"]));
    let parsed = parse_scenario(&text).unwrap();
    assert_eq!(parsed, presets::default_scenario());
}
