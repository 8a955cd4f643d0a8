//! End-to-end tests of the command-line interface, run against the built
//! binary.

use std::path::Path;
use std::process::{Command, Output};

use gromp::io::DemonstrationDataset;

fn gromp(args: &[&str], envs: &[(&str, &str)]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gromp"))
        .args(args)
        .envs(envs.iter().copied())
        .output()
        .expect("binary runs")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn help_exits_zero_for_every_subcommand() {
    for sub in ["demo-gen", "fit", "rollout", "experiment", "report"] {
        let out = gromp(&[sub, "--help"], &[]);
        assert_exit(&out, 0);
    }
    assert_exit(&gromp(&["--help"], &[]), 0);
}

#[test]
fn demo_gen_writes_full_length_episodes_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        let result = gromp(
            &[
                "demo-gen",
                "--task",
                "peg",
                "--episodes",
                "10",
                "--seed",
                "7",
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert_exit(&result, 0);
    }
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "same flags and seed must give identical files"
    );
    let dataset = DemonstrationDataset::load(&a).unwrap();
    assert_eq!(dataset.episodes.len(), 10);
    assert!(dataset.episodes.iter().all(|e| e.records.len() == 64));
}

#[test]
fn demo_gen_rejects_zero_episodes_as_usage_error() {
    let out = gromp(
        &[
            "demo-gen",
            "--task",
            "peg",
            "--episodes",
            "0",
            "--out",
            "/tmp/x.txt",
        ],
        &[],
    );
    assert_exit(&out, 2);
}

#[test]
fn fit_prints_losses_with_unit_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    let manifold = dir.path().join("m.txt");
    assert_exit(
        &gromp(
            &[
                "demo-gen",
                "--task",
                "nut",
                "--episodes",
                "12",
                "--seed",
                "3",
                "--out",
                data.to_str().unwrap(),
            ],
            &[],
        ),
        0,
    );
    let out = gromp(
        &[
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--out",
            manifold.to_str().unwrap(),
        ],
        &[],
    );
    assert_exit(&out, 0);
    let lines: Vec<(usize, f64)> = stdout(&out)
        .lines()
        .map(|l| {
            let mut toks = l.split_whitespace();
            (
                toks.next().unwrap().parse().unwrap(),
                toks.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(lines.len(), 7);
    assert!((lines[0].1 - 1.0).abs() < 1e-9);
    assert!((lines[6].1 - 1.0).abs() < 1e-9);
    let argmin = lines
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap()
        .0;
    assert_eq!(argmin, 2, "nut dataset loss curve: {lines:?}");
    assert!(manifold.exists());
}

#[test]
fn fit_with_missing_file_exits_one() {
    let out = gromp(
        &["fit", "--data", "/nonexistent/d.txt", "--out", "/tmp/m.txt"],
        &[],
    );
    assert_exit(&out, 1);
}

#[test]
fn rollout_rejects_out_of_range_dim() {
    let out = gromp(
        &[
            "rollout",
            "--task",
            "peg",
            "--data",
            "/tmp/d.txt",
            "--dim",
            "7",
        ],
        &[],
    );
    assert_exit(&out, 2);
}

#[test]
fn rollout_full_rank_matches_baseline_hash() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    assert_exit(
        &gromp(
            &[
                "demo-gen",
                "--task",
                "peg",
                "--episodes",
                "10",
                "--seed",
                "5",
                "--out",
                data.to_str().unwrap(),
            ],
            &[],
        ),
        0,
    );
    let baseline = gromp(
        &[
            "rollout",
            "--task",
            "peg",
            "--data",
            data.to_str().unwrap(),
            "--baseline",
            "--seed",
            "11",
        ],
        &[],
    );
    let full_rank = gromp(
        &[
            "rollout",
            "--task",
            "peg",
            "--data",
            data.to_str().unwrap(),
            "--dim",
            "6",
            "--seed",
            "11",
        ],
        &[],
    );
    assert_exit(&baseline, 0);
    assert_exit(&full_rank, 0);
    let hash = |s: &str| {
        s.lines()
            .find(|l| l.starts_with("trajectory_hash"))
            .unwrap()
            .to_string()
    };
    assert_eq!(hash(&stdout(&baseline)), hash(&stdout(&full_rank)));
}

#[test]
fn rollout_succeeds_under_zero_noise() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    let quiet = [
        "--slip-gain",
        "0",
        "--slip-noise",
        "0",
        "--grasp-offset-sigma",
        "0",
        "--grasp-yaw-sigma",
        "0",
    ];
    let mut args = vec![
        "demo-gen",
        "--task",
        "peg",
        "--episodes",
        "8",
        "--noise",
        "0",
        "--seed",
        "2",
        "--out",
        data.to_str().unwrap(),
    ];
    args.extend_from_slice(&quiet);
    assert_exit(&gromp(&args, &[]), 0);

    let mut args = vec![
        "rollout",
        "--task",
        "peg",
        "--data",
        data.to_str().unwrap(),
        "--baseline",
        "--seed",
        "4",
        "--action-noise",
        "0",
        "--obs-noise",
        "0",
        "--knn",
        "1",
    ];
    args.extend_from_slice(&quiet);
    let out = gromp(&args, &[]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("success 1"), "{}", stdout(&out));
}

#[test]
fn experiment_and_report_roundtrip_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.txt");
    std::fs::write(
        &config,
        "task=peg\ndemo_stages=4,8\ntrials_per_stage=2\nreplications=2\nmaster_seed=5\nhorizon=32\n",
    )
    .unwrap();

    let run = |out_dir: &Path| {
        let out = gromp(
            &[
                "experiment",
                "--config",
                config.to_str().unwrap(),
                "--out-dir",
                out_dir.to_str().unwrap(),
                "--jobs",
                "2",
            ],
            &[],
        );
        assert_exit(&out, 0);
        let report = gromp(
            &[
                "report",
                "--csv",
                out_dir.join("results.csv").to_str().unwrap(),
                "--out-dir",
                out_dir.to_str().unwrap(),
            ],
            &[],
        );
        assert_exit(&report, 0);
    };
    let dir_a = dir.path().join("a");
    let dir_b = dir.path().join("b");
    run(&dir_a);
    run(&dir_b);

    for name in [
        "results.csv",
        "success_by_stage.csv",
        "q_history.csv",
        "success_by_stage.svg",
    ] {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} must be byte-identical across reruns");
    }

    let csv = std::fs::read_to_string(dir_a.join("results.csv")).unwrap();
    // 2 stages x 2 trials x 2 replications x 2 arms, plus the header.
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn out_dir_falls_back_to_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.txt");
    std::fs::write(
        &config,
        "task=peg\ndemo_stages=3\ntrials_per_stage=1\nreplications=1\nmaster_seed=5\nhorizon=16\n",
    )
    .unwrap();
    let out = gromp(
        &["experiment", "--config", config.to_str().unwrap()],
        &[("GROMP_OUT_DIR", dir.path().to_str().unwrap())],
    );
    assert_exit(&out, 0);
    assert!(dir.path().join("results.csv").exists());
}

#[test]
fn report_on_empty_results_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("results.csv");
    std::fs::write(
        &csv,
        "replication,stage_demos,trial,arm,projection_dim,success,q0,q1,q2,q3,q4,q5,q6,seed\n",
    )
    .unwrap();
    let out = gromp(
        &[
            "report",
            "--csv",
            csv.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_exit(&out, 1);
}
