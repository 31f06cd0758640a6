//! End-to-end checks of the flatflow binary: exit codes, report content
//! and the artifacts each subcommand writes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../flatflow/corpus")
        .join(format!("{name}.surf"));
    path.to_str().unwrap().to_string()
}

fn flatflow(args: &[&str], envs: &[(&str, &str)]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatflow"))
        .args(args)
        .envs(envs.iter().copied())
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn validate_prints_a_report_on_the_torus() {
    let out = flatflow(&["validate", &corpus("torus")], &[]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("euler-characteristic: 0"), "{text}");
    assert!(text.contains("area: 1.0000000000000000e0"), "{text}");
    assert!(text.contains("cone-points: 1 (0 singular)"), "{text}");
}

#[test]
fn validate_distinguishes_bad_input_from_bad_usage() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("bad.surf");
    fs::write(&garbage, "not a surface {").unwrap();
    assert_eq!(
        code(&flatflow(&["validate", garbage.to_str().unwrap()], &[])),
        1
    );

    let missing = dir.path().join("missing.surf");
    assert_eq!(
        code(&flatflow(&["validate", missing.to_str().unwrap()], &[])),
        2
    );

    assert_eq!(code(&flatflow(&["validate", "--bogus", "x"], &[])), 2);
    assert_eq!(code(&flatflow(&["no-such-command"], &[])), 2);
}

#[test]
fn holonomy_reports_group_structure_and_wall_classes() {
    let out = flatflow(&["holonomy", &corpus("pillowcase")], &[]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("structure: cyclic of order 2"), "{text}");
    assert!(text.contains("rot 1/2"), "{text}");
    assert!(text.contains("really-flat: true"), "{text}");

    let out = flatflow(&["holonomy", &corpus("square-table")], &[]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("wall-angle classes: 2"), "{text}");
    assert!(text.contains("0/1 pi: sq[0] sq[2]"), "{text}");
}

#[test]
fn unfolding_the_pillowcase_gives_a_trivial_holonomy_torus() {
    let dir = tempfile::tempdir().unwrap();
    let surf = dir.path().join("t2.surf");
    let map = dir.path().join("t2.map");

    let out = flatflow(
        &[
            "unfold",
            &corpus("pillowcase"),
            "-o",
            surf.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("stage unfold: degree 2 cover"), "{text}");
    assert!(map.exists());

    let out = flatflow(&["holonomy", surf.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("structure: trivial"));

    let out = flatflow(&["validate", surf.to_str().unwrap()], &[]);
    assert!(stdout(&out).contains("euler-characteristic: 0"));

    let out = flatflow(
        &[
            "lift-check",
            &corpus("pillowcase"),
            surf.to_str().unwrap(),
            "--map",
            map.to_str().unwrap(),
            "--events",
            "300",
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("commutation holds"));
}

#[test]
fn unfolding_a_bordered_table_writes_stage_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let surf = dir.path().join("flat.surf");

    let out = flatflow(
        &[
            "unfold",
            &corpus("triangle-table"),
            "-o",
            surf.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(dir.path().join("flat.double.surf").exists());
    assert!(dir.path().join("flat.double.map").exists());
    assert!(surf.exists());
    assert!(dir.path().join("flat.map").exists());

    let out = flatflow(&["holonomy", surf.to_str().unwrap()], &[]);
    assert!(stdout(&out).contains("structure: trivial"));
}

#[test]
fn doubling_needs_boundary_and_orienting_needs_nonorientability() {
    let dir = tempfile::tempdir().unwrap();
    let surf = dir.path().join("out.surf");
    let out = flatflow(
        &["double", &corpus("torus"), "-o", surf.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 1);
    let out = flatflow(
        &["orient", &corpus("torus"), "-o", surf.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 1);

    let out = flatflow(
        &["orient", &corpus("klein"), "-o", surf.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let out = flatflow(&["validate", surf.to_str().unwrap()], &[]);
    assert!(stdout(&out).contains("orientable: true"));
}

#[test]
fn trace_writes_an_event_log_and_a_figure() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("path.csv");
    let svg = dir.path().join("path.svg");

    let out = flatflow(
        &[
            "trace",
            "--surface",
            &corpus("torus"),
            "--start",
            "sq:0.2,0.3",
            "--dir",
            "1,1.618",
            "--length",
            "5",
            "--out",
            csv.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "event_index,t,polygon_id,x,y,event_type,edge_or_gluing_id"
    );
    assert!(text.contains(",crossing,"), "{text}");
    assert!(text.lines().last().unwrap().contains(",end,"), "{text}");

    let figure = fs::read_to_string(&svg).unwrap();
    assert!(figure.starts_with("<svg "), "{figure}");
    assert!(figure.contains("<line "), "{figure}");
}

#[test]
fn trace_direction_flags_are_mutually_exclusive_and_required() {
    let base = [
        "trace",
        "--surface",
        "x.surf",
        "--start",
        "sq:0.2,0.3",
        "--length",
        "5",
        "--out",
        "x.csv",
    ];
    let mut both = base.to_vec();
    both.extend(["--angle", "0.5", "--dir", "1,0"]);
    assert_eq!(code(&flatflow(&both, &[])), 2);
    assert_eq!(code(&flatflow(&base, &[])), 2);
}

#[test]
fn billiard_flag_decides_what_walls_do() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let args = |billiard: bool| {
        let mut a = vec![
            "trace".to_string(),
            "--surface".to_string(),
            corpus("square-table"),
            "--start".to_string(),
            "sq:0.3,0.4".to_string(),
            "--angle".to_string(),
            "0.7".to_string(),
            "--length".to_string(),
            "8".to_string(),
            "--out".to_string(),
            csv.to_str().unwrap().to_string(),
        ];
        if billiard {
            a.push("--billiard".to_string());
        }
        a
    };

    let with = args(true);
    let with: Vec<&str> = with.iter().map(String::as_str).collect();
    let out = flatflow(&with, &[]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(fs::read_to_string(&csv).unwrap().contains(",reflection,"));

    let without = args(false);
    let without: Vec<&str> = without.iter().map(String::as_str).collect();
    assert_eq!(code(&flatflow(&without, &[])), 1);
}

#[test]
fn ergodicity_runs_are_reproducible_and_seeded_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.txt");
    let second = dir.path().join("second.txt");
    let args = |out: &str| {
        vec![
            "ergodicity".to_string(),
            "--surface".to_string(),
            corpus("torus"),
            "--mode".to_string(),
            "directional".to_string(),
            "--samples".to_string(),
            "4".to_string(),
            "--length".to_string(),
            "2000".to_string(),
            "--depth".to_string(),
            "1".to_string(),
            "--seed".to_string(),
            "11".to_string(),
            "--out".to_string(),
            out.to_string(),
        ]
    };

    let a: Vec<String> = args(first.to_str().unwrap());
    let a: Vec<&str> = a.iter().map(String::as_str).collect();
    let out = flatflow(&a, &[]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let b: Vec<String> = args(second.to_str().unwrap());
    let b: Vec<&str> = b.iter().map(String::as_str).collect();
    flatflow(&b, &[]);
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let out = flatflow(&a, &[("FLATFLOW_SEED", "5")]);
    assert!(stdout(&out).contains("seed: 5"), "{}", stdout(&out));

    let out = flatflow(&a, &[("FLATFLOW_SEED", "not-a-seed")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn ergodicity_mode_must_fit_the_surface() {
    let out = flatflow(
        &[
            "ergodicity",
            "--surface",
            &corpus("square-table"),
            "--mode",
            "generic",
        ],
        &[],
    );
    assert_eq!(code(&out), 1);

    let out = flatflow(
        &[
            "ergodicity",
            "--surface",
            &corpus("torus"),
            "--mode",
            "sideways",
        ],
        &[],
    );
    assert_eq!(code(&out), 2);
}
