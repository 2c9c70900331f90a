//! Every subcommand run through the binary: reports validate against the
//! published schema, exit codes follow the documented mapping.

use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

const PAIR_SUM: &str = r#"{"dim": 2, "functionals": [[1, 1]]}"#;
const PAIR_FULL: &str = r#"{"dim": 2, "functionals": [[1, 0], [0, 1]]}"#;
const GEOMETRIC: &str = r#"{"kind": "closed", "terms": ["exp(-n*log(2))", "0"], "limit": [0, 0]}"#;

fn difflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_difflab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn schema() -> JSONSchema {
    let src = include_str!("../../../schemas/report.schema.json");
    JSONSchema::compile(&serde_json::from_str(src).unwrap()).expect("schema compiles")
}

fn report_cases() -> Vec<(Vec<&'static str>, i32)> {
    vec![
        (
            vec![
                "check-smooth",
                "--expr",
                "x^2 + sin(y)",
                "--box",
                "-1,1;-1,1",
                "--k",
                "2",
            ],
            0,
        ),
        (
            vec!["check-smooth", "--expr", "abs(x)", "--box", "-1,1;-1,1"],
            1,
        ),
        (vec!["phi", "--space", "cross", "--expr", "x*y"], 0),
        (
            vec![
                "gamma", "--space", "r2", "--plaque", "t, t^2", "--box", "-1,1",
            ],
            0,
        ),
        (
            vec![
                "member", "--space", "cross", "--plaque", "t^3, 0", "--box", "-1,1",
            ],
            0,
        ),
        (
            vec!["morphism", "--from", "r2", "--to", "r2", "--map", "x^2, y"],
            2,
        ),
        (vec!["psi-upsilon", "--space", "point"], 0),
        (vec!["tangent-dim", "--space", "cross", "--point", "1,0"], 0),
        (vec!["linearity", "--space", "r2", "--point", "0,0"], 0),
        (
            vec![
                "continuity",
                "--space",
                "r2",
                "--p1",
                "t, 0",
                "--p2",
                "0, t",
                "--box",
                "-1,1",
            ],
            0,
        ),
        (vec!["alpha", "--pair", PAIR_SUM], 1),
        (
            vec![
                "weak-deriv",
                "--pair",
                PAIR_FULL,
                "--curve",
                "t, t^2",
                "--at",
                "0",
            ],
            0,
        ),
        (
            vec![
                "weak-int", "--pair", PAIR_FULL, "--curve", "1, 2*t", "--from", "0", "--to", "1",
            ],
            0,
        ),
        (
            vec!["mackey", "--pair", PAIR_FULL, "--sequence", GEOMETRIC],
            0,
        ),
        (
            vec![
                "lipk",
                "--pair",
                PAIR_FULL,
                "--curve",
                "t*abs(t), t",
                "--k",
                "1",
            ],
            0,
        ),
        (vec!["delta", "--expr", "t^2", "--nodes", "0,1,3"], 0),
        (vec!["gallery"], 0),
    ]
}

#[test]
fn every_report_validates_against_the_schema() {
    let schema = schema();
    for (args, code) in report_cases() {
        let out = difflab(&args);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {stderr}");
        let doc: Value =
            serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        if let Err(errors) = schema.validate(&doc) {
            let msgs: Vec<String> = errors
                .map(|e| format!("{} at {}", e, e.instance_path))
                .collect();
            panic!("{args:?}: {msgs:?}");
        }
        assert_eq!(doc["command"], args[0], "{args:?}");
        // The report decodes back into the library type.
        let back: difflab::report::Report = serde_json::from_value(doc).unwrap();
        assert_eq!(back.command, args[0]);
    }
}

#[test]
fn normalized_reports_are_byte_identical() {
    for (args, _) in report_cases().into_iter().take(8) {
        let mut with = args.clone();
        with.extend(["--normalized", "--seed", "3"]);
        let (a, b) = (difflab(&with), difflab(&with));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(doc["timings"], serde_json::json!({}), "{args:?}");
    }
}

#[test]
fn samples_on_a_101_grid() {
    let f1 = "atzero(x*y^2/(x^2+y^4), 0)";
    let out = difflab(&[
        "samples",
        "--expr",
        f1,
        "--box",
        "-1,1;-1,1",
        "--points",
        "101",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,value,d_x,d_y"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101 * 101);
    assert!(rows.iter().all(|r| r.split(',').count() == 5));
    // 17 significant digits, round-trippable.
    let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[..3], [-1.0, -1.0, -0.5]);

    let out = difflab(&[
        "samples", "--kind", "spectrum", "--space", "cross", "--point", "0,0",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("index,singular_value"));
    assert_eq!(text.lines().count(), 3);

    let out = difflab(&[
        "samples",
        "--expr",
        f1,
        "--box",
        "-1,1;-1,1",
        "--points",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "x,y,value,d_x,d_y\n"
    );
}

#[test]
fn bad_input_maps_to_exit_codes() {
    // Parse and schema errors.
    assert_eq!(
        difflab(&["check-smooth", "--expr", "x +", "--box", "-1,1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        difflab(&["alpha", "--pair", "{\"dim\": 2}"]).status.code(),
        Some(3)
    );
    assert_eq!(
        difflab(&["phi", "--space", "no-such-space", "--expr", "x"])
            .status
            .code(),
        Some(3)
    );
    // Domain error: log of a negative number everywhere on the interval.
    let out = difflab(&[
        "weak-int",
        "--pair",
        PAIR_FULL,
        "--curve",
        "log(-1 - t^2), 0",
        "--from",
        "0",
        "--to",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // Usage errors are input errors too, never the inconclusive code.
    assert_eq!(difflab(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(difflab(&["delta", "--expr", "t"]).status.code(), Some(3));
    assert_eq!(difflab(&["--help"]).status.code(), Some(0));
}

#[test]
fn out_flag_writes_the_file() {
    let dir = std::env::temp_dir().join(format!("difflab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("delta.json");
    let out = difflab(&[
        "delta",
        "--expr",
        "t^3",
        "--nodes",
        "0,1,2,3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(schema().is_valid(&doc));
    std::fs::remove_dir_all(dir).unwrap();
}
