use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use orbitlab::format::{parse_region, parse_spec, serialize, Operator};
use orbitlab::specmeas::SpectralMeasure;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn orbitlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitlab"))
        .args(args)
        .env_remove("ORBITLAB_SEED")
        .output()
        .expect("binary runs")
}

fn with_fixtures(args: &[&str]) -> Vec<String> {
    args.iter()
        .map(|a| {
            if a.ends_with(".op") {
                fixture(a).display().to_string()
            } else {
                a.to_string()
            }
        })
        .collect()
}

/// Runs with `--json`, returning the exit code and the parsed report.
fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json".to_string()];
    full.extend(with_fixtures(args));
    let refs: Vec<&str> = full.iter().map(String::as_str).collect();
    let out = orbitlab(&refs);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    });
    (out.status.code().expect("exit code"), report)
}

fn measure(name: &str) -> SpectralMeasure {
    match parse_spec(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap() {
        Operator::Measure(m) => m,
        Operator::Matrix { .. } => panic!("{name} is a matrix"),
    }
}

/// Recomputes an open-region witness from the report against the inputs.
fn replay_region_witness(w: &Value, h: &SpectralMeasure, k: &SpectralMeasure) {
    let region = parse_region(w["region"].as_str().unwrap()).unwrap();
    let capped = w["capped"].as_bool().unwrap();
    let eval = |m: &SpectralMeasure| {
        if capped {
            m.cruder_multiplicity(&region)
        } else {
            m.crude_multiplicity(&region)
        }
    };
    assert_eq!(eval(h).to_string(), w["m_h"].as_str().unwrap());
    assert_eq!(eval(k).to_string(), w["m_k"].as_str().unwrap());
    assert_ne!(w["m_h"], w["m_k"]);
}

#[test]
fn type_iii_equal_supports_have_equal_norm_closures() {
    let (code, r) = json(&["compare", "--topology", "norm", "iii_a.op", "iii_b.op"]);
    assert_eq!(code, 0);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["verdict"]["holds"], true);
}

#[test]
fn type_iii_different_supports_come_with_a_witness() {
    let (code, r) = json(&["compare", "--topology", "norm", "iii_a.op", "iii_point.op"]);
    assert_eq!(code, 1);
    assert_eq!(r["verdict"]["holds"], false);
    let w = &r["witnesses"][0];
    replay_region_witness(w, &measure("iii_a.op"), &measure("iii_point.op"));

    // The point's orbit is in the strong closure of the larger one, not
    // the other way round.
    assert_eq!(json(&["member", "iii_point.op", "iii_a.op"]).0, 0);
    let (code, r) = json(&["member", "iii_a.op", "iii_point.op"]);
    assert_eq!(code, 1);
    replay_region_witness(
        &r["witnesses"][0],
        &measure("iii_point.op"),
        &measure("iii_a.op"),
    );
}

#[test]
fn nonclosed_orbit_reports_point_and_radius() {
    let (code, r) = json(&["closedness", "iiinf_nonclosed.op"]);
    assert_eq!(code, 1);
    let w = &r["witnesses"][0];
    assert_eq!(w["kind"], "deleted_neighbourhood");
    assert_eq!(w["point"], "(1/2, 0)");
    let radius: orbitlab::Dyadic = w["radius"].as_str().unwrap().parse().unwrap();
    assert!(radius.is_positive());

    // Replay: the deleted neighbourhood carries as much as the atom.
    let m = measure("iiinf_nonclosed.op");
    let pt = m.atoms()[0].pt;
    let class = m.deleted_neighborhood_class(&pt, radius).unwrap();
    assert_eq!(class.to_string(), w["deleted_class"].as_str().unwrap());

    assert_eq!(json(&["closedness", "iiinf_closed.op"]).0, 0);
}

#[test]
fn exit_codes_match_verdicts() {
    let queries: &[&[&str]] = &[
        &[
            "compare",
            "--topology",
            "norm",
            "iinf_big.op",
            "iinf_small.op",
        ],
        &[
            "compare",
            "--topology",
            "strong",
            "iinf_big.op",
            "iinf_small.op",
        ],
        &[
            "compare",
            "--topology",
            "strongstar",
            "iii_a.op",
            "iii_b.op",
        ],
        &["member", "iinf_small.op", "iinf_big.op"],
        &["member", "iinf_big.op", "iinf_small.op"],
        &[
            "compare",
            "--topology",
            "norm",
            "ii1_atoms.op",
            "ii1_shifted.op",
        ],
        &["compare", "--topology", "norm", "mat_a.op", "mat_b.op"],
        &["compare", "--topology", "norm", "mat_a.op", "mat_far.op"],
        &["small", "iiinf_block.op"],
        &["small", "iii_a.op"],
        &["closedness", "ii1_atoms.op"],
    ];
    for q in queries {
        let (code, r) = json(q);
        let holds = r["verdict"]["holds"].as_bool().expect("yes/no query");
        assert_eq!(code, if holds { 0 } else { 1 }, "{q:?}");
        assert_eq!(r["exit_code"], code, "{q:?}");
        if let Some(ws) = r["witnesses"].as_array() {
            for w in ws.iter().filter(|w| w["kind"] == "open_region") {
                let (a, b) = if q[0] == "member" {
                    (q[2], q[1])
                } else {
                    (q[q.len() - 2], q[q.len() - 1])
                };
                replay_region_witness(w, &measure(a), &measure(b));
            }
        }
    }
}

#[test]
fn computations_exit_zero() {
    for q in [
        &["delta", "iii_a.op", "iii_point.op"][..],
        &["delta", "mat_a.op", "mat_far.op"],
        &["dist", "mat_a.op", "mat_far.op"],
        &["essential", "iiinf_nonclosed.op"],
        &["central-meet", "iiinf_closed.op"],
    ] {
        let (code, r) = json(q);
        assert_eq!(code, 0, "{q:?}");
        assert!(r["verdict"]["holds"].is_null());
    }
}

#[test]
fn delta_bracket_encloses_the_far_end() {
    let (_, r) = json(&["delta", "iii_a.op", "iii_point.op"]);
    let b = &r["brackets"];
    let lo: orbitlab::Dyadic = b["lo"].as_str().unwrap().parse().unwrap();
    let hi: orbitlab::Dyadic = b["hi"].as_str().unwrap().parse().unwrap();
    assert!(lo.to_f64() <= 1.0 && 1.0 <= hi.to_f64() + 1.0 / 256.0);
    assert!(lo.to_f64() > 0.99);

    let (_, r) = json(&["delta", "mat_a.op", "mat_far.op"]);
    assert!((r["result"]["delta"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn construct_mismatch_cell_replays() {
    let (code, r) = json(&["construct", "--mesh", "0.25", "mat_a.op", "mat_b.op"]);
    assert_eq!(code, 0);
    assert!(r["result"]["achieved_norm"].as_f64().unwrap() <= 0.25);

    let (code, r) = json(&["construct", "--mesh", "0.25", "mat_a.op", "mat_far.op"]);
    assert_eq!(code, 1);
    let w = &r["witnesses"][0];
    let side = w["side"].as_f64().unwrap();
    let (i, j) = (w["i"].as_i64().unwrap(), w["j"].as_i64().unwrap());
    let count = |eigs: &[(f64, f64)]| {
        eigs.iter()
            .filter(|(re, im)| (re / side).floor() as i64 == i && (im / side).floor() as i64 == j)
            .count() as u64
    };
    // Both inputs are diagonal, so the eigenvalues are the diagonal entries.
    assert_eq!(
        count(&[(1.0, 0.0), (0.0, 1.0)]),
        w["a_count"].as_u64().unwrap()
    );
    assert_eq!(
        count(&[(3.0, 0.0), (0.0, 1.0)]),
        w["b_count"].as_u64().unwrap()
    );
    assert_ne!(w["a_count"], w["b_count"]);
}

#[test]
fn errors_exit_two_with_line_numbers() {
    let out = orbitlab(&["essential", fixture("bad_syntax.op").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let (code, r) = json(&["essential", "bad_mass.op"]);
    assert_eq!(code, 2);
    assert!(r["error"].as_str().unwrap().contains("1/2"));

    let (code, _) = json(&["dist", "iii_a.op", "iii_b.op"]);
    assert_eq!(code, 2);
    assert_eq!(
        json(&["compare", "--topology", "norm", "mat_a.op", "iii_a.op"]).0,
        2
    );

    let out = orbitlab(&["compare", "--topology", "weak", "a", "b"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn frame_flag_is_respected() {
    let (code, r) = json(&[
        "small",
        "iii_a.op",
        "--support",
        "--frame",
        "-1",
        "-1",
        "2",
        "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["query"]["options"]["frame"], "-1 -1 2 2");
    // A frame that cuts through the set is rejected.
    assert_eq!(
        json(&[
            "small",
            "iii_a.op",
            "--support",
            "--frame",
            "0",
            "0",
            "1",
            "1"
        ])
        .0,
        2
    );
}

fn strip_timing(mut r: Value) -> Value {
    r["timing_ms"] = Value::Null;
    r
}

#[test]
fn output_is_deterministic_and_seeded() {
    let q = ["dist", "mat_a.op", "mat_far.op", "--seed", "11"];
    let (_, a) = json(&q);
    let (_, b) = json(&q);
    assert_eq!(strip_timing(a.clone()), strip_timing(b));
    assert_eq!(a["seed"], 11);

    let out = Command::new(env!("CARGO_BIN_EXE_orbitlab"))
        .args(["--json", "central-meet"])
        .arg(fixture("iiinf_closed.op"))
        .env("ORBITLAB_SEED", "5")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["seed"], 5);
}

#[test]
fn fixtures_round_trip() {
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if name.starts_with("bad_") {
            continue;
        }
        let op = parse_spec(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(parse_spec(&serialize(&op)).unwrap(), op, "{name}");
    }
}

#[test]
fn selftest_subset_passes() {
    let (code, r) = json(&["selftest", "--pairs", "12"]);
    assert_eq!(code, 0, "{}", r["notes"]);
    assert_eq!(r["result"].as_array().unwrap().len(), 10);
}

#[test]
fn text_output_leads_with_the_verdict() {
    let out = orbitlab(&[
        "compare",
        "--topology",
        "norm",
        fixture("iii_a.op").to_str().unwrap(),
        fixture("iii_b.op").to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("HOLDS:"));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.op");
    std::fs::write(&p, "factor II_1\natom 0 0 value 1\n").unwrap();
    let out = orbitlab(&["closedness", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}
