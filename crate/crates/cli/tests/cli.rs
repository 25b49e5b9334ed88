use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};
use sll_core::local_model::{enumerate_special_fiber, residue_field_of_order};

fn sll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sll"))
        .args(args)
        .env_remove("SLL_PRECISION")
        .output()
        .expect("binary runs")
}

/// Runs and parses stdout, asserting the exit code.
fn run(args: &[&str], code: i32) -> Value {
    let out = sll(args);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(code), "{args:?}: {stdout}");
    serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("{args:?} printed non-JSON ({e}): {stdout}"))
}

fn ok(args: &[&str]) -> Value {
    run(args, 0)
}

fn write_temp(name: &str, v: &Value) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path
}

/// Feeds an emitted object back through `canon` and expects it unchanged.
fn assert_round_trip(kind: &str, v: &Value, tag: &str) {
    let path = write_temp(&format!("round_trip_{tag}.json"), v);
    assert_eq!(&ok(&["canon", kind, path.to_str().unwrap()]), v, "{kind}");
}

#[test]
fn deform_iib_is_the_quadric() {
    let v = ok(&["deform", "--fixture", "iib"]);
    assert_eq!(v["relation"], "p + t11*t22 - t12*t21");
    assert_eq!(v["class"], "OrdinaryDoublePoint");
    assert_eq!(v["valuation"], 1);
    assert_eq!(v["frame"], json!({ "y": [3, 4], "x": [1, 2] }));
    assert_eq!(v["a_prime"]["digits"], json!([0, 1, 0]));
    assert_round_trip("series", &v["relation_series"], "deform");
    assert_round_trip("element", &v["a_prime"], "a_prime");
}

#[test]
fn deform_with_explicit_frames() {
    let v = ok(&["deform", "--fixture", "iib", "--frame", "3,4", "--q", "25", "--n", "2"]);
    assert_eq!(v["relation"], "p + t11*t22 - t12*t21");
    let v = ok(&["deform", "--fixture", "mixed", "--frame", "3,4"]);
    assert_eq!(v["relation"], "p*t12 - t21");
    assert_eq!(v["class"], "Smooth");
    assert_eq!(v["variable"], "t21");
    let err = run(&["deform", "--fixture", "iib", "--frame", "1,2"], 2);
    assert_eq!(err["error"]["kind"], "validation");
    run(&["deform", "--fixture", "iib", "--frame", "0,5"], 2);
}

#[test]
fn deform_reads_module_files() {
    let module = ok(&["dieudonne", "validate", "--fixture", "iib", "--q", "5", "--n", "2"])["module"].clone();
    let path = write_temp("iib_module.json", &module);
    let v = ok(&["deform", "--file", path.to_str().unwrap()]);
    assert_eq!(v["relation"], "p + t11*t22 - t12*t21");
    assert_eq!(v["degree"], 6);
    run(&["deform", "--file", path.to_str().unwrap(), "--q", "3"], 2);
}

#[test]
fn ordinary_invariants() {
    let v = ok(&["dieudonne", "invariants", "--fixture", "ordinary"]);
    assert_eq!(v, json!({ "a_number": 0, "p_rank": 2, "kernel_type": "NotSuperspecial" }));
    let v = ok(&["dieudonne", "invariants", "--fixture", "iib", "--q", "4"]);
    assert_eq!(v, json!({ "a_number": 2, "p_rank": 0, "kernel_type": "AlphaSquare" }));
    let v = ok(&["dieudonne", "invariants", "--fixture", "iia", "--p", "5", "--n", "2"]);
    assert_eq!(v["kernel_type"], "NonAlphaSquare");
}

#[test]
fn validation_report_and_module_round_trip() {
    for fx in ["iia", "iib", "ordinary", "lagrangian_generic"] {
        let v = ok(&["dieudonne", "validate", "--fixture", fx, "--q", "9", "--n", "2"]);
        assert_eq!(v["valid"], true);
        assert_eq!(v["elementary_divisors"], json!([0, 0, 1, 1]));
        assert_round_trip("module", &v["module"], fx);
        let path = write_temp(&format!("module_{fx}.json"), &v["module"]);
        let file_inv = ok(&["dieudonne", "invariants", "--file", path.to_str().unwrap()]);
        assert_eq!(file_inv, ok(&["dieudonne", "invariants", "--fixture", fx, "--q", "9", "--n", "2"]));
    }
}

#[test]
fn dual_lattice_of_iib() {
    let v = ok(&["dieudonne", "dual", "--fixture", "iib", "--n", "2"]);
    assert_eq!(v["ring"], json!({ "p": 3, "m": 1, "n": 2 }));
    assert_eq!(v["basis"].as_array().unwrap().len(), 4);
}

#[test]
fn lagrangian_search_outcomes() {
    let v = ok(&["dieudonne", "lagrangian-search", "--fixture", "iia", "--q", "4", "--n", "2"]);
    assert_eq!(v["outcome"], "Found");
    let v = ok(&["dieudonne", "lagrangian-search", "--fixture", "iib", "--q", "4", "--n", "2"]);
    assert_eq!(v["outcome"], "Exhausted");
    assert_eq!(v["precision"], 2);
}

#[test]
fn witt_one_plus_one() {
    let v = ok(&["witt", "add", "1", "1", "--q", "2", "--n", "2"]);
    assert_eq!(v["digits"], json!([0, 1]));
    assert_eq!(v["coeffs"], json!([2]));
    assert_round_trip("element", &v, "two");
    // an element object carries its own ring
    let one = r#"{"p":2,"m":1,"n":2,"digits":[1,0]}"#;
    assert_eq!(ok(&["witt", "add", one, one]), v);
}

#[test]
fn witt_operations() {
    let v = ok(&["witt", "mul", "[0,1]", "[0,1]", "--q", "4", "--n", "2"]);
    assert_eq!(v["m"], 2);
    let z = r#"{"p":2,"m":2,"n":2,"coeffs":[0,1]}"#;
    assert_eq!(ok(&["witt", "frob", z]), v, "the generator is a Teichmuller lift");
    let v = ok(&["witt", "digits", "6", "--q", "2", "--n", "3"]);
    assert_eq!(v["digits"], json!([0, 1, 1]));
    let v = ok(&["witt", "frob", "[1,2]", "--q", "9", "--n", "2"]);
    assert_round_trip("element", &v, "frob");
}

#[test]
fn precision_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_sll"))
        .args(["witt", "digits", "1", "--q", "2"])
        .env("SLL_PRECISION", "4")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(ok(&["witt", "digits", "1", "--q", "2"])["n"], 3);
    let out = Command::new(env!("CARGO_BIN_EXE_sll"))
        .args(["witt", "digits", "1", "--q", "2"])
        .env("SLL_PRECISION", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witt_input_errors() {
    run(&["witt", "add", "1", "[1,2]", "--q", "2"], 2);
    run(&["witt", "add", "1", "x", "--q", "2"], 2);
    run(&["witt", "add", "1", "1", "--q", "6"], 2);
    run(&["witt", "add", "1", "1", "--q", "9", "--p", "2"], 2);
    run(&["witt", "add", "1"], 2);
}

#[test]
fn series_reduce_certifies_the_normal_form() {
    let input = json!({
        "ring": { "p": 3, "m": 1, "n": 3 },
        "nvars": 4,
        "degree": 6,
        "text": "p + x1*x4 - x2*x3 + x1^3 + 9*x2",
    });
    let path = write_temp("series_odp.json", &input);
    let v = ok(&["series-reduce", path.to_str().unwrap()]);
    assert_eq!(v["kind"], "NormalForm");
    assert_eq!(v["certified"], true);
    assert_eq!(v["a_prime"]["digits"], json!([0, 1, 0]));
    assert_eq!(v["classification"]["class"], "OrdinaryDoublePoint");
    assert_eq!(v["phi"].as_array().unwrap().len(), 4);
    assert_round_trip("quadform", &v["q_prime"], "q_prime");
    assert_round_trip("series", &v["unit"], "unit");
    for (i, phi) in v["phi"].as_array().unwrap().iter().enumerate() {
        assert_round_trip("series", phi, &format!("phi{i}"));
    }
    let v = ok(&["series-reduce", path.to_str().unwrap(), "--degree", "3"]);
    assert_eq!(v["input"]["degree"], 3);
    run(&["series-reduce", path.to_str().unwrap(), "--degree", "9"], 2);
}

#[test]
fn series_reduce_smooth_and_invalid_inputs() {
    let smooth = json!({ "ring": { "p": 5, "m": 1, "n": 2 }, "nvars": 2, "degree": 4, "text": "p + x2 + x1^2" });
    let path = write_temp("series_smooth.json", &smooth);
    let v = ok(&["series-reduce", path.to_str().unwrap()]);
    assert_eq!(v["kind"], "Smooth");
    assert_eq!(v["variable"], "x2");

    let degenerate = json!({ "ring": { "p": 3, "m": 1, "n": 2 }, "nvars": 2, "degree": 4, "text": "p + x1^2" });
    let path = write_temp("series_degenerate.json", &degenerate);
    assert_eq!(run(&["series-reduce", path.to_str().unwrap()], 2)["error"]["kind"], "validation");

    let path = write_temp("series_unknown_field.json", &json!({ "ring": { "p": 3, "m": 1, "n": 2 }, "nvars": 1, "degree": 3, "txt": "x1" }));
    run(&["series-reduce", path.to_str().unwrap()], 2);
    let missing = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("does_not_exist.json");
    assert_eq!(run(&["series-reduce", missing.to_str().unwrap()], 3)["error"]["kind"], "io");
}

#[test]
fn local_model_points_and_tangents() {
    for q in [2u64, 3, 4] {
        let qs = q.to_string();
        let v = ok(&["local-model", "points", "--q", &qs]);
        let expected = enumerate_special_fiber(&residue_field_of_order(q).unwrap()).len();
        assert_eq!(v["count"], expected);
        assert_eq!(v["points"].as_array().unwrap().len(), expected);
        assert_round_trip("plane", &v["points"][0], &format!("plane{q}"));

        let t = ok(&["local-model", "tangents", "--q", &qs]);
        let singular = t["singular"].as_array().unwrap();
        assert_eq!(singular.len(), 1);
        // coefficients are integers over prime fields and polynomials otherwise
        let c = |k: i64| if q == 4 { json!([k, 0]) } else { json!(k) };
        assert_eq!(singular[0]["rows"], json!([[c(1), c(0), c(0), c(0)], [c(0), c(0), c(0), c(1)]]));
        for p in t["points"].as_array().unwrap() {
            let dim = p["tangent_dimension"].as_u64().unwrap();
            assert_eq!(dim == 4, p["plane"] == singular[0]);
            assert!(dim == 3 || dim == 4);
        }
    }
}

#[test]
fn local_model_chart() {
    let v = ok(&["local-model", "chart", "--q", "5", "--n", "2"]);
    assert_eq!(v["equation"], "p + t11*t22 - t12*t21");
    assert_eq!(v["reduction_mod_p"], "t11*t22 - t12*t21");
    assert_eq!(v["class"], "OrdinaryDoublePoint");
    let v = ok(&["local-model", "chart", "--q", "2"]);
    assert_eq!(v["class"], "OrdinaryDoublePoint");
    assert_eq!(v["a_prime"]["digits"], json!([0, 1, 0]));
    run(&["local-model", "points", "--q", "10"], 2);
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["deform", "--fixture", "iib", "--q", "9"],
        vec!["local-model", "tangents", "--q", "3"],
        vec!["check", "--seed", "11", "--samples", "10"],
    ] {
        assert_eq!(sll(&args).stdout, sll(&args).stdout, "{args:?}");
    }
}

#[test]
fn seeded_check_is_reproducible() {
    let a = ok(&["check", "--seed", "3", "--samples", "10"]);
    assert_eq!(a["failures"], 0);
    assert_eq!(a["suites"].as_array().unwrap().len(), 6);
    let b = ok(&["check", "--seed", "4", "--samples", "10"]);
    assert_ne!(a["digest"], b["digest"]);
}

#[test]
fn usage_errors_are_json() {
    let v = run(&["dieudonne", "invariants", "--fixture", "iic"], 2);
    assert_eq!(v["error"]["kind"], "validation");
    run(&["dieudonne", "invariants"], 2);
    run(&["frobnicate"], 2);
    assert_eq!(sll(&["--help"]).status.code(), Some(0));
}
