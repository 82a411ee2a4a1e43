use std::process::Command;

use profree::cli::{run, EXIT_CAP, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("profree").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn reduce_prints_the_word() {
    assert_eq!(
        call(&["reduce", "a a^-1 b"]),
        (EXIT_OK, "b\n".into(), String::new())
    );
    assert_eq!(call(&["reduce", "a^2 a^{-2}"]).1, "1\n");
    let (code, _, err) = call(&["reduce", "a q"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("unknown generator"));
}

#[test]
fn usage_errors() {
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["reduce", "a", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(
        call(&["--alphabet", "a | b", "--k", "2", "reduce", "a"]).0,
        EXIT_USAGE
    );
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn custom_alphabet() {
    let (code, out, _) = call(&["--alphabet", "x y | z", "reduce", "x y y^-1 z"]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "x z\n"));
}

#[test]
fn image_and_distance() {
    let q = r#"{"kind":"abelian","modulus":7}"#;
    let (code, out, _) = call(&["image", "a^20 b", "--quotient", q]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["image"]["residues"], serde_json::json!([6, 1]));
    let (_, out, _) = call(&["distance", "a^6 b^2", "--quotient", q]);
    assert_eq!(json(&out)["distance"], 3);
    let (code, _, err) = call(&["--cap", "5", "distance", "a^3 b^3", "--quotient", q]);
    assert_eq!(code, EXIT_CAP);
    assert!(err.contains("cap"));
}

#[test]
fn stallings_outputs() {
    let (code, out, _) = call(&["stallings", "--gens", "a^2; b", "--member", "a b a"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["vertices"], 2);
    assert_eq!(v["member"]["in_subgroup"], false);
    let (_, dot, _) = call(&["stallings", "--gens", "a^2; b", "--dot"]);
    assert!(dot.starts_with("digraph stallings {"));
    assert!(dot.contains("0 [shape=doublecircle];"));
}

#[test]
fn separate_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sep.json");
    let (code, out, _) = call(&["separate", "--word", "a", "--gens", "a^2; b"]);
    assert_eq!(code, EXIT_OK);
    std::fs::write(&path, &out).unwrap();
    let (code, out, _) = call(&["separate-verify", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["pass"], true);

    let (code, _, err) = call(&["separate", "--word", "a^2", "--gens", "a^2; b"]);
    assert_eq!(code, EXIT_VERIFY_FAILED);
    assert!(err.contains("subgroup"));

    let (code, out, _) = call(&["separate", "--word", "a b a^-1 b^-1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["excluded"], "a b a^-1 b^-1");
}

#[test]
fn ex1_commands() {
    let (code, out, _) = call(&["ex1-elem", "5"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["m"], "16");
    assert_eq!(v["s_element"], "a^120 b^16");

    let (code, out, _) = call(&["ex1-separate", "--word", "b"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["modulus"], 2);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tail.json");
    std::fs::write(&path, &out).unwrap();
    assert_eq!(call(&["ex1-verify", path.to_str().unwrap()]).0, EXIT_OK);
    let bad = out.replace("\"head_bound\": 2", "\"head_bound\": 1");
    std::fs::write(&path, bad).unwrap();
    assert_eq!(
        call(&["ex1-verify", path.to_str().unwrap()]).0,
        EXIT_VERIFY_FAILED
    );

    assert_eq!(
        call(&["ex1-separate", "--word", "a^6 b^4"]).0,
        EXIT_VERIFY_FAILED
    );
    assert_eq!(
        call(&["--k", "2", "ex1-separate", "--word", "b"]).0,
        EXIT_USAGE
    );

    let (code, out, _) = call(&[
        "ex1-witness",
        "--quotient",
        r#"{"kind":"abelian","modulus":4}"#,
    ]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(
        (v["k"].as_u64(), v["cofactor"].as_str()),
        (Some(4), Some("b^-4"))
    );
}

#[test]
fn ex2_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ex2.json");
    let (code, out, _) = call(&["ex2-construct", "--steps", "2", "--cap", "100000"]);
    assert_eq!(code, EXIT_OK);
    std::fs::write(&path, &out).unwrap();
    let p = path.to_str().unwrap();

    let (code, rep, _) = call(&["ex2-verify", p]);
    assert_eq!(code, EXIT_OK, "{rep}");

    let (code, w, _) = call(&["ex2-witness", p, "--n", "2", "--kind", "discreteness"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&w)["members"], serde_json::json!([2]));
    let (code, w, _) = call(&["ex2-witness", p, "--n", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(!json(&w)["v"].as_str().unwrap().is_empty());
    let (code, w, _) = call(&[
        "ex2-witness",
        p,
        "--n",
        "1",
        "--kind",
        "intersection",
        "--word",
        "a c",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&w)["distance_bounded"], true);
    let (code, dot, _) = call(&["ex2-witness", p, "--n", "1", "--dot"]);
    assert_eq!(code, EXIT_OK);
    assert!(dot.starts_with("digraph ball_1 {"));
    assert_eq!(call(&["ex2-witness", p, "--n", "3"]).0, EXIT_USAGE);

    let v = json(&out);
    let f2 = v["steps"][1]["f_value"].as_u64().unwrap();
    let bad = out.replacen(
        &format!("\"f_value\": {f2}"),
        &format!("\"f_value\": {}", f2 + 7),
        1,
    );
    std::fs::write(&path, bad).unwrap();
    let (code, rep, _) = call(&["ex2-verify", p]);
    assert_eq!(code, EXIT_VERIFY_FAILED);
    assert_eq!(json(&rep)["pass"], false);

    std::fs::write(&path, out.replace("\"steps\":", "\"stepz\":")).unwrap();
    let (code, _, err) = call(&["ex2-verify", p]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("stepz") || err.contains("steps"), "{err}");
}

#[test]
fn ex2_parameter_errors() {
    assert_eq!(
        call(&["ex2-construct", "--steps", "2", "--f", "3,3"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        call(&["ex2-construct", "--steps", "2", "--f", "3,x"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        call(&["ex2-construct", "--steps", "1", "--f", "40"]).0,
        EXIT_CAP
    );
}

#[test]
fn deterministic_output() {
    let a = call(&[
        "ex2-construct",
        "--steps",
        "2",
        "--seed",
        "3",
        "--cap",
        "100000",
    ]);
    let b = call(&[
        "ex2-construct",
        "--steps",
        "2",
        "--seed",
        "3",
        "--cap",
        "100000",
    ]);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a.1, b.1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_profree");
    let out = Command::new(bin)
        .args(["reduce", "b b^-1 a"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "a\n");
    let out = Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
