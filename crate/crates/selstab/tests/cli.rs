use selstab::cli::main_with_args;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("selstab").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn density_reports_closed_form() {
    let v = json(&["density", "--curve", "0,0,0,1,1", "--ell", "5", "--bound", "20000"]);
    assert_eq!(v["density"]["theoretical"], "19/96");
    assert_eq!(v["sigma"], serde_json::json!([2, 5, 31]));
    assert_eq!(v["surjectivity"]["verdict"], "NoObstruction");
}

#[test]
fn field_commands() {
    let (code, out, _) = run(&["field", "disc", "--desc", "ell=5; gen: 11^1"]);
    assert_eq!((code, out.trim()), (0, "14641"));
    let v = json(&["--json", "field", "disc", "--desc", "ell=5; gen: 11^1*31^1", "--check"]);
    assert_eq!(v["discriminant"], v["by_enumeration"]);
    let (_, out, _) = run(&["field", "split", "--desc", "ell=5; gen: 11^1", "--r", "2,23,67"]);
    assert_eq!(out, "r,splits\n2,false\n23,true\n67,true\n");
    let v = json(&["field", "scholz", "--desc", "ell=5; gen: 11^1", "--N", "1"]);
    assert_eq!(v["holds"], true);
    let v = json(&["field", "info", "--desc", "ell=5; gen: 11^1*31^1"]);
    assert_eq!(v["degree"], 5);
}

#[test]
fn selmer_commands() {
    let v = json(&["selmer", "wiles", "--ell", "5", "--S", "11,41,61", "--curve", "0,0,0,1,1"]);
    assert_eq!(v["identity_holds"], true);
    assert_eq!(v["Z"], serde_json::json!([2, 5, 31]));
    let v = json(&["selmer", "find-s0", "--curve", "0,0,0,1,1", "--ell", "5"]);
    assert_eq!(v["result"]["s0"], serde_json::json!([11, 71, 131]));
    let v = json(&["selmer", "enumerate-wt", "--ell", "5", "--S", "11,71,131", "--Z", "2,31", "--T", "151"]);
    assert_eq!(v["count"], 4);
    let v = json(&[
        "selmer", "certify", "--curve", "0,0,0,1,1", "--ell", "5", "--desc", "ell=5; gen: 11^1",
        "--assert-selmer-zero",
    ]);
    assert_eq!(v["hypotheses"]["selmer_zero_over_q"], true);
    assert_eq!(v["certificate"]["verdict"]["status"], "rejected");
}

#[test]
fn count_commands() {
    let v = json(&["count", "partial", "--ell", "5", "--pool", "11,31", "--X", "350,1"]);
    assert_eq!(v["values"][0]["S"], "25");
    assert_eq!(v["values"][1]["S"], "1");
    let v = json(&["count", "m", "--ell", "5", "--pool", "11,31", "--X", "341^4"]);
    assert_eq!(v["reports"][0]["value"], 25);
    assert_eq!(v["reports"][0]["exponent_target"], "1/4");
    let v = json(&["count", "m", "--ell", "5", "--pool", "11,31", "--X", "1e30", "--n", "2"]);
    assert!(v["warning"].is_string());

    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let (code, out, err) = run(&[
        "count", "table", "--ell", "5", "--curve", "0,0,0,1,1", "--pool-bound", "2000", "--from-exp", "6",
        "--to-exp", "14",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("X,product_bound,S,M_lower\n1000000,31,"));
    std::fs::write(&table, out).unwrap();
    let v = json(&["count", "fit", "--input", table.to_str().unwrap(), "--ell", "5"]);
    assert!(v["fit"]["a"].is_number());
    assert_eq!(v["target_a"], "1/4");
}

#[test]
fn group_commands() {
    let v = json(&["group", "h2", "--table", "heisenberg:3", "--ell", "3"]);
    assert_eq!(v["h2_dim"], 4);
    let v = json(&["group", "extension-class", "--table", "cyclic:5^2", "--ell", "5"]);
    assert_eq!(v["split"], false);
    let v = json(&["group", "extension-class", "--table", "elementary:5^2", "--ell", "5"]);
    assert_eq!(v["split"], true);
    let v = json(&["group", "filtration", "--table", "heisenberg:5", "--ell", "5"]);
    assert_eq!(v["verified"], true);
    let v = json(&["group", "malle-invariant", "--table", "heisenberg:5"]);
    assert_eq!(v["a"], "1/100");
}

#[test]
fn errors_are_structured() {
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"]["kind"], "usage");

    let (code, _, err) = run(&["field", "disc", "--desc", "ell=5; gen: 12^1"]);
    assert_ne!(code, 0);
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert!(v["error"]["message"].as_str().unwrap().contains("12"));

    let (code, _, err) = run(&["density", "--curve", "0,0,0,1,1", "--ell", "3", "--bound", "100"]);
    assert_eq!(code, 2, "{err}");

    // S and Z overlap
    let (code, _, err) = run(&["selmer", "wiles", "--ell", "5", "--S", "11,31,41", "--Z", "5,2,31"]);
    assert_eq!(code, 1);
    assert!(err.contains("invalid-input"));
}

#[test]
fn cached_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["--cache-dir", d, "sieve", "--curve", "0,-1,1,-10,-20", "--ell", "5", "--bound", "3000"];
    let (c1, first, _) = run(&args);
    let (c2, second, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(first, second);
    let cached = std::fs::read_to_string(dir.path().join("0.-1.1.-10.-20.ap")).unwrap();
    assert!(cached.lines().all(|l| l.split(',').count() == 2));
    let (_, ap, _) = run(&["--cache-dir", d, "ap", "--curve", "0,-1,1,-10,-20", "--bound", "13"]);
    assert_eq!(ap, "p,a_p,good\n2,-2,true\n3,-1,true\n5,1,true\n7,-2,true\n11,,false\n13,4,true\n");
}

#[test]
fn curve_list_density() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("curves.csv");
    std::fs::write(&list, "label,a1,a2,a3,a4,a6\nE,0,0,0,1,1\n37a1,0,0,1,-1,0\n").unwrap();
    let v = json(&["density", "--curves", list.to_str().unwrap(), "--ell", "5", "--bound", "5000"]);
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["label"], "37a1");
}
