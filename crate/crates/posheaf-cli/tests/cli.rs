//! End-to-end tests of the `posheaf` binary: documents in, reports out, exit
//! codes as documented. Fixtures are generated through the library and
//! written to a temp directory.

use posheaf::derham::GridRegion;
use posheaf::docs;
use posheaf::poset::{FinPoset, MonotoneMap};
use posheaf::sheaf::PosetRep;
use posheaf::simplicial::AlmostSimplicialComplex;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_posheaf"))
}

fn write_doc(dir: &Path, name: &str, doc: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, docs::to_canonical_string(doc)).unwrap();
    path
}

fn run_ok(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn circle_poset() -> FinPoset {
    AlmostSimplicialComplex::from_named(
        &["a", "b", "c"],
        &[&["a", "b"], &["b", "c"], &["a", "c"]],
    )
    .unwrap()
    .simplicial_closure()
    .face_poset()
    .unwrap()
}

#[test]
fn homology_of_pushforward_to_a_point_reports_circle_betti() {
    let dir = tempfile::tempdir().unwrap();
    let p = circle_poset();
    let sheaf = write_doc(
        dir.path(),
        "const.json",
        &docs::representation_to_doc(&PosetRep::constant_unit(p.clone())),
    );
    let to_point = MonotoneMap::constant(p, FinPoset::singleton("pt"), 0).unwrap();
    let map = write_doc(dir.path(), "to-point.json", &docs::monotone_map_to_doc(&to_point));
    let out = bin().args(["homology", "--sheaf"]).arg(&sheaf).arg("--map").arg(&map).output().unwrap();
    let report = run_ok(&out);
    assert_eq!(report["homology"]["pt"]["0"], 1);
    assert_eq!(report["homology"]["pt"]["1"], 1);
}

#[test]
fn pushforward_output_is_deterministic_and_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let p = circle_poset();
    let sheaf = write_doc(
        dir.path(),
        "const.json",
        &docs::representation_to_doc(&PosetRep::constant_unit(p.clone())),
    );
    let to_point = MonotoneMap::constant(p, FinPoset::singleton("pt"), 0).unwrap();
    let map = write_doc(dir.path(), "to-point.json", &docs::monotone_map_to_doc(&to_point));
    let run = || {
        bin()
            .args(["pushforward", "--sheaf"])
            .arg(&sheaf)
            .arg("--map")
            .arg(&map)
            .output()
            .unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first.stdout, second.stdout, "outputs differ between runs");
    let report = run_ok(&first);
    docs::representation_from_doc(&report["representation"], "$.representation").unwrap();
}

#[test]
fn resolve_checks_pass_on_an_indicator_sheaf() {
    let dir = tempfile::tempdir().unwrap();
    let x = FinPoset::chain(3);
    let f = PosetRep::indicator(x, &[1, 2]).unwrap();
    let sheaf = write_doc(dir.path(), "ind.json", &docs::representation_to_doc(&f));
    let report = run_ok(&bin().args(["resolve", "--sheaf"]).arg(&sheaf).output().unwrap());
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|c| c["pass"] == Value::Bool(true)));
    docs::pseudo_free_from_doc(&report["resolution"], "$.resolution").unwrap();
}

#[test]
fn refine_repairs_the_sign_stratification_example() {
    let dir = tempfile::tempdir().unwrap();
    let x = FinPoset::from_covers(
        vec!["z".into(), "u-".into(), "u+".into()],
        &[("z".into(), "u-".into()), ("z".into(), "u+".into())],
    )
    .unwrap();
    let space = write_doc(dir.path(), "line3.json", &docs::poset_to_doc(&x));
    let sets = write_doc(dir.path(), "signs.json", &serde_json::json!([["u+"]]));
    let out = bin()
        .args(["refine", "--space"])
        .arg(&space)
        .arg("--sets")
        .arg(&sets)
        .output()
        .unwrap();
    let report = run_ok(&out);
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["name"] == "stratification is proper" && c["pass"] == Value::Bool(true)));
    let strata = report["stratification"]["strata"]["elements"].as_array().unwrap();
    assert_eq!(strata.len(), 3, "sign example refines into singleton strata");
}

#[test]
fn certify_closed_image_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let x = FinPoset::chain(2);
    let m = posheaf::cosheaf::CombinatorialMap::new(
        x,
        vec![vec![1]],
        vec![vec![0, 1]],
        posheaf::linalg::RatMatrix::from_ints(&[&[1]]),
    )
    .unwrap();
    let map = write_doc(dir.path(), "map.json", &docs::combinatorial_map_to_doc(&m));
    let report =
        run_ok(&bin().args(["certify-closed-image", "--map"]).arg(&map).output().unwrap());
    assert_eq!(report["checks"][0]["name"], "certificate verifies");
    assert_eq!(report["checks"][0]["pass"], Value::Bool(true));
    docs::certificate_from_doc(&report["certificate"], m.space(), "$.certificate").unwrap();
}

#[test]
fn derham_verify_passes_at_default_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let region = write_doc(
        dir.path(),
        "line.json",
        &docs::region_to_doc(&GridRegion::full_line(10.0, 4001)),
    );
    let report =
        run_ok(&bin().args(["derham-verify", "--region"]).arg(&region).output().unwrap());
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|c| c["pass"] == Value::Bool(true)));
    assert!(checks.iter().all(|c| c["max_error"].is_number()));
    assert_eq!(report["decay_proxy"], 1e-12);
}

#[test]
fn derham_verify_reports_failure_on_a_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    let region = write_doc(
        dir.path(),
        "coarse.json",
        &docs::region_to_doc(&GridRegion::full_line(10.0, 201)),
    );
    let out = bin().args(["derham-verify", "--region"]).arg(&region).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "failed checks exit with 1");
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["pass"] == Value::Bool(false)));
}

#[test]
fn malformed_documents_exit_with_2_and_a_located_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"elements\": [\"a\"], \"covers\": [[\"a\"]]}").unwrap();
    let out = bin().args(["refine", "--space"]).arg(&path).arg("--sets").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("$.covers[0]"), "diagnostic names the path: {stderr}");

    let missing = bin().args(["resolve", "--sheaf"]).arg(dir.path().join("nope.json")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn selftest_prints_the_table_and_passes() {
    let out = bin().args(["selftest", "--seed", "0"]).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for i in 1..=9 {
        assert!(
            stdout.contains(&format!("criterion {i} (")),
            "missing criterion {i} in:\n{stdout}"
        );
    }
    assert!(!stdout.contains("FAIL"), "table reports a failure:\n{stdout}");
}
