//! End-to-end tests driving the `oligo` binary as a subprocess.

use std::process::{Command, Output};

use serde_json::Value;

use oligo_core::blocksys::SetPartition;
use oligo_core::decorated::{self, DecoratedGroup, Decoration, HHKind};
use oligo_core::oracle;
use oligo_core::perm::{induced_action, FiniteGroup, Permutation};

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_oligo"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn parsed(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn profile_example() {
    let v = parsed(&run(&["profile", "rep(Sinf, S(2))", "--n", "5"]));
    assert_eq!(v["profile"], serde_json::json!([1, 1, 2, 2, 3, 3]));
}

#[test]
fn series_example() {
    let v = parsed(&run(&["series", "wr(C(2))"]));
    assert_eq!(v["numerator"], serde_json::json!([1]));
    let mut degs: Vec<u64> = v["denominator_degrees"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    degs.sort_unstable();
    assert_eq!(degs, vec![1, 2]);
    assert!(v["reduced"].is_object());
}

#[test]
fn dimension_example() {
    let v = parsed(&run(&["dimension", "wr(C(4), outer=C(3))"]));
    assert_eq!(v["dimension"], serde_json::json!(15));
}

#[test]
fn blocks_example() {
    let v = parsed(&run(&["blocks", "(0 1 2 3)"]));
    assert_eq!(v["degree"], serde_json::json!(4));
    assert_eq!(v["systems"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_example() {
    let out = run(&["verify", "hybrid(S(2), Id(2))", "--k", "6", "--n", "6"]);
    let v = parsed(&out);
    assert_eq!(v["match"], serde_json::json!(true));
    assert_eq!(v["k"], serde_json::json!(6));
    assert_eq!(v["n"], serde_json::json!(6));
    assert_eq!(v["series_prefix"], v["oracle_prefix"]);
}

#[test]
fn validate_accepts_catalog_expressions() {
    for expr in [
        "wr(C(2))",
        "wr(C(4))",
        "wr(Group(\"(0 1)\", \"(2 3)\"))",
        "hybrid(S(2), Id(2))",
        "hybrid(C(4), Group(\"(0 2)(1 3)\"))",
        "wr(C(4), outer=C(3))",
        "rep(Sinf, S(2))",
        "rep(Sinf, C(3))",
        "rep(AutQ, C(3))",
        "ker(S(2)) x wr(C(2))",
    ] {
        let v = parsed(&run(&["validate", expr]));
        assert_eq!(v["valid"], serde_json::json!(true), "{expr}");
    }
}

#[test]
fn deterministic_output() {
    for args in [
        vec!["series", "rep(Sinf, C(3))"],
        vec!["data", "ker(S(2)) x wr(C(2))"],
        vec!["profile", "wr(C(4), outer=C(3))", "--n", "8"],
        vec!["enumerate", "--max-domain", "3", "--max-order", "6"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?} output varies between runs");
    }
}

#[test]
fn whitespace_insensitive_parsing() {
    let tight = run(&["data", "hybrid(C(4),Group(\"(0 2)(1 3)\"))"]);
    let spaced = run(&["data", "hybrid( C(4) , Group( \"(0 2)(1 3)\" ) )"]);
    assert_eq!(tight.stdout, spaced.stdout);
}

#[test]
fn parse_error_exit_code_and_offset() {
    let out = run(&["series", "wr(C(2)"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte 7"), "stderr was: {err}");

    let out = run(&["series", "frob(3)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degree_cap_exit_code() {
    let out = run_env(
        &["verify", "wr(C(2))", "--k", "6", "--n", "4"],
        &[("OLIGO_MAX_DEGREE", "8")],
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn tower_example() {
    let v = parsed(&run(&["tower", "wr(C(2))", "--k", "4", "--t", "3"]));
    let levels = v["tower"].as_array().unwrap();
    assert_eq!(levels.len(), 4);
    for level in levels {
        assert_eq!(level["order"], serde_json::json!(2));
    }
}

/// Reader for the decorated-group schema the binary emits: decorations
/// are listed once per F-orbit and transported to the other blocks.
fn delta_from_json(v: &Value) -> DecoratedGroup {
    let degree = v["degree"].as_u64().unwrap() as usize;
    let perm = |gv: &Value| {
        let images: Vec<usize> = gv
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap() as usize)
            .collect();
        Permutation::from_images(&images).unwrap()
    };
    let f_gens: Vec<Permutation> = v["F_generators"]
        .as_array()
        .unwrap()
        .iter()
        .map(perm)
        .collect();
    let f = FiniteGroup::new(degree, f_gens).unwrap();
    let blocks: Vec<Vec<usize>> = v["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|bv| {
            bv.as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_u64().unwrap() as usize)
                .collect()
        })
        .collect();
    let partition = SetPartition::new(degree, blocks).unwrap();

    let (action, _) = induced_action(&f, partition.blocks()).unwrap();
    let mut decorations: Vec<Option<Decoration>> = vec![None; partition.block_count()];
    for dv in v["decorations"].as_array().unwrap() {
        let j = dv["block"].as_u64().unwrap() as usize;
        let size = partition.blocks()[j].len();
        let h_gens: Vec<Permutation> = dv["H_generators"]
            .as_array()
            .unwrap()
            .iter()
            .map(perm)
            .collect();
        let deco = Decoration {
            h: FiniteGroup::new(size, h_gens).unwrap(),
            kind: HHKind::from_str_tag(dv["kind"].as_str().unwrap()).unwrap(),
        };
        let orbit = action
            .orbits_points()
            .into_iter()
            .find(|o| o.contains(&j))
            .unwrap();
        for b in orbit {
            decorations[b] =
                Some(decorated::transport_along(&f, &partition, j, b, &deco).unwrap());
        }
    }
    let decorations: Vec<Decoration> = decorations.into_iter().map(Option::unwrap).collect();
    DecoratedGroup::new(f, partition, decorations).unwrap()
}

#[test]
fn recognize_pipeline_round_trip() {
    // serialize a finite truncation, hand it to `recognize`, read the
    // emitted datum back and compare with the original up to isomorphism
    let delta = decorated::hybrid(
        &FiniteGroup::cyclic(4),
        &FiniteGroup::from_cycle_strings(4, &["(0 2)(1 3)"]).unwrap(),
    )
    .unwrap();
    let t = oracle::truncate(&delta, 6).unwrap();
    let group_json = serde_json::json!({
        "degree": t.group.degree(),
        "generators": t.group
            .generators()
            .iter()
            .map(|g| g.images())
            .collect::<Vec<_>>(),
    });
    let dir = std::env::temp_dir().join("oligo-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("truncation.json");
    std::fs::write(&path, serde_json::to_string(&group_json).unwrap()).unwrap();

    let out = run(&["recognize", "--input", path.to_str().unwrap(), "--k", "6"]);
    let recovered = delta_from_json(&parsed(&out));
    assert!(decorated::isomorphic(&recovered, &delta).unwrap().is_some());
}
