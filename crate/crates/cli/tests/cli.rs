use std::path::PathBuf;
use std::process::Command;

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "corpus", &format!("{name}.aut")].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_semiorbit")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap().trim_end().to_string())
}

fn ok(args: &[&str]) -> String {
    let (code, out) = run(args);
    assert_eq!(code, 0, "{args:?}: {out}");
    out
}

/// Frozen `finite` and `activity` outputs for every bundled file.
const FROZEN: &[(&str, &str, &str)] = &[
    (
        "adding_machine",
        r#"{"command":"finite","schema":1,"verdict":"infinite","witness":{"loop":"0","stem":"0"}}"#,
        r#"{"bounded":true,"class":"polynomial","command":"activity","counts":[1,1,1,1,1,1,1,1,1],"degree":0,"schema":1,"sup_count":1}"#,
    ),
    (
        "u1",
        r#"{"command":"finite","order":2,"schema":1,"verdict":"finite"}"#,
        r#"{"bounded":true,"class":"finite","command":"activity","counts":[0,0,0,0,0,0,0,0,0],"degree":null,"schema":1,"sup_count":0}"#,
    ),
    (
        "combined",
        r#"{"command":"finite","schema":1,"verdict":"infinite","witness":{"loop":"0","stem":"0"}}"#,
        r#"{"bounded":true,"class":"polynomial","command":"activity","counts":[1,1,1,1,1,1,1,1,1],"degree":0,"schema":1,"sup_count":1}"#,
    ),
    (
        "identity",
        r#"{"command":"finite","order":1,"schema":1,"verdict":"finite"}"#,
        r#"{"bounded":true,"class":"finite","command":"activity","counts":[0,0,0,0,0,0,0,0,0],"degree":null,"schema":1,"sup_count":0}"#,
    ),
    (
        "random1",
        r#"{"command":"finite","schema":1,"verdict":"infinite","witness":{"loop":"0","stem":"0"}}"#,
        r#"{"bounded":true,"class":"polynomial","command":"activity","counts":[1,1,1,1,1,1,1,1,1],"degree":0,"schema":1,"sup_count":1}"#,
    ),
    (
        "random2",
        r#"{"command":"finite","order":6,"schema":1,"verdict":"finite"}"#,
        r#"{"bounded":true,"class":"polynomial","command":"activity","counts":[1,1,1,1,1,1,1,1,1],"degree":0,"schema":1,"sup_count":1}"#,
    ),
    (
        "random3",
        r#"{"command":"finite","order":4,"schema":1,"verdict":"finite"}"#,
        r#"{"bounded":true,"class":"polynomial","command":"activity","counts":[1,1,1,1,1,1,1,1,1],"degree":0,"schema":1,"sup_count":1}"#,
    ),
    (
        "random4",
        r#"{"command":"finite","schema":1,"verdict":"infinite","witness":{"loop":"0","stem":"00"}}"#,
        r#"{"bounded":true,"class":"polynomial","command":"activity","counts":[1,1,1,1,1,1,1,1,1],"degree":0,"schema":1,"sup_count":1}"#,
    ),
    (
        "random5",
        r#"{"command":"finite","order":4,"schema":1,"verdict":"finite"}"#,
        r#"{"bounded":true,"class":"finite","command":"activity","counts":[0,0,0,0,0,0,0,0,0],"degree":null,"schema":1,"sup_count":0}"#,
    ),
];

#[test]
fn frozen_corpus_outputs() {
    for &(name, finite, activity) in FROZEN {
        let path = corpus(name);
        assert_eq!(ok(&["finite", &path]), finite, "{name}");
        assert_eq!(ok(&["activity", &path]), activity, "{name}");
        assert_eq!(ok(&["finite", &format!("corpus:{name}")]), finite, "{name}");
    }
}

#[test]
fn output_is_deterministic() {
    let path = corpus("combined");
    for cmd in ["buchi", "torsion", "witness", "closed"] {
        assert_eq!(ok(&[cmd, &path]), ok(&[cmd, &path]));
    }
}

#[test]
fn subsemigroups() {
    let am = corpus("adding_machine");
    assert!(ok(&["sub-finite", &am, "--gens", "q"]).contains(r#""verdict":"infinite""#));
    assert!(ok(&["sub-finite", &am, "--gens", "e"]).contains(r#""order":1,"schema":1,"verdict":"finite""#));
    assert!(ok(&["sub-finite", &corpus("combined"), "--gens", "z"]).contains(r#""verdict":"finite""#));
    assert_eq!(run(&["sub-finite", &am, "--gens", "x"]).0, 1);
}

#[test]
fn torsion_reports() {
    assert_eq!(
        ok(&["torsion", &corpus("adding_machine")]),
        r#"{"command":"torsion","has_element_without_torsion":true,"has_torsion_element":false,"schema":1,"torsion_free":true}"#
    );
    assert!(ok(&["torsion", &corpus("identity")]).contains(r#""has_torsion_element":true"#));
}

#[test]
fn exit_codes() {
    let am = corpus("adding_machine");
    assert_eq!(run(&["finite", "/nonexistent/file.aut"]).0, 1);
    assert_eq!(run(&["finite", "corpus:nothing"]).0, 1);
    let (code, out) = run(&["finite", &corpus("combined"), "--S", "{e}"]);
    assert_eq!(code, 2);
    assert!(out.contains(r#""kind":"precondition""#));
    assert_eq!(run(&["finite", &am, "--R", "(q|e)*q"]).0, 2);
    assert_eq!(run(&["finite", &am, "--S", "{q}"]).0, 2);
    assert_eq!(run(&["finite", &am, "--S", "{q,e}", "--cap", "5"]).0, 2);
    assert_eq!(run(&["orbit", &am, "--word", "2"]).0, 1);
}

#[test]
fn overrides_and_languages() {
    let am = corpus("adding_machine");
    assert!(ok(&["finite", &am, "--R", "e*"]).contains(r#""order":1"#));
    assert!(ok(&["orbit", &am, "--word", "010", "--R", "q*"]).contains(r#""orbit_size":8"#));
    assert!(ok(&["orbit", &am, "--word", "010", "--R", "e*"]).contains(r#""orbit":["010"]"#));
    assert!(ok(&["finite", &corpus("combined"), "--S", "{e,z}", "--R", "Q*"]).contains("infinite"));
}

#[test]
fn acceptor_files_resolve_relative_to_the_instance() {
    let dir = std::env::temp_dir().join(format!("semiorbit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text = std::fs::read_to_string(corpus("adding_machine")).unwrap().replace("R = Q*", "R = @only_e.dfa");
    std::fs::write(dir.join("inst.aut"), text).unwrap();
    std::fs::write(dir.join("only_e.dfa"), "initial: c\naccepting: c\nc e -> c\n").unwrap();
    let inst = dir.join("inst.aut");
    let out = ok(&["finite", inst.to_str().unwrap()]);
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(out.contains(r#""order":1"#), "{out}");
}

#[test]
fn text_and_dot_output() {
    let am = corpus("adding_machine");
    let text = ok(&["finite", &am, "--text"]);
    assert!(text.lines().any(|l| l == "verdict: infinite"));
    assert!(ok(&["dot", &am]).starts_with("digraph automaton"));
    assert!(ok(&["dot", &am, "--word", "01"]).starts_with("digraph product"));
    assert!(ok(&["dot", &am, "--word", "01", "--nfra"]).starts_with("digraph nfra"));
    let path = std::env::temp_dir().join(format!("semiorbit-buchi-{}.dot", std::process::id()));
    ok(&["buchi", &am, "--dot", path.to_str().unwrap()]);
    let dot = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(dot.starts_with("digraph buchi"));
}

#[test]
fn witness_orbit_sizes_grow() {
    let out = ok(&["witness", &corpus("adding_machine")]);
    assert!(out.contains(r#""orbit_sizes":[2,4,8,16,32]"#), "{out}");
}
