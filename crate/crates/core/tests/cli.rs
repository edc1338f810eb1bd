use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn miniweb() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/miniweb")
}

fn ctms(args: &[&std::ffi::OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctms"))
        .args(args)
        .output()
        .unwrap()
}

fn mine(dir: &Path, seed: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join("report.json");
    let mut args: Vec<&std::ffi::OsStr> = vec!["mine".as_ref(), seed.as_ref()];
    let corpus = miniweb();
    let config = miniweb().join("config.toml");
    args.extend([
        "--corpus".as_ref(),
        corpus.as_os_str(),
        "--config".as_ref(),
        config.as_os_str(),
    ]);
    args.extend(["--out".as_ref(), out.as_os_str()]);
    args.extend(extra.iter().map(std::ffi::OsStr::new));
    (ctms(&args), out)
}

#[test]
fn mine_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("lists.jsonl");
    let (o, report) = mine(
        dir.path(),
        "华盛顿",
        &["--dump-weblists", dump.to_str().unwrap()],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&dump)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.len() >= 21);
    assert!(lines
        .iter()
        .all(|l| l["terms"].as_array().is_some_and(|t| !t.is_empty())));

    let table_path = dir.path().join("table.txt");
    let gold = miniweb().join("gold.json");
    let e = ctms(&[
        "eval".as_ref(),
        "--report".as_ref(),
        report.as_os_str(),
        "--gold".as_ref(),
        gold.as_os_str(),
        "--out".as_ref(),
        table_path.as_os_str(),
    ]);
    assert_eq!(e.status.code(), Some(0));
    let stdout = String::from_utf8(e.stdout).unwrap();
    assert_eq!(stdout, std::fs::read_to_string(&table_path).unwrap());
    let mut lines = stdout.lines();
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(
        header,
        [
            "Seed",
            "P@5",
            "P@10",
            "AP",
            "AAP",
            "IAAP",
            "Purity",
            "InvPurity",
            "F"
        ]
    );
    let values: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(values[0], "华盛顿");
    assert!(values[1..].iter().all(|v| v.parse::<f64>().is_ok()));
}

#[test]
fn unknown_seed_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let (o, report) = mine(dir.path(), "不存在的词", &[]);
    assert_eq!(o.status.code(), Some(1));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["diagnostics"]["stage_failure"], "no initial candidates");
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "[concept]\nthreshold = 2.0\n").unwrap();
    let out = dir.path().join("r.json");
    let corpus = miniweb();
    let o = ctms(&[
        "mine".as_ref(),
        "华盛顿".as_ref(),
        "--corpus".as_ref(),
        corpus.as_os_str(),
        "--config".as_ref(),
        config.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn eval_seed_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (_, report) = mine(dir.path(), "华盛顿", &[]);
    let gold = dir.path().join("gold.json");
    std::fs::write(
        &gold,
        r#"{"seed": "林肯", "concepts": [{"name": "x", "terms": ["a"]}]}"#,
    )
    .unwrap();
    let o = ctms(&[
        "eval".as_ref(),
        "--report".as_ref(),
        report.as_os_str(),
        "--gold".as_ref(),
        gold.as_os_str(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fixture_validate() {
    let corpus = miniweb();
    let o = ctms(&["fixture-validate".as_ref(), corpus.as_os_str()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok:"));

    let dir = tempfile::tempdir().unwrap();
    let o = ctms(&[
        "fixture-validate".as_ref(),
        dir.path().join("missing").as_os_str(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
