use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_wordassoc");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Copies a fixture directory into a fresh temp dir.
fn workspace(name: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(fixture(name)).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
        }
    }
    dir
}

fn wordassoc(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Every file under `root` (relative path -> bytes), skipping the cache.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                if path.file_name().unwrap() != "cache" {
                    walk(root, &path, out);
                }
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_owned(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn run_toy(ws: &Path, extra: &[&str]) -> Output {
    let cfg = ws.join("run.toml");
    let mut args = vec!["run", "--config", p(&cfg)];
    args.extend_from_slice(extra);
    wordassoc(&args)
}

#[test]
fn toy_run_writes_every_declared_artifact() {
    let ws = workspace("toy");
    let out = run_toy(ws.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files = tree(&ws.path().join("out"));
    for name in [
        "network.tsv",
        "network_stats.json",
        "gender/matrix_raw.tsv",
        "gender/matrix_raw.json",
        "gender/matrix_l2_col_row.tsv",
        "gender/report_l2.json",
        "gender/heatmap_l2.csv",
        "religion/report_l2.json",
        "religion/coefficients_l2.csv",
        "politics/report_l1.json",
        "politics/report_l2.json",
        "streams/woman--gentle.dot",
        "streams/woman--gentle.json",
    ] {
        assert!(files.contains_key(Path::new(name)), "missing {name}");
    }
    assert!(!ws.path().join("out/.lock").exists());
    assert!(!ws.path().join("out/.staging").exists());

    let sidecar = String::from_utf8(files[Path::new("gender/matrix_raw.json")].clone()).unwrap();
    assert!(sidecar.contains("\"steps_source\": \"2x_diameter\""));
}

#[test]
fn rerun_with_cache_is_byte_identical() {
    let ws = workspace("toy");
    assert!(run_toy(ws.path(), &[]).status.success());
    let first = tree(&ws.path().join("out"));
    assert!(ws.path().join("out/cache").read_dir().unwrap().count() > 0);
    assert!(run_toy(ws.path(), &[]).status.success());
    assert_eq!(tree(&ws.path().join("out")), first);

    let other = tempfile::tempdir().unwrap();
    assert!(run_toy(ws.path(), &["--no-cache", "--out", p(other.path())]).status.success());
    assert_eq!(tree(other.path()), first);
    assert!(!other.path().join("cache").exists());
}

#[test]
fn stages_match_the_full_run() {
    let ws = workspace("toy");
    let w = ws.path();
    assert!(run_toy(w, &[]).status.success());
    let full = tree(&w.join("out"));
    let slice = |prefix: &str| -> BTreeMap<PathBuf, Vec<u8>> {
        full.iter()
            .filter_map(|(k, v)| Some((k.strip_prefix(prefix).ok()?.to_owned(), v.clone())))
            .filter(|(k, _)| k.components().count() == 1)
            .collect()
    };

    let build = w.join("build");
    let out = wordassoc(&[
        "build",
        "--norms",
        p(&w.join("norms.tsv")),
        "--vocabulary",
        p(&w.join("vocabulary.txt")),
        "--out",
        p(&build),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(build.join("network.tsv")).unwrap(), full[Path::new("network.tsv")]);
    let network = build.join("network.tsv");

    let stats = w.join("stats");
    assert!(wordassoc(&["stats", "--network", p(&network), "--out", p(&stats)]).status.success());
    assert_eq!(fs::read(stats.join("network_stats.json")).unwrap(), full[Path::new("network_stats.json")]);

    for (identity, extra) in [
        ("gender", vec![]),
        ("religion", vec!["--valence".to_string(), p(&w.join("valence.tsv")).to_string()]),
        ("politics", vec!["--emotions".to_string(), p(&w.join("nrc.tsv")).to_string(), "--norm".into(), "l2".into()]),
    ] {
        let spec = w.join(format!("{identity}.toml"));
        let spread = w.join(format!("spread-{identity}"));
        let out = wordassoc(&["spread", "--network", p(&network), "--spec", p(&spec), "--out", p(&spread)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

        let bias = w.join(format!("bias-{identity}"));
        let matrix = spread.join("matrix_raw.tsv");
        let mut args = vec!["bias", "--matrix", p(&matrix), "--spec", p(&spec), "--out", p(&bias)];
        args.extend(extra.iter().map(String::as_str));
        let out = wordassoc(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

        let mut staged = tree(&spread);
        staged.extend(tree(&bias));
        let expected: BTreeMap<_, _> = slice(identity)
            .into_iter()
            .filter(|(k, _)| staged.contains_key(k))
            .collect();
        assert!(expected.len() >= 5, "{identity}: {:?}", expected.keys());
        assert_eq!(staged, expected, "{identity}");
    }

    let streams = w.join("streams");
    let out = wordassoc(&[
        "stream",
        "--network",
        p(&network),
        "--prime",
        "woman",
        "--target",
        "forceful",
        "--valence",
        p(&w.join("valence.tsv")),
        "--out",
        p(&streams),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(tree(&streams), {
        let s = slice("streams");
        s.into_iter().filter(|(k, _)| k.to_str().unwrap().starts_with("woman--forceful")).collect()
    });
}

#[test]
fn missing_prime_fails_in_the_spread_stage_without_partial_output() {
    let ws = workspace("toy");
    fs::write(
        ws.path().join("gender.toml"),
        "identity = \"gender\"\napproach = \"stereotypes\"\nprime_pairs = [[\"woman\", \"wizard\"]]\n\
         [targets]\nfemale = [\"gentle\"]\nmale = [\"strong\"]\n",
    )
    .unwrap();
    let out = run_toy(ws.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("[spread] missing prime: wizard"), "{stderr}");
    let out_dir = ws.path().join("out");
    assert!(!out_dir.join("network.tsv").exists());
    assert!(!out_dir.join(".lock").exists());
}

#[test]
fn exit_codes() {
    let ws = workspace("toy");
    // Config error: bad override.
    assert_eq!(run_toy(ws.path(), &["--retention", "1.5"]).status.code(), Some(2));
    // Config error: missing input file.
    fs::remove_file(ws.path().join("nrc.tsv")).unwrap();
    assert_eq!(run_toy(ws.path(), &[]).status.code(), Some(2));

    // Data error: malformed norms line.
    let ws = workspace("toy");
    fs::write(ws.path().join("norms.tsv"), "dog\tcat\n").unwrap();
    let out = run_toy(ws.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn held_lock_blocks_a_second_run() {
    let ws = workspace("toy");
    fs::create_dir_all(ws.path().join("out")).unwrap();
    fs::write(ws.path().join("out/.lock"), "").unwrap();
    let out = run_toy(ws.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("locked"));
}

#[test]
fn explicit_steps_are_recorded() {
    let ws = workspace("toy");
    let network = ws.path().join("n");
    assert!(wordassoc(&["build", "--norms", p(&ws.path().join("norms.tsv")), "--out", p(&network)])
        .status
        .success());
    let spread = ws.path().join("s");
    let out = wordassoc(&[
        "spread",
        "--network",
        p(&network.join("network.tsv")),
        "--spec",
        p(&ws.path().join("gender.toml")),
        "--retention",
        "0.5",
        "--steps",
        "7",
        "--out",
        p(&spread),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = fs::read_to_string(spread.join("matrix_raw.json")).unwrap();
    assert!(meta.contains("\"steps\": 7") && meta.contains("\"steps_source\": \"override\""), "{meta}");
}
