use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use phfeat::pipeline::FeatureMatrix;

fn phfeat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phfeat"))
        .args(args)
        .output()
        .expect("spawn phfeat")
}

fn ok(args: &[&str]) -> String {
    let out = phfeat(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    phfeat(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, n: usize, size: usize, slices: usize, seed: u64) -> PathBuf {
    ok(&[
        "synth",
        "--out",
        s(dir),
        "--n",
        &n.to_string(),
        "--size",
        &size.to_string(),
        "--slices",
        &slices.to_string(),
        "--seed",
        &seed.to_string(),
    ]);
    dir.join("manifest.jsonl")
}

fn read_matrix(path: &Path) -> FeatureMatrix {
    FeatureMatrix::read_csv(fs::File::open(path).unwrap()).unwrap()
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn synth_writes_images_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let manifest = synth(&a, 4, 32, 1, 11);
    let text = fs::read_to_string(&manifest).unwrap();
    assert_eq!(text.lines().count(), 4);
    let pgms = tree(&a).iter().filter(|(n, _)| n.ends_with(".pgm")).count();
    assert_eq!(pgms, 4);
    assert_eq!(text.matches("\"holes1\"").count(), 2);
    assert_eq!(text.matches("\"holes2\"").count(), 2);

    let b = tmp.path().join("b");
    synth(&b, 4, 32, 1, 11);
    assert_eq!(tree(&a), tree(&b));
    let c = tmp.path().join("c");
    synth(&c, 4, 32, 1, 12);
    assert_ne!(tree(&a), tree(&c));

    assert_eq!(code(&["synth", "--out", s(&tmp.path().join("d")), "--n", "5"]), 2);
}

#[test]
fn synth_into_unwritable_path_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    assert_eq!(code(&["synth", "--out", s(&blocker.join("sub")), "--n", "2"]), 1);
}

#[test]
fn extract_shapes() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), 4, 32, 5, 3);
    let out = tmp.path().join("f.csv");
    ok(&[
        "extract",
        "--manifest",
        s(&manifest),
        "--combine",
        "concat",
        "--out",
        s(&out),
    ]);
    let m = read_matrix(&out);
    assert_eq!((m.n_rows(), m.n_cols()), (4, 1000));
    assert_eq!(m.columns[0], "d0_bc_000");
    assert_eq!(m.columns[999], "d1_bc_499");
    assert_eq!(m.ids, ["s0000", "s0001", "s0002", "s0003"]);

    ok(&[
        "extract",
        "--manifest",
        s(&manifest),
        "--filtration",
        "rips",
        "--patterns",
        "G4R1,G2R5",
        "--vectorizer",
        "tc",
        "--combine",
        "aggregate",
        "--out",
        s(&out),
    ]);
    assert_eq!(read_matrix(&out).n_cols(), 14);

    ok(&[
        "extract",
        "--manifest",
        s(&manifest),
        "--vectorizer",
        "pl",
        "--levels",
        "3",
        "--gamma",
        "10",
        "--combine",
        "aggregate",
        "--split-seed",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(read_matrix(&out).n_cols(), 60);
}

#[test]
fn extract_usage_and_data_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), 2, 32, 1, 0);
    let out = tmp.path().join("f.csv");
    let m = s(&manifest);
    let o = s(&out);
    assert_eq!(code(&["extract", "--manifest", m, "--vectorizer", "xx", "--out", o]), 2);
    assert_eq!(
        code(&["extract", "--manifest", m, "--filtration", "rips", "--out", o]),
        2
    );
    assert_eq!(code(&["extract", "--manifest", m, "--patterns", "G4R1", "--out", o]), 2);
    assert_eq!(
        code(&[
            "extract",
            "--manifest",
            m,
            "--filtration",
            "rips",
            "--patterns",
            "G8R1",
            "--out",
            o
        ]),
        2
    );

    let missing = tmp.path().join("nope.jsonl");
    assert_eq!(code(&["extract", "--manifest", s(&missing), "--out", o]), 1);

    let text = fs::read_to_string(&manifest).unwrap();
    let uneven = text.replacen(
        "\"images\":[\"s0000.pgm\"]",
        "\"images\":[\"s0000.pgm\",\"s0001.pgm\"]",
        1,
    );
    assert_ne!(uneven, text);
    let uneven_path = tmp.path().join("data/uneven.jsonl");
    fs::write(&uneven_path, uneven).unwrap();
    let out = phfeat(&["extract", "--manifest", s(&uneven_path), "--out", o]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s0001"));

    let gone = text.replace("s0001.pgm", "missing.pgm");
    let gone_path = tmp.path().join("data/gone.jsonl");
    fs::write(&gone_path, gone).unwrap();
    let out = phfeat(&["extract", "--manifest", s(&gone_path), "--out", o]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.pgm"));
}

#[test]
fn experiment_reports_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth(&tmp.path().join("data"), 20, 32, 1, 5);
    let features = tmp.path().join("cubical_bc.csv");
    ok(&["extract", "--manifest", s(&manifest), "--out", s(&features)]);

    let mut reports = Vec::new();
    for name in ["r1.json", "r2.json"] {
        let path = tmp.path().join(name);
        let stdout = ok(&[
            "experiment",
            "--features",
            s(&features),
            "--select",
            "lasso",
            "--seed",
            "4",
            "--out",
            s(&path),
        ]);
        assert!(stdout.contains("| Accuracy | AUC | Recall | Prec. | F1 |"), "{stdout}");
        assert!(stdout.contains("| cubical_bc | Betti Curve | LR |"), "{stdout}");
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let metrics = v["metrics"].as_object().unwrap();
        for key in ["accuracy", "auc", "recall", "precision", "f1"] {
            assert!(metrics[key].is_f64(), "{key}");
        }
        assert!(v["timings_ms"].as_object().unwrap().contains_key("classify"));
        v.as_object_mut().unwrap().remove("timings_ms");
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0]["config"]["seed"], 4);
    assert_eq!(reports[0]["config"]["selection"], "lasso");

    let table = ok(&["table", s(&tmp.path().join("r1.json")), s(&tmp.path().join("r2.json"))]);
    assert_eq!(table.lines().count(), 4);

    let knn = ok(&[
        "experiment",
        "--features",
        s(&features),
        "--classifier",
        "knn",
        "--k",
        "3",
    ]);
    assert!(knn.contains("| KNN |"), "{knn}");
}

#[test]
fn experiment_single_class_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("one.csv");
    fs::write(&path, "id,label,d0_bc_000\na,x,1\nb,x,2\nc,x,3\nd,x,4\n").unwrap();
    assert_eq!(code(&["experiment", "--features", s(&path)]), 3);
    fs::write(&path, "id,label,d0_bc_000\na,x,1\nb,y,oops\n").unwrap();
    assert_eq!(code(&["experiment", "--features", s(&path)]), 3);
}

#[test]
fn oracle_subcommand() {
    assert!(ok(&["oracle", "--check", "cubical", "--trials", "50", "--seed", "2"]).contains("0 mismatches"));
    assert!(ok(&["oracle", "--check", "rips", "--trials", "30"]).contains("0 mismatches"));
    assert!(ok(&["oracle", "--check", "gradients", "--trials", "20"]).contains("0 mismatches"));
    let out = phfeat(&["oracle", "--check", "cubical", "--trials", "50", "--mutate"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("instance seed"));
}
