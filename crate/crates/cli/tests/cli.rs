use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use molforest::featurizer::read_vocabulary;
use molforest::molgraph::parse_smiles;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn molforest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molforest"))
        .args(args)
        .output()
        .expect("spawn molforest")
}

fn ok(args: &[&str]) -> String {
    let out = molforest(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = molforest(args);
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn featurize(dir: &Path, input: &Path, extra: &[&str]) -> (PathBuf, PathBuf) {
    let (f, v) = (dir.join("x.svm"), dir.join("x.voc"));
    let mut args = vec!["featurize", "--input", s(input), "--output", s(&f), "--vocab", s(&v)];
    args.extend_from_slice(extra);
    ok(&args);
    (f, v)
}

fn summary_mean_auroc(path: &Path) -> f64 {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v["mean_auroc"].as_f64().unwrap()
}

#[test]
fn methane_gives_one_feature() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.smi");
    fs::write(&input, "C\n").unwrap();
    let (f, v) = featurize(dir.path(), &input, &["--heights", "0"]);
    assert_eq!(fs::read_to_string(f).unwrap(), "-1 1:1\n");
    assert_eq!(fs::read_to_string(v).unwrap().lines().count(), 1);
}

#[test]
fn featurize_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--heights", "0-2", "--distances", "0-3", "--mode", "pair"];
    let (f, v) = featurize(dir.path(), &fixture("nitro_rule.tsv"), &args);
    let first = (fs::read(&f).unwrap(), fs::read(&v).unwrap());
    featurize(dir.path(), &fixture("nitro_rule.tsv"), &args);
    assert_eq!(first, (fs::read(&f).unwrap(), fs::read(&v).unwrap()));
}

fn hop_distances(adj: &[Vec<usize>], from: usize) -> Vec<Option<u32>> {
    let mut d = vec![None; adj.len()];
    d[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if d[w].is_none() {
                d[w] = Some(d[u].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }
    d
}

#[test]
fn pair_mode_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("golden/three.smi");
    let args = ["--heights", "0-3", "--distances", "0-5", "--mode", "pair"];
    let (f, v) = featurize(dir.path(), &input, &args);
    assert_eq!(fs::read(&f).unwrap(), fs::read(fixture("golden/three.svm")).unwrap());
    assert_eq!(fs::read(&v).unwrap(), fs::read(fixture("golden/three.voc")).unwrap());

    // block totals: d = 0 counts atoms, d > 0 counts atom pairs that far apart
    let vocab = read_vocabulary(fs::read_to_string(&v).unwrap().as_bytes()).unwrap();
    let rows = fs::read_to_string(&f).unwrap();
    for (line, smiles_line) in rows.lines().zip(fs::read_to_string(&input).unwrap().lines()) {
        let g = parse_smiles(smiles_line.split('\t').next().unwrap()).unwrap();
        let n = g.node_count();
        let mut adj = vec![Vec::new(); n];
        for b in g.bonds() {
            adj[b.a].push(b.b);
            adj[b.b].push(b.a);
        }
        let mut expected: BTreeMap<u32, u64> = BTreeMap::new();
        expected.insert(0, n as u64);
        for a in 0..n {
            let d = hop_distances(&adj, a);
            for db in d.iter().skip(a + 1) {
                if let Some(k @ 1..=5) = *db {
                    *expected.entry(k).or_default() += 1;
                }
            }
        }
        let mut totals: BTreeMap<String, u64> = BTreeMap::new();
        for field in line.split_whitespace().skip(1) {
            let (c, val) = field.split_once(':').unwrap();
            let key = vocab.key(c.parse::<usize>().unwrap() - 1);
            *totals.entry(key.block().to_string()).or_default() += val.parse::<u64>().unwrap();
        }
        for h in 0..=3 {
            for d in 0..=5 {
                let got = totals.get(&format!("h{h}.d{d}")).copied().unwrap_or(0);
                assert_eq!(got, expected.get(&d).copied().unwrap_or(0), "{smiles_line} h{h} d{d}");
            }
        }
    }
}

fn separable_fixture(dir: &Path) -> PathBuf {
    // alcohols are positive, alkanes negative; the OH atom type decides
    let mut text = String::new();
    for n in 1..=12 {
        text.push_str(&format!("{}O\t1\n", "C".repeat(n)));
        text.push_str(&format!("{}\t-1\n", "C".repeat(n + 1)));
    }
    let p = dir.join("sep.tsv");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn separable_fixture_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let (f, v) = featurize(dir.path(), &separable_fixture(dir.path()), &["--heights", "0"]);
    let summary = dir.path().join("s.json");
    let metrics = dir.path().join("m.csv");
    ok(&[
        "evaluate", "--features", s(&f), "--vocab", s(&v), "--algorithm", "rf", "--protocol", "kfold:4",
        "--seed", "2", "--metrics", s(&metrics), "--summary", s(&summary),
    ]);
    assert_eq!(summary_mean_auroc(&summary), 1.0);
}

#[test]
fn ttest_against_itself_has_unit_p() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    fs::write(&m, "trial,auroc,train_acc,val_acc\n0,0.9,1,0.8\n1,0.8,1,0.7\n2,0.85,1,0.75\n").unwrap();
    let out = ok(&["ttest", s(&m), s(&m)]);
    assert!(out.contains(" t=0 "), "{out}");
    assert!(out.contains(" p=1 "), "{out}");
    assert!(out.trim_end().ends_with("verdict=not_significant"), "{out}");
}

#[test]
fn forest_on_nitro_rule_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let (f, v) = featurize(dir.path(), &fixture("nitro_rule.tsv"), &["--heights", "0-2"]);
    let summary = dir.path().join("s.json");
    let metrics = dir.path().join("m.csv");
    ok(&[
        "evaluate", "--features", s(&f), "--vocab", s(&v), "--algorithm", "rf", "--protocol", "kfold:10",
        "--metrics", s(&metrics), "--summary", s(&summary),
    ]);
    let auroc = summary_mean_auroc(&summary);
    assert!(auroc >= 0.95, "{auroc}");
}

#[test]
fn report_from_predictions_matches_evaluate_roc() {
    let dir = tempfile::tempdir().unwrap();
    let (f, v) = featurize(dir.path(), &fixture("nitro_rule.tsv"), &["--heights", "1"]);
    let (m, roc, preds, roc2) = (
        dir.path().join("m.csv"),
        dir.path().join("roc.csv"),
        dir.path().join("p.csv"),
        dir.path().join("roc2.csv"),
    );
    ok(&[
        "evaluate", "--features", s(&f), "--vocab", s(&v), "--algorithm", "rf", "--trees", "10", "--protocol",
        "shuffle:3", "--metrics", s(&m), "--roc", s(&roc), "--predictions", s(&preds),
    ]);
    ok(&["report", "--predictions", s(&preds), "--output", s(&roc2)]);
    assert_eq!(fs::read(&roc).unwrap(), fs::read(&roc2).unwrap());
    assert!(fs::read_to_string(&roc).unwrap().starts_with("fpr,tpr,threshold\n0,0,inf\n"));
}

#[test]
fn trained_model_scores_new_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (f, v) = featurize(dir.path(), &fixture("nitro_rule.tsv"), &["--heights", "0-1"]);
    let model = dir.path().join("model.json");
    let roc = dir.path().join("roc.csv");
    for args in [&["--algorithm", "rf", "--trees", "20"][..], &["--algorithm", "svm", "--kernel", "cosine"]] {
        let mut a = vec!["train", "--features", s(&f), "--vocab", s(&v), "--output", s(&model)];
        a.extend_from_slice(args);
        ok(&a);
        let out = ok(&["report", "--model", s(&model), "--features", s(&f), "--vocab", s(&v), "--output", s(&roc)]);
        assert!(out.contains("auroc=1"), "{args:?}: {out}");
    }
}

#[test]
fn manifest_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (f, v) = featurize(dir.path(), &fixture("nitro_rule.tsv"), &["--heights", "0"]);
    let cfg = dir.path().join("run.json");
    let metrics = dir.path().join("m.csv");
    fs::write(
        &cfg,
        format!(
            r#"{{"algorithm": "mlp", "protocol": "kfold:3", "forest": {{"n_trees": 5}},
                "paths": {{"features": {:?}, "vocab": {:?}, "metrics": {:?}}}}}"#,
            s(&f),
            s(&v),
            s(&metrics)
        ),
    )
    .unwrap();
    let out = ok(&["evaluate", "--config", s(&cfg), "--algorithm", "rf", "--protocol", "kfold:4"]);
    assert!(out.starts_with("protocol=kfold:4 trials=4 "), "{out}");
    assert_eq!(fs::read_to_string(&metrics).unwrap().lines().count(), 5);
}

#[test]
fn failures_use_documented_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (f, v) = featurize(dir.path(), &fixture("nitro_rule.tsv"), &["--heights", "0"]);
    let m = dir.path().join("m.csv");

    let (code, err) = exit_code(&[
        "featurize", "--input", s(&fixture("nitro_rule.tsv")), "--heights", "0", "--distances", "0-2",
        "--output", "x", "--vocab", "y",
    ]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error[config]: ") && err.lines().count() == 1, "{err}");

    let (code, _) = exit_code(&["evaluate", "--features", s(&f), "--vocab", s(&v), "--algorithm", "svm", "--kernel", "nspdk", "--metrics", s(&m)]);
    assert_eq!(code, 2);
    let (code, _) = exit_code(&["evaluate", "--features", s(&f), "--vocab", s(&v), "--algorithm", "rf", "--protocol", "kfold:1", "--metrics", s(&m)]);
    assert_eq!(code, 2);
    let (code, _) = exit_code(&["evaluate", "--no-such-flag"]);
    assert_eq!(code, 2);

    let garbage = dir.path().join("bad.svm");
    fs::write(&garbage, "+1 7:x\n").unwrap();
    let (code, err) = exit_code(&["evaluate", "--features", s(&garbage), "--vocab", s(&v), "--algorithm", "rf", "--metrics", s(&m)]);
    assert_eq!(code, 3);
    assert!(err.starts_with("error[parse]: "), "{err}");
    let junk = dir.path().join("junk.smi");
    fs::write(&junk, "C1CC\n((\n").unwrap();
    let (code, _) = exit_code(&["featurize", "--input", s(&junk), "--heights", "0", "--output", "x", "--vocab", "y"]);
    assert_eq!(code, 3);

    let one_class = dir.path().join("pos.svm");
    fs::write(&one_class, "+1 1:1\n+1 1:2\n").unwrap();
    let (code, err) = exit_code(&["train", "--features", s(&one_class), "--vocab", s(&v), "--algorithm", "rf", "--output", s(&dir.path().join("o"))]);
    assert_eq!(code, 4);
    assert!(err.starts_with("error[training]: "), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn help_lists_every_flag() {
    for (cmd, flags) in [
        ("featurize", &["--input", "--heights", "--distances", "--mode", "--output", "--vocab", "--drops", "--cache"][..]),
        ("train", &["--features", "--vocab", "--algorithm", "--kernel", "--seed", "--trees", "--output"]),
        ("evaluate", &["--protocol", "--metrics", "--summary", "--roc", "--predictions", "--threads", "--config"]),
        ("gram", &["--kernel", "--output"]),
        ("ttest", &["--metric"]),
        ("report", &["--predictions", "--model", "--output"]),
    ] {
        let out = ok(&[cmd, "--help"]);
        for flag in flags {
            assert!(out.contains(flag), "{cmd} --help lacks {flag}");
        }
    }
}
