use std::path::Path;
use std::process::{Command, Output};

fn metades(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metades"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_train_classify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&metades(&["gen-p2", "-n", "800", "--seed", "3", "-o", "p2.csv"], d));
    let header = std::fs::read_to_string(d.join("p2.csv")).unwrap();
    assert!(header.starts_with("x1,x2,label\n"));
    assert_eq!(header.lines().count(), 801);

    std::fs::write(
        d.join("train.toml"),
        "[pool]\nsize = 5\n[bpso]\nruns = 1\n[rrc]\nsamples = 100\n",
    )
    .unwrap();
    let out = metades(
        &["train", "p2.csv", "-c", "train.toml", "--seed", "9", "-m", "m.json"],
        d,
    );
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("held-out accuracy"));

    ok(&metades(&["gen-p2", "-n", "50", "--seed", "4", "-o", "new.csv"], d));
    let out = metades(
        &[
            "classify",
            "-m",
            "m.json",
            "new.csv",
            "--label-column",
            "last",
            "-o",
            "pred.csv",
        ],
        d,
    );
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("accuracy"));
    let pred = std::fs::read_to_string(d.join("pred.csv")).unwrap();
    assert_eq!(pred.lines().count(), 51);
    assert!(pred.lines().nth(1).unwrap().contains("META-DES.Oracle"));

    // Unlabelled input: every column is a feature.
    std::fs::write(d.join("raw.csv"), "0.5,0.5\n2.0,8.0\n").unwrap();
    let stdout = ok(&metades(&["classify", "-m", "m.json", "raw.csv"], d));
    assert_eq!(stdout.lines().count(), 3);

    std::fs::write(d.join("wide.csv"), "0.5,0.5,0.5\n").unwrap();
    assert!(!metades(&["classify", "-m", "m.json", "wide.csv"], d).status.success());
}

#[test]
fn benchmark_and_frequency_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("exp.toml"),
        "replications = 2\n[data]\nkind = \"p2\"\ntrain = 150\nmeta = 150\ndsel = 150\ntest = 200\n\
         [pool]\nsize = 4\n[bpso]\nruns = 1\n[rrc]\nsamples = 50\n",
    )
    .unwrap();
    let stdout = ok(&metades(
        &[
            "benchmark",
            "exp.toml",
            "--methods",
            "meta-des.oracle,knora-u,oracle",
            "--seed",
            "5",
            "-o",
            "out",
        ],
        d,
    ));
    assert!(stdout.contains("KNORA-U"));
    assert!(!stdout.contains("OLA"));
    let summary = std::fs::read_to_string(d.join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    let acc = std::fs::read_to_string(d.join("out/accuracy.csv")).unwrap();
    assert_eq!(acc.lines().count(), 1 + 2 * 3);

    let stdout = ok(&metades(&["freq-report", "out/masks.csv"], d));
    assert!(stdout.starts_with("set,frequency,band"));
    assert_eq!(stdout.lines().count(), 16);
    ok(&metades(&["freq-report", "out/masks.csv", "-o", "freq"], d));
    let per_feature = std::fs::read_to_string(d.join("freq/frequencies.csv")).unwrap();
    assert_eq!(per_feature.lines().count(), 68);
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(!metades(&["benchmark", "missing.toml"], d).status.success());
    std::fs::write(d.join("bad.toml"), "replications = 0\n").unwrap();
    let out = metades(&["benchmark", "bad.toml"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("replications"));
    assert!(!metades(&["benchmark", "bad.toml", "--methods", "nope"], d)
        .status
        .success());
    assert!(!metades(&["classify", "-m", "none.json", "x.csv"], d).status.success());
    assert!(!metades(&["frobnicate"], d).status.success());
}
