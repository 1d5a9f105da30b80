use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use sfk::experiments::{generate_synthetic, SynthConfig};

fn sfk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfk"))
        .args(args)
        .current_dir(dir)
        .env_remove("SFK_SEED")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sfk(dir, args);
    assert!(
        out.status.success(),
        "sfk {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn listing(dir: &Path) -> BTreeSet<String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect()
}

/// Small corpus plus its feature cache.
fn corpus() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        image_size: 32,
        count_per_class: 15,
        frames_per_group: 3,
        ..SynthConfig::default()
    };
    generate_synthetic(&cfg, &dir.path().join("corpus")).unwrap();
    ok(
        dir.path(),
        &[
            "extract",
            "--manifest",
            "corpus/manifest.csv",
            "--out",
            "cache.csv",
        ],
    );
    dir
}

const SUBCOMMANDS: [&str; 9] = [
    "synth-generate",
    "extract",
    "train",
    "predict",
    "evaluate",
    "sweep",
    "bands",
    "stats",
    "video-eval",
];

#[test]
fn help_exits_zero_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let top = ok(dir.path(), &["--help"]);
    for sub in SUBCOMMANDS {
        assert!(top.contains(sub), "top-level help lacks {sub}");
        let help = ok(dir.path(), &[sub, "--help"]);
        assert!(
            help.contains("--seed") && help.contains("[default: 42]"),
            "{sub}"
        );
    }
    let train = ok(dir.path(), &["train", "--help"]);
    for flag in [
        "--classifier",
        "--c ",
        "--gamma",
        "--lr-rate",
        "--iters",
        "--tol",
        "--k ",
        "--restarts",
        "--test-frac",
        "--band",
    ] {
        assert!(train.contains(flag), "train help lacks {flag}");
    }
    let extract = ok(dir.path(), &["extract", "--help"]);
    for flag in [
        "--target-len",
        "--no-log",
        "--no-norm",
        "--epsilon",
        "--jobs",
    ] {
        assert!(extract.contains(flag), "extract help lacks {flag}");
    }
    let sweep = ok(dir.path(), &["sweep", "--help"]);
    for flag in ["--sizes", "--repeats", "[default: 20,100,1000]"] {
        assert!(sweep.contains(flag), "sweep help lacks {flag}");
    }
    assert!(ok(dir.path(), &["bands", "--help"]).contains("--breakpoints"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["stats", "--cache", "c.csv", "--out", "s.csv", "--bogus"],
        vec![
            "train",
            "--cache",
            "c.csv",
            "--model",
            "m",
            "--classifier",
            "lr",
            "--gamma",
            "1",
        ],
        vec![
            "train",
            "--cache",
            "c.csv",
            "--model",
            "m",
            "--classifier",
            "svm",
            "--k",
            "3",
        ],
        vec![
            "train",
            "--cache",
            "c.csv",
            "--model",
            "m",
            "--classifier",
            "lr,svm",
        ],
        vec!["train", "--cache", "c.csv", "--model", "m", "--c", "-1"],
        vec![
            "train",
            "--cache",
            "c.csv",
            "--model",
            "m",
            "--test-frac",
            "1.5",
        ],
        vec!["extract", "--image", "a.png", "--manifest", "m.csv"],
        vec!["extract", "--manifest", "m.csv"],
        vec![
            "stats", "--cache", "c.csv", "--out", "s.csv", "--band", "5:2",
        ],
    ] {
        let out = sfk(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    assert!(listing(dir.path()).is_empty());
}

#[test]
fn domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    image::GrayImage::new(8, 8)
        .save(dir.path().join("black.png"))
        .unwrap();
    std::fs::write(dir.path().join("bad.csv"), "path,label\nblack.png,7\n").unwrap();
    for args in [
        vec!["stats", "--cache", "missing.csv", "--out", "s.csv"],
        vec!["extract", "--image", "black.png"],
        vec!["extract", "--manifest", "bad.csv", "--out", "c.csv"],
    ] {
        let out = sfk(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).starts_with("error:"),
            "{args:?}"
        );
    }
}

#[test]
fn train_evaluate_predict_happy_path() {
    let dir = corpus();
    let d = dir.path();
    ok(
        d,
        &[
            "train",
            "--cache",
            "cache.csv",
            "--classifier",
            "svm",
            "--model",
            "svm.model",
        ],
    );
    let eval = ok(
        d,
        &[
            "evaluate",
            "--model",
            "svm.model",
            "--cache",
            "cache.csv",
            "--confusion",
            "confusion.csv",
        ],
    );
    let accuracy: f64 = eval
        .trim()
        .strip_prefix("accuracy=")
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.0..=1.0).contains(&accuracy));
    let confusion = std::fs::read_to_string(d.join("confusion.csv")).unwrap();
    assert!(confusion.starts_with("actual,predicted,count\n"));

    let line = ok(
        d,
        &[
            "predict",
            "--model",
            "svm.model",
            "--image",
            "corpus/fake_00002.png",
        ],
    );
    let parts: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(parts.len(), 3, "{line}");
    assert_eq!(parts[0], "corpus/fake_00002.png");
    assert!(parts[1] == "fake" || parts[1] == "real");
    let value: f64 = parts[2].parse().unwrap();
    assert_eq!(parts[1] == "real", value >= 0.0);

    let all = ok(
        d,
        &[
            "predict",
            "--model",
            "svm.model",
            "--manifest",
            "corpus/manifest.csv",
        ],
    );
    assert_eq!(all.lines().count(), 30);
}

#[test]
fn banded_model_replays_its_band() {
    let dir = corpus();
    let d = dir.path();
    for kind in ["lr", "kmeans"] {
        let model = format!("{kind}.model");
        ok(
            d,
            &[
                "train",
                "--cache",
                "cache.csv",
                "--classifier",
                kind,
                "--band",
                "10:23",
                "--model",
                &model,
            ],
        );
        assert!(ok(
            d,
            &[
                "evaluate",
                "--model",
                &model,
                "--cache",
                "cache.csv",
                "--all"
            ]
        )
        .starts_with("accuracy="));
        assert!(ok(
            d,
            &[
                "predict",
                "--model",
                &model,
                "--image",
                "corpus/real_00000.png"
            ]
        )
        .contains(" "));
    }
}

#[test]
fn mismatched_extraction_is_rejected() {
    let dir = corpus();
    let d = dir.path();
    ok(
        d,
        &["train", "--cache", "cache.csv", "--model", "svm.model"],
    );
    ok(
        d,
        &[
            "extract",
            "--manifest",
            "corpus/manifest.csv",
            "--out",
            "raw.csv",
            "--no-log",
        ],
    );
    let out = sfk(
        d,
        &["evaluate", "--model", "svm.model", "--cache", "raw.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn commands_are_idempotent_and_write_only_named_files() {
    let dir = corpus();
    let d = dir.path();
    let steps: [(&[&str], &[&str]); 6] = [
        (
            &[
                "train",
                "--cache",
                "cache.csv",
                "--model",
                "m.model",
                "--classifier",
                "kmeans",
            ],
            &["m.model"],
        ),
        (
            &[
                "evaluate",
                "--model",
                "m.model",
                "--cache",
                "cache.csv",
                "--confusion",
                "conf.csv",
            ],
            &["conf.csv"],
        ),
        (
            &[
                "sweep",
                "--cache",
                "cache.csv",
                "--out",
                "sweep.csv",
                "--sizes",
                "10,30",
                "--repeats",
                "2",
            ],
            &["sweep.csv"],
        ),
        (
            &[
                "bands",
                "--cache",
                "cache.csv",
                "--out",
                "bands.csv",
                "--breakpoints",
                "0,5,12,23",
            ],
            &["bands.csv"],
        ),
        (
            &["stats", "--cache", "cache.csv", "--out", "stats.csv"],
            &["stats.csv"],
        ),
        (
            &[
                "video-eval",
                "--model",
                "m.model",
                "--cache",
                "cache.csv",
                "--out",
                "videos.csv",
                "--all",
            ],
            &["videos.csv"],
        ),
    ];
    for (args, named) in steps {
        let before = listing(d);
        let first = ok(d, args);
        let written: Vec<String> = listing(d).difference(&before).cloned().collect();
        for f in &written {
            assert!(named.contains(&f.as_str()), "{args:?} wrote unexpected {f}");
        }
        let snapshot: Vec<Vec<u8>> = named
            .iter()
            .map(|f| std::fs::read(d.join(f)).unwrap())
            .collect();
        assert_eq!(ok(d, args), first, "{args:?} stdout changed");
        let again: Vec<Vec<u8>> = named
            .iter()
            .map(|f| std::fs::read(d.join(f)).unwrap())
            .collect();
        assert_eq!(snapshot, again, "{args:?} output changed");
    }
    let sweep = std::fs::read_to_string(d.join("sweep.csv")).unwrap();
    assert!(sweep
        .lines()
        .any(|l| l == "size,classifier,mean_accuracy,min_accuracy,max_accuracy,repeats"));
    let bands = std::fs::read_to_string(d.join("bands.csv")).unwrap();
    let rows: Vec<&str> = bands.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "from,to,accuracy");
    assert_eq!(rows.len(), 1 + 6);
}

#[test]
fn seed_comes_from_flag_then_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = |out: &str, env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sfk"));
        cmd.current_dir(d).env_remove("SFK_SEED");
        cmd.args([
            "synth-generate",
            "--out",
            out,
            "--count",
            "1",
            "--size",
            "16",
        ]);
        if let Some(s) = env {
            cmd.env("SFK_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.status().unwrap().success());
        std::fs::read(d.join(out).join("real_00000.png")).unwrap()
    };
    let default = gen("a", None, None);
    assert_eq!(gen("b", Some("42"), None), default);
    assert_ne!(gen("c", Some("5"), None), default);
    assert_eq!(gen("d", Some("5"), Some("42")), default);
}
