use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use transbox::manifest::RunManifest;
use transbox::model::{init_model, load_checkpoint};
use transbox::ontology::parse_ontology;

const FAMILY: &str = include_str!("data/family.el");

fn transbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transbox")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn family_file(dir: &Path) -> PathBuf {
    let p = dir.join("family.el");
    fs::write(&p, FAMILY).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Trains the two-dimensional family model and returns the output dir.
fn train_family(dir: &Path) -> PathBuf {
    let onto = family_file(dir);
    let out = dir.join("family-run");
    let o = transbox(&[
        "train", "--ontology", s(&onto), "--dim", "2", "--gamma", "0", "--lambda", "0", "--no-negatives",
        "--epochs", "5000", "--seed", "7", "--threads", "1", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

#[test]
fn train_writes_artifacts_and_checks_sound() {
    let dir = tempfile::tempdir().unwrap();
    let out = train_family(dir.path());
    for f in ["model.ckpt", "trace.csv", "config.toml", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 5001);
    let manifest = RunManifest::load(out.join("manifest.json")).unwrap();
    assert_eq!(manifest.command, "train");
    assert_eq!(manifest.seed, Some(7));
    assert_eq!(manifest.outputs, vec![PathBuf::from("model.ckpt"), "trace.csv".into(), "config.toml".into()]);
    let ckpt = load_checkpoint(out.join("model.ckpt")).unwrap();
    assert_eq!(ckpt.metadata.config_digest, manifest.config_digest);
    assert_eq!(ckpt.metadata.epoch, 5000);

    let onto = dir.path().join("family.el");
    let o = transbox(&["check", "--checkpoint", s(&out.join("model.ckpt")), "--ontology", s(&onto), "--tol", "1e-2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("sound=true satisfied=9/9"));
}

#[test]
fn zero_epochs_returns_initialisation() {
    let dir = tempfile::tempdir().unwrap();
    let onto = family_file(dir.path());
    let out = dir.path().join("init");
    let o = transbox(&["train", "--ontology", s(&onto), "--dim", "3", "--epochs", "0", "--seed", "5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ckpt = load_checkpoint(out.join("model.ckpt")).unwrap();
    let expected = init_model(parse_ontology(FAMILY).unwrap().signature(), 3, 5).unwrap();
    assert_eq!(ckpt.model, expected);
    assert_eq!(fs::read_to_string(out.join("trace.csv")).unwrap().lines().count(), 1);
}

#[test]
fn random_model_is_unsound() {
    let dir = tempfile::tempdir().unwrap();
    let onto = family_file(dir.path());
    let out = dir.path().join("init");
    transbox(&["train", "--ontology", s(&onto), "--dim", "2", "--epochs", "0", "--out", s(&out)]);
    let report_dir = dir.path().join("check");
    let o = transbox(&[
        "check", "--checkpoint", s(&out.join("model.ckpt")), "--ontology", s(&onto), "--tol", "1e-2", "--out",
        s(&report_dir),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    assert!(stdout(&o).contains("sound=false"));
    assert_eq!(fs::read_to_string(report_dir.join("soundness.txt")).unwrap(), stdout(&o));
    assert!(report_dir.join("manifest.json").exists());

    let empty = dir.path().join("empty.el");
    fs::write(&empty, "# nothing\n").unwrap();
    let o = transbox(&["check", "--checkpoint", s(&out.join("model.ckpt")), "--ontology", s(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sound=true satisfied=0/0"));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = transbox(&["train", "--ontology", "/no/such/family.el", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/family.el"), "{}", stderr(&o));

    let bad = dir.path().join("bad.el");
    fs::write(&bad, "A SubClassOf B\nA SubClassOf (B and\n").unwrap();
    let o = transbox(&["train", "--ontology", s(&bad), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.el:2:"), "{}", stderr(&o));

    let o = transbox(&["train", "--ontology", s(&bad), "--dim", "0", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let o = transbox(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let onto = family_file(dir.path());
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "dim = 3\nlearning_rate = 0.02\nepochs = 2\nseed = 4\n").unwrap();
    let out = dir.path().join("run");
    let o = transbox(&["train", "--ontology", s(&onto), "--config", s(&cfg), "--dim", "4", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let effective: transbox::training::TrainConfig =
        toml::from_str(&fs::read_to_string(out.join("config.toml")).unwrap()).unwrap();
    assert_eq!(effective.dim, 4);
    assert_eq!(effective.learning_rate, 0.02);
    assert_eq!(effective.epochs, 2);
    assert_eq!(effective.seed, 4);
    assert_eq!(effective.margin, transbox::training::TrainConfig::default().margin);

    fs::write(&cfg, "dimension = 3\n").unwrap();
    let o = transbox(&["train", "--ontology", s(&onto), "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cfg.toml"));
}

#[test]
fn periodic_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let onto = family_file(dir.path());
    let out = dir.path().join("run");
    let o = transbox(&[
        "train", "--ontology", s(&onto), "--dim", "2", "--epochs", "6", "--checkpoint-every", "3", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let third = load_checkpoint(out.join("checkpoints/epoch-000003.ckpt")).unwrap();
    assert_eq!(third.metadata.epoch, 3);
    let sixth = load_checkpoint(out.join("checkpoints/epoch-000006.ckpt")).unwrap();
    assert_eq!(sixth.model, load_checkpoint(out.join("model.ckpt")).unwrap().model);
    let manifest = RunManifest::load(out.join("manifest.json")).unwrap();
    assert!(manifest.outputs.contains(&PathBuf::from("checkpoints/epoch-000003.ckpt")));
}

const COMPLEX_TEST: &str = "\
Father SubClassOf Male and Parent
Child SubClassOf hasParent some (Male and Parent)
hasChild some Child and Male SubClassOf Father
hasParent some Father SubClassOf hasParent some (Male and Parent)
";

#[test]
fn eval_writes_one_report_per_task() {
    let dir = tempfile::tempdir().unwrap();
    let onto = family_file(dir.path());
    let run = dir.path().join("run");
    transbox(&["train", "--ontology", s(&onto), "--dim", "4", "--epochs", "20", "--out", s(&run)]);
    let test = dir.path().join("complex.el");
    fs::write(&test, COMPLEX_TEST).unwrap();
    let ckpt = run.join("model.ckpt");

    let out = dir.path().join("two");
    let o = transbox(&[
        "eval", "--checkpoint", s(&ckpt), "--test", s(&test), "--tasks", "lhs-atomic,rhs-atomic", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports: Vec<_> = ["lhs-atomic.txt", "rhs-atomic.txt"].iter().map(|f| out.join(f)).collect();
    assert!(reports.iter().all(|p| p.exists()));
    let kv = fs::read_to_string(&reports[0]).unwrap();
    for key in ["task=lhs-atomic", "queries=2", "pool=6", "H@1=", "H@10=", "H@100=", "Med=", "MRR=", "MR=", "AUC="] {
        assert!(kv.contains(key), "{key} in {kv}");
    }
    assert!(stdout(&o).starts_with("task"));

    let all = dir.path().join("all");
    let o = transbox(&["eval", "--checkpoint", s(&ckpt), "--test", s(&test), "--tasks", "all", "--out", s(&all)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for task in ["rhs-atomic", "lhs-atomic", "rhs-complex", "lhs-complex"] {
        assert!(all.join(format!("{task}.txt")).exists(), "{task}");
    }
    let manifest = RunManifest::load(all.join("manifest.json")).unwrap();
    assert_eq!(manifest.outputs.len(), 5);
}

#[test]
fn eval_rejects_unknown_names() {
    let dir = tempfile::tempdir().unwrap();
    let onto = family_file(dir.path());
    let run = dir.path().join("run");
    transbox(&["train", "--ontology", s(&onto), "--dim", "2", "--epochs", "0", "--out", s(&run)]);
    let test = dir.path().join("t.el");
    fs::write(&test, "Father SubClassOf Grandparent and Parent\nUncle SubClassOf likes some Male\n").unwrap();
    let o = transbox(&["eval", "--checkpoint", s(&run.join("model.ckpt")), "--test", s(&test), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown names: Grandparent, Uncle, likes"), "{}", stderr(&o));
}

#[test]
fn eval_selects_among_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let onto = family_file(dir.path());
    let test = dir.path().join("complex.el");
    fs::write(&test, COMPLEX_TEST).unwrap();
    let mut ckpts = Vec::new();
    for seed in ["1", "2"] {
        let run = dir.path().join(format!("run{seed}"));
        transbox(&["train", "--ontology", s(&onto), "--dim", "2", "--epochs", "5", "--seed", seed, "--out", s(&run)]);
        ckpts.push(run.join("model.ckpt"));
    }
    let o = transbox(&[
        "eval", "--checkpoint", s(&ckpts[0]), s(&ckpts[1]), "--test", s(&test), "--out", s(&dir.path().join("e")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = transbox(&[
        "eval", "--checkpoint", s(&ckpts[0]), s(&ckpts[1]), "--test", s(&test), "--valid", s(&test),
        "--select-metric", "h10", "--out", s(&dir.path().join("e")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("selected "));
}

#[test]
fn simulate_prints_table() {
    let o = transbox(&["simulate", "--dims", "1,50", "--samples", "20000", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1    6.666667e-1"), "{}", lines[1]);
    assert!(lines[2].starts_with("50 ") && lines[2].ends_with("below 1.6e-9"), "{}", lines[2]);
    assert_eq!(stdout(&transbox(&["simulate", "--dims", "1,50", "--samples", "20000", "--seed", "3"])), out);

    let o = transbox(&["simulate", "--samples", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot2d_renders_family() {
    let dir = tempfile::tempdir().unwrap();
    let out = train_family(dir.path());
    let ckpt = out.join("model.ckpt");
    let a = transbox(&["plot2d", "--checkpoint", s(&ckpt)]);
    let b = transbox(&["plot2d", "--checkpoint", s(&ckpt)]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let svg = stdout(&a);
    assert_eq!(svg.matches(r#"class="concept""#).count(), 6);
    assert_eq!(svg.matches(r#"class="role""#).count(), 2);
    for name in ["Father", "Mother", "Male", "Female", "Parent", "Child", "hasParent", "hasChild"] {
        assert!(svg.contains(&format!(">{name}</text>")), "{name}");
    }

    let plot_dir = dir.path().join("plot");
    let o = transbox(&["plot2d", "--checkpoint", s(&ckpt), "--out", s(&plot_dir)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(plot_dir.join("plot.svg")).unwrap(), svg);

    let onto = dir.path().join("family.el");
    let wide = dir.path().join("wide");
    transbox(&["train", "--ontology", s(&onto), "--dim", "50", "--epochs", "0", "--out", s(&wide)]);
    let o = transbox(&["plot2d", "--checkpoint", s(&wide.join("model.ckpt"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("plot2d requires dimension 2"));
}
