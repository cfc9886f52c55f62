use std::fs;
use std::path::Path;

use modeswitch::data::{load_csv, stratified_split, synthesize, Dataset, Mode, Schema, SynthConfig};
use modeswitch::eval::{segment_report, segment_report_csv, CVReport};
use modeswitch::interpret::{pdp, Grid};
use modeswitch::models::{fit, Classifier, Hyperparams, ModelKind, SoftClassifier};

fn small(n_rows: usize, seed: u64) -> Dataset {
    synthesize(&SynthConfig {
        n_rows,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}

fn cheap_hyperparams() -> Hyperparams {
    let mut hp = Hyperparams::default();
    hp.boost.n_trees = 40;
    hp.bag.n_trees = 15;
    hp.rf.n_trees = 15;
    hp.nn.max_iter = 60;
    hp
}

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["modeswitch"];
    v.extend_from_slice(args);
    modeswitch::cli::run(v)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn model_json_round_trip_is_bit_exact() {
    let data = small(300, 4);
    let hp = cheap_hyperparams();
    for kind in ModelKind::ALL {
        let model = fit(kind, &data, &hp, 9).unwrap();
        let back = SoftClassifier::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(back, model, "{kind}");
        for row in data.rows() {
            assert_eq!(model.proba(row).to_bits(), back.proba(row).to_bits(), "{kind}");
        }
    }
}

/// Utility table written out by hand, evaluated without the generator.
fn hand_utility(mode: Mode, x: &dyn Fn(&str) -> f64) -> f64 {
    let hinge = |f: &str, b: f64| (x(f) - b).max(0.0);
    let step = |f: &str, b: f64| if x(f) > b { 1.0 } else { 0.0 };
    let social = 0.8 * x("Student") + 0.9 * x("MOD_Access") - 0.3 * x("Income");
    let own = match mode {
        Mode::Car => {
            6.13 + 0.06 * x("TT_Drive") - 0.8 * x("Wait_Time") - 2.0 * x("Transfer") - 2.2 * x("Rideshare")
                - 0.6 * x("CarPerCap")
                - 0.48 * hinge("TT_MOD", 10.0)
                - 1.4 * hinge("Transfer", 1.0)
                + 3.2 * step("TT_Drive", 15.0)
                - 3.0 * step("CarPerCap", 0.75)
                - 2.0 * step("TT_MOD", 25.0)
        }
        Mode::Walk => {
            2.50 + 0.02 * x("TT_Walk") - 0.6 * x("Wait_Time") - 0.9 * x("Transfer") - 1.1 * x("Rideshare")
                - 0.5 * x("Bike_Walkability")
                - 0.52 * hinge("TT_MOD", 10.0)
                + 0.28 * hinge("TT_MOD", 20.0)
                - 0.6 * hinge("Transfer", 1.0)
                + 3.0 * step("TT_Walk", 30.0)
                - 2.0 * step("TT_MOD", 25.0)
        }
        Mode::Bike => {
            1.73 + 0.04 * x("TT_Bike") - 0.6 * x("Wait_Time") - 0.9 * x("Transfer") - 0.9 * x("Rideshare")
                - 0.7 * x("Bike_Walkability")
                - 0.52 * hinge("TT_MOD", 10.0)
                + 0.28 * hinge("TT_MOD", 20.0)
                - 0.6 * hinge("Transfer", 1.0)
                + 3.0 * step("TT_Bike", 15.0)
                - 2.0 * step("TT_MOD", 25.0)
        }
        Mode::Bus => {
            5.87 + 0.01 * x("TT_Walk") - 0.5 * x("Wait_Time") - 2.0 * x("Transfer") - 0.7 * x("Rideshare")
                - 0.4 * x("CarPerCap")
                - 0.48 * hinge("TT_MOD", 10.0)
                - 1.4 * hinge("Transfer", 1.0)
                + 2.0 * step("TT_Walk", 40.0)
                - 2.4 * step("CarPerCap", 0.75)
                - 2.0 * step("TT_MOD", 25.0)
        }
    };
    own + social
}

#[test]
fn planted_probabilities_match_hand_table() {
    let gen = SynthConfig {
        n_rows: 2000,
        ..SynthConfig::default()
    }
    .compile()
    .unwrap();
    let (data, planted) = gen.generate().unwrap();
    let mut worst = 0.0f64;
    for (i, &q) in planted.iter().enumerate() {
        let x = |f: &str| data.value(i, data.feature_index(f).unwrap());
        let u = hand_utility(data.mode_of(i).unwrap(), &x);
        let p = 1.0 / (1.0 + (-u).exp());
        worst = worst.max((p - q).abs());
        assert_eq!(q, gen.planted_probability(data.row(i)));
    }
    assert!(worst < 1e-12, "worst deviation {worst}");
}

#[test]
fn cli_cv_report_has_every_fold() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let hp = dir.path().join("hp.json");
    let cv = dir.path().join("cv.json");
    fs::write(&hp, serde_json::to_string(&cheap_hyperparams()).unwrap()).unwrap();
    assert_eq!(run(&["synth", "--out", s(&data), "--n-rows", "400", "--seed", "3"]), 0);
    assert_eq!(
        run(&["cv", "--data", s(&data), "--hyperparams", s(&hp), "--out", s(&cv), "--seed", "5"]),
        0
    );
    let rep: CVReport = serde_json::from_str(&fs::read_to_string(&cv).unwrap()).unwrap();
    assert_eq!(rep.k, 10);
    assert_eq!(rep.models.len(), 7);
    for m in &rep.models {
        assert_eq!(m.fold_accuracies.len(), 10);
    }
    assert!(ModelKind::ALL.contains(&rep.selected_model));

    // the same report as CSV: 70 fold rows, 7 means, 1 selection, 1 header
    let csv = dir.path().join("cv.csv");
    assert_eq!(
        run(&["cv", "--data", s(&data), "--hyperparams", s(&hp), "--out", s(&csv), "--seed", "5"]),
        0
    );
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 79);
}

#[test]
fn cli_pdp_writes_one_average_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let model = dir.path().join("m.json");
    assert_eq!(run(&["synth", "--out", s(&data), "--n-rows", "300"]), 0);
    assert_eq!(run(&["train", "--data", s(&data), "--model-kind", "logit", "--out", s(&model)]), 0);
    for (feature, points, expect) in [("TT_MOD", "17", 17), ("Transfer", "50", 3)] {
        let out = dir.path().join(format!("{feature}.csv"));
        assert_eq!(
            run(&["pdp", "--model", s(&model), "--data", s(&data), "--feature", feature, "--grid-points", points, "--out", s(&out)]),
            0
        );
        let text = fs::read_to_string(&out).unwrap();
        let avg = text.lines().filter(|l| l.split(',').nth(1) == Some("AVG")).count();
        assert_eq!(avg, expect, "{feature}");
    }
    let svg = dir.path().join("ice.svg");
    assert_eq!(
        run(&[
            "cipdp", "--model", s(&model), "--data", s(&data), "--feature", "Rideshare", "--segment-by", "mode", "--value",
            "car", "--center", "0", "--out", s(&svg)
        ]),
        0
    );
    assert!(fs::read_to_string(&svg).unwrap().contains("<svg"));
    assert_eq!(
        run(&["pdp", "--model", s(&model), "--data", s(&data), "--feature", "Nope", "--out", s(&svg)]),
        1
    );
}

#[test]
fn cli_train_then_evaluate_equals_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("d.csv");
    let train_path = dir.path().join("train.csv");
    let test_path = dir.path().join("test.csv");
    let model_path = dir.path().join("m.json");
    let eval_path = dir.path().join("eval.csv");
    let hp_path = dir.path().join("hp.json");
    let hp = cheap_hyperparams();
    fs::write(&hp_path, serde_json::to_string(&hp).unwrap()).unwrap();
    assert_eq!(run(&["synth", "--out", s(&data_path), "--n-rows", "600", "--seed", "8"]), 0);
    assert_eq!(
        run(&["split", "--data", s(&data_path), "--train-out", s(&train_path), "--test-out", s(&test_path), "--seed", "8"]),
        0
    );
    assert_eq!(
        run(&[
            "train", "--data", s(&train_path), "--model-kind", "boost", "--hyperparams", s(&hp_path), "--seed", "2",
            "--out", s(&model_path)
        ]),
        0
    );
    assert_eq!(run(&["evaluate", "--model", s(&model_path), "--data", s(&test_path), "--out", s(&eval_path)]), 0);

    // in-process: same synth, split and fit
    let data = small(600, 8);
    let split = stratified_split(&data, 0.1, 8).unwrap();
    let schema = Schema::mode_switching();
    assert_eq!(load_csv(&train_path, &schema).unwrap(), split.train);
    let model = fit(ModelKind::Boost, &split.train, &hp, 2).unwrap();
    let loaded = SoftClassifier::load(&model_path).unwrap();
    assert_eq!(loaded, model);
    let test = load_csv(&test_path, &schema).unwrap();
    let expected = segment_report_csv(&segment_report(&model, &test).unwrap());
    assert_eq!(fs::read_to_string(&eval_path).unwrap(), expected);

    let grid = Grid::for_feature(&test, "TT_MOD", 10).unwrap();
    assert_eq!(pdp(&loaded, &test, &grid).unwrap(), pdp(&model, &test, &grid).unwrap());
}

#[test]
fn cli_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let model = dir.path().join("m.json");
    assert_eq!(run(&["synth", "--out", s(&data), "--n-rows", "300", "--seed", "1"]), 0);
    assert_eq!(
        run(&["train", "--data", s(&data), "--model-kind", "rf", "--seed", "1", "--out", s(&model)]),
        0
    );
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(format!("ice{threads}.json"));
        let eff = dir.path().join(format!("eff{threads}.csv"));
        assert_eq!(
            run(&[
                "--threads", threads, "ice", "--model", s(&model), "--data", s(&data), "--feature", "Wait_Time", "--cap",
                "20", "--seed", "4", "--out", s(&out)
            ]),
            0
        );
        assert_eq!(
            run(&["--threads", threads, "effects", "--model", s(&model), "--data", s(&data), "--out", s(&eff)]),
            0
        );
        outputs.push((fs::read(&out).unwrap(), fs::read(&eff).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn cli_manifest_runs_steps_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let tab = dir.path().join("tab.csv");
    let manifest = dir.path().join("run.json");
    let steps = serde_json::json!({
        "steps": [
            ["synth", "--out", s(&data), "--n-rows", "200"],
            ["crosstab", "--data", s(&data), "--out", s(&tab)]
        ]
    });
    fs::write(&manifest, steps.to_string()).unwrap();
    assert_eq!(run(&["--manifest", s(&manifest)]), 0);
    let text = fs::read_to_string(&tab).unwrap();
    assert!(text.starts_with("mode,stay,switch"));

    let broken = serde_json::json!({ "steps": [["vif", "--data", s(&dir.path().join("missing.csv")), "--out", s(&tab)]] });
    fs::write(&manifest, broken.to_string()).unwrap();
    assert_eq!(run(&["--manifest", s(&manifest)]), 1);
}
