use std::path::PathBuf;

use nfseer::bank::{default_specs, BankSettings, BankTrainOptions, NfBank};
use nfseer::dataset::{load_projects, split_kfold, Format, LoadOptions};
use nfseer::eval::{cross_validate, BaselineBuilder, CandidateBuilder, CvOptions};
use nfseer::synthetic::{generate_projects, known_bank, Perturbation, ProjectDraw};
use nfseer::ProjectRecord;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn anchor_bank() -> NfBank {
    NfBank::init_from_anchors(default_specs(), &BankSettings::default()).unwrap()
}

fn noisy_projects(count: usize, seed: u64) -> Vec<ProjectRecord> {
    let truth = known_bank(
        &default_specs(),
        Perturbation::default(),
        seed,
        &BankSettings::default(),
    )
    .unwrap();
    let draw = ProjectDraw {
        count,
        noise: 0.25,
        ..ProjectDraw::default()
    };
    generate_projects(&truth, &draw, seed + 1).unwrap()
}

#[test]
fn cocomo_fixture_converts_and_predicts() {
    let out = load_projects(&data("cocomo_3row.csv"), Format::CocomoCsv, &LoadOptions::default()).unwrap();
    assert_eq!(out.records.len(), 3);
    assert!(out.rejected.is_empty());
    let bank = anchor_bank();
    for p in &out.records {
        assert!(
            p.ratings.keys().all(|k| bank.spec(k).is_some()),
            "{:?}",
            p.ratings.keys()
        );
        assert!(bank.predict(p).unwrap() > 0.0);
    }
}

#[test]
fn industrial_stand_in_fixture_loads() {
    let out = load_projects(
        &data("industrial_synthetic.csv"),
        Format::SeerCsv,
        &LoadOptions::default(),
    )
    .unwrap();
    assert_eq!(out.records.len(), 6);
    let bank = anchor_bank();
    for p in &out.records {
        assert!(bank.predict(p).unwrap() > 0.0);
    }
}

#[test]
fn trained_bank_survives_a_file_round_trip() {
    let projects = noisy_projects(30, 21);
    let mut opts = BankTrainOptions::default();
    opts.train.epochs = 5;
    let (bank, history) = anchor_bank()
        .calibrate_ctb(&projects)
        .unwrap()
        .train(&projects, &opts)
        .unwrap();
    assert_eq!(history.len(), 5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bank.json");
    bank.save(&path).unwrap();
    let back = NfBank::load(&path).unwrap();
    assert_eq!(back.to_file_string(), bank.to_file_string());
    for p in &projects {
        assert_eq!(back.predict(p).unwrap(), bank.predict(p).unwrap());
    }
}

#[test]
fn training_on_noisy_data_keeps_every_curve_monotone() {
    let projects = noisy_projects(60, 33);
    let mut opts = BankTrainOptions::default();
    opts.train.epochs = 20;
    let start = anchor_bank().calibrate_ctb(&projects).unwrap();
    let before = start.loss(&projects).unwrap();
    let (bank, _) = start.train(&projects, &opts).unwrap();
    assert!(bank.loss(&projects).unwrap() < before);
    assert!(bank.monotonicity_check().unwrap().is_empty());
}

#[test]
fn cross_validation_is_reproducible_across_scheduling() {
    let projects = noisy_projects(30, 44);
    let plan = split_kfold(&projects, 5, 42, true).unwrap();
    let mut options = BankTrainOptions::default();
    options.train.epochs = 5;
    let baseline = BaselineBuilder { bank: anchor_bank() };
    let candidate = CandidateBuilder {
        bank: anchor_bank(),
        options,
    };
    let run = |parallel| {
        cross_validate(
            &projects,
            &plan,
            &baseline,
            &candidate,
            &CvOptions {
                parallel,
                ..CvOptions::default()
            },
        )
        .unwrap()
        .to_json()
    };
    assert_eq!(run(true), run(false));
}
