use aeic::adl::{build_decoder_bank, AdlConfig};
use aeic::autoencoder::{evaluate_ser, train_end_to_end, AeConfig, AeModel, EvalPlan};
use aeic::harness::{records_to_csv, run_experiment, ExperimentConfig, Preset};
use aeic::par::{self, Mode};
use aeic::rng::SimRng;
use std::sync::Mutex;

// The execution mode is process-wide; tests that flip it take this lock.
static MODE: Mutex<()> = Mutex::new(());

fn in_mode<T>(mode: Mode, f: impl FnOnce() -> T) -> T {
    par::set_mode(mode);
    let out = f();
    par::set_mode(Mode::Parallel);
    out
}

fn small_model() -> AeModel {
    let cfg = AeConfig {
        epochs: 5,
        steps_per_epoch: 40,
        learning_rate: 0.01,
        train_alpha: Some(0.5),
        ..AeConfig::default()
    };
    train_end_to_end(&cfg, &mut SimRng::stream(3, "train")).unwrap().model
}

#[test]
fn ser_curve_identical_serial_and_parallel() {
    let _guard = MODE.lock().unwrap();
    let model = small_model();
    let plan = EvalPlan {
        m_users: 2,
        alpha: Some(0.5),
        ebn0_grid: vec![0.0, 4.0, 8.0],
        symbols_per_point: 35_000,
        seed: 11,
    };
    let serial = in_mode(Mode::Serial, || evaluate_ser(&model, &plan).unwrap());
    let parallel = in_mode(Mode::Parallel, || evaluate_ser(&model, &plan).unwrap());
    assert_eq!(serial, parallel);
    assert_eq!(serial[0].n_symbols, 35_000);
}

#[test]
fn decoder_bank_identical_serial_and_parallel() {
    let _guard = MODE.lock().unwrap();
    let model = small_model();
    let cfg = AdlConfig {
        grid_min: 0.5,
        grid_max: 2.0,
        grid_step: 0.5,
        adapt_steps: 10,
        adapt_batch: 64,
        ..AdlConfig::default()
    };
    let serial = in_mode(Mode::Serial, || build_decoder_bank(&model, &cfg, 7.0, 2, 4).unwrap());
    let parallel = in_mode(Mode::Parallel, || build_decoder_bank(&model, &cfg, 7.0, 2, 4).unwrap());
    assert_eq!(serial, parallel);
}

#[test]
fn preset_csv_identical_serial_and_parallel() {
    let _guard = MODE.lock().unwrap();
    let mut cfg = ExperimentConfig::preset(Preset::Fig3);
    cfg.ae.epochs = 3;
    cfg.ae.steps_per_epoch = 20;
    cfg.symbols_per_point = 20_000;
    cfg.ebn0_grid_db = vec![0.0, 7.0];
    cfg.master_seed = 42;
    let serial = in_mode(Mode::Serial, || records_to_csv(&run_experiment(&cfg).unwrap().records).unwrap());
    let parallel = in_mode(Mode::Parallel, || records_to_csv(&run_experiment(&cfg).unwrap().records).unwrap());
    assert_eq!(serial, parallel);
    let again = records_to_csv(&run_experiment(&cfg).unwrap().records).unwrap();
    assert_eq!(serial, again);
}

#[test]
fn different_seeds_give_different_curves() {
    let model = small_model();
    let plan = |seed| EvalPlan {
        m_users: 2,
        alpha: Some(0.5),
        ebn0_grid: vec![4.0],
        symbols_per_point: 10_000,
        seed,
    };
    let a = evaluate_ser(&model, &plan(1)).unwrap();
    let b = evaluate_ser(&model, &plan(2)).unwrap();
    assert_ne!(a[0].symbol_errors, b[0].symbol_errors);
}
