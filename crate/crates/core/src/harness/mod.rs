//! Experiment orchestration: configuration, figure presets, CSV and
//! plot-data output, checkpoints and seeded streams.

mod config;
mod output;
mod run;

pub use crate::autoencoder::{load_checkpoint, save_checkpoint};
pub use crate::rng::seed_streams;
pub use config::{default_ebn0_grid, ExperimentConfig, Preset, DEFAULT_SYMBOLS_PER_POINT};
pub use output::{
    records_from_csv, records_to_csv, reward_series, ser_series, write_file, write_plot_data, PlotSeries, SerRecord,
    CSV_HEADER,
};
pub use run::{
    adl_trial, derive_seed, estimator_setup, evaluate_system, run_experiment, run_preset, train_system, write_run,
    AdlTrial, RunOutput, TrainedSystem,
};
