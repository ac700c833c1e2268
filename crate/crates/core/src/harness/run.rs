use std::path::PathBuf;

use rand::RngCore;

use super::config::{ExperimentConfig, Preset};
use super::output::{
    records_to_csv, reward_series, ser_series, write_file, write_plot_data, PlotSeries, SerRecord,
};
use crate::adl::{build_decoder_bank, run_adl, transmit_stream, update_receiver, RewardTable};
use crate::autoencoder::{
    decode_with, evaluate_link, train_end_to_end, train_joint, AeModel, ErrorCounts, EvalPlan, Link, SerPoint,
};
use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Seed of an independent sub-experiment.
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    SimRng::stream(master_seed, label).next_u64()
}

/// A trained user plus, in joint mode, the other users' models.
#[derive(Debug, Clone)]
pub struct TrainedSystem {
    pub model: AeModel,
    /// Empty when every interferer shares `model`'s transmitter.
    pub partners: Vec<AeModel>,
}

impl TrainedSystem {
    pub fn link(&self, m_users: usize) -> Result<Link> {
        if self.partners.is_empty() {
            Link::shared(&self.model, m_users)
        } else {
            Link::with_partners(&self.model, &self.partners.iter().collect::<Vec<_>>())
        }
    }
}

/// Trains the model for `alpha_train` on the stream labelled `label`.
pub fn train_system(config: &ExperimentConfig, alpha_train: Option<f64>, label: &str) -> Result<TrainedSystem> {
    let ae = crate::autoencoder::AeConfig {
        train_alpha: alpha_train,
        ..config.ae.clone()
    };
    let mut rng = SimRng::stream(config.master_seed, &format!("train/{label}"));
    log::info!("training {label} (alpha_train = {alpha_train:?}, joint = {})", config.joint);
    if config.joint {
        let mut users = train_joint(&ae, &mut rng)?.into_iter().map(|t| t.model);
        let model = users.next().ok_or(Error::State("joint training returned no users"))?;
        Ok(TrainedSystem {
            model,
            partners: users.collect(),
        })
    } else {
        Ok(TrainedSystem {
            model: train_end_to_end(&ae, &mut rng)?.model,
            partners: Vec::new(),
        })
    }
}

/// SER curve of `system` at `alpha_eval` over the configured grid.
pub fn evaluate_system(
    config: &ExperimentConfig,
    system: &TrainedSystem,
    alpha_eval: Option<f64>,
    label: &str,
) -> Result<Vec<SerPoint>> {
    let plan = EvalPlan {
        m_users: config.ae.m_users,
        alpha: alpha_eval,
        ebn0_grid: config.ebn0_grid_db.clone(),
        symbols_per_point: config.symbols_per_point,
        seed: derive_seed(config.master_seed, &format!("eval/{label}")),
    };
    let model = &system.model;
    evaluate_link(&system.link(config.ae.m_users)?, model.n(), model.k(), model.receiver(), &plan)
}

/// In-memory results of a preset.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub records: Vec<SerRecord>,
    /// Reward tables keyed by a file-name-safe label.
    pub reward_tables: Vec<(String, RewardTable)>,
}

/// Runs a preset without touching the filesystem.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut out = RunOutput::default();
    match config.preset {
        Preset::Fig2 => run_fig2(config, &mut out)?,
        Preset::Fig3 | Preset::Fig4 | Preset::Custom => run_offsets(config, &mut out)?,
        Preset::Fig5 => run_fig5(config, &mut out)?,
        Preset::Fig6 => run_fig6(config, &mut out)?,
    }
    Ok(out)
}

fn push_curve(
    config: &ExperimentConfig,
    out: &mut RunOutput,
    experiment: &str,
    alpha_train: Option<f64>,
    alpha_eval: Option<f64>,
    points: &[SerPoint],
) -> Result<()> {
    for p in points {
        out.records.push(SerRecord::new(
            experiment,
            alpha_train,
            alpha_eval,
            p,
            config.ae.m_users,
            config.master_seed,
        )?);
    }
    Ok(())
}

fn run_fig2(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let blind = train_system(config, None, "fig2/blind")?;
    let points = evaluate_system(config, &blind, None, "fig2/no_interference")?;
    push_curve(config, out, "fig2_no_interference", None, None, &points)?;
    for &a in &config.alpha_eval_list {
        let points = evaluate_system(config, &blind, Some(a), &format!("fig2/blind/{a}"))?;
        push_curve(config, out, "fig2_blind", None, Some(a), &points)?;
    }
    for &a in &config.alpha_eval_list {
        let informed = train_system(config, Some(a), &format!("fig2/informed/{a}"))?;
        let points = evaluate_system(config, &informed, Some(a), &format!("fig2/informed/{a}"))?;
        push_curve(config, out, "fig2_informed", Some(a), Some(a), &points)?;
    }
    Ok(())
}

fn run_offsets(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let name = config.preset.as_str();
    let experiment = format!("{name}_offset");
    let system = train_system(config, config.alpha_train, name)?;
    let evals: Vec<Option<f64>> = if config.alpha_eval_list.is_empty() {
        vec![None]
    } else {
        config.alpha_eval_list.iter().copied().map(Some).collect()
    };
    for a in evals {
        let label = format!("{name}/{}", a.map_or_else(|| "none".into(), |x| x.to_string()));
        let points = evaluate_system(config, &system, a, &label)?;
        push_curve(config, out, &experiment, config.alpha_train, a, &points)?;
    }
    Ok(())
}

fn require_shared(config: &ExperimentConfig) -> Result<()> {
    if config.joint {
        return Err(Error::Config(format!(
            "preset {} estimates α for a shared transmitter; joint training is not supported",
            config.preset
        )));
    }
    Ok(())
}

fn payload_point(counts: ErrorCounts, ebn0_db: f64, k: usize, seed: u64) -> SerPoint {
    SerPoint {
        ebn0_db,
        ser: counts.ser(),
        ber: counts.ber(k),
        n_symbols: counts.symbols,
        symbol_errors: counts.symbol_errors,
        bit_errors: counts.bit_errors,
        seed,
    }
}

/// Outcome of one estimator run on a single received stream.
#[derive(Debug, Clone)]
pub struct AdlTrial {
    pub alpha_hat: f64,
    pub table: RewardTable,
    pub with_adl: ErrorCounts,
    pub without_adl: ErrorCounts,
    pub known_alpha: ErrorCounts,
}

/// Sends a pilot+payload stream through the channel at `alpha_true` and
/// decodes it three ways: the base receiver, the estimator, and the
/// receiver updated with the true α.
pub fn adl_trial(
    config: &ExperimentConfig,
    base: &AeModel,
    bank: &crate::adl::DecoderBank,
    alpha_true: f64,
    ebn0_db: f64,
    label: &str,
) -> Result<AdlTrial> {
    let m = config.ae.m_users;
    let channel = ChannelSpec::new(m, alpha_true, ebn0_db, base.n(), base.k(), config.master_seed)?;
    let mut rng = SimRng::stream(config.master_seed, &format!("stream/{label}"));
    let stream = transmit_stream(&Link::shared(base, m)?, &channel, &config.adl, &mut rng)?;
    let seed = derive_seed(config.master_seed, &format!("adl/{label}"));
    let outcome = run_adl(base, bank, &stream, &channel, &config.adl, seed)?;
    let base_decisions = decode_with(base.receiver(), &stream.payload_received)?;
    let known = update_receiver(base, bank, alpha_true, &channel, &config.adl, seed)?;
    let known_decisions = decode_with(&known, &stream.payload_received)?;
    Ok(AdlTrial {
        alpha_hat: outcome.alpha_hat,
        with_adl: outcome.payload_errors(&stream),
        without_adl: ErrorCounts::tally(&stream.payload_messages, &base_decisions),
        known_alpha: ErrorCounts::tally(&stream.payload_messages, &known_decisions),
        table: outcome.table,
    })
}

/// Trains at `alpha_train` and builds the decoder bank at the training SNR.
pub fn estimator_setup(
    config: &ExperimentConfig,
    alpha_train: f64,
    label: &str,
) -> Result<(AeModel, crate::adl::DecoderBank)> {
    let model = train_system(config, Some(alpha_train), label)?.model;
    log::info!("building decoder bank for {label}");
    let bank = build_decoder_bank(
        &model,
        &config.adl,
        config.ae.train_ebn0_db,
        config.ae.m_users,
        derive_seed(config.master_seed, &format!("bank/{label}")),
    )?;
    Ok((model, bank))
}

fn run_fig5(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    require_shared(config)?;
    for &alpha in &config.alpha_true_list {
        let (model, bank) = estimator_setup(config, alpha, &format!("fig5/{alpha}"))?;
        for &ebn0 in &config.ebn0_grid_db {
            let trial = adl_trial(config, &model, &bank, alpha, ebn0, &format!("fig5/{alpha}/{ebn0}"))?;
            let p = payload_point(trial.with_adl, ebn0, model.k(), config.master_seed);
            let mut r = SerRecord::new("fig5_adl", Some(alpha), Some(alpha), &p, config.ae.m_users, config.master_seed)?;
            r.alpha_predicted = Some(trial.alpha_hat);
            out.records.push(r);
            out.reward_tables.push((format!("alpha{alpha}_ebn0{ebn0}"), trial.table));
        }
    }
    Ok(())
}

fn run_fig6(config: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    require_shared(config)?;
    let m = config.ae.m_users;
    let seed = config.master_seed;
    for &alpha in &config.alpha_true_list {
        let (model, bank) = estimator_setup(config, alpha, &format!("fig6/{alpha}"))?;
        let received = 2.0 * alpha;
        let mut rows = [Vec::new(), Vec::new(), Vec::new()];
        for &ebn0 in &config.ebn0_grid_db {
            let trial = adl_trial(config, &model, &bank, received, ebn0, &format!("fig6/{alpha}/{ebn0}"))?;
            let k = model.k();
            rows[0].push(SerRecord::new(
                "fig6_without_adl",
                Some(alpha),
                Some(received),
                &payload_point(trial.without_adl, ebn0, k, seed),
                m,
                seed,
            )?);
            let mut with = SerRecord::new(
                "fig6_with_adl",
                Some(alpha),
                Some(received),
                &payload_point(trial.with_adl, ebn0, k, seed),
                m,
                seed,
            )?;
            with.alpha_predicted = Some(trial.alpha_hat);
            rows[1].push(with);
            rows[2].push(SerRecord::new(
                "fig6_known_alpha",
                Some(alpha),
                Some(received),
                &payload_point(trial.known_alpha, ebn0, k, seed),
                m,
                seed,
            )?);
            out.reward_tables.push((format!("alpha{alpha}_ebn0{ebn0}"), trial.table));
        }
        out.records.extend(rows.into_iter().flatten());
    }
    Ok(())
}

/// Writes `<preset>.csv`, one reward CSV per table and the plot data into
/// the configured output directory. Returns the written paths.
pub fn write_run(config: &ExperimentConfig, output: &RunOutput) -> Result<Vec<PathBuf>> {
    let dir = &config.out_path;
    let prefix = config.preset.as_str();
    let mut written = vec![write_file(&dir.join(format!("{prefix}.csv")), &records_to_csv(&output.records)?)?];
    let mut series: Vec<PlotSeries> = ser_series(&output.records);
    for (label, table) in &output.reward_tables {
        written.push(write_file(&dir.join(format!("{prefix}_reward_{label}.csv")), &table.to_csv())?);
        series.push(reward_series(
            &format!("reward_{label}"),
            &format!("normalized reward, {label}"),
            table,
        ));
    }
    written.extend(write_plot_data(dir, prefix, &series)?);
    Ok(written)
}

/// Runs a preset and writes all of its files.
pub fn run_preset(config: &ExperimentConfig) -> Result<(RunOutput, Vec<PathBuf>)> {
    let output = run_experiment(config)?;
    let files = write_run(config, &output)?;
    Ok((output, files))
}
