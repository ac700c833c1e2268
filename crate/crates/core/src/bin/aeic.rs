//! Command-line front end: train, evaluate, estimate α and reproduce the
//! figure presets.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numeric failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aeic::autoencoder::{AeModel, ErrorCounts};
use aeic::harness::{
    self, evaluate_system, records_to_csv, reward_series, ser_series, train_system, write_file,
    write_plot_data, ExperimentConfig, Preset, SerRecord, TrainedSystem,
};
use aeic::{par, Error};

#[derive(Parser)]
#[command(name = "aeic", version, about = "Learned PHY over the Gaussian interference channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// key=value configuration file, applied before command-line flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo symbols per SER point.
    #[arg(long)]
    symbols: Option<usize>,
    /// Worker threads; 1 runs serially.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override any configuration key, e.g. `--set epochs=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write its checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
        /// Training α, or `none` for AWGN-only (blind) training.
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Evaluate a checkpoint over the Eb/N0 grid.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated evaluation α values; omit for no interference.
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Estimate α from pilots and decode the payload.
    Adl {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// α of the simulated received channel.
        #[arg(long = "alpha-true")]
        alpha_true: f64,
        /// Eb/N0 of the received channel in dB.
        #[arg(long, default_value_t = 7.0)]
        ebn0: f64,
    },
    /// Run a figure preset.
    Reproduce {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=6))]
        figure: u32,
    },
}

fn configure(preset: Preset, common: &Common) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::preset(preset);
    if let Some(path) = &common.config {
        config.apply_file(path)?;
        if config.preset != preset {
            return Err(Error::Config(format!(
                "config file selects preset {}, command needs {preset}",
                config.preset
            )));
        }
    }
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        config.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_path = out.clone();
    }
    if let Some(symbols) = common.symbols {
        config.symbols_per_point = symbols;
    }
    match common.jobs {
        Some(0) => return Err(Error::Config("--jobs must be ≥ 1".into())),
        Some(1) => par::set_mode(par::Mode::Serial),
        Some(n) => par::set_jobs(n),
        None => {}
    }
    config.validate()?;
    Ok(config)
}

fn report(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn train(common: &Common, alpha: Option<&str>) -> Result<(), Error> {
    let mut config = configure(Preset::Custom, common)?;
    if let Some(a) = alpha {
        config.set("alpha_train", a)?;
    }
    let system = train_system(&config, config.alpha_train, "cli")?;
    let mut files = vec![config.out_path.join("model.aem")];
    harness::save_checkpoint(&system.model, &files[0])?;
    for (i, partner) in system.partners.iter().enumerate() {
        let path = config.out_path.join(format!("partner{}.aem", i + 1));
        harness::save_checkpoint(partner, &path)?;
        files.push(path);
    }
    report(&files);
    Ok(())
}

fn eval(common: &Common, model: &PathBuf, alpha: Option<&str>) -> Result<(), Error> {
    let mut config = configure(Preset::Custom, common)?;
    if let Some(a) = alpha {
        config.set("alpha_eval", a)?;
    }
    let system = TrainedSystem {
        model: harness::load_checkpoint(model)?,
        partners: Vec::new(),
    };
    let evals: Vec<Option<f64>> = if config.alpha_eval_list.is_empty() {
        vec![None]
    } else {
        config.alpha_eval_list.iter().copied().map(Some).collect()
    };
    let mut records = Vec::new();
    for a in evals {
        let label = format!("eval/{}", a.map_or_else(|| "none".into(), |x| x.to_string()));
        for p in evaluate_system(&config, &system, a, &label)? {
            records.push(SerRecord::new("eval", config.alpha_train, a, &p, config.ae.m_users, config.master_seed)?);
        }
    }
    let mut files = vec![write_file(&config.out_path.join("eval.csv"), &records_to_csv(&records)?)?];
    files.extend(write_plot_data(&config.out_path, "eval", &ser_series(&records))?);
    report(&files);
    Ok(())
}

fn adl(common: &Common, model: &PathBuf, alpha_true: f64, ebn0: f64) -> Result<(), Error> {
    let config = configure(Preset::Custom, common)?;
    let base = harness::load_checkpoint(model)?;
    let bank = aeic::adl::build_decoder_bank(
        &base,
        &config.adl,
        config.ae.train_ebn0_db,
        config.ae.m_users,
        harness::derive_seed(config.master_seed, "bank/cli"),
    )?;
    let trial = harness::adl_trial(&config, &base, &bank, alpha_true, ebn0, "cli")?;
    let records = adl_records(&config, &base, &trial, alpha_true, ebn0)?;
    let dir = &config.out_path;
    let mut files = vec![
        write_file(&dir.join("adl.csv"), &records_to_csv(&records)?)?,
        write_file(&dir.join("adl_reward.csv"), &trial.table.to_csv())?,
    ];
    files.extend(write_plot_data(
        dir,
        "adl",
        &[reward_series("reward", &format!("normalized reward, true alpha {alpha_true}"), &trial.table)],
    )?);
    println!("alpha_hat = {}", trial.alpha_hat);
    report(&files);
    Ok(())
}

fn adl_records(
    config: &ExperimentConfig,
    base: &AeModel,
    trial: &harness::AdlTrial,
    alpha_true: f64,
    ebn0: f64,
) -> Result<Vec<SerRecord>, Error> {
    let point = |c: ErrorCounts| aeic::autoencoder::SerPoint {
        ebn0_db: ebn0,
        ser: c.ser(),
        ber: c.ber(base.k()),
        n_symbols: c.symbols,
        symbol_errors: c.symbol_errors,
        bit_errors: c.bit_errors,
        seed: config.master_seed,
    };
    let row = |name: &str, c: ErrorCounts| {
        SerRecord::new(name, config.alpha_train, Some(alpha_true), &point(c), config.ae.m_users, config.master_seed)
    };
    let mut with = row("adl_with_adl", trial.with_adl)?;
    with.alpha_predicted = Some(trial.alpha_hat);
    Ok(vec![row("adl_without_adl", trial.without_adl)?, with, row("adl_known_alpha", trial.known_alpha)?])
}

fn reproduce(common: &Common, figure: u32) -> Result<(), Error> {
    let config = configure(Preset::from_figure(figure)?, common)?;
    let (_, files) = harness::run_preset(&config)?;
    report(&files);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Train { common, alpha } => train(common, alpha.as_deref()),
        Command::Eval { common, model, alpha } => eval(common, model, alpha.as_deref()),
        Command::Adl {
            common,
            model,
            alpha_true,
            ebn0,
        } => adl(common, model, *alpha_true, *ebn0),
        Command::Reproduce { common, figure } => reproduce(common, *figure),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}
