use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adl::AdlConfig;
use crate::autoencoder::{AeConfig, MIN_SYMBOLS_PER_POINT};
use crate::error::{Error, Result};

/// Default Monte Carlo size per SER point for presets.
pub const DEFAULT_SYMBOLS_PER_POINT: usize = 200_000;

/// Named experiment layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Custom,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Custom => "custom",
        }
    }

    pub fn from_figure(figure: u32) -> Result<Self> {
        match figure {
            2 => Ok(Preset::Fig2),
            3 => Ok(Preset::Fig3),
            4 => Ok(Preset::Fig4),
            5 => Ok(Preset::Fig5),
            6 => Ok(Preset::Fig6),
            other => Err(Error::Argument(format!("no preset for figure {other} (expected 2–6)"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig2" => Preset::Fig2,
            "fig3" => Preset::Fig3,
            "fig4" => Preset::Fig4,
            "fig5" => Preset::Fig5,
            "fig6" => Preset::Fig6,
            "custom" => Preset::Custom,
            other => return Err(Error::Argument(format!("unknown preset `{other}`"))),
        })
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub ae: AeConfig,
    pub adl: AdlConfig,
    pub ebn0_grid_db: Vec<f64>,
    /// Training α of the model; `None` trains blind (AWGN only).
    pub alpha_train: Option<f64>,
    /// Evaluation α values; empty evaluates without interference.
    pub alpha_eval_list: Vec<f64>,
    /// True α values for the estimator presets.
    pub alpha_true_list: Vec<f64>,
    /// Train every user with its own transmitter/receiver instead of a
    /// shared transmitter.
    pub joint: bool,
    pub symbols_per_point: usize,
    pub master_seed: u64,
    pub out_path: PathBuf,
}

/// −2 … 10 dB in 1 dB steps.
pub fn default_ebn0_grid() -> Vec<f64> {
    (-2..=10).map(f64::from).collect()
}

impl ExperimentConfig {
    /// Fully specified configuration of a preset.
    pub fn preset(preset: Preset) -> Self {
        let mut c = ExperimentConfig {
            preset,
            ae: AeConfig::default(),
            adl: AdlConfig::default(),
            ebn0_grid_db: default_ebn0_grid(),
            alpha_train: None,
            alpha_eval_list: Vec::new(),
            alpha_true_list: Vec::new(),
            joint: false,
            symbols_per_point: DEFAULT_SYMBOLS_PER_POINT,
            master_seed: 0,
            out_path: PathBuf::from("out"),
        };
        match preset {
            Preset::Fig2 => {
                c.alpha_eval_list = vec![0.2, 0.4, 0.6, 0.8];
            }
            Preset::Fig3 => {
                c.alpha_train = Some(0.5);
                c.alpha_eval_list = vec![0.5, 1.0, 1.5, 2.0, 2.5];
            }
            Preset::Fig4 => {
                c.alpha_train = Some(2.0);
                c.alpha_eval_list = vec![2.0, 2.2, 2.5];
            }
            Preset::Fig5 => {
                c.ebn0_grid_db = vec![7.0];
                c.alpha_true_list = vec![1.5, 2.0];
            }
            Preset::Fig6 => {
                // received α = 2α reaches 4, beyond the default grid
                c.ebn0_grid_db = vec![-2.0, 1.0, 4.0, 7.0, 10.0];
                c.alpha_true_list = vec![1.5, 2.0];
                c.adl.grid_max = 4.5;
            }
            Preset::Custom => {}
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.ae.validate()?;
        self.adl.validate()?;
        if self.symbols_per_point < MIN_SYMBOLS_PER_POINT {
            return Err(Error::Config(format!(
                "symbols_per_point must be ≥ {MIN_SYMBOLS_PER_POINT}, got {}",
                self.symbols_per_point
            )));
        }
        if self.ebn0_grid_db.is_empty() || self.ebn0_grid_db.iter().any(|e| !e.is_finite()) {
            return Err(Error::Config("ebn0_grid must be a nonempty list of finite values".into()));
        }
        let alphas = self.alpha_train.iter().chain(&self.alpha_eval_list).chain(&self.alpha_true_list);
        if let Some(a) = alphas.clone().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return Err(Error::Config(format!("α must be finite and ≥ 0, got {a}")));
        }
        if matches!(self.preset, Preset::Fig5 | Preset::Fig6) && self.alpha_true_list.is_empty() {
            return Err(Error::Config("alpha_true must list at least one value".into()));
        }
        Ok(())
    }

    /// Reads a key=value file on top of `self`.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text)
    }

    /// Applies `key = value` lines; `#` starts a comment. The `preset` key,
    /// if present, must come first and resets all other fields.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", number + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", number + 1)))?;
        }
        Ok(())
    }

    /// Sets one configuration key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "preset" => {
                let out = std::mem::take(&mut self.out_path);
                let seed = self.master_seed;
                *self = ExperimentConfig::preset(value.parse()?);
                self.out_path = out;
                self.master_seed = seed;
            }
            "seed" => self.master_seed = parse(key, value)?,
            "out" => self.out_path = PathBuf::from(value),
            "symbols" => self.symbols_per_point = parse(key, value)?,
            "ebn0_grid" => self.ebn0_grid_db = parse_list(key, value)?,
            "alpha_train" => self.alpha_train = parse_optional(key, value)?,
            "alpha_eval" => self.alpha_eval_list = parse_list(key, value)?,
            "alpha_true" => self.alpha_true_list = parse_list(key, value)?,
            "joint" => self.joint = parse(key, value)?,
            "n" => self.ae.n = parse(key, value)?,
            "k" => self.ae.k = parse(key, value)?,
            "m_users" => self.ae.m_users = parse(key, value)?,
            "train_ebn0_db" => self.ae.train_ebn0_db = parse(key, value)?,
            "learning_rate" => self.ae.learning_rate = parse(key, value)?,
            "batch_size" => self.ae.batch_size = parse(key, value)?,
            "epochs" => self.ae.epochs = parse(key, value)?,
            "steps_per_epoch" => self.ae.steps_per_epoch = parse(key, value)?,
            "adl.grid_min" => self.adl.grid_min = parse(key, value)?,
            "adl.grid_max" => self.adl.grid_max = parse(key, value)?,
            "adl.grid_step" => self.adl.grid_step = parse(key, value)?,
            "adl.confidence_fraction" => self.adl.confidence_fraction = parse(key, value)?,
            "adl.group_count" => self.adl.group_count = parse(key, value)?,
            "adl.pilot_ratio" => self.adl.pilot_ratio = parse(key, value)?,
            "adl.symbols_per_group" => self.adl.symbols_per_group = parse(key, value)?,
            "adl.adapt_steps" => self.adl.adapt_steps = parse(key, value)?,
            "adl.adapt_batch" => self.adl.adapt_batch = parse(key, value)?,
            "adl.adapt_lr" => self.adl.adapt_lr = parse(key, value)?,
            "adl.adapt_steps_online" => self.adl.adapt_steps_online = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

/// `none` (or empty) → `None`.
fn parse_optional(key: &str, value: &str) -> Result<Option<f64>> {
    match value {
        "" | "none" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

/// Comma-separated values, or `start:step:stop` inclusive.
fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() || value == "none" {
        return Ok(Vec::new());
    }
    if let [start, step, stop] = value.split(':').collect::<Vec<_>>()[..] {
        let (start, step, stop): (f64, f64, f64) = (parse(key, start)?, parse(key, step)?, parse(key, stop)?);
        if !(step > 0.0) || stop < start {
            return Err(Error::Config(format!("bad range `{value}` for `{key}`")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Fig6] {
            ExperimentConfig::preset(p).validate().unwrap();
            assert_eq!(p.as_str().parse::<Preset>().unwrap(), p);
        }
        assert_eq!(default_ebn0_grid().len(), 13);
        assert!(Preset::from_figure(7).is_err());
    }

    #[test]
    fn file_overrides_fields() {
        let mut c = ExperimentConfig::preset(Preset::Fig2);
        c.apply_str(
            "# comment\npreset = fig3\nseed=7 # trailing\nalpha_eval = 0.5, 1.5\nebn0_grid = 0:2:6\nadl.group_count=5\nalpha_train=none\n",
        )
        .unwrap();
        assert_eq!(c.preset, Preset::Fig3);
        assert_eq!(c.master_seed, 7);
        assert_eq!(c.alpha_eval_list, vec![0.5, 1.5]);
        assert_eq!(c.ebn0_grid_db, vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(c.adl.group_count, 5);
        assert_eq!(c.alpha_train, None);
    }

    #[test]
    fn bad_lines_report_line_number() {
        let mut c = ExperimentConfig::preset(Preset::Custom);
        let e = c.apply_str("seed = 1\nnonsense\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(c.apply_str("colour = red").is_err());
        assert!(c.apply_str("seed = x").is_err());
        assert!(c.apply_str("ebn0_grid = 5:0:1").is_err());
    }

    #[test]
    fn validation_catches_small_budgets() {
        let mut c = ExperimentConfig::preset(Preset::Fig3);
        c.symbols_per_point = 10;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::preset(Preset::Fig5);
        c.alpha_true_list.clear();
        assert!(c.validate().is_err());
    }
}
