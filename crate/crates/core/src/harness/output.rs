use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::adl::RewardTable;
use crate::autoencoder::SerPoint;
use crate::channel::classify_regime;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "experiment,alpha_train,alpha_eval,alpha_predicted,ebn0_db,ser,ber,n_symbols,regime,seed";

/// One CSV row. `None` fields are written empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerRecord {
    pub experiment: String,
    pub alpha_train: Option<f64>,
    pub alpha_eval: Option<f64>,
    pub alpha_predicted: Option<f64>,
    pub ebn0_db: f64,
    pub ser: f64,
    pub ber: f64,
    pub n_symbols: usize,
    /// Regime of `alpha_eval`, empty without interference.
    pub regime: String,
    pub seed: u64,
}

impl SerRecord {
    pub fn new(
        experiment: &str,
        alpha_train: Option<f64>,
        alpha_eval: Option<f64>,
        point: &SerPoint,
        m_users: usize,
        seed: u64,
    ) -> Result<Self> {
        let regime = match alpha_eval {
            Some(a) => classify_regime(a, m_users)?.regime.to_string(),
            None => String::new(),
        };
        Ok(SerRecord {
            experiment: experiment.to_string(),
            alpha_train,
            alpha_eval,
            alpha_predicted: None,
            ebn0_db: point.ebn0_db,
            ser: point.ser,
            ber: point.ber,
            n_symbols: point.n_symbols,
            regime,
            seed,
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse {
        offset: e.position().map_or(0, |p| p.byte() as usize),
        message: e.to_string(),
    }
}

/// Serializes rows under [`CSV_HEADER`] (written even with no rows).
pub fn records_to_csv(records: &[SerRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Argument(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Argument(e.to_string()))
}

/// Parses a CSV written by [`records_to_csv`].
pub fn records_from_csv(text: &str) -> Result<Vec<SerRecord>> {
    if text.lines().next() != Some(CSV_HEADER) {
        return Err(Error::Parse {
            offset: 0,
            message: "missing or unexpected CSV header".into(),
        });
    }
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

/// A two-column series for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    /// File stem, unique within a run.
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl PlotSeries {
    pub fn to_dat(&self) -> String {
        let mut s = format!("# {}\n# {} {}\n", self.title, self.x_label, self.y_label);
        for (x, y) in &self.points {
            let _ = writeln!(s, "{x} {y}");
        }
        s
    }
}

/// SER-versus-Eb/N0 series, one per distinct (experiment, α_train, α_eval)
/// in first-appearance order.
pub fn ser_series(records: &[SerRecord]) -> Vec<PlotSeries> {
    let mut series: Vec<PlotSeries> = Vec::new();
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
    for r in records {
        let name = format!("{}_train{}_eval{}", r.experiment, opt(r.alpha_train), opt(r.alpha_eval));
        let point = (r.ebn0_db, r.ser);
        match series.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push(point),
            None => series.push(PlotSeries {
                title: format!(
                    "{}: alpha_train={} alpha_eval={}",
                    r.experiment,
                    opt(r.alpha_train),
                    opt(r.alpha_eval)
                ),
                name,
                x_label: "ebn0_db".into(),
                y_label: "ser".into(),
                points: vec![point],
            }),
        }
    }
    series
}

/// Normalized reward versus candidate α.
pub fn reward_series(name: &str, title: &str, table: &RewardTable) -> PlotSeries {
    PlotSeries {
        name: name.to_string(),
        title: title.to_string(),
        x_label: "alpha_candidate".into(),
        y_label: "normalized_reward".into(),
        points: table.grid.iter().copied().zip(table.normalized_rewards.iter().copied()).collect(),
    }
}

/// Writes `<stem>.dat` per series and `<prefix>_index.txt` listing them as
/// `file<TAB>title` lines. Returns the written paths.
pub fn write_plot_data(dir: &Path, prefix: &str, series: &[PlotSeries]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(series.len() + 1);
    let mut index = String::new();
    for s in series {
        let file = format!("{prefix}_{}.dat", s.name);
        written.push(write_file(&dir.join(&file), &s.to_dat())?);
        let _ = writeln!(index, "{file}\t{}", s.title);
    }
    written.push(write_file(&dir.join(format!("{prefix}_index.txt")), &index)?);
    Ok(written)
}

pub fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(ebn0_db: f64, ser: f64) -> SerPoint {
        SerPoint {
            ebn0_db,
            ser,
            ber: ser / 2.0,
            n_symbols: 10_000,
            symbol_errors: (ser * 1e4) as usize,
            bit_errors: 0,
            seed: 1,
        }
    }

    #[test]
    fn csv_round_trip_and_empty_fields() {
        let mut a = SerRecord::new("fig2_blind", None, Some(0.2), &point(7.0, 0.01), 2, 42).unwrap();
        a.alpha_predicted = Some(0.25);
        let b = SerRecord::new("fig2_no_interference", None, None, &point(-2.0, 0.5), 2, 42).unwrap();
        let csv = records_to_csv(&[a.clone(), b.clone()]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("fig2_blind,,0.2,0.25,7.0,0.01,0.005,10000,noisy,42"));
        assert_eq!(lines.next(), Some("fig2_no_interference,,,,-2.0,0.5,0.25,10000,,42"));
        assert_eq!(records_to_csv(&[]).unwrap(), format!("{CSV_HEADER}\n"));
        assert_eq!(records_from_csv(&csv).unwrap(), vec![a, b]);
    }

    #[test]
    fn regime_matches_alpha_eval() {
        let r = SerRecord::new("x", Some(2.0), Some(2.5), &point(7.0, 0.1), 2, 0).unwrap();
        assert_eq!(r.regime, "very_strong");
        let r = SerRecord::new("x", Some(2.0), Some(1.0), &point(7.0, 0.1), 2, 0).unwrap();
        assert_eq!(r.regime, "boundary_alpha_1");
    }

    #[test]
    fn malformed_csv_reports_offset() {
        assert!(records_from_csv("nope\n").is_err());
        let good = "x,,,,7,0.1,0.1,10,,1";
        let text = format!("{CSV_HEADER}\n{good}\nx,,,,7,zz,0.1,10,,1\n");
        match records_from_csv(&text) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, CSV_HEADER.len() + good.len() + 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn series_group_by_curve() {
        let rs = vec![
            SerRecord::new("e", Some(0.5), Some(0.5), &point(0.0, 0.2), 2, 0).unwrap(),
            SerRecord::new("e", Some(0.5), Some(1.0), &point(0.0, 0.3), 2, 0).unwrap(),
            SerRecord::new("e", Some(0.5), Some(0.5), &point(1.0, 0.1), 2, 0).unwrap(),
        ];
        let s = ser_series(&rs);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].points, vec![(0.0, 0.2), (1.0, 0.1)]);
        assert_eq!(s[0].name, "e_train0.5_eval0.5");
        assert!(s[0].to_dat().ends_with("0 0.2\n1 0.1\n"));
    }

    #[test]
    fn plot_files_and_index() {
        let dir = tempfile::tempdir().unwrap();
        let s = PlotSeries {
            name: "a".into(),
            title: "curve a".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            points: vec![(1.0, 2.0)],
        };
        let paths = write_plot_data(dir.path(), "fig9", &[s]).unwrap();
        assert_eq!(paths.len(), 2);
        let index = std::fs::read_to_string(dir.path().join("fig9_index.txt")).unwrap();
        assert_eq!(index, "fig9_a.dat\tcurve a\n");
    }
}
