use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::CurvePoint;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "sweep_value",
    "ber_bob",
    "ci95_bob",
    "ber_eve",
    "ci95_eve",
    "mse_bob",
    "mse_eve",
    "trials",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// CSV text; floats use the shortest representation that round-trips.
pub fn to_csv(points: &[CurvePoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for p in points {
        w.write_record([
            p.sweep_value.to_string(),
            p.ber_bob.to_string(),
            p.ci95_bob.to_string(),
            p.ber_eve.to_string(),
            p.ci95_eve.to_string(),
            p.mse_bob.to_string(),
            p.mse_eve.to_string(),
            p.trials_run.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(format!("CSV buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn to_json(points: &[CurvePoint]) -> Result<String> {
    serde_json::to_string_pretty(points).map_err(|e| Error::Input(format!("JSON encoding: {e}")))
}

pub fn render(points: &[CurvePoint], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => to_csv(points),
        OutputFormat::Json => to_json(points).map(|mut s| {
            s.push('\n');
            s
        }),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `points` to `path`.
pub fn emit_results(points: &[CurvePoint], path: &Path, format: OutputFormat) -> Result<()> {
    let text = render(points, format)?;
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Gnuplot script plotting both receivers' BER from a results CSV.
pub fn plot_script(csv_path: &str, x_label: &str, title: &str) -> String {
    let quoted = csv_path.replace('\'', "''");
    format!(
        "set datafile separator ','\n\
         set title '{title}'\n\
         set xlabel '{x_label}'\n\
         set ylabel 'BER'\n\
         set logscale y\n\
         set grid\n\
         set key bottom left\n\
         plot '{quoted}' skip 1 using 1:2:3 with yerrorlines title 'Bob', \\\n     \
         '{quoted}' skip 1 using 1:4:5 with yerrorlines title 'Eve'\n"
    )
}

pub fn emit_plot_script(path: &Path, csv_path: &str, x_label: &str, title: &str) -> Result<()> {
    std::fs::write(path, plot_script(csv_path, x_label, title)).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point() -> CurvePoint {
        CurvePoint {
            sweep_value: 12.0,
            ber_bob: 0.1 + 0.2,
            ci95_bob: 1e-3,
            ber_eve: 0.25,
            ci95_eve: 2e-3,
            mse_bob: 7.5,
            mse_eve: 40.0,
            trials_run: 10,
            bit_errors_bob: 77,
            bit_errors_eve: 64,
            bits_total: 256,
            infeasible_trials: 0,
            diagnostic: None,
        }
    }

    #[test]
    fn empty_list_is_header_only() {
        assert_eq!(
            to_csv(&[]).unwrap(),
            "sweep_value,ber_bob,ci95_bob,ber_eve,ci95_eve,mse_bob,mse_eve,trials\n"
        );
    }

    #[test]
    fn one_point_round_trips_through_csv() {
        let text = to_csv(&[point()]).unwrap();
        assert_eq!(text.lines().count(), 2);
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rec = r.records().next().unwrap().unwrap();
        let ber: f64 = rec[1].parse().unwrap();
        assert_eq!(ber, 0.1 + 0.2);
        assert_eq!(&rec[7], "10");
    }

    #[test]
    fn json_mirrors_fields() {
        let text = to_json(&[point()]).unwrap();
        let back: Vec<CurvePoint> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![point()]);
        assert!(text.contains("\"ber_bob\""));
    }

    #[test]
    fn write_errors_carry_the_path() {
        let err = emit_results(&[], Path::new("/nonexistent-dir/out.csv"), OutputFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }

    #[test]
    fn plot_script_references_the_csv() {
        let s = plot_script("fig2.csv", "P_t (dB)", "fig2");
        assert!(s.contains("'fig2.csv'"));
        assert!(s.contains("set logscale y"));
    }
}
