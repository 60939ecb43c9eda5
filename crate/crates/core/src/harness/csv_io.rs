use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{PsedError, Result};

use super::sweep::{FlaggedTrial, MseCurves, SweepResult, SweepRow};

pub const HEADER: [&str; 9] = ["detector", "n_r", "n_t", "snr_db", "trials", "symbol_errors", "ser", "mse", "seed"];
pub const MSE_EXTRA: [&str; 2] = ["mse_conv_asymptotic", "mse_psed_closed_form"];

/// Ten significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.9e}")
}

fn row_fields(r: &SweepRow) -> Vec<String> {
    vec![
        r.detector.to_string(),
        r.n_r.to_string(),
        r.n_t.to_string(),
        fmt_float(r.snr_db),
        r.trials.to_string(),
        r.symbol_errors.to_string(),
        fmt_float(r.ser),
        fmt_float(r.mse),
        r.seed.to_string(),
    ]
}

fn csv_err(e: csv::Error, path: &Path) -> PsedError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => PsedError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => PsedError::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(|e| csv_err(e, path))?;
    for r in &result.rows {
        w.write_record(row_fields(r)).map_err(|e| csv_err(e, path))?;
    }
    w.flush().map_err(|source| PsedError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| PsedError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_csv(result, create(path)?, path)
}

/// Sweep rows with the two analytic MSE columns appended.
pub fn write_mse_csv<W: Write>(curves: &MseCurves, out: W, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = HEADER.iter().chain(MSE_EXTRA.iter()).copied().collect();
    w.write_record(&header).map_err(|e| csv_err(e, path))?;
    for r in &curves.sweep.rows {
        let mut fields = row_fields(r);
        let a = curves.analytic_at(r.snr_db).expect("analytic point for every grid SNR");
        fields.push(fmt_float(a.mse_conv_asymptotic));
        fields.push(fmt_float(a.mse_psed_closed_form));
        w.write_record(&fields).map_err(|e| csv_err(e, path))?;
    }
    w.flush().map_err(|source| PsedError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_mse_csv(curves: &MseCurves, path: &Path) -> Result<()> {
    write_mse_csv(curves, create(path)?, path)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| PsedError::Parse {
        path: path.to_path_buf(),
        message: format!("line {}: bad `{}` value `{raw}`", rec.position().map_or(0, |p| p.line()), HEADER[i]),
    })
}

/// Reads a file written by [`write_csv`]. Extra trailing columns are ignored.
pub fn read_csv<R: Read>(input: R, path: &Path) -> Result<SweepResult> {
    let mut rd = csv::ReaderBuilder::new().flexible(false).from_reader(input);
    let header = rd.headers().map_err(|e| csv_err(e, path))?.clone();
    if header.iter().take(HEADER.len()).ne(HEADER.iter().copied()) {
        return Err(PsedError::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| csv_err(e, path))?;
        let detector: String = field(&rec, 0, path)?;
        rows.push(SweepRow {
            detector: detector.parse().map_err(|_| PsedError::Parse {
                path: path.to_path_buf(),
                message: format!("unknown detector `{detector}`"),
            })?,
            n_r: field(&rec, 1, path)?,
            n_t: field(&rec, 2, path)?,
            snr_db: field(&rec, 3, path)?,
            trials: field(&rec, 4, path)?,
            symbol_errors: field(&rec, 5, path)?,
            ser: field(&rec, 6, path)?,
            mse: field(&rec, 7, path)?,
            seed: field(&rec, 8, path)?,
        });
    }
    Ok(SweepResult { rows, flagged: Vec::new() })
}

pub fn load_csv(path: &Path) -> Result<SweepResult> {
    let f = File::open(path).map_err(|source| PsedError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(f, path)
}

/// One line per flagged trial: `detector,snr_db,trial,status,message`.
pub fn write_flagged_log(flagged: &[FlaggedTrial], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["detector", "snr_db", "trial", "status", "message"])
        .map_err(|e| csv_err(e, path))?;
    for f in flagged {
        let status = if f.dropped { "dropped" } else { "fallback" };
        w.write_record([f.detector.to_string(), fmt_float(f.snr_db), f.trial.to_string(), status.into(), f.message.clone()])
            .map_err(|e| csv_err(e, path))?;
    }
    w.flush().map_err(|source| PsedError::Io {
        path: path.to_path_buf(),
        source,
    })
}
