use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use psed::analysis::{
    asymptotic_sinr, complexity_count, mse_conv_asymptotic, mse_psed_bound, mse_psed_closed_form, pe_bpsk,
    rip_constant, rip_constant_sampled, ComplexityDetector, MseBoundForm,
};
use psed::harness::{
    emit_csv, emit_mse_csv, fmt_float, preset, run_mse_curves, run_sweep, write_csv, write_flagged_log,
    write_mse_csv, ConfigFile, FlaggedTrial, KBestSection, PsedSection,
};
use psed::model::{db_to_linear, generate_channel, ConstellationKind};
use psed::pipeline::default_sparsity;
use psed::rng::{stream, Purpose};
use psed::{CMatrix, PsedError, Result, C64};

#[derive(Parser)]
#[command(name = "psed", version, about = "Post sparse error detection: sweeps, analysis curves and complexity tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symbol error rate sweep over detectors and SNR.
    SweepSer(SweepArgs),
    /// Empirical LMMSE / PSED-LMMSE MSE next to the large-system curves (BPSK).
    SweepMse(SweepArgs),
    /// Complex-multiplication counts.
    Complexity(ComplexityArgs),
    /// Closed-form SINR, error-probability and MSE curves.
    Analyze(AnalyzeArgs),
    /// Restricted isometry constant of a generated or loaded matrix.
    Rip(RipArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named system size (32x32, 64x64, 128x128, 256x256, 48x32, 64x32, 128x32).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long = "n_r")]
    n_r: Option<usize>,
    #[arg(long = "n_t")]
    n_t: Option<usize>,
    #[arg(long)]
    constellation: Option<ConstellationKind>,
    /// Comma-separated: MF, LMMSE, PSED-MF, PSED-LMMSE, KBEST, ML.
    #[arg(long, value_delimiter = ',')]
    detectors: Option<Vec<String>>,
    /// Comma-separated values or `start:step:stop`.
    #[arg(long = "snr_db_grid", value_parser = parse_grid, allow_hyphen_values = true)]
    snr_db_grid: Option<Grid>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long = "master_seed")]
    master_seed: Option<u64>,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long = "psed.K")]
    psed_k: Option<usize>,
    #[arg(long = "psed.L")]
    psed_l: Option<usize>,
    /// LS or LMMSE.
    #[arg(long = "psed.estimator")]
    psed_estimator: Option<String>,
    /// hard or soft.
    #[arg(long = "psed.slicer")]
    psed_slicer: Option<String>,
    #[arg(long = "psed.max_paths")]
    psed_max_paths: Option<usize>,
    #[arg(long = "kbest.m")]
    kbest_m: Option<usize>,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Comma-separated `n_rxn_t` sizes.
    #[arg(long, value_delimiter = ',', default_value = "32x32,64x64,128x128,256x256")]
    sizes: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "MF,PSED-MF,LMMSE,PSED-LMMSE")]
    detectors: Vec<ComplexityDetector>,
    /// Sparsity; defaults to floor(0.15·n_t).
    #[arg(long = "K")]
    k: Option<u64>,
    #[arg(long = "L", default_value_t = 2)]
    l: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// n_t/n_r.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long = "snr_db_grid", value_parser = parse_grid, default_value = "0:2:30", allow_hyphen_values = true)]
    snr_db_grid: Grid,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RipArgs {
    /// Whitespace-separated matrix rows, entries like `0.5`, `0.5+0.1i`.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long = "n_r", default_value_t = 16)]
    n_r: usize,
    #[arg(long = "n_t", default_value_t = 20)]
    n_t: usize,
    #[arg(long = "K")]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random subsets to check instead of all of them (gives a lower bound).
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, h, b) = (num(start)?, num(step)?, num(stop)?);
            if !(h > 0.0) || b < a {
                return Err(format!("range `{s}` needs step > 0 and stop ≥ start"));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            Ok(Grid((0..=n).map(|i| a + h * i as f64).collect()))
        }
        [_] => s.split(',').map(num).collect::<std::result::Result<_, _>>().map(Grid),
        _ => Err(format!("`{s}` is neither a list nor start:step:stop")),
    }
}

impl SweepArgs {
    fn resolve(&self) -> Result<psed::harness::SweepConfig> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            n_r: self.n_r,
            n_t: self.n_t,
            constellation: self.constellation,
            detectors: self.detectors.clone(),
            snr_db_grid: self.snr_db_grid.clone().map(|g| g.0),
            trials: self.trials,
            master_seed: self.master_seed,
            output: self.output.clone(),
            psed: PsedSection {
                k: self.psed_k,
                l: self.psed_l,
                estimator: self.psed_estimator.clone(),
                slicer: self.psed_slicer.clone(),
                max_paths: self.psed_max_paths,
            },
            kbest: KBestSection { m: self.kbest_m },
        };
        let preset = self.preset.as_deref().map(preset).transpose()?;
        if let Some(p) = preset {
            if p.long_running {
                eprintln!("note: preset {} is long-running", p.name);
            }
        }
        file.overlay(flags).resolve(preset)
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PsedError + '_ {
    move |source| PsedError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the flagged-trial log next to the output (or to stderr) and
/// reports whether any trial was dropped.
fn report_flagged(flagged: &[FlaggedTrial], output: Option<&Path>) -> Result<bool> {
    if flagged.is_empty() {
        return Ok(false);
    }
    match output {
        Some(out) => {
            let mut log = out.as_os_str().to_owned();
            log.push(".flagged.csv");
            let log = PathBuf::from(log);
            write_flagged_log(flagged, &log)?;
            eprintln!("{} flagged trial(s) logged to {}", flagged.len(), log.display());
        }
        None => {
            for f in flagged {
                eprintln!("flagged: {} snr_db={} trial={} {}", f.detector, f.snr_db, f.trial, f.message);
            }
        }
    }
    Ok(flagged.iter().any(|f| f.dropped))
}

fn sweep_ser(args: &SweepArgs) -> Result<bool> {
    let cfg = args.resolve()?;
    let res = run_sweep(&cfg)?;
    match &cfg.output {
        Some(p) => emit_csv(&res, p)?,
        None => write_csv(&res, io::stdout().lock(), Path::new("<stdout>"))?,
    }
    report_flagged(&res.flagged, cfg.output.as_deref())
}

fn sweep_mse(args: &SweepArgs) -> Result<bool> {
    let mut cfg = args.resolve()?;
    if args.constellation.is_none() && args.config.is_none() {
        cfg.constellation = ConstellationKind::Bpsk;
    }
    let curves = run_mse_curves(&cfg)?;
    match &cfg.output {
        Some(p) => emit_mse_csv(&curves, p)?,
        None => write_mse_csv(&curves, io::stdout().lock(), Path::new("<stdout>"))?,
    }
    report_flagged(&curves.sweep.flagged, cfg.output.as_deref())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(std::fs::File::create(p).map_err(io_err(p))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_size(s: &str) -> Result<(u64, u64)> {
    let bad = || PsedError::Config(format!("size `{s}` is not of the form n_rxn_t"));
    let (r, t) = s.trim().split_once('x').ok_or_else(bad)?;
    Ok((r.parse().map_err(|_| bad())?, t.parse().map_err(|_| bad())?))
}

fn complexity(args: &ComplexityArgs) -> Result<bool> {
    let name = args.output.clone().unwrap_or_else(|| "<stdout>".into());
    let mut out = open_output(args.output.as_deref())?;
    let mut lines = vec!["detector,n_r,n_t,K,L,total".to_string()];
    for size in &args.sizes {
        let (n_r, n_t) = parse_size(size)?;
        let k = args.k.unwrap_or(default_sparsity(n_t as usize) as u64);
        for &d in &args.detectors {
            let rep = complexity_count(d, n_r, n_t, k, args.l)?;
            lines.push(format!("{},{},{},{},{},{}", rep.detector, n_r, n_t, rep.k, rep.l, rep.total));
        }
    }
    writeln!(out, "{}", lines.join("\n")).map_err(io_err(&name))?;
    out.flush().map_err(io_err(&name))?;
    Ok(false)
}

fn analyze(args: &AnalyzeArgs) -> Result<bool> {
    if !(args.beta > 0.0) {
        return Err(PsedError::Config(format!("beta must be positive (got {})", args.beta)));
    }
    let name = args.output.clone().unwrap_or_else(|| "<stdout>".into());
    let mut out = open_output(args.output.as_deref())?;
    let mut lines = vec!["snr_db,beta,sinr_asymptotic,pe_bpsk,mse_conv_asymptotic,mse_psed_bound,mse_psed_closed_form".to_string()];
    for &snr_db in &args.snr_db_grid.0 {
        let snr = db_to_linear(snr_db);
        let sinr = asymptotic_sinr(snr, args.beta);
        let pe = pe_bpsk(sinr);
        let bound = mse_psed_bound(snr, args.beta, pe, MseBoundForm::Full)
            .map(fmt_float)
            .unwrap_or_else(|_| "nan".into());
        let closed = mse_psed_closed_form(snr, args.beta)
            .map(fmt_float)
            .unwrap_or_else(|_| "nan".into());
        lines.push(format!(
            "{},{},{},{},{},{bound},{closed}",
            fmt_float(snr_db),
            fmt_float(args.beta),
            fmt_float(sinr),
            fmt_float(pe),
            fmt_float(mse_conv_asymptotic(snr, args.beta)),
        ));
    }
    writeln!(out, "{}", lines.join("\n")).map_err(io_err(&name))?;
    out.flush().map_err(io_err(&name))?;
    Ok(false)
}

fn load_matrix(path: &Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<C64>().map_err(|_| PsedError::Parse {
                    path: path.to_path_buf(),
                    message: format!("line {}: bad entry `{t}`", i + 1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n_c = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || n_c == 0 || rows.iter().any(|r| r.len() != n_c) {
        return Err(PsedError::Parse {
            path: path.to_path_buf(),
            message: "matrix must be non-empty with equal-length rows".into(),
        });
    }
    Ok(CMatrix::from_fn(rows.len(), n_c, |i, j| rows[i][j]))
}

fn rip(args: &RipArgs) -> Result<bool> {
    let h = match &args.matrix {
        Some(p) => load_matrix(p)?,
        None => generate_channel(args.n_r, args.n_t, &mut stream(args.seed, Purpose::Channel, &[])),
    };
    let est = match args.samples {
        Some(n) => rip_constant_sampled(&h, args.k, n, &mut stream(args.seed, Purpose::Sampling, &[]))?,
        None => rip_constant(&h, args.k)?,
    };
    println!("n_r,n_t,K,delta,subsets_checked,exhaustive");
    println!(
        "{},{},{},{},{},{}",
        h.nrows(),
        h.ncols(),
        est.k,
        fmt_float(est.delta),
        est.subsets_checked,
        est.exhaustive
    );
    Ok(false)
}

fn exit_code(err: &PsedError) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::SweepSer(a) => sweep_ser(a),
        Command::SweepMse(a) => sweep_mse(a),
        Command::Complexity(a) => complexity(a),
        Command::Analyze(a) => analyze(a),
        Command::Rip(a) => rip(a),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: some trials failed numerically and were left out of their cells");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
