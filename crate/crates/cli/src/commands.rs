use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sqzhd::analysis::{
    fit_pump_curve, loss_sweep, plateau, relative_level, write_histogram_csv, write_json,
    write_spectrum_csv, write_sweep_csv, FitPoint, HistogramAccumulator, LevelEstimate,
    LossSweepRow, MonteCarloOptions, Moments, PlateauStats, SpectrumAccumulator,
    SqueezeFitResult, VarianceAccumulator,
};
use sqzhd::gaussian::{linear_to_db, Branch, ChainModel};
use sqzhd::seed::derive_seed;
use sqzhd::signal::{
    psd_model, write_trace_csv, FrameSynthesizer, TraceHeader, TraceReader, TraceRecord,
    TraceWriter,
};
use sqzhd::wdm::{plan_bands, BandPlan};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SIGNAL_TRACE: &str = "signal.sqztrace";
pub const SHOT_TRACE: &str = "shot.sqztrace";

const SIGNAL_STREAM: u64 = 0;
const SHOT_STREAM: u64 = 1;

/// Resolved settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Context {
    pub fn new(config: ExperimentConfig, seed: Option<u64>, out_dir: Option<PathBuf>) -> Self {
        let seed = seed.unwrap_or(config.seed);
        let out_dir = out_dir.unwrap_or_else(|| config.output.dir.clone());
        Self {
            config,
            seed,
            out_dir,
        }
    }

    fn out(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        Ok(self.out_dir.join(name))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StreamSummary {
    pub file: String,
    pub stream_seed: u64,
    pub analytic_variance: f64,
    pub empirical_variance: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub seed: u64,
    pub frames: usize,
    pub samples_per_frame: usize,
    pub sample_interval_s: f64,
    pub lo_phase_rad: f64,
    /// Optical level of the chain against its shot reference.
    pub chain_level_db: f64,
    /// Band-integrated level including detector response and electrical noise.
    pub analytic_level_db: f64,
    pub empirical_level_db: f64,
    pub empirical_err_db: f64,
    pub signal: StreamSummary,
    pub shot: StreamSummary,
}

/// Synthesizes the configured chain and its shot-noise reference and writes
/// both as trace files plus `summary.json`.
pub fn cmd_simulate(ctx: &Context) -> Result<SimulateSummary, CliError> {
    let cfg = &ctx.config;
    let chain = cfg.chain.build()?;
    let acq = cfg.acquisition.build()?;
    let resp = cfg.response.build()?;
    let shot_chain = chain.shot_reference();
    let write_csv = acq.frames.saturating_mul(acq.samples_per_frame) <= cfg.output.csv_max_samples;

    let mut streams = Vec::new();
    for (stream, c, name) in [
        (SIGNAL_STREAM, &chain, SIGNAL_TRACE),
        (SHOT_STREAM, &shot_chain, SHOT_TRACE),
    ] {
        let seed = derive_seed(ctx.seed, stream);
        let theta = c.lo_phase();
        let model = psd_model(c, &resp, &acq, theta)?;
        let synth = FrameSynthesizer::new(&model, &acq, theta)?;
        let path = ctx.out(name)?;
        let header = TraceHeader::new(acq.samples_per_frame, acq.frames, acq.sample_interval(), theta, seed);
        let mut writer = TraceWriter::create(&path, header)?;
        let mut var = VarianceAccumulator::new();
        let mut kept: Vec<TraceRecord> = Vec::new();
        synth.for_each_chunk::<CliError>(seed, acq.frames, cfg.acquisition.chunk_frames, |frames| {
            for f in frames {
                writer.write_frame(&f.samples)?;
                var.add(f);
            }
            if write_csv {
                kept.extend_from_slice(frames);
            }
            Ok(())
        })?;
        writer.finish()?;
        if write_csv {
            let csv_path = path.with_extension("csv");
            let file = File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
            write_trace_csv(BufWriter::new(file), &kept)?;
        }
        streams.push((
            StreamSummary {
                file: name.to_string(),
                stream_seed: seed,
                analytic_variance: model.sample_variance(),
                empirical_variance: var.mean(),
                standard_error: var.standard_error(),
            },
            var,
        ));
    }

    let (shot, shot_var) = streams.pop().expect("two streams");
    let (signal, signal_var) = streams.pop().expect("two streams");
    let (empirical_level_db, empirical_err_db) = if acq.frames >= 2 {
        let l = signal_var.level_against(&shot_var)?;
        (l.level_db, l.err_db)
    } else {
        (linear_to_db(signal.empirical_variance / shot.empirical_variance), f64::NAN)
    };
    let summary = SimulateSummary {
        seed: ctx.seed,
        frames: acq.frames,
        samples_per_frame: acq.samples_per_frame,
        sample_interval_s: acq.sample_interval(),
        lo_phase_rad: chain.lo_phase(),
        chain_level_db: chain.relative_level_db(chain.lo_phase()),
        analytic_level_db: linear_to_db(signal.analytic_variance / shot.analytic_variance),
        empirical_level_db,
        empirical_err_db,
        signal,
        shot,
    };
    write_json(&ctx.out("summary.json")?, &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentSummary {
    pub samples: u64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl From<&Moments> for MomentSummary {
    fn from(m: &Moments) -> Self {
        Self {
            samples: m.count,
            mean: m.mean,
            variance: m.variance(),
            skewness: m.skewness(),
            excess_kurtosis: m.excess_kurtosis(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub signal_file: String,
    pub shot_file: String,
    pub signal_seed: u64,
    pub shot_seed: u64,
    pub frames: usize,
    pub level: LevelEstimate,
    pub plateau: PlateauStats,
    pub signal_moments: MomentSummary,
    pub shot_moments: MomentSummary,
    /// Ratio of sample standard deviations, signal over shot.
    pub std_ratio: f64,
}

struct FirstPass {
    header: TraceHeader,
    spectrum: SpectrumAccumulator,
    variance: VarianceAccumulator,
    moments: Moments,
    min: f64,
    max: f64,
}

fn first_pass(path: &Path, ctx: &Context) -> Result<FirstPass, CliError> {
    let mut reader = open_trace(path)?;
    let header = *reader.header();
    let mut pass = FirstPass {
        header,
        spectrum: SpectrumAccumulator::new(
            header.samples_per_frame as usize,
            header.sample_interval(),
            ctx.config.analysis.window,
        )?,
        variance: VarianceAccumulator::new(),
        moments: Moments::default(),
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    loop {
        let chunk = reader.read_chunk(ctx.config.acquisition.chunk_frames.max(1))?;
        if chunk.is_empty() {
            break;
        }
        pass.spectrum.add_batch(&chunk)?;
        for f in &chunk {
            pass.variance.add(f);
            pass.moments.extend(&f.samples);
            for &x in &f.samples {
                pass.min = pass.min.min(x);
                pass.max = pass.max.max(x);
            }
        }
    }
    Ok(pass)
}

fn histogram_pass(path: &Path, ctx: &Context, lo: f64, hi: f64) -> Result<sqzhd::analysis::Histogram, CliError> {
    let mut reader = open_trace(path)?;
    let mut acc = HistogramAccumulator::new(ctx.config.analysis.histogram_bins, lo, hi)?;
    while let Some(f) = reader.read_frame()? {
        acc.add(&f.samples);
    }
    Ok(acc.finish())
}

fn open_trace(path: &Path) -> Result<TraceReader<std::io::BufReader<File>>, CliError> {
    if !path.exists() {
        return Err(CliError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "trace file not found"),
        ));
    }
    Ok(TraceReader::open(path)?)
}

/// Spectra, relative level, plateau statistics and histograms of a signal
/// trace file against a shot-noise trace file.
pub fn cmd_analyze(ctx: &Context, signal: &Path, shot: &Path) -> Result<AnalyzeReport, CliError> {
    let a = &ctx.config.analysis;
    let sig = first_pass(signal, ctx)?;
    let sn = first_pass(shot, ctx)?;
    if sig.header.samples_per_frame != sn.header.samples_per_frame
        || sig.header.sample_interval_fs != sn.header.sample_interval_fs
    {
        return Err(CliError::Validation(format!(
            "signal and shot traces differ in frame length or sample interval ({}x{} fs vs {}x{} fs)",
            sig.header.samples_per_frame,
            sig.header.sample_interval_fs,
            sn.header.samples_per_frame,
            sn.header.sample_interval_fs
        )));
    }
    let level = sig.variance.level_against(&sn.variance)?;
    let sig_spec = sig.spectrum.finish()?;
    let shot_spec = sn.spectrum.finish()?;
    let rel = relative_level(&sig_spec, &shot_spec)?;
    let plat = plateau(
        &rel,
        a.plateau_low_ghz * 1e9,
        a.plateau_high_ghz * 1e9,
        &a.mask(),
        a.rbw_ghz * 1e9,
    )?;

    let lo = sig.min.min(sn.min);
    let hi = sig.max.max(sn.max);
    let sig_hist = histogram_pass(signal, ctx, lo, hi)?;
    let shot_hist = histogram_pass(shot, ctx, lo, hi)?;

    write_spectrum_csv(&ctx.out("spectrum_signal.csv")?, &sig_spec)?;
    write_spectrum_csv(&ctx.out("spectrum_shot.csv")?, &shot_spec)?;
    write_spectrum_csv(&ctx.out("relative.csv")?, &rel)?;
    write_histogram_csv(&ctx.out("histogram_signal.csv")?, &sig_hist)?;
    write_histogram_csv(&ctx.out("histogram_shot.csv")?, &shot_hist)?;

    let report = AnalyzeReport {
        signal_file: signal.display().to_string(),
        shot_file: shot.display().to_string(),
        signal_seed: sig.header.seed,
        shot_seed: sn.header.seed,
        frames: sig.variance.count().min(sn.variance.count()),
        level,
        plateau: plat,
        std_ratio: (sig.moments.variance() / sn.moments.variance()).sqrt(),
        signal_moments: (&sig.moments).into(),
        shot_moments: (&sn.moments).into(),
    };
    write_json(&ctx.out("report.json")?, &report)?;
    Ok(report)
}

fn parse_branch(s: &str) -> Option<Branch> {
    match s.trim().to_ascii_lowercase().as_str() {
        "anti_squeezing" | "anti-squeezing" | "anti" | "+" | "+1" | "1" => Some(Branch::AntiSqueezing),
        "squeezing" | "squeeze" | "sq" | "-" | "-1" => Some(Branch::Squeezing),
        _ => None,
    }
}

/// Reads `pump_mw, level_db, branch[, sigma_db]` rows.
pub fn read_levels_csv(path: &Path, default_sigma_db: f64) -> Result<Vec<FitPoint>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ip), Some(il), Some(ib)) = (col("pump_mw"), col("level_db"), col("branch")) else {
        return Err(CliError::Usage(format!(
            "{}: expected columns pump_mw, level_db, branch[, sigma_db]",
            path.display()
        )));
    };
    let is = col("sigma_db");
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let num = |idx: usize, what: &str| -> Result<f64, CliError> {
            rec.get(idx)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{} line {row}: bad {what}", path.display())))
        };
        let branch = parse_branch(rec.get(ib).unwrap_or("")).ok_or_else(|| {
            CliError::Usage(format!("{} line {row}: unknown branch", path.display()))
        })?;
        let sigma_db = match is.and_then(|j| rec.get(j)).filter(|s| !s.is_empty()) {
            Some(_) => num(is.expect("checked"), "sigma_db")?,
            None => default_sigma_db,
        };
        points.push(FitPoint::from_db(
            num(ip, "pump_mw")? * 1e-3,
            num(il, "level_db")?,
            branch,
            sigma_db,
        ));
    }
    if points.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", path.display())));
    }
    Ok(points)
}

/// Fits the pump-power curve to a levels CSV and writes `fit_report.json`.
pub fn cmd_fit(ctx: &Context, input: &Path) -> Result<SqueezeFitResult, CliError> {
    let points = read_levels_csv(input, ctx.config.fit.default_sigma_db)?;
    let result = fit_pump_curve(&points, &ctx.config.fit.options())?;
    write_json(&ctx.out("fit_report.json")?, &result)?;
    Ok(result)
}

#[derive(Serialize)]
struct SweepReport<'a> {
    seed: u64,
    monte_carlo_frames: Option<usize>,
    rows: &'a [LossSweepRow],
}

/// Squeezing against added loss after the amplifier; writes
/// `loss_sweep.csv` and `loss_sweep.json`.
pub fn cmd_sweep_loss(ctx: &Context, monte_carlo: bool) -> Result<Vec<LossSweepRow>, CliError> {
    let cfg = &ctx.config;
    let chain: ChainModel = cfg.chain.build()?;
    let mc = if monte_carlo || cfg.sweep.monte_carlo {
        let mut acquisition = cfg.acquisition.build()?;
        acquisition.frames = cfg.sweep.mc_frames;
        acquisition.validate()?;
        Some(MonteCarloOptions {
            acquisition,
            response: cfg.response.build()?,
            seed: ctx.seed,
            chunk: cfg.acquisition.chunk_frames,
        })
    } else {
        None
    };
    let rows = loss_sweep(&chain, &cfg.sweep.added_loss, &cfg.sweep.gains_db, mc.as_ref())?;
    write_sweep_csv(&ctx.out("loss_sweep.csv")?, &rows)?;
    write_json(
        &ctx.out("loss_sweep.json")?,
        &SweepReport {
            seed: ctx.seed,
            monte_carlo_frames: mc.as_ref().map(|m| m.acquisition.frames),
            rows: &rows,
        },
    )?;
    Ok(rows)
}

/// Sideband-pair plan; writes `wdm_plan.json` and `wdm_plan.csv`.
pub fn cmd_plan_wdm(ctx: &Context) -> Result<BandPlan, CliError> {
    let plan = plan_bands(&ctx.config.wdm.params())?;
    write_json(&ctx.out("wdm_plan.json")?, &plan)?;
    let csv_path = ctx.out("wdm_plan.csv")?;
    plan.write_csv(&csv_path)
        .map_err(|e| CliError::Output(format!("{}: {e}", csv_path.display())))?;
    Ok(plan)
}
