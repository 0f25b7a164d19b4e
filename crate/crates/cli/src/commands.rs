use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ois_shape::airate::{rates_csv, RateRow};
use ois_shape::sim::{mix, stats_csv, Link, SimConfig};
use ois_shape::{
    air_exponential, approx_gain_db, build_shaped, capacity_asymptote, capacity_upper,
    mi_discrete, mi_discrete_mc, pam, parse_snr_grid, scaling_gain_db, snr_from_db,
    Constellation, QuadratureConfig,
};

use crate::manifest::{manifest_path, read_text, sha256_hex, write_text, RunManifest};
use crate::CliError;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenArgs {
    /// Bits per symbol; the constellation has 2^b levels.
    #[arg(long = "m-bits")]
    pub m_bits: u32,
    /// Extra grid bits used when quantizing levels.
    #[arg(long = "extra-bits", default_value_t = 2)]
    pub extra_bits: u32,
    /// Average optical intensity.
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
    /// CSV destination; the JSON design and the manifest are written beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GainArgs {
    #[arg(long = "m-min", default_value_t = 4)]
    pub m_min: usize,
    #[arg(long = "m-max", default_value_t = 128)]
    pub m_max: usize,
    #[arg(long, default_value_t = 2)]
    pub step: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curves {
    Pam,
    Shaped,
    Exp,
    Bounds,
    All,
}

impl Curves {
    fn pam(self) -> bool {
        matches!(self, Curves::Pam | Curves::All)
    }
    fn shaped(self) -> bool {
        matches!(self, Curves::Shaped | Curves::All)
    }
    fn exp(self) -> bool {
        matches!(self, Curves::Exp | Curves::All)
    }
    fn bounds(self) -> bool {
        matches!(self, Curves::Bounds | Curves::All)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AirArgs {
    #[arg(long = "m-bits")]
    pub m_bits: u32,
    #[arg(long = "extra-bits", default_value_t = 2)]
    pub extra_bits: u32,
    /// Inclusive optical SNR grid in dB, `start:step:stop`.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    pub snr_db: String,
    #[arg(long, value_enum, default_value_t = Curves::All)]
    pub which: Curves,
    /// Estimate the discrete-input rates by Monte Carlo with this many samples.
    #[arg(long)]
    pub mc: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Simulation config JSON, or a manifest written by a previous run.
    #[arg(long)]
    pub config: PathBuf,
    /// Validate the config and build the code without simulating.
    #[arg(long)]
    pub dry_run: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Override the recorded output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })
        }
    }
}

pub fn gen(args: &GenArgs) -> Result<(), CliError> {
    let design = build_shaped::<f64>(args.m_bits, args.extra_bits, args.energy)?;
    let levels: Vec<String> = design.integer_levels.iter().map(u64::to_string).collect();
    println!("levels: {}", levels.join(" "));
    println!("basic level: {}", design.basic_level);
    if let Some(out) = &args.out {
        write_text(out, &design.to_csv())?;
        let json = out.with_extension("json");
        write_text(&json, &(design.to_json() + "\n"))?;
        let mut manifest = RunManifest::new("gen", args);
        manifest.outputs = vec![out.clone(), json];
        manifest.write(&manifest_path(out))?;
    }
    Ok(())
}

pub const GAIN_CSV_HEADER: &str = "m,g_db,approx_g_db";

pub fn gain(args: &GainArgs) -> Result<(), CliError> {
    if args.m_min < 2 || args.m_max < args.m_min || args.step == 0 {
        return Err(CliError::Usage(
            "need 2 <= m-min <= m-max and a positive step".into(),
        ));
    }
    let mut csv = format!("{GAIN_CSV_HEADER}\n");
    for m in (args.m_min..=args.m_max).step_by(args.step) {
        let g: f64 = scaling_gain_db(m)?;
        let a: f64 = approx_gain_db(m)?;
        csv.push_str(&format!("{m},{g},{a}\n"));
    }
    emit(args.out.as_deref(), &csv)?;
    if let Some(out) = &args.out {
        let mut manifest = RunManifest::new("gain", args);
        manifest.outputs = vec![out.clone()];
        manifest.write(&manifest_path(out))?;
    }
    Ok(())
}

/// Rate table plus the number of cells that failed.
pub fn air(args: &AirArgs) -> Result<usize, CliError> {
    let grid = parse_snr_grid(&args.snr_db)?;
    if let Some(n) = args.mc {
        if n < ois_shape::airate::MIN_MC_SAMPLES {
            return Err(CliError::Usage(format!(
                "--mc needs at least {} samples",
                ois_shape::airate::MIN_MC_SAMPLES
            )));
        }
    }
    let m_size = 1usize
        .checked_shl(args.m_bits)
        .filter(|_| (1..=20).contains(&args.m_bits))
        .ok_or_else(|| CliError::Usage("--m-bits must be in 1..=20".into()))?;
    let energy = 1.0;
    let pam_c = if args.which.pam() {
        Some(pam::<f64>(m_size, energy)?)
    } else {
        None
    };
    let shaped_c = if args.which.shaped() {
        Some(build_shaped::<f64>(args.m_bits, args.extra_bits, energy)?.constellation)
    } else {
        None
    };
    let cfg = QuadratureConfig::default();

    let discrete = |c: &Constellation<f64>, sigma: f64, stream: u64| -> ois_shape::Result<f64> {
        match args.mc {
            Some(n) => Ok(mi_discrete_mc(c, sigma, n, mix(args.seed, stream))?.rate),
            None => mi_discrete(c, sigma, &cfg),
        }
    };

    let results: Vec<(RateRow, Vec<String>)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let snr = snr_from_db(snr_db);
            let sigma = energy / snr;
            let mut failures = Vec::new();
            let mut keep = |what: &str, r: ois_shape::Result<f64>| match r {
                Ok(v) => Some(v),
                Err(e) => {
                    failures.push(format!("{snr_db} dB {what}: {e}"));
                    None
                }
            };
            let i = i as u64;
            let row = RateRow {
                snr_db,
                r_pam: pam_c
                    .as_ref()
                    .and_then(|c| keep("r_pam", discrete(c, sigma, 2 * i))),
                r_shaped: shaped_c
                    .as_ref()
                    .and_then(|c| keep("r_shaped", discrete(c, sigma, 2 * i + 1))),
                i_exp: if args.which.exp() {
                    keep("i_exp", air_exponential(energy, sigma, &cfg))
                } else {
                    None
                },
                c_upper: args.which.bounds().then(|| capacity_upper(snr)),
                c_asymptote: args.which.bounds().then(|| capacity_asymptote(snr)),
            };
            (row, failures)
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut failed = 0;
    for (row, failures) in results {
        for f in &failures {
            eprintln!("error: {f}");
        }
        failed += failures.len();
        rows.push(row);
    }
    emit(args.out.as_deref(), &rates_csv(&rows))?;
    if let Some(out) = &args.out {
        let mut manifest = RunManifest::new("air", args);
        if args.mc.is_some() {
            manifest.seeds = vec![args.seed];
        }
        manifest.outputs = vec![out.clone()];
        manifest.write(&manifest_path(out))?;
    }
    Ok(failed)
}

/// Reads a simulation config, or the config recorded in a manifest together
/// with the code hash it was run with.
pub fn load_sim_config(path: &Path) -> Result<(SimConfig, Option<String>), CliError> {
    let text = read_text(path)?;
    let json_err = |e| CliError::Json {
        path: path.to_path_buf(),
        source: e,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
    if value.get("subcommand").is_some() {
        let manifest: RunManifest = serde_json::from_value(value).map_err(json_err)?;
        if manifest.subcommand != "simulate" {
            return Err(CliError::Usage(format!(
                "manifest records a `{}` run, not `simulate`",
                manifest.subcommand
            )));
        }
        let cfg = serde_json::from_value(manifest.parameters).map_err(json_err)?;
        Ok((cfg, manifest.code_sha256))
    } else {
        Ok((serde_json::from_value(value).map_err(json_err)?, None))
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (cfg, expected_hash) = load_sim_config(&args.config)?;
    run_simulation(cfg, expected_hash, args.dry_run, args.out.as_deref())
}

fn run_simulation(
    cfg: SimConfig,
    expected_hash: Option<String>,
    dry_run: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let link = Link::new(cfg)?;
    let code_hash = sha256_hex(link.code.to_alist().as_bytes());
    if let Some(expected) = expected_hash {
        if expected != code_hash {
            return Err(CliError::Usage(format!(
                "parity-check matrix hash {code_hash} differs from the recorded {expected}"
            )));
        }
    }
    for w in link.encoder.warnings() {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "code n = {}, k = {}, {} information bits per channel use, {} SNR points",
        link.code.n(),
        link.encoder.k(),
        link.rate_per_symbol(),
        link.config.snr_grid_db.len()
    );
    if dry_run {
        return Ok(());
    }
    let stats = link.sweep();
    emit(out, &stats_csv(&stats))?;
    if let Some(out) = out {
        let mut manifest = RunManifest::new("simulate", &link.config);
        manifest.seeds = std::iter::once(link.config.master_seed)
            .chain((0..link.config.snr_grid_db.len()).map(|i| mix(link.config.master_seed, i as u64)))
            .collect();
        manifest.outputs = vec![out.to_path_buf()];
        manifest.code_sha256 = Some(code_hash);
        manifest.write(&manifest_path(out))?;
    }
    Ok(())
}

/// Re-runs the subcommand recorded in a manifest.
pub fn replay(args: &ReplayArgs) -> Result<usize, CliError> {
    let manifest = RunManifest::read(&args.manifest)?;
    let json_err = |e| CliError::Json {
        path: args.manifest.clone(),
        source: e,
    };
    let out = args
        .out
        .clone()
        .or_else(|| manifest.outputs.first().cloned());
    match manifest.subcommand.as_str() {
        "gen" => {
            let mut a: GenArgs = serde_json::from_value(manifest.parameters).map_err(json_err)?;
            a.out = out;
            gen(&a).map(|_| 0)
        }
        "gain" => {
            let mut a: GainArgs = serde_json::from_value(manifest.parameters).map_err(json_err)?;
            a.out = out;
            gain(&a).map(|_| 0)
        }
        "air" => {
            let mut a: AirArgs = serde_json::from_value(manifest.parameters).map_err(json_err)?;
            a.out = out;
            air(&a)
        }
        "simulate" => {
            let cfg: SimConfig = serde_json::from_value(manifest.parameters).map_err(json_err)?;
            run_simulation(cfg, manifest.code_sha256, false, out.as_deref()).map(|_| 0)
        }
        other => Err(CliError::Usage(format!("unknown subcommand `{other}` in manifest"))),
    }
}
