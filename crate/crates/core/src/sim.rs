//! Monte-Carlo link simulation: LDPC-coded, Gray-labelled intensity modulation
//! over the Gaussian optical intensity channel.
//!
//! Every block draws its information bits and noise from its own generator,
//! seeded by [`mix`] of the point seed and the block index, so results do not
//! depend on how blocks are spread over threads. Blocks run in batches of
//! thread-independent size and counters are reduced in block order, stopping
//! exactly at the block that reaches the error target.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::snr_from_db;
use crate::constellation::{build_shaped, pam, Constellation, DEFAULT_EXTRA_BITS};
use crate::error::{Error, Result};
use crate::ldpc::{random_regular_code, BpConfig, BpDecoder, Encoder, ParityCheckMatrix};
use crate::mapping::{gray_labeling, hard_demap, BitDemapper, Demapper, Labeling};

/// 64-bit seed mixer: SplitMix64 finalizer applied to `a ⊕ splitmix(b)`.
pub fn mix(a: u64, b: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(a ^ splitmix(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstellationSpec {
    Shaped {
        bits: u32,
        #[serde(default = "default_extra_bits")]
        extra_bits: u32,
    },
    Pam {
        bits: u32,
    },
}

fn default_extra_bits() -> u32 {
    DEFAULT_EXTRA_BITS
}

impl ConstellationSpec {
    pub fn bits(&self) -> u32 {
        match *self {
            ConstellationSpec::Shaped { bits, .. } | ConstellationSpec::Pam { bits } => bits,
        }
    }

    pub fn build(&self, energy: f64) -> Result<Constellation<f64>> {
        match *self {
            ConstellationSpec::Shaped { bits, extra_bits } => {
                Ok(build_shaped(bits, extra_bits, energy)?.constellation)
            }
            ConstellationSpec::Pam { bits } => pam(1usize << bits, energy),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodeSpec {
    Alist { path: PathBuf },
    Regular { n: usize, dv: usize, dc: usize, seed: u64 },
}

impl CodeSpec {
    pub fn build(&self) -> Result<ParityCheckMatrix> {
        match self {
            CodeSpec::Alist { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::config("code.path", format!("cannot read {}: {e}", path.display()))
                })?;
                ParityCheckMatrix::from_alist(&text)
            }
            CodeSpec::Regular { n, dv, dc, seed } => random_regular_code(*n, *dv, *dc, *seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stopping {
    #[serde(default = "default_min_block_errors")]
    pub min_block_errors: u64,
    pub max_blocks: u64,
}

fn default_min_block_errors() -> u64 {
    100
}

fn default_energy() -> f64 {
    1.0
}

fn default_max_iter() -> usize {
    50
}

/// Full description of a coded-modulation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub constellation: ConstellationSpec,
    pub code: CodeSpec,
    pub snr_grid_db: Vec<f64>,
    pub stopping: Stopping,
    pub master_seed: u64,
    #[serde(default = "default_energy")]
    pub energy: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub demapper: Demapper,
}

impl SimConfig {
    /// Field-level checks that need no code construction.
    pub fn validate(&self) -> Result<()> {
        let bits = self.constellation.bits();
        if !(1..=8).contains(&bits) {
            return Err(Error::config("constellation.bits", "must be in 1..=8"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("snr_grid_db", "must not be empty"));
        }
        if let Some(i) = self.snr_grid_db.iter().position(|x| !x.is_finite()) {
            return Err(Error::config(format!("snr_grid_db[{i}]"), "must be finite"));
        }
        if let Some(i) = self.snr_grid_db.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::config(
                format!("snr_grid_db[{}]", i + 1),
                "grid must be strictly increasing",
            ));
        }
        if self.stopping.min_block_errors < 1 {
            return Err(Error::config("stopping.min_block_errors", "must be at least 1"));
        }
        if self.stopping.max_blocks < 1 {
            return Err(Error::config("stopping.max_blocks", "must be at least 1"));
        }
        if !(self.energy > 0.0 && self.energy.is_finite()) {
            return Err(Error::config("energy", "must be positive and finite"));
        }
        if let CodeSpec::Regular { n, dv, dc, .. } = self.code {
            if n == 0 || dv == 0 || dc == 0 || (n * dv) % dc != 0 {
                return Err(Error::config("code", "need positive n, dv, dc with dc | n·dv"));
            }
        }
        Ok(())
    }
}

/// Error counters and confidence interval at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub snr_db: f64,
    pub blocks_run: u64,
    pub info_bits_per_block: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub ber: f64,
    pub bler: f64,
    /// 95% Wilson interval on BLER; one-sided upper bound when no block failed.
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z_TWO_SIDED_95: f64 = 1.959_963_984_540_054;
const Z_ONE_SIDED_95: f64 = 1.644_853_626_951_472;

/// Wilson score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = if errors == 0 { Z_ONE_SIDED_95 } else { Z_TWO_SIDED_95 };
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    (lo, (centre + half).min(1.0))
}

impl ErrorStats {
    fn from_counts(snr_db: f64, info_bits: u64, blocks: u64, bit_errors: u64, block_errors: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(block_errors, blocks);
        let denom = (blocks * info_bits).max(1) as f64;
        Self {
            snr_db,
            blocks_run: blocks,
            info_bits_per_block: info_bits,
            bit_errors,
            block_errors,
            ber: bit_errors as f64 / denom,
            bler: block_errors as f64 / blocks.max(1) as f64,
            ci_low,
            ci_high,
        }
    }
}

pub const STATS_CSV_HEADER: &str = "snr_db,blocks,bit_errors,block_errors,ber,bler,ci_low,ci_high";

pub fn stats_csv(stats: &[ErrorStats]) -> String {
    let mut out = format!("{STATS_CSV_HEADER}\n");
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            s.snr_db, s.blocks_run, s.bit_errors, s.block_errors, s.ber, s.bler, s.ci_low, s.ci_high
        ));
    }
    out
}

/// Adds `N(0, sigma²)` samples to `symbols`.
pub fn add_noise<R: Rng>(rng: &mut R, symbols: &mut [f64], sigma: f64) {
    for s in symbols {
        let z: f64 = rng.sample(StandardNormal);
        *s += sigma * z;
    }
}

/// Constructed pieces of a link, shared read-only across workers.
#[derive(Debug, Clone)]
pub struct Link {
    pub config: SimConfig,
    pub constellation: Constellation<f64>,
    pub labeling: Labeling,
    pub code: ParityCheckMatrix,
    pub encoder: Encoder,
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockOutcome {
    bit_errors: u64,
    block_error: bool,
}

struct Worker {
    decoder: BpDecoder,
    info: Vec<u8>,
    codeword: Vec<u8>,
    symbols: Vec<f64>,
    llrs: Vec<f64>,
}

impl Link {
    /// Builds the constellation, labeling, code and encoder, rejecting
    /// inconsistent combinations before any block runs.
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let bits = config.constellation.bits();
        let constellation = config
            .constellation
            .build(config.energy)
            .map_err(|e| Error::config("constellation", e.to_string()))?;
        let labeling = gray_labeling(bits)?;
        if labeling.m_size() != constellation.m_size() {
            return Err(Error::config("constellation", "size does not match labeling"));
        }
        let code = config.code.build()?;
        if code.n() % bits as usize != 0 {
            return Err(Error::config(
                "code",
                format!("code length {} is not a multiple of {bits} bits per symbol", code.n()),
            ));
        }
        let encoder = Encoder::new(&code);
        if encoder.k() == 0 {
            return Err(Error::config("code", "code has no information bits"));
        }
        Ok(Self {
            config,
            constellation,
            labeling,
            code,
            encoder,
        })
    }

    pub fn info_bits_per_block(&self) -> usize {
        self.encoder.k()
    }

    /// Information bits per channel use.
    pub fn rate_per_symbol(&self) -> f64 {
        self.encoder.k() as f64 / self.code.n() as f64 * f64::from(self.labeling.bits())
    }

    fn worker(&self) -> Worker {
        let n = self.code.n();
        Worker {
            decoder: BpDecoder::new(&self.code),
            info: vec![0; self.encoder.k()],
            codeword: vec![0; n],
            symbols: Vec::with_capacity(n / self.labeling.bits() as usize),
            llrs: vec![0.0; n],
        }
    }

    fn run_block(&self, w: &mut Worker, sigma: f64, seed: u64) -> BlockOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for b in w.info.iter_mut() {
            *b = rng.random_range(0..2u8);
        }
        self.encoder
            .encode_into(&w.info, &mut w.codeword)
            .expect("buffer sizes match encoder");
        let b = self.labeling.bits() as usize;
        w.symbols.clear();
        w.symbols.extend(w.codeword.chunks_exact(b).map(|chunk| {
            let label = chunk.iter().fold(0u32, |acc, &x| (acc << 1) | u32::from(x));
            self.constellation.levels()[self.labeling.index_of(label)]
        }));
        add_noise(&mut rng, &mut w.symbols, sigma);
        let mut demapper = BitDemapper::new(&self.constellation, &self.labeling, sigma, self.config.demapper)
            .expect("validated link");
        for (y, out) in w.symbols.iter().zip(w.llrs.chunks_exact_mut(b)) {
            demapper.llrs_into(*y, out);
        }
        let cfg = BpConfig {
            max_iter: self.config.max_iter,
            early_stop: true,
        };
        let decoded = w.decoder.decode(&w.llrs, &cfg).expect("finite LLRs");
        let bit_errors = self
            .encoder
            .info_positions()
            .iter()
            .zip(&w.info)
            .filter(|(&p, &sent)| decoded.bits[p] != sent)
            .count() as u64;
        BlockOutcome {
            bit_errors,
            block_error: bit_errors > 0,
        }
    }

    /// Simulates one SNR point with the given point seed.
    pub fn run_point_seeded(&self, snr_db: f64, point_seed: u64) -> ErrorStats {
        let sigma = self.config.energy / snr_from_db(snr_db);
        let stop = self.config.stopping;
        let (mut blocks, mut bit_errors, mut block_errors) = (0u64, 0u64, 0u64);
        let mut batch = 32u64;
        'outer: while blocks < stop.max_blocks {
            let end = (blocks + batch).min(stop.max_blocks);
            let outcomes: Vec<BlockOutcome> = (blocks..end)
                .into_par_iter()
                .map_init(
                    || self.worker(),
                    |w, i| self.run_block(w, sigma, mix(point_seed, i)),
                )
                .collect();
            for o in outcomes {
                blocks += 1;
                bit_errors += o.bit_errors;
                block_errors += u64::from(o.block_error);
                if block_errors >= stop.min_block_errors {
                    break 'outer;
                }
            }
            batch = (batch * 2).min(1024);
        }
        ErrorStats::from_counts(
            snr_db,
            self.info_bits_per_block() as u64,
            blocks,
            bit_errors,
            block_errors,
        )
    }

    /// Point `index` of a sweep, seeded with `mix(master_seed, index)`.
    pub fn run_grid_point(&self, index: usize, snr_db: f64) -> ErrorStats {
        self.run_point_seeded(snr_db, mix(self.config.master_seed, index as u64))
    }

    pub fn sweep(&self) -> Vec<ErrorStats> {
        self.config
            .snr_grid_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| self.run_grid_point(i, snr))
            .collect()
    }
}

/// Simulates one SNR point as the first point of a sweep.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<ErrorStats> {
    Ok(Link::new(cfg.clone())?.run_grid_point(0, snr_db))
}

/// Simulates every point of `cfg.snr_grid_db`.
pub fn sweep(cfg: &SimConfig) -> Result<Vec<ErrorStats>> {
    Ok(Link::new(cfg.clone())?.sweep())
}

/// Symbol error rate estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerEstimate {
    pub ser: f64,
    pub std_error: f64,
    pub symbols: u64,
}

/// Uncoded symbol error rate with nearest-level detection; the noise level
/// follows from the constellation mean and the optical SNR.
pub fn uncoded_ser(c: &Constellation<f64>, snr_db: f64, n_symbols: u64, seed: u64) -> Result<SerEstimate> {
    if n_symbols == 0 {
        return Err(Error::domain("need at least one symbol"));
    }
    if !(c.mean() > 0.0) {
        return Err(Error::domain("constellation mean must be positive"));
    }
    let sigma = c.mean() / snr_from_db(snr_db);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = c.m_size();
    let mut errors = 0u64;
    for _ in 0..n_symbols {
        let i = rng.random_range(0..m);
        let z: f64 = rng.sample(StandardNormal);
        if hard_demap(c.levels()[i] + sigma * z, c) != i {
            errors += 1;
        }
    }
    let n = n_symbols as f64;
    let p = errors as f64 / n;
    Ok(SerEstimate {
        ser: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        symbols: n_symbols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(snr: Vec<f64>) -> SimConfig {
        SimConfig {
            constellation: ConstellationSpec::Shaped {
                bits: 2,
                extra_bits: 2,
            },
            code: CodeSpec::Regular {
                n: 96,
                dv: 3,
                dc: 6,
                seed: 1,
            },
            snr_grid_db: snr,
            stopping: Stopping {
                min_block_errors: 10,
                max_blocks: 50,
            },
            master_seed: 9,
            energy: 1.0,
            max_iter: 20,
            demapper: Demapper::Exact,
        }
    }

    #[test]
    fn mixer_spreads_neighbouring_inputs() {
        assert_ne!(mix(0, 0), mix(0, 1));
        assert_ne!(mix(1, 0), mix(0, 1));
        assert_eq!(mix(42, 7), mix(42, 7));
        let d = (mix(5, 100) ^ mix(5, 101)).count_ones();
        assert!((16..=48).contains(&d));
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(10, 100);
        assert!(lo < 0.1 && 0.1 < hi);
        assert!((lo - 0.0552).abs() < 1e-3 && (hi - 0.1744).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.0263).abs() < 1e-3);
        assert_eq!(wilson_interval(5, 5).1, 1.0);
    }

    #[test]
    fn config_validation_names_fields() {
        let mut cfg = small_cfg(vec![1.0, 0.5]);
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "snr_grid_db[1]"),
            other => panic!("{other:?}"),
        }
        cfg.snr_grid_db = vec![1.0];
        cfg.stopping.min_block_errors = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "stopping.min_block_errors"));
    }

    #[test]
    fn code_length_must_fill_symbols() {
        let mut cfg = small_cfg(vec![10.0]);
        cfg.constellation = ConstellationSpec::Pam { bits: 5 };
        // 96 is not a multiple of 5.
        assert!(matches!(Link::new(cfg), Err(Error::Config { field, .. }) if field == "code"));
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let s = run_point(&small_cfg(vec![60.0]), 60.0).unwrap();
        assert_eq!(s.blocks_run, 50);
        assert_eq!((s.bit_errors, s.block_errors), (0, 0));
        assert_eq!(s.ci_low, 0.0);
        assert!(s.ci_high > 0.0);
    }

    #[test]
    fn hopeless_point_fails_every_block() {
        let s = run_point(&small_cfg(vec![-20.0]), -20.0).unwrap();
        assert_eq!(s.block_errors, s.blocks_run);
        assert_eq!(s.blocks_run, 10);
        assert!(s.ber > 0.2);
    }

    #[test]
    fn deterministic_and_single_point_sweep_matches() {
        let cfg = small_cfg(vec![8.0]);
        let a = run_point(&cfg, 8.0).unwrap();
        let b = run_point(&cfg, 8.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(sweep(&cfg).unwrap(), vec![a]);
    }

    #[test]
    fn csv_layout() {
        let s = ErrorStats::from_counts(3.0, 10, 4, 2, 1);
        let csv = stats_csv(&[s]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(STATS_CSV_HEADER));
        let row = lines.next().unwrap();
        assert!(row.starts_with("3,4,2,1,0.05,0.25,"));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = small_cfg(vec![1.0, 2.0]);
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"kind\":\"shaped\""));
        let back: SimConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
