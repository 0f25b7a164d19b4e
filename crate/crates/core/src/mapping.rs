//! Gray labeling, intensity modulation and bit-LLR demapping.
//!
//! Bits within a symbol are ordered MSB first. LLRs use the natural log and
//! are positive when bit 0 is more likely.

use serde::{Deserialize, Serialize};

use crate::channel::gaussian_log_likelihoods;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Real};

/// Bijection between level indices and `b`-bit labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    bits: u32,
    index_to_label: Vec<u32>,
    label_to_index: Vec<usize>,
}

/// Binary reflected Gray code `g(i) = i ^ (i >> 1)` on `bits` bits.
pub fn gray_labeling(bits: u32) -> Result<Labeling> {
    if !(1..=8).contains(&bits) {
        return Err(Error::domain(format!("label width must be in 1..=8, got {bits}")));
    }
    let m = 1usize << bits;
    let index_to_label: Vec<u32> = (0..m as u32).map(|i| i ^ (i >> 1)).collect();
    let mut label_to_index = vec![0; m];
    for (i, &g) in index_to_label.iter().enumerate() {
        label_to_index[g as usize] = i;
    }
    Ok(Labeling {
        bits,
        index_to_label,
        label_to_index,
    })
}

impl Labeling {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn m_size(&self) -> usize {
        self.index_to_label.len()
    }

    /// Label of level `index` as an integer whose MSB is the first transmitted bit.
    pub fn label(&self, index: usize) -> u32 {
        self.index_to_label[index]
    }

    pub fn index_of(&self, label: u32) -> usize {
        self.label_to_index[label as usize]
    }

    /// Bit `k` (0 = first/MSB) of the label of `index`.
    pub fn bit(&self, index: usize, k: u32) -> u8 {
        ((self.index_to_label[index] >> (self.bits - 1 - k)) & 1) as u8
    }

    pub fn label_bits(&self, index: usize) -> Vec<u8> {
        (0..self.bits).map(|k| self.bit(index, k)).collect()
    }

    pub fn label_string(&self, index: usize) -> String {
        format!("{:0width$b}", self.label(index), width = self.bits as usize)
    }

    /// `{"0": "00", "1": "01", …}`: index to MSB-first label.
    pub fn to_json(&self) -> String {
        let map: serde_json::Map<String, serde_json::Value> = (0..self.m_size())
            .map(|i| (i.to_string(), serde_json::Value::String(self.label_string(i))))
            .collect();
        serde_json::to_string_pretty(&map).expect("labeling serializes")
    }

    fn check_constellation<T: Real>(&self, c: &Constellation<T>) -> Result<()> {
        if c.m_size() != self.m_size() {
            return Err(Error::Length {
                expected: self.m_size(),
                got: c.m_size(),
            });
        }
        Ok(())
    }
}

/// Maps groups of `b` bits to intensity levels.
pub fn modulate<T: Real>(bits: &[u8], labeling: &Labeling, c: &Constellation<T>) -> Result<Vec<T>> {
    labeling.check_constellation(c)?;
    let b = labeling.bits as usize;
    if bits.len() % b != 0 {
        return Err(Error::Length {
            expected: bits.len().div_ceil(b) * b,
            got: bits.len(),
        });
    }
    Ok(bits
        .chunks_exact(b)
        .map(|chunk| {
            let label = chunk.iter().fold(0u32, |acc, &bit| (acc << 1) | u32::from(bit & 1));
            c.levels()[labeling.index_of(label)]
        })
        .collect())
}

/// Bit-metric computation rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demapper {
    /// Full log-sum-exp over each bit's hypothesis set.
    #[default]
    Exact,
    /// Keeps only the best hypothesis per set.
    MaxLog,
}

/// Reusable demapper for one constellation, labeling and noise level.
#[derive(Debug, Clone)]
pub struct BitDemapper<'a, T> {
    constellation: &'a Constellation<T>,
    labeling: &'a Labeling,
    sigma: T,
    mode: Demapper,
    scratch: Vec<T>,
}

impl<'a, T: Real> BitDemapper<'a, T> {
    pub fn new(
        constellation: &'a Constellation<T>,
        labeling: &'a Labeling,
        sigma: T,
        mode: Demapper,
    ) -> Result<Self> {
        labeling.check_constellation(constellation)?;
        if !(sigma > T::zero()) {
            return Err(Error::domain("sigma must be positive"));
        }
        Ok(Self {
            constellation,
            labeling,
            sigma,
            mode,
            scratch: vec![T::zero(); constellation.m_size()],
        })
    }

    /// Writes the `b` LLRs of one received sample into `out`.
    pub fn llrs_into(&mut self, y: T, out: &mut [T]) {
        let b = self.labeling.bits;
        debug_assert_eq!(out.len(), b as usize);
        gaussian_log_likelihoods(y, self.constellation.levels(), self.sigma, &mut self.scratch);
        let ll = &self.scratch;
        let lab = self.labeling;
        for (k, o) in out.iter_mut().enumerate() {
            let k = k as u32;
            let hyp = |bit: u8| {
                ll.iter()
                    .enumerate()
                    .filter(move |(i, _)| lab.bit(*i, k) == bit)
                    .map(|(_, &l)| l)
            };
            *o = match self.mode {
                Demapper::Exact => log_sum_exp(hyp(0)) - log_sum_exp(hyp(1)),
                Demapper::MaxLog => {
                    let best = |it: &mut dyn Iterator<Item = T>| {
                        it.fold(T::neg_infinity(), |a, x| if x > a { x } else { a })
                    };
                    best(&mut hyp(0)) - best(&mut hyp(1))
                }
            };
        }
    }
}

/// Exact bit LLRs of one received sample.
pub fn bit_llrs<T: Real>(y: T, c: &Constellation<T>, labeling: &Labeling, sigma: T) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); labeling.bits as usize];
    BitDemapper::new(c, labeling, sigma, Demapper::Exact)?.llrs_into(y, &mut out);
    Ok(out)
}

/// Nearest level index; ties go to the lower index.
pub fn hard_demap<T: Real>(y: T, c: &Constellation<T>) -> usize {
    let mut best = 0;
    let mut best_d = (y - c.levels()[0]).abs();
    for (i, &a) in c.levels().iter().enumerate().skip(1) {
        let d = (y - a).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}
