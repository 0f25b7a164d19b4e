use serde::{Deserialize, Serialize};

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Message magnitude limit in natural-log LLR units.
pub const LLR_CLIP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpConfig {
    pub max_iter: usize,
    /// Stop as soon as the hard decisions satisfy every check.
    pub early_stop: bool,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            max_iter: 50,
            early_stop: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    pub iterations_used: usize,
    pub syndrome_ok: bool,
}

/// Flooding sum-product decoder. Owns its message buffers; one decode at a time.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    n: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    posterior: Vec<f64>,
    bits: Vec<u8>,
    scratch: Vec<f64>,
}

impl BpDecoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let n = h.n();
        let mut check_start = Vec::with_capacity(h.m_rows() + 1);
        let mut edge_var = Vec::with_capacity(h.num_edges());
        check_start.push(0);
        for row in h.rows() {
            edge_var.extend_from_slice(row);
            check_start.push(edge_var.len());
        }
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, &v) in edge_var.iter().enumerate() {
            per_var[v].push(e);
        }
        let mut var_start = Vec::with_capacity(n + 1);
        let mut var_edges = Vec::with_capacity(edge_var.len());
        var_start.push(0);
        for edges in per_var {
            var_edges.extend(edges);
            var_start.push(var_edges.len());
        }
        let max_dc = h.rows().iter().map(Vec::len).max().unwrap_or(0);
        let e = edge_var.len();
        Self {
            n,
            check_start,
            edge_var,
            var_start,
            var_edges,
            c2v: vec![0.0; e],
            v2c: vec![0.0; e],
            posterior: vec![0.0; n],
            bits: vec![0; n],
            scratch: vec![0.0; max_dc],
        }
    }

    fn syndrome_ok(&self) -> bool {
        self.check_start.windows(2).all(|w| {
            self.edge_var[w[0]..w[1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ self.bits[v])
                == 0
        })
    }

    fn decide(&mut self) {
        for (b, &l) in self.bits.iter_mut().zip(&self.posterior) {
            *b = u8::from(l < 0.0);
        }
    }

    fn check_update(&mut self) {
        let limit = (0.5 * LLR_CLIP).tanh();
        for w in self.check_start.windows(2) {
            let (s, e) = (w[0], w[1]);
            let d = e - s;
            let t = &mut self.scratch[..d];
            for (ti, &m) in t.iter_mut().zip(&self.v2c[s..e]) {
                *ti = (0.5 * m).tanh();
            }
            // Prefix products go into the outgoing slots first.
            let mut prefix = 1.0;
            for (out, &ti) in self.c2v[s..e].iter_mut().zip(t.iter()) {
                *out = prefix;
                prefix *= ti;
            }
            let mut suffix = 1.0;
            for (out, &ti) in self.c2v[s..e].iter_mut().zip(t.iter()).rev() {
                let p = (*out * suffix).clamp(-limit, limit);
                *out = 2.0 * p.atanh();
                suffix *= ti;
            }
        }
    }

    fn variable_update(&mut self, channel: &[f64]) {
        for v in 0..self.n {
            let edges = &self.var_edges[self.var_start[v]..self.var_start[v + 1]];
            let total = channel[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
            self.posterior[v] = total;
            for &e in edges {
                self.v2c[e] = (total - self.c2v[e]).clamp(-LLR_CLIP, LLR_CLIP);
            }
        }
    }

    /// Decodes channel LLRs (positive favours bit 0). Hard decisions take bit 0
    /// on a zero posterior.
    pub fn decode(&mut self, llrs: &[f64], cfg: &BpConfig) -> Result<DecodeResult> {
        if llrs.len() != self.n {
            return Err(Error::Length {
                expected: self.n,
                got: llrs.len(),
            });
        }
        if let Some(i) = llrs.iter().position(|l| !l.is_finite()) {
            return Err(Error::domain(format!("channel LLR {i} is not finite")));
        }
        self.posterior.copy_from_slice(llrs);
        self.decide();
        if cfg.early_stop && self.syndrome_ok() {
            return Ok(self.result(0, true));
        }
        for (e, &v) in self.edge_var.iter().enumerate() {
            self.v2c[e] = llrs[v].clamp(-LLR_CLIP, LLR_CLIP);
        }
        for it in 1..=cfg.max_iter {
            self.check_update();
            self.variable_update(llrs);
            self.decide();
            if cfg.early_stop && self.syndrome_ok() {
                return Ok(self.result(it, true));
            }
        }
        let ok = self.syndrome_ok();
        Ok(self.result(cfg.max_iter, ok))
    }

    /// Posterior LLRs from the last decode.
    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    fn result(&self, iterations_used: usize, syndrome_ok: bool) -> DecodeResult {
        DecodeResult {
            bits: self.bits.clone(),
            iterations_used,
            syndrome_ok,
        }
    }
}

/// One-shot flooding BP decode with early termination.
pub fn decode_bp(h: &ParityCheckMatrix, channel_llrs: &[f64], max_iter: usize) -> Result<DecodeResult> {
    BpDecoder::new(h).decode(
        channel_llrs,
        &BpConfig {
            max_iter,
            early_stop: true,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::build_encoder;

    fn toy() -> ParityCheckMatrix {
        ParityCheckMatrix::from_rows(6, vec![vec![0, 1, 3], vec![1, 2, 4], vec![0, 2, 5]]).unwrap()
    }

    fn llrs_for(codeword: &[u8], mag: f64) -> Vec<f64> {
        codeword.iter().map(|&b| if b == 0 { mag } else { -mag }).collect()
    }

    #[test]
    fn noiseless_codeword_passes_through() {
        let h = toy();
        let c = build_encoder(&h).encode(&[1, 0, 1]).unwrap();
        let r = decode_bp(&h, &llrs_for(&c, 8.0), 50).unwrap();
        assert_eq!(r.bits, c);
        assert!(r.syndrome_ok);
        assert!(r.iterations_used <= 1);
    }

    #[test]
    fn corrects_single_flip_on_toy_code() {
        let h = toy();
        let enc = build_encoder(&h);
        for w in 0..8u8 {
            let c = enc.encode(&[w & 1, (w >> 1) & 1, (w >> 2) & 1]).unwrap();
            for j in 0..6 {
                // Degree-2 positions have two independent checks to outvote one weak error.
                if h.col(j).len() < 2 {
                    continue;
                }
                let mut l = llrs_for(&c, 6.0);
                l[j] = -l[j] / 3.0;
                let r = decode_bp(&h, &l, 50).unwrap();
                assert_eq!(r.bits, c, "word {w}, flip {j}");
                assert!(r.syndrome_ok);
            }
        }
    }

    #[test]
    fn all_zero_llrs_decide_zero() {
        let h = toy();
        let r = decode_bp(&h, &[0.0; 6], 50).unwrap();
        assert_eq!(r.bits, vec![0; 6]);
        assert!(r.syndrome_ok);
        assert_eq!(r.iterations_used, 0);
    }

    #[test]
    fn huge_llrs_stay_finite() {
        let h = toy();
        let mut l = vec![1e6; 6];
        l[2] = -1e6;
        let mut dec = BpDecoder::new(&h);
        let r = dec
            .decode(&l, &BpConfig { max_iter: 10, early_stop: false })
            .unwrap();
        assert_eq!(r.iterations_used, 10);
        assert!(dec.posterior().iter().all(|p| p.is_finite()));
    }

    #[test]
    fn rejects_bad_input() {
        let h = toy();
        assert!(decode_bp(&h, &[0.0; 5], 5).is_err());
        assert!(decode_bp(&h, &[f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0], 5).is_err());
    }
}
