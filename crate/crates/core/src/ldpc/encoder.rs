use super::ParityCheckMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(len: usize) -> Self {
        BitRow(vec![0; len.div_ceil(64)])
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn parity_with(&self, other: &BitRow) -> u8 {
        let ones: u32 = self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum();
        (ones & 1) as u8
    }
}

/// Systematic encoder obtained by Gauss–Jordan elimination of `H` over GF(2).
///
/// Columns without a pivot carry the information bits; each pivot column's
/// bit is the parity of its reduced row restricted to those columns. Codewords
/// are emitted in the original column order.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    rank: usize,
    m_rows: usize,
    info_positions: Vec<usize>,
    pivot_positions: Vec<usize>,
    /// Reduced rows over the information coordinates, one per pivot.
    parity_rows: Vec<BitRow>,
}

impl Encoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let n = h.n();
        let mut rows: Vec<BitRow> = h
            .rows()
            .iter()
            .map(|support| {
                let mut r = BitRow::zeros(n);
                for &c in support {
                    r.set(c);
                }
                r
            })
            .collect();

        let mut rank = 0;
        let mut pivot_positions = Vec::new();
        let mut info_positions = Vec::new();
        for col in 0..n {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                info_positions.push(col);
                continue;
            };
            rows.swap(rank, p);
            let (head, tail) = rows.split_at_mut(rank);
            let (pivot, tail) = tail.split_first_mut().expect("pivot row");
            let pivot = &*pivot;
            for r in head.iter_mut().chain(tail.iter_mut()) {
                if r.get(col) {
                    r.xor_assign(pivot);
                }
            }
            pivot_positions.push(col);
            rank += 1;
        }

        let k = info_positions.len();
        let parity_rows = rows[..rank]
            .iter()
            .map(|row| {
                let mut compact = BitRow::zeros(k);
                for (j, &c) in info_positions.iter().enumerate() {
                    if row.get(c) {
                        compact.set(j);
                    }
                }
                compact
            })
            .collect();

        Encoder {
            n,
            rank,
            m_rows: h.m_rows(),
            info_positions,
            pivot_positions,
            parity_rows,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Information length `n - rank(H)`.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of linearly dependent checks in `H`.
    pub fn redundant_checks(&self) -> usize {
        self.m_rows - self.rank
    }

    /// Human-readable notes about the construction, e.g. rank deficiency.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.redundant_checks() > 0 {
            w.push(format!(
                "parity-check matrix has {} redundant row(s); k = {} exceeds the design value {}",
                self.redundant_checks(),
                self.k(),
                self.n - self.m_rows
            ));
        }
        w
    }

    /// Codeword coordinates that carry the information bits, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Encodes `k` information bits into an `n`-bit codeword.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        let mut out = vec![0u8; self.n];
        self.encode_into(info, &mut out)?;
        Ok(out)
    }

    pub fn encode_into(&self, info: &[u8], codeword: &mut [u8]) -> Result<()> {
        if info.len() != self.k() {
            return Err(Error::Length {
                expected: self.k(),
                got: info.len(),
            });
        }
        if codeword.len() != self.n {
            return Err(Error::Length {
                expected: self.n,
                got: codeword.len(),
            });
        }
        let mut packed = BitRow::zeros(self.k());
        for (j, (&bit, &pos)) in info.iter().zip(&self.info_positions).enumerate() {
            codeword[pos] = bit & 1;
            if bit & 1 == 1 {
                packed.set(j);
            }
        }
        for (row, &pos) in self.parity_rows.iter().zip(&self.pivot_positions) {
            codeword[pos] = row.parity_with(&packed);
        }
        Ok(())
    }

    /// Extracts the information bits from a codeword.
    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}

/// Builds the systematic encoder for `h`.
pub fn build_encoder(h: &ParityCheckMatrix) -> Encoder {
    Encoder::new(h)
}
