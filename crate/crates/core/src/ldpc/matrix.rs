use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Sparse binary parity-check matrix stored by rows and by columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix with `n` columns from per-row column supports.
    ///
    /// Supports are sorted; duplicate or out-of-range entries and empty rows or
    /// columns are rejected.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || rows.is_empty() {
            return Err(Error::domain("parity-check matrix must have rows and columns"));
        }
        let mut rows = rows;
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.is_empty() {
                return Err(Error::domain(format!("row {r} is empty")));
            }
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::domain(format!("row {r} lists column {} twice", w[0])));
            }
            if let Some(&c) = row.last().filter(|&&c| c >= n) {
                return Err(Error::domain(format!("row {r} has column {c} >= n = {n}")));
            }
            for &c in row.iter() {
                cols[c].push(r);
            }
        }
        if let Some(c) = cols.iter().position(Vec::is_empty) {
            return Err(Error::domain(format!("column {c} is empty")));
        }
        Ok(Self { n, rows, cols })
    }

    /// Code length.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `1 - m/n`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.m_rows() as f64 / self.n as f64
    }

    /// `true` iff every check has even parity over `bits`.
    pub fn syndrome_ok(&self, bits: &[u8]) -> Result<bool> {
        if bits.len() != self.n {
            return Err(Error::Length {
                expected: self.n,
                got: bits.len(),
            });
        }
        Ok(self.syndrome_ok_unchecked(bits))
    }

    pub(crate) fn syndrome_ok_unchecked(&self, bits: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ bits[c]) & 1 == 0)
    }

    /// Canonical alist text: no zero padding, single spaces, one list per line.
    pub fn to_alist(&self) -> String {
        let mut out = String::new();
        let max_col = self.cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let join = |v: &mut dyn Iterator<Item = usize>| {
            v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        let _ = writeln!(out, "{} {}", self.n, self.m_rows());
        let _ = writeln!(out, "{max_col} {max_row}");
        let _ = writeln!(out, "{}", join(&mut self.cols.iter().map(Vec::len)));
        let _ = writeln!(out, "{}", join(&mut self.rows.iter().map(Vec::len)));
        for col in &self.cols {
            let _ = writeln!(out, "{}", join(&mut col.iter().map(|r| r + 1)));
        }
        for row in &self.rows {
            let _ = writeln!(out, "{}", join(&mut row.iter().map(|c| c + 1)));
        }
        out
    }

    /// Parses MacKay's alist format. Zero entries (padding) are ignored, blank
    /// lines are skipped, and the column and row listings must describe the same
    /// matrix.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut last_line = 0;
        let mut next_numbers = |expect: &str| -> Result<(usize, Vec<usize>)> {
            let (no, line) = lines.next().ok_or(Error::Parse {
                line: last_line + 1,
                msg: format!("unexpected end of input, expected {expect}"),
            })?;
            last_line = no;
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: no,
                        msg: format!("`{t}` is not a nonnegative integer"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((no, nums))
        };
        let exact = |no: usize, nums: &[usize], want: usize, what: &str| -> Result<()> {
            if nums.len() != want {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("expected {want} {what}, found {}", nums.len()),
                });
            }
            Ok(())
        };

        let (no, dims) = next_numbers("`n m`")?;
        exact(no, &dims, 2, "dimensions")?;
        let (n, m) = (dims[0], dims[1]);
        if n == 0 || m == 0 {
            return Err(Error::Parse {
                line: no,
                msg: "dimensions must be positive".into(),
            });
        }
        let (no, maxes) = next_numbers("maximum degrees")?;
        exact(no, &maxes, 2, "maximum degrees")?;
        let (no, col_deg) = next_numbers("column degrees")?;
        exact(no, &col_deg, n, "column degrees")?;
        if let Some(c) = col_deg.iter().position(|&d| d == 0) {
            return Err(Error::Parse {
                line: no,
                msg: format!("column {} is empty", c + 1),
            });
        }
        let (no, row_deg) = next_numbers("row degrees")?;
        exact(no, &row_deg, m, "row degrees")?;
        if let Some(r) = row_deg.iter().position(|&d| d == 0) {
            return Err(Error::Parse {
                line: no,
                msg: format!("row {} is empty", r + 1),
            });
        }

        let mut read_lists = |count: usize, degrees: &[usize], bound: usize, what: &str| {
            let mut lists = Vec::with_capacity(count);
            for (i, &deg) in degrees.iter().enumerate() {
                let (no, nums) = next_numbers(what)?;
                let entries: Vec<usize> = nums.into_iter().filter(|&x| x != 0).collect();
                if entries.len() != deg {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("{what} {} declares degree {deg} but lists {}", i + 1, entries.len()),
                    });
                }
                if let Some(&bad) = entries.iter().find(|&&x| x > bound) {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("index {bad} out of range 1..={bound}"),
                    });
                }
                let mut sorted: Vec<usize> = entries.iter().map(|x| x - 1).collect();
                sorted.sort_unstable();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("{what} {} repeats an index", i + 1),
                    });
                }
                lists.push((no, sorted));
            }
            debug_assert_eq!(lists.len(), count);
            Ok::<_, Error>(lists)
        };
        let col_lists = read_lists(n, &col_deg, m, "column")?;
        let row_lists = read_lists(m, &row_deg, n, "row")?;

        let rows: Vec<Vec<usize>> = row_lists.iter().map(|(_, r)| r.clone()).collect();
        let h = Self::from_rows(n, rows).map_err(|e| Error::Parse {
            line: row_lists.first().map_or(0, |(l, _)| *l),
            msg: e.to_string(),
        })?;
        for (c, (no, list)) in col_lists.iter().enumerate() {
            if h.cols[c] != *list {
                return Err(Error::Parse {
                    line: *no,
                    msg: format!("column {} listing disagrees with the row listings", c + 1),
                });
            }
        }
        Ok(h)
    }
}

/// Parses alist text; see [`ParityCheckMatrix::from_alist`].
pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix> {
    ParityCheckMatrix::from_alist(text)
}

pub fn write_alist(h: &ParityCheckMatrix) -> String {
    h.to_alist()
}

/// Parity check over `bits`; errors on a length mismatch.
pub fn syndrome(h: &ParityCheckMatrix, bits: &[u8]) -> Result<bool> {
    h.syndrome_ok(bits)
}
