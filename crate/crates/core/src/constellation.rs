//! Exponential-like constellation design.
//!
//! Levels are built in three stages:
//!
//! 1. **Centroids.** The exponential density with mean `energy` is cut into `M`
//!    equiprobable intervals at its quantiles, and each interval is replaced by
//!    its conditional mean. The resulting constellation has mean `energy` and
//!    PAPR `1 + ln M`.
//! 2. **Stretching.** All centroids are shifted down by the smallest one and
//!    rescaled by `g(M) = ((M-1)·ln(M/(M-1)))⁻¹`, which pins the lowest level at
//!    zero without changing the mean.
//! 3. **Quantization.** The stretched levels are rounded onto a grid of
//!    `2^(b+n)` points, and the grid step is fine-tuned to a basic level `Δ` so
//!    that the mean is exactly `energy` again.
//!
//! Standard PAM with the same mean is provided for comparison.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default number of extra grid bits beyond `log2 M`.
pub const DEFAULT_EXTRA_BITS: u32 = 2;

/// Ordered, equiprobable, nonnegative intensity levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constellation<T> {
    levels: Vec<T>,
    mean: T,
}

impl<T: Real> Constellation<T> {
    /// Validates and wraps a level list: nonempty, finite, nonnegative, strictly ascending.
    pub fn new(levels: Vec<T>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::domain("constellation needs at least one level"));
        }
        if let Some(bad) = levels.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("non-finite level {bad}")));
        }
        if levels[0] < T::zero() {
            return Err(Error::domain(format!("negative intensity level {}", levels[0])));
        }
        if let Some(i) = levels.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "levels must be strictly ascending: a[{}] = {} >= a[{}] = {}",
                i,
                levels[i],
                i + 1,
                levels[i + 1]
            )));
        }
        let mean = levels.iter().copied().sum::<T>() / T::from_count(levels.len());
        Ok(Self { levels, mean })
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    /// Number of levels `M`.
    pub fn m_size(&self) -> usize {
        self.levels.len()
    }

    /// Mean intensity under equiprobable use of the levels.
    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn peak(&self) -> T {
        *self.levels.last().expect("nonempty")
    }

    /// Peak-to-average ratio, `max level / mean`.
    pub fn papr(&self) -> Result<T> {
        papr(self)
    }

    /// Same shape with every level multiplied by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        if !(factor > T::zero()) {
            return Err(Error::domain("scale factor must be positive"));
        }
        Self::new(self.levels.iter().map(|&x| x * factor).collect())
    }

    /// Same shape with every level moved by `offset`; the result must stay nonnegative.
    pub fn shifted(&self, offset: T) -> Result<Self> {
        Self::new(self.levels.iter().map(|&x| x + offset).collect())
    }
}

/// A quantile of the exponential density; `q_M` is the unbounded right end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantile<T> {
    Finite(T),
    Infinite,
}

impl<T: Copy> Quantile<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Quantile::Finite(x) => Some(x),
            Quantile::Infinite => None,
        }
    }
}

fn check_energy<T: Real>(energy: T) -> Result<()> {
    if energy > T::zero() && energy.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("energy must be positive and finite, got {energy}")))
    }
}

fn check_size(m_size: usize) -> Result<()> {
    if m_size >= 2 {
        Ok(())
    } else {
        Err(Error::domain(format!("constellation size must be at least 2, got {m_size}")))
    }
}

/// `m`-th `M`-quantile of the exponential density with mean `energy`:
/// `q_m = energy·ln(M/(M-m))`, with `q_0 = 0` and `q_M` unbounded.
pub fn quantile<T: Real>(m_size: usize, m: usize, energy: T) -> Result<Quantile<T>> {
    check_energy(energy)?;
    if m_size == 0 || m > m_size {
        return Err(Error::domain(format!("quantile index {m} outside [0, {m_size}]")));
    }
    if m == m_size {
        return Ok(Quantile::Infinite);
    }
    if m == 0 {
        return Ok(Quantile::Finite(T::zero()));
    }
    let ratio = T::from_count(m_size) / T::from_count(m_size - m);
    Ok(Quantile::Finite(energy * ratio.ln()))
}

/// Offset `ε_m = c_m - q_m` of a centroid above the left end of its interval, for `m < M-1`.
pub fn centroid_offset<T: Real>(m_size: usize, m: usize, energy: T) -> Result<T> {
    check_energy(energy)?;
    if m + 1 >= m_size {
        return Err(Error::domain(format!(
            "centroid offset defined for m in [0, {}), got {m}",
            m_size.saturating_sub(1)
        )));
    }
    let k = T::from_count(m_size - m - 1);
    Ok(energy * (T::one() - k * k.recip().ln_1p()))
}

/// Conditional mean of the exponential density over `[q_m, q_{m+1})`.
///
/// The last interval is unbounded and has the closed form `energy·(ln M + 1)`.
pub fn centroid<T: Real>(m_size: usize, m: usize, energy: T) -> Result<T> {
    check_energy(energy)?;
    if m_size == 0 || m >= m_size {
        return Err(Error::domain(format!("centroid index {m} outside [0, {m_size})")));
    }
    if m == m_size - 1 {
        return Ok(energy * (T::from_count(m_size).ln() + T::one()));
    }
    let q = quantile(m_size, m, energy)?.finite().expect("m < M");
    Ok(q + centroid_offset(m_size, m, energy)?)
}

/// Centroid constellation `{c_0, …, c_{M-1}}` with mean `energy`.
pub fn centroid_constellation<T: Real>(m_size: usize, energy: T) -> Result<Constellation<T>> {
    check_size(m_size)?;
    let levels = (0..m_size)
        .map(|m| centroid(m_size, m, energy))
        .collect::<Result<Vec<_>>>()?;
    Constellation::new(levels)
}

/// `(M-1)·ln(M/(M-1))`, the reciprocal of the stretching gain.
fn stretch_divisor<T: Real>(m_size: usize) -> T {
    let k = T::from_count(m_size - 1);
    k * k.recip().ln_1p()
}

/// Linear stretching gain `g(M) = ((M-1)·ln(M/(M-1)))⁻¹`.
pub fn scaling_gain<T: Real>(m_size: usize) -> Result<T> {
    check_size(m_size)?;
    Ok(stretch_divisor::<T>(m_size).recip())
}

/// Optical SNR gain of stretching, in dB.
pub fn scaling_gain_db<T: Real>(m_size: usize) -> Result<T> {
    Ok(T::lit(10.0) * scaling_gain::<T>(m_size)?.log10())
}

/// First-order approximation `5 / ((M-1)·ln 10)` of [`scaling_gain_db`].
pub fn approx_gain_db<T: Real>(m_size: usize) -> Result<T> {
    check_size(m_size)?;
    Ok(T::lit(5.0) / (T::from_count(m_size - 1) * T::LN_10()))
}

/// Shifts a centroid constellation down to zero and rescales it by `g(M)`.
///
/// `l_m = (c_m - c_0) / ((M-1)·ln(M/(M-1)))`. The mean is preserved only when
/// the input is the centroid constellation for its size.
pub fn shift_scale<T: Real>(centroids: &Constellation<T>) -> Result<Constellation<T>> {
    let m_size = centroids.m_size();
    check_size(m_size)?;
    let c0 = centroids.levels()[0];
    let div = stretch_divisor::<T>(m_size);
    let levels = centroids.levels().iter().map(|&c| (c - c0) / div).collect();
    Constellation::new(levels)
}

/// Rounds stretched levels onto the grid `{0, d, 2d, …}` with
/// `d = l_{M-1} / (2^(b+n) - 1)` using `floor(l/d + 1/2)`.
///
/// Returns the integer levels and the raw step `d`. Two levels landing on the
/// same integer is an error.
pub fn quantize_levels<T: Real>(
    stretched: &Constellation<T>,
    bits: u32,
    extra_bits: u32,
) -> Result<(Vec<u64>, T)> {
    let m_size = stretched.m_size();
    if bits == 0 || bits > 20 || m_size != 1usize << bits {
        return Err(Error::domain(format!(
            "quantization needs M = 2^b with 1 <= b <= 20, got M = {m_size}, b = {bits}"
        )));
    }
    let total = bits + extra_bits;
    if total > 52 {
        return Err(Error::domain(format!("b + n = {total} exceeds 52 grid bits")));
    }
    let top = (1u64 << total) - 1;
    let peak = stretched.peak();
    if !(peak > T::zero()) {
        return Err(Error::domain("stretched constellation has zero peak"));
    }
    let step = peak / T::lit(top as f64);
    let half = T::lit(0.5);
    let mut ints = Vec::with_capacity(m_size);
    for (m, &l) in stretched.levels().iter().enumerate() {
        let v = (l / step + half).floor();
        let v = v.to_u64().ok_or_else(|| Error::domain(format!("level {m} off grid")))?;
        ints.push(v.min(top));
    }
    // l_{M-1}/d is 2^(b+n)-1 up to rounding; pin it.
    *ints.last_mut().expect("nonempty") = top;
    if let Some(i) = ints.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Collision {
            first: i,
            second: i + 1,
            value: ints[i + 1],
            grid_points: top + 1,
        });
    }
    Ok((ints, step))
}

/// Basic level `Δ = energy / mean(ℓ)`, so that `{ℓ_m·Δ}` has mean exactly `energy`.
pub fn basic_level<T: Real>(integer_levels: &[u64], energy: T) -> Result<T> {
    check_energy(energy)?;
    let sum: u64 = integer_levels.iter().sum();
    if integer_levels.is_empty() || sum == 0 {
        return Err(Error::domain("integer levels must have a positive sum"));
    }
    Ok(energy * T::from_count(integer_levels.len()) / T::lit(sum as f64))
}

/// Every stage of the shaping pipeline for one `(b, n, energy)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapedDesign<T> {
    pub m_size: usize,
    pub bits: u32,
    pub extra_bits: u32,
    pub energy: T,
    /// `q_0 … q_{M-1}`; the unbounded `q_M` is omitted.
    pub quantiles: Vec<T>,
    pub centroids: Vec<T>,
    pub stretched: Vec<T>,
    pub integer_levels: Vec<u64>,
    pub grid_step_raw: T,
    pub basic_level: T,
    pub constellation: Constellation<T>,
}

/// Runs centroid generation, stretching and quantization for `M = 2^bits`.
pub fn build_shaped<T: Real>(bits: u32, extra_bits: u32, energy: T) -> Result<ShapedDesign<T>> {
    check_energy(energy)?;
    if bits == 0 || bits > 20 {
        return Err(Error::domain(format!("bits must be in 1..=20, got {bits}")));
    }
    let m_size = 1usize << bits;
    let quantiles = (0..m_size)
        .map(|m| Ok(quantile(m_size, m, energy)?.finite().expect("m < M")))
        .collect::<Result<Vec<T>>>()?;
    let xc = centroid_constellation(m_size, energy)?;
    let xl = shift_scale(&xc)?;
    let (integer_levels, grid_step_raw) = quantize_levels(&xl, bits, extra_bits)?;
    let delta = basic_level(&integer_levels, energy)?;
    let constellation =
        Constellation::new(integer_levels.iter().map(|&l| T::lit(l as f64) * delta).collect())?;
    Ok(ShapedDesign {
        m_size,
        bits,
        extra_bits,
        energy,
        quantiles,
        centroids: xc.levels,
        stretched: xl.levels,
        integer_levels,
        grid_step_raw,
        basic_level: delta,
        constellation,
    })
}

impl<T: Real> ShapedDesign<T> {
    /// Stage-by-stage table, header `m,q_m,c_m,l_m,ell_m,level`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,q_m,c_m,l_m,ell_m,level\n");
        for m in 0..self.m_size {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                m,
                self.quantiles[m],
                self.centroids[m],
                self.stretched[m],
                self.integer_levels[m],
                self.constellation.levels()[m]
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design serializes")
    }
}

/// `M`-PAM `{0, Δ, …, (M-1)Δ}` with `Δ = 2·energy/(M-1)`, so the mean is `energy`.
pub fn pam<T: Real>(m_size: usize, energy: T) -> Result<Constellation<T>> {
    check_size(m_size)?;
    check_energy(energy)?;
    let step = T::lit(2.0) * energy / T::from_count(m_size - 1);
    Constellation::new((0..m_size).map(|i| T::from_count(i) * step).collect())
}

/// Peak-to-average ratio of a constellation.
pub fn papr<T: Real>(c: &Constellation<T>) -> Result<T> {
    if !(c.mean() > T::zero()) {
        return Err(Error::domain("PAPR undefined for zero-mean constellation"));
    }
    Ok(c.peak() / c.mean())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn quantile_values() {
        assert_eq!(quantile(4, 0, 1.0_f64).unwrap(), Quantile::Finite(0.0));
        let q = quantile(4, 2, 1.0_f64).unwrap().finite().unwrap();
        assert!(close(q, 2.0_f64.ln(), 1e-15));
        let q = quantile(4, 3, 2.0_f64).unwrap().finite().unwrap();
        assert!(close(q, 2.0 * 4.0_f64.ln(), 1e-14));
        assert_eq!(quantile(4, 4, 1.0_f64).unwrap(), Quantile::Infinite);
    }

    #[test]
    fn quantile_domain_errors() {
        assert!(quantile(4, 5, 1.0_f64).is_err());
        assert!(quantile(4, 1, 0.0_f64).is_err());
        assert!(quantile(4, 1, -1.0_f64).is_err());
    }

    #[test]
    fn centroid_values() {
        assert!(close(centroid(4, 3, 1.0_f64).unwrap(), 4.0_f64.ln() + 1.0, 1e-15));
        assert!(close(
            centroid(4, 0, 1.0_f64).unwrap(),
            1.0 - 3.0 * (4.0_f64 / 3.0).ln(),
            1e-15
        ));
        assert!(close(centroid(4, 2, 1.0_f64).unwrap(), 1.0, 1e-15));
        assert!(centroid(4, 4, 1.0_f64).is_err());
    }

    #[test]
    fn centroid_constellation_m4_and_m2() {
        let xc = centroid_constellation(4, 1.0_f64).unwrap();
        let want = [0.136954, 0.476752, 1.0, 2.386294];
        for (a, b) in xc.levels().iter().zip(want) {
            assert!(close(*a, b, 5e-7), "{a} vs {b}");
        }
        assert!(close(xc.mean(), 1.0, 1e-15));
        assert!(close(xc.papr().unwrap(), 1.0 + 4.0_f64.ln(), 1e-14));

        let x2 = centroid_constellation(2, 1.0_f64).unwrap();
        let ln2 = 2.0_f64.ln();
        assert!(close(x2.levels()[0], 1.0 - ln2, 1e-15));
        assert!(close(x2.levels()[1], 1.0 + ln2, 1e-15));
    }

    #[test]
    fn shift_scale_m4() {
        let xl = shift_scale(&centroid_constellation(4, 1.0_f64).unwrap()).unwrap();
        let want = [0.0, 0.393719, 1.0, 2.606281];
        for (a, b) in xl.levels().iter().zip(want) {
            assert!(close(*a, b, 5e-7), "{a} vs {b}");
        }
        assert_eq!(xl.levels()[0], 0.0);
        assert!(close(xl.mean(), 1.0, 1e-15));
        let g: f64 = scaling_gain(4).unwrap();
        assert!(close(xl.papr().unwrap(), 1.0 + g * 4.0_f64.ln(), 1e-14));
    }

    #[test]
    fn scaling_gains_match_reported_values() {
        for (m, want) in [(8, 0.29), (16, 0.14), (32, 0.07)] {
            let g: f64 = scaling_gain_db(m).unwrap();
            assert!(close(g, want, 0.005), "M={m}: {g}");
        }
    }

    #[test]
    fn approx_gain_values() {
        assert!(close(approx_gain_db::<f64>(8).unwrap(), 0.310, 5e-4));
        assert!(close(approx_gain_db::<f64>(32).unwrap(), 0.070, 5e-4));
        for m in 8..=128 {
            let exact: f64 = scaling_gain_db(m).unwrap();
            let approx: f64 = approx_gain_db(m).unwrap();
            assert!((exact - approx).abs() / exact < 0.1);
        }
    }

    #[test]
    fn quantize_table_rows() {
        let xl = shift_scale(&centroid_constellation(4, 1.0_f64).unwrap()).unwrap();
        let (ints, d) = quantize_levels(&xl, 2, 2).unwrap();
        assert_eq!(ints, vec![0, 2, 6, 15]);
        assert!(close(d, xl.peak() / 15.0, 1e-15));
    }

    #[test]
    fn quantize_rejects_non_power_of_two() {
        let xl = shift_scale(&centroid_constellation(6, 1.0_f64).unwrap()).unwrap();
        assert!(matches!(quantize_levels(&xl, 2, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn collision_reports_indices() {
        match build_shaped::<f64>(4, 0, 1.0) {
            Err(Error::Collision {
                first,
                second,
                value,
                grid_points,
            }) => {
                assert_eq!(second, first + 1);
                assert_eq!(grid_points, 16);
                assert!(value < 16);
            }
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn basic_level_values() {
        assert!(close(basic_level(&[0, 2, 6, 15], 1.0_f64).unwrap(), 4.0 / 23.0, 1e-16));
        assert!(close(basic_level(&[0, 1], 0.5_f64).unwrap(), 1.0, 1e-16));
        let row8 = [0, 1, 3, 5, 8, 11, 17, 31];
        assert!(close(basic_level(&row8, 1.0_f64).unwrap(), 8.0 / 76.0, 1e-16));
        assert!(basic_level(&[0, 0], 1.0_f64).is_err());
        assert!(basic_level::<f64>(&[], 1.0).is_err());
    }

    #[test]
    fn build_shaped_small() {
        let d = build_shaped::<f64>(2, 2, 1.0).unwrap();
        assert_eq!(d.integer_levels, vec![0, 2, 6, 15]);
        assert!(close(d.basic_level, 4.0 / 23.0, 1e-16));
        let d = build_shaped::<f64>(3, 2, 1.0).unwrap();
        assert_eq!(d.integer_levels, vec![0, 1, 3, 5, 8, 11, 17, 31]);
    }

    #[test]
    fn pam_values() {
        assert_eq!(pam(4, 1.5_f64).unwrap().levels(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(pam(2, 0.5_f64).unwrap().levels(), &[0.0, 1.0]);
        for m in [2, 4, 16, 64] {
            assert!(close(pam(m, 1.0_f64).unwrap().papr().unwrap(), 2.0, 1e-14));
        }
    }

    #[test]
    fn papr_values() {
        let c = Constellation::new(vec![0.0_f64, 2.0]).unwrap();
        assert_eq!(papr(&c).unwrap(), 2.0);
        let z = Constellation::new(vec![0.0_f64]).unwrap();
        assert!(papr(&z).is_err());
        let xc = centroid_constellation(16, 1.0_f64).unwrap();
        assert!(close(xc.papr().unwrap(), 1.0 + 16.0_f64.ln(), 1e-13));
    }

    #[test]
    fn constructor_validation() {
        assert!(Constellation::new(Vec::<f64>::new()).is_err());
        assert!(Constellation::new(vec![-0.1_f64, 1.0]).is_err());
        assert!(Constellation::new(vec![0.0_f64, 1.0, 1.0]).is_err());
        assert!(Constellation::new(vec![0.0_f64, f64::NAN]).is_err());
    }

    #[test]
    fn csv_export_has_one_row_per_level() {
        let d = build_shaped::<f64>(2, 2, 1.0).unwrap();
        let csv = d.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "m,q_m,c_m,l_m,ell_m,level");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("3,"));
        let v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(v["integer_levels"], serde_json::json!([0, 2, 6, 15]));
        assert_eq!(v["m_size"], 4);
    }

    #[test]
    fn works_in_single_precision() {
        let d = build_shaped::<f32>(4, 2, 1.0).unwrap();
        assert_eq!(
            d.integer_levels,
            vec![0, 1, 2, 4, 5, 7, 8, 10, 12, 15, 17, 21, 25, 31, 40, 63]
        );
        assert!((d.constellation.mean() - 1.0).abs() < 1e-6);
    }
}
