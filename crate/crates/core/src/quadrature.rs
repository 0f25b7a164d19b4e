//! Composite Simpson integration with interval doubling.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Integrates `f` over `[a, b]`, doubling the number of intervals from
/// `initial_intervals` until two successive Simpson estimates differ by at most
/// `tol·max(|S|, 1)`. Previous nodes are reused on each refinement.
pub(crate) fn simpson<T: Real>(
    what: &'static str,
    f: impl Fn(T) -> T,
    a: T,
    b: T,
    initial_intervals: usize,
    tol: T,
    max_intervals: usize,
) -> Result<T> {
    let mut intervals = initial_intervals.max(2);
    intervals += intervals % 2;
    let width = b - a;
    let node = |i: usize, n: usize| a + width * T::from_count(i) / T::from_count(n);

    let ends = f(a) + f(b);
    let mut odd = T::zero();
    let mut even = T::zero();
    for i in 1..intervals {
        let v = f(node(i, intervals));
        if i % 2 == 1 {
            odd = odd + v;
        } else {
            even = even + v;
        }
    }
    let estimate = |ends: T, odd: T, even: T, n: usize| {
        width / T::from_count(n) / T::lit(3.0) * (ends + T::lit(4.0) * odd + T::lit(2.0) * even)
    };
    let mut prev = estimate(ends, odd, even, intervals);
    loop {
        if intervals * 2 > max_intervals {
            return Err(Error::Numerical {
                what,
                estimate: prev.as_f64(),
                change: f64::NAN,
                nodes: intervals + 1,
            });
        }
        let n = intervals * 2;
        even = even + odd;
        odd = (0..intervals).map(|j| f(node(2 * j + 1, n))).sum();
        intervals = n;
        let next = estimate(ends, odd, even, intervals);
        let change = (next - prev).abs();
        if change <= tol * next.abs().max(T::one()) {
            return Ok(next);
        }
        if !next.is_finite() {
            return Err(Error::Numerical {
                what,
                estimate: next.as_f64(),
                change: change.as_f64(),
                nodes: intervals + 1,
            });
        }
        prev = next;
    }
}
