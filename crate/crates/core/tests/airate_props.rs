use ois_shape::airate::{ln_output_pdf_exponential, McEstimate};
use ois_shape::{
    air_exponential, build_shaped, capacity_upper, centroid_constellation, mi_discrete,
    mi_discrete_mc, output_pdf_exponential, pam, shift_scale, snr_from_db, Constellation,
    QuadratureConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

fn shaped(bits: u32) -> Constellation<f64> {
    let extra = if bits <= 5 { 2 } else { 3 };
    build_shaped(bits, extra, 1.0).unwrap().constellation
}

fn sigma_at(snr_db: f64) -> f64 {
    1.0 / snr_from_db(snr_db)
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Composite Simpson with a fixed even number of intervals.
fn simpson_fixed(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// CDF of `X + Z` with `X ~ Exp(1)` and `Z ~ N(0, s²)`, obtained by integrating
/// the convolution in closed form.
fn exp_plus_gauss_cdf(y: f64, s: f64) -> f64 {
    let phi = |x: f64| 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2);
    let tail = if y / s - s < -30.0 {
        0.0
    } else {
        (0.5 * s * s - y).exp() * phi(y / s - s)
    };
    phi(y / s) - tail
}

#[test]
fn rates_grow_with_snr() {
    for c in [pam(8, 1.0).unwrap(), shaped(3), shaped(4)] {
        let mut prev = -1.0;
        for i in 0..=16 {
            let snr_db = -5.0 + 2.5 * i as f64;
            let r = mi_discrete(&c, sigma_at(snr_db), &cfg()).unwrap();
            let cap = (c.m_size() as f64).log2();
            assert!((0.0..=cap).contains(&r));
            assert!(r >= prev - 1e-9, "{snr_db} dB: {r} < {prev}");
            prev = r;
        }
    }
}

#[test]
fn rate_ignores_common_offset() {
    let c = shaped(4);
    for snr_db in [0.0, 8.0, 16.0] {
        let s = sigma_at(snr_db);
        let base = mi_discrete(&c, s, &cfg()).unwrap();
        for offset in [0.3, 5.0] {
            let moved = mi_discrete(&c.shifted(offset).unwrap(), s, &cfg()).unwrap();
            assert!((base - moved).abs() < 1e-7, "{snr_db} dB, +{offset}: {base} vs {moved}");
        }
    }
}

#[test]
fn stretching_never_hurts() {
    for m in [4usize, 8, 16, 32] {
        let xc = centroid_constellation(m, 1.0).unwrap();
        let xl = shift_scale(&xc).unwrap();
        for i in 0..=10 {
            let s = sigma_at(2.0 * i as f64);
            let rc = mi_discrete(&xc, s, &cfg()).unwrap();
            let rl = mi_discrete(&xl, s, &cfg()).unwrap();
            assert!(rl >= rc - 1e-9, "M={m}: {rl} < {rc}");
        }
    }
}

#[test]
fn shaped_beats_pam_below_saturation() {
    for bits in [3u32, 4] {
        let m = 1usize << bits;
        let p = pam(m, 1.0).unwrap();
        let x = shaped(bits);
        let mut checked = 0;
        for i in 0..=60 {
            let snr_db = 0.5 * i as f64;
            let s = sigma_at(snr_db);
            let rp = mi_discrete(&p, s, &cfg()).unwrap();
            if rp > bits as f64 - 1.0 {
                break;
            }
            let rx = mi_discrete(&x, s, &cfg()).unwrap();
            assert!(rx > rp, "M={m} {snr_db} dB: shaped {rx} < pam {rp}");
            checked += 1;
        }
        assert!(checked >= 12);
    }
}

#[test]
fn pam_wins_close_to_saturation() {
    // Uniform spacing has the larger minimum distance, which dominates once
    // the rate nears log2 M.
    let s = sigma_at(15.0);
    let rp = mi_discrete(&pam(16, 1.0).unwrap(), s, &cfg()).unwrap();
    let rx = mi_discrete(&shaped(4), s, &cfg()).unwrap();
    assert!(rp > rx + 0.1, "pam {rp} shaped {rx}");
}

#[test]
fn quadrature_agrees_with_monte_carlo_grid() {
    let mut seed = 100;
    for bits in 1u32..=5 {
        let c = if bits == 1 { pam(2, 1.0).unwrap() } else { shaped(bits) };
        for snr_db in [0.0, 5.0, 10.0, 15.0, 20.0] {
            let s = sigma_at(snr_db);
            let q = mi_discrete(&c, s, &cfg()).unwrap();
            let McEstimate { rate, std_error } = mi_discrete_mc(&c, s, 100_000, seed).unwrap();
            seed += 1;
            // A saturated input has zero sample variance, so the quadrature
            // tolerance is added to the Monte-Carlo interval.
            let quad_tol = cfg().rel_tolerance * (c.m_size() as f64).log2() * 10.0;
            assert!(
                (q - rate).abs() <= 3.0 * std_error + quad_tol,
                "M={} {snr_db} dB: quad {q} mc {rate} ± {std_error}",
                c.m_size()
            );
        }
    }
}

#[test]
fn exponential_rate_below_upper_bound() {
    for i in 0..=40 {
        let snr_db = -10.0 + i as f64;
        let snr = snr_from_db(snr_db);
        let r: f64 = air_exponential(1.0, 1.0 / snr, &cfg()).unwrap();
        assert!(r >= 0.0);
        assert!(r <= capacity_upper(snr), "{snr_db} dB");
    }
}

#[test]
fn output_pdf_normalizes() {
    for s in [0.01, 0.1, 1.0, 5.0] {
        let f = |y: f64| output_pdf_exponential(y, 1.0, s);
        let lo = -12.0 * s;
        let hi = 40.0 + 12.0 * s;
        let n = (((hi - lo) / s.min(1.0)) as usize * 64).max(2000) & !1;
        let total = simpson_fixed(f, lo, hi, n);
        assert!((total - 1.0).abs() < 1e-8, "s={s}: {total}");
    }
}

#[test]
fn output_pdf_matches_samples() {
    let s = 0.5;
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut ys: Vec<f64> = (0..n)
        .map(|_| {
            let x: f64 = rng.sample(Exp1);
            let z: f64 = rng.sample(StandardNormal);
            x + s * z
        })
        .collect();
    ys.sort_by(f64::total_cmp);
    let mut d = 0.0_f64;
    for (i, &y) in ys.iter().enumerate() {
        let f = exp_plus_gauss_cdf(y, s);
        d = d.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
    }
    let critical = 1.628 / (n as f64).sqrt();
    assert!(d < critical, "KS {d} >= {critical}");

    // The sampling CDF is the integral of the density under test.
    for y in [-0.5, 0.0, 0.7, 2.0, 5.0] {
        let integral = simpson_fixed(|t| output_pdf_exponential(t, 1.0, s), -10.0, y, 20_000);
        assert!((integral - exp_plus_gauss_cdf(y, s)).abs() < 1e-9);
    }
}

#[test]
fn output_pdf_vanishing_noise() {
    let s = 1e-4;
    for y in [0.1_f64, 1.0, 3.0, 10.0] {
        let p = output_pdf_exponential(y, 1.0, s);
        assert!((p - (-y).exp()).abs() / (-y).exp() < 1e-6, "y={y}");
    }
    for energy in [0.5_f64, 4.0] {
        let y = 2.0_f64;
        let p = output_pdf_exponential(y, energy, 1e-5);
        let expected = (-y / energy).exp() / energy;
        assert!((p - expected).abs() / expected < 1e-6);
    }
}

#[test]
fn output_pdf_log_domain_survives_heavy_noise() {
    let lp = ln_output_pdf_exponential(3.0, 1.0, 80.0);
    assert!(lp.is_finite());
    let gauss = -0.5 * (3.0_f64 / 80.0).powi(2) - (80.0 * (2.0 * std::f64::consts::PI).sqrt()).ln();
    // With σ ≫ ℰ the output is essentially Gaussian.
    assert!((lp - gauss).abs() < 0.05);
}
