use std::f64::consts::PI;

use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;
use tailcap::{NoiseSpec, QuadratureConfig, StableParams};

const CATALAN: f64 = 0.915_965_594_177_219;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Convergent power series of the standard symmetric stable density, α > 1.
fn stable_series_near(alpha: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..200 {
        let two_k = 2.0 * k as f64;
        let ln_term = ln_gamma((two_k + 1.0) / alpha) - ln_gamma(two_k + 1.0)
            + if x == 0.0 { 0.0 } else { two_k * x.abs().ln() };
        if k > 0 && x == 0.0 {
            break;
        }
        let term = ln_term.exp();
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-18 * sum.abs() {
            break;
        }
    }
    sum / (PI * alpha)
}

/// Asymptotic tail series of the standard symmetric stable density.
fn stable_series_far(alpha: f64, x: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    for k in 1..=terms {
        let kf = k as f64;
        let mag = (ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0) - (alpha * kf + 1.0) * x.ln()).exp();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * mag * (kf * PI * alpha / 2.0).sin();
    }
    sum / PI
}

/// Cauchy(γ) convolved with N(0, σ²), integrated directly in the angle
/// variable `t = γ tan θ` with composite Simpson.
fn voigt(x: f64, gamma: f64, sigma: f64) -> f64 {
    let n = 400_000;
    let (a, b) = (-PI / 2.0, PI / 2.0);
    let h = (b - a) / n as f64;
    let g = |theta: f64| {
        let t = gamma * theta.tan();
        let z = (x - t) / sigma;
        if z.is_finite() {
            (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
        } else {
            0.0
        }
    };
    let mut s = g(a + 1e-15) + g(b - 1e-15);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + k as f64 * h);
    }
    s * h / 3.0 / PI
}

#[test]
fn cauchy_inversion_matches_closed_form() {
    let noise = NoiseSpec::cauchy(1.0).unwrap();
    for k in 0..=200 {
        let x = -20.0 + 0.2 * k as f64;
        let got = noise.pdf_by_inversion(x, &q()).unwrap();
        let want = 1.0 / (PI * (1.0 + x * x));
        assert!((got - want).abs() < 1e-8, "x={x}: {got} vs {want}");
    }
    let far = NoiseSpec::stable(1.0, 0.0, 1.0, 0.0).unwrap().pdf(100.0, &q()).unwrap();
    assert!((far / 3.1831e-5 - 1.0).abs() < 1e-3);
}

#[test]
fn symmetric_stable_matches_power_series() {
    for alpha in [1.2, 1.5, 1.8] {
        let noise = NoiseSpec::stable(alpha, 0.0, 1.0, 0.0).unwrap();
        // The alternating series cancels badly past |x| ≈ 2 for small α.
        for x in [0.0, 0.3, 1.0, 1.7] {
            let got = noise.pdf(x, &q()).unwrap();
            let want = stable_series_near(alpha, x);
            assert!((got - want).abs() < 1e-9, "alpha={alpha} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn symmetric_stable_matches_tail_series() {
    for alpha in [1.2, 1.5, 1.8] {
        let noise = NoiseSpec::stable(alpha, 0.0, 1.0, 0.0).unwrap();
        for x in [60.0, 100.0, 1e3, 1e5] {
            let got = noise.pdf(x, &q()).unwrap();
            let want = stable_series_far(alpha, x, 8);
            assert!((got / want - 1.0).abs() < 1e-6, "alpha={alpha} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn scaled_and_shifted_stable() {
    // p(x; γ, δ) = p((x − δ)/γ; 1, 0) / γ for symmetric laws.
    let base = NoiseSpec::stable(1.5, 0.0, 1.0, 0.0).unwrap();
    let moved = NoiseSpec::stable(1.5, 0.0, 2.5, -3.0).unwrap();
    for x in [-40.0, -3.0, 0.0, 4.0, 90.0] {
        let a = moved.pdf(x, &q()).unwrap();
        let b = base.pdf((x + 3.0) / 2.5, &q()).unwrap() / 2.5;
        assert!((a / b - 1.0).abs() < 1e-8, "x={x}");
    }
}

#[test]
fn skewed_stable_tails() {
    // β > 0 puts more mass on the right: right tail ∝ (1 + β), left ∝ (1 − β).
    let p = StableParams::new(1.5, 0.5, 1.0, 0.0).unwrap();
    let noise = NoiseSpec::AlphaStable(p);
    let x = 3e3;
    let right = noise.pdf(x, &q()).unwrap();
    let left = noise.pdf(-x, &q()).unwrap();
    assert!((right / left / 3.0 - 1.0).abs() < 0.01, "{right} {left}");
    let total = noise.expectation(|_| 1.0, &q()).unwrap();
    assert!((total - 1.0).abs() < 1e-7, "mass {total}");
}

#[test]
fn composite_matches_direct_convolution() {
    for (gamma, sigma) in [(1.0, 1.0), (0.1, 1.0), (2.0, 0.5)] {
        let noise = NoiseSpec::composite(StableParams::new(1.0, 0.0, gamma, 0.0).unwrap(), 0.0, sigma).unwrap();
        for x in [0.0, 0.7, 2.0, 5.0, 15.0] {
            let got = noise.pdf(x, &q()).unwrap();
            let want = voigt(x, gamma, sigma);
            assert!((got / want - 1.0).abs() < 1e-7, "gamma={gamma} sigma={sigma} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn mixture_density_at_origin() {
    let noise = NoiseSpec::mixture(&[(0.5, 0.0, 1.0), (0.5, 0.0, 2.0)]).unwrap();
    let want = 0.5 / (2.0 * PI).sqrt() + 0.5 / (8.0 * PI).sqrt();
    assert!((noise.pdf(0.0, &q()).unwrap() - want).abs() < 1e-12);
    assert!((want - 0.2992067).abs() < 1e-7);
    assert!((noise.pdf_by_inversion(0.0, &q()).unwrap() - want).abs() < 1e-9);
}

#[test]
fn entropies() {
    let cases = [
        (NoiseSpec::gaussian(0.0, 1.0).unwrap(), 0.5 * (2.0 * PI * std::f64::consts::E).ln()),
        (NoiseSpec::gaussian(3.0, 0.2).unwrap(), 0.5 * (2.0 * PI * std::f64::consts::E * 0.04).ln()),
        (NoiseSpec::gen_gaussian(1.0, 1.0, 0.0).unwrap(), 1.0 + 2f64.ln()),
        (NoiseSpec::cauchy(1.0).unwrap(), (4.0 * PI).ln()),
        (NoiseSpec::cauchy(0.1).unwrap(), (0.4 * PI).ln()),
    ];
    for (noise, want) in cases {
        let got = noise.entropy(&q()).unwrap();
        assert!((got - want).abs() < 1e-6, "{}: {got} vs {want}", noise.family());
    }
}

#[test]
fn log_moments() {
    let cauchy = NoiseSpec::cauchy(1.0).unwrap();
    let abs = cauchy.expectation(|x| x.abs().ln_1p(), &q()).unwrap();
    let want = (2.0 / PI) * (PI / 4.0 * 2f64.ln() + CATALAN);
    assert!((abs - want).abs() < 1e-7, "{abs} vs {want}");
    let sq = cauchy.expectation(|x| (x * x).ln_1p(), &q()).unwrap();
    assert!((sq - 4f64.ln()).abs() < 1e-7, "{sq}");
}

#[test]
fn characteristic_functions() {
    let laplace = NoiseSpec::gen_gaussian(1.0, 1.0, 0.0).unwrap();
    let gauss = NoiseSpec::gaussian(0.0, 1.0).unwrap();
    for t in [0.0, 0.5, 1.0, 3.0] {
        let l = laplace.char_fn(t, &q()).unwrap();
        assert!((l.re - 1.0 / (1.0 + t * t)).abs() < 1e-9 && l.im.abs() < 1e-9);
        let g = gauss.char_fn(t, &q()).unwrap();
        assert!((g.re - (-0.5 * t * t).exp()).abs() < 1e-12);
    }
}

#[test]
fn envelopes_of_unimodal_law_are_the_density() {
    let noise = NoiseSpec::stable(1.5, 0.0, 1.0, 0.0).unwrap();
    let env = noise.tail_envelopes(&q()).unwrap();
    for x in [-50.0, -2.0, 0.5, 7.0, 300.0] {
        let p = noise.ln_pdf(x, &q()).unwrap();
        assert!((env.ln_lower(x).unwrap() - p).abs() < 1e-9);
        assert!((env.ln_upper(x).unwrap() - p).abs() < 1e-9);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(NoiseSpec::stable(2.0, 0.0, 1.0, 0.0).is_err());
    assert!(NoiseSpec::stable(0.8, 0.0, 1.0, 0.0).is_err());
    assert!(NoiseSpec::stable(1.5, 1.0, 1.0, 0.0).is_err());
    assert!(NoiseSpec::gaussian(0.0, 0.0).is_err());
    assert!(NoiseSpec::mixture(&[(0.5, 0.0, 1.0), (0.4, 0.0, 1.0)]).is_err());
    assert!(NoiseSpec::gen_gaussian(-1.0, 1.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn envelopes_sandwich_the_density(
        w in 0.1f64..0.9,
        m2 in -6.0f64..6.0,
        s2 in 0.3f64..3.0,
        x in -40.0f64..40.0,
    ) {
        let noise = NoiseSpec::mixture(&[(w, 0.0, 1.0), (1.0 - w, m2, s2)]).unwrap();
        let env = noise.tail_envelopes(&q()).unwrap();
        let p = noise.ln_pdf(x, &q()).unwrap();
        prop_assert!(env.ln_lower(x).unwrap() <= p + 1e-9);
        prop_assert!(env.ln_upper(x).unwrap() >= p - 1e-9);
    }

    #[test]
    fn symmetric_stable_density_is_even_and_positive(
        alpha in 1.0f64..1.95,
        x in 0.0f64..500.0,
    ) {
        let noise = NoiseSpec::stable(alpha, 0.0, 1.0, 0.0).unwrap();
        let a = noise.pdf(x, &q()).unwrap();
        let b = noise.pdf(-x, &q()).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((a / b - 1.0).abs() < 1e-9);
    }
}
