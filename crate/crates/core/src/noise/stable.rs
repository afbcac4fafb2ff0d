//! Alpha-stable characteristic function, its inversion, and the tail asymptote.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureConfig};

/// Parameters of `S(alpha, beta, gamma, delta)` in the CF form
/// `exp[i·delta·t − gamma^alpha |t|^alpha (1 − i·beta·sgn(t)·Φ(t))]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma, delta };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric standard law `S(alpha, 0, 1, 0)`.
    pub fn standard(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha < 2.0) {
            return Err(Error::InvalidNoise(format!(
                "stable alpha must lie in [1, 2), got {}",
                self.alpha
            )));
        }
        if !(self.beta.abs() < 1.0) {
            return Err(Error::InvalidNoise(format!(
                "stable beta must satisfy |beta| < 1, got {}",
                self.beta
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) || !self.delta.is_finite() {
            return Err(Error::InvalidNoise(format!("bad stable scale/location {self:?}")));
        }
        Ok(())
    }

    pub fn is_cauchy(&self) -> bool {
        self.alpha == 1.0 && self.beta == 0.0
    }

    fn skew_tan(&self) -> f64 {
        (FRAC_PI_2 * self.alpha).tan()
    }

    /// Width of the region holding the bulk of the mass, including the mode
    /// drift the skewness term causes near `alpha = 1`.
    pub(crate) fn spread(&self) -> f64 {
        if self.alpha == 1.0 {
            self.gamma * (1.0 + self.beta.abs() * (self.gamma.ln().abs() + 1.0))
        } else {
            self.gamma * (1.0 + (self.beta * self.skew_tan()).abs())
        }
    }

    /// Log-CF without the location term, for `Re(t) >= 0` (principal branches).
    pub(crate) fn log_cf_centered(&self, t: Complex64) -> Complex64 {
        if t == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        if self.alpha == 1.0 {
            // Φ(t) = −(2/π) ln t, so 1 − iβΦ = 1 + iβ(2/π) ln t; t·ln t → 0 at the origin.
            let log_term = Complex64::new(0.0, self.beta * 2.0 / PI) * t.ln();
            -self.gamma * t * (1.0 + log_term)
        } else {
            let ga = self.gamma.powf(self.alpha);
            let skew = Complex64::new(1.0, -self.beta * self.skew_tan());
            -ga * t.powf(self.alpha) * skew
        }
    }

    /// Characteristic function on the real line.
    pub fn cf(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let centered = self.log_cf_centered(Complex64::new(t.abs(), 0.0));
        let centered = if t < 0.0 { centered.conj() } else { centered };
        (centered + Complex64::new(0.0, self.delta * t)).exp()
    }

    /// Leading-order tail `alpha·c_alpha·gamma^alpha·(1 ± beta)·|x − delta|^{−(alpha+1)}`
    /// with `c_alpha = Γ(alpha)·sin(pi·alpha/2)/pi`; `+` on the right tail.
    pub fn tail_asymptote(&self, x: f64) -> Result<f64> {
        self.validate()?;
        let d = x - self.delta;
        if d == 0.0 {
            return Err(Error::Unsupported("tail asymptote is undefined at the location".into()));
        }
        let side = if d > 0.0 { 1.0 + self.beta } else { 1.0 - self.beta };
        Ok(self.alpha
            * tail_constant(self.alpha)
            * self.gamma.powf(self.alpha)
            * side
            * d.abs().powf(-(self.alpha + 1.0)))
    }

    /// Largest rotation angles (below, above the real axis) for which the CF
    /// continuation keeps decaying along every ray in the sector.
    fn sector_bounds(&self) -> (f64, f64) {
        if self.alpha == 1.0 {
            // The logarithmic skew term only bites at astronomically large |t|
            // once the oscillatory factor is damped; a moderate angle is safe.
            return (PI / 3.0, PI / 3.0);
        }
        let chi = (self.beta * self.skew_tan()).atan();
        ((FRAC_PI_2 - chi) / self.alpha, (FRAC_PI_2 + chi) / self.alpha)
    }
}

/// `c_alpha = Γ(alpha)·sin(pi·alpha/2)/pi`.
pub fn tail_constant(alpha: f64) -> f64 {
    gamma(alpha) * (FRAC_PI_2 * alpha).sin() / PI
}

/// A noise law whose centered log-CF continues analytically into the right half-plane.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AnalyticCf {
    pub stable: Option<StableParams>,
    /// Gaussian standard deviation, if a Gaussian factor is present.
    pub sigma: Option<f64>,
    pub center: f64,
}

impl AnalyticCf {
    pub fn log_cf_centered(&self, t: Complex64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        if let Some(s) = &self.stable {
            v += s.log_cf_centered(t);
        }
        if let Some(sig) = self.sigma {
            v -= 0.5 * sig * sig * t * t;
        }
        v
    }

    fn log_modulus_real(&self, t: f64) -> f64 {
        let mut v = 0.0;
        if let Some(s) = &self.stable {
            v -= (s.gamma * t).powf(s.alpha);
        }
        if let Some(sig) = self.sigma {
            v -= 0.5 * sig * sig * t * t;
        }
        v
    }

    pub fn scale(&self) -> f64 {
        let a = self.stable.map_or(0.0, |s| s.spread());
        let b = self.sigma.unwrap_or(0.0);
        a.max(b)
    }

    /// Cut-off `T` with `|φ(t)| < eps` for all `t ≥ T`.
    fn truncation(&self, eps: f64) -> f64 {
        let target = eps.ln();
        let mut hi = 1.0 / self.scale().max(1e-300);
        while self.log_modulus_real(hi) > target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.log_modulus_real(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn rotation(&self, right_tail: bool) -> f64 {
        let mut bound = f64::INFINITY;
        if let Some(s) = &self.stable {
            let (below, above) = s.sector_bounds();
            bound = bound.min(if right_tail { below } else { above });
        }
        if self.sigma.is_some() {
            bound = bound.min(PI / 4.0);
        }
        (0.5 * bound).min(PI / 6.0)
    }

    /// Density at `x`. Near the center the real-axis integral is used; far out
    /// the contour is rotated into the decaying sector.
    pub fn pdf(&self, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let d = x - self.center;
        if d.abs() <= ROTATION_SWITCH * self.scale() {
            self.pdf_real_axis(d, cfg)
        } else {
            self.pdf_rotated(d, cfg)
        }
    }

    pub fn pdf_real_axis(&self, d: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let t_max = self.truncation(cfg.abs_tol * 0.1);
        let integrand = |t: f64| {
            let psi = self.log_cf_centered(Complex64::new(t, 0.0));
            let phase = Complex64::new(psi.re, psi.im - d * t);
            phase.re.exp() * phase.im.cos()
        };
        invert_real_axis(integrand, d, t_max, cfg)
    }

    pub fn pdf_rotated(&self, d: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let right = d > 0.0;
        let theta = self.rotation(right);
        let dir = if right {
            Complex64::from_polar(1.0, -theta)
        } else {
            Complex64::from_polar(1.0, theta)
        };
        // |e^{-i d t}| = e^{-|d| s sinθ} along the ray.
        let s_max = 45.0 / (d.abs() * theta.sin());
        // ∫ e^{-idt} dt along the ray is −i/d, purely imaginary; dropping it
        // leaves expm1(ψ), which keeps the integrand as small as the result.
        let integrand = |v: f64| {
            let s = v * v;
            let t = dir * s;
            let psi = self.log_cf_centered(t);
            let osc = (Complex64::new(0.0, -d) * t).exp();
            (osc * expm1_c(psi) * dir).re * 2.0 * v
        };
        let v_max = s_max.sqrt();
        let est = quad::integrate(integrand, 0.0, v_max, 1e-300, cfg.rel_tol, cfg.max_subdivisions)?;
        Ok(est.value / PI)
    }
}

/// Relative distance from the center (in scale units) beyond which inversion
/// switches to the rotated contour.
pub(crate) const ROTATION_SWITCH: f64 = 8.0;

/// `(1/π) ∫_0^{t_max} g(t) dt` on panels no wider than `π/|d|`.
pub(crate) fn invert_real_axis<F: FnMut(f64) -> f64>(
    mut g: F,
    d: f64,
    t_max: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mut width = t_max / 8.0;
    if d != 0.0 {
        width = width.min(PI / d.abs());
    }
    let panels = (t_max / width).ceil().max(1.0) as usize;
    let width = t_max / panels as f64;
    let per_panel = cfg.abs_tol * PI / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a = k as f64 * width;
        total += quad::integrate(&mut g, a, a + width, per_panel, 0.0, cfg.max_subdivisions)?.value;
    }
    Ok(total / PI)
}

fn expm1_c(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let em1 = z.re.exp_m1();
    Complex64::new(em1 * c - 2.0 * half * half, z.re.exp() * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cauchy(x: f64) -> f64 {
        1.0 / (PI * (1.0 + x * x))
    }

    #[test]
    fn cf_values() {
        let s = StableParams::new(1.5, 0.0, 1.0, 0.0).unwrap();
        let v = s.cf(1.0);
        assert!((v.re - (-1f64).exp()).abs() < 1e-15 && v.im.abs() < 1e-15);
        let s = StableParams::new(1.0, 0.5, 1.0, 0.0).unwrap();
        assert!((s.cf(2.0).norm() - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(s.cf(0.0), Complex64::new(1.0, 0.0));
        // Hermitian symmetry
        let a = s.cf(0.7);
        let b = s.cf(-0.7);
        assert!((a - b.conj()).norm() < 1e-15);
    }

    #[test]
    fn both_inversion_paths_match_cauchy() {
        let cf = AnalyticCf { stable: Some(StableParams::standard(1.0).unwrap()), sigma: None, center: 0.0 };
        let cfg = QuadratureConfig::default();
        for &x in &[0.0, 0.3, 2.0, 7.5, -9.0] {
            let p = cf.pdf_real_axis(x, &cfg).unwrap();
            assert!((p - cauchy(x)).abs() < 1e-11, "x={x} p={p}");
        }
        for &x in &[3.0, 9.0, -40.0, 1e3, -1e6, 1e9] {
            let p = cf.pdf_rotated(x, &cfg).unwrap();
            assert!(((p - cauchy(x)) / cauchy(x)).abs() < 1e-9, "x={x} p={p}");
        }
    }

    #[test]
    fn rotated_matches_real_axis_for_skewed_laws() {
        let cfg = QuadratureConfig::default();
        for &(alpha, beta) in &[(1.0, 0.6), (1.0, -0.8), (1.3, 0.5), (1.7, -0.9), (1.95, 0.3)] {
            let cf = AnalyticCf {
                stable: Some(StableParams::new(alpha, beta, 1.0, 0.0).unwrap()),
                sigma: None,
                center: 0.0,
            };
            for &x in &[-12.0, -6.0, 6.0, 12.0] {
                let a = cf.pdf_real_axis(x, &cfg).unwrap();
                let b = cf.pdf_rotated(x, &cfg).unwrap();
                assert!((a - b).abs() < 1e-11 + 1e-8 * a, "alpha={alpha} beta={beta} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn asymptote_rejects_invalid() {
        let bad = StableParams { alpha: 2.0, beta: 0.0, gamma: 1.0, delta: 0.0 };
        assert!(bad.tail_asymptote(10.0).is_err());
        let bad = StableParams { alpha: 1.5, beta: 1.0, gamma: 1.0, delta: 0.0 };
        assert!(bad.tail_asymptote(10.0).is_err());
    }

    #[test]
    fn asymptote_values() {
        let c = StableParams::standard(1.0).unwrap();
        let v = c.tail_asymptote(100.0).unwrap();
        assert!((v - 1.0 / (PI * 1e4)).abs() < 1e-12);
        let s = StableParams::new(1.2, 0.5, 1.0, 0.0).unwrap();
        let r = s.tail_asymptote(100.0).unwrap() / s.tail_asymptote(-100.0).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
    }
}
