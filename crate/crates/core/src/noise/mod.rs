//! Additive noise families: densities, characteristic functions, entropy and
//! tail envelopes.

mod envelope;
mod kernel;
mod stable;

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureConfig};

pub use envelope::TailEnvelopes;
pub use kernel::NoiseKernel;
pub use stable::{tail_constant, StableParams};

use stable::{invert_real_axis, AnalyticCf};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussParams {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    Gaussian(GaussParams),
    Mixture(Vec<MixtureComponent>),
    /// Density `a / (2 b Γ(1/a)) · exp(−(|x − mu| / b)^a)`.
    GenGaussian { shape: f64, scale: f64, mu: f64 },
    AlphaStable(StableParams),
    /// Independent sum of an alpha-stable and a Gaussian variable.
    Composite { stable: StableParams, gauss: GaussParams },
}

fn check_gauss(g: &GaussParams) -> Result<()> {
    if !(g.sigma > 0.0 && g.sigma.is_finite()) || !g.mu.is_finite() {
        return Err(Error::InvalidNoise(format!(
            "Gaussian needs finite mu and sigma > 0, got mu={} sigma={}",
            g.mu, g.sigma
        )));
    }
    Ok(())
}

impl NoiseSpec {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        let s = Self::Gaussian(GaussParams { mu, sigma });
        s.validate()?;
        Ok(s)
    }

    /// Mixture from `(weight, mu, sigma)` triples.
    pub fn mixture(components: &[(f64, f64, f64)]) -> Result<Self> {
        let s = Self::Mixture(
            components
                .iter()
                .map(|&(weight, mu, sigma)| MixtureComponent { weight, mu, sigma })
                .collect(),
        );
        s.validate()?;
        Ok(s)
    }

    pub fn gen_gaussian(shape: f64, scale: f64, mu: f64) -> Result<Self> {
        let s = Self::GenGaussian { shape, scale, mu };
        s.validate()?;
        Ok(s)
    }

    pub fn stable(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        Ok(Self::AlphaStable(StableParams::new(alpha, beta, gamma, delta)?))
    }

    pub fn cauchy(gamma: f64) -> Result<Self> {
        Self::stable(1.0, 0.0, gamma, 0.0)
    }

    pub fn composite(stable: StableParams, mu: f64, sigma: f64) -> Result<Self> {
        let s = Self::Composite { stable, gauss: GaussParams { mu, sigma } };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian(g) => check_gauss(g),
            Self::Mixture(cs) => {
                if cs.is_empty() {
                    return Err(Error::InvalidNoise("mixture has no components".into()));
                }
                for c in cs {
                    if !(c.weight > 0.0 && c.weight.is_finite()) {
                        return Err(Error::InvalidNoise(format!(
                            "mixture weights must be positive, got {}",
                            c.weight
                        )));
                    }
                    check_gauss(&GaussParams { mu: c.mu, sigma: c.sigma })?;
                }
                let total: f64 = cs.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidNoise(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
            Self::GenGaussian { shape, scale, mu } => {
                if !(*shape > 0.0 && shape.is_finite() && *scale > 0.0 && scale.is_finite())
                    || !mu.is_finite()
                {
                    return Err(Error::InvalidNoise(format!(
                        "generalized Gaussian needs shape > 0 and scale > 0, got a={shape} b={scale}"
                    )));
                }
                Ok(())
            }
            Self::AlphaStable(s) => s.validate(),
            Self::Composite { stable, gauss } => {
                stable.validate()?;
                check_gauss(gauss)
            }
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Gaussian(_) => "gaussian",
            Self::Mixture(_) => "mixture",
            Self::GenGaussian { .. } => "gengaussian",
            Self::AlphaStable(s) if s.is_cauchy() => "cauchy",
            Self::AlphaStable(_) => "stable",
            Self::Composite { .. } => "composite",
        }
    }

    /// Characteristic width of the law.
    pub fn scale(&self) -> f64 {
        match self {
            Self::Gaussian(g) => g.sigma,
            Self::Mixture(cs) => cs.iter().map(|c| c.sigma).fold(0.0, f64::max),
            Self::GenGaussian { scale, .. } => *scale,
            Self::AlphaStable(s) => s.gamma,
            Self::Composite { stable, gauss } => stable.gamma.max(gauss.sigma),
        }
    }

    /// Location parameter (mixtures: the weighted mean of component means).
    pub fn center(&self) -> f64 {
        match self {
            Self::Gaussian(g) => g.mu,
            Self::Mixture(cs) => cs.iter().map(|c| c.weight * c.mu).sum(),
            Self::GenGaussian { mu, .. } => *mu,
            Self::AlphaStable(s) => s.delta,
            Self::Composite { stable, gauss } => stable.delta + gauss.mu,
        }
    }

    /// Half-width around `center()` that contains every mode and shoulder.
    pub(crate) fn bulk_radius(&self) -> f64 {
        let c = self.center();
        match self {
            Self::Mixture(cs) => cs
                .iter()
                .map(|m| (m.mu - c).abs() + 10.0 * m.sigma)
                .fold(0.0, f64::max),
            Self::AlphaStable(s) => 10.0 * s.spread(),
            Self::Composite { stable, gauss } => 10.0 * (stable.spread() + gauss.sigma),
            _ => 10.0 * self.scale(),
        }
    }

    pub fn is_symmetric_about_zero(&self) -> bool {
        match self {
            Self::Gaussian(g) => g.mu == 0.0,
            Self::Mixture(cs) => cs.iter().all(|a| {
                cs.iter()
                    .any(|b| b.weight == a.weight && b.sigma == a.sigma && b.mu == -a.mu)
            }),
            Self::GenGaussian { mu, .. } => *mu == 0.0,
            Self::AlphaStable(s) => s.beta == 0.0 && s.delta == 0.0,
            Self::Composite { stable, gauss } => {
                stable.beta == 0.0 && stable.delta + gauss.mu == 0.0
            }
        }
    }

    /// Narrowest feature width of the density (sets quadrature spacing).
    pub fn resolution(&self) -> f64 {
        match self {
            Self::Mixture(cs) => cs.iter().map(|c| c.sigma).fold(f64::INFINITY, f64::min),
            _ => self.scale(),
        }
    }

    /// True when the density is real-analytic everywhere.
    pub fn is_smooth(&self) -> bool {
        match self {
            Self::GenGaussian { shape, .. } => shape.fract() == 0.0 && (*shape as u64) % 2 == 0,
            _ => true,
        }
    }

    /// True for families whose density is unimodal.
    pub(crate) fn is_unimodal(&self) -> bool {
        match self {
            Self::Mixture(cs) => cs.len() == 1,
            _ => true,
        }
    }

    fn analytic(&self) -> Option<AnalyticCf> {
        match self {
            Self::Gaussian(g) => Some(AnalyticCf { stable: None, sigma: Some(g.sigma), center: g.mu }),
            Self::AlphaStable(s) => Some(AnalyticCf { stable: Some(*s), sigma: None, center: s.delta }),
            Self::Composite { stable, gauss } => Some(AnalyticCf {
                stable: Some(*stable),
                sigma: Some(gauss.sigma),
                center: stable.delta + gauss.mu,
            }),
            _ => None,
        }
    }

    /// Log-density in closed form, when the family has one.
    pub fn ln_pdf_closed(&self, x: f64) -> Option<f64> {
        match self {
            Self::Gaussian(g) => Some(gauss_ln_pdf(x, g.mu, g.sigma)),
            Self::Mixture(cs) => {
                let terms: Vec<f64> = cs
                    .iter()
                    .map(|c| c.weight.ln() + gauss_ln_pdf(x, c.mu, c.sigma))
                    .collect();
                Some(log_sum_exp(&terms))
            }
            Self::GenGaussian { shape, scale, mu } => Some(
                (shape / (2.0 * scale)).ln() - ln_gamma(1.0 / shape)
                    - ((x - mu).abs() / scale).powf(*shape),
            ),
            Self::AlphaStable(s) if s.is_cauchy() => {
                let z = (x - s.delta) / s.gamma;
                Some(-(PI * s.gamma).ln() - z.mul_add(z, 1.0).ln())
            }
            _ => None,
        }
    }

    pub fn pdf(&self, x: f64, q: &QuadratureConfig) -> Result<f64> {
        match self.ln_pdf_closed(x) {
            Some(v) => Ok(v.exp()),
            None => self.pdf_by_inversion(x, q),
        }
    }

    pub fn ln_pdf(&self, x: f64, q: &QuadratureConfig) -> Result<f64> {
        match self.ln_pdf_closed(x) {
            Some(v) => Ok(v),
            None => {
                let p = self.pdf_by_inversion(x, q)?;
                if p > 0.0 {
                    Ok(p.ln())
                } else {
                    Err(Error::Quadrature { achieved: p.abs(), requested: q.abs_tol })
                }
            }
        }
    }

    /// Density obtained by numerically inverting the characteristic function.
    /// Not available for generalized Gaussians, whose CF decays too slowly.
    pub fn pdf_by_inversion(&self, x: f64, q: &QuadratureConfig) -> Result<f64> {
        self.validate()?;
        if let Some(a) = self.analytic() {
            return a.pdf(x, q);
        }
        match self {
            Self::Mixture(cs) => {
                let smin = cs.iter().map(|c| c.sigma).fold(f64::INFINITY, f64::min);
                let t_max = (2.0 * (10.0 / q.abs_tol).ln()).sqrt() / smin;
                let g = |t: f64| cs.iter().map(|c| c.weight * gauss_cf(c.mu, c.sigma, t)).sum::<Complex64>();
                // Panel width must follow the fastest oscillation.
                let reach = cs.iter().map(|c| (x - c.mu).abs()).fold(0.0, f64::max);
                invert_real_axis(|t| (g(t) * Complex64::from_polar(1.0, -x * t)).re, reach, t_max, q)
            }
            _ => Err(Error::Unsupported(format!(
                "CF inversion is not provided for the {} family",
                self.family()
            ))),
        }
    }

    pub fn char_fn(&self, t: f64, q: &QuadratureConfig) -> Result<Complex64> {
        Ok(match self {
            Self::Gaussian(g) => gauss_cf(g.mu, g.sigma, t),
            Self::Mixture(cs) => cs.iter().map(|c| c.weight * gauss_cf(c.mu, c.sigma, t)).sum(),
            Self::GenGaussian { shape, scale, mu } => {
                let shift = Complex64::from_polar(1.0, mu * t);
                if *shape == 2.0 {
                    shift * (-0.25 * scale * scale * t * t).exp()
                } else if *shape == 1.0 {
                    shift / (1.0 + scale * scale * t * t)
                } else {
                    shift * gen_gauss_cf_centered(*shape, *scale, t, q)?
                }
            }
            Self::AlphaStable(s) => s.cf(t),
            Self::Composite { stable, gauss } => stable.cf(t) * gauss_cf(gauss.mu, gauss.sigma, t),
        })
    }

    /// Radius `R` about `center()` with `P(|N − center| > R) <= mass`.
    pub fn tail_radius(&self, mass: f64) -> f64 {
        let gauss_r = |sigma: f64, m: f64| sigma * (2.0 * (2.0 / m).ln()).sqrt();
        let c = self.center();
        match self {
            Self::Gaussian(g) => gauss_r(g.sigma, mass),
            Self::Mixture(cs) => cs
                .iter()
                .map(|m| (m.mu - c).abs() + gauss_r(m.sigma, mass))
                .fold(0.0, f64::max),
            Self::GenGaussian { shape, scale, .. } => {
                let a = 1.0 / shape;
                let mut hi = 1.0;
                while gamma_ur(a, hi) > mass {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if gamma_ur(a, mid) > mass {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                scale * hi.powf(a)
            }
            Self::AlphaStable(s) => stable_radius(s, mass),
            Self::Composite { stable, gauss } => {
                stable_radius(stable, 0.5 * mass) + gauss_r(gauss.sigma, 0.5 * mass)
            }
        }
    }

    /// `∫ h(x) dx` over the real line for integrands carried by this law,
    /// on the `asinh`-mapped axis, truncated where the tail mass is negligible.
    pub(crate) fn mapped_integral<H: FnMut(f64) -> f64>(&self, mut h: H, q: &QuadratureConfig) -> Result<f64> {
        let c = self.center();
        let w = self.resolution();
        let reach = self.tail_radius(q.truncation_mass * 1e-3).max(self.bulk_radius());
        let s_max = (reach / w).asinh();
        let integrand = |s: f64| {
            let v = h(c + w * s.sinh()) * w * s.cosh();
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let mut breaks = vec![-s_max];
        for b in [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            if b > -s_max && b < s_max {
                breaks.push(b);
            }
        }
        breaks.push(s_max);
        Ok(quad::integrate_pieces(integrand, &breaks, q)?.value)
    }

    /// `E[g(N)]`.
    pub fn expectation<G: FnMut(f64) -> f64>(&self, mut g: G, q: &QuadratureConfig) -> Result<f64> {
        self.validate()?;
        let mut failure = None;
        let value = self.mapped_integral(
            |x| match self.ln_pdf(x, q) {
                Ok(lp) => lp.exp() * g(x),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            q,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }

    /// Differential entropy `−∫ p ln p` in nats.
    pub fn entropy(&self, q: &QuadratureConfig) -> Result<f64> {
        self.validate()?;
        let mut failure = None;
        let value = self.mapped_integral(
            |x| match self.ln_pdf(x, q) {
                Ok(lp) if lp.is_finite() => -lp * lp.exp(),
                Ok(_) => 0.0,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            q,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }

    /// Tail envelopes (running infimum and supremum of the density).
    pub fn tail_envelopes(&self, q: &QuadratureConfig) -> Result<TailEnvelopes> {
        TailEnvelopes::new(self, q)
    }
}

fn stable_radius(s: &StableParams, mass: f64) -> f64 {
    let both_tails = 2.0 * tail_constant(s.alpha) * s.gamma.powf(s.alpha);
    (4.0 * both_tails / mass).powf(1.0 / s.alpha) + 10.0 * s.spread()
}

fn gauss_ln_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - LN_SQRT_2PI
}

fn gauss_cf(mu: f64, sigma: f64, t: f64) -> Complex64 {
    Complex64::from_polar((-0.5 * sigma * sigma * t * t).exp(), mu * t)
}

fn gen_gauss_cf_centered(shape: f64, scale: f64, t: f64, q: &QuadratureConfig) -> Result<Complex64> {
    let norm = shape / (2.0 * scale) * (-ln_gamma(1.0 / shape)).exp();
    let reach = NoiseSpec::GenGaussian { shape, scale, mu: 0.0 }.tail_radius(q.abs_tol * 1e-3);
    let panel = if t == 0.0 { reach } else { (PI / t.abs()).min(reach) };
    let n = (reach / panel).ceil() as usize;
    let mut total = 0.0;
    for k in 0..n {
        let a = k as f64 * panel;
        let b = (a + panel).min(reach);
        let e = quad::integrate(
            |x: f64| (t * x).cos() * (-(x / scale).powf(shape)).exp(),
            a,
            b,
            q.abs_tol / (2.0 * norm * n as f64),
            0.0,
            q.max_subdivisions,
        )?;
        total += e.value;
    }
    Ok(Complex64::new(2.0 * norm * total, 0.0))
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(NoiseSpec::gaussian(0.0, 0.0).is_err());
        assert!(NoiseSpec::mixture(&[(0.5, 0.0, 1.0), (0.4, 0.0, 2.0)]).is_err());
        assert!(NoiseSpec::stable(2.0, 0.0, 1.0, 0.0).is_err());
        assert!(NoiseSpec::stable(0.9, 0.0, 1.0, 0.0).is_err());
        assert!(NoiseSpec::stable(1.5, -1.0, 1.0, 0.0).is_err());
        assert!(NoiseSpec::gen_gaussian(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn closed_forms() {
        let q = QuadratureConfig::default();
        let g = NoiseSpec::gaussian(1.0, 2.0).unwrap();
        let want = (-(0.5f64 * 0.5 * 0.5)).exp() / (2.0 * (2.0 * PI).sqrt());
        assert!((g.pdf(2.0, &q).unwrap() - want).abs() < 1e-16);
        let lap = NoiseSpec::gen_gaussian(1.0, 1.0, 0.0).unwrap();
        assert!((lap.pdf(1.0, &q).unwrap() - 0.5 * (-1f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn gengaussian_numeric_cf_matches_closed_forms() {
        let q = QuadratureConfig::default();
        // Shape 2 with scale sqrt(2) is the standard normal.
        let t = 1.3;
        let v = gen_gauss_cf_centered(2.0, 2f64.sqrt(), t, &q).unwrap();
        assert!((v.re - (-0.5 * t * t).exp()).abs() < 1e-10);
        let v = gen_gauss_cf_centered(1.0, 0.7, t, &q).unwrap();
        assert!((v.re - 1.0 / (1.0 + 0.49 * t * t)).abs() < 1e-10);
    }

    #[test]
    fn mixture_inversion() {
        let q = QuadratureConfig::default();
        let m = NoiseSpec::mixture(&[(0.3, -2.0, 0.5), (0.7, 1.0, 1.0)]).unwrap();
        for &x in &[-3.0, -2.0, 0.0, 1.5, 4.0] {
            let a = m.pdf(x, &q).unwrap();
            let b = m.pdf_by_inversion(x, &q).unwrap();
            assert!((a - b).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn gengaussian_tail_radius() {
        let s = NoiseSpec::gen_gaussian(1.0, 1.0, 0.0).unwrap();
        // P(|X| > R) = e^{-R} for the unit Laplace law.
        assert!((s.tail_radius(1e-6) - 1e6f64.ln()).abs() < 1e-9);
    }
}
