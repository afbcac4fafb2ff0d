use crate::channel::ChannelInstance;
use crate::error::{Error, Result};
use crate::noise::{NoiseKernel, TailEnvelopes};
use crate::quad::{self, QuadratureConfig};

use super::DiscreteInput;

/// Default spacing of the noise-centered quadrature rule in the `asinh` coordinate.
pub const DEFAULT_RULE_STEP: f64 = 0.025;

/// Output-space view of an input distribution: locations `u_j = f(x_j)`
/// and log-probabilities.
#[derive(Debug, Clone)]
pub(crate) struct OutputMix {
    pub u: Vec<f64>,
    pub ln_p: Vec<f64>,
}

impl OutputMix {
    pub fn new(ch: &ChannelInstance, f: &DiscreteInput) -> Self {
        let (u, ln_p) = f
            .iter()
            .filter(|&(_, p)| p > 0.0)
            .map(|(x, p)| (ch.map.eval(x), p.ln()))
            .unzip();
        Self { u, ln_p }
    }
}

/// Trapezoid rule on `z = c + w·sinh(s)` with weights `p_N(z)·dz`,
/// normalized to total mass 1. Spectrally accurate for smooth integrands.
#[derive(Debug, Clone)]
struct CenteredRule {
    z: Vec<f64>,
    w: Vec<f64>,
}

impl CenteredRule {
    fn new(kernel: &NoiseKernel, q: &QuadratureConfig, step: f64) -> Self {
        let spec = kernel.spec();
        let c = spec.center();
        let width = spec.resolution();
        let reach = spec.tail_radius(q.truncation_mass).max(spec.bulk_radius());
        let s_max = (reach / width).asinh();
        let n = (s_max / step).ceil() as i64;
        let h = s_max / n as f64;
        let mut z = Vec::with_capacity(2 * n as usize + 1);
        let mut w = Vec::with_capacity(2 * n as usize + 1);
        for k in -n..=n {
            let s = k as f64 * h;
            let x = c + width * s.sinh();
            let weight = h * width * s.cosh() * kernel.pdf(x);
            if weight > 0.0 {
                z.push(x);
                w.push(weight);
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        Self { z, w }
    }
}

/// Evaluates information quantities of one channel. Construction tabulates
/// the noise density (when it has no closed form), the noise entropy and the
/// tail envelopes; evaluations afterwards are cheap and pure.
#[derive(Debug, Clone)]
pub struct InfoEvaluator {
    channel: ChannelInstance,
    quad: QuadratureConfig,
    kernel: NoiseKernel,
    envelopes: TailEnvelopes,
    rule: CenteredRule,
    entropy: f64,
}

impl InfoEvaluator {
    pub fn new(ch: &ChannelInstance, q: &QuadratureConfig) -> Result<Self> {
        Self::with_rule_step(ch, q, DEFAULT_RULE_STEP)
    }

    pub fn with_rule_step(ch: &ChannelInstance, q: &QuadratureConfig, step: f64) -> Result<Self> {
        ch.validate()?;
        q.validate()?;
        if !(step > 0.0 && step <= 0.5) {
            return Err(Error::InvalidInput(format!("rule step must lie in (0, 0.5], got {step}")));
        }
        let kernel = NoiseKernel::new(&ch.noise, q)?;
        let envelopes = ch.noise.tail_envelopes(q)?;
        let rule = CenteredRule::new(&kernel, q, step);
        let mut ev = Self { channel: ch.clone(), quad: *q, kernel, envelopes, rule, entropy: 0.0 };
        ev.entropy = if ch.noise.is_smooth() {
            -ev.rule.z.iter().zip(&ev.rule.w).map(|(&z, &w)| w * ev.kernel.ln_pdf(z)).sum::<f64>()
        } else {
            ch.noise.entropy(q)?
        };
        Ok(ev)
    }

    /// Re-targets the evaluator at another cost budget of the same channel.
    pub fn set_budget(&mut self, budget: f64) -> Result<()> {
        self.channel = self.channel.with_budget(budget)?;
        Ok(())
    }

    pub fn channel(&self) -> &ChannelInstance {
        &self.channel
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn kernel(&self) -> &NoiseKernel {
        &self.kernel
    }

    pub fn envelopes(&self) -> &TailEnvelopes {
        &self.envelopes
    }

    /// Noise differential entropy `H = h(N)`, consistent with the rule used for `i(u;F)`.
    pub fn noise_entropy(&self) -> f64 {
        self.entropy
    }

    pub(crate) fn mix(&self, f: &DiscreteInput) -> OutputMix {
        OutputMix::new(&self.channel, f)
    }

    pub(crate) fn ln_output_density_mix(&self, m: &OutputMix, y: f64) -> f64 {
        let mut terms = [0.0f64; 64];
        let mut buf;
        let t: &mut [f64] = if m.u.len() <= terms.len() {
            &mut terms[..m.u.len()]
        } else {
            buf = vec![0.0; m.u.len()];
            &mut buf
        };
        let mut max = f64::NEG_INFINITY;
        for (j, (u, lp)) in m.u.iter().zip(&m.ln_p).enumerate() {
            t[j] = lp + self.kernel.ln_pdf(y - u);
            max = max.max(t[j]);
        }
        if !max.is_finite() {
            return max;
        }
        max + t.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
    }

    /// `ln p(y;F)`.
    pub fn ln_output_density(&self, f: &DiscreteInput, y: f64) -> f64 {
        self.ln_output_density_mix(&self.mix(f), y)
    }

    /// `p(y;F) = Σ p_j p_N(y − f(x_j))`.
    pub fn output_density(&self, f: &DiscreteInput, y: f64) -> f64 {
        self.ln_output_density(f, y).exp()
    }

    pub(crate) fn marginal_info_mix(&self, m: &OutputMix, u: f64) -> Result<f64> {
        if self.channel.noise.is_smooth() {
            return Ok(-self
                .rule
                .z
                .iter()
                .zip(&self.rule.w)
                .map(|(&z, &w)| w * self.ln_output_density_mix(m, u + z))
                .sum::<f64>());
        }
        // Densities with kinks: adaptive quadrature split at every kink of the integrand.
        let spec = &self.channel.noise;
        let c = spec.center();
        let reach = spec.tail_radius(self.quad.truncation_mass).max(spec.bulk_radius());
        let mut breaks: Vec<f64> = m.u.iter().map(|&uj| uj + c).collect();
        breaks.push(u + c);
        breaks.push(u + c - reach);
        breaks.push(u + c + reach);
        breaks.retain(|&b| b >= u + c - reach && b <= u + c + reach);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let est = quad::integrate_pieces(
            |y| {
                let lp = self.kernel.ln_pdf(y - u);
                -lp.exp() * self.ln_output_density_mix(m, y)
            },
            &breaks,
            &self.quad,
        )?;
        Ok(est.value)
    }

    /// `i(u;F) = −∫ p_N(y − u) ln p(y;F) dy`.
    pub fn marginal_info_density(&self, f: &DiscreteInput, u: f64) -> Result<f64> {
        self.marginal_info_mix(&self.mix(f), u)
    }

    /// `I(F) = Σ p_j i(f(x_j);F) − H`, clamped at 0 against rounding.
    pub fn mutual_information(&self, f: &DiscreteInput) -> Result<f64> {
        let m = self.mix(f);
        let mut total = 0.0;
        for (u, lp) in m.u.iter().zip(&m.ln_p) {
            total += lp.exp() * self.marginal_info_mix(&m, *u)?;
        }
        Ok((total - self.entropy).max(0.0))
    }
}

/// `p(y;F)` for a one-off evaluation.
pub fn output_density(ch: &ChannelInstance, f: &DiscreteInput, y: f64, q: &QuadratureConfig) -> Result<f64> {
    let spec = &ch.noise;
    let mut total = 0.0;
    for (x, p) in f.iter() {
        total += p * spec.pdf(y - ch.map.eval(x), q)?;
    }
    Ok(total)
}

/// `I(F)` for a one-off evaluation.
pub fn mutual_information(ch: &ChannelInstance, f: &DiscreteInput, q: &QuadratureConfig) -> Result<f64> {
    InfoEvaluator::new(ch, q)?.mutual_information(f)
}

/// `i(u;F)` for a one-off evaluation.
pub fn marginal_info_density(
    ch: &ChannelInstance,
    f: &DiscreteInput,
    u: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    InfoEvaluator::new(ch, q)?.marginal_info_density(f, u)
}
