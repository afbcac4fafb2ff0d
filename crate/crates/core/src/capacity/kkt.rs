use crate::channel::ChannelInstance;
use crate::error::{Error, Result};
use crate::quad::QuadratureConfig;

use super::info::{InfoEvaluator, OutputMix};
use super::{DiscreteInput, KktReport};

/// Layout of the KKT verification grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Log-spaced points per decade beyond the core.
    pub per_decade: usize,
    /// Uniform points across the core `[−x_base, x_base]`.
    pub core_points: usize,
    /// Extra points on each side of every support point.
    pub support_points: usize,
    /// Margin by which `ν·C` must dominate the growth bound on `i(f(x);F)`.
    pub safety: f64,
    /// Hard cap on the grid extent, as a multiple of the core half-width.
    pub max_extent_factor: f64,
    /// Certification tolerance on the residual.
    pub kkt_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            per_decade: 50,
            core_points: 401,
            support_points: 12,
            safety: 2.0,
            max_extent_factor: 100.0,
            kkt_tol: 1e-3,
        }
    }
}

impl InfoEvaluator {
    pub(crate) fn residual_from_info(&self, nu: f64, cap: f64, x: f64, info: f64) -> f64 {
        let ch = self.channel();
        nu * (ch.cost.eval(x) - ch.effective_budget()) + cap + self.noise_entropy() - info
    }

    /// `s(x) = ν(C(|x|) − A) + cap + H − i(f(x);F)`.
    pub fn kkt_residual(&self, f: &DiscreteInput, nu: f64, cap: f64, x: f64) -> Result<f64> {
        let info = self.marginal_info_density(f, self.channel().map.eval(x))?;
        Ok(self.residual_from_info(nu, cap, x, info))
    }

    fn multiplier_from(&self, f: &DiscreteInput, cap: f64, support_info: &[f64]) -> Result<f64> {
        let ch = self.channel();
        let budget = ch.effective_budget();
        let h = self.noise_entropy();
        let pts: Vec<(f64, f64)> = f
            .iter()
            .zip(support_info)
            .filter(|((_, p), _)| *p > 0.0)
            .map(|((x, _), &i)| (ch.cost.eval(x) - budget, cap + h - i))
            .collect();
        let scale = pts.iter().fold(budget.abs(), |m, (a, _)| m.max(a.abs()));
        let mut distinct: Vec<f64> = Vec::new();
        for (a, _) in &pts {
            if !distinct.iter().any(|d| (d - a).abs() <= 1e-12 * scale) {
                distinct.push(*a);
            }
        }
        if distinct.len() < 2 {
            let a = distinct.first().copied().unwrap_or(0.0);
            let forced = if a.abs() > 1e-12 * scale {
                let b: f64 = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
                Some((-b / a).max(0.0))
            } else {
                None
            };
            return Err(Error::DegenerateMultiplier {
                reason: "all support points have the same cost".into(),
                forced,
            });
        }
        let num: f64 = pts.iter().map(|(a, b)| a * b).sum();
        let den: f64 = pts.iter().map(|(a, _)| a * a).sum();
        Ok((-num / den).max(0.0))
    }

    /// Least-squares multiplier from the equality conditions at the support.
    pub fn estimate_multiplier(&self, f: &DiscreteInput, cap: f64) -> Result<f64> {
        let m = self.mix(f);
        let info = f
            .points()
            .iter()
            .map(|&x| self.marginal_info_mix(&m, self.channel().map.eval(x)))
            .collect::<Result<Vec<_>>>()?;
        self.multiplier_from(f, cap, &info)
    }

    /// Half-width of the uniformly sampled core.
    pub(crate) fn core_half_width(&self, f: &DiscreteInput) -> f64 {
        let ch = self.channel();
        let reach = f.points().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        1.5 * reach + ch.map.abs_inverse(3.0 * ch.noise.scale() + ch.noise.center().abs())
    }

    /// Distance (per side) past which `ν·C` dominates the growth bound of
    /// `i(f(x);F)` by the grid safety factor, capped at `max_extent_factor·x_base`.
    fn extent(&self, m: &OutputMix, nu: f64, cap: f64, x_base: f64, spec: &GridSpec, sign: f64) -> Result<f64> {
        let ch = self.channel();
        let env = self.envelopes();
        let y0 = m.u.iter().fold(0.0f64, |a, u| a.max(u.abs())) + 3.0 * ch.noise.scale() + ch.noise.center().abs();
        let cap_x = spec.max_extent_factor * x_base;
        if nu <= 0.0 {
            return Ok(cap_x);
        }
        let ratio = 10f64.powf(1.0 / spec.per_decade as f64);
        let mut x = x_base;
        while x < cap_x {
            let lhs = nu * (ch.cost.eval(sign * x) - ch.effective_budget()) + cap + self.noise_entropy();
            let v = ch.map.eval(sign * x).abs() + y0;
            let growth = env.log_inverse_lower(v)?.max(env.log_inverse_lower(-v)?);
            if lhs >= spec.safety * (std::f64::consts::LN_2 + growth) {
                return Ok(x);
            }
            x *= ratio;
        }
        Ok(cap_x)
    }

    fn grid_points(&self, f: &DiscreteInput, x_base: f64, ext_pos: f64, ext_neg: f64, spec: &GridSpec) -> Vec<f64> {
        let mut xs = Vec::new();
        let n = spec.core_points.max(3);
        for k in 0..n {
            xs.push(-x_base + 2.0 * x_base * k as f64 / (n - 1) as f64);
        }
        let pts = f.points();
        for (i, &x) in pts.iter().enumerate() {
            let mut gap = 2.0 * x_base / (n - 1) as f64;
            if i > 0 {
                gap = gap.min(x - pts[i - 1]);
            }
            if i + 1 < pts.len() {
                gap = gap.min(pts[i + 1] - x);
            }
            let k = spec.support_points.max(1);
            let delta = 0.5 * gap / k as f64;
            for j in 1..=k {
                xs.push(x + j as f64 * delta);
                xs.push(x - j as f64 * delta);
            }
            xs.push(x);
        }
        let ratio = 10f64.powf(1.0 / spec.per_decade.max(1) as f64);
        for (sign, ext) in [(1.0, ext_pos), (-1.0, ext_neg)] {
            let mut x = x_base * ratio;
            while x <= ext * ratio {
                xs.push(sign * x);
                x *= ratio;
            }
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    /// Evaluates the KKT residual on a verification grid and certifies `f`.
    pub fn verify_kkt(&self, f: &DiscreteInput, spec: &GridSpec) -> Result<KktReport> {
        let ch = self.channel();
        let m = self.mix(f);
        let cap = self.mutual_information(f)?;
        let support_info = f
            .points()
            .iter()
            .map(|&x| self.marginal_info_mix(&m, ch.map.eval(x)))
            .collect::<Result<Vec<_>>>()?;
        let nu_ls = match self.multiplier_from(f, cap, &support_info) {
            Ok(nu) => Some(nu),
            Err(Error::DegenerateMultiplier { forced, .. }) => forced,
            Err(e) => return Err(e),
        };
        let x_base = self.core_half_width(f);
        let (ext_pos, ext_neg) = match nu_ls {
            Some(nu) => (
                self.extent(&m, nu, cap, x_base, spec, 1.0)?,
                self.extent(&m, nu, cap, x_base, spec, -1.0)?,
            ),
            None => (spec.max_extent_factor * x_base, spec.max_extent_factor * x_base),
        };
        let xs = self.grid_points(f, x_base, ext_pos, ext_neg, spec);
        let info = xs
            .iter()
            .map(|&x| self.marginal_info_mix(&m, ch.map.eval(x)))
            .collect::<Result<Vec<_>>>()?;
        let nu = match nu_ls {
            Some(nu) => nu,
            None => self.best_grid_multiplier(&xs, &info, cap),
        };
        let residual_at_support: Vec<f64> = f
            .points()
            .iter()
            .zip(&support_info)
            .map(|(&x, &i)| self.residual_from_info(nu, cap, x, i))
            .collect();
        let mut grid: Vec<(f64, f64)> = xs
            .iter()
            .zip(&info)
            .map(|(&x, &i)| (x, self.residual_from_info(nu, cap, x, i)))
            .collect();
        let (k, _) = grid
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .expect("grid is never empty");
        // Polish the minimum between the neighbouring grid nodes.
        let lo = grid[k.saturating_sub(1)].0;
        let hi = grid[(k + 1).min(grid.len() - 1)].0;
        let refined = golden_min(
            |x| {
                self.marginal_info_mix(&m, ch.map.eval(x))
                    .map(|i| self.residual_from_info(nu, cap, x, i))
                    .unwrap_or(f64::INFINITY)
            },
            lo,
            hi,
        );
        if refined.1 < grid[k].1 {
            let pos = grid.partition_point(|g| g.0 < refined.0);
            grid.insert(pos, refined);
        }
        let (grid_argmin, grid_min_residual) = grid
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("grid is never empty");
        let max_support = residual_at_support.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let certified = max_support <= spec.kkt_tol && grid_min_residual >= -spec.kkt_tol;
        Ok(KktReport {
            nu,
            residual_at_support,
            grid_min_residual,
            grid_argmin,
            certified,
            grid_extent: ext_pos.max(ext_neg),
            grid,
        })
    }

    /// `ν ≥ 0` maximizing the grid minimum of `s`, which is concave in `ν`.
    fn best_grid_multiplier(&self, xs: &[f64], info: &[f64], cap: f64) -> f64 {
        let min_s = |nu: f64| {
            xs.iter()
                .zip(info)
                .map(|(&x, &i)| self.residual_from_info(nu, cap, x, i))
                .fold(f64::INFINITY, f64::min)
        };
        let mut hi = 1.0;
        while min_s(2.0 * hi) > min_s(hi) && hi < 1e12 {
            hi *= 2.0;
        }
        let (mut a, mut b) = (0.0, 2.0 * hi);
        for _ in 0..200 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if min_s(m1) < min_s(m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        0.5 * (a + b)
    }
}

fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const G: f64 = 0.618_033_988_749_894_9;
    let mut c = b - G * (b - a);
    let mut d = a + G * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if (b - a).abs() <= 1e-10 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - G * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + G * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// One-off residual `s(x)` with an explicitly supplied noise entropy `h`.
#[allow(clippy::too_many_arguments)]
pub fn kkt_residual(
    ch: &ChannelInstance,
    f: &DiscreteInput,
    nu: f64,
    cap: f64,
    h: f64,
    x: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    let ev = InfoEvaluator::new(ch, q)?;
    let info = ev.marginal_info_density(f, ch.map.eval(x))?;
    Ok(nu * (ch.cost.eval(x) - ch.effective_budget()) + cap + h - info)
}

/// One-off least-squares multiplier.
pub fn estimate_multiplier(ch: &ChannelInstance, f: &DiscreteInput, cap: f64, q: &QuadratureConfig) -> Result<f64> {
    InfoEvaluator::new(ch, q)?.estimate_multiplier(f, cap)
}

/// One-off KKT verification.
pub fn verify_kkt(ch: &ChannelInstance, f: &DiscreteInput, q: &QuadratureConfig, spec: &GridSpec) -> Result<KktReport> {
    InfoEvaluator::new(ch, q)?.verify_kkt(f, spec)
}
