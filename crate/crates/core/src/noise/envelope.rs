use crate::error::Result;
use crate::quad::QuadratureConfig;

use super::NoiseSpec;

const SCAN_POINTS: usize = 4000;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Running infimum `T_l` (from 0 outwards) and running supremum `T_u`
/// (towards ±∞) of a noise density, evaluated in log space.
#[derive(Debug, Clone)]
pub struct TailEnvelopes {
    spec: NoiseSpec,
    quad: QuadratureConfig,
    right: Side,
    left: Side,
    ln_peak: f64,
    crossover: f64,
}

/// Knots at distances `|x|` from the origin on one side: the origin plus
/// every interior extremum. Between knots the density is monotone.
#[derive(Debug, Clone)]
struct Side {
    dist: Vec<f64>,
    prefix_min: Vec<f64>,
    suffix_max: Vec<f64>,
}

impl Side {
    fn new(mut knots: Vec<(f64, f64)>) -> Self {
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        let dist: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let mut prefix_min = Vec::with_capacity(knots.len());
        let mut run = f64::INFINITY;
        for k in &knots {
            run = run.min(k.1);
            prefix_min.push(run);
        }
        let mut suffix_max = vec![0.0; knots.len()];
        let mut run = f64::NEG_INFINITY;
        for (i, k) in knots.iter().enumerate().rev() {
            run = run.max(k.1);
            suffix_max[i] = run;
        }
        Self { dist, prefix_min, suffix_max }
    }

    fn lower(&self, r: f64, lp: f64) -> f64 {
        let k = self.dist.partition_point(|&d| d <= r).saturating_sub(1);
        lp.min(self.prefix_min[k])
    }

    fn upper(&self, r: f64, lp: f64) -> f64 {
        let k = self.dist.partition_point(|&d| d < r);
        match self.suffix_max.get(k) {
            Some(&m) => lp.max(m),
            None => lp,
        }
    }
}

fn golden_extremum<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, maximize: bool) -> (f64, f64) {
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut g = |x: f64| sign * f(x);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    while (b - a).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = g(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, sign * g(x))
}

impl TailEnvelopes {
    pub fn new(spec: &NoiseSpec, q: &QuadratureConfig) -> Result<Self> {
        spec.validate()?;
        q.validate()?;
        let mut failure = None;
        let mut lp = |x: f64| match spec.ln_pdf(x, q) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        };
        let c = spec.center();
        let reach = spec.bulk_radius();
        let mut extrema = Vec::new();
        if spec.is_unimodal() {
            extrema.push(golden_extremum(&mut lp, c - reach, c + reach, true));
        } else {
            let step = 2.0 * reach / SCAN_POINTS as f64;
            let xs: Vec<f64> = (0..=SCAN_POINTS).map(|k| c - reach + k as f64 * step).collect();
            let vals: Vec<f64> = xs.iter().map(|&x| lp(x)).collect();
            for k in 1..SCAN_POINTS {
                let (l, m, r) = (vals[k - 1], vals[k], vals[k + 1]);
                if m >= l && m > r {
                    extrema.push(golden_extremum(&mut lp, xs[k - 1], xs[k + 1], true));
                } else if m <= l && m < r {
                    extrema.push(golden_extremum(&mut lp, xs[k - 1], xs[k + 1], false));
                }
            }
        }
        let at_zero = lp(0.0);
        if let Some(e) = failure {
            return Err(e);
        }
        let ln_peak = extrema.iter().map(|e| e.1).fold(at_zero, f64::max);
        let crossover = extrema.iter().map(|e| e.0.abs()).fold(0.0, f64::max);
        let mut right = vec![(0.0, at_zero)];
        let mut left = vec![(0.0, at_zero)];
        for &(x, v) in &extrema {
            if x > 0.0 {
                right.push((x, v));
            } else if x < 0.0 {
                left.push((-x, v));
            }
        }
        Ok(Self {
            spec: spec.clone(),
            quad: *q,
            right: Side::new(right),
            left: Side::new(left),
            ln_peak,
            crossover,
        })
    }

    fn side(&self, x: f64) -> &Side {
        if x >= 0.0 {
            &self.right
        } else {
            &self.left
        }
    }

    pub fn ln_lower(&self, x: f64) -> Result<f64> {
        let lp = self.spec.ln_pdf(x, &self.quad)?;
        Ok(self.side(x).lower(x.abs(), lp))
    }

    pub fn ln_upper(&self, x: f64) -> Result<f64> {
        let lp = self.spec.ln_pdf(x, &self.quad)?;
        Ok(self.side(x).upper(x.abs(), lp))
    }

    /// `T_l(x) = inf` of the density between 0 and `x`.
    pub fn lower(&self, x: f64) -> Result<f64> {
        Ok(self.ln_lower(x)?.exp())
    }

    /// `T_u(x) = sup` of the density beyond `x` (away from 0).
    pub fn upper(&self, x: f64) -> Result<f64> {
        Ok(self.ln_upper(x)?.exp())
    }

    /// Supremum of the density.
    pub fn peak(&self) -> f64 {
        self.ln_peak.exp()
    }

    /// Output rescaling factor that brings the peak density to at most 1.
    pub fn normalizer(&self) -> f64 {
        self.peak().max(1.0)
    }

    /// `L(x) = ln(1 / T_l(x))` after rescaling the density to peak at most 1.
    pub fn log_inverse_lower(&self, x: f64) -> Result<f64> {
        Ok(self.ln_peak.max(0.0) - self.ln_lower(x)?)
    }

    /// Distance beyond which both envelopes equal the density itself.
    pub fn crossover(&self) -> f64 {
        self.crossover
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unimodal_off_center() {
        let q = QuadratureConfig::default();
        let spec = NoiseSpec::gaussian(2.0, 1.0).unwrap();
        let env = spec.tail_envelopes(&q).unwrap();
        let p = |x: f64| spec.pdf(x, &q).unwrap();
        assert!((env.peak() - p(2.0)).abs() < 1e-14);
        // Between 0 and the mode the running inf is p(0), the running sup the peak.
        assert!((env.lower(1.0).unwrap() - p(0.0)).abs() < 1e-16);
        assert!((env.upper(1.0).unwrap() - p(2.0)).abs() < 1e-14);
        assert!((env.upper(3.0).unwrap() - p(3.0)).abs() < 1e-16);
        assert!((env.lower(-1.0).unwrap() - p(-1.0)).abs() < 1e-16);
        assert!((env.upper(-1.0).unwrap() - p(-1.0)).abs() < 1e-16);
    }

    #[test]
    fn bimodal_mixture() {
        let q = QuadratureConfig::default();
        let spec = NoiseSpec::mixture(&[(0.5, -3.0, 1.0), (0.5, 3.0, 1.0)]).unwrap();
        let env = spec.tail_envelopes(&q).unwrap();
        let p = |x: f64| spec.pdf(x, &q).unwrap();
        // Modes near ±3, dip at 0.
        assert!((env.lower(2.0).unwrap() - p(0.0)).abs() < 1e-15);
        assert!((env.upper(0.5).unwrap() - env.peak()).abs() < 1e-14);
        assert!(env.crossover() > 2.5 && env.crossover() < 3.5);
    }
}
