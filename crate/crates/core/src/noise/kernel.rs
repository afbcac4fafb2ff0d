use crate::error::{Error, Result};
use crate::quad::QuadratureConfig;

use super::NoiseSpec;

/// Default node spacing of the log-density table in the `asinh` coordinate.
pub const DEFAULT_TABLE_STEP: f64 = 0.015;

/// Fast log-density evaluator. Closed-form families are evaluated directly;
/// the others are tabulated once on `x = c + w·sinh(s)` and interpolated by a
/// natural cubic spline in `s`, extrapolated linearly (power-law tails).
#[derive(Debug, Clone)]
pub struct NoiseKernel {
    spec: NoiseSpec,
    table: Option<LogTable>,
}

#[derive(Debug, Clone)]
struct LogTable {
    center: f64,
    width: f64,
    s0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl LogTable {
    fn build(spec: &NoiseSpec, q: &QuadratureConfig, h: f64) -> Result<Self> {
        let center = spec.center();
        let width = spec.scale();
        let reach = spec.tail_radius(1e-14).max(spec.bulk_radius());
        let s_max = (reach / width).asinh();
        let n = (2.0 * s_max / h).ceil() as usize + 1;
        let h = 2.0 * s_max / (n - 1) as f64;
        let s0 = -s_max;
        let y = (0..n)
            .map(|k| spec.ln_pdf(center + width * (s0 + k as f64 * h).sinh(), q))
            .collect::<Result<Vec<_>>>()?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature { achieved: f64::INFINITY, requested: q.abs_tol });
        }
        let m = natural_spline_moments(&y, h);
        Ok(Self { center, width, s0, h, y, m })
    }

    fn eval(&self, x: f64) -> f64 {
        let s = ((x - self.center) / self.width).asinh();
        let t = (s - self.s0) / self.h;
        let n = self.y.len();
        if t <= 0.0 {
            let slope = (self.y[1] - self.y[0]) / self.h;
            return self.y[0] + slope * (s - self.s0);
        }
        if t >= (n - 1) as f64 {
            let slope = (self.y[n - 1] - self.y[n - 2]) / self.h;
            return self.y[n - 1] + slope * (t - (n - 1) as f64) * self.h;
        }
        let k = (t as usize).min(n - 2);
        let b = t - k as f64;
        let a = 1.0 - b;
        let h2 = self.h * self.h / 6.0;
        a * self.y[k]
            + b * self.y[k + 1]
            + ((a * a * a - a) * self.m[k] + (b * b * b - b) * self.m[k + 1]) * h2
    }
}

/// Second derivatives of the natural cubic spline through equally spaced values.
fn natural_spline_moments(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Tridiagonal system (1, 4, 1) · m = 6/h² · Δ²y on the interior nodes.
    let inner = n - 2;
    let mut c = vec![0.0; inner];
    let mut d = vec![0.0; inner];
    for i in 0..inner {
        let rhs = 6.0 * (y[i] - 2.0 * y[i + 1] + y[i + 2]) / (h * h);
        let prev_c = if i == 0 { 0.0 } else { c[i - 1] };
        let prev_d = if i == 0 { 0.0 } else { d[i - 1] };
        let denom = 4.0 - prev_c;
        c[i] = 1.0 / denom;
        d[i] = (rhs - prev_d) / denom;
    }
    for i in (0..inner).rev() {
        let next = if i + 1 < inner { m[i + 2] } else { 0.0 };
        m[i + 1] = d[i] - c[i] * next;
    }
    m
}

impl NoiseKernel {
    pub fn new(spec: &NoiseSpec, q: &QuadratureConfig) -> Result<Self> {
        Self::with_step(spec, q, DEFAULT_TABLE_STEP)
    }

    pub fn with_step(spec: &NoiseSpec, q: &QuadratureConfig, step: f64) -> Result<Self> {
        spec.validate()?;
        let table = match spec.ln_pdf_closed(0.0) {
            Some(_) => None,
            None => Some(LogTable::build(spec, q, step)?),
        };
        Ok(Self { spec: spec.clone(), table })
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match &self.table {
            Some(t) => t.eval(x),
            None => self.spec.ln_pdf_closed(x).unwrap_or(f64::NEG_INFINITY),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    pub fn is_tabulated(&self) -> bool {
        self.table.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_cubic() {
        // Natural spline is exact for linear data.
        let y: Vec<f64> = (0..20).map(|k| 3.0 - 0.5 * k as f64).collect();
        assert!(natural_spline_moments(&y, 0.1).iter().all(|m| m.abs() < 1e-9));
    }

    #[test]
    fn table_matches_direct_density() {
        let q = QuadratureConfig::default();
        for spec in [
            NoiseSpec::stable(1.5, 0.0, 1.0, 0.0).unwrap(),
            NoiseSpec::stable(1.2, 0.4, 0.8, 0.3).unwrap(),
        ] {
            let k = NoiseKernel::new(&spec, &q).unwrap();
            assert!(k.is_tabulated());
            for &x in &[-1e7, -300.0, -7.3, -0.77, 0.0, 0.123, 2.9, 41.0, 5e5, 3e12] {
                let want = spec.ln_pdf(x, &q).unwrap();
                let got = k.ln_pdf(x);
                assert!((got - want).abs() < 1e-8, "{spec:?} x={x} got={got} want={want}");
            }
        }
    }
}
