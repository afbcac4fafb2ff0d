//! Input maps, cost functions and the assembled channel `Y = f(X) + N`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::quad::QuadratureConfig;

/// Asymptotic growth `|x|^power · (ln|x|)^log_power` as `|x| → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub power: f64,
    pub log_power: f64,
}

impl Growth {
    pub const fn poly(power: f64) -> Self {
        Self { power, log_power: 0.0 }
    }

    pub const fn log(log_power: f64) -> Self {
        Self { power: 0.0, log_power }
    }

    /// Compares asymptotic rates: `Less` means `self = o(other)`,
    /// `Equal` means `Θ`, `Greater` means `ω`.
    pub fn compare(&self, other: &Growth) -> Ordering {
        const EPS: f64 = 1e-12;
        let by = |a: f64, b: f64| {
            if (a - b).abs() <= EPS {
                Ordering::Equal
            } else {
                a.total_cmp(&b)
            }
        };
        by(self.power, other.power).then(by(self.log_power, other.log_power))
    }

    /// Growth of `g(f(x))` when `g` grows like `self` and `f` like `inner`
    /// (with `inner` polynomial of positive degree).
    pub fn compose(&self, inner: &Growth) -> Result<Growth> {
        if inner.power <= 0.0 {
            return Err(Error::Unsupported(
                "growth composition needs a map of positive polynomial degree".into(),
            ));
        }
        if self.power > 0.0 {
            Ok(Growth { power: self.power * inner.power, log_power: self.log_power })
        } else {
            // (ln x^p)^q ~ p^q (ln x)^q
            Ok(Growth::log(self.log_power))
        }
    }
}

/// Samples on `x ≥ 0` (first abscissa 0), linearly interpolated and
/// extrapolated with the declared growth.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    growth: Growth,
}

impl TabulatedCurve {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, growth: Growth) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::InvalidChannel("tabulated curve needs ≥ 2 (x, y) pairs".into()));
        }
        if xs[0] != 0.0 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidChannel(
                "tabulated abscissae must start at 0 and increase strictly".into(),
            ));
        }
        if ys.iter().any(|y| !y.is_finite()) || ys.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidChannel("tabulated values must be finite and non-decreasing".into()));
        }
        let last = *xs.last().unwrap();
        if growth.log_power != 0.0 && last <= std::f64::consts::E {
            return Err(Error::InvalidChannel(
                "log-growth extrapolation needs samples beyond x = e".into(),
            ));
        }
        Ok(Self { xs, ys, growth })
    }

    fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        let n = self.xs.len();
        let (xl, yl) = (self.xs[n - 1], self.ys[n - 1]);
        if x >= xl {
            let mut v = yl * (x / xl).powf(self.growth.power);
            if self.growth.log_power != 0.0 {
                v *= (x.ln() / xl.ln()).powf(self.growth.log_power);
            }
            return v;
        }
        let k = self.xs.partition_point(|&t| t <= x) - 1;
        let t = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.ys[k] + t * (self.ys[k + 1] - self.ys[k])
    }
}

/// Deterministic input map `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum InputMap {
    Linear { gain: f64 },
    /// `x ↦ xⁿ`, `n` odd.
    OddPower { n: u32 },
    /// `x ↦ sgn(x)|x|ⁿ`.
    SignedPower { n: f64 },
    /// `x ↦ xⁿ`, `n` even. Not injective; accepted by the classifier only.
    EvenPower { n: u32 },
    /// Odd extension of samples given on `x ≥ 0`.
    Tabulated(TabulatedCurve),
}

impl InputMap {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Linear { gain } => *gain != 0.0 && gain.is_finite(),
            Self::OddPower { n } => n % 2 == 1,
            Self::SignedPower { n } => *n > 0.0 && n.is_finite(),
            Self::EvenPower { n } => *n > 0 && n % 2 == 0,
            Self::Tabulated(t) => t.ys[0] == 0.0 && t.ys.last().unwrap() > &0.0 && t.growth.power > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidChannel(format!("invalid input map {self:?}")))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Linear { gain } => gain * x,
            Self::OddPower { n } => x.powi(*n as i32),
            Self::SignedPower { n } => x.signum() * x.abs().powf(*n),
            Self::EvenPower { n } => x.powi(*n as i32),
            Self::Tabulated(t) => x.signum() * t.eval(x),
        }
    }

    pub fn growth(&self) -> Growth {
        match self {
            Self::Linear { .. } => Growth::poly(1.0),
            Self::OddPower { n } | Self::EvenPower { n } => Growth::poly(*n as f64),
            Self::SignedPower { n } => Growth::poly(*n),
            Self::Tabulated(t) => t.growth,
        }
    }

    pub fn is_injective(&self) -> bool {
        !matches!(self, Self::EvenPower { .. })
    }

    pub fn is_odd(&self) -> bool {
        self.is_injective()
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, Self::Tabulated(_))
    }

    /// Smallest `x ≥ 0` with `|f(x)| ≥ v`.
    pub fn abs_inverse(&self, v: f64) -> f64 {
        let v = v.max(0.0);
        match self {
            Self::Linear { gain } => v / gain.abs(),
            Self::OddPower { n } | Self::EvenPower { n } => v.powf(1.0 / *n as f64),
            Self::SignedPower { n } => v.powf(1.0 / n),
            Self::Tabulated(_) => bisect_increasing(|x| self.eval(x).abs(), v),
        }
    }
}

/// Smallest `x ≥ 0` where a non-decreasing `g` reaches `target`.
fn bisect_increasing<G: Fn(f64) -> f64>(g: G, target: f64) -> f64 {
    if g(0.0) >= target {
        return 0.0;
    }
    let mut hi = 1.0;
    while g(hi) < target {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Input cost `C(|x|)` with `C(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum CostFunction {
    /// `|x|^r`.
    Power { r: f64 },
    /// `c·(ln(1 + x²))^k`. With `k = 1` this grows like `ln|f|` for
    /// polynomial maps and fails the super-logarithmic requirement.
    LogPoly { c: f64, k: f64 },
    /// A cost `base + offset` normalized to vanish at 0: evaluates as `base`
    /// and moves `offset` into the budget.
    Shifted { base: Box<CostFunction>, offset: f64 },
    /// Even extension of samples given on `x ≥ 0`.
    Tabulated(TabulatedCurve),
}

impl CostFunction {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Power { r } => *r > 0.0 && r.is_finite(),
            Self::LogPoly { c, k } => *c > 0.0 && *k > 0.0 && c.is_finite() && k.is_finite(),
            Self::Shifted { base, offset } => {
                base.validate()?;
                offset.is_finite()
            }
            Self::Tabulated(t) => t.ys[0] == 0.0 && t.growth.power + t.growth.log_power > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidChannel(format!(
                "invalid cost {self:?} (costs must vanish at 0 and grow)"
            )))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        match self {
            Self::Power { r } => a.powf(*r),
            Self::LogPoly { c, k } => c * a.mul_add(a, 1.0).ln().powf(*k),
            Self::Shifted { base, .. } => base.eval(a),
            Self::Tabulated(t) => t.eval(a),
        }
    }

    pub fn growth(&self) -> Growth {
        match self {
            Self::Power { r } => Growth::poly(*r),
            Self::LogPoly { k, .. } => Growth::log(*k),
            Self::Shifted { base, .. } => base.growth(),
            Self::Tabulated(t) => t.growth,
        }
    }

    pub fn is_tabulated(&self) -> bool {
        match self {
            Self::Tabulated(_) => true,
            Self::Shifted { base, .. } => base.is_tabulated(),
            _ => false,
        }
    }

    /// Budget after moving any normalization offset out of the cost.
    pub fn effective_budget(&self, budget: f64) -> f64 {
        match self {
            Self::Shifted { base, offset } => base.effective_budget(budget - offset),
            _ => budget,
        }
    }

    /// Smallest `x ≥ 0` with `C(x) ≥ a`.
    pub fn inverse(&self, a: f64) -> f64 {
        let a = a.max(0.0);
        match self {
            Self::Power { r } => a.powf(1.0 / r),
            Self::LogPoly { c, k } => (a / c).powf(1.0 / k).exp_m1().sqrt(),
            Self::Shifted { base, .. } => base.inverse(a),
            Self::Tabulated(_) => bisect_increasing(|x| self.eval(x), a),
        }
    }
}

/// `Y = f(X) + N` with average cost constraint `E[C(|X|)] ≤ budget`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    pub map: InputMap,
    pub cost: CostFunction,
    pub noise: NoiseSpec,
    pub budget: f64,
}

impl ChannelInstance {
    pub fn new(map: InputMap, cost: CostFunction, noise: NoiseSpec, budget: f64) -> Result<Self> {
        let ch = Self { map, cost, noise, budget };
        ch.validate()?;
        Ok(ch)
    }

    /// Linear unit-gain channel with power cost `x²`.
    pub fn awgn_like(noise: NoiseSpec, budget: f64) -> Result<Self> {
        Self::new(InputMap::Linear { gain: 1.0 }, CostFunction::Power { r: 2.0 }, noise, budget)
    }

    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        self.cost.validate()?;
        self.noise.validate()?;
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(Error::InvalidChannel(format!(
                "cost budget must be positive and finite, got {}",
                self.budget
            )));
        }
        Ok(())
    }

    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        let mut ch = self.clone();
        ch.budget = budget;
        ch.validate()?;
        Ok(ch)
    }

    pub fn effective_budget(&self) -> f64 {
        self.cost.effective_budget(self.budget)
    }

    /// `p_{Y|X}(y|x) = p_N(y − f(x))`.
    pub fn transition_density(&self, y: f64, x: f64, q: &QuadratureConfig) -> Result<f64> {
        self.noise.pdf(y - self.map.eval(x), q)
    }

    /// True when the optimal input may be sought among symmetric distributions.
    pub fn is_symmetric(&self) -> bool {
        self.map.is_odd() && self.noise.is_symmetric_about_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_examples() {
        assert_eq!(CostFunction::Power { r: 2.0 }.eval(3.0), 9.0);
        assert_eq!(CostFunction::LogPoly { c: 1.0, k: 1.0 }.eval(0.0), 0.0);
        assert_eq!(CostFunction::Power { r: 0.5 }.eval(4.0), 2.0);
        let shifted = CostFunction::Shifted { base: Box::new(CostFunction::Power { r: 2.0 }), offset: 1.0 };
        assert_eq!(shifted.eval(0.0), 0.0);
        assert_eq!(shifted.effective_budget(3.0), 2.0);
    }

    #[test]
    fn inverses() {
        let c = CostFunction::LogPoly { c: 2.0, k: 1.5 };
        let x = c.inverse(3.0);
        assert!((c.eval(x) - 3.0).abs() < 1e-12);
        let m = InputMap::OddPower { n: 3 };
        assert!((m.abs_inverse(27.0) - 3.0).abs() < 1e-12);
        let t = InputMap::Tabulated(
            TabulatedCurve::new(vec![0.0, 1.0, 4.0], vec![0.0, 2.0, 5.0], Growth::poly(1.0)).unwrap(),
        );
        assert!((t.abs_inverse(3.0) - 2.0).abs() < 1e-12);
        assert!((t.eval(-8.0) + 10.0).abs() < 1e-12);
    }

    #[test]
    fn growth_order() {
        assert_eq!(Growth::poly(2.0).compare(&Growth::poly(2.0)), Ordering::Equal);
        assert_eq!(Growth::poly(1.0).compare(&Growth::poly(2.0)), Ordering::Less);
        assert_eq!(Growth::log(2.0).compare(&Growth::log(1.0)), Ordering::Greater);
        assert_eq!(Growth::poly(0.1).compare(&Growth::log(5.0)), Ordering::Greater);
        let g = Growth::poly(2.0).compose(&Growth::poly(3.0)).unwrap();
        assert_eq!(g, Growth::poly(6.0));
        assert_eq!(Growth::log(1.0).compose(&Growth::poly(3.0)).unwrap(), Growth::log(1.0));
    }

    #[test]
    fn rejects_bad_channels() {
        let n = NoiseSpec::gaussian(0.0, 1.0).unwrap();
        assert!(ChannelInstance::awgn_like(n.clone(), 0.0).is_err());
        assert!(ChannelInstance::awgn_like(n.clone(), -1.0).is_err());
        assert!(ChannelInstance::new(InputMap::OddPower { n: 2 }, CostFunction::Power { r: 2.0 }, n, 1.0).is_err());
    }
}
