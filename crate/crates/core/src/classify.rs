//! Support-type classification from the growth of the cost against the
//! noise tail, and sampled checks of the regularity conditions C1–C8.

use std::cmp::Ordering;

use crate::channel::{ChannelInstance, Growth};
use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, TailEnvelopes};
use crate::quad::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SupportKind {
    Compact,
    Unbounded,
    Transitional,
    Indeterminate,
}

impl SupportKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Compact => "compact",
            Self::Unbounded => "unbounded",
            Self::Transitional => "transitional",
            Self::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Symbolic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportVerdict {
    pub kind: SupportKind,
    pub basis: Basis,
    /// `(x, ρ(x))` samples backing a numeric verdict.
    pub evidence: Vec<(f64, f64)>,
    /// Which result the verdict rests on.
    pub theorem_tag: String,
    pub diagnostic: Option<String>,
}

/// Growth of the cut-off rate `ln(1/p_N(v))` in `|v|`, with a tag naming the
/// specialization that covers the family.
fn tail_rate(noise: &NoiseSpec) -> (Growth, &'static str) {
    match noise {
        NoiseSpec::Gaussian(_) => (Growth::poly(2.0), "gaussian"),
        NoiseSpec::Mixture(_) => (Growth::poly(2.0), "gaussian-mixture"),
        NoiseSpec::GenGaussian { shape, .. } => (Growth::poly(*shape), "generalized-gaussian"),
        NoiseSpec::AlphaStable(_) => (Growth::log(1.0), "alpha-stable"),
        NoiseSpec::Composite { .. } => (Growth::log(1.0), "stable-plus-gaussian"),
    }
}

/// Decision table over declared growth classes.
pub fn classify_symbolic(ch: &ChannelInstance) -> Result<SupportVerdict> {
    ch.validate()?;
    if ch.map.is_tabulated() || ch.cost.is_tabulated() {
        return Err(Error::Unsupported(
            "tabulated maps or costs have no exact growth class; use the numeric classifier".into(),
        ));
    }
    let map = ch.map.growth();
    let cost = ch.cost.growth();
    let (rate, family) = tail_rate(&ch.noise);
    let rate_x = rate.compose(&map)?;
    let verdict = |kind, tag: String, diagnostic| SupportVerdict {
        kind,
        basis: Basis::Symbolic,
        evidence: Vec::new(),
        theorem_tag: tag,
        diagnostic,
    };
    // The cost must outgrow ln|f(x)|.
    if cost.compare(&Growth::log(1.0)) != Ordering::Greater {
        return Ok(verdict(
            SupportKind::Indeterminate,
            format!("{family}: C4 violated"),
            Some("cost is not super-logarithmic in |f(x)|, so the theorems do not apply".into()),
        ));
    }
    let kind = match cost.compare(&rate_x) {
        Ordering::Greater => SupportKind::Compact,
        Ordering::Less => SupportKind::Unbounded,
        Ordering::Equal => SupportKind::Transitional,
    };
    let tag = match kind {
        SupportKind::Compact => format!("{family}: cost outgrows the cut-off rate (compact support)"),
        SupportKind::Unbounded => format!("{family}: cost is dominated by the cut-off rate (unbounded support)"),
        _ => format!("{family}: cost matches the cut-off rate (no theorem applies)"),
    };
    Ok(verdict(kind, tag, None))
}

/// Settings for the sampled classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericSettings {
    /// Largest input magnitude sampled; `None` uses 10³ input-space noise scales.
    pub x_max: Option<f64>,
    pub samples: usize,
    pub decades: f64,
}

impl Default for NumericSettings {
    fn default() -> Self {
        Self { x_max: None, samples: 24, decades: 3.0 }
    }
}

const COMPACT_LEVEL: f64 = 5.0;
const UNBOUNDED_LEVEL: f64 = 0.2;
const TRANSITIONAL_BAND: (f64, f64) = (0.5, 2.0);
const FLAT_SLOPE: f64 = 0.05;

fn slope_and_level(xs: &[f64], rho: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let lr: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let mr = lr.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&lr).map(|(a, b)| (a - mx) * (b - mr)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxy / sxx, mr.exp())
}

/// Verdict from sampled ratios `ρ(x) = C(x)/ln(1/T_l(f(x)))` (and the `T_u`
/// analogue) over the top third of a geometric grid.
pub fn classify_numeric(ch: &ChannelInstance, settings: &NumericSettings, q: &QuadratureConfig) -> Result<SupportVerdict> {
    ch.validate()?;
    let n = settings.samples.max(8);
    let decades = settings.decades.max(3.0);
    let x_scale = ch.map.abs_inverse(ch.noise.scale());
    let x_max = settings.x_max.unwrap_or(1e3 * x_scale);
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::InvalidInput(format!("x_max must be positive, got {x_max}")));
    }
    let env = ch.noise.tail_envelopes(q)?;
    let c = ch.noise.center();
    let lead = ln_normalizer(&env);
    let xs: Vec<f64> = (0..n)
        .map(|k| x_max * 10f64.powf(-decades * (n - 1 - k) as f64 / (n - 1) as f64))
        .collect();
    let indeterminate = |msg: String, evidence: Vec<(f64, f64)>| SupportVerdict {
        kind: SupportKind::Indeterminate,
        basis: Basis::Numeric,
        evidence,
        theorem_tag: "sampled growth ratio".into(),
        diagnostic: Some(msg),
    };
    let mut rho_l = Vec::with_capacity(n);
    let mut rho_u = Vec::with_capacity(n);
    for &x in &xs {
        let v = ch.map.eval(x).abs();
        let cost = ch.cost.eval(x);
        let mut l_low = f64::NEG_INFINITY;
        let mut l_up = f64::INFINITY;
        for side in [1.0, -1.0] {
            let at = c + side * v;
            let (lo, up) = match (env.ln_lower(at), env.ln_upper(at)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    return Ok(indeterminate(format!("envelope evaluation failed at x = {x}: {e}"), Vec::new()))
                }
            };
            l_low = l_low.max(lead - lo);
            l_up = l_up.min(lead - up);
        }
        if !(l_low.is_finite() && l_up.is_finite()) || l_low <= 0.0 || l_up <= 0.0 || cost <= 0.0 {
            return Ok(indeterminate(
                format!("envelope underflow or degenerate ratio at x = {x}"),
                xs.iter().copied().zip(rho_l.iter().copied()).collect(),
            ));
        }
        rho_l.push(cost / l_low);
        rho_u.push(cost / l_up);
    }
    let tail = n - n / 3;
    let (slope_l, level_l) = slope_and_level(&xs[tail..], &rho_l[tail..]);
    let (slope_u, level_u) = slope_and_level(&xs[tail..], &rho_u[tail..]);
    let evidence_l: Vec<(f64, f64)> = xs.iter().copied().zip(rho_l.iter().copied()).collect();
    let evidence_u: Vec<(f64, f64)> = xs.iter().copied().zip(rho_u.iter().copied()).collect();
    let (lo, hi) = TRANSITIONAL_BAND;
    let edge = 1e-6;
    let (kind, evidence, tag) = if level_l >= COMPACT_LEVEL && slope_l > FLAT_SLOPE {
        (SupportKind::Compact, evidence_l, "sampled ratio grows past the compactness threshold")
    } else if level_u <= UNBOUNDED_LEVEL && slope_u < -FLAT_SLOPE {
        (SupportKind::Unbounded, evidence_u, "sampled ratio decays below the unboundedness threshold")
    } else if level_l >= lo * (1.0 - edge) && level_l <= hi * (1.0 + edge) && slope_l.abs() <= FLAT_SLOPE {
        (SupportKind::Transitional, evidence_l, "sampled ratio is flat at order one")
    } else {
        return Ok(SupportVerdict {
            kind: SupportKind::Indeterminate,
            basis: Basis::Numeric,
            evidence: evidence_l,
            theorem_tag: "sampled growth ratio".into(),
            diagnostic: Some(format!(
                "no threshold met: level {level_l:.3e} slope {slope_l:.3} (T_u ratio level {level_u:.3e} slope {slope_u:.3})"
            )),
        });
    };
    let diagnostic = (ch.map.is_tabulated() || ch.cost.is_tabulated()).then(|| "numeric-evidence only".to_string());
    Ok(SupportVerdict { kind, basis: Basis::Numeric, evidence, theorem_tag: tag.into(), diagnostic })
}

/// `ln` of the output rescaling that brings the density peak to at most 1.
fn ln_normalizer(env: &TailEnvelopes) -> f64 {
    env.normalizer().ln()
}

/// Symbolic verdict when the growth classes are declared, numeric otherwise.
pub fn classify(ch: &ChannelInstance, q: &QuadratureConfig) -> Result<SupportVerdict> {
    match classify_symbolic(ch) {
        Ok(v) => Ok(v),
        Err(Error::Unsupported(_)) => classify_numeric(ch, &NumericSettings::default(), q),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// C1 through C8, in order.
    pub checks: Vec<ConditionCheck>,
    /// `E[ln(1 + |N|)]`.
    pub log_moment: Option<f64>,
    /// Empirical `max L(x+y)/(L(x)+L(y))` and where it is attained.
    pub kappa: Option<f64>,
    pub kappa_at: Option<(f64, f64)>,
    /// `−∫ T_u ln T_l`.
    pub envelope_integral: Option<f64>,
}

impl ConditionReport {
    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, passed: bool, value: Option<f64>, detail: String) -> ConditionCheck {
    ConditionCheck { name, passed, value, detail }
}

fn geometric(from: f64, to: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| from * (to / from).powf(k as f64 / (n - 1) as f64)).collect()
}

/// Sampled evidence for each of C1–C8. Failures are report entries, not errors.
pub fn check_conditions(ch: &ChannelInstance, q: &QuadratureConfig) -> Result<ConditionReport> {
    ch.validate()?;
    let x_s = ch.map.abs_inverse(ch.noise.scale()).max(f64::MIN_POSITIVE);
    let mut checks = Vec::with_capacity(8);
    let mut xs = geometric(1e-3 * x_s, 1e4 * x_s, 281);
    let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
    xs.extend(neg);
    xs.push(0.0);

    // C1: continuity of f, from how a jump shrinks under refinement.
    let mut worst = 0.0f64;
    for &x in &xs {
        let h = 1e-3 * (x.abs() + x_s);
        let coarse = (ch.map.eval(x + h) - ch.map.eval(x)).abs();
        let fine = (ch.map.eval(x + h * 1e-3) - ch.map.eval(x)).abs();
        let scale = coarse.max(1e-300);
        if fine > 1e-9 * (1.0 + ch.map.eval(x).abs()) {
            worst = worst.max(fine / scale);
        }
    }
    checks.push(check("C1", worst <= 0.05, Some(worst), format!("max refined/coarse increment ratio {worst:.3e}")));

    // C2: |f| non-decreasing in |x| and unbounded.
    let pos = geometric(1e-3 * x_s, 1e6 * x_s, 400);
    let mut monotone = true;
    for sign in [1.0, -1.0] {
        let vals: Vec<f64> = pos.iter().map(|&x| ch.map.eval(sign * x).abs()).collect();
        monotone &= vals.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    }
    let growth = ch.map.eval(1e6 * x_s).abs() / ch.map.eval(1e3 * x_s).abs().max(1e-300);
    checks.push(check(
        "C2",
        monotone && growth > 10.0,
        Some(growth),
        format!("monotone in |x|: {monotone}; |f| grows by {growth:.3e} over the last three decades"),
    ));

    // C3: C(0) = 0 and non-decreasing.
    let c0 = ch.cost.eval(0.0);
    let cost_mono = pos.windows(2).all(|w| ch.cost.eval(w[1]) >= ch.cost.eval(w[0]));
    checks.push(check("C3", c0 == 0.0 && cost_mono, Some(c0), format!("C(0) = {c0}; non-decreasing: {cost_mono}")));

    // C4: C(x)/ln|f(x)| increasing without bound.
    let start = ch.map.abs_inverse(std::f64::consts::E * 10.0).max(10.0 * x_s);
    let grid = geometric(start, start * 1e6, 61);
    let ratios: Vec<f64> = grid.iter().map(|&x| ch.cost.eval(x) / ch.map.eval(x).abs().ln()).collect();
    let half = &ratios[ratios.len() / 2..];
    let rising = half.windows(2).all(|w| w[1] >= w[0]);
    let gain = half[half.len() - 1] / half[0];
    checks.push(check(
        "C4",
        rising && gain > 1.05,
        Some(gain),
        format!("C/ln|f| rises by a factor {gain:.4} over the last three decades (monotone: {rising})"),
    ));

    // C5: positive density.
    let noise = &ch.noise;
    let c = noise.center();
    let w = noise.scale();
    let mut positive = true;
    for &x in &xs {
        match noise.ln_pdf(c + x / x_s * w, q) {
            Ok(v) if v.is_finite() => {}
            _ => positive = false,
        }
    }
    checks.push(check("C5", positive, None, format!("density positive and finite on {} samples: {positive}", xs.len())));

    // C6: log moment with ln(1 + |x|) as the witness function.
    let (log_moment, c6) = match noise.expectation(|x| x.abs().ln_1p(), q) {
        Ok(v) if v.is_finite() => (Some(v), check("C6", true, Some(v), format!("E[ln(1+|N|)] = {v:.7}"))),
        Ok(v) => (None, check("C6", false, None, format!("log moment not finite ({v})"))),
        Err(e) => (None, check("C6", false, None, format!("log moment failed: {e}"))),
    };
    checks.push(c6);

    // C7 and C8 need the envelopes.
    let (kappa, kappa_at, c7, envelope_integral, c8) = match noise.tail_envelopes(q) {
        Ok(env) => {
            let (kappa, at, c7) = kappa_check(&env, 10.0 * w);
            let (int, c8) = envelope_check(noise, &env, q);
            (kappa, at, c7, int, c8)
        }
        Err(e) => (
            None,
            None,
            check("C7", false, None, format!("envelopes failed: {e}")),
            None,
            check("C8", false, None, format!("envelopes failed: {e}")),
        ),
    };
    checks.push(c7);
    checks.push(c8);
    Ok(ConditionReport { checks, log_moment, kappa, kappa_at, envelope_integral })
}

fn kappa_check(env: &TailEnvelopes, x7: f64) -> (Option<f64>, Option<(f64, f64)>, ConditionCheck) {
    let mags = geometric(x7, 1e3 * x7, 31);
    let mut pts: Vec<f64> = mags.iter().map(|m| -m).collect();
    pts.extend(mags.iter().copied());
    let l = |x: f64| env.log_inverse_lower(x);
    let mut base = Vec::with_capacity(pts.len());
    for &x in &pts {
        match l(x) {
            Ok(v) if v.is_finite() => base.push(v),
            _ => return (None, None, check("C7", false, None, format!("L not finite at {x}"))),
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut at = (0.0, 0.0);
    for (i, &x) in pts.iter().enumerate() {
        for (j, &y) in pts.iter().enumerate().skip(i) {
            let den = base[i] + base[j];
            if den <= 0.0 {
                return (None, None, check("C7", false, None, format!("L(x)+L(y) vanishes at ({x}, {y})")));
            }
            match l(x + y) {
                Ok(v) if v.is_finite() => {
                    let r = v / den;
                    if r > best {
                        best = r;
                        at = (x, y);
                    }
                }
                _ => return (None, None, check("C7", false, None, format!("L not finite at {}", x + y))),
            }
        }
    }
    (
        Some(best),
        Some(at),
        check(
            "C7",
            best.is_finite(),
            Some(best),
            format!("kappa = {best:.6} attained at (x, y) = ({:.4e}, {:.4e}) over |x|,|y| in [{x7:.3e}, {:.3e}]", at.0, at.1, 1e3 * x7),
        ),
    )
}

fn envelope_check(noise: &NoiseSpec, env: &TailEnvelopes, q: &QuadratureConfig) -> (Option<f64>, ConditionCheck) {
    let mut failure = None;
    let value = noise.mapped_integral(
        |x| match (env.ln_upper(x), env.ln_lower(x)) {
            (Ok(u), Ok(l)) => -u.exp() * l,
            (Err(e), _) | (_, Err(e)) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        q,
    );
    match (value, failure) {
        (Ok(v), None) if v.is_finite() => (Some(v), check("C8", true, Some(v), format!("-∫ T_u ln T_l = {v:.7}"))),
        (Ok(v), None) => (None, check("C8", false, None, format!("integral not finite ({v})"))),
        (Err(e), _) | (_, Some(e)) => (None, check("C8", false, None, format!("integral failed: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{CostFunction, InputMap};

    fn gauss_channel(cost: CostFunction) -> ChannelInstance {
        ChannelInstance::new(InputMap::Linear { gain: 1.0 }, cost, NoiseSpec::gaussian(0.0, 1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn symbolic_examples() {
        let v = classify_symbolic(&gauss_channel(CostFunction::Power { r: 4.0 })).unwrap();
        assert_eq!(v.kind, SupportKind::Compact);
        let v = classify_symbolic(&gauss_channel(CostFunction::Power { r: 1.0 })).unwrap();
        assert_eq!(v.kind, SupportKind::Unbounded);
        let v = classify_symbolic(&gauss_channel(CostFunction::LogPoly { c: 1.0, k: 1.0 })).unwrap();
        assert_eq!(v.kind, SupportKind::Indeterminate);
    }

    #[test]
    fn numeric_examples() {
        let q = QuadratureConfig::default();
        let s = NumericSettings::default();
        let v = classify_numeric(&gauss_channel(CostFunction::Power { r: 2.0 }), &s, &q).unwrap();
        assert_eq!(v.kind, SupportKind::Transitional, "{v:?}");
        let v = classify_numeric(&gauss_channel(CostFunction::Power { r: 3.0 }), &s, &q).unwrap();
        assert_eq!(v.kind, SupportKind::Compact);
        assert!(v.evidence.len() >= 8);
    }
}
