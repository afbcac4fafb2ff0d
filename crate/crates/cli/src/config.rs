//! Run configuration.
//!
//! The file is line oriented. Blank lines and lines starting with `#` are
//! ignored; every other line is `section.key = value`. Each key may appear
//! once. Unknown sections or keys are errors.
//!
//! ```text
//! channel.noise   = composite alpha=1 gamma=0.1 sigma=1
//! channel.map     = linear
//! channel.cost    = power r=2
//! channel.budget_db = 0.16
//! solver.max_points = 24
//! output.plot     = true
//! ```
//!
//! Spec values are a family word followed by `name=value` parameters (and,
//! for mixtures and tables, bare `a:b[:c]` tuples):
//!
//! | key            | forms                                                                 |
//! |----------------|-----------------------------------------------------------------------|
//! | `channel.noise`| `gaussian [mu] [sigma]`, `mixture w:mu:sigma ...`, `gengaussian shape [scale] [mu]`, `stable alpha [beta] [gamma] [delta]`, `cauchy [gamma]`, `composite alpha [beta] [gamma] [delta] [mu] [sigma]` |
//! | `channel.map`  | `linear [gain]`, `odd-power n`, `signed-power n`, `even-power n`, `table growth [log_growth] x:y ...` |
//! | `channel.cost` | `power r`, `logpoly [c] k`, `table growth [log_growth] x:y ...`; any of them takes `offset` |
//!
//! Budgets are linear (`budget`, `budgets`) or in dB (`budget_db`,
//! `budgets_db`, with `A = 10^(dB/10)`); lists are comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use tailcap::capacity::SolverConfig;
use tailcap::channel::TabulatedCurve;
use tailcap::classify::NumericSettings;
use tailcap::{ChannelInstance, CostFunction, Growth, InputMap, NoiseSpec, QuadratureConfig, StableParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<tailcap::Error> for ConfigError {
    fn from(e: tailcap::Error) -> Self {
        Self(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBlock {
    pub noise: Option<NoiseSpec>,
    pub map: InputMap,
    pub cost: CostFunction,
    pub budgets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdfBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for PdfBlock {
    fn default() -> Self {
        Self { x_min: -10.0, x_max: 10.0, points: 201 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub channel: ChannelBlock,
    pub solver: SolverConfig,
    pub output: OutputBlock,
    pub pdf: PdfBlock,
    pub classify: NumericSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            channel: ChannelBlock {
                noise: None,
                map: InputMap::Linear { gain: 1.0 },
                cost: CostFunction::Power { r: 2.0 },
                budgets: Vec::new(),
            },
            solver: SolverConfig::default(),
            output: OutputBlock::default(),
            pdf: PdfBlock::default(),
            classify: NumericSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn quad(&self) -> &QuadratureConfig {
        &self.solver.quad
    }

    pub fn noise(&self) -> Result<&NoiseSpec> {
        self.channel.noise.as_ref().ok_or_else(|| ConfigError("channel.noise is required".into()))
    }

    /// The channel at budget `a`.
    pub fn channel_at(&self, a: f64) -> Result<ChannelInstance> {
        Ok(ChannelInstance::new(self.channel.map.clone(), self.channel.cost.clone(), self.noise()?.clone(), a)?)
    }

    /// The channel at the single configured budget.
    pub fn single_channel(&self) -> Result<ChannelInstance> {
        match self.channel.budgets.as_slice() {
            [a] => self.channel_at(*a),
            [] => err("a budget is required (channel.budget or channel.budget_db)"),
            _ => err("this subcommand takes one budget, not a list"),
        }
    }

    /// Channel for budget-independent questions; any budget works there.
    pub fn shape_channel(&self) -> Result<ChannelInstance> {
        self.channel_at(self.channel.budgets.first().copied().unwrap_or(1.0))
    }
}

/// Parses the whole configuration text.
pub fn parse(text: &str) -> Result<RunConfig> {
    let mut entries: BTreeMap<(String, String), (usize, String)> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = n + 1;
        let Some((lhs, value)) = line.split_once('=') else {
            return err(format!("line {lineno}: expected 'section.key = value'"));
        };
        let Some((section, key)) = lhs.trim().split_once('.') else {
            return err(format!("line {lineno}: key '{}' lacks a section", lhs.trim()));
        };
        let (section, key) = (section.trim().to_string(), key.trim().to_string());
        if section.is_empty() || key.is_empty() || key.contains('.') {
            return err(format!("line {lineno}: malformed key '{}'", lhs.trim()));
        }
        if let Some((first, _)) = entries.get(&(section.clone(), key.clone())) {
            return err(format!("line {lineno}: {section}.{key} already set on line {first}"));
        }
        entries.insert((section, key), (lineno, value.trim().to_string()));
    }

    let mut cfg = RunConfig::default();
    let mut budget_keys = Vec::new();
    for ((section, key), (lineno, value)) in &entries {
        let at = |e: ConfigError| ConfigError(format!("line {lineno}: {section}.{key}: {}", e.0));
        apply(&mut cfg, section, key, value, &mut budget_keys).map_err(at)?;
    }
    if budget_keys.len() > 1 {
        return err(format!("set only one of {}", budget_keys.join(", ")));
    }
    cfg.solver.validate()?;
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, section: &str, key: &str, v: &str, budget_keys: &mut Vec<String>) -> Result<()> {
    let s = &mut cfg.solver;
    match (section, key) {
        ("channel", "noise") => cfg.channel.noise = Some(parse_noise(v)?),
        ("channel", "map") => cfg.channel.map = parse_map(v)?,
        ("channel", "cost") => cfg.channel.cost = parse_cost(v)?,
        ("channel", "budget" | "budgets" | "budget_db" | "budgets_db") => {
            let list = key.ends_with('s') || key.ends_with("s_db");
            let mut values = Vec::new();
            for item in v.split(',') {
                values.push(number(item)?);
            }
            if !list && values.len() != 1 {
                return err("expected a single value; use the plural key for a list");
            }
            if key.ends_with("_db") {
                values.iter_mut().for_each(|d| *d = 10f64.powf(*d / 10.0));
            }
            if let Some(bad) = values.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
                return err(format!("budgets must be positive and finite, got {bad}"));
            }
            budget_keys.push(format!("channel.{key}"));
            cfg.channel.budgets = values;
        }
        ("solver", "max_points") => s.max_points = count(v)?,
        ("solver", "max_outer") => s.max_outer = count(v)?,
        ("solver", "location_iters") => s.location_iters = count(v)?,
        ("solver", "ba_tol") => s.ba_tol = number(v)?,
        ("solver", "ba_max_iter") => s.ba_max_iter = count(v)?,
        ("solver", "merge_eps") => s.merge_eps = number(v)?,
        ("solver", "prune_tol") => s.prune_tol = number(v)?,
        ("solver", "insert_mass") => s.insert_mass = number(v)?,
        ("solver", "symmetric") => {
            s.symmetric = match v {
                "auto" => None,
                _ => Some(boolean(v)?),
            }
        }
        ("solver", "grid_step") => s.grid_step = number(v)?,
        ("solver", "rule_step") => s.rule_step = number(v)?,
        ("solver", "kkt_tol") => s.grid.kkt_tol = number(v)?,
        ("solver", "grid_per_decade") => s.grid.per_decade = count(v)?,
        ("solver", "grid_core_points") => s.grid.core_points = count(v)?,
        ("solver", "grid_support_points") => s.grid.support_points = count(v)?,
        ("solver", "grid_safety") => s.grid.safety = number(v)?,
        ("solver", "grid_max_extent") => s.grid.max_extent_factor = number(v)?,
        ("quad", "abs_tol") => s.quad.abs_tol = number(v)?,
        ("quad", "rel_tol") => s.quad.rel_tol = number(v)?,
        ("quad", "max_subdivisions") => s.quad.max_subdivisions = count(v)?,
        ("quad", "truncation_mass") => s.quad.truncation_mass = number(v)?,
        ("output", "dir") => cfg.output.dir = Some(PathBuf::from(v)),
        ("output", "plot") => cfg.output.plot = boolean(v)?,
        ("pdf", "x_min") => cfg.pdf.x_min = number(v)?,
        ("pdf", "x_max") => cfg.pdf.x_max = number(v)?,
        ("pdf", "points") => cfg.pdf.points = count(v)?,
        ("classify", "x_max") => cfg.classify.x_max = Some(number(v)?),
        ("classify", "samples") => cfg.classify.samples = count(v)?,
        ("classify", "decades") => cfg.classify.decades = number(v)?,
        ("channel" | "solver" | "quad" | "output" | "pdf" | "classify", _) => return err("unknown key"),
        _ => return err("unknown section"),
    }
    if section == "pdf" && cfg.pdf.points < 2 {
        return err("need at least 2 points");
    }
    Ok(())
}

fn number(s: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("'{}' is not a finite number", s.trim())),
    }
}

fn count(s: &str) -> Result<usize> {
    s.trim().parse::<usize>().or_else(|_| err(format!("'{}' is not a non-negative integer", s.trim())))
}

fn boolean(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        other => err(format!("'{other}' is not a boolean")),
    }
}

/// A family word, `name=value` parameters and bare tuples.
struct Spec<'a> {
    family: &'a str,
    params: BTreeMap<&'a str, f64>,
    tuples: Vec<Vec<f64>>,
}

impl<'a> Spec<'a> {
    fn parse(v: &'a str) -> Result<Self> {
        let mut words = v.split_whitespace();
        let family = words.next().ok_or_else(|| ConfigError("empty value".into()))?;
        let mut params = BTreeMap::new();
        let mut tuples = Vec::new();
        for w in words {
            if let Some((k, x)) = w.split_once('=') {
                if params.insert(k, number(x)?).is_some() {
                    return err(format!("parameter '{k}' given twice"));
                }
            } else if w.contains(':') {
                tuples.push(w.split(':').map(number).collect::<Result<Vec<_>>>()?);
            } else {
                return err(format!("unexpected word '{w}'"));
            }
        }
        Ok(Self { family, params, tuples })
    }

    /// Rejects parameters outside `allowed` and tuples when none are expected.
    fn only(&self, allowed: &[&str], tuples: bool) -> Result<()> {
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(k)) {
            return err(format!("'{}' takes no parameter '{k}'", self.family));
        }
        if !tuples && !self.tuples.is_empty() {
            return err(format!("'{}' takes no tuples", self.family));
        }
        Ok(())
    }

    fn get(&self, k: &str, default: f64) -> f64 {
        self.params.get(k).copied().unwrap_or(default)
    }

    fn need(&self, k: &str) -> Result<f64> {
        self.params.get(k).copied().ok_or_else(|| ConfigError(format!("'{}' needs {k}=", self.family)))
    }

    fn int(&self, k: &str) -> Result<u32> {
        let n = self.need(k)?;
        if n.fract() != 0.0 || !(1.0..=63.0).contains(&n) {
            return err(format!("{k} must be a positive integer"));
        }
        Ok(n as u32)
    }

    fn table(&self) -> Result<TabulatedCurve> {
        self.only(&["growth", "log_growth", "offset"], true)?;
        let growth = Growth { power: self.need("growth")?, log_power: self.get("log_growth", 0.0) };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in &self.tuples {
            let [x, y] = t.as_slice() else {
                return err("table entries are x:y");
            };
            xs.push(*x);
            ys.push(*y);
        }
        Ok(TabulatedCurve::new(xs, ys, growth)?)
    }
}

pub fn parse_noise(v: &str) -> Result<NoiseSpec> {
    let s = Spec::parse(v)?;
    let stable = |s: &Spec| -> Result<StableParams> {
        Ok(StableParams::new(s.need("alpha")?, s.get("beta", 0.0), s.get("gamma", 1.0), s.get("delta", 0.0))?)
    };
    let noise = match s.family {
        "gaussian" => {
            s.only(&["mu", "sigma"], false)?;
            NoiseSpec::gaussian(s.get("mu", 0.0), s.get("sigma", 1.0))?
        }
        "mixture" => {
            s.only(&[], true)?;
            let mut comps = Vec::new();
            for t in &s.tuples {
                let [w, mu, sigma] = t.as_slice() else {
                    return err("mixture components are weight:mu:sigma");
                };
                comps.push((*w, *mu, *sigma));
            }
            NoiseSpec::mixture(&comps)?
        }
        "gengaussian" => {
            s.only(&["shape", "scale", "mu"], false)?;
            NoiseSpec::gen_gaussian(s.need("shape")?, s.get("scale", 1.0), s.get("mu", 0.0))?
        }
        "stable" => {
            s.only(&["alpha", "beta", "gamma", "delta"], false)?;
            NoiseSpec::AlphaStable(stable(&s)?)
        }
        "cauchy" => {
            s.only(&["gamma"], false)?;
            NoiseSpec::cauchy(s.get("gamma", 1.0))?
        }
        "composite" => {
            s.only(&["alpha", "beta", "gamma", "delta", "mu", "sigma"], false)?;
            NoiseSpec::composite(stable(&s)?, s.get("mu", 0.0), s.get("sigma", 1.0))?
        }
        other => return err(format!("unknown noise family '{other}'")),
    };
    Ok(noise)
}

pub fn parse_map(v: &str) -> Result<InputMap> {
    let s = Spec::parse(v)?;
    let map = match s.family {
        "linear" => {
            s.only(&["gain"], false)?;
            InputMap::Linear { gain: s.get("gain", 1.0) }
        }
        "odd-power" => {
            s.only(&["n"], false)?;
            InputMap::OddPower { n: s.int("n")? }
        }
        "even-power" => {
            s.only(&["n"], false)?;
            InputMap::EvenPower { n: s.int("n")? }
        }
        "signed-power" => {
            s.only(&["n"], false)?;
            InputMap::SignedPower { n: s.need("n")? }
        }
        "table" => {
            if s.params.contains_key("offset") {
                return err("maps take no offset");
            }
            InputMap::Tabulated(s.table()?)
        }
        other => return err(format!("unknown map '{other}'")),
    };
    map.validate()?;
    Ok(map)
}

pub fn parse_cost(v: &str) -> Result<CostFunction> {
    let s = Spec::parse(v)?;
    let base = match s.family {
        "power" => {
            s.only(&["r", "offset"], false)?;
            CostFunction::Power { r: s.need("r")? }
        }
        "logpoly" => {
            s.only(&["c", "k", "offset"], false)?;
            CostFunction::LogPoly { c: s.get("c", 1.0), k: s.need("k")? }
        }
        "table" => CostFunction::Tabulated(s.table()?),
        other => return err(format!("unknown cost '{other}'")),
    };
    let cost = match s.params.get("offset") {
        Some(&offset) if offset != 0.0 => CostFunction::Shifted { base: Box::new(base), offset },
        _ => base,
    };
    cost.validate()?;
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_example() {
        let cfg = parse(
            "# composite channel\n\
             channel.noise = composite alpha=1 gamma=0.1 sigma=1\n\
             channel.cost = power r=2\n\
             channel.budget_db = 0.16\n\
             solver.max_points = 24\n\
             solver.symmetric = auto\n\
             output.plot = yes\n",
        )
        .unwrap();
        assert_eq!(cfg.solver.max_points, 24);
        assert!(cfg.output.plot);
        assert!((cfg.channel.budgets[0] - 10f64.powf(0.016)).abs() < 1e-15);
        assert_eq!(cfg.channel.map, InputMap::Linear { gain: 1.0 });
        let ch = cfg.single_channel().unwrap();
        assert_eq!(ch.noise.family(), "composite");
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(parse("channel.colour = red").unwrap_err().0.contains("unknown key"));
        assert!(parse("plot.on = true").unwrap_err().0.contains("unknown section"));
        assert!(parse("channel.budget = 1\nchannel.budget = 2").unwrap_err().0.contains("already set"));
        assert!(parse("channel.budget = 1\nchannel.budget_db = 2").is_err());
        assert!(parse("nonsense").is_err());
        assert!(parse("channel.budget = 0").is_err());
        assert!(parse("channel.budget = 1, 2").is_err());
    }

    #[test]
    fn spec_values() {
        assert_eq!(parse_noise("mixture 0.5:0:1 0.5:0:2").unwrap().family(), "mixture");
        assert!(parse_noise("stable gamma=1").is_err());
        assert!(parse_noise("gaussian sigma=1 nu=2").is_err());
        assert_eq!(parse_map("odd-power n=3").unwrap(), InputMap::OddPower { n: 3 });
        assert!(parse_map("odd-power n=2").is_err());
        let c = parse_cost("power r=2 offset=0.5").unwrap();
        assert!(matches!(c, CostFunction::Shifted { offset, .. } if offset == 0.5));
        let t = parse_cost("table growth=2 0:0 1:1 2:4").unwrap();
        assert!(t.is_tabulated());
        assert!(parse_cost("table growth=2 0:0 1").is_err());
    }
}
