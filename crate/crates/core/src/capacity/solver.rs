use crate::channel::ChannelInstance;
use crate::error::{Error, Result};
use crate::quad::QuadratureConfig;

use super::info::InfoEvaluator;
use super::kkt::GridSpec;
use super::{CapacityResult, DiscreteInput, KktReport};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Upper limit on the number of mass points.
    pub max_points: usize,
    /// Upper limit on verify-and-insert rounds.
    pub max_outer: usize,
    /// Location updates per round.
    pub location_iters: usize,
    /// Duality-gap tolerance of the probability updates.
    pub ba_tol: f64,
    pub ba_max_iter: usize,
    /// Merge distance, in units of the input-space noise resolution.
    pub merge_eps: f64,
    /// Mass points lighter than this are dropped.
    pub prune_tol: f64,
    /// Probability given to a newly inserted point (split across a symmetric pair).
    pub insert_mass: f64,
    /// Restrict to symmetric inputs; `None` decides from the channel.
    pub symmetric: Option<bool>,
    /// Spacing of the optimizer's output grid, in units of the noise resolution.
    pub grid_step: f64,
    /// Spacing of the noise-centered rule used for reported quantities.
    pub rule_step: f64,
    pub grid: GridSpec,
    pub quad: QuadratureConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_points: 20,
            max_outer: 60,
            location_iters: 40,
            ba_tol: 1e-9,
            ba_max_iter: 50_000,
            merge_eps: 1e-4,
            prune_tol: 1e-8,
            insert_mass: 0.02,
            symmetric: None,
            grid_step: 0.05,
            rule_step: super::DEFAULT_RULE_STEP,
            grid: GridSpec::default(),
            quad: QuadratureConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        let bad = |m: &str| Err(Error::InvalidInput(format!("solver config: {m}")));
        if self.max_points < 1 {
            return bad("max_points must be at least 1");
        }
        if !(self.ba_tol > 0.0) || !(self.prune_tol >= 0.0) || !(self.merge_eps > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.insert_mass > 0.0 && self.insert_mass < 0.5) {
            return bad("insert_mass must lie in (0, 0.5)");
        }
        if !(self.grid_step > 0.0 && self.grid_step <= 0.5) {
            return bad("grid_step must lie in (0, 0.5]");
        }
        if !(self.grid.kkt_tol > 0.0) || self.grid.per_decade == 0 || !(self.grid.safety >= 1.0) {
            return bad("grid spec needs kkt_tol > 0, per_decade > 0 and safety >= 1");
        }
        Ok(())
    }
}

/// Trapezoid rule on `y = c + r(λs + sinh s)`: uniform over the support,
/// geometric in the tails.
struct OutputGrid {
    y: Vec<f64>,
    w: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl OutputGrid {
    fn new(ev: &InfoEvaluator, u: &[f64], step: f64) -> Self {
        let spec = &ev.channel().noise;
        let r = spec.resolution();
        let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
        let u_max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let c = 0.5 * (u_min + u_max) + spec.center();
        let half = 0.5 * (u_max - u_min);
        let reach = spec.tail_radius(ev.quad().truncation_mass) + spec.bulk_radius();
        let lambda = 0.5 * (half / r + 5.0);
        let map = |s: f64| r * (lambda * s + s.sinh());
        let target = half + reach;
        let mut s_max = 1.0;
        while map(s_max) < target {
            s_max *= 2.0;
        }
        let (mut a, mut b) = (0.0, s_max);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if map(m) < target {
                a = m;
            } else {
                b = m;
            }
        }
        let s_max = b;
        let h = step / (lambda + 1.0);
        let n = (s_max / h).ceil() as i64;
        let h = s_max / n as f64;
        let mut y = Vec::with_capacity(2 * n as usize + 1);
        let mut w = Vec::with_capacity(2 * n as usize + 1);
        for k in -n..=n {
            let s = k as f64 * h;
            y.push(c + map(s));
            w.push(h * r * (lambda + s.cosh()));
        }
        Self { y, w, lo: u_min - 2.0 * r, hi: u_max + 2.0 * r }
    }

    fn covers(&self, u: &[f64]) -> bool {
        u.iter().all(|&v| v >= self.lo && v <= self.hi)
    }
}

/// Channel columns for a fixed set of locations.
struct Fixed {
    cost: Vec<f64>,
    k: Vec<Vec<f64>>,
    /// `Σ_g w_g K ln K`.
    neg_ent: Vec<f64>,
}

impl Fixed {
    fn new(ev: &InfoEvaluator, grid: &OutputGrid, points: &[f64]) -> Self {
        let ch = ev.channel();
        let kernel = ev.kernel();
        let mut k = Vec::with_capacity(points.len());
        let mut neg_ent = Vec::with_capacity(points.len());
        for &x in points {
            let u = ch.map.eval(x);
            let mut col = Vec::with_capacity(grid.y.len());
            let mut acc = 0.0;
            for (y, w) in grid.y.iter().zip(&grid.w) {
                let lp = kernel.ln_pdf(y - u);
                let p = lp.exp();
                if p > 0.0 {
                    acc += w * p * lp;
                }
                col.push(p);
            }
            k.push(col);
            neg_ent.push(acc);
        }
        let cost = points.iter().map(|&x| ch.cost.eval(x)).collect();
        Self { cost, k, neg_ent }
    }

    fn ln_output(&self, probs: &[f64]) -> Vec<f64> {
        let m = self.k[0].len();
        let mut py = vec![0.0; m];
        for (col, &p) in self.k.iter().zip(probs) {
            if p > 0.0 {
                for (a, &v) in py.iter_mut().zip(col) {
                    *a += p * v;
                }
            }
        }
        py.into_iter().map(|v| if v > 0.0 { v.ln() } else { -745.0 }).collect()
    }

    /// `D_j = KL(p_N(· − u_j) ‖ p_Y)`.
    fn divergences(&self, grid: &OutputGrid, ln_py: &[f64]) -> Vec<f64> {
        self.k
            .iter()
            .zip(&self.neg_ent)
            .map(|(col, &a)| {
                let cross: f64 = col.iter().zip(&grid.w).zip(ln_py).map(|((k, w), l)| k * w * l).sum();
                a - cross
            })
            .collect()
    }

    fn info(&self, grid: &OutputGrid, probs: &[f64]) -> f64 {
        let ln_py = self.ln_output(probs);
        self.divergences(grid, &ln_py).iter().zip(probs).map(|(d, p)| d * p).sum()
    }
}

const INNER_BA_SWEEPS: usize = 25;

struct BaOutcome {
    nu: f64,
}

/// Multiplier making the tilted distribution `∝ exp(e_j − ν c_j)` meet the budget.
fn tilt_multiplier(e: &[f64], cost: &[f64], budget: f64) -> Result<f64> {
    let avg = |nu: f64| {
        let m = e.iter().zip(cost).map(|(a, c)| a - nu * c).fold(f64::NEG_INFINITY, f64::max);
        let (mut z, mut zc) = (0.0, 0.0);
        for (a, c) in e.iter().zip(cost) {
            let w = (a - nu * c - m).exp();
            z += w;
            zc += w * c;
        }
        zc / z - budget
    };
    let slack = 1e-12 * budget.max(1.0);
    if avg(0.0) <= slack {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while avg(hi) > slack {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::InfeasibleBudget(format!(
                "no mass point has cost within the budget {budget}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if avg(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Cost-constrained Blahut–Arimoto on fixed locations.
fn blahut(fixed: &Fixed, grid: &OutputGrid, probs: &mut [f64], budget: f64, tol: f64, max_iter: usize) -> Result<BaOutcome> {
    let mut nu = 0.0;
    for _ in 0..max_iter.max(1) {
        let ln_py = fixed.ln_output(probs);
        let d = fixed.divergences(grid, &ln_py);
        let info: f64 = d.iter().zip(probs.iter()).map(|(a, p)| a * p).sum();
        let e: Vec<f64> = probs
            .iter()
            .zip(&d)
            .map(|(p, dj)| if *p > 0.0 { p.ln() + dj } else { f64::NEG_INFINITY })
            .collect();
        nu = tilt_multiplier(&e, &fixed.cost, budget)?;
        let upper = d
            .iter()
            .zip(&fixed.cost)
            .zip(probs.iter())
            .filter(|(_, p)| **p > 0.0)
            .map(|((dj, c), _)| dj - nu * c)
            .fold(f64::NEG_INFINITY, f64::max)
            + nu * budget;
        if upper - info <= tol {
            break;
        }
        let m = e.iter().zip(&fixed.cost).map(|(a, c)| a - nu * c).fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (p, (a, c)) in probs.iter_mut().zip(e.iter().zip(&fixed.cost)) {
            *p = (a - nu * c - m).exp();
            z += *p;
        }
        probs.iter_mut().for_each(|p| *p /= z);
    }
    Ok(BaOutcome { nu })
}

fn sort_pairs(points: &mut Vec<f64>, probs: &mut Vec<f64>) {
    let mut v: Vec<(f64, f64)> = points.iter().copied().zip(probs.iter().copied()).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    *points = v.iter().map(|a| a.0).collect();
    *probs = v.iter().map(|a| a.1).collect();
}

/// Drops negligible points and merges near-duplicates. Returns true on change.
fn tidy(points: &mut Vec<f64>, probs: &mut Vec<f64>, merge_abs: f64, prune_tol: f64) -> bool {
    let before = points.len();
    sort_pairs(points, probs);
    let heaviest = probs.iter().copied().fold(0.0, f64::max);
    let keep: Vec<bool> = probs.iter().map(|&p| p >= prune_tol || p == heaviest).collect();
    let mut xs = Vec::with_capacity(before);
    let mut ps = Vec::with_capacity(before);
    for ((x, p), k) in points.iter().zip(probs.iter()).zip(keep) {
        if !k {
            continue;
        }
        match (xs.last_mut(), ps.last_mut()) {
            (Some(lx), Some(lp)) if *x - *lx < merge_abs => {
                let total: f64 = *lp + p;
                *lx = (*lx * *lp + x * p) / total;
                *lp = total;
            }
            _ => {
                xs.push(*x);
                ps.push(*p);
            }
        }
    }
    let z: f64 = ps.iter().sum();
    ps.iter_mut().for_each(|p| *p /= z);
    let changed = xs.len() != before;
    *points = xs;
    *probs = ps;
    changed
}

/// Forces mirror symmetry about 0 (pairs `±x` with equal mass).
fn symmetrize(points: &mut Vec<f64>, probs: &mut Vec<f64>) {
    sort_pairs(points, probs);
    let n = points.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let a = 0.5 * (points[j] - points[i]);
        let p = 0.5 * (probs[i] + probs[j]);
        points[i] = -a;
        points[j] = a;
        probs[i] = p;
        probs[j] = p;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= z);
}

struct Step {
    points: Vec<f64>,
    moved: f64,
}

/// Newton step on every location for `φ(x) = i(f(x);F) − ν C(x)` with the
/// probabilities held, then backtracking on the Lagrangian `I − ν Σ p C`.
#[allow(clippy::too_many_arguments)]
fn location_step(
    ev: &InfoEvaluator,
    grid: &OutputGrid,
    fixed: &Fixed,
    points: &[f64],
    probs: &[f64],
    nu: f64,
    x_scale: f64,
    sym: bool,
) -> Option<Step> {
    let ch = ev.channel();
    let kernel = ev.kernel();
    let budget = ch.effective_budget();
    let ln_py = fixed.ln_output(probs);
    let phi = |x: f64| {
        let u = ch.map.eval(x);
        let info: f64 = -grid
            .y
            .iter()
            .zip(&grid.w)
            .zip(&ln_py)
            .map(|((y, w), l)| w * kernel.pdf(y - u) * l)
            .sum::<f64>();
        info - nu * ch.cost.eval(x)
    };
    let delta = 1e-3 * x_scale;
    let trust = 0.5 * x_scale;
    let mut dir = Vec::with_capacity(points.len());
    for &x in points {
        let (fm, f0, fp) = (phi(x - delta), phi(x), phi(x + delta));
        let d1 = (fp - fm) / (2.0 * delta);
        let d2 = (fp - 2.0 * f0 + fm) / (delta * delta);
        let mut step = if d2 < 0.0 { -d1 / d2 } else { d1.signum() * trust };
        if !step.is_finite() {
            step = 0.0;
        }
        dir.push(step.clamp(-trust, trust));
    }
    let lagrangian = |xs: &[f64], f: &Fixed| {
        f.info(grid, probs) - nu * xs.iter().zip(probs).map(|(x, p)| p * ch.cost.eval(*x)).sum::<f64>()
    };
    let base = lagrangian(points, fixed);
    let mut t = 1.0;
    for _ in 0..12 {
        let mut cand: Vec<f64> = points.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
        let mut cp = probs.to_vec();
        if sym {
            symmetrize(&mut cand, &mut cp);
        }
        let ordered = cand.windows(2).all(|w| w[1] > w[0]);
        let feasible = cand.iter().any(|&x| ch.cost.eval(x) <= budget);
        if ordered && feasible {
            let trial = Fixed::new(ev, grid, &cand);
            if lagrangian(&cand, &trial) > base {
                let moved = cand.iter().zip(points).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                return Some(Step { points: cand, moved });
            }
        }
        t *= 0.5;
    }
    None
}

/// Alternates probability and location updates at a fixed number of points.
fn refine(ev: &InfoEvaluator, cfg: &SolverConfig, f: &DiscreteInput, sym: bool) -> Result<DiscreteInput> {
    let ch = ev.channel();
    let budget = ch.effective_budget();
    let x_scale = ch.map.abs_inverse(ch.noise.resolution()).max(f64::MIN_POSITIVE);
    let merge_abs = cfg.merge_eps * x_scale;
    let mut points = f.points().to_vec();
    let mut probs = f.probs().to_vec();
    if sym {
        symmetrize(&mut points, &mut probs);
    }
    let outputs = |pts: &[f64]| pts.iter().map(|&x| ch.map.eval(x)).collect::<Vec<_>>();
    let mut grid = OutputGrid::new(ev, &outputs(&points), cfg.grid_step);
    for _ in 0..cfg.location_iters {
        if !grid.covers(&outputs(&points)) {
            grid = OutputGrid::new(ev, &outputs(&points), cfg.grid_step);
        }
        let fixed = Fixed::new(ev, &grid, &points);
        // A few sweeps only: full convergence at fixed locations starves
        // freshly inserted points before they can move.
        let ba = blahut(&fixed, &grid, &mut probs, budget, cfg.ba_tol, INNER_BA_SWEEPS)?;
        if tidy(&mut points, &mut probs, merge_abs, cfg.prune_tol) {
            if sym {
                symmetrize(&mut points, &mut probs);
            }
            continue;
        }
        match location_step(ev, &grid, &fixed, &points, &probs, ba.nu, x_scale, sym) {
            Some(step) => {
                points = step.points;
                if step.moved < 1e-9 * x_scale {
                    break;
                }
            }
            None => break,
        }
    }
    if !grid.covers(&outputs(&points)) {
        grid = OutputGrid::new(ev, &outputs(&points), cfg.grid_step);
    }
    let fixed = Fixed::new(ev, &grid, &points);
    blahut(&fixed, &grid, &mut probs, budget, cfg.ba_tol, cfg.ba_max_iter)?;
    tidy(&mut points, &mut probs, merge_abs, cfg.prune_tol);
    if sym {
        symmetrize(&mut points, &mut probs);
    }
    DiscreteInput::new(points, probs)
}

fn insert_point(f: &DiscreteInput, x: f64, mass: f64, sym: bool, merge_abs: f64) -> Result<DiscreteInput> {
    let mut pairs: Vec<(f64, f64)> = f.iter().map(|(a, p)| (a, p * (1.0 - mass))).collect();
    let new: Vec<f64> = if sym {
        if x.abs() < merge_abs {
            vec![0.0]
        } else {
            vec![-x.abs(), x.abs()]
        }
    } else {
        vec![x]
    };
    let share = mass / new.len() as f64;
    for v in new {
        if pairs.iter().all(|(a, _)| (a - v).abs() >= merge_abs) {
            pairs.push((v, share));
        } else {
            // Already present: return the mass to the nearest point.
            let k = pairs
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 .0 - v).abs().total_cmp(&(b.1 .0 - v).abs()))
                .map(|(k, _)| k)
                .unwrap();
            pairs[k].1 += share;
        }
    }
    DiscreteInput::from_pairs(&pairs)
}

/// Candidate places to grow the support: the two deepest local minima of
/// the residual inside the core when they violate the tolerance, else the
/// violating grid point nearest the origin. Far-field argmins cost more than
/// the budget allows and only inflate the output grid before being pruned.
fn insertion_sites(ev: &InfoEvaluator, f: &DiscreteInput, rep: &KktReport, tol: f64, sym: bool) -> Vec<f64> {
    let ch = ev.channel();
    let x_scale = ch.map.abs_inverse(ch.noise.resolution());
    let core = ev.core_half_width(f);
    let g = &rep.grid;
    let mut minima: Vec<(f64, f64)> = (0..g.len())
        .filter(|&k| g[k].0.abs() <= core && g[k].1 < -tol)
        .filter(|&k| (k == 0 || g[k].1 <= g[k - 1].1) && (k + 1 == g.len() || g[k].1 <= g[k + 1].1))
        .map(|k| g[k])
        .collect();
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut sites: Vec<f64> = Vec::new();
    for (x, _) in minima {
        // A symmetric iterate would turn a site next to the origin into a
        // pair straddling it; grow through 0 instead.
        let x = if sym && x.abs() < 0.1 * x_scale { 0.0 } else { x };
        let same = |a: f64| if sym { (a.abs() - x.abs()).abs() } else { (a - x).abs() } < 0.1 * x_scale;
        if !sites.iter().any(|&a| same(a)) {
            sites.push(x);
        }
        if sites.len() == 2 {
            break;
        }
    }
    if sites.is_empty() {
        let far = g
            .iter()
            .filter(|p| p.1 < -tol)
            .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
            .map_or(rep.grid_argmin, |p| p.0);
        sites.push(far);
    }
    sites
}

fn better(cand: &(DiscreteInput, KktReport, f64), best: &Option<(DiscreteInput, KktReport, f64)>) -> bool {
    match best {
        None => true,
        Some(b) => match (cand.1.certified, b.1.certified) {
            (true, false) => true,
            (false, true) => false,
            _ => cand.2 > b.2,
        },
    }
}

/// Drops support points that the certificate does not need. Warm starts and
/// insertion can leave light outer points whose deletion still passes the
/// KKT check; the reported support should be one where every point matters.
fn minimize_support(
    ev: &InfoEvaluator,
    cfg: &SolverConfig,
    mut f: DiscreteInput,
    mut rep: KktReport,
    mut cap: f64,
    sym: bool,
) -> Result<(DiscreteInput, KktReport, f64)> {
    'outer: while f.len() > 1 {
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by(|&a, &b| f.probs()[a].total_cmp(&f.probs()[b]));
        for i in order {
            let plain = f.without_point(i)?;
            let plain_rep = ev.verify_kkt(&plain, &cfg.grid)?;
            if !plain_rep.certified {
                continue;
            }
            // Prefer dropping the mirror pair and re-solving, so symmetric
            // channels keep symmetric inputs.
            let mut tries = Vec::new();
            let mirror = f.len() - 1 - i;
            if sym && mirror != i {
                let pair = plain.without_point(if mirror > i { mirror - 1 } else { mirror })?;
                tries.push(refine(ev, cfg, &pair, true)?);
            }
            tries.push(refine(ev, cfg, &plain, false)?);
            tries.push(plain);
            for g in tries {
                let r = ev.verify_kkt(&g, &cfg.grid)?;
                if r.certified {
                    cap = ev.mutual_information(&g)?;
                    f = g;
                    rep = r;
                    continue 'outer;
                }
            }
        }
        break;
    }
    Ok((f, rep, cap))
}

pub(crate) fn optimize_with(ev: &InfoEvaluator, cfg: &SolverConfig, warm: Option<&DiscreteInput>) -> Result<CapacityResult> {
    cfg.validate()?;
    let ch = ev.channel();
    if !ch.map.is_injective() {
        return Err(Error::InvalidChannel(
            "the optimizer needs an injective input map; even maps are accepted by the classifier only".into(),
        ));
    }
    let budget = ch.effective_budget();
    if budget < 0.0 {
        return Err(Error::InfeasibleBudget(format!(
            "effective budget {budget} is negative after removing the cost offset"
        )));
    }
    let sym = cfg.symmetric.unwrap_or_else(|| ch.is_symmetric());
    let x_scale = ch.map.abs_inverse(ch.noise.resolution()).max(f64::MIN_POSITIVE);
    let merge_abs = cfg.merge_eps * x_scale;
    let mut notes = Vec::new();
    if let Ok(v) = crate::classify::classify_symbolic(ch) {
        match v.kind {
            crate::classify::SupportKind::Unbounded => notes.push(
                "optimal support is unbounded: finite-support lower bound, not certified-optimal".to_string(),
            ),
            crate::classify::SupportKind::Transitional => notes.push(
                "transitional cost growth: no optimality theorem covers this channel".to_string(),
            ),
            _ => {}
        }
    }

    let x0 = ch.cost.inverse(budget);
    let mut f = match warm {
        Some(w) if w.average_cost(&ch.cost) <= budget + 1e-9 => w.clone(),
        _ if x0 <= merge_abs || budget == 0.0 => DiscreteInput::point_mass(0.0),
        _ => DiscreteInput::new(vec![-x0, x0], vec![0.5, 0.5])?,
    };
    if budget == 0.0 {
        f = DiscreteInput::point_mass(0.0);
    }

    let mut best: Option<(DiscreteInput, KktReport, f64)> = None;
    let mut iterations = 0;
    let mut stall = 0;
    let mut last_cap = f64::NEG_INFINITY;
    if budget > 0.0 {
        f = refine(ev, cfg, &f, sym)?;
    }
    for _ in 0..cfg.max_outer.max(1) {
        iterations += 1;
        let rep = ev.verify_kkt(&f, &cfg.grid)?;
        let cap = ev.mutual_information(&f)?;
        let cand = (f.clone(), rep.clone(), cap);
        if better(&cand, &best) {
            best = Some(cand);
        }
        if rep.certified || budget == 0.0 {
            break;
        }
        if cap <= last_cap + 1e-10 {
            stall += 1;
            if stall >= 3 {
                break;
            }
        } else {
            stall = 0;
        }
        last_cap = last_cap.max(cap);
        // Try each candidate site and continue from the most informative.
        let mut next: Option<(DiscreteInput, f64)> = None;
        for site in insertion_sites(ev, &f, &rep, cfg.grid.kkt_tol, sym) {
            let grown = insert_point(&f, site, cfg.insert_mass, sym, merge_abs)?;
            if grown.len() > cfg.max_points {
                continue;
            }
            let refined = refine(ev, cfg, &grown, sym)?;
            let c = ev.mutual_information(&refined)?;
            if next.as_ref().is_none_or(|n| c > n.1) {
                next = Some((refined, c));
            }
        }
        match next {
            Some((g, _)) => f = g,
            None => break,
        }
    }
    let (mut input, mut kkt, mut capacity) = best.expect("at least one round runs");
    if kkt.certified && budget > 0.0 {
        (input, kkt, capacity) = minimize_support(ev, cfg, input, kkt, capacity, sym)?;
    }
    if !kkt.certified {
        notes.push(format!(
            "not certified: max support residual {:.3e}, grid minimum {:.3e} at x = {:.6}",
            kkt.max_support_residual(),
            kkt.grid_min_residual,
            kkt.grid_argmin
        ));
    }
    Ok(CapacityResult {
        budget: ch.budget,
        capacity,
        input,
        kkt,
        noise_entropy: ev.noise_entropy(),
        iterations,
        config: cfg.clone(),
        notes,
    })
}

/// Capacity and a KKT-certified (when possible) optimal discrete input.
pub fn optimize_capacity(ch: &ChannelInstance, cfg: &SolverConfig) -> Result<CapacityResult> {
    let ev = InfoEvaluator::with_rule_step(ch, &cfg.quad, cfg.rule_step)?;
    optimize_with(&ev, cfg, None)
}

/// Solves at each budget in turn, warm-starting from the previous solution.
/// Per-budget failures are returned in place and the sweep continues.
pub fn capacity_sweep(ch: &ChannelInstance, budgets: &[f64], cfg: &SolverConfig) -> Result<Vec<Result<CapacityResult>>> {
    if budgets.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("sweep budgets must be non-decreasing".into()));
    }
    let first = ch.with_budget(*budgets.first().ok_or_else(|| Error::InvalidInput("empty budget list".into()))?)?;
    let mut ev = InfoEvaluator::with_rule_step(&first, &cfg.quad, cfg.rule_step)?;
    let mut out: Vec<Result<CapacityResult>> = Vec::with_capacity(budgets.len());
    let mut warm: Option<DiscreteInput> = None;
    for (k, &a) in budgets.iter().enumerate() {
        if k > 0 && a == budgets[k - 1] {
            let again = out[k - 1].clone();
            out.push(again);
            continue;
        }
        let res = ev.set_budget(a).and_then(|_| optimize_with(&ev, cfg, warm.as_ref()));
        if let Ok(r) = &res {
            warm = Some(r.input.clone());
        }
        out.push(res);
    }
    Ok(out)
}
