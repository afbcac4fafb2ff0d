//! Output densities, mutual information, KKT verification and the
//! discrete-input capacity optimizer.

mod info;
mod io;
mod kkt;
mod solver;

use crate::channel::{ChannelInstance, CostFunction};
use crate::error::{Error, Result};

pub use info::{
    marginal_info_density, mutual_information, output_density, InfoEvaluator, DEFAULT_RULE_STEP,
};
pub use io::{parse_distribution, read_distribution, render_distribution, write_distribution, DistributionFile};
pub use kkt::{estimate_multiplier, kkt_residual, verify_kkt, GridSpec};
pub use solver::{capacity_sweep, optimize_capacity, SolverConfig};

/// Finitely supported input distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInput {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteInput {
    /// Points must be finite and strictly increasing; probabilities
    /// non-negative and summing to 1 within 1e−9 (they are renormalized).
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::InvalidInput("need one probability per mass point".into()));
        }
        if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("mass points must be finite and strictly increasing".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput("probabilities must be non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, expected 1")));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(Self { points, probs })
    }

    /// Builds a distribution from unsorted pairs, merging duplicates.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = pairs.to_vec();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<f64> = Vec::with_capacity(v.len());
        let mut probs: Vec<f64> = Vec::with_capacity(v.len());
        for (x, p) in v {
            if points.last() == Some(&x) {
                *probs.last_mut().unwrap() += p;
            } else {
                points.push(x);
                probs.push(p);
            }
        }
        Self::new(points, probs)
    }

    /// Unit mass at `x`.
    pub fn point_mass(x: f64) -> Self {
        Self { points: vec![x], probs: vec![1.0] }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn average_cost(&self, cost: &CostFunction) -> f64 {
        self.iter().map(|(x, p)| p * cost.eval(x)).sum()
    }

    /// Checks the average-cost constraint of `ch` (with 1e−9 slack).
    pub fn check_feasible(&self, ch: &ChannelInstance) -> Result<()> {
        let avg = self.average_cost(&ch.cost);
        let budget = ch.effective_budget();
        if avg > budget + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "average cost {avg} exceeds the budget {budget}"
            )));
        }
        Ok(())
    }

    /// Copy without the mass point at `index`, renormalized.
    pub fn without_point(&self, index: usize) -> Result<Self> {
        if self.len() < 2 || index >= self.len() {
            return Err(Error::InvalidInput("cannot remove the only mass point".into()));
        }
        let mut points = self.points.clone();
        let mut probs = self.probs.clone();
        points.remove(index);
        let removed = probs.remove(index);
        let rest = 1.0 - removed;
        if rest <= 0.0 {
            return Err(Error::InvalidInput("remaining points carry no mass".into()));
        }
        Ok(Self { points, probs: probs.into_iter().map(|p| p / rest).collect() })
    }
}

/// Outcome of a KKT verification.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    pub nu: f64,
    pub residual_at_support: Vec<f64>,
    pub grid_min_residual: f64,
    pub grid_argmin: f64,
    pub certified: bool,
    pub grid_extent: f64,
    /// `(x, s(x))` on the verification grid, in increasing `x`.
    pub grid: Vec<(f64, f64)>,
}

impl KktReport {
    pub fn max_support_residual(&self) -> f64 {
        self.residual_at_support.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub budget: f64,
    /// Mutual information of `input`, in nats per channel use.
    pub capacity: f64,
    pub input: DiscreteInput,
    pub kkt: KktReport,
    pub noise_entropy: f64,
    pub iterations: usize,
    pub config: SolverConfig,
    /// Caveats attached to the result (e.g. unbounded optimal support).
    pub notes: Vec<String>,
}

impl CapacityResult {
    pub fn certified(&self) -> bool {
        self.kkt.certified
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_validation() {
        assert!(DiscreteInput::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteInput::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteInput::new(vec![0.0], vec![-0.0]).is_err());
        let f = DiscreteInput::from_pairs(&[(1.0, 0.25), (-1.0, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(f.points(), &[-1.0, 1.0]);
        assert_eq!(f.probs(), &[0.5, 0.5]);
        let g = f.without_point(0).unwrap();
        assert_eq!(g.probs(), &[1.0]);
    }
}
