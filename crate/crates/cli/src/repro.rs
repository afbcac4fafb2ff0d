//! Preset sweeps: the Gaussian mixture (fig1), standard stable noise over
//! alpha (fig2) and stable plus Gaussian noise (fig3).
//!
//! Budgets are in dB with `A = 10^(dB/10)`. Each preset reports the
//! qualitative property its curves should show: monotone and concave for
//! the mixture, ordered in alpha for the stable families.

use tailcap::capacity::capacity_sweep;
use tailcap::{ChannelInstance, CostFunction, InputMap, NoiseSpec, StableParams};

use crate::output::{self, Series};
use crate::{Failure, Figure, Outcome, Run};

struct Curve {
    label: String,
    slug: String,
    noise: NoiseSpec,
}

struct Preset {
    name: &'static str,
    title: &'static str,
    budgets_db: &'static [f64],
    curves: Vec<Curve>,
}

fn stable(alpha: f64) -> Result<StableParams, Failure> {
    Ok(StableParams::new(alpha, 0.0, 1.0, 0.0)?)
}

fn preset(fig: Figure) -> Result<Preset, Failure> {
    Ok(match fig {
        Figure::Fig1 => Preset {
            name: "fig1",
            title: "Gaussian mixture 0.5 N(0,1) + 0.5 N(0,4)",
            budgets_db: &[-6.0, -3.0, 0.0, 3.0, 6.0, 9.0],
            curves: vec![Curve {
                label: "mixture".into(),
                slug: "mixture".into(),
                noise: NoiseSpec::mixture(&[(0.5, 0.0, 1.0), (0.5, 0.0, 2.0)])?,
            }],
        },
        Figure::Fig2 => Preset {
            name: "fig2",
            title: "Symmetric standard alpha-stable noise",
            budgets_db: &[2.5, 5.0, 7.5, 10.0, 12.5],
            curves: [1.0, 1.2, 1.5, 1.8]
                .into_iter()
                .map(|a| {
                    Ok(Curve {
                        label: format!("alpha={a}"),
                        slug: format!("alpha{a}"),
                        noise: NoiseSpec::AlphaStable(stable(a)?),
                    })
                })
                .collect::<Result<_, Failure>>()?,
        },
        Figure::Fig3 => Preset {
            name: "fig3",
            title: "Standard Gaussian plus standard alpha-stable noise",
            budgets_db: &[0.0, 2.5, 5.0, 7.27],
            curves: [1.0, 1.5]
                .into_iter()
                .map(|a| {
                    Ok(Curve {
                        label: format!("alpha={a}"),
                        slug: format!("alpha{a}"),
                        noise: NoiseSpec::composite(stable(a)?, 0.0, 1.0)?,
                    })
                })
                .collect::<Result<_, Failure>>()?,
        },
    })
}

/// Non-decreasing, with slopes that do not increase (up to `slack`).
fn concave_increasing(c: &[(f64, f64)], slack: f64) -> bool {
    let rising = c.windows(2).all(|w| w[1].1 >= w[0].1 - slack);
    let slopes: Vec<f64> = c.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    rising && slopes.windows(2).all(|s| s[1] <= s[0] + slack)
}

fn strictly_above(lower: &[(f64, f64)], upper: &[(f64, f64)]) -> bool {
    lower.len() == upper.len() && lower.iter().zip(upper).all(|(a, b)| b.1 > a.1)
}

pub fn run(run: &Run, fig: Figure) -> Outcome {
    let p = preset(fig)?;
    let budgets: Vec<f64> = p.budgets_db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
    let mut curves: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut failed = None;
    let mut uncertified = 0;
    let mut stdout = String::new();
    for c in &p.curves {
        let ch = ChannelInstance::new(InputMap::Linear { gain: 1.0 }, CostFunction::Power { r: 2.0 }, c.noise.clone(), budgets[0])?;
        let mut rows = Vec::new();
        let mut pts = Vec::new();
        for (k, r) in capacity_sweep(&ch, &budgets, &run.cfg.solver)?.into_iter().enumerate() {
            match r {
                Ok(res) => {
                    rows.push(output::result_row(&res));
                    pts.push((res.budget, res.capacity));
                    uncertified += usize::from(!res.certified());
                }
                Err(e) => {
                    eprintln!("error: {} A={}: {e}", c.label, budgets[k]);
                    failed.get_or_insert_with(|| Failure::from(e));
                }
            }
        }
        let csv = output::csv(&rows);
        stdout.push_str(&format!("# {} {}\n{csv}", p.name, c.label));
        run.artifact(&format!("{}_{}.csv", p.name, c.slug), &csv)?;
        curves.push(pts);
    }

    let slack = run.cfg.solver.grid.kkt_tol;
    let mut checks = Vec::new();
    for (c, pts) in p.curves.iter().zip(&curves) {
        let ok = if fig == Figure::Fig1 { concave_increasing(pts, slack) } else { pts.windows(2).all(|w| w[1].1 >= w[0].1 - slack) };
        checks.push((format!("{} non-decreasing{}", c.label, if fig == Figure::Fig1 { ", concave" } else { "" }), ok));
    }
    for k in 1..curves.len() {
        let name = format!("{} above {}", p.curves[k].label, p.curves[k - 1].label);
        checks.push((name, strictly_above(&curves[k - 1], &curves[k])));
    }
    for (name, ok) in &checks {
        stdout.push_str(&format!("# check {name}: {}\n", if *ok { "ok" } else { "violated" }));
    }
    print!("{stdout}");
    run.plot(&format!("{}.svg", p.name), || {
        let series: Vec<Series> =
            p.curves.iter().zip(&curves).map(|(c, pts)| Series { label: c.label.clone(), points: pts.clone() }).collect();
        output::svg_chart(p.title, "A", "capacity (nats)", &series)
    })?;
    if let Some(e) = failed {
        return Err(e);
    }
    if run.require_certified && uncertified > 0 {
        return Err(Failure::Uncertified(format!("{uncertified} preset solves are not certified")));
    }
    Ok(())
}
