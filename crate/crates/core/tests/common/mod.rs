#![allow(dead_code)]

use tailcap::{ChannelInstance, CostFunction, InputMap, NoiseSpec, StableParams, SupportKind};

pub fn noises() -> Vec<(&'static str, NoiseSpec)> {
    vec![
        ("gaussian", NoiseSpec::gaussian(0.0, 1.0).unwrap()),
        ("mixture", NoiseSpec::mixture(&[(0.5, 0.0, 1.0), (0.5, 0.0, 2.0)]).unwrap()),
        ("gg1", NoiseSpec::gen_gaussian(1.0, 1.0, 0.0).unwrap()),
        ("gg1.5", NoiseSpec::gen_gaussian(1.5, 1.0, 0.0).unwrap()),
        ("cauchy", NoiseSpec::cauchy(1.0).unwrap()),
        ("composite", NoiseSpec::composite(StableParams::new(1.5, 0.0, 1.0, 0.0).unwrap(), 0.0, 1.0).unwrap()),
    ]
}

pub fn costs() -> Vec<(&'static str, CostFunction)> {
    vec![
        ("|x|", CostFunction::Power { r: 1.0 }),
        ("x^2", CostFunction::Power { r: 2.0 }),
        ("|x|^3", CostFunction::Power { r: 3.0 }),
        ("ln^2(1+x^2)", CostFunction::LogPoly { c: 1.0, k: 2.0 }),
    ]
}

pub fn maps() -> Vec<(&'static str, InputMap)> {
    vec![("linear", InputMap::Linear { gain: 1.0 }), ("x^3", InputMap::OddPower { n: 3 })]
}

/// Verdicts worked out by hand from the tail rate of each family
/// (x² Gaussian, x^a generalized Gaussian, ln x stable) composed with the map.
pub fn expected(noise: &str, cost: &str, map: &str) -> SupportKind {
    use SupportKind::*;
    let cubic = map == "x^3";
    match noise {
        "cauchy" | "composite" => Compact,
        "gaussian" | "mixture" if cubic => Unbounded,
        "gaussian" | "mixture" => match cost {
            "x^2" => Transitional,
            "|x|^3" => Compact,
            _ => Unbounded,
        },
        "gg1" if cubic => match cost {
            "|x|^3" => Transitional,
            _ => Unbounded,
        },
        "gg1" => match cost {
            "|x|" => Transitional,
            "x^2" | "|x|^3" => Compact,
            _ => Unbounded,
        },
        "gg1.5" if cubic => Unbounded,
        "gg1.5" => match cost {
            "x^2" | "|x|^3" => Compact,
            _ => Unbounded,
        },
        _ => unreachable!("unknown noise {noise}"),
    }
}

pub fn table() -> Vec<(String, ChannelInstance, SupportKind)> {
    let mut out = Vec::new();
    for (nn, noise) in noises() {
        for (cn, cost) in costs() {
            for (mn, map) in maps() {
                let ch = ChannelInstance::new(map.clone(), cost.clone(), noise.clone(), 1.0).unwrap();
                out.push((format!("{nn} / {cn} / {mn}"), ch, expected(nn, cn, mn)));
            }
        }
    }
    out
}
