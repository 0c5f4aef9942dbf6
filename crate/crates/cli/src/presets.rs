//! Named example configurations.

use serde_json::{json, Value};

use crate::config::RunConfig;

pub const NAMES: [&str; 4] = ["flip-2j", "flip-signed-square", "shift-j", "heisenberg-chain"];

fn range(lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi).collect()
}

fn sites(lo: i64, hi: i64) -> Vec<Vec<i64>> {
    (lo..=hi).map(|x| vec![x]).collect()
}

fn term(coeff: f64, ops: &[(i64, &str)]) -> Value {
    let string: serde_json::Map<String, Value> = ops.iter().map(|(s, l)| (s.to_string(), json!(l))).collect();
    json!({ "coeff": [coeff, 0.0], "string": string })
}

/// Scan, verdict, LR and sum-bound sections shared by the finite-range
/// permutation presets.
fn finite_range(automorphism: Value) -> Value {
    json!({
        "window": { "extent": [[-40, 40]] },
        "automorphism": automorphism,
        "observables": { "Zc": [term(1.0, &[(0, "Z")])] },
        "profile": { "center": [0], "r_max": 4, "ks": [0, 1, 2] },
        "scan": {
            "centers": sites(-2, 2),
            "s": range(1, 5),
            "r": range(0, 8),
            "expect": { "zero_from_r": 1 }
        },
        "verdict": { "ks": range(0, 6), "expect": { "pass": range(0, 6) } },
        "lr": {
            "F": { "kind": "polynomial", "nu": 3.0 },
            "fit": true,
            "single_site": { "sites": sites(-6, 6), "a": "X", "b": "Z" },
            "bridge": true
        },
        "sum_bound": {
            "F": { "kind": "polynomial", "nu": 3.0 },
            "centers": [[0], [7]],
            "s": [1, 2, 4],
            "r": [0, 1, 3, 6]
        }
    })
}

fn value(name: &str) -> Option<Value> {
    Some(match name {
        "flip-2j" => finite_range(json!({ "kind": "flip", "zeta": { "poly": [0, 2] } })),
        "shift-j" => finite_range(json!({ "kind": "shift", "xi": { "poly": [0, 1] } })),
        "flip-signed-square" => json!({
            "window": { "extent": [[-110, 110]] },
            "automorphism": { "kind": "flip", "zeta": { "poly_signed_square": 2 } },
            "scan": {
                "centers": [[-50], [-32], [32], [50]],
                "s": range(1, 4),
                "r": range(0, 10),
                "expect": { "lower_at_least": 0.5 }
            },
            "verdict": { "ks": range(0, 4), "expect": { "fail": range(0, 4) } },
            "frechet": {
                "ks": range(0, 3),
                "samples": 100,
                "support": [-3, 3],
                "center": [0]
            }
        }),
        "heisenberg-chain" => {
            let mut h: Vec<Value> = (0..9).map(|i| term(1.0, &[(i, "X"), (i + 1, "X")])).collect();
            h.extend((0..10).map(|i| term(1.0, &[(i, "Z")])));
            // the chain is reflection symmetric, so site 4 stands for site 5 too
            let points: Vec<Value> = (1..=3u64)
                .flat_map(|s| (0..=5 - s).map(move |r| json!({ "center": [4], "s": s, "r": r })))
                .collect();
            json!({
                "window": { "extent": [[0, 9]] },
                "automorphism": { "kind": "heisenberg", "H": h, "t": 0.5 },
                "scan": { "points": points, "random_witnesses": 4 },
                "lr": {
                    "F": { "kind": "expweight", "a": 1.0, "nu": 3.0 },
                    "fit": true,
                    "single_site": { "sites": sites(3, 6), "a": "X", "b": "Z" },
                    "bridge": true
                }
            })
        }
        _ => return None,
    })
}

pub fn preset(name: &str) -> Option<RunConfig> {
    value(name).map(|v| serde_json::from_value(v).expect("preset parses"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::prepare;

    #[test]
    fn every_preset_validates() {
        for name in NAMES {
            let cfg = preset(name).unwrap();
            if let Err(e) = prepare(cfg) {
                panic!("{name}: {e:?}");
            }
        }
        assert!(preset("nope").is_none());
    }
}
