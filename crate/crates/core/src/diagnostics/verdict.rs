//! ALP and (k)-ALP verdicts on sampled tails.
//!
//! A tail with an analytic descriptor is judged on the descriptor. Without
//! one, the trend of `(1+r)^(k+d-1) f(r)` over the last half of the samples
//! is fitted in log-log scale and labelled as sampled evidence.

use serde::{Deserialize, Serialize};

use crate::sequences::{seq_norm, NormStatus, Seq, SeqNorm, TailDescriptor};

use super::scan::ScanReport;
use super::CERT_TOL;

/// Log-log slope separating a flat product from a decaying one.
pub const SLOPE_DELTA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Vanishing,
    Decaying,
    Flat,
    Growing,
    Insufficient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    AnalyticTail,
    SampledTrend,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KVerdict {
    pub k: u32,
    /// `k + d - 1`.
    pub exponent: u32,
    pub sup: SeqNorm,
    pub trend: Trend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    pub basis: Basis,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub s: u64,
    pub r: u64,
    pub h: f64,
    pub bound: f64,
}

/// `H(s, r) <= s^(d-1) f(r)` on scanned cells with `r >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCheck {
    pub checked: usize,
    pub certified_pass: usize,
    /// Cells whose certified lower bound already exceeds the bound.
    pub certified_fail: Vec<Violation>,
    /// Cells whose upper bound exceeds the bound but lower bound does not.
    pub unverifiable: Vec<Violation>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlpVerdict {
    pub d: usize,
    pub per_k: Vec<KVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointwise: Option<PointwiseCheck>,
}

impl AlpVerdict {
    pub fn passes(&self, k: u32) -> Option<bool> {
        self.per_k.iter().find(|v| v.k == k).map(|v| v.passed)
    }
}

fn sampled_trend(f: &Seq, e: u32) -> (Trend, Option<f64>) {
    let n = f.len();
    if n < 4 {
        return (Trend::Insufficient, None);
    }
    let pts: Vec<(f64, f64)> = (n / 2..n)
        .map(|r| {
            let x = (1.0 + r as f64).ln();
            (x, f.values[r] * (1.0 + r as f64).powi(e as i32))
        })
        .collect();
    if pts.iter().all(|&(_, v)| v == 0.0) {
        return (Trend::Vanishing, None);
    }
    if pts.last().map(|p| p.1) == Some(0.0) {
        // support ended inside the window
        return (Trend::Vanishing, None);
    }
    let logs: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 > 0.0).map(|&(x, v)| (x, v.ln())).collect();
    if logs.len() < 2 {
        return (Trend::Insufficient, None);
    }
    let m = logs.len() as f64;
    let (sx, sy) = logs.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let trend = if slope < -SLOPE_DELTA {
        Trend::Decaying
    } else if slope <= SLOPE_DELTA {
        Trend::Flat
    } else {
        Trend::Growing
    };
    (trend, Some(slope))
}

fn analytic_trend(t: &TailDescriptor, e: u32) -> Trend {
    let ef = e as f64;
    match *t {
        TailDescriptor::Zero => Trend::Vanishing,
        TailDescriptor::Geometric { c, .. } | TailDescriptor::Polynomial { c, .. } if c == 0.0 => Trend::Vanishing,
        TailDescriptor::Geometric { q, .. } => {
            if q < 1.0 {
                Trend::Decaying
            } else if q == 1.0 && e == 0 {
                Trend::Flat
            } else {
                Trend::Growing
            }
        }
        TailDescriptor::Polynomial { exponent, .. } => {
            if exponent > ef {
                Trend::Decaying
            } else if exponent == ef {
                Trend::Flat
            } else {
                Trend::Growing
            }
        }
    }
}

/// Per-k verdicts for `sup_r (1+r)^(k+d-1) f(r) < inf` with the product
/// tending to 0, plus the pointwise `H` check when scan data is given.
pub fn alp_verdict(f: &Seq, d: usize, ks: &[u32], scan: Option<&ScanReport>) -> AlpVerdict {
    let per_k = ks
        .iter()
        .map(|&k| {
            let e = k + d as u32 - 1;
            let sup = seq_norm(f, e);
            let (sampled, slope) = sampled_trend(f, e);
            let (trend, basis) = match &f.tail {
                Some(t) => (analytic_trend(t, e), Basis::AnalyticTail),
                None => (sampled, Basis::SampledTrend),
            };
            let finite = sup.status != NormStatus::Divergent && sup.value.is_finite();
            KVerdict {
                k,
                exponent: e,
                sup,
                trend,
                slope,
                basis,
                passed: finite && matches!(trend, Trend::Vanishing | Trend::Decaying),
            }
        })
        .collect();
    AlpVerdict {
        d,
        per_k,
        pointwise: scan.map(|s| pointwise(f, d, s)),
    }
}

fn pointwise(f: &Seq, d: usize, scan: &ScanReport) -> PointwiseCheck {
    let mut out = PointwiseCheck {
        checked: 0,
        certified_pass: 0,
        certified_fail: Vec::new(),
        unverifiable: Vec::new(),
        passed: true,
    };
    for c in scan.table.iter().filter(|c| c.r > 0) {
        out.checked += 1;
        let Some(fr) = f.at(c.r) else {
            out.unverifiable.push(Violation {
                s: c.s,
                r: c.r,
                h: c.lower,
                bound: f64::NAN,
            });
            continue;
        };
        let bound = (c.s as f64).powi(d as i32 - 1) * fr;
        if c.upper.is_some_and(|u| u <= bound + CERT_TOL) {
            out.certified_pass += 1;
        } else if c.lower > bound + CERT_TOL {
            out.certified_fail.push(Violation {
                s: c.s,
                r: c.r,
                h: c.lower,
                bound,
            });
        } else {
            out.unverifiable.push(Violation {
                s: c.s,
                r: c.r,
                h: c.upper.unwrap_or(c.lower),
                bound,
            });
        }
    }
    out.passed = out.certified_fail.is_empty() && out.unverifiable.is_empty();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_passes_every_k() {
        let f = Seq::from_fn(40, |r| 0.5f64.powi(r as i32)).unwrap();
        let v = alp_verdict(&f, 1, &(0..=6).collect::<Vec<_>>(), None);
        assert!(v.per_k.iter().all(|k| k.passed && k.basis == Basis::SampledTrend));
        let g = f.with_tail(TailDescriptor::Geometric { c: 1.0, q: 0.5 }).unwrap();
        let v = alp_verdict(&g, 1, &(0..=6).collect::<Vec<_>>(), None);
        assert!(v.per_k.iter().all(|k| k.passed && k.basis == Basis::AnalyticTail));
    }

    #[test]
    fn constant_fails_every_k() {
        let f = Seq::from_fn(40, |_| 0.5).unwrap();
        let v = alp_verdict(&f, 1, &[0, 1, 2, 3], None);
        assert!(v.per_k.iter().all(|k| !k.passed));
        assert_eq!(v.per_k[0].trend, Trend::Flat);
        assert_eq!(v.per_k[1].trend, Trend::Growing);
    }

    #[test]
    fn polynomial_boundary() {
        let f = Seq::from_fn(60, |r| (1.0 + r as f64).powi(-5)).unwrap();
        let v = alp_verdict(&f, 1, &[3, 5], None);
        assert_eq!(v.passes(3), Some(true));
        assert_eq!(v.passes(5), Some(false));
        assert_eq!(v.per_k[1].trend, Trend::Flat);
        let t = f.with_tail(TailDescriptor::Polynomial { c: 1.0, exponent: 5.0 }).unwrap();
        let v = alp_verdict(&t, 1, &[3, 4, 5, 6], None);
        assert_eq!(
            v.per_k.iter().map(|k| k.passed).collect::<Vec<_>>(),
            vec![true, true, false, false]
        );
    }

    #[test]
    fn finite_support_vanishes() {
        let f = Seq::new(vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let v = alp_verdict(&f, 1, &[0, 8], None);
        assert!(v.per_k.iter().all(|k| k.passed && k.trend == Trend::Vanishing));
    }
}
