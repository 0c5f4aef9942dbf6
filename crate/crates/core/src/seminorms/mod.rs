//! Locality seminorms `p_{j,r}`, `f_{j,r}` and the weighted norms built on
//! them.
//!
//! `p_Lambda(A) = ||A - Pi_{Lambda^c}(A)||` is exact through the term
//! filter. `f_Lambda(A) = inf_{B in A(Lambda)} ||A - B||` is bracketed by
//! `[p/2, p]` and solved exactly when the support is small enough.

pub mod solver;

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::dense;
use crate::algebra::Observable;
use crate::error::{Error, Result};
use crate::lattice::{Region, Site};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub enabled: bool,
    /// Largest support dimension handed to the convex solver.
    pub max_support_dim: usize,
    /// Largest number of real variables.
    pub max_vars: usize,
    /// Certified gap below which the value is reported as exact.
    pub tol: f64,
    pub max_newton: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            enabled: true,
            max_support_dim: 64,
            max_vars: 256,
            tol: 1e-7,
            max_newton: 2000,
        }
    }
}

/// Bracket for `f`, with the exact value when the solver closed the gap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FValue {
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl FValue {
    fn zero() -> Self {
        FValue {
            lower: 0.0,
            upper: 0.0,
            exact: Some(0.0),
            note: None,
        }
    }

    /// Exact value if known, else the upper end.
    pub fn best(&self) -> f64 {
        self.exact.unwrap_or(self.upper)
    }
}

/// `||A - Pi_{region^c}(A)||`.
pub fn p_region(a: &Observable, region: &Region) -> Result<f64> {
    a.outside(region).op_norm()
}

pub fn p_seminorm(a: &Observable, j: &Site, r: u64) -> Result<f64> {
    p_region(a, &a.window().ball(j, r)?)
}

/// `inf_{B in A(region)} ||A - B||`; the empty region means scalars.
pub fn f_region(a: &Observable, region: &Region, opts: &SolverOptions) -> Result<FValue> {
    let out = a.outside(region);
    if out.is_empty() {
        return Ok(FValue::zero());
    }
    let p = out.op_norm()?;
    let mut val = FValue {
        lower: p / 2.0,
        upper: p,
        exact: None,
        note: None,
    };
    if !opts.enabled {
        val.note = Some("solver disabled".into());
        return Ok(val);
    }
    let support = a.support();
    let kept: Vec<usize> = support.intersection(region).iter().collect();
    let rest: Vec<usize> = support.difference(region).iter().collect();
    let q = dense::product(&a.local_dims(&kept)).unwrap_or(usize::MAX);
    let nr = dense::product(&a.local_dims(&rest)).unwrap_or(usize::MAX);
    let hermitian = a.is_hermitian(1e-13 * a.max_coeff().max(1.0));
    let n = q.saturating_mul(nr);
    if n > opts.max_support_dim || solver::variable_count(q, hermitian) > opts.max_vars {
        val.note = Some(format!("support dimension {n} beyond solver cap; bracket only"));
        return Ok(val);
    }
    let sites: Vec<usize> = kept.iter().chain(&rest).copied().collect();
    let mut m = a.to_dense(&sites)?;
    if q == 1 && hermitian {
        // best real scalar: the midpoint of the spectrum
        let ev = dense::hermitian_eigenvalues(&m);
        let (lo, hi) = ev.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &e| (l.min(e), h.max(e)));
        let f = (hi - lo) / 2.0;
        val.lower = f;
        val.upper = f;
        val.exact = Some(f);
        return Ok(val);
    }
    let scale = dense::dense_norm(&m);
    m /= C64::new(scale, 0.0);
    if hermitian {
        m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    }
    let out = solver::solve(&m, q, nr, hermitian, 1e-2 * opts.tol, opts.max_newton);
    val.lower = val.lower.max(out.lower * scale);
    val.upper = val.upper.min(out.upper * scale);
    if val.upper - val.lower <= opts.tol * scale.max(1.0) {
        val.exact = Some(val.upper);
    } else {
        val.note = Some(format!(
            "solver stopped with gap {:.3e} after {} Newton steps",
            val.upper - val.lower,
            out.newton_steps
        ));
    }
    Ok(val)
}

pub fn f_seminorm(a: &Observable, j: &Site, r: u64, opts: &SolverOptions) -> Result<FValue> {
    f_region(a, &a.window().ball(j, r)?, opts)
}

/// Smallest `r` with `support(A) in B_j(r)`; every `p_r` past it vanishes.
pub fn support_radius(a: &Observable, j: &Site) -> Result<u64> {
    let w = a.window();
    let c = w.require(j)?;
    Ok(a.support().iter().map(|s| w.ceil_distance(c, s) + 1).max().unwrap_or(0))
}

/// `||A||_k = ||A|| + sup_r (1+r)^k p_{j,r}(A)`.
pub fn k_norm(a: &Observable, k: u32, j: &Site) -> Result<f64> {
    Ok(k_norms(a, &[k], j)?[0])
}

/// `||A||_k` for each listed k, sharing one pass over the radii.
pub fn k_norms(a: &Observable, ks: &[u32], j: &Site) -> Result<Vec<f64>> {
    let radius = support_radius(a, j)?;
    let ps = (0..=radius).map(|r| p_seminorm(a, j, r)).collect::<Result<Vec<_>>>()?;
    let norm = a.op_norm()?;
    Ok(ks
        .iter()
        .map(|&k| {
            let best = ps
                .iter()
                .enumerate()
                .fold(0.0f64, |acc, (r, p)| acc.max((1.0 + r as f64).powi(k as i32) * p));
            norm + best
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub p: f64,
    pub f_lower: f64,
    pub f_upper: f64,
    pub f_exact: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KNorms {
    /// `||A||_k`.
    pub norm: f64,
    /// `|||A|||'_k = ||A|| + sup_r (1+r)^k f_r(A)` as a bracket.
    pub triple_lower: f64,
    pub triple_upper: f64,
    /// `||A||'_k = sup_r (1+r)^k f_r(A)` as a bracket.
    pub prime_lower: f64,
    pub prime_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormProfile {
    pub center: String,
    pub op_norm: f64,
    pub values: BTreeMap<u64, ProfileEntry>,
    pub k_norms: BTreeMap<u32, KNorms>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `p_r`, the `f_r` bracket and the weighted norms for `0 <= r <= r_max`
/// (default: the support radius, past which everything vanishes).
pub fn seminorm_profile(
    a: &Observable,
    j: &Site,
    r_max: Option<u64>,
    ks: &[u32],
    opts: &SolverOptions,
) -> Result<SeminormProfile> {
    let radius = support_radius(a, j)?;
    let r_max = r_max.unwrap_or(radius);
    let mut values = BTreeMap::new();
    let mut notes = Vec::new();
    for r in 0..=r_max {
        let ball = a.window().ball(j, r)?;
        let p = p_region(a, &ball)?;
        let f = f_region(a, &ball, opts)?;
        if let Some(n) = &f.note {
            notes.push(format!("r = {r}: {n}"));
        }
        values.insert(
            r,
            ProfileEntry {
                p,
                f_lower: f.lower,
                f_upper: f.upper,
                f_exact: f.exact,
            },
        );
    }
    let op_norm = a.op_norm()?;
    let mut k_norms = BTreeMap::new();
    for &k in ks {
        let weight = |r: u64| (1.0 + r as f64).powi(k as i32);
        let fold = |g: &dyn Fn(&ProfileEntry) -> f64| {
            values
                .iter()
                .filter(|(r, _)| **r <= radius)
                .fold(0.0f64, |acc, (r, e)| acc.max(weight(*r) * g(e)))
        };
        // beyond the support radius every seminorm vanishes
        let complete = r_max >= radius;
        let p_sup = fold(&|e| e.p);
        let fl = fold(&|e| e.f_lower);
        let fu = if complete { fold(&|e| e.f_upper) } else { f64::INFINITY };
        let norm = if complete {
            op_norm + p_sup
        } else {
            return Err(Error::Domain(format!(
                "r_max = {r_max} is below the support radius {radius}; weighted norms need the full range"
            )));
        };
        k_norms.insert(
            k,
            KNorms {
                norm,
                triple_lower: op_norm + fl,
                triple_upper: op_norm + fu,
                prime_lower: fl,
                prime_upper: fu,
            },
        );
    }
    Ok(SeminormProfile {
        center: j.to_string(),
        op_norm,
        values,
        k_norms,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Window;
    use std::sync::Arc;

    fn chain(lo: i64, hi: i64) -> Arc<Window> {
        Window::chain(lo, hi).unwrap().into_shared()
    }

    fn op(w: &Arc<Window>, f: &[(i64, &str)]) -> Observable {
        let fs: Vec<(Site, &str)> = f.iter().map(|&(s, l)| (Site::from(s), l)).collect();
        Observable::term(w, &fs, C64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn p_examples() {
        let w = chain(-8, 8);
        let o = Site::from(0);
        assert_eq!(p_seminorm(&op(&w, &[(0, "Z")]), &o, 0).unwrap(), 1.0);
        assert_eq!(p_seminorm(&op(&w, &[(0, "Z")]), &o, 1).unwrap(), 0.0);
        assert!((p_seminorm(&op(&w, &[(0, "Z"), (5, "Z")]), &o, 3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f_examples() {
        let w = chain(-8, 8);
        let o = Site::from(0);
        let opts = SolverOptions::default();
        let f = f_seminorm(&op(&w, &[(0, "Z")]), &o, 0, &opts).unwrap();
        assert!((f.exact.unwrap() - 1.0).abs() < 1e-7);
        let inside = op(&w, &[(0, "X"), (1, "Y")]);
        assert_eq!(f_seminorm(&inside, &o, 3, &opts).unwrap().exact, Some(0.0));
        let zz = op(&w, &[(0, "Z"), (5, "Z")]);
        let f = f_seminorm(&zz, &o, 3, &opts).unwrap();
        assert!(f.lower >= 0.5 - 1e-12);
        assert!((f.exact.unwrap() - 1.0).abs() < 1e-7, "{f:?}");
    }

    #[test]
    fn f_solver_agrees_with_hand_solvable_case() {
        // A = Z0 + X1 restricted to site 0: best B = Z0, leaving ||X1|| = 1
        let w = chain(0, 3);
        let a = op(&w, &[(0, "Z")]).add(&op(&w, &[(1, "X")])).unwrap();
        let region: Region = [0usize].into_iter().collect();
        let f = f_region(&a, &region, &SolverOptions::default()).unwrap();
        assert!((f.exact.unwrap() - 1.0).abs() < 1e-7);
        // non-Hermitian: (1+i) Z0 X1 + i Y1 against A(site 0)
        let b = op(&w, &[(0, "Z"), (1, "X")])
            .scale(C64::new(1.0, 1.0))
            .add(&op(&w, &[(1, "Y")]).scale(C64::new(0.0, 1.0)))
            .unwrap();
        let f = f_region(&b, &region, &SolverOptions::default()).unwrap();
        assert!(f.exact.is_some(), "{f:?}");
        assert!(f.lower >= b.op_norm().unwrap() / 2.0 - 1e-9);
    }

    #[test]
    fn k_norm_examples() {
        let w = chain(-8, 8);
        let o = Site::from(0);
        for k in 0..4 {
            assert!((k_norm(&op(&w, &[(0, "Z")]), k, &o).unwrap() - 2.0).abs() < 1e-12);
            assert!((k_norm(&Observable::identity(&w), k, &o).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((k_norm(&op(&w, &[(0, "Z"), (5, "Z")]), 1, &o).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn profile_is_consistent() {
        let w = chain(-6, 6);
        let a = op(&w, &[(0, "X"), (2, "Z")]).add(&op(&w, &[(-1, "Y")])).unwrap();
        let prof = seminorm_profile(&a, &Site::from(0), None, &[0, 1, 2], &SolverOptions::default()).unwrap();
        for e in prof.values.values() {
            let f = e.f_exact.unwrap();
            assert!(f <= e.p + 1e-7 && e.p <= 2.0 * f + 1e-7);
        }
        for kn in prof.k_norms.values() {
            assert!(kn.triple_lower <= kn.norm + 1e-7);
            assert!(kn.norm <= 2.0 * kn.triple_upper + 1e-7);
        }
    }
}
