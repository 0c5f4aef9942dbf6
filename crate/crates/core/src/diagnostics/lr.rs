//! Lieb-Robinson commutator checks and the single-site commutator kernel
//! `c(k, j) = 1/8 sum_{P,Q} ||[alpha(P_k), Q_j]||` over qubit Paulis.
//!
//! For qubits, `X - Pi_j(X) = 1/4 sum_Q (X - Q X Q)` and telescoping over
//! sites give, for `A in A(Lambda)` and `B in A(Sigma)`,
//! `||[alpha(A), B]|| <= 2 ||A|| ||B|| sum_{k in Lambda} sum_{j in Sigma} c(k, j)`
//! and `inf_{B in A(Gamma)} ||alpha(A) - B|| <= ||A|| sum_{k in Lambda} sum_{j notin Gamma} c(k, j)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::dense::{self, CMat};
use crate::algebra::{Observable, PauliString};
use crate::automorphisms::{Automorphism, DenseImage};
use crate::error::{Error, Result};
use crate::lattice::{Region, Window};
use crate::sequences::ReproducingFn;
use crate::C64;

use super::CERT_TOL;

/// Dense factorization cap for the norms computed here.
pub(crate) const DENSE_CAP: usize = 256;
/// Relative Lanczos tolerance for the norms computed here.
pub(crate) const LANCZOS_TOL: f64 = 1e-10;

/// `alpha(E_k)` at every site of `region`, for every non-identity `k`.
pub(crate) fn single_site_images(alpha: &Automorphism, region: &Region) -> Result<BTreeMap<(usize, u16), DenseImage>> {
    let w = alpha.window();
    let keys: Vec<(usize, u16)> = region
        .iter()
        .flat_map(|x| {
            let q = w.local_dim(x);
            (1..(q * q) as u16).map(move |k| (x, k))
        })
        .collect();
    let images: Vec<Result<DenseImage>> = keys
        .par_iter()
        .map(|&(x, k)| {
            let a = Observable::from_terms(w, [(PauliString::single(x, k), C64::new(1.0, 0.0))])?;
            alpha.apply_dense(&a)
        })
        .collect();
    keys.into_iter().zip(images).map(|(key, img)| Ok((key, img?))).collect()
}

/// Single-qubit `V` with `V Q V^* = Z`.
fn rotation(q: u16) -> [[C64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re * s, im * s);
    match q {
        1 => [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]],
        2 => [[c(1.0, 0.0), c(0.0, -1.0)], [c(1.0, 0.0), c(0.0, 1.0)]],
        _ => {
            let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
            [[o, z], [z, o]]
        }
    }
}

/// `V M V^*` with `V` acting on the qubit whose index stride is `stride`.
fn rotate_site(m: &CMat, stride: usize, v: &[[C64; 2]; 2]) -> CMat {
    let n = m.nrows();
    let mut left = m.clone();
    for i0 in (0..n).filter(|i| (i / stride) % 2 == 0) {
        let i1 = i0 + stride;
        for c in 0..n {
            let (a, b) = (m[(i0, c)], m[(i1, c)]);
            left[(i0, c)] = v[0][0] * a + v[0][1] * b;
            left[(i1, c)] = v[1][0] * a + v[1][1] * b;
        }
    }
    let mut out = left.clone();
    for c0 in (0..n).filter(|i| (i / stride) % 2 == 0) {
        let c1 = c0 + stride;
        for r in 0..n {
            let (a, b) = (left[(r, c0)], left[(r, c1)]);
            out[(r, c0)] = a * v[0][0].conj() + b * v[0][1].conj();
            out[(r, c1)] = a * v[1][0].conj() + b * v[1][1].conj();
        }
    }
    out
}

/// Certified-side upper estimate of `||[M, Q_site]||` for a qubit Pauli `q`:
/// after rotating `Q` to `Z` the commutator is `2` times the larger
/// off-diagonal block.
pub(crate) fn site_commutator_norm(img: &DenseImage, site: usize, q: u16) -> Result<f64> {
    let Some(pos) = img.position(site) else {
        return Ok(0.0);
    };
    if img.dims.iter().any(|&d| d != 2) {
        return Err(Error::Domain("commutator kernel is implemented for qubits only".into()));
    }
    let stride: usize = img.dims[pos + 1..].iter().product();
    let m = rotate_site(&img.m, stride, &rotation(q));
    let zeros: Vec<usize> = (0..m.nrows()).filter(|i| (i / stride) % 2 == 0).collect();
    let h = zeros.len();
    let block = |b0: usize, b1: usize| CMat::from_fn(h, h, |a, b| m[(zeros[a] + b0, zeros[b] + b1)]);
    let upper = |x: &CMat| {
        let r = dense::norm_bracket(x, DENSE_CAP, LANCZOS_TOL);
        r.value + r.residual + 1e-13 * r.value
    };
    let m01 = upper(&block(0, stride));
    let scale = img.m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let m10 = if dense::is_hermitian(&img.m, 1e-13 * scale.max(1e-300)) {
        m01
    } else {
        upper(&block(stride, 0))
    };
    Ok(2.0 * m01.max(m10))
}

/// Sparse table of `c(k, j)` for rows `k` in a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorKernel {
    pub rows: Vec<usize>,
    /// Non-zero entries keyed by `(k, j)`.
    pub entries: BTreeMap<(usize, usize), f64>,
}

impl CommutatorKernel {
    pub fn compute(alpha: &Automorphism, rows: &Region) -> Result<Self> {
        let images = single_site_images(alpha, rows)?;
        Self::from_images(rows, &images)
    }

    pub(crate) fn from_images(rows: &Region, images: &BTreeMap<(usize, u16), DenseImage>) -> Result<Self> {
        let jobs: Vec<(usize, usize)> = images
            .iter()
            .filter(|((k, _), _)| rows.contains(*k))
            .flat_map(|((k, p), img)| img.sites.iter().map(move |&j| (*k, j * 4 + *p as usize)))
            .collect();
        for &(k, _) in &jobs {
            if images.get(&(k, 1)).map(|img| img.dims.iter().any(|&d| d != 2)).unwrap_or(true) {
                return Err(Error::Domain("commutator kernel is implemented for qubits only".into()));
            }
        }
        let values: Vec<Result<f64>> = jobs
            .par_iter()
            .map(|&(k, jp)| {
                let (j, p) = (jp / 4, (jp % 4) as u16);
                let img = &images[&(k, p)];
                let mut acc = 0.0;
                for q in 1..=3u16 {
                    acc += site_commutator_norm(img, j, q)?;
                }
                Ok(acc)
            })
            .collect();
        let mut entries = BTreeMap::new();
        for ((k, jp), v) in jobs.into_iter().zip(values) {
            let v = v?;
            if v > 0.0 {
                *entries.entry((k, jp / 4)).or_insert(0.0) += v / 8.0;
            }
        }
        Ok(CommutatorKernel {
            rows: rows.iter().collect(),
            entries,
        })
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.entries.get(&(k, j)).copied().unwrap_or(0.0)
    }

    /// `sum_{k in lambda} sum_{j in sigma} c(k, j)`.
    pub fn region_sum(&self, lambda: &Region, sigma: &Region) -> Result<f64> {
        let mut acc = 0.0;
        for k in lambda.iter() {
            if self.rows.binary_search(&k).is_err() {
                return Err(Error::Domain(format!("kernel row {k} was not computed")));
            }
            acc += self
                .entries
                .range((k, 0)..(k + 1, 0))
                .filter(|((_, j), _)| sigma.contains(*j))
                .map(|(_, v)| v)
                .sum::<f64>();
        }
        Ok(acc)
    }

    /// Certified `H` upper bound for `A in A(inner)` against `A(outer)`.
    pub fn h_upper(&self, w: &Window, inner: &Region, outer: &Region) -> Result<f64> {
        Ok(self.region_sum(inner, &outer.complement(w))?.min(1.0))
    }
}

/// Rescales `base` so that `F(d(k, j)) >= 2 c(k, j)` for every kernel entry.
pub fn fit_scale(kernel: &CommutatorKernel, base: &ReproducingFn, w: &Window) -> Result<ReproducingFn> {
    base.validate()?;
    let mut factor = 0.0f64;
    for (&(k, j), &c) in &kernel.entries {
        let f = base.eval(w.distance(k, j), w.dim());
        if f <= 0.0 {
            return Err(Error::Domain(format!("F vanishes at distance {} where c > 0", w.distance(k, j))));
        }
        factor = factor.max(2.0 * c / f);
    }
    if factor == 0.0 {
        factor = 1.0;
    }
    Ok(base.scaled(factor * (1.0 + 1e-12)))
}

/// One sampled instance `(Lambda, Sigma, A, B)`.
#[derive(Clone, Debug)]
pub struct LrPair {
    pub lambda: Region,
    pub sigma: Region,
    pub a: Observable,
    pub b: Observable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrRow {
    pub index: usize,
    pub commutator: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub sum_f: f64,
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrReport {
    pub prefactor: f64,
    pub rows: Vec<LrRow>,
    pub max_ratio: f64,
    /// Every sampled ratio is at most 1 (evidence on samples, not a proof).
    pub within_bound: bool,
}

/// `||[alpha(A), B]||` through dense images.
pub fn commutator_norm(alpha: &Automorphism, a: &Observable, b: &Observable) -> Result<f64> {
    let img = alpha.apply_dense(a)?;
    let mut sites = img.sites.clone();
    sites.extend(b.support().iter().filter(|s| !img.sites.contains(s)));
    let dims = a.local_dims(&sites);
    let big = if sites.len() > img.sites.len() {
        let positions: Vec<usize> = (0..img.sites.len()).collect();
        dense::embed(&img.m, &dims, &positions)
    } else {
        img.m
    };
    let bm = b.to_dense(&sites)?;
    let ab = dense::matmul_sparse_right(&big, &bm);
    let ba = dense::matmul_sparse_right(&big.adjoint(), &bm.adjoint()).adjoint();
    let r = dense::norm_bracket(&(ab - ba), DENSE_CAP, LANCZOS_TOL);
    Ok(r.value)
}

/// Ratios `||[alpha(A), B]|| / (C ||A|| ||B|| sum_{i,j} F(d(i, j)))`.
pub fn lr_check(alpha: &Automorphism, f: &ReproducingFn, prefactor: f64, pairs: &[LrPair]) -> Result<LrReport> {
    f.validate()?;
    if !(prefactor > 0.0) {
        return Err(Error::Domain("prefactor must be positive".into()));
    }
    let w = alpha.window().clone();
    for (i, p) in pairs.iter().enumerate() {
        if !p.a.support().is_subset(&p.lambda) || !p.b.support().is_subset(&p.sigma) {
            return Err(Error::Domain(format!("pair {i}: observable support leaves its region")));
        }
    }
    let rows: Vec<Result<LrRow>> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            let norm_a = p.a.op_norm()?;
            let norm_b = p.b.op_norm()?;
            let sum_f: f64 = p
                .lambda
                .iter()
                .flat_map(|i| p.sigma.iter().map(move |j| (i, j)))
                .map(|(i, j)| f.eval(w.distance(i, j), w.dim()))
                .sum();
            let mut row = LrRow {
                index,
                commutator: 0.0,
                norm_a,
                norm_b,
                sum_f,
                ratio: None,
                note: None,
            };
            if norm_a == 0.0 || norm_b == 0.0 {
                row.note = Some("zero-norm input skipped".into());
                return Ok(row);
            }
            row.commutator = commutator_norm(alpha, &p.a, &p.b)?;
            let denom = prefactor * norm_a * norm_b * sum_f;
            row.ratio = Some(if row.commutator <= CERT_TOL * norm_a * norm_b {
                0.0
            } else if denom == 0.0 {
                f64::INFINITY
            } else {
                row.commutator / denom
            });
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let max_ratio = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    Ok(LrReport {
        prefactor,
        within_bound: max_ratio <= 1.0 + CERT_TOL,
        max_ratio,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TermLiteral;
    use crate::automorphisms::{AutSpec, LabelRule};
    use crate::lattice::Site;
    use std::sync::Arc;

    fn chain(lo: i64, hi: i64) -> Arc<Window> {
        Window::chain(lo, hi).unwrap().into_shared()
    }

    fn heisenberg(w: &Arc<Window>, t: f64) -> Automorphism {
        let (lo, hi) = w.extent()[0];
        let mut terms = Vec::new();
        for x in lo..hi {
            terms.push(Observable::term(w, &[(Site::from(x), "X"), (Site::from(x + 1), "X")], C64::new(1.0, 0.0)).unwrap());
        }
        for x in lo..=hi {
            terms.push(Observable::term(w, &[(Site::from(x), "Z")], C64::new(0.5, 0.0)).unwrap());
        }
        let h = terms.iter().skip(1).fold(terms[0].clone(), |a, b| a.add(b).unwrap());
        Automorphism::heisenberg(&h, t).unwrap()
    }

    fn direct_commutator(img: &DenseImage, site: usize, q: u16) -> f64 {
        let pos = img.position(site).unwrap();
        let basis = crate::algebra::basis::LocalBasis::get(2);
        let qm = dense::embed(&basis.mats[q as usize], &img.dims, &[pos]);
        dense::dense_norm(&(&img.m * &qm - &qm * &img.m))
    }

    #[test]
    fn rotated_block_norm_matches_direct_commutator() {
        let w = chain(0, 3);
        let alpha = heisenberg(&w, 0.3);
        let images = single_site_images(&alpha, &w.all_sites()).unwrap();
        for ((_, _), img) in images.iter().take(5) {
            for &site in &img.sites {
                for q in 1..=3 {
                    let fast = site_commutator_norm(img, site, q).unwrap();
                    let slow = direct_commutator(img, site, q);
                    assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
                }
            }
        }
    }

    #[test]
    fn identity_kernel_is_diagonal() {
        let w = chain(-3, 3);
        let alpha = Automorphism::identity(&w);
        let k = CommutatorKernel::compute(&alpha, &w.all_sites()).unwrap();
        // ||[P, Q]|| = 2 for the six anticommuting ordered pairs
        for (&(a, b), &v) in &k.entries {
            assert_eq!(a, b);
            assert!((v - 1.5).abs() < 1e-12);
        }
        let ball = w.ball(&Site::from(0), 2).unwrap();
        assert_eq!(k.h_upper(&w, &ball, &w.ball(&Site::from(0), 3).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn lr_examples() {
        let w = chain(-6, 6);
        let id = Automorphism::identity(&w);
        let a = Observable::single(&w, &Site::from(0), "X").unwrap();
        let b = Observable::single(&w, &Site::from(5), "Z").unwrap();
        let region = |x: i64| Region::from_sites(&w, &[Site::from(x)]).unwrap();
        let pair = LrPair {
            lambda: region(0),
            sigma: region(5),
            a: a.clone(),
            b: b.clone(),
        };
        let f = ReproducingFn::exp_weight(1.0, 2.0);
        assert_eq!(lr_check(&id, &f, 1.0, &[pair.clone()]).unwrap().max_ratio, 0.0);
        let flip = Automorphism::build(&AutSpec::Flip { zeta: LabelRule::Poly(vec![0, 2]) }, &w).unwrap();
        assert_eq!(lr_check(&flip, &f, 1.0, &[pair]).unwrap().max_ratio, 0.0);
        let zero = LrPair {
            lambda: region(0),
            sigma: region(5),
            a: Observable::zero(&w),
            b,
        };
        let rep = lr_check(&id, &f, 1.0, &[zero]).unwrap();
        assert!(rep.rows[0].note.is_some() && rep.rows[0].ratio.is_none());
    }

    #[test]
    fn heisenberg_ratio_grows_with_time_and_kernel_certifies() {
        let w = chain(0, 5);
        let site = |x: i64| Region::from_sites(&w, &[Site::from(x)]).unwrap();
        let f = ReproducingFn::exp_weight(1.0, 2.0);
        let mut last = 0.0;
        for t in [0.05, 0.1, 0.2, 0.4] {
            let alpha = heisenberg(&w, t);
            let pair = LrPair {
                lambda: site(2),
                sigma: site(3),
                a: Observable::single(&w, &Site::from(2), "Z").unwrap(),
                b: Observable::single(&w, &Site::from(3), "X").unwrap(),
            };
            let rep = lr_check(&alpha, &f, 1.0, &[pair.clone()]).unwrap();
            assert!(rep.max_ratio.is_finite() && rep.max_ratio > last);
            last = rep.max_ratio;
            let kernel = CommutatorKernel::compute(&alpha, &w.all_sites()).unwrap();
            let fitted = fit_scale(&kernel, &f, &w).unwrap();
            let rep = lr_check(&alpha, &fitted, 1.0, &[pair]).unwrap();
            assert!(rep.within_bound, "fitted F violated at t = {t}: {}", rep.max_ratio);
        }
    }

    #[test]
    fn spec_literal_heisenberg_builds() {
        let w = chain(0, 2);
        let lit: Vec<TermLiteral> = serde_json::from_str(r#"[{"coeff":[1,0],"string":{"0":"Z"}}]"#).unwrap();
        let spec = AutSpec::Heisenberg { h: lit, t: 0.2 };
        let alpha = Automorphism::build(&spec, &w).unwrap();
        let k = CommutatorKernel::compute(&alpha, &w.all_sites()).unwrap();
        assert!(k.get(0, 0) > 0.0 && k.get(0, 1) == 0.0);
    }
}
