//! Observables on a window as finite sums of generalized Pauli strings.

pub mod basis;
pub mod dense;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Region, Site, Window};
use basis::LocalBasis;
use dense::CMat;

pub const PREDICATE_TOL: f64 = 1e-12;

/// Tensor product of non-identity basis elements, keyed by window index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct PauliString(Vec<(u32, u16)>);

impl PauliString {
    pub fn identity() -> Self {
        PauliString(Vec::new())
    }

    pub fn single(site: usize, k: u16) -> Self {
        if k == 0 {
            PauliString::identity()
        } else {
            PauliString(vec![(site as u32, k)])
        }
    }

    /// Sorts by site and drops identity factors. Later duplicates win.
    pub fn from_factors(factors: impl IntoIterator<Item = (usize, u16)>) -> Self {
        let map: BTreeMap<u32, u16> = factors.into_iter().map(|(s, k)| (s as u32, k)).collect();
        PauliString(map.into_iter().filter(|&(_, k)| k != 0).collect())
    }

    pub fn factors(&self) -> impl Iterator<Item = (usize, u16)> + '_ {
        self.0.iter().map(|&(s, k)| (s as usize, k))
    }

    pub fn get(&self, site: usize) -> u16 {
        self.0
            .binary_search_by_key(&(site as u32), |&(s, _)| s)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&(s, _)| s as usize)
    }

    pub fn touches(&self, region: &Region) -> bool {
        self.sites().any(|s| region.contains(s))
    }

    pub fn within(&self, region: &Region) -> bool {
        self.sites().all(|s| region.contains(s))
    }

    pub fn label(&self, w: &Window) -> String {
        if self.0.is_empty() {
            return "I".into();
        }
        self.factors()
            .map(|(s, k)| format!("{}[{}]", LocalBasis::get(w.local_dim(s)).label(k), w.site(s)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Product of two strings as a combination of strings.
pub fn string_product(w: &Window, a: &PauliString, b: &PauliString) -> Vec<(PauliString, C64)> {
    let mut partial: Vec<(Vec<(u32, u16)>, C64)> = vec![(Vec::with_capacity(a.len() + b.len()), C64::new(1.0, 0.0))];
    let (mut i, mut j) = (0, 0);
    let push_fixed = |partial: &mut Vec<(Vec<(u32, u16)>, C64)>, f: (u32, u16)| {
        for (p, _) in partial.iter_mut() {
            p.push(f);
        }
    };
    while i < a.0.len() || j < b.0.len() {
        let sa = a.0.get(i).map(|f| f.0).unwrap_or(u32::MAX);
        let sb = b.0.get(j).map(|f| f.0).unwrap_or(u32::MAX);
        if sa < sb {
            push_fixed(&mut partial, a.0[i]);
            i += 1;
        } else if sb < sa {
            push_fixed(&mut partial, b.0[j]);
            j += 1;
        } else {
            let basis = LocalBasis::get(w.local_dim(sa as usize));
            let options = basis.product(a.0[i].1, b.0[j].1);
            if options.len() == 1 {
                let (k, v) = options[0];
                for (p, c) in partial.iter_mut() {
                    if k != 0 {
                        p.push((sa, k));
                    }
                    *c *= v;
                }
            } else {
                let mut next = Vec::with_capacity(partial.len() * options.len());
                for (p, c) in &partial {
                    for &(k, v) in options {
                        let mut q = p.clone();
                        if k != 0 {
                            q.push((sa, k));
                        }
                        next.push((q, c * v));
                    }
                }
                partial = next;
            }
            i += 1;
            j += 1;
        }
    }
    partial.into_iter().map(|(p, c)| (PauliString(p), c)).collect()
}

/// Term literal used in configs and reports:
/// `{"coeff": [re, im], "string": {"0": "X", "5": "Z"}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermLiteral {
    pub coeff: [f64; 2],
    pub string: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormOptions {
    /// Largest support dimension handled by dense factorization.
    pub dense_cap: usize,
    /// Largest support dimension handled by the matrix-free Lanczos path.
    pub iterative_cap: usize,
    pub iterative_tol: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            dense_cap: 1 << 8,
            iterative_cap: 1 << 20,
            iterative_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Scalar,
    Dense,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub tolerance: f64,
    pub method: NormMethod,
}

#[derive(Clone, Debug)]
pub struct Observable {
    window: Arc<Window>,
    terms: BTreeMap<PauliString, C64>,
}

impl PartialEq for Observable {
    fn eq(&self, other: &Self) -> bool {
        same_window(&self.window, &other.window) && self.terms == other.terms
    }
}

fn same_window(a: &Arc<Window>, b: &Arc<Window>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Observable {
    pub fn zero(w: &Arc<Window>) -> Self {
        Observable {
            window: w.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(w: &Arc<Window>, c: C64) -> Self {
        Observable::zero(w).with_term(PauliString::identity(), c)
    }

    pub fn identity(w: &Arc<Window>) -> Self {
        Observable::scalar(w, C64::new(1.0, 0.0))
    }

    fn with_term(mut self, p: PauliString, c: C64) -> Self {
        self.accumulate(p, c);
        self
    }

    pub(crate) fn accumulate(&mut self, p: PauliString, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(p) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                // exact cancellation
                if *e.get() == C64::new(0.0, 0.0) {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn from_terms(w: &Arc<Window>, terms: impl IntoIterator<Item = (PauliString, C64)>) -> Result<Self> {
        let mut out = Observable::zero(w);
        for (p, c) in terms {
            for (s, k) in p.factors() {
                if s >= w.len() {
                    return Err(Error::OutsideWindow(format!("index {s}")));
                }
                let q = w.local_dim(s) * w.local_dim(s);
                if k as usize >= q {
                    return Err(Error::Domain(format!("basis index {k} out of range at site {}", w.site(s))));
                }
            }
            out.accumulate(p, c);
        }
        Ok(out)
    }

    /// Single product term, e.g. `&[(Site::from(0), "X"), (Site::from(5), "Z")]`.
    pub fn term(w: &Arc<Window>, factors: &[(Site, &str)], coeff: C64) -> Result<Self> {
        let mut fs = Vec::with_capacity(factors.len());
        for (site, label) in factors {
            let idx = w.require(site)?;
            let k = LocalBasis::get(w.local_dim(idx))
                .parse_label(label)
                .ok_or_else(|| Error::Domain(format!("unknown basis label {label:?} at site {site}")))?;
            fs.push((idx, k));
        }
        Observable::from_terms(w, [(PauliString::from_factors(fs), coeff)])
    }

    pub fn single(w: &Arc<Window>, site: &Site, label: &str) -> Result<Self> {
        Observable::term(w, &[(site.clone(), label)], C64::new(1.0, 0.0))
    }

    pub fn from_literals(w: &Arc<Window>, lits: &[TermLiteral]) -> Result<Self> {
        let mut out = Observable::zero(w);
        for lit in lits {
            let mut factors = Vec::new();
            for (key, label) in &lit.string {
                let site = Site::parse(key).ok_or_else(|| Error::Domain(format!("bad site key {key:?}")))?;
                factors.push((site, label.as_str()));
            }
            let t = Observable::term(w, &factors, C64::new(lit.coeff[0], lit.coeff[1]))?;
            out = out.add(&t)?;
        }
        Ok(out)
    }

    pub fn to_literals(&self) -> Vec<TermLiteral> {
        self.terms
            .iter()
            .map(|(p, c)| TermLiteral {
                coeff: [c.re, c.im],
                string: p
                    .factors()
                    .map(|(s, k)| {
                        (
                            self.window.site(s).to_string(),
                            LocalBasis::get(self.window.local_dim(s)).label(k),
                        )
                    })
                    .collect(),
            })
            .collect()
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, p: &PauliString) -> C64 {
        self.terms.get(p).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.norm()))
    }

    fn check(&self, other: &Observable) -> Result<()> {
        if same_window(&self.window, &other.window) {
            Ok(())
        } else {
            Err(Error::WindowMismatch)
        }
    }

    pub fn add(&self, other: &Observable) -> Result<Observable> {
        self.check(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.accumulate(p.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Observable) -> Result<Observable> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Observable {
        if c == C64::new(0.0, 0.0) {
            return Observable::zero(&self.window);
        }
        Observable {
            window: self.window.clone(),
            terms: self.terms.iter().map(|(p, v)| (p.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Observable) -> Result<Observable> {
        self.check(other)?;
        let mut out = Observable::zero(&self.window);
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                for (p, v) in string_product(&self.window, pa, pb) {
                    out.accumulate(p, ca * cb * v);
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Observable) -> Result<Observable> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Basis elements are Hermitian, so the adjoint conjugates coefficients.
    pub fn adjoint(&self) -> Observable {
        Observable {
            window: self.window.clone(),
            terms: self.terms.iter().map(|(p, c)| (p.clone(), c.conj())).collect(),
        }
    }

    /// `Pi_Lambda`: drops every term with a non-identity factor on `region`.
    pub fn partial_trace(&self, region: &Region) -> Observable {
        Observable {
            window: self.window.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| !p.touches(region))
                .map(|(p, c)| (p.clone(), *c))
                .collect(),
        }
    }

    /// Terms supported inside `region`; equals `Pi_{region^c}(A)`.
    pub fn restrict(&self, region: &Region) -> Observable {
        Observable {
            window: self.window.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.within(region))
                .map(|(p, c)| (p.clone(), *c))
                .collect(),
        }
    }

    /// `A - Pi_{region^c}(A)`: the terms leaving `region`.
    pub fn outside(&self, region: &Region) -> Observable {
        Observable {
            window: self.window.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| !p.within(region))
                .map(|(p, c)| (p.clone(), *c))
                .collect(),
        }
    }

    pub fn tracial_state(&self) -> C64 {
        self.coeff(&PauliString::identity())
    }

    pub fn support(&self) -> Region {
        self.terms.keys().flat_map(|p| p.sites()).collect()
    }

    pub fn is_traceless(&self) -> bool {
        self.tracial_state().norm() <= PREDICATE_TOL
    }

    pub fn is_skew(&self) -> bool {
        self.terms.values().all(|c| c.re.abs() <= PREDICATE_TOL)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn approx_eq(&self, other: &Observable, tol: f64) -> bool {
        match self.sub(other) {
            Ok(d) => d.max_coeff() <= tol,
            Err(_) => false,
        }
    }

    pub fn prune(&self, tol: f64) -> Observable {
        Observable {
            window: self.window.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(p, c)| (p.clone(), *c))
                .collect(),
        }
    }

    /// Relabels sites through a site map; identity factors stay implicit.
    pub fn map_sites(&self, f: impl Fn(usize) -> Result<usize>) -> Result<Observable> {
        let mut out = Observable::zero(&self.window);
        for (p, c) in &self.terms {
            let mut fs = Vec::with_capacity(p.len());
            for (s, k) in p.factors() {
                let t = f(s)?;
                if self.window.local_dim(t) != self.window.local_dim(s) {
                    return Err(Error::Domain("site map joins sites of different local dimension".into()));
                }
                fs.push((t, k));
            }
            if fs.iter().map(|f| f.0).collect::<std::collections::BTreeSet<_>>().len() != fs.len() {
                return Err(Error::Domain("site map is not injective on the support".into()));
            }
            out.accumulate(PauliString::from_factors(fs), *c);
        }
        Ok(out)
    }

    pub fn local_dims(&self, sites: &[usize]) -> Vec<usize> {
        sites.iter().map(|&s| self.window.local_dim(s)).collect()
    }

    /// Dense matrix on the listed sites (ascending window indices), which
    /// must contain the support.
    pub fn to_dense(&self, sites: &[usize]) -> Result<CMat> {
        let dims = self.local_dims(sites);
        let n = dense::product(&dims).ok_or_else(|| Error::Resource("dense dimension overflow".into()))?;
        let nq = n.checked_mul(n).ok_or_else(|| Error::Resource("dense dimension overflow".into()))?;
        let mut coeffs = vec![C64::new(0.0, 0.0); nq];
        let pos: BTreeMap<usize, usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let strides: Vec<usize> = {
            let mut st = vec![1usize; dims.len()];
            for i in (0..dims.len().saturating_sub(1)).rev() {
                st[i] = st[i + 1] * dims[i + 1] * dims[i + 1];
            }
            st
        };
        for (p, c) in &self.terms {
            let mut flat = 0;
            for (s, k) in p.factors() {
                let i = *pos
                    .get(&s)
                    .ok_or_else(|| Error::Domain("dense site list misses part of the support".into()))?;
                flat += k as usize * strides[i];
            }
            coeffs[flat] += c;
        }
        Ok(dense::coeffs_to_dense(&dims, &coeffs))
    }

    /// Pauli expansion of a dense operator on `sites`, dropping coefficients
    /// of magnitude `<= tol`.
    pub fn from_dense(w: &Arc<Window>, sites: &[usize], m: &CMat, tol: f64) -> Observable {
        let dims: Vec<usize> = sites.iter().map(|&s| w.local_dim(s)).collect();
        let coeffs = dense::dense_to_coeffs(&dims, m);
        let mut out = Observable::zero(w);
        for (flat, c) in coeffs.into_iter().enumerate() {
            if c.norm() <= tol {
                continue;
            }
            let mut rest = flat;
            let mut fs = Vec::with_capacity(sites.len());
            for (i, &d) in dims.iter().enumerate().rev() {
                let q = d * d;
                fs.push((sites[i], (rest % q) as u16));
                rest /= q;
            }
            out.accumulate(PauliString::from_factors(fs), c);
        }
        out
    }

    pub fn op_norm(&self) -> Result<f64> {
        Ok(self.op_norm_with(&NormOptions::default())?.value)
    }

    pub fn op_norm_with(&self, opts: &NormOptions) -> Result<NormResult> {
        let sites: Vec<usize> = self.support().iter().collect();
        if sites.is_empty() {
            return Ok(NormResult {
                value: self.tracial_state().norm(),
                tolerance: 0.0,
                method: NormMethod::Scalar,
            });
        }
        let dims = self.local_dims(&sites);
        let n = dense::product(&dims).unwrap_or(usize::MAX);
        if n <= opts.dense_cap {
            let m = self.to_dense(&sites)?;
            return Ok(NormResult {
                value: dense::dense_norm(&m),
                tolerance: 1e-12,
                method: NormMethod::Dense,
            });
        }
        if n > opts.iterative_cap {
            return Err(Error::Resource(format!(
                "support dimension {n} exceeds iterative cap {}",
                opts.iterative_cap
            )));
        }
        let fwd = MatrixFree::new(self, &sites);
        let hermitian = self.is_hermitian(0.0);
        let res = if hermitian {
            let mut apply = |x: &[C64], y: &mut [C64]| fwd.apply(x, y);
            dense::lanczos_max_abs(n, &mut apply, opts.iterative_tol * 1e-2, 300)
        } else {
            let adj = self.adjoint();
            let bwd = MatrixFree::new(&adj, &sites);
            let mut apply = |x: &[C64], y: &mut [C64]| {
                let (top, bottom) = x.split_at(n);
                let (yt, yb) = y.split_at_mut(n);
                fwd.apply(bottom, yt);
                bwd.apply(top, yb);
            };
            dense::lanczos_max_abs(2 * n, &mut apply, opts.iterative_tol * 1e-2, 300)
        };
        Ok(NormResult {
            value: res.value,
            tolerance: res.residual.max(opts.iterative_tol * res.value),
            method: NormMethod::Iterative,
        })
    }
}

/// Matrix-free action of an observable on vectors over its support.
struct MatrixFree {
    dims: Vec<usize>,
    terms: Vec<(C64, Vec<(usize, CMat)>)>,
}

impl MatrixFree {
    fn new(a: &Observable, sites: &[usize]) -> Self {
        let pos: BTreeMap<usize, usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let dims = a.local_dims(sites);
        let terms = a
            .terms()
            .map(|(p, c)| {
                let fs = p
                    .factors()
                    .map(|(s, k)| {
                        let b = LocalBasis::get(a.window.local_dim(s));
                        (pos[&s], b.mats[k as usize].clone())
                    })
                    .collect();
                (*c, fs)
            })
            .collect();
        MatrixFree { dims, terms }
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (c, fs) in &self.terms {
            let mut tmp = x.to_vec();
            for (axis, m) in fs {
                tmp = apply_local(&tmp, &self.dims, *axis, m);
            }
            for (yi, ti) in y.iter_mut().zip(&tmp) {
                *yi += c * ti;
            }
        }
    }
}

fn apply_local(v: &[C64], dims: &[usize], axis: usize, m: &CMat) -> Vec<C64> {
    let d = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for o in 0..outer {
        for b in 0..d {
            let src = (o * d + b) * inner;
            for a in 0..d {
                let coef = m[(a, b)];
                if coef == C64::new(0.0, 0.0) {
                    continue;
                }
                let dst = (o * d + a) * inner;
                for t in 0..inner {
                    out[dst + t] += coef * v[src + t];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: i64) -> Arc<Window> {
        Window::chain(0, n - 1).unwrap().into_shared()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn op(w: &Arc<Window>, f: &[(i64, &str)], coeff: C64) -> Observable {
        let fs: Vec<(Site, &str)> = f.iter().map(|&(s, l)| (Site::from(s), l)).collect();
        Observable::term(w, &fs, coeff).unwrap()
    }

    #[test]
    fn product_examples() {
        let w = chain(3);
        let x0 = op(&w, &[(0, "X")], c(1.0, 0.0));
        let z0 = op(&w, &[(0, "Z")], c(1.0, 0.0));
        let x1 = op(&w, &[(1, "X")], c(1.0, 0.0));
        assert_eq!(x0.mul(&z0).unwrap(), op(&w, &[(0, "Y")], c(0.0, -1.0)));
        assert_eq!(x0.mul(&Observable::identity(&w)).unwrap(), x0);
        assert_eq!(x0.mul(&x1).unwrap(), op(&w, &[(0, "X"), (1, "X")], c(1.0, 0.0)));
    }

    #[test]
    fn adjoint_examples() {
        let w = chain(2);
        let ix = op(&w, &[(0, "X")], c(0.0, 1.0));
        assert_eq!(ix.adjoint(), op(&w, &[(0, "X")], c(0.0, -1.0)));
        assert_eq!(ix.adjoint().adjoint(), ix);
        let a = op(&w, &[(0, "X")], c(1.0, 0.0)).add(&op(&w, &[(0, "Y")], c(0.0, 1.0))).unwrap();
        let want = op(&w, &[(0, "X")], c(1.0, 0.0)).add(&op(&w, &[(0, "Y")], c(0.0, -1.0))).unwrap();
        assert_eq!(a.adjoint(), want);
    }

    #[test]
    fn norm_examples() {
        let w = chain(2);
        let z0 = op(&w, &[(0, "Z")], c(1.0, 0.0));
        let x0 = op(&w, &[(0, "X")], c(1.0, 0.0));
        assert!((z0.op_norm().unwrap() - 1.0).abs() < 1e-14);
        assert!((x0.add(&z0).unwrap().op_norm().unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(Observable::identity(&w).op_norm().unwrap(), 1.0);
    }

    #[test]
    fn partial_trace_examples() {
        let w = chain(2);
        let z0 = op(&w, &[(0, "Z")], c(1.0, 0.0));
        let s0: Region = [0].into_iter().collect();
        let s1: Region = [1].into_iter().collect();
        assert!(z0.partial_trace(&s0).is_empty());
        assert_eq!(z0.partial_trace(&s1), z0);
        let a = op(&w, &[(0, "Z"), (1, "Z")], c(1.0, 0.0)).add(&op(&w, &[(1, "X")], c(1.0, 0.0))).unwrap();
        assert_eq!(a.partial_trace(&s0), op(&w, &[(1, "X")], c(1.0, 0.0)));
    }

    #[test]
    fn tracial_state_examples() {
        let w = chain(2);
        assert_eq!(Observable::identity(&w).tracial_state(), c(1.0, 0.0));
        assert_eq!(op(&w, &[(0, "Z")], c(1.0, 0.0)).tracial_state(), c(0.0, 0.0));
        let a = Observable::scalar(&w, c(3.0, 0.0)).add(&op(&w, &[(0, "X"), (1, "X")], c(2.0, 0.0))).unwrap();
        assert_eq!(a.tracial_state(), c(3.0, 0.0));
    }

    #[test]
    fn commutator_examples() {
        let w = chain(2);
        let x0 = op(&w, &[(0, "X")], c(1.0, 0.0));
        let z0 = op(&w, &[(0, "Z")], c(1.0, 0.0));
        let z1 = op(&w, &[(1, "Z")], c(1.0, 0.0));
        let k = x0.commutator(&z0).unwrap();
        assert_eq!(k, op(&w, &[(0, "Y")], c(0.0, -2.0)));
        assert!((k.op_norm().unwrap() - 2.0).abs() < 1e-14);
        assert!(x0.commutator(&z1).unwrap().is_empty());
        assert!(x0.commutator(&x0).unwrap().is_empty());
    }

    #[test]
    fn predicates() {
        let w = Window::chain(0, 9).unwrap().into_shared();
        let zz = op(&w, &[(0, "Z"), (5, "Z")], c(1.0, 0.0));
        assert_eq!(zz.support().iter().collect::<Vec<_>>(), vec![0, 5]);
        assert!(op(&w, &[(0, "Z")], c(1.0, 0.0)).is_traceless());
        assert!(op(&w, &[(0, "Z")], c(0.0, 1.0)).is_skew());
        assert!(!op(&w, &[(0, "Z")], c(1.0, 0.0)).is_skew());
    }

    #[test]
    fn window_mismatch_is_an_error() {
        let a = Observable::identity(&chain(2));
        let b = Observable::identity(&chain(3));
        assert_eq!(a.mul(&b), Err(Error::WindowMismatch));
    }

    #[test]
    fn literals_roundtrip() {
        let w = Window::chain(-3, 3).unwrap().into_shared();
        let a = op(&w, &[(-2, "X"), (1, "Y")], c(0.5, -1.0)).add(&Observable::scalar(&w, c(2.0, 0.0))).unwrap();
        let lits = a.to_literals();
        assert_eq!(Observable::from_literals(&w, &lits).unwrap(), a);
    }

    #[test]
    fn dense_roundtrip_and_iterative_norm() {
        let w = chain(8);
        let mut a = Observable::zero(&w);
        for i in 0..7 {
            a = a.add(&op(&w, &[(i, "X"), (i + 1, "X")], c(1.0, 0.0))).unwrap();
            a = a.add(&op(&w, &[(i, "Z")], c(0.7, 0.0))).unwrap();
        }
        let small = NormOptions {
            dense_cap: 16,
            ..NormOptions::default()
        };
        let it = a.op_norm_with(&small).unwrap();
        assert_eq!(it.method, NormMethod::Iterative);
        let dense = a.op_norm().unwrap();
        assert!((it.value - dense).abs() < 1e-8 * dense, "{} vs {dense}", it.value);

        let sites: Vec<usize> = (0..4).collect();
        let b = op(&w, &[(0, "X"), (3, "Y")], c(0.3, 0.2)).add(&op(&w, &[(1, "Z")], c(1.0, 0.0))).unwrap();
        let m = b.to_dense(&sites).unwrap();
        assert!(Observable::from_dense(&w, &sites, &m, 1e-14).approx_eq(&b, 1e-14));
    }

    #[test]
    fn qutrit_products_are_consistent_with_dense() {
        let w = Window::chain(0, 1).unwrap().with_local_dim(3).unwrap().into_shared();
        let a = op(&w, &[(0, "g1"), (1, "g3")], c(1.0, 0.5)).add(&op(&w, &[(0, "g8")], c(0.2, 0.0))).unwrap();
        let b = op(&w, &[(0, "g2")], c(1.0, 0.0)).add(&op(&w, &[(1, "g5"), (0, "g4")], c(0.0, 1.0))).unwrap();
        let sites = [0, 1];
        let ab = a.mul(&b).unwrap().to_dense(&sites).unwrap();
        let want = a.to_dense(&sites).unwrap() * b.to_dense(&sites).unwrap();
        assert!((ab - want).norm() < 1e-12);
    }
}
