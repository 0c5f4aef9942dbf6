//! Automorphisms on windows: generalized flips and shifts (site
//! permutations), the flip flow `sigma^t`, Heisenberg dynamics, composition
//! and inversion.
//!
//! Boundary policy is strict: a site whose image leaves the window makes the
//! map undefined there, and applying it to an observable touching that site
//! is a truncation error.

pub mod label;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::dense::{self, CMat};
use crate::algebra::{Observable, PauliString, TermLiteral};
use crate::error::{Error, Result};
use crate::lattice::{Region, Window};

pub use label::{LabelFunction, LabelRule};

/// Largest support dimension of a Heisenberg generator.
pub const HEISENBERG_MAX_DIM: usize = 2048;

/// Declarative description, as read from configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AutSpec {
    Identity,
    Flip {
        zeta: LabelRule,
    },
    Shift {
        xi: LabelRule,
    },
    FlipFlow {
        zeta: LabelRule,
        t: f64,
    },
    Heisenberg {
        #[serde(rename = "H")]
        h: Vec<TermLiteral>,
        t: f64,
    },
    /// `of[0] o of[1] o ...`: the last entry acts first.
    Compose {
        of: Vec<AutSpec>,
    },
    Inverse {
        of: Box<AutSpec>,
    },
}

/// Partial site permutation of a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SitePerm {
    fwd: Vec<Option<usize>>,
    inv: Vec<Option<usize>>,
}

impl SitePerm {
    pub fn identity(n: usize) -> Self {
        let id: Vec<Option<usize>> = (0..n).map(Some).collect();
        SitePerm { fwd: id.clone(), inv: id }
    }

    /// Lifts maps on the first axis; sites off the axis stay fixed.
    fn from_axis_maps(
        w: &Window,
        fwd: impl Fn(i64) -> Result<i64>,
        inv: impl Fn(i64) -> Result<i64>,
    ) -> Result<Self> {
        let lift = |f: &dyn Fn(i64) -> Result<i64>| -> Result<Vec<Option<usize>>> {
            (0..w.len())
                .map(|s| {
                    let c = w.coords(s);
                    if c[1..].iter().any(|&x| x != 0) {
                        return Ok(Some(s));
                    }
                    let mut t = c.to_vec();
                    t[0] = f(c[0])?;
                    Ok(w.index_of_coords(&t))
                })
                .collect()
        };
        Ok(SitePerm {
            fwd: lift(&fwd)?,
            inv: lift(&inv)?,
        })
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn image(&self, s: usize) -> Option<usize> {
        self.fwd[s]
    }

    pub fn preimage(&self, s: usize) -> Option<usize> {
        self.inv[s]
    }

    pub fn inverse(&self) -> SitePerm {
        SitePerm {
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
        }
    }

    /// `self o first`.
    pub fn after(&self, first: &SitePerm) -> SitePerm {
        let chain = |a: &[Option<usize>], b: &[Option<usize>]| a.iter().map(|x| x.and_then(|s| b[s])).collect();
        SitePerm {
            fwd: chain(&first.fwd, &self.fwd),
            inv: chain(&self.inv, &first.inv),
        }
    }

    pub fn image_region(&self, w: &Window, region: &Region) -> Result<Region> {
        region
            .iter()
            .map(|s| {
                self.fwd[s]
                    .ok_or_else(|| Error::Truncation(format!("image of site {} leaves the window", w.site(s))))
            })
            .collect()
    }

    /// `max ceil d(x, pi(x))` over sites where the map is defined.
    pub fn displacement(&self, w: &Window) -> u64 {
        self.fwd
            .iter()
            .enumerate()
            .filter_map(|(s, t)| t.map(|t| w.ceil_distance(s, t)))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Partner {
    Fixed,
    Pair(usize),
    Outside,
}

#[derive(Debug)]
struct FlowData {
    partner: Vec<Partner>,
}

/// Conjugation by `exp(i t H_p)` on the coefficient space of a pair.
type PairSuperop = Vec<Vec<Vec<(u16, u16, C64)>>>;

fn flow_superop(n: usize, t: f64) -> PairSuperop {
    let d = n * n;
    let phase = C64::from_polar(1.0, PI * t);
    let half = C64::new(0.5, 0.0);
    let mut u = CMat::from_element(d, d, C64::new(0.0, 0.0));
    for a in 0..n {
        for b in 0..n {
            let i = a * n + b;
            let sw = b * n + a;
            // P+ = (1 + S)/2, P- = (1 - S)/2
            u[(i, i)] += half * (C64::new(1.0, 0.0) + phase);
            u[(sw, i)] += half * (C64::new(1.0, 0.0) - phase);
        }
    }
    let ud = u.adjoint();
    let q = d;
    let mut out = vec![vec![Vec::new(); q]; q];
    for k1 in 0..q {
        for k2 in 0..q {
            let mut coeffs = vec![C64::new(0.0, 0.0); q * q];
            coeffs[k1 * q + k2] = C64::new(1.0, 0.0);
            let m = dense::coeffs_to_dense(&[n, n], &coeffs);
            let img = &u * m * &ud;
            for (flat, c) in dense::dense_to_coeffs(&[n, n], &img).into_iter().enumerate() {
                let c = C64::new(snap(c.re), snap(c.im));
                if c != C64::new(0.0, 0.0) {
                    out[k1][k2].push(((flat / q) as u16, (flat % q) as u16, c));
                }
            }
        }
    }
    out
}

fn snap(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}

/// Spectral data of a Heisenberg generator on its support.
#[derive(Debug)]
struct HeisCore {
    h: Observable,
    sites: Vec<usize>,
    eig: OnceLock<std::result::Result<(Vec<f64>, CMat), Error>>,
}

impl HeisCore {
    fn new(h: Observable) -> Result<Self> {
        if !h.is_hermitian(1e-12) {
            return Err(Error::Domain("Heisenberg generator must be Hermitian".into()));
        }
        let sites: Vec<usize> = h.support().iter().collect();
        let n = dense::product(&h.local_dims(&sites)).unwrap_or(usize::MAX);
        if n > HEISENBERG_MAX_DIM {
            return Err(Error::Resource(format!(
                "generator support dimension {n} exceeds the cap {HEISENBERG_MAX_DIM}"
            )));
        }
        Ok(HeisCore {
            h,
            sites,
            eig: OnceLock::new(),
        })
    }

    fn eig(&self) -> Result<&(Vec<f64>, CMat)> {
        self.eig
            .get_or_init(|| {
                let m = self.h.to_dense(&self.sites)?;
                let n = m.nrows();
                if m.iter().all(|z| z.im == 0.0) {
                    let real = DMatrix::<f64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re));
                    let e = SymmetricEigen::new(real);
                    Ok((e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|x| C64::new(x, 0.0))))
                } else {
                    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
                    let e = SymmetricEigen::new(h);
                    Ok((e.eigenvalues.iter().copied().collect(), e.eigenvectors))
                }
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn unitary(&self, t: f64) -> Result<CMat> {
        let (vals, vecs) = self.eig()?;
        let mut w = vecs.clone();
        for (j, &l) in vals.iter().enumerate() {
            let ph = C64::from_polar(1.0, t * l);
            w.column_mut(j).iter_mut().for_each(|x| *x *= ph);
        }
        Ok(dense::matmul(&w, &vecs.adjoint()))
    }
}

#[derive(Clone, Debug)]
enum Node {
    Perm(Arc<SitePerm>),
    Flow {
        data: Arc<FlowData>,
        t: f64,
    },
    Heis {
        core: Arc<HeisCore>,
        t: f64,
        u: Arc<OnceLock<std::result::Result<CMat, Error>>>,
    },
    /// Applied last to first.
    Seq(Vec<Node>),
}

impl Node {
    fn inverse(&self) -> Node {
        match self {
            Node::Perm(p) => Node::Perm(Arc::new(p.inverse())),
            Node::Flow { data, t } => Node::Flow {
                data: data.clone(),
                t: -t,
            },
            Node::Heis { core, t, .. } => Node::Heis {
                core: core.clone(),
                t: -t,
                u: Arc::new(OnceLock::new()),
            },
            Node::Seq(v) => Node::Seq(v.iter().rev().map(Node::inverse).collect()),
        }
    }

    fn site_map(&self, n: usize) -> Option<SitePerm> {
        match self {
            Node::Perm(p) => Some((**p).clone()),
            Node::Seq(v) => v
                .iter()
                .rev()
                .try_fold(SitePerm::identity(n), |acc, node| Some(node.site_map(n)?.after(&acc))),
            _ => None,
        }
    }

    fn apply(&self, a: &Observable) -> Result<Observable> {
        match self {
            Node::Perm(p) => {
                let w = a.window().clone();
                a.map_sites(|s| {
                    p.image(s)
                        .ok_or_else(|| Error::Truncation(format!("image of site {} leaves the window", w.site(s))))
                })
            }
            Node::Flow { data, t } => apply_flow(data, *t, a),
            Node::Heis { core, t, u } => {
                let u = heis_unitary(core, *t, u)?;
                apply_heisenberg(core, &u, a)
            }
            Node::Seq(v) => v.iter().rev().try_fold(a.clone(), |acc, node| node.apply(&acc)),
        }
    }
}

fn heis_unitary(core: &HeisCore, t: f64, cache: &OnceLock<std::result::Result<CMat, Error>>) -> Result<CMat> {
    cache.get_or_init(|| core.unitary(t)).clone()
}

fn apply_flow(data: &FlowData, t: f64, a: &Observable) -> Result<Observable> {
    let w = a.window().clone();
    let mut pairs = std::collections::BTreeSet::new();
    for s in a.support().iter() {
        match data.partner[s] {
            Partner::Fixed => {}
            Partner::Pair(p) => {
                pairs.insert((s.min(p), s.max(p)));
            }
            Partner::Outside => {
                return Err(Error::Truncation(format!(
                    "flip partner of site {} lies outside the window",
                    w.site(s)
                )))
            }
        }
    }
    let mut cur = a.clone();
    let mut cache: BTreeMap<usize, PairSuperop> = BTreeMap::new();
    for (x, y) in pairs {
        let n = w.local_dim(x);
        if w.local_dim(y) != n {
            return Err(Error::Domain("flip pairs sites of different local dimension".into()));
        }
        let sup = cache.entry(n).or_insert_with(|| flow_superop(n, t));
        let mut next = Observable::zero(&w);
        for (p, c) in cur.terms() {
            let (kx, ky) = (p.get(x), p.get(y));
            let rest: Vec<(usize, u16)> = p.factors().filter(|&(s, _)| s != x && s != y).collect();
            for &(kx2, ky2, v) in &sup[kx as usize][ky as usize] {
                let fs = rest.iter().copied().chain([(x, kx2), (y, ky2)]);
                next.accumulate(PauliString::from_factors(fs), c * v);
            }
        }
        cur = next;
    }
    Ok(cur)
}

fn apply_heisenberg(core: &HeisCore, u: &CMat, a: &Observable) -> Result<Observable> {
    let w = a.window().clone();
    let hs: Region = core.sites.iter().copied().collect();
    if core.sites.is_empty() || a.support().intersection(&hs).is_empty() {
        return Ok(a.clone());
    }
    let mut groups: BTreeMap<PauliString, Observable> = BTreeMap::new();
    for (p, c) in a.terms() {
        let rest = PauliString::from_factors(p.factors().filter(|&(s, _)| !hs.contains(s)));
        let local = PauliString::from_factors(p.factors().filter(|&(s, _)| hs.contains(s)));
        groups.entry(rest).or_insert_with(|| Observable::zero(&w)).accumulate(local, *c);
    }
    let ud = u.adjoint();
    let mut out = Observable::zero(&w);
    for (rest, local) in groups {
        let m = local.to_dense(&core.sites)?;
        let img = dense::matmul(&dense::matmul(u, &m), &ud);
        let scale: f64 = local.terms().map(|(_, c)| c.norm()).sum();
        let evolved = Observable::from_dense(&w, &core.sites, &img, 1e-14 * scale);
        for (lp, lc) in evolved.terms() {
            out.accumulate(PauliString::from_factors(lp.factors().chain(rest.factors())), *lc);
        }
    }
    Ok(out)
}

/// Operator given densely on an ordered list of sites.
#[derive(Clone, Debug)]
pub struct DenseImage {
    pub sites: Vec<usize>,
    pub dims: Vec<usize>,
    pub m: CMat,
}

impl DenseImage {
    pub fn position(&self, site: usize) -> Option<usize> {
        self.sites.iter().position(|&s| s == site)
    }
}

/// Constants of the signed-square flip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipConstants {
    pub n_star: i64,
    pub c_zeta: f64,
    pub m_zeta: f64,
}

impl FlipConstants {
    /// `r_n = 2 n^2`.
    pub fn r_n(&self, n: i64) -> u64 {
        (2 * n * n) as u64
    }
}

#[derive(Clone, Debug)]
pub struct Automorphism {
    window: Arc<Window>,
    spec: AutSpec,
    node: Node,
}

fn axis_range(w: &Window) -> (i64, i64) {
    w.extent()[0]
}

impl Automorphism {
    pub fn build(spec: &AutSpec, w: &Arc<Window>) -> Result<Self> {
        let node = Self::build_node(spec, w)?;
        Ok(Automorphism {
            window: w.clone(),
            spec: spec.clone(),
            node,
        })
    }

    fn build_node(spec: &AutSpec, w: &Arc<Window>) -> Result<Node> {
        let (lo, hi) = axis_range(w);
        Ok(match spec {
            AutSpec::Identity => Node::Seq(Vec::new()),
            AutSpec::Flip { zeta } => Node::Perm(Arc::new(flip_perm(w, &LabelFunction::new(zeta.clone(), lo, hi, 2)?)?)),
            AutSpec::Shift { xi } => {
                let f = LabelFunction::new(xi.clone(), lo, hi, 1)?;
                let fwd = |x: i64| -> Result<i64> {
                    match f.index_of(x)? {
                        Some(j) => f.eval(j + 1),
                        None => Ok(x),
                    }
                };
                let inv = |x: i64| -> Result<i64> {
                    match f.index_of(x)? {
                        Some(j) => f.eval(j - 1),
                        None => Ok(x),
                    }
                };
                Node::Perm(Arc::new(SitePerm::from_axis_maps(w, fwd, inv)?))
            }
            AutSpec::FlipFlow { zeta, t } => {
                let perm = flip_perm(w, &LabelFunction::new(zeta.clone(), lo, hi, 2)?)?;
                let partner = (0..w.len())
                    .map(|s| match perm.image(s) {
                        None => Partner::Outside,
                        Some(p) if p == s => Partner::Fixed,
                        Some(p) => Partner::Pair(p),
                    })
                    .collect();
                Node::Flow {
                    data: Arc::new(FlowData { partner }),
                    t: *t,
                }
            }
            AutSpec::Heisenberg { h, t } => {
                let h = Observable::from_literals(w, h)?;
                Node::Heis {
                    core: Arc::new(HeisCore::new(h)?),
                    t: *t,
                    u: Arc::new(OnceLock::new()),
                }
            }
            AutSpec::Compose { of } => Node::Seq(of.iter().map(|s| Self::build_node(s, w)).collect::<Result<_>>()?),
            AutSpec::Inverse { of } => Self::build_node(of, w)?.inverse(),
        })
    }

    pub fn identity(w: &Arc<Window>) -> Self {
        Automorphism {
            window: w.clone(),
            spec: AutSpec::Identity,
            node: Node::Seq(Vec::new()),
        }
    }

    pub fn flip(w: &Arc<Window>, zeta: LabelRule) -> Result<Self> {
        Self::build(&AutSpec::Flip { zeta }, w)
    }

    pub fn shift(w: &Arc<Window>, xi: LabelRule) -> Result<Self> {
        Self::build(&AutSpec::Shift { xi }, w)
    }

    pub fn flip_flow(w: &Arc<Window>, zeta: LabelRule, t: f64) -> Result<Self> {
        Self::build(&AutSpec::FlipFlow { zeta, t }, w)
    }

    pub fn heisenberg(h: &Observable, t: f64) -> Result<Self> {
        Self::build(
            &AutSpec::Heisenberg {
                h: h.to_literals(),
                t,
            },
            h.window(),
        )
    }

    pub fn spec(&self) -> &AutSpec {
        &self.spec
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn apply(&self, a: &Observable) -> Result<Observable> {
        if **a.window() != *self.window {
            return Err(Error::WindowMismatch);
        }
        self.node.apply(a)
    }

    /// `self o other`.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        if *other.window != *self.window {
            return Err(Error::WindowMismatch);
        }
        Ok(Automorphism {
            window: self.window.clone(),
            spec: AutSpec::Compose {
                of: vec![self.spec.clone(), other.spec.clone()],
            },
            node: Node::Seq(vec![self.node.clone(), other.node.clone()]),
        })
    }

    pub fn inverse(&self) -> Automorphism {
        Automorphism {
            window: self.window.clone(),
            spec: AutSpec::Inverse {
                of: Box::new(self.spec.clone()),
            },
            node: self.node.inverse(),
        }
    }

    /// The underlying site permutation for trees built from flips, shifts
    /// and the identity.
    pub fn site_map(&self) -> Option<SitePerm> {
        self.node.site_map(self.window.len())
    }

    pub fn is_permutation(&self) -> bool {
        self.site_map().is_some()
    }

    /// The generator support when this is a single Heisenberg evolution.
    pub fn heisenberg_sites(&self) -> Option<&[usize]> {
        match &self.node {
            Node::Heis { core, .. } => Some(&core.sites),
            _ => None,
        }
    }

    /// `||sum_p H_p||` over the flow pairs meeting `support(a)`.
    pub fn flow_generator_norm(&self, a: &Observable) -> Option<f64> {
        match &self.node {
            Node::Flow { data, .. } => {
                let pairs: std::collections::BTreeSet<(usize, usize)> = a
                    .support()
                    .iter()
                    .filter_map(|s| match data.partner[s] {
                        Partner::Pair(p) => Some((s.min(p), s.max(p))),
                        _ => None,
                    })
                    .collect();
                // commuting projections: the top eigenvalue adds up
                Some(PI * pairs.len() as f64)
            }
            _ => None,
        }
    }

    /// Dense image `alpha(a)` on an explicit site list. A single Heisenberg
    /// node conjugates block by block; everything else goes through
    /// [`Automorphism::apply`].
    pub fn apply_dense(&self, a: &Observable) -> Result<DenseImage> {
        if let Node::Heis { core, t, u } = &self.node {
            let hs: Region = core.sites.iter().copied().collect();
            let rest: Vec<usize> = a.support().difference(&hs).iter().collect();
            let sites: Vec<usize> = rest.iter().chain(&core.sites).copied().collect();
            let dims = a.local_dims(&sites);
            let m = a.to_dense(&sites)?;
            if core.sites.is_empty() {
                return Ok(DenseImage { sites, dims, m });
            }
            let u = heis_unitary(core, *t, u)?;
            let ud = u.adjoint();
            let nh = u.nrows();
            let nr = m.nrows() / nh;
            let mut out = m.clone();
            for r1 in 0..nr {
                for r2 in 0..nr {
                    let b = m.view((r1 * nh, r2 * nh), (nh, nh)).into_owned();
                    if b.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                        continue;
                    }
                    let img = dense::matmul(&dense::matmul_sparse_right(&u, &b), &ud);
                    out.view_mut((r1 * nh, r2 * nh), (nh, nh)).copy_from(&img);
                }
            }
            return Ok(DenseImage { sites, dims, m: out });
        }
        let img = self.apply(a)?;
        let sites: Vec<usize> = img.support().iter().collect();
        Ok(DenseImage {
            dims: img.local_dims(&sites),
            m: img.to_dense(&sites)?,
            sites,
        })
    }
}

fn flip_perm(w: &Window, f: &LabelFunction) -> Result<SitePerm> {
    let map = |x: i64| -> Result<i64> {
        let j = f.floor_index(x)?;
        let a = f.eval(j)?;
        let b = f.eval(j + 1)? - 1;
        Ok(if x == a {
            b
        } else if x == b {
            a
        } else {
            x
        })
    };
    SitePerm::from_axis_maps(w, map, map)
}

/// The flip with `zeta(j) = 2 sgn(j) j^2` and its constants.
pub fn quadratic_flip(w: &Arc<Window>) -> Result<(Automorphism, FlipConstants)> {
    let (lo, hi) = axis_range(w);
    if lo > -8 || hi < 7 {
        return Err(Error::Domain(
            "window must contain [-8, 7] to hold the pairs around the origin".into(),
        ));
    }
    let a = Automorphism::flip(w, LabelRule::PolySignedSquare(2))?;
    Ok((
        a,
        FlipConstants {
            n_star: 1,
            c_zeta: 3.0,
            m_zeta: 4.0,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;

    fn chain(lo: i64, hi: i64) -> Arc<Window> {
        Window::chain(lo, hi).unwrap().into_shared()
    }

    fn op(w: &Arc<Window>, f: &[(i64, &str)], c: C64) -> Observable {
        let fs: Vec<(Site, &str)> = f.iter().map(|&(s, l)| (Site::from(s), l)).collect();
        Observable::term(w, &fs, c).unwrap()
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn flip_examples() {
        let w = chain(-10, 10);
        let f = Automorphism::flip(&w, LabelRule::Poly(vec![0, 2])).unwrap();
        assert_eq!(f.apply(&op(&w, &[(0, "X")], one())).unwrap(), op(&w, &[(1, "X")], one()));
        let a = op(&w, &[(-3, "Y"), (4, "Z")], one());
        assert_eq!(f.apply(&f.apply(&a).unwrap()).unwrap(), a);
        assert_eq!(f.inverse().site_map(), f.site_map());
    }

    #[test]
    fn quadratic_flip_pairs() {
        let w = chain(-20, 20);
        let (q, consts) = quadratic_flip(&w).unwrap();
        assert_eq!(q.apply(&op(&w, &[(2, "X")], one())).unwrap(), op(&w, &[(7, "X")], one()));
        assert_eq!(q.apply(&op(&w, &[(-8, "Y")], one())).unwrap(), op(&w, &[(-3, "Y")], one()));
        assert_eq!(consts.r_n(3), 18);
        let a = op(&w, &[(5, "Z"), (9, "X")], one());
        assert_eq!(q.apply(&q.apply(&a).unwrap()).unwrap(), a);
        assert!(quadratic_flip(&chain(-5, 5)).is_err());
    }

    #[test]
    fn strict_boundary() {
        let w = chain(0, 8);
        // pairs (2j, 2j+1) for 2j >= 0 all fit; the shift x -> x + 1 does not
        let s = Automorphism::shift(&w, LabelRule::Poly(vec![0, 1])).unwrap();
        assert!(matches!(s.apply(&op(&w, &[(8, "X")], one())), Err(Error::Truncation(_))));
        assert_eq!(s.apply(&op(&w, &[(3, "X")], one())).unwrap(), op(&w, &[(4, "X")], one()));
        let inv = s.inverse();
        assert!(matches!(inv.apply(&op(&w, &[(0, "X")], one())), Err(Error::Truncation(_))));
        let flip3 = Automorphism::flip(&chain(0, 4), LabelRule::Poly(vec![-1, 3])).unwrap();
        // pairs (3j-1, 3j+1): 1 pairs with -1 outside, 0 and 3 are fixed
        let w4 = flip3.window().clone();
        assert!(matches!(flip3.apply(&op(&w4, &[(1, "X")], one())), Err(Error::Truncation(_))));
        assert_eq!(flip3.apply(&op(&w4, &[(0, "X")], one())).unwrap(), op(&w4, &[(0, "X")], one()));
        assert_eq!(flip3.apply(&op(&w4, &[(2, "X")], one())).unwrap(), op(&w4, &[(4, "X")], one()));
    }

    #[test]
    fn shift_moves_label_sites() {
        let w = chain(-10, 10);
        let s = Automorphism::shift(&w, LabelRule::Poly(vec![0, 3])).unwrap();
        assert_eq!(s.apply(&op(&w, &[(3, "X")], one())).unwrap(), op(&w, &[(6, "X")], one()));
        assert_eq!(s.apply(&op(&w, &[(4, "X")], one())).unwrap(), op(&w, &[(4, "X")], one()));
        let a = op(&w, &[(0, "X"), (-3, "Z"), (2, "Y")], one());
        assert_eq!(s.inverse().apply(&s.apply(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn flow_endpoints() {
        let w = chain(-6, 6);
        let zeta = LabelRule::Poly(vec![0, 2]);
        let a = op(&w, &[(0, "X"), (3, "Z")], one()).add(&op(&w, &[(2, "Y")], C64::new(0.5, 0.0))).unwrap();
        let id = Automorphism::flip_flow(&w, zeta.clone(), 0.0).unwrap();
        assert!(id.apply(&a).unwrap().approx_eq(&a, 1e-12));
        let one_flow = Automorphism::flip_flow(&w, zeta.clone(), 1.0).unwrap();
        let flip = Automorphism::flip(&w, zeta).unwrap();
        assert!(one_flow.apply(&a).unwrap().approx_eq(&flip.apply(&a).unwrap(), 1e-12));
    }

    #[test]
    fn heisenberg_single_site() {
        let w = chain(0, 2);
        let t = 0.3;
        let h = op(&w, &[(0, "Z")], one());
        let ev = Automorphism::heisenberg(&h, t).unwrap();
        let got = ev.apply(&op(&w, &[(0, "X")], one())).unwrap();
        let want = op(&w, &[(0, "X")], C64::new((2.0 * t).cos(), 0.0))
            .add(&op(&w, &[(0, "Y")], C64::new(-(2.0 * t).sin(), 0.0)))
            .unwrap();
        assert!(got.approx_eq(&want, 1e-12), "{got:?}");
        let back = ev.inverse().apply(&got).unwrap();
        assert!(back.approx_eq(&op(&w, &[(0, "X")], one()), 1e-12));
    }

    #[test]
    fn heisenberg_dense_image_matches_apply() {
        let w = chain(0, 4);
        let mut h = Observable::zero(&w);
        for i in 0..3 {
            h = h.add(&op(&w, &[(i, "X"), (i + 1, "X")], one())).unwrap();
            h = h.add(&op(&w, &[(i, "Z")], C64::new(0.4, 0.0))).unwrap();
        }
        let ev = Automorphism::heisenberg(&h, 0.7).unwrap();
        let a = op(&w, &[(1, "Y"), (4, "X")], one());
        let img = ev.apply_dense(&a).unwrap();
        let via_terms = ev.apply(&a).unwrap().to_dense(&img.sites).unwrap();
        assert!((&img.m - via_terms).norm() < 1e-10);
    }

    #[test]
    fn spec_roundtrip_and_inverse_compose() {
        let w = chain(-8, 8);
        let spec: AutSpec = serde_json::from_str(
            r#"{"kind":"compose","of":[{"kind":"flip","zeta":{"poly":[0,2]}},{"kind":"shift","xi":{"poly":[0,3]}}]}"#,
        )
        .unwrap();
        let a = Automorphism::build(&spec, &w).unwrap();
        let x = op(&w, &[(3, "X")], one());
        // shift first: 3 -> 6, then the flip pairs 6 with 7
        assert_eq!(a.apply(&x).unwrap(), op(&w, &[(7, "X")], one()));
        let back = a.compose(&a.inverse()).unwrap();
        assert_eq!(back.apply(&x).unwrap(), x);
        let q: AutSpec = serde_json::from_str(r#"{"kind":"flip","zeta":{"poly_signed_square":2}}"#).unwrap();
        assert_eq!(q, AutSpec::Flip { zeta: LabelRule::PolySignedSquare(2) });
    }
}
