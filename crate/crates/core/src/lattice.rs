//! Finite windows of the integer lattice, balls, shells and the volume and
//! boundary constants that control lattice sums.
//!
//! Every ball or shell returned here is intersected with its window. Callers
//! that need the untruncated ball must check [`Window::ball_fits`] first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice site given by integer coordinates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Site(pub Vec<i64>);

impl Site {
    pub fn origin(dim: usize) -> Self {
        Site(vec![0; dim])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Parses `"3"` or `"1,-2"`.
    pub fn parse(text: &str) -> Option<Site> {
        let coords: std::result::Result<Vec<i64>, _> =
            text.split(',').map(|t| t.trim().parse::<i64>()).collect();
        coords.ok().filter(|c| !c.is_empty()).map(Site)
    }
}

impl From<i64> for Site {
    fn from(x: i64) -> Self {
        Site(vec![x])
    }
}

impl<const N: usize> From<[i64; N]> for Site {
    fn from(c: [i64; N]) -> Self {
        Site(c.to_vec())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Integer-compared metric on lattice coordinates.
pub trait Metric: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Exact test of `d(a, b) <= radius`.
    fn within(&self, a: &[i64], b: &[i64], radius: u64) -> bool;

    fn distance(&self, a: &[i64], b: &[i64]) -> f64;

    /// Largest integer not above `d(a, b)`.
    fn floor_distance(&self, a: &[i64], b: &[i64]) -> u64 {
        self.distance(a, b).floor() as u64
    }

    /// Smallest integer `R` with `d(a, b) <= R`.
    fn ceil_distance(&self, a: &[i64], b: &[i64]) -> u64 {
        self.distance(a, b).ceil() as u64
    }

    /// Largest per-axis coordinate offset reachable inside a ball of the
    /// given radius. Used by truncation guards.
    fn axis_reach(&self, radius: u64) -> u64 {
        radius
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

fn sq_dist(a: &[i64], b: &[i64]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.abs_diff(*y);
            d * d
        })
        .sum()
}

impl Metric for Euclidean {
    fn name(&self) -> &str {
        "euclidean"
    }

    fn within(&self, a: &[i64], b: &[i64], radius: u64) -> bool {
        sq_dist(a, b) <= radius * radius
    }

    fn distance(&self, a: &[i64], b: &[i64]) -> f64 {
        (sq_dist(a, b) as f64).sqrt()
    }

    fn floor_distance(&self, a: &[i64], b: &[i64]) -> u64 {
        sq_dist(a, b).isqrt()
    }

    fn ceil_distance(&self, a: &[i64], b: &[i64]) -> u64 {
        let s = sq_dist(a, b);
        let r = s.isqrt();
        if r * r == s {
            r
        } else {
            r + 1
        }
    }
}

/// A finite box of `Z^d` with a metric and local Hilbert space dimensions.
#[derive(Clone)]
pub struct Window {
    dim: usize,
    extent: Vec<(i64, i64)>,
    metric: Arc<dyn Metric>,
    local_dim: usize,
    dim_overrides: BTreeMap<usize, usize>,
    strides: Vec<usize>,
    coords: Vec<i64>,
    len: usize,
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Window")
            .field("dim", &self.dim)
            .field("extent", &self.extent)
            .field("metric", &self.metric.name())
            .field("local_dim", &self.local_dim)
            .finish()
    }
}

impl PartialEq for Window {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.extent == other.extent
            && self.metric.name() == other.metric.name()
            && self.local_dim == other.local_dim
            && self.dim_overrides == other.dim_overrides
    }
}

impl Window {
    pub fn new(dim: usize, extent: Vec<(i64, i64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("lattice dimension must be positive".into()));
        }
        if extent.len() != dim {
            return Err(Error::Domain(format!(
                "extent has {} axes, expected {dim}",
                extent.len()
            )));
        }
        let mut len = 1usize;
        let mut strides = vec![0; dim];
        for (axis, &(lo, hi)) in extent.iter().enumerate().rev() {
            if hi < lo {
                return Err(Error::Domain(format!("empty extent on axis {axis}")));
            }
            strides[axis] = len;
            len = len
                .checked_mul((hi - lo + 1) as usize)
                .ok_or_else(|| Error::Resource("window too large".into()))?;
        }
        let mut coords = Vec::with_capacity(len * dim);
        for idx in 0..len {
            for axis in 0..dim {
                let off = (idx / strides[axis]) % ((extent[axis].1 - extent[axis].0 + 1) as usize);
                coords.push(extent[axis].0 + off as i64);
            }
        }
        Ok(Window {
            dim,
            extent,
            metric: Arc::new(Euclidean),
            local_dim: 2,
            dim_overrides: BTreeMap::new(),
            strides,
            coords,
            len,
        })
    }

    /// One-dimensional qubit chain on `lo..=hi`.
    pub fn chain(lo: i64, hi: i64) -> Result<Self> {
        Window::new(1, vec![(lo, hi)])
    }

    pub fn with_metric(mut self, metric: Arc<dyn Metric>) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_local_dim(mut self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("local dimension must be at least 2".into()));
        }
        self.local_dim = n;
        Ok(self)
    }

    pub fn with_site_dim(mut self, site: &Site, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("local dimension must be at least 2".into()));
        }
        let idx = self.require(site)?;
        self.dim_overrides.insert(idx, n);
        Ok(self)
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> &[(i64, i64)] {
        &self.extent
    }

    pub fn metric(&self) -> &dyn Metric {
        self.metric.as_ref()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn local_dim(&self, idx: usize) -> usize {
        self.dim_overrides.get(&idx).copied().unwrap_or(self.local_dim)
    }

    pub fn uniform_local_dim(&self) -> Option<usize> {
        self.dim_overrides
            .values()
            .all(|&n| n == self.local_dim)
            .then_some(self.local_dim)
    }

    pub fn coords(&self, idx: usize) -> &[i64] {
        &self.coords[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn site(&self, idx: usize) -> Site {
        Site(self.coords(idx).to_vec())
    }

    pub fn index_of_coords(&self, c: &[i64]) -> Option<usize> {
        if c.len() != self.dim {
            return None;
        }
        let mut idx = 0;
        for (axis, &x) in c.iter().enumerate() {
            let (lo, hi) = self.extent[axis];
            if x < lo || x > hi {
                return None;
            }
            idx += (x - lo) as usize * self.strides[axis];
        }
        Some(idx)
    }

    pub fn index_of(&self, site: &Site) -> Option<usize> {
        self.index_of_coords(&site.0)
    }

    pub fn require(&self, site: &Site) -> Result<usize> {
        self.index_of(site)
            .ok_or_else(|| Error::OutsideWindow(site.to_string()))
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.distance(self.coords(i), self.coords(j))
    }

    pub fn floor_distance(&self, i: usize, j: usize) -> u64 {
        self.metric.floor_distance(self.coords(i), self.coords(j))
    }

    pub fn ceil_distance(&self, i: usize, j: usize) -> u64 {
        self.metric.ceil_distance(self.coords(i), self.coords(j))
    }

    /// `B_j(r) = {i : d(j, i) <= r - 1}` intersected with the window.
    pub fn ball(&self, j: &Site, r: u64) -> Result<Region> {
        let idx = self.require(j)?;
        Ok(self.ball_at(idx, r))
    }

    pub fn ball_at(&self, j: usize, r: u64) -> Region {
        if r == 0 {
            return Region::new();
        }
        let cj = self.coords(j);
        (0..self.len)
            .filter(|&i| self.metric.within(cj, self.coords(i), r - 1))
            .collect()
    }

    /// `B_j(r) \ B_j(r - 1)`.
    pub fn shell(&self, j: &Site, r: u64) -> Result<Region> {
        if r == 0 {
            return Err(Error::Domain("shell radius must be at least 1".into()));
        }
        let idx = self.require(j)?;
        Ok(self.ball_at(idx, r).difference(&self.ball_at(idx, r - 1)))
    }

    /// Whether the untruncated ball `B_j(r)` lies inside the window.
    pub fn ball_fits(&self, j: usize, r: u64) -> bool {
        if r == 0 {
            return true;
        }
        let reach = self.metric.axis_reach(r - 1) as i64;
        self.coords(j)
            .iter()
            .zip(&self.extent)
            .all(|(&c, &(lo, hi))| c - reach >= lo && c + reach <= hi)
    }

    pub fn all_sites(&self) -> Region {
        (0..self.len).collect()
    }
}

/// A finite set of window sites, stored by window index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    sites: BTreeSet<usize>,
}

impl FromIterator<usize> for Region {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Region {
            sites: iter.into_iter().collect(),
        }
    }
}

impl Region {
    pub fn new() -> Self {
        Region::default()
    }

    pub fn from_sites<'a>(w: &Window, sites: impl IntoIterator<Item = &'a Site>) -> Result<Self> {
        sites.into_iter().map(|s| w.require(s)).collect()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.sites.contains(&idx)
    }

    pub fn insert(&mut self, idx: usize) {
        self.sites.insert(idx);
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.sites.iter().copied()
    }

    pub fn as_set(&self) -> &BTreeSet<usize> {
        &self.sites
    }

    pub fn union(&self, other: &Region) -> Region {
        self.sites.union(&other.sites).copied().collect()
    }

    pub fn intersection(&self, other: &Region) -> Region {
        self.sites.intersection(&other.sites).copied().collect()
    }

    pub fn difference(&self, other: &Region) -> Region {
        self.sites.difference(&other.sites).copied().collect()
    }

    pub fn complement(&self, w: &Window) -> Region {
        (0..w.len()).filter(|i| !self.sites.contains(i)).collect()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.sites.is_subset(&other.sites)
    }

    pub fn to_sites(&self, w: &Window) -> Vec<Site> {
        self.iter().map(|i| w.site(i)).collect()
    }
}

/// Constants of the volume bound `|B_j(r+1)| <= C_d r^d` and the boundary
/// bound `|dB_j(r+1)| <= K_d r^(d-1)`, with `L_d = K_d^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConstants {
    pub c_d: f64,
    pub k_d: f64,
    pub l_d: f64,
}

impl MetricConstants {
    pub fn new(c_d: f64, k_d: f64) -> Self {
        MetricConstants {
            c_d,
            k_d,
            l_d: k_d * k_d,
        }
    }
}

/// Smallest constants certifying both bounds for `1 <= r <= r_max` at every
/// center whose ball `B_j(r+1)` lies inside the window.
pub fn metric_constants(w: &Window, r_max: u64) -> Result<MetricConstants> {
    if r_max == 0 {
        return Err(Error::Domain("r_max must be at least 1".into()));
    }
    let d = w.dim() as i32;
    let mut c_d = 0.0f64;
    let mut k_d = 0.0f64;
    let mut scanned = false;
    let mut hist = vec![0usize; r_max as usize + 1];
    for j in 0..w.len() {
        if !w.ball_fits(j, 2) {
            continue;
        }
        hist.iter_mut().for_each(|h| *h = 0);
        for i in 0..w.len() {
            let rho = w.ceil_distance(j, i);
            if rho <= r_max {
                hist[rho as usize] += 1;
            }
        }
        let mut volume = hist[0];
        for r in 1..=r_max {
            volume += hist[r as usize];
            if !w.ball_fits(j, r + 1) {
                break;
            }
            scanned = true;
            let rf = r as f64;
            c_d = c_d.max(volume as f64 / rf.powi(d));
            k_d = k_d.max(hist[r as usize] as f64 / rf.powi(d - 1));
        }
    }
    if !scanned {
        return Err(Error::Domain("window too small for any radius".into()));
    }
    Ok(MetricConstants::new(c_d, k_d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites(w: &Window, r: &Region) -> Vec<i64> {
        r.iter().map(|i| w.coords(i)[0]).collect()
    }

    #[test]
    fn ball_examples() {
        let w = Window::chain(-10, 10).unwrap();
        let o = Site::from(0);
        assert!(w.ball(&o, 0).unwrap().is_empty());
        assert_eq!(sites(&w, &w.ball(&o, 1).unwrap()), vec![0]);
        assert_eq!(sites(&w, &w.ball(&o, 3).unwrap()), vec![-2, -1, 0, 1, 2]);
        assert!(w.ball(&Site::from(11), 1).is_err());
    }

    #[test]
    fn shell_examples() {
        let w = Window::chain(-10, 10).unwrap();
        let o = Site::from(0);
        assert_eq!(sites(&w, &w.shell(&o, 1).unwrap()), vec![0]);
        assert_eq!(sites(&w, &w.shell(&o, 3).unwrap()), vec![-2, 2]);
        assert!(w.shell(&o, 0).is_err());

        let w2 = Window::new(2, vec![(-3, 3), (-3, 3)]).unwrap();
        let sh = w2.shell(&Site::from([0, 0]), 2).unwrap();
        let mut got = sh.to_sites(&w2);
        got.sort();
        let mut want: Vec<Site> = [[-1, 0], [0, -1], [0, 1], [1, 0]]
            .into_iter()
            .map(Site::from)
            .collect();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn euclidean_distances_are_exact() {
        let m = Euclidean;
        assert_eq!(m.floor_distance(&[0, 0], &[3, 4]), 5);
        assert_eq!(m.ceil_distance(&[0, 0], &[1, 1]), 2);
        assert_eq!(m.floor_distance(&[0, 0], &[1, 1]), 1);
        assert!(m.within(&[0, 0], &[3, 4], 5));
        assert!(!m.within(&[0, 0], &[3, 4], 4));
    }

    #[test]
    fn constants_in_one_dimension() {
        let w = Window::chain(-20, 20).unwrap();
        let c = metric_constants(&w, 8).unwrap();
        assert_eq!((c.c_d, c.k_d, c.l_d), (3.0, 2.0, 4.0));
        let c1 = metric_constants(&w, 1).unwrap();
        assert_eq!((c1.c_d, c1.k_d), (3.0, 2.0));
        let tiny = Window::chain(0, 1).unwrap();
        assert!(metric_constants(&tiny, 1).is_err());
    }

    #[test]
    fn constants_in_two_dimensions_hold_exhaustively() {
        let w = Window::new(2, vec![(-6, 6), (-6, 6)]).unwrap();
        let c = metric_constants(&w, 5).unwrap();
        for j in 0..w.len() {
            for r in 1..=5u64 {
                if !w.ball_fits(j, r + 1) {
                    continue;
                }
                let b = w.ball_at(j, r + 1).len() as f64;
                let s = b - w.ball_at(j, r).len() as f64;
                assert!(b <= c.c_d * (r as f64).powi(2) + 1e-12);
                assert!(s <= c.k_d * r as f64 + 1e-12);
            }
        }
        // |B(2)| = 5 at r = 1
        assert_eq!(c.c_d, 5.0);
    }

    #[test]
    fn region_set_algebra() {
        let w = Window::chain(0, 5).unwrap();
        let a: Region = [0, 1, 2].into_iter().collect();
        let b: Region = [2, 3].into_iter().collect();
        assert_eq!(a.union(&b).len(), 4);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![2]);
        assert_eq!(a.complement(&w).iter().collect::<Vec<_>>(), vec![3, 4, 5]);
        assert!(a.intersection(&b).is_subset(&a));
    }

    #[test]
    fn ball_fits_guard() {
        let w = Window::chain(-5, 5).unwrap();
        let o = w.index_of(&Site::from(0)).unwrap();
        assert!(w.ball_fits(o, 6));
        assert!(!w.ball_fits(o, 7));
    }

    #[test]
    fn site_parse_roundtrip() {
        let s = Site::from([1, -2]);
        assert_eq!(Site::parse(&s.to_string()), Some(s));
        assert_eq!(Site::parse("x"), None);
    }
}
