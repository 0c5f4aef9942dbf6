//! `H_alpha(s, r) = sup_p sup_{A in A(B_p(s)), ||A|| = 1} inf_{B in A(B_p(s+r))} ||alpha(A) - B||`
//! on finite grids, with `H(s, 0) = 1` by convention.
//!
//! Permutation-type automorphisms are evaluated exactly by support tracking:
//! the value is 0 when the image of `B_p(s)` fits in `B_p(s+r)` and 1 (the
//! single-site witness at an escaping site) otherwise. Other automorphisms
//! get witness lower bounds and, for qubits, commutator-kernel upper bounds.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::basis::LocalBasis;
use crate::algebra::dense;
use crate::algebra::{Observable, PauliString};
use crate::automorphisms::{AutSpec, Automorphism, DenseImage, SitePerm};
use crate::error::{Error, Result};
use crate::lattice::{Region, Site, Window};
use crate::sampling;
use crate::seminorms::{f_region, SolverOptions};
use crate::sequences::{Seq, TailDescriptor};
use crate::C64;

use super::lr::{single_site_images, CommutatorKernel, DENSE_CAP, LANCZOS_TOL};
use super::{TailFunction, Tag, CERT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanOptions {
    /// Random traceless strings per `(p, s)` for non-permutation maps.
    pub random_witnesses: usize,
    pub seed: u64,
    pub solver: SolverOptions,
    /// Compute commutator-kernel upper bounds (qubits only).
    pub kernel: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            random_witnesses: 32,
            seed: 0,
            solver: SolverOptions::default(),
            kernel: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Convention,
    Support,
    Witness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub center: Site,
    pub s: u64,
    pub r: u64,
    pub tag: Tag,
    pub lower: f64,
    pub witness: String,
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// `sup_p` over the scanned centers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HCell {
    pub s: u64,
    pub r: u64,
    pub lower: f64,
    pub upper: Option<f64>,
    pub tag: Tag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub automorphism: AutSpec,
    pub points: Vec<ScanPoint>,
    pub table: Vec<HCell>,
    /// `lower <= upper` wherever both are present.
    pub ordered: bool,
    /// `H(s, r+1) <= H(s, r)` on exact cells, when every cell is exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_in_r: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ScanReport {
    pub fn cell(&self, s: u64, r: u64) -> Option<&HCell> {
        self.table.iter().find(|c| c.s == s && c.r == r)
    }
}

/// `(p, s, r)` for every combination.
pub fn cartesian(centers: &[Site], s: &[u64], r: &[u64]) -> Vec<(Site, u64, u64)> {
    let mut out = Vec::new();
    for p in centers {
        for &si in s {
            for &ri in r {
                out.push((p.clone(), si, ri));
            }
        }
    }
    out
}

fn convention(center: &Site, s: u64) -> ScanPoint {
    ScanPoint {
        center: center.clone(),
        s,
        r: 0,
        tag: Tag::Exact,
        lower: 1.0,
        witness: "convention H(s,0) = 1".into(),
        upper: Some(1.0),
        certificate: None,
        method: Method::Convention,
        flags: Vec::new(),
    }
}

fn unit_string(w: &std::sync::Arc<Window>, p: &PauliString) -> Result<(Observable, String)> {
    let norm: f64 = p
        .factors()
        .map(|(s, k)| LocalBasis::get(w.local_dim(s)).op_norms[k as usize])
        .product();
    Ok((Observable::from_terms(w, [(p.clone(), C64::new(1.0 / norm, 0.0))])?, p.label(w)))
}

fn permutation_point(
    alpha: &Automorphism,
    perm: &SitePerm,
    center: &Site,
    p: usize,
    s: u64,
    r: u64,
    opts: &ScanOptions,
) -> Result<ScanPoint> {
    let w = alpha.window();
    let ball_s = w.ball_at(p, s);
    let ball_sr = w.ball_at(p, s + r);
    let image = perm.image_region(w, &ball_s)?;
    let escaping = image.difference(&ball_sr);
    let mut point = ScanPoint {
        center: center.clone(),
        s,
        r,
        tag: Tag::Exact,
        lower: 0.0,
        witness: "none needed: alpha(A(B_p(s))) = A(image) lies in A(B_p(s+r))".into(),
        upper: Some(0.0),
        certificate: Some("image support inside B_p(s+r)".into()),
        method: Method::Support,
        flags: Vec::new(),
    };
    let Some(y) = escaping.iter().next() else {
        return Ok(point);
    };
    let x = perm.preimage(y).ok_or_else(|| Error::Truncation(format!("no preimage for site {}", w.site(y))))?;
    let (a, label) = unit_string(w, &PauliString::single(x, 1))?;
    let image = alpha.apply(&a)?;
    let f = f_region(&image, &ball_sr, &opts.solver)?;
    point.lower = f.exact.unwrap_or(f.lower);
    point.upper = Some(1.0);
    point.witness = format!("{label} maps to site {} outside B_p(s+r)", w.site(y));
    point.certificate = Some("B = 0 gives H <= 1".into());
    point.tag = if point.lower >= 1.0 - CERT_TOL { Tag::Exact } else { Tag::Bracket };
    if let Some(note) = f.note {
        point.flags.push(note);
    }
    Ok(point)
}

struct Witness {
    label: String,
    image: DenseImage,
}

/// `1/2 ||M - E(M)||` with `E` the conditional expectation onto `A(region)`.
fn witness_p_bound(wit: &Witness, region: &Region) -> f64 {
    let img = &wit.image;
    let traced: Vec<usize> = (0..img.sites.len()).filter(|&i| !region.contains(img.sites[i])).collect();
    if traced.is_empty() {
        return 0.0;
    }
    let resid = &img.m - dense::trace_out(&img.m, &img.dims, &traced);
    0.5 * dense::norm_bracket(&resid, DENSE_CAP, LANCZOS_TOL).value
}

/// Certified solver lower bound on `f_region`, when the image is small.
fn witness_solver_bound(w: &std::sync::Arc<Window>, wit: &Witness, region: &Region, solver: &SolverOptions) -> Result<Option<f64>> {
    let img = &wit.image;
    if !solver.enabled || img.m.nrows() > solver.max_support_dim {
        return Ok(None);
    }
    let obs = Observable::from_dense(w, &img.sites, &img.m, 1e-14);
    let f = f_region(&obs, region, solver)?;
    Ok(Some(f.exact.unwrap_or(f.lower)))
}

fn guard(w: &Window, center: &Site, s: u64, r: u64) -> Result<usize> {
    let p = w.require(center)?;
    if s == 0 {
        return Err(Error::Domain("s must be at least 1".into()));
    }
    if !w.ball_fits(p, s + r) {
        return Err(Error::Truncation(format!(
            "B_p(s+r) with p = {center}, s = {s}, r = {r} leaves the window"
        )));
    }
    Ok(p)
}

/// Scans `H_alpha` on the listed `(p, s, r)` points.
pub fn h_scan(alpha: &Automorphism, grid: &[(Site, u64, u64)], opts: &ScanOptions) -> Result<ScanReport> {
    let w = alpha.window().clone();
    let centers: Vec<usize> = grid.iter().map(|(c, s, r)| guard(&w, c, *s, *r)).collect::<Result<_>>()?;
    let mut notes = Vec::new();
    let points: Vec<ScanPoint> = if let Some(perm) = alpha.site_map() {
        let pts: Vec<Result<ScanPoint>> = grid
            .par_iter()
            .zip(&centers)
            .map(|((c, s, r), &p)| {
                if *r == 0 {
                    Ok(convention(c, *s))
                } else {
                    permutation_point(alpha, &perm, c, p, *s, *r, opts)
                }
            })
            .collect();
        pts.into_iter().collect::<Result<_>>()?
    } else {
        general_scan(alpha, grid, &centers, opts, &mut notes)?
    };
    Ok(summarize(alpha.spec().clone(), points, notes))
}

fn general_scan(
    alpha: &Automorphism,
    grid: &[(Site, u64, u64)],
    centers: &[usize],
    opts: &ScanOptions,
    notes: &mut Vec<String>,
) -> Result<Vec<ScanPoint>> {
    let w = alpha.window().clone();
    // groups share the witness images of one ball B_p(s)
    let mut groups: BTreeMap<(usize, u64), Vec<usize>> = BTreeMap::new();
    for (i, ((_, s, r), &p)) in grid.iter().zip(centers).enumerate() {
        if *r > 0 {
            groups.entry((p, *s)).or_default().push(i);
        }
    }
    let rows: Region = groups.keys().flat_map(|&(p, s)| w.ball_at(p, s).iter().collect::<Vec<_>>()).collect();
    let images = single_site_images(alpha, &rows)?;
    let qubits = rows.iter().all(|x| w.local_dim(x) == 2);
    let kernel = if opts.kernel && qubits {
        Some(CommutatorKernel::from_images(&rows, &images)?)
    } else {
        if opts.kernel {
            notes.push("commutator kernel needs qubits; upper bounds are the trivial 1".into());
        }
        None
    };
    let group_list: Vec<((usize, u64), Vec<usize>)> = groups.into_iter().collect();
    let results: Vec<Result<Vec<(usize, ScanPoint)>>> = group_list
        .par_iter()
        .map(|&((p, s), ref idxs)| {
            let ball = w.ball_at(p, s);
            let mut witnesses: Vec<Witness> = Vec::new();
            for x in ball.iter() {
                let q = w.local_dim(x);
                for k in 1..(q * q) as u16 {
                    let norm = LocalBasis::get(q).op_norms[k as usize];
                    let mut image = images[&(x, k)].clone();
                    image.m /= C64::new(norm, 0.0);
                    witnesses.push(Witness {
                        label: PauliString::single(x, k).label(&w),
                        image,
                    });
                }
            }
            let mut flags = Vec::new();
            let mut rng = sampling::stream(opts.seed, &[p as u64, s]);
            for _ in 0..opts.random_witnesses {
                let string = sampling::random_string(&w, &ball, &mut rng)?;
                let (a, label) = unit_string(&w, &string)?;
                match alpha.apply_dense(&a) {
                    Ok(image) => witnesses.push(Witness { label, image }),
                    Err(Error::Resource(msg)) => {
                        flags.push(format!("random witness skipped: {msg}"));
                    }
                    Err(e) => return Err(e),
                }
            }
            let mut out = Vec::new();
            for &i in idxs {
                let (center, _, r) = &grid[i];
                let region = w.ball_at(p, s + r);
                let mut best = (0.0f64, "none: every witness stays inside B_p(s+r)".to_string());
                let mut lead: Option<&Witness> = None;
                for wit in &witnesses {
                    let v = witness_p_bound(wit, &region);
                    if v > best.0 {
                        best = (v, wit.label.clone());
                        lead = Some(wit);
                    }
                }
                // the convex solver refines the leading witness only
                if let Some(wit) = lead {
                    if let Some(v) = witness_solver_bound(&w, wit, &region, &opts.solver)? {
                        best.0 = best.0.max(v);
                    }
                }
                let (upper, certificate) = match &kernel {
                    Some(k) => {
                        let u = k.h_upper(&w, &ball, &region)?;
                        (u, format!("commutator kernel sum {u:.6e} (Lanczos tolerance {LANCZOS_TOL:e})"))
                    }
                    None => (1.0, "B = 0 gives H <= 1".to_string()),
                };
                let lower = best.0;
                let tag = if upper - lower <= CERT_TOL { Tag::Exact } else { Tag::Bracket };
                out.push((
                    i,
                    ScanPoint {
                        center: center.clone(),
                        s,
                        r: *r,
                        tag,
                        lower,
                        witness: best.1,
                        upper: Some(upper),
                        certificate: Some(certificate),
                        method: Method::Witness,
                        flags: flags.clone(),
                    },
                ));
            }
            Ok(out)
        })
        .collect();
    let mut slots: Vec<Option<ScanPoint>> = vec![None; grid.len()];
    for res in results {
        for (i, pt) in res? {
            slots[i] = Some(pt);
        }
    }
    Ok(slots
        .into_iter()
        .zip(grid)
        .map(|(pt, (c, s, _))| pt.unwrap_or_else(|| convention(c, *s)))
        .collect())
}

fn summarize(spec: AutSpec, points: Vec<ScanPoint>, notes: Vec<String>) -> ScanReport {
    let mut order: Vec<(u64, u64)> = Vec::new();
    let mut cells: BTreeMap<(u64, u64), HCell> = BTreeMap::new();
    for pt in &points {
        let key = (pt.s, pt.r);
        match cells.get_mut(&key) {
            None => {
                order.push(key);
                cells.insert(
                    key,
                    HCell {
                        s: pt.s,
                        r: pt.r,
                        lower: pt.lower,
                        upper: pt.upper,
                        tag: pt.tag,
                    },
                );
            }
            Some(c) => {
                c.lower = c.lower.max(pt.lower);
                c.upper = match (c.upper, pt.upper) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
                c.tag = if c.tag == Tag::Exact && pt.tag == Tag::Exact { Tag::Exact } else { Tag::Bracket };
            }
        }
    }
    for c in cells.values_mut() {
        if c.upper.is_none() {
            c.tag = Tag::Lower;
        }
    }
    let ordered = points.iter().all(|p| p.upper.map_or(true, |u| p.lower <= u + CERT_TOL));
    let monotone_in_r = cells.values().all(|c| c.tag == Tag::Exact).then(|| {
        cells.values().all(|c| match cells.get(&(c.s, c.r + 1)) {
            Some(next) => next.upper <= c.upper,
            None => true,
        })
    });
    ScanReport {
        automorphism: spec,
        points,
        table: order.into_iter().map(|k| cells[&k]).collect(),
        ordered,
        monotone_in_r,
        notes,
    }
}

/// `D(r) = H(r, r)` for `r = 0..=r_max`, with `D(0) = 1`.
pub fn diag_tail(
    alpha: &Automorphism,
    centers: &[Site],
    r_max: u64,
    opts: &ScanOptions,
    ks: &[u32],
) -> Result<(TailFunction, ScanReport)> {
    let grid: Vec<(Site, u64, u64)> = (1..=r_max)
        .flat_map(|r| centers.iter().map(move |c| (c.clone(), r, r)))
        .collect();
    let scan = h_scan(alpha, &grid, opts)?;
    let mut upper = vec![1.0];
    let mut lower = vec![1.0];
    let mut certified = true;
    for r in 1..=r_max {
        let cell = scan
            .cell(r, r)
            .ok_or_else(|| Error::InsufficientSamples(format!("no centers scanned at r = {r}")))?;
        lower.push(cell.lower);
        match cell.upper {
            Some(u) => upper.push(u),
            None => {
                certified = false;
                upper.push(cell.lower);
            }
        }
    }
    let tail = finish_tail(upper, lower, certified, alpha.window().dim(), ks)?;
    Ok((tail, scan))
}

/// `f(r) = max_s H(s, r) / s^(d-1)` over the scanned cells; `r = 0..=r_max`
/// must all be present (r = 0 defaults to the convention).
pub fn tail_from_scan(scan: &ScanReport, d: usize, ks: &[u32]) -> Result<TailFunction> {
    let r_max = scan.table.iter().map(|c| c.r).max().unwrap_or(0);
    let mut upper = vec![f64::NAN; r_max as usize + 1];
    let mut lower = vec![f64::NAN; r_max as usize + 1];
    let mut certified = true;
    for c in &scan.table {
        let weight = (c.s as f64).powi(d as i32 - 1);
        let u = match c.upper {
            Some(u) => u,
            None => {
                certified = false;
                c.lower
            }
        };
        let slot = c.r as usize;
        upper[slot] = if upper[slot].is_nan() { u / weight } else { upper[slot].max(u / weight) };
        lower[slot] = if lower[slot].is_nan() { c.lower / weight } else { lower[slot].max(c.lower / weight) };
    }
    if upper[0].is_nan() {
        upper[0] = 1.0;
        lower[0] = 1.0;
    }
    if let Some(r) = upper.iter().position(|v| v.is_nan()) {
        return Err(Error::InsufficientSamples(format!("no scanned cell at r = {r}")));
    }
    finish_tail(upper, lower, certified, d, ks)
}

/// Attaches a zero tail past the sampled range when `alpha` is a site
/// permutation of displacement `R` and every sample from `R` on vanishes:
/// then `alpha(A(B_p(s))) = A(pi(B_p(s)))` sits inside `B_p(s+R)`.
pub fn with_range_tail(mut tail: TailFunction, alpha: &Automorphism) -> Result<TailFunction> {
    let Some(perm) = alpha.site_map() else {
        return Ok(tail);
    };
    let range = perm.displacement(alpha.window()) as usize;
    let v = &tail.samples.values;
    if v.len() > range && v[range..].iter().all(|&x| x == 0.0) {
        tail.samples = tail.samples.clone().with_tail(TailDescriptor::Zero)?;
        tail.notes.push(format!("zero past r = {range}: permutation of displacement {range}"));
        let ks: Vec<u32> = tail.decay_class.keys().copied().collect();
        let d = alpha.window().dim();
        tail.decay_class.clear();
        tail = tail.with_decay(d, &ks);
    }
    Ok(tail)
}

fn finish_tail(upper: Vec<f64>, lower: Vec<f64>, certified: bool, d: usize, ks: &[u32]) -> Result<TailFunction> {
    let same = upper == lower;
    let mut tail = TailFunction::measured(Seq::new(upper)?, (!same).then_some(lower)).with_decay(d, ks);
    if !certified {
        tail.notes.push("some cells carry lower bounds only; samples are not certified upper bounds".into());
    }
    tail.notes.push("sup over p restricted to the scanned centers".into());
    Ok(tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphisms::{quadratic_flip, LabelRule};
    use std::sync::Arc;

    fn chain(lo: i64, hi: i64) -> Arc<Window> {
        Window::chain(lo, hi).unwrap().into_shared()
    }

    fn sites(xs: impl IntoIterator<Item = i64>) -> Vec<Site> {
        xs.into_iter().map(Site::from).collect()
    }

    #[test]
    fn identity_is_zero_beyond_convention() {
        let w = chain(-10, 10);
        let alpha = Automorphism::identity(&w);
        let rep = h_scan(&alpha, &cartesian(&sites([0, 1]), &[1, 2, 3], &[0, 1, 2]), &ScanOptions::default()).unwrap();
        for c in &rep.table {
            assert_eq!(c.tag, Tag::Exact);
            assert_eq!(c.upper, Some(if c.r == 0 { 1.0 } else { 0.0 }));
        }
        assert_eq!(rep.monotone_in_r, Some(true));
    }

    #[test]
    fn linear_flip_has_range_c_minus_one() {
        let w = chain(-40, 40);
        for c in [2i64, 3] {
            let alpha = Automorphism::flip(&w, LabelRule::Poly(vec![0, c])).unwrap();
            let grid = cartesian(&sites(-6..=6), &[1, 2, 3], &(0..=5).collect::<Vec<_>>());
            let rep = h_scan(&alpha, &grid, &ScanOptions::default()).unwrap();
            for cell in &rep.table {
                // the image of B_p(s) reaches distance s - 1 + (C - 1)
                let want = if cell.r == 0 || (cell.r as i64) < c - 1 { 1.0 } else { 0.0 };
                assert_eq!((cell.tag, cell.upper), (Tag::Exact, Some(want)), "C = {c}, cell {cell:?}");
            }
        }
    }

    #[test]
    fn quadratic_flip_is_bounded_below() {
        let w = chain(-100, 100);
        let (alpha, _) = quadratic_flip(&w).unwrap();
        let (tail, _) = diag_tail(&alpha, &sites(-40..=40), 6, &ScanOptions::default(), &[0, 1]).unwrap();
        assert!(tail.samples.values.iter().all(|&v| v >= 0.5));
        assert!(tail.lower.is_none());
    }

    #[test]
    fn truncation_guard_fires() {
        let w = chain(-5, 5);
        let alpha = Automorphism::identity(&w);
        let err = h_scan(&alpha, &[(Site::from(0), 3, 4)], &ScanOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Truncation(_)));
    }

    #[test]
    fn heisenberg_brackets_are_ordered() {
        let w = chain(0, 5);
        let mut h = Observable::zero(&w);
        for x in 0..5 {
            let t = Observable::term(&w, &[(Site::from(x), "X"), (Site::from(x + 1), "X")], C64::new(1.0, 0.0)).unwrap();
            h = h.add(&t).unwrap();
        }
        for x in 0..6 {
            h = h.add(&Observable::single(&w, &Site::from(x), "Z").unwrap()).unwrap();
        }
        let alpha = Automorphism::heisenberg(&h, 0.3).unwrap();
        let opts = ScanOptions {
            random_witnesses: 4,
            ..ScanOptions::default()
        };
        let rep = h_scan(&alpha, &cartesian(&sites([2, 3]), &[1, 2], &[0, 1]), &opts).unwrap();
        assert!(rep.ordered);
        for c in rep.table.iter().filter(|c| c.r > 0) {
            let u = c.upper.unwrap();
            assert!(c.lower > 0.0 && c.lower <= u + CERT_TOL, "{c:?}");
        }
        let again = h_scan(&alpha, &cartesian(&sites([2, 3]), &[1, 2], &[0, 1]), &opts).unwrap();
        assert_eq!(rep, again);
    }
}
