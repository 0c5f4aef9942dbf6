//! Run configuration: parsing and validation.

use std::collections::BTreeMap;
use std::sync::Arc;

use almostlocal::algebra::TermLiteral;
use almostlocal::automorphisms::{AutSpec, Automorphism};
use almostlocal::seminorms::SolverOptions;
use almostlocal::sequences::ReproducingFn;
use almostlocal::{Observable, Region, Site, Window};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub window: WindowSpec,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    #[serde(default = "identity_spec")]
    pub automorphism: AutSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observables: BTreeMap<String, Vec<TermLiteral>>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr: Option<LrSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum_bound: Option<SumBoundSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frechet: Option<FrechetSpec>,
    #[serde(default, skip_serializing)]
    pub output: OutputSpec,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn identity_spec() -> AutSpec {
    AutSpec::Identity
}

fn two() -> usize {
    2
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    /// `[lo, hi]` per axis.
    pub extent: Vec<[i64; 2]>,
    #[serde(default = "two")]
    pub local_dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub site_dims: Vec<SiteDim>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteDim {
    pub site: Vec<i64>,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    /// Observable names; empty means all.
    #[serde(default)]
    pub observables: Vec<String>,
    pub center: Vec<i64>,
    #[serde(default)]
    pub r_max: Option<u64>,
    #[serde(default)]
    pub ks: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub center: Vec<i64>,
    pub s: u64,
    pub r: u64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanExpect {
    /// Every cell with `r >= 1` has a certified lower bound at least this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_at_least: Option<f64>,
    /// Every cell with `r >= zero_from_r` is exactly 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_from_r: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    /// Cartesian grid `centers x s x r`.
    #[serde(default)]
    pub centers: Vec<Vec<i64>>,
    #[serde(default)]
    pub s: Vec<u64>,
    #[serde(default)]
    pub r: Vec<u64>,
    /// Extra explicit points.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_witnesses: Option<usize>,
    #[serde(default = "yes")]
    pub kernel: bool,
    #[serde(default)]
    pub expect: ScanExpect,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub centers: Vec<Vec<i64>>,
    pub r_max: u64,
    #[serde(default)]
    pub ks: Vec<u32>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictExpect {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pass: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fail: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictSpec {
    pub ks: Vec<u32>,
    #[serde(default)]
    pub expect: VerdictExpect,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub lambda: Vec<Vec<i64>>,
    pub sigma: Vec<Vec<i64>>,
    /// Observable names.
    pub a: String,
    pub b: String,
}

/// Every ordered pair of distinct listed sites, with single-site
/// observables `a` at the first and `b` at the second.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSitePairs {
    pub sites: Vec<Vec<i64>>,
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrSpec {
    #[serde(rename = "F")]
    pub f: ReproducingFn,
    /// Rescale `F` to the measured commutator kernel before checking.
    #[serde(default)]
    pub fit: bool,
    #[serde(default = "one")]
    pub prefactor: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_site: Option<SingleSitePairs>,
    /// Check scan upper bounds against `s^(d-1) f_F(r)`.
    #[serde(default)]
    pub bridge: bool,
    #[serde(default = "cutoff")]
    pub cutoff: u64,
}

fn one() -> f64 {
    1.0
}

fn cutoff() -> u64 {
    10_000
}

fn margin() -> u64 {
    5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumBoundSpec {
    #[serde(rename = "F")]
    pub f: ReproducingFn,
    pub centers: Vec<Vec<i64>>,
    pub s: Vec<u64>,
    pub r: Vec<u64>,
    #[serde(default = "margin")]
    pub margin: u64,
    #[serde(default = "cutoff")]
    pub cutoff: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrechetSpec {
    pub ks: Vec<u32>,
    pub samples: usize,
    /// Support interval `[lo, hi]` on the first axis for random observables.
    pub support: [i64; 2],
    #[serde(default = "four")]
    pub terms: usize,
    pub center: Vec<i64>,
    /// Constant `M` in `||psi(A)||_k <= 2 M^k ||A||_k`; known for the
    /// signed-square flip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

fn four() -> usize {
    4
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default = "yes")]
    pub csv: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: None, csv: true }
    }
}

/// A validated configuration with its window, map and observables built.
pub struct Prepared {
    pub config: RunConfig,
    pub window: Arc<Window>,
    pub alpha: Automorphism,
    pub observables: BTreeMap<String, Observable>,
}

impl Prepared {
    pub fn site(&self, c: &[i64]) -> Site {
        Site(c.to_vec())
    }

    pub fn region(&self, sites: &[Vec<i64>]) -> Region {
        sites.iter().filter_map(|c| self.window.index_of(&Site(c.clone()))).collect()
    }

    /// Scan grid in config order: cartesian part first, then explicit points.
    pub fn scan_grid(&self) -> Vec<(Site, u64, u64)> {
        let Some(scan) = &self.config.scan else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for c in &scan.centers {
            for &s in &scan.s {
                for &r in &scan.r {
                    out.push((self.site(c), s, r));
                }
            }
        }
        out.extend(scan.points.iter().map(|p| (self.site(&p.center), p.s, p.r)));
        out
    }
}

struct Errors(Vec<String>);

impl Errors {
    fn push(&mut self, field: impl AsRef<str>, msg: impl AsRef<str>) {
        self.0.push(format!("{}: {}", field.as_ref(), msg.as_ref()));
    }
}

fn build_window(spec: &WindowSpec) -> Result<Window, String> {
    let extent: Vec<(i64, i64)> = spec.extent.iter().map(|e| (e[0], e[1])).collect();
    let mut w = Window::new(extent.len(), extent).map_err(|e| e.to_string())?;
    w = w.with_local_dim(spec.local_dim).map_err(|e| e.to_string())?;
    for sd in &spec.site_dims {
        w = w.with_site_dim(&Site(sd.site.clone()), sd.dim).map_err(|e| e.to_string())?;
    }
    Ok(w)
}

/// Validates the whole configuration, listing every offending field.
pub fn prepare(config: RunConfig) -> Result<Prepared, Vec<String>> {
    let mut errs = Errors(Vec::new());
    if config.schema_version != SCHEMA_VERSION {
        errs.push(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", config.schema_version),
        );
    }
    if config.threads == Some(0) {
        errs.push("threads", "must be at least 1");
    }
    let window = match build_window(&config.window) {
        Ok(w) => w.into_shared(),
        Err(e) => {
            errs.push("window", e);
            return Err(errs.0);
        }
    };
    let dim = window.dim();
    let site_ok = |field: String, c: &[i64], errs: &mut Errors| -> bool {
        if c.len() != dim {
            errs.push(field, format!("site {c:?} has {} coordinates, window has {dim}", c.len()));
            false
        } else if window.index_of(&Site(c.to_vec())).is_none() {
            errs.push(field, format!("site {c:?} is outside the window"));
            false
        } else {
            true
        }
    };

    let alpha = match Automorphism::build(&config.automorphism, &window) {
        Ok(a) => Some(a),
        Err(e) => {
            errs.push("automorphism", e.to_string());
            None
        }
    };
    let mut observables = BTreeMap::new();
    for (name, lits) in &config.observables {
        match Observable::from_literals(&window, lits) {
            Ok(o) => {
                observables.insert(name.clone(), o);
            }
            Err(e) => errs.push(format!("observables.{name}"), e.to_string()),
        }
    }
    let known = |name: &str| config.observables.contains_key(name);

    if let Some(p) = &config.profile {
        site_ok("profile.center".into(), &p.center, &mut errs);
        for n in &p.observables {
            if !known(n) {
                errs.push("profile.observables", format!("unknown observable {n:?}"));
            }
        }
        if config.observables.is_empty() {
            errs.push("profile", "no observables defined");
        }
    }

    let guard = |field: String, c: &[i64], s: u64, r: u64, errs: &mut Errors| {
        if let Some(idx) = window.index_of(&Site(c.to_vec())) {
            if s == 0 {
                errs.push(field, format!("s must be at least 1 at center {c:?}"));
            } else if !window.ball_fits(idx, s + r) {
                errs.push(field, format!("ball of radius s + r = {} around {c:?} leaves the window", s + r));
            }
        }
    };
    if let Some(scan) = &config.scan {
        for (i, c) in scan.centers.iter().enumerate() {
            if site_ok(format!("scan.centers[{i}]"), c, &mut errs) {
                for &s in &scan.s {
                    for &r in &scan.r {
                        guard(format!("scan.centers[{i}]"), c, s, r, &mut errs);
                    }
                }
            }
        }
        if !scan.centers.is_empty() && (scan.s.is_empty() || scan.r.is_empty()) {
            errs.push("scan", "centers given without s or r lists");
        }
        for (i, p) in scan.points.iter().enumerate() {
            if site_ok(format!("scan.points[{i}]"), &p.center, &mut errs) {
                guard(format!("scan.points[{i}]"), &p.center, p.s, p.r, &mut errs);
            }
        }
        if scan.centers.is_empty() && scan.points.is_empty() {
            errs.push("scan", "empty grid");
        }
    }
    if let Some(t) = &config.tail {
        if t.r_max == 0 {
            errs.push("tail.r_max", "must be at least 1");
        }
        if t.centers.is_empty() {
            errs.push("tail.centers", "empty");
        }
        for (i, c) in t.centers.iter().enumerate() {
            if site_ok(format!("tail.centers[{i}]"), c, &mut errs) {
                guard(format!("tail.centers[{i}]"), c, t.r_max, t.r_max, &mut errs);
            }
        }
    }
    if let Some(v) = &config.verdict {
        if config.scan.is_none() && config.tail.is_none() {
            errs.push("verdict", "needs a scan or tail section to read the tail from");
        }
        if v.ks.is_empty() {
            errs.push("verdict.ks", "empty");
        }
        for k in v.expect.pass.iter().chain(&v.expect.fail) {
            if !v.ks.contains(k) {
                errs.push("verdict.expect", format!("k = {k} is not in verdict.ks"));
            }
        }
    }
    if let Some(lr) = &config.lr {
        if let Err(e) = lr.f.validate() {
            errs.push("lr.F", e.to_string());
        }
        if !(lr.prefactor > 0.0) {
            errs.push("lr.prefactor", "must be positive");
        }
        if lr.pairs.is_empty() && lr.single_site.is_none() {
            errs.push("lr", "no pairs");
        }
        for (i, p) in lr.pairs.iter().enumerate() {
            for (j, c) in p.lambda.iter().enumerate() {
                site_ok(format!("lr.pairs[{i}].lambda[{j}]"), c, &mut errs);
            }
            for (j, c) in p.sigma.iter().enumerate() {
                site_ok(format!("lr.pairs[{i}].sigma[{j}]"), c, &mut errs);
            }
            for (f, n, sites) in [("a", &p.a, &p.lambda), ("b", &p.b, &p.sigma)] {
                let Some(obs) = observables.get(n) else {
                    if !known(n) {
                        errs.push(format!("lr.pairs[{i}].{f}"), format!("unknown observable {n:?}"));
                    }
                    continue;
                };
                let region: Region = sites.iter().filter_map(|c| window.index_of(&Site(c.clone()))).collect();
                if !obs.support().is_subset(&region) {
                    errs.push(format!("lr.pairs[{i}].{f}"), format!("support of {n:?} leaves its region"));
                }
            }
        }
        if let Some(ss) = &lr.single_site {
            for (j, c) in ss.sites.iter().enumerate() {
                site_ok(format!("lr.single_site.sites[{j}]"), c, &mut errs);
            }
            if let Some(q) = window.uniform_local_dim() {
                let basis = almostlocal::algebra::basis::LocalBasis::get(q);
                for (f, l) in [("a", &ss.a), ("b", &ss.b)] {
                    if basis.parse_label(l).is_none_or(|k| k == 0) {
                        errs.push(format!("lr.single_site.{f}"), format!("{l:?} is not a traceless basis label"));
                    }
                }
            } else {
                errs.push("lr.single_site", "needs a uniform local dimension");
            }
        }
        if lr.bridge && config.scan.is_none() {
            errs.push("lr.bridge", "needs a scan section");
        }
        if lr.fit && window.uniform_local_dim() != Some(2) {
            errs.push("lr.fit", "kernel fits need qubit sites");
        }
    }
    if let Some(sb) = &config.sum_bound {
        if let Err(e) = sb.f.validate() {
            errs.push("sum_bound.F", e.to_string());
        }
        for (i, c) in sb.centers.iter().enumerate() {
            site_ok(format!("sum_bound.centers[{i}]"), c, &mut errs);
        }
        if sb.s.iter().any(|&s| s == 0) {
            errs.push("sum_bound.s", "radii must be at least 1");
        }
        if sb.cutoff < 2 {
            errs.push("sum_bound.cutoff", "must be at least 2");
        }
    }
    if let Some(fr) = &config.frechet {
        site_ok("frechet.center".into(), &fr.center, &mut errs);
        if fr.support[0] > fr.support[1] {
            errs.push("frechet.support", "lo > hi");
        }
        let m_known = matches!(
            &config.automorphism,
            AutSpec::Flip { zeta: almostlocal::automorphisms::LabelRule::PolySignedSquare(2) }
        );
        if fr.m.is_none() && !m_known {
            errs.push("frechet.m", "required unless the map is the signed-square flip with c = 2");
        }
        if fr.samples == 0 || fr.terms == 0 {
            errs.push("frechet", "samples and terms must be positive");
        }
    }
    if errs.0.is_empty() {
        Ok(Prepared {
            config,
            window,
            alpha: alpha.expect("built when no errors"),
            observables,
        })
    } else {
        Err(errs.0)
    }
}
