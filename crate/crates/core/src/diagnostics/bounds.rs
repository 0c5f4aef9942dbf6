//! Closed-form tail propagation and lattice sum bounds.
//!
//! - composition: `h(r) = f_beta(l) + 2^d (1 + l^(d-1)) f_alpha(n)` with
//!   `n = floor(r/2)`, `l = r - n`;
//! - inverse: `h(r) = 8 L_d sum_{m >= 2} (m-1) (r+m-1)^(d-1) f(floor((r+m-2)/2))`;
//! - `f_{Lambda,Sigma} = 8 sum_{i,j} f(floor(d(i,j)/2))`;
//! - `S_p(s,r) = sum_{i in B_p(s)} sum_{j notin B_p(s+r)} F(d(i,j)) <= K_d^2 s^(d-1) g_F(r)`.

use serde::{Deserialize, Serialize};

use crate::algebra::Observable;
use crate::error::{Error, Result};
use crate::lattice::{MetricConstants, Region, Site, Window};
use crate::seminorms::{f_region, SolverOptions};
use crate::sequences::{g_f, ReproducingFn, Seq, SeriesValue, TailDescriptor};

use super::{TailFunction, CERT_TOL};

fn sample(f: &Seq, x: u64, what: &str) -> Result<f64> {
    f.at(x)
        .ok_or_else(|| Error::InsufficientSamples(format!("{what} has no sample or tail bound at {x}")))
}

/// Tail of `alpha o beta` for `r = 0..=r_max`.
pub fn composition_tail(f_alpha: &Seq, f_beta: &Seq, d: usize, r_max: u64) -> Result<TailFunction> {
    let di = d as i32;
    let mut values = Vec::with_capacity(r_max as usize + 1);
    for r in 0..=r_max {
        let n = r / 2;
        let l = r - n;
        let lf = l as f64;
        let h = sample(f_beta, l, "f_beta")?
            + 2f64.powi(di) * (1.0 + lf.powi(di - 1)) * sample(f_alpha, n, "f_alpha")?;
        values.push(h);
    }
    let mut samples = Seq::new(values)?;
    // both supports end: h vanishes once n and l pass them
    if let (Some(TailDescriptor::Zero), Some(TailDescriptor::Zero)) = (f_alpha.tail, f_beta.tail) {
        let reach = 2 * f_alpha.len().max(f_beta.len()) as u64;
        if r_max + 1 >= reach {
            samples = samples.with_tail(TailDescriptor::Zero)?;
        }
    }
    Ok(TailFunction::formula(samples))
}

/// Inverse tail values with their truncated-series certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseTail {
    pub tail: TailFunction,
    /// The series `sum_m ...` before the factor `8 L_d`.
    pub series: Vec<SeriesValue>,
}

fn inverse_series(f: &Seq, r: u64, d: usize, cutoff: u64) -> Result<SeriesValue> {
    let Some(desc) = f.tail else {
        return Err(Error::Domain("inverse_tail needs a tail descriptor past the samples".into()));
    };
    let len = f.len() as u64;
    let rf = r as f64;
    let di = d as i32;
    // every index past the cutoff reads the descriptor, not the samples
    let floor_cut = (2 * len + 1).saturating_sub(r).max(2);
    let cutoff = match desc {
        TailDescriptor::Zero => floor_cut,
        _ => cutoff.max(floor_cut),
    };
    let term = |m: u64| -> Result<f64> {
        let mf = m as f64;
        let x = (r + m - 2) / 2;
        Ok((mf - 1.0) * (rf + mf - 1.0).powi(di - 1) * sample(f, x, "f")?)
    };
    let mut partial = 0.0;
    for m in (2..=cutoff).rev() {
        partial += term(m)?;
    }
    let mf = cutoff as f64;
    let tail_bound = match desc {
        TailDescriptor::Zero => 0.0,
        TailDescriptor::Geometric { c, .. } | TailDescriptor::Polynomial { c, .. } if c == 0.0 => 0.0,
        TailDescriptor::Geometric { c, q } => {
            if q >= 1.0 {
                return Err(Error::Divergent(format!("geometric tail with q = {q} >= 1")));
            }
            // term(m) <= (m-1) (r+m-1)^(d-1) c q^((r+m-3)/2)
            let u = |m: f64| (m - 1.0) * (rf + m - 1.0).powi(di - 1) * c * q.powf((rf + m - 3.0) / 2.0);
            let m1 = mf + 1.0;
            let ratio = (m1 / (m1 - 1.0)) * ((rf + m1) / (rf + m1 - 1.0)).powi(di - 1) * q.sqrt();
            if ratio >= 1.0 {
                return Err(Error::Divergent(format!("cutoff {cutoff} too small for a ratio bound")));
            }
            u(m1) / (1.0 - ratio)
        }
        TailDescriptor::Polynomial { c, exponent } => {
            let e = exponent;
            if e <= d as f64 + 1.0 {
                return Err(Error::Divergent(format!("polynomial tail exponent {e} <= d + 1")));
            }
            // term(m) <= c 2^e (r+m-1)^(d-e), convex and decreasing in m
            c * 2f64.powf(e) * (rf + mf - 0.5).powf(d as f64 + 1.0 - e) / (e - d as f64 - 1.0)
        }
    };
    Ok(SeriesValue {
        partial,
        tail_bound,
        tail_lower: 0.0,
    })
}

/// Tail of `alpha^-1` for `r = 0..=r_max`; `f` must carry a tail descriptor.
pub fn inverse_tail(f: &Seq, consts: &MetricConstants, d: usize, r_max: u64, cutoff: u64) -> Result<InverseTail> {
    let factor = 8.0 * consts.l_d;
    let series = (0..=r_max)
        .map(|r| inverse_series(f, r, d, cutoff))
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Seq::new(series.iter().map(|s| s.upper() * factor).collect())?;
    if f.tail == Some(TailDescriptor::Zero) && 2 * f.len() as u64 <= r_max + 1 {
        samples = samples.with_tail(TailDescriptor::Zero)?;
    }
    Ok(InverseTail {
        tail: TailFunction::formula(samples),
        series,
    })
}

/// `8 sum_{i in lambda} sum_{j in sigma} f(floor(d(i,j)/2))`.
pub fn f_region_const(f: &Seq, w: &Window, lambda: &Region, sigma: &Region) -> Result<f64> {
    let mut acc = 0.0;
    for i in lambda.iter() {
        for j in sigma.iter() {
            acc += sample(f, w.floor_distance(i, j) / 2, "f")?;
        }
    }
    Ok(8.0 * acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumBoundRow {
    pub center: Site,
    pub s: u64,
    pub r: u64,
    /// Window-truncated `S_p(s, r)`.
    pub lhs: f64,
    /// `K_d^2 s^(d-1) g_F(r)` with the series tail bound included.
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumBoundReport {
    pub rows: Vec<SumBoundRow>,
    pub checked: usize,
    pub skipped: usize,
    pub passed: bool,
}

/// Checks `S_p(s, r) <= K_d^2 s^(d-1) g_F(r)` on the listed points. Points
/// whose ball `B_p(s+r+margin)` leaves the window are skipped.
pub fn sum_bound_check(
    f: &ReproducingFn,
    consts: &MetricConstants,
    w: &Window,
    points: &[(Site, u64, u64)],
    margin: u64,
    cutoff: u64,
) -> Result<SumBoundReport> {
    f.validate()?;
    let d = w.dim();
    let mut rows = Vec::with_capacity(points.len());
    for (center, s, r) in points {
        let (s, r) = (*s, *r);
        let p = w.require(center)?;
        let mut row = SumBoundRow {
            center: center.clone(),
            s,
            r,
            lhs: 0.0,
            rhs: 0.0,
            slack: 0.0,
            passed: false,
            skipped: None,
        };
        if s == 0 || !w.ball_fits(p, s + r + margin) {
            row.skipped = Some(format!("window does not fit B_p(s+r+{margin})"));
            rows.push(row);
            continue;
        }
        let inner = w.ball_at(p, s);
        let outer = w.ball_at(p, s + r).complement(w);
        let mut terms: Vec<f64> = inner
            .iter()
            .flat_map(|i| outer.iter().map(move |j| (i, j)))
            .map(|(i, j)| f.eval(w.distance(i, j), d))
            .collect();
        terms.sort_by(f64::total_cmp);
        row.lhs = terms.iter().sum();
        let g = g_f(f, r, d, cutoff)?;
        row.rhs = consts.k_d * consts.k_d * (s as f64).powi(d as i32 - 1) * g.upper();
        row.slack = row.rhs - row.lhs;
        row.passed = row.lhs <= row.rhs + CERT_TOL;
        rows.push(row);
    }
    let checked = rows.iter().filter(|r| r.skipped.is_none()).count();
    Ok(SumBoundReport {
        passed: rows.iter().all(|r| r.skipped.is_some() || r.passed),
        skipped: rows.len() - checked,
        checked,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsBracket {
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
}

/// Smallest `eps` with `A` eps-included in `A(lambda)`: `f_lambda(A) / ||A||`.
pub fn eps_inclusion(a: &Observable, lambda: &Region, opts: &SolverOptions) -> Result<EpsBracket> {
    let norm = a.op_norm()?;
    if norm == 0.0 {
        return Err(Error::Domain("eps-inclusion needs A != 0".into()));
    }
    let f = f_region(a, lambda, opts)?;
    Ok(EpsBracket {
        lower: f.lower / norm,
        upper: f.upper / norm,
        exact: f.exact.map(|v| v / norm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::metric_constants;
    use crate::C64;

    fn geometric(base: f64, len: usize) -> Seq {
        Seq::from_fn(len, |r| base.powi(r as i32))
            .unwrap()
            .with_tail(TailDescriptor::Geometric { c: 1.0, q: base })
            .unwrap()
    }

    #[test]
    fn composition_examples() {
        let f = geometric(0.5, 10);
        let h = composition_tail(&f, &f, 1, 6).unwrap();
        assert_eq!(h.samples.values[4], 1.25);
        assert_eq!(h.samples.values[0], 1.0 + 2.0 * 2.0);
        let z = Seq::new(vec![0.0; 3]).unwrap().with_tail(TailDescriptor::Zero).unwrap();
        let h = composition_tail(&z, &z, 2, 8).unwrap();
        assert!(h.samples.values.iter().all(|&v| v == 0.0));
        assert_eq!(h.samples.tail, Some(TailDescriptor::Zero));
        let short = Seq::new(vec![1.0]).unwrap();
        assert!(matches!(composition_tail(&short, &short, 1, 4), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn inverse_geometric_matches_closed_form() {
        let w = Window::chain(-60, 60).unwrap();
        let consts = metric_constants(&w, 20).unwrap();
        assert_eq!(consts.l_d, 4.0);
        let f = geometric(0.25, 20);
        let h = inverse_tail(&f, &consts, 1, 0, 40).unwrap();
        // sum_m (m-1) 4^-floor((m-2)/2) = sum_k (4k+3) 4^-k = 4 + 16/9
        let exact = 52.0 / 9.0;
        let s = h.series[0];
        assert!(s.partial <= exact && exact <= s.upper() + 1e-15);
        assert!(s.upper() - exact < 1e-9, "{s:?}");
        assert!((h.tail.samples.values[0] - 32.0 * exact).abs() < 32.0 * 1e-9);
    }

    #[test]
    fn inverse_of_finite_range_vanishes_late() {
        let consts = MetricConstants::new(3.0, 2.0);
        let f = Seq::new(vec![1.0, 1.0, 0.0]).unwrap().with_tail(TailDescriptor::Zero).unwrap();
        let h = inverse_tail(&f, &consts, 1, 8, 10).unwrap();
        let v = &h.tail.samples.values;
        // support [0, 1]: zero once floor(r/2) >= 2
        assert!(v[..4].iter().all(|&x| x > 0.0));
        assert!(v[4..].iter().all(|&x| x == 0.0));
        assert!(v.windows(2).all(|p| p[1] <= p[0]));
        let zero = Seq::new(vec![0.0]).unwrap().with_tail(TailDescriptor::Zero).unwrap();
        assert!(inverse_tail(&zero, &consts, 1, 5, 10).unwrap().tail.samples.values.iter().all(|&x| x == 0.0));
        let bare = Seq::new(vec![1.0]).unwrap();
        assert!(inverse_tail(&bare, &consts, 1, 1, 10).is_err());
        let slow = Seq::new(vec![1.0]).unwrap().with_tail(TailDescriptor::Polynomial { c: 1.0, exponent: 2.0 }).unwrap();
        assert!(matches!(inverse_tail(&slow, &consts, 1, 1, 10), Err(Error::Divergent(_))));
    }

    #[test]
    fn region_const_examples() {
        let w = Window::chain(-10, 10).unwrap();
        let reg = |x: i64| Region::from_sites(&w, &[Site::from(x)]).unwrap();
        let f = geometric(0.5, 10);
        assert_eq!(f_region_const(&f, &w, &reg(0), &reg(5)).unwrap(), 2.0);
        assert_eq!(f_region_const(&f, &w, &reg(0), &reg(0)).unwrap(), 8.0);
        let z = Seq::new(vec![0.0]).unwrap().with_tail(TailDescriptor::Zero).unwrap();
        assert_eq!(f_region_const(&z, &w, &reg(-3), &reg(7)).unwrap(), 0.0);
        let short = Seq::new(vec![1.0]).unwrap();
        assert!(f_region_const(&short, &w, &reg(0), &reg(5)).is_err());
    }

    #[test]
    fn sum_bound_examples() {
        let w = Window::chain(-40, 40).unwrap();
        let consts = metric_constants(&w, 20).unwrap();
        let f = ReproducingFn::polynomial(3.0);
        let rep = sum_bound_check(&f, &consts, &w, &[(Site::from(0), 3, 2), (Site::from(0), 1, 0)], 4, 10_000).unwrap();
        assert!(rep.passed && rep.checked == 2);
        assert!(rep.rows.iter().all(|r| r.slack >= 0.0));
        let edge = sum_bound_check(&f, &consts, &w, &[(Site::from(38), 3, 2)], 4, 100).unwrap();
        assert_eq!((edge.checked, edge.skipped, edge.passed), (0, 1, true));
    }

    #[test]
    fn eps_examples() {
        let w = Window::chain(-8, 8).unwrap().into_shared();
        let o = Site::from(0);
        let ball = w.ball(&o, 3).unwrap();
        let opts = SolverOptions::default();
        let inside = Observable::single(&w, &Site::from(1), "X").unwrap();
        assert_eq!(eps_inclusion(&inside, &ball, &opts).unwrap().exact, Some(0.0));
        let zz = Observable::term(&w, &[(o.clone(), "Z"), (Site::from(5), "Z")], C64::new(1.0, 0.0)).unwrap();
        let e = eps_inclusion(&zz, &ball, &opts).unwrap();
        assert!(e.lower >= 0.5 - 1e-12 && e.upper <= 1.0 + 1e-12);
        assert!((e.exact.unwrap() - 1.0).abs() < 1e-6);
        let eps = 1e-3;
        let a = Observable::identity(&w)
            .add(&Observable::single(&w, &o, "X").unwrap().scale(C64::new(eps, 0.0)))
            .unwrap();
        let e = eps_inclusion(&a, &Region::new(), &opts).unwrap();
        assert!((e.exact.unwrap() - eps / (1.0 + eps)).abs() < 1e-8);
        assert!(eps_inclusion(&Observable::zero(&w), &ball, &opts).is_err());
    }
}
