//! Non-negative sequences on `N_0`, their weighted sup norms and monotone
//! envelopes, and reproducing functions with the lattice sums built on them.
//!
//! Infinite quantities are reported as a sampled part plus an analytic bound
//! for everything past the cutoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{MetricConstants, Window};

/// Bound valid for every index past the sampled range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailDescriptor {
    Zero,
    /// `c q^r`
    Geometric { c: f64, q: f64 },
    /// `c (1 + r)^(-exponent)`
    Polynomial { c: f64, exponent: f64 },
}

impl TailDescriptor {
    pub fn bound(&self, r: u64) -> f64 {
        match *self {
            TailDescriptor::Zero => 0.0,
            TailDescriptor::Geometric { c, q } => c * q.powf(r as f64),
            TailDescriptor::Polynomial { c, exponent } => c * (1.0 + r as f64).powf(-exponent),
        }
    }

    /// Non-increasing in r.
    pub fn is_monotone(&self) -> bool {
        match *self {
            TailDescriptor::Zero => true,
            TailDescriptor::Geometric { c, q } => c == 0.0 || q <= 1.0,
            TailDescriptor::Polynomial { c, exponent } => c == 0.0 || exponent >= 0.0,
        }
    }

    /// `sup_{r >= from} (1 + r)^k bound(r)`, possibly infinite.
    pub fn weighted_sup(&self, k: u32, from: u64) -> f64 {
        let kf = k as f64;
        match *self {
            TailDescriptor::Zero => 0.0,
            TailDescriptor::Geometric { c, .. } | TailDescriptor::Polynomial { c, .. } if c == 0.0 => 0.0,
            TailDescriptor::Geometric { c, q } => {
                if q > 1.0 || (q == 1.0 && k > 0) {
                    return f64::INFINITY;
                }
                if q == 1.0 {
                    return c;
                }
                if q == 0.0 {
                    return if from == 0 { c } else { 0.0 };
                }
                let h = |r: u64| (1.0 + r as f64).powf(kf) * c * q.powf(r as f64);
                let peak = -kf / q.ln() - 1.0;
                let mut best = h(from);
                if peak > from as f64 {
                    best = best.max(h(peak.floor() as u64)).max(h(peak.ceil() as u64));
                }
                best
            }
            TailDescriptor::Polynomial { c, exponent } => {
                if kf > exponent {
                    f64::INFINITY
                } else if kf == exponent {
                    c
                } else {
                    c * (1.0 + from as f64).powf(kf - exponent)
                }
            }
        }
    }
}

/// Finitely sampled non-negative sequence with an optional tail bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seq {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailDescriptor>,
}

impl Seq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((r, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("sample {r} = {v} is not a finite non-negative number")));
        }
        Ok(Seq { values, tail: None })
    }

    pub fn from_fn(len: usize, f: impl Fn(u64) -> f64) -> Result<Self> {
        Seq::new((0..len as u64).map(f).collect())
    }

    /// Attaches a tail bound; it must dominate the last sample.
    pub fn with_tail(mut self, tail: TailDescriptor) -> Result<Self> {
        if let Some((r, &last)) = self.values.iter().enumerate().last() {
            let b = tail.bound(r as u64);
            if b + 1e-12 * b.abs().max(1.0) < last {
                return Err(Error::Domain(format!(
                    "tail bound {b} at r = {r} does not dominate the sample {last}"
                )));
            }
        }
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sampled value, or the tail bound past the samples.
    pub fn at(&self, r: u64) -> Option<f64> {
        self.values
            .get(r as usize)
            .copied()
            .or_else(|| self.tail.map(|t| t.bound(r)))
    }

    pub fn pointwise_mul(&self, other: &Seq) -> Seq {
        let n = self.len().min(other.len());
        Seq {
            values: (0..n).map(|r| self.values[r] * other.values[r]).collect(),
            tail: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormStatus {
    /// Sampled sup equals the certified sup.
    Exact,
    /// `value <= true norm <= upper`.
    Bracket,
    /// No tail information: `value` is only a lower bound.
    LowerOnly,
    /// The tail bound does not make the sup finite.
    Divergent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqNorm {
    pub value: f64,
    pub upper: f64,
    pub status: NormStatus,
}

/// `|||g|||_k = sup_r (1 + r)^k g(r)`.
pub fn seq_norm(g: &Seq, k: u32) -> SeqNorm {
    let sampled = g
        .values
        .iter()
        .enumerate()
        .map(|(r, v)| (1.0 + r as f64).powi(k as i32) * v)
        .fold(0.0, f64::max);
    match g.tail {
        None => SeqNorm {
            value: sampled,
            upper: f64::INFINITY,
            status: NormStatus::LowerOnly,
        },
        Some(TailDescriptor::Zero) => SeqNorm {
            value: sampled,
            upper: sampled,
            status: NormStatus::Exact,
        },
        Some(t) => {
            let tail = t.weighted_sup(k, g.len() as u64);
            let upper = sampled.max(tail);
            let status = if upper.is_infinite() {
                NormStatus::Divergent
            } else if upper == sampled {
                NormStatus::Exact
            } else {
                NormStatus::Bracket
            };
            SeqNorm {
                value: sampled,
                upper,
                status,
            }
        }
    }
}

/// `g(r) = sup_{s >= r} f(s)`, with the tail bound folded in.
pub fn monotone_envelope(f: &Seq) -> Result<Seq> {
    let beyond = match f.tail {
        None => 0.0,
        Some(t) if t.is_monotone() => t.bound(f.len() as u64),
        Some(_) => return Err(Error::Divergent("tail bound is not non-increasing".into())),
    };
    let mut values = f.values.clone();
    let mut running = beyond;
    for v in values.iter_mut().rev() {
        running = running.max(*v);
        *v = running;
    }
    Ok(Seq { values, tail: f.tail })
}

/// Reproducing functions on the lattice metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReproducingFn {
    /// `scale (1 + r)^-(d - 1 + nu)`
    Polynomial {
        nu: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `scale e^(-a r) (1 + r)^-(d - 1 + nu)`
    #[serde(rename = "expweight")]
    ExpWeight {
        a: f64,
        nu: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `values[floor(r)]`, then `beyond`.
    Tabulated {
        values: Vec<f64>,
        #[serde(default)]
        beyond: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ReproducingFn {
    pub fn polynomial(nu: f64) -> Self {
        ReproducingFn::Polynomial { nu, scale: 1.0 }
    }

    pub fn exp_weight(a: f64, nu: f64) -> Self {
        ReproducingFn::ExpWeight { a, nu, scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(m.to_string()));
        match self {
            ReproducingFn::Polynomial { nu, scale } if !(*nu > 0.0 && *scale > 0.0) => {
                bad("polynomial reproducing function needs nu > 0 and scale > 0")
            }
            ReproducingFn::ExpWeight { a, nu, scale } if !(*a >= 0.0 && *nu > 0.0 && *scale > 0.0) => {
                bad("exponential weight needs a >= 0, nu > 0, scale > 0")
            }
            ReproducingFn::Tabulated { values, beyond }
                if values.iter().chain([beyond]).any(|v| !(v.is_finite() && *v >= 0.0)) =>
            {
                bad("tabulated values must be finite and non-negative")
            }
            _ => Ok(()),
        }
    }

    /// `s F`.
    pub fn scaled(&self, s: f64) -> Self {
        match self.clone() {
            ReproducingFn::Polynomial { nu, scale } => ReproducingFn::Polynomial { nu, scale: scale * s },
            ReproducingFn::ExpWeight { a, nu, scale } => ReproducingFn::ExpWeight { a, nu, scale: scale * s },
            ReproducingFn::Tabulated { values, beyond } => ReproducingFn::Tabulated {
                values: values.iter().map(|v| v * s).collect(),
                beyond: beyond * s,
            },
        }
    }

    pub fn eval(&self, r: f64, d: usize) -> f64 {
        let expo = |nu: f64| d as f64 - 1.0 + nu;
        match self {
            ReproducingFn::Polynomial { nu, scale } => scale * (1.0 + r).powf(-expo(*nu)),
            ReproducingFn::ExpWeight { a, nu, scale } => scale * (-a * r).exp() * (1.0 + r).powf(-expo(*nu)),
            ReproducingFn::Tabulated { values, beyond } => values.get(r.floor() as usize).copied().unwrap_or(*beyond),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformNorm {
    /// `sup_x sum_{y in window} F(d(x, y))`: a lower bound of `||F||`.
    pub window_value: f64,
    /// Analytic upper bound on the infinite lattice, when available.
    pub upper: Option<f64>,
}

/// `||F|| = sup_x sum_y F(d(x, y))`.
pub fn repro_uniform_norm(f: &ReproducingFn, w: &Window) -> Result<UniformNorm> {
    f.validate()?;
    let d = w.dim();
    let mut window_value = 0.0f64;
    for x in 0..w.len() {
        let s: f64 = (0..w.len()).map(|y| f.eval(w.distance(x, y), d)).sum();
        window_value = window_value.max(s);
    }
    let upper = if w.metric().name() == "euclidean" {
        lattice_sum_upper(f, d)
    } else {
        None
    };
    Ok(UniformNorm { window_value, upper })
}

/// Upper bound on `sum_{y in Z^d} F(|y|)` comparing the Euclidean norm with
/// the max-norm, whose spheres hold `(2n+1)^d - (2n-1)^d` sites.
fn lattice_sum_upper(f: &ReproducingFn, d: usize) -> Option<f64> {
    let (nu, a, scale) = match *f {
        ReproducingFn::Polynomial { nu, scale } => (nu, 0.0, scale),
        ReproducingFn::ExpWeight { a, nu, scale } => (nu, a, scale),
        ReproducingFn::Tabulated { .. } => return None,
    };
    if a == 0.0 && nu <= 1.0 {
        return None;
    }
    let n_max: u64 = 10_000;
    let di = d as i32;
    let mut sum = f.eval(0.0, d);
    for n in 1..=n_max {
        let nf = n as f64;
        let shell = (2.0 * nf + 1.0).powi(di) - (2.0 * nf - 1.0).powi(di);
        sum += shell * f.eval(nf, d);
    }
    // shell * F(n) <= d 2^d scale (1+n)^-nu e^(-a n)
    let pref = d as f64 * 2f64.powi(di) * scale;
    let nf = n_max as f64;
    let tail = if a > 0.0 {
        pref * (1.0 + nf).powf(-nu.max(0.0)) * (-a * (nf + 1.0)).exp() / (1.0 - (-a).exp())
    } else {
        pref * (1.0 + nf).powf(1.0 - nu) / (nu - 1.0)
    };
    Some(sum + tail)
}

/// `C_F = sup_{x,y} sum_z F(d(x,z)) F(d(z,y)) / F(d(x,y))` over the window.
pub fn repro_convolution_const(f: &ReproducingFn, w: &Window) -> Result<f64> {
    f.validate()?;
    let n = w.len();
    let d = w.dim();
    let mut table = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            let v = f.eval(w.distance(x, y), d);
            if v <= 0.0 {
                return Err(Error::Domain(format!(
                    "F vanishes at distance {}; reproducing functions must be positive",
                    w.distance(x, y)
                )));
            }
            table[x * n + y] = v;
        }
    }
    let mut best = 0.0f64;
    for x in 0..n {
        for y in x..n {
            let s: f64 = (0..n).map(|z| table[x * n + z] * table[z * n + y]).sum();
            best = best.max(s / table[x * n + y]);
        }
    }
    Ok(best)
}

/// A truncated series with a bound on its remainder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub partial: f64,
    pub tail_bound: f64,
    /// Lower bound on the remainder; 0 when none is derived.
    #[serde(default)]
    pub tail_lower: f64,
}

impl SeriesValue {
    pub fn upper(&self) -> f64 {
        self.partial + self.tail_bound
    }

    pub fn lower(&self) -> f64 {
        self.partial + self.tail_lower
    }

    pub fn midpoint(&self) -> f64 {
        self.partial + 0.5 * (self.tail_lower + self.tail_bound)
    }

    pub fn scaled(&self, s: f64) -> SeriesValue {
        SeriesValue {
            partial: self.partial * s,
            tail_bound: self.tail_bound * s,
            tail_lower: self.tail_lower * s,
        }
    }
}

/// `g_F(t) = sum_{k,l >= 1} (t+k+l-1)^(d-1) F(t+k+l-2)`, regrouped by
/// `m = k + l` with multiplicity `m - 1` and truncated at `m <= cutoff`.
pub fn g_f(f: &ReproducingFn, t: u64, d: usize, cutoff: u64) -> Result<SeriesValue> {
    f.validate()?;
    if cutoff < 2 {
        return Err(Error::Domain("cutoff must be at least 2".into()));
    }
    let tf = t as f64;
    let term = |m: u64| {
        let mf = m as f64;
        (mf - 1.0) * (tf + mf - 1.0).powi(d as i32 - 1) * f.eval(tf + mf - 2.0, d)
    };
    let mut cutoff = cutoff;
    if let ReproducingFn::Tabulated { values, beyond } = f {
        if *beyond > 0.0 {
            return Err(Error::Divergent("tabulated F has a positive constant tail".into()));
        }
        // every term past the table vanishes: sum them all
        cutoff = cutoff.max((values.len() as u64 + 2).saturating_sub(t));
    }
    // small terms first
    let partial: f64 = (2..=cutoff).rev().map(term).sum();
    let mf = cutoff as f64;
    let tail_lower = match *f {
        ReproducingFn::Polynomial { nu, scale } | ReproducingFn::ExpWeight { a: 0.0, nu, scale } if nu > 2.0 => {
            // term = scale ((t+m-1)^(1-nu) - t (t+m-1)^(-nu)), both parts decreasing in m
            let first = (tf + mf).powf(2.0 - nu) / (nu - 2.0);
            let second = tf * (tf + mf - 1.0).powf(1.0 - nu) / (nu - 1.0);
            (scale * (first - second)).max(0.0)
        }
        _ => 0.0,
    };
    let tail_bound = match *f {
        ReproducingFn::Tabulated { .. } => 0.0,
        ReproducingFn::Polynomial { nu, scale } | ReproducingFn::ExpWeight { a: 0.0, nu, scale } => {
            if nu <= 2.0 {
                return Err(Error::Divergent(format!("g_F diverges for nu = {nu} <= 2")));
            }
            // term <= scale (t+m-1)^(1-nu), convex and decreasing in m
            scale * (tf + mf - 0.5).powf(2.0 - nu) / (nu - 2.0)
        }
        ReproducingFn::ExpWeight { a, nu, scale } => {
            let u = |m: f64| scale * (tf + m - 1.0).powf(1.0 - nu) * (-a * (tf + m - 2.0)).exp();
            let ratio = ((tf + mf + 1.0) / (tf + mf)).powf(1.0 - nu).max(1.0) * (-a).exp();
            if ratio >= 1.0 {
                f64::INFINITY
            } else {
                u(mf + 1.0) / (1.0 - ratio)
            }
        }
    };
    Ok(SeriesValue {
        partial,
        tail_bound,
        tail_lower,
    })
}

/// `f_F(r) = K_d^2 g_F(r)`.
pub fn f_f(f: &ReproducingFn, r: u64, consts: &MetricConstants, d: usize, cutoff: u64) -> Result<SeriesValue> {
    Ok(g_f(f, r, d, cutoff)?.scaled(consts.k_d * consts.k_d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn seq_norm_examples() {
        let ind = Seq::new(vec![1.0, 0.0, 0.0]).unwrap().with_tail(TailDescriptor::Zero).unwrap();
        for k in 0..5 {
            let n = seq_norm(&ind, k);
            assert_eq!((n.value, n.status), (1.0, NormStatus::Exact));
        }
        let g = Seq::from_fn(30, |r| 0.5f64.powi(r as i32))
            .unwrap()
            .with_tail(TailDescriptor::Geometric { c: 1.0, q: 0.5 })
            .unwrap();
        let n = seq_norm(&g, 2);
        assert_eq!(n.value, 2.25);
        assert_eq!(n.upper, 2.25);
        let z = Seq::new(vec![0.0; 4]).unwrap();
        assert_eq!(seq_norm(&z, 3).value, 0.0);
    }

    #[test]
    fn seq_norm_without_tail_is_lower_only() {
        let g = Seq::new(vec![1.0, 0.5]).unwrap();
        let n = seq_norm(&g, 1);
        assert_eq!(n.status, NormStatus::LowerOnly);
        assert_eq!(n.value, 1.0);
        assert!(n.upper.is_infinite());
    }

    #[test]
    fn seq_norm_flags_divergence() {
        let g = Seq::from_fn(5, |r| (1.0 + r as f64).powi(-2))
            .unwrap()
            .with_tail(TailDescriptor::Polynomial { c: 1.0, exponent: 2.0 })
            .unwrap();
        assert_eq!(seq_norm(&g, 3).status, NormStatus::Divergent);
        assert_eq!(seq_norm(&g, 2).upper, 1.0);
    }

    #[test]
    fn envelope_examples() {
        let f = Seq::new(vec![1.0, 0.0, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(monotone_envelope(&f).unwrap().values, vec![1.0, 0.5, 0.5, 0.0, 0.0]);
        let mono = Seq::new(vec![3.0, 2.0, 2.0, 1.0]).unwrap();
        assert_eq!(monotone_envelope(&mono).unwrap(), mono);
        let growing = Seq::new(vec![1.0]).unwrap().with_tail(TailDescriptor::Geometric { c: 1.0, q: 2.0 }).unwrap();
        assert!(monotone_envelope(&growing).is_err());
    }

    #[test]
    fn uniform_norm_of_inverse_square() {
        let w = Window::chain(-400, 400).unwrap();
        let f = ReproducingFn::polynomial(2.0);
        let n = repro_uniform_norm(&f, &w).unwrap();
        let exact = 2.0 * PI * PI / 6.0 - 1.0;
        let upper = n.upper.unwrap();
        assert!(n.window_value <= exact && exact <= upper);
        assert!(upper - exact < 1e-3);
        assert!(exact - n.window_value < 1e-2);
    }

    #[test]
    fn uniform_norm_trivial_cases() {
        let w = Window::chain(-10, 10).unwrap();
        let zero = ReproducingFn::Tabulated { values: vec![0.0], beyond: 0.0 };
        assert_eq!(repro_uniform_norm(&zero, &w).unwrap().window_value, 0.0);
        let plain = repro_uniform_norm(&ReproducingFn::polynomial(2.0), &w).unwrap().window_value;
        let damped = repro_uniform_norm(&ReproducingFn::exp_weight(1.0, 2.0), &w).unwrap().window_value;
        assert!(damped < plain);
    }

    #[test]
    fn convolution_constant_cases() {
        let w = Window::chain(-20, 20).unwrap();
        let f = ReproducingFn::polynomial(2.0);
        let c20 = repro_convolution_const(&f, &w).unwrap();
        let c30 = repro_convolution_const(&f, &Window::chain(-30, 30).unwrap()).unwrap();
        assert!(c20 > 0.0 && (c30 - c20).abs() <= 0.05 * c20);

        let small = Window::chain(0, 6).unwrap();
        let flat = ReproducingFn::Tabulated { values: vec![], beyond: 1.0 };
        assert!((repro_convolution_const(&flat, &small).unwrap() - 7.0).abs() < 1e-12);

        let zero_tail = ReproducingFn::Tabulated { values: vec![1.0], beyond: 0.0 };
        assert!(repro_convolution_const(&zero_tail, &small).is_err());

        let mut prev = f64::INFINITY;
        for a in [2.0, 4.0, 8.0, 16.0] {
            let c = repro_convolution_const(&ReproducingFn::exp_weight(a, 2.0), &w).unwrap();
            assert!(c >= 2.0 && c <= prev);
            prev = c;
        }
        // strong damping leaves only the sites between x and y
        let between = (1..=40)
            .map(|dd: i32| {
                (0..=dd)
                    .map(|z| ((1.0 + dd as f64) / ((1.0 + z as f64) * (1.0 + (dd - z) as f64))).powi(2))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        assert!((prev - between).abs() < 1e-6, "{prev} vs {between}");
    }

    #[test]
    fn g_f_examples() {
        let f = ReproducingFn::polynomial(3.0);
        let g = g_f(&f, 0, 1, 10_000).unwrap();
        assert!((g.upper() - PI * PI / 6.0).abs() < 1e-6);
        assert!(g.partial <= PI * PI / 6.0);
        assert!(g.lower() <= PI * PI / 6.0 && PI * PI / 6.0 <= g.upper());
        assert!((g.midpoint() - PI * PI / 6.0).abs() < 1e-8);
        // t > 0: sum_{m >= 2} (m-1) (m+1)^-3 at t = 2
        let head: f64 = (2..2_000_000u64).rev().map(|m| (m as f64 - 1.0) * (m as f64 + 1.0).powi(-3)).sum();
        let exact = head + 1.0 / 2e6;
        let g2 = g_f(&f, 2, 1, 1000).unwrap();
        assert!(g2.lower() <= exact + 1e-9 && exact <= g2.upper() + 1e-9);
        let zero = ReproducingFn::Tabulated { values: vec![0.0; 3], beyond: 0.0 };
        assert_eq!(g_f(&zero, 0, 1, 10).unwrap().upper(), 0.0);
        assert!(matches!(g_f(&ReproducingFn::polynomial(2.0), 0, 1, 100), Err(Error::Divergent(_))));

        let consts = MetricConstants::new(3.0, 2.0);
        let ff = f_f(&f, 0, &consts, 1, 10_000).unwrap();
        assert!((ff.upper() - 4.0 * PI * PI / 6.0).abs() < 4e-6);
    }

    #[test]
    fn g_f_decays_like_power() {
        let f = ReproducingFn::polynomial(3.0);
        // nu - 2 = 1: t g_F(t) stays bounded and positive
        let vals: Vec<f64> = [50u64, 100, 200, 400]
            .iter()
            .map(|&t| t as f64 * g_f(&f, t, 1, 20_000).unwrap().upper())
            .collect();
        for w in vals.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn f_f_for_exponential_weight_is_rapidly_decreasing() {
        let f = ReproducingFn::exp_weight(1.0, 2.0);
        let consts = MetricConstants::new(3.0, 2.0);
        let samples: Vec<f64> = (0..40).map(|r| f_f(&f, r, &consts, 1, 400).unwrap().upper()).collect();
        let seq = Seq::new(samples)
            .unwrap()
            .with_tail(TailDescriptor::Geometric { c: 40.0, q: (-1.0f64).exp() })
            .unwrap();
        for k in 0..=6 {
            let n = seq_norm(&seq, k);
            assert!(n.upper.is_finite(), "k = {k}");
        }
    }
}
