//! Exact `inf_B ||A - B||` over `B = X (x) 1_R` by a log-barrier interior
//! point method, with a primal value (attained `B`) and a dual lower bound.
//!
//! The dense matrix of `A` uses the ordering `[kept sites..., R...]`, so the
//! kept factor of dimension `q` is the most significant one.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::algebra::dense::{self, CMat};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug)]
pub struct Outcome {
    pub lower: f64,
    pub upper: f64,
    /// Attained `X` on the kept factor.
    pub x: CMat,
    pub newton_steps: usize,
}

/// Sparse `q x q` matrix.
type Sparse = Vec<(usize, usize, C64)>;

fn adjoint(s: &Sparse) -> Sparse {
    s.iter().map(|&(i, j, v)| (j, i, v.conj())).collect()
}

/// Real basis of the variable space: Hermitian matrices or all matrices.
fn variable_basis(q: usize, hermitian: bool) -> Vec<Sparse> {
    let one = C64::new(1.0, 0.0);
    let i_ = C64::new(0.0, 1.0);
    let mut out = Vec::new();
    if hermitian {
        for i in 0..q {
            out.push(vec![(i, i, one)]);
            for j in i + 1..q {
                out.push(vec![(i, j, one), (j, i, one)]);
                out.push(vec![(i, j, i_), (j, i, -i_)]);
            }
        }
    } else {
        for i in 0..q {
            for j in 0..q {
                out.push(vec![(i, j, one)]);
                out.push(vec![(i, j, i_)]);
            }
        }
    }
    out
}

pub fn variable_count(q: usize, hermitian: bool) -> usize {
    if hermitian {
        q * q
    } else {
        2 * q * q
    }
}

fn assemble(basis: &[Sparse], y: &[f64], q: usize) -> CMat {
    let mut x = CMat::from_element(q, q, ZERO);
    for (b, &c) in basis.iter().zip(y) {
        for &(i, j, v) in b {
            x[(i, j)] += v * c;
        }
    }
    x
}

fn kron_identity(x: &CMat, nr: usize) -> CMat {
    let q = x.nrows();
    let mut out = CMat::from_element(q * nr, q * nr, ZERO);
    for i in 0..q {
        for j in 0..q {
            let v = x[(i, j)];
            if v != ZERO {
                for r in 0..nr {
                    out[(i * nr + r, j * nr + r)] = v;
                }
            }
        }
    }
    out
}

/// `Tr_R(T)` as a `q x q` matrix.
fn partial_trace(t: &CMat, q: usize, nr: usize) -> CMat {
    let mut out = CMat::from_element(q, q, ZERO);
    for a in 0..q {
        for b in 0..q {
            out[(a, b)] = (0..nr).map(|r| t[(a * nr + r, b * nr + r)]).sum();
        }
    }
    out
}

/// `Tr(T (X (x) 1))` for sparse `X`, given `Tr_R(T)`.
fn trace_with(pt: &CMat, x: &Sparse) -> C64 {
    x.iter().map(|&(i, j, v)| v * pt[(j, i)]).sum()
}

/// `K[(i,j),(k,l)] = Tr(T1 (E_ij (x) 1) T2 (E_kl (x) 1))`.
struct PairTensor {
    q: usize,
    data: Vec<C64>,
}

impl PairTensor {
    fn new(t1: &CMat, t2: &CMat, q: usize, nr: usize) -> Self {
        let mut data = vec![ZERO; q * q * q * q];
        for i in 0..q {
            for j in 0..q {
                for k in 0..q {
                    for l in 0..q {
                        let mut acc = ZERO;
                        for r in 0..nr {
                            for s in 0..nr {
                                acc += t1[(l * nr + r, i * nr + s)] * t2[(j * nr + s, k * nr + r)];
                            }
                        }
                        data[((i * q + j) * q + k) * q + l] = acc;
                    }
                }
            }
        }
        PairTensor { q, data }
    }

    fn form(&self, x: &Sparse, y: &Sparse) -> C64 {
        let q = self.q;
        let mut acc = ZERO;
        for &(i, j, a) in x {
            for &(k, l, b) in y {
                acc += a * b * self.data[((i * q + j) * q + k) * q + l];
            }
        }
        acc
    }
}

fn block(m: &CMat, r0: usize, c0: usize, n: usize) -> CMat {
    m.view((r0, c0), (n, n)).into_owned()
}

/// Barrier state at a feasible point.
struct Point {
    logdet: f64,
    /// Hermitian case: `[(tI - E)^-1, (tI + E)^-1]`; general case: the
    /// inverse of the dilation `[[tI, -E], [-E^*, tI]]`.
    inv: Vec<CMat>,
}

struct Problem<'a> {
    a: &'a CMat,
    q: usize,
    nr: usize,
    hermitian: bool,
    basis: Vec<Sparse>,
    adj: Vec<Sparse>,
}

fn chol_logdet_inverse(s: CMat) -> Option<(f64, CMat)> {
    let ch = Cholesky::new(s)?;
    let l = ch.l_dirty();
    let mut logdet = 0.0;
    for i in 0..l.nrows() {
        // a negative pivot comes back as a nearly imaginary square root
        let d = l[(i, i)].re;
        if !(d > 0.0 && d.is_finite() && l[(i, i)].im.abs() <= 1e-8 * d) {
            return None;
        }
        logdet += 2.0 * d.ln();
    }
    Some((logdet, ch.inverse()))
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.q * self.nr
    }

    /// Barrier dimension.
    fn barrier_dim(&self) -> f64 {
        2.0 * self.n() as f64
    }

    fn residual(&self, y: &[f64]) -> CMat {
        self.a - kron_identity(&assemble(&self.basis, y, self.q), self.nr)
    }

    fn point(&self, t: f64, y: &[f64]) -> Option<Point> {
        let n = self.n();
        let e = self.residual(y);
        let id = CMat::identity(n, n) * C64::new(t, 0.0);
        if self.hermitian {
            let (l1, t1) = chol_logdet_inverse(&id - &e)?;
            let (l2, t2) = chol_logdet_inverse(&id + &e)?;
            Some(Point {
                logdet: l1 + l2,
                inv: vec![t1, t2],
            })
        } else {
            let mut s = CMat::identity(2 * n, 2 * n) * C64::new(t, 0.0);
            s.view_mut((0, n), (n, n)).copy_from(&(-&e));
            s.view_mut((n, 0), (n, n)).copy_from(&(-e.adjoint()));
            let (l, inv) = chol_logdet_inverse(s)?;
            Some(Point { logdet: l, inv: vec![inv] })
        }
    }

    /// Gradient and Hessian of `-log det S` in `(t, y)`.
    fn derivatives(&self, p: &Point) -> (DVector<f64>, DMatrix<f64>) {
        let (q, nr) = (self.q, self.nr);
        let m = self.basis.len();
        let mut g = DVector::zeros(m + 1);
        let mut h = DMatrix::zeros(m + 1, m + 1);
        if self.hermitian {
            let (t1, t2) = (&p.inv[0], &p.inv[1]);
            let sq1 = dense::matmul(t1, t1);
            let sq2 = dense::matmul(t2, t2);
            g[0] = -(t1.trace() + t2.trace()).re;
            h[(0, 0)] = (sq1.trace() + sq2.trace()).re;
            let (pt1, pt2) = (partial_trace(t1, q, nr), partial_trace(t2, q, nr));
            let (ps1, ps2) = (partial_trace(&sq1, q, nr), partial_trace(&sq2, q, nr));
            let k1 = PairTensor::new(t1, t1, q, nr);
            let k2 = PairTensor::new(t2, t2, q, nr);
            for (a, xa) in self.basis.iter().enumerate() {
                g[a + 1] = -(trace_with(&pt1, xa) - trace_with(&pt2, xa)).re;
                let cross = (trace_with(&ps1, xa) - trace_with(&ps2, xa)).re;
                h[(0, a + 1)] = cross;
                h[(a + 1, 0)] = cross;
                for (b, xb) in self.basis.iter().enumerate().skip(a) {
                    let v = (k1.form(xa, xb) + k2.form(xa, xb)).re;
                    h[(a + 1, b + 1)] = v;
                    h[(b + 1, a + 1)] = v;
                }
            }
        } else {
            let n = self.n();
            let t = &p.inv[0];
            let sq = dense::matmul(t, t);
            g[0] = -t.trace().re;
            h[(0, 0)] = sq.trace().re;
            let (t11, t12, t21, t22) = (block(t, 0, 0, n), block(t, 0, n, n), block(t, n, 0, n), block(t, n, n, n));
            let (pt12, pt21) = (partial_trace(&t12, q, nr), partial_trace(&t21, q, nr));
            let (ps12, ps21) = (
                partial_trace(&block(&sq, 0, n, n), q, nr),
                partial_trace(&block(&sq, n, 0, n), q, nr),
            );
            let k_21 = PairTensor::new(&t21, &t21, q, nr);
            let k_1122 = PairTensor::new(&t11, &t22, q, nr);
            let k_2211 = PairTensor::new(&t22, &t11, q, nr);
            let k_12 = PairTensor::new(&t12, &t12, q, nr);
            for (a, (xa, xa_h)) in self.basis.iter().zip(&self.adj).enumerate() {
                g[a + 1] = -(trace_with(&pt21, xa) + trace_with(&pt12, xa_h)).re;
                let cross = (trace_with(&ps21, xa) + trace_with(&ps12, xa_h)).re;
                h[(0, a + 1)] = cross;
                h[(a + 1, 0)] = cross;
                for (b, (xb, xb_h)) in self.basis.iter().zip(&self.adj).enumerate().skip(a) {
                    let v = (k_21.form(xa, xb) + k_1122.form(xa, xb_h) + k_2211.form(xa_h, xb) + k_12.form(xa_h, xb_h)).re;
                    h[(a + 1, b + 1)] = v;
                    h[(b + 1, a + 1)] = v;
                }
            }
        }
        (g, h)
    }

    /// Lower bound from the projected dual matrix at `p`.
    fn dual_bound(&self, p: &Point) -> f64 {
        let n = self.n();
        let w = if self.hermitian {
            &p.inv[0] - &p.inv[1]
        } else {
            block(&p.inv[0], 0, n, n)
        };
        let pt = partial_trace(&w, self.q, self.nr) / C64::new(self.nr as f64, 0.0);
        let w_perp = &w - kron_identity(&pt, self.nr);
        let denom = dense::trace_norm(&w_perp);
        if denom == 0.0 {
            return 0.0;
        }
        let num: C64 = w_perp.iter().zip(self.a.iter()).map(|(x, a)| x.conj() * a).sum();
        num.norm() / denom
    }
}

fn newton_direction(g: &DVector<f64>, h: &DMatrix<f64>) -> DVector<f64> {
    let mut reg = 0.0;
    let scale = h.diagonal().amax().max(1e-300);
    loop {
        let mut hr = h.clone();
        for i in 0..hr.nrows() {
            hr[(i, i)] += reg;
        }
        if let Some(ch) = Cholesky::new(hr) {
            return -ch.solve(g);
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 10.0 };
    }
}

/// Minimizes `||A - X (x) 1_R||` over `X` (Hermitian `X` when `A` is
/// Hermitian). `a` must be normalized to a moderate scale by the caller.
pub fn solve(a: &CMat, q: usize, nr: usize, hermitian: bool, gap_target: f64, max_newton: usize) -> Outcome {
    let basis = variable_basis(q, hermitian);
    let adj = basis.iter().map(adjoint).collect();
    let prob = Problem {
        a,
        q,
        nr,
        hermitian,
        basis,
        adj,
    };
    let m = prob.basis.len();

    // warm start: the conditional expectation onto the kept factor
    let ce = partial_trace(a, q, nr) / C64::new(nr as f64, 0.0);
    let mut y: Vec<f64> = prob
        .basis
        .iter()
        .map(|b| {
            // v is 1 or i: the coordinate is the real or imaginary part
            let (i, j, v) = b[0];
            (ce[(i, j)] * v.conj()).re
        })
        .collect();
    let start_norm = dense::dense_norm(&prob.residual(&y));
    let mut t = 1.1 * start_norm + 1e-3;

    let nbar = prob.barrier_dim();
    let mut tau = nbar / t.max(1e-3);
    let mut steps = 0usize;
    let mut current = prob.point(t, &y).expect("strictly feasible start");
    loop {
        // centering
        loop {
            let (mut g, h) = prob.derivatives(&current);
            g[0] += tau;
            let dir = newton_direction(&g, &h);
            let decrement = -g.dot(&dir);
            if decrement < 1e-12 || steps >= max_newton {
                break;
            }
            steps += 1;
            let phi0 = tau * t - current.logdet;
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-12 {
                let tn = t + alpha * dir[0];
                let yn: Vec<f64> = (0..m).map(|i| y[i] + alpha * dir[i + 1]).collect();
                if let Some(p) = prob.point(tn, &yn) {
                    let phi = tau * tn - p.logdet;
                    if phi <= phi0 - 0.25 * alpha * decrement {
                        t = tn;
                        y = yn;
                        current = p;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if nbar / tau < gap_target || steps >= max_newton {
            break;
        }
        tau *= 10.0;
    }

    let x = assemble(&prob.basis, &y, q);
    let upper = dense::dense_norm(&prob.residual(&y));
    let lower = prob.dual_bound(&current).min(upper);
    Outcome {
        lower,
        upper,
        x,
        newton_steps: steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn scalar_case_matches_spectral_midpoint() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.0), c(0.3, 0.0), c(-0.4, 0.0)]);
        let out = solve(&a, 1, 2, true, 1e-10, 800);
        let ev = dense::hermitian_eigenvalues(&a);
        let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let want = (hi - lo) / 2.0;
        assert!((out.upper - want).abs() < 1e-8, "{} vs {want}", out.upper);
        assert!(out.upper - out.lower < 1e-7);
    }

    #[test]
    fn general_scalar_case() {
        // diag(1, i): the best scalar is the circle center (1 + i) / 2
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(0.0, 1.0)]);
        let out = solve(&a, 1, 2, false, 1e-10, 800);
        let want = 0.5f64.sqrt();
        assert!((out.upper - want).abs() < 1e-8);
        assert!(out.upper - out.lower < 1e-7);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let a = CMat::from_fn(4, 4, |i, j| c((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.07));
        for hermitian in [false, true] {
            let a = if hermitian { (&a + a.adjoint()) * c(0.5, 0.0) } else { a.clone() };
            let basis = variable_basis(2, hermitian);
            let adj = basis.iter().map(adjoint).collect();
            let prob = Problem {
                a: &a,
                q: 2,
                nr: 2,
                hermitian,
                basis,
                adj,
            };
            let m = prob.basis.len();
            let y: Vec<f64> = (0..m).map(|i| 0.05 * i as f64).collect();
            let t = 5.0;
            let p = prob.point(t, &y).unwrap();
            let (g, h) = prob.derivatives(&p);
            let f = |t: f64, y: &[f64]| -prob.point(t, y).unwrap().logdet;
            let eps = 1e-5;
            for i in 0..=m {
                let shift = |s: f64| {
                    let mut tt = t;
                    let mut yy = y.clone();
                    if i == 0 {
                        tt += s;
                    } else {
                        yy[i - 1] += s;
                    }
                    (tt, yy)
                };
                let (tp, yp) = shift(eps);
                let (tm, ym) = shift(-eps);
                let fd = (f(tp, &yp) - f(tm, &ym)) / (2.0 * eps);
                assert!((fd - g[i]).abs() < 1e-6, "gradient {i}: {fd} vs {}", g[i]);
                let gp = prob.derivatives(&prob.point(tp, &yp).unwrap()).0;
                let gm = prob.derivatives(&prob.point(tm, &ym).unwrap()).0;
                for j in 0..=m {
                    let fdh = (gp[j] - gm[j]) / (2.0 * eps);
                    assert!((fdh - h[(j, i)]).abs() < 1e-6, "hessian {j},{i}: {fdh} vs {}", h[(j, i)]);
                }
            }
        }
    }
}
