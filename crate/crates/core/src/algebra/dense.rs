//! Dense helpers on tensor-product spaces: basis transforms, embeddings,
//! dense conditional expectations, matrix products and spectral norms.
//!
//! Layout: the first listed site is the most significant factor, so a
//! product operator is `E_1 (x) E_2 (x) ...` in the usual Kronecker order.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::basis::LocalBasis;

pub type CMat = DMatrix<C64>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn product(dims: &[usize]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n))
}

/// Applies a `q x q` matrix along one axis of a row-major tensor.
fn apply_axis(data: &[C64], shape: &[usize], axis: usize, k: &CMat) -> Vec<C64> {
    let q = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![ZERO; data.len()];
    // sparse columns keep the Pauli case cheap
    let cols: Vec<Vec<(usize, C64)>> = (0..q)
        .map(|b| {
            (0..q)
                .filter_map(|a| {
                    let v = k[(a, b)];
                    (v != ZERO).then_some((a, v))
                })
                .collect()
        })
        .collect();
    for o in 0..outer {
        let base = o * q * inner;
        for (b, col) in cols.iter().enumerate() {
            let src = &data[base + b * inner..base + (b + 1) * inner];
            for &(a, v) in col {
                let dst = &mut out[base + a * inner..base + (a + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        }
    }
    out
}

/// Maps interleaved `(i1 j1)(i2 j2)...` order to the row/column layout.
fn interleaved_to_matrix(data: &[C64], dims: &[usize]) -> CMat {
    let n: usize = dims.iter().product();
    let mut m = CMat::from_element(n, n, ZERO);
    for (flat, &v) in data.iter().enumerate() {
        if v == ZERO {
            continue;
        }
        let (mut rest, mut row, mut col) = (flat, 0, 0);
        let mut mult = 1;
        for &d in dims.iter().rev() {
            let pair = rest % (d * d);
            rest /= d * d;
            row += (pair / d) * mult;
            col += (pair % d) * mult;
            mult *= d;
        }
        m[(row, col)] = v;
    }
    m
}

fn matrix_to_interleaved(m: &CMat, dims: &[usize]) -> Vec<C64> {
    let n: usize = dims.iter().product();
    let mut out = vec![ZERO; n * n];
    for col in 0..n {
        for row in 0..n {
            let v = m[(row, col)];
            if v == ZERO {
                continue;
            }
            let (mut r, mut c, mut flat, mut mult) = (row, col, 0, 1);
            for &d in dims.iter().rev() {
                flat += ((r % d) * d + c % d) * mult;
                r /= d;
                c /= d;
                mult *= d * d;
            }
            out[flat] = v;
        }
    }
    out
}

fn synthesis_matrix(basis: &LocalBasis) -> CMat {
    let n = basis.dim;
    let q = n * n;
    let mut k = CMat::from_element(q, q, ZERO);
    for (b, e) in basis.mats.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                k[(i * n + j, b)] = e[(i, j)];
            }
        }
    }
    k
}

fn analysis_matrix(basis: &LocalBasis) -> CMat {
    let n = basis.dim;
    let q = n * n;
    let mut k = CMat::from_element(q, q, ZERO);
    for (b, e) in basis.mats.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                k[(b, i * n + j)] = e[(i, j)].conj() / basis.hs_norms[b];
            }
        }
    }
    k
}

/// Builds `sum_b c_b E_{b_1} (x) ... (x) E_{b_k}` from a row-major
/// coefficient tensor of shape `[n_1^2, ..., n_k^2]`.
pub fn coeffs_to_dense(dims: &[usize], coeffs: &[C64]) -> CMat {
    let shape: Vec<usize> = dims.iter().map(|n| n * n).collect();
    let mut data = coeffs.to_vec();
    for (axis, &n) in dims.iter().enumerate() {
        data = apply_axis(&data, &shape, axis, &synthesis_matrix(&LocalBasis::get(n)));
    }
    interleaved_to_matrix(&data, dims)
}

/// Inverse of [`coeffs_to_dense`].
pub fn dense_to_coeffs(dims: &[usize], m: &CMat) -> Vec<C64> {
    let shape: Vec<usize> = dims.iter().map(|n| n * n).collect();
    let mut data = matrix_to_interleaved(m, dims);
    for (axis, &n) in dims.iter().enumerate() {
        data = apply_axis(&data, &shape, axis, &analysis_matrix(&LocalBasis::get(n)));
    }
    data
}

/// Splits each basis index into (selected digits, other digits).
fn split_indices(dims: &[usize], selected: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let n: usize = dims.iter().product();
    let mut sel = vec![0; n];
    let mut other = vec![0; n];
    for (idx, (s_out, o_out)) in sel.iter_mut().zip(other.iter_mut()).enumerate() {
        let (mut rest, mut s, mut o, mut ms, mut mo) = (idx, 0, 0, 1, 1);
        for (pos, &d) in dims.iter().enumerate().rev() {
            let digit = rest % d;
            rest /= d;
            if selected[pos] {
                s += digit * ms;
                ms *= d;
            } else {
                o += digit * mo;
                mo *= d;
            }
        }
        *s_out = s;
        *o_out = o;
    }
    (sel, other)
}

/// Dense conditional expectation `(1/n_L) Tr_L(M) (x) 1_L` over the factor
/// positions in `traced`.
pub fn trace_out(m: &CMat, dims: &[usize], traced: &[usize]) -> CMat {
    let mut mask = vec![false; dims.len()];
    for &p in traced {
        mask[p] = true;
    }
    let n_l: usize = traced.iter().map(|&p| dims[p]).product();
    let (tr, keep) = split_indices(dims, &mask);
    let n_keep = m.nrows() / n_l;
    let mut reduced = CMat::from_element(n_keep, n_keep, ZERO);
    let n = m.nrows();
    for col in 0..n {
        for row in 0..n {
            if tr[row] == tr[col] {
                reduced[(keep[row], keep[col])] += m[(row, col)];
            }
        }
    }
    let scale = 1.0 / n_l as f64;
    let mut out = CMat::from_element(n, n, ZERO);
    for col in 0..n {
        for row in 0..n {
            if tr[row] == tr[col] {
                out[(row, col)] = reduced[(keep[row], keep[col])] * scale;
            }
        }
    }
    out
}

/// Embeds an operator on the factors `positions` of a larger product space
/// (tensoring with the identity elsewhere).
pub fn embed(m: &CMat, dims: &[usize], positions: &[usize]) -> CMat {
    let mut mask = vec![false; dims.len()];
    for &p in positions {
        mask[p] = true;
    }
    let (sub, rest) = split_indices(dims, &mask);
    let n: usize = dims.iter().product();
    let mut out = CMat::from_element(n, n, ZERO);
    for col in 0..n {
        for row in 0..n {
            if rest[row] == rest[col] {
                out[(row, col)] = m[(sub[row], sub[col])];
            }
        }
    }
    out
}

/// Complex matrix product through a blocked kernel.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMat::from_element(m, n, ZERO);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: nalgebra stores column-major contiguous data; Complex64 is
    // repr(C) with layout [f64; 2]; strides describe exactly these buffers.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// `a * b` skipping the zero entries of `b`; cheap when `b` is sparse.
pub fn matmul_sparse_right(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let nnz = b.iter().filter(|z| **z != ZERO).count();
    if nnz * 8 > b.nrows() * b.ncols() {
        return matmul(a, b);
    }
    let mut c = CMat::from_element(a.nrows(), b.ncols(), ZERO);
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            let v = b[(i, j)];
            if v != ZERO {
                let mut col = c.column_mut(j);
                col.axpy(v, &a.column(i), C64::new(1.0, 0.0));
            }
        }
    }
    c
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    let n = m.nrows();
    if n != m.ncols() {
        return false;
    }
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut h = m.clone();
    // symmetrize away rounding so the solver sees an exact Hermitian input
    let n = h.nrows();
    for i in 0..n {
        for j in i..n {
            let v = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

/// Spectral norm by dense factorization.
pub fn dense_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    if is_hermitian(m, 1e-14 * scale) {
        hermitian_eigenvalues(m)
            .iter()
            .fold(0.0f64, |a, &e| a.max(e.abs()))
    } else {
        singular_values(m).into_iter().fold(0.0, f64::max)
    }
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    if is_hermitian(m, 1e-14 * scale) {
        hermitian_eigenvalues(m).iter().map(|e| e.abs()).sum()
    } else {
        singular_values(m).iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosResult {
    pub value: f64,
    pub residual: f64,
    pub steps: usize,
}

/// Largest `|lambda|` of a Hermitian operator given by its action, using
/// Lanczos with full reorthogonalization from a fixed start vector.
pub fn lanczos_max_abs(
    n: usize,
    apply: &mut dyn FnMut(&[C64], &mut [C64]),
    tol: f64,
    max_steps: usize,
) -> LanczosResult {
    if n == 0 {
        return LanczosResult {
            value: 0.0,
            residual: 0.0,
            steps: 0,
        };
    }
    let max_steps = max_steps.min(n).max(1);
    // deterministic, non-degenerate start
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut v: Vec<C64> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let a = (state >> 11) as f64 / (1u64 << 53) as f64;
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let b = (state >> 11) as f64 / (1u64 << 53) as f64;
            C64::new(a - 0.5, b - 0.5)
        })
        .collect();
    normalize(&mut v);
    let mut basis: Vec<Vec<C64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; n];
    let mut best = LanczosResult {
        value: 0.0,
        residual: f64::INFINITY,
        steps: 0,
    };
    for step in 0..max_steps {
        apply(&basis[step], &mut w);
        let alpha = dot(&basis[step], &w).re;
        alphas.push(alpha);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let beta = norm(&w);
        let done = beta <= 1e-14 * alpha.abs().max(1e-300) || step + 1 == max_steps;
        if step % 4 == 3 || done {
            let (theta, last) = extreme_ritz(&alphas, &betas);
            let residual = beta * last.abs();
            best = LanczosResult {
                value: theta.abs(),
                residual: if beta <= 1e-14 * alpha.abs().max(1e-300) { 0.0 } else { residual },
                steps: step + 1,
            };
            if done || residual <= tol * theta.abs().max(1e-300) {
                break;
            }
        }
        betas.push(beta);
        let next: Vec<C64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
    best
}

/// Extreme-magnitude eigenvalue of the Lanczos tridiagonal and the last
/// component of its eigenvector.
fn extreme_ritz(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut best = 0;
    for i in 0..k {
        if eig.eigenvalues[i].abs() > eig.eigenvalues[best].abs() {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors[(k - 1, best)])
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [C64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

/// Spectral norm with a residual: dense factorization up to `dense_cap`,
/// Lanczos beyond (directly on Hermitian input, else on the dilation).
pub fn norm_bracket(m: &CMat, dense_cap: usize, tol: f64) -> LanczosResult {
    let n = m.nrows().max(m.ncols());
    if n <= dense_cap {
        return LanczosResult {
            value: dense_norm(m),
            residual: 0.0,
            steps: 0,
        };
    }
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return LanczosResult {
            value: 0.0,
            residual: 0.0,
            steps: 0,
        };
    }
    if is_hermitian(m, 1e-14 * scale) {
        let mut apply = |x: &[C64], y: &mut [C64]| {
            y.iter_mut().for_each(|v| *v = ZERO);
            for (j, &xj) in x.iter().enumerate() {
                if xj == ZERO {
                    continue;
                }
                for (yi, mij) in y.iter_mut().zip(m.column(j).iter()) {
                    *yi += mij * xj;
                }
            }
        };
        lanczos_max_abs(n, &mut apply, tol, 300)
    } else {
        lanczos_norm(m, tol, 300)
    }
}

/// Spectral norm of a general dense matrix through Lanczos on its Hermitian
/// dilation `[[0, M], [M^*, 0]]`.
pub fn lanczos_norm(m: &CMat, tol: f64, max_steps: usize) -> LanczosResult {
    let (r, c) = (m.nrows(), m.ncols());
    let mut apply = |x: &[C64], y: &mut [C64]| {
        let (top, bottom) = x.split_at(r);
        let (ytop, ybottom) = y.split_at_mut(r);
        // y_top = M x_bottom, y_bottom = M^* x_top
        ytop.iter_mut().for_each(|v| *v = ZERO);
        for j in 0..c {
            let xj = bottom[j];
            if xj == ZERO {
                continue;
            }
            let col = m.column(j);
            for i in 0..r {
                ytop[i] += col[i] * xj;
            }
        }
        for j in 0..c {
            let col = m.column(j);
            let mut acc = ZERO;
            for i in 0..r {
                acc += col[i].conj() * top[i];
            }
            ybottom[j] = acc;
        }
    };
    lanczos_max_abs(r + c, &mut apply, tol, max_steps)
}
