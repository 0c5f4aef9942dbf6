//! Local operator bases: Pauli matrices for qubits, identity plus generalized
//! Gell-Mann matrices for `n > 2`. All elements are Hermitian; the first one
//! is the identity.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

const PRODUCT_EPS: f64 = 1e-14;

#[derive(Debug)]
pub struct LocalBasis {
    pub dim: usize,
    pub mats: Vec<DMatrix<C64>>,
    /// `Tr(E_k^* E_k)`.
    pub hs_norms: Vec<f64>,
    /// Operator norms of the basis elements.
    pub op_norms: Vec<f64>,
    /// `E_a E_b = sum_c products[a][b] (c, coeff)`.
    products: Vec<Vec<Vec<(u16, C64)>>>,
}

fn build(n: usize) -> LocalBasis {
    let zero = C64::new(0.0, 0.0);
    let unit = |i: usize, j: usize, v: C64| {
        let mut m = DMatrix::from_element(n, n, zero);
        m[(i, j)] = v;
        m
    };
    let mut mats = vec![DMatrix::<C64>::identity(n, n)];
    for k in 1..n {
        for j in 0..k {
            mats.push(unit(j, k, C64::new(1.0, 0.0)) + unit(k, j, C64::new(1.0, 0.0)));
            mats.push(unit(j, k, C64::new(0.0, -1.0)) + unit(k, j, C64::new(0.0, 1.0)));
        }
        let scale = (2.0 / (k * (k + 1)) as f64).sqrt();
        let mut d = DMatrix::from_element(n, n, zero);
        for m in 0..k {
            d[(m, m)] = C64::new(scale, 0.0);
        }
        d[(k, k)] = C64::new(-scale * k as f64, 0.0);
        mats.push(d);
    }
    let hs_norms: Vec<f64> = mats
        .iter()
        .map(|m| m.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let op_norms = mats
        .iter()
        .map(|m| {
            nalgebra::SymmetricEigen::new(m.clone())
                .eigenvalues
                .iter()
                .fold(0.0f64, |a, &e| a.max(e.abs()))
        })
        .collect();
    let q = mats.len();
    let mut products = vec![vec![Vec::new(); q]; q];
    for a in 0..q {
        for b in 0..q {
            let p = &mats[a] * &mats[b];
            for c in 0..q {
                // E_c is Hermitian, so Tr(E_c^* P) = sum conj(E_c) .* P
                let coeff: C64 = mats[c]
                    .iter()
                    .zip(p.iter())
                    .map(|(e, x)| e.conj() * x)
                    .sum::<C64>()
                    / hs_norms[c];
                let clean = C64::new(snap(coeff.re), snap(coeff.im));
                if clean.norm() > PRODUCT_EPS {
                    products[a][b].push((c as u16, clean));
                }
            }
        }
    }
    LocalBasis {
        dim: n,
        mats,
        hs_norms,
        op_norms,
        products,
    }
}

fn snap(x: f64) -> f64 {
    if x.abs() < PRODUCT_EPS {
        0.0
    } else {
        x
    }
}

impl LocalBasis {
    /// Shared basis for local dimension `n`.
    pub fn get(n: usize) -> Arc<LocalBasis> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<LocalBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(build(n))).clone()
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn product(&self, a: u16, b: u16) -> &[(u16, C64)] {
        &self.products[a as usize][b as usize]
    }

    pub fn label(&self, k: u16) -> String {
        if self.dim == 2 {
            ["I", "X", "Y", "Z"][k as usize].to_string()
        } else if k == 0 {
            "I".to_string()
        } else {
            format!("g{k}")
        }
    }

    pub fn parse_label(&self, text: &str) -> Option<u16> {
        let t = text.trim();
        let idx = match (self.dim, t) {
            (_, "I") => Some(0),
            (2, "X") => Some(1),
            (2, "Y") => Some(2),
            (2, "Z") => Some(3),
            _ => t.strip_prefix('g').unwrap_or(t).parse::<u16>().ok(),
        }?;
        ((idx as usize) < self.len()).then_some(idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn qubit_basis_is_pauli() {
        let b = LocalBasis::get(2);
        let x = &b.mats[1];
        let y = &b.mats[2];
        let z = &b.mats[3];
        assert_eq!(x[(0, 1)], c(1.0, 0.0));
        assert_eq!(y[(0, 1)], c(0.0, -1.0));
        assert_eq!(y[(1, 0)], c(0.0, 1.0));
        assert_eq!(z[(1, 1)], c(-1.0, 0.0));
        // X Z = -i Y
        assert_eq!(b.product(1, 3), &[(2, c(0.0, -1.0))]);
        assert_eq!(b.product(3, 3), &[(0, c(1.0, 0.0))]);
    }

    #[test]
    fn gell_mann_orthogonality() {
        for n in 2..=4 {
            let b = LocalBasis::get(n);
            assert_eq!(b.len(), n * n);
            for (k, m) in b.mats.iter().enumerate().skip(1) {
                assert!(m.trace().norm() < 1e-14);
                assert!((m - m.adjoint()).norm() < 1e-14);
                assert!((b.hs_norms[k] - 2.0).abs() < 1e-12);
            }
            for i in 0..b.len() {
                for j in 0..b.len() {
                    if i != j {
                        let t = (b.mats[i].adjoint() * &b.mats[j]).trace();
                        assert!(t.norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn structure_constants_reproduce_products() {
        let b = LocalBasis::get(3);
        for i in 0..9u16 {
            for j in 0..9u16 {
                let want = &b.mats[i as usize] * &b.mats[j as usize];
                let mut got = DMatrix::from_element(3, 3, c(0.0, 0.0));
                for &(k, v) in b.product(i, j) {
                    got += &b.mats[k as usize] * v;
                }
                assert!((want - got).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn labels_roundtrip() {
        let b = LocalBasis::get(2);
        for k in 0..4u16 {
            assert_eq!(b.parse_label(&b.label(k)), Some(k));
        }
        let g = LocalBasis::get(3);
        assert_eq!(g.parse_label("g8"), Some(8));
        assert_eq!(g.parse_label("g9"), None);
    }
}
