//! Strictly increasing label functions `Z -> Z` driving flips and shifts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRule {
    /// `sum_k c_k j^k`
    Poly(Vec<i64>),
    /// `c sgn(j) j^2`
    PolySignedSquare(i64),
    /// `values[j - start]` on a finite domain.
    Table { start: i64, values: Vec<i64> },
}

impl LabelRule {
    pub fn eval(&self, j: i64) -> Result<i64> {
        let overflow = || Error::Domain(format!("label function overflows at j = {j}"));
        match self {
            LabelRule::Poly(coeffs) => {
                let mut acc: i128 = 0;
                for &c in coeffs.iter().rev() {
                    acc = acc
                        .checked_mul(j as i128)
                        .and_then(|v| v.checked_add(c as i128))
                        .ok_or_else(overflow)?;
                }
                i64::try_from(acc).map_err(|_| overflow())
            }
            LabelRule::PolySignedSquare(c) => {
                let v = (*c as i128) * (j.signum() as i128) * (j as i128) * (j as i128);
                i64::try_from(v).map_err(|_| overflow())
            }
            LabelRule::Table { start, values } => usize::try_from(j - start)
                .ok()
                .and_then(|i| values.get(i).copied())
                .ok_or_else(|| Error::Domain(format!("label table does not cover j = {j}"))),
        }
    }
}

/// A validated label function with the search range it was checked on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelFunction {
    rule: LabelRule,
    lo: i64,
    hi: i64,
}

impl LabelFunction {
    /// Checks strict increase (and `zeta(j+1) - zeta(j) >= min_gap`) on
    /// every label that can land in `[x_lo, x_hi]`.
    pub fn new(rule: LabelRule, x_lo: i64, x_hi: i64, min_gap: i64) -> Result<Self> {
        let z0 = rule.eval(0)?;
        let lo = (x_lo - z0).min(0) - 2;
        let hi = (x_hi - z0).max(0) + 2;
        let mut prev = rule.eval(lo)?;
        for j in lo + 1..=hi {
            let v = rule.eval(j)?;
            if v - prev < min_gap {
                return Err(Error::Domain(format!(
                    "label function gap {} at j = {} is below {min_gap}",
                    v - prev,
                    j - 1
                )));
            }
            prev = v;
        }
        Ok(LabelFunction { rule, lo, hi })
    }

    pub fn rule(&self) -> &LabelRule {
        &self.rule
    }

    pub fn eval(&self, j: i64) -> Result<i64> {
        self.rule.eval(j)
    }

    /// Largest `j` with `zeta(j) <= x`.
    pub fn floor_index(&self, x: i64) -> Result<i64> {
        if self.rule.eval(self.lo)? > x || self.rule.eval(self.hi)? <= x {
            return Err(Error::Domain(format!("coordinate {x} lies outside the validated label range")));
        }
        let (mut a, mut b) = (self.lo, self.hi);
        // invariant: zeta(a) <= x < zeta(b)
        while b - a > 1 {
            let mid = a + (b - a) / 2;
            if self.rule.eval(mid)? <= x {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(a)
    }

    /// `j` with `zeta(j) = x`, if any.
    pub fn index_of(&self, x: i64) -> Result<Option<i64>> {
        let j = self.floor_index(x)?;
        Ok((self.rule.eval(j)? == x).then_some(j))
    }

    /// `max{zeta(n) - 1, |zeta(-m)|} + 1`.
    pub fn special_radius(&self, m: i64, n: i64) -> Result<u64> {
        let a = self.rule.eval(n)? - 1;
        let b = self.rule.eval(-m)?.abs();
        Ok((a.max(b) + 1).max(0) as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_evaluate() {
        assert_eq!(LabelRule::Poly(vec![0, 2]).eval(-3).unwrap(), -6);
        assert_eq!(LabelRule::Poly(vec![-1, 3]).eval(2).unwrap(), 5);
        let q = LabelRule::PolySignedSquare(2);
        assert_eq!((-2..=2).map(|j| q.eval(j).unwrap()).collect::<Vec<_>>(), vec![-8, -2, 0, 2, 8]);
        let t = LabelRule::Table { start: -1, values: vec![-3, 0, 4] };
        assert_eq!(t.eval(1).unwrap(), 4);
        assert!(t.eval(2).is_err());
    }

    #[test]
    fn floor_index_inverts() {
        let f = LabelFunction::new(LabelRule::PolySignedSquare(2), -50, 50, 2).unwrap();
        for x in -50..=50 {
            let j = f.floor_index(x).unwrap();
            assert!(f.eval(j).unwrap() <= x && x < f.eval(j + 1).unwrap());
        }
        assert_eq!(f.index_of(8).unwrap(), Some(2));
        assert_eq!(f.index_of(7).unwrap(), None);
    }

    #[test]
    fn validation_rejects_small_gaps() {
        assert!(LabelFunction::new(LabelRule::Poly(vec![0, 1]), -5, 5, 2).is_err());
        assert!(LabelFunction::new(LabelRule::Poly(vec![0, 1]), -5, 5, 1).is_ok());
        assert!(LabelFunction::new(LabelRule::Poly(vec![0, 0, 1]), -5, 5, 1).is_err());
    }

    #[test]
    fn special_radii() {
        let f = LabelFunction::new(LabelRule::PolySignedSquare(2), -100, 100, 2).unwrap();
        // r_{0,n} = zeta(n) once zeta(n) - 1 >= |zeta(0)|
        for n in 1..5 {
            assert_eq!(f.special_radius(0, n).unwrap(), 2 * (n * n) as u64);
        }
    }
}
