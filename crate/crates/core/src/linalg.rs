//! Linear algebra over `ℤ/p^k`.
//!
//! Elimination uses full pivoting on the entry of least `p`-valuation, taking
//! the first such entry in row-major order. Free variables are set to zero.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{inverse_mod, residue, valuation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMatrix {
    pub p: u64,
    pub modulus: BigInt,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<BigInt>>,
}

#[derive(Debug, Clone)]
struct Echelon {
    /// Reduced matrix, rows/cols permuted.
    a: Vec<Vec<BigInt>>,
    col_perm: Vec<usize>,
    /// `p`-valuation of each pivot.
    pivots: Vec<u32>,
}

impl ModMatrix {
    pub fn new(p: u64, modulus: BigInt, data: Vec<Vec<BigInt>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        let mut m = ModMatrix { p, modulus, rows, cols, data };
        m.normalize();
        m
    }

    pub fn zeros(p: u64, modulus: BigInt, rows: usize, cols: usize) -> Self {
        ModMatrix { p, modulus, rows, cols, data: vec![vec![BigInt::zero(); cols]; rows] }
    }

    fn normalize(&mut self) {
        for row in self.data.iter_mut() {
            assert_eq!(row.len(), self.cols, "ragged matrix");
            for x in row.iter_mut() {
                *x = residue(x, &self.modulus);
            }
        }
    }

    fn val(&self, x: &BigInt) -> Option<u32> {
        if x.is_zero() {
            None
        } else {
            valuation(x, self.p)
        }
    }

    fn echelon(&self, rhs: Option<&[BigInt]>) -> (Echelon, Option<Vec<BigInt>>) {
        let m = &self.modulus;
        let mut a = self.data.clone();
        let mut b = rhs.map(|r| r.iter().map(|x| residue(x, m)).collect::<Vec<_>>());
        let mut col_perm: Vec<usize> = (0..self.cols).collect();
        let mut pivots = Vec::new();
        for r in 0..self.rows.min(self.cols) {
            let mut best: Option<(u32, usize, usize)> = None;
            for i in r..self.rows {
                for j in r..self.cols {
                    if let Some(v) = self.val(&a[i][j]) {
                        if best.is_none_or(|(bv, _, _)| v < bv) {
                            best = Some((v, i, j));
                        }
                    }
                }
                if best.is_some_and(|(v, _, _)| v == 0) {
                    break;
                }
            }
            let Some((v, pi, pj)) = best else { break };
            a.swap(r, pi);
            if let Some(b) = b.as_mut() {
                b.swap(r, pi);
            }
            for row in a.iter_mut() {
                row.swap(r, pj);
            }
            col_perm.swap(r, pj);
            let pv = num_traits::pow(BigInt::from(self.p), v as usize);
            let unit = &a[r][r] / &pv;
            let uinv = inverse_mod(&unit, m).expect("pivot cofactor is a unit");
            for i in r + 1..self.rows {
                if a[i][r].is_zero() {
                    continue;
                }
                let f = residue(&(&a[i][r] / &pv * &uinv), m);
                let (top, bottom) = a.split_at_mut(i);
                for (x, y) in bottom[0].iter_mut().zip(&top[r]).skip(r) {
                    *x = residue(&(&*x - &f * y), m);
                }
                if let Some(b) = b.as_mut() {
                    let br = b[r].clone();
                    b[i] = residue(&(&b[i] - &f * br), m);
                }
            }
            pivots.push(v);
        }
        (Echelon { a, col_perm, pivots }, b)
    }

    /// Number of nonzero pivots.
    pub fn rank(&self) -> usize {
        self.echelon(None).0.pivots.len()
    }

    /// Number of unit pivots: the dimension of the image modulo `p`.
    pub fn unit_rank(&self) -> usize {
        self.echelon(None).0.pivots.iter().filter(|&&v| v == 0).count()
    }

    /// The map `(ℤ/p^k)^cols → (ℤ/p^k)^rows` is onto.
    pub fn is_surjective(&self) -> bool {
        self.unit_rank() == self.rows
    }

    /// Square and invertible.
    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.is_surjective()
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.data
            .iter()
            .map(|row| residue(&row.iter().zip(x).fold(BigInt::zero(), |acc, (a, b)| acc + a * b), &self.modulus))
            .collect()
    }

    /// Some `x` with `A x = b`, or [`Error::NoSolution`].
    pub fn solve(&self, b: &[BigInt]) -> Result<Vec<BigInt>> {
        assert_eq!(b.len(), self.rows);
        let m = &self.modulus;
        let (ech, rhs) = self.echelon(Some(b));
        let rhs = rhs.unwrap();
        let rank = ech.pivots.len();
        if rhs[rank..].iter().any(|x| !x.is_zero()) {
            return Err(Error::NoSolution);
        }
        let mut y = vec![BigInt::zero(); self.cols];
        for r in (0..rank).rev() {
            let mut t = rhs[r].clone();
            for c in r + 1..rank {
                t -= &ech.a[r][c] * &y[c];
            }
            let t = residue(&t, m);
            let pv = num_traits::pow(BigInt::from(self.p), ech.pivots[r] as usize);
            if !(residue(&t, &pv)).is_zero() {
                return Err(Error::NoSolution);
            }
            let unit = &ech.a[r][r] / &pv;
            let reduced_mod = m / &pv;
            let uinv = inverse_mod(&unit, m).unwrap();
            y[r] = residue(&(&t / &pv * uinv), &reduced_mod);
        }
        let mut x = vec![BigInt::zero(); self.cols];
        for (pos, &orig) in ech.col_perm.iter().enumerate() {
            x[orig] = y[pos].clone();
        }
        debug_assert_eq!(self.apply(&x), b.iter().map(|v| residue(v, m)).collect::<Vec<_>>());
        Ok(x)
    }
}
