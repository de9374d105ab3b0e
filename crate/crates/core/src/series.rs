//! Truncated non-commutative power series in `X₁..X_r`, dense per degree.
//!
//! Generator `g` maps to `1 + X_g`; everything above degree `deg` is dropped.
//! A degree-`d` monomial `X_{a₁}⋯X_{a_d}` sits at `a₁·r^(d−1) + … + a_d` in
//! block `d`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::scalar::{binomial, Scalar};
use crate::word::FreeWord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series<T> {
    rank: usize,
    deg: usize,
    /// `blocks[d]` is empty when the degree-`d` part is zero.
    blocks: Vec<Vec<T>>,
}

impl<T: Scalar> Series<T> {
    pub fn zero(rank: usize, deg: usize) -> Self {
        Series { rank, deg, blocks: vec![Vec::new(); deg + 1] }
    }

    pub fn one(rank: usize, deg: usize) -> Self {
        let mut s = Self::zero(rank, deg);
        s.blocks[0] = vec![T::one()];
        s
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    fn block_len(&self, d: usize) -> usize {
        self.rank.pow(d as u32)
    }

    /// Dense degree-`d` part (zeros materialised).
    pub fn block(&self, d: usize) -> Vec<T> {
        if self.blocks[d].is_empty() {
            vec![T::zero(); self.block_len(d)]
        } else {
            self.blocks[d].clone()
        }
    }

    pub fn block_ref(&self, d: usize) -> Option<&[T]> {
        if self.blocks[d].is_empty() {
            None
        } else {
            Some(&self.blocks[d])
        }
    }

    fn block_mut(&mut self, d: usize) -> &mut Vec<T> {
        if self.blocks[d].is_empty() {
            self.blocks[d] = vec![T::zero(); self.block_len(d)];
        }
        &mut self.blocks[d]
    }

    pub fn set_block(&mut self, d: usize, data: Vec<T>) {
        assert_eq!(data.len(), self.block_len(d));
        self.blocks[d] = if data.iter().all(|x| x.is_zero()) { Vec::new() } else { data };
    }

    /// Coefficient of the monomial with the given 0-based letters.
    pub fn coeff(&self, letters: &[usize]) -> T {
        let d = letters.len();
        if d > self.deg || self.blocks[d].is_empty() {
            return T::zero();
        }
        let code = letters.iter().fold(0, |acc, &a| acc * self.rank + a);
        self.blocks[d][code].clone()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|x| x.is_zero()))
    }

    pub fn is_one(&self) -> bool {
        (&self.clone() - &Self::one(self.rank, self.deg)).is_zero()
    }

    /// Lowest degree with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        (0..=self.deg).find(|&d| self.blocks[d].iter().any(|x| !x.is_zero()))
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = self.clone();
        for b in out.blocks.iter_mut() {
            for x in b.iter_mut() {
                *x = x.clone() * c.clone();
            }
        }
        out
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &Self, c: &T) {
        for d in 0..=self.deg {
            if let Some(src) = other.block_ref(d) {
                let dst = self.block_mut(d);
                for (x, y) in dst.iter_mut().zip(src) {
                    x.add_mul(c, y);
                }
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rank, self.deg), (other.rank, other.deg));
        let mut out = Self::zero(self.rank, self.deg);
        for da in 0..=self.deg {
            let Some(a) = self.block_ref(da) else { continue };
            for db in 0..=self.deg - da {
                let Some(b) = other.block_ref(db) else { continue };
                let sb = b.len();
                let dst = out.block_mut(da + db);
                for (i, x) in a.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let row = &mut dst[i * sb..(i + 1) * sb];
                    for (o, y) in row.iter_mut().zip(b) {
                        o.add_mul(x, y);
                    }
                }
            }
        }
        out.prune();
        out
    }

    fn prune(&mut self) {
        for b in self.blocks.iter_mut() {
            if b.iter().all(|x| x.is_zero()) {
                b.clear();
            }
        }
    }

    /// `(1 + X_g)^e` for a 0-based generator `g`.
    pub fn gen_power(rank: usize, deg: usize, g: usize, e: &BigInt) -> Self {
        let mut out = Self::one(rank, deg);
        for k in 1..=deg {
            let c = binomial(e, k as u32);
            if c.is_zero() {
                continue;
            }
            let code = (0..k).fold(0, |acc, _| acc * rank + g);
            out.block_mut(k)[code] = T::from_bigint(&c);
        }
        out.prune();
        out
    }

    /// Right multiplication by `(1 + X_g)^e`, without forming a full product.
    pub fn mul_gen_power(&self, g: usize, e: &BigInt) -> Self {
        let coeffs: Vec<T> = (0..=self.deg).map(|k| T::from_bigint(&binomial(e, k as u32))).collect();
        let mut out = Self::zero(self.rank, self.deg);
        for d in 0..=self.deg {
            let Some(src) = self.block_ref(d) else { continue };
            for (k, c) in coeffs.iter().enumerate().take(self.deg - d + 1) {
                if c.is_zero() {
                    continue;
                }
                let tail = (0..k).fold(0, |acc, _| acc * self.rank + g);
                let shift = self.rank.pow(k as u32);
                let dst = out.block_mut(d + k);
                for (i, x) in src.iter().enumerate() {
                    if !x.is_zero() {
                        dst[i * shift + tail].add_mul(x, c);
                    }
                }
            }
        }
        out.prune();
        out
    }

    /// Magnus image of a word (generators are 1-based in the word).
    pub fn from_word(word: &FreeWord, deg: usize) -> Self {
        let rank = word.gens().rank();
        word.letters()
            .iter()
            .fold(Self::one(rank, deg), |acc, (g, e)| acc.mul_gen_power(g - 1, e))
    }

    /// Inverse of a series with constant term 1.
    pub fn inverse(&self) -> Self {
        let one = Self::one(self.rank, self.deg);
        let p = self - &one;
        let mut x = one.clone();
        for _ in 0..self.deg {
            x = &one - &p.mul(&x);
        }
        x
    }

    /// Integer power of a series with constant term 1.
    pub fn pow(&self, e: &BigInt) -> Self {
        let base = if e.is_negative() { self.inverse() } else { self.clone() };
        let mut k = e.abs();
        let mut acc = Self::one(self.rank, self.deg);
        let mut sq = base;
        let two = BigInt::from(2);
        while !k.is_zero() {
            if (&k % &two) == BigInt::from(1) {
                acc = acc.mul(&sq);
            }
            k /= &two;
            if !k.is_zero() {
                sq = sq.mul(&sq);
            }
        }
        acc
    }
}

impl<T: Scalar> std::ops::Sub for &Series<T> {
    type Output = Series<T>;
    fn sub(self, rhs: &Series<T>) -> Series<T> {
        let mut out = self.clone();
        out.add_scaled(rhs, &-T::one());
        out.prune();
        out
    }
}

impl<T: Scalar> std::ops::Add for &Series<T> {
    type Output = Series<T>;
    fn add(self, rhs: &Series<T>) -> Series<T> {
        let mut out = self.clone();
        out.add_scaled(rhs, &T::one());
        out.prune();
        out
    }
}
