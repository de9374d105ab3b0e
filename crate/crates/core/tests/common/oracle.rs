//! Truncated Magnus series as sparse maps from monomials to integers,
//! sharing nothing with the library's dense series.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use pd2::hall::Structure;
use pd2::{FreeWord, HallBasis};

pub type Sparse = BTreeMap<Vec<u8>, BigInt>;

pub struct Oracle {
    pub deg: usize,
    hall: Vec<Sparse>,
}

/// `e(e−1)⋯(e−k+1)/k!` for any integer `e`.
pub fn choose(e: &BigInt, k: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= e - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

impl Oracle {
    pub fn new(basis: &HallBasis) -> Self {
        let deg = basis.max_weight();
        let mut o = Oracle { deg, hall: Vec::new() };
        let mut hall: Vec<Sparse> = Vec::new();
        for e in basis.entries() {
            let s = match e.structure {
                Structure::Generator(g) => o.letter_power(g, &BigInt::one()),
                Structure::Bracket(a, b) => o.commutator(&hall[a], &hall[b]),
            };
            hall.push(s);
        }
        o.hall = hall;
        o
    }

    pub fn one() -> Sparse {
        BTreeMap::from([(vec![], BigInt::one())])
    }

    pub fn mul(&self, a: &Sparse, b: &Sparse) -> Sparse {
        let mut out = Sparse::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                if ma.len() + mb.len() > self.deg {
                    continue;
                }
                let mut m = ma.clone();
                m.extend(mb);
                *out.entry(m).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    fn minus_one(s: &Sparse) -> Sparse {
        let mut t = s.clone();
        *t.entry(vec![]).or_insert_with(BigInt::zero) -= 1;
        t.retain(|_, c| !c.is_zero());
        t
    }

    /// `(1 + t)^e = Σ_k C(e, k) t^k` for `s = 1 + t`.
    pub fn power(&self, s: &Sparse, e: &BigInt) -> Sparse {
        let t = Self::minus_one(s);
        let mut out = Self::one();
        let mut tk = Self::one();
        for k in 1..=self.deg {
            tk = self.mul(&tk, &t);
            let c = choose(e, k);
            for (m, v) in &tk {
                *out.entry(m.clone()).or_insert_with(BigInt::zero) += &c * v;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn letter_power(&self, g: usize, e: &BigInt) -> Sparse {
        let x = BTreeMap::from([(vec![], BigInt::one()), (vec![g as u8], BigInt::one())]);
        self.power(&x, e)
    }

    pub fn inverse(&self, s: &Sparse) -> Sparse {
        self.power(s, &BigInt::from(-1))
    }

    pub fn commutator(&self, a: &Sparse, b: &Sparse) -> Sparse {
        let ia = self.inverse(a);
        let ib = self.inverse(b);
        self.mul(&self.mul(&ia, &ib), &self.mul(a, b))
    }

    pub fn word(&self, w: &FreeWord) -> Sparse {
        w.letters().iter().fold(Self::one(), |acc, (g, e)| self.mul(&acc, &self.letter_power(*g, e)))
    }

    /// `Π_k M(b_k)^{e_k}` in Hall order.
    pub fn from_coords(&self, coords: &[BigInt]) -> Sparse {
        coords
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .fold(Self::one(), |acc, (k, e)| self.mul(&acc, &self.power(&self.hall[k], e)))
    }

    pub fn max_abs(s: &Sparse) -> BigInt {
        s.values().map(|c| c.abs()).max().unwrap_or_default()
    }
}
