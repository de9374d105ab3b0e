//! Free nilpotent quotients `F/γ_{c+1}` in Mal'cev coordinates.
//!
//! An element is stored as exact integer exponents `e_k` with
//! `g = ∏ b_k^{e_k}` over the Hall basis in order. Coordinates are reduced
//! modulo `p^M` only when observed (equality, JSON, filtration weight), since
//! residues mod `p^M` are not closed under the group law for small `p`.
//!
//! Collection goes through the Magnus embedding: the series of a word is
//! formed, then basis factors are peeled off weight by weight, reading each
//! weight's exponents from the homogeneous part via the Hall echelon form.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{GradedBasis, GradedElement};
use crate::hall::{HallBasis, Structure};
use crate::scalar::{binomial, is_prime, residue, valuation, Scalar};
use crate::series::Series;
use crate::word::{FreeWord, GeneratorSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationParams {
    pub p: u64,
    /// `p^m`, or 0 for the lower central series.
    pub q: u64,
    pub class: usize,
    /// Exponent modulus is `p^modulus_exp`.
    pub modulus_exp: u32,
}

impl TruncationParams {
    /// Parameters with the default exponent modulus.
    pub fn new(p: u64, q: u64, class: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        if class == 0 {
            return Err(Error::InvalidParams("class must be at least 1".into()));
        }
        let m = if q == 0 {
            0
        } else {
            let mut m = 0;
            let mut x = q;
            while x % p == 0 {
                x /= p;
                m += 1;
            }
            if x != 1 || m == 0 {
                return Err(Error::InvalidParams(format!("q = {q} is neither 0 nor a power of {p}")));
            }
            m
        };
        let modulus_exp = if q == 0 { class as u32 + 3 } else { m * (class as u32 + 1) + 2 };
        Ok(TruncationParams { p, q, class, modulus_exp })
    }

    pub fn with_modulus(self, modulus_exp: u32) -> Result<Self> {
        if (modulus_exp as usize) < self.class {
            return Err(Error::InvalidParams(format!(
                "modulus exponent {modulus_exp} below class {}",
                self.class
            )));
        }
        Ok(TruncationParams { modulus_exp, ..self })
    }

    pub fn with_class(self, class: usize) -> Result<Self> {
        Self::new(self.p, self.q, class)
    }

    /// `m` with `q = p^m`; 0 when `q = 0`.
    pub fn m(&self) -> u32 {
        if self.q == 0 {
            0
        } else {
            valuation(&BigInt::from(self.q), self.p).unwrap_or(0)
        }
    }

    pub fn modulus(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.p), self.modulus_exp as usize)
    }

    /// Coefficient ring of the graded pieces: `ℤ/q`, or `ℤ/p^M` when `q = 0`.
    pub fn graded_modulus(&self) -> BigInt {
        if self.q == 0 {
            self.modulus()
        } else {
            BigInt::from(self.q)
        }
    }
}

#[derive(Debug, Clone)]
pub struct MalcevElement<T> {
    params: TruncationParams,
    coords: Vec<T>,
}

impl<T: Scalar> MalcevElement<T> {
    pub fn params(&self) -> TruncationParams {
        self.params
    }

    /// Exact exponents.
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Exponents reduced into `[0, p^M)`.
    pub fn residues(&self) -> Vec<BigInt> {
        let m = self.params.modulus();
        self.coords.iter().map(|c| residue(&c.to_bigint(), &m)).collect()
    }

    pub fn is_identity(&self) -> bool {
        let m = self.params.modulus();
        self.coords.iter().all(|c| residue(&c.to_bigint(), &m).is_zero())
    }
}

impl<T: Scalar> PartialEq for MalcevElement<T> {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.coords.len() == other.coords.len() && self.residues() == other.residues()
    }
}

impl<T: Scalar> Eq for MalcevElement<T> {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalcevJson {
    pub hall: Vec<(usize, Structure)>,
    pub coords: Vec<String>,
}

/// Collection context for one rank and one set of truncation parameters.
#[derive(Debug, Clone)]
pub struct Collector<T> {
    params: TruncationParams,
    basis: Arc<HallBasis>,
    /// `powers[k][i]` is `P_k^{i+1}` with `P_k = M(b_k) − 1`.
    powers: Vec<Vec<Series<T>>>,
}

impl<T: Scalar> Collector<T> {
    pub fn new(rank: usize, params: TruncationParams) -> Result<Self> {
        let basis = Arc::new(HallBasis::new(rank, params.class)?);
        Ok(Self::with_basis(basis, params))
    }

    pub fn with_basis(basis: Arc<HallBasis>, params: TruncationParams) -> Self {
        assert_eq!(basis.max_weight(), params.class, "Hall basis weight must equal the class");
        let (r, c) = (basis.rank(), params.class);
        let mut magnus: Vec<(Series<T>, Series<T>)> = Vec::with_capacity(basis.len());
        for e in basis.entries() {
            let m = match e.structure {
                Structure::Generator(g) => Series::gen_power(r, c, g - 1, &BigInt::one()),
                Structure::Bracket(a, b) => {
                    let (ma, ia) = &magnus[a];
                    let (mb, ib) = &magnus[b];
                    ia.mul(ib).mul(ma).mul(mb)
                }
            };
            let inv = m.inverse();
            magnus.push((m, inv));
        }
        let one = Series::one(r, c);
        let powers = basis
            .entries()
            .iter()
            .zip(&magnus)
            .map(|(e, (m, _))| {
                let p = m - &one;
                let mut out = vec![p.clone()];
                for _ in 1..c / e.weight {
                    let next = out.last().unwrap().mul(&p);
                    out.push(next);
                }
                out
            })
            .collect();
        Collector { params, basis, powers }
    }

    pub fn params(&self) -> TruncationParams {
        self.params
    }

    pub fn basis(&self) -> &HallBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> Arc<HallBasis> {
        self.basis.clone()
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn class(&self) -> usize {
        self.params.class
    }

    pub fn graded_basis(&self) -> GradedBasis {
        GradedBasis::new(self.basis.clone(), self.params)
    }

    pub fn identity(&self) -> MalcevElement<T> {
        MalcevElement { params: self.params, coords: vec![T::zero(); self.basis.len()] }
    }

    pub fn from_coords(&self, coords: Vec<T>) -> Result<MalcevElement<T>> {
        if coords.len() != self.basis.len() {
            return Err(Error::InvalidParams(format!(
                "expected {} coordinates, got {}",
                self.basis.len(),
                coords.len()
            )));
        }
        Ok(MalcevElement { params: self.params, coords })
    }

    /// `b_k^e` for a single Hall basis entry.
    pub fn basis_power(&self, k: usize, e: &BigInt) -> MalcevElement<T> {
        let mut out = self.identity();
        out.coords[k] = T::from_bigint(e);
        out
    }

    /// Generator `index` (1-based).
    pub fn generator(&self, index: usize) -> Result<MalcevElement<T>> {
        if index == 0 || index > self.rank() {
            return Err(Error::GeneratorOutOfRange { index, rank: self.rank() });
        }
        Ok(self.basis_power(index - 1, &BigInt::one()))
    }

    fn check(&self, a: &MalcevElement<T>) -> Result<()> {
        if a.params != self.params || a.coords.len() != self.basis.len() {
            return Err(Error::ParamMismatch);
        }
        Ok(())
    }

    /// `(1 + P_k)^e`
    fn factor(&self, k: usize, e: &BigInt) -> Series<T> {
        let mut s = Series::one(self.rank(), self.class());
        for (i, pk) in self.powers[k].iter().enumerate() {
            let c = binomial(e, i as u32 + 1);
            if !c.is_zero() {
                s.add_scaled(pk, &T::from_bigint(&c));
            }
        }
        s
    }

    /// Magnus image of an element.
    pub fn series(&self, a: &MalcevElement<T>) -> Series<T> {
        let mut s = Series::one(self.rank(), self.class());
        for (k, e) in a.coords.iter().enumerate() {
            if !e.is_zero() {
                s = s.mul(&self.factor(k, &e.to_bigint()));
            }
        }
        s
    }

    /// Mal'cev coordinates of a group-like series (constant term 1).
    pub fn peel(&self, mut s: Series<T>) -> MalcevElement<T> {
        let c = self.class();
        let mut coords = vec![T::zero(); self.basis.len()];
        for w in 1..=c {
            let range = self.basis.weight_range(w);
            let Some(block) = s.block_ref(w) else { continue };
            let e = self
                .basis
                .solve_homogeneous(w, block)
                .expect("leading part of a group-like series is a Lie element");
            for (k, ek) in range.zip(e) {
                if ek.is_zero() {
                    continue;
                }
                if w < c {
                    s = self.factor(k, &-ek.to_bigint()).mul(&s);
                }
                coords[k] = ek;
            }
        }
        MalcevElement { params: self.params, coords }
    }

    pub fn collect(&self, w: &FreeWord) -> Result<MalcevElement<T>> {
        if w.gens().rank() != self.rank() {
            return Err(Error::RankMismatch { word: w.gens().rank(), basis: self.rank() });
        }
        Ok(self.peel(Series::from_word(w, self.class())))
    }

    pub fn multiply(&self, a: &MalcevElement<T>, b: &MalcevElement<T>) -> Result<MalcevElement<T>> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.peel(self.series(a).mul(&self.series(b))))
    }

    pub fn product<'a, I>(&self, items: I) -> Result<MalcevElement<T>>
    where
        I: IntoIterator<Item = &'a MalcevElement<T>>,
    {
        let mut s = Series::one(self.rank(), self.class());
        for a in items {
            self.check(a)?;
            s = s.mul(&self.series(a));
        }
        Ok(self.peel(s))
    }

    pub fn power(&self, a: &MalcevElement<T>, k: &BigInt) -> Result<MalcevElement<T>> {
        self.check(a)?;
        Ok(self.peel(self.series(a).pow(k)))
    }

    pub fn inverse(&self, a: &MalcevElement<T>) -> Result<MalcevElement<T>> {
        self.check(a)?;
        Ok(self.peel(self.series(a).inverse()))
    }

    /// `[a, b] = a⁻¹b⁻¹ab`
    pub fn commutator(&self, a: &MalcevElement<T>, b: &MalcevElement<T>) -> Result<MalcevElement<T>> {
        self.check(a)?;
        self.check(b)?;
        let (sa, sb) = (self.series(a), self.series(b));
        Ok(self.peel(sa.inverse().mul(&sb.inverse()).mul(&sa).mul(&sb)))
    }

    /// `a^g = g⁻¹ag`
    pub fn conjugate(&self, a: &MalcevElement<T>, g: &MalcevElement<T>) -> Result<MalcevElement<T>> {
        self.check(a)?;
        self.check(g)?;
        let sg = self.series(g);
        Ok(self.peel(sg.inverse().mul(&self.series(a)).mul(&sg)))
    }

    /// Image of a word under `x_i ↦ images[i]`.
    pub fn evaluate(&self, w: &FreeWord, images: &[MalcevElement<T>]) -> Result<MalcevElement<T>> {
        if images.len() != w.gens().rank() {
            return Err(Error::ImageCountMismatch { expected: w.gens().rank(), got: images.len() });
        }
        let series: Vec<Series<T>> = images
            .iter()
            .map(|a| self.check(a).map(|_| self.series(a)))
            .collect::<Result<_>>()?;
        let mut s = Series::one(self.rank(), self.class());
        for (g, e) in w.letters() {
            s = s.mul(&series[g - 1].pow(e));
        }
        Ok(self.peel(s))
    }

    /// Smallest `j` with `a ∈ G_j`; `c + 1` when `a` is trivial to tracked depth.
    pub fn filtration_weight(&self, a: &MalcevElement<T>) -> usize {
        let c = self.class();
        let m = self.params.m() as usize;
        let modulus = self.params.modulus();
        let mut best = c + 1;
        for (k, x) in a.coords.iter().enumerate() {
            let r = residue(&x.to_bigint(), &modulus);
            if r.is_zero() {
                continue;
            }
            let w = self.basis.weight(k);
            let bound = if m == 0 {
                w
            } else {
                w + valuation(&r, self.params.p).unwrap() as usize / m
            };
            best = best.min(bound);
        }
        best
    }

    /// Image of `a ∈ G_j` in `gr_j`.
    pub fn project_gr(&self, a: &MalcevElement<T>, j: usize) -> Result<GradedElement> {
        self.check(a)?;
        if j == 0 || j > self.class() {
            return Err(Error::WeightOverflow { weight: j, class: self.class() });
        }
        let have = self.filtration_weight(a);
        if have < j {
            return Err(Error::WeightPrecondition { need: j, have });
        }
        let gb = self.graded_basis();
        let modulus = self.params.graded_modulus();
        let mut coeffs = vec![BigInt::zero(); gb.dim(j)];
        for w in 1..=j {
            if self.params.q == 0 && w < j {
                continue;
            }
            let div = num_traits::pow(BigInt::from(self.params.q), j - w);
            for k in self.basis.weight_range(w) {
                let x = a.coords[k].to_bigint();
                let exact = residue(&x, &(&div * &modulus));
                coeffs[gb.index(j, j - w, k)] = residue(&(exact / &div), &modulus);
            }
        }
        Ok(GradedElement::new(j, coeffs))
    }

    pub fn to_json(&self, a: &MalcevElement<T>) -> MalcevJson {
        MalcevJson {
            hall: self.basis.describe(),
            coords: a.residues().iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn from_json(&self, j: &MalcevJson) -> Result<MalcevElement<T>> {
        if j.hall != self.basis.describe() {
            return Err(Error::ParamMismatch);
        }
        let coords = j
            .coords
            .iter()
            .map(|s| {
                s.parse::<BigInt>()
                    .map(|v| T::from_bigint(&v))
                    .map_err(|e| Error::InvalidParams(format!("bad coordinate {s:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        self.from_coords(coords)
    }

    /// Word spelling of Hall entry `k` as an iterated commutator.
    pub fn basis_word(&self, gens: GeneratorSet, k: usize) -> Result<FreeWord> {
        match self.basis.entries()[k].structure {
            Structure::Generator(g) => FreeWord::generator(gens, g),
            Structure::Bracket(a, b) => self.basis_word(gens, a)?.commutator(&self.basis_word(gens, b)?),
        }
    }
}
