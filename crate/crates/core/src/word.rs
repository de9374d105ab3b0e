//! Words in a free group on `x₁..x_n, s₁..s_b`.
//!
//! Generators are numbered `1..=n` for the `x`'s and `n+1..=n+b` for the
//! `s`'s. Exponents are unbounded integers; nothing is truncated here.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub n: usize,
    pub b: usize,
}

impl GeneratorSet {
    pub fn new(n: usize, b: usize) -> Result<Self> {
        if n + b == 0 {
            return Err(Error::InvalidGeneratorSet { n, b });
        }
        Ok(GeneratorSet { n, b })
    }

    pub fn rank(&self) -> usize {
        self.n + self.b
    }

    /// Index of `x_i` (1-based).
    pub fn x(&self, i: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.n);
        i
    }

    /// Index of `s_i` (1-based).
    pub fn s(&self, i: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.b);
        self.n + i
    }

    pub fn check(&self, index: usize) -> Result<()> {
        if index == 0 || index > self.rank() {
            Err(Error::GeneratorOutOfRange { index, rank: self.rank() })
        } else {
            Ok(())
        }
    }

    pub fn name(&self, index: usize) -> String {
        if index <= self.n {
            format!("x{index}")
        } else {
            format!("s{}", index - self.n)
        }
    }
}

/// A freely reduced word: adjacent letters never share a generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeWord {
    gens: GeneratorSet,
    letters: Vec<(usize, BigInt)>,
}

impl FreeWord {
    pub fn identity(gens: GeneratorSet) -> Self {
        FreeWord { gens, letters: Vec::new() }
    }

    pub fn generator(gens: GeneratorSet, index: usize) -> Result<Self> {
        Self::from_letters(gens, [(index, BigInt::one())])
    }

    pub fn gen_power(gens: GeneratorSet, index: usize, e: impl Into<BigInt>) -> Result<Self> {
        Self::from_letters(gens, [(index, e.into())])
    }

    /// Builds a word from raw `(generator, exponent)` letters, reducing freely.
    pub fn from_letters<I>(gens: GeneratorSet, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, BigInt)>,
    {
        let mut w = FreeWord::identity(gens);
        for (g, e) in raw {
            gens.check(g)?;
            w.push(g, e);
        }
        Ok(w)
    }

    /// Convenience for tests and fixtures: small exponents.
    pub fn from_pairs(gens: GeneratorSet, raw: &[(usize, i64)]) -> Result<Self> {
        Self::from_letters(gens, raw.iter().map(|&(g, e)| (g, BigInt::from(e))))
    }

    fn push(&mut self, g: usize, e: BigInt) {
        if e.is_zero() {
            return;
        }
        if let Some(last) = self.letters.last_mut() {
            if last.0 == g {
                last.1 += e;
                if last.1.is_zero() {
                    self.letters.pop();
                }
                return;
            }
        }
        self.letters.push((g, e));
    }

    pub fn gens(&self) -> GeneratorSet {
        self.gens
    }

    pub fn letters(&self) -> &[(usize, BigInt)] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of syllables.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn same_gens(&self, other: &FreeWord) -> Result<()> {
        if self.gens == other.gens {
            Ok(())
        } else {
            Err(Error::MismatchedGenerators)
        }
    }

    pub fn multiply(&self, other: &FreeWord) -> Result<FreeWord> {
        self.same_gens(other)?;
        let mut out = self.clone();
        for (g, e) in &other.letters {
            out.push(*g, e.clone());
        }
        Ok(out)
    }

    /// Product of a sequence of words over `gens`.
    pub fn product<'a, I>(gens: GeneratorSet, words: I) -> Result<FreeWord>
    where
        I: IntoIterator<Item = &'a FreeWord>,
    {
        let mut out = FreeWord::identity(gens);
        for w in words {
            out = out.multiply(w)?;
        }
        Ok(out)
    }

    pub fn invert(&self) -> FreeWord {
        FreeWord {
            gens: self.gens,
            letters: self.letters.iter().rev().map(|(g, e)| (*g, -e)).collect(),
        }
    }

    /// `[u, v] = u⁻¹v⁻¹uv`.
    pub fn commutator(&self, other: &FreeWord) -> Result<FreeWord> {
        self.same_gens(other)?;
        let mut out = self.invert();
        for w in [&other.invert(), self, other] {
            for (g, e) in &w.letters {
                out.push(*g, e.clone());
            }
        }
        Ok(out)
    }

    /// `u^v = v⁻¹uv`.
    pub fn conjugate(&self, by: &FreeWord) -> Result<FreeWord> {
        by.invert().multiply(self)?.multiply(by)
    }

    pub fn power(&self, k: &BigInt) -> FreeWord {
        if k.is_zero() || self.is_identity() {
            return FreeWord::identity(self.gens);
        }
        if self.letters.len() == 1 {
            let (g, e) = &self.letters[0];
            return FreeWord { gens: self.gens, letters: vec![(*g, e * k)] };
        }
        let base = if k.is_negative() { self.invert() } else { self.clone() };
        let count = k.abs();
        // split off the conjugating prefix so that w^k = u v^k u⁻¹ with v cyclically reduced
        let mut lo = 0;
        let mut hi = base.letters.len();
        while hi - lo >= 2 {
            let (a, ea) = &base.letters[lo];
            let (b, eb) = &base.letters[hi - 1];
            if a == b && (ea + eb).is_zero() {
                lo += 1;
                hi -= 1;
            } else {
                break;
            }
        }
        let prefix = &base.letters[..lo];
        let core = &base.letters[lo..hi];
        let mut out = FreeWord::identity(self.gens);
        for (g, e) in prefix {
            out.push(*g, e.clone());
        }
        if core.len() == 1 {
            out.push(core[0].0, &core[0].1 * &count);
        } else {
            let mut i = BigInt::zero();
            while i < count {
                for (g, e) in core {
                    out.push(*g, e.clone());
                }
                i += 1;
            }
        }
        for (g, e) in prefix.iter().rev() {
            out.push(*g, -e);
        }
        out
    }

    pub fn pow_i64(&self, k: i64) -> FreeWord {
        self.power(&BigInt::from(k))
    }

    /// Substitutes `images[i-1]` for generator `i`.
    pub fn apply_endomorphism(&self, images: &[FreeWord]) -> Result<FreeWord> {
        if images.len() != self.gens.rank() {
            return Err(Error::ImageCountMismatch { expected: self.gens.rank(), got: images.len() });
        }
        let target = images[0].gens;
        if images.iter().any(|w| w.gens != target) {
            return Err(Error::MismatchedGenerators);
        }
        let mut out = FreeWord::identity(target);
        for (g, e) in &self.letters {
            let piece = images[g - 1].power(e);
            for (h, f) in piece.letters {
                out.push(h, f);
            }
        }
        Ok(out)
    }

    /// Deletes every occurrence of generator `index` (the quotient killing it).
    pub fn kill_generator(&self, index: usize) -> Result<FreeWord> {
        self.gens.check(index)?;
        let mut out = FreeWord::identity(self.gens);
        for (g, e) in &self.letters {
            if *g != index {
                out.push(*g, e.clone());
            }
        }
        Ok(out)
    }

    /// Re-expresses the word over a different generator set through an index map.
    pub fn relabel(&self, gens: GeneratorSet, map: impl Fn(usize) -> usize) -> Result<FreeWord> {
        FreeWord::from_letters(gens, self.letters.iter().map(|(g, e)| (map(*g), e.clone())))
    }

    /// Exponent sum on each generator.
    pub fn exponent_sums(&self) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.gens.rank()];
        for (g, e) in &self.letters {
            out[g - 1] += e;
        }
        out
    }

    pub fn to_json(&self) -> WordJson {
        WordJson {
            n: self.gens.n,
            b: self.gens.b,
            word: self.letters.iter().map(|(g, e)| (*g, e.to_string())).collect(),
        }
    }

    pub fn from_json(j: &WordJson) -> Result<FreeWord> {
        let gens = GeneratorSet::new(j.n, j.b)?;
        let mut letters = Vec::with_capacity(j.word.len());
        for (g, e) in &j.word {
            let e: BigInt = e
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad exponent {e:?}")))?;
            letters.push((*g, e));
        }
        FreeWord::from_letters(gens, letters)
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (i, (g, e)) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.gens.name(*g))?;
            if !e.is_one() {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Wire format: `{"n": .., "b": .., "word": [[gen, "exp"], ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordJson {
    pub n: usize,
    pub b: usize,
    pub word: Vec<(usize, String)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2() -> GeneratorSet {
        GeneratorSet::new(2, 0).unwrap()
    }

    #[test]
    fn cancellation_and_merging() {
        let gens = g2();
        assert!(FreeWord::from_pairs(gens, &[(1, 1), (1, -1)]).unwrap().is_identity());
        let w = FreeWord::from_pairs(gens, &[(1, 1), (2, 1), (2, 1)]).unwrap();
        assert_eq!(w, FreeWord::from_pairs(gens, &[(1, 1), (2, 2)]).unwrap());
        let w = FreeWord::from_pairs(gens, &[(1, 2), (1, -1)]).unwrap();
        assert_eq!(w, FreeWord::generator(gens, 1).unwrap());
        // cascading cancellation
        let w = FreeWord::from_pairs(gens, &[(1, 1), (2, 1), (2, -1), (1, -1)]).unwrap();
        assert!(w.is_identity());
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(
            FreeWord::from_pairs(g2(), &[(3, 1)]),
            Err(Error::GeneratorOutOfRange { index: 3, rank: 2 })
        ));
        assert!(FreeWord::from_pairs(g2(), &[(0, 1)]).is_err());
        assert!(GeneratorSet::new(0, 0).is_err());
    }

    #[test]
    fn commutator_convention() {
        let gens = g2();
        let x1 = FreeWord::generator(gens, 1).unwrap();
        let x2 = FreeWord::generator(gens, 2).unwrap();
        let c = x1.commutator(&x2).unwrap();
        assert_eq!(c, FreeWord::from_pairs(gens, &[(1, -1), (2, -1), (1, 1), (2, 1)]).unwrap());
        assert!(x1.commutator(&x1).unwrap().is_identity());
        assert!(x1.pow_i64(0).is_identity());
        let w = x1.multiply(&x2).unwrap().invert();
        assert_eq!(w, FreeWord::from_pairs(gens, &[(2, -1), (1, -1)]).unwrap());
    }

    #[test]
    fn power_of_conjugate() {
        let gens = g2();
        let w = FreeWord::from_pairs(gens, &[(2, 1), (1, 3), (2, -1)]).unwrap();
        let w4 = w.pow_i64(4);
        assert_eq!(w4, FreeWord::from_pairs(gens, &[(2, 1), (1, 12), (2, -1)]).unwrap());
        let v = FreeWord::from_pairs(gens, &[(1, 1), (2, 1)]).unwrap();
        let mut manual = FreeWord::identity(gens);
        for _ in 0..3 {
            manual = manual.multiply(&v.invert()).unwrap();
        }
        assert_eq!(v.pow_i64(-3), manual);
    }

    #[test]
    fn endomorphism_examples() {
        let gens = g2();
        let x1 = FreeWord::generator(gens, 1).unwrap();
        let x2 = FreeWord::generator(gens, 2).unwrap();
        let id = vec![x1.clone(), x2.clone()];
        let w = FreeWord::from_pairs(gens, &[(1, 2), (2, -1), (1, 1)]).unwrap();
        assert_eq!(w.apply_endomorphism(&id).unwrap(), w);

        let g3 = GeneratorSet::new(1, 1).unwrap();
        let t = FreeWord::from_pairs(g3, &[(1, 1), (2, 1)]).unwrap();
        let sq = FreeWord::from_pairs(g3, &[(1, 2)]).unwrap();
        let img = sq
            .apply_endomorphism(&[t.clone(), FreeWord::generator(g3, 2).unwrap()])
            .unwrap();
        assert_eq!(img, t.multiply(&t).unwrap());

        let swap = vec![x2.clone(), x1.clone()];
        let c = x1.commutator(&x2).unwrap();
        assert_eq!(c.apply_endomorphism(&swap).unwrap(), x2.commutator(&x1).unwrap());
    }

    #[test]
    fn json_roundtrip() {
        let gens = GeneratorSet::new(2, 1).unwrap();
        let w = FreeWord::from_letters(gens, [(1, BigInt::from(-5)), (3, BigInt::from(7))]).unwrap();
        let j = serde_json::to_string(&w.to_json()).unwrap();
        assert_eq!(j, r#"{"n":2,"b":1,"word":[[1,"-5"],[3,"7"]]}"#);
        let back: WordJson = serde_json::from_str(&j).unwrap();
        assert_eq!(FreeWord::from_json(&back).unwrap(), w);
    }
}
