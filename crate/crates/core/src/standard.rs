//! Orientation characters, standard words and the Demushkin cup-form check.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ModMatrix;
use crate::nilpotent::{Collector, TruncationParams};
use crate::scalar::{is_prime, residue, valuation};
use crate::word::{FreeWord, GeneratorSet, WordJson};

/// Image type of an orientation character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharKind {
    Trivial,
    /// Image `𝕌_p^{(m)}`.
    Up(u32),
    /// Image `⟨−1⟩ × 𝕌_2^{(f)}`.
    MinusTimes(u32),
    /// Image `𝕌_2^{[f]}`.
    MinusPower(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientationCharacter {
    pub p: u64,
    pub kind: CharKind,
}

impl OrientationCharacter {
    pub fn new(p: u64, kind: CharKind) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        let kind = match kind {
            CharKind::Up(0) => return Err(Error::InvalidParams("Up(m) needs m >= 1".into())),
            CharKind::Up(1) if p == 2 => CharKind::MinusPower(2),
            CharKind::MinusTimes(f) | CharKind::MinusPower(f) if p != 2 || f < 2 => {
                return Err(Error::InvalidParams(format!("{kind:?} needs p = 2 and f >= 2")));
            }
            k => k,
        };
        Ok(OrientationCharacter { p, kind })
    }

    pub fn trivial(p: u64) -> Result<Self> {
        Self::new(p, CharKind::Trivial)
    }

    /// `q(χ)`: 0, `p^m`, or 2.
    pub fn q(&self) -> u64 {
        match self.kind {
            CharKind::Trivial => 0,
            CharKind::Up(m) => self.p.pow(m),
            CharKind::MinusTimes(_) | CharKind::MinusPower(_) => 2,
        }
    }

    /// Parse `trivial`, `up:M`, `minus-times:F`, `minus-power:F`.
    pub fn parse(p: u64, s: &str) -> Result<Self> {
        Self::new(p, s.parse()?)
    }
}

impl FromStr for CharKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let param = |default: Option<u32>| -> Result<u32> {
            match param {
                Some(v) => v.parse().map_err(|_| Error::InvalidParams(format!("bad character parameter {v:?}"))),
                None => default.ok_or_else(|| Error::InvalidParams(format!("character {name:?} needs a parameter"))),
            }
        };
        match name.replace('_', "-").as_str() {
            "trivial" => Ok(CharKind::Trivial),
            "up" => Ok(CharKind::Up(param(None)?)),
            "minus-times" => Ok(CharKind::MinusTimes(param(None)?)),
            "minus-power" => Ok(CharKind::MinusPower(param(None)?)),
            _ => Err(Error::InvalidParams(format!("unknown character kind {s:?}"))),
        }
    }
}

impl fmt::Display for CharKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharKind::Trivial => write!(f, "trivial"),
            CharKind::Up(m) => write!(f, "up:{m}"),
            CharKind::MinusTimes(x) => write!(f, "minus-times:{x}"),
            CharKind::MinusPower(x) => write!(f, "minus-power:{x}"),
        }
    }
}

/// Which shape of standard word applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R1Case {
    /// `x₁^q [x₁,x₂]⋯[x_{n−1},x_n]`, `q ≠ 2` (with `q = 0` allowed).
    QPower,
    /// `x₁^{2+2^f} [x₁,x₂]⋯`
    MinusPower(u32),
    /// `x₁² [x₁,x₂] x₃^{2^f} [x₃,x₄]⋯`
    MinusTimesEven(u32),
    /// `x₁² x₂^{2^f} [x₂,x₃]⋯`
    OddPairs(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StandardWordSpec {
    pub n: usize,
    pub b: usize,
    pub chi: OrientationCharacter,
}

impl StandardWordSpec {
    pub fn new(n: usize, b: usize, chi: OrientationCharacter) -> Result<Self> {
        GeneratorSet::new(n, b)?;
        Ok(StandardWordSpec { n, b, chi })
    }

    pub fn q(&self) -> u64 {
        self.chi.q()
    }

    pub fn gens(&self) -> GeneratorSet {
        GeneratorSet { n: self.n, b: self.b }
    }

    fn undefined(&self) -> Error {
        Error::UndefinedStandardWord { n: self.n, chi: self.chi.kind.to_string() }
    }

    pub fn case(&self) -> Result<R1Case> {
        let n = self.n;
        match self.chi.kind {
            CharKind::Trivial if n % 2 == 0 => Ok(R1Case::QPower),
            CharKind::Up(_) if n % 2 == 0 && n >= 2 => Ok(R1Case::QPower),
            CharKind::MinusPower(f) if n % 2 == 0 && n >= 2 => Ok(R1Case::MinusPower(f)),
            CharKind::MinusTimes(f) if n % 2 == 0 && n >= 2 => Ok(R1Case::MinusTimesEven(f)),
            CharKind::MinusTimes(f) if n % 2 == 1 => Ok(R1Case::OddPairs(f)),
            _ => Err(self.undefined()),
        }
    }

    pub fn is_defined(&self) -> bool {
        self.case().is_ok()
    }

    /// The standard word as a list of `(basis position, exponent)` factors
    /// interleaved with commutators; expanded by [`build_r1`].
    fn factors(&self) -> Result<Vec<Factor>> {
        let n = self.n;
        let mut out = Vec::new();
        let two_f = |f: u32| BigInt::one() << f;
        let pairs_from = |start: usize, out: &mut Vec<Factor>| {
            let mut i = start;
            while i < n {
                out.push(Factor::Comm(i, i + 1));
                i += 2;
            }
        };
        match self.case()? {
            R1Case::QPower => {
                if n > 0 {
                    out.push(Factor::Pow(1, BigInt::from(self.q())));
                }
                pairs_from(1, &mut out);
            }
            R1Case::MinusPower(f) => {
                out.push(Factor::Pow(1, BigInt::from(2) + two_f(f)));
                pairs_from(1, &mut out);
            }
            R1Case::MinusTimesEven(f) => {
                out.push(Factor::Pow(1, BigInt::from(2)));
                out.push(Factor::Comm(1, 2));
                if n >= 4 {
                    out.push(Factor::Pow(3, two_f(f)));
                    pairs_from(3, &mut out);
                }
            }
            R1Case::OddPairs(f) => {
                out.push(Factor::Pow(1, BigInt::from(2)));
                if n >= 3 {
                    out.push(Factor::Pow(2, two_f(f)));
                    pairs_from(2, &mut out);
                }
            }
        }
        for i in 1..=self.b {
            out.push(Factor::Pow(n + i, BigInt::one()));
        }
        Ok(out)
    }
}

enum Factor {
    Pow(usize, BigInt),
    Comm(usize, usize),
}

/// `r₁(n, b, χ; B)` with `B` given as one word per basis position.
pub fn build_r1(spec: &StandardWordSpec, basis: &[FreeWord]) -> Result<FreeWord> {
    if basis.len() != spec.n + spec.b {
        return Err(Error::ImageCountMismatch { expected: spec.n + spec.b, got: basis.len() });
    }
    let gens = basis[0].gens();
    let mut w = FreeWord::identity(gens);
    for f in spec.factors()? {
        let piece = match f {
            Factor::Pow(i, e) => basis[i - 1].power(&e),
            Factor::Comm(i, k) => basis[i - 1].commutator(&basis[k - 1])?,
        };
        w = w.multiply(&piece)?;
    }
    Ok(w)
}

/// `r₁` on the designated generators.
pub fn standard_r1(spec: &StandardWordSpec) -> Result<FreeWord> {
    let gens = spec.gens();
    let basis: Vec<FreeWord> = (1..=gens.rank()).map(|i| FreeWord::generator(gens, i)).collect::<Result<_>>()?;
    build_r1(spec, &basis)
}

/// `e(B, λ) = x₁^{λ₁}⋯x_n^{λ_n}`.
pub fn boundary_product(basis: &[FreeWord], lambda: &[BigInt]) -> Result<FreeWord> {
    if basis.len() < lambda.len() || basis.is_empty() {
        return Err(Error::ImageCountMismatch { expected: lambda.len(), got: basis.len() });
    }
    let four = BigInt::from(4);
    let mut w = FreeWord::identity(basis[0].gens());
    for (x, l) in basis.iter().zip(lambda) {
        if !l.is_multiple_of(&four) {
            return Err(Error::NotDivisibleByFour(l.to_string()));
        }
        w = w.multiply(&x.power(l))?;
    }
    Ok(w)
}

/// Largest `p^m` with `r ∈ F^{p^m}[F,F]`, or 0 when every exponent sum vanishes.
pub fn q_invariant(r: &FreeWord, p: u64) -> Result<BigInt> {
    let sums = r.exponent_sums();
    let pb = BigInt::from(p);
    if sums.iter().any(|e| !e.is_multiple_of(&pb)) {
        return Err(Error::Precondition(format!("{r} is not in F^{p}[F,F]")));
    }
    Ok(sums
        .iter()
        .filter_map(|e| valuation(e, p))
        .min()
        .map_or(BigInt::zero(), |v| num_traits::pow(pb, v as usize)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CupForm {
    pub p: u64,
    pub matrix: Vec<Vec<u64>>,
    pub nondegenerate: bool,
}

/// The bilinear form on `H¹` read off the degree-2 data of a relator.
pub fn cup_form(r: &FreeWord, p: u64) -> Result<CupForm> {
    let rank = r.gens().rank();
    let sums = r.exponent_sums();
    let pb = BigInt::from(p);
    if sums.iter().any(|e| !e.is_multiple_of(&pb)) {
        return Err(Error::Precondition(format!("{r} is not in F^{p}[F,F]")));
    }
    let params = TruncationParams::new(p, p, 2)?;
    let col: Collector<BigInt> = Collector::new(rank, params)?;
    let el = col.collect(r)?;
    if col.filtration_weight(&el) >= 3 {
        return Err(Error::Precondition(format!("{r} is trivial in G_2/G_3")));
    }
    let basis = col.basis();
    let mut m = vec![vec![0u64; rank]; rank];
    for k in basis.weight_range(2) {
        if let crate::hall::Structure::Bracket(l, i) = basis.entries()[k].structure {
            // the coordinate on [x_l, x_i] with l > i contributes −1 to the (i, l) pairing
            let a = residue(&-el.coords()[k].clone(), &pb);
            let a: u64 = a.try_into().unwrap();
            m[i][l] = a;
            m[l][i] = (p - a) % p;
        }
    }
    if p == 2 {
        for (i, e) in sums.iter().enumerate() {
            let half: BigInt = e / 2;
            m[i][i] = if half.is_odd() { 1 } else { 0 };
        }
    }
    let mat = ModMatrix::new(
        p,
        pb.clone(),
        m.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect(),
    );
    Ok(CupForm { p, matrix: m, nondegenerate: mat.is_invertible() })
}

/// Outcome of the one-relator Demushkin test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemushkinReport {
    pub q_invariant: Option<String>,
    pub matrix: Option<Vec<Vec<String>>>,
    pub demushkin: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// `F/⟨⟨r⟩⟩` is Demushkin iff `r ∈ F^p[F,F]`, `r ∉ F_3` and the cup form is
/// nondegenerate.
pub fn check_demushkin(r: &FreeWord, p: u64) -> Result<DemushkinReport> {
    let rejected = |reason: String, q: Option<String>| DemushkinReport {
        q_invariant: q,
        matrix: None,
        demushkin: false,
        reason: Some(reason),
    };
    let q = match q_invariant(r, p) {
        Ok(q) => q.to_string(),
        Err(Error::Precondition(m)) => return Ok(rejected(m, None)),
        Err(e) => return Err(e),
    };
    let form = match cup_form(r, p) {
        Ok(f) => f,
        Err(Error::Precondition(m)) => return Ok(rejected(m, Some(q))),
        Err(e) => return Err(e),
    };
    Ok(DemushkinReport {
        q_invariant: Some(q),
        matrix: Some(form.matrix.iter().map(|row| row.iter().map(u64::to_string).collect()).collect()),
        demushkin: form.nondegenerate,
        reason: (!form.nondegenerate).then(|| "cup form is degenerate".to_string()),
    })
}

/// A free group with a boundary word `s₀` and peripheral generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPresentation {
    pub gens: GeneratorSet,
    pub s0: FreeWord,
    pub peripherals: Vec<FreeWord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairJson {
    pub n: usize,
    pub b: usize,
    pub s0: Vec<(usize, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peripherals: Option<Vec<Vec<(usize, String)>>>,
}

impl PairPresentation {
    /// Pair whose peripheral words are the designated generators `s_i`.
    pub fn new(gens: GeneratorSet, s0: FreeWord) -> Result<Self> {
        let peripherals = (1..=gens.b).map(|i| FreeWord::generator(gens, gens.s(i))).collect::<Result<_>>()?;
        Self::with_peripherals(gens, s0, peripherals)
    }

    pub fn with_peripherals(gens: GeneratorSet, s0: FreeWord, peripherals: Vec<FreeWord>) -> Result<Self> {
        if s0.gens() != gens || peripherals.iter().any(|w| w.gens() != gens) {
            return Err(Error::MismatchedGenerators);
        }
        if peripherals.len() != gens.b {
            return Err(Error::ImageCountMismatch { expected: gens.b, got: peripherals.len() });
        }
        if peripherals.iter().any(|w| w.is_identity()) {
            return Err(Error::Precondition("peripheral words must be nontrivial".into()));
        }
        Ok(PairPresentation { gens, s0, peripherals })
    }

    pub fn to_json(&self) -> PairJson {
        let designated = (1..=self.gens.b)
            .all(|i| FreeWord::generator(self.gens, self.gens.s(i)).ok().as_ref() == Some(&self.peripherals[i - 1]));
        PairJson {
            n: self.gens.n,
            b: self.gens.b,
            s0: self.s0.to_json().word,
            peripherals: if designated {
                None
            } else {
                Some(self.peripherals.iter().map(|w| w.to_json().word).collect())
            },
        }
    }

    pub fn from_json(j: &PairJson) -> Result<Self> {
        let gens = GeneratorSet::new(j.n, j.b)?;
        let word = |w: &Vec<(usize, String)>| FreeWord::from_json(&WordJson { n: j.n, b: j.b, word: w.clone() });
        let s0 = word(&j.s0)?;
        match &j.peripherals {
            None => Self::new(gens, s0),
            Some(ps) => Self::with_peripherals(gens, s0, ps.iter().map(word).collect::<Result<_>>()?),
        }
    }
}
