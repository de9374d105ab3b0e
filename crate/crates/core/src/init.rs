//! Initial standard-form bases: `s₀ ≡ r₁(B) mod G₃`.
//!
//! A candidate basis is `x`-images plus one conjugator per peripheral word;
//! the peripheral images are `(P_i^{μ_i})^{g_i}` where the units `μ_i` are
//! read from the weight-1 coordinates of `s₀` in the candidate basis.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, InitFailure, Result};
use crate::linalg::ModMatrix;
use crate::nilpotent::{Collector, MalcevElement, TruncationParams};
use crate::scalar::residue;
use crate::standard::{build_r1, cup_form, q_invariant, OrientationCharacter, PairPresentation, StandardWordSpec};
use crate::word::{FreeWord, GeneratorSet, WordJson};

/// Default cap on the number of candidates in the exhaustive search.
pub const SEARCH_BOUND: u64 = 1 << 20;

/// A user-supplied starting basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedBasis {
    pub x: Vec<FreeWord>,
    pub conjugators: Vec<FreeWord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedJson {
    pub x: Vec<Vec<(usize, String)>>,
    pub conjugators: Vec<Vec<(usize, String)>>,
}

fn word_from(gens: GeneratorSet, w: &[(usize, String)]) -> Result<FreeWord> {
    FreeWord::from_json(&WordJson { n: gens.n, b: gens.b, word: w.to_vec() })
}

impl SeedBasis {
    pub fn identity(gens: GeneratorSet) -> Self {
        SeedBasis {
            x: (1..=gens.n).map(|i| FreeWord::generator(gens, i).unwrap()).collect(),
            conjugators: vec![FreeWord::identity(gens); gens.b],
        }
    }

    pub fn to_json(&self) -> SeedJson {
        SeedJson {
            x: self.x.iter().map(|w| w.to_json().word).collect(),
            conjugators: self.conjugators.iter().map(|w| w.to_json().word).collect(),
        }
    }

    pub fn from_json(gens: GeneratorSet, j: &SeedJson) -> Result<Self> {
        Ok(SeedBasis {
            x: j.x.iter().map(|w| word_from(gens, w)).collect::<Result<_>>()?,
            conjugators: j.conjugators.iter().map(|w| word_from(gens, w)).collect::<Result<_>>()?,
        })
    }
}

/// A standard-form basis in seed form with its peripheral exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialBasis {
    pub x: Vec<FreeWord>,
    pub mu: Vec<BigInt>,
    pub conjugators: Vec<FreeWord>,
}

impl InitialBasis {
    /// `x₁..x_n, s₁..s_b` as words, `s_i = (P_i^{μ_i})^{g_i}`.
    pub fn words(&self, pair: &PairPresentation) -> Result<Vec<FreeWord>> {
        let mut out = self.x.clone();
        for ((p, mu), g) in pair.peripherals.iter().zip(&self.mu).zip(&self.conjugators) {
            out.push(p.power(mu).conjugate(g)?);
        }
        Ok(out)
    }
}

fn check_seed_shape(pair: &PairPresentation, seed: &SeedBasis) -> Result<()> {
    if seed.x.len() != pair.gens.n || seed.conjugators.len() != pair.gens.b {
        return Err(Error::ImageCountMismatch {
            expected: pair.gens.rank(),
            got: seed.x.len() + seed.conjugators.len(),
        });
    }
    if seed.x.iter().chain(&seed.conjugators).any(|w| w.gens() != pair.gens) {
        return Err(Error::MismatchedGenerators);
    }
    Ok(())
}

fn abelian(w: &FreeWord) -> Vec<BigInt> {
    w.exponent_sums()
}

/// Basis-independent obstructions: the homology condition and the capped
/// Demushkin form.
fn obstructions(pair: &PairPresentation, spec: &StandardWordSpec) -> Result<()> {
    let p = spec.chi.p;
    let gens = pair.gens;
    let pb = BigInt::from(p);
    let s0 = abelian(&pair.s0);
    if gens.b > 0 {
        // [s₀] = Σ μ_i [P_i] mod p with units μ_i
        let cols: Vec<Vec<BigInt>> = pair.peripherals.iter().map(abelian).collect();
        let data = (0..gens.rank()).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        let a = ModMatrix::new(p, pb.clone(), data);
        if a.unit_rank() < gens.b {
            return Err(InitFailure::HomologyObstruction("peripheral words are dependent modulo p".into()).into());
        }
        match a.solve(&s0) {
            Ok(mu) if mu.iter().all(|m| !residue(m, &pb).is_zero()) => {}
            _ => {
                return Err(InitFailure::HomologyObstruction(format!(
                    "s0 is not congruent to a product of unit powers of the peripheral words modulo G^{p}[G,G]"
                ))
                .into())
            }
        }
    } else if s0.iter().any(|e| !residue(e, &pb).is_zero()) {
        return Err(InitFailure::HomologyObstruction(format!("s0 is not in G^{p}[G,G]")).into());
    }
    let designated = (1..=gens.b).all(|i| pair.peripherals[i - 1] == FreeWord::generator(gens, gens.s(i)).unwrap());
    if gens.n >= 1 && designated {
        let mut capped = pair.s0.clone();
        for i in 1..=gens.b {
            capped = capped.kill_generator(gens.s(i))?;
        }
        let closed = GeneratorSet::new(gens.n, 0)?;
        let capped = capped.relabel(closed, |g| g)?;
        let qi = q_invariant(&capped, p)
            .map_err(|e| InitFailure::HomologyObstruction(format!("capped relator: {e}")))?;
        if qi != BigInt::from(spec.q()) {
            return Err(InitFailure::Degenerate(format!("capped relator has q-invariant {qi}, expected {}", spec.q())).into());
        }
        let form = cup_form(&capped, p).map_err(|e| InitFailure::Degenerate(format!("capped relator: {e}")))?;
        if !form.nondegenerate {
            return Err(InitFailure::Degenerate("capped relator has a degenerate cup form".into()).into());
        }
    }
    Ok(())
}

struct Checker<'a> {
    pair: &'a PairPresentation,
    spec: StandardWordSpec,
    col: Collector<BigInt>,
    s0: MalcevElement<BigInt>,
    r1: FreeWord,
    peripherals: Vec<MalcevElement<BigInt>>,
    modulus: BigInt,
}

impl<'a> Checker<'a> {
    fn new(pair: &'a PairPresentation, spec: StandardWordSpec) -> Result<Self> {
        let q = spec.q();
        let params = TruncationParams::new(spec.chi.p, q, 2)?;
        let col = Collector::new(pair.gens.rank(), params)?;
        let s0 = col.collect(&pair.s0)?;
        let r1 = crate::standard::standard_r1(&spec)?;
        let peripherals = pair.peripherals.iter().map(|w| col.collect(w)).collect::<Result<_>>()?;
        let modulus = TruncationParams::new(spec.chi.p, q, 3)?.modulus();
        Ok(Checker { pair, spec, col, s0, r1, peripherals, modulus })
    }

    /// Try a candidate given as group elements; returns `μ` on success.
    fn try_elements(&self, x: &[MalcevElement<BigInt>], g: &[MalcevElement<BigInt>]) -> Result<Option<Vec<BigInt>>> {
        let p = self.spec.chi.p;
        let r = self.pair.gens.rank();
        let mut rows: Vec<Vec<BigInt>> = x.iter().map(|e| e.coords()[..r].to_vec()).collect();
        rows.extend(self.peripherals.iter().map(|e| e.coords()[..r].to_vec()));
        let data = (0..r).map(|i| rows.iter().map(|row| row[i].clone()).collect()).collect();
        let a = ModMatrix::new(p, self.modulus.clone(), data);
        if !a.is_invertible() {
            return Ok(None);
        }
        let c = a.solve(&self.s0.coords()[..r])?;
        let mu: Vec<BigInt> = c[self.pair.gens.n..].to_vec();
        if mu.iter().any(|m| residue(m, &BigInt::from(p)).is_zero()) {
            return Ok(None);
        }
        let mut images: Vec<MalcevElement<BigInt>> = x.to_vec();
        for ((per, m), gi) in self.peripherals.iter().zip(&mu).zip(g) {
            images.push(self.col.conjugate(&self.col.power(per, m)?, gi)?);
        }
        let r1 = self.col.evaluate(&self.r1, &images)?;
        let z = self.col.multiply(&self.col.inverse(&r1)?, &self.s0)?;
        Ok((self.col.filtration_weight(&z) >= 3).then_some(mu))
    }

    fn try_seed(&self, seed: &SeedBasis) -> Result<Option<Vec<BigInt>>> {
        let x = seed.x.iter().map(|w| self.col.collect(w)).collect::<Result<Vec<_>>>()?;
        let g = seed.conjugators.iter().map(|w| self.col.collect(w)).collect::<Result<Vec<_>>>()?;
        self.try_elements(&x, &g)
    }

    fn word_of(&self, e: &MalcevElement<BigInt>) -> Result<FreeWord> {
        let gens = self.pair.gens;
        let mut w = FreeWord::identity(gens);
        for (k, c) in e.coords().iter().enumerate() {
            if !c.is_zero() {
                w = w.multiply(&self.col.basis_word(gens, k)?.power(c))?;
            }
        }
        Ok(w)
    }

    /// Exhaustive search over bases modulo `G₃`, identity offsets first.
    fn search(&self, bound: u64) -> Result<Option<SeedBasis>> {
        let q = self.spec.q();
        let gens = self.pair.gens;
        let r = gens.rank();
        let basis_len = self.col.basis().len();
        let x_moduli: Vec<u64> = (0..basis_len).map(|k| if k < r { q * q } else { q }).collect();
        let mut moduli = Vec::new();
        for _ in 0..gens.n {
            moduli.extend(&x_moduli);
        }
        for _ in 0..gens.b {
            moduli.extend(std::iter::repeat_n(q, r));
        }
        let space = moduli.iter().try_fold(1u64, |acc, &m| acc.checked_mul(m));
        if space.is_none_or(|s| s > bound) {
            return Err(InitFailure::SearchExhausted(format!(
                "candidate space exceeds {bound}; supply a seed basis"
            ))
            .into());
        }
        let mut digits = vec![0u64; moduli.len()];
        loop {
            let mut pos = 0;
            let mut x = Vec::with_capacity(gens.n);
            for i in 0..gens.n {
                let coords = (0..basis_len)
                    .map(|k| {
                        let base = u64::from(k == i);
                        BigInt::from((base + digits[pos + k]) % x_moduli[k])
                    })
                    .collect();
                pos += basis_len;
                x.push(self.col.from_coords(coords)?);
            }
            let mut g = Vec::with_capacity(gens.b);
            for _ in 0..gens.b {
                let mut coords = vec![BigInt::zero(); basis_len];
                for (k, c) in coords.iter_mut().take(r).enumerate() {
                    *c = BigInt::from(digits[pos + k]);
                }
                pos += r;
                g.push(self.col.from_coords(coords)?);
            }
            if self.try_elements(&x, &g)?.is_some() {
                return Ok(Some(SeedBasis {
                    x: x.iter().map(|e| self.word_of(e)).collect::<Result<_>>()?,
                    conjugators: g.iter().map(|e| self.word_of(e)).collect::<Result<_>>()?,
                }));
            }
            // increment, least significant digit last
            let mut i = digits.len();
            loop {
                if i == 0 {
                    return Ok(None);
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < moduli[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
    }
}

/// Find a standard-form basis with `s₀ ≡ r₁(B) mod G₃`.
///
/// With a seed, only that seed is tried. Without one, the designated
/// generators are tried first and then, when `q ≠ 0` and the space has at
/// most `bound` candidates, every basis modulo `G₃`.
pub fn initialize_mod3(
    pair: &PairPresentation,
    chi: OrientationCharacter,
    seed: Option<&SeedBasis>,
    bound: u64,
) -> Result<InitialBasis> {
    initialize_for_class(pair, chi, seed, bound, 3)
}

/// As [`initialize_mod3`], with `μ` computed to the modulus used at `class`.
pub fn initialize_for_class(
    pair: &PairPresentation,
    chi: OrientationCharacter,
    seed: Option<&SeedBasis>,
    bound: u64,
    class: usize,
) -> Result<InitialBasis> {
    let spec = StandardWordSpec::new(pair.gens.n, pair.gens.b, chi)?;
    spec.case()?;
    obstructions(pair, &spec)?;
    let checker = Checker::new(pair, spec)?;
    let chosen = match seed {
        Some(s) => {
            check_seed_shape(pair, s)?;
            match checker.try_seed(s)? {
                Some(_) => s.clone(),
                None => {
                    return Err(InitFailure::SeedMismatch("seed does not give s0 = r1 modulo G_3".into()).into());
                }
            }
        }
        None => {
            let id = SeedBasis::identity(pair.gens);
            if checker.try_seed(&id)?.is_some() {
                id
            } else if spec.q() == 0 {
                return Err(InitFailure::SearchExhausted(
                    "designated generators fail and q = 0 admits no finite search; supply a seed basis".into(),
                )
                .into());
            } else {
                match checker.search(bound)? {
                    Some(s) => s,
                    None => return Err(InitFailure::SearchExhausted("no basis modulo G_3 found".into()).into()),
                }
            }
        }
    };
    let mu = rescale(pair, &spec, &chosen, class.max(3))?;
    let init = InitialBasis { x: chosen.x, mu, conjugators: chosen.conjugators };
    let _ = build_r1(&spec, &init.words(pair)?)?;
    Ok(init)
}

/// Peripheral exponents `μ_i = ζ_i(s₀)` in the basis given by `seed`,
/// modulo the default `p^M` at `class`, as symmetric representatives.
fn rescale(pair: &PairPresentation, spec: &StandardWordSpec, seed: &SeedBasis, class: usize) -> Result<Vec<BigInt>> {
    let p = spec.chi.p;
    let modulus = TruncationParams::new(p, spec.q(), class)?.modulus();
    let r = pair.gens.rank();
    let mut rows: Vec<Vec<BigInt>> = seed.x.iter().map(abelian).collect();
    rows.extend(pair.peripherals.iter().map(abelian));
    let data = (0..r).map(|i| rows.iter().map(|row| row[i].clone()).collect()).collect();
    let a = ModMatrix::new(p, modulus.clone(), data);
    let c = a.solve(&abelian(&pair.s0))?;
    let half = &modulus / 2;
    Ok(c[pair.gens.n..]
        .iter()
        .map(|m| if *m > half { m - &modulus } else { m.clone() })
        .collect())
}
