//! Successive approximation of a pair to standard form, with certificates.
//!
//! Basis images are held as Magnus series so that each refinement needs a
//! single peel (for the residual). The verifier rebuilds everything from the
//! certificate through group operations on collected elements.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graded::{delta_matrix, solve_linear, DeltaMap, GradedBasis, GradedElement};
use crate::init::{initialize_for_class, InitialBasis, SeedBasis, SEARCH_BOUND};
use crate::linalg::ModMatrix;
use crate::nilpotent::{Collector, MalcevElement, TruncationParams};
use crate::scalar::residue;
use crate::series::Series;
use crate::standard::{standard_r1, OrientationCharacter, PairJson, PairPresentation, StandardWordSpec};
use crate::word::{FreeWord, GeneratorSet, WordJson};

/// Sparse Hall coordinates: `(entry, exponent)`.
pub type SparseCoords = Vec<(usize, String)>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub j: usize,
    /// One correction per basis position.
    pub t: Vec<SparseCoords>,
    /// `q = 2` only.
    pub eps: Vec<u8>,
    /// `q = 2` only.
    pub alpha: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialJson {
    pub x: Vec<Vec<(usize, String)>>,
    pub mu: Vec<String>,
    pub conjugators: Vec<Vec<(usize, String)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisChangeCertificate {
    pub pair: PairJson,
    pub p: u64,
    pub chi: String,
    pub q: u64,
    pub depth: usize,
    pub class: usize,
    pub modulus_exp: u32,
    pub initial: InitialJson,
    pub steps: Vec<StepRecord>,
    /// Residues of the final basis coordinates.
    pub final_basis: Vec<Vec<String>>,
    pub lambda: Vec<String>,
    pub residual_weight: usize,
    /// SHA-256 over the certificate serialised with this field empty.
    pub hash: String,
}

impl BasisChangeCertificate {
    pub fn compute_hash(&self) -> String {
        let mut blank = self.clone();
        blank.hash.clear();
        let bytes = serde_json::to_vec(&blank).expect("certificate serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn seal(mut self) -> Self {
        self.hash = self.compute_hash();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serialises")
    }
}

/// State at entry to step `j`: `s₀ = e(B, λ)·r₁(B)·z` with `z ∈ G_j`.
#[derive(Debug, Clone)]
pub struct NormalizeState {
    pub j: usize,
    pub lambda: Vec<BigInt>,
    pub residual: MalcevElement<BigInt>,
    basis: Vec<Series<BigInt>>,
}

impl NormalizeState {
    pub fn basis_series(&self) -> &[Series<BigInt>] {
        &self.basis
    }
}

fn symmetric(x: &BigInt, m: &BigInt) -> BigInt {
    let r = residue(x, m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

fn eval_word(w: &FreeWord, images: &[Series<BigInt>], inverses: &[Series<BigInt>]) -> Series<BigInt> {
    let (r, c) = (images[0].rank(), images[0].degree());
    let mut s = Series::one(r, c);
    for (g, e) in w.letters() {
        let f = if e.sign() == num_bigint::Sign::Minus {
            inverses[g - 1].pow(&-e)
        } else {
            images[g - 1].pow(e)
        };
        s = s.mul(&f);
    }
    s
}

fn boundary_series(basis: &[Series<BigInt>], lambda: &[BigInt]) -> Series<BigInt> {
    let (r, c) = (basis[0].rank(), basis[0].degree());
    let mut s = Series::one(r, c);
    for (x, l) in basis.iter().zip(lambda) {
        if !l.is_zero() {
            s = s.mul(&x.pow(l));
        }
    }
    s
}

/// Refinement context for one pair and character.
pub struct Normalizer {
    pair: PairPresentation,
    spec: StandardWordSpec,
    depth: usize,
    col: Collector<BigInt>,
    gb: GradedBasis,
    r1: FreeWord,
    s0: Series<BigInt>,
}

impl Normalizer {
    pub fn new(pair: &PairPresentation, chi: OrientationCharacter, depth: usize) -> Result<Self> {
        if depth < 3 {
            return Err(Error::InvalidParams(format!("depth must be at least 3, got {depth}")));
        }
        let spec = StandardWordSpec::new(pair.gens.n, pair.gens.b, chi)?;
        spec.case()?;
        let params = TruncationParams::new(chi.p, spec.q(), depth + 1)?;
        let col = Collector::new(pair.gens.rank(), params)?;
        let gb = col.graded_basis();
        let r1 = standard_r1(&spec)?;
        let s0 = Series::from_word(&pair.s0, depth + 1);
        Ok(Normalizer { pair: pair.clone(), spec, depth, col, gb, r1, s0 })
    }

    pub fn collector(&self) -> &Collector<BigInt> {
        &self.col
    }

    pub fn spec(&self) -> &StandardWordSpec {
        &self.spec
    }

    fn residual_of(&self, basis: &[Series<BigInt>], lambda: &[BigInt]) -> MalcevElement<BigInt> {
        let inverses: Vec<_> = basis.iter().map(Series::inverse).collect();
        let r1 = eval_word(&self.r1, basis, &inverses);
        let e = boundary_series(basis, lambda);
        self.col.peel(r1.inverse().mul(&e.inverse()).mul(&self.s0))
    }

    /// State at `j = 3` for an initial basis.
    pub fn start(&self, init: &InitialBasis) -> Result<NormalizeState> {
        let c = self.depth + 1;
        let basis: Vec<Series<BigInt>> = init.words(&self.pair)?.iter().map(|w| Series::from_word(w, c)).collect();
        let lambda = vec![BigInt::zero(); self.spec.n];
        let residual = self.residual_of(&basis, &lambda);
        let state = NormalizeState { j: 3, lambda, residual, basis };
        let have = self.col.filtration_weight(&state.residual);
        if have < 3 {
            return Err(Error::WeightPrecondition { need: 3, have });
        }
        Ok(state)
    }

    fn correction(&self, tau: &GradedElement) -> Result<MalcevElement<BigInt>> {
        let params = self.col.params();
        let q = BigInt::from(params.q);
        let modulus = self.gb.modulus();
        let hall = self.col.basis();
        let mut coords = vec![BigInt::zero(); hall.len()];
        let jm1 = tau.j;
        for w in 1..=jm1 {
            if params.q == 0 && w < jm1 {
                continue;
            }
            let scale = num_traits::pow(q.clone(), jm1 - w);
            for k in hall.weight_range(w) {
                let c = &tau.coeffs[self.gb.index(jm1, jm1 - w, k)];
                let c = if params.q == 0 { symmetric(c, &modulus) } else { residue(c, &modulus) };
                coords[k] = c * &scale;
            }
        }
        self.col.from_coords(coords)
    }

    /// The δ map at the current basis and step.
    pub fn delta_at(&self, state: &NormalizeState) -> Result<DeltaMap> {
        let n = self.spec.n;
        let gr1: Vec<GradedElement> = state.basis.iter().map(|s| self.gb.degree_one(&s.block(1))).collect();
        delta_matrix(&self.gb, &self.spec, state.j, &gr1[..n], &gr1[n..])
    }

    /// One refinement: from `z ∈ G_j` to `z ∈ G_{j+1}`.
    pub fn refine_step(&self, state: &NormalizeState) -> Result<(NormalizeState, StepRecord)> {
        let j = state.j;
        let (n, b) = (self.spec.n, self.spec.b);
        let have = self.col.filtration_weight(&state.residual);
        if have < j {
            return Err(Error::WeightPrecondition { need: j, have });
        }
        if j > self.depth {
            return Err(Error::WeightOverflow { weight: j, class: self.depth });
        }
        let target = self.col.project_gr(&state.residual, j)?;
        let delta = self.delta_at(state)?;
        let sol = solve_linear(&delta, &target).map_err(|e| match e {
            Error::NoSolution => Error::NoSolutionAt { step: j },
            other => other,
        })?;
        let two = self.col.params().q == 2;
        let shift = BigInt::one() << (j - 1);
        let ts: Vec<MalcevElement<BigInt>> = sol.tau.iter().map(|t| self.correction(t)).collect::<Result<_>>()?;
        let mut basis = state.basis.clone();
        for (i, t) in ts.iter().enumerate() {
            if t.is_identity() && !(two && i >= n && !sol.eps[i - n].is_zero()) {
                continue;
            }
            let st = self.col.series(t);
            if i < n {
                basis[i] = basis[i].mul(&st);
            } else {
                let mut s = basis[i].clone();
                if two && !sol.eps[i - n].is_zero() {
                    s = s.pow(&(BigInt::one() + &shift));
                }
                basis[i] = st.inverse().mul(&s).mul(&st);
            }
        }
        let mut lambda = state.lambda.clone();
        if two {
            for (l, a) in lambda.iter_mut().zip(&sol.alpha) {
                *l += &shift * a;
            }
        }
        let residual = self.residual_of(&basis, &lambda);
        let have = self.col.filtration_weight(&residual);
        if have <= j {
            return Err(Error::Precondition(format!(
                "refinement at step {j} left the residual in weight {have}"
            )));
        }
        let record = StepRecord {
            j,
            t: ts
                .iter()
                .map(|t| {
                    t.coords()
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(k, c)| (k, c.to_string()))
                        .collect()
                })
                .collect(),
            eps: if two { sol.eps.iter().map(|e| u8::from(!e.is_zero())).collect() } else { vec![] },
            alpha: if two { sol.alpha.iter().map(|a| a.to_string()).collect() } else { vec![] },
        };
        debug_assert_eq!(record.t.len(), n + b);
        Ok((NormalizeState { j: j + 1, lambda, residual, basis }, record))
    }

    pub fn run(&self, init: &InitialBasis) -> Result<BasisChangeCertificate> {
        self.run_observed(init, |_| {})
    }

    /// As [`Normalizer::run`], passing each step's δ map to `observe`.
    pub fn run_observed(
        &self,
        init: &InitialBasis,
        mut observe: impl FnMut(&DeltaMap),
    ) -> Result<BasisChangeCertificate> {
        let mut state = self.start(init)?;
        let mut steps = Vec::new();
        while state.j <= self.depth {
            observe(&self.delta_at(&state)?);
            let (next, rec) = self.refine_step(&state)?;
            steps.push(rec);
            state = next;
        }
        let params = self.col.params();
        let final_basis = state
            .basis
            .iter()
            .map(|s| self.col.peel(s.clone()).residues().iter().map(|c| c.to_string()).collect())
            .collect();
        let cert = BasisChangeCertificate {
            pair: self.pair.to_json(),
            p: params.p,
            chi: self.spec.chi.kind.to_string(),
            q: params.q,
            depth: self.depth,
            class: params.class,
            modulus_exp: params.modulus_exp,
            initial: InitialJson {
                x: init.x.iter().map(|w| w.to_json().word).collect(),
                mu: init.mu.iter().map(|m| m.to_string()).collect(),
                conjugators: init.conjugators.iter().map(|w| w.to_json().word).collect(),
            },
            steps,
            final_basis,
            lambda: state.lambda.iter().map(|l| l.to_string()).collect(),
            residual_weight: self.col.filtration_weight(&state.residual),
            hash: String::new(),
        };
        Ok(cert.seal())
    }
}

/// Normalise `pair` to depth `J`, working in class `J + 1`.
pub fn normalize_to_depth(
    pair: &PairPresentation,
    chi: OrientationCharacter,
    depth: usize,
    seed: Option<&SeedBasis>,
) -> Result<BasisChangeCertificate> {
    let normalizer = Normalizer::new(pair, chi, depth)?;
    let init = initialize_for_class(pair, chi, seed, SEARCH_BOUND, depth + 1)?;
    normalizer.run(&init)
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedCertificate(msg.into())
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.parse().map_err(|_| malformed(format!("bad integer {s:?}")))
}

fn parse_word(gens: GeneratorSet, w: &[(usize, String)]) -> Result<FreeWord> {
    FreeWord::from_json(&WordJson { n: gens.n, b: gens.b, word: w.to_vec() }).map_err(|e| malformed(e.to_string()))
}

/// Recheck a certificate against `pair` from scratch.
///
/// `Ok(false)` means the certificate is well-formed but wrong;
/// `Err` means it cannot be read.
pub fn verify_certificate(cert: &BasisChangeCertificate, pair: &PairPresentation) -> Result<bool> {
    let gens = pair.gens;
    if cert.pair != pair.to_json() || cert.hash != cert.compute_hash() {
        return Ok(false);
    }
    let chi = OrientationCharacter::parse(cert.p, &cert.chi).map_err(|e| malformed(e.to_string()))?;
    let spec = StandardWordSpec::new(gens.n, gens.b, chi)?;
    if spec.q() != cert.q || cert.class != cert.depth + 1 || cert.depth < 3 {
        return Err(malformed("inconsistent parameters"));
    }
    let params = TruncationParams::new(cert.p, cert.q, cert.class)?.with_modulus(cert.modulus_exp)?;
    let col: Collector<BigInt> = Collector::new(gens.rank(), params)?;
    let two = cert.q == 2;
    let (n, b) = (gens.n, gens.b);
    let init = &cert.initial;
    if init.x.len() != n || init.mu.len() != b || init.conjugators.len() != b {
        return Err(malformed("initial basis has the wrong shape"));
    }
    let pb = BigInt::from(cert.p);
    let mut basis = Vec::with_capacity(n + b);
    for w in &init.x {
        basis.push(col.collect(&parse_word(gens, w)?)?);
    }
    for ((per, mu), g) in pair.peripherals.iter().zip(&init.mu).zip(&init.conjugators) {
        let mu = parse_int(mu)?;
        if residue(&mu, &pb).is_zero() {
            return Ok(false);
        }
        let g = col.collect(&parse_word(gens, g)?)?;
        basis.push(col.conjugate(&col.power(&col.collect(per)?, &mu)?, &g)?);
    }
    if cert.steps.len() != cert.depth - 2 {
        return Err(malformed("wrong number of steps"));
    }
    let mut lambda = vec![BigInt::zero(); n];
    for (idx, step) in cert.steps.iter().enumerate() {
        let j = idx + 3;
        if step.j != j || step.t.len() != n + b {
            return Err(malformed(format!("step {idx} is out of sequence")));
        }
        if two {
            if step.eps.len() != b || step.alpha.len() != n {
                return Err(malformed(format!("step {j} has the wrong ε/α shape")));
            }
        } else if !step.eps.is_empty() || !step.alpha.is_empty() {
            return Err(malformed(format!("step {j} carries ε/α for q ≠ 2")));
        }
        let shift = BigInt::one() << (j - 1);
        for (i, t) in step.t.iter().enumerate() {
            let mut coords = vec![BigInt::zero(); col.basis().len()];
            for (k, e) in t {
                *coords.get_mut(*k).ok_or_else(|| malformed("coordinate index out of range"))? = parse_int(e)?;
            }
            let t = col.from_coords(coords)?;
            if col.filtration_weight(&t) < j - 1 {
                return Ok(false);
            }
            if i < n {
                basis[i] = col.multiply(&basis[i], &t)?;
            } else {
                let mut s = basis[i].clone();
                if two && step.eps[i - n] != 0 {
                    if step.eps[i - n] != 1 {
                        return Err(malformed("ε must be a bit"));
                    }
                    s = col.power(&s, &(BigInt::one() + &shift))?;
                }
                basis[i] = col.conjugate(&s, &t)?;
            }
        }
        for (l, a) in lambda.iter_mut().zip(&step.alpha) {
            *l += &shift * parse_int(a)?;
        }
    }
    let four = BigInt::from(4);
    if lambda.iter().any(|l| !residue(l, &four).is_zero()) {
        return Ok(false);
    }
    let claimed: Vec<String> = cert.lambda.clone();
    if claimed != lambda.iter().map(|l| l.to_string()).collect::<Vec<_>>() {
        return Ok(false);
    }
    let finals: Vec<Vec<String>> =
        basis.iter().map(|e| e.residues().iter().map(|c| c.to_string()).collect()).collect();
    if finals != cert.final_basis {
        return Ok(false);
    }
    let r = gens.rank();
    let data = (0..r).map(|row| basis.iter().map(|e| e.coords()[row].clone()).collect()).collect();
    if !ModMatrix::new(cert.p, pb, data).is_invertible() {
        return Ok(false);
    }
    let r1 = col.evaluate(&standard_r1(&spec)?, &basis)?;
    let mut e = col.identity();
    for (x, l) in basis.iter().zip(&lambda) {
        e = col.multiply(&e, &col.power(x, l)?)?;
    }
    let s0 = col.collect(&pair.s0)?;
    let z = col.multiply(&col.inverse(&col.multiply(&e, &r1)?)?, &s0)?;
    let weight = col.filtration_weight(&z);
    Ok(weight > cert.depth && weight == cert.residual_weight)
}

/// Result of killing one peripheral generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CapOutcome {
    /// A pair with one fewer peripheral subgroup.
    Pair(PairPresentation),
    /// All peripheral subgroups are gone: a one-relator word on `x₁..x_n`.
    Demushkin(FreeWord),
    /// `n = 0, b = 1`: the configuration `G = S₀ = S₁`.
    TwoPeripherals(PairPresentation),
}

/// Kill the designated peripheral generator `s_index` (1-based).
pub fn cap_off(pair: &PairPresentation, index: usize) -> Result<CapOutcome> {
    let gens = pair.gens;
    if index == 0 || index > gens.b {
        return Err(Error::Precondition(format!("peripheral index {index} out of range 1..={}", gens.b)));
    }
    let s = gens.s(index);
    if pair.peripherals[index - 1] != FreeWord::generator(gens, s)? {
        return Err(Error::Precondition(format!("peripheral word {index} is not the generator s{index}")));
    }
    if gens.n == 0 && gens.b == 1 {
        return Ok(CapOutcome::TwoPeripherals(pair.clone()));
    }
    let smaller = GeneratorSet::new(gens.n, gens.b - 1)?;
    let map = |g: usize| if g > s { g - 1 } else { g };
    let s0 = pair.s0.kill_generator(s)?.relabel(smaller, map)?;
    let peripherals = pair
        .peripherals
        .iter()
        .enumerate()
        .filter(|(k, _)| k + 1 != index)
        .map(|(_, w)| w.kill_generator(s).and_then(|w| w.relabel(smaller, map)))
        .collect::<Result<Vec<_>>>()?;
    let capped = PairPresentation::with_peripherals(smaller, s0, peripherals)?;
    if smaller.b == 0 {
        Ok(CapOutcome::Demushkin(capped.s0))
    } else if smaller.n == 0 && smaller.b == 1 {
        Ok(CapOutcome::TwoPeripherals(capped))
    } else {
        Ok(CapOutcome::Pair(capped))
    }
}
