#![allow(dead_code)]

pub mod brute;
pub mod checks;
pub mod oracle;

use num_bigint::BigInt;
use pd2::{Collector, FreeWord, GeneratorSet, MalcevElement, TruncationParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Col = Collector<BigInt>;
pub type Malcev = MalcevElement<BigInt>;

pub fn collector(rank: usize, p: u64, q: u64, class: usize) -> Col {
    Collector::new(rank, TruncationParams::new(p, q, class).unwrap()).unwrap()
}

pub fn random_word(rng: &mut ChaCha8Rng, gens: GeneratorSet, len: usize, max_exp: i64) -> FreeWord {
    let pairs: Vec<(usize, i64)> = (0..len)
        .map(|_| {
            let g = rng.gen_range(1..=gens.rank());
            let mut e = rng.gen_range(-max_exp..=max_exp);
            if e == 0 {
                e = 1;
            }
            (g, e)
        })
        .collect();
    FreeWord::from_pairs(gens, &pairs).unwrap()
}

/// Random element of `G_i`: a product of Hall powers `b_k^{q^{i−w}·r}`
/// (for `q = 0` only entries of weight at least `i`), in shuffled order.
pub fn random_in_g(rng: &mut ChaCha8Rng, col: &Col, i: usize) -> MalcevElement<BigInt> {
    let q = col.params().q;
    let mut factors = Vec::new();
    for (k, e) in col.basis().entries().iter().enumerate() {
        let w = e.weight;
        if q == 0 && w < i {
            continue;
        }
        if rng.gen_bool(0.5) {
            continue;
        }
        let scale = if w >= i { BigInt::from(1) } else { num_traits::pow(BigInt::from(q), i - w) };
        let r = rng.gen_range(-3i64..=3);
        factors.push(col.basis_power(k, &(scale * r)));
    }
    for idx in (1..factors.len()).rev() {
        let j = rng.gen_range(0..=idx);
        factors.swap(idx, j);
    }
    col.product(&factors).unwrap()
}

/// An automorphism preserving the peripheral conjugacy classes:
/// `φ(s_i) = s_i^{h_i}`.
pub struct Scramble {
    pub images: Vec<FreeWord>,
    pub conjugators: Vec<FreeWord>,
}

impl Scramble {
    pub fn identity(gens: GeneratorSet) -> Self {
        Scramble {
            images: (1..=gens.rank()).map(|g| FreeWord::generator(gens, g).unwrap()).collect(),
            conjugators: vec![FreeWord::identity(gens); gens.b],
        }
    }

    pub fn apply(&self, w: &FreeWord) -> FreeWord {
        w.apply_endomorphism(&self.images).unwrap()
    }
}

fn word_avoiding(rng: &mut ChaCha8Rng, gens: GeneratorSet, avoid: usize, len: usize) -> FreeWord {
    let others: Vec<usize> = (1..=gens.rank()).filter(|&g| g != avoid).collect();
    let pairs: Vec<(usize, i64)> = (0..len)
        .map(|_| (others[rng.gen_range(0..others.len())], if rng.gen_bool(0.5) { 1 } else { -1 }))
        .collect();
    FreeWord::from_pairs(gens, &pairs).unwrap()
}

/// Random composite of transvections `x_i ↦ x_i·w^{±1}` (left or right) with
/// `w` a conjugate of another generator by a word avoiding `x_i`, peripheral
/// conjugations `s_i ↦ s_i^u` with `u` avoiding `s_i`, and inner automorphisms.
pub fn random_scramble(rng: &mut ChaCha8Rng, gens: GeneratorSet, moves: usize) -> Scramble {
    let mut phi = Scramble::identity(gens);
    let rank = gens.rank();
    if rank < 2 {
        return phi;
    }
    for _ in 0..moves {
        let kind = rng.gen_range(0..3);
        let mut m: Vec<FreeWord> = (1..=rank).map(|g| FreeWord::generator(gens, g).unwrap()).collect();
        let mut conj_step: Vec<Option<FreeWord>> = vec![None; gens.b];
        match kind {
            0 if gens.n > 0 => {
                let i = rng.gen_range(1..=gens.n);
                let len = rng.gen_range(0..=2);
                let u = word_avoiding(rng, gens, i, len);
                let y = word_avoiding(rng, gens, i, 1);
                let w = y.conjugate(&u).unwrap();
                m[i - 1] = if rng.gen_bool(0.5) { m[i - 1].multiply(&w).unwrap() } else { w.multiply(&m[i - 1]).unwrap() };
            }
            1 if gens.b > 0 => {
                let i = rng.gen_range(1..=gens.b);
                let len = rng.gen_range(1..=2);
                let u = word_avoiding(rng, gens, gens.s(i), len);
                m[gens.s(i) - 1] = m[gens.s(i) - 1].conjugate(&u).unwrap();
                conj_step[i - 1] = Some(u);
            }
            _ => {
                let y = FreeWord::gen_power(gens, rng.gen_range(1..=rank), if rng.gen_bool(0.5) { 1 } else { -1 }).unwrap();
                for (g, img) in m.iter_mut().enumerate() {
                    *img = img.conjugate(&y).unwrap();
                    if g >= gens.n {
                        conj_step[g - gens.n] = Some(y.clone());
                    }
                }
            }
        }
        let images: Vec<FreeWord> = m.iter().map(|w| phi.apply(w)).collect();
        let conjugators = phi
            .conjugators
            .iter()
            .zip(&conj_step)
            .map(|(h, u)| match u {
                Some(u) => h.multiply(&phi.apply(u)).unwrap(),
                None => h.clone(),
            })
            .collect();
        phi = Scramble { images, conjugators };
    }
    phi
}
