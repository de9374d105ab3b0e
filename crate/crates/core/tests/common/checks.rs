//! Randomised checks shared by the property suites and the acceptance run.
//! Each returns a description of the first discrepancy.

use num_bigint::BigInt;
use pd2::GeneratorSet;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::oracle::Oracle;
use super::{random_in_g, random_word, Col};

type Check = Result<(), String>;
type El = pd2::MalcevElement<BigInt>;

fn gens_of(col: &Col) -> GeneratorSet {
    GeneratorSet::new(col.rank(), 0).unwrap()
}

/// `[uv,w] = [u,w][[u,w],v][v,w]` and `[u,vw] = [u,w][u,v][[u,v],w]`,
/// exact on coordinates.
pub fn bilinear_identities(rng: &mut ChaCha8Rng, col: &Col) -> Check {
    let gens = gens_of(col);
    let pick = |rng: &mut ChaCha8Rng| col.collect(&random_word(rng, gens, 6, 3)).unwrap();
    let (u, v, w) = (pick(rng), pick(rng), pick(rng));
    let c = |a: &El, b: &El| -> El { col.commutator(a, b).unwrap() };
    let m = |a: &El, b: &El| -> El { col.multiply(a, b).unwrap() };
    let uw = c(&u, &w);
    let lhs = c(&m(&u, &v), &w);
    let rhs = m(&m(&uw, &c(&uw, &v)), &c(&v, &w));
    if lhs.coords() != rhs.coords() {
        return Err(format!("[uv,w]: {:?} vs {:?}", lhs.coords(), rhs.coords()));
    }
    let uv = c(&u, &v);
    let lhs = c(&u, &m(&v, &w));
    let rhs = m(&m(&uw, &uv), &c(&uv, &w));
    if lhs.coords() != rhs.coords() {
        return Err(format!("[u,vw]: {:?} vs {:?}", lhs.coords(), rhs.coords()));
    }
    Ok(())
}

/// `[u^k,v] ≡ [u,v]^k ≡ [u,v^k] mod G_{i+j+1}` for `u ∈ G_i`, `v ∈ G_j`.
pub fn power_congruence(rng: &mut ChaCha8Rng, col: &Col) -> Check {
    let c = col.class();
    let i = rng.gen_range(1..=c);
    let j = rng.gen_range(1..=c);
    let u = random_in_g(rng, col, i);
    let v = random_in_g(rng, col, j);
    let k = BigInt::from(rng.gen_range(-5i64..=5));
    let uv_k = col.power(&col.commutator(&u, &v).unwrap(), &k).unwrap();
    let inv = col.inverse(&uv_k).unwrap();
    let left = col.commutator(&col.power(&u, &k).unwrap(), &v).unwrap();
    let right = col.commutator(&u, &col.power(&v, &k).unwrap()).unwrap();
    let need = (i + j + 1).min(c + 1);
    for (name, x) in [("[u^k,v]", left), ("[u,v^k]", right)] {
        let d = col.multiply(&x, &inv).unwrap();
        let have = col.filtration_weight(&d);
        if have < need {
            return Err(format!("{name}·([u,v]^k)⁻¹ has weight {have} < {need} (i={i}, j={j}, k={k})"));
        }
    }
    Ok(())
}

/// `w([u,v]) ≥ w(u) + w(v)` and `w(u^q) ≥ w(u) + 1`.
pub fn filtration_laws(rng: &mut ChaCha8Rng, col: &Col) -> Check {
    let c = col.class();
    let q = BigInt::from(col.params().q);
    let (i, j) = (rng.gen_range(1..=c), rng.gen_range(1..=c));
    let u = random_in_g(rng, col, i);
    let v = random_in_g(rng, col, j);
    let (wu, wv) = (col.filtration_weight(&u), col.filtration_weight(&v));
    let wc = col.filtration_weight(&col.commutator(&u, &v).unwrap());
    if wc < (wu + wv).min(c + 1) {
        return Err(format!("w([u,v]) = {wc} < {wu} + {wv}"));
    }
    let wq = col.filtration_weight(&col.power(&u, &q).unwrap());
    if wq < (wu + 1).min(c + 1) {
        return Err(format!("w(u^q) = {wq} < {wu} + 1"));
    }
    Ok(())
}

/// Collection against the sparse Magnus oracle, exactly over ℤ.
pub fn magnus_agreement(rng: &mut ChaCha8Rng, col: &Col, oracle: &Oracle) -> Check {
    let len = rng.gen_range(0..=10);
    let w = random_word(rng, gens_of(col), len, 4);
    let coords = col.collect(&w).unwrap();
    let direct = oracle.word(&w);
    let rebuilt = oracle.from_coords(coords.coords());
    if direct != rebuilt {
        return Err(format!("word {w}: series differ"));
    }
    Ok(())
}
