//! The graded pieces `gr_j = G_j/G_{j+1}` of the lower central `q`-series of
//! a free group, as modules over `(ℤ/q)[π]`.
//!
//! `gr_j` has basis `π^a·c` with `c` a Hall entry of weight `j − a`. Since
//! Hall ids are sorted by weight, the basis element over entry `k` has index
//! `k` and `dim gr_j` is the number of entries of weight at most `j`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hall::HallBasis;
use crate::linalg::ModMatrix;
use crate::nilpotent::TruncationParams;
use crate::scalar::residue;
use crate::standard::{R1Case, StandardWordSpec};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedElement {
    pub j: usize,
    pub coeffs: Vec<BigInt>,
}

impl GradedElement {
    pub fn new(j: usize, coeffs: Vec<BigInt>) -> Self {
        GradedElement { j, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// A basis element `π^a·b_k`.
type Term = (usize, usize);

#[derive(Debug, Clone)]
pub struct GradedBasis {
    hall: Arc<HallBasis>,
    params: TruncationParams,
    lie_cache: Arc<Mutex<HashMap<(usize, usize), Vec<(usize, BigInt)>>>>,
}

impl GradedBasis {
    pub fn new(hall: Arc<HallBasis>, params: TruncationParams) -> Self {
        GradedBasis { hall, params, lie_cache: Arc::default() }
    }

    pub fn hall(&self) -> &HallBasis {
        &self.hall
    }

    pub fn params(&self) -> TruncationParams {
        self.params
    }

    pub fn modulus(&self) -> BigInt {
        self.params.graded_modulus()
    }

    pub fn max_weight(&self) -> usize {
        self.hall.max_weight()
    }

    pub fn dim(&self, j: usize) -> usize {
        (1..=j.min(self.hall.max_weight())).map(|w| self.hall.count_of_weight(w)).sum()
    }

    /// Position of `π^a·b_k` in `gr_j`.
    pub fn index(&self, j: usize, a: usize, k: usize) -> usize {
        debug_assert_eq!(a + self.hall.weight(k), j);
        k
    }

    /// `(a, k)` for position `idx` of `gr_j`.
    pub fn label(&self, j: usize, idx: usize) -> Term {
        (j - self.hall.weight(idx), idx)
    }

    fn check_weight(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.hall.max_weight() {
            return Err(Error::WeightOverflow { weight: j, class: self.hall.max_weight() });
        }
        Ok(())
    }

    pub fn zero(&self, j: usize) -> GradedElement {
        GradedElement::new(j, vec![BigInt::zero(); self.dim(j)])
    }

    /// `π^{j − w}·b_k` in `gr_j`.
    pub fn unit(&self, j: usize, k: usize) -> GradedElement {
        let mut e = self.zero(j);
        e.coeffs[k] = BigInt::one();
        e
    }

    /// Element of `gr_1` with the given coefficients on `ξ_1..ξ_r`.
    pub fn degree_one(&self, coeffs: &[BigInt]) -> GradedElement {
        let mut e = self.zero(1);
        for (x, c) in e.coeffs.iter_mut().zip(coeffs) {
            *x = c.clone();
        }
        self.reduce(e)
    }

    pub fn reduce(&self, mut a: GradedElement) -> GradedElement {
        let m = self.modulus();
        for (idx, c) in a.coeffs.iter_mut().enumerate() {
            *c = if self.params.q == 0 && self.hall.weight(idx) < a.j { BigInt::zero() } else { residue(c, &m) };
        }
        a
    }

    pub fn add(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        assert_eq!(a.j, b.j, "adding elements of different weights");
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        self.reduce(GradedElement::new(a.j, coeffs))
    }

    pub fn sub(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        self.add(a, &self.scale(b, &-BigInt::one()))
    }

    pub fn scale(&self, a: &GradedElement, c: &BigInt) -> GradedElement {
        self.reduce(GradedElement::new(a.j, a.coeffs.iter().map(|x| x * c).collect()))
    }

    fn anomalous(&self) -> bool {
        self.params.p == 2 && self.params.q != 0
    }

    fn half_q(&self) -> BigInt {
        BigInt::from(self.params.q / 2)
    }

    fn lie(&self, c: usize, d: usize) -> Result<Vec<(usize, BigInt)>> {
        if let Some(v) = self.lie_cache.lock().unwrap().get(&(c, d)) {
            return Ok(v.clone());
        }
        let w = self.hall.weight(c) + self.hall.weight(d);
        let start = self.hall.weight_range(w).start;
        let coords = self.hall.bracket_coords(c, d)?;
        let v: Vec<(usize, BigInt)> = coords
            .into_iter()
            .enumerate()
            .filter(|(_, x)| *x != 0)
            .map(|(i, x)| (start + i, BigInt::from(x)))
            .collect();
        self.lie_cache.lock().unwrap().insert((c, d), v.clone());
        Ok(v)
    }

    /// Bracket of two basis elements as a sparse combination of basis elements.
    fn bracket_terms(&self, x: Term, y: Term) -> Result<Vec<(Term, BigInt)>> {
        let ((a, c), (b, d)) = (x, y);
        if self.anomalous() && self.hall.weight(c) == 1 && a >= 1 {
            // [π^a ξ, D] = π^{a−1}(π[ξ, D] + (q/2)[[ξ, D], ξ])
            let inner = self.bracket_terms((0, c), y)?;
            let mut out = Vec::new();
            for (t, coef) in &inner {
                out.push(((t.0 + a, t.1), coef.clone()));
                for (u, coef2) in self.bracket_terms(*t, (0, c))? {
                    out.push(((u.0 + a - 1, u.1), coef * &coef2 * self.half_q()));
                }
            }
            return Ok(out);
        }
        if self.anomalous() && self.hall.weight(d) == 1 && b >= 1 {
            return Ok(self.bracket_terms(y, x)?.into_iter().map(|(t, c)| (t, -c)).collect());
        }
        if self.params.q == 0 && a + b > 0 {
            return Ok(Vec::new());
        }
        Ok(self.lie(c, d)?.into_iter().map(|(k, v)| ((a + b, k), v)).collect())
    }

    pub fn bracket(&self, x: &GradedElement, y: &GradedElement) -> Result<GradedElement> {
        let j = x.j + y.j;
        self.check_weight(j)?;
        let mut out = self.zero(j);
        for (i, cx) in x.coeffs.iter().enumerate() {
            if cx.is_zero() {
                continue;
            }
            for (k, cy) in y.coeffs.iter().enumerate() {
                if cy.is_zero() {
                    continue;
                }
                for ((a, idx), v) in self.bracket_terms(self.label(x.j, i), self.label(y.j, k))? {
                    debug_assert_eq!(a + self.hall.weight(idx), j);
                    out.coeffs[idx] += cx * cy * v;
                }
            }
        }
        Ok(self.reduce(out))
    }

    /// The map `gr_j → gr_{j+1}` induced by `g ↦ g^q`. Quadratic on `gr_1`
    /// when `p = 2`; linear otherwise.
    pub fn pi_apply(&self, x: &GradedElement) -> Result<GradedElement> {
        let j = x.j + 1;
        self.check_weight(j)?;
        let mut out = self.zero(j);
        if self.params.q == 0 {
            return Ok(out);
        }
        out.coeffs[..x.coeffs.len()].clone_from_slice(&x.coeffs);
        if self.anomalous() && x.j == 1 {
            let r = self.hall.rank();
            for k in 0..r {
                for l in k + 1..r {
                    let c = &x.coeffs[k] * &x.coeffs[l] * self.half_q();
                    if c.is_zero() {
                        continue;
                    }
                    for (idx, v) in self.lie(l, k)? {
                        out.coeffs[idx] += &c * v;
                    }
                }
            }
        }
        Ok(self.reduce(out))
    }

    pub fn pi_power(&self, x: &GradedElement, times: usize) -> Result<GradedElement> {
        (0..times).try_fold(x.clone(), |acc, _| self.pi_apply(&acc))
    }

    /// Display name of basis position `idx` of `gr_j`.
    pub fn name(&self, j: usize, idx: usize, gen_name: &dyn Fn(usize) -> String) -> String {
        let (a, k) = self.label(j, idx);
        let c = self.hall.display(k, gen_name);
        match a {
            0 => c,
            1 => format!("π·{c}"),
            _ => format!("π^{a}·{c}"),
        }
    }
}

/// Column layout of a δ-map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaDomain {
    /// Number of `τ` blocks, each a copy of `gr_{j−1}`.
    pub blocks: usize,
    pub block_dim: usize,
    /// `ε` columns (one per peripheral generator, `q = 2` only).
    pub eps: usize,
    /// `α` columns (one per internal generator, `q = 2` only).
    pub alpha: usize,
}

impl DeltaDomain {
    pub fn cols(&self) -> usize {
        self.blocks * self.block_dim + self.eps + self.alpha
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaMap {
    pub j: usize,
    pub n: usize,
    pub b: usize,
    pub domain: DeltaDomain,
    pub rows: usize,
    /// Leading rows outside `gr_j` (the lower-weight slots when `q = 0`).
    pub inert_rows: usize,
    pub p: u64,
    pub modulus: BigInt,
    /// Row-major, reduced.
    pub matrix: Vec<Vec<BigInt>>,
}

/// A solution of `δ(τ, ε) + Σ α_i π^{j−1}ξ_i = target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaSolution {
    pub tau: Vec<GradedElement>,
    pub eps: Vec<BigInt>,
    pub alpha: Vec<BigInt>,
}

impl DeltaMap {
    pub fn as_matrix(&self) -> ModMatrix {
        ModMatrix::new(self.p, self.modulus.clone(), self.matrix.clone())
    }

    pub fn is_surjective(&self) -> bool {
        let live = self.matrix[self.inert_rows..].to_vec();
        ModMatrix::new(self.p, self.modulus.clone(), live).is_surjective()
    }

    /// Evaluate on a flat domain vector.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.as_matrix().apply(v)
    }

    pub fn split(&self, v: &[BigInt]) -> DeltaSolution {
        let d = &self.domain;
        let tau = (0..d.blocks)
            .map(|i| GradedElement::new(self.j - 1, v[i * d.block_dim..(i + 1) * d.block_dim].to_vec()))
            .collect();
        let base = d.blocks * d.block_dim;
        DeltaSolution {
            tau,
            eps: v[base..base + d.eps].to_vec(),
            alpha: v[base + d.eps..base + d.eps + d.alpha].to_vec(),
        }
    }
}

/// The linear map `δ_{j−1}` for the standard word of `spec`, with the given
/// images of the basis in `gr_1`. For `q = 2` the `ε` and `α` columns are
/// appended.
pub fn delta_matrix(
    gb: &GradedBasis,
    spec: &StandardWordSpec,
    j: usize,
    xi: &[GradedElement],
    sigma: &[GradedElement],
) -> Result<DeltaMap> {
    let case = spec.case()?;
    let (n, b) = (spec.n, spec.b);
    if j < 3 {
        return Err(Error::Precondition(format!("δ needs j >= 3, got {j}")));
    }
    gb.check_weight(j)?;
    if xi.len() != n || sigma.len() != b {
        return Err(Error::ImageCountMismatch { expected: n + b, got: xi.len() + sigma.len() });
    }
    if xi.iter().chain(sigma).any(|e| e.j != 1) {
        return Err(Error::Precondition("basis images must lie in gr_1".into()));
    }
    let q = gb.params().q;
    if spec.q() != q {
        return Err(Error::ParamMismatch);
    }
    let two = q == 2;
    let domain = DeltaDomain {
        blocks: n + b,
        block_dim: gb.dim(j - 1),
        eps: if two { b } else { 0 },
        alpha: if two { n } else { 0 },
    };
    let qbig = BigInt::from(q);
    let binom_q2 = residue(&(&qbig * (&qbig - 1) / 2), &gb.modulus());
    let mut columns: Vec<GradedElement> = Vec::with_capacity(domain.cols());
    for block in 0..n + b {
        for idx in 0..domain.block_dim {
            let tau = gb.unit(j - 1, idx);
            let mut col = gb.zero(j);
            if block < n {
                let i = block + 1;
                if i == 1 {
                    col = gb.add(&col, &gb.pi_apply(&tau)?);
                    let c = if two { BigInt::one() } else { binom_q2.clone() };
                    col = gb.add(&col, &gb.scale(&gb.bracket(&tau, &xi[0])?, &c));
                }
                let (lo, hi) = match case {
                    R1Case::OddPairs(_) => (2, n),
                    _ => (1, n),
                };
                // pairs (2k−1, 2k) for even shapes, (2k, 2k+1) for the odd one
                if i >= lo && i <= hi {
                    let first_of_pair = (i - lo) % 2 == 0;
                    if first_of_pair {
                        col = gb.add(&col, &gb.bracket(&tau, &xi[i])?);
                    } else {
                        col = gb.add(&col, &gb.bracket(&xi[i - 2], &tau)?);
                    }
                }
            } else {
                let i = block - n;
                col = gb.add(&col, &gb.bracket(&sigma[i], &tau)?);
            }
            columns.push(col);
        }
    }
    if two {
        for s in sigma {
            columns.push(gb.pi_power(s, j - 1)?);
        }
        for x in xi {
            columns.push(gb.pi_power(x, j - 1)?);
        }
    }
    let rows = gb.dim(j);
    let inert_rows = if q == 0 { gb.dim(j - 1) } else { 0 };
    let matrix = (0..rows).map(|r| columns.iter().map(|c| c.coeffs[r].clone()).collect()).collect();
    Ok(DeltaMap { j, n, b, domain, rows, inert_rows, p: gb.params().p, modulus: gb.modulus(), matrix })
}

/// Solve `map · v = target` with pinned tie-breaking.
pub fn solve_linear(map: &DeltaMap, target: &GradedElement) -> Result<DeltaSolution> {
    if target.j != map.j {
        return Err(Error::Precondition(format!("target weight {} does not match δ weight {}", target.j, map.j)));
    }
    let v = map.as_matrix().solve(&target.coeffs)?;
    Ok(map.split(&v))
}
