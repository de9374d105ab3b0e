//! Hall bases of the free Lie ring and their associative expansions.
//!
//! Basic commutators are generated in weight order. A pair `(a, b)` is basic
//! when `a > b` and, if `a = [c, d]`, also `d <= b`. Each basic commutator has
//! a Lie polynomial in the free associative ring (with `[u, v] ↦ uv − vu`);
//! these polynomials span a direct summand, so a unit-pivot echelon form
//! solves for Hall coordinates exactly over any ring.

use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Structure {
    /// 1-based generator index.
    Generator(usize),
    /// Basis ids of the left and right entries.
    Bracket(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicCommutator {
    pub id: usize,
    pub weight: usize,
    pub structure: Structure,
}

/// Sparse homogeneous polynomial: `(monomial code, coefficient)` sorted by code.
/// A degree-`d` monomial `a₁⋯a_d` (letters 0-based) has code `Σ aᵢ·r^(d−i)`.
pub type SparsePoly = Vec<(usize, i64)>;

#[derive(Debug, Clone)]
struct EchelonRow {
    pivot: usize,
    sign: i64,
    row: SparsePoly,
    combo: Vec<(usize, i64)>,
}

#[derive(Debug, Clone)]
pub struct HallBasis {
    rank: usize,
    max_weight: usize,
    entries: Vec<BasicCommutator>,
    ranges: Vec<Range<usize>>,
    lookup: HashMap<(usize, usize), usize>,
    lie: Vec<SparsePoly>,
    echelon: Vec<Vec<EchelonRow>>,
}

fn checked(a: i64, b: i64) -> i64 {
    a.checked_mul(b).expect("Lie polynomial coefficient overflow")
}

fn bracket_polys(a: &SparsePoly, da: usize, b: &SparsePoly, db: usize, rank: usize) -> SparsePoly {
    let sa = rank.pow(da as u32);
    let sb = rank.pow(db as u32);
    let mut acc: HashMap<usize, i64> = HashMap::new();
    for &(u, x) in a {
        for &(v, y) in b {
            *acc.entry(u * sb + v).or_default() += checked(x, y);
            *acc.entry(v * sa + u).or_default() -= checked(x, y);
        }
    }
    let mut out: SparsePoly = acc.into_iter().filter(|&(_, c)| c != 0).collect();
    out.sort_unstable();
    out
}

impl HallBasis {
    pub fn new(rank: usize, max_weight: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        if max_weight == 0 {
            return Err(Error::InvalidParams("max_weight must be at least 1".into()));
        }
        let mut entries = Vec::new();
        let mut ranges = vec![0..0];
        let mut lookup = HashMap::new();
        let mut lie: Vec<SparsePoly> = Vec::new();
        for g in 0..rank {
            entries.push(BasicCommutator { id: g, weight: 1, structure: Structure::Generator(g + 1) });
            lie.push(vec![(g, 1)]);
        }
        ranges.push(0..rank);
        for w in 2..=max_weight {
            let start = entries.len();
            for a in 0..start {
                for b in 0..a {
                    if entries[a].weight + entries[b].weight != w {
                        continue;
                    }
                    if let Structure::Bracket(_, right) = entries[a].structure {
                        if right > b {
                            continue;
                        }
                    }
                    let id = entries.len();
                    entries.push(BasicCommutator { id, weight: w, structure: Structure::Bracket(a, b) });
                    lookup.insert((a, b), id);
                    let poly = bracket_polys(&lie[a], entries[a].weight, &lie[b], entries[b].weight, rank);
                    lie.push(poly);
                }
            }
            ranges.push(start..entries.len());
        }
        let mut basis = HallBasis { rank, max_weight, entries, ranges, lookup, lie, echelon: Vec::new() };
        basis.echelon = (0..=max_weight).map(|w| basis.build_echelon(w)).collect();
        Ok(basis)
    }

    fn build_echelon(&self, w: usize) -> Vec<EchelonRow> {
        if w == 0 {
            return Vec::new();
        }
        let mut pending: Vec<(HashMap<usize, i64>, Vec<(usize, i64)>)> = self.ranges[w]
            .clone()
            .map(|k| (self.lie[k].iter().copied().collect(), vec![(k, 1)]))
            .collect();
        let mut rows = Vec::new();
        while !pending.is_empty() {
            // first pending row (in basis order) that has a unit entry; smallest such monomial
            let pick = pending.iter().enumerate().find_map(|(i, (r, _))| {
                r.iter().filter(|(_, c)| c.abs() == 1).map(|(m, _)| *m).min().map(|m| (i, m))
            });
            let (i, m) = pick.expect("Hall polynomials fail to span a direct summand");
            let (row, combo) = pending.remove(i);
            let sign = row[&m];
            for (other, ocombo) in pending.iter_mut() {
                if let Some(&f) = other.get(&m) {
                    let f = checked(f, sign);
                    for (&mm, &x) in &row {
                        let e = other.entry(mm).or_default();
                        *e -= checked(f, x);
                    }
                    other.retain(|_, c| *c != 0);
                    let mut acc: HashMap<usize, i64> = ocombo.iter().copied().collect();
                    for &(k, x) in &combo {
                        *acc.entry(k).or_default() -= checked(f, x);
                    }
                    *ocombo = acc.into_iter().filter(|&(_, c)| c != 0).collect();
                    ocombo.sort_unstable();
                }
            }
            let mut row: SparsePoly = row.into_iter().collect();
            row.sort_unstable();
            rows.push(EchelonRow { pivot: m, sign, row, combo });
        }
        rows
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn entries(&self) -> &[BasicCommutator] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, id: usize) -> usize {
        self.entries[id].weight
    }

    /// Ids of the basic commutators of weight `w`.
    pub fn weight_range(&self, w: usize) -> Range<usize> {
        if w == 0 || w > self.max_weight {
            0..0
        } else {
            self.ranges[w].clone()
        }
    }

    pub fn count_of_weight(&self, w: usize) -> usize {
        self.weight_range(w).len()
    }

    /// Id of the basic commutator `[a, b]`, if that pair is basic.
    pub fn bracket_id(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(&(a, b)).copied()
    }

    pub fn lie_polynomial(&self, id: usize) -> &SparsePoly {
        &self.lie[id]
    }

    /// Hall coordinates of a homogeneous degree-`w` polynomial, given densely
    /// (length `rank^w`). Returns `None` when it is not a Lie element.
    pub fn solve_homogeneous<T: Scalar>(&self, w: usize, dense: &[T]) -> Option<Vec<T>> {
        let mut t = dense.to_vec();
        let range = self.weight_range(w);
        let mut coords = vec![T::zero(); range.len()];
        for er in &self.echelon[w] {
            let c = t[er.pivot].clone() * T::from_i64(er.sign);
            if c.is_zero() {
                continue;
            }
            for &(m, x) in &er.row {
                t[m].sub_mul(&c, &T::from_i64(x));
            }
            for &(k, x) in &er.combo {
                coords[k - range.start].add_mul(&c, &T::from_i64(x));
            }
        }
        if t.iter().all(|x| x.is_zero()) {
            Some(coords)
        } else {
            None
        }
    }

    /// Hall coordinates (within weight `wa + wb`) of the Lie bracket of two
    /// basis elements, in either order.
    pub fn bracket_coords(&self, a: usize, b: usize) -> Result<Vec<i64>> {
        let (wa, wb) = (self.weight(a), self.weight(b));
        let w = wa + wb;
        if w > self.max_weight {
            return Err(Error::WeightOverflow { weight: w, class: self.max_weight });
        }
        let poly = bracket_polys(&self.lie[a], wa, &self.lie[b], wb, self.rank);
        let mut dense = vec![0i64; self.rank.pow(w as u32)];
        for (m, c) in poly {
            dense[m] = c;
        }
        let dense: Vec<crate::scalar::Wide> = dense.into_iter().map(|c| crate::scalar::Wide(c as i128)).collect();
        let coords = self.solve_homogeneous(w, &dense).expect("bracket of Lie elements is a Lie element");
        Ok(coords.into_iter().map(|c| c.0 as i64).collect())
    }

    /// Human-readable name, e.g. `[[x2,x1],x1]`.
    pub fn display(&self, id: usize, name: &dyn Fn(usize) -> String) -> String {
        match self.entries[id].structure {
            Structure::Generator(g) => name(g),
            Structure::Bracket(a, b) => format!("[{},{}]", self.display(a, name), self.display(b, name)),
        }
    }

    /// JSON-friendly description: `[[weight, structure], ..]`.
    pub fn describe(&self) -> Vec<(usize, Structure)> {
        self.entries.iter().map(|e| (e.weight, e.structure)).collect()
    }
}

/// Number of basic commutators of weight `w` on `r` generators (Witt).
pub fn witt_dimension(r: usize, w: usize) -> usize {
    fn mobius(mut n: usize) -> i64 {
        let mut result = 1;
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                n /= d;
                if n % d == 0 {
                    return 0;
                }
                result = -result;
            }
            d += 1;
        }
        if n > 1 {
            result = -result;
        }
        result
    }
    let total: i64 = (1..=w)
        .filter(|d| w % d == 0)
        .map(|d| mobius(d) * (r as i64).pow((w / d) as u32))
        .sum();
    (total / w as i64) as usize
}
