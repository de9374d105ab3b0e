//! Decomposition graphs of a surface: enumeration up to labelled
//! isomorphism, edge collapse and the collapse downset.
//!
//! A vertex carries `n = 2·genus` of its piece and `b`, its number of
//! boundary components of the surface. Edges are the cutting curves.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count handled by canonical labelling.
pub const MAX_VERTICES: usize = 8;
/// Largest edge count handled by [`downset`].
pub const MAX_DOWNSET_EDGES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexLabel {
    pub n: u32,
    pub b: u32,
}

/// Orientable surface of genus `genus` with `boundary` boundary components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Surface {
    pub genus: u32,
    pub boundary: u32,
}

impl Surface {
    pub fn new(genus: u32, boundary: u32) -> Result<Self> {
        if genus == 0 && boundary <= 2 {
            return Err(Error::InvalidParams(format!(
                "genus 0 with {boundary} boundary components has no essential curves"
            )));
        }
        Ok(Surface { genus, boundary })
    }

    /// Rank of the free pro-p group for `β > 0`, or `2g` for closed surfaces.
    pub fn rank(&self) -> i64 {
        let (g, b) = (i64::from(self.genus), i64::from(self.boundary));
        if b == 0 {
            2 * g
        } else {
            2 * g + b - 1
        }
    }

    /// Size of a pants decomposition.
    pub fn max_curves(&self) -> u32 {
        (3 * self.genus + self.boundary).saturating_sub(3)
    }

    fn max_pieces(&self) -> u32 {
        (2 * self.genus + self.boundary).saturating_sub(2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DecompositionGraph {
    pub vertices: Vec<VertexLabel>,
    /// Endpoints, `u ≤ v`; loops allowed.
    pub edges: Vec<(usize, usize)>,
}

/// A graph in canonical labelling; equal iff the graphs are isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm(pub DecompositionGraph);

impl DecompositionGraph {
    pub fn new(vertices: Vec<VertexLabel>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= vertices.len() || v >= vertices.len()) {
            return Err(Error::InvalidGraph(format!("edge ({u},{v}) has an endpoint out of range")));
        }
        let edges = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        Ok(DecompositionGraph { vertices, edges })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DecompositionGraph = serde_json::from_str(s)?;
        Self::new(raw.vertices, raw.edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialises")
    }

    /// Single vertex, no edges.
    pub fn is_degenerate(&self) -> bool {
        self.edges.is_empty()
    }

    /// Loops count twice.
    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| usize::from(a == v) + usize::from(b == v)).sum()
    }

    pub fn loops(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v && b == v).count()
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.vertices.len());
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        uf.components() == 1
    }

    /// First Betti number `|E| − |V| + 1` of a connected graph.
    pub fn betti(&self) -> i64 {
        self.edges.len() as i64 - self.vertices.len() as i64 + 1
    }

    pub fn boundary(&self) -> u32 {
        self.vertices.iter().map(|v| v.b).sum()
    }

    /// `Σ g_v + β₁`, with `g_v = n_v / 2`.
    pub fn genus(&self) -> i64 {
        self.vertices.iter().map(|v| i64::from(v.n / 2)).sum::<i64>() + self.betti()
    }

    /// `Σ(n_v + b_v) + 2β₁ − ε`.
    pub fn rank(&self) -> i64 {
        let labels: i64 = self.vertices.iter().map(|v| i64::from(v.n + v.b)).sum();
        labels + 2 * self.betti() - i64::from(self.boundary() > 0)
    }

    pub fn surface(&self) -> Result<Surface> {
        let g = u32::try_from(self.genus()).map_err(|_| Error::InvalidGraph("negative genus".into()))?;
        Surface::new(g, self.boundary())
    }

    /// All defining constraints against `surface`.
    pub fn validate(&self, surface: Surface) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGraph(m));
        if !self.is_connected() {
            return bad("not connected".into());
        }
        if let Some(v) = self.vertices.iter().find(|v| v.n % 2 == 1) {
            return bad(format!("odd label n = {}", v.n));
        }
        if self.boundary() != surface.boundary {
            return bad(format!("boundary labels sum to {}, expected {}", self.boundary(), surface.boundary));
        }
        if self.rank() != surface.rank() {
            return bad(format!("rank identity fails: {} vs {}", self.rank(), surface.rank()));
        }
        let torus_loop = surface == Surface { genus: 1, boundary: 0 }
            && self.vertices.len() == 1
            && self.edges.len() == 1;
        for (i, v) in self.vertices.iter().enumerate() {
            if v.n == 0 && v.b as usize + self.valence(i) <= 2 && !torus_loop {
                return bad(format!("vertex {i} is a disc or annulus"));
            }
        }
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph D {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "  v{i} [label=\"n={},b={}\"];", v.n, v.b);
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "  v{u} -- v{v};");
        }
        s.push_str("}\n");
        s
    }

    fn relabelled(&self, perm: &[usize]) -> DecompositionGraph {
        let mut vertices = self.vertices.clone();
        for (old, &new) in perm.iter().enumerate() {
            vertices[new] = self.vertices[old];
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        DecompositionGraph { vertices, edges }
    }

    /// Relabel vertices by `perm` (old index → new index).
    pub fn permute(&self, perm: &[usize]) -> Result<DecompositionGraph> {
        let mut seen = vec![false; self.vertices.len()];
        if perm.len() != seen.len() || perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParams("not a permutation".into()));
        }
        let mut vertices = self.vertices.clone();
        for (old, &new) in perm.iter().enumerate() {
            vertices[new] = self.vertices[old];
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        DecompositionGraph::new(vertices, edges)
    }
}

/// Minimal relabelling over vertex permutations that respect
/// (label, valence, loop count).
pub fn canonical_form(graph: &DecompositionGraph) -> Result<CanonicalForm> {
    let nv = graph.vertices.len();
    if nv > MAX_VERTICES {
        return Err(Error::SizeCap(format!("{nv} vertices, at most {MAX_VERTICES} supported")));
    }
    let key = |v: usize| (graph.vertices[v], graph.valence(v), graph.loops(v));
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by_key(|&v| key(v));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match classes.last_mut() {
            Some(c) if key(c[0]) == key(v) => c.push(v),
            _ => classes.push(vec![v]),
        }
    }
    let mut best: Option<DecompositionGraph> = None;
    let mut current: Vec<Vec<usize>> = classes.clone();
    loop {
        let mut perm = vec![0; nv];
        for (pos, &v) in current.iter().flatten().enumerate() {
            perm[v] = pos;
        }
        let cand = graph.relabelled(&perm);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
        // odometer over per-class permutations
        let mut i = current.len();
        loop {
            if i == 0 {
                return Ok(CanonicalForm(best.expect("at least one permutation")));
            }
            i -= 1;
            if next_permutation(&mut current[i]) {
                break;
            }
            current[i].clone_from(&classes[i]);
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else { return false };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn is_isomorphic(a: &DecompositionGraph, b: &DecompositionGraph) -> Result<bool> {
    Ok(canonical_form(a)? == canonical_form(b)?)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    fn components(&mut self) -> usize {
        (0..self.0.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// Multisets of `k` items from `0..m`, non-decreasing.
fn multisets(m: usize, k: usize, out: &mut Vec<Vec<usize>>) {
    fn go(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(m, k, i, cur, out);
            cur.pop();
        }
    }
    go(m, k, 0, &mut Vec::with_capacity(k), out);
}

/// Ways to write `total` as an ordered sum of `parts` naturals.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn classes_with_vertices(surface: Surface, edges: usize, nv: usize) -> Result<BTreeSet<CanonicalForm>> {
    let mut found = BTreeSet::new();
    let Ok(genus_left) = u32::try_from(i64::from(surface.genus) - (edges as i64 - nv as i64 + 1)) else {
        return Ok(BTreeSet::new());
    };
    let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|u| (u..nv).map(move |v| (u, v))).collect();
    let mut choices = Vec::new();
    multisets(pairs.len(), edges, &mut choices);
    let genera = compositions(genus_left, nv);
    let bounds = compositions(surface.boundary, nv);
    let mut shapes = BTreeSet::new();
    for choice in choices {
        let e: Vec<(usize, usize)> = choice.iter().map(|&i| pairs[i]).collect();
        let bare = DecompositionGraph { vertices: vec![VertexLabel { n: 0, b: 0 }; nv], edges: e };
        if bare.is_connected() {
            shapes.insert(canonical_form(&bare)?.0);
        }
    }
    for shape in shapes {
        for gs in &genera {
            for bs in &bounds {
                let vertices = gs.iter().zip(bs).map(|(&g, &b)| VertexLabel { n: 2 * g, b }).collect();
                let graph = DecompositionGraph { vertices, edges: shape.edges.clone() };
                if graph.validate(surface).is_ok() {
                    found.insert(canonical_form(&graph)?);
                }
            }
        }
    }
    Ok(found)
}

/// Isomorphism classes with exactly `edges` edges, in canonical order.
pub fn enumerate_exact(surface: Surface, edges: usize) -> Result<Vec<DecompositionGraph>> {
    Surface::new(surface.genus, surface.boundary)?;
    if edges == 0 {
        let single = VertexLabel { n: 2 * surface.genus, b: surface.boundary };
        return Ok(vec![DecompositionGraph::new(vec![single], Vec::new())?]);
    }
    let max_v = (edges + 1).min(surface.max_pieces().max(1) as usize);
    if max_v > MAX_VERTICES {
        return Err(Error::SizeCap(format!("up to {max_v} vertices needed, at most {MAX_VERTICES} supported")));
    }
    let per_size = (1..=max_v)
        .into_par_iter()
        .map(|nv| classes_with_vertices(surface, edges, nv))
        .collect::<Result<Vec<_>>>()?;
    let found: BTreeSet<CanonicalForm> = per_size.into_iter().flatten().collect();
    Ok(found.into_iter().map(|c| c.0).collect())
}

/// All classes with `1..=max_edges` edges; `pants` keeps only pants
/// decompositions (maximal curve systems, every piece of genus 0).
pub fn enumerate(surface: Surface, max_edges: usize, pants: bool) -> Result<Vec<DecompositionGraph>> {
    let top = (surface.max_curves().max(1) as usize).min(max_edges);
    if pants {
        let k = surface.max_curves() as usize;
        if k == 0 || k > max_edges {
            return Ok(Vec::new());
        }
        let all = enumerate_exact(surface, k)?;
        return Ok(all.into_iter().filter(|g| g.vertices.iter().all(|v| v.n == 0)).collect());
    }
    let mut out = Vec::new();
    for k in 1..=top {
        out.extend(enumerate_exact(surface, k)?);
    }
    Ok(out)
}

/// Edges to contract. Each connected piece of the chosen edges merges to one
/// vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseMove {
    pub edges: Vec<usize>,
    /// Permit contracting every edge (the degenerate empty multicurve).
    #[serde(default)]
    pub allow_total: bool,
}

impl CollapseMove {
    pub fn new(edges: Vec<usize>) -> Self {
        CollapseMove { edges, allow_total: false }
    }

    pub fn total(graph: &DecompositionGraph) -> Self {
        CollapseMove { edges: (0..graph.edges.len()).collect(), allow_total: true }
    }
}

pub fn collapse(graph: &DecompositionGraph, mv: &CollapseMove) -> Result<DecompositionGraph> {
    let ne = graph.edges.len();
    if mv.edges.is_empty() {
        return Err(Error::InvalidMove("no edges to collapse".into()));
    }
    let mut chosen = vec![false; ne];
    for &e in &mv.edges {
        if e >= ne {
            return Err(Error::InvalidMove(format!("edge {e} out of range")));
        }
        if std::mem::replace(&mut chosen[e], true) {
            return Err(Error::InvalidMove(format!("edge {e} repeated")));
        }
    }
    if mv.edges.len() == ne && !mv.allow_total {
        return Err(Error::InvalidMove("total collapse not requested".into()));
    }
    let nv = graph.vertices.len();
    let mut uf = UnionFind::new(nv);
    for (e, &(u, v)) in graph.edges.iter().enumerate() {
        if chosen[e] {
            uf.union(u, v);
        }
    }
    let mut index = vec![usize::MAX; nv];
    let mut reps = Vec::new();
    for v in 0..nv {
        let r = uf.find(v);
        if index[r] == usize::MAX {
            index[r] = reps.len();
            reps.push(r);
        }
        index[v] = index[r];
    }
    let mut vcount = vec![0i64; reps.len()];
    let mut ecount = vec![0i64; reps.len()];
    let mut labels = vec![VertexLabel { n: 0, b: 0 }; reps.len()];
    for (v, l) in graph.vertices.iter().enumerate() {
        let t = index[v];
        vcount[t] += 1;
        labels[t].n += l.n;
        labels[t].b += l.b;
    }
    let mut edges = Vec::new();
    for (e, &(u, v)) in graph.edges.iter().enumerate() {
        if chosen[e] {
            ecount[index[u]] += 1;
        } else {
            edges.push((index[u], index[v]));
        }
    }
    for t in 0..reps.len() {
        let extra = ecount[t] - vcount[t] + 1;
        labels[t].n += 2 * u32::try_from(extra).expect("a connected piece has nonnegative cycle rank");
    }
    DecompositionGraph::new(labels, edges)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownsetEntry {
    /// Contracted edges, ascending.
    pub edges: Vec<usize>,
    pub graph: DecompositionGraph,
    pub canonical: CanonicalForm,
    pub degenerate: bool,
}

/// Every collapse of one graph, indexed by edge subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Downset {
    pub surface: Surface,
    /// Entry `m` contracts the edges in the bitmask `m`.
    pub entries: Vec<DownsetEntry>,
    /// `(a, b)`: entry `b` contracts exactly one more edge than entry `a`.
    pub covers: Vec<(usize, usize)>,
}

pub fn downset(graph: &DecompositionGraph) -> Result<Downset> {
    let ne = graph.edges.len();
    if ne > MAX_DOWNSET_EDGES {
        return Err(Error::SizeCap(format!("{ne} edges, at most {MAX_DOWNSET_EDGES} supported")));
    }
    let surface = graph.surface()?;
    graph.validate(surface)?;
    let full = (1usize << ne) - 1;
    let mut entries = Vec::with_capacity(full + 1);
    for mask in 0..=full {
        let edges: Vec<usize> = (0..ne).filter(|e| mask >> e & 1 == 1).collect();
        let g = if mask == 0 {
            graph.clone()
        } else {
            collapse(graph, &CollapseMove { edges: edges.clone(), allow_total: mask == full })?
        };
        if !g.is_degenerate() {
            g.validate(surface)?;
        }
        entries.push(DownsetEntry { edges, canonical: canonical_form(&g)?, degenerate: g.is_degenerate(), graph: g });
    }
    let covers = (0..=full)
        .flat_map(|m| (0..ne).filter(move |e| m >> e & 1 == 0).map(move |e| (m, m | 1 << e)))
        .collect();
    Ok(Downset { surface, entries, covers })
}

impl Downset {
    /// Whether the cover relation is that of the Boolean lattice on the edges.
    pub fn is_boolean_lattice(&self) -> bool {
        let n = self.entries.len();
        if !n.is_power_of_two() {
            return false;
        }
        let ne = n.trailing_zeros() as usize;
        let mut up = vec![0usize; n];
        let mut down = vec![0usize; n];
        for &(a, b) in &self.covers {
            if a >= n || b >= n || a & b != a || (a ^ b).count_ones() != 1 {
                return false;
            }
            up[a] += 1;
            down[b] += 1;
        }
        (0..n).all(|m| {
            let k = m.count_ones() as usize;
            down[m] == k && up[m] == ne - k && self.entries[m].edges.len() == k
        })
    }
}
