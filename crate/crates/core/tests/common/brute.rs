//! Brute-force multigraph enumeration: every vertex count, edge multiset and
//! label distribution, with isomorphism by trying all vertex permutations.

use std::collections::BTreeSet;

/// (sorted-by-position labels `(genus, boundary)`, adjacency multiplicities).
pub type Key = (Vec<(u32, u32)>, Vec<Vec<u32>>);

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest relabelling over all permutations.
pub fn key(labels: &[(u32, u32)], edges: &[(usize, usize)]) -> Key {
    let n = labels.len();
    let mut adj = vec![vec![0u32; n]; n];
    for &(u, v) in edges {
        adj[u][v] += 1;
        if u != v {
            adj[v][u] += 1;
        }
    }
    permutations(n)
        .into_iter()
        .map(|p| {
            let l: Vec<_> = (0..n).map(|i| labels[p[i]]).collect();
            let m: Vec<Vec<u32>> = (0..n).map(|i| (0..n).map(|j| adj[p[i]][p[j]]).collect()).collect();
            (l, m)
        })
        .min()
        .expect("at least one permutation")
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    seen[0] = true;
    loop {
        let mut grew = false;
        for &(u, v) in edges {
            if seen[u] != seen[v] {
                seen[u] = true;
                seen[v] = true;
                grew = true;
            }
        }
        if !grew {
            return seen.into_iter().all(|s| s);
        }
    }
}

fn multisets(pool: &[(usize, usize)], k: usize, start: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..pool.len() {
        cur.push(pool[i]);
        multisets(pool, k, i, cur, out);
        cur.pop();
    }
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Isomorphism classes of stable decompositions of the genus `g` surface with
/// `beta` boundary components into pieces along exactly `k ≥ 1` curves.
pub fn classes(g: u32, beta: u32, k: usize) -> BTreeSet<Key> {
    let mut out = BTreeSet::new();
    for n in 1..=k + 1 {
        let pool: Vec<(usize, usize)> = (0..n).flat_map(|u| (u..n).map(move |v| (u, v))).collect();
        let mut edge_sets = Vec::new();
        multisets(&pool, k, 0, &mut Vec::new(), &mut edge_sets);
        for edges in edge_sets {
            if !connected(n, &edges) {
                continue;
            }
            let cycles = k as i64 - n as i64 + 1;
            let piece_genus = g as i64 - cycles;
            if piece_genus < 0 {
                continue;
            }
            let mut valence = vec![0i64; n];
            for &(u, v) in &edges {
                valence[u] += 1;
                valence[v] += 1;
            }
            for gs in compositions(piece_genus as u32, n) {
                for bs in compositions(beta, n) {
                    let euler_ok = (0..n).all(|v| 2 - 2 * gs[v] as i64 - bs[v] as i64 - valence[v] < 0);
                    let torus_annulus = g == 1 && beta == 0 && k == 1;
                    if !euler_ok && !torus_annulus {
                        continue;
                    }
                    let labels: Vec<(u32, u32)> = (0..n).map(|v| (gs[v], bs[v])).collect();
                    out.insert(key(&labels, &edges));
                }
            }
        }
    }
    out
}
