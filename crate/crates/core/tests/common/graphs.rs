//! Brute-force graph checks, independent of the library's graph code.

use std::collections::{BTreeSet, VecDeque};

pub type Adjacency = Vec<Vec<bool>>;

pub fn adjacency(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Adjacency {
    let mut adj = vec![vec![false; n]; n];
    for (a, b) in edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    adj
}

/// Some chordless cycle of length at least four, if one exists.
pub fn chordless_cycle(adj: &Adjacency) -> Option<Vec<usize>> {
    let n = adj.len();
    // grow induced paths whose smallest vertex is the start
    fn grow(adj: &Adjacency, path: &mut Vec<usize>) -> Option<Vec<usize>> {
        let start = path[0];
        let last = *path.last().unwrap();
        for v in (start + 1)..adj.len() {
            if path.contains(&v) || !adj[last][v] {
                continue;
            }
            if path.len() > 2 && path[1..path.len() - 1].iter().any(|&p| adj[p][v]) {
                continue;
            }
            if path.len() > 1 && adj[start][v] {
                if path.len() >= 3 {
                    let mut cycle = path.clone();
                    cycle.push(v);
                    return Some(cycle);
                }
                continue;
            }
            path.push(v);
            if let Some(c) = grow(adj, path) {
                return Some(c);
            }
            path.pop();
        }
        None
    }
    (0..n).find_map(|s| grow(adj, &mut vec![s]))
}

/// All maximal cliques by subset enumeration.
pub fn maximal_cliques(adj: &Adjacency) -> BTreeSet<BTreeSet<usize>> {
    let n = adj.len();
    assert!(n <= 16);
    let is_clique = |m: u32| {
        (0..n).all(|i| m >> i & 1 == 0 || (i + 1..n).all(|j| m >> j & 1 == 0 || adj[i][j]))
    };
    let cliques: Vec<u32> = (1u32..1 << n).filter(|&m| is_clique(m)).collect();
    cliques
        .iter()
        .filter(|&&m| !cliques.iter().any(|&o| o != m && o & m == m))
        .map(|&m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn tree_path(k: usize, edges: &[(usize, usize)], from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; k];
    let mut queue = VecDeque::from([from]);
    prev[from] = from;
    while let Some(v) = queue.pop_front() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && prev[y] == usize::MAX {
                    prev[y] = v;
                    queue.push_back(y);
                }
            }
        }
    }
    if prev[to] == usize::MAX {
        return None;
    }
    let mut path = vec![to];
    while *path.last().unwrap() != from {
        path.push(prev[*path.last().unwrap()]);
    }
    Some(path)
}

/// `edges` forms a spanning tree and every clique on the path between two
/// cliques contains their intersection.
pub fn running_intersection(cliques: &[BTreeSet<usize>], edges: &[(usize, usize)]) -> Result<(), String> {
    let k = cliques.len();
    if edges.len() + 1 != k {
        return Err(format!("{} edges for {k} cliques", edges.len()));
    }
    for i in 0..k {
        for j in i + 1..k {
            let path = tree_path(k, edges, i, j).ok_or_else(|| format!("cliques {i} and {j} unconnected"))?;
            let common: BTreeSet<usize> = cliques[i].intersection(&cliques[j]).copied().collect();
            if let Some(&bad) = path.iter().find(|&&c| !common.is_subset(&cliques[c])) {
                return Err(format!("clique {bad} on the path {i}..{j} misses {common:?}"));
            }
        }
    }
    Ok(())
}

/// Largest total separator size over all spanning trees of the clique graph.
pub fn max_spanning_weight(cliques: &[BTreeSet<usize>]) -> usize {
    let k = cliques.len();
    assert!(k <= 7);
    if k <= 1 {
        return 0;
    }
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let weight = |&(i, j): &(usize, usize)| cliques[i].intersection(&cliques[j]).count();
    let mut best = 0;
    for mask in 0u32..1 << pairs.len() {
        if mask.count_ones() as usize != k - 1 {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..pairs.len()).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]).collect();
        if (1..k).all(|t| tree_path(k, &chosen, 0, t).is_some()) {
            best = best.max(chosen.iter().map(weight).sum());
        }
    }
    best
}
