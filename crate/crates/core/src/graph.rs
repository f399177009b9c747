//! Undirected I-maps: maximum cardinality search, fill-in triangulation,
//! maximal cliques and join trees.
//!
//! Vertices are identified by their declaration index; every tie in the
//! algorithms below is broken by that index, so identical inputs always give
//! identical orderings, cliques and trees.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UGraph {
    vertices: Vec<String>,
    /// `(i, j)` with `i < j`.
    edges: BTreeSet<(usize, usize)>,
}

impl UGraph {
    pub fn new<S: Into<String>>(vertices: impl IntoIterator<Item = S>) -> Self {
        UGraph {
            vertices: vertices.into_iter().map(Into::into).collect(),
            edges: BTreeSet::new(),
        }
    }

    /// Builds a graph from named edges.
    pub fn with_edges<S: AsRef<str>>(
        vertices: &[impl AsRef<str>],
        edges: &[(S, S)],
    ) -> Result<Self, Error> {
        let mut g = UGraph::new(vertices.iter().map(|v| v.as_ref().to_string()));
        for (a, b) in edges {
            g.add_named_edge(a.as_ref(), b.as_ref())?;
        }
        Ok(g)
    }

    pub fn add_named_edge(&mut self, a: &str, b: &str) -> Result<(), Error> {
        let i = self
            .index_of(a)
            .ok_or_else(|| Error::UnknownVariable(a.to_string()))?;
        let j = self
            .index_of(b)
            .ok_or_else(|| Error::UnknownVariable(b.to_string()))?;
        if i == j {
            return Err(Error::Validation(format!("self-loop on `{a}`")));
        }
        self.add_edge(i, j);
        Ok(())
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j && i < self.vertices.len() && j < self.vertices.len());
        self.edges.insert((i.min(j), i.max(j)));
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn named_edges(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|&(i, j)| (self.vertices[i].clone(), self.vertices[j].clone()))
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&w| w != v && self.has_edge(v, w)).collect()
    }

    pub fn components(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for w in self.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}

/// Result of [`mcs_fill_in`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    /// Perfect elimination ordering of `graph` (reverse of the search order).
    pub elimination_order: Vec<usize>,
    pub graph: UGraph,
    /// Fill-in edges `(i, j)`, `i < j`, in insertion order.
    pub added_edges: Vec<(usize, usize)>,
}

/// Maximum cardinality search followed by fill-in along the induced
/// elimination ordering. Chordal inputs come back unchanged.
pub fn mcs_fill_in(graph: &UGraph) -> Result<Triangulation, Error> {
    let n = graph.len();
    if n == 0 {
        return Err(Error::Validation("the model declares no variables".into()));
    }
    let components = graph.components();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }

    let mut numbered = vec![false; n];
    let mut weight = vec![0usize; n];
    let mut visit = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !numbered[v])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .unwrap();
        numbered[v] = true;
        visit.push(v);
        for w in graph.neighbors(v) {
            if !numbered[w] {
                weight[w] += 1;
            }
        }
    }
    let order: Vec<usize> = visit.into_iter().rev().collect();

    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let mut filled = graph.clone();
    let mut added_edges = Vec::new();
    for &v in &order {
        let later: Vec<usize> = filled
            .neighbors(v)
            .into_iter()
            .filter(|&w| rank[w] > rank[v])
            .collect();
        for (a, &x) in later.iter().enumerate() {
            for &y in &later[a + 1..] {
                if !filled.has_edge(x, y) {
                    filled.add_edge(x, y);
                    added_edges.push((x.min(y), x.max(y)));
                }
            }
        }
    }
    Ok(Triangulation {
        elimination_order: order,
        graph: filled,
        added_edges,
    })
}

/// Maximal cliques in order of appearance during the search; each clique's
/// vertices are listed by declaration index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueSet {
    vertices: Vec<String>,
    cliques: Vec<Vec<usize>>,
}

impl CliqueSet {
    pub fn new(vertices: Vec<String>, cliques: Vec<Vec<usize>>) -> Self {
        CliqueSet { vertices, cliques }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn names(&self, clique: usize) -> Vec<String> {
        self.cliques[clique]
            .iter()
            .map(|&v| self.vertices[v].clone())
            .collect()
    }

    /// Lowest-index clique containing every named vertex.
    pub fn covering(&self, names: &BTreeSet<String>) -> Option<usize> {
        let wanted: Option<BTreeSet<usize>> = names
            .iter()
            .map(|n| self.vertices.iter().position(|v| v == n))
            .collect();
        let wanted = wanted?;
        self.cliques
            .iter()
            .position(|c| wanted.iter().all(|v| c.contains(v)))
    }
}

/// Maximal cliques of a chordal graph from a perfect elimination ordering.
pub fn max_cliques(triangulated: &UGraph, elimination_order: &[usize]) -> Result<CliqueSet, Error> {
    let n = triangulated.len();
    if elimination_order.len() != n {
        return Err(Error::Contract("ordering does not cover the graph".into()));
    }
    let mut rank = vec![usize::MAX; n];
    for (r, &v) in elimination_order.iter().enumerate() {
        rank[v] = r;
    }
    if rank.contains(&usize::MAX) {
        return Err(Error::Contract("ordering is not a permutation".into()));
    }
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for &v in elimination_order {
        let later: Vec<usize> = triangulated
            .neighbors(v)
            .into_iter()
            .filter(|&w| rank[w] > rank[v])
            .collect();
        for (a, &x) in later.iter().enumerate() {
            for &y in &later[a + 1..] {
                if !triangulated.has_edge(x, y) {
                    return Err(Error::Contract(format!(
                        "graph is not chordal under the given ordering (`{}`-`{}` missing)",
                        triangulated.vertices[x], triangulated.vertices[y]
                    )));
                }
            }
        }
        let mut c = later;
        c.push(v);
        c.sort_unstable();
        candidates.push(c);
    }
    let is_subset = |a: &[usize], b: &[usize]| a.iter().all(|x| b.binary_search(x).is_ok());
    let mut cliques = Vec::new();
    // Search order is the reverse of elimination order.
    for (i, c) in candidates.iter().enumerate().rev() {
        let dominated = candidates
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && d.len() > c.len() && is_subset(c, d));
        if !dominated {
            cliques.push(c.clone());
        }
    }
    Ok(CliqueSet::new(triangulated.vertices.clone(), cliques))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    /// Vertex indices in declaration order.
    pub separator: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinTree {
    cliques: CliqueSet,
    edges: Vec<TreeEdge>,
}

impl JoinTree {
    pub fn cliques(&self) -> &CliqueSet {
        &self.cliques
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Neighbours of a clique with the connecting edge index, by clique index.
    pub fn neighbors(&self, clique: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter_map(|(e, edge)| {
                if edge.a == clique {
                    Some((edge.b, e))
                } else if edge.b == clique {
                    Some((edge.a, e))
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn edge_between(&self, x: usize, y: usize) -> Option<&TreeEdge> {
        self.edges
            .iter()
            .find(|e| (e.a == x && e.b == y) || (e.a == y && e.b == x))
    }

    /// Cliques on the tree path from `from` to `to`, both included.
    pub fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let parent = self.parents(to);
        let mut out = vec![from];
        let mut v = from;
        while let Some(p) = parent[v] {
            out.push(p);
            v = p;
        }
        out
    }

    /// Parent of every clique when the tree hangs from `root`.
    pub fn parents(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(v) = stack.pop() {
            for (w, _) in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    stack.push(w);
                }
            }
        }
        parent
    }

    /// Running intersection: every pairwise clique intersection lies in every
    /// separator on the path between the two cliques.
    pub fn verify_running_intersection(&self) -> Result<(), Error> {
        let cl = self.cliques.cliques();
        for i in 0..cl.len() {
            for j in i + 1..cl.len() {
                let common: Vec<usize> = cl[i].iter().filter(|v| cl[j].contains(v)).copied().collect();
                let path = self.path(i, j);
                for w in path.windows(2) {
                    let sep = &self.edge_between(w[0], w[1]).unwrap().separator;
                    if !common.iter().all(|v| sep.contains(v)) {
                        return Err(Error::Internal(format!(
                            "running intersection fails between cliques {i} and {j}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Maximum-weight spanning tree of the clique graph (weight = separator
/// size), ties broken by lexicographic clique-index pairs.
pub fn build_join_tree(cliques: CliqueSet) -> Result<JoinTree, Error> {
    let m = cliques.len();
    let cl = cliques.cliques();
    let mut candidates = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let sep: Vec<usize> = cl[i].iter().filter(|v| cl[j].contains(v)).copied().collect();
            if !sep.is_empty() {
                candidates.push((i, j, sep));
            }
        }
    }
    candidates.sort_by(|x, y| y.2.len().cmp(&x.2.len()).then((x.0, x.1).cmp(&(y.0, y.1))));

    let mut root: Vec<usize> = (0..m).collect();
    fn find(root: &mut [usize], mut v: usize) -> usize {
        while root[v] != v {
            root[v] = root[root[v]];
            v = root[v];
        }
        v
    }
    let mut edges = Vec::new();
    for (a, b, separator) in candidates {
        let (ra, rb) = (find(&mut root, a), find(&mut root, b));
        if ra != rb {
            root[ra] = rb;
            edges.push(TreeEdge { a, b, separator });
        }
    }
    if m > 0 && edges.len() != m - 1 {
        return Err(Error::Internal("clique graph is disconnected".into()));
    }
    let tree = JoinTree { cliques, edges };
    tree.verify_running_intersection()?;
    Ok(tree)
}

fn dot_id(name: &str) -> String {
    format!("\"{name}\"")
}

/// The input I-map in DOT.
pub fn dot_graph(graph: &UGraph) -> String {
    let mut out = String::from("graph imap {\n");
    for v in &graph.vertices {
        let _ = writeln!(out, "  {};", dot_id(v));
    }
    for (a, b) in graph.named_edges() {
        let _ = writeln!(out, "  {} -- {};", dot_id(&a), dot_id(&b));
    }
    out.push_str("}\n");
    out
}

/// The triangulated graph in DOT, fill-in edges dashed.
pub fn dot_triangulated(tri: &Triangulation) -> String {
    let g = &tri.graph;
    let mut out = String::from("graph triangulated {\n");
    for v in &g.vertices {
        let _ = writeln!(out, "  {};", dot_id(v));
    }
    for (i, j) in g.edges() {
        let style = if tri.added_edges.contains(&(i, j)) {
            " [style=dashed]"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "  {} -- {}{style};",
            dot_id(&g.vertices[i]),
            dot_id(&g.vertices[j])
        );
    }
    out.push_str("}\n");
    out
}

/// The join tree in DOT, separators as edge labels.
pub fn dot_join_tree(tree: &JoinTree) -> String {
    let cs = tree.cliques();
    let mut out = String::from("graph jointree {\n  node [shape=box];\n");
    for i in 0..cs.len() {
        let _ = writeln!(out, "  c{i} [label=\"{{{}}}\"];", cs.names(i).join(","));
    }
    for e in tree.edges() {
        let sep: Vec<&str> = e.separator.iter().map(|&v| cs.vertices()[v].as_str()).collect();
        let _ = writeln!(out, "  c{} -- c{} [label=\"{{{}}}\"];", e.a, e.b, sep.join(","));
    }
    out.push_str("}\n");
    out
}
