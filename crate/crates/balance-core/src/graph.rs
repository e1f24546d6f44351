//! Weighted ordered graphs, vertex labelings, and permutations.
//!
//! Vertices are numbered `1..=n`.  Edges are stored only under their ordered
//! key `(i, j)` with `i < j`; an edge of weight `0` is *present* and imposes
//! the equation `a_i·b_j − a_j·b_i = 0`, which is very different from the
//! pair being non-adjacent.  Relabeling vertices through a permutation `σ`
//! transports the weight with a sign: if `σ` reverses the order of an edge's
//! endpoints the weight flips, mirroring the antisymmetry of the underlying
//! bilinear form.

use crate::field::{FieldDescriptor, Scalar};
use std::collections::{BTreeMap, BTreeSet};

#[derive(thiserror::Error, Clone, PartialEq, Eq, Debug)]
pub enum GraphError {
    #[error("vertex {0} is out of range 1..={1}")]
    VertexOutOfRange(usize, usize),
    #[error("edge ({0}, {1}) must satisfy u < v")]
    BadEdgeOrder(usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("weight on edge ({0}, {1}) lies in the wrong field")]
    WeightFieldMismatch(usize, usize),
    #[error("labeling has {found} pairs but the graph has {expected} vertices")]
    LabelCountMismatch { found: usize, expected: usize },
    #[error("label for vertex {0} lies in the wrong field")]
    LabelFieldMismatch(usize),
    #[error("the map {0:?} is not a permutation of 1..={1}")]
    NotAPermutation(Vec<usize>, usize),
}

/// A weighted ordered simple graph over one field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightedGraph {
    field: FieldDescriptor,
    n: usize,
    edges: BTreeMap<(usize, usize), Scalar>,
}

impl WeightedGraph {
    /// Builds and validates a graph from `(u, v, weight)` triples.
    pub fn new(
        field: FieldDescriptor,
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, Scalar)>,
    ) -> Result<Self, GraphError> {
        let mut map = BTreeMap::new();
        for (u, v, w) in edges {
            if u == 0 || u > n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v == 0 || v > n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u >= v {
                return Err(GraphError::BadEdgeOrder(u, v));
            }
            if !field.contains(&w) {
                return Err(GraphError::WeightFieldMismatch(u, v));
            }
            if map.insert((u, v), w).is_some() {
                return Err(GraphError::DuplicateEdge(u, v));
            }
        }
        Ok(WeightedGraph { field, n, edges: map })
    }

    pub fn empty(field: FieldDescriptor, n: usize) -> Self {
        WeightedGraph { field, n, edges: BTreeMap::new() }
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.edges.iter().map(|(&(u, v), w)| (u, v, w))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.contains_key(&key)
    }

    /// Stored weight of the edge `{u, v}`, ignoring orientation.
    pub fn weight(&self, u: usize, v: usize) -> Option<&Scalar> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.get(&key)
    }

    /// Sign-adjusted weight seen from the ordered pair `(u, v)`: the stored
    /// weight if `u < v`, its negation if `u > v`.
    pub fn signed_weight(&self, u: usize, v: usize) -> Option<Scalar> {
        let w = self.weight(u, v)?;
        Some(if u < v { w.clone() } else { w.negated() })
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.keys().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .keys()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Vertices all of whose incident edges (possibly none) have weight zero.
    pub fn null_vertices(&self) -> BTreeSet<usize> {
        (1..=self.n)
            .filter(|&v| {
                self.edges
                    .iter()
                    .all(|(&(a, b), w)| (a != v && b != v) || w.is_zero())
            })
            .collect()
    }

    /// Connected components (zero-weight edges connect), each a sorted vertex
    /// set; components are listed by their smallest vertex.
    pub fn connected_components(&self) -> Vec<BTreeSet<usize>> {
        let mut seen = vec![false; self.n + 1];
        let mut components = Vec::new();
        for start in 1..=self.n {
            if seen[start] {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.insert(v);
                for w in self.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            components.push(comp);
        }
        components
    }

    /// The induced subgraph on `vertices`, re-indexed `1..=k` in ascending
    /// order of the original ids (which preserves edge orientation and hence
    /// weights), together with the map from new position to original id.
    pub fn induced(&self, vertices: &BTreeSet<usize>) -> (WeightedGraph, Vec<usize>) {
        let ids: Vec<usize> = vertices.iter().copied().collect();
        let pos: BTreeMap<usize, usize> =
            ids.iter().enumerate().map(|(k, &v)| (v, k + 1)).collect();
        let mut edges = BTreeMap::new();
        for (&(u, v), w) in &self.edges {
            if let (Some(&pu), Some(&pv)) = (pos.get(&u), pos.get(&v)) {
                edges.insert((pu, pv), w.clone());
            }
        }
        (
            WeightedGraph { field: self.field, n: ids.len(), edges },
            ids,
        )
    }

    /// Relabels vertices: edge `(i, j)` moves to `(σ(i), σ(j))`, stored under
    /// the sorted key with the weight negated whenever `σ(i) > σ(j)`.
    pub fn apply_permutation(&self, sigma: &VertexPermutation) -> WeightedGraph {
        assert_eq!(sigma.len(), self.n, "permutation size must match graph");
        let mut edges = BTreeMap::new();
        for (&(u, v), w) in &self.edges {
            let (su, sv) = (sigma.image(u), sigma.image(v));
            if su < sv {
                edges.insert((su, sv), w.clone());
            } else {
                edges.insert((sv, su), w.negated());
            }
        }
        WeightedGraph { field: self.field, n: self.n, edges }
    }

    /// Searches for a weighted isomorphism onto `other`: a bijection `σ` with
    /// `apply_permutation(self, σ) == other`.  Returns the lexicographically
    /// first image vector if one exists.  Candidates are pruned by degree.
    pub fn weighted_isomorphic(&self, other: &WeightedGraph) -> Option<VertexPermutation> {
        if self.n != other.n || self.edges.len() != other.edges.len() || self.field != other.field {
            return None;
        }
        let mut own_degrees: Vec<usize> = (1..=self.n).map(|v| self.degree(v)).collect();
        let mut their_degrees: Vec<usize> = (1..=self.n).map(|v| other.degree(v)).collect();
        {
            let mut a = own_degrees.clone();
            let mut b = their_degrees.clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return None;
            }
        }
        own_degrees.insert(0, 0);
        their_degrees.insert(0, 0);
        let mut image = vec![0usize; self.n + 1];
        let mut used = vec![false; self.n + 1];
        fn search(
            g: &WeightedGraph,
            h: &WeightedGraph,
            own_deg: &[usize],
            their_deg: &[usize],
            image: &mut Vec<usize>,
            used: &mut Vec<bool>,
            v: usize,
        ) -> bool {
            if v > g.n {
                return true;
            }
            'candidate: for c in 1..=g.n {
                if used[c] || own_deg[v] != their_deg[c] {
                    continue;
                }
                for prior in 1..v {
                    let adj = g.weight(prior, v);
                    let img_adj = h.weight(image[prior], c);
                    match (adj, img_adj) {
                        (None, None) => {}
                        (Some(w), Some(_)) => {
                            // signed weights are transported unchanged:
                            // signed_h(σu, σv) = signed_g(u, v) = w since prior < v
                            let got = h.signed_weight(image[prior], c).unwrap();
                            if *w != got {
                                continue 'candidate;
                            }
                        }
                        _ => continue 'candidate,
                    }
                }
                image[v] = c;
                used[c] = true;
                if search(g, h, own_deg, their_deg, image, used, v + 1) {
                    return true;
                }
                used[c] = false;
                image[v] = 0;
            }
            false
        }
        if search(self, other, &own_degrees, &their_degrees, &mut image, &mut used, 1) {
            Some(VertexPermutation::new(image[1..].to_vec()).unwrap())
        } else {
            None
        }
    }

    /// Checks a labeling against every edge equation
    /// `a_u·b_v − a_v·b_u = d_{u,v}` and reports each violation.
    pub fn verify_labeling(&self, labeling: &Labeling) -> Result<Vec<EdgeViolation>, GraphError> {
        if labeling.len() != self.n {
            return Err(GraphError::LabelCountMismatch { found: labeling.len(), expected: self.n });
        }
        for v in 1..=self.n {
            let (a, b) = labeling.pair(v);
            if !self.field.contains(a) || !self.field.contains(b) {
                return Err(GraphError::LabelFieldMismatch(v));
            }
        }
        let mut violations = Vec::new();
        for (&(u, v), d) in &self.edges {
            let (au, bu) = labeling.pair(u);
            let (av, bv) = labeling.pair(v);
            let lhs = &(au * bv) - &(av * bu);
            if &lhs != d {
                violations.push(EdgeViolation { u, v, expected: d.clone(), actual: lhs });
            }
        }
        Ok(violations)
    }
}

/// A failed edge equation: `actual` is `a_u·b_v − a_v·b_u`, `expected` the
/// stored weight.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EdgeViolation {
    pub u: usize,
    pub v: usize,
    pub expected: Scalar,
    pub actual: Scalar,
}

/// One `(a_k, b_k)` pair per vertex, in vertex order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Labeling {
    pairs: Vec<(Scalar, Scalar)>,
}

impl Labeling {
    pub fn new(pairs: Vec<(Scalar, Scalar)>) -> Self {
        Labeling { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The pair at vertex `v` (1-based).
    pub fn pair(&self, v: usize) -> (&Scalar, &Scalar) {
        let (a, b) = &self.pairs[v - 1];
        (a, b)
    }

    pub fn pairs(&self) -> &[(Scalar, Scalar)] {
        &self.pairs
    }

    pub fn set(&mut self, v: usize, pair: (Scalar, Scalar)) {
        self.pairs[v - 1] = pair;
    }

    /// The transported labeling that gives vertex `σ(i)` the pair of `i`.
    pub fn permute(&self, sigma: &VertexPermutation) -> Labeling {
        assert_eq!(sigma.len(), self.pairs.len());
        let mut out = self.pairs.clone();
        for (i, pair) in self.pairs.iter().enumerate() {
            out[sigma.image(i + 1) - 1] = pair.clone();
        }
        Labeling { pairs: out }
    }
}

/// A bijection of `1..=n`, stored as the image vector `[σ(1), …, σ(n)]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VertexPermutation {
    image: Vec<usize>,
}

impl VertexPermutation {
    pub fn new(image: Vec<usize>) -> Result<Self, GraphError> {
        let n = image.len();
        let mut seen = vec![false; n + 1];
        for &v in &image {
            if v == 0 || v > n || seen[v] {
                return Err(GraphError::NotAPermutation(image.clone(), n));
            }
            seen[v] = true;
        }
        Ok(VertexPermutation { image })
    }

    pub fn identity(n: usize) -> Self {
        VertexPermutation { image: (1..=n).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self, v: usize) -> usize {
        self.image[v - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> VertexPermutation {
        let mut inv = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        VertexPermutation { image: inv }
    }

    /// `self` then `after`: the composite sends `v` to `after(self(v))`.
    pub fn then(&self, after: &VertexPermutation) -> VertexPermutation {
        assert_eq!(self.len(), after.len());
        VertexPermutation {
            image: self.image.iter().map(|&v| after.image(v)).collect(),
        }
    }

    /// All permutations of `1..=n` in lexicographic order of the image
    /// vector.  Intended for the tiny `n` used in shape normalisation.
    pub fn all(n: usize) -> Vec<VertexPermutation> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        let mut used = vec![false; n + 1];
        fn rec(n: usize, current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<VertexPermutation>) {
            if current.len() == n {
                out.push(VertexPermutation { image: current.clone() });
                return;
            }
            for v in 1..=n {
                if !used[v] {
                    used[v] = true;
                    current.push(v);
                    rec(n, current, used, out);
                    current.pop();
                    used[v] = false;
                }
            }
        }
        rec(n, &mut current, &mut used, &mut out);
        out
    }
}
