//! Defect certificates: finite witnesses of unlabelability.
//!
//! A certificate cites a small ordered tuple of vertices together with the
//! weights of specific pattern edges among them.  Each family's conditions
//! are chosen so that *no* labeling of the cited edges can exist, over any
//! field; since a labeling of the whole graph restricts to one of any
//! subset, a valid certificate refutes the whole graph.
//!
//! The three families:
//!
//! * **A** (any even size `m ≥ 4`): a path of zero edges whose interior is
//!   pinned away from `(0, 0)` by nonzero pendant edges, closed by a zero
//!   edge and one nonzero edge.  Zero edges between vertices with nonzero
//!   label vectors force proportionality, which propagates around the cycle
//!   and contradicts the nonzero edge.
//! * **B** (size 4): one zero diagonal inside an otherwise nonzero cycle;
//!   proportionality across the diagonal forces `D12·D34 + D14·D23 = 0`,
//!   so a certificate requires that sum to be nonzero.
//! * **C** (size 4): all six pairs nonzero; induced weights of any labeling
//!   satisfy the Plücker identity `D12·D34 − D13·D24 + D14·D23 = 0`, so a
//!   certificate requires that expression to be nonzero.
//!
//! Detection is deterministic: tuples are enumerated in ascending
//! lexicographic order with adjacency-driven backtracking, redundant
//! re-citations of the same evidence are removed, and output is capped.

use crate::field::Scalar;
use crate::graph::WeightedGraph;
use std::collections::BTreeSet;

/// Default bound on how many certificates a detector reports.
pub const DEFAULT_CERTIFICATE_CAP: usize = 100;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DefectFamily {
    /// The even-cycle-with-pendants family; the member size is the number of
    /// cited vertices.
    A,
    /// The zero-diagonal family on four vertices.
    B,
    /// The Plücker family on four vertices.
    C,
}

#[derive(thiserror::Error, Clone, PartialEq, Eq, Debug)]
pub enum DefectError {
    #[error("family A certificates need an even vertex count ≥ 4, got {0}")]
    BadSize(usize),
    #[error("families B and C cite exactly 4 vertices, got {0}")]
    BadSizeFour(usize),
    #[error("certificate vertices must be pairwise distinct")]
    RepeatedVertex,
    #[error("certificate cites vertex {0}, out of range 1..={1}")]
    VertexOutOfRange(usize, usize),
    #[error("expected edge between tuple positions {0} and {1} at list index {2}")]
    PatternMismatch(usize, usize, usize),
    #[error("certificate has {found} edges where the pattern has {expected}")]
    EdgeCount { found: usize, expected: usize },
    #[error("cited edge ({0}, {1}) is absent from the graph")]
    MissingEdge(usize, usize),
    #[error("cited weight on ({0}, {1}) disagrees with the graph")]
    WrongWeight(usize, usize),
    #[error("cited weight on ({0}, {1}) must be zero")]
    ExpectedZero(usize, usize),
    #[error("cited weight on ({0}, {1}) must be nonzero")]
    ExpectedNonzero(usize, usize),
    #[error("cited weight on ({0}, {1}) lies outside the graph's field")]
    WeightFieldMismatch(usize, usize),
    #[error("the family inequality evaluates to zero")]
    ConditionFails,
}

/// One cited edge: the ordered pair `(u, v)` in pattern orientation —
/// `u > v` is allowed — with the sign-adjusted weight seen from that
/// orientation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CitedEdge {
    pub u: usize,
    pub v: usize,
    pub weight: Scalar,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Zero,
    Nonzero,
}

/// `(position of u, position of v, required status)` per pattern edge,
/// positions 0-based into the vertex tuple.
fn pattern(family: DefectFamily, size: usize) -> Vec<(usize, usize, Status)> {
    use Status::*;
    match family {
        DefectFamily::A => {
            let r = size / 2 + 1;
            let mut out = Vec::with_capacity(size);
            for j in 0..r - 2 {
                out.push((j, j + 1, Zero));
            }
            out.push((0, r - 1, Zero));
            out.push((r - 2, r - 1, Nonzero));
            for j in 0..r - 2 {
                out.push((j, r + j, Nonzero));
            }
            out
        }
        DefectFamily::B => vec![
            (0, 1, Nonzero),
            (0, 3, Nonzero),
            (1, 2, Nonzero),
            (2, 3, Nonzero),
            (0, 2, Zero),
        ],
        DefectFamily::C => vec![
            (0, 1, Nonzero),
            (0, 2, Nonzero),
            (0, 3, Nonzero),
            (1, 2, Nonzero),
            (1, 3, Nonzero),
            (2, 3, Nonzero),
        ],
    }
}

/// A finite witness that a graph admits no consistent labeling.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DefectCertificate {
    family: DefectFamily,
    vertices: Vec<usize>,
    edges: Vec<CitedEdge>,
}

impl DefectCertificate {
    /// Builds a certificate, checking only its internal structure: correct
    /// vertex count for the family, distinctness, and that the edge list
    /// matches the family pattern position-for-position.  Agreement with a
    /// graph is checked separately by [`validate_certificate`].
    pub fn new(
        family: DefectFamily,
        vertices: Vec<usize>,
        edges: Vec<CitedEdge>,
    ) -> Result<Self, DefectError> {
        match family {
            DefectFamily::A => {
                if vertices.len() < 4 || vertices.len() % 2 != 0 {
                    return Err(DefectError::BadSize(vertices.len()));
                }
            }
            DefectFamily::B | DefectFamily::C => {
                if vertices.len() != 4 {
                    return Err(DefectError::BadSizeFour(vertices.len()));
                }
            }
        }
        if vertices.iter().collect::<BTreeSet<_>>().len() != vertices.len() {
            return Err(DefectError::RepeatedVertex);
        }
        let pat = pattern(family, vertices.len());
        if edges.len() != pat.len() {
            return Err(DefectError::EdgeCount { found: edges.len(), expected: pat.len() });
        }
        for (idx, (&(pu, pv, _), e)) in pat.iter().zip(&edges).enumerate() {
            if e.u != vertices[pu] || e.v != vertices[pv] {
                return Err(DefectError::PatternMismatch(pu, pv, idx));
            }
        }
        Ok(DefectCertificate { family, vertices, edges })
    }

    pub fn family(&self) -> DefectFamily {
        self.family
    }

    /// Number of cited vertices (the family-A member size).
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    /// The defining vertex tuple, in pattern order.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Cited edges in pattern order.
    pub fn edges(&self) -> &[CitedEdge] {
        &self.edges
    }

    /// The same certificate with every cited vertex id sent through `map`
    /// (used to lift certificates found in an induced subgraph back to the
    /// ambient graph; an order-preserving map keeps the signed weights
    /// valid).
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> DefectCertificate {
        DefectCertificate {
            family: self.family,
            vertices: self.vertices.iter().map(|&v| map(v)).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| CitedEdge { u: map(e.u), v: map(e.v), weight: e.weight.clone() })
                .collect(),
        }
    }
}

/// Checks a certificate against a graph: every cited vertex exists, every
/// cited edge is present with exactly the cited sign-adjusted weight, the
/// zero/nonzero pattern holds, and the family inequality is satisfied.
pub fn validate_certificate(
    graph: &WeightedGraph,
    cert: &DefectCertificate,
) -> Result<(), DefectError> {
    let n = graph.vertex_count();
    for &v in &cert.vertices {
        if v == 0 || v > n {
            return Err(DefectError::VertexOutOfRange(v, n));
        }
    }
    let pat = pattern(cert.family, cert.size());
    let field = graph.field();
    for (&(_, _, status), e) in pat.iter().zip(&cert.edges) {
        if !field.contains(&e.weight) {
            return Err(DefectError::WeightFieldMismatch(e.u, e.v));
        }
        let Some(actual) = graph.signed_weight(e.u, e.v) else {
            return Err(DefectError::MissingEdge(e.u, e.v));
        };
        if actual != e.weight {
            return Err(DefectError::WrongWeight(e.u, e.v));
        }
        match status {
            Status::Zero if !e.weight.is_zero() => {
                return Err(DefectError::ExpectedZero(e.u, e.v));
            }
            Status::Nonzero if e.weight.is_zero() => {
                return Err(DefectError::ExpectedNonzero(e.u, e.v));
            }
            _ => {}
        }
    }
    let w = |k: usize| &cert.edges[k].weight;
    match cert.family {
        DefectFamily::A => {}
        DefectFamily::B => {
            // edges are listed (1,2), (1,4), (2,3), (3,4), (1,3)
            let sum = &(w(0) * w(3)) + &(w(1) * w(2));
            if sum.is_zero() {
                return Err(DefectError::ConditionFails);
            }
        }
        DefectFamily::C => {
            // edges are listed (1,2), (1,3), (1,4), (2,3), (2,4), (3,4)
            let pluecker = &(&(w(0) * w(5)) - &(w(1) * w(4))) + &(w(2) * w(3));
            if pluecker.is_zero() {
                return Err(DefectError::ConditionFails);
            }
        }
    }
    Ok(())
}

/// Sorted zero-edge and nonzero-edge neighbor lists per vertex.
struct Adjacency {
    zero: Vec<Vec<usize>>,
    nonzero: Vec<Vec<usize>>,
}

impl Adjacency {
    fn of(graph: &WeightedGraph) -> Adjacency {
        let n = graph.vertex_count();
        let mut zero = vec![Vec::new(); n + 1];
        let mut nonzero = vec![Vec::new(); n + 1];
        for (u, v, w) in graph.edges() {
            let bucket = if w.is_zero() { &mut zero } else { &mut nonzero };
            bucket[u].push(v);
            bucket[v].push(u);
        }
        for list in zero.iter_mut().chain(nonzero.iter_mut()) {
            list.sort_unstable();
        }
        Adjacency { zero, nonzero }
    }
}

fn cite(graph: &WeightedGraph, family: DefectFamily, tuple: &[usize]) -> DefectCertificate {
    let edges = pattern(family, tuple.len())
        .into_iter()
        .map(|(pu, pv, _)| {
            let (u, v) = (tuple[pu], tuple[pv]);
            CitedEdge { u, v, weight: graph.signed_weight(u, v).expect("pattern edge present") }
        })
        .collect();
    DefectCertificate::new(family, tuple.to_vec(), edges).expect("detector output is well-formed")
}

fn unordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Finds family-A certificates of size `m` (even, at least 4), in ascending
/// lexicographic order of the defining tuple, reporting at most `cap` and
/// keeping only the first certificate for each distinct piece of evidence
/// (cycle vertex set plus pendant edge set).
pub fn detect_m_a(graph: &WeightedGraph, m: usize, cap: usize) -> Vec<DefectCertificate> {
    assert!(m >= 4 && m % 2 == 0, "family A size must be even and at least 4");
    let n = graph.vertex_count();
    let r = m / 2 + 1;
    if m > n || cap == 0 {
        return Vec::new();
    }
    let adj = Adjacency::of(graph);
    let mut used = vec![false; n + 1];
    let mut tuple: Vec<usize> = Vec::with_capacity(m);
    let mut seen: BTreeSet<(Vec<usize>, Vec<(usize, usize)>)> = BTreeSet::new();
    let mut out = Vec::new();

    // fills positions ≥ r: pendant j attaches to tuple[j] by a nonzero edge
    fn pendants(
        graph: &WeightedGraph,
        adj: &Adjacency,
        r: usize,
        cap: usize,
        used: &mut Vec<bool>,
        tuple: &mut Vec<usize>,
        seen: &mut BTreeSet<(Vec<usize>, Vec<(usize, usize)>)>,
        out: &mut Vec<DefectCertificate>,
    ) {
        if out.len() >= cap {
            return;
        }
        let k = tuple.len();
        if k == 2 * r - 2 {
            let mut cycle: Vec<usize> = tuple[..r].to_vec();
            cycle.sort_unstable();
            let mut pend: Vec<(usize, usize)> = (0..r - 2)
                .map(|j| unordered(tuple[j], tuple[r + j]))
                .collect();
            pend.sort_unstable();
            if seen.insert((cycle, pend)) {
                out.push(cite(graph, DefectFamily::A, tuple));
            }
            return;
        }
        let anchor = tuple[k - r];
        for &p in &adj.nonzero[anchor] {
            if !used[p] {
                used[p] = true;
                tuple.push(p);
                pendants(graph, adj, r, cap, used, tuple, seen, out);
                tuple.pop();
                used[p] = false;
                if out.len() >= cap {
                    return;
                }
            }
        }
    }

    // fills positions < r: the zero path, the closing vertex, then pendants
    fn cycle_rec(
        graph: &WeightedGraph,
        adj: &Adjacency,
        n: usize,
        r: usize,
        cap: usize,
        used: &mut Vec<bool>,
        tuple: &mut Vec<usize>,
        seen: &mut BTreeSet<(Vec<usize>, Vec<(usize, usize)>)>,
        out: &mut Vec<DefectCertificate>,
    ) {
        if out.len() >= cap {
            return;
        }
        let k = tuple.len();
        if k == r {
            pendants(graph, adj, r, cap, used, tuple, seen, out);
            return;
        }
        let candidates: Vec<usize> = if k == 0 {
            (1..=n).collect()
        } else if k < r - 1 {
            // extend the zero path from the previous vertex
            adj.zero[tuple[k - 1]].clone()
        } else {
            // the last cycle vertex closes with a zero edge to the first and
            // a nonzero edge to the previous
            adj.zero[tuple[0]]
                .iter()
                .copied()
                .filter(|&c| !graph.signed_weight(tuple[k - 1], c).map_or(true, |w| w.is_zero()))
                .collect()
        };
        for c in candidates {
            if !used[c] {
                used[c] = true;
                tuple.push(c);
                cycle_rec(graph, adj, n, r, cap, used, tuple, seen, out);
                tuple.pop();
                used[c] = false;
                if out.len() >= cap {
                    return;
                }
            }
        }
    }

    cycle_rec(graph, &adj, n, r, cap, &mut used, &mut tuple, &mut seen, &mut out);
    out
}

/// Finds family-B certificates, in ascending lexicographic order of the
/// defining 4-tuple, reporting at most `cap` and keeping one certificate
/// per distinct cited edge set.
pub fn detect_4b(graph: &WeightedGraph, cap: usize) -> Vec<DefectCertificate> {
    let n = graph.vertex_count();
    if n < 4 || cap == 0 {
        return Vec::new();
    }
    let adj = Adjacency::of(graph);
    let mut seen: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    let mut out = Vec::new();
    for v1 in 1..=n {
        for &v2 in &adj.nonzero[v1] {
            for &v3 in &adj.zero[v1] {
                if v3 == v2
                    || graph.signed_weight(v2, v3).map_or(true, |w| w.is_zero())
                {
                    continue;
                }
                for &v4 in &adj.nonzero[v1] {
                    if v4 == v2 || v4 == v3 {
                        continue;
                    }
                    let Some(d34) = graph.signed_weight(v3, v4) else {
                        continue;
                    };
                    if d34.is_zero() {
                        continue;
                    }
                    let d12 = graph.signed_weight(v1, v2).unwrap();
                    let d14 = graph.signed_weight(v1, v4).unwrap();
                    let d23 = graph.signed_weight(v2, v3).unwrap();
                    if (&(&d12 * &d34) + &(&d14 * &d23)).is_zero() {
                        continue;
                    }
                    let mut key = vec![
                        unordered(v1, v2),
                        unordered(v2, v3),
                        unordered(v3, v4),
                        unordered(v1, v4),
                        unordered(v1, v3),
                    ];
                    key.sort_unstable();
                    if seen.insert(key) {
                        out.push(cite(graph, DefectFamily::B, &[v1, v2, v3, v4]));
                        if out.len() >= cap {
                            return out;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Finds family-C certificates over ascending 4-vertex subsets, reporting at
/// most `cap`.
pub fn detect_4c(graph: &WeightedGraph, cap: usize) -> Vec<DefectCertificate> {
    let n = graph.vertex_count();
    if n < 4 || cap == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let nz = |u: usize, v: usize| graph.weight(u, v).map_or(false, |w| !w.is_zero());
    for i in 1..=n {
        for j in (i + 1)..=n {
            if !nz(i, j) {
                continue;
            }
            for k in (j + 1)..=n {
                if !nz(i, k) || !nz(j, k) {
                    continue;
                }
                for l in (k + 1)..=n {
                    if !nz(i, l) || !nz(j, l) || !nz(k, l) {
                        continue;
                    }
                    let d = |a: usize, b: usize| graph.weight(a, b).unwrap();
                    let pluecker = &(&(d(i, j) * d(k, l)) - &(d(i, k) * d(j, l)))
                        + &(d(i, l) * d(j, k));
                    if !pluecker.is_zero() {
                        out.push(cite(graph, DefectFamily::C, &[i, j, k, l]));
                        if out.len() >= cap {
                            return out;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Runs every detector in deterministic order — size 4 families A, B, C,
/// then family A at sizes 6, 8, … up to `max_m` (default `2n − 2`) — and
/// concatenates the results up to `cap` certificates in total.
pub fn detect_all(
    graph: &WeightedGraph,
    max_m: Option<usize>,
    cap: usize,
) -> Vec<DefectCertificate> {
    let n = graph.vertex_count();
    let max_m = max_m.unwrap_or(if n >= 3 { 2 * n - 2 } else { 4 });
    let mut out = Vec::new();
    if cap == 0 || max_m < 4 {
        return out;
    }
    out.extend(detect_m_a(graph, 4, cap));
    if out.len() < cap {
        out.extend(detect_4b(graph, cap - out.len()));
    }
    if out.len() < cap {
        out.extend(detect_4c(graph, cap - out.len()));
    }
    let mut m = 6;
    while m <= max_m && out.len() < cap {
        out.extend(detect_m_a(graph, m, cap - out.len()));
        m += 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldDescriptor;
    use crate::oracle::{oracle_label, GraphEnumerator};

    fn fp(p: u64) -> FieldDescriptor {
        FieldDescriptor::prime(p).unwrap()
    }

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn graph(field: FieldDescriptor, n: usize, edges: &[(usize, usize, &str)]) -> WeightedGraph {
        WeightedGraph::new(
            field,
            n,
            edges.iter().map(|&(u, v, w)| (u, v, field.parse(w).unwrap())),
        )
        .unwrap()
    }

    fn pendant_triangle(field: FieldDescriptor) -> WeightedGraph {
        graph(field, 4, &[(1, 2, "1"), (1, 3, "0"), (2, 3, "0"), (3, 4, "1")])
    }

    #[test]
    fn pendant_triangle_yields_one_size_four_a() {
        let g = pendant_triangle(q());
        let certs = detect_m_a(&g, 4, DEFAULT_CERTIFICATE_CAP);
        assert_eq!(certs.len(), 1, "equivalent tuples must be deduplicated");
        let c = &certs[0];
        assert_eq!(c.family(), DefectFamily::A);
        assert_eq!(c.vertices(), &[3, 1, 2, 4]);
        let cited: Vec<(usize, usize, String)> = c
            .edges()
            .iter()
            .map(|e| (e.u, e.v, e.weight.to_string()))
            .collect();
        assert_eq!(
            cited,
            vec![
                (3, 1, "0".to_string()),
                (3, 2, "0".to_string()),
                (1, 2, "1".to_string()),
                (3, 4, "1".to_string()),
            ]
        );
        validate_certificate(&g, c).unwrap();
    }

    #[test]
    fn family_b_example_and_near_miss() {
        // strict: D12·D34 + D14·D23 = 1 + 1 = 2 ≠ 0 over the rationals
        let g = graph(q(), 4, &[(1, 2, "1"), (1, 3, "0"), (1, 4, "1"), (2, 3, "1"), (3, 4, "1")]);
        let certs = detect_4b(&g, DEFAULT_CERTIFICATE_CAP);
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].vertices(), &[1, 2, 3, 4]);
        validate_certificate(&g, &certs[0]).unwrap();
        // the near miss flips one sign so the sum vanishes: no certificate,
        // and indeed a labeling exists over F_3
        let h = graph(
            fp(3),
            4,
            &[(1, 2, "1"), (1, 3, "0"), (1, 4, "1"), (2, 3, "1"), (3, 4, "-1")],
        );
        assert!(detect_4b(&h, DEFAULT_CERTIFICATE_CAP).is_empty());
        assert!(detect_all(&h, None, DEFAULT_CERTIFICATE_CAP).is_empty());
        assert!(oracle_label(&h, 100_000_000).unwrap().is_some());
        // the strict version over F_3 (2 ≠ 0 there) is refuted by the oracle
        let gf = graph(
            fp(3),
            4,
            &[(1, 2, "1"), (1, 3, "0"), (1, 4, "1"), (2, 3, "1"), (3, 4, "1")],
        );
        assert_eq!(detect_4b(&gf, DEFAULT_CERTIFICATE_CAP).len(), 1);
        assert!(oracle_label(&gf, 100_000_000).unwrap().is_none());
    }

    #[test]
    fn family_c_example_and_near_miss() {
        // all-ones complete graph: Plücker value 1·1 − 1·1 + 1·1 = 1 ≠ 0
        let all = [(1, 2, "1"), (1, 3, "1"), (1, 4, "1"), (2, 3, "1"), (2, 4, "1"), (3, 4, "1")];
        let g = graph(q(), 4, &all);
        let certs = detect_4c(&g, DEFAULT_CERTIFICATE_CAP);
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].vertices(), &[1, 2, 3, 4]);
        validate_certificate(&g, &certs[0]).unwrap();
        assert!(oracle_label(&graph(fp(3), 4, &all), 100_000_000).unwrap().is_none());
        // setting the (1,3) weight to 2 restores the identity: labelable
        let near = [(1, 2, "1"), (1, 3, "2"), (1, 4, "1"), (2, 3, "1"), (2, 4, "1"), (3, 4, "1")];
        let h = graph(fp(3), 4, &near);
        assert!(detect_4c(&h, DEFAULT_CERTIFICATE_CAP).is_empty());
        assert!(detect_all(&h, None, DEFAULT_CERTIFICATE_CAP).is_empty());
        assert!(oracle_label(&h, 100_000_000).unwrap().is_some());
    }

    #[test]
    fn size_six_family_a() {
        // zero path 1−2−3 closed by the zero edge (1,4); the nonzero edge
        // (3,4) plus pendants at 1 and 2 complete the contradiction
        let g = graph(
            fp(2),
            6,
            &[(1, 2, "0"), (2, 3, "0"), (1, 4, "0"), (3, 4, "1"), (1, 5, "1"), (2, 6, "1")],
        );
        let certs = detect_m_a(&g, 6, DEFAULT_CERTIFICATE_CAP);
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].vertices(), &[1, 2, 3, 4, 5, 6]);
        validate_certificate(&g, &certs[0]).unwrap();
        assert!(oracle_label(&g, 100_000_000).unwrap().is_none());
        // no smaller family applies, so the size bound controls discovery
        assert!(detect_all(&g, Some(4), DEFAULT_CERTIFICATE_CAP).is_empty());
        let found = detect_all(&g, None, DEFAULT_CERTIFICATE_CAP);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].size(), 6);
    }

    #[test]
    fn detect_all_order_and_cap() {
        // two disjoint defects: a size-4 family A on 1..4 and a family B on 5..8
        let g = graph(
            q(),
            8,
            &[
                (1, 2, "1"),
                (1, 3, "0"),
                (2, 3, "0"),
                (3, 4, "1"),
                (5, 6, "1"),
                (5, 7, "0"),
                (5, 8, "1"),
                (6, 7, "1"),
                (7, 8, "1"),
            ],
        );
        let all = detect_all(&g, None, DEFAULT_CERTIFICATE_CAP);
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].family(), DefectFamily::A);
        assert_eq!(all[1].family(), DefectFamily::B);
        for c in &all {
            validate_certificate(&g, c).unwrap();
        }
        let capped = detect_all(&g, None, 1);
        assert_eq!(capped.len(), 1);
        assert_eq!(capped[0].family(), DefectFamily::A);
        assert!(detect_all(&g, None, 0).is_empty());
    }

    #[test]
    fn validation_rejects_tampering() {
        let g = pendant_triangle(q());
        let good = detect_m_a(&g, 4, 1).remove(0);
        // weight tampering
        let mut edges = good.edges().to_vec();
        edges[2].weight = q().parse("2").unwrap();
        let bad = DefectCertificate::new(DefectFamily::A, good.vertices().to_vec(), edges).unwrap();
        assert_eq!(validate_certificate(&g, &bad), Err(DefectError::WrongWeight(1, 2)));
        // a different graph rejects the original certificate
        let other = graph(q(), 4, &[(1, 2, "1"), (1, 3, "0"), (2, 3, "0"), (3, 4, "2")]);
        assert_eq!(validate_certificate(&other, &good), Err(DefectError::WrongWeight(3, 4)));
        // vertex out of range
        let shifted = good.relabel(|v| v + 2);
        assert_eq!(validate_certificate(&g, &shifted), Err(DefectError::VertexOutOfRange(5, 4)));
        // missing edge: drop (3,4) from the graph
        let smaller = graph(q(), 4, &[(1, 2, "1"), (1, 3, "0"), (2, 3, "0")]);
        assert_eq!(validate_certificate(&smaller, &good), Err(DefectError::MissingEdge(3, 4)));
        // pattern mismatch is caught at construction
        let mut wrong = good.edges().to_vec();
        wrong.swap(0, 1);
        assert!(DefectCertificate::new(DefectFamily::A, good.vertices().to_vec(), wrong).is_err());
        // a zero weight where the family needs nonzero
        let zeroed = graph(q(), 4, &[(1, 2, "0"), (1, 3, "0"), (2, 3, "0"), (3, 4, "1")]);
        let mut e = good.edges().to_vec();
        e[2].weight = q().zero();
        let z = DefectCertificate::new(DefectFamily::A, good.vertices().to_vec(), e).unwrap();
        assert_eq!(validate_certificate(&zeroed, &z), Err(DefectError::ExpectedNonzero(1, 2)));
    }

    #[test]
    fn condition_failure_is_detected() {
        // family B built by hand on weights whose sum vanishes
        let g = graph(q(), 4, &[(1, 2, "1"), (1, 3, "0"), (1, 4, "1"), (2, 3, "1"), (3, 4, "-1")]);
        let cert = DefectCertificate::new(
            DefectFamily::B,
            vec![1, 2, 3, 4],
            vec![
                CitedEdge { u: 1, v: 2, weight: q().parse("1").unwrap() },
                CitedEdge { u: 1, v: 4, weight: q().parse("1").unwrap() },
                CitedEdge { u: 2, v: 3, weight: q().parse("1").unwrap() },
                CitedEdge { u: 3, v: 4, weight: q().parse("-1").unwrap() },
                CitedEdge { u: 1, v: 3, weight: q().parse("0").unwrap() },
            ],
        )
        .unwrap();
        assert_eq!(validate_certificate(&g, &cert), Err(DefectError::ConditionFails));
    }

    #[test]
    fn every_certificate_is_sound_exhaustively() {
        // over every 4-vertex graph over F_2 and F_3: a reported certificate
        // implies the brute-force search finds no labeling, and every
        // certificate validates against its own graph
        for p in [2u64, 3] {
            let e = GraphEnumerator::new(4, p).unwrap();
            for g in e.iter() {
                let certs = detect_all(&g, None, DEFAULT_CERTIFICATE_CAP);
                if certs.is_empty() {
                    continue;
                }
                for c in &certs {
                    validate_certificate(&g, c).unwrap();
                }
                assert!(
                    oracle_label(&g, 100_000_000).unwrap().is_none(),
                    "certificate on a labelable graph: {g:?}"
                );
            }
        }
    }

    #[test]
    fn detection_is_deterministic() {
        let g = graph(
            q(),
            8,
            &[
                (1, 2, "1"),
                (1, 3, "0"),
                (2, 3, "0"),
                (3, 4, "1"),
                (5, 6, "1"),
                (5, 7, "0"),
                (5, 8, "1"),
                (6, 7, "1"),
                (7, 8, "1"),
            ],
        );
        let a = detect_all(&g, None, DEFAULT_CERTIFICATE_CAP);
        let b = detect_all(&g, None, DEFAULT_CERTIFICATE_CAP);
        assert_eq!(a, b);
    }
}
