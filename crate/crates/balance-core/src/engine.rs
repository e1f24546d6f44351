//! The structured decision engine.
//!
//! Pipeline: strip null vertices (they take the label `(0, 0)`), split into
//! connected components, and decide each component:
//!
//! * up to three vertices — trees and triangles, always labelable by a
//!   direct construction;
//! * exactly four vertices — a complete case analysis over the six
//!   connected shapes, producing either a labeling from one of four
//!   closed-form tables or a defect certificate;
//! * five or more vertices — defect detection first, then (over a prime
//!   field, within budget) the brute-force oracle, otherwise undecided.
//!
//! Free parameters in the tables default to canonical values but can be
//! randomized through [`TableParams`]; parameter choice never affects the
//! decision, only which labeling is reported.

use crate::defect::{
    detect_4b, detect_4c, detect_m_a, detect_all, validate_certificate, DefectCertificate,
    DEFAULT_CERTIFICATE_CAP,
};
use crate::field::{FieldDescriptor, Scalar};
use crate::graph::{Labeling, VertexPermutation, WeightedGraph};
use crate::oracle::oracle_label;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(thiserror::Error, Clone, PartialEq, Eq, Debug)]
pub enum EngineError {
    #[error("expected a connected graph on exactly 4 vertices, found {0} vertices")]
    NotFour(usize),
    #[error("graph is not connected")]
    NotConnected,
    #[error("vertex {0} carries no nonzero edge; strip null vertices first")]
    NullVertex(usize),
    #[error("graph is not a tree")]
    NotATree,
    #[error("graph is not a triangle or quadrilateral cycle")]
    NotACycle,
}

/// The connected shapes the engine distinguishes.  `Gamma1` through
/// `Gamma6` are the six connected shapes on four vertices: triangle with a
/// pendant edge, the diagonal-plus-cycle shape, the complete graph, the
/// 4-cycle, the path, and the star.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ShapeClass {
    Edgeless,
    SingleEdge,
    Tree,
    Triangle,
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
    Gamma5,
    Gamma6,
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ShapeClass::Edgeless => "Edgeless",
            ShapeClass::SingleEdge => "SingleEdge",
            ShapeClass::Tree => "Tree",
            ShapeClass::Triangle => "Triangle",
            ShapeClass::Gamma1 => "Gamma1",
            ShapeClass::Gamma2 => "Gamma2",
            ShapeClass::Gamma3 => "Gamma3",
            ShapeClass::Gamma4 => "Gamma4",
            ShapeClass::Gamma5 => "Gamma5",
            ShapeClass::Gamma6 => "Gamma6",
        };
        f.write_str(s)
    }
}

/// Canonical edge positions of the four-vertex shapes.
pub fn canonical_edges(shape: ShapeClass) -> Option<&'static [(usize, usize)]> {
    match shape {
        ShapeClass::Gamma1 => Some(&[(1, 2), (1, 3), (2, 3), (3, 4)]),
        ShapeClass::Gamma2 => Some(&[(1, 2), (1, 3), (1, 4), (2, 3), (3, 4)]),
        ShapeClass::Gamma3 => Some(&[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]),
        ShapeClass::Gamma4 => Some(&[(1, 2), (1, 4), (2, 3), (3, 4)]),
        ShapeClass::Gamma5 => Some(&[(1, 2), (2, 3), (3, 4)]),
        ShapeClass::Gamma6 => Some(&[(1, 2), (1, 3), (1, 4)]),
        _ => None,
    }
}

/// Classifies a connected graph on at most four vertices.  Returns `None`
/// for disconnected graphs and for five or more vertices.  The four-vertex
/// shapes are distinguished by their degree multisets, which differ
/// pairwise.
pub fn classify_shape(graph: &WeightedGraph) -> Option<ShapeClass> {
    let n = graph.vertex_count();
    if n == 0 || n > 4 || graph.connected_components().len() != 1 {
        return None;
    }
    match n {
        1 => Some(ShapeClass::Edgeless),
        2 => Some(ShapeClass::SingleEdge),
        3 => Some(if graph.edge_count() == 3 { ShapeClass::Triangle } else { ShapeClass::Tree }),
        4 => {
            let mut degrees: Vec<usize> = (1..=4).map(|v| graph.degree(v)).collect();
            degrees.sort_unstable();
            match degrees.as_slice() {
                [1, 2, 2, 3] => Some(ShapeClass::Gamma1),
                [2, 2, 3, 3] => Some(ShapeClass::Gamma2),
                [3, 3, 3, 3] => Some(ShapeClass::Gamma3),
                [2, 2, 2, 2] => Some(ShapeClass::Gamma4),
                [1, 1, 2, 2] => Some(ShapeClass::Gamma5),
                [1, 1, 1, 3] => Some(ShapeClass::Gamma6),
                _ => unreachable!("connected 4-vertex degree multiset"),
            }
        }
        _ => unreachable!(),
    }
}

fn edge_keys(graph: &WeightedGraph) -> BTreeSet<(usize, usize)> {
    graph.edges().map(|(u, v, _)| (u, v)).collect()
}

/// Reads the stored weight at canonical position `(u, v)`, `u < v`.
fn d(graph: &WeightedGraph, u: usize, v: usize) -> Scalar {
    graph
        .weight(u, v)
        .cloned()
        .unwrap_or_else(|| graph.field().zero())
}

/// The lexicographically first permutation sending `graph` onto the
/// canonical edge positions of its shape, with the relabeled graph.
pub fn normalize_four(
    graph: &WeightedGraph,
) -> Result<(ShapeClass, VertexPermutation, WeightedGraph), EngineError> {
    if graph.vertex_count() != 4 {
        return Err(EngineError::NotFour(graph.vertex_count()));
    }
    let shape = classify_shape(graph).ok_or(EngineError::NotConnected)?;
    let target: BTreeSet<(usize, usize)> =
        canonical_edges(shape).expect("four-vertex shape").iter().copied().collect();
    for sigma in VertexPermutation::all(4) {
        let image = graph.apply_permutation(&sigma);
        if edge_keys(&image) == target {
            return Ok((shape, sigma, image));
        }
    }
    unreachable!("a classifying permutation always exists")
}

/// Free parameters for the labeling tables.  Every combination of values
/// (with the `*_unit` entries nonzero) yields a valid labeling whenever the
/// corresponding table applies; the canonical choice uses `0` for free
/// entries and `1` for units.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TableParams {
    /// Table 1: the free second coordinate of vertex 1.
    pub beta1_free: Scalar,
    /// Table 1: the invertible second coordinate of vertex 3.
    pub beta3_unit: Scalar,
    /// Table 1 on the pendant-triangle shape: the free second coordinate of
    /// vertex 4.
    pub beta4_free: Scalar,
    /// Table 2: the invertible second coordinate of vertex 4.
    pub beta4_unit: Scalar,
    /// Tables 3 and 4: the invertible second coordinate of vertex 1.
    pub beta1_unit: Scalar,
    /// Table 2 when the pair `(2, 4)` is absent: the free first coordinate
    /// of vertex 4.
    pub alpha4_free: Scalar,
}

impl TableParams {
    pub fn canonical(field: FieldDescriptor) -> Self {
        TableParams {
            beta1_free: field.zero(),
            beta3_unit: field.one(),
            beta4_free: field.zero(),
            beta4_unit: field.one(),
            beta1_unit: field.one(),
            alpha4_free: field.zero(),
        }
    }

    pub fn random<R: Rng>(field: FieldDescriptor, rng: &mut R) -> Self {
        TableParams {
            beta1_free: field.random(rng),
            beta3_unit: field.random_nonzero(rng),
            beta4_free: field.random(rng),
            beta4_unit: field.random_nonzero(rng),
            beta1_unit: field.random_nonzero(rng),
            alpha4_free: field.random(rng),
        }
    }
}

fn checked(graph: &WeightedGraph, labeling: Labeling) -> Labeling {
    let violations = graph.verify_labeling(&labeling).expect("labeling is well-formed");
    assert!(violations.is_empty(), "internal construction must satisfy every edge: {violations:?}");
    labeling
}

/// Table 1: labels the canonical pendant-triangle shape, and the canonical
/// diagonal shape when the diagonal weight at `(1, 3)` is nonzero.
///
/// Requires canonical position and `d13 ≠ 0`; the pair `(1, 4)`, when it is
/// an edge, switches vertex 4 from the free form to the determined form.
pub fn table1(graph: &WeightedGraph, params: &TableParams) -> Labeling {
    let f = graph.field();
    let d12 = d(graph, 1, 2);
    let d13 = d(graph, 1, 3);
    let d23 = d(graph, 2, 3);
    let d34 = d(graph, 3, 4);
    assert!(!d13.is_zero(), "table 1 requires d13 ≠ 0");
    let beta3 = params.beta3_unit.clone();
    let beta3_inv = beta3.inverted().expect("unit parameter");
    let d13_inv = d13.inverted().expect("d13 ≠ 0");
    let beta1 = params.beta1_free.clone();
    let alpha1 = &d13 * &beta3_inv;
    let alpha2 = &d23 * &beta3_inv;
    let beta2 = &(&(&d12 + &(&(&d23 * &beta3_inv) * &beta1)) * &d13_inv) * &beta3;
    let alpha4 = (&d34 * &beta3_inv).negated();
    let beta4 = if graph.has_edge(1, 4) {
        let d14 = d(graph, 1, 4);
        &(&(&d14 - &(&(&d34 * &beta1) * &beta3_inv)) * &d13_inv) * &beta3
    } else {
        params.beta4_free.clone()
    };
    checked(
        graph,
        Labeling::new(vec![
            (alpha1, beta1),
            (alpha2, beta2),
            (f.zero(), beta3),
            (alpha4, beta4),
        ]),
    )
}

/// Table 2: labels the canonical diagonal shape (and the complete graph)
/// when `d13 = 0`, `d14 ≠ 0`, and the balance relation
/// `d12·d34 + d23·d14 = 0` holds.
///
/// When the pair `(2, 4)` is an edge its equation determines the first
/// coordinate of vertex 4; otherwise that coordinate is free.
pub fn table2(graph: &WeightedGraph, params: &TableParams) -> Labeling {
    let f = graph.field();
    let d12 = d(graph, 1, 2);
    let d14 = d(graph, 1, 4);
    let d34 = d(graph, 3, 4);
    assert!(d(graph, 1, 3).is_zero(), "table 2 requires d13 = 0");
    assert!(!d14.is_zero(), "table 2 requires d14 ≠ 0");
    let beta4 = params.beta4_unit.clone();
    let beta4_inv = beta4.inverted().expect("unit parameter");
    let d14_inv = d14.inverted().expect("d14 ≠ 0");
    let alpha1 = &d14 * &beta4_inv;
    let beta2 = &(&d12 * &d14_inv) * &beta4;
    let alpha3 = &d34 * &beta4_inv;
    let alpha4 = if graph.has_edge(2, 4) {
        let d24 = d(graph, 2, 4);
        if d24.is_zero() {
            f.zero()
        } else {
            assert!(!d12.is_zero(), "table 2 with d24 ≠ 0 requires d12 ≠ 0");
            (&(&(&d24 * &d12.inverted().unwrap()) * &d14) * &beta4_inv).negated()
        }
    } else {
        params.alpha4_free.clone()
    };
    checked(
        graph,
        Labeling::new(vec![
            (alpha1, f.zero()),
            (f.zero(), beta2),
            (alpha3, f.zero()),
            (alpha4, beta4),
        ]),
    )
}

/// Table 3: labels the complete graph when every weight is nonzero and the
/// Plücker expression `d12·d34 − d13·d24 + d14·d23` vanishes.
pub fn table3(graph: &WeightedGraph, params: &TableParams) -> Labeling {
    let f = graph.field();
    let d12 = d(graph, 1, 2);
    let d13 = d(graph, 1, 3);
    let d14 = d(graph, 1, 4);
    let d24 = d(graph, 2, 4);
    let d34 = d(graph, 3, 4);
    assert!(!d14.is_zero(), "table 3 requires nonzero weights");
    let beta1 = params.beta1_unit.clone();
    let beta1_inv = beta1.inverted().expect("unit parameter");
    let d14_inv = d14.inverted().unwrap();
    checked(
        graph,
        Labeling::new(vec![
            (f.zero(), beta1.clone()),
            ((&d12 * &beta1_inv).negated(), &(&d24 * &d14_inv) * &beta1),
            ((&d13 * &beta1_inv).negated(), &(&d34 * &d14_inv) * &beta1),
            ((&d14 * &beta1_inv).negated(), f.zero()),
        ]),
    )
}

/// Table 4: labels the complete graph whose zero weights sit exactly on the
/// triangle `{1, 2, 4}`, that is `d12 = d14 = d24 = 0`.
pub fn table4(graph: &WeightedGraph, params: &TableParams) -> Labeling {
    let f = graph.field();
    let d13 = d(graph, 1, 3);
    let d23 = d(graph, 2, 3);
    let d34 = d(graph, 3, 4);
    assert!(
        d(graph, 1, 2).is_zero() && d(graph, 1, 4).is_zero() && d(graph, 2, 4).is_zero(),
        "table 4 requires the zero triangle at {{1, 2, 4}}"
    );
    assert!(!d13.is_zero(), "table 4 requires d13 ≠ 0");
    let beta1 = params.beta1_unit.clone();
    let beta1_inv = beta1.inverted().expect("unit parameter");
    let d13_inv = d13.inverted().unwrap();
    checked(
        graph,
        Labeling::new(vec![
            (f.zero(), beta1.clone()),
            (f.zero(), &(&d23 * &d13_inv) * &beta1),
            ((&d13 * &beta1_inv).negated(), beta1.clone()),
            (f.zero(), (&(&d34 * &d13_inv) * &beta1).negated()),
        ]),
    )
}

/// Labels any tree: the root (vertex 1) takes `(0, 1)` and each child is
/// solved against its parent, falling back to the parent's own pair when
/// the connecting weight is zero.
pub fn label_tree(graph: &WeightedGraph) -> Result<Labeling, EngineError> {
    let n = graph.vertex_count();
    if n == 0 || graph.edge_count() != n - 1 || graph.connected_components().len() != 1 {
        return Err(EngineError::NotATree);
    }
    let f = graph.field();
    let mut pairs: Vec<Option<(Scalar, Scalar)>> = vec![None; n + 1];
    pairs[1] = Some((f.zero(), f.one()));
    let mut stack = vec![1usize];
    while let Some(p) = stack.pop() {
        let (ap, bp) = pairs[p].clone().unwrap();
        for c in graph.neighbors(p) {
            if pairs[c].is_some() {
                continue;
            }
            let w = graph.signed_weight(p, c).unwrap();
            let mut pair = if !bp.is_zero() {
                ((&w * &bp.inverted().unwrap()).negated(), f.zero())
            } else {
                (f.zero(), &w * &ap.inverted().unwrap())
            };
            if pair.0.is_zero() && pair.1.is_zero() {
                pair = (ap.clone(), bp.clone());
            }
            pairs[c] = Some(pair);
            stack.push(c);
        }
    }
    Ok(checked(
        graph,
        Labeling::new(pairs.into_iter().skip(1).map(Option::unwrap).collect()),
    ))
}

/// Labels any triangle or quadrilateral cycle.  If every weight is zero the
/// all-`(0, 0)` labeling works; otherwise the cycle is rotated so the edge
/// at `(1, 2)` has nonzero weight and a closed-form labeling applies.
pub fn label_cycle(graph: &WeightedGraph) -> Result<Labeling, EngineError> {
    let n = graph.vertex_count();
    let is_cycle = (n == 3 || n == 4)
        && graph.edge_count() == n
        && (1..=n).all(|v| graph.degree(v) == 2)
        && graph.connected_components().len() == 1;
    if !is_cycle {
        return Err(EngineError::NotACycle);
    }
    let f = graph.field();
    if graph.edges().all(|(_, _, w)| w.is_zero()) {
        return Ok(checked(graph, Labeling::new(vec![(f.zero(), f.zero()); n])));
    }
    let target: BTreeSet<(usize, usize)> = if n == 3 {
        [(1, 2), (1, 3), (2, 3)].into_iter().collect()
    } else {
        [(1, 2), (1, 4), (2, 3), (3, 4)].into_iter().collect()
    };
    for sigma in VertexPermutation::all(n) {
        let g = graph.apply_permutation(&sigma);
        if edge_keys(&g) != target || d(&g, 1, 2).is_zero() {
            continue;
        }
        let d12 = d(&g, 1, 2);
        let d12_inv = d12.inverted().unwrap();
        let d23 = d(&g, 2, 3);
        let labeled = if n == 3 {
            let d13 = d(&g, 1, 3);
            Labeling::new(vec![
                (f.zero(), f.one()),
                (d12.negated(), f.zero()),
                (d13.negated(), (&d23 * &d12_inv).negated()),
            ])
        } else {
            let d14 = d(&g, 1, 4);
            let d34 = d(&g, 3, 4);
            Labeling::new(vec![
                (f.zero(), f.one()),
                (d12.negated(), f.zero()),
                (f.one(), (&d23 * &d12_inv).negated()),
                (d14.negated(), &d34 + &(&(&d14 * &d23) * &d12_inv)),
            ])
        };
        return Ok(checked(graph, labeled.permute(&sigma.inverse())));
    }
    unreachable!("a nonzero cycle edge can always be rotated to (1, 2)")
}

/// Outcome of the complete four-vertex analysis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FourOutcome {
    Labeled(Labeling),
    Defective(DefectCertificate),
}

/// The four-vertex decision together with which branch produced it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FourAnalysis {
    pub shape: ShapeClass,
    /// A short branch tag, e.g. `"1a-table1"` or `"3c-table2"`.
    pub case: &'static str,
    /// The free parameter values that shaped the reported labeling.
    pub parameters: BTreeMap<String, String>,
    pub outcome: FourOutcome,
}

fn first_defect(certs: Vec<DefectCertificate>) -> DefectCertificate {
    certs.into_iter().next().expect("the dispatched detector must find its certificate")
}

/// Decides a connected four-vertex graph in which every vertex carries at
/// least one nonzero edge.  Always returns either a verified labeling or a
/// validated defect certificate.
pub fn label_four(graph: &WeightedGraph, params: &TableParams) -> Result<FourAnalysis, EngineError> {
    if graph.vertex_count() != 4 {
        return Err(EngineError::NotFour(graph.vertex_count()));
    }
    if classify_shape(graph).is_none() {
        return Err(EngineError::NotConnected);
    }
    if let Some(&v) = graph.null_vertices().iter().next() {
        return Err(EngineError::NullVertex(v));
    }
    let (shape, sigma, g) = normalize_four(graph)?;
    let p = |entries: &[(&str, &Scalar)]| -> BTreeMap<String, String> {
        entries.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    };
    let pull = |l: Labeling, total: &VertexPermutation| {
        checked(graph, l.permute(&total.inverse()))
    };
    let defect = |certs: Vec<DefectCertificate>| {
        let c = first_defect(certs);
        validate_certificate(graph, &c).expect("dispatched certificate validates");
        c
    };
    let analysis = match shape {
        ShapeClass::Gamma5 | ShapeClass::Gamma6 => FourAnalysis {
            shape,
            case: "tree",
            parameters: BTreeMap::new(),
            outcome: FourOutcome::Labeled(label_tree(graph)?),
        },
        ShapeClass::Gamma4 => FourAnalysis {
            shape,
            case: "cycle",
            parameters: BTreeMap::new(),
            outcome: FourOutcome::Labeled(label_cycle(graph)?),
        },
        ShapeClass::Gamma1 => {
            if !d(&g, 1, 3).is_zero() {
                FourAnalysis {
                    shape,
                    case: "1a-table1",
                    parameters: p(&[
                        ("beta1", &params.beta1_free),
                        ("beta3", &params.beta3_unit),
                        ("beta4", &params.beta4_free),
                    ]),
                    outcome: FourOutcome::Labeled(pull(table1(&g, params), &sigma)),
                }
            } else if !d(&g, 2, 3).is_zero() {
                // swap vertices 1 and 2; the shape is preserved and the
                // former (2, 3) weight moves onto the needed (1, 3) slot
                let tau = VertexPermutation::new(vec![2, 1, 3, 4]).unwrap();
                let total = sigma.then(&tau);
                let swapped = g.apply_permutation(&tau);
                FourAnalysis {
                    shape,
                    case: "1b-table1-swapped",
                    parameters: p(&[
                        ("beta1", &params.beta1_free),
                        ("beta3", &params.beta3_unit),
                        ("beta4", &params.beta4_free),
                    ]),
                    outcome: FourOutcome::Labeled(pull(table1(&swapped, params), &total)),
                }
            } else {
                // both triangle weights at vertex 3 are zero; with no null
                // vertex this forces the pendant-and-cycle contradiction
                FourAnalysis {
                    shape,
                    case: "1c-defect",
                    parameters: BTreeMap::new(),
                    outcome: FourOutcome::Defective(defect(detect_m_a(graph, 4, 1))),
                }
            }
        }
        ShapeClass::Gamma2 => {
            let (d12, d13, d14) = (d(&g, 1, 2), d(&g, 1, 3), d(&g, 1, 4));
            let (d23, d34) = (d(&g, 2, 3), d(&g, 3, 4));
            if !d13.is_zero() {
                FourAnalysis {
                    shape,
                    case: "2a-table1",
                    parameters: p(&[("beta1", &params.beta1_free), ("beta3", &params.beta3_unit)]),
                    outcome: FourOutcome::Labeled(pull(table1(&g, params), &sigma)),
                }
            } else if d12.is_zero() || d23.is_zero() || d14.is_zero() || d34.is_zero() {
                FourAnalysis {
                    shape,
                    case: "2b-defect",
                    parameters: BTreeMap::new(),
                    outcome: FourOutcome::Defective(defect(detect_m_a(graph, 4, 1))),
                }
            } else if !(&(&d12 * &d34) + &(&d23 * &d14)).is_zero() {
                FourAnalysis {
                    shape,
                    case: "2c-defect",
                    parameters: BTreeMap::new(),
                    outcome: FourOutcome::Defective(defect(detect_4b(graph, 1))),
                }
            } else {
                FourAnalysis {
                    shape,
                    case: "2d-table2",
                    parameters: p(&[
                        ("alpha4", &params.alpha4_free),
                        ("beta4", &params.beta4_unit),
                    ]),
                    outcome: FourOutcome::Labeled(pull(table2(&g, params), &sigma)),
                }
            }
        }
        ShapeClass::Gamma3 => label_complete(graph, &g, &sigma, params),
        _ => unreachable!("connected four-vertex graphs classify as Gamma1..Gamma6"),
    };
    Ok(analysis)
}

/// The complete-graph case split, by how many of the six weights vanish.
fn label_complete(
    original: &WeightedGraph,
    g: &WeightedGraph,
    sigma: &VertexPermutation,
    params: &TableParams,
) -> FourAnalysis {
    let shape = ShapeClass::Gamma3;
    let p = |entries: &[(&str, &Scalar)]| -> BTreeMap<String, String> {
        entries.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    };
    let pull = |l: Labeling, total: &VertexPermutation| {
        let out = l.permute(&total.inverse());
        let violations = original.verify_labeling(&out).expect("well-formed");
        assert!(violations.is_empty(), "internal construction must satisfy every edge");
        out
    };
    let defect = |certs: Vec<DefectCertificate>| {
        let c = first_defect(certs);
        validate_certificate(original, &c).expect("dispatched certificate validates");
        c
    };
    // find the lexicographically first relabeling of the complete graph that
    // places the zero weights on the wanted slots
    let re_zero = |wanted: &[(usize, usize)]| -> (VertexPermutation, WeightedGraph) {
        for tau in VertexPermutation::all(4) {
            let h = g.apply_permutation(&tau);
            let zeros: BTreeSet<(usize, usize)> = h
                .edges()
                .filter(|(_, _, w)| w.is_zero())
                .map(|(u, v, _)| (u, v))
                .collect();
            if zeros == wanted.iter().copied().collect() {
                return (sigma.then(&tau), h);
            }
        }
        unreachable!("the zero pattern can always be permuted onto the wanted slots")
    };
    let zeros: Vec<(usize, usize)> = g
        .edges()
        .filter(|(_, _, w)| w.is_zero())
        .map(|(u, v, _)| (u, v))
        .collect();
    let balanced = |h: &WeightedGraph| {
        (&(&d(h, 1, 2) * &d(h, 3, 4)) + &(&d(h, 2, 3) * &d(h, 1, 4))).is_zero()
    };
    match zeros.len() {
        0 => {
            let pluecker = &(&(&d(g, 1, 2) * &d(g, 3, 4)) - &(&d(g, 1, 3) * &d(g, 2, 4)))
                + &(&d(g, 1, 4) * &d(g, 2, 3));
            if !pluecker.is_zero() {
                FourAnalysis {
                    shape,
                    case: "3a-defect",
                    parameters: BTreeMap::new(),
                    outcome: FourOutcome::Defective(defect(detect_4c(original, 1))),
                }
            } else {
                FourAnalysis {
                    shape,
                    case: "3a-table3",
                    parameters: p(&[("beta1", &params.beta1_unit)]),
                    outcome: FourOutcome::Labeled(pull(table3(g, params), sigma)),
                }
            }
        }
        1 => {
            let (total, h) = re_zero(&[(1, 3)]);
            if !balanced(&h) {
                FourAnalysis {
                    shape,
                    case: "3b-defect",
                    parameters: BTreeMap::new(),
                    outcome: FourOutcome::Defective(defect(detect_4b(original, 1))),
                }
            } else {
                FourAnalysis {
                    shape,
                    case: "3b-table2",
                    parameters: p(&[("beta4", &params.beta4_unit)]),
                    outcome: FourOutcome::Labeled(pull(table2(&h, params), &total)),
                }
            }
        }
        2 => {
            let share = zeros[0].0 == zeros[1].0
                || zeros[0].0 == zeros[1].1
                || zeros[0].1 == zeros[1].0
                || zeros[0].1 == zeros[1].1;
            if share {
                FourAnalysis {
                    shape,
                    case: "3c-defect",
                    parameters: BTreeMap::new(),
                    outcome: FourOutcome::Defective(defect(detect_m_a(original, 4, 1))),
                }
            } else {
                let (total, h) = re_zero(&[(1, 3), (2, 4)]);
                if !balanced(&h) {
                    FourAnalysis {
                        shape,
                        case: "3c-unbalanced-defect",
                        parameters: BTreeMap::new(),
                        outcome: FourOutcome::Defective(defect(detect_4b(original, 1))),
                    }
                } else {
                    FourAnalysis {
                        shape,
                        case: "3c-table2",
                        parameters: p(&[("beta4", &params.beta4_unit)]),
                        outcome: FourOutcome::Labeled(pull(table2(&h, params), &total)),
                    }
                }
            }
        }
        3 => {
            // three zeros among six edges form either a triangle or a path;
            // a star would leave its center with no nonzero edge
            let mut deg = [0usize; 5];
            for &(u, v) in &zeros {
                deg[u] += 1;
                deg[v] += 1;
            }
            let triangle = deg.iter().all(|&c| c != 3) && deg.iter().filter(|&&c| c == 2).count() == 3;
            if triangle {
                let (total, h) = re_zero(&[(1, 2), (1, 4), (2, 4)]);
                FourAnalysis {
                    shape,
                    case: "3d-table4",
                    parameters: p(&[("beta1", &params.beta1_unit)]),
                    outcome: FourOutcome::Labeled(pull(table4(&h, params), &total)),
                }
            } else {
                FourAnalysis {
                    shape,
                    case: "3d-defect",
                    parameters: BTreeMap::new(),
                    outcome: FourOutcome::Defective(defect(detect_m_a(original, 4, 1))),
                }
            }
        }
        4 => FourAnalysis {
            shape,
            case: "3e-defect",
            parameters: BTreeMap::new(),
            outcome: FourOutcome::Defective(defect(detect_m_a(original, 4, 1))),
        },
        _ => unreachable!("five or more zeros would leave a vertex with no nonzero edge"),
    }
}

/// Tuning knobs for [`decide`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DecideConfig {
    /// Work bound for the fallback oracle on large prime-field components.
    pub budget: u64,
    /// Largest family-A certificate size to search for (default `2n − 2`).
    pub max_m: Option<usize>,
    /// Seed for randomized table parameters; `None` uses canonical values.
    pub table_seed: Option<u64>,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig { budget: 100_000_000, max_m: None, table_seed: None }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DecisionStatus {
    /// A consistent labeling exists and is reported.
    Labelable,
    /// A defect certificate proves no labeling exists.
    NotLabelable,
    /// Exhaustive search over the prime field found no labeling, but no
    /// structural certificate is known.
    NotLabelableByOracle,
    /// Neither a labeling nor a refutation was found within the configured
    /// means.
    Unknown,
}

/// Human-oriented explanation of how a decision was reached.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Diagnostics {
    /// Shape of the decisive component, when it was a single classified one.
    pub shape: Option<String>,
    /// Branch tag of the decisive component's analysis.
    pub case: Option<String>,
    /// Free parameter values used by the labeling tables.
    pub parameters: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Decision {
    pub status: DecisionStatus,
    pub labeling: Option<Labeling>,
    pub certificate: Option<DefectCertificate>,
    pub diagnostics: Diagnostics,
}

fn saturating_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

enum ComponentOutcome {
    Labeled(Labeling),
    Certified(DefectCertificate),
    RefutedByOracle,
    Undecided,
}

/// Decides solvability of the balance system of `graph`.
///
/// Always terminates with one of the four statuses; `Labelable` comes with
/// a full verified labeling (null vertices labeled `(0, 0)`) and
/// `NotLabelable` with a validated certificate.
pub fn decide(graph: &WeightedGraph, config: &DecideConfig) -> Decision {
    let field = graph.field();
    let mut rng = config.table_seed.map(ChaCha8Rng::seed_from_u64);
    let mut diagnostics = Diagnostics::default();
    let nulls = graph.null_vertices();
    if !nulls.is_empty() {
        diagnostics
            .notes
            .push(format!("null vertices {:?} labeled (0, 0)", nulls.iter().collect::<Vec<_>>()));
    }
    let active: BTreeSet<usize> =
        (1..=graph.vertex_count()).filter(|v| !nulls.contains(v)).collect();
    let (stripped, stripped_ids) = graph.induced(&active);

    let components = stripped.connected_components();
    let mut outcomes: Vec<ComponentOutcome> = Vec::new();
    let mut single_analysis: Option<(Option<String>, Option<String>, BTreeMap<String, String>)> =
        None;
    for comp in &components {
        let (sub, sub_ids) = stripped.induced(comp);
        let ambient: Vec<usize> = sub_ids.iter().map(|&h| stripped_ids[h - 1]).collect();
        let to_ambient = |v: usize| ambient[v - 1];
        let nc = sub.vertex_count();
        let params = match rng.as_mut() {
            Some(r) => TableParams::random(field, r),
            None => TableParams::canonical(field),
        };
        let outcome = if nc <= 3 {
            let (labeling, kind) = if sub.edge_count() == nc - 1 {
                (label_tree(&sub).expect("component is a tree"), "tree")
            } else {
                (label_cycle(&sub).expect("component is a triangle"), "triangle")
            };
            diagnostics.notes.push(format!("component {ambient:?}: {kind}, labeled"));
            if components.len() == 1 {
                let shape = classify_shape(&sub).map(|s| s.to_string());
                single_analysis = Some((shape, Some(kind.to_string()), BTreeMap::new()));
            }
            ComponentOutcome::Labeled(labeling)
        } else if nc == 4 {
            let analysis = label_four(&sub, &params).expect("component fits label_four");
            diagnostics.notes.push(format!(
                "component {ambient:?}: shape {}, case {}",
                analysis.shape, analysis.case
            ));
            if components.len() == 1 {
                single_analysis = Some((
                    Some(analysis.shape.to_string()),
                    Some(analysis.case.to_string()),
                    analysis.parameters.clone(),
                ));
            }
            match analysis.outcome {
                FourOutcome::Labeled(l) => ComponentOutcome::Labeled(l),
                FourOutcome::Defective(c) => {
                    let lifted = c.relabel(to_ambient);
                    debug_assert!(validate_certificate(graph, &lifted).is_ok());
                    ComponentOutcome::Certified(lifted)
                }
            }
        } else {
            let certs = detect_all(&sub, config.max_m, DEFAULT_CERTIFICATE_CAP);
            if let Some(c) = certs.into_iter().next() {
                diagnostics
                    .notes
                    .push(format!("component {ambient:?}: defect certificate found"));
                let lifted = c.relabel(to_ambient);
                debug_assert!(validate_certificate(graph, &lifted).is_ok());
                ComponentOutcome::Certified(lifted)
            } else {
                match field {
                    FieldDescriptor::Prime { p }
                        if saturating_pow(p as u128, 2 * nc as u32) <= config.budget as u128 =>
                    {
                        match oracle_label(&sub, config.budget).expect("budget pre-checked") {
                            Some(l) => {
                                diagnostics.notes.push(format!(
                                    "component {ambient:?}: labeled by exhaustive search"
                                ));
                                ComponentOutcome::Labeled(l)
                            }
                            None => {
                                diagnostics.notes.push(format!(
                                    "component {ambient:?}: exhaustive search found no labeling"
                                ));
                                ComponentOutcome::RefutedByOracle
                            }
                        }
                    }
                    FieldDescriptor::Prime { .. } => {
                        diagnostics.notes.push(format!(
                            "component {ambient:?}: undecided, exhaustive search exceeds budget"
                        ));
                        ComponentOutcome::Undecided
                    }
                    FieldDescriptor::Rationals => {
                        diagnostics.notes.push(format!(
                            "component {ambient:?}: undecided, no certificate and no finite search over the rationals"
                        ));
                        ComponentOutcome::Undecided
                    }
                }
            }
        };
        outcomes.push(outcome);
    }

    if let Some((shape, case, parameters)) = single_analysis {
        diagnostics.shape = shape;
        diagnostics.case = case;
        diagnostics.parameters = parameters;
    }

    // a single failing component refutes the whole graph; a certificate is
    // the strongest refutation, then an exhaustive search, then undecided
    if let Some(cert) = outcomes.iter().find_map(|o| match o {
        ComponentOutcome::Certified(c) => Some(c.clone()),
        _ => None,
    }) {
        return Decision {
            status: DecisionStatus::NotLabelable,
            labeling: None,
            certificate: Some(cert),
            diagnostics,
        };
    }
    if outcomes.iter().any(|o| matches!(o, ComponentOutcome::RefutedByOracle)) {
        return Decision {
            status: DecisionStatus::NotLabelableByOracle,
            labeling: None,
            certificate: None,
            diagnostics,
        };
    }
    if outcomes.iter().any(|o| matches!(o, ComponentOutcome::Undecided)) {
        return Decision {
            status: DecisionStatus::Unknown,
            labeling: None,
            certificate: None,
            diagnostics,
        };
    }

    // assemble the full labeling: null vertices take (0, 0)
    let mut pairs = vec![(field.zero(), field.zero()); graph.vertex_count()];
    for (comp, outcome) in components.iter().zip(&outcomes) {
        let ComponentOutcome::Labeled(l) = outcome else { unreachable!() };
        let (_, sub_ids) = stripped.induced(comp);
        for (k, &h) in sub_ids.iter().enumerate() {
            let ambient = stripped_ids[h - 1];
            let (a, b) = l.pair(k + 1);
            pairs[ambient - 1] = (a.clone(), b.clone());
        }
    }
    let labeling = Labeling::new(pairs);
    let violations = graph.verify_labeling(&labeling).expect("assembled labeling is well-formed");
    assert!(violations.is_empty(), "assembled labeling must satisfy every edge");
    Decision {
        status: DecisionStatus::Labelable,
        labeling: Some(labeling),
        certificate: None,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::GraphEnumerator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

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

    fn labels(l: &Labeling) -> Vec<(String, String)> {
        l.pairs().iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn shapes_classify_by_degrees() {
        use ShapeClass::*;
        for shape in [Gamma1, Gamma2, Gamma3, Gamma4, Gamma5, Gamma6] {
            let g = WeightedGraph::new(
                q(),
                4,
                canonical_edges(shape).unwrap().iter().map(|&(u, v)| (u, v, q().one())),
            )
            .unwrap();
            assert_eq!(classify_shape(&g), Some(shape));
            let (s, sigma, image) = normalize_four(&g).unwrap();
            assert_eq!(s, shape);
            assert_eq!(sigma, VertexPermutation::identity(4));
            assert_eq!(image, g);
        }
        let path3 = graph(q(), 3, &[(1, 2, "1"), (2, 3, "1")]);
        assert_eq!(classify_shape(&path3), Some(ShapeClass::Tree));
        let tri = graph(q(), 3, &[(1, 2, "1"), (1, 3, "1"), (2, 3, "1")]);
        assert_eq!(classify_shape(&tri), Some(ShapeClass::Triangle));
        let split = graph(q(), 4, &[(1, 2, "1"), (3, 4, "1")]);
        assert_eq!(classify_shape(&split), None);
    }

    #[test]
    fn normalization_picks_lex_first_permutation() {
        // a scrambled 4-cycle: 1−3−2−4−1
        let g = graph(q(), 4, &[(1, 3, "1"), (2, 3, "2"), (2, 4, "3"), (1, 4, "4")]);
        let (shape, sigma, image) = normalize_four(&g).unwrap();
        assert_eq!(shape, ShapeClass::Gamma4);
        assert_eq!(sigma.images(), &[1, 3, 2, 4]);
        assert_eq!(
            edge_keys(&image),
            [(1, 2), (1, 4), (2, 3), (3, 4)].into_iter().collect()
        );
    }

    #[test]
    fn table1_canonical_example() {
        let g = graph(q(), 4, &[(1, 2, "2"), (1, 3, "3"), (2, 3, "5"), (3, 4, "4")]);
        let l = table1(&g, &TableParams::canonical(q()));
        assert_eq!(
            labels(&l),
            vec![
                ("3".into(), "0".into()),
                ("5".into(), "2/3".into()),
                ("0".into(), "1".into()),
                ("-4".into(), "0".into()),
            ]
        );
    }

    #[test]
    fn table3_canonical_example() {
        let g = graph(
            q(),
            4,
            &[(1, 2, "1"), (1, 3, "2"), (1, 4, "1"), (2, 3, "1"), (2, 4, "1"), (3, 4, "1")],
        );
        let l = table3(&g, &TableParams::canonical(q()));
        assert_eq!(
            labels(&l),
            vec![
                ("0".into(), "1".into()),
                ("-1".into(), "1".into()),
                ("-2".into(), "1".into()),
                ("-1".into(), "0".into()),
            ]
        );
    }

    #[test]
    fn tables_accept_randomized_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xBA1A2);
        for field in [fp(5), q()] {
            for _ in 0..50 {
                let params = TableParams::random(field, &mut rng);
                // table 1 over the diagonal shape with determined vertex 4
                let d13 = field.random_nonzero(&mut rng);
                let g1 = WeightedGraph::new(
                    field,
                    4,
                    vec![
                        (1, 2, field.random(&mut rng)),
                        (1, 3, d13.clone()),
                        (1, 4, field.random(&mut rng)),
                        (2, 3, field.random(&mut rng)),
                        (3, 4, field.random(&mut rng)),
                    ],
                )
                .unwrap();
                table1(&g1, &params);
                // table 2 needs the balance relation d23 = −d12·d34/d14
                let (d12, d14, d34) = (
                    field.random_nonzero(&mut rng),
                    field.random_nonzero(&mut rng),
                    field.random_nonzero(&mut rng),
                );
                let d23 = (&(&d12 * &d34) * &d14.inverted().unwrap()).negated();
                let g2 = WeightedGraph::new(
                    field,
                    4,
                    vec![
                        (1, 2, d12.clone()),
                        (1, 3, field.zero()),
                        (1, 4, d14.clone()),
                        (2, 3, d23.clone()),
                        (3, 4, d34.clone()),
                    ],
                )
                .unwrap();
                table2(&g2, &params);
                // the complete-graph variant determines vertex 4 from (2, 4)
                let g2c = WeightedGraph::new(
                    field,
                    4,
                    vec![
                        (1, 2, d12.clone()),
                        (1, 3, field.zero()),
                        (1, 4, d14.clone()),
                        (2, 3, d23),
                        (2, 4, field.random(&mut rng)),
                        (3, 4, d34),
                    ],
                )
                .unwrap();
                table2(&g2c, &params);
                // table 3: all nonzero with vanishing Plücker expression
                loop {
                    let (a, b, c, e, f_) = (
                        field.random_nonzero(&mut rng),
                        field.random_nonzero(&mut rng),
                        field.random_nonzero(&mut rng),
                        field.random_nonzero(&mut rng),
                        field.random_nonzero(&mut rng),
                    );
                    // solve d12·d34 = d13·d24 − d14·d23 for d34
                    let d34 = &(&(&b * &e) - &(&c * &f_)) * &a.inverted().unwrap();
                    if d34.is_zero() {
                        continue;
                    }
                    let g3 = WeightedGraph::new(
                        field,
                        4,
                        vec![
                            (1, 2, a),
                            (1, 3, b),
                            (1, 4, c),
                            (2, 3, f_),
                            (2, 4, e),
                            (3, 4, d34),
                        ],
                    )
                    .unwrap();
                    table3(&g3, &params);
                    break;
                }
                // table 4: zero triangle on {1, 2, 4}
                let g4 = WeightedGraph::new(
                    field,
                    4,
                    vec![
                        (1, 2, field.zero()),
                        (1, 3, field.random_nonzero(&mut rng)),
                        (1, 4, field.zero()),
                        (2, 3, field.random_nonzero(&mut rng)),
                        (2, 4, field.zero()),
                        (3, 4, field.random_nonzero(&mut rng)),
                    ],
                )
                .unwrap();
                table4(&g4, &params);
            }
        }
    }

    #[test]
    fn trees_and_cycles_label() {
        // the zero-then-nonzero path: the middle vertex reuses the root pair
        let path = graph(q(), 3, &[(1, 2, "0"), (2, 3, "1")]);
        let l = label_tree(&path).unwrap();
        assert_eq!(
            labels(&l),
            vec![("0".into(), "1".into()), ("0".into(), "1".into()), ("-1".into(), "0".into())]
        );
        let star = graph(fp(5), 4, &[(1, 2, "1"), (1, 3, "2"), (1, 4, "0")]);
        label_tree(&star).unwrap();
        assert!(label_tree(&graph(q(), 3, &[(1, 2, "1")])).is_err());
        // cycles of both sizes, including the all-zero one
        label_cycle(&graph(q(), 3, &[(1, 2, "1"), (1, 3, "2"), (2, 3, "3")])).unwrap();
        let z = label_cycle(&graph(q(), 3, &[(1, 2, "0"), (1, 3, "0"), (2, 3, "0")])).unwrap();
        assert!(z.pairs().iter().all(|(a, b)| a.is_zero() && b.is_zero()));
        label_cycle(&graph(q(), 4, &[(1, 2, "0"), (1, 4, "2"), (2, 3, "7"), (3, 4, "0")]))
            .unwrap();
        assert!(label_cycle(&graph(q(), 3, &[(1, 2, "1"), (2, 3, "1")])).is_err());
    }

    #[test]
    fn four_vertex_dispatch_hits_every_branch() {
        let cases: Vec<(&str, Vec<(usize, usize, &str)>, bool)> = vec![
            ("tree", vec![(1, 2, "1"), (2, 3, "1"), (3, 4, "1")], true),
            ("cycle", vec![(1, 2, "1"), (1, 4, "1"), (2, 3, "1"), (3, 4, "1")], true),
            ("1a-table1", vec![(1, 2, "1"), (1, 3, "1"), (2, 3, "1"), (3, 4, "1")], true),
            ("1b-table1-swapped", vec![(1, 2, "1"), (1, 3, "0"), (2, 3, "1"), (3, 4, "1")], true),
            ("1c-defect", vec![(1, 2, "1"), (1, 3, "0"), (2, 3, "0"), (3, 4, "1")], false),
            (
                "2a-table1",
                vec![(1, 2, "1"), (1, 3, "1"), (1, 4, "1"), (2, 3, "1"), (3, 4, "1")],
                true,
            ),
            (
                "2b-defect",
                vec![(1, 2, "0"), (1, 3, "0"), (1, 4, "1"), (2, 3, "1"), (3, 4, "1")],
                false,
            ),
            (
                "2c-defect",
                vec![(1, 2, "1"), (1, 3, "0"), (1, 4, "1"), (2, 3, "1"), (3, 4, "1")],
                false,
            ),
            (
                "2d-table2",
                vec![(1, 2, "1"), (1, 3, "0"), (1, 4, "1"), (2, 3, "-1"), (3, 4, "1")],
                true,
            ),
            (
                "3a-defect",
                vec![(1, 2, "1"), (1, 3, "1"), (1, 4, "1"), (2, 3, "1"), (2, 4, "1"), (3, 4, "1")],
                false,
            ),
            (
                "3a-table3",
                vec![(1, 2, "1"), (1, 3, "2"), (1, 4, "1"), (2, 3, "1"), (2, 4, "1"), (3, 4, "1")],
                true,
            ),
            (
                "3b-defect",
                vec![(1, 2, "1"), (1, 3, "0"), (1, 4, "1"), (2, 3, "1"), (2, 4, "1"), (3, 4, "1")],
                false,
            ),
            (
                "3b-table2",
                vec![
                    (1, 2, "1"),
                    (1, 3, "0"),
                    (1, 4, "1"),
                    (2, 3, "-1"),
                    (2, 4, "1"),
                    (3, 4, "1"),
                ],
                true,
            ),
            (
                "3c-defect",
                vec![(1, 2, "0"), (1, 3, "0"), (1, 4, "1"), (2, 3, "1"), (2, 4, "1"), (3, 4, "1")],
                false,
            ),
            (
                "3c-unbalanced-defect",
                vec![(1, 2, "1"), (1, 3, "0"), (1, 4, "1"), (2, 3, "1"), (2, 4, "0"), (3, 4, "1")],
                false,
            ),
            (
                "3c-table2",
                vec![
                    (1, 2, "1"),
                    (1, 3, "0"),
                    (1, 4, "1"),
                    (2, 3, "-1"),
                    (2, 4, "0"),
                    (3, 4, "1"),
                ],
                true,
            ),
            (
                "3d-table4",
                vec![(1, 2, "0"), (1, 3, "1"), (1, 4, "0"), (2, 3, "1"), (2, 4, "0"), (3, 4, "1")],
                true,
            ),
            (
                "3d-defect",
                vec![(1, 2, "0"), (1, 3, "1"), (1, 4, "1"), (2, 3, "0"), (2, 4, "1"), (3, 4, "0")],
                false,
            ),
            (
                "3e-defect",
                vec![(1, 2, "0"), (1, 3, "1"), (1, 4, "0"), (2, 3, "0"), (2, 4, "1"), (3, 4, "0")],
                false,
            ),
        ];
        for (expected_case, edges, labelable) in cases {
            let g = graph(q(), 4, &edges);
            let params = TableParams::canonical(q());
            let analysis = label_four(&g, &params).unwrap();
            assert_eq!(analysis.case, expected_case, "graph {edges:?}");
            match analysis.outcome {
                FourOutcome::Labeled(_) => assert!(labelable, "case {expected_case}"),
                FourOutcome::Defective(c) => {
                    assert!(!labelable, "case {expected_case}");
                    validate_certificate(&g, &c).unwrap();
                }
            }
        }
    }

    #[test]
    fn label_four_rejects_bad_input() {
        let params = TableParams::canonical(q());
        let small = graph(q(), 3, &[(1, 2, "1"), (2, 3, "1")]);
        assert!(matches!(label_four(&small, &params), Err(EngineError::NotFour(3))));
        let split = graph(q(), 4, &[(1, 2, "1"), (3, 4, "1")]);
        assert!(matches!(label_four(&split, &params), Err(EngineError::NotConnected)));
        let nullish = graph(q(), 4, &[(1, 2, "1"), (2, 3, "0"), (3, 4, "0")]);
        assert!(matches!(label_four(&nullish, &params), Err(EngineError::NullVertex(3))));
    }

    #[test]
    fn decide_strips_nulls_and_assembles() {
        let g = graph(fp(3), 5, &[(1, 2, "1"), (2, 3, "0"), (4, 5, "0")]);
        let decision = decide(&g, &DecideConfig::default());
        assert_eq!(decision.status, DecisionStatus::Labelable);
        let l = decision.labeling.unwrap();
        assert_eq!(g.verify_labeling(&l).unwrap(), vec![]);
        // vertices 3, 4, 5 are null and take (0, 0)
        for v in [3, 4, 5] {
            let (a, b) = l.pair(v);
            assert!(a.is_zero() && b.is_zero());
        }
        let empty = WeightedGraph::empty(q(), 3);
        let d = decide(&empty, &DecideConfig::default());
        assert_eq!(d.status, DecisionStatus::Labelable);
    }

    #[test]
    fn decide_matches_oracle_exhaustively_f2() {
        let e = GraphEnumerator::new(4, 2).unwrap();
        let config = DecideConfig::default();
        for g in e.iter() {
            let decision = decide(&g, &config);
            let oracle = oracle_label(&g, 100_000_000).unwrap();
            match decision.status {
                DecisionStatus::Labelable => {
                    assert!(oracle.is_some(), "engine labeled, oracle refuted: {g:?}");
                    let l = decision.labeling.unwrap();
                    assert_eq!(g.verify_labeling(&l).unwrap(), vec![]);
                }
                DecisionStatus::NotLabelable => {
                    assert!(oracle.is_none(), "engine refuted, oracle labeled: {g:?}");
                    validate_certificate(&g, &decision.certificate.unwrap()).unwrap();
                }
                other => panic!("four-vertex decisions are complete, got {other:?}"),
            }
        }
    }

    #[test]
    fn randomized_parameters_never_change_the_status() {
        let e = GraphEnumerator::new(4, 3).unwrap();
        let canonical = DecideConfig::default();
        let seeded = DecideConfig { table_seed: Some(7), ..DecideConfig::default() };
        // a deterministic stride keeps this quick while touching every shape
        let mut idx = 0u128;
        while idx < e.count() {
            let g = e.graph_at(idx);
            let a = decide(&g, &canonical);
            let b = decide(&g, &seeded);
            assert_eq!(a.status, b.status, "status must not depend on parameters: {g:?}");
            if let Some(l) = b.labeling {
                assert_eq!(g.verify_labeling(&l).unwrap(), vec![]);
            }
            idx += 37;
        }
    }

    #[test]
    fn decide_large_component_paths() {
        // an all-ones five-cycle has no defect and no null vertex; over a
        // prime field the oracle settles it
        let c5 = graph(
            fp(3),
            5,
            &[(1, 2, "1"), (2, 3, "1"), (3, 4, "1"), (4, 5, "1"), (1, 5, "1")],
        );
        let d = decide(&c5, &DecideConfig::default());
        assert_eq!(d.status, DecisionStatus::Labelable);
        assert_eq!(c5.verify_labeling(&d.labeling.unwrap()).unwrap(), vec![]);
        // the same graph over the rationals is undecided: no certificate
        // exists and no finite search is available
        let c5q = graph(
            q(),
            5,
            &[(1, 2, "1"), (2, 3, "1"), (3, 4, "1"), (4, 5, "1"), (1, 5, "1")],
        );
        assert_eq!(decide(&c5q, &DecideConfig::default()).status, DecisionStatus::Unknown);
        // six vertices carrying a size-6 family-A defect: certified over any
        // field, including the rationals
        let a6 = graph(
            q(),
            6,
            &[(1, 2, "0"), (2, 3, "0"), (1, 4, "0"), (3, 4, "1"), (1, 5, "1"), (2, 6, "1")],
        );
        let d6 = decide(&a6, &DecideConfig::default());
        assert_eq!(d6.status, DecisionStatus::NotLabelable);
        assert_eq!(d6.certificate.unwrap().size(), 6);
        // capping the certificate size below 6 hides the defect: over F_2
        // the oracle still refutes, over the rationals it goes unknown
        let a6f2 = graph(
            fp(2),
            6,
            &[(1, 2, "0"), (2, 3, "0"), (1, 4, "0"), (3, 4, "1"), (1, 5, "1"), (2, 6, "1")],
        );
        let capped = DecideConfig { max_m: Some(4), ..DecideConfig::default() };
        assert_eq!(decide(&a6f2, &capped).status, DecisionStatus::NotLabelableByOracle);
        let aq = decide(&a6, &capped);
        assert_eq!(aq.status, DecisionStatus::Unknown);
        // with a tiny budget even the prime-field fallback is unavailable
        let tiny = DecideConfig { max_m: Some(4), budget: 10, ..DecideConfig::default() };
        assert_eq!(decide(&a6f2, &tiny).status, DecisionStatus::Unknown);
    }

    #[test]
    fn decide_prefers_certificates_across_components() {
        // component one is refuted only by search (a five-cycle cannot be,
        // so use a four-vertex defect); component two has a certificate
        let g = graph(
            fp(2),
            8,
            &[
                // labelable component
                (1, 2, "1"),
                // defective component: pendant triangle
                (5, 6, "1"),
                (5, 7, "0"),
                (6, 7, "0"),
                (7, 8, "1"),
            ],
        );
        let d = decide(&g, &DecideConfig::default());
        assert_eq!(d.status, DecisionStatus::NotLabelable);
        let cert = d.certificate.unwrap();
        assert_eq!(cert.vertices(), &[7, 5, 6, 8]);
        validate_certificate(&g, &cert).unwrap();
    }

    #[test]
    fn decide_single_component_diagnostics() {
        let g = graph(q(), 4, &[(1, 2, "1"), (1, 3, "0"), (1, 4, "1"), (2, 3, "-1"), (3, 4, "1")]);
        let d = decide(&g, &DecideConfig::default());
        assert_eq!(d.status, DecisionStatus::Labelable);
        assert_eq!(d.diagnostics.shape.as_deref(), Some("Gamma2"));
        assert_eq!(d.diagnostics.case.as_deref(), Some("2d-table2"));
        assert!(d.diagnostics.parameters.contains_key("beta4"));
    }
}
