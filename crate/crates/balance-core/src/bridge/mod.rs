//! Alternating bilinear structures and the commutator membership bridge.
//!
//! An [`AlternatingStructure`] records an alternating bilinear map
//! `B : F^n × F^n → F^m` through the bracket vectors `c_{i,j} = B(u_i, u_j)`
//! for `i < j`.  These are exactly the structure constants of a nilpotent
//! Lie algebra of class two (and, over `F_p`, of a group of exponent `p`
//! and class two), where deciding whether a target `x` is a single bracket
//! `B(a, b)` is the membership question this crate answers.
//!
//! The solver-facing pieces — presentations, the graph encoding, and the
//! decision procedures — are layered on top of the data types defined here.

pub mod witness3;

pub use witness3::witness_dim_le3;

use crate::defect::{detect_all, DefectCertificate, DEFAULT_CERTIFICATE_CAP};
use crate::engine::{decide, DecideConfig, DecisionStatus};
use crate::field::{is_prime, FieldDescriptor, Scalar};
use crate::graph::WeightedGraph;
use crate::linalg;
use crate::oracle::{oracle_image, OracleError};
use std::collections::{BTreeMap, BTreeSet};

#[derive(thiserror::Error, Clone, PartialEq, Eq, Debug)]
pub enum BridgeError {
    #[error("bracket index {0} is out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("bracket ({0}, {1}) must satisfy i < j")]
    BadBracketOrder(usize, usize),
    #[error("duplicate bracket ({0}, {1})")]
    DuplicateBracket(usize, usize),
    #[error("bracket ({0}, {1}) has {2} coordinates, expected {3}")]
    BracketLength(usize, usize, usize, usize),
    #[error("bracket ({0}, {1}) has a coordinate in the wrong field")]
    BracketFieldMismatch(usize, usize),
    #[error("vector has {found} coordinates, expected {expected}")]
    VectorLength { found: usize, expected: usize },
    #[error("vector coordinate lies in the wrong field")]
    VectorFieldMismatch,
    #[error("target lies outside the span of the brackets")]
    TargetOutsideSpan,
    #[error("the structure must first be reduced (its radical is nonzero)")]
    NotReduced,
    #[error("bracket span has dimension {0}, but this routine requires at most {1}")]
    SpanTooLarge(usize, usize),
    #[error("this routine requires a prime field")]
    RequiresPrimeField,
    #[error("group presentation must have exponent_p set")]
    NotExponentP,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("commutator ({0}, {1}) has {2} exponents, expected {3}")]
    CommutatorLength(usize, usize, usize, usize),
    #[error("a class-two group of exponent 2 is abelian; nonzero commutators are inconsistent")]
    InconsistentGroup,
}

/// An alternating bilinear map `F^n × F^n → F^m`, given by the bracket
/// vectors `c_{i,j} ∈ F^m` for `1 ≤ i < j ≤ n`.  Pairs without an entry
/// have bracket zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlternatingStructure {
    field: FieldDescriptor,
    generators: usize,
    target_dim: usize,
    brackets: BTreeMap<(usize, usize), Vec<Scalar>>,
}

impl AlternatingStructure {
    /// Builds and validates a structure from `(i, j, c_{i,j})` triples.
    /// Zero bracket vectors may be supplied or omitted interchangeably;
    /// they are stored as given.
    pub fn new(
        field: FieldDescriptor,
        generators: usize,
        target_dim: usize,
        brackets: impl IntoIterator<Item = (usize, usize, Vec<Scalar>)>,
    ) -> Result<Self, BridgeError> {
        let mut map = BTreeMap::new();
        for (i, j, c) in brackets {
            if i == 0 || i > generators {
                return Err(BridgeError::IndexOutOfRange(i, generators));
            }
            if j == 0 || j > generators {
                return Err(BridgeError::IndexOutOfRange(j, generators));
            }
            if i >= j {
                return Err(BridgeError::BadBracketOrder(i, j));
            }
            if c.len() != target_dim {
                return Err(BridgeError::BracketLength(i, j, c.len(), target_dim));
            }
            if c.iter().any(|s| !field.contains(s)) {
                return Err(BridgeError::BracketFieldMismatch(i, j));
            }
            if map.insert((i, j), c).is_some() {
                return Err(BridgeError::DuplicateBracket(i, j));
            }
        }
        Ok(AlternatingStructure { field, generators, target_dim: target_dim.max(0), brackets: map })
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    /// Number of generators `n` (the dimension of the source space).
    pub fn generators(&self) -> usize {
        self.generators
    }

    /// Dimension `m` of the target space.
    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    /// Stored bracket entries in ascending `(i, j)` order (zero vectors only
    /// if they were supplied explicitly).
    pub fn bracket_entries(&self) -> impl Iterator<Item = (usize, usize, &Vec<Scalar>)> {
        self.brackets.iter().map(|(&(i, j), c)| (i, j, c))
    }

    /// The bracket `B(u_i, u_j)` for any `i ≠ j`, applying antisymmetry when
    /// `i > j` and returning zero for absent pairs.
    pub fn bracket(&self, i: usize, j: usize) -> Vec<Scalar> {
        if i < j {
            match self.brackets.get(&(i, j)) {
                Some(c) => c.clone(),
                None => self.zero_vector(),
            }
        } else {
            match self.brackets.get(&(j, i)) {
                Some(c) => c.iter().map(Scalar::negated).collect(),
                None => self.zero_vector(),
            }
        }
    }

    /// The zero vector of the target space.
    pub fn zero_vector(&self) -> Vec<Scalar> {
        vec![self.field.zero(); self.target_dim]
    }

    /// The zero vector of the source space.
    pub fn zero_source(&self) -> Vec<Scalar> {
        vec![self.field.zero(); self.generators]
    }

    /// Checks that `x` is a well-formed target vector.
    pub fn check_target(&self, x: &[Scalar]) -> Result<(), BridgeError> {
        if x.len() != self.target_dim {
            return Err(BridgeError::VectorLength { found: x.len(), expected: self.target_dim });
        }
        if x.iter().any(|s| !self.field.contains(s)) {
            return Err(BridgeError::VectorFieldMismatch);
        }
        Ok(())
    }

    /// Checks that `a` is a well-formed source vector.
    pub fn check_source(&self, a: &[Scalar]) -> Result<(), BridgeError> {
        if a.len() != self.generators {
            return Err(BridgeError::VectorLength { found: a.len(), expected: self.generators });
        }
        if a.iter().any(|s| !self.field.contains(s)) {
            return Err(BridgeError::VectorFieldMismatch);
        }
        Ok(())
    }

    /// Evaluates `B(a, b) = Σ_{i<j} (a_i b_j − a_j b_i) · c_{i,j}`.
    ///
    /// This is the ground-truth semantics every claimed witness is checked
    /// against.
    pub fn evaluate(&self, a: &[Scalar], b: &[Scalar]) -> Result<Vec<Scalar>, BridgeError> {
        self.check_source(a)?;
        self.check_source(b)?;
        let mut out = self.zero_vector();
        for (&(i, j), c) in &self.brackets {
            let coeff = &(&a[i - 1] * &b[j - 1]) - &(&a[j - 1] * &b[i - 1]);
            if coeff.is_zero() {
                continue;
            }
            for (o, ck) in out.iter_mut().zip(c.iter()) {
                *o = &*o + &(&coeff * ck);
            }
        }
        Ok(out)
    }
}

/// Basis of the radical `{v : B(v, w) = 0 for all w}`, as vectors in the
/// source space.  The reported basis is in reduced row-echelon form.
pub fn radical(structure: &AlternatingStructure) -> Vec<Vec<Scalar>> {
    let n = structure.generators();
    let m = structure.target_dim();
    // v lies in the radical iff Σ_i v_i·B(u_i, u_k) = 0 for every k, which
    // is a linear system with one row per (k, target coordinate).
    let mut rows = Vec::with_capacity(n * m);
    for k in 1..=n {
        let columns: Vec<Vec<Scalar>> = (1..=n).map(|i| structure.bracket(i, k)).collect();
        for t in 0..m {
            if columns.iter().all(|c| c[t].is_zero()) {
                continue;
            }
            rows.push(columns.iter().map(|c| c[t].clone()).collect::<Vec<_>>());
        }
    }
    if rows.is_empty() {
        // all brackets vanish, so every vector is radical
        let field = structure.field();
        return (0..n)
            .map(|i| {
                let mut v = vec![field.zero(); n];
                v[i] = field.one();
                v
            })
            .collect();
    }
    let mut basis = linalg::kernel_basis(&rows, n);
    linalg::rref(&mut basis);
    basis
}

/// Outcome of factoring out the radical: the reduced structure together
/// with the surviving generator indices and the radical that was removed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Reduction {
    /// The quotient structure on the kept generators; its radical is zero.
    pub structure: AlternatingStructure,
    /// Original 1-based indices of the kept generators, ascending.  Kept
    /// generator `a` of the reduced structure is original `kept[a − 1]`.
    pub kept: Vec<usize>,
    /// Basis of the removed radical, in original coordinates.
    pub radical_basis: Vec<Vec<Scalar>>,
    /// Generator count of the original structure (trailing generators may
    /// have been dropped, so this is not derivable from `kept`).
    original_generators: usize,
}

impl Reduction {
    /// Embeds a source vector of the reduced structure back into the
    /// original coordinates, filling the dropped positions with zero.
    pub fn lift_source(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.kept.len(), "reduced vector has wrong length");
        let field = self.structure.field();
        let mut out = vec![field.zero(); self.original_generators];
        for (pos, &orig) in self.kept.iter().enumerate() {
            out[orig - 1] = v[pos].clone();
        }
        out
    }
}

/// Factors out the radical: picks the generators not pivotal in the
/// radical's row-echelon basis (their classes form a basis of the
/// quotient) and restricts the brackets to them.
///
/// The reduced structure has zero radical, and a target is a single
/// bracket of the original structure iff it is one of the reduction:
/// brackets only depend on classes modulo the radical, and every class
/// has a representative supported on the kept generators.
pub fn reduce(structure: &AlternatingStructure) -> Reduction {
    let n = structure.generators();
    let rad = radical(structure);
    let mut pivot_cols = BTreeSet::new();
    for row in &rad {
        if let Some(col) = row.iter().position(|s| !s.is_zero()) {
            pivot_cols.insert(col + 1);
        }
    }
    let kept: Vec<usize> = (1..=n).filter(|i| !pivot_cols.contains(i)).collect();
    let mut brackets = Vec::new();
    for (pos_a, &orig_a) in kept.iter().enumerate() {
        for &orig_b in kept.iter().skip(pos_a + 1) {
            let c = structure.bracket(orig_a, orig_b);
            if c.iter().any(|s| !s.is_zero()) {
                let pos_b = kept.iter().position(|&k| k == orig_b).unwrap();
                brackets.push((pos_a + 1, pos_b + 1, c));
            }
        }
    }
    let reduced = AlternatingStructure::new(
        structure.field(),
        kept.len(),
        structure.target_dim(),
        brackets,
    )
    .expect("restriction of a valid structure is valid");
    Reduction { structure: reduced, kept, radical_basis: rad, original_generators: n }
}

/// One choice of edge weights expressing a target over the bracket
/// support: `x = Σ d_{i,j} · c_{i,j}` with one weight per support pair.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Presentation {
    support: Vec<(usize, usize)>,
    weights: Vec<Scalar>,
}

impl Presentation {
    /// The support pairs `(i, j)` with `c_{i,j} ≠ 0`, ascending.
    pub fn support(&self) -> &[(usize, usize)] {
        &self.support
    }

    /// The weights, parallel to [`Presentation::support`].
    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    /// The weight of an unordered support pair, if present.
    pub fn weight_of(&self, i: usize, j: usize) -> Option<&Scalar> {
        let key = (i.min(j), i.max(j));
        self.support.binary_search(&key).ok().map(|idx| &self.weights[idx])
    }

    /// The balance-equation graph of this presentation on the full
    /// generator set: one vertex per generator and one edge per support
    /// pair, carrying the presentation weight (zero weights included).
    pub fn full_graph(&self, field: FieldDescriptor, generators: usize) -> WeightedGraph {
        WeightedGraph::new(
            field,
            generators,
            self.support
                .iter()
                .zip(self.weights.iter())
                .map(|(&(u, v), w)| (u, v, w.clone())),
        )
        .expect("support pairs are valid edges")
    }

    /// Renames the generators through an order-preserving map.
    fn relabel(&self, map: impl Fn(usize) -> usize) -> Presentation {
        let support: Vec<(usize, usize)> = self.support.iter().map(|&(a, b)| (map(a), map(b))).collect();
        assert!(
            support.windows(2).all(|w| w[0] < w[1]) && support.iter().all(|&(a, b)| a < b),
            "relabeling must preserve pair order"
        );
        Presentation { support, weights: self.weights.clone() }
    }
}

/// The affine family of all presentations of a fixed target: a particular
/// solution plus the span of the homogeneous relations among the brackets.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PresentationFamily {
    field: FieldDescriptor,
    support: Vec<(usize, usize)>,
    particular: Vec<Scalar>,
    homogeneous: Vec<Vec<Scalar>>,
}

impl PresentationFamily {
    /// The support pairs the weights range over, ascending.
    pub fn support(&self) -> &[(usize, usize)] {
        &self.support
    }

    /// Dimension of the family (number of free coefficients).
    pub fn dimension(&self) -> usize {
        self.homogeneous.len()
    }

    /// The distinguished member with all free coefficients zero.
    pub fn base(&self) -> Presentation {
        self.at(&vec![self.field.zero(); self.homogeneous.len()])
    }

    /// The member `particular + Σ coeffs[t] · homogeneous[t]`.
    pub fn at(&self, coeffs: &[Scalar]) -> Presentation {
        assert_eq!(coeffs.len(), self.homogeneous.len(), "one coefficient per basis vector");
        let mut weights = self.particular.clone();
        for (c, h) in coeffs.iter().zip(self.homogeneous.iter()) {
            if c.is_zero() {
                continue;
            }
            for (w, hv) in weights.iter_mut().zip(h.iter()) {
                *w = &*w + &(c * hv);
            }
        }
        Presentation { support: self.support.clone(), weights }
    }

    /// Basis of the homogeneous relations, parallel to the support.
    pub fn homogeneous(&self) -> &[Vec<Scalar>] {
        &self.homogeneous
    }
}

/// Computes the affine family of presentations of `x`: all weight vectors
/// `d` over the support pairs with `Σ d_{i,j} c_{i,j} = x`.  Fails with
/// [`BridgeError::TargetOutsideSpan`] when no such weights exist, in which
/// case `x` is certainly not a single bracket.
pub fn presentations_of(
    structure: &AlternatingStructure,
    x: &[Scalar],
) -> Result<PresentationFamily, BridgeError> {
    structure.check_target(x)?;
    let support: Vec<(usize, usize)> = structure
        .bracket_entries()
        .filter(|(_, _, c)| c.iter().any(|s| !s.is_zero()))
        .map(|(i, j, _)| (i, j))
        .collect();
    let m = structure.target_dim();
    let rows: Vec<Vec<Scalar>> = (0..m)
        .map(|t| support.iter().map(|&(i, j)| structure.bracket(i, j)[t].clone()).collect())
        .collect();
    let particular = linalg::solve(&rows, x).ok_or(BridgeError::TargetOutsideSpan)?;
    let homogeneous = linalg::kernel_basis(&rows, support.len());
    Ok(PresentationFamily { field: structure.field(), support, particular, homogeneous })
}

/// The compact balance-equation graph of a presentation: vertices are the
/// generators incident to a nonzero weight, renumbered `1..=k` preserving
/// order, and edges are the support pairs between them (zero weights
/// included — they are genuine constraints).  Also returns the map from
/// new vertex position to original generator index.
///
/// Generators incident only to zero weights can always be labeled
/// `(0, 0)`, so dropping them does not change solvability.
pub fn graph_of(
    structure: &AlternatingStructure,
    presentation: &Presentation,
) -> (WeightedGraph, Vec<usize>) {
    let mut active = BTreeSet::new();
    for (&(i, j), w) in presentation.support.iter().zip(presentation.weights.iter()) {
        if !w.is_zero() {
            active.insert(i);
            active.insert(j);
        }
    }
    presentation.full_graph(structure.field(), structure.generators()).induced(&active)
}

/// Tuning knobs for [`decide_in_image`] and [`decide_commutator`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ImageConfig {
    /// Bound on the number of presentations enumerated over a prime field,
    /// and on the work of the exhaustive image fallback.
    pub budget: u64,
    /// Radius of the integer coefficient window searched over `Q`.
    pub range: i64,
    /// Configuration forwarded to the per-presentation graph decision.
    pub decide: DecideConfig,
}

impl Default for ImageConfig {
    fn default() -> Self {
        ImageConfig { budget: 100_000_000, range: 3, decide: DecideConfig::default() }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ImageStatus {
    /// `x = B(a, b)` for the reported witness pair.
    Yes,
    /// `x` is provably not a single bracket.
    No,
    /// Neither a witness nor a proof of impossibility was found within the
    /// configured means.
    Unknown,
}

/// Evidence that one particular presentation's graph has no labeling.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PresentationRefutation {
    /// The refuted presentation, stated in original generator indices.
    pub presentation: Presentation,
    /// A defect certificate for its graph, when a structural one exists;
    /// `None` when the refutation came from exhaustive search.
    pub certificate: Option<DefectCertificate>,
}

/// Outcome of [`decide_in_image`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ImageDecision {
    pub status: ImageStatus,
    /// For `Yes`: a pair with `B(a, b) = x`, verified before returning.
    pub witness: Option<(Vec<Scalar>, Vec<Scalar>)>,
    /// For `No`: refutations of the presentations that were examined
    /// structurally (capped), in enumeration order.
    pub refutations: Vec<PresentationRefutation>,
    pub notes: Vec<String>,
}

fn saturating_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Calls `f` on every `len`-tuple over `values` in lexicographic order
/// (first coordinate most significant).  Stops early when `f` returns
/// `true` and reports whether that happened.
fn for_each_tuple<T: Clone>(
    values: &[T],
    len: usize,
    mut f: impl FnMut(&[T]) -> bool,
) -> bool {
    let mut idx = vec![0usize; len];
    loop {
        let tuple: Vec<T> = idx.iter().map(|&i| values[i].clone()).collect();
        if f(&tuple) {
            return true;
        }
        let mut pos = len;
        loop {
            if pos == 0 {
                return false;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < values.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Decides whether `x` lies in the image `{B(a, b)}` of the alternating
/// map — equivalently, whether `x` is a single commutator of the class-two
/// Lie algebra with these structure constants.
///
/// The structure is reduced first; the decision and witnesses are then
/// transported back to the original generators.  Over a prime field the
/// procedure is exhaustive over the presentation family within `budget`
/// (with an exhaustive image search as fallback), so it only reports
/// `Unknown` when budgets are exceeded.  Over `Q` it decides directly when
/// the presentation is unique, refutes entire families through certificates
/// whose cited edges have constant weights across the family, and otherwise
/// searches an integer coefficient window for a witness.
///
/// All answers are relative to the supplied bracket data: presentations
/// range over the given generating pairs, exactly as the membership
/// question is posed.
pub fn decide_in_image(
    structure: &AlternatingStructure,
    x: &[Scalar],
    config: &ImageConfig,
) -> Result<ImageDecision, BridgeError> {
    structure.check_target(x)?;
    let field = structure.field();
    let mut notes = Vec::new();
    if x.iter().all(Scalar::is_zero) {
        notes.push("target is zero: B(0, 0) = 0".to_string());
        return Ok(ImageDecision {
            status: ImageStatus::Yes,
            witness: Some((structure.zero_source(), structure.zero_source())),
            refutations: Vec::new(),
            notes,
        });
    }

    let reduction = reduce(structure);
    let reduced = &reduction.structure;
    if reduction.kept.len() < structure.generators() {
        notes.push(format!(
            "radical has dimension {}; reduced to generators {:?}",
            structure.generators() - reduction.kept.len(),
            reduction.kept
        ));
    }
    let to_original = |v: usize| reduction.kept[v - 1];

    // An x outside the bracket span is certainly not a bracket, but the
    // membership question is posed inside the derived subalgebra
    // span{c_{i,j}}; such an x is rejected as ill-posed input rather than
    // answered, so that callers can distinguish the two situations.
    let family = presentations_of(reduced, x)?;
    let k = family.dimension();
    notes.push(format!(
        "presentation family has dimension {} over {} support pairs",
        k,
        family.support().len()
    ));

    // Turns a labeling of a presentation's graph into a verified witness.
    let finish_yes = |mut notes: Vec<String>,
                      labeling: &crate::graph::Labeling|
     -> Result<ImageDecision, BridgeError> {
        let a_red: Vec<Scalar> = labeling.pairs().iter().map(|(a, _)| a.clone()).collect();
        let b_red: Vec<Scalar> = labeling.pairs().iter().map(|(_, b)| b.clone()).collect();
        let a = reduction.lift_source(&a_red);
        let b = reduction.lift_source(&b_red);
        let value = structure.evaluate(&a, &b)?;
        assert_eq!(value, x.to_vec(), "witness failed verification against the structure");
        notes.push("witness verified by evaluating B(a, b)".to_string());
        Ok(ImageDecision {
            status: ImageStatus::Yes,
            witness: Some((a, b)),
            refutations: Vec::new(),
            notes,
        })
    };

    match field {
        FieldDescriptor::Prime { p } => {
            let count = saturating_pow(p as u128, k as u32);
            let mut refutations = Vec::new();
            let mut truncated = false;
            let mut undecided = false;
            let mut yes: Option<ImageDecision> = None;
            if count <= config.budget as u128 {
                let digits: Vec<Scalar> = field.elements().collect();
                for_each_tuple(&digits, k, |coeffs| {
                    let presentation = family.at(coeffs);
                    let graph = presentation.full_graph(field, reduced.generators());
                    let decision = decide(&graph, &config.decide);
                    match decision.status {
                        DecisionStatus::Labelable => {
                            let labeling = decision.labeling.expect("labelable has labeling");
                            let mut found_notes = notes.clone();
                            found_notes.push(format!(
                                "witness from presentation with coefficients {:?}",
                                coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>()
                            ));
                            yes = Some(finish_yes(found_notes, &labeling).expect("verified"));
                            true
                        }
                        DecisionStatus::NotLabelable | DecisionStatus::NotLabelableByOracle => {
                            if refutations.len() < DEFAULT_CERTIFICATE_CAP {
                                refutations.push(PresentationRefutation {
                                    presentation: presentation.relabel(to_original),
                                    certificate: decision
                                        .certificate
                                        .map(|c| c.relabel(to_original)),
                                });
                            } else {
                                truncated = true;
                            }
                            false
                        }
                        DecisionStatus::Unknown => {
                            undecided = true;
                            true
                        }
                    }
                });
                if let Some(decision) = yes {
                    return Ok(decision);
                }
                if !undecided {
                    notes.push(format!("all {count} presentations refuted"));
                    if truncated {
                        notes.push(format!(
                            "refutation list capped at {DEFAULT_CERTIFICATE_CAP} entries"
                        ));
                    }
                    return Ok(ImageDecision {
                        status: ImageStatus::No,
                        witness: None,
                        refutations,
                        notes,
                    });
                }
                notes.push(
                    "a presentation was undecided; falling back to the exhaustive image search"
                        .to_string(),
                );
            } else {
                notes.push(format!(
                    "presentation count {count} exceeds the budget; \
                     falling back to the exhaustive image search"
                ));
            }
            match oracle_image(reduced, x, config.budget) {
                Ok(Some((a_red, b_red))) => {
                    let a = reduction.lift_source(&a_red);
                    let b = reduction.lift_source(&b_red);
                    let value = structure.evaluate(&a, &b)?;
                    assert_eq!(value, x.to_vec(), "oracle witness failed verification");
                    notes.push("witness found by the exhaustive image search".to_string());
                    Ok(ImageDecision {
                        status: ImageStatus::Yes,
                        witness: Some((a, b)),
                        refutations: Vec::new(),
                        notes,
                    })
                }
                Ok(None) => {
                    notes.push(
                        "exhaustive image search over the reduced generators found no witness"
                            .to_string(),
                    );
                    Ok(ImageDecision {
                        status: ImageStatus::No,
                        witness: None,
                        refutations,
                        notes,
                    })
                }
                Err(OracleError::BudgetExceeded { required, budget }) => {
                    notes.push(format!(
                        "exhaustive image search needs {required} steps, over the budget {budget}"
                    ));
                    Ok(ImageDecision {
                        status: ImageStatus::Unknown,
                        witness: None,
                        refutations,
                        notes,
                    })
                }
                Err(e) => {
                    notes.push(format!("exhaustive image search unavailable: {e}"));
                    Ok(ImageDecision {
                        status: ImageStatus::Unknown,
                        witness: None,
                        refutations,
                        notes,
                    })
                }
            }
        }
        FieldDescriptor::Rationals => {
            let base = family.base();
            let base_graph = base.full_graph(field, reduced.generators());
            let base_decision = decide(&base_graph, &config.decide);
            if base_decision.status == DecisionStatus::Labelable {
                let labeling = base_decision.labeling.expect("labelable has labeling");
                notes.push("witness from the base presentation".to_string());
                return finish_yes(notes, &labeling);
            }
            if k == 0 {
                return Ok(match base_decision.status {
                    DecisionStatus::NotLabelable => {
                        notes.push("the unique presentation carries a defect".to_string());
                        ImageDecision {
                            status: ImageStatus::No,
                            witness: None,
                            refutations: vec![PresentationRefutation {
                                presentation: base.relabel(to_original),
                                certificate: base_decision
                                    .certificate
                                    .map(|c| c.relabel(to_original)),
                            }],
                            notes,
                        }
                    }
                    _ => {
                        notes.push(
                            "the unique presentation's graph could not be decided over Q"
                                .to_string(),
                        );
                        ImageDecision {
                            status: ImageStatus::Unknown,
                            witness: None,
                            refutations: Vec::new(),
                            notes,
                        }
                    }
                });
            }
            // A certificate refutes every member of the family at once when
            // all its cited edges have constant weight across the family:
            // the cited nonzero edges then stay nonzero (keeping the cited
            // vertices present) and the defect conditions are unchanged.
            if base_decision.status == DecisionStatus::NotLabelable {
                let certificates =
                    detect_all(&base_graph, config.decide.max_m, DEFAULT_CERTIFICATE_CAP);
                let constant = certificates.into_iter().find(|cert| {
                    cert.edges().iter().all(|edge| {
                        let key = (edge.u.min(edge.v), edge.u.max(edge.v));
                        match family.support().binary_search(&key) {
                            Ok(idx) => family
                                .homogeneous()
                                .iter()
                                .all(|h| h[idx].is_zero()),
                            Err(_) => false,
                        }
                    })
                });
                if let Some(cert) = constant {
                    notes.push(
                        "a defect certificate cites only edges with constant weight across \
                         the presentation family, refuting every presentation"
                            .to_string(),
                    );
                    return Ok(ImageDecision {
                        status: ImageStatus::No,
                        witness: None,
                        refutations: vec![PresentationRefutation {
                            presentation: base.relabel(to_original),
                            certificate: Some(cert.relabel(to_original)),
                        }],
                        notes,
                    });
                }
            }
            // Windowed witness search over integer coefficients.
            let window = 2 * config.range.unsigned_abs() as u128 + 1;
            if saturating_pow(window, k as u32) <= config.budget as u128 {
                let values: Vec<Scalar> =
                    (-config.range..=config.range).map(|v| field.from_integer(v)).collect();
                let mut yes = None;
                for_each_tuple(&values, k, |coeffs| {
                    if coeffs.iter().all(Scalar::is_zero) {
                        return false; // the base presentation was already probed
                    }
                    let presentation = family.at(coeffs);
                    let graph = presentation.full_graph(field, reduced.generators());
                    let decision = decide(&graph, &config.decide);
                    if decision.status == DecisionStatus::Labelable {
                        let labeling = decision.labeling.expect("labelable has labeling");
                        let mut found_notes = notes.clone();
                        found_notes.push(format!(
                            "witness from integer coefficients {:?} in the window ±{}",
                            coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                            config.range
                        ));
                        yes = Some(finish_yes(found_notes, &labeling).expect("verified"));
                        true
                    } else {
                        false
                    }
                });
                if let Some(decision) = yes {
                    return Ok(decision);
                }
                notes.push(format!(
                    "no labelable presentation with integer coefficients in the window ±{}",
                    config.range
                ));
            } else {
                notes.push(format!(
                    "integer window of size {window}^{k} exceeds the budget; window search skipped"
                ));
            }
            Ok(ImageDecision {
                status: ImageStatus::Unknown,
                witness: None,
                refutations: Vec::new(),
                notes,
            })
        }
    }
}

/// A finite presentation of a group of nilpotency class two and exponent
/// `p`: generators `g_1, …, g_n` whose images generate `G/Z(G)`, a central
/// elementary abelian section `Z ≅ (Z/p)^k` recorded in a fixed basis
/// `z_1, …, z_k`, and the commutators `[g_i, g_j] ∈ Z` as exponent
/// vectors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassTwoGroupPresentation {
    p: u64,
    generators: usize,
    central_rank: usize,
    commutators: BTreeMap<(usize, usize), Vec<u64>>,
}

impl ClassTwoGroupPresentation {
    /// Builds and validates a presentation.  `exponent_p` must be `true`:
    /// the commutator analysis below relies on the exponent-`p` identity
    /// `[g, h] = Π [g_i, g_j]^{α_i β_j − α_j β_i}`, with exponents read
    /// modulo `p`.
    pub fn new(
        p: u64,
        generators: usize,
        central_rank: usize,
        exponent_p: bool,
        commutators: impl IntoIterator<Item = (usize, usize, Vec<u64>)>,
    ) -> Result<Self, BridgeError> {
        if !is_prime(p) {
            return Err(BridgeError::NotPrime(p));
        }
        if !exponent_p {
            return Err(BridgeError::NotExponentP);
        }
        let mut map = BTreeMap::new();
        let mut any_nonzero = false;
        for (i, j, exponents) in commutators {
            if i == 0 || i > generators {
                return Err(BridgeError::IndexOutOfRange(i, generators));
            }
            if j == 0 || j > generators {
                return Err(BridgeError::IndexOutOfRange(j, generators));
            }
            if i >= j {
                return Err(BridgeError::BadBracketOrder(i, j));
            }
            if exponents.len() != central_rank {
                return Err(BridgeError::CommutatorLength(i, j, exponents.len(), central_rank));
            }
            let reduced: Vec<u64> = exponents.into_iter().map(|e| e % p).collect();
            any_nonzero |= reduced.iter().any(|&e| e != 0);
            if map.insert((i, j), reduced).is_some() {
                return Err(BridgeError::DuplicateBracket(i, j));
            }
        }
        if p == 2 && any_nonzero {
            // (gh)² = g² h² [h, g] forces all commutators trivial when the
            // exponent is 2, so such a table presents no group.
            return Err(BridgeError::InconsistentGroup);
        }
        Ok(ClassTwoGroupPresentation { p, generators, central_rank, commutators: map })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn central_rank(&self) -> usize {
        self.central_rank
    }

    /// Stored commutator entries in ascending `(i, j)` order.
    pub fn commutator_entries(&self) -> impl Iterator<Item = (usize, usize, &Vec<u64>)> {
        self.commutators.iter().map(|(&(i, j), e)| (i, j, e))
    }
}

/// The alternating structure over `F_p` carried by a class-two
/// exponent-`p` group: source `G/Z(G)` on the generator images, target
/// the central section, bracket the commutator.
pub fn group_to_structure(group: &ClassTwoGroupPresentation) -> AlternatingStructure {
    let field = FieldDescriptor::prime(group.p).expect("validated prime");
    let brackets = group.commutator_entries().map(|(i, j, exps)| {
        let c: Vec<Scalar> =
            exps.iter().map(|&e| field.parse(&e.to_string()).expect("residue")).collect();
        (i, j, c)
    });
    AlternatingStructure::new(field, group.generators, group.central_rank, brackets)
        .expect("validated presentation")
}

/// Evaluates the class-two commutator identity
/// `[Π g_i^{α_i}, Π g_j^{β_j}] = Π_{i<j} [g_i, g_j]^{α_i β_j − α_j β_i}`,
/// returning the exponent vector of the right-hand side in the central
/// basis.  This is the group-theoretic check every witness must pass.
pub fn commutator_of(
    group: &ClassTwoGroupPresentation,
    alpha: &[u64],
    beta: &[u64],
) -> Result<Vec<u64>, BridgeError> {
    if alpha.len() != group.generators {
        return Err(BridgeError::VectorLength { found: alpha.len(), expected: group.generators });
    }
    if beta.len() != group.generators {
        return Err(BridgeError::VectorLength { found: beta.len(), expected: group.generators });
    }
    let p = group.p as u128;
    let mut out = vec![0u64; group.central_rank];
    for (&(i, j), exps) in &group.commutators {
        let ai = (alpha[i - 1] % group.p) as u128;
        let aj = (alpha[j - 1] % group.p) as u128;
        let bi = (beta[i - 1] % group.p) as u128;
        let bj = (beta[j - 1] % group.p) as u128;
        // α_i β_j − α_j β_i modulo p, kept nonnegative.
        let coeff = (ai * bj % p + p - aj * bi % p) % p;
        if coeff == 0 {
            continue;
        }
        for (o, &e) in out.iter_mut().zip(exps.iter()) {
            *o = ((*o as u128 + coeff * e as u128) % p) as u64;
        }
    }
    Ok(out)
}

/// Outcome of [`decide_commutator`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupDecision {
    pub status: ImageStatus,
    /// For `Yes`: exponent vectors `(α, β)` with `[Π g_i^{α_i}, Π g_j^{β_j}]`
    /// equal to the target, verified through the commutator identity.
    pub witness: Option<(Vec<u64>, Vec<u64>)>,
    /// For `No`: refutations of the examined presentations, stated for the
    /// associated alternating structure.
    pub refutations: Vec<PresentationRefutation>,
    pub notes: Vec<String>,
}

/// Decides whether the central element with the given exponent vector is a
/// single commutator `[g, h]` of the presented group.
pub fn decide_commutator(
    group: &ClassTwoGroupPresentation,
    target: &[u64],
    config: &ImageConfig,
) -> Result<GroupDecision, BridgeError> {
    if target.len() != group.central_rank {
        return Err(BridgeError::VectorLength {
            found: target.len(),
            expected: group.central_rank,
        });
    }
    let structure = group_to_structure(group);
    let field = structure.field();
    let x: Vec<Scalar> =
        target.iter().map(|&e| field.parse(&(e % group.p).to_string()).expect("residue")).collect();
    let image = decide_in_image(&structure, &x, config)?;
    let witness = image.witness.map(|(a, b)| {
        let residue = |s: &Scalar| match s {
            Scalar::Prime { residue, .. } => *residue,
            Scalar::Rational(_) => unreachable!("group structures live over F_p"),
        };
        (a.iter().map(residue).collect::<Vec<u64>>(), b.iter().map(residue).collect::<Vec<u64>>())
    });
    if let Some((alpha, beta)) = &witness {
        let produced = commutator_of(group, alpha, beta)?;
        let expected: Vec<u64> = target.iter().map(|&e| e % group.p).collect();
        assert_eq!(produced, expected, "witness failed the commutator identity");
    }
    Ok(GroupDecision {
        status: image.status,
        witness,
        refutations: image.refutations,
        notes: image.notes,
    })
}
