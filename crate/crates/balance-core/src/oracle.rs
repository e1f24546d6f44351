//! Independent brute-force oracles over prime fields.
//!
//! These routines decide the same questions as the structured solvers, but
//! by exhaustive enumeration with their own modular arithmetic and their own
//! linear algebra.  They deliberately share no solving code with the engine
//! so that agreement between the two is meaningful evidence of correctness.
//!
//! All oracles are deterministic (lexicographically first answers) and
//! refuse up front, via a budget check, any instance whose worst-case work
//! would be excessive.

use crate::bridge::AlternatingStructure;
use crate::field::{FieldDescriptor, Scalar};
use crate::graph::{Labeling, WeightedGraph};

#[derive(thiserror::Error, Clone, PartialEq, Eq, Debug)]
pub enum OracleError {
    #[error("worst-case work {required} exceeds the budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("oracles only operate over prime fields")]
    UnsupportedField,
    #[error("malformed oracle input: {0}")]
    Input(String),
}

fn residue(s: &Scalar) -> u64 {
    match s {
        Scalar::Prime { residue, .. } => *residue,
        Scalar::Rational(_) => unreachable!("prime field checked by caller"),
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// `a·d − c·b mod p` with products kept in `u128`.
fn cross(a: u64, b: u64, c: u64, d: u64, p: u64) -> u64 {
    let p2 = (p as u128) * (p as u128);
    let lhs = a as u128 * d as u128;
    let rhs = c as u128 * b as u128;
    ((lhs + p2 - rhs) % p as u128) as u64
}

fn saturating_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

fn check_budget(required: u128, budget: u64) -> Result<(), OracleError> {
    if required > budget as u128 {
        Err(OracleError::BudgetExceeded { required, budget })
    } else {
        Ok(())
    }
}

/// Exhaustively searches for a consistent labeling of `graph` over its prime
/// field by trying, for each vertex in order, all `p²` pairs in ascending
/// lexicographic order of `(a, b)`.  Returns the lexicographically first
/// labeling, or `None` if every assignment fails.
///
/// The worst-case work `p^(2n)` must not exceed `budget`.
pub fn oracle_label(graph: &WeightedGraph, budget: u64) -> Result<Option<Labeling>, OracleError> {
    let p = match graph.field() {
        FieldDescriptor::Prime { p } => p,
        FieldDescriptor::Rationals => return Err(OracleError::UnsupportedField),
    };
    let n = graph.vertex_count();
    check_budget(saturating_pow(p as u128, 2 * n as u32), budget)?;

    // constraints[v] lists (u, d) for stored edges (u, v) with u < v, so a
    // partial assignment of 1..=v can be checked as soon as v is placed
    let mut constraints: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n + 1];
    for (u, v, w) in graph.edges() {
        constraints[v].push((u, residue(w)));
    }

    let mut pairs: Vec<(u64, u64)> = Vec::with_capacity(n);
    fn rec(
        n: usize,
        p: u64,
        constraints: &[Vec<(usize, u64)>],
        pairs: &mut Vec<(u64, u64)>,
    ) -> bool {
        if pairs.len() == n {
            return true;
        }
        let v = pairs.len() + 1;
        for a in 0..p {
            for b in 0..p {
                let ok = constraints[v].iter().all(|&(u, d)| {
                    let (au, bu) = pairs[u - 1];
                    cross(au, bu, a, b, p) == d
                });
                if ok {
                    pairs.push((a, b));
                    if rec(n, p, constraints, pairs) {
                        return true;
                    }
                    pairs.pop();
                }
            }
        }
        false
    }

    if rec(n, p, &constraints, &mut pairs) {
        let field = graph.field();
        Ok(Some(Labeling::new(
            pairs
                .into_iter()
                .map(|(a, b)| {
                    (field.from_integer(a as i64), field.from_integer(b as i64))
                })
                .collect(),
        )))
    } else {
        Ok(None)
    }
}

/// Solves `mat · b = rhs` over `F_p` by Gaussian elimination, with free
/// variables set to zero.  Returns `None` when inconsistent.
fn solve_mod_p(mat: &[Vec<u64>], rhs: &[u64], cols: usize, p: u64) -> Option<Vec<u64>> {
    let rows = mat.len();
    let mut a: Vec<Vec<u64>> = mat
        .iter()
        .zip(rhs)
        .map(|(row, &r)| {
            let mut v = row.clone();
            v.push(r);
            v
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, pr);
        let inv = inv_mod(a[rank][col], p);
        for x in a[rank].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        for r in 0..rows {
            if r != rank && a[r][col] != 0 {
                let f = a[r][col];
                for c in col..=cols {
                    let sub = mul_mod(f, a[rank][c], p);
                    a[r][c] = ((a[r][c] + p - sub) % p) as u64;
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    // inconsistent if a zero row has nonzero rhs
    if a[rank..].iter().any(|row| row[cols] != 0) {
        return None;
    }
    let mut b = vec![0u64; cols];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(r) = pivot {
            b[col] = a[*r][cols];
        }
    }
    Some(b)
}

/// Decides whether `x = B(a, b)` is solvable by enumerating the first
/// argument over `F_p^n` — restricted, by bilinearity, to `a = 0` and
/// vectors whose first nonzero coordinate is `1` — and solving the linear
/// system in `b` for each candidate.  Returns the first witness found in
/// that order, or `None`.
///
/// The worst-case work `p^n · max(1, m·n²)` must not exceed `budget`.
pub fn oracle_image(
    structure: &AlternatingStructure,
    x: &[Scalar],
    budget: u64,
) -> Result<Option<(Vec<Scalar>, Vec<Scalar>)>, OracleError> {
    let field = structure.field();
    let p = match field {
        FieldDescriptor::Prime { p } => p,
        FieldDescriptor::Rationals => return Err(OracleError::UnsupportedField),
    };
    structure
        .check_target(x)
        .map_err(|e| OracleError::Input(e.to_string()))?;
    let n = structure.generators();
    let m = structure.target_dim();
    if x.iter().all(Scalar::is_zero) {
        return Ok(Some((structure.zero_source(), structure.zero_source())));
    }
    let per_candidate = (m * n * n).max(1) as u128;
    check_budget(saturating_pow(p as u128, n as u32).saturating_mul(per_candidate), budget)?;

    let xs: Vec<u64> = x.iter().map(residue).collect();
    let brackets: Vec<(usize, usize, Vec<u64>)> = structure
        .bracket_entries()
        .map(|(i, j, c)| (i, j, c.iter().map(residue).collect()))
        .collect();

    let mut a = vec![0u64; n];
    loop {
        // advance the odometer (lexicographic order, last coordinate fastest)
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(None);
            }
            k -= 1;
            a[k] += 1;
            if a[k] < p {
                break;
            }
            a[k] = 0;
        }
        // normalize projectively: first nonzero coordinate must be 1
        match a.iter().find(|&&c| c != 0) {
            Some(&lead) if lead == 1 => {}
            _ => continue,
        }
        // column k of the linear system in b:
        //   Σ_{i<k} a_i c_{i,k} − Σ_{j>k} a_j c_{k,j}
        let mut mat = vec![vec![0u64; n]; m];
        for &(i, j, ref c) in &brackets {
            let ai = a[i - 1];
            let aj = a[j - 1];
            for (row, ck) in c.iter().enumerate() {
                if ai != 0 {
                    // contributes +a_i c_{i,j} to column j
                    mat[row][j - 1] = (mat[row][j - 1] + mul_mod(ai, *ck, p)) % p;
                }
                if aj != 0 {
                    // contributes −a_j c_{i,j} to column i
                    let sub = mul_mod(aj, *ck, p);
                    mat[row][i - 1] = (mat[row][i - 1] + p - sub) % p;
                }
            }
        }
        if let Some(b) = solve_mod_p(&mat, &xs, n, p) {
            let av: Vec<Scalar> = a.iter().map(|&c| field.from_integer(c as i64)).collect();
            let bv: Vec<Scalar> = b.iter().map(|&c| field.from_integer(c as i64)).collect();
            let check = structure
                .evaluate(&av, &bv)
                .map_err(|e| OracleError::Input(e.to_string()))?;
            assert_eq!(check, x, "oracle witness must satisfy B(a, b) = x");
            return Ok(Some((av, bv)));
        }
    }
}

/// Deterministic enumeration of every weighted graph on `n` vertices over
/// `F_p`, where each of the `C(n, 2)` vertex pairs is independently absent
/// or present with one of the `p` weights.
///
/// Graphs are indexed `0..count()` by reading the pair slots in ascending
/// lexicographic order as base-`(p+1)` digits, most significant first:
/// digit `0` means the pair is absent and digit `d ≥ 1` means weight
/// `d − 1`.  Index access makes it easy to split the range across workers.
#[derive(Clone, Debug)]
pub struct GraphEnumerator {
    field: FieldDescriptor,
    p: u64,
    n: usize,
    slots: Vec<(usize, usize)>,
    total: u128,
}

impl GraphEnumerator {
    pub fn new(n: usize, p: u64) -> Result<Self, OracleError> {
        let field = FieldDescriptor::prime(p).map_err(|e| OracleError::Input(e.to_string()))?;
        let mut slots = Vec::new();
        for u in 1..=n {
            for v in (u + 1)..=n {
                slots.push((u, v));
            }
        }
        let total = saturating_pow(p as u128 + 1, slots.len() as u32);
        Ok(GraphEnumerator { field, p, n, slots, total })
    }

    pub fn count(&self) -> u128 {
        self.total
    }

    /// The graph at `index`, for `index < count()`.
    pub fn graph_at(&self, index: u128) -> WeightedGraph {
        assert!(index < self.total, "graph index out of range");
        let base = self.p as u128 + 1;
        let mut digits = vec![0u64; self.slots.len()];
        let mut rest = index;
        for d in digits.iter_mut().rev() {
            *d = (rest % base) as u64;
            rest /= base;
        }
        let edges = self
            .slots
            .iter()
            .zip(&digits)
            .filter(|&(_, &d)| d > 0)
            .map(|(&(u, v), &d)| (u, v, self.field.from_integer(d as i64 - 1)));
        WeightedGraph::new(self.field, self.n, edges).expect("enumerated graph is valid")
    }

    pub fn iter(&self) -> impl Iterator<Item = WeightedGraph> + '_ {
        (0..self.total).map(|i| self.graph_at(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::AlternatingStructure;

    fn fp(p: u64) -> FieldDescriptor {
        FieldDescriptor::prime(p).unwrap()
    }

    fn graph(field: FieldDescriptor, n: usize, edges: &[(usize, usize, &str)]) -> WeightedGraph {
        WeightedGraph::new(
            field,
            n,
            edges.iter().map(|&(u, v, w)| (u, v, field.parse(w).unwrap())),
        )
        .unwrap()
    }

    fn pairs(field: FieldDescriptor, xs: &[(&str, &str)]) -> Labeling {
        Labeling::new(
            xs.iter()
                .map(|&(a, b)| (field.parse(a).unwrap(), field.parse(b).unwrap()))
                .collect(),
        )
    }

    #[test]
    fn lex_first_labeling_single_edge() {
        let f = fp(2);
        let g = graph(f, 2, &[(1, 2, "1")]);
        let l = oracle_label(&g, 1_000).unwrap().unwrap();
        assert_eq!(l, pairs(f, &[("0", "1"), ("1", "0")]));
        assert_eq!(g.verify_labeling(&l).unwrap(), vec![]);
        // a zero-weight edge admits the all-zero labeling, which is lex-first
        let z = graph(f, 2, &[(1, 2, "0")]);
        let l0 = oracle_label(&z, 1_000).unwrap().unwrap();
        assert_eq!(l0, pairs(f, &[("0", "0"), ("0", "0")]));
    }

    #[test]
    fn pendant_triangle_is_refuted() {
        // d12 ≠ 0 forces v3 = (0,0) through the two zero edges, killing d34
        for p in [2u64, 3, 5] {
            let f = fp(p);
            let g = graph(f, 4, &[(1, 2, "1"), (1, 3, "0"), (2, 3, "0"), (3, 4, "1")]);
            assert_eq!(oracle_label(&g, 100_000_000).unwrap(), None);
        }
    }

    #[test]
    fn oracle_label_is_deterministic_and_verified() {
        let f = fp(3);
        let e = GraphEnumerator::new(3, 3).unwrap();
        for g in e.iter() {
            let first = oracle_label(&g, 1_000_000).unwrap();
            let second = oracle_label(&g, 1_000_000).unwrap();
            assert_eq!(first, second);
            if let Some(l) = first {
                assert_eq!(g.verify_labeling(&l).unwrap(), vec![]);
                for (s, _) in l.pairs() {
                    assert!(f.contains(s));
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced_up_front() {
        let f = fp(3);
        let g = graph(f, 4, &[(1, 2, "1")]);
        // worst case is p^(2n) = 3^8 = 6561 regardless of edge count
        assert!(oracle_label(&g, 6561).is_ok());
        assert_eq!(
            oracle_label(&g, 6560),
            Err(OracleError::BudgetExceeded { required: 6561, budget: 6560 })
        );
        let q = WeightedGraph::empty(FieldDescriptor::rationals(), 2);
        assert_eq!(oracle_label(&q, 1_000), Err(OracleError::UnsupportedField));
    }

    #[test]
    fn image_oracle_heisenberg() {
        let f = fp(3);
        let s = AlternatingStructure::new(f, 2, 1, vec![(1, 2, vec![f.one()])]).unwrap();
        let x = vec![f.one()];
        let (a, b) = oracle_image(&s, &x, 1_000_000).unwrap().unwrap();
        // first candidate a = (0, 1); solving −b1 = 1 gives b1 = 2, b2 free = 0
        assert_eq!(a, vec![f.from_integer(0), f.from_integer(1)]);
        assert_eq!(b, vec![f.from_integer(2), f.from_integer(0)]);
        assert_eq!(s.evaluate(&a, &b).unwrap(), x);
    }

    #[test]
    fn image_oracle_zero_and_outside() {
        let f = fp(5);
        let s = AlternatingStructure::new(f, 2, 2, vec![(1, 2, vec![f.one(), f.zero()])])
            .unwrap();
        // zero target is always hit by (0, 0)
        let zero = vec![f.zero(), f.zero()];
        let (a, b) = oracle_image(&s, &zero, 1_000_000).unwrap().unwrap();
        assert_eq!(s.evaluate(&a, &b).unwrap(), zero);
        assert!(a.iter().all(Scalar::is_zero));
        // every single bracket is a multiple of c12 = (1, 0)
        let outside = vec![f.zero(), f.one()];
        assert_eq!(oracle_image(&s, &outside, 1_000_000).unwrap(), None);
    }

    #[test]
    fn image_oracle_budget_and_field() {
        let f = fp(3);
        let s = AlternatingStructure::new(f, 4, 2, vec![(1, 2, vec![f.one(), f.zero()])])
            .unwrap();
        let x = vec![f.one(), f.zero()];
        // p^n · m·n² = 81 · 32 = 2592
        assert!(oracle_image(&s, &x, 2592).is_ok());
        assert_eq!(
            oracle_image(&s, &x, 2591),
            Err(OracleError::BudgetExceeded { required: 2592, budget: 2591 })
        );
        let q = FieldDescriptor::rationals();
        let sq = AlternatingStructure::new(q, 2, 1, vec![(1, 2, vec![q.one()])]).unwrap();
        assert_eq!(oracle_image(&sq, &[q.one()], 1_000), Err(OracleError::UnsupportedField));
    }

    #[test]
    fn image_oracle_exhaustive_cross_check() {
        // small structure where the image can be computed by full enumeration
        // of both arguments: n = 3, m = 2 over F_2
        let f = fp(2);
        let s = AlternatingStructure::new(
            f,
            3,
            2,
            vec![
                (1, 2, vec![f.one(), f.zero()]),
                (1, 3, vec![f.zero(), f.one()]),
                (2, 3, vec![f.one(), f.one()]),
            ],
        )
        .unwrap();
        let all: Vec<Vec<Scalar>> = (0..8u32)
            .map(|k| {
                (0..3)
                    .map(|i| f.from_integer(((k >> i) & 1) as i64))
                    .collect()
            })
            .collect();
        for xo in 0..4u32 {
            let x: Vec<Scalar> =
                (0..2).map(|i| f.from_integer(((xo >> i) & 1) as i64)).collect();
            let brute = all.iter().any(|a| {
                all.iter().any(|b| s.evaluate(a, b).unwrap() == x)
            });
            let oracle = oracle_image(&s, &x, 1_000_000).unwrap();
            assert_eq!(oracle.is_some(), brute, "target {xo:?}");
        }
    }

    #[test]
    fn enumerator_counts_and_extremes() {
        let e = GraphEnumerator::new(4, 2).unwrap();
        assert_eq!(e.count(), 729);
        assert_eq!(GraphEnumerator::new(4, 3).unwrap().count(), 4096);
        assert_eq!(GraphEnumerator::new(3, 3).unwrap().count(), 64);
        // index 0 is the empty graph
        assert_eq!(e.graph_at(0), WeightedGraph::empty(fp(2), 4));
        // the last index is the complete graph with every weight p − 1
        let last = e.graph_at(728);
        assert_eq!(last.edge_count(), 6);
        for (_, _, w) in last.edges() {
            assert!(w.is_one());
        }
        // most significant digit is the slot (1, 2): index 2·3^5 = 486 sets
        // only that slot, to digit 2 = weight 1
        let g = e.graph_at(486);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(1, 2), Some(&fp(2).one()));
        assert!(GraphEnumerator::new(3, 4).is_err());
    }

    #[test]
    fn enumerator_is_exhaustive_and_distinct() {
        let e = GraphEnumerator::new(3, 2).unwrap();
        let graphs: Vec<WeightedGraph> = e.iter().collect();
        assert_eq!(graphs.len(), 27);
        for (i, g) in graphs.iter().enumerate() {
            for h in &graphs[i + 1..] {
                assert_ne!(g, h);
            }
        }
    }
}
