//! Exact Gaussian elimination over a field's scalars.
//!
//! Internal utility for the bridge layer: reduced row echelon form with
//! deterministic pivoting (first nonzero row per column), consistent
//! solving with free variables at zero, and kernel bases with one vector
//! per free column.

use crate::field::Scalar;

/// Reduces `rows` in place to reduced row echelon form and returns the
/// pivot columns in ascending order.
pub(crate) fn rref(rows: &mut [Vec<Scalar>]) -> Vec<usize> {
    if rows.is_empty() {
        return Vec::new();
    }
    let cols = rows[0].len();
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pr) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pr);
        let inv = rows[rank][col].inverted().expect("pivot is nonzero");
        for x in rows[rank].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in 0..cols {
                    let sub = &factor * &rows[rank][c];
                    rows[r][c] = &rows[r][c] - &sub;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

pub(crate) fn rank(rows: &[Vec<Scalar>]) -> usize {
    let mut copy = rows.to_vec();
    rref(&mut copy).len()
}

/// Solves `A·x = b`, returning the particular solution with every free
/// variable set to zero, or `None` when inconsistent.
pub(crate) fn solve(a: &[Vec<Scalar>], b: &[Scalar]) -> Option<Vec<Scalar>> {
    assert_eq!(a.len(), b.len(), "row count must match rhs length");
    if a.is_empty() {
        return Some(Vec::new());
    }
    let cols = a[0].len();
    let mut aug: Vec<Vec<Scalar>> = a
        .iter()
        .zip(b)
        .map(|(row, r)| {
            let mut v = row.clone();
            v.push(r.clone());
            v
        })
        .collect();
    let pivots = rref(&mut aug);
    // a pivot in the augmented column means the system is inconsistent
    if pivots.last() == Some(&cols) {
        return None;
    }
    let zero = b
        .first()
        .map(|s| s.field().zero())
        .unwrap_or_else(|| a[0][0].field().zero());
    let mut x = vec![zero; cols];
    for (row, &col) in pivots.iter().enumerate() {
        x[col] = aug[row][cols].clone();
    }
    Some(x)
}

/// A basis of the kernel of `A` (with `cols` columns): one vector per free
/// column, in ascending free-column order, with the free coordinate set to
/// one.
pub(crate) fn kernel_basis(a: &[Vec<Scalar>], cols: usize) -> Vec<Vec<Scalar>> {
    if cols == 0 {
        return Vec::new();
    }
    let field = a
        .first()
        .and_then(|r| r.first())
        .map(|s| s.field())
        .expect("kernel of a matrix with no entries needs a field; pass at least one row");
    let mut copy = a.to_vec();
    let pivots = rref(&mut copy);
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![field.zero(); cols];
        v[free] = field.one();
        for (row, &col) in pivots.iter().enumerate() {
            v[col] = copy[row][free].negated();
        }
        basis.push(v);
    }
    basis
}

/// Writes `x` as a linear combination of `vectors`, returning the
/// coefficients (free coefficients zero), or `None` when `x` lies outside
/// their span.
pub(crate) fn express_in_span(vectors: &[Vec<Scalar>], x: &[Scalar]) -> Option<Vec<Scalar>> {
    if vectors.is_empty() {
        return if x.iter().all(Scalar::is_zero) { Some(Vec::new()) } else { None };
    }
    let rows = x.len();
    assert!(vectors.iter().all(|v| v.len() == rows), "vector lengths must match");
    // columns are the spanning vectors
    let a: Vec<Vec<Scalar>> = (0..rows)
        .map(|r| vectors.iter().map(|v| v[r].clone()).collect())
        .collect();
    solve(&a, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldDescriptor;

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn row(f: FieldDescriptor, xs: &[&str]) -> Vec<Scalar> {
        xs.iter().map(|s| f.parse(s).unwrap()).collect()
    }

    #[test]
    fn rref_and_rank() {
        let f = q();
        let mut m = vec![row(f, &["2", "4", "6"]), row(f, &["1", "2", "4"])];
        let pivots = rref(&mut m);
        assert_eq!(pivots, vec![0, 2]);
        assert_eq!(m[0], row(f, &["1", "2", "0"]));
        assert_eq!(m[1], row(f, &["0", "0", "1"]));
        assert_eq!(rank(&[row(f, &["1", "1"]), row(f, &["2", "2"])]), 1);
    }

    #[test]
    fn solve_examples() {
        let f = q();
        // x + y = 3, x − y = 1 → (2, 1)
        let a = vec![row(f, &["1", "1"]), row(f, &["1", "-1"])];
        assert_eq!(solve(&a, &row(f, &["3", "1"])), Some(row(f, &["2", "1"])));
        // inconsistent
        let b = vec![row(f, &["1", "1"]), row(f, &["2", "2"])];
        assert_eq!(solve(&b, &row(f, &["1", "3"])), None);
        // underdetermined: free variable stays zero
        let c = vec![row(f, &["1", "1", "0"])];
        assert_eq!(solve(&c, &row(f, &["5"])), Some(row(f, &["5", "0", "0"])));
        // prime field
        let g = FieldDescriptor::prime(5).unwrap();
        let a5 = vec![row(g, &["2", "1"]), row(g, &["1", "1"])];
        let x = solve(&a5, &row(g, &["1", "2"])).unwrap();
        // check 2x + y = 1, x + 3y = 2 mod 5
        assert_eq!(&(&a5[0][0] * &x[0]) + &(&a5[0][1] * &x[1]), g.parse("1").unwrap());
        assert_eq!(&(&a5[1][0] * &x[0]) + &(&a5[1][1] * &x[1]), g.parse("2").unwrap());
    }

    #[test]
    fn kernel_and_span() {
        let f = q();
        // kernel of [1 2 3] is two-dimensional
        let a = vec![row(f, &["1", "2", "3"])];
        let k = kernel_basis(&a, 3);
        assert_eq!(k, vec![row(f, &["-2", "1", "0"]), row(f, &["-3", "0", "1"])]);
        for v in &k {
            let dot = &(&(&a[0][0] * &v[0]) + &(&a[0][1] * &v[1])) + &(&a[0][2] * &v[2]);
            assert!(dot.is_zero());
        }
        // span membership
        let vs = vec![row(f, &["1", "0", "1"]), row(f, &["0", "1", "1"])];
        assert_eq!(express_in_span(&vs, &row(f, &["2", "3", "5"])), Some(row(f, &["2", "3"])));
        assert_eq!(express_in_span(&vs, &row(f, &["1", "0", "0"])), None);
        assert_eq!(express_in_span(&[], &row(f, &["0", "0"])), Some(vec![]));
        assert_eq!(express_in_span(&[], &row(f, &["1", "0"])), None);
    }
}
