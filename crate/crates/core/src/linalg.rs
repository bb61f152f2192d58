//! Exact Gaussian elimination over the rationals.

use num_traits::Zero;

use crate::exactnum::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<Rational>),
    /// A particular solution and a basis of the null space.
    Underdetermined {
        particular: Vec<Rational>,
        nullspace: Vec<Vec<Rational>>,
    },
    Inconsistent,
}

/// Solves `a x = b` for a dense `rows x cols` matrix.
///
/// Pivots are the first nonzero entry of each column in row order, so the
/// result does not depend on anything but the input layout.
pub fn solve(a: &[Vec<Rational>], b: &[Rational], cols: usize) -> Solution {
    assert_eq!(a.len(), b.len(), "matrix and right-hand side disagree");
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols, "ragged matrix");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row][col..].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for (x, y) in other[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= &f * y;
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }

    if m[row..].iter().any(|r| !r[cols].is_zero()) {
        return Solution::Inconsistent;
    }

    let mut particular = vec![Rational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = m[r][cols].clone();
    }
    if pivots.len() == cols {
        return Solution::Unique(particular);
    }

    let nullspace = (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::from_integer(1.into());
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -m[r][free].clone();
            }
            v
        })
        .collect();
    Solution::Underdetermined {
        particular,
        nullspace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    fn residual(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
        a.iter()
            .map(|r| r.iter().zip(x).fold(Rational::zero(), |s, (p, q)| s + p * q))
            .collect()
    }

    #[test]
    fn unique_solution() {
        let a = mat(&[&[2, 1], &[1, 3], &[3, 4]]);
        let b = vec![int(3), int(5), int(8)];
        match solve(&a, &b, 2) {
            Solution::Unique(x) => {
                assert_eq!(x, vec![rat(4, 5), rat(7, 5)]);
                assert_eq!(residual(&a, &x), b);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent() {
        let a = mat(&[&[1, 1], &[2, 2]]);
        assert_eq!(solve(&a, &[int(1), int(3)], 2), Solution::Inconsistent);
    }

    #[test]
    fn underdetermined_reports_basis() {
        let a = mat(&[&[1, 2, 3]]);
        match solve(&a, &[int(6)], 3) {
            Solution::Underdetermined { particular, nullspace } => {
                assert_eq!(residual(&a, &particular), vec![int(6)]);
                assert_eq!(nullspace.len(), 2);
                for v in &nullspace {
                    assert_eq!(residual(&a, v), vec![int(0)]);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_system() {
        assert_eq!(solve(&[], &[], 0), Solution::Unique(vec![]));
        assert!(matches!(solve(&[], &[], 2), Solution::Underdetermined { .. }));
    }
}
