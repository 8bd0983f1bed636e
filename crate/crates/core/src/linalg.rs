//! Row reduction over the rationals.

use num_traits::Zero;

use crate::rational::{one, Rational};

/// Reduced row echelon form; returns the pivot column of each nonzero row.
pub fn rref(rows: &mut Vec<Vec<Rational>>, width: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v /= &lead;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Vec<Rational>], width: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, width).len()
}

/// Basis of `{x : row . x = 0 for every row}`, one vector per free column.
pub fn null_space(rows: &[Vec<Rational>], width: usize) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, width);
    let mut is_pivot = vec![false; width];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..width)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut x = vec![Rational::zero(); width];
            x[free] = one();
            for (row, &p) in m.iter().zip(&pivots) {
                x[p] = -row[free].clone();
            }
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{dot, int};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn null_space_is_orthogonal_and_complete() {
        let rows = vec![v(&[1, -1, 0]), v(&[2, -2, 0])];
        let ns = null_space(&rows, 3);
        assert_eq!(ns.len(), 2);
        for x in &ns {
            for r in &rows {
                assert!(dot(r, x).is_zero());
            }
        }
        assert_eq!(rank(&rows, 3), 1);
    }

    #[test]
    fn empty_system_gives_identity_basis() {
        let ns = null_space(&[], 2);
        assert_eq!(ns, vec![v(&[1, 0]), v(&[0, 1])]);
    }
}
