//! Row reduction and null spaces over `GF(q)`.

use crate::gf::{Elem, Field};

/// Reduces `rows` to reduced row echelon form in place, dropping zero rows.
/// Returns the pivot column of each remaining row.
pub(crate) fn rref(field: &Field, rows: &mut Vec<Vec<Elem>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        if top == rows.len() {
            break;
        }
        let Some(found) = (top..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(top, found);
        let inv = field.inv_nonzero(rows[top][col]);
        for x in rows[top].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let pivot_row = rows[top].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == top || row[col].is_zero() {
                continue;
            }
            let factor = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = field.sub(*x, field.mul(factor, y));
            }
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    pivots
}

/// Basis of `{x : row . x = 0 for every row}` for a matrix already in RREF.
pub(crate) fn null_space(
    field: &Field,
    rows: &[Vec<Elem>],
    pivots: &[usize],
    ncols: usize,
) -> Vec<Vec<Elem>> {
    let mut is_pivot = vec![false; ncols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Elem::ZERO; ncols];
            v[free] = Elem::ONE;
            for (row, &p) in rows.iter().zip(pivots) {
                v[p] = field.neg(row[free]);
            }
            v
        })
        .collect()
}

/// Reduces `v` against an RREF basis; the result is zero iff `v` lies in its span.
pub(crate) fn reduce(field: &Field, rows: &[Vec<Elem>], pivots: &[usize], v: &mut [Elem]) {
    for (row, &p) in rows.iter().zip(pivots) {
        let factor = v[p];
        if factor.is_zero() {
            continue;
        }
        for (x, &y) in v.iter_mut().zip(row) {
            *x = field.sub(*x, field.mul(factor, y));
        }
    }
}
