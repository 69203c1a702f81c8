//! Exact Gaussian elimination over the field base rings (rationals, `F_p`).

use crate::scalar::{BaseRing, Coeff};

/// Reduced row echelon form in place; zero rows are removed.  Returns the
/// pivot column of each remaining row.
pub(crate) fn rref(rows: &mut Vec<Vec<Coeff>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        let Some(found) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, found);
        let inv = rows[r][col].inverse().expect("nonzero field element is invertible");
        for x in rows[r].iter_mut().skip(col) {
            *x = x.mul(&inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                if !p.is_zero() {
                    *x = x.sub(&factor.mul(p));
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// A basis of the null space `{x : A x = 0}`.
pub(crate) fn field_kernel(mut rows: Vec<Vec<Coeff>>, cols: usize, base: BaseRing) -> Vec<Vec<Coeff>> {
    let pivots = rref(&mut rows, cols);
    let mut is_pivot = vec![None; cols];
    for (r, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(r);
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if is_pivot[free].is_some() {
            continue;
        }
        let mut v = vec![base.zero(); cols];
        v[free] = base.one();
        for (r, &c) in pivots.iter().enumerate() {
            if !rows[r][free].is_zero() {
                v[c] = rows[r][free].neg();
            }
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[Vec<i64>]) -> Vec<Vec<Coeff>> {
        rows.iter().map(|r| r.iter().map(|&a| BaseRing::Rationals.from_i64(a)).collect()).collect()
    }

    #[test]
    fn kernel_of_small_matrix() {
        let a = q(&[vec![1, 2, 3], vec![2, 4, 6]]);
        let k = field_kernel(a.clone(), 3, BaseRing::Rationals);
        assert_eq!(k.len(), 2);
        for v in &k {
            for row in &a {
                let dot = row.iter().zip(v).fold(BaseRing::Rationals.zero(), |acc, (x, y)| acc.add(&x.mul(y)));
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn rref_mod_p() {
        let f2 = BaseRing::Prime(2);
        let mut rows: Vec<Vec<Coeff>> =
            [[1, 1, 0], [0, 1, 1], [1, 0, 1]].iter().map(|r| r.iter().map(|&a| f2.from_i64(a)).collect()).collect();
        let pivots = rref(&mut rows, 3);
        assert_eq!(pivots, vec![0, 1]);
    }
}
