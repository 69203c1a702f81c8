//! Exact integer linear algebra: characters of the torus, Smith and Hermite
//! normal forms, integer kernels and adapted coordinates.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("zero character")]
    ZeroCharacter,
    #[error("character {0} is not primitive")]
    NotPrimitive(Character),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("integer overflow converting matrix entry")]
    Overflow,
}

/// A character `T = (S^1)^m -> S^1`, i.e. an integer vector of length `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character(pub Vec<i64>);

impl Character {
    pub fn new(v: Vec<i64>) -> Self {
        Character(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn pairing(&self, lambda: &[i64]) -> i64 {
        self.0.iter().zip(lambda).map(|(a, b)| a * b).sum()
    }

    pub fn neg(&self) -> Character {
        Character(self.0.iter().map(|a| -a).collect())
    }

    pub fn add(&self, other: &Character) -> Character {
        Character(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn gcd(&self) -> u64 {
        self.0.iter().fold(0i64, |g, &a| g.gcd(&a)).unsigned_abs()
    }

    /// The row vector `a * W`: the same character in coordinates changed by `W`.
    pub fn transform(&self, w: &IntMatrix) -> Result<Character, LatticeError> {
        if w.rows() != self.rank() {
            return Err(LatticeError::DimensionMismatch(w.rows(), self.rank()));
        }
        let mut out = Vec::with_capacity(w.cols());
        for j in 0..w.cols() {
            let mut acc = BigInt::zero();
            for (i, &a) in self.0.iter().enumerate() {
                acc += &w[(i, j)] * a;
            }
            out.push(acc.to_i64().ok_or(LatticeError::Overflow)?);
        }
        Ok(Character(out))
    }

    /// Whether the two characters are proportional over the rationals.
    pub fn is_proportional(&self, other: &Character) -> bool {
        let n = self.rank().min(other.rank());
        (0..n).all(|i| (0..n).all(|j| self.0[i] * other.0[j] == self.0[j] * other.0[i]))
    }

    /// Proportionality after reduction mod `p` (including vanishing mod `p`).
    pub fn is_proportional_mod(&self, other: &Character, p: u64) -> bool {
        let p = p as i64;
        let n = self.rank().min(other.rank());
        (0..n).all(|i| (0..n).all(|j| (self.0[i] * other.0[j] - self.0[j] * other.0[i]).rem_euclid(p) == 0))
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Dense integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|r| r.iter().map(|&a| BigInt::from(a))).collect();
        IntMatrix { rows: rows.len(), cols, data }
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let n = rows.len();
        let data = rows.into_iter().flatten().collect();
        IntMatrix { rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_i64_rows(&self) -> Result<Vec<Vec<i64>>, LatticeError> {
        (0..self.rows).map(|i| self.row(i).iter().map(|a| a.to_i64().ok_or(LatticeError::Overflow)).collect()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LatticeError> {
        if self.cols != other.rows {
            return Err(LatticeError::DimensionMismatch(self.cols, other.rows));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * &a[(n - 1, n - 1)]
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.determinant().abs().is_one()
    }

    /// Inverse of a unimodular matrix.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        if !self.is_unimodular() {
            return None;
        }
        // Gauss-Jordan on [A | I]; all pivots end up as units
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = IntMatrix::identity(n);
        for col in 0..n {
            let mut pivot = col;
            loop {
                let rows: Vec<usize> = (pivot..n).filter(|&i| !a[(i, col)].is_zero()).collect();
                let best = *rows.iter().min_by_key(|&&i| a[(i, col)].abs())?;
                a.swap_rows(best, pivot);
                inv.swap_rows(best, pivot);
                let mut done = true;
                for i in pivot + 1..n {
                    if a[(i, col)].is_zero() {
                        continue;
                    }
                    let q = a[(i, col)].div_floor(&a[(pivot, col)]);
                    a.add_row_multiple(i, pivot, &-&q);
                    inv.add_row_multiple(i, pivot, &-&q);
                    if !a[(i, col)].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
                pivot = col;
            }
            if a[(col, col)].is_negative() {
                a.negate_row(col);
                inv.negate_row(col);
            }
        }
        for col in (0..n).rev() {
            for i in 0..col {
                let q = a[(i, col)].clone();
                if !q.is_zero() {
                    a.add_row_multiple(i, col, &-&q);
                    inv.add_row_multiple(i, col, &-&q);
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(i * self.cols + k, j * self.cols + k);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.rows {
            self.data.swap(k * self.cols + i, k * self.cols + j);
        }
    }

    /// row_i += c * row_j
    fn add_row_multiple(&mut self, i: usize, j: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for k in 0..self.cols {
            let v = &self[(j, k)] * c;
            self[(i, k)] += v;
        }
    }

    /// col_i += c * col_j
    fn add_col_multiple(&mut self, i: usize, j: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for k in 0..self.rows {
            let v = &self[(k, j)] * c;
            self[(k, i)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for k in 0..self.cols {
            let v = -&self[(i, k)];
            self[(i, k)] = v;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for k in 0..self.rows {
            let v = -&self[(k, j)];
            self[(k, j)] = v;
        }
    }
}

/// `U * M * V = S` with `U`, `V` unimodular and `S` diagonal, `d_1 | d_2 | ...`.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols())).map(|i| self.s[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (r, c) = (m.rows(), m.cols());
    let mut s = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    for t in 0..r.min(c) {
        // smallest nonzero entry of the remaining block becomes the pivot
        let Some((pi, pj)) = smallest_entry(&s, t) else { break };
        s.swap_rows(t, pi);
        u.swap_rows(t, pi);
        s.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..r {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = s[(i, t)].div_floor(&s[(t, t)]);
                s.add_row_multiple(i, t, &-&q);
                u.add_row_multiple(i, t, &-&q);
                if !s[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..c {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = s[(t, j)].div_floor(&s[(t, t)]);
                s.add_col_multiple(j, t, &-&q);
                v.add_col_multiple(j, t, &-&q);
                if !s[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                let (pi, pj) = smallest_in_cross(&s, t);
                s.swap_rows(t, pi);
                u.swap_rows(t, pi);
                s.swap_cols(t, pj);
                v.swap_cols(t, pj);
                continue;
            }
            // divisibility: fold a row carrying a non-multiple into the pivot row
            let pivot = s[(t, t)].clone();
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !s[(i, j)].mod_floor(&pivot).is_zero()));
            match bad {
                Some(i) => {
                    s.add_row_multiple(t, i, &BigInt::one());
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { u, s, v }
}

fn smallest_entry(s: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..s.rows() {
        for j in t..s.cols() {
            if s[(i, j)].is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| s[(i, j)].abs() < s[(bi, bj)].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

fn smallest_in_cross(s: &IntMatrix, t: usize) -> (usize, usize) {
    let mut best = (t, t);
    for i in t..s.rows() {
        if !s[(i, t)].is_zero() && (s[best].is_zero() || s[(i, t)].abs() < s[best].abs()) {
            best = (i, t);
        }
    }
    for j in t..s.cols() {
        if !s[(t, j)].is_zero() && (s[best].is_zero() || s[(t, j)].abs() < s[best].abs()) {
            best = (t, j);
        }
    }
    best
}

/// `a = d * theta` with `d > 0` the gcd of the entries and `theta` primitive.
pub fn primitive_part(a: &Character) -> Result<(u64, Character), LatticeError> {
    if a.is_zero() {
        return Err(LatticeError::ZeroCharacter);
    }
    let d = a.gcd();
    Ok((d, Character(a.0.iter().map(|x| x / d as i64).collect())))
}

/// A unimodular `B` with `theta * B = (0, ..., 0, 1)`.
pub fn adapted_basis(theta: &Character) -> Result<IntMatrix, LatticeError> {
    if theta.is_zero() || theta.gcd() != 1 {
        return Err(LatticeError::NotPrimitive(theta.clone()));
    }
    let m = theta.rank();
    let mut w: Vec<i64> = theta.0.clone();
    let mut b = IntMatrix::identity(m);
    loop {
        let nonzero: Vec<usize> = (0..m).filter(|&i| w[i] != 0).collect();
        if nonzero.len() == 1 {
            break;
        }
        // smallest |entry| as pivot; ties go to the later column
        let j = *nonzero.iter().rev().min_by_key(|&&i| w[i].abs()).unwrap();
        for &i in &nonzero {
            if i != j {
                let q = Integer::div_floor(&w[i], &w[j]);
                w[i] -= q * w[j];
                b.add_col_multiple(i, j, &BigInt::from(-q));
            }
        }
    }
    let j = (0..m).find(|&i| w[i] != 0).unwrap();
    if j != m - 1 {
        w.swap(j, m - 1);
        b.swap_cols(j, m - 1);
    }
    if w[m - 1] < 0 {
        b.negate_col(m - 1);
    }
    Ok(b)
}

/// Row-style Hermite normal form of the lattice spanned by `rows`: an echelon
/// basis with positive pivots and entries above each pivot reduced into
/// `[0, pivot)`.  Zero rows are dropped.
pub fn hermite_basis(rows: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let mut a = rows;
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        loop {
            let live: Vec<usize> = (pivot_row..a.len()).filter(|&i| !a[i][col].is_zero()).collect();
            if live.is_empty() {
                break;
            }
            let best = *live.iter().min_by_key(|&&i| a[i][col].abs()).unwrap();
            a.swap(pivot_row, best);
            let mut done = true;
            for i in pivot_row + 1..a.len() {
                if a[i][col].is_zero() {
                    continue;
                }
                let q = a[i][col].div_floor(&a[pivot_row][col]);
                let (head, tail) = a.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[pivot_row]) {
                    *x -= &q * y;
                }
                if !a[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                if a[pivot_row][col].is_negative() {
                    a[pivot_row].iter_mut().for_each(|x| *x = -&*x);
                }
                pivots.push(col);
                pivot_row += 1;
                break;
            }
        }
        if pivot_row == a.len() {
            break;
        }
    }
    a.truncate(pivot_row);
    for (r, &col) in pivots.iter().enumerate() {
        for i in 0..r {
            let q = a[i][col].div_floor(&a[r][col]);
            if !q.is_zero() {
                let (head, tail) = a.split_at_mut(r);
                for (x, y) in head[i].iter_mut().zip(&tail[0]) {
                    *x -= &q * y;
                }
            }
        }
    }
    a
}

/// Index of the first nonzero entry.
pub fn pivot_of(row: &[BigInt]) -> Option<usize> {
    row.iter().position(|x| !x.is_zero())
}

/// A lattice basis of `{x in Z^cols : M x = 0}` for `M` given by rows.
pub fn integer_kernel(rows: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    let r = rows.len();
    // [M^T | I]: unimodular row operations clearing the left block
    let mut aug: Vec<Vec<BigInt>> = (0..cols)
        .map(|j| {
            let mut row: Vec<BigInt> = rows.iter().map(|eq| eq[j].clone()).collect();
            row.extend((0..cols).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..r {
        loop {
            let live: Vec<usize> = (pivot_row..cols).filter(|&i| !aug[i][col].is_zero()).collect();
            if live.is_empty() {
                break;
            }
            let best = *live.iter().min_by_key(|&&i| aug[i][col].abs()).unwrap();
            aug.swap(pivot_row, best);
            let mut done = true;
            for i in pivot_row + 1..cols {
                if aug[i][col].is_zero() {
                    continue;
                }
                let q = aug[i][col].div_floor(&aug[pivot_row][col]);
                let (head, tail) = aug.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[pivot_row]) {
                    *x -= &q * y;
                }
                if !aug[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                pivot_row += 1;
                break;
            }
        }
        if pivot_row == cols {
            break;
        }
    }
    aug.into_iter().skip(pivot_row).map(|row| row[r..].to_vec()).collect()
}
