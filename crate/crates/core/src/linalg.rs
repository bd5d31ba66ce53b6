//! Exact rational and integer matrix arithmetic.
//!
//! Everything here is arbitrary precision. Determinants use fraction-free
//! Bareiss elimination on row-scaled integer matrices, Smith and Hermite
//! normal forms are computed over `BigInt` with explicit unimodular
//! transforms, and inverses use Gauss-Jordan over `BigRational`.

use std::fmt;
use std::ops::{Index, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{LatticeError, Result};

pub type Rational = BigRational;

/// Integer matrix in row-major nested form, used by the integer kernels.
pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int_rat(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(LatticeError::Dimension(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Rational::one();
        }
        m
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.entries[i * n + i] = v.clone();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is needed when there are no rows.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let r = rows.len();
        let mut entries = Vec::with_capacity(r * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LatticeError::Dimension(format!(
                    "row of length {} in a matrix with {} columns",
                    row.len(),
                    cols
                )));
            }
            entries.extend(row);
        }
        Ok(Self { rows: r, cols, entries })
    }

    /// Convenience constructor for small integer literals. Panics on ragged input.
    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
        Self::from_rows(rows, cols).expect("ragged integer literal")
    }

    pub fn from_int(rows: &IntMatrix, cols: usize) -> Self {
        let rows = rows.iter().map(|r| r.iter().map(int_rat).collect()).collect();
        Self::from_rows(rows, cols).expect("ragged integer matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LatticeError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LatticeError::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        let entries = self.entries.iter().map(|x| x * factor).collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|x| x.is_integer())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Least common multiple of all entry denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.entries.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// Integer entries, or a domain error naming the first non-integer.
    pub fn to_int(&self) -> Result<IntMatrix> {
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row = Vec::with_capacity(self.cols);
            for j in 0..self.cols {
                let x = &self[(i, j)];
                if !x.is_integer() {
                    return Err(LatticeError::Domain(format!("entry ({i},{j}) = {x}")));
                }
                row.push(x.to_integer());
            }
            out.push(row);
        }
        Ok(out)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.entries[(i * other.rows + k) * cols + j * other.cols + l] =
                            a * &other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn block_diag(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        let cols = out.cols;
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[i * cols + j] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.entries[(self.rows + i) * cols + self.cols + j] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(LatticeError::Dimension("hstack row counts differ".into()));
        }
        let rows = (0..self.rows)
            .map(|i| self.row(i).iter().chain(other.row(i)).cloned().collect())
            .collect();
        Self::from_rows(rows, self.cols + other.cols)
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(LatticeError::Dimension("vstack column counts differ".into()));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(Self { rows: self.rows + other.rows, cols: self.cols, entries })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let rows = idx.iter().map(|&i| self.row(i).to_vec()).collect();
        Self::from_rows(rows, self.cols).expect("row selection keeps width")
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.cols];
        for (k, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += a * &self[(k, j)];
            }
        }
        out
    }

    /// Bilinear form `x · self · yᵀ`.
    pub fn bilinear(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let xa = self.left_apply(x);
        xa.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.checked_mul(self)?;
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.cols + j]
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.checked_mul(rhs).expect("matrix shapes must agree")
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Fraction-free Bareiss determinant of a square integer matrix.
pub fn det_integer(a: &IntMatrix) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(p) => {
                    m.swap(k, p);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Exact determinant. Rows are cleared of denominators, the integer
/// determinant is taken by Bareiss elimination and the scale is divided out.
pub fn det_exact(a: &RationalMatrix) -> Result<Rational> {
    if !a.is_square() {
        return Err(LatticeError::Dimension(format!(
            "determinant of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let mut scale = BigInt::one();
    let mut int_rows = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        let den = a.row(i).iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let row: Vec<BigInt> =
            a.row(i).iter().map(|x| (x * int_rat(&den)).to_integer()).collect();
        scale *= &den;
        int_rows.push(row);
    }
    Ok(Rational::new(det_integer(&int_rows), scale))
}

/// Exact inverse by Gauss-Jordan elimination.
pub fn invert(a: &RationalMatrix) -> Result<RationalMatrix> {
    if !a.is_square() {
        return Err(LatticeError::Dimension("inverse of a non-square matrix".into()));
    }
    let n = a.rows();
    let mut m: Vec<Vec<Rational>> = a.row_vecs();
    let mut inv: Vec<Vec<Rational>> = RationalMatrix::identity(n).row_vecs();
    for col in 0..n {
        let piv = (col..n).find(|&i| !m[i][col].is_zero()).ok_or(LatticeError::Singular)?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col].clone();
        for j in 0..n {
            m[col][j] = &m[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for i in 0..n {
            if i == col || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            for j in 0..n {
                let mv = &f * &m[col][j];
                m[i][j] -= mv;
                let iv = &f * &inv[col][j];
                inv[i][j] -= iv;
            }
        }
    }
    RationalMatrix::from_rows(inv, n)
}

/// Rank over the rationals.
pub fn rank(a: &RationalMatrix) -> usize {
    let mut m = a.row_vecs();
    let (rows, cols) = (a.rows(), a.cols());
    let mut r = 0;
    for col in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..rows {
            if m[i][col].is_zero() {
                continue;
            }
            let f = &m[i][col] / &m[r][col];
            for j in col..cols {
                let v = &f * &m[r][j];
                m[i][j] -= v;
            }
        }
        r += 1;
    }
    r
}

/// Solves `x · a = b` row by row for `a` with independent rows.
/// Errors when some row of `b` is outside the row space of `a`.
pub fn solve_left(a: &RationalMatrix, b: &RationalMatrix) -> Result<RationalMatrix> {
    if a.cols() != b.cols() {
        return Err(LatticeError::Dimension("solve_left width mismatch".into()));
    }
    if a.rows() == 0 {
        if b.is_zero() {
            return Ok(RationalMatrix::zeros(b.rows(), 0));
        }
        return Err(LatticeError::Containment("nonzero vector in a rank-0 span".into()));
    }
    let at = a.transpose();
    let aat_inv = invert(&(a * &at))?;
    let x = &(b * &at) * &aat_inv;
    if &x * a != *b {
        return Err(LatticeError::Containment("vector outside the row space".into()));
    }
    Ok(x)
}

/// Result of a Smith normal form computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    /// Nonzero diagonal entries `d1 | d2 | ... | dr`, all positive.
    pub invariants: Vec<BigInt>,
    /// Unimodular integer matrix acting on rows.
    pub left: RationalMatrix,
    /// Unimodular integer matrix acting on columns.
    pub right: RationalMatrix,
}

impl SmithDecomposition {
    /// The full `rows x cols` diagonal matrix `left · A · right`.
    pub fn diagonal_matrix(&self) -> RationalMatrix {
        let mut d = RationalMatrix::zeros(self.left.rows(), self.right.cols());
        for (i, v) in self.invariants.iter().enumerate() {
            d.set(i, i, int_rat(v));
        }
        d
    }
}

fn swap_cols(m: &mut IntMatrix, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn add_row_multiple(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let src = m[source].clone();
    for (t, s) in m[target].iter_mut().zip(&src) {
        *t -= q * s;
    }
}

fn add_col_multiple(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let s = row[source].clone();
        row[target] -= q * s;
    }
}

fn int_identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Smith normal form of an integer matrix (any shape), with witnesses
/// `left · a · right = diag(invariants)`.
pub fn smith_normal_form(a: &RationalMatrix) -> Result<SmithDecomposition> {
    let mut m = a.to_int()?;
    let (rows, cols) = (a.rows(), a.cols());
    let mut u = int_identity(rows);
    let mut v = int_identity(cols);
    let mut invariants = Vec::new();

    for t in 0..rows.min(cols) {
        loop {
            // Minimal |entry| over the trailing block; first occurrence in row-major order.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish_smith(invariants, u, v, rows, cols);
            };
            m.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut m, t, pj);
            swap_cols(&mut v, t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = m[i][t].div_floor(&m[t][t]);
                add_row_multiple(&mut m, i, t, &q);
                add_row_multiple(&mut u, i, t, &q);
                if !m[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = m[t][j].div_floor(&m[t][t]);
                add_col_multiple(&mut m, j, t, &q);
                add_col_multiple(&mut v, j, t, &q);
                if !m[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Enforce divisibility of the trailing block by the pivot.
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !m[i][j].is_multiple_of(&m[t][t]));
            match bad {
                Some((i, _)) => {
                    let q = -BigInt::one();
                    add_row_multiple(&mut m, t, i, &q);
                    add_row_multiple(&mut u, t, i, &q);
                }
                None => break,
            }
        }
        if m[t][t].is_negative() {
            for x in m[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        invariants.push(m[t][t].clone());
    }
    finish_smith(invariants, u, v, rows, cols)
}

fn finish_smith(
    invariants: Vec<BigInt>,
    u: IntMatrix,
    v: IntMatrix,
    rows: usize,
    cols: usize,
) -> Result<SmithDecomposition> {
    Ok(SmithDecomposition {
        invariants,
        left: RationalMatrix::from_int(&u, rows),
        right: RationalMatrix::from_int(&v, cols),
    })
}

/// Row-style Hermite normal form of an integer matrix with its transform:
/// returns `(h, u, rank)` where `u · a = h`, `u` is unimodular, the first
/// `rank` rows of `h` are in echelon form with positive pivots and reduced
/// entries above each pivot, and the remaining rows are zero.
pub fn integer_hnf(a: &IntMatrix, cols: usize) -> (IntMatrix, IntMatrix, usize) {
    let rows = a.len();
    let mut h = a.clone();
    let mut u = int_identity(rows);
    let mut r = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows {
                if !h[i][col].is_zero() && best.is_none_or(|b| h[i][col].abs() < h[b][col].abs())
                {
                    best = Some(i);
                }
            }
            let Some(p) = best else { break };
            h.swap(r, p);
            u.swap(r, p);
            let mut done = true;
            for i in r + 1..rows {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = h[i][col].div_floor(&h[r][col]);
                add_row_multiple(&mut h, i, r, &q);
                add_row_multiple(&mut u, i, r, &q);
                if !h[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < rows && !h[r][col].is_zero() {
            if h[r][col].is_negative() {
                for x in h[r].iter_mut() {
                    *x = -x.clone();
                }
                for x in u[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            for i in 0..r {
                let q = h[i][col].div_floor(&h[r][col]);
                add_row_multiple(&mut h, i, r, &q);
                add_row_multiple(&mut u, i, r, &q);
            }
            pivots.push(col);
            r += 1;
        }
    }
    (h, u, r)
}

/// Basis of the integer left kernel `{c ∈ Z^rows : c · a = 0}`.
pub fn integer_left_kernel(a: &IntMatrix, cols: usize) -> IntMatrix {
    let (_, u, r) = integer_hnf(a, cols);
    u[r..].to_vec()
}

/// Canonical row basis of the group generated by rational rows.
/// Rows are scaled to a common denominator, reduced to integer HNF, and the
/// denominator is restored.
pub fn hermite_normal_form(rows: &RationalMatrix) -> RationalMatrix {
    let den = rows.common_denominator();
    let scaled = rows.scale(&int_rat(&den));
    let ints = scaled.to_int().expect("scaled rows are integral");
    let (h, _, r) = integer_hnf(&ints, rows.cols());
    let basis = RationalMatrix::from_int(&h[..r].to_vec(), rows.cols());
    basis.scale(&Rational::new(BigInt::one(), den))
}

/// Lossy conversion used only for enumeration pruning.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
