//! Exact rational scalars, vectors and dense matrices.
//!
//! Every quantity in the crate is a [`Rat`]: an arbitrary-precision rational
//! kept in lowest terms with a positive denominator, so structural equality is
//! semantic equality. Elimination is plain Gauss-Jordan over the rationals;
//! the pivot choice only affects the size of intermediate numbers.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always reduced.
pub type Rat = BigRational;

/// Vector over the rationals.
pub type QVec = Vec<Rat>;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

pub fn qvec(entries: &[(i64, i64)]) -> QVec {
    entries.iter().map(|&(n, d)| rat(n, d)).collect()
}

/// Integer vector shorthand, mostly for fixtures and tests.
pub fn ivec(entries: &[i64]) -> QVec {
    entries.iter().map(|&n| int(n)).collect()
}

/// Parses `"p/q"`, `"p"` or a decimal-free integer, with an optional leading
/// ASCII `-` or Unicode minus sign.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let trimmed = text.trim();
    let normalized = match trimmed.strip_prefix('\u{2212}') {
        Some(rest) => format!("-{rest}"),
        None => trimmed.to_string(),
    };
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    let (numer, denom) = match normalized.split_once('/') {
        Some((n, d)) => (n.parse::<BigInt>().map_err(|_| bad())?, d.parse::<BigInt>().map_err(|_| bad())?),
        None => (normalized.parse::<BigInt>().map_err(|_| bad())?, BigInt::one()),
    };
    if denom.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rat::new(numer, denom))
}

/// Formats as `"p/q"`, or `"p"` for integers.
pub fn format_rat(value: &Rat) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn format_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(format_rat).collect();
    format!("({})", parts.join(", "))
}

pub fn zeros(n: usize) -> QVec {
    vec![Rat::zero(); n]
}

pub fn unit(n: usize, i: usize) -> QVec {
    let mut v = zeros(n);
    v[i] = Rat::one();
    v
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rat], s: &Rat) -> QVec {
    a.iter().map(|x| x * s).collect()
}

pub fn neg(a: &[Rat]) -> QVec {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero(a: &[Rat]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Concatenation `(a, b)`.
pub fn concat(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().chain(b).cloned().collect()
}

/// Chooses the antipodal representative whose first nonzero entry is positive.
pub fn sign_normalize(v: &[Rat]) -> QVec {
    match v.iter().find(|x| !x.is_zero()) {
        Some(first) if first.is_negative() => neg(v),
        _ => v.to_vec(),
    }
}

/// Rescales by a positive factor to a primitive integer vector.
pub fn primitive(v: &[Rat]) -> QVec {
    use num::Integer;
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Rat::from_integer(x / &gcd)).collect()
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QMat{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(format_rat).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for QMat {
    type Output = Rat;

    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[QVec]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
            }
            data.extend(row.iter().cloned());
        }
        Ok(QMat { rows: rows.len(), cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(rows: usize, cols: &[QVec]) -> Result<Self> {
        Ok(Self::from_rows(rows, cols)?.transpose())
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

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> QVec {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<QVec> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn col_vecs(&self) -> Vec<QVec> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rat]) -> QVec {
        assert_eq!(x.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `x^T M` as a vector of length `cols`.
    pub fn vec_mul(&self, x: &[Rat]) -> QVec {
        assert_eq!(x.len(), self.rows, "vector-matrix shape mismatch");
        let mut out = zeros(self.cols);
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o += xi * m;
            }
        }
        out
    }

    pub fn matmul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, exp: usize) -> QMat {
        assert!(self.is_square());
        let mut result = QMat::identity(self.rows);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        result
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == QMat::identity(self.rows)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &QMat) -> QMat {
        assert_eq!(self.rows, other.rows);
        let mut out = QMat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> QMat {
        QMat {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (QMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // Smallest-height pivot keeps intermediate numbers short.
            let Some(p) = (r..m.rows)
                .filter(|&i| !m[(i, c)].is_zero())
                .min_by_key(|&i| height(&m[(i, c)]))
            else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].clone();
                for j in c..m.cols {
                    if m[(r, j)].is_zero() {
                        continue;
                    }
                    let delta = &factor * &m[(r, j)];
                    m[(i, j)] -= delta;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn inverse(&self) -> Option<QMat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let (r, pivots) = self.hstack(&QMat::identity(n)).rref();
        if pivots.len() < n || (n > 0 && pivots[n - 1] != n - 1) {
            return None;
        }
        let mut inv = QMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }
}

impl Mul for &QMat {
    type Output = QMat;

    fn mul(self, rhs: &QMat) -> QMat {
        self.matmul(rhs)
    }
}

fn height(x: &Rat) -> u64 {
    x.numer().bits() + x.denom().bits()
}

pub fn rank(m: &QMat) -> usize {
    m.rref().1.len()
}

/// Basis of `{x : m x = 0}`, one vector per free column.
pub fn kernel_basis(m: &QMat) -> Vec<QVec> {
    let (r, pivots) = m.rref();
    let mut is_pivot = vec![false; m.cols()];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..m.cols())
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = zeros(m.cols());
            v[free] = Rat::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r[(row, free)].clone();
            }
            v
        })
        .collect()
}

/// One exact solution of `m x = b`, or `None` when the system is inconsistent.
/// Free variables are set to zero.
pub fn solve(m: &QMat, b: &[Rat]) -> Result<Option<QVec>> {
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: b.len() });
    }
    let aug = m.hstack(&QMat::from_cols(m.rows(), &[b.to_vec()])?);
    let (r, pivots) = aug.rref();
    if pivots.last() == Some(&m.cols()) {
        return Ok(None);
    }
    let mut x = zeros(m.cols());
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = r[(row, m.cols())].clone();
    }
    Ok(Some(x))
}

/// Greedily keeps the vectors that are independent of the ones before them.
pub fn independent_subset(vectors: &[QVec], dim: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut basis: Vec<QVec> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        basis.push(v.clone());
        let m = QMat::from_rows(dim, &basis).expect("uniform dimension");
        if rank(&m) == basis.len() {
            kept.push(i);
        } else {
            basis.pop();
        }
    }
    kept
}

/// Extends independent `vectors` to a basis of `Q^dim` with the
/// lexicographically first standard basis vectors; returns the chosen indices.
pub fn complete_with_standard(vectors: &[QVec], dim: usize) -> Vec<usize> {
    let mut current: Vec<QVec> = vectors.to_vec();
    let mut chosen = Vec::new();
    for i in 0..dim {
        if current.len() == dim {
            break;
        }
        current.push(unit(dim, i));
        let m = QMat::from_rows(dim, &current).expect("uniform dimension");
        if rank(&m) == current.len() {
            chosen.push(i);
        } else {
            current.pop();
        }
    }
    chosen
}
