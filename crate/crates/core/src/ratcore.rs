//! Exact scalar and matrix arithmetic over ℚ and ℚ(i).
//!
//! Every structured matrix in the crate is a dense [`RatMatrix`] of Gaussian
//! rationals. Elimination runs over ℚ whenever all entries are real, which is
//! the common case, and falls back to ℚ(i) otherwise.

use std::fmt;
use std::ops::{Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ParseError;

pub type Rational = BigRational;
pub type GaussianRational = Complex<BigRational>;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Real Gaussian rational.
pub fn real(r: Rational) -> GaussianRational {
    Complex::new(r, Rational::zero())
}

pub fn gint(re: i64, im: i64) -> GaussianRational {
    Complex::new(int(re), int(im))
}

pub fn is_real(z: &GaussianRational) -> bool {
    z.im.is_zero()
}

/// `(-i)^k`.
pub fn neg_i_pow(k: usize) -> GaussianRational {
    match k % 4 {
        0 => gint(1, 0),
        1 => gint(0, -1),
        2 => gint(-1, 0),
        _ => gint(0, 1),
    }
}

/// `i^k` for possibly negative `k`.
pub fn i_pow(k: i64) -> GaussianRational {
    match k.rem_euclid(4) {
        0 => gint(1, 0),
        1 => gint(0, 1),
        2 => gint(-1, 0),
        _ => gint(0, -1),
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // fall back through a scaled quotient for huge operands
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn to_c64(z: &GaussianRational) -> Complex<f64> {
    Complex::new(rational_to_f64(&z.re), rational_to_f64(&z.im))
}

/// `p/q`, with `/q` omitted when `q = 1`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let s = s.trim();
    let bad = || ParseError::Rational(s.to_string());
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Least common multiple of the denominators of a slice of rationals.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Gcd of the numerators (after the values have been made integral).
pub fn numerator_gcd<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::zero(), |acc, r| acc.gcd(r.numer()))
}

/// Field operations needed by Gauss-Jordan elimination.
trait Field: Clone + PartialEq + Zero + One + Neg<Output = Self>
where
    for<'a> &'a Self: Sub<&'a Self, Output = Self> + Mul<&'a Self, Output = Self>,
{
    fn inv(&self) -> Self;
}

impl Field for Rational {
    fn inv(&self) -> Self {
        self.recip()
    }
}

impl Field for GaussianRational {
    fn inv(&self) -> Self {
        GaussianRational::one() / self.clone()
    }
}

/// In-place reduced row echelon form; returns the pivot columns.
fn rref_rows<F: Field>(rows: &mut Vec<Vec<F>>, cols: usize) -> Vec<usize>
where
    for<'a> &'a F: Sub<&'a F, Output = F> + Mul<&'a F, Output = F>,
{
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv();
        for x in rows[r][c..].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for k in c..cols {
                if !pivot_row[k].is_zero() {
                    row[k] = &row[k] - &(&f * &pivot_row[k]);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Dense matrix of Gaussian rationals with fixed shape.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussianRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![GaussianRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = GaussianRational::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vec<GaussianRational>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix rows");
            data.extend(row);
        }
        RatMatrix {
            rows: n,
            cols,
            data,
        }
    }

    pub fn from_real_rows(rows: &[Vec<Rational>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().cloned().map(real).collect())
                .collect(),
        )
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| gint(x, 0)).collect())
                .collect(),
        )
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[GaussianRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[GaussianRational]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<GaussianRational>> {
        self.rows().map(<[_]>::to_vec).collect()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(is_real)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
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

    pub fn mul_vec(&self, v: &[GaussianRational]) -> Vec<GaussianRational> {
        assert_eq!(v.len(), self.cols);
        self.rows()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(GaussianRational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &RatMatrix) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        RatMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (i, r) in rows.clone().enumerate() {
            for (j, c) in cols.clone().enumerate() {
                out[(i, j)] = self[(r, c)].clone();
            }
        }
        out
    }

    /// Exact inverse, or `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = GaussianRational::one();
        }
        let (r, pivots) = rref(&aug);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.submatrix(0..n, n..2 * n))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact determinant by elimination.
    pub fn determinant(&self) -> GaussianRational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.to_rows();
        let mut det = GaussianRational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
                return GaussianRational::zero();
            };
            if p != c {
                m.swap(p, c);
                det = -det;
            }
            det = &det * &m[c][c];
            let inv = GaussianRational::one() / m[c][c].clone();
            for i in c + 1..n {
                if m[i][c].is_zero() {
                    continue;
                }
                let f = &m[i][c] * &inv;
                for k in c..n {
                    let t = &f * &m[c][k];
                    m[i][k] = &m[i][k] - &t;
                }
            }
        }
        det
    }

    /// Real parts, if every entry is real.
    pub fn real_entries(&self) -> Option<Vec<Vec<Rational>>> {
        self.is_real().then(|| {
            self.rows()
                .map(|r| r.iter().map(|z| z.re.clone()).collect())
                .collect()
        })
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = GaussianRational;
    fn index(&self, (i, j): (usize, usize)) -> &Self::Output {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Self::Output {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul<&RatMatrix> for &RatMatrix {
    type Output = RatMatrix;
    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in matrix product");
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = &out[(i, j)] + &(a * b);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(format_gaussian).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

pub fn format_gaussian(z: &GaussianRational) -> String {
    match (z.re.is_zero(), z.im.is_zero()) {
        (_, true) => format_rational(&z.re),
        (true, false) => format!("{}i", format_rational(&z.im)),
        (false, false) => {
            let sign = if z.im.is_negative() { "-" } else { "+" };
            format!(
                "{}{}{}i",
                format_rational(&z.re),
                sign,
                format_rational(&z.im.abs())
            )
        }
    }
}

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let cols = m.cols;
    if let Some(real_rows) = m.real_entries() {
        let mut rows = real_rows;
        let pivots = rref_rows(&mut rows, cols);
        let r = RatMatrix::from_rows(
            cols,
            rows.into_iter()
                .map(|row| row.into_iter().map(real).collect())
                .collect(),
        );
        (r, pivots)
    } else {
        let mut rows = m.to_rows();
        let pivots = rref_rows(&mut rows, cols);
        (RatMatrix::from_rows(cols, rows), pivots)
    }
}

pub fn rank(m: &RatMatrix) -> usize {
    rref(m).1.len()
}

/// Canonical basis of `{v : Mv = 0}`: one vector per free column, in
/// ascending column order, with a 1 in the free slot and the negated RREF
/// column in the pivot slots.
pub fn kernel_basis(m: &RatMatrix) -> Vec<Vec<GaussianRational>> {
    let (r, pivots) = rref(m);
    let free = (0..m.cols).filter(|c| !pivots.contains(c));
    free.map(|f| {
        let mut v = vec![GaussianRational::zero(); m.cols];
        v[f] = GaussianRational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r[(i, f)].clone();
        }
        v
    })
    .collect()
}

fn basis_matrix(basis: &[Vec<GaussianRational>], len: usize) -> RatMatrix {
    RatMatrix::from_rows(len, basis.to_vec())
}

/// Canonical (RREF) basis of the span of `basis`; vectors have length `len`.
pub fn canonical_span(basis: &[Vec<GaussianRational>], len: usize) -> Vec<Vec<GaussianRational>> {
    if basis.is_empty() {
        return Vec::new();
    }
    let (r, pivots) = rref(&basis_matrix(basis, len));
    (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
}

pub fn span_dim(basis: &[Vec<GaussianRational>], len: usize) -> usize {
    if basis.is_empty() {
        0
    } else {
        rank(&basis_matrix(basis, len))
    }
}

pub fn span_contains(basis: &[Vec<GaussianRational>], v: &[GaussianRational]) -> bool {
    let len = v.len();
    let base = span_dim(basis, len);
    let mut ext = basis.to_vec();
    ext.push(v.to_vec());
    span_dim(&ext, len) == base
}

/// `span(b1) == span(b2)`; all vectors must share one length.
pub fn subspace_equal(b1: &[Vec<GaussianRational>], b2: &[Vec<GaussianRational>]) -> bool {
    let Some(len) = b1.first().or(b2.first()).map(Vec::len) else {
        return true;
    };
    let r1 = span_dim(b1, len);
    let r2 = span_dim(b2, len);
    if r1 != r2 {
        return false;
    }
    let union: Vec<_> = b1.iter().chain(b2).cloned().collect();
    span_dim(&union, len) == r1
}

/// Canonical basis of `span(b1) ∩ span(b2)`.
pub fn subspace_intersect(
    b1: &[Vec<GaussianRational>],
    b2: &[Vec<GaussianRational>],
) -> Vec<Vec<GaussianRational>> {
    if b1.is_empty() || b2.is_empty() {
        return Vec::new();
    }
    let len = b1[0].len();
    let b1 = canonical_span(b1, len);
    let b2 = canonical_span(b2, len);
    // columns: b1 vectors then -b2 vectors
    let k1 = b1.len();
    let mut m = RatMatrix::zeros(len, k1 + b2.len());
    for (j, v) in b1.iter().enumerate() {
        for i in 0..len {
            m[(i, j)] = v[i].clone();
        }
    }
    for (j, v) in b2.iter().enumerate() {
        for i in 0..len {
            m[(i, k1 + j)] = -v[i].clone();
        }
    }
    let combos = kernel_basis(&m);
    let vectors: Vec<Vec<GaussianRational>> = combos
        .iter()
        .map(|c| {
            let mut v = vec![GaussianRational::zero(); len];
            for (coef, b) in c[..k1].iter().zip(&b1) {
                if coef.is_zero() {
                    continue;
                }
                for i in 0..len {
                    v[i] = &v[i] + &(coef * &b[i]);
                }
            }
            v
        })
        .collect();
    canonical_span(&vectors, len)
}

/// Basis of the sum `span(b1) + span(b2)`.
pub fn subspace_sum(
    b1: &[Vec<GaussianRational>],
    b2: &[Vec<GaussianRational>],
    len: usize,
) -> Vec<Vec<GaussianRational>> {
    let all: Vec<_> = b1.iter().chain(b2).cloned().collect();
    canonical_span(&all, len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_i64(rows)
    }

    fn v(xs: &[i64]) -> Vec<GaussianRational> {
        xs.iter().map(|&x| gint(x, 0)).collect()
    }

    #[test]
    fn rref_identity() {
        let (m, p) = rref(&RatMatrix::identity(2));
        assert_eq!(m, RatMatrix::identity(2));
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn rref_single_row_scaling() {
        let (m, p) = rref(&r(&[&[2, 0, 2]]));
        assert_eq!(m, r(&[&[1, 0, 1]]));
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn kernel_of_laplacian_block() {
        // the (negated) degree-2 block of the Laplacian symbol
        let k = kernel_basis(&r(&[&[2, 0, 2]]));
        assert_eq!(k.len(), 2);
        assert!(subspace_equal(&k, &[v(&[1, 0, -1]), v(&[0, 1, 0])]));
        for vec in &k {
            assert!(r(&[&[2, 0, 2]]).mul_vec(vec).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        assert!(kernel_basis(&RatMatrix::identity(4)).is_empty());
    }

    #[test]
    fn subspace_equality_examples() {
        assert!(subspace_equal(&[v(&[1, 0])], &[v(&[2, 0])]));
        assert!(subspace_equal(
            &[v(&[1, 0]), v(&[0, 1])],
            &[v(&[1, 1]), v(&[1, -1])]
        ));
        assert!(!subspace_equal(&[v(&[1, 0])], &[v(&[0, 1])]));
    }

    #[test]
    fn intersections() {
        let b = vec![v(&[1, 2, 3]), v(&[0, 1, 1])];
        assert!(subspace_equal(&subspace_intersect(&b, &b), &b));
        assert!(subspace_intersect(&[v(&[1, 0])], &[v(&[0, 1])]).is_empty());
        let i = subspace_intersect(&[v(&[1, 0, 0]), v(&[0, 1, 0])], &[v(&[1, 1, 1]), v(&[0, 0, 1])]);
        assert!(subspace_equal(&i, &[v(&[1, 1, 0])]));
    }

    #[test]
    fn gaussian_elimination_over_qi() {
        let m = RatMatrix::from_rows(2, vec![vec![gint(0, 1), gint(1, 0)]]);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(Zero::is_zero));
        assert!(!k[0].iter().all(is_real));
    }

    #[test]
    fn inverse_roundtrip() {
        let a = r(&[&[1, -2], &[1, 0]]);
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, RatMatrix::identity(2));
        assert!(r(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&rat(1, 12)), "1/12");
        assert_eq!(format_rational(&rat(-4, 2)), "-2");
        assert_eq!(parse_rational(" -3/9 ").unwrap(), rat(-1, 3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
