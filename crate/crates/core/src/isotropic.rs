//! Dilation matrices, isotropy, the form `W(ξ) = ξᵀQ²ξ`, coset
//! representatives and the factorization of lattice points.

use std::collections::BTreeMap;

use log::warn;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, ParseError, Result};
use crate::multiindex::MultiIndex;
use crate::polyops::MultiPoly;
use crate::ratcore::{
    denominator_lcm, format_rational, int, kernel_basis, numerator_gcd, rational_to_f64, real,
    span_contains, GaussianRational, RatMatrix, Rational,
};

const EIG_TOL: f64 = 1e-9;

/// Square integer matrix with `|det| ≥ 2` and every eigenvalue outside the
/// unit disk.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DilationMatrix {
    entries: Vec<Vec<i64>>,
    q: u64,
}

impl DilationMatrix {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let d = entries.len();
        if d == 0 || entries.iter().any(|r| r.len() != d) {
            return Err(Error::NotDilation("matrix must be square and nonempty".into()));
        }
        let det = rat_matrix(&entries).determinant().re;
        let q = det.abs().to_integer().to_u64().unwrap_or(0);
        if q == 0 {
            return Err(Error::NotDilation("singular matrix".into()));
        }
        let m = Self { entries, q };
        let moduli = m.eigen_moduli();
        if moduli.iter().any(|&r| r <= 1.0 + EIG_TOL) {
            return Err(Error::NotDilation(format!(
                "eigenvalue moduli {moduli:?} not all greater than 1"
            )));
        }
        Ok(m)
    }

    /// Rows separated by `;`, entries by `,`: `"1,1;1,-1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let rows: std::result::Result<Vec<Vec<i64>>, _> = s
            .split(';')
            .map(|r| r.split(',').map(|x| x.trim().parse::<i64>()).collect())
            .collect();
        let rows = rows.map_err(|e| ParseError::Matrix(format!("{s:?}: {e}")))?;
        Self::new(rows)
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }

    /// `|det A|`.
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let d = self.d();
        Self {
            entries: (0..d)
                .map(|i| (0..d).map(|j| self.entries[j][i]).collect())
                .collect(),
            q: self.q,
        }
    }

    pub fn to_rat(&self) -> RatMatrix {
        rat_matrix(&self.entries)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(d, d, |i, j| self.entries[i][j] as f64)
    }

    /// `A⁻ᵀ`, exactly.
    pub fn inverse_transpose(&self) -> RatMatrix {
        self.to_rat().inverse().expect("dilation matrices are invertible").transpose()
    }

    pub fn eigen_moduli(&self) -> Vec<f64> {
        self.to_f64()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect()
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        self.entries
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn rat_matrix(entries: &[Vec<i64>]) -> RatMatrix {
    let rows: Vec<&[i64]> = entries.iter().map(Vec::as_slice).collect();
    RatMatrix::from_i64(&rows)
}

/// Outcome of the isotropy test with its diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct IsotropyReport {
    pub isotropic: bool,
    pub eigen_moduli: Vec<f64>,
    pub diagonalizable: bool,
    pub equal_moduli: bool,
}

/// Coefficients of a univariate polynomial over ℚ, constant term first.
type UPoly = Vec<Rational>;

fn upoly_trim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn upoly_rem(a: &UPoly, b: &UPoly) -> UPoly {
    let mut r = a.clone();
    let lead = b.last().expect("nonzero divisor").clone();
    while r.len() >= b.len() {
        let f = r.last().unwrap() / &lead;
        let shift = r.len() - b.len();
        for (i, c) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &(&f * c);
        }
        r.pop();
        r = upoly_trim(r);
    }
    r
}

fn upoly_div(a: &UPoly, b: &UPoly) -> UPoly {
    let mut r = a.clone();
    let lead = b.last().expect("nonzero divisor").clone();
    let mut quot = vec![Rational::zero(); a.len().saturating_sub(b.len()) + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let f = r.last().unwrap() / &lead;
        let shift = r.len() - b.len();
        for (i, c) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &(&f * c);
        }
        quot[shift] = f;
        r.pop();
    }
    upoly_trim(quot)
}

fn upoly_gcd(a: &UPoly, b: &UPoly) -> UPoly {
    let (mut a, mut b) = (upoly_trim(a.clone()), upoly_trim(b.clone()));
    while !b.is_empty() {
        let r = upoly_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Characteristic polynomial by Faddeev-LeVerrier.
fn char_poly(a: &RatMatrix) -> UPoly {
    let n = a.nrows();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut m = RatMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a * &m;
        for i in 0..n {
            next[(i, i)] = &next[(i, i)] + &real(coeffs[n - k + 1].clone());
        }
        m = next;
        let am = a * &m;
        let trace: Rational = (0..n).map(|i| am[(i, i)].re.clone()).sum();
        coeffs[n - k] = -trace / int(k as i64);
    }
    coeffs
}

fn eval_matrix_poly(p: &UPoly, a: &RatMatrix) -> RatMatrix {
    let n = a.nrows();
    let mut acc = RatMatrix::zeros(n, n);
    for c in p.iter().rev() {
        acc = &acc * a;
        for i in 0..n {
            acc[(i, i)] = &acc[(i, i)] + &real(c.clone());
        }
    }
    acc
}

/// Diagonalizable over ℂ iff the squarefree part of the characteristic
/// polynomial annihilates `A`.
fn diagonalizable(a: &RatMatrix) -> bool {
    let p = char_poly(a);
    let dp: UPoly = upoly_trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * int(k as i64))
            .collect(),
    );
    let g = upoly_gcd(&p, &dp);
    let sf = upoly_div(&p, &g);
    eval_matrix_poly(&sf, a).is_zero()
}

pub fn is_isotropic(a: &DilationMatrix) -> IsotropyReport {
    let eigen_moduli = a.eigen_moduli();
    let max = eigen_moduli.iter().cloned().fold(0.0, f64::max);
    let min = eigen_moduli.iter().cloned().fold(f64::INFINITY, f64::min);
    let equal_moduli = (max - min) <= EIG_TOL * max;
    let diagonalizable = diagonalizable(&a.to_rat());
    IsotropyReport {
        isotropic: equal_moduli && diagonalizable,
        eigen_moduli,
        diagonalizable,
        equal_moduli,
    }
}

/// `A = Q U Q⁻¹` data for an isotropic `A`.
#[derive(Clone, Debug)]
pub struct IsotropicDecomposition {
    pub q: u64,
    pub d: usize,
    /// Exact, normalized to integer `W` coefficients with content 1.
    pub q2: RatMatrix,
    pub u: DMatrix<f64>,
    /// `q^{1/d}`.
    pub eigen_modulus: f64,
    /// `q^{2/d}` when it is rational.
    pub lambda: Option<Rational>,
    /// Dimension of the solution space of `A X Aᵀ = q^{2/d} X`.
    pub solution_dim: usize,
}

impl IsotropicDecomposition {
    pub fn q_sqrt(&self) -> DMatrix<f64> {
        let q2 = rat_to_f64(&self.q2);
        let eig = q2.symmetric_eigen();
        let sqrt = eig.eigenvalues.map(f64::sqrt);
        &eig.eigenvectors * DMatrix::from_diagonal(&sqrt) * eig.eigenvectors.transpose()
    }
}

pub fn rat_to_f64(m: &RatMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| rational_to_f64(&m[(i, j)].re))
}

fn integer_root(n: &BigInt, d: u32) -> Option<BigInt> {
    let r = n.nth_root(d);
    (r.pow(d) == *n).then_some(r)
}

/// Index pairs `(i, j)`, `i ≤ j`, of the symmetric unknowns.
fn sym_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect()
}

fn sym_from_vec(d: usize, v: &[GaussianRational]) -> RatMatrix {
    let mut x = RatMatrix::zeros(d, d);
    for (&(i, j), c) in sym_pairs(d).iter().zip(v) {
        x[(i, j)] = c.clone();
        x[(j, i)] = c.clone();
    }
    x
}

/// Sylvester's criterion, exactly.
pub fn is_positive_definite(x: &RatMatrix) -> bool {
    (1..=x.nrows()).all(|k| x.submatrix(0..k, 0..k).determinant().re.is_positive())
}

/// Scales a symmetric matrix so that `ξᵀXξ` has integer coefficients with
/// content 1.
fn normalize_form(x: &RatMatrix) -> RatMatrix {
    let d = x.nrows();
    let coeffs: Vec<Rational> = sym_pairs(d)
        .iter()
        .map(|&(i, j)| {
            let c = x[(i, j)].re.clone();
            if i == j {
                c
            } else {
                c * int(2)
            }
        })
        .collect();
    let l = Rational::from_integer(denominator_lcm(&coeffs));
    let scaled: Vec<Rational> = coeffs.iter().map(|c| c * &l).collect();
    let g = Rational::from_integer(numerator_gcd(&scaled));
    x.scale(&real(l / g))
}

pub fn decompose(a: &DilationMatrix) -> Result<IsotropicDecomposition> {
    let report = is_isotropic(a);
    if !report.isotropic {
        return Err(Error::NotIsotropic(format!(
            "eigenvalue moduli {:?}, diagonalizable: {}",
            report.eigen_moduli, report.diagonalizable
        )));
    }
    let d = a.d();
    let q = a.q();
    let q_sq = BigInt::from(q) * BigInt::from(q);
    let lambda = integer_root(&q_sq, d as u32).map(Rational::from_integer);
    let (q2, solution_dim) = match &lambda {
        Some(lam) => exact_form(a, lam)?,
        None => numeric_form(a)?,
    };
    let eigen_modulus = (q as f64).powf(1.0 / d as f64);
    let qh = {
        let tmp = IsotropicDecomposition {
            q,
            d,
            q2: q2.clone(),
            u: DMatrix::identity(d, d),
            eigen_modulus,
            lambda: lambda.clone(),
            solution_dim,
        };
        tmp.q_sqrt()
    };
    let a_inv_t = rat_to_f64(&a.inverse_transpose());
    let qh_inv = qh.clone().try_inverse().expect("Q is positive definite");
    let u = (&qh * a_inv_t * qh_inv) * eigen_modulus;
    Ok(IsotropicDecomposition {
        q,
        d,
        q2,
        u,
        eigen_modulus,
        lambda,
        solution_dim,
    })
}

/// Solves `A X Aᵀ = λ X` over symmetric `X` exactly.
fn exact_form(a: &DilationMatrix, lambda: &Rational) -> Result<(RatMatrix, usize)> {
    let d = a.d();
    let pairs = sym_pairs(d);
    let am = a.to_rat();
    // one column per symmetric unknown, one row per matrix entry
    let mut sys = RatMatrix::zeros(d * d, pairs.len());
    for (col, &(i, j)) in pairs.iter().enumerate() {
        let mut e = RatMatrix::zeros(d, d);
        e[(i, j)] = GaussianRational::one();
        e[(j, i)] = GaussianRational::one();
        let img = &(&am * &e) * &am.transpose();
        for r in 0..d {
            for c in 0..d {
                sys[(r * d + c, col)] = &img[(r, c)] - &(&e[(r, c)] * &real(lambda.clone()));
            }
        }
    }
    let sols = kernel_basis(&sys);
    match sols.len() {
        0 => Err(Error::NoPositiveDefiniteSolution),
        1 => {
            let x = sym_from_vec(d, &sols[0]);
            if is_positive_definite(&x) {
                Ok((normalize_form(&x), 1))
            } else if is_positive_definite(&x.scale(&-GaussianRational::one())) {
                Ok((normalize_form(&x.scale(&-GaussianRational::one())), 1))
            } else {
                Err(Error::NoPositiveDefiniteSolution)
            }
        }
        k => {
            let id = RatMatrix::identity(d);
            let id_vec: Vec<GaussianRational> =
                pairs.iter().map(|&(i, j)| id[(i, j)].clone()).collect();
            if span_contains(&sols, &id_vec) {
                warn!("A X A^T = q^(2/d) X has a {k}-dimensional solution space; using X = I");
                Ok((id, k))
            } else {
                Err(Error::AmbiguousSolution(k))
            }
        }
    }
}

/// Float solve of `A X Aᵀ = q^{2/d} X` followed by rationalization.
fn numeric_form(a: &DilationMatrix) -> Result<(RatMatrix, usize)> {
    let d = a.d();
    let pairs = sym_pairs(d);
    let af = a.to_f64();
    let lambda = (a.q() as f64).powf(2.0 / d as f64);
    let mut sys = DMatrix::<f64>::zeros(d * d, pairs.len());
    for (col, &(i, j)) in pairs.iter().enumerate() {
        let mut e = DMatrix::<f64>::zeros(d, d);
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        let img = &af * &e * af.transpose() - e * lambda;
        for r in 0..d {
            for c in 0..d {
                sys[(r * d + c, col)] = img[(r, c)];
            }
        }
    }
    let svd = sys.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= 1e-9 * smax.max(1.0))
        .collect();
    if null.len() != 1 || v_t.nrows() < pairs.len() {
        return Err(if null.is_empty() {
            Error::NoPositiveDefiniteSolution
        } else {
            Error::AmbiguousSolution(null.len())
        });
    }
    let v = v_t.row(null[0]);
    let pivot = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let mut entries = Vec::new();
    for x in v.iter() {
        let r = rationalize(x / pivot, 1000)
            .ok_or_else(|| Error::RationalizationFailed(format!("entry {}", x / pivot)))?;
        entries.push(real(r));
    }
    let x = sym_from_vec(d, &entries);
    let x = if is_positive_definite(&x) {
        x
    } else {
        x.scale(&-GaussianRational::one())
    };
    if !is_positive_definite(&x) {
        return Err(Error::NoPositiveDefiniteSolution);
    }
    Ok((normalize_form(&x), 1))
}

/// Best rational with denominator at most `max_den` within `1e-9`.
fn rationalize(x: f64, max_den: i64) -> Option<Rational> {
    (1..=max_den).find_map(|den| {
        let num = (x * den as f64).round();
        ((num / den as f64 - x).abs() < 1e-9).then(|| crate::ratcore::rat(num as i64, den))
    })
}

/// `W(ξ) = ξᵀ Q² ξ`.
pub fn quadratic_form(dec: &IsotropicDecomposition) -> MultiPoly {
    form_from_matrix(&dec.q2)
}

pub fn form_from_matrix(q2: &RatMatrix) -> MultiPoly {
    let d = q2.nrows();
    let mut w = MultiPoly::zero(d);
    for i in 0..d {
        for j in 0..d {
            let mut e = vec![0u32; d];
            e[i] += 1;
            e[j] += 1;
            w = w.add(&MultiPoly::monomial(MultiIndex::new(e), q2[(i, j)].clone()));
        }
    }
    w
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    /// `W(A⁻ᵀξ) = q^{-2/d} W(ξ)` as a polynomial identity.
    pub polynomial_identity: Option<bool>,
    /// `A Q² Aᵀ = q^{2/d} Q²` exactly.
    pub matrix_identity: Option<bool>,
    /// `‖A⁻ᵀ − q^{-1/d} Q⁻¹ U Q‖∞`.
    pub reconstruction_error: f64,
    /// `‖UᵀU − I‖∞`.
    pub orthogonality_error: f64,
    /// Numeric residual of `A Q² Aᵀ − q^{2/d} Q²`.
    pub numeric_residual: f64,
}

pub fn invariance_check(a: &DilationMatrix, dec: &IsotropicDecomposition) -> InvarianceReport {
    let w = quadratic_form(dec);
    let (polynomial_identity, matrix_identity) = match &dec.lambda {
        Some(lam) => {
            let lhs = w.compose_linear(&a.inverse_transpose());
            let rhs = w.scale(&real(lam.recip()));
            let am = a.to_rat();
            let m = &(&am * &dec.q2) * &am.transpose();
            (Some(lhs == rhs), Some(m == dec.q2.scale(&real(lam.clone()))))
        }
        None => (None, None),
    };
    let d = dec.d;
    let qh = dec.q_sqrt();
    let qh_inv = qh.clone().try_inverse().expect("Q is positive definite");
    let a_inv_t = rat_to_f64(&a.inverse_transpose());
    let recon = &a_inv_t - (qh_inv * &dec.u * &qh) / dec.eigen_modulus;
    let orth = dec.u.transpose() * &dec.u - DMatrix::<f64>::identity(d, d);
    let af = a.to_f64();
    let q2f = rat_to_f64(&dec.q2);
    let lam = dec.eigen_modulus * dec.eigen_modulus;
    let resid = &af * &q2f * af.transpose() - q2f * lam;
    InvarianceReport {
        polynomial_identity,
        matrix_identity,
        reconstruction_error: recon.amax(),
        orthogonality_error: orth.amax(),
        numeric_residual: resid.amax(),
    }
}

/// `𝒮(A) = A⁻¹(ℤᵈ ∩ A[0,1)ᵈ)`, zero first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetReps {
    pub reps: Vec<Vec<Rational>>,
}

impl CosetReps {
    pub fn nonzero(&self) -> impl Iterator<Item = &Vec<Rational>> {
        self.reps.iter().filter(|s| s.iter().any(|x| !x.is_zero()))
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.reps
            .iter()
            .map(|s| s.iter().map(format_rational).collect())
            .collect()
    }
}

pub fn coset_reps(a: &DilationMatrix) -> CosetReps {
    coset_reps_of(a.entries()).expect("dilation matrices are nonsingular")
}

/// `𝒮(A)` for any nonsingular integer matrix.
pub fn coset_reps_of(entries: &[Vec<i64>]) -> Result<CosetReps> {
    let d = entries.len();
    let inv = rat_matrix(entries)
        .inverse()
        .ok_or_else(|| Error::InvalidInput("singular matrix has no coset representatives".into()))?;
    // bounding box of A[0,1]^d
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    for (i, row) in entries.iter().enumerate() {
        lo[i] = row.iter().filter(|&&x| x < 0).sum();
        hi[i] = row.iter().filter(|&&x| x > 0).sum();
    }
    let mut reps = Vec::new();
    let mut m = lo.clone();
    loop {
        let mg: Vec<GaussianRational> = m.iter().map(|&x| real(int(x))).collect();
        let s: Vec<Rational> = inv.mul_vec(&mg).into_iter().map(|z| z.re).collect();
        if s.iter().all(|x| !x.is_negative() && x < &Rational::one()) {
            reps.push(s);
        }
        // odometer over the box
        let mut k = 0;
        loop {
            if k == d {
                reps.sort();
                return Ok(CosetReps { reps });
            }
            if m[k] < hi[k] {
                m[k] += 1;
                break;
            }
            m[k] = lo[k];
            k += 1;
        }
    }
}

/// `n = Aʲ(s + k)` with `j ≥ 1`, `s ∈ 𝒮(A)∖{0}`, `k ∈ ℤᵈ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub j: usize,
    pub s: Vec<Rational>,
    pub k: Vec<i64>,
}

pub const FACTOR_BOUND: usize = 256;

pub fn factorize(a: &DilationMatrix, n: &[i64]) -> Result<Factorization> {
    let inv = a.to_rat().inverse().expect("invertible");
    let mut x: Vec<Rational> = n.iter().map(|&v| int(v)).collect();
    if x.iter().all(Zero::is_zero) {
        return Err(Error::FactorizationGap {
            point: n.to_vec(),
            bound: 0,
        });
    }
    for j in 1..=FACTOR_BOUND {
        let xg: Vec<GaussianRational> = x.iter().cloned().map(real).collect();
        let y: Vec<Rational> = inv.mul_vec(&xg).into_iter().map(|z| z.re).collect();
        if y.iter().any(|v| !v.is_integer()) {
            let k: Vec<Rational> = y.iter().map(|v| v.floor()).collect();
            let s: Vec<Rational> = y.iter().zip(&k).map(|(v, f)| v - f).collect();
            let k = k
                .iter()
                .map(|v| v.to_integer().to_i64().expect("small lattice point"))
                .collect();
            return Ok(Factorization { j, s, k });
        }
        x = y;
    }
    Err(Error::FactorizationGap {
        point: n.to_vec(),
        bound: FACTOR_BOUND,
    })
}

#[derive(Clone, Debug)]
pub struct PartitionReport {
    pub radius: i64,
    pub checked: usize,
    pub factorizations: BTreeMap<Vec<i64>, Factorization>,
}

/// All `n ∈ ℤᵈ∖{0}` with `‖n‖∞ ≤ N`.
pub fn window_points(d: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut m = vec![-radius; d];
    loop {
        if m.iter().any(|&x| x != 0) {
            out.push(m.clone());
        }
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            if m[k] < radius {
                m[k] += 1;
                break;
            }
            m[k] = -radius;
            k += 1;
        }
    }
}

/// Checks that each `n` in the window lies in exactly one `Aʲ(ℤᵈ + s)`.
pub fn partition_check(a: &DilationMatrix, radius: i64) -> Result<PartitionReport> {
    let reps = coset_reps(a);
    let nonzero: Vec<&Vec<Rational>> = reps.nonzero().collect();
    let inv = a.to_rat().inverse().expect("invertible");
    let mut factorizations = BTreeMap::new();
    for n in window_points(a.d(), radius) {
        let f = factorize(a, &n)?;
        // count every (j', s') with A^{-j'} n − s' ∈ ℤᵈ, scanning past j
        let mut hits = 0;
        let mut x: Vec<GaussianRational> = n.iter().map(|&v| real(int(v))).collect();
        for _ in 1..=f.j + 2 {
            x = inv.mul_vec(&x);
            for s in &nonzero {
                if x.iter().zip(s.iter()).all(|(v, t)| (&v.re - t).is_integer()) {
                    hits += 1;
                }
            }
        }
        if hits != 1 || !nonzero.contains(&&f.s) {
            return Err(Error::FactorizationGap {
                point: n,
                bound: f.j + 2,
            });
        }
        factorizations.insert(n, f);
    }
    Ok(PartitionReport {
        radius,
        checked: factorizations.len(),
        factorizations,
    })
}
