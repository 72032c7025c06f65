//! Exact multivariate polynomials, symbols of differential operators, and the
//! structured matrices `ĉ𝐏_L(y)` and `ĉ𝐃_L S(0)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Signed, Zero};

use crate::error::ParseError;
use crate::multiindex::{dim_g, layer, mbinom, GradedBasis, MultiIndex};
use crate::ratcore::{
    canonical_span, denominator_lcm, format_rational, int, kernel_basis, neg_i_pow,
    numerator_gcd, parse_rational, real, span_contains, span_dim, subspace_equal,
    GaussianRational, RatMatrix, Rational,
};

/// Polynomial in `d` variables with Gaussian-rational coefficients.
///
/// The same type holds polynomials in `x` and symbols in `ξ`; which one is
/// meant follows from context.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    d: usize,
    terms: BTreeMap<MultiIndex, GaussianRational>,
}

impl MultiPoly {
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1);
        MultiPoly {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: GaussianRational) -> Self {
        Self::monomial(MultiIndex::zero(d), c)
    }

    pub fn one(d: usize) -> Self {
        Self::constant(d, GaussianRational::one())
    }

    pub fn monomial(alpha: MultiIndex, c: GaussianRational) -> Self {
        let mut p = Self::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    /// The coordinate `x_i` (or `ξ_i`).
    pub fn var(d: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(d, i), GaussianRational::one())
    }

    pub fn from_terms(
        d: usize,
        terms: impl IntoIterator<Item = (MultiIndex, GaussianRational)>,
    ) -> Self {
        let mut p = Self::zero(d);
        for (a, c) in terms {
            assert_eq!(a.dim(), d);
            p.add_term(a, c);
        }
        p
    }

    /// Shorthand for real integer coefficients: `[(exponent, coef)]`.
    pub fn from_int_terms(d: usize, terms: &[(&[u32], i64)]) -> Self {
        Self::from_terms(
            d,
            terms
                .iter()
                .map(|(e, c)| (MultiIndex::new(e.to_vec()), real(int(*c)))),
        )
    }

    fn add_term(&mut self, alpha: MultiIndex, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(alpha) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> GaussianRational {
        self.terms.get(alpha).cloned().unwrap_or_else(Zero::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    /// Lowest total degree present; `None` for zero.
    pub fn low_degree(&self) -> Option<usize> {
        self.terms.keys().map(MultiIndex::order).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree() == self.low_degree()
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    pub fn homogeneous_part(&self, l: usize) -> Self {
        self.filter(|a| a.order() == l)
    }

    pub fn truncate(&self, l: usize) -> Self {
        self.filter(|a| a.order() <= l)
    }

    fn filter(&self, keep: impl Fn(&MultiIndex) -> bool) -> Self {
        MultiPoly {
            d: self.d,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| keep(a))
                .map(|(a, c)| (a.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-GaussianRational::one())
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        if s.is_zero() {
            return Self::zero(self.d);
        }
        MultiPoly {
            d: self.d,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_bounded(other, usize::MAX)
    }

    /// Product with all terms of degree above `l` dropped.
    pub fn mul_truncated(&self, other: &Self, l: usize) -> Self {
        self.mul_bounded(other, l)
    }

    fn mul_bounded(&self, other: &Self, l: usize) -> Self {
        assert_eq!(self.d, other.d);
        let mut out = Self::zero(self.d);
        for (a, ca) in &self.terms {
            let oa = a.order();
            if oa > l {
                continue;
            }
            for (b, cb) in &other.terms {
                if oa + b.order() <= l {
                    out.add_term(a.add(b), ca * cb);
                }
            }
        }
        out
    }

    pub fn pow(&self, m: u32) -> Self {
        self.pow_truncated(m, usize::MAX)
    }

    pub fn pow_truncated(&self, m: u32, l: usize) -> Self {
        let mut acc = Self::one(self.d);
        for _ in 0..m {
            acc = acc.mul_bounded(self, l);
        }
        acc
    }

    /// `P(Mξ)`, i.e. each variable `ξ_i` replaced by `Σ_j M_ij ξ_j`.
    pub fn compose_linear(&self, m: &RatMatrix) -> Self {
        assert_eq!(m.nrows(), self.d);
        let d_new = m.ncols();
        let max = self.degree().unwrap_or(0);
        let forms: Vec<Vec<MultiPoly>> = (0..self.d)
            .map(|i| {
                let lin = MultiPoly::from_terms(
                    d_new,
                    (0..d_new).map(|j| (MultiIndex::unit(d_new, j), m[(i, j)].clone())),
                );
                let mut powers = vec![MultiPoly::one(d_new)];
                for k in 1..=max {
                    let next = powers[k - 1].mul(&lin);
                    powers.push(next);
                }
                powers
            })
            .collect();
        let mut out = MultiPoly::zero(d_new);
        for (a, c) in &self.terms {
            let mut t = MultiPoly::constant(d_new, c.clone());
            for (i, &e) in a.components().iter().enumerate() {
                if e > 0 {
                    t = t.mul(&forms[i][e as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// `D^γ P`.
    pub fn diff(&self, gamma: &MultiIndex) -> Self {
        let mut out = Self::zero(self.d);
        for (a, c) in &self.terms {
            if let Some(rest) = a.checked_sub(gamma) {
                // α!/(α-γ)!
                let f = a.factorial() / rest.factorial();
                out.add_term(rest, c * real(Rational::from_integer(f)));
            }
        }
        out
    }

    pub fn eval(&self, point: &[GaussianRational]) -> GaussianRational {
        assert_eq!(point.len(), self.d);
        self.terms
            .iter()
            .fold(GaussianRational::zero(), |acc, (a, c)| {
                acc + c * &monomial_value(a, point)
            })
    }

    pub fn eval_c64(&self, point: &[Complex<f64>]) -> Complex<f64> {
        self.terms.iter().fold(Complex::zero(), |acc, (a, c)| {
            let mut v = crate::ratcore::to_c64(c);
            for (x, &e) in point.iter().zip(a.components()) {
                v *= x.powu(e);
            }
            acc + v
        })
    }

    pub fn eval_f64(&self, point: &[f64]) -> Complex<f64> {
        let p: Vec<Complex<f64>> = point.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.eval_c64(&p)
    }

    /// `P(· + h)`.
    pub fn translate(&self, h: &[Rational]) -> Self {
        assert_eq!(h.len(), self.d);
        let hg: Vec<GaussianRational> = h.iter().cloned().map(real).collect();
        let mut out = Self::zero(self.d);
        for (a, c) in &self.terms {
            for b in a.divisors() {
                let rest = a.checked_sub(&b).unwrap();
                let coef = real(Rational::from_integer(mbinom(a, &b))) * monomial_value(&rest, &hg);
                out.add_term(b, c * coef);
            }
        }
        out
    }

    /// Coefficients listed along `ĉ𝒜_L`; terms above `L` are ignored.
    pub fn coefficient_vector(&self, basis: &GradedBasis) -> Vec<GaussianRational> {
        basis.graded.iter().map(|a| self.coeff(a)).collect()
    }

    /// `ĉ𝒫_L · v`.
    pub fn from_coefficient_vector(basis: &GradedBasis, v: &[GaussianRational]) -> Self {
        assert_eq!(basis.len(), v.len());
        Self::from_terms(basis.d, basis.graded.iter().cloned().zip(v.iter().cloned()))
    }

    /// Rescales to integer coefficients with content 1 and a positive
    /// coefficient on the first term in graded order.
    pub fn normalized(&self) -> Self {
        let Some((_, lead)) = self.terms.iter().next() else {
            return self.clone();
        };
        let mut p = if self.is_real() {
            self.clone()
        } else {
            // make the leading coefficient 1 before clearing denominators
            self.scale(&(GaussianRational::one() / lead.clone()))
        };
        let parts: Vec<Rational> = p
            .terms
            .values()
            .flat_map(|c| [c.re.clone(), c.im.clone()])
            .collect();
        let l = Rational::from_integer(denominator_lcm(&parts));
        let scaled: Vec<Rational> = parts.iter().map(|r| r * &l).collect();
        let g = Rational::from_integer(numerator_gcd(&scaled));
        let mut factor = &l / &g;
        let lead = p.terms.values().next().unwrap();
        let lead_re = if lead.re.is_zero() { &lead.im } else { &lead.re };
        if lead_re.is_negative() {
            factor = -factor;
        }
        p = p.scale(&real(factor));
        p
    }

    /// Parses sums like `2i*x1 + x1^2 - 1/3*x2^3`. Variables are `x1..xd`,
    /// or `x`, `y`, `z` when `d <= 3`.
    pub fn parse(d: usize, s: &str) -> Result<Self, ParseError> {
        let bad = |m: &str| ParseError::Polynomial(format!("{m} in {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty input"));
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^') {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        let mut out = MultiPoly::zero(d);
        for t in terms {
            let (sign, body) = match t.as_bytes()[0] {
                b'+' => (1, &t[1..]),
                b'-' => (-1, &t[1..]),
                _ => (1, t),
            };
            let mut coef = real(int(sign));
            let mut alpha = vec![0u32; d];
            for factor in body.split('*') {
                if factor.is_empty() {
                    return Err(bad("empty factor"));
                }
                if let Some(v) = parse_variable(d, factor) {
                    let (i, e) = v.map_err(|m| bad(&m))?;
                    alpha[i] += e;
                } else if factor == "i" {
                    coef *= Complex::new(Rational::zero(), Rational::one());
                } else if let Some(num) = factor.strip_suffix('i') {
                    coef *= Complex::new(Rational::zero(), parse_rational(num)?);
                } else {
                    coef *= real(parse_rational(factor)?);
                }
            }
            out.add_term(MultiIndex::new(alpha), coef);
        }
        Ok(out)
    }
}

fn parse_variable(d: usize, f: &str) -> Option<Result<(usize, u32), String>> {
    let (name, exp) = match f.split_once('^') {
        Some((n, e)) => (n, Some(e)),
        None => (f, None),
    };
    let idx = match name {
        "x" if d <= 3 => 0,
        "y" if d <= 3 && d >= 2 => 1,
        "z" if d == 3 => 2,
        _ => {
            let rest = name.strip_prefix('x')?;
            let k: usize = rest.parse().ok()?;
            if k == 0 || k > d {
                return Some(Err(format!("variable {name} out of range")));
            }
            k - 1
        }
    };
    let e = match exp {
        None => 1,
        Some(e) => match e.parse() {
            Ok(e) => e,
            Err(_) => return Some(Err(format!("bad exponent {e}"))),
        },
    };
    Some(Ok((idx, e)))
}

fn monomial_value(alpha: &MultiIndex, point: &[GaussianRational]) -> GaussianRational {
    let mut v = GaussianRational::one();
    for (x, &e) in point.iter().zip(alpha.components()) {
        for _ in 0..e {
            v = &v * x;
        }
    }
    v
}

pub fn variable_names(d: usize) -> Vec<String> {
    match d {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=d).map(|i| format!("x{i}")).collect(),
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = variable_names(self.d);
        // highest degree first, graded order inside a layer
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| b.order().cmp(&a.order()).then(a.cmp(b)));
        for (n, (a, c)) in terms.into_iter().enumerate() {
            let mono: Vec<String> = a
                .components()
                .iter()
                .zip(&names)
                .filter(|(e, _)| **e > 0)
                .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            let (neg, mag) = if c.im.is_zero() {
                (c.re.is_negative(), format_rational(&c.re.abs()))
            } else if c.re.is_zero() {
                (c.im.is_negative(), format!("{}i", format_rational(&c.im.abs())))
            } else {
                (false, format!("({})", crate::ratcore::format_gaussian(c)))
            };
            let sep = match (n, neg) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            let body = if mono.is_empty() {
                mag
            } else if mag == "1" {
                mono.join("*")
            } else if mag == "1i" {
                format!("i*{}", mono.join("*"))
            } else {
                format!("{mag}*{}", mono.join("*"))
            };
            write!(f, "{sep}{body}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

/// `P(−iD)Q`, each monomial `ξ^α` acting as `(−i)^{|α|} D^α`.
pub fn diff_apply(p: &MultiPoly, q: &MultiPoly) -> MultiPoly {
    assert_eq!(p.d, q.d);
    let mut out = MultiPoly::zero(q.d);
    for (a, c) in &p.terms {
        let term = q.diff(a).scale(&(c * neg_i_pow(a.order())));
        out = out.add(&term);
    }
    out
}

/// `ĉ𝐏_L(y)`: entry `(j,k) = mbinom(α_k, β_j) y^{α_k − β_j}`.
pub fn pascal_matrix(y: &[Rational], d: usize, l: usize) -> RatMatrix {
    assert_eq!(y.len(), d);
    let basis = GradedBasis::new(d, l);
    let yg: Vec<GaussianRational> = y.iter().cloned().map(real).collect();
    let n = basis.len();
    let mut m = RatMatrix::zeros(n, n);
    for (j, beta) in basis.graded.iter().enumerate() {
        for (k, alpha) in basis.graded.iter().enumerate().skip(j) {
            if let Some(g) = alpha.checked_sub(beta) {
                let b = real(Rational::from_integer(mbinom(alpha, beta)));
                m[(j, k)] = b * monomial_value(&g, &yg);
            }
        }
    }
    m
}

/// Entry of `ĉ𝐃_L S(0)` for row `β`, column `α`, given the Taylor
/// coefficient `s_γ` of `S` at `γ = α − β`.
fn bigd_entry(alpha: &MultiIndex, beta: &MultiIndex, s: &GaussianRational) -> GaussianRational {
    let gamma = alpha.checked_sub(beta).expect("β ≤ α");
    let f = mbinom(alpha, beta) * gamma.factorial();
    neg_i_pow(gamma.order()) * real(Rational::from_integer(f)) * s
}

/// `ĉ𝐃_L S(0)` with rows and columns indexed by `ĉ𝒜_L`.
pub fn bigd_matrix(s: &MultiPoly, l: usize) -> RatMatrix {
    bigd_rows_cols(s, &GradedBasis::new(s.d, l).graded, &GradedBasis::new(s.d, l).graded)
}

/// The `d(l) × d(L)` block `𝐃^l_L S(0)`.
pub fn bigd_block(s: &MultiPoly, l: usize, big_l: usize) -> RatMatrix {
    assert!(l <= big_l);
    bigd_rows_cols(s, &layer(s.d, l), &layer(s.d, big_l))
}

fn bigd_rows_cols(s: &MultiPoly, rows: &[MultiIndex], cols: &[MultiIndex]) -> RatMatrix {
    let mut m = RatMatrix::zeros(rows.len(), cols.len());
    for (j, beta) in rows.iter().enumerate() {
        for (k, alpha) in cols.iter().enumerate() {
            if let Some(g) = alpha.checked_sub(beta) {
                let c = s.coeff(&g);
                if !c.is_zero() {
                    m[(j, k)] = bigd_entry(alpha, beta, &c);
                }
            }
        }
    }
    m
}

/// Basis of `Π_{≤L} ∩ ker P(−iD)`.
pub fn kernel_polynomials(p: &MultiPoly, l: usize) -> PolynomialSpace {
    let basis = GradedBasis::new(p.d, l);
    let vectors = kernel_basis(&bigd_matrix(p, l));
    let polys: Vec<MultiPoly> = vectors
        .iter()
        .map(|v| MultiPoly::from_coefficient_vector(&basis, v))
        .collect();
    debug_assert!(polys.iter().all(|q| diff_apply(p, q).is_zero()));
    PolynomialSpace::new(p.d, polys)
}

/// A finite-dimensional space of polynomials with a canonical basis.
#[derive(Clone, Debug)]
pub struct PolynomialSpace {
    pub d: usize,
    pub basis: Vec<MultiPoly>,
    pub shift_invariant: bool,
    pub scale_invariant: bool,
}

impl PolynomialSpace {
    /// Span of `polys`. The stored basis is reduced so that each element has
    /// a distinct top monomial (highest degree first), then normalized.
    pub fn new(d: usize, polys: Vec<MultiPoly>) -> Self {
        let top = polys.iter().filter_map(MultiPoly::degree).max().unwrap_or(0);
        let order = descending_columns(d, top);
        let vectors: Vec<Vec<GaussianRational>> = polys
            .iter()
            .map(|p| order.iter().map(|a| p.coeff(a)).collect())
            .collect();
        let reduced = canonical_span(&vectors, order.len());
        let mut basis: Vec<MultiPoly> = reduced
            .iter()
            .map(|v| MultiPoly::from_terms(d, order.iter().cloned().zip(v.iter().cloned())).normalized())
            .collect();
        basis.sort_by(|a, b| {
            a.degree()
                .cmp(&b.degree())
                .then_with(|| top_monomial(a).cmp(&top_monomial(b)))
        });
        PolynomialSpace {
            d,
            basis,
            shift_invariant: false,
            scale_invariant: false,
        }
    }

    pub fn empty(d: usize) -> Self {
        Self::new(d, Vec::new())
    }

    pub fn from_vectors(basis: &GradedBasis, vectors: &[Vec<GaussianRational>]) -> Self {
        Self::new(
            basis.d,
            vectors
                .iter()
                .map(|v| MultiPoly::from_coefficient_vector(basis, v))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.basis.iter().filter_map(MultiPoly::degree).max()
    }

    pub fn vectors(&self, l: usize) -> Vec<Vec<GaussianRational>> {
        let gb = GradedBasis::new(self.d, l);
        self.basis.iter().map(|p| p.coefficient_vector(&gb)).collect()
    }

    pub fn contains(&self, p: &MultiPoly) -> bool {
        let l = self.max_degree().unwrap_or(0).max(p.degree().unwrap_or(0));
        let gb = GradedBasis::new(self.d, l);
        span_contains(&self.vectors(l), &p.coefficient_vector(&gb))
    }

    /// Equality of spans.
    pub fn equals(&self, other: &PolynomialSpace) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        if self.dim() == 0 {
            return true;
        }
        let l = self
            .max_degree()
            .unwrap_or(0)
            .max(other.max_degree().unwrap_or(0));
        subspace_equal(&self.vectors(l), &other.vectors(l))
    }

    /// True when every basis polynomial translated by each `h` stays in the span.
    pub fn closed_under_shifts(&self, shifts: &[Vec<Rational>]) -> bool {
        shifts
            .iter()
            .all(|h| self.basis.iter().all(|p| self.contains(&p.translate(h))))
    }

    /// Dimension of the subspace of polynomials of degree at most `l`.
    pub fn dim_upto(&self, l: usize) -> usize {
        let top = self.max_degree().unwrap_or(0).max(l);
        let gb = GradedBasis::new(self.d, top);
        let high: Vec<usize> = (dim_g(self.d, l as i64)..gb.len()).collect();
        // dim(V ∩ Π≤l) = dim V − rank of the projection onto higher layers
        let proj: Vec<Vec<GaussianRational>> = self
            .vectors(top)
            .into_iter()
            .map(|v| high.iter().map(|&i| v[i].clone()).collect())
            .collect();
        self.dim() - if high.is_empty() { 0 } else { span_dim(&proj, high.len()) }
    }
}

impl fmt::Display for PolynomialSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.basis.iter().map(ToString::to_string).collect();
        write!(f, "span{{{}}}", parts.join(", "))
    }
}

fn top_monomial(p: &MultiPoly) -> Option<MultiIndex> {
    let deg = p.degree()?;
    p.terms().map(|(a, _)| a).find(|a| a.order() == deg).cloned()
}

/// Multi-indices up to degree `top`, highest layer first.
fn descending_columns(d: usize, top: usize) -> Vec<MultiIndex> {
    (0..=top).rev().flat_map(|k| layer(d, k)).collect()
}
