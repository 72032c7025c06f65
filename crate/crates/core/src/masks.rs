//! Trigonometric polynomials on the half-integer frequency lattice and the
//! masks built from them.

use std::collections::BTreeMap;
use std::fmt;

use log::{debug, warn};
use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, ParseError, Result};
use crate::isotropic::{coset_reps, form_from_matrix, DilationMatrix};
use crate::multiindex::{factorial, GradedBasis, MultiIndex};
use crate::polyops::{kernel_polynomials, MultiPoly};
use crate::ratcore::{
    format_rational, gint, i_pow, int, parse_rational, rat, real, to_c64, GaussianRational, RatMatrix, Rational,
};

/// `Σ c_k e^{i k·ξ/2}`, `k` on the doubled lattice `ℤᵈ`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TrigPoly {
    d: usize,
    coeffs: BTreeMap<Vec<i64>, GaussianRational>,
}

impl TrigPoly {
    pub fn zero(d: usize) -> Self {
        TrigPoly {
            d,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: GaussianRational) -> Self {
        Self::exp(vec![0; d], c)
    }

    pub fn one(d: usize) -> Self {
        Self::constant(d, GaussianRational::one())
    }

    /// `c·e^{i k·ξ/2}`.
    pub fn exp(k: Vec<i64>, c: GaussianRational) -> Self {
        let mut t = Self::zero(k.len());
        t.add_coeff(k, c);
        t
    }

    pub fn from_coeffs(d: usize, coeffs: impl IntoIterator<Item = (Vec<i64>, GaussianRational)>) -> Self {
        let mut t = Self::zero(d);
        for (k, c) in coeffs {
            assert_eq!(k.len(), d);
            t.add_coeff(k, c);
        }
        t
    }

    fn unit_freq(d: usize, i: usize, doubled: i64) -> Vec<i64> {
        let mut k = vec![0; d];
        k[i] = doubled;
        k
    }

    /// `cos(a·ξ_i)` for integer `a`.
    pub fn cos(d: usize, i: usize, a: i64) -> Self {
        let half = real(rat(1, 2));
        Self::from_coeffs(
            d,
            [
                (Self::unit_freq(d, i, 2 * a), half.clone()),
                (Self::unit_freq(d, i, -2 * a), half),
            ],
        )
    }

    /// `sin(a·ξ_i)` for integer `a`.
    pub fn sin(d: usize, i: usize, a: i64) -> Self {
        Self::sin_doubled(d, i, 2 * a)
    }

    /// `sin(ξ_i/2)`.
    pub fn sin_half(d: usize, i: usize) -> Self {
        Self::sin_doubled(d, i, 1)
    }

    /// `sin(k ξ_i / 2)`.
    fn sin_doubled(d: usize, i: usize, k: i64) -> Self {
        // 1/(2i) = -i/2
        let c = Complex::new(Rational::zero(), rat(-1, 2));
        Self::from_coeffs(
            d,
            [
                (Self::unit_freq(d, i, k), c.clone()),
                (Self::unit_freq(d, i, -k), -c),
            ],
        )
    }

    fn add_coeff(&mut self, k: Vec<i64>, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(k).or_insert_with(GaussianRational::zero);
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.coeffs.retain(|_, v| !v.is_zero());
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &BTreeMap<Vec<i64>, GaussianRational> {
        &self.coeffs
    }

    pub fn coeff(&self, k: &[i64]) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_else(Zero::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_coeff(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-GaussianRational::one()))
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        if s.is_zero() {
            return Self::zero(self.d);
        }
        TrigPoly {
            d: self.d,
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        let mut acc: BTreeMap<Vec<i64>, GaussianRational> = BTreeMap::new();
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let k: Vec<i64> = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                let e = acc.entry(k).or_insert_with(GaussianRational::zero);
                *e = &*e + &(c1 * c2);
            }
        }
        acc.retain(|_, c| !c.is_zero());
        TrigPoly { d: self.d, coeffs: acc }
    }

    pub fn pow(&self, m: u32) -> Self {
        (0..m).fold(Self::one(self.d), |acc, _| acc.mul(self))
    }

    /// `T(ξ + 2πs)`. Exact only when every `k·s` is a half-integer.
    pub fn shift(&self, s: &[Rational]) -> Result<Self> {
        assert_eq!(s.len(), self.d);
        let mut out = Self::zero(self.d);
        for (k, c) in &self.coeffs {
            out.add_coeff(k.clone(), c * unit_root(k, s)?);
        }
        Ok(out)
    }

    /// `T(2πs)`, exactly.
    pub fn eval_at_2pi(&self, s: &[Rational]) -> Result<GaussianRational> {
        self.coeffs
            .iter()
            .try_fold(GaussianRational::zero(), |acc, (k, c)| Ok(acc + c * unit_root(k, s)?))
    }

    /// `T(0)`.
    pub fn at_zero(&self) -> GaussianRational {
        self.coeffs.values().fold(GaussianRational::zero(), |a, c| a + c)
    }

    pub fn eval(&self, xi: &[f64]) -> Complex<f64> {
        self.coeffs.iter().fold(Complex::zero(), |acc, (k, c)| {
            let t: f64 = k.iter().zip(xi).map(|(&a, &x)| a as f64 * x).sum::<f64>() / 2.0;
            acc + to_c64(c) * Complex::from_polar(1.0, t)
        })
    }

    /// Support on even doubled-lattice points only, i.e. 2π-periodic.
    pub fn is_periodic(&self) -> bool {
        self.coeffs.keys().all(|k| k.iter().all(|x| x % 2 == 0))
    }

    /// Real-valued: `c_{−k} = conj(c_k)`.
    pub fn is_real_valued(&self) -> bool {
        self.coeffs.iter().all(|(k, c)| {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            self.coeff(&neg) == c.conj()
        })
    }

    /// All Fourier coefficients real (so `h_k ∈ ℝ`).
    pub fn has_real_coefficients(&self) -> bool {
        self.coeffs.values().all(|c| c.im.is_zero())
    }

    /// Exact Taylor polynomial at 0 through total degree `l`.
    pub fn maclaurin_jet(&self, l: usize) -> MultiPoly {
        let id = RatMatrix::identity(self.d);
        self.jet_linear(&id, l)
    }

    /// Taylor polynomial of `ζ ↦ T(Mζ)` at 0 through degree `l`.
    pub fn jet_linear(&self, m: &RatMatrix, l: usize) -> MultiPoly {
        let basis = GradedBasis::new(m.ncols(), l);
        let mt = m.transpose();
        let mut acc: Vec<GaussianRational> = vec![GaussianRational::zero(); basis.len()];
        let half_i = Complex::new(Rational::zero(), rat(1, 2));
        for (k, c) in &self.coeffs {
            let kg: Vec<GaussianRational> = k.iter().map(|&x| gint(x, 0)).collect();
            // frequencies of e^{i (Mᵀk)·ζ/2}
            let w: Vec<GaussianRational> = mt.mul_vec(&kg).into_iter().map(|x| x * &half_i).collect();
            let powers: Vec<Vec<GaussianRational>> = w
                .iter()
                .map(|wi| {
                    let mut p = vec![GaussianRational::one()];
                    for e in 1..=l {
                        let next = &p[e - 1] * wi / real(int(e as i64));
                        p.push(next);
                    }
                    p
                })
                .collect();
            for (slot, alpha) in acc.iter_mut().zip(&basis.graded) {
                let mut t = c.clone();
                for (i, &e) in alpha.components().iter().enumerate() {
                    t = &t * &powers[i][e as usize];
                }
                *slot = &*slot + &t;
            }
        }
        MultiPoly::from_coefficient_vector(&basis, &acc)
    }

    /// Float Taylor coefficients of `ζ ↦ T(p + Mζ)` along `ĉ𝒜_L`.
    pub fn jet_numeric(&self, p: &[f64], m: &DMatrix<f64>, basis: &GradedBasis) -> Vec<Complex<f64>> {
        let l = basis.l;
        let d = basis.d;
        let mut acc = vec![Complex::<f64>::zero(); basis.len()];
        let inv_fact: Vec<f64> = (0..=l).map(|e| 1.0 / factorial(e as u32).to_f64().unwrap()).collect();
        for (k, c) in &self.coeffs {
            let kf: Vec<f64> = k.iter().map(|&x| x as f64).collect();
            let phase: f64 = kf.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() / 2.0;
            let base = to_c64(c) * Complex::from_polar(1.0, phase);
            let powers: Vec<Vec<Complex<f64>>> = (0..d)
                .map(|j| {
                    let wj: f64 = (0..self.d).map(|i| m[(i, j)] * kf[i]).sum::<f64>() / 2.0;
                    let w = Complex::new(0.0, wj);
                    let mut pw = vec![Complex::one()];
                    for e in 1..=l {
                        pw.push(pw[e - 1] * w);
                    }
                    pw.iter().enumerate().map(|(e, z)| z * inv_fact[e]).collect()
                })
                .collect();
            for (slot, alpha) in acc.iter_mut().zip(&basis.graded) {
                let mut t = base;
                for (j, &e) in alpha.components().iter().enumerate() {
                    t *= powers[j][e as usize];
                }
                *slot += t;
            }
        }
        acc
    }

    /// `P(sin ξ_1, …, sin ξ_d)`.
    pub fn from_sin_polynomial(p: &MultiPoly) -> Self {
        let d = p.dim();
        let sines: Vec<TrigPoly> = (0..d).map(|i| Self::sin(d, i, 1)).collect();
        let mut out = Self::zero(d);
        for (a, c) in p.terms() {
            let mut t = Self::constant(d, c.clone());
            for (i, &e) in a.components().iter().enumerate() {
                t = t.mul(&sines[i].pow(e));
            }
            out = out.add(&t);
        }
        out
    }

    /// Largest `|k_i|` on the integer frequency lattice.
    pub fn support_radius(&self) -> i64 {
        self.coeffs
            .keys()
            .flat_map(|k| k.iter().map(|x| (x.abs() + 1) / 2))
            .max()
            .unwrap_or(0)
    }

    /// Human-readable cosine/sine form; arguments are on the integer lattice
    /// when the polynomial is periodic.
    pub fn render(&self) -> String {
        let names: Vec<String> = (1..=self.d).map(|i| format!("ξ{i}")).collect();
        let mut parts: Vec<(String, Rational, bool)> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        let zero = vec![0; self.d];
        let c0 = self.coeff(&zero);
        let mut out = String::new();
        if !c0.is_zero() {
            out.push_str(&crate::ratcore::format_gaussian(&c0));
        }
        for k in self.coeffs.keys() {
            if k == &zero {
                continue;
            }
            // represent the pair {k, −k} by the member with positive leading entry
            let first = k.iter().find(|x| **x != 0).copied().unwrap_or(0);
            let k: Vec<i64> = if first > 0 { k.clone() } else { k.iter().map(|x| -x).collect() };
            if !seen.insert(k.clone()) {
                continue;
            }
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            let c = &self.coeff(&k);
            let cn = self.coeff(&neg);
            // c e^{iθ} + c' e^{-iθ} = (c+c') cos θ + i(c−c') sin θ
            let cos_c = c + &cn;
            let sin_c = (c - &cn) * Complex::new(Rational::zero(), Rational::one());
            let arg = render_arg(&k, &names);
            for (coef, f) in [(cos_c, "cos"), (sin_c, "sin")] {
                if coef.is_zero() {
                    continue;
                }
                if coef.im.is_zero() {
                    parts.push((format!("{f}({arg})"), coef.re, false));
                } else if coef.re.is_zero() {
                    parts.push((format!("{f}({arg})"), coef.im, true));
                } else {
                    out.push_str(&format!(" + ({})*{f}({arg})", crate::ratcore::format_gaussian(&coef)));
                }
            }
        }
        for (term, c, imag) in parts {
            let sign = if c.is_negative() { " - " } else { " + " };
            let mag = format_rational(&c.abs());
            let i = if imag { "i*" } else { "" };
            let body = if mag == "1" {
                format!("{i}{term}")
            } else {
                format!("{mag}*{i}{term}")
            };
            if out.is_empty() {
                out = if c.is_negative() { format!("-{body}") } else { body };
            } else {
                out.push_str(sign);
                out.push_str(&body);
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

fn render_arg(k: &[i64], names: &[String]) -> String {
    let periodic = k.iter().all(|x| x % 2 == 0);
    let mut s = String::new();
    for (x, n) in k.iter().zip(names) {
        if *x == 0 {
            continue;
        }
        let (num, den) = if periodic { (*x / 2, 1) } else { (*x, 2) };
        let sign = if num < 0 { "-" } else if s.is_empty() { "" } else { "+" };
        let mag = num.abs();
        let coef = if mag == 1 { String::new() } else { mag.to_string() };
        s.push_str(&format!("{sign}{coef}{n}"));
        if den == 2 {
            s.push_str("/2");
        }
    }
    s
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TrigPoly({})", self.render())
    }
}

/// `e^{iπ k·s}` for `k·s ∈ ½ℤ`.
fn unit_root(k: &[i64], s: &[Rational]) -> Result<GaussianRational> {
    let t: Rational = k.iter().zip(s).map(|(&a, b)| b * int(a)).sum();
    let twice = t * int(2);
    if !twice.is_integer() {
        return Err(Error::UnsupportedShiftDenominator(twice.denom().to_string()));
    }
    Ok(i_pow(twice.to_integer().to_i64().expect("small exponent")))
}

/// `G(ξ) = 4Σ q_ii sin²(ξ_i/2) + 2Σ_{i<j} q_ij sin ξ_i sin ξ_j`.
pub fn build_g(q2: &RatMatrix) -> TrigPoly {
    let d = q2.nrows();
    let mut g = TrigPoly::zero(d);
    for i in 0..d {
        let s = TrigPoly::sin_half(d, i);
        g = g.add(&s.mul(&s).scale(&(q2[(i, i)].clone() * real(int(4)))));
        for j in i + 1..d {
            let t = TrigPoly::sin(d, i, 1).mul(&TrigPoly::sin(d, j, 1));
            g = g.add(&t.scale(&(q2[(i, j)].clone() * real(int(2)))));
        }
    }
    g
}

/// Correction basis element with Taylor leading term `ξ^e`: factor
/// `(2 sin(ξ_i/2))^{e_i}` for even `e_i`, `(2 sin(ξ_i/2))^{e_i−1} sin ξ_i` for odd.
pub fn correction_basis(e: &MultiIndex) -> TrigPoly {
    let d = e.dim();
    let mut t = TrigPoly::one(d);
    for (i, &ei) in e.components().iter().enumerate() {
        let two_s = TrigPoly::sin_half(d, i).scale(&gint(2, 0));
        let f = if ei % 2 == 0 {
            two_s.pow(ei)
        } else {
            two_s.pow(ei - 1).mul(&TrigPoly::sin(d, i, 1))
        };
        t = t.mul(&f);
    }
    t
}

/// `G` whose Maclaurin jet equals `W` through degree `r − 1`.
///
/// With `correction = None` the jet of [`build_g`] is cancelled degree by
/// degree in the [`correction_basis`]; an explicit correction is added as
/// given and only checked.
pub fn build_g_higher(q2: &RatMatrix, r: usize, correction: Option<&TrigPoly>) -> Result<TrigPoly> {
    if r < 4 {
        return Err(Error::InvalidInput(format!("higher degree r = {r} must be at least 4")));
    }
    let w = form_from_matrix(q2);
    let base = build_g(q2);
    if let Some(c) = correction {
        let g = base.add(c);
        if g.maclaurin_jet(r - 1) != w {
            return Err(Error::ConditionFailed(format!(
                "supplied correction leaves jet {} instead of W through degree {}",
                g.maclaurin_jet(r - 1),
                r - 1
            )));
        }
        return Ok(g);
    }
    let mut g = base;
    for k in 3..r {
        let resid = g.maclaurin_jet(k).homogeneous_part(k);
        for (e, c) in resid.terms() {
            g = g.sub(&correction_basis(e).scale(c));
        }
        if !g.maclaurin_jet(k).homogeneous_part(k).is_zero() {
            return Err(Error::UnderdeterminedCorrection(k));
        }
    }
    debug!("higher-degree G for r = {r}: {}", g.render());
    Ok(g)
}

/// Mask of one scale of a nonstationary family.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleMask {
    pub g: TrigPoly,
    pub m0: TrigPoly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskSpec {
    pub dilation: DilationMatrix,
    pub g: TrigPoly,
    pub m0: TrigPoly,
    pub order: u32,
    /// `j ↦ (ʲG, ʲm₀)` for nonstationary schemes; `None` when stationary.
    pub family: Option<BTreeMap<i64, ScaleMask>>,
}

impl MaskSpec {
    pub fn is_stationary(&self) -> bool {
        self.family.is_none()
    }

    /// Mask at scale `j`, already raised to the order.
    pub fn mask_at(&self, j: i64) -> TrigPoly {
        match &self.family {
            Some(f) => f
                .get(&j)
                .map(|s| s.m0.pow(self.order))
                .unwrap_or_else(|| panic!("scale {j} not in family")),
            None => self.m0.pow(self.order),
        }
    }

    /// The `G`-part whose zero produces the vanishing factor at scale `j`.
    pub fn g_at(&self, j: i64) -> &TrigPoly {
        match &self.family {
            Some(f) => &f[&j].g,
            None => &self.g,
        }
    }

    pub fn scales(&self) -> Option<std::ops::RangeInclusive<i64>> {
        self.family.as_ref().map(|f| {
            let lo = *f.keys().next().unwrap();
            let hi = *f.keys().next_back().unwrap();
            lo..=hi
        })
    }
}

/// `m₀(ξ) = ∏_{s≠0} G(ξ+2πs) / ∏_{s≠0} G(2πs)` over `s ∈ 𝒮(Aᵀ)`.
pub fn build_mask(g: &TrigPoly, a: &DilationMatrix) -> Result<MaskSpec> {
    let m0 = mask_from_g(g, a)?;
    Ok(MaskSpec {
        dilation: a.clone(),
        g: g.clone(),
        m0,
        order: 1,
        family: None,
    })
}

fn mask_from_g(g: &TrigPoly, a: &DilationMatrix) -> Result<TrigPoly> {
    let reps = coset_reps(&a.transpose());
    let mut num = TrigPoly::one(g.dim());
    let mut den = GaussianRational::one();
    for s in reps.nonzero() {
        let v = g.eval_at_2pi(s)?;
        if v.is_zero() {
            let shown: Vec<String> = s.iter().map(format_rational).collect();
            return Err(Error::GVanishesAtCoset(format!("({})", shown.join(", "))));
        }
        num = num.mul(&g.shift(s)?);
        den = den * v;
    }
    let m0 = num.scale(&(GaussianRational::one() / den));
    if !m0.is_periodic() {
        return Err(Error::NonPeriodicMask);
    }
    debug_assert!(m0.at_zero().is_one() || !g.at_zero().is_zero());
    Ok(m0)
}

/// `m₀^m`; the order field records `m` and the stored mask stays `m₀`.
pub fn mask_power(spec: &MaskSpec, m: u32) -> MaskSpec {
    assert!(m >= 1);
    MaskSpec {
        order: spec.order * m,
        ..spec.clone()
    }
}

/// `a_k = q·c_{−k}` on the integer lattice, so that `φ = Σ a_k φ(A·−k)`.
pub fn refinement_coefficients(m0: &TrigPoly, q: u64) -> BTreeMap<Vec<i64>, GaussianRational> {
    assert!(m0.is_periodic());
    let qq = real(int(q as i64));
    m0.coeffs()
        .iter()
        .map(|(k, c)| (k.iter().map(|x| -x / 2).collect(), c * &qq))
        .collect()
}

/// The two nonstationary constructions.
#[derive(Clone, Debug, PartialEq)]
pub enum NonstationaryKind {
    /// Target `X + W^m` with `X` homogeneous of degree `1 ≤ k ≤ 2m − 1`.
    XPlusWm { x: MultiPoly, m: u32 },
    /// Target `Σ_{k=k₁}^{k₂} C_k W^k`.
    SumOfPowers { coeffs: BTreeMap<u32, Rational> },
}

impl NonstationaryKind {
    /// `X=<poly>[,m=<k>]` or `sum=<k>:<C>,<k>:<C>,...`; variables are `x1..xd`
    /// (or `x, y, z`).
    pub fn parse(d: usize, s: &str) -> std::result::Result<Self, ParseError> {
        let bad = |why: &str| {
            ParseError::Nonstationary(format!(
                "{why} in {s:?}; expected X=<poly>[,m=<k>] or sum=<k>:<C>,...; other families need the library API"
            ))
        };
        let (key, body) = s.split_once('=').ok_or_else(|| bad("missing '='"))?;
        match key.trim() {
            "X" | "x" => {
                let (poly, m) = match body.rsplit_once(",m=") {
                    Some((p, m)) => (p, m.trim().parse::<u32>().map_err(|_| bad("bad power m"))?),
                    None => (body, 1),
                };
                if m == 0 {
                    return Err(bad("m must be positive"));
                }
                let x = MultiPoly::parse(d, poly.trim())?;
                Ok(NonstationaryKind::XPlusWm { x, m })
            }
            "sum" => {
                let mut coeffs = BTreeMap::new();
                for item in body.split(',') {
                    let (k, c) = item.split_once(':').ok_or_else(|| bad("term without ':'"))?;
                    let k: u32 = k.trim().parse().map_err(|_| bad("bad power"))?;
                    if k == 0 || coeffs.contains_key(&k) {
                        return Err(bad("powers must be positive and distinct"));
                    }
                    coeffs.insert(k, parse_rational(c.trim())?);
                }
                Ok(NonstationaryKind::SumOfPowers { coeffs })
            }
            other => Err(bad(&format!("unknown family {other:?}"))),
        }
    }
}

/// Smallest `n ≥ 1` with `Aⁿ` a scalar matrix, searched up to `bound`.
pub fn scalar_power_order(a: &DilationMatrix, bound: u32) -> Option<u32> {
    let am = a.to_rat();
    let d = a.d();
    let mut p = RatMatrix::identity(d);
    for n in 1..=bound {
        p = &p * &am;
        let c = p[(0, 0)].clone();
        if p == RatMatrix::identity(d).scale(&c) {
            return Some(n);
        }
    }
    None
}

/// `q^{2/d}` as a rational, when it is one.
fn lambda_of(a: &DilationMatrix) -> Option<Rational> {
    let d = a.d() as u32;
    let q2 = num_bigint::BigInt::from(a.q()).pow(2);
    let r = q2.nth_root(d);
    (r.pow(d) == q2).then(|| Rational::from_integer(r))
}

fn rat_pow(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// Scale-indexed `ʲG`, `ʲm₀` whose composed jets `ʲG ∘ (A⁻ᵀ)ʲ` start with a
/// multiple of the target.
pub fn nonstationary_family(
    kind: &NonstationaryKind,
    q2: &RatMatrix,
    a: &DilationMatrix,
    scales: std::ops::RangeInclusive<i64>,
) -> Result<MaskSpec> {
    match scalar_power_order(a, 2) {
        Some(_) => {}
        None => {
            let shown = scalar_power_order(a, 24).map_or("infinite or above 24".to_string(), |n| n.to_string());
            return Err(Error::UnsupportedGroupOrder(shown));
        }
    }
    let lambda = lambda_of(a).ok_or_else(|| {
        Error::InvalidInput("q^(2/d) must be rational for nonstationary families".into())
    })?;
    let d = a.d();
    let w = form_from_matrix(q2);
    let mut family = BTreeMap::new();
    match kind {
        NonstationaryKind::XPlusWm { x, m } => {
            check_x_condition(x, &w, *m)?;
            let gw = build_g(q2).pow(*m);
            let at = a.transpose().to_rat();
            for j in scales.clone() {
                if j < 0 {
                    return Err(Error::InvalidInput("scales must be nonnegative".into()));
                }
                // q^{-2mj/d} X(A^{Tj} ξ), realized on sines
                let xs = x
                    .compose_linear(&at.pow(j as u32))
                    .scale(&real(rat_pow(&lambda, -(*m as i64) * j)));
                let g = gw.add(&TrigPoly::from_sin_polynomial(&xs));
                let m0 = mask_from_g(&g, a)?;
                family.insert(j, ScaleMask { g, m0 });
            }
        }
        NonstationaryKind::SumOfPowers { coeffs } => {
            let (&k1, &k2) = match (coeffs.keys().next(), coeffs.keys().next_back()) {
                (Some(a), Some(b)) if *a >= 1 => (a, b),
                _ => return Err(Error::InvalidInput("powers must be nonempty and at least 1".into())),
            };
            let base = if k2 > 1 {
                build_g_higher(q2, 2 * k2 as usize + 2, None)?
            } else {
                build_g(q2)
            };
            for j in scales.clone() {
                if j < 0 {
                    return Err(Error::InvalidInput("scales must be nonnegative".into()));
                }
                let mut g = TrigPoly::zero(d);
                for (&k, c) in coeffs {
                    let f = rat_pow(&lambda, (k as i64 - k1 as i64) * j) * c;
                    g = g.add(&base.pow(k).scale(&real(f)));
                }
                let m0 = mask_from_g(&g, a)?;
                family.insert(j, ScaleMask { g, m0 });
            }
        }
    }
    let first = family.values().next().cloned().ok_or_else(|| Error::InvalidInput("empty scale range".into()))?;
    Ok(MaskSpec {
        dilation: a.clone(),
        g: first.g,
        m0: first.m0,
        order: 1,
        family: Some(family),
    })
}

/// `Π ∩ (ker X(−iD) ∖ ker W(−iD)^m) ≠ ∅`, checked on `Π_{≤2m+k}`.
fn check_x_condition(x: &MultiPoly, w: &MultiPoly, m: u32) -> Result<()> {
    let k = match (x.degree(), x.is_homogeneous()) {
        (Some(k), true) => k,
        _ => return Err(Error::ConditionFailed("X must be a nonzero homogeneous polynomial".into())),
    };
    if k == 0 {
        return Err(Error::ConditionFailed("X must not be constant".into()));
    }
    if k >= 2 * m as usize {
        // outside the theorem's range; the construction still works but the
        // space is no longer guaranteed to lose scale invariance
        warn!("deg X = {k} exceeds 2m - 1 = {}", 2 * m - 1);
    }
    let l = 2 * m as usize + k;
    let kx = kernel_polynomials(x, l);
    let kw = kernel_polynomials(&w.pow(m), l);
    if kx.basis.iter().all(|p| kw.contains(p)) {
        return Err(Error::ConditionFailed(
            "ker X(-iD) is contained in ker W(-iD)^m".into(),
        ));
    }
    Ok(())
}

/// Grid scan of a real `G` over `[−π, π]ᵈ`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct NonnegReport {
    pub min: f64,
    pub argmin: Vec<f64>,
    /// Smallest value at grid points farther than one cell from the origin.
    pub min_away_from_origin: f64,
    pub ok: bool,
}

pub fn nonneg_check(g: &TrigPoly, density: usize) -> NonnegReport {
    let d = g.dim();
    assert!(density >= 2);
    let h = 2.0 * std::f64::consts::PI / (density - 1) as f64;
    let mut min = f64::INFINITY;
    let mut argmin = vec![0.0; d];
    let mut min_away = f64::INFINITY;
    let mut idx = vec![0usize; d];
    let mut imag_max = 0.0f64;
    loop {
        let xi: Vec<f64> = idx.iter().map(|&i| -std::f64::consts::PI + i as f64 * h).collect();
        let v = g.eval(&xi);
        imag_max = imag_max.max(v.im.abs());
        if v.re < min {
            min = v.re;
            argmin = xi.clone();
        }
        if xi.iter().any(|x| x.abs() > h * 1.000001) {
            min_away = min_away.min(v.re);
        }
        let mut k = 0;
        loop {
            if k == d {
                let ok = min >= -1e-12 && min_away > 1e-9 && imag_max < 1e-12;
                if !ok {
                    warn!("G fails the nonnegativity scan: min {min}, away {min_away}");
                }
                return NonnegReport {
                    min,
                    argmin,
                    min_away_from_origin: min_away,
                    ok,
                };
            }
            idx[k] += 1;
            if idx[k] < density {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Homogeneous-layer helper used by tests and the CLI.
pub fn jet_layers(t: &TrigPoly, l: usize) -> Vec<MultiPoly> {
    let jet = t.maclaurin_jet(l);
    (0..=l).map(|k| jet.homogeneous_part(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotropic::decompose;

    fn quincunx() -> DilationMatrix {
        DilationMatrix::parse("1,1;1,-1").unwrap()
    }

    fn c(d: usize, i: usize, a: i64) -> TrigPoly {
        TrigPoly::cos(d, i, a)
    }

    fn k(x: i64, y: i64) -> TrigPoly {
        TrigPoly::constant(2, real(rat(x, y)))
    }

    #[test]
    fn shift_half_period_turns_sine_into_cosine() {
        let s = TrigPoly::sin_half(1, 0);
        let sq = s.mul(&s);
        let shifted = sq.shift(&[rat(1, 2)]).unwrap();
        let cs = TrigPoly::cos_half_test();
        assert_eq!(shifted, cs.mul(&cs));
    }

    impl TrigPoly {
        fn cos_half_test() -> Self {
            TrigPoly::from_coeffs(1, [(vec![1], real(rat(1, 2))), (vec![-1], real(rat(1, 2)))])
        }
    }

    #[test]
    fn sine_product_has_four_terms() {
        let t = TrigPoly::sin(2, 0, 1).mul(&TrigPoly::sin(2, 1, 1));
        assert_eq!(t.coeffs().len(), 4);
        assert!(t.coeffs().values().all(|c| c.re.abs() == rat(1, 4) && c.im.is_zero()));
    }

    #[test]
    fn unsupported_denominator() {
        let t = TrigPoly::cos(1, 0, 1);
        assert!(matches!(t.shift(&[rat(1, 3)]), Err(Error::UnsupportedShiftDenominator(_))));
    }

    #[test]
    fn quincunx_mask() {
        let a = quincunx();
        let dec = decompose(&a).unwrap();
        let g = build_g(&dec.q2);
        assert_eq!(g.maclaurin_jet(3), MultiPoly::parse(2, "x^2 + y^2").unwrap());
        let spec = build_mask(&g, &a).unwrap();
        let expect = k(1, 2).add(&c(2, 0, 1).scale(&real(rat(1, 4)))).add(&c(2, 1, 1).scale(&real(rat(1, 4))));
        assert_eq!(spec.m0, expect);
        assert!(spec.m0.at_zero().is_one());
        // constant term of m₀² is its mean over the torus
        let sq = mask_power(&spec, 2).mask_at(0);
        let n = 64;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut mean = 0.0;
        for i in 0..n {
            for j in 0..n {
                mean += sq.eval(&[i as f64 * h, j as f64 * h]).re;
            }
        }
        mean /= (n * n) as f64;
        assert!((mean - 5.0 / 16.0).abs() < 1e-12);
        assert_eq!(sq.coeff(&[0, 0]), real(rat(5, 16)));
    }

    #[test]
    fn mask_invariant_under_g_scaling() {
        let a = quincunx();
        let g = build_g(&RatMatrix::identity(2));
        let m = build_mask(&g, &a).unwrap().m0;
        for s in [rat(2, 1), rat(3, 5)] {
            assert_eq!(build_mask(&g.scale(&real(s)), &a).unwrap().m0, m);
        }
    }

    #[test]
    fn higher_degree_solver_reproduces_sixth_order_correction() {
        let id = RatMatrix::identity(2);
        let g6 = build_g_higher(&id, 6, None).unwrap();
        let s1 = TrigPoly::sin_half(2, 0).pow(4);
        let s2 = TrigPoly::sin_half(2, 1).pow(4);
        let explicit = s1.add(&s2).scale(&real(rat(4, 3)));
        assert_eq!(g6, build_g(&id).add(&explicit));
        assert_eq!(build_g_higher(&id, 6, Some(&explicit)).unwrap(), g6);
        assert!(build_g_higher(&id, 8, Some(&explicit)).is_err());
    }

    #[test]
    fn coset_zero_is_rejected() {
        // G = sin²(ξ₁) vanishes at 2π(1/2, 1/2)
        let g = TrigPoly::sin(2, 0, 1).pow(2);
        assert!(matches!(build_mask(&g, &quincunx()), Err(Error::GVanishesAtCoset(_))));
    }

    #[test]
    fn nonneg_scan() {
        let g = build_g(&RatMatrix::identity(2));
        assert!((g.eval(&[std::f64::consts::PI; 2]).re - 8.0).abs() < 1e-12);
        assert!(g.eval(&[0.0, 0.0]).norm() < 1e-15);
        assert!(nonneg_check(&g, 33).ok);
        assert!(!nonneg_check(&g.scale(&gint(-1, 0)), 33).ok);
    }

    #[test]
    fn render_mask() {
        let g = build_g(&RatMatrix::identity(2));
        let m = build_mask(&g, &quincunx()).unwrap().m0;
        assert_eq!(m.render(), "1/2 + 1/4*cos(ξ1) + 1/4*cos(ξ2)");
    }

    #[test]
    fn nonstationary_mini_language() {
        let k = NonstationaryKind::parse(2, "X=2i*x1").unwrap();
        assert_eq!(k, NonstationaryKind::XPlusWm { x: MultiPoly::parse(2, "2i*x").unwrap(), m: 1 });
        let k = NonstationaryKind::parse(2, "sum=1:1,2:1/3").unwrap();
        let NonstationaryKind::SumOfPowers { coeffs } = k else { panic!() };
        assert_eq!(coeffs[&2], rat(1, 3));
        assert!(NonstationaryKind::parse(2, "exp=1").is_err());
        assert!(NonstationaryKind::parse(2, "sum=1:1,1:2").is_err());
    }
}
