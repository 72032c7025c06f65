//! Scaling functions: jets of `φ̂` at the lattice, the cascade algorithm and
//! numeric reproduction checks.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use log::{debug, info, warn};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::isotropic::{coset_reps, decompose, factorize, rat_to_f64, window_points, DilationMatrix};
use crate::masks::{
    build_g, build_g_higher, build_mask, mask_power, nonstationary_family, refinement_coefficients,
    MaskSpec, NonstationaryKind, TrigPoly,
};
use crate::multiindex::GradedBasis;
use crate::numeric::JetAlgebra;
use crate::par::Exec;
use crate::polyops::{MultiPoly, PolynomialSpace};
use crate::ratcore::{neg_i_pow, rational_to_f64, to_c64, GaussianRational, RatMatrix};
use crate::strangfix::{shift_invariant_space, AnalysisConfig, Jet, JetProvider, SFResult};

/// Number of factors kept in the truncated product.
pub const DEFAULT_TRUNC: usize = 30;

#[derive(Clone, Debug)]
pub struct ScalingFunctionSpec {
    pub a: DilationMatrix,
    pub masks: MaskSpec,
    pub q2: RatMatrix,
    /// Power of `W` in the target operator, used for the default degree bound.
    pub m: u32,
    /// Degree of the first term of `G` beyond `W`; 4 for the plain form.
    pub r: usize,
}

impl ScalingFunctionSpec {
    /// Elliptic `φ^m`.
    pub fn stationary(a: &DilationMatrix, m: u32) -> Result<Self> {
        let dec = decompose(a)?;
        let spec = build_mask(&build_g(&dec.q2), a)?;
        Ok(Self::from_parts(a, mask_power(&spec, m), dec.q2, m, 4))
    }

    /// `φ^m` with `G = W + R_r`.
    pub fn higher(a: &DilationMatrix, r: usize, correction: Option<&TrigPoly>, m: u32) -> Result<Self> {
        let dec = decompose(a)?;
        let g = build_g_higher(&dec.q2, r, correction)?;
        let spec = build_mask(&g, a)?;
        Ok(Self::from_parts(a, mask_power(&spec, m), dec.q2, m, r))
    }

    /// Scales `0..=trunc`, enough for the numeric product of the zero-scale
    /// function.
    pub fn nonstationary(a: &DilationMatrix, kind: &NonstationaryKind, trunc: usize) -> Result<Self> {
        let dec = decompose(a)?;
        let masks = nonstationary_family(kind, &dec.q2, a, 0..=trunc as i64)?;
        let (m, r) = match kind {
            NonstationaryKind::XPlusWm { m, .. } => (*m, 4),
            NonstationaryKind::SumOfPowers { coeffs } => {
                let k = *coeffs.keys().next_back().unwrap_or(&1);
                (k, 2 * k as usize + 2)
            }
        };
        Ok(Self::from_parts(a, masks, dec.q2, m, r))
    }

    fn from_parts(a: &DilationMatrix, masks: MaskSpec, q2: RatMatrix, m: u32, r: usize) -> Self {
        ScalingFunctionSpec {
            a: a.clone(),
            masks,
            q2,
            m,
            r,
        }
    }

    pub fn d(&self) -> usize {
        self.a.d()
    }

    pub fn is_stationary(&self) -> bool {
        self.masks.is_stationary()
    }

    /// Leaves room for orders up to `2m + r`, two past what a `G` with
    /// vanishing odd Taylor terms can reach.
    pub fn analysis_config(&self) -> AnalysisConfig {
        let mut cfg = AnalysisConfig::for_order(self.m);
        cfg.l_max = cfg.l_max.max(2 * self.m as usize + self.r + 2);
        cfg
    }

    pub fn symbolic(&self) -> SymbolicJets<'_> {
        SymbolicJets::new(self)
    }

    pub fn numeric(&self, trunc: usize) -> Result<NumericJets> {
        NumericJets::new(self, trunc)
    }

    /// Exact space with the numeric route as a cross-check.
    pub fn analyze(&self, cfg: &AnalysisConfig, trunc: usize) -> Result<SFResult> {
        let sym = self.symbolic();
        let num = self.numeric(trunc)?;
        shift_invariant_space(&sym, Some(&num), cfg)
    }

    /// Every synthesized mask equals 1 at the origin.
    pub fn masks_normalized(&self) -> bool {
        let one = GaussianRational::one();
        match self.masks.scales() {
            None => self.masks.mask_at(0).at_zero() == one,
            Some(r) => r.into_iter().all(|j| self.masks.mask_at(j).at_zero() == one),
        }
    }
}

/// Leading jets from the factorization `n = (Aᵀ)ʲ(s + k)`: the vanishing
/// factor is `G_j((A⁻ᵀ)ʲζ)^m`, the factors before it are periodic at
/// `2π·ℤᵈ` and kept exactly, the factors after it are a nonzero constant
/// to leading order and dropped.
pub struct SymbolicJets<'a> {
    spec: &'a ScalingFunctionSpec,
    at: DilationMatrix,
    inv_t: RatMatrix,
    cache: Mutex<HashMap<(usize, usize), MultiPoly>>,
}

impl<'a> SymbolicJets<'a> {
    pub fn new(spec: &'a ScalingFunctionSpec) -> Self {
        SymbolicJets {
            spec,
            at: spec.a.transpose(),
            inv_t: spec.a.inverse_transpose(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn jet_for_scale(&self, j: usize, l: usize) -> MultiPoly {
        if let Some(p) = self.cache.lock().expect("poisoned").get(&(j, l)) {
            return p.clone();
        }
        let order = self.spec.masks.order;
        let mut acc = self
            .spec
            .masks
            .g_at(j as i64)
            .jet_linear(&self.inv_t.pow(j as u32), l)
            .pow_truncated(order, l);
        for i in 1..j {
            let f = self.spec.masks.mask_at(i as i64).jet_linear(&self.inv_t.pow(i as u32), l);
            acc = acc.mul_truncated(&f, l);
        }
        self.cache.lock().expect("poisoned").insert((j, l), acc.clone());
        acc
    }
}

impl JetProvider for SymbolicJets<'_> {
    fn dim(&self) -> usize {
        self.spec.d()
    }

    fn jet(&self, n: &[i64], l: usize) -> Result<Jet> {
        let f = factorize(&self.at, n)?;
        Ok(Jet::Exact(self.jet_for_scale(f.j, l)))
    }

    fn kernel_key(&self, n: &[i64]) -> Result<Option<Vec<i64>>> {
        Ok(Some(vec![factorize(&self.at, n)?.j as i64]))
    }
}

/// Exact leading jet at `2πn`, scaled so its first nonzero graded
/// coefficient is 1.
pub fn phihat_jet_symbolic(spec: &ScalingFunctionSpec, n: &[i64], l: usize) -> Result<MultiPoly> {
    let Jet::Exact(p) = SymbolicJets::new(spec).jet(n, l)? else {
        unreachable!()
    };
    Ok(normalize_first(&p))
}

pub fn normalize_first(p: &MultiPoly) -> MultiPoly {
    match p.terms().next() {
        Some((_, c)) => p.scale(&(GaussianRational::one() / c.clone())),
        None => p.clone(),
    }
}

/// Float jets of the `J`-factor product `∏_{j=1}^{J} ʲm₀((A⁻ᵀ)ʲξ)`.
///
/// Each factor is expanded as `∏_{s≠0} G_j(ξ+2πs) / ∏_{s≠0} G_j(2πs)`
/// rather than from the Fourier coefficients of `ʲm₀`, which can be large
/// enough (nonstationary families) to cancel catastrophically in floats.
pub struct NumericJets {
    d: usize,
    order: u32,
    factors: Vec<Factor>,
    algebras: Mutex<HashMap<usize, Arc<JetAlgebra>>>,
}

struct Factor {
    g: TrigPoly,
    /// `2πs` for the nonzero coset representatives.
    shifts: Vec<Vec<f64>>,
    inv_den: Complex64,
    m: DMatrix<f64>,
}

impl NumericJets {
    pub fn new(spec: &ScalingFunctionSpec, trunc: usize) -> Result<Self> {
        if trunc == 0 {
            return Err(Error::InvalidInput("truncation must be at least 1".into()));
        }
        if let Some(r) = spec.masks.scales() {
            if *r.start() > 1 || (*r.end() as usize) < trunc {
                return Err(Error::InvalidInput(format!(
                    "mask family covers scales {r:?}, the product needs 1..={trunc}"
                )));
            }
        }
        let reps = coset_reps(&spec.a.transpose());
        let nonzero: Vec<&Vec<crate::ratcore::Rational>> = reps.nonzero().collect();
        let shifts: Vec<Vec<f64>> = nonzero
            .iter()
            .map(|s| s.iter().map(|x| 2.0 * std::f64::consts::PI * rational_to_f64(x)).collect())
            .collect();
        let inv_t = rat_to_f64(&spec.a.inverse_transpose());
        let mut p = DMatrix::identity(spec.d(), spec.d());
        let mut factors = Vec::with_capacity(trunc);
        for j in 1..=trunc as i64 {
            p = &inv_t * p;
            let g = spec.masks.g_at(j).clone();
            let mut den = GaussianRational::one();
            for s in &nonzero {
                den *= g.eval_at_2pi(s)?;
            }
            factors.push(Factor {
                g,
                shifts: shifts.clone(),
                inv_den: Complex64::new(1.0, 0.0) / to_c64(&den),
                m: p.clone(),
            });
        }
        Ok(NumericJets {
            d: spec.d(),
            order: spec.masks.order,
            factors,
            algebras: Mutex::new(HashMap::new()),
        })
    }

    pub fn trunc(&self) -> usize {
        self.factors.len()
    }

    fn algebra(&self, l: usize) -> Arc<JetAlgebra> {
        let mut cache = self.algebras.lock().expect("poisoned");
        cache.entry(l).or_insert_with(|| Arc::new(JetAlgebra::new(self.d, l))).clone()
    }

    /// Coefficients along `ĉ𝒜_L` and the deviation of the last factor from 1.
    pub fn jet_coeffs(&self, n: &[i64], l: usize) -> (Vec<Complex64>, f64) {
        let alg = self.algebra(l);
        let x: Vec<f64> = n.iter().map(|&v| 2.0 * std::f64::consts::PI * v as f64).collect();
        let mut acc = alg.one();
        let mut error = 0.0;
        for (k, f) in self.factors.iter().enumerate() {
            let p: Vec<f64> = (0..self.d).map(|i| (0..self.d).map(|j| f.m[(i, j)] * x[j]).sum()).collect();
            let mut mask = alg.one();
            for s in &f.shifts {
                let ps: Vec<f64> = p.iter().zip(s).map(|(a, b)| a + b).collect();
                mask = alg.mul(&mask, &f.g.jet_numeric(&ps, &f.m, &alg.basis));
            }
            let mask: Vec<Complex64> = mask.into_iter().map(|z| z * f.inv_den).collect();
            let mut factor = alg.one();
            for _ in 0..self.order {
                factor = alg.mul(&factor, &mask);
            }
            if k + 1 == self.factors.len() {
                let one = alg.one();
                error = factor.iter().zip(&one).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            }
            acc = alg.mul(&acc, &factor);
        }
        (acc, error)
    }
}

impl JetProvider for NumericJets {
    fn dim(&self) -> usize {
        self.d
    }

    fn jet(&self, n: &[i64], l: usize) -> Result<Jet> {
        let (coeffs, error) = self.jet_coeffs(n, l);
        Ok(Jet::Numeric { coeffs, error })
    }
}

pub fn phihat_jet_numeric(spec: &ScalingFunctionSpec, n: &[i64], l: usize, trunc: usize) -> Result<(Vec<Complex64>, f64)> {
    Ok(NumericJets::new(spec, trunc)?.jet_coeffs(n, l))
}

/// `P(−iD)f̂` at the jet point: `Σ p_α (−i)^{|α|} α! f_α`.
pub fn contract(p: &MultiPoly, jet: &[Complex64], basis: &GradedBasis) -> Complex64 {
    p.terms()
        .map(|(a, c)| {
            let i = basis.position(a).expect("jet degree covers the polynomial");
            let f = a.factorial().to_f64().expect("small");
            to_c64(&(c * neg_i_pow(a.order()))) * f * jet[i]
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnihilationReport {
    pub max: f64,
    pub per_basis: Vec<f64>,
    pub worst_point: Vec<i64>,
    pub max_jet_error: f64,
}

pub fn verify_annihilation(
    spec: &ScalingFunctionSpec,
    polys: &[MultiPoly],
    radius: i64,
    trunc: usize,
    exec: Exec,
) -> Result<AnnihilationReport> {
    let nj = NumericJets::new(spec, trunc)?;
    let l = polys.iter().filter_map(MultiPoly::degree).max().unwrap_or(0);
    let basis = GradedBasis::new(spec.d(), l);
    let window = window_points(spec.d(), radius);
    let jets = exec.map(&window, |n| nj.jet_coeffs(n, l));
    let mut per_basis = vec![0.0f64; polys.len()];
    let mut max = 0.0;
    let mut worst_point = Vec::new();
    for (n, (jet, _)) in window.iter().zip(&jets) {
        for (k, p) in polys.iter().enumerate() {
            let v = contract(p, jet, &basis).norm();
            per_basis[k] = per_basis[k].max(v);
            if v > max {
                max = v;
                worst_point = n.clone();
            }
        }
    }
    let max_jet_error = jets.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    Ok(AnnihilationReport {
        max,
        per_basis,
        worst_point,
        max_jet_error,
    })
}

pub fn verify_space_annihilation(
    spec: &ScalingFunctionSpec,
    space: &PolynomialSpace,
    radius: i64,
    trunc: usize,
    exec: Exec,
) -> Result<AnnihilationReport> {
    verify_annihilation(spec, &space.basis, radius, trunc, exec)
}

/// Values `c^J(m) ≈ φ(A⁻ᴶm)` on a box of `ℤᵈ`.
#[derive(Clone, Debug)]
pub struct CascadeGrid {
    pub level: usize,
    pub d: usize,
    /// Lower corner and extent of the stored box in `m`-coordinates.
    pub lo: Vec<i64>,
    pub shape: Vec<usize>,
    /// Row-major, last coordinate fastest.
    pub values: Vec<f64>,
    /// `A⁻ᴶ` in floats, maps `m` to `x`.
    pub to_x: DMatrix<f64>,
    pub a: DilationMatrix,
    pub coefficients: Vec<(Vec<i64>, f64)>,
    /// `sup |c^{j}(A m) − c^{j−1}(m)|` for `j = 2..=J`.
    pub level_diffs: Vec<f64>,
}

impl CascadeGrid {
    fn index(&self, m: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for i in 0..self.d {
            let o = m[i] - self.lo[i];
            if o < 0 || o as usize >= self.shape[i] {
                return None;
            }
            idx = idx * self.shape[i] + o as usize;
        }
        Some(idx)
    }

    fn coords(&self, mut idx: usize) -> Vec<i64> {
        let mut m = vec![0; self.d];
        for i in (0..self.d).rev() {
            m[i] = self.lo[i] + (idx % self.shape[i]) as i64;
            idx /= self.shape[i];
        }
        m
    }

    pub fn value(&self, m: &[i64]) -> f64 {
        self.index(m).map_or(0.0, |i| self.values[i])
    }

    pub fn point(&self, m: &[i64]) -> Vec<f64> {
        (0..self.d)
            .map(|i| (0..self.d).map(|j| self.to_x[(i, j)] * m[j] as f64).sum())
            .collect()
    }

    /// `(m, x, value)` over the stored box.
    pub fn samples(&self) -> impl Iterator<Item = (Vec<i64>, Vec<f64>, f64)> + '_ {
        (0..self.values.len()).map(move |i| {
            let m = self.coords(i);
            let x = self.point(&m);
            (m, x, self.values[i])
        })
    }

    /// Largest `‖x‖∞` with a nonzero value.
    pub fn support_radius(&self) -> f64 {
        self.samples()
            .filter(|s| s.2 != 0.0)
            .map(|(_, x, _)| x.iter().fold(0.0f64, |a, v| a.max(v.abs())))
            .fold(0.0, f64::max)
    }

    fn a_power(&self, k: usize) -> Vec<Vec<i128>> {
        let d = self.d;
        let a: Vec<Vec<i128>> = self.a.entries().iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let mut p: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| (i == j) as i128).collect()).collect();
        for _ in 0..k {
            p = (0..d)
                .map(|i| (0..d).map(|j| (0..d).map(|t| p[i][t] * a[t][j]).sum()).collect())
                .collect();
        }
        p
    }

    /// `max_class |Σ_k c^J(m − Aᴶk) − 1|`.
    pub fn partition_error(&self) -> f64 {
        let aj = self.a_power(self.level);
        let (adj, det) = adjugate(&aj);
        let classes = det.unsigned_abs();
        let mut sums: HashMap<Vec<i128>, f64> = HashMap::new();
        for i in 0..self.values.len() {
            let m = self.coords(i);
            let key: Vec<i128> = (0..self.d)
                .map(|r| {
                    let y: i128 = (0..self.d).map(|c| adj[r][c] * m[c] as i128).sum();
                    y.rem_euclid(det.abs())
                })
                .collect();
            *sums.entry(key).or_insert(0.0) += self.values[i];
        }
        if (sums.len() as u128) < classes {
            return 1.0;
        }
        sums.values().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `|Σ c^J q^{−J} − 1|`, the cell-volume Riemann sum of `φ` against `φ̂(0) = 1`.
    pub fn mass_error(&self) -> f64 {
        let vol = (self.a.q() as f64).powi(-(self.level as i32));
        (self.values.iter().sum::<f64>() * vol - 1.0).abs()
    }

    /// `max |c^J(m) − Σ_k a_k c^J(Am − Aᴶk)|`.
    pub fn refinement_residual(&self) -> f64 {
        let aj = self.a_power(self.level);
        let mut worst = 0.0f64;
        for i in 0..self.values.len() {
            let m = self.coords(i);
            let am = self.a.mul_vec(&m);
            let mut s = 0.0;
            for (k, a) in &self.coefficients {
                let t: Vec<i64> = (0..self.d)
                    .map(|r| am[r] - (0..self.d).map(|c| aj[r][c] * k[c] as i128).sum::<i128>() as i64)
                    .collect();
                s += a * self.value(&t);
            }
            worst = worst.max((self.values[i] - s).abs());
        }
        worst
    }

    /// Rows `x1,..,xd,value` for every point of `A⁻ᴶℤᵈ` inside `[lo, hi]ᵈ`,
    /// zero outside the stored support.
    pub fn to_csv(&self, lo: f64, hi: f64) -> String {
        let mut out = String::new();
        let names: Vec<String> = (1..=self.d).map(|i| format!("x{i}")).collect();
        out.push_str(&names.join(","));
        out.push_str(",value\n");
        // m = Aᴶx, so |m_i| ≤ Σ_j |(Aᴶ)_ij| · max(|lo|, |hi|)
        let aj = self.a_power(self.level);
        let r = lo.abs().max(hi.abs());
        let bounds: Vec<i64> = aj
            .iter()
            .map(|row| (row.iter().map(|v| v.abs() as f64).sum::<f64>() * r).ceil() as i64)
            .collect();
        let mut m: Vec<i64> = bounds.iter().map(|b| -b).collect();
        'outer: loop {
            let x = self.point(&m);
            if x.iter().all(|&t| t >= lo && t <= hi) {
                let cols: Vec<String> = x.iter().map(|t| fmt17(*t)).collect();
                out.push_str(&cols.join(","));
                out.push(',');
                out.push_str(&fmt17(self.value(&m)));
                out.push('\n');
            }
            for i in (0..self.d).rev() {
                if m[i] < bounds[i] {
                    m[i] += 1;
                    continue 'outer;
                }
                m[i] = -bounds[i];
            }
            break;
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

fn adjugate(m: &[Vec<i128>]) -> (Vec<Vec<i128>>, i128) {
    let d = m.len();
    let det = |a: &[Vec<i128>]| -> i128 { int_det(a) };
    let full = det(m);
    let mut adj = vec![vec![0i128; d]; d];
    if d == 1 {
        return (vec![vec![1]], full);
    }
    for i in 0..d {
        for j in 0..d {
            let minor: Vec<Vec<i128>> = (0..d)
                .filter(|&r| r != j)
                .map(|r| (0..d).filter(|&c| c != i).map(|c| m[r][c]).collect())
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[i][j] = sign * det(&minor);
        }
    }
    (adj, full)
}

fn int_det(a: &[Vec<i128>]) -> i128 {
    let d = a.len();
    match d {
        0 => 1,
        1 => a[0][0],
        _ => (0..d)
            .map(|c| {
                let minor: Vec<Vec<i128>> = a[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                    .collect();
                let s = if c % 2 == 0 { 1 } else { -1 };
                s * a[0][c] * int_det(&minor)
            })
            .sum(),
    }
}

/// Subdivision `c^{j+1}(m) = Σ_l a_{m−Al} c^j(l)` from `c^0 = δ`.
pub fn cascade_eval(spec: &ScalingFunctionSpec, levels: usize, exec: Exec) -> Result<CascadeGrid> {
    if !spec.is_stationary() {
        return Err(Error::NonstationaryCascade);
    }
    if levels == 0 {
        return Err(Error::InvalidInput("cascade needs at least one level".into()));
    }
    let m0 = spec.masks.mask_at(0);
    if !m0.has_real_coefficients() {
        return Err(Error::InvalidInput("cascade needs real refinement coefficients".into()));
    }
    let d = spec.d();
    let coefficients: Vec<(Vec<i64>, f64)> = refinement_coefficients(&m0, spec.a.q())
        .into_iter()
        .map(|(k, c)| (k, to_c64(&c).re))
        .collect();
    let a: Vec<Vec<i64>> = spec.a.entries().to_vec();
    let a128: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let (adj, det) = adjugate(&a128);
    let kmin: Vec<i64> = (0..d).map(|i| coefficients.iter().map(|(k, _)| k[i]).min().unwrap_or(0)).collect();
    let kmax: Vec<i64> = (0..d).map(|i| coefficients.iter().map(|(k, _)| k[i]).max().unwrap_or(0)).collect();

    let mut grid = CascadeGrid {
        level: 0,
        d,
        lo: vec![0; d],
        shape: vec![1; d],
        values: vec![1.0],
        to_x: DMatrix::identity(d, d),
        a: spec.a.clone(),
        coefficients: coefficients.clone(),
        level_diffs: Vec::new(),
    };
    let inv = rat_to_f64(&spec.a.to_rat().inverse().expect("invertible"));
    for level in 1..=levels {
        // bounding box of A·box + supp(a)
        let hi_old: Vec<i64> = (0..d).map(|i| grid.lo[i] + grid.shape[i] as i64 - 1).collect();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for corner in 0..(1u32 << d) {
            let c: Vec<i64> = (0..d).map(|i| if corner >> i & 1 == 1 { hi_old[i] } else { grid.lo[i] }).collect();
            let ac = spec.a.mul_vec(&c);
            for i in 0..d {
                lo[i] = lo[i].min(ac[i] + kmin[i]);
                hi[i] = hi[i].max(ac[i] + kmax[i]);
            }
        }
        let shape: Vec<usize> = (0..d).map(|i| (hi[i] - lo[i] + 1) as usize).collect();
        let total: usize = shape.iter().product();
        let next = CascadeGrid {
            lo: lo.clone(),
            shape: shape.clone(),
            values: Vec::new(),
            ..grid.clone()
        };
        let idx: Vec<usize> = (0..total).collect();
        let values = exec.map(&idx, |&i| {
            let m = next.coords(i);
            let mut s = 0.0;
            for (k, ak) in &coefficients {
                // l = A⁻¹(m − k) when integral
                let t: Vec<i128> = (0..d).map(|r| (m[r] - k[r]) as i128).collect();
                let y: Vec<i128> = (0..d).map(|r| (0..d).map(|c| adj[r][c] * t[c]).sum()).collect();
                if y.iter().all(|v| v % det == 0) {
                    let l: Vec<i64> = y.iter().map(|v| (v / det) as i64).collect();
                    s += ak * grid.value(&l);
                }
            }
            s
        });
        let mut fresh = CascadeGrid {
            level,
            values,
            to_x: &inv * &grid.to_x,
            ..next
        };
        fresh = shrink(fresh);
        if level >= 2 {
            let mut diff = 0.0f64;
            for (m, _, v) in grid.samples() {
                diff = diff.max((fresh.value(&spec.a.mul_vec(&m)) - v).abs());
            }
            fresh.level_diffs.push(diff);
            debug!("cascade level {level}: diff {diff:e}, box {:?}", fresh.shape);
            let n = fresh.level_diffs.len();
            if n >= 4 && (n - 3..n).all(|i| fresh.level_diffs[i] > fresh.level_diffs[i - 1]) {
                warn!("cascade diverges: {:?}", fresh.level_diffs);
                return Err(Error::Divergence(fresh.level_diffs));
            }
        }
        grid = fresh;
    }
    info!(
        "cascade at level {levels}: {} values, partition error {:e}",
        grid.values.len(),
        grid.partition_error()
    );
    Ok(grid)
}

/// Trims the box to the nonzero support.
fn shrink(g: CascadeGrid) -> CascadeGrid {
    let d = g.d;
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for i in 0..g.values.len() {
        if g.values[i] != 0.0 {
            let m = g.coords(i);
            for k in 0..d {
                lo[k] = lo[k].min(m[k]);
                hi[k] = hi[k].max(m[k]);
            }
        }
    }
    if lo[0] == i64::MAX {
        return g;
    }
    let shape: Vec<usize> = (0..d).map(|i| (hi[i] - lo[i] + 1) as usize).collect();
    let total: usize = shape.iter().product();
    let mut out = CascadeGrid {
        lo,
        shape,
        values: vec![0.0; total],
        ..g.clone()
    };
    for i in 0..total {
        let m = out.coords(i);
        out.values[i] = g.value(&m);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproductionReport {
    pub polynomial: String,
    /// Sup residual on the interior.
    pub residual: f64,
    pub window: f64,
    pub margin: f64,
    pub interior_points: usize,
    pub shifts: usize,
    pub coefficients: BTreeMap<String, f64>,
}

/// Least-squares `Σ c_k φ(x − k) ≈ P(x)` over grid points with
/// `‖x‖∞ ≤ window`, residual measured where `‖x‖∞ ≤ window − margin`.
pub fn verify_reproduction(grid: &CascadeGrid, p: &MultiPoly, window: f64) -> Result<ReproductionReport> {
    let d = grid.d;
    let rho = grid.support_radius();
    let margin = rho.ceil().max(1.0);
    if window <= margin {
        return Err(Error::InvalidInput(format!(
            "window {window} must exceed the support margin {margin}"
        )));
    }
    let reach = (window + rho).floor() as i64;
    let shifts = lattice_box(d, reach);
    let shift_index: HashMap<Vec<i64>, usize> = shifts.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let aj = grid.a_power(grid.level);
    let aj_k = |k: &[i64]| -> Vec<i64> {
        (0..d)
            .map(|r| (0..d).map(|c| aj[r][c] * k[c] as i128).sum::<i128>() as i64)
            .collect()
    };
    // grid points m with ‖A⁻ᴶm‖∞ ≤ window, found through the support boxes of the shifts
    let mut points: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    for k in &shifts {
        let off = aj_k(k);
        for (m, _, v) in grid.samples() {
            if v == 0.0 {
                continue;
            }
            let mm: Vec<i64> = m.iter().zip(&off).map(|(a, b)| a + b).collect();
            if points.contains_key(&mm) {
                continue;
            }
            let x = grid.point(&mm);
            if x.iter().all(|t| t.abs() <= window + 1e-12) {
                points.insert(mm, x);
            }
        }
    }
    let n = shifts.len();
    let mut ata = DMatrix::<f64>::zeros(n, n);
    let mut atb = DVector::<f64>::zeros(n);
    let mut rows: Vec<(Vec<(usize, f64)>, f64, bool)> = Vec::with_capacity(points.len());
    let interior = window - margin;
    for (m, x) in &points {
        let target = p.eval_f64(x);
        if target.im.abs() > 0.0 {
            return Err(Error::InvalidInput("reproduction needs a real polynomial".into()));
        }
        let mut row = Vec::new();
        for k in &shifts {
            let off = aj_k(k);
            let t: Vec<i64> = m.iter().zip(&off).map(|(a, b)| a - b).collect();
            let v = grid.value(&t);
            if v != 0.0 {
                row.push((shift_index[k], v));
            }
        }
        for &(i, vi) in &row {
            atb[i] += vi * target.re;
            for &(j, vj) in &row {
                ata[(i, j)] += vi * vj;
            }
        }
        rows.push((row, target.re, x.iter().all(|t| t.abs() <= interior + 1e-12)));
    }
    let svd = ata.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    let c = svd.solve(&atb, eps).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut residual = 0.0f64;
    let mut interior_points = 0;
    for (row, target, inside) in &rows {
        if *inside {
            interior_points += 1;
            let fit: f64 = row.iter().map(|&(i, v)| c[i] * v).sum();
            residual = residual.max((fit - target).abs());
        }
    }
    let coefficients = shifts
        .iter()
        .enumerate()
        .map(|(i, k)| (format!("{k:?}"), c[i]))
        .collect();
    Ok(ReproductionReport {
        polynomial: p.to_string(),
        residual,
        window,
        margin,
        interior_points,
        shifts: n,
        coefficients,
    })
}

fn lattice_box(d: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = window_points(d, r);
    out.push(vec![0; d]);
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_inverts() {
        let m = vec![vec![1i128, 1], vec![1, -1]];
        let (adj, det) = adjugate(&m);
        assert_eq!(det, -2);
        assert_eq!(adj, vec![vec![-1, -1], vec![-1, 1]]);
        assert_eq!(int_det(&[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]), 8);
    }

    #[test]
    fn contraction_matches_diff_apply() {
        // P(−iD) applied to a polynomial jet equals the derivative formula at 0
        let p = MultiPoly::parse(2, "x^2 - 3*x*y").unwrap();
        let f = MultiPoly::parse(2, "1 + 2*x + x^2 + 5*x*y + 7*y^2").unwrap();
        let basis = GradedBasis::new(2, 2);
        let jet: Vec<Complex64> = f.coefficient_vector(&basis).iter().map(to_c64).collect();
        let direct = crate::polyops::diff_apply(&p, &f).coeff(&crate::multiindex::MultiIndex::zero(2));
        assert!((contract(&p, &jet, &basis) - to_c64(&direct)).norm() < 1e-12);
    }
}
