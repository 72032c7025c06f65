//! Derivative matrices at the lattice, the order of the Strang–Fix
//! conditions and the shift-invariant polynomial space.

use std::collections::BTreeMap;

use log::{debug, info, warn};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::isotropic::window_points;
use crate::multiindex::{dim_g, GradedBasis};
use crate::numeric::{exact_to_c64, kernel_svd, max_principal_sine, orthonormal_basis, JetAlgebra};
use crate::par::Exec;
use crate::polyops::{bigd_block, bigd_matrix, MultiPoly, PolynomialSpace};
use crate::ratcore::{
    canonical_span, kernel_basis, rank, rat, span_contains, span_dim, subspace_intersect, GaussianRational,
    RatMatrix, Rational,
};

/// Relative singular value cut for numeric kernels.
pub const SVD_REL_TOL: f64 = 1e-9;
/// Largest principal-angle sine accepted as route agreement.
pub const ANGLE_TOL: f64 = 1e-7;

/// Taylor jet of `f̂` at a lattice point `2πn`.
#[derive(Clone, Debug)]
pub enum Jet {
    Exact(MultiPoly),
    /// Coefficients along `ĉ𝒜_L` and an error estimate.
    Numeric { coeffs: Vec<Complex64>, error: f64 },
}

impl Jet {
    pub fn to_c64(&self, basis: &GradedBasis) -> Vec<Complex64> {
        match self {
            Jet::Exact(p) => exact_to_c64(&p.coefficient_vector(basis)),
            Jet::Numeric { coeffs, .. } => coeffs[..basis.len()].to_vec(),
        }
    }

    pub fn error(&self) -> f64 {
        match self {
            Jet::Exact(_) => 0.0,
            Jet::Numeric { error, .. } => *error,
        }
    }
}

/// Source of jets of `f̂` at `2πn`, `n ≠ 0`. Implementations are shared
/// across threads read-only.
pub trait JetProvider: Sync {
    fn dim(&self) -> usize;

    fn jet(&self, n: &[i64], l: usize) -> Result<Jet>;

    /// Points with equal keys yield equal kernels at every degree, so only
    /// one of them needs a block.
    fn kernel_key(&self, _n: &[i64]) -> Result<Option<Vec<i64>>> {
        Ok(None)
    }
}

/// Stacked `ĉ𝐃_L f̂(2πn)` blocks over `0 < ‖n‖∞ ≤ N`.
#[derive(Clone, Debug)]
pub struct DeltaMatrix {
    pub l: usize,
    pub window: Vec<Vec<i64>>,
    pub matrix: DeltaEntries,
}

#[derive(Clone, Debug)]
pub enum DeltaEntries {
    Exact(RatMatrix),
    Numeric(DMatrix<Complex64>),
}

impl DeltaMatrix {
    pub fn ncols(&self) -> usize {
        match &self.matrix {
            DeltaEntries::Exact(m) => m.ncols(),
            DeltaEntries::Numeric(m) => m.ncols(),
        }
    }

    pub fn kernel_dim(&self) -> usize {
        match &self.matrix {
            DeltaEntries::Exact(m) => m.ncols() - rank(m),
            DeltaEntries::Numeric(m) => kernel_svd(m, SVD_REL_TOL, None).ncols(),
        }
    }
}

pub fn delta_matrix(jp: &dyn JetProvider, l: usize, radius: i64, exec: Exec) -> Result<DeltaMatrix> {
    if radius < 1 {
        return Err(Error::InvalidInput("window radius must be at least 1".into()));
    }
    let window = window_points(jp.dim(), radius);
    let jets = exec.try_map(&window, |n| jp.jet(n, l))?;
    let matrix = if jets.iter().all(|j| matches!(j, Jet::Exact(_))) {
        let mut acc: Option<RatMatrix> = None;
        for j in &jets {
            let Jet::Exact(p) = j else { unreachable!() };
            let b = bigd_matrix(&p.truncate(l), l);
            acc = Some(match acc {
                None => b,
                Some(a) => a.vstack(&b),
            });
        }
        DeltaEntries::Exact(acc.expect("nonempty window"))
    } else {
        let alg = JetAlgebra::new(jp.dim(), l);
        DeltaEntries::Numeric(stack_numeric(&alg, &jets))
    };
    Ok(DeltaMatrix { l, window, matrix })
}

fn stack_numeric(alg: &JetAlgebra, jets: &[Jet]) -> DMatrix<Complex64> {
    let n = alg.len();
    let mut m = DMatrix::zeros(n * jets.len(), n);
    for (b, j) in jets.iter().enumerate() {
        let block = alg.bigd(&j.to_c64(&alg.basis));
        m.view_mut((b * n, 0), (n, n)).copy_from(&block);
    }
    m
}

/// Blocks built from jets scaled to unit largest coefficient (over the
/// full jet, not the truncation) with balanced rows, so that an absolute
/// threshold separates vanishing rows.
fn stack_normalized(alg: &JetAlgebra, jets: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let n = alg.len();
    let mut m = DMatrix::zeros(n * jets.len(), n);
    for (b, j) in jets.iter().enumerate() {
        let block = alg.bigd_balanced(&j[..n]);
        m.view_mut((b * n, 0), (n, n)).copy_from(&block);
    }
    m
}

fn normalized_jets(jets: &[Jet], basis: &GradedBasis) -> Vec<Vec<Complex64>> {
    jets.iter()
        .map(|j| {
            let v = j.to_c64(basis);
            let s = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if s > 0.0 {
                v.into_iter().map(|z| z / s).collect()
            } else {
                v
            }
        })
        .collect()
}

fn numeric_kernel(d: usize, jets: &[Vec<Complex64>], l: usize) -> DMatrix<Complex64> {
    let alg = JetAlgebra::new(d, l);
    kernel_svd(&stack_normalized(&alg, jets), SVD_REL_TOL, Some(1.0))
}

/// Jets at the window, one per kernel key.
fn distinct_jets(jp: &dyn JetProvider, l: usize, radius: i64, exec: Exec) -> Result<Vec<Jet>> {
    let window = window_points(jp.dim(), radius);
    let keys = exec.try_map(&window, |n| jp.kernel_key(n))?;
    let mut reps: BTreeMap<Vec<i64>, Vec<i64>> = BTreeMap::new();
    let mut points = Vec::new();
    for (n, k) in window.into_iter().zip(keys) {
        match k {
            Some(k) => {
                reps.entry(k).or_insert_with(|| n.clone());
            }
            None => points.push(n),
        }
    }
    points.extend(reps.into_values());
    exec.try_map(&points, |n| jp.jet(n, l))
}

/// `ker ĉΔ_L` from exact jets, intersecting one block at a time.
fn exact_kernel(jets: &[&MultiPoly], l: usize) -> Vec<Vec<GaussianRational>> {
    let n = dim_g(jets.first().map_or(1, |p| p.dim()), l as i64);
    let mut k: Vec<Vec<GaussianRational>> = (0..n)
        .map(|i| {
            let mut v = vec![GaussianRational::zero(); n];
            v[i] = GaussianRational::one();
            v
        })
        .collect();
    for p in jets {
        if k.is_empty() {
            break;
        }
        let b = bigd_matrix(&p.truncate(l), l);
        // B·K, then combine the current basis by its kernel
        let cols: Vec<Vec<GaussianRational>> = k.iter().map(|v| b.mul_vec(v)).collect();
        let mut bk = RatMatrix::zeros(b.nrows(), k.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                bk[(i, j)] = x.clone();
            }
        }
        let combos = kernel_basis(&bk);
        k = combos
            .iter()
            .map(|c| {
                let mut v = vec![GaussianRational::zero(); n];
                for (coef, basis) in c.iter().zip(&k) {
                    if coef.is_zero() {
                        continue;
                    }
                    for (slot, x) in v.iter_mut().zip(basis) {
                        *slot = &*slot + &(coef * x);
                    }
                }
                v
            })
            .collect();
    }
    canonical_span(&k, n)
}

/// `dim(V ∩ Π≤l)` for each `l ≤ L`, given `V ⊂ Π≤L` in graded coordinates.
fn filtration_dims(kernel: &[Vec<GaussianRational>], d: usize, big_l: usize) -> Vec<usize> {
    let n = dim_g(d, big_l as i64);
    (0..=big_l)
        .map(|l| {
            let lo = dim_g(d, l as i64);
            if lo == n {
                return kernel.len();
            }
            let high: Vec<Vec<GaussianRational>> = kernel.iter().map(|v| v[lo..].to_vec()).collect();
            kernel.len() - span_dim(&high, n - lo)
        })
        .collect()
}

/// Order from the dimensions `dims[l] = dim ker ĉΔ_l`, with both
/// definitions cross-checked.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderReport {
    pub order: Option<usize>,
    pub dims: Vec<usize>,
    pub graded: Vec<usize>,
    /// First `l` at which the dimension reaches its maximum.
    pub plateau: Option<usize>,
    /// Last `l` before the first empty graded part.
    pub graded_def: Option<usize>,
}

pub fn order_from_dims(dims: &[usize], l_max: usize) -> Result<OrderReport> {
    let graded: Vec<usize> = dims
        .iter()
        .enumerate()
        .map(|(l, &x)| if l == 0 { x } else { x - dims[l - 1] })
        .collect();
    let report = |order, plateau, graded_def| OrderReport {
        order,
        dims: dims.to_vec(),
        graded: graded.clone(),
        plateau,
        graded_def,
    };
    if dims.first().copied().unwrap_or(0) == 0 {
        return Ok(report(None, None, None));
    }
    let Some(first_zero) = graded.iter().position(|&g| g == 0) else {
        return Err(Error::OrderExceedsBound(l_max));
    };
    let l2 = first_zero - 1;
    let top = *dims.iter().max().expect("nonempty");
    let l1 = dims.iter().position(|&x| x == top).expect("max exists");
    if l1 != l2 {
        return Err(Error::DefinitionMismatch {
            plateau: l1,
            graded: l2,
        });
    }
    Ok(report(Some(l2), Some(l1), Some(l2)))
}

/// Exact kernel data at one window radius.
struct ExactAnalysis {
    report: OrderReport,
    /// `ker ĉΔ_{l_top}`.
    kernel: Vec<Vec<GaussianRational>>,
    l_top: usize,
}

fn exact_analysis(jp: &dyn JetProvider, l_max: usize, radius: i64, exec: Exec) -> Result<ExactAnalysis> {
    let d = jp.dim();
    let jets = distinct_jets(jp, l_max, radius, exec)?;
    let polys: Vec<&MultiPoly> = jets
        .iter()
        .map(|j| match j {
            Jet::Exact(p) => Ok(p),
            Jet::Numeric { .. } => Err(Error::InvalidInput("the exact route needs exact jets".into())),
        })
        .collect::<Result<_>>()?;
    debug!("exact route: {} distinct blocks at radius {radius}", polys.len());
    let kernel = exact_kernel(&polys, l_max);
    let dims = filtration_dims(&kernel, d, l_max);
    let report = order_from_dims(&dims, l_max)?;
    Ok(ExactAnalysis {
        report,
        kernel,
        l_top: l_max,
    })
}

pub fn strang_fix_order(jp: &dyn JetProvider, l_max: usize, radius: i64, exec: Exec) -> Result<OrderReport> {
    let window = window_points(jp.dim(), radius);
    let probe = jp.jet(&window[0], 0)?;
    match probe {
        Jet::Exact(_) => Ok(exact_analysis(jp, l_max, radius, exec)?.report),
        Jet::Numeric { .. } => {
            let jets = distinct_jets(jp, l_max, radius, exec)?;
            let dims = numeric_dims(jp.dim(), &jets, l_max);
            order_from_dims(&dims, l_max)
        }
    }
}

fn numeric_dims(d: usize, jets: &[Jet], l_max: usize) -> Vec<usize> {
    let full = normalized_jets(jets, &GradedBasis::new(d, l_max));
    (0..=l_max).map(|l| numeric_kernel(d, &full, l).ncols()).collect()
}

#[derive(Clone, Debug)]
pub struct AnalysisConfig {
    pub window: i64,
    pub l_max: usize,
    pub max_radius: i64,
    pub exec: Exec,
}

impl AnalysisConfig {
    /// Defaults for a scheme of order `m`.
    pub fn for_order(m: u32) -> Self {
        AnalysisConfig {
            window: 2,
            l_max: 2 * m as usize + 6,
            max_radius: 16,
            exec: Exec::default(),
        }
    }
}

/// Comparison of the numeric and exact kernels at the order.
#[derive(Clone, Debug, Serialize)]
pub struct RouteAgreement {
    pub numeric_dims: Vec<usize>,
    pub max_sine: f64,
    pub max_jet_error: f64,
    pub agree: bool,
}

#[derive(Clone, Debug)]
pub struct SFResult {
    pub order: Option<usize>,
    pub basis: GradedBasis,
    /// `ker ĉΔ_L` in graded coordinates.
    pub kernel: Vec<Vec<GaussianRational>>,
    pub kernel_dims: Vec<usize>,
    pub graded_dims: Vec<usize>,
    pub space: PolynomialSpace,
    pub shift_invariant: bool,
    pub scale_invariant: bool,
    pub window_used: i64,
    pub route: Option<RouteAgreement>,
}

impl SFResult {
    /// `V^l`: the part of the kernel with top degree exactly `l`, as the
    /// quotient dimension.
    pub fn graded_part_dim(&self, l: usize) -> usize {
        self.graded_dims.get(l).copied().unwrap_or(0)
    }
}

/// Shifts used by the literal translation test.
pub fn test_shifts(d: usize) -> Vec<Vec<Rational>> {
    let pool = [(1, 3), (-2, 5), (7, 4), (1, 2), (-3, 7), (5, 3), (2, 9), (-5, 6)];
    (0..3)
        .map(|s| (0..d).map(|i| { let (p, q) = pool[(3 * s + i) % pool.len()]; rat(p, q) }).collect())
        .collect()
}

/// Doubles the window until the kernel dimensions agree at `N` and `2N`,
/// then extracts the space and runs the invariance checks.
pub fn shift_invariant_space(
    exact: &dyn JetProvider,
    numeric: Option<&dyn JetProvider>,
    cfg: &AnalysisConfig,
) -> Result<SFResult> {
    let d = exact.dim();
    let mut radius = cfg.window.max(1);
    let mut history = Vec::new();
    let mut current = exact_analysis(exact, cfg.l_max, radius, cfg.exec)?;
    history.push(current.kernel.len());
    loop {
        if 2 * radius > cfg.max_radius {
            return Err(Error::NoStabilization(history));
        }
        let next = exact_analysis(exact, cfg.l_max, 2 * radius, cfg.exec)?;
        history.push(next.kernel.len());
        if next.report == current.report {
            break;
        }
        debug!("kernel still shrinking at radius {radius}: {:?}", history);
        radius *= 2;
        current = next;
    }
    let report = current.report.clone();
    let big_l = report.order.unwrap_or(0);
    let basis = GradedBasis::new(d, big_l);
    let kernel: Vec<Vec<GaussianRational>> = match report.order {
        None => Vec::new(),
        Some(l) => {
            let n = dim_g(d, l as i64);
            debug_assert!(current.l_top >= l);
            let kept: Vec<Vec<GaussianRational>> = current.kernel.iter().map(|v| v[..n].to_vec()).collect();
            canonical_span(&kept, n)
        }
    };
    let mut space = PolynomialSpace::from_vectors(&basis, &kernel);
    let shift_invariant = space.closed_under_shifts(&test_shifts(d));
    if !shift_invariant {
        warn!("the computed space is not closed under translations");
    }
    let scale_invariant = scale_invariance_flag(&basis, &kernel);
    space.shift_invariant = shift_invariant;
    space.scale_invariant = scale_invariant;
    let route = match (numeric, report.order) {
        (Some(np), Some(l)) => Some(route_agreement(np, &kernel, l, radius, cfg.exec)?),
        _ => None,
    };
    info!(
        "order {:?}, space of dimension {} (window {radius})",
        report.order,
        space.dim()
    );
    Ok(SFResult {
        order: report.order,
        basis,
        kernel,
        kernel_dims: report.dims.clone(),
        graded_dims: report.graded.clone(),
        space,
        shift_invariant,
        scale_invariant,
        window_used: radius,
        route,
    })
}

/// Numeric kernel of `ĉΔ_l` for every `l ≤ L` and the angle at `L`.
pub fn route_agreement(
    np: &dyn JetProvider,
    kernel: &[Vec<GaussianRational>],
    big_l: usize,
    radius: i64,
    exec: Exec,
) -> Result<RouteAgreement> {
    let d = np.dim();
    let window = window_points(d, radius);
    let jets = exec.try_map(&window, |n| np.jet(n, big_l))?;
    let max_jet_error = jets.iter().map(Jet::error).fold(0.0, f64::max);
    let numeric_dims = numeric_dims(d, &jets, big_l);
    let full = normalized_jets(&jets, &GradedBasis::new(d, big_l));
    let qn = numeric_kernel(d, &full, big_l);
    let exact_c: Vec<Vec<Complex64>> = kernel.iter().map(|v| exact_to_c64(v)).collect();
    let qe = orthonormal_basis(&exact_c, dim_g(d, big_l as i64));
    let max_sine = max_principal_sine(&qn, &qe);
    let agree = max_sine < ANGLE_TOL && qn.ncols() == qe.ncols();
    if !agree {
        warn!(
            "numeric and exact kernels differ: dims {} vs {}, sine {max_sine:e}",
            qn.ncols(),
            qe.ncols()
        );
    }
    Ok(RouteAgreement {
        numeric_dims,
        max_sine,
        max_jet_error,
        agree,
    })
}

fn layer_slice(basis: &GradedBasis, v: &[GaussianRational], l: usize) -> Vec<GaussianRational> {
    let r = basis.layer_range(l);
    v.iter()
        .enumerate()
        .map(|(i, x)| if r.contains(&i) { x.clone() } else { GaussianRational::zero() })
        .collect()
}

/// Every graded slice of every kernel vector lies in the kernel.
pub fn scale_invariance_flag(basis: &GradedBasis, kernel: &[Vec<GaussianRational>]) -> bool {
    kernel.iter().all(|v| {
        (0..=basis.l).all(|l| {
            let s = layer_slice(basis, v, l);
            s.iter().all(Zero::is_zero) || span_contains(kernel, &s)
        })
    })
}

/// `⊕_l (V ∩ layer l)`: the largest subspace whose slices stay inside.
pub fn largest_affine_subspace(result: &SFResult) -> PolynomialSpace {
    let basis = &result.basis;
    if result.scale_invariant || result.kernel.is_empty() {
        let mut s = result.space.clone();
        s.scale_invariant = !result.kernel.is_empty() || s.dim() == 0;
        return s;
    }
    let n = basis.len();
    let mut vectors = Vec::new();
    for l in 0..=basis.l {
        let units: Vec<Vec<GaussianRational>> = basis
            .layer_range(l)
            .map(|i| {
                let mut v = vec![GaussianRational::zero(); n];
                v[i] = GaussianRational::one();
                v
            })
            .collect();
        vectors.extend(subspace_intersect(&result.kernel, &units));
    }
    let mut s = PolynomialSpace::from_vectors(basis, &vectors);
    s.shift_invariant = s.closed_under_shifts(&test_shifts(basis.d));
    s.scale_invariant = true;
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub l: usize,
    pub big_l: usize,
    pub rank: usize,
    pub full: usize,
    /// Some derivative of order `L − l` is nonzero.
    pub derivative_nonzero: bool,
    pub ok: bool,
}

/// The block `𝐃^l_L` has rank `d(l)` when some order-`(L−l)` coefficient
/// of the jet is nonzero and rank 0 otherwise.
pub fn rank_property_check(jet: &MultiPoly, l: usize, big_l: usize) -> RankReport {
    assert!(l <= big_l);
    let block = bigd_block(jet, l, big_l);
    let r = rank(&block);
    let full = block.nrows();
    let derivative_nonzero = !jet.homogeneous_part(big_l - l).is_zero();
    let ok = if derivative_nonzero { r == full } else { r == 0 };
    RankReport {
        l,
        big_l,
        rank: r,
        full,
        derivative_nonzero,
        ok,
    }
}
