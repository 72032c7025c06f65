//! Floating point jets, derivative matrices, SVD kernels and principal angles.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::multiindex::{mbinom, GradedBasis};
use crate::ratcore::{to_c64, GaussianRational};

/// Multiplication table for truncated power series along `ĉ𝒜_L`.
#[derive(Clone, Debug)]
pub struct JetAlgebra {
    pub basis: GradedBasis,
    table: Vec<(usize, usize, usize)>,
    /// `(row, col, γ-index, (−i)^{|γ|} mbinom(α,β) γ!)` for `ĉ𝐃_L`.
    template: Vec<(usize, usize, usize, Complex64)>,
    /// Largest combinatorial factor per row, divided out of `template`.
    row_scale: Vec<f64>,
}

impl JetAlgebra {
    pub fn new(d: usize, l: usize) -> Self {
        let basis = GradedBasis::new(d, l);
        let mut table = Vec::new();
        let mut template = Vec::new();
        let mut row_scale = vec![0.0f64; basis.len()];
        for (i, a) in basis.graded.iter().enumerate() {
            for (j, b) in basis.graded.iter().enumerate() {
                if a.order() + b.order() <= l {
                    let k = basis.position(&a.add(b)).expect("within degree");
                    table.push((i, j, k));
                }
                // a as column α, b as row β
                if let Some(g) = a.checked_sub(b) {
                    let f = (mbinom(a, b) * g.factorial()).to_f64().expect("small factor");
                    let phase = match g.order() % 4 {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, -1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, 1.0),
                    };
                    let gi = basis.position(&g).expect("within degree");
                    template.push((j, i, gi, phase * f));
                    row_scale[j] = row_scale[j].max(f);
                }
            }
        }
        for t in template.iter_mut() {
            t.3 /= row_scale[t.0];
        }
        JetAlgebra {
            basis,
            table,
            template,
            row_scale,
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn one(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::zero(); self.len()];
        v[0] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn mul(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); self.len()];
        for &(i, j, k) in &self.table {
            out[k] += a[i] * b[j];
        }
        out
    }

    /// `ĉ𝐃_L` of a float jet.
    pub fn bigd(&self, jet: &[Complex64]) -> DMatrix<Complex64> {
        let mut m = self.bigd_balanced(jet);
        for (r, s) in self.row_scale.iter().enumerate() {
            m.row_mut(r).scale_mut(*s);
        }
        m
    }

    /// `ĉ𝐃_L` with each row divided by its largest combinatorial factor.
    /// The scaling does not depend on the jet, so rows that vanish stay small.
    pub fn bigd_balanced(&self, jet: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for &(r, c, g, f) in &self.template {
            m[(r, c)] += f * jet[g];
        }
        m
    }
}

pub fn exact_to_c64(v: &[GaussianRational]) -> Vec<Complex64> {
    v.iter().map(to_c64).collect()
}

/// Orthonormal kernel basis (as columns) by SVD. Singular values at most
/// `tol · scale` count as zero; `scale` defaults to the largest one.
pub fn kernel_svd(m: &DMatrix<Complex64>, tol: f64, scale: Option<f64>) -> DMatrix<Complex64> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    // SVD wants at least as many rows as columns
    let a = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let cut = tol * scale.unwrap_or_else(|| svd.singular_values.max());
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let mut out = DMatrix::zeros(cols, null.len());
    for (c, &k) in null.iter().enumerate() {
        for j in 0..cols {
            out[(j, c)] = v_t[(k, j)].conj();
        }
    }
    out
}

/// Orthonormal basis of the span of `vectors`.
pub fn orthonormal_basis(vectors: &[Vec<Complex64>], len: usize) -> DMatrix<Complex64> {
    if vectors.is_empty() {
        return DMatrix::zeros(len, 0);
    }
    let m = DMatrix::from_fn(len, vectors.len(), |i, j| vectors[j][i]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > 1e-12 * smax)
        .collect();
    DMatrix::from_fn(len, keep.len(), |i, j| u[(i, keep[j])])
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal columns; 1 when dimensions differ.
pub fn max_principal_sine(qa: &DMatrix<Complex64>, qb: &DMatrix<Complex64>) -> f64 {
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let one_way = |x: &DMatrix<Complex64>, y: &DMatrix<Complex64>| {
        let r = y - x * (x.adjoint() * y);
        r.singular_values().max()
    };
    one_way(qa, qb).max(one_way(qb, qa))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_product_matches_series() {
        // (1 + x)(1 - x) = 1 - x^2 in one variable
        let alg = JetAlgebra::new(1, 3);
        let c = |x: f64| Complex64::new(x, 0.0);
        let a = vec![c(1.0), c(1.0), c(0.0), c(0.0)];
        let b = vec![c(1.0), c(-1.0), c(0.0), c(0.0)];
        assert_eq!(alg.mul(&a, &b), vec![c(1.0), c(0.0), c(-1.0), c(0.0)]);
    }

    #[test]
    fn float_template_matches_exact_matrix() {
        use crate::polyops::{bigd_matrix, MultiPoly};
        let w = MultiPoly::parse(2, "2*x^2 + x*y + y^2 + 3i*x^3").unwrap();
        let alg = JetAlgebra::new(2, 4);
        let jet = exact_to_c64(&w.coefficient_vector(&alg.basis));
        let f = alg.bigd(&jet);
        let e = bigd_matrix(&w, 4);
        for i in 0..f.nrows() {
            for j in 0..f.ncols() {
                assert!((f[(i, j)] - to_c64(&e[(i, j)])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_kernel_of_laplacian_row() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let m = DMatrix::from_row_slice(1, 3, &[c(-2.0), c(0.0), c(-2.0)]);
        let k = kernel_svd(&m, 1e-9, None);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).iter().all(|z| z.norm() < 1e-12));
        let expect = orthonormal_basis(&[vec![c(1.0), c(0.0), c(-1.0)], vec![c(0.0), c(1.0), c(0.0)]], 3);
        assert!(max_principal_sine(&k, &expect) < 1e-12);
        let other = orthonormal_basis(&[vec![c(1.0), c(0.0), c(0.0)], vec![c(0.0), c(1.0), c(0.0)]], 3);
        assert!(max_principal_sine(&k, &other) > 0.5);
    }
}
