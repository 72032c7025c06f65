//! Regression values for every shipped construction, plus the behaviours
//! around them that the acceptance suite does not pin down.

mod common;

use common::*;
use ellipsf::error::Error;
use ellipsf::masks::NonstationaryKind;
use ellipsf::multiindex::GradedBasis;
use ellipsf::presets::quincunx;
use ellipsf::scalingfn::{
    cascade_eval, phihat_jet_numeric, phihat_jet_symbolic, verify_space_annihilation, ScalingFunctionSpec,
    DEFAULT_TRUNC,
};
use ellipsf::strangfix::{largest_affine_subspace, AnalysisConfig};
use ellipsf::{serial, Exec, MultiPoly};

#[test]
fn orders_and_dimensions() {
    let expected = [
        ("quincunx", Some(4), 8),
        ("second", Some(3), 7),
        ("diagonal", Some(4), 8),
        ("quincunx r=6", Some(8), 16),
        ("quincunx r=8", Some(8), 16),
        ("quincunx m=2", Some(8), 24),
        ("quincunx X=2iξ₁", Some(3), 4),
        ("diagonal X=i(ξ₁³+ξ₂³)", Some(4), 8),
        ("quincunx W+W²", Some(8), 16),
    ];
    for (f, (name, order, dim)) in all_fixtures().iter().zip(expected) {
        assert_eq!(f.name, name);
        let r = f.analyze();
        assert_eq!((r.order, r.space.dim()), (order, dim), "{name}");
        assert_eq!(r.window_used, 2, "{name}");
        assert!(r.shift_invariant, "{name}");
    }
}

#[test]
fn separable_g_admits_the_quartic() {
    // G = 4 − 2cos ξ₁ − 2cos ξ₂ has jet ξ₁² + ξ₂² − (ξ₁⁴ + ξ₂⁴)/12 + …, and
    // ξ₁⁴ + ξ₂⁴ at −iD kills x³y − xy³
    let p = poly("x^3*y - x*y^3");
    assert!(partial(&p, 4, 0).add(&partial(&p, 0, 4)).is_zero());
    assert!(quincunx_m1().analyze().space.contains(&p));
    assert!(diagonal_m1().analyze().space.contains(&p));
    assert!(!second_m1().analyze().space.contains(&p));
}

#[test]
fn higher_degree_spaces_are_harmonic_through_degree_seven() {
    let r = quincunx_r6().analyze();
    let harmonic_upto_7 = [
        "x^5 - 10*x^3*y^2 + 5*x*y^4",
        "x^6 - 15*x^4*y^2 + 15*x^2*y^4 - y^6",
        "x^7 - 21*x^5*y^2 + 35*x^3*y^4 - 7*x*y^6",
        "7*x^6*y - 35*x^4*y^3 + 21*x^2*y^5 - y^7",
        "x^7*y - 7*x^5*y^3 + 7*x^3*y^5 - x*y^7",
    ];
    for p in harmonic_upto_7 {
        assert!(r.space.contains(&poly(p)), "{p}");
    }
    assert!(!r.space.contains(&poly("x^8 - 28*x^6*y^2 + 70*x^4*y^4 - 28*x^2*y^6 + y^8")));
    assert!(r.space.equals(&quincunx_r8().analyze().space));
}

#[test]
fn automatic_correction_matches_the_hand_one() {
    let auto6 = ScalingFunctionSpec::higher(&quincunx(), 6, None, 1).unwrap();
    let auto8 = ScalingFunctionSpec::higher(&quincunx(), 8, None, 1).unwrap();
    assert_eq!(auto6.masks.m0, quincunx_r6().spec.masks.m0);
    assert_eq!(auto8.masks.m0, quincunx_r8().spec.masks.m0);
}

#[test]
fn nonstationary_quincunx_operator() {
    // X + W = 2iξ₁ + ξ₁² + ξ₂² acts as 2∂x − Δ
    let r = quincunx_nonstat().analyze();
    for p in &r.space.basis {
        let op = partial(p, 1, 0).scale(&ellipsf::ratcore::real(ellipsf::ratcore::int(2))).sub(&laplacian(p));
        assert!(op.is_zero(), "{p}");
    }
    assert!(r.space.contains(&poly("y^3 + 3*x*y")));
}

#[test]
fn nonstationary_diagonal_affine_part() {
    let r = diagonal_nonstat().analyze();
    let affine = largest_affine_subspace(&r);
    let expected = space(&["1", "x", "y", "x^2 - y^2", "x*y", "x^3 + 3*x^2*y - 3*x*y^2 - y^3"]);
    assert!(affine.equals(&expected), "{:?}", texts(&affine));
    assert!(affine.scale_invariant);
}

#[test]
fn sum_of_powers_matches_higher_degree() {
    let r = sum_of_powers().analyze();
    assert!(r.scale_invariant);
    assert!(r.space.equals(&quincunx_r6().analyze().space));
}

#[test]
fn order_definitions_agree() {
    for f in all_fixtures() {
        let sym = f.spec.symbolic();
        let rep = ellipsf::strangfix::strang_fix_order(&sym, f.spec.analysis_config().l_max, 2, Exec::Parallel)
            .unwrap();
        assert_eq!(rep.plateau, rep.graded_def, "{}", f.name);
        assert_eq!(rep.order, rep.plateau, "{}", f.name);
    }
}

#[test]
fn degree_bound_is_reported() {
    let f = quincunx_r6();
    let mut cfg = AnalysisConfig::for_order(1);
    cfg.l_max = 6;
    let err = f.spec.analyze(&cfg, DEFAULT_TRUNC).unwrap_err();
    assert_eq!(err, Error::OrderExceedsBound(6));
}

#[test]
fn symbolic_and_numeric_jets_share_the_leading_layer() {
    for f in all_fixtures() {
        let l = 6;
        let basis = GradedBasis::new(2, l);
        for n in [[1i64, 0], [0, 1], [1, 1], [-2, 1], [2, 2], [0, -2]] {
            let sym = phihat_jet_symbolic(&f.spec, &n, l).unwrap();
            let (num, _) = phihat_jet_numeric(&f.spec, &n, l, DEFAULT_TRUNC).unwrap();
            let low = sym.low_degree().expect("nonzero jet");
            let (lead, _) = sym.terms().next().unwrap();
            let scale = num[basis.position(lead).unwrap()];
            for i in basis.layer_range(low) {
                let alpha = &basis.graded[i];
                let want = ellipsf::ratcore::to_c64(&sym.coeff(alpha));
                let got = num[i] / scale;
                assert!((want - got).norm() < 1e-7, "{} at {n:?}, {alpha:?}: {want} vs {got}", f.name);
            }
        }
    }
}

#[test]
fn space_is_annihilated_numerically() {
    for f in [quincunx_m1(), second_m1(), quincunx_nonstat(), diagonal_nonstat()] {
        let r = f.analyze();
        let rep = verify_space_annihilation(&f.spec, &r.space, 3, DEFAULT_TRUNC, Exec::Parallel).unwrap();
        assert!(rep.max < 1e-9, "{}: {}", f.name, rep.max);
    }
    // x² is not in the quincunx space
    let q = quincunx_m1();
    let rep = ellipsf::scalingfn::verify_annihilation(&q.spec, &[poly("x^2")], 2, DEFAULT_TRUNC, Exec::Parallel)
        .unwrap();
    assert!(rep.max > 1e-3);
}

#[test]
fn execution_policies_agree() {
    let f = second_m1();
    let mut cfg = f.spec.analysis_config();
    cfg.exec = Exec::Sequential;
    let a = f.spec.analyze(&cfg, DEFAULT_TRUNC).unwrap();
    cfg.exec = Exec::Parallel;
    let b = f.spec.analyze(&cfg, DEFAULT_TRUNC).unwrap();
    assert!(a.space.equals(&b.space));
    assert_eq!(a.kernel_dims, b.kernel_dims);
    let ga = cascade_eval(&f.spec, 6, Exec::Sequential).unwrap();
    let gb = cascade_eval(&f.spec, 6, Exec::Parallel).unwrap();
    assert_eq!(ga.values, gb.values);
}

#[test]
fn cascade_behaviour_per_matrix() {
    let g = cascade_eval(&second_m1().spec, 8, Exec::Parallel).unwrap();
    assert!(g.partition_error() < 1e-9);
    assert!(g.mass_error() < 1e-9);
    assert!(g.level_diffs.windows(2).all(|w| w[1] < w[0]), "{:?}", g.level_diffs);

    match cascade_eval(&diagonal_m1().spec, 8, Exec::Parallel) {
        Err(Error::Divergence(diffs)) => assert!(diffs.len() >= 3),
        other => panic!("expected divergence, got {:?}", other.map(|g| g.level_diffs)),
    }
    assert_eq!(
        cascade_eval(&quincunx_nonstat().spec, 4, Exec::Parallel).unwrap_err(),
        Error::NonstationaryCascade
    );
}

#[test]
fn refinement_coefficients_sum_to_q() {
    for (f, q) in [(quincunx_m1(), 2), (second_m1(), 2), (diagonal_m1(), 4)] {
        let h = ellipsf::masks::refinement_coefficients(&f.spec.masks.m0, q);
        let total: f64 = h.values().map(|c| ellipsf::ratcore::to_c64(c).re).sum();
        assert!((total - q as f64).abs() < 1e-12, "{}: {total}", f.name);
    }
}

#[test]
fn x_condition_rejects_constants() {
    let kind = NonstationaryKind::XPlusWm {
        x: MultiPoly::parse(2, "3").unwrap(),
        m: 1,
    };
    assert!(ScalingFunctionSpec::nonstationary(&quincunx(), &kind, 4).is_err());
}

#[test]
fn non_isotropic_matrices_are_refused() {
    let a = ellipsf::DilationMatrix::parse("2,0;0,3").unwrap();
    assert!(matches!(ScalingFunctionSpec::stationary(&a, 1), Err(Error::NotIsotropic(_))));
    assert!(ellipsf::DilationMatrix::parse("1,0;0,1").is_err());
}

#[test]
fn mask_json_layout() {
    let v = serial::mask(&quincunx_m1().spec.masks.m0);
    assert_eq!(v["periodic"], true);
    let coeffs = v["coefficients"].as_array().unwrap();
    let keys: Vec<_> = coeffs.iter().map(|c| c["k"].clone()).collect();
    assert_eq!(
        keys,
        vec![
            serde_json::json!([-2, 0]),
            serde_json::json!([0, -2]),
            serde_json::json!([0, 0]),
            serde_json::json!([0, 2]),
            serde_json::json!([2, 0])
        ]
    );
}
