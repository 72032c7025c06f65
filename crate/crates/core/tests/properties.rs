use ellipsf::isotropic::{coset_reps, decompose, partition_check, DilationMatrix};
use ellipsf::masks::{build_g, build_mask, TrigPoly};
use ellipsf::multiindex::{mbinom, GradedBasis, MultiIndex};
use ellipsf::polyops::{bigd_block, bigd_matrix, diff_apply, pascal_matrix};
use ellipsf::presets::all_matrices;
use ellipsf::ratcore::{kernel_basis, rat, real, subspace_equal, GaussianRational, Rational};
use ellipsf::scalingfn::ScalingFunctionSpec;
use ellipsf::strangfix::rank_property_check;
use ellipsf::MultiPoly;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=6).prop_map(|(p, q)| rat(p, q))
}

fn gaussian() -> impl Strategy<Value = GaussianRational> {
    (rational(), rational()).prop_map(|(re, im)| GaussianRational::new(re, im))
}

/// Random polynomial in two variables of degree at most `l`.
fn poly2(l: u32) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(((0..=l), (0..=l), gaussian()), 0..8).prop_map(move |terms| {
        let mut p = MultiPoly::zero(2);
        for (a, b, c) in terms {
            if a + b <= l {
                p = p.add(&MultiPoly::monomial(MultiIndex::new(vec![a, b]), c));
            }
        }
        p
    })
}

fn power(x: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// `α!/(β!(α−β)!)` from plain factorials.
fn mbinom_oracle(alpha: &[u32], beta: &[u32]) -> BigInt {
    let fact = |n: u32| (1..=n).fold(BigInt::one(), |acc, k| acc * k);
    alpha
        .iter()
        .zip(beta)
        .map(|(&a, &b)| if b > a { BigInt::zero() } else { fact(a) / (fact(b) * fact(a - b)) })
        .product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn translation_identity(
        d in 1usize..=3,
        l in 0usize..=4,
        x in prop::collection::vec(rational(), 3),
        y in prop::collection::vec(rational(), 3),
    ) {
        let (x, y) = (&x[..d], &y[..d]);
        let basis = GradedBasis::new(d, l);
        let p = pascal_matrix(y, d, l);
        for (k, alpha) in basis.graded.iter().enumerate() {
            let lhs: Rational = alpha.components().iter().zip(x.iter().zip(y)).fold(Rational::one(), |acc, (&e, (a, b))| acc * power(&(a + b), e));
            let mut rhs = GaussianRational::zero();
            for (j, beta) in basis.graded.iter().enumerate() {
                let xb = beta.components().iter().zip(x).fold(Rational::one(), |acc, (&e, a)| acc * power(a, e));
                rhs += real(xb) * &p.row(j)[k];
            }
            prop_assert_eq!(real(lhs), rhs);
        }
    }

    #[test]
    fn multi_binomial_matches_factorials(a in prop::collection::vec(0u32..6, 2), b in prop::collection::vec(0u32..6, 2)) {
        let alpha = MultiIndex::new(a.clone());
        let beta = MultiIndex::new(b.clone());
        prop_assert_eq!(mbinom(&alpha, &beta), mbinom_oracle(&a, &b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Row `β` of `ĉ𝐃_L S` applied to `p` is the `x^β` coefficient of `S(−iD)p`.
    #[test]
    fn bigd_rows_apply_the_operator(s in poly2(4), p in poly2(4)) {
        let l = 4;
        let basis = GradedBasis::new(2, l);
        let v = p.coefficient_vector(&basis);
        let m = bigd_matrix(&s, l);
        let applied = diff_apply(&s, &p);
        for (j, beta) in basis.graded.iter().enumerate() {
            let row: GaussianRational = m.row(j).iter().zip(&v).fold(GaussianRational::zero(), |acc, (a, b)| acc + a * b);
            prop_assert_eq!(row, applied.coeff(beta));
        }
    }

    /// Multiplying by a unit does not move the kernel.
    #[test]
    fn kernel_ignores_units(s in poly2(3), u in poly2(3), u0 in gaussian()) {
        prop_assume!(!u0.is_zero());
        let l = 4;
        let unit = u.sub(&MultiPoly::constant(2, u.coeff(&MultiIndex::zero(2)))).add(&MultiPoly::constant(2, u0));
        let su = s.mul_truncated(&unit, l);
        prop_assert!(subspace_equal(&kernel_basis(&bigd_matrix(&s, l)), &kernel_basis(&bigd_matrix(&su, l))));
    }

    #[test]
    fn rank_theorem(s in poly2(5), l in 0usize..=5, extra in 0usize..=2) {
        let big = (l + extra).min(5);
        let rep = rank_property_check(&s, l.min(big), big);
        prop_assert!(rep.ok, "{:?}", rep);
        prop_assert_eq!(rep.rank, ellipsf::ratcore::rank(&bigd_block(&s, l.min(big), big)));
    }

    /// `[[a, −b], [b, a]]` is a similarity times a rotation, hence isotropic.
    #[test]
    fn rotation_like_matrices_partition_the_lattice(a in -3i64..=3, b in -3i64..=3) {
        prop_assume!(a * a + b * b >= 2);
        let m = DilationMatrix::new(vec![vec![a, -b], vec![b, a]]).unwrap();
        let q = (a * a + b * b) as usize;
        prop_assert_eq!(coset_reps(&m).len(), q);
        let rep = partition_check(&m, 3).unwrap();
        prop_assert_eq!(rep.checked, 48);
        prop_assert!(decompose(&m).is_ok());
    }

    #[test]
    fn mask_ignores_g_scaling(which in 0usize..3, p in 1i64..=20, q in 1i64..=20) {
        let (_, a) = &all_matrices()[which];
        let g = build_g(&decompose(a).unwrap().q2);
        let base = build_mask(&g, a).unwrap().m0;
        let scaled = build_mask(&g.scale(&real(rat(p, q))), a).unwrap().m0;
        prop_assert_eq!(base, scaled);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn synthesized_masks_are_normalized(which in 0usize..3, m in 1u32..=3, higher in prop::option::of(prop::sample::select(vec![6usize, 8]))) {
        let (_, a) = &all_matrices()[which];
        let spec = match higher {
            Some(r) => ScalingFunctionSpec::higher(a, r, None, m).unwrap(),
            None => ScalingFunctionSpec::stationary(a, m).unwrap(),
        };
        prop_assert!(spec.masks_normalized());
        prop_assert_eq!(spec.masks.mask_at(0).at_zero(), GaussianRational::one());
        let zero: TrigPoly = spec.masks.g_at(0).clone();
        prop_assert!(zero.at_zero().is_zero());
    }
}
