use proptest::prelude::*;
use stlb_core::boundary::{canonical_equivalents, classify, CaseTag, FamilyKind};
use stlb_core::fundsol::cos_sin;
use stlb_core::spectrum::{self, growth_exponent};
use stlb_core::{BoundaryMatrix, Complex64, Potential, SolverConfig};

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

fn matrix() -> impl Strategy<Value = BoundaryMatrix> {
    prop::array::uniform2(prop::array::uniform4(complex(3.0))).prop_map(BoundaryMatrix::new)
}

/// Invertible 2x2 row operation with a determinant bounded away from zero.
fn row_op() -> impl Strategy<Value = [[Complex64; 2]; 2]> {
    prop::array::uniform2(prop::array::uniform2(complex(2.0)))
        .prop_filter("well conditioned", |c| (c[0][0] * c[1][1] - c[0][1] * c[1][0]).norm() > 0.3)
}

fn apply(c: [[Complex64; 2]; 2], a: &BoundaryMatrix) -> BoundaryMatrix {
    let r = a.rows;
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 2];
    for i in 0..2 {
        for k in 0..4 {
            out[i][k] = c[i][0] * r[0][k] + c[i][1] * r[1][k];
        }
    }
    BoundaryMatrix::new(out)
}

/// Canonical matrix from any family and case with admissible parameters.
fn canonical() -> impl Strategy<Value = BoundaryMatrix> {
    (0usize..3, any::<bool>(), 0usize..4, complex(3.0), complex(3.0)).prop_filter_map(
        "admissible",
        |(k, case2, v, p0, p1)| {
            let kind = [FamilyKind::Theorem1, FamilyKind::TypeStar, FamilyKind::A34Nonzero][k];
            let case = if case2 { CaseTag::Case2 } else { CaseTag::Case1 };
            let fams = canonical_equivalents(kind, case);
            let fam = fams[v % fams.len()];
            let vals: Vec<Complex64> = [p0, p1][..fam.params.len()].to_vec();
            fam.admits(&vals).then(|| fam.matrix(&vals).ok()).flatten()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn plucker_relation_holds(a in matrix()) {
        let m = a.minors();
        prop_assert!(m.plucker().norm() <= 1e-12 * (1.0 + m.scale() * m.scale()));
    }

    #[test]
    fn minors_scale_with_row_determinant(a in matrix(), c in row_op()) {
        let b = apply(c, &a);
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        for (x, y) in a.minors().as_array().iter().zip(b.minors().as_array()) {
            prop_assert!((det * x - y).norm() <= 1e-10 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn classification_is_row_invariant(a in canonical(), c in row_op()) {
        let b = apply(c, &a);
        let ca = classify(&a, 1e-9).unwrap();
        let cb = classify(&b, 1e-9).unwrap();
        prop_assert_eq!(ca.regular_not_strongly, cb.regular_not_strongly);
        prop_assert_eq!(ca.case_tag, cb.case_tag);
        prop_assert_eq!(ca.type_star, cb.type_star);
        prop_assert_eq!(ca.theorem1_family, cb.theorem1_family);
        prop_assert_eq!(ca.a34_zero, cb.a34_zero);
        if ca.regular_not_strongly {
            prop_assert!((ca.b() - cb.b()).norm() <= 1e-9 * (1.0 + ca.b().norm()));
        }
    }

    #[test]
    fn normalization_is_idempotent(a in canonical(), c in row_op()) {
        let b = apply(c, &a);
        let n1 = b.normalize(1e-9).unwrap();
        let n2 = n1.normalize(1e-9).unwrap();
        prop_assert!(n1.equivalent(&b, 1e-9));
        for (r1, r2) in n1.rows.iter().zip(&n2.rows) {
            for (x, y) in r1.iter().zip(r2) {
                prop_assert!((x - y).norm() <= 1e-10 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn growth_exponent_recovers_power_laws(e in -1.0f64..1.5, c in 0.1f64..10.0) {
        let xs: Vec<f64> = (10..=40).map(|n| n as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(e)).collect();
        prop_assert!((growth_exponent(&xs, &ys).unwrap() - e).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cosine_sine_wronskian_is_one(re in 0.0f64..60.0, im in -2.0f64..2.0) {
        let p = Potential::mathieu(1.0).unwrap();
        let cs = cos_sin(&p, Complex64::new(re, im), &SolverConfig::default()).unwrap();
        let w = cs.c.u1 * cs.s.du1 - cs.c.du1 * cs.s.u1;
        prop_assert!((w - 1.0).norm() < 1e-7 * (1.0 + cs.c.u1.norm() * cs.s.du1.norm()));
    }

    #[test]
    fn free_determinant_matches_cauchy_binet(a in matrix(), re in 0.5f64..80.0, im in -2.0f64..2.0) {
        let mu = Complex64::new(re, im);
        let d = spectrum::delta(&Potential::zero(), &a, mu, &SolverConfig::default()).unwrap();
        let d0 = spectrum::delta0_general(&a, mu);
        let scale = a.minors().scale() * (1.0 + mu.norm()).powi(2) * (2.0 * im.abs()).exp();
        prop_assert!((d - d0).norm() <= 1e-8 * scale.max(1e-300), "{} vs {}", d, d0);
    }
}
