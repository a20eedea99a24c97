mod common;

use std::f64::consts::PI;

use common::{hill_matrix_eigenvalues, rel, rk4};
use stlb_core::basis::{self, PrecisionMode};
use stlb_core::fundsol::solve_fundamental;
use stlb_core::spectrum::{self, SeriesTag};
use stlb_core::{BoundaryMatrix, Complex64, Potential, SolverConfig};

// Mathieu(1) periodic and antiperiodic eigenvalues from a 81x81 Hill matrix.
const MATHIEU1_PERIODIC: [f64; 9] = [
    -4.49203797020,
    38.6594849388,
    43.1430114177,
    158.239072078,
    158.247582233,
    355.446794204,
    355.446795541,
    631.733018588,
    631.733018588,
];
const MATHIEU1_ANTIPERIODIC: [f64; 8] = [
    -1.08811220940,
    18.3486612146,
    89.2976072185,
    89.5999091291,
    246.945800708,
    246.945934167,
    483.713439654,
    483.713439663,
];

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn hill_matrix_oracle_is_frozen() {
    let p = Potential::mathieu(1.0).unwrap();
    let per = hill_matrix_eigenvalues(&p, false, 40);
    let anti = hill_matrix_eigenvalues(&p, true, 40);
    for (a, b) in per.iter().zip(MATHIEU1_PERIODIC) {
        assert!(rel(*a, b) < 1e-10, "{a} vs {b}");
    }
    for (a, b) in anti.iter().zip(MATHIEU1_ANTIPERIODIC) {
        assert!(rel(*a, b) < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn mathieu_periodic_spectrum_matches_hill_matrix() {
    let p = Potential::mathieu(1.0).unwrap();
    let s = spectrum::find_eigenvalues(&p, &BoundaryMatrix::periodic(), 4, &cfg()).unwrap();
    assert!(s.all_certified());
    let ev = s.eigenvalues();
    for (z, want) in ev.iter().zip(MATHIEU1_PERIODIC) {
        assert!(rel(z.re, want) < 1e-8 && z.im.abs() < 1e-8, "{z} vs {want}");
    }
}

#[test]
fn mathieu_antiperiodic_spectrum_matches_hill_matrix() {
    let p = Potential::mathieu(1.0).unwrap();
    let s = spectrum::find_eigenvalues(&p, &BoundaryMatrix::antiperiodic(), 4, &cfg()).unwrap();
    assert!(s.all_certified());
    let ev = s.eigenvalues();
    assert!(ev.len() >= MATHIEU1_ANTIPERIODIC.len());
    for (z, want) in ev.iter().zip(MATHIEU1_ANTIPERIODIC) {
        assert!(rel(z.re, want) < 1e-8 && z.im.abs() < 1e-8, "{z} vs {want}");
    }
}

#[test]
fn discriminant_gaps_match_hill_matrix() {
    let p = Potential::mathieu(1.0).unwrap();
    for mode in [PrecisionMode::Double, PrecisionMode::Extended] {
        let t = basis::spectral_gaps(&p, 4, mode).unwrap();
        let per = t.eigenvalues(basis::GapProblem::Periodic);
        let anti = t.eigenvalues(basis::GapProblem::Antiperiodic);
        for (a, b) in per.iter().zip(MATHIEU1_PERIODIC) {
            assert!(rel(*a, b) < 1e-9, "{mode:?}: {a} vs {b}");
        }
        for (a, b) in anti.iter().zip(MATHIEU1_ANTIPERIODIC) {
            assert!(rel(*a, b) < 1e-9, "{mode:?}: {a} vs {b}");
        }
    }
}

#[test]
fn two_term_symmetric_spectrum_matches_hill_matrix() {
    let p = Potential::two_term(1.0, 1.0).unwrap();
    let oracle = hill_matrix_eigenvalues(&p, true, 40);
    let s = spectrum::find_eigenvalues(&p, &BoundaryMatrix::antiperiodic(), 5, &cfg()).unwrap();
    for (z, want) in s.eigenvalues().iter().zip(&oracle) {
        assert!(rel(z.re, *want) < 1e-8, "{z} vs {want}");
    }
}

#[test]
fn fundamental_system_matches_fixed_step_rk4() {
    let cases = [
        (Potential::mathieu(1.0).unwrap(), Complex64::new(3.0, 0.5)),
        (Potential::two_term(1.0, 1.0).unwrap(), Complex64::new(7.0, 0.0)),
        (
            Potential::from_terms(vec![stlb_core::potential::Term { coeff: Complex64::new(2.0, -3.0), k: 2 }]),
            Complex64::new(5.0, -1.0),
        ),
    ];
    for (p, mu) in cases {
        let fs = solve_fundamental(&p, mu, &cfg(), &[]).unwrap();
        let i = Complex64::i();
        let phi = rk4(&p, mu, 1.0.into(), i * mu, 20_000);
        let psi = rk4(&p, mu, 1.0.into(), -i * mu, 20_000);
        let l = fs.grid.len() - 1;
        let (pe, pd) = *phi.last().unwrap();
        let (qe, qd) = *psi.last().unwrap();
        let scale = pe.norm().max(qe.norm()).max(1.0);
        assert!((fs.phi[l] - pe).norm() < 1e-8 * scale, "{mu}: {} vs {pe}", fs.phi[l]);
        assert!((fs.psi[l] - qe).norm() < 1e-8 * scale);
        assert!((fs.phi_dx[l] - pd).norm() < 1e-8 * scale * mu.norm());
        assert!((fs.psi_dx[l] - qd).norm() < 1e-8 * scale * mu.norm());
    }
}

#[test]
fn eigenfunction_satisfies_equation_and_conditions() {
    let p = Potential::mathieu(1.0).unwrap();
    let a = BoundaryMatrix::real([1.0, -1.0, 0.0, -2.0], [0.0, 0.0, 1.0, -1.0]);
    let s = spectrum::find_eigenvalues(&p, &a, 3, &cfg()).unwrap();
    let steps = 20_000;
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    for pt in s.points.iter().filter(|pt| pt.cluster >= 1) {
        let e = basis::eigenfunction(&p, &a, pt, &grid, &cfg()).unwrap();
        assert!(e.boundary_residual < 1e-8, "{}", e.boundary_residual);
        assert_eq!(e.u_samples.len(), 1);
        // the same combination of phi and psi integrated by RK4
        let [c1, c2] = e.coefficients[0];
        let i = Complex64::i();
        let mu = pt.mu;
        let u = rk4(&p, mu, c1 + c2, i * mu * (c1 - c2), steps);
        let want: Vec<Complex64> = grid.iter().map(|x| u[(x * steps as f64).round() as usize].0).collect();
        let k = want.iter().map(|z| z.norm()).enumerate().max_by(|x, y| x.1.total_cmp(&y.1)).unwrap().0;
        let ratio = e.u_samples[0][k] / want[k];
        for (got, w) in e.u_samples[0].iter().zip(&want) {
            assert!((got - ratio * w).norm() < 1e-7, "{mu}: {got} vs {}", ratio * w);
        }
    }
}

#[test]
fn kernel_is_rank_one_at_simple_eigenvalues() {
    let p = Potential::mathieu(1.0).unwrap();
    let a = BoundaryMatrix::real([1.0, -1.0, 0.0, -2.0], [0.0, 0.0, 1.0, -1.0]);
    let s = spectrum::find_eigenvalues(&p, &a, 12, &cfg()).unwrap();
    let (x1, x2, y1, y2) = (0.13, 0.58, 0.71, 0.29);
    for pt in s.points.iter().filter(|pt| pt.cluster == 3 || pt.cluster == 12) {
        assert_ne!(pt.series_tag, SeriesTag::Unresolved);
        let k = |x, y| basis::rank_one_product(&p, &a, pt, x, y, &cfg()).unwrap();
        let m = k(x1, y1) * k(x2, y2) - k(x1, y2) * k(x2, y1);
        let scale = (k(x1, y1) * k(x2, y2)).norm();
        assert!(m.norm() < 1e-8 * scale.max(1.0), "{}: {m}", pt.mu);
        // columns follow the eigenfunction
        let e = basis::eigenfunction(&p, &a, pt, &[x1, x2], &cfg()).unwrap();
        let lhs = k(x1, y1) / k(x2, y1);
        let rhs = e.u_samples[0][0] / e.u_samples[0][1];
        assert!((lhs - rhs).norm() < 1e-7 * rhs.norm().max(1.0), "{lhs} vs {rhs}");
    }
}

#[test]
fn biorthogonal_pairing_is_one() {
    let p = Potential::mathieu(1.0).unwrap();
    let a = BoundaryMatrix::new([
        [1.0.into(), (-1.0).into(), 0.0.into(), Complex64::new(-1.0, 2.0)],
        [0.0.into(), 0.0.into(), 1.0.into(), (-1.0).into()],
    ]);
    let s = spectrum::find_eigenvalues(&p, &a, 10, &cfg()).unwrap();
    for pt in s.points.iter().filter(|pt| pt.cluster == 2 || pt.cluster == 10) {
        let b = basis::biorthogonality(&p, &a, pt, 8, &cfg()).unwrap();
        assert!((b - 1.0).norm() < 1e-8, "{}: {b}", pt.mu);
    }
}

#[test]
fn free_theorem1_roots_follow_closed_form() {
    // q = 0, rows (1, -1, 0, b0), (0, 0, 1, -1): on the cosine/sine pair the
    // determinant is -2(1 - cos mu) - b0 sin(mu)/mu
    let a = BoundaryMatrix::real([1.0, -1.0, 0.0, -2.0], [0.0, 0.0, 1.0, -1.0]);
    let s = spectrum::find_eigenvalues(&Potential::zero(), &a, 3, &cfg()).unwrap();
    for pt in s.points.iter().filter(|pt| pt.cluster >= 1) {
        let mu = pt.mu;
        let b0 = -2.0;
        let f = 2.0 * mu * (1.0 - mu.cos()) + b0 * mu.sin();
        assert!(f.norm() < 1e-9 * mu.norm(), "{mu}: {f}");
        assert!((mu.re - 2.0 * PI * pt.cluster as f64).abs() < 1.0);
    }
}
