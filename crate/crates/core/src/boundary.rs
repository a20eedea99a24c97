//! Boundary forms `B_1, B_2`, their minors and the regularity classification.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fundsol::EndValues;
use crate::{Error, Potential, Result};

/// Coefficient matrix of
/// `B_1(u) = a_1 u'(0) + b_1 u'(1) + a_0 u(0) + b_0 u(1)` and
/// `B_2(u) = c_1 u'(0) + d_1 u'(1) + c_0 u(0) + d_0 u(1)`.
///
/// Columns are ordered `(u'(0), u'(1), u(0), u(1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryMatrix {
    pub rows: [[Complex64; 4]; 2],
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl BoundaryMatrix {
    pub fn new(rows: [[Complex64; 4]; 2]) -> Self {
        Self { rows }
    }

    pub fn real(r1: [f64; 4], r2: [f64; 4]) -> Self {
        Self { rows: [r1.map(c), r2.map(c)] }
    }

    /// `u'(0) = u'(1), u(0) = u(1)`.
    pub fn periodic() -> Self {
        Self::real([1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0])
    }

    /// `u'(0) + u'(1) = 0, u(0) + u(1) = 0`.
    pub fn antiperiodic() -> Self {
        Self::real([1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0])
    }

    /// Determinant of columns `i, j` (1-based).
    pub fn minor(&self, i: usize, j: usize) -> Result<Complex64> {
        if !(1..=4).contains(&i) || !(1..=4).contains(&j) || i >= j {
            return Err(Error::Parameter(format!("minor indices ({i}, {j}) need 1 <= i < j <= 4")));
        }
        let r = &self.rows;
        Ok(r[0][i - 1] * r[1][j - 1] - r[0][j - 1] * r[1][i - 1])
    }

    pub fn minors(&self) -> Minors {
        let m = |i, j| self.minor(i, j).expect("valid indices");
        Minors { a12: m(1, 2), a13: m(1, 3), a14: m(1, 4), a23: m(2, 3), a24: m(2, 4), a34: m(3, 4) }
    }

    fn entry_scale(&self) -> f64 {
        self.rows.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `B_row(u)`.
    pub fn apply_form(&self, row: usize, u: &EndValues) -> Complex64 {
        let r = &self.rows[row];
        r[0] * u.du0 + r[1] * u.du1 + r[2] * u.u0 + r[3] * u.u1
    }

    /// Starred form: the `x = 0` coefficients change sign.
    pub fn apply_star_form(&self, row: usize, u: &EndValues) -> Complex64 {
        let r = &self.rows[row];
        -r[0] * u.du0 + r[1] * u.du1 - r[2] * u.u0 + r[3] * u.u1
    }

    /// Row-equivalent matrix with `c_1 = d_1 = 0` and the leading nonzero
    /// entry of row 1 equal to 1. Requires `A_12 = 0`.
    pub fn normalize(&self, tol: f64) -> Result<BoundaryMatrix> {
        let m = self.minors();
        let scale = m.scale();
        let entries = self.entry_scale();
        if scale <= tol * entries * entries || scale == 0.0 {
            return Err(Error::InvalidForms);
        }
        if m.a12.norm() > tol * scale {
            return Err(Error::NotNormalizable(m.a12.norm()));
        }
        let mut r = self.rows;
        let d = |row: &[Complex64; 4]| row[0].norm().max(row[1].norm());
        if d(&r[0]) == 0.0 && d(&r[1]) > 0.0 {
            r.swap(0, 1);
        }
        if d(&r[0]) > 0.0 {
            let piv = if r[0][0].norm() >= r[0][1].norm() { 0 } else { 1 };
            let f = r[1][piv] / r[0][piv];
            if f != Complex64::new(0.0, 0.0) {
                let top = r[0];
                for (x, t) in r[1].iter_mut().zip(top) {
                    *x -= f * t;
                }
            }
            r[1][0] = Complex64::new(0.0, 0.0);
            r[1][1] = Complex64::new(0.0, 0.0);
        }
        if let Some(lead) = r[0].iter().copied().find(|z| z.norm() > 0.0) {
            for z in r[0].iter_mut() {
                *z /= lead;
            }
        }
        Ok(BoundaryMatrix { rows: r })
    }

    /// Same solution set: the minors (Plücker coordinates) are proportional.
    pub fn equivalent(&self, other: &BoundaryMatrix, tol: f64) -> bool {
        let a = self.minors().as_array();
        let b = other.minors().as_array();
        let (k, _) = a.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())).expect("six minors");
        if a[k].norm() == 0.0 || b[k].norm() == 0.0 {
            return false;
        }
        let ratio = b[k] / a[k];
        let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
        a.iter().zip(&b).all(|(x, y)| (ratio * x - y).norm() <= tol * scale)
    }
}

/// The six minors `A_ij` of a boundary matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Minors {
    pub a12: Complex64,
    pub a13: Complex64,
    pub a14: Complex64,
    pub a23: Complex64,
    pub a24: Complex64,
    pub a34: Complex64,
}

impl Minors {
    pub fn as_array(&self) -> [Complex64; 6] {
        [self.a12, self.a13, self.a14, self.a23, self.a24, self.a34]
    }

    pub fn scale(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `A12 A34 - A13 A24 + A14 A23`, zero for every 2x4 matrix.
    pub fn plucker(&self) -> Complex64 {
        self.a12 * self.a34 - self.a13 * self.a24 + self.a14 * self.a23
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CaseTag {
    /// `A14 + A23 = -(A13 + A24)`; clusters near `2 pi n`.
    Case1,
    /// `A14 + A23 = A13 + A24`; clusters near `(2n - 1) pi`.
    Case2,
    NotApplicable,
}

impl CaseTag {
    /// Upper sign (`-1` in `-+`) for case 1, lower for case 2.
    pub fn sign(self) -> f64 {
        match self {
            CaseTag::Case2 => 1.0,
            _ => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub regular_not_strongly: bool,
    pub case_tag: CaseTag,
    pub a14_eq_a23: bool,
    pub a34_zero: bool,
    pub type_star: bool,
    pub theorem1_family: bool,
    pub minors: Minors,
    /// Which part of the regularity condition fails, if any.
    pub failing: Option<String>,
}

impl Classification {
    /// `b = A34 / (A13 + A24)`.
    pub fn b(&self) -> Complex64 {
        self.minors.a34 / (self.minors.a13 + self.minors.a24)
    }
}

/// Classifies with relative tolerance `tol` against `max |A_ij|`.
pub fn classify(a: &BoundaryMatrix, tol: f64) -> Result<Classification> {
    let m = a.minors();
    let scale = m.scale();
    let entries = a.entry_scale();
    if scale == 0.0 || scale <= tol * entries * entries {
        return Err(Error::InvalidForms);
    }
    let zero = |z: Complex64| z.norm() <= tol * scale;
    let s = m.a14 + m.a23;
    let t = m.a13 + m.a24;
    let a12_zero = zero(m.a12);
    let s_nonzero = !zero(s);
    let case_tag = if zero(s + t) {
        CaseTag::Case1
    } else if zero(s - t) {
        CaseTag::Case2
    } else {
        CaseTag::NotApplicable
    };
    let regular_not_strongly = a12_zero && s_nonzero && case_tag != CaseTag::NotApplicable;
    let failing = if regular_not_strongly {
        None
    } else if !a12_zero {
        Some("A12 != 0".into())
    } else if !s_nonzero {
        Some("A14 + A23 = 0".into())
    } else {
        Some("A14 + A23 != -+(A13 + A24)".into())
    };
    let a14_eq_a23 = zero(m.a14 - m.a23);
    let a34_zero = zero(m.a34);
    Ok(Classification {
        regular_not_strongly,
        case_tag: if regular_not_strongly { case_tag } else { CaseTag::NotApplicable },
        a14_eq_a23,
        a34_zero,
        type_star: regular_not_strongly && !a14_eq_a23 && a34_zero,
        theorem1_family: a14_eq_a23 && !a34_zero,
        minors: m,
        failing,
    })
}

/// `2 A34^2 != (A13 + A24)(A14 - A23)(q(1) - q(0))`: the scalar
/// asymptotic-simplicity criterion for potentials with boundary values.
pub fn dgc_criterion(a: &BoundaryMatrix, p: &Potential, tol: f64) -> Result<bool> {
    let (q0, q1) = p.boundary_values();
    if !(q0.re.is_finite() && q0.im.is_finite() && q1.re.is_finite() && q1.im.is_finite()) {
        return Err(Error::UnsupportedPotential("boundary values of q are undefined".into()));
    }
    let m = a.minors();
    let lhs = 2.0 * m.a34 * m.a34;
    let rhs = (m.a13 + m.a24) * (m.a14 - m.a23) * (q1 - q0);
    let scale = m.scale() * m.scale() * (1.0 + q0.norm().max(q1.norm()));
    Ok((lhs - rhs).norm() > tol * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FamilyKind {
    Theorem1,
    TypeStar,
    A34Nonzero,
}

/// One parameterized canonical matrix, e.g. rows `(1, -1, 0, b0), (0, 0, 1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalFamily {
    pub kind: FamilyKind,
    pub case_tag: CaseTag,
    /// `a`..`d` in the order the families are listed.
    pub variant: char,
    pub params: &'static [&'static str],
    pub constraint: &'static str,
}

impl CanonicalFamily {
    /// Builds the matrix from the free parameters (in `params` order).
    pub fn matrix(&self, v: &[Complex64]) -> Result<BoundaryMatrix> {
        if v.len() != self.params.len() {
            return Err(Error::Parameter(format!(
                "family {}{} expects {} parameter(s)",
                kind_label(self.kind),
                self.variant,
                self.params.len()
            )));
        }
        let s = c(self.case_tag.sign());
        let (o, z) = (c(1.0), c(0.0));
        let rows = match (self.kind, self.variant) {
            (FamilyKind::Theorem1, _) => [[o, s, z, v[0]], [z, z, o, s]],
            (FamilyKind::TypeStar, 'a') => [[o, s, z, z], [z, z, o, v[0]]],
            (FamilyKind::TypeStar, 'b') => [[o, v[0], z, z], [z, z, o, s]],
            (FamilyKind::TypeStar, 'c') => [[o, s, z, z], [z, z, z, o]],
            (FamilyKind::TypeStar, _) => [[z, o, z, z], [z, z, o, s]],
            (FamilyKind::A34Nonzero, 'a') => [[o, s, z, v[1]], [z, z, o, v[0]]],
            (FamilyKind::A34Nonzero, 'b') => [[o, v[0], z, v[1]], [z, z, o, s]],
            (FamilyKind::A34Nonzero, 'c') => [[o, s, v[0], z], [z, z, z, o]],
            (FamilyKind::A34Nonzero, _) => [[z, o, z, v[0]], [z, z, o, s]],
        };
        Ok(BoundaryMatrix { rows })
    }

    /// Whether the parameters satisfy the family's side conditions.
    pub fn admits(&self, v: &[Complex64]) -> bool {
        let off_pm1 = |z: Complex64| (z - 1.0).norm() > 1e-12 && (z + 1.0).norm() > 1e-12;
        let nonzero = |z: Complex64| z.norm() > 1e-12;
        if v.len() != self.params.len() {
            return false;
        }
        match (self.kind, self.variant) {
            (FamilyKind::Theorem1, _) => nonzero(v[0]),
            (FamilyKind::TypeStar, 'a') | (FamilyKind::TypeStar, 'b') => off_pm1(v[0]),
            (FamilyKind::TypeStar, _) => true,
            (FamilyKind::A34Nonzero, 'a') | (FamilyKind::A34Nonzero, 'b') => off_pm1(v[0]) && nonzero(v[1]),
            (FamilyKind::A34Nonzero, _) => nonzero(v[0]),
        }
    }
}

fn kind_label(k: FamilyKind) -> &'static str {
    match k {
        FamilyKind::Theorem1 => "theorem1",
        FamilyKind::TypeStar => "type-star:",
        FamilyKind::A34Nonzero => "a34:",
    }
}

/// Canonical representatives of each family for the given case.
pub fn canonical_equivalents(which: FamilyKind, case_tag: CaseTag) -> Vec<CanonicalFamily> {
    let fam = |variant, params, constraint| CanonicalFamily { kind: which, case_tag, variant, params, constraint };
    match which {
        FamilyKind::Theorem1 => alloc::vec![fam('a', &["b0"][..], "b0 != 0")],
        FamilyKind::TypeStar => alloc::vec![
            fam('a', &["d0"][..], "d0 != 1, d0 != -1"),
            fam('b', &["b1"][..], "b1 != 1, b1 != -1"),
            fam('c', &[][..], ""),
            fam('d', &[][..], ""),
        ],
        FamilyKind::A34Nonzero => alloc::vec![
            fam('a', &["d0", "b0"][..], "d0 != 1, d0 != -1, b0 != 0"),
            fam('b', &["b1", "b0"][..], "b1 != 1, b1 != -1, b0 != 0"),
            fam('c', &["a0"][..], "a0 != 0"),
            fam('d', &["b0"][..], "b0 != 0"),
        ],
    }
}

/// First canonical family (of any kind) equivalent to `a`, with its parameters.
pub fn match_canonical(a: &BoundaryMatrix, tol: f64) -> Option<(CanonicalFamily, Vec<Complex64>)> {
    let n = a.normalize(tol).ok()?;
    let r = n.rows;
    for kind in [FamilyKind::Theorem1, FamilyKind::TypeStar, FamilyKind::A34Nonzero] {
        for case_tag in [CaseTag::Case1, CaseTag::Case2] {
            for fam in canonical_equivalents(kind, case_tag) {
                // parameters read off the normalized rows
                let v: Vec<Complex64> = fam.params.iter().map(|&p| param_guess(p, &r)).collect();
                if !fam.admits(&v) {
                    continue;
                }
                if fam.matrix(&v).is_ok_and(|m| m.equivalent(a, tol)) {
                    return Some((fam, v));
                }
            }
        }
    }
    None
}

fn param_guess(name: &str, r: &[[Complex64; 4]; 2]) -> Complex64 {
    let row2 = |k: usize| {
        let lead = r[1].iter().copied().find(|z| z.norm() > 0.0).unwrap_or(c(1.0));
        r[1][k] / lead
    };
    match name {
        "b0" => r[0][3],
        "b1" => r[0][1],
        "a0" => r[0][2],
        _ => row2(3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_and_antiperiodic_minors() {
        let m = BoundaryMatrix::periodic().minors();
        assert_eq!(m.as_array(), [0.0, 1.0, -1.0, -1.0, 1.0, 0.0].map(c));
        let m = BoundaryMatrix::antiperiodic().minors();
        assert_eq!(m.as_array(), [0.0, 1.0, 1.0, 1.0, 1.0, 0.0].map(c));
        assert!(BoundaryMatrix::periodic().minor(3, 2).is_err());
    }

    #[test]
    fn classification_flags() {
        let p = classify(&BoundaryMatrix::periodic(), 1e-9).unwrap();
        assert!(p.regular_not_strongly && p.a14_eq_a23 && p.a34_zero);
        assert_eq!(p.case_tag, CaseTag::Case1);
        assert!(!p.type_star && !p.theorem1_family);
        let a = classify(&BoundaryMatrix::antiperiodic(), 1e-9).unwrap();
        assert_eq!(a.case_tag, CaseTag::Case2);
        let t = classify(&BoundaryMatrix::real([1.0, -1.0, 0.0, 3.0], [0.0, 0.0, 1.0, -1.0]), 1e-9).unwrap();
        assert!(t.theorem1_family);
        assert_eq!(t.minors.a34, c(-3.0));
        let rank1 = BoundaryMatrix::real([1.0, 2.0, 0.0, 0.0], [2.0, 4.0, 0.0, 0.0]);
        assert_eq!(classify(&rank1, 1e-9), Err(Error::InvalidForms));
    }

    #[test]
    fn normalization_examples() {
        let n = BoundaryMatrix::real([1.0, -1.0, 0.0, 0.0], [2.0, -2.0, 1.0, -1.0]).normalize(1e-9).unwrap();
        assert_eq!(n, BoundaryMatrix::periodic());
        let n = BoundaryMatrix::real([0.0, 1.0, 0.0, 0.0], [0.0, 3.0, 1.0, -1.0]).normalize(1e-9).unwrap();
        assert_eq!(n, BoundaryMatrix::real([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0]));
        let bad = BoundaryMatrix::real([1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(bad.normalize(1e-9), Err(Error::NotNormalizable(_))));
    }

    #[test]
    fn forms_on_plane_wave() {
        let i2pi = Complex64::new(0.0, 2.0 * core::f64::consts::PI);
        let u = EndValues { u0: c(1.0), u1: c(1.0), du0: i2pi, du1: i2pi };
        let a = BoundaryMatrix::periodic();
        assert_eq!(a.apply_form(0, &u), c(0.0));
        assert_eq!(a.apply_form(1, &u), c(0.0));
        assert!((a.apply_star_form(0, &u) + 2.0 * i2pi).norm() < 1e-15);
    }

    #[test]
    fn canonical_matches() {
        let f = canonical_equivalents(FamilyKind::TypeStar, CaseTag::Case1);
        assert_eq!(f[2].matrix(&[]).unwrap(), BoundaryMatrix::real([1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]));
        let g = canonical_equivalents(FamilyKind::A34Nonzero, CaseTag::Case2);
        assert_eq!(g[3].matrix(&[c(2.0)]).unwrap(), BoundaryMatrix::real([0.0, 1.0, 0.0, 2.0], [0.0, 0.0, 1.0, 1.0]));
        let t1 = BoundaryMatrix::real([2.0, -2.0, 0.0, 6.0], [1.0, -1.0, 1.0, 2.0]);
        let (fam, v) = match_canonical(&t1, 1e-9).unwrap();
        assert_eq!(fam.kind, FamilyKind::Theorem1);
        assert!((v[0] - 3.0).norm() < 1e-12);
    }
}
