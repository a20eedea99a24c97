//! Complex potentials `q` on `[0, 1]`: trig-polynomial terms and/or samples.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::quad::GaussLegendre;
use crate::{Error, Result};

/// One term `coeff * cos(2 pi k x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Term {
    pub coeff: Complex64,
    pub k: u32,
}

/// Named families the gap and verdict logic know in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Builtin {
    Zero,
    /// `q = 2 pi^2 a cos(2 pi x)`.
    Mathieu {
        a: f64,
    },
    /// `q = -pi^2 (4 alpha t cos(2 pi x) + 2 alpha^2 cos(4 pi x))`.
    TwoTerm {
        alpha: f64,
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Potential {
    terms: Vec<Term>,
    samples: Option<Vec<Complex64>>,
    quadrature_order: usize,
    mean: Complex64,
    shift: Complex64,
    builtin: Option<Builtin>,
}

pub const DEFAULT_QUADRATURE_ORDER: usize = 10;

impl Potential {
    /// Builds a potential from terms and/or uniform samples on `[0, 1]`.
    ///
    /// When both are given the terms define `q` and the samples must agree
    /// with them at the sample nodes.
    pub fn new(terms: Vec<Term>, samples: Option<Vec<Complex64>>, quadrature_order: usize) -> Result<Self> {
        if quadrature_order == 0 {
            return Err(Error::Parameter("quadrature_order must be positive".into()));
        }
        for t in &terms {
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                return Err(Error::Parameter(format!("non-finite coefficient for k = {}", t.k)));
            }
        }
        if let Some(s) = &samples {
            if s.len() < 2 {
                return Err(Error::Parameter("at least two samples are required".into()));
            }
            if s.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::Parameter("non-finite sample value".into()));
            }
        }
        let mut p = Self {
            terms,
            samples,
            quadrature_order,
            mean: Complex64::new(0.0, 0.0),
            shift: Complex64::new(0.0, 0.0),
            builtin: None,
        };
        if !p.terms.is_empty() {
            if let Some(s) = &p.samples {
                let h = 1.0 / (s.len() - 1) as f64;
                let scale = 1.0 + s.iter().map(|z| z.norm()).fold(0.0, f64::max);
                for (i, z) in s.iter().enumerate() {
                    let d = (p.eval_terms(i as f64 * h) - z).norm();
                    if d > 1e-8 * scale {
                        return Err(Error::Parameter(format!("sample {i} disagrees with the terms by {d:e}")));
                    }
                }
            }
        }
        p.mean = p.integral_q(0.0, 1.0, None)?;
        Ok(p)
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        Self::new(terms, None, DEFAULT_QUADRATURE_ORDER).expect("finite terms")
    }

    pub fn from_samples(samples: Vec<Complex64>) -> Result<Self> {
        Self::new(Vec::new(), Some(samples), DEFAULT_QUADRATURE_ORDER)
    }

    pub fn zero() -> Self {
        let mut p = Self::from_terms(Vec::new());
        p.builtin = Some(Builtin::Zero);
        p
    }

    /// The Mathieu potential `2 pi^2 a cos(2 pi x)`, so that `Lu = u'' - 2 pi^2 a cos(2 pi x) u`.
    pub fn mathieu(a: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::Parameter(format!("Mathieu parameter must be nonzero, got {a}")));
        }
        let mut p = Self::from_terms(alloc::vec![Term { coeff: (2.0 * PI * PI * a).into(), k: 1 }]);
        p.builtin = Some(Builtin::Mathieu { a });
        Ok(p)
    }

    /// `q = -pi^2 (4 alpha t cos(2 pi x) + 2 alpha^2 cos(4 pi x))`.
    pub fn two_term(alpha: f64, t: f64) -> Result<Self> {
        if alpha == 0.0 || t == 0.0 || !alpha.is_finite() || !t.is_finite() {
            return Err(Error::Parameter(format!(
                "two-term potential needs alpha != 0 and t != 0, got ({alpha}, {t})"
            )));
        }
        let pi2 = PI * PI;
        let mut p = Self::from_terms(alloc::vec![
            Term { coeff: (-4.0 * pi2 * alpha * t).into(), k: 1 },
            Term { coeff: (-2.0 * pi2 * alpha * alpha).into(), k: 2 },
        ]);
        p.builtin = Some(Builtin::TwoTerm { alpha, t });
        Ok(p)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn samples(&self) -> Option<&[Complex64]> {
        self.samples.as_deref()
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    pub fn builtin(&self) -> Option<Builtin> {
        self.builtin
    }

    /// Cached `int_0^1 q`.
    pub fn mean(&self) -> Complex64 {
        self.mean
    }

    /// Constant removed by [`Potential::normalize_mean_zero`]; eigenvalues of the
    /// original operator are `lambda + shift`.
    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    fn term_form(&self) -> bool {
        !self.terms.is_empty() || self.samples.is_none()
    }

    pub fn is_zero(&self) -> bool {
        if self.term_form() {
            self.terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0))
        } else {
            self.samples.as_ref().is_some_and(|s| s.iter().all(|z| z.norm() == 0.0))
        }
    }

    pub fn is_real(&self) -> bool {
        if self.term_form() {
            self.terms.iter().all(|t| t.coeff.im == 0.0)
        } else {
            self.samples.as_ref().is_some_and(|s| s.iter().all(|z| z.im == 0.0))
        }
    }

    /// Largest frequency `k` among the terms (0 for sampled data).
    pub fn max_frequency(&self) -> u32 {
        self.terms.iter().map(|t| t.k).max().unwrap_or(0)
    }

    #[inline]
    fn eval_terms(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|t| if t.k == 0 { t.coeff } else { t.coeff * (2.0 * PI * t.k as f64 * x).cos() }).sum()
    }

    fn eval_samples(s: &[Complex64], x: f64) -> Complex64 {
        let n = s.len();
        let h = 1.0 / (n - 1) as f64;
        if n < 4 {
            let j = ((x / h).floor() as usize).min(n - 2);
            let r = x / h - j as f64;
            return s[j] * (1.0 - r) + s[j + 1] * r;
        }
        let j = ((x / h).floor() as usize).min(n - 2);
        let start = j.saturating_sub(1).min(n - 4);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..4 {
            let xa = (start + a) as f64 * h;
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    let xb = (start + b) as f64 * h;
                    l *= (x - xb) / (xa - xb);
                }
            }
            acc += s[start + a] * l;
        }
        acc
    }

    /// `q(x)` without the domain check; the ODE right-hand side calls this.
    #[inline]
    pub fn value(&self, x: f64) -> Complex64 {
        if self.term_form() {
            self.eval_terms(x)
        } else {
            Self::eval_samples(self.samples.as_deref().unwrap_or(&[]), x.clamp(0.0, 1.0))
        }
    }

    pub fn eval_q(&self, x: f64) -> Result<Complex64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} is outside [0, 1]")));
        }
        Ok(self.value(x))
    }

    /// `q(0)` and `q(1)`.
    pub fn boundary_values(&self) -> (Complex64, Complex64) {
        (self.value(0.0), self.value(1.0))
    }

    /// `int_a^b q(t) e^{i omega t} dt` (`omega = None` means weight 1).
    ///
    /// The asymptotic formulas use `omega = +-2 mu`. Term-form potentials are
    /// integrated in closed form; sampled ones with Gauss–Legendre panels whose
    /// count grows with `|omega| (b - a)`.
    pub fn integral_q(&self, a: f64, b: f64, omega: Option<Complex64>) -> Result<Complex64> {
        if a > b {
            return Err(Error::Domain(format!("integration bounds a = {a} > b = {b}")));
        }
        let w = omega.unwrap_or(Complex64::new(0.0, 0.0));
        if self.term_form() {
            Ok(self
                .terms
                .iter()
                .map(|t| {
                    if t.k == 0 {
                        t.coeff * exp_integral(w, a, b)
                    } else {
                        let f = 2.0 * PI * t.k as f64;
                        t.coeff * 0.5 * (exp_integral(w + f, a, b) + exp_integral(w - f, a, b))
                    }
                })
                .sum())
        } else {
            Ok(self.sampled_integral(a, b, |x| Complex64::new(0.0, 1.0) * w * x, w.norm()))
        }
    }

    fn sampled_integral(&self, a: f64, b: f64, phase: impl Fn(f64) -> Complex64, freq: f64) -> Complex64 {
        let s = self.samples.as_deref().unwrap_or(&[]);
        let n = s.len();
        let h = 1.0 / (n - 1) as f64;
        let rule = GaussLegendre::new(self.quadrature_order.max(2));
        let mut acc = Complex64::new(0.0, 0.0);
        let first = ((a / h).floor() as usize).min(n - 2);
        for cell in first..n - 1 {
            let lo = (cell as f64 * h).max(a);
            let hi = ((cell + 1) as f64 * h).min(b);
            if hi <= lo {
                if cell as f64 * h >= b {
                    break;
                }
                continue;
            }
            let sub = (freq * (hi - lo) / 2.0).ceil().max(1.0) as usize;
            let len = (hi - lo) / sub as f64;
            for m in 0..sub {
                let pa = lo + len * m as f64;
                let pb = if m + 1 == sub { hi } else { pa + len };
                for (x, wgt) in rule.mapped(pa, pb) {
                    acc += Self::eval_samples(s, x) * phase(x).exp() * wgt;
                }
            }
        }
        acc
    }

    /// `int_0^1 |q|`.
    pub fn l1_norm(&self) -> f64 {
        let rule = GaussLegendre::new(self.quadrature_order.max(4));
        let panels = if self.term_form() {
            16 * (1 + self.max_frequency() as usize)
        } else {
            self.samples.as_ref().map_or(1, |s| s.len() - 1)
        };
        crate::quad::composite(&rule, 0.0, 1.0, panels).into_iter().map(|(x, w)| w * self.value(x).norm()).sum()
    }

    /// `max |q|` over a uniform test grid.
    pub fn max_abs(&self) -> f64 {
        (0..=1024).map(|i| self.value(i as f64 / 1024.0).norm()).fold(0.0, f64::max)
    }

    /// Removes the mean so that `int_0^1 q = 0`, accumulating it in [`Potential::shift`].
    pub fn normalize_mean_zero(&self) -> Potential {
        let mut p = self.clone();
        let c = self.mean;
        if self.term_form() {
            p.terms.retain(|t| t.k != 0);
            let rest: Complex64 = self.terms.iter().filter(|t| t.k == 0).map(|t| t.coeff).sum();
            if let Some(s) = &mut p.samples {
                for z in s.iter_mut() {
                    *z -= rest;
                }
            }
            p.shift += rest;
        } else {
            if let Some(s) = &mut p.samples {
                for z in s.iter_mut() {
                    *z -= c;
                }
            }
            p.shift += c;
        }
        p.mean = p.integral_q(0.0, 1.0, None).unwrap_or(Complex64::new(0.0, 0.0));
        if p.builtin.is_some() && c != Complex64::new(0.0, 0.0) {
            p.builtin = None;
        }
        p
    }

    /// `max |q(x) - q(1-x)| <= tol (1 + max |q|)` on a test grid.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let mut dev = 0.0f64;
        let mut big = 0.0f64;
        for i in 0..=512 {
            let x = i as f64 / 512.0;
            let v = self.value(x);
            big = big.max(v.norm());
            dev = dev.max((v - self.value(1.0 - x)).norm());
        }
        dev <= tol * (1.0 + big)
    }

    /// `|int_0^x q(t) Q(t) dt - Q(x)^2 / 2|` with `Q(t) = int_0^t q`.
    pub fn iterated_integral_residual(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} is outside [0, 1]")));
        }
        let rule = GaussLegendre::new(16);
        let panels = if self.term_form() {
            4 * (1 + self.max_frequency() as usize)
        } else {
            4 * self.samples.as_ref().map_or(1, |s| s.len())
        };
        let mut lhs = Complex64::new(0.0, 0.0);
        for (t, w) in crate::quad::composite(&rule, 0.0, x, panels) {
            lhs += self.value(t) * self.integral_q(0.0, t, None)? * w;
        }
        let qx = self.integral_q(0.0, x, None)?;
        Ok((lhs - 0.5 * qx * qx).norm())
    }
}

/// `int_a^b e^{i w t} dt`, stable for small `|w (b - a)|`.
pub(crate) fn exp_integral(w: Complex64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    let z = Complex64::new(0.0, 1.0) * w * len;
    (Complex64::new(0.0, 1.0) * w * a).exp() * len * expm1_over(z)
}

/// `(e^z - 1) / z`.
pub(crate) fn expm1_over(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..30 {
            term = term * z / k as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}
