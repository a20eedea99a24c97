//! Real-axis Hill discriminant `D(lambda) = c(1) + s'(1)` in double or
//! double-double arithmetic, by piecewise Taylor series.
//!
//! Only cosine-series potentials are accepted: their Taylor coefficients at a
//! node `i/N` need `sin`/`cos` of rational turns, which are computed here to
//! full working precision.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

#[cfg(not(feature = "std"))]
use num_traits::Float;
use twofloat::TwoFloat;

use crate::potential::Builtin;
use crate::{Error, Potential, Result};

/// Arithmetic needed by the series solver.
pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EPS: f64;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn pi() -> Self;
    /// Division by a double; full working precision.
    fn div_f64(self, d: f64) -> Self;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn pi() -> Self {
        core::f64::consts::PI
    }
    fn div_f64(self, d: f64) -> Self {
        self / d
    }
}

impl Real for TwoFloat {
    const EPS: f64 = 1e-32;
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn pi() -> Self {
        twofloat::consts::PI
    }
    // double-double by double-double division in twofloat 0.8 is only
    // accurate to about 1e-16, the double divisor path is exact
    fn div_f64(self, d: f64) -> Self {
        self / d
    }
}

/// `(sin, cos)` of `2 pi m / n` for `n` a multiple of 8.
pub fn sin_cos_turn<R: Real>(m: i64, n: u64) -> (R, R) {
    debug_assert!(n.is_multiple_of(8) && n > 0);
    let ni = n as i64;
    let m = m.rem_euclid(ni);
    let octant = 8 * m / ni;
    let rem = 8 * m - octant * ni;
    // angle = j pi/2 + y with |y| <= pi/4
    let quarter = |r: i64| (R::pi() * R::from_f64(r as f64)).div_f64((4 * n) as f64);
    let (j, y) = if octant % 2 == 0 { (octant / 2, quarter(rem)) } else { ((octant + 1) / 2, -quarter(ni - rem)) };
    let (s, c) = taylor_sin_cos(y);
    match j % 4 {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

fn taylor_sin_cos<R: Real>(y: R) -> (R, R) {
    let y2 = y * y;
    let mut s = R::zero();
    let mut c = R::zero();
    let mut ts = y;
    let mut tc = R::from_f64(1.0);
    for k in 0..30 {
        s = s + ts;
        c = c + tc;
        let a = (2 * k + 2) as f64;
        ts = -(ts * y2).div_f64(a * (a + 1.0));
        tc = -(tc * y2).div_f64(a * (a - 1.0));
        if tc.to_f64().abs() < 1e-40 {
            break;
        }
    }
    (s, c)
}

const MAX_TERMS: usize = 64;

/// Cosine coefficients `q(x) = sum c_k cos(2 pi k x)` in working precision.
#[derive(Debug, Clone)]
pub struct CosineSeries<R> {
    pub terms: Vec<(u32, R)>,
}

impl<R: Real> CosineSeries<R> {
    /// Real cosine series of `p`; builtins are rebuilt from their parameters
    /// so that `pi^2` factors carry full precision.
    pub fn from_potential(p: &Potential) -> Result<Self> {
        let pi2 = R::pi() * R::pi();
        let f = R::from_f64;
        let terms = match p.builtin() {
            Some(Builtin::Zero) => Vec::new(),
            Some(Builtin::Mathieu { a }) => alloc::vec![(1, f(2.0) * pi2 * f(a))],
            Some(Builtin::TwoTerm { alpha, t }) => {
                alloc::vec![(1, -(f(4.0) * pi2 * f(alpha) * f(t))), (2, -(f(2.0) * pi2 * f(alpha) * f(alpha))),]
            }
            None => {
                if p.samples().is_some() && p.terms().is_empty() {
                    return Err(Error::UnsupportedPotential("the real-axis solver needs a cosine series".into()));
                }
                let mut v = Vec::new();
                for t in p.terms() {
                    if t.coeff.im != 0.0 {
                        return Err(Error::UnsupportedPotential("the real-axis solver needs a real potential".into()));
                    }
                    v.push((t.k, f(t.coeff.re)));
                }
                v
            }
        };
        Ok(Self { terms })
    }

    fn max_k(&self) -> u32 {
        self.terms.iter().map(|t| t.0).max().unwrap_or(0)
    }

    fn l1(&self) -> f64 {
        self.terms.iter().map(|t| t.1.to_f64().abs()).sum()
    }
}

/// `D(lambda)` and `dD/dlambda` for `-u'' + q u = lambda u`.
#[derive(Debug, Clone)]
pub struct HillDiscriminant<R> {
    q: CosineSeries<R>,
    // scaled coefficients q_j h^j per step, keyed by the step count
    cache: BTreeMap<u64, Vec<Vec<R>>>,
}

impl<R: Real> HillDiscriminant<R> {
    pub fn new(p: &Potential) -> Result<Self> {
        Ok(Self { q: CosineSeries::from_potential(p)?, cache: BTreeMap::new() })
    }

    fn steps(&self, lambda: f64) -> u64 {
        let two_pi = 2.0 * core::f64::consts::PI;
        let omega = lambda.abs().sqrt().max(two_pi * self.q.max_k() as f64).max(self.q.l1().sqrt());
        8 * ((omega / 4.0).ceil() as u64).max(1)
    }

    fn coefficients(&mut self, n: u64) -> &Vec<Vec<R>> {
        let q = &self.q;
        self.cache.entry(n).or_insert_with(|| {
            let h = R::from_f64(1.0).div_f64(n as f64);
            let two_pi = R::from_f64(2.0) * R::pi();
            // c_k (2 pi k h)^j / j!
            let base: Vec<Vec<R>> = q
                .terms
                .iter()
                .map(|(k, c)| {
                    let w = two_pi * R::from_f64(*k as f64) * h;
                    let mut row = Vec::with_capacity(MAX_TERMS);
                    let mut t = *c;
                    for j in 0..MAX_TERMS {
                        row.push(t);
                        t = (t * w).div_f64((j + 1) as f64);
                    }
                    row
                })
                .collect();
            (0..n)
                .map(|i| {
                    let mut out = alloc::vec![R::zero(); MAX_TERMS];
                    for ((k, _), row) in q.terms.iter().zip(&base) {
                        let (s, c) = sin_cos_turn::<R>(*k as i64 * i as i64, n);
                        let cyc = [c, -s, -c, s];
                        for j in 0..MAX_TERMS {
                            out[j] = out[j] + row[j] * cyc[j % 4];
                        }
                    }
                    out
                })
                .collect()
        })
    }

    /// `(D, D')` at `lambda`.
    pub fn eval(&mut self, lambda: R) -> (R, R) {
        let n = self.steps(lambda.to_f64());
        let h = R::from_f64(1.0).div_f64(n as f64);
        let h2 = h * h;
        let coeffs = self.coefficients(n).clone();
        let one = R::from_f64(1.0);
        let zero = R::zero();
        // per solution: u, u', du/dlambda, du'/dlambda
        let mut c = [one, zero, zero, zero];
        let mut s = [zero, one, zero, zero];
        let mut r = alloc::vec![zero; MAX_TERMS];
        for qs in &coeffs {
            r.copy_from_slice(qs);
            r[0] = r[0] - lambda;
            c = taylor_step(&r, n as f64, h, h2, c);
            s = taylor_step(&r, n as f64, h, h2, s);
        }
        (c[0] + s[1], c[2] + s[3])
    }
}

fn taylor_step<R: Real>(r: &[R], n: f64, h: R, h2: R, y: [R; 4]) -> [R; 4] {
    let mut u = [R::zero(); MAX_TERMS];
    let mut v = [R::zero(); MAX_TERMS];
    u[0] = y[0];
    u[1] = y[1] * h;
    v[0] = y[2];
    v[1] = y[3] * h;
    let scale = [u[0], u[1], v[0], v[1]].iter().map(|t| t.to_f64().abs()).fold(1e-300, f64::max);
    let mut last = 1;
    for j in 0..MAX_TERMS - 2 {
        let mut su = R::zero();
        let mut sv = R::zero();
        for i in 0..=j {
            su = su + r[i] * u[j - i];
            sv = sv + r[i] * v[j - i];
        }
        let d = ((j + 1) * (j + 2)) as f64;
        u[j + 2] = (h2 * su).div_f64(d);
        v[j + 2] = (h2 * (sv - u[j])).div_f64(d);
        last = j + 2;
        let tail =
            u[j + 1].to_f64().abs() + u[j + 2].to_f64().abs() + v[j + 1].to_f64().abs() + v[j + 2].to_f64().abs();
        if j >= 4 && tail < 1e-3 * R::EPS * scale {
            break;
        }
    }
    let mut out = [R::zero(); 4];
    for j in 0..=last {
        let jf = R::from_f64(j as f64);
        out[0] = out[0] + u[j];
        out[2] = out[2] + v[j];
        if j > 0 {
            out[1] = out[1] + jf * u[j];
            out[3] = out[3] + jf * v[j];
        }
    }
    out[1] = out[1] * R::from_f64(n);
    out[3] = out[3] * R::from_f64(n);
    out
}

/// One gap of the periodic/antiperiodic spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawGap {
    pub n: usize,
    /// Location and value of the extremum of `D` inside the gap.
    pub extremum: f64,
    pub d_extremum: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    /// `lambda_plus - lambda_minus`, formed before rounding to double.
    pub gamma: f64,
    /// `D > 0` at the extremum exactly when `n` is even.
    pub parity_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawGaps {
    pub lambda0: f64,
    pub gaps: Vec<RawGap>,
}

fn same_sign<R: Real>(a: R, b: R) -> bool {
    (a < R::zero()) == (b < R::zero())
}

/// Illinois iteration for a sign change of `f` on `[a, b]`.
fn illinois<R: Real>(mut f: impl FnMut(R) -> R, mut a: R, mut b: R) -> R {
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..200 {
        if fb == R::zero() {
            return b;
        }
        let width = (b - a).abs().to_f64();
        if width <= 64.0 * R::EPS * b.abs().to_f64().max(1.0) {
            break;
        }
        let mut c = b - fb * (b - a) / (fb - fa);
        // stay strictly inside the bracket
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !(c > lo && c < hi) {
            c = (a + b).div_f64(2.0);
        }
        let fc = f(c);
        if same_sign(fc, fb) {
            fa = fa.div_f64(2.0);
        } else {
            a = b;
            fa = fb;
        }
        b = c;
        fb = fc;
    }
    b
}

/// Newton on `g` with derivative, safeguarded by bisection on `[lo, hi]`.
fn rtsafe<R: Real>(mut g: impl FnMut(R) -> (R, R), mut lo: R, mut hi: R) -> R {
    let (glo, _) = g(lo);
    let mut x = (lo + hi).div_f64(2.0);
    for _ in 0..300 {
        let (v, d) = g(x);
        if v == R::zero() {
            return x;
        }
        if same_sign(v, glo) {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = if d == R::zero() { hi } else { x - v / d };
        if !(next > lo && next < hi) {
            next = (lo + hi).div_f64(2.0);
        }
        let step = (next - x).abs().to_f64();
        x = next;
        if step <= 16.0 * R::EPS * x.abs().to_f64().max(1.0)
            || (hi - lo).abs().to_f64() <= 16.0 * R::EPS * x.abs().to_f64().max(1.0)
        {
            break;
        }
    }
    x
}

/// `lambda_0` and gaps `1..=n_max` of the Hill operator with potential `p`,
/// refined in the arithmetic `R`.
pub fn hill_gaps<R: Real>(p: &Potential, n_max: usize) -> Result<RawGaps> {
    let mut fast = HillDiscriminant::<f64>::new(p)?;
    let mut slow = HillDiscriminant::<R>::new(p)?;
    let l1 = fast.q.l1();
    // lambda = s|s|; the lowest periodic eigenvalue lies above min q >= -l1
    let s0 = -(l1.sqrt() + 1.0);
    let ds = 0.05;
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let lam = |s: f64| s * s.abs();
    let mut prev = (s0, fast.eval(lam(s0)).1);
    let s_cap = s0.abs() + core::f64::consts::PI * (n_max as f64 + 4.0) + 10.0;
    let mut k = 1;
    while brackets.len() < n_max + 1 {
        let s = s0 + ds * k as f64;
        if s > s_cap {
            return Err(Error::Certification("could not locate all extrema of the discriminant".into()));
        }
        let d = fast.eval(lam(s)).1;
        if d == 0.0 || (d < 0.0) != (prev.1 < 0.0) {
            brackets.push((lam(prev.0), lam(s)));
        }
        prev = (s, d);
        k += 1;
    }
    let mut extrema: Vec<(R, R)> = Vec::new();
    for (a, b) in &brackets {
        let x = illinois(|l: R| slow.eval(l).1, R::from_f64(*a), R::from_f64(*b));
        let d = slow.eval(x).0;
        extrema.push((x, d));
    }
    let two = R::from_f64(2.0);
    let start = R::from_f64(lam(s0));
    let lambda0 = rtsafe(
        |l: R| {
            let (v, d) = slow.eval(l);
            (v - two, d)
        },
        start,
        extrema[0].0,
    );
    let mut gaps = Vec::new();
    for n in 1..=n_max {
        let (x, d) = extrema[n - 1];
        let even = n % 2 == 0;
        let target = if even { two } else { -two };
        let excess = if even { d - two } else { -(d + two) };
        let closed = excess.to_f64() <= 64.0 * R::EPS * 2.0;
        let (lm, lp) = if closed {
            (x, x)
        } else {
            let left = if n == 1 { lambda0 } else { extrema[n - 2].0 };
            let right = extrema[n].0;
            let mut level = |l: R| {
                let (v, dv) = slow.eval(l);
                (v - target, dv)
            };
            (rtsafe(&mut level, left, x), rtsafe(&mut level, x, right))
        };
        gaps.push(RawGap {
            n,
            extremum: x.to_f64(),
            d_extremum: d.to_f64(),
            lambda_minus: lm.to_f64(),
            lambda_plus: lp.to_f64(),
            gamma: (lp - lm).to_f64(),
            parity_ok: (d.to_f64() > 0.0) == even,
        });
    }
    Ok(RawGaps { lambda0: lambda0.to_f64(), gaps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turns_match_libm() {
        for (m, n) in [(0, 8), (1, 8), (3, 16), (5, 24), (-7, 40), (123, 64), (63, 64)] {
            let (s, c): (f64, f64) = sin_cos_turn(m, n);
            let a = 2.0 * core::f64::consts::PI * m as f64 / n as f64;
            assert!((s - a.sin()).abs() < 1e-15 && (c - a.cos()).abs() < 1e-15, "{m}/{n}");
        }
        let (s, c): (TwoFloat, TwoFloat) = sin_cos_turn(1, 24);
        // sin(pi/12)^2 + cos^2 = 1 and sin(pi/12) = (sqrt6 - sqrt2)/4
        let one = s * s + c * c - 1.0;
        assert!(one.hi().abs() < 1e-30, "{one:?}");
        let sq = (s * 4.0) * (s * 4.0);
        // (sqrt6 - sqrt2)^2 = 8 - 2 sqrt12, so 8 - sq = 4 sqrt3
        let t = (TwoFloat::from(8.0) - sq).div_f64(4.0);
        assert!((t * t - 3.0).hi().abs() < 1e-30);
    }

    #[test]
    fn free_discriminant() {
        let mut d = HillDiscriminant::<f64>::new(&Potential::zero()).unwrap();
        for lam in [-3.0f64, 0.5, 40.0, 400.0] {
            let (v, dv) = d.eval(lam);
            let (exact, dexact) = if lam > 0.0 {
                let w = lam.sqrt();
                (2.0 * w.cos(), -w.sin() / w)
            } else {
                let w = (-lam).sqrt();
                (2.0 * w.cosh(), -w.sinh() / w)
            };
            assert!((v - exact).abs() < 1e-11 * exact.abs().max(1.0), "{lam}");
            assert!((dv - dexact).abs() < 1e-10 * dexact.abs().max(1.0), "{lam}");
        }
    }

    #[test]
    fn double_double_agrees_with_double() {
        let p = Potential::two_term(0.5, 1.0).unwrap();
        let mut a = HillDiscriminant::<f64>::new(&p).unwrap();
        let mut b = HillDiscriminant::<TwoFloat>::new(&p).unwrap();
        for lam in [-5.0, 10.0, 90.0, 300.0] {
            let (x, dx) = a.eval(lam);
            let (y, dy) = b.eval(TwoFloat::from(lam));
            assert!((x - y.to_f64()).abs() < 1e-11 * x.abs().max(1.0));
            assert!((dx - dy.to_f64()).abs() < 1e-10 * dx.abs().max(1.0));
        }
    }

    #[test]
    fn two_term_gaps_match_reference() {
        // reference values from 50-digit arithmetic
        let p = Potential::two_term(0.5, 1.0).unwrap();
        let g = hill_gaps::<TwoFloat>(&p, 7).unwrap();
        assert!((g.lambda0 + 4.93480220054).abs() < 1e-9);
        let want = [(1, 20.640559), (3, 0.90734083), (5, 0.006005104), (7, 1.4626725e-5)];
        for (n, v) in want {
            let r = &g.gaps[n - 1];
            assert!(r.parity_ok);
            assert!((r.gamma - v).abs() < 1e-6 * v, "{n}: {}", r.gamma);
        }
        for n in [2, 4, 6] {
            assert!(g.gaps[n - 1].gamma.abs() < 1e-12, "{n}: {}", g.gaps[n - 1].gamma);
        }
        assert!((g.gaps[0].lambda_minus + 1.73979018745).abs() < 1e-9);
        assert!((g.gaps[0].lambda_plus - 18.9007689513).abs() < 1e-9);
        assert!((g.gaps[2].lambda_minus - 89.0087965088).abs() < 1e-9);
        assert!((g.gaps[1].lambda_minus - 41.0771565456).abs() < 1e-9);
    }
}
