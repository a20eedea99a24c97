//! Argument-principle zero counting on rectangles and rectangle subdivision.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result};

/// Axis-aligned rectangle `[re0, re1] x [im0, im1]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Self {
        Self { re0, re1, im0, im1 }
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    pub fn width(&self) -> f64 {
        self.re1 - self.re0
    }

    pub fn height(&self) -> f64 {
        self.im1 - self.im0
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re0 && z.re <= self.re1 && z.im >= self.im0 && z.im <= self.im1
    }

    /// Counter-clockwise corners starting at the lower left.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re0, self.im0),
            Complex64::new(self.re1, self.im0),
            Complex64::new(self.re1, self.im1),
            Complex64::new(self.re0, self.im1),
        ]
    }

    /// Splits along the longer side at fraction `t` of it.
    pub fn split(&self, t: f64) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let m = self.re0 + t * self.width();
            (Rect { re1: m, ..*self }, Rect { re0: m, ..*self })
        } else {
            let m = self.im0 + t * self.height();
            (Rect { im1: m, ..*self }, Rect { im0: m, ..*self })
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WindingOptions {
    /// Initial samples per edge.
    pub per_edge: usize,
    /// Maximum bisection depth between two samples.
    pub max_depth: usize,
    /// Contour is rejected when `|f| < min_rel * max |f|` somewhere on it.
    pub min_rel: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self { per_edge: 24, max_depth: 24, min_rel: 1e-10 }
    }
}

/// Number of zeros of `f` inside `rect` (with multiplicity) as the winding
/// number of `f` along its boundary, traced with adaptive phase continuation.
pub fn count_zeros<F>(mut f: F, rect: &Rect, opts: &WindingOptions) -> Result<usize>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let corners = rect.corners();
    let n = opts.per_edge.max(2);
    let mut pts: Vec<(Complex64, Complex64)> = Vec::with_capacity(4 * n + 1);
    for e in 0..4 {
        let a = corners[e];
        let b = corners[(e + 1) % 4];
        for k in 0..n {
            let z = a + (b - a) * (k as f64 / n as f64);
            pts.push((z, f(z)?));
        }
    }
    pts.push(pts[0]);
    let scale = pts.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
    if !scale.is_finite() {
        return Err(Error::Integration { x: 1.0, reason: "non-finite value on contour".into() });
    }
    let floor = opts.min_rel * scale;
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += phase_change(&mut f, w[0], w[1], floor, opts.max_depth)?;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.05 || rounded < 0.0 {
        return Err(Error::Certification(alloc::format!("non-integer winding {turns:.4} on {rect:?}")));
    }
    Ok(rounded as usize)
}

fn phase_change<F>(
    f: &mut F,
    a: (Complex64, Complex64),
    b: (Complex64, Complex64),
    floor: f64,
    depth: usize,
) -> Result<f64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    for (z, v) in [a, b] {
        if v.norm() < floor {
            return Err(Error::BoundaryTooClose { at: z, value: v.norm() });
        }
    }
    let d = (b.1 / a.1).arg();
    let ratio = b.1.norm() / a.1.norm();
    if d.abs() <= PI / 4.0 && (0.2..=5.0).contains(&ratio) {
        return Ok(d);
    }
    if depth == 0 {
        if d.abs() < 0.9 * PI {
            return Ok(d);
        }
        return Err(Error::BoundaryTooClose { at: a.0, value: a.1.norm().min(b.1.norm()) });
    }
    let zm = 0.5 * (a.0 + b.0);
    let m = (zm, f(zm)?);
    Ok(phase_change(f, a, m, floor, depth - 1)? + phase_change(f, m, b, floor, depth - 1)?)
}

/// Leaf of a subdivision: a rectangle holding `count` zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leaf {
    pub rect: Rect,
    pub count: usize,
}

/// Splits `rect` until each piece with zeros has both sides `<= min_side`
/// and at most `max_count` zeros. Split lines that pass too close to a zero
/// are moved.
pub fn subdivide<F>(mut f: F, rect: &Rect, opts: &WindingOptions, min_side: f64, max_count: usize) -> Result<Vec<Leaf>>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let total = count_zeros(&mut f, rect, opts)?;
    let mut out = Vec::new();
    let mut stack = alloc::vec![(*rect, total, 0usize)];
    const FRACTIONS: [f64; 6] = [0.5137, 0.4731, 0.5589, 0.4213, 0.6071, 0.3719];
    while let Some((r, n, depth)) = stack.pop() {
        if n == 0 {
            continue;
        }
        let small = r.width().max(r.height()) <= min_side;
        if (small && n <= max_count) || depth > 60 || r.width().max(r.height()) < 1e-6 {
            out.push(Leaf { rect: r, count: n });
            continue;
        }
        let mut done = false;
        for (k, &t) in FRACTIONS.iter().enumerate() {
            let (a, b) = r.split(t);
            let na = match count_zeros(&mut f, &a, opts) {
                Ok(v) => v,
                Err(Error::BoundaryTooClose { .. }) | Err(Error::Certification(_)) if k + 1 < FRACTIONS.len() => {
                    continue
                }
                Err(e) => return Err(e),
            };
            let nb = match count_zeros(&mut f, &b, opts) {
                Ok(v) => v,
                Err(Error::BoundaryTooClose { .. }) | Err(Error::Certification(_)) if k + 1 < FRACTIONS.len() => {
                    continue
                }
                Err(e) => return Err(e),
            };
            if na + nb != n {
                if k + 1 < FRACTIONS.len() {
                    continue;
                }
                return Err(Error::Certification(alloc::format!("subdivision counts {na} + {nb} != {n} on {r:?}")));
            }
            stack.push((a, na, depth + 1));
            stack.push((b, nb, depth + 1));
            done = true;
            break;
        }
        if !done {
            out.push(Leaf { rect: r, count: n });
        }
    }
    out.sort_by(|x, y| x.rect.re0.total_cmp(&y.rect.re0).then(x.rect.im0.total_cmp(&y.rect.im0)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta0_periodic(mu: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 4.0) * mu * (1.0 - mu.cos()))
    }

    #[test]
    fn counts_double_zero() {
        let o = WindingOptions::default();
        assert_eq!(count_zeros(delta0_periodic, &Rect::new(PI, 3.0 * PI, -1.0, 1.0), &o).unwrap(), 2);
        assert_eq!(count_zeros(delta0_periodic, &Rect::new(0.5, PI, -1.0, 1.0), &o).unwrap(), 0);
    }

    #[test]
    fn too_close_is_reported() {
        let o = WindingOptions::default();
        let r = count_zeros(|z| Ok(z - 1.0), &Rect::new(1.0, 2.0, -1.0, 1.0), &o);
        assert!(matches!(r, Err(Error::BoundaryTooClose { .. })));
    }

    #[test]
    fn subdivision_isolates_zeros() {
        let f = |z: Complex64| Ok((z - 0.3) * (z + 0.7) * (z - Complex64::new(0.1, 0.5)));
        let leaves = subdivide(f, &Rect::new(-2.0, 2.0, -1.0, 1.0), &WindingOptions::default(), 0.1, 1).unwrap();
        assert_eq!(leaves.len(), 3);
        assert!(leaves.iter().all(|l| l.count == 1));
        assert!(leaves.iter().any(|l| l.rect.contains(Complex64::new(0.3, 0.0))));
    }
}
