//! Characteristic determinant, eigenvalue search and localization checks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::boundary::{classify, BoundaryMatrix, CaseTag, Classification};
use crate::fundsol::{self, EndValues};
use crate::roots::{count_zeros, subdivide, Rect, WindingOptions};
use crate::{Error, Potential, Result, SolverConfig};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `Delta(mu) = B1(phi) B2(psi) - B1(psi) B2(phi)` from the fundamental system.
pub fn delta(p: &Potential, a: &BoundaryMatrix, mu: Complex64, cfg: &SolverConfig) -> Result<Complex64> {
    let fs = fundsol::solve_fundamental(p, mu, cfg, &[])?;
    let (f, g) = (fs.phi_ends(), fs.psi_ends());
    Ok(a.apply_form(0, &f) * a.apply_form(1, &g) - a.apply_form(0, &g) * a.apply_form(1, &f))
}

/// Closed form of `Delta` for `q = 0` under the regularity condition,
/// `-+ i S mu e^{-i mu}(e^{i mu} -+ 1)[(e^{i mu} -+ 1) +- A34/(i S mu) (e^{i mu} +- 1)]`
/// with `S = A13 + A24` (upper signs in case 1).
pub fn delta0_closed(a: &BoundaryMatrix, mu: Complex64, class: &Classification) -> Result<Complex64> {
    let _ = a;
    let s = class.case_tag.sign();
    if !class.regular_not_strongly {
        return Err(Error::Unsupported(class.failing.clone().unwrap_or_default()));
    }
    let m = &class.minors;
    let big_s = m.a13 + m.a24;
    let e = (I * mu).exp();
    // upper sign: -+ -> -, +- -> +
    let mp = s; // value of "-+" in front of 1
    let pm = -s;
    Ok(mp * I * big_s * mu * (-I * mu).exp() * (e + mp) * ((e + mp) + pm * m.a34 / (I * big_s * mu) * (e + pm)))
}

/// Trigonometric form `-+ 2i (A14 + A23) mu (1 -+ cos mu) - 2i A34 sin mu`.
///
/// This is the expanded determinant; it differs from the frequently quoted
/// `-2i(A14 + A23) mu (1 -+ cos mu) + 2i A34 sin mu` in the sign of the `A34`
/// term and, in case 2, of the first term.
pub fn delta0_trig(a: &BoundaryMatrix, mu: Complex64, class: &Classification) -> Result<Complex64> {
    let _ = a;
    if !class.regular_not_strongly {
        return Err(Error::Unsupported(class.failing.clone().unwrap_or_default()));
    }
    let s = class.case_tag.sign();
    let m = &class.minors;
    Ok(s * 2.0 * I * (m.a14 + m.a23) * mu * (1.0 + s * mu.cos()) - 2.0 * I * m.a34 * mu.sin())
}

/// `theta = Delta - Delta_0 - (A14 - A23)/2 [e^{i mu} I_- - e^{-i mu} I_+]`,
/// `I_+- = int_0^1 e^{+-2 i mu t} q(t) dt`. Needs a mean-zero potential.
pub fn delta_reduction_residual(
    p: &Potential,
    a: &BoundaryMatrix,
    mu: Complex64,
    cfg: &SolverConfig,
) -> Result<Complex64> {
    let class = classify(a, cfg.classify_tol)?;
    if class.minors.a12.norm() > cfg.classify_tol * class.minors.scale() {
        return Err(Error::NotNormalizable(class.minors.a12.norm()));
    }
    let scale = 1.0 + p.l1_norm();
    if p.mean().norm() > 1e-12 * scale {
        return Err(Error::UnsupportedPotential("the reduction needs a mean-zero potential".into()));
    }
    let d = delta(p, a, mu, cfg)?;
    let d0 = delta0_general(a, mu);
    let ip = p.integral_q(0.0, 1.0, Some(2.0 * mu))?;
    let im = p.integral_q(0.0, 1.0, Some(-2.0 * mu))?;
    let m = &class.minors;
    let corr = 0.5 * (m.a14 - m.a23) * ((I * mu).exp() * im - (-I * mu).exp() * ip);
    Ok(d - d0 - corr)
}

/// `Delta_0` for any matrix, by Cauchy–Binet on the minors.
pub fn delta0_general(a: &BoundaryMatrix, mu: Complex64) -> Complex64 {
    let m = a.minors();
    let chi0 = m.a12 * mu * mu.sin() - m.a13 - m.a24 - (m.a14 + m.a23) * mu.cos() + m.a34 * sinc(mu);
    -2.0 * I * mu * chi0
}

fn sinc(mu: Complex64) -> Complex64 {
    if mu.norm() < 1e-4 {
        1.0 - mu * mu / 6.0
    } else {
        mu.sin() / mu
    }
}

/// Search function `chi(mu) = Delta(mu) / (-2 i mu)` built on the
/// cosine/sine system: entire, even, regular at `mu = 0`.
#[derive(Debug, Clone)]
pub struct Characteristic<'a> {
    pub p: &'a Potential,
    pub a: BoundaryMatrix,
    /// Integrates with `refine_rtol`.
    pub cfg: SolverConfig,
}

impl<'a> Characteristic<'a> {
    pub fn new(p: &'a Potential, a: BoundaryMatrix, cfg: &SolverConfig) -> Self {
        Self { p, a, cfg: cfg.refining() }
    }

    fn combine(&self, c: &EndValues, s: &EndValues) -> (Complex64, f64) {
        let (b1c, b2c) = (self.a.apply_form(0, c), self.a.apply_form(1, c));
        let (b1s, b2s) = (self.a.apply_form(0, s), self.a.apply_form(1, s));
        let m = c.max_abs().max(s.max_abs());
        let row = |r: usize| self.a.rows[r].iter().map(|x| x.norm()).sum::<f64>() * m;
        (b1c * b2s - b1s * b2c, row(0) * row(1))
    }

    pub fn chi(&self, mu: Complex64) -> Result<Complex64> {
        Ok(self.chi_mesh(mu)?.0)
    }

    /// `chi`, its rounding scale `|row1| |row2| max|ends|^2`, and the mesh.
    pub fn chi_mesh(&self, mu: Complex64) -> Result<(Complex64, f64, Vec<f64>)> {
        let cs = fundsol::cos_sin(self.p, mu, &self.cfg)?;
        let (v, scale) = self.combine(&cs.c, &cs.s);
        Ok((v, scale, cs.mesh))
    }

    pub fn chi_on(&self, mu: Complex64, mesh: &[f64]) -> Complex64 {
        let (c, s) = fundsol::cos_sin_on(self.p, mu, mesh);
        self.combine(&c, &s).0
    }

    /// `(chi, chi')` with a central difference on a frozen mesh.
    pub fn chi_d1(&self, mu: Complex64) -> Result<(Complex64, Complex64, f64)> {
        let (v, scale, mesh) = self.chi_mesh(mu)?;
        let h = 1e-5;
        let d = (self.chi_on(mu + h, &mesh) - self.chi_on(mu - h, &mesh)) / (2.0 * h);
        Ok((v, d, scale))
    }

    /// `(chi, chi', chi'')` from a five-point stencil on a frozen mesh.
    pub fn chi_d2(&self, mu: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let (v, _, mesh) = self.chi_mesh(mu)?;
        let h = 1e-3;
        let f = |k: f64| self.chi_on(mu + k * h, &mesh);
        let (p1, m1, p2, m2) = (f(1.0), f(-1.0), f(2.0), f(-2.0));
        let d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        let d2 = (-p2 + 16.0 * p1 - 30.0 * v + 16.0 * m1 - m2) / (12.0 * h * h);
        Ok((v, d1, d2))
    }

    /// `Delta'(mu)` by Richardson-extrapolated central differences with
    /// `h = 1e-6 max(1, |mu|)` on a frozen mesh.
    pub fn delta_prime(&self, mu: Complex64) -> Result<Complex64> {
        let (_, _, mesh) = self.chi_mesh(mu)?;
        let big = |z: Complex64| -2.0 * I * z * self.chi_on(z, &mesh);
        let h = 1e-6 * mu.norm().max(1.0);
        let d = |h: f64| (big(mu + h) - big(mu - h)) / (2.0 * h);
        Ok((4.0 * d(0.5 * h) - d(h)) / 3.0)
    }
}

/// Search-function value and size in one go; see [`Characteristic`].
pub fn search_function(p: &Potential, a: &BoundaryMatrix, mu: Complex64, cfg: &SolverConfig) -> Result<Complex64> {
    Characteristic::new(p, *a, cfg).chi(mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SeriesTag {
    Prime,
    DoublePrime,
    Unresolved,
}

/// Localization disk `|mu - center| < radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralPoint {
    pub mu: Complex64,
    /// Eigenvalue of the original operator, `mu^2 + shift`.
    pub lambda: Complex64,
    /// `mu^2`, the eigenvalue for the mean-zero potential.
    pub lambda_shifted: Complex64,
    pub cluster: usize,
    pub series_tag: SeriesTag,
    pub multiplicity: usize,
    pub delta_prime: Complex64,
    pub disk: Option<Disk>,
    /// `|chi(mu)|` relative to `|row1| |row2| max|ends|^2`.
    pub newton_residual: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RegionKind {
    /// Symmetric rectangle around the origin.
    Low,
    Cluster(usize),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Region {
    pub kind: RegionKind,
    pub rect: Rect,
    pub center: Complex64,
    pub seeds: Vec<Complex64>,
}

/// Everything the per-region searches share.
#[derive(Debug, Clone)]
pub struct SpectrumPlan {
    /// Mean-zero version of the input potential.
    pub potential: Potential,
    pub matrix: BoundaryMatrix,
    pub class: Classification,
    pub strip: f64,
    pub n_max: usize,
    pub regions: Vec<Region>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Root {
    pub mu: Complex64,
    pub multiplicity: usize,
    /// Roots merged because they were closer than the merge tolerance.
    pub merged: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionResult {
    pub kind: RegionKind,
    pub winding: usize,
    pub roots: Vec<Root>,
    pub certified: bool,
    pub note: Option<String>,
}

/// Cluster center `2 pi n` (case 1) or `(2n - 1) pi` (case 2).
pub fn cluster_center(case_tag: CaseTag, n: usize) -> f64 {
    match case_tag {
        CaseTag::Case2 => (2 * n) as f64 * PI - PI,
        _ => (2 * n) as f64 * PI,
    }
}

fn winding_opts() -> WindingOptions {
    WindingOptions::default()
}

/// Lays out the low region and one rectangle per cluster, moving shared
/// vertical edges away from zeros of the search function.
pub fn plan(p: &Potential, a: &BoundaryMatrix, n_max: usize, cfg: &SolverConfig) -> Result<SpectrumPlan> {
    cfg.validate()?;
    if n_max == 0 {
        return Err(Error::Parameter("n_max must be at least 1".into()));
    }
    let class = classify(a, cfg.classify_tol)?;
    if !class.regular_not_strongly {
        return Err(Error::Unsupported(class.failing.clone().unwrap_or_default()));
    }
    let q = p.normalize_mean_zero();
    let m = fundsol::strip_bound(&q, cfg);
    let ch = Characteristic::new(&q, *a, cfg);
    let case2 = class.case_tag == CaseTag::Case2;
    let first = if case2 { 2 } else { 1 };
    // edge k separates cluster k from k + 1
    let nominal = |k: usize| if case2 { 2.0 * PI * k as f64 } else { PI * (2 * k + 1) as f64 };
    let mut edges = Vec::new();
    for k in (first - 1)..=n_max {
        edges.push(clear_edge(&ch, nominal(k), m)?);
    }
    let mut regions = Vec::new();
    let x0 = edges[0];
    regions.push(Region {
        kind: RegionKind::Low,
        rect: Rect::new(-x0, x0, -m, m),
        center: Complex64::new(0.0, 0.0),
        seeds: Vec::new(),
    });
    let b = class.b();
    for n in first..=n_max {
        let c = cluster_center(class.case_tag, n);
        let mut seeds = alloc::vec![Complex64::new(c, 0.0)];
        if class.theorem1_family {
            seeds.push(c + second_offset(class.case_tag, b, n));
        }
        regions.push(Region {
            kind: RegionKind::Cluster(n),
            rect: Rect::new(edges[n - first], edges[n - first + 1], -m, m),
            center: Complex64::new(c, 0.0),
            seeds,
        });
    }
    Ok(SpectrumPlan { potential: q, matrix: *a, class, strip: m, n_max, regions })
}

/// Leading offset of the second series: `b/(pi n)` in case 1, `-b/(pi n)` in case 2.
pub fn second_offset(case_tag: CaseTag, b: Complex64, n: usize) -> Complex64 {
    -case_tag.sign() * b / (PI * n as f64)
}

fn clear_edge(ch: &Characteristic<'_>, x: f64, m: f64) -> Result<f64> {
    const SHIFTS: [f64; 7] = [0.0, 0.05, -0.05, 0.1, -0.1, 0.2, -0.2];
    let mut best = (x, -1.0);
    for s in SHIFTS {
        let xe = x + s;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for k in 0..=32 {
            let z = Complex64::new(xe, -m + 2.0 * m * k as f64 / 32.0);
            let v = ch.chi(z)?.norm();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let margin = lo / hi.max(f64::MIN_POSITIVE);
        if margin > 1e-3 {
            return Ok(xe);
        }
        if margin > best.1 {
            best = (xe, margin);
        }
    }
    Ok(best.0)
}

/// Searches one region: winding count, then refined roots.
pub fn solve_region(plan: &SpectrumPlan, index: usize, cfg: &SolverConfig) -> RegionResult {
    let region = &plan.regions[index];
    let ch = Characteristic::new(&plan.potential, plan.matrix, cfg);
    let attempt = || -> Result<RegionResult> {
        match region.kind {
            RegionKind::Low => solve_low(&ch, region, cfg),
            RegionKind::Cluster(_) => {
                let n = count_zeros(|z| ch.chi(z), &region.rect, &winding_opts())?;
                let (roots, ok, note) = solve_cluster(&ch, &region.rect, n, &region.seeds, cfg);
                Ok(RegionResult { kind: region.kind, winding: n, roots, certified: ok, note })
            }
        }
    };
    attempt().unwrap_or_else(|e| RegionResult {
        kind: region.kind,
        winding: 0,
        roots: Vec::new(),
        certified: false,
        note: Some(format!("{e}")),
    })
}

fn solve_low(ch: &Characteristic<'_>, region: &Region, cfg: &SolverConfig) -> Result<RegionResult> {
    let leaves = subdivide(|z| ch.chi(z), &region.rect, &winding_opts(), 0.5, 2)?;
    let total: usize = leaves.iter().map(|l| l.count).sum();
    let mut roots = Vec::new();
    let mut ok = true;
    let mut notes = Vec::new();
    for leaf in &leaves {
        let (r, good, note) = solve_cluster(ch, &leaf.rect, leaf.count, &[leaf.rect.center()], cfg);
        ok &= good;
        if let Some(n) = note {
            notes.push(n);
        }
        roots.extend(r);
    }
    let found: usize = roots.iter().map(|r| r.multiplicity).sum();
    ok &= found == total;
    // one representative per eigenvalue lambda = mu^2
    let tiny = 1e-7;
    let mut kept = Vec::new();
    for r in roots {
        if r.mu.norm() <= tiny {
            kept.push(Root { mu: Complex64::new(0.0, 0.0), multiplicity: r.multiplicity / 2, ..r });
        } else if r.mu.re > tiny || (r.mu.re.abs() <= tiny && r.mu.im > 0.0) {
            kept.push(r);
        }
    }
    let lam: usize = kept.iter().map(|r| r.multiplicity).sum();
    ok &= 2 * lam == total;
    Ok(RegionResult {
        kind: RegionKind::Low,
        winding: total,
        roots: kept,
        certified: ok,
        note: if notes.is_empty() { None } else { Some(notes.join("; ")) },
    })
}

fn newton_deflated(
    ch: &Characteristic<'_>,
    start: Complex64,
    found: &[Root],
    rect: &Rect,
    cfg: &SolverConfig,
) -> Option<Root> {
    let mut z = start;
    let slack = 0.25 * rect.width().min(rect.height());
    let grown = Rect::new(rect.re0 - slack, rect.re1 + slack, rect.im0 - slack, rect.im1 + slack);
    for _ in 0..cfg.max_newton {
        let (v, d, scale) = ch.chi_d1(z).ok()?;
        if v == Complex64::new(0.0, 0.0) {
            return Some(Root { mu: z, multiplicity: 1, merged: false, residual: 0.0 });
        }
        let mut logd = d / v;
        for r in found {
            logd -= r.multiplicity as f64 / (z - r.mu);
        }
        let step = 1.0 / logd;
        z -= step;
        if !grown.contains(z) || !(z.re.is_finite() && z.im.is_finite()) {
            return None;
        }
        if step.norm() <= 4e-15 * z.norm().max(1.0) || v.norm() <= 1e-15 * scale {
            let (v, scale, _) = ch.chi_mesh(z).ok()?;
            return Some(Root {
                mu: z,
                multiplicity: 1,
                merged: false,
                residual: v.norm() / scale.max(f64::MIN_POSITIVE),
            });
        }
    }
    None
}

fn residual_at(ch: &Characteristic<'_>, z: Complex64) -> f64 {
    ch.chi_mesh(z).map(|(v, s, _)| v.norm() / s.max(f64::MIN_POSITIVE)).unwrap_or(f64::INFINITY)
}

/// Pair search through the critical point `m` of `chi`: for a close pair,
/// `chi ~ chi''(m)/2 ((mu - m)^2 - d^2)` with `d^2 = -2 chi(m)/chi''(m)`.
fn pair_via_critical_point(
    ch: &Characteristic<'_>,
    start: Complex64,
    rect: &Rect,
    cfg: &SolverConfig,
) -> Option<Vec<Root>> {
    let mut m = start;
    let mut last = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    for _ in 0..40 {
        let (v, d1, d2) = ch.chi_d2(m).ok()?;
        last = (v, d1, d2);
        if d2.norm() == 0.0 {
            return None;
        }
        let step = d1 / d2;
        m -= step;
        if !rect.contains(m) {
            return None;
        }
        if step.norm() <= 1e-13 * m.norm().max(1.0) {
            break;
        }
    }
    let (v, _, d2) = ch.chi_d2(m).unwrap_or(last);
    let half = (-2.0 * v / d2).sqrt();
    let tol = cfg.merge_tol * m.norm().max(1.0);
    if 2.0 * half.norm() < tol {
        return Some(alloc::vec![Root { mu: m, multiplicity: 2, merged: true, residual: residual_at(ch, m) }]);
    }
    let r1 = newton_deflated(ch, m + half, &[], rect, cfg)?;
    let r2 = newton_deflated(ch, m - half, &[r1], rect, cfg)?;
    if (r1.mu - r2.mu).norm() < tol {
        let mid = 0.5 * (r1.mu + r2.mu);
        return Some(alloc::vec![Root { mu: mid, multiplicity: 2, merged: true, residual: residual_at(ch, mid) }]);
    }
    Some(alloc::vec![r1, r2])
}

/// Finds `n` zeros (with multiplicity) of `chi` inside `rect`.
fn solve_cluster(
    ch: &Characteristic<'_>,
    rect: &Rect,
    n: usize,
    seeds: &[Complex64],
    cfg: &SolverConfig,
) -> (Vec<Root>, bool, Option<String>) {
    if n == 0 {
        return (Vec::new(), true, None);
    }
    let start = if seeds.is_empty() { rect.center() } else { seeds.iter().sum::<Complex64>() / seeds.len() as f64 };
    if n == 2 {
        if let Some(r) = pair_via_critical_point(ch, start, rect, cfg) {
            if r.iter().all(|x| rect.contains(x.mu)) {
                return (r, true, None);
            }
        }
    }
    let mut found: Vec<Root> = Vec::new();
    let mut starts: Vec<Complex64> = seeds.to_vec();
    let c = rect.center();
    for (i, j) in [(0.0, 0.0), (0.25, 0.1), (-0.25, -0.1), (0.1, 0.25), (-0.1, -0.25), (0.35, -0.3), (-0.35, 0.3)] {
        starts.push(c + Complex64::new(i * rect.width(), j * rect.height()));
    }
    for s in starts {
        if found.iter().map(|r| r.multiplicity).sum::<usize>() >= n {
            break;
        }
        if let Some(r) = newton_deflated(ch, s, &found, rect, cfg) {
            if rect.contains(r.mu) {
                found.push(r);
            }
        }
    }
    let found = merge_roots(ch, found, cfg);
    let total: usize = found.iter().map(|r| r.multiplicity).sum();
    if total == n {
        (found, true, None)
    } else {
        let note = format!(
            "found {total} of {n} zeros in [{:.4}, {:.4}] x [{:.3}, {:.3}]",
            rect.re0, rect.re1, rect.im0, rect.im1
        );
        (found, false, Some(note))
    }
}

fn merge_roots(ch: &Characteristic<'_>, mut roots: Vec<Root>, cfg: &SolverConfig) -> Vec<Root> {
    let mut out: Vec<Root> = Vec::new();
    roots.sort_by(|a, b| a.mu.re.total_cmp(&b.mu.re));
    for r in roots {
        if let Some(last) = out.iter_mut().find(|o| (o.mu - r.mu).norm() < cfg.merge_tol * r.mu.norm().max(1.0)) {
            let w = last.multiplicity as f64;
            last.mu = (last.mu * w + r.mu) / (w + 1.0);
            last.multiplicity += r.multiplicity;
            last.merged = true;
            last.residual = residual_at(ch, last.mu);
        } else {
            out.push(r);
        }
    }
    out
}

/// Turns region results into spectral points with tags, disks and `Delta'`.
pub fn assemble(plan: &SpectrumPlan, results: &[RegionResult], cfg: &SolverConfig) -> Result<Vec<SpectralPoint>> {
    let ch = Characteristic::new(&plan.potential, plan.matrix, cfg);
    let class = &plan.class;
    let shift = plan.potential.shift();
    let b = class.b();
    let mut points = Vec::new();
    for res in results {
        let mut cluster_points = Vec::new();
        for r in &res.roots {
            let cluster = match res.kind {
                RegionKind::Cluster(n) => n,
                RegionKind::Low => nearest_cluster(class.case_tag, r.mu),
            };
            let dp = if r.multiplicity == 1 { ch.delta_prime(r.mu)? } else { Complex64::new(0.0, 0.0) };
            cluster_points.push(SpectralPoint {
                mu: r.mu,
                lambda: r.mu * r.mu + shift,
                lambda_shifted: r.mu * r.mu,
                cluster,
                series_tag: SeriesTag::Unresolved,
                multiplicity: r.multiplicity,
                delta_prime: dp,
                disk: None,
                newton_residual: r.residual,
                certified: res.certified,
            });
        }
        if let RegionKind::Cluster(n) = res.kind {
            let c = cluster_center(class.case_tag, n);
            let simple = cluster_points.len() == 2 && cluster_points.iter().all(|p| p.multiplicity == 1);
            if class.theorem1_family && res.certified && simple && c >= cfg.mu0 {
                let second = Complex64::new(c, 0.0) + second_offset(class.case_tag, b, n);
                let r_n = b.norm() / (4.0 * PI * n as f64);
                let d0 = |p: &SpectralPoint| (p.mu - c).norm();
                let (i, j) = if d0(&cluster_points[0]) <= d0(&cluster_points[1]) { (0, 1) } else { (1, 0) };
                cluster_points[i].series_tag = SeriesTag::Prime;
                cluster_points[i].disk = Some(Disk { center: Complex64::new(c, 0.0), radius: r_n });
                cluster_points[j].series_tag = SeriesTag::DoublePrime;
                cluster_points[j].disk = Some(Disk { center: second, radius: r_n });
            }
        }
        points.extend(cluster_points);
    }
    points.sort_by(|a, b| {
        a.cluster
            .cmp(&b.cluster)
            .then(a.series_tag.cmp(&b.series_tag))
            .then(a.mu.re.total_cmp(&b.mu.re))
            .then(a.mu.im.total_cmp(&b.mu.im))
    });
    Ok(points)
}

fn nearest_cluster(case_tag: CaseTag, mu: Complex64) -> usize {
    let x = mu.re.abs();
    match case_tag {
        CaseTag::Case2 => ((x / PI + 1.0) / 2.0).round().max(1.0) as usize,
        _ => (x / (2.0 * PI)).round() as usize,
    }
}

/// Result of [`find_eigenvalues`].
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Spectrum {
    pub points: Vec<SpectralPoint>,
    pub regions: Vec<RegionResult>,
    pub strip: f64,
    pub merge_tol: f64,
}

impl Spectrum {
    pub fn all_certified(&self) -> bool {
        self.regions.iter().all(|r| r.certified)
    }

    pub fn unresolved(&self) -> Vec<&RegionResult> {
        self.regions.iter().filter(|r| !r.certified).collect()
    }

    /// Eigenvalues repeated by multiplicity, sorted by real part.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> =
            self.points.iter().flat_map(|p| core::iter::repeat_n(p.lambda, p.multiplicity)).collect();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }
}

/// All zeros with `Re mu` up to `2 pi n_max + pi` (case 1) or `2 pi n_max`
/// (case 2), each cluster certified by a winding count.
pub fn find_eigenvalues(p: &Potential, a: &BoundaryMatrix, n_max: usize, cfg: &SolverConfig) -> Result<Spectrum> {
    let plan = plan(p, a, n_max, cfg)?;
    let results: Vec<RegionResult> = (0..plan.regions.len()).map(|i| solve_region(&plan, i, cfg)).collect();
    finish(&plan, results, cfg)
}

/// Assembles region results computed elsewhere (e.g. in parallel).
pub fn finish(plan: &SpectrumPlan, results: Vec<RegionResult>, cfg: &SolverConfig) -> Result<Spectrum> {
    let points = assemble(plan, &results, cfg)?;
    Ok(Spectrum { points, regions: results, strip: plan.strip, merge_tol: cfg.merge_tol })
}

/// Least-squares slope of `log y` against `log x`.
pub fn growth_exponent(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Per-cluster localization data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalizationRow {
    pub n: usize,
    pub multiplicity_flag: bool,
    /// `|delta'_n|`, distance of the prime root from the cluster center.
    pub delta_prime_offset: Option<f64>,
    /// `|delta''_n -+ b/(pi n)|`.
    pub delta_double_prime_dev: Option<f64>,
    pub separation: Option<f64>,
    pub r_n: Option<f64>,
    pub disks_hold: Option<bool>,
    /// `|Delta'(mu)|` of the points of the cluster (simple points only).
    pub delta_prime_abs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalizationReport {
    pub rows: Vec<LocalizationRow>,
    /// Smallest `n` from which every later row satisfies the disk inequalities.
    pub n0: Option<usize>,
    /// `max / min` of `|Delta'|` over the rows.
    pub delta_prime_ratio: Option<f64>,
    pub delta_prime_exponent: Option<f64>,
}

pub fn localization_report(
    points: &[SpectralPoint],
    class: &Classification,
    ns: core::ops::RangeInclusive<usize>,
) -> LocalizationReport {
    let b = class.b();
    let mut rows = Vec::new();
    for n in ns {
        let pts: Vec<&SpectralPoint> = points.iter().filter(|p| p.cluster == n).collect();
        if pts.is_empty() {
            continue;
        }
        let c = cluster_center(class.case_tag, n);
        let multiple = pts.iter().any(|p| p.multiplicity > 1);
        let prime = pts.iter().find(|p| p.series_tag == SeriesTag::Prime);
        let second = pts.iter().find(|p| p.series_tag == SeriesTag::DoublePrime);
        let mut row = LocalizationRow {
            n,
            multiplicity_flag: multiple,
            delta_prime_offset: None,
            delta_double_prime_dev: None,
            separation: if pts.len() == 2 {
                Some((pts[0].mu - pts[1].mu).norm())
            } else if multiple {
                Some(0.0)
            } else {
                None
            },
            r_n: None,
            disks_hold: None,
            delta_prime_abs: pts.iter().filter(|p| p.multiplicity == 1).map(|p| p.delta_prime.norm()).collect(),
        };
        if class.theorem1_family {
            let r_n = b.norm() / (4.0 * PI * n as f64);
            row.r_n = Some(r_n);
            if let (Some(p1), Some(p2)) = (prime, second) {
                let d1 = (p1.mu - c).norm();
                let d2 = (p2.mu - c - second_offset(class.case_tag, b, n)).norm();
                let sep = (p1.mu - p2.mu).norm();
                row.delta_prime_offset = Some(d1);
                row.delta_double_prime_dev = Some(d2);
                row.separation = Some(sep);
                row.disks_hold = Some(d1 < r_n && d2 < r_n && sep > 2.0 * r_n);
            } else {
                row.disks_hold = Some(false);
            }
        }
        rows.push(row);
    }
    let mut n0 = None;
    for row in rows.iter().rev() {
        if row.disks_hold == Some(true) {
            n0 = Some(row.n);
        } else {
            break;
        }
    }
    let all: Vec<(f64, f64)> =
        rows.iter().flat_map(|r| r.delta_prime_abs.iter().map(move |v| (r.n as f64, *v))).collect();
    let ratio = if all.is_empty() {
        None
    } else {
        let hi = all.iter().map(|p| p.1).fold(0.0, f64::max);
        let lo = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        Some(hi / lo)
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = all.into_iter().unzip();
    LocalizationReport { rows, n0, delta_prime_ratio: ratio, delta_prime_exponent: growth_exponent(&xs, &ys) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_agree() {
        let cfg = SolverConfig::default();
        let mats = [
            BoundaryMatrix::periodic(),
            BoundaryMatrix::antiperiodic(),
            BoundaryMatrix::real([1.0, -1.0, 0.0, 1.0], [0.0, 0.0, 1.0, -1.0]),
            BoundaryMatrix::real([1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 2.0]),
        ];
        for a in mats {
            let class = classify(&a, 1e-9).unwrap();
            for mu in [Complex64::new(2.3, 0.4), Complex64::new(17.0, -1.1)] {
                let x = delta0_closed(&a, mu, &class).unwrap();
                let y = delta0_trig(&a, mu, &class).unwrap();
                let z = delta0_general(&a, mu);
                let w = delta(&Potential::zero(), &a, mu, &cfg).unwrap();
                let s = x.norm();
                assert!((x - y).norm() < 1e-12 * s && (x - z).norm() < 1e-12 * s);
                assert!((x - w).norm() < 1e-8 * s, "{a:?} {mu}");
            }
        }
    }

    #[test]
    fn periodic_closed_form_example() {
        let a = BoundaryMatrix::periodic();
        let class = classify(&a, 1e-9).unwrap();
        let mu = Complex64::new(1.3, 0.2);
        let v = delta0_closed(&a, mu, &class).unwrap();
        assert!((v - 4.0 * I * mu * (1.0 - mu.cos())).norm() < 1e-12);
        let ap = BoundaryMatrix::antiperiodic();
        let c2 = classify(&ap, 1e-9).unwrap();
        let v = delta0_closed(&ap, (2.0 * PI).into(), &c2).unwrap();
        assert!((v - 16.0 * PI * I).norm() < 1e-12);
    }

    #[test]
    fn zero_potential_periodic_clusters() {
        let cfg = SolverConfig::default();
        let s = find_eigenvalues(&Potential::zero(), &BoundaryMatrix::periodic(), 3, &cfg).unwrap();
        assert!(s.all_certified(), "{:?}", s.regions);
        let clusters: Vec<&SpectralPoint> = s.points.iter().filter(|p| p.cluster >= 1).collect();
        assert_eq!(clusters.len(), 3);
        for (k, p) in clusters.iter().enumerate() {
            let exact = (2.0 * PI * (k + 1) as f64).powi(2);
            assert_eq!(p.multiplicity, 2);
            assert!((p.lambda.re - exact).abs() < 1e-8 * exact);
        }
        // lambda = 0 is the simple periodic eigenvalue of q = 0
        assert!(s.points.iter().any(|p| p.cluster == 0 && p.lambda.norm() < 1e-8 && p.multiplicity == 1));
    }
}
