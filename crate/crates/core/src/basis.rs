//! Eigenfunctions, the rank-one kernel `u_n(x) conj(v_n(xi))`, basis
//! verdicts, coincidence of spectra and spectral gaps.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::boundary::{classify, dgc_criterion, BoundaryMatrix, Classification};
use crate::extended::{hill_gaps, RawGaps};
use crate::fundsol::{self, EndValues, FundamentalSolution};
use crate::potential::Builtin;
use crate::quad::{composite, GaussLegendre};
use crate::spectrum::{self, SpectralPoint, Spectrum};
use crate::{Error, Potential, Result, SolverConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigenfunction data at one spectral point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenPair {
    pub point: SpectralPoint,
    pub grid: Vec<f64>,
    /// One sample vector per independent eigenfunction (two when the
    /// geometric multiplicity is 2), each scaled so the largest node value is 1.
    pub u_samples: Vec<Vec<Complex64>>,
    /// Coefficients on `(phi, psi)`, or on `(c, s)` at `mu = 0`.
    pub coefficients: Vec<[Complex64; 2]>,
    /// `max |B_j(u)|` relative to the size of the boundary data.
    pub boundary_residual: f64,
    /// `||u_n|| ||v_n||`, simple points only.
    pub kernel_norm: Option<f64>,
}

struct Columns {
    nodes: Vec<f64>,
    f: Vec<Complex64>,
    g: Vec<Complex64>,
    f_ends: EndValues,
    g_ends: EndValues,
}

fn node_index(grid: &[f64], x: f64) -> usize {
    grid.iter().position(|&g| g == x).expect("requested nodes are on the grid")
}

fn sorted_nodes(nodes: &[f64]) -> Vec<f64> {
    let mut v = nodes.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

fn fundamental_on(
    q: &Potential,
    mu: Complex64,
    nodes: &[f64],
    cfg: &SolverConfig,
) -> Result<(FundamentalSolution, Vec<usize>)> {
    let fs = fundsol::solve_fundamental(q, mu, cfg, nodes)?;
    let idx = nodes.iter().map(|&x| node_index(&fs.grid, x)).collect();
    Ok((fs, idx))
}

fn columns(q: &Potential, mu: Complex64, nodes: &[f64], cfg: &SolverConfig) -> Result<Columns> {
    let nodes = sorted_nodes(nodes);
    if mu.norm() > 1e-8 {
        let (fs, idx) = fundamental_on(q, mu, &nodes, cfg)?;
        Ok(Columns {
            f: idx.iter().map(|&i| fs.phi[i]).collect(),
            g: idx.iter().map(|&i| fs.psi[i]).collect(),
            f_ends: fs.phi_ends(),
            g_ends: fs.psi_ends(),
            nodes,
        })
    } else {
        let tr = fundsol::cos_sin_trajectory(q, mu, cfg, &nodes)?;
        let idx: Vec<usize> = nodes.iter().map(|&x| node_index(&tr.x, x)).collect();
        let last = tr.y.last().expect("trajectory has a final state");
        let one = Complex64::new(1.0, 0.0);
        Ok(Columns {
            f: idx.iter().map(|&i| tr.y[i][0]).collect(),
            g: idx.iter().map(|&i| tr.y[i][2]).collect(),
            f_ends: EndValues { u0: one, u1: last[0], du0: ZERO, du1: last[1] },
            g_ends: EndValues { u0: ZERO, u1: last[2], du0: one, du1: last[3] },
            nodes,
        })
    }
}

/// Null space of a 2x2 matrix from the eigen-decomposition of `M^H M`:
/// returns `(sigma_min, sigma_max, null vector of sigma_min)`.
fn small_svd(m: [[Complex64; 2]; 2]) -> (f64, f64, [Complex64; 2]) {
    let g11 = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let g22 = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let g12 = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let mean = 0.5 * (g11 + g22);
    let rad = (0.25 * (g11 - g22) * (g11 - g22) + g12.norm_sqr()).sqrt();
    let lo = (mean - rad).max(0.0);
    let hi = mean + rad;
    let a = [g12, Complex64::new(lo - g11, 0.0)];
    let b = [Complex64::new(lo - g22, 0.0), g12.conj()];
    let na = a[0].norm_sqr() + a[1].norm_sqr();
    let nb = b[0].norm_sqr() + b[1].norm_sqr();
    let v = if na == 0.0 && nb == 0.0 {
        [Complex64::new(1.0, 0.0), ZERO]
    } else if na >= nb {
        [a[0] / na.sqrt(), a[1] / na.sqrt()]
    } else {
        [b[0] / nb.sqrt(), b[1] / nb.sqrt()]
    };
    (lo.sqrt(), hi.sqrt(), v)
}

fn normalize_max(v: &mut [Complex64]) -> Complex64 {
    let k = v.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).map(|(i, _)| i).unwrap_or(0);
    let s = v[k];
    if s != ZERO {
        for z in v.iter_mut() {
            *z /= s;
        }
    }
    s
}

/// `u = c1 phi + c2 psi` spanning the null space of
/// `[[B1(phi), B1(psi)], [B2(phi), B2(psi)]]`, sampled on `grid`.
pub fn eigenfunction(
    p: &Potential,
    a: &BoundaryMatrix,
    point: &SpectralPoint,
    grid: &[f64],
    cfg: &SolverConfig,
) -> Result<EigenPair> {
    let q = p.normalize_mean_zero();
    let cols = columns(&q, point.mu, grid, &cfg.refining())?;
    let m = [
        [a.apply_form(0, &cols.f_ends), a.apply_form(0, &cols.g_ends)],
        [a.apply_form(1, &cols.f_ends), a.apply_form(1, &cols.g_ends)],
    ];
    let ends = cols.f_ends.max_abs().max(cols.g_ends.max_abs());
    let rows: f64 = a.rows.iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let scale = rows * ends;
    let (lo, hi, v) = small_svd(m);
    let tol = 1e-6 * scale;
    let vectors: Vec<[Complex64; 2]> = if hi <= tol {
        alloc::vec![[Complex64::new(1.0, 0.0), ZERO], [ZERO, Complex64::new(1.0, 0.0)]]
    } else if lo <= tol {
        alloc::vec![v]
    } else {
        return Err(Error::Certification(format!(
            "mu = {} is not an eigenvalue: smallest singular value {:.3e} of scale {:.3e}",
            point.mu, lo, scale
        )));
    };
    let mut samples = Vec::new();
    let mut coefficients = Vec::new();
    let mut residual = 0.0f64;
    for c in vectors {
        let mut u: Vec<Complex64> = cols.f.iter().zip(&cols.g).map(|(f, g)| c[0] * f + c[1] * g).collect();
        let s = normalize_max(&mut u);
        let c = if s != ZERO { [c[0] / s, c[1] / s] } else { c };
        let ue = cols.f_ends.scale(c[0]) + cols.g_ends.scale(c[1]);
        let size = rows * ue.max_abs().max(f64::MIN_POSITIVE);
        residual = residual.max(a.apply_form(0, &ue).norm() / size).max(a.apply_form(1, &ue).norm() / size);
        samples.push(u);
        coefficients.push(c);
    }
    Ok(EigenPair {
        point: point.clone(),
        grid: cols.nodes,
        u_samples: samples,
        coefficients,
        boundary_residual: residual,
        kernel_norm: None,
    })
}

/// Value of `H` at one `(x, xi)`, with a flag when `x = xi` and the
/// `x < xi` branch was used.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelValue {
    pub value: Complex64,
    pub on_diagonal: bool,
}

/// Boundary data of `phi, psi` plus samples on a node set; evaluates `H`
/// for any pair of nodes.
#[derive(Debug, Clone)]
pub struct KernelContext {
    pub mu: Complex64,
    pub nodes: Vec<f64>,
    phi: Vec<Complex64>,
    psi: Vec<Complex64>,
    w: Vec<Complex64>,
    b: [[Complex64; 2]; 2],
    b_star: [[Complex64; 2]; 2],
    delta: Complex64,
}

impl KernelContext {
    pub fn new(p: &Potential, a: &BoundaryMatrix, mu: Complex64, nodes: &[f64], cfg: &SolverConfig) -> Result<Self> {
        let q = p.normalize_mean_zero();
        let nodes = sorted_nodes(nodes);
        let (fs, idx) = fundamental_on(&q, mu, &nodes, &cfg.refining())?;
        let (f, g) = (fs.phi_ends(), fs.psi_ends());
        let b = [[a.apply_form(0, &f), a.apply_form(0, &g)], [a.apply_form(1, &f), a.apply_form(1, &g)]];
        let b_star = [
            [a.apply_star_form(0, &f), a.apply_star_form(0, &g)],
            [a.apply_star_form(1, &f), a.apply_star_form(1, &g)],
        ];
        let w: Vec<Complex64> = idx.iter().map(|&i| fs.wronskian(i)).collect();
        let floor = 1e-12 * mu.norm().max(1.0);
        if let Some(bad) = w.iter().find(|z| z.norm() < floor) {
            return Err(Error::SingularWronskian(bad.norm()));
        }
        Ok(Self {
            mu,
            phi: idx.iter().map(|&i| fs.phi[i]).collect(),
            psi: idx.iter().map(|&i| fs.psi[i]).collect(),
            w,
            delta: b[0][0] * b[1][1] - b[0][1] * b[1][0],
            b,
            b_star,
            nodes,
        })
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        self.nodes.iter().position(|&g| g == x)
    }

    /// `H(x_i, xi_j)`.
    ///
    /// The jump term `g` carries the sign `-` for `x > xi` and `+` for
    /// `x < xi`, which makes `-2 mu H / Delta'` the kernel of the spectral
    /// projector; at a zero of `Delta` this is `H = -Phi/(2W)`.
    pub fn h(&self, i: usize, j: usize) -> KernelValue {
        let (fx, gx) = (self.phi[i], self.psi[i]);
        let (fxi, gxi) = (self.phi[j], self.psi[j]);
        let w2 = 2.0 * self.w[j];
        // forms of g with the `x < xi` sign at 0 and the `x > xi` sign at 1
        let bg = [
            (gxi * self.b_star[0][0] - fxi * self.b_star[0][1]) / w2,
            (gxi * self.b_star[1][0] - fxi * self.b_star[1][1]) / w2,
        ];
        let above = self.nodes[i] > self.nodes[j];
        let sign = if above { 1.0 } else { -1.0 };
        let g = sign * (fx * gxi - gx * fxi) / w2;
        let b = &self.b;
        let det = fx * (b[0][1] * bg[1] - b[1][1] * bg[0]) - gx * (b[0][0] * bg[1] - b[1][0] * bg[0]) + g * self.delta;
        KernelValue { value: -det, on_diagonal: self.nodes[i] == self.nodes[j] }
    }
}

/// `H(x, xi, mu)`; requires `mu != 0`.
pub fn green_kernel_h(
    p: &Potential,
    a: &BoundaryMatrix,
    mu: Complex64,
    x: f64,
    xi: f64,
    cfg: &SolverConfig,
) -> Result<KernelValue> {
    let ctx = KernelContext::new(p, a, mu, &[x, xi], cfg)?;
    let (i, j) = (ctx.index(x).unwrap_or(0), ctx.index(xi).unwrap_or(0));
    Ok(ctx.h(i, j))
}

/// Closed-form `H_0(x, xi, 2 pi n)`:
/// `-2 pi i n H_0 = A34 (cos 2pi n(x - xi) - cos 2pi n(x + xi))
///   + 2 pi n [(A14 + A23 + 2 A) sin 2pi n(x - xi) - (A14 - A23) sin 2pi n(x + xi)]`
/// with `A = A24` for `x < xi` and `A = A13` for `x > xi`.
pub fn h0_display(a: &BoundaryMatrix, n: usize, x: f64, xi: f64) -> Complex64 {
    let m = a.minors();
    let w = 2.0 * PI * n as f64;
    let mid = if x > xi { m.a13 } else { m.a24 };
    let lhs = m.a34 * ((w * (x - xi)).cos() - (w * (x + xi)).cos())
        + w * ((m.a14 + m.a23 + 2.0 * mid) * (w * (x - xi)).sin() - (m.a14 - m.a23) * (w * (x + xi)).sin());
    lhs / (Complex64::new(0.0, -w))
}

/// `H_0` for `A14 = A23`: `-2 pi i n H_0 = A34 (cos 2pi n(x - xi) - cos 2pi n(x + xi))`.
pub fn h0_theorem1_display(a: &BoundaryMatrix, n: usize, x: f64, xi: f64) -> Complex64 {
    let m = a.minors();
    let w = 2.0 * PI * n as f64;
    m.a34 * ((w * (x - xi)).cos() - (w * (x + xi)).cos()) / Complex64::new(0.0, -w)
}

fn check_simple(point: &SpectralPoint, a: &BoundaryMatrix) -> Result<()> {
    let entry = a.rows.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = 1e-9 * point.mu.norm().max(1.0) * entry * entry;
    if point.multiplicity != 1 || point.delta_prime.norm() < floor {
        return Err(Error::NearMultiple(point.delta_prime.norm()));
    }
    Ok(())
}

/// Rank-one kernel `K_n(x, xi) = u_n(x) conj(v_n(xi)) = -2 mu_n H / Delta'(mu_n)`.
pub fn rank_one_product(
    p: &Potential,
    a: &BoundaryMatrix,
    point: &SpectralPoint,
    x: f64,
    xi: f64,
    cfg: &SolverConfig,
) -> Result<Complex64> {
    check_simple(point, a)?;
    let h = green_kernel_h(p, a, point.mu, x, xi, cfg)?;
    Ok(-2.0 * point.mu * h.value / point.delta_prime)
}

/// `K_n` on a tensor grid of nodes.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    pub nodes: Vec<f64>,
    /// Row-major: `values[i * len + j] = K(x_i, xi_j)`.
    pub values: Vec<Complex64>,
}

impl KernelGrid {
    pub fn new(
        p: &Potential,
        a: &BoundaryMatrix,
        point: &SpectralPoint,
        nodes: &[f64],
        cfg: &SolverConfig,
    ) -> Result<Self> {
        check_simple(point, a)?;
        let ctx = KernelContext::new(p, a, point.mu, nodes, cfg)?;
        let factor = -2.0 * point.mu / point.delta_prime;
        let n = ctx.nodes.len();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(factor * ctx.h(i, j).value);
            }
        }
        Ok(Self { nodes: ctx.nodes, values })
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.nodes.len() + j]
    }
}

/// Gauss–Legendre nodes resolving oscillations of frequency `2|mu|` with
/// `density` nodes per period.
pub fn oscillation_rule(mu: Complex64, density: usize) -> Vec<(f64, f64)> {
    let density = density.max(8);
    let periods = (mu.norm() / PI).ceil().max(2.0) as usize;
    composite(&GaussLegendre::new(density), 0.0, 1.0, periods)
}

/// `||K_n||_{L2([0,1]^2)} = ||u_n|| ||v_n||` by tensor quadrature.
pub fn norm_product(
    p: &Potential,
    a: &BoundaryMatrix,
    point: &SpectralPoint,
    grid_density: usize,
    cfg: &SolverConfig,
) -> Result<f64> {
    let rule = oscillation_rule(point.mu, grid_density);
    let nodes: Vec<f64> = rule.iter().map(|r| r.0).collect();
    let k = KernelGrid::new(p, a, point, &nodes, cfg)?;
    let mut sum = 0.0;
    for (i, (_, wi)) in rule.iter().enumerate() {
        for (j, (_, wj)) in rule.iter().enumerate() {
            sum += wi * wj * k.at(i, j).norm_sqr();
        }
    }
    Ok(sum.sqrt())
}

/// `<u_n, v_n>` with `u_n` from the null vector and `conj(v_n(xi)) =
/// K_n(x*, xi)/u_n(x*)` at the node `x*` maximizing `|u_n|`.
pub fn biorthogonality(
    p: &Potential,
    a: &BoundaryMatrix,
    point: &SpectralPoint,
    grid_density: usize,
    cfg: &SolverConfig,
) -> Result<Complex64> {
    let rule = oscillation_rule(point.mu, grid_density);
    let nodes: Vec<f64> = rule.iter().map(|r| r.0).collect();
    let e = eigenfunction(p, a, point, &nodes, cfg)?;
    let u = &e.u_samples[0];
    let star = u.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())).map(|(i, _)| i).unwrap_or(0);
    let k = KernelGrid::new(p, a, point, &nodes, cfg)?;
    let mut s = ZERO;
    for (j, (_, w)) in rule.iter().enumerate() {
        s += w * u[j] * k.at(star, j) / u[star];
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    RieszBasisThm1,
    RieszBasisThm2Multiple,
    NotBasisThm2Simple,
    OutsideScope,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::RieszBasisThm1 => "riesz_basis_thm1",
            Verdict::RieszBasisThm2Multiple => "riesz_basis_thm2_multiple",
            Verdict::NotBasisThm2Simple => "not_basis_thm2_simple",
            Verdict::OutsideScope => "outside_scope",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GrowthClass {
    Bounded,
    SqrtGrowth,
    Inconclusive,
}

/// Classifies a fitted exponent: `< 0.15` bounded, `> 0.35` square-root growth.
pub fn growth_class(exponent: Option<f64>) -> GrowthClass {
    match exponent {
        Some(e) if e < 0.15 => GrowthClass::Bounded,
        Some(e) if e > 0.35 => GrowthClass::SqrtGrowth,
        _ => GrowthClass::Inconclusive,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormSample {
    pub n: usize,
    pub mu: Complex64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BasisReport {
    pub verdict: Verdict,
    pub classification: Classification,
    pub dgc: Option<bool>,
    pub clusters: usize,
    /// Clusters in the upper half of the index range holding a merged double root.
    pub merged_fraction: f64,
    pub unresolved_fraction: f64,
    /// Simplicity certificate used by the Theorem-2 branch, if any.
    pub simplicity_certificate: Option<String>,
    pub norms: Vec<NormSample>,
    pub growth_exponent: Option<f64>,
    pub growth_class: GrowthClass,
    pub notes: Vec<String>,
}

/// Real potential `c cos(2 pi x)`: the periodic and antiperiodic spectra are
/// simple by the coexistence theorem for the Mathieu equation.
fn single_cosine(p: &Potential) -> bool {
    if let Some(Builtin::Mathieu { a }) = p.builtin() {
        return a != 0.0;
    }
    let t = p.terms();
    p.samples().is_none() && t.len() == 1 && t[0].k == 1 && t[0].coeff.im == 0.0 && t[0].coeff.re != 0.0
}

/// Upper half of the cluster indices `1..=n_max`.
fn upper_half(n_max: usize) -> core::ops::RangeInclusive<usize> {
    (n_max / 2 + 1).max(1)..=n_max
}

/// Theorem-1/Theorem-2 verdict from a computed spectrum.
pub fn basis_verdict(
    p: &Potential,
    a: &BoundaryMatrix,
    spec: &Spectrum,
    grid_density: usize,
    cfg: &SolverConfig,
) -> Result<BasisReport> {
    let class = classify(a, cfg.classify_tol)?;
    let n_max = spec.points.iter().map(|pt| pt.cluster).max().unwrap_or(0);
    let clusters = spec.regions.iter().filter(|r| matches!(r.kind, spectrum::RegionKind::Cluster(_))).count();
    let unresolved = spec.regions.iter().filter(|r| !r.certified).count();
    let unresolved_fraction = if spec.regions.is_empty() { 0.0 } else { unresolved as f64 / spec.regions.len() as f64 };
    let mut notes = Vec::new();
    let dgc = if class.regular_not_strongly { dgc_criterion(a, p, cfg.classify_tol).ok() } else { None };

    let upper: Vec<usize> = upper_half(n_max).collect();
    let merged = upper.iter().filter(|&&n| spec.points.iter().any(|pt| pt.cluster == n && pt.multiplicity > 1)).count();
    let split = upper
        .iter()
        .filter(|&&n| spec.points.iter().filter(|pt| pt.cluster == n && pt.multiplicity == 1).count() == 2)
        .count();
    let merged_fraction = if upper.is_empty() { 0.0 } else { merged as f64 / upper.len() as f64 };

    // norms of simple points over the upper half, largest per index
    let mut norms = Vec::new();
    for &n in &upper {
        let mut best: Option<NormSample> = None;
        for pt in spec.points.iter().filter(|pt| pt.cluster == n && pt.multiplicity == 1 && pt.certified) {
            match norm_product(p, a, pt, grid_density, cfg) {
                Ok(v) => {
                    if best.as_ref().is_none_or(|b| v > b.norm) {
                        best = Some(NormSample { n, mu: pt.mu, norm: v });
                    }
                }
                Err(e) => notes.push(format!("cluster {n}: {e}")),
            }
        }
        norms.extend(best);
    }
    let xs: Vec<f64> = norms.iter().map(|s| s.n as f64).collect();
    let ys: Vec<f64> = norms.iter().map(|s| s.norm).collect();
    let growth_exponent = spectrum::growth_exponent(&xs, &ys);
    let growth = growth_class(growth_exponent);

    let mut certificate = None;
    let verdict = if !class.regular_not_strongly {
        Verdict::OutsideScope
    } else if unresolved_fraction > cfg.unresolved_fraction {
        notes.push(format!("{unresolved} of {} regions unresolved", spec.regions.len()));
        Verdict::Inconclusive
    } else if class.theorem1_family {
        Verdict::RieszBasisThm1
    } else {
        if dgc == Some(true) {
            certificate = Some("scalar criterion holds".into());
        } else if class.type_star && p.is_symmetric(1e-10) && single_cosine(p) {
            certificate =
                Some("single-cosine symmetric potential: periodic and antiperiodic spectra are simple".into());
        } else if !upper.is_empty() && split == upper.len() {
            certificate = Some("every upper cluster splits into two simple roots".into());
        }
        if certificate.is_some() {
            if merged > 0 {
                notes.push(format!("{merged} upper clusters merge below the resolution {:.1e}", cfg.merge_tol));
            }
            Verdict::NotBasisThm2Simple
        } else if !upper.is_empty() && merged == upper.len() {
            Verdict::RieszBasisThm2Multiple
        } else {
            notes.push(format!("{merged} merged and {split} split clusters among {} upper clusters", upper.len()));
            Verdict::Inconclusive
        }
    };
    Ok(BasisReport {
        verdict,
        classification: class,
        dgc,
        clusters,
        merged_fraction,
        unresolved_fraction,
        simplicity_certificate: certificate,
        norms,
        growth_exponent,
        growth_class: growth,
        notes,
    })
}

/// The four problems whose spectra coincide with a periodic or
/// antiperiodic one for symmetric potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CoincidenceFamily {
    /// `u'(0) = u'(1)`, `u(0) = b u(1)`.
    One,
    /// `u'(0) = b u'(1)`, `u(0) = u(1)`.
    Two,
    /// `u'(0) + u'(1) = 0`, `u(0) + b u(1) = 0`.
    Three,
    /// `u'(0) + b u'(1) = 0`, `u(0) + u(1) = 0`.
    Four,
}

impl CoincidenceFamily {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            4 => Ok(Self::Four),
            _ => Err(Error::Parameter(format!("family must be 1..4, got {i}"))),
        }
    }

    pub fn matrix(self, b: Complex64) -> BoundaryMatrix {
        let o = Complex64::new(1.0, 0.0);
        match self {
            Self::One => BoundaryMatrix::new([[o, -o, ZERO, ZERO], [ZERO, ZERO, o, -b]]),
            Self::Two => BoundaryMatrix::new([[o, -b, ZERO, ZERO], [ZERO, ZERO, o, -o]]),
            Self::Three => BoundaryMatrix::new([[o, o, ZERO, ZERO], [ZERO, ZERO, o, b]]),
            Self::Four => BoundaryMatrix::new([[o, b, ZERO, ZERO], [ZERO, ZERO, o, o]]),
        }
    }

    pub fn reference(self) -> BoundaryMatrix {
        match self {
            Self::One | Self::Two => BoundaryMatrix::periodic(),
            Self::Three | Self::Four => BoundaryMatrix::antiperiodic(),
        }
    }

    pub fn reference_name(self) -> &'static str {
        match self {
            Self::One | Self::Two => "periodic",
            Self::Three | Self::Four => "antiperiodic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoincidenceReport {
    pub family: CoincidenceFamily,
    pub b: Complex64,
    pub reference: String,
    pub symmetric: bool,
    pub count: usize,
    pub reference_count: usize,
    /// Eigenvalues paired in sorted order: `(family, reference)`.
    pub pairs: Vec<(Complex64, Complex64)>,
    pub max_distance: f64,
    /// `max |lambda - lambda_ref| / max(1, |lambda_ref|)`.
    pub max_relative_distance: f64,
    pub coincide: bool,
    pub certified: bool,
}

/// Pairs two spectra (eigenvalues repeated by multiplicity, sorted by real
/// then imaginary part) and measures the largest distance.
pub fn compare_spectra(
    family: CoincidenceFamily,
    b: Complex64,
    symmetric: bool,
    tested: &Spectrum,
    reference: &Spectrum,
    tol: f64,
) -> CoincidenceReport {
    let x = tested.eigenvalues();
    let y = reference.eigenvalues();
    let pairs: Vec<(Complex64, Complex64)> = x.iter().copied().zip(y.iter().copied()).collect();
    let max_distance = pairs.iter().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let max_relative_distance = pairs.iter().map(|(a, b)| (a - b).norm() / b.norm().max(1.0)).fold(0.0, f64::max);
    CoincidenceReport {
        family,
        b,
        reference: family.reference_name().into(),
        symmetric,
        count: x.len(),
        reference_count: y.len(),
        max_distance,
        max_relative_distance,
        coincide: x.len() == y.len() && max_relative_distance <= tol,
        certified: tested.all_certified() && reference.all_certified(),
        pairs,
    }
}

/// Computes both spectra up to `n_max` and compares them.
pub fn coincidence_check(
    p: &Potential,
    family: CoincidenceFamily,
    b: Complex64,
    n_max: usize,
    cfg: &SolverConfig,
) -> Result<CoincidenceReport> {
    if (b + 1.0).norm() < 1e-12 {
        return Err(Error::Parameter("b = -1 is excluded".into()));
    }
    let t = spectrum::find_eigenvalues(p, &family.matrix(b), n_max, cfg)?;
    let r = spectrum::find_eigenvalues(p, &family.reference(), n_max, cfg)?;
    Ok(compare_spectra(family, b, p.is_symmetric(1e-10), &t, &r, 1e-6))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PrecisionMode {
    Double,
    Extended,
}

impl core::str::FromStr for PrecisionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "double" => Ok(Self::Double),
            "extended" => Ok(Self::Extended),
            other => Err(Error::Parameter(format!("unknown precision mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GapProblem {
    Periodic,
    Antiperiodic,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapRow {
    pub n: usize,
    pub problem: GapProblem,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub gamma: f64,
    pub predicted: Option<f64>,
    pub ratio: Option<f64>,
    /// Sign of the discriminant at the gap disagrees with the parity of `n`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapTable {
    pub precision: PrecisionMode,
    pub lambda0: f64,
    pub rows: Vec<GapRow>,
    /// How formula parity is attached to the two problems.
    pub parity_mapping: String,
}

impl GapTable {
    /// Eigenvalues of one problem, nondecreasing, repeated by multiplicity.
    pub fn eigenvalues(&self, problem: GapProblem) -> Vec<f64> {
        let mut v = Vec::new();
        if problem == GapProblem::Periodic {
            v.push(self.lambda0);
        }
        for r in self.rows.iter().filter(|r| r.problem == problem) {
            v.push(r.lambda_minus);
            v.push(r.lambda_plus);
        }
        v
    }
}

fn double_factorial(n: i64) -> f64 {
    let mut r = 1.0;
    let mut k = n;
    while k > 1 {
        r *= k as f64;
        k -= 2;
    }
    r
}

/// Leading gap asymptotics for the two-term potential:
/// `8 pi^2 alpha^n / (2^n [(n-2)!!]^2)` times `|cos(pi t/2)|` for even `n`
/// and `(2/pi) |sin(pi t/2)|` for odd `n`.
pub fn predicted_gap(alpha: f64, t: f64, n: usize) -> f64 {
    let df = double_factorial(n as i64 - 2);
    let lead = 8.0 * PI * PI * (alpha / 2.0).powi(n as i32) / (df * df);
    let factor = if n.is_multiple_of(2) { (0.5 * PI * t).cos().abs() } else { 2.0 / PI * (0.5 * PI * t).sin().abs() };
    // cos(pi/2) and sin(pi) are not exactly zero in floating point
    if factor < 1e-12 {
        0.0
    } else {
        lead * factor
    }
}

/// `lambda_0` and gaps `gamma_n = lambda_n^+ - lambda_n^-` for `n = 1..=n_max`;
/// even `n` belong to the periodic problem, odd `n` to the antiperiodic one.
pub fn spectral_gaps(p: &Potential, n_max: usize, mode: PrecisionMode) -> Result<GapTable> {
    if !p.is_real() {
        return Err(Error::UnsupportedPotential("gaps need a real potential".into()));
    }
    if n_max == 0 {
        return Err(Error::Parameter("n_max must be at least 1".into()));
    }
    let raw: RawGaps = match mode {
        PrecisionMode::Double => hill_gaps::<f64>(p, n_max)?,
        PrecisionMode::Extended => hill_gaps::<twofloat::TwoFloat>(p, n_max)?,
    };
    let two_term = match p.builtin() {
        Some(Builtin::TwoTerm { alpha, t }) => Some((alpha, t)),
        _ => None,
    };
    let rows = raw
        .gaps
        .iter()
        .map(|g| {
            let predicted = two_term.map(|(alpha, t)| predicted_gap(alpha, t, g.n));
            let ratio = predicted.filter(|v| *v > 0.0).map(|v| g.gamma / v);
            GapRow {
                n: g.n,
                problem: if g.n % 2 == 0 { GapProblem::Periodic } else { GapProblem::Antiperiodic },
                lambda_minus: g.lambda_minus,
                lambda_plus: g.lambda_plus,
                gamma: g.gamma,
                predicted,
                ratio,
                flagged: !g.parity_ok,
            }
        })
        .collect();
    Ok(GapTable {
        precision: mode,
        lambda0: raw.lambda0,
        rows,
        parity_mapping:
            "even n: periodic problem, |cos(pi t/2)| factor; odd n: antiperiodic problem, (2/pi)|sin(pi t/2)| factor"
                .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1), 1.0);
        assert_eq!(double_factorial(0), 1.0);
        assert_eq!(double_factorial(5), 15.0);
        assert_eq!(double_factorial(6), 48.0);
    }

    #[test]
    fn svd_null_vector() {
        let o = Complex64::new(1.0, 0.0);
        let (lo, hi, v) = small_svd([[o, 2.0 * o], [2.0 * o, 4.0 * o]]);
        assert!(lo < 1e-12 && (hi - 5.0).abs() < 1e-12);
        assert!((v[0] + 2.0 * v[1]).norm() < 1e-12);
    }

    #[test]
    fn free_periodic_double_eigenfunction() {
        let cfg = SolverConfig::default();
        let pt = SpectralPoint {
            mu: Complex64::new(2.0 * PI, 0.0),
            lambda: Complex64::new(4.0 * PI * PI, 0.0),
            lambda_shifted: Complex64::new(4.0 * PI * PI, 0.0),
            cluster: 1,
            series_tag: spectrum::SeriesTag::Unresolved,
            multiplicity: 2,
            delta_prime: ZERO,
            disk: None,
            newton_residual: 0.0,
            certified: true,
        };
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let e = eigenfunction(&Potential::zero(), &BoundaryMatrix::periodic(), &pt, &grid, &cfg).unwrap();
        assert_eq!(e.u_samples.len(), 2);
        // phi = e^{2 pi i x}, psi = e^{-2 pi i x}, each up to a unimodular factor
        for (u, sign) in e.u_samples.iter().zip([1.0, -1.0]) {
            let phase = u[0];
            assert!((phase.norm() - 1.0).abs() < 1e-8);
            for (k, x) in e.grid.iter().enumerate() {
                let z = Complex64::new(0.0, sign * 2.0 * PI * x).exp();
                assert!((u[k] - phase * z).norm() < 1e-8, "{} vs {}", u[k], phase * z);
            }
        }
    }

    #[test]
    fn predicted_gap_values() {
        // n = 3: 8 pi^2 (1/4)^3 (2/pi)
        let v = predicted_gap(0.5, 1.0, 3);
        assert!((v - 8.0 * PI * PI / 64.0 * 2.0 / PI).abs() < 1e-14);
        assert_eq!(predicted_gap(0.5, 1.0, 4), 0.0);
    }
}
