//! Fundamental systems of `u'' - q u + mu^2 u = 0` and their asymptotics.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::ode::{self, StepStats, Trajectory};
use crate::{Error, Potential, Result, SolverConfig};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `u(0), u(1), u'(0), u'(1)` of one solution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EndValues {
    pub u0: Complex64,
    pub u1: Complex64,
    pub du0: Complex64,
    pub du1: Complex64,
}

impl EndValues {
    pub fn scale(self, k: Complex64) -> Self {
        Self { u0: self.u0 * k, u1: self.u1 * k, du0: self.du0 * k, du1: self.du1 * k }
    }

    pub fn max_abs(&self) -> f64 {
        self.u0.norm().max(self.u1.norm()).max(self.du0.norm()).max(self.du1.norm())
    }
}

impl core::ops::Add for EndValues {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { u0: self.u0 + o.u0, u1: self.u1 + o.u1, du0: self.du0 + o.du0, du1: self.du1 + o.du1 }
    }
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FundamentalSolution {
    pub mu: Complex64,
    pub grid: Vec<f64>,
    pub phi: Vec<Complex64>,
    pub phi_dx: Vec<Complex64>,
    pub psi: Vec<Complex64>,
    pub psi_dx: Vec<Complex64>,
    pub stats: StepStats,
}

impl FundamentalSolution {
    /// `W = phi' psi - psi' phi` at grid node `j`.
    pub fn wronskian(&self, j: usize) -> Complex64 {
        self.phi_dx[j] * self.psi[j] - self.psi_dx[j] * self.phi[j]
    }

    pub fn phi_ends(&self) -> EndValues {
        let l = self.grid.len() - 1;
        EndValues { u0: self.phi[0], u1: self.phi[l], du0: self.phi_dx[0], du1: self.phi_dx[l] }
    }

    pub fn psi_ends(&self) -> EndValues {
        let l = self.grid.len() - 1;
        EndValues { u0: self.psi[0], u1: self.psi[l], du0: self.psi_dx[0], du1: self.psi_dx[l] }
    }

    /// Index of grid node `x`, if it is one.
    pub fn node(&self, x: f64) -> Option<usize> {
        self.grid.iter().position(|&g| g == x)
    }
}

/// Strip half-height `M` used when the configuration leaves it open.
pub fn strip_bound(p: &Potential, cfg: &SolverConfig) -> f64 {
    cfg.strip.unwrap_or_else(|| {
        let size: f64 = if p.samples().is_some() && p.terms().is_empty() {
            p.max_abs()
        } else {
            p.terms().iter().map(|t| t.coeff.norm()).sum()
        };
        (1.0 + size.sqrt()).max(2.0)
    })
}

pub(crate) fn options(cfg: &SolverConfig, mu: Complex64) -> ode::Options {
    let w = mu.norm().max(1.0);
    ode::Options {
        rtol: cfg.rtol,
        atol: cfg.rtol * 1e-3,
        // at least eight nodes per wavelength 2 pi / |mu|
        h_max: (PI / (4.0 * w)).min(0.125),
        max_steps: 1_000_000,
    }
}

#[inline]
pub(crate) fn rhs(p: &Potential, mu: Complex64) -> impl Fn(f64, &[Complex64; 4]) -> [Complex64; 4] + '_ {
    let m2 = mu * mu;
    move |x, y| {
        let r = p.value(x) - m2;
        [y[1], r * y[0], y[3], r * y[2]]
    }
}

fn check_mu(p: &Potential, mu: Complex64, cfg: &SolverConfig) -> Result<()> {
    if !(mu.re.is_finite() && mu.im.is_finite()) {
        return Err(Error::Domain(format!("mu = {mu} is not finite")));
    }
    let m = strip_bound(p, cfg);
    if mu.im.abs() > m * (1.0 + 1e-9) {
        return Err(Error::Domain(format!("|Im mu| = {} exceeds the strip bound {m}", mu.im.abs())));
    }
    Ok(())
}

/// Solves for `phi, psi` with `phi(0) = psi(0) = 1`, `phi'(0) = i mu`,
/// `psi'(0) = -i mu`; the grid contains the accepted steps and `nodes`.
pub fn solve_fundamental(
    p: &Potential,
    mu: Complex64,
    cfg: &SolverConfig,
    nodes: &[f64],
) -> Result<FundamentalSolution> {
    if mu == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("the fundamental system needs mu != 0".into()));
    }
    check_mu(p, mu, cfg)?;
    if let Some(&x) = nodes.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::Domain(format!("requested node {x} is outside [0, 1]")));
    }
    // phi(x, -mu) = psi(x, mu)
    let (m, reflect) = if mu.re < 0.0 { (-mu, true) } else { (mu, false) };
    let mut sorted: Vec<f64> = nodes.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    let y0 = [Complex64::new(1.0, 0.0), I * m, Complex64::new(1.0, 0.0), -I * m];
    let tr = ode::integrate(rhs(p, m), 0.0, 1.0, y0, &options(cfg, m), &sorted)?;
    let (a, b) = if reflect { (2, 0) } else { (0, 2) };
    Ok(FundamentalSolution {
        mu,
        phi: tr.y.iter().map(|y| y[a]).collect(),
        phi_dx: tr.y.iter().map(|y| y[a + 1]).collect(),
        psi: tr.y.iter().map(|y| y[b]).collect(),
        psi_dx: tr.y.iter().map(|y| y[b + 1]).collect(),
        grid: tr.x,
        stats: tr.stats,
    })
}

pub fn wronskian(fs: &FundamentalSolution, j: usize) -> Complex64 {
    fs.wronskian(j)
}

/// End values of the cosine/sine system `c(0) = 1, c'(0) = 0, s(0) = 0,
/// s'(0) = 1`, together with the integrator mesh.
#[derive(Debug, Clone)]
pub struct CosSin {
    pub c: EndValues,
    pub s: EndValues,
    pub mesh: Vec<f64>,
}

const CS0: [Complex64; 4] =
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];

fn cs_split(y: &[Complex64; 4]) -> (EndValues, EndValues) {
    (
        EndValues { u0: CS0[0], u1: y[0], du0: CS0[1], du1: y[1] },
        EndValues { u0: CS0[2], u1: y[2], du0: CS0[3], du1: y[3] },
    )
}

/// The cosine/sine system is regular at `mu = 0` and even in `mu`.
pub fn cos_sin(p: &Potential, mu: Complex64, cfg: &SolverConfig) -> Result<CosSin> {
    check_mu(p, mu, cfg)?;
    let tr = ode::integrate(rhs(p, mu), 0.0, 1.0, CS0, &options(cfg, mu), &[])?;
    let (c, s) = cs_split(tr.y.last().expect("trajectory has a final state"));
    Ok(CosSin { c, s, mesh: tr.x })
}

/// [`cos_sin`] on a frozen mesh.
pub fn cos_sin_on(p: &Potential, mu: Complex64, mesh: &[f64]) -> (EndValues, EndValues) {
    cs_split(&ode::replay(rhs(p, mu), mesh, CS0))
}

/// Cosine/sine solutions sampled on `nodes` (plus the accepted steps).
pub fn cos_sin_trajectory(p: &Potential, mu: Complex64, cfg: &SolverConfig, nodes: &[f64]) -> Result<Trajectory<4>> {
    check_mu(p, mu, cfg)?;
    ode::integrate(rhs(p, mu), 0.0, 1.0, CS0, &options(cfg, mu), nodes)
}

struct AsymParts {
    big_q: Complex64,
    /// `int_0^x e^{2 i mu (t - x)} q(t) dt`
    j_minus: Complex64,
    /// `int_0^x e^{2 i mu (x - t)} q(t) dt`
    j_plus: Complex64,
}

fn asym_parts(p: &Potential, mu: Complex64, x: f64) -> Result<AsymParts> {
    if mu == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("asymptotics need mu != 0".into()));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} is outside [0, 1]")));
    }
    let big_q = p.integral_q(0.0, x, None)?;
    let j_minus = (-2.0 * I * mu * x).exp() * p.integral_q(0.0, x, Some(2.0 * mu))?;
    let j_plus = (2.0 * I * mu * x).exp() * p.integral_q(0.0, x, Some(-2.0 * mu))?;
    Ok(AsymParts { big_q, j_minus, j_plus })
}

/// Main terms of the large-`mu` expansion of `phi(x, mu)`.
pub fn asym_phi(p: &Potential, mu: Complex64, x: f64) -> Result<Complex64> {
    let a = asym_parts(p, mu, x)?;
    let t = 2.0 * I * mu;
    Ok((I * mu * x).exp() * (1.0 + a.big_q / t - a.j_minus / t - a.big_q * a.big_q / (8.0 * mu * mu)))
}

pub fn asym_psi(p: &Potential, mu: Complex64, x: f64) -> Result<Complex64> {
    let a = asym_parts(p, mu, x)?;
    let t = 2.0 * I * mu;
    Ok((-I * mu * x).exp() * (1.0 - a.big_q / t + a.j_plus / t - a.big_q * a.big_q / (8.0 * mu * mu)))
}

pub fn asym_phi_dx(p: &Potential, mu: Complex64, x: f64) -> Result<Complex64> {
    let a = asym_parts(p, mu, x)?;
    Ok((I * mu * x).exp() * (I * mu + 0.5 * a.big_q + 0.5 * a.j_minus + a.big_q * a.big_q / (8.0 * I * mu)))
}

pub fn asym_psi_dx(p: &Potential, mu: Complex64, x: f64) -> Result<Complex64> {
    let a = asym_parts(p, mu, x)?;
    Ok((-I * mu * x).exp() * (-I * mu + 0.5 * a.big_q + 0.5 * a.j_plus - a.big_q * a.big_q / (8.0 * I * mu)))
}

/// Leading terms of `P, P', Q, Q'` in `phi(1) = e^{i mu}(1 + P)`,
/// `phi'(1) = e^{i mu}(i mu + P')` and the `psi` counterparts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AsymptoticBoundaryData {
    pub mu: Complex64,
    pub p: Complex64,
    pub p_prime: Complex64,
    pub q: Complex64,
    pub q_prime: Complex64,
}

pub fn asym_boundary_data(p: &Potential, mu: Complex64) -> Result<AsymptoticBoundaryData> {
    if mu == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("asymptotics need mu != 0".into()));
    }
    let i_plus = p.integral_q(0.0, 1.0, Some(2.0 * mu))?;
    let i_minus = p.integral_q(0.0, 1.0, Some(-2.0 * mu))?;
    let em = (-2.0 * I * mu).exp();
    let ep = (2.0 * I * mu).exp();
    Ok(AsymptoticBoundaryData {
        mu,
        p: -em * i_plus / (2.0 * I * mu),
        p_prime: 0.5 * em * i_plus,
        q: ep * i_minus / (2.0 * I * mu),
        q_prime: 0.5 * ep * i_minus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Channel {
    Phi,
    Psi,
    PhiDx,
    PsiDx,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Phi, Channel::Psi, Channel::PhiDx, Channel::PsiDx];
}

/// `(|mu|, |numeric - asymptotic| * |mu|^k)` at `x = 1`, with `k = 2` for
/// `phi, psi` and `k = 1` for the derivatives.
pub fn residual_profile(
    p: &Potential,
    mus: &[Complex64],
    which: Channel,
    cfg: &SolverConfig,
) -> Result<Vec<(f64, f64)>> {
    mus.iter()
        .map(|&mu| {
            let fs = solve_fundamental(p, mu, cfg, &[])?;
            let l = fs.grid.len() - 1;
            let (num, asym, pow) = match which {
                Channel::Phi => (fs.phi[l], asym_phi(p, mu, 1.0)?, 2),
                Channel::Psi => (fs.psi[l], asym_psi(p, mu, 1.0)?, 2),
                Channel::PhiDx => (fs.phi_dx[l], asym_phi_dx(p, mu, 1.0)?, 1),
                Channel::PsiDx => (fs.psi_dx[l], asym_psi_dx(p, mu, 1.0)?, 1),
            };
            Ok((mu.norm(), (num - asym).norm() * mu.norm().powi(pow)))
        })
        .collect()
}
