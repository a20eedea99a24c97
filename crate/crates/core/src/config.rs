/// Numerical knobs shared by every solver path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    /// Per-step relative tolerance of the initial-value integrator.
    pub rtol: f64,
    /// Integrator tolerance used while locating and refining zeros of the
    /// characteristic determinant. A double root moves apart by roughly the
    /// square root of the evaluation error, so merging at `merge_tol` needs
    /// this well below `rtol`.
    pub refine_rtol: f64,
    /// Half-height M of the search strip `|Im mu| <= M`; derived from the
    /// potential when `None`.
    pub strip: Option<f64>,
    /// Below this `|mu|` no asymptotic claims (disks, series tags) are made.
    pub mu0: f64,
    /// Relative tolerance for minor equality tests.
    pub classify_tol: f64,
    /// Roots closer than `merge_tol * max(1,|mu|)` are merged.
    pub merge_tol: f64,
    pub max_newton: usize,
    /// Fraction of unresolved clusters tolerated by the basis verdict.
    pub unresolved_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            refine_rtol: 1e-13,
            strip: None,
            mu0: 10.0,
            classify_tol: 1e-9,
            merge_tol: 1e-7,
            max_newton: 30,
            unresolved_fraction: 0.1,
        }
    }
}

impl SolverConfig {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    /// Copy whose integrator tolerance is `refine_rtol`.
    pub fn refining(&self) -> Self {
        Self { rtol: self.refine_rtol, ..self.clone() }
    }

    pub fn validate(&self) -> crate::Result<()> {
        use alloc::format;
        let positive = [
            ("rtol", self.rtol),
            ("refine_rtol", self.refine_rtol),
            ("mu0", self.mu0),
            ("classify_tol", self.classify_tol),
            ("merge_tol", self.merge_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(crate::Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(m) = self.strip {
            if !(m > 0.0 && m.is_finite()) {
                return Err(crate::Error::Parameter(format!("strip bound must be positive, got {m}")));
            }
        }
        if self.max_newton == 0 {
            return Err(crate::Error::Parameter("max_newton must be at least 1".into()));
        }
        Ok(())
    }
}
