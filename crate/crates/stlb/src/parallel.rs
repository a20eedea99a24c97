//! Per-region parallel search with an order-preserving merge.

use rayon::prelude::*;
use stlb_core::spectrum::{self, RegionResult};
use stlb_core::{BoundaryMatrix, Potential, SolverConfig, Spectrum};

use crate::CliError;

/// Builds a pool with `jobs` workers (`None` or 0: rayon's default).
pub fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs.filter(|&j| j > 0) {
        b = b.num_threads(j);
    }
    b.build().map_err(|e| CliError::Input(format!("cannot start {jobs:?} workers: {e}")))
}

/// Same result as [`spectrum::find_eigenvalues`], with regions solved on
/// the pool. Results are collected in region order.
pub fn find_eigenvalues(
    pool: &rayon::ThreadPool,
    p: &Potential,
    a: &BoundaryMatrix,
    n_max: usize,
    cfg: &SolverConfig,
) -> Result<Spectrum, CliError> {
    let plan = spectrum::plan(p, a, n_max, cfg)?;
    let results: Vec<RegionResult> = pool
        .install(|| (0..plan.regions.len()).into_par_iter().map(|i| spectrum::solve_region(&plan, i, cfg)).collect());
    Ok(spectrum::finish(&plan, results, cfg)?)
}

/// Maps `f` over `items` on the pool, keeping input order.
pub fn map<T: Sync, R: Send>(pool: &rayon::ThreadPool, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    pool.install(|| items.par_iter().map(f).collect())
}
