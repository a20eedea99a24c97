//! Dormand–Prince 8(5,3) integrator for small complex systems.
//!
//! Accepted step endpoints form a mesh that can be replayed with the error
//! control switched off, so that nearby parameter values are integrated with
//! identical steps (finite differences in the parameter then stay smooth).

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest normalized error estimate among accepted steps (<= 1).
    pub max_local_error: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    /// Mesh: start point, accepted step endpoints and requested nodes.
    pub x: Vec<f64>,
    pub y: Vec<[Complex64; N]>,
    pub stats: StepStats,
}

const C: [f64; 12] = [
    0.0,
    5.260_015_195_876_773E-2,
    7.890_022_793_815_16E-2,
    1.183_503_419_072_274E-1,
    2.816_496_580_927_726E-1,
    3.333_333_333_333_333E-1,
    0.25,
    3.076_923_076_923_077E-1,
    6.512_820_512_820_513E-1,
    0.6,
    8.571_428_571_428_571E-1,
    1.0,
];

const A: [[f64; 11]; 12] = [
    [0.0; 11],
    [5.260_015_195_876_773E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.972_505_698_453_79E-2, 5.917_517_095_361_37E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.958_758_547_680_685E-2, 0.0, 8.876_275_643_042_054E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        2.413_651_341_592_667E-1,
        0.0,
        -8.845_494_793_282_861E-1,
        9.248_340_032_617_92E-1,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.703_703_703_703_703_5E-2,
        0.0,
        0.0,
        1.708_286_087_294_738_6E-1,
        1.254_676_875_668_224_2E-1,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.710_937_5E-2,
        0.0,
        0.0,
        1.702_522_110_195_440_5E-1,
        6.021_653_898_045_596E-2,
        -1.757_812_5E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.709_200_011_850_479E-2,
        0.0,
        0.0,
        1.703_839_257_122_399_8E-1,
        1.072_620_304_463_732_8E-1,
        -1.531_943_774_862_440_2E-2,
        8.273_789_163_814_023E-3,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        6.241_109_587_160_757E-1,
        0.0,
        0.0,
        -3.360_892_629_446_941_4,
        -8.682_193_468_417_26E-1,
        2.759_209_969_944_671E1,
        2.015_406_755_047_789_4E1,
        -4.348_988_418_106_996E1,
        0.0,
        0.0,
        0.0,
    ],
    [
        4.776_625_364_382_643_4E-1,
        0.0,
        0.0,
        -2.488_114_619_971_667_7,
        -5.902_908_268_368_43E-1,
        2.123_005_144_818_119_3E1,
        1.527_923_363_288_242_3E1,
        -3.328_821_096_898_486E1,
        -2.033_120_170_850_862_7E-2,
        0.0,
        0.0,
    ],
    [
        -9.371_424_300_859_873E-1,
        0.0,
        0.0,
        5.186_372_428_844_064,
        1.091_437_348_996_729_5,
        -8.149_787_010_746_927,
        -1.852_006_565_999_696E1,
        2.273_948_709_935_050_5E1,
        2.493_605_552_679_652_3,
        -3.046_764_471_898_219_6,
        0.0,
    ],
    [
        2.273_310_147_516_538,
        0.0,
        0.0,
        -1.053_449_546_673_725E1,
        -2.000_872_058_224_862_5,
        -1.795_893_186_311_88E1,
        2.794_888_452_941_996E1,
        -2.858_998_277_135_023_5,
        -8.872_856_933_530_63,
        1.236_056_717_579_430_3E1,
        6.433_927_460_157_636E-1,
    ],
];

const B: [f64; 12] = [
    5.429_373_411_656_876_5E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450_312_892_752_409,
    1.891_517_899_314_500_3,
    -5.801_203_960_010_585,
    3.111_643_669_578_199E-1,
    -1.521_609_496_625_161E-1,
    2.013_654_008_040_303_4E-1,
    4.471_061_572_777_259E-2,
];

const ER: [f64; 12] = [
    1.312_004_499_419_488E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.225_156_446_376_204_4,
    -4.957_589_496_572_502E-1,
    1.664_377_182_454_986_4,
    -3.503_288_487_499_736_6E-1,
    3.341_791_187_130_175E-1,
    8.192_320_648_511_571E-2,
    -2.235_530_786_388_629_4E-2,
];

const BHH: [f64; 3] = [2.440_944_881_889_764E-1, 7.338_466_882_816_118E-1, 2.205_882_352_941_176_6E-2];

struct Step<const N: usize> {
    y: [Complex64; N],
    k: [[Complex64; N]; 12],
}

#[inline]
fn stages<const N: usize, F>(f: &F, x: f64, h: f64, y: &[Complex64; N], k0: [Complex64; N]) -> Step<N>
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    let zero = Complex64::new(0.0, 0.0);
    let mut k = [[zero; N]; 12];
    k[0] = k0;
    for i in 1..12 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            let a = A[i][j];
            if a != 0.0 {
                let s = h * a;
                for n in 0..N {
                    yi[n] += kj[n] * s;
                }
            }
        }
        k[i] = f(x + C[i] * h, &yi);
    }
    let mut ynew = *y;
    for (i, ki) in k.iter().enumerate() {
        if B[i] != 0.0 {
            let s = h * B[i];
            for n in 0..N {
                ynew[n] += ki[n] * s;
            }
        }
    }
    Step { y: ynew, k }
}

/// Integrates `y' = f(x, y)` from `x0` to `x1`, landing exactly on every
/// entry of `nodes` (sorted, inside `[x0, x1]`).
#[allow(clippy::needless_range_loop)]
pub fn integrate<const N: usize, F>(
    f: F,
    x0: f64,
    x1: f64,
    y0: [Complex64; N],
    opts: &Options,
    nodes: &[f64],
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    let mut xs = alloc::vec![x0];
    let mut ys = alloc::vec![y0];
    let mut stats = StepStats::default();
    let mut x = x0;
    let mut y = y0;
    let mut k0 = f(x, &y);
    let span = x1 - x0;
    let mut h = opts.h_max.min(span).max(span * 1e-6);
    let mut next_node = nodes.iter().copied().filter(|&t| t > x0 && t < x1).peekable();
    let mut last_rejected = false;
    while x < x1 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integration { x, reason: format!("step budget {} exhausted", opts.max_steps) });
        }
        let target = next_node.peek().copied().unwrap_or(x1);
        let mut hs = h.min(opts.h_max);
        let mut land = false;
        if x + hs >= target - 1e-14 * span {
            hs = target - x;
            land = true;
        }
        if hs <= 1e-15 * span.max(x.abs()) {
            return Err(Error::Integration { x, reason: format!("step size underflow (h = {hs:e})") });
        }
        let st = stages(&f, x, hs, &y, k0);
        let mut err = 0.0;
        let mut err2 = 0.0;
        for n in 0..N {
            let sk = opts.atol + opts.rtol * y[n].norm().max(st.y[n].norm());
            let mut e3 = -BHH[0] * st.k[0][n] - BHH[1] * st.k[8][n] - BHH[2] * st.k[11][n];
            let mut e5 = Complex64::new(0.0, 0.0);
            for i in 0..12 {
                e3 += B[i] * st.k[i][n];
                e5 += ER[i] * st.k[i][n];
            }
            err2 += (e3.norm() / sk).powi(2);
            err += (e5.norm() / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = hs.abs() * err * (1.0 / (deno * N as f64)).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration { x, reason: "non-finite error estimate".into() });
        }
        let fac11 = err.powf(0.125);
        if err <= 1.0 {
            let fac = (fac11 / 0.9).clamp(1.0 / 6.0, 3.0);
            stats.accepted += 1;
            stats.max_local_error = stats.max_local_error.max(err);
            x = if land { target } else { x + hs };
            y = st.y;
            k0 = f(x, &y);
            xs.push(x);
            ys.push(y);
            if land && next_node.peek().is_some() && target < x1 {
                next_node.next();
            }
            let mut hn = hs / fac;
            if last_rejected {
                hn = hn.min(hs);
            }
            last_rejected = false;
            // Landing on a node clips the step; keep the controller's proposal.
            h = if land { hn.max(h) } else { hn };
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h = hs / (fac11 / 0.9).min(3.0);
        }
    }
    Ok(Trajectory { x: xs, y: ys, stats })
}

/// Re-integrates on a frozen mesh (first entry is the start point) and
/// returns the final state.
pub fn replay<const N: usize, F>(f: F, mesh: &[f64], y0: [Complex64; N]) -> [Complex64; N]
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    let mut y = y0;
    for w in mesh.windows(2) {
        let k0 = f(w[0], &y);
        y = stages(&f, w[0], w[1] - w[0], &y, k0).y;
    }
    y
}
