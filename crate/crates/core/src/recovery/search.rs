use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::opcore::{fidelity, DensityOperator};
use crate::recovery::RecoverySpec;
use crate::scalar::Real;

/// Fidelities within this distance count as ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions<T: Real> {
    pub t_max: T,
    /// Odd counts put `t = 0` on the grid; it is evaluated regardless.
    pub grid_points: usize,
    pub refine_tol: T,
    /// When set, a result below `floor − floor_tol` triggers one retry on a
    /// four times denser grid.
    pub floor: Option<T>,
    pub floor_tol: T,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        Self {
            t_max: T::lit(10.0),
            grid_points: 401,
            refine_tol: T::lit(1e-4),
            floor: None,
            floor_tol: T::lit(1e-6),
        }
    }
}

impl<T: Real> SearchOptions<T> {
    pub fn with_floor(mut self, floor: T) -> Self {
        self.floor = Some(floor);
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RecoveryResult<T: Real> {
    pub achieved_fidelity: T,
    pub best_t: T,
    pub fidelity_floor: T,
    pub margin: T,
    pub grid_points: usize,
    pub t0_fidelity: T,
    #[serde(skip)]
    pub recovered: Option<DensityOperator<T>>,
}

impl<T: Real> RecoveryResult<T> {
    pub fn passes(&self, tol: T) -> bool {
        self.margin >= -tol
    }
}

fn better<T: Real>(cand: (T, T), best: (T, T)) -> bool {
    let (tc, fc) = cand;
    let (tb, fb) = best;
    let tie = T::lit(TIE_TOL);
    if fc > fb + tie {
        return true;
    }
    if fc < fb - tie {
        return false;
    }
    // Ties go to the smallest |t|, then the smallest t.
    tc.abs() < tb.abs() || (tc.abs() == tb.abs() && tc < tb)
}

fn scan<T: Real>(eval: &(impl Fn(T) -> Result<T> + Sync), t_max: T, points: usize) -> Result<(T, T)> {
    let points = points.max(2);
    let step = T::lit(2.0) * t_max / T::from_count(points - 1);
    let grid: Vec<T> = (0..points).map(|i| -t_max + step * T::from_count(i)).collect();
    let values: Vec<T> = grid.par_iter().map(|&t| eval(t)).collect::<Result<_>>()?;
    let mut best = (T::zero(), eval(T::zero())?);
    for (&t, &f) in grid.iter().zip(&values) {
        if better((t, f), best) {
            best = (t, f);
        }
    }
    Ok(best)
}

/// Golden-section maximization on `[lo, hi]`.
fn golden<T: Real>(eval: &impl Fn(T) -> Result<T>, mut lo: T, mut hi: T, tol: T) -> Result<(T, T)> {
    let r = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (eval(a)?, eval(b)?);
    while hi - lo > tol {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = eval(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = eval(b)?;
        }
    }
    Ok(if fa >= fb { (a, fa) } else { (b, fb) })
}

/// Maximizes `F(R_t(probe), target)` over the rotation parameter `t`.
///
/// The probe is the state already sent through the forward channel.
pub fn best_t_search<T: Real>(
    spec: &RecoverySpec<T>,
    probe: &DensityOperator<T>,
    target: &DensityOperator<T>,
    opts: &SearchOptions<T>,
) -> Result<RecoveryResult<T>> {
    let eval = |t: T| -> Result<T> { fidelity(target, &spec.recover(t, probe)?) };
    let t0_fidelity = eval(T::zero())?;
    let floor = opts.floor.unwrap_or(T::zero());

    let mut points = opts.grid_points;
    let mut best = search_once(&eval, opts, points)?;
    if opts.floor.is_some() && best.1 < floor - opts.floor_tol {
        points = 4 * (points - 1) + 1;
        let retry = search_once(&eval, opts, points)?;
        if better(retry, best) {
            best = retry;
        }
    }
    let (best_t, achieved) = best;
    let recovered = spec.recover(best_t, probe)?;
    Ok(RecoveryResult {
        achieved_fidelity: achieved,
        best_t,
        fidelity_floor: floor,
        margin: achieved - floor,
        grid_points: points,
        t0_fidelity,
        recovered: Some(recovered),
    })
}

fn search_once<T: Real>(eval: &(impl Fn(T) -> Result<T> + Sync), opts: &SearchOptions<T>, points: usize) -> Result<(T, T)> {
    let coarse = scan(eval, opts.t_max, points)?;
    let step = T::lit(2.0) * opts.t_max / T::from_count(points.max(2) - 1);
    let lo = (coarse.0 - step).max(-opts.t_max);
    let hi = (coarse.0 + step).min(opts.t_max);
    let refined = golden(eval, lo, hi, opts.refine_tol)?;
    Ok(if refined.1 > coarse.1 + T::lit(TIE_TOL) { refined } else { coarse })
}
