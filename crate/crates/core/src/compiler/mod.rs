//! Compile a K x K unitary into walk coin settings.
//!
//! The target is factored as `U^dagger = P A1 F A2`; an odd-even transposition
//! sort of the permutation list of `F` then chooses one beam splitter per
//! exchanged neighbour pair. Each exchange is a Givens-style update that keeps
//! `A1` upper triangular while it absorbs a column flip.

mod json;
mod schedule;

pub use json::{read_schedule, schedule_from_json, schedule_to_json, write_schedule};
pub use schedule::{
    beam_splitter_sequence, is_boundary, BeamSplitterSlot, CoinSchedule, ScheduleStep, SlotKind,
};

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{
    half_angle, pafa_decompose, ComplexMatrix, Mat2, PermutationMatrix, UnitaryMatrix, C64, ONE,
};
use crate::walk::{evolve_columns, mode_indices, CoinField, LatticeSpec, ModeFrame};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Amplitude allowed outside the programmable modes.
pub const LEAKAGE_TOL: f64 = 1e-10;
/// Ratios beyond this magnitude are treated as this magnitude.
pub const RATIO_CLAMP: f64 = 1e12;
const FACTOR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    #[default]
    OddEvenSort,
    /// Shorter schedules from a Bruhat decomposition. Not available.
    Bruhat,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompileOptions {
    pub tolerance: f64,
    pub strategy: Strategy,
    pub reduce: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            strategy: Strategy::OddEvenSort,
            reduce: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompileResult {
    pub schedule: CoinSchedule,
    /// Output phases: `target = D^dagger W P`, `W` the walk block.
    pub diag: Vec<C64>,
    /// Input-mode reassignment applied before the walk.
    pub input_relabel: PermutationMatrix,
    /// Mode labels of the occupied window, boundary modes included.
    pub mode_set: Vec<i64>,
    pub steps_used: usize,
}

impl CompileResult {
    pub fn dim(&self) -> usize {
        self.schedule.dim()
    }

    pub fn interior_modes(&self) -> Vec<i64> {
        (0..self.dim() as i64).collect()
    }
}

/// `z` labels of positions `{-2, 0, ..., 2 floor(K/2)}`.
pub fn mode_set(k: usize) -> Vec<i64> {
    (-2..=2 * (k / 2) as i64 + 1).collect()
}

/// `(alpha, phi)` with `cot(alpha) e^{2 i phi} = r`.
pub fn solve_coin_params(r: C64) -> Result<(f64, f64)> {
    if !r.re.is_finite() || !r.im.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "coin ratio {r} is not finite"
        )));
    }
    if r.norm() == 0.0 {
        return Ok((FRAC_PI_2, 0.0));
    }
    let alpha = 1f64.atan2(r.norm().min(RATIO_CLAMP));
    Ok((alpha, half_angle(r.arg())))
}

/// Slot decisions of one odd-even transposition round over `f`, applied in place.
/// Returns `(m, swapped)` for the interior slots.
pub fn sort_round(f: &mut [usize], n: u32) -> Vec<(i64, bool)> {
    let k = f.len();
    beam_splitter_sequence(k, n)
        .into_iter()
        .filter(|&m| !is_boundary(k, m))
        .map(|m| {
            let i = m as usize;
            let swap = f[i] > f[i + 1];
            if swap {
                f.swap(i, i + 1);
            }
            (m, swap)
        })
        .collect()
}

fn is_sorted(f: &[usize]) -> bool {
    f.windows(2).all(|w| w[0] <= w[1])
}

pub fn compile(target: &UnitaryMatrix, tolerance: f64) -> Result<CompileResult> {
    compile_with(
        target,
        &CompileOptions {
            tolerance,
            ..CompileOptions::default()
        },
    )
}

/// Checks unitarity before compiling a raw matrix.
pub fn compile_matrix(target: &ComplexMatrix, options: &CompileOptions) -> Result<CompileResult> {
    let u =
        UnitaryMatrix::new(target.clone()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    compile_with(&u, options)
}

pub fn compile_with(target: &UnitaryMatrix, options: &CompileOptions) -> Result<CompileResult> {
    if options.strategy == Strategy::Bruhat {
        return Err(Error::NotSupported("Bruhat schedule shortening".into()));
    }
    if !(options.tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {} must be positive",
            options.tolerance
        )));
    }
    let k = target.dim();
    let pafa = pafa_decompose(target)?;
    let mut a1 = pafa.a1;
    let mut a2 = pafa.a2;
    let mut f = pafa.f.image().to_vec();

    let mut steps = Vec::new();
    let mut n = 0u32;
    while !is_sorted(&f) {
        n += 1;
        if n as usize > k {
            return Err(Error::Internal(format!(
                "sort unfinished after {k} steps: {f:?}"
            )));
        }
        let mut slots = Vec::new();
        for m in beam_splitter_sequence(k, n) {
            let kind = if is_boundary(k, m) {
                SlotKind::BoundaryX
            } else {
                let i = m as usize;
                if f[i] <= f[i + 1] {
                    SlotKind::Identity
                } else {
                    let (alpha, phi) = solve_coin_params(a1[(i, i + 1)] / a1[(i + 1, i + 1)])?;
                    exchange(
                        &mut a1,
                        &mut a2,
                        &mut f,
                        i,
                        &Mat2::beam_splitter(alpha, phi),
                    );
                    SlotKind::Programmed { alpha, phi }
                }
            };
            slots.push(BeamSplitterSlot { step: n, m, kind });
        }
        steps.push(ScheduleStep { n, slots });
    }

    let product = a1.matmul(&a2);
    let diag = product.diagonal();
    let off = product.sub(&ComplexMatrix::from_diagonal(&diag)).max_norm();
    let phase_err = diag
        .iter()
        .map(|d| (d.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if off.max(phase_err) > FACTOR_TOL {
        return Err(Error::FactorizationViolation {
            residual: off.max(phase_err),
        });
    }

    let schedule = CoinSchedule::new(k, steps)?;
    let mut result = CompileResult {
        steps_used: schedule.num_steps(),
        schedule,
        diag,
        input_relabel: pafa.p.inverse(),
        mode_set: mode_set(k),
    };
    if options.reduce {
        result.schedule = reduce_footprint(&result.schedule);
        result.steps_used = result.schedule.num_steps();
    }
    let residual = verify(&result, target)?;
    if residual > options.tolerance {
        return Err(Error::VerificationFailed {
            residual,
            tolerance: options.tolerance,
        });
    }
    Ok(result)
}

/// Apply `t` to rows `(i, i+1)` of `A1`, flip its columns, swap the list entries,
/// and move the new diagonal of `A1` into `A2`.
fn exchange(a1: &mut ComplexMatrix, a2: &mut ComplexMatrix, f: &mut [usize], i: usize, t: &Mat2) {
    a1.apply_rows(i, i + 1, t);
    a1.swap_cols(i, i + 1);
    a1[(i + 1, i)] = C64::new(0.0, 0.0);
    f.swap(i, i + 1);
    for j in [i, i + 1] {
        let delta = a1[(j, j)];
        for r in 0..=j {
            a1[(r, j)] /= delta;
        }
        a1[(j, j)] = ONE;
        a2.scale_row(f[j], delta);
    }
}

/// Drops identity steps that leave the walk block unchanged: any trailing run,
/// and adjacent pairs elsewhere. Single leading or interior steps stay, since
/// removing them would swap the parity of every later step.
pub fn reduce_footprint(schedule: &CoinSchedule) -> CoinSchedule {
    let mut keep: Vec<usize> = (0..schedule.num_steps()).collect();
    let idle = |j: usize| schedule.steps()[j].is_identity();
    while keep.last().is_some_and(|&j| idle(j)) {
        keep.pop();
    }
    let mut i = 0;
    while i + 1 < keep.len() {
        if idle(keep[i]) && idle(keep[i + 1]) {
            keep.drain(i..i + 2);
        } else {
            i += 1;
        }
    }
    if keep.len() == schedule.num_steps() {
        return schedule.clone();
    }
    let Ok(reduced) = schedule.retain_steps(&keep) else {
        return schedule.clone();
    };
    match (walk_block(schedule), walk_block(&reduced)) {
        (Ok(a), Ok(b)) if a.max_abs_diff(&b) <= 1e-12 => reduced,
        _ => schedule.clone(),
    }
}

/// Physical coins `c = T X` at `(n, m)`, with Pauli-X on every other lattice
/// position so that nothing leaves the programmed modes.
pub fn apply_shift_compensation(schedule: &CoinSchedule) -> CoinField {
    let mut field = CoinField::new();
    for s in schedule.slots() {
        field.set(s.step, s.m, s.coin());
    }
    field.confine(schedule.num_steps() as u32, &schedule.lattice());
    field
}

/// Walk block on modes `0..K`: rows in the frame reached after `N` steps,
/// columns in the even frame.
pub fn walk_block(schedule: &CoinSchedule) -> Result<ComplexMatrix> {
    let lattice = schedule.lattice();
    let field = apply_shift_compensation(schedule);
    let n = schedule.num_steps();
    walk_block_with(&lattice, &field, n as u32, schedule.dim())
}

pub(crate) fn walk_block_with(
    lattice: &LatticeSpec,
    field: &CoinField,
    n: u32,
    k: usize,
) -> Result<ComplexMatrix> {
    let modes: Vec<i64> = (0..k as i64).collect();
    let cols = mode_indices(&modes, ModeFrame::Even, lattice)?;
    let rows = mode_indices(&modes, ModeFrame::after_steps(n as usize), lattice)?;
    let mut state = ComplexMatrix::zeros(lattice.dim(), k);
    for (j, &c) in cols.iter().enumerate() {
        state[(c, j)] = ONE;
    }
    evolve_columns(field, n, lattice, &mut state)?;
    let mut leakage: f64 = 0.0;
    for i in (0..lattice.dim()).filter(|i| !rows.contains(i)) {
        for j in 0..k {
            leakage = leakage.max(state[(i, j)].norm());
        }
    }
    if leakage > LEAKAGE_TOL {
        return Err(Error::ConfinementFailure { leakage });
    }
    Ok(state.submatrix(&rows, &(0..k).collect::<Vec<_>>()))
}

/// `D^dagger W P` from the compiled parts.
pub fn reconstruct(result: &CompileResult) -> Result<ComplexMatrix> {
    let w = walk_block(&result.schedule)?;
    let d_adj: Vec<C64> = result.diag.iter().map(|d| d.conj()).collect();
    Ok(ComplexMatrix::from_diagonal(&d_adj)
        .matmul(&w)
        .matmul(&result.input_relabel.to_matrix()))
}

/// Max-norm distance between the simulated walk and `target`.
pub fn verify(result: &CompileResult, target: &UnitaryMatrix) -> Result<f64> {
    if result.dim() != target.dim()
        || result.diag.len() != target.dim()
        || result.input_relabel.len() != target.dim()
    {
        return Err(Error::InvalidDimension(format!(
            "compiled for {} modes, target has {}",
            result.dim(),
            target.dim()
        )));
    }
    Ok(reconstruct(result)?.max_abs_diff(target.matrix()))
}

#[cfg(test)]
mod tests;
