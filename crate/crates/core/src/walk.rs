//! Coin, shift and N-step evolution operators of a two-dimensional-coin
//! discrete-time quantum walk on a truncated line.
//!
//! The full lattice basis is position-major: index `2 (x - x_min) + p`.
//! On the even sector this coincides with ascending `z = x + p`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Mat2, UnitaryMatrix, C64, ONE};

/// Tolerance on stored coin unitarity.
pub const COIN_TOL: f64 = 1e-10;
/// Off-diagonal parity blocks above this norm indicate a bug.
pub const PARITY_TOL: f64 = 1e-12;

/// Positions `x_min..=x_max` with a two-level coin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    x_min: i64,
    x_max: i64,
}

impl LatticeSpec {
    pub fn new(x_min: i64, x_max: i64) -> Result<Self> {
        if x_min.rem_euclid(2) != 0 || x_max.rem_euclid(2) != 1 || x_max <= x_min {
            return Err(Error::InvalidArgument(format!(
                "lattice needs even x_min < odd x_max, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Self { x_min, x_max })
    }

    /// Default window for a K-mode compile: one spare even position beyond
    /// `{-2, ..., 2 floor(K/2)}` on each side.
    pub fn for_modes(k: usize) -> Self {
        let half = (k / 2) as i64;
        Self {
            x_min: -4,
            x_max: 2 * half + 3,
        }
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    pub fn x_max(&self) -> i64 {
        self.x_max
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> {
        self.x_min..=self.x_max
    }

    pub fn num_positions(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn dim(&self) -> usize {
        2 * self.num_positions()
    }

    pub fn contains(&self, x: i64) -> bool {
        (self.x_min..=self.x_max).contains(&x)
    }

    /// Basis index of `(x, p)`.
    pub fn index(&self, x: i64, p: u8) -> Option<usize> {
        (self.contains(x) && p < 2).then(|| (2 * (x - self.x_min)) as usize + p as usize)
    }

    pub fn site(&self, idx: usize) -> (i64, u8) {
        (self.x_min + (idx / 2) as i64, (idx % 2) as u8)
    }

    fn wrap(&self, x: i64) -> i64 {
        self.x_min + (x - self.x_min).rem_euclid(self.num_positions() as i64)
    }

    /// Basis indices grouped as (even positions, odd positions).
    pub fn parity_split(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.dim()).partition(|&i| self.site(i).0.rem_euclid(2) == 0)
    }
}

/// Which sector a mode label `z` refers to.
///
/// Even frame: `z = x + p` on even positions. Odd frame: `z = y + p` on odd
/// positions, the labelling reached after an odd number of steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeFrame {
    Even,
    Odd,
}

impl ModeFrame {
    pub fn after_steps(n: usize) -> Self {
        if n.is_multiple_of(2) {
            ModeFrame::Even
        } else {
            ModeFrame::Odd
        }
    }

    /// `(x, p)` carrying mode label `z`.
    pub fn site_of(&self, z: i64) -> (i64, u8) {
        let p = match self {
            ModeFrame::Even => z.rem_euclid(2),
            ModeFrame::Odd => (z + 1).rem_euclid(2),
        };
        (z - p, p as u8)
    }
}

/// `z = x + p` for an even position.
pub fn mode_index(x: i64, p: u8) -> Result<i64> {
    if x.rem_euclid(2) != 0 {
        return Err(Error::InvalidArgument(format!("position {x} is odd")));
    }
    if p > 1 {
        return Err(Error::InvalidArgument(format!(
            "coin bit {p} is not 0 or 1"
        )));
    }
    Ok(x + p as i64)
}

/// Step- and position-dependent 2x2 coins; missing entries are the identity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoinField {
    coins: BTreeMap<(u32, i64), Mat2>,
}

impl CoinField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, step: u32, x: i64, coin: Mat2) {
        self.coins.insert((step, x), coin);
    }

    pub fn get(&self, step: u32, x: i64) -> Mat2 {
        self.coins
            .get(&(step, x))
            .copied()
            .unwrap_or(Mat2::IDENTITY)
    }

    pub fn contains(&self, step: u32, x: i64) -> bool {
        self.coins.contains_key(&(step, x))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, i64, &Mat2)> {
        self.coins.iter().map(|(&(n, x), c)| (n, x, c))
    }

    pub fn len(&self) -> usize {
        self.coins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coins.is_empty()
    }

    /// Same coin at every lattice position for steps `1..=steps`.
    pub fn uniform(coin: Mat2, steps: u32, lattice: &LatticeSpec) -> Self {
        let mut f = Self::new();
        for n in 1..=steps {
            for x in lattice.positions() {
                f.set(n, x, coin);
            }
        }
        f
    }

    /// Independent Haar coins at every position for steps `1..=steps`.
    pub fn random<R: rand::Rng + ?Sized>(
        steps: u32,
        lattice: &LatticeSpec,
        rng: &mut R,
    ) -> Result<Self> {
        let mut f = Self::new();
        for n in 1..=steps {
            for x in lattice.positions() {
                let m = crate::linalg::haar_random_unitary_with(2, rng)?.into_inner();
                f.set(n, x, Mat2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]));
            }
        }
        Ok(f)
    }

    /// Steps after `m`, renumbered to start at 1.
    pub fn shifted(&self, m: u32) -> Self {
        Self {
            coins: self
                .coins
                .iter()
                .filter(|(&(n, _), _)| n > m)
                .map(|(&(n, x), &c)| ((n - m, x), c))
                .collect(),
        }
    }

    /// Fill every unset lattice position with Pauli-X for steps `1..=steps`.
    pub fn confine(&mut self, steps: u32, lattice: &LatticeSpec) {
        for n in 1..=steps {
            for x in lattice.positions() {
                self.coins.entry((n, x)).or_insert(Mat2::PAULI_X);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (&(step, position), c) in &self.coins {
            let deviation = if c.is_finite() {
                c.unitarity_defect()
            } else {
                f64::INFINITY
            };
            if deviation > COIN_TOL {
                return Err(Error::InvalidCoin {
                    step,
                    position,
                    deviation,
                });
            }
        }
        Ok(())
    }
}

fn check_coins_at(field: &CoinField, n: u32, lattice: &LatticeSpec) -> Result<()> {
    for x in lattice.positions() {
        if field.contains(n, x) {
            let c = field.get(n, x);
            let deviation = if c.is_finite() {
                c.unitarity_defect()
            } else {
                f64::INFINITY
            };
            if deviation > COIN_TOL {
                return Err(Error::InvalidCoin {
                    step: n,
                    position: x,
                    deviation,
                });
            }
        }
    }
    Ok(())
}

/// Block-diagonal coin operator of step `n`.
pub fn build_coin_operator(
    field: &CoinField,
    n: u32,
    lattice: &LatticeSpec,
) -> Result<UnitaryMatrix> {
    check_coins_at(field, n, lattice)?;
    let mut m = ComplexMatrix::zeros(lattice.dim(), lattice.dim());
    for x in lattice.positions() {
        let c = field.get(n, x);
        let base = lattice.index(x, 0).expect("position in lattice");
        for p in 0..2 {
            for q in 0..2 {
                m[(base + p, base + q)] = c.0[p][q];
            }
        }
    }
    UnitaryMatrix::new(m)
}

/// Target index of `(x, p)` under the shift, with periodic wrap.
fn shift_target(lattice: &LatticeSpec, idx: usize) -> usize {
    let (x, p) = lattice.site(idx);
    let y = lattice.wrap(if p == 0 { x - 1 } else { x + 1 });
    lattice.index(y, p).expect("wrapped position in lattice")
}

/// Coin-0 amplitude moves to `x - 1`, coin-1 amplitude to `x + 1`.
pub fn build_shift_operator(lattice: &LatticeSpec) -> UnitaryMatrix {
    let mut m = ComplexMatrix::zeros(lattice.dim(), lattice.dim());
    for j in 0..lattice.dim() {
        m[(shift_target(lattice, j), j)] = ONE;
    }
    UnitaryMatrix::new(m).expect("shift is a permutation")
}

/// In-place `state <- S state`, with per-coin-bit branch factors. Without
/// `periodic`, amplitude crossing the lattice edge is dropped.
pub(crate) fn apply_shift_rows(
    lattice: &LatticeSpec,
    state: &mut ComplexMatrix,
    factor: [C64; 2],
    periodic: bool,
) {
    let mut out = ComplexMatrix::zeros(state.rows(), state.cols());
    for i in 0..lattice.dim() {
        let (x, p) = lattice.site(i);
        let y = if p == 0 { x - 1 } else { x + 1 };
        if !periodic && !lattice.contains(y) {
            continue;
        }
        let t = shift_target(lattice, i);
        let f = factor[i % 2];
        for j in 0..state.cols() {
            out[(t, j)] = f * state[(i, j)];
        }
    }
    *state = out;
}

/// In-place `state <- C(n) state`.
pub(crate) fn apply_coin_rows(
    field: &CoinField,
    n: u32,
    lattice: &LatticeSpec,
    state: &mut ComplexMatrix,
) {
    for x in lattice.positions() {
        let c = field.get(n, x);
        if c == Mat2::IDENTITY {
            continue;
        }
        let base = lattice.index(x, 0).expect("position in lattice");
        state.apply_rows(base, base + 1, &c);
    }
}

/// `U_N = C(N) S ... C(1) S`; `N = 0` is the identity.
pub fn evolve(field: &CoinField, steps: u32, lattice: &LatticeSpec) -> Result<UnitaryMatrix> {
    let mut u = ComplexMatrix::identity(lattice.dim());
    evolve_columns(field, steps, lattice, &mut u)?;
    UnitaryMatrix::new(u)
}

/// Apply `steps` walk steps to the columns of `state` (rows are lattice modes).
pub fn evolve_columns(
    field: &CoinField,
    steps: u32,
    lattice: &LatticeSpec,
    state: &mut ComplexMatrix,
) -> Result<()> {
    for n in 1..=steps {
        check_coins_at(field, n, lattice)?;
        apply_shift_rows(lattice, state, [ONE, ONE], true);
        apply_coin_rows(field, n, lattice, state);
    }
    Ok(())
}

fn parity_blocks(
    u: &ComplexMatrix,
    lattice: &LatticeSpec,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (even, odd) = lattice.parity_split();
    let off = u
        .submatrix(&even, &odd)
        .max_norm()
        .max(u.submatrix(&odd, &even).max_norm());
    if off > PARITY_TOL {
        return Err(Error::StructureViolation { norm: off });
    }
    Ok((u.submatrix(&even, &even), u.submatrix(&odd, &odd)))
}

/// `U(n+1) U(n)` split into its even-position and odd-position blocks.
pub fn unit_cell(
    field: &CoinField,
    n: u32,
    lattice: &LatticeSpec,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let s = build_shift_operator(lattice);
    let step = |k: u32| -> Result<ComplexMatrix> {
        Ok(build_coin_operator(field, k, lattice)?
            .matrix()
            .matmul(s.matrix()))
    };
    let cell = step(n + 1)?.matmul(&step(n)?);
    parity_blocks(&cell, lattice)
}

/// The even-N evolution is block diagonal by position parity.
pub fn assert_even_odd_independence(
    field: &CoinField,
    steps: u32,
    lattice: &LatticeSpec,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !steps.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("step count {steps} is odd")));
    }
    let u = evolve(field, steps, lattice)?;
    parity_blocks(u.matrix(), lattice)
}

fn mode_rows(modes: &[i64], frame: ModeFrame, lattice: &LatticeSpec) -> Result<Vec<usize>> {
    modes
        .iter()
        .map(|&z| {
            let (x, p) = frame.site_of(z);
            lattice
                .index(x, p)
                .ok_or_else(|| Error::InvalidArgument(format!("mode {z} lies outside the lattice")))
        })
        .collect()
}

/// Submatrix on even-frame mode labels, in the given order.
pub fn extract_block(
    u_full: &ComplexMatrix,
    modes: &[i64],
    lattice: &LatticeSpec,
) -> Result<ComplexMatrix> {
    extract_block_framed(u_full, modes, ModeFrame::Even, ModeFrame::Even, lattice)
}

/// Rows labelled in `out_frame`, columns in `in_frame`.
pub fn extract_block_framed(
    u_full: &ComplexMatrix,
    modes: &[i64],
    out_frame: ModeFrame,
    in_frame: ModeFrame,
    lattice: &LatticeSpec,
) -> Result<ComplexMatrix> {
    let rows = mode_rows(modes, out_frame, lattice)?;
    let cols = mode_rows(modes, in_frame, lattice)?;
    Ok(u_full.submatrix(&rows, &cols))
}

/// Lattice basis indices of mode labels in a frame.
pub fn mode_indices(modes: &[i64], frame: ModeFrame, lattice: &LatticeSpec) -> Result<Vec<usize>> {
    mode_rows(modes, frame, lattice)
}
