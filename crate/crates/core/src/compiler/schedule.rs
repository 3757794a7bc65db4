use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::walk::LatticeSpec;

/// What a beam-splitter slot does in its step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SlotKind {
    /// Outside the programmable modes; fixed Pauli-X coin.
    BoundaryX,
    Identity,
    Programmed {
        alpha: f64,
        phi: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSlot {
    pub step: u32,
    /// Lower mode of the pair `(m, m + 1)`; also the walk position of the coin.
    pub m: i64,
    pub kind: SlotKind,
}

impl BeamSplitterSlot {
    /// Network-side 2x2 operator on modes `(m, m + 1)`.
    pub fn matrix(&self) -> Mat2 {
        match self.kind {
            SlotKind::BoundaryX | SlotKind::Identity => Mat2::IDENTITY,
            SlotKind::Programmed { alpha, phi } => Mat2::beam_splitter(alpha, phi),
        }
    }

    /// Physical coin: the slot operator composed with the Pauli-X that
    /// undoes the shift's exchange of the pair.
    pub fn coin(&self) -> Mat2 {
        self.matrix().mul(&Mat2::PAULI_X)
    }

    pub fn is_programmed(&self) -> bool {
        matches!(self.kind, SlotKind::Programmed { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub n: u32,
    pub slots: Vec<BeamSplitterSlot>,
}

impl ScheduleStep {
    /// True when no slot is programmed.
    pub fn is_identity(&self) -> bool {
        !self.slots.iter().any(BeamSplitterSlot::is_programmed)
    }
}

/// Odd steps act on pairs `(-1, 0), (1, 2), ...`; even steps on `(0, 1), (2, 3), ...`.
pub fn beam_splitter_sequence(k: usize, n: u32) -> Vec<i64> {
    let top = 2 * (k / 2) as i64;
    if n % 2 == 1 {
        (-1..top).step_by(2).collect()
    } else {
        (0..=top).step_by(2).collect()
    }
}

/// Slot `(m, m + 1)` touches a mode outside `0..k`.
pub fn is_boundary(k: usize, m: i64) -> bool {
    m < 0 || m + 1 >= k as i64
}

/// Steps of coin settings for a K-mode network, numbered `1..=N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoinSchedule {
    dim: usize,
    steps: Vec<ScheduleStep>,
}

impl CoinSchedule {
    pub fn new(dim: usize, steps: Vec<ScheduleStep>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("schedule for zero modes".into()));
        }
        for (i, step) in steps.iter().enumerate() {
            let n = i as u32 + 1;
            if step.n != n {
                return Err(Error::InvalidArgument(format!(
                    "step {} found where step {n} expected",
                    step.n
                )));
            }
            let ms: Vec<i64> = step.slots.iter().map(|s| s.m).collect();
            if ms != beam_splitter_sequence(dim, n) {
                return Err(Error::InvalidArgument(format!(
                    "step {n} has slots {ms:?}, not its parity's pairs"
                )));
            }
            for s in &step.slots {
                if s.step != n {
                    return Err(Error::InvalidArgument(format!(
                        "slot m={} claims step {} inside step {n}",
                        s.m, s.step
                    )));
                }
                let boundary = is_boundary(dim, s.m);
                match s.kind {
                    SlotKind::BoundaryX if !boundary => {
                        return Err(Error::InvalidArgument(format!(
                            "interior slot m={} at step {n} marked boundary",
                            s.m
                        )))
                    }
                    SlotKind::Identity | SlotKind::Programmed { .. } if boundary => {
                        return Err(Error::InvalidArgument(format!(
                            "boundary slot m={} at step {n} is not boundary-X",
                            s.m
                        )))
                    }
                    SlotKind::Programmed { alpha, phi }
                        if !alpha.is_finite() || !phi.is_finite() =>
                    {
                        return Err(Error::InvalidArgument(format!(
                            "slot m={} at step {n} has non-finite angles",
                            s.m
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { dim, steps })
    }

    /// Every interior slot identity, `steps` steps long.
    pub fn identity(dim: usize, steps: u32) -> Result<Self> {
        let steps = (1..=steps)
            .map(|n| ScheduleStep {
                n,
                slots: beam_splitter_sequence(dim, n)
                    .into_iter()
                    .map(|m| BeamSplitterSlot {
                        step: n,
                        m,
                        kind: if is_boundary(dim, m) {
                            SlotKind::BoundaryX
                        } else {
                            SlotKind::Identity
                        },
                    })
                    .collect(),
            })
            .collect();
        Self::new(dim, steps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> &[ScheduleStep] {
        &self.steps
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn slots(&self) -> impl Iterator<Item = &BeamSplitterSlot> {
        self.steps.iter().flat_map(|s| s.slots.iter())
    }

    pub fn programmed_count(&self) -> usize {
        self.slots().filter(|s| s.is_programmed()).count()
    }

    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec::for_modes(self.dim)
    }

    pub fn slot_mut(&mut self, n: u32, m: i64) -> Option<&mut BeamSplitterSlot> {
        self.steps
            .get_mut((n as usize).checked_sub(1)?)?
            .slots
            .iter_mut()
            .find(|s| s.m == m)
    }

    /// Keep the listed step indices (0-based) and renumber from 1.
    pub(crate) fn retain_steps(&self, keep: &[usize]) -> Result<Self> {
        let steps = keep
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                let n = i as u32 + 1;
                let mut step = self.steps[j].clone();
                step.n = n;
                for s in &mut step.slots {
                    s.step = n;
                }
                step
            })
            .collect();
        Self::new(self.dim, steps)
    }
}
