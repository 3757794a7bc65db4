//! Built-in invariant suites run by `qwc selftest`.

use rand::Rng;
use serde::Serialize;

use crate::compiler::{compile, verify, DEFAULT_TOLERANCE};
use crate::error::Result;
use crate::linalg::{haar_random_unitary_with, C64};
use crate::noise::{noisy_evolve, ImperfectionDraw};
use crate::sweep::{run_sweep, task_rng, Grid, SweepConfig, SweepKind};
use crate::walk::{assert_even_odd_independence, CoinField, LatticeSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest residual seen, or the first error message.
    pub detail: String,
}

impl std::fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{tag} {} ({} cases): {}",
            self.name, self.cases, self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

fn suite(
    name: &'static str,
    cases: usize,
    run: impl FnOnce() -> Result<(f64, f64)>,
) -> SuiteResult {
    match run() {
        Ok((worst, bound)) => SuiteResult {
            name,
            passed: worst <= bound,
            cases,
            detail: format!("worst {worst:.3e}, bound {bound:.1e}"),
        },
        Err(e) => SuiteResult {
            name,
            passed: false,
            cases,
            detail: e.to_string(),
        },
    }
}

fn random_draw<R: Rng>(rng: &mut R) -> Result<ImperfectionDraw> {
    let mut z = || C64::from_polar(rng.random_range(0.5..1.0), rng.random_range(-3.0..3.0));
    ImperfectionDraw::new([z(), z()], [z(), z()], [z(), z()])
}

pub fn factorization_suite(seed: u64, cases: usize) -> SuiteResult {
    suite("factorization", cases, || {
        let mut worst = 0.0f64;
        for i in 0..cases {
            let mut rng = task_rng(seed, &[1, i as u64]);
            let k = rng.random_range(2..=12);
            let steps = rng.random_range(1..=20);
            let lattice = LatticeSpec::for_modes(k);
            let field = CoinField::random(steps, &lattice, &mut rng)?;
            let (_, cert) = noisy_evolve(&random_draw(&mut rng)?, &field, steps, &lattice)?;
            worst = worst.max(cert.residual);
        }
        Ok((worst, 1e-9))
    })
}

pub fn round_trip_suite(seed: u64, cases: usize) -> SuiteResult {
    suite("round-trip", cases, || {
        let mut worst = 0.0f64;
        for i in 0..cases {
            let mut rng = task_rng(seed, &[2, i as u64]);
            let k = 2 + i % 11;
            let target = haar_random_unitary_with(k, &mut rng)?;
            let result = compile(&target, DEFAULT_TOLERANCE)?;
            worst = worst.max(verify(&result, &target)?);
        }
        Ok((worst, DEFAULT_TOLERANCE))
    })
}

pub fn parity_suite(seed: u64, cases: usize) -> SuiteResult {
    suite("parity", cases, || {
        for i in 0..cases {
            let mut rng = task_rng(seed, &[3, i as u64]);
            let lattice = LatticeSpec::for_modes(rng.random_range(2..=12));
            let steps = 2 * rng.random_range(1..=6);
            let field = CoinField::random(steps, &lattice, &mut rng)?;
            assert_even_odd_independence(&field, steps, &lattice)?;
        }
        Ok((0.0, 0.0))
    })
}

/// Mean shifts at rounding level count as converged.
const MEAN_FLOOR: f64 = 1e-12;

/// Doubling the pattern count moves every mean by less than two standard errors.
pub fn convergence_suite(seed: u64) -> SuiteResult {
    let base = SweepConfig {
        dim: 4,
        n_unitaries: 4,
        n_patterns: 16,
        grid: Grid {
            start: 0.0,
            stop: 0.2,
            count: 3,
        },
        seed,
        ..SweepConfig::default()
    };
    let cases = base.architectures.len() * base.grid.count;
    suite("convergence", cases, || {
        let small = run_sweep(&base, SweepKind::Loss, None)?;
        let doubled = run_sweep(
            &SweepConfig {
                n_patterns: 2 * base.n_patterns,
                ..base.clone()
            },
            SweepKind::Loss,
            None,
        )?;
        let n = (base.n_unitaries * base.n_patterns) as f64;
        let mut worst = 0.0f64;
        for (a, b) in small.records.iter().zip(&doubled.records) {
            for (ma, mb, sd) in [
                (a.mean_fidelity, b.mean_fidelity, a.std_fidelity),
                (a.mean_similarity, b.mean_similarity, a.std_similarity),
            ] {
                let diff = (ma - mb).abs();
                let ratio = if diff <= MEAN_FLOOR {
                    0.0
                } else {
                    diff * n.sqrt() / sd
                };
                worst = worst.max(ratio);
            }
        }
        Ok((worst, 2.0))
    })
}

pub fn run_selftest(seed: u64) -> SelftestReport {
    SelftestReport {
        suites: vec![
            factorization_suite(seed, 40),
            round_trip_suite(seed, 44),
            parity_suite(seed, 20),
            convergence_suite(seed),
        ],
    }
}
