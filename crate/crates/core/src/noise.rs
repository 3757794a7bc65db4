//! Lossy, phase-noisy coins and shifts.
//!
//! Shift branches are scaled by `f(p)`; coins become `G_o C G_i` with
//! `G = diag(g(0), g(1))` at each position. For draws that are constant over
//! modes and steps the walk factorizes as `g^N A U_N A^{-1}`. Quantum jumps
//! are not modelled: everything here is the post-selected, no-jump branch.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Mat2, C64, ONE};
use crate::walk::{apply_shift_rows, CoinField, LatticeSpec};

/// Certificate residual above this signals a bug.
pub const FACTORIZATION_TOL: f64 = 1e-9;
const GAIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// One draw reused by every site and step.
    TimeMultiplexed,
    /// An independent draw per beam-splitter site.
    Spatial,
}

/// Complex transmission factors indexed by coin bit (mode 0, mode 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImperfectionDraw {
    pub f: [C64; 2],
    pub g_i: [C64; 2],
    pub g_o: [C64; 2],
}

impl ImperfectionDraw {
    pub const IDEAL: ImperfectionDraw = ImperfectionDraw {
        f: [ONE, ONE],
        g_i: [ONE, ONE],
        g_o: [ONE, ONE],
    };

    pub fn new(f: [C64; 2], g_i: [C64; 2], g_o: [C64; 2]) -> Result<Self> {
        let d = Self { f, g_i, g_o };
        for z in d.factors() {
            if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > 1.0 + GAIN_TOL {
                return Err(Error::InvalidArgument(format!(
                    "imperfection factor {z} has gain or is not finite"
                )));
            }
        }
        Ok(d)
    }

    /// Same loss on every arm.
    pub fn balanced(a: f64) -> Result<Self> {
        let z = C64::new(a, 0.0);
        Self::new([z, z], [z, z], [z, z])
    }

    pub fn factors(&self) -> [C64; 6] {
        [
            self.f[0],
            self.f[1],
            self.g_i[0],
            self.g_i[1],
            self.g_o[0],
            self.g_o[1],
        ]
    }

    pub fn input_diag(&self) -> Mat2 {
        Mat2::diag(self.g_i[0], self.g_i[1])
    }

    pub fn output_diag(&self) -> Mat2 {
        Mat2::diag(self.g_o[0], self.g_o[1])
    }

    /// `G_o c G_i`.
    pub fn sandwich(&self, c: &Mat2) -> Mat2 {
        self.output_diag().mul(c).mul(&self.input_diag())
    }

    /// Shift factor with the coin sandwich folded in: `f(p) g_i(p) g_o(p)`.
    pub fn merged_shift(&self) -> [C64; 2] {
        [
            self.f[0] * self.g_i[0] * self.g_o[0],
            self.f[1] * self.g_i[1] * self.g_o[1],
        ]
    }
}

/// Shift with coin-`p` branches scaled by `f(p)`.
pub fn noisy_shift(draw: &ImperfectionDraw, lattice: &LatticeSpec) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(lattice.dim());
    apply_shift_rows(lattice, &mut m, draw.f, true);
    m
}

/// `G_o C(n) G_i` over the whole lattice.
pub fn noisy_coin(
    draw: &ImperfectionDraw,
    field: &CoinField,
    n: u32,
    lattice: &LatticeSpec,
) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(lattice.dim(), lattice.dim());
    for x in lattice.positions() {
        let c = draw.sandwich(&field.get(n, x));
        let base = lattice.index(x, 0).expect("position in lattice");
        for p in 0..2 {
            for q in 0..2 {
                m[(base + p, base + q)] = c.0[p][q];
            }
        }
    }
    m
}

/// Apply `steps` noisy steps to the columns of `state`.
pub fn noisy_evolve_columns(
    draw: &ImperfectionDraw,
    field: &CoinField,
    steps: u32,
    lattice: &LatticeSpec,
    state: &mut ComplexMatrix,
) {
    noisy_steps(draw, field, steps, lattice, state, true);
}

fn noisy_steps(
    draw: &ImperfectionDraw,
    field: &CoinField,
    steps: u32,
    lattice: &LatticeSpec,
    state: &mut ComplexMatrix,
    periodic: bool,
) {
    for n in 1..=steps {
        apply_shift_rows(lattice, state, draw.f, periodic);
        for x in lattice.positions() {
            let c = draw.sandwich(&field.get(n, x));
            let base = lattice.index(x, 0).expect("position in lattice");
            state.apply_rows(base, base + 1, &c);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationCertificate {
    /// Principal `sqrt(f'(0) f'(1))`.
    pub g: C64,
    /// `g / f'(1)`, so that `g k = f'(0)` and `g / k = f'(1)`.
    pub k: C64,
    /// Diagonal of `A = G_o diag(k^{-x})` in lattice order.
    pub a: Vec<C64>,
    pub residual: f64,
}

fn product(
    draw: &ImperfectionDraw,
    field: &CoinField,
    steps: u32,
    lattice: &LatticeSpec,
    periodic: bool,
) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(lattice.dim());
    noisy_steps(draw, field, steps, lattice, &mut u, periodic);
    u
}

/// Direct noisy product on the periodic lattice, plus a check of
/// `g^N A U_N A^{-1}` on the open-boundary lattice where it holds exactly.
pub fn noisy_evolve(
    draw: &ImperfectionDraw,
    field: &CoinField,
    steps: u32,
    lattice: &LatticeSpec,
) -> Result<(ComplexMatrix, FactorizationCertificate)> {
    field.validate()?;
    let fm = draw.merged_shift();
    if fm[1].norm() == 0.0 || fm[0].norm() == 0.0 || draw.g_o.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::Degenerate(
            "zero transmission factor; A is not invertible".into(),
        ));
    }
    let g = (fm[0] * fm[1]).sqrt();
    let k = g / fm[1];
    let a: Vec<C64> = (0..lattice.dim())
        .map(|i| {
            let (x, p) = lattice.site(i);
            draw.g_o[p as usize] * k.powi(-(x as i32))
        })
        .collect();
    let a_inv: Vec<C64> = a.iter().map(|z| ONE / z).collect();

    let direct_open = product(draw, field, steps, lattice, false);
    let ideal_open = product(&ImperfectionDraw::IDEAL, field, steps, lattice, false);
    let analytic = ComplexMatrix::from_diagonal(&a)
        .matmul(&ideal_open)
        .matmul(&ComplexMatrix::from_diagonal(&a_inv))
        .scale(g.powi(steps as i32));
    let residual = direct_open.max_abs_diff(&analytic);
    if residual > FACTORIZATION_TOL {
        return Err(Error::FactorizationViolation { residual });
    }
    let evolved = product(draw, field, steps, lattice, true);
    Ok((evolved, FactorizationCertificate { g, k, a, residual }))
}

/// Gaussian imperfection statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Mean amplitude transmission before clamping.
    pub mean_amplitude: f64,
    pub sigma_loss: f64,
    /// Phase standard deviation in radians.
    pub sigma_phase: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_loss >= 0.0 && self.sigma_loss.is_finite())
            || !(self.sigma_phase >= 0.0 && self.sigma_phase.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "standard deviations must be non-negative, got loss {} and phase {}",
                self.sigma_loss, self.sigma_phase
            )));
        }
        if !self.mean_amplitude.is_finite() {
            return Err(Error::InvalidArgument(
                "mean amplitude is not finite".into(),
            ));
        }
        Ok(())
    }

    /// `E[clamp(N(mu, sigma), 0, 1)] - mu`.
    pub fn clamp_bias(&self) -> f64 {
        clamped_normal_moments(self.mean_amplitude, self.sigma_loss).0 - self.mean_amplitude
    }
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Mean and standard deviation of `clamp(X, 0, 1)`, `X ~ N(mu, sigma)`.
pub fn clamped_normal_moments(mu: f64, sigma: f64) -> (f64, f64) {
    if sigma == 0.0 {
        return (mu.clamp(0.0, 1.0), 0.0);
    }
    let a = -mu / sigma;
    let b = (1.0 - mu) / sigma;
    let (pa, pb) = (std_normal_cdf(a), std_normal_cdf(b));
    let (da, db) = (std_normal_pdf(a), std_normal_pdf(b));
    let mass = pb - pa;
    let upper = 1.0 - pb;
    let m1 = upper + mu * mass + sigma * (da - db);
    let m2 = upper
        + mu * mu * mass
        + 2.0 * mu * sigma * (da - db)
        + sigma * sigma * (mass + a * da - b * db);
    (m1, (m2 - m1 * m1).max(0.0).sqrt())
}

struct Sampler {
    amp: Normal<f64>,
    phase: Normal<f64>,
}

impl Sampler {
    fn new(p: &NoiseParams) -> Result<Self> {
        p.validate()?;
        let bad = |e: rand_distr::NormalError| Error::InvalidArgument(e.to_string());
        Ok(Self {
            amp: Normal::new(p.mean_amplitude, p.sigma_loss).map_err(bad)?,
            phase: Normal::new(0.0, p.sigma_phase).map_err(bad)?,
        })
    }

    fn amplitude<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.amp.sample(rng).clamp(0.0, 1.0)
    }

    fn phase<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> C64 {
        C64::from_polar(1.0, self.phase.sample(rng))
    }

    /// Mode-constant: one amplitude per term type, a phase per arm.
    fn shared<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ImperfectionDraw {
        let mut pair = || {
            let a = self.amplitude(rng);
            [self.phase(rng) * a, self.phase(rng) * a]
        };
        let f = pair();
        let g_i = pair();
        let g_o = pair();
        ImperfectionDraw { f, g_i, g_o }
    }

    fn independent<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ImperfectionDraw {
        let mut one = || self.phase(rng) * self.amplitude(rng);
        let f = [one(), one()];
        let g_i = [one(), one()];
        let g_o = [one(), one()];
        ImperfectionDraw { f, g_i, g_o }
    }
}

/// One draw for the time-multiplexed regime, `count_sites` for spatial.
pub fn sample_imperfections_with<R: rand::Rng + ?Sized>(
    params: &NoiseParams,
    regime: Regime,
    count_sites: usize,
    rng: &mut R,
) -> Result<Vec<ImperfectionDraw>> {
    let s = Sampler::new(params)?;
    Ok(match regime {
        Regime::TimeMultiplexed => vec![s.shared(rng)],
        Regime::Spatial => (0..count_sites).map(|_| s.independent(rng)).collect(),
    })
}

pub fn sample_imperfections(
    params: &NoiseParams,
    regime: Regime,
    count_sites: usize,
    seed: u64,
) -> Result<Vec<ImperfectionDraw>> {
    sample_imperfections_with(
        params,
        regime,
        count_sites,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}
