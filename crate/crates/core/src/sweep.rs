//! Monte Carlo loss and phase sweeps over the four architectures.
//!
//! Every (unitary, pattern, architecture, grid point) task draws from its own
//! ChaCha8 stream keyed on those indices, so results do not depend on how the
//! work is split across threads.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{apply_shift_compensation, compile, CompileResult, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{haar_random_unitary_with, ComplexMatrix, UnitaryMatrix, C64, ONE};
use crate::meshes::{decompose, synthesize_with_noise, Architecture, MeshProgram};
use crate::metrics::{compare, ComparisonScore, FIDELITY_NORMALIZATION};
use crate::noise::{
    clamped_normal_moments, noisy_evolve_columns, sample_imperfections_with, ImperfectionDraw,
    NoiseParams, Regime,
};
use crate::walk::{mode_indices, CoinField, LatticeSpec, ModeFrame};

pub const THREADS_ENV: &str = "QWC_THREADS";
pub const MGDR_LABEL: &str = "model approximation";

/// `count` evenly spaced points from `start` to `stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let g = Self { start, stop, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) || self.count == 0 {
            return Err(Error::InvalidArgument(format!("bad grid {self}")));
        }
        if self.count > 1 && self.stop <= self.start {
            return Err(Error::InvalidArgument(format!(
                "grid {self} is not increasing"
            )));
        }
        if self.count == 1 && self.stop != self.start {
            return Err(Error::InvalidArgument(format!(
                "single-point grid {self} needs start == stop"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + h * i as f64
                }
            })
            .collect()
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    /// `start:stop:count`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidArgument(format!("grid {s:?} is not start:stop:count"));
        let [a, b, c] = parts.as_slice() else {
            return Err(bad());
        };
        Grid::new(
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
            c.trim().parse().map_err(|_| bad())?,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// Axis is the mean amplitude loss; efficiency is `1 - loss`.
    Loss,
    /// Axis is the phase standard deviation in radians.
    Phase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub dim: usize,
    pub n_unitaries: usize,
    pub n_patterns: usize,
    pub architectures: Vec<Architecture>,
    pub grid: Grid,
    pub sigma_loss: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dim: 12,
            n_unitaries: 50,
            n_patterns: 50,
            architectures: Architecture::ALL.to_vec(),
            grid: Grid {
                start: 0.0,
                stop: 0.3,
                count: 7,
            },
            sigma_loss: 0.05,
            seed: 1,
            out: None,
        }
    }
}

impl SweepConfig {
    pub fn default_for(kind: SweepKind) -> Self {
        match kind {
            SweepKind::Loss => Self::default(),
            SweepKind::Phase => Self {
                grid: Grid {
                    start: 0.0,
                    stop: 0.5,
                    count: 11,
                },
                sigma_loss: 0.0,
                ..Self::default()
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|source| Error::Json {
            path: "<config>".into(),
            source,
        })?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.n_unitaries == 0 || self.n_patterns == 0 {
            return Err(Error::InvalidArgument(
                "dim, unitaries and patterns must be at least 1".into(),
            ));
        }
        if self.architectures.is_empty() {
            return Err(Error::InvalidArgument("no architectures selected".into()));
        }
        if !(self.sigma_loss >= 0.0 && self.sigma_loss.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma_loss {} must be non-negative",
                self.sigma_loss
            )));
        }
        self.grid.validate()
    }

    fn params(&self, kind: SweepKind, axis: f64) -> NoiseParams {
        match kind {
            SweepKind::Loss => NoiseParams {
                mean_amplitude: 1.0 - axis,
                sigma_loss: self.sigma_loss,
                sigma_phase: 0.0,
            },
            SweepKind::Phase => NoiseParams {
                mean_amplitude: 1.0,
                sigma_loss: 0.0,
                sigma_phase: axis,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub arch: Architecture,
    pub axis: f64,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    pub mean_similarity: f64,
    pub std_similarity: f64,
    pub n_unitaries: usize,
    pub n_patterns: usize,
    pub seed: u64,
    pub regime: Regime,
    pub clamp_bias: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub sweep: SweepKind,
    pub dim: usize,
    pub n_unitaries: usize,
    pub n_patterns: usize,
    pub seed: u64,
    pub sigma_loss: f64,
    pub axis: Vec<f64>,
    /// Mean clamped amplitude transmission per grid point.
    pub amplitude_efficiency: Vec<f64>,
    /// Mean clamped intensity transmission `E|t|^2` per grid point.
    pub intensity_efficiency: Vec<f64>,
    pub clamp_bias: Vec<f64>,
    pub fidelity_normalization: String,
    pub regimes: Vec<(Architecture, Regime)>,
    pub mgdr_label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub meta: SweepMeta,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for a tuple of task indices.
pub fn task_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for &t in tags {
        h = splitmix(h ^ splitmix(t));
    }
    ChaCha8Rng::seed_from_u64(h)
}

const TARGET_TAG: u64 = u64::MAX;

/// Seeded Haar target number `i` of a sweep.
pub fn sweep_target(seed: u64, dim: usize, i: usize) -> Result<UnitaryMatrix> {
    haar_random_unitary_with(dim, &mut task_rng(seed, &[TARGET_TAG, i as u64]))
}

enum Realizer {
    Walk {
        result: CompileResult,
        field: CoinField,
        lattice: LatticeSpec,
        cols: Vec<usize>,
        rows: Vec<usize>,
    },
    Mesh(MeshProgram),
}

impl Realizer {
    fn build(arch: Architecture, target: &UnitaryMatrix) -> Result<Self> {
        match arch {
            Architecture::Qwalk => Self::build_walk(compile(target, DEFAULT_TOLERANCE)?),
            _ => Ok(Realizer::Mesh(decompose(arch, target)?)),
        }
    }

    fn build_walk(result: CompileResult) -> Result<Self> {
        let field = apply_shift_compensation(&result.schedule);
        let lattice = result.schedule.lattice();
        let modes = result.interior_modes();
        let cols = mode_indices(&modes, ModeFrame::Even, &lattice)?;
        let rows = mode_indices(&modes, ModeFrame::after_steps(result.steps_used), &lattice)?;
        Ok(Realizer::Walk {
            result,
            field,
            lattice,
            cols,
            rows,
        })
    }

    fn sites(&self) -> usize {
        match self {
            Realizer::Walk { .. } => 1,
            Realizer::Mesh(p) => p.sites.len(),
        }
    }

    fn realize(
        &self,
        arch: Architecture,
        params: &NoiseParams,
        rng: &mut ChaCha8Rng,
    ) -> Result<ComplexMatrix> {
        let draws = sample_imperfections_with(params, arch.regime(), self.sites(), rng)?;
        match self {
            Realizer::Mesh(p) => synthesize_with_noise(p, &draws),
            Realizer::Walk { .. } => self.walk_block(&draws[0]),
        }
    }

    fn walk_block(&self, draw: &ImperfectionDraw) -> Result<ComplexMatrix> {
        match self {
            Realizer::Mesh(_) => Err(Error::Internal("mesh realizer has no walk block".into())),
            Realizer::Walk {
                result,
                field,
                lattice,
                cols,
                rows,
            } => {
                let k = result.dim();
                let mut state = ComplexMatrix::zeros(lattice.dim(), k);
                for (j, &c) in cols.iter().enumerate() {
                    state[(c, j)] = ONE;
                }
                noisy_evolve_columns(draw, field, result.steps_used as u32, lattice, &mut state);
                let all: Vec<usize> = (0..k).collect();
                let block = state.submatrix(rows, &all);
                let d_adj: Vec<C64> = result.diag.iter().map(|d| d.conj()).collect();
                Ok(ComplexMatrix::from_diagonal(&d_adj)
                    .matmul(&block)
                    .matmul(&result.input_relabel.to_matrix()))
            }
        }
    }
}

/// `D^dagger B P` for the K interior columns of the noisy walk.
pub fn realize_compiled(result: &CompileResult, draw: &ImperfectionDraw) -> Result<ComplexMatrix> {
    Realizer::build_walk(result.clone())?.walk_block(draw)
}

/// Thread count from `QWC_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!(
                "{THREADS_ENV}={v:?} is not a positive integer"
            ))),
        },
    }
}

/// Scores of one unitary: `[arch][grid][pattern]`.
type UnitaryScores = Vec<Vec<Vec<ComparisonScore>>>;

fn score_unitary(
    config: &SweepConfig,
    kind: SweepKind,
    axis: &[f64],
    u_idx: usize,
) -> Result<UnitaryScores> {
    let target = sweep_target(config.seed, config.dim, u_idx)?;
    config
        .architectures
        .iter()
        .map(|&arch| {
            let realizer = Realizer::build(arch, &target)?;
            axis.iter()
                .enumerate()
                .map(|(g_idx, &x)| {
                    let params = config.params(kind, x);
                    (0..config.n_patterns)
                        .map(|p_idx| {
                            let mut rng = task_rng(
                                config.seed,
                                &[u_idx as u64, p_idx as u64, arch as u64, g_idx as u64],
                            );
                            compare(&realizer.realize(arch, &params, &mut rng)?, &target)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn run_sweep(
    config: &SweepConfig,
    kind: SweepKind,
    threads: Option<usize>,
) -> Result<SweepOutput> {
    config.validate()?;
    let axis = config.grid.values();
    let work = || -> Result<Vec<UnitaryScores>> {
        (0..config.n_unitaries)
            .into_par_iter()
            .map(|i| score_unitary(config, kind, &axis, i))
            .collect()
    };
    let per_unitary = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut records = Vec::new();
    for (a_idx, &arch) in config.architectures.iter().enumerate() {
        for (g_idx, &x) in axis.iter().enumerate() {
            let scores = per_unitary.iter().flat_map(|u| u[a_idx][g_idx].iter());
            let (mean_fidelity, std_fidelity) = mean_std(scores.clone().map(|s| s.fidelity));
            let (mean_similarity, std_similarity) = mean_std(scores.map(|s| s.similarity));
            records.push(SweepRecord {
                arch,
                axis: x,
                mean_fidelity,
                std_fidelity,
                mean_similarity,
                std_similarity,
                n_unitaries: config.n_unitaries,
                n_patterns: config.n_patterns,
                seed: config.seed,
                regime: arch.regime(),
                clamp_bias: config.params(kind, x).clamp_bias(),
            });
        }
    }

    let moments: Vec<(f64, f64)> = axis
        .iter()
        .map(|&x| {
            let p = config.params(kind, x);
            clamped_normal_moments(p.mean_amplitude, p.sigma_loss)
        })
        .collect();
    let meta = SweepMeta {
        sweep: kind,
        dim: config.dim,
        n_unitaries: config.n_unitaries,
        n_patterns: config.n_patterns,
        seed: config.seed,
        sigma_loss: config.sigma_loss,
        amplitude_efficiency: moments.iter().map(|m| m.0).collect(),
        intensity_efficiency: moments.iter().map(|m| m.1 * m.1 + m.0 * m.0).collect(),
        clamp_bias: axis
            .iter()
            .map(|&x| config.params(kind, x).clamp_bias())
            .collect(),
        axis,
        fidelity_normalization: FIDELITY_NORMALIZATION.into(),
        regimes: config
            .architectures
            .iter()
            .map(|a| (*a, a.regime()))
            .collect(),
        mgdr_label: MGDR_LABEL.into(),
    };
    Ok(SweepOutput { records, meta })
}

pub fn sweep_loss(config: &SweepConfig) -> Result<SweepOutput> {
    run_sweep(config, SweepKind::Loss, threads_from_env()?)
}

pub fn sweep_phase(config: &SweepConfig) -> Result<SweepOutput> {
    run_sweep(config, SweepKind::Phase, threads_from_env()?)
}

pub const CSV_HEADER: [&str; 9] = [
    "arch",
    "axis",
    "mean_fidelity",
    "std_fidelity",
    "mean_similarity",
    "std_similarity",
    "n_unitaries",
    "n_patterns",
    "seed",
];

pub fn write_csv<W: std::io::Write>(out: W, records: &[SweepRecord]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let f = |x: f64| format!("{x:.11e}");
    for r in records {
        w.write_record([
            r.arch.name().to_string(),
            f(r.axis),
            f(r.mean_fidelity),
            f(r.std_fidelity),
            f(r.mean_similarity),
            f(r.std_similarity),
            r.n_unitaries.to_string(),
            r.n_patterns.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()
}

pub fn csv_string(records: &[SweepRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// `<out>.meta.json` next to the CSV.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_outputs(out: &Path, output: &SweepOutput) -> Result<()> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| Error::Io { path, source }
    };
    std::fs::write(out, csv_string(&output.records)).map_err(io(out))?;
    let meta = meta_path(out);
    let text = serde_json::to_string_pretty(&output.meta).expect("metadata serializes");
    std::fs::write(&meta, text).map_err(io(&meta))
}
