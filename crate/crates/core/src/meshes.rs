//! Reference interferometer meshes: Reck (triangular), Clements
//! (rectangular) and an MGDR-style single loop.
//!
//! A program is an ordered list of nearest-neighbour sites applied to the
//! light first to last, followed by output phases:
//! `U = diag(phases) T_S ... T_1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{factor_u2, half_angle, ComplexMatrix, Mat2, UnitaryMatrix, C64};
use crate::noise::{ImperfectionDraw, Regime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Qwalk,
    Reck,
    Clements,
    Mgdr,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::Qwalk,
        Architecture::Reck,
        Architecture::Clements,
        Architecture::Mgdr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Architecture::Qwalk => "qwalk",
            Architecture::Reck => "reck",
            Architecture::Clements => "clements",
            Architecture::Mgdr => "mgdr",
        }
    }

    /// Loop architectures reuse one set of components for every mode.
    pub fn regime(&self) -> Regime {
        match self {
            Architecture::Qwalk | Architecture::Mgdr => Regime::TimeMultiplexed,
            Architecture::Reck | Architecture::Clements => Regime::Spatial,
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown architecture {s:?}")))
    }
}

/// Beam splitter on modes `(a, a + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSite {
    pub a: usize,
    pub alpha: f64,
    pub phi: f64,
}

impl MeshSite {
    pub fn matrix(&self) -> Mat2 {
        Mat2::beam_splitter(self.alpha, self.phi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshProgram {
    pub arch: Architecture,
    pub dim: usize,
    pub sites: Vec<MeshSite>,
    pub phases: Vec<C64>,
}

impl MeshProgram {
    /// Site indices grouped into the earliest layer each can occupy.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        let mut ready = vec![0usize; self.dim];
        let mut layers: Vec<Vec<usize>> = Vec::new();
        for (i, s) in self.sites.iter().enumerate() {
            let l = ready[s.a].max(ready[s.a + 1]);
            if layers.len() <= l {
                layers.push(Vec::new());
            }
            layers[l].push(i);
            ready[s.a] = l + 1;
            ready[s.a + 1] = l + 1;
        }
        layers
    }

    pub fn depth(&self) -> usize {
        self.layers().len()
    }

    /// Ideal product of all sites and phases.
    pub fn synthesize(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(self.dim);
        for s in &self.sites {
            m.apply_rows(s.a, s.a + 1, &s.matrix());
        }
        apply_phases(&mut m, &self.phases);
        m
    }

    pub fn to_json(&self) -> String {
        let doc = MeshJson {
            arch: self.arch,
            dim: self.dim,
            sites: self.sites.clone(),
            phase_re: self.phases.iter().map(|z| z.re).collect(),
            phase_im: self.phases.iter().map(|z| z.im).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("mesh serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MeshJson = serde_json::from_str(text).map_err(|source| Error::Json {
            path: "<mesh>".into(),
            source,
        })?;
        if doc.phase_re.len() != doc.dim || doc.phase_im.len() != doc.dim {
            return Err(Error::InvalidDimension(format!(
                "mesh phases do not match dim {}",
                doc.dim
            )));
        }
        if let Some(s) = doc.sites.iter().find(|s| s.a + 1 >= doc.dim) {
            return Err(Error::InvalidArgument(format!(
                "site on modes ({}, {}) outside dim {}",
                s.a,
                s.a + 1,
                doc.dim
            )));
        }
        Ok(Self {
            arch: doc.arch,
            dim: doc.dim,
            sites: doc.sites,
            phases: doc
                .phase_re
                .iter()
                .zip(&doc.phase_im)
                .map(|(&re, &im)| C64::new(re, im))
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct MeshJson {
    arch: Architecture,
    dim: usize,
    sites: Vec<MeshSite>,
    phase_re: Vec<f64>,
    phase_im: Vec<f64>,
}

fn apply_phases(m: &mut ComplexMatrix, phases: &[C64]) {
    for (i, &p) in phases.iter().enumerate() {
        m.scale_row(i, p);
    }
}

/// Site that zeroes `u` (left entry) against `v` (right entry) when its
/// adjoint multiplies columns `(a, a+1)` from the right.
fn right_null(u: C64, v: C64) -> (f64, f64) {
    if u.norm() == 0.0 {
        return (0.0, 0.0);
    }
    let alpha = u.norm().atan2(v.norm());
    let phi = half_angle(v.arg() - u.arg() + std::f64::consts::PI);
    (alpha, phi)
}

/// Site that zeroes the lower entry `v` against the upper `u` when it
/// multiplies rows `(a, a+1)` from the left.
fn left_null(u: C64, v: C64) -> (f64, f64) {
    if v.norm() == 0.0 {
        return (0.0, 0.0);
    }
    let alpha = v.norm().atan2(u.norm());
    let phi = half_angle(u.arg() - v.arg());
    (alpha, phi)
}

fn phases_of(v: &ComplexMatrix) -> Vec<C64> {
    v.diagonal()
}

pub fn reck_decompose(target: &UnitaryMatrix) -> MeshProgram {
    let k = target.dim();
    let mut v = target.matrix().clone();
    let mut sites = Vec::with_capacity(k * (k - 1) / 2);
    for r in (1..k).rev() {
        for j in 0..r {
            let (alpha, phi) = right_null(v[(r, j)], v[(r, j + 1)]);
            let t = Mat2::beam_splitter(alpha, phi);
            v.apply_cols(j, j + 1, &t.adjoint());
            v[(r, j)] = C64::new(0.0, 0.0);
            sites.push(MeshSite { a: j, alpha, phi });
        }
    }
    MeshProgram {
        arch: Architecture::Reck,
        dim: k,
        sites,
        phases: phases_of(&v),
    }
}

/// Same elimination as Reck, executed as a strictly sequential series of
/// loop passes, one adjacent time-bin pair per pass.
pub fn mgdr_schedule(target: &UnitaryMatrix) -> MeshProgram {
    MeshProgram {
        arch: Architecture::Mgdr,
        ..reck_decompose(target)
    }
}

pub fn clements_decompose(target: &UnitaryMatrix) -> MeshProgram {
    let k = target.dim();
    let mut v = target.matrix().clone();
    let mut right: Vec<MeshSite> = Vec::new();
    let mut left: Vec<MeshSite> = Vec::new();
    for i in 1..k {
        if i % 2 == 1 {
            for j in 0..i {
                let (r, c) = (k - 1 - j, i - 1 - j);
                let (alpha, phi) = right_null(v[(r, c)], v[(r, c + 1)]);
                v.apply_cols(c, c + 1, &Mat2::beam_splitter(alpha, phi).adjoint());
                v[(r, c)] = C64::new(0.0, 0.0);
                right.push(MeshSite { a: c, alpha, phi });
            }
        } else {
            for j in 1..=i {
                let (r, c) = (k + j - i - 1, j - 1);
                let (alpha, phi) = left_null(v[(r - 1, c)], v[(r, c)]);
                v.apply_rows(r - 1, r, &Mat2::beam_splitter(alpha, phi));
                v[(r, c)] = C64::new(0.0, 0.0);
                left.push(MeshSite {
                    a: r - 1,
                    alpha,
                    phi,
                });
            }
        }
    }
    // U = L^{-1} D R: move each inverted left site through D.
    let mut d = phases_of(&v);
    let mut pushed: Vec<MeshSite> = Vec::with_capacity(left.len());
    for s in left.iter().rev() {
        let m = s.matrix().adjoint().mul(&Mat2::diag(d[s.a], d[s.a + 1]));
        let (d0, d1, alpha, phi) = factor_u2(&m);
        d[s.a] = d0;
        d[s.a + 1] = d1;
        pushed.push(MeshSite { a: s.a, alpha, phi });
    }
    // innermost first: pushed[0] came from the last left site and sits
    // rightmost among the pushed factors, next to R.
    let mut sites = right;
    sites.extend(pushed);
    MeshProgram {
        arch: Architecture::Clements,
        dim: k,
        sites,
        phases: d,
    }
}

pub fn decompose(arch: Architecture, target: &UnitaryMatrix) -> Result<MeshProgram> {
    match arch {
        Architecture::Reck => Ok(reck_decompose(target)),
        Architecture::Clements => Ok(clements_decompose(target)),
        Architecture::Mgdr => Ok(mgdr_schedule(target)),
        Architecture::Qwalk => Err(Error::InvalidArgument(
            "qwalk is compiled, not decomposed into a mesh".into(),
        )),
    }
}

/// Checks unitarity of a raw matrix first.
pub fn decompose_matrix(arch: Architecture, target: &ComplexMatrix) -> Result<MeshProgram> {
    let u =
        UnitaryMatrix::new(target.clone()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    decompose(arch, &u)
}

/// Product of sandwiched sites `diag(g_o) T diag(g_i)`, then ideal phases.
/// Spatial programs take one draw per site, loop programs a single draw.
pub fn synthesize_with_noise(
    program: &MeshProgram,
    draws: &[ImperfectionDraw],
) -> Result<ComplexMatrix> {
    let expected = match program.arch.regime() {
        Regime::Spatial => program.sites.len(),
        Regime::TimeMultiplexed => 1,
    };
    if draws.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "{} program needs {expected} draws, got {}",
            program.arch,
            draws.len()
        )));
    }
    let mut m = ComplexMatrix::identity(program.dim);
    for (i, s) in program.sites.iter().enumerate() {
        let d = if draws.len() == 1 {
            &draws[0]
        } else {
            &draws[i]
        };
        m.apply_rows(s.a, s.a + 1, &d.sandwich(&s.matrix()));
    }
    apply_phases(&mut m, &program.phases);
    Ok(m)
}
