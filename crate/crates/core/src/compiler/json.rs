use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::schedule::{BeamSplitterSlot, CoinSchedule, ScheduleStep, SlotKind};
use super::{mode_set, CompileResult};
use crate::error::{Error, Result};
use crate::linalg::{PermutationMatrix, C64};

#[derive(Deserialize)]
struct SlotJson {
    m: i64,
    kind: String,
    alpha: Option<f64>,
    phi: Option<f64>,
}

#[derive(Deserialize)]
struct StepJson {
    n: u32,
    slots: Vec<SlotJson>,
}

#[derive(Deserialize)]
struct ResultJson {
    dim: usize,
    steps: Vec<StepJson>,
    diag_re: Vec<f64>,
    diag_im: Vec<f64>,
    input_relabel: Vec<usize>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn list(xs: impl Iterator<Item = String>) -> String {
    format!("[{}]", xs.collect::<Vec<_>>().join(", "))
}

pub fn schedule_to_json(result: &CompileResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{{");
    let _ = writeln!(s, "  \"dim\": {},", result.dim());
    let _ = writeln!(s, "  \"steps\": [");
    let steps = result.schedule.steps();
    for (i, step) in steps.iter().enumerate() {
        let _ = writeln!(s, "    {{\"n\": {}, \"slots\": [", step.n);
        for (j, slot) in step.slots.iter().enumerate() {
            let body = match slot.kind {
                SlotKind::BoundaryX => "\"kind\": \"boundaryX\"".to_string(),
                SlotKind::Identity => "\"kind\": \"identity\"".to_string(),
                SlotKind::Programmed { alpha, phi } => {
                    format!(
                        "\"kind\": \"programmed\", \"alpha\": {}, \"phi\": {}",
                        num(alpha),
                        num(phi)
                    )
                }
            };
            let sep = if j + 1 < step.slots.len() { "," } else { "" };
            let _ = writeln!(s, "      {{\"m\": {}, {body}}}{sep}", slot.m);
        }
        let sep = if i + 1 < steps.len() { "," } else { "" };
        let _ = writeln!(s, "    ]}}{sep}");
    }
    let _ = writeln!(s, "  ],");
    let _ = writeln!(
        s,
        "  \"diag_re\": {},",
        list(result.diag.iter().map(|d| num(d.re)))
    );
    let _ = writeln!(
        s,
        "  \"diag_im\": {},",
        list(result.diag.iter().map(|d| num(d.im)))
    );
    let _ = writeln!(
        s,
        "  \"input_relabel\": {}",
        list(result.input_relabel.image().iter().map(|j| j.to_string()))
    );
    s.push_str("}\n");
    s
}

pub fn schedule_from_json(text: &str) -> Result<CompileResult> {
    let raw: ResultJson = serde_json::from_str(text).map_err(|source| Error::Json {
        path: "<schedule>".into(),
        source,
    })?;
    let k = raw.dim;
    if raw.diag_re.len() != k || raw.diag_im.len() != k {
        return Err(Error::InvalidDimension(format!(
            "diag has {}/{} entries for dim {k}",
            raw.diag_re.len(),
            raw.diag_im.len()
        )));
    }
    let steps = raw
        .steps
        .into_iter()
        .map(|st| {
            let slots = st
                .slots
                .into_iter()
                .map(|sl| {
                    let kind = match (sl.kind.as_str(), sl.alpha, sl.phi) {
                        ("boundaryX", _, _) => SlotKind::BoundaryX,
                        ("identity", _, _) => SlotKind::Identity,
                        ("programmed", Some(alpha), Some(phi)) => {
                            SlotKind::Programmed { alpha, phi }
                        }
                        (other, _, _) => {
                            return Err(Error::InvalidArgument(format!(
                                "slot m={} at step {}: bad kind {other:?} or missing angles",
                                sl.m, st.n
                            )))
                        }
                    };
                    Ok(BeamSplitterSlot {
                        step: st.n,
                        m: sl.m,
                        kind,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ScheduleStep { n: st.n, slots })
        })
        .collect::<Result<Vec<_>>>()?;
    let schedule = CoinSchedule::new(k, steps)?;
    let input_relabel = PermutationMatrix::new(raw.input_relabel)?;
    if input_relabel.len() != k {
        return Err(Error::InvalidDimension(format!(
            "input_relabel has {} entries for dim {k}",
            input_relabel.len()
        )));
    }
    let diag = raw
        .diag_re
        .iter()
        .zip(&raw.diag_im)
        .map(|(&re, &im)| C64::new(re, im))
        .collect();
    Ok(CompileResult {
        steps_used: schedule.num_steps(),
        schedule,
        diag,
        input_relabel,
        mode_set: mode_set(k),
    })
}

pub fn write_schedule(path: &Path, result: &CompileResult) -> Result<()> {
    std::fs::write(path, schedule_to_json(result)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_schedule(path: &Path) -> Result<CompileResult> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    schedule_from_json(&text).map_err(|e| match e {
        Error::Json { source, .. } => Error::Json {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}
