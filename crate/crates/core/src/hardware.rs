//! Electro-optic settings and time-bin layout for a loop implementation.
//!
//! Coin bit 0 travels as V polarization and bit 1 as H, the arm with the
//! longer delay. Positions are time bins two spacings apart.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::compiler::CompileResult;
use crate::error::{Error, Result};
use crate::linalg::{half_angle, wrap_pi, Mat2, C64, I, ONE};

/// Coins farther than this from the family are rejected.
pub const FAMILY_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-12;

/// EOM action in the circular basis.
pub fn eom_rotation_matrix(alpha: f64) -> Mat2 {
    let (s, c) = alpha.sin_cos();
    Mat2::new(C64::new(c, 0.0), I * s, I * s, C64::new(c, 0.0))
}

/// Jones matrix of a quarter-wave plate with fast axis at `beta` radians.
pub fn quarter_wave_plate(beta: f64) -> Mat2 {
    let (s, c) = beta.sin_cos();
    let off = (ONE - I) * s * c;
    Mat2::new(ONE * c * c + I * s * s, off, off, ONE * s * s + I * c * c)
        .scale(C64::from_polar(1.0, -FRAC_PI_4))
}

/// Jones matrix of a half-wave plate with fast axis at `beta` radians.
pub fn half_wave_plate(beta: f64) -> Mat2 {
    let (s, c) = (2.0 * beta).sin_cos();
    Mat2::new(ONE * c, ONE * s, ONE * s, -ONE * c).scale(-I)
}

/// Real polarization rotation: `Q(0) E(alpha) Q(90)`.
pub fn equator_rotation(alpha: f64) -> Mat2 {
    quarter_wave_plate(0.0)
        .mul(&eom_rotation_matrix(alpha))
        .mul(&quarter_wave_plate(FRAC_PI_2))
}

/// Relative phase: `H(22.5) E(phi) H(22.5) = -e^{i phi} diag(1, e^{-2 i phi})`.
pub fn phase_shifter(phi: f64) -> Mat2 {
    let h = half_wave_plate(FRAC_PI_8);
    h.mul(&eom_rotation_matrix(phi)).mul(&h)
}

/// Two-EOM stage: phase shifter then rotation, equal to
/// `-e^{i phi} Family(alpha, phi)`.
pub fn two_eom_coin(alpha: f64, phi: f64) -> Mat2 {
    equator_rotation(alpha).mul(&phase_shifter(-phi))
}

/// Hardware angles of a coin plus the unactuated global phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EomAngles {
    pub alpha: f64,
    pub phi: f64,
    pub gamma: f64,
}

impl EomAngles {
    pub fn reconstruct(&self) -> Mat2 {
        Mat2::beam_splitter(self.alpha, self.phi).scale(C64::from_polar(1.0, self.gamma))
    }
}

/// Fit `coin = e^{i gamma} Family(alpha, phi)` with `alpha` in `(-pi/2, pi/2]`.
pub fn coin_to_eom(coin: &Mat2) -> Result<EomAngles> {
    if !coin.is_finite() {
        return Err(Error::InvalidArgument("coin has non-finite entries".into()));
    }
    let [[c00, c01], [c10, c11]] = coin.0;
    // (c01, c11) = e^{i gamma} (sin alpha, cos alpha)
    let mut gamma = if c11.norm() >= c01.norm() {
        c11.arg()
    } else {
        c01.arg()
    };
    let unphase = C64::from_polar(1.0, -gamma);
    let mut alpha = (c01 * unphase).re.atan2((c11 * unphase).re);
    if alpha > FRAC_PI_2 {
        alpha -= PI;
        gamma += PI;
    } else if alpha <= -FRAC_PI_2 {
        alpha += PI;
        gamma += PI;
    }
    let gamma = wrap_pi(gamma);
    let (s, c) = alpha.sin_cos();
    let z = (c00 * c - c10 * s) * C64::from_polar(1.0, -gamma);
    let phi = if z.norm() > 0.0 {
        half_angle(-z.arg())
    } else {
        0.0
    };
    let fit = EomAngles { alpha, phi, gamma };
    let residual = fit.reconstruct().max_abs_diff(coin);
    if residual > FAMILY_TOL {
        return Err(Error::OutOfFamily { residual });
    }
    Ok(fit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn of_coin_bit(p: u8) -> Self {
        if p == 0 {
            Polarization::V
        } else {
            Polarization::H
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EomSetting {
    pub step: u32,
    pub position: i64,
    pub bin_index: usize,
    pub alpha: f64,
    pub phi: f64,
}

impl EomSetting {
    pub fn matrix(&self) -> Mat2 {
        Mat2::beam_splitter(self.alpha, self.phi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinAssignment {
    pub mode: i64,
    pub bin: usize,
    pub polarization: Polarization,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeBinProgram {
    pub tau: f64,
    pub delta_tau: f64,
    pub capacity: usize,
    pub assignments: Vec<BinAssignment>,
    /// Ordered by step, then by bin arrival.
    pub firings: Vec<EomSetting>,
}

impl TimeBinProgram {
    pub fn occupied_bins(&self) -> usize {
        let mut bins: Vec<usize> = self.assignments.iter().map(|a| a.bin).collect();
        bins.dedup();
        bins.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serializes")
    }
}

/// `floor(tau / delta_tau) - 1` position modes fit in one loop round trip.
pub fn capacity(tau: f64, delta_tau: f64) -> Result<usize> {
    if !(tau.is_finite() && delta_tau.is_finite() && tau > 0.0 && delta_tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "round trip {tau} and bin spacing {delta_tau} must be positive"
        )));
    }
    Ok(((tau / delta_tau).floor() as usize).saturating_sub(1))
}

pub fn schedule_to_timebins(
    result: &CompileResult,
    tau: f64,
    delta_tau: f64,
) -> Result<TimeBinProgram> {
    let cap = capacity(tau, delta_tau)?;
    let k = result.dim();
    let (modes, first) = if k == 1 {
        (vec![0], 0)
    } else {
        (result.mode_set.clone(), -2)
    };
    let positions: Vec<i64> = {
        let mut xs: Vec<i64> = modes.iter().map(|&z| z - z.rem_euclid(2)).collect();
        xs.dedup();
        xs
    };
    if positions.len() > cap {
        return Err(Error::Capacity {
            capacity: cap,
            needed: positions.len(),
            required_ratio: positions.len() + 1,
        });
    }
    let bin_of = |x: i64| (x - first).div_euclid(2) as usize;
    let assignments = modes
        .iter()
        .map(|&z| {
            let p = z.rem_euclid(2);
            BinAssignment {
                mode: z,
                bin: bin_of(z - p),
                polarization: Polarization::of_coin_bit(p as u8),
            }
        })
        .collect();
    let mut firings = Vec::new();
    for step in result.schedule.steps() {
        let mut row = Vec::new();
        for slot in &step.slots {
            let coin = slot.coin();
            if coin.max_abs_diff(&Mat2::IDENTITY) <= IDENTITY_TOL {
                continue;
            }
            let fit = coin_to_eom(&coin)?;
            row.push(EomSetting {
                step: step.n,
                position: slot.m,
                bin_index: bin_of(slot.m),
                alpha: fit.alpha,
                phi: fit.phi,
            });
        }
        row.sort_by_key(|f| f.bin_index);
        firings.extend(row);
    }
    Ok(TimeBinProgram {
        tau,
        delta_tau,
        capacity: cap,
        assignments,
        firings,
    })
}

/// Linear angle-to-voltage map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    pub slope: f64,
    pub offset: f64,
}

impl Calibration {
    pub fn voltage(&self, angle: f64) -> f64 {
        self.slope * angle + self.offset
    }

    /// Two numbers, separated by whitespace or a comma.
    pub fn parse(text: &str) -> Result<Self> {
        let nums: Vec<f64> = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("calibration value {t:?} is not a number"))
                })
            })
            .collect::<Result<_>>()?;
        match nums.as_slice() {
            [slope, offset] if slope.is_finite() && offset.is_finite() => Ok(Self {
                slope: *slope,
                offset: *offset,
            }),
            _ => Err(Error::InvalidArgument(format!(
                "calibration needs two finite numbers (slope, offset), got {}",
                nums.len()
            ))),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

pub fn write_eom_csv<W: Write>(
    out: W,
    program: &TimeBinProgram,
    calibration: Option<&Calibration>,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step", "position", "bin_index", "alpha_rad", "phi_rad"];
    if calibration.is_some() {
        header.extend(["alpha_volt", "phi_volt"]);
    }
    w.write_record(&header)?;
    for f in &program.firings {
        let mut rec = vec![
            f.step.to_string(),
            f.position.to_string(),
            f.bin_index.to_string(),
            format!("{:.16e}", f.alpha),
            format!("{:.16e}", f.phi),
        ];
        if let Some(cal) = calibration {
            rec.push(format!("{:.16e}", cal.voltage(f.alpha)));
            rec.push(format!("{:.16e}", cal.voltage(f.phi)));
        }
        w.write_record(&rec)?;
    }
    w.flush()
}

pub fn write_eom_csv_file(
    path: &Path,
    program: &TimeBinProgram,
    calibration: Option<&Calibration>,
) -> Result<()> {
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    write_eom_csv(std::io::BufWriter::new(file), program, calibration).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile, DEFAULT_TOLERANCE};
    use crate::linalg::haar_random_unitary;
    use crate::linalg::ZERO;
    use rand::{Rng, SeedableRng};

    #[test]
    fn eom_examples() {
        assert!(eom_rotation_matrix(0.0).max_abs_diff(&Mat2::IDENTITY) < 1e-16);
        assert!(eom_rotation_matrix(FRAC_PI_2).max_abs_diff(&Mat2::PAULI_X.scale(I)) < 1e-15);
        for a in [0.0, 0.3, 1.2, -2.0] {
            let r = equator_rotation(a);
            let (s, c) = f64::sin_cos(a);
            let expect = Mat2::new(ONE * c, ONE * s, -ONE * s, ONE * c);
            assert!(r.max_abs_diff(&expect) < 1e-15);
        }
    }

    #[test]
    fn wave_plate_phase_and_composite() {
        for phi in [0.0, 0.4, -1.1, 2.5] {
            let expect =
                Mat2::diag(ONE, C64::from_polar(1.0, -2.0 * phi)).scale(-C64::from_polar(1.0, phi));
            assert!(phase_shifter(phi).max_abs_diff(&expect) < 1e-15);
            let a = 0.7;
            let two = two_eom_coin(a, phi);
            let fam = Mat2::beam_splitter(a, phi).scale(-C64::from_polar(1.0, phi));
            assert!(two.max_abs_diff(&fam) < 1e-15);
        }
    }

    #[test]
    fn fit_examples() {
        let fit = coin_to_eom(&Mat2::IDENTITY).unwrap();
        assert_eq!((fit.alpha, fit.phi, fit.gamma), (0.0, 0.0, 0.0));
        let fit = coin_to_eom(&Mat2::beam_splitter(FRAC_PI_4, FRAC_PI_8)).unwrap();
        assert!(
            (fit.alpha - FRAC_PI_4).abs() < 1e-12
                && (fit.phi - FRAC_PI_8).abs() < 1e-12
                && fit.gamma.abs() < 1e-12
        );
        let c = Mat2::beam_splitter(FRAC_PI_4, 0.0).scale(C64::from_polar(1.0, 1.3));
        assert!(coin_to_eom(&c).unwrap().reconstruct().max_abs_diff(&c) <= 1e-10);
        let x = coin_to_eom(&Mat2::PAULI_X).unwrap();
        assert!((x.alpha - FRAC_PI_2).abs() < 1e-15 && (x.phi - FRAC_PI_2).abs() < 1e-15);
        let h = coin_to_eom(&Mat2::hadamard()).unwrap();
        assert!((h.alpha + FRAC_PI_4).abs() < 1e-15);
        let outside = Mat2::new(ONE, ZERO, ZERO, I);
        assert!(coin_to_eom(&outside).is_ok());
        let broken = Mat2::new(ONE, ONE, ZERO, ONE);
        assert!(matches!(
            coin_to_eom(&broken),
            Err(Error::OutOfFamily { .. })
        ));
    }

    #[test]
    fn forward_backward_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            let a = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
            let p = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
            let g = rng.random_range(-PI..PI);
            let coin = Mat2::beam_splitter(a, p).scale(C64::from_polar(1.0, g));
            let fit = coin_to_eom(&coin).unwrap();
            assert!((fit.alpha - a).abs() <= 1e-10);
            if a.abs() < FRAC_PI_2 - 1e-6 {
                assert!((fit.phi - p).abs() <= 1e-10, "{a} {p} -> {fit:?}");
            }
            assert!(fit.reconstruct().max_abs_diff(&coin) <= 1e-10);
        }
    }

    #[test]
    fn compiled_coins_are_in_family() {
        for k in 1..=12 {
            for seed in 0..3 {
                let res =
                    compile(&haar_random_unitary(k, seed).unwrap(), DEFAULT_TOLERANCE).unwrap();
                for s in res.schedule.slots() {
                    coin_to_eom(&s.coin()).unwrap();
                }
                schedule_to_timebins(&res, 100.0, 1.0).unwrap();
            }
        }
    }

    #[test]
    fn timebins_six_modes() {
        let u = haar_random_unitary(6, 2).unwrap();
        let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
        let prog = schedule_to_timebins(&res, 10.0, 1.0).unwrap();
        assert_eq!(prog.capacity, 9);
        assert_eq!(prog.occupied_bins(), 5);
        let mut seen: Vec<(usize, Polarization)> = prog
            .assignments
            .iter()
            .map(|a| (a.bin, a.polarization))
            .collect();
        seen.sort_by_key(|&(b, p)| (b, p == Polarization::H));
        seen.dedup();
        assert_eq!(seen.len(), prog.assignments.len());
        // every slot fires: programmed coins and the X on idle or boundary slots
        assert_eq!(prog.firings.len(), res.schedule.slots().count());
        for w in prog.firings.windows(2) {
            assert!((w[0].step, w[0].bin_index) <= (w[1].step, w[1].bin_index));
        }
        assert_eq!(
            schedule_to_timebins(&compile(&u, DEFAULT_TOLERANCE).unwrap(), 10.0, 1.0).unwrap(),
            prog
        );

        match schedule_to_timebins(&res, 2.0, 1.0) {
            Err(Error::Capacity {
                capacity: 1,
                needed: 5,
                required_ratio: 6,
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn timebins_single_mode() {
        let u =
            crate::linalg::UnitaryMatrix::new(crate::linalg::ComplexMatrix::from_diagonal(&[I]))
                .unwrap();
        let res = compile(&u, DEFAULT_TOLERANCE).unwrap();
        let prog = schedule_to_timebins(&res, 2.0, 1.0).unwrap();
        assert_eq!(prog.occupied_bins(), 1);
        assert!(prog.firings.is_empty());
        assert!(capacity(0.0, 1.0).is_err());
    }

    #[test]
    fn csv_output() {
        let res = compile(&haar_random_unitary(2, 5).unwrap(), DEFAULT_TOLERANCE).unwrap();
        let prog = schedule_to_timebins(&res, 10.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_eom_csv(&mut buf, &prog, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("step,position,bin_index,alpha_rad,phi_rad")
        );
        assert_eq!(lines.count(), prog.firings.len());

        let cal = Calibration::parse("2.0, 0.5\n").unwrap();
        let mut buf = Vec::new();
        write_eom_csv(&mut buf, &prog, Some(&cal)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,position,bin_index,alpha_rad,phi_rad,alpha_volt,phi_volt\n"));
        assert!(Calibration::parse("1.0").is_err());
        assert!(Calibration::parse("a b").is_err());
    }
}
