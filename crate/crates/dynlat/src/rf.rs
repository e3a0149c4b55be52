//! Compiles steering schedules into AOD drive programs.
//!
//! A two-axis acousto-optic deflector steers the beam by an angle
//! proportional to the drive frequency offset, `φ = κ·(f − f_c)`, and a
//! relay lens of focal length `f₁` turns that angle into a focal-plane
//! displacement `x = f₁ tan φ`. Compilation is therefore the inverse map
//! `f = f_c + atan(x / f₁) / κ` applied per axis, per sample. Typical
//! deflectors sit near a 50 MHz center with ~25 MHz of usable bandwidth and
//! κ around 4e−9 rad/Hz (4 mrad/MHz); all three are explicit model inputs
//! here, never assumptions.
//!
//! Diffraction efficiency varies across the band (several percent is
//! normal), which would ripple the lattice depth as the pattern rotates.
//! [`calibrate_amplitudes`] flattens the modeled optical power by driving
//! each tick at `amp ∝ 1/√η(f)`, renormalizing the whole program if any
//! amplitude would clip at 1.
//!
//! Two arms must not interfere at the atoms; [`detuning_check`] enforces the
//! rule that the arms' operating centers differ by more than twice the
//! largest frequency modulation either program uses.

use crate::schedule::SteeringSample;
use serde::{Deserialize, Serialize};

/// Errors from RF compilation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RfError {
    /// A requested frequency leaves the deflector's usable band.
    #[error(
        "{axis} target needs {frequency:.3} Hz, outside the usable band [{lo:.3}, {hi:.3}] Hz"
    )]
    OutOfBand {
        axis: char,
        frequency: f64,
        lo: f64,
        hi: f64,
    },
    /// The efficiency table does not cover a frequency the program uses.
    #[error(
        "efficiency table covers [{lo:.3}, {hi:.3}] Hz but the program needs {frequency:.3} Hz"
    )]
    TableGap { frequency: f64, lo: f64, hi: f64 },
    /// Samples are not on the compiler's update-rate grid.
    #[error("sample {index} at t = {got:.9e} s is not on the update grid (expected {expected:.9e} s)")]
    RateMismatch {
        index: usize,
        expected: f64,
        got: f64,
    },
    #[error("efficiency table invalid: {reason}")]
    BadTable { reason: &'static str },
    #[error("{name} must be {requirement} (got {value:.6e})")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    /// A program CSV line failed to parse.
    #[error("program CSV line {line}: {message}")]
    Csv { line: usize, message: String },
}

impl RfError {
    /// Stable machine-readable code for CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            RfError::OutOfBand { .. } => "BANDWIDTH",
            RfError::TableGap { .. } => "COVERAGE",
            RfError::RateMismatch { .. } => "RATE",
            RfError::BadTable { .. } => "TABLE",
            RfError::OutOfRange { .. } => "RANGE",
            RfError::Csv { .. } => "CSV",
        }
    }
}

/// A two-axis acousto-optic deflector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AodModel {
    /// Operating center frequency `f_c`, Hz. The undeflected output
    /// corresponds to driving at exactly `f_c`.
    pub center_frequency: f64,
    /// Usable bandwidth around the center, Hz.
    pub bandwidth: f64,
    /// Deflection coefficient κ in rad/Hz: `φ = κ·(f − f_c)`.
    pub deflection_coefficient: f64,
    /// Sampled diffraction efficiency `(frequency Hz, η ∈ (0, 1])`,
    /// strictly increasing in frequency. Linearly interpolated.
    pub efficiency_table: Vec<(f64, f64)>,
}

impl AodModel {
    /// A deflector with a flat (unit-efficiency) response across its band.
    pub fn new(center_frequency: f64, bandwidth: f64, kappa: f64) -> Result<Self, RfError> {
        for (name, value) in [
            ("center_frequency", center_frequency),
            ("bandwidth", bandwidth),
            ("deflection_coefficient", kappa),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(RfError::OutOfRange {
                    name: match name {
                        "center_frequency" => "center_frequency",
                        "bandwidth" => "bandwidth",
                        _ => "deflection_coefficient",
                    },
                    requirement: "finite and > 0",
                    value,
                });
            }
        }
        let lo = center_frequency - bandwidth / 2.0;
        let hi = center_frequency + bandwidth / 2.0;
        Ok(AodModel {
            center_frequency,
            bandwidth,
            deflection_coefficient: kappa,
            efficiency_table: vec![(lo, 1.0), (hi, 1.0)],
        })
    }

    /// Replaces the efficiency table. Entries must be strictly increasing in
    /// frequency with η in (0, 1].
    pub fn with_efficiency_table(mut self, table: Vec<(f64, f64)>) -> Result<Self, RfError> {
        if table.len() < 2 {
            return Err(RfError::BadTable {
                reason: "need at least two sample points",
            });
        }
        for pair in table.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(RfError::BadTable {
                    reason: "frequencies must be strictly increasing",
                });
            }
        }
        for &(f, eta) in &table {
            if !f.is_finite() || !(eta > 0.0 && eta <= 1.0) {
                return Err(RfError::BadTable {
                    reason: "efficiencies must be finite and in (0, 1]",
                });
            }
        }
        self.efficiency_table = table;
        Ok(self)
    }

    /// Usable band `[f_c − B/2, f_c + B/2]`.
    pub fn band(&self) -> (f64, f64) {
        (
            self.center_frequency - self.bandwidth / 2.0,
            self.center_frequency + self.bandwidth / 2.0,
        )
    }

    /// Linearly interpolated diffraction efficiency at `frequency`.
    /// Frequencies outside the table are a coverage error, not an
    /// extrapolation.
    pub fn efficiency_at(&self, frequency: f64) -> Result<f64, RfError> {
        let table = &self.efficiency_table;
        let lo = table[0].0;
        let hi = table[table.len() - 1].0;
        if frequency < lo || frequency > hi {
            return Err(RfError::TableGap {
                frequency,
                lo,
                hi,
            });
        }
        let idx = table.partition_point(|&(f, _)| f <= frequency);
        if idx == 0 {
            return Ok(table[0].1);
        }
        if idx >= table.len() {
            return Ok(table[table.len() - 1].1);
        }
        let (f0, e0) = table[idx - 1];
        let (f1, e1) = table[idx];
        let u = (frequency - f0) / (f1 - f0);
        Ok(e0 + (e1 - e0) * u)
    }
}

/// The relay optics between deflector and Fourier lens: a lens of focal
/// length `f₁` one focal length from the deflector pivot, so a deflection φ
/// becomes a displacement `x = f₁ tan φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayModel {
    /// Relay focal length, metres.
    pub f1: f64,
}

impl RelayModel {
    pub fn new(f1: f64) -> Result<Self, RfError> {
        if !(f1.is_finite() && f1 > 0.0) {
            return Err(RfError::OutOfRange {
                name: "f1",
                requirement: "finite and > 0",
                value: f1,
            });
        }
        Ok(RelayModel { f1 })
    }
}

/// Which lattice arm a program drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AodId {
    A,
    B,
}

impl AodId {
    pub fn as_str(&self) -> &'static str {
        match self {
            AodId::A => "a",
            AodId::B => "b",
        }
    }
}

/// One update tick of a two-axis drive program.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfTick {
    /// Time, seconds; always an exact multiple of the update period.
    pub t: f64,
    /// X-axis drive frequency, Hz.
    pub freq_x: f64,
    /// Y-axis drive frequency, Hz.
    pub freq_y: f64,
    /// X-axis drive amplitude, normalized to [0, 1].
    pub amp_x: f64,
    /// Y-axis drive amplitude, normalized to [0, 1].
    pub amp_y: f64,
}

/// A compiled drive program for one deflector.
#[derive(Debug, Clone, PartialEq)]
pub struct RfProgram {
    pub aod_id: AodId,
    /// Update rate in Hz; ticks sit at `k / update_rate`.
    pub update_rate: f64,
    pub ticks: Vec<RfTick>,
}

/// Drive frequencies that place the beam at `target` in the focal plane:
/// `f_i = f_c + atan(target_i / f₁) / κ` per axis.
pub fn position_to_frequencies(
    relay: &RelayModel,
    aod: &AodModel,
    target: [f64; 2],
) -> Result<(f64, f64), RfError> {
    let (lo, hi) = aod.band();
    let freq_for = |axis: char, value: f64| -> Result<f64, RfError> {
        let f = aod.center_frequency + (value / relay.f1).atan() / aod.deflection_coefficient;
        if f < lo || f > hi {
            return Err(RfError::OutOfBand {
                axis,
                frequency: f,
                lo,
                hi,
            });
        }
        Ok(f)
    };
    Ok((freq_for('x', target[0])?, freq_for('y', target[1])?))
}

/// Forward model of the deflector + relay: the focal-plane position reached
/// by driving at `(freq_x, freq_y)`.
pub fn frequency_to_position(relay: &RelayModel, aod: &AodModel, freqs: (f64, f64)) -> [f64; 2] {
    let pos = |f: f64| relay.f1 * (aod.deflection_coefficient * (f - aod.center_frequency)).tan();
    [pos(freqs.0), pos(freqs.1)]
}

/// Compiles a steering schedule into a drive program, one tick per sample.
/// Samples must already sit on the update grid (`t = k / update_rate`);
/// resampling is a schedule concern, not a compiler one. Amplitudes start
/// at the reference value 1.0 — run [`calibrate_amplitudes`] to flatten the
/// optical power.
pub fn compile_program(
    samples: &[SteeringSample],
    aod: &AodModel,
    relay: &RelayModel,
    update_rate: f64,
    aod_id: AodId,
) -> Result<RfProgram, RfError> {
    if !(update_rate.is_finite() && update_rate > 0.0) {
        return Err(RfError::OutOfRange {
            name: "update_rate",
            requirement: "finite and > 0",
            value: update_rate,
        });
    }
    let mut ticks = Vec::with_capacity(samples.len());
    for (index, s) in samples.iter().enumerate() {
        let expected = index as f64 / update_rate;
        if (s.t * update_rate - index as f64).abs() > 1e-6 {
            return Err(RfError::RateMismatch {
                index,
                expected,
                got: s.t,
            });
        }
        let (freq_x, freq_y) = position_to_frequencies(relay, aod, [s.x1, s.y1])?;
        ticks.push(RfTick {
            t: expected,
            freq_x,
            freq_y,
            amp_x: 1.0,
            amp_y: 1.0,
        });
    }
    Ok(RfProgram {
        aod_id,
        update_rate,
        ticks,
    })
}

/// What [`calibrate_amplitudes`] did to the program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationReport {
    /// Largest `1/√η` amplitude before renormalization.
    pub max_raw_amplitude: f64,
    /// True if the program had to be scaled down to keep amplitudes ≤ 1.
    pub renormalized: bool,
    /// Factor applied to every amplitude (1.0 when no renormalization).
    pub scale: f64,
}

/// Flattens the modeled optical power across the program by driving each
/// tick at `amp = 1/√η(f)`. If any amplitude would exceed 1, the whole
/// program is scaled down so the peak sits exactly at 1 — flatness is
/// preserved in preference to absolute power, and the report says so.
pub fn calibrate_amplitudes(
    program: &RfProgram,
    aod: &AodModel,
) -> Result<(RfProgram, CalibrationReport), RfError> {
    let mut calibrated = program.clone();
    let mut max_raw: f64 = 0.0;
    for tick in &mut calibrated.ticks {
        let ax = 1.0 / aod.efficiency_at(tick.freq_x)?.sqrt();
        let ay = 1.0 / aod.efficiency_at(tick.freq_y)?.sqrt();
        tick.amp_x = ax;
        tick.amp_y = ay;
        max_raw = max_raw.max(ax).max(ay);
    }
    let renormalized = max_raw > 1.0;
    let scale = if renormalized { 1.0 / max_raw } else { 1.0 };
    if renormalized {
        for tick in &mut calibrated.ticks {
            tick.amp_x *= scale;
            tick.amp_y *= scale;
        }
    }
    Ok((
        calibrated,
        CalibrationReport {
            max_raw_amplitude: max_raw,
            renormalized,
            scale,
        },
    ))
}

/// Largest drive-frequency excursion from the deflector center across both
/// axes of a program (zero for an empty program).
pub fn modulation_amplitude(program: &RfProgram, aod: &AodModel) -> f64 {
    program
        .ticks
        .iter()
        .flat_map(|t| [t.freq_x, t.freq_y])
        .map(|f| (f - aod.center_frequency).abs())
        .fold(0.0, f64::max)
}

/// Result of the two-arm detuning rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningCheck {
    /// `|f_cA − f_cB|`, Hz.
    pub separation: f64,
    /// `2 · max(modulation_a, modulation_b)`, Hz.
    pub required: f64,
    /// `separation − required`; positive margins pass.
    pub margin: f64,
    pub ok: bool,
}

/// Checks that two arms' operating centers are separated by strictly more
/// than twice the largest frequency modulation either program applies, so
/// the inter-arm beat never falls inside the modulation band.
pub fn detuning_check(
    aod_a: &AodModel,
    aod_b: &AodModel,
    modulation_a: f64,
    modulation_b: f64,
) -> DetuningCheck {
    let separation = (aod_a.center_frequency - aod_b.center_frequency).abs();
    let required = 2.0 * modulation_a.max(modulation_b);
    DetuningCheck {
        separation,
        required,
        margin: separation - required,
        ok: separation > required,
    }
}

/// Serializes a program as CSV: header `t_s,freq_x_hz,freq_y_hz,amp_x,amp_y`,
/// times at 9 decimals, frequencies at 3 decimals (mHz), amplitudes at 9
/// decimals, LF line endings.
pub fn emit_program(program: &RfProgram) -> String {
    let mut out = String::with_capacity(64 * (program.ticks.len() + 1));
    out.push_str("t_s,freq_x_hz,freq_y_hz,amp_x,amp_y\n");
    for tick in &program.ticks {
        out.push_str(&format!(
            "{:.9},{:.3},{:.3},{:.9},{:.9}\n",
            tick.t, tick.freq_x, tick.freq_y, tick.amp_x, tick.amp_y
        ));
    }
    out
}

/// Parses the CSV produced by [`emit_program`]. Tick times are validated
/// against the update grid and reconstructed exactly as `k / update_rate`,
/// so a parse→emit cycle is stable at the wire precision.
pub fn parse_program(text: &str, aod_id: AodId, update_rate: f64) -> Result<RfProgram, RfError> {
    if !(update_rate.is_finite() && update_rate > 0.0) {
        return Err(RfError::OutOfRange {
            name: "update_rate",
            requirement: "finite and > 0",
            value: update_rate,
        });
    }
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "t_s,freq_x_hz,freq_y_hz,amp_x,amp_y" => {}
        other => {
            return Err(RfError::Csv {
                line: 1,
                message: format!(
                    "expected header 't_s,freq_x_hz,freq_y_hz,amp_x,amp_y', got {:?}",
                    other.map(|(_, l)| l).unwrap_or("")
                ),
            })
        }
    }
    let mut ticks = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(RfError::Csv {
                line: idx + 1,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse = |name: &str, s: &str| -> Result<f64, RfError> {
            s.trim().parse::<f64>().map_err(|e| RfError::Csv {
                line: idx + 1,
                message: format!("bad {name}: {e}"),
            })
        };
        let t = parse("t_s", fields[0])?;
        let k = ticks.len();
        let expected = k as f64 / update_rate;
        if (t - expected).abs() > 0.5 / update_rate {
            return Err(RfError::Csv {
                line: idx + 1,
                message: format!("tick time {t} is off the update grid (expected {expected})"),
            });
        }
        let amp_x = parse("amp_x", fields[3])?;
        let amp_y = parse("amp_y", fields[4])?;
        for (name, amp) in [("amp_x", amp_x), ("amp_y", amp_y)] {
            if !((-1e-9..=1.0 + 1e-9).contains(&amp)) {
                return Err(RfError::Csv {
                    line: idx + 1,
                    message: format!("{name} = {amp} outside [0, 1]"),
                });
            }
        }
        ticks.push(RfTick {
            t: expected,
            freq_x: parse("freq_x_hz", fields[1])?,
            freq_y: parse("freq_y_hz", fields[2])?,
            amp_x,
            amp_y,
        });
    }
    Ok(RfProgram {
        aod_id,
        update_rate,
        ticks,
    })
}
