//! Steering schedules: where the beam pair should be, sample by sample.
//!
//! A schedule is a uniformly sampled trajectory of the primary beam's
//! front-focal-plane position `(x₁, y₁)`; the mirror beam is implied. Two
//! primitive moves cover the apparatus:
//!
//! * **rotation** — the pair circles the axis at constant separation, which
//!   spins the fringe pattern without changing its period;
//! * **accordion** — the separation grows or shrinks along a fixed azimuth,
//!   which rescales the fringe period without moving its phase center.
//!
//! Composing the two gives a lattice that rotates while breathing. The
//! module also computes the rotating-lattice figure of merit
//! `n_φ = 2 m Ω d² / h` (flux quanta per plaquette) and a validity check
//! that flags schedules too fast for the RF update rate or outside the lens
//! aperture.

use crate::optics::{min_period, LensModel, OpticsError, WaveSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Planck constant, J·s (exact SI value).
pub const PLANCK: f64 = 6.62607015e-34;

/// Errors from schedule construction or validation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Optics(#[from] OpticsError),
    /// A target period is below what the lens can resolve.
    #[error("target period {period:.6e} m is below the lens resolution limit {min:.6e} m")]
    PeriodBelowResolution { period: f64, min: f64 },
    /// A target period is too coarse for the beam envelope to hold several
    /// fringes.
    #[error("target period {period:.6e} m exceeds the envelope bound {max:.6e} m (waist/3)")]
    PeriodAboveEnvelope { period: f64, max: f64 },
    /// A composed trajectory left the lens aperture.
    #[error("sample {index} leaves the lens aperture (radius {radius:.6e} m > limit {limit:.6e} m)")]
    SampleOutOfAperture { index: usize, radius: f64, limit: f64 },
    #[error("{name} must be {requirement} (got {value:.6e})")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    /// A schedule CSV line failed to parse.
    #[error("schedule CSV line {line}: {message}")]
    Csv { line: usize, message: String },
}

impl ScheduleError {
    /// Stable machine-readable code for CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            ScheduleError::Optics(e) => e.code(),
            ScheduleError::PeriodBelowResolution { .. } => "RESOLUTION",
            ScheduleError::PeriodAboveEnvelope { .. } => "ENVELOPE",
            ScheduleError::SampleOutOfAperture { .. } => "APERTURE",
            ScheduleError::OutOfRange { .. } => "RANGE",
            ScheduleError::Csv { .. } => "CSV",
        }
    }
}

/// Constant-separation rotation at angular rate `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    /// Pattern rotation rate, rad/s.
    pub omega: f64,
    /// Beam-pair separation `D`, metres.
    pub separation: f64,
}

/// How the fringe period moves between its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccordionProfile {
    /// Period `d(t)` interpolates linearly.
    LinearInPeriod,
    /// Separation `D(t)` interpolates linearly (the natural ramp for the
    /// deflector, hyperbolic in `d`).
    LinearInSeparation,
    /// Period follows a smoothstep `3u² − 2u³`, giving zero ramp rate at
    /// both endpoints.
    SmoothstepInPeriod,
}

/// A period ramp between `period_start` and `period_end` over `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccordionSpec {
    /// Starting fringe period, metres.
    pub period_start: f64,
    /// Final fringe period, metres.
    pub period_end: f64,
    /// Ramp duration, seconds.
    pub duration: f64,
    pub profile: AccordionProfile,
}

/// One schedule sample: the primary beam's focal-plane position at time `t`.
/// The mirror beam sits at `(−x1, −y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringSample {
    /// Time, seconds.
    pub t: f64,
    /// Primary-beam x position, metres.
    pub x1: f64,
    /// Primary-beam y position, metres.
    pub y1: f64,
}

/// Atomic species used in the flux figure of merit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Mass in kilograms.
    pub mass: f64,
    /// Human-readable label, e.g. `"rb87"`.
    pub label: String,
}

impl AtomSpec {
    /// Rubidium-87, the workhorse species for rotating-lattice estimates.
    pub fn rb87() -> Self {
        AtomSpec {
            mass: 1.4432e-25,
            label: "rb87".to_string(),
        }
    }

    /// Looks up a species by label. Unknown labels are an error so callers
    /// can fall back to an explicit mass.
    pub fn by_label(label: &str) -> Option<Self> {
        match label {
            "rb87" => Some(Self::rb87()),
            _ => None,
        }
    }
}

fn require_rate(rate: f64) -> Result<f64, ScheduleError> {
    if rate.is_finite() && rate > 0.0 {
        Ok(rate)
    } else {
        Err(ScheduleError::OutOfRange {
            name: "sample rate",
            requirement: "finite and > 0",
            value: rate,
        })
    }
}

fn require_duration(duration: f64) -> Result<f64, ScheduleError> {
    if duration.is_finite() && duration >= 0.0 {
        Ok(duration)
    } else {
        Err(ScheduleError::OutOfRange {
            name: "duration",
            requirement: "finite and >= 0",
            value: duration,
        })
    }
}

/// Number of samples of a half-open uniform sampling of `[0, duration)`.
fn sample_count(rate: f64, duration: f64) -> usize {
    (duration * rate).round() as usize
}

/// Samples a rotation schedule at `rate` Hz over `[0, duration)`:
/// `x₁(t) = (D/2)·cos Ωt`, `y₁(t) = (D/2)·sin Ωt`. An empty duration yields
/// an empty schedule.
pub fn rotation_samples(
    spec: &RotationSpec,
    rate: f64,
    duration: f64,
) -> Result<Vec<SteeringSample>, ScheduleError> {
    require_rate(rate)?;
    require_duration(duration)?;
    if !(spec.separation.is_finite() && spec.separation >= 0.0) {
        return Err(ScheduleError::OutOfRange {
            name: "separation",
            requirement: "finite and >= 0",
            value: spec.separation,
        });
    }
    let half = spec.separation / 2.0;
    let n = sample_count(rate, duration);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / rate;
        let phi = spec.omega * t;
        out.push(SteeringSample {
            t,
            x1: half * phi.cos(),
            y1: half * phi.sin(),
        });
    }
    Ok(out)
}

/// Period at ramp fraction `u ∈ [0, 1]` for a profile.
fn period_at(spec: &AccordionSpec, wave: &WaveSpec, lens: &LensModel, u: f64) -> f64 {
    match spec.profile {
        AccordionProfile::LinearInPeriod => {
            spec.period_start + (spec.period_end - spec.period_start) * u
        }
        AccordionProfile::SmoothstepInPeriod => {
            let s = u * u * (3.0 - 2.0 * u);
            spec.period_start + (spec.period_end - spec.period_start) * s
        }
        AccordionProfile::LinearInSeparation => {
            let lf = wave.wavelength * lens.focal_length;
            let d_start = lf / spec.period_start;
            let d_end = lf / spec.period_end;
            lf / (d_start + (d_end - d_start) * u)
        }
    }
}

/// Fringe period commanded at time `t` of an accordion ramp. Times outside
/// `[0, duration]` clamp to the endpoint values, so renderers and compilers
/// can hold the final period after the ramp completes.
pub fn accordion_period_at(
    spec: &AccordionSpec,
    wave: &WaveSpec,
    lens: &LensModel,
    t: f64,
) -> f64 {
    let u = if spec.duration <= 0.0 {
        0.0
    } else {
        (t / spec.duration).clamp(0.0, 1.0)
    };
    period_at(spec, wave, lens, u)
}

fn check_period_bounds(
    period: f64,
    wave: &WaveSpec,
    lens: &LensModel,
    waist: f64,
) -> Result<(), ScheduleError> {
    let d_min = min_period(wave, lens.numerical_aperture)?;
    if period < d_min {
        return Err(ScheduleError::PeriodBelowResolution {
            period,
            min: d_min,
        });
    }
    let d_max = waist / 3.0;
    if period > d_max {
        return Err(ScheduleError::PeriodAboveEnvelope {
            period,
            max: d_max,
        });
    }
    Ok(())
}

/// Separation that produces fringe period `d`: `D = λF/d`.
pub fn separation_for_period(wave: &WaveSpec, lens: &LensModel, period: f64) -> Result<f64, ScheduleError> {
    if !(period.is_finite() && period > 0.0) {
        return Err(ScheduleError::OutOfRange {
            name: "period",
            requirement: "finite and > 0",
            value: period,
        });
    }
    Ok(wave.wavelength * lens.focal_length / period)
}

/// Samples an accordion ramp at `rate` Hz: the pair stays on the x azimuth
/// while its separation follows `D(t) = λF / d(t)`. Both endpoint periods
/// must be resolvable (`d ≥ λ/2NA`) and must keep several fringes under the
/// envelope (`d ≤ waist/3`); monotone profiles make the endpoints the
/// extremes, so these checks cover the whole ramp.
pub fn accordion_samples(
    spec: &AccordionSpec,
    wave: &WaveSpec,
    lens: &LensModel,
    waist: f64,
    rate: f64,
) -> Result<Vec<SteeringSample>, ScheduleError> {
    require_rate(rate)?;
    require_duration(spec.duration)?;
    if !(waist.is_finite() && waist > 0.0) {
        return Err(ScheduleError::OutOfRange {
            name: "waist",
            requirement: "finite and > 0",
            value: waist,
        });
    }
    check_period_bounds(spec.period_start, wave, lens, waist)?;
    check_period_bounds(spec.period_end, wave, lens, waist)?;
    let n = sample_count(rate, spec.duration);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / rate;
        let u = if spec.duration == 0.0 { 0.0 } else { t / spec.duration };
        let d = period_at(spec, wave, lens, u);
        let sep = wave.wavelength * lens.focal_length / d;
        out.push(SteeringSample {
            t,
            x1: sep / 2.0,
            y1: 0.0,
        });
    }
    Ok(out)
}

/// Samples a rotation and an accordion ramp running simultaneously:
/// `(x₁, y₁) = (D(t)/2)·(cos Ωt, sin Ωt)`. Every sample is checked against
/// the lens aperture.
pub fn compose(
    omega: f64,
    accordion: &AccordionSpec,
    wave: &WaveSpec,
    lens: &LensModel,
    waist: f64,
    rate: f64,
) -> Result<Vec<SteeringSample>, ScheduleError> {
    let radial = accordion_samples(accordion, wave, lens, waist, rate)?;
    let mut out = Vec::with_capacity(radial.len());
    for (index, s) in radial.iter().enumerate() {
        let phi = omega * s.t;
        let sample = SteeringSample {
            t: s.t,
            x1: s.x1 * phi.cos(),
            y1: s.x1 * phi.sin(),
        };
        let radius = sample.x1.hypot(sample.y1);
        let limit = lens.aperture_radius();
        if radius > limit {
            return Err(ScheduleError::SampleOutOfAperture {
                index,
                radius,
                limit,
            });
        }
        out.push(sample);
    }
    Ok(out)
}

/// Magnetic-flux-quanta-per-plaquette equivalent of a lattice rotating at
/// `omega` with period `d`: `n_φ = 2 m Ω d² / h`. In the frame co-rotating
/// with the lattice the Coriolis force mimics a magnetic field; `n_φ ≈ 1`
/// marks the deep quantum-Hall-like regime.
pub fn flux_quanta_per_cell(atom: &AtomSpec, omega: f64, period: f64) -> Result<f64, ScheduleError> {
    if !(atom.mass.is_finite() && atom.mass > 0.0) {
        return Err(ScheduleError::OutOfRange {
            name: "atom mass",
            requirement: "finite and > 0",
            value: atom.mass,
        });
    }
    if !(period.is_finite() && period > 0.0) {
        return Err(ScheduleError::OutOfRange {
            name: "period",
            requirement: "finite and > 0",
            value: period,
        });
    }
    if !omega.is_finite() {
        return Err(ScheduleError::OutOfRange {
            name: "omega",
            requirement: "finite",
            value: omega,
        });
    }
    Ok(2.0 * atom.mass * omega * period * period / PLANCK)
}

/// Result of checking a schedule against apparatus limits.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDiagnostics {
    /// Fastest rotation the update rate supports at the requested
    /// smoothness: `Ω_max = 2π · update_rate / smoothness`.
    pub omega_max: f64,
    /// Indices of samples outside the lens aperture.
    pub aperture_violations: Vec<usize>,
    /// Indices of samples whose azimuthal step from the previous sample
    /// exceeds one smoothness quantum `2π / smoothness`.
    pub rough_steps: Vec<usize>,
}

impl ScheduleDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.aperture_violations.is_empty() && self.rough_steps.is_empty()
    }
}

/// Checks a sampled schedule against the lens aperture and the smoothness
/// budget. `smoothness` is the minimum number of samples per revolution you
/// are willing to accept; together with the update rate it caps the usable
/// rotation rate at `Ω_max = 2π · update_rate / smoothness`.
pub fn validate_schedule(
    samples: &[SteeringSample],
    update_rate: f64,
    smoothness: f64,
    lens: &LensModel,
) -> Result<ScheduleDiagnostics, ScheduleError> {
    require_rate(update_rate)?;
    if !(smoothness.is_finite() && smoothness >= 1.0) {
        return Err(ScheduleError::OutOfRange {
            name: "smoothness",
            requirement: "finite and >= 1",
            value: smoothness,
        });
    }
    let omega_max = 2.0 * PI * update_rate / smoothness;
    let quantum = 2.0 * PI / smoothness;
    let mut aperture_violations = Vec::new();
    let mut rough_steps = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if lens.check_aperture([s.x1, s.y1]).is_err() {
            aperture_violations.push(i);
        }
        if i > 0 {
            let prev = &samples[i - 1];
            let r_prev = prev.x1.hypot(prev.y1);
            let r_here = s.x1.hypot(s.y1);
            if r_prev > 0.0 && r_here > 0.0 {
                let a_prev = prev.y1.atan2(prev.x1);
                let a_here = s.y1.atan2(s.x1);
                let mut step = (a_here - a_prev).abs();
                if step > PI {
                    step = 2.0 * PI - step;
                }
                // Schedules running exactly at the rate limit take steps of
                // exactly one quantum; a relative guard keeps round-off in
                // the angle arithmetic from flagging them.
                if step > quantum * (1.0 + 1e-9) {
                    rough_steps.push(i);
                }
            }
        }
    }
    Ok(ScheduleDiagnostics {
        omega_max,
        aperture_violations,
        rough_steps,
    })
}

/// Serializes a schedule as CSV (`t_s,x1_m,y1_m`, LF line endings) with
/// round-trip-exact float formatting.
pub fn samples_to_csv(samples: &[SteeringSample]) -> String {
    let mut out = String::with_capacity(32 * (samples.len() + 1));
    out.push_str("t_s,x1_m,y1_m\n");
    for s in samples {
        out.push_str(&format!("{},{},{}\n", s.t, s.x1, s.y1));
    }
    out
}

/// Parses the CSV produced by [`samples_to_csv`].
pub fn samples_from_csv(text: &str) -> Result<Vec<SteeringSample>, ScheduleError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "t_s,x1_m,y1_m" => {}
        other => {
            return Err(ScheduleError::Csv {
                line: 1,
                message: format!(
                    "expected header 't_s,x1_m,y1_m', got {:?}",
                    other.map(|(_, l)| l).unwrap_or("")
                ),
            })
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |name: &str| -> Result<f64, ScheduleError> {
            fields
                .next()
                .ok_or_else(|| ScheduleError::Csv {
                    line: idx + 1,
                    message: format!("missing field {name}"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| ScheduleError::Csv {
                    line: idx + 1,
                    message: format!("bad {name}: {e}"),
                })
        };
        let t = next("t_s")?;
        let x1 = next("x1_m")?;
        let y1 = next("y1_m")?;
        out.push(SteeringSample { t, x1, y1 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::LensModel;

    fn wave() -> WaveSpec {
        WaveSpec::new(830e-9).unwrap()
    }

    fn lens() -> LensModel {
        LensModel::sine_condition(0.25, 0.03).unwrap()
    }

    #[test]
    fn commanded_period_clamps_outside_the_ramp() {
        let spec = AccordionSpec {
            period_start: 40e-6,
            period_end: 120e-6,
            duration: 0.01,
            profile: AccordionProfile::LinearInPeriod,
        };
        let (wave, lens) = (wave(), lens());
        assert_eq!(accordion_period_at(&spec, &wave, &lens, -1.0), 40e-6);
        assert_eq!(accordion_period_at(&spec, &wave, &lens, 0.0), 40e-6);
        assert!((accordion_period_at(&spec, &wave, &lens, 0.005) - 80e-6).abs() < 1e-18);
        assert!((accordion_period_at(&spec, &wave, &lens, 0.02) - 120e-6).abs() < 1e-18);
    }

    #[test]
    fn rotation_starts_on_the_x_axis_and_keeps_its_radius() {
        let spec = RotationSpec {
            omega: 2.0 * PI * 1000.0,
            separation: 2.0e-3,
        };
        let samples = rotation_samples(&spec, 100_000.0, 1.0e-3).unwrap();
        // One revolution at 1 kHz sampled at 100 kHz: 100 samples.
        assert_eq!(samples.len(), 100);
        assert_eq!(samples[0].t, 0.0);
        assert!((samples[0].x1 - 1.0e-3).abs() < 1e-18);
        assert_eq!(samples[0].y1, 0.0);
        for s in &samples {
            let r_sq = s.x1 * s.x1 + s.y1 * s.y1;
            assert!((r_sq - 1.0e-6).abs() / 1.0e-6 < 1e-12);
        }
    }

    #[test]
    fn rotation_revisits_itself_after_one_revolution() {
        let omega = 2.0 * PI * 1000.0;
        let spec = RotationSpec {
            omega,
            separation: 2.0e-3,
        };
        let rate = 100_000.0;
        let samples = rotation_samples(&spec, rate, 2.0e-3).unwrap();
        // Ω·(1/rate)·100 = 2π exactly in exact arithmetic: sample k and
        // k + 100 are one revolution apart.
        for k in 0..100 {
            let a = &samples[k];
            let b = &samples[k + 100];
            assert!((a.x1 - b.x1).abs() < 1e-9 * 1.0e-3);
            assert!((a.y1 - b.y1).abs() < 1e-9 * 1.0e-3);
        }
    }

    #[test]
    fn zero_duration_gives_an_empty_schedule() {
        let spec = RotationSpec {
            omega: 1.0,
            separation: 1e-3,
        };
        assert!(rotation_samples(&spec, 1e5, 0.0).unwrap().is_empty());
    }

    #[test]
    fn accordion_ramp_hits_the_documented_separations() {
        // d: 131 µm → 59 µm at λ = 830 nm, F = 25 cm maps to
        // D: 1.58397 mm → 3.51695 mm.
        let spec = AccordionSpec {
            period_start: 131e-6,
            period_end: 59e-6,
            duration: 0.1,
            profile: AccordionProfile::LinearInPeriod,
        };
        let samples = accordion_samples(&spec, &wave(), &lens(), 0.93e-3, 100_000.0).unwrap();
        assert_eq!(samples.len(), 10_000);
        let sep_first = 2.0 * samples[0].x1;
        assert!((sep_first - 1.5839694656488547e-3).abs() < 1e-12);
        // Monotone separation, all on the x azimuth.
        for pair in samples.windows(2) {
            assert!(pair[1].x1 >= pair[0].x1);
            assert_eq!(pair[1].y1, 0.0);
        }
        let sep_last = 2.0 * samples.last().unwrap().x1;
        let sep_target = separation_for_period(&wave(), &lens(), 59e-6).unwrap();
        // Half-open sampling stops one tick short of the endpoint.
        assert!(sep_last <= sep_target);
        assert!((sep_last - sep_target).abs() / sep_target < 1e-3);
    }

    #[test]
    fn all_profiles_are_monotone_in_period() {
        let w = wave();
        let l = lens();
        for profile in [
            AccordionProfile::LinearInPeriod,
            AccordionProfile::LinearInSeparation,
            AccordionProfile::SmoothstepInPeriod,
        ] {
            for (d0, d1) in [(131e-6, 59e-6), (59e-6, 131e-6)] {
                let spec = AccordionSpec {
                    period_start: d0,
                    period_end: d1,
                    duration: 0.01,
                    profile,
                };
                let samples = accordion_samples(&spec, &w, &l, 0.93e-3, 50_000.0).unwrap();
                let increasing = d1 < d0; // smaller period = larger separation
                for pair in samples.windows(2) {
                    if increasing {
                        assert!(pair[1].x1 >= pair[0].x1, "{profile:?} not monotone");
                    } else {
                        assert!(pair[1].x1 <= pair[0].x1, "{profile:?} not monotone");
                    }
                }
            }
        }
    }

    #[test]
    fn constant_accordion_is_constant() {
        let spec = AccordionSpec {
            period_start: 100e-6,
            period_end: 100e-6,
            duration: 1e-3,
            profile: AccordionProfile::LinearInSeparation,
        };
        let samples = accordion_samples(&spec, &wave(), &lens(), 0.93e-3, 100_000.0).unwrap();
        for s in &samples {
            assert_eq!(s.x1, samples[0].x1);
        }
    }

    #[test]
    fn period_bounds_are_enforced() {
        let spec = AccordionSpec {
            period_start: 10e-6, // below λ/2NA = 13.83 µm
            period_end: 59e-6,
            duration: 0.1,
            profile: AccordionProfile::LinearInPeriod,
        };
        assert!(matches!(
            accordion_samples(&spec, &wave(), &lens(), 0.93e-3, 1e5),
            Err(ScheduleError::PeriodBelowResolution { .. })
        ));
        let spec = AccordionSpec {
            period_start: 131e-6,
            period_end: 400e-6, // above waist/3 = 310 µm
            duration: 0.1,
            profile: AccordionProfile::LinearInPeriod,
        };
        assert!(matches!(
            accordion_samples(&spec, &wave(), &lens(), 0.93e-3, 1e5),
            Err(ScheduleError::PeriodAboveEnvelope { .. })
        ));
    }

    #[test]
    fn composed_schedule_spirals() {
        let acc = AccordionSpec {
            period_start: 131e-6,
            period_end: 59e-6,
            duration: 0.01,
            profile: AccordionProfile::SmoothstepInPeriod,
        };
        let omega = 2.0 * PI * 200.0;
        let samples = compose(omega, &acc, &wave(), &lens(), 0.93e-3, 100_000.0).unwrap();
        assert_eq!(samples.len(), 1000);
        // Radius grows with the ramp while the azimuth advances.
        let r0 = samples[0].x1.hypot(samples[0].y1);
        let r_end = samples.last().unwrap().x1.hypot(samples.last().unwrap().y1);
        assert!(r_end > r0 * 2.0);
        let mid = &samples[250]; // a quarter of 2 revolutions in
        assert!(mid.y1 != 0.0);
    }

    #[test]
    fn flux_matches_the_frozen_rubidium_value() {
        let n_phi = flux_quanta_per_cell(&AtomSpec::rb87(), 2.0 * PI * 1000.0, 1.0e-6).unwrap();
        assert!((n_phi - 2.737035023790558).abs() / 2.737 < 1e-12);
        assert!((n_phi - 2.74).abs() < 0.01);
    }

    #[test]
    fn flux_is_zero_at_rest_and_scales_exactly() {
        let atom = AtomSpec::rb87();
        assert_eq!(flux_quanta_per_cell(&atom, 0.0, 1e-6).unwrap(), 0.0);
        let base = flux_quanta_per_cell(&atom, 100.0, 1e-6).unwrap();
        // Doubling Ω doubles n_φ exactly (power-of-two scaling).
        assert_eq!(flux_quanta_per_cell(&atom, 200.0, 1e-6).unwrap(), 2.0 * base);
        // Doubling d quadruples n_φ exactly.
        assert_eq!(flux_quanta_per_cell(&atom, 100.0, 2e-6).unwrap(), 4.0 * base);
    }

    #[test]
    fn update_rate_and_smoothness_cap_the_rotation_rate() {
        let diag = validate_schedule(&[], 100_000.0, 100.0, &lens()).unwrap();
        let expected = 2.0 * PI * 1000.0;
        assert!((diag.omega_max - expected).abs() / expected < 1e-12);
        assert!(diag.is_valid());
    }

    #[test]
    fn static_schedule_validates_cleanly() {
        let samples = vec![
            SteeringSample {
                t: 0.0,
                x1: 1e-3,
                y1: 0.0,
            };
            64
        ];
        let diag = validate_schedule(&samples, 1e5, 100.0, &lens()).unwrap();
        assert!(diag.is_valid());
    }

    #[test]
    fn aperture_and_roughness_violations_are_flagged_by_index() {
        // Aperture limit for F = 25 cm, NA = 0.03 sine lens: 7.5 mm.
        let mut samples = vec![
            SteeringSample {
                t: 0.0,
                x1: 1e-3,
                y1: 0.0,
            },
            SteeringSample {
                t: 1e-5,
                x1: 8e-3,
                y1: 0.0,
            },
            // Azimuthal jump of π/2 in one tick ≫ 2π/100.
            SteeringSample {
                t: 2e-5,
                x1: 0.0,
                y1: 1e-3,
            },
        ];
        samples.push(samples[2]);
        let diag = validate_schedule(&samples, 1e5, 100.0, &lens()).unwrap();
        assert_eq!(diag.aperture_violations, vec![1]);
        assert_eq!(diag.rough_steps, vec![2]);
        assert!(!diag.is_valid());
    }

    #[test]
    fn rotation_at_the_rate_limit_is_smooth() {
        let spec = RotationSpec {
            omega: 2.0 * PI * 1000.0,
            separation: 2.0e-3,
        };
        let samples = rotation_samples(&spec, 100_000.0, 2.0e-3).unwrap();
        let diag = validate_schedule(&samples, 100_000.0, 100.0, &lens()).unwrap();
        assert!(diag.rough_steps.is_empty());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let spec = RotationSpec {
            omega: 2.0 * PI * 123.456,
            separation: 1.7e-3,
        };
        let samples = rotation_samples(&spec, 5e4, 1.3e-3).unwrap();
        let csv = samples_to_csv(&samples);
        assert!(csv.starts_with("t_s,x1_m,y1_m\n"));
        assert!(!csv.contains('\r'));
        let parsed = samples_from_csv(&csv).unwrap();
        assert_eq!(parsed, samples);
    }

    #[test]
    fn csv_with_wrong_header_is_rejected() {
        assert!(matches!(
            samples_from_csv("time,x,y\n0,0,0\n"),
            Err(ScheduleError::Csv { line: 1, .. })
        ));
    }
}
