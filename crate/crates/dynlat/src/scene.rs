//! JSON scene configuration and scene assembly.
//!
//! A scene bundles everything one experiment run needs — optics, envelope,
//! pixel grid, steering schedule, and RF hardware parameters — into a
//! single strict JSON document. Strict means strict: unknown fields are
//! rejected rather than ignored, so typos fail loudly instead of silently
//! reverting to defaults, and validation reports *every* problem it finds
//! in one pass, each tagged with its field path.
//!
//! An empty document `{}` is the reference scene: an 830 nm pair 2 mm
//! apart behind an F = 0.25 m aplanatic lens (fringe period λF/D =
//! 103.75 µm), a 0.93 mm envelope waist, a 512-pixel 2.3 mm frame, one
//! 100 Hz rotation sampled over a full turn, and dual-arm deflectors at
//! 45/55 MHz driven through an f₁ = 0.3 m relay.

use crate::interference::{
    combine_coherent, combine_incoherent, scalar_fringe_frame_at_time, vector_fringe_frame,
    BeamPair, GridSpec, IntensityFrame, InterferenceError,
};
use crate::optics::{
    BeamSpec, Handedness, JonesVector, LensKind, LensModel, OpticsError, WaveSpec,
};
use crate::rf::{AodId, AodModel, RelayModel, RfError};
use crate::schedule::{
    accordion_period_at, accordion_samples, compose, rotation_samples, separation_for_period,
    AccordionProfile, AccordionSpec, RotationSpec, ScheduleError, SteeringSample,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Errors from scene configuration and assembly.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    /// The document failed JSON or schema parsing (includes unknown fields).
    #[error("config is not a valid scene document: {0}")]
    Json(String),
    /// The document parsed but failed validation; every issue is listed.
    #[error("config rejected: {}", issues.join("; "))]
    Invalid { issues: Vec<String> },
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Interference(#[from] InterferenceError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Rf(#[from] RfError),
}

impl SceneError {
    /// Stable machine-readable code for CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            SceneError::Json(_) => "JSON",
            SceneError::Invalid { .. } => "CONFIG",
            SceneError::Optics(e) => e.code(),
            SceneError::Interference(e) => e.code(),
            SceneError::Schedule(e) => e.code(),
            SceneError::Rf(e) => e.code(),
        }
    }

    /// True for errors in the configuration document itself (as opposed to
    /// physics or runtime failures while using it).
    pub fn is_config_error(&self) -> bool {
        matches!(self, SceneError::Json(_) | SceneError::Invalid { .. })
    }
}

/// Pixel grid section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub extent_m: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 512,
            extent_m: 2.3e-3,
        }
    }
}

/// One or two interfering beam pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PatternConfig {
    #[default]
    Single,
    /// A second pair, rotated a quarter turn from the first.
    Dual,
}

/// How two arms are combined at the focal plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CombineConfig {
    /// Arms detuned far apart: intensities add.
    #[default]
    Incoherent,
    /// Mutually coherent arms: fields add, with `arm_detuning_hz` beating.
    Coherent,
}

/// Input polarization state; absent means scalar synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolarizationConfig {
    Linear(LinearPolarization),
    Circular(CircularPolarization),
    Elliptical(EllipticalPolarization),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct LinearPolarization {
    /// Polarization angle from the x axis, radians.
    pub angle_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircularPolarization {
    pub handedness: Handedness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticalPolarization {
    /// x component as `[re, im]`.
    pub jones_x: [f64; 2],
    /// y component as `[re, im]`.
    pub jones_y: [f64; 2],
}

impl PolarizationConfig {
    /// The configured Jones vector (normalized for elliptical input).
    pub fn jones(&self) -> Result<JonesVector, OpticsError> {
        match self {
            PolarizationConfig::Linear(p) => Ok(JonesVector::linear(p.angle_rad)),
            PolarizationConfig::Circular(p) => Ok(JonesVector::circular(p.handedness)),
            PolarizationConfig::Elliptical(p) => JonesVector::new(
                Complex64::new(p.jones_x[0], p.jones_x[1]),
                Complex64::new(p.jones_y[0], p.jones_y[1]),
            ),
        }
    }
}

/// A fixed pattern: constant separation at a constant azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticSchedule {
    pub separation_m: f64,
    #[serde(default)]
    pub angle_rad: f64,
}

/// A constant-separation rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSchedule {
    pub omega_rad_s: f64,
    pub separation_m: f64,
}

/// A period ramp at fixed azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccordionSchedule {
    pub period_start_m: f64,
    pub period_end_m: f64,
    pub duration_s: f64,
    #[serde(default = "default_profile")]
    pub profile: AccordionProfile,
}

/// Rotation and period ramp running simultaneously.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposedSchedule {
    pub omega_rad_s: f64,
    pub period_start_m: f64,
    pub period_end_m: f64,
    pub duration_s: f64,
    #[serde(default = "default_profile")]
    pub profile: AccordionProfile,
}

fn default_profile() -> AccordionProfile {
    AccordionProfile::LinearInPeriod
}

impl AccordionSchedule {
    pub fn spec(&self) -> AccordionSpec {
        AccordionSpec {
            period_start: self.period_start_m,
            period_end: self.period_end_m,
            duration: self.duration_s,
            profile: self.profile,
        }
    }
}

impl ComposedSchedule {
    pub fn accordion_spec(&self) -> AccordionSpec {
        AccordionSpec {
            period_start: self.period_start_m,
            period_end: self.period_end_m,
            duration: self.duration_s,
            profile: self.profile,
        }
    }
}

/// The steering schedule, tagged by `"type"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScheduleConfig {
    Static(StaticSchedule),
    Rotation(RotationSchedule),
    Accordion(AccordionSchedule),
    Composed(ComposedSchedule),
}

/// One deflector's operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AodConfig {
    pub center_frequency_hz: f64,
    pub bandwidth_hz: f64,
}

/// RF hardware section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RfConfig {
    pub aod_a: AodConfig,
    pub aod_b: AodConfig,
    /// Deflection coefficient κ, rad/Hz.
    pub deflection_rad_per_hz: f64,
    /// Relay focal length f₁, metres.
    pub relay_focal_length_m: f64,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig {
            aod_a: AodConfig {
                center_frequency_hz: 45e6,
                bandwidth_hz: 25e6,
            },
            aod_b: AodConfig {
                center_frequency_hz: 55e6,
                bandwidth_hz: 25e6,
            },
            deflection_rad_per_hz: 4e-9,
            relay_focal_length_m: 0.3,
        }
    }
}

/// The complete scene document. Every field has a default, so `{}` is the
/// reference scene; unknown fields anywhere in the document are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub wavelength_m: f64,
    pub focal_length_m: f64,
    pub lens: LensKind,
    pub numerical_aperture: f64,
    /// 1/e² intensity radius of the focal-plane envelope, metres.
    pub waist_m: f64,
    pub grid: GridConfig,
    pub pattern: PatternConfig,
    pub combine: CombineConfig,
    /// Frequency offset of arm B relative to arm A for coherent combining,
    /// Hz. Ignored for single-pair and incoherent scenes.
    pub arm_detuning_hz: f64,
    /// Input polarization; omit for scalar synthesis.
    pub polarization: Option<PolarizationConfig>,
    pub schedule: ScheduleConfig,
    /// Simulated span, seconds. Defaults to one rotation period for
    /// rotation schedules, the ramp duration for accordion and composed
    /// schedules, and 10 ms for static ones.
    pub duration_s: Option<f64>,
    /// Number of frames rendered by `simulate`, spread uniformly over
    /// `[0, duration)`.
    pub frames: usize,
    /// Schedule sample and RF tick rate, Hz.
    pub update_rate_hz: f64,
    /// Minimum accepted samples per revolution; with the update rate this
    /// caps the usable rotation rate at `Ω_max = 2π·rate/smoothness`.
    pub smoothness: f64,
    pub rf: RfConfig,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            wavelength_m: 830e-9,
            focal_length_m: 0.25,
            lens: LensKind::SineCondition,
            numerical_aperture: 0.7,
            waist_m: 0.93e-3,
            grid: GridConfig::default(),
            pattern: PatternConfig::Single,
            combine: CombineConfig::Incoherent,
            arm_detuning_hz: 0.0,
            polarization: None,
            schedule: ScheduleConfig::Rotation(RotationSchedule {
                omega_rad_s: 2.0 * PI * 100.0,
                separation_m: 2e-3,
            }),
            duration_s: None,
            frames: 8,
            update_rate_hz: 1e5,
            smoothness: 100.0,
            rf: RfConfig::default(),
        }
    }
}

fn push_positive(issues: &mut Vec<String>, path: &str, value: f64) {
    if !(value.is_finite() && value > 0.0) {
        issues.push(format!("{path} must be finite and > 0 (got {value})"));
    }
}

fn push_finite(issues: &mut Vec<String>, path: &str, value: f64) {
    if !value.is_finite() {
        issues.push(format!("{path} must be finite (got {value})"));
    }
}

impl SceneConfig {
    /// Parses and validates a JSON scene document.
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let config: SceneConfig =
            serde_json::from_str(text).map_err(|e| SceneError::Json(e.to_string()))?;
        let issues = config.validate();
        if issues.is_empty() {
            Ok(config)
        } else {
            Err(SceneError::Invalid { issues })
        }
    }

    /// Checks every field and returns all problems found (empty when the
    /// config is valid). Physics-level limits (aperture, resolution,
    /// bandwidth) are deliberately not checked here — they belong to the
    /// run, not the document.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        push_positive(&mut issues, "wavelength_m", self.wavelength_m);
        push_positive(&mut issues, "focal_length_m", self.focal_length_m);
        if !(self.numerical_aperture > 0.0 && self.numerical_aperture <= 1.0) {
            issues.push(format!(
                "numerical_aperture must be in (0, 1] (got {})",
                self.numerical_aperture
            ));
        }
        push_positive(&mut issues, "waist_m", self.waist_m);
        if self.grid.n < 2 || self.grid.n > 8192 {
            issues.push(format!("grid.n must be in [2, 8192] (got {})", self.grid.n));
        }
        push_positive(&mut issues, "grid.extent_m", self.grid.extent_m);
        if self.frames == 0 || self.frames > 100_000 {
            issues.push(format!(
                "frames must be in [1, 100000] (got {})",
                self.frames
            ));
        }
        push_positive(&mut issues, "update_rate_hz", self.update_rate_hz);
        if !(self.smoothness.is_finite() && self.smoothness >= 1.0) {
            issues.push(format!(
                "smoothness must be finite and >= 1 (got {})",
                self.smoothness
            ));
        }
        if let Some(d) = self.duration_s {
            if !(d.is_finite() && d > 0.0) {
                issues.push(format!("duration_s must be finite and > 0 (got {d})"));
            }
        }
        push_finite(&mut issues, "arm_detuning_hz", self.arm_detuning_hz);
        match &self.schedule {
            ScheduleConfig::Static(s) => {
                if !(s.separation_m.is_finite() && s.separation_m >= 0.0) {
                    issues.push(format!(
                        "schedule.separation_m must be finite and >= 0 (got {})",
                        s.separation_m
                    ));
                }
                push_finite(&mut issues, "schedule.angle_rad", s.angle_rad);
            }
            ScheduleConfig::Rotation(r) => {
                push_finite(&mut issues, "schedule.omega_rad_s", r.omega_rad_s);
                push_positive(&mut issues, "schedule.separation_m", r.separation_m);
            }
            ScheduleConfig::Accordion(a) => {
                push_positive(&mut issues, "schedule.period_start_m", a.period_start_m);
                push_positive(&mut issues, "schedule.period_end_m", a.period_end_m);
                push_positive(&mut issues, "schedule.duration_s", a.duration_s);
            }
            ScheduleConfig::Composed(c) => {
                push_finite(&mut issues, "schedule.omega_rad_s", c.omega_rad_s);
                push_positive(&mut issues, "schedule.period_start_m", c.period_start_m);
                push_positive(&mut issues, "schedule.period_end_m", c.period_end_m);
                push_positive(&mut issues, "schedule.duration_s", c.duration_s);
            }
        }
        if let Some(p) = &self.polarization {
            match p {
                PolarizationConfig::Linear(l) => {
                    push_finite(&mut issues, "polarization.angle_rad", l.angle_rad)
                }
                PolarizationConfig::Circular(_) => {}
                PolarizationConfig::Elliptical(e) => {
                    let norm_sq = e.jones_x[0] * e.jones_x[0]
                        + e.jones_x[1] * e.jones_x[1]
                        + e.jones_y[0] * e.jones_y[0]
                        + e.jones_y[1] * e.jones_y[1];
                    if (norm_sq - 1.0).abs() > 1e-9 {
                        issues.push(format!(
                            "polarization jones vector must have unit norm (|J|² = {norm_sq})"
                        ));
                    }
                }
            }
            if self.pattern == PatternConfig::Dual && self.combine == CombineConfig::Coherent {
                issues.push(
                    "polarization is not supported with coherent dual-arm combining; \
                     use combine = \"incoherent\" or drop the polarization section"
                        .to_string(),
                );
            }
        }
        for (path, aod) in [("rf.aod_a", &self.rf.aod_a), ("rf.aod_b", &self.rf.aod_b)] {
            push_positive(
                &mut issues,
                &format!("{path}.center_frequency_hz"),
                aod.center_frequency_hz,
            );
            push_positive(
                &mut issues,
                &format!("{path}.bandwidth_hz"),
                aod.bandwidth_hz,
            );
        }
        push_positive(
            &mut issues,
            "rf.deflection_rad_per_hz",
            self.rf.deflection_rad_per_hz,
        );
        push_positive(
            &mut issues,
            "rf.relay_focal_length_m",
            self.rf.relay_focal_length_m,
        );
        issues
    }

    /// Assembles the validated optics objects.
    pub fn build(&self) -> Result<Scene, SceneError> {
        let issues = self.validate();
        if !issues.is_empty() {
            return Err(SceneError::Invalid { issues });
        }
        let wave = WaveSpec::new(self.wavelength_m)?;
        let lens = LensModel::new(self.lens, self.focal_length_m, self.numerical_aperture)?;
        let grid = GridSpec::new(self.grid.n, self.grid.extent_m)?;
        Ok(Scene {
            config: self.clone(),
            wave,
            lens,
            grid,
        })
    }
}

/// A validated, ready-to-render scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub config: SceneConfig,
    pub wave: WaveSpec,
    pub lens: LensModel,
    pub grid: GridSpec,
}

impl Scene {
    /// The resolved simulation span: the explicit `duration_s` if given,
    /// otherwise one rotation period, the accordion ramp duration, or 10 ms
    /// for static scenes.
    pub fn duration(&self) -> f64 {
        if let Some(d) = self.config.duration_s {
            return d;
        }
        match &self.config.schedule {
            ScheduleConfig::Rotation(r) if r.omega_rad_s != 0.0 => {
                2.0 * PI / r.omega_rad_s.abs()
            }
            ScheduleConfig::Accordion(a) => a.duration_s,
            ScheduleConfig::Composed(c) => c.duration_s,
            _ => 0.01,
        }
    }

    /// Frame timestamps: `frames` points uniformly over `[0, duration)`,
    /// half-open so a full rotation doesn't render its first frame twice.
    pub fn frame_times(&self) -> Vec<f64> {
        let n = self.config.frames;
        let duration = self.duration();
        (0..n).map(|i| i as f64 * duration / n as f64).collect()
    }

    /// Primary-beam position commanded at time `t`, checked against the
    /// lens aperture. The mirror beam sits opposite; in dual scenes arm B
    /// is this position rotated a quarter turn.
    pub fn primary_position(&self, t: f64) -> Result<[f64; 2], SceneError> {
        let pos = match &self.config.schedule {
            ScheduleConfig::Static(s) => {
                let half = s.separation_m / 2.0;
                [half * s.angle_rad.cos(), half * s.angle_rad.sin()]
            }
            ScheduleConfig::Rotation(r) => {
                let half = r.separation_m / 2.0;
                let phi = r.omega_rad_s * t;
                [half * phi.cos(), half * phi.sin()]
            }
            ScheduleConfig::Accordion(a) => {
                let period = accordion_period_at(&a.spec(), &self.wave, &self.lens, t);
                let half = separation_for_period(&self.wave, &self.lens, period)? / 2.0;
                [half, 0.0]
            }
            ScheduleConfig::Composed(c) => {
                let period =
                    accordion_period_at(&c.accordion_spec(), &self.wave, &self.lens, t);
                let half = separation_for_period(&self.wave, &self.lens, period)? / 2.0;
                let phi = c.omega_rad_s * t;
                [half * phi.cos(), half * phi.sin()]
            }
        };
        self.lens.check_aperture(pos)?;
        Ok(pos)
    }

    fn pair_frame(&self, position: [f64; 2], t: f64) -> Result<IntensityFrame, SceneError> {
        let jones = match &self.config.polarization {
            Some(p) => p.jones()?,
            None => JonesVector::linear(0.0),
        };
        let pair = BeamPair::new(BeamSpec::new(
            position,
            1.0,
            self.config.waist_m,
            jones,
        )?);
        match &self.config.polarization {
            None => Ok(scalar_fringe_frame_at_time(
                &self.wave, &self.lens, &pair, &self.grid, true, t,
            )?),
            Some(_) => {
                let mut frame = vector_fringe_frame(&self.wave, &self.lens, &pair, &self.grid)?;
                frame.time = t;
                Ok(frame)
            }
        }
    }

    /// Renders the scene's intensity frame at time `t`.
    pub fn render_frame(&self, t: f64) -> Result<IntensityFrame, SceneError> {
        let pos_a = self.primary_position(t)?;
        match self.config.pattern {
            PatternConfig::Single => self.pair_frame(pos_a, t),
            PatternConfig::Dual => {
                let pos_b = [-pos_a[1], pos_a[0]];
                self.lens.check_aperture(pos_b)?;
                match self.config.combine {
                    CombineConfig::Incoherent => {
                        let a = self.pair_frame(pos_a, t)?;
                        let b = self.pair_frame(pos_b, t)?;
                        Ok(combine_incoherent(&a, &b)?)
                    }
                    CombineConfig::Coherent => {
                        let jones = JonesVector::linear(0.0);
                        let pair_a = BeamPair::new(BeamSpec::new(
                            pos_a,
                            1.0,
                            self.config.waist_m,
                            jones,
                        )?);
                        let pair_b = BeamPair::new(BeamSpec::new(
                            pos_b,
                            1.0,
                            self.config.waist_m,
                            jones,
                        )?);
                        Ok(combine_coherent(
                            &self.wave,
                            &self.lens,
                            &pair_a,
                            &pair_b,
                            self.config.arm_detuning_hz,
                            t,
                            &self.grid,
                        )?)
                    }
                }
            }
        }
    }

    /// Theoretical peak intensity of the scene in single-beam units, used
    /// as the image full scale: 4 for one pair, 8 for two incoherent pairs,
    /// 16 for two coherent pairs.
    pub fn full_scale_intensity(&self) -> f64 {
        match (self.config.pattern, self.config.combine) {
            (PatternConfig::Single, _) => 4.0,
            (PatternConfig::Dual, CombineConfig::Incoherent) => 8.0,
            (PatternConfig::Dual, CombineConfig::Coherent) => 16.0,
        }
    }

    /// Samples the schedule for RF compilation at the configured update
    /// rate. Rotation and static schedules cover [`Scene::duration`];
    /// accordion and composed schedules cover their own ramp.
    pub fn steering_samples(&self) -> Result<Vec<SteeringSample>, SceneError> {
        let rate = self.config.update_rate_hz;
        match &self.config.schedule {
            ScheduleConfig::Static(_) => {
                let pos = self.primary_position(0.0)?;
                let n = (self.duration() * rate).round() as usize;
                Ok((0..n)
                    .map(|k| SteeringSample {
                        t: k as f64 / rate,
                        x1: pos[0],
                        y1: pos[1],
                    })
                    .collect())
            }
            ScheduleConfig::Rotation(r) => Ok(rotation_samples(
                &RotationSpec {
                    omega: r.omega_rad_s,
                    separation: r.separation_m,
                },
                rate,
                self.duration(),
            )?),
            ScheduleConfig::Accordion(a) => Ok(accordion_samples(
                &a.spec(),
                &self.wave,
                &self.lens,
                self.config.waist_m,
                rate,
            )?),
            ScheduleConfig::Composed(c) => Ok(compose(
                c.omega_rad_s,
                &c.accordion_spec(),
                &self.wave,
                &self.lens,
                self.config.waist_m,
                rate,
            )?),
        }
    }

    /// The deflector model for one arm (flat efficiency across its band).
    pub fn aod(&self, id: AodId) -> Result<AodModel, SceneError> {
        let cfg = match id {
            AodId::A => &self.config.rf.aod_a,
            AodId::B => &self.config.rf.aod_b,
        };
        Ok(AodModel::new(
            cfg.center_frequency_hz,
            cfg.bandwidth_hz,
            self.config.rf.deflection_rad_per_hz,
        )?)
    }

    pub fn relay(&self) -> Result<RelayModel, SceneError> {
        Ok(RelayModel::new(self.config.rf.relay_focal_length_m)?)
    }
}

/// Arm B's schedule: arm A rotated a quarter turn, `(x, y) → (−y, x)`.
pub fn quarter_turn(samples: &[SteeringSample]) -> Vec<SteeringSample> {
    samples
        .iter()
        .map(|s| SteeringSample {
            t: s.t,
            x1: -s.y1,
            y1: s.x1,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::rotating_fringe_frame;

    #[test]
    fn empty_document_is_the_reference_scene() {
        let config = SceneConfig::from_json("{}").unwrap();
        assert_eq!(config, SceneConfig::default());
        assert_eq!(config.wavelength_m, 830e-9);
        assert_eq!(config.focal_length_m, 0.25);
        assert_eq!(config.lens, LensKind::SineCondition);
        assert_eq!(config.grid.n, 512);
        match config.schedule {
            ScheduleConfig::Rotation(r) => {
                assert_eq!(r.separation_m, 2e-3);
                assert!((r.omega_rad_s - 2.0 * PI * 100.0).abs() < 1e-9);
            }
            other => panic!("unexpected default schedule {other:?}"),
        }
        // The default RF arms already satisfy the detuning rule for the
        // reference rotation.
        assert_eq!(config.rf.aod_a.center_frequency_hz, 45e6);
        assert_eq!(config.rf.aod_b.center_frequency_hz, 55e6);
    }

    #[test]
    fn unknown_fields_are_rejected_at_any_depth() {
        let err = SceneConfig::from_json(r#"{"weist_m": 1e-3}"#).unwrap_err();
        match &err {
            SceneError::Json(msg) => assert!(msg.contains("weist_m"), "{msg}"),
            other => panic!("wrong error: {other:?}"),
        }
        let err = SceneConfig::from_json(
            r#"{"schedule": {"type": "rotation", "omega_rad_s": 1.0,
                 "separation_m": 1e-3, "bogus": 2}}"#,
        )
        .unwrap_err();
        match &err {
            SceneError::Json(msg) => assert!(msg.contains("bogus"), "{msg}"),
            other => panic!("wrong error: {other:?}"),
        }
        let err =
            SceneConfig::from_json(r#"{"grid": {"n": 64, "extent_m": 1e-3, "pitch": 1}}"#)
                .unwrap_err();
        assert!(matches!(err, SceneError::Json(_)));
    }

    #[test]
    fn validation_reports_every_issue_with_its_path() {
        let config = SceneConfig {
            wavelength_m: -1.0,
            waist_m: 0.0,
            frames: 0,
            numerical_aperture: 1.5,
            ..SceneConfig::default()
        };
        let issues = config.validate();
        assert!(issues.len() >= 4, "issues: {issues:?}");
        for needle in ["wavelength_m", "waist_m", "frames", "numerical_aperture"] {
            assert!(
                issues.iter().any(|i| i.contains(needle)),
                "missing {needle} in {issues:?}"
            );
        }
        assert!(matches!(
            config.build(),
            Err(SceneError::Invalid { .. })
        ));
    }

    #[test]
    fn default_durations_follow_the_schedule() {
        let scene = SceneConfig::default().build().unwrap();
        // One revolution at 100 Hz.
        assert!((scene.duration() - 0.01).abs() < 1e-15);

        let mut config = SceneConfig::default();
        config.schedule = ScheduleConfig::Accordion(AccordionSchedule {
            period_start_m: 60e-6,
            period_end_m: 120e-6,
            duration_s: 0.035,
            profile: AccordionProfile::LinearInPeriod,
        });
        assert_eq!(config.build().unwrap().duration(), 0.035);

        config.schedule = ScheduleConfig::Static(StaticSchedule {
            separation_m: 2e-3,
            angle_rad: 0.0,
        });
        assert_eq!(config.build().unwrap().duration(), 0.01);

        config.duration_s = Some(0.2);
        assert_eq!(config.build().unwrap().duration(), 0.2);
    }

    #[test]
    fn frame_times_are_half_open_and_uniform() {
        let mut config = SceneConfig::default();
        config.frames = 4;
        config.duration_s = Some(0.02);
        let times = config.build().unwrap().frame_times();
        assert_eq!(times, vec![0.0, 0.005, 0.01, 0.015]);
    }

    #[test]
    fn reference_scene_matches_direct_synthesis() {
        let scene = SceneConfig::default().build().unwrap();
        let direct = rotating_fringe_frame(
            &scene.wave,
            &scene.lens,
            2e-3,
            0.93e-3,
            2.0 * PI * 100.0,
            0.0025,
            &scene.grid,
            true,
        )
        .unwrap();
        let rendered = scene.render_frame(0.0025).unwrap();
        assert_eq!(rendered.grid, direct.grid);
        assert_eq!(rendered.time, 0.0025);
        for (a, b) in rendered.values.iter().zip(&direct.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_incoherent_scenes_double_the_center_intensity() {
        let mut config = SceneConfig::default();
        config.pattern = PatternConfig::Dual;
        let scene = config.build().unwrap();
        let frame = scene.render_frame(0.0).unwrap();
        let n = frame.grid.n;
        // Both arms put a fringe maximum at the origin.
        assert!((frame.value(n / 2, n / 2) - 8.0).abs() < 1e-9);
        assert_eq!(scene.full_scale_intensity(), 8.0);
    }

    #[test]
    fn coherent_dual_scenes_reach_the_four_field_peak() {
        let mut config = SceneConfig::default();
        config.pattern = PatternConfig::Dual;
        config.combine = CombineConfig::Coherent;
        let scene = config.build().unwrap();
        let frame = scene.render_frame(0.0).unwrap();
        let n = frame.grid.n;
        // Four coherent unit fields in phase at the origin. The pair whose
        // beams deflect in their own polarization plane arrives tilted by
        // the deflection angle (sin θ = (D/2)/F), so the exact peak is
        // (2 + 2cos θ)², a hair under the scalar 16.
        let sin_theta: f64 = 1e-3 / 0.25;
        let cos_theta = (1.0 - sin_theta * sin_theta).sqrt();
        let expected = (2.0 + 2.0 * cos_theta).powi(2);
        assert!(
            (frame.value(n / 2, n / 2) - expected).abs() < 1e-9,
            "centre = {}, expected {}",
            frame.value(n / 2, n / 2),
            expected
        );
        assert!(expected > 15.999 && expected < 16.0);
        assert_eq!(scene.full_scale_intensity(), 16.0);
    }

    #[test]
    fn coherent_dual_rejects_polarized_synthesis() {
        let mut config = SceneConfig::default();
        config.pattern = PatternConfig::Dual;
        config.combine = CombineConfig::Coherent;
        config.polarization = Some(PolarizationConfig::Linear(LinearPolarization {
            angle_rad: 0.0,
        }));
        let issues = config.validate();
        assert!(issues.iter().any(|i| i.contains("polarization")));
    }

    #[test]
    fn polarization_sections_map_to_unit_jones_vectors() {
        let linear = PolarizationConfig::Linear(LinearPolarization { angle_rad: 0.3 });
        assert!((linear.jones().unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        let circular = PolarizationConfig::Circular(CircularPolarization {
            handedness: Handedness::Left,
        });
        assert!((circular.jones().unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        let bad = SceneConfig {
            polarization: Some(PolarizationConfig::Elliptical(EllipticalPolarization {
                jones_x: [1.0, 0.0],
                jones_y: [1.0, 0.0],
            })),
            ..SceneConfig::default()
        };
        assert!(bad
            .validate()
            .iter()
            .any(|i| i.contains("unit norm")));
    }

    #[test]
    fn composed_schedules_spiral_between_the_period_endpoints() {
        let mut config = SceneConfig::default();
        config.schedule = ScheduleConfig::Composed(ComposedSchedule {
            omega_rad_s: 2.0 * PI * 50.0,
            period_start_m: 60e-6,
            period_end_m: 120e-6,
            duration_s: 0.01,
            profile: AccordionProfile::LinearInPeriod,
        });
        let scene = config.build().unwrap();
        let start = scene.primary_position(0.0).unwrap();
        let end = scene.primary_position(0.01).unwrap();
        let r_start = start[0].hypot(start[1]);
        let r_end = end[0].hypot(end[1]);
        let sep_60 = 830e-9 * 0.25 / 60e-6;
        let sep_120 = 830e-9 * 0.25 / 120e-6;
        assert!((2.0 * r_start - sep_60).abs() < 1e-12);
        assert!((2.0 * r_end - sep_120).abs() < 1e-12);
        // Quarter way through: angle Ωt = π/4.
        let quarter = scene.primary_position(0.0025).unwrap();
        assert!((quarter[1].atan2(quarter[0]) - PI / 4.0).abs() < 1e-9);
    }

    #[test]
    fn static_schedules_compile_to_constant_samples() {
        let mut config = SceneConfig::default();
        config.schedule = ScheduleConfig::Static(StaticSchedule {
            separation_m: 2e-3,
            angle_rad: PI / 6.0,
        });
        config.duration_s = Some(1e-3);
        let scene = config.build().unwrap();
        let samples = scene.steering_samples().unwrap();
        assert_eq!(samples.len(), 100);
        for s in &samples {
            assert_eq!((s.x1, s.y1), (samples[0].x1, samples[0].y1));
        }
        assert!((samples[0].y1.atan2(samples[0].x1) - PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_aperture_positions_are_a_physics_error() {
        let mut config = SceneConfig::default();
        // Sine-condition aperture radius is F·NA = 175 mm; ask for more.
        config.schedule = ScheduleConfig::Static(StaticSchedule {
            separation_m: 0.4,
            angle_rad: 0.0,
        });
        let scene = config.build().unwrap();
        let err = scene.primary_position(0.0).unwrap_err();
        assert!(matches!(err, SceneError::Optics(OpticsError::Aperture { .. })));
        assert!(!err.is_config_error());
        assert_eq!(err.code(), "APERTURE");
    }

    #[test]
    fn quarter_turn_rotates_the_whole_schedule() {
        let samples = vec![
            SteeringSample {
                t: 0.0,
                x1: 1e-3,
                y1: 0.0,
            },
            SteeringSample {
                t: 1e-5,
                x1: 0.0,
                y1: -2e-3,
            },
        ];
        let b = quarter_turn(&samples);
        assert_eq!((b[0].x1, b[0].y1), (0.0, 1e-3));
        assert_eq!((b[1].x1, b[1].y1), (2e-3, 0.0));
        assert_eq!(b[0].t, 0.0);
    }

    #[test]
    fn scene_aods_expose_the_configured_operating_points() {
        let scene = SceneConfig::default().build().unwrap();
        let a = scene.aod(AodId::A).unwrap();
        let b = scene.aod(AodId::B).unwrap();
        assert_eq!(a.center_frequency, 45e6);
        assert_eq!(b.center_frequency, 55e6);
        assert_eq!(a.deflection_coefficient, 4e-9);
        assert_eq!(scene.relay().unwrap().f1, 0.3);
    }
}
