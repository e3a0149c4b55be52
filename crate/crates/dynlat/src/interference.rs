//! Synthesis of focal-plane fringe patterns.
//!
//! Two beams of a symmetric pair leave the lens as plane waves with mirrored
//! transverse wavevectors. On the focal plane their cycle-averaged
//! interference is
//!
//! ```text
//! I(r) = 2 I₀ [1 + cos((k₁ − k₂) · r)] · exp(−2|r|²/w²)
//! ```
//!
//! with `I₀` the single-beam intensity and `w` the focal-plane envelope
//! waist. The optical carrier oscillates at hundreds of THz and is dropped
//! everywhere; only beat notes between *arms* (MHz scale) survive into
//! [`combine_coherent`]. Vector synthesis replaces the scalar cosine with
//! the Hermitian overlap of the transported polarization vectors, which is
//! where fringe contrast comes from.

use crate::optics::{
    hermitian_dot, polarization_transport, wavevector, BeamSpec, JonesVector, LensModel,
    OpticsError, WaveSpec,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Errors from pattern synthesis.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterferenceError {
    #[error(transparent)]
    Optics(#[from] OpticsError),
    /// The grid cannot resolve the fringe: fewer than 4 pixels per period.
    #[error(
        "grid pitch {pitch:.6e} m undersamples the {period:.6e} m fringe (need >= 4 px per period)"
    )]
    Undersampled { pitch: f64, period: f64 },
    /// Frames with different grids cannot be combined pixelwise.
    #[error("frame grids differ: {a_n}x{a_n} over {a_extent:.6e} m vs {b_n}x{b_n} over {b_extent:.6e} m")]
    GridMismatch {
        a_n: usize,
        a_extent: f64,
        b_n: usize,
        b_extent: f64,
    },
    #[error("{name} must be {requirement} (got {value:.6e})")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

impl InterferenceError {
    /// Stable machine-readable code for CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            InterferenceError::Optics(e) => e.code(),
            InterferenceError::Undersampled { .. } => "SAMPLING",
            InterferenceError::GridMismatch { .. } => "GRID_MISMATCH",
            InterferenceError::OutOfRange { .. } => "RANGE",
        }
    }
}

/// Square pixel grid over the focal plane. Coordinates span
/// `[−extent/2, extent/2)` on each axis: pixel `i` sits at
/// `(i/n − 1/2) · extent`, so even `n` puts a pixel exactly on the axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Pixels per side (≥ 2).
    pub n: usize,
    /// Physical side length in metres.
    pub extent: f64,
}

impl GridSpec {
    pub fn new(n: usize, extent: f64) -> Result<Self, InterferenceError> {
        if n < 2 {
            return Err(InterferenceError::OutOfRange {
                name: "grid n",
                requirement: ">= 2",
                value: n as f64,
            });
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(InterferenceError::OutOfRange {
                name: "grid extent",
                requirement: "finite and > 0",
                value: extent,
            });
        }
        Ok(GridSpec { n, extent })
    }

    /// Pixel pitch in metres.
    pub fn pitch(&self) -> f64 {
        self.extent / self.n as f64
    }

    /// Physical coordinate of pixel index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 / self.n as f64 - 0.5) * self.extent
    }
}

/// One synthesized intensity image, row-major with `values[iy * n + ix]`,
/// in units of the single-beam intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityFrame {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// Schedule time the frame was rendered at, seconds.
    pub time: f64,
}

impl IntensityFrame {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.n + ix]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Integrated power: pixel sum × pixel area.
    pub fn total_power(&self) -> f64 {
        let pitch = self.grid.pitch();
        self.values.iter().sum::<f64>() * pitch * pitch
    }
}

/// A symmetric pair: one steered beam plus its mirror image through the
/// optical axis. The mirror beam shares amplitude, waist, polarization, and
/// detuning; only the sign of the position flips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPair {
    pub primary: BeamSpec,
}

impl BeamPair {
    pub fn new(primary: BeamSpec) -> Self {
        BeamPair { primary }
    }

    /// The mirrored partner at `(−x, −y)`.
    pub fn mirror(&self) -> BeamSpec {
        let mut m = self.primary;
        m.position = [-m.position[0], -m.position[1]];
        m
    }

    /// Full beam separation `D = 2 |position|`.
    pub fn separation(&self) -> f64 {
        2.0 * self.primary.position[0].hypot(self.primary.position[1])
    }

    /// Azimuth of the primary beam in the focal plane.
    pub fn azimuth(&self) -> f64 {
        self.primary.position[1].atan2(self.primary.position[0])
    }
}

/// Gaussian intensity envelope `exp(−2 r²/w²)`.
fn envelope_intensity(r_sq: f64, waist: f64) -> f64 {
    (-2.0 * r_sq / (waist * waist)).exp()
}

/// Transverse wavevector difference `k₁⊥ − k₂⊥` (rad/m) of a pair. Both
/// lens kinds give the mirror pair equal axial components, so the focal-plane
/// phase difference is purely transverse.
fn pair_delta_k(
    wave: &WaveSpec,
    lens: &LensModel,
    pair: &BeamPair,
) -> Result<[f64; 2], InterferenceError> {
    let k1 = wavevector(lens, wave, pair.primary.position)?;
    let k2 = wavevector(lens, wave, pair.mirror().position)?;
    Ok([k1[0] - k2[0], k1[1] - k2[1]])
}

/// Fringe period implied by a transverse wavevector difference, or `None`
/// for parallel beams.
fn delta_k_period(delta_k: [f64; 2]) -> Option<f64> {
    let mag = delta_k[0].hypot(delta_k[1]);
    if mag == 0.0 {
        None
    } else {
        Some(2.0 * PI / mag)
    }
}

fn check_sampling(grid: &GridSpec, period: Option<f64>) -> Result<(), InterferenceError> {
    if let Some(d) = period {
        let pitch = grid.pitch();
        if pitch > d / 4.0 {
            return Err(InterferenceError::Undersampled { pitch, period: d });
        }
    }
    Ok(())
}

/// Scalar fringe intensity of a symmetric pair at a single focal-plane
/// point, in units of the single-beam intensity. Useful for probing exact
/// positions that do not fall on a pixel.
pub fn scalar_fringe_at(
    wave: &WaveSpec,
    lens: &LensModel,
    pair: &BeamPair,
    point: [f64; 2],
    envelope: bool,
) -> Result<f64, InterferenceError> {
    let dk = pair_delta_k(wave, lens, pair)?;
    let i0 = pair.primary.amplitude * pair.primary.amplitude;
    let phase = dk[0] * point[0] + dk[1] * point[1];
    let mut v = 2.0 * i0 * (1.0 + phase.cos());
    if envelope {
        let r_sq = point[0] * point[0] + point[1] * point[1];
        v *= envelope_intensity(r_sq, pair.primary.waist);
    }
    Ok(v)
}

/// Renders the scalar two-beam fringe pattern of a symmetric pair over a
/// grid. The fringe runs perpendicular to the pair axis with period
/// `2π / |Δk⊥|`; grids coarser than 4 pixels per period are rejected.
pub fn scalar_fringe_frame(
    wave: &WaveSpec,
    lens: &LensModel,
    pair: &BeamPair,
    grid: &GridSpec,
    envelope: bool,
) -> Result<IntensityFrame, InterferenceError> {
    scalar_fringe_frame_at_time(wave, lens, pair, grid, envelope, 0.0)
}

/// [`scalar_fringe_frame`] with an explicit timestamp recorded on the frame.
pub fn scalar_fringe_frame_at_time(
    wave: &WaveSpec,
    lens: &LensModel,
    pair: &BeamPair,
    grid: &GridSpec,
    envelope: bool,
    time: f64,
) -> Result<IntensityFrame, InterferenceError> {
    let dk = pair_delta_k(wave, lens, pair)?;
    check_sampling(grid, delta_k_period(dk))?;
    let n = grid.n;
    let i0 = pair.primary.amplitude * pair.primary.amplitude;
    let waist = pair.primary.waist;
    let mut values = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = grid.coord(iy);
        for ix in 0..n {
            let x = grid.coord(ix);
            let phase = dk[0] * x + dk[1] * y;
            let mut v = 2.0 * i0 * (1.0 + phase.cos());
            if envelope {
                v *= envelope_intensity(x * x + y * y, waist);
            }
            values.push(v);
        }
    }
    Ok(IntensityFrame {
        grid: *grid,
        values,
        time,
    })
}

/// Renders the rotating fringe at schedule time `t`: the primary beam sits
/// at `(D/2 · cos Ωt, D/2 · sin Ωt)`, so the pattern is
/// `2 I₀ [1 + cos((2π/d)(x cos Ωt + y sin Ωt))]` under the envelope.
/// Intensity is in units of `I₀` (unit beam amplitude).
#[allow(clippy::too_many_arguments)]
pub fn rotating_fringe_frame(
    wave: &WaveSpec,
    lens: &LensModel,
    separation: f64,
    waist: f64,
    omega: f64,
    t: f64,
    grid: &GridSpec,
    envelope: bool,
) -> Result<IntensityFrame, InterferenceError> {
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(InterferenceError::OutOfRange {
            name: "separation",
            requirement: "finite and >= 0",
            value: separation,
        });
    }
    let phi = omega * t;
    let half = separation / 2.0;
    let primary = BeamSpec::new(
        [half * phi.cos(), half * phi.sin()],
        1.0,
        waist,
        JonesVector::linear(0.0),
    )?;
    let pair = BeamPair::new(primary);
    scalar_fringe_frame_at_time(wave, lens, &pair, grid, envelope, t)
}

/// Fringe contrast of a symmetric pair from polarization alone:
/// `C = |ê₁ · ê₂*|` where `ê₂` belongs to the mirror beam. Geometric tilt
/// rotates each beam's p component, so beams that start with identical
/// linear polarization can lose contrast — completely so at θ = 45° when
/// they meet p-to-p.
pub fn fringe_contrast(
    lens: &LensModel,
    position: [f64; 2],
    jones1: &JonesVector,
    jones2: &JonesVector,
) -> Result<f64, InterferenceError> {
    let e1 = polarization_transport(lens, position, jones1)?;
    let e2 = polarization_transport(lens, [-position[0], -position[1]], jones2)?;
    Ok(hermitian_dot(&e1, &e2).norm())
}

/// Renders the full vector interference of a symmetric pair: each beam's
/// Jones vector is transported through the lens and the fields are summed
/// before squaring. Reduces to [`scalar_fringe_frame`] (envelope on) when
/// the transported polarizations overlap perfectly; the fringe rides at the
/// contrast `C = |ê₁·ê₂*|` in general. The Gaussian envelope is always
/// applied: contrast measurements divide it back out.
pub fn vector_fringe_frame(
    wave: &WaveSpec,
    lens: &LensModel,
    pair: &BeamPair,
    grid: &GridSpec,
) -> Result<IntensityFrame, InterferenceError> {
    let dk = pair_delta_k(wave, lens, pair)?;
    check_sampling(grid, delta_k_period(dk))?;
    let mirror = pair.mirror();
    let e1 = polarization_transport(lens, pair.primary.position, &pair.primary.polarization)?;
    let e2 = polarization_transport(lens, mirror.position, &mirror.polarization)?;
    // |ê₁ e^{iφ₁} + ê₂ e^{iφ₂}|² = 2 + 2 Re(G e^{iΔφ}) for unit vectors,
    // with G = ê₁·ê₂* and Δφ = Δk·r.
    let g = hermitian_dot(&e1, &e2);
    let n = grid.n;
    let i0 = pair.primary.amplitude * pair.primary.amplitude;
    let waist = pair.primary.waist;
    let mut values = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = grid.coord(iy);
        for ix in 0..n {
            let x = grid.coord(ix);
            let phase = dk[0] * x + dk[1] * y;
            let cross = g.re * phase.cos() - g.im * phase.sin();
            let v = i0 * (2.0 + 2.0 * cross) * envelope_intensity(x * x + y * y, waist);
            values.push(v);
        }
    }
    Ok(IntensityFrame {
        grid: *grid,
        values,
        time: 0.0,
    })
}

/// Pixelwise sum of two frames on the same grid — the physical result of
/// overlapping two lattice arms whose MHz-scale mutual beat averages to
/// nothing over any atomic timescale of interest. Independent of the beat
/// frequency and of time by construction.
pub fn combine_incoherent(
    a: &IntensityFrame,
    b: &IntensityFrame,
) -> Result<IntensityFrame, InterferenceError> {
    if a.grid.n != b.grid.n || a.grid.extent != b.grid.extent {
        return Err(InterferenceError::GridMismatch {
            a_n: a.grid.n,
            a_extent: a.grid.extent,
            b_n: b.grid.n,
            b_extent: b.grid.extent,
        });
    }
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x + y)
        .collect();
    Ok(IntensityFrame {
        grid: a.grid,
        values,
        time: a.time,
    })
}

/// Diagnostic four-beam synthesis: both pairs are summed as fields, with arm
/// B advanced by the beat phase `2π Δν t`. This is what the lattice would
/// look like if the arms were *not* detuned and their cross terms survived —
/// the picture that motivates running the arms at different frequencies.
#[allow(clippy::too_many_arguments)]
pub fn combine_coherent(
    wave: &WaveSpec,
    lens: &LensModel,
    pair_a: &BeamPair,
    pair_b: &BeamPair,
    delta_nu: f64,
    t: f64,
    grid: &GridSpec,
) -> Result<IntensityFrame, InterferenceError> {
    let dk_a = pair_delta_k(wave, lens, pair_a)?;
    let dk_b = pair_delta_k(wave, lens, pair_b)?;
    check_sampling(grid, delta_k_period(dk_a))?;
    check_sampling(grid, delta_k_period(dk_b))?;

    let beat = Complex64::from_polar(1.0, 2.0 * PI * delta_nu * t);
    struct Field {
        k: [f64; 2],
        e: [Complex64; 3],
        amp: f64,
        waist: f64,
        phase0: Complex64,
    }
    let mut fields = Vec::with_capacity(4);
    for (pair, phase0) in [(pair_a, Complex64::new(1.0, 0.0)), (pair_b, beat)] {
        for beam in [pair.primary, pair.mirror()] {
            let k = wavevector(lens, wave, beam.position)?;
            let e = polarization_transport(lens, beam.position, &beam.polarization)?;
            fields.push(Field {
                k: [k[0], k[1]],
                e,
                amp: beam.amplitude,
                waist: beam.waist,
                phase0,
            });
        }
    }

    let n = grid.n;
    let mut values = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = grid.coord(iy);
        for ix in 0..n {
            let x = grid.coord(ix);
            let r_sq = x * x + y * y;
            let mut sum = [Complex64::new(0.0, 0.0); 3];
            for f in &fields {
                // Field envelope is the square root of the intensity one.
                let env = (-r_sq / (f.waist * f.waist)).exp();
                let carrier = Complex64::from_polar(1.0, f.k[0] * x + f.k[1] * y);
                let scale = f.phase0 * carrier * (f.amp * env);
                for (s, e) in sum.iter_mut().zip(f.e.iter()) {
                    *s += scale * e;
                }
            }
            values.push(sum[0].norm_sqr() + sum[1].norm_sqr() + sum[2].norm_sqr());
        }
    }
    Ok(IntensityFrame {
        grid: *grid,
        values,
        time: t,
    })
}
