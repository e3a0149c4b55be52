//! Geometry of beams steered through the Fourier lens.
//!
//! A beam displaced to position `(x, y)` in the front focal plane of a lens
//! emerges behind the lens as a plane wave tilted toward the optical axis.
//! Everything downstream (fringe spacing, rotation schedules, RF tuning)
//! reduces to the direction of that plane wave, so this module is the single
//! source of truth for the lens mapping. Two lens idealizations are
//! supported:
//!
//! * [`LensKind::ThinLens`] — the ray crosses the axis at `tan θ = r / F`.
//! * [`LensKind::SineCondition`] — an aplanatic lens with `sin θ = r / F`,
//!   which makes the focal-plane fringe period exactly `λ F / D` for a
//!   symmetric pair with separation `D`.
//!
//! The module also carries the polarization transport model (s/p
//! decomposition in the meridional plane), Gaussian-beam ABCD propagation,
//! and a coherence-margin check for unbalanced interferometer arms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Errors from beam/lens geometry operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpticsError {
    /// A beam sits outside the usable aperture of the lens.
    #[error("beam at radius {radius:.6e} m is outside the lens aperture (limit {limit:.6e} m)")]
    Aperture { radius: f64, limit: f64 },
    /// The sine-condition mapping is undefined: `sin θ` would exceed 1.
    #[error(
        "sine-condition mapping undefined: radius {radius:.6e} m exceeds focal length {focal_length:.6e} m"
    )]
    ImpossibleGeometry { radius: f64, focal_length: f64 },
    /// Parallel beams produce no fringes; the period diverges.
    #[error("beams are parallel; the fringe period is infinite")]
    InfinitePeriod,
    /// A scalar input violated its domain.
    #[error("{name} must be {requirement} (got {value:.6e})")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    /// A Jones vector must be unit-norm.
    #[error("Jones vector must have unit norm within 1e-12 (norm² = {norm_sq:.17})")]
    NotNormalized { norm_sq: f64 },
    /// A ray-transfer matrix must have determinant 1.
    #[error("ray-transfer matrix must be unimodular within 1e-12 (det = {det:.17})")]
    NotUnimodular { det: f64 },
}

impl OpticsError {
    /// Stable machine-readable code for CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            OpticsError::Aperture { .. } => "APERTURE",
            OpticsError::ImpossibleGeometry { .. } => "GEOMETRY",
            OpticsError::InfinitePeriod => "INFINITE_PERIOD",
            OpticsError::OutOfRange { .. } => "RANGE",
            OpticsError::NotNormalized { .. } => "POLARIZATION",
            OpticsError::NotUnimodular { .. } => "ABCD",
        }
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<f64, OpticsError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(OpticsError::OutOfRange {
            name,
            requirement: "finite and > 0",
            value,
        })
    }
}

/// Monochromatic light used to drive the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSpec {
    /// Vacuum wavelength in metres.
    pub wavelength: f64,
    /// Frequency offset from a common reference, in Hz. Only beat notes
    /// between lattice arms care about this; it never changes `wavelength`
    /// at the precision relevant here.
    pub detuning: f64,
}

impl WaveSpec {
    /// A wave with the given vacuum wavelength (metres) and zero detuning.
    pub fn new(wavelength: f64) -> Result<Self, OpticsError> {
        require_positive("wavelength", wavelength)?;
        Ok(WaveSpec {
            wavelength,
            detuning: 0.0,
        })
    }

    /// Same wave with a frequency offset in Hz.
    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    /// Angular wavenumber `2π / λ` in rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// How the lens maps front-focal-plane displacement to output angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LensKind {
    /// Ideal thin lens: `tan θ = r / F`.
    ThinLens,
    /// Abbe sine condition: `sin θ = r / F`. Exact `d = λF/D` fringes.
    SineCondition,
}

/// A focusing lens characterized by focal length and numerical aperture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensModel {
    pub kind: LensKind,
    /// Focal length in metres.
    pub focal_length: f64,
    /// Numerical aperture, in (0, 1]. Bounds the steepest ray the lens
    /// accepts and therefore the smallest achievable fringe period.
    pub numerical_aperture: f64,
}

impl LensModel {
    pub fn new(kind: LensKind, focal_length: f64, numerical_aperture: f64) -> Result<Self, OpticsError> {
        require_positive("focal_length", focal_length)?;
        if !(numerical_aperture > 0.0 && numerical_aperture <= 1.0) {
            return Err(OpticsError::OutOfRange {
                name: "numerical_aperture",
                requirement: "in (0, 1]",
                value: numerical_aperture,
            });
        }
        Ok(LensModel {
            kind,
            focal_length,
            numerical_aperture,
        })
    }

    pub fn thin_lens(focal_length: f64, numerical_aperture: f64) -> Result<Self, OpticsError> {
        Self::new(LensKind::ThinLens, focal_length, numerical_aperture)
    }

    pub fn sine_condition(focal_length: f64, numerical_aperture: f64) -> Result<Self, OpticsError> {
        Self::new(LensKind::SineCondition, focal_length, numerical_aperture)
    }

    /// Largest front-focal-plane radius the lens accepts, i.e. the radius at
    /// which the output ray reaches `sin θ = NA`.
    pub fn aperture_radius(&self) -> f64 {
        let na = self.numerical_aperture;
        match self.kind {
            // sin(atan(r/F)) = NA  =>  r = F·NA/√(1−NA²); NA = 1 needs r → ∞.
            LensKind::ThinLens => {
                if na >= 1.0 {
                    f64::INFINITY
                } else {
                    self.focal_length * na / (1.0 - na * na).sqrt()
                }
            }
            LensKind::SineCondition => self.focal_length * na,
        }
    }

    /// Checks that a front-focal-plane position is inside the aperture.
    pub fn check_aperture(&self, position: [f64; 2]) -> Result<(), OpticsError> {
        let radius = position[0].hypot(position[1]);
        if let LensKind::SineCondition = self.kind {
            if radius > self.focal_length {
                return Err(OpticsError::ImpossibleGeometry {
                    radius,
                    focal_length: self.focal_length,
                });
            }
        }
        let limit = self.aperture_radius();
        if radius > limit {
            return Err(OpticsError::Aperture { radius, limit });
        }
        Ok(())
    }

    /// Unit propagation direction of the output beam for an input beam
    /// displaced to `position` in the front focal plane. The beam tilts back
    /// toward the axis, so the transverse components carry the opposite sign
    /// of the displacement; the axial component is positive.
    pub fn beam_direction(&self, position: [f64; 2]) -> Result<[f64; 3], OpticsError> {
        self.check_aperture(position)?;
        let [x, y] = position;
        let f = self.focal_length;
        match self.kind {
            LensKind::ThinLens => {
                let norm = (x * x + y * y + f * f).sqrt();
                Ok([-x / norm, -y / norm, f / norm])
            }
            LensKind::SineCondition => {
                let sx = -x / f;
                let sy = -y / f;
                let s2 = sx * sx + sy * sy;
                // check_aperture already rejected r > F; s2 can still be 1.
                Ok([sx, sy, (1.0 - s2).max(0.0).sqrt()])
            }
        }
    }
}

/// Wavevector (rad/m) of the plane wave produced by a beam at `position` in
/// the front focal plane. `|k| = 2π/λ` exactly for both lens kinds; for the
/// sine-condition lens the transverse part is exactly `(2π/λ)·(−x, −y)/F`.
pub fn wavevector(
    lens: &LensModel,
    wave: &WaveSpec,
    position: [f64; 2],
) -> Result<[f64; 3], OpticsError> {
    let dir = lens.beam_direction(position)?;
    let k = wave.wavenumber();
    Ok([k * dir[0], k * dir[1], k * dir[2]])
}

/// Half-angle between the two beams of a symmetric pair separated by
/// `separation` in the front focal plane (each beam sits at radius
/// `separation / 2`).
pub fn intersection_half_angle(lens: &LensModel, separation: f64) -> Result<f64, OpticsError> {
    if !separation.is_finite() || separation < 0.0 {
        return Err(OpticsError::OutOfRange {
            name: "separation",
            requirement: "finite and >= 0",
            value: separation,
        });
    }
    let r = separation / 2.0;
    lens.check_aperture([r, 0.0])?;
    let u = r / lens.focal_length;
    Ok(match lens.kind {
        LensKind::ThinLens => u.atan(),
        LensKind::SineCondition => u.asin(),
    })
}

/// Fringe period of two plane waves crossing at half-angle `theta`:
/// `d = λ / (2 sin θ)`.
pub fn period_from_angle(wave: &WaveSpec, theta: f64) -> Result<f64, OpticsError> {
    if !(theta > 0.0 && theta <= PI / 2.0) {
        if theta == 0.0 {
            return Err(OpticsError::InfinitePeriod);
        }
        return Err(OpticsError::OutOfRange {
            name: "theta",
            requirement: "in (0, π/2]",
            value: theta,
        });
    }
    Ok(wave.wavelength / (2.0 * theta.sin()))
}

/// Small-angle fringe period `d = λ F / D` for a pair with separation `D`
/// behind a lens of focal length `F`. Exact for a sine-condition lens;
/// for a thin lens it overestimates the angle by `O((D/2F)²)`.
pub fn period_paraxial(wave: &WaveSpec, focal_length: f64, separation: f64) -> Result<f64, OpticsError> {
    require_positive("focal_length", focal_length)?;
    if !separation.is_finite() || separation < 0.0 {
        return Err(OpticsError::OutOfRange {
            name: "separation",
            requirement: "finite and >= 0",
            value: separation,
        });
    }
    if separation == 0.0 {
        return Err(OpticsError::InfinitePeriod);
    }
    Ok(wave.wavelength * focal_length / separation)
}

/// Smallest fringe period a lens of the given numerical aperture can write:
/// `d_min = λ / (2 NA)`, reached when both beams graze the aperture edge.
pub fn min_period(wave: &WaveSpec, numerical_aperture: f64) -> Result<f64, OpticsError> {
    if !(numerical_aperture > 0.0 && numerical_aperture <= 1.0) {
        return Err(OpticsError::OutOfRange {
            name: "numerical_aperture",
            requirement: "in (0, 1]",
            value: numerical_aperture,
        });
    }
    Ok(wave.wavelength / (2.0 * numerical_aperture))
}

/// Handedness of a circular Jones vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    Left,
    Right,
}

/// Transverse polarization state of a paraxial input beam, `(E_x, E_y)`
/// with unit norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JonesVector {
    pub x: Complex64,
    pub y: Complex64,
}

impl JonesVector {
    /// Validates unit norm within 1e-12.
    pub fn new(x: Complex64, y: Complex64) -> Result<Self, OpticsError> {
        let norm_sq = x.norm_sqr() + y.norm_sqr();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(OpticsError::NotNormalized { norm_sq });
        }
        Ok(JonesVector { x, y })
    }

    /// Linear polarization at `angle` radians from the x axis.
    pub fn linear(angle: f64) -> Self {
        JonesVector {
            x: Complex64::new(angle.cos(), 0.0),
            y: Complex64::new(angle.sin(), 0.0),
        }
    }

    /// Circular polarization `(x̂ ± i ŷ)/√2`.
    pub fn circular(handedness: Handedness) -> Self {
        let s = match handedness {
            Handedness::Left => 1.0,
            Handedness::Right => -1.0,
        };
        let r = 1.0 / 2.0_f64.sqrt();
        JonesVector {
            x: Complex64::new(r, 0.0),
            y: Complex64::new(0.0, s * r),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }
}

/// One steered beam: where it sits in the front focal plane and what it
/// carries. `waist` is the 1/e² intensity radius of the Gaussian envelope
/// *in the back focal plane*, taken as a direct input rather than derived
/// from diffraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    /// Front-focal-plane displacement (x, y) in metres.
    pub position: [f64; 2],
    /// Field amplitude in arbitrary units; the single-beam intensity is
    /// `amplitude²`.
    pub amplitude: f64,
    /// 1/e² intensity radius of the focal-plane envelope, metres.
    pub waist: f64,
    /// Transverse polarization before the lens.
    pub polarization: JonesVector,
    /// Frequency offset in Hz (used for inter-arm beat notes).
    pub detuning: f64,
}

impl BeamSpec {
    pub fn new(
        position: [f64; 2],
        amplitude: f64,
        waist: f64,
        polarization: JonesVector,
    ) -> Result<Self, OpticsError> {
        require_positive("amplitude", amplitude)?;
        require_positive("waist", waist)?;
        let norm_sq = polarization.norm_sqr();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(OpticsError::NotNormalized { norm_sq });
        }
        Ok(BeamSpec {
            position,
            amplitude,
            waist,
            polarization,
            detuning: 0.0,
        })
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }
}

/// Hermitian dot product `a · b*` of two complex 3-vectors.
pub fn hermitian_dot(a: &[Complex64; 3], b: &[Complex64; 3]) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

/// Transports a paraxial Jones vector through the lens for a beam at
/// `position`, using the meridional s/p model:
///
/// * the s component (perpendicular to the plane containing the beam and the
///   optical axis) is unchanged;
/// * the p component (radial) is rotated by the bend angle θ toward the
///   axis, picking up an axial field component `sin θ`.
///
/// Returns the unit polarization 3-vector of the output plane wave, which is
/// orthogonal to the output wavevector by construction.
pub fn polarization_transport(
    lens: &LensModel,
    position: [f64; 2],
    jones: &JonesVector,
) -> Result<[Complex64; 3], OpticsError> {
    let norm_sq = jones.norm_sqr();
    if (norm_sq - 1.0).abs() > 1e-12 {
        return Err(OpticsError::NotNormalized { norm_sq });
    }
    let dir = lens.beam_direction(position)?;
    let (sin_t, cos_t) = {
        let st = dir[0].hypot(dir[1]);
        (st, dir[2])
    };
    // Azimuth of the beam in the focal plane. On axis the meridional plane
    // is degenerate; any choice works and α = 0 keeps (x, y) fixed.
    let r = position[0].hypot(position[1]);
    let (cos_a, sin_a) = if r == 0.0 {
        (1.0, 0.0)
    } else {
        (position[0] / r, position[1] / r)
    };
    // Input decomposition: p̂_in = (cos α, sin α, 0), ŝ = (−sin α, cos α, 0).
    let a_p = jones.x * cos_a + jones.y * sin_a;
    let a_s = -jones.x * sin_a + jones.y * cos_a;
    // Output frame: ŝ unchanged, p̂_out = (cos θ cos α, cos θ sin α, sin θ).
    Ok([
        a_s * -sin_a + a_p * (cos_t * cos_a),
        a_s * cos_a + a_p * (cos_t * sin_a),
        a_p * sin_t,
    ])
}

/// Complex Gaussian-beam parameter `q = z + i·z_R` with `z_R > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParameter(pub Complex64);

impl BeamParameter {
    pub fn new(q: Complex64) -> Result<Self, OpticsError> {
        if !(q.im > 0.0) {
            return Err(OpticsError::OutOfRange {
                name: "Im(q)",
                requirement: "> 0 (beam must have a real waist)",
                value: q.im,
            });
        }
        Ok(BeamParameter(q))
    }

    /// Beam at its waist: `q = i π w₀² / λ`.
    pub fn from_waist(waist: f64, wavelength: f64) -> Result<Self, OpticsError> {
        require_positive("waist", waist)?;
        require_positive("wavelength", wavelength)?;
        Ok(BeamParameter(Complex64::new(0.0, PI * waist * waist / wavelength)))
    }

    /// Rayleigh range `Im(q)`.
    pub fn rayleigh_range(&self) -> f64 {
        self.0.im
    }

    /// Distance from the waist `Re(q)`.
    pub fn distance_from_waist(&self) -> f64 {
        self.0.re
    }
}

/// A 2×2 ray-transfer (ABCD) matrix with unit determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayTransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RayTransferMatrix {
    /// Validates `det = ad − bc = 1` within 1e-12.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, OpticsError> {
        let det = a * d - b * c;
        if (det - 1.0).abs() > 1e-12 {
            return Err(OpticsError::NotUnimodular { det });
        }
        Ok(RayTransferMatrix { a, b, c, d })
    }

    /// Free-space propagation over distance `length` (metres).
    pub fn free_space(length: f64) -> Self {
        RayTransferMatrix {
            a: 1.0,
            b: length,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Thin lens of focal length `f`.
    pub fn thin_lens(f: f64) -> Self {
        RayTransferMatrix {
            a: 1.0,
            b: 0.0,
            c: -1.0 / f,
            d: 1.0,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `self ∘ earlier`: applies `earlier` first, then `self`.
    pub fn compose(&self, earlier: &RayTransferMatrix) -> RayTransferMatrix {
        RayTransferMatrix {
            a: self.a * earlier.a + self.b * earlier.c,
            b: self.a * earlier.b + self.b * earlier.d,
            c: self.c * earlier.a + self.d * earlier.c,
            d: self.c * earlier.b + self.d * earlier.d,
        }
    }
}

impl std::ops::Mul for RayTransferMatrix {
    type Output = RayTransferMatrix;
    /// Matrix product; `m2 * m1` applies `m1` first.
    fn mul(self, rhs: RayTransferMatrix) -> RayTransferMatrix {
        self.compose(&rhs)
    }
}

/// Propagates a Gaussian-beam parameter through an ABCD system:
/// `q' = (a q + b) / (c q + d)`. Unimodular real matrices preserve
/// `Im(q) > 0`, so the output is always a valid beam.
pub fn abcd_propagate(
    q: &BeamParameter,
    m: &RayTransferMatrix,
) -> Result<BeamParameter, OpticsError> {
    let det = m.determinant();
    if (det - 1.0).abs() > 1e-12 {
        return Err(OpticsError::NotUnimodular { det });
    }
    let denom = m.c * q.0 + Complex64::new(m.d, 0.0);
    BeamParameter::new((m.a * q.0 + Complex64::new(m.b, 0.0)) / denom)
}

/// Verdict of a coherence-margin check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceStatus {
    /// Path imbalance far below the coherence length (ratio < 0.1).
    Ok,
    /// Imbalance within a decade of the coherence length (0.1 ≤ ratio < 1).
    Marginal,
    /// Imbalance at or beyond the coherence length (ratio ≥ 1).
    Fail,
}

/// Result of comparing an interferometer path imbalance to the source
/// coherence length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceMargin {
    /// `|ΔL| / L_c`.
    pub ratio: f64,
    pub status: CoherenceStatus,
}

/// Compares a path-length imbalance `delta_l` against the source coherence
/// length `coherence_length`. Fringe contrast survives only while the
/// imbalance is a small fraction of the coherence length.
pub fn coherence_margin(delta_l: f64, coherence_length: f64) -> Result<CoherenceMargin, OpticsError> {
    if !delta_l.is_finite() {
        return Err(OpticsError::OutOfRange {
            name: "delta_l",
            requirement: "finite",
            value: delta_l,
        });
    }
    require_positive("coherence_length", coherence_length)?;
    let ratio = delta_l.abs() / coherence_length;
    let status = if ratio < 0.1 {
        CoherenceStatus::Ok
    } else if ratio < 1.0 {
        CoherenceStatus::Marginal
    } else {
        CoherenceStatus::Fail
    };
    Ok(CoherenceMargin { ratio, status })
}

/// Extra path length of the relay arm that inserts a second 4f telescope of
/// focal length `f2`: the detour adds four focal lengths.
pub fn long_arm_excess_path(f2: f64) -> Result<f64, OpticsError> {
    require_positive("f2", f2)?;
    Ok(4.0 * f2)
}
