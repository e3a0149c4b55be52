//! Synthesis, steering, and analysis of dynamic two-beam optical lattices
//! in a lens focal plane.
//!
//! Two far-detuned beams entering a large-aperture lens parallel to its
//! axis cross at the focal plane and interfere, writing a sinusoidal
//! lattice whose period is set by the beam separation and whose
//! orientation follows the beams' azimuth. Steering the input spots
//! therefore steers the lattice: moving them on a circle rotates it,
//! changing their separation stretches it like an accordion, and both can
//! run at once. This crate models that chain end to end:
//!
//! * [`optics`] — wavelength/lens geometry, fringe-period laws,
//!   polarization transport through a high-NA lens, and ABCD beam
//!   propagation for relay design.
//! * [`interference`] — focal-plane intensity synthesis: scalar and
//!   full-vector fringes, Gaussian envelopes, and one- or two-pair scenes
//!   combined coherently or incoherently.
//! * [`schedule`] — rotation, accordion, and composed steering schedules,
//!   sampled against apparatus limits, plus the rotating-lattice flux
//!   figure of merit.
//! * [`rf`] — compiling schedules into two-axis acousto-optic deflector
//!   drive programs: the atan deflection law, efficiency-flattened
//!   amplitudes, the inter-arm detuning rule, and the CSV wire format.
//! * [`analysis`] — recovering period, orientation, spectral width, and
//!   visibility from intensity frames via the 2D spectrum.
//! * [`pgm`] — 16-bit binary PGM image I/O for frames.
//! * [`scene`] — a strict JSON configuration that assembles all of the
//!   above into a runnable scene.
//! * [`cli`] — the `dynlat` binary: `simulate`, `analyze`, `compile-rf`,
//!   and `flux`.
//!
//! # Quick start
//!
//! Render the reference lattice (830 nm, F = 0.25 m, beams 2 mm apart,
//! fringe period λF/D = 103.75 µm) and measure it back:
//!
//! ```
//! use dynlat::analysis::{analyze_frame, AnalyzeOptions};
//! use dynlat::interference::{rotating_fringe_frame, GridSpec};
//! use dynlat::optics::{LensModel, WaveSpec};
//!
//! let wave = WaveSpec::new(830e-9)?;
//! let lens = LensModel::sine_condition(0.25, 0.7)?;
//! let grid = GridSpec::new(512, 2.3e-3)?;
//! let frame = rotating_fringe_frame(&wave, &lens, 2e-3, 0.93e-3, 0.0, 0.0, &grid, true)?;
//!
//! let report = analyze_frame(
//!     &frame,
//!     &AnalyzeOptions { envelope_waist: Some(0.93e-3), ..Default::default() },
//! )?;
//! assert!((report.period - 103.75e-6).abs() < 0.5e-6);
//! assert!((report.visibility - 1.0).abs() < 1e-9);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! Units are SI throughout: metres, seconds, hertz, radians. Spatial
//! frequencies in [`analysis`] are cycles per metre; wavevectors in
//! [`optics`] are radians per metre.

pub mod analysis;
pub mod cli;
pub mod interference;
pub mod optics;
pub mod pgm;
pub mod rf;
pub mod scene;
pub mod schedule;

pub use analysis::{analyze_frame, AnalysisReport, AnalyzeOptions, Peak, Spectrum};
pub use interference::{BeamPair, GridSpec, IntensityFrame};
pub use optics::{JonesVector, LensKind, LensModel, WaveSpec};
pub use rf::{AodId, AodModel, RelayModel, RfProgram};
pub use scene::{Scene, SceneConfig};
pub use schedule::{AccordionSpec, AtomSpec, RotationSpec, SteeringSample};

/// Compiles every code sample in the guide (`book/`) as a doctest, so the
/// prose and the library cannot drift apart.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/beams-and-lenses.md")]
    mod beams_and_lenses {}
    #[doc = include_str!("../../../book/src/interference-patterns.md")]
    mod interference_patterns {}
    #[doc = include_str!("../../../book/src/polarization-and-contrast.md")]
    mod polarization_and_contrast {}
    #[doc = include_str!("../../../book/src/steering-schedules.md")]
    mod steering_schedules {}
    #[doc = include_str!("../../../book/src/rf-compilation.md")]
    mod rf_compilation {}
    #[doc = include_str!("../../../book/src/analyzing-frames.md")]
    mod analyzing_frames {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
