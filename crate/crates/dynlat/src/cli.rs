//! Command-line interface: `simulate`, `analyze`, `compile-rf`, `flux`.
//!
//! Exit codes are part of the contract:
//!
//! * `0` — success.
//! * `1` — usage: the command line itself is malformed (unknown flags,
//!   missing required arguments, conflicting options).
//! * `2` — validation: the inputs parse but fail validation — a malformed
//!   or invalid configuration document, unknown fields, out-of-range
//!   argument values.
//! * `3` — a runtime or analysis failure: unreadable files, malformed
//!   images, physics violations (aperture, bandwidth, detuning), frames
//!   in which no lattice could be measured.
//!
//! Every failure prints a single `error[CODE]: message` line to stderr,
//! where `CODE` is a stable machine-readable tag.

use crate::analysis::{
    analyze_frame, depth_modulation, period_constancy, AnalysisReport, AnalyzeOptions,
};
use crate::pgm::{frame_from_pgm, frame_to_pgm, PgmError};
use crate::rf::{
    calibrate_amplitudes, compile_program, detuning_check, emit_program, modulation_amplitude,
    AodId, RfError,
};
use crate::scene::{quarter_turn, Scene, SceneConfig, SceneError};
use crate::schedule::{flux_quanta_per_cell, validate_schedule, AtomSpec, ScheduleError};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "dynlat",
    version,
    about = "Synthesize, steer, compile, and analyze dynamic two-beam optical lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene's frames to 16-bit PGM images plus a manifest.
    Simulate(SimulateArgs),
    /// Measure lattice geometry from PGM frames.
    Analyze(AnalyzeArgs),
    /// Compile the scene's schedule into per-arm AOD drive programs.
    CompileRf(CompileRfArgs),
    /// Print the rotation figure of merit: flux quanta per lattice cell.
    Flux(FluxArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scene JSON document; omit for the reference scene (same as `{}`).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Number of frames to render, overriding the scene document.
    #[arg(long, value_name = "N")]
    frames: Option<usize>,
    /// Directory for frames and manifest (created if missing).
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Frame manifest written by `simulate`; frame paths resolve relative
    /// to it.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["pixel_size_m", "frames"])]
    manifest: Option<PathBuf>,
    /// Pixel size for bare PGM inputs, metres.
    #[arg(long, value_name = "METRES")]
    pixel_size_m: Option<f64>,
    /// Full-scale intensity for bare PGM inputs (manifest value otherwise).
    #[arg(long, value_name = "INTENSITY", default_value_t = 1.0)]
    full_scale: f64,
    /// Known envelope waist in metres; estimated from each frame if absent.
    #[arg(long, value_name = "METRES")]
    waist_m: Option<f64>,
    /// DC-exclusion radius override for peak finding, cycles/m.
    #[arg(long, value_name = "CYCLES_PER_M")]
    exclusion_radius: Option<f64>,
    /// PGM frames to analyze (when not using --manifest).
    #[arg(value_name = "FRAME.pgm")]
    frames: Vec<PathBuf>,
}

#[derive(Args)]
struct CompileRfArgs {
    /// Scene JSON document; omit for the reference scene.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for aod_a.csv / aod_b.csv (created if missing).
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct FluxArgs {
    /// Lattice rotation rate, revolutions per second.
    #[arg(long, value_name = "HZ")]
    rotation_hz: f64,
    /// Lattice period, micrometres.
    #[arg(long, value_name = "MICROMETRES")]
    period_um: f64,
    /// Atomic species label.
    #[arg(long, value_name = "LABEL", default_value = "rb87")]
    atom: String,
    /// Explicit atomic mass in kg, for species without a built-in label.
    #[arg(long, value_name = "KG", conflicts_with = "atom")]
    mass_kg: Option<f64>,
}

/// A formatted CLI failure: the message is already `error[CODE]: …`.
struct Failure {
    exit: i32,
    message: String,
}

impl Failure {
    fn new(exit: i32, code: &str, message: impl Display) -> Self {
        Failure {
            exit,
            message: format!("error[{code}]: {message}"),
        }
    }

    fn usage(message: impl Display) -> Self {
        Failure::new(EXIT_USAGE, "USAGE", message)
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure::new(EXIT_FAILURE, "IO", format!("{}: {err}", path.display()))
    }
}

impl From<SceneError> for Failure {
    fn from(err: SceneError) -> Self {
        let exit = if err.is_config_error() {
            EXIT_VALIDATION
        } else {
            EXIT_FAILURE
        };
        Failure::new(exit, err.code(), err)
    }
}

impl From<RfError> for Failure {
    fn from(err: RfError) -> Self {
        Failure::new(EXIT_FAILURE, err.code(), err)
    }
}

impl From<ScheduleError> for Failure {
    fn from(err: ScheduleError) -> Self {
        Failure::new(EXIT_FAILURE, err.code(), err)
    }
}

fn pgm_failure(path: &Path, err: PgmError) -> Failure {
    Failure::new(
        EXIT_FAILURE,
        err.code(),
        format!("{}: {err}", path.display()),
    )
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version surface as "errors" but are success paths.
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Analyze(args) => cmd_analyze(&args),
        Command::CompileRf(args) => cmd_compile_rf(&args),
        Command::Flux(args) => cmd_flux(&args),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("{}", failure.message);
            failure.exit
        }
    }
}

fn load_config(config_path: &Option<PathBuf>) -> Result<SceneConfig, Failure> {
    match config_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            Ok(SceneConfig::from_json(&text)?)
        }
        None => Ok(SceneConfig::default()),
    }
}

fn load_scene(config_path: &Option<PathBuf>) -> Result<Scene, Failure> {
    Ok(load_config(config_path)?.build()?)
}

/// The sidecar that makes a directory of PGM frames self-describing.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    /// Physical pixel side length, metres.
    pub pixel_size_m: f64,
    /// Pixels per frame side.
    pub grid_n: usize,
    /// Intensity mapped to the full 16-bit sample range.
    pub full_scale_intensity: f64,
    /// Envelope waist the frames were rendered with, metres.
    pub envelope_waist_m: f64,
    /// `(file name, timestamp seconds)` in render order.
    pub frames: Vec<(String, f64)>,
}

impl Manifest {
    /// Serializes the manifest (LF line endings, `#` comments allowed).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# frame manifest\n");
        out.push_str(&format!("pixel_size_m {}\n", self.pixel_size_m));
        out.push_str(&format!("grid_n {}\n", self.grid_n));
        out.push_str(&format!(
            "full_scale_intensity {}\n",
            self.full_scale_intensity
        ));
        out.push_str(&format!("envelope_waist_m {}\n", self.envelope_waist_m));
        for (name, t) in &self.frames {
            out.push_str(&format!("frame {name} {t}\n"));
        }
        out
    }

    /// Parses [`Manifest::to_text`] output.
    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut pixel_size_m = None;
        let mut grid_n = None;
        let mut full_scale = None;
        let mut waist = None;
        let mut frames = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or("");
            let context = |what: &str| format!("manifest line {}: {what}", idx + 1);
            let mut value = |what: &str| -> Result<String, String> {
                parts
                    .next()
                    .map(str::to_string)
                    .ok_or_else(|| context(&format!("missing {what}")))
            };
            match key {
                "pixel_size_m" => {
                    pixel_size_m = Some(
                        value("value")?
                            .parse::<f64>()
                            .map_err(|e| context(&e.to_string()))?,
                    )
                }
                "grid_n" => {
                    grid_n = Some(
                        value("value")?
                            .parse::<usize>()
                            .map_err(|e| context(&e.to_string()))?,
                    )
                }
                "full_scale_intensity" => {
                    full_scale = Some(
                        value("value")?
                            .parse::<f64>()
                            .map_err(|e| context(&e.to_string()))?,
                    )
                }
                "envelope_waist_m" => {
                    waist = Some(
                        value("value")?
                            .parse::<f64>()
                            .map_err(|e| context(&e.to_string()))?,
                    )
                }
                "frame" => {
                    let name = value("file name")?;
                    let t = value("timestamp")?
                        .parse::<f64>()
                        .map_err(|e| context(&e.to_string()))?;
                    frames.push((name, t));
                }
                other => return Err(context(&format!("unknown key {other:?}"))),
            }
        }
        Ok(Manifest {
            pixel_size_m: pixel_size_m.ok_or("manifest is missing pixel_size_m")?,
            grid_n: grid_n.ok_or("manifest is missing grid_n")?,
            full_scale_intensity: full_scale.ok_or("manifest is missing full_scale_intensity")?,
            envelope_waist_m: waist.ok_or("manifest is missing envelope_waist_m")?,
            frames,
        })
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32, Failure> {
    let mut config = load_config(&args.config)?;
    if let Some(frames) = args.frames {
        config.frames = frames;
    }
    let scene = config.build()?;
    fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let full_scale = scene.full_scale_intensity();
    let mut manifest = Manifest {
        pixel_size_m: scene.grid.pitch(),
        grid_n: scene.grid.n,
        full_scale_intensity: full_scale,
        envelope_waist_m: scene.config.waist_m,
        frames: Vec::new(),
    };
    for (index, t) in scene.frame_times().into_iter().enumerate() {
        let frame = scene.render_frame(t)?;
        let bytes = frame_to_pgm(&frame, full_scale)
            .map_err(|e| Failure::new(EXIT_FAILURE, e.code(), e))?;
        let name = format!("frame_{index:04}.pgm");
        let path = args.out.join(&name);
        fs::write(&path, bytes).map_err(|e| Failure::io(&path, e))?;
        println!("wrote {} t={t}", path.display());
        manifest.frames.push((name, t));
    }
    let manifest_path = args.out.join("manifest.txt");
    fs::write(&manifest_path, manifest.to_text()).map_err(|e| Failure::io(&manifest_path, e))?;
    println!("wrote {}", manifest_path.display());
    Ok(EXIT_OK)
}

/// One analyze record, matching the header
/// `frame,period_m,uncertainty_m,angle_rad,visibility`. Values print at
/// full precision (shortest round-trip form).
fn report_line(name: &str, report: &AnalysisReport) -> String {
    format!(
        "{name},{},{},{},{}",
        report.period, report.period_uncertainty, report.angle, report.visibility
    )
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32, Failure> {
    // (path, display name, timestamp, pixel size, full scale, waist)
    let mut inputs: Vec<(PathBuf, String, f64)> = Vec::new();
    let (pixel_size, full_scale, waist) = if let Some(manifest_path) = &args.manifest {
        let text =
            fs::read_to_string(manifest_path).map_err(|e| Failure::io(manifest_path, e))?;
        let manifest = Manifest::from_text(&text)
            .map_err(|msg| Failure::new(EXIT_FAILURE, "MANIFEST", msg))?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        for (name, t) in &manifest.frames {
            inputs.push((base.join(name), name.clone(), *t));
        }
        (
            manifest.pixel_size_m,
            manifest.full_scale_intensity,
            args.waist_m.or(Some(manifest.envelope_waist_m)),
        )
    } else {
        let pixel_size = args.pixel_size_m.ok_or_else(|| {
            Failure::usage("either --manifest or --pixel-size-m (with frame files) is required")
        })?;
        if args.frames.is_empty() {
            return Err(Failure::usage("no frames given"));
        }
        for (index, path) in args.frames.iter().enumerate() {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            inputs.push((path.clone(), name, index as f64));
        }
        (pixel_size, args.full_scale, args.waist_m)
    };
    if inputs.is_empty() {
        return Err(Failure::usage("the manifest lists no frames"));
    }
    let options = AnalyzeOptions {
        envelope_waist: waist,
        exclusion_radius: args.exclusion_radius,
    };
    println!("frame,period_m,uncertainty_m,angle_rad,visibility");
    let mut reports = Vec::new();
    let mut failed = 0usize;
    for (path, name, t) in &inputs {
        let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
        let frame =
            frame_from_pgm(&bytes, pixel_size, full_scale, *t).map_err(|e| pgm_failure(path, e))?;
        match analyze_frame(&frame, &options) {
            Ok(report) => {
                println!("{}", report_line(name, &report));
                reports.push(report);
            }
            Err(err) => {
                eprintln!("error[{}]: {name}: {err}", err.code());
                failed += 1;
            }
        }
    }
    let mut summary = format!(
        "summary frames={} analyzed={} failed={failed}",
        inputs.len(),
        reports.len()
    );
    if !reports.is_empty() {
        let periods: Vec<f64> = reports.iter().map(|r| r.period).collect();
        let depths: Vec<f64> = reports.iter().map(|r| r.modulation_depth).collect();
        let period_mean = periods.iter().sum::<f64>() / periods.len() as f64;
        let constancy = period_constancy(&periods)
            .map_err(|e| Failure::new(EXIT_FAILURE, e.code(), e))?;
        let modulation =
            depth_modulation(&depths).map_err(|e| Failure::new(EXIT_FAILURE, e.code(), e))?;
        summary.push_str(&format!(
            " period_mean_m={period_mean} period_constancy={constancy} \
             depth_modulation={modulation}"
        ));
    }
    println!("{summary}");
    Ok(if failed > 0 { EXIT_FAILURE } else { EXIT_OK })
}

fn cmd_compile_rf(args: &CompileRfArgs) -> Result<i32, Failure> {
    let scene = load_scene(&args.config)?;
    let rate = scene.config.update_rate_hz;
    let samples_a = scene.steering_samples()?;
    let diagnostics =
        validate_schedule(&samples_a, rate, scene.config.smoothness, &scene.lens)?;
    if !diagnostics.is_valid() {
        return Err(Failure::new(
            EXIT_FAILURE,
            "SCHEDULE",
            format!(
                "schedule fails validation: {} aperture violation(s), {} rough step(s); \
                 omega_max at this update rate and smoothness is {} rad/s",
                diagnostics.aperture_violations.len(),
                diagnostics.rough_steps.len(),
                diagnostics.omega_max
            ),
        ));
    }
    let samples_b = quarter_turn(&samples_a);
    let aod_a = scene.aod(AodId::A)?;
    let aod_b = scene.aod(AodId::B)?;
    let relay = scene.relay()?;
    let program_a = compile_program(&samples_a, &aod_a, &relay, rate, AodId::A)?;
    let program_b = compile_program(&samples_b, &aod_b, &relay, rate, AodId::B)?;
    let (program_a, _) = calibrate_amplitudes(&program_a, &aod_a)?;
    let (program_b, _) = calibrate_amplitudes(&program_b, &aod_b)?;
    let modulation_a = modulation_amplitude(&program_a, &aod_a);
    let modulation_b = modulation_amplitude(&program_b, &aod_b);
    let check = detuning_check(&aod_a, &aod_b, modulation_a, modulation_b);
    if !check.ok {
        return Err(Failure::new(
            EXIT_FAILURE,
            "DETUNING",
            format!(
                "arm carriers are {} Hz apart but the modulation requires more than {} Hz; \
                 separate the AOD centers or shrink the pattern",
                check.separation, check.required
            ),
        ));
    }
    fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    for (name, program) in [("aod_a.csv", &program_a), ("aod_b.csv", &program_b)] {
        let path = args.out.join(name);
        fs::write(&path, emit_program(program)).map_err(|e| Failure::io(&path, e))?;
        println!("wrote {} ({} ticks)", path.display(), program.ticks.len());
    }
    println!("modulation_a_hz={modulation_a} modulation_b_hz={modulation_b}");
    println!(
        "detuning separation_hz={} required_hz={} margin_hz={} ok=true",
        check.separation, check.required, check.margin
    );
    Ok(EXIT_OK)
}

fn cmd_flux(args: &FluxArgs) -> Result<i32, Failure> {
    let atom = match args.mass_kg {
        Some(mass) => AtomSpec {
            mass,
            label: "custom".to_string(),
        },
        None => AtomSpec::by_label(&args.atom).ok_or_else(|| {
            Failure::new(
                EXIT_VALIDATION,
                "ATOM",
                format!(
                    "unknown species {:?}; pass --mass-kg for other atoms",
                    args.atom
                ),
            )
        })?,
    };
    let omega = 2.0 * std::f64::consts::PI * args.rotation_hz;
    let period = args.period_um * 1e-6;
    // Bad numeric arguments fail validation, not the run.
    let n_phi = flux_quanta_per_cell(&atom, omega, period)
        .map_err(|e| Failure::new(EXIT_VALIDATION, e.code(), e))?;
    println!("n_phi={n_phi}");
    Ok(EXIT_OK)
}
