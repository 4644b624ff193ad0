//! Configuration file, flag overrides and the `swgate` subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_majority_gate, Channel, DeviceGeometry, GateNetlist, MicrowaveSettings, PropagationModel,
};
use crate::error::{Error, ErrorKind, Result};
use crate::experiment::{calibrate, run_switching, scaling_study, SwitchTiming};
use crate::logic::{
    cascade_check, full_adder, full_adder_on_gate, truth_table, GateReadout, PhaseEncoding,
};
use crate::physics::{BiasField, FilmParams, ModeContext, Orientation};
use crate::signal::DiodeDetector;
use num_complex::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Bvmsw,
    Mssw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    #[default]
    GroupDelay,
    Dispersive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilmConfig {
    pub preset: String,
    /// Explicit saturation magnetization; wins over `fmr_target_hz`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0_ms_t: Option<f64>,
    /// Ms is fitted so the FMR lands here at the configured field.
    pub fmr_target_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thickness_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linewidth_t: Option<f64>,
}

impl Default for FilmConfig {
    fn default() -> Self {
        FilmConfig {
            preset: "yig-5.4um".into(),
            mu0_ms_t: None,
            fmr_target_hz: 6.06e9,
            thickness_m: None,
            linewidth_t: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub mu0_h_t: f64,
    pub mode: Mode,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            mu0_h_t: 0.1429,
            mode: Mode::Bvmsw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub waveguide_width_m: f64,
    pub antenna_width_m: f64,
    pub input_lengths_m: [f64; 3],
    pub skew_lengths_m: [f64; 3],
    pub output_length_m: f64,
    pub bend_loss_db: f64,
    pub path_spread_m: f64,
    pub scale: f64,
    /// `[re, im]` per input channel.
    pub input_coupling: [[f64; 2]; 3],
    pub output_coupling: [f64; 2],
    pub crosstalk: [[f64; 2]; 3],
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig::from_geometry(&DeviceGeometry::default())
    }
}

impl GeometryConfig {
    pub fn from_geometry(g: &DeviceGeometry) -> Self {
        let c = |z: Complex<f64>| [z.re, z.im];
        GeometryConfig {
            waveguide_width_m: g.waveguide_width,
            antenna_width_m: g.antenna_width,
            input_lengths_m: g.input_lengths,
            skew_lengths_m: g.skew_lengths,
            output_length_m: g.output_length,
            bend_loss_db: g.bend_loss_db,
            path_spread_m: g.path_spread,
            scale: g.scale,
            input_coupling: g.input_coupling.map(c),
            output_coupling: c(g.output_coupling),
            crosstalk: g.crosstalk.map(c),
        }
    }

    pub fn geometry(&self) -> Result<DeviceGeometry> {
        let c = |z: [f64; 2]| Complex::new(z[0], z[1]);
        let g = DeviceGeometry {
            waveguide_width: self.waveguide_width_m,
            antenna_width: self.antenna_width_m,
            input_lengths: self.input_lengths_m,
            skew_lengths: self.skew_lengths_m,
            output_length: self.output_length_m,
            bend_loss_db: self.bend_loss_db,
            path_spread: self.path_spread_m,
            scale: self.scale,
            input_coupling: self.input_coupling.map(c),
            output_coupling: c(self.output_coupling),
            crosstalk: self.crosstalk.map(c),
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MicrowaveConfig {
    pub f_carrier_hz: f64,
    pub attenuation_db: [f64; 3],
    pub phase_shift_rad: [f64; 3],
    pub delay_line_phase_rad: f64,
    pub detector_cutoff_hz: f64,
    pub detector_responsivity: f64,
    pub reference_phase_rad: f64,
    /// Set by `calibrate`; commands calibrate on the fly otherwise.
    pub calibrated: bool,
}

impl Default for MicrowaveConfig {
    fn default() -> Self {
        let s = MicrowaveSettings::<f64>::default();
        MicrowaveConfig {
            f_carrier_hz: s.f_carrier,
            attenuation_db: s.attenuation_db,
            phase_shift_rad: s.phase_shift,
            delay_line_phase_rad: s.delay_line_phase,
            detector_cutoff_hz: s.detector.cutoff,
            detector_responsivity: s.detector.responsivity,
            reference_phase_rad: s.reference_phase,
            calibrated: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogicConfig {
    pub phi0_rad: f64,
    pub guard_rad: f64,
    pub amplitude_floor: f64,
    pub cascade_tolerance: f64,
}

impl Default for LogicConfig {
    fn default() -> Self {
        let e = PhaseEncoding::<f64>::default();
        LogicConfig {
            phi0_rad: e.phi0,
            guard_rad: e.guard,
            amplitude_floor: e.amplitude_floor,
            cascade_tolerance: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchingConfig {
    pub dt_s: f64,
    pub samples: usize,
    pub ramp_s: f64,
    /// Reference carrier phase relative to logic 0.
    pub ref_phase_rad: f64,
    pub toggle: bool,
    pub model: ModelChoice,
}

impl Default for SwitchingConfig {
    fn default() -> Self {
        let t = SwitchTiming::<f64>::default();
        SwitchingConfig {
            dt_s: t.dt,
            samples: t.samples,
            ramp_s: t.ramp,
            ref_phase_rad: std::f64::consts::PI,
            toggle: t.toggle,
            model: ModelChoice::GroupDelay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    pub k_min_rad_per_m: f64,
    pub k_max_rad_per_m: f64,
    pub points: usize,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        DispersionConfig {
            k_min_rad_per_m: 0.0,
            k_max_rad_per_m: 1e5,
            points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmissionConfig {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub points: usize,
    pub floor_db: f64,
}

impl Default for TransmissionConfig {
    fn default() -> Self {
        TransmissionConfig {
            f_min_hz: 3.8e9,
            f_max_hz: 6.5e9,
            points: 541,
            floor_db: -80.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub scales: Vec<f64>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            scales: vec![1.0, 0.5, 0.2, 0.1, 0.05],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
        }
    }
}

/// Everything a command needs. Missing sections and keys fall back to the
/// default operating point; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub film: FilmConfig,
    pub field: FieldConfig,
    pub geometry: GeometryConfig,
    pub microwave: MicrowaveConfig,
    pub logic: LogicConfig,
    pub switching: SwitchingConfig,
    pub dispersion: DispersionConfig,
    pub transmission: TransmissionConfig,
    pub scaling: ScalingConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.mode {
            self.field.mode = m;
        }
        if let Some(fc) = o.fc {
            self.microwave.f_carrier_hz = fc;
        }
        if let Some(h) = o.field {
            self.field.mu0_h_t = h;
        }
        if let Some(s) = o.scale {
            self.geometry.scale = s;
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
    }

    pub fn context(&self) -> Result<ModeContext> {
        let base = match self.film.preset.as_str() {
            "yig-5.4um" => FilmParams::yig_5_4um(),
            other => return Err(Error::Config(format!("unknown film preset `{other}`"))),
        };
        let film = FilmParams::new(
            base.ms,
            self.film.thickness_m.unwrap_or(base.thickness),
            base.gamma,
            self.film.linewidth_t.unwrap_or(base.linewidth),
            base.label,
        )?;
        let orientation = match self.field.mode {
            Mode::Bvmsw => Orientation::Parallel,
            Mode::Mssw => Orientation::Perpendicular,
        };
        let ctx = ModeContext::new(film, BiasField::new(self.field.mu0_h_t, orientation)?);
        match self.film.mu0_ms_t {
            Some(m) => Ok(ModeContext::new(
                ctx.film.clone().with_mu0_ms(m)?,
                ctx.field,
            )),
            None => ctx.with_fmr(self.film.fmr_target_hz),
        }
    }

    pub fn settings(&self, with_switch: bool) -> MicrowaveSettings {
        let m = &self.microwave;
        MicrowaveSettings {
            f_carrier: m.f_carrier_hz,
            attenuation_db: m.attenuation_db,
            phase_shift: m.phase_shift_rad,
            switch_on_i2: with_switch,
            switch_delayed: false,
            delay_line_phase: m.delay_line_phase_rad,
            detector: DiodeDetector {
                cutoff: m.detector_cutoff_hz,
                responsivity: m.detector_responsivity,
            },
            reference_phase: m.reference_phase_rad,
        }
    }

    /// The configured netlist, calibrated unless the config says it already is.
    pub fn netlist(&self, with_switch: bool) -> Result<GateNetlist> {
        let n = build_majority_gate(
            &self.geometry.geometry()?,
            &self.context()?,
            &self.settings(with_switch),
        )?;
        if self.microwave.calibrated {
            Ok(n)
        } else {
            Ok(calibrate(&n)?.netlist)
        }
    }

    pub fn encoding(&self) -> Result<PhaseEncoding> {
        Ok(PhaseEncoding {
            amplitude_floor: self.logic.amplitude_floor,
            ..PhaseEncoding::new(self.logic.phi0_rad, self.logic.guard_rad)?
        })
    }

    pub fn timing(&self) -> SwitchTiming {
        let s = &self.switching;
        SwitchTiming {
            dt: s.dt_s,
            samples: s.samples,
            ramp: s.ramp_s,
            toggle: s.toggle,
            model: match s.model {
                ModelChoice::GroupDelay => PropagationModel::GroupDelay,
                ModelChoice::Dispersive => PropagationModel::Dispersive,
            },
        }
    }
}

/// Flags shared by every subcommand; they win over the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Carrier frequency, Hz.
    #[arg(long, global = true)]
    pub fc: Option<f64>,
    /// Bias field mu0*H, T.
    #[arg(long, global = true)]
    pub field: Option<f64>,
    /// Multiplier on every path length.
    #[arg(long, global = true)]
    pub scale: Option<f64>,
    /// Accepted for scripts; the simulator never draws random numbers.
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Debug, Parser)]
#[command(name = "swgate", version, about = "Spin-wave majority gate simulator")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Tabulate f(k) and v_g(k).
    Dispersion,
    /// Per-channel transmission spectra.
    Transmission,
    /// Eight-state majority truth table.
    Truthtable,
    /// Switching experiment and rise time.
    Switch,
    /// Calibrate attenuators and phase shifters; writes a reusable config.
    Calibrate,
    /// Full adder from three majority gates.
    Fulladder,
    /// Rise time versus device scale.
    Scale,
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Config | ErrorKind::Io => 2,
        ErrorKind::Physics => 3,
        ErrorKind::Logic => 4,
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn e(x: f64) -> String {
    format!("{x:e}")
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) {
        return Err(Error::Config(
            "grid needs at least 2 points and max > min".into(),
        ));
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

/// Load the config, apply flag overrides and run `command`. Returns the
/// one-line summary on success.
pub fn run(cli: &Cli) -> Result<String> {
    let mut cfg = match &cli.overrides.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&cli.overrides);
    execute(&cfg, cli.command)
}

pub fn execute(cfg: &RunConfig, command: Command) -> Result<String> {
    let dir = cfg.output.dir.as_path();
    match command {
        Command::Dispersion => cmd_dispersion(cfg, dir),
        Command::Transmission => cmd_transmission(cfg, dir),
        Command::Truthtable => cmd_truthtable(cfg, dir),
        Command::Switch => cmd_switch(cfg, dir),
        Command::Calibrate => cmd_calibrate(cfg, dir),
        Command::Fulladder => cmd_fulladder(cfg, dir),
        Command::Scale => cmd_scale(cfg, dir),
    }
}

fn cmd_dispersion(cfg: &RunConfig, dir: &Path) -> Result<String> {
    let ctx = cfg.context()?;
    let d = &cfg.dispersion;
    let ks = grid(d.k_min_rad_per_m, d.k_max_rad_per_m, d.points)?;
    let mut w = create(dir, "dispersion.csv")?;
    writeln!(w, "k_rad_per_m,f_hz,vg_m_per_s")?;
    for &k in &ks {
        writeln!(
            w,
            "{},{},{}",
            e(k),
            e(ctx.dispersion(k)?),
            e(ctx.group_velocity(k)?)
        )?;
    }
    w.flush()?;
    let (lo, hi) = ctx.band();
    Ok(format!(
        "dispersion points={} f_fmr_hz={} band_lo_hz={} band_hi_hz={}",
        ks.len(),
        e(ctx.fmr_frequency()),
        e(lo),
        e(hi)
    ))
}

fn cmd_transmission(cfg: &RunConfig, dir: &Path) -> Result<String> {
    let n = build_majority_gate(
        &cfg.geometry.geometry()?,
        &cfg.context()?,
        &cfg.settings(false),
    )?;
    let t = &cfg.transmission;
    let fs = grid(t.f_min_hz, t.f_max_hz, t.points)?;
    let mut at_fc = Vec::new();
    for ch in Channel::ALL {
        let mut w = create(dir, &format!("transmission_{ch}.csv"))?;
        writeln!(w, "f_Hz,s21_dB")?;
        for (f, db) in n.transmission_spectrum(ch, &fs, t.floor_db)? {
            writeln!(w, "{},{}", e(f), e(db))?;
        }
        w.flush()?;
        let g = n.channel_transfer(ch, n.f_carrier()).norm();
        at_fc.push(if g > 0.0 {
            20.0 * g.log10()
        } else {
            t.floor_db
        });
    }
    Ok(format!(
        "transmission points={} s21_fc_db_i1={} s21_fc_db_i2={} s21_fc_db_i3={}",
        fs.len(),
        e(at_fc[0]),
        e(at_fc[1]),
        e(at_fc[2])
    ))
}

fn cmd_truthtable(cfg: &RunConfig, dir: &Path) -> Result<String> {
    let n = cfg.netlist(false)?;
    let t = truth_table(&n, &cfg.encoding()?);
    let mut w = create(dir, "truthtable.csv")?;
    t.write_csv(&mut w)?;
    w.flush()?;
    let correct = t.rows.iter().filter(|r| r.correct()).count();
    let summary = format!(
        "truthtable correct={correct}/8 min_margin_rad={} amplitude_ratio={} flags={}",
        e(t.min_margin()),
        e(t.amplitude_ratio()),
        t.flags.len()
    );
    if let Some(bad) = t.rows.iter().find(|r| !r.correct()) {
        return Err(Error::IndeterminateLogic {
            state: format!("{} ({summary})", bad.state),
        });
    }
    Ok(summary)
}

fn cmd_switch(cfg: &RunConfig, dir: &Path) -> Result<String> {
    let n = cfg.netlist(true)?;
    let r = run_switching(
        &n,
        &cfg.encoding()?,
        cfg.switching.ref_phase_rad,
        &cfg.timing(),
    )?;
    let mut w = create(dir, "switch_trace.csv")?;
    r.trace.write_csv(&mut w)?;
    w.flush()?;
    Ok(format!(
        "switch t_rise_s={} f_clock_hz={} v_low={} v_max={} path_spread_m={} scale={}",
        e(r.t_rise),
        e(r.f_clock),
        e(r.levels.0),
        e(r.levels.1),
        e(n.geometry().path_spread),
        e(n.geometry().scale)
    ))
}

fn cmd_calibrate(cfg: &RunConfig, dir: &Path) -> Result<String> {
    let raw = build_majority_gate(
        &cfg.geometry.geometry()?,
        &cfg.context()?,
        &cfg.settings(false),
    )?;
    let cal = calibrate(&raw)?;
    let mut out = cfg.clone();
    out.microwave.attenuation_db = cal.attenuator_db;
    out.microwave.phase_shift_rad = cal.phase_offsets;
    out.microwave.reference_phase_rad = cal.netlist.settings().reference_phase;
    out.microwave.calibrated = true;
    let mut w = create(dir, "calibrated.toml")?;
    w.write_all(out.to_toml()?.as_bytes())?;
    w.flush()?;
    let a = cal.attenuator_db;
    let p = cal.phase_offsets;
    Ok(format!(
        "calibrate attenuation_db=[{},{},{}] phase_rad=[{},{},{}] imbalance={} phase_error_rad={}",
        e(a[0]),
        e(a[1]),
        e(a[2]),
        e(p[0]),
        e(p[1]),
        e(p[2]),
        e(cal.residual_amplitude_imbalance),
        e(cal.residual_phase_error)
    ))
}

fn cmd_fulladder(cfg: &RunConfig, dir: &Path) -> Result<String> {
    let n = cfg.netlist(false)?;
    let enc = cfg.encoding()?;
    let readouts: Vec<GateReadout> = truth_table(&n, &enc)
        .rows
        .iter()
        .map(|r| r.readout)
        .collect();
    let cascade = cascade_check(&readouts, cfg.logic.cascade_tolerance)?;
    let mut w = create(dir, "fulladder.csv")?;
    writeln!(
        w,
        "a,b,cin,sum,cout,expected_sum,expected_cout,amp_carry,amp_inner,amp_sum,amp_spread"
    )?;
    let mut matches = 0;
    for bits in 0..8u8 {
        let (a, b, c) = (bits & 4 != 0, bits & 2 != 0, bits & 1 != 0);
        let g = full_adder_on_gate(&n, &enc, a, b, c)?;
        let want = full_adder(a, b, c);
        if g.sum.bit() == Some(want.sum)
            && g.cout.bit() == Some(want.cout)
            && (want.sum as u8 + 2 * want.cout as u8) == (a as u8 + b as u8 + c as u8)
        {
            matches += 1;
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            a as u8,
            b as u8,
            c as u8,
            g.sum,
            g.cout,
            want.sum as u8,
            want.cout as u8,
            e(g.gates[0].amplitude),
            e(g.gates[1].amplitude),
            e(g.gates[2].amplitude),
            e(cascade.spread)
        )?;
    }
    w.flush()?;
    let summary = format!(
        "fulladder matches={matches}/8 amp_spread={} cascadable={}",
        e(cascade.spread),
        cascade.cascadable
    );
    if matches != 8 {
        return Err(Error::IndeterminateLogic { state: summary });
    }
    Ok(summary)
}

fn cmd_scale(cfg: &RunConfig, dir: &Path) -> Result<String> {
    let n = cfg.netlist(true)?;
    let table = scaling_study(
        &n,
        &cfg.encoding()?,
        cfg.switching.ref_phase_rad,
        &cfg.scaling.scales,
        &cfg.timing(),
    )?;
    let mut w = create(dir, "scale.csv")?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let (slope, intercept, r2) = table.linear_fit().unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    let flagged = table.rows.iter().filter(|r| r.flag.is_some()).count();
    Ok(format!(
        "scale rows={} flagged={flagged} floor_s={} slope_s={} intercept_s={} r2={}",
        table.rows.len(),
        e(table.floor),
        e(slope),
        e(intercept),
        e(r2)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_operating_point() {
        let c = RunConfig::default();
        assert_eq!(c.field.mu0_h_t, 0.1429);
        assert_eq!(c.microwave.f_carrier_hz, 6.035e9);
        assert_eq!(c.field.mode, Mode::Bvmsw);
        let ctx = c.context().unwrap();
        assert!((ctx.fmr_frequency() - 6.06e9).abs() < 1.0);
        assert!(ctx.in_band(c.microwave.f_carrier_hz));
    }

    #[test]
    fn toml_round_trip() {
        let mut c = RunConfig::default();
        c.film.mu0_ms_t = Some(0.18);
        c.microwave.phase_shift_rad = [0.1, -0.2, 3.0];
        c.switching.model = ModelChoice::Dispersive;
        let text = c.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[field]\nmu0_h_t = 0.1\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml("[nonsense]\n").is_err());
        let partial = RunConfig::from_toml("[microwave]\nf_carrier_hz = 6.0e9\n").unwrap();
        assert_eq!(partial.microwave.f_carrier_hz, 6.0e9);
        assert_eq!(partial.field, FieldConfig::default());
    }

    #[test]
    fn invalid_physics_values_fail_validation() {
        let mut c = RunConfig::default();
        c.field.mu0_h_t = -1.0;
        assert_eq!(c.context().unwrap_err().kind(), ErrorKind::Config);
        let mut c = RunConfig::default();
        c.geometry.scale = 0.0;
        assert!(c.geometry.geometry().is_err());
        let mut c = RunConfig::default();
        c.film.preset = "permalloy".into();
        assert!(c.context().is_err());
    }

    #[test]
    fn overrides_win() {
        let mut c = RunConfig::default();
        c.apply(&Overrides {
            mode: Some(Mode::Mssw),
            fc: Some(6.2e9),
            field: Some(0.15),
            scale: Some(0.5),
            ..Overrides::default()
        });
        assert_eq!(c.field.mode, Mode::Mssw);
        assert_eq!(c.microwave.f_carrier_hz, 6.2e9);
        assert_eq!(c.field.mu0_h_t, 0.15);
        assert_eq!(c.geometry.scale, 0.5);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::NoTransition), 3);
        assert_eq!(
            exit_code(&Error::IndeterminateLogic {
                state: "000".into()
            }),
            4
        );
    }
}
