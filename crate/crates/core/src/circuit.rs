//! Two-port netlist of the gate: microwave conditioning per input channel,
//! stripline transducers, waveguide arms, skew bends, the combiner and the
//! shared output arm.
//!
//! A netlist is immutable once built. The setters used by calibration return
//! adjusted copies.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::physics::{BiasField, FilmParams, ModeContext, Orientation};
use crate::scalar::{sinc, Scalar};
use crate::signal::{DiodeDetector, TransferFunction};

/// Effective path-length spread of the combiner (m) that reproduces the
/// measured 11.3 ns switching rise time at the default operating point.
/// Obtained with [`crate::experiment::fit_path_spread`].
pub const DEFAULT_PATH_SPREAD: f64 = 1.289_812_233_671_546e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    I1,
    I2,
    I3,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::I1, Channel::I2, Channel::I3];

    pub fn index(self) -> usize {
        match self {
            Channel::I1 => 0,
            Channel::I2 => 1,
            Channel::I3 => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        ["i1", "i2", "i3"][self.index()]
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i1" => Ok(Channel::I1),
            "i2" => Ok(Channel::I2),
            "i3" => Ok(Channel::I3),
            _ => Err(Error::Config(format!("unknown channel `{s}`"))),
        }
    }
}

/// Device layout. Path lengths are multiplied by `scale` when a netlist is
/// built; widths are not.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceGeometry<T: Scalar = f64> {
    pub waveguide_width: T,
    pub antenna_width: T,
    /// Antenna to skew, per input arm.
    pub input_lengths: [T; 3],
    /// Skew section per input arm; zero means a straight arm without a bend.
    pub skew_lengths: [T; 3],
    /// Combiner to output antenna.
    pub output_length: T,
    pub bend_loss_db: T,
    /// Spread of effective path lengths through the combiner, m.
    pub path_spread: T,
    pub scale: T,
    /// Complex excitation efficiency of each input stripline.
    pub input_coupling: [Complex<T>; 3],
    pub output_coupling: Complex<T>,
    /// Direct electromagnetic pickup from each input stripline at the output.
    pub crosstalk: [Complex<T>; 3],
}

impl<T: Scalar> Default for DeviceGeometry<T> {
    fn default() -> Self {
        let mm = |x: f64| T::lit(x * 1e-3);
        let c = |x: f64| Complex::new(T::lit(x), T::zero());
        DeviceGeometry {
            waveguide_width: mm(1.5),
            antenna_width: T::lit(75e-6),
            input_lengths: [mm(10.0); 3],
            skew_lengths: [mm(6.0), T::zero(), mm(6.0)],
            output_length: mm(10.0),
            bend_loss_db: T::lit(3.0),
            path_spread: T::lit(DEFAULT_PATH_SPREAD),
            scale: T::one(),
            input_coupling: [c(0.85), c(1.0), c(0.6)],
            output_coupling: c(1.0),
            crosstalk: [c(0.0); 3],
        }
    }
}

impl<T: Scalar> DeviceGeometry<T> {
    /// Three identical straight arms with unit coupling and no path spread.
    pub fn symmetric() -> Self {
        let one = Complex::new(T::one(), T::zero());
        DeviceGeometry {
            skew_lengths: [T::zero(); 3],
            input_coupling: [one; 3],
            path_spread: T::zero(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &'static str, v: T| {
            if v >= T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ))
            }
        };
        nonneg("waveguide_width", self.waveguide_width)?;
        nonneg("antenna_width", self.antenna_width)?;
        for i in 0..3 {
            nonneg("input_lengths", self.input_lengths[i])?;
            nonneg("skew_lengths", self.skew_lengths[i])?;
        }
        nonneg("output_length", self.output_length)?;
        nonneg("bend_loss_db", self.bend_loss_db)?;
        nonneg("path_spread", self.path_spread)?;
        if !(self.scale > T::zero()) || !self.scale.is_finite() {
            return Err(Error::invalid(
                "scale",
                format!("must be > 0, got {}", self.scale),
            ));
        }
        Ok(())
    }

    pub fn scaled_by(&self, factor: T) -> Self {
        DeviceGeometry {
            scale: self.scale * factor,
            ..self.clone()
        }
    }
}

/// Operator-side settings of the microwave chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrowaveSettings<T: Scalar = f64> {
    pub f_carrier: T,
    pub attenuation_db: [T; 3],
    pub phase_shift: [T; 3],
    /// Insert the fast switch and delay line into i2.
    pub switch_on_i2: bool,
    pub switch_delayed: bool,
    /// Phase of the delay line at the carrier, rad.
    pub delay_line_phase: T,
    pub detector: DiodeDetector<T>,
    /// Output phase read as logic 0. Set by phase calibration.
    pub reference_phase: T,
}

impl<T: Scalar> Default for MicrowaveSettings<T> {
    fn default() -> Self {
        MicrowaveSettings {
            f_carrier: T::lit(6.035e9),
            attenuation_db: [T::zero(); 3],
            phase_shift: [T::zero(); 3],
            switch_on_i2: false,
            switch_delayed: false,
            delay_line_phase: T::PI(),
            detector: DiodeDetector::default(),
            reference_phase: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Component<T: Scalar = f64> {
    Source,
    Splitter {
        ways: usize,
    },
    Attenuator {
        db: T,
    },
    PhaseShifter {
        phase: T,
    },
    /// Routes the signal through the following delay line when `delayed`.
    Switch {
        delayed: bool,
    },
    /// True time delay whose phase at the carrier is `phase`.
    DelayLine {
        phase: T,
    },
    TransducerIn {
        width: T,
        coupling: Complex<T>,
    },
    WaveguideSegment {
        length: T,
    },
    Bend {
        loss_db: T,
    },
    Combiner {
        path_spread: T,
    },
    TransducerOut {
        width: T,
        coupling: Complex<T>,
    },
    DiodeDetector {
        cutoff: T,
        responsivity: T,
    },
}

impl<T: Scalar> Component<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Component::Source => "Source",
            Component::Splitter { .. } => "Splitter",
            Component::Attenuator { .. } => "Attenuator",
            Component::PhaseShifter { .. } => "PhaseShifter",
            Component::Switch { .. } => "Switch",
            Component::DelayLine { .. } => "DelayLine",
            Component::TransducerIn { .. } => "TransducerIn",
            Component::WaveguideSegment { .. } => "WaveguideSegment",
            Component::Bend { .. } => "Bend",
            Component::Combiner { .. } => "Combiner",
            Component::TransducerOut { .. } => "TransducerOut",
            Component::DiodeDetector { .. } => "DiodeDetector",
        }
    }

    fn params(&self) -> Vec<(&'static str, T)> {
        match self {
            Component::Source => vec![],
            Component::Splitter { ways } => vec![("ways", T::from_usize_lossy(*ways))],
            Component::Attenuator { db } => vec![("db", *db)],
            Component::PhaseShifter { phase } => vec![("phase_rad", *phase)],
            Component::Switch { delayed } => {
                vec![("delayed", if *delayed { T::one() } else { T::zero() })]
            }
            Component::DelayLine { phase } => vec![("phase_rad", *phase)],
            Component::TransducerIn { width, coupling }
            | Component::TransducerOut { width, coupling } => {
                vec![
                    ("width_m", *width),
                    ("coupling_re", coupling.re),
                    ("coupling_im", coupling.im),
                ]
            }
            Component::WaveguideSegment { length } => vec![("length_m", *length)],
            Component::Bend { loss_db } => vec![("loss_db", *loss_db)],
            Component::Combiner { path_spread } => vec![("path_spread_m", *path_spread)],
            Component::DiodeDetector {
                cutoff,
                responsivity,
            } => vec![("cutoff_hz", *cutoff), ("responsivity", *responsivity)],
        }
    }

    fn from_parts(kind: &str, p: &BTreeMap<String, T>) -> Result<Self> {
        let get = |k: &str| {
            p.get(k)
                .copied()
                .ok_or_else(|| Error::Config(format!("{kind} is missing `{k}`")))
        };
        let allowed: &[&str] = match kind {
            "Source" => &[],
            "Splitter" => &["ways"],
            "Attenuator" => &["db"],
            "PhaseShifter" | "DelayLine" => &["phase_rad"],
            "Switch" => &["delayed"],
            "TransducerIn" | "TransducerOut" => &["width_m", "coupling_re", "coupling_im"],
            "WaveguideSegment" => &["length_m"],
            "Bend" => &["loss_db"],
            "Combiner" => &["path_spread_m"],
            "DiodeDetector" => &["cutoff_hz", "responsivity"],
            other => return Err(Error::Config(format!("unknown component kind `{other}`"))),
        };
        if let Some(extra) = p.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key `{extra}` for {kind}")));
        }
        Ok(match kind {
            "Source" => Component::Source,
            "Splitter" => Component::Splitter {
                ways: get("ways")?.round().to_usize().unwrap_or(1).max(1),
            },
            "Attenuator" => Component::Attenuator { db: get("db")? },
            "PhaseShifter" => Component::PhaseShifter {
                phase: get("phase_rad")?,
            },
            "Switch" => Component::Switch {
                delayed: get("delayed")? != T::zero(),
            },
            "DelayLine" => Component::DelayLine {
                phase: get("phase_rad")?,
            },
            "TransducerIn" => Component::TransducerIn {
                width: get("width_m")?,
                coupling: Complex::new(get("coupling_re")?, get("coupling_im")?),
            },
            "TransducerOut" => Component::TransducerOut {
                width: get("width_m")?,
                coupling: Complex::new(get("coupling_re")?, get("coupling_im")?),
            },
            "WaveguideSegment" => Component::WaveguideSegment {
                length: get("length_m")?,
            },
            "Bend" => Component::Bend {
                loss_db: get("loss_db")?,
            },
            "Combiner" => Component::Combiner {
                path_spread: get("path_spread_m")?,
            },
            _ => Component::DiodeDetector {
                cutoff: get("cutoff_hz")?,
                responsivity: get("responsivity")?,
            },
        })
    }

    fn validate(&self) -> Result<()> {
        let bad = |name: &'static str| Err(Error::invalid(name, "must be finite and >= 0"));
        match self {
            Component::Attenuator { db } if !(*db >= T::zero()) => bad("attenuation_db"),
            Component::Bend { loss_db } if !(*loss_db >= T::zero()) => bad("bend_loss_db"),
            Component::WaveguideSegment { length } if !(*length >= T::zero()) => {
                bad("segment length")
            }
            Component::Combiner { path_spread } if !(*path_spread >= T::zero()) => {
                bad("path_spread")
            }
            Component::Splitter { ways: 0 } => Err(Error::invalid("splitter ways", "must be >= 1")),
            _ => Ok(()),
        }
    }
}

/// `10^(-db/20)`.
pub fn db_to_amplitude<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(-db / T::lit(20.0))
}

/// Inductive stripline selectivity: `coupling * sinc(k w / 2)`, zero outside
/// the propagating band.
pub fn transducer_efficiency<T: Scalar>(
    ctx: &ModeContext<T>,
    width: T,
    coupling: Complex<T>,
    f: T,
) -> Complex<T> {
    match ctx.solve_k(f) {
        Ok(k) => coupling * sinc(k * width * T::half()),
        Err(_) => Complex::new(T::zero(), T::zero()),
    }
}

/// Propagation over `length` of a waveguide.
///
/// The phase is `-k(f_c) L` at the carrier and accumulates the group delay
/// `L / |v_g|` away from it, so both branches delay the envelope by a
/// positive amount. Amplitude decays as `exp(-eta L / |v_g(f)|)`; stopband
/// frequencies return zero. If the carrier itself is outside the band its
/// wavenumber is taken as zero.
pub fn waveguide_transfer<T: Scalar>(
    ctx: &ModeContext<T>,
    length: T,
    f_carrier: T,
    f: T,
) -> Complex<T> {
    if length == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    let k0 = ctx.solve_k(f_carrier).unwrap_or(T::zero());
    match ctx.solve_k(f) {
        Ok(k) => segment_gain(ctx, length, k0, k),
        Err(_) => Complex::new(T::zero(), T::zero()),
    }
}

fn segment_gain<T: Scalar>(ctx: &ModeContext<T>, length: T, k0: T, k: T) -> Complex<T> {
    let forward = if ctx.orientation() == Orientation::Perpendicular {
        T::one()
    } else {
        -T::one()
    };
    let phase = -k0 * length - forward * (k - k0) * length;
    let vg = ctx.group_velocity(k).map(|v| v.abs()).unwrap_or(T::zero());
    let eta = ctx.damping_rate();
    let mag = if eta == T::zero() {
        T::one()
    } else if vg > T::zero() {
        (-eta * length / vg).exp()
    } else {
        T::zero()
    };
    Complex::from_polar(mag, phase)
}

/// Delay-spread response of the combiner: the mean of `exp(-(i 2pi df + eta) l / v0)`
/// over path lengths `l` in `[0, spread]`.
pub fn spread_gain<T: Scalar>(spread: T, v0: T, eta: T, df: T) -> Complex<T> {
    if spread == T::zero() || !(v0 > T::zero()) {
        return Complex::new(T::one(), T::zero());
    }
    let z = Complex::new(eta, T::two_pi() * df) * (spread / v0);
    if z.norm() < T::lit(1e-6) {
        // (1 - e^{-z}) / z = 1 - z/2 + z^2/6
        let one = Complex::new(T::one(), T::zero());
        return one - z * T::half() + z * z / T::lit(6.0);
    }
    (Complex::new(T::one(), T::zero()) - (-z).exp()) / z
}

/// How envelopes see the propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagationModel {
    /// Carrier gain plus a constant group delay per element (first order
    /// about the carrier), with the combiner delay spread on top.
    #[default]
    GroupDelay,
    /// Full per-frequency evaluation of every element.
    Dispersive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct CarrierPoint<T: Scalar> {
    k: T,
    /// |v_g| at the carrier.
    speed: T,
}

/// The full gate: three input chains merging into one output chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GateNetlist<T: Scalar = f64> {
    inputs: [Vec<Component<T>>; 3],
    output: Vec<Component<T>>,
    geometry: DeviceGeometry<T>,
    ctx: ModeContext<T>,
    settings: MicrowaveSettings<T>,
    carrier: Option<CarrierPoint<T>>,
}

/// Assemble the netlist for `geometry` operated with `settings`.
pub fn build_majority_gate<T: Scalar>(
    geometry: &DeviceGeometry<T>,
    ctx: &ModeContext<T>,
    settings: &MicrowaveSettings<T>,
) -> Result<GateNetlist<T>> {
    geometry.validate()?;
    if !(settings.f_carrier > T::zero()) {
        return Err(Error::invalid("f_carrier", "must be > 0"));
    }
    let g = geometry;
    let s = g.scale;
    let inputs = [0, 1, 2].map(|i| {
        let mut chain = vec![
            Component::Source,
            Component::Splitter { ways: 3 },
            Component::Attenuator {
                db: settings.attenuation_db[i],
            },
            Component::PhaseShifter {
                phase: settings.phase_shift[i],
            },
        ];
        if i == 1 && settings.switch_on_i2 {
            chain.push(Component::Switch {
                delayed: settings.switch_delayed,
            });
            chain.push(Component::DelayLine {
                phase: settings.delay_line_phase,
            });
        }
        chain.push(Component::TransducerIn {
            width: g.antenna_width,
            coupling: g.input_coupling[i],
        });
        chain.push(Component::WaveguideSegment {
            length: g.input_lengths[i] * s,
        });
        if g.skew_lengths[i] > T::zero() {
            chain.push(Component::Bend {
                loss_db: g.bend_loss_db,
            });
            chain.push(Component::WaveguideSegment {
                length: g.skew_lengths[i] * s,
            });
        }
        chain.push(Component::Combiner {
            path_spread: g.path_spread * s,
        });
        chain
    });
    let output = vec![
        Component::WaveguideSegment {
            length: g.output_length * s,
        },
        Component::TransducerOut {
            width: g.antenna_width,
            coupling: g.output_coupling,
        },
        Component::DiodeDetector {
            cutoff: settings.detector.cutoff,
            responsivity: settings.detector.responsivity,
        },
    ];
    GateNetlist::from_parts(
        inputs,
        output,
        geometry.clone(),
        ctx.clone(),
        settings.clone(),
    )
}

impl<T: Scalar> GateNetlist<T> {
    fn from_parts(
        inputs: [Vec<Component<T>>; 3],
        output: Vec<Component<T>>,
        geometry: DeviceGeometry<T>,
        ctx: ModeContext<T>,
        settings: MicrowaveSettings<T>,
    ) -> Result<Self> {
        for chain in &inputs {
            if !matches!(chain.first(), Some(Component::Source))
                || !matches!(chain.last(), Some(Component::Combiner { .. }))
            {
                return Err(Error::Config(
                    "each input chain must run from Source to Combiner".into(),
                ));
            }
            for c in chain.iter() {
                c.validate()?;
            }
        }
        for c in &output {
            c.validate()?;
        }
        let carrier = ctx.solve_k(settings.f_carrier).ok().and_then(|k| {
            let speed = ctx.group_velocity(k).ok()?.abs();
            Some(CarrierPoint { k, speed })
        });
        Ok(GateNetlist {
            inputs,
            output,
            geometry,
            ctx,
            settings,
            carrier,
        })
    }

    pub fn geometry(&self) -> &DeviceGeometry<T> {
        &self.geometry
    }

    pub fn context(&self) -> &ModeContext<T> {
        &self.ctx
    }

    pub fn settings(&self) -> &MicrowaveSettings<T> {
        &self.settings
    }

    pub fn f_carrier(&self) -> T {
        self.settings.f_carrier
    }

    pub fn input_chain(&self, ch: Channel) -> &[Component<T>] {
        &self.inputs[ch.index()]
    }

    pub fn output_chain(&self) -> &[Component<T>] {
        &self.output
    }

    /// True when the carrier lies in the propagating band.
    pub fn carrier_in_band(&self) -> bool {
        self.carrier.is_some()
    }

    /// Wavenumber at the carrier, if it propagates.
    pub fn carrier_wavenumber(&self) -> Option<T> {
        self.carrier.map(|c| c.k)
    }

    /// Rebuild with a different geometry, keeping physics and settings.
    pub fn with_geometry(&self, geometry: &DeviceGeometry<T>) -> Result<Self> {
        build_majority_gate(geometry, &self.ctx, &self.settings)
    }

    pub fn with_context(&self, ctx: &ModeContext<T>) -> Result<Self> {
        build_majority_gate(&self.geometry, ctx, &self.settings)
    }

    pub fn with_settings(&self, settings: &MicrowaveSettings<T>) -> Result<Self> {
        build_majority_gate(&self.geometry, &self.ctx, settings)
    }

    fn edit(&self, ch: Channel, mut f: impl FnMut(&mut Component<T>)) -> Self {
        let mut out = self.clone();
        for c in out.inputs[ch.index()].iter_mut() {
            f(c);
        }
        out
    }

    pub fn with_attenuation(&self, ch: Channel, db: T) -> Result<Self> {
        if !(db >= T::zero()) {
            return Err(Error::invalid(
                "attenuation_db",
                format!("must be >= 0, got {db}"),
            ));
        }
        let mut out = self.edit(ch, |c| {
            if let Component::Attenuator { db: d } = c {
                *d = db;
            }
        });
        out.settings.attenuation_db[ch.index()] = db;
        Ok(out)
    }

    pub fn with_phase(&self, ch: Channel, phase: T) -> Self {
        let mut out = self.edit(ch, |c| {
            if let Component::PhaseShifter { phase: p } = c {
                *p = phase;
            }
        });
        out.settings.phase_shift[ch.index()] = phase;
        out
    }

    pub fn with_switch(&self, delayed: bool) -> Self {
        let mut out = self.edit(Channel::I2, |c| {
            if let Component::Switch { delayed: d } = c {
                *d = delayed;
            }
        });
        out.settings.switch_delayed = delayed;
        out
    }

    pub fn with_reference_phase(&self, phase: T) -> Self {
        let mut out = self.clone();
        out.settings.reference_phase = phase;
        out
    }

    pub fn attenuation(&self, ch: Channel) -> T {
        self.settings.attenuation_db[ch.index()]
    }

    pub fn phase(&self, ch: Channel) -> T {
        self.settings.phase_shift[ch.index()]
    }

    pub fn has_switch(&self) -> bool {
        self.inputs[1]
            .iter()
            .any(|c| matches!(c, Component::Switch { .. }))
    }

    /// Complex gain from the source through channel `ch` to the output
    /// antenna at absolute frequency `f`.
    pub fn channel_transfer(&self, ch: Channel, f: T) -> Complex<T> {
        self.response(ch, f, true)
    }

    fn response(&self, ch: Channel, f: T, with_spread: bool) -> Complex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let k0 = self.carrier.map(|c| c.k).unwrap_or(T::zero());
        let local = self.ctx.solve_k(f).ok();
        let fc = self.settings.f_carrier;
        let eta = self.ctx.damping_rate();

        let mut microwave = one;
        let mut magnonic = one;
        let mut in_magnonic = false;
        let mut delayed = false;
        for c in self.inputs[ch.index()].iter().chain(self.output.iter()) {
            let g = match c {
                Component::Source | Component::DiodeDetector { .. } => one,
                Component::Splitter { ways } => {
                    Complex::new(T::one() / T::from_usize_lossy(*ways).sqrt(), T::zero())
                }
                Component::Attenuator { db } => Complex::new(db_to_amplitude(*db), T::zero()),
                Component::PhaseShifter { phase } => Complex::from_polar(T::one(), *phase),
                Component::Switch { delayed: d } => {
                    delayed = *d;
                    one
                }
                Component::DelayLine { phase } => {
                    if delayed {
                        Complex::from_polar(T::one(), -*phase * f / fc)
                    } else {
                        one
                    }
                }
                Component::TransducerIn { width, coupling } => {
                    in_magnonic = true;
                    match local {
                        Some(k) => *coupling * sinc(k * *width * T::half()),
                        None => zero,
                    }
                }
                Component::TransducerOut { width, coupling } => match local {
                    Some(k) => *coupling * sinc(k * *width * T::half()),
                    None => zero,
                },
                Component::WaveguideSegment { length } => {
                    if *length == T::zero() {
                        one
                    } else {
                        match local {
                            Some(k) => segment_gain(&self.ctx, *length, k0, k),
                            None => zero,
                        }
                    }
                }
                Component::Bend { loss_db } => Complex::new(db_to_amplitude(*loss_db), T::zero()),
                Component::Combiner { path_spread } => match (with_spread, self.carrier) {
                    (true, Some(cp)) => spread_gain(*path_spread, cp.speed, eta, f - fc),
                    _ => one,
                },
            };
            if in_magnonic {
                magnonic = magnonic * g;
            } else {
                microwave = microwave * g;
            }
        }
        microwave * (magnonic + self.geometry.crosstalk[ch.index()])
    }

    /// Group delay (s) of channel `ch` at the carrier, excluding the combiner
    /// spread. Zero-length and non-propagating paths contribute nothing.
    pub fn carrier_group_delay(&self, ch: Channel) -> T {
        let speed = match self.carrier {
            Some(cp) if cp.speed > T::zero() => cp.speed,
            _ => return T::zero(),
        };
        let fc = self.settings.f_carrier;
        let mut delayed = false;
        let mut tau = T::zero();
        for c in self.inputs[ch.index()].iter().chain(self.output.iter()) {
            match c {
                Component::Switch { delayed: d } => delayed = *d,
                Component::DelayLine { phase } if delayed => {
                    tau = tau + *phase / (T::two_pi() * fc)
                }
                Component::WaveguideSegment { length } => tau = tau + *length / speed,
                _ => {}
            }
        }
        tau
    }

    /// Total spread (s) of arrival times through the combiner.
    pub fn spread_time(&self, ch: Channel) -> T {
        let speed = match self.carrier {
            Some(cp) if cp.speed > T::zero() => cp.speed,
            _ => return T::zero(),
        };
        self.inputs[ch.index()]
            .iter()
            .filter_map(|c| match c {
                Component::Combiner { path_spread } => Some(*path_spread / speed),
                _ => None,
            })
            .sum()
    }

    /// Channel gain as seen by an envelope under `model`.
    pub fn channel_response(&self, ch: Channel, model: PropagationModel) -> ChannelResponse<'_, T> {
        let fc = self.settings.f_carrier;
        let linear = match model {
            PropagationModel::GroupDelay => {
                Some((self.response(ch, fc, false), self.carrier_group_delay(ch)))
            }
            PropagationModel::Dispersive => None,
        };
        ChannelResponse {
            netlist: self,
            channel: ch,
            linear,
        }
    }

    /// `20 log10 |H|` on `f_grid`, clamped at `floor_db`.
    pub fn transmission_spectrum(
        &self,
        ch: Channel,
        f_grid: &[T],
        floor_db: T,
    ) -> Result<Vec<(T, T)>> {
        if f_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("f_grid", "must be strictly ascending"));
        }
        Ok(f_grid
            .iter()
            .map(|&f| {
                let mag = self.channel_transfer(ch, f).norm();
                let db = if mag > T::zero() {
                    T::lit(20.0) * mag.log10()
                } else {
                    floor_db
                };
                (f, db.max(floor_db))
            })
            .collect())
    }

    /// Flat `key = value` text form of the netlist.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut put = |k: String, v: String| {
            out.push_str(&k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        let e = |x: T| format!("{:e}", x.as_f64());
        let g = &self.geometry;
        put("film.label".into(), self.ctx.film.label.clone());
        put("film.ms_a_per_m".into(), e(self.ctx.film.ms));
        put("film.thickness_m".into(), e(self.ctx.film.thickness));
        put("film.gamma_rad_per_s_t".into(), e(self.ctx.film.gamma));
        put("film.linewidth_t".into(), e(self.ctx.film.linewidth));
        put("field.mu0_h_t".into(), e(self.ctx.field.mu0_h));
        put(
            "field.orientation".into(),
            match self.ctx.field.orientation {
                Orientation::Parallel => "parallel".into(),
                Orientation::Perpendicular => "perpendicular".into(),
            },
        );
        put("geometry.waveguide_width_m".into(), e(g.waveguide_width));
        put("geometry.antenna_width_m".into(), e(g.antenna_width));
        for ch in Channel::ALL {
            let i = ch.index();
            put(
                format!("geometry.input_length_m.{ch}"),
                e(g.input_lengths[i]),
            );
            put(format!("geometry.skew_length_m.{ch}"), e(g.skew_lengths[i]));
            put(
                format!("geometry.input_coupling_re.{ch}"),
                e(g.input_coupling[i].re),
            );
            put(
                format!("geometry.input_coupling_im.{ch}"),
                e(g.input_coupling[i].im),
            );
            put(format!("geometry.crosstalk_re.{ch}"), e(g.crosstalk[i].re));
            put(format!("geometry.crosstalk_im.{ch}"), e(g.crosstalk[i].im));
        }
        put("geometry.output_length_m".into(), e(g.output_length));
        put(
            "geometry.output_coupling_re".into(),
            e(g.output_coupling.re),
        );
        put(
            "geometry.output_coupling_im".into(),
            e(g.output_coupling.im),
        );
        put("geometry.bend_loss_db".into(), e(g.bend_loss_db));
        put("geometry.path_spread_m".into(), e(g.path_spread));
        put("geometry.scale".into(), e(g.scale));
        let s = &self.settings;
        put("settings.f_carrier_hz".into(), e(s.f_carrier));
        put("settings.switch_on_i2".into(), s.switch_on_i2.to_string());
        put(
            "settings.switch_delayed".into(),
            s.switch_delayed.to_string(),
        );
        put(
            "settings.delay_line_phase_rad".into(),
            e(s.delay_line_phase),
        );
        put("settings.detector_cutoff_hz".into(), e(s.detector.cutoff));
        put(
            "settings.detector_responsivity".into(),
            e(s.detector.responsivity),
        );
        put("settings.reference_phase_rad".into(), e(s.reference_phase));
        let mut chain = |prefix: String, comps: &[Component<T>]| {
            for (j, c) in comps.iter().enumerate() {
                put(format!("{prefix}.component[{j}].kind"), c.kind().into());
                for (k, v) in c.params() {
                    put(format!("{prefix}.component[{j}].{k}"), e(v));
                }
            }
        };
        for ch in Channel::ALL {
            chain(format!("channel.{ch}"), &self.inputs[ch.index()]);
        }
        chain("output".into(), &self.output);
        out
    }

    /// Parse the output of [`GateNetlist::to_kv`]. Unknown keys are rejected.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            if map
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!("duplicate key `{}`", k.trim())));
            }
        }
        let mut take = |k: &str| {
            map.remove(k)
                .ok_or_else(|| Error::Config(format!("missing key `{k}`")))
        };
        fn num<T: Scalar>(k: &str, v: String) -> Result<T> {
            v.parse::<f64>()
                .map(T::lit)
                .map_err(|_| Error::Config(format!("`{k}`: not a number: {v}")))
        }
        fn flag(k: &str, v: String) -> Result<bool> {
            v.parse::<bool>()
                .map_err(|_| Error::Config(format!("`{k}`: not a bool: {v}")))
        }
        macro_rules! f {
            ($k:expr) => {{
                let key: String = $k.into();
                let v = take(&key)?;
                num::<T>(&key, v)?
            }};
        }

        let label = take("film.label")?;
        let film = FilmParams::new(
            f!("film.ms_a_per_m"),
            f!("film.thickness_m"),
            f!("film.gamma_rad_per_s_t"),
            f!("film.linewidth_t"),
            label,
        )?;
        let orientation = match take("field.orientation")?.as_str() {
            "parallel" => Orientation::Parallel,
            "perpendicular" => Orientation::Perpendicular,
            o => return Err(Error::Config(format!("unknown orientation `{o}`"))),
        };
        let field = BiasField::new(f!("field.mu0_h_t"), orientation)?;

        let mut geometry = DeviceGeometry::<T> {
            waveguide_width: f!("geometry.waveguide_width_m"),
            antenna_width: f!("geometry.antenna_width_m"),
            ..DeviceGeometry::default()
        };
        for ch in Channel::ALL {
            let i = ch.index();
            geometry.input_lengths[i] = f!(format!("geometry.input_length_m.{ch}"));
            geometry.skew_lengths[i] = f!(format!("geometry.skew_length_m.{ch}"));
            geometry.input_coupling[i] = Complex::new(
                f!(format!("geometry.input_coupling_re.{ch}")),
                f!(format!("geometry.input_coupling_im.{ch}")),
            );
            geometry.crosstalk[i] = Complex::new(
                f!(format!("geometry.crosstalk_re.{ch}")),
                f!(format!("geometry.crosstalk_im.{ch}")),
            );
        }
        geometry.output_length = f!("geometry.output_length_m");
        geometry.output_coupling = Complex::new(
            f!("geometry.output_coupling_re"),
            f!("geometry.output_coupling_im"),
        );
        geometry.bend_loss_db = f!("geometry.bend_loss_db");
        geometry.path_spread = f!("geometry.path_spread_m");
        geometry.scale = f!("geometry.scale");
        geometry.validate()?;

        let switch_on_i2 = flag("settings.switch_on_i2", take("settings.switch_on_i2")?)?;
        let switch_delayed = flag("settings.switch_delayed", take("settings.switch_delayed")?)?;
        let mut settings = MicrowaveSettings::<T> {
            f_carrier: f!("settings.f_carrier_hz"),
            switch_on_i2,
            switch_delayed,
            delay_line_phase: f!("settings.delay_line_phase_rad"),
            detector: DiodeDetector {
                cutoff: f!("settings.detector_cutoff_hz"),
                responsivity: f!("settings.detector_responsivity"),
            },
            reference_phase: f!("settings.reference_phase_rad"),
            ..MicrowaveSettings::default()
        };

        let parse_chain =
            |prefix: &str, map: &mut BTreeMap<String, String>| -> Result<Vec<Component<T>>> {
                let mut comps = Vec::new();
                for j in 0.. {
                    let base = format!("{prefix}.component[{j}].");
                    let Some(kind) = map.remove(&format!("{base}kind")) else {
                        break;
                    };
                    let keys: Vec<String> = map
                        .keys()
                        .filter(|k| k.starts_with(&base))
                        .cloned()
                        .collect();
                    let mut params = BTreeMap::new();
                    for k in keys {
                        let v = map.remove(&k).unwrap_or_default();
                        params.insert(k[base.len()..].to_string(), num::<T>(&k, v)?);
                    }
                    comps.push(Component::from_parts(&kind, &params)?);
                }
                Ok(comps)
            };
        let mut inputs: [Vec<Component<T>>; 3] = Default::default();
        for ch in Channel::ALL {
            inputs[ch.index()] = parse_chain(&format!("channel.{ch}"), &mut map)?;
        }
        let output = parse_chain("output", &mut map)?;
        if let Some(k) = map.keys().next() {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        // mirror chain state into settings so setters stay consistent
        for ch in Channel::ALL {
            for c in &inputs[ch.index()] {
                match c {
                    Component::Attenuator { db } => settings.attenuation_db[ch.index()] = *db,
                    Component::PhaseShifter { phase } => settings.phase_shift[ch.index()] = *phase,
                    _ => {}
                }
            }
        }
        GateNetlist::from_parts(
            inputs,
            output,
            geometry,
            ModeContext::new(film, field),
            settings,
        )
    }
}

/// A channel of a netlist viewed as a [`TransferFunction`].
pub struct ChannelResponse<'a, T: Scalar> {
    netlist: &'a GateNetlist<T>,
    channel: Channel,
    /// Carrier gain without spread and group delay, for the linear model.
    linear: Option<(Complex<T>, T)>,
}

impl<T: Scalar> TransferFunction<T> for ChannelResponse<'_, T> {
    fn gain(&self, f: T) -> Complex<T> {
        let n = self.netlist;
        match self.linear {
            None => n.channel_transfer(self.channel, f),
            Some((g0, tau)) => {
                let df = f - n.settings.f_carrier;
                let spread = match n.carrier {
                    Some(cp) => n.inputs[self.channel.index()]
                        .iter()
                        .filter_map(|c| match c {
                            Component::Combiner { path_spread } => Some(spread_gain(
                                *path_spread,
                                cp.speed,
                                n.ctx.damping_rate(),
                                df,
                            )),
                            _ => None,
                        })
                        .fold(Complex::new(T::one(), T::zero()), |a, b| a * b),
                    None => Complex::new(T::one(), T::zero()),
                };
                g0 * Complex::from_polar(T::one(), -T::two_pi() * df * tau) * spread
            }
        }
    }
}
