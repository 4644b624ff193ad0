//! Laboratory procedures: amplitude and phase calibration, the switching
//! experiment with its rise-time read-out, and the miniaturization study.
//!
//! Every procedure takes a netlist by reference and hands back adjusted
//! copies; nothing here mutates its input.

use std::io::Write;

use num_complex::Complex;

use crate::circuit::{Channel, GateNetlist, PropagationModel};
use crate::error::{Error, Result};
use crate::logic::{encode, PhaseEncoding};
use crate::scalar::{wrap_phase, Scalar};
use crate::signal::{
    apply_transfer, raised_cosine_step, rise_time_with, ComplexEnvelope, DetectedTrace,
    RiseOptions, RiseTime, TransferFunction,
};

/// Rise time reported for the switching experiment, s.
pub const TARGET_RISE_TIME: f64 = 11.3e-9;

const COARSE_POINTS: usize = 64;
const GOLDEN_TOL: f64 = 1e-4;

fn require_carrier<T: Scalar>(netlist: &GateNetlist<T>) -> Result<()> {
    if netlist.carrier_in_band() {
        return Ok(());
    }
    let (lo, hi) = netlist.context().band();
    Err(Error::NoPropagatingMode {
        f_hz: netlist.f_carrier().as_f64(),
        lo_hz: lo.as_f64(),
        hi_hz: hi.as_f64(),
    })
}

/// Single-channel output amplitudes at the carrier, others muted.
pub fn channel_gains<T: Scalar>(netlist: &GateNetlist<T>) -> [T; 3] {
    Channel::ALL.map(|ch| netlist.channel_transfer(ch, netlist.f_carrier()).norm())
}

/// Largest over smallest single-channel amplitude; at least 1.
pub fn amplitude_imbalance<T: Scalar>(netlist: &GateNetlist<T>) -> T {
    let g = channel_gains(netlist);
    let max = g.iter().copied().fold(T::zero(), T::max);
    let min = g.iter().copied().fold(T::infinity(), T::min);
    if min > T::zero() {
        max / min
    } else {
        T::infinity()
    }
}

/// Set each attenuator so all channels match the weakest one.
pub fn calibrate_amplitudes<T: Scalar>(netlist: &GateNetlist<T>) -> Result<GateNetlist<T>> {
    require_carrier(netlist)?;
    let gains = channel_gains(netlist);
    let twenty = T::lit(20.0);
    let mut raw = [T::zero(); 3];
    for ch in Channel::ALL {
        let i = ch.index();
        // undo the attenuation currently dialled in
        raw[i] = gains[i] * T::lit(10.0).powf(netlist.attenuation(ch) / twenty);
        if !(raw[i] > T::min_positive_value()) || !raw[i].is_finite() {
            return Err(Error::DeadChannel { channel: i + 1 });
        }
    }
    let weakest = raw.iter().copied().fold(T::infinity(), T::min);
    let mut out = netlist.clone();
    for ch in Channel::ALL {
        out = out.with_attenuation(ch, twenty * (raw[ch.index()] / weakest).log10())?;
    }
    Ok(out)
}

fn golden_max<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let r = T::lit(0.618_033_988_749_894_8);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) * T::half()
}

/// Shifter setting of `ch` that maximizes (or minimizes) the two-channel
/// output with the reference channel i2 at zero shift.
pub fn phase_extremum<T: Scalar>(
    netlist: &GateNetlist<T>,
    ch: Channel,
    maximize: bool,
) -> Result<T> {
    let base = netlist
        .with_switch(false)
        .with_phase(Channel::I2, T::zero());
    let fc = base.f_carrier();
    let reference = base.channel_transfer(Channel::I2, fc);
    let sign = if maximize { T::one() } else { -T::one() };
    let objective =
        |phi: T| sign * (reference + base.with_phase(ch, phi).channel_transfer(ch, fc)).norm();

    let step = T::two_pi() / T::from_usize_lossy(COARSE_POINTS);
    let grid: Vec<(T, T)> = (1..=COARSE_POINTS)
        .map(|j| {
            let phi = -T::PI() + step * T::from_usize_lossy(j);
            (phi, objective(phi))
        })
        .collect();
    let hi = grid.iter().map(|g| g.1).fold(T::neg_infinity(), T::max);
    let lo = grid.iter().map(|g| g.1).fold(T::infinity(), T::min);
    if !(hi - lo > T::lit(1e-9) * hi.abs().max(lo.abs())) {
        return Err(Error::FlatObjective {
            channel: ch.index() + 1,
        });
    }
    let best = grid
        .iter()
        .fold(grid[0], |acc, &g| if g.1 > acc.1 { g } else { acc })
        .0;
    Ok(wrap_phase(golden_max(
        objective,
        best - step,
        best + step,
        T::lit(GOLDEN_TOL),
    )))
}

/// Align i1 and i3 to i2 and record the logic-0 output phase.
pub fn calibrate_phases<T: Scalar>(netlist: &GateNetlist<T>) -> Result<GateNetlist<T>> {
    require_carrier(netlist)?;
    let o1 = phase_extremum(netlist, Channel::I1, true)?;
    let o3 = phase_extremum(netlist, Channel::I3, true)?;
    let out = netlist
        .with_phase(Channel::I2, T::zero())
        .with_phase(Channel::I1, o1)
        .with_phase(Channel::I3, o3);
    let reference = out
        .with_switch(false)
        .channel_transfer(Channel::I2, out.f_carrier())
        .arg();
    Ok(out.with_reference_phase(reference))
}

/// Largest carrier phase difference between a channel and i2, rad.
pub fn residual_phase_error<T: Scalar>(netlist: &GateNetlist<T>) -> T {
    let n = netlist.with_switch(false);
    let fc = n.f_carrier();
    let r = n.channel_transfer(Channel::I2, fc).arg();
    Channel::ALL
        .iter()
        .map(|&ch| wrap_phase(n.channel_transfer(ch, fc).arg() - r).abs())
        .fold(T::zero(), T::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult<T: Scalar = f64> {
    pub attenuator_db: [T; 3],
    pub phase_offsets: [T; 3],
    pub residual_amplitude_imbalance: T,
    pub residual_phase_error: T,
    pub netlist: GateNetlist<T>,
}

pub fn calibrate<T: Scalar>(netlist: &GateNetlist<T>) -> Result<CalibrationResult<T>> {
    let n = calibrate_phases(&calibrate_amplitudes(netlist)?)?;
    Ok(CalibrationResult {
        attenuator_db: Channel::ALL.map(|ch| n.attenuation(ch)),
        phase_offsets: Channel::ALL.map(|ch| n.phase(ch)),
        residual_amplitude_imbalance: amplitude_imbalance(&n),
        residual_phase_error: residual_phase_error(&n),
        netlist: n,
    })
}

/// Sampling and drive parameters of the switching experiment.
///
/// The i2 switch toggles into the delay line at a quarter of the record and
/// back at three quarters, so the record is periodic and the spectral
/// filtering has no wrap-around step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchTiming<T: Scalar = f64> {
    pub dt: T,
    pub samples: usize,
    /// Raised-cosine transition time of the switch.
    pub ramp: T,
    /// `false` leaves i2 on the direct path for the whole record.
    pub toggle: bool,
    pub model: PropagationModel,
}

impl<T: Scalar> Default for SwitchTiming<T> {
    fn default() -> Self {
        SwitchTiming {
            dt: T::lit(0.05e-9),
            samples: 1 << 14,
            ramp: T::lit(2e-9),
            toggle: true,
            model: PropagationModel::GroupDelay,
        }
    }
}

impl<T: Scalar> SwitchTiming<T> {
    pub fn period(&self) -> T {
        self.dt * T::from_usize_lossy(self.samples)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if self.samples < 64 {
            return Err(Error::invalid("samples", "need at least 64 samples"));
        }
        if !(self.ramp > T::zero() && self.ramp < self.period() * T::lit(0.25)) {
            return Err(Error::invalid(
                "ramp",
                "must be > 0 and shorter than a quarter of the record",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingResult<T: Scalar = f64> {
    /// Detected voltage around the first transition.
    pub trace: DetectedTrace<T>,
    pub t_rise: T,
    pub f_clock: T,
    /// Mean of the leading tenth of the window and the settled maximum.
    pub levels: (T, T),
    pub rise: RiseTime<T>,
}

/// Toggle i2 between the states '100' and '110' and measure the rise time
/// of the diode voltage after mixing with a reference carrier whose phase is
/// `ref_phase` relative to logic 0.
pub fn run_switching<T: Scalar>(
    netlist: &GateNetlist<T>,
    enc: &PhaseEncoding<T>,
    ref_phase: T,
    timing: &SwitchTiming<T>,
) -> Result<SwitchingResult<T>> {
    timing.validate()?;
    require_carrier(netlist)?;
    if !netlist.has_switch() {
        return Err(Error::invalid(
            "netlist",
            "switching needs the switch and delay line in i2",
        ));
    }
    let fc = netlist.f_carrier();
    let n = timing.samples;
    let dt = timing.dt;
    let period = timing.period();
    let t_on = period * T::lit(0.25);
    let t_off = period * T::lit(0.75);

    let bits = [true, false, false];
    let drive = |delayed: bool| {
        let mut m = netlist.with_switch(delayed);
        for ch in Channel::ALL {
            m = m.with_phase(ch, netlist.phase(ch) + encode(bits[ch.index()], enc));
        }
        m
    };
    let direct = drive(false);
    let delayed = drive(true);
    // scope trigger: align the observation window with i2's arrival
    let trigger = direct.carrier_group_delay(Channel::I2);
    let observed = |m: &GateNetlist<T>, ch: Channel, env: &ComplexEnvelope<T>| {
        let resp = m.channel_response(ch, timing.model);
        let h =
            |f: T| resp.gain(f) * Complex::from_polar(T::one(), T::two_pi() * (f - fc) * trigger);
        apply_transfer(env, &h)
    };

    let w: Vec<T> = (0..n)
        .map(|i| {
            let t = dt * T::from_usize_lossy(i);
            if timing.toggle {
                raised_cosine_step(t, t_on, timing.ramp) - raised_cosine_step(t, t_off, timing.ramp)
            } else {
                T::zero()
            }
        })
        .collect();
    let c = |x: T| Complex::new(x, T::zero());
    let steady = ComplexEnvelope::constant(fc, dt, n, c(T::one()))?;
    let through = ComplexEnvelope::new(fc, dt, w.iter().map(|&x| c(T::one() - x)).collect())?;
    let bypass = ComplexEnvelope::new(fc, dt, w.iter().map(|&x| c(x)).collect())?;

    let parts = [
        observed(&direct, Channel::I1, &steady)?,
        observed(&direct, Channel::I3, &steady)?,
        observed(&direct, Channel::I2, &through)?,
        observed(&delayed, Channel::I2, &bypass)?,
    ];
    let high_state = Channel::ALL.iter().fold(c(T::zero()), |acc, &ch| {
        acc + delayed.channel_transfer(ch, fc)
    });
    let reference = Complex::from_polar(
        high_state.norm(),
        netlist.settings().reference_phase + enc.phi0 + ref_phase,
    );
    let samples: Vec<Complex<T>> = (0..n)
        .map(|i| parts.iter().fold(reference, |acc, p| acc + p.samples()[i]))
        .collect();
    let out = ComplexEnvelope::new(fc, dt, samples)?;

    let detector = netlist.settings().detector;
    let full = detector.detect(&out)?;
    let trace = full.window(t_on - period * T::lit(0.2), t_on + period * T::lit(0.45));
    let expected_high = detector.responsivity * (T::two() * high_state.norm()).powi(2);
    let opts = RiseOptions {
        plateau_fraction: T::lit(0.1),
        min_level: T::lit(1e-6) * expected_high,
    };
    let rise = rise_time_with(&trace, &opts)?;
    let lead = (trace.len() / 10).max(1);
    let v_low = trace.samples[..lead].iter().copied().sum::<T>() / T::from_usize_lossy(lead);
    Ok(SwitchingResult {
        t_rise: rise.t_rise,
        f_clock: rise.f_clock,
        levels: (v_low, rise.v_max),
        rise,
        trace,
    })
}

/// Copy of `netlist` with the combiner path spread replaced, recalibrated.
pub fn with_path_spread<T: Scalar>(
    netlist: &GateNetlist<T>,
    path_spread: T,
) -> Result<GateNetlist<T>> {
    let mut g = netlist.geometry().clone();
    g.path_spread = path_spread;
    Ok(calibrate(&netlist.with_geometry(&g)?)?.netlist)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSpreadFit<T: Scalar = f64> {
    /// Unscaled path spread, m.
    pub path_spread: T,
    pub result: SwitchingResult<T>,
    pub netlist: GateNetlist<T>,
}

/// Bisect the combiner path spread until the switching rise time equals
/// `target`.
pub fn fit_path_spread<T: Scalar>(
    netlist: &GateNetlist<T>,
    enc: &PhaseEncoding<T>,
    ref_phase: T,
    timing: &SwitchTiming<T>,
    target: T,
) -> Result<PathSpreadFit<T>> {
    let eval = |ls: T| -> Result<(GateNetlist<T>, SwitchingResult<T>)> {
        let n = with_path_spread(netlist, ls)?;
        let r = run_switching(&n, enc, ref_phase, timing)?;
        Ok((n, r))
    };
    let floor = eval(T::zero())?.1.t_rise;
    if floor >= target {
        return Err(Error::invalid(
            "target",
            format!("switching floor {floor} s already exceeds the target"),
        ));
    }
    let mut lo = T::zero();
    let mut hi = T::lit(1e-4);
    while eval(hi)?.1.t_rise < target {
        lo = hi;
        hi = hi * T::two();
        if hi > T::one() {
            return Err(Error::invalid(
                "target",
                "not reachable with any path spread below 1 m",
            ));
        }
    }
    for _ in 0..60 {
        let mid = (lo + hi) * T::half();
        if eval(mid)?.1.t_rise < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::lit(1e-12) {
            break;
        }
    }
    let path_spread = (lo + hi) * T::half();
    let (n, result) = eval(path_spread)?;
    Ok(PathSpreadFit {
        path_spread,
        result,
        netlist: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow<T: Scalar = f64> {
    pub scale: T,
    pub t_rise: Option<T>,
    pub f_clock: Option<T>,
    /// `t_rise` minus the switching floor.
    pub excess: Option<T>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable<T: Scalar = f64> {
    /// Rise time of the same device with no path spread.
    pub floor: T,
    pub rows: Vec<ScalingRow<T>>,
}

impl<T: Scalar> ScalingTable<T> {
    /// Least-squares line `excess = slope * scale + intercept` over the
    /// unflagged rows, with its coefficient of determination.
    pub fn linear_fit(&self) -> Option<(T, T, T)> {
        let pts: Vec<(T, T)> = self
            .rows
            .iter()
            .filter_map(|r| Some((r.scale, r.excess?)))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = T::from_usize_lossy(pts.len());
        let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
        let my = pts.iter().map(|p| p.1).sum::<T>() / n;
        let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<T>();
        let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
        let syy = pts.iter().map(|p| (p.1 - my).powi(2)).sum::<T>();
        if !(sxx > T::zero()) {
            return None;
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r2 = if syy > T::zero() {
            sxy * sxy / (sxx * syy)
        } else {
            T::one()
        };
        Some((slope, intercept, r2))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "scale,t_rise_s,f_clock_hz,excess_s,flag")?;
        let e = |x: Option<T>| {
            x.map(|v| format!("{:e}", v.as_f64()))
                .unwrap_or_else(|| "nan".into())
        };
        for r in &self.rows {
            writeln!(
                w,
                "{:e},{},{},{},{}",
                r.scale.as_f64(),
                e(r.t_rise),
                e(r.f_clock),
                e(r.excess),
                r.flag.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }
}

/// Rerun the switching experiment with every path length multiplied by each
/// of `scales`, recalibrating each device. Failures become flagged rows.
pub fn scaling_study<T: Scalar>(
    netlist: &GateNetlist<T>,
    enc: &PhaseEncoding<T>,
    ref_phase: T,
    scales: &[T],
    timing: &SwitchTiming<T>,
) -> Result<ScalingTable<T>> {
    if let Some(bad) = scales.iter().find(|s| !(**s > T::zero())) {
        return Err(Error::invalid("scales", format!("must be > 0, got {bad}")));
    }
    let floor = run_switching(
        &with_path_spread(netlist, T::zero())?,
        enc,
        ref_phase,
        timing,
    )?
    .t_rise;
    let rows = scales
        .iter()
        .map(|&scale| {
            let run = || -> Result<SwitchingResult<T>> {
                let g = netlist.geometry().scaled_by(scale);
                let n = calibrate(&netlist.with_geometry(&g)?)?.netlist;
                run_switching(&n, enc, ref_phase, timing)
            };
            match run() {
                Ok(r) => ScalingRow {
                    scale,
                    t_rise: Some(r.t_rise),
                    f_clock: Some(r.f_clock),
                    excess: Some(r.t_rise - floor),
                    flag: None,
                },
                Err(e) => ScalingRow {
                    scale,
                    t_rise: None,
                    f_clock: None,
                    excess: None,
                    flag: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(ScalingTable { floor, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_majority_gate, DeviceGeometry, MicrowaveSettings};
    use crate::logic::truth_table;
    use crate::physics::ModeContext;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ctx() -> ModeContext {
        ModeContext::default().with_fmr(6.06e9).unwrap()
    }

    fn gate(g: &DeviceGeometry, switch: bool) -> GateNetlist {
        let s = MicrowaveSettings {
            switch_on_i2: switch,
            ..MicrowaveSettings::default()
        };
        build_majority_gate(g, &ctx(), &s).unwrap()
    }

    fn with_couplings(c: [Complex<f64>; 3]) -> DeviceGeometry {
        DeviceGeometry {
            input_coupling: c,
            ..DeviceGeometry::symmetric()
        }
    }

    #[test]
    fn symmetric_needs_no_correction() {
        let cal = calibrate(&gate(&DeviceGeometry::symmetric(), false)).unwrap();
        for i in 0..3 {
            assert!(cal.attenuator_db[i].abs() < 1e-9);
            assert!(cal.phase_offsets[i].abs() < 1e-4);
        }
        assert!(cal.residual_amplitude_imbalance <= 1.001);
    }

    #[test]
    fn amplitude_example() {
        let c = |x: f64| Complex::new(x, 0.0);
        let n =
            calibrate_amplitudes(&gate(&with_couplings([c(1.0), c(0.5), c(0.25)]), false)).unwrap();
        assert_relative_eq!(
            n.attenuation(Channel::I1),
            12.041_199_826_559_248,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            n.attenuation(Channel::I2),
            6.020_599_913_279_624,
            max_relative = 1e-9
        );
        assert!(n.attenuation(Channel::I3).abs() < 1e-12);
        assert!(amplitude_imbalance(&n) <= 1.001);
    }

    #[test]
    fn dead_channel_is_reported() {
        let c = |x: f64| Complex::new(x, 0.0);
        let err = calibrate_amplitudes(&gate(&with_couplings([c(1.0), c(0.0), c(1.0)]), false))
            .unwrap_err();
        assert_eq!(err, Error::DeadChannel { channel: 2 });
        assert!(err.to_string().contains("has no transmission"));
    }

    #[test]
    fn injected_offsets_are_recovered() {
        let p = |phi: f64| Complex::from_polar(1.0, phi);
        let n = gate(&with_couplings([p(0.7), p(0.0), p(-1.2)]), false);
        let cal = calibrate(&n).unwrap();
        assert!((wrap_phase(cal.phase_offsets[0] + 0.7)).abs() < 1e-3);
        assert_eq!(cal.phase_offsets[1], 0.0);
        assert!((wrap_phase(cal.phase_offsets[2] - 1.2)).abs() < 1e-3);
        // brute-force fine scan as an independent check
        let h2 = n.channel_transfer(Channel::I2, n.f_carrier());
        let best = (0..200_000)
            .map(|j| -PI + 2.0 * PI * (j as f64 + 1.0) / 200_000.0)
            .max_by(|a, b| {
                let f = |x: f64| {
                    (h2 + n
                        .with_phase(Channel::I1, x)
                        .channel_transfer(Channel::I1, n.f_carrier()))
                    .norm()
                };
                f(*a).partial_cmp(&f(*b)).unwrap()
            })
            .unwrap();
        assert!(wrap_phase(best - cal.phase_offsets[0]).abs() < 1e-3);
    }

    #[test]
    fn maximum_and_minimum_are_pi_apart() {
        let n = gate(&DeviceGeometry::default(), false);
        let max = phase_extremum(&n, Channel::I3, true).unwrap();
        let min = phase_extremum(&n, Channel::I3, false).unwrap();
        assert!((wrap_phase(max - min).abs() - PI).abs() < 2e-4);
    }

    #[test]
    fn calibration_is_idempotent() {
        let once = calibrate(&gate(&DeviceGeometry::default(), false)).unwrap();
        let twice = calibrate(&once.netlist).unwrap();
        for i in 0..3 {
            assert!((once.attenuator_db[i] - twice.attenuator_db[i]).abs() < 1e-6);
            assert!((once.phase_offsets[i] - twice.phase_offsets[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn calibrated_default_gate_decodes() {
        let cal = calibrate(&gate(&DeviceGeometry::default(), false)).unwrap();
        let t = truth_table(&cal.netlist, &PhaseEncoding::default());
        assert!(t.all_correct());
        assert!(t.min_margin() > PI / 4.0);
    }

    #[test]
    fn flat_objective_when_reference_dead() {
        let c = |x: f64| Complex::new(x, 0.0);
        let n = gate(&with_couplings([c(0.0), c(1.0), c(1.0)]), false);
        assert_eq!(
            phase_extremum(&n, Channel::I1, true).unwrap_err(),
            Error::FlatObjective { channel: 1 }
        );
    }

    fn zero_length() -> DeviceGeometry {
        DeviceGeometry {
            input_lengths: [0.0; 3],
            output_length: 0.0,
            ..DeviceGeometry::symmetric()
        }
    }

    #[test]
    fn zero_length_switching_matches_ramp_oracle() {
        // the detected voltage is proportional to w(t)^2 for a raised-cosine w
        let mut s = MicrowaveSettings {
            switch_on_i2: true,
            ..MicrowaveSettings::default()
        };
        s.detector.cutoff = 40e9;
        let n = calibrate(&build_majority_gate(&zero_length(), &ctx(), &s).unwrap())
            .unwrap()
            .netlist;
        let timing = SwitchTiming {
            dt: 0.01e-9,
            samples: 1 << 13,
            ..SwitchTiming::default()
        };
        let r = run_switching(&n, &PhaseEncoding::default(), PI, &timing).unwrap();
        let u = |w: f64| (1.0 - 2.0 * w).acos() / PI;
        let oracle = 2e-9 * (u((2.0f64 / 3.0).sqrt()) - u((1.0f64 / 3.0).sqrt()));
        assert!(
            (r.t_rise - oracle).abs() < 0.05e-9,
            "{} vs {}",
            r.t_rise,
            oracle
        );
        assert_relative_eq!(r.f_clock, 1.0 / r.t_rise);
        assert!(r.levels.0 < 1e-3 * r.levels.1);
    }

    #[test]
    fn no_toggle_no_transition() {
        let n = calibrate(&gate(&DeviceGeometry::default(), true))
            .unwrap()
            .netlist;
        let timing = SwitchTiming {
            toggle: false,
            ..SwitchTiming::default()
        };
        assert_eq!(
            run_switching(&n, &PhaseEncoding::default(), PI, &timing).unwrap_err(),
            Error::NoTransition
        );
    }

    #[test]
    fn switching_requires_switch() {
        let n = calibrate(&gate(&DeviceGeometry::default(), false))
            .unwrap()
            .netlist;
        assert!(
            run_switching(&n, &PhaseEncoding::default(), PI, &SwitchTiming::default()).is_err()
        );
    }

    #[test]
    fn rise_time_grows_with_spread_not_arm_length() {
        let base = calibrate(&gate(&DeviceGeometry::default(), true))
            .unwrap()
            .netlist;
        let enc = PhaseEncoding::default();
        let timing = SwitchTiming::default();
        let t = |ls: f64| {
            run_switching(&with_path_spread(&base, ls).unwrap(), &enc, PI, &timing)
                .unwrap()
                .t_rise
        };
        let (a, b, c) = (t(0.0), t(0.5e-3), t(1e-3));
        assert!(a < b && b < c);
        let mut g = base.geometry().clone();
        let mut last = 0.0;
        for extra in [0.0, 2e-3, 5e-3] {
            g.input_lengths[1] = 10e-3 + extra;
            let n = calibrate(&base.with_geometry(&g).unwrap()).unwrap().netlist;
            let tr = run_switching(&n, &enc, PI, &timing).unwrap().t_rise;
            assert!(tr >= last - 1e-12);
            last = tr;
        }
    }

    #[test]
    fn linear_fit_on_exact_line() {
        let rows = [1.0, 0.5, 0.2]
            .iter()
            .map(|&s| ScalingRow {
                scale: s,
                t_rise: None,
                f_clock: None,
                excess: Some(2.0 * s + 1.0),
                flag: None,
            })
            .collect();
        let t = ScalingTable { floor: 0.0, rows };
        let (m, b, r2) = t.linear_fit().unwrap();
        assert_relative_eq!(m, 2.0, max_relative = 1e-12);
        assert_relative_eq!(b, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r2, 1.0, max_relative = 1e-12);
    }
}
