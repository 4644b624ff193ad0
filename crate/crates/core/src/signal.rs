//! Complex baseband signals about a microwave carrier.
//!
//! A [`ComplexEnvelope`] holds samples `s(t)` such that the physical signal
//! is `Re{ s(t) exp(i 2pi f_c t) }`. Filtering happens in the frequency
//! domain: bin `j` of the DFT sits at absolute frequency `f_c + df_j`, and a
//! [`TransferFunction`] is evaluated there.

use std::io::Write;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::{wrap_phase, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEnvelope<T: Scalar = f64> {
    f_carrier: T,
    dt: T,
    samples: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexEnvelope<T> {
    pub fn new(f_carrier: T, dt: T, samples: Vec<Complex<T>>) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        if samples.len() < 2 {
            return Err(Error::invalid(
                "samples",
                format!("need at least 2, got {}", samples.len()),
            ));
        }
        if !f_carrier.is_finite() {
            return Err(Error::invalid("f_carrier", "must be finite"));
        }
        Ok(ComplexEnvelope {
            f_carrier,
            dt,
            samples,
        })
    }

    /// `n` copies of `value`.
    pub fn constant(f_carrier: T, dt: T, n: usize, value: Complex<T>) -> Result<Self> {
        Self::new(f_carrier, dt, vec![value; n])
    }

    pub fn f_carrier(&self) -> T {
        self.f_carrier
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> T {
        self.dt * T::from_usize_lossy(self.samples.len())
    }

    pub fn time(&self, n: usize) -> T {
        self.dt * T::from_usize_lossy(n)
    }

    /// Frequencies (Hz, absolute) covered by the sampling grid.
    pub fn band(&self) -> (T, T) {
        let half = T::half() / self.dt;
        (self.f_carrier - half, self.f_carrier + half)
    }

    /// Sum of `|s|^2`.
    pub fn energy(&self) -> T {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        ComplexEnvelope {
            samples: self.samples.iter().map(|&s| s * c).collect(),
            ..self.clone()
        }
    }

    fn same_grid(&self, other: &Self) -> bool {
        let close =
            |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * a.abs().max(b.abs()).max(T::one());
        close(self.f_carrier, other.f_carrier)
            && close(self.dt, other.dt)
            && self.len() == other.len()
    }

    /// Columns `time_s,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "time_s,re,im")?;
        for (n, s) in self.samples.iter().enumerate() {
            writeln!(
                w,
                "{:e},{:e},{:e}",
                self.time(n).as_f64(),
                s.re.as_f64(),
                s.im.as_f64()
            )?;
        }
        Ok(())
    }
}

/// A complex gain as a function of absolute frequency.
pub trait TransferFunction<T: Scalar> {
    fn gain(&self, f: T) -> Complex<T>;

    /// Frequency interval on which `gain` is defined. `None` means everywhere,
    /// which is the case for anything that models its stopband as zero.
    fn support(&self) -> Option<(T, T)> {
        None
    }
}

impl<T: Scalar, F: Fn(T) -> Complex<T>> TransferFunction<T> for F {
    fn gain(&self, f: T) -> Complex<T> {
        self(f)
    }
}

/// Wraps a gain function that is only meaningful on `[lo, hi]`.
pub struct Supported<F> {
    pub lo: f64,
    pub hi: f64,
    pub gain: F,
}

impl<T: Scalar, F: Fn(T) -> Complex<T>> TransferFunction<T> for Supported<F> {
    fn gain(&self, f: T) -> Complex<T> {
        (self.gain)(f)
    }

    fn support(&self) -> Option<(T, T)> {
        Some((T::lit(self.lo), T::lit(self.hi)))
    }
}

/// Raised-cosine step from 0 to 1 starting at `t0` and lasting `width`.
pub fn raised_cosine_step<T: Scalar>(t: T, t0: T, width: T) -> T {
    if t <= t0 {
        T::zero()
    } else if t >= t0 + width {
        T::one()
    } else {
        let u = (t - t0) / width;
        (T::one() - (T::PI() * u).cos()) * T::half()
    }
}

/// Parameters of a switched phase step, see [`make_step_phase_envelope`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseStep<T: Scalar = f64> {
    pub f_carrier: T,
    pub amplitude: T,
    pub phase_a: T,
    pub phase_b: T,
    pub t_toggle: T,
    /// Width of the raised-cosine phase ramp (switch rise time).
    pub t_switch_rise: T,
    pub duration: T,
    pub dt: T,
}

/// Constant-amplitude envelope whose phase moves from `phase_a` to `phase_b`
/// along a raised-cosine ramp beginning at `t_toggle`.
pub fn make_step_phase_envelope<T: Scalar>(p: &PhaseStep<T>) -> Result<ComplexEnvelope<T>> {
    if !(p.t_switch_rise > T::zero()) {
        return Err(Error::invalid("t_switch_rise", "must be > 0"));
    }
    if p.t_switch_rise >= p.duration {
        return Err(Error::invalid(
            "t_switch_rise",
            format!(
                "ramp {} s longer than duration {} s",
                p.t_switch_rise, p.duration
            ),
        ));
    }
    if !(p.t_toggle > T::zero() && p.t_toggle < p.duration) {
        return Err(Error::invalid("t_toggle", "must lie inside (0, duration)"));
    }
    if !(p.dt > T::zero()) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    let n = (p.duration / p.dt).round().to_usize().unwrap_or(0);
    let samples = (0..n)
        .map(|i| {
            let t = p.dt * T::from_usize_lossy(i);
            let w = raised_cosine_step(t, p.t_toggle, p.t_switch_rise);
            let phi = p.phase_a + (p.phase_b - p.phase_a) * w;
            Complex::from_polar(p.amplitude, phi)
        })
        .collect();
    ComplexEnvelope::new(p.f_carrier, p.dt, samples)
}

/// Baseband offset (Hz) of DFT bin `j` out of `n` at sample interval `dt`.
/// The Nyquist bin is taken as negative.
pub fn bin_offset<T: Scalar>(j: usize, n: usize, dt: T) -> T {
    let span = T::from_usize_lossy(n) * dt;
    if j < n / 2 {
        T::from_usize_lossy(j) / span
    } else {
        -(T::from_usize_lossy(n - j) / span)
    }
}

/// Filter `env` through `h` in the frequency domain.
///
/// Lengths that are not powers of two are zero-padded before the transform
/// and truncated afterwards; on power-of-two grids the filter is circular.
pub fn apply_transfer<T: Scalar, H: TransferFunction<T> + ?Sized>(
    env: &ComplexEnvelope<T>,
    h: &H,
) -> Result<ComplexEnvelope<T>> {
    let (lo, hi) = env.band();
    if let Some((s_lo, s_hi)) = h.support() {
        if lo < s_lo || hi > s_hi {
            return Err(Error::BandOverflow {
                lo_hz: lo.as_f64(),
                hi_hz: hi.as_f64(),
            });
        }
    }
    let n0 = env.len();
    let n = n0.next_power_of_two();
    let mut buf = env.samples.clone();
    buf.resize(n, Complex::new(T::zero(), T::zero()));

    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (j, x) in buf.iter_mut().enumerate() {
        *x = *x * h.gain(env.f_carrier + bin_offset(j, n, env.dt));
    }
    planner.plan_fft_inverse(n).process(&mut buf);

    let norm = T::one() / T::from_usize_lossy(n);
    buf.truncate(n0);
    for x in buf.iter_mut() {
        *x = *x * norm;
    }
    Ok(ComplexEnvelope {
        samples: buf,
        ..env.clone()
    })
}

/// Sample-wise complex sum of envelopes sharing one grid.
pub fn superpose<T: Scalar>(envs: &[ComplexEnvelope<T>]) -> Result<ComplexEnvelope<T>> {
    let first = envs
        .first()
        .ok_or_else(|| Error::GridMismatch("nothing to superpose".into()))?;
    let mut out = first.clone();
    for (i, e) in envs.iter().enumerate().skip(1) {
        if !first.same_grid(e) {
            return Err(Error::GridMismatch(format!(
                "envelope {i} differs from envelope 0 in carrier, dt or length"
            )));
        }
        for (acc, &s) in out.samples.iter_mut().zip(&e.samples) {
            *acc = *acc + s;
        }
    }
    Ok(out)
}

/// Real, nonnegative detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedTrace<T: Scalar = f64> {
    /// Time of the first sample.
    pub t0: T,
    pub dt: T,
    pub samples: Vec<T>,
}

impl<T: Scalar> DetectedTrace<T> {
    pub fn new(t0: T, dt: T, samples: Vec<T>) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if samples.iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::invalid(
                "samples",
                "detected voltages must be nonnegative",
            ));
        }
        Ok(DetectedTrace { t0, dt, samples })
    }

    pub fn time(&self, n: usize) -> T {
        self.t0 + self.dt * T::from_usize_lossy(n)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples with `t0 <= t < t1`.
    pub fn window(&self, t0: T, t1: T) -> DetectedTrace<T> {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&n| self.time(n) >= t0 && self.time(n) < t1)
            .collect();
        let start = idx.first().copied().unwrap_or(0);
        DetectedTrace {
            t0: self.time(start),
            dt: self.dt,
            samples: idx.iter().map(|&n| self.samples[n]).collect(),
        }
    }

    /// Columns `time_s,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "time_s,value")?;
        for (n, v) in self.samples.iter().enumerate() {
            writeln!(w, "{:e},{:e}", self.time(n).as_f64(), v.as_f64())?;
        }
        Ok(())
    }
}

/// Square-law diode followed by a single-pole video low-pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiodeDetector<T: Scalar = f64> {
    /// Low-pass corner, Hz.
    pub cutoff: T,
    /// Volts per unit `|s|^2`.
    pub responsivity: T,
}

impl<T: Scalar> Default for DiodeDetector<T> {
    fn default() -> Self {
        DiodeDetector {
            cutoff: T::lit(500e6),
            responsivity: T::one(),
        }
    }
}

impl<T: Scalar> DiodeDetector<T> {
    pub fn detect(&self, env: &ComplexEnvelope<T>) -> Result<DetectedTrace<T>> {
        let nyquist = T::half() / env.dt;
        if !(self.cutoff > T::zero() && self.cutoff < nyquist) {
            return Err(Error::invalid(
                "lp_cutoff",
                format!("must lie in (0, {nyquist}) Hz, got {}", self.cutoff),
            ));
        }
        if !(self.responsivity >= T::zero()) {
            return Err(Error::invalid("responsivity", "must be >= 0"));
        }
        // exact discretization of a first-order RC with a held input
        let alpha = -(-(T::two_pi() * self.cutoff * env.dt)).exp_m1();
        let power = env.samples.iter().map(|s| s.norm_sqr() * self.responsivity);
        let mut acc = None;
        let samples = power
            .map(|p| {
                let y = match acc {
                    None => p,
                    Some(prev) => prev + alpha * (p - prev),
                };
                acc = Some(y);
                y
            })
            .collect();
        DetectedTrace::new(T::zero(), env.dt, samples)
    }
}

/// [`DiodeDetector::detect`] with unit responsivity.
pub fn diode_detect<T: Scalar>(env: &ComplexEnvelope<T>, lp_cutoff: T) -> Result<DetectedTrace<T>> {
    DiodeDetector {
        cutoff: lp_cutoff,
        responsivity: T::one(),
    }
    .detect(env)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiseTime<T: Scalar = f64> {
    pub t_rise: T,
    pub f_clock: T,
    /// Settled post-transition level.
    pub v_max: T,
    /// Interpolated 1/3 and 2/3 crossing instants.
    pub t_low: T,
    pub t_high: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiseOptions<T: Scalar = f64> {
    /// Trailing fraction of the trace averaged to estimate `V_max`.
    pub plateau_fraction: T,
    /// `V_max` at or below this is treated as no signal.
    pub min_level: T,
}

impl<T: Scalar> Default for RiseOptions<T> {
    fn default() -> Self {
        RiseOptions {
            plateau_fraction: T::lit(0.1),
            min_level: T::zero(),
        }
    }
}

/// Rise time between the 1/3 and 2/3 levels of the settled maximum.
pub fn rise_time<T: Scalar>(trace: &DetectedTrace<T>) -> Result<RiseTime<T>> {
    rise_time_with(trace, &RiseOptions::default())
}

pub fn rise_time_with<T: Scalar>(
    trace: &DetectedTrace<T>,
    opts: &RiseOptions<T>,
) -> Result<RiseTime<T>> {
    let v = &trace.samples;
    if v.len() < 3 {
        return Err(Error::NoTransition);
    }
    let tail = (opts.plateau_fraction * T::from_usize_lossy(v.len()))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, v.len());
    let v_max = v[v.len() - tail..].iter().copied().sum::<T>() / T::from_usize_lossy(tail);
    if !(v_max > opts.min_level) || !v_max.is_finite() {
        return Err(Error::NoTransition);
    }
    let lo = v_max / T::lit(3.0);
    let hi = v_max * T::lit(2.0 / 3.0);

    let i_hi = v.iter().position(|&x| x >= hi).ok_or(Error::NoTransition)?;
    if i_hi == 0 {
        return Err(Error::NoTransition);
    }
    let i_lo = (0..i_hi)
        .rev()
        .find(|&i| v[i] <= lo)
        .ok_or(Error::NoTransition)?;

    let cross = |i: usize, level: T| {
        let (a, b) = (v[i], v[i + 1]);
        let frac = if b != a {
            (level - a) / (b - a)
        } else {
            T::zero()
        };
        trace.time(i) + frac * trace.dt
    };
    let t_low = cross(i_lo, lo);
    let t_high = cross(i_hi - 1, hi);
    let t_rise = t_high - t_low;
    if !(t_rise > T::zero()) {
        return Err(Error::NoTransition);
    }
    Ok(RiseTime {
        t_rise,
        f_clock: T::one() / t_rise,
        v_max,
        t_low,
        t_high,
    })
}

/// Argument of the mean complex amplitude over samples with `t0 <= t <= t1`,
/// in `(-pi, pi]`.
pub fn phase_estimate<T: Scalar>(env: &ComplexEnvelope<T>, t0: T, t1: T) -> Result<T> {
    let picked: Vec<Complex<T>> = (0..env.len())
        .filter(|&n| env.time(n) >= t0 && env.time(n) <= t1)
        .map(|n| env.samples[n])
        .collect();
    if picked.is_empty() {
        return Err(Error::invalid(
            "window",
            "no samples inside the phase read-out window",
        ));
    }
    let count = T::from_usize_lossy(picked.len());
    let mean = picked
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b)
        / count;
    let mean_abs = picked.iter().map(|s| s.norm()).sum::<T>() / count;
    if !(mean_abs > T::zero()) || mean.norm() <= T::lit(1e-12) * mean_abs {
        return Err(Error::IndeterminatePhase);
    }
    Ok(wrap_phase(mean.arg()))
}
