//! Magnetostatic spin waves in an in-plane magnetized film.
//!
//! Two branches of the lowest thickness mode are modelled:
//!
//! * backward volume waves (`k` parallel to the bias field), whose frequency
//!   falls from the FMR frequency towards `omega_H / 2pi` as `k` grows, and
//! * surface (Damon-Eshbach) waves (`k` perpendicular to the field), rising
//!   from FMR towards `(omega_H + omega_M / 2) / 2pi`.
//!
//! Angular frequencies are in rad/s, wavenumbers in rad/m, fields as `mu0 H`
//! in tesla. All functions are pure.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Vacuum permeability (T·m/A).
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Gyromagnetic ratio for g = 2, in rad s^-1 T^-1.
pub const GAMMA_G2: f64 = 2.0 * std::f64::consts::PI * 28.0e9;

/// Magnetic film constants.
#[derive(Debug, Clone, PartialEq)]
pub struct FilmParams<T: Scalar = f64> {
    /// Saturation magnetization, A/m.
    pub ms: T,
    /// Film thickness, m.
    pub thickness: T,
    /// Gyromagnetic ratio, rad s^-1 T^-1.
    pub gamma: T,
    /// Full FMR linewidth as `mu0 dH0`, T.
    pub linewidth: T,
    pub label: String,
}

impl<T: Scalar> FilmParams<T> {
    pub fn new(
        ms: T,
        thickness: T,
        gamma: T,
        linewidth: T,
        label: impl Into<String>,
    ) -> Result<Self> {
        // Ms = 0 is accepted so the bare-Larmor limit stays reachable.
        if !(ms >= T::zero()) || !ms.is_finite() {
            return Err(Error::invalid("ms", format!("must be >= 0, got {ms}")));
        }
        if !(thickness > T::zero()) || !thickness.is_finite() {
            return Err(Error::invalid(
                "thickness",
                format!("must be > 0, got {thickness}"),
            ));
        }
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
        }
        if !(linewidth >= T::zero()) || !linewidth.is_finite() {
            return Err(Error::invalid(
                "linewidth",
                format!("must be >= 0, got {linewidth}"),
            ));
        }
        Ok(FilmParams {
            ms,
            thickness,
            gamma,
            linewidth,
            label: label.into(),
        })
    }

    /// 5.4 µm liquid-phase-epitaxy YIG with 0.062 mT FMR linewidth.
    ///
    /// `mu0 Ms` defaults to the literature value 0.176 T; see
    /// [`ModeContext::calibrated_ms`] to pin it to a measured FMR frequency.
    pub fn yig_5_4um() -> Self {
        FilmParams {
            ms: T::lit(0.176 / MU0),
            thickness: T::lit(5.4e-6),
            gamma: T::lit(GAMMA_G2),
            linewidth: T::lit(6.2e-5),
            label: "YIG-5.4um".to_string(),
        }
    }

    /// `mu0 Ms` in tesla.
    pub fn mu0_ms(&self) -> T {
        self.ms * T::lit(MU0)
    }

    pub fn with_mu0_ms(mut self, mu0_ms: T) -> Result<Self> {
        self.ms = mu0_ms / T::lit(MU0);
        Self::new(
            self.ms,
            self.thickness,
            self.gamma,
            self.linewidth,
            self.label,
        )
    }
}

impl<T: Scalar> Default for FilmParams<T> {
    fn default() -> Self {
        Self::yig_5_4um()
    }
}

/// Direction of the in-plane bias field relative to the waveguide axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Field along the guide: backward volume waves.
    #[default]
    Parallel,
    /// Field across the guide: surface waves.
    Perpendicular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasField<T: Scalar = f64> {
    /// Applied field `mu0 H`, T.
    pub mu0_h: T,
    pub orientation: Orientation,
}

impl<T: Scalar> BiasField<T> {
    pub fn new(mu0_h: T, orientation: Orientation) -> Result<Self> {
        if !(mu0_h > T::zero()) || !mu0_h.is_finite() {
            return Err(Error::invalid("mu0_h", format!("must be > 0, got {mu0_h}")));
        }
        Ok(BiasField { mu0_h, orientation })
    }
}

impl<T: Scalar> Default for BiasField<T> {
    fn default() -> Self {
        BiasField {
            mu0_h: T::lit(0.1429),
            orientation: Orientation::Parallel,
        }
    }
}

/// Film plus bias: everything a dispersion evaluation needs.
///
/// `omega_h` and `omega_m` are derived on every call, never cached.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeContext<T: Scalar = f64> {
    pub film: FilmParams<T>,
    pub field: BiasField<T>,
}

impl<T: Scalar> ModeContext<T> {
    pub fn new(film: FilmParams<T>, field: BiasField<T>) -> Self {
        ModeContext { film, field }
    }

    pub fn omega_h(&self) -> T {
        self.film.gamma * self.field.mu0_h
    }

    pub fn omega_m(&self) -> T {
        self.film.gamma * self.film.mu0_ms()
    }

    pub fn orientation(&self) -> Orientation {
        self.field.orientation
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.field.orientation = orientation;
        self
    }

    /// Bare Larmor frequency `gamma mu0 H / 2pi`, Hz.
    pub fn larmor_frequency(&self) -> T {
        self.omega_h() / T::two_pi()
    }

    /// Uniform-mode (k = 0) frequency, Hz. Shared by both branches.
    pub fn fmr_frequency(&self) -> T {
        let wh = self.omega_h();
        (wh * (wh + self.omega_m())).sqrt() / T::two_pi()
    }

    /// Saturation magnetization (A/m) that places the FMR at `f_target`.
    pub fn calibrated_ms(&self, f_target: T) -> Result<T> {
        let larmor = self.larmor_frequency();
        if !(f_target >= larmor) {
            return Err(Error::BelowLarmor {
                target_hz: f_target.as_f64(),
                larmor_hz: larmor.as_f64(),
            });
        }
        let wt = T::two_pi() * f_target;
        let wh = self.omega_h();
        // wh (wh + wm) = wt^2
        let wm = (wt * wt / wh - wh).max(T::zero());
        Ok(wm / self.film.gamma / T::lit(MU0))
    }

    /// Copy of `self` with Ms fitted so that the FMR sits at `f_target`.
    pub fn with_fmr(&self, f_target: T) -> Result<Self> {
        let ms = self.calibrated_ms(f_target)?;
        let mut out = self.clone();
        out.film.ms = ms;
        Ok(out)
    }

    /// Open frequency interval (Hz) carrying propagating waves on the active branch.
    pub fn band(&self) -> (T, T) {
        let fmr = self.fmr_frequency();
        match self.orientation() {
            Orientation::Parallel => (self.larmor_frequency(), fmr),
            Orientation::Perpendicular => {
                let top = (self.omega_h() + self.omega_m() * T::half()) / T::two_pi();
                (fmr, top)
            }
        }
    }

    pub fn in_band(&self, f: T) -> bool {
        let (lo, hi) = self.band();
        f > lo && f < hi
    }

    fn angular(&self, k: T) -> T {
        let wh = self.omega_h();
        let wm = self.omega_m();
        let kd = k * self.film.thickness;
        let w2 = match self.orientation() {
            Orientation::Parallel => wh * (wh + wm * thickness_factor(kd)),
            Orientation::Perpendicular => {
                // 1 - e^{-2kd} via expm1 for small kd
                let one_minus = -(-(kd + kd)).exp_m1();
                wh * (wh + wm) + wm * wm * T::lit(0.25) * one_minus
            }
        };
        w2.sqrt()
    }

    /// Spin-wave frequency (Hz) at wavenumber `k` on the active branch.
    pub fn dispersion(&self, k: T) -> Result<T> {
        if !(k >= T::zero()) {
            return Err(Error::NegativeWavenumber(k.as_f64()));
        }
        Ok(self.angular(k) / T::two_pi())
    }

    /// Group velocity `d omega / d k` in m/s.
    ///
    /// Negative on the backward volume branch. At `k = 0` the one-sided limit
    /// is returned: `-omega_H omega_M d / (4 omega_FMR)` for backward volume
    /// waves, `+omega_M^2 d / (4 omega_FMR)` for surface waves.
    pub fn group_velocity(&self, k: T) -> Result<T> {
        if !(k >= T::zero()) {
            return Err(Error::NegativeWavenumber(k.as_f64()));
        }
        let wh = self.omega_h();
        let wm = self.omega_m();
        let d = self.film.thickness;
        let kd = k * d;
        let w = self.angular(k);
        let dw2_dk = match self.orientation() {
            Orientation::Parallel => wh * wm * d * thickness_factor_slope(kd),
            Orientation::Perpendicular => wm * wm * d * T::half() * (-(kd + kd)).exp(),
        };
        Ok(dw2_dk / (w + w))
    }

    /// Wavenumber (rad/m) of the propagating mode at `f`, by bracketed bisection.
    ///
    /// Both branches are strictly monotone in `k`, so the root is unique.
    pub fn solve_k(&self, f: T) -> Result<T> {
        let (lo_f, hi_f) = self.band();
        if !self.in_band(f) {
            return Err(Error::NoPropagatingMode {
                f_hz: f.as_f64(),
                lo_hz: lo_f.as_f64(),
                hi_hz: hi_f.as_f64(),
            });
        }
        let decreasing = self.orientation() == Orientation::Parallel;
        // f(k) - f, oriented so that it is negative below the root
        let residual = |k: T| {
            let fk = self.angular(k) / T::two_pi();
            if decreasing {
                f - fk
            } else {
                fk - f
            }
        };
        let mut lo = T::zero();
        let mut hi = T::one() / self.film.thickness;
        let mut expansions = 0;
        while residual(hi) < T::zero() {
            lo = hi;
            hi = hi + hi;
            expansions += 1;
            if expansions > 200 || !hi.is_finite() {
                return Err(Error::NoPropagatingMode {
                    f_hz: f.as_f64(),
                    lo_hz: lo_f.as_f64(),
                    hi_hz: hi_f.as_f64(),
                });
            }
        }
        for _ in 0..400 {
            let mid = (lo + hi) * T::half();
            if mid <= lo || mid >= hi {
                break;
            }
            if residual(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo + hi) * T::half())
    }

    /// Amplitude relaxation rate `eta = gamma mu0 dH0 / 2`, rad/s.
    ///
    /// The stored linewidth is read as a full width, so the free amplitude
    /// decays as `exp(-eta t)`.
    pub fn damping_rate(&self) -> T {
        self.film.gamma * self.film.linewidth * T::half()
    }

    /// Propagation length over which the amplitude drops by 1/e at wavenumber `k`.
    pub fn decay_length(&self, k: T) -> Result<T> {
        let vg = self.group_velocity(k)?.abs();
        let eta = self.damping_rate();
        Ok(if eta > T::zero() {
            vg / eta
        } else {
            T::infinity()
        })
    }
}

/// `P(x) = (1 - e^{-x}) / x`, with `P(0) = 1`.
pub fn thickness_factor<T: Scalar>(x: T) -> T {
    if x < T::lit(1e-8) {
        T::one() - x * T::half()
    } else {
        -(-x).exp_m1() / x
    }
}

/// `P'(x)`, series below x = 0.5 to dodge the cancellation in the closed form.
pub fn thickness_factor_slope<T: Scalar>(x: T) -> T {
    if x < T::half() {
        // P'(x) = sum_{n>=1} (-1)^n n x^{n-1} / (n+1)!
        let mut sum = T::zero();
        let mut pow = T::one();
        let mut fact = T::one(); // (n+1)!
        for n in 1..30 {
            let nf = T::from_usize_lossy(n);
            fact = fact * (nf + T::one());
            let term = nf * pow / fact;
            sum = if n % 2 == 1 { sum - term } else { sum + term };
            pow = pow * x;
        }
        sum
    } else {
        let e = (-x).exp();
        (x * e + (-x).exp_m1()) / (x * x)
    }
}
