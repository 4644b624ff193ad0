//! Phase-encoded logic on top of a gate netlist.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex;

use crate::circuit::{Channel, GateNetlist};
use crate::error::{Error, Result};
use crate::scalar::{wrap_phase, Scalar};

pub fn majority(a: bool, b: bool, c: bool) -> bool {
    (a && b) || (b && c) || (a && c)
}

/// Logic '0' sits at `phi0`, logic '1' at `phi0 + pi`. A phase decodes to a
/// bit when it lies within `guard` of that bit's code phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEncoding<T: Scalar = f64> {
    pub phi0: T,
    pub guard: T,
    /// Output amplitudes at or below this decode as indeterminate.
    pub amplitude_floor: T,
}

impl<T: Scalar> Default for PhaseEncoding<T> {
    fn default() -> Self {
        PhaseEncoding {
            phi0: T::zero(),
            guard: T::FRAC_PI_2() - T::lit(0.01),
            amplitude_floor: T::zero(),
        }
    }
}

impl<T: Scalar> PhaseEncoding<T> {
    pub fn new(phi0: T, guard: T) -> Result<Self> {
        if !(guard > T::zero() && guard <= T::FRAC_PI_2()) {
            return Err(Error::invalid(
                "guard",
                format!("must lie in (0, pi/2], got {guard}"),
            ));
        }
        Ok(PhaseEncoding {
            phi0: wrap_phase(phi0),
            guard,
            ..Self::default()
        })
    }

    pub fn phi1(&self) -> T {
        wrap_phase(self.phi0 + T::PI())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decoded {
    Zero,
    One,
    Indeterminate,
}

impl Decoded {
    pub fn bit(self) -> Option<bool> {
        match self {
            Decoded::Zero => Some(false),
            Decoded::One => Some(true),
            Decoded::Indeterminate => None,
        }
    }
}

impl From<bool> for Decoded {
    fn from(b: bool) -> Self {
        if b {
            Decoded::One
        } else {
            Decoded::Zero
        }
    }
}

impl fmt::Display for Decoded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoded::Zero => "0",
            Decoded::One => "1",
            Decoded::Indeterminate => "X",
        })
    }
}

pub fn encode<T: Scalar>(bit: bool, enc: &PhaseEncoding<T>) -> T {
    if bit {
        enc.phi1()
    } else {
        enc.phi0
    }
}

pub fn decode<T: Scalar>(phase: T, enc: &PhaseEncoding<T>) -> Decoded {
    decode_with_margin(phase, enc).0
}

/// Decoded value and the distance (rad) from `phase` to the nearest guard
/// boundary; the margin is zero when indeterminate.
pub fn decode_with_margin<T: Scalar>(phase: T, enc: &PhaseEncoding<T>) -> (Decoded, T) {
    let d0 = wrap_phase(phase - enc.phi0).abs();
    let d1 = wrap_phase(phase - enc.phi1()).abs();
    if d0 < enc.guard {
        (Decoded::Zero, enc.guard - d0)
    } else if d1 < enc.guard {
        (Decoded::One, enc.guard - d1)
    } else {
        (Decoded::Indeterminate, T::zero())
    }
}

/// Three input bits `(b1, b2, b3)` for channels i1..i3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LogicState {
    pub bits: [bool; 3],
}

impl LogicState {
    pub fn new(b1: bool, b2: bool, b3: bool) -> Self {
        LogicState { bits: [b1, b2, b3] }
    }

    /// Conventional row order of the majority truth table.
    pub fn table_order() -> [LogicState; 8] {
        ["000", "001", "010", "100", "101", "110", "011", "111"]
            .map(|s| s.parse().expect("static state"))
    }

    pub fn majority(&self) -> bool {
        majority(self.bits[0], self.bits[1], self.bits[2])
    }

    pub fn is_unanimous(&self) -> bool {
        self.bits[0] == self.bits[1] && self.bits[1] == self.bits[2]
    }
}

impl fmt::Display for LogicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for LogicState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Config(format!(
                    "logic state `{s}` must contain only 0 and 1"
                ))),
            })
            .collect::<Result<_>>()?;
        match bits[..] {
            [a, b, c] => Ok(LogicState::new(a, b, c)),
            _ => Err(Error::Config(format!(
                "logic state `{s}` must have exactly three bits"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateReadout<T: Scalar = f64> {
    pub amplitude: T,
    /// Output phase relative to the calibrated logic-0 reference, shifted by
    /// `phi0`, in `(-pi, pi]`.
    pub phase: T,
    pub decoded: Decoded,
    pub margin: T,
}

/// Complex carrier output for explicit input phases. Each shifter is set to
/// its calibrated offset plus the input phase.
pub fn output_phasor<T: Scalar>(netlist: &GateNetlist<T>, phases: [T; 3]) -> Complex<T> {
    let fc = netlist.f_carrier();
    Channel::ALL
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &ch| {
            let offset = netlist.phase(ch);
            acc + netlist
                .with_phase(ch, offset + phases[ch.index()])
                .channel_transfer(ch, fc)
        })
}

/// Evaluate the gate with arbitrary input phases and decode the output.
pub fn run_logic_phases<T: Scalar>(
    netlist: &GateNetlist<T>,
    phases: [T; 3],
    enc: &PhaseEncoding<T>,
) -> GateReadout<T> {
    let y = output_phasor(netlist, phases);
    let amplitude = y.norm();
    let phase = wrap_phase(y.arg() - netlist.settings().reference_phase);
    let (decoded, margin) = if amplitude > enc.amplitude_floor {
        decode_with_margin(phase, enc)
    } else {
        (Decoded::Indeterminate, T::zero())
    };
    GateReadout {
        amplitude,
        phase,
        decoded,
        margin,
    }
}

pub fn run_logic_state<T: Scalar>(
    netlist: &GateNetlist<T>,
    state: LogicState,
    enc: &PhaseEncoding<T>,
) -> GateReadout<T> {
    run_logic_phases(netlist, state.bits.map(|b| encode(b, enc)), enc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeReport<T: Scalar = f64> {
    pub cascadable: bool,
    /// max / min output amplitude over the readouts.
    pub spread: T,
}

pub fn cascade_check<T: Scalar>(
    readouts: &[GateReadout<T>],
    tolerance: T,
) -> Result<CascadeReport<T>> {
    if readouts.len() < 2 {
        return Err(Error::invalid("readouts", "need at least two readouts"));
    }
    let max = readouts.iter().map(|r| r.amplitude).fold(T::zero(), T::max);
    let min = readouts
        .iter()
        .map(|r| r.amplitude)
        .fold(T::infinity(), T::min);
    let spread = if min > T::zero() {
        max / min
    } else {
        T::infinity()
    };
    Ok(CascadeReport {
        cascadable: spread <= tolerance,
        spread,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullAdderBits {
    pub sum: bool,
    pub cout: bool,
}

/// Full adder out of three majority gates and free inversions.
pub fn full_adder(a: bool, b: bool, cin: bool) -> FullAdderBits {
    let cout = majority(a, b, cin);
    let sum = majority(!cout, majority(a, b, !cin), cin);
    FullAdderBits { sum, cout }
}

/// The full adder evaluated on the simulated gate. Inversion is a pi shift
/// of the encoded input phase; gate outputs are regenerated to full
/// amplitude before feeding the next stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullAdderReadout<T: Scalar = f64> {
    pub sum: Decoded,
    pub cout: Decoded,
    /// Carry gate, inner gate `maj(a, b, !cin)`, sum gate.
    pub gates: [GateReadout<T>; 3],
}

pub fn full_adder_on_gate<T: Scalar>(
    netlist: &GateNetlist<T>,
    enc: &PhaseEncoding<T>,
    a: bool,
    b: bool,
    cin: bool,
) -> Result<FullAdderReadout<T>> {
    let e = |bit: bool| encode(bit, enc);
    let not = |phase: T| wrap_phase(phase + T::PI());
    let stuck = |g: &GateReadout<T>, s: &str| {
        g.decoded.bit().ok_or_else(|| Error::IndeterminateLogic {
            state: s.to_string(),
        })
    };

    let carry = run_logic_phases(netlist, [e(a), e(b), e(cin)], enc);
    let cout = stuck(&carry, "carry gate")?;
    let inner = run_logic_phases(netlist, [e(a), e(b), not(e(cin))], enc);
    let m = stuck(&inner, "inner gate")?;
    let outer = run_logic_phases(netlist, [not(e(cout)), e(m), e(cin)], enc);
    Ok(FullAdderReadout {
        sum: outer.decoded,
        cout: carry.decoded,
        gates: [carry, inner, outer],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthRow<T: Scalar = f64> {
    pub state: LogicState,
    pub input_phases: [T; 3],
    pub readout: GateReadout<T>,
}

impl<T: Scalar> TruthRow<T> {
    pub fn correct(&self) -> bool {
        self.readout.decoded.bit() == Some(self.state.majority())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthTable<T: Scalar = f64> {
    pub rows: Vec<TruthRow<T>>,
    /// Human-readable problems: indeterminate or wrong rows, amplitude
    /// pattern off the ideal {A, 3A}.
    pub flags: Vec<String>,
}

/// Relative tolerance on the {A, 3A} amplitude pattern before the table is
/// flagged as miscalibrated.
pub const AMPLITUDE_PATTERN_TOLERANCE: f64 = 0.05;

pub fn truth_table<T: Scalar>(netlist: &GateNetlist<T>, enc: &PhaseEncoding<T>) -> TruthTable<T> {
    let rows: Vec<TruthRow<T>> = LogicState::table_order()
        .into_iter()
        .map(|state| TruthRow {
            state,
            input_phases: state.bits.map(|b| encode(b, enc)),
            readout: run_logic_state(netlist, state, enc),
        })
        .collect();

    let mut flags = Vec::new();
    for r in &rows {
        match r.readout.decoded.bit() {
            None => flags.push(format!("state {} indeterminate", r.state)),
            Some(b) if b != r.state.majority() => flags.push(format!(
                "state {} decoded {} but majority is {}",
                r.state,
                b as u8,
                r.state.majority() as u8
            )),
            _ => {}
        }
    }
    let (uni, split): (Vec<&TruthRow<T>>, Vec<&TruthRow<T>>) =
        rows.iter().partition(|r| r.state.is_unanimous());
    let mean = |v: &[&TruthRow<T>]| {
        v.iter().map(|r| r.readout.amplitude).sum::<T>() / T::from_usize_lossy(v.len())
    };
    let a = mean(&split);
    let tol = T::lit(AMPLITUDE_PATTERN_TOLERANCE);
    let off = |x: T, target: T| !(target > T::zero()) || ((x - target) / target).abs() > tol;
    if split.iter().any(|r| off(r.readout.amplitude, a))
        || uni
            .iter()
            .any(|r| off(r.readout.amplitude, T::lit(3.0) * a))
    {
        flags.push("miscalibrated: output amplitudes deviate from the {A, 3A} pattern".to_string());
    }
    TruthTable { rows, flags }
}

impl<T: Scalar> TruthTable<T> {
    pub fn all_correct(&self) -> bool {
        self.rows.iter().all(TruthRow::correct)
    }

    pub fn any_indeterminate(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.readout.decoded == Decoded::Indeterminate)
    }

    pub fn min_margin(&self) -> T {
        self.rows
            .iter()
            .map(|r| r.readout.margin)
            .fold(T::infinity(), T::min)
    }

    /// Unanimous over 2:1 mean amplitude.
    pub fn amplitude_ratio(&self) -> T {
        let (uni, split): (Vec<&TruthRow<T>>, Vec<&TruthRow<T>>) =
            self.rows.iter().partition(|r| r.state.is_unanimous());
        let mean = |v: &[&TruthRow<T>]| {
            v.iter().map(|r| r.readout.amplitude).sum::<T>() / T::from_usize_lossy(v.len().max(1))
        };
        mean(&uni) / mean(&split)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "in_phase_i1_rad,in_phase_i2_rad,in_phase_i3_rad,state,out_phase_rad,out_amp,decoded"
        )?;
        for r in &self.rows {
            let p = r.input_phases;
            writeln!(
                w,
                "{:e},{:e},{:e},{},{:e},{:e},{}",
                p[0].as_f64(),
                p[1].as_f64(),
                p[2].as_f64(),
                r.state,
                r.readout.phase.as_f64(),
                r.readout.amplitude.as_f64(),
                r.readout.decoded
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_majority_gate, DeviceGeometry, MicrowaveSettings};
    use crate::physics::ModeContext;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ideal() -> GateNetlist {
        let ctx = ModeContext::default().with_fmr(6.06e9).unwrap();
        let n = build_majority_gate(
            &DeviceGeometry::symmetric(),
            &ctx,
            &MicrowaveSettings::default(),
        )
        .unwrap();
        let r = n.channel_transfer(Channel::I2, n.f_carrier()).arg();
        n.with_reference_phase(r)
    }

    const ALL_BITS: [bool; 2] = [false, true];

    #[test]
    fn majority_examples() {
        assert!(!majority(false, false, true));
        assert!(majority(true, false, true));
        for x in ALL_BITS {
            assert_eq!(majority(x, x, x), x);
        }
    }

    #[test]
    fn majority_symmetry_and_self_duality() {
        for a in ALL_BITS {
            for b in ALL_BITS {
                for c in ALL_BITS {
                    let m = majority(a, b, c);
                    for p in [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                        assert_eq!(majority(p.0, p.1, p.2), m);
                    }
                    assert_eq!(majority(!a, !b, !c), !m);
                }
            }
        }
    }

    #[test]
    fn decode_examples() {
        let enc = PhaseEncoding::default();
        assert_eq!(decode(0.05, &enc), Decoded::Zero);
        assert_eq!(decode(PI - 0.05, &enc), Decoded::One);
        assert_eq!(decode(PI / 2.0, &enc), Decoded::Indeterminate);
        assert_eq!(decode(-PI + 0.05, &enc), Decoded::One);
        assert!(PhaseEncoding::new(0.0, 2.0).is_err());
        assert_eq!(encode(true, &enc), PI);
    }

    #[test]
    fn table_order_and_parsing() {
        let order: Vec<String> = LogicState::table_order()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            order,
            ["000", "001", "010", "100", "101", "110", "011", "111"]
        );
        assert!("10".parse::<LogicState>().is_err());
        assert!("1a0".parse::<LogicState>().is_err());
    }

    #[test]
    fn ideal_truth_table() {
        let t = truth_table(&ideal(), &PhaseEncoding::default());
        assert!(t.all_correct());
        assert!(t.flags.is_empty(), "{:?}", t.flags);
        assert_relative_eq!(t.amplitude_ratio(), 3.0, max_relative = 1e-12);
        let a = t.rows[1].readout.amplitude;
        for r in &t.rows {
            let expect = if r.state.is_unanimous() { 3.0 * a } else { a };
            assert_relative_eq!(r.readout.amplitude, expect, max_relative = 1e-12);
            assert!(r.readout.margin > PI / 4.0);
        }
    }

    #[test]
    fn complementary_states_differ_by_pi() {
        let n = ideal();
        let enc = PhaseEncoding::default();
        let a = run_logic_state(&n, "100".parse().unwrap(), &enc);
        let b = run_logic_state(&n, "011".parse().unwrap(), &enc);
        assert_relative_eq!(wrap_phase(b.phase - a.phase).abs(), PI, epsilon = 1e-12);
    }

    #[test]
    fn relabeled_encoding_keeps_decoding() {
        let n = ideal();
        let base = truth_table(&n, &PhaseEncoding::default());
        let flipped = truth_table(&n, &PhaseEncoding::new(PI, PI / 2.0 - 0.01).unwrap());
        for (x, y) in base.rows.iter().zip(&flipped.rows) {
            assert_eq!(x.readout.decoded, y.readout.decoded);
        }
    }

    #[test]
    fn weak_channel_is_flagged() {
        let n = ideal().with_attenuation(Channel::I1, 20.0).unwrap();
        let t = truth_table(&n, &PhaseEncoding::default());
        assert!(t.flags.iter().any(|f| f.starts_with("miscalibrated")));
        // the two strong channels dominate; ties are broken by the weak one
        let amp = |s: &str| {
            t.rows
                .iter()
                .find(|r| r.state.to_string() == s)
                .unwrap()
                .readout
                .amplitude
        };
        let a = 10f64.powf(-1.0);
        assert_relative_eq!(
            amp("100") / amp("000"),
            (2.0 - a) / (2.0 + a),
            max_relative = 1e-9
        );
        assert_relative_eq!(amp("101") / amp("000"), a / (2.0 + a), max_relative = 1e-9);
    }

    #[test]
    fn cascade_examples() {
        let t = truth_table(&ideal(), &PhaseEncoding::default());
        let readouts: Vec<GateReadout> = t.rows.iter().map(|r| r.readout).collect();
        let c = cascade_check(&readouts, 1.5).unwrap();
        assert_relative_eq!(c.spread, 3.0, max_relative = 1e-12);
        assert!(!c.cascadable);
        let one = cascade_check(&[readouts[0], readouts[0]], 1.5).unwrap();
        assert_eq!(one.spread, 1.0);
        assert!(one.cascadable);
        let mv = |a: f64| GateReadout {
            amplitude: a,
            phase: 0.0,
            decoded: Decoded::Zero,
            margin: 1.0,
        };
        assert_relative_eq!(
            cascade_check(&[mv(75e-3), mv(25e-3)], 1.5).unwrap().spread,
            3.0,
            max_relative = 1e-12
        );
        assert!(cascade_check(&[mv(1.0), mv(0.0)], 1.5)
            .unwrap()
            .spread
            .is_infinite());
        assert!(cascade_check(&[mv(1.0)], 1.5).is_err());
    }

    #[test]
    fn full_adder_matches_arithmetic() {
        let n = ideal();
        let enc = PhaseEncoding::default();
        for a in ALL_BITS {
            for b in ALL_BITS {
                for c in ALL_BITS {
                    let total = a as u8 + b as u8 + c as u8;
                    let bits = full_adder(a, b, c);
                    assert_eq!((bits.sum as u8) + 2 * (bits.cout as u8), total);
                    let g = full_adder_on_gate(&n, &enc, a, b, c).unwrap();
                    assert_eq!(g.sum.bit(), Some(bits.sum));
                    assert_eq!(g.cout.bit(), Some(bits.cout));
                }
            }
        }
        assert_eq!(
            full_adder(true, true, true),
            FullAdderBits {
                sum: true,
                cout: true
            }
        );
        assert_eq!(
            full_adder(true, false, false),
            FullAdderBits {
                sum: true,
                cout: false
            }
        );
    }

    #[test]
    fn csv_shape() {
        let t = truth_table(&ideal(), &PhaseEncoding::default());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 9);
        assert!(s.lines().nth(4).unwrap().contains(",100,"));
    }

    proptest! {
        #[test]
        fn common_offset_shifts_output(delta in -3.0f64..3.0, s in 0usize..8) {
            let n = ideal();
            let enc = PhaseEncoding::default();
            let state = LogicState::table_order()[s];
            let base = run_logic_state(&n, state, &enc);
            let shifted_enc = PhaseEncoding { phi0: delta, ..enc };
            let moved = run_logic_state(&n, state, &shifted_enc);
            prop_assert!(wrap_phase(moved.phase - base.phase - delta).abs() < 1e-9);
            prop_assert_eq!(moved.decoded, base.decoded);
        }

        #[test]
        fn decode_is_covariant(phase in -3.2f64..3.2, phi0 in -3.2f64..3.2) {
            let a = decode(phase, &PhaseEncoding::default());
            let b = decode(phase + phi0, &PhaseEncoding { phi0, ..PhaseEncoding::default() });
            // boundaries may round differently; only compare away from them
            let d = wrap_phase(phase).abs();
            prop_assume!((d - (PI / 2.0 - 0.01)).abs() > 1e-9 && (d - (PI / 2.0 + 0.01)).abs() > 1e-9);
            prop_assert_eq!(a, b);
        }
    }
}
