//! Exact multi-tone signals.
//!
//! A [`LineSpectrum`] stores a real signal as
//!
//! ```text
//! f(t) = A0 + sum_k Re{ A_k exp(j w_k t) }
//! ```
//!
//! with complex peak amplitudes `A_k` on frequencies `w_k = n_k * w0` that are
//! integer multiples of a single base frequency `w0`. Keeping every signal on
//! a common harmonic grid makes products, time derivatives, Hilbert
//! transforms and periodic means exact.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative tolerance used when snapping frequencies onto the harmonic grid.
pub const COMMENSURATE_RTOL: f64 = 1e-9;

/// Largest accepted ratio between the smallest positive line and the base
/// frequency. Anything finer is treated as incommensurate.
pub const MAX_BASE_DIVISOR: u64 = 10_000;

/// Relative amplitude below which lines produced by [`LineSpectrum::multiply`]
/// are dropped.
pub const PRUNE_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Volt,
    Ampere,
    Watt,
    Joule,
    Unitless,
}

impl Unit {
    /// Unit of a pointwise product.
    pub fn product(self, other: Unit) -> Unit {
        match (self, other) {
            (Unit::Volt, Unit::Ampere) | (Unit::Ampere, Unit::Volt) => Unit::Watt,
            (Unit::Unitless, u) | (u, Unit::Unitless) => u,
            _ => Unit::Unitless,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Volt => "V",
            Unit::Ampere => "A",
            Unit::Watt => "W",
            Unit::Joule => "J",
            Unit::Unitless => "1",
        }
    }
}

/// One spectral line: angular frequency and complex peak amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub omega: f64,
    pub amplitude: Complex64,
}

impl SpectralLine {
    pub fn new(omega: f64, amplitude: Complex64) -> Self {
        Self { omega, amplitude }
    }

    /// A real tone `peak * cos(omega t + phase)`.
    pub fn tone(peak: f64, omega: f64, phase: f64) -> Self {
        Self::new(omega, Complex64::from_polar(peak, phase))
    }

    /// RMS value of the line over a period (`|A|` for DC).
    pub fn rms(&self) -> f64 {
        if self.omega == 0.0 {
            self.amplitude.norm()
        } else {
            self.amplitude.norm() / 2f64.sqrt()
        }
    }
}

/// Wire format of a single line: `{"omega": .., "re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub omega: f64,
    pub re: f64,
    pub im: f64,
}

/// A point `t + js` of the upper half of the complex time plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTimePoint {
    t: f64,
    s: f64,
}

impl ComplexTimePoint {
    pub fn new(t: f64, s: f64) -> Result<Self> {
        if !(s >= 0.0) || !t.is_finite() || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "complex time point requires finite t and s >= 0, got ({t}, {s})"
            )));
        }
        Ok(Self { t, s })
    }

    /// Point on the real time axis.
    pub fn real(t: f64) -> Self {
        Self { t, s: 0.0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sampled signal needs finite t0 and dt > 0, got t0={t0}, dt={dt}"
            )));
        }
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample {k} is not finite")));
        }
        Ok(Self { t0, dt, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|k| self.time(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Line {
    harmonic: u64,
    amplitude: Complex64,
}

/// A real signal made of finitely many commensurate spectral lines.
///
/// Lines are kept sorted by frequency with no duplicates, and the DC line (if
/// any) has a purely real amplitude. The type is immutable; every operation
/// returns a new spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSpectrum {
    unit: Unit,
    base: Option<f64>,
    lines: Vec<Line>,
}

impl LineSpectrum {
    pub fn zero(unit: Unit) -> Self {
        Self {
            unit,
            base: None,
            lines: Vec::new(),
        }
    }

    pub fn dc(unit: Unit, value: f64) -> Self {
        Self::new(unit, [SpectralLine::new(0.0, Complex64::new(value, 0.0))])
            .expect("a single DC line is always valid")
    }

    /// Single line `Re{amplitude * exp(j omega t)}`.
    pub fn tone(unit: Unit, omega: f64, amplitude: Complex64) -> Result<Self> {
        Self::new(unit, [SpectralLine::new(omega, amplitude)])
    }

    /// Builds a spectrum from arbitrary lines.
    ///
    /// Lines on the same frequency are summed and zero amplitudes are dropped.
    /// Fails on negative or non-finite frequencies, complex DC amplitudes, or
    /// frequencies without a common base.
    pub fn new(unit: Unit, lines: impl IntoIterator<Item = SpectralLine>) -> Result<Self> {
        let lines: Vec<SpectralLine> = lines.into_iter().collect();
        for line in &lines {
            if !line.omega.is_finite() || line.omega < 0.0 {
                return Err(Error::InvalidSpectrum(format!(
                    "frequency must be finite and >= 0, got {}",
                    line.omega
                )));
            }
            if !line.amplitude.re.is_finite() || !line.amplitude.im.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "amplitude at omega = {} is not finite",
                    line.omega
                )));
            }
            if line.omega == 0.0 && line.amplitude.im != 0.0 {
                return Err(Error::InvalidSpectrum(format!(
                    "DC amplitude must be real, got {}",
                    line.amplitude
                )));
            }
        }
        let omegas: Vec<f64> = lines.iter().map(|l| l.omega).collect();
        let base = common_base(&omegas)?;
        let mut acc: BTreeMap<u64, Complex64> = BTreeMap::new();
        for line in &lines {
            let n = harmonic_index(line.omega, base);
            *acc.entry(n).or_default() += line.amplitude;
        }
        Ok(Self::from_harmonics(unit, base, acc, 0.0))
    }

    /// Sum of real tones `peak * cos(omega t + phase)`.
    ///
    /// Negative frequencies are folded onto their mirror image and a tone at
    /// `omega = 0` contributes `peak * cos(phase)` to DC.
    pub fn from_tones(unit: Unit, tones: &[(f64, f64, f64)]) -> Result<Self> {
        let lines = tones.iter().map(|&(peak, omega, phase)| {
            if omega == 0.0 {
                SpectralLine::new(0.0, Complex64::new(peak * phase.cos(), 0.0))
            } else if omega < 0.0 {
                SpectralLine::tone(peak, -omega, -phase)
            } else {
                SpectralLine::tone(peak, omega, phase)
            }
        });
        Self::new(unit, lines)
    }

    pub fn from_records(unit: Unit, records: &[LineRecord]) -> Result<Self> {
        Self::new(
            unit,
            records
                .iter()
                .map(|r| SpectralLine::new(r.omega, Complex64::new(r.re, r.im))),
        )
    }

    pub fn to_records(&self) -> Vec<LineRecord> {
        self.lines()
            .map(|l| LineRecord {
                omega: l.omega,
                re: l.amplitude.re,
                im: l.amplitude.im,
            })
            .collect()
    }

    fn from_harmonics(
        unit: Unit,
        base: Option<f64>,
        acc: BTreeMap<u64, Complex64>,
        prune_rtol: f64,
    ) -> Self {
        let max = acc.values().map(|a| a.norm()).fold(0.0, f64::max);
        let threshold = prune_rtol * max;
        let lines: Vec<Line> = acc
            .into_iter()
            .filter(|(_, a)| *a != Complex64::new(0.0, 0.0) && a.norm() >= threshold)
            .map(|(harmonic, mut amplitude)| {
                if harmonic == 0 {
                    amplitude.im = 0.0;
                }
                Line {
                    harmonic,
                    amplitude,
                }
            })
            .collect();
        let base = if lines.iter().any(|l| l.harmonic > 0) {
            base
        } else {
            None
        };
        Self { unit, base, lines }
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn with_unit(mut self, unit: Unit) -> Self {
        self.unit = unit;
        self
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Base frequency `w0`; `None` when there is no positive-frequency line.
    pub fn base_omega(&self) -> Option<f64> {
        self.base
    }

    /// Least period shared by all lines, `2 pi / w0`.
    pub fn common_period(&self) -> Option<f64> {
        self.base.map(|w0| 2.0 * PI / w0)
    }

    fn omega_of(&self, line: &Line) -> f64 {
        match self.base {
            Some(w0) => line.harmonic as f64 * w0,
            None => 0.0,
        }
    }

    pub fn lines(&self) -> impl ExactSizeIterator<Item = SpectralLine> + '_ {
        self.lines
            .iter()
            .map(move |l| SpectralLine::new(self.omega_of(l), l.amplitude))
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.lines().map(|l| l.omega).collect()
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.lines.iter().map(|l| l.amplitude).collect()
    }

    /// Amplitude of the line at `omega` (within the commensurability
    /// tolerance), or zero when there is no such line.
    pub fn amplitude_at(&self, omega: f64) -> Complex64 {
        self.lines()
            .find(|l| (l.omega - omega).abs() <= COMMENSURATE_RTOL * omega.abs().max(1e-300))
            .map(|l| l.amplitude)
            .unwrap_or_default()
    }

    /// Smallest and largest positive frequency.
    pub fn positive_range(&self) -> Option<(f64, f64)> {
        let mut positive = self.lines().map(|l| l.omega).filter(|w| *w > 0.0);
        let first = positive.next()?;
        let last = positive.last().unwrap_or(first);
        Some((first, last))
    }

    /// Same frequencies, new amplitudes. DC amplitudes are made real.
    ///
    /// Panics if `amplitudes` does not have one entry per line.
    pub fn with_amplitudes(&self, unit: Unit, amplitudes: &[Complex64]) -> Self {
        assert_eq!(amplitudes.len(), self.lines.len(), "one amplitude per line");
        let acc = self
            .lines
            .iter()
            .zip(amplitudes)
            .map(|(l, a)| (l.harmonic, *a))
            .collect();
        Self::from_harmonics(unit, self.base, acc, 0.0)
    }

    /// `A0 + sum Re{A_k exp(j w_k t)}`.
    pub fn evaluate(&self, t: f64) -> f64 {
        self.lines()
            .map(|l| {
                if l.omega == 0.0 {
                    l.amplitude.re
                } else {
                    (l.amplitude * Complex64::from_polar(1.0, l.omega * t)).re
                }
            })
            .sum()
    }

    /// Analytic-phasor transform `A0 + sum A_k exp(j w_k t) exp(-w_k s)`.
    ///
    /// At `s = 0` this is the analytic signal `f + j f_h`.
    pub fn analytic_at(&self, point: ComplexTimePoint) -> Complex64 {
        let (t, s) = (point.t(), point.s());
        self.lines()
            .map(|l| l.amplitude * Complex64::from_polar((-l.omega * s).exp(), l.omega * t))
            .sum()
    }

    /// Hilbert transform: `A_k -> -j A_k`, DC removed.
    pub fn hilbert(&self) -> Self {
        self.map_positive(self.unit, |_, a| Complex64::new(a.im, -a.re))
    }

    /// Time derivative: `A_k -> j w_k A_k`, DC removed.
    pub fn derivative(&self) -> Self {
        self.map_positive(self.unit, |w, a| Complex64::new(0.0, w) * a)
    }

    fn map_positive(&self, unit: Unit, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let acc = self
            .lines
            .iter()
            .filter(|l| l.harmonic > 0)
            .map(|l| (l.harmonic, f(self.omega_of(l), l.amplitude)))
            .collect();
        Self::from_harmonics(unit, self.base, acc, 0.0)
    }

    /// Periodic mean, which is the DC amplitude.
    pub fn mean(&self) -> f64 {
        match self.lines.first() {
            Some(l) if l.harmonic == 0 => l.amplitude.re,
            _ => 0.0,
        }
    }

    /// RMS norm over a common period.
    pub fn rms(&self) -> f64 {
        self.lines()
            .map(|l| {
                let r = l.rms();
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Upper bound on `|f(t)|` and on `|analytic_at|` over the half plane.
    pub fn amplitude_sum(&self) -> f64 {
        self.lines.iter().map(|l| l.amplitude.norm()).sum()
    }

    pub fn sample(&self, t0: f64, dt: f64, n: usize) -> Result<SampledSignal> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be >= 1".into()));
        }
        let samples = (0..n).map(|k| self.evaluate(t0 + k as f64 * dt)).collect();
        SampledSignal::new(t0, dt, samples)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let acc = self
            .lines
            .iter()
            .map(|l| (l.harmonic, l.amplitude * factor))
            .collect();
        Self::from_harmonics(self.unit, self.base, acc, 0.0)
    }

    /// `alpha * self + beta * other`, keeping the unit of `self`.
    pub fn combine(&self, alpha: f64, other: &LineSpectrum, beta: f64) -> Result<Self> {
        let base = self.joint_base(other)?;
        let mut acc: BTreeMap<u64, Complex64> = BTreeMap::new();
        for (spectrum, weight) in [(self, alpha), (other, beta)] {
            for l in spectrum.lines() {
                *acc.entry(harmonic_index(l.omega, base)).or_default() += l.amplitude * weight;
            }
        }
        Ok(Self::from_harmonics(self.unit, base, acc, 0.0))
    }

    pub fn add(&self, other: &LineSpectrum) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &LineSpectrum) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Exact pointwise product via sum and difference frequencies.
    pub fn multiply(&self, other: &LineSpectrum) -> Result<Self> {
        let unit = self.unit.product(other.unit);
        let base = self.joint_base(other)?;
        let a = self.two_sided(base);
        let b = other.two_sided(base);
        let mut acc: BTreeMap<u64, Complex64> = BTreeMap::new();
        for &(n, x) in &a {
            for &(m, y) in &b {
                let k = n + m;
                if k >= 0 {
                    *acc.entry(k as u64).or_default() += x * y;
                }
            }
        }
        // back to one-sided peak amplitudes
        for (k, v) in acc.iter_mut() {
            if *k > 0 {
                *v *= 2.0;
            }
        }
        Ok(Self::from_harmonics(unit, base, acc, PRUNE_RTOL))
    }

    /// Two-sided coefficients `c_n` with `f(t) = sum c_n exp(j n w0 t)`.
    fn two_sided(&self, base: Option<f64>) -> Vec<(i64, Complex64)> {
        let mut out = Vec::with_capacity(2 * self.lines.len());
        for l in self.lines() {
            let n = harmonic_index(l.omega, base) as i64;
            if n == 0 {
                out.push((0, l.amplitude));
            } else {
                out.push((n, l.amplitude * 0.5));
                out.push((-n, l.amplitude.conj() * 0.5));
            }
        }
        out
    }

    fn joint_base(&self, other: &LineSpectrum) -> Result<Option<f64>> {
        match (self.base, other.base) {
            (None, b) | (b, None) => Ok(b),
            (Some(a), Some(b)) if a == b => Ok(Some(a)),
            _ => {
                let mut omegas = self.omegas();
                omegas.extend(other.omegas());
                common_base(&omegas)
            }
        }
    }
}

impl fmt::Display for LineSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, l) in self.lines().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}@{}", l.amplitude, l.omega)?;
        }
        write!(f, "] {}", self.unit.symbol())
    }
}

/// Serialized as a JSON array of `{omega, re, im}` records.
impl Serialize for LineSpectrum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_records().serialize(serializer)
    }
}

fn harmonic_index(omega: f64, base: Option<f64>) -> u64 {
    match base {
        Some(w0) if omega > 0.0 => (omega / w0).round() as u64,
        _ => 0,
    }
}

/// Largest `w0` such that every positive entry of `omegas` is an integer
/// multiple of it (relative tolerance [`COMMENSURATE_RTOL`]).
///
/// Returns `Ok(None)` when there is no positive frequency.
pub fn common_base(omegas: &[f64]) -> Result<Option<f64>> {
    let positive: Vec<f64> = omegas.iter().copied().filter(|w| *w > 0.0).collect();
    let Some(reference) = positive.iter().copied().reduce(f64::min) else {
        return Ok(None);
    };
    let incommensurate = || Error::Incommensurate {
        omegas: positive.clone(),
    };
    let mut divisor: u64 = 1;
    for &w in &positive {
        let q = ratio_denominator(w / reference).ok_or_else(incommensurate)?;
        divisor = lcm(divisor, q);
        if divisor > MAX_BASE_DIVISOR {
            return Err(incommensurate());
        }
    }
    let base = reference / divisor as f64;
    for &w in &positive {
        let n = (w / base).round();
        if (n * base - w).abs() > COMMENSURATE_RTOL * w {
            return Err(incommensurate());
        }
    }
    Ok(Some(base))
}

/// Denominator of the first continued-fraction convergent of `x` within the
/// commensurability tolerance.
fn ratio_denominator(x: f64) -> Option<u64> {
    let (mut p0, mut p1) = (0.0f64, 1.0f64);
    let (mut q0, mut q1) = (1.0f64, 0.0f64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let p = a * p1 + p0;
        let q = a * q1 + q0;
        if q > MAX_BASE_DIVISOR as f64 {
            return None;
        }
        if (x - p / q).abs() <= COMMENSURATE_RTOL * x {
            return Some(q as u64);
        }
        let frac = r - a;
        if frac <= 0.0 {
            return None;
        }
        r = 1.0 / frac;
        (p0, p1) = (p1, p);
        (q0, q1) = (q1, q);
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
