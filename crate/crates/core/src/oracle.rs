//! Brute-force reference computations used to cross-check the exact
//! line-spectrum machinery: transient simulation of the netlist, FFT-based
//! Hilbert transform, direct quadrature of the analytic-phasor integral and
//! trapezoidal time averages. None of these are used on production paths.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::network::{BranchKind, Netlist};
use crate::spectrum::{ComplexTimePoint, LineSpectrum, SampledSignal};

/// Default number of trapezoidal steps per common period (`2^12`).
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4096;

/// Inductor currents and capacitor voltages at a time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeState {
    pub time: f64,
    pub inductor_currents: Vec<f64>,
    pub capacitor_voltages: Vec<f64>,
}

impl OdeState {
    pub fn dim(&self) -> usize {
        self.inductor_currents.len() + self.capacitor_voltages.len()
    }
}

#[derive(Debug, Clone)]
pub struct OdeSteadyState {
    /// Port current over the last simulated period.
    pub port_current: SampledSignal,
    pub final_state: OdeState,
    /// Set when the network has no resistor or when the last two periods
    /// still differ, i.e. transients may not have decayed.
    pub transient_warning: bool,
}

/// Port current after `periods` common periods of trapezoidal integration
/// with [`DEFAULT_STEPS_PER_PERIOD`] steps per period.
pub fn ode_steady_state(
    net: &Netlist,
    source: &LineSpectrum,
    periods: usize,
) -> Result<OdeSteadyState> {
    ode_steady_state_with(net, source, periods, DEFAULT_STEPS_PER_PERIOD)
}

/// Trapezoidal (companion-model) transient simulation from rest.
///
/// The source is switched on through a raised-cosine envelope over the first
/// fifth of the run so that the zero initial state is consistent; the
/// trapezoidal rule does not damp the ringing an abrupt start would cause.
pub fn ode_steady_state_with(
    net: &Netlist,
    source: &LineSpectrum,
    periods: usize,
    steps_per_period: usize,
) -> Result<OdeSteadyState> {
    if periods < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 periods to settle, got {periods}"
        )));
    }
    if steps_per_period < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 steps per period".into(),
        ));
    }
    let period = source.common_period().unwrap_or(2.0 * PI);
    let h = period / steps_per_period as f64;
    let ramp_end = period * (periods as f64 / 5.0).max(1.0);
    let drive = |t: f64| {
        let env = if t >= ramp_end {
            1.0
        } else {
            0.5 * (1.0 - (PI * t / ramp_end).cos())
        };
        env * source.evaluate(t)
    };

    let n_nodes = net.nodes().len();
    let src = n_nodes;
    let dim = n_nodes + 1;
    let mut a = Matrix::zeros(dim);
    let node = |label: &str| net.nodes().iter().position(|n| n == label);
    let terminals: Vec<(Option<usize>, Option<usize>)> = net
        .branches()
        .iter()
        .map(|b| (node(&b.nodes.0), node(&b.nodes.1)))
        .collect();
    let conductance: Vec<f64> = net
        .branches()
        .iter()
        .map(|b| match b.kind {
            BranchKind::Resistor => 1.0 / b.value,
            BranchKind::Inductor => h / (2.0 * b.value),
            BranchKind::Capacitor => 2.0 * b.value / h,
        })
        .collect();
    for (&(na, nb), &g) in terminals.iter().zip(&conductance) {
        let g = Complex64::new(g, 0.0);
        if let Some(i) = na {
            a.add(i, i, g);
        }
        if let Some(j) = nb {
            a.add(j, j, g);
        }
        if let (Some(i), Some(j)) = (na, nb) {
            a.add(i, j, -g);
            a.add(j, i, -g);
        }
    }
    let plus = node(&net.port().plus).expect("port node is indexed");
    let one = Complex64::new(1.0, 0.0);
    a.add(plus, src, one);
    a.add(src, plus, one);
    let lu = Lu::factor(&a).map_err(|_| Error::SingularNetwork { omega: f64::NAN })?;

    let nb = net.branches().len();
    // branch voltage and current at the current step
    let mut v = vec![0.0; nb];
    let mut i = vec![0.0; nb];
    let total = periods * steps_per_period;
    let mut last = Vec::with_capacity(steps_per_period);
    let mut previous = Vec::with_capacity(steps_per_period);
    let mut rhs = vec![Complex64::new(0.0, 0.0); dim];
    for step in 1..=total {
        let t = step as f64 * h;
        rhs.iter_mut().for_each(|r| *r = Complex64::new(0.0, 0.0));
        for (b, branch) in net.branches().iter().enumerate() {
            // history current source, flowing a -> b
            let j = match branch.kind {
                BranchKind::Resistor => continue,
                BranchKind::Inductor => i[b] + conductance[b] * v[b],
                BranchKind::Capacitor => -conductance[b] * v[b] - i[b],
            };
            let (na, nb) = terminals[b];
            if let Some(x) = na {
                rhs[x] -= j;
            }
            if let Some(y) = nb {
                rhs[y] += j;
            }
        }
        rhs[src] = Complex64::new(drive(t), 0.0);
        let x = lu.solve(&rhs);
        let volt = |n: Option<usize>| n.map(|k| x[k].re).unwrap_or(0.0);
        for (b, branch) in net.branches().iter().enumerate() {
            let (na, nb) = terminals[b];
            let vb = volt(na) - volt(nb);
            i[b] = match branch.kind {
                BranchKind::Resistor => vb / branch.value,
                BranchKind::Inductor => i[b] + conductance[b] * (vb + v[b]),
                BranchKind::Capacitor => conductance[b] * (vb - v[b]) - i[b],
            };
            v[b] = vb;
        }
        let port_current = -x[src].re;
        if step > total - 2 * steps_per_period {
            if step > total - steps_per_period {
                last.push(port_current);
            } else {
                previous.push(port_current);
            }
        }
    }

    let scale = last.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let drift = last
        .iter()
        .zip(&previous)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let transient_warning =
        net.count(BranchKind::Resistor) == 0 || (scale > 0.0 && drift > 1e-6 * scale);

    let mut inductor_currents = Vec::new();
    let mut capacitor_voltages = Vec::new();
    for (b, branch) in net.branches().iter().enumerate() {
        match branch.kind {
            BranchKind::Inductor => inductor_currents.push(i[b]),
            BranchKind::Capacitor => capacitor_voltages.push(v[b]),
            BranchKind::Resistor => {}
        }
    }
    let t0 = (total - steps_per_period + 1) as f64 * h;
    Ok(OdeSteadyState {
        port_current: SampledSignal::new(t0, h, last)?,
        final_state: OdeState {
            time: total as f64 * h,
            inductor_currents,
            capacitor_voltages,
        },
        transient_warning,
    })
}

/// Discrete analytic-signal Hilbert transform.
///
/// Negative-frequency bins are zeroed and positive ones doubled; DC and
/// Nyquist keep unit weight. The window must cover an integer number of
/// periods, otherwise the result shows leakage.
pub fn fft_hilbert(x: &SampledSignal) -> Result<SampledSignal> {
    let n = x.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "FFT Hilbert transform needs a power-of-two sample count, got {n}"
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = x.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        let weight = if k == 0 || 2 * k == n {
            1.0
        } else if 2 * k < n {
            2.0
        } else {
            0.0
        };
        *b *= weight;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    SampledSignal::new(x.t0, x.dt, buf.iter().map(|c| c.im * scale).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// The integral runs over `[t - half_width, t + half_width]`.
    pub half_width: f64,
    pub panels: usize,
    pub rule: QuadratureRule,
}

impl QuadratureConfig {
    pub fn simpson(half_width: f64, panels: usize) -> Result<Self> {
        if panels < 2 || !panels.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "Simpson needs an even panel count >= 2, got {panels}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "window half-width must be positive, got {half_width}"
            )));
        }
        Ok(Self {
            half_width,
            panels,
            rule: QuadratureRule::Simpson,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Bound on the error from truncating the `1/t` kernel tails.
    pub tail_bound: f64,
}

/// Direct evaluation of `(j/pi) int f(t') / (t + js - t') dt'` over a finite
/// window centered on `t`.
pub fn quadrature_analytic(
    f: &LineSpectrum,
    p: ComplexTimePoint,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    if !(p.s() > 0.0) {
        return Err(Error::InvalidArgument(
            "quadrature of the analytic-phasor integral needs s > 0".into(),
        ));
    }
    let (t, s) = (p.t(), p.s());
    let w = cfg.half_width;
    let n = cfg.panels;
    let h = 2.0 * w / n as f64;
    let integrand = |u: f64| {
        // u = t' - t
        f.evaluate(t + u) / Complex64::new(-u, s)
    };
    let mut acc = integrand(-w) + integrand(w);
    for k in 1..n {
        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += integrand(-w + k as f64 * h) * weight;
    }
    let integral = acc * (h / 3.0);
    let value = Complex64::new(0.0, 1.0 / PI) * integral;

    let tail_bound = f
        .lines()
        .map(|l| {
            if l.omega == 0.0 {
                l.amplitude.norm() * (1.0 - 2.0 / PI * (w / s).atan())
            } else {
                4.0 * l.amplitude.norm() / (PI * l.omega * w)
            }
        })
        .sum();
    Ok(QuadratureResult { value, tail_bound })
}

/// Trapezoidal average over the sampled window (endpoints included).
pub fn numeric_mean(x: &SampledSignal) -> f64 {
    match x.samples.len() {
        0 => 0.0,
        1 => x.samples[0],
        n => {
            let inner: f64 = x.samples[1..n - 1].iter().sum();
            (inner + 0.5 * (x.samples[0] + x.samples[n - 1])) / (n - 1) as f64
        }
    }
}
