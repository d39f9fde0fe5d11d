//! Instantaneous, classical and time-scale power quantities of a solved
//! network, and the three power balances they satisfy:
//!
//! * `dw/dt = p - p_d` in real time,
//! * `dW/dt = P - P_d` in active time at every scale `s`,
//! * `-dX/ds = Q` in reactive time.
//!
//! There is deliberately no reactive balance in real time; reactive energy
//! only has a rate of change with respect to `s`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{BranchKind, NetworkSolution};
use crate::spectrum::{ComplexTimePoint, LineSpectrum, Unit};

/// Tolerance for the two Budeanu evaluation routes.
pub const BUDEANU_RTOL: f64 = 1e-8;

/// Tolerance for `Q = 2w (W_m - W_e)` against the phasor product.
pub const STORED_ENERGY_RTOL: f64 = 1e-10;

/// Number of points of the default active-time grid.
pub const DEFAULT_T_POINTS: usize = 256;

/// Number of positive points of the default scale grid.
pub const DEFAULT_S_POINTS: usize = 32;

/// Real-time waveforms of the port power and stored energies.
#[derive(Debug, Clone)]
pub struct InstantaneousSet {
    /// Port power `u i`.
    pub p: LineSpectrum,
    /// Dissipated power `sum R i_b^2`.
    pub p_d: LineSpectrum,
    /// Magnetic energy `1/2 sum L i_b^2`.
    pub w_m: LineSpectrum,
    /// Electric energy `1/2 sum C u_b^2`.
    pub w_e: LineSpectrum,
    pub w: LineSpectrum,
    /// `w_m - w_e`. Not a local quantity; it only acquires a balance law
    /// after moving to the time-scale domain.
    pub x: LineSpectrum,
}

pub fn instantaneous(sol: &NetworkSolution) -> Result<InstantaneousSet> {
    let p = sol
        .source()
        .multiply(sol.port_current())?
        .with_unit(Unit::Watt);
    let mut p_d = LineSpectrum::zero(Unit::Watt);
    let mut w_m = LineSpectrum::zero(Unit::Joule);
    let mut w_e = LineSpectrum::zero(Unit::Joule);
    for (k, b) in sol.netlist().branches().iter().enumerate() {
        match b.kind {
            BranchKind::Resistor => {
                let i = sol.branch_current(k);
                p_d = p_d.combine(1.0, &i.multiply(i)?, b.value)?;
            }
            BranchKind::Inductor => {
                let i = sol.branch_current(k);
                w_m = w_m.combine(1.0, &i.multiply(i)?, 0.5 * b.value)?;
            }
            BranchKind::Capacitor => {
                let u = sol.branch_voltage(k);
                w_e = w_e.combine(1.0, &u.multiply(u)?, 0.5 * b.value)?;
            }
        }
    }
    let w = w_m.add(&w_e)?;
    let x = w_m.sub(&w_e)?;
    Ok(InstantaneousSet {
        p,
        p_d,
        w_m,
        w_e,
        w,
        x,
    })
}

/// Worst-case residual of a balance over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceResidual {
    pub max_abs: f64,
    /// Largest magnitude of any term of the balance over the grid. For the
    /// scaled balances this includes `|P + jQ|`.
    pub reference: f64,
    pub worst_t: f64,
    pub worst_s: f64,
}

impl BalanceResidual {
    fn new() -> Self {
        Self {
            max_abs: 0.0,
            reference: 0.0,
            worst_t: f64::NAN,
            worst_s: f64::NAN,
        }
    }

    fn record(&mut self, t: f64, s: f64, residual: f64, terms: &[f64]) {
        let r = residual.abs();
        if r > self.max_abs || self.worst_t.is_nan() {
            self.max_abs = r;
            self.worst_t = t;
            self.worst_s = s;
        }
        for v in terms {
            self.reference = self.reference.max(v.abs());
        }
    }

    /// `max_abs / reference`, zero for an all-zero balance.
    pub fn relative(&self) -> f64 {
        if self.max_abs == 0.0 {
            0.0
        } else {
            self.max_abs / self.reference
        }
    }
}

impl Serialize for BalanceResidual {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("BalanceResidual", 5)?;
        st.serialize_field("max_abs", &self.max_abs)?;
        st.serialize_field("reference", &self.reference)?;
        st.serialize_field("relative", &self.relative())?;
        st.serialize_field("worst_t", &self.worst_t)?;
        st.serialize_field("worst_s", &self.worst_s)?;
        st.end()
    }
}

/// `max_t |dw/dt - p + p_d|`, with `dw/dt` taken line by line.
pub fn instantaneous_balance(set: &InstantaneousSet, t_grid: &[f64]) -> BalanceResidual {
    let dw = set.w.derivative();
    let mut out = BalanceResidual::new();
    for &t in t_grid {
        let (dw, p, pd) = (dw.evaluate(t), set.p.evaluate(t), set.p_d.evaluate(t));
        out.record(t, 0.0, dw - p + pd, &[dw, p, pd]);
    }
    out
}

/// Hermitian-style bilinear form over a common set of lines,
///
/// ```text
/// F(t, s) = sum_{k,l} c_kl exp(j (w_k - w_l) t) exp(-(w_k + w_l) s)
/// ```
///
/// which is the shape of every product `a(t+js) conj(b(t+js))` of two analytic
/// phasors. Derivatives in `t` and `s` act on each beat term exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatForm {
    omegas: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl BeatForm {
    pub fn zeros(omegas: Vec<f64>) -> Self {
        let n = omegas.len();
        Self {
            omegas,
            coeffs: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Adds `weight * a_k * conj(b_l)` to every coefficient.
    pub fn add_outer(&mut self, a: &[Complex64], b: &[Complex64], weight: f64) {
        let n = self.omegas.len();
        if n == 0 {
            return;
        }
        for (row, ak) in self.coeffs.chunks_mut(n).zip(&a[..n]) {
            for (c, bl) in row.iter_mut().zip(&b[..n]) {
                *c += ak * bl.conj() * weight;
            }
        }
    }

    pub fn combine(&self, alpha: f64, other: &BeatForm, beta: f64) -> BeatForm {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * alpha + b * beta)
            .collect();
        BeatForm {
            omegas: self.omegas.clone(),
            coeffs,
        }
    }

    fn map(&self, f: impl Fn(f64, f64, Complex64) -> Complex64) -> BeatForm {
        let n = self.omegas.len();
        let mut coeffs = self.coeffs.clone();
        for k in 0..n {
            for l in 0..n {
                coeffs[k * n + l] = f(self.omegas[k], self.omegas[l], coeffs[k * n + l]);
            }
        }
        BeatForm {
            omegas: self.omegas.clone(),
            coeffs,
        }
    }

    /// `dF/dt`: each beat term gains `j (w_k - w_l)`.
    pub fn d_dt(&self) -> BeatForm {
        self.map(|wk, wl, c| c * Complex64::new(0.0, wk - wl))
    }

    /// `dF/ds`: each beat term gains `-(w_k + w_l)`.
    pub fn d_ds(&self) -> BeatForm {
        self.map(|wk, wl, c| c * -(wk + wl))
    }

    pub fn value(&self, t: f64, s: f64) -> Complex64 {
        let n = self.omegas.len();
        let e: Vec<Complex64> = self
            .omegas
            .iter()
            .map(|w| Complex64::from_polar((-w * s).exp(), w * t))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let row: Complex64 = (0..n).map(|l| self.coeffs[k * n + l] * e[l].conj()).sum();
            acc += e[k] * row;
        }
        acc
    }

    /// Time average at scale `s`. Lines are distinct, so only the diagonal
    /// survives.
    pub fn time_mean(&self, s: f64) -> Complex64 {
        let n = self.omegas.len();
        (0..n)
            .map(|k| self.coeffs[k * n + k] * (-2.0 * self.omegas[k] * s).exp())
            .sum()
    }

    /// `sum |c_kl|`, a bound on `|F(t, s)|` for all `s >= 0`.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

/// Everything needed to evaluate the time-scale quantities of one solution.
#[derive(Debug, Clone)]
pub struct TimeScaleModel {
    kinds: Vec<BranchKind>,
    values: Vec<f64>,
    branch_u: Vec<LineSpectrum>,
    branch_i: Vec<LineSpectrum>,
    port_u: LineSpectrum,
    port_i: LineSpectrum,
    /// `1/4 sum L I_k conj(I_l)`
    pub magnetic: BeatForm,
    /// `1/4 sum C U_k conj(U_l)`
    pub electric: BeatForm,
    /// `1/2 sum R I_k conj(I_l)`
    pub dissipated: BeatForm,
    /// `1/2 U_k conj(I_l)` at the port
    pub complex_power: BeatForm,
}

impl TimeScaleModel {
    pub fn new(sol: &NetworkSolution) -> Self {
        let omegas: Vec<f64> = sol.phasors().iter().map(|p| p.omega).collect();
        let mut magnetic = BeatForm::zeros(omegas.clone());
        let mut electric = BeatForm::zeros(omegas.clone());
        let mut dissipated = BeatForm::zeros(omegas.clone());
        let mut complex_power = BeatForm::zeros(omegas);
        let branches = sol.netlist().branches();
        for (b, branch) in branches.iter().enumerate() {
            let u: Vec<Complex64> = sol.phasors().iter().map(|p| p.branch_voltages[b]).collect();
            let i: Vec<Complex64> = sol.phasors().iter().map(|p| p.branch_currents[b]).collect();
            match branch.kind {
                BranchKind::Resistor => dissipated.add_outer(&i, &i, 0.5 * branch.value),
                BranchKind::Inductor => magnetic.add_outer(&i, &i, 0.25 * branch.value),
                BranchKind::Capacitor => electric.add_outer(&u, &u, 0.25 * branch.value),
            }
        }
        let u: Vec<Complex64> = sol.phasors().iter().map(|p| p.port_voltage).collect();
        let i: Vec<Complex64> = sol.phasors().iter().map(|p| p.port_current).collect();
        complex_power.add_outer(&u, &i, 0.5);
        Self {
            kinds: branches.iter().map(|b| b.kind).collect(),
            values: branches.iter().map(|b| b.value).collect(),
            branch_u: sol.branch_voltages().to_vec(),
            branch_i: sol.branch_currents().to_vec(),
            port_u: sol.source().clone(),
            port_i: sol.port_current().clone(),
            magnetic,
            electric,
            dissipated,
            complex_power,
        }
    }

    pub fn port_voltage(&self) -> &LineSpectrum {
        &self.port_u
    }

    pub fn port_current(&self) -> &LineSpectrum {
        &self.port_i
    }

    /// `W = W_m + W_e`
    pub fn active_energy(&self) -> BeatForm {
        self.magnetic.combine(1.0, &self.electric, 1.0)
    }

    /// `X = W_m - W_e`
    pub fn reactive_energy(&self) -> BeatForm {
        self.magnetic.combine(1.0, &self.electric, -1.0)
    }

    /// Scaled quantities at one point, from the analytic phasors of every
    /// branch rather than from the beat forms.
    pub fn point(&self, p: ComplexTimePoint) -> ScaledPoint {
        let mut w_m = 0.0;
        let mut w_e = 0.0;
        let mut p_d = 0.0;
        for (k, kind) in self.kinds.iter().enumerate() {
            match kind {
                BranchKind::Resistor => {
                    p_d += 0.5 * self.values[k] * self.branch_i[k].analytic_at(p).norm_sqr()
                }
                BranchKind::Inductor => {
                    w_m += 0.25 * self.values[k] * self.branch_i[k].analytic_at(p).norm_sqr()
                }
                BranchKind::Capacitor => {
                    w_e += 0.25 * self.values[k] * self.branch_u[k].analytic_at(p).norm_sqr()
                }
            }
        }
        let s = 0.5 * self.port_u.analytic_at(p) * self.port_i.analytic_at(p).conj();
        ScaledPoint {
            w_m,
            w_e,
            p: s.re,
            q: s.im,
            p_d,
        }
    }

    /// Smallest and largest positive line frequency.
    pub fn positive_range(&self) -> Option<(f64, f64)> {
        self.port_u.positive_range()
    }

    /// Common period of the port voltage, `2 pi` when it has no AC line.
    pub fn period(&self) -> f64 {
        self.port_u.common_period().unwrap_or(2.0 * PI)
    }

    /// Apparent power `S = ||u|| ||i||` with rms norms.
    pub fn apparent_power(&self) -> f64 {
        self.port_u.rms() * self.port_i.rms()
    }

    /// `sum_k 1/2 |U_k|^2 sum_b |Y_b(w_k)|`, the power the port would see if
    /// every branch sat directly across it. Rounding in the solved port
    /// current is relative to this rather than to the current itself: a
    /// branch that carries no current in exact arithmetic still contributes
    /// `eps |Y_b| |U|` of noise. Shorted inductors at DC are skipped.
    pub fn admittance_scale(&self) -> f64 {
        self.port_u
            .lines()
            .map(|l| {
                let y: f64 = self
                    .kinds
                    .iter()
                    .zip(&self.values)
                    .map(|(k, v)| 1.0 / k.impedance(*v, l.omega).norm())
                    .filter(|y| y.is_finite())
                    .sum();
                0.5 * l.amplitude.norm_sqr() * y
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledPoint {
    pub w_m: f64,
    pub w_e: f64,
    pub p: f64,
    pub q: f64,
    pub p_d: f64,
}

impl ScaledPoint {
    pub fn w(&self) -> f64 {
        self.w_m + self.w_e
    }

    pub fn x(&self) -> f64 {
        self.w_m - self.w_e
    }
}

/// Scaled energies and powers on a `(t, s)` grid.
///
/// `values[is][it]` holds the point `(t_grid[it], s_grid[is])`. The rates
/// `dW/dt` and `dX/ds` come from the beat forms, independently of the point
/// values.
#[derive(Debug, Clone)]
pub struct ScaledQuantities {
    model: TimeScaleModel,
    t_grid: Vec<f64>,
    s_grid: Vec<f64>,
    values: Vec<Vec<ScaledPoint>>,
    dw_dt: Vec<Vec<f64>>,
    dx_ds: Vec<Vec<f64>>,
}

pub fn scaled(sol: &NetworkSolution, t_grid: &[f64], s_grid: &[f64]) -> Result<ScaledQuantities> {
    scaled_from_model(TimeScaleModel::new(sol), t_grid, s_grid)
}

pub fn scaled_from_model(
    model: TimeScaleModel,
    t_grid: &[f64],
    s_grid: &[f64],
) -> Result<ScaledQuantities> {
    if t_grid.is_empty() || s_grid.is_empty() {
        return Err(Error::InvalidArgument("grids must be nonempty".into()));
    }
    if let Some(t) = t_grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t grid value {t} is not finite"
        )));
    }
    if let Some(s) = s_grid.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "s grid value {s} must be finite and >= 0"
        )));
    }
    let dw = model.active_energy().d_dt();
    let dx = model.reactive_energy().d_ds();
    let mut values = Vec::with_capacity(s_grid.len());
    let mut dw_dt = Vec::with_capacity(s_grid.len());
    let mut dx_ds = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        values.push(
            t_grid
                .iter()
                .map(|&t| model.point(ComplexTimePoint::new(t, s).expect("validated")))
                .collect(),
        );
        dw_dt.push(t_grid.iter().map(|&t| dw.value(t, s).re).collect());
        dx_ds.push(t_grid.iter().map(|&t| dx.value(t, s).re).collect());
    }
    Ok(ScaledQuantities {
        model,
        t_grid: t_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        values,
        dw_dt,
        dx_ds,
    })
}

impl ScaledQuantities {
    pub fn model(&self) -> &TimeScaleModel {
        &self.model
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn at(&self, it: usize, is: usize) -> ScaledPoint {
        self.values[is][it]
    }

    /// All points at scale index `is`, in `t_grid` order.
    pub fn slice(&self, is: usize) -> &[ScaledPoint] {
        &self.values[is]
    }

    pub fn dw_dt(&self, it: usize, is: usize) -> f64 {
        self.dw_dt[is][it]
    }

    pub fn dx_ds(&self, it: usize, is: usize) -> f64 {
        self.dx_ds[is][it]
    }

    fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.s_grid.len()).flat_map(move |is| (0..self.t_grid.len()).map(move |it| (it, is)))
    }
}

/// `max |dW/dt - P + P_d|` over the grid.
///
/// `P` and `Q` are the real and imaginary parts of `1/2 u^ conj(i^)`, so their
/// rounding error scales with `|P + jQ|`; that modulus joins the reference.
/// Otherwise a load on which every term vanishes exactly (a lone inductor
/// under one tone) would report rounding noise as an O(1) relative residual.
pub fn active_balance(sq: &ScaledQuantities) -> BalanceResidual {
    let mut out = BalanceResidual::new();
    for (it, is) in sq.points() {
        let v = sq.at(it, is);
        let dw = sq.dw_dt(it, is);
        out.record(
            sq.t_grid[it],
            sq.s_grid[is],
            dw - v.p + v.p_d,
            &[dw, v.p, v.p_d, v.p.hypot(v.q)],
        );
    }
    out
}

/// `max |-dX/ds - Q|` over the grid, referenced like [`active_balance`].
pub fn reactive_balance(sq: &ScaledQuantities) -> BalanceResidual {
    let mut out = BalanceResidual::new();
    for (it, is) in sq.points() {
        let v = sq.at(it, is);
        let dx = sq.dx_ds(it, is);
        out.record(
            sq.t_grid[it],
            sq.s_grid[is],
            -dx - v.q,
            &[dx, v.q, v.p.hypot(v.q)],
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteDifferenceCheck {
    pub step: f64,
    /// Largest gap between the finite difference and the exact rate.
    pub max_abs_error: f64,
}

/// Step used by the finite-difference cross-checks: `1e-4` of the period.
pub fn default_fd_step(sq: &ScaledQuantities) -> f64 {
    1e-4 * sq.model.period()
}

/// Central difference of `W(t, s)` in `t` against the exact `dW/dt`.
pub fn active_fd_check(sq: &ScaledQuantities, h: f64) -> FiniteDifferenceCheck {
    let mut max_abs_error: f64 = 0.0;
    for (it, is) in sq.points() {
        let (t, s) = (sq.t_grid[it], sq.s_grid[is]);
        let w = |t: f64| {
            sq.model
                .point(ComplexTimePoint::new(t, s).expect("valid"))
                .w()
        };
        let fd = (w(t + h) - w(t - h)) / (2.0 * h);
        max_abs_error = max_abs_error.max((fd - sq.dw_dt(it, is)).abs());
    }
    FiniteDifferenceCheck {
        step: h,
        max_abs_error,
    }
}

/// Second-order difference of `X(t, s)` in `s` against the exact `dX/ds`.
/// One-sided near `s = 0`.
pub fn reactive_fd_check(sq: &ScaledQuantities, h: f64) -> FiniteDifferenceCheck {
    let mut max_abs_error: f64 = 0.0;
    for (it, is) in sq.points() {
        let (t, s) = (sq.t_grid[it], sq.s_grid[is]);
        let x = |s: f64| {
            sq.model
                .point(ComplexTimePoint::new(t, s).expect("valid"))
                .x()
        };
        let fd = if s >= h {
            (x(s + h) - x(s - h)) / (2.0 * h)
        } else {
            (-3.0 * x(s) + 4.0 * x(s + h) - x(s + 2.0 * h)) / (2.0 * h)
        };
        max_abs_error = max_abs_error.max((fd - sq.dx_ds(it, is)).abs());
    }
    FiniteDifferenceCheck {
        step: h,
        max_abs_error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub t_count: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub s_count: usize,
    pub s_min: f64,
    pub s_max: f64,
}

impl GridInfo {
    fn of(t: &[f64], s: &[f64]) -> Self {
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            t_count: t.len(),
            t_min: min(t),
            t_max: max(t),
            s_count: s.len(),
            s_min: min(s),
            s_max: max(s),
        }
    }
}

/// Residuals of the three balances on one grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceReport {
    /// `dw/dt = p - p_d` over the `t` grid.
    pub instantaneous: BalanceResidual,
    /// `dW/dt = P - P_d` over the `(t, s)` grid.
    pub active: BalanceResidual,
    /// `-dX/ds = Q` over the `(t, s)` grid.
    pub reactive: BalanceResidual,
    pub active_fd_check: FiniteDifferenceCheck,
    pub grid: GridInfo,
}

impl BalanceReport {
    pub fn new(set: &InstantaneousSet, sq: &ScaledQuantities) -> Self {
        Self {
            instantaneous: instantaneous_balance(set, sq.t_grid()),
            active: active_balance(sq),
            reactive: reactive_balance(sq),
            active_fd_check: active_fd_check(sq, default_fd_step(sq)),
            grid: GridInfo::of(sq.t_grid(), sq.s_grid()),
        }
    }
}

/// Real and imaginary power `P(t) = 1/2 [u i + u_h i_h]`,
/// `Q(t) = 1/2 [u_h i - u i_h]`.
pub fn real_imaginary_power(
    u: &LineSpectrum,
    i: &LineSpectrum,
) -> Result<(LineSpectrum, LineSpectrum)> {
    let (uh, ih) = (u.hilbert(), i.hilbert());
    let ui = u.multiply(i)?;
    let p = ui
        .combine(0.5, &uh.multiply(&ih)?, 0.5)?
        .with_unit(Unit::Watt);
    let q = uh
        .multiply(i)?
        .combine(0.5, &u.multiply(&ih)?, -0.5)?
        .with_unit(Unit::Watt);
    Ok((p, q))
}

/// Budeanu's reactive power from both of its routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudeanuReactive {
    /// Mean of `Q(t)`.
    pub from_mean_q: f64,
    /// `-d/ds` of the time-mean of `X(t, s)` at `s = 0`.
    pub from_reactive_energy: f64,
}

impl BudeanuReactive {
    pub fn value(&self) -> f64 {
        self.from_mean_q
    }

    pub fn relative_gap(&self) -> f64 {
        let gap = (self.from_mean_q - self.from_reactive_energy).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.from_mean_q.abs().max(self.from_reactive_energy.abs())
        }
    }
}

/// Computes `Q_B` twice and fails when the routes disagree beyond
/// [`BUDEANU_RTOL`]. For loads with `Q_B` at roundoff level the comparison
/// falls back to an absolute floor of `1e-12` times the larger of `S` and
/// [`TimeScaleModel::admittance_scale`].
pub fn budeanu(model: &TimeScaleModel) -> Result<BudeanuReactive> {
    let (_, q) = real_imaginary_power(model.port_voltage(), model.port_current())?;
    let from_mean_q = q.mean();
    let x = model.reactive_energy();
    let from_reactive_energy = -x.d_ds().time_mean(0.0).re;
    let out = BudeanuReactive {
        from_mean_q,
        from_reactive_energy,
    };
    let gap = (from_mean_q - from_reactive_energy).abs();
    let scale = from_mean_q.abs().max(from_reactive_energy.abs());
    let floor = 1e-12 * model.apparent_power().max(model.admittance_scale());
    if gap > BUDEANU_RTOL * scale && gap > floor {
        return Err(Error::Inconsistent(format!(
            "Budeanu reactive power routes disagree: mean Q(t) = {from_mean_q}, \
             -d/ds mean X = {from_reactive_energy}"
        )));
    }
    Ok(out)
}

/// Per-line classical powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinePower {
    pub omega: f64,
    pub u_rms: f64,
    pub i_rms: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalSummary {
    pub lines: Vec<LinePower>,
    /// `sum P_k`
    pub active_power: f64,
    /// Budeanu's `sum Q_k`
    pub budeanu_reactive: f64,
    /// `U I`
    pub apparent_power: f64,
    pub voltage_rms: f64,
    pub current_rms: f64,
}

impl ClassicalSummary {
    /// Budeanu distortion power `sqrt(S^2 - P^2 - Q_B^2)`, clamped at zero.
    pub fn distortion_power(&self) -> f64 {
        let s = &self;
        (s.apparent_power.powi(2) - s.active_power.powi(2) - s.budeanu_reactive.powi(2))
            .max(0.0)
            .sqrt()
    }
}

/// Classical per-line powers `P_k + j Q_k = 1/2 U_k conj(I_k)` and totals.
pub fn classical_summary(sol: &NetworkSolution) -> ClassicalSummary {
    let lines: Vec<LinePower> = sol
        .phasors()
        .iter()
        .map(|ph| {
            let (u, i) = (ph.port_voltage, ph.port_current);
            let (s, u_rms, i_rms) = if ph.omega == 0.0 {
                (Complex64::new(u.re * i.re, 0.0), u.norm(), i.norm())
            } else {
                (
                    0.5 * u * i.conj(),
                    u.norm() / 2f64.sqrt(),
                    i.norm() / 2f64.sqrt(),
                )
            };
            LinePower {
                omega: ph.omega,
                u_rms,
                i_rms,
                p: s.re,
                q: s.im,
            }
        })
        .collect();
    let voltage_rms = lines.iter().map(|l| l.u_rms * l.u_rms).sum::<f64>().sqrt();
    let current_rms = lines.iter().map(|l| l.i_rms * l.i_rms).sum::<f64>().sqrt();
    ClassicalSummary {
        active_power: lines.iter().map(|l| l.p).sum(),
        budeanu_reactive: lines.iter().map(|l| l.q).sum(),
        apparent_power: voltage_rms * current_rms,
        voltage_rms,
        current_rms,
        lines,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoredEnergyReactive {
    /// Mean magnetic energy `1/4 sum L |I_b|^2`.
    pub w_m: f64,
    /// Mean electric energy `1/4 sum C |U_b|^2`.
    pub w_e: f64,
    /// `2 w (W_m - W_e)`
    pub q: f64,
}

/// Reactive power of a single-tone steady state from its mean stored
/// energies. Rejects multi-tone sources, and fails if the result disagrees
/// with the phasor product beyond [`STORED_ENERGY_RTOL`].
pub fn q_from_stored_energy(sol: &NetworkSolution, omega: f64) -> Result<StoredEnergyReactive> {
    let phasors = sol.phasors();
    if phasors.len() != 1 || phasors[0].omega == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "stored-energy reactive power needs a single AC line, source has {} line(s)",
            phasors.len()
        )));
    }
    let ph = &phasors[0];
    if (ph.omega - omega).abs() > 1e-9 * omega.abs() {
        return Err(Error::InvalidArgument(format!(
            "source line at {} rad/s does not match requested omega {omega}",
            ph.omega
        )));
    }
    let mut w_m = 0.0;
    let mut w_e = 0.0;
    for (b, branch) in sol.netlist().branches().iter().enumerate() {
        match branch.kind {
            BranchKind::Inductor => w_m += 0.25 * branch.value * ph.branch_currents[b].norm_sqr(),
            BranchKind::Capacitor => w_e += 0.25 * branch.value * ph.branch_voltages[b].norm_sqr(),
            BranchKind::Resistor => {}
        }
    }
    let q = 2.0 * ph.omega * (w_m - w_e);
    let complex = 0.5 * ph.port_voltage * ph.port_current.conj();
    let classical = complex.im;
    // Im(S) carries rounding of order |S|
    let scale = complex.norm().max(2.0 * ph.omega * (w_m + w_e));
    if (q - classical).abs() > STORED_ENERGY_RTOL * scale {
        return Err(Error::Inconsistent(format!(
            "2w(W_m - W_e) = {q} differs from Im(S) = {classical}"
        )));
    }
    Ok(StoredEnergyReactive { w_m, w_e, q })
}

/// Whether the load is dominantly inductive or capacitive, from the sign of
/// `Q_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadCharacter {
    Inductive,
    Capacitive,
    Balanced,
}

impl LoadCharacter {
    /// Dead band `|Q_B| < 1e-9 S` maps to [`LoadCharacter::Balanced`].
    pub fn classify(q_b: f64, apparent_power: f64) -> Self {
        if !(q_b.abs() >= 1e-9 * apparent_power) || q_b == 0.0 {
            LoadCharacter::Balanced
        } else if q_b > 0.0 {
            LoadCharacter::Inductive
        } else {
            LoadCharacter::Capacitive
        }
    }
}

/// One common period sampled at `n` points, endpoint excluded.
pub fn default_t_grid(source: &LineSpectrum, n: usize) -> Vec<f64> {
    let period = source.common_period().unwrap_or(2.0 * PI);
    (0..n).map(|k| period * k as f64 / n as f64).collect()
}

/// `s = 0` followed by `n` geometric points on `[1e-3 / w_max, 10 / w_min]`.
pub fn default_s_grid(source: &LineSpectrum, n: usize) -> Vec<f64> {
    let (w_min, w_max) = source.positive_range().unwrap_or((1.0, 1.0));
    let lo = 1e-3 / w_max;
    let hi = 10.0 / w_min;
    let mut out = vec![0.0];
    if n == 1 {
        out.push(lo);
    } else {
        let ratio = (hi / lo).ln() / (n - 1) as f64;
        out.extend((0..n).map(|k| lo * (ratio * k as f64).exp()));
        if let Some(last) = out.last_mut() {
            *last = hi;
        }
    }
    out
}
