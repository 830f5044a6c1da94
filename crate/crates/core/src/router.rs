//! Time-domain simulation of one conditional phonon-routing step.
//!
//! The router is a Mach–Zehnder loop: beam splitter, a control-conditioned
//! reflection on one arm, beam splitter again. The simulation stays in the
//! single-excitation manifold and treats each control branch separately:
//! branch `|g⟩` reflects trivially, branch `|e⟩` passes the arm field through
//! the scatterer's input–output equation
//!
//! ```text
//! dc/dt = −(κ/2) c + √κ b_in,    b_out = b_in − √κ c
//! ```
//!
//! The source qubit's emission is injected directly as the packet envelope
//! `u(t)`, centred in the routing window; only the part inside the window is
//! emitted. Capture into `Q_L` / `Q_R` is the projection of each output arm
//! onto the (window-normalised) packet mode.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavepackets::{distortion_fidelity, PulseShape, ReflectionResponse, ScatteringTransition, WavePacket};
use crate::units::{AngularRate, Time};

/// Largest `dt * κ` the integrator accepts.
pub const MAX_DT_KAPPA: f64 = 0.1;

const MAX_TRACE_POINTS: usize = 2000;

/// The fixed 50/50 splitter: `a_L → (−a_L + a_R)/√2`, `a_R → (a_L + a_R)/√2`.
pub fn beam_splitter(left: Complex64, right: Complex64) -> (Complex64, Complex64) {
    ((right - left) * FRAC_1_SQRT_2, (left + right) * FRAC_1_SQRT_2)
}

/// A field sampled on a uniform grid `t_i = t0 + i dt` (ns).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<Complex64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, samples: Vec<Complex64>) -> Self {
        TimeSeries { t0, dt, samples }
    }

    pub fn sample<F: Fn(f64) -> Complex64>(t0: f64, dt: f64, len: usize, f: F) -> Self {
        let samples = (0..len).map(|i| f(t0 + i as f64 * dt)).collect();
        TimeSeries { t0, dt, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Trapezoidal `∫ conj(self) other dt`.
    pub fn inner(&self, other: &TimeSeries) -> Complex64 {
        trapezoid(self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b), self.dt)
    }

    pub fn norm_sqr(&self) -> f64 {
        trapezoid(self.samples.iter().map(|a| Complex64::new(a.norm_sqr(), 0.0)), self.dt).re
    }
}

fn trapezoid<I: Iterator<Item = Complex64>>(values: I, dt: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut first = None;
    let mut last = Complex64::new(0.0, 0.0);
    for v in values {
        if first.is_none() {
            first = Some(v);
        }
        sum += v;
        last = v;
    }
    match first {
        None => sum,
        Some(f) => (sum - 0.5 * (f + last)) * dt,
    }
}

/// Output of [`scatter_arm_traced`]: reflected field plus the scatterer's
/// internal amplitude at each sample.
#[derive(Debug, Clone)]
pub struct ScatterOutput {
    pub field: TimeSeries,
    pub stored: Vec<Complex64>,
}

/// Reflects `field` off the scatterer.
pub fn scatter_arm(field: &TimeSeries, resp: &ReflectionResponse) -> Result<TimeSeries> {
    scatter_arm_traced(field, resp).map(|out| out.field)
}

/// Integrates the scatterer ODE with an exponential integrator that is exact
/// for piecewise-linear input (second order in `dt`, unconditionally stable).
pub fn scatter_arm_traced(field: &TimeSeries, resp: &ReflectionResponse) -> Result<ScatterOutput> {
    let kappa = resp.kappa.rad_per_ns();
    let dt = field.dt;
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if dt * kappa > MAX_DT_KAPPA {
        return Err(Error::Resolution { dt_kappa: dt * kappa, limit: MAX_DT_KAPPA });
    }
    let gamma = kappa / 2.0;
    let x = gamma * dt;
    let decay = (-x).exp();
    // A = ∫_0^h e^{-γ(h-s)} ds, B = ∫_0^h e^{-γ(h-s)} s/h ds
    let (a, b) = if x < 1e-4 {
        (dt * (1.0 - x / 2.0 + x * x / 6.0), dt * (0.5 - x / 6.0 + x * x / 24.0))
    } else {
        let a = -(-x).exp_m1() / gamma;
        (a, (dt - a) / x)
    };
    let root_k = kappa.sqrt();
    let mut stored = Vec::with_capacity(field.len());
    let mut out = Vec::with_capacity(field.len());
    let mut c = Complex64::new(0.0, 0.0);
    let mut prev: Option<Complex64> = None;
    for &b_in in &field.samples {
        if let Some(b0) = prev {
            c = c * decay + (b0 * a + (b_in - b0) * b) * root_k;
        }
        stored.push(c);
        out.push(b_in - c * root_k);
        prev = Some(b_in);
    }
    Ok(ScatterOutput { field: TimeSeries::new(field.t0, dt, out), stored })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[serde(alias = "left-qubit")]
    Left,
    #[serde(alias = "right-qubit")]
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterSimConfig {
    pub packet: WavePacket,
    pub kappa_max: AngularRate,
    #[serde(default)]
    pub transition: ScatteringTransition,
    /// Emission start to capture end.
    pub window: Time,
    /// Integrator step; `None` picks `min(0.05/κ, fwhm/200)`.
    #[serde(default)]
    pub dt: Option<Time>,
    /// Control amplitudes on `|g⟩`, `|e⟩`.
    pub control_init: [Complex64; 2],
    pub source: Source,
}

impl RouterSimConfig {
    /// Control in `(|g⟩ + |e⟩)/√2`, photon emitted by the left qubit.
    pub fn superposed(packet: WavePacket, kappa_max: AngularRate, window: Time) -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        RouterSimConfig {
            packet,
            kappa_max,
            transition: ScatteringTransition::default(),
            window,
            dt: None,
            control_init: [h, h],
            source: Source::Left,
        }
    }

    pub fn response(&self) -> Result<ReflectionResponse> {
        ReflectionResponse::for_transmon(self.kappa_max, self.transition)
    }

    /// Step actually used, before snapping to an integer number of samples.
    pub fn step(&self) -> Result<f64> {
        let kappa = self.response()?.kappa.rad_per_ns();
        match self.dt {
            Some(dt) => Ok(dt.ns()),
            None => Ok((0.05 / kappa).min(self.packet.fwhm.ns() / 200.0).min(self.window.ns() / 1000.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.packet.validate()?;
        let w = self.window.ns();
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::invalid(format!("routing window must be positive and finite, got {w} ns")));
        }
        let dt = self.step()?;
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {dt} ns")));
        }
        if dt > w / 1000.0 * (1.0 + 1e-12) {
            return Err(Error::invalid(format!("time step {dt} ns exceeds window/1000 = {} ns", w / 1000.0)));
        }
        let norm: f64 = self.control_init.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("control state norm is {norm}, expected 1")));
        }
        Ok(())
    }
}

/// Per-qubit populations sampled over the window.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Traces {
    pub time_ns: Vec<f64>,
    pub q_left: Vec<f64>,
    pub q_right: Vec<f64>,
    pub q_control_e: Vec<f64>,
    pub q_control_f: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchCapture {
    pub control: char,
    pub left: Complex64,
    pub right: Complex64,
    pub leakage: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouterSimResult {
    /// Amplitudes keyed by `Q_L Q_R Q_C`, e.g. `"01e"`.
    pub final_state: BTreeMap<String, Complex64>,
    pub fidelity: f64,
    /// Norm not captured by either qubit: never emitted, left in the field,
    /// or still stored in the scatterer at window end.
    pub leakage: f64,
    pub captured: f64,
    pub branches: Vec<BranchCapture>,
    pub dt_ns: f64,
    pub traces: Traces,
}

struct BranchRun {
    capture: BranchCapture,
    running_left: Vec<Complex64>,
    running_right: Vec<Complex64>,
    stored: Vec<Complex64>,
}

fn run_branch(
    control: char,
    packet_field: &TimeSeries,
    mode_norm: f64,
    source: Source,
    scatter: Option<&ReflectionResponse>,
) -> Result<BranchRun> {
    let (left_in, right_in): (Vec<_>, Vec<_>) = packet_field
        .samples
        .iter()
        .map(|&u| match source {
            Source::Left => beam_splitter(u, Complex64::new(0.0, 0.0)),
            Source::Right => beam_splitter(Complex64::new(0.0, 0.0), u),
        })
        .unzip();
    let left_arm = TimeSeries::new(packet_field.t0, packet_field.dt, left_in);
    let (left_arm, stored) = match scatter {
        Some(resp) => {
            let out = scatter_arm_traced(&left_arm, resp)?;
            (out.field, out.stored)
        }
        None => {
            let n = left_arm.len();
            (left_arm, vec![Complex64::new(0.0, 0.0); n])
        }
    };
    let (out_l, out_r): (Vec<_>, Vec<_>) =
        left_arm.samples.iter().zip(&right_in).map(|(&l, &r)| beam_splitter(l, r)).unzip();
    let out_l = TimeSeries::new(packet_field.t0, packet_field.dt, out_l);
    let out_r = TimeSeries::new(packet_field.t0, packet_field.dt, out_r);

    let scale = 1.0 / mode_norm.sqrt();
    let left = packet_field.inner(&out_l) * scale;
    let right = packet_field.inner(&out_r) * scale;

    let residual_field = (out_l.norm_sqr() - left.norm_sqr()) + (out_r.norm_sqr() - right.norm_sqr());
    let still_stored = stored.last().map(|c| c.norm_sqr()).unwrap_or(0.0);
    let leakage = (1.0 - mode_norm) + residual_field + still_stored;

    let running = |out: &TimeSeries| -> Vec<Complex64> {
        let dt = packet_field.dt;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut values = Vec::with_capacity(out.len());
        for i in 0..out.len() {
            if i > 0 {
                let a = packet_field.samples[i - 1].conj() * out.samples[i - 1];
                let b = packet_field.samples[i].conj() * out.samples[i];
                acc += (a + b) * (0.5 * dt);
            }
            values.push(acc * scale);
        }
        values
    };

    Ok(BranchRun {
        running_left: running(&out_l),
        running_right: running(&out_r),
        stored,
        capture: BranchCapture { control, left, right, leakage },
    })
}

/// Runs one conditional routing operation; see the module docs for the model.
pub fn simulate_routing(config: &RouterSimConfig) -> Result<RouterSimResult> {
    config.validate()?;
    let resp = config.response()?;
    let window = config.window.ns();
    let steps = (window / config.step()?).ceil().max(1000.0) as usize;
    let dt = window / steps as f64;
    let packet = config.packet.centered_at(Time::from_ns(window / 2.0));
    let field = TimeSeries::sample(0.0, dt, steps + 1, |t| Complex64::new(packet.amplitude_unchecked(t), 0.0));
    let mode_norm = field.norm_sqr();

    let [alpha_g, alpha_e] = config.control_init;
    let ground = run_branch('g', &field, mode_norm, config.source, None)?;
    let excited = run_branch('e', &field, mode_norm, config.source, Some(&resp))?;

    let mut final_state = BTreeMap::new();
    for (alpha, run) in [(alpha_g, &ground), (alpha_e, &excited)] {
        let c = run.capture.control;
        final_state.insert(format!("10{c}"), alpha * run.capture.left);
        final_state.insert(format!("01{c}"), alpha * run.capture.right);
    }

    // Ideal CSWAP: the excitation swaps sides iff the control is excited.
    let ideal_amp = |run: &BranchRun, swaps: bool| match (config.source, swaps) {
        (Source::Left, false) | (Source::Right, true) => run.capture.left,
        (Source::Left, true) | (Source::Right, false) => run.capture.right,
    };
    let overlap = alpha_g.norm_sqr() * ideal_amp(&ground, false) + alpha_e.norm_sqr() * ideal_amp(&excited, true);
    let fidelity = overlap.norm_sqr().clamp(0.0, 1.0);

    let weight = [alpha_g.norm_sqr(), alpha_e.norm_sqr()];
    let captured = weight[0] * (ground.capture.left.norm_sqr() + ground.capture.right.norm_sqr())
        + weight[1] * (excited.capture.left.norm_sqr() + excited.capture.right.norm_sqr());
    let leakage = weight[0] * ground.capture.leakage + weight[1] * excited.capture.leakage;

    let traces = build_traces(&field, config.source, weight, &ground, &excited);
    Ok(RouterSimResult {
        final_state,
        fidelity,
        leakage,
        captured,
        branches: vec![ground.capture, excited.capture],
        dt_ns: dt,
        traces,
    })
}

fn build_traces(field: &TimeSeries, source: Source, weight: [f64; 2], g: &BranchRun, e: &BranchRun) -> Traces {
    let n = field.len();
    let stride = n.div_ceil(MAX_TRACE_POINTS).max(1);
    let mut traces = Traces::default();
    let mut emitted = 0.0;
    for i in 0..n {
        if i > 0 {
            emitted += 0.5 * (field.samples[i - 1].norm_sqr() + field.samples[i].norm_sqr()) * field.dt;
        }
        if i % stride != 0 && i != n - 1 {
            continue;
        }
        let remaining = (1.0 - emitted).max(0.0);
        let left = weight[0] * g.running_left[i].norm_sqr() + weight[1] * e.running_left[i].norm_sqr();
        let right = weight[0] * g.running_right[i].norm_sqr() + weight[1] * e.running_right[i].norm_sqr();
        let f_pop = weight[1] * e.stored[i].norm_sqr();
        let (q_left, q_right) = match source {
            Source::Left => (remaining + left, right),
            Source::Right => (left, remaining + right),
        };
        traces.time_ns.push(field.time(i));
        traces.q_left.push(q_left);
        traces.q_right.push(q_right);
        traces.q_control_e.push(weight[1] - f_pop);
        traces.q_control_f.push(f_pop);
    }
    traces
}

/// A window long enough that truncation and scatterer ring-down are below
/// 1e-10 for either pulse shape.
pub fn asymptotic_window(packet: &WavePacket, resp: &ReflectionResponse) -> Time {
    let fwhm = packet.fwhm.ns();
    let kappa = resp.kappa.rad_per_ns();
    Time::from_ns(24.0 * fwhm + 2.0 * 50.0 / kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    /// κ_max in cyclic MHz, or the window in ns.
    pub param: f64,
    pub shape: PulseShape,
    pub infidelity: f64,
    /// Time-domain value at an asymptotic window, when requested.
    pub infidelity_time_domain: Option<f64>,
}

/// One κ_max grid point: closed-form infidelity, optionally with the
/// long-window time-domain value alongside.
pub fn kappa_point(
    shape: PulseShape,
    fwhm: Time,
    kappa_max: AngularRate,
    transition: ScatteringTransition,
    time_domain: bool,
) -> Result<SweepRow> {
    let packet = WavePacket::new(shape, fwhm)?;
    let resp = ReflectionResponse::for_transmon(kappa_max, transition)?;
    let analytic = 1.0 - distortion_fidelity(&packet, &resp)?;
    let infidelity_time_domain = if time_domain {
        let mut cfg = RouterSimConfig::superposed(packet, kappa_max, asymptotic_window(&packet, &resp));
        cfg.transition = transition;
        Some(1.0 - simulate_routing(&cfg)?.fidelity)
    } else {
        None
    };
    Ok(SweepRow { param: kappa_max.cyclic_mhz(), shape, infidelity: analytic, infidelity_time_domain })
}

/// One routing-window grid point of the time-domain simulation.
pub fn window_point(
    shape: PulseShape,
    fwhm: Time,
    kappa_max: AngularRate,
    transition: ScatteringTransition,
    window: Time,
) -> Result<SweepRow> {
    let packet = WavePacket::new(shape, fwhm)?;
    let mut cfg = RouterSimConfig::superposed(packet, kappa_max, window);
    cfg.transition = transition;
    let result = simulate_routing(&cfg)?;
    Ok(SweepRow { param: window.ns(), shape, infidelity: 1.0 - result.fidelity, infidelity_time_domain: None })
}

/// Closed-form infidelity (and optionally time-domain) over a κ_max grid.
pub fn sweep_kappa(
    shapes: &[PulseShape],
    fwhm: Time,
    kappas: &[AngularRate],
    transition: ScatteringTransition,
    time_domain: bool,
) -> Result<Vec<SweepRow>> {
    if shapes.is_empty() || kappas.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    shapes
        .iter()
        .flat_map(|&s| kappas.iter().map(move |&k| (s, k)))
        .map(|(s, k)| kappa_point(s, fwhm, k, transition, time_domain))
        .collect()
}

/// Time-domain infidelity over a routing-window grid.
pub fn sweep_window(
    shapes: &[PulseShape],
    fwhm: Time,
    kappa_max: AngularRate,
    transition: ScatteringTransition,
    windows: &[Time],
) -> Result<Vec<SweepRow>> {
    if shapes.is_empty() || windows.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    shapes
        .iter()
        .flat_map(|&s| windows.iter().map(move |&w| (s, w)))
        .map(|(s, w)| window_point(s, fwhm, kappa_max, transition, w))
        .collect()
}
