//! Event-stream generators for all supported data-generating processes.
//!
//! Time is measured in seconds from the session open; the default session is
//! a 6.5 hour trading day (23,400 s). Stationary intensity components are
//! unitless multipliers of a one-event-per-second baseline. Mean-reverting
//! diffusion dynamics and the diurnal curve live on normalized day time
//! `t / horizon ∈ [0, 1]`; Hawkes excitation parameters are per second (the
//! only convention under which `E(μ) = λ0/(1 − θ/κ)` is an event rate).
//!
//! The heavy-traffic scale `n` multiplies every baseline rate, equivalent to
//! superposing `n` independent copies of the session.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, COMPONENT_BURST, COMPONENT_EVENTS, COMPONENT_PATH};

/// Hard cap on the expected number of events a single call may generate.
const EVENT_CAPACITY: f64 = 2_147_483_648.0; // 2^31

// ---------------------------------------------------------------------------
// Session and parameter types
// ---------------------------------------------------------------------------

/// One simulated session: horizon, simulation grid, and heavy-traffic scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionSpec {
    /// Session length in seconds.
    pub horizon_seconds: f64,
    /// Simulation step `dt` in seconds.
    pub grid_step: f64,
    /// Heavy-traffic multiplier `n ≥ 1`.
    pub rate_scale: u32,
}

impl Default for SessionSpec {
    fn default() -> Self {
        Self {
            horizon_seconds: 23_400.0,
            grid_step: 0.01,
            rate_scale: 1,
        }
    }
}

impl SessionSpec {
    pub fn new(horizon_seconds: f64, grid_step: f64, rate_scale: u32) -> Result<Self> {
        let spec = Self {
            horizon_seconds,
            grid_step,
            rate_scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon_seconds > 0.0) || !(self.grid_step > 0.0) {
            return Err(Error::Parameter(
                "horizon and grid step must be positive".into(),
            ));
        }
        let cells = self.horizon_seconds / self.grid_step;
        if (cells - cells.round()).abs() > 1e-6 * cells.max(1.0) {
            return Err(Error::Parameter(format!(
                "horizon {} is not an integer number of grid steps {}",
                self.horizon_seconds, self.grid_step
            )));
        }
        if self.rate_scale < 1 {
            return Err(Error::Parameter("rate_scale must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of simulation cells on the grid.
    pub fn n_cells(&self) -> usize {
        (self.horizon_seconds / self.grid_step).round() as usize
    }
}

/// Square-root diffusion parameters for the stationary intensity multiplier.
///
/// Dynamics are on normalized day time: `dμ = κ(λ̄ − μ)dt + γ√μ dW`,
/// `t ∈ [0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CirParams {
    /// Steady-state level λ̄.
    pub lambda_bar: f64,
    /// Mean-reversion speed κ (per day).
    pub kappa: f64,
    /// Volatility γ (per √day).
    pub gamma: f64,
}

impl Default for CirParams {
    fn default() -> Self {
        Self {
            lambda_bar: 1.0,
            kappa: 0.03,
            gamma: 0.20,
        }
    }
}

impl CirParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_bar > 0.0) || !(self.kappa > 0.0) || !(self.gamma >= 0.0) {
            return Err(Error::Parameter(
                "CIR requires lambda_bar > 0, kappa > 0, gamma >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Feller condition `2 λ̄ κ ≥ γ²`. Violations are allowed but the state
    /// then hits zero with positive probability.
    pub fn feller_satisfied(&self) -> bool {
        2.0 * self.lambda_bar * self.kappa >= self.gamma * self.gamma
    }

    /// Stationary variance `λ̄ γ² / (2κ)`.
    pub fn stationary_variance(&self) -> f64 {
        self.lambda_bar * self.gamma * self.gamma / (2.0 * self.kappa)
    }
}

/// Exponential-kernel Hawkes parameters, all per second.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HawkesParams {
    /// Background intensity λ0 (events/s).
    pub lambda0: f64,
    /// Intensity jump θ per event (events/s).
    pub theta: f64,
    /// Excitation decay κ (1/s).
    pub kappa: f64,
}

impl Default for HawkesParams {
    fn default() -> Self {
        // λ0 = 0.5 and θ = (1 − λ0)κ give a stationary mean of one event/s.
        Self {
            lambda0: 0.5,
            theta: 0.015,
            kappa: 0.03,
        }
    }
}

impl HawkesParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0) || !(self.theta >= 0.0) || !(self.kappa > 0.0) {
            return Err(Error::Parameter(
                "Hawkes requires lambda0 > 0, theta >= 0, kappa > 0".into(),
            ));
        }
        if self.theta / self.kappa >= 1.0 {
            return Err(Error::Parameter(format!(
                "nonstationary Hawkes parameters: theta/kappa = {} >= 1",
                self.theta / self.kappa
            )));
        }
        Ok(())
    }

    /// Stationary mean intensity `λ0 / (1 − θ/κ)` in events/s.
    pub fn stationary_mean(&self) -> f64 {
        self.lambda0 / (1.0 - self.theta / self.kappa)
    }
}

/// Singular burst intensity `β_t = σ / |τ − t|^α` on
/// `[τ − half_width, τ + half_width]`, zero outside.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BurstParams {
    /// Burst center τ in seconds.
    pub tau_ib: f64,
    /// Explosion rate α ∈ (0, 1).
    pub alpha: f64,
    /// Burst scale σ ≥ 0.
    pub sigma: f64,
    /// Support half-width in seconds (default 300 s, a 10-minute window).
    pub half_width: f64,
}

impl BurstParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter("burst alpha must lie in (0, 1)".into()));
        }
        if !(self.sigma >= 0.0) || !(self.half_width > 0.0) {
            return Err(Error::Parameter(
                "burst requires sigma >= 0 and half_width > 0".into(),
            ));
        }
        Ok(())
    }

    /// Validate that the burst support fits inside the session.
    pub fn validate_in_session(&self, spec: &SessionSpec) -> Result<()> {
        self.validate()?;
        if self.tau_ib - self.half_width < 0.0 || self.tau_ib + self.half_width > spec.horizon_seconds
        {
            return Err(Error::Parameter(format!(
                "burst support [{}, {}] exceeds session [0, {}]",
                self.tau_ib - self.half_width,
                self.tau_ib + self.half_width,
                spec.horizon_seconds
            )));
        }
        Ok(())
    }
}

/// Intraday activity curve `μ_d(t) = C + A e^{−a1 t} + B e^{−a2 (1−t)}` on
/// normalized time `t ∈ [0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiurnalParams {
    pub a_scale: f64,
    pub b_scale: f64,
    pub c_level: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Default for DiurnalParams {
    fn default() -> Self {
        // Reference calibration; C makes the curve integrate to one up to
        // rounding in the published constant (off by ~1.7e-5).
        Self {
            a_scale: 0.75,
            b_scale: 0.25,
            c_level: 0.899_987_44,
            a1: 10.0,
            a2: 10.0,
        }
    }
}

impl DiurnalParams {
    /// Curve with `C` chosen so the integral over [0, 1] is exactly one.
    pub fn normalized(a_scale: f64, b_scale: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(a1 > 0.0) || !(a2 > 0.0) {
            return Err(Error::Parameter("diurnal decay rates must be positive".into()));
        }
        let c_level = 1.0 - a_scale * (1.0 - (-a1).exp()) / a1 - b_scale * (1.0 - (-a2).exp()) / a2;
        let d = Self {
            a_scale,
            b_scale,
            c_level,
            a1,
            a2,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a1 > 0.0) || !(self.a2 > 0.0) {
            return Err(Error::Parameter("diurnal decay rates must be positive".into()));
        }
        // Unit-mass check. Tolerance admits the published constant, which
        // misses exact normalization by about 1.7e-5.
        let integral = self.integral();
        if (integral - 1.0).abs() > 1e-4 {
            return Err(Error::Parameter(format!(
                "diurnal curve integrates to {integral}, expected 1"
            )));
        }
        for i in 0..=1000 {
            if self.factor(i as f64 / 1000.0) <= 0.0 {
                return Err(Error::Parameter("diurnal curve must be positive".into()));
            }
        }
        Ok(())
    }

    /// Curve value at normalized time `t ∈ [0, 1]`.
    pub fn factor(&self, t: f64) -> f64 {
        self.c_level + self.a_scale * (-self.a1 * t).exp() + self.b_scale * (-self.a2 * (1.0 - t)).exp()
    }

    /// Closed-form integral over [0, 1].
    pub fn integral(&self) -> f64 {
        self.c_level
            + self.a_scale * (1.0 - (-self.a1).exp()) / self.a1
            + self.b_scale * (1.0 - (-self.a2).exp()) / self.a2
    }

    /// Maximum of the curve on [0, 1], used as a thinning majorant.
    pub fn max_factor(&self) -> f64 {
        // Convex in t (sum of convex exponentials), so the max is at an edge.
        self.factor(0.0).max(self.factor(1.0))
    }
}

/// Piecewise-constant intensity with a single discontinuity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpScenario {
    /// Jump location θ in seconds.
    pub theta_jump: f64,
    /// Level before the jump (events/s multiplier).
    pub mu_before: f64,
    /// Jump size Δμ; the level after θ is `mu_before + delta_mu`.
    pub delta_mu: f64,
}

impl JumpScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_before > 0.0) || !(self.mu_before + self.delta_mu > 0.0) {
            return Err(Error::Parameter(
                "jump scenario requires positive intensity on both sides".into(),
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Output types
// ---------------------------------------------------------------------------

/// Sorted event timestamps of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    times: Vec<f64>,
    horizon: f64,
}

impl EventStream {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        for w in times.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Input("event times must be nondecreasing".into()));
            }
        }
        if let (Some(first), Some(last)) = (times.first(), times.last()) {
            if *first < 0.0 || *last > horizon {
                return Err(Error::Input(format!(
                    "event times must lie in [0, {horizon}]"
                )));
            }
        }
        Ok(Self { times, horizon })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Superpose two independent streams (merge of sorted times).
    pub fn merge(&self, other: &EventStream) -> EventStream {
        let mut times = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.times.len() && j < other.times.len() {
            if self.times[i] <= other.times[j] {
                times.push(self.times[i]);
                i += 1;
            } else {
                times.push(other.times[j]);
                j += 1;
            }
        }
        times.extend_from_slice(&self.times[i..]);
        times.extend_from_slice(&other.times[j..]);
        EventStream {
            times,
            horizon: self.horizon.max(other.horizon),
        }
    }

    /// Number of events in the half-open interval `(a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        let lo = self.times.partition_point(|&t| t <= a);
        let hi = self.times.partition_point(|&t| t <= b);
        hi - lo
    }
}

/// Latent intensity sampled on the simulation grid, left-constant per cell.
///
/// Values are per-copy rates in events/second; the heavy-traffic scale `n`
/// is applied by the samplers, not stored here.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityPath {
    step: f64,
    values: Vec<f64>,
}

impl IntensityPath {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Parameter("grid step must be positive".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Parameter("intensity values must be nonnegative".into()));
        }
        Ok(Self { step, values })
    }

    pub fn constant(value: f64, spec: &SessionSpec) -> Result<Self> {
        Self::new(spec.grid_step, vec![value; spec.n_cells()])
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.values.len() as f64
    }

    /// Integrated intensity over the whole grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step
    }

    /// Time average of the path.
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }

    /// Multiply each cell by the diurnal factor at the cell start.
    pub fn apply_diurnal(&mut self, diurnal: &DiurnalParams) {
        let horizon = self.horizon();
        let dt_norm = self.step / horizon;
        // Recursive exponentials: one multiply per cell instead of two exps.
        let ra = (-diurnal.a1 * dt_norm).exp();
        let rb = (diurnal.a2 * dt_norm).exp();
        let mut ea = 1.0;
        let mut eb = (-diurnal.a2).exp();
        for v in &mut self.values {
            *v *= diurnal.c_level + diurnal.a_scale * ea + diurnal.b_scale * eb;
            ea *= ra;
            eb *= rb;
        }
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Homogeneous Poisson stream with intensity `rate · rate_scale` events/s.
pub fn simulate_poisson(rate: f64, spec: &SessionSpec, seed_value: u64) -> Result<EventStream> {
    spec.validate()?;
    if !(rate >= 0.0) {
        return Err(Error::Parameter("rate must be nonnegative".into()));
    }
    let lambda = rate * spec.rate_scale as f64;
    let expected = lambda * spec.horizon_seconds;
    if expected >= EVENT_CAPACITY {
        return Err(Error::Capacity {
            expected,
            limit: EVENT_CAPACITY,
        });
    }
    let mut times = Vec::new();
    if lambda > 0.0 {
        let mut rng = seed::rng(seed_value);
        let exp = Exp::new(lambda).expect("positive rate");
        let mut t = 0.0;
        loop {
            t += exp.sample(&mut rng);
            if t > spec.horizon_seconds {
                break;
            }
            times.push(t);
        }
    }
    EventStream::new(times, spec.horizon_seconds)
}

/// Euler scheme with full truncation for the square-root diffusion, with the
/// initial state drawn from the stationary Gamma law.
pub fn simulate_cir_path(p: &CirParams, spec: &SessionSpec, seed_value: u64) -> Result<IntensityPath> {
    p.validate()?;
    spec.validate()?;
    let mut rng = seed::rng(seed_value);
    let x0 = if p.gamma > 0.0 {
        let shape = 2.0 * p.lambda_bar * p.kappa / (p.gamma * p.gamma);
        let scale = p.gamma * p.gamma / (2.0 * p.kappa);
        Gamma::new(shape, scale)
            .map_err(|e| Error::Parameter(format!("stationary Gamma law: {e}")))?
            .sample(&mut rng)
    } else {
        p.lambda_bar
    };
    cir_path_from(p, spec, x0, &mut rng)
}

/// Same scheme from a fixed initial state.
pub fn simulate_cir_path_with_initial(
    p: &CirParams,
    spec: &SessionSpec,
    mu0: f64,
    seed_value: u64,
) -> Result<IntensityPath> {
    p.validate()?;
    spec.validate()?;
    let mut rng = seed::rng(seed_value);
    cir_path_from(p, spec, mu0, &mut rng)
}

fn cir_path_from(
    p: &CirParams,
    spec: &SessionSpec,
    x0: f64,
    rng: &mut impl Rng,
) -> Result<IntensityPath> {
    let n = spec.n_cells();
    let dt = spec.grid_step / spec.horizon_seconds; // normalized day time
    let sqrt_dt = dt.sqrt();
    let mut values = Vec::with_capacity(n);
    let mut x = x0.max(0.0);
    for _ in 0..n {
        values.push(x);
        let z: f64 = StandardNormal.sample(rng);
        let xp = x.max(0.0);
        x = (x + p.kappa * (p.lambda_bar - x) * dt + p.gamma * xp.sqrt() * sqrt_dt * z).max(0.0);
    }
    IntensityPath::new(spec.grid_step, values)
}

/// Exact Hawkes simulation by Ogata thinning with the O(1) exponential-kernel
/// state recursion. The heavy-traffic scale multiplies the background rate
/// only: superposing `n` independent copies of `(λ0, θ, κ)` is equivalent to
/// a single process with background `n·λ0` and unchanged excitation.
pub fn simulate_hawkes(p: &HawkesParams, spec: &SessionSpec, seed_value: u64) -> Result<EventStream> {
    hawkes_events(p, None, spec, seed_value)
}

/// Hawkes stream with an optional diurnal modulation of the whole intensity.
pub fn hawkes_events(
    p: &HawkesParams,
    diurnal: Option<&DiurnalParams>,
    spec: &SessionSpec,
    seed_value: u64,
) -> Result<EventStream> {
    p.validate()?;
    spec.validate()?;
    if let Some(d) = diurnal {
        d.validate()?;
    }
    let base = p.lambda0 * spec.rate_scale as f64;
    let expected = p.stationary_mean() * spec.rate_scale as f64 * spec.horizon_seconds;
    if expected >= EVENT_CAPACITY {
        return Err(Error::Capacity {
            expected,
            limit: EVENT_CAPACITY,
        });
    }
    let d_max = diurnal.map_or(1.0, |d| d.max_factor());
    let mut rng = seed::rng(seed_value);
    let mut times = Vec::new();
    let mut t = 0.0f64;
    let mut excitation = 0.0f64; // θ Σ e^{−κ(t − t_j)}
    loop {
        let upper = d_max * (base + excitation);
        let w = Exp::new(upper).expect("positive majorant").sample(&mut rng);
        t += w;
        if t > spec.horizon_seconds {
            break;
        }
        excitation *= (-p.kappa * w).exp();
        let factor = diurnal.map_or(1.0, |d| d.factor(t / spec.horizon_seconds));
        let lambda = factor * (base + excitation);
        if rng.random::<f64>() * upper <= lambda {
            times.push(t);
            excitation += p.theta;
        }
    }
    EventStream::new(times, spec.horizon_seconds)
}

/// Ground-truth Hawkes intensity on the simulation grid, per copy
/// (the observed intensity divided by `rate_scale`).
pub fn hawkes_intensity_path(
    p: &HawkesParams,
    diurnal: Option<&DiurnalParams>,
    spec: &SessionSpec,
    events: &EventStream,
) -> Result<IntensityPath> {
    let n_cells = spec.n_cells();
    let n = spec.rate_scale as f64;
    let decay = (-p.kappa * spec.grid_step).exp();
    let mut values = Vec::with_capacity(n_cells);
    let mut excitation = 0.0f64;
    let mut next_event = 0usize;
    let times = events.times();
    for i in 0..n_cells {
        let t = i as f64 * spec.grid_step;
        let factor = diurnal.map_or(1.0, |d| d.factor(t / spec.horizon_seconds));
        values.push(factor * (p.lambda0 + excitation / n));
        // Advance to the end of the cell: decay, then add events inside.
        let t_end = t + spec.grid_step;
        excitation *= decay;
        while next_event < times.len() && times[next_event] <= t_end {
            let decayed = (-p.kappa * (t_end - times[next_event])).exp();
            excitation += p.theta * decayed;
            next_event += 1;
        }
    }
    IntensityPath::new(spec.grid_step, values)
}

/// Closed-form burst compensator `∫₀ᵗ β_s ds`.
///
/// The antiderivative of `σ |τ − s|^{−α}` is `±σ/(1−α) |τ − s|^{1−α}` with the
/// sign flipping across the singularity; the compensator is continuous and
/// nondecreasing, and finite because α < 1.
pub fn burst_compensator(b: &BurstParams, t: f64) -> f64 {
    let one_m_a = 1.0 - b.alpha;
    let scale = b.sigma / one_m_a;
    let lo = b.tau_ib - b.half_width;
    let hi = b.tau_ib + b.half_width;
    let half_mass = scale * b.half_width.powf(one_m_a);
    if t <= lo {
        0.0
    } else if t < b.tau_ib {
        half_mass - scale * (b.tau_ib - t).powf(one_m_a)
    } else if t < hi {
        half_mass + scale * (t - b.tau_ib).powf(one_m_a)
    } else {
        2.0 * half_mass
    }
}

/// Scale σ such that the burst contributes on average a fraction `c` of the
/// baseline event count: `∫ β dt = c · base_integral`.
pub fn calibrate_burst_sigma(c: f64, alpha: f64, half_width: f64, base_integral: f64) -> f64 {
    debug_assert!(c >= 0.0 && alpha > 0.0 && alpha < 1.0 && half_width > 0.0 && base_integral > 0.0);
    c * (1.0 - alpha) / (2.0 * half_width.powf(1.0 - alpha)) * base_integral
}

/// Inhomogeneous Poisson draw from the singular burst intensity by exact
/// time-change inversion.
///
/// β is unbounded near τ, so no finite thinning majorant exists; instead a
/// Poisson count with mean `n Λ_β(T)` is drawn, arrival marks are placed
/// uniformly in compensator scale, and the closed-form compensator is
/// inverted per branch. The open-interval inversion never returns exactly τ.
pub fn simulate_burst_events(b: &BurstParams, spec: &SessionSpec, seed_value: u64) -> Result<EventStream> {
    b.validate_in_session(spec)?;
    spec.validate()?;
    if b.sigma == 0.0 {
        return EventStream::new(Vec::new(), spec.horizon_seconds);
    }
    let total_mass = burst_compensator(b, spec.horizon_seconds);
    let mean = total_mass * spec.rate_scale as f64;
    if mean >= EVENT_CAPACITY {
        return Err(Error::Capacity {
            expected: mean,
            limit: EVENT_CAPACITY,
        });
    }
    let mut rng = seed::rng(seed_value);
    let count = Poisson::new(mean)
        .map_err(|e| Error::Parameter(format!("burst mass: {e}")))?
        .sample(&mut rng) as usize;
    let one_m_a = 1.0 - b.alpha;
    let scale = b.sigma / one_m_a;
    let half_mass = scale * b.half_width.powf(one_m_a);
    let mut times = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.random::<f64>() * total_mass;
        let t = if u < half_mass {
            // Left branch: Λ(t) = half_mass − scale (τ − t)^{1−α}.
            b.tau_ib - ((half_mass - u) / scale).powf(1.0 / one_m_a)
        } else {
            b.tau_ib + ((u - half_mass) / scale).powf(1.0 / one_m_a)
        };
        times.push(t.clamp(0.0, spec.horizon_seconds));
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    EventStream::new(times, spec.horizon_seconds)
}

/// Sample an inhomogeneous Poisson stream from a left-constant intensity
/// path, scaled by `rate_scale`.
///
/// Within each cell the intensity is constant, so the time change is exact:
/// unit-rate exponential gaps are consumed while scanning the cumulative
/// compensator.
pub fn sample_from_intensity_path(
    path: &IntensityPath,
    spec: &SessionSpec,
    seed_value: u64,
) -> Result<EventStream> {
    spec.validate()?;
    let n = spec.rate_scale as f64;
    let expected = path.integral() * n;
    if expected >= EVENT_CAPACITY {
        return Err(Error::Capacity {
            expected,
            limit: EVENT_CAPACITY,
        });
    }
    let mut rng = seed::rng(seed_value);
    let exp1 = Exp::new(1.0).expect("unit rate");
    let mut times = Vec::new();
    let mut cum = 0.0f64; // integrated intensity so far
    let mut next = exp1.sample(&mut rng);
    let step = path.step();
    for (i, &v) in path.values().iter().enumerate() {
        let rate = v * n;
        if rate <= 0.0 {
            continue;
        }
        let cell_start = i as f64 * step;
        let inc = rate * step;
        while cum + inc >= next {
            let t = cell_start + (next - cum) / rate;
            times.push(t.min(spec.horizon_seconds));
            next += exp1.sample(&mut rng);
        }
        cum += inc;
    }
    EventStream::new(times, spec.horizon_seconds)
}

/// Diurnal curve value at normalized time; thin wrapper kept for symmetry
/// with the other generators.
pub fn diurnal_factor(d: &DiurnalParams, t_normalized: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&t_normalized));
    d.factor(t_normalized)
}

// ---------------------------------------------------------------------------
// Scenario composition
// ---------------------------------------------------------------------------

/// Stationary component of the intensity.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseProcess {
    Poisson { rate: f64 },
    Cir(CirParams),
    Hawkes(HawkesParams),
}

/// Full scenario: base process, optional diurnal modulation, and at most one
/// of a burst or a jump component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub base: BaseProcess,
    #[serde(default)]
    pub diurnal: Option<DiurnalParams>,
    #[serde(default)]
    pub burst: Option<BurstParams>,
    #[serde(default)]
    pub jump: Option<JumpScenario>,
}

impl ScenarioConfig {
    pub fn validate(&self, spec: &SessionSpec) -> Result<()> {
        if self.burst.is_some() && self.jump.is_some() {
            return Err(Error::Config(
                "a scenario may contain a burst or a jump, not both".into(),
            ));
        }
        match &self.base {
            BaseProcess::Poisson { rate } => {
                if !(*rate >= 0.0) {
                    return Err(Error::Parameter("rate must be nonnegative".into()));
                }
            }
            BaseProcess::Cir(p) => p.validate()?,
            BaseProcess::Hawkes(p) => p.validate()?,
        }
        if let Some(d) = &self.diurnal {
            d.validate()?;
        }
        if let Some(b) = &self.burst {
            b.validate_in_session(spec)?;
        }
        if let Some(j) = &self.jump {
            j.validate()?;
            if j.theta_jump <= 0.0 || j.theta_jump >= spec.horizon_seconds {
                return Err(Error::Parameter("jump time must lie inside the session".into()));
            }
        }
        Ok(())
    }
}

/// Simulate a full scenario, returning the event stream and the ground-truth
/// normal intensity path (per copy, excluding the singular burst component).
pub fn compose_scenario(
    cfg: &ScenarioConfig,
    spec: &SessionSpec,
    seed_value: u64,
) -> Result<(EventStream, IntensityPath)> {
    cfg.validate(spec)?;
    let path_seed = seed::derive_seed(seed_value, 0, 0, COMPONENT_PATH);
    let events_seed = seed::derive_seed(seed_value, 0, 0, COMPONENT_EVENTS);
    let burst_seed = seed::derive_seed(seed_value, 0, 0, COMPONENT_BURST);

    let (mut events, path) = if let Some(jump) = &cfg.jump {
        // The jump scenario replaces the stationary intensity with a
        // two-level piecewise-constant path.
        let mut values = Vec::with_capacity(spec.n_cells());
        for i in 0..spec.n_cells() {
            let t = i as f64 * spec.grid_step;
            values.push(if t < jump.theta_jump {
                jump.mu_before
            } else {
                jump.mu_before + jump.delta_mu
            });
        }
        let mut path = IntensityPath::new(spec.grid_step, values)?;
        if let Some(d) = &cfg.diurnal {
            path.apply_diurnal(d);
        }
        let events = sample_from_intensity_path(&path, spec, events_seed)?;
        (events, path)
    } else {
        match &cfg.base {
            BaseProcess::Poisson { rate } => {
                if cfg.diurnal.is_none() {
                    let events = simulate_poisson(*rate, spec, events_seed)?;
                    (events, IntensityPath::constant(*rate, spec)?)
                } else {
                    let mut path = IntensityPath::constant(*rate, spec)?;
                    path.apply_diurnal(cfg.diurnal.as_ref().unwrap());
                    let events = sample_from_intensity_path(&path, spec, events_seed)?;
                    (events, path)
                }
            }
            BaseProcess::Cir(p) => {
                let mut path = simulate_cir_path(p, spec, path_seed)?;
                if let Some(d) = &cfg.diurnal {
                    path.apply_diurnal(d);
                }
                let events = sample_from_intensity_path(&path, spec, events_seed)?;
                (events, path)
            }
            BaseProcess::Hawkes(p) => {
                let events = hawkes_events(p, cfg.diurnal.as_ref(), spec, events_seed)?;
                let path = hawkes_intensity_path(p, cfg.diurnal.as_ref(), spec, &events)?;
                (events, path)
            }
        }
    };

    if let Some(b) = &cfg.burst {
        let burst = simulate_burst_events(b, spec, burst_seed)?;
        events = events.merge(&burst);
    }
    Ok((events, path))
}
