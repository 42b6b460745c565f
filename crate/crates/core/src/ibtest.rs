//! The intensity-burst test statistic, its observed local variance,
//! candidate selection, and critical values.
//!
//! The working form of the statistic is free of the latent rate scale:
//!
//! ```text
//! φ_ib(t) = (U_t − U_{t−δ}) / √( (1/K) Σ_j (U_{a_j} − U_{a_j−δ})² )
//! ```
//!
//! where `U_s` is the (possibly kernel-weighted) count of the window
//! `(s − δ, s]`, `δ = ℓΔ`, and the anchors `a_j` lag `t` by `jΔ`
//! (overlapping scheme) or `2jℓΔ` (nonoverlapping). Numerator and
//! denominator are homogeneous of degree one in the counts, so any common
//! scaling — including the rate scale `n` — cancels exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{deflate, spot_series_exponential, CountSeries, KernelSpec, SeasonalCurve};
use crate::stats::normal_quantile;

// ---------------------------------------------------------------------------
// Configuration and result types
// ---------------------------------------------------------------------------

/// Variance-anchor layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AvarScheme {
    /// Anchors `t − jΔ`, `j = 0..K−1` (default; efficient use of the local
    /// window).
    Overlapping,
    /// Anchors `t − 2jℓΔ`, disjoint blocks.
    Nonoverlapping,
}

/// Test configuration: bandwidth, variance sample size, kernel, scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    /// Estimation window in bins (ℓ).
    pub ell: usize,
    /// Number of variance anchors (K).
    pub k_n: usize,
    pub kernel: KernelSpec,
    pub avar_scheme: AvarScheme,
}

impl TestConfig {
    /// Reference configuration: `K = 10ℓ`, overlapping anchors.
    pub fn reference(ell: usize, kernel: KernelSpec) -> Self {
        Self {
            ell,
            k_n: 10 * ell,
            kernel,
            avar_scheme: AvarScheme::Overlapping,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell < 2 {
            return Err(Error::Config("ell must be at least 2".into()));
        }
        if self.k_n < 2 {
            return Err(Error::Config("K must be at least 2".into()));
        }
        self.kernel.validate()
    }

    /// The overlapping variance estimate needs `K` well above `ℓ`.
    pub fn anchors_are_thin(&self) -> bool {
        self.avar_scheme == AvarScheme::Overlapping && self.ell > self.k_n / 2
    }

    /// First testable grid index (warm-up length in bins).
    pub fn warmup_bins(&self) -> usize {
        match self.avar_scheme {
            AvarScheme::Overlapping => 2 * self.ell + self.k_n,
            AvarScheme::Nonoverlapping => 2 * self.ell * self.k_n,
        }
    }
}

/// Outcome of one statistic evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub t: f64,
    /// Count difference of the two adjacent windows (kernel-weighted when
    /// the kernel is exponential).
    pub numerator: f64,
    /// Mean squared anchor difference `(1/K) Σ D_j²` — the squared
    /// denominator of the statistic, in count units.
    pub avar_hat: f64,
    pub statistic: f64,
    /// Set when the denominator vanished; the statistic is reported as 0.
    pub degenerate: bool,
    pub config: TestConfig,
}

/// Times of the largest well-separated local maxima of a spot series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    /// Sorted by descending spot value.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub min_separation: f64,
}

/// Threshold calibration method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalMethod {
    GaussianQuantile,
    Bonferroni,
    Gumbel,
    Average,
}

/// A calibrated threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub method: CriticalMethod,
    pub level: f64,
    pub m: usize,
    pub value: f64,
}

/// One day's detection output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayDetections {
    /// Sorted by descending statistic; only entries above the threshold.
    pub detections: Vec<TestResult>,
    /// Candidates skipped for boundary reasons: (time, message).
    pub skipped: Vec<(f64, String)>,
}

// ---------------------------------------------------------------------------
// Window machinery
// ---------------------------------------------------------------------------

/// Window count `U_m` at every grid index `m = 1..=len`; entry `i` is the
/// value at `t = (i+1)Δ`. Indicator: plain sliding sum, `NaN` until enough
/// history. Exponential: exact full-history weighted sum.
fn window_counts(counts: &CountSeries, config: &TestConfig) -> Vec<f64> {
    let c = counts.counts();
    let ell = config.ell;
    match config.kernel {
        KernelSpec::Indicator => {
            let mut out = vec![f64::NAN; c.len()];
            let mut acc = 0.0;
            for (i, &x) in c.iter().enumerate() {
                acc += x;
                if i + 1 >= ell {
                    if i + 1 > ell {
                        acc -= c[i - ell];
                    }
                    out[i] = acc;
                }
            }
            out
        }
        KernelSpec::Exponential { .. } => {
            // Spot series is U/(ℓΔ); undo the normalization.
            let norm = ell as f64 * counts.bin_width();
            spot_series_exponential(counts, ell)
                .expect("bandwidth validated")
                .into_iter()
                .map(|v| v * norm)
                .collect()
        }
    }
}

/// Anchor grid indices for the variance sum, newest first.
fn anchor_indices(m: usize, config: &TestConfig) -> Vec<usize> {
    match config.avar_scheme {
        AvarScheme::Overlapping => (0..config.k_n).map(|j| m - j).collect(),
        AvarScheme::Nonoverlapping => (0..config.k_n).map(|j| m - 2 * j * config.ell).collect(),
    }
}

fn check_warmup(counts: &CountSeries, t: f64, config: &TestConfig) -> Result<usize> {
    config.validate()?;
    let m = counts.grid_index(t)?;
    let needed = config.warmup_bins();
    if m < needed {
        return Err(Error::Boundary {
            t,
            needed,
            available: m,
        });
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Backward spot-estimate increment `λ̂_t − λ̂_{t−δ}` in events/second.
pub fn nabla_lambda(counts: &CountSeries, t: f64, ell: usize, kernel: &KernelSpec) -> Result<f64> {
    let config = TestConfig {
        ell,
        k_n: 2, // unused by the increment; satisfies validation
        kernel: *kernel,
        avar_scheme: AvarScheme::Overlapping,
    };
    config.validate()?;
    let m = counts.grid_index(t)?;
    if m < 2 * ell {
        return Err(Error::Boundary {
            t,
            needed: 2 * ell,
            available: m,
        });
    }
    let u = window_counts(counts, &config);
    let norm = ell as f64 * counts.bin_width();
    Ok((u[m - 1] - u[m - 1 - ell]) / norm)
}

/// Observed asymptotic variance, scaled by the rate factor `rho`:
/// `(ρ/K) Σ_j (∇λ̂ at anchor j)²` with `∇λ̂` in events/second.
pub fn observed_avar(counts: &CountSeries, t: f64, config: &TestConfig, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Parameter("rho must be positive".into()));
    }
    Ok(rho * unscaled_avar(counts, t, config)? / (config.ell as f64 * counts.bin_width()).powi(2))
}

/// Mean squared anchor count-difference `(1/K) Σ_j D_j²` — the form in
/// which the variance enters the statistic, with the rate factor cancelled.
pub fn unscaled_avar(counts: &CountSeries, t: f64, config: &TestConfig) -> Result<f64> {
    let m = check_warmup(counts, t, config)?;
    let u = window_counts(counts, config);
    let ell = config.ell;
    let sum: f64 = anchor_indices(m, config)
        .iter()
        .map(|&a| {
            let d = u[a - 1] - u[a - 1 - ell];
            d * d
        })
        .sum();
    Ok(sum / config.k_n as f64)
}

/// Evaluate the burst statistic at `t`.
pub fn ib_statistic(counts: &CountSeries, t: f64, config: &TestConfig) -> Result<TestResult> {
    let m = check_warmup(counts, t, config)?;
    let u = window_counts(counts, config);
    let ell = config.ell;
    let numerator = u[m - 1] - u[m - 1 - ell];
    let avar_hat: f64 = anchor_indices(m, config)
        .iter()
        .map(|&a| {
            let d = u[a - 1] - u[a - 1 - ell];
            d * d
        })
        .sum::<f64>()
        / config.k_n as f64;
    let (statistic, degenerate) = if avar_hat > 0.0 {
        (numerator / avar_hat.sqrt(), false)
    } else {
        (0.0, true)
    };
    Ok(TestResult {
        t,
        numerator,
        avar_hat,
        statistic,
        degenerate,
        config: *config,
    })
}

/// Greedy selection of the `top_n` largest well-separated local maxima.
///
/// A point is a local maximum if it is at least as large as its neighbors
/// (one-sided at the series ends). Selection repeatedly takes the largest
/// remaining maximum (ties to the earliest time) and suppresses everything
/// within `min_separation` of it.
pub fn select_candidates(
    spot_series: &[(f64, f64)],
    top_n: usize,
    min_separation: f64,
) -> CandidateSet {
    let n = spot_series.len();
    let mut maxima: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let v = spot_series[i].1;
        let left_ok = i == 0 || spot_series[i - 1].1 <= v;
        let right_ok = i + 1 == n || spot_series[i + 1].1 <= v;
        if left_ok && right_ok {
            maxima.push(spot_series[i]);
        }
    }
    maxima.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.partial_cmp(&b.0).unwrap()));
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (t, v) in maxima {
        if times.len() >= top_n {
            break;
        }
        if times.iter().all(|&s: &f64| (s - t).abs() >= min_separation) {
            times.push(t);
            values.push(v);
        }
    }
    CandidateSet {
        times,
        values,
        min_separation,
    }
}

/// Threshold for `m` simultaneous one-sided tests at familywise level ς.
pub fn critical_value(method: CriticalMethod, level: f64, m: usize) -> Result<CriticalValue> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Parameter("level must lie in (0, 1)".into()));
    }
    if m < 1 {
        return Err(Error::Parameter("m must be at least 1".into()));
    }
    let value = match method {
        CriticalMethod::GaussianQuantile => normal_quantile(1.0 - level),
        CriticalMethod::Bonferroni => normal_quantile(1.0 - level / m as f64),
        CriticalMethod::Gumbel => gumbel_value(level, m)?,
        CriticalMethod::Average => {
            (normal_quantile(1.0 - level / m as f64) + gumbel_value(level, m)?) / 2.0
        }
    };
    Ok(CriticalValue {
        method,
        level,
        m,
        value,
    })
}

/// Extreme-value threshold `a_m + b_m · F_ξ⁻¹(1 − ς)` for the maximum of
/// `m` standard normals, with the classical norming constants.
fn gumbel_value(level: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Parameter(
            "gumbel calibration needs m >= 2 tests".into(),
        ));
    }
    let log_m = (m as f64).ln();
    let root = (2.0 * log_m).sqrt();
    let a_m = root - (std::f64::consts::PI.ln() + log_m.ln()) / (2.0 * root);
    let b_m = 1.0 / root;
    let gumbel_q = -(-(1.0 - level).ln()).ln();
    Ok(a_m + b_m * gumbel_q)
}

/// Full single-day pipeline: deflate, scan the spot series for candidates,
/// evaluate the statistic at each, and keep exceedances of `threshold`.
///
/// Candidates inside the warm-up (or otherwise untestable) are reported in
/// `skipped` rather than dropped silently.
pub fn detect_day(
    counts: &CountSeries,
    seasonal: &SeasonalCurve,
    config: &TestConfig,
    threshold: f64,
) -> Result<DayDetections> {
    detect_day_with(counts, seasonal, config, threshold, 20, 300.0)
}

/// [`detect_day`] with explicit candidate-scan parameters.
pub fn detect_day_with(
    counts: &CountSeries,
    seasonal: &SeasonalCurve,
    config: &TestConfig,
    threshold: f64,
    top_candidates: usize,
    min_separation: f64,
) -> Result<DayDetections> {
    config.validate()?;
    let deflated = deflate(counts, seasonal)?;
    let dt = deflated.bin_width();
    let spot = spot_series_exponential(&deflated, config.ell)?;
    let series: Vec<(f64, f64)> = spot
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 * dt, v))
        .collect();
    let candidates = select_candidates(&series, top_candidates, min_separation);
    let mut detections = Vec::new();
    let mut skipped = Vec::new();
    for &t in &candidates.times {
        match ib_statistic(&deflated, t, config) {
            Ok(result) => {
                if result.statistic > threshold {
                    detections.push(result);
                }
            }
            Err(e @ Error::Boundary { .. }) => skipped.push((t, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    detections.sort_by(|a, b| b.statistic.partial_cmp(&a.statistic).unwrap());
    Ok(DayDetections {
        detections,
        skipped,
    })
}

/// The statistic at every grid point past the warm-up, `None` before it;
/// entry `i` corresponds to `t = (i+1)Δ`.
///
/// Uses a rolling sum of squared anchor differences, so a whole day is
/// O(length) instead of O(length · K). Overlapping anchors only — the
/// rolling identity does not apply to the nonoverlapping layout.
pub fn statistic_series(counts: &CountSeries, config: &TestConfig) -> Result<Vec<Option<f64>>> {
    config.validate()?;
    if config.avar_scheme != AvarScheme::Overlapping {
        return Err(Error::Config(
            "statistic_series supports the overlapping scheme only".into(),
        ));
    }
    let u = window_counts(counts, config);
    let ell = config.ell;
    let k_n = config.k_n;
    let warmup = config.warmup_bins();
    // d[i] = D at grid index m = i + 1.
    let d: Vec<f64> = (0..u.len())
        .map(|i| {
            if i >= 2 * ell && !u[i].is_nan() && !u[i - ell].is_nan() {
                u[i] - u[i - ell]
            } else {
                f64::NAN
            }
        })
        .collect();
    let mut out = vec![None; u.len()];
    let mut rolling = 0.0f64;
    for i in 0..d.len() {
        if !d[i].is_nan() {
            rolling += d[i] * d[i];
        }
        if i >= k_n && !d[i - k_n].is_nan() {
            rolling -= d[i - k_n] * d[i - k_n];
        }
        let m = i + 1;
        if m >= warmup {
            let avar = (rolling / k_n as f64).max(0.0);
            out[i] = Some(if avar > 0.0 { d[i] / avar.sqrt() } else { 0.0 });
        }
    }
    Ok(out)
}
