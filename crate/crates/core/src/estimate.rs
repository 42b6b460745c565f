//! Binning and kernel spot-intensity estimation.
//!
//! Event streams are binned into count series with the half-open `(a, b]`
//! convention (an event at exactly `t = 0` goes to the first bin). Spot
//! estimates are always reported in events/second, independent of the bin
//! width, so estimates at different `Δ` are directly comparable. The rate
//! scale `n` never enters: estimates describe the observed stream, which is
//! what makes the downstream test statistic free of `n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::EventStream;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Per-bin event counts of one session.
///
/// Counts are integers after binning and become real-valued after
/// seasonality deflation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    bin_width: f64,
    counts: Vec<f64>,
}

impl CountSeries {
    pub fn new(bin_width: f64, counts: Vec<f64>) -> Result<Self> {
        if !(bin_width > 0.0) {
            return Err(Error::Parameter("bin width must be positive".into()));
        }
        if counts.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Input("counts must be nonnegative".into()));
        }
        Ok(Self { bin_width, counts })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.bin_width * self.counts.len() as f64
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Grid index of a time that must sit on a bin boundary.
    pub(crate) fn grid_index(&self, t: f64) -> Result<usize> {
        let m = (t / self.bin_width).round();
        if (t - m * self.bin_width).abs() > 1e-9 * self.bin_width.max(1.0) {
            return Err(Error::Input(format!(
                "t = {t} is not aligned to the {}-second bin grid",
                self.bin_width
            )));
        }
        if m < 0.0 || m > self.counts.len() as f64 {
            return Err(Error::Input(format!("t = {t} lies outside the session")));
        }
        Ok(m as usize)
    }

    /// Sum of counts over bins `[lo, hi)`, i.e. the interval `(loΔ, hiΔ]`.
    pub(crate) fn window_sum(&self, lo: usize, hi: usize) -> f64 {
        self.counts[lo..hi].iter().sum()
    }
}

/// Bin events at a fixed width over `[0, horizon]`.
pub fn bin_counts(events: &EventStream, bin_width: f64, horizon: f64) -> Result<CountSeries> {
    if !(bin_width > 0.0) || !(horizon > 0.0) {
        return Err(Error::Parameter("bin width and horizon must be positive".into()));
    }
    let n_bins = (horizon / bin_width).ceil() as usize;
    let mut counts = vec![0.0f64; n_bins];
    for &t in events.times() {
        if t < 0.0 || t > horizon {
            return Err(Error::Input(format!("event at {t} outside [0, {horizon}]")));
        }
        // (iΔ, (i+1)Δ]: the right endpoint belongs to the bin; t = 0 is
        // folded into the first bin.
        let idx = if t <= 0.0 {
            0
        } else {
            ((t / bin_width).ceil() as usize - 1).min(n_bins - 1)
        };
        counts[idx] += 1.0;
    }
    CountSeries::new(bin_width, counts)
}

/// One-sided estimation kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Flat window `1_{[−1,0]}`.
    Indicator,
    /// `K(x) = e^x` for `x ≤ 0`; lags with weight below the tolerance are
    /// dropped, which keeps the weight deficit provably below it.
    Exponential { truncation_tolerance: f64 },
}

impl KernelSpec {
    pub fn exponential() -> Self {
        KernelSpec::Exponential {
            truncation_tolerance: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelSpec::Exponential {
            truncation_tolerance,
        } = self
        {
            if !(*truncation_tolerance > 0.0 && *truncation_tolerance < 1.0) {
                return Err(Error::Parameter(
                    "truncation tolerance must lie in (0, 1)".into(),
                ));
            }
        }
        Ok(())
    }

    /// Number of lags kept for bandwidth `ell`; the first dropped lag has
    /// weight `e^{−j/ℓ} < tolerance`.
    pub fn history_bins(&self, ell: usize) -> usize {
        match self {
            KernelSpec::Indicator => ell,
            KernelSpec::Exponential {
                truncation_tolerance,
            } => (ell as f64 * (1.0 / truncation_tolerance).ln()).ceil() as usize,
        }
    }
}

/// Which side of `t` an estimate looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Backward,
    Forward,
    TwoSided,
}

/// A spot-intensity estimate in events/second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotEstimate {
    pub t: f64,
    pub value: f64,
    pub bandwidth_bins: usize,
    pub side: Side,
    /// Window multiplier of the two-sided estimator; `None` otherwise.
    pub k_multiplier: Option<f64>,
}

/// Estimated intraday activity factors, one per bin, mean one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalCurve {
    factors: Vec<f64>,
}

impl SeasonalCurve {
    /// All-ones curve (no seasonality).
    pub fn flat(n_bins: usize) -> Self {
        Self {
            factors: vec![1.0; n_bins],
        }
    }

    pub fn from_factors(factors: Vec<f64>) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::Input("seasonal factors must be positive".into()));
        }
        let mean = factors.iter().sum::<f64>() / factors.len() as f64;
        if (mean - 1.0).abs() > 1e-9 {
            return Err(Error::Input(format!(
                "seasonal factors must have mean 1, got {mean}"
            )));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Spot estimators
// ---------------------------------------------------------------------------

/// Backward-looking spot estimate over the window `(t − ℓΔ, t]`.
pub fn spot_backward(
    counts: &CountSeries,
    t: f64,
    ell: usize,
    kernel: &KernelSpec,
) -> Result<SpotEstimate> {
    validate_bandwidth(ell)?;
    kernel.validate()?;
    let m = counts.grid_index(t)?;
    let needed = kernel.history_bins(ell);
    if m < needed {
        return Err(Error::Boundary {
            t,
            needed,
            available: m,
        });
    }
    let dt = counts.bin_width;
    let value = match kernel {
        KernelSpec::Indicator => counts.window_sum(m - ell, m) / (ell as f64 * dt),
        KernelSpec::Exponential { .. } => {
            let decay = (-1.0 / ell as f64).exp();
            let mut w = 1.0;
            let mut acc = 0.0;
            for j in 0..needed {
                acc += w * counts.counts[m - 1 - j];
                w *= decay;
            }
            acc / (ell as f64 * dt)
        }
    };
    Ok(SpotEstimate {
        t,
        value,
        bandwidth_bins: ell,
        side: Side::Backward,
        k_multiplier: None,
    })
}

/// Forward-looking spot estimate over the window `(t, t + ℓΔ]`.
pub fn spot_forward(
    counts: &CountSeries,
    t: f64,
    ell: usize,
    kernel: &KernelSpec,
) -> Result<SpotEstimate> {
    validate_bandwidth(ell)?;
    kernel.validate()?;
    let m = counts.grid_index(t)?;
    let needed = kernel.history_bins(ell);
    let available = counts.len() - m;
    if available < needed {
        return Err(Error::Boundary {
            t,
            needed,
            available,
        });
    }
    let dt = counts.bin_width;
    let value = match kernel {
        KernelSpec::Indicator => counts.window_sum(m, m + ell) / (ell as f64 * dt),
        KernelSpec::Exponential { .. } => {
            let decay = (-1.0 / ell as f64).exp();
            let mut w = 1.0;
            let mut acc = 0.0;
            for j in 0..needed {
                acc += w * counts.counts[m + j];
                w *= decay;
            }
            acc / (ell as f64 * dt)
        }
    };
    Ok(SpotEstimate {
        t,
        value,
        bandwidth_bins: ell,
        side: Side::Forward,
        k_multiplier: None,
    })
}

/// Two-sided estimate over `(θ − kδ, θ + kδ]` with `δ = ℓΔ`, indicator
/// weights (the change-point theory is stated for the flat window only).
pub fn spot_two_sided(counts: &CountSeries, theta: f64, ell: usize, k: f64) -> Result<SpotEstimate> {
    validate_bandwidth(ell)?;
    if !(k >= 1.0) {
        return Err(Error::Parameter("window multiplier k must be >= 1".into()));
    }
    let m = counts.grid_index(theta)?;
    let d = (k * ell as f64).floor() as usize;
    if m < d || counts.len() - m < d {
        return Err(Error::Boundary {
            t: theta,
            needed: d,
            available: m.min(counts.len() - m),
        });
    }
    let dt = counts.bin_width;
    let value = counts.window_sum(m - d, m + d) / (2.0 * d as f64 * dt);
    Ok(SpotEstimate {
        t: theta,
        value,
        bandwidth_bins: ell,
        side: Side::TwoSided,
        k_multiplier: Some(k),
    })
}

fn validate_bandwidth(ell: usize) -> Result<()> {
    if ell < 1 {
        return Err(Error::Parameter("bandwidth ell must be at least 1".into()));
    }
    Ok(())
}

/// Exponential-kernel backward spot series at every grid point `mΔ`,
/// `m = 1..=len`, using the full history (no truncation): the running sum
/// obeys `W_{m+1} = e^{−1/ℓ} W_m + c_m`.
///
/// Index `i` of the output is the estimate at `t = (i + 1)Δ`. Used for
/// whole-day candidate scans where recomputing truncated windows per point
/// would be quadratic.
pub fn spot_series_exponential(counts: &CountSeries, ell: usize) -> Result<Vec<f64>> {
    validate_bandwidth(ell)?;
    let decay = (-1.0 / ell as f64).exp();
    let norm = ell as f64 * counts.bin_width;
    let mut out = Vec::with_capacity(counts.len());
    let mut w = 0.0f64;
    for &c in &counts.counts {
        w += c; // newest bin enters with weight one
        out.push(w / norm);
        w *= decay;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Seasonality
// ---------------------------------------------------------------------------

/// Relative floor for dead bins, as a fraction of the grand mean.
const SEASONAL_FLOOR: f64 = 1e-4;

/// Cross-day per-bin averages, floored and normalized to mean one.
pub fn estimate_seasonality(days: &[CountSeries]) -> Result<SeasonalCurve> {
    if days.len() < 2 {
        return Err(Error::Input(
            "seasonality estimation needs at least 2 days".into(),
        ));
    }
    let n_bins = days[0].len();
    let width = days[0].bin_width;
    for d in days {
        if d.len() != n_bins || (d.bin_width - width).abs() > 1e-12 {
            return Err(Error::Input("all days must share the same bin grid".into()));
        }
    }
    let mut mean = vec![0.0f64; n_bins];
    for d in days {
        for (m, c) in mean.iter_mut().zip(&d.counts) {
            *m += c;
        }
    }
    let n_days = days.len() as f64;
    for m in &mut mean {
        *m /= n_days;
    }
    let grand = mean.iter().sum::<f64>() / n_bins as f64;
    if !(grand > 0.0) {
        return Err(Error::Estimation("all days are empty".into()));
    }
    let floor = SEASONAL_FLOOR * grand;
    for m in &mut mean {
        *m = m.max(floor);
    }
    let new_mean = mean.iter().sum::<f64>() / n_bins as f64;
    for m in &mut mean {
        *m /= new_mean;
    }
    SeasonalCurve::from_factors(mean)
}

/// Divide each bin by its seasonal factor.
pub fn deflate(counts: &CountSeries, curve: &SeasonalCurve) -> Result<CountSeries> {
    if counts.len() != curve.len() {
        return Err(Error::Input(format!(
            "count series has {} bins but seasonal curve has {}",
            counts.len(),
            curve.len()
        )));
    }
    let deflated = counts
        .counts
        .iter()
        .zip(curve.factors())
        .map(|(c, f)| c / f)
        .collect();
    CountSeries::new(counts.bin_width, deflated)
}
