//! Burst-versus-jump discrimination at a known change point θ and
//! estimation of the explosion rate α.
//!
//! The discriminating quantity is the change-of-frequency ratio
//! `λ̃_θ(kδ)/λ̃_θ(δ)` of two-sided estimates at nested window sizes: under a
//! singular burst it concentrates near `k^{−α}`, under a finite jump near 1.
//! The standardized version (`jump_z`) tests the jump null one-sidedly; the
//! log-ratio slope across a k-grid estimates α.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{spot_two_sided, CountSeries};
use crate::stats::{normal_quantile, ols_line, through_origin_slope};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Decision of the jump test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BurstLike,
    JumpLike,
    Inconclusive,
}

/// Ratio screen outcome at one change point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioResult {
    pub theta: f64,
    pub k: f64,
    /// `λ̃_θ(kδ)/λ̃_θ(δ)`; NaN when the δ-window is empty.
    pub ratio: f64,
    /// Standardized distance of the ratio from its jump-null limit 1.
    pub jump_z: f64,
    pub verdict: Verdict,
}

/// How α̂ was fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    TwoPoint,
    Regression,
}

/// Intercept handling of the regression fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterceptMode {
    /// Regress `log λ̃(kδ) − log λ̃(δ)` on `log k` with no intercept.
    ThroughOrigin,
    /// Ordinary least squares of `log λ̃(kδ)` on `log k`.
    Free,
}

/// Explosion-rate estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha_hat: f64,
    pub k_grid: Vec<f64>,
    pub fit: FitMode,
    pub intercept_mode: InterceptMode,
}

/// Settings for [`classify_event`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Half-window ℓ in bins (δ = ℓΔ).
    pub ell: usize,
    /// Ratio-screen window multiplier.
    pub k: f64,
    /// Window multipliers for the α regression.
    pub k_grid: Vec<f64>,
    /// One-sided level of the jump test.
    pub level: f64,
    pub intercept_mode: InterceptMode,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            ell: 300,
            k: 2.0,
            k_grid: vec![1.0, 2.0, 3.0, 5.0, 10.0],
            level: 0.01,
            intercept_mode: InterceptMode::Free,
        }
    }
}

impl ClassifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ell < 1 {
            return Err(Error::Config("ell must be at least 1".into()));
        }
        if !(self.k > 1.0) {
            return Err(Error::Config("ratio multiplier k must exceed 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config("level must lie in (0, 1)".into()));
        }
        if self.k_grid.len() < 2 || self.k_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("k_grid must be strictly increasing, length >= 2".into()));
        }
        if self.k_grid[0] < 1.0 {
            return Err(Error::Config("k_grid entries must be >= 1".into()));
        }
        Ok(())
    }
}

/// Bundle returned by [`classify_event`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub ratio: RatioResult,
    /// Absent when too few usable grid points survive the log transform.
    pub alpha: Option<AlphaEstimate>,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Change-of-frequency ratio `λ̃_θ(kδ)/λ̃_θ(δ)`; NaN if the δ-window is
/// empty.
pub fn ratio_statistic(counts: &CountSeries, theta: f64, ell: usize, k: f64) -> Result<f64> {
    let wide = spot_two_sided(counts, theta, ell, k)?.value;
    let narrow = spot_two_sided(counts, theta, ell, 1.0)?.value;
    if narrow == 0.0 {
        Ok(f64::NAN)
    } else {
        Ok(wide / narrow)
    }
}

/// Two-point explosion-rate estimate `−log(λ̃(kδ)/λ̃(δ)) / log k`.
pub fn estimate_alpha_two_point(
    counts: &CountSeries,
    theta: f64,
    ell: usize,
    k: f64,
) -> Result<AlphaEstimate> {
    if !(k > 1.0) {
        return Err(Error::Parameter("two-point k must exceed 1".into()));
    }
    let ratio = ratio_statistic(counts, theta, ell, k)?;
    if !(ratio > 0.0) {
        return Err(Error::Estimation(
            "two-point alpha needs a positive ratio".into(),
        ));
    }
    Ok(AlphaEstimate {
        alpha_hat: -ratio.ln() / k.ln(),
        k_grid: vec![1.0, k],
        fit: FitMode::TwoPoint,
        intercept_mode: InterceptMode::ThroughOrigin,
    })
}

/// Regression explosion-rate estimate: α̂ is minus the slope of
/// `log λ̃_θ(kδ)` on `log k` over the grid. Grid points whose two-sided
/// estimate is nonpositive are skipped; fewer than two usable points is an
/// estimation error.
pub fn estimate_alpha(
    counts: &CountSeries,
    theta: f64,
    ell: usize,
    k_grid: &[f64],
    intercept_mode: InterceptMode,
) -> Result<AlphaEstimate> {
    if k_grid.len() < 2 {
        return Err(Error::Parameter("k_grid needs at least two entries".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut used = Vec::new();
    for &k in k_grid {
        let v = spot_two_sided(counts, theta, ell, k)?.value;
        if v > 0.0 {
            xs.push(k.ln());
            ys.push(v.ln());
            used.push(k);
        }
    }
    if xs.len() < 2 {
        return Err(Error::Estimation(
            "fewer than two positive two-sided estimates on the k-grid".into(),
        ));
    }
    let slope = match intercept_mode {
        InterceptMode::Free => ols_line(&xs, &ys)
            .ok_or_else(|| Error::Estimation("degenerate k-grid".into()))?
            .0,
        InterceptMode::ThroughOrigin => {
            // Anchor at the δ-window: y_k = log λ̃(kδ) − log λ̃(δ).
            let base = spot_two_sided(counts, theta, ell, 1.0)?.value;
            if !(base > 0.0) {
                return Err(Error::Estimation("empty anchor window".into()));
            }
            let shifted: Vec<f64> = ys.iter().map(|y| y - base.ln()).collect();
            through_origin_slope(&xs, &shifted)
                .ok_or_else(|| Error::Estimation("degenerate k-grid".into()))?
        }
    };
    Ok(AlphaEstimate {
        alpha_hat: -slope,
        k_grid: used,
        fit: FitMode::Regression,
        intercept_mode,
    })
}

/// One-sided test of the jump null at level ς.
///
/// Under a finite jump the standardized ratio is asymptotically standard
/// normal with variance `avar_k = m̄⁻¹(1/2 + 1/(2k) − (k m̄)⁻¹)`, where `m̄`
/// is the two-sided δ-window mean in counts per bin; under a burst it
/// diverges to −∞. The latent normalization is replaced by the square root
/// of the observed δ-window count, its feasible analog.
pub fn jump_test(counts: &CountSeries, theta: f64, ell: usize, k: f64, level: f64) -> Result<RatioResult> {
    if !(k > 1.0) {
        return Err(Error::Parameter("jump test needs k > 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Parameter("level must lie in (0, 1)".into()));
    }
    let narrow = spot_two_sided(counts, theta, ell, 1.0)?;
    let wide = spot_two_sided(counts, theta, ell, k)?;
    let dt = counts.bin_width();
    if narrow.value == 0.0 {
        return Ok(RatioResult {
            theta,
            k,
            ratio: f64::NAN,
            jump_z: f64::NAN,
            verdict: Verdict::Inconclusive,
        });
    }
    let ratio = wide.value / narrow.value;
    // Exactly flat windows carry no sampling variability to standardize.
    if is_window_flat(counts, theta, ell, k)? {
        return Ok(RatioResult {
            theta,
            k,
            ratio,
            jump_z: f64::NAN,
            verdict: Verdict::Inconclusive,
        });
    }
    let m_bar = narrow.value * dt; // counts per bin
    let avar_k = (0.5 + 0.5 / k - 1.0 / (k * m_bar)) / m_bar;
    if !(avar_k > 0.0) {
        return Ok(RatioResult {
            theta,
            k,
            ratio,
            jump_z: f64::NAN,
            verdict: Verdict::Inconclusive,
        });
    }
    let window_count = narrow.value * 2.0 * ell as f64 * dt;
    let jump_z = window_count.sqrt() * (ratio - 1.0) / avar_k.sqrt();
    let z_crit = normal_quantile(1.0 - level);
    let verdict = if jump_z < -z_crit {
        Verdict::BurstLike
    } else {
        Verdict::JumpLike
    };
    Ok(RatioResult {
        theta,
        k,
        ratio,
        jump_z,
        verdict,
    })
}

fn is_window_flat(counts: &CountSeries, theta: f64, ell: usize, k: f64) -> Result<bool> {
    let m = counts.grid_index(theta)?;
    let d = (k * ell as f64).floor() as usize;
    let window = &counts.counts()[m - d..m + d];
    Ok(window.windows(2).all(|w| w[0] == w[1]))
}

/// Full classification bundle: ratio screen, jump test, and α estimate.
pub fn classify_event(
    counts: &CountSeries,
    theta: f64,
    config: &ClassifyConfig,
) -> Result<Classification> {
    config.validate()?;
    let ratio = jump_test(counts, theta, config.ell, config.k, config.level)?;
    let alpha = match estimate_alpha(
        counts,
        theta,
        config.ell,
        &config.k_grid,
        config.intercept_mode,
    ) {
        Ok(a) => Some(a),
        Err(Error::Estimation(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(Classification { ratio, alpha })
}
