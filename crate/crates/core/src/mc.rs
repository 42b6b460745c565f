//! Monte Carlo harness: rejection-rate tables for the burst statistic.
//!
//! One *scenario* is a (burst fraction c, explosion rate α) pair — c = 0 is
//! the null. Each replication simulates a full session, deflates it with a
//! seasonal curve estimated from a disjoint pool of null replicas, evaluates
//! the statistic at the (randomly placed) burst time, and compares it to the
//! requested Gaussian quantiles across all bandwidth/kernel combinations.
//!
//! Replications are independent tasks keyed by derived seeds, so the table
//! is bit-identical whether it is computed sequentially or on a thread pool.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{bin_counts, deflate, estimate_seasonality, CountSeries, KernelSpec, SeasonalCurve};
use crate::ibtest::{ib_statistic, AvarScheme, TestConfig};
use crate::seed::{self, COMPONENT_AUX};
use crate::sim::{
    calibrate_burst_sigma, compose_scenario, BaseProcess, BurstParams, CirParams, DiurnalParams,
    HawkesParams, ScenarioConfig, SessionSpec,
};
use crate::stats::{binomial_se, normal_quantile};

/// Scenario-counter namespace for the seasonal pool, kept away from the
/// experiment scenarios.
const SEASONAL_SCENARIO: u64 = u64::MAX;

// ---------------------------------------------------------------------------
// Plan and table types
// ---------------------------------------------------------------------------

/// Which stationary component drives the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DgpKind {
    Poisson,
    Cir,
    Hawkes,
}

impl DgpKind {
    fn base(self) -> BaseProcess {
        match self {
            DgpKind::Poisson => BaseProcess::Poisson { rate: 1.0 },
            DgpKind::Cir => BaseProcess::Cir(CirParams::default()),
            DgpKind::Hawkes => BaseProcess::Hawkes(HawkesParams::default()),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DgpKind::Poisson => "poisson",
            DgpKind::Cir => "cir",
            DgpKind::Hawkes => "hawkes",
        }
    }
}

fn default_seasonal_days() -> usize {
    518
}

fn default_k_factor() -> usize {
    10
}

fn default_rate_scale() -> u32 {
    1
}

fn default_grid_step() -> f64 {
    1.0
}

fn default_half_width() -> f64 {
    300.0
}

/// Full experiment description; serializable as the `mc-table` plan file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub dgp: DgpKind,
    /// Burst fractions c; include 0 for the null row.
    pub burst_fractions: Vec<f64>,
    /// Explosion rates α crossed with every positive c.
    pub alphas: Vec<f64>,
    /// Bandwidths ℓ in one-second bins.
    pub bandwidths: Vec<usize>,
    pub kernels: Vec<KernelSpec>,
    /// Gaussian quantile levels, e.g. 0.95.
    pub quantiles: Vec<f64>,
    pub replications: usize,
    /// Size of the disjoint null pool used for the seasonal curve. Small
    /// values are fine for smoke runs; tight table matching needs the full
    /// default pool.
    #[serde(default = "default_seasonal_days")]
    pub seasonal_estimation_days: usize,
    /// Variance sample size as a multiple of ℓ (K = factor·ℓ).
    #[serde(default = "default_k_factor")]
    pub k_factor: usize,
    #[serde(default = "default_rate_scale")]
    pub rate_scale: u32,
    /// Simulation grid for latent paths, in seconds.
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    /// Burst support half-width in seconds.
    #[serde(default = "default_half_width")]
    pub burst_half_width: f64,
    pub root_seed: u64,
}

impl ExperimentPlan {
    /// Reference plan skeleton with the standard grids.
    pub fn reference(dgp: DgpKind, replications: usize, root_seed: u64) -> Self {
        Self {
            dgp,
            burst_fractions: vec![0.0, 0.025, 0.05, 0.1],
            alphas: vec![0.25, 0.5, 0.75],
            bandwidths: vec![60, 300, 600],
            kernels: vec![KernelSpec::Indicator, KernelSpec::exponential()],
            quantiles: vec![0.95, 0.99, 0.995],
            replications,
            seasonal_estimation_days: default_seasonal_days(),
            k_factor: default_k_factor(),
            rate_scale: 1,
            grid_step: default_grid_step(),
            burst_half_width: default_half_width(),
            root_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.burst_fractions.is_empty()
            || self.bandwidths.is_empty()
            || self.kernels.is_empty()
            || self.quantiles.is_empty()
        {
            return Err(Error::Config("plan grids must be nonempty".into()));
        }
        if self.burst_fractions.iter().any(|c| !(*c >= 0.0 && *c < 1.0)) {
            return Err(Error::Config("burst fractions must lie in [0, 1)".into()));
        }
        if self.burst_fractions.iter().any(|c| *c > 0.0) && self.alphas.is_empty() {
            return Err(Error::Config("positive burst fractions need alphas".into()));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::Config("alphas must lie in (0, 1)".into()));
        }
        if self.quantiles.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return Err(Error::Config("quantiles must lie in (0, 1)".into()));
        }
        if self.seasonal_estimation_days < 2 {
            return Err(Error::Config("seasonal pool needs at least 2 days".into()));
        }
        if self.k_factor < 1 {
            return Err(Error::Config("k_factor must be at least 1".into()));
        }
        for &ell in &self.bandwidths {
            TestConfig::reference(ell, KernelSpec::Indicator).validate()?;
        }
        Ok(())
    }

    fn session(&self) -> Result<SessionSpec> {
        SessionSpec::new(23_400.0, self.grid_step, self.rate_scale)
    }

    /// (c, α) scenarios; the null collapses to a single entry.
    fn scenarios(&self) -> Vec<(f64, Option<f64>)> {
        let mut out = Vec::new();
        for &c in &self.burst_fractions {
            if c == 0.0 {
                out.push((0.0, None));
            } else {
                for &a in &self.alphas {
                    out.push((c, Some(a)));
                }
            }
        }
        out
    }

    /// Earliest admissible evaluation time given every bandwidth's warm-up.
    fn tau_lower_bound(&self, horizon: f64) -> f64 {
        let warmup = self
            .bandwidths
            .iter()
            .map(|&ell| {
                TestConfig {
                    ell,
                    k_n: self.k_factor * ell,
                    kernel: KernelSpec::Indicator,
                    avar_scheme: AvarScheme::Overlapping,
                }
                .warmup_bins() as f64
            })
            .fold(0.0, f64::max);
        // Keep the whole burst support clear of the session edges too.
        (0.05 * horizon).max(warmup + 1.0).max(self.burst_half_width + 1.0)
    }
}

/// One aggregated cell of the rejection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub dgp: DgpKind,
    pub c: f64,
    pub alpha: Option<f64>,
    pub ell: usize,
    pub kernel: KernelSpec,
    pub quantile: f64,
    pub rate: f64,
    pub se: f64,
    pub replications: usize,
}

/// Rejection rates for every plan cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionTable {
    pub cells: Vec<TableCell>,
}

impl RejectionTable {
    pub fn get(
        &self,
        c: f64,
        alpha: Option<f64>,
        ell: usize,
        kernel: &KernelSpec,
        quantile: f64,
    ) -> Option<&TableCell> {
        self.cells.iter().find(|cell| {
            cell.c == c
                && cell.alpha == alpha
                && cell.ell == ell
                && cell.kernel == *kernel
                && cell.quantile == quantile
        })
    }
}

/// Output layout of [`format_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableLayout {
    /// Panels of percentages with one decimal.
    Paper,
    /// One CSV row per cell with standard errors.
    LongCsv,
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

/// Seasonal curve from a pool of null replicas of the plan's DGP.
pub fn seasonal_pool_curve(plan: &ExperimentPlan) -> Result<SeasonalCurve> {
    let spec = plan.session()?;
    let cfg = null_config(plan);
    let simulate = |rep: u64| -> Result<CountSeries> {
        let day_seed = seed::derive_seed(plan.root_seed, SEASONAL_SCENARIO, rep, 0);
        let (events, _) = compose_scenario(&cfg, &spec, day_seed)?;
        bin_counts(&events, 1.0, spec.horizon_seconds)
    };
    let reps: Vec<u64> = (0..plan.seasonal_estimation_days as u64).collect();
    #[cfg(feature = "parallel")]
    let days: Result<Vec<CountSeries>> = reps.par_iter().map(|&r| simulate(r)).collect();
    #[cfg(not(feature = "parallel"))]
    let days: Result<Vec<CountSeries>> = reps.iter().map(|&r| simulate(r)).collect();
    estimate_seasonality(&days?)
}

fn null_config(plan: &ExperimentPlan) -> ScenarioConfig {
    ScenarioConfig {
        base: plan.dgp.base(),
        diurnal: Some(DiurnalParams::default()),
        burst: None,
        jump: None,
    }
}

/// Exceedance indicators of one replication, aligned with the cell order
/// `(ell × kernel × quantile)`.
fn run_replication(
    plan: &ExperimentPlan,
    spec: &SessionSpec,
    seasonal: &SeasonalCurve,
    thresholds: &[f64],
    scenario_id: u64,
    scenario: (f64, Option<f64>),
    rep: u64,
) -> Result<Vec<bool>> {
    let (c, alpha) = scenario;
    // Burst placement (drawn under the null too, to fix the evaluation
    // point at the same law).
    let aux_seed = seed::derive_seed(plan.root_seed, scenario_id, rep, COMPONENT_AUX);
    let mut aux = seed::rng(aux_seed);
    let lo = plan.tau_lower_bound(spec.horizon_seconds);
    let hi = 0.95 * spec.horizon_seconds;
    let tau = lo + rand::Rng::random::<f64>(&mut aux) * (hi - lo);

    let burst = if c > 0.0 {
        let a = alpha.expect("positive c implies alpha");
        Some(BurstParams {
            tau_ib: tau,
            alpha: a,
            sigma: calibrate_burst_sigma(c, a, plan.burst_half_width, spec.horizon_seconds),
            half_width: plan.burst_half_width,
        })
    } else {
        None
    };
    let cfg = ScenarioConfig {
        burst,
        ..null_config(plan)
    };
    let day_seed = seed::derive_seed(plan.root_seed, scenario_id, rep, 0);
    let (events, _) = compose_scenario(&cfg, spec, day_seed)?;
    let counts = bin_counts(&events, 1.0, spec.horizon_seconds)?;
    let deflated = deflate(&counts, seasonal)?;

    // Evaluate at the first grid point at or after τ.
    let t = tau.ceil();
    let mut hits = Vec::with_capacity(plan.bandwidths.len() * plan.kernels.len() * thresholds.len());
    for &ell in &plan.bandwidths {
        for kernel in &plan.kernels {
            let config = TestConfig {
                ell,
                k_n: plan.k_factor * ell,
                kernel: *kernel,
                avar_scheme: AvarScheme::Overlapping,
            };
            let stat = ib_statistic(&deflated, t, &config)?.statistic;
            for &z in thresholds {
                hits.push(stat > z);
            }
        }
    }
    Ok(hits)
}

/// Run the full plan on the rayon pool (or sequentially without the
/// `parallel` feature).
pub fn run_experiment(plan: &ExperimentPlan) -> Result<RejectionTable> {
    #[cfg(feature = "parallel")]
    {
        run_experiment_impl(plan, true)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_experiment_impl(plan, false)
    }
}

/// Sequential driver; identical output to [`run_experiment`].
pub fn run_experiment_seq(plan: &ExperimentPlan) -> Result<RejectionTable> {
    run_experiment_impl(plan, false)
}

fn run_experiment_impl(plan: &ExperimentPlan, parallel: bool) -> Result<RejectionTable> {
    plan.validate()?;
    let spec = plan.session()?;
    let seasonal = seasonal_pool_curve(plan)?;
    let thresholds: Vec<f64> = plan.quantiles.iter().map(|&q| normal_quantile(q)).collect();
    let n_inner = plan.bandwidths.len() * plan.kernels.len() * thresholds.len();

    let mut cells = Vec::new();
    for (scenario_id, scenario) in plan.scenarios().into_iter().enumerate() {
        let reps: Vec<u64> = (0..plan.replications as u64).collect();
        let work = |&rep: &u64| {
            run_replication(
                plan,
                &spec,
                &seasonal,
                &thresholds,
                scenario_id as u64,
                scenario,
                rep,
            )
        };
        let results: Result<Vec<Vec<bool>>> = if parallel {
            #[cfg(feature = "parallel")]
            {
                reps.par_iter().map(work).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                reps.iter().map(work).collect()
            }
        } else {
            reps.iter().map(work).collect()
        };
        let results = results?;
        let mut counts = vec![0usize; n_inner];
        for hits in &results {
            for (acc, &h) in counts.iter_mut().zip(hits) {
                *acc += h as usize;
            }
        }
        let mut idx = 0;
        for &ell in &plan.bandwidths {
            for kernel in &plan.kernels {
                for &q in &plan.quantiles {
                    let rate = counts[idx] as f64 / plan.replications as f64;
                    cells.push(TableCell {
                        dgp: plan.dgp,
                        c: scenario.0,
                        alpha: scenario.1,
                        ell,
                        kernel: *kernel,
                        quantile: q,
                        rate,
                        se: binomial_se(rate, plan.replications),
                        replications: plan.replications,
                    });
                    idx += 1;
                }
            }
        }
    }
    Ok(RejectionTable { cells })
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

fn kernel_label(k: &KernelSpec) -> &'static str {
    match k {
        KernelSpec::Indicator => "indicator",
        KernelSpec::Exponential { .. } => "exponential",
    }
}

/// Render the table as a human-readable panel report or a long CSV.
pub fn format_table(table: &RejectionTable, layout: TableLayout) -> String {
    match layout {
        TableLayout::LongCsv => {
            let mut out = String::from("dgp,c,alpha,ell,kernel,quantile,rate,se,replications\n");
            for cell in &table.cells {
                let alpha = cell
                    .alpha
                    .map(|a| format!("{a}"))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{:.6},{:.6},{}\n",
                    cell.dgp.label(),
                    cell.c,
                    alpha,
                    cell.ell,
                    kernel_label(&cell.kernel),
                    cell.quantile,
                    cell.rate,
                    cell.se,
                    cell.replications
                ));
            }
            out
        }
        TableLayout::Paper => {
            let mut out = String::new();
            // Group cells by (c, alpha) panel, then by kernel row-block.
            let mut panels: Vec<(f64, Option<f64>)> = Vec::new();
            for cell in &table.cells {
                if !panels.contains(&(cell.c, cell.alpha)) {
                    panels.push((cell.c, cell.alpha));
                }
            }
            for (c, alpha) in panels {
                match alpha {
                    None => out.push_str(&format!("panel c = {c:.3} (null)\n")),
                    Some(a) => out.push_str(&format!("panel c = {c:.3}, alpha = {a:.2}\n")),
                }
                let mut rows: Vec<(usize, KernelSpec)> = Vec::new();
                let mut quantiles: Vec<f64> = Vec::new();
                for cell in table.cells.iter().filter(|x| x.c == c && x.alpha == alpha) {
                    if !rows.contains(&(cell.ell, cell.kernel)) {
                        rows.push((cell.ell, cell.kernel));
                    }
                    if !quantiles.contains(&cell.quantile) {
                        quantiles.push(cell.quantile);
                    }
                }
                out.push_str("  ell  kernel      ");
                for q in &quantiles {
                    out.push_str(&format!("  z_{q:<5}"));
                }
                out.push('\n');
                for (ell, kernel) in rows {
                    out.push_str(&format!("  {:<4} {:<12}", ell, kernel_label(&kernel)));
                    for &q in &quantiles {
                        let cell = table
                            .cells
                            .iter()
                            .find(|x| {
                                x.c == c
                                    && x.alpha == alpha
                                    && x.ell == ell
                                    && x.kernel == kernel
                                    && x.quantile == q
                            })
                            .expect("complete table");
                        out.push_str(&format!("  {:>6.1}", 100.0 * cell.rate));
                    }
                    out.push('\n');
                }
                out.push('\n');
            }
            out
        }
    }
}
