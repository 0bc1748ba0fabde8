use super::{continuous_monte_carlo, simulate_continuous_query, RealQuery, Result, SimulatorConfig, SqError, StatOracle};
use crate::families::CompressibleFn;
use crate::gadgets::GadgetParams;
use crate::lift::DistributionSpec;
use serde::Serialize;

/// A named real query `ψ(z, y)` with values in `[−1, 1]`.
pub struct NamedQuery {
    pub name: &'static str,
    pub psi: Box<RealQuery<'static>>,
}

/// Fixed test queries used by simulation trials. Needs `d ≥ 2`.
pub fn query_catalogue() -> Vec<NamedQuery> {
    vec![
        NamedQuery {
            name: "label_mean",
            psi: Box::new(|_, y| y),
        },
        NamedQuery {
            name: "label_tanh_z1",
            psi: Box::new(|z, y| (2.0 * y - 1.0) * z[0].tanh()),
        },
        NamedQuery {
            name: "label_sign_z1z2",
            psi: Box::new(|z, y| y * (z[0] * z[1]).signum()),
        },
        NamedQuery {
            name: "small_z1_label",
            psi: Box::new(|z, y| if z[0].abs() < 0.5 { y } else { -y }),
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub query: &'static str,
    pub simulated: f64,
    pub ground_truth: f64,
    pub error: f64,
    pub within_tau: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub query: &'static str,
    pub value: f64,
    pub half_width: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub tau: f64,
    pub config: SimulatorConfig,
    pub trials: u64,
    pub within_tau: u64,
    /// `⌈(1 − δ)·trials⌉`.
    pub required: u64,
    pub passed: bool,
    pub max_error: f64,
    pub boolean_queries: u64,
    pub ground_truth: Vec<GroundTruth>,
    pub results: Vec<TrialResult>,
}

/// Trial `t` simulates catalogue query `t mod K` with fresh half-samples and
/// compares it with an independent Monte Carlo estimate of the same query.
#[allow(clippy::too_many_arguments)]
pub fn run_simulation(
    cf: &CompressibleFn,
    params: &GadgetParams,
    dist: &DistributionSpec,
    oracle: &dyn StatOracle,
    config: &SimulatorConfig,
    tau: f64,
    trials: u64,
    ground_truth_samples: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if cf.d() < 2 {
        return Err(SqError::Invalid("simulation queries need d ≥ 2".into()));
    }
    let catalogue = query_catalogue();
    let ground_truth = catalogue
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let e = continuous_monte_carlo(&*q.psi, cf, params, dist, ground_truth_samples, seed, k as u64)?;
            Ok(GroundTruth {
                query: q.name,
                value: e.value,
                half_width: e.half_width,
                samples: e.samples,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let before = oracle.queries();
    let mut results = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let k = (t % catalogue.len() as u64) as usize;
        let simulated = simulate_continuous_query(&*catalogue[k].psi, oracle, params, dist, config, tau, seed, t)?;
        let error = (simulated - ground_truth[k].value).abs();
        results.push(TrialResult {
            trial: t,
            query: catalogue[k].name,
            simulated,
            ground_truth: ground_truth[k].value,
            error,
            within_tau: error <= tau,
        });
    }
    let within_tau = results.iter().filter(|r| r.within_tau).count() as u64;
    let required = ((1.0 - config.delta) * trials as f64).ceil() as u64;
    Ok(SimulationReport {
        tau,
        config: *config,
        trials,
        within_tau,
        required,
        passed: within_tau >= required,
        max_error: results.iter().map(|r| r.error).fold(0.0, f64::max),
        boolean_queries: oracle.queries() - before,
        ground_truth,
        results,
    })
}
