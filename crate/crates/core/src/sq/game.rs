//! The adversarial-oracle distinguishing game.
//!
//! The oracle answers every query with the global mean `φ̄` over all keys. A
//! key is ruled out once some answer is more than `τ` away from its own
//! `φ[f]`. Chebyshev plus the variance bound caps each query's ruled-out
//! fraction at `2η/τ²`.

use super::ensemble::{FamilyEnsemble, QueryTable};
use crate::rational::{self, int, rat, Rational};
use crate::rng;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct GameState<'a> {
    ensemble: &'a FamilyEnsemble,
    surviving: Vec<bool>,
    queries_made: u64,
    tau: Rational,
    eta: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Response {
    #[serde(with = "rational::serde_str")]
    pub answer: Rational,
    pub answer_f64: f64,
    /// Keys anywhere in the family with `|φ[f] − φ̄| > τ`.
    pub far_keys: u64,
    pub newly_ruled_out: u64,
    pub surviving: u64,
    #[serde(with = "rational::serde_str")]
    pub ruled_out_fraction: Rational,
    #[serde(with = "rational::serde_str")]
    pub per_query_bound: Rational,
    #[serde(with = "rational::serde_str")]
    pub cumulative_bound: Rational,
    pub per_query_ok: bool,
    pub cumulative_ok: bool,
}

impl<'a> GameState<'a> {
    pub fn new(ensemble: &'a FamilyEnsemble, tau: Rational, eta_actual: Rational) -> Self {
        Self {
            surviving: vec![true; ensemble.key_count()],
            ensemble,
            queries_made: 0,
            tau,
            eta: eta_actual,
        }
    }

    pub fn surviving_count(&self) -> u64 {
        self.surviving.iter().filter(|&&s| s).count() as u64
    }

    pub fn surviving_keys(&self) -> Vec<usize> {
        (0..self.surviving.len()).filter(|&k| self.surviving[k]).collect()
    }

    pub fn queries_made(&self) -> u64 {
        self.queries_made
    }

    pub fn ruled_out_fraction(&self) -> Rational {
        let total = self.surviving.len() as i64;
        rat(total - self.surviving_count() as i64, total)
    }

    /// `2η/τ²`.
    pub fn per_query_bound(&self) -> Rational {
        int(2) * &self.eta / (&self.tau * &self.tau)
    }

    pub fn respond(&mut self, query: &QueryTable) -> Response {
        let phi = query.expectations(self.ensemble);
        let total = int(phi.len() as i64);
        let mean = phi.iter().fold(Rational::zero(), |a, v| a + v) / &total;
        let mut far = 0u64;
        let mut newly = 0u64;
        for (k, v) in phi.iter().enumerate() {
            if (v - &mean).abs() > self.tau {
                far += 1;
                if self.surviving[k] {
                    self.surviving[k] = false;
                    newly += 1;
                }
            }
        }
        self.queries_made += 1;
        let per_query_bound = self.per_query_bound();
        let cumulative_bound = &per_query_bound * int(self.queries_made as i64);
        let ruled_out_fraction = self.ruled_out_fraction();
        Response {
            answer_f64: rational::to_f64(&mean),
            answer: mean,
            far_keys: far,
            newly_ruled_out: newly,
            surviving: self.surviving_count(),
            per_query_ok: rat(far as i64, 1) / &total <= per_query_bound,
            cumulative_ok: ruled_out_fraction <= cumulative_bound,
            ruled_out_fraction,
            per_query_bound,
            cumulative_bound,
        }
    }
}

/// Scripted learners. Answers carry no information under this oracle, so the
/// only adaptivity is the choice of which surviving key to target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Uniform random tables on a grid of step `1/64`.
    Random,
    /// `φ(x, y) = s(x)·(2y − 1)` with a random sign pattern `s`.
    Correlation,
    /// `φ(x, y) = ±1` as `y` agrees with a surviving key at `x`.
    Agreement,
    /// Cycles through the three above.
    Mixed,
}

impl Strategy {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "random" => Some(Self::Random),
            "correlation" => Some(Self::Correlation),
            "agreement" => Some(Self::Agreement),
            "mixed" => Some(Self::Mixed),
            _ => None,
        }
    }

    fn pick(self, i: u64) -> Self {
        match self {
            Self::Mixed => [Self::Random, Self::Correlation, Self::Agreement][(i % 3) as usize],
            s => s,
        }
    }

    pub fn next_query(self, state: &GameState<'_>, seed: u64, i: u64) -> QueryTable {
        let e = state.ensemble;
        let mut r = rng::stream(seed, rng::ids::GAME, i);
        match self.pick(i) {
            Self::Random | Self::Mixed => QueryTable::random(e, 64, seed, i),
            Self::Correlation => {
                let values = (0..e.domain_size())
                    .map(|_| {
                        let s = if r.random::<bool>() { int(1) } else { int(-1) };
                        e.labels.iter().map(|y| &s * (int(2) * y - int(1))).collect()
                    })
                    .collect();
                QueryTable::from_rationals(values).expect("labels lie in [0, 1]")
            }
            Self::Agreement => {
                let alive = state.surviving_keys();
                let target = if alive.is_empty() { 0 } else { alive[r.random_range(0..alive.len())] };
                let m = &e.members[target];
                let values = (0..e.domain_size())
                    .map(|x| (0..e.labels.len()).map(|l| if l == m[x] as usize { 1 } else { -1 }).collect())
                    .collect();
                QueryTable { den: 1, values }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub ensemble: String,
    pub keys: usize,
    pub strategy: Strategy,
    pub queries: u64,
    #[serde(with = "rational::serde_str")]
    pub tau: Rational,
    #[serde(with = "rational::serde_str")]
    pub eta_actual: Rational,
    pub rounds: Vec<Response>,
    #[serde(with = "rational::serde_str")]
    pub final_surviving_fraction: Rational,
    pub violations: u64,
}

pub fn run_game(
    ensemble: &FamilyEnsemble,
    strategy: Strategy,
    queries: u64,
    tau: &Rational,
    eta_actual: &Rational,
    seed: u64,
) -> Transcript {
    let mut state = GameState::new(ensemble, tau.clone(), eta_actual.clone());
    let mut rounds = Vec::with_capacity(queries as usize);
    for i in 0..queries {
        let q = strategy.next_query(&state, seed, i);
        rounds.push(state.respond(&q));
    }
    let violations = rounds
        .iter()
        .filter(|r| !r.per_query_ok || !r.cumulative_ok)
        .count() as u64;
    Transcript {
        ensemble: ensemble.name.clone(),
        keys: ensemble.key_count(),
        strategy,
        queries,
        tau: tau.clone(),
        eta_actual: eta_actual.clone(),
        rounds,
        final_surviving_fraction: Rational::from_integer(1.into()) - state.ruled_out_fraction(),
        violations,
    }
}
