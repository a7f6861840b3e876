use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{overlap, StateVector};

use super::ansatz::{AnsatzKernel, AnsatzSpec};
use super::backend::EnergyBackend;
use super::cost::DeflationState;
use super::optimize::{optimize_state, OptimizerConfig, StopReason};

/// Penalty weights: one value for every level or one per deflated state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Betas {
    Uniform(f64),
    PerState(Vec<f64>),
}

impl Default for Betas {
    fn default() -> Self {
        Betas::Uniform(3.0)
    }
}

impl Betas {
    /// Weights for the first `k - 1` states.
    pub fn expand(&self, k: usize) -> Result<Vec<f64>> {
        let need = k.saturating_sub(1);
        let v = match self {
            Betas::Uniform(b) => vec![*b; need],
            Betas::PerState(v) if v.len() == 1 => vec![v[0]; need],
            Betas::PerState(v) if v.len() >= need => v[..need].to_vec(),
            Betas::PerState(v) => {
                return Err(Error::arg(format!("{} penalty weights for {k} states", v.len())));
            }
        };
        if v.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::arg("penalty weights must be positive"));
        }
        Ok(v)
    }
}

/// Run configuration shared by the solver entry points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqdConfig {
    pub depth: usize,
    #[serde(default)]
    pub betas: Betas,
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Fock cutoff used when a restricted Hamiltonian is placed on qumodes.
    #[serde(default)]
    pub cutoff: Option<usize>,
    /// Largest acceptable |VQD - exact| per reported level.
    #[serde(default)]
    pub error_threshold: Option<f64>,
    /// Energies closer than this are reported as one level.
    #[serde(default)]
    pub merge_tol: Option<f64>,
}

impl VqdConfig {
    pub fn from_json_str(text: &str, context: &str) -> Result<Self> {
        let c: VqdConfig = serde_json::from_str(text)
            .map_err(|e| Error::parse(context, format!("line {} column {}: {}", e.line(), e.column(), e)))?;
        if c.k == 0 {
            return Err(Error::parse(context, "k must be at least 1"));
        }
        c.betas.expand(c.k).map_err(|e| Error::parse(context, e.to_string()))?;
        c.optimizer.validate().map_err(|e| Error::parse(context, e.to_string()))?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateResult {
    /// Position in the deflation sequence.
    pub extraction_index: usize,
    pub energy: f64,
    pub cost: f64,
    pub params: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub total_evaluations: usize,
    pub history: Vec<f64>,
    pub stop: StopReason,
    pub converged: bool,
    pub restart: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinctLevel {
    pub energy: f64,
    pub multiplicity: usize,
    /// Indices into `VqdResult::states`.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqdResult {
    /// Ascending in energy.
    pub states: Vec<StateResult>,
    /// `|<psi_i|psi_j>|^2` between the states above.
    pub overlaps: Vec<Vec<f64>>,
    pub ansatz: AnsatzSpec,
    pub backend: String,
    pub seed: u64,
}

impl VqdResult {
    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.states.iter().all(|s| s.converged)
    }

    pub fn max_overlap(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, row) in self.overlaps.iter().enumerate() {
            for (j, &o) in row.iter().enumerate() {
                if i != j {
                    m = m.max(o);
                }
            }
        }
        m
    }

    pub fn distinct(&self, tol: f64) -> Vec<DistinctLevel> {
        merge_levels(&self.energies(), tol)
    }
}

/// Group ascending energies whose distance to the first member of their
/// group is within `tol`; each group reports its mean.
pub fn merge_levels(sorted: &[f64], tol: f64) -> Vec<DistinctLevel> {
    let mut out: Vec<DistinctLevel> = Vec::new();
    let mut start = 0;
    for i in 0..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[start] > tol {
            if i > start {
                let members: Vec<usize> = (start..i).collect();
                let energy = sorted[start..i].iter().sum::<f64>() / (i - start) as f64;
                out.push(DistinctLevel { energy, multiplicity: i - start, members });
            }
            start = i;
        }
    }
    out
}

/// Extract `k` states one at a time, each penalized against all earlier
/// ones.
pub fn run_vqd(
    ansatz: &AnsatzSpec,
    backend: &dyn EnergyBackend,
    k: usize,
    betas: &[f64],
    config: &OptimizerConfig,
    seed: u64,
) -> Result<VqdResult> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    let betas = Betas::PerState(betas.to_vec()).expand(k)?;
    ansatz.space.ensure_same(backend.space())?;
    let kernel = AnsatzKernel::new(*ansatz)?;
    let mut deflation = DeflationState::new();
    let mut found: Vec<(StateResult, StateVector)> = Vec::with_capacity(k);
    for level in 0..k {
        let opt = optimize_state(ansatz, backend, &deflation, config, seed)?;
        let psi = kernel.prepare(&opt.params)?;
        if !opt.converged {
            log::warn!("state {level} stopped on its evaluation budget (cost {:.9})", opt.cost);
        }
        log::info!(
            "state {level}: energy {:.10} cost {:.10} after {} evaluations",
            opt.energy,
            opt.cost,
            opt.total_evaluations
        );
        if level + 1 < k {
            deflation.push(psi.clone(), betas[level], opt.energy);
        }
        found.push((
            StateResult {
                extraction_index: level,
                energy: opt.energy,
                cost: opt.cost,
                params: opt.params,
                iterations: opt.iterations,
                evaluations: opt.evaluations,
                total_evaluations: opt.total_evaluations,
                history: opt.history,
                stop: opt.stop,
                converged: opt.converged,
                restart: opt.restart,
            },
            psi,
        ));
        let lo = found.iter().map(|f| f.0.energy).fold(f64::INFINITY, f64::min);
        let hi = found.iter().map(|f| f.0.energy).fold(f64::NEG_INFINITY, f64::max);
        if let Some(b) = betas[..level.min(betas.len())].iter().copied().reduce(f64::min) {
            if b < hi - lo {
                log::warn!("penalty weight {b} is below the energy spread {:.6} found so far", hi - lo);
            }
        }
    }
    found.sort_by(|a, b| a.0.energy.total_cmp(&b.0.energy).then(a.0.extraction_index.cmp(&b.0.extraction_index)));
    let mut overlaps = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            overlaps[i][j] = overlap(&found[i].1, &found[j].1)?;
        }
    }
    Ok(VqdResult {
        states: found.into_iter().map(|f| f.0).collect(),
        overlaps,
        ansatz: *ansatz,
        backend: backend.descriptor(),
        seed,
    })
}
