use crate::error::{Error, Result};
use crate::fock::{CVector, StateVector, C64};

use super::ansatz::{AnsatzKernel, AnsatzSpec};
use super::backend::EnergyBackend;

/// Previously converged states and the penalty weight attached to each.
#[derive(Clone, Debug, Default)]
pub struct DeflationState {
    pub states: Vec<StateVector>,
    pub betas: Vec<f64>,
    pub energies: Vec<f64>,
}

impl DeflationState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, state: StateVector, beta: f64, energy: f64) {
        self.states.push(state);
        self.betas.push(beta);
        self.energies.push(energy);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostValue {
    pub cost: f64,
    /// Energy without the deflation penalty.
    pub energy: f64,
}

/// Deflated cost `E(psi) + sum_n beta_n |<psi_n|psi>|^2` and its gradient.
pub struct CostFunction<'a> {
    kernel: &'a AnsatzKernel,
    backend: &'a dyn EnergyBackend,
    deflation: &'a DeflationState,
}

impl<'a> CostFunction<'a> {
    pub fn new(kernel: &'a AnsatzKernel, backend: &'a dyn EnergyBackend, deflation: &'a DeflationState) -> Result<Self> {
        let space = kernel.spec().space;
        space.ensure_same(backend.space())?;
        for s in &deflation.states {
            space.ensure_same(s.space())?;
        }
        if deflation.betas.len() != deflation.states.len() {
            return Err(Error::arg("one penalty weight per deflated state"));
        }
        Ok(Self { kernel, backend, deflation })
    }

    fn penalty(&self, psi: &CVector) -> (f64, Vec<C64>) {
        let overlaps: Vec<C64> = self.deflation.states.iter().map(|s| s.amplitudes().dotc(psi)).collect();
        let p = overlaps
            .iter()
            .zip(&self.deflation.betas)
            .map(|(o, b)| b * o.norm_sqr())
            .sum();
        (p, overlaps)
    }

    pub fn value(&self, params: &[f64]) -> Result<CostValue> {
        let psi = self.kernel.run(params)?;
        let energy = self.backend.energy(&psi);
        let (p, _) = self.penalty(&psi);
        Ok(CostValue { cost: energy + p, energy })
    }

    pub fn value_and_gradient(&self, params: &[f64]) -> Result<(CostValue, Vec<f64>)> {
        let traj = self.kernel.trajectory(params)?;
        let psi = traj.output();
        let mut lambda = self.backend.apply(psi);
        let energy = psi.dotc(&lambda).re;
        let (p, overlaps) = self.penalty(psi);
        for ((s, o), b) in self.deflation.states.iter().zip(&overlaps).zip(&self.deflation.betas) {
            lambda.axpy(*o * *b, s.amplitudes(), C64::new(1.0, 0.0));
        }
        let grad = self.kernel.backpropagate(params, &traj, lambda);
        Ok((CostValue { cost: energy + p, energy }, grad))
    }
}

/// One evaluation of the deflated cost.
pub fn cost(
    params: &[f64],
    ansatz: &AnsatzSpec,
    backend: &dyn EnergyBackend,
    deflation: &DeflationState,
) -> Result<f64> {
    let kernel = AnsatzKernel::new(*ansatz)?;
    Ok(CostFunction::new(&kernel, backend, deflation)?.value(params)?.cost)
}
