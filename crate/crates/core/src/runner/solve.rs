//! Solver pipelines shared by the command-line entry points and tests.

use serde::{Deserialize, Serialize};

use crate::electronic::{embed_in_register, filter_by_particle_number, jordan_wigner_to_matrix, FermionicHamiltonian};
use crate::error::{Error, Result};
use crate::fock::{eigenvalues, DenseHamiltonian};
use crate::fragments::{count_gates, reconstruct_hamiltonian, FragmentSet, GateCountReport};
use crate::gates::GateSpec;
use crate::vqd::{merge_levels, run_vqd, AnsatzSpec, DenseBackend, EnergyBackend, FragmentBackend, VqdConfig, VqdResult};

pub const DEFAULT_ELECTRONIC_CUTOFF: usize = 16;
/// Default merge tolerance for electronic levels, hartree.
pub const ELECTRONIC_MERGE_TOL: f64 = 1e-6;
/// Default merge tolerance for vibrational levels, cm^-1.
pub const VIBRATIONAL_MERGE_TOL: f64 = 1e-3;

/// A gate list together with the register it runs on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub num_modes: usize,
    pub cutoff: usize,
    pub gates: Vec<GateSpec>,
    /// Noiseless energy of the prepared state, if known.
    #[serde(default)]
    pub energy: Option<f64>,
}

/// One reported level: oracle eigenvalues closer than the merge tolerance
/// are grouped and the paired deflation energies averaged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub index: usize,
    pub vqd_energy: f64,
    pub oracle_energy: f64,
    pub abs_error: f64,
    pub multiplicity: usize,
    /// Largest single-state error inside the group.
    pub max_state_error: f64,
}

/// Pair ascending deflation energies with the ascending oracle spectrum.
pub fn pair_levels(vqd: &[f64], oracle: &[f64], tol: f64) -> Result<Vec<LevelRow>> {
    if oracle.len() < vqd.len() {
        return Err(Error::arg(format!("{} states requested, oracle has {}", vqd.len(), oracle.len())));
    }
    let groups = merge_levels(&oracle[..vqd.len()], tol);
    Ok(groups
        .iter()
        .enumerate()
        .map(|(index, g)| {
            let n = g.members.len() as f64;
            let v = g.members.iter().map(|&i| vqd[i]).sum::<f64>() / n;
            let max_state_error = g.members.iter().map(|&i| (vqd[i] - oracle[i]).abs()).fold(0.0, f64::max);
            LevelRow {
                index,
                vqd_energy: v,
                oracle_energy: g.energy,
                abs_error: (v - g.energy).abs(),
                multiplicity: g.members.len(),
                max_state_error,
            }
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub result: VqdResult,
    /// Exact spectrum of the physical Hamiltonian, ascending.
    pub oracle: Vec<f64>,
    pub levels: Vec<LevelRow>,
    /// Gates preparing the lowest state found.
    pub ground_circuit: CircuitFile,
}

impl SolveOutput {
    pub fn worst_error(&self) -> f64 {
        self.levels.iter().map(|l| l.max_state_error).fold(0.0, f64::max)
    }

    pub fn within(&self, threshold: Option<f64>) -> bool {
        threshold.is_none_or(|t| self.worst_error() < t)
    }
}

fn finish(
    ansatz: &AnsatzSpec,
    backend: &dyn EnergyBackend,
    oracle: Vec<f64>,
    config: &VqdConfig,
    seed: u64,
    merge_tol: f64,
) -> Result<SolveOutput> {
    if config.k > oracle.len() {
        return Err(Error::arg(format!(
            "k = {} exceeds the physical dimension {}",
            config.k,
            oracle.len()
        )));
    }
    let betas = config.betas.expand(config.k)?;
    let result = run_vqd(ansatz, backend, config.k, &betas, &config.optimizer, seed)?;
    let levels = pair_levels(&result.energies(), &oracle, config.merge_tol.unwrap_or(merge_tol))?;
    let ground = &result.states[0];
    let ground_circuit = CircuitFile {
        num_modes: ansatz.space.num_modes(),
        cutoff: ansatz.space.cutoff(),
        gates: ansatz.gates(&ground.params)?,
        energy: Some(ground.energy),
    };
    Ok(SolveOutput {
        result,
        oracle,
        levels,
        ground_circuit,
    })
}

/// Electronic problem prepared for the solver: sector Hamiltonian, its
/// spectrum and the padded register Hamiltonian.
#[derive(Clone, Debug)]
pub struct ElectronicProblem {
    pub restricted: DenseHamiltonian,
    pub register: DenseHamiltonian,
    pub oracle: Vec<f64>,
}

pub fn electronic_problem(h: &FermionicHamiltonian, n_e: usize, cutoff: usize) -> Result<ElectronicProblem> {
    let full = jordan_wigner_to_matrix(h)?;
    let restricted = filter_by_particle_number(&full, n_e)?;
    let oracle = eigenvalues(&restricted);
    let register = embed_in_register(&restricted, cutoff, None)?.hamiltonian;
    Ok(ElectronicProblem {
        restricted,
        register,
        oracle,
    })
}

pub fn solve_electronic(h: &FermionicHamiltonian, n_e: usize, config: &VqdConfig, seed: u64) -> Result<SolveOutput> {
    let p = electronic_problem(h, n_e, config.cutoff.unwrap_or(DEFAULT_ELECTRONIC_CUTOFF))?;
    let ansatz = AnsatzSpec::new(*p.register.space(), config.depth);
    let backend = DenseBackend::new(p.register);
    finish(&ansatz, &backend, p.oracle, config, seed, ELECTRONIC_MERGE_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Fragment,
    Dense,
}

pub fn solve_vibrational(
    fs: &FragmentSet,
    config: &VqdConfig,
    seed: u64,
    backend: BackendKind,
) -> Result<(SolveOutput, GateCountReport)> {
    let h = reconstruct_hamiltonian(fs)?;
    let oracle = eigenvalues(&h);
    let ansatz = AnsatzSpec::new(*h.space(), config.depth);
    let out = match backend {
        BackendKind::Fragment => finish(&ansatz, &FragmentBackend::new(fs)?, oracle, config, seed, VIBRATIONAL_MERGE_TOL)?,
        BackendKind::Dense => finish(&ansatz, &DenseBackend::new(h), oracle, config, seed, VIBRATIONAL_MERGE_TOL)?,
    };
    Ok((out, count_gates(fs, config.depth)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_groups_degenerate_oracle_levels() {
        let oracle = [-1.0, 0.5, 0.5 + 1e-9, 0.5 - 1e-9, 2.0, 3.0];
        let vqd = [-1.0 + 1e-4, 0.5, 0.5 + 2e-4, 0.5, 2.0 - 1e-3];
        let rows = pair_levels(&vqd, &oracle, 1e-6).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].multiplicity, 3);
        assert!((rows[1].max_state_error - 2e-4).abs() < 1e-9);
        assert!((rows[2].abs_error - 1e-3).abs() < 1e-12);
        assert!(pair_levels(&[0.0; 7], &oracle, 1e-6).is_err());
    }

    #[test]
    fn zero_hamiltonian_gives_zero_energies() {
        let h = FermionicHamiltonian::new(4, vec![]).unwrap();
        let cfg = VqdConfig::from_json_str(r#"{"depth": 2, "k": 2, "cutoff": 8}"#, "cfg").unwrap();
        let out = solve_electronic(&h, 2, &cfg, 0).unwrap();
        assert!(out.result.energies().iter().all(|e| e.abs() < 1e-9));
        assert_eq!(out.levels.len(), 1);
        assert_eq!(out.ground_circuit.cutoff, 8);
    }

    #[test]
    fn diagonal_fragment_recovers_sorted_entries() {
        use crate::fragments::Fragment;
        let diag = vec![4.0, 1.0, 9.0, 2.5];
        let fs = FragmentSet::new(1, 4, vec![Fragment::diagonal(1, diag)]).unwrap();
        let cfg = VqdConfig::from_json_str(r#"{"depth": 3, "k": 3, "betas": 20.0}"#, "cfg").unwrap();
        for backend in [BackendKind::Fragment, BackendKind::Dense] {
            let (out, counts) = solve_vibrational(&fs, &cfg, 2, backend).unwrap();
            let e = out.result.energies();
            for (a, b) in e.iter().zip([1.0, 2.5, 4.0]) {
                assert!((a - b).abs() < 1e-6, "{e:?}");
            }
            assert_eq!(counts.ansatz.snap, 3);
        }
    }
}
