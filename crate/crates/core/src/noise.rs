//! Hardware noise: an amplitude-damping (photon loss) channel applied
//! after every gate, and a per-entangling-gate fidelity model.
//!
//! The damping channel keeps Kraus operators `K_1..K_lmax` and replaces
//! `K_0` with `sqrt(I - sum_{l>=1} K_l^dag K_l)`, which makes the truncated
//! channel trace preserving.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    eigh, embed_local, local_lowering, local_number, CMatrix, DenseHamiltonian, DensityMatrix, FockSpace,
    OperatorMatrix, C64,
};
use crate::gates::GateSpec;

pub const DEFAULT_L_MAX: usize = 8;

/// Eigenvalues of `I - sum K^dag K` down to this are clamped to zero.
const SQRT_CLAMP: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct AmplitudeDampingChannel {
    kappa_tau: f64,
    l_max: usize,
    space: FockSpace,
    mode: usize,
    /// `K_0', K_1, ..., K_lmax` embedded in the register.
    kraus: Vec<CMatrix>,
}

/// `K_0', K_1, ..., K_lmax` on a single mode of cutoff `d`.
pub fn local_kraus(d: usize, kappa_tau: f64, l_max: usize) -> Result<Vec<CMatrix>> {
    if !(kappa_tau.is_finite() && kappa_tau >= 0.0) {
        return Err(Error::arg(format!("kappa_tau must be finite and non-negative, got {kappa_tau}")));
    }
    if l_max == 0 {
        return Err(Error::arg("l_max must be at least 1"));
    }
    let loss = -(-kappa_tau).exp_m1();
    let damp = CMatrix::from_diagonal(
        &local_number(d).diagonal().map(|n| C64::new((-kappa_tau * n.re / 2.0).exp(), 0.0)),
    );
    let a = local_lowering(d);
    let mut ops = Vec::with_capacity(l_max + 1);
    let mut a_pow = CMatrix::identity(d, d);
    let mut weight = 1.0;
    let mut sum = CMatrix::zeros(d, d);
    for l in 1..=l_max {
        a_pow = &a_pow * &a;
        weight *= loss / l as f64;
        let k = &damp * &a_pow * C64::new(weight.sqrt(), 0.0);
        sum += k.adjoint() * &k;
        ops.push(k);
    }
    let rest = CMatrix::identity(d, d) - sum;
    let (vals, vecs) = eigh(&rest);
    if let Some(&v) = vals.iter().find(|&&v| v < -SQRT_CLAMP) {
        return Err(Error::Numerical(format!(
            "I - sum K^dag K has eigenvalue {v:.3e}; the Kraus sum exceeds the identity"
        )));
    }
    let mut k0 = CMatrix::zeros(d, d);
    for (j, v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        let col = vecs.column(j);
        k0 += &col * col.adjoint() * C64::new(s, 0.0);
    }
    ops.insert(0, k0);
    Ok(ops)
}

impl AmplitudeDampingChannel {
    pub fn new(space: FockSpace, mode: usize, kappa_tau: f64, l_max: usize) -> Result<Self> {
        space.check_mode(mode)?;
        let kraus = local_kraus(space.cutoff(), kappa_tau, l_max)?
            .iter()
            .map(|k| embed_local(&space, &[mode], k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kappa_tau,
            l_max,
            space,
            mode,
            kraus,
        })
    }

    pub fn kappa_tau(&self) -> f64 {
        self.kappa_tau
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// `max |sum_l K_l^dag K_l - I|`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.space.total_dim();
        let mut s = -CMatrix::identity(n, n);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        s.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let n = rho.nrows();
        let mut out = CMatrix::zeros(n, n);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }
}

pub fn kraus_operators(ch: &AmplitudeDampingChannel) -> Vec<OperatorMatrix> {
    ch.kraus
        .iter()
        .map(|k| OperatorMatrix::new(ch.space, k.clone()).expect("Kraus operators match their register"))
        .collect()
}

/// `rho -> sum_l K_l rho K_l^dag`.
pub fn apply_channel(ch: &AmplitudeDampingChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.space.ensure_same(rho.space())?;
    Ok(DensityMatrix::from_parts(ch.space, ch.apply_matrix(rho.matrix())))
}

/// Photon-loss strength applied after each gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateNoise {
    pub kappa_tau: f64,
    pub l_max: usize,
}

impl Default for GateNoise {
    fn default() -> Self {
        Self {
            kappa_tau: 0.0,
            l_max: DEFAULT_L_MAX,
        }
    }
}

/// Final density matrix of `circuit` run from vacuum with damping on every
/// mode a gate touches, right after that gate.
pub fn noisy_circuit_state(circuit: &[GateSpec], noise: GateNoise, space: &FockSpace) -> Result<DensityMatrix> {
    let channels = (0..space.num_modes())
        .map(|m| AmplitudeDampingChannel::new(*space, m, noise.kappa_tau, noise.l_max))
        .collect::<Result<Vec<_>>>()?;
    let mut rho = DensityMatrix::vacuum(*space).matrix().clone();
    for g in circuit {
        let u = g.operator(space)?;
        rho = u.matrix() * rho * u.matrix().adjoint();
        if noise.kappa_tau > 0.0 {
            for m in g.modes() {
                rho = channels[m].apply_matrix(&rho);
            }
        }
    }
    let rho = DensityMatrix::from_parts(*space, rho);
    rho.validate()?;
    Ok(rho)
}

/// `Tr(rho H)` after the noisy circuit.
pub fn noisy_circuit_expectation(circuit: &[GateSpec], noise: GateNoise, h: &DenseHamiltonian) -> Result<f64> {
    let rho = noisy_circuit_state(circuit, noise, h.space())?;
    Ok((rho.matrix() * h.matrix()).trace().re)
}

/// Change in the output state when `l_max` is doubled (Frobenius norm).
pub fn l_max_truncation_error(ch: &AmplitudeDampingChannel, rho: &DensityMatrix) -> Result<f64> {
    let wider = AmplitudeDampingChannel::new(ch.space, ch.mode, ch.kappa_tau, 2 * ch.l_max)?;
    Ok((ch.apply_matrix(rho.matrix()) - wider.apply_matrix(rho.matrix())).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateFidelityModel {
    pub error_prob: f64,
    pub entangling_gate_count: u64,
    pub reference_energy: f64,
}

impl GateFidelityModel {
    pub fn new(error_prob: f64, entangling_gate_count: u64, reference_energy: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&error_prob) {
            return Err(Error::arg(format!("error probability {error_prob} outside [0, 1]")));
        }
        if !reference_energy.is_finite() {
            return Err(Error::arg("reference energy must be finite"));
        }
        Ok(Self {
            error_prob,
            entangling_gate_count,
            reference_energy,
        })
    }

    /// Probability that every entangling gate succeeds.
    pub fn success_probability(&self) -> f64 {
        let n = self.entangling_gate_count as f64;
        (n * (-self.error_prob).ln_1p()).exp()
    }

    pub fn energy(&self) -> f64 {
        self.success_probability() * self.reference_energy
    }
}

/// `(1 - (1 - p)^n) |E_ref|`: the state error read directly as an energy
/// error.
pub fn fidelity_energy_error(model: &GateFidelityModel) -> f64 {
    let n = model.entangling_gate_count as f64;
    -(n * (-model.error_prob).ln_1p()).exp_m1() * model.reference_energy.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `kappa_tau` for the damping model, `p` for the fidelity model.
    pub x: f64,
    pub gate_count: Option<u64>,
    pub energy: f64,
    pub abs_error: f64,
}

/// Noisy energy of `circuit` at every grid point, in grid order. Errors are
/// measured against `reference`.
pub fn kraus_sweep(
    circuit: &[GateSpec],
    h: &DenseHamiltonian,
    grid: &[f64],
    l_max: usize,
    reference: f64,
) -> Result<Vec<SweepRow>> {
    grid.par_iter()
        .map(|&kappa_tau| {
            let noise = GateNoise { kappa_tau, l_max };
            let rho = noisy_circuit_state(circuit, noise, h.space())?;
            if cfg!(debug_assertions) && kappa_tau > 0.0 {
                for m in 0..h.space().num_modes() {
                    let ch = AmplitudeDampingChannel::new(*h.space(), m, kappa_tau, l_max)?;
                    let err = l_max_truncation_error(&ch, &rho)?;
                    if err > 1e-8 {
                        log::warn!("l_max = {l_max} is not converged at kappa_tau = {kappa_tau}: {err:.2e}");
                    }
                }
            }
            let energy = (rho.matrix() * h.matrix()).trace().re;
            Ok(SweepRow {
                x: kappa_tau,
                gate_count: None,
                energy,
                abs_error: (energy - reference).abs(),
            })
        })
        .collect()
}

/// Rows for every `(gate_count, p)` pair, gate counts outermost.
pub fn fidelity_sweep(error_probs: &[f64], gate_counts: &[u64], reference_energy: f64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(error_probs.len() * gate_counts.len());
    for &n in gate_counts {
        for &p in error_probs {
            let m = GateFidelityModel::new(p, n, reference_energy)?;
            rows.push(SweepRow {
                x: p,
                gate_count: Some(n),
                energy: m.energy(),
                abs_error: fidelity_energy_error(&m),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModelKind {
    Kraus,
    Fidelity,
}

/// Noise sweep configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSweepConfig {
    pub model: NoiseModelKind,
    #[serde(default)]
    pub kappa_tau_grid: Vec<f64>,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default)]
    pub error_prob_grid: Vec<f64>,
    #[serde(default)]
    pub gate_counts: Vec<u64>,
    /// Reference energy for the fidelity model.
    #[serde(default)]
    pub reference_energy: Option<f64>,
    /// Error level whose crossing is flagged in the output.
    #[serde(default)]
    pub threshold: Option<f64>,
}

fn default_l_max() -> usize {
    DEFAULT_L_MAX
}

impl NoiseSweepConfig {
    pub fn from_json_str(text: &str, context: &str) -> Result<Self> {
        let c: NoiseSweepConfig = serde_json::from_str(text)
            .map_err(|e| Error::parse(context, format!("line {} column {}: {}", e.line(), e.column(), e)))?;
        let bad = |m: &str| Err(Error::parse(context, m.to_string()));
        match c.model {
            NoiseModelKind::Kraus => {
                if c.kappa_tau_grid.is_empty() {
                    return bad("kraus model needs a non-empty kappa_tau_grid");
                }
                if c.kappa_tau_grid.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
                    return bad("kappa_tau values must be finite and non-negative");
                }
                if c.l_max == 0 {
                    return bad("l_max must be at least 1");
                }
            }
            NoiseModelKind::Fidelity => {
                if c.error_prob_grid.is_empty() || c.gate_counts.is_empty() {
                    return bad("fidelity model needs error_prob_grid and gate_counts");
                }
                if c.error_prob_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return bad("error probabilities must lie in [0, 1]");
                }
            }
        }
        Ok(c)
    }
}

/// First grid point, scanning upward, whose error reaches `threshold`.
pub fn threshold_crossing(rows: &[SweepRow], threshold: f64) -> Option<usize> {
    rows.iter().position(|r| r.abs_error >= threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_op, StateVector};
    use crate::gates::displacement_gate;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rho(space: FockSpace, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let n = space.total_dim();
        let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let t = m.trace();
        DensityMatrix::new(space, m / t).unwrap()
    }

    #[test]
    fn no_loss_is_identity() {
        let space = FockSpace::single_mode(5).unwrap();
        let ch = AmplitudeDampingChannel::new(space, 0, 0.0, DEFAULT_L_MAX).unwrap();
        let ks = kraus_operators(&ch);
        assert!((ks[0].matrix() - CMatrix::identity(5, 5)).norm() < 1e-15);
        assert!(ks[1..].iter().all(|k| k.matrix().norm() == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_rho(space, &mut rng);
        assert!((apply_channel(&ch, &rho).unwrap().matrix() - rho.matrix()).norm() < 1e-14);
    }

    #[test]
    fn single_photon_survival() {
        let space = FockSpace::single_mode(6).unwrap();
        let ch = AmplitudeDampingChannel::new(space, 0, std::f64::consts::LN_2, DEFAULT_L_MAX).unwrap();
        let rho = DensityMatrix::from_pure(&StateVector::basis(space, 1).unwrap());
        let pops = apply_channel(&ch, &rho).unwrap().populations();
        assert!((pops[0] - 0.5).abs() < 1e-10);
        assert!((pops[1] - 0.5).abs() < 1e-10);
        assert!(pops[2..].iter().all(|p| p.abs() < 1e-15));
    }

    #[test]
    fn vacuum_is_fixed() {
        let space = FockSpace::new(2, 3).unwrap();
        let ch = AmplitudeDampingChannel::new(space, 1, 0.7, 3).unwrap();
        let out = apply_channel(&ch, &DensityMatrix::vacuum(space)).unwrap();
        assert!((out.matrix() - DensityMatrix::vacuum(space).matrix()).norm() < 1e-15);
    }

    #[test]
    fn coherent_state_photon_number_decays() {
        let space = FockSpace::single_mode(32).unwrap();
        let psi = StateVector::vacuum(space)
            .apply(&displacement_gate(&space, 0, C64::new(1.0, 0.0)).unwrap())
            .unwrap();
        let ch = AmplitudeDampingChannel::new(space, 0, 0.1, DEFAULT_L_MAX).unwrap();
        let out = apply_channel(&ch, &DensityMatrix::from_pure(&psi)).unwrap();
        let n = crate::fock::expectation(&out, &number_op(&space, 0).unwrap()).unwrap();
        assert!((n - (-0.1f64).exp()).abs() < 1e-4, "{n}");
    }

    #[test]
    fn argument_errors() {
        let space = FockSpace::single_mode(4).unwrap();
        assert!(AmplitudeDampingChannel::new(space, 0, -0.1, 4).is_err());
        assert!(AmplitudeDampingChannel::new(space, 0, 0.1, 0).is_err());
        assert!(AmplitudeDampingChannel::new(space, 1, 0.1, 2).is_err());
        let ch = AmplitudeDampingChannel::new(space, 0, 0.1, 2).unwrap();
        let other = DensityMatrix::vacuum(FockSpace::single_mode(3).unwrap());
        assert!(apply_channel(&ch, &other).is_err());
    }

    #[test]
    fn l_max_doubling_converges() {
        let space = FockSpace::single_mode(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_rho(space, &mut rng);
        for k in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2] {
            let ch = AmplitudeDampingChannel::new(space, 0, k, DEFAULT_L_MAX).unwrap();
            assert!(l_max_truncation_error(&ch, &rho).unwrap() < 1e-8, "{k}");
        }
    }

    #[test]
    fn noiseless_circuit_matches_statevector() {
        let space = FockSpace::single_mode(6).unwrap();
        let circuit = vec![
            GateSpec::Displacement { mode: 0, alpha: [0.4, -0.2] },
            GateSpec::Snap { mode: 0, thetas: vec![0.1, 0.5, -0.3, 0.0, 1.0, 2.0] },
            GateSpec::Displacement { mode: 0, alpha: [0.1, 0.3] },
        ];
        let h = DenseHamiltonian::from_real_diagonal(&[0.0, 1.0, 2.5, 3.0, 4.0, 7.0]).unwrap();
        let mut psi = StateVector::vacuum(space);
        for g in &circuit {
            psi = psi.apply(&g.operator(&space).unwrap()).unwrap();
        }
        let pure = crate::fock::expectation(&psi, &h.as_operator()).unwrap();
        let mixed = noisy_circuit_expectation(&circuit, GateNoise::default(), &h).unwrap();
        assert!((pure - mixed).abs() < 1e-9);
        assert_eq!(noisy_circuit_expectation(&[], GateNoise { kappa_tau: 0.3, l_max: 4 }, &h).unwrap(), 0.0);
        let lossy = noisy_circuit_expectation(&circuit, GateNoise { kappa_tau: 0.05, l_max: 8 }, &h).unwrap();
        assert!(lossy < pure);
    }

    #[test]
    fn fidelity_model_values() {
        assert_eq!(fidelity_energy_error(&GateFidelityModel::new(0.0, 26, 2532.06).unwrap()), 0.0);
        assert_eq!(fidelity_energy_error(&GateFidelityModel::new(0.3, 0, 2532.06).unwrap()), 0.0);
        let e = fidelity_energy_error(&GateFidelityModel::new(1e-3, 26, 2532.06).unwrap());
        let closed = 2532.06 * (1.0 - 0.999f64.powi(26));
        assert!((e - closed).abs() < 1e-9);
        assert!((e - 65.0).abs() < 0.1, "{e}");
        assert!(GateFidelityModel::new(1.5, 1, 1.0).is_err());
    }

    #[test]
    fn fidelity_curves_are_ordered() {
        let grid: Vec<f64> = (0..=40).map(|i| 10f64.powf(-6.0 + i as f64 * 0.1)).collect();
        let rows = fidelity_sweep(&grid, &[26, 900, 7000], 2532.06).unwrap();
        let g = grid.len();
        for i in 0..g {
            assert!(rows[i].abs_error < rows[g + i].abs_error);
            assert!(rows[g + i].abs_error < rows[2 * g + i].abs_error);
        }
    }

    #[test]
    fn sweep_config_parsing() {
        let c = NoiseSweepConfig::from_json_str(r#"{"model": "kraus", "kappa_tau_grid": [0, 1e-4], "l_max": 8}"#, "c").unwrap();
        assert_eq!(c.model, NoiseModelKind::Kraus);
        let c = NoiseSweepConfig::from_json_str(
            r#"{"model": "fidelity", "error_prob_grid": [1e-3], "gate_counts": [26, 900]}"#,
            "c",
        )
        .unwrap();
        assert_eq!(c.l_max, DEFAULT_L_MAX);
        assert!(NoiseSweepConfig::from_json_str(r#"{"model": "kraus"}"#, "c").is_err());
        assert!(NoiseSweepConfig::from_json_str(r#"{"model": "other"}"#, "c").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn completeness(kappa_tau in 0.0f64..3.0, l_max in 1usize..12, d in 2usize..12) {
            let ch = AmplitudeDampingChannel::new(FockSpace::single_mode(d).unwrap(), 0, kappa_tau, l_max).unwrap();
            prop_assert!(ch.completeness_defect() < 1e-12);
        }

        #[test]
        fn trace_preserved(seed in any::<u64>(), kappa_tau in 0.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let space = FockSpace::new(2, 3).unwrap();
            let rho = random_rho(space, &mut rng);
            let ch = AmplitudeDampingChannel::new(space, rng.random_range(0..2), kappa_tau, 4).unwrap();
            let out = apply_channel(&ch, &rho).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-10);
            prop_assert!(out.validate().is_ok());
        }

        #[test]
        fn fidelity_error_grows_with_gate_count(p in 0.0f64..1.0, n in 0u64..10_000) {
            let a = fidelity_energy_error(&GateFidelityModel::new(p, n, -3.0).unwrap());
            let b = fidelity_energy_error(&GateFidelityModel::new(p, n + 1, -3.0).unwrap());
            prop_assert!(b >= a);
        }
    }
}
