//! SNAP, displacement, beam-splitter and squeezing gates on a truncated
//! register.
//!
//! Every continuous gate is the exponential of its generator truncated at
//! the cutoff. The generators are anti-Hermitian, so the truncated gates
//! are exactly unitary even where they differ from the infinite-dimensional
//! operator. Large displacements or squeezing relative to the cutoff show up
//! as population at the top Fock level; the public constructors reject
//! gates whose vacuum image leaks there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{embed_local, local_lowering, matrix_exp, CMatrix, FockSpace, OperatorMatrix, C64};

/// Population allowed at the top Fock level of `D(alpha)|0>`.
pub const DISPLACEMENT_LEAKAGE_TOL: f64 = 1e-6;
/// Population allowed at the top Fock levels of `S(zeta)|0>`.
pub const SQUEEZE_LEAKAGE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Snap,
    Displacement,
    BeamSplitter,
    Squeeze,
}

/// A gate with its target modes and parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateSpec {
    /// One phase per Fock level of `mode`.
    Snap { mode: usize, thetas: Vec<f64> },
    /// Complex displacement `alpha = [re, im]`.
    Displacement { mode: usize, alpha: [f64; 2] },
    /// `exp(i beta/2 (e^{i phi} b_j^dag b_k + h.c.))` with `modes = [j, k]`.
    BeamSplitter { modes: [usize; 2], beta: f64, phi: f64 },
    /// `exp((zeta e^{i phi} b^dag^2 - zeta e^{-i phi} b^2) / 2)`.
    Squeeze {
        mode: usize,
        zeta: f64,
        #[serde(default)]
        phi: f64,
    },
}

impl GateSpec {
    pub fn kind(&self) -> GateKind {
        match self {
            GateSpec::Snap { .. } => GateKind::Snap,
            GateSpec::Displacement { .. } => GateKind::Displacement,
            GateSpec::BeamSplitter { .. } => GateKind::BeamSplitter,
            GateSpec::Squeeze { .. } => GateKind::Squeeze,
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match self {
            GateSpec::Snap { mode, .. } | GateSpec::Displacement { mode, .. } | GateSpec::Squeeze { mode, .. } => {
                vec![*mode]
            }
            GateSpec::BeamSplitter { modes, .. } => modes.to_vec(),
        }
    }

    pub fn is_entangling(&self) -> bool {
        matches!(self, GateSpec::BeamSplitter { .. })
    }

    pub fn validate(&self, space: &FockSpace) -> Result<()> {
        for m in self.modes() {
            space.check_mode(m)?;
        }
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            GateSpec::Snap { thetas, .. } => {
                if thetas.len() != space.cutoff() {
                    return Err(Error::arg(format!(
                        "SNAP needs {} phases, got {}",
                        space.cutoff(),
                        thetas.len()
                    )));
                }
                if !finite(thetas) {
                    return Err(Error::arg("SNAP phases must be finite"));
                }
            }
            GateSpec::Displacement { alpha, .. } => {
                if !finite(alpha) {
                    return Err(Error::arg("displacement must be finite"));
                }
            }
            GateSpec::BeamSplitter { modes, beta, phi } => {
                if modes[0] == modes[1] {
                    return Err(Error::arg("beam splitter needs two distinct modes"));
                }
                if !finite(&[*beta, *phi]) {
                    return Err(Error::arg("beam splitter angles must be finite"));
                }
            }
            GateSpec::Squeeze { zeta, phi, .. } => {
                if !finite(&[*zeta, *phi]) {
                    return Err(Error::arg("squeezing parameters must be finite"));
                }
            }
        }
        Ok(())
    }

    /// The gate on its own modes (dimension `d` or `d^2`), without the
    /// truncation-leakage check.
    pub fn local_unitary(&self, cutoff: usize) -> Result<CMatrix> {
        let generator = match self {
            GateSpec::Snap { thetas, .. } => {
                return Ok(snap_local(thetas));
            }
            GateSpec::Displacement { alpha, .. } => displacement_generator(cutoff, C64::new(alpha[0], alpha[1])),
            GateSpec::BeamSplitter { beta, phi, .. } => beamsplitter_generator(cutoff, *beta, *phi),
            GateSpec::Squeeze { zeta, phi, .. } => squeeze_generator(cutoff, *zeta, *phi),
        };
        exp_local(generator)
    }

    /// Gate embedded in the full register, without the leakage check.
    pub fn operator(&self, space: &FockSpace) -> Result<OperatorMatrix> {
        self.validate(space)?;
        let local = self.local_unitary(space.cutoff())?;
        let full = embed_local(space, &self.modes(), &local)?;
        Ok(OperatorMatrix::from_parts(*space, full, false, true))
    }
}

fn exp_local(generator: CMatrix) -> Result<CMatrix> {
    let n = generator.nrows();
    let space = FockSpace::single_mode(n)?;
    Ok(matrix_exp(&OperatorMatrix::from_parts(space, generator, false, false))?.into_matrix())
}

pub(crate) fn snap_local(thetas: &[f64]) -> CMatrix {
    let n = thetas.len();
    let mut m = CMatrix::zeros(n, n);
    for (k, &t) in thetas.iter().enumerate() {
        m[(k, k)] = C64::from_polar(1.0, t);
    }
    m
}

/// `alpha b^dag - alpha^* b`.
pub(crate) fn displacement_generator(d: usize, alpha: C64) -> CMatrix {
    let b = local_lowering(d);
    b.adjoint() * alpha - b * alpha.conj()
}

/// `b_j^dag b_k` on the two-mode local space (mode `j` is local digit 0).
pub(crate) fn hop_local(d: usize) -> CMatrix {
    let n = d * d;
    let mut x = CMatrix::zeros(n, n);
    for nk in 1..d {
        for nj in 0..d - 1 {
            let from = nj + d * nk;
            let to = (nj + 1) + d * (nk - 1);
            x[(to, from)] = C64::new(((nj + 1) as f64 * nk as f64).sqrt(), 0.0);
        }
    }
    x
}

pub(crate) fn beamsplitter_generator(d: usize, beta: f64, phi: f64) -> CMatrix {
    let x = hop_local(d);
    let h = x.clone() * C64::from_polar(1.0, phi) + x.adjoint() * C64::from_polar(1.0, -phi);
    h * C64::new(0.0, beta / 2.0)
}

pub(crate) fn squeeze_generator(d: usize, zeta: f64, phi: f64) -> CMatrix {
    let b = local_lowering(d);
    let b2 = &b * &b;
    let z = C64::from_polar(zeta, phi);
    (b2.adjoint() * z - b2 * z.conj()) * C64::new(0.5, 0.0)
}

fn vacuum_image_top_population(local: &CMatrix, levels: usize) -> f64 {
    let d = local.nrows();
    (d.saturating_sub(levels)..d).map(|n| local[(n, 0)].norm_sqr()).sum()
}

/// Diagonal phase gate `sum_n e^{i theta_n} |n><n|` on `mode`.
pub fn snap_gate(space: &FockSpace, mode: usize, thetas: &[f64]) -> Result<OperatorMatrix> {
    GateSpec::Snap {
        mode,
        thetas: thetas.to_vec(),
    }
    .operator(space)
}

/// `D(alpha) = exp(alpha b^dag - alpha^* b)` on `mode`. Fails with a
/// truncation error when `D(alpha)|0>` puts more than
/// [`DISPLACEMENT_LEAKAGE_TOL`] on the top Fock level.
pub fn displacement_gate(space: &FockSpace, mode: usize, alpha: C64) -> Result<OperatorMatrix> {
    let spec = GateSpec::Displacement {
        mode,
        alpha: [alpha.re, alpha.im],
    };
    spec.validate(space)?;
    let local = spec.local_unitary(space.cutoff())?;
    let leak = vacuum_image_top_population(&local, 1);
    if space.cutoff() > 1 && leak > DISPLACEMENT_LEAKAGE_TOL {
        return Err(Error::Truncation(format!(
            "D({alpha}) leaves {leak:e} population at level {}; raise the cutoff",
            space.cutoff() - 1
        )));
    }
    let full = embed_local(space, &[mode], &local)?;
    Ok(OperatorMatrix::from_parts(*space, full, false, true))
}

pub fn beamsplitter_gate(space: &FockSpace, mode_j: usize, mode_k: usize, beta: f64, phi: f64) -> Result<OperatorMatrix> {
    GateSpec::BeamSplitter {
        modes: [mode_j, mode_k],
        beta,
        phi,
    }
    .operator(space)
}

/// `S(zeta) = exp((zeta b^dag^2 - zeta b^2) / 2)` on `mode`.
pub fn squeeze_gate(space: &FockSpace, mode: usize, zeta: f64) -> Result<OperatorMatrix> {
    squeeze_gate_with_phase(space, mode, zeta, 0.0)
}

/// Squeezing along angle `phi`. `S(zeta)|0>` only populates even levels, so
/// the leakage check looks at the two highest levels.
pub fn squeeze_gate_with_phase(space: &FockSpace, mode: usize, zeta: f64, phi: f64) -> Result<OperatorMatrix> {
    let spec = GateSpec::Squeeze { mode, zeta, phi };
    spec.validate(space)?;
    let local = spec.local_unitary(space.cutoff())?;
    let leak = vacuum_image_top_population(&local, 2);
    if space.cutoff() > 2 && leak >= SQUEEZE_LEAKAGE_TOL {
        return Err(Error::Truncation(format!(
            "S({zeta}) leaves {leak:e} population in the top levels; raise the cutoff"
        )));
    }
    let full = embed_local(space, &[mode], &local)?;
    Ok(OperatorMatrix::from_parts(*space, full, false, true))
}
