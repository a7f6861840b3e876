//! Vibrational Hamiltonians given as fragments `H = sum_k U_k D_k U_k^dag`.
//!
//! Each `U_k` is a displacement layer, a beam-splitter layer, a squeezing
//! layer and a second beam-splitter layer. `D_k` is diagonal in the Fock
//! basis, so a fragment's energy is read off photon-number probabilities
//! after rotating the state by `U_k^dag`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    hermitian_defect, CMatrix, CVector, DenseHamiltonian, FockSpace, HamiltonianMetadata, LocalLayout,
    OperatorMatrix, StateVector, C64,
};
use crate::gates::GateSpec;

/// Hermiticity tolerance for a reconstructed fragment sum.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Registers at least this large evaluate fragments on the rayon pool.
const PARALLEL_MIN_DIM: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct Fragment {
    pub gamma: Vec<C64>,
    /// `phi[p][q]`, used for `p > q` only.
    pub phi: Vec<Vec<f64>>,
    pub zeta: Vec<f64>,
    pub chi: Vec<Vec<f64>>,
    /// Diagonal of `D_k` in the register basis (cm^-1).
    pub diag: Vec<f64>,
}

#[derive(Deserialize, Serialize)]
struct RawFragment {
    gamma: Vec<[f64; 2]>,
    #[serde(default)]
    phi: Vec<Vec<f64>>,
    zeta: Vec<f64>,
    #[serde(default)]
    chi: Vec<Vec<f64>>,
    diag: Vec<f64>,
}

#[derive(Deserialize, Serialize)]
struct RawFragmentSet {
    num_modes: usize,
    cutoff: usize,
    fragments: Vec<RawFragment>,
    #[serde(default)]
    metadata: serde_json::Map<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FragmentSet {
    pub num_modes: usize,
    pub cutoff: usize,
    pub fragments: Vec<Fragment>,
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

fn square_or_zero(name: &str, m: Vec<Vec<f64>>, n: usize) -> std::result::Result<Vec<Vec<f64>>, String> {
    if m.is_empty() {
        return Ok(vec![vec![0.0; n]; n]);
    }
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(format!("{name} must be {n}x{n}"));
    }
    for (p, row) in m.iter().enumerate() {
        for (q, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(format!("{name}[{p}][{q}] is not finite"));
            }
            if q >= p && x != 0.0 {
                return Err(format!("{name}[{p}][{q}] must be zero (only p > q entries are used)"));
            }
        }
    }
    Ok(m)
}

impl Fragment {
    /// Fragment with `U = I`.
    pub fn diagonal(num_modes: usize, diag: Vec<f64>) -> Self {
        Self {
            gamma: vec![C64::new(0.0, 0.0); num_modes],
            phi: vec![vec![0.0; num_modes]; num_modes],
            zeta: vec![0.0; num_modes],
            chi: vec![vec![0.0; num_modes]; num_modes],
            diag,
        }
    }

    pub fn validate(&self, space: &FockSpace) -> Result<()> {
        let n = space.num_modes();
        if self.gamma.len() != n || self.zeta.len() != n {
            return Err(Error::arg(format!(
                "fragment has {} displacements and {} squeezings for {n} modes",
                self.gamma.len(),
                self.zeta.len()
            )));
        }
        for (name, m) in [("phi", &self.phi), ("chi", &self.chi)] {
            square_or_zero(name, m.clone(), n).map_err(Error::arg)?;
        }
        if self.diag.len() != space.total_dim() {
            return Err(Error::arg(format!(
                "diag has {} entries, register dimension is {}",
                self.diag.len(),
                space.total_dim()
            )));
        }
        let finite = self.gamma.iter().all(|g| g.re.is_finite() && g.im.is_finite())
            && self.zeta.iter().chain(&self.diag).all(|x| x.is_finite());
        if !finite {
            return Err(Error::arg("fragment parameters must be finite"));
        }
        Ok(())
    }

    /// Gates of `U_k` in the order they act on a state.
    pub fn gates(&self) -> Vec<GateSpec> {
        let n = self.gamma.len();
        let bs_layer = |angles: &Vec<Vec<f64>>| {
            let mut out = Vec::new();
            for q in 0..n {
                for p in q + 1..n {
                    out.push(GateSpec::BeamSplitter {
                        modes: [p, q],
                        beta: 2.0 * angles[p][q],
                        phi: std::f64::consts::FRAC_PI_2,
                    });
                }
            }
            out
        };
        let mut gates = bs_layer(&self.chi);
        gates.extend((0..n).map(|p| GateSpec::Squeeze { mode: p, zeta: self.zeta[p], phi: 0.0 }));
        gates.extend(bs_layer(&self.phi));
        gates.extend((0..n).map(|p| GateSpec::Displacement {
            mode: p,
            alpha: [self.gamma[p].re, self.gamma[p].im],
        }));
        gates
    }
}

impl FragmentSet {
    pub fn new(num_modes: usize, cutoff: usize, fragments: Vec<Fragment>) -> Result<Self> {
        let fs = Self {
            num_modes,
            cutoff,
            fragments,
            metadata: Default::default(),
        };
        let space = fs.space()?;
        for f in &fs.fragments {
            f.validate(&space)?;
        }
        Ok(fs)
    }

    pub fn space(&self) -> Result<FockSpace> {
        FockSpace::new(self.num_modes, self.cutoff)
    }

    pub fn from_json_str(text: &str, context: &str) -> Result<Self> {
        let raw: RawFragmentSet = serde_json::from_str(text)
            .map_err(|e| Error::parse(context, format!("line {} column {}: {}", e.line(), e.column(), e)))?;
        let space = FockSpace::new(raw.num_modes, raw.cutoff).map_err(|e| Error::parse(context, e.to_string()))?;
        let n = raw.num_modes;
        let mut fragments = Vec::with_capacity(raw.fragments.len());
        for (k, rf) in raw.fragments.into_iter().enumerate() {
            let at = |msg: String| Error::parse(context, format!("fragments[{k}]: {msg}"));
            let phi = square_or_zero("phi", rf.phi, n).map_err(at)?;
            let chi = square_or_zero("chi", rf.chi, n).map_err(at)?;
            let f = Fragment {
                gamma: rf.gamma.iter().map(|g| C64::new(g[0], g[1])).collect(),
                phi,
                zeta: rf.zeta,
                chi,
                diag: rf.diag,
            };
            f.validate(&space).map_err(|e| at(e.to_string()))?;
            fragments.push(f);
        }
        Ok(Self {
            num_modes: n,
            cutoff: raw.cutoff,
            fragments,
            metadata: raw.metadata,
        })
    }

    pub fn to_json_string(&self) -> Result<String> {
        let raw = RawFragmentSet {
            num_modes: self.num_modes,
            cutoff: self.cutoff,
            fragments: self
                .fragments
                .iter()
                .map(|f| RawFragment {
                    gamma: f.gamma.iter().map(|g| [g.re, g.im]).collect(),
                    phi: f.phi.clone(),
                    zeta: f.zeta.clone(),
                    chi: f.chi.clone(),
                    diag: f.diag.clone(),
                })
                .collect(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&raw).map_err(|e| Error::Numerical(e.to_string()))
    }

    /// Reference energy recorded alongside the fragments, if any.
    pub fn reference_energy(&self) -> Option<f64> {
        self.metadata.get("reference_ground_energy_cm").and_then(|v| v.as_f64())
    }
}

pub fn parse_fragment_set(path: impl AsRef<Path>) -> Result<FragmentSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FragmentSet::from_json_str(&text, &path.display().to_string())
}

/// Left-multiply `u` by every gate in `gates`, first gate first.
pub(crate) fn apply_gates_to_columns(space: &FockSpace, gates: &[GateSpec], u: &mut CMatrix) -> Result<()> {
    for g in gates {
        g.validate(space)?;
        let local = g.local_unitary(space.cutoff())?;
        let layout = LocalLayout::new(space, &g.modes())?;
        let n = u.nrows();
        for col in u.as_mut_slice().chunks_mut(n) {
            layout.apply(&local, col);
        }
    }
    Ok(())
}

pub fn fragment_unitary(f: &Fragment, space: &FockSpace) -> Result<OperatorMatrix> {
    f.validate(space)?;
    let mut u = CMatrix::identity(space.total_dim(), space.total_dim());
    apply_gates_to_columns(space, &f.gates(), &mut u)?;
    OperatorMatrix::unitary(*space, u)
}

/// `<psi| U D U^dag |psi>`: rotate by `U^dag` and weight the photon-number
/// probabilities by the diagonal.
pub fn fragment_expectation(f: &Fragment, psi: &StateVector) -> Result<f64> {
    let u = fragment_unitary(f, psi.space())?;
    Ok(rotated_energy(u.matrix(), &f.diag, psi.amplitudes()))
}

fn rotated_energy(u: &CMatrix, diag: &[f64], psi: &CVector) -> f64 {
    let rotated = u.ad_mul(psi);
    rotated.iter().zip(diag).map(|(z, w)| w * z.norm_sqr()).sum()
}

pub fn reconstruct_hamiltonian(fs: &FragmentSet) -> Result<DenseHamiltonian> {
    let prepared = PreparedFragments::new(fs)?;
    prepared.dense()
}

/// Fragment unitaries computed once for repeated energy evaluation.
#[derive(Clone, Debug)]
pub struct PreparedFragments {
    space: FockSpace,
    unitaries: Vec<CMatrix>,
    diags: Vec<Vec<f64>>,
}

impl PreparedFragments {
    pub fn new(fs: &FragmentSet) -> Result<Self> {
        let space = fs.space()?;
        let work = |f: &Fragment| fragment_unitary(f, &space).map(OperatorMatrix::into_matrix);
        let unitaries: Result<Vec<CMatrix>> = if space.total_dim() >= PARALLEL_MIN_DIM {
            fs.fragments.par_iter().map(work).collect()
        } else {
            fs.fragments.iter().map(work).collect()
        };
        Ok(Self {
            space,
            unitaries: unitaries?,
            diags: fs.fragments.iter().map(|f| f.diag.clone()).collect(),
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    fn parallel(&self) -> bool {
        self.space.total_dim() >= PARALLEL_MIN_DIM && self.len() > 1
    }

    /// Per-fragment energies in fragment order.
    pub fn energies(&self, psi: &CVector) -> Vec<f64> {
        let one = |k: usize| rotated_energy(&self.unitaries[k], &self.diags[k], psi);
        if self.parallel() {
            (0..self.len()).into_par_iter().map(one).collect()
        } else {
            (0..self.len()).map(one).collect()
        }
    }

    /// Total energy, summed in fragment order.
    pub fn energy(&self, psi: &CVector) -> f64 {
        self.energies(psi).iter().sum()
    }

    /// `H psi` without forming `H`.
    pub fn apply(&self, psi: &CVector) -> CVector {
        let one = |k: usize| {
            let mut r = self.unitaries[k].ad_mul(psi);
            for (z, w) in r.iter_mut().zip(&self.diags[k]) {
                *z *= *w;
            }
            &self.unitaries[k] * r
        };
        let parts: Vec<CVector> = if self.parallel() {
            (0..self.len()).into_par_iter().map(one).collect()
        } else {
            (0..self.len()).map(one).collect()
        };
        let mut out = CVector::zeros(psi.len());
        for p in &parts {
            out += p;
        }
        out
    }

    pub fn dense(&self) -> Result<DenseHamiltonian> {
        let n = self.space.total_dim();
        let mut h = CMatrix::zeros(n, n);
        for (u, diag) in self.unitaries.iter().zip(&self.diags) {
            let mut scaled = u.clone();
            for (c, w) in diag.iter().enumerate() {
                scaled.column_mut(c).scale_mut(*w);
            }
            h += scaled * u.adjoint();
        }
        let defect = hermitian_defect(&h);
        if defect >= RECONSTRUCTION_TOL {
            return Err(Error::InputInconsistency(format!(
                "fragment sum is not Hermitian (defect {defect:.3e})"
            )));
        }
        DenseHamiltonian::with_tolerance(
            self.space,
            h,
            (0..n as u64).collect(),
            HamiltonianMetadata {
                source: format!("{} vibrational fragments", self.len()),
                ..Default::default()
            },
            RECONSTRUCTION_TOL,
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateTally {
    pub snap: usize,
    pub displacement: usize,
    pub squeeze: usize,
    pub beam_splitter: usize,
}

impl GateTally {
    fn plus(self, o: GateTally) -> GateTally {
        GateTally {
            snap: self.snap + o.snap,
            displacement: self.displacement + o.displacement,
            squeeze: self.squeeze + o.squeeze,
            beam_splitter: self.beam_splitter + o.beam_splitter,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCountReport {
    pub num_modes: usize,
    pub num_fragments: usize,
    pub depth: usize,
    /// Beam splitters touching each qumode within one fragment unitary.
    pub bs_per_qumode: usize,
    pub per_fragment: GateTally,
    pub fragments_total: GateTally,
    pub ansatz: GateTally,
    pub total: GateTally,
}

/// Gate counts for measuring every fragment plus a depth-`depth` ansatz.
pub fn count_gates(fs: &FragmentSet, depth: usize) -> GateCountReport {
    let n = fs.num_modes;
    let per_fragment = GateTally {
        snap: 0,
        displacement: n,
        squeeze: n,
        beam_splitter: n * n.saturating_sub(1),
    };
    let k = fs.fragments.len();
    let fragments_total = GateTally {
        snap: 0,
        displacement: per_fragment.displacement * k,
        squeeze: per_fragment.squeeze * k,
        beam_splitter: per_fragment.beam_splitter * k,
    };
    let ansatz = GateTally {
        snap: depth,
        displacement: depth,
        squeeze: 0,
        beam_splitter: if n > 1 { depth } else { 0 },
    };
    GateCountReport {
        num_modes: n,
        num_fragments: k,
        depth,
        bs_per_qumode: 2 * n.saturating_sub(1),
        per_fragment,
        fragments_total,
        ansatz,
        total: fragments_total.plus(ansatz),
    }
}
