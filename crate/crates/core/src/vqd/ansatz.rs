use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{eigh, local_lowering, CMatrix, CVector, FockSpace, LocalLayout, StateVector, C64};
use crate::gates::{hop_local, GateSpec};

/// Layered SNAP + displacement circuit with an all-to-all beam-splitter
/// layer when the register has more than one mode.
///
/// Per layer the parameters are, for each mode, `d` SNAP phases followed by
/// `Re alpha, Im alpha`; then `beta, phi` for each mode pair `(p, q)`,
/// `p > q`, ordered by `q` then `p`. Within a layer every mode gets SNAP then
/// displacement, and the beam splitters act last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub space: FockSpace,
    pub depth: usize,
    pub all_to_all_bs: bool,
}

impl AnsatzSpec {
    pub fn new(space: FockSpace, depth: usize) -> Self {
        Self {
            space,
            depth,
            all_to_all_bs: space.num_modes() > 1,
        }
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        if !self.all_to_all_bs {
            return Vec::new();
        }
        let n = self.space.num_modes();
        let mut out = Vec::new();
        for q in 0..n {
            for p in q + 1..n {
                out.push((p, q));
            }
        }
        out
    }

    pub fn params_per_layer(&self) -> usize {
        let n = self.space.num_modes();
        n * (self.space.cutoff() + 2) + 2 * self.pairs().len()
    }

    pub fn num_params(&self) -> usize {
        self.depth * self.params_per_layer()
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::arg(format!(
                "ansatz takes {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        if params.iter().any(|x| !x.is_finite()) {
            return Err(Error::arg("ansatz parameters must be finite"));
        }
        Ok(())
    }

    /// The circuit as gate descriptions, in the order they act.
    pub fn gates(&self, params: &[f64]) -> Result<Vec<GateSpec>> {
        self.check_params(params)?;
        let d = self.space.cutoff();
        let n = self.space.num_modes();
        let pairs = self.pairs();
        let mut gates = Vec::new();
        for layer in params.chunks(self.params_per_layer()) {
            for m in 0..n {
                let block = &layer[m * (d + 2)..(m + 1) * (d + 2)];
                gates.push(GateSpec::Snap { mode: m, thetas: block[..d].to_vec() });
                gates.push(GateSpec::Displacement { mode: m, alpha: [block[d], block[d + 1]] });
            }
            let bs = &layer[n * (d + 2)..];
            for (i, &(p, q)) in pairs.iter().enumerate() {
                gates.push(GateSpec::BeamSplitter { modes: [p, q], beta: bs[2 * i], phi: bs[2 * i + 1] });
            }
        }
        Ok(gates)
    }
}

/// Apply the ansatz to the vacuum.
pub fn prepare_state(ansatz: &AnsatzSpec, params: &[f64]) -> Result<StateVector> {
    let kernel = AnsatzKernel::new(*ansatz)?;
    kernel.prepare(params)
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Snap { mode: usize, at: usize },
    Disp { mode: usize, at: usize },
    Bs { pair: usize, at: usize },
}

/// Eigenbasis of a Hermitian generator: `G = W diag(mu) W^dag`.
#[derive(Clone, Debug)]
struct Rotation {
    w: CMatrix,
    w_adj: CMatrix,
    mu: Vec<f64>,
}

impl Rotation {
    fn new(g: &CMatrix) -> Self {
        let (mu, w) = eigh(g);
        Self { w_adj: w.adjoint(), w, mu }
    }
}

/// Precomputed factorizations that make every ansatz gate two local
/// matrix-vector products plus diagonal phases:
///
/// `D(r e^{i t}) = R W diag(e^{-i r mu}) W^dag R^dag`, `R = e^{i t n}`,
/// with `W diag(mu) W^dag = i (b^dag - b)`, and
/// `BS(beta, phi) = R W diag(e^{i beta mu / 2}) W^dag R^dag`,
/// `R = e^{i phi n_p}`, with `W diag(mu) W^dag = b_p^dag b_q + h.c.`.
#[derive(Clone, Debug)]
pub struct AnsatzKernel {
    spec: AnsatzSpec,
    ops: Vec<Op>,
    mode_layouts: Vec<LocalLayout>,
    pair_layouts: Vec<LocalLayout>,
    pairs: Vec<(usize, usize)>,
    /// `digits[m][i]`: occupation of mode `m` in register index `i`.
    digits: Vec<Vec<usize>>,
    disp: Rotation,
    /// `W^dag b W` in the displacement eigenbasis.
    b_rot: CMatrix,
    bs: Option<Rotation>,
}

/// Register states before and after every gate.
pub struct Trajectory {
    pub states: Vec<CVector>,
}

impl Trajectory {
    pub fn output(&self) -> &CVector {
        self.states.last().expect("trajectory holds the input state")
    }
}

fn phase_by_digit(v: &mut [C64], digits: &[usize], angle: f64) {
    if angle == 0.0 {
        return;
    }
    let d = digits.iter().copied().max().unwrap_or(0) + 1;
    let phases: Vec<C64> = (0..d).map(|n| C64::from_polar(1.0, angle * n as f64)).collect();
    for (z, &n) in v.iter_mut().zip(digits) {
        *z *= phases[n];
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl AnsatzKernel {
    pub fn new(spec: AnsatzSpec) -> Result<Self> {
        let space = spec.space;
        let d = space.cutoff();
        let n = space.num_modes();
        let pairs = spec.pairs();
        let mut ops = Vec::new();
        for layer in 0..spec.depth {
            let base = layer * spec.params_per_layer();
            for m in 0..n {
                ops.push(Op::Snap { mode: m, at: base + m * (d + 2) });
                ops.push(Op::Disp { mode: m, at: base + m * (d + 2) + d });
            }
            for i in 0..pairs.len() {
                ops.push(Op::Bs { pair: i, at: base + n * (d + 2) + 2 * i });
            }
        }
        let mode_layouts = (0..n).map(|m| LocalLayout::new(&space, &[m])).collect::<Result<Vec<_>>>()?;
        let pair_layouts = pairs
            .iter()
            .map(|&(p, q)| LocalLayout::new(&space, &[p, q]))
            .collect::<Result<Vec<_>>>()?;
        let digits = (0..n)
            .map(|m| (0..space.total_dim()).map(|i| space.occupation(i, m)).collect())
            .collect();
        let b = local_lowering(d);
        let p_quad = (b.adjoint() - &b) * C64::new(0.0, 1.0);
        let disp = Rotation::new(&p_quad);
        let b_rot = &disp.w_adj * &b * &disp.w;
        let bs = if pairs.is_empty() {
            None
        } else {
            let x = hop_local(d);
            Some(Rotation::new(&(x.adjoint() + &x)))
        };
        Ok(Self {
            spec,
            ops,
            mode_layouts,
            pair_layouts,
            pairs,
            digits,
            disp,
            b_rot,
            bs,
        })
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn num_gates(&self) -> usize {
        self.ops.len()
    }

    fn snap(&self, mode: usize, thetas: &[f64], sign: f64, v: &mut [C64]) {
        let phases: Vec<C64> = thetas.iter().map(|&t| C64::from_polar(1.0, sign * t)).collect();
        for (z, &n) in v.iter_mut().zip(&self.digits[mode]) {
            *z *= phases[n];
        }
    }

    /// `v <- W^dag R^dag v` for a displacement on `mode`.
    fn disp_in(&self, mode: usize, theta: f64, v: &mut [C64]) {
        phase_by_digit(v, &self.digits[mode], -theta);
        self.mode_layouts[mode].apply(&self.disp.w_adj, v);
    }

    /// `v <- R W v` for a displacement on `mode`.
    fn disp_out(&self, mode: usize, theta: f64, v: &mut [C64]) {
        self.mode_layouts[mode].apply(&self.disp.w, v);
        phase_by_digit(v, &self.digits[mode], theta);
    }

    fn disp_phases(&self, r: f64, sign: f64) -> Vec<C64> {
        self.disp.mu.iter().map(|&m| C64::from_polar(1.0, -sign * r * m)).collect()
    }

    fn displace(&self, mode: usize, x: f64, y: f64, sign: f64, v: &mut [C64]) {
        if x == 0.0 && y == 0.0 {
            return;
        }
        let (r, theta) = (x.hypot(y), y.atan2(x));
        self.disp_in(mode, theta, v);
        self.mode_layouts[mode].apply_diagonal(&self.disp_phases(r, sign), v);
        self.disp_out(mode, theta, v);
    }

    fn bs_rotation(&self) -> &Rotation {
        self.bs.as_ref().expect("beam-splitter basis exists whenever pairs do")
    }

    fn bs_in(&self, pair: usize, phi: f64, v: &mut [C64]) {
        let p = self.pairs[pair].0;
        phase_by_digit(v, &self.digits[p], -phi);
        self.pair_layouts[pair].apply(&self.bs_rotation().w_adj, v);
    }

    fn bs_out(&self, pair: usize, phi: f64, v: &mut [C64]) {
        let p = self.pairs[pair].0;
        self.pair_layouts[pair].apply(&self.bs_rotation().w, v);
        phase_by_digit(v, &self.digits[p], phi);
    }

    fn bs_phases(&self, beta: f64, sign: f64) -> Vec<C64> {
        self.bs_rotation()
            .mu
            .iter()
            .map(|&m| C64::from_polar(1.0, sign * beta * m / 2.0))
            .collect()
    }

    fn beamsplit(&self, pair: usize, beta: f64, phi: f64, sign: f64, v: &mut [C64]) {
        if beta == 0.0 {
            return;
        }
        self.bs_in(pair, phi, v);
        self.pair_layouts[pair].apply_diagonal(&self.bs_phases(beta, sign), v);
        self.bs_out(pair, phi, v);
    }

    fn apply_op(&self, op: Op, params: &[f64], sign: f64, v: &mut [C64]) {
        let d = self.spec.space.cutoff();
        match op {
            Op::Snap { mode, at } => self.snap(mode, &params[at..at + d], sign, v),
            Op::Disp { mode, at } => self.displace(mode, params[at], params[at + 1], sign, v),
            Op::Bs { pair, at } => self.beamsplit(pair, params[at], params[at + 1], sign, v),
        }
    }

    /// Output amplitudes only.
    pub fn run(&self, params: &[f64]) -> Result<CVector> {
        self.spec.check_params(params)?;
        let mut v = StateVector::vacuum(self.spec.space).into_amplitudes();
        for &op in &self.ops {
            self.apply_op(op, params, 1.0, v.as_mut_slice());
        }
        Ok(v)
    }

    pub fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        let v = self.run(params)?;
        StateVector::from_amplitudes(self.spec.space, v)
    }

    pub fn trajectory(&self, params: &[f64]) -> Result<Trajectory> {
        self.spec.check_params(params)?;
        let mut states = Vec::with_capacity(self.ops.len() + 1);
        let mut v = StateVector::vacuum(self.spec.space).into_amplitudes();
        states.push(v.clone());
        for &op in &self.ops {
            self.apply_op(op, params, 1.0, v.as_mut_slice());
            states.push(v.clone());
        }
        Ok(Trajectory { states })
    }

    /// Gradient of a real cost `C(psi)` whose first-order variation is
    /// `dC = 2 Re <lambda | d psi>` at the trajectory output.
    pub fn backpropagate(&self, params: &[f64], traj: &Trajectory, lambda: CVector) -> Vec<f64> {
        let d = self.spec.space.cutoff();
        let mut grad = vec![0.0; params.len()];
        let mut lam = lambda;
        for (g, &op) in self.ops.iter().enumerate().rev() {
            let psi_in = &traj.states[g];
            let psi_out = &traj.states[g + 1];
            match op {
                Op::Snap { mode, at } => {
                    let mut acc = vec![C64::new(0.0, 0.0); d];
                    for ((l, p), &n) in lam.iter().zip(psi_out.iter()).zip(&self.digits[mode]) {
                        acc[n] += l.conj() * p;
                    }
                    for (k, a) in acc.iter().enumerate() {
                        grad[at + k] = -2.0 * a.im;
                    }
                    self.snap(mode, &params[at..at + d], -1.0, lam.as_mut_slice());
                }
                Op::Disp { mode, at } => {
                    let (x, y) = (params[at], params[at + 1]);
                    let (r, theta) = (x.hypot(y), y.atan2(x));
                    let mut lt = lam.clone();
                    self.disp_in(mode, theta, lt.as_mut_slice());
                    let mut pt = psi_in.clone();
                    self.disp_in(mode, theta, pt.as_mut_slice());
                    let c = self.mode_layouts[mode].cross(lt.as_slice(), pt.as_slice());
                    let (s1, s2) = self.disp_contractions(&c, r);
                    let e_minus = C64::from_polar(1.0, -theta);
                    let e_plus = C64::from_polar(1.0, theta);
                    grad[at] = 2.0 * (e_minus * s1 - e_plus * s2).re;
                    grad[at + 1] = 2.0 * (C64::new(0.0, 1.0) * (e_minus * s1 + e_plus * s2)).re;
                    self.mode_layouts[mode].apply_diagonal(&self.disp_phases(r, -1.0), lt.as_mut_slice());
                    self.disp_out(mode, theta, lt.as_mut_slice());
                    lam = lt;
                }
                Op::Bs { pair, at } => {
                    let (beta, phi) = (params[at], params[at + 1]);
                    let p = self.pairs[pair].0;
                    let mut lt = lam.clone();
                    self.bs_in(pair, phi, lt.as_mut_slice());
                    let mut pt = psi_out.clone();
                    self.bs_in(pair, phi, pt.as_mut_slice());
                    let layout = &self.pair_layouts[pair];
                    let mu = &self.bs_rotation().mu;
                    let mut k = C64::new(0.0, 0.0);
                    for &base in layout.bases() {
                        for (l, &off) in layout.offsets().iter().enumerate() {
                            k += lt[base + off].conj() * mu[l] * pt[base + off];
                        }
                    }
                    grad[at] = 2.0 * (C64::new(0.0, 0.5) * k).re;
                    let n_out = weighted_inner(&lam, psi_out, &self.digits[p]);
                    layout.apply_diagonal(&self.bs_phases(beta, -1.0), lt.as_mut_slice());
                    self.bs_out(pair, phi, lt.as_mut_slice());
                    lam = lt;
                    let n_in = weighted_inner(&lam, psi_in, &self.digits[p]);
                    grad[at + 1] = 2.0 * (C64::new(0.0, 1.0) * (n_out - n_in)).re;
                }
            }
        }
        grad
    }

    /// `S1 = sum C Phi B^dag`, `S2 = sum C Phi B` with
    /// `Phi_ab = e^{-i r (mu_a + mu_b)/2} sinc(r (mu_a - mu_b)/2)`, the
    /// divided differences of `e^{-i r mu}`.
    fn disp_contractions(&self, c: &CMatrix, r: f64) -> (C64, C64) {
        let mu = &self.disp.mu;
        let d = mu.len();
        let half: Vec<C64> = mu.iter().map(|&m| C64::from_polar(1.0, -r * m / 2.0)).collect();
        let u: Vec<f64> = mu.iter().map(|&m| r * m / 2.0).collect();
        let (sin_u, cos_u): (Vec<f64>, Vec<f64>) = u.iter().map(|x| x.sin_cos()).unzip();
        let mut s1 = C64::new(0.0, 0.0);
        let mut s2 = C64::new(0.0, 0.0);
        for b in 0..d {
            for a in 0..d {
                let delta = u[a] - u[b];
                let sc = if delta.abs() < 1e-4 {
                    sinc(delta)
                } else {
                    (sin_u[a] * cos_u[b] - cos_u[a] * sin_u[b]) / delta
                };
                let w = c[(a, b)] * half[a] * half[b] * sc;
                s1 += w * self.b_rot[(b, a)].conj();
                s2 += w * self.b_rot[(a, b)];
            }
        }
        (s1, s2)
    }
}

fn weighted_inner(left: &CVector, right: &CVector, digits: &[usize]) -> C64 {
    left.iter()
        .zip(right.iter())
        .zip(digits)
        .map(|((l, r), &n)| l.conj() * r * n as f64)
        .sum()
}
