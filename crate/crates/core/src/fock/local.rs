use super::{CMatrix, CVector, FockSpace, C64};
use crate::error::{Error, Result};

/// Index bookkeeping for an operator acting on a subset of modes.
///
/// The local basis orders the listed modes little-endian as well:
/// local index `l = n[modes[0]] + d * n[modes[1]] + ...`.
#[derive(Clone, Debug)]
pub struct LocalLayout {
    offsets: Vec<usize>,
    bases: Vec<usize>,
    whole: bool,
}

impl LocalLayout {
    pub fn new(space: &FockSpace, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::arg("local operator needs at least one mode"));
        }
        for (i, &m) in modes.iter().enumerate() {
            space.check_mode(m)?;
            if modes[..i].contains(&m) {
                return Err(Error::arg(format!("mode {m} listed twice")));
            }
        }
        let d = space.cutoff();
        let local_dim = d.pow(modes.len() as u32);
        let offsets: Vec<usize> = (0..local_dim)
            .map(|l| {
                let mut rest = l;
                let mut off = 0;
                for &m in modes {
                    off += (rest % d) * space.stride(m);
                    rest /= d;
                }
                off
            })
            .collect();
        let bases = (0..space.total_dim())
            .filter(|&i| modes.iter().all(|&m| space.occupation(i, m) == 0))
            .collect();
        let whole = local_dim == space.total_dim() && offsets.iter().enumerate().all(|(l, &o)| l == o);
        Ok(Self { offsets, bases, whole })
    }

    pub fn local_dim(&self) -> usize {
        self.offsets.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Register indices whose local digits are all zero.
    pub fn bases(&self) -> &[usize] {
        &self.bases
    }

    /// `v <- (U (x) I) v` in place.
    pub fn apply(&self, u: &CMatrix, v: &mut [C64]) {
        if self.whole {
            let out = u * CVector::from_column_slice(v);
            v.copy_from_slice(out.as_slice());
            return;
        }
        let n = self.local_dim();
        let mut buf = CVector::zeros(n);
        let mut out = CVector::zeros(n);
        for &b in &self.bases {
            for (l, &off) in self.offsets.iter().enumerate() {
                buf[l] = v[b + off];
            }
            u.mul_to(&buf, &mut out);
            for (l, &off) in self.offsets.iter().enumerate() {
                v[b + off] = out[l];
            }
        }
    }

    /// `v <- (diag(phases) (x) I) v` in place.
    pub fn apply_diagonal(&self, phases: &[C64], v: &mut [C64]) {
        for &b in &self.bases {
            for (l, &off) in self.offsets.iter().enumerate() {
                v[b + off] *= phases[l];
            }
        }
    }

    /// `C[a][b] = sum_rest conj(left[a, rest]) * right[b, rest]`, the local
    /// cross-correlation used to contract `<left| (X (x) I) |right>` as
    /// `sum_ab X[a][b] C[a][b]`.
    pub fn cross(&self, left: &[C64], right: &[C64]) -> CMatrix {
        let n = self.local_dim();
        let mut c = CMatrix::zeros(n, n);
        for &base in &self.bases {
            for a in 0..n {
                let la = left[base + self.offsets[a]].conj();
                if la == C64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..n {
                    c[(a, b)] += la * right[base + self.offsets[b]];
                }
            }
        }
        c
    }
}

/// Embed a local operator on `modes` into the full register with identity
/// on all other modes.
pub fn embed_local(space: &FockSpace, modes: &[usize], local: &CMatrix) -> Result<CMatrix> {
    let layout = LocalLayout::new(space, modes)?;
    let n = layout.local_dim();
    if local.nrows() != n || local.ncols() != n {
        return Err(Error::arg(format!(
            "local operator is {}x{}, expected {n}x{n}",
            local.nrows(),
            local.ncols()
        )));
    }
    let dim = space.total_dim();
    let mut full = CMatrix::zeros(dim, dim);
    for &b in layout.bases() {
        for (r, &ro) in layout.offsets().iter().enumerate() {
            for (c, &co) in layout.offsets().iter().enumerate() {
                full[(b + ro, b + co)] = local[(r, c)];
            }
        }
    }
    Ok(full)
}
