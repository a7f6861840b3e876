use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register dimension the dense simulator accepts.
pub const MAX_TOTAL_DIM: usize = 65_536;

/// Register of `num_modes` qumodes, each truncated to `cutoff` Fock levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    num_modes: usize,
    cutoff: usize,
}

impl FockSpace {
    pub fn new(num_modes: usize, cutoff: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::arg("a Fock register needs at least one mode"));
        }
        if cutoff == 0 {
            return Err(Error::arg("Fock cutoff must be positive"));
        }
        let mut dim: usize = 1;
        for _ in 0..num_modes {
            dim = dim
                .checked_mul(cutoff)
                .filter(|&d| d <= MAX_TOTAL_DIM)
                .ok_or_else(|| {
                    Error::Capacity(format!(
                        "{cutoff}^{num_modes} exceeds the dense limit of {MAX_TOTAL_DIM}"
                    ))
                })?;
        }
        Ok(Self { num_modes, cutoff })
    }

    pub fn single_mode(cutoff: usize) -> Result<Self> {
        Self::new(1, cutoff)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn total_dim(&self) -> usize {
        self.cutoff.pow(self.num_modes as u32)
    }

    /// Index distance between neighbouring occupations of `mode`.
    pub fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow(mode as u32)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.num_modes {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "mode {mode} out of range for a {}-mode register",
                self.num_modes
            )))
        }
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.cutoff
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.num_modes).map(|m| self.occupation(index, m)).collect()
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.num_modes {
            return Err(Error::arg(format!(
                "expected {} occupations, got {}",
                self.num_modes,
                occupations.len()
            )));
        }
        let mut index = 0;
        for (mode, &n) in occupations.iter().enumerate() {
            if n >= self.cutoff {
                return Err(Error::arg(format!(
                    "occupation {n} of mode {mode} exceeds cutoff {}",
                    self.cutoff
                )));
            }
            index += n * self.stride(mode);
        }
        Ok(index)
    }

    /// Total photon number of basis state `index`.
    pub fn total_occupation(&self, index: usize) -> usize {
        (0..self.num_modes).map(|m| self.occupation(index, m)).sum()
    }

    pub(crate) fn ensure_same(&self, other: &FockSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "space mismatch: {}x{} vs {}x{}",
                self.num_modes, self.cutoff, other.num_modes, other.cutoff
            )))
        }
    }
}
