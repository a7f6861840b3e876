use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{CMatrix, C64, DenseHamiltonian, FockSpace, HamiltonianMetadata};

/// Dense Jordan-Wigner matrices are built for at most this many spin orbitals.
pub const MAX_JW_ORBITALS: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderOp {
    pub orbital: usize,
    pub dagger: bool,
}

/// `coeff * ops[0] ops[1] ...`; the rightmost factor acts first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermionTerm {
    pub coeff: f64,
    pub ops: Vec<LadderOp>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ElectronicMetadata {
    #[serde(default)]
    pub system: String,
    #[serde(default)]
    pub geometry: String,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// Second-quantized Hamiltonian over `num_spin_orbitals` spin orbitals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermionicHamiltonian {
    pub num_spin_orbitals: usize,
    pub terms: Vec<FermionTerm>,
    #[serde(default)]
    pub metadata: ElectronicMetadata,
}

impl FermionicHamiltonian {
    pub fn new(num_spin_orbitals: usize, terms: Vec<FermionTerm>) -> Result<Self> {
        let h = Self {
            num_spin_orbitals,
            terms,
            metadata: ElectronicMetadata::default(),
        };
        h.validate("hamiltonian")?;
        Ok(h)
    }

    pub fn from_json_str(text: &str, context: &str) -> Result<Self> {
        let h: FermionicHamiltonian = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                context,
                format!("line {} column {}: {}", e.line(), e.column(), e),
            )
        })?;
        h.validate(context)?;
        Ok(h)
    }

    fn validate(&self, context: &str) -> Result<()> {
        if self.num_spin_orbitals == 0 {
            return Err(Error::parse(context, "num_spin_orbitals must be positive"));
        }
        for (t, term) in self.terms.iter().enumerate() {
            if !term.coeff.is_finite() {
                return Err(Error::parse(context, format!("terms[{t}].coeff is not finite")));
            }
            for (k, op) in term.ops.iter().enumerate() {
                if op.orbital >= self.num_spin_orbitals {
                    return Err(Error::parse(
                        context,
                        format!(
                            "terms[{t}].ops[{k}].orbital = {} out of range for {} spin orbitals",
                            op.orbital, self.num_spin_orbitals
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn description(&self) -> String {
        match (self.metadata.system.as_str(), self.metadata.geometry.as_str()) {
            ("", "") => "electronic hamiltonian".to_string(),
            (s, "") => s.to_string(),
            (s, g) => format!("{s} [{g}]"),
        }
    }
}

/// Read and validate an electronic Hamiltonian JSON file.
pub fn parse_electronic_hamiltonian(path: impl AsRef<Path>) -> Result<FermionicHamiltonian> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FermionicHamiltonian::from_json_str(&text, &path.display().to_string())
}

/// Apply a product of ladder operators to occupation bitstring `state`.
/// Returns the resulting bitstring and sign, or `None` if it annihilates.
fn apply_ops(ops: &[LadderOp], mut state: u64) -> Option<(u64, f64)> {
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let bit = 1u64 << op.orbital;
        let occupied = state & bit != 0;
        if occupied == op.dagger {
            return None;
        }
        // Z string over lower orbitals
        if (state & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        state ^= bit;
    }
    Some((state, sign))
}

/// Jordan-Wigner matrix over all `2^M` occupation bitstrings. Bit `j` of a
/// basis label is the occupation of spin orbital `j`; the register is `M`
/// two-level modes, so the label equals the register index.
pub fn jordan_wigner_to_matrix(h: &FermionicHamiltonian) -> Result<DenseHamiltonian> {
    let m = h.num_spin_orbitals;
    if m > MAX_JW_ORBITALS {
        return Err(Error::Capacity(format!(
            "{m} spin orbitals exceed the dense Jordan-Wigner limit of {MAX_JW_ORBITALS}; supply a pre-filtered Hamiltonian"
        )));
    }
    let dim = 1usize << m;
    let mut matrix = CMatrix::zeros(dim, dim);
    for term in &h.terms {
        for x in 0..dim as u64 {
            if let Some((y, sign)) = apply_ops(&term.ops, x) {
                matrix[(y as usize, x as usize)] += C64::new(term.coeff * sign, 0.0);
            }
        }
    }
    let space = FockSpace::new(m, 2)?;
    DenseHamiltonian::new(
        space,
        matrix,
        (0..dim as u64).collect(),
        HamiltonianMetadata {
            num_spin_orbitals: Some(m),
            num_electrons: None,
            source: h.description(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::eigenvalues;

    fn op(orbital: usize, dagger: bool) -> LadderOp {
        LadderOp { orbital, dagger }
    }

    #[test]
    fn single_number_term() {
        let h = FermionicHamiltonian::new(1, vec![FermionTerm { coeff: 1.0, ops: vec![op(0, true), op(0, false)] }]).unwrap();
        let m = jordan_wigner_to_matrix(&h).unwrap();
        assert_eq!(m.matrix()[(0, 0)].re, 0.0);
        assert_eq!(m.matrix()[(1, 1)].re, 1.0);
        assert_eq!(m.matrix()[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn hopping_spectrum() {
        let t = 0.7;
        let h = FermionicHamiltonian::new(
            2,
            vec![
                FermionTerm { coeff: t, ops: vec![op(0, true), op(1, false)] },
                FermionTerm { coeff: t, ops: vec![op(1, true), op(0, false)] },
            ],
        )
        .unwrap();
        let m = jordan_wigner_to_matrix(&h).unwrap();
        // hand-built: only |01> <-> |10> couple
        let mut expect = CMatrix::zeros(4, 4);
        expect[(1, 2)] = C64::new(t, 0.0);
        expect[(2, 1)] = C64::new(t, 0.0);
        assert_eq!(m.matrix(), &expect);
        let vals = eigenvalues(&m);
        for (v, e) in vals.iter().zip([-t, 0.0, 0.0, t]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_terms_give_zero_matrix() {
        let h = FermionicHamiltonian::new(3, vec![]).unwrap();
        let m = jordan_wigner_to_matrix(&h).unwrap();
        assert_eq!(m.dimension(), 8);
        assert!(m.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn anticommutation_sign() {
        // a0^dag a1^dag |00> = |11>, a1^dag a0^dag |00> = -|11>
        assert_eq!(apply_ops(&[op(0, true), op(1, true)], 0), Some((3, 1.0)));
        assert_eq!(apply_ops(&[op(1, true), op(0, true)], 0), Some((3, -1.0)));
        assert_eq!(apply_ops(&[op(0, false)], 0), None);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let h = FermionicHamiltonian::new(2, vec![FermionTerm { coeff: 1.0, ops: vec![op(0, true), op(1, false)] }]).unwrap();
        assert!(matches!(jordan_wigner_to_matrix(&h), Err(Error::InputInconsistency(_))));
    }

    #[test]
    fn capacity_limit() {
        let h = FermionicHamiltonian::new(15, vec![]).unwrap();
        assert!(matches!(jordan_wigner_to_matrix(&h), Err(Error::Capacity(_))));
    }

    #[test]
    fn parse_minimal_and_errors() {
        let ok = r#"{"num_spin_orbitals": 2, "terms": [{"coeff": 0.5, "ops": [{"orbital": 1, "dagger": true}, {"orbital": 1, "dagger": false}]}], "metadata": {"system": "toy", "geometry": "none"}}"#;
        let h = FermionicHamiltonian::from_json_str(ok, "ok.json").unwrap();
        assert_eq!(h.terms.len(), 1);
        assert_eq!(h.metadata.system, "toy");

        let empty = r#"{"num_spin_orbitals": 2, "terms": []}"#;
        assert!(FermionicHamiltonian::from_json_str(empty, "e").unwrap().terms.is_empty());

        let bad_index = r#"{"num_spin_orbitals": 2, "terms": [{"coeff": 1.0, "ops": [{"orbital": 2, "dagger": true}]}]}"#;
        let err = FermionicHamiltonian::from_json_str(bad_index, "bad.json").unwrap_err();
        assert!(err.to_string().contains("terms[0].ops[0].orbital"), "{err}");

        let missing = r#"{"terms": []}"#;
        assert!(matches!(FermionicHamiltonian::from_json_str(missing, "m"), Err(Error::Parse { .. })));

        let wrong_type = "{\"num_spin_orbitals\": 2,\n \"terms\": [{\"coeff\": \"x\", \"ops\": []}]}";
        let err = FermionicHamiltonian::from_json_str(wrong_type, "w").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
