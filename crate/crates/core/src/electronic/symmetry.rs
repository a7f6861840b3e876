use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{CMatrix, C64, DenseHamiltonian, FockSpace, HamiltonianMetadata};

/// Off-sector elements larger than this mean the Hamiltonian does not
/// conserve particle number.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub fn hamming_weight(index: u64) -> u32 {
    index.count_ones()
}

/// Exact binomial coefficient, `None` on u128 overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiply
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Smallest `q` with `d^q >= x`.
pub fn qumodes_needed(x: u128, d: u64) -> u32 {
    let mut q = 0;
    let mut cap: u128 = 1;
    while cap < x {
        cap = cap.saturating_mul(d as u128);
        q += 1;
    }
    q
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub m: u32,
    pub n_e: u32,
    pub full_dim: u128,
    pub restricted_dim: u128,
    pub ratio: f64,
    pub qumodes_full: u32,
    pub qumodes_restricted: u32,
}

impl CompressionReport {
    pub const CSV_HEADER: [&'static str; 7] =
        ["M", "n_e", "full_dim", "restricted_dim", "ratio", "qumodes_full", "qumodes_restricted"];
}

pub fn compression_report(m: u32, n_e: u32, d: u64) -> Result<CompressionReport> {
    if d < 2 {
        return Err(Error::arg(format!("cutoff d must be at least 2, got {d}")));
    }
    if n_e > m {
        return Err(Error::arg(format!("n_e = {n_e} exceeds M = {m}")));
    }
    if m >= 128 {
        return Err(Error::arg(format!("M = {m} too large for exact dimension counting")));
    }
    let full_dim = 1u128 << m;
    let restricted_dim = binomial(m as u64, n_e as u64)
        .ok_or_else(|| Error::arg(format!("C({m}, {n_e}) overflows")))?;
    Ok(CompressionReport {
        m,
        n_e,
        full_dim,
        restricted_dim,
        ratio: full_dim as f64 / restricted_dim as f64,
        qumodes_full: qumodes_needed(full_dim, d),
        qumodes_restricted: qumodes_needed(restricted_dim, d),
    })
}

/// Leading-order approximation of C(M, M/2).
pub fn stirling_central_binomial(m: u32) -> Result<f64> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::arg(format!("M must be even and at least 2, got {m}")));
    }
    let m = m as f64;
    Ok((2.0 / (std::f64::consts::PI * m)).sqrt() * 2f64.powf(m))
}

/// Restrict a full `2^M` Jordan-Wigner matrix to the `n_e`-electron sector.
/// Basis labels are kept in ascending order.
pub fn filter_by_particle_number(h: &DenseHamiltonian, n_e: usize) -> Result<DenseHamiltonian> {
    let m = h
        .metadata()
        .num_spin_orbitals
        .ok_or_else(|| Error::arg("hamiltonian has no spin-orbital count"))?;
    let dim = h.dimension();
    let full_basis = m < 64
        && dim == 1usize << m
        && h.basis_labels().iter().enumerate().all(|(i, &l)| l == i as u64);
    if !full_basis {
        return Err(Error::arg("particle-number filtering needs the full 2^M basis"));
    }
    if n_e > m {
        return Err(Error::arg(format!("n_e = {n_e} exceeds M = {m}")));
    }
    let weights: Vec<u32> = (0..dim as u64).map(hamming_weight).collect();
    let a = h.matrix();
    for col in 0..dim {
        for row in 0..dim {
            if weights[row] != weights[col] {
                let magnitude = a[(row, col)].norm();
                if magnitude > SYMMETRY_TOL {
                    return Err(Error::SymmetryViolation { row, col, magnitude });
                }
            }
        }
    }
    let keep: Vec<usize> = (0..dim).filter(|&i| weights[i] as usize == n_e).collect();
    let sub = CMatrix::from_fn(keep.len(), keep.len(), |r, c| a[(keep[r], keep[c])]);
    let mut meta = h.metadata().clone();
    meta.num_electrons = Some(n_e);
    DenseHamiltonian::new(
        FockSpace::single_mode(keep.len())?,
        sub,
        keep.iter().map(|&i| i as u64).collect(),
        meta,
    )
}

/// A restricted Hamiltonian placed on a qumode register of cutoff `d`.
/// Register indices `0..physical_dim` carry the restricted basis; the
/// remaining levels are padded with a constant diagonal energy above the
/// physical spectrum so they cannot host low-lying states.
#[derive(Clone, Debug)]
pub struct RegisterEmbedding {
    pub hamiltonian: DenseHamiltonian,
    pub physical_dim: usize,
    pub padding_energy: f64,
    pub labels: Vec<u64>,
}

pub fn embed_in_register(h: &DenseHamiltonian, cutoff: usize, padding: Option<f64>) -> Result<RegisterEmbedding> {
    if cutoff < 2 {
        return Err(Error::arg(format!("cutoff must be at least 2, got {cutoff}")));
    }
    let n = h.dimension();
    let modes = qumodes_needed(n as u128, cutoff as u64).max(1) as usize;
    let space = FockSpace::new(modes, cutoff)?;
    let total = space.total_dim();
    let padding_energy = match padding {
        Some(p) if p.is_finite() => p,
        Some(p) => return Err(Error::arg(format!("padding energy {p} is not finite"))),
        None => h.gershgorin_bounds().1 + 1.0,
    };
    let mut m = CMatrix::zeros(total, total);
    m.view_mut((0, 0), (n, n)).copy_from(h.matrix());
    for i in n..total {
        m[(i, i)] = C64::new(padding_energy, 0.0);
    }
    let meta = HamiltonianMetadata {
        num_spin_orbitals: h.metadata().num_spin_orbitals,
        num_electrons: None,
        source: h.metadata().source.clone(),
    };
    let hamiltonian = DenseHamiltonian::new(space, m, (0..total as u64).collect(), meta)?;
    Ok(RegisterEmbedding {
        hamiltonian,
        physical_dim: n,
        padding_energy,
        labels: h.basis_labels().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electronic::{jordan_wigner_to_matrix, parse_electronic_hamiltonian, FermionTerm, FermionicHamiltonian, LadderOp};
    use crate::fock::eigenvalues;
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn fixture(name: &str) -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/h2_sto3g").join(name)
    }

    fn big_binomial(n: u64, k: u64) -> BigUint {
        let mut acc = BigUint::one();
        for i in 0..k {
            acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        acc
    }

    fn op(orbital: usize, dagger: bool) -> LadderOp {
        LadderOp { orbital, dagger }
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_weight(5), 2);
        assert_eq!(hamming_weight(0), 0);
        assert_eq!(hamming_weight(255), 8);
    }

    #[test]
    fn binomial_matches_bigint() {
        for n in [0u64, 1, 4, 12, 22, 46, 100, 120] {
            for k in 0..=n {
                let exact = big_binomial(n, k);
                assert_eq!(binomial(n, k).map(BigUint::from), Some(exact), "C({n},{k})");
            }
        }
        assert_eq!(binomial(3, 5), Some(0));
    }

    #[test]
    fn table_rows() {
        let r = compression_report(4, 2, 16).unwrap();
        assert_eq!((r.full_dim, r.restricted_dim, r.qumodes_full, r.qumodes_restricted), (16, 6, 1, 1));
        assert!((r.ratio - 16.0 / 6.0).abs() < 1e-12);
        let r = compression_report(12, 4, 16).unwrap();
        assert_eq!(r.restricted_dim, 495);
        let r = compression_report(22, 4, 16).unwrap();
        assert_eq!(r.restricted_dim, 7315);
        assert!((r.ratio - 573.4).abs() < 0.5);
        assert_eq!(r.qumodes_restricted, 4);
        assert_eq!(r.qumodes_full, 6);
        let r = compression_report(46, 26, 16).unwrap();
        assert_eq!(r.qumodes_restricted, 11);
    }

    #[test]
    fn compression_report_arguments() {
        assert!(compression_report(4, 5, 16).is_err());
        assert!(compression_report(4, 2, 1).is_err());
        assert!(compression_report(200, 2, 16).is_err());
        assert_eq!(compression_report(0, 0, 2).unwrap().restricted_dim, 1);
    }

    #[test]
    fn qumodes_boundaries() {
        assert_eq!(qumodes_needed(1, 16), 0);
        assert_eq!(qumodes_needed(16, 16), 1);
        assert_eq!(qumodes_needed(17, 16), 2);
        assert_eq!(qumodes_needed(256, 16), 2);
        assert_eq!(qumodes_needed(257, 16), 3);
    }

    #[test]
    fn stirling_examples() {
        let s4 = stirling_central_binomial(4).unwrap();
        assert!((s4 - (2.0 / (4.0 * std::f64::consts::PI)).sqrt() * 16.0).abs() < 1e-12);
        assert!((s4 - 6.383).abs() < 1e-3);
        assert!((stirling_central_binomial(2).unwrap() - 2.257).abs() < 1e-3);
        assert!(stirling_central_binomial(5).is_err());
        assert!(stirling_central_binomial(0).is_err());
    }

    #[test]
    fn stirling_ratio_approaches_one() {
        let ratio = |m: u32| {
            big_binomial(m as u64, m as u64 / 2).to_f64().unwrap() / stirling_central_binomial(m).unwrap()
        };
        let r100 = ratio(100);
        assert!((0.99..=1.0).contains(&r100), "{r100}");
        let seq: Vec<f64> = [10, 20, 50, 100].iter().map(|&m| ratio(m)).collect();
        assert!(seq.windows(2).all(|w| w[1] > w[0]));
        let rel: Vec<f64> = (1..=32).map(|h| (1.0 - ratio(2 * h)).abs()).collect();
        assert!(rel.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn dimension_bookkeeping() {
        for m in 0..=60u64 {
            let sum: u128 = (0..=m).map(|k| binomial(m, k).unwrap()).sum();
            assert_eq!(sum, 1u128 << m);
        }
    }

    #[test]
    fn number_operator_is_hamming_weight() {
        for m in 1..=6 {
            let terms = (0..m).map(|j| FermionTerm { coeff: 1.0, ops: vec![op(j, true), op(j, false)] }).collect();
            let h = jordan_wigner_to_matrix(&FermionicHamiltonian::new(m, terms).unwrap()).unwrap();
            for r in 0..h.dimension() {
                for c in 0..h.dimension() {
                    let expect = if r == c { hamming_weight(r as u64) as f64 } else { 0.0 };
                    assert_eq!(h.matrix()[(r, c)], C64::new(expect, 0.0));
                }
            }
        }
    }

    #[test]
    fn sector_dimensions() {
        let h = jordan_wigner_to_matrix(&FermionicHamiltonian::new(4, vec![]).unwrap()).unwrap();
        assert_eq!(filter_by_particle_number(&h, 2).unwrap().dimension(), 6);
        let h2 = jordan_wigner_to_matrix(&FermionicHamiltonian::new(2, vec![]).unwrap()).unwrap();
        let vac = filter_by_particle_number(&h2, 0).unwrap();
        assert_eq!(vac.basis_labels(), &[0]);
        assert!(filter_by_particle_number(&h2, 3).is_err());
        let h12 = jordan_wigner_to_matrix(&FermionicHamiltonian::new(12, vec![]).unwrap()).unwrap();
        let f = filter_by_particle_number(&h12, 4).unwrap();
        assert_eq!(f.dimension(), 495);
        assert_eq!(f.dimension() as u128, compression_report(12, 4, 16).unwrap().restricted_dim);
        assert!(f.basis_labels().windows(2).all(|w| w[0] < w[1]));
        assert!(f.basis_labels().iter().all(|&l| hamming_weight(l) == 4));
    }

    #[test]
    fn symmetry_violation_detected() {
        let h = FermionicHamiltonian::new(
            2,
            vec![
                FermionTerm { coeff: 0.3, ops: vec![op(0, true)] },
                FermionTerm { coeff: 0.3, ops: vec![op(0, false)] },
            ],
        )
        .unwrap();
        let m = jordan_wigner_to_matrix(&h).unwrap();
        match filter_by_particle_number(&m, 1) {
            Err(Error::SymmetryViolation { magnitude, .. }) => assert!((magnitude - 0.3).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tiny_off_sector_noise_is_dropped() {
        let mut m = CMatrix::identity(4, 4);
        m[(0, 1)] = C64::new(1e-12, 0.0);
        m[(1, 0)] = C64::new(1e-12, 0.0);
        let h = DenseHamiltonian::new(
            FockSpace::new(2, 2).unwrap(),
            m,
            (0..4).collect(),
            HamiltonianMetadata { num_spin_orbitals: Some(2), ..Default::default() },
        )
        .unwrap();
        assert_eq!(filter_by_particle_number(&h, 1).unwrap().dimension(), 2);
    }

    #[test]
    fn h2_fixture_ground_state() {
        let f = parse_electronic_hamiltonian(fixture("h2_r0.735.json")).unwrap();
        assert_eq!(f.num_spin_orbitals, 4);
        let full = jordan_wigner_to_matrix(&f).unwrap();
        let restricted = filter_by_particle_number(&full, 2).unwrap();
        let e0 = eigenvalues(&restricted)[0];
        assert!((e0 - -1.137).abs() < 1e-3, "{e0}");
        let fci = f.metadata.extra["fci_energy_hartree"].as_f64().unwrap();
        assert!((e0 - fci).abs() < 1e-8);
    }

    #[test]
    fn register_embedding_keeps_low_spectrum() {
        let f = parse_electronic_hamiltonian(fixture("h2_r0.735.json")).unwrap();
        let restricted = filter_by_particle_number(&jordan_wigner_to_matrix(&f).unwrap(), 2).unwrap();
        let emb = embed_in_register(&restricted, 16, None).unwrap();
        assert_eq!(emb.hamiltonian.dimension(), 16);
        assert_eq!(emb.physical_dim, 6);
        let phys = eigenvalues(&restricted);
        let all = eigenvalues(&emb.hamiltonian);
        for (a, b) in phys.iter().zip(&all) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(all[6..].iter().all(|&e| (e - emb.padding_energy).abs() < 1e-12));
        assert!(emb.padding_energy > phys[5]);
        // 7315 states need four cutoff-16 modes but a dense 16^4 register is
        // beyond the simulator's capacity
        let big = DenseHamiltonian::from_real_diagonal(&vec![0.0; 300]).unwrap();
        let e = embed_in_register(&big, 16, Some(5.0)).unwrap();
        assert_eq!(e.hamiltonian.space().num_modes(), 3);
        assert_eq!(e.hamiltonian.matrix()[(299, 299)].re, 0.0);
        assert_eq!(e.hamiltonian.matrix()[(300, 300)].re, 5.0);
    }

    fn random_conserving(m: usize, seed: u64) -> FermionicHamiltonian {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for p in 0..m {
            for q in 0..=p {
                let c: f64 = rng.random_range(-1.0..1.0);
                terms.push(FermionTerm { coeff: c, ops: vec![op(p, true), op(q, false)] });
                if p != q {
                    terms.push(FermionTerm { coeff: c, ops: vec![op(q, true), op(p, false)] });
                }
            }
        }
        for _ in 0..m {
            let idx: Vec<usize> = (0..4).map(|_| rng.random_range(0..m)).collect();
            let c: f64 = rng.random_range(-0.5..0.5);
            let (p, q, r, s) = (idx[0], idx[1], idx[2], idx[3]);
            terms.push(FermionTerm { coeff: c, ops: vec![op(p, true), op(q, true), op(r, false), op(s, false)] });
            terms.push(FermionTerm { coeff: c, ops: vec![op(s, true), op(r, true), op(q, false), op(p, false)] });
        }
        FermionicHamiltonian::new(m, terms).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn sectors_partition_spectrum(m in 1usize..=6, seed in any::<u64>()) {
            let full = jordan_wigner_to_matrix(&random_conserving(m, seed)).unwrap();
            let mut sectors = Vec::new();
            let mut dims = 0usize;
            for n_e in 0..=m {
                let f = filter_by_particle_number(&full, n_e).unwrap();
                prop_assert_eq!(f.dimension() as u128, compression_report(m as u32, n_e as u32, 16).unwrap().restricted_dim);
                dims += f.dimension();
                sectors.extend(eigenvalues(&f));
            }
            prop_assert_eq!(dims, 1 << m);
            sectors.sort_by(f64::total_cmp);
            let spectrum = eigenvalues(&full);
            for (a, b) in sectors.iter().zip(&spectrum) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn hamming_matches_bit_loop(x in any::<u64>()) {
            let naive = (0..64).filter(|b| x >> b & 1 == 1).count() as u32;
            prop_assert_eq!(hamming_weight(x), naive);
        }
    }
}
