use std::path::{Path, PathBuf};

use qumvqd::fragments::{parse_fragment_set, reconstruct_hamiltonian, FragmentSet};
use qumvqd::gates::{beamsplitter_gate, displacement_gate, snap_gate};
use qumvqd::vqd::{run_vqd, AnsatzSpec, DenseBackend, FragmentBackend, OptimizerConfig};
use qumvqd::{exact_diagonalize, expectation, number_op, FockSpace, StateVector, C64};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

#[test]
fn fragment_files_round_trip() {
    let fs = parse_fragment_set(fixture("vibrational/two_mode.json")).unwrap();
    let again = FragmentSet::from_json_str(&fs.to_json_string().unwrap(), "round trip").unwrap();
    let (a, b) = (reconstruct_hamiltonian(&fs).unwrap(), reconstruct_hamiltonian(&again).unwrap());
    assert_eq!(a.as_operator().matrix(), b.as_operator().matrix());
}

#[test]
fn beam_splitter_conserves_total_photons() {
    let space = FockSpace::new(2, 10).unwrap();
    let total = |psi: &StateVector| {
        expectation(psi, &number_op(&space, 0).unwrap()).unwrap() + expectation(psi, &number_op(&space, 1).unwrap()).unwrap()
    };
    let psi = StateVector::vacuum(space)
        .apply(&displacement_gate(&space, 0, C64::new(0.4, 0.2)).unwrap())
        .unwrap()
        .apply(&snap_gate(&space, 0, &[0.0, 0.3, -0.7, 1.1, 0.2, 0.0, 0.5, -0.1, 0.9, 0.0]).unwrap())
        .unwrap();
    let mixed = psi.apply(&beamsplitter_gate(&space, 0, 1, 0.8, 0.3).unwrap()).unwrap();
    assert!((mixed.norm() - 1.0).abs() < 1e-12);
    assert!((total(&psi) - total(&mixed)).abs() < 1e-10);
}

#[test]
fn both_backends_find_the_diagonal_ground_state() {
    let fs = parse_fragment_set(fixture("vibrational/single_diagonal.json")).unwrap();
    let h = reconstruct_hamiltonian(&fs).unwrap();
    let exact = exact_diagonalize(&h).unwrap()[0].value;
    assert_eq!(exact, 750.0);
    let ansatz = AnsatzSpec::new(*h.space(), 4);
    let cfg = OptimizerConfig { init_scale: 1.0, ..Default::default() };
    let frag = run_vqd(&ansatz, &FragmentBackend::new(&fs).unwrap(), 1, &[0.0], &cfg, 1).unwrap();
    let dense = run_vqd(&ansatz, &DenseBackend::new(h), 1, &[0.0], &cfg, 1).unwrap();
    assert!((frag.energies()[0] - exact).abs() < 1e-6);
    assert!((dense.energies()[0] - exact).abs() < 1e-6);
}
