use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::output::{format_sig, CsvTable, FileDigest, RunManifest, StateSummary};
use super::solve::{electronic_problem, solve_electronic, solve_vibrational, BackendKind, CircuitFile, SolveOutput};
use super::Cli;
use crate::electronic::{
    compression_report, filter_by_particle_number, jordan_wigner_to_matrix, parse_electronic_hamiltonian, CompressionReport,
};
use crate::error::{Error, Result};
use crate::fock::eigenvalues;
use crate::fragments::{parse_fragment_set, reconstruct_hamiltonian};
use crate::noise::{fidelity_sweep, kraus_sweep, threshold_crossing, NoiseModelKind, NoiseSweepConfig, SweepRow};
use crate::vqd::VqdConfig;

/// `(M, n_e)` rows of the default compression report.
pub const DEFAULT_REPORT_ROWS: [(u32, u32); 4] = [(4, 2), (8, 4), (12, 4), (22, 4)];

fn read_config(manifest: &mut RunManifest, path: Option<&Path>) -> Result<(PathBuf, String)> {
    let path = path.ok_or_else(|| Error::arg("this command needs --config <file>"))?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    manifest.config = Some(FileDigest::of(path)?);
    Ok((path.to_path_buf(), text))
}

fn vqd_config(manifest: &mut RunManifest, path: Option<&Path>) -> Result<VqdConfig> {
    let (path, text) = read_config(manifest, path)?;
    VqdConfig::from_json_str(&text, &path.display().to_string())
}

/// A file, or every `*.json` directly inside a directory in name order.
fn input_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::arg(format!("no .json files in {}", path.display())));
    }
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Level table plus the per-state table for one solved input.
fn solution_rows(
    label: Option<&str>,
    out: &SolveOutput,
    levels: &mut CsvTable,
    states: &mut CsvTable,
) {
    let prefix = |row: Vec<String>| match label {
        Some(l) => std::iter::once(l.to_string()).chain(row).collect(),
        None => row,
    };
    for l in &out.levels {
        levels.push(prefix(vec![
            l.index.to_string(),
            format_sig(l.vqd_energy),
            format_sig(l.oracle_energy),
            format_sig(l.abs_error),
        ]));
    }
    for (i, s) in out.result.states.iter().enumerate() {
        states.push(prefix(vec![
            i.to_string(),
            s.extraction_index.to_string(),
            format_sig(s.energy),
            format_sig(out.oracle[i]),
            format_sig((s.energy - out.oracle[i]).abs()),
            s.converged.to_string(),
        ]));
    }
}

fn headers(label: bool, unit: &str) -> (CsvTable, CsvTable) {
    let lv = [
        "state_index".to_string(),
        format!("vqd_energy_{unit}"),
        format!("oracle_energy_{unit}"),
        format!("abs_error_{unit}"),
    ];
    let st = [
        "state_index".to_string(),
        "extraction_index".to_string(),
        format!("vqd_energy_{unit}"),
        format!("oracle_energy_{unit}"),
        format!("abs_error_{unit}"),
        "converged".to_string(),
    ];
    let with = |cols: &[String]| {
        let mut h: Vec<&str> = Vec::new();
        if label {
            h.push("geometry");
        }
        h.extend(cols.iter().map(|s| s.as_str()));
        CsvTable::new(&h)
    };
    (with(&lv), with(&st))
}

/// Record convergence and threshold failures of one solved input.
fn check_solution(manifest: &mut RunManifest, input: &str, out: &SolveOutput, threshold: Option<f64>) {
    for s in &out.result.states {
        manifest.states.push(StateSummary::from_state(input, s));
        if !s.converged {
            manifest.fail(format!("{input}: state {} stopped on its evaluation budget", s.extraction_index));
        }
    }
    if !out.within(threshold) {
        manifest.fail(format!(
            "{input}: largest state error {:.3e} exceeds the threshold {:.3e}",
            out.worst_error(),
            threshold.unwrap_or(f64::INFINITY)
        ));
    }
}

pub fn cmd_electronic(cli: &Cli, manifest: &mut RunManifest, hamiltonian: &Path, n_e: usize) -> Result<()> {
    let config = vqd_config(manifest, cli.config.as_deref())?;
    let seed = cli.seed.unwrap_or(config.seed);
    manifest.seed = Some(seed);
    let files = input_files(hamiltonian)?;
    for f in &files {
        manifest.inputs.push(FileDigest::of(f)?);
    }
    let multi = hamiltonian.is_dir();
    let results: Vec<Result<SolveOutput>> = files
        .par_iter()
        .map(|f| solve_electronic(&parse_electronic_hamiltonian(f)?, n_e, &config, seed))
        .collect();

    let (mut levels, mut states) = headers(multi, "hartree");
    for (f, r) in files.iter().zip(results) {
        let label = stem(f);
        match r {
            Ok(out) => {
                solution_rows(multi.then_some(label.as_str()), &out, &mut levels, &mut states);
                check_solution(manifest, &label, &out, config.error_threshold);
                manifest.emit_json(&cli.out, &format!("circuits/{label}.json"), &out.ground_circuit)?;
            }
            Err(e) => manifest.fail(format!("{label}: {e}")),
        }
    }
    manifest.emit(&cli.out, "electronic.csv", &levels)?;
    manifest.emit(&cli.out, "electronic_states.csv", &states)?;
    Ok(())
}

pub fn cmd_vibrational(cli: &Cli, manifest: &mut RunManifest, fragments: &Path, backend: BackendKind) -> Result<()> {
    let config = vqd_config(manifest, cli.config.as_deref())?;
    let seed = cli.seed.unwrap_or(config.seed);
    manifest.seed = Some(seed);
    manifest.inputs.push(FileDigest::of(fragments)?);
    let fs = parse_fragment_set(fragments)?;
    let (out, counts) = solve_vibrational(&fs, &config, seed, backend)?;
    let (mut levels, mut states) = headers(false, "cm1");
    solution_rows(None, &out, &mut levels, &mut states);
    let label = stem(fragments);
    check_solution(manifest, &label, &out, config.error_threshold);
    manifest.emit(&cli.out, "vibrational.csv", &levels)?;
    manifest.emit(&cli.out, "vibrational_states.csv", &states)?;
    manifest.emit_json(&cli.out, "gate_counts.json", &counts)?;
    manifest.emit_json(&cli.out, "ground_circuit.json", &out.ground_circuit)?;
    Ok(())
}

fn sweep_table(rows: &[SweepRow], model: NoiseModelKind, threshold: Option<f64>) -> CsvTable {
    let mut t = match model {
        NoiseModelKind::Kraus => CsvTable::new(&["kappa_tau", "energy", "abs_error", "threshold_crossing"]),
        NoiseModelKind::Fidelity => CsvTable::new(&["gate_count", "p", "energy", "abs_error", "threshold_crossing"]),
    };
    // the first crossing of every curve is flagged
    let mut start = 0;
    while start < rows.len() {
        let end = start + rows[start..].iter().take_while(|r| r.gate_count == rows[start].gate_count).count();
        let curve = &rows[start..end];
        let cross = threshold.and_then(|th| threshold_crossing(curve, th));
        for (i, r) in curve.iter().enumerate() {
            let mut row = Vec::with_capacity(5);
            if let Some(n) = r.gate_count {
                row.push(n.to_string());
            }
            row.extend([format_sig(r.x), format_sig(r.energy), format_sig(r.abs_error)]);
            row.push(if cross == Some(i) { "1" } else { "0" }.to_string());
            t.push(row);
        }
        start = end;
    }
    t
}

pub fn cmd_noise_sweep(
    cli: &Cli,
    manifest: &mut RunManifest,
    hamiltonian: Option<&Path>,
    n_e: Option<usize>,
    circuit: Option<&Path>,
    vqd_config_path: Option<&Path>,
) -> Result<()> {
    let (path, text) = read_config(manifest, cli.config.as_deref())?;
    let config = NoiseSweepConfig::from_json_str(&text, &path.display().to_string())?;
    let rows = match config.model {
        NoiseModelKind::Fidelity => {
            let reference = config
                .reference_energy
                .ok_or_else(|| Error::parse(path.display().to_string(), "fidelity model needs reference_energy"))?;
            fidelity_sweep(&config.error_prob_grid, &config.gate_counts, reference)?
        }
        NoiseModelKind::Kraus => {
            let (hpath, n_e) = match (hamiltonian, n_e) {
                (Some(h), Some(n)) => (h, n),
                _ => return Err(Error::arg("the kraus model needs --hamiltonian and --n-e")),
            };
            manifest.inputs.push(FileDigest::of(hpath)?);
            let h = parse_electronic_hamiltonian(hpath)?;
            let circuit = match (circuit, vqd_config_path) {
                (Some(c), _) => {
                    manifest.inputs.push(FileDigest::of(c)?);
                    let text = fs::read_to_string(c).map_err(|e| Error::io(c, e))?;
                    serde_json::from_str::<CircuitFile>(&text)
                        .map_err(|e| Error::parse(c.display().to_string(), e.to_string()))?
                }
                (None, Some(v)) => {
                    manifest.inputs.push(FileDigest::of(v)?);
                    let text = fs::read_to_string(v).map_err(|e| Error::io(v, e))?;
                    let mut vc = VqdConfig::from_json_str(&text, &v.display().to_string())?;
                    vc.k = 1;
                    let seed = cli.seed.unwrap_or(vc.seed);
                    manifest.seed = Some(seed);
                    let out = solve_electronic(&h, n_e, &vc, seed)?;
                    check_solution(manifest, &stem(hpath), &out, vc.error_threshold);
                    out.ground_circuit
                }
                (None, None) => return Err(Error::arg("the kraus model needs --circuit or --vqd-config")),
            };
            let problem = electronic_problem(&h, n_e, circuit.cutoff)?;
            if problem.register.space().num_modes() != circuit.num_modes {
                return Err(Error::InputInconsistency(format!(
                    "circuit has {} modes, the Hamiltonian needs {}",
                    circuit.num_modes,
                    problem.register.space().num_modes()
                )));
            }
            manifest.emit_json(&cli.out, "circuit.json", &circuit)?;
            let rows = kraus_sweep(&circuit.gates, &problem.register, &config.kappa_tau_grid, config.l_max, problem.oracle[0])?;
            let mut sorted: Vec<&SweepRow> = rows.iter().collect();
            sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
            if sorted.windows(2).any(|w| w[1].abs_error < w[0].abs_error) {
                log::warn!("energy error is not monotone in kappa_tau over this grid");
            }
            rows
        }
    };
    manifest.emit(&cli.out, "noise_sweep.csv", &sweep_table(&rows, config.model, config.threshold))?;
    Ok(())
}

/// Parse `M:n_e` pairs.
pub fn parse_rows(rows: &[String]) -> Result<Vec<(u32, u32)>> {
    rows.iter()
        .map(|r| {
            let (m, n) = r.split_once(':').ok_or_else(|| Error::parse("--rows", format!("expected M:n_e, got {r:?}")))?;
            let p = |s: &str| s.trim().parse::<u32>().map_err(|e| Error::parse("--rows", format!("{r:?}: {e}")));
            Ok((p(m)?, p(n)?))
        })
        .collect()
}

pub fn report_table(rows: &[(u32, u32)], cutoff: u64) -> Result<CsvTable> {
    let mut t = CsvTable::new(&CompressionReport::CSV_HEADER);
    for &(m, n_e) in rows {
        let r = compression_report(m, n_e, cutoff)?;
        t.push(vec![
            r.m.to_string(),
            r.n_e.to_string(),
            r.full_dim.to_string(),
            r.restricted_dim.to_string(),
            format_sig(r.ratio),
            r.qumodes_full.to_string(),
            r.qumodes_restricted.to_string(),
        ]);
    }
    Ok(t)
}

pub fn cmd_report(cli: &Cli, manifest: &mut RunManifest, rows: &[String], cutoff: u64) -> Result<()> {
    let rows = if rows.is_empty() { DEFAULT_REPORT_ROWS.to_vec() } else { parse_rows(rows)? };
    let table = report_table(&rows, cutoff)?;
    manifest.emit(&cli.out, "report.csv", &table)?;
    Ok(())
}

pub fn cmd_oracle(
    cli: &Cli,
    manifest: &mut RunManifest,
    hamiltonian: Option<&Path>,
    n_e: Option<usize>,
    fragments: Option<&Path>,
    k: usize,
) -> Result<()> {
    let (values, unit) = match (hamiltonian, fragments) {
        (Some(h), None) => {
            manifest.inputs.push(FileDigest::of(h)?);
            let full = jordan_wigner_to_matrix(&parse_electronic_hamiltonian(h)?)?;
            let h = match n_e {
                Some(n) => filter_by_particle_number(&full, n)?,
                None => full,
            };
            (eigenvalues(&h), "hartree")
        }
        (None, Some(f)) => {
            manifest.inputs.push(FileDigest::of(f)?);
            (eigenvalues(&reconstruct_hamiltonian(&parse_fragment_set(f)?)?), "cm1")
        }
        _ => return Err(Error::arg("give exactly one of --hamiltonian or --fragments")),
    };
    let mut t = CsvTable::new(&["state_index", &format!("energy_{unit}")]);
    for (i, e) in values.iter().take(k).enumerate() {
        t.push(vec![i.to_string(), format_sig(*e)]);
    }
    manifest.emit(&cli.out, "oracle.csv", &t)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_parse() {
        assert_eq!(parse_rows(&["4:2".into(), " 46:26".into()]).unwrap(), vec![(4, 2), (46, 26)]);
        assert!(parse_rows(&["4-2".into()]).is_err());
        assert!(parse_rows(&["4:x".into()]).is_err());
    }

    #[test]
    fn report_examples() {
        let t = report_table(&[(46, 26), (2, 1)], 16).unwrap();
        assert_eq!(t.rows[0][6], "11");
        assert_eq!(t.rows[1][2..5], ["4".to_string(), "2".into(), "2.00000000000".into()]);
    }

    #[test]
    fn crossing_flags_each_curve() {
        let rows = fidelity_sweep(&[1e-6, 1e-4, 1e-2], &[26, 7000], 100.0).unwrap();
        let t = sweep_table(&rows, NoiseModelKind::Fidelity, Some(0.5));
        let flags: Vec<&str> = t.rows.iter().map(|r| r[4].as_str()).collect();
        assert_eq!(flags, ["0", "0", "1", "1", "0", "0"]);
    }
}
