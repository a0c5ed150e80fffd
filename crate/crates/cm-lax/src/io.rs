//! Table and document writers for trajectories, invariant logs,
//! spectral records, converted states, and bracket matrices.
//!
//! CSV output is deliberately boring: a header row, comma separators,
//! LF line endings, and floats printed with Rust's shortest-roundtrip
//! formatting so every value reparses to the exact bits that were
//! written. Complex values occupy adjacent `_re`/`_im` columns. JSON
//! output mirrors the same data with `[re, im]` pairs, reusing the
//! config schema's state shape.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{state_to_schema, CxPair, InitialData};
use crate::dynamics;
use crate::flows::Trajectory;
use crate::ham::HamiltonianSpec;
use crate::lax::SpectralRecord;
use crate::phase::PhasePoint;

/// One float, shortest string that reparses to the same bits.
fn fmt(x: f64) -> String {
    format!("{x}")
}

fn pair(z: Complex64) -> CxPair {
    [z.re, z.im]
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// Column names for one flattened state, in the same order as the
/// flattened coordinates: per-matrix row-major, each coordinate
/// expanded to `_re`/`_im`. Quiver charts list `x, y, u, v`; particle
/// charts list `q, p, a, b`.
pub fn state_headers(template: &PhasePoint) -> Vec<String> {
    fn push_block(names: &mut Vec<String>, prefix: &str, nrows: usize, ncols: usize) {
        for r in 0..nrows {
            for c in 0..ncols {
                names.push(format!("{prefix}_{r}_{c}"));
            }
        }
    }
    let mut names = Vec::new();
    match template {
        PhasePoint::Quiver(d) => {
            let (n, k) = (d.n(), d.k());
            push_block(&mut names, "x", n, n);
            push_block(&mut names, "y", n, n);
            push_block(&mut names, "u", n, k);
            push_block(&mut names, "v", k, n);
        }
        PhasePoint::Particle(s) => {
            let (n, k) = (s.n(), s.k());
            for i in 0..n {
                names.push(format!("q_{i}"));
            }
            for i in 0..n {
                names.push(format!("p_{i}"));
            }
            push_block(&mut names, "a", n, k);
            push_block(&mut names, "b", n, k);
        }
    }
    names
        .into_iter()
        .flat_map(|name| [format!("{name}_re"), format!("{name}_im")])
        .collect()
}

fn invariant_headers(hamiltonians: &[HamiltonianSpec]) -> Vec<String> {
    hamiltonians
        .iter()
        .flat_map(|h| {
            let label = h.label();
            [format!("{label}_re"), format!("{label}_im")]
        })
        .collect()
}

fn complex_cells(values: &[Complex64]) -> Vec<String> {
    values
        .iter()
        .flat_map(|z| [fmt(z.re), fmt(z.im)])
        .collect()
}

/// Full trajectory table: `t`, the flattened state coordinates, then
/// one `_re`/`_im` column pair per configured invariant.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    let mut header = vec!["t".to_string()];
    header.extend(state_headers(&traj.states[0]));
    header.extend(invariant_headers(&traj.invariant_log.hamiltonians));
    push_row(&mut out, &header);
    for (idx, state) in traj.states.iter().enumerate() {
        let mut cells = vec![fmt(traj.times[idx])];
        cells.extend(complex_cells(&dynamics::flatten(state)));
        cells.extend(complex_cells(&traj.invariant_log.values[idx]));
        push_row(&mut out, &cells);
    }
    out
}

/// Invariant log only: `t` plus one column pair per Hamiltonian.
pub fn invariants_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    let mut header = vec!["t".to_string()];
    header.extend(invariant_headers(&traj.invariant_log.hamiltonians));
    push_row(&mut out, &header);
    for (idx, values) in traj.invariant_log.values.iter().enumerate() {
        let mut cells = vec![fmt(traj.times[idx])];
        cells.extend(complex_cells(values));
        push_row(&mut out, &cells);
    }
    out
}

/// Spectral log: one row per recorded time per grid point, columns
/// `t, z_re, z_im`, then characteristic-polynomial coefficients in
/// descending degree (the leading coefficient included, so rows are
/// self-describing).
pub fn spectral_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    let records = &traj.invariant_log.spectral;
    let n = traj.states[0].n();
    let mut header = vec!["t".to_string(), "z_re".to_string(), "z_im".to_string()];
    for degree in (0..=n).rev() {
        header.push(format!("c{degree}_re"));
        header.push(format!("c{degree}_im"));
    }
    push_row(&mut out, &header);
    for (idx, record) in records.iter().enumerate() {
        for (z, coeffs) in record.z_grid.iter().zip(&record.coeffs) {
            let mut cells = vec![fmt(traj.times[idx]), fmt(z.re), fmt(z.im)];
            cells.extend(complex_cells(coeffs));
            push_row(&mut out, &cells);
        }
    }
    out
}

/// A single state as a one-row table with the trajectory's state
/// columns, used by the conversion command.
pub fn state_csv(point: &PhasePoint) -> String {
    let mut out = String::new();
    push_row(&mut out, &state_headers(point));
    push_row(&mut out, &complex_cells(&dynamics::flatten(point)));
    out
}

/// Bracket table: Hamiltonian labels down the side, each row carrying
/// the value at the initial state and the magnitude of the bracket with
/// every configured Hamiltonian.
pub fn bracket_csv(labels: &[String], values: &[Complex64], magnitudes: &[Vec<f64>]) -> String {
    let mut out = String::new();
    let mut header = vec![
        "hamiltonian".to_string(),
        "value_re".to_string(),
        "value_im".to_string(),
    ];
    header.extend(labels.iter().cloned());
    push_row(&mut out, &header);
    for (idx, label) in labels.iter().enumerate() {
        let mut cells = vec![label.clone(), fmt(values[idx].re), fmt(values[idx].im)];
        cells.extend(magnitudes[idx].iter().map(|m| fmt(*m)));
        push_row(&mut out, &cells);
    }
    out
}

#[derive(Serialize)]
struct SpectralDoc {
    z_grid: Vec<CxPair>,
    coeffs: Vec<Vec<CxPair>>,
}

fn spectral_doc(record: &SpectralRecord) -> SpectralDoc {
    SpectralDoc {
        z_grid: record.z_grid.iter().map(|z| pair(*z)).collect(),
        coeffs: record
            .coeffs
            .iter()
            .map(|row| row.iter().map(|z| pair(*z)).collect())
            .collect(),
    }
}

#[derive(Serialize)]
struct InvariantDoc {
    hamiltonians: Vec<String>,
    times: Vec<f64>,
    values: Vec<Vec<CxPair>>,
}

fn invariant_doc(traj: &Trajectory) -> InvariantDoc {
    InvariantDoc {
        hamiltonians: traj
            .invariant_log
            .hamiltonians
            .iter()
            .map(HamiltonianSpec::label)
            .collect(),
        times: traj.times.clone(),
        values: traj
            .invariant_log
            .values
            .iter()
            .map(|row| row.iter().map(|z| pair(*z)).collect())
            .collect(),
    }
}

#[derive(Serialize)]
struct TrajectoryDoc {
    times: Vec<f64>,
    states: Vec<InitialData>,
    invariants: InvariantDoc,
    drifted: bool,
}

fn to_text<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("output serialization is total");
    text.push('\n');
    text
}

/// JSON alternative to [`trajectory_csv`] with the full structure.
pub fn trajectory_json(traj: &Trajectory) -> String {
    to_text(&TrajectoryDoc {
        times: traj.times.clone(),
        states: traj.states.iter().map(state_to_schema).collect(),
        invariants: invariant_doc(traj),
        drifted: traj.drifted,
    })
}

/// JSON alternative to [`invariants_csv`].
pub fn invariants_json(traj: &Trajectory) -> String {
    to_text(&invariant_doc(traj))
}

/// JSON alternative to [`spectral_csv`]: one grid-plus-coefficients
/// record per recorded time.
pub fn spectral_json(traj: &Trajectory) -> String {
    #[derive(Serialize)]
    struct Doc {
        times: Vec<f64>,
        records: Vec<SpectralDoc>,
    }
    to_text(&Doc {
        times: traj.times.clone(),
        records: traj
            .invariant_log
            .spectral
            .iter()
            .map(spectral_doc)
            .collect(),
    })
}

/// JSON alternative to [`state_csv`], in the config's initial-data shape.
pub fn state_json(point: &PhasePoint) -> String {
    to_text(&state_to_schema(point))
}

/// JSON alternative to [`bracket_csv`].
pub fn bracket_json(labels: &[String], values: &[Complex64], magnitudes: &[Vec<f64>]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        hamiltonians: &'a [String],
        values: Vec<CxPair>,
        bracket_magnitudes: &'a [Vec<f64>],
    }
    to_text(&Doc {
        hamiltonians: labels,
        values: values.iter().map(|z| pair(*z)).collect(),
        bracket_magnitudes: magnitudes,
    })
}
