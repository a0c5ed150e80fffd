//! JSON run-configuration schema for the command-line front end.
//!
//! The core types stay serde-free; this module owns the wire format.
//! Complex numbers are two-element `[re, im]` arrays, matrices are
//! row-major nested arrays of those pairs, and enums use snake_case
//! tags, so a config written by hand diffs cleanly against one written
//! by [`to_json`]. Every accepted config reserializes to the JSON value
//! it was parsed from: optional fields are omitted rather than filled
//! with defaults.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::flows::{FlowMethod, FlowSpec, LogSpec};
use crate::ham::{HamiltonianSpec, DEFAULT_RESIDUE_RADIUS};
use crate::phase::{ParticleState, PhasePoint, QuiverDatum};
use crate::specfun::{Lattice, Variant, POLE_TOLERANCE};
use crate::Result;

/// Wire form of one complex number.
pub type CxPair = [f64; 2];

fn cx(pair: CxPair) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn pair(z: Complex64) -> CxPair {
    [z.re, z.im]
}

fn matrix_to_rows(m: &DMatrix<Complex64>) -> Vec<Vec<CxPair>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| pair(m[(r, c)])).collect())
        .collect()
}

/// Rebuilds a matrix from nested rows, checking the advertised shape.
/// `field` names the config entry in error messages.
fn rows_to_matrix(
    rows: &[Vec<CxPair>],
    nrows: usize,
    ncols: usize,
    field: &str,
) -> Result<DMatrix<Complex64>> {
    if rows.len() != nrows {
        return Err(Error::Config {
            message: format!("{field} has {} rows, expected {nrows}", rows.len()),
        });
    }
    let mut m = DMatrix::zeros(nrows, ncols);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Config {
                message: format!("{field} row {r} has {} entries, expected {ncols}", row.len()),
            });
        }
        for (c, entry) in row.iter().enumerate() {
            m[(r, c)] = cx(*entry);
        }
    }
    Ok(m)
}

/// Which one-dimensional group the run lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Rational,
    Trigonometric,
    Elliptic,
}

/// Integration method tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Exact,
    Rk4,
}

/// Output table format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatName {
    Csv,
    Json,
}

impl FormatName {
    /// File extension for this format.
    pub fn extension(self) -> &'static str {
        match self {
            FormatName::Csv => "csv",
            FormatName::Json => "json",
        }
    }
}

/// Particle-chart initial data: positions, momenta, and spin rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub q: Vec<CxPair>,
    pub p: Vec<CxPair>,
    pub a: Vec<Vec<CxPair>>,
    pub b: Vec<Vec<CxPair>>,
}

/// Quiver-chart initial data: the matrix quadruple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuiverConfig {
    pub x: Vec<Vec<CxPair>>,
    pub y: Vec<Vec<CxPair>>,
    pub u: Vec<Vec<CxPair>>,
    pub v: Vec<Vec<CxPair>>,
}

/// Initial state in exactly one chart. The external tag (`"particle"`
/// or `"quiver"`) makes a config with both present, or neither,
/// unparseable rather than silently ambiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    Particle(ParticleConfig),
    Quiver(QuiverConfig),
}

/// Wire form of a Hamiltonian: `{"trace": 2}`, `{"residue_b": 2}`,
/// `{"residue_at": {"location": [re, im], "degree": 1}}`, or the bare
/// string `"particle_h2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianConfig {
    Trace(u32),
    ResidueB(u32),
    ResidueAt { location: CxPair, degree: u32 },
    ParticleH2,
}

impl HamiltonianConfig {
    /// Converts to the core enum.
    pub fn to_spec(&self) -> HamiltonianSpec {
        match self {
            HamiltonianConfig::Trace(i) => HamiltonianSpec::Trace(*i),
            HamiltonianConfig::ResidueB(i) => HamiltonianSpec::ResidueAtB(*i),
            HamiltonianConfig::ResidueAt { location, degree } => HamiltonianSpec::ResidueAt {
                location: cx(*location),
                degree: *degree,
            },
            HamiltonianConfig::ParticleH2 => HamiltonianSpec::ParticleH2,
        }
    }
}

/// Flow section: which Hamiltonian to integrate, how, and how densely
/// to record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub hamiltonian: HamiltonianConfig,
    pub method: MethodName,
    pub t_final: f64,
    pub dt: f64,
    pub record_every: usize,
}

/// Spectral-record section: a z-grid and a toggle, so a config can keep
/// its grid while switching the (comparatively expensive) logging off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub enabled: bool,
    pub z_grid: Vec<CxPair>,
}

/// Output section: directory and table format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub format: FormatName,
}

/// A full run description as read from disk. Field semantics beyond
/// shape (dimension agreement, grid points off the singular set, tau
/// presence) are enforced by [`RunConfig::validate`], which every
/// builder calls first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub variant: VariantName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<CxPair>,
    pub n: usize,
    pub k: usize,
    pub initial: InitialData,
    pub flow: FlowConfig,
    pub invariants: Vec<HamiltonianConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralConfig>,
    pub output: OutputConfig,
    pub seed: u64,
}

/// Parses a config document. Serde errors already name the offending
/// field, so they pass through unchanged.
pub fn parse(text: &str) -> Result<RunConfig> {
    Ok(serde_json::from_str(text)?)
}

/// Serializes a config back to pretty JSON with a trailing newline.
pub fn to_json(config: &RunConfig) -> String {
    let mut text = serde_json::to_string_pretty(config).expect("config serialization is total");
    text.push('\n');
    text
}

impl RunConfig {
    /// Builds the variant, resolving `tau` for elliptic runs. A `tau`
    /// on a non-elliptic run is rejected rather than ignored so that a
    /// config says what it means.
    pub fn build_variant(&self) -> Result<Variant> {
        match (self.variant, self.tau) {
            (VariantName::Rational, None) => Ok(Variant::Rational),
            (VariantName::Trigonometric, None) => Ok(Variant::Trigonometric),
            (VariantName::Elliptic, Some(tau)) => {
                let lattice = Lattice::with_tau(cx(tau)).map_err(|e| Error::Config {
                    message: format!("tau does not define a usable lattice: {e}"),
                })?;
                Ok(Variant::Elliptic(lattice))
            }
            (VariantName::Elliptic, None) => Err(Error::Config {
                message: "tau is required for the elliptic variant".to_string(),
            }),
            (_, Some(_)) => Err(Error::Config {
                message: "tau is only meaningful for the elliptic variant".to_string(),
            }),
        }
    }

    /// Builds the initial phase-space point in the configured chart.
    pub fn build_initial(&self) -> Result<PhasePoint> {
        let variant = self.build_variant()?;
        match &self.initial {
            InitialData::Particle(part) => {
                if part.q.len() != self.n {
                    return Err(Error::Config {
                        message: format!(
                            "initial.particle.q has {} entries, expected n = {}",
                            part.q.len(),
                            self.n
                        ),
                    });
                }
                if part.p.len() != self.n {
                    return Err(Error::Config {
                        message: format!(
                            "initial.particle.p has {} entries, expected n = {}",
                            part.p.len(),
                            self.n
                        ),
                    });
                }
                let a = rows_to_matrix(&part.a, self.n, self.k, "initial.particle.a")?;
                let b = rows_to_matrix(&part.b, self.n, self.k, "initial.particle.b")?;
                let q = part.q.iter().map(|entry| cx(*entry)).collect();
                let p = part.p.iter().map(|entry| cx(*entry)).collect();
                Ok(PhasePoint::Particle(ParticleState::new(variant, q, p, a, b)?))
            }
            InitialData::Quiver(quiv) => {
                let x = rows_to_matrix(&quiv.x, self.n, self.n, "initial.quiver.x")?;
                let y = rows_to_matrix(&quiv.y, self.n, self.n, "initial.quiver.y")?;
                let u = rows_to_matrix(&quiv.u, self.n, self.k, "initial.quiver.u")?;
                let v = rows_to_matrix(&quiv.v, self.k, self.n, "initial.quiver.v")?;
                Ok(PhasePoint::Quiver(QuiverDatum::new(variant, x, y, u, v)?))
            }
        }
    }

    /// Builds the flow section.
    pub fn build_flow_spec(&self) -> Result<FlowSpec> {
        if !(self.flow.t_final > 0.0 && self.flow.t_final.is_finite()) {
            return Err(Error::Config {
                message: format!("flow.t_final must be positive, got {}", self.flow.t_final),
            });
        }
        if !(self.flow.dt > 0.0 && self.flow.dt.is_finite()) {
            return Err(Error::Config {
                message: format!("flow.dt must be positive, got {}", self.flow.dt),
            });
        }
        if self.flow.record_every == 0 {
            return Err(Error::Config {
                message: "flow.record_every must be at least 1".to_string(),
            });
        }
        let method = match self.flow.method {
            MethodName::Exact => FlowMethod::Exact,
            MethodName::Rk4 => FlowMethod::Rk4,
        };
        Ok(FlowSpec {
            hamiltonian: self.flow.hamiltonian.to_spec(),
            method,
            t_final: self.flow.t_final,
            dt: self.flow.dt,
            record_every: self.flow.record_every,
        })
    }

    /// Builds the logging section: the invariant list plus the spectral
    /// grid when enabled.
    pub fn build_log_spec(&self) -> Result<LogSpec> {
        let hamiltonians = self.invariants.iter().map(HamiltonianConfig::to_spec).collect();
        let spectral_grid = match &self.spectral {
            Some(spectral) if spectral.enabled => {
                spectral.z_grid.iter().map(|entry| cx(*entry)).collect()
            }
            _ => Vec::new(),
        };
        Ok(LogSpec {
            hamiltonians,
            spectral_grid,
        })
    }

    /// Full semantic validation: shape agreement via the builders, plus
    /// the off-singular-set checks for every referenced z value. Runs
    /// before any command touches the data, so a bad grid point fails
    /// with a field name instead of a mid-run pole error.
    pub fn validate(&self) -> Result<()> {
        let variant = self.build_variant()?;
        self.build_initial()?;
        self.build_flow_spec()?;
        self.build_log_spec()?;
        let named_hamiltonians = self
            .invariants
            .iter()
            .enumerate()
            .map(|(idx, config)| (format!("invariants[{idx}]"), config))
            .chain([("flow.hamiltonian".to_string(), &self.flow.hamiltonian)]);
        for (field, config) in named_hamiltonians {
            let spec = config.to_spec();
            if let HamiltonianSpec::ResidueAt { location, .. } = spec {
                if clearance(location, &variant) <= DEFAULT_RESIDUE_RADIUS {
                    return Err(Error::Config {
                        message: format!(
                            "{field}: residue location {location} is within the \
                             contour radius {DEFAULT_RESIDUE_RADIUS} of the singular set"
                        ),
                    });
                }
            }
            if matches!(spec.degree(), Some(0)) {
                return Err(Error::Config {
                    message: format!("{field}: degree must be positive"),
                });
            }
        }
        if let Some(spectral) = &self.spectral {
            for (idx, entry) in spectral.z_grid.iter().enumerate() {
                let z = cx(*entry);
                if clearance(z, &variant) <= POLE_TOLERANCE {
                    return Err(Error::Config {
                        message: format!(
                            "spectral.z_grid[{idx}]: point {z} lies on the singular set"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Distance from `z` to the singular set of the Lax family: the origin
/// for rational and trigonometric runs, the period lattice for elliptic
/// ones.
fn clearance(z: Complex64, variant: &Variant) -> f64 {
    match variant.lattice() {
        Some(lattice) => lattice.distance_to_lattice(z),
        None => z.norm(),
    }
}

/// Serializes a phase-space point in the config's initial-data shape,
/// which doubles as the trajectory-state wire format.
pub fn state_to_schema(point: &PhasePoint) -> InitialData {
    match point {
        PhasePoint::Particle(s) => InitialData::Particle(ParticleConfig {
            q: s.q.iter().map(|z| pair(*z)).collect(),
            p: s.p.iter().map(|z| pair(*z)).collect(),
            a: matrix_to_rows(&s.a),
            b: matrix_to_rows(&s.b),
        }),
        PhasePoint::Quiver(d) => InitialData::Quiver(QuiverConfig {
            x: matrix_to_rows(&d.x),
            y: matrix_to_rows(&d.y),
            u: matrix_to_rows(&d.u),
            v: matrix_to_rows(&d.v),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_text() -> String {
        serde_json::json!({
            "variant": "rational",
            "n": 2,
            "k": 1,
            "initial": {
                "particle": {
                    "q": [[0.0, 0.0], [1.0, 0.0]],
                    "p": [[0.0, 0.0], [0.0, 0.0]],
                    "a": [[[1.0, 0.0]], [[-1.0, 0.0]]],
                    "b": [[[1.0, 0.0]], [[-1.0, 0.0]]]
                }
            },
            "flow": {
                "hamiltonian": {"trace": 2},
                "method": "rk4",
                "t_final": 0.2,
                "dt": 0.001,
                "record_every": 20
            },
            "invariants": [{"trace": 1}, {"trace": 2}, "particle_h2"],
            "spectral": {"enabled": true, "z_grid": [[1.0, 0.0], [2.0, 0.0], [1.0, 1.0]]},
            "output": {"dir": "out", "format": "csv"},
            "seed": 7
        })
        .to_string()
    }

    #[test]
    fn golden_config_parses_and_validates() {
        let config = parse(&golden_text()).unwrap();
        config.validate().unwrap();
        assert_eq!(config.n, 2);
        let point = config.build_initial().unwrap();
        assert_eq!(point.n(), 2);
        let flow = config.build_flow_spec().unwrap();
        assert_eq!(flow.hamiltonian, HamiltonianSpec::Trace(2));
        let log = config.build_log_spec().unwrap();
        assert_eq!(log.hamiltonians.len(), 3);
        assert_eq!(log.spectral_grid.len(), 3);
    }

    #[test]
    fn reserialization_preserves_the_parsed_value() {
        let text = golden_text();
        let config = parse(&text).unwrap();
        let reparsed: serde_json::Value = serde_json::from_str(&to_json(&config)).unwrap();
        let original: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(reparsed, original);
    }

    #[test]
    fn ambiguous_initial_data_is_rejected_by_the_schema() {
        let mut doc: serde_json::Value = serde_json::from_str(&golden_text()).unwrap();
        let particle = doc["initial"]["particle"].clone();
        doc["initial"]["quiver"] = particle;
        assert!(parse(&doc.to_string()).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut doc: serde_json::Value = serde_json::from_str(&golden_text()).unwrap();
        doc["surprise"] = serde_json::json!(1);
        assert!(parse(&doc.to_string()).is_err());
    }

    #[test]
    fn misshapen_spin_matrix_names_the_field() {
        let mut doc: serde_json::Value = serde_json::from_str(&golden_text()).unwrap();
        doc["initial"]["particle"]["a"] = serde_json::json!([[[1.0, 0.0]]]);
        let config = parse(&doc.to_string()).unwrap();
        let err = config.build_initial().unwrap_err();
        assert!(err.to_string().contains("initial.particle.a"), "{err}");
    }

    #[test]
    fn tau_rules_follow_the_variant() {
        let mut doc: serde_json::Value = serde_json::from_str(&golden_text()).unwrap();
        doc["tau"] = serde_json::json!([0.0, 1.0]);
        let config = parse(&doc.to_string()).unwrap();
        let err = config.build_variant().unwrap_err();
        assert!(err.to_string().contains("tau"), "{err}");

        let mut doc: serde_json::Value = serde_json::from_str(&golden_text()).unwrap();
        doc["variant"] = serde_json::json!("elliptic");
        let config = parse(&doc.to_string()).unwrap();
        assert!(config.build_variant().is_err());
    }

    #[test]
    fn singular_grid_points_fail_validation() {
        let mut doc: serde_json::Value = serde_json::from_str(&golden_text()).unwrap();
        doc["spectral"]["z_grid"][0] = serde_json::json!([0.0, 0.0]);
        let config = parse(&doc.to_string()).unwrap();
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("z_grid"), "{err}");
    }

    #[test]
    fn hamiltonian_tags_cover_every_family() {
        let tags = serde_json::json!([
            {"trace": 3},
            {"residue_b": 2},
            {"residue_at": {"location": [0.5, 0.5], "degree": 1}},
            "particle_h2"
        ]);
        let parsed: Vec<HamiltonianConfig> = serde_json::from_value(tags).unwrap();
        assert_eq!(parsed[0].to_spec(), HamiltonianSpec::Trace(3));
        assert_eq!(parsed[1].to_spec(), HamiltonianSpec::ResidueAtB(2));
        assert_eq!(
            parsed[2].to_spec(),
            HamiltonianSpec::ResidueAt {
                location: Complex64::new(0.5, 0.5),
                degree: 1
            }
        );
        assert_eq!(parsed[3].to_spec(), HamiltonianSpec::ParticleH2);
    }
}
