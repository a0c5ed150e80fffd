//! Hamiltonians: the trace family, the particle-coordinate two-body
//! energy, residue-form spin and framed Hamiltonians built from contour
//! quadrature of the Lax family, and a finite-difference Poisson bracket
//! for involution checks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics;
use crate::lax::higgs_for;
use crate::linalg;
use crate::phase::{
    from_particles, to_particles, ParticleState, PhasePoint, QuiverDatum, COLLISION_TOLERANCE,
};
use crate::specfun::{potential, zeta_w, Variant};
use crate::{Error, Result};

/// Sign of the potential term in [`particle_h2`]. Fixed so that the
/// particle energy of converted rational data equals the degree-2 trace
/// Hamiltonian; the n = 2 closure example pins it.
pub const H2_POTENTIAL_SIGN: f64 = -1.0;

/// Contour radius for residue quadrature.
pub const DEFAULT_RESIDUE_RADIUS: f64 = 0.1;
/// Trapezoid node count for residue quadrature (doubled for the
/// self-check).
pub const DEFAULT_RESIDUE_SAMPLES: usize = 64;
/// Relative disagreement allowed between the quadrature and its doubled
/// refinement.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;
/// Default finite-difference step for the Poisson bracket.
pub const DEFAULT_BRACKET_STEP: f64 = 1e-5;
/// Relative disagreement allowed between bracket values across step
/// halving.
pub const BRACKET_STEP_TOLERANCE: f64 = 1e-6;

/// A Hamiltonian drawn from the families this crate computes. Degrees are
/// positive; the framing location of `ResidueAt` must stay clear of the
/// Lax family's poles by more than the contour radius.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    /// `(1/i) tr Y^i` on quiver data (particle states convert first).
    Trace(u32),
    /// Residue at the marked pole (z = 0) of `tr (eta + zeta Id)^(i+1)`,
    /// normalized by `1/(i+1)`.
    ResidueAtB(u32),
    /// Residue at a framing point of the plain `tr eta^(i+1)/(i+1)`.
    ResidueAt { location: Complex64, degree: u32 },
    /// Kinetic-plus-potential two-body energy on the particle chart.
    ParticleH2,
}

impl HamiltonianSpec {
    pub fn degree(&self) -> Option<u32> {
        match self {
            HamiltonianSpec::Trace(i) | HamiltonianSpec::ResidueAtB(i) => Some(*i),
            HamiltonianSpec::ResidueAt { degree, .. } => Some(*degree),
            HamiltonianSpec::ParticleH2 => None,
        }
    }

    /// Short machine-readable name, used as a CSV column header.
    pub fn label(&self) -> String {
        match self {
            HamiltonianSpec::Trace(i) => format!("trace_{i}"),
            HamiltonianSpec::ResidueAtB(i) => format!("residue_b_{i}"),
            HamiltonianSpec::ResidueAt { location, degree } => {
                format!("residue_{degree}_at_{}_{}", location.re, location.im)
            }
            HamiltonianSpec::ParticleH2 => "particle_h2".to_string(),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self.degree() {
            Some(0) => Err(Error::Validation {
                message: "Hamiltonian degree must be positive".to_string(),
            }),
            _ => Ok(()),
        }
    }

    /// The trace and residue families are functions of the quiver chart;
    /// only the two-body energy is defined on particle coordinates
    /// directly. Flows and brackets use this to pick the structure that
    /// actually governs the Hamiltonian.
    pub(crate) fn quiver_native(&self) -> bool {
        !matches!(self, HamiltonianSpec::ParticleH2)
    }
}

/// `(1/i) tr Y^i`, gauge-invariant by cyclicity.
pub fn trace_hamiltonian(d: &QuiverDatum, i: u32) -> Result<Complex64> {
    if i == 0 {
        return Err(Error::Validation {
            message: "trace Hamiltonian degree must be positive".to_string(),
        });
    }
    Ok(linalg::mat_pow(&d.y, i).trace() / i as f64)
}

/// Two-body energy on the particle chart:
/// `1/2 sum p_i^2 + sign * sum_{i<j} f_ij f_ji U(q_i - q_j)` with the sign
/// given by [`H2_POTENTIAL_SIGN`]. Spins enter only through off-diagonal
/// contractions.
pub fn particle_h2(s: &ParticleState) -> Result<Complex64> {
    let sep = s.min_separation();
    if sep <= COLLISION_TOLERANCE {
        return Err(Error::Collision {
            separation: sep,
            tolerance: COLLISION_TOLERANCE,
            context: "two-body energy".to_string(),
        });
    }
    let n = s.n();
    let f = s.contraction_matrix();
    let mut h = Complex64::new(0.0, 0.0);
    for i in 0..n {
        h += 0.5 * s.p[i] * s.p[i];
    }
    for i in 0..n {
        for j in (i + 1)..n {
            h += H2_POTENTIAL_SIGN * f[(i, j)] * f[(j, i)] * potential(s.q[i] - s.q[j], &s.variant)?;
        }
    }
    Ok(h)
}

fn contour_sum<F>(
    l: &F,
    z0: Complex64,
    degree: u32,
    radius: f64,
    samples: usize,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<DMatrix<Complex64>>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / samples as f64;
        let dir = Complex64::from_polar(radius, theta);
        let value = l(z0 + dir)?;
        acc += linalg::mat_pow(&value, degree + 1).trace() * dir;
    }
    Ok(acc / samples as f64 / (degree + 1) as f64)
}

/// `1/(i+1) * 1/(2 pi i) * contour integral of tr L(z)^(i+1)` around `z0`,
/// by uniform trapezoid quadrature (spectrally accurate for analytic
/// integrands). The result is accepted only if doubling the node count
/// moves it by less than the quadrature tolerance.
pub fn residue_trace_power<F>(
    l: F,
    z0: Complex64,
    degree: u32,
    radius: f64,
    samples: usize,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<DMatrix<Complex64>>,
{
    if degree == 0 {
        return Err(Error::Validation {
            message: "residue power degree must be positive".to_string(),
        });
    }
    if !(radius > 0.0) {
        return Err(Error::Validation {
            message: "contour radius must be positive".to_string(),
        });
    }
    if samples < 4 {
        return Err(Error::Validation {
            message: "contour quadrature needs at least 4 nodes".to_string(),
        });
    }
    let coarse = contour_sum(&l, z0, degree, radius, samples)?;
    let fine = contour_sum(&l, z0, degree, radius, samples * 2)?;
    let disagreement = (fine - coarse).norm();
    let fine_ok = fine.re.is_finite() && fine.im.is_finite();
    if !fine_ok || !disagreement.is_finite() || disagreement > QUADRATURE_TOLERANCE * (1.0 + fine.norm()) {
        return Err(Error::Quadrature {
            disagreement,
            tolerance: QUADRATURE_TOLERANCE,
        });
    }
    Ok(fine)
}

/// Residue Hamiltonian at the marked pole: the Lax matrix of the point's
/// chart, shifted by `zeta(z) Id`, fed through [`residue_trace_power`] at
/// the origin.
pub fn spin_hamiltonian(point: &PhasePoint, degree: u32) -> Result<Complex64> {
    let variant = point.variant().clone();
    residue_trace_power(
        |z| {
            let sample = higgs_for(point, z)?;
            let zeta = zeta_w(z, &variant)?;
            let mut m = sample.value;
            for idx in 0..m.nrows() {
                m[(idx, idx)] += zeta;
            }
            Ok(m)
        },
        Complex64::new(0.0, 0.0),
        degree,
        DEFAULT_RESIDUE_RADIUS,
        DEFAULT_RESIDUE_SAMPLES,
    )
}

fn framed_residue(point: &PhasePoint, location: Complex64, degree: u32) -> Result<Complex64> {
    let clearance = match point.variant() {
        Variant::Rational | Variant::Trigonometric => location.norm(),
        Variant::Elliptic(lat) => lat.distance_to_lattice(location),
    };
    if clearance <= DEFAULT_RESIDUE_RADIUS {
        return Err(Error::Validation {
            message: format!(
                "framing point ({}, {}) sits within the contour radius of the family's poles",
                location.re, location.im
            ),
        });
    }
    residue_trace_power(
        |z| higgs_for(point, z).map(|sample| sample.value),
        location,
        degree,
        DEFAULT_RESIDUE_RADIUS,
        DEFAULT_RESIDUE_SAMPLES,
    )
}

/// Evaluates any [`HamiltonianSpec`] at a phase point, converting charts
/// where the definition needs the other one.
pub fn evaluate(spec: &HamiltonianSpec, point: &PhasePoint) -> Result<Complex64> {
    spec.validate()?;
    match spec {
        HamiltonianSpec::Trace(i) => match point {
            PhasePoint::Quiver(d) => trace_hamiltonian(d, *i),
            PhasePoint::Particle(s) => trace_hamiltonian(&from_particles(s)?, *i),
        },
        HamiltonianSpec::ResidueAtB(i) => spin_hamiltonian(point, *i),
        HamiltonianSpec::ResidueAt { location, degree } => {
            framed_residue(point, *location, *degree)
        }
        HamiltonianSpec::ParticleH2 => match point {
            PhasePoint::Particle(s) => particle_h2(s),
            PhasePoint::Quiver(d) => particle_h2(&to_particles(d)?),
        },
    }
}

/// Poisson bracket of two Hamiltonians by central-difference gradients on
/// the chart's structure pairing, Richardson-extrapolated across `step`
/// and `step / 2`. The halving disagreement doubles as the error
/// estimate; beyond tolerance the bracket is rejected rather than
/// returned.
///
/// On trigonometric particle points, a pair of quiver-native
/// Hamiltonians brackets at the chart image: their structure is the
/// group-cotangent one there, and the flat particle pairing does not
/// reproduce it (bracket values are chart-independent functions, so the
/// image is the honest evaluation site).
pub fn poisson_bracket(
    h1: &HamiltonianSpec,
    h2: &HamiltonianSpec,
    at: &PhasePoint,
    step: f64,
) -> Result<Complex64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Validation {
            message: "bracket step must be positive and finite".to_string(),
        });
    }
    if let PhasePoint::Particle(s) = at {
        if matches!(s.variant, Variant::Trigonometric)
            && h1.quiver_native()
            && h2.quiver_native()
        {
            let image = PhasePoint::Quiver(from_particles(s)?);
            return poisson_bracket(h1, h2, &image, step);
        }
    }
    let g1_coarse = dynamics::gradient_raw(h1, at, step)?;
    let g2_coarse = dynamics::gradient_raw(h2, at, step)?;
    let coarse = dynamics::pairing_contraction(at, &g1_coarse, &g2_coarse);
    let g1_fine = dynamics::gradient_raw(h1, at, step / 2.0)?;
    let g2_fine = dynamics::gradient_raw(h2, at, step / 2.0)?;
    let fine = dynamics::pairing_contraction(at, &g1_fine, &g2_fine);
    let value = (4.0 * fine - coarse) / 3.0;
    let disagreement = (fine - coarse).norm();
    if !disagreement.is_finite() || disagreement > BRACKET_STEP_TOLERANCE * (1.0 + value.norm()) {
        return Err(Error::Step {
            message: format!(
                "bracket disagrees across step halving by {disagreement:.3e} at step {step:.1e}"
            ),
        });
    }
    Ok(value)
}
