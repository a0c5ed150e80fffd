//! Lax matrices with spectral parameter, the zeta twist, and
//! spectral-curve invariants.
//!
//! Each chart carries a matrix family `eta(z)`: `[X, Y]/z + Y` (rational
//! quiver), `(X^-1 Y X - Y)/z + Y` (trigonometric quiver), and the
//! particle-coordinate elliptic family with momenta on the diagonal and
//! `f_ij s_{q_i - q_j}(z)` off it. Flows conjugate `eta(z)` pointwise in
//! `z`, so the characteristic polynomial of every sample is a conserved
//! quantity; `SpectralRecord` collects those coefficients over a grid.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg;
use crate::phase::{from_particles, ParticleState, PhasePoint, QuiverDatum, COLLISION_TOLERANCE};
use crate::specfun::{lax_kernel, zeta_w, Variant, POLE_TOLERANCE};
use crate::{Error, Result};

/// One evaluation `eta(z)` with its context: the spectral-parameter
/// point, the sampled matrix, and the family's pole locations (for the
/// elliptic family the listed pole represents its lattice orbit).
#[derive(Debug, Clone)]
pub struct LaxSample {
    pub z: Complex64,
    pub value: DMatrix<Complex64>,
    pub variant: Variant,
    pub pole_set: Vec<Complex64>,
}

/// Characteristic-polynomial coefficients of `eta(z)` over a grid:
/// `coeffs[m]` are the `n + 1` monic-descending coefficients at
/// `z_grid[m]`.
#[derive(Debug, Clone)]
pub struct SpectralRecord {
    pub z_grid: Vec<Complex64>,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl SpectralRecord {
    /// Largest coefficient difference against another record on the same
    /// grid; the drift monitored by isospectrality tests.
    pub fn max_drift_from(&self, other: &SpectralRecord) -> f64 {
        let mut worst = 0.0_f64;
        for (row_a, row_b) in self.coeffs.iter().zip(other.coeffs.iter()) {
            for (a, b) in row_a.iter().zip(row_b.iter()) {
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }
}

fn ensure_finite(value: DMatrix<Complex64>, z: Complex64) -> Result<DMatrix<Complex64>> {
    if value
        .iter()
        .all(|e| e.re.is_finite() && e.im.is_finite())
    {
        Ok(value)
    } else {
        Err(Error::Pole {
            point: z,
            tolerance: POLE_TOLERANCE,
        })
    }
}

/// Rational Lax matrix `[X, Y]/z + Y`.
pub fn rational_higgs(d: &QuiverDatum, z: Complex64) -> Result<LaxSample> {
    if !matches!(d.variant, Variant::Rational) {
        return Err(Error::Validation {
            message: "rational Lax matrix requires a rational quiver datum".to_string(),
        });
    }
    if z.norm() < POLE_TOLERANCE {
        return Err(Error::Pole {
            point: z,
            tolerance: POLE_TOLERANCE,
        });
    }
    let comm = &d.x * &d.y - &d.y * &d.x;
    let value = ensure_finite(comm / z + &d.y, z)?;
    Ok(LaxSample {
        z,
        value,
        variant: d.variant.clone(),
        pole_set: vec![Complex64::new(0.0, 0.0)],
    })
}

/// Trigonometric Lax matrix `(X^-1 Y X - Y)/z + Y`.
pub fn trig_higgs(d: &QuiverDatum, z: Complex64) -> Result<LaxSample> {
    if !matches!(d.variant, Variant::Trigonometric) {
        return Err(Error::Validation {
            message: "trigonometric Lax matrix requires a trigonometric quiver datum".to_string(),
        });
    }
    if z.norm() < POLE_TOLERANCE {
        return Err(Error::Pole {
            point: z,
            tolerance: POLE_TOLERANCE,
        });
    }
    if d.x.determinant().norm() <= POLE_TOLERANCE {
        return Err(Error::SingularMatrix {
            message: "trigonometric X must be invertible".to_string(),
        });
    }
    let xinv = linalg::inverse_checked(&d.x, "trigonometric X must be invertible")?;
    let twist = xinv * &d.y * &d.x - &d.y;
    let value = ensure_finite(twist / z + &d.y, z)?;
    Ok(LaxSample {
        z,
        value,
        variant: d.variant.clone(),
        pole_set: vec![Complex64::new(0.0, 0.0)],
    })
}

/// Elliptic Lax matrix in particle coordinates: momenta on the diagonal,
/// `f_ij s_{q_i - q_j}(z)` off it. Only off-diagonal contractions enter
/// (the coupling matrix is meaningful up to diagonal shifts).
pub fn elliptic_higgs(s: &ParticleState, z: Complex64) -> Result<LaxSample> {
    if !matches!(s.variant, Variant::Elliptic(_)) {
        return Err(Error::Validation {
            message: "elliptic Lax matrix requires an elliptic particle state".to_string(),
        });
    }
    let sep = s.min_separation();
    if sep <= COLLISION_TOLERANCE {
        return Err(Error::Collision {
            separation: sep,
            tolerance: COLLISION_TOLERANCE,
            context: "elliptic Lax matrix".to_string(),
        });
    }
    let n = s.n();
    let f = s.contraction_matrix();
    let mut value = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        value[(i, i)] = s.p[i];
        for j in 0..n {
            if i != j {
                value[(i, j)] = f[(i, j)] * lax_kernel(s.q[i] - s.q[j], z, &s.variant)?;
            }
        }
    }
    let value = ensure_finite(value, z)?;
    Ok(LaxSample {
        z,
        value,
        variant: s.variant.clone(),
        pole_set: vec![Complex64::new(0.0, 0.0)],
    })
}

/// The Lax matrix of whichever chart the point is in. Rational and
/// trigonometric particle states go through their quiver form; elliptic
/// states are sampled directly.
pub fn higgs_for(point: &PhasePoint, z: Complex64) -> Result<LaxSample> {
    match point {
        PhasePoint::Quiver(d) => match d.variant {
            Variant::Rational => rational_higgs(d, z),
            Variant::Trigonometric => trig_higgs(d, z),
            Variant::Elliptic(_) => Err(Error::Validation {
                message: "the elliptic variant has no quiver chart".to_string(),
            }),
        },
        PhasePoint::Particle(s) => match s.variant {
            Variant::Rational => rational_higgs(&from_particles(s)?, z),
            Variant::Trigonometric => trig_higgs(&from_particles(s)?, z),
            Variant::Elliptic(_) => elliptic_higgs(s, z),
        },
    }
}

/// Direction of the zeta twist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistDirection {
    ToTwisted,
    ToUntwisted,
}

/// Adds (`ToTwisted`) or subtracts (`ToUntwisted`) `zeta(z) Id`: the
/// dictionary between the plain and the pole-regularized Lax families.
/// The two directions compose to the identity.
pub fn twist_shift(l: &LaxSample, direction: TwistDirection) -> Result<LaxSample> {
    let zeta = zeta_w(l.z, &l.variant)?;
    let shift = match direction {
        TwistDirection::ToTwisted => zeta,
        TwistDirection::ToUntwisted => -zeta,
    };
    let mut value = l.value.clone();
    for i in 0..value.nrows() {
        value[(i, i)] += shift;
    }
    Ok(LaxSample {
        z: l.z,
        value,
        variant: l.variant.clone(),
        pole_set: l.pole_set.clone(),
    })
}

/// Monic characteristic polynomial of the sample in the eigenvalue
/// variable, coefficients in descending powers (leading entry exactly 1).
/// Computed from the Schur eigenvalues and re-expanded, which stays stable
/// for the moderately non-normal matrices these families produce.
pub fn char_poly_coeffs(l: &LaxSample) -> Result<Vec<Complex64>> {
    let values = linalg::eigenvalues(&l.value)?;
    Ok(linalg::char_poly_from_eigenvalues(&values))
}

/// Characteristic-polynomial coefficients of the point's Lax matrix over
/// `z_grid`: the conserved data every flow must preserve.
pub fn spectral_record(point: &PhasePoint, z_grid: &[Complex64]) -> Result<SpectralRecord> {
    let mut coeffs = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let sample = higgs_for(point, z)?;
        coeffs.push(char_poly_coeffs(&sample)?);
    }
    Ok(SpectralRecord {
        z_grid: z_grid.to_vec(),
        coeffs,
    })
}
