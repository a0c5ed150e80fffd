//! Phase-space charts and the dictionary between them.
//!
//! Two coordinate systems describe the same completed phase space: the
//! unreduced quiver chart, a matrix quadruple `(X, Y, u, v)` carrying a
//! `GL_n` gauge action, and the particle chart `(q, p, a, b)` of positions,
//! momenta, and per-particle spin rows. The quiver chart exists for the
//! rational and trigonometric variants; the elliptic system is only ever
//! presented in particle coordinates.
//!
//! The physical locus is the level set `moment_map = Id` ("on-shell").
//! Conversions: `from_particles` builds the diagonal-gauge quiver datum
//! (on-shell by construction after rescaling the spin rows so each
//! diagonal contraction is 1), and `to_particles` diagonalizes `X` and
//! reads coordinates off the transformed datum.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg;
use crate::specfun::{Variant, POLE_TOLERANCE};
use crate::{Error, Result};

/// Pairwise position separations below this are treated as collisions;
/// chosen an order of magnitude above eigensolver noise at the matrix
/// sizes this crate targets.
pub const COLLISION_TOLERANCE: f64 = 1e-9;

/// Default tolerance for declaring a datum on-shell.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;

/// Unreduced quiver-chart point: `X, Y` are `n x n`, `u` maps `C^k -> C^n`
/// (an `n x k` block of spin columns), `v` maps `C^n -> C^k`.
#[derive(Debug, Clone)]
pub struct QuiverDatum {
    pub variant: Variant,
    pub x: DMatrix<Complex64>,
    pub y: DMatrix<Complex64>,
    pub u: DMatrix<Complex64>,
    pub v: DMatrix<Complex64>,
}

impl QuiverDatum {
    /// Validates dimensions and the variant (rational or trigonometric
    /// only; the elliptic system has no global matrix chart).
    pub fn new(
        variant: Variant,
        x: DMatrix<Complex64>,
        y: DMatrix<Complex64>,
        u: DMatrix<Complex64>,
        v: DMatrix<Complex64>,
    ) -> Result<Self> {
        if matches!(variant, Variant::Elliptic(_)) {
            return Err(Error::Validation {
                message: "the elliptic variant has no quiver chart; use particle coordinates"
                    .to_string(),
            });
        }
        let n = x.nrows();
        if n == 0 {
            return Err(Error::Validation {
                message: "X must be at least 1 x 1".to_string(),
            });
        }
        if !x.is_square() || y.shape() != (n, n) {
            return Err(Error::Validation {
                message: format!(
                    "X and Y must both be {n} x {n}; got X {:?}, Y {:?}",
                    x.shape(),
                    y.shape()
                ),
            });
        }
        let k = u.ncols();
        if u.nrows() != n || v.shape() != (k, n) {
            return Err(Error::Validation {
                message: format!(
                    "spin blocks must be u: {n} x k and v: k x {n}; got u {:?}, v {:?}",
                    u.shape(),
                    v.shape()
                ),
            });
        }
        Ok(QuiverDatum { variant, x, y, u, v })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.u.ncols()
    }
}

/// Particle-chart point: positions `q`, momenta `p`, and spin rows. Row
/// `i` of `a` is the covector of particle `i`, row `i` of `b` its vector;
/// the dynamics see spins only through the contractions
/// `f_ij = <a_i, b_j>` (complex bilinear, no conjugation).
#[derive(Debug, Clone)]
pub struct ParticleState {
    pub variant: Variant,
    pub q: Vec<Complex64>,
    pub p: Vec<Complex64>,
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
}

impl ParticleState {
    pub fn new(
        variant: Variant,
        q: Vec<Complex64>,
        p: Vec<Complex64>,
        a: DMatrix<Complex64>,
        b: DMatrix<Complex64>,
    ) -> Result<Self> {
        let n = q.len();
        if n == 0 {
            return Err(Error::Validation {
                message: "at least one particle is required".to_string(),
            });
        }
        if p.len() != n {
            return Err(Error::Validation {
                message: format!("q has {n} entries but p has {}", p.len()),
            });
        }
        if a.nrows() != n || b.shape() != a.shape() {
            return Err(Error::Validation {
                message: format!(
                    "spin blocks must both be {n} x k; got a {:?}, b {:?}",
                    a.shape(),
                    b.shape()
                ),
            });
        }
        Ok(ParticleState { variant, q, p, a, b })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn k(&self) -> usize {
        self.a.ncols()
    }

    /// Spin contraction `f_ij = <a_i, b_j>`.
    pub fn contraction(&self, i: usize, j: usize) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for alpha in 0..self.k() {
            s += self.a[(i, alpha)] * self.b[(j, alpha)];
        }
        s
    }

    /// All contractions as the matrix `F = a b^T`.
    pub fn contraction_matrix(&self) -> DMatrix<Complex64> {
        &self.a * self.b.transpose()
    }

    /// Separation of particles `i` and `j` in the geometry of the variant:
    /// plain distance (rational), distance after exponentiation
    /// (trigonometric), or distance of the difference to the nearest
    /// lattice point (elliptic).
    pub fn separation(&self, i: usize, j: usize) -> f64 {
        match &self.variant {
            Variant::Rational => (self.q[i] - self.q[j]).norm(),
            Variant::Trigonometric => (self.q[i].exp() - self.q[j].exp()).norm(),
            Variant::Elliptic(lat) => lat.distance_to_lattice(self.q[i] - self.q[j]),
        }
    }

    /// Smallest pairwise separation; infinite for a single particle.
    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                m = m.min(self.separation(i, j));
            }
        }
        m
    }
}

/// Invertible gauge transformation acting by simultaneous conjugation.
#[derive(Debug, Clone)]
pub struct GaugeElement {
    pub g: DMatrix<Complex64>,
}

impl GaugeElement {
    pub fn new(g: DMatrix<Complex64>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::Validation {
                message: format!("gauge element must be square; got {:?}", g.shape()),
            });
        }
        if g.determinant().norm() <= POLE_TOLERANCE {
            return Err(Error::SingularMatrix {
                message: "gauge element is not invertible".to_string(),
            });
        }
        Ok(GaugeElement { g })
    }
}

/// A point of phase space in whichever chart it came in.
#[derive(Debug, Clone)]
pub enum PhasePoint {
    Quiver(QuiverDatum),
    Particle(ParticleState),
}

impl PhasePoint {
    pub fn variant(&self) -> &Variant {
        match self {
            PhasePoint::Quiver(d) => &d.variant,
            PhasePoint::Particle(s) => &s.variant,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            PhasePoint::Quiver(d) => d.n(),
            PhasePoint::Particle(s) => s.n(),
        }
    }
}

/// The shifted moment map: `[X, Y] + u v` (rational) or
/// `X^-1 Y X - Y + u v` (trigonometric). On-shell data satisfies
/// `moment_map = Id`.
pub fn moment_map(d: &QuiverDatum) -> Result<DMatrix<Complex64>> {
    let uv = &d.u * &d.v;
    match &d.variant {
        Variant::Rational => Ok(&d.x * &d.y - &d.y * &d.x + uv),
        Variant::Trigonometric => {
            if d.x.determinant().norm() <= POLE_TOLERANCE {
                return Err(Error::SingularMatrix {
                    message: "trigonometric X must be invertible".to_string(),
                });
            }
            let xinv = linalg::inverse_checked(&d.x, "trigonometric X must be invertible")?;
            Ok(xinv * &d.y * &d.x - &d.y + uv)
        }
        Variant::Elliptic(_) => Err(Error::Validation {
            message: "moment map is defined on the quiver chart only".to_string(),
        }),
    }
}

/// Whether `d` is on-shell at tolerance `tol`, together with the Frobenius
/// residual `|moment_map(d) - Id|` for diagnostics.
pub fn check_constraint(d: &QuiverDatum, tol: f64) -> Result<(bool, f64)> {
    let mut mu = moment_map(d)?;
    for i in 0..d.n() {
        mu[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    let residual = mu.norm();
    Ok((residual <= tol, residual))
}

/// Simultaneous conjugation `(X, Y, u, v) -> (gXg^-1, gYg^-1, gu, vg^-1)`.
/// The moment map conjugates by `g`, so on-shell data stays on-shell.
pub fn gauge_transform(d: &QuiverDatum, g: &GaugeElement) -> Result<QuiverDatum> {
    let ginv = linalg::inverse_checked(&g.g, "gauge element is not invertible")?;
    Ok(QuiverDatum {
        variant: d.variant.clone(),
        x: &g.g * &d.x * &ginv,
        y: &g.g * &d.y * &ginv,
        u: &g.g * &d.u,
        v: &d.v * &ginv,
    })
}

/// Builds the diagonal-gauge quiver datum from particle coordinates.
///
/// Positions must be pairwise separated; the spin rows of `b` are rescaled
/// so every diagonal contraction is 1, which is exactly the diagonal of
/// the moment condition (the commutator part has zero diagonal in this
/// gauge). Off-diagonal entries of `Y` are `f_ij / (q_j - q_i)` in the
/// rational chart and `f_ij x_i / (x_i - x_j)` with `x = exp(q)` in the
/// trigonometric chart; either way the output is on-shell by construction.
pub fn from_particles(s: &ParticleState) -> Result<QuiverDatum> {
    if matches!(s.variant, Variant::Elliptic(_)) {
        return Err(Error::Validation {
            message: "the elliptic variant has no quiver chart".to_string(),
        });
    }
    let n = s.n();
    let sep = s.min_separation();
    if sep <= COLLISION_TOLERANCE {
        return Err(Error::Collision {
            separation: sep,
            tolerance: COLLISION_TOLERANCE,
            context: "particle-to-quiver conversion".to_string(),
        });
    }

    let mut b = s.b.clone();
    for i in 0..n {
        let fii = s.contraction(i, i);
        if fii.norm() < POLE_TOLERANCE {
            return Err(Error::Constraint {
                message: format!(
                    "diagonal spin contraction <a_{i}, b_{i}> vanishes; the moment condition's diagonal cannot be satisfied"
                ),
                residual: fii.norm(),
            });
        }
        for alpha in 0..s.k() {
            b[(i, alpha)] /= fii;
        }
    }
    let normalized = ParticleState {
        variant: s.variant.clone(),
        q: s.q.clone(),
        p: s.p.clone(),
        a: s.a.clone(),
        b,
    };
    let f = normalized.contraction_matrix();

    let mut y = DMatrix::<Complex64>::zeros(n, n);
    let x = match &s.variant {
        Variant::Rational => {
            for i in 0..n {
                y[(i, i)] = s.p[i];
                for j in 0..n {
                    if i != j {
                        y[(i, j)] = f[(i, j)] / (s.q[j] - s.q[i]);
                    }
                }
            }
            DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    s.q[i]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        Variant::Trigonometric => {
            let xs: Vec<Complex64> = s.q.iter().map(|q| q.exp()).collect();
            for i in 0..n {
                y[(i, i)] = s.p[i];
                for j in 0..n {
                    if i != j {
                        y[(i, j)] = f[(i, j)] * xs[i] / (xs[i] - xs[j]);
                    }
                }
            }
            DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    xs[i]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        Variant::Elliptic(_) => unreachable!("rejected above"),
    };

    Ok(QuiverDatum {
        variant: s.variant.clone(),
        x,
        y,
        u: normalized.a.clone(),
        v: normalized.b.transpose(),
    })
}

/// Recovers particle coordinates by diagonalizing `X`.
///
/// Eigenvalues (sorted lexicographically by real then imaginary part)
/// become positions, directly for the rational chart and through the
/// principal logarithm for the trigonometric chart; momenta are the
/// diagonal of the conjugated `Y`, and the spin rows are read from the
/// transformed `u, v`. Eigenvector normalization (unit norm, first
/// significant entry positive-real) makes the output a deterministic
/// function of the input, canonical up to the per-particle rescaling that
/// diagonal gauge cannot see.
pub fn to_particles(d: &QuiverDatum) -> Result<ParticleState> {
    let n = d.n();
    let eig = linalg::eigendecompose(&d.x)?;

    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            gap = gap.min((eig.values[i] - eig.values[j]).norm());
        }
    }
    if gap <= COLLISION_TOLERANCE {
        return Err(Error::Collision {
            separation: gap,
            tolerance: COLLISION_TOLERANCE,
            context: "eigenvalues of X are degenerate".to_string(),
        });
    }

    let w = &eig.vectors;
    let winv = linalg::inverse_checked(w, "eigenvector matrix of X is singular")?;
    let yp = &winv * &d.y * w;

    let q: Vec<Complex64> = match &d.variant {
        Variant::Rational => eig.values.clone(),
        Variant::Trigonometric => {
            for lam in &eig.values {
                if lam.norm() <= POLE_TOLERANCE {
                    return Err(Error::SingularMatrix {
                        message: "trigonometric position eigenvalue is zero; X must be invertible"
                            .to_string(),
                    });
                }
            }
            eig.values.iter().map(|lam| lam.ln()).collect()
        }
        Variant::Elliptic(_) => {
            return Err(Error::Validation {
                message: "the elliptic variant has no quiver chart".to_string(),
            })
        }
    };

    let p: Vec<Complex64> = (0..n).map(|i| yp[(i, i)]).collect();
    let a = &winv * &d.u;
    let b = (&d.v * w).transpose();

    ParticleState::new(d.variant.clone(), q, p, a, b)
}

/// The spinless orbit matrix: zero diagonal, ones elsewhere (all-ones
/// minus identity). This is the commutator `[X, Y]` of the classical
/// spinless coordinate matrices for every particle count.
pub fn spinless_orbit_matrix(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Classical spinless coordinate matrices: `X = diag(q)` and `Y` with
/// `1/(q_i - q_j)` off the diagonal, zero on it.
pub fn classical_spinless_matrices(
    q: &[Complex64],
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = q.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let sep = (q[i] - q[j]).norm();
            if sep <= COLLISION_TOLERANCE {
                return Err(Error::Collision {
                    separation: sep,
                    tolerance: COLLISION_TOLERANCE,
                    context: "classical coordinate matrices".to_string(),
                });
            }
        }
    }
    let x = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            q[i]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let y = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(0.0, 0.0)
        } else {
            1.0 / (q[i] - q[j])
        }
    });
    Ok((x, y))
}
