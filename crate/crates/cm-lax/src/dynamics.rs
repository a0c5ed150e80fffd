//! Canonical-coordinate machinery shared by the Poisson bracket and the
//! integrators: flattening phase points to coordinate vectors,
//! finite-difference gradients, the symplectic pairing of each chart, and
//! Hamiltonian vector fields.
//!
//! Coordinate order is fixed and load-bearing (serialization and the CSV
//! trajectory columns reuse it): quiver points flatten as X, Y, u, v in
//! row-major entry order; particle points as q, p, a, b. All Hamiltonians
//! here are holomorphic in these coordinates, so central differences along
//! the real axis approximate the complex derivatives directly.
//!
//! Chart structures: the particle chart and the rational quiver chart are
//! flat, pairing (q, p) and (a, b) componentwise, respectively (X, Y)
//! entrywise-transposed and (u, v) likewise. The trigonometric quiver
//! chart carries group-valued X, so its vector field takes the cotangent
//! form Xdot = G_Y X, Ydot = [G_Y, Y] - X G_X (G the trace gradients) and
//! its bracket pairing the matching contraction; the convention is pinned
//! by the moment-preservation and conservation tests rather than assumed.
//! Trace and residue Hamiltonians on trigonometric particle points are
//! functions of that quiver chart, so their flows and brackets route
//! through the chart image (see `flows::ode_flow` and
//! `ham::poisson_bracket`); the flat particle pairing is a different
//! structure that does not reproduce their conservation laws.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ham::{self, HamiltonianSpec};
use crate::linalg;
use crate::phase::{ParticleState, PhasePoint, QuiverDatum};
use crate::specfun::{potential, potential_prime, Variant};
use crate::{Error, Result};

/// Finite-difference step for ODE right-hand sides; one Richardson level
/// is applied on top.
pub(crate) const ODE_FD_STEP: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn dimension(point: &PhasePoint) -> usize {
    match point {
        PhasePoint::Quiver(d) => 2 * d.n() * d.n() + 2 * d.n() * d.k(),
        PhasePoint::Particle(s) => 2 * s.n() + 2 * s.n() * s.k(),
    }
}

fn push_matrix(out: &mut Vec<Complex64>, m: &DMatrix<Complex64>) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(m[(r, c)]);
        }
    }
}

fn take_matrix(coords: &[Complex64], at: &mut usize, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_row_slice(rows, cols, &coords[*at..*at + rows * cols]);
    *at += rows * cols;
    m
}

pub(crate) fn flatten(point: &PhasePoint) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(dimension(point));
    match point {
        PhasePoint::Quiver(d) => {
            push_matrix(&mut out, &d.x);
            push_matrix(&mut out, &d.y);
            push_matrix(&mut out, &d.u);
            push_matrix(&mut out, &d.v);
        }
        PhasePoint::Particle(s) => {
            out.extend_from_slice(&s.q);
            out.extend_from_slice(&s.p);
            push_matrix(&mut out, &s.a);
            push_matrix(&mut out, &s.b);
        }
    }
    out
}

/// Rebuilds a point of the same chart, variant, and shape from flattened
/// coordinates. Shape validation is inherited from the template, so this
/// is safe to call in integrator inner loops.
pub(crate) fn unflatten(template: &PhasePoint, coords: &[Complex64]) -> PhasePoint {
    debug_assert_eq!(coords.len(), dimension(template));
    let mut at = 0usize;
    match template {
        PhasePoint::Quiver(d) => {
            let (n, k) = (d.n(), d.k());
            PhasePoint::Quiver(QuiverDatum {
                variant: d.variant.clone(),
                x: take_matrix(coords, &mut at, n, n),
                y: take_matrix(coords, &mut at, n, n),
                u: take_matrix(coords, &mut at, n, k),
                v: take_matrix(coords, &mut at, k, n),
            })
        }
        PhasePoint::Particle(s) => {
            let (n, k) = (s.n(), s.k());
            let q = coords[at..at + n].to_vec();
            at += n;
            let p = coords[at..at + n].to_vec();
            at += n;
            PhasePoint::Particle(ParticleState {
                variant: s.variant.clone(),
                q,
                p,
                a: take_matrix(coords, &mut at, n, k),
                b: take_matrix(coords, &mut at, n, k),
            })
        }
    }
}

/// Central-difference partials of the Hamiltonian with respect to every
/// flattened coordinate, at a single step size.
pub(crate) fn gradient_raw(
    h: &HamiltonianSpec,
    point: &PhasePoint,
    step: f64,
) -> Result<Vec<Complex64>> {
    let base = flatten(point);
    let mut coords = base.clone();
    let mut grad = Vec::with_capacity(base.len());
    for m in 0..base.len() {
        coords[m] = base[m] + step;
        let plus = ham::evaluate(h, &unflatten(point, &coords))?;
        coords[m] = base[m] - step;
        let minus = ham::evaluate(h, &unflatten(point, &coords))?;
        coords[m] = base[m];
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}

/// Richardson-extrapolated gradient across `step` and `step / 2`.
pub(crate) fn gradient(
    h: &HamiltonianSpec,
    point: &PhasePoint,
    step: f64,
) -> Result<Vec<Complex64>> {
    let coarse = gradient_raw(h, point, step)?;
    let fine = gradient_raw(h, point, step / 2.0)?;
    Ok(coarse
        .iter()
        .zip(fine.iter())
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect())
}

/// Pairing of two gradients under the chart's Poisson structure:
/// `sum dF/dxi dG/dpi - dG/dxi dF/dpi` over conjugate pairs on the flat
/// charts, and the group-cotangent contraction on the trigonometric
/// quiver chart, where it is the unique pairing whose Hamiltonian fields
/// are the (conservation-validated) `Xdot = G_Y X` form.
pub(crate) fn pairing_contraction(
    point: &PhasePoint,
    gf: &[Complex64],
    gg: &[Complex64],
) -> Complex64 {
    let mut acc = ZERO;
    match point {
        PhasePoint::Particle(s) => {
            let (n, k) = (s.n(), s.k());
            for i in 0..n {
                acc += gf[i] * gg[n + i] - gg[i] * gf[n + i];
            }
            let a0 = 2 * n;
            let b0 = 2 * n + n * k;
            for m in 0..n * k {
                acc += gf[a0 + m] * gg[b0 + m] - gg[a0 + m] * gf[b0 + m];
            }
        }
        PhasePoint::Quiver(d) if matches!(d.variant, Variant::Trigonometric) => {
            let (n, k) = (d.n(), d.k());
            let mut at = 0usize;
            // Trace-pairing gradients: dH = tr(G_X dX) + tr(G_Y dY).
            let gxf = take_matrix(gf, &mut at, n, n).transpose();
            let gyf = take_matrix(gf, &mut at, n, n).transpose();
            at = 0;
            let gxg = take_matrix(gg, &mut at, n, n).transpose();
            let gyg = take_matrix(gg, &mut at, n, n).transpose();
            acc += (&d.x * &gxf * &gyg).trace() - (&gyf * &d.x * &gxg).trace();
            acc += (&d.y * (&gyf * &gyg - &gyg * &gyf)).trace();
            acc += flat_spin_terms(n, k, gf, gg);
        }
        PhasePoint::Quiver(d) => {
            let (n, k) = (d.n(), d.k());
            let y0 = n * n;
            for a in 0..n {
                for b in 0..n {
                    let x_ab = a * n + b;
                    let y_ba = y0 + b * n + a;
                    acc += gf[x_ab] * gg[y_ba] - gg[x_ab] * gf[y_ba];
                }
            }
            acc += flat_spin_terms(n, k, gf, gg);
        }
    }
    acc
}

fn flat_spin_terms(n: usize, k: usize, gf: &[Complex64], gg: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    let u0 = 2 * n * n;
    let v0 = 2 * n * n + n * k;
    for i in 0..n {
        for al in 0..k {
            let u_ia = u0 + i * k + al;
            let v_ai = v0 + al * n + i;
            acc += gf[u_ia] * gg[v_ai] - gg[u_ia] * gf[v_ai];
        }
    }
    acc
}

/// Time derivative of the flattened coordinates under the Hamiltonian.
/// Closed forms cover the two cases that dominate runtime (trace
/// Hamiltonians on quiver data and the two-body energy on particles);
/// everything else goes through finite-difference gradients.
pub(crate) fn vector_field(h: &HamiltonianSpec, point: &PhasePoint) -> Result<Vec<Complex64>> {
    match (h, point) {
        (HamiltonianSpec::Trace(i), PhasePoint::Quiver(d)) if *i >= 1 => trace_field(d, *i),
        (HamiltonianSpec::ParticleH2, PhasePoint::Particle(s)) => particle_h2_field(s),
        _ => {
            let grad = gradient(h, point, ODE_FD_STEP)?;
            Ok(field_from_gradient(point, &grad))
        }
    }
}

/// Flow of `(1/i) tr Y^i`: only X moves. Rational chart: Xdot = Y^(i-1).
/// Trigonometric chart: Xdot = Y^(i-1) X, the group-cotangent transport of
/// the same gradient.
fn trace_field(d: &QuiverDatum, i: u32) -> Result<Vec<Complex64>> {
    let (n, k) = (d.n(), d.k());
    let power = linalg::mat_pow(&d.y, i - 1);
    let xdot = match d.variant {
        Variant::Rational => power,
        Variant::Trigonometric => power * &d.x,
        Variant::Elliptic(_) => {
            return Err(Error::Validation {
                message: "the elliptic variant has no quiver chart".to_string(),
            })
        }
    };
    let mut out = Vec::with_capacity(2 * n * n + 2 * n * k);
    push_matrix(&mut out, &xdot);
    out.resize(2 * n * n + 2 * n * k, ZERO);
    Ok(out)
}

/// Hamilton's equations for the two-body energy in closed form. The signs
/// are tied to the potential-term sign constant and validated by the
/// conservation tests.
fn particle_h2_field(s: &ParticleState) -> Result<Vec<Complex64>> {
    let (n, k) = (s.n(), s.k());
    let c = Complex64::new(ham::H2_POTENTIAL_SIGN, 0.0);
    let f = s.contraction_matrix();
    let mut pdot = vec![ZERO; n];
    let mut adot = DMatrix::<Complex64>::zeros(n, k);
    let mut bdot = DMatrix::<Complex64>::zeros(n, k);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let diff = s.q[i] - s.q[j];
            let pot = potential(diff, &s.variant)?;
            let dpot = potential_prime(diff, &s.variant)?;
            pdot[i] -= c * f[(i, j)] * f[(j, i)] * dpot;
            for al in 0..k {
                adot[(i, al)] += c * f[(i, j)] * pot * s.a[(j, al)];
                bdot[(i, al)] -= c * f[(j, i)] * pot * s.b[(j, al)];
            }
        }
    }
    let mut out = Vec::with_capacity(2 * n + 2 * n * k);
    out.extend_from_slice(&s.p);
    out.extend_from_slice(&pdot);
    push_matrix(&mut out, &adot);
    push_matrix(&mut out, &bdot);
    Ok(out)
}

/// Raises a gradient to the Hamiltonian vector field of the chart.
fn field_from_gradient(point: &PhasePoint, grad: &[Complex64]) -> Vec<Complex64> {
    match point {
        PhasePoint::Particle(s) => {
            let (n, k) = (s.n(), s.k());
            let mut out = Vec::with_capacity(grad.len());
            out.extend_from_slice(&grad[n..2 * n]);
            out.extend(grad[..n].iter().map(|g| -g));
            let a0 = 2 * n;
            let b0 = 2 * n + n * k;
            out.extend_from_slice(&grad[b0..b0 + n * k]);
            out.extend(grad[a0..a0 + n * k].iter().map(|g| -g));
            out
        }
        PhasePoint::Quiver(d) => {
            let (n, k) = (d.n(), d.k());
            let mut at = 0usize;
            let dx = take_matrix(grad, &mut at, n, n);
            let dy = take_matrix(grad, &mut at, n, n);
            let du = take_matrix(grad, &mut at, n, k);
            let dv = take_matrix(grad, &mut at, k, n);
            let (xdot, ydot) = match d.variant {
                // The elliptic arm is unreachable (no elliptic quiver
                // chart is constructible); the flat form keeps the match
                // total without inventing behavior.
                Variant::Rational | Variant::Elliptic(_) => (dy.transpose(), -dx.transpose()),
                Variant::Trigonometric => {
                    let gx = dx.transpose();
                    let gy = dy.transpose();
                    let xdot = &gy * &d.x;
                    let ydot = &gy * &d.y - &d.y * &gy - &d.x * &gx;
                    (xdot, ydot)
                }
            };
            let mut out = Vec::with_capacity(grad.len());
            push_matrix(&mut out, &xdot);
            push_matrix(&mut out, &ydot);
            push_matrix(&mut out, &dv.transpose());
            push_matrix(&mut out, &(-du.transpose()));
            out
        }
    }
}
