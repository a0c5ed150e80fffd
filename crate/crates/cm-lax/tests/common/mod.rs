//! Shared helpers for the integration suites: deterministic seeded
//! states in every chart, an eigenvalue-free characteristic-polynomial
//! oracle, and small geometry utilities.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cm_lax::phase::{from_particles, ParticleState, PhasePoint, QuiverDatum};
use cm_lax::specfun::{Lattice, Variant};

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform complex sample in the square `[-half, half]^2`.
pub fn jitter(rng: &mut ChaCha8Rng, half: f64) -> Complex64 {
    let re = rng.gen_range(-half..half);
    let im = rng.gen_range(-half..half);
    Complex64::new(re, im)
}

/// Positions on a jittered ladder: rung spacing 0.75, jitter radius
/// 0.15, so pairwise separations stay above 0.45 and the real parts
/// keep their ordering (which makes eigenvalue-sorted roundtrips
/// directly comparable).
pub fn seeded_positions(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let center = 0.75 * (n as f64 - 1.0) / 2.0;
    (0..n)
        .map(|j| Complex64::new(0.75 * j as f64 - center, 0.0) + jitter(rng, 0.15))
        .collect()
}

/// A random particle state with safely separated positions, modest
/// momenta, unit-scale spin rows, and diagonal contractions scaled to
/// one so the state sits on the locus where particle and quiver
/// energies agree.
pub fn seeded_particle_state(variant: Variant, n: usize, k: usize, seed: u64) -> ParticleState {
    let mut rng = rng(seed);
    let q = seeded_positions(&mut rng, n);
    let p: Vec<Complex64> = (0..n).map(|_| jitter(&mut rng, 0.4)).collect();
    let mut a = DMatrix::from_fn(n, k, |_, _| jitter(&mut rng, 1.0));
    for i in 0..n {
        let norm = a.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for alpha in 0..k {
            a[(i, alpha)] /= Complex64::new(norm, 0.0);
        }
    }
    let mut b = DMatrix::from_fn(n, k, |i, alpha| a[(i, alpha)].conj() + 0.3 * jitter(&mut rng, 1.0));
    for i in 0..n {
        let fii: Complex64 = (0..k).map(|alpha| a[(i, alpha)] * b[(i, alpha)]).sum();
        assert!(
            fii.norm() > 0.05,
            "seed {seed} produced a nearly null spin pairing; pick another seed"
        );
        for alpha in 0..k {
            b[(i, alpha)] /= fii;
        }
    }
    ParticleState::new(variant, q, p, a, b).expect("ladder positions are collision-free")
}

/// A seeded on-shell quiver point, built by converting a seeded
/// particle state. Rational and trigonometric variants only.
pub fn seeded_onshell_quiver(variant: Variant, n: usize, k: usize, seed: u64) -> QuiverDatum {
    from_particles(&seeded_particle_state(variant, n, k, seed)).expect("conversion lands on-shell")
}

/// Base positions for elliptic states: pairwise separations stay clear
/// of the period lattice of `tau = i` with room for jitter.
pub const ELLIPTIC_BASE: [[f64; 2]; 4] = [
    [0.11, 0.29],
    [-0.31, -0.13],
    [0.36, -0.33],
    [-0.08, 0.42],
];

/// A gentle elliptic particle state: jittered base positions, momenta
/// of scale 0.15, unit spin rows with diagonal contractions scaled to
/// one. Callers that integrate over long windows should still check
/// `min_separation` stays comfortable for their seed.
pub fn seeded_elliptic_state(lat: &Lattice, n: usize, k: usize, seed: u64) -> ParticleState {
    assert!(n <= ELLIPTIC_BASE.len());
    let mut rng = rng(seed);
    let q: Vec<Complex64> = (0..n)
        .map(|j| c64(ELLIPTIC_BASE[j][0], ELLIPTIC_BASE[j][1]) + jitter(&mut rng, 0.03))
        .collect();
    let p: Vec<Complex64> = (0..n).map(|_| jitter(&mut rng, 0.15)).collect();
    let mut a = DMatrix::from_fn(n, k, |_, _| jitter(&mut rng, 1.0));
    for i in 0..n {
        let norm = a.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for alpha in 0..k {
            a[(i, alpha)] /= Complex64::new(norm, 0.0);
        }
    }
    let mut b = DMatrix::from_fn(n, k, |i, alpha| a[(i, alpha)].conj() + 0.1 * jitter(&mut rng, 1.0));
    for i in 0..n {
        let fii: Complex64 = (0..k).map(|alpha| a[(i, alpha)] * b[(i, alpha)]).sum();
        for alpha in 0..k {
            b[(i, alpha)] /= fii;
        }
    }
    ParticleState::new(Variant::Elliptic(lat.clone()), q, p, a, b)
        .expect("base positions are collision-free")
}

/// Flattened coordinates of a phase point, in the same order as the
/// trajectory table columns: `x, y, u, v` or `q, p, a, b`, each block
/// row-major.
pub fn flatten_point(point: &PhasePoint) -> Vec<Complex64> {
    fn push_matrix(out: &mut Vec<Complex64>, m: &DMatrix<Complex64>) {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out.push(m[(r, c)]);
            }
        }
    }
    let mut out = Vec::new();
    match point {
        PhasePoint::Quiver(d) => {
            push_matrix(&mut out, &d.x);
            push_matrix(&mut out, &d.y);
            push_matrix(&mut out, &d.u);
            push_matrix(&mut out, &d.v);
        }
        PhasePoint::Particle(s) => {
            out.extend(s.q.iter().copied());
            out.extend(s.p.iter().copied());
            push_matrix(&mut out, &s.a);
            push_matrix(&mut out, &s.b);
        }
    }
    out
}

/// Determinant by recursive cofactor expansion along the first row.
/// Exponential in the size, which is the point: it shares no code path
/// with the Schur-based eigenvalue routines it checks.
pub fn det_cofactor(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    match n {
        0 => c64(1.0, 0.0),
        1 => m[(0, 0)],
        _ => {
            let mut det = c64(0.0, 0.0);
            let mut sign = 1.0;
            for col in 0..n {
                let minor = DMatrix::from_fn(n - 1, n - 1, |r, c| {
                    m[(r + 1, if c < col { c } else { c + 1 })]
                });
                det += Complex64::new(sign, 0.0) * m[(0, col)] * det_cofactor(&minor);
                sign = -sign;
            }
            det
        }
    }
}

fn principal_minor_sum(m: &DMatrix<Complex64>, size: usize) -> Complex64 {
    let n = m.nrows();
    let mut total = c64(0.0, 0.0);
    let mut indices: Vec<usize> = (0..size).collect();
    loop {
        let sub = DMatrix::from_fn(size, size, |r, c| m[(indices[r], indices[c])]);
        total += det_cofactor(&sub);
        // advance to the next index combination, lexicographically
        let mut pos = size;
        while pos > 0 && indices[pos - 1] == n - size + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return total;
        }
        indices[pos - 1] += 1;
        for later in pos..size {
            indices[later] = indices[later - 1] + 1;
        }
    }
}

/// Characteristic polynomial of `m` as monic coefficients in descending
/// degree, via sums of principal minors: the coefficient of
/// `lambda^(n-j)` is `(-1)^j` times the sum of all `j x j` principal
/// minors. No eigenvalue computation is involved.
pub fn char_poly_principal_minors(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    let mut coeffs = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let sum = if j == 0 {
            c64(1.0, 0.0)
        } else {
            principal_minor_sum(m, j)
        };
        coeffs.push(Complex64::new(sign, 0.0) * sum);
    }
    coeffs
}

/// Distance from `z` to the lattice spanned by `1` and `tau`, searching
/// nearby lattice points after reducing the coefficients.
pub fn lattice_distance(z: Complex64, tau: Complex64) -> f64 {
    // coordinates of z in the (1, tau) basis
    let t = z.im / tau.im;
    let u = z.re - t * tau.re;
    let mut best = f64::INFINITY;
    for dm in -1..=2 {
        for dn in -1..=2 {
            let m = u.floor() + dm as f64;
            let n = t.floor() + dn as f64;
            let point = Complex64::new(m, 0.0) + Complex64::new(n, 0.0) * tau;
            best = best.min((z - point).norm());
        }
    }
    best
}

/// Largest absolute difference between two coefficient vectors.
pub fn max_coeff_diff(lhs: &[Complex64], rhs: &[Complex64]) -> f64 {
    lhs.iter()
        .zip(rhs)
        .map(|(l, r)| (l - r).norm())
        .fold(0.0, f64::max)
}
