//! Pair potentials, Weierstrass functions, and spectral-parameter kernels.
//!
//! The three interaction variants share one interface: a pair potential
//! `U(q)`, an odd quasi-elliptic `zeta` with residue 1 at the origin, an
//! entire odd `sigma` vanishing simply at the origin, and a Lax kernel
//! `s_q(z)` with residue 1 at `z = 0` and a zero at `z = q` whose product
//! identity `s_q(z) s_{-q}(z) = U(z) - U(q)` drives the spectral theory.
//!
//! Elliptic functions are evaluated over the lattice spanned by `1` and
//! `tau` as symmetric lattice sums taken in Eisenstein order: the sum over
//! each lattice row `{m + n tau : m integer}` is folded into its cosecant
//! or cotangent closed form, and rows are then summed in symmetric pairs
//! `n, -n`. Each row pair contributes `O(e^(-2 pi n Im tau))`, so the
//! truncation at `truncation_radius` row pairs converges exponentially
//! while remaining an ordinary regularized lattice sum. The same row
//! closed forms evaluated at `z`-independent points produce the Eisenstein
//! series behind the invariants `g2` and `g3`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{Error, Result};

/// Distance to a singular point below which evaluation refuses to proceed.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Default number of symmetric row pairs kept in lattice sums.
pub const DEFAULT_TRUNCATION_RADIUS: u32 = 40;

/// Default tolerance attached to a lattice (smoothness gate, self-checks).
pub const DEFAULT_LATTICE_TOLERANCE: f64 = 1e-10;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Cotangent through the exponential form `i (e + 1) / (e - 1)`,
/// `e = exp(2 i w)`, evaluated on whichever half plane makes `|e| <= 1`.
/// Avoids the `inf / inf` failure of `cos w / sin w` for large `|Im w|`.
fn cot_stable(w: Complex64) -> Complex64 {
    if w.im >= 0.0 {
        let e = (2.0 * I * w).exp();
        I * (e + ONE) / (e - ONE)
    } else {
        -cot_stable(-w)
    }
}

/// Squared cosecant through `-4 e / (e - 1)^2`, `e = exp(2 i w)`, stable
/// for large `|Im w|` where it underflows cleanly to zero.
fn csc2_stable(w: Complex64) -> Complex64 {
    if w.im >= 0.0 {
        let e = (2.0 * I * w).exp();
        let d = e - ONE;
        -4.0 * e / (d * d)
    } else {
        csc2_stable(-w)
    }
}

/// Reciprocal sine through `2 i u / (u^2 - 1)`, `u = exp(i w)`.
fn inv_sin_stable(w: Complex64) -> Complex64 {
    if w.im >= 0.0 {
        let u = (I * w).exp();
        2.0 * I * u / (u * u - ONE)
    } else {
        -inv_sin_stable(-w)
    }
}

/// Lattice `Z + Z tau` with derived Weierstrass invariants.
///
/// `g2` and `g3` are recomputed deterministically from `(tau,
/// truncation_radius)`, so two lattices built from equal parameters are
/// bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub tau: Complex64,
    pub truncation_radius: u32,
    pub tolerance: f64,
    pub g2: Complex64,
    pub g3: Complex64,
}

impl Lattice {
    /// Builds the lattice spanned by `1` and `tau`, deriving `g2 = 60 E4`
    /// and `g3 = 140 E6` from row-summed Eisenstein series.
    ///
    /// Requires `Im tau > 0` and a smooth cubic. The discriminant test uses
    /// the product form `(2 pi)^12 q prod (1 - q^n)^24`, `q = exp(2 pi i
    /// tau)`: the float expression `g2^3 - 27 g3^2` cancels catastrophically
    /// for thin lattices (large `Im tau`) where the true discriminant is
    /// tiny but nonzero, and would reject perfectly smooth curves.
    pub fn new(tau: Complex64, truncation_radius: u32, tolerance: f64) -> Result<Self> {
        if !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::InvalidLattice {
                message: format!("tau = {tau} is not finite"),
            });
        }
        if tau.im <= 0.0 {
            return Err(Error::InvalidLattice {
                message: format!("tau = {tau} must lie in the upper half plane"),
            });
        }
        if truncation_radius == 0 {
            return Err(Error::InvalidLattice {
                message: "truncation_radius must be at least 1".to_string(),
            });
        }
        if !(tolerance > 0.0) {
            return Err(Error::InvalidLattice {
                message: format!("tolerance {tolerance} must be positive"),
            });
        }

        let nome = (2.0 * PI * I * tau).exp();
        let mut disc_scale = nome.norm();
        for n in 1..=24u32 {
            let qn = nome.powu(n);
            disc_scale *= (ONE - qn).norm().powi(24);
            if qn.norm() < 1e-18 {
                break;
            }
        }
        if disc_scale == 0.0 {
            return Err(Error::InvalidLattice {
                message: format!(
                    "discriminant underflows for tau = {tau}; the cubic is numerically degenerate"
                ),
            });
        }

        // Row closed forms for the weight 4 and 6 Eisenstein series, from
        // derivatives of pi cot(pi w): with c = cot(pi n tau) and
        // s = csc^2(pi n tau),
        //   sum_m (m + n tau)^-4 = (pi^4 / 3) s (2 c^2 + s),
        //   sum_m (m + n tau)^-6 = (pi^6 / 15) (1 + c^2)(2 + 15 c^2 + 15 c^4),
        // and the n = 0 rows are 2 zeta(4) and 2 zeta(6).
        let mut e4 = c64(PI.powi(4) / 45.0, 0.0);
        let mut e6 = c64(2.0 * PI.powi(6) / 945.0, 0.0);
        for n in 1..=truncation_radius {
            let w = PI * (n as f64) * tau;
            let c2 = {
                let c = cot_stable(w);
                c * c
            };
            let s = csc2_stable(w);
            e4 += 2.0 * (PI.powi(4) / 3.0) * s * (2.0 * c2 + s);
            e6 += 2.0 * (PI.powi(6) / 15.0) * (ONE + c2) * (2.0 + 15.0 * c2 + 15.0 * c2 * c2);
        }

        Ok(Lattice {
            tau,
            truncation_radius,
            tolerance,
            g2: 60.0 * e4,
            g3: 140.0 * e6,
        })
    }

    /// Lattice with the default truncation radius and tolerance.
    pub fn with_tau(tau: Complex64) -> Result<Self> {
        Lattice::new(tau, DEFAULT_TRUNCATION_RADIUS, DEFAULT_LATTICE_TOLERANCE)
    }

    /// Reduces `z` into the fundamental cell centered at the origin by
    /// subtracting the nearest lattice translate (exact for periodic
    /// functions).
    pub(crate) fn reduce(&self, z: Complex64) -> Complex64 {
        let b = z.im / self.tau.im;
        let a = z.re - b * self.tau.re;
        (a - a.round()) + (b - b.round()) * self.tau
    }

    /// Distance from `z` to the nearest lattice point.
    pub(crate) fn distance_to_lattice(&self, z: Complex64) -> f64 {
        let zr = self.reduce(z);
        let mut d = f64::INFINITY;
        for m in -1..=1 {
            for n in -1..=1 {
                let w = zr - c64(m as f64, 0.0) - (n as f64) * self.tau;
                d = d.min(w.norm());
            }
        }
        d
    }

    fn check_off_lattice(&self, z: Complex64) -> Result<()> {
        if self.distance_to_lattice(z) < POLE_TOLERANCE {
            Err(Error::Pole {
                point: z,
                tolerance: POLE_TOLERANCE,
            })
        } else {
            Ok(())
        }
    }

    /// Linear coefficient of the quasi-periodic part of `zeta`:
    /// `pi^2/3 + 2 pi^2 sum_n csc^2(pi n tau)`.
    fn zeta_linear_coeff(&self) -> Complex64 {
        let mut c = c64(PI * PI / 3.0, 0.0);
        for n in 1..=self.truncation_radius {
            c += 2.0 * PI * PI * csc2_stable(PI * (n as f64) * self.tau);
        }
        c
    }
}

/// Interaction variant: which pair potential and kernel family the system
/// uses. The elliptic variant carries its lattice.
#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    Rational,
    Trigonometric,
    Elliptic(Lattice),
}

impl Variant {
    pub fn lattice(&self) -> Option<&Lattice> {
        match self {
            Variant::Elliptic(lat) => Some(lat),
            _ => None,
        }
    }

    /// Short lowercase name used in logs and output headers.
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Rational => "rational",
            Variant::Trigonometric => "trigonometric",
            Variant::Elliptic(_) => "elliptic",
        }
    }
}

/// Distance from `q` to the nearest pole of `1/sin^2` (multiples of pi).
fn distance_to_sin_poles(q: Complex64) -> f64 {
    let m = (q.re / PI).round();
    (q - c64(m * PI, 0.0)).norm()
}

/// Pair potential `U(q)`: `1/q^2`, `1/sin^2 q`, or `wp(q)`.
pub fn potential(q: Complex64, variant: &Variant) -> Result<Complex64> {
    match variant {
        Variant::Rational => {
            if q.norm() < POLE_TOLERANCE {
                return Err(Error::Pole {
                    point: q,
                    tolerance: POLE_TOLERANCE,
                });
            }
            Ok(1.0 / (q * q))
        }
        Variant::Trigonometric => {
            if distance_to_sin_poles(q) < POLE_TOLERANCE {
                return Err(Error::Pole {
                    point: q,
                    tolerance: POLE_TOLERANCE,
                });
            }
            Ok(csc2_stable(q))
        }
        Variant::Elliptic(lat) => wp(q, lat),
    }
}

/// Derivative of the pair potential, `U'(q)`, used by closed-form
/// Hamiltonian vector fields.
pub fn potential_prime(q: Complex64, variant: &Variant) -> Result<Complex64> {
    match variant {
        Variant::Rational => {
            if q.norm() < POLE_TOLERANCE {
                return Err(Error::Pole {
                    point: q,
                    tolerance: POLE_TOLERANCE,
                });
            }
            Ok(-2.0 / (q * q * q))
        }
        Variant::Trigonometric => {
            if distance_to_sin_poles(q) < POLE_TOLERANCE {
                return Err(Error::Pole {
                    point: q,
                    tolerance: POLE_TOLERANCE,
                });
            }
            Ok(-2.0 * csc2_stable(q) * cot_stable(q))
        }
        Variant::Elliptic(lat) => wp_prime(q, lat),
    }
}

/// Weierstrass `wp(z)` by symmetric row-paired lattice summation.
///
/// `z` is first reduced into the fundamental cell (exact, `wp` is
/// periodic); each remaining row enters through its cosecant closed form:
///
/// `wp(z) = -pi^2/3 + pi^2 csc^2(pi z)
///          + pi^2 sum_n [csc^2(pi(z - n tau)) + csc^2(pi(z + n tau))
///                        - 2 csc^2(pi n tau)]`.
pub fn wp(z: Complex64, lat: &Lattice) -> Result<Complex64> {
    lat.check_off_lattice(z)?;
    let zr = lat.reduce(z);
    let mut s = c64(-PI * PI / 3.0, 0.0) + PI * PI * csc2_stable(PI * zr);
    for n in 1..=lat.truncation_radius {
        let shift = (n as f64) * lat.tau;
        s += PI
            * PI
            * (csc2_stable(PI * (zr - shift)) + csc2_stable(PI * (zr + shift))
                - 2.0 * csc2_stable(PI * shift));
    }
    Ok(s)
}

/// Weierstrass `wp'(z)`, the derivative of the row-summed `wp`.
pub fn wp_prime(z: Complex64, lat: &Lattice) -> Result<Complex64> {
    lat.check_off_lattice(z)?;
    let zr = lat.reduce(z);
    let term = |w: Complex64| csc2_stable(w) * cot_stable(w);
    let mut s = term(PI * zr);
    for n in 1..=lat.truncation_radius {
        let shift = (n as f64) * lat.tau;
        s += term(PI * (zr - shift)) + term(PI * (zr + shift));
    }
    Ok(-2.0 * PI.powi(3) * s)
}

/// Variant `zeta`: the odd function with residue 1 at the origin whose
/// derivative is minus the potential-family generator.
///
/// Rational: `1/z`. Trigonometric: `1/sin z` (the literal convention; see
/// [`zeta_w_cot`] for the cotangent alternate, which is what the elliptic
/// `zeta` actually degenerates to). Elliptic: the Weierstrass `zeta` by
/// row-paired cotangent sums,
///
/// `zeta(z) = c0 z + pi cot(pi z)
///            + pi sum_n [cot(pi(z - n tau)) + cot(pi(z + n tau))]`,
///
/// with `c0` chosen so `zeta' = -wp` and the `z^1` Taylor term vanishes.
/// The elliptic form is evaluated without cell reduction (`zeta` is only
/// quasi-periodic), valid for `|Im z|` well inside `truncation_radius *
/// Im tau`, which covers every fundamental-domain use here.
pub fn zeta_w(z: Complex64, variant: &Variant) -> Result<Complex64> {
    match variant {
        Variant::Rational => {
            if z.norm() < POLE_TOLERANCE {
                return Err(Error::Pole {
                    point: z,
                    tolerance: POLE_TOLERANCE,
                });
            }
            Ok(1.0 / z)
        }
        Variant::Trigonometric => {
            if distance_to_sin_poles(z) < POLE_TOLERANCE {
                return Err(Error::Pole {
                    point: z,
                    tolerance: POLE_TOLERANCE,
                });
            }
            Ok(inv_sin_stable(z))
        }
        Variant::Elliptic(lat) => {
            lat.check_off_lattice(z)?;
            let mut s = lat.zeta_linear_coeff() * z + PI * cot_stable(PI * z);
            for n in 1..=lat.truncation_radius {
                let shift = (n as f64) * lat.tau;
                s += PI * (cot_stable(PI * (z - shift)) + cot_stable(PI * (z + shift)));
            }
            Ok(s)
        }
    }
}

/// Cotangent alternate for the trigonometric `zeta` convention.
///
/// `cot z` is the trigonometric degeneration of the elliptic `zeta` (up to
/// the linear term) and the form whose difference reproduces the
/// trigonometric Lax kernel; the default [`zeta_w`] keeps the literal
/// `1/sin z`.
pub fn zeta_w_cot(z: Complex64) -> Result<Complex64> {
    if distance_to_sin_poles(z) < POLE_TOLERANCE {
        return Err(Error::Pole {
            point: z,
            tolerance: POLE_TOLERANCE,
        });
    }
    Ok(cot_stable(z))
}

/// Weierstrass `sigma`: entire, odd, with a simple zero at the origin,
/// `sigma(z) ~ z` near 0, and `sigma'/sigma = zeta`. Evaluated as the
/// row-product form
///
/// `sigma(z) = exp(c0 z^2 / 2) sin(pi z) / pi
///             * prod_n [1 - sin^2(pi z) csc^2(pi n tau)]`,
///
/// valid on the same strip as the elliptic `zeta`. No poles, so no error
/// path.
pub fn sigma_w(z: Complex64, lat: &Lattice) -> Complex64 {
    let sin2 = {
        let s = (PI * z).sin();
        s * s
    };
    let mut prod = (lat.zeta_linear_coeff() * z * z / 2.0).exp() * (PI * z).sin() / PI;
    for n in 1..=lat.truncation_radius {
        prod *= ONE - sin2 * csc2_stable(PI * (n as f64) * lat.tau);
    }
    prod
}

/// Lax kernel `s_q(z)`: residue 1 at `z = 0`, zero at `z = q`, and the
/// product identity `s_q(z) s_{-q}(z) = U(z) - U(q)`.
///
/// Rational: `1/z - 1/q`. Trigonometric: `cot z - cot q`, the unique form
/// in the family that satisfies all three kernel laws (the literal
/// sine-substitution alternate is kept as
/// [`lax_kernel_sine_literal`] and fails the zero and product laws; the
/// unit tests record the discrimination). Elliptic:
/// `sigma(z - q) / (sigma(z) sigma(-q))`.
pub fn lax_kernel(q: Complex64, z: Complex64, variant: &Variant) -> Result<Complex64> {
    match variant {
        Variant::Rational => {
            if z.norm() < POLE_TOLERANCE || q.norm() < POLE_TOLERANCE {
                return Err(Error::Pole {
                    point: if z.norm() < POLE_TOLERANCE { z } else { q },
                    tolerance: POLE_TOLERANCE,
                });
            }
            Ok(1.0 / z - 1.0 / q)
        }
        Variant::Trigonometric => {
            if distance_to_sin_poles(z) < POLE_TOLERANCE {
                return Err(Error::Pole {
                    point: z,
                    tolerance: POLE_TOLERANCE,
                });
            }
            if distance_to_sin_poles(q) < POLE_TOLERANCE {
                return Err(Error::Pole {
                    point: q,
                    tolerance: POLE_TOLERANCE,
                });
            }
            Ok(cot_stable(z) - cot_stable(q))
        }
        Variant::Elliptic(lat) => {
            lat.check_off_lattice(z)?;
            lat.check_off_lattice(q)?;
            Ok(sigma_w(z - q, lat) / (sigma_w(z, lat) * sigma_w(-q, lat)))
        }
    }
}

/// Literal sine-substitution form of the trigonometric kernel,
/// `1/z - sin q`.
///
/// Kept for comparison: it has residue 1 at `z = 0` but neither vanishes
/// at `z = q` nor satisfies the product identity, so the spectral
/// machinery uses [`lax_kernel`] instead.
pub fn lax_kernel_sine_literal(q: Complex64, z: Complex64) -> Result<Complex64> {
    if z.norm() < POLE_TOLERANCE {
        return Err(Error::Pole {
            point: z,
            tolerance: POLE_TOLERANCE,
        });
    }
    Ok(1.0 / z - q.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_lattice() -> Lattice {
        Lattice::with_tau(c64(0.0, 1.0)).unwrap()
    }

    fn skew_lattice() -> Lattice {
        Lattice::with_tau(c64(0.5, 0.9)).unwrap()
    }

    #[test]
    fn rational_potential_simple_values() {
        let u = potential(c64(0.5, 0.0), &Variant::Rational).unwrap();
        assert!((u - c64(4.0, 0.0)).norm() < 1e-15);
        let u = potential(c64(0.0, 2.0), &Variant::Rational).unwrap();
        assert!((u - c64(-0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trigonometric_potential_simple_values() {
        let u = potential(c64(PI / 2.0, 0.0), &Variant::Trigonometric).unwrap();
        assert!((u - c64(1.0, 0.0)).norm() < 1e-14);
        let u = potential(c64(PI / 6.0, 0.0), &Variant::Trigonometric).unwrap();
        assert!((u - c64(4.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn potential_rejects_poles() {
        assert!(matches!(
            potential(c64(0.0, 0.0), &Variant::Rational),
            Err(Error::Pole { .. })
        ));
        assert!(matches!(
            potential(c64(PI, 0.0), &Variant::Trigonometric),
            Err(Error::Pole { .. })
        ));
        let lat = square_lattice();
        assert!(matches!(
            potential(c64(1.0, 1.0), &Variant::Elliptic(lat)),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn lattice_rejects_lower_half_plane() {
        assert!(Lattice::with_tau(c64(0.3, -1.0)).is_err());
        assert!(Lattice::with_tau(c64(0.3, 0.0)).is_err());
    }

    #[test]
    fn lattice_construction_is_bit_deterministic() {
        let a = skew_lattice();
        let b = skew_lattice();
        assert_eq!(a.g2.re.to_bits(), b.g2.re.to_bits());
        assert_eq!(a.g2.im.to_bits(), b.g2.im.to_bits());
        assert_eq!(a.g3.re.to_bits(), b.g3.re.to_bits());
        assert_eq!(a.g3.im.to_bits(), b.g3.im.to_bits());
    }

    #[test]
    fn square_lattice_invariants_match_closed_forms() {
        // For the square lattice, g2 = Gamma(1/4)^8 / (16 pi^2) and g3 = 0.
        let gamma_quarter = 3.625_609_908_221_908_3_f64;
        let g2_ref = gamma_quarter.powi(8) / (16.0 * PI * PI);
        let lat = square_lattice();
        assert!(
            (lat.g2 - c64(g2_ref, 0.0)).norm() < 1e-9 * g2_ref,
            "g2 = {}, reference {}",
            lat.g2,
            g2_ref
        );
        assert!(lat.g3.norm() < 1e-10);
    }

    #[test]
    fn wp_is_doubly_periodic() {
        for lat in [square_lattice(), skew_lattice()] {
            let z = c64(0.31, 0.17);
            let w0 = wp(z, &lat).unwrap();
            let w1 = wp(z + ONE, &lat).unwrap();
            let wt = wp(z + lat.tau, &lat).unwrap();
            assert!((w1 - w0).norm() < 1e-12);
            assert!((wt - w0).norm() < 1e-12);
        }
    }

    #[test]
    fn wp_satisfies_the_cubic_differential_equation() {
        for lat in [square_lattice(), skew_lattice()] {
            for &z in &[c64(0.31, 0.17), c64(-0.27, 0.33), c64(0.41, -0.22)] {
                let p = wp(z, &lat).unwrap();
                let dp = wp_prime(z, &lat).unwrap();
                let lhs = dp * dp;
                let rhs = 4.0 * p * p * p - lat.g2 * p - lat.g3;
                assert!(
                    (lhs - rhs).norm() < 1e-10,
                    "residual {} at z = {z}",
                    (lhs - rhs).norm()
                );
            }
        }
    }

    #[test]
    fn wp_is_even_and_wp_prime_is_odd() {
        let lat = skew_lattice();
        let z = c64(0.23, -0.31);
        assert!((wp(z, &lat).unwrap() - wp(-z, &lat).unwrap()).norm() < 1e-12);
        assert!((wp_prime(z, &lat).unwrap() + wp_prime(-z, &lat).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn zeta_derivative_is_minus_wp() {
        let lat = skew_lattice();
        let variant = Variant::Elliptic(lat.clone());
        let z = c64(0.29, 0.13);
        let h = 1e-6;
        let d = (zeta_w(z + c64(h, 0.0), &variant).unwrap()
            - zeta_w(z - c64(h, 0.0), &variant).unwrap())
            / (2.0 * h);
        assert!((d + wp(z, &lat).unwrap()).norm() < 1e-7);
    }

    #[test]
    fn sigma_log_derivative_is_zeta() {
        let lat = skew_lattice();
        let z = c64(0.29, 0.13);
        let h = 1e-6;
        let d = (sigma_w(z + c64(h, 0.0), &lat) - sigma_w(z - c64(h, 0.0), &lat)) / (2.0 * h);
        let ratio = d / sigma_w(z, &lat);
        let variant = Variant::Elliptic(lat);
        assert!((ratio - zeta_w(z, &variant).unwrap()).norm() < 1e-7);
    }

    #[test]
    fn sigma_is_odd_with_unit_slope_at_zero() {
        let lat = skew_lattice();
        let z = c64(0.21, -0.34);
        assert!((sigma_w(z, &lat) + sigma_w(-z, &lat)).norm() < 1e-13);
        assert_eq!(sigma_w(c64(0.0, 0.0), &lat), c64(0.0, 0.0));
        let eps = c64(1e-8, 0.0);
        assert!((sigma_w(eps, &lat) / eps - ONE).norm() < 1e-8);
    }

    #[test]
    fn wp_degenerates_to_the_trigonometric_potential() {
        // Thin lattice: the n != 0 rows are exponentially negligible and
        // wp(z) -> pi^2 / sin^2(pi z) - pi^2 / 3.
        let lat = Lattice::with_tau(c64(0.0, 50.0)).unwrap();
        for &z in &[c64(0.3, 0.1), c64(-0.2, 0.35), c64(0.45, -0.2)] {
            let limit = PI * PI * csc2_stable(PI * z) - c64(PI * PI / 3.0, 0.0);
            assert!((wp(z, &lat).unwrap() - limit).norm() < 1e-12);
        }
    }

    #[test]
    fn zeta_literal_conventions() {
        let z = c64(0.37, 0.21);
        let zr = zeta_w(z, &Variant::Rational).unwrap();
        assert!((zr - 1.0 / z).norm() < 1e-15);
        let zt = zeta_w(z, &Variant::Trigonometric).unwrap();
        assert!((zt - 1.0 / z.sin()).norm() < 1e-13);
        let zc = zeta_w_cot(z).unwrap();
        assert!((zc - z.cos() / z.sin()).norm() < 1e-13);
    }

    #[test]
    fn kernel_has_residue_one_at_origin() {
        let q = c64(0.23, -0.31);
        let lat = square_lattice();
        for variant in [
            Variant::Rational,
            Variant::Trigonometric,
            Variant::Elliptic(lat),
        ] {
            let z = c64(1e-7, 0.0);
            let s = lax_kernel(q, z, &variant).unwrap();
            assert!(
                (z * s - ONE).norm() < 1e-6,
                "variant {} residue probe {}",
                variant.name(),
                z * s
            );
        }
    }

    #[test]
    fn kernel_vanishes_at_q() {
        let q = c64(0.23, -0.31);
        let lat = square_lattice();
        for variant in [
            Variant::Rational,
            Variant::Trigonometric,
            Variant::Elliptic(lat),
        ] {
            let s = lax_kernel(q, q, &variant).unwrap();
            assert!(s.norm() < 1e-12, "variant {}", variant.name());
        }
    }

    #[test]
    fn kernel_product_identity_all_variants() {
        let q = c64(0.23, -0.31);
        let z = c64(0.31, 0.17);
        let lat = square_lattice();
        for variant in [
            Variant::Rational,
            Variant::Trigonometric,
            Variant::Elliptic(lat),
        ] {
            let lhs =
                lax_kernel(q, z, &variant).unwrap() * lax_kernel(-q, z, &variant).unwrap();
            let rhs = potential(z, &variant).unwrap() - potential(q, &variant).unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-11,
                "variant {} identity residual {}",
                variant.name(),
                (lhs - rhs).norm()
            );
        }
    }

    #[test]
    fn sine_literal_kernel_fails_the_zero_law() {
        // The discriminating test between the two trigonometric kernel
        // conventions: the literal substitution keeps the residue but loses
        // the zero at z = q, so it cannot feed the spectral identities.
        let q = c64(0.4, 0.1);
        let v = lax_kernel_sine_literal(q, q).unwrap();
        assert!(v.norm() > 0.1);
        let good = lax_kernel(q, q, &Variant::Trigonometric).unwrap();
        assert!(good.norm() < 1e-12);
    }

    #[test]
    fn elliptic_kernel_degenerates_to_rational_near_small_arguments() {
        // For small q and z the elliptic kernel approaches 1/z - 1/q.
        let lat = square_lattice();
        let variant = Variant::Elliptic(lat);
        let q = c64(0.02, -0.015);
        let z = c64(0.013, 0.011);
        let s = lax_kernel(q, z, &variant).unwrap();
        let r = 1.0 / z - 1.0 / q;
        assert!((s - r).norm() / r.norm() < 1e-3);
    }

    #[test]
    fn stable_trig_helpers_match_naive_forms_on_moderate_arguments() {
        let w = c64(0.7, -0.4);
        assert!((cot_stable(w) - w.cos() / w.sin()).norm() < 1e-14);
        assert!((csc2_stable(w) - 1.0 / (w.sin() * w.sin())).norm() < 1e-13);
        assert!((inv_sin_stable(w) - 1.0 / w.sin()).norm() < 1e-14);
        // Deep in the upper half plane the naive quotient is inf/inf; the
        // stable forms stay finite.
        let deep = c64(0.3, 300.0);
        assert!(cot_stable(deep).is_finite());
        assert!(csc2_stable(deep).norm() < 1e-200);
    }

    #[test]
    fn thin_lattice_is_accepted_by_the_smoothness_gate() {
        // Im tau = 50 has a true discriminant around 1e-125; the product
        // form must accept it (the float g2^3 - 27 g3^2 is pure noise).
        let lat = Lattice::with_tau(c64(0.0, 50.0)).unwrap();
        assert!(lat.g2.norm() > 1.0);
    }
}
