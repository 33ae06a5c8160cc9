//! Jacobi theta functions, the two-phase combination `H`, and the genus-2
//! Riemann theta function with characteristics.
//!
//! Jacobi thetas use the nome `h = e^{iπτ}`:
//!
//! ```text
//! θ1(u|τ) = 2 Σ_{m≥0} (-1)^m h^{(m+1/2)²} sin((2m+1)πu)
//! θ2(u|τ) = 2 Σ_{m≥0}        h^{(m+1/2)²} cos((2m+1)πu)
//! θ3(u|τ) = 1 + 2 Σ_{m≥1}        h^{m²} cos(2mπu)
//! θ4(u|τ) = 1 + 2 Σ_{m≥1} (-1)^m h^{m²} cos(2mπu)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Terms below this fraction of the largest term bound are dropped.
const SERIES_CUTOFF: f64 = 1e-17;

/// Exponents beyond this real part would overflow binary64.
const EXP_LIMIT: f64 = 709.0;

fn sum_theta_series(j: u8, u: Complex64, tau: Complex64) -> Complex64 {
    let y = tau.im;
    let uy = u.im.abs();
    let half_integer = matches!(j, 1 | 2);
    let alternating = matches!(j, 1 | 4);
    let mut sum = if half_integer {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut m = if half_integer { 0u32 } else { 1u32 };
    loop {
        let n = if half_integer { m as f64 + 0.5 } else { m as f64 };
        // after reduction |Im u| <= Im τ / 2, so this bound decreases in m
        let bound = (-PI * y * n * n + 2.0 * PI * n * uy).exp();
        if bound < SERIES_CUTOFF && m > 0 {
            break;
        }
        let base = I * PI * tau * (n * n);
        let phase = I * (2.0 * PI * n) * u;
        let plus = (base + phase).exp();
        let minus = (base - phase).exp();
        let mut term = if j == 1 {
            // 2 sin(2πnu) = -i (e^{+} - e^{-})
            -I * (plus - minus)
        } else {
            plus + minus
        };
        if alternating && m % 2 == 1 {
            term = -term;
        }
        sum += term;
        m += 1;
    }
    sum
}

/// Jacobi theta function `θ_j(u | τ)`, `j ∈ 1..=4`.
///
/// The argument is first reduced into the fundamental parallelogram with
/// the quasi-periodicity factor peeled off; an overflow error is returned
/// when that factor leaves the binary64 range.
pub fn jacobi_theta(j: u8, u: Complex64, tau: Complex64) -> Result<Complex64> {
    if !(1..=4).contains(&j) {
        return Err(Error::Domain(format!("theta index must be 1..=4, got {j}")));
    }
    if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
        return Err(Error::Domain(format!("need Im τ > 0, got τ = {tau}")));
    }
    if !u.re.is_finite() || !u.im.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {u}")));
    }

    // u = w + nτ:  θ(w + nτ) = s^n e^{-iπn²τ - 2πinw} θ(w)
    let n = (u.im / tau.im).round();
    let w = u - tau * n;
    let log_factor = -I * PI * tau * (n * n) - I * (2.0 * PI * n) * w;
    if log_factor.re > EXP_LIMIT {
        return Err(Error::Overflow(u.im));
    }
    let mut factor = log_factor.exp();
    let odd_n = (n as i64).rem_euclid(2) == 1;
    if odd_n && matches!(j, 1 | 4) {
        factor = -factor;
    }

    // real shift: θ1, θ2 change sign under u → u + 1
    let m = w.re.round();
    let v = w - m;
    let odd_m = (m as i64).rem_euclid(2) == 1;
    if odd_m && matches!(j, 1 | 2) {
        factor = -factor;
    }

    let value = factor * sum_theta_series(j, v, tau);
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Overflow(u.im));
    }
    Ok(value)
}

/// `θ2` and `θ3` at the same argument and `τ = 2i𝔟`.
fn theta23(u: Complex64, frb: f64) -> Result<(Complex64, Complex64)> {
    let tau = Complex64::new(0.0, 2.0 * frb);
    Ok((jacobi_theta(2, u, tau)?, jacobi_theta(3, u, tau)?))
}

/// The two-phase combination
/// `θ3θ3 + θ2θ3 + θ3θ2 - θ2θ2` with moduli `2i𝔟₋` (first slot) and `2i𝔟₊`.
pub fn theta_h(u1: Complex64, u2: Complex64, frb_minus: f64, frb_plus: f64) -> Result<Complex64> {
    Ok(theta_h_with_scale(u1, u2, frb_minus, frb_plus)?.0)
}

/// `H` together with `(|θ3|+|θ2|)(|θ3|+|θ2|)`, a bound on its magnitude
/// used to judge whether `H` is numerically zero.
pub fn theta_h_with_scale(
    u1: Complex64,
    u2: Complex64,
    frb_minus: f64,
    frb_plus: f64,
) -> Result<(Complex64, f64)> {
    if !(frb_minus > 0.0 && frb_plus > 0.0) {
        return Err(Error::Domain(format!(
            "period ratios must be positive, got {frb_minus}, {frb_plus}"
        )));
    }
    let (a2, a3) = theta23(u1, frb_minus)?;
    let (b2, b3) = theta23(u2, frb_plus)?;
    let h = a3 * b3 + a2 * b3 + a3 * b2 - a2 * b2;
    let scale = (a2.norm() + a3.norm()) * (b2.norm() + b3.norm());
    Ok((h, scale))
}

/// A symmetric 2×2 Riemann matrix with positive-definite imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodMatrix {
    pub entries: [[Complex64; 2]; 2],
}

impl PeriodMatrix {
    pub fn new(entries: [[Complex64; 2]; 2]) -> Result<Self> {
        let m = Self { entries };
        m.validate()?;
        Ok(m)
    }

    /// `[[i𝔟₋/2, -1/2], [-1/2, i𝔟₊/2]]`.
    pub fn for_family(frb_minus: f64, frb_plus: f64) -> Result<Self> {
        let off = Complex64::new(-0.5, 0.0);
        Self::new([
            [Complex64::new(0.0, 0.5 * frb_minus), off],
            [off, Complex64::new(0.0, 0.5 * frb_plus)],
        ])
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.entries;
        if e[0][1] != e[1][0] {
            return Err(Error::Domain("period matrix must be symmetric".into()));
        }
        let finite = e.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite());
        let (y11, y12, y22) = (e[0][0].im, e[0][1].im, e[1][1].im);
        if !finite || !(y11 > 0.0) || !(y11 * y22 - y12 * y12 > 0.0) {
            return Err(Error::Domain(
                "imaginary part of the period matrix must be positive definite".into(),
            ));
        }
        Ok(())
    }

    pub fn imag(&self) -> [[f64; 2]; 2] {
        let e = &self.entries;
        [[e[0][0].im, e[0][1].im], [e[1][0].im, e[1][1].im]]
    }

    pub fn real(&self) -> [[f64; 2]; 2] {
        let e = &self.entries;
        [[e[0][0].re, e[0][1].re], [e[1][0].re, e[1][1].re]]
    }

    /// Smallest eigenvalue of `Im B`.
    pub fn min_imag_eigenvalue(&self) -> f64 {
        let [[a, b], [_, d]] = self.imag();
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        mean - rad
    }
}

/// Real characteristics `[η; ζ]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThetaCharacteristics {
    pub eta: [f64; 2],
    pub zeta: [f64; 2],
}

impl ThetaCharacteristics {
    pub fn zero() -> Self {
        Self::default()
    }
}

/// Gaussian-tail radius: lattice points outside the ellipsoid
/// `(n-c)ᵀ Im B (n-c) ≤ R²` contribute less than `e^{-πR²}` of the peak each.
fn default_radius() -> f64 {
    (((1e-16f64).ln().abs() + 8.0) / PI).sqrt()
}

/// Genus-2 Riemann theta with characteristics:
/// `Σ_m exp{πi(m+η)ᵀB(m+η) + 2πi(m+η)ᵀ(u+ζ)}`.
pub fn riemann_theta2(
    u: [Complex64; 2],
    b: &PeriodMatrix,
    chars: &ThetaCharacteristics,
) -> Result<Complex64> {
    riemann_theta2_with_radius(u, b, chars, default_radius())
}

/// As [`riemann_theta2`] with an explicit ellipsoid radius `R`.
pub fn riemann_theta2_with_radius(
    u: [Complex64; 2],
    b: &PeriodMatrix,
    chars: &ThetaCharacteristics,
    radius: f64,
) -> Result<Complex64> {
    b.validate()?;
    let [[y11, y12], [_, y22]] = b.imag();
    let w = [u[0] + chars.zeta[0], u[1] + chars.zeta[1]];
    // the real part of the exponent, -π(nᵀYn + 2nᵀ Im w), peaks at n = -Y⁻¹ Im w
    let det = y11 * y22 - y12 * y12;
    let c1 = -(y22 * w[0].im - y12 * w[1].im) / det;
    let c2 = -(-y12 * w[0].im + y11 * w[1].im) / det;
    let peak = PI * (y11 * c1 * c1 + 2.0 * y12 * c1 * c2 + y22 * c2 * c2);
    let schur = det / y11;
    let r2 = radius * radius;
    let e = &b.entries;

    let span2 = (r2 / schur).sqrt();
    let m2_lo = (c2 - span2 - chars.eta[1]).floor() as i64;
    let m2_hi = (c2 + span2 - chars.eta[1]).ceil() as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for m2 in m2_lo..=m2_hi {
        let n2 = m2 as f64 + chars.eta[1];
        let d2 = n2 - c2;
        let rest = r2 - schur * d2 * d2;
        if rest < 0.0 {
            continue;
        }
        let centre1 = c1 - y12 / y11 * d2;
        let span1 = (rest / y11).sqrt();
        let m1_lo = (centre1 - span1 - chars.eta[0]).floor() as i64;
        let m1_hi = (centre1 + span1 - chars.eta[0]).ceil() as i64;
        for m1 in m1_lo..=m1_hi {
            let n1 = m1 as f64 + chars.eta[0];
            let quad = e[0][0] * (n1 * n1) + e[0][1] * (2.0 * n1 * n2) + e[1][1] * (n2 * n2);
            let lin = w[0] * n1 + w[1] * n2;
            // scale by the peak so large Im u does not overflow prematurely
            let expo = I * PI * quad + I * (2.0 * PI) * lin - peak;
            sum += expo.exp();
        }
    }
    if peak > EXP_LIMIT {
        return Err(Error::Overflow(peak));
    }
    Ok(sum * peak.exp())
}

/// Relative discrepancy between the genus-2 theta of the family period
/// matrix at `u` and the Jacobi-product combination `H(2u₁, 2u₂)`.
pub fn theta_reduction_check(u: [Complex64; 2], frb_minus: f64, frb_plus: f64) -> Result<f64> {
    let b = PeriodMatrix::for_family(frb_minus, frb_plus)?;
    let lhs = riemann_theta2(u, &b, &ThetaCharacteristics::zero())?;
    let rhs = theta_h(u[0] * 2.0, u[1] * 2.0, frb_minus, frb_plus)?;
    Ok((lhs - rhs).norm() / lhs.norm())
}
