//! From branch points to the full parameter set of the two-phase solution:
//! period ratios, wave numbers, the shift `δ`, the constants `K0, K1, K2`,
//! the period matrix, wave vectors, the period lattice and the reality
//! condition on complex initial phases.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{curve_integrals, CurveParams, EllipticConstants};
use crate::error::{Error, Result};
use crate::quad::TanhSinh;
use crate::theta::PeriodMatrix;

/// Everything the two-phase formula needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionParams {
    pub curve: CurveParams,
    pub constants: EllipticConstants,
    pub frb_minus: f64,
    pub frb_plus: f64,
    pub kappa1: f64,
    pub k: f64,
    pub kappa2: f64,
    pub delta: f64,
    pub k0: Complex64,
    pub k1: f64,
    pub k2: f64,
    pub z: [Complex64; 2],
}

impl SolutionParams {
    /// True when the initial phase has no imaginary part.
    pub fn has_real_phase(&self) -> bool {
        self.z.iter().all(|z| z.im == 0.0)
    }

    pub fn with_phase(mut self, z: [Complex64; 2]) -> Self {
        self.z = z;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveVectors {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

/// Translations `(X_j, T_j)` with `X_j U + T_j V = e_j`, plus the periods
/// `X = A₊/2`, `T = A₋/4` and, for `λ0 ≠ 0`, `T′ = A₊/(8λ0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodLattice {
    pub x1: f64,
    pub t1: f64,
    pub x2: f64,
    pub t2: f64,
    pub x: f64,
    pub t: f64,
    pub t_prime: Option<f64>,
}

/// Verdict of the reality condition `2 Im Z = Im B·N`, `Re B·N ∈ ℤ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealityVerdict {
    pub real: bool,
    pub witness: Option<[i32; 2]>,
}

pub const REALITY_SEARCH_BOX: i32 = 8;
pub const REALITY_TOL: f64 = 1e-9;

pub fn wave_vectors(params: &CurveParams, constants: &EllipticConstants) -> WaveVectors {
    let (ap, am) = (constants.a_plus, constants.a_minus);
    WaveVectors {
        u: [0.0, -1.0 / ap],
        v: [2.0 / am, -4.0 * params.lambda0 / ap],
    }
}

pub fn period_matrix(constants: &EllipticConstants) -> Result<PeriodMatrix> {
    PeriodMatrix::for_family(
        constants.b_minus / constants.a_minus,
        constants.b_plus / constants.a_plus,
    )
}

pub fn period_lattice(params: &CurveParams, constants: &EllipticConstants) -> Result<PeriodLattice> {
    let WaveVectors { u, v } = wave_vectors(params, constants);
    // columns U and V; solve [U V] (X_j, T_j)ᵀ = e_j by the explicit inverse
    let det = u[0] * v[1] - v[0] * u[1];
    if !det.is_finite() || det == 0.0 {
        return Err(Error::Singular("period lattice"));
    }
    let inv = [[v[1] / det, -v[0] / det], [-u[1] / det, u[0] / det]];
    let lambda0 = params.lambda0;
    Ok(PeriodLattice {
        x1: inv[0][0],
        t1: inv[1][0],
        x2: inv[0][1],
        t2: inv[1][1],
        x: constants.a_plus / 2.0,
        t: constants.a_minus / 4.0,
        t_prime: (lambda0 != 0.0).then(|| constants.a_plus / (8.0 * lambda0)),
    })
}

/// `h± = exp(-2π𝔟±)`, the harmonic-measure quantities of the period study.
pub fn harmonic_measures(sp: &SolutionParams) -> (f64, f64) {
    ((-2.0 * PI * sp.frb_minus).exp(), (-2.0 * PI * sp.frb_plus).exp())
}

/// The constant `K̃2(a, b, c)` of the second-kind integral on the centred
/// curve, so that `K2 = K̃2 - 2λ0²`.
///
/// With `dΩ2 = -i(4μ⁴ + γ2μ² + γ0) dμ / w`, `γ2 = 2(a²+b²+c²)` removes the
/// `1/μ` term and `γ0` follows from the a-cycle normalisation. The constant
/// is the regularised real-axis integral of `P/w - 4μ` plus the half
/// b-period contribution `2π/A₋` picked up from the base point `ic`.
pub fn phase_constants(a: f64, b: f64, c: f64) -> Result<f64> {
    CurveParams::new(0.0, a, b, c)?;
    let rule = TanhSinh::with_rel_tol(1e-14);
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let (ba, ca) = ((b - a) * (b + a), (c - a) * (c + a));
    let s1 = a2 + b2 + c2;
    let s2 = a2 * b2 + a2 * c2 + b2 * c2;
    let s3 = a2 * b2 * c2;

    let moment = |n: i32| -> Result<f64> {
        Ok(rule
            .integrate(
                |_, dl: f64, dr: f64| dl.powi(n) / (dl * dr * (ba + dr) * (ca + dr)).sqrt(),
                0.0,
                a2,
            )?
            .value)
    };
    let (j0, j1, j2) = (moment(0)?, moment(1)?, moment(2)?);
    let g2 = 2.0 * s1;
    let g0 = -(4.0 * j2 - g2 * j1) / j0;

    // P/w - 4μ = N(μ) / (w (P + 4μw)) with the μ⁸ and μ⁶ terms of N cancelled
    let n4 = g2 * g2 + 8.0 * g0 - 16.0 * s2;
    let n2 = 2.0 * g2 * g0 - 16.0 * s3;
    let n0 = g0 * g0;
    let near = rule
        .integrate(
            |mu: f64, _, _| {
                let m2 = mu * mu;
                let w = ((m2 + a2) * (m2 + b2) * (m2 + c2)).sqrt();
                let p = (4.0 * m2 + g2) * m2 + g0;
                ((n4 * m2 + n2) * m2 + n0) / (w * (p + 4.0 * mu * w))
            },
            0.0,
            c,
        )?
        .value;
    // μ = c/v on [c, ∞), written so that nothing overflows as v → 0
    let far = rule
        .integrate(
            |v: f64, _, _| {
                let v2 = v * v;
                let wt = ((c2 + a2 * v2) * (c2 + b2 * v2) * (c2 + c2 * v2)).sqrt();
                let pt = (4.0 * c2 + g2 * v2) * c2 + g0 * v2 * v2;
                let nt = (n4 * c2 + n2 * v2) * c2 + n0 * v2 * v2;
                c * nt * v / (wt * (pt + 4.0 * c * wt))
            },
            0.0,
            1.0,
        )?
        .value;
    Ok(near + far + 2.0 * PI / j0)
}

/// Assemble [`SolutionParams`] for the curve and the initial phase `z`.
pub fn build_solution_params(params: &CurveParams, z: [Complex64; 2]) -> Result<SolutionParams> {
    params.validate()?;
    let constants = curve_integrals(params)?;
    let k2_tilde = phase_constants(params.a, params.b, params.c)?;
    Ok(assemble(params, &constants, k2_tilde, z))
}

pub(crate) fn assemble(
    params: &CurveParams,
    constants: &EllipticConstants,
    k2_tilde: f64,
    z: [Complex64; 2],
) -> SolutionParams {
    let EllipticConstants {
        a_plus,
        b_plus,
        a_minus,
        b_minus,
        b1_minus,
        d_minus,
        f_minus,
    } = *constants;
    let lambda0 = params.lambda0;
    let delta = b1_minus / a_minus;
    SolutionParams {
        curve: *params,
        constants: *constants,
        frb_minus: b_minus / a_minus,
        frb_plus: b_plus / a_plus,
        kappa1: 4.0 / a_minus,
        k: 2.0 / a_plus,
        kappa2: 8.0 * lambda0 / a_plus,
        delta,
        k0: Complex64::new(0.0, params.c * (d_minus * delta - f_minus).exp()),
        k1: -lambda0,
        k2: k2_tilde - 2.0 * lambda0 * lambda0,
        z,
    }
}

/// Search `‖N‖∞ ≤ REALITY_SEARCH_BOX` for a witness of the reality condition.
pub fn reality_check(z: [Complex64; 2], b: &PeriodMatrix) -> RealityVerdict {
    reality_check_in_box(z, b, REALITY_SEARCH_BOX)
}

pub fn reality_check_in_box(z: [Complex64; 2], b: &PeriodMatrix, bound: i32) -> RealityVerdict {
    let im = b.imag();
    let re = b.real();
    let target = [2.0 * z[0].im, 2.0 * z[1].im];
    let is_int = |v: f64| (v - v.round()).abs() <= REALITY_TOL;
    // nearest witness first, so Z = 0 reports N = 0
    let mut best: Option<([i32; 2], i32)> = None;
    for n1 in -bound..=bound {
        for n2 in -bound..=bound {
            let (f1, f2) = (n1 as f64, n2 as f64);
            let ok_im = (0..2).all(|r| (im[r][0] * f1 + im[r][1] * f2 - target[r]).abs() <= REALITY_TOL);
            let ok_re = (0..2).all(|r| is_int(re[r][0] * f1 + re[r][1] * f2));
            if ok_im && ok_re {
                let size = n1.abs().max(n2.abs());
                if best.map_or(true, |(_, s)| size < s) {
                    best = Some(([n1, n2], size));
                }
            }
        }
    }
    RealityVerdict {
        real: best.is_some(),
        witness: best.map(|(n, _)| n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c0() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn sp689(lambda0: f64) -> SolutionParams {
        let p = CurveParams::new(lambda0, 6.0, 8.0, 9.0).unwrap();
        build_solution_params(&p, [c0(), c0()]).unwrap()
    }

    #[test]
    fn k2_tilde_reference_689() {
        // agrees with the value that makes the two-phase field solve NLS
        let k = phase_constants(6.0, 8.0, 9.0).unwrap();
        assert!((k - 138.703_135_202_616_6).abs() < 1e-9, "{k}");
    }

    #[test]
    fn k2_tilde_scales_quadratically() {
        let k = phase_constants(1.0, 2.0, 3.0).unwrap();
        let ks = phase_constants(2.5, 5.0, 7.5).unwrap();
        assert!((ks / k - 6.25).abs() < 1e-10);
    }

    #[test]
    fn algebraic_ties() {
        let sp = sp689(0.0);
        let c = &sp.constants;
        assert!((sp.kappa1 * c.a_minus - 4.0).abs() < 1e-14);
        assert!((sp.k * c.a_plus - 2.0).abs() < 1e-14);
        assert_eq!(sp.kappa2, 0.0);
        assert_eq!(sp.k1, 0.0);
        assert!((sp.delta * c.a_minus - c.b1_minus).abs() < 1e-15);
        assert_eq!(sp.k0.re, 0.0);
        assert!((sp.k0.im - 2.124_750_237_881_2).abs() < 1e-10);
        let sp1 = sp689(0.7);
        assert!((sp1.kappa2 - 4.0 * 0.7 * sp1.k).abs() < 1e-13);
        assert!((sp1.k2 - (sp.k2 - 2.0 * 0.49)).abs() < 1e-12);
    }

    #[test]
    fn lattice_solves_defining_system() {
        for &l0 in &[0.0, 0.37] {
            let p = CurveParams::new(l0, 6.0, 8.0, 9.0).unwrap();
            let c = curve_integrals(&p).unwrap();
            let wv = wave_vectors(&p, &c);
            let lat = period_lattice(&p, &c).unwrap();
            let e1 = [lat.x1 * wv.u[0] + lat.t1 * wv.v[0], lat.x1 * wv.u[1] + lat.t1 * wv.v[1]];
            let e2 = [lat.x2 * wv.u[0] + lat.t2 * wv.v[0], lat.x2 * wv.u[1] + lat.t2 * wv.v[1]];
            assert!((e1[0] - 1.0).abs() < 1e-12 && e1[1].abs() < 1e-12);
            assert!(e2[0].abs() < 1e-12 && (e2[1] - 1.0).abs() < 1e-12);
            if l0 == 0.0 {
                assert_eq!(lat.x1, 0.0);
                assert_eq!(lat.t2, 0.0);
                assert!(lat.t_prime.is_none());
            }
        }
    }

    #[test]
    fn commensurate_lambda0_gives_equal_periods() {
        let p = CurveParams::new(0.0, 6.0, 8.0, 9.0).unwrap();
        let c = curve_integrals(&p).unwrap();
        let l0 = c.a_plus / (2.0 * c.a_minus);
        let lat = period_lattice(&CurveParams { lambda0: l0, ..p }, &c).unwrap();
        assert!((lat.t_prime.unwrap() - lat.t).abs() < 1e-14 * lat.t);
    }

    #[test]
    fn reality_witnesses() {
        let sp = sp689(0.0);
        let b = period_matrix(&sp.constants).unwrap();
        let zero = reality_check([c0(), c0()], &b);
        assert_eq!(zero.witness, Some([0, 0]));
        let half = reality_check([c0(), Complex64::new(0.0, sp.frb_plus / 2.0)], &b);
        assert_eq!(half.witness, Some([0, 2]));
        let generic = reality_check([c0(), Complex64::new(0.0, 0.3)], &b);
        assert!(!generic.real && generic.witness.is_none());
    }

    #[test]
    fn harmonic_measures_in_unit_interval() {
        let (hm, hp) = harmonic_measures(&sp689(0.0));
        assert!(0.0 < hm && hm < 1.0 && 0.0 < hp && hp < 1.0);
    }
}
