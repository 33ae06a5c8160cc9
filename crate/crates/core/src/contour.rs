//! Contour integrals on the genus-2 curve `w² = Π((λ-λ0)² + a_j²)`.
//!
//! `w` is the product of principal square roots `√(μ - ia_j)·√(μ + ia_j)`
//! with `μ = λ - λ0`, so its cuts run horizontally to the left of each
//! branch point and `w > 0` on the real axis. A loop around the segment
//! `[iy1, iy2]` of the imaginary `μ` axis equals twice the integral along
//! the segment itself.
//!
//! Cycles in this branch:
//!
//! ```text
//! a1 = -L(-a, a)     a2 = L(a, b) + L(-b, -a)
//! b1 = -L(-b, -a)    b2 = -L(b, c)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::{CurveParams, EllipticConstants};
use crate::error::Result;
use crate::linalg::solve;
use crate::quad::TanhSinh;

const I: Complex64 = Complex64::new(0.0, 1.0);
const SERIES_TERMS: usize = 64;

type Poly = Vec<Complex64>;

fn eval_poly(p: &[Complex64], x: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// The curve with its expansion of `1/w` at infinity.
pub struct Curve {
    lambda0: f64,
    roots: [f64; 3],
    inv_sqrt: Vec<f64>,
    rule: TanhSinh,
}

impl Curve {
    pub fn new(params: &CurveParams) -> Result<Self> {
        params.validate()?;
        let lambda0 = params.lambda0;
        let roots = [params.a, params.b, params.c];
        // q(s) = Π(1 - 2λ0 s + (λ0² + a_j²) s²), so that w = λ³ √q(1/λ)
        let mut q = vec![1.0];
        for r in roots {
            let f = [1.0, -2.0 * lambda0, lambda0 * lambda0 + r * r];
            let mut next = vec![0.0; q.len() + 2];
            for (i, qi) in q.iter().enumerate() {
                for (j, fj) in f.iter().enumerate() {
                    next[i + j] += qi * fj;
                }
            }
            q = next;
        }
        q.resize(SERIES_TERMS, 0.0);
        let mut sq = vec![0.0; SERIES_TERMS];
        sq[0] = 1.0;
        for n in 1..SERIES_TERMS {
            let cross: f64 = (1..n).map(|k| sq[k] * sq[n - k]).sum();
            sq[n] = 0.5 * (q[n] - cross);
        }
        let mut inv = vec![0.0; SERIES_TERMS];
        inv[0] = 1.0;
        for n in 1..SERIES_TERMS {
            inv[n] = -(1..=n).map(|k| sq[k] * inv[n - k]).sum::<f64>();
        }
        Ok(Self {
            lambda0,
            roots,
            inv_sqrt: inv,
            rule: TanhSinh::with_rel_tol(1e-13),
        })
    }

    /// Coefficient of `λ^{-m}` in the expansion of `P(λ)/w` at infinity.
    pub fn expansion_coef(&self, p: &[Complex64], m: i32) -> Complex64 {
        p.iter()
            .enumerate()
            .filter_map(|(k, &pk)| {
                let idx = m + k as i32 - 3;
                (0..SERIES_TERMS as i32)
                    .contains(&idx)
                    .then(|| pk * self.inv_sqrt[idx as usize])
            })
            .sum()
    }

    /// `w` at `μ = iy` on the segment `[y1, y2]`, with exact offsets to the
    /// endpoints when they are branch points.
    fn w_axis(&self, y: f64, y1: f64, dl: f64, y2: f64, dr: f64) -> Complex64 {
        let offset = |branch: f64| -> f64 {
            if branch == y1 {
                dl
            } else if branch == y2 {
                -dr
            } else {
                y - branch
            }
        };
        self.roots.iter().fold(Complex64::new(1.0, 0.0), |acc, &r| {
            let lo = (I * offset(r)).sqrt();
            let hi = (I * offset(-r)).sqrt();
            acc * lo * hi
        })
    }

    /// `L(y1, y2) = 2∫ P(λ0 + iy) i dy / w` along the imaginary axis.
    pub fn loop_integral(&self, p: &[Complex64], y1: f64, y2: f64) -> Result<Complex64> {
        let q = self.rule.integrate(
            |y: f64, dl: f64, dr: f64| {
                let lambda = Complex64::new(self.lambda0, y);
                eval_poly(p, lambda) * I / self.w_axis(y, y1, dl, y2, dr)
            },
            y1,
            y2,
        )?;
        Ok(q.value * 2.0)
    }

    pub fn a_periods(&self, p: &[Complex64]) -> Result<[Complex64; 2]> {
        let [a, b, _] = self.roots;
        Ok([
            -self.loop_integral(p, -a, a)?,
            self.loop_integral(p, a, b)? + self.loop_integral(p, -b, -a)?,
        ])
    }

    pub fn b_periods(&self, p: &[Complex64]) -> Result<[Complex64; 2]> {
        let [a, b, c] = self.roots;
        Ok([-self.loop_integral(p, -b, -a)?, -self.loop_integral(p, b, c)?])
    }

    /// `lead + Σ x_k λ^k` (k < free) with the expansion coefficients at the
    /// listed orders and both a-periods set to zero.
    fn normalise(&self, lead: &[Complex64], free: usize, kill: &[i32]) -> Result<Poly> {
        let basis: Vec<Poly> = (0..free)
            .map(|k| {
                let mut v = vec![Complex64::new(0.0, 0.0); k + 1];
                v[k] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for &m in kill {
            rows.push(basis.iter().map(|bk| self.expansion_coef(bk, m)).collect());
            rhs.push(-self.expansion_coef(lead, m));
        }
        let basis_periods = basis
            .iter()
            .map(|bk| self.a_periods(bk))
            .collect::<Result<Vec<_>>>()?;
        let lead_periods = self.a_periods(lead)?;
        for j in 0..2 {
            rows.push(basis_periods.iter().map(|per| per[j]).collect());
            rhs.push(-lead_periods[j]);
        }
        let x = solve(rows, rhs, "second-kind normalisation")?;
        let mut p: Poly = lead.to_vec();
        for (k, xk) in x.into_iter().enumerate() {
            p[k] += xk;
        }
        Ok(p)
    }

    /// Numerator of `dΩ1 = -i P1 dλ / w`, `P1 = λ³ + …`.
    pub fn omega1_numerator(&self) -> Result<Poly> {
        let mut lead = vec![Complex64::new(0.0, 0.0); 4];
        lead[3] = Complex64::new(1.0, 0.0);
        self.normalise(&lead, 3, &[1])
    }

    /// Numerator of `dΩ2 = -i P2 dλ / w`, `P2 = 4λ⁴ + …`.
    pub fn omega2_numerator(&self) -> Result<Poly> {
        let mut lead = vec![Complex64::new(0.0, 0.0); 5];
        lead[4] = Complex64::new(4.0, 0.0);
        self.normalise(&lead, 4, &[0, 1])
    }

    /// Regularised `lim (∫_{λ0+ic}^{Λ} P/w dλ - growth(Λ))`.
    ///
    /// The straight path from the branch point `λ0 + ic` to a real point
    /// `E` stays right of every cut; the tail beyond `E` is summed from the
    /// expansion at infinity.
    fn regularised_constant(&self, p: &[Complex64], growth: impl Fn(f64) -> f64) -> Result<f64> {
        let c = self.roots[2];
        let z0 = Complex64::new(self.lambda0, c);
        let e = self.lambda0 + 3.0 * (self.lambda0 * self.lambda0 + c * c).sqrt();
        let dir = Complex64::new(e, 0.0) - z0;
        let path = self.rule.integrate(
            |s: f64, dl: f64, _| {
                let mu = Complex64::new(0.0, c) + dir * s;
                let w = self.roots.iter().fold(Complex64::new(1.0, 0.0), |acc, &r| {
                    let lo = if r == c {
                        (dir * dl).sqrt()
                    } else {
                        (mu - I * r).sqrt()
                    };
                    acc * lo * (mu + I * r).sqrt()
                });
                eval_poly(p, mu + self.lambda0) * dir / w
            },
            0.0,
            1.0,
        )?;
        let tail: Complex64 = (2..SERIES_TERMS as i32 - 4)
            .map(|n| self.expansion_coef(p, n) * e.powi(1 - n) / (n - 1) as f64)
            .sum();
        Ok((path.value + tail).re - growth(e))
    }
}

/// Contour-route constants and period cross-checks.
#[derive(Debug, Clone, Serialize)]
pub struct ContourReport {
    pub k1: f64,
    pub k2: f64,
    pub omega1_b_periods: [Complex64; 2],
    pub omega2_b_periods: [Complex64; 2],
    pub two_pi_i_u: [Complex64; 2],
    pub two_pi_i_v: [Complex64; 2],
    /// `max_j |Ω1 b_j - 2πi U_j|` and the same for `Ω2`, `V`.
    pub u_mismatch: f64,
    pub v_mismatch: f64,
}

pub fn contour_report(params: &CurveParams, constants: &EllipticConstants) -> Result<ContourReport> {
    let curve = Curve::new(params)?;
    let p1 = curve.omega1_numerator()?;
    let p2 = curve.omega2_numerator()?;
    let k1 = curve.regularised_constant(&p1, |e| e)?;
    let k2 = curve.regularised_constant(&p2, |e| 2.0 * e * e)?;
    let per = |p: &[Complex64]| -> Result<[Complex64; 2]> {
        let b = curve.b_periods(p)?;
        Ok([-I * b[0], -I * b[1]])
    };
    let om1 = per(&p1)?;
    let om2 = per(&p2)?;
    let (ap, am) = (constants.a_plus, constants.a_minus);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let u = [two_pi_i * 0.0, two_pi_i * (-1.0 / ap)];
    let v = [two_pi_i * (2.0 / am), two_pi_i * (-4.0 * params.lambda0 / ap)];
    let mismatch = |x: &[Complex64; 2], y: &[Complex64; 2]| {
        (x[0] - y[0]).norm().max((x[1] - y[1]).norm())
    };
    Ok(ContourReport {
        k1,
        k2,
        u_mismatch: mismatch(&om1, &u),
        v_mismatch: mismatch(&om2, &v),
        omega1_b_periods: om1,
        omega2_b_periods: om2,
        two_pi_i_u: u,
        two_pi_i_v: v,
    })
}

/// Numerators `C_j1 + C_j0 λ` of the normalised holomorphic differentials.
pub fn holomorphic_numerators(params: &CurveParams, constants: &EllipticConstants) -> [Poly; 2] {
    let (ap, am) = (constants.a_plus, constants.a_minus);
    [
        vec![I / (2.0 * am), Complex64::new(0.0, 0.0)],
        vec![I * (params.lambda0 / (2.0 * ap)), -I / (2.0 * ap)],
    ]
}

/// a- and b-period matrices of the holomorphic differentials; rows are
/// differentials, columns cycles.
pub fn holomorphic_periods(
    params: &CurveParams,
    constants: &EllipticConstants,
) -> Result<([[Complex64; 2]; 2], [[Complex64; 2]; 2])> {
    let curve = Curve::new(params)?;
    let num = holomorphic_numerators(params, constants);
    let a = [curve.a_periods(&num[0])?, curve.a_periods(&num[1])?];
    let b = [curve.b_periods(&num[0])?, curve.b_periods(&num[1])?];
    Ok((a, b))
}

/// Abel image of `P∞⁺ - P∞⁻` along the real `λ` axis.
pub fn d_vector(params: &CurveParams, constants: &EllipticConstants) -> Result<[Complex64; 2]> {
    let [a, b, c] = [params.a, params.b, params.c];
    let num = holomorphic_numerators(params, constants);
    let rule = TanhSinh::with_rel_tol(1e-13);
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (j, p) in num.iter().enumerate() {
        // P(λ0 + μ) = p0 + p1 μ after re-centring
        let p0 = p[0] + p[1] * params.lambda0;
        let p1 = p[1];
        // μ = τ/(1-τ²) maps (-1, 1) onto the real line; near the ends the
        // integrand is rewritten in r = 1/μ so nothing overflows
        let q = rule.integrate(
            |tau: f64, dl: f64, dr: f64| {
                let om = dl * dr; // (1+τ)(1-τ)
                let (jw, mu_jw) = if tau.abs() < 0.5 {
                    let mu = tau / om;
                    let m2 = mu * mu;
                    let w = ((m2 + a * a) * (m2 + b * b) * (m2 + c * c)).sqrt();
                    let jw = (1.0 + tau * tau) / (om * om * w);
                    (jw, mu * jw)
                } else {
                    let r2 = (om / tau).powi(2);
                    let s = ((1.0 + a * a * r2) * (1.0 + b * b * r2) * (1.0 + c * c * r2)).sqrt();
                    let t2 = tau * tau;
                    (
                        (1.0 + t2) * om / (t2 * tau.abs() * s),
                        (1.0 + t2) * tau.signum() / (t2 * s),
                    )
                };
                p0 * jw + p1 * mu_jw
            },
            -1.0,
            1.0,
        )?;
        out[j] = q.value;
    }
    Ok(out)
}
