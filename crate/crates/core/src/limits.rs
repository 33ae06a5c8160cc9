//! Degenerate members of the family: two plane waves and the one-phase
//! `dn` traveling wave, Jacobi `dn`, a least-squares `dn` fit, and the
//! asymptotic forms of every curve constant near each confluence.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_k_parts, CurveParams, EllipticConstants};
use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::theta::jacobi_theta;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `a·exp{-2iλ0x - 2i(2λ0² - a²)t}`, the limit `c → b`.
pub fn plane_wave_cb(x: f64, t: f64, lambda0: f64, a: f64) -> Complex64 {
    let phase = -2.0 * lambda0 * x - 2.0 * (2.0 * lambda0 * lambda0 - a * a) * t;
    (I * phase).exp() * a
}

/// `arccos((c² - 2b²)/c²)`.
pub fn ab_angle(b: f64, c: f64) -> f64 {
    ((c * c - 2.0 * b * b) / (c * c)).clamp(-1.0, 1.0).acos()
}

/// `c·exp{-2iλ0x - 2i(2λ0² - c²)t - iφ/2}`, the limit `a → b`.
pub fn plane_wave_ab(x: f64, t: f64, lambda0: f64, b: f64, c: f64) -> Complex64 {
    let phase = -2.0 * lambda0 * x - 2.0 * (2.0 * lambda0 * lambda0 - c * c) * t
        - 0.5 * ab_angle(b, c);
    (I * phase).exp() * c
}

/// The one-phase wave of the limit `a → 0`, with its elliptic data.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DnWave {
    pub lambda0: f64,
    pub b: f64,
    pub c: f64,
    /// `A₊` and `B₊` at `a = 0`.
    pub a_plus: f64,
    pub b_plus: f64,
    pub frb_plus: f64,
    pub k: f64,
    pub kappa2: f64,
    pub k1: f64,
    pub k2: f64,
}

impl DnWave {
    pub fn new(lambda0: f64, b: f64, c: f64) -> Result<Self> {
        if !(0.0 < b && b < c) || !lambda0.is_finite() || !c.is_finite() {
            return Err(Error::InvalidParams(format!("need 0 < b < c, got b = {b}, c = {c}")));
        }
        let cb = (c - b) * (c + b);
        let a_plus = 2.0 * complete_k_parts(cb / (c * c)) / c;
        let b_plus = 2.0 * complete_k_parts(b * b / (c * c)) / c;
        Ok(Self {
            lambda0,
            b,
            c,
            a_plus,
            b_plus,
            frb_plus: b_plus / a_plus,
            k: 2.0 / a_plus,
            kappa2: 8.0 * lambda0 / a_plus,
            k1: -lambda0,
            k2: b * b + c * c - 2.0 * lambda0 * lambda0,
        })
    }

    /// `K20 = b² + c²`.
    pub fn k20(&self) -> f64 {
        self.b * self.b + self.c * self.c
    }

    /// Real profile `f(ξ) = √(c²-b²)(θ3-θ2)/(θ3+θ2)(kξ | 2i𝔟₊)`.
    pub fn profile(&self, xi: f64) -> Result<f64> {
        let tau = Complex64::new(0.0, 2.0 * self.frb_plus);
        let u = Complex64::new(self.k * xi, 0.0);
        let t2 = jacobi_theta(2, u, tau)?;
        let t3 = jacobi_theta(3, u, tau)?;
        let cb = ((self.c - self.b) * (self.c + self.b)).sqrt();
        Ok(cb * ((t3 - t2) / (t3 + t2)).re)
    }

    /// Period of the profile in `ξ`.
    pub fn period(&self) -> f64 {
        self.a_plus
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<Complex64> {
        let tau = Complex64::new(0.0, 2.0 * self.frb_plus);
        let u = Complex64::new(self.k * x + self.kappa2 * t, 0.0);
        let t2 = jacobi_theta(2, u, tau)?;
        let t3 = jacobi_theta(3, u, tau)?;
        let cb = ((self.c - self.b) * (self.c + self.b)).sqrt();
        let carrier = (I * (2.0 * (self.k1 * x + self.k2 * t))).exp();
        Ok((t3 - t2) / (t3 + t2) * cb * carrier)
    }
}

/// The traveling wave at `(x, t)`.
pub fn dn_wave_theta(x: f64, t: f64, lambda0: f64, b: f64, c: f64) -> Result<Complex64> {
    DnWave::new(lambda0, b, c)?.eval(x, t)
}

/// Jacobi `dn(u, k)` by the descending AGM.
pub fn jacobi_dn(u: f64, k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) || !u.is_finite() {
        return Err(Error::Domain(format!("jacobi_dn needs 0 <= k < 1, got {k}")));
    }
    if k == 0.0 {
        return Ok(1.0);
    }
    let mut emc = (1.0 - k) * (1.0 + k);
    let mut a = 1.0;
    let mut dn = 1.0;
    let mut em = [0.0; 32];
    let mut en = [0.0; 32];
    let mut c = 1.0;
    let mut levels = 0;
    for i in 0..32 {
        levels = i + 1;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= 1e-15 * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let v = u * c;
    let sn = v.sin();
    let cn = v.cos();
    if sn != 0.0 {
        let mut a = cn / sn;
        c *= a;
        for ii in (0..levels).rev() {
            let b = em[ii];
            a *= c;
            c *= dn;
            dn = (en[ii] + a) / (b + a);
            a = c / b;
        }
    }
    Ok(dn)
}

/// Least-squares fit of `A·dn(B(x - x0); k̃)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DnFit {
    pub amplitude: f64,
    pub rate: f64,
    pub modulus: f64,
    pub shift: f64,
    pub rms_residual: f64,
    /// A flat profile leaves `rate` unidentified.
    pub degenerate: bool,
}

fn dn_model(p: &[f64; 4], x: f64) -> Result<f64> {
    Ok(p[0] * jacobi_dn(p[1] * (x - p[3]), p[2].clamp(0.0, 1.0 - 1e-15))?)
}

/// Fit samples `(x_i, f_i)` covering about one period.
pub fn dn_fit(xs: &[f64], fs: &[f64]) -> Result<DnFit> {
    if xs.len() != fs.len() || xs.len() < 8 {
        return Err(Error::Fit("need at least 8 matching samples".into()));
    }
    let (imax, fmax) = fs
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let fmin = fs.iter().copied().fold(f64::INFINITY, f64::min);
    if !(fmax > 0.0) || fmin < 0.0 {
        return Err(Error::Fit("profile must be positive".into()));
    }
    if fmax - fmin <= 1e-12 * fmax {
        let mean = fs.iter().sum::<f64>() / fs.len() as f64;
        return Ok(DnFit {
            amplitude: mean,
            rate: mean,
            modulus: 0.0,
            shift: xs[imax],
            rms_residual: 0.0,
            degenerate: true,
        });
    }

    // start from the range of dn and the span between neighbouring maxima
    let kt = (1.0 - (fmin / fmax).powi(2)).sqrt();
    let span = xs[xs.len() - 1] - xs[0];
    let mut p = [fmax, 2.0 * complete_k_parts((1.0 - kt) * (1.0 + kt)) / span, kt, xs[imax]];

    let residuals = |p: &[f64; 4]| -> Result<Vec<f64>> {
        xs.iter()
            .zip(fs)
            .map(|(&x, &f)| Ok(dn_model(p, x)? - f))
            .collect()
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut r = residuals(&p)?;
    let mut mu = 1e-3;
    for _ in 0..200 {
        let c0 = cost(&r);
        let mut jac = vec![[0.0; 4]; xs.len()];
        for q in 0..4 {
            let h = 1e-7 * p[q].abs().max(1e-3);
            let mut pp = p;
            pp[q] += h;
            let mut pm = p;
            pm[q] -= h;
            let rp = residuals(&pp)?;
            let rm = residuals(&pm)?;
            for i in 0..xs.len() {
                jac[i][q] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (row, ri) in jac.iter().zip(&r) {
            for a in 0..4 {
                jtr[a] += row[a] * ri;
                for b in 0..4 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let m: Vec<Vec<Complex64>> = (0..4)
                .map(|a| {
                    (0..4)
                        .map(|b| {
                            let d = if a == b { mu * jtj[a][a].max(1e-30) } else { 0.0 };
                            Complex64::new(jtj[a][b] + d, 0.0)
                        })
                        .collect()
                })
                .collect();
            let rhs = jtr.iter().map(|v| Complex64::new(-v, 0.0)).collect();
            let step = solve(m, rhs, "dn fit normal equations")?;
            let mut trial = p;
            for q in 0..4 {
                trial[q] += step[q].re;
            }
            trial[2] = trial[2].clamp(0.0, 1.0 - 1e-15);
            let rt = residuals(&trial)?;
            if cost(&rt) < c0 {
                let rel_step = (0..4)
                    .map(|q| step[q].re.abs() / p[q].abs().max(1e-12))
                    .fold(0.0, f64::max);
                p = trial;
                r = rt;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                if rel_step < 1e-14 {
                    return Ok(finish(p, &r));
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            return Ok(finish(p, &r));
        }
    }
    Err(Error::Fit("Levenberg-Marquardt budget exhausted".into()))
}

fn finish(p: [f64; 4], r: &[f64]) -> DnFit {
    DnFit {
        amplitude: p[0],
        rate: p[1].abs(),
        modulus: p[2],
        shift: p[3],
        rms_residual: (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt(),
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    CToB,
    AToB,
    AToZero,
}

impl LimitKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CToB => "c_to_b",
            Self::AToB => "a_to_b",
            Self::AToZero => "a_to_0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "c_to_b" => Some(Self::CToB),
            "a_to_b" => Some(Self::AToB),
            "a_to_0" => Some(Self::AToZero),
            _ => None,
        }
    }
}

/// A near-degenerate curve together with the gap being collapsed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCase {
    pub kind: LimitKind,
    pub params: CurveParams,
}

impl LimitCase {
    /// `c = b + ε`.
    pub fn c_to_b(lambda0: f64, a: f64, b: f64, eps: f64) -> Result<Self> {
        Self::new(LimitKind::CToB, CurveParams::new(lambda0, a, b, b + eps)?)
    }

    /// `a = b(1 - ε)`.
    pub fn a_to_b(lambda0: f64, b: f64, c: f64, eps: f64) -> Result<Self> {
        Self::new(LimitKind::AToB, CurveParams::new(lambda0, b * (1.0 - eps), b, c)?)
    }

    /// `a = ε`.
    pub fn a_to_zero(lambda0: f64, b: f64, c: f64, eps: f64) -> Result<Self> {
        Self::new(LimitKind::AToZero, CurveParams::new(lambda0, eps, b, c)?)
    }

    pub fn new(kind: LimitKind, params: CurveParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { kind, params })
    }

    pub fn small_parameter(&self) -> f64 {
        let p = &self.params;
        match self.kind {
            LimitKind::CToB => p.c - p.b,
            LimitKind::AToB => (p.b - p.a) / p.b,
            LimitKind::AToZero => p.a,
        }
    }

    /// The degenerate field this case approaches, at `(x, t)`.
    pub fn limit_field(&self, x: f64, t: f64) -> Result<Complex64> {
        let p = &self.params;
        match self.kind {
            LimitKind::CToB => Ok(plane_wave_cb(x, t, p.lambda0, p.a)),
            LimitKind::AToB => Ok(plane_wave_ab(x, t, p.lambda0, p.b, p.c)),
            LimitKind::AToZero => dn_wave_theta(x, t, p.lambda0, p.b, p.c),
        }
    }

    /// Initial phase under which the limit formula holds.
    pub fn initial_phase(&self) -> [Complex64; 2] {
        let q = Complex64::new(0.25, 0.0);
        let z = Complex64::new(0.0, 0.0);
        match self.kind {
            LimitKind::CToB => [z, q],
            LimitKind::AToB => [q, z],
            LimitKind::AToZero => [z, z],
        }
    }
}

/// Leading asymptotic forms of the curve constants and derived parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticConstants {
    pub integrals: EllipticConstants,
    pub frb_minus: f64,
    pub frb_plus: f64,
    pub kappa1: f64,
    pub k: f64,
    pub kappa2: f64,
    pub delta: f64,
    pub k0: Complex64,
    pub k1: f64,
    pub k2: f64,
}

/// Leading-order values of all constants for a near-degenerate curve.
///
/// Divergent integrals are returned as their leading logarithmic terms.
pub fn asymptotic_constants(case: &LimitCase) -> AsymptoticConstants {
    let CurveParams { lambda0, a, b, c } = case.params;
    let l2 = 2.0 * lambda0 * lambda0;
    let cb = ((c - b) * (c + b)).sqrt();
    let mk = |integrals: EllipticConstants, k0: Complex64, k2: f64, delta: Option<f64>| {
        let EllipticConstants {
            a_plus,
            b_plus,
            a_minus,
            b_minus,
            b1_minus,
            ..
        } = integrals;
        AsymptoticConstants {
            integrals,
            frb_minus: b_minus / a_minus,
            frb_plus: b_plus / a_plus,
            kappa1: 4.0 / a_minus,
            k: 2.0 / a_plus,
            kappa2: 8.0 * lambda0 / a_plus,
            delta: delta.unwrap_or(b1_minus / a_minus),
            k0,
            k1: -lambda0,
            k2,
        }
    };
    match case.kind {
        LimitKind::CToB => {
            let eps = c - b;
            let ka = a / b;
            let s = ((1.0 - ka) * (1.0 + ka)).sqrt();
            let s2 = s * s;
            let b1_minus = -(ka * (1.0 + s) * eps / (8.0 * b * s2)).ln() / (b * b * s);
            let integrals = EllipticConstants {
                a_plus: -(eps / (8.0 * b * s2)).ln() / (b * s),
                b_plus: PI / (b * s),
                a_minus: PI / (b * b * s),
                b_minus: -(ka * ka * eps / (8.0 * b * s2)).ln() / (b * b * s),
                b1_minus,
                d_minus: PI * (1.0 - s) / (2.0 * s),
                f_minus: (2.0 / (1.0 + s)).ln() + 0.5 * b * b * b1_minus,
            };
            let frb_minus = integrals.b_minus / integrals.a_minus;
            let delta = frb_minus - 2.0 / PI * ((1.0 + s) / ka).ln();
            let k0 = I * ((1.0 + s).powi(2) / (2.0 * ka) * (-PI * frb_minus / 2.0).exp());
            mk(integrals, k0, a * a + 2.0 * b * b * s - l2, Some(delta))
        }
        LimitKind::AToB => {
            let phi = ab_angle(b, c);
            let gap = (b - a) * (b + a);
            let a_minus = (16.0 * b * b * cb * cb / (c * c * gap)).ln() / (b * cb);
            let b1_minus = phi / (b * cb);
            let integrals = EllipticConstants {
                a_plus: PI / cb,
                b_plus: (16.0 * cb * cb / gap).ln() / cb,
                a_minus,
                b_minus: PI / (b * cb),
                b1_minus,
                d_minus: 0.5 * b * b * a_minus - 0.5 * phi,
                f_minus: 2f64.ln() + 0.5 * b * b * b1_minus,
            };
            mk(integrals, I * (c / 2.0), c * c - l2, None)
        }
        LimitKind::AToZero => {
            let log_ratio = ((c + b) / (c - b)).ln();
            let integrals = EllipticConstants {
                a_plus: 2.0 * complete_k_parts(cb * cb / (c * c)) / c,
                b_plus: 2.0 * complete_k_parts(b * b / (c * c)) / c,
                a_minus: PI / (b * c),
                b_minus: (16.0 * b * b * c * c / (a * a * cb * cb)).ln() / (b * c),
                b1_minus: log_ratio / (b * c),
                d_minus: 0.0,
                f_minus: 0.5 * (4.0 * c * c / (cb * cb)).ln(),
            };
            mk(integrals, I * (cb / 2.0), b * b + c * c - l2, Some(log_ratio / PI))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::curve_integrals;

    #[test]
    fn dn_special_values() {
        assert_eq!(jacobi_dn(0.0, 0.6).unwrap(), 1.0);
        assert_eq!(jacobi_dn(3.7, 0.0).unwrap(), 1.0);
        assert!(jacobi_dn(0.1, 1.0).is_err());
        let k: f64 = 0.6;
        let kk = complete_k_parts(1.0 - k * k);
        let at_half = jacobi_dn(kk, k).unwrap();
        assert!((at_half - (1.0 - k * k).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn dn_ode_by_finite_differences() {
        let k: f64 = 0.6;
        let h = 1e-3;
        for i in 0..50 {
            let u = -2.0 + 0.09 * i as f64;
            let d = |v: f64| jacobi_dn(v, k).unwrap();
            let second = (-d(u + 2.0 * h) + 16.0 * d(u + h) - 30.0 * d(u) + 16.0 * d(u - h)
                - d(u - 2.0 * h))
                / (12.0 * h * h);
            let rhs = (2.0 - k * k) * d(u) - 2.0 * d(u).powi(3);
            assert!((second - rhs).abs() < 1e-8, "u = {u}");
        }
    }

    #[test]
    fn plane_waves() {
        assert_eq!(plane_wave_cb(0.0, 0.0, 0.0, 6.0), Complex64::new(6.0, 0.0));
        let p = plane_wave_ab(0.3, -0.2, 0.4, 8.0, 9.0);
        assert!((p.norm() - 9.0).abs() < 1e-14);
    }

    #[test]
    fn dn_profile_range_and_period() {
        let w = DnWave::new(0.0, 8.0, 9.0).unwrap();
        assert!((w.profile(0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((w.profile(w.period() / 2.0).unwrap() - 17.0).abs() < 1e-11);
        assert!((w.profile(0.1).unwrap() - w.profile(0.1 + w.period()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn dn_fit_recovers_reciprocal_relation() {
        let w = DnWave::new(0.0, 8.0, 9.0).unwrap();
        let n = 200;
        let xs: Vec<f64> = (0..n).map(|i| w.period() * i as f64 / n as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| w.profile(x).unwrap()).collect();
        let fit = dn_fit(&xs, &fs).unwrap();
        assert!((fit.amplitude - fit.rate).abs() < 1e-6 * fit.amplitude, "{fit:?}");
        let rel = 2.0 * w.k20() / (2.0 - fit.modulus * fit.modulus);
        assert!((fit.amplitude.powi(2) - rel).abs() < 1e-6 * rel);
    }

    #[test]
    fn flat_profile_is_degenerate_fit() {
        let k20: f64 = 145.0;
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let fs = vec![k20.sqrt(); 20];
        let fit = dn_fit(&xs, &fs).unwrap();
        assert!(fit.degenerate && fit.modulus == 0.0);
        assert!((fit.amplitude.powi(2) - k20).abs() < 1e-10);
    }

    #[test]
    fn a_to_zero_closed_forms() {
        let case = LimitCase::a_to_zero(0.0, 8.0, 9.0, 1e-3).unwrap();
        let asy = asymptotic_constants(&case);
        assert!((asy.integrals.a_minus - PI / 72.0).abs() < 1e-15);
        assert!((asy.delta - (17f64).ln() / PI).abs() < 1e-15);
        assert!((asy.k0.im - 17f64.sqrt() / 2.0).abs() < 1e-15);
        let exact = curve_integrals(&case.params).unwrap();
        assert!((exact.a_minus - asy.integrals.a_minus).abs() / exact.a_minus < 1e-4);
    }

    #[test]
    fn c_to_b_a_plus_asymptote() {
        let case = LimitCase::c_to_b(0.0, 3.75, 5.0, 1e-6).unwrap();
        let asy = asymptotic_constants(&case);
        let exact = curve_integrals(&case.params).unwrap();
        assert!((exact.a_plus - asy.integrals.a_plus).abs() / exact.a_plus < 1e-2);
    }

    #[test]
    fn a_to_b_b_minus_asymptote() {
        let case = LimitCase::a_to_b(0.0, 8.0, 9.0, 1e-5).unwrap();
        let asy = asymptotic_constants(&case);
        let exact = curve_integrals(&case.params).unwrap();
        assert!((exact.b_minus - asy.integrals.b_minus).abs() / exact.b_minus < 1e-2);
    }
}
