//! Evaluation of the two-phase field
//!
//! ```text
//! p = -2iK0 · H(u1 + iδ, u2 + 1) / H(u1, u2) · exp(2iK1x + 2iK2t)
//! u1 = κ1 t + 2Z1,   u2 = k x + κ2 t + 2Z2
//! ```
//!
//! and of its squared amplitude, pointwise and on grids, plus the direct
//! genus-2 theta form used as a cross-check.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::d_vector;
use crate::curve::{period_matrix, reality_check, wave_vectors, SolutionParams, WaveVectors};
use crate::error::{Error, Result};
use crate::theta::{riemann_theta2, theta_h_with_scale, PeriodMatrix, ThetaCharacteristics};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `|H|` below this fraction of its magnitude bound counts as vanishing.
pub const DENOMINATOR_FLOOR: f64 = 1e-13;

/// Imaginary part allowed in the squared amplitude, relative to its size.
pub const AMP2_REALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub t0: f64,
    pub t1: f64,
    pub nx: usize,
    pub nt: usize,
}

impl GridSpec {
    pub fn new(x0: f64, x1: f64, t0: f64, t1: f64, nx: usize, nt: usize) -> Result<Self> {
        let g = Self { x0, x1, t0, t1, nx, nt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x1 > self.x0) || !(self.t1 > self.t0) {
            return Err(Error::InvalidParams(format!(
                "grid needs x1 > x0 and t1 > t0, got [{}, {}] × [{}, {}]",
                self.x0, self.x1, self.t0, self.t1
            )));
        }
        if self.nx < 2 || self.nt < 2 {
            return Err(Error::InvalidParams(format!(
                "grid needs at least 2 nodes per axis, got {} × {}",
                self.nx, self.nt
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x1
        } else {
            self.x0 + i as f64 * self.dx()
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        if j + 1 == self.nt {
            self.t1
        } else {
            self.t0 + j as f64 * self.dt()
        }
    }
}

/// Field values on a grid; `values[i * nt + j]` is `p(x_i, t_j)`.
#[derive(Debug, Clone, Serialize)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub params: SolutionParams,
    /// Smallest `|H(u1, u2)| / bound` met while sampling.
    pub min_denominator: f64,
}

impl SampledField {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.nt + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Theta arguments `(u1, u2)` at `(x, t)`.
pub fn phases(x: f64, t: f64, sp: &SolutionParams) -> (Complex64, Complex64) {
    let u1 = sp.z[0] * 2.0 + sp.kappa1 * t;
    let u2 = sp.z[1] * 2.0 + (sp.k * x + sp.kappa2 * t);
    (u1, u2)
}

fn denominator(u1: Complex64, u2: Complex64, sp: &SolutionParams) -> Result<(Complex64, f64)> {
    let (h, scale) = theta_h_with_scale(u1, u2, sp.frb_minus, sp.frb_plus)?;
    let rel = h.norm() / scale;
    if rel < DENOMINATOR_FLOOR {
        return Err(Error::DenominatorVanishing(rel));
    }
    Ok((h, rel))
}

fn eval_with_floor(x: f64, t: f64, sp: &SolutionParams) -> Result<(Complex64, f64)> {
    let (u1, u2) = phases(x, t, sp);
    let (den, rel) = denominator(u1, u2, sp)?;
    let num = theta_h_with_scale(u1 + I * sp.delta, u2 + 1.0, sp.frb_minus, sp.frb_plus)?.0;
    let carrier = (I * (2.0 * (sp.k1 * x + sp.k2 * t))).exp();
    Ok((-I * 2.0 * sp.k0 * num / den * carrier, rel))
}

/// The complex field `p(x, t)`.
pub fn eval_p(x: f64, t: f64, sp: &SolutionParams) -> Result<Complex64> {
    Ok(eval_with_floor(x, t, sp)?.0)
}

/// `|p|²` from `-4K0² H(u1 - iδ, u2 - 1) H(u1 + iδ, u2 + 1) / H(u1, u2)²`.
///
/// Complex initial phases are accepted only when they satisfy the reality
/// condition.
pub fn eval_amp2(x: f64, t: f64, sp: &SolutionParams) -> Result<f64> {
    if !sp.has_real_phase() {
        let b = period_matrix(&sp.constants)?;
        if !reality_check(sp.z, &b).real {
            return Err(Error::ComplexPhaseRejected);
        }
    }
    let (u1, u2) = phases(x, t, sp);
    let (bm, bp) = (sp.frb_minus, sp.frb_plus);
    let (den, _) = denominator(u1, u2, sp)?;
    let (plus, s_plus) = theta_h_with_scale(u1 + I * sp.delta, u2 + 1.0, bm, bp)?;
    let (minus, s_minus) = theta_h_with_scale(u1 - I * sp.delta, u2 - 1.0, bm, bp)?;
    let value = -4.0 * sp.k0 * sp.k0 * minus * plus / (den * den);
    // cancellation inside the numerator limits the attainable accuracy
    let bound = (-4.0 * sp.k0 * sp.k0).norm() * s_plus * s_minus / den.norm_sqr();
    let tol = AMP2_REALITY_TOL * value.norm().max(1e-3 * bound);
    if value.im.abs() > tol || value.re < -tol {
        return Err(Error::RealityViolation(value.im / value.norm()));
    }
    Ok(value.re.max(0.0))
}

/// Evaluate `p` on every grid node, rows in parallel.
pub fn sample_grid(spec: &GridSpec, sp: &SolutionParams) -> Result<SampledField> {
    spec.validate()?;
    let rows: Vec<Vec<(Complex64, f64)>> = (0..spec.nx)
        .into_par_iter()
        .map(|i| {
            let x = spec.x(i);
            (0..spec.nt)
                .map(|j| eval_with_floor(x, spec.t(j), sp))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(spec.nx * spec.nt);
    let mut min_den = f64::INFINITY;
    for row in rows {
        for (v, rel) in row {
            values.push(v);
            min_den = min_den.min(rel);
        }
    }
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::DenominatorVanishing(0.0));
    }
    Ok(SampledField {
        grid: *spec,
        values,
        params: *sp,
        min_denominator: min_den,
    })
}

/// The genus-2 form `c · Θ(Ux + Vt + Z - D) / Θ(Ux + Vt + Z) · exp(2i(K1x + K2t))`
/// with the constant `c` pinned to the two-phase formula at `(0, 0)`.
#[derive(Debug, Clone)]
pub struct GeneralForm {
    pub b: PeriodMatrix,
    pub waves: WaveVectors,
    /// `D` as used, i.e. the real-axis Abel integral minus `B·lattice_shift`.
    pub d: [Complex64; 2],
    pub d_raw: [Complex64; 2],
    pub lattice_shift: [i32; 2],
    pub z: [Complex64; 2],
    pub k1: f64,
    pub k2: f64,
    pub norm: Complex64,
}

/// Find `N, M ∈ ℤ²` with `D = -(iδ/2, 1/2) + B·N + M`, the representative of
/// the Abel image matching the shift `(iδ, 1)` of the two-phase formula.
pub fn d_lattice_shift(d: [Complex64; 2], delta: f64, b: &PeriodMatrix) -> Result<[i32; 2]> {
    let target = [Complex64::new(0.0, -0.5 * delta), Complex64::new(-0.5, 0.0)];
    let e = &b.entries;
    for n1 in -2..=2 {
        for n2 in -2..=2 {
            let (f1, f2) = (n1 as f64, n2 as f64);
            let rest = [
                d[0] - target[0] - e[0][0] * f1 - e[0][1] * f2,
                d[1] - target[1] - e[1][0] * f1 - e[1][1] * f2,
            ];
            let integral = rest
                .iter()
                .all(|r| r.im.abs() < 1e-8 && (r.re - r.re.round()).abs() < 1e-8);
            if integral {
                return Ok([n1, n2]);
            }
        }
    }
    Err(Error::Fit(format!(
        "Abel image {d:?} is not a lattice translate of (iδ/2, 1/2)"
    )))
}

impl GeneralForm {
    pub fn new(sp: &SolutionParams) -> Result<Self> {
        let raw = d_vector(&sp.curve, &sp.constants)?;
        let b = period_matrix(&sp.constants)?;
        let n = d_lattice_shift(raw, sp.delta, &b)?;
        let e = &b.entries;
        let (f1, f2) = (n[0] as f64, n[1] as f64);
        let d = [
            raw[0] - e[0][0] * f1 - e[0][1] * f2,
            raw[1] - e[1][0] * f1 - e[1][1] * f2,
        ];
        let mut form = Self::with_d(sp, d)?;
        form.d_raw = raw;
        form.lattice_shift = n;
        Ok(form)
    }

    /// As [`GeneralForm::new`] with a caller-chosen `D`.
    pub fn with_d(sp: &SolutionParams, d: [Complex64; 2]) -> Result<Self> {
        let mut form = Self {
            b: period_matrix(&sp.constants)?,
            waves: wave_vectors(&sp.curve, &sp.constants),
            d,
            d_raw: d,
            lattice_shift: [0, 0],
            z: sp.z,
            k1: sp.k1,
            k2: sp.k2,
            norm: Complex64::new(1.0, 0.0),
        };
        let raw = form.eval(0.0, 0.0)?;
        form.norm = eval_p(0.0, 0.0, sp)? / raw;
        Ok(form)
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<Complex64> {
        let (u, v) = (self.waves.u, self.waves.v);
        let arg = [
            self.z[0] + (u[0] * x + v[0] * t),
            self.z[1] + (u[1] * x + v[1] * t),
        ];
        let zero = ThetaCharacteristics::zero();
        let num = riemann_theta2([arg[0] - self.d[0], arg[1] - self.d[1]], &self.b, &zero)?;
        let den = riemann_theta2(arg, &self.b, &zero)?;
        let carrier = (I * (2.0 * (self.k1 * x + self.k2 * t))).exp();
        Ok(self.norm * num / den * carrier)
    }
}

/// One-shot general-form evaluation; prefer [`GeneralForm`] for many points.
pub fn eval_p_general(x: f64, t: f64, sp: &SolutionParams) -> Result<Complex64> {
    GeneralForm::new(sp)?.eval(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::build_solution_params;
    use crate::elliptic::CurveParams;

    fn sp(l0: f64) -> SolutionParams {
        let p = CurveParams::new(l0, 6.0, 8.0, 9.0).unwrap();
        build_solution_params(&p, [Complex64::new(0.0, 0.0); 2]).unwrap()
    }

    #[test]
    fn grid_coordinates_hit_endpoints() {
        let g = GridSpec::new(0.0, 0.3, -1.0, 1.0, 4, 7).unwrap();
        assert_eq!(g.x(3), 0.3);
        assert_eq!(g.t(0), -1.0);
        assert_eq!(g.t(6), 1.0);
        assert!(GridSpec::new(0.0, 0.0, 0.0, 1.0, 2, 2).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0, 1.0, 1, 2).is_err());
    }

    #[test]
    fn origin_value_regression() {
        let s = sp(0.0);
        let p = eval_p(0.0, 0.0, &s).unwrap();
        assert!((p.re - 6.999_999_999_999_991).abs() < 1e-10, "{p}");
        assert!(p.im.abs() < 1e-12, "{p}");
    }

    #[test]
    fn amp2_matches_modulus() {
        let s = sp(0.0);
        for &(x, t) in &[(0.0, 0.0), (0.1, 0.003), (-0.23, 0.011), (0.4, -0.02)] {
            let p = eval_p(x, t, &s).unwrap();
            let a2 = eval_amp2(x, t, &s).unwrap();
            assert!((p.norm_sqr() - a2).abs() / a2 < 1e-10);
        }
    }

    #[test]
    fn two_by_two_grid_matches_pointwise() {
        let s = sp(0.3);
        let g = GridSpec::new(-0.1, 0.2, 0.0, 0.01, 2, 2).unwrap();
        let f = sample_grid(&g, &s).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(f.get(i, j), eval_p(g.x(i), g.t(j), &s).unwrap());
            }
        }
        assert!(f.min_denominator > 0.0);
    }

    #[test]
    fn generic_complex_phase_rejected() {
        let s = sp(0.0).with_phase([Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.3)]);
        assert!(matches!(eval_amp2(0.1, 0.0, &s), Err(Error::ComplexPhaseRejected)));
    }

    #[test]
    fn general_form_modulus_and_phase() {
        let s = sp(0.0);
        let g = GeneralForm::new(&s).unwrap();
        let mut phase0 = None;
        for &(x, t) in &[(0.05, 0.001), (0.2, 0.007), (-0.13, 0.012)] {
            let a = eval_p(x, t, &s).unwrap();
            let b = g.eval(x, t).unwrap();
            assert!((a.norm() - b.norm()).abs() / a.norm() < 1e-8);
            let ph = (b / a).arg();
            let p0 = *phase0.get_or_insert(ph);
            assert!((ph - p0).abs() < 1e-8);
        }
        assert_eq!(g.lattice_shift, [1, 0]);
    }
}
