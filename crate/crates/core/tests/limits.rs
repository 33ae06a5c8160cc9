use num_complex::Complex64;

use thetawave::limits::{dn_wave_theta, plane_wave_ab, plane_wave_cb, DnWave};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[test]
fn dn_wave_is_a_real_profile_in_the_moving_frame() {
    let (lambda0, b, c) = (1.0, 8.0, 9.0);
    let w = DnWave::new(lambda0, b, c).unwrap();
    for i in 0..12 {
        let x = -0.4 + 0.07 * i as f64;
        for t in [-0.02, 0.0, 0.013] {
            let p = dn_wave_theta(x, t, lambda0, b, c).unwrap();
            let f = p * (I * (2.0 * lambda0 * x - 2.0 * (w.k20() - 2.0 * lambda0 * lambda0) * t)).exp();
            assert!(f.im.abs() < 1e-10 * f.norm(), "{f}");
            let xi = x + 4.0 * lambda0 * t;
            assert!((f.re - w.profile(xi).unwrap()).abs() < 1e-10 * f.norm());
        }
    }
}

#[test]
fn plane_waves_have_constant_modulus() {
    for i in 0..20 {
        let (x, t) = (0.3 * i as f64 - 3.0, 0.01 * i as f64);
        assert!((plane_wave_cb(x, t, 0.7, 6.0).norm() - 6.0).abs() < 1e-13);
        assert!((plane_wave_ab(x, t, 0.7, 8.0, 9.0).norm() - 9.0).abs() < 1e-13);
    }
}

#[test]
fn dn_range_matches_elliptic_modulus() {
    let w = DnWave::new(0.0, 8.0, 9.0).unwrap();
    let n = 400;
    let values: Vec<f64> = (0..n).map(|i| w.profile(w.period() * i as f64 / n as f64).unwrap()).collect();
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    assert!((max - 17.0).abs() < 1e-10 && (min - 1.0).abs() < 1e-10);
}
