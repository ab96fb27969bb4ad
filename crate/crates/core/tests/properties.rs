//! Property tests for the spectral operators, the right-hand side and the
//! conserved functionals.

use num_complex::Complex64;
use proptest::prelude::*;

use gdnls::invariants::{energy, hamiltonian, mass, momentum};
use gdnls::model::{nonlinearity, rhs_mollified, ModelParams};
use gdnls::spectral::{
    free_semigroup, grid_size, hs_norm, interpolation_check, project, to_physical, to_spectral, Cutoff, SobolevIndex,
    SpectralField,
};

fn field(num_modes: usize, scale: f64) -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * num_modes + 1).prop_map(move |v| {
        SpectralField::from_coeffs(v.into_iter().map(|(a, b)| Complex64::new(a, b) * scale).collect()).unwrap()
    })
}

fn cutoff(max: usize) -> impl Strategy<Value = Cutoff> {
    prop_oneof![Just(Cutoff::Unbounded), (0..=max).prop_map(Cutoff::Modes)]
}

fn sobolev() -> impl Strategy<Value = SobolevIndex> {
    (0.0..=4.0f64).prop_map(|s| SobolevIndex::new(s).unwrap())
}

fn close(a: &SpectralField, b: &SpectralField, tol: f64) -> bool {
    (a - b).l2_norm() <= tol * (1.0 + a.l2_norm().max(b.l2_norm()))
}

/// `Σ_{a+c-b+… = k}` for `|u|^{2σ} u_x` with integer `σ`, by direct convolution.
fn convolution_oracle(f: &SpectralField, sigma: usize) -> SpectralField {
    let n = f.num_modes() as i64;
    // Coefficients of a product as a map over a wide band.
    let band = (2 * sigma as i64 + 1) * n;
    let conv = |a: &[Complex64], b: &[Complex64], ha: i64, hb: i64| -> (Vec<Complex64>, i64) {
        let h = ha + hb;
        let mut out = vec![Complex64::new(0.0, 0.0); (2 * h + 1) as usize];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        (out, h)
    };
    let u: Vec<Complex64> = f.coeffs().to_vec();
    // conj(u)(x) has coefficient conj(û_{-k}) at k.
    let ubar: Vec<Complex64> = f.coeffs().iter().rev().map(|z| z.conj()).collect();
    let ux: Vec<Complex64> = f.derivative().coeffs().to_vec();
    let (mut acc, mut h) = (ux, n);
    for _ in 0..sigma {
        let (a, ha) = conv(&acc, &u, h, n);
        let (b, hb) = conv(&a, &ubar, ha, n);
        acc = b;
        h = hb;
    }
    assert_eq!(h, band);
    SpectralField::from_coeffs(acc[(h - n) as usize..=(h + n) as usize].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn transform_round_trip(f in field(12, 1.0), oversample in 1usize..4) {
        let back = to_spectral(&to_physical(&f, oversample).unwrap(), 12).unwrap();
        prop_assert!(close(&f, &back, 1e-13));
    }

    #[test]
    fn projection_is_idempotent(f in field(10, 1.0), k in cutoff(10)) {
        let once = project(&f, k).unwrap();
        prop_assert_eq!(project(&once, k).unwrap(), once);
    }

    #[test]
    fn projection_is_self_adjoint(f in field(10, 1.0), g in field(10, 1.0), k in cutoff(10)) {
        let lhs = project(&f, k).unwrap().inner(&g);
        let rhs = f.inner(&project(&g, k).unwrap());
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + lhs.norm()));
    }

    #[test]
    fn projection_is_non_expansive(f in field(10, 1.0), k in cutoff(10), s in sobolev()) {
        prop_assert!(hs_norm(&project(&f, k).unwrap(), s) <= hs_norm(&f, s));
    }

    #[test]
    fn semigroup_is_unitary(f in field(10, 1.0), t in -3.0..3.0f64, k in cutoff(10), s in sobolev()) {
        let g = free_semigroup(&f, t, k);
        let (a, b) = (hs_norm(&f, s), hs_norm(&g, s));
        prop_assert!((a - b).abs() <= 1e-13 * (1.0 + a));
    }

    #[test]
    fn semigroup_group_law(f in field(8, 1.0), t in -2.0..2.0f64, s in -2.0..2.0f64, k in cutoff(8)) {
        let composed = free_semigroup(&free_semigroup(&f, t, k), s, k);
        prop_assert!(close(&composed, &free_semigroup(&f, t + s, k), 1e-12));
        prop_assert!(close(&free_semigroup(&composed, -(t + s), k), &f, 1e-12));
    }

    #[test]
    fn semigroup_commutes_with_projection(f in field(8, 1.0), t in -2.0..2.0f64, k in cutoff(8)) {
        let a = project(&free_semigroup(&f, t, k), k).unwrap();
        let b = free_semigroup(&project(&f, k).unwrap(), t, k);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn interpolation_holds(f in field(10, 1.0), m in 0.0..=2.0f64, l in 0.0..=2.0f64) {
        prop_assume!(f.l2_norm() > 0.0);
        let (m, l) = if m <= l { (m, l) } else { (l, m) };
        let ok = interpolation_check(&f, SobolevIndex::new(m).unwrap(), SobolevIndex::new(l).unwrap()).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn rhs_gauge_covariance(f in field(8, 0.6), theta in 0.0..6.3f64, sigma in 1.0..3.0f64, k in cutoff(8)) {
        let p = ModelParams::new(sigma, k).unwrap();
        let lhs = rhs_mollified(&f.rotate_phase(theta), &p).unwrap();
        let rhs = rhs_mollified(&f, &p).unwrap().rotate_phase(theta);
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn rhs_translation_covariance(f in field(8, 0.6), j in 0usize..64, sigma in 1.0..3.0f64, k in cutoff(8)) {
        // Shifts by whole grid cells move the quadrature nodes onto each other.
        let p = ModelParams::new(sigma, k).unwrap();
        let a = j as f64 * std::f64::consts::TAU / grid_size(8, p.oversample).unwrap() as f64;
        let lhs = rhs_mollified(&f.translate(a), &p).unwrap();
        let rhs = rhs_mollified(&f, &p).unwrap().translate(a);
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn rhs_translation_covariance_integer_sigma(f in field(8, 0.6), j in 0usize..200, sigma in 1usize..3) {
        // Integer σ with enough oversampling is exact, so any shift commutes.
        let p = ModelParams::new(sigma as f64, Cutoff::Unbounded).unwrap().with_oversample(sigma + 1).unwrap();
        let a = j as f64 * 0.0314;
        let lhs = rhs_mollified(&f.translate(a), &p).unwrap();
        let rhs = rhs_mollified(&f, &p).unwrap().translate(a);
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn integer_sigma_matches_convolution(f in field(8, 1.0), sigma in 1usize..=2) {
        let p = ModelParams::new(sigma as f64, Cutoff::Unbounded).unwrap().with_oversample(sigma + 1).unwrap();
        let got = nonlinearity(&f, &p).unwrap();
        let want = convolution_oracle(&f, sigma);
        prop_assert!((&got - &want).l2_norm() <= 1e-12 * (1.0 + want.l2_norm()), "diff {}", (&got - &want).l2_norm());
    }

    #[test]
    fn functionals_are_gauge_and_translation_invariant(
        f in field(8, 0.7), theta in 0.0..6.3f64, j in 0i64..64, sigma in 1.0..2.5f64, k in cutoff(8)
    ) {
        // Shifts by grid multiples keep the quadrature nodes fixed.
        let a = j as f64 * std::f64::consts::TAU / grid_size(8, 2).unwrap() as f64;
        let g = f.rotate_phase(theta).translate(a);
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-11 * (1.0 + x.abs());
        prop_assert!(rel(mass(&f), mass(&g)));
        prop_assert!(rel(momentum(&f), momentum(&g)));
        prop_assert!(rel(hamiltonian(&f, sigma, k).unwrap(), hamiltonian(&g, sigma, k).unwrap()));
        prop_assert!(rel(energy(&f, sigma, k).unwrap(), energy(&g, sigma, k).unwrap()));
    }

    #[test]
    fn plane_wave_hamiltonian_closed_form(a in 0.05..1.0f64, k in -6i64..=6, sigma in 1.0..3.0f64) {
        let f = SpectralField::plane_wave(8, Complex64::new(a, 0.0), k).unwrap();
        let tau = std::f64::consts::TAU;
        let kf = k as f64;
        let want = tau * a * a * kf * kf + tau * kf * a.powf(2.0 * sigma + 2.0) / (sigma + 1.0);
        let got = hamiltonian(&f, sigma, Cutoff::Unbounded).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }
}
