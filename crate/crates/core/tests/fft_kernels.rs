use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use fastslepian::fft_kernels::{
    dirichlet_entry, nearest_odd, prolate_symbol, PartialFourier, ToeplitzOperator, ToeplitzSymbol,
};
use fastslepian::SlepianError;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slepian_testkit as tk;

fn random_complex(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn diff_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn dense_mul(m: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

#[test]
fn prolate_symbol_entries() {
    let s = prolate_symbol(4, 0.3).unwrap();
    assert_eq!(s.col()[0], 0.6);
    let s = prolate_symbol(2, 0.25).unwrap();
    assert_abs_diff_eq!(s.col()[1], 1.0 / PI, epsilon = 1e-16);

    let dense = prolate_symbol(64, 0.25).unwrap().to_dense();
    let oracle = tk::prolate(64, 0.25);
    assert!((dense - oracle).amax() < 1e-15);
}

#[test]
fn prolate_symbol_rejects_bad_input() {
    assert!(matches!(prolate_symbol(0, 0.25), Err(SlepianError::InvalidParameter(_))));
    for w in [0.0, 0.5, -0.1, 0.7, f64::NAN] {
        assert!(prolate_symbol(8, w).is_err(), "w = {w}");
    }
}

#[test]
fn toeplitz_identity_symbol() {
    let mut col = vec![0.0; 16];
    col[0] = 1.0;
    let op = ToeplitzOperator::new(ToeplitzSymbol::new(col).unwrap());
    let x = random_complex(16, 1);
    assert!(diff_norm(&op.apply(&x).unwrap(), &x) < 1e-15);
}

#[test]
fn toeplitz_two_by_two() {
    let op = ToeplitzOperator::prolate(2, 0.25).unwrap();
    let y = op.apply(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    assert_abs_diff_eq!(y[0].re, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(y[1].re, 1.0 / PI, epsilon = 1e-15);
    assert_abs_diff_eq!(y[0].im, 0.0, epsilon = 1e-15);
}

#[test]
fn toeplitz_matches_dense_at_128() {
    let op = ToeplitzOperator::prolate(128, 0.2).unwrap();
    assert_eq!(op.fft_len(), 256);
    let b = tk::to_complex(&tk::prolate(128, 0.2));
    let x = random_complex(128, 2);
    let err = diff_norm(&op.apply(&x).unwrap(), &dense_mul(&b, &x));
    assert!(err <= 1e-12 * norm(&x), "{err}");
}

#[test]
fn toeplitz_matches_dense_at_1024() {
    for (n, w) in [(1024, 0.25), (1000, 1.0 / 16.0), (777, 0.41)] {
        let op = ToeplitzOperator::prolate(n, w).unwrap();
        assert!(op.fft_len() >= 2 * n && op.fft_len().is_power_of_two());
        let b = tk::to_complex(&tk::prolate(n, w));
        let x = random_complex(n, 3);
        let err = diff_norm(&op.apply(&x).unwrap(), &dense_mul(&b, &x));
        assert!(err <= 1e-10 * norm(&x), "n = {n}: {err}");
    }
}

#[test]
fn toeplitz_real_paths_agree() {
    let op = ToeplitzOperator::prolate(100, 0.1).unwrap();
    let z = random_complex(100, 4);
    let re: Vec<f64> = z.iter().map(|c| c.re).collect();
    let im: Vec<f64> = z.iter().map(|c| c.im).collect();
    let full = op.apply(&z).unwrap();
    let (yr, yi) = op.apply_real_pair(&re, &im).unwrap();
    let yr_only = op.apply_real(&re).unwrap();
    for i in 0..100 {
        assert_abs_diff_eq!(full[i].re, yr[i], epsilon = 1e-14);
        assert_abs_diff_eq!(full[i].im, yi[i], epsilon = 1e-14);
        assert_abs_diff_eq!(yr_only[i], yr[i], epsilon = 1e-14);
    }
}

#[test]
fn toeplitz_dimension_mismatch() {
    let op = ToeplitzOperator::prolate(8, 0.25).unwrap();
    assert!(matches!(
        op.apply(&[Complex64::new(1.0, 0.0); 7]),
        Err(SlepianError::DimensionMismatch { expected: 8, got: 7 })
    ));
    assert!(op.apply_real(&[0.0; 9]).is_err());
}

#[test]
fn nearest_odd_rule() {
    assert_eq!(nearest_odd(32.0).unwrap(), 33);
    assert_eq!(nearest_odd(31.2).unwrap(), 31);
    assert_eq!(nearest_odd(33.9).unwrap(), 33);
    assert_eq!(nearest_odd(34.1).unwrap(), 35);
    assert_eq!(nearest_odd(0.3).unwrap(), 1);
    for x in [1.0, 2.0, 7.5, 64.0, 127.99] {
        assert_eq!(nearest_odd(x).unwrap(), tk::num_cols(1, x / 2.0), "x = {x}");
    }
}

#[test]
fn partial_fourier_zero_input() {
    let pf = PartialFourier::new(64, 0.25).unwrap();
    let zero = vec![Complex64::new(0.0, 0.0); 64];
    assert!(pf.adjoint(&zero).unwrap().iter().all(|c| c.norm() == 0.0));
    let zero = vec![Complex64::new(0.0, 0.0); pf.num_cols()];
    assert!(pf.apply(&zero).unwrap().iter().all(|c| c.norm() == 0.0));
}

#[test]
fn partial_fourier_columns_are_orthonormal() {
    let (n, w) = (64, 0.25);
    let pf = PartialFourier::new(n, w).unwrap();
    assert_eq!(pf.num_cols(), 33);
    let f = tk::partial_fourier(n, 33);
    for j in 0..33 {
        let col: Vec<Complex64> = f.column(j).iter().copied().collect();
        let c = pf.adjoint(&col).unwrap();
        for (i, v) in c.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(want, 0.0)).norm() < 1e-12, "({i}, {j}): {v}");
        }
    }
}

#[test]
fn partial_fourier_matches_dense() {
    let (n, w) = (64, 0.25);
    let pf = PartialFourier::new(n, w).unwrap();
    let f = tk::partial_fourier(n, pf.num_cols());
    let x = random_complex(n, 5);
    let err = diff_norm(&pf.adjoint(&x).unwrap(), &dense_mul(&f.adjoint(), &x));
    assert!(err <= 1e-12 * norm(&x));
    let c = random_complex(pf.num_cols(), 6);
    let err = diff_norm(&pf.apply(&c).unwrap(), &dense_mul(&f, &c));
    assert!(err <= 1e-12 * norm(&c));
    assert!((pf.to_dense() - f).camax() < 1e-13);
}

#[test]
fn partial_fourier_projector_idempotent() {
    let pf = PartialFourier::new(64, 0.25).unwrap();
    let x = random_complex(64, 7);
    let once = pf.project(&x).unwrap();
    let twice = pf.project(&once).unwrap();
    assert!(diff_norm(&once, &twice) <= 1e-12 * norm(&x));
}

#[test]
fn partial_fourier_projector_entries() {
    let (n, w) = (32, 0.25);
    let pf = PartialFourier::new(n, w).unwrap();
    let f = pf.to_dense();
    let p = &f * f.adjoint();
    let wp = pf.w_prime();
    assert_abs_diff_eq!(wp, 17.0 / 64.0, epsilon = 1e-16);
    for a in 0..n {
        for b in 0..n {
            let d = a as f64 - b as f64;
            let want = if a == b {
                2.0 * wp
            } else {
                (2.0 * PI * wp * d).sin() / (n as f64 * (PI * d / n as f64).sin())
            };
            assert!((p[(a, b)] - Complex64::new(want, 0.0)).norm() < 1e-13);
            assert_abs_diff_eq!(dirichlet_entry(n, wp, a as i64 - b as i64), want, epsilon = 1e-13);
        }
    }
}

#[test]
fn partial_fourier_dimension_mismatch() {
    let pf = PartialFourier::new(16, 0.25).unwrap();
    assert!(pf.adjoint(&[Complex64::new(0.0, 0.0); 15]).is_err());
    assert!(pf.apply(&[Complex64::new(0.0, 0.0); 16]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn toeplitz_apply_matches_dense(n in 1usize..300, w in 0.01f64..0.49, seed in any::<u64>()) {
        let op = ToeplitzOperator::prolate(n, w).unwrap();
        let b = tk::to_complex(&tk::prolate(n, w));
        let x = random_complex(n, seed);
        let err = diff_norm(&op.apply(&x).unwrap(), &dense_mul(&b, &x));
        prop_assert!(err <= 1e-10 * norm(&x).max(1e-300));
    }

    #[test]
    fn toeplitz_apply_is_linear(n in 1usize..200, w in 0.01f64..0.49, seed in any::<u64>(), a in -3.0f64..3.0) {
        let op = ToeplitzOperator::prolate(n, w).unwrap();
        let x = random_complex(n, seed);
        let y = random_complex(n, seed.wrapping_add(1));
        let s = Complex64::new(a, 0.5);
        let combo: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| s * p + q).collect();
        let lhs = op.apply(&combo).unwrap();
        let (ax, ay) = (op.apply(&x).unwrap(), op.apply(&y).unwrap());
        let rhs: Vec<Complex64> = ax.iter().zip(&ay).map(|(p, q)| s * p + q).collect();
        prop_assert!(diff_norm(&lhs, &rhs) <= 1e-12 * (norm(&x) + norm(&y)));
    }

    #[test]
    fn partial_fourier_projector_properties(n in 2usize..=256, w in 0.01f64..0.49) {
        let pf = PartialFourier::new(n, w).unwrap();
        let m = pf.num_cols();
        prop_assert!(m % 2 == 1 && m <= n);
        prop_assert!((2.0 * n as f64 * (pf.w_prime() - w)).abs() <= 1.0 + 1e-12);
        let f = pf.to_dense();
        let p = &f * f.adjoint();
        let idem = tk::norm2_bound_complex(&(&p * &p - &p));
        prop_assert!(idem <= 1e-10, "idempotence {idem}");
        let herm = (&p - p.adjoint()).camax();
        prop_assert!(herm <= 1e-12, "hermitian {herm}");
        let trace: f64 = (0..n).map(|i| p[(i, i)].re).sum();
        prop_assert!((trace - m as f64).abs() <= 1e-8 * m as f64);
    }

    #[test]
    fn prolate_symbol_even_and_bounded(n in 1usize..2000, w in 0.001f64..0.499) {
        let s = prolate_symbol(n, w).unwrap();
        prop_assert_eq!(s.col().len(), n);
        prop_assert!(s.col().iter().all(|&c| c.is_finite() && c.abs() <= 2.0 * w));
        let d = prolate_symbol(n.min(40), w).unwrap().to_dense();
        prop_assert_eq!(&d, &d.transpose());
    }
}
