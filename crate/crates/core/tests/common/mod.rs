#![allow(dead_code)]

use std::f64::consts::TAU;

use anycurve::constructor::{ProblemSpec, R0Mode};
use anycurve::linalg::{CMatrix, CVector, C64};
use anycurve::model::{validate_curve, RestartSchedule, SpectrumSpec, VariantConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Residual norm of the least-squares problem `min_y |r - K y|` for a tall
/// `K` of full column rank, by Householder QR. Independent of the library's
/// Arnoldi and Givens code.
pub fn householder_ls_residual(k: &[Vec<C64>], r: &[C64]) -> f64 {
    let rows = r.len();
    let mut cols: Vec<Vec<C64>> = k.to_vec();
    let mut rhs = r.to_vec();
    for j in 0..cols.len() {
        let x: Vec<C64> = cols[j][j..].to_vec();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            c(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let reflect = |y: &mut [C64]| {
            let dot: C64 = v.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
            let s = dot * 2.0 / vnorm2;
            for (yi, vi) in y.iter_mut().zip(&v) {
                *yi -= s * vi;
            }
        };
        for col in cols.iter_mut().skip(j) {
            reflect(&mut col[j..]);
        }
        reflect(&mut rhs[j..]);
    }
    rhs[cols.len().min(rows)..]
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `min_y |r - [A r, ..., A^m r] y|` with the Krylov-image columns formed
/// explicitly and normalized.
pub fn krylov_oracle(a: &CMatrix, r: &CVector, m: usize) -> f64 {
    let mut cols = Vec::with_capacity(m);
    let mut v = r.clone();
    for _ in 0..m {
        v = a.matvec(&v).unwrap();
        let nv = v.norm2();
        v = v.scale_real(1.0 / nv);
        cols.push(v.as_slice().to_vec());
    }
    householder_ls_residual(&cols, r.as_slice())
}

pub fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_vec(
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

/// Points drawn uniformly (by area) on `r_min <= |z| <= r_max`.
pub fn annulus(n: usize, r_min: f64, r_max: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let r = rng.random_range(r_min * r_min..r_max * r_max).sqrt();
            C64::from_polar(r, rng.random_range(0.0..TAU))
        })
        .collect()
}

/// `q + 1` values from 1 down to `last`, equally spaced in the logarithm.
pub fn log_spaced(q: usize, last: f64) -> Vec<f64> {
    (0..=q).map(|k| last.powf(k as f64 / q as f64)).collect()
}

pub fn spec(
    schedule: Vec<usize>,
    curve: &[f64],
    spectrum: Vec<C64>,
    variant: VariantConfig,
    seed: u64,
) -> ProblemSpec {
    let n = spectrum.len();
    ProblemSpec {
        schedule: RestartSchedule::new(schedule, n).unwrap(),
        curve: validate_curve(curve).unwrap(),
        spectrum: SpectrumSpec::new(spectrum, n).unwrap(),
        variant,
        seed,
        r0_mode: R0Mode::FirstCanonical,
    }
}

pub fn real_spectrum(values: &[f64]) -> Vec<C64> {
    values.iter().map(|&x| c(x, 0.0)).collect()
}
