mod common;

use anycurve::gmres::{arnoldi, gmres_cycle, restarted_gmres, GmresOptions};
use anycurve::linalg::{matmul, CMatrix, CVector};
use anycurve::Error;
use common::{c, krylov_oracle, random_matrix, random_vector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cycle_vs_oracle(seed: u64, n: usize, m: usize) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_matrix(n, &mut rng);
    let b = random_vector(n, &mut rng);
    let x0 = CVector::zeros(n);
    let (_, rec) = gmres_cycle(&a, &x0, &b, m).unwrap();
    (rec.end_norm, krylov_oracle(&a, &b, m), b.norm2())
}

#[test]
fn six_by_six_three_steps_matches_oracle() {
    for seed in 0..20 {
        let (got, want, scale) = cycle_vs_oracle(seed, 6, 3);
        assert!(
            (got - want).abs() <= 1e-9 * scale,
            "seed {seed}: {got} vs {want}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cycle_matches_oracle(seed in any::<u64>(), n in 2usize..=10, m_frac in 0.0..1.0f64) {
        let m = 1 + ((n.min(6) - 1) as f64 * m_frac) as usize;
        let (got, want, scale) = cycle_vs_oracle(seed, n, m);
        prop_assert!((got - want).abs() <= 1e-9 * scale, "{} vs {}", got, want);
    }
}

#[test]
fn arnoldi_relation_on_diagonal() {
    let a = CMatrix::from_fn(2, 2, |i, j| {
        if i == j {
            c(i as f64 + 1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let r = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
    let dec = arnoldi(&a, &r, 2).unwrap();
    let k = dec.hessenberg.cols();
    let v_k = CMatrix::from_columns(&dec.basis[..k]).unwrap();
    let v_k1 =
        CMatrix::from_columns(&dec.basis[..dec.hessenberg.rows().min(dec.basis.len())]).unwrap();
    let h = CMatrix::from_fn(v_k1.cols(), k, |i, j| dec.hessenberg[(i, j)]);
    let lhs = matmul(&a, &v_k).unwrap();
    let rhs = matmul(&v_k1, &h).unwrap();
    assert!(lhs.sub(&rhs).unwrap().frobenius() <= 1e-14);
}

#[test]
fn zero_start_is_an_error() {
    let a = CMatrix::identity(3);
    assert!(matches!(
        arnoldi(&a, &CVector::zeros(3), 2),
        Err(Error::ZeroResidual)
    ));
}

#[test]
fn identity_converges_in_one_cycle() {
    let a = CMatrix::identity(4);
    let b = CVector::from_vec(vec![c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0), c(0.5, 0.5)]);
    let h = restarted_gmres(&a, &b, &CVector::zeros(4), &[2], 5, GmresOptions::default()).unwrap();
    assert_eq!(h.cycles.len(), 1);
    assert!(h.cycles[0].breakdown);
    assert!(h.end_norms()[0] <= 1e-14);
    assert_eq!(h.stopped_at, Some(1));
}

#[test]
fn restart_lengths_repeat_cyclically() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_matrix(8, &mut rng);
    let b = random_vector(8, &mut rng);
    let opts = GmresOptions { abstol: Some(0.0) };
    let h = restarted_gmres(&a, &b, &CVector::zeros(8), &[1, 3], 5, opts).unwrap();
    let used: Vec<usize> = h.cycles.iter().map(|c| c.restart).collect();
    assert_eq!(used, vec![1, 3, 1, 3, 1]);
    // each cycle starts where the previous one ended
    for pair in h.cycles.windows(2) {
        assert!((pair[1].start_norm - pair[0].end_norm).abs() <= 1e-12 * b.norm2());
    }
    // the residual norm never increases
    for pair in h.end_norms().windows(2) {
        assert!(pair[1] <= pair[0] * (1.0 + 1e-12));
    }
}
