mod common;

use anycurve::linalg::{
    inner, lu_solve, matmul, mgs_project_orthonormal, random_unit_in_complement, CMatrix, CVector,
    C64,
};
use common::c;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cvec(n: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), n)
        .prop_map(|v| CVector::from_vec(v.into_iter().map(|(re, im)| c(re, im)).collect()))
}

fn scalar() -> impl Strategy<Value = C64> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(re, im)| c(re, im))
}

fn close(a: C64, b: C64, scale: f64) -> bool {
    (a - b).norm() <= 1e-12 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn inner_is_sesquilinear(u in cvec(6), v in cvec(6), w in cvec(6), a in scalar()) {
        let uv = inner(&u, &v).unwrap();
        let scale = u.norm2() * v.norm2() * (1.0 + a.norm());
        prop_assert!(close(inner(&v, &u).unwrap(), uv.conj(), scale));
        prop_assert!(close(inner(&u.scaled(a), &v).unwrap(), a.conj() * uv, scale));
        prop_assert!(close(inner(&u, &v.scaled(a)).unwrap(), a * uv, scale));
        let sum = inner(&u, &v.add(&w)).unwrap();
        let scale = u.norm2() * (v.norm2() + w.norm2());
        prop_assert!(close(sum, uv + inner(&u, &w).unwrap(), scale));
    }

    #[test]
    fn mgs_output_is_orthonormal_to_basis(seed in any::<u64>(), k in 0usize..7, cand in cvec(8)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut basis = Vec::new();
        for _ in 0..k {
            basis.push(random_unit_in_complement(8, &basis, &mut rng).unwrap());
        }
        prop_assume!(cand.norm2() > 1e-3);
        match mgs_project_orthonormal(&cand, &basis) {
            Ok(v) => {
                prop_assert!((v.norm2() - 1.0).abs() <= 1e-12);
                for b in &basis {
                    prop_assert!(inner(b, &v).unwrap().norm() <= 1e-12);
                }
            }
            // only a candidate lying almost inside span(basis) may be refused
            Err(_) => {
                let mut residual = cand.clone();
                for b in &basis {
                    residual.axpy(-inner(b, &cand).unwrap(), b);
                }
                prop_assert!(residual.norm2() <= 1e-7 * cand.norm2());
            }
        }
    }

    #[test]
    fn lu_solve_residual_is_small(seed in any::<u64>(), n in 1usize..12, nrhs in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // diagonally dominant, so the condition number stays far below 1e6
        let base = common::random_matrix(n, &mut rng);
        let shift = c(2.0 * n as f64, 0.0);
        let m = CMatrix::from_fn(n, n, |r, col| if r == col { base[(r, col)] + shift } else { base[(r, col)] });
        let b = CMatrix::from_fn(n, nrhs, |_, _| c(1.0, -0.5));
        let x = lu_solve(&m, &b).unwrap();
        let resid = matmul(&m, &x).unwrap().sub(&b).unwrap().frobenius();
        let scale = m.frobenius() * x.frobenius() + b.frobenius();
        prop_assert!(resid / scale <= 1e-10);
    }
}

#[test]
fn complement_of_all_but_one_direction_is_that_direction() {
    let n = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let basis: Vec<CVector> = (0..n)
        .filter(|&i| i != 2)
        .map(|i| CVector::unit(n, i))
        .collect();
    let v = random_unit_in_complement(n, &basis, &mut rng).unwrap();
    for b in &basis {
        assert!(inner(b, &v).unwrap().norm() <= 1e-12);
    }
    assert!((v[2].norm() - 1.0).abs() <= 1e-12);
}
