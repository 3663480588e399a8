//! Restarted GMRES over dense complex matrices, instrumented to expose the
//! residual norm after every inner step of every cycle.

use crate::error::{Error, Result};
use crate::linalg::{dot_conj, CMatrix, CVector, C64, ZERO};

/// `h_{j+1,j} <= BREAKDOWN_TOL * ||A v_j||` ends the Arnoldi process.
pub const BREAKDOWN_TOL: f64 = 1e-12;
/// Default stopping threshold, relative to `||b||`.
pub const DEFAULT_ABSTOL_REL: f64 = 1e-14;

/// Incremental Arnoldi process with modified Gram-Schmidt and one
/// reorthogonalization pass.
struct Arnoldi<'a> {
    a: &'a CMatrix,
    basis: Vec<CVector>,
    // column j holds h_{0..=j+1, j}
    columns: Vec<Vec<C64>>,
    breakdown: bool,
}

impl<'a> Arnoldi<'a> {
    fn new(a: &'a CMatrix, r: &CVector) -> Result<Self> {
        if !a.is_square() || a.rows() != r.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator with starting vector of length {}",
                a.rows(),
                a.cols(),
                r.len()
            )));
        }
        let beta = r.norm2();
        if beta == 0.0 {
            return Err(Error::ZeroResidual);
        }
        Ok(Arnoldi {
            a,
            basis: vec![r.scale_real(1.0 / beta)],
            columns: Vec::new(),
            breakdown: false,
        })
    }

    fn steps(&self) -> usize {
        self.columns.len()
    }

    /// Extends the basis by one vector. Returns the new Hessenberg column.
    fn step(&mut self) -> Result<&[C64]> {
        let j = self.steps();
        let mut w = self.a.matvec(&self.basis[j])?;
        let scale = w.norm2();
        let mut h = vec![ZERO; j + 2];
        for _pass in 0..2 {
            for (i, v) in self.basis.iter().enumerate() {
                let c = dot_conj(v.as_slice(), w.as_slice());
                h[i] += c;
                w.axpy(-c, v);
            }
        }
        let sub = w.norm2();
        if sub <= BREAKDOWN_TOL * scale || sub == 0.0 || self.basis.len() == self.a.rows() {
            self.breakdown = true;
        } else {
            h[j + 1] = C64::new(sub, 0.0);
            self.basis.push(w.scale_real(1.0 / sub));
        }
        self.columns.push(h);
        Ok(self.columns.last().unwrap())
    }
}

/// Output of [`arnoldi`]: `A V_k = V_{k+1} H` with `H` of size `(k+1) x k`.
#[derive(Debug, Clone)]
pub struct ArnoldiDecomposition {
    /// Orthonormal Krylov basis; `k + 1` vectors, or `k` after a breakdown.
    pub basis: Vec<CVector>,
    pub hessenberg: CMatrix,
    /// Step (1-based) at which the Krylov space became invariant.
    pub breakdown: Option<usize>,
}

/// Runs up to `m` Arnoldi steps from `r`.
pub fn arnoldi(a: &CMatrix, r: &CVector, m: usize) -> Result<ArnoldiDecomposition> {
    let mut proc = Arnoldi::new(a, r)?;
    while proc.steps() < m && !proc.breakdown {
        proc.step()?;
    }
    let k = proc.steps();
    let mut hessenberg = CMatrix::zeros(k + 1, k);
    for (j, col) in proc.columns.iter().enumerate() {
        for (i, &h) in col.iter().enumerate() {
            hessenberg[(i, j)] = h;
        }
    }
    Ok(ArnoldiDecomposition {
        breakdown: proc.breakdown.then_some(k),
        basis: proc.basis,
        hessenberg,
    })
}

/// Complex Givens rotation `[[c, s], [-conj(s), c]]` with real `c`.
#[derive(Debug, Clone, Copy)]
struct Givens {
    c: f64,
    s: C64,
}

impl Givens {
    /// Rotation that maps `(a, b)` to `(r, 0)`.
    fn zeroing(a: C64, b: C64) -> (Self, C64) {
        let abs_a = a.norm();
        let nu = abs_a.hypot(b.norm());
        if nu == 0.0 {
            return (Givens { c: 1.0, s: ZERO }, ZERO);
        }
        if abs_a == 0.0 {
            return (
                Givens {
                    c: 0.0,
                    s: b.conj() / b.norm(),
                },
                C64::new(b.norm(), 0.0),
            );
        }
        let phase = a / abs_a;
        (
            Givens {
                c: abs_a / nu,
                s: phase * b.conj() / nu,
            },
            phase * nu,
        )
    }

    fn apply(&self, x: C64, y: C64) -> (C64, C64) {
        (self.c * x + self.s * y, -self.s.conj() * x + self.c * y)
    }
}

/// Instrumentation of one GMRES(m) cycle.
#[derive(Debug, Clone)]
pub struct CycleRecord {
    /// Restart length requested for this cycle.
    pub restart: usize,
    /// `||r||` at the start of the cycle.
    pub start_norm: f64,
    /// Residual norm after each inner step, from the Givens recurrence.
    pub inner_norms: Vec<f64>,
    /// Whether the cycle ended on an invariant Krylov space.
    pub breakdown: bool,
    /// Explicitly recomputed `b - A x` at the end of the cycle.
    pub end_residual: CVector,
    pub end_norm: f64,
}

/// One restarted GMRES cycle of at most `m` inner steps starting from `x`.
pub fn gmres_cycle(
    a: &CMatrix,
    x: &CVector,
    b: &CVector,
    m: usize,
) -> Result<(CVector, CycleRecord)> {
    if m == 0 {
        return Err(Error::InvalidSchedule(
            "restart length must be positive".into(),
        ));
    }
    let r = b.sub(&a.matvec(x)?);
    let beta = r.norm2();
    let mut proc = Arnoldi::new(a, &r)?;

    let mut rotations: Vec<Givens> = Vec::with_capacity(m);
    // R factor stored by columns, upper triangular part only
    let mut r_cols: Vec<Vec<C64>> = Vec::with_capacity(m);
    let mut g = vec![C64::new(beta, 0.0)];
    let mut inner_norms = Vec::with_capacity(m);

    while proc.steps() < m && !proc.breakdown {
        let mut col = proc.step()?.to_vec();
        let j = col.len() - 2;
        for (i, rot) in rotations.iter().enumerate() {
            let (x0, x1) = rot.apply(col[i], col[i + 1]);
            col[i] = x0;
            col[i + 1] = x1;
        }
        let (rot, diag) = Givens::zeroing(col[j], col[j + 1]);
        col[j] = diag;
        col.truncate(j + 1);
        let (gj, gj1) = rot.apply(g[j], ZERO);
        g[j] = gj;
        g.push(gj1);
        rotations.push(rot);
        r_cols.push(col);
        inner_norms.push(gj1.norm());
    }

    let k = r_cols.len();
    let mut y = g[..k].to_vec();
    for j in (0..k).rev() {
        let d = r_cols[j][j];
        if d == ZERO {
            // singular projected system; leave this direction out
            y[j] = ZERO;
            continue;
        }
        y[j] /= d;
        let yj = y[j];
        for i in 0..j {
            y[i] -= r_cols[j][i] * yj;
        }
    }
    let mut x_next = x.clone();
    for (v, &yj) in proc.basis.iter().zip(&y) {
        x_next.axpy(yj, v);
    }
    let end_residual = b.sub(&a.matvec(&x_next)?);
    let end_norm = end_residual.norm2();
    Ok((
        x_next,
        CycleRecord {
            restart: m,
            start_norm: beta,
            inner_norms,
            breakdown: proc.breakdown,
            end_residual,
            end_norm,
        },
    ))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GmresOptions {
    /// Stop once the end-of-cycle residual norm is at most this value.
    /// Defaults to `1e-14 * ||b||`.
    pub abstol: Option<f64>,
}

/// Residual history of a restarted GMRES run.
#[derive(Debug, Clone)]
pub struct ConvergenceHistory {
    pub initial_norm: f64,
    pub cycles: Vec<CycleRecord>,
    pub x_final: CVector,
    /// Cycle after which the stopping threshold was met (0 if `x0` already met it).
    pub stopped_at: Option<usize>,
}

impl ConvergenceHistory {
    pub fn end_norms(&self) -> Vec<f64> {
        self.cycles.iter().map(|c| c.end_norm).collect()
    }
}

/// Runs `cycles` cycles of restarted GMRES. Restart lengths are taken from
/// `restarts`, repeated cyclically.
pub fn restarted_gmres(
    a: &CMatrix,
    b: &CVector,
    x0: &CVector,
    restarts: &[usize],
    cycles: usize,
    options: GmresOptions,
) -> Result<ConvergenceHistory> {
    if restarts.is_empty() {
        return Err(Error::InvalidSchedule("no restart lengths given".into()));
    }
    let abstol = options.abstol.unwrap_or(DEFAULT_ABSTOL_REL * b.norm2());
    let initial_norm = b.sub(&a.matvec(x0)?).norm2();
    let mut history = ConvergenceHistory {
        initial_norm,
        cycles: Vec::with_capacity(cycles),
        x_final: x0.clone(),
        stopped_at: None,
    };
    if initial_norm <= abstol {
        history.stopped_at = Some(0);
        return Ok(history);
    }
    for k in 0..cycles {
        let m = restarts[k % restarts.len()];
        let (x, record) = match gmres_cycle(a, &history.x_final, b, m) {
            Ok(out) => out,
            Err(Error::ZeroResidual) => {
                history.stopped_at = Some(k);
                break;
            }
            Err(e) => return Err(e),
        };
        let done = record.end_norm <= abstol;
        history.x_final = x;
        history.cycles.push(record);
        if done {
            history.stopped_at = Some(k + 1);
            break;
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matmul, ONE};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn arnoldi_identity_breaks_down_immediately() {
        let a = CMatrix::identity(4);
        let r = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0), ZERO, c(-1.0, 1.0)]);
        let dec = arnoldi(&a, &r, 3).unwrap();
        assert_eq!(dec.breakdown, Some(1));
        assert_eq!((dec.hessenberg.rows(), dec.hessenberg.cols()), (2, 1));
        assert!((dec.hessenberg[(0, 0)] - ONE).norm() < 1e-15);
        assert_eq!(dec.hessenberg[(1, 0)], ZERO);
    }

    #[test]
    fn arnoldi_relation_on_diagonal() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(1.0, 0.0);
        a[(1, 1)] = c(2.0, 0.0);
        let r = CVector::from_vec(vec![ONE, ONE]);
        let dec = arnoldi(&a, &r, 1).unwrap();
        assert_eq!(dec.breakdown, None);
        let vk = CMatrix::from_columns(&dec.basis[..1]).unwrap();
        let vk1 = CMatrix::from_columns(&dec.basis).unwrap();
        let lhs = matmul(&a, &vk).unwrap();
        let rhs = matmul(&vk1, &dec.hessenberg).unwrap();
        assert!(lhs.sub(&rhs).unwrap().frobenius() < 1e-14);
    }

    #[test]
    fn arnoldi_zero_start() {
        let a = CMatrix::identity(2);
        assert!(matches!(
            arnoldi(&a, &CVector::zeros(2), 1),
            Err(Error::ZeroResidual)
        ));
    }

    #[test]
    fn cycle_on_identity_converges_in_one_step() {
        let a = CMatrix::identity(3);
        let b = CVector::from_vec(vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, -3.0)]);
        let (x, rec) = gmres_cycle(&a, &CVector::zeros(3), &b, 2).unwrap();
        assert_eq!(rec.inner_norms.len(), 1);
        assert!(rec.breakdown);
        assert!(rec.end_norm < 1e-15);
        assert!(x.sub(&b).norm2() < 1e-15);
    }

    #[test]
    fn full_dimension_cycle_is_a_direct_solve() {
        let a = CMatrix::from_col_major(
            2,
            2,
            vec![c(2.0, 1.0), c(0.5, 0.0), c(-1.0, 0.3), c(1.0, -2.0)],
        )
        .unwrap();
        let b = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let (_, rec) = gmres_cycle(&a, &CVector::zeros(2), &b, 2).unwrap();
        assert!(rec.end_norm <= 1e-12 * b.norm2());
    }

    #[test]
    fn restarted_on_identity_stops_after_one_cycle() {
        let a = CMatrix::identity(3);
        let b = CVector::unit(3, 1);
        let h =
            restarted_gmres(&a, &b, &CVector::zeros(3), &[1], 5, GmresOptions::default()).unwrap();
        assert_eq!(h.cycles.len(), 1);
        assert_eq!(h.stopped_at, Some(1));
        assert_eq!(h.cycles[0].end_norm, 0.0);
    }

    #[test]
    fn givens_zeroes_second_component() {
        for (a, b) in [
            (c(1.0, 2.0), c(3.0, -1.0)),
            (ZERO, c(0.5, 0.5)),
            (c(-2.0, 0.1), ZERO),
        ] {
            let (rot, r) = Givens::zeroing(a, b);
            let (x, y) = rot.apply(a, b);
            assert!((x - r).norm() < 1e-14);
            assert!(y.norm() < 1e-14);
            assert!((r.norm() - a.norm().hypot(b.norm())).abs() < 1e-14);
        }
    }
}
