//! Builds a matrix and right-hand side on which restarted GMRES follows a
//! prescribed cycle-convergence curve while the matrix carries a prescribed
//! spectrum.
//!
//! The construction runs in three stages:
//!
//! 1. [`build_scaffold`] (and its stagnation / zero-tail siblings) produces
//!    the residuals `r_k` and, for every cycle, an orthonormal basis `W^(k)`
//!    of the Krylov residual space the cycle must see. The residual is held
//!    constant for the first `m_k - 1` inner steps and drops only on the
//!    last one, which is what keeps the collected vectors independent.
//! 2. [`assemble_operator`] completes those vectors to a basis `S` of `C^n`
//!    and writes the operator in that basis: a block lower triangular matrix
//!    whose diagonal blocks are companion matrices of the prescribed
//!    eigenvalue groups.
//! 3. [`similarity_transform`] maps the operator back to the canonical basis.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    inner, lu_solve, matmul, random_unit_in_complement, CMatrix, CVector, C64, ONE, ZERO,
};
use crate::model::{
    partition_spectrum, poly_from_roots, ConvergenceCurve, CurveVariant, MonicPolynomial,
    RestartSchedule, SpectrumSpec, VariantConfig, VariantKind,
};

/// Generator used by every seeded construction.
pub type ConstructionRng = ChaCha8Rng;

/// How the initial residual is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum R0Mode {
    /// `r0 = f(0) e_1`
    #[default]
    #[serde(rename = "e1")]
    FirstCanonical,
    /// `r0 = f(0) u` for a seeded random unit vector `u`
    #[serde(rename = "random")]
    RandomUnit,
}

/// What occupies the last slot of the independent set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailKind {
    /// The final residual `r_q`.
    Residual,
    /// `f(s) w_m^(s+1) + r_s` for a curve that stagnates after cycle `s`.
    StagnationSum,
    /// `r_q + gamma r_{q-1}`.
    GammaShifted(C64),
    /// A fresh unit vector standing in for `r_q = 0`.
    Fresh,
}

/// Residuals, Krylov bases and the independent set produced by the first stage.
#[derive(Debug, Clone)]
pub struct KrylovScaffold {
    /// `r_0, ..., r_q`. Stagnant cycles repeat `r_s`.
    pub residuals: Vec<CVector>,
    /// Full orthonormal set `W^(k)` for each shaped cycle.
    pub wsets: Vec<Vec<CVector>>,
    /// Angle between `r_{k-1}` and the last vector of `W^(k)`, per shaped cycle.
    pub angles: Vec<f64>,
    /// `r_0, W^(1) minus its last vector, r_1, ..., tail`, in basis order.
    /// The `W^(k)` vectors enter scaled by `f(k-1)`, so the Krylov chain of
    /// every cycle has the length scale of the residual it starts from.
    pub sbar: Vec<CVector>,
    pub tail: CVector,
    pub tail_kind: TailKind,
    /// Restart lengths of the shaped cycles (the companion block sizes).
    pub cycle_blocks: Vec<usize>,
    // orthonormal basis of everything drawn so far; spans sbar plus the
    // last vector of every W^(k)
    orthonormal: Vec<CVector>,
}

impl KrylovScaffold {
    pub fn dim(&self) -> usize {
        self.residuals[0].len()
    }

    /// `n - |sbar|`, the number of completion vectors.
    pub fn completion_size(&self) -> usize {
        self.dim() - self.sbar.len()
    }

    /// Replaces the tail `r_q` by `r_q + gamma r_{q-1}`.
    pub fn shift_tail(&mut self, gamma: C64) -> Result<()> {
        if self.tail_kind != TailKind::Residual {
            return Err(Error::VariantMismatch {
                variant: VariantKind::NonConvergent.to_string(),
                curve: "non-decreasing".into(),
            });
        }
        if (ONE + gamma).norm() <= 1e-14 * gamma.norm().max(1.0) {
            return Err(Error::GammaForbidden);
        }
        let q = self.residuals.len() - 1;
        let mut tail = self.residuals[q].clone();
        tail.axpy(gamma, &self.residuals[q - 1]);
        *self.sbar.last_mut().expect("sbar is never empty") = tail.clone();
        self.tail = tail;
        self.tail_kind = TailKind::GammaShifted(gamma);
        Ok(())
    }
}

struct ScaffoldBuilder<'r> {
    n: usize,
    rng: &'r mut ConstructionRng,
    residuals: Vec<CVector>,
    wsets: Vec<Vec<CVector>>,
    angles: Vec<f64>,
    sbar: Vec<CVector>,
    orthonormal: Vec<CVector>,
    cycle_blocks: Vec<usize>,
}

impl<'r> ScaffoldBuilder<'r> {
    fn new(curve: &ConvergenceCurve, r0: &CVector, rng: &'r mut ConstructionRng) -> Result<Self> {
        let f0 = curve.f(0);
        let norm = r0.norm2();
        if !r0.is_finite() || (norm - f0).abs() > 1e-12 * f0 {
            return Err(Error::NonAdmissible {
                index: 0,
                reason: format!("initial residual has norm {norm}, expected f(0) = {f0}"),
            });
        }
        Ok(ScaffoldBuilder {
            n: r0.len(),
            rng,
            residuals: vec![r0.clone()],
            wsets: Vec::new(),
            angles: Vec::new(),
            sbar: vec![r0.clone()],
            orthonormal: vec![r0.scale_real(1.0 / norm)],
            cycle_blocks: Vec::new(),
        })
    }

    fn draw(&mut self) -> Result<CVector> {
        let v = random_unit_in_complement(self.n, &self.orthonormal, self.rng)?;
        self.orthonormal.push(v.clone());
        Ok(v)
    }

    /// The first `count` vectors of a new W set, each appended to sbar
    /// multiplied by `scale`.
    fn draw_leading(&mut self, count: usize, scale: f64) -> Result<Vec<CVector>> {
        let mut set = Vec::with_capacity(count + 1);
        for _ in 0..count {
            let w = self.draw()?;
            self.sbar.push(w.scale_real(scale));
            set.push(w);
        }
        Ok(set)
    }

    fn last_residual(&self) -> &CVector {
        self.residuals.last().unwrap()
    }

    /// A cycle that reduces the residual norm from `f_prev > 0` to `f_next > 0`.
    fn decreasing_cycle(&mut self, m: usize, f_prev: f64, f_next: f64) -> Result<()> {
        let mut wset = self.draw_leading(m - 1, f_prev)?;
        let cos = ((f_prev - f_next) * (f_prev + f_next)).sqrt() / f_prev;
        let sin = f_next / f_prev;
        let y = self.draw()?;
        let r_prev = self.last_residual().clone();
        let mut w_last = r_prev.scale_real(cos / f_prev);
        w_last.axpy(C64::new(sin, 0.0), &y);
        let mut r_next = r_prev.clone();
        r_next.axpy(-inner(&w_last, &r_prev)?, &w_last);

        wset.push(w_last);
        self.wsets.push(wset);
        self.angles.push(sin.atan2(cos));
        self.residuals.push(r_next.clone());
        self.sbar.push(r_next);
        self.cycle_blocks.push(m);
        Ok(())
    }

    fn finish(mut self, tail_kind: TailKind) -> KrylovScaffold {
        let tail = self.sbar.last().unwrap().clone();
        self.orthonormal.shrink_to_fit();
        KrylovScaffold {
            residuals: self.residuals,
            wsets: self.wsets,
            angles: self.angles,
            sbar: self.sbar,
            tail,
            tail_kind,
            cycle_blocks: self.cycle_blocks,
            orthonormal: self.orthonormal,
        }
    }
}

fn check_schedule(
    curve: &ConvergenceCurve,
    schedule: &RestartSchedule,
    r0: &CVector,
) -> Result<()> {
    if schedule.len() != curve.q() {
        return Err(Error::InvalidSchedule(format!(
            "schedule has {} cycles but the curve prescribes {}",
            schedule.len(),
            curve.q()
        )));
    }
    if schedule.n() != r0.len() {
        return Err(Error::DimensionMismatch(format!(
            "schedule for order {} with initial residual of length {}",
            schedule.n(),
            r0.len()
        )));
    }
    Ok(())
}

/// Scaffold for a strictly decreasing, positive curve.
pub fn build_scaffold(
    curve: &ConvergenceCurve,
    schedule: &RestartSchedule,
    r0: &CVector,
    rng: &mut ConstructionRng,
) -> Result<KrylovScaffold> {
    if curve.variant() != CurveVariant::Decreasing {
        return Err(Error::CurveNotDecreasing);
    }
    check_schedule(curve, schedule, r0)?;
    let mut b = ScaffoldBuilder::new(curve, r0, rng)?;
    for k in 1..=curve.q() {
        b.decreasing_cycle(schedule.cycles()[k - 1], curve.f(k - 1), curve.f(k))?;
    }
    Ok(b.finish(TailKind::Residual))
}

/// Scaffold for a curve that decreases through cycle `s` and then stagnates.
///
/// Cycle `s + 1` receives a Krylov residual space entirely orthogonal to
/// `r_s`, so GMRES cannot reduce the residual there or in any later cycle.
pub fn build_scaffold_stagnation(
    curve: &ConvergenceCurve,
    schedule: &RestartSchedule,
    r0: &CVector,
    rng: &mut ConstructionRng,
) -> Result<KrylovScaffold> {
    let CurveVariant::Stagnating { s } = curve.variant() else {
        return Err(Error::VariantMismatch {
            variant: VariantKind::Stagnation.to_string(),
            curve: curve.variant().to_string(),
        });
    };
    check_schedule(curve, schedule, r0)?;
    let mut b = ScaffoldBuilder::new(curve, r0, rng)?;
    for k in 1..=s {
        b.decreasing_cycle(schedule.cycles()[k - 1], curve.f(k - 1), curve.f(k))?;
    }

    let m = schedule.cycles()[s];
    let f_s = curve.f(s);
    let mut wset = b.draw_leading(m - 1, f_s)?;
    let w_last = b.draw()?;
    let r_s = b.last_residual().clone();
    let tail = w_last.scale_real(f_s).add(&r_s);
    wset.push(w_last);
    b.wsets.push(wset);
    b.angles.push(std::f64::consts::FRAC_PI_2);
    b.cycle_blocks.push(m);
    b.sbar.push(tail);
    for _ in s + 1..=curve.q() {
        b.residuals.push(r_s.clone());
    }
    Ok(b.finish(TailKind::StagnationSum))
}

/// Scaffold for a curve that reaches exactly zero at its last cycle.
///
/// Cycle `q` takes `r_{q-1}` itself as the last Krylov direction, so the
/// cycle solves the system exactly. The vanished `r_q` is replaced in the
/// basis by a fresh unit vector from the complement.
pub fn build_scaffold_zerotail(
    curve: &ConvergenceCurve,
    schedule: &RestartSchedule,
    r0: &CVector,
    rng: &mut ConstructionRng,
) -> Result<KrylovScaffold> {
    if curve.variant() != CurveVariant::ZeroTail {
        return Err(Error::VariantMismatch {
            variant: "zero-tail".into(),
            curve: curve.variant().to_string(),
        });
    }
    check_schedule(curve, schedule, r0)?;
    let q = curve.q();
    let mut b = ScaffoldBuilder::new(curve, r0, rng)?;
    for k in 1..q {
        b.decreasing_cycle(schedule.cycles()[k - 1], curve.f(k - 1), curve.f(k))?;
    }

    let m = schedule.cycles()[q - 1];
    let f_prev = curve.f(q - 1);
    let mut wset = b.draw_leading(m - 1, f_prev)?;
    let r_prev = b.last_residual().clone();
    wset.push(r_prev.scale_real(1.0 / f_prev));
    b.wsets.push(wset);
    b.angles.push(0.0);
    b.cycle_blocks.push(m);
    b.residuals.push(CVector::zeros(b.n));
    let z = b.draw()?;
    b.sbar.push(z.scale_real(f_prev));
    Ok(b.finish(TailKind::Fresh))
}

/// How the last shaped block couples into the tail block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// `-alpha_0`
    Standard,
    /// `-alpha_0 / (1 + gamma)`
    Scaled(C64),
    /// No coupling; the residual vanished in the last cycle.
    Absent,
}

/// Block sizes of the operator in the constructed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLayout {
    pub n: usize,
    pub cycle_blocks: Vec<usize>,
    pub last_coupling: Coupling,
}

impl BlockLayout {
    /// Layout implied by a curve, schedule and variant, after checking that
    /// they fit together.
    pub fn for_problem(
        curve: &ConvergenceCurve,
        schedule: &RestartSchedule,
        variant: &VariantConfig,
    ) -> Result<Self> {
        if schedule.len() != curve.q() {
            return Err(Error::InvalidSchedule(format!(
                "schedule has {} cycles but the curve prescribes {}",
                schedule.len(),
                curve.q()
            )));
        }
        let mismatch = || Error::VariantMismatch {
            variant: variant.kind().to_string(),
            curve: curve.variant().to_string(),
        };
        let last_coupling = match (variant.kind(), curve.variant()) {
            (VariantKind::Standard, CurveVariant::Decreasing) => Coupling::Standard,
            (VariantKind::Standard, CurveVariant::ZeroTail) => Coupling::Absent,
            (VariantKind::Stagnation, CurveVariant::Stagnating { .. }) => Coupling::Standard,
            (VariantKind::NonConvergent, CurveVariant::Decreasing) => {
                Coupling::Scaled(variant.gamma())
            }
            _ => return Err(mismatch()),
        };
        Ok(BlockLayout {
            n: schedule.n(),
            cycle_blocks: schedule.cycles()[..curve.shaped_cycles()].to_vec(),
            last_coupling,
        })
    }

    /// Size `t + 1` of the final block: the tail vector plus `t` completion vectors.
    pub fn tail_block(&self) -> usize {
        self.n - self.cycle_blocks.iter().sum::<usize>()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = self.cycle_blocks.clone();
        sizes.push(self.tail_block());
        sizes
    }

    /// Starting column of every block, tail block included.
    pub fn offsets(&self) -> Vec<usize> {
        self.block_sizes()
            .iter()
            .scan(0, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect()
    }

    /// Entry linking the last column of cycle block `k` (0-based) to the
    /// leading row of block `k + 1`.
    pub fn coupling_entry(&self, k: usize, alpha0: C64) -> C64 {
        if k + 1 < self.cycle_blocks.len() {
            return -alpha0;
        }
        match self.last_coupling {
            Coupling::Standard => -alpha0,
            Coupling::Scaled(gamma) => -alpha0 / (ONE + gamma),
            Coupling::Absent => ZERO,
        }
    }

    /// Writes the block lower triangular operator for the given polynomials.
    pub fn operator_matrix(&self, polys: &[MonicPolynomial]) -> Result<CMatrix> {
        let sizes = self.block_sizes();
        if polys.len() != sizes.len() {
            return Err(Error::SizeMismatch(format!(
                "{} polynomials for {} blocks",
                polys.len(),
                sizes.len()
            )));
        }
        let mut op = CMatrix::zeros(self.n, self.n);
        let mut off = 0;
        for (k, (poly, &size)) in polys.iter().zip(&sizes).enumerate() {
            if poly.degree() != size {
                return Err(Error::SizeMismatch(format!(
                    "block {} has size {size} but its polynomial has degree {}",
                    k + 1,
                    poly.degree()
                )));
            }
            for i in 1..size {
                op[(off + i, off + i - 1)] = ONE;
            }
            let last = off + size - 1;
            for (j, &alpha) in poly.alphas().iter().enumerate() {
                op[(off + j, last)] = alpha;
            }
            if k < self.cycle_blocks.len() {
                op[(off + size, last)] = self.coupling_entry(k, poly.alpha(0));
            }
            off += size;
        }
        Ok(op)
    }
}

/// The operator in the constructed basis, together with that basis.
#[derive(Debug, Clone)]
pub struct OperatorAssembly {
    /// Columns: the independent set followed by the completion vectors.
    pub basis: CMatrix,
    pub op_in_basis: CMatrix,
    /// One polynomial per block, tail block last.
    pub polys: Vec<MonicPolynomial>,
    pub layout: BlockLayout,
    /// Number of completion vectors.
    pub t: usize,
}

/// Completes the scaffold to a basis and writes the operator in that basis.
///
/// The completion vectors are orthonormal directions scaled to the norm of
/// the tail vector that heads their block.
pub fn assemble_operator(
    scaffold: &KrylovScaffold,
    partition: &[Vec<C64>],
    variant: &VariantConfig,
    rng: &mut ConstructionRng,
) -> Result<OperatorAssembly> {
    let last_coupling = match scaffold.tail_kind {
        TailKind::Fresh => Coupling::Absent,
        TailKind::GammaShifted(gamma) => {
            if variant.kind() != VariantKind::NonConvergent || gamma != variant.gamma() {
                return Err(Error::VariantMismatch {
                    variant: variant.kind().to_string(),
                    curve: "gamma-shifted scaffold".into(),
                });
            }
            Coupling::Scaled(gamma)
        }
        TailKind::Residual | TailKind::StagnationSum => {
            if variant.kind() == VariantKind::NonConvergent {
                return Err(Error::VariantMismatch {
                    variant: variant.kind().to_string(),
                    curve: "unshifted scaffold".into(),
                });
            }
            Coupling::Standard
        }
    };
    if let Coupling::Scaled(gamma) = last_coupling {
        if (ONE + gamma).norm() <= 1e-14 * gamma.norm().max(1.0) {
            return Err(Error::GammaForbidden);
        }
    }
    let layout = BlockLayout {
        n: scaffold.dim(),
        cycle_blocks: scaffold.cycle_blocks.clone(),
        last_coupling,
    };
    let sizes = layout.block_sizes();
    let part_sizes: Vec<usize> = partition.iter().map(Vec::len).collect();
    if part_sizes != sizes {
        return Err(Error::SizeMismatch(format!(
            "eigenvalue groups of sizes {part_sizes:?} for blocks of sizes {sizes:?}"
        )));
    }
    let polys = partition
        .iter()
        .map(|roots| poly_from_roots(roots))
        .collect::<Result<Vec<_>>>()?;
    let op_in_basis = layout.operator_matrix(&polys)?;

    let t = scaffold.completion_size();
    let mut orthonormal = scaffold.orthonormal.clone();
    let mut columns = scaffold.sbar.clone();
    let scale = scaffold.tail.norm2();
    for _ in 0..t {
        let s_hat = random_unit_in_complement(layout.n, &orthonormal, rng)?;
        columns.push(s_hat.scale_real(scale));
        orthonormal.push(s_hat);
    }
    for ((&start, &size), poly) in layout.offsets().iter().zip(&sizes).zip(&polys) {
        let rho = poly.alpha(0).norm().powf(1.0 / size as f64);
        for j in 1..size {
            columns[start + j] = columns[start + j].scale_real(rho.powi(j as i32));
        }
    }
    let basis = CMatrix::from_columns(&columns)?;
    Ok(OperatorAssembly {
        basis,
        op_in_basis,
        polys,
        layout,
        t,
    })
}

/// `A = S [A]_S S^{-1}`, computed by solving `S^T A^T = (S [A]_S)^T`.
pub fn similarity_transform(assembly: &OperatorAssembly) -> Result<CMatrix> {
    let sb = matmul(&assembly.basis, &assembly.op_in_basis)?;
    let at = lu_solve(&assembly.basis.transpose(), &sb.transpose())?;
    Ok(at.transpose())
}

/// Everything needed to run one construction.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub schedule: RestartSchedule,
    pub curve: ConvergenceCurve,
    pub spectrum: SpectrumSpec,
    pub variant: VariantConfig,
    pub seed: u64,
    pub r0_mode: R0Mode,
}

impl ProblemSpec {
    pub fn n(&self) -> usize {
        self.schedule.n()
    }
}

/// A constructed linear system together with the certificate of how it was built.
#[derive(Debug, Clone)]
pub struct ConstructedProblem {
    pub a: CMatrix,
    pub b: CVector,
    pub x0: CVector,
    pub r0: CVector,
    pub assembly: OperatorAssembly,
    pub scaffold: KrylovScaffold,
    pub spec: ProblemSpec,
}

pub fn construct_problem(spec: &ProblemSpec) -> Result<ConstructedProblem> {
    let n = spec.n();
    if spec.spectrum.len() != n {
        return Err(Error::SizeMismatch(format!(
            "spectrum has {} eigenvalues for order {n}",
            spec.spectrum.len()
        )));
    }
    let layout = BlockLayout::for_problem(&spec.curve, &spec.schedule, &spec.variant)?;

    let mut rng = ConstructionRng::seed_from_u64(spec.seed);
    let f0 = spec.curve.f(0);
    let r0 = match spec.r0_mode {
        R0Mode::FirstCanonical => CVector::unit(n, 0).scale_real(f0),
        R0Mode::RandomUnit => random_unit_in_complement(n, &[], &mut rng)?.scale_real(f0),
    };

    let scaffold = match spec.curve.variant() {
        CurveVariant::Decreasing => {
            let mut s = build_scaffold(&spec.curve, &spec.schedule, &r0, &mut rng)?;
            if let Coupling::Scaled(gamma) = layout.last_coupling {
                s.shift_tail(gamma)?;
            }
            s
        }
        CurveVariant::Stagnating { .. } => {
            build_scaffold_stagnation(&spec.curve, &spec.schedule, &r0, &mut rng)?
        }
        CurveVariant::ZeroTail => {
            build_scaffold_zerotail(&spec.curve, &spec.schedule, &r0, &mut rng)?
        }
    };

    let partition = partition_spectrum(&spec.spectrum, &layout.cycle_blocks)?;
    let assembly = assemble_operator(&scaffold, &partition, &spec.variant, &mut rng)?;
    debug_assert_eq!(assembly.layout, layout);
    let a = similarity_transform(&assembly)?;
    Ok(ConstructedProblem {
        a,
        b: r0.clone(),
        x0: CVector::zeros(n),
        r0,
        assembly,
        scaffold,
        spec: spec.clone(),
    })
}
