//! Open-system evolution of the atom–cavity density operator under cavity
//! loss, `dρ/dt = -i[H, ρ] + κ(2aρa† - a†aρ - ρa†a)`.
//!
//! The density operator is kept dense. The Liouvillian is applied in
//! factored form, `L[ρ] = -i(Kρ - ρK†) + 2κ aρa†` with `K = H - iκ a†a`,
//! except for very small systems where the explicit vectorized
//! superoperator is cheaper and is used directly.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonians::{AtomicModel, InteractionModel, ModelSpec};
use crate::linalg::hermitian_eigenvalues;
use crate::operators::{
    photon_ops, photon_ops_on, photon_tail_projector, HilbertLayout, OperatorMatrix, C64,
};

/// Default refusal threshold on the vectorized dimension `dim²`.
pub const DEFAULT_SUPEROPERATOR_CAP: usize = 1 << 22;

/// Vectorized dimensions up to this size use the explicit dense superoperator.
pub const DENSE_SUPEROPERATOR_LIMIT: usize = 256;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;

/// Columns per parallel task; below this the kernel runs sequentially.
const PARALLEL_MIN_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Checks Hermiticity (1e-10) and unit trace (1e-8).
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "density operator must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let rho = Self { matrix };
        let herm = rho.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian { max_deviation: herm });
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "density operator trace is {tr}, expected 1"
            )));
        }
        Ok(rho)
    }

    /// `|ψ><ψ|` for a normalized state.
    pub fn pure(state: &DVector<C64>) -> Result<Self> {
        let norm = state.norm();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "pure state must be normalized, got norm {norm}"
            )));
        }
        Self::from_matrix(state * state.adjoint())
    }

    /// `|i><i|`
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `Re tr(O ρ)`
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<f64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.dim(),
            });
        }
        Ok(expect(op, &self.matrix))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)
            .first()
            .copied()
            .unwrap_or(0.0)
    }
}

fn expect(op: &OperatorMatrix, rho: &DMatrix<C64>) -> f64 {
    op.triplets().map(|(i, k, v)| (v * rho[(k, i)]).re).sum()
}

#[derive(Debug, Clone)]
struct Csr {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    fn from_operator(op: &OperatorMatrix) -> Self {
        let m = op.csr();
        Self {
            offsets: m.row_offsets().to_vec(),
            cols: m.col_indices().to_vec(),
            vals: m.values().to_vec(),
        }
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.offsets[r]..self.offsets[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// `out = A x`
    fn matvec(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiouvillianOptions {
    /// Largest accepted `dim²`.
    pub cap: usize,
    /// `dim²` up to which the explicit dense superoperator is used.
    pub dense_limit: usize,
}

impl Default for LiouvillianOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_SUPEROPERATOR_CAP,
            dense_limit: DENSE_SUPEROPERATOR_LIMIT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    kappa: f64,
    /// `H - iκ a†a`
    k: Csr,
    jump: Csr,
    k_op: OperatorMatrix,
    jump_op: OperatorMatrix,
    dense: Option<DMatrix<C64>>,
}

/// Liouvillian of `h` with photon loss on the cavity factor of `layout`.
pub fn build_liouvillian(
    h: &OperatorMatrix,
    kappa: f64,
    layout: &HilbertLayout,
    opts: &LiouvillianOptions,
) -> Result<Liouvillian> {
    let ops = photon_ops(layout)?;
    Liouvillian::with_jump(h, kappa, &ops.annihilate, opts)
}

impl Liouvillian {
    /// Liouvillian with an arbitrary jump operator `a` at rate `κ`.
    pub fn with_jump(
        h: &OperatorMatrix,
        kappa: f64,
        jump: &OperatorMatrix,
        opts: &LiouvillianOptions,
    ) -> Result<Self> {
        let d = h.dim();
        if jump.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: jump.dim(),
            });
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kappa must be finite and non-negative, got {kappa}"
            )));
        }
        let herm = h.hermiticity_error();
        if herm >= crate::operators::HERMITIAN_TOL {
            return Err(Error::NotHermitian { max_deviation: herm });
        }
        let sq = d.checked_mul(d).unwrap_or(usize::MAX);
        if sq > opts.cap {
            return Err(Error::SuperoperatorTooLarge { dim: sq, cap: opts.cap });
        }
        let loss = jump.adjoint().matmul(jump)?;
        let k_op = h.sub(&loss.scale_complex(C64::new(0.0, kappa)))?;
        let mut l = Self {
            dim: d,
            kappa,
            k: Csr::from_operator(&k_op),
            jump: Csr::from_operator(jump),
            k_op,
            jump_op: jump.clone(),
            dense: None,
        };
        if sq <= opts.dense_limit {
            l.dense = Some(l.sparse_superoperator().to_dense());
        }
        Ok(l)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    fn sparse_superoperator(&self) -> OperatorMatrix {
        let id = OperatorMatrix::identity(self.dim);
        let i = C64::new(0.0, 1.0);
        let coherent = id
            .kron(&self.k_op)
            .scale_complex(-i)
            .add(&self.k_op.conj().kron(&id).scale_complex(i))
            .expect("equal dimensions");
        let jump = self
            .jump_op
            .conj()
            .kron(&self.jump_op)
            .scale(2.0 * self.kappa);
        coherent.add(&jump).expect("equal dimensions")
    }

    /// Explicit superoperator on column-stacked `vec ρ`.
    pub fn superoperator(&self) -> OperatorMatrix {
        self.sparse_superoperator()
    }

    /// `L[ρ]`
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        let mut scratch = DMatrix::zeros(self.dim, self.dim);
        self.apply_into(rho, &mut out, &mut scratch);
        out
    }

    fn apply_into(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, scratch: &mut DMatrix<C64>) {
        let d = self.dim;
        if let Some(s) = &self.dense {
            let v = DVector::from_column_slice(rho.as_slice());
            let r = s * v;
            out.as_mut_slice().copy_from_slice(r.as_slice());
            return;
        }
        let src = rho.as_slice();
        // scratch = a ρ, column by column.
        let jump = &self.jump;
        let fill_x = |(j, col): (usize, &mut [C64])| jump.matvec(&src[j * d..(j + 1) * d], col);
        if d >= PARALLEL_MIN_DIM {
            scratch.as_mut_slice().par_chunks_mut(d).enumerate().for_each(fill_x);
        } else {
            scratch.as_mut_slice().chunks_mut(d).enumerate().for_each(fill_x);
        }
        let x = scratch.as_slice();
        let i = C64::new(0.0, 1.0);
        let two_kappa = 2.0 * self.kappa;
        let k = &self.k;
        let column = |(j, col): (usize, &mut [C64])| {
            k.matvec(&src[j * d..(j + 1) * d], col);
            for c in col.iter_mut() {
                *c *= -i;
            }
            for (kk, v) in k.row(j) {
                let w = i * v.conj();
                for (c, r) in col.iter_mut().zip(&src[kk * d..(kk + 1) * d]) {
                    *c += w * r;
                }
            }
            for (kk, v) in jump.row(j) {
                let w = v.conj() * two_kappa;
                for (c, r) in col.iter_mut().zip(&x[kk * d..(kk + 1) * d]) {
                    *c += w * r;
                }
            }
        };
        if d >= PARALLEL_MIN_DIM {
            out.as_mut_slice().par_chunks_mut(d).enumerate().for_each(column);
        } else {
            out.as_mut_slice().chunks_mut(d).enumerate().for_each(column);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub dt: f64,
    /// Recorded samples per decade of time after the first record.
    pub records_per_decade: usize,
    /// Stop once `max |L[ρ]|` drops below this.
    pub steady_tol: f64,
    /// Abort when a single step changes the trace by more than this.
    pub trace_abort: f64,
    /// Abort when the smallest eigenvalue of `ρ` falls below `-positivity_tol`.
    pub positivity_tol: f64,
    /// Positivity is checked at every record up to this dimension and at the end always.
    pub positivity_check_dim: usize,
    pub keep_final_state: bool,
}

impl EvolveOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self {
            t_final,
            dt,
            records_per_decade: 20,
            steady_tol: 1e-9,
            trace_abort: 1e-6,
            positivity_tol: 1e-8,
            positivity_check_dim: 256,
            keep_final_state: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// One series per requested observable, aligned with `times`.
    pub observables: Vec<Vec<f64>>,
    /// `|tr ρ - 1|` accumulated since the previous record, before renormalization.
    pub trace_error: Vec<f64>,
    pub max_trace_error: f64,
    pub final_state: Option<DensityOperator>,
    pub steady: bool,
    /// `max |L[ρ]|` at the final state.
    pub residual: f64,
    pub steps: usize,
}

impl EvolutionResult {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("at least one record")
    }

    pub fn final_value(&self, observable: usize) -> f64 {
        *self.observables[observable].last().expect("at least one record")
    }
}

/// `out = base + h k`
fn stage(out: &mut DMatrix<C64>, base: &DMatrix<C64>, h: f64, k: &DMatrix<C64>) {
    for ((o, b), d) in out.iter_mut().zip(base.iter()).zip(k.iter()) {
        *o = b + d * h;
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Fixed-step RK4 integration from `rho0`, with Hermitian symmetrization and
/// trace renormalization after every step.
pub fn evolve(
    rho0: &DensityOperator,
    l: &Liouvillian,
    observables: &[OperatorMatrix],
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    let d = l.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho0.dim(),
        });
    }
    if let Some(o) = observables.iter().find(|o| o.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: o.dim(),
        });
    }
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {}", opts.dt)));
    }
    if !(opts.t_final >= 0.0 && opts.t_final.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_final must be finite and non-negative, got {}",
            opts.t_final
        )));
    }
    let n_steps = (opts.t_final / opts.dt).ceil() as usize;
    let h = if n_steps == 0 { 0.0 } else { opts.t_final / n_steps as f64 };

    let mut rho = rho0.matrix().clone();
    let mut k1 = DMatrix::zeros(d, d);
    let mut k2 = DMatrix::zeros(d, d);
    let mut k3 = DMatrix::zeros(d, d);
    let mut k4 = DMatrix::zeros(d, d);
    let mut tmp = DMatrix::zeros(d, d);
    let mut scratch = DMatrix::zeros(d, d);

    let mut result = EvolutionResult {
        times: vec![0.0],
        observables: observables.iter().map(|o| vec![expect(o, &rho)]).collect(),
        trace_error: vec![(rho.trace().re - 1.0).abs()],
        max_trace_error: (rho.trace().re - 1.0).abs(),
        final_state: None,
        steady: false,
        residual: f64::INFINITY,
        steps: 0,
    };

    let first_record = (opts.t_final * 1e-4).max(h);
    let ratio = 10f64.powf(1.0 / opts.records_per_decade.max(1) as f64);
    let mut next_record = first_record;
    let mut drift_since_record = 0.0f64;

    let check_positivity = |rho: &DMatrix<C64>, t: f64| -> Result<()> {
        let min = hermitian_eigenvalues(rho)[0];
        if min < -opts.positivity_tol {
            return Err(Error::PositivityViolation {
                time: t,
                min_eigenvalue: min,
            });
        }
        Ok(())
    };

    let mut step = 0;
    loop {
        l.apply_into(&rho, &mut k1, &mut scratch);
        result.residual = max_abs(&k1);
        let t = step as f64 * h;
        if result.residual < opts.steady_tol {
            result.steady = true;
        }
        if step == n_steps || result.steady {
            if t > *result.times.last().unwrap() {
                result.times.push(t);
                for (series, o) in result.observables.iter_mut().zip(observables) {
                    series.push(expect(o, &rho));
                }
                result.trace_error.push(drift_since_record);
            }
            break;
        }

        stage(&mut tmp, &rho, 0.5 * h, &k1);
        l.apply_into(&tmp, &mut k2, &mut scratch);
        stage(&mut tmp, &rho, 0.5 * h, &k2);
        l.apply_into(&tmp, &mut k3, &mut scratch);
        stage(&mut tmp, &rho, h, &k3);
        l.apply_into(&tmp, &mut k4, &mut scratch);
        let w = h / 6.0;
        for ((((r, a), b), c), e) in rho
            .iter_mut()
            .zip(k1.iter())
            .zip(k2.iter())
            .zip(k3.iter())
            .zip(k4.iter())
        {
            *r += (a + (b + c) * 2.0 + e) * w;
        }
        step += 1;

        for j in 0..d {
            for i in 0..j {
                let s = (rho[(i, j)] + rho[(j, i)].conj()) * 0.5;
                rho[(i, j)] = s;
                rho[(j, i)] = s.conj();
            }
            rho[(j, j)].im = 0.0;
        }
        let tr = rho.trace().re;
        let drift = (tr - 1.0).abs();
        let t = step as f64 * h;
        if drift > opts.trace_abort {
            return Err(Error::TraceDrift { time: t, drift });
        }
        drift_since_record = drift_since_record.max(drift);
        result.max_trace_error = result.max_trace_error.max(drift);
        rho.scale_mut(1.0 / tr);
        result.steps = step;

        if t >= next_record && step < n_steps {
            result.times.push(t);
            for (series, o) in result.observables.iter_mut().zip(observables) {
                series.push(expect(o, &rho));
            }
            result.trace_error.push(drift_since_record);
            drift_since_record = 0.0;
            while next_record <= t {
                next_record *= ratio;
            }
            if d <= opts.positivity_check_dim {
                check_positivity(&rho, t)?;
            }
        }
    }
    let t_end = *result.times.last().unwrap();
    check_positivity(&rho, t_end)?;
    if opts.keep_final_state {
        result.final_state = Some(DensityOperator { matrix: rho });
    }
    Ok(result)
}

/// `0.01 / max(ω_c, ω_a, |V| N, κ)`
pub fn default_time_step(spec: &ModelSpec) -> f64 {
    let v = match spec.interaction {
        InteractionModel::ConstantDipole { v_dd } => v_dd.abs(),
        other => other.energy_scale(),
    };
    let scale = spec
        .omega_c
        .max(spec.omega_a)
        .max(v * spec.n_atoms as f64)
        .max(spec.kappa);
    0.01 / scale
}

/// Smallest nonzero spacing of the atomic spectrum, if any.
pub fn minimum_gap(model: &AtomicModel) -> Option<f64> {
    let e = hermitian_eigenvalues(&model.h_atom.to_dense());
    let span = e.last().unwrap_or(&0.0) - e.first().unwrap_or(&0.0);
    let floor = 1e-9 * (1.0 + span.abs());
    e.windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > floor)
        .min_by(f64::total_cmp)
}

/// `max(50/κ, 20/Δ_min)`, capped at `max_time`.
pub fn default_horizon(model: &AtomicModel, kappa: f64, max_time: f64) -> f64 {
    let decay = if kappa > 0.0 { 50.0 / kappa } else { f64::INFINITY };
    let gap = minimum_gap(model).map_or(0.0, |g| 20.0 / g);
    decay.max(gap).min(max_time)
}

/// Atomic basis used for the full-quantum runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum QuantumBasis {
    /// Full `2^N` atomic space.
    Full,
    /// Symmetric states `|ψ_0>..|ψ_N>` (constant dipole interaction only).
    Symmetric,
}

impl QuantumBasis {
    pub fn atomic_model(&self, spec: &ModelSpec) -> Result<AtomicModel> {
        match self {
            QuantumBasis::Full => AtomicModel::full(spec),
            QuantumBasis::Symmetric => AtomicModel::symmetric(spec, spec.n_atoms),
        }
    }

    /// Index of `|ss...s>` in the atomic factor.
    pub fn all_ground_index(&self, n_atoms: usize) -> usize {
        match self {
            QuantumBasis::Full => (1 << n_atoms) - 1,
            QuantumBasis::Symmetric => 0,
        }
    }
}

/// Atom–cavity operators for one photon cutoff.
#[derive(Debug, Clone)]
pub struct CavitySystem {
    pub hamiltonian: OperatorMatrix,
    pub annihilate: OperatorMatrix,
    pub number: OperatorMatrix,
    pub sx: OperatorMatrix,
    pub tail: OperatorMatrix,
    pub atomic_dim: usize,
    pub cutoff: usize,
}

impl CavitySystem {
    pub fn new(model: &AtomicModel, omega_c: f64, coupling: f64, cutoff: usize) -> Result<Self> {
        let ops = photon_ops_on(model.dim(), cutoff)?;
        Ok(Self {
            hamiltonian: model.with_cavity(omega_c, coupling, cutoff)?,
            annihilate: ops.annihilate,
            number: ops.number,
            sx: model.sx.kron(&OperatorMatrix::identity(cutoff + 1)),
            tail: photon_tail_projector(model.dim(), cutoff),
            atomic_dim: model.dim(),
            cutoff,
        })
    }

    pub fn dim(&self) -> usize {
        self.atomic_dim * (self.cutoff + 1)
    }

    /// Atomic basis state `atomic` with an empty cavity.
    pub fn vacuum_state(&self, atomic: usize) -> Result<DensityOperator> {
        if atomic >= self.atomic_dim {
            return Err(Error::InvalidArgument(format!(
                "atomic index {atomic} outside dimension {}",
                self.atomic_dim
            )));
        }
        DensityOperator::basis(self.dim(), atomic * (self.cutoff + 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullQuantumOptions {
    /// Evolution time; `None` uses [`default_horizon`].
    pub t_final: Option<f64>,
    /// Upper bound on the default horizon.
    pub max_time: f64,
    /// Time step; `None` uses [`default_time_step`].
    pub dt: Option<f64>,
    pub steady_tol: f64,
    pub records_per_decade: usize,
    pub liouvillian: LiouvillianOptions,
}

impl Default for FullQuantumOptions {
    fn default() -> Self {
        Self {
            t_final: None,
            max_time: 2000.0,
            dt: None,
            steady_tol: 1e-9,
            records_per_decade: 20,
            liouvillian: LiouvillianOptions::default(),
        }
    }
}

/// Long-time observables of one full-quantum run started from `|ss...s>|0>`.
#[derive(Debug, Clone)]
pub struct LongTimeResult {
    pub cutoff: usize,
    pub photon_number: f64,
    pub sx: f64,
    pub tail_population: f64,
    pub steady: bool,
    pub residual: f64,
    pub final_time: f64,
    pub max_trace_error: f64,
    /// Series order: `<a†a>`, `<S^x>`, tail population.
    pub evolution: EvolutionResult,
}

pub fn long_time_state(
    spec: &ModelSpec,
    basis: QuantumBasis,
    cutoff: usize,
    opts: &FullQuantumOptions,
) -> Result<LongTimeResult> {
    spec.validate()?;
    let model = basis.atomic_model(spec)?;
    let t_final = opts
        .t_final
        .unwrap_or_else(|| default_horizon(&model, spec.kappa, opts.max_time));
    run_from_model(&model, spec, basis.all_ground_index(spec.n_atoms), cutoff, t_final, opts)
}

fn run_from_model(
    model: &AtomicModel,
    spec: &ModelSpec,
    initial_atomic: usize,
    cutoff: usize,
    t_final: f64,
    opts: &FullQuantumOptions,
) -> Result<LongTimeResult> {
    let sys = CavitySystem::new(model, spec.omega_c, spec.coupling, cutoff)?;
    let l = Liouvillian::with_jump(&sys.hamiltonian, spec.kappa, &sys.annihilate, &opts.liouvillian)?;
    let rho0 = sys.vacuum_state(initial_atomic)?;
    let mut eo = EvolveOptions::new(t_final, opts.dt.unwrap_or_else(|| default_time_step(spec)));
    eo.steady_tol = opts.steady_tol;
    eo.records_per_decade = opts.records_per_decade;
    eo.keep_final_state = false;
    let evolution = evolve(&rho0, &l, &[sys.number.clone(), sys.sx.clone(), sys.tail.clone()], &eo)?;
    Ok(LongTimeResult {
        cutoff,
        photon_number: evolution.final_value(0),
        sx: evolution.final_value(1),
        tail_population: evolution.final_value(2),
        steady: evolution.steady,
        residual: evolution.residual,
        final_time: evolution.final_time(),
        max_trace_error: evolution.max_trace_error,
        evolution,
    })
}

/// Relative tolerance between consecutive cutoffs.
pub const CUTOFF_REL_TOL: f64 = 0.01;
/// Photon numbers closer than this are treated as equal.
pub const CUTOFF_ABS_FLOOR: f64 = 1e-10;
/// Largest accepted population of the highest Fock state.
pub const CUTOFF_TAIL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CutoffStudy {
    pub chosen: usize,
    pub cutoffs: Vec<usize>,
    pub photon_numbers: Vec<f64>,
    pub tail_populations: Vec<f64>,
    /// Run at the chosen cutoff.
    pub result: LongTimeResult,
}

/// Smallest cutoff in `cutoffs` whose long-time photon number differs from
/// the next one by less than 1 % and whose top Fock level holds less than
/// `1e-6` population.
pub fn photon_cutoff_convergence(
    spec: &ModelSpec,
    basis: QuantumBasis,
    cutoffs: &[usize],
    opts: &FullQuantumOptions,
) -> Result<CutoffStudy> {
    if cutoffs.len() < 2 {
        return Err(Error::InvalidArgument(
            "cutoff convergence needs at least two cutoffs".into(),
        ));
    }
    if cutoffs[0] == 0 || cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "cutoffs must be positive and strictly increasing, got {cutoffs:?}"
        )));
    }
    spec.validate()?;
    let model = basis.atomic_model(spec)?;
    let t_final = opts
        .t_final
        .unwrap_or_else(|| default_horizon(&model, spec.kappa, opts.max_time));
    let start = basis.all_ground_index(spec.n_atoms);

    let mut runs: Vec<LongTimeResult> = Vec::new();
    for &m in cutoffs {
        let run = run_from_model(&model, spec, start, m, t_final, opts)?;
        runs.push(run);
        let k = runs.len();
        if k >= 2 {
            let (prev, cur) = (&runs[k - 2], &runs[k - 1]);
            let diff = (prev.photon_number - cur.photon_number).abs();
            let ok = diff <= (CUTOFF_REL_TOL * cur.photon_number.abs()).max(CUTOFF_ABS_FLOOR)
                && prev.tail_population < CUTOFF_TAIL_TOL;
            if ok {
                let photon_numbers = runs.iter().map(|r| r.photon_number).collect();
                let tail_populations = runs.iter().map(|r| r.tail_population).collect();
                let chosen = runs.swap_remove(k - 2);
                return Ok(CutoffStudy {
                    chosen: chosen.cutoff,
                    cutoffs: cutoffs[..k].to_vec(),
                    photon_numbers,
                    tail_populations,
                    result: chosen,
                });
            }
        }
    }
    Err(Error::CutoffNotConverged {
        tried: cutoffs.to_vec(),
        photon_numbers: runs.iter().map(|r| r.photon_number).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_h_full, InteractionModel};

    fn random_hermitian(d: usize, seed: u64) -> DMatrix<C64> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(d, d, |_, _| C64::new(next(), next()));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    fn small_system(coupling: f64, kappa: f64) -> (OperatorMatrix, HilbertLayout) {
        let spec = ModelSpec::reference(InteractionModel::ConstantDipole { v_dd: -0.3 })
            .with_atoms(2)
            .with_coupling(coupling)
            .with_kappa(kappa);
        let layout = HilbertLayout::new(2, 3).unwrap();
        (build_h_full(&spec, &layout).unwrap(), layout)
    }

    #[test]
    fn closed_limit_is_commutator() {
        let (h, layout) = small_system(0.3, 0.0);
        let l = build_liouvillian(&h, 0.0, &layout, &LiouvillianOptions::default()).unwrap();
        let rho = random_hermitian(h.dim(), 7);
        let hd = h.to_dense();
        let expected = (&hd * &rho - &rho * &hd) * C64::new(0.0, -1.0);
        assert!(max_abs(&(l.apply(&rho) - expected)) < 1e-12);
    }

    #[test]
    fn factored_and_explicit_forms_agree() {
        let (h, layout) = small_system(0.2, 0.25);
        let factored_opts = LiouvillianOptions {
            dense_limit: 0,
            ..Default::default()
        };
        let factored = build_liouvillian(&h, 0.25, &layout, &factored_opts).unwrap();
        assert!(!factored.is_dense());
        let dense_opts = LiouvillianOptions {
            dense_limit: usize::MAX,
            ..Default::default()
        };
        let dense = build_liouvillian(&h, 0.25, &layout, &dense_opts).unwrap();
        assert!(dense.is_dense());
        let rho = random_hermitian(h.dim(), 3);
        assert!(max_abs(&(factored.apply(&rho) - dense.apply(&rho))) < 1e-12);
    }

    #[test]
    fn trace_is_annihilated() {
        let (h, layout) = small_system(0.4, 0.5);
        let l = build_liouvillian(&h, 0.5, &layout, &LiouvillianOptions::default()).unwrap();
        for seed in 0..100 {
            let rho = random_hermitian(h.dim(), seed);
            assert!(l.apply(&rho).trace().norm() < 1e-12);
        }
        // 1ᵀ L = 0 on the vectorized form: rows of the identity's vec.
        let d = h.dim();
        let s = l.superoperator();
        let mut col_sums = vec![C64::new(0.0, 0.0); d * d];
        for (r, c, v) in s.triplets() {
            if r % d == r / d {
                col_sums[c] += v;
            }
        }
        assert!(col_sums.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn cap_guard_refuses() {
        let (h, layout) = small_system(0.1, 0.25);
        let opts = LiouvillianOptions {
            cap: 100,
            ..Default::default()
        };
        let err = build_liouvillian(&h, 0.25, &layout, &opts).unwrap_err();
        assert!(matches!(err, Error::SuperoperatorTooLarge { cap: 100, .. }));
    }

    #[test]
    fn rejects_bad_inputs() {
        let (h, layout) = small_system(0.1, 0.25);
        let opts = LiouvillianOptions::default();
        assert!(build_liouvillian(&h, -1.0, &layout, &opts).is_err());
        let wrong = HilbertLayout::new(2, 0).unwrap();
        assert!(matches!(
            build_liouvillian(&h, 0.25, &wrong, &opts),
            Err(Error::PhotonCutoffRequired)
        ));
        let l = build_liouvillian(&h, 0.25, &layout, &opts).unwrap();
        let rho = DensityOperator::basis(h.dim(), 0).unwrap();
        let mut eo = EvolveOptions::new(1.0, 0.0);
        assert!(evolve(&rho, &l, &[], &eo).is_err());
        eo.dt = 0.01;
        let small = DensityOperator::basis(3, 0).unwrap();
        assert!(evolve(&small, &l, &[], &eo).is_err());
        assert!(DensityOperator::from_matrix(DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn zero_time_returns_initial_observables() {
        let (h, layout) = small_system(0.1, 0.25);
        let l = build_liouvillian(&h, 0.25, &layout, &LiouvillianOptions::default()).unwrap();
        let ops = photon_ops(&layout).unwrap();
        let rho = DensityOperator::basis(h.dim(), 2).unwrap();
        let r = evolve(&rho, &l, &[ops.number], &EvolveOptions::new(0.0, 0.01)).unwrap();
        assert_eq!(r.times, vec![0.0]);
        assert_eq!(r.observables[0], vec![2.0]);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn photon_decay_matches_exponential() {
        let spec = ModelSpec::reference(InteractionModel::none()).with_atoms(2).with_coupling(0.0);
        let layout = HilbertLayout::new(2, 6).unwrap();
        let h = build_h_full(&spec, &layout).unwrap();
        let l = build_liouvillian(&h, spec.kappa, &layout, &LiouvillianOptions::default()).unwrap();
        let ops = photon_ops(&layout).unwrap();
        let n0 = 4;
        let rho = DensityOperator::basis(h.dim(), layout.index(layout.all_ground_atomic_index(), n0)).unwrap();
        let mut eo = EvolveOptions::new(8.0, 0.005);
        eo.steady_tol = 0.0;
        let r = evolve(&rho, &l, &[ops.number], &eo).unwrap();
        for (t, n) in r.times.iter().zip(&r.observables[0]) {
            let exact = n0 as f64 * (-2.0 * spec.kappa * t).exp();
            assert!((n - exact).abs() < 1e-9, "t = {t}: {n} vs {exact}");
        }
        assert!(r.times.windows(2).all(|w| w[1] > w[0]));
        assert!(r.max_trace_error < 1e-8);
    }

    #[test]
    fn closed_evolution_conserves_atomic_populations() {
        let spec = ModelSpec::reference(InteractionModel::ConstantDipole { v_dd: -0.4 })
            .with_atoms(3)
            .with_coupling(0.0)
            .with_kappa(0.0);
        let layout = HilbertLayout::new(3, 1).unwrap();
        let h = build_h_full(&spec, &layout).unwrap();
        let l = build_liouvillian(&h, 0.0, &layout, &LiouvillianOptions::default()).unwrap();
        // Superposition of atomic configurations, vacuum cavity.
        let mut psi = DVector::zeros(h.dim());
        for (k, a) in [0usize, 3, 5, 6].iter().enumerate() {
            psi[layout.index(*a, 0)] = C64::new(0.5, 0.1 * k as f64);
        }
        let psi = psi.normalize();
        let rho = DensityOperator::pure(&psi).unwrap();
        let (_, vecs) = crate::linalg::eigh_sorted(h.to_dense());
        let projectors: Vec<OperatorMatrix> = (0..h.dim())
            .map(|c| {
                let v = vecs.column(c).into_owned();
                OperatorMatrix::from_dense(&(&v * v.adjoint())).unwrap()
            })
            .collect();
        let mut eo = EvolveOptions::new(20.0, 0.005);
        eo.steady_tol = 0.0;
        let r = evolve(&rho, &l, &projectors, &eo).unwrap();
        for series in &r.observables {
            let first = series[0];
            assert!(series.iter().all(|p| (p - first).abs() < 1e-8));
        }
    }

    #[test]
    fn vacuum_ground_state_is_steady() {
        let spec = ModelSpec::reference(InteractionModel::none()).with_atoms(2).with_coupling(0.0);
        let r = long_time_state(&spec, QuantumBasis::Full, 1, &FullQuantumOptions::default()).unwrap();
        assert!(r.steady);
        assert_eq!(r.photon_number, 0.0);
        assert_eq!(r.evolution.steps, 0);
    }

    #[test]
    fn symmetric_and_full_bases_agree() {
        let spec = ModelSpec::reference(InteractionModel::ConstantDipole { v_dd: -0.25 })
            .with_atoms(3)
            .with_coupling(0.3);
        let opts = FullQuantumOptions {
            t_final: Some(6.0),
            ..Default::default()
        };
        let full = long_time_state(&spec, QuantumBasis::Full, 4, &opts).unwrap();
        let sym = long_time_state(&spec, QuantumBasis::Symmetric, 4, &opts).unwrap();
        assert!((full.photon_number - sym.photon_number).abs() < 1e-10);
        assert!((full.sx - sym.sx).abs() < 1e-10);
        assert!(full.photon_number > 1e-3);
        assert!(full.max_trace_error < 1e-8);
    }

    #[test]
    fn cutoff_study_accepts_one_photon_without_coupling() {
        let spec = ModelSpec::reference(InteractionModel::ConstantDipole { v_dd: -0.2 }).with_coupling(0.0);
        let study =
            photon_cutoff_convergence(&spec, QuantumBasis::Symmetric, &[1, 2, 4], &FullQuantumOptions::default())
                .unwrap();
        assert_eq!(study.chosen, 1);
        assert_eq!(study.photon_numbers, vec![0.0, 0.0]);
    }

    #[test]
    fn cutoff_study_validates_list() {
        let spec = ModelSpec::reference(InteractionModel::none());
        let opts = FullQuantumOptions::default();
        assert!(photon_cutoff_convergence(&spec, QuantumBasis::Symmetric, &[2], &opts).is_err());
        assert!(photon_cutoff_convergence(&spec, QuantumBasis::Symmetric, &[3, 2], &opts).is_err());
        assert!(photon_cutoff_convergence(&spec, QuantumBasis::Symmetric, &[0, 2], &opts).is_err());
    }

    #[test]
    fn cutoff_study_reports_failure_trend() {
        let spec = ModelSpec::reference(InteractionModel::ConstantDipole { v_dd: -1.0 / 3.0 })
            .with_coupling(0.3);
        let opts = FullQuantumOptions {
            t_final: Some(5.0),
            ..Default::default()
        };
        match photon_cutoff_convergence(&spec, QuantumBasis::Symmetric, &[1, 2], &opts) {
            Err(Error::CutoffNotConverged { tried, photon_numbers }) => {
                assert_eq!(tried, vec![1, 2]);
                assert_eq!(photon_numbers.len(), 2);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn default_step_and_horizon() {
        let spec = ModelSpec::reference(InteractionModel::ConstantDipole { v_dd: -1.0 / 3.0 });
        assert!((default_time_step(&spec) - 0.005).abs() < 1e-15);
        let model = AtomicModel::symmetric(&spec, spec.n_atoms).unwrap();
        // Gaps of the symmetric spectrum at -1/3: smallest nonzero is 2/3.
        assert!((minimum_gap(&model).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert_eq!(default_horizon(&model, 0.25, 1e4), 200.0);
        assert_eq!(default_horizon(&model, 0.0, 1e3), 1e3);
    }
}
