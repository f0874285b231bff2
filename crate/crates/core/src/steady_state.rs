//! Self-consistent mean-field steady states.
//!
//! The cavity is replaced by its amplitude `α`, which in the stationary
//! state satisfies `α = -i 2 sqrt(2/N) G / (i ω_c + κ) · <S^x>`. The atomic
//! state is the lowest eigenvector of the mean-field Hamiltonian at the
//! current `α`; the two are iterated with linear mixing until `α` stops
//! moving. Critical couplings are bracketed by bisection on the photon
//! number per atom.

use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::collective::RabiParams;
use crate::error::{Error, Result};
use crate::hamiltonians::{AtomicModel, ModelSpec};
use crate::linalg::eigh_sorted;
use crate::operators::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Acceleration {
    None,
    /// Aitken Δ² extrapolation on every third mixed iterate.
    Aitken,
    /// Bracketed secant steps on `<S^x>` along the stationary line `α = c <S^x>`,
    /// falling back to damped or halving steps when the secant leaves the bracket.
    Secant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Convergence threshold on `|α_out - α_in|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new amplitude in the linear mixing step.
    pub damping: f64,
    /// Seed `α_0 = seed_scale * sqrt(N)` (real).
    pub seed_scale: f64,
    pub acceleration: Acceleration,
    /// Relative gap under which the lowest eigenvalues count as degenerate.
    pub degeneracy_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
            damping: 0.5,
            seed_scale: 0.1,
            acceleration: Acceleration::Secant,
            degeneracy_tol: 1e-10,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument("damping must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
enum DenseSystem {
    Real { h: DMatrix<f64>, sx: DMatrix<f64> },
    Complex { h: DMatrix<C64>, sx: DMatrix<C64> },
}

/// Atomic model plus cavity parameters for the mean-field fixed point.
#[derive(Debug, Clone)]
pub struct MeanFieldProblem {
    model: Arc<AtomicModel>,
    dense: Arc<DenseSystem>,
    sx_radius: f64,
    pub omega_c: f64,
    pub kappa: f64,
    pub coupling: f64,
}

impl MeanFieldProblem {
    pub fn new(model: AtomicModel, omega_c: f64, kappa: f64, coupling: f64) -> Result<Self> {
        if !(omega_c > 0.0) {
            return Err(Error::InvalidSpec(format!("omega_c must be positive, got {omega_c}")));
        }
        if !(kappa >= 0.0) || !(coupling >= 0.0) {
            return Err(Error::InvalidSpec("kappa and coupling must be non-negative".into()));
        }
        let dense = if model.h_atom.is_real() && model.sx.is_real() {
            DenseSystem::Real {
                h: model.h_atom.to_dense_real(),
                sx: model.sx.to_dense_real(),
            }
        } else {
            DenseSystem::Complex {
                h: model.h_atom.to_dense(),
                sx: model.sx.to_dense(),
            }
        };
        let sx_radius = crate::linalg::hermitian_eigenvalues(&model.sx.to_dense())
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            model: Arc::new(model),
            dense: Arc::new(dense),
            sx_radius,
            omega_c,
            kappa,
            coupling,
        })
    }

    /// Full `2^N` atomic space.
    pub fn full(spec: &ModelSpec) -> Result<Self> {
        Self::new(AtomicModel::full(spec)?, spec.omega_c, spec.kappa, spec.coupling)
    }

    /// Symmetric-state subspace truncated at `n_c` excitations.
    pub fn symmetric(spec: &ModelSpec, n_c: usize) -> Result<Self> {
        Self::new(AtomicModel::symmetric(spec, n_c)?, spec.omega_c, spec.kappa, spec.coupling)
    }

    /// Two-level Rabi reduction.
    pub fn rabi(params: &RabiParams, spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        Self::new(AtomicModel::rabi(params, spec.n_atoms)?, spec.omega_c, spec.kappa, spec.coupling)
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self {
            coupling,
            ..self.clone()
        }
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self {
            kappa,
            ..self.clone()
        }
    }

    pub fn model(&self) -> &AtomicModel {
        &self.model
    }

    pub fn n_atoms(&self) -> usize {
        self.model.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    fn g_factor(&self) -> f64 {
        2.0 * (2.0 / self.n_atoms() as f64).sqrt() * self.coupling
    }

    /// `α / <S^x>` at stationarity: `-i 2 sqrt(2/N) G / (i ω_c + κ)`.
    pub fn alpha_per_sx(&self) -> C64 {
        C64::new(0.0, -self.g_factor()) / C64::new(self.kappa, self.omega_c)
    }

    /// Coefficient of `S^x` in the mean-field Hamiltonian at amplitude `α`.
    pub fn field(&self, alpha: C64) -> f64 {
        self.g_factor() * 2.0 * alpha.re
    }

    /// Lowest eigenvector of `H_atom + field(α) S^x`, with degenerate ground
    /// states resolved toward the largest `|<S^x>|` on the side that keeps
    /// the sign of `Re α`.
    pub fn ground_state(&self, alpha: C64, degeneracy_tol: f64) -> GroundState {
        let prefer = if alpha.re > 0.0 { -1.0 } else if alpha.re < 0.0 { 1.0 } else { -1.0 };
        self.ground_with(alpha, prefer, degeneracy_tol)
    }

    /// Ground state at `α = 0` without a symmetry-breaking tie-break; a
    /// degenerate doublet is resolved to a state with `<S^x> = 0`.
    pub fn normal_ground_state(&self, degeneracy_tol: f64) -> GroundState {
        self.ground_with(C64::new(0.0, 0.0), 0.0, degeneracy_tol)
    }

    fn ground_with(&self, alpha: C64, prefer: f64, degeneracy_tol: f64) -> GroundState {
        let field = self.field(alpha);
        match &*self.dense {
            DenseSystem::Real { h, sx } => ground_generic(h, sx, field, prefer, degeneracy_tol),
            DenseSystem::Complex { h, sx } => ground_generic(h, sx, field, prefer, degeneracy_tol),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub vector: DVector<C64>,
    pub energy: f64,
    pub sx: f64,
    pub degenerate: bool,
}

fn ground_generic<T>(h: &DMatrix<T>, sx: &DMatrix<T>, field: f64, prefer: f64, deg_tol: f64) -> GroundState
where
    T: ComplexField<RealField = f64> + Copy,
{
    let m = h + sx * T::from_real(field);
    let (vals, vecs) = eigh_sorted(m);
    let scale = vals[0].abs().max(1.0);
    let d = vals.iter().take_while(|&&e| e - vals[0] <= deg_tol * scale).count();
    let to_c64 = |v: DVector<T>| -> DVector<C64> {
        v.map(|z| C64::new(z.clone().real(), z.imaginary()))
    };
    let expect = |v: &DVector<T>| -> f64 { (v.adjoint() * sx * v)[(0, 0)].clone().real() };

    if d <= 1 {
        let v: DVector<T> = vecs.column(0).into_owned();
        let s = expect(&v);
        return GroundState {
            vector: to_c64(v),
            energy: vals[0],
            sx: s,
            degenerate: false,
        };
    }
    // Diagonalize S^x inside the degenerate ground subspace.
    let basis = vecs.columns(0, d).into_owned();
    let proj = basis.adjoint() * sx * &basis;
    let (pv, pvecs) = eigh_sorted(proj);
    let v: DVector<T> = if prefer == 0.0 {
        // Unbiased: equal mix of the extremal S^x states, <S^x> = 0 by symmetry.
        let mix = (pvecs.column(0) + pvecs.column(d - 1)) * T::from_real(0.5f64.sqrt());
        &basis * mix
    } else {
        let pick = (0..d)
            .max_by(|&a, &b| (prefer * pv[a]).total_cmp(&(prefer * pv[b])))
            .unwrap_or(0);
        &basis * pvecs.column(pick)
    };
    let s = expect(&v);
    GroundState {
        vector: to_c64(v),
        energy: vals[0],
        sx: s,
        degenerate: true,
    }
}

#[derive(Debug, Clone)]
pub struct MeanFieldSolution {
    pub alpha: C64,
    /// `|α|²`
    pub photon_number: f64,
    /// `<S^x>` in the returned atomic state.
    pub sx: f64,
    pub atomic_state: DVector<C64>,
    pub iterations: usize,
    pub converged: bool,
    /// `|α_out - α_in|` at the last iteration.
    pub residual: f64,
    /// The ground state was degenerate at the solution and the tie-break applied.
    pub degenerate_ground: bool,
}

impl MeanFieldSolution {
    pub fn photons_per_atom(&self, n_atoms: usize) -> f64 {
        self.photon_number / n_atoms as f64
    }
}

fn aitken(x0: C64, x1: C64, x2: C64) -> Option<C64> {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let denom = d2 - d1;
    if denom.norm() <= 1e-300 || d2.norm() == 0.0 {
        return None;
    }
    let x = x2 - d2 * d2 / denom;
    x.is_finite().then_some(x)
}

/// Damped fixed-point iteration for the stationary cavity amplitude.
pub fn solve_meanfield(problem: &MeanFieldProblem, opts: &SolverOptions) -> Result<MeanFieldSolution> {
    let seed = C64::new(opts.seed_scale * (problem.n_atoms() as f64).sqrt(), 0.0);
    solve_meanfield_from(problem, seed, opts)
}

pub fn solve_meanfield_from(
    problem: &MeanFieldProblem,
    seed: C64,
    opts: &SolverOptions,
) -> Result<MeanFieldSolution> {
    opts.validate()?;
    let c = problem.alpha_per_sx();

    if problem.coupling == 0.0 {
        let gs = problem.normal_ground_state(opts.degeneracy_tol);
        return Ok(MeanFieldSolution {
            alpha: C64::new(0.0, 0.0),
            photon_number: 0.0,
            sx: gs.sx,
            atomic_state: gs.vector,
            iterations: 1,
            converged: true,
            residual: 0.0,
            degenerate_ground: gs.degenerate,
        });
    }

    if opts.acceleration == Acceleration::Secant {
        return solve_secant(problem, seed, opts);
    }

    let bound = c.norm() * problem.sx_radius * (1.0 + 1e-9);
    let mut alpha = seed;
    let mut history: Vec<C64> = Vec::with_capacity(3);
    let mut last = None;
    for it in 1..=opts.max_iter {
        let gs = problem.ground_state(alpha, opts.degeneracy_tol);
        let out = c * gs.sx;
        let residual = (out - alpha).norm();
        if residual < opts.tol {
            return Ok(finish(problem, alpha, gs, it, residual, opts));
        }
        let mut next = alpha + (out - alpha) * opts.damping;
        if opts.acceleration == Acceleration::Aitken {
            history.push(next);
            if history.len() == 3 {
                if let Some(x) = aitken(history[0], history[1], history[2]) {
                    if x.norm() <= bound {
                        next = x;
                    }
                }
                history.clear();
            }
        }
        last = Some((alpha, gs, residual));
        alpha = next;
    }
    let (alpha, gs, residual) = last.expect("max_iter >= 1");
    Ok(MeanFieldSolution {
        alpha,
        photon_number: alpha.norm_sqr(),
        sx: gs.sx,
        atomic_state: gs.vector,
        iterations: opts.max_iter,
        converged: false,
        residual,
        degenerate_ground: gs.degenerate,
    })
}

fn solve_secant(problem: &MeanFieldProblem, seed: C64, opts: &SolverOptions) -> Result<MeanFieldSolution> {
    let c = problem.alpha_per_sx();
    let cn = c.norm();
    let gs = problem.ground_state(seed, opts.degeneracy_tol);
    let residual = (c * gs.sx - seed).norm();
    if residual < opts.tol {
        return Ok(finish(problem, seed, gs, 1, residual, opts));
    }
    // Work with u = sign * <S^x> >= 0 on the branch selected by the seed.
    let sign = if gs.sx < 0.0 { -1.0 } else { 1.0 };
    let mut u = gs.sx.abs();
    let floor = opts.tol / cn;
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut prev: Option<(f64, f64)> = None;
    let mut last = (seed, gs, residual);
    for it in 2..=opts.max_iter {
        let alpha = c * (sign * u);
        let gs = problem.ground_state(alpha, opts.degeneracy_tol);
        let f = sign * gs.sx - u;
        let residual = cn * f.abs();
        if residual < opts.tol {
            return Ok(finish(problem, alpha, gs, it, residual, opts));
        }
        if u <= floor {
            // Collapsed onto the normal solution, if it is self-consistent.
            let zero = C64::new(0.0, 0.0);
            let gs0 = problem.ground_state(zero, opts.degeneracy_tol);
            let r0 = cn * gs0.sx.abs();
            if r0 < opts.tol {
                return Ok(finish(problem, zero, gs0, it, r0, opts));
            }
        }
        if f > 0.0 {
            lo = lo.max(u);
        } else {
            hi = hi.min(u);
        }
        let secant = prev.and_then(|(up, fp)| {
            let x = u - f * (u - up) / (f - fp);
            (x.is_finite() && x > lo && x < hi).then_some(x)
        });
        let next = secant.unwrap_or_else(|| {
            let damped = u + opts.damping * f;
            if damped > lo && damped < hi {
                damped
            } else if hi.is_finite() && lo > 0.0 {
                0.5 * (lo + hi)
            } else {
                0.5 * u
            }
        });
        prev = Some((u, f));
        last = (alpha, gs, residual);
        u = next;
    }
    let (alpha, gs, residual) = last;
    Ok(MeanFieldSolution {
        alpha,
        photon_number: alpha.norm_sqr(),
        sx: gs.sx,
        atomic_state: gs.vector,
        iterations: opts.max_iter,
        converged: false,
        residual,
        degenerate_ground: gs.degenerate,
    })
}

fn finish(
    problem: &MeanFieldProblem,
    alpha: C64,
    gs: GroundState,
    iterations: usize,
    residual: f64,
    opts: &SolverOptions,
) -> MeanFieldSolution {
    // Collapse onto the normal solution.
    if alpha.norm() < opts.tol {
        let zero = C64::new(0.0, 0.0);
        let gs0 = problem.ground_state(zero, opts.degeneracy_tol);
        let out = problem.alpha_per_sx() * gs0.sx;
        if out.norm() < opts.tol {
            return MeanFieldSolution {
                alpha: zero,
                photon_number: 0.0,
                sx: gs0.sx,
                atomic_state: gs0.vector,
                iterations,
                converged: true,
                residual: out.norm(),
                degenerate_ground: gs0.degenerate,
            };
        }
    }
    MeanFieldSolution {
        alpha,
        photon_number: alpha.norm_sqr(),
        sx: gs.sx,
        atomic_state: gs.vector,
        iterations,
        converged: true,
        residual,
        degenerate_ground: gs.degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Normal,
    Superradiant,
}

impl Phase {
    pub fn classify(photon_number: f64, n_atoms: usize, eps_sr: f64) -> Self {
        if photon_number / n_atoms as f64 > eps_sr {
            Phase::Superradiant
        } else {
            Phase::Normal
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Phase::Normal => "NP",
            Phase::Superradiant => "SR",
        }
    }
}

/// Default photon-number-per-atom threshold separating SR from NP.
pub const DEFAULT_EPS_SR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalOptions {
    pub eps_sr: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub g_tol: f64,
    pub solver: SolverOptions,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            eps_sr: DEFAULT_EPS_SR,
            g_tol: 1e-4,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketStatus {
    Bracketed,
    /// SR already at the lower end; value is 0.
    SuperradiantEverywhere,
    /// NP at the upper end; value is the upper end.
    NormalEverywhere,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalCoupling {
    /// Midpoint of the final bracket.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub status: BracketStatus,
    pub solves: usize,
    /// Solves that hit `max_iter`.
    pub unconverged: usize,
}

/// Smallest coupling with `|α|²/N > eps_sr`, by bisection on `[g_lo, g_hi]`.
pub fn critical_coupling(
    problem: &MeanFieldProblem,
    g_lo: f64,
    g_hi: f64,
    opts: &CriticalOptions,
) -> Result<CriticalCoupling> {
    if !(g_lo >= 0.0 && g_hi > g_lo) {
        return Err(Error::InvalidArgument(format!(
            "coupling range [{g_lo}, {g_hi}] is not a valid bracket"
        )));
    }
    if !(opts.g_tol > 0.0 && opts.eps_sr > 0.0) {
        return Err(Error::InvalidArgument("g_tol and eps_sr must be positive".into()));
    }
    let n = problem.n_atoms();
    let mut solves = 0;
    let mut unconverged = 0;
    let mut is_sr = |g: f64| -> Result<bool> {
        let sol = solve_meanfield(&problem.with_coupling(g), &opts.solver)?;
        solves += 1;
        if !sol.converged {
            unconverged += 1;
        }
        Ok(Phase::classify(sol.photon_number, n, opts.eps_sr) == Phase::Superradiant)
    };

    if is_sr(g_lo)? {
        return Ok(CriticalCoupling {
            value: 0.0,
            lower: 0.0,
            upper: g_lo,
            status: BracketStatus::SuperradiantEverywhere,
            solves,
            unconverged,
        });
    }
    if !is_sr(g_hi)? {
        return Ok(CriticalCoupling {
            value: g_hi,
            lower: g_hi,
            upper: g_hi,
            status: BracketStatus::NormalEverywhere,
            solves,
            unconverged,
        });
    }
    let (mut lo, mut hi) = (g_lo, g_hi);
    while hi - lo > opts.g_tol {
        let mid = 0.5 * (lo + hi);
        if is_sr(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalCoupling {
        value: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        status: BracketStatus::Bracketed,
        solves,
        unconverged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCell {
    pub photon_number: f64,
    pub sx: f64,
    pub phase: Phase,
    pub converged: bool,
    pub iterations: usize,
}

/// Mean-field phase diagram over (interaction parameter) × (coupling).
#[derive(Debug, Clone, Serialize)]
pub struct PhaseGrid {
    pub parameter: Vec<f64>,
    pub coupling: Vec<f64>,
    /// Row-major: `cells[i * coupling.len() + j]` is `(parameter[i], coupling[j])`.
    pub cells: Vec<PhaseCell>,
    pub n_atoms: usize,
    pub eps_sr: f64,
}

impl PhaseGrid {
    pub fn cell(&self, i: usize, j: usize) -> &PhaseCell {
        &self.cells[i * self.coupling.len() + j]
    }

    pub fn unconverged(&self) -> usize {
        self.cells.iter().filter(|c| !c.converged).count()
    }

    /// First coupling on row `i` labelled SR.
    pub fn onset(&self, i: usize) -> Option<f64> {
        (0..self.coupling.len())
            .find(|&j| self.cell(i, j).phase == Phase::Superradiant)
            .map(|j| self.coupling[j])
    }
}

/// Solves every grid cell independently; `family(p)` builds the problem for
/// one interaction parameter (its coupling is overridden per column).
pub fn sweep_phase_diagram<F>(
    parameters: &[f64],
    couplings: &[f64],
    family: F,
    eps_sr: f64,
    opts: &SolverOptions,
) -> Result<PhaseGrid>
where
    F: Fn(f64) -> Result<MeanFieldProblem> + Sync,
{
    if parameters.is_empty() || couplings.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let problems: Vec<MeanFieldProblem> = parameters
        .par_iter()
        .map(|&p| family(p))
        .collect::<Result<_>>()?;
    let n_atoms = problems[0].n_atoms();
    let nc = couplings.len();
    let cells: Vec<PhaseCell> = (0..parameters.len() * nc)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / nc, k % nc);
            let sol = solve_meanfield(&problems[i].with_coupling(couplings[j]), opts)?;
            Ok(PhaseCell {
                photon_number: sol.photon_number,
                sx: sol.sx,
                phase: Phase::classify(sol.photon_number, n_atoms, eps_sr),
                converged: sol.converged,
                iterations: sol.iterations,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PhaseGrid {
        parameter: parameters.to_vec(),
        coupling: couplings.to_vec(),
        cells,
        n_atoms,
        eps_sr,
    })
}
