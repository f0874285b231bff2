//! Atomic, atom–cavity, mean-field and reduced (collective / Rabi) Hamiltonians.
//!
//! Energies are in units of the atomic splitting when `omega_a = 1`. Pair
//! distances along the chain are `|j - k| R0` (open boundary).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collective::RabiParams;
use crate::error::{Error, Result};
use crate::operators::{
    collective_spin, excitation_count, photon_ops_on, Axis, HilbertLayout, OperatorMatrix, C64,
};

/// Pairwise interaction between atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionModel {
    /// All-to-all resonant exchange of strength `v_dd`.
    ConstantDipole { v_dd: f64 },
    /// Exchange `v_dd / |j-k|^3`, with `v_dd = C3 / R0^3`.
    SpatialDipole { v_dd: f64 },
    /// Exchange `C3/R^3` plus the three van der Waals channels `C6/R^6`.
    /// Coefficients are given in units of `omega_a` times µm^3 / µm^6, `r0`
    /// in µm.
    Realistic {
        c3: f64,
        c6_pp: f64,
        c6_ss: f64,
        c6_sp: f64,
        r0: f64,
    },
    /// All-to-all van der Waals shift `v_pp` between excited atoms only.
    ConstantVdw { v_pp: f64 },
}

/// Rb-87 |60S1/2, mj=1/2> (s) and |60P1/2, mj=-1/2> (p), in units of omega_a.
pub const RB60_C3: f64 = -0.57;
pub const RB60_C6_PP: f64 = -11.48;
pub const RB60_C6_SS: f64 = 51.10;
pub const RB60_C6_SP: f64 = -1.00;

impl InteractionModel {
    pub fn none() -> Self {
        InteractionModel::ConstantDipole { v_dd: 0.0 }
    }

    pub fn rb60(r0: f64) -> Self {
        InteractionModel::Realistic {
            c3: RB60_C3,
            c6_pp: RB60_C6_PP,
            c6_ss: RB60_C6_SS,
            c6_sp: RB60_C6_SP,
            r0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be finite")))
            }
        };
        match *self {
            InteractionModel::ConstantDipole { v_dd } | InteractionModel::SpatialDipole { v_dd } => {
                finite(v_dd, "v_dd")
            }
            InteractionModel::ConstantVdw { v_pp } => finite(v_pp, "v_pp"),
            InteractionModel::Realistic {
                c3,
                c6_pp,
                c6_ss,
                c6_sp,
                r0,
            } => {
                for (x, n) in [(c3, "c3"), (c6_pp, "c6_pp"), (c6_ss, "c6_ss"), (c6_sp, "c6_sp")] {
                    finite(x, n)?;
                }
                if !(r0 > 0.0 && r0.is_finite()) {
                    return Err(Error::InvalidSpec(format!("r0 must be positive, got {r0}")));
                }
                Ok(())
            }
        }
    }

    /// Couplings between atoms `j < k`.
    pub fn pair_terms(&self, j: usize, k: usize) -> PairTerms {
        let d = j.abs_diff(k) as f64;
        match *self {
            InteractionModel::ConstantDipole { v_dd } => PairTerms::exchange(v_dd),
            InteractionModel::SpatialDipole { v_dd } => PairTerms::exchange(v_dd / d.powi(3)),
            InteractionModel::ConstantVdw { v_pp } => PairTerms {
                v_pp,
                ..PairTerms::default()
            },
            InteractionModel::Realistic {
                c3,
                c6_pp,
                c6_ss,
                c6_sp,
                r0,
            } => {
                let r3 = (d * r0).powi(3);
                let r6 = r3 * r3;
                PairTerms {
                    exchange: c3 / r3,
                    v_pp: c6_pp / r6,
                    v_ss: c6_ss / r6,
                    v_sp: c6_sp / r6,
                }
            }
        }
    }

    /// Nearest-neighbour exchange strength (`V_dd` in every model).
    pub fn exchange_scale(&self) -> f64 {
        match *self {
            InteractionModel::ConstantDipole { v_dd } | InteractionModel::SpatialDipole { v_dd } => {
                v_dd
            }
            InteractionModel::Realistic { c3, r0, .. } => c3 / r0.powi(3),
            InteractionModel::ConstantVdw { .. } => 0.0,
        }
    }

    /// Largest pair energy scale, used to choose integration steps.
    pub fn energy_scale(&self) -> f64 {
        let t = self.pair_terms(1, 2);
        t.exchange
            .abs()
            .max(t.v_pp.abs())
            .max(t.v_ss.abs())
            .max(t.v_sp.abs())
    }
}

/// Coefficients of one atom pair: exchange `(σj- σk+ + h.c.)` and the
/// projector channels `P↑P↑`, `P↓P↓`, `P↑P↓ + P↓P↑`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairTerms {
    pub exchange: f64,
    pub v_pp: f64,
    pub v_ss: f64,
    pub v_sp: f64,
}

impl PairTerms {
    pub fn exchange(v: f64) -> Self {
        Self {
            exchange: v,
            ..Self::default()
        }
    }
}

/// Which form of the constant-dipole atomic Hamiltonian to build.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomicForm {
    /// `Σ_{j<k} V (σj- σk+ + h.c.)`
    #[default]
    Pairwise,
    /// `V S+ S-`, which adds `V Σ_j σj+ σj-` to the pairwise form.
    CollectiveSpin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_atoms: usize,
    pub omega_a: f64,
    pub omega_c: f64,
    pub kappa: f64,
    /// Atom–cavity coupling rate G.
    pub coupling: f64,
    pub interaction: InteractionModel,
    #[serde(default)]
    pub atomic_form: AtomicForm,
}

impl ModelSpec {
    /// N = 6, ω_c = 0.75, κ = 0.25, no interaction, G = 0.
    pub fn reference(interaction: InteractionModel) -> Self {
        Self {
            n_atoms: 6,
            omega_a: 1.0,
            omega_c: 0.75,
            kappa: 0.25,
            coupling: 0.0,
            interaction,
            atomic_form: AtomicForm::Pairwise,
        }
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.coupling = g;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_atoms(mut self, n: usize) -> Self {
        self.n_atoms = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::InvalidSpec("n_atoms must be >= 1".into()));
        }
        if !(self.omega_a.is_finite()) {
            return Err(Error::InvalidSpec("omega_a must be finite".into()));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "omega_c must be positive, got {}",
                self.omega_c
            )));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "kappa must be non-negative, got {}",
                self.kappa
            )));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "coupling must be non-negative, got {}",
                self.coupling
            )));
        }
        if self.atomic_form == AtomicForm::CollectiveSpin
            && !matches!(self.interaction, InteractionModel::ConstantDipole { .. })
        {
            return Err(Error::UnsupportedInteraction(
                "the S+S- form exists only for the constant dipole interaction".into(),
            ));
        }
        self.interaction.validate()
    }

    /// Prefactor `2 sqrt(2/N) G` multiplying `(a + a^dag) S^x`.
    pub fn cavity_coupling(&self) -> f64 {
        2.0 * (2.0 / self.n_atoms as f64).sqrt() * self.coupling
    }
}

/// Atomic Hamiltonian on `2^N` from per-pair coefficients.
pub(crate) fn atomic_hamiltonian_from_pairs(
    n_atoms: usize,
    omega_a: f64,
    pair: impl Fn(usize, usize) -> PairTerms,
) -> Result<OperatorMatrix> {
    let layout = HilbertLayout::atoms_only(n_atoms)?;
    let dim = layout.atomic_dim();
    let pairs: Vec<(usize, usize, PairTerms)> = (1..=n_atoms)
        .flat_map(|j| ((j + 1)..=n_atoms).map(move |k| (j, k)))
        .map(|(j, k)| (j, k, pair(j, k)))
        .collect();

    let mut trips = Vec::with_capacity(dim * (1 + pairs.len()));
    for a in 0..dim {
        let n_exc = excitation_count(a, n_atoms) as f64;
        let mut diag = 0.5 * omega_a * (2.0 * n_exc - n_atoms as f64);
        for &(j, k, t) in &pairs {
            let ej = layout.is_excited(a, j);
            let ek = layout.is_excited(a, k);
            diag += match (ej, ek) {
                (true, true) => t.v_pp,
                (false, false) => t.v_ss,
                _ => t.v_sp,
            };
            if ej != ek && t.exchange != 0.0 {
                let flipped = a ^ (1 << (n_atoms - j)) ^ (1 << (n_atoms - k));
                trips.push((flipped, a, C64::new(t.exchange, 0.0)));
            }
        }
        trips.push((a, a, C64::new(diag, 0.0)));
    }
    OperatorMatrix::from_triplets(dim, trips)?.into_hermitian()
}

/// Atoms-only Hamiltonian (dimension `2^N`).
pub fn build_h_atom(spec: &ModelSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let model = spec.interaction;
    let h = atomic_hamiltonian_from_pairs(spec.n_atoms, spec.omega_a, |j, k| model.pair_terms(j, k))?;
    match spec.atomic_form {
        AtomicForm::Pairwise => Ok(h),
        AtomicForm::CollectiveSpin => {
            // S+S- = pairwise exchange + Σ_j σj+σj- (the excitation number)
            let v = model.exchange_scale();
            let layout = HilbertLayout::atoms_only(spec.n_atoms)?;
            let n_op = crate::operators::excitation_number(&layout);
            h.add(&n_op.scale(v))?.into_hermitian()
        }
    }
}

/// Collective-spin form `ω_a S^z + V S+ S-` built from the spin matrices, for
/// checking the pairwise builder.
pub fn build_h_atom_from_spins(spec: &ModelSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let v = match spec.interaction {
        InteractionModel::ConstantDipole { v_dd } => v_dd,
        _ => {
            return Err(Error::UnsupportedInteraction(
                "spin form needs the constant dipole interaction".into(),
            ))
        }
    };
    let layout = HilbertLayout::atoms_only(spec.n_atoms)?;
    let sz = collective_spin(&layout, Axis::Z)?;
    let sp = collective_spin(&layout, Axis::Plus)?;
    let sm = collective_spin(&layout, Axis::Minus)?;
    sz.scale(spec.omega_a)
        .add(&sp.matmul(&sm)?.scale(v))?
        .into_hermitian()
}

/// An atomic model together with the operator the cavity couples to.
///
/// `sx` plays the role of `S^x`: in the full space it is the collective spin,
/// in reduced collective bases it is the ladder with `<n+1|sx|n> = η_n / 2`.
#[derive(Debug, Clone)]
pub struct AtomicModel {
    pub h_atom: OperatorMatrix,
    pub sx: OperatorMatrix,
    pub n_atoms: usize,
}

impl AtomicModel {
    pub fn new(h_atom: OperatorMatrix, sx: OperatorMatrix, n_atoms: usize) -> Result<Self> {
        if h_atom.dim() != sx.dim() {
            return Err(Error::DimensionMismatch {
                expected: h_atom.dim(),
                found: sx.dim(),
            });
        }
        if n_atoms == 0 {
            return Err(Error::InvalidSpec("n_atoms must be >= 1".into()));
        }
        Ok(Self {
            h_atom: h_atom.into_hermitian()?,
            sx: sx.into_hermitian()?,
            n_atoms,
        })
    }

    /// Full `2^N` atomic space.
    pub fn full(spec: &ModelSpec) -> Result<Self> {
        let layout = HilbertLayout::atoms_only(spec.n_atoms)?;
        Self::new(build_h_atom(spec)?, collective_spin(&layout, Axis::X)?, spec.n_atoms)
    }

    /// Symmetric states `|ψ_0>..|ψ_{n_c}>` of the constant-dipole model.
    pub fn symmetric(spec: &ModelSpec, n_c: usize) -> Result<Self> {
        spec.validate()?;
        let v = match spec.interaction {
            InteractionModel::ConstantDipole { v_dd } => v_dd,
            other => {
                return Err(Error::UnsupportedInteraction(format!(
                    "symmetric states are eigenstates only for the constant dipole interaction, got {other:?}"
                )))
            }
        };
        let n = spec.n_atoms;
        if n_c > n {
            return Err(Error::ExcitationOutOfRange { n: n_c, n_atoms: n });
        }
        let shift = match spec.atomic_form {
            AtomicForm::Pairwise => 0.0,
            AtomicForm::CollectiveSpin => v,
        };
        let energies: Vec<f64> = (0..=n_c)
            .map(|k| crate::collective::omega_n_constant(n, k, spec.omega_a, v) + shift * k as f64)
            .collect();
        let ladder = (0..n_c).flat_map(|k| {
            let e = 0.5 * crate::collective::eta_symmetric(n, k);
            [(k + 1, k, C64::new(e, 0.0)), (k, k + 1, C64::new(e, 0.0))]
        });
        let sx = OperatorMatrix::from_triplets(n_c + 1, ladder)?;
        Self::new(OperatorMatrix::real_diagonal(&energies), sx, n)
    }

    /// Two-level reduction on `{|ψ_n>, |ψ_{n+1}>}` (index 0 is `|ψ_n>`).
    pub fn rabi(params: &RabiParams, n_atoms: usize) -> Result<Self> {
        let half = 0.5 * params.delta;
        let h = OperatorMatrix::real_diagonal(&[-half, half]);
        let e = 0.5 * params.eta;
        let sx = OperatorMatrix::from_triplets(
            2,
            [(0, 1, C64::new(e, 0.0)), (1, 0, C64::new(e, 0.0))],
        )?;
        Self::new(h, sx, n_atoms)
    }

    pub fn dim(&self) -> usize {
        self.h_atom.dim()
    }

    /// `H_atom + 2 sqrt(2/N) G (α + α*) S^x`
    pub fn meanfield(&self, coupling: f64, alpha: Complex64) -> Result<OperatorMatrix> {
        let g = 2.0 * (2.0 / self.n_atoms as f64).sqrt() * coupling;
        self.h_atom.add(&self.sx.scale(g * 2.0 * alpha.re))
    }

    /// `H_atom ⊗ 1 + ω_c a^dag a + 2 sqrt(2/N) G (a^dag + a) S^x` with Fock cutoff `cutoff`.
    pub fn with_cavity(&self, omega_c: f64, coupling: f64, cutoff: usize) -> Result<OperatorMatrix> {
        let ops = photon_ops_on(self.dim(), cutoff)?;
        let pid = OperatorMatrix::identity(cutoff + 1);
        let h_at = self.h_atom.kron(&pid);
        let sx = self.sx.kron(&pid);
        let quad = ops.annihilate.add(&ops.create)?;
        let g = 2.0 * (2.0 / self.n_atoms as f64).sqrt() * coupling;
        h_at.add(&ops.number.scale(omega_c))?
            .add(&sx.matmul(&quad)?.scale(g))?
            .into_hermitian()
    }
}

/// Full atom–cavity Hamiltonian on `layout` (counter-rotating terms kept).
pub fn build_h_full(spec: &ModelSpec, layout: &HilbertLayout) -> Result<OperatorMatrix> {
    if !layout.has_cavity() {
        return Err(Error::PhotonCutoffRequired);
    }
    if layout.n_atoms() != spec.n_atoms {
        return Err(Error::DimensionMismatch {
            expected: spec.n_atoms,
            found: layout.n_atoms(),
        });
    }
    AtomicModel::full(spec)?.with_cavity(spec.omega_c, spec.coupling, layout.photon_cutoff())
}

/// Mean-field atomic Hamiltonian with the cavity replaced by `α`.
#[derive(Debug, Clone)]
pub struct MeanFieldHamiltonian {
    pub matrix: OperatorMatrix,
    /// `ω_c |α|^2`, kept out of the matrix.
    pub energy_offset: f64,
}

pub fn build_h_meanfield(spec: &ModelSpec, alpha: Complex64) -> Result<MeanFieldHamiltonian> {
    let model = AtomicModel::full(spec)?;
    Ok(MeanFieldHamiltonian {
        matrix: model.meanfield(spec.coupling, alpha)?.into_hermitian()?,
        energy_offset: spec.omega_c * alpha.norm_sqr(),
    })
}

/// Projection of the constant-dipole model onto `|ψ_0>..|ψ_{n_c}>` times the
/// Fock space of `layout`; dimension `(n_c + 1)(M + 1)`.
pub fn build_h_symmetric_subspace(
    spec: &ModelSpec,
    n_c: usize,
    layout: &HilbertLayout,
) -> Result<OperatorMatrix> {
    if !layout.has_cavity() {
        return Err(Error::PhotonCutoffRequired);
    }
    AtomicModel::symmetric(spec, n_c)?.with_cavity(spec.omega_c, spec.coupling, layout.photon_cutoff())
}

/// Emergent quantum Rabi model on a collective-state pair; dimension `2(M + 1)`.
pub fn build_rabi(params: &RabiParams, spec: &ModelSpec, layout: &HilbertLayout) -> Result<OperatorMatrix> {
    if !layout.has_cavity() {
        return Err(Error::PhotonCutoffRequired);
    }
    spec.validate()?;
    AtomicModel::rabi(params, spec.n_atoms)?.with_cavity(spec.omega_c, spec.coupling, layout.photon_cutoff())
}
