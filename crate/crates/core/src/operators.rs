//! Operators on the composite atom–cavity Hilbert space.
//!
//! Basis convention: every atom contributes a two-level factor ordered
//! `{|p>, |s>}` (local index 0 is `|p>`, 1 is `|s>`), atom 1 is the leftmost
//! tensor factor and the truncated photon Fock space `|0>..|M>` is the
//! rightmost one. A composite basis index is therefore
//! `atomic_index * (M + 1) + photon_number`, and bit `N - j` of the atomic
//! index holds the state of atom `j` (set bit = `|s>`).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used when a builder certifies its output as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest atom number a full `2^N` layout accepts.
pub const MAX_FULL_ATOMS: usize = 24;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    n_atoms: usize,
    photon_cutoff: usize,
}

impl HilbertLayout {
    /// `photon_cutoff = 0` gives an atoms-only layout.
    pub fn new(n_atoms: usize, photon_cutoff: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidLayout("n_atoms must be positive".into()));
        }
        if n_atoms > MAX_FULL_ATOMS {
            return Err(Error::InvalidLayout(format!(
                "{n_atoms} atoms exceed the full-space limit of {MAX_FULL_ATOMS}"
            )));
        }
        Ok(Self {
            n_atoms,
            photon_cutoff,
        })
    }

    pub fn atoms_only(n_atoms: usize) -> Result<Self> {
        Self::new(n_atoms, 0)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn photon_cutoff(&self) -> usize {
        self.photon_cutoff
    }

    pub fn has_cavity(&self) -> bool {
        self.photon_cutoff > 0
    }

    pub fn atomic_dim(&self) -> usize {
        1 << self.n_atoms
    }

    pub fn photon_dim(&self) -> usize {
        self.photon_cutoff + 1
    }

    /// `2^N * (M + 1)`
    pub fn dim(&self) -> usize {
        self.atomic_dim() * self.photon_dim()
    }

    /// Same atoms, no cavity factor.
    pub fn atomic_layout(&self) -> Self {
        Self {
            n_atoms: self.n_atoms,
            photon_cutoff: 0,
        }
    }

    pub fn index(&self, atomic: usize, photons: usize) -> usize {
        atomic * self.photon_dim() + photons
    }

    /// Atomic basis index of a configuration given as excitation flags
    /// (`true` = `|p>`), atom 1 first.
    pub fn atomic_index_of(&self, excited: &[bool]) -> Result<usize> {
        if excited.len() != self.n_atoms {
            return Err(Error::DimensionMismatch {
                expected: self.n_atoms,
                found: excited.len(),
            });
        }
        Ok(excited
            .iter()
            .fold(0usize, |acc, &p| (acc << 1) | usize::from(!p)))
    }

    /// `|ss...s>` in the atoms-only factor.
    pub fn all_ground_atomic_index(&self) -> usize {
        self.atomic_dim() - 1
    }

    /// Whether atom `j` (1-based) is in `|p>` for a given atomic index.
    pub fn is_excited(&self, atomic: usize, j: usize) -> bool {
        (atomic >> (self.n_atoms - j)) & 1 == 0
    }

    fn check_site(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n_atoms {
            return Err(Error::AtomIndexOutOfRange {
                index: j,
                n_atoms: self.n_atoms,
            });
        }
        Ok(())
    }
}

/// Number of atoms in `|p>` for an atomic basis index.
pub fn excitation_count(atomic: usize, n_atoms: usize) -> usize {
    n_atoms - (atomic & ((1usize << n_atoms) - 1)).count_ones() as usize
}

/// Single-site operator labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
    /// `|p><s|`
    Plus,
    /// `|s><p|`
    Minus,
    /// `|p><p| = (σz + 1)/2`
    ProjUp,
    /// `|s><s| = (1 - σz)/2`
    ProjDown,
}

impl Axis {
    /// Matrix in the local `{|p>, |s>}` basis, row-major.
    fn local_matrix(self) -> [[C64; 2]; 2] {
        let i = C64::new(0.0, 1.0);
        match self {
            Axis::X => [[ZERO, ONE], [ONE, ZERO]],
            Axis::Y => [[ZERO, -i], [i, ZERO]],
            Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
            Axis::Plus => [[ZERO, ONE], [ZERO, ZERO]],
            Axis::Minus => [[ZERO, ZERO], [ONE, ZERO]],
            Axis::ProjUp => [[ONE, ZERO], [ZERO, ZERO]],
            Axis::ProjDown => [[ZERO, ZERO], [ZERO, ONE]],
        }
    }

    fn is_hermitian(self) -> bool {
        !matches!(self, Axis::Plus | Axis::Minus)
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            "+" | "plus" => Ok(Axis::Plus),
            "-" | "−" | "minus" => Ok(Axis::Minus),
            "P↑" | "up" | "p_up" => Ok(Axis::ProjUp),
            "P↓" | "down" | "p_down" => Ok(Axis::ProjDown),
            other => Err(Error::UnknownAxis(other.to_string())),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::Plus => "+",
            Axis::Minus => "-",
            Axis::ProjUp => "P↑",
            Axis::ProjDown => "P↓",
        };
        f.write_str(s)
    }
}

/// Square complex matrix in sparse row storage, with a Hermiticity flag that
/// is only set after a numerical check.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    data: CsrMatrix<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Duplicate entries are summed.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        let mut coo = CooMatrix::new(dim, dim);
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r}, {c}) outside a {dim}x{dim} operator"
                )));
            }
            if v != ZERO {
                coo.push(r, c, v);
            }
        }
        Ok(Self {
            data: CsrMatrix::from(&coo),
            hermitian: false,
        })
    }

    pub fn from_csr(data: CsrMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "operator must be square and non-empty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self {
            data,
            hermitian: false,
        })
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidArgument("operator must be square".into()));
        }
        let dim = m.nrows();
        let mut trips = Vec::new();
        for c in 0..dim {
            for r in 0..dim {
                trips.push((r, c, m[(r, c)]));
            }
        }
        Self::from_triplets(dim, trips)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: CsrMatrix::identity(dim),
            hermitian: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: CsrMatrix::zeros(dim, dim),
            hermitian: true,
        }
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let trips = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, C64::new(v, 0.0)));
        let mut op = Self::from_triplets(values.len().max(1), trips)
            .expect("diagonal entries are in range");
        op.hermitian = true;
        op
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.data.nnz()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn csr(&self) -> &CsrMatrix<C64> {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data
            .get_entry(row, col)
            .map(|e| e.into_value())
            .unwrap_or(ZERO)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.data.triplet_iter().map(|(r, c, v)| (r, c, *v))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.data.triplet_iter() {
            m[(r, c)] += *v;
        }
        m
    }

    /// Real part as a dense matrix; only meaningful when [`Self::is_real`].
    pub fn to_dense_real(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.data.triplet_iter() {
            m[(r, c)] += v.re;
        }
        m
    }

    pub fn is_real(&self) -> bool {
        self.data.values().iter().all(|v| v.im == 0.0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        let mut t = self.data.transpose();
        for v in t.values_mut() {
            *v = v.conj();
        }
        Self {
            data: t,
            hermitian: self.hermitian,
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.transpose(),
            hermitian: false,
        }
    }

    pub fn conj(&self) -> Self {
        let mut d = self.data.clone();
        for v in d.values_mut() {
            *v = v.conj();
        }
        Self {
            data: d,
            hermitian: self.hermitian,
        }
    }

    /// `max |A - A^dag|` over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        let diff = &self.data - &self.adjoint().data;
        diff.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Checks Hermiticity to [`HERMITIAN_TOL`] and sets the flag.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let err = self.hermiticity_error();
        if err >= HERMITIAN_TOL {
            return Err(Error::NotHermitian { max_deviation: err });
        }
        self.hermitian = true;
        Ok(self)
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            data: &self.data + &other.data,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            data: &self.data - &other.data,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            data: &self.data * C64::new(factor, 0.0),
            hermitian: self.hermitian,
        }
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self {
            data: &self.data * factor,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            data: &self.data * &other.data,
            hermitian: false,
        })
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let db = other.dim();
        let mut coo = CooMatrix::new(self.dim() * db, self.dim() * db);
        for (ra, ca, va) in self.data.triplet_iter() {
            for (rb, cb, vb) in other.data.triplet_iter() {
                coo.push(ra * db + rb, ca * db + cb, va * vb);
            }
        }
        Self {
            data: CsrMatrix::from(&coo),
            hermitian: self.hermitian && other.hermitian,
        }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(self.dim());
        for (r, row) in self.data.row_iter().enumerate() {
            let mut acc = ZERO;
            for (&c, val) in row.col_indices().iter().zip(row.values()) {
                acc += val * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// `<bra|A|ket>`
    pub fn matrix_element(&self, bra: &DVector<C64>, ket: &DVector<C64>) -> C64 {
        bra.dotc(&self.apply(ket))
    }

    pub fn expectation(&self, state: &DVector<C64>) -> C64 {
        self.matrix_element(state, state)
    }

    /// Principal submatrix on the given basis indices, as a dense matrix.
    pub fn restrict(&self, indices: &[usize]) -> DMatrix<C64> {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &i) in indices.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = DMatrix::zeros(indices.len(), indices.len());
        for (k, &i) in indices.iter().enumerate() {
            let row = self.data.row(i);
            for (&c, v) in row.col_indices().iter().zip(row.values()) {
                if pos[c] != usize::MAX {
                    m[(k, pos[c])] += *v;
                }
            }
        }
        m
    }

    /// `A ⊗ 1_{M+1}` for an atoms-only operator `A`.
    pub fn embed_atomic(&self, layout: &HilbertLayout) -> Result<Self> {
        if self.dim() != layout.atomic_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.atomic_dim(),
                found: self.dim(),
            });
        }
        if !layout.has_cavity() {
            return Ok(self.clone());
        }
        Ok(self.kron(&Self::identity(layout.photon_dim())))
    }
}

/// Builds the atomic factor of a site operator directly from basis bits.
fn atomic_site_operator(n_atoms: usize, j: usize, axis: Axis) -> OperatorMatrix {
    let local = axis.local_matrix();
    let shift = n_atoms - j;
    let dim = 1usize << n_atoms;
    let mut trips = Vec::with_capacity(2 * dim);
    for col in 0..dim {
        let v = (col >> shift) & 1;
        for (u, row_entries) in local.iter().enumerate() {
            let val = row_entries[v];
            if val != ZERO {
                let row = (col & !(1 << shift)) | (u << shift);
                trips.push((row, col, val));
            }
        }
    }
    let mut op = OperatorMatrix::from_triplets(dim, trips).expect("indices in range");
    op.hermitian = axis.is_hermitian();
    op
}

/// Single-site Pauli-type operator acting as the identity on every other factor.
pub fn pauli_site(layout: &HilbertLayout, j: usize, axis: Axis) -> Result<OperatorMatrix> {
    layout.check_site(j)?;
    atomic_site_operator(layout.n_atoms(), j, axis).embed_atomic(layout)
}

/// `S^β = Σ_j σ_j^β / 2` for β = x, y, z and `S^± = Σ_j σ_j^±` (no 1/2).
pub fn collective_spin(layout: &HilbertLayout, axis: Axis) -> Result<OperatorMatrix> {
    let half = match axis {
        Axis::X | Axis::Y | Axis::Z => 0.5,
        Axis::Plus | Axis::Minus => 1.0,
        Axis::ProjUp | Axis::ProjDown => {
            return Err(Error::InvalidArgument(format!(
                "collective spin has no `{axis}` component"
            )))
        }
    };
    let n = layout.n_atoms();
    let dim = layout.atomic_dim();
    let mut acc = OperatorMatrix::zeros(dim);
    for j in 1..=n {
        acc = acc.add(&atomic_site_operator(n, j, axis))?;
    }
    let mut s = acc.scale(half);
    s.hermitian = axis.is_hermitian();
    s.embed_atomic(layout)
}

/// Total excitation number `Σ_j (σ_j^z + 1)/2` (diagonal).
pub fn excitation_number(layout: &HilbertLayout) -> OperatorMatrix {
    let n = layout.n_atoms();
    let diag: Vec<f64> = (0..layout.dim())
        .map(|i| excitation_count(i / layout.photon_dim(), n) as f64)
        .collect();
    OperatorMatrix::real_diagonal(&diag)
}

/// Truncated cavity ladder operators.
#[derive(Debug, Clone)]
pub struct PhotonOps {
    pub annihilate: OperatorMatrix,
    pub create: OperatorMatrix,
    pub number: OperatorMatrix,
}

/// Photon operators on `C^{atomic_dim} ⊗ Fock(M)` for any atomic factor,
/// including reduced collective bases.
pub fn photon_ops_on(atomic_dim: usize, cutoff: usize) -> Result<PhotonOps> {
    if cutoff == 0 {
        return Err(Error::PhotonCutoffRequired);
    }
    let pd = cutoff + 1;
    let lower = OperatorMatrix::from_triplets(
        pd,
        (1..pd).map(|m| (m - 1, m, C64::new((m as f64).sqrt(), 0.0))),
    )?;
    let id = OperatorMatrix::identity(atomic_dim);
    let annihilate = id.kron(&lower);
    let create = annihilate.adjoint();
    let number = OperatorMatrix::real_diagonal(
        &(0..atomic_dim * pd).map(|i| (i % pd) as f64).collect::<Vec<_>>(),
    );
    Ok(PhotonOps {
        annihilate,
        create,
        number,
    })
}

pub fn photon_ops(layout: &HilbertLayout) -> Result<PhotonOps> {
    photon_ops_on(layout.atomic_dim(), layout.photon_cutoff())
}

/// Projector on the highest retained Fock state `|M>`.
pub fn photon_tail_projector(atomic_dim: usize, cutoff: usize) -> OperatorMatrix {
    let pd = cutoff + 1;
    OperatorMatrix::real_diagonal(
        &(0..atomic_dim * pd)
            .map(|i| if i % pd == cutoff { 1.0 } else { 0.0 })
            .collect::<Vec<_>>(),
    )
}

/// `Π = exp(iπ [a^dag a + Σ_j (σ_j^z + 1)/2])`, diagonal ±1.
pub fn parity(layout: &HilbertLayout) -> OperatorMatrix {
    let n = layout.n_atoms();
    let pd = layout.photon_dim();
    let diag: Vec<f64> = (0..layout.dim())
        .map(|i| {
            let q = excitation_count(i / pd, n) + i % pd;
            if q % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    OperatorMatrix::real_diagonal(&diag)
}

/// Basis vector of the given dimension.
pub fn basis_vector(dim: usize, index: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[index] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(n: usize, m: usize) -> HilbertLayout {
        HilbertLayout::new(n, m).unwrap()
    }

    #[test]
    fn sigma_z_single_atom() {
        let z = pauli_site(&layout(1, 0), 1, Axis::Z).unwrap().to_dense();
        assert_eq!(z[(0, 0)], ONE);
        assert_eq!(z[(1, 1)], -ONE);
        assert_eq!(z[(0, 1)], ZERO);
    }

    #[test]
    fn sigma_z_on_ground_pair() {
        let l = layout(2, 0);
        let z1 = pauli_site(&l, 1, Axis::Z).unwrap();
        let ss = basis_vector(4, l.all_ground_atomic_index());
        let out = z1.apply(&ss);
        assert!((out - ss.scale(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn ladder_completeness() {
        let l = layout(3, 2);
        for j in 1..=3 {
            let p = pauli_site(&l, j, Axis::Plus).unwrap();
            let m = pauli_site(&l, j, Axis::Minus).unwrap();
            let sum = p.matmul(&m).unwrap().add(&m.matmul(&p).unwrap()).unwrap();
            let diff = sum.sub(&OperatorMatrix::identity(l.dim())).unwrap();
            assert!(diff.max_abs_entry() < 1e-15);
        }
    }

    #[test]
    fn plus_is_p_ket_s_bra() {
        let l = layout(1, 0);
        let p = pauli_site(&l, 1, Axis::Plus).unwrap();
        // |p> = index 0, |s> = index 1
        assert_eq!(p.get(0, 1), ONE);
        assert_eq!(p.nnz(), 1);
    }

    #[test]
    fn site_index_errors() {
        let l = layout(2, 0);
        assert!(matches!(
            pauli_site(&l, 0, Axis::X),
            Err(Error::AtomIndexOutOfRange { .. })
        ));
        assert!(matches!(
            pauli_site(&l, 3, Axis::X),
            Err(Error::AtomIndexOutOfRange { .. })
        ));
        assert!(matches!("w".parse::<Axis>(), Err(Error::UnknownAxis(_))));
    }

    #[test]
    fn collective_sz_eigenvalues() {
        let l = layout(2, 0);
        let sz = collective_spin(&l, Axis::Z).unwrap();
        let ss = basis_vector(4, l.all_ground_atomic_index());
        assert!((sz.expectation(&ss).re + 1.0).abs() < 1e-15);

        let l6 = layout(6, 0);
        let sz6 = collective_spin(&l6, Axis::Z).unwrap();
        for a in 0..l6.atomic_dim() {
            let n = excitation_count(a, 6) as f64;
            assert!((sz6.get(a, a).re - (n - 3.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn spin_commutator_on_three_atoms() {
        let l = layout(3, 0);
        let sx = collective_spin(&l, Axis::X).unwrap();
        let sy = collective_spin(&l, Axis::Y).unwrap();
        let sz = collective_spin(&l, Axis::Z).unwrap();
        let lhs = sx.commutator(&sy).unwrap().to_dense();
        let rhs = sz.to_dense() * C64::new(0.0, 1.0);
        let err = (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-14, "commutator error {err}");
    }

    #[test]
    fn collective_relations() {
        let l = layout(4, 1);
        let sp = collective_spin(&l, Axis::Plus).unwrap();
        let sm = collective_spin(&l, Axis::Minus).unwrap();
        let sx = collective_spin(&l, Axis::X).unwrap();
        assert!(sp.adjoint().sub(&sm).unwrap().max_abs_entry() < 1e-15);
        let half_sum = sp.add(&sm).unwrap().scale(0.5);
        assert!(half_sum.sub(&sx).unwrap().max_abs_entry() < 1e-15);
        assert!(collective_spin(&l, Axis::ProjUp).is_err());
    }

    #[test]
    fn hermitian_flags_verified() {
        let l = layout(3, 2);
        for axis in [Axis::X, Axis::Y, Axis::Z, Axis::ProjUp, Axis::ProjDown] {
            for j in 1..=3 {
                let op = pauli_site(&l, j, axis).unwrap();
                assert!(op.is_hermitian());
                assert!(op.hermiticity_error() < HERMITIAN_TOL);
            }
            let s = collective_spin(&l, axis);
            if let Ok(s) = s {
                assert!(s.is_hermitian() && s.hermiticity_error() < HERMITIAN_TOL);
            }
        }
        assert!(!pauli_site(&l, 1, Axis::Plus).unwrap().is_hermitian());
    }

    #[test]
    fn site_z_operators_commute() {
        let l = layout(4, 1);
        for j in 1..=4 {
            for k in 1..=4 {
                if j == k {
                    continue;
                }
                let a = pauli_site(&l, j, Axis::Z).unwrap();
                let b = pauli_site(&l, k, Axis::X).unwrap();
                assert!(a.commutator(&b).unwrap().max_abs_entry() < 1e-12);
            }
        }
    }

    #[test]
    fn photon_ladder() {
        let l = layout(1, 3);
        let ops = photon_ops(&l).unwrap();
        let vac = basis_vector(l.dim(), l.index(1, 0));
        assert!(ops.annihilate.apply(&vac).norm() < 1e-15);
        for n in 0..3 {
            let ket = basis_vector(l.dim(), l.index(1, n));
            let up = ops.create.apply(&ket);
            let expect = basis_vector(l.dim(), l.index(1, n + 1)).scale(((n + 1) as f64).sqrt());
            assert!((up - expect).norm() < 1e-15);
        }
        let top = basis_vector(l.dim(), l.index(1, 3));
        assert!(ops.create.apply(&top).norm() < 1e-15);
        let number = ops.create.matmul(&ops.annihilate).unwrap();
        assert!(number.sub(&ops.number).unwrap().max_abs_entry() < 1e-14);
        assert!(matches!(
            photon_ops(&layout(2, 0)),
            Err(Error::PhotonCutoffRequired)
        ));
    }

    #[test]
    fn layout_dimensions_and_indexing() {
        let l = layout(2, 3);
        assert_eq!(l.dim(), 16);
        assert_eq!(l.atomic_index_of(&[false, false]).unwrap(), 3);
        assert_eq!(l.atomic_index_of(&[true, false]).unwrap(), 1);
        assert!(l.is_excited(1, 1));
        assert!(!l.is_excited(1, 2));
        assert!(HilbertLayout::new(0, 1).is_err());
    }
}
