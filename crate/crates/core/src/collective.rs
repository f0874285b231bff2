//! Collective atomic states: symmetric Dicke-like states, their energies and
//! degeneracies, emergent Rabi-model parameters, and excitation-sector
//! diagonalization for spatially dependent interactions.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::eigh_sorted;
use crate::operators::{
    collective_spin, excitation_count, Axis, HilbertLayout, OperatorMatrix, C64, HERMITIAN_TOL,
};

/// An `n`-excitation collective state on the full `2^N` atomic space.
#[derive(Debug, Clone)]
pub struct CollectiveState {
    pub n: usize,
    pub amplitudes: DVector<C64>,
    /// Energy under the Hamiltonian it was obtained from, if any.
    pub energy: Option<f64>,
}

impl CollectiveState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// Parameters of the two-level Rabi reduction on `{|ψ_n>, |ψ_{n+1}>}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiParams {
    pub n: usize,
    /// `ω_{n+1} - ω_n`
    pub delta: f64,
    /// `<ψ_{n+1}| 2 S^x |ψ_n>`
    pub eta: f64,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Basis indices of the `n`-excitation sector, ascending.
pub fn sector_indices(n_atoms: usize, n: usize) -> Vec<usize> {
    (0..1usize << n_atoms)
        .filter(|&a| excitation_count(a, n_atoms) == n)
        .collect()
}

/// Uniform superposition of all `n`-excitation configurations.
pub fn symmetric_state(n_atoms: usize, n: usize) -> Result<CollectiveState> {
    HilbertLayout::atoms_only(n_atoms)?;
    if n > n_atoms {
        return Err(Error::ExcitationOutOfRange { n, n_atoms });
    }
    let idx = sector_indices(n_atoms, n);
    let amp = 1.0 / (idx.len() as f64).sqrt();
    let mut v = DVector::zeros(1 << n_atoms);
    for i in idx {
        v[i] = C64::new(amp, 0.0);
    }
    Ok(CollectiveState {
        n,
        amplitudes: v,
        energy: None,
    })
}

/// `ω_n = -(N/2 - n) ω_a + n (N - n) V_dd`
pub fn omega_n_constant(n_atoms: usize, n: usize, omega_a: f64, v_dd: f64) -> f64 {
    let (nn, k) = (n_atoms as f64, n as f64);
    -(0.5 * nn - k) * omega_a + k * (nn - k) * v_dd
}

/// `-(N/2 - n) ω_a + C(n, 2) V_pp` for the all-to-all van der Waals model.
pub fn omega_n_vdw(n_atoms: usize, n: usize, omega_a: f64, v_pp: f64) -> f64 {
    let (nn, k) = (n_atoms as f64, n as f64);
    -(0.5 * nn - k) * omega_a + 0.5 * k * (k - 1.0) * v_pp
}

/// `sqrt((N - n)(n + 1))`
pub fn eta_symmetric(n_atoms: usize, n: usize) -> f64 {
    (((n_atoms - n) * (n + 1)) as f64).sqrt()
}

/// Interaction strength at which `|ψ_n>` and `|ψ_{n+1}>` are degenerate:
/// `-ω_a / (N - (2n + 1))`, attractive for `n < (N - 1)/2`.
pub fn critical_vdd(n_atoms: usize, n: usize, omega_a: f64) -> Result<f64> {
    if n >= n_atoms {
        return Err(Error::ExcitationOutOfRange { n, n_atoms });
    }
    let denom = n_atoms as i64 - (2 * n as i64 + 1);
    if denom == 0 {
        return Err(Error::NoFiniteCriticalPoint { n_atoms, n });
    }
    Ok(-omega_a / denom as f64)
}

/// Excitation numbers with an attractive critical interaction (`N - 2n - 1 > 0`).
pub fn attractive_critical_sectors(n_atoms: usize) -> impl Iterator<Item = usize> {
    (0..=n_atoms / 2).filter(move |&n| n_atoms > 2 * n + 1)
}

/// Rabi parameters of the symmetric pair for a constant dipole interaction.
pub fn rabi_params(n_atoms: usize, n: usize, omega_a: f64, v_dd: f64) -> Result<RabiParams> {
    if n >= n_atoms {
        return Err(Error::ExcitationOutOfRange { n, n_atoms });
    }
    Ok(RabiParams {
        n,
        delta: omega_n_constant(n_atoms, n + 1, omega_a, v_dd)
            - omega_n_constant(n_atoms, n, omega_a, v_dd),
        eta: eta_symmetric(n_atoms, n),
    })
}

/// Rabi parameters from explicit states of consecutive sectors, as used
/// for spatially dependent interactions.
pub fn rabi_params_from_states(
    lower: &CollectiveState,
    upper: &CollectiveState,
    n_atoms: usize,
) -> Result<RabiParams> {
    if upper.n != lower.n + 1 {
        return Err(Error::InvalidArgument(format!(
            "states must be in consecutive sectors, got n = {} and {}",
            lower.n, upper.n
        )));
    }
    let (el, eu) = match (lower.energy, upper.energy) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidArgument(
                "collective states carry no energy".into(),
            ))
        }
    };
    let sx = collective_spin(&HilbertLayout::atoms_only(n_atoms)?, Axis::X)?;
    if sx.dim() != lower.amplitudes.len() || sx.dim() != upper.amplitudes.len() {
        return Err(Error::DimensionMismatch {
            expected: sx.dim(),
            found: lower.amplitudes.len(),
        });
    }
    let eta = 2.0 * sx.matrix_element(&upper.amplitudes, &lower.amplitudes).norm();
    Ok(RabiParams {
        n: lower.n,
        delta: eu - el,
        eta,
    })
}

/// Critical coupling of the dissipative Rabi model,
/// `G_c = (1 / 2η) sqrt(N |Δ| / 2 · (ω_c² + κ²) / ω_c)`.
pub fn rabi_critical_g(params: &RabiParams, n_atoms: usize, omega_c: f64, kappa: f64) -> Result<f64> {
    if !(omega_c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "omega_c must be positive, got {omega_c}"
        )));
    }
    if !(params.eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eta must be positive, got {}",
            params.eta
        )));
    }
    let inner = n_atoms as f64 * params.delta.abs() / 2.0 * (omega_c * omega_c + kappa * kappa)
        / omega_c;
    Ok(inner.sqrt() / (2.0 * params.eta))
}

/// Rejects operators that mix excitation sectors or are not Hermitian.
pub fn check_excitation_conserving(h: &OperatorMatrix, n_atoms: usize) -> Result<()> {
    if h.dim() != 1 << n_atoms {
        return Err(Error::DimensionMismatch {
            expected: 1 << n_atoms,
            found: h.dim(),
        });
    }
    let herm = h.hermiticity_error();
    if herm >= HERMITIAN_TOL {
        return Err(Error::NotHermitian { max_deviation: herm });
    }
    let leak = h
        .triplets()
        .filter(|&(r, c, _)| excitation_count(r, n_atoms) != excitation_count(c, n_atoms))
        .map(|(_, _, v)| v.norm())
        .fold(0.0, f64::max);
    if leak > 0.0 {
        return Err(Error::NotExcitationConserving { max_leak: leak });
    }
    Ok(())
}

fn sector_ground(h: &OperatorMatrix, n_atoms: usize, n: usize) -> (f64, DVector<C64>) {
    let idx = sector_indices(n_atoms, n);
    let block = h.restrict(&idx);
    let (vals, vecs) = eigh_sorted(block);
    let mut local: DVector<C64> = vecs.column(0).into_owned();
    // Fix the global phase: real positive amplitude sum, or largest entry.
    let sum: C64 = local.iter().sum();
    let phase = if sum.norm() > 1e-10 {
        sum / sum.norm()
    } else {
        let big = local
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(C64::new(1.0, 0.0));
        big / big.norm()
    };
    local = local.map(|z| z / phase);
    let mut full = DVector::zeros(1 << n_atoms);
    for (k, &i) in idx.iter().enumerate() {
        full[i] = local[k];
    }
    (vals[0], full)
}

/// Lowest eigenpair of `h_atom` inside the `n`-excitation sector.
pub fn lowest_state_in_sector(
    h_atom: &OperatorMatrix,
    n_atoms: usize,
    n: usize,
) -> Result<CollectiveState> {
    if n > n_atoms {
        return Err(Error::ExcitationOutOfRange { n, n_atoms });
    }
    check_excitation_conserving(h_atom, n_atoms)?;
    let (e, v) = sector_ground(h_atom, n_atoms, n);
    Ok(CollectiveState {
        n,
        amplitudes: v,
        energy: Some(e),
    })
}

/// Lowest energy of every excitation sector `n = 0..=N`.
pub fn sector_minima(h_atom: &OperatorMatrix, n_atoms: usize) -> Result<Vec<f64>> {
    check_excitation_conserving(h_atom, n_atoms)?;
    Ok((0..=n_atoms)
        .map(|n| sector_ground(h_atom, n_atoms, n).0)
        .collect())
}

/// `|<ψ_n|ψ_s>|² + |<ψ_{n+1}|ψ_s>|²`
pub fn overlap_pair(state: &DVector<C64>, psi_n: &DVector<C64>, psi_n1: &DVector<C64>) -> Result<f64> {
    for v in [psi_n, psi_n1] {
        if v.len() != state.len() {
            return Err(Error::DimensionMismatch {
                expected: state.len(),
                found: v.len(),
            });
        }
    }
    for v in [state, psi_n, psi_n1] {
        if (v.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "overlap needs unit vectors, got norm {}",
                v.norm()
            )));
        }
    }
    let p = psi_n.dotc(state).norm_sqr() + psi_n1.dotc(state).norm_sqr();
    Ok(p.clamp(0.0, 1.0))
}

/// Excitation pair `(n, n+1)` whose critical interaction is closest to `1/V`,
/// with region boundaries at the midpoints between neighbouring critical
/// values of `1/V`. `None` for repulsive or vanishing interactions.
pub fn constant_region(n_atoms: usize, omega_a: f64, inv_v: f64) -> Option<usize> {
    if !(inv_v < 0.0) {
        return None;
    }
    attractive_critical_sectors(n_atoms).min_by(|&a, &b| {
        let ca = 1.0 / critical_vdd(n_atoms, a, omega_a).unwrap();
        let cb = 1.0 / critical_vdd(n_atoms, b, omega_a).unwrap();
        (ca - inv_v).abs().total_cmp(&(cb - inv_v).abs())
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Energy window within which sector minima count as degenerate.
    pub eps_deg: f64,
    /// Absolute parameter resolution of the refined crossing.
    pub refine_tol: f64,
    /// Chained crossings (`n+2 -> n+1 -> n`) closer than this in the parameter
    /// are reported as one multi-fold point. Zero disables clustering.
    pub cluster_width: f64,
}

impl ScanOptions {
    pub fn for_omega_a(omega_a: f64) -> Self {
        Self {
            eps_deg: 1e-4 * omega_a.abs(),
            refine_tol: 1e-10,
            cluster_width: 0.0,
        }
    }
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self::for_omega_a(1.0)
    }
}

/// A ground-state crossing between excitation sectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Degeneracy {
    pub parameter: f64,
    /// Sectors whose minima lie within `eps_deg` of the ground energy at
    /// `parameter`, ascending.
    pub sectors: Vec<usize>,
    /// Spread of those sector minima.
    pub gap: f64,
    pub ground_energy: f64,
    /// Parameter distance between the first and last crossing of a cluster.
    pub span: f64,
}

impl Degeneracy {
    /// True when the degenerate sectors form a consecutive run, so the
    /// cavity (which changes `n` by one) couples them.
    pub fn dipole_coupled(&self) -> bool {
        self.sectors.windows(2).all(|w| w[1] == w[0] + 1)
    }

    pub fn multiplicity(&self) -> usize {
        self.sectors.len()
    }
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Locates ground-sector changes of an excitation-conserving family
/// `family(p)` over a monotone grid and refines each crossing by bisection.
pub fn scan_degeneracies<F>(
    grid: &[f64],
    n_atoms: usize,
    family: F,
    opts: ScanOptions,
) -> Result<Vec<Degeneracy>>
where
    F: Fn(f64) -> Result<OperatorMatrix> + Sync,
{
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(opts.eps_deg > 0.0) {
        return Err(Error::InvalidArgument("eps_deg must be positive".into()));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidArgument("scan grid must be strictly monotone".into()));
    }
    let minima = |p: f64| -> Result<Vec<f64>> { sector_minima(&family(p)?, n_atoms) };

    let at_grid: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&p| minima(p))
        .collect::<Result<_>>()?;

    let mut crossings = Vec::new();
    for i in 1..grid.len() {
        let (g0, g1) = (argmin(&at_grid[i - 1]), argmin(&at_grid[i]));
        if g0 != g1 {
            locate(grid[i - 1], g0, grid[i], g1, &minima, opts.refine_tol, &mut crossings)?;
        }
    }

    let describe = |p: f64, forced: &[usize], span: f64| -> Result<Degeneracy> {
        let e = minima(p)?;
        let ground = e.iter().copied().fold(f64::INFINITY, f64::min);
        let sectors: Vec<usize> = (0..e.len())
            .filter(|&n| e[n] - ground <= opts.eps_deg || forced.contains(&n))
            .collect();
        let top = sectors.iter().map(|&n| e[n]).fold(f64::NEG_INFINITY, f64::max);
        Ok(Degeneracy {
            parameter: p,
            sectors,
            gap: top - ground,
            ground_energy: ground,
            span,
        })
    };

    // Group crossings whose ground sectors chain within `cluster_width`.
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for &(p, a, b) in &crossings {
        match groups.last_mut() {
            Some((ps, secs))
                if opts.cluster_width > 0.0
                    && (p - ps[ps.len() - 1]).abs() <= opts.cluster_width
                    && secs.last() == Some(&a) =>
            {
                ps.push(p);
                secs.push(b);
            }
            _ => groups.push((vec![p], vec![a, b])),
        }
    }

    let mut out: Vec<Degeneracy> = Vec::new();
    for (ps, secs) in groups {
        let (first, last) = (ps[0], ps[ps.len() - 1]);
        let d = if ps.len() == 1 {
            describe(first, &[], 0.0)?
        } else {
            let mut forced = secs.clone();
            forced.sort_unstable();
            describe(0.5 * (first + last), &forced, (last - first).abs())?
        };
        match out.last_mut() {
            // An exact multi-fold point shows up as several adjacent crossings.
            Some(prev) if prev.sectors == d.sectors && d.sectors.len() > 2 && d.span == 0.0 => {
                prev.parameter = 0.5 * (prev.parameter + d.parameter);
            }
            _ => out.push(d),
        }
    }
    Ok(out)
}

fn locate<F>(
    mut lo: f64,
    g_lo: usize,
    mut hi: f64,
    g_hi: usize,
    minima: &F,
    tol: f64,
    out: &mut Vec<(f64, usize, usize)>,
) -> Result<()>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        let g_mid = argmin(&minima(mid)?);
        if g_mid == g_lo {
            lo = mid;
        } else if g_mid == g_hi {
            hi = mid;
        } else {
            locate(lo, g_lo, mid, g_mid, minima, tol, out)?;
            return locate(mid, g_mid, hi, g_hi, minima, tol, out);
        }
    }
    out.push((0.5 * (lo + hi), g_lo, g_hi));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_h_atom, InteractionModel, ModelSpec};

    fn h_const(n: usize, v: f64) -> OperatorMatrix {
        build_h_atom(&ModelSpec::reference(InteractionModel::ConstantDipole { v_dd: v }).with_atoms(n))
            .unwrap()
    }

    #[test]
    fn symmetric_states_basic() {
        let s0 = symmetric_state(4, 0).unwrap();
        assert_eq!(s0.amplitudes[15], C64::new(1.0, 0.0));
        let s1 = symmetric_state(3, 1).unwrap();
        let a = 1.0 / 3f64.sqrt();
        // |pss> = 0b011, |sps> = 0b101, |ssp> = 0b110
        for i in [3, 5, 6] {
            assert!((s1.amplitudes[i].re - a).abs() < 1e-15);
        }
        assert!((s1.norm() - 1.0).abs() < 1e-12);
        assert!(symmetric_state(3, 4).is_err());
        for n in 0..=6 {
            for m in 0..=6 {
                let ov = symmetric_state(6, n)
                    .unwrap()
                    .amplitudes
                    .dotc(&symmetric_state(6, m).unwrap().amplitudes);
                let expect = if n == m { 1.0 } else { 0.0 };
                assert!((ov.re - expect).abs() < 1e-12 && ov.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn excitation_number_of_symmetric_states() {
        let l = HilbertLayout::atoms_only(5).unwrap();
        let n_op = crate::operators::excitation_number(&l);
        for n in 0..=5 {
            let s = symmetric_state(5, n).unwrap();
            let r = n_op.apply(&s.amplitudes) - s.amplitudes.scale(n as f64);
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn omega_values() {
        for v in [-1.0, 0.3] {
            assert_eq!(omega_n_constant(6, 0, 1.0, v), -3.0);
        }
        let v = -1.0 / 3.0;
        assert!((omega_n_constant(6, 1, 1.0, v) + 11.0 / 3.0).abs() < 1e-15);
        assert!((omega_n_constant(6, 2, 1.0, v) + 11.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_states_are_eigenstates() {
        for n_atoms in 1..=8 {
            for v in [-0.2, -0.7, 0.4] {
                let h = h_const(n_atoms, v);
                for n in 0..=n_atoms {
                    let s = symmetric_state(n_atoms, n).unwrap();
                    let w = omega_n_constant(n_atoms, n, 1.0, v);
                    let r = (h.apply(&s.amplitudes) - s.amplitudes.scale(w)).norm();
                    assert!(r < 1e-10, "N={n_atoms} n={n} v={v}: residual {r}");
                    assert!((h.expectation(&s.amplitudes).re - w).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn critical_values_n6() {
        let inv: Vec<f64> = (0..3).map(|n| 1.0 / critical_vdd(6, n, 1.0).unwrap()).collect();
        assert_eq!(inv, vec![-5.0, -3.0, -1.0]);
        for n in 0..3 {
            let v = critical_vdd(6, n, 1.0).unwrap();
            let d = omega_n_constant(6, n, 1.0, v) - omega_n_constant(6, n + 1, 1.0, v);
            assert!(d.abs() < 1e-14);
        }
        assert!((critical_vdd(4, 0, 1.0).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            critical_vdd(5, 2, 1.0),
            Err(Error::NoFiniteCriticalPoint { .. })
        ));
        assert!((critical_vdd(6, 4, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(critical_vdd(6, 6, 1.0).is_err());
    }

    #[test]
    fn n4_crossing_by_brute_force_scan() {
        // Brute force: sweep V, track where the two lowest full-spectrum
        // eigenvalues of the 0 and 1 excitation sectors cross.
        let mut prev: Option<(f64, f64)> = None;
        let mut found = None;
        for k in 0..=2000 {
            let v = -0.6 + 0.5 * k as f64 / 2000.0;
            let e = sector_minima(&h_const(4, v), 4).unwrap();
            let d = e[0] - e[1];
            if let Some((pv, pd)) = prev {
                if pd.signum() != d.signum() {
                    found = Some(pv - pd * (v - pv) / (d - pd));
                }
            }
            prev = Some((v, d));
        }
        let v = found.expect("crossing found");
        assert!((v + 1.0 / 3.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn rabi_parameters() {
        let p = rabi_params(6, 0, 1.0, 0.0).unwrap();
        assert!((p.eta - 6f64.sqrt()).abs() < 1e-15);
        assert!((p.delta - 1.0).abs() < 1e-15);
        let p = rabi_params(6, 1, 1.0, -1.0 / 3.0).unwrap();
        assert!(p.delta.abs() < 1e-15);
        assert!(rabi_params(6, 6, 1.0, 0.0).is_err());
        for n in 0..6 {
            assert!((eta_symmetric(6, n) - eta_symmetric(6, 5 - n)).abs() < 1e-15);
        }
    }

    #[test]
    fn eta_from_matrix_elements() {
        let n_atoms = 6;
        let sx = collective_spin(&HilbertLayout::atoms_only(n_atoms).unwrap(), Axis::X).unwrap();
        for n in 0..n_atoms {
            let lo = symmetric_state(n_atoms, n).unwrap();
            let hi = symmetric_state(n_atoms, n + 1).unwrap();
            let me = 2.0 * sx.matrix_element(&hi.amplitudes, &lo.amplitudes);
            assert!((me.re - eta_symmetric(n_atoms, n)).abs() < 1e-12 && me.im.abs() < 1e-15);
        }
    }

    #[test]
    fn rabi_critical_coupling_values() {
        let p = rabi_params(6, 0, 1.0, 0.0).unwrap();
        let g = rabi_critical_g(&p, 6, 0.75, 0.25).unwrap();
        // (1/(2 sqrt 6)) sqrt(6/2 * 0.625/0.75)
        let expected = (3.0f64 * 0.625 / 0.75).sqrt() / (2.0 * 6f64.sqrt());
        assert!((g - expected).abs() < 1e-15);
        assert!((g - 0.3227).abs() < 1e-4);
        let zero = RabiParams { delta: 0.0, ..p };
        assert_eq!(rabi_critical_g(&zero, 6, 0.75, 0.25).unwrap(), 0.0);
        let g0 = rabi_critical_g(&p, 6, 0.75, 0.0).unwrap();
        for kappa in [0.125, 0.25, 0.5] {
            let gk = rabi_critical_g(&p, 6, 0.75, kappa).unwrap();
            let ratio = (1.0 + kappa * kappa / 0.5625f64).sqrt();
            assert!((gk / g0 - ratio).abs() < 1e-12);
        }
        assert!(rabi_critical_g(&p, 6, 0.0, 0.25).is_err());
    }

    #[test]
    fn sector_ground_matches_symmetric_state() {
        let v = -0.25;
        let h = h_const(6, v);
        for n in 0..=6 {
            let s = lowest_state_in_sector(&h, 6, n).unwrap();
            let sym = symmetric_state(6, n).unwrap();
            assert!((s.energy.unwrap() - omega_n_constant(6, n, 1.0, v)).abs() < 1e-10);
            assert!((s.amplitudes.dotc(&sym.amplitudes).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_sector_is_all_s() {
        for model in [InteractionModel::rb60(1.3), InteractionModel::SpatialDipole { v_dd: -0.5 }] {
            let h = build_h_atom(&ModelSpec::reference(model)).unwrap();
            let s = lowest_state_in_sector(&h, 6, 0).unwrap();
            assert!((s.amplitudes[63].re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn vdw_only_energies() {
        let v_pp = 0.7;
        let h = build_h_atom(&ModelSpec::reference(InteractionModel::ConstantVdw { v_pp })).unwrap();
        let e = sector_minima(&h, 6).unwrap();
        for (n, en) in e.iter().enumerate() {
            assert!((en - omega_n_vdw(6, n, 1.0, v_pp)).abs() < 1e-12);
        }
    }

    #[test]
    fn sector_rejects_bad_input() {
        let l = HilbertLayout::atoms_only(3).unwrap();
        let sx = collective_spin(&l, Axis::X).unwrap();
        assert!(matches!(
            lowest_state_in_sector(&sx, 3, 1),
            Err(Error::NotExcitationConserving { .. })
        ));
        let sp = collective_spin(&l, Axis::Plus).unwrap();
        assert!(matches!(
            lowest_state_in_sector(&sp, 3, 1),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn scan_constant_dipole_n6() {
        let grid: Vec<f64> = (0..=400).map(|k| -1.5 + 1.45 * k as f64 / 400.0).collect();
        let found = scan_degeneracies(&grid, 6, |v| Ok(h_const(6, v)), ScanOptions::default()).unwrap();
        let params: Vec<f64> = found.iter().map(|d| d.parameter).collect();
        assert_eq!(found.len(), 3, "{found:?}");
        for (d, expect) in found.iter().zip([-1.0, -1.0 / 3.0, -0.2]) {
            assert!((d.parameter - expect).abs() < 1e-8, "{params:?}");
            assert!(d.dipole_coupled());
            assert_eq!(d.multiplicity(), 2);
        }
        assert!(scan_degeneracies(&[], 6, |v| Ok(h_const(6, v)), ScanOptions::default()).is_err());
    }

    #[test]
    fn overlap_bounds() {
        let a = symmetric_state(4, 1).unwrap().amplitudes;
        let b = symmetric_state(4, 2).unwrap().amplitudes;
        let c = symmetric_state(4, 3).unwrap().amplitudes;
        assert!((overlap_pair(&a, &a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert!(overlap_pair(&c, &a, &b).unwrap().abs() < 1e-14);
        let short = DVector::from_element(3, C64::new(1.0 / 3f64.sqrt(), 0.0));
        assert!(matches!(
            overlap_pair(&a, &short, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn region_midpoints() {
        assert_eq!(constant_region(6, 1.0, -5.5), Some(0));
        assert_eq!(constant_region(6, 1.0, -4.1), Some(0));
        assert_eq!(constant_region(6, 1.0, -3.9), Some(1));
        assert_eq!(constant_region(6, 1.0, -1.9), Some(2));
        assert_eq!(constant_region(6, 1.0, 2.0), None);
    }

    #[test]
    fn chained_crossings_cluster_into_near_triple() {
        let grid: Vec<f64> = (0..=40).map(|i| 1.46 + 1e-3 * i as f64).collect();
        let family = |r: f64| build_h_atom(&ModelSpec::reference(InteractionModel::rb60(r)));
        let plain = scan_degeneracies(&grid, 6, family, ScanOptions::default()).unwrap();
        assert_eq!(plain.len(), 2);
        assert_eq!(plain[0].sectors, vec![5, 6]);
        assert_eq!(plain[1].sectors, vec![4, 5]);
        let opts = ScanOptions {
            cluster_width: 5e-3,
            ..ScanOptions::default()
        };
        let merged = scan_degeneracies(&grid, 6, family, opts).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].sectors, vec![4, 5, 6]);
        assert!((merged[0].span - (plain[1].parameter - plain[0].parameter)).abs() < 1e-9);
        assert!((merged[0].parameter - 1.48).abs() < 0.01);
    }
}
