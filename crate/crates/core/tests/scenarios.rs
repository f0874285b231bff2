mod common;

use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;

use common::{linear_response_gc, linspace, rabi_gc, symmetric_eta, KAPPA, OMEGA_C};
use rydcav::collective::{eta_symmetric, symmetric_state};
use rydcav::hamiltonians::{build_h_full, build_h_meanfield, AtomicModel, InteractionModel, ModelSpec};
use rydcav::lindblad::{long_time_state, photon_cutoff_convergence, FullQuantumOptions, QuantumBasis};
use rydcav::operators::{collective_spin, Axis, HilbertLayout};
use rydcav::steady_state::{
    critical_coupling, solve_meanfield, sweep_phase_diagram, CriticalOptions, MeanFieldProblem, Phase,
    SolverOptions, DEFAULT_EPS_SR,
};

fn dipole(v: f64) -> ModelSpec {
    ModelSpec::reference(InteractionModel::ConstantDipole { v_dd: v })
}

fn lowest(m: nalgebra::DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.min()
}

#[test]
fn weak_coupling_ground_shift_is_second_order() {
    // |ss..s, 0> couples only to |ψ_1, 1> with element √2 G at energy cost ω_a + ω_c.
    let layout = HilbertLayout::new(6, 3).unwrap();
    let e0 = -3.0;
    for g in [0.005, 0.01, 0.02] {
        let h = build_h_full(&dipole(0.0).with_coupling(g), &layout).unwrap();
        let shift = lowest(h.to_dense_real()) - e0;
        let predicted = -2.0 * g * g / (1.0 + OMEGA_C);
        assert!((shift - predicted).abs() < 2e-2 * predicted.abs(), "G={g}: {shift} vs {predicted}");
    }
}

#[test]
fn single_atom_meanfield_gap() {
    let spec = dipole(0.0).with_atoms(1).with_coupling(0.3);
    for alpha in [0.0, 0.4, -1.1] {
        let h = build_h_meanfield(&spec, C64::new(alpha, 0.7)).unwrap();
        let eig = SymmetricEigen::new(h.matrix.to_dense_real()).eigenvalues;
        let gap = eig.max() - eig.min();
        let field = 4.0 * 2f64.sqrt() * 0.3 * alpha;
        assert!((gap - (1.0 + field * field).sqrt()).abs() < 1e-12);
        assert!((h.energy_offset - OMEGA_C * (alpha * alpha + 0.49)).abs() < 1e-12);
    }
}

#[test]
fn coupling_modifier_is_twice_the_sx_matrix_element() {
    let n = 6;
    let sx = collective_spin(&HilbertLayout::atoms_only(n).unwrap(), Axis::X).unwrap();
    for k in 0..n {
        let a = symmetric_state(n, k).unwrap().amplitudes;
        let b = symmetric_state(n, k + 1).unwrap().amplitudes;
        let element = sx.matrix_element(&b, &a) * 2.0;
        assert!((element.re - eta_symmetric(n, k)).abs() < 1e-12);
        assert!(element.im.abs() < 1e-12);
    }
}

#[test]
fn bisection_threshold_matches_linear_response() {
    for v in [0.0, -0.1, -0.25, -0.5, 0.3] {
        let spec = dipole(v);
        let model = AtomicModel::full(&spec).unwrap();
        let oracle = linear_response_gc(&model.h_atom.to_dense_real(), &model.sx.to_dense_real(), 6, OMEGA_C, KAPPA);
        let p = MeanFieldProblem::full(&spec).unwrap();
        let opts = CriticalOptions {
            g_tol: 1e-6,
            ..CriticalOptions::default()
        };
        let c = critical_coupling(&p, 0.0, 2.0, &opts).unwrap();
        assert_eq!(c.unconverged, 0);
        assert!((c.value - oracle).abs() < 1e-3 * oracle, "V={v}: {} vs {oracle}", c.value);
    }
}

#[test]
fn rabi_formula_reproduces_the_free_threshold() {
    let p = MeanFieldProblem::full(&dipole(0.0)).unwrap();
    let c = critical_coupling(&p, 0.0, 1.0, &CriticalOptions::default()).unwrap();
    let expected = rabi_gc(6, 1.0, symmetric_eta(6, 0), OMEGA_C, KAPPA);
    assert!((c.value - expected).abs() < 1e-3);
    assert!((expected - 0.3227).abs() < 1e-4);
}

#[test]
fn converged_state_reproduces_its_amplitude() {
    let opts = SolverOptions::default();
    for (v, g) in [(0.0, 0.5), (-1.0 / 3.0, 0.05), (-0.2, 0.7), (-1.0, 0.3)] {
        let p = MeanFieldProblem::full(&dipole(v).with_coupling(g)).unwrap();
        let s = solve_meanfield(&p, &opts).unwrap();
        assert!(s.converged);
        let sx = p.model().sx.expectation(&s.atomic_state).re;
        let alpha = p.alpha_per_sx() * sx;
        assert!((alpha - s.alpha).norm() < 10.0 * opts.tol * (1.0 + s.alpha.norm()), "V={v} G={g}");
    }
}

#[test]
fn below_and_above_threshold() {
    let opts = SolverOptions::default();
    let np = solve_meanfield(&MeanFieldProblem::full(&dipole(0.0).with_coupling(0.25)).unwrap(), &opts).unwrap();
    assert!(np.photon_number < 1e-8);
    let sr = solve_meanfield(&MeanFieldProblem::full(&dipole(-1.0 / 3.0).with_coupling(0.05)).unwrap(), &opts).unwrap();
    assert!(sr.photon_number > 0.0);
}

#[test]
fn six_atom_phase_grid_has_funnels_and_correlations() {
    let params = linspace(-6.0, -0.5, 56);
    let couplings = linspace(0.0, 0.4, 21);
    let grid = sweep_phase_diagram(
        &params,
        &couplings,
        |inv| MeanFieldProblem::full(&dipole(1.0 / inv)),
        DEFAULT_EPS_SR,
        &SolverOptions::default(),
    )
    .unwrap();
    assert_eq!(grid.unconverged(), 0);
    for i in 0..params.len() {
        assert_eq!(grid.cell(i, 0).phase, Phase::Normal);
        for j in 0..couplings.len() {
            let c = grid.cell(i, j);
            match c.phase {
                Phase::Superradiant => assert!(c.sx.abs() > 0.0),
                Phase::Normal => assert!(c.sx.abs() < 1e-8),
            }
        }
    }
    let row = |x: f64| params.iter().position(|p| (p - x).abs() < 1e-9).unwrap();
    for centre in [-5.0, -3.0, -1.0] {
        let at = grid.onset(row(centre)).unwrap();
        assert_eq!(at, couplings[1], "1/V = {centre}");
        for side in [centre - 0.5, centre + 0.5] {
            assert!(grid.onset(row(side)).unwrap_or(f64::INFINITY) > at, "1/V = {side}");
        }
    }
}

#[test]
fn normal_phase_lindblad_photons_settle_low() {
    let opts = FullQuantumOptions {
        t_final: Some(50.0 / KAPPA),
        ..FullQuantumOptions::default()
    };
    let r = long_time_state(&dipole(0.0).with_coupling(0.1), QuantumBasis::Symmetric, 4, &opts).unwrap();
    assert!(r.photon_number < 0.1, "{}", r.photon_number);
    assert!(r.max_trace_error < 1e-8);
    assert!(r.tail_population < 1e-6);
}

#[test]
fn critical_interaction_raises_lindblad_photons() {
    let opts = FullQuantumOptions {
        t_final: Some(50.0 / KAPPA),
        ..FullQuantumOptions::default()
    };
    let free = long_time_state(&dipole(0.0).with_coupling(0.1), QuantumBasis::Symmetric, 4, &opts).unwrap();
    let crit = long_time_state(&dipole(-1.0 / 3.0).with_coupling(0.1), QuantumBasis::Symmetric, 6, &opts).unwrap();
    assert!(crit.photon_number > 5.0 * free.photon_number);
    assert!(crit.max_trace_error < 1e-8);
}

#[test]
fn required_cutoff_grows_with_coupling() {
    let cutoffs = [1, 2, 3, 4, 6, 8, 10];
    let opts = FullQuantumOptions {
        t_final: Some(100.0),
        ..FullQuantumOptions::default()
    };
    let study = |g: f64| {
        photon_cutoff_convergence(&dipole(-1.0 / 3.0).with_coupling(g), QuantumBasis::Symmetric, &cutoffs, &opts)
            .unwrap()
    };
    let weak = study(0.02);
    let strong = study(0.2);
    assert!(strong.chosen > weak.chosen, "{} vs {}", strong.chosen, weak.chosen);
    assert!(strong.result.photon_number > weak.result.photon_number);
}
