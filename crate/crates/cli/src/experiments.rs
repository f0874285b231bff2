//! Experiment implementations. Each one turns a resolved [`Config`] into
//! result tables, one per figure panel.

use rayon::prelude::*;
use serde_json::json;

use rydcav::collective::{
    constant_region, lowest_state_in_sector, omega_n_constant, overlap_pair, rabi_critical_g,
    rabi_params_from_states, scan_degeneracies, sector_minima, symmetric_state, Degeneracy, ScanOptions,
};
use rydcav::hamiltonians::{build_h_atom, AtomicModel, InteractionModel, ModelSpec};
use rydcav::lindblad::{photon_cutoff_convergence, FullQuantumOptions, QuantumBasis};
use rydcav::steady_state::{
    critical_coupling, solve_meanfield, sweep_phase_diagram, BracketStatus, CriticalCoupling, MeanFieldProblem,
    Phase, PhaseGrid,
};
use rydcav::Result;

use crate::config::{Basis, Config, Experiment};
use crate::output::{Report, ResultTable};

/// Solve bookkeeping for the failure-fraction check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    pub solves: usize,
    pub failures: usize,
    pub notes: Vec<String>,
}

impl Stats {
    fn add(&mut self, solves: usize, failures: usize) {
        self.solves += solves;
        self.failures += failures;
    }

    pub fn failure_fraction(&self) -> f64 {
        if self.solves == 0 {
            0.0
        } else {
            self.failures as f64 / self.solves as f64
        }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<ResultTable>,
    pub reports: Vec<Report>,
    pub stats: Stats,
}

pub fn run(config: &Config) -> Result<Outcome> {
    let mut out = Outcome::default();
    match config.experiment {
        Experiment::Fig2a => fig2a(config, &mut out)?,
        Experiment::Fig2bc => fig2bc(config, &mut out)?,
        Experiment::Fig2d => fig2d(config, &mut out)?,
        Experiment::Fig3 => fig3(config, &mut out)?,
        Experiment::Fig4 | Experiment::S5 => realistic(config, &mut out)?,
        Experiment::S1 => s1(config, &mut out)?,
        Experiment::S2 => s2(config, &mut out)?,
        Experiment::S3 => s3(config, &mut out)?,
        Experiment::S4 => s4(config, &mut out)?,
        Experiment::Custom => custom(config, &mut out)?,
    }
    Ok(out)
}

fn dipole(v: f64) -> InteractionModel {
    InteractionModel::ConstantDipole { v_dd: v }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn status_code(s: BracketStatus) -> f64 {
    match s {
        BracketStatus::Bracketed => 0.0,
        BracketStatus::SuperradiantEverywhere => 1.0,
        BracketStatus::NormalEverywhere => 2.0,
    }
}

fn critical(config: &Config, problem: &MeanFieldProblem, stats: &mut Stats) -> Result<CriticalCoupling> {
    let c = critical_coupling(problem, 0.0, config.grid.g_max.unwrap(), &config.critical_options())?;
    stats.add(c.solves, c.unconverged);
    Ok(c)
}

/// Critical couplings for many problems in parallel, in input order;
/// `label` names each problem in failure notes.
fn critical_many(
    config: &Config,
    problems: &[MeanFieldProblem],
    label: impl Fn(usize) -> String,
    stats: &mut Stats,
) -> Result<Vec<CriticalCoupling>> {
    let results: Vec<CriticalCoupling> = problems
        .par_iter()
        .map(|p| critical_coupling(p, 0.0, config.grid.g_max.unwrap(), &config.critical_options()))
        .collect::<Result<_>>()?;
    for (i, c) in results.iter().enumerate() {
        stats.add(c.solves, c.unconverged);
        if c.unconverged > 0 {
            stats.notes.push(format!(
                "critical coupling at {}: {} of {} solves unconverged",
                label(i),
                c.unconverged,
                c.solves
            ));
        }
    }
    Ok(results)
}

fn phase_grid<F>(config: &Config, params: &[f64], family: F, stats: &mut Stats) -> Result<PhaseGrid>
where
    F: Fn(f64) -> Result<MeanFieldProblem> + Sync,
{
    let couplings = config.grid.coupling.unwrap().values();
    let grid = sweep_phase_diagram(params, &couplings, family, config.solver.eps_sr.unwrap(), &config.solver_options())?;
    stats.add(grid.cells.len(), grid.unconverged());
    Ok(grid)
}

/// Photon-number and `<S^x>` panels of a phase grid.
fn phase_tables(grid: &PhaseGrid, name: &str, photon_panel: &str, sx_panel: &str) -> (ResultTable, ResultTable) {
    let mut photons = ResultTable::new(photon_panel, &[name, "g", "photon_number", "superradiant", "converged"]);
    let mut sx = ResultTable::new(sx_panel, &[name, "g", "sx", "superradiant", "converged"]);
    for (i, &p) in grid.parameter.iter().enumerate() {
        for (j, &g) in grid.coupling.iter().enumerate() {
            let c = grid.cell(i, j);
            let sr = flag(c.phase == Phase::Superradiant);
            photons.push(vec![p, g, c.photon_number, sr, flag(c.converged)]);
            sx.push(vec![p, g, c.sx, sr, flag(c.converged)]);
        }
    }
    (photons, sx)
}

struct FullQuantumPoint {
    photon_number: f64,
    sx: f64,
    cutoff: f64,
    tail: f64,
    steady: f64,
    final_time: f64,
}

impl FullQuantumPoint {
    const MISSING: Self = Self {
        photon_number: f64::NAN,
        sx: f64::NAN,
        cutoff: f64::NAN,
        tail: f64::NAN,
        steady: f64::NAN,
        final_time: f64::NAN,
    };
}

fn full_quantum_options(config: &Config) -> FullQuantumOptions {
    let f = &config.full_quantum;
    FullQuantumOptions {
        t_final: f.t_final,
        max_time: f.max_time.unwrap(),
        steady_tol: f.steady_tol.unwrap(),
        ..FullQuantumOptions::default()
    }
}

/// Cutoff-converged long-time states for `(spec, G)` pairs; failures become
/// missing values and are counted.
fn full_quantum_points(config: &Config, specs: &[ModelSpec], stats: &mut Stats) -> Vec<FullQuantumPoint> {
    let basis = match config.full_quantum.basis.unwrap() {
        Basis::Full => QuantumBasis::Full,
        Basis::Symmetric => QuantumBasis::Symmetric,
    };
    let cutoffs = config.full_quantum.cutoffs.clone().unwrap();
    let opts = full_quantum_options(config);
    let results: Vec<Result<FullQuantumPoint>> = specs
        .par_iter()
        .map(|spec| {
            let study = photon_cutoff_convergence(spec, basis, &cutoffs, &opts)?;
            let r = &study.result;
            Ok(FullQuantumPoint {
                photon_number: r.photon_number,
                sx: r.sx,
                cutoff: study.chosen as f64,
                tail: r.tail_population,
                steady: flag(r.steady),
                final_time: r.final_time,
            })
        })
        .collect();
    results
        .into_iter()
        .zip(specs)
        .map(|(r, spec)| {
            stats.add(1, usize::from(r.is_err()));
            r.unwrap_or_else(|e| {
                stats.notes.push(format!("full quantum at G = {}: {e}", spec.coupling));
                FullQuantumPoint::MISSING
            })
        })
        .collect()
}

fn fig2a(config: &Config, out: &mut Outcome) -> Result<()> {
    let couplings = config.grid.coupling.unwrap().values();
    let interactions = config.grid.interactions.clone().unwrap();
    let opts = config.solver_options();
    let fq_enabled = config.full_quantum.enabled == Some(true);
    let fq_couplings = config.full_quantum.couplings.clone().unwrap_or_default();

    let mut table = ResultTable::new(
        "a",
        &[
            "v_dd",
            "g",
            "photon_number",
            "sx",
            "converged",
            "fq_photon_number",
            "fq_sx",
            "fq_cutoff",
            "fq_tail_population",
            "fq_steady",
            "fq_final_time",
        ],
    );
    for &v in &interactions {
        let spec = config.spec(dipole(v));
        let problem = MeanFieldProblem::full(&spec)?;
        let mf: Vec<_> = couplings
            .par_iter()
            .map(|&g| solve_meanfield(&problem.with_coupling(g), &opts))
            .collect::<Result<_>>()?;
        out.stats.add(mf.len(), mf.iter().filter(|s| !s.converged).count());

        let on_fq: Vec<bool> = couplings
            .iter()
            .map(|g| fq_enabled && fq_couplings.iter().any(|c| (c - g).abs() <= 1e-9 * (1.0 + c.abs())))
            .collect();
        let specs: Vec<ModelSpec> = couplings
            .iter()
            .zip(&on_fq)
            .filter(|(_, &on)| on)
            .map(|(&g, _)| spec.with_coupling(g))
            .collect();
        let mut fq = full_quantum_points(config, &specs, &mut out.stats).into_iter();
        for ((&g, s), &on) in couplings.iter().zip(&mf).zip(&on_fq) {
            let q = if on { fq.next().unwrap() } else { FullQuantumPoint::MISSING };
            table.push(vec![
                v,
                g,
                s.photon_number,
                s.sx,
                flag(s.converged),
                q.photon_number,
                q.sx,
                q.cutoff,
                q.tail,
                q.steady,
                q.final_time,
            ]);
        }
    }
    out.tables.push(table);
    Ok(())
}

fn inverse_dipole_family(config: &Config) -> impl Fn(f64) -> Result<MeanFieldProblem> + Sync + '_ {
    move |inv| MeanFieldProblem::full(&config.spec(dipole(1.0 / inv)))
}

fn fig2bc(config: &Config, out: &mut Outcome) -> Result<()> {
    let params = config.grid.inverse_interaction.unwrap().values();
    let grid = phase_grid(config, &params, inverse_dipole_family(config), &mut out.stats)?;
    let (b, c) = phase_tables(&grid, "inv_v_dd", "b", "c");
    out.tables.extend([b, c]);
    Ok(())
}

fn fig2d(config: &Config, out: &mut Outcome) -> Result<()> {
    let params = config.grid.inverse_interaction.unwrap().values();
    let mut table = ResultTable::new("d", &["inv_v_dd", "kappa", "g_c", "g_lower", "g_upper", "status"]);
    for &kappa in config.grid.kappas.as_ref().unwrap() {
        let problems: Vec<MeanFieldProblem> = params
            .iter()
            .map(|&x| MeanFieldProblem::full(&config.spec(dipole(1.0 / x)).with_kappa(kappa)))
            .collect::<Result<_>>()?;
        let label = |i: usize| format!("1/V_dd = {}, kappa = {kappa}", params[i]);
        let results = critical_many(config, &problems, label, &mut out.stats)?;
        for (&x, c) in params.iter().zip(&results) {
            table.push(vec![x, kappa, c.value, c.lower, c.upper, status_code(c.status)]);
        }
    }
    out.tables.push(table);
    Ok(())
}

fn fig3(config: &Config, out: &mut Outcome) -> Result<()> {
    let n_atoms = config.model.n_atoms.unwrap();
    let omega_a = config.model.omega_a.unwrap();
    let (omega_c, kappa) = (config.model.omega_c.unwrap(), config.model.kappa.unwrap());
    let params = config.grid.inverse_interaction.unwrap().values();

    let mut levels = ResultTable::new("a", &["inv_v_dd", "n", "omega_n"]);
    for &x in &params {
        for n in 0..=n_atoms {
            levels.push(vec![x, n as f64, omega_n_constant(n_atoms, n, omega_a, 1.0 / x)]);
        }
    }

    let problems: Vec<MeanFieldProblem> =
        params.iter().map(|&x| inverse_dipole_family(config)(x)).collect::<Result<_>>()?;
    let full = critical_many(config, &problems, |i| format!("1/V_dd = {}", params[i]), &mut out.stats)?;
    let mut boundary = ResultTable::new("b", &["inv_v_dd", "region_n", "g_c_full", "status", "g_c_rabi"]);
    for (&x, c) in params.iter().zip(&full) {
        let region = constant_region(n_atoms, omega_a, x);
        let rabi = match region {
            Some(n) => {
                let p = rydcav::collective::rabi_params(n_atoms, n, omega_a, 1.0 / x)?;
                rabi_critical_g(&p, n_atoms, omega_c, kappa)?
            }
            None => f64::NAN,
        };
        boundary.push(vec![
            x,
            region.map_or(f64::NAN, |n| n as f64),
            c.value,
            status_code(c.status),
            rabi,
        ]);
    }

    // Overlap of the steady state with the region's central degenerate pair.
    let couplings = config.grid.coupling.unwrap().values();
    let opts = config.solver_options();
    let cells: Vec<(f64, f64)> = params
        .iter()
        .flat_map(|&x| couplings.iter().map(move |&g| (x, g)))
        .collect();
    let rows: Vec<(Vec<f64>, bool)> = cells
        .par_iter()
        .map(|&(x, g)| -> Result<(Vec<f64>, bool)> {
            let p = inverse_dipole_family(config)(x)?.with_coupling(g);
            let s = solve_meanfield(&p, &opts)?;
            let region = constant_region(n_atoms, omega_a, x);
            let overlap = match region {
                Some(n) => {
                    let a = symmetric_state(n_atoms, n)?.amplitudes;
                    let b = symmetric_state(n_atoms, n + 1)?.amplitudes;
                    overlap_pair(&s.atomic_state, &a, &b)?
                }
                None => f64::NAN,
            };
            let sr = Phase::classify(s.photon_number, n_atoms, config.solver.eps_sr.unwrap()) == Phase::Superradiant;
            Ok((
                vec![x, g, region.map_or(f64::NAN, |n| n as f64), overlap, s.photon_number, flag(sr)],
                s.converged,
            ))
        })
        .collect::<Result<_>>()?;
    out.stats.add(rows.len(), rows.iter().filter(|r| !r.1).count());
    let mut overlap = ResultTable::new(
        "b_overlap",
        &["inv_v_dd", "g", "region_n", "overlap", "photon_number", "superradiant"],
    );
    for (r, _) in rows {
        overlap.push(r);
    }
    out.tables.extend([levels, boundary, overlap]);
    Ok(())
}

/// Dipole-coupled pair `(n, n+1)` of the crossing nearest to `x`.
fn nearest_pair(crossings: &[Degeneracy], x: f64) -> Option<usize> {
    crossings
        .iter()
        .filter(|d| d.sectors.len() == 2 && d.dipole_coupled())
        .min_by(|a, b| (a.parameter - x).abs().total_cmp(&(b.parameter - x).abs()))
        .map(|d| d.sectors[0])
}

/// Rabi threshold from the lowest states of sectors `n` and `n+1`.
fn sector_rabi_g(config: &Config, spec: &ModelSpec, n: usize) -> Result<f64> {
    let h = build_h_atom(spec)?;
    let lower = lowest_state_in_sector(&h, spec.n_atoms, n)?;
    let upper = lowest_state_in_sector(&h, spec.n_atoms, n + 1)?;
    let p = rabi_params_from_states(&lower, &upper, spec.n_atoms)?;
    rabi_critical_g(&p, spec.n_atoms, config.model.omega_c.unwrap(), config.model.kappa.unwrap())
}

fn degeneracy_json(degs: &[Degeneracy]) -> serde_json::Value {
    json!(degs
        .iter()
        .map(|d| json!({
            "parameter": d.parameter,
            "sectors": d.sectors,
            "multiplicity": d.multiplicity(),
            "dipole_coupled": d.dipole_coupled(),
            "gap": d.gap,
            "ground_energy": d.ground_energy,
            "span": d.span,
        }))
        .collect::<Vec<_>>())
}

/// Sector minima, degeneracies and critical couplings along a family.
fn degeneracy_study<F>(
    config: &Config,
    name: &str,
    params: &[f64],
    interaction: F,
    panels: (&str, &str),
    out: &mut Outcome,
) -> Result<()>
where
    F: Fn(f64) -> InteractionModel + Sync,
{
    let n_atoms = config.model.n_atoms.unwrap();
    let omega_a = config.model.omega_a.unwrap();
    let family = |p: f64| build_h_atom(&config.spec(interaction(p)));

    let minima: Vec<Vec<f64>> = params
        .par_iter()
        .map(|&p| sector_minima(&family(p)?, n_atoms))
        .collect::<Result<_>>()?;
    let mut energies = ResultTable::new(panels.0, &[name, "n", "omega_n"]);
    for (&p, e) in params.iter().zip(&minima) {
        for (n, &w) in e.iter().enumerate() {
            energies.push(vec![p, n as f64, w]);
        }
    }

    let base = ScanOptions::for_omega_a(omega_a);
    let crossings = scan_degeneracies(params, n_atoms, family, base)?;
    let width = config.grid.cluster_width.unwrap_or(0.0);
    let clustered = if width > 0.0 {
        scan_degeneracies(params, n_atoms, family, ScanOptions { cluster_width: width, ..base })?
    } else {
        crossings.clone()
    };
    out.reports.push(Report {
        name: "degeneracies".into(),
        body: json!({
            "parameter": name,
            "cluster_width": width,
            "crossings": degeneracy_json(&crossings),
            "points": degeneracy_json(&clustered),
        }),
    });

    let problems: Vec<MeanFieldProblem> = params
        .iter()
        .map(|&p| MeanFieldProblem::full(&config.spec(interaction(p))))
        .collect::<Result<_>>()?;
    let full = critical_many(config, &problems, |i| format!("{name} = {}", params[i]), &mut out.stats)?;
    let rabi: Vec<(f64, f64)> = params
        .par_iter()
        .map(|&p| -> Result<(f64, f64)> {
            match nearest_pair(&crossings, p) {
                Some(n) => Ok((n as f64, sector_rabi_g(config, &config.spec(interaction(p)), n)?)),
                None => Ok((f64::NAN, f64::NAN)),
            }
        })
        .collect::<Result<_>>()?;
    let mut boundary = ResultTable::new(panels.1, &[name, "g_c_full", "status", "rabi_n", "g_c_rabi"]);
    for ((&p, c), (n, g)) in params.iter().zip(&full).zip(rabi) {
        boundary.push(vec![p, c.value, status_code(c.status), n, g]);
    }
    out.tables.extend([energies, boundary]);
    Ok(())
}

fn realistic(config: &Config, out: &mut Outcome) -> Result<()> {
    let radii = config.grid.radius.unwrap().values();
    degeneracy_study(config, "r0_um", &radii, InteractionModel::rb60, ("a", "b"), out)
}

fn s1(config: &Config, out: &mut Outcome) -> Result<()> {
    let n_atoms = config.model.n_atoms.unwrap();
    let couplings = config.grid.coupling.unwrap().values();
    let cutoffs = config.grid.symmetric_cutoffs.clone().unwrap();
    let opts = config.solver_options();

    let mut columns = vec!["v_dd".to_string(), "g".into(), "photon_full".into()];
    columns.extend(cutoffs.iter().map(|k| format!("photon_nc{k}")));
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut convergence = ResultTable::new("ab", &column_refs);
    for &v in config.grid.interactions.as_ref().unwrap() {
        let spec = config.spec(dipole(v));
        let mut models = vec![MeanFieldProblem::full(&spec)?];
        for &k in &cutoffs {
            models.push(MeanFieldProblem::symmetric(&spec, k)?);
        }
        let cells: Vec<(usize, f64)> = (0..models.len())
            .flat_map(|m| couplings.iter().map(move |&g| (m, g)))
            .collect();
        let sols: Vec<_> = cells
            .par_iter()
            .map(|&(m, g)| solve_meanfield(&models[m].with_coupling(g), &opts))
            .collect::<Result<_>>()?;
        out.stats.add(sols.len(), sols.iter().filter(|s| !s.converged).count());
        for (j, &g) in couplings.iter().enumerate() {
            let mut row = vec![v, g];
            row.extend((0..models.len()).map(|m| sols[m * couplings.len() + j].photon_number));
            convergence.push(row);
        }
    }

    let params = config.grid.inverse_interaction.unwrap().values();
    let grid = phase_grid(
        config,
        &params,
        |x| MeanFieldProblem::symmetric(&config.spec(dipole(1.0 / x)), n_atoms),
        &mut out.stats,
    )?;
    let (photons, _) = phase_tables(&grid, "inv_v_dd", "c", "c_sx");
    out.tables.extend([convergence, photons]);
    Ok(())
}

fn s2(config: &Config, out: &mut Outcome) -> Result<()> {
    let n_atoms = config.model.n_atoms.unwrap();
    let params = config.grid.inverse_interaction.unwrap().values();
    let grid = phase_grid(
        config,
        &params,
        |x| MeanFieldProblem::symmetric(&config.spec(dipole(1.0 / x)), n_atoms),
        &mut out.stats,
    )?;
    let (photons, sx) = phase_tables(&grid, "inv_v_dd", "phase", "phase_sx");
    out.tables.extend([photons, sx]);
    Ok(())
}

fn s3(config: &Config, out: &mut Outcome) -> Result<()> {
    let params = config.grid.inverse_interaction.unwrap().values();
    let constant: Vec<MeanFieldProblem> =
        params.iter().map(|&x| inverse_dipole_family(config)(x)).collect::<Result<_>>()?;
    let label = |i: usize| format!("1/V_dd = {} (constant)", params[i]);
    let constant = critical_many(config, &constant, label, &mut out.stats)?;
    let spatial = |x: f64| InteractionModel::SpatialDipole { v_dd: 1.0 / x };
    degeneracy_study(config, "inv_v_dd", &params, spatial, ("energies", "critical"), out)?;
    let table = out.tables.last_mut().expect("critical table");
    table.columns.push("g_c_constant".into());
    for (row, c) in table.rows.iter_mut().zip(&constant) {
        row.push(c.value);
    }
    Ok(())
}

fn s4(config: &Config, out: &mut Outcome) -> Result<()> {
    let n_atoms = config.model.n_atoms.unwrap();
    let params = config.grid.vdw.unwrap().values();
    let vdw = |v: f64| InteractionModel::ConstantVdw { v_pp: v };

    let rows: Vec<Vec<f64>> = params
        .par_iter()
        .map(|&v| -> Result<Vec<f64>> {
            let h = build_h_atom(&config.spec(vdw(v)))?;
            let e = sector_minima(&h, n_atoms)?;
            let ground = (0..e.len()).min_by(|&a, &b| e[a].total_cmp(&e[b])).unwrap();
            let coupled = [ground.wrapping_sub(1), ground + 1]
                .into_iter()
                .filter(|&k| k < e.len())
                .map(|k| e[k] - e[ground])
                .fold(f64::INFINITY, f64::min);
            let model = AtomicModel::full(&config.spec(vdw(v)))?;
            let spectrum = nalgebra::SymmetricEigen::new(model.h_atom.to_dense_real()).eigenvalues;
            let mut sorted: Vec<f64> = spectrum.iter().copied().collect();
            sorted.sort_by(f64::total_cmp);
            Ok(vec![v, sorted[1] - sorted[0], coupled, ground as f64])
        })
        .collect::<Result<_>>()?;
    let mut gaps = ResultTable::new("a", &["v_pp", "gap_first_excited", "gap_dipole_coupled", "ground_sector"]);
    for r in rows {
        gaps.push(r);
    }

    let grid = phase_grid(config, &params, |v| MeanFieldProblem::full(&config.spec(vdw(v))), &mut out.stats)?;
    let (b, c) = phase_tables(&grid, "v_pp", "b", "c");
    out.tables.extend([gaps, b, c]);
    Ok(())
}

fn custom(config: &Config, out: &mut Outcome) -> Result<()> {
    let spec = config.spec(config.model.interaction.unwrap());
    let problem = MeanFieldProblem::full(&spec)?;
    let couplings = config.grid.coupling.unwrap().values();
    let opts = config.solver_options();
    let sols: Vec<_> = couplings
        .par_iter()
        .map(|&g| solve_meanfield(&problem.with_coupling(g), &opts))
        .collect::<Result<_>>()?;
    out.stats.add(sols.len(), sols.iter().filter(|s| !s.converged).count());
    let mut sweep = ResultTable::new("sweep", &["g", "photon_number", "sx", "converged", "iterations"]);
    for (&g, s) in couplings.iter().zip(&sols) {
        sweep.push(vec![g, s.photon_number, s.sx, flag(s.converged), s.iterations as f64]);
    }
    let c = critical(config, &problem, &mut out.stats)?;
    let mut crit = ResultTable::new("critical", &["g_c", "g_lower", "g_upper", "status"]);
    crit.push(vec![c.value, c.lower, c.upper, status_code(c.status)]);
    out.tables.extend([sweep, crit]);

    if config.full_quantum.enabled == Some(true) {
        let fq_couplings = config.full_quantum.couplings.clone().unwrap();
        let specs: Vec<ModelSpec> = fq_couplings.iter().map(|&g| spec.with_coupling(g)).collect();
        let points = full_quantum_points(config, &specs, &mut out.stats);
        let mut fq = ResultTable::new(
            "full_quantum",
            &["g", "photon_number", "sx", "cutoff", "tail_population", "steady", "final_time"],
        );
        for (&g, q) in fq_couplings.iter().zip(points) {
            fq.push(vec![g, q.photon_number, q.sx, q.cutoff, q.tail, q.steady, q.final_time]);
        }
        out.tables.push(fq);
    }
    Ok(())
}
