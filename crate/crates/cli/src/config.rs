//! Experiment configuration: strict TOML schema, per-experiment defaults and
//! validation.
//!
//! A config is resolved by filling every field the experiment uses with its
//! default. The resolved form is what `validate` prints and what every output
//! table embeds, and resolving it again is the identity.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use rydcav::hamiltonians::{AtomicForm, InteractionModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig2a,
    Fig2bc,
    Fig2d,
    Fig3,
    Fig4,
    S1,
    S2,
    S3,
    S4,
    S5,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::Fig2a,
        Experiment::Fig2bc,
        Experiment::Fig2d,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::S1,
        Experiment::S2,
        Experiment::S3,
        Experiment::S4,
        Experiment::S5,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2a => "fig2a",
            Experiment::Fig2bc => "fig2bc",
            Experiment::Fig2d => "fig2d",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::S1 => "s1",
            Experiment::S2 => "s2",
            Experiment::S3 => "s3",
            Experiment::S4 => "s4",
            Experiment::S5 => "s5",
            Experiment::Custom => "custom",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::Fig2a => "photon number vs coupling for several V_dd, mean field with full-quantum points",
            Experiment::Fig2bc => "N=6 phase diagram over (1/V_dd, G): photon number and <S^x>",
            Experiment::Fig2d => "critical coupling vs 1/V_dd for several cavity decay rates",
            Experiment::Fig3 => "symmetric-state energies, Rabi vs full critical coupling, steady-state overlap",
            Experiment::Fig4 => "realistic Rb potentials vs R0: sector minima, degeneracies, critical coupling",
            Experiment::S1 => "symmetric-subspace convergence in N_c and the N_c=N phase diagram",
            Experiment::S2 => "N=20 phase diagram from the symmetric subspace",
            Experiment::S3 => "critical coupling for the distance-dependent dipole interaction",
            Experiment::S4 => "van der Waals-only interaction: gaps and phase diagram",
            Experiment::S5 => "realistic potentials near the three-fold point around R0=1.48 um",
            Experiment::Custom => "user-defined model: mean-field sweep, critical coupling, optional Lindblad",
        }
    }

    fn uses(self) -> Uses {
        use Experiment::*;
        let mut u = Uses::default();
        match self {
            Fig2a => {
                u.coupling = true;
                u.interactions = true;
                u.full_quantum = true;
            }
            Fig2bc | S2 => {
                u.coupling = true;
                u.inverse_interaction = true;
            }
            Fig2d => {
                u.inverse_interaction = true;
                u.kappas = true;
                u.g_max = true;
            }
            Fig3 => {
                u.coupling = true;
                u.inverse_interaction = true;
                u.g_max = true;
            }
            Fig4 | S5 => {
                u.radius = true;
                u.g_max = true;
                u.cluster_width = true;
            }
            S1 => {
                u.coupling = true;
                u.inverse_interaction = true;
                u.interactions = true;
                u.symmetric_cutoffs = true;
            }
            S3 => {
                u.inverse_interaction = true;
                u.g_max = true;
            }
            S4 => {
                u.coupling = true;
                u.vdw = true;
            }
            Custom => {
                u.coupling = true;
                u.g_max = true;
                u.full_quantum = true;
                u.interaction = true;
            }
        }
        u
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Default)]
struct Uses {
    coupling: bool,
    inverse_interaction: bool,
    interactions: bool,
    kappas: bool,
    radius: bool,
    vdw: bool,
    symmetric_cutoffs: bool,
    g_max: bool,
    cluster_width: bool,
    full_quantum: bool,
    interaction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acceleration {
    None,
    Aitken,
    Secant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Full,
    Symmetric,
}

/// Inclusive range sampled at `points` evenly spaced values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Range {
    pub const fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + step * i as f64).collect()
    }

    fn check(&self, what: &str) -> Option<String> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            Some(format!("{what}: bounds must be finite"))
        } else if self.points == 0 {
            Some(format!("{what}: points must be at least 1"))
        } else if self.max < self.min || (self.points > 1 && self.max == self.min) {
            Some(format!("{what}: empty range [{}, {}]", self.min, self.max))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atomic_form: Option<AtomicForm>,
    /// Only for `custom`; the figure experiments fix their own interaction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction: Option<InteractionModel>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceleration: Option<Acceleration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degeneracy_tol: Option<f64>,
    /// SR threshold on `|α|²/N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_sr: Option<f64>,
    /// Bisection resolution of the critical coupling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_tol: Option<f64>,
    /// Largest tolerated fraction of unconverged solves before the run fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_failure_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Range>,
    /// Grid over `1/V_dd` in units of `1/ω_a`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse_interaction: Option<Range>,
    /// Explicit `V_dd` values for curve families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interactions: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappas: Option<Vec<f64>>,
    /// Lattice constant `R0` in µm.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<Range>,
    /// Van der Waals shift `V_pp`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vdw: Option<Range>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetric_cutoffs: Option<Vec<usize>>,
    /// Upper end of the critical-coupling bracket.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_max: Option<f64>,
    /// Chained crossings closer than this are reported as one multi-fold point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_width: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullQuantumSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enabled: Option<bool>,
    /// Couplings at which the Lindblad equation is integrated; each must lie
    /// on the mean-field coupling grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    /// Candidate photon cutoffs, increasing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<usize>>,
    /// Fixed horizon; the gap-aware default is used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Recorded in the metadata; every solver is deterministic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub full_quantum: FullQuantumSection,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// A config problem with an optional 1-based line in the source file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

const THIRD: f64 = -1.0 / 3.0;

/// 1/V grid through -5, -3, -1 in steps of 2/21 that never lands on 0.
const INVERSE_DEFAULT: Range = Range::new(-5.0 - 20.0 / 21.0, 3.0, 95);

impl Config {
    /// Parses and resolves a config, collecting every problem found.
    pub fn load(source: &str) -> Result<Config, Vec<Issue>> {
        let raw: Config = toml::from_str(source).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(source, s.start));
            vec![Issue {
                message: e.message().trim().to_string(),
                line,
            }]
        })?;
        raw.resolve(source)
    }

    fn resolve(mut self, source: &str) -> Result<Config, Vec<Issue>> {
        let mut issues = Vec::new();
        let u = self.experiment.uses();
        let reject = |set: bool, used: bool, section: &str, key: &str, issues: &mut Vec<Issue>| {
            if set && !used {
                issues.push(Issue {
                    message: format!("`{section}.{key}` is not used by experiment `{}`", self.experiment),
                    line: locate(source, section, key),
                });
            }
        };
        let g = &self.grid;
        reject(g.coupling.is_some(), u.coupling, "grid", "coupling", &mut issues);
        reject(g.inverse_interaction.is_some(), u.inverse_interaction, "grid", "inverse_interaction", &mut issues);
        reject(g.interactions.is_some(), u.interactions, "grid", "interactions", &mut issues);
        reject(g.kappas.is_some(), u.kappas, "grid", "kappas", &mut issues);
        reject(g.radius.is_some(), u.radius, "grid", "radius", &mut issues);
        reject(g.vdw.is_some(), u.vdw, "grid", "vdw", &mut issues);
        reject(g.symmetric_cutoffs.is_some(), u.symmetric_cutoffs, "grid", "symmetric_cutoffs", &mut issues);
        reject(g.g_max.is_some(), u.g_max, "grid", "g_max", &mut issues);
        reject(g.cluster_width.is_some(), u.cluster_width, "grid", "cluster_width", &mut issues);
        reject(self.model.interaction.is_some(), u.interaction, "model", "interaction", &mut issues);
        reject(
            !is_default(&self.full_quantum),
            u.full_quantum,
            "full_quantum",
            "*",
            &mut issues,
        );
        if !issues.is_empty() {
            return Err(issues);
        }

        self.fill_defaults(&u);
        self.check(source, &mut issues);
        if issues.is_empty() {
            Ok(self)
        } else {
            Err(issues)
        }
    }

    fn fill_defaults(&mut self, u: &Uses) {
        use Experiment::*;
        let e = self.experiment;
        self.output_dir.get_or_insert_with(|| PathBuf::from("results"));
        self.format.get_or_insert(Format::Csv);
        self.seed.get_or_insert(0);

        let m = &mut self.model;
        m.n_atoms.get_or_insert(if e == S2 { 20 } else { 6 });
        m.omega_a.get_or_insert(1.0);
        m.omega_c.get_or_insert(0.75);
        m.kappa.get_or_insert(0.25);
        m.atomic_form.get_or_insert(AtomicForm::Pairwise);
        if u.interaction {
            m.interaction.get_or_insert(InteractionModel::ConstantDipole { v_dd: 0.0 });
        }

        let s = &mut self.solver;
        s.tol.get_or_insert(1e-10);
        s.max_iter.get_or_insert(20_000);
        s.damping.get_or_insert(0.5);
        s.seed_scale.get_or_insert(0.1);
        s.acceleration.get_or_insert(Acceleration::Secant);
        s.degeneracy_tol.get_or_insert(1e-10);
        s.eps_sr.get_or_insert(rydcav::steady_state::DEFAULT_EPS_SR);
        s.g_tol.get_or_insert(1e-4);
        s.max_failure_fraction.get_or_insert(0.01);

        let g = &mut self.grid;
        if u.coupling {
            g.coupling.get_or_insert(match e {
                Fig2bc | S1 => Range::new(0.0, 0.6, 61),
                Fig3 => Range::new(0.0, 0.6, 31),
                S2 => Range::new(0.0, 0.3, 50),
                S4 => Range::new(0.0, 1.0, 51),
                _ => Range::new(0.0, 1.0, 101),
            });
        }
        if u.inverse_interaction {
            g.inverse_interaction.get_or_insert(match e {
                Fig3 => Range::new(-6.0, -0.1, 60),
                S2 => Range::new(-19.8, -0.2, 50),
                S3 => Range::new(-8.0, -0.1, 80),
                _ => INVERSE_DEFAULT,
            });
        }
        if u.interactions {
            g.interactions.get_or_insert_with(|| match e {
                S1 => vec![0.0, -0.2],
                _ => vec![0.5, 0.0, -0.2, THIRD, -0.5],
            });
        }
        if u.kappas {
            g.kappas.get_or_insert_with(|| vec![0.125, 0.25, 0.5]);
        }
        if u.radius {
            g.radius.get_or_insert(match e {
                S5 => Range::new(1.46, 1.50, 81),
                _ => Range::new(1.40, 2.10, 141),
            });
        }
        if u.vdw {
            g.vdw.get_or_insert(Range::new(-2.0, 2.0, 41));
        }
        if u.symmetric_cutoffs {
            let n = self.model.n_atoms.unwrap_or(6);
            g.symmetric_cutoffs.get_or_insert_with(|| (1..=n).collect());
        }
        if u.g_max {
            g.g_max.get_or_insert(2.0);
        }
        if u.cluster_width {
            g.cluster_width.get_or_insert(if e == S5 { 5e-3 } else { 0.0 });
        }

        if u.full_quantum {
            let f = &mut self.full_quantum;
            let enabled = *f.enabled.get_or_insert(e == Fig2a);
            if enabled {
                f.couplings.get_or_insert_with(|| vec![0.0, 0.1, 0.2, 0.3]);
                f.basis.get_or_insert(if e == Fig2a { Basis::Symmetric } else { Basis::Full });
                f.cutoffs.get_or_insert_with(|| vec![2, 4, 6, 8, 12, 16]);
                f.max_time.get_or_insert(2000.0);
                f.steady_tol.get_or_insert(1e-9);
            }
        }
    }

    fn check(&self, source: &str, issues: &mut Vec<Issue>) {
        let mut bad = |section: &str, key: &str, message: String| {
            issues.push(Issue {
                message: format!("{section}.{key}: {message}"),
                line: locate(source, section, key),
            })
        };
        let m = &self.model;
        let n = m.n_atoms.unwrap();
        if n == 0 {
            bad("model", "n_atoms", "must be at least 1".into());
        }
        let full_limit = match self.experiment {
            Experiment::S2 => usize::MAX,
            _ => rydcav::operators::MAX_FULL_ATOMS,
        };
        if n > full_limit {
            bad("model", "n_atoms", format!("at most {full_limit} atoms in the full space"));
        }
        if !(m.omega_a.unwrap() > 0.0) {
            bad("model", "omega_a", "must be positive".into());
        }
        if !(m.omega_c.unwrap() > 0.0) {
            bad("model", "omega_c", "must be positive".into());
        }
        if !(m.kappa.unwrap() >= 0.0 && m.kappa.unwrap().is_finite()) {
            bad("model", "kappa", "must be finite and non-negative".into());
        }
        if let Some(i) = &m.interaction {
            if let Err(e) = i.validate() {
                bad("model", "interaction", e.to_string());
            }
        }

        let s = &self.solver;
        if !(s.tol.unwrap() > 0.0) {
            bad("solver", "tol", "must be positive".into());
        }
        if s.max_iter.unwrap() == 0 {
            bad("solver", "max_iter", "must be at least 1".into());
        }
        let d = s.damping.unwrap();
        if !(d > 0.0 && d <= 1.0) {
            bad("solver", "damping", "must lie in (0, 1]".into());
        }
        if !(s.seed_scale.unwrap() > 0.0) {
            bad("solver", "seed_scale", "must be positive".into());
        }
        if !(s.degeneracy_tol.unwrap() >= 0.0) {
            bad("solver", "degeneracy_tol", "must be non-negative".into());
        }
        if !(s.eps_sr.unwrap() > 0.0) {
            bad("solver", "eps_sr", "must be positive".into());
        }
        if !(s.g_tol.unwrap() > 0.0) {
            bad("solver", "g_tol", "must be positive".into());
        }
        let f = s.max_failure_fraction.unwrap();
        if !(0.0..=1.0).contains(&f) {
            bad("solver", "max_failure_fraction", "must lie in [0, 1]".into());
        }

        let g = &self.grid;
        for (key, r) in [
            ("coupling", g.coupling),
            ("inverse_interaction", g.inverse_interaction),
            ("radius", g.radius),
            ("vdw", g.vdw),
        ] {
            if let Some(r) = r {
                if let Some(msg) = r.check(key) {
                    bad("grid", key, msg);
                }
            }
        }
        if let Some(c) = g.coupling {
            if c.min < 0.0 {
                bad("grid", "coupling", "couplings must be non-negative".into());
            }
        }
        if let Some(r) = g.inverse_interaction {
            if r.check("").is_none() && r.values().iter().any(|x| x.abs() < 1e-12) {
                bad("grid", "inverse_interaction", "grid contains 1/V_dd = 0".into());
            }
        }
        if let Some(r) = g.radius {
            if r.min <= 0.0 {
                bad("grid", "radius", "radii must be positive".into());
            }
        }
        if let Some(v) = &g.interactions {
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                bad("grid", "interactions", "need at least one finite value".into());
            }
        }
        if let Some(k) = &g.kappas {
            if k.is_empty() || k.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                bad("grid", "kappas", "need at least one finite non-negative value".into());
            }
        }
        if let Some(c) = &g.symmetric_cutoffs {
            if c.is_empty() || c.iter().any(|&k| k == 0 || k > n) {
                bad("grid", "symmetric_cutoffs", format!("values must lie in 1..={n}"));
            }
        }
        if let Some(gm) = g.g_max {
            if !(gm > 0.0 && gm.is_finite()) {
                bad("grid", "g_max", "must be positive".into());
            }
        }
        if let Some(w) = g.cluster_width {
            if !(w >= 0.0) {
                bad("grid", "cluster_width", "must be non-negative".into());
            }
        }

        let fq = &self.full_quantum;
        if fq.enabled == Some(true) {
            let grid = g.coupling.map(|r| r.values()).unwrap_or_default();
            let couplings = fq.couplings.as_deref().unwrap_or(&[]);
            if couplings.is_empty() {
                bad("full_quantum", "couplings", "need at least one coupling".into());
            }
            for &c in couplings {
                if !grid.iter().any(|x| (x - c).abs() <= 1e-9 * (1.0 + c.abs())) {
                    bad("full_quantum", "couplings", format!("{c} is not on the grid.coupling grid"));
                }
            }
            let cut = fq.cutoffs.as_deref().unwrap_or(&[]);
            if cut.len() < 2 || cut[0] == 0 || cut.windows(2).any(|w| w[1] <= w[0]) {
                bad(
                    "full_quantum",
                    "cutoffs",
                    "need at least two positive, strictly increasing cutoffs".into(),
                );
            }
            if fq.basis == Some(Basis::Symmetric)
                && !matches!(
                    m.interaction,
                    None | Some(InteractionModel::ConstantDipole { .. })
                )
            {
                bad(
                    "full_quantum",
                    "basis",
                    "the symmetric basis requires the constant_dipole interaction".into(),
                );
            }
            if fq.basis == Some(Basis::Full) && n > 10 {
                bad("full_quantum", "basis", "the full basis is limited to 10 atoms".into());
            }
            if let Some(t) = fq.t_final {
                if !(t >= 0.0 && t.is_finite()) {
                    bad("full_quantum", "t_final", "must be finite and non-negative".into());
                }
            }
            if !(fq.max_time.unwrap() > 0.0) {
                bad("full_quantum", "max_time", "must be positive".into());
            }
            if !(fq.steady_tol.unwrap() > 0.0) {
                bad("full_quantum", "steady_tol", "must be positive".into());
            }
        }
    }

    /// Resolved config as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn spec(&self, interaction: InteractionModel) -> rydcav::hamiltonians::ModelSpec {
        let m = &self.model;
        rydcav::hamiltonians::ModelSpec {
            n_atoms: m.n_atoms.unwrap(),
            omega_a: m.omega_a.unwrap(),
            omega_c: m.omega_c.unwrap(),
            kappa: m.kappa.unwrap(),
            coupling: 0.0,
            interaction,
            atomic_form: m.atomic_form.unwrap(),
        }
    }

    pub fn solver_options(&self) -> rydcav::steady_state::SolverOptions {
        use rydcav::steady_state::Acceleration as A;
        let s = &self.solver;
        rydcav::steady_state::SolverOptions {
            tol: s.tol.unwrap(),
            max_iter: s.max_iter.unwrap(),
            damping: s.damping.unwrap(),
            seed_scale: s.seed_scale.unwrap(),
            acceleration: match s.acceleration.unwrap() {
                Acceleration::None => A::None,
                Acceleration::Aitken => A::Aitken,
                Acceleration::Secant => A::Secant,
            },
            degeneracy_tol: s.degeneracy_tol.unwrap(),
        }
    }

    pub fn critical_options(&self) -> rydcav::steady_state::CriticalOptions {
        rydcav::steady_state::CriticalOptions {
            eps_sr: self.solver.eps_sr.unwrap(),
            g_tol: self.solver.g_tol.unwrap(),
            solver: self.solver_options(),
        }
    }
}

fn line_of_offset(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]` (or written as `section.key`), if present.
fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[') {
            current = h.trim_end_matches(']').trim().to_string();
            if current == section && key == "*" {
                return Some(i + 1);
            }
            continue;
        }
        let Some((lhs, _)) = t.split_once('=') else { continue };
        let lhs = lhs.trim();
        let full = if current.is_empty() {
            lhs.to_string()
        } else {
            format!("{current}.{lhs}")
        };
        let want = format!("{section}.{key}");
        if full == want || full.starts_with(&format!("{want}.")) || (key == "*" && full.starts_with(&format!("{section}."))) {
            return Some(i + 1);
        }
    }
    None
}
