use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, InitialState};
use super::manifest::{git_describe, Manifest, MANIFEST_NAME};
use crate::collision::{Mollifier, QuadrupleTable, Statistics, TABLE_STATS_SCHEMA};
use crate::error::{Error, Result};
use crate::fock::{build_hamiltonian, two_point_matrix, FockSector, Propagator, StateVector};
use crate::hierarchy::{solve_memory_equation, MemoryConfig};
use crate::kinetic::{fermi_dirac_profile, integrate, OccupationFunction, SolverConfig};
use crate::lattice::Lattice;
use crate::output::{float, CsvWriter};
use crate::quasifree::{quasifreeness_residual, write_residual_rows, RESIDUAL_COLUMNS, RESIDUAL_SCHEMA};

pub const TRAJECTORY_SCHEMA: &str = "qboltz.trajectory.v1";
pub const KINETIC_SCHEMA: &str = "qboltz.kinetic.v1";
pub const KINETIC_LOG_SCHEMA: &str = "qboltz.kinetic_log.v1";
pub const AUDIT_SCHEMA: &str = "qboltz.audit.v1";
pub const SWEEP_SCHEMA: &str = "qboltz.sweep.v1";
pub const PROFILE_SCHEMA: &str = "qboltz.sweep_profiles.v1";

const TRAJECTORY_COLUMNS: [&str; 5] = ["lambda", "T", "t", "mode", "f"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Exact,
    Kinetic,
    Memory,
    Audit,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 5] = [Self::Exact, Self::Kinetic, Self::Memory, Self::Audit, Self::Sweep];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Kinetic => "kinetic",
            Self::Memory => "memory",
            Self::Audit => "audit",
            Self::Sweep => "sweep",
        }
    }

    /// Whether the command propagates a many-body state.
    fn is_exact(self) -> bool {
        matches!(self, Self::Exact | Self::Audit | Self::Sweep)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}` (exact | kinetic | memory | audit | sweep)"))
    }
}

/// Artifacts of a finished run.
#[derive(Clone, Debug)]
pub struct ResultTable {
    pub command: Command,
    pub dir: PathBuf,
    /// `(file name, schema id)` in creation order.
    pub files: Vec<(String, String)>,
    pub summary: Vec<(String, String)>,
    pub manifest: PathBuf,
}

impl ResultTable {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Everything an engine needs, built and checked before any engine starts.
struct Setup<'a> {
    config: &'a ExperimentConfig,
    lattice: Lattice,
    f0: Vec<f64>,
    /// Occupied modes and sector, for the exact commands.
    slater: Option<(Vec<usize>, Arc<FockSector>)>,
}

impl<'a> Setup<'a> {
    fn new(command: Command, config: &'a ExperimentConfig) -> Result<Self> {
        let lattice = Lattice::build(config.dim, config.side, &config.dispersion, &config.potential)?;
        let m = lattice.modes();
        let fermion_only = command.is_exact() || command == Command::Memory;
        if fermion_only && config.statistics != Statistics::Fermion {
            return Err(Error::config(
                config.line_of("solver.statistics"),
                format!("`{command}` is fermionic only; `solver.statistics` must be `fermion`"),
            ));
        }
        if command == Command::Sweep && config.lambdas.len() < 2 {
            return Err(Error::config(
                config.line_of("scaling.lambda"),
                "`sweep` needs at least two λ values",
            ));
        }

        let mut slater = None;
        let f0 = match &config.initial {
            InitialState::Slater(modes) => {
                let modes = match modes {
                    Some(modes) => modes.clone(),
                    None => lowest_modes(&lattice, m / 2),
                };
                let line = config.line_of("initial.modes");
                let mut seen = vec![false; m];
                for &k in &modes {
                    if k >= m || std::mem::replace(&mut seen[k], true) {
                        return Err(Error::config(
                            line,
                            format!("mode {k} is out of range 0..{m} or repeated"),
                        ));
                    }
                }
                if command.is_exact() {
                    slater = Some((modes.clone(), Arc::new(FockSector::new(m, modes.len())?)));
                }
                seen.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect()
            }
            other if command.is_exact() => {
                return Err(Error::config(
                    config.line_of("initial.state"),
                    format!("`{command}` needs a Slater initial state, got {other:?}"),
                ))
            }
            InitialState::FermiDirac { beta, mu } => fermi_dirac_profile(&lattice, *beta, *mu).into_values(),
            InitialState::Table(values) => {
                if values.len() != m {
                    return Err(Error::config(
                        config.line_of("initial.values"),
                        format!("{} occupations given for {m} modes", values.len()),
                    ));
                }
                values.clone()
            }
            InitialState::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                (0..m).map(|_| rng.random::<f64>()).collect()
            }
        };
        config
            .statistics
            .check(&f0)
            .map_err(|e| Error::config(config.line_of("initial.state"), format!("initial occupations: {e}")))?;
        Ok(Self {
            config,
            lattice,
            f0,
            slater,
        })
    }

    /// Kinetic sample times `j·T/samples`, `j = 0..=samples`.
    fn kinetic_times(&self) -> Vec<f64> {
        let n = self.config.samples;
        (0..=n).map(|j| self.config.horizon * j as f64 / n as f64).collect()
    }

    fn mollifier(&self) -> Mollifier {
        match self.config.eta {
            Some(eta) => Mollifier::new(self.config.mollifier, eta),
            None => Mollifier::new(self.config.mollifier, Mollifier::default_for(&self.lattice).eta),
        }
    }

    fn boltzmann(
        &self,
        t_end: f64,
        cadence: f64,
    ) -> Result<(QuadrupleTable, OccupationFunction, crate::kinetic::RunLog)> {
        let table = QuadrupleTable::build(&self.lattice, self.mollifier(), self.config.kernel);
        let f0 = OccupationFunction::new(self.f0.clone(), self.config.statistics)?;
        let solver = SolverConfig {
            dt: self.config.dt,
            method: self.config.method,
            t_end,
            cadence,
            tolerance: self.config.tolerance,
            ..SolverConfig::default()
        };
        let (f, log) = integrate(&self.lattice, &f0, &table, &solver)?;
        Ok((table, f, log))
    }

    fn initial_state(&self) -> Result<StateVector> {
        let (modes, sector) = self.slater.as_ref().expect("exact commands carry a sector");
        StateVector::slater(sector.clone(), modes)
    }

    /// Exact states at microscopic times `T/λ²` for each kinetic time `T`.
    fn exact_trajectory(
        &self,
        lambda: f64,
        times: &[f64],
        mut visit: impl FnMut(usize, &StateVector) -> Result<()>,
    ) -> Result<()> {
        let (_, sector) = self.slater.as_ref().expect("exact commands carry a sector");
        let h = build_hamiltonian(&self.lattice, sector.clone(), lambda)?;
        let prop = Propagator::new(&h, self.config.engine)?;
        let mut psi = self.initial_state()?;
        let mut t_prev = 0.0;
        for (j, &big_t) in times.iter().enumerate() {
            let t = big_t / (lambda * lambda);
            if t > t_prev {
                psi = prop.heisenberg_state(&psi, t - t_prev)?;
                t_prev = t;
            }
            visit(j, &psi)?;
        }
        Ok(())
    }

    fn memory(&self, lambda: f64) -> Result<crate::hierarchy::MemoryKernelState> {
        let config = MemoryConfig {
            lambda,
            t_end: self.config.horizon / (lambda * lambda),
            dt: self.config.memory_dt,
        };
        solve_memory_equation(&self.lattice, &self.f0, &config)
    }
}

/// The `n` modes of lowest energy, ties broken by index.
fn lowest_modes(lattice: &Lattice, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..lattice.modes()).collect();
    order.sort_by(|&a, &b| lattice.energy(a).total_cmp(&lattice.energy(b)).then(a.cmp(&b)));
    let mut modes = order[..n].to_vec();
    modes.sort_unstable();
    modes
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn csv(&mut self, name: &str, schema: &str, columns: &[&str]) -> Result<CsvWriter> {
        self.files.push((name.to_string(), schema.to_string()));
        CsvWriter::create(self.dir.join(name), schema, columns)
    }
}

type Summary = Vec<(String, String)>;

/// Run one command. Configuration problems are reported before the output
/// directory is touched; engine failures still leave a manifest marked
/// `failed`.
pub fn run(command: Command, config: &ExperimentConfig) -> Result<ResultTable> {
    let setup = Setup::new(command, config)?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    // a manifest present means a finished run, so drop any stale one first
    let stale = dir.join(MANIFEST_NAME);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
    }
    let start = Instant::now();
    let mut out = Outputs {
        dir: dir.clone(),
        files: Vec::new(),
    };
    let result = match command {
        Command::Exact => run_exact(&setup, &mut out),
        Command::Kinetic => run_kinetic(&setup, &mut out),
        Command::Memory => run_memory(&setup, &mut out),
        Command::Audit => run_audit(&setup, &mut out),
        Command::Sweep => run_sweep(&setup, &mut out),
    };
    let manifest = Manifest {
        command: command.name().into(),
        failure: result.as_ref().err().map(ToString::to_string),
        config_hash: config.hash.clone(),
        git_describe: git_describe(),
        wall_time_s: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        files: out.files.clone(),
        summary: result.as_ref().map(Clone::clone).unwrap_or_default(),
        config: config.echo.clone(),
    };
    let manifest = manifest.write_atomic(&dir)?;
    let summary = result?;
    Ok(ResultTable {
        command,
        dir,
        files: out.files,
        summary,
        manifest,
    })
}

fn run_exact(setup: &Setup, out: &mut Outputs) -> Result<Summary> {
    let times = setup.kinetic_times();
    let mut csv = out.csv("exact.csv", TRAJECTORY_SCHEMA, &TRAJECTORY_COLUMNS)?;
    let mut drift = 0.0f64;
    for &lambda in &setup.config.lambdas {
        setup.exact_trajectory(lambda, &times, |j, psi| {
            drift = drift.max((psi.norm() - 1.0).abs());
            let f = two_point_matrix(psi).diagonal();
            write_profile(&mut csv, lambda, times[j], &f)
        })?;
    }
    csv.finish()?;
    Ok(vec![("max_norm_drift".into(), float(drift))])
}

fn write_profile(csv: &mut CsvWriter, lambda: f64, big_t: f64, f: &[f64]) -> Result<()> {
    let t = float(big_t / (lambda * lambda));
    for (mode, &v) in f.iter().enumerate() {
        csv.row(&[float(lambda), float(big_t), t.clone(), mode.to_string(), float(v)])?;
    }
    Ok(())
}

fn run_kinetic(setup: &Setup, out: &mut Outputs) -> Result<Summary> {
    let horizon = setup.config.horizon;
    let (table, f, log) = setup.boltzmann(horizon, horizon / setup.config.samples as f64)?;
    out.files
        .push(("collision_table.csv".into(), TABLE_STATS_SCHEMA.into()));
    table.write_stats_csv(out.dir.join("collision_table.csv"))?;

    let mut profiles = out.csv("kinetic.csv", KINETIC_SCHEMA, &["T", "mode", "F"])?;
    for (row, snap) in log.rows.iter().zip(&log.snapshots) {
        for (mode, &v) in snap.iter().enumerate() {
            profiles.row(&[float(row.t), mode.to_string(), float(v)])?;
        }
    }
    profiles.finish()?;

    let columns = ["T", "mass", "energy", "entropy", "min_f", "max_f", "q_inf"];
    let mut csv = out.csv("kinetic_log.csv", KINETIC_LOG_SCHEMA, &columns)?;
    for r in &log.rows {
        csv.row(&[r.t, r.mass, r.energy, r.entropy, r.min_f, r.max_f, r.q_inf].map(float))?;
    }
    csv.finish()?;

    let first = log.rows.first().expect("the initial row is always logged");
    let last = log.rows.last().expect("the initial row is always logged");
    let min_increment = log
        .rows
        .windows(2)
        .map(|w| w[1].entropy - w[0].entropy)
        .fold(f64::INFINITY, f64::min);
    Ok(vec![
        ("mass_drift".into(), float(last.mass - first.mass)),
        ("energy_drift".into(), float(last.energy - first.energy)),
        ("min_entropy_increment".into(), float(min_increment)),
        ("final_sup_change".into(), float(sup_distance(f.values(), &setup.f0))),
        ("steps".into(), log.steps.to_string()),
    ])
}

fn run_memory(setup: &Setup, out: &mut Outputs) -> Result<Summary> {
    let times = setup.kinetic_times();
    let mut csv = out.csv("memory.csv", TRAJECTORY_SCHEMA, &TRAJECTORY_COLUMNS)?;
    for &lambda in &setup.config.lambdas {
        let history = setup.memory(lambda)?;
        for (j, &big_t) in times.iter().enumerate() {
            let f = if j + 1 == times.len() {
                history.last().to_vec()
            } else {
                history.at(big_t / (lambda * lambda))?
            };
            write_profile(&mut csv, lambda, big_t, &f)?;
        }
    }
    csv.finish()?;
    Ok(Vec::new())
}

fn run_audit(setup: &Setup, out: &mut Outputs) -> Result<Summary> {
    let times = setup.kinetic_times();
    let spec = setup.config.audit;
    let mut records = out.csv("residual.csv", RESIDUAL_SCHEMA, &RESIDUAL_COLUMNS)?;
    let columns = ["lambda", "T", "t", "max4", "rms4", "max8", "rms8"];
    let mut summary = out.csv("audit_summary.csv", AUDIT_SCHEMA, &columns)?;
    let (mut initial, mut overall) = (0.0f64, 0.0f64);
    for &lambda in &setup.config.lambdas {
        setup.exact_trajectory(lambda, &times, |j, psi| {
            let report = quasifreeness_residual(psi, &spec);
            let t = times[j] / (lambda * lambda);
            let worst = report.max4.max(report.max8);
            if j == 0 {
                initial = initial.max(worst);
            }
            overall = overall.max(worst);
            write_residual_rows(&mut records, t, lambda, &report)?;
            summary.row(&[lambda, times[j], t, report.max4, report.rms4, report.max8, report.rms8].map(float))
        })?;
    }
    records.finish()?;
    summary.finish()?;
    Ok(vec![
        ("max_residual_initial".into(), float(initial)),
        ("max_residual".into(), float(overall)),
    ])
}

fn run_sweep(setup: &Setup, out: &mut Outputs) -> Result<Summary> {
    let horizon = setup.config.horizon;
    let (_, boltzmann, _) = setup.boltzmann(horizon, horizon)?;
    let boltzmann = boltzmann.into_values();
    let mut lambdas = setup.config.lambdas.clone();
    lambdas.sort_by(|a, b| b.total_cmp(a));

    let columns = ["lambda", "t", "exact_error", "memory_error", "memory_exact_gap"];
    let mut csv = out.csv("sweep.csv", SWEEP_SCHEMA, &columns)?;
    let mut profiles = out.csv(
        "sweep_profiles.csv",
        PROFILE_SCHEMA,
        &["lambda", "mode", "exact", "boltzmann", "memory"],
    )?;
    let mut summary: Summary = Vec::new();
    let mut errors = Vec::with_capacity(lambdas.len());
    let psi0 = setup.initial_state()?;
    let (_, sector) = setup.slater.as_ref().expect("sweep carries a sector");
    for &lambda in &lambdas {
        let t = horizon / (lambda * lambda);
        let h = build_hamiltonian(&setup.lattice, sector.clone(), lambda)?;
        let exact = two_point_matrix(&Propagator::new(&h, setup.config.engine)?.heisenberg_state(&psi0, t)?).diagonal();
        let error = sup_distance(&exact, &boltzmann);
        errors.push(error);

        let memory = if setup.config.sweep_memory {
            match setup.memory(lambda) {
                Ok(history) => Some(history.last().to_vec()),
                Err(e) if e.is_numerical_guard() => {
                    summary.push((format!("memory_rejected_{}", float(lambda)), e.to_string()));
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let (memory_error, gap) = match &memory {
            Some(f) => (sup_distance(f, &boltzmann), sup_distance(f, &exact)),
            None => (f64::NAN, f64::NAN),
        };
        csv.row(&[lambda, t, error, memory_error, gap].map(float))?;
        for mode in 0..exact.len() {
            let mem = memory.as_ref().map_or(f64::NAN, |f| f[mode]);
            profiles.row(&[
                float(lambda),
                mode.to_string(),
                float(exact[mode]),
                float(boltzmann[mode]),
                float(mem),
            ])?;
        }
    }
    csv.finish()?;
    profiles.finish()?;
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    summary.insert(0, ("exact_error_decreasing".into(), monotone.to_string()));
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_str;
    use crate::output::read_rows;

    fn config(extra: &str, dir: &std::path::Path) -> ExperimentConfig {
        let text = format!(
            "[grid]\nd = 1\nL = 4\n[scaling]\nlambda = 0.4, 0.2\nT = 0.2\nsamples = 2\n[output]\ndir = {}\n{extra}",
            dir.display()
        );
        parse_str(&text).unwrap()
    }

    #[test]
    fn commands_parse_and_print() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("plot".parse::<Command>().is_err());
    }

    #[test]
    fn exact_run_writes_listed_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let table = run(Command::Exact, &config("", dir.path())).unwrap();
        assert_eq!(
            table.files,
            vec![("exact.csv".to_string(), TRAJECTORY_SCHEMA.to_string())]
        );
        let rows = read_rows(table.path("exact.csv")).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 4);
        let manifest = fs::read_to_string(&table.manifest).unwrap();
        assert!(manifest.contains("status = ok\n"));
        assert!(manifest.contains("exact.csv = qboltz.trajectory.v1\n"));
        assert!(manifest.contains("config_hash = sha256:"));
        assert!(manifest.contains("[config]\ngrid.d = 1\n"));
        // at T = 0 the profile is the ground-state Slater determinant
        let occupied: f64 = rows.iter().take(4).map(|r| r[4].parse::<f64>().unwrap()).sum();
        assert_eq!(occupied, 2.0);
    }

    #[test]
    fn boson_statistics_rejected_for_exact() {
        let dir = tempfile::tempdir().unwrap();
        let c = config("[solver]\nstatistics = boson\n", dir.path());
        match run(Command::Exact, &c) {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 11);
                assert!(message.contains("fermionic"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        // nothing is written for a rejected config
        assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
        run(Command::Kinetic, &c).unwrap();
    }

    #[test]
    fn sweep_needs_two_couplings_and_slater_data() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            "grid.d = 1\ngrid.L = 4\nscaling.lambda = 0.3\noutput.dir = {}\n",
            dir.path().display()
        );
        let c = parse_str(&text).unwrap();
        assert!(matches!(run(Command::Sweep, &c), Err(Error::Config { line: 3, .. })));
        let c = config("[initial]\nstate = fermi-dirac\n", dir.path());
        assert!(matches!(run(Command::Sweep, &c), Err(Error::Config { line: 11, .. })));
    }

    #[test]
    fn kinetic_from_fermi_dirac_is_nearly_flat() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            "[grid]\nd = 1\nL = 64\n[model]\ndispersion = nn\n[initial]\nstate = fermi-dirac\nbeta = 1\nmu = 2\n\
             [collision]\neta = 0.05\n[scaling]\nlambda = 1\nT = 1\nsamples = 4\n[output]\ndir = {}\n",
            dir.path().display()
        );
        let table = run(Command::Kinetic, &parse_str(&text).unwrap()).unwrap();
        let change: f64 = table.summary_value("final_sup_change").unwrap().parse().unwrap();
        assert!(change < 0.05 * 0.05 * 10.0, "FD drifted by {change}");
        assert_eq!(read_rows(table.path("kinetic_log.csv")).unwrap().len(), 5);
        assert_eq!(read_rows(table.path("kinetic.csv")).unwrap().len(), 5 * 64);
    }

    #[test]
    fn audit_starts_quasifree() {
        let dir = tempfile::tempdir().unwrap();
        let table = run(Command::Audit, &config("", dir.path())).unwrap();
        let rows = read_rows(table.path("audit_summary.csv")).unwrap();
        for r in rows.iter().filter(|r| r[1].parse::<f64>().unwrap() == 0.0) {
            assert!(r[3].parse::<f64>().unwrap() < 1e-10 && r[5].parse::<f64>().unwrap() < 1e-10);
        }
        let initial: f64 = table.summary_value("max_residual_initial").unwrap().parse().unwrap();
        assert!(initial < 1e-10);
    }

    #[test]
    fn memory_and_sweep_runs() {
        let dir = tempfile::tempdir().unwrap();
        let c = config("[sweep]\nmemory = true\n", dir.path());
        let table = run(Command::Memory, &c).unwrap();
        assert_eq!(read_rows(table.path("memory.csv")).unwrap().len(), 2 * 3 * 4);
        let table = run(Command::Sweep, &c).unwrap();
        let rows = read_rows(table.path("sweep.csv")).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.iter().all(|x| x != "NaN")));
        assert!(table.summary_value("exact_error_decreasing").is_some());
    }

    #[test]
    fn engine_failure_marks_manifest_failed() {
        let dir = tempfile::tempdir().unwrap();
        // an explicit step far too large for the kinetic solver to keep F in [0, 1]
        let text = format!(
            "grid.d = 2\ngrid.L = 3\nscaling.lambda = 1\nscaling.T = 100\ninitial.state = random\n\
             model.strength = 40\ncollision.eta = 2\nsolver.dt = 100\noutput.dir = {}\n",
            dir.path().display()
        );
        let c = parse_str(&text).unwrap();
        let err = run(Command::Kinetic, &c).unwrap_err();
        assert!(err.is_numerical_guard(), "{err}");
        let manifest = fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap();
        assert!(manifest.contains("status = failed\n"), "{manifest}");
        assert!(manifest.contains("error = "));
    }
}
