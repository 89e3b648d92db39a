use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::collision::{KernelMode, MollifierKind, Statistics};
use crate::error::{Error, Result};
use crate::fock::Engine;
use crate::kinetic::Method;
use crate::lattice::{DispersionSpec, PotentialSpec};
use crate::quasifree::SampleSpec;

/// One recognised key: its dotted name, default (`None` = no default) and a
/// one-line description for `--help`-style listings.
#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

const fn key(name: &'static str, default: Option<&'static str>, doc: &'static str) -> KeySpec {
    KeySpec { name, default, doc }
}

/// Every key the parser accepts, in echo order.
pub const KEYS: &[KeySpec] = &[
    key("grid.d", None, "spatial dimension (required)"),
    key("grid.L", None, "side length of the torus (required)"),
    key("seed", Some("0"), "seed of every random choice"),
    key("model.dispersion", Some("nnn"), "nn | nnn | table"),
    key("model.gamma", Some("0.4"), "next-nearest weight of `nnn`"),
    key("model.energies", None, "explicit energies for `table`, flat mode order"),
    key(
        "model.potential",
        Some("exponential"),
        "zero | constant | nn | exponential | table",
    ),
    key("model.strength", Some("1"), "potential amplitude"),
    key("model.range", Some("1"), "decay length of `exponential`"),
    key("model.values", None, "explicit v(x) for `table`, flat site order"),
    key("initial.state", Some("slater"), "slater | fermi-dirac | table | random"),
    key(
        "initial.modes",
        Some("auto"),
        "occupied flat mode indices; `auto` fills the lowest half",
    ),
    key("initial.beta", Some("1"), "inverse temperature of `fermi-dirac`"),
    key("initial.mu", Some("0"), "chemical potential of `fermi-dirac`"),
    key("initial.values", None, "explicit occupations for `table`"),
    key("collision.mollifier", Some("gaussian"), "gaussian | lorentzian | box"),
    key(
        "collision.eta",
        Some("auto"),
        "mollifier width; `auto` = twice the median Δe gap",
    ),
    key("collision.kernel", Some("plain"), "plain | symmetrized"),
    key("solver.statistics", Some("fermion"), "fermion | boson"),
    key("solver.method", Some("rk4"), "rk4 | rk45"),
    key("solver.dt", Some("auto"), "kinetic step in T"),
    key("solver.tolerance", Some("1e-8"), "local error target of rk45"),
    key(
        "solver.engine",
        Some("auto"),
        "exact propagation: auto | dense | krylov",
    ),
    key("solver.memory_dt", Some("auto"), "memory-equation step in t"),
    key(
        "scaling.lambda",
        None,
        "coupling list, comma separated, each > 0 (required)",
    ),
    key("scaling.T", Some("1"), "kinetic horizon; microscopic time is T/λ²"),
    key(
        "scaling.samples",
        Some("10"),
        "logged times per run, evenly spaced in T",
    ),
    key(
        "audit.samples",
        Some("200"),
        "sampled tuples when a kind is not exhaustive",
    ),
    key(
        "audit.exhaustive_limit",
        Some("65536"),
        "enumerate all tuples up to this count",
    ),
    key("sweep.memory", Some("false"), "also solve the memory equation per λ"),
    key("output.dir", Some("out"), "output directory (overridden by --out)"),
];

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// Occupied flat mode indices, or `None` for the lowest `⌊M/2⌋` energies.
    Slater(Option<Vec<usize>>),
    FermiDirac {
        beta: f64,
        mu: f64,
    },
    Table(Vec<f64>),
    /// Independent uniform occupations drawn from the seed.
    Random,
}

/// A validated experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub side: usize,
    pub dispersion: DispersionSpec,
    pub potential: PotentialSpec,
    pub lambdas: Vec<f64>,
    pub seed: u64,
    pub initial: InitialState,
    pub mollifier: MollifierKind,
    pub eta: Option<f64>,
    pub kernel: KernelMode,
    pub statistics: Statistics,
    pub method: Method,
    pub dt: Option<f64>,
    pub tolerance: f64,
    pub engine: Engine,
    pub memory_dt: Option<f64>,
    pub horizon: f64,
    pub samples: usize,
    pub audit: SampleSpec,
    pub sweep_memory: bool,
    pub output_dir: PathBuf,
    /// Resolved `key = value` pairs, defaults included.
    pub echo: Vec<(String, String)>,
    /// `sha256:<hex>` of the source text.
    pub hash: String,
    lines: BTreeMap<String, usize>,
    last_line: usize,
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

/// Read and validate a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::config(0, format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::config(0, format!("{} is not UTF-8", path.display())))?;
    parse_str(&text)
}

/// Validate config text. See the module docs for the grammar.
pub fn parse_str(text: &str) -> Result<ExperimentConfig> {
    let raw = tokenize(text)?;
    let last_line = text.lines().count();
    for (name, entry) in &raw {
        if !KEYS.iter().any(|k| k.name == name) {
            return Err(Error::config(entry.line, format!("unknown key `{name}`")));
        }
    }
    Resolver { raw: &raw, last_line }.build(text)
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut out: BTreeMap<String, Entry> = BTreeMap::new();
    let mut section = String::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw_line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line, "unterminated section header"))?
                .trim();
            if !valid_name(name) {
                return Err(Error::config(line, format!("invalid section name `{name}`")));
            }
            section = format!("{name}.");
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("expected `key = value`, found `{body}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if !valid_name(k) {
            return Err(Error::config(line, format!("invalid key `{k}`")));
        }
        let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
        let name = format!("{section}{k}");
        if let Some(first) = out.get(&name) {
            return Err(Error::config(
                line,
                format!(
                    "duplicate key `{name}` (first set on line {}, again on line {line})",
                    first.line
                ),
            ));
        }
        out.insert(
            name,
            Entry {
                value: v.to_string(),
                line,
            },
        );
    }
    Ok(out)
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.split('.')
            .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'))
}

struct Resolver<'a> {
    raw: &'a BTreeMap<String, Entry>,
    last_line: usize,
}

impl Resolver<'_> {
    /// Raw text and line of a key; defaults report line 0.
    fn text(&self, name: &str) -> Option<(String, usize)> {
        if let Some(e) = self.raw.get(name) {
            return Some((e.value.clone(), e.line));
        }
        let spec = KEYS.iter().find(|k| k.name == name).expect("key is declared");
        spec.default.map(|d| (d.to_string(), 0))
    }

    fn required(&self, name: &str) -> Result<(String, usize)> {
        self.text(name).ok_or_else(|| {
            Error::config(
                self.last_line,
                format!("missing required key `{name}` (checked at end of file)"),
            )
        })
    }

    fn parse<T: FromStr>(&self, name: &str, what: &str) -> Result<T> {
        let (v, line) = self.required(name)?;
        parse_value(&v, line, name, what)
    }

    fn auto<T: FromStr>(&self, name: &str, what: &str) -> Result<Option<T>> {
        let (v, line) = self.required(name)?;
        if v == "auto" {
            Ok(None)
        } else {
            parse_value(&v, line, name, what).map(Some)
        }
    }

    fn list<T: FromStr>(&self, name: &str, what: &str) -> Result<Vec<T>> {
        let (v, line) = self.required(name)?;
        v.split(',')
            .map(|item| parse_value(item.trim(), line, name, what))
            .collect()
    }

    fn choice<T: FromStr<Err = String>>(&self, name: &str) -> Result<T> {
        let (v, line) = self.required(name)?;
        v.parse()
            .map_err(|e: String| Error::config(line, format!("`{name}`: {e}")))
    }

    fn line(&self, name: &str) -> usize {
        self.raw.get(name).map_or(0, |e| e.line)
    }

    fn build(&self, text: &str) -> Result<ExperimentConfig> {
        let positive = |name: &str, x: f64| -> Result<f64> {
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(Error::config(
                    self.line(name),
                    format!("`{name}` must be positive and finite, got {x}"),
                ))
            }
        };

        let dim: usize = self.parse("grid.d", "an integer")?;
        let side: usize = self.parse("grid.L", "an integer")?;
        if dim == 0 || side == 0 {
            return Err(Error::config(
                self.line(if dim == 0 { "grid.d" } else { "grid.L" }),
                "grid sizes must be ≥ 1",
            ));
        }

        let lambdas: Vec<f64> = self.list("scaling.lambda", "a number")?;
        for &l in &lambdas {
            positive("scaling.lambda", l)?;
        }

        let dispersion = match self.required("model.dispersion")?.0.as_str() {
            "nn" => DispersionSpec::NearestNeighbor,
            "nnn" => DispersionSpec::NextNearestNeighbor {
                gamma: self.parse("model.gamma", "a number")?,
            },
            "table" => DispersionSpec::Table(self.list("model.energies", "a number")?),
            other => {
                return Err(Error::config(
                    self.line("model.dispersion"),
                    format!("unknown dispersion `{other}` (nn | nnn | table)"),
                ))
            }
        };
        let strength: f64 = self.parse("model.strength", "a number")?;
        let potential = match self.required("model.potential")?.0.as_str() {
            "zero" => PotentialSpec::Zero,
            "constant" => PotentialSpec::Constant { strength },
            "nn" => PotentialSpec::NearestNeighbor { strength },
            "exponential" => PotentialSpec::Exponential {
                strength,
                range: positive("model.range", self.parse("model.range", "a number")?)?,
            },
            "table" => PotentialSpec::Table(self.list("model.values", "a number")?),
            other => {
                return Err(Error::config(
                    self.line("model.potential"),
                    format!("unknown potential `{other}` (zero | constant | nn | exponential | table)"),
                ))
            }
        };

        let initial = match self.required("initial.state")?.0.as_str() {
            "slater" => InitialState::Slater(if self.required("initial.modes")?.0 == "auto" {
                None
            } else {
                Some(self.list("initial.modes", "a mode index")?)
            }),
            "fermi-dirac" => InitialState::FermiDirac {
                beta: self.parse("initial.beta", "a number")?,
                mu: self.parse("initial.mu", "a number")?,
            },
            "table" => InitialState::Table(self.list("initial.values", "a number")?),
            "random" => InitialState::Random,
            other => {
                return Err(Error::config(
                    self.line("initial.state"),
                    format!("unknown initial state `{other}` (slater | fermi-dirac | table | random)"),
                ))
            }
        };

        let eta = self.auto::<f64>("collision.eta", "a number or `auto`")?;
        if let Some(eta) = eta {
            positive("collision.eta", eta)?;
        }
        let dt = self.auto::<f64>("solver.dt", "a number or `auto`")?;
        if let Some(dt) = dt {
            positive("solver.dt", dt)?;
        }
        let memory_dt = self.auto::<f64>("solver.memory_dt", "a number or `auto`")?;
        if let Some(dt) = memory_dt {
            positive("solver.memory_dt", dt)?;
        }
        let engine = match self.required("solver.engine")?.0.as_str() {
            "auto" => Engine::Auto,
            "dense" => Engine::Dense,
            "krylov" => Engine::Krylov,
            other => {
                return Err(Error::config(
                    self.line("solver.engine"),
                    format!("unknown engine `{other}` (auto | dense | krylov)"),
                ))
            }
        };
        let horizon = positive("scaling.T", self.parse("scaling.T", "a number")?)?;
        let samples: usize = self.parse("scaling.samples", "an integer")?;
        if samples == 0 {
            return Err(Error::config(
                self.line("scaling.samples"),
                "`scaling.samples` must be ≥ 1",
            ));
        }
        let seed: u64 = self.parse("seed", "an unsigned integer")?;

        let echo = KEYS
            .iter()
            .filter_map(|k| self.text(k.name).map(|(v, _)| (k.name.to_string(), v)))
            .collect();

        Ok(ExperimentConfig {
            dim,
            side,
            dispersion,
            potential,
            lambdas,
            seed,
            initial,
            mollifier: self.choice("collision.mollifier")?,
            eta,
            kernel: self.choice("collision.kernel")?,
            statistics: self.choice("solver.statistics")?,
            method: self.choice("solver.method")?,
            dt,
            tolerance: positive("solver.tolerance", self.parse("solver.tolerance", "a number")?)?,
            engine,
            memory_dt,
            horizon,
            samples,
            audit: SampleSpec {
                exhaustive_limit: self.parse("audit.exhaustive_limit", "an unsigned integer")?,
                samples: self.parse("audit.samples", "an unsigned integer")?,
                seed,
            },
            sweep_memory: self.parse("sweep.memory", "`true` or `false`")?,
            output_dir: PathBuf::from(self.required("output.dir")?.0),
            echo,
            hash: hex_digest(text),
            lines: self.raw.iter().map(|(k, e)| (k.clone(), e.line)).collect(),
            last_line: self.last_line,
        })
    }
}

fn hex_digest(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn parse_value<T: FromStr>(v: &str, line: usize, name: &str, what: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(line, format!("`{name}` expects {what}, found `{v}`")))
}

impl ExperimentConfig {
    /// Line where `name` was set, 0 when it took its default.
    pub fn line_of(&self, name: &str) -> usize {
        self.lines.get(name).copied().unwrap_or(0)
    }

    /// Last line of the source, used for errors about absent keys.
    pub fn last_line(&self) -> usize {
        self.last_line
    }
}
