//! Flat `key = value` run configuration.
//!
//! One entry per line; blank lines and lines starting with `#` are skipped.
//! Numbers may be written as fractions (`1/8`) and `pi` is accepted as a
//! literal (`pi/3000`). Lists are comma separated. A `preset = <name>` entry
//! loads a named parameter set first; every other entry overrides it.
//!
//! | key | meaning |
//! |-----|---------|
//! | `domain.{x,y,z}_{min,max}` | box bounds; the `z` pair makes the run 3D |
//! | `grid.cells_{x,y,z}` or `grid.h` | cells per axis, or a uniform spacing |
//! | `time.dt`, `time.t_end`, `time.sample_every` | step, end time, steps per sample |
//! | `omega`, `lambda` | rotation speed, Josephson coupling |
//! | `beta.11`, `beta.12`, `beta.21`, `beta.22` | interaction matrix (symmetric) |
//! | `trap.{1,2}.gamma_{x,y,z}` | harmonic trap frequencies per component |
//! | `initial`, `initial.path` | `gaussian-pair`, `single-vortex`, `vortex-pair` or `dump` |
//! | `output.timeseries` | CSV path |
//! | `output.dump_prefix`, `output.dump_times`, `output.frame` | state dumps, `lagrangian` or `eulerian` |
//! | `converge.{dt,h}_ladder`, `converge.{dt,h}_reference`, `converge.t_end` | convergence study |

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use rotbec::cgpe::CgpeParams;
use rotbec::grid::{BoxDomain, GridSpec};
use rotbec::rotating::{HarmonicTrap, PotentialSpec};

use crate::error::{CliError, Result};
use crate::presets;

const AXES: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Two displaced-width Gaussians, half the mass in each component.
    GaussianPair,
    /// Unit-charge vortex in component 1, component 2 empty.
    SingleVortex,
    /// The same unit-charge vortex in both components.
    VortexPair,
    /// Lagrangian state read from a grid dump.
    Dump(PathBuf),
}

impl InitialCondition {
    fn name(&self) -> &'static str {
        match self {
            InitialCondition::GaussianPair => "gaussian-pair",
            InitialCondition::SingleVortex => "single-vortex",
            InitialCondition::VortexPair => "vortex-pair",
            InitialCondition::Dump(_) => "dump",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lagrangian,
    Eulerian,
}

impl Frame {
    fn name(self) -> &'static str {
        match self {
            Frame::Lagrangian => "lagrangian",
            Frame::Eulerian => "eulerian",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub timeseries: PathBuf,
    pub dump_prefix: PathBuf,
    pub dump_times: Vec<f64>,
    pub frame: Frame,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergeConfig {
    pub dt_ladder: Vec<f64>,
    pub dt_reference: Option<f64>,
    pub h_ladder: Vec<f64>,
    pub h_reference: Option<f64>,
    /// Comparison time; the run end time when absent.
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: Vec<(f64, f64)>,
    pub cells: Vec<usize>,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between diagnostics rows; 0 records only the first and last.
    pub sample_every: usize,
    pub omega: f64,
    pub lambda: f64,
    pub beta: [[f64; 2]; 2],
    /// Trap frequencies per component, one per axis.
    pub traps: [Vec<f64>; 2],
    pub initial: InitialCondition,
    pub output: OutputConfig,
    pub converge: ConvergeConfig,
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries = lex(text)?;
        let mut map = BTreeMap::new();
        if let Some((_, _, name)) = entries.iter().find(|(_, k, _)| k == "preset") {
            let preset = presets::entries(name).ok_or_else(|| {
                CliError::config(format!(
                    "unknown preset `{name}` (known: {})",
                    presets::NAMES.join(", ")
                ))
            })?;
            for (k, v) in preset {
                map.insert(k.to_string(), v.to_string());
            }
        }
        let user_h = entries.iter().any(|(_, k, _)| k == "grid.h");
        let user_cells = entries.iter().any(|(_, k, _)| k.starts_with("grid.cells_"));
        if user_h && user_cells {
            return Err(CliError::config("give either grid.h or grid.cells_*, not both"));
        }
        if user_h {
            map.retain(|k, _| !k.starts_with("grid.cells_"));
        }
        if user_cells {
            map.remove("grid.h");
        }
        for (line, key, value) in entries {
            if key == "preset" {
                continue;
            }
            if !is_known(&key) {
                return Err(CliError::config(format!("line {line}: unknown key `{key}`")));
            }
            map.insert(key, value);
        }
        build(&map)
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn grid(&self) -> Result<GridSpec> {
        grid_from(&self.domain, &self.cells)
    }

    pub fn potentials(&self) -> Result<[PotentialSpec; 2]> {
        let trap = |g: &[f64]| -> Result<PotentialSpec> {
            let t = match g {
                [x, y] => HarmonicTrap::new(*x, *y),
                [x, y, z] => HarmonicTrap::with_z(*x, *y, *z),
                _ => unreachable!("trap arity matches the dimension"),
            };
            t.map(Into::into).map_err(|e| CliError::config(e.to_string()))
        };
        Ok([trap(&self.traps[0])?, trap(&self.traps[1])?])
    }

    pub fn params(&self) -> Result<CgpeParams> {
        let params = CgpeParams {
            lambda: self.lambda,
            omega: self.omega,
            beta: self.beta,
            dt: self.dt,
            potentials: self.potentials()?,
        };
        params.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(params)
    }

    /// Normalized form: every resolved key, fixed order, no preset line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        for (a, (lo, hi)) in self.domain.iter().enumerate() {
            put(&format!("domain.{}_min", AXES[a]), lo.to_string());
            put(&format!("domain.{}_max", AXES[a]), hi.to_string());
        }
        for (a, n) in self.cells.iter().enumerate() {
            put(&format!("grid.cells_{}", AXES[a]), n.to_string());
        }
        put("time.dt", self.dt.to_string());
        put("time.t_end", self.t_end.to_string());
        put("time.sample_every", self.sample_every.to_string());
        put("omega", self.omega.to_string());
        put("lambda", self.lambda.to_string());
        put("beta.11", self.beta[0][0].to_string());
        put("beta.12", self.beta[0][1].to_string());
        put("beta.22", self.beta[1][1].to_string());
        for (j, trap) in self.traps.iter().enumerate() {
            for (a, g) in trap.iter().enumerate() {
                put(&format!("trap.{}.gamma_{}", j + 1, AXES[a]), g.to_string());
            }
        }
        put("initial", self.initial.name().to_string());
        if let InitialCondition::Dump(path) = &self.initial {
            put("initial.path", path.display().to_string());
        }
        put("output.timeseries", self.output.timeseries.display().to_string());
        put("output.dump_prefix", self.output.dump_prefix.display().to_string());
        if !self.output.dump_times.is_empty() {
            put("output.dump_times", join(&self.output.dump_times));
        }
        put("output.frame", self.output.frame.name().to_string());
        let c = &self.converge;
        if !c.dt_ladder.is_empty() {
            put("converge.dt_ladder", join(&c.dt_ladder));
        }
        if let Some(v) = c.dt_reference {
            put("converge.dt_reference", v.to_string());
        }
        if !c.h_ladder.is_empty() {
            put("converge.h_ladder", join(&c.h_ladder));
        }
        if let Some(v) = c.h_reference {
            put("converge.h_reference", v.to_string());
        }
        if let Some(v) = c.t_end {
            put("converge.t_end", v.to_string());
        }
        s
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn grid_from(domain: &[(f64, f64)], cells: &[usize]) -> Result<GridSpec> {
    let domain = BoxDomain::new(domain).map_err(|e| CliError::config(e.to_string()))?;
    GridSpec::new(domain, cells).map_err(|e| CliError::config(e.to_string()))
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

fn is_known(key: &str) -> bool {
    const FIXED: &[&str] = &[
        "grid.h",
        "time.dt",
        "time.t_end",
        "time.sample_every",
        "omega",
        "lambda",
        "beta.11",
        "beta.12",
        "beta.21",
        "beta.22",
        "initial",
        "initial.path",
        "output.timeseries",
        "output.dump_prefix",
        "output.dump_times",
        "output.frame",
        "converge.dt_ladder",
        "converge.dt_reference",
        "converge.h_ladder",
        "converge.h_reference",
        "converge.t_end",
    ];
    if FIXED.contains(&key) {
        return true;
    }
    AXES.iter().any(|a| {
        key == format!("domain.{a}_min")
            || key == format!("domain.{a}_max")
            || key == format!("grid.cells_{a}")
            || key == format!("trap.1.gamma_{a}")
            || key == format!("trap.2.gamma_{a}")
    })
}

/// `(line number, key, value)` triples; duplicate keys are rejected.
fn lex(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", i + 1)))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(CliError::config(format!("line {}: empty key", i + 1)));
        }
        if let Some((first, _, _)) = out.iter().find(|(_, k, _)| *k == key) {
            return Err(CliError::config(format!(
                "line {}: `{key}` already set on line {first}",
                i + 1
            )));
        }
        out.push((i + 1, key, value.trim().to_string()));
    }
    Ok(out)
}

/// A number, `pi`, or a quotient of two of those.
pub fn parse_real(text: &str) -> Option<f64> {
    let atom = |s: &str| -> Option<f64> {
        match s.trim() {
            "pi" => Some(PI),
            "-pi" => Some(-PI),
            t => t.parse::<f64>().ok(),
        }
    };
    let value = match text.split_once('/') {
        Some((num, den)) => atom(num)? / atom(den)?,
        None => atom(text)?,
    };
    value.is_finite().then_some(value)
}

struct Fields<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Fields<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| {
                parse_real(v).ok_or_else(|| CliError::config(format!("{key}: `{v}` is not a finite number")))
            })
            .transpose()
    }

    fn required_real(&self, key: &str) -> Result<f64> {
        self.real(key)?
            .ok_or_else(|| CliError::config(format!("missing required key `{key}`")))
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| CliError::config(format!("{key}: `{v}` is not a non-negative integer")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some(v) if v.trim().is_empty() => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|item| {
                    parse_real(item)
                        .ok_or_else(|| CliError::config(format!("{key}: `{}` is not a finite number", item.trim())))
                })
                .collect(),
        }
    }
}

fn build(map: &BTreeMap<String, String>) -> Result<RunConfig> {
    let f = Fields { map };
    let three_d = f.has("domain.z_min") || f.has("domain.z_max");
    let dim = if three_d { 3 } else { 2 };
    for key in map.keys() {
        if !three_d && key.ends_with("_z") {
            return Err(CliError::config(format!(
                "`{key}` given but the domain has no z bounds"
            )));
        }
    }

    let mut domain = Vec::with_capacity(dim);
    for axis in AXES.iter().take(dim) {
        let lo = f.required_real(&format!("domain.{axis}_min"))?;
        let hi = f.required_real(&format!("domain.{axis}_max"))?;
        domain.push((lo, hi));
    }
    let cells = match f.real("grid.h")? {
        Some(h) => {
            let d = BoxDomain::new(&domain).map_err(|e| CliError::config(e.to_string()))?;
            let g = GridSpec::with_spacing(d, h).map_err(|e| CliError::config(format!("grid.h: {e}")))?;
            (0..dim).map(|a| g.cells(a)).collect()
        }
        None => AXES
            .iter()
            .take(dim)
            .map(|a| {
                let key = format!("grid.cells_{a}");
                f.count(&key)?
                    .ok_or_else(|| CliError::config(format!("missing required key `{key}` (or grid.h)")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    grid_from(&domain, &cells)?;

    let dt = f.required_real("time.dt")?;
    if dt <= 0.0 {
        return Err(CliError::config(format!("time.dt = {dt} must be positive")));
    }
    let t_end = f.required_real("time.t_end")?;
    let sample_every = f.count("time.sample_every")?.unwrap_or(100);

    let b11 = f.real("beta.11")?.unwrap_or(0.0);
    let b12 = f.real("beta.12")?;
    let b21 = f.real("beta.21")?;
    let b22 = f.real("beta.22")?.unwrap_or(0.0);
    let off = match (b12, b21) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::config(format!("beta.12 = {a} and beta.21 = {b} must agree")))
        }
        (a, b) => a.or(b).unwrap_or(0.0),
    };

    let mut traps: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (j, trap) in traps.iter_mut().enumerate() {
        for axis in AXES.iter().take(dim) {
            let key = format!("trap.{}.gamma_{axis}", j + 1);
            let g = f.real(&key)?.unwrap_or(1.0);
            if g <= 0.0 {
                return Err(CliError::config(format!("{key} = {g} must be positive")));
            }
            trap.push(g);
        }
    }

    let initial = match f.raw("initial") {
        None => return Err(CliError::config("missing required key `initial`")),
        Some("gaussian-pair") => InitialCondition::GaussianPair,
        Some("single-vortex") => InitialCondition::SingleVortex,
        Some("vortex-pair") => InitialCondition::VortexPair,
        Some("dump") => InitialCondition::Dump(PathBuf::from(f.raw("initial.path").ok_or_else(
            || CliError::config("initial = dump needs `initial.path`"),
        )?)),
        Some(other) => {
            return Err(CliError::config(format!(
                "initial = `{other}`: expected gaussian-pair, single-vortex, vortex-pair or dump"
            )))
        }
    };
    if f.has("initial.path") && !matches!(initial, InitialCondition::Dump(_)) {
        return Err(CliError::config("initial.path is only used with initial = dump"));
    }

    let frame = match f.raw("output.frame").unwrap_or("lagrangian") {
        "lagrangian" => Frame::Lagrangian,
        "eulerian" => Frame::Eulerian,
        other => {
            return Err(CliError::config(format!(
                "output.frame = `{other}`: expected lagrangian or eulerian"
            )))
        }
    };
    let output = OutputConfig {
        timeseries: PathBuf::from(f.raw("output.timeseries").unwrap_or("timeseries.csv")),
        dump_prefix: PathBuf::from(f.raw("output.dump_prefix").unwrap_or("frame")),
        dump_times: f.list("output.dump_times")?,
        frame,
    };

    let converge = ConvergeConfig {
        dt_ladder: f.list("converge.dt_ladder")?,
        dt_reference: f.real("converge.dt_reference")?,
        h_ladder: f.list("converge.h_ladder")?,
        h_reference: f.real("converge.h_reference")?,
        t_end: f.real("converge.t_end")?,
    };
    let positive = |name: &str, v: &[f64]| -> Result<()> {
        match v.iter().find(|x| **x <= 0.0) {
            Some(x) => Err(CliError::config(format!("{name}: {x} must be positive"))),
            None => Ok(()),
        }
    };
    positive("converge.dt_ladder", &converge.dt_ladder)?;
    positive("converge.h_ladder", &converge.h_ladder)?;
    positive("converge.dt_reference", converge.dt_reference.as_slice())?;
    positive("converge.h_reference", converge.h_reference.as_slice())?;

    let config = RunConfig {
        domain,
        cells,
        dt,
        t_end,
        sample_every,
        omega: f.real("omega")?.unwrap_or(0.0),
        lambda: f.real("lambda")?.unwrap_or(0.0),
        beta: [[b11, off], [off, b22]],
        traps,
        initial,
        output,
        converge,
    };
    config.params()?;
    Ok(config)
}
