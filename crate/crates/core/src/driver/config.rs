use std::path::{Path, PathBuf};

use crate::bounds::DEFAULT_KAPPA;
use crate::error::{Error, Result};
use crate::mesh::{load_mesh, parse_mesh, refine_uniform, Domain, Mesh};
use crate::solvers::DEFAULT_EIG_TOL;

const DELAUNAY_FIXTURE: &str = include_str!("../../fixtures/square_delaunay_initial.mesh");

const PRESETS: [(&str, &str); 4] = [
    ("square-p1", include_str!("../../presets/square-p1.conf")),
    ("square-p2", include_str!("../../presets/square-p2.conf")),
    (
        "lshape-p1-adaptive",
        include_str!("../../presets/lshape-p1-adaptive.conf"),
    ),
    (
        "lshape-p2-adaptive",
        include_str!("../../presets/lshape-p2-adaptive.conf"),
    ),
];

pub const DEFAULT_LIN_TOL: f64 = 1e-12;

/// Source of the initial mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// coarsest built-in mesh of the domain
    Builtin,
    /// the shipped 52-triangle Delaunay mesh of the unit square
    Delaunay,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refinement {
    Uniform {
        levels: usize,
    },
    Adaptive {
        theta: f64,
        max_dofs: usize,
        loops: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    /// `None` for a user mesh file without reference solutions
    pub domain: Option<Domain>,
    pub mesh: MeshSource,
    /// uniform refinements applied to the initial mesh before step 0
    pub initial_refinements: usize,
    pub fe_degree: usize,
    pub rt_degrees: Vec<usize>,
    pub refinement: Refinement,
    pub num_eigenpairs: usize,
    /// guaranteed bounds are reported for indices `1..=guaranteed_m`
    pub guaranteed_m: usize,
    pub kappa: f64,
    pub lambda_next_lower: Option<f64>,
    pub eig_tol: f64,
    pub lin_tol: f64,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "run".into(),
            domain: Some(Domain::UnitSquare),
            mesh: MeshSource::Builtin,
            initial_refinements: 0,
            fe_degree: 1,
            rt_degrees: vec![1],
            refinement: Refinement::Uniform { levels: 4 },
            num_eigenpairs: 1,
            guaranteed_m: 1,
            kappa: DEFAULT_KAPPA,
            lambda_next_lower: None,
            eig_tol: DEFAULT_EIG_TOL,
            lin_tol: DEFAULT_LIN_TOL,
            output_dir: PathBuf::from("out"),
            emit_svg: false,
        }
    }
}

/// Names of the shipped presets.
pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Text of a shipped preset.
pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let known: Vec<_> = preset_names().collect();
            Error::Config(format!(
                "unknown preset '{name}' (available: {})",
                known.join(", ")
            ))
        })
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "invalid boolean '{value}' for '{key}'"
        ))),
    }
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        Self::parse(preset_text(name)?, Path::new("."))
    }

    /// Reads a config file; relative mesh paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut adaptive = AdaptiveKeys::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            cfg.apply(key.trim(), value.trim(), base_dir, &mut adaptive)
                .map_err(|e| match e {
                    Error::Config(msg) => Error::Config(format!("line {}: {msg}", n + 1)),
                    other => other,
                })?;
        }
        cfg.finish(adaptive)?;
        Ok(cfg)
    }

    /// Overrides one key, as the command line does.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut adaptive = AdaptiveKeys::from_config(self);
        self.apply(key, value, Path::new("."), &mut adaptive)?;
        self.finish(adaptive)
    }

    fn apply(&mut self, key: &str, value: &str, base: &Path, ad: &mut AdaptiveKeys) -> Result<()> {
        match key {
            "name" => self.name = value.to_string(),
            "domain" => {
                if value.ends_with(".mesh") || value.contains('/') {
                    self.domain = None;
                    self.mesh = MeshSource::File(base.join(value));
                } else {
                    self.domain = Some(value.parse()?);
                    if self.domain != Some(Domain::UnitSquare) && self.mesh == MeshSource::Delaunay
                    {
                        self.mesh = MeshSource::Builtin;
                    }
                }
            }
            "mesh" => {
                self.mesh = match value {
                    "builtin" => MeshSource::Builtin,
                    "delaunay" => MeshSource::Delaunay,
                    path => MeshSource::File(base.join(path)),
                }
            }
            "initial_refinements" => self.initial_refinements = parse_num(key, value)?,
            "fe_degree" => self.fe_degree = parse_num(key, value)?,
            "rt_degrees" => {
                self.rt_degrees = value
                    .split(',')
                    .map(|s| parse_num::<usize>(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "refinement" => match value {
                "uniform" => ad.adaptive = false,
                "adaptive" => ad.adaptive = true,
                _ => {
                    return Err(Error::Config(format!(
                        "refinement must be uniform or adaptive, got '{value}'"
                    )))
                }
            },
            "adaptive" => ad.adaptive = parse_bool(key, value)?,
            "levels" => ad.levels = parse_num(key, value)?,
            "theta" => ad.theta = parse_num(key, value)?,
            "max_dofs" => ad.max_dofs = parse_num(key, value)?,
            "loops" => ad.loops = parse_num(key, value)?,
            "eigs" | "num_eigenpairs" => self.num_eigenpairs = parse_num(key, value)?,
            "guaranteed_m" => self.guaranteed_m = parse_num(key, value)?,
            "kappa" => self.kappa = parse_num(key, value)?,
            "lambda_next_lower" => {
                self.lambda_next_lower = match value {
                    "" | "none" | "cr" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "eig_tol" => self.eig_tol = parse_num(key, value)?,
            "lin_tol" => self.lin_tol = parse_num(key, value)?,
            "output_dir" | "out" => self.output_dir = PathBuf::from(value),
            "svg" | "emit_svg" => self.emit_svg = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    fn finish(&mut self, ad: AdaptiveKeys) -> Result<()> {
        self.refinement = if ad.adaptive {
            Refinement::Adaptive {
                theta: ad.theta,
                max_dofs: ad.max_dofs,
                loops: ad.loops,
            }
        } else {
            Refinement::Uniform { levels: ad.levels }
        };
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !matches!(self.fe_degree, 1 | 2) {
            return fail(format!("fe_degree must be 1 or 2, got {}", self.fe_degree));
        }
        if self.rt_degrees.is_empty() || self.rt_degrees.iter().any(|&p| p > 2) {
            return fail("rt_degrees must be a nonempty subset of {0, 1, 2}".into());
        }
        if self.num_eigenpairs == 0 {
            return fail("eigs must be at least 1".into());
        }
        if self.guaranteed_m > self.num_eigenpairs {
            return fail(format!(
                "guaranteed_m ({}) exceeds the number of eigenpairs ({})",
                self.guaranteed_m, self.num_eigenpairs
            ));
        }
        if !(self.kappa > 1.0) {
            return fail(format!("kappa must exceed 1, got {}", self.kappa));
        }
        if !(self.eig_tol > 0.0) || !(self.lin_tol > 0.0) {
            return fail("tolerances must be positive".into());
        }
        if let Some(l) = self.lambda_next_lower {
            if !(l > 0.0) {
                return fail(format!("lambda_next_lower must be positive, got {l}"));
            }
        }
        if self.domain.is_none() && !matches!(self.mesh, MeshSource::File(_)) {
            return fail("a custom domain needs a mesh file".into());
        }
        if self.mesh == MeshSource::Delaunay && self.domain != Some(Domain::UnitSquare) {
            return fail("the delaunay mesh covers the unit square only".into());
        }
        match self.refinement {
            Refinement::Uniform { levels } if levels == 0 => fail("levels must be at least 1".into()),
            Refinement::Adaptive { theta, loops, .. } if !(theta > 0.0 && theta < 1.0) || loops == 0 => {
                fail(format!("adaptive runs need theta in (0,1) and loops >= 1 (theta {theta}, loops {loops})"))
            }
            _ => Ok(()),
        }
    }

    /// Initial mesh after the requested uniform pre-refinements.
    pub fn initial_mesh(&self) -> Result<Mesh> {
        let mut mesh = match &self.mesh {
            MeshSource::Builtin => self.domain.expect("validated").mesh(),
            MeshSource::Delaunay => {
                parse_mesh(DELAUNAY_FIXTURE, Path::new("square_delaunay_initial.mesh"))?
            }
            MeshSource::File(p) => load_mesh(p)?,
        };
        for _ in 0..self.initial_refinements {
            mesh = refine_uniform(&mesh);
        }
        Ok(mesh)
    }

    /// Resolved configuration in the same `key = value` format.
    pub fn to_text(&self) -> String {
        let mesh = match &self.mesh {
            MeshSource::Builtin => "builtin".to_string(),
            MeshSource::Delaunay => "delaunay".to_string(),
            MeshSource::File(p) => p.display().to_string(),
        };
        let rt: Vec<String> = self.rt_degrees.iter().map(|p| p.to_string()).collect();
        let mut out = match self.domain {
            Some(d) => format!(
                "name = {}\ndomain = {}\nmesh = {mesh}\n",
                self.name,
                d.name()
            ),
            None => format!("name = {}\ndomain = {mesh}\n", self.name),
        };
        out += &format!(
            "initial_refinements = {}\nfe_degree = {}\nrt_degrees = {}\n",
            self.initial_refinements,
            self.fe_degree,
            rt.join(", ")
        );
        match self.refinement {
            Refinement::Uniform { levels } => {
                out += &format!("refinement = uniform\nlevels = {levels}\n")
            }
            Refinement::Adaptive {
                theta,
                max_dofs,
                loops,
            } => {
                out += &format!(
                "refinement = adaptive\ntheta = {theta}\nmax_dofs = {max_dofs}\nloops = {loops}\n"
            )
            }
        }
        out += &format!(
            "eigs = {}\nguaranteed_m = {}\nkappa = {}\n",
            self.num_eigenpairs, self.guaranteed_m, self.kappa
        );
        if let Some(l) = self.lambda_next_lower {
            out += &format!("lambda_next_lower = {l:?}\n");
        }
        out += &format!(
            "eig_tol = {:e}\nlin_tol = {:e}\noutput_dir = {}\nsvg = {}\n",
            self.eig_tol,
            self.lin_tol,
            self.output_dir.display(),
            self.emit_svg
        );
        out
    }
}

/// Refinement keys collected before the refinement mode is known.
struct AdaptiveKeys {
    adaptive: bool,
    levels: usize,
    theta: f64,
    max_dofs: usize,
    loops: usize,
}

impl Default for AdaptiveKeys {
    fn default() -> Self {
        AdaptiveKeys {
            adaptive: false,
            levels: 4,
            theta: 0.5,
            max_dofs: 30_000,
            loops: 30,
        }
    }
}

impl AdaptiveKeys {
    fn from_config(cfg: &ExperimentConfig) -> Self {
        let mut k = AdaptiveKeys::default();
        match cfg.refinement {
            Refinement::Uniform { levels } => k.levels = levels,
            Refinement::Adaptive {
                theta,
                max_dofs,
                loops,
            } => {
                k.adaptive = true;
                k.theta = theta;
                k.max_dofs = max_dofs;
                k.loops = loops;
            }
        }
        k
    }
}
