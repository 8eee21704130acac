//! Run configuration: flat `key = value` lines under `[section]` headers.

use std::fmt;
use std::path::{Path, PathBuf};

use ini::Ini;
use manifold_stein::geometry::{ManifoldKind, Point};
use manifold_stein::potentials::Potential;
use nalgebra::DMatrix;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<manifold_stein::Error> for ConfigError {
    fn from(e: manifold_stein::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Simulate,
    Couple,
    Stein,
    Bound,
    Compare,
    Selftest,
}

impl Experiment {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "simulate" => Experiment::Simulate,
            "couple" => Experiment::Couple,
            "stein" => Experiment::Stein,
            "bound" => Experiment::Bound,
            "compare" => Experiment::Compare,
            "selftest" => Experiment::Selftest,
            other => return err(format!("unknown experiment `{other}`")),
        })
    }
}

/// A parsed config. Section lookups are typed and report the offending
/// `[section] key` on failure.
#[derive(Debug)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output: PathBuf,
    /// Check names restricted by `[checks] enabled`, if given.
    pub enabled: Option<Vec<String>>,
    ini: Ini,
}

impl RunConfig {
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text, seed_override)
    }

    pub fn parse(text: &str, seed_override: Option<u64>) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError(format!("config syntax: {e}")))?;
        let mut cfg = RunConfig {
            experiment: Experiment::Selftest,
            seed: 0,
            output: PathBuf::new(),
            enabled: None,
            ini,
        };
        cfg.experiment = Experiment::parse(&cfg.req_str("run", "experiment")?)?;
        cfg.seed = match seed_override {
            Some(s) => s,
            None => cfg.req("run", "seed")?,
        };
        cfg.output = PathBuf::from(cfg.get_str("run", "output").unwrap_or_else(|| "out".into()));
        cfg.enabled = cfg
            .get_str("checks", "enabled")
            .map(|s| s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect());
        Ok(cfg)
    }

    pub fn get_str(&self, section: &str, key: &str) -> Option<String> {
        self.ini.get_from(Some(section), key).map(|s| s.trim().to_string())
    }

    pub fn req_str(&self, section: &str, key: &str) -> Result<String> {
        self.get_str(section, key)
            .ok_or_else(|| ConfigError(format!("missing `{key}` in [{section}]")))
    }

    pub fn get<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get_str(section, key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("[{section}] {key} = `{s}` is not valid"))),
        }
    }

    pub fn req<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T> {
        self.get(section, key)?
            .ok_or_else(|| ConfigError(format!("missing `{key}` in [{section}]")))
    }

    pub fn or<T: std::str::FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    pub fn numbers(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.get_str(section, key).map(|s| parse_numbers(&s, section, key)).transpose()
    }

    pub fn kind(&self) -> Result<ManifoldKind> {
        let name = self.req_str("manifold", "kind")?;
        let dim = self.or("manifold", "dim", if name == "rotations" { 3 } else { 2 })?;
        Ok(ManifoldKind::from_name(&name, dim)?)
    }

    /// A point given as comma-separated ambient coordinates (an angle on the
    /// circle).
    pub fn point(&self, section: &str, key: &str) -> Result<Option<Point>> {
        let kind = self.kind()?;
        self.numbers(section, key)?.map(|c| to_point(kind, c, section, key)).transpose()
    }

    /// Points separated by `;`.
    pub fn points(&self, section: &str, key: &str) -> Result<Option<Vec<Point>>> {
        let kind = self.kind()?;
        let Some(s) = self.get_str(section, key) else {
            return Ok(None);
        };
        s.split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|t| to_point(kind, parse_numbers(t, section, key)?, section, key))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// The `[potential]` block.
    pub fn potential(&self) -> Result<Potential> {
        let kind = self.kind()?;
        let family = self.req_str("potential", "family")?;
        let origin = Point::origin(kind)?;
        let center = self.point("potential", "center")?.unwrap_or(origin.clone());
        let p = match family.as_str() {
            "vmf" => match kind {
                ManifoldKind::Sphere(_) => Potential::vmf_sphere(center, self.req("potential", "c")?)?,
                ManifoldKind::Rotations(_) => Potential::vmf_rotations(center, self.req("potential", "c")?)?,
                _ => return err("vmf needs a sphere or rotations manifold"),
            },
            "von_mises" => Potential::von_mises(center.coords()[0], self.req("potential", "c")?)?,
            "sq_dist" => Potential::sq_dist_hyperbolic(center, self.req("potential", "c")?)?,
            "gaussian" => {
                let m = kind.dim();
                let a = match self.numbers("potential", "a")? {
                    Some(v) if v.len() == 1 => DMatrix::identity(m, m) * v[0],
                    Some(v) if v.len() == m * m => DMatrix::from_row_slice(m, m, &v),
                    Some(_) => return err(format!("[potential] a needs 1 or {} numbers", m * m)),
                    None => DMatrix::identity(m, m),
                };
                Potential::gaussian(center, a)?
            }
            "fisher_watson" => {
                let x1 = self.point("potential", "x1")?.ok_or_else(|| ConfigError("missing `x1` in [potential]".into()))?;
                let x2 = self.point("potential", "x2")?.ok_or_else(|| ConfigError("missing `x2` in [potential]".into()))?;
                Potential::fisher_watson(x1, x2, self.req("potential", "c1")?, self.req("potential", "c2")?)?
            }
            "uniform" => Potential::uniform(kind)?,
            other => return err(format!("unknown potential family `{other}`")),
        };
        Ok(p)
    }

    /// `[potential] kappa` if declared, otherwise the certified value.
    pub fn kappa(&self, p: &Potential) -> Result<f64> {
        let k = match self.get::<f64>("potential", "kappa")? {
            Some(k) => k,
            None => p.a1_certificate().kappa.ok_or_else(|| {
                ConfigError(format!(
                    "no certified curvature constant for this potential ({}); declare `kappa` in [potential]",
                    p.a1_certificate().reason.unwrap_or_default()
                ))
            })?,
        };
        if !(k > 0.0 && k.is_finite()) {
            return err(format!("kappa must be positive, got {k}"));
        }
        Ok(k)
    }
}

fn parse_numbers(s: &str, section: &str, key: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t {
                "pi" => Ok(std::f64::consts::PI),
                "-pi" => Ok(-std::f64::consts::PI),
                _ => t
                    .parse::<f64>()
                    .map_err(|_| ConfigError(format!("[{section}] {key}: `{t}` is not a number"))),
            }
        })
        .collect()
}

fn to_point(kind: ManifoldKind, c: Vec<f64>, section: &str, key: &str) -> Result<Point> {
    if kind == ManifoldKind::Circle && c.len() == 1 {
        return Ok(Point::angle(c[0]));
    }
    Point::new(kind, c).map_err(|e| ConfigError(format!("[{section}] {key}: {e}")))
}
