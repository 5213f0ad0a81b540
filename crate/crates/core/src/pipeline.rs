//! Experiment configuration and the end-to-end pipeline
//! (class → strong approximation → spectral gap → counting), plus the CSV and
//! JSON writers shared with the command line front end.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::counting::{self, CountReport, TrendVerdict};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::homology::Block;
use crate::modq::{self, StrongApproxReport};
use crate::perm::{Alphabet, PermutationPair};
use crate::rauzy::{self, RauzyClass};
use crate::saddle::{self, EnumerationOptions, SaddleConnection};
use crate::spectrum::{self, EigenOptions, GapReport};
use crate::surface::{SuspensionSurface, Q};

/// A length given either as an integer or as a rational string like `"25/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthValue {
    Integer(i64),
    Text(String),
}

impl LengthValue {
    pub fn to_rational(&self) -> Result<Q> {
        match self {
            LengthValue::Integer(n) => Ok(Q::from_integer(*n)),
            LengthValue::Text(s) => parse_rational(s),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Q> {
    s.trim()
        .parse::<Q>()
        .map_err(|_| Error::Parse(format!("not a rational number: {s:?}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Class,
    StrongApprox,
    Gap,
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Canonical,
    /// Seeded random data with the given common denominator.
    Random {
        denominator: i64,
    },
    Explicit {
        lambda: Vec<String>,
        tau: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    pub vertices: usize,
    pub elements: usize,
    pub nodes: usize,
    pub matvecs: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            vertices: rauzy::DEFAULT_MAX_VERTICES,
            elements: modq::DEFAULT_MAX_ELEMENTS,
            nodes: saddle::DEFAULT_MAX_NODES,
            matvecs: spectrum::DEFAULT_MAX_MATVECS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Two lines of letters; takes precedence over `permutation_file`.
    #[serde(default)]
    pub permutation: Option<String>,
    #[serde(default)]
    pub permutation_file: Option<PathBuf>,
    /// One modulus or a list of them.
    #[serde(deserialize_with = "one_or_many")]
    pub q: Vec<u32>,
    #[serde(default)]
    pub lengths: Vec<LengthValue>,
    /// Directed endpoint pair for counting; defaults to `[0, 1]` with two or
    /// more singularities and `[0, 0]` otherwise.
    #[serde(default)]
    pub endpoints: Option<[usize; 2]>,
    /// Representation for strong approximation; defaults to `sigma` with two
    /// or more singularities and `absolute` otherwise.
    #[serde(default)]
    pub block: Option<Block>,
    #[serde(default = "default_gap_block")]
    pub gap_block: Block,
    #[serde(default = "default_surface")]
    pub surface: SurfaceSpec,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_stages")]
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub deterministic: bool,
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<u32>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(u32),
        Many(Vec<u32>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(q) => vec![q],
        OneOrMany::Many(v) => v,
    })
}

fn default_gap_block() -> Block {
    Block::Absolute
}
fn default_surface() -> SurfaceSpec {
    SurfaceSpec::Canonical
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("flatcount-out")
}
fn default_stages() -> Vec<Stage> {
    vec![Stage::Class, Stage::StrongApprox, Stage::Gap, Stage::Count]
}
fn default_tol() -> f64 {
    spectrum::DEFAULT_TOL
}
fn default_true() -> bool {
    true
}

pub fn validate_modulus(q: u32) -> Result<()> {
    if q < 3 || q % 2 == 0 {
        return Err(Error::Config(format!(
            "q must be odd and at least 3, got {q}"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a config file; a relative `permutation_file` or `output_dir` is
    /// taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = &cfg.permutation_file {
            if p.is_relative() {
                cfg.permutation_file = Some(base.join(p));
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// Every check that does not need the permutation's geometry.
    pub fn validate(&self) -> Result<()> {
        if self.q.is_empty() {
            return Err(Error::Config("q list is empty".into()));
        }
        for &q in &self.q {
            validate_modulus(q)?;
        }
        let c = &self.caps;
        if c.vertices == 0 || c.elements == 0 || c.nodes == 0 || c.matvecs == 0 {
            return Err(Error::Config("caps must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.permutation.is_none() && self.permutation_file.is_none() {
            return Err(Error::Config("no permutation given".into()));
        }
        if self.stages.contains(&Stage::Count) {
            let ls = self.length_grid()?;
            if ls.is_empty() {
                return Err(Error::Config("counting needs a length grid".into()));
            }
            if ls[0] <= Q::from_integer(0) || ls.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(
                    "lengths must be positive and increasing".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn length_grid(&self) -> Result<Vec<Q>> {
        self.lengths.iter().map(LengthValue::to_rational).collect()
    }

    pub fn permutation(&self) -> Result<(Alphabet, PermutationPair)> {
        let text = match (&self.permutation, &self.permutation_file) {
            (Some(t), _) => t.clone(),
            (None, Some(p)) => fs::read_to_string(p)?,
            (None, None) => return Err(Error::Config("no permutation given".into())),
        };
        PermutationPair::parse(&text)
    }
}

/// Builds the surface described by a spec.
pub fn build_surface(
    pi: &PermutationPair,
    spec: &SurfaceSpec,
    seed: u64,
) -> Result<SuspensionSurface> {
    match spec {
        SurfaceSpec::Canonical => SuspensionSurface::canonical(pi),
        SurfaceSpec::Random { denominator } => SuspensionSurface::random(pi, seed, *denominator),
        SurfaceSpec::Explicit { lambda, tau } => {
            let lambda = lambda
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()?;
            let tau = tau
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()?;
            SuspensionSurface::new(pi, lambda, tau)
        }
    }
}

pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

/// `index,top,bottom,top_target,bottom_target` for every vertex of a class.
pub fn write_class_csv(path: &Path, class: &RauzyClass, alphabet: &Alphabet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "top", "bottom", "top_target", "bottom_target"])?;
    for (i, p) in class.vertices().iter().enumerate() {
        let a = &class.arrows()[2 * i];
        let b = &class.arrows()[2 * i + 1];
        w.write_record([
            i.to_string(),
            alphabet.format_row(p.top()),
            alphabet.format_row(p.bottom()),
            a.target.to_string(),
            b.target.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `q,order,degree,lambda2,gap,residual,connected`.
pub fn write_gap_csv(path: &Path, report: &GapReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "q",
        "order",
        "degree",
        "lambda2",
        "gap",
        "residual",
        "connected",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.q.to_string(),
            r.order.to_string(),
            r.degree.to_string(),
            r.lambda2.to_string(),
            r.gap.to_string(),
            r.residual.to_string(),
            r.connected.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `L,xi_id,count,orbit_size,deviation`, one row per class and length.
pub fn write_count_csv(path: &Path, report: &CountReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["L", "xi_id", "count", "orbit_size", "deviation"])?;
    for (k, l) in report.lengths.iter().enumerate() {
        for (i, c) in report.classes.iter().enumerate() {
            w.write_record([
                format_rational(l),
                c.id.to_string(),
                c.counts[k].to_string(),
                report.orbit_size.to_string(),
                report.class_deviation(i, k).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `hol_x,hol_y,length2,start,end,class_coeffs` with `;`-separated
/// coefficients.
pub fn write_connections_csv(path: &Path, records: &[SaddleConnection]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["hol_x", "hol_y", "length2", "start", "end", "class_coeffs"])?;
    for c in records {
        w.write_record([
            format_rational(&c.holonomy.0),
            format_rational(&c.holonomy.1),
            format_rational(&c.length2()),
            c.start.to_string(),
            c.end.to_string(),
            join(&c.class),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Summary written next to `count.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct CountSummary {
    pub q: u32,
    pub endpoints: (usize, usize),
    pub lengths: Vec<String>,
    pub totals: Vec<u64>,
    pub all_totals: Vec<u64>,
    pub outside: Vec<u64>,
    pub orbit_size: usize,
    pub predicted_orbit_size: u128,
    pub orbit_agrees: bool,
    pub unattained: usize,
    pub deviation: Vec<f64>,
    pub trend: Option<TrendVerdict>,
    pub sv_constant: f64,
    pub quadratic_ratios: Vec<f64>,
    pub masur_band: f64,
    pub holonomy_collisions: usize,
}

/// Paths of the files a pipeline run wrote.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

/// Runs the configured stages and writes their artifacts into
/// `output_dir`. The config is fully validated before any work starts.
pub fn run(cfg: &ExperimentConfig, exec: Exec) -> Result<Artifacts> {
    cfg.validate()?;
    let (alphabet, pi) = cfg.permutation()?;
    let endpoints_cfg = cfg.endpoints;
    fs::create_dir_all(&cfg.output_dir)?;
    let out = |name: &str| cfg.output_dir.join(name);
    let mut artifacts = Artifacts::default();

    let class = RauzyClass::build_capped(&pi, cfg.caps.vertices)?;
    let singularities = crate::polygon::Corners::of(&pi).count();
    let block = cfg.block.unwrap_or(if singularities >= 2 {
        Block::Sigma
    } else {
        Block::Absolute
    });
    let endpoints = match endpoints_cfg {
        Some([a, b]) => (a, b),
        None if singularities >= 2 => (0, 1),
        None => (0, 0),
    };
    if endpoints.0 >= singularities || endpoints.1 >= singularities {
        return Err(Error::Config(format!(
            "endpoints {endpoints:?} out of range for {singularities} singularities"
        )));
    }

    if cfg.stages.contains(&Stage::Class) {
        let p = out("class.csv");
        write_class_csv(&p, &class, &alphabet)?;
        artifacts.files.push(p);
    }
    if cfg.stages.contains(&Stage::StrongApprox) {
        let reports: Vec<StrongApproxReport> = cfg
            .q
            .iter()
            .map(|&q| {
                modq::strong_approximation(&class, &alphabet, q, block, cfg.caps.elements, exec)
            })
            .collect::<Result<_>>()?;
        let p = out("strong_approx.json");
        write_json(&p, &reports)?;
        artifacts.files.push(p);
    }
    if cfg.stages.contains(&Stage::Gap) {
        let opts = EigenOptions {
            tol: cfg.tol,
            max_matvecs: cfg.caps.matvecs,
            seed: cfg.seed,
            deterministic: cfg.deterministic,
            exec,
        };
        let report = spectrum::gap_report(&class, &cfg.q, cfg.gap_block, cfg.caps.elements, opts)?;
        let p = out("gap.csv");
        write_gap_csv(&p, &report)?;
        artifacts.files.push(p);
    }
    if cfg.stages.contains(&Stage::Count) {
        let surface = build_surface(&pi, &cfg.surface, cfg.seed)?;
        let grid = cfg.length_grid()?;
        let l_max = *grid.last().expect("validated grid");
        let records = saddle::enumerate(
            &surface,
            l_max,
            EnumerationOptions {
                max_nodes: cfg.caps.nodes,
                exec,
            },
        )?;
        let collisions = saddle::holonomy_collisions(&records).len();
        let mut summaries = Vec::new();
        for &q in &cfg.q {
            let report = counting::count_records(&surface, &records, &grid, q, endpoints, exec)?;
            let name = if cfg.q.len() == 1 {
                "count.csv".to_string()
            } else {
                format!("count_q{q}.csv")
            };
            let p = out(&name);
            write_count_csv(&p, &report)?;
            artifacts.files.push(p);
            let trend = if grid.len() >= 3 {
                counting::report_trend(&report).ok()
            } else {
                None
            };
            summaries.push(CountSummary {
                q,
                endpoints,
                lengths: grid.iter().map(format_rational).collect(),
                totals: report.totals.clone(),
                all_totals: report.all_totals.clone(),
                outside: report.outside.clone(),
                orbit_size: report.orbit_size,
                predicted_orbit_size: report.predicted_orbit_size,
                orbit_agrees: report.orbit_agrees(),
                unattained: report.unattained,
                deviation: report.deviation.clone(),
                trend,
                sv_constant: counting::report_sv_constant(&report),
                quadratic_ratios: counting::quadratic_ratios(&report),
                masur_band: counting::masur_band(&report),
                holonomy_collisions: collisions,
            });
        }
        let p = out("count_summary.json");
        write_json(&p, &summaries)?;
        artifacts.files.push(p);
    }
    Ok(artifacts)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
permutation = "A B C D\nD C B A"
q = [3]
lengths = [10, "25/2", 20]
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.stages.len(), 4);
        assert_eq!(c.surface, SurfaceSpec::Canonical);
        assert_eq!(c.length_grid().unwrap()[1], Q::new(25, 2));
        assert!(c.deterministic);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let even = MINIMAL.replace("q = [3]", "q = [3, 4]");
        let c = ExperimentConfig::from_toml(&even).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let unordered = MINIMAL.replace("[10, \"25/2\", 20]", "[20, 10]");
        assert!(ExperimentConfig::from_toml(&unordered)
            .unwrap()
            .validate()
            .is_err());
        assert!(ExperimentConfig::from_toml("q = [3]\nbogus = 1").is_err());
        let zero_cap = format!("{MINIMAL}\n[caps]\nnodes = 0\n");
        assert!(ExperimentConfig::from_toml(&zero_cap)
            .unwrap()
            .validate()
            .is_err());
    }

    #[test]
    fn surface_specs() {
        let text = format!("{MINIMAL}\n[surface]\nkind = \"explicit\"\nlambda = [\"1\", \"1\", \"1\", \"1\"]\ntau = [\"3/2\", \"1/2\", \"-1/2\", \"-3/2\"]\n");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        let (_, pi) = c.permutation().unwrap();
        let s = build_surface(&pi, &c.surface, 0).unwrap();
        assert_eq!(s.scale(), 2);
    }
}
