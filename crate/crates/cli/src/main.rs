use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flatcount_core::counting;
use flatcount_core::error::{Error, Result};
use flatcount_core::homology::{select_convention, Block, HomologyFrame};
use flatcount_core::modq::{self, loop_generators_mod_q, unimodular_count};
use flatcount_core::pipeline::{
    self, parse_rational, validate_modulus, ExperimentConfig, SurfaceSpec,
};
use flatcount_core::polygon::StratumSignature;
use flatcount_core::saddle::{self, EnumerationOptions};
use flatcount_core::spectrum::{self, EigenOptions};
use flatcount_core::surface::Q;
use flatcount_core::{Alphabet, Exec, PermutationPair, RauzyClass};

/// Rauzy classes, mod-q Rauzy-Veech groups, Cayley graph spectra and saddle
/// connection counts on suspension surfaces.
///
/// Exit status: 0 success, 1 I/O or overflow, 2 invalid input or
/// configuration, 3 cap exceeded, 4 inadmissible suspension data, 5 eigensolver
/// did not converge.
#[derive(Parser)]
#[command(name = "flatcount", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "FLATCOUNT_THREADS")]
    threads: Option<usize>,
    /// Seed for random suspension data and eigensolver start vectors.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Bitwise reproducible floating point reductions.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rauzy diagrams.
    #[command(subcommand)]
    Rauzy(RauzyCmd),
    /// Loop groups acting on homology mod q.
    #[command(subcommand)]
    Homology(HomologyCmd),
    /// Spectral gaps of Cayley graphs.
    #[command(subcommand)]
    Expander(ExpanderCmd),
    /// Suspension surfaces.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Counting statistics.
    #[command(subcommand)]
    Count(CountCmd),
    /// Run a pipeline described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum RauzyCmd {
    /// Build the Rauzy class of a permutation pair.
    Class {
        #[arg(long)]
        pi: PathBuf,
        #[arg(long, default_value_t = flatcount_core::rauzy::DEFAULT_MAX_VERTICES)]
        max_vertices: usize,
        /// CSV of vertices and move targets.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BlockArg {
    FullRelative,
    Absolute,
    Sigma,
}

impl From<BlockArg> for Block {
    fn from(b: BlockArg) -> Block {
        match b {
            BlockArg::FullRelative => Block::FullRelative,
            BlockArg::Absolute => Block::Absolute,
            BlockArg::Sigma => Block::Sigma,
        }
    }
}

#[derive(Subcommand)]
enum HomologyCmd {
    /// Closure order of the loop generators against the predicted group
    /// order.
    StrongApprox {
        #[arg(long)]
        pi: PathBuf,
        #[arg(long)]
        q: u32,
        #[arg(long, value_enum, default_value = "absolute")]
        block: BlockArg,
        #[arg(long, default_value_t = modq::DEFAULT_MAX_ELEMENTS)]
        max_elements: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orbit of a vector (in the block's coordinates) under the loop
    /// generators. Defaults to the first basis vector, or to the lift of σ
    /// for the sigma block.
    Orbit {
        #[arg(long)]
        pi: PathBuf,
        #[arg(long)]
        q: u32,
        #[arg(long, value_enum, default_value = "absolute")]
        block: BlockArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        vector: Option<Vec<i64>>,
    },
}

#[derive(Subcommand)]
enum ExpanderCmd {
    /// Second adjacency eigenvalue of Cay(G(q), T ∪ T⁻¹) for each q.
    Gap {
        #[arg(long)]
        pi: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u32>,
        #[arg(long, value_enum, default_value = "absolute")]
        block: BlockArg,
        #[arg(long, default_value_t = spectrum::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = spectrum::DEFAULT_MAX_MATVECS)]
        max_matvecs: usize,
        #[arg(long, default_value_t = modq::DEFAULT_MAX_ELEMENTS)]
        max_elements: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long)]
    pi: PathBuf,
    /// Canonical data λ = 1, τ = π_b − π_t (the default).
    #[arg(long, conflicts_with_all = ["lambda", "tau", "random_denominator"])]
    canonical: bool,
    /// Comma-separated rationals.
    #[arg(long, value_delimiter = ',', requires = "tau")]
    lambda: Option<Vec<String>>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "lambda"
    )]
    tau: Option<Vec<String>>,
    /// Seeded random data with this common denominator.
    #[arg(long, conflicts_with_all = ["lambda", "tau"])]
    random_denominator: Option<i64>,
    #[arg(long, default_value_t = saddle::DEFAULT_MAX_NODES)]
    max_nodes: usize,
}

impl SurfaceArgs {
    fn spec(&self) -> SurfaceSpec {
        match (&self.lambda, &self.tau, self.random_denominator) {
            _ if self.canonical => SurfaceSpec::Canonical,
            (Some(l), Some(t), _) => SurfaceSpec::Explicit {
                lambda: l.clone(),
                tau: t.clone(),
            },
            (_, _, Some(denominator)) => SurfaceSpec::Random { denominator },
            _ => SurfaceSpec::Canonical,
        }
    }
}

#[derive(Subcommand)]
enum SurfaceCmd {
    /// All saddle connections of length at most L.
    Enumerate {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long = "L")]
        length: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CountCmd {
    /// Counts by homology class mod q along a length grid.
    Classes {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        q: u32,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        lengths: Vec<String>,
        #[arg(long, value_delimiter = ',', num_args = 1)]
        endpoints: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Primitive lattice points in a residue class mod q.
    Lattice {
        #[arg(long = "L")]
        length: i64,
        #[arg(long)]
        q: i64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        residue: Vec<i64>,
    },
}

fn read_pi(path: &Path) -> Result<(Alphabet, PermutationPair)> {
    PermutationPair::parse(&fs::read_to_string(path)?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    say(&text)
}

/// Writes a line to stdout; a closed pipe ends output quietly.
fn say(line: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn run(cli: Cli) -> Result<()> {
    flatcount_core::exec::init_threads(cli.threads);
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    match cli.command {
        Command::Rauzy(RauzyCmd::Class {
            pi,
            max_vertices,
            out,
        }) => {
            let (alphabet, pi) = read_pi(&pi)?;
            let class = RauzyClass::build_capped(&pi, max_vertices)?;
            let sig = StratumSignature::of(&pi);
            say(&format!("vertices: {}", class.len()))?;
            say(&format!("stratum: {}", sig.label()))?;
            say(&format!("genus: {}", sig.genus))?;
            if let Some(out) = out {
                pipeline::write_class_csv(&out, &class, &alphabet)?;
            }
        }
        Command::Homology(HomologyCmd::StrongApprox {
            pi,
            q,
            block,
            max_elements,
            out,
        }) => {
            validate_modulus(q)?;
            let (alphabet, pi) = read_pi(&pi)?;
            let class = RauzyClass::build(&pi)?;
            let report =
                modq::strong_approximation(&class, &alphabet, q, block.into(), max_elements, exec)?;
            match out {
                Some(p) => pipeline::write_json(&p, &report)?,
                None => print_json(&report)?,
            }
        }
        Command::Homology(HomologyCmd::Orbit {
            pi,
            q,
            block,
            vector,
        }) => {
            validate_modulus(q)?;
            let (_, pi) = read_pi(&pi)?;
            let block: Block = block.into();
            let class = RauzyClass::build(&pi)?;
            let frame = HomologyFrame::new(&pi)?;
            let conv = select_convention(&class)?;
            let gens = loop_generators_mod_q(&class, &frame, block, conv, q)?;
            let n = frame.basis(block)?.cols();
            let v = match vector {
                Some(v) if v.len() != n => {
                    return Err(Error::Precondition(format!("vector needs {n} coordinates")));
                }
                Some(v) => v,
                None => {
                    let mut v = vec![0; n];
                    v[if block == Block::Sigma { n - 1 } else { 0 }] = 1;
                    v
                }
            };
            let v: Vec<u32> = v.iter().map(|x| x.rem_euclid(q as i64) as u32).collect();
            let orbit = modq::orbit(&gens, &v);
            let g = frame.genus as u32;
            let predicted = match block {
                Block::Sigma => Some((q as u128).pow(2 * g)),
                Block::Absolute => Some(unimodular_count(g, q as u64)),
                Block::FullRelative => None,
            };
            print_json(&serde_json::json!({
                "q": q,
                "genus": g,
                "vector": v,
                "orbit_size": orbit.len(),
                "predicted_orbit_size": predicted,
            }))?;
        }
        Command::Expander(ExpanderCmd::Gap {
            pi,
            q,
            block,
            tol,
            max_matvecs,
            max_elements,
            out,
        }) => {
            for &m in &q {
                validate_modulus(m)?;
            }
            let (_, pi) = read_pi(&pi)?;
            let class = RauzyClass::build(&pi)?;
            let opts = EigenOptions {
                tol,
                max_matvecs,
                seed: cli.seed,
                deterministic: cli.deterministic,
                exec,
            };
            let report = spectrum::gap_report(&class, &q, block.into(), max_elements, opts)?;
            if let Some(p) = out {
                pipeline::write_gap_csv(&p, &report)?;
            }
            print_json(&report)?;
        }
        Command::Surface(SurfaceCmd::Enumerate {
            surface,
            length,
            out,
        }) => {
            let (_, pi) = read_pi(&surface.pi)?;
            let s = pipeline::build_surface(&pi, &surface.spec(), cli.seed)?;
            let l = parse_rational(&length)?;
            let records = saddle::enumerate(
                &s,
                l,
                EnumerationOptions {
                    max_nodes: surface.max_nodes,
                    exec,
                },
            )?;
            pipeline::write_connections_csv(&out, &records)?;
            say(&format!("connections: {}", records.len()))?;
        }
        Command::Count(CountCmd::Classes {
            surface,
            q,
            lengths,
            endpoints,
            out,
        }) => {
            validate_modulus(q)?;
            let grid: Vec<Q> = lengths
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<_>>()?;
            let (_, pi) = read_pi(&surface.pi)?;
            let s = pipeline::build_surface(&pi, &surface.spec(), cli.seed)?;
            let endpoints = match endpoints.as_deref() {
                Some([a, b]) => (*a, *b),
                Some(_) => {
                    return Err(Error::Parse("--endpoints takes two singularity ids".into()))
                }
                None if s.singularity_count() >= 2 => (0, 1),
                None => (0, 0),
            };
            let report = counting::count_by_class(
                &s,
                &grid,
                q,
                endpoints,
                EnumerationOptions {
                    max_nodes: surface.max_nodes,
                    exec,
                },
            )?;
            pipeline::write_count_csv(&out, &report)?;
            let trend = counting::report_trend(&report).ok();
            print_json(&serde_json::json!({
                "q": q,
                "endpoints": endpoints,
                "totals": report.totals,
                "orbit_size": report.orbit_size,
                "predicted_orbit_size": report.predicted_orbit_size,
                "unattained": report.unattained,
                "outside": report.outside,
                "deviation": report.deviation,
                "trend": trend,
                "sv_constant": counting::report_sv_constant(&report),
                "masur_band": counting::masur_band(&report),
            }))?;
        }
        Command::Count(CountCmd::Lattice { length, q, residue }) => {
            let [a, b] = residue[..] else {
                return Err(Error::Parse("--residue takes two integers".into()));
            };
            let n = counting::lattice_oracle(length, q, (a, b), exec)?;
            let predicted = counting::lattice_prediction(length as f64, q as u64);
            print_json(&serde_json::json!({
                "L": length,
                "q": q,
                "residue": [a, b],
                "count": n,
                "predicted": predicted,
                "relative_error": (n as f64 - predicted) / predicted,
            }))?;
        }
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.deterministic |= cli.deterministic;
            if cli.seed != 0 {
                cfg.seed = cli.seed;
            }
            let artifacts = pipeline::run(&cfg, exec)?;
            for f in artifacts.files {
                say(&f.display().to_string())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
