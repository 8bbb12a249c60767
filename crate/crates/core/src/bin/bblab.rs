use std::path::PathBuf;
use std::process::ExitCode;

use bblab::lab::{paper_map_report, run, ExperimentConfig, ExperimentKind, FamilySource, ModulusConfig};
use bblab::modulus::OracleMode;
use bblab::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bblab", version, about = "Bing-Blankinship trees, shrinking certificates, Semmes complexes and modulus bounds")]
struct Cli {
    /// Experiment config (JSON); flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "dim")]
    dimension: Option<usize>,
    #[arg(long)]
    mesh: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Verb {
    /// Canonical tree as JSON scene and OBJ mesh.
    BuildTree {
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        angular: Option<usize>,
    },
    /// Bing shrinking certificate (interlaced for --dim 4).
    Shrink {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long = "dim")]
        dimension: Option<usize>,
        #[arg(long)]
        depth_cap: Option<usize>,
        #[arg(long)]
        delta0: Option<f64>,
        /// Decreasing diameter targets for the iterated schedule.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<f64>,
    },
    /// Regularity, connectivity and self-similarity audits of a Semmes complex.
    MetricAudit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        negative_control: bool,
        #[arg(long)]
        dump_complex: bool,
    },
    /// Discrete p-modulus of a surface family.
    Modulus {
        #[command(flatten)]
        common: Common,
        /// Family JSON with "members" and optionally "volumes".
        #[arg(long, conflicts_with_all = ["base_res", "core_word"])]
        family: Option<PathBuf>,
        /// Graph dump supplying cell volumes for --family.
        #[arg(long, requires = "family")]
        complex: Option<PathBuf>,
        /// Product family over the annulus with this base resolution.
        #[arg(long, requires = "fiber_res")]
        base_res: Option<usize>,
        #[arg(long)]
        fiber_res: Option<usize>,
        /// Core family of this word in a full complex of --core-depth.
        #[arg(long, conflicts_with = "base_res")]
        core_word: Option<String>,
        #[arg(long, default_value_t = 2)]
        core_depth: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long, value_enum)]
        oracle: Option<OracleMode>,
        #[arg(long)]
        dump_density: bool,
    },
    /// Fiber-disk intersection audit on the canonical tree.
    Intersect {
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        fibers: Option<usize>,
    },
    /// Intrinsic versus Euclidean modulus table.
    Dichotomy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Trees of depths 1..K accumulating at the origin.
    PointSingularity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trees: Option<usize>,
        #[arg(long)]
        ambient_pitch: Option<f64>,
    },
    /// Map of operations and experiments to the results they exercise.
    PaperMap,
}

impl Verb {
    fn kind(&self) -> Option<ExperimentKind> {
        Some(match self {
            Verb::BuildTree { .. } => ExperimentKind::BuildTree,
            Verb::Shrink { .. } => ExperimentKind::Shrink,
            Verb::MetricAudit { .. } => ExperimentKind::MetricAudit,
            Verb::Modulus { .. } => ExperimentKind::Modulus,
            Verb::Intersect { .. } => ExperimentKind::Intersect,
            Verb::Dichotomy { .. } => ExperimentKind::Dichotomy,
            Verb::PointSingularity { .. } => ExperimentKind::PointSingularity,
            Verb::PaperMap => return None,
        })
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn apply_common(c: &mut ExperimentConfig, o: Common) {
    set(&mut c.lambda, o.lambda);
    set(&mut c.dimension, o.dimension);
    set(&mut c.mesh_scale, o.mesh);
    c.samples = o.samples.or(c.samples);
}

fn configure(cli: Cli, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(p) => {
            let c = ExperimentConfig::load(p)?;
            if c.kind != kind {
                return Err(Error::ConfigInvalid { field: "kind".into(), message: format!("config is {}, verb is {}", c.kind.name(), kind.name()) });
            }
            c
        }
        None => ExperimentConfig::new(kind),
    };
    set(&mut c.seed, cli.seed);
    set(&mut c.out, cli.out);
    c.threads = cli.threads.or(c.threads);
    match cli.verb {
        Verb::BuildTree { depth, angular } => {
            c.depth = depth.or(c.depth);
            set(&mut c.obj_angular, angular);
        }
        Verb::Shrink { epsilon, dimension, depth_cap, delta0, targets } => {
            c.epsilon = epsilon.or(c.epsilon);
            set(&mut c.dimension, dimension);
            c.depth_cap = depth_cap.or(c.depth_cap);
            set(&mut c.delta0, delta0);
            if !targets.is_empty() {
                c.targets = targets;
            }
        }
        Verb::MetricAudit { common, depth, negative_control, dump_complex } => {
            apply_common(&mut c, common);
            c.depth = depth.or(c.depth);
            c.negative_control |= negative_control;
            c.dump_complex |= dump_complex;
        }
        Verb::Modulus { common, family, complex, base_res, fiber_res, core_word, core_depth, p, tol, max_iter, oracle, dump_density } => {
            apply_common(&mut c, common);
            let source = match (family, base_res, core_word) {
                (Some(path), _, _) => Some(FamilySource::File { path, complex }),
                (None, Some(base_res), _) => Some(FamilySource::Product { base_res, fiber_res: fiber_res.unwrap_or(16) }),
                (None, None, Some(word)) => Some(FamilySource::Core { word, depth: core_depth }),
                _ => None,
            };
            let mut m = match (c.modulus.take(), source) {
                (Some(mut m), s) => {
                    set(&mut m.family, s);
                    m
                }
                (None, Some(family)) => ModulusConfig { family, p: None, tol: 1e-11, max_iter: 100_000, oracle: OracleMode::Auto, dump_density: false },
                (None, None) => return Err(Error::ConfigInvalid { field: "family".into(), message: "give --family, --base-res or --core-word".into() }),
            };
            m.p = p.or(m.p);
            set(&mut m.tol, tol);
            set(&mut m.max_iter, max_iter);
            set(&mut m.oracle, oracle);
            m.dump_density |= dump_density;
            c.modulus = Some(m);
        }
        Verb::Intersect { depth, fibers } => {
            c.depth = depth.or(c.depth);
            c.samples = fibers.or(c.samples);
        }
        Verb::Dichotomy { common, kmax } => {
            apply_common(&mut c, common);
            c.depth = kmax.or(c.depth);
        }
        Verb::PointSingularity { common, trees, ambient_pitch } => {
            apply_common(&mut c, common);
            c.depth = trees.or(c.depth);
            set(&mut c.ambient_pitch, ambient_pitch);
        }
        Verb::PaperMap => unreachable!("paper-map has no config"),
    }
    c.validate()?;
    Ok(c)
}

fn main_inner(cli: Cli) -> Result<()> {
    let Some(kind) = cli.verb.kind() else {
        let doc = paper_map_report();
        if let Some(out) = &cli.out {
            std::fs::create_dir_all(out)?;
            std::fs::write(out.join("paper_map.md"), &doc)?;
        }
        print!("{doc}");
        return Ok(());
    };
    let cfg = configure(cli, kind)?;
    let r = run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&r.summary)?);
    eprintln!("wrote {} files to {}", r.files.len() + 1, r.out.display());
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
