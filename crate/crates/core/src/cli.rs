//! Command-line front end.
//!
//! Every command validates its inputs, writes its outputs atomically and
//! records a manifest next to them from which `replay` regenerates the same
//! bytes. Exit status is 2 for invalid arguments or configuration and 1 for
//! failures while running.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{compute, HydroCoefficients};
use crate::equilibria::{EquilibriumDist, NoiseRatio};
use crate::error::Error;
use crate::gci::{solve_h, GciTable, TABLE_VERSION};
use crate::ibm::equivalence::{equivalence_in_law, EquivalenceConfig};
use crate::ibm::{run, Attitudes, Representation, SimConfig};
use crate::quat::{Quat, UnitQuat};
use crate::sohq_pde::{step as pde_step, HydroField, PdeConfig};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::NonUnit { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Parser, Debug)]
#[command(name = "sohq", version, about = "Quaternion body-attitude alignment toolkit")]
pub struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hydrodynamic coefficients on a list of noise ratios.
    Coeffs {
        /// Comma-separated noise ratios.
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, default_value = "coeffs.csv")]
        output: PathBuf,
    },
    /// Profile of the collision invariant as CSV, with a residual summary.
    Gci {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, default_value = "gci.csv")]
        output: PathBuf,
    },
    /// Exact samples from the equilibrium distribution.
    Sample {
        #[arg(long)]
        d: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mean as `w,x,y,z`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        qbar: Option<Vec<f64>>,
        #[arg(long, default_value = "sample.csv")]
        output: PathBuf,
    },
    /// Particle simulation; observables as NDJSON.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Steps between observable records.
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Optional per-particle snapshot CSV.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        snapshot_stride: u64,
        #[arg(long, default_value = "observables.ndjson")]
        output: PathBuf,
    },
    /// Matched quaternion and matrix runs, compared in law.
    Equivalence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "equivalence.json")]
        output: PathBuf,
    },
    /// One-dimensional macroscopic solver; one CSV per frame.
    Pde {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "pde_out")]
        output_dir: PathBuf,
    },
    /// Re-runs the job recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Primary output location; defaults to the recorded one.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// A fully resolved unit of work, as recorded in manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Job {
    Coeffs { d: Vec<f64>, nodes: usize, cache_dir: Option<PathBuf> },
    Gci { d: f64, nodes: usize, cache_dir: Option<PathBuf> },
    Sample { d: f64, n: usize, seed: u64, qbar: [f64; 4] },
    Simulate { config: SimConfig, stride: u64, snapshot_stride: Option<u64> },
    Equivalence { config: EquivalenceConfig },
    Pde { config: PdeConfig },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub job: Job,
    pub threads: usize,
    /// Primary output (a file, or a directory for `pde`).
    pub output: PathBuf,
    pub extra_outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
}

/// Writes through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn noise_ratio(d: f64) -> CliResult<NoiseRatio> {
    Ok(NoiseRatio::new(d)?)
}

/// Loads a cached table when present and valid, otherwise solves and
/// stores it.
pub fn cached_table(d: NoiseRatio, nodes: usize, cache_dir: Option<&Path>) -> CliResult<GciTable> {
    let Some(dir) = cache_dir else {
        return Ok(solve_h(d, nodes)?);
    };
    let path = dir.join(format!("gci_{:016x}_{nodes}_v{TABLE_VERSION}.json", d.get().to_bits()));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(t) = serde_json::from_str::<GciTable>(&text) {
            let ok = t.d == d && t.version == TABLE_VERSION && t.n_nodes() == nodes;
            let residual = t.fd_residuals().iter().map(|r| r.1.abs()).fold(0.0, f64::max);
            if ok && residual < 1e-6 {
                return Ok(t);
            }
        }
    }
    let t = solve_h(d, nodes)?;
    let text = serde_json::to_string(&t).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&path, text.as_bytes())?;
    Ok(t)
}

fn coeffs_csv(rows: &[HydroCoefficients]) -> String {
    let mut s = String::from("d,c1,c2,c3,c4,ct2,ct3,ct4,quad_err\n");
    for c in rows {
        let _ = writeln!(s, "{},{},{},{},{},{},{},{},{}", c.d.get(), c.c1, c.c2, c.c3, c.c4, c.ct2, c.ct3, c.ct4, c.quad_err);
    }
    s
}

#[derive(Serialize)]
struct GciSummary {
    d: f64,
    nodes: usize,
    residual_max: f64,
    h_at_one: f64,
    hprime_at_zero: f64,
    max_h_positive_r: f64,
}

/// Executes a job, writing the primary output at `output`. Returns the extra
/// files written.
pub fn execute(job: &Job, output: &Path) -> CliResult<Vec<PathBuf>> {
    match job {
        Job::Coeffs { d, nodes, cache_dir } => {
            if d.is_empty() {
                return Err(CliError::Config("d: at least one noise ratio is required".into()));
            }
            let mut rows = Vec::new();
            for &dv in d {
                let dn = noise_ratio(dv)?;
                let table = cached_table(dn, *nodes, cache_dir.as_deref())?;
                rows.push(compute(dn, &table)?);
            }
            write_atomic(output, coeffs_csv(&rows).as_bytes())?;
            Ok(vec![])
        }
        Job::Gci { d, nodes, cache_dir } => {
            let dn = noise_ratio(*d)?;
            let t = cached_table(dn, *nodes, cache_dir.as_deref())?;
            let mut s = String::from("r,h,hprime\n");
            for i in 0..t.grid.len() {
                let _ = writeln!(s, "{},{},{}", t.grid[i], t.h[i], t.hprime[i]);
            }
            write_atomic(output, s.as_bytes())?;
            let mid = t.n_nodes();
            let summary = GciSummary {
                d: *d,
                nodes: *nodes,
                residual_max: t.residual_max,
                h_at_one: *t.h.last().expect("non-empty table"),
                hprime_at_zero: t.hprime[mid],
                max_h_positive_r: t.h[mid..].iter().copied().fold(f64::NEG_INFINITY, f64::max),
            };
            let json = serde_json::to_string(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("{json}");
            let path = with_suffix(output, ".summary.json");
            write_atomic(&path, json.as_bytes())?;
            Ok(vec![path])
        }
        Job::Sample { d, n, seed, qbar } => {
            let dn = noise_ratio(*d)?;
            let qb = UnitQuat::try_new(Quat::from_array(*qbar))?;
            let dist = EquilibriumDist::new(dn, qb);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut s = String::from("w,x,y,z\n");
            for q in dist.sample(*n, &mut rng) {
                let q = q.quat();
                let _ = writeln!(s, "{},{},{},{}", q.w, q.x, q.y, q.z);
            }
            write_atomic(output, s.as_bytes())?;
            Ok(vec![])
        }
        Job::Simulate { config, stride, snapshot_stride } => {
            let mut obs = String::new();
            let mut snaps = match config.representation {
                Representation::Quaternion => String::from("step,particle,x1,x2,x3,w,qx,qy,qz\n"),
                Representation::Matrix => String::from("step,particle,x1,x2,x3,a11,a12,a13,a21,a22,a23,a31,a32,a33\n"),
            };
            let sstride = snapshot_stride.map(|s| s.max(1));
            let obs_stride = (*stride).max(1);
            run(config.clone(), 1, |sim| {
                if sim.step_index % obs_stride == 0 {
                    let line = serde_json::to_string(&sim.observables()).expect("observables serialize");
                    obs.push_str(&line);
                    obs.push('\n');
                }
                if sstride.is_some_and(|ss| sim.step_index % ss == 0) {
                    for (k, x) in sim.positions.iter().enumerate() {
                        let _ = write!(snaps, "{},{},{},{},{}", sim.step_index, k, x[0], x[1], x[2]);
                        match &sim.attitudes {
                            Attitudes::Quaternion(qs) => {
                                let q = qs[k].quat();
                                let _ = write!(snaps, ",{},{},{},{}", q.w, q.x, q.y, q.z);
                            }
                            Attitudes::Matrix(ms) => {
                                for row in ms[k].0 {
                                    for a in row {
                                        let _ = write!(snaps, ",{a}");
                                    }
                                }
                            }
                        }
                        snaps.push('\n');
                    }
                }
                Ok(())
            })?;
            write_atomic(output, obs.as_bytes())?;
            if sstride.is_some() {
                let path = with_suffix(output, ".snapshots.csv");
                write_atomic(&path, snaps.as_bytes())?;
                return Ok(vec![path]);
            }
            Ok(vec![])
        }
        Job::Equivalence { config } => {
            config.sim.validate()?;
            let report = equivalence_in_law(config)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
            write_atomic(output, json.as_bytes())?;
            Ok(vec![])
        }
        Job::Pde { config } => {
            let mut field = config.initial_field()?;
            let table = solve_h(config.d, config.gci_nodes)?;
            let c = compute(config.d, &table)?;
            crate::sohq_pde::check_cfl(config.dt, config.dx, &c)?;
            fs::create_dir_all(output).map_err(|e| io_err(output, e))?;
            let steps = config.n_steps();
            let every = config.output_every.unwrap_or(steps.max(1)).max(1);
            let mut frame = 0usize;
            let mut files = Vec::new();
            let mut emit = |field: &HydroField, files: &mut Vec<PathBuf>| -> CliResult<()> {
                let mut s = String::from("cell,rho,w,qx,qy,qz\n");
                for (i, (r, q)) in field.rho.iter().zip(&field.qbar).enumerate() {
                    let q = q.quat();
                    let _ = writeln!(s, "{i},{r},{},{},{},{}", q.w, q.x, q.y, q.z);
                }
                let path = output.join(format!("frame_{frame:06}.csv"));
                write_atomic(&path, s.as_bytes())?;
                files.push(path);
                frame += 1;
                Ok(())
            };
            emit(&field, &mut files)?;
            for k in 1..=steps {
                pde_step(&mut field, &c, config.dt)?;
                if k % every == 0 || k == steps {
                    emit(&field, &mut files)?;
                }
            }
            Ok(files)
        }
    }
}

fn manifest_path(job: &Job, output: &Path) -> PathBuf {
    match job {
        Job::Pde { .. } => output.join("manifest.json"),
        _ => with_suffix(output, ".manifest.json"),
    }
}

fn run_job(job: Job, output: PathBuf, threads: usize) -> CliResult<()> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let extra = pool.install(|| execute(&job, &output))?;
    let manifest = Manifest {
        tool: "sohq".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        job: job.clone(),
        threads,
        output: output.clone(),
        extra_outputs: extra,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&manifest_path(&job, &output), text.as_bytes())
}

/// Resolves the parsed command line into a job and runs it.
pub fn dispatch(cli: Cli) -> CliResult<()> {
    if cli.threads == 0 {
        return Err(CliError::Config("threads: must be at least 1".into()));
    }
    let (job, output) = match cli.command {
        Command::Coeffs { d, nodes, cache_dir, output } => (Job::Coeffs { d, nodes, cache_dir }, output),
        Command::Gci { d, nodes, cache_dir, output } => (Job::Gci { d, nodes, cache_dir }, output),
        Command::Sample { d, n, seed, qbar, output } => {
            let q = match qbar {
                Some(v) if v.len() == 4 => [v[0], v[1], v[2], v[3]],
                Some(_) => return Err(CliError::Config("qbar: expected four components".into())),
                None => [1.0, 0.0, 0.0, 0.0],
            };
            (Job::Sample { d, n, seed, qbar: q }, output)
        }
        Command::Simulate { config, seed, stride, snapshots, snapshot_stride, output } => {
            let mut cfg: SimConfig = read_json(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            if snapshots.is_some() {
                let job = Job::Simulate { config: cfg, stride, snapshot_stride: Some(snapshot_stride) };
                let start = Instant::now();
                run_job(job.clone(), output.clone(), cli.threads)?;
                let produced = with_suffix(&output, ".snapshots.csv");
                if let Some(target) = snapshots {
                    if target != produced {
                        fs::rename(&produced, &target).map_err(|e| io_err(&target, e))?;
                        let mpath = manifest_path(&job, &output);
                        let mut m: Manifest = read_json(&mpath)?;
                        m.extra_outputs = vec![target];
                        m.wall_clock_seconds = start.elapsed().as_secs_f64();
                        let text = serde_json::to_string_pretty(&m).map_err(|e| CliError::Runtime(e.to_string()))?;
                        write_atomic(&mpath, text.as_bytes())?;
                    }
                }
                return Ok(());
            }
            (Job::Simulate { config: cfg, stride, snapshot_stride: None }, output)
        }
        Command::Equivalence { config, output } => {
            let cfg: EquivalenceConfig = read_json(&config)?;
            cfg.sim.validate()?;
            (Job::Equivalence { config: cfg }, output)
        }
        Command::Pde { config, output_dir } => {
            let cfg: PdeConfig = read_json(&config)?;
            cfg.validate()?;
            (Job::Pde { config: cfg }, output_dir)
        }
        Command::Replay { manifest, output } => {
            let m: Manifest = read_json(&manifest)?;
            let out = output.unwrap_or(m.output.clone());
            (m.job, out)
        }
    };
    run_job(job, output, cli.threads)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
