use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spline_colloc::pipeline::{check_mesh, run_solve, run_study, RunConfig, StageError};
use spline_colloc::Error;

#[derive(Parser)]
#[command(name = "spline-colloc", version, about = "Spline collocation solver for elliptic PDEs on triangulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one manufactured problem and report its errors.
    Solve(RunArgs),
    /// Solve on successively refined meshes and fit convergence rates.
    Study {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Validate a mesh and print its quality statistics.
    CheckMesh {
        /// Mesh file, `square:n` or `box:n:xmin:xmax:ymin:ymax`.
        mesh: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Config file, `key = value` lines or JSON. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long = "op")]
    operator: Option<String>,
    #[arg(long = "sol")]
    solution: Option<String>,
    #[arg(long = "D")]
    degree: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long = "Dprime")]
    dprime: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long = "tol")]
    tol_step: Option<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    coefficients: Option<PathBuf>,
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Print the solver iteration table.
    #[arg(long)]
    verbose: bool,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut pairs = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        put("mesh", self.mesh.clone());
        put("operator", self.operator.clone());
        put("solution", self.solution.clone());
        put("D", self.degree.map(|v| v.to_string()));
        put("r", self.r.map(|v| v.to_string()));
        put("Dprime", self.dprime.map(|v| v.to_string()));
        put("alpha", self.alpha.map(|v| format!("{v:e}")));
        put("beta", self.beta.map(|v| format!("{v:e}")));
        put("gamma", self.gamma.map(|v| format!("{v:e}")));
        put("eps", self.eps.map(|v| format!("{v:e}")));
        put("max_iter", self.max_iter.map(|v| v.to_string()));
        put("tol_step", self.tol_step.map(|v| format!("{v:e}")));
        put("grid_n", self.grid_n.map(|v| v.to_string()));
        put("csv", path(&self.csv));
        put("json", path(&self.json));
        put("coefficients", path(&self.coefficients));
        put("export", path(&self.export));
        put("seed", self.seed.map(|v| v.to_string()));
        put("threads", self.threads.map(|v| v.to_string()));
        cfg.apply(&pairs)?;
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 4,
        Error::NonFinite { .. }
        | Error::ConsistencyViolated { .. }
        | Error::SingularSaddle { .. }
        | Error::Diverged(_)
        | Error::ZeroTrace(_)
        | Error::ZeroCoefficients(_) => 3,
        _ => 2,
    }
}

fn fail(e: StageError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e.error))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, levels) = match cli.command {
        Command::CheckMesh { mesh } => {
            return match check_mesh(&mesh) {
                Ok(r) => {
                    println!("{r}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: mesh check failed: {e}");
                    ExitCode::from(exit_code(&e))
                }
            };
        }
        Command::Solve(args) => (args, None),
        Command::Study { run, levels } => (run, Some(levels)),
    };
    let cfg = match args.config() {
        Ok(c) => c,
        Err(e) => return fail(StageError { stage: "config", error: e }),
    };

    match levels {
        None => match with_threads(cfg.threads, || run_solve(&cfg)) {
            Ok(out) => {
                for w in &out.warnings {
                    eprintln!("warning: {w}");
                }
                if let Some(line) = out.cordes_line() {
                    println!("{line}");
                }
                if args.verbose {
                    print!("{}", out.solver.table());
                }
                println!("{}", spline_colloc::evaluation::CSV_HEADER);
                println!("{}", out.row.to_csv());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Some(levels) => match with_threads(cfg.threads, || run_study(&cfg, levels)) {
            Ok(out) => {
                print!("{}", out.rate_table());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
