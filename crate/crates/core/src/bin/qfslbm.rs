use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qfslbm::benchmarks::{convergence_order, setup_case, Case};
use qfslbm::circuits::{
    collision_diagonal, dump_circuit, CircuitVariant, LksInputs, QLbmCircuitPlan,
};
use qfslbm::io::{execute, format_shape, parse_stencil, read_config, RunSummary};
use qfslbm::kernels::{gradient_scalar, gradient_vector};
use qfslbm::lattice::{LatticeModel, ModelKind};
use qfslbm::solver::{default_u_ref, derive_params, LengthConvention, Method, RunConfig, RunStatus};

#[derive(Parser)]
#[command(
    name = "qfslbm",
    version,
    about = "Hybrid quantum-classical fractional-step lattice Boltzmann solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a flat key = value configuration file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the file's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in benchmark case.
    Bench {
        case: Case,
        #[command(flatten)]
        opts: BenchOpts,
    },
    /// Run one case over several grid sizes and methods, in parallel.
    Sweep {
        case: Case,
        /// Comma-separated grid sizes.
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        ns: Vec<usize>,
        /// Comma-separated methods.
        #[arg(long, value_delimiter = ',', default_value = "cfs")]
        methods: Vec<Method>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        opts: BenchOpts,
    },
    /// Print the gate listing of one predictor circuit built from a case's initial state.
    DumpCircuit {
        case: Case,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::FsFlow)]
        variant: VariantArg,
        /// Append the moment-summation stage.
        #[arg(long)]
        summation: bool,
        #[arg(long, default_value_t = 10.0)]
        re: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct BenchOpts {
    #[arg(long, default_value = "cfs")]
    method: Method,
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long)]
    re: Option<f64>,
    #[arg(long)]
    ra: Option<f64>,
    #[arg(long)]
    pr: Option<f64>,
    #[arg(long)]
    g_beta: Option<f64>,
    /// Taylor-Green amplitude or lid speed.
    #[arg(long)]
    u0: Option<f64>,
    /// cd, ss or auto.
    #[arg(long, default_value = "auto")]
    stencil: String,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    t_star: Option<f64>,
    /// Characteristic length of walled cases: n-1 or n.
    #[arg(long)]
    length: Option<LengthConvention>,
    #[arg(long)]
    log_every: Option<usize>,
    #[arg(long)]
    snapshot_every: Option<usize>,
    #[arg(long)]
    vtk: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum VariantArg {
    FsFlow,
    FsThermal,
    LksFlow,
    LksThermal,
    MomentumX,
    MomentumY,
    MomentumZ,
}

impl BenchOpts {
    fn config(&self, case: Case, method: Method, n: usize) -> anyhow::Result<RunConfig> {
        let mut c = RunConfig::new(case, method, n);
        if let Some(re) = self.re {
            c.re = Some(re);
        }
        if let Some(ra) = self.ra {
            c.ra = Some(ra);
        }
        if let Some(v) = self.pr {
            c.pr = v;
        }
        if let Some(v) = self.g_beta {
            c.g_beta = v;
        }
        if let Some(v) = self.u0 {
            c.u_ref = v;
        }
        c.stencil = parse_stencil(&self.stencil)?;
        c.epsilon = self.eps;
        if let Some(v) = self.max_steps {
            c.max_steps = v;
        }
        if let Some(v) = self.t_star {
            c.t_star = v;
        }
        if let Some(v) = self.length {
            c.length = v;
        }
        if let Some(v) = self.log_every {
            c.log_every = v;
        }
        if let Some(v) = self.snapshot_every {
            c.snapshot_every = v;
        }
        c.vtk = self.vtk;
        c.out_dir = self.out.clone();
        c.validate()?;
        Ok(c)
    }
}

fn report(s: &RunSummary) {
    println!(
        "{} {} {}: {} after {} steps (nu = {:.6e}, kappa = {:.6e}, stencil {:?})",
        s.case,
        s.method,
        format_shape(&s.shape),
        s.status.name(),
        s.steps,
        s.nu,
        s.kappa,
        s.stencil
    );
    if let Some(r) = s.final_residual {
        println!("  final residual {r:.3e}");
    }
    if let Some(reason) = &s.reason {
        println!("  {reason}");
    }
    for (k, v) in &s.metrics {
        println!("  {k} = {v:.6}");
    }
}

fn sweep(
    case: Case,
    ns: &[usize],
    methods: &[Method],
    jobs: usize,
    opts: &BenchOpts,
) -> anyhow::Result<()> {
    let mut configs = Vec::new();
    for &m in methods {
        for &n in ns {
            let mut c = opts.config(case, m, n)?;
            c.out_dir = opts
                .out
                .as_ref()
                .map(|d| d.join(format!("{}_{}_{n}", case, m)));
            configs.push(c);
        }
    }
    let results = std::sync::Mutex::new(Vec::new());
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some(c) = configs.get(i) else { break };
                let r = execute(c).map(|(_, s)| s);
                results.lock().expect("no worker panicked").push((i, r));
            });
        }
    });
    let mut results = results.into_inner().expect("no worker panicked");
    results.sort_by_key(|r| r.0);
    for &m in methods {
        let mut errors = Vec::new();
        for (i, r) in &results {
            if configs[*i].method != m {
                continue;
            }
            let s = r.as_ref().map_err(|e| anyhow::anyhow!("{e}"))?;
            report(s);
            if let Some(&e) = s.metrics.get("l2_error") {
                errors.push((s.shape[0], e));
            }
        }
        if errors.len() >= 2 {
            println!("{m}: convergence order {:.3}", convergence_order(&errors)?);
        }
    }
    Ok(())
}

fn dump(
    case: Case,
    n: usize,
    variant: VariantArg,
    summation: bool,
    re: f64,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let dims = case.dims().context("dump-circuit needs a built-in case")?;
    let shape = vec![n; dims];
    let u_ref = default_u_ref(case);
    let setup = setup_case(case, &shape, u_ref)?;
    let model = LatticeModel::new(ModelKind::for_dims(dims).context("2D or 3D")?);
    let v = match variant {
        VariantArg::FsFlow => CircuitVariant::FsFlow,
        VariantArg::FsThermal => CircuitVariant::FsThermal,
        VariantArg::LksFlow => CircuitVariant::LksFlow,
        VariantArg::LksThermal => CircuitVariant::LksThermal,
        VariantArg::MomentumX => CircuitVariant::Momentum {
            axis: 0,
            lks: false,
        },
        VariantArg::MomentumY => CircuitVariant::Momentum {
            axis: 1,
            lks: false,
        },
        VariantArg::MomentumZ => CircuitVariant::Momentum {
            axis: 2,
            lks: false,
        },
    };
    if v.is_thermal() && !case.is_thermal() {
        bail!("{case} has no temperature field");
    }
    let state = &setup.initial;
    let plan = QLbmCircuitPlan::new(&model, &setup.grid, v, summation)?;
    let lks = if v.is_lks() {
        let mut config = RunConfig::new(case, Method::ClassicalLks, n);
        if !case.is_thermal() {
            config.re = Some(re);
        }
        let (a, b) = derive_params(&config)?.lks.context("LKS constants")?;
        Some(LksInputs {
            grad_u: gradient_vector(&state.u),
            grad_t: state.temperature.as_ref().map(gradient_scalar),
            a,
            b,
        })
    } else {
        None
    };
    let diag = collision_diagonal(state, &plan, lks.as_ref())?;
    let circuit = plan.build(plan.input_field(state)?.values(), &diag)?;
    let text = format!(
        "# {case} n={n} variant={:?} summation={summation} rescale={:?}\n{}",
        v,
        plan.rescale_constant(),
        dump_circuit(&circuit)
    );
    match out {
        Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result =
        match cli.command {
            Command::Run { config, out } => read_config(&config)
                .map_err(anyhow::Error::from)
                .and_then(|mut c| {
                    if out.is_some() {
                        c.out_dir = out;
                    }
                    let (_, s) = execute(&c)?;
                    report(&s);
                    Ok(s.status)
                }),
            Command::Bench { case, opts } => opts.config(case, opts.method, opts.n).and_then(|c| {
                let (_, s) = execute(&c)?;
                report(&s);
                Ok(s.status)
            }),
            Command::Sweep {
                case,
                ns,
                methods,
                jobs,
                opts,
            } => sweep(case, &ns, &methods, jobs, &opts).map(|_| RunStatus::Completed),
            Command::DumpCircuit {
                case,
                n,
                variant,
                summation,
                re,
                out,
            } => dump(case, n, variant, summation, re, out).map(|_| RunStatus::Completed),
        };
    match result {
        Ok(RunStatus::Diverged) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
