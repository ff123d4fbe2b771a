//! Command-line frontend: degeneracy index, degenerate-parameter scans,
//! psi reconstruction, box and entropy dimension estimation, and the
//! consolidated report.
//!
//! Exit codes: 0 ok, 2 config error, 3 invalid kernel, 4 resource guard.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boxdim::{full_report, BoxdimError, EntropyOptions, ReportOptions};
use entropy_measures::{random_stream, sample_flow_projection, LevelEntropy, MeasureError};
use hstar_criterion::{
    compute_q, predicted_dimension, reconstruct_psi, scan_degenerate_range, CriterionError,
    ReconstructOutcome,
};
use weier_core::{parse_config, CoreError, KernelFunction, Params, TruncationBudget};

#[derive(Parser)]
#[command(
    name = "weierdim",
    about = "Degeneracy analysis and graph-dimension estimation for Weierstrass-type functions",
    version
)]
struct Cli {
    /// Cap the rayon worker count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the degeneracy index q at one lambda.
    Q(QArgs),
    /// Scan a lambda range for degenerate parameters.
    Scan(ScanArgs),
    /// Evaluate the closed-form dimension prediction.
    Predict(PredictArgs),
    /// Box-count the graph over a range of levels.
    Boxdim(BoxdimArgs),
    /// Estimate the entropy dimension of a flow projection.
    EntropyDim(EntropyDimArgs),
    /// Reconstruct the conjugating function psi, if one exists.
    Psi(PsiArgs),
    /// Full report: q, prediction, box counts, optional entropy section.
    Report(ReportArgs),
    /// Validate a kernel config and echo its normalized form.
    KernelCheck(KernelCheckArgs),
}

#[derive(Args)]
struct KernelArg {
    /// Kernel config file (defines d, b and the Fourier coefficients).
    #[arg(long)]
    kernel: PathBuf,
}

#[derive(Args)]
struct QArgs {
    #[command(flatten)]
    kernel: KernelArg,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-8)]
    rank_tol: f64,
    #[arg(long, default_value_t = 3)]
    m_stable: usize,
    /// Write the machine-readable report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the machine-readable form to stdout instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    kernel: KernelArg,
    /// Lower end of the lambda range (default 1/b).
    #[arg(long)]
    lambda_min: Option<f64>,
    /// Upper end of the lambda range (default 1).
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    grid_n: usize,
    #[arg(long, default_value_t = 1e-6)]
    refine_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    rank_tol: f64,
    /// Write the grid CSV (lambda,q,sigma_min plus a summary block) here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PredictArgs {
    /// Kernel config; omit when --b, --d and --q are all given.
    #[arg(long)]
    kernel: Option<PathBuf>,
    #[arg(long)]
    lambda: f64,
    /// Override the degeneracy index instead of computing it.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    b: Option<u32>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    rank_tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoxdimArgs {
    #[command(flatten)]
    kernel: KernelArg,
    #[arg(long)]
    lambda: f64,
    /// Levels as an inclusive range `A..B` or a comma list.
    #[arg(long, default_value = "1..7")]
    levels: String,
    #[arg(long, default_value_t = 4)]
    oversample: u32,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Fit range lower level (default: levels minus the two coarsest).
    #[arg(long)]
    fit_lo: Option<u32>,
    #[arg(long)]
    fit_hi: Option<u32>,
    /// Skip the doubled-oversample stability screen.
    #[arg(long)]
    no_stability: bool,
    /// Write the (n, count) CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EntropyDimArgs {
    #[command(flatten)]
    kernel: KernelArg,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    level_min: Option<u32>,
    #[arg(long)]
    level_max: Option<u32>,
    /// Length of the pseudo-random digit cycle of the stream.
    #[arg(long, default_value_t = 64)]
    cycle_len: usize,
    /// Dump the sampled measure as CSV.
    #[arg(long)]
    dump_measure: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PsiArgs {
    #[command(flatten)]
    kernel: KernelArg,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-9)]
    residual_tol: f64,
    /// Write the reconstructed psi as a kernel config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    kernel: KernelArg,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value = "1..7")]
    levels: String,
    #[arg(long, default_value_t = 4)]
    oversample: u32,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    rank_tol: f64,
    #[arg(long, default_value_t = 3)]
    m_stable: usize,
    #[arg(long)]
    fit_lo: Option<u32>,
    #[arg(long)]
    fit_hi: Option<u32>,
    #[arg(long)]
    no_stability: bool,
    /// Enable the entropy section with this many samples.
    #[arg(long)]
    entropy_samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the (n, count) CSV here.
    #[arg(long)]
    counts_out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct KernelCheckArgs {
    #[command(flatten)]
    kernel: KernelArg,
}

/// Error with a process exit code.
enum CliError {
    Config(String),
    Kernel(String),
    Resource(String),
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Kernel(_) => 3,
            CliError::Resource(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Kernel(m) | CliError::Resource(m)
            | CliError::Other(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidKernel(_) => CliError::Kernel(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<CriterionError> for CliError {
    fn from(e: CriterionError) -> Self {
        match e {
            CriterionError::ConstantKernel => CliError::Kernel(e.to_string()),
            CriterionError::Core(c) => c.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<BoxdimError> for CliError {
    fn from(e: BoxdimError) -> Self {
        match e {
            BoxdimError::ResourceGuard(_) => CliError::Resource(e.to_string()),
            BoxdimError::Core(c) => c.into(),
            BoxdimError::Criterion(c) => c.into(),
            BoxdimError::Measure(m) => m.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Q(args) => cmd_q(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Boxdim(args) => cmd_boxdim(args),
        Command::EntropyDim(args) => cmd_entropy_dim(args),
        Command::Psi(args) => cmd_psi(args),
        Command::Report(args) => cmd_report(args),
        Command::KernelCheck(args) => cmd_kernel_check(args),
    }
}

fn load_kernel(path: &PathBuf) -> Result<(KernelFunction, u32), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}

fn parse_levels(spec: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Config(format!("bad level spec '{spec}' (use A..B or a comma list)"));
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u32 = a.trim().parse().map_err(|_| bad())?;
        let hi: u32 = b.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        Ok((lo..=hi).collect())
    } else {
        spec.split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
            .collect()
    }
}

fn write_out(path: &PathBuf, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

fn gap_json(gap: f64) -> serde_json::Value {
    if gap.is_finite() {
        serde_json::json!(gap)
    } else {
        serde_json::json!("inf")
    }
}

fn cmd_q(args: QArgs) -> Result<(), CliError> {
    let (kernel, b) = load_kernel(&args.kernel.kernel)?;
    let p = Params::new(b, args.lambda)?;
    let rep = compute_q(&p, &kernel, args.rank_tol, args.m_stable)?;
    let json = serde_json::json!({
        "lambda": p.lambda(),
        "b": b,
        "d": kernel.d(),
        "q": rep.q_prime,
        "sigma_gap": gap_json(rep.sigma_gap),
        "m": rep.m_used,
        "m_capped": rep.m_capped,
        "singular_values": rep.singular_values,
        "kernel_basis": rep.kernel_basis,
    });
    let pretty = serde_json::to_string_pretty(&json).expect("report serializes");
    if args.json {
        println!("{pretty}");
    } else {
        println!(
            "q={} sigma_gap={:.6e} m={}",
            rep.q_prime, rep.sigma_gap, rep.m_used
        );
    }
    if let Some(out) = &args.out {
        write_out(out, &(pretty + "\n"))?;
    }
    Ok(())
}

fn cmd_scan(args: ScanArgs) -> Result<(), CliError> {
    let (kernel, b) = load_kernel(&args.kernel.kernel)?;
    let lo = args.lambda_min.unwrap_or(1.0 / b as f64);
    let hi = args.lambda_max.unwrap_or(1.0);
    let res =
        scan_degenerate_range(b, &kernel, (lo, hi), args.grid_n, args.refine_tol, args.rank_tol)?;

    let mut csv = String::from("lambda,q,sigma_min\n");
    for g in &res.grid {
        csv.push_str(&format!("{:.17e},{},{:.17e}\n", g.lambda, g.q, g.sigma_min));
    }
    csv.push_str(&format!("# p_prime={}\n", res.p_prime));
    for d in &res.degenerate {
        csv.push_str(&format!(
            "# degenerate lambda={:.17e} q={} width={:.3e}\n",
            d.lambda, d.q, d.width
        ));
    }

    if args.json {
        let json = serde_json::json!({
            "p_prime": res.p_prime,
            "grid_n": res.grid_n,
            "degenerate": res.degenerate.iter().map(|d| serde_json::json!({
                "lambda": d.lambda, "q": d.q, "width": d.width,
            })).collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&json).expect("serializes"));
    } else {
        println!(
            "p'={} over {} grid points in [{lo}, {hi}]",
            res.p_prime, res.grid_n
        );
        if res.degenerate.is_empty() {
            println!("no degenerate lambda found");
        }
        for d in &res.degenerate {
            println!(
                "degenerate lambda={:.9} q={} (width {:.3e})",
                d.lambda, d.q, d.width
            );
        }
    }
    if let Some(out) = &args.out {
        write_out(out, &csv)?;
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let (b, d, q) = match (&args.kernel, args.q) {
        (Some(path), q_override) => {
            let (kernel, b) = load_kernel(path)?;
            let q = match q_override {
                Some(q) => q,
                None => {
                    let p = Params::new(b, args.lambda)?;
                    compute_q(&p, &kernel, args.rank_tol, 3)?.q_prime
                }
            };
            (b, kernel.d(), q)
        }
        (None, Some(q)) => {
            let b = args
                .b
                .ok_or(CliError::Config("--b required without --kernel".into()))?;
            let d = args
                .d
                .ok_or(CliError::Config("--d required without --kernel".into()))?;
            (b, d, q)
        }
        (None, None) => {
            return Err(CliError::Config(
                "give --kernel, or --b/--d/--q for a standalone prediction".into(),
            ))
        }
    };
    if q > d {
        return Err(CliError::Config(format!("q = {q} exceeds d = {d}")));
    }
    let p = Params::new(b, args.lambda)?;
    let (value, branch) = predicted_dimension(&p, d, q);
    if args.json {
        let json = serde_json::json!({
            "predicted": value, "branch": branch.to_string(), "q": q, "d": d,
            "b": b, "lambda": p.lambda(),
        });
        println!("{}", serde_json::to_string_pretty(&json).expect("serializes"));
    } else {
        println!("predicted={value:.12} branch={branch} q={q}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn report_options(
    levels: &str,
    fit_lo: Option<u32>,
    fit_hi: Option<u32>,
    oversample: u32,
    tol: f64,
    rank_tol: f64,
    m_stable: usize,
    no_stability: bool,
    entropy_samples: Option<usize>,
    seed: u64,
) -> Result<ReportOptions, CliError> {
    let levels = parse_levels(levels)?;
    let fit_levels = match (fit_lo, fit_hi) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => {
            return Err(CliError::Config(
                "--fit-lo and --fit-hi must be given together".into(),
            ))
        }
    };
    Ok(ReportOptions {
        levels,
        fit_levels,
        oversample,
        tol,
        rank_tol,
        m_stable,
        stability_check: !no_stability,
        entropy: entropy_samples.map(|samples| EntropyOptions {
            samples,
            ..Default::default()
        }),
        seed,
    })
}

fn cmd_boxdim(args: BoxdimArgs) -> Result<(), CliError> {
    let (kernel, b) = load_kernel(&args.kernel.kernel)?;
    let p = Params::new(b, args.lambda)?;
    let opts = report_options(
        &args.levels,
        args.fit_lo,
        args.fit_hi,
        args.oversample,
        args.tol,
        1e-8,
        3,
        args.no_stability,
        None,
        1,
    )?;
    let rep = full_report(&p, &kernel, &opts)?;
    if args.json {
        println!("{}", rep.to_json());
    } else {
        print!("{}", rep.human_text());
    }
    if let Some(out) = &args.out {
        write_out(out, &rep.counts_csv())?;
    }
    Ok(())
}

fn cmd_entropy_dim(args: EntropyDimArgs) -> Result<(), CliError> {
    let (kernel, b) = load_kernel(&args.kernel.kernel)?;
    let p = Params::new(b, args.lambda)?;
    let tb = TruncationBudget::for_kernel(&p, &kernel, args.tol)?;
    let stream = random_stream(&p, args.seed, args.cycle_len);
    let measure = sample_flow_projection(&p, &kernel, &stream, args.samples, &tb, args.seed)?;
    let n0 = args.level_min.unwrap_or(2);
    let n1 = match args.level_max {
        Some(n) => n,
        None => {
            let mut n1 = n0 + 2;
            while n1 < 24 && measure.occupied_cells(n1 + 1) < (args.samples as u64 / 50).max(2) {
                n1 += 1;
            }
            n1
        }
    };
    if n1 <= n0 {
        return Err(CliError::Config(format!(
            "level range [{n0}, {n1}] needs at least two levels"
        )));
    }
    let fit = measure.entropy_dimension(n0, n1);
    if args.json {
        let json = serde_json::json!({
            "alpha": fit.slope,
            "stderr": fit.stderr,
            "levels": [n0, n1],
            "undersampled": fit.undersampled,
            "samples": args.samples,
            "seed": args.seed,
        });
        println!("{}", serde_json::to_string_pretty(&json).expect("serializes"));
    } else {
        println!(
            "alpha={:.6} stderr={:.6} levels={n0}..{n1}",
            fit.slope, fit.stderr
        );
        if !fit.undersampled.is_empty() {
            println!("warning: undersampled levels {:?}", fit.undersampled);
        }
    }
    if let Some(path) = &args.dump_measure {
        write_out(path, &measure.dump_csv())?;
    }
    Ok(())
}

fn cmd_psi(args: PsiArgs) -> Result<(), CliError> {
    let (kernel, b) = load_kernel(&args.kernel.kernel)?;
    let p = Params::new(b, args.lambda)?;
    match reconstruct_psi(&p, &kernel, args.residual_tol) {
        ReconstructOutcome::Success { psi, residual } => {
            let config = psi.to_config(b);
            if args.json {
                let json = serde_json::json!({
                    "status": "success", "residual": residual, "psi": config,
                });
                println!("{}", serde_json::to_string_pretty(&json).expect("serializes"));
            } else {
                println!("psi reconstructed, residual={residual:.3e}");
                print!("{config}");
            }
            if let Some(out) = &args.out {
                write_out(out, &config)?;
            }
        }
        ReconstructOutcome::Failure { residual } => {
            if args.json {
                let json = serde_json::json!({ "status": "failure", "residual": residual });
                println!("{}", serde_json::to_string_pretty(&json).expect("serializes"));
            } else {
                println!("psi reconstruction failed, residual={residual:.3e}");
            }
        }
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let (kernel, b) = load_kernel(&args.kernel.kernel)?;
    let p = Params::new(b, args.lambda)?;
    let opts = report_options(
        &args.levels,
        args.fit_lo,
        args.fit_hi,
        args.oversample,
        args.tol,
        args.rank_tol,
        args.m_stable,
        args.no_stability,
        args.entropy_samples,
        args.seed,
    )?;
    let rep = full_report(&p, &kernel, &opts)?;
    if args.json {
        println!("{}", rep.to_json());
    } else {
        print!("{}", rep.human_text());
    }
    if let Some(out) = &args.out {
        write_out(out, &(rep.to_json() + "\n"))?;
    }
    if let Some(out) = &args.counts_out {
        write_out(out, &rep.counts_csv())?;
    }
    Ok(())
}

fn cmd_kernel_check(args: KernelCheckArgs) -> Result<(), CliError> {
    let (kernel, b) = load_kernel(&args.kernel.kernel)?;
    println!(
        "ok: d={} b={} max_freq={} |phi|_l1={:.6} |phi'|_l1={:.6}{}",
        kernel.d(),
        b,
        kernel.max_freq(),
        kernel.l1_bound(),
        kernel.deriv_l1_bound(1),
        if kernel.is_constant() { " (constant)" } else { "" },
    );
    print!("{}", kernel.to_config(b));
    Ok(())
}
