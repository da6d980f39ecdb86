//! Command-line front end: solve, certify, stability, ml-eval, op-apply.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 no convergence,
//! 3 degenerate problem. Diagnostics go to stderr, data to stdout or
//! `--out`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use psifrac::certify::{
    existence_certificate, kappa0, uh_bound, uhr_bound, uniqueness_certificate,
};
use psifrac::config::{parse_config, RunConfig};
use psifrac::csvio;
use psifrac::error::LangevinError;
use psifrac::fracops::{caputo_left, frac_integral_left, frac_integral_right, FracOrder};
use psifrac::langevin::{solve_picard, structural_constants, SolutionBundle};
use psifrac::specfn::{mittag_leffler, MlParams};
use psifrac::{build_mesh, Domain, GridFunction, PsiFunction};

#[derive(Parser)]
#[command(name = "psifrac", version, about = "psi-fractional operators, a Langevin-type solver, and certificate evaluators")]
struct Cli {
    /// Suppress diagnostics on stderr
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the boundary-value problem described by a config file
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Solution CSV destination (stdout when omitted); a convergence
        /// trace lands next to it with suffix .trace.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every certificate constant and print the verdicts
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a stability bound
    Stability {
        #[arg(long)]
        config: PathBuf,
        /// uh | guh | uhr | guhr
        #[arg(long)]
        variant: String,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the Mittag-Leffler function
    MlEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        z: f64,
    },
    /// Apply a fractional operator to a catalog profile and emit t,value
    OpApply {
        /// jleft | jright | caputo
        #[arg(long)]
        op: String,
        #[arg(long)]
        order: f64,
        /// identity | log | power:R
        #[arg(long)]
        psi: String,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        n: usize,
        /// profile id, e.g. one, k, k2, sin-k, pow:1.5
        #[arg(long = "fn")]
        profile: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; usage problems exit 1
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(cap) = psifrac::thread_cap_from_env() {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cap)
            .build_global();
    }
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Solve { config, out } => solve_cmd(&config, out.as_deref(), cli.quiet),
        Command::Certify { config, out } => certify_cmd(&config, out.as_deref()),
        Command::Stability {
            config,
            variant,
            epsilon,
            out,
        } => stability_cmd(&config, &variant, epsilon, out.as_deref()),
        Command::MlEval { alpha, beta, z } => {
            let params = MlParams::new(alpha).with_beta(beta);
            let v = mittag_leffler(&params, z).map_err(|e| e.to_string())?;
            println!("{v:.14e}");
            Ok(ExitCode::SUCCESS)
        }
        Command::OpApply {
            op,
            order,
            psi,
            a,
            b,
            n,
            profile,
            out,
        } => op_apply_cmd(&op, order, &psi, a, b, n, &profile, out.as_deref()),
    }
}

fn load(config: &std::path::Path) -> Result<RunConfig, String> {
    parse_config(config).map_err(|e| e.to_string())
}

fn open_out(path: Option<&std::path::Path>) -> Result<Box<dyn Write>, String> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn emit_solution(
    bundle: &SolutionBundle,
    out: Option<&std::path::Path>,
    quiet: bool,
) -> Result<(), String> {
    let mut w = open_out(out)?;
    csvio::write_solution_csv(bundle, &mut w).map_err(|e| e.to_string())?;
    w.flush().map_err(|e| e.to_string())?;
    if let Some(p) = out {
        csvio::write_plot_data(bundle, &p.with_extension("")).map_err(|e| e.to_string())?;
    }
    if !quiet {
        eprintln!(
            "iterations: {}, final update norm: {:.3e}, interior residual: {:.3e}, \
             boundary residuals: |u(a)|={:.3e} |u(eta)|={:.3e} nonlocal={:.3e}",
            bundle.iterations,
            bundle.final_update_norm,
            bundle.residual.interior_max,
            bundle.residual.at_a,
            bundle.residual.at_eta,
            bundle.residual.nonlocal,
        );
        if bundle.rhs_went_negative {
            eprintln!("warning: right-hand side went negative during the solve");
        }
        if bundle.relaxation_fallback {
            eprintln!("note: relaxation weight halved after detected divergence");
        }
    }
    Ok(())
}

fn solve_cmd(
    config: &std::path::Path,
    out: Option<&std::path::Path>,
    quiet: bool,
) -> Result<ExitCode, String> {
    let cfg = load(config)?;
    match solve_picard(&cfg.problem, &cfg.solver) {
        Ok(bundle) => {
            emit_solution(&bundle, out, quiet)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(LangevinError::NoConvergence { bundle }) => {
            emit_solution(&bundle, out, quiet)?;
            if !quiet {
                eprintln!("no convergence within the iteration budget");
            }
            Ok(ExitCode::from(2))
        }
        Err(LangevinError::DegenerateProblem { delta_abs, scale }) => {
            eprintln!("degenerate problem: |Delta| = {delta_abs:.3e} (scale {scale:.3e})");
            Ok(ExitCode::from(3))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn certify_cmd(config: &std::path::Path, out: Option<&std::path::Path>) -> Result<ExitCode, String> {
    let cfg = load(config)?;
    let mesh = build_mesh(&cfg.problem.psi, &cfg.problem.domain, cfg.solver.n)
        .map_err(|e| e.to_string())?;
    let sc = match structural_constants(&cfg.problem, &mesh) {
        Ok(sc) => sc,
        Err(LangevinError::DegenerateProblem { delta_abs, scale }) => {
            eprintln!("degenerate problem: |Delta| = {delta_abs:.3e} (scale {scale:.3e})");
            return Ok(ExitCode::from(3));
        }
        Err(e) => return Err(e.to_string()),
    };
    let mut asm = cfg.assumptions.clone();
    if asm.lip1.is_none() || asm.lip2.is_none() {
        return Err("certify needs assumptions.l1 and assumptions.l2 (or a catalog rhs)".into());
    }
    if asm.bound.is_none() {
        asm.bound = Some(1.0);
        eprintln!("note: assumptions.l missing; existence radius computed for L = 1");
    }
    let uniq = uniqueness_certificate(&cfg.problem, &asm, &mesh).map_err(|e| e.to_string())?;
    let exist = existence_certificate(&cfg.problem, &asm, &mesh).map_err(|e| e.to_string())?;
    let k0 = kappa0(&cfg.problem, &mesh).map_err(|e| e.to_string())?;
    let mut w = open_out(out)?;
    csvio::write_certificate_csv(&sc, &uniq, &exist, k0, &mut w).map_err(|e| e.to_string())?;
    w.flush().map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn stability_cmd(
    config: &std::path::Path,
    variant: &str,
    epsilon: Option<f64>,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, String> {
    let cfg = load(config)?;
    let mesh = build_mesh(&cfg.problem.psi, &cfg.problem.domain, cfg.solver.n)
        .map_err(|e| e.to_string())?;
    let mut asm = cfg.assumptions.clone();
    if let Some(e) = epsilon {
        if !(e >= 0.0) {
            return Err("epsilon must be >= 0".into());
        }
        asm.epsilon = e;
    }
    if asm.phi.is_none() {
        asm.phi = psifrac::config::weight_by_id("one");
    }
    let report = match variant {
        "uh" => uh_bound(&cfg.problem, &asm, &mesh, false),
        "guh" => uh_bound(&cfg.problem, &asm, &mesh, true),
        "uhr" => uhr_bound(&cfg.problem, &asm, &mesh, false),
        "guhr" => uhr_bound(&cfg.problem, &asm, &mesh, true),
        other => return Err(format!("unknown variant \"{other}\"; use uh|guh|uhr|guhr")),
    }
    .map_err(|e| e.to_string())?;
    let mut w = open_out(out)?;
    csvio::write_stability_csv(&report, &mut w).map_err(|e| e.to_string())?;
    w.flush().map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn op_apply_cmd(
    op: &str,
    order: f64,
    psi_spec: &str,
    a: f64,
    b: f64,
    n: usize,
    profile_id: &str,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, String> {
    let psi = match psi_spec {
        "identity" => PsiFunction::identity(),
        "log" => PsiFunction::logarithm(),
        other => match other.strip_prefix("power:") {
            Some(r) => {
                let exponent: f64 = r.parse().map_err(|_| format!("bad power exponent {r}"))?;
                PsiFunction::power_law(exponent).map_err(|e| e.to_string())?
            }
            None => return Err(format!("unknown psi \"{other}\"; use identity|log|power:R")),
        },
    };
    if !(a < b) {
        return Err(format!("need a < b, got a={a}, b={b}"));
    }
    // op-apply has no eta/xi; pick interior placeholders for the domain type
    let eta = a + (b - a) / 3.0;
    let xi = a + 2.0 * (b - a) / 3.0;
    let dom = Domain::new(a, eta, xi, b).map_err(|e| e.to_string())?;
    let mesh = build_mesh(&psi, &dom, n).map_err(|e| e.to_string())?;
    let g = psifrac::expr::profile(profile_id)
        .ok_or_else(|| format!("unknown profile \"{profile_id}\"; known: {:?}", psifrac::expr::PROFILE_IDS))?;
    let u = GridFunction::from_k_fn(mesh.clone(), |k| g(k)).map_err(|e| e.to_string())?;
    let q = FracOrder::new(order).map_err(|e| e.to_string())?;
    let result = match op {
        "jleft" => frac_integral_left(q, &u),
        "jright" => frac_integral_right(q, &u),
        "caputo" => caputo_left(q, &u),
        other => return Err(format!("unknown op \"{other}\"; use jleft|jright|caputo")),
    }
    .map_err(|e| e.to_string())?;
    let mut w = open_out(out)?;
    csvio::write_grid_csv("t,value", &result, &mut w).map_err(|e| e.to_string())?;
    w.flush().map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}
