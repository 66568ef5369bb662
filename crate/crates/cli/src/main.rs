//! `projsum`: decompose a Hermitian operator into a sum of compositions of
//! projection pairs, verify serialized decompositions, and query the
//! feasibility bounds and the underlying planar region.
//!
//! Exit codes: 0 success, 1 usage/format error, 2 infeasible input,
//! 3 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use projsum_core::region::{
    bound_table, check_feasibility, in_region_a, inf_linear_functional,
    inf_linear_functional_bruteforce, min_sufficient_n, nc_bounds, RegionPoint,
};
use projsum_core::{
    decomposer::{decompose, verify_decomposition, verify_decomposition_parallel},
    fileio::{load_decomposition, load_input, save_decomposition},
    matfactory::{mat2_add, mat2_mul, sharpness_family, Mat2},
    Error,
};

const CLUSTER_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "projsum", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a Hermitian matrix or spectrum into n projection-pair
    /// compositions and write the result to a file.
    Decompose {
        /// Input file: a JSON matrix object or a JSON array of eigenvalues.
        input: PathBuf,
        /// Number of summands: an even integer >= 4, or "auto" to pick the
        /// smallest sufficient value.
        #[arg(long, default_value = "auto")]
        n: String,
        /// Output decomposition file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a decomposition file on a finite window.
    Verify {
        /// Decomposition file produced by `decompose`.
        dec: PathBuf,
        /// Window size T (copies 0..T); must be at least 2m.
        #[arg(long)]
        window: u64,
        /// Entrywise tolerance for the window sum.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Spread the per-group verification work across threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Print the summand-count bounds for a spectrum range or a norm bound.
    Feasibility {
        #[arg(long, requires = "lambda_max", conflicts_with = "norm_bound", allow_negative_numbers = true)]
        lambda_min: Option<f64>,
        #[arg(long, requires = "lambda_min", allow_negative_numbers = true)]
        lambda_max: Option<f64>,
        /// Norm bound c: report the summand-count estimates for all
        /// operators with norm at most c.
        #[arg(long)]
        norm_bound: Option<f64>,
    },
    /// Query the planar region of attainable diagonal pairs.
    #[command(subcommand)]
    Region(RegionCommand),
    /// Print the diagonal family of n projection pairs summing to
    /// diag(-n/8, 3n/8).
    Sharpness {
        /// Number of pairs; must be even and >= 2.
        n: u32,
    },
}

#[derive(Subcommand)]
enum RegionCommand {
    /// Report whether (x, y) lies in the region.
    Membership {
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
    },
    /// Emit a CSV polyline of the region boundary (both branches).
    Boundary,
    /// Closed-form and brute-force minimum of y + (n-1) x over the region.
    Extremal { n: u32 },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::Infeasible(_)) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Decompose { input, n, out } => cmd_decompose(&input, &n, &out),
        Command::Verify {
            dec,
            window,
            tol,
            parallel,
        } => cmd_verify(&dec, window, tol, parallel),
        Command::Feasibility {
            lambda_min,
            lambda_max,
            norm_bound,
        } => cmd_feasibility(lambda_min.zip(lambda_max), norm_bound),
        Command::Region(region) => cmd_region(region),
        Command::Sharpness { n } => cmd_sharpness(n),
    }
}

fn cmd_decompose(input: &Path, n_arg: &str, out: &Path) -> anyhow::Result<u8> {
    let spec = load_input(input)?.to_presentation(CLUSTER_TOL)?;
    let n = if n_arg == "auto" {
        let n = min_sufficient_n(spec.lambda_min(), spec.lambda_max())?;
        println!("auto-selected n = {n}");
        n
    } else {
        n_arg
            .parse::<u32>()
            .map_err(|_| anyhow::anyhow!("--n must be \"auto\" or a positive integer"))?
    };
    let verdict = check_feasibility(spec.lambda_min(), spec.lambda_max(), n)?;
    print!("{verdict}");
    let d = decompose(&spec, n)?;
    save_decomposition(out, &d)?;
    println!(
        "decomposed spectrum [{}, {}] into n = {n} pairs; wrote {}",
        spec.lambda_min(),
        spec.lambda_max(),
        out.display()
    );
    Ok(0)
}

fn cmd_verify(dec: &Path, window: u64, tol: f64, parallel: bool) -> anyhow::Result<u8> {
    let d = load_decomposition(dec)?;
    let report = if parallel {
        verify_decomposition_parallel(&d, window, tol)?
    } else {
        verify_decomposition(&d, window, tol)?
    };
    println!("{report}");
    Ok(if report.pass() { 0 } else { 3 })
}

fn cmd_feasibility(lambdas: Option<(f64, f64)>, norm_bound: Option<f64>) -> anyhow::Result<u8> {
    match (lambdas, norm_bound) {
        (Some((lo, hi)), None) => {
            if lo > hi {
                anyhow::bail!("--lambda-min must not exceed --lambda-max");
            }
            let sufficient = min_sufficient_n(lo, hi)?;
            // Smallest n passing the necessary bounds -n/8 <= lo, hi <= n.
            let necessary = (-8.0 * lo).ceil().max(hi.ceil()).max(1.0) as u32;
            println!("spectrum range [{lo}, {hi}]");
            println!("necessary n >= {necessary} (Theorem 1)");
            println!("first sufficient n = {sufficient} (Theorem 3)");
            let last = sufficient.max(6);
            for n in (2..=last).step_by(2) {
                let t = bound_table(n)?;
                let verdict = check_feasibility(lo, hi, n)?;
                let status = if verdict.sufficient() {
                    "sufficient"
                } else if verdict.necessary_thm1 && verdict.necessary_thm2 {
                    "necessary bounds hold"
                } else {
                    "ruled out"
                };
                println!(
                    "n = {n}: necessary [{}, {}], threshold {}, sufficient {}: {status}",
                    t.thm1_low,
                    t.thm1_high,
                    t.thm2_threshold,
                    match (t.thm3_low, t.thm3_high) {
                        (Some(l), Some(h)) => format!("[{l}, {h}]"),
                        _ => "n/a".into(),
                    }
                );
            }
            Ok(0)
        }
        (None, Some(c)) => {
            let (lower, upper) = nc_bounds(c)?;
            println!(
                "norm bound c = {c}: {lower:.6} <= n(c) <= {upper} \
                 (envelopes 8c + 8/3 <= n(c) <= 8c + 10)"
            );
            Ok(0)
        }
        _ => anyhow::bail!(
            "pass either --lambda-min/--lambda-max or --norm-bound"
        ),
    }
}

fn cmd_region(command: RegionCommand) -> anyhow::Result<u8> {
    match command {
        RegionCommand::Membership { x, y } => {
            let p = RegionPoint::new(x, y);
            let verdict = if in_region_a(p, 0.0) {
                let s = p.sum();
                let d = p.diff();
                let on_boundary = (d * d - s).abs() <= 1e-9 || (s - 1.0).abs() <= 1e-9;
                if on_boundary {
                    "inside (boundary)"
                } else {
                    "inside"
                }
            } else if in_region_a(p, 1e-9) {
                "inside (boundary)"
            } else {
                "outside"
            };
            println!("({x}, {y}): {verdict}");
            Ok(0)
        }
        RegionCommand::Boundary => {
            println!("s,x_plus,y_plus,x_minus,y_minus");
            for i in 0..2001 {
                let s = i as f64 / 2000.0;
                let r = s.sqrt();
                println!(
                    "{s},{},{},{},{}",
                    (s + r) / 2.0,
                    (s - r) / 2.0,
                    (s - r) / 2.0,
                    (s + r) / 2.0
                );
            }
            Ok(0)
        }
        RegionCommand::Extremal { n } => {
            let closed = inf_linear_functional(n)?;
            let grid = inf_linear_functional_bruteforce(n, 2001);
            println!("inf of y + {} x over the region:", n - 1);
            println!("closed form: {closed}");
            println!("grid (2001 x 2001): {grid}");
            Ok(0)
        }
    }
}

fn cmd_sharpness(n: u32) -> anyhow::Result<u8> {
    let family = sharpness_family(n)?;
    let mut sum: Mat2 = [[0.0; 2]; 2];
    for (i, (q, p)) in family.iter().enumerate() {
        println!("pair {}:", i + 1);
        println!("  Q = [{:?}, {:?}]", q[0], q[1]);
        println!("  P = [{:?}, {:?}]", p[0], p[1]);
        sum = mat2_add(&sum, &mat2_mul(q, p));
    }
    println!("sum of products = [{:?}, {:?}]", sum[0], sum[1]);
    let nf = n as f64;
    let defect = (sum[0][0] + nf / 8.0)
        .abs()
        .max((sum[1][1] - 3.0 * nf / 8.0).abs())
        .max(sum[0][1].abs())
        .max(sum[1][0].abs());
    println!("target diag(-{}/8, 3*{}/8); defect {defect:e}", n, n);
    Ok(if defect <= 1e-12 { 0 } else { 3 })
}
