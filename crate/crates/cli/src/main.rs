//! `choirt`: Choi-matrix inspection, theory verification and resource quantifiers.
//!
//! Exit codes: 0 success, 1 verification failed, 2 bad input, 3 unknown
//! theory or unsupported configuration, 4 solver failure.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use choirt::cdrt::{run_full_suite, summarize, SuiteOptions, Verdict};
use choirt::choi::{apply_linear, reorder_systems, ChoiMatrix};
use choirt::conic::{self, solution_to_json, Solution, SolverOptions};
use choirt::linalg::{psd_margin, ComplexMatrix, DimVector};
use choirt::theories::{theory_by_name, FreeSet, DEFAULT_TOL};
use choirt::Error;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

/// Overrides the default tolerance of every command.
const TOL_ENV: &str = "CHOIRT_TOL";

#[derive(Parser)]
#[command(name = "choirt", version, about = "Choi-defined resource theories: Choi calculus, verification, quantifiers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Raw Choi-matrix tools.
    #[command(subcommand)]
    Choi(ChoiCmd),
    /// Verify that a theory is Choi-defined.
    #[command(subcommand)]
    Cdrt(CdrtCmd),
    /// Resource quantifiers via conic programs.
    #[command(subcommand)]
    Quant(QuantCmd),
}

#[derive(Subcommand)]
enum ChoiCmd {
    /// Read a bare matrix under every candidate split and both factor orders.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct InspectArgs {
    /// Matrix JSON file.
    matrix: PathBuf,
    /// Candidate `OUT:IN` dimension split (repeatable); default: every split with both sides ≥ 2.
    #[arg(long = "split", value_name = "OUT:IN")]
    splits: Vec<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum CdrtCmd {
    /// Run the full verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    theory: String,
    /// System factor dimensions, e.g. `2,3` for a qubit-qutrit pair (repeatable);
    /// default: the theory's own list.
    #[arg(long, value_name = "D1,D2,..")]
    dims: Vec<String>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Samples for the tensor/trace/swap closure check.
    #[arg(long, default_value_t = 20)]
    closure_samples: usize,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct QuantCommon {
    #[arg(long)]
    theory: String,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-7)]
    gap_tol: f64,
    /// Write the primal/dual certificate here.
    #[arg(long, value_name = "PATH")]
    certificate: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    /// Input-system state (matrix JSON).
    #[arg(long)]
    rho: PathBuf,
    /// Output-system state (matrix JSON).
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    in_dims: Option<String>,
    #[arg(long)]
    out_dims: Option<String>,
}

#[derive(Subcommand)]
enum QuantCmd {
    /// Max-relative entropy of a state (bits).
    DmaxState {
        #[command(flatten)]
        common: QuantCommon,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        dims: Option<String>,
    },
    /// Max-relative entropy of a channel given as Choi JSON (bits).
    DmaxChannel {
        #[command(flatten)]
        common: QuantCommon,
        #[arg(long)]
        choi: PathBuf,
    },
    /// The overlap monotone f_τ(ρ).
    Monotone {
        #[command(flatten)]
        common: QuantCommon,
        /// Output-system state τ.
        #[arg(long)]
        tau: PathBuf,
        /// Input-system state ρ.
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        in_dims: Option<String>,
        #[arg(long)]
        out_dims: Option<String>,
    },
    /// Smallest trace distance from σ to a free image of ρ.
    ConvertDistance {
        #[command(flatten)]
        common: QuantCommon,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Whether a free channel maps ρ to σ (entrywise within --tol).
    Convertible {
        #[command(flatten)]
        common: QuantCommon,
        #[command(flatten)]
        pair: PairArgs,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownTheory(_) | Error::UnsupportedDimension(_) => 3,
            Error::Solver(_) | Error::InvalidProgram(_) | Error::SamplerExhausted { .. } => 4,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn bad_input(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type CmdResult = Result<u8, Failure>;

fn default_tol(flag: Option<f64>) -> Result<f64, Failure> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s.trim().parse().map_err(|_| bad_input(format!("{TOL_ENV}=`{s}` is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(bad_input(format!("tolerance must be positive, got {tol}")))
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| bad_input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| bad_input(format!("{}: {e}", path.display())))
}

fn read_square(path: &Path) -> Result<ComplexMatrix, Failure> {
    let m: ComplexMatrix = read_json(path)?;
    m.require_square()?;
    Ok(m)
}

fn dims_or(s: Option<&str>, total: usize) -> Result<DimVector, Failure> {
    match s {
        Some(s) => Ok(DimVector::parse(s)?),
        None => Ok(DimVector::single(total)),
    }
}

fn emit(json_mode: bool, v: &Value, human: impl FnOnce() -> String) {
    if json_mode {
        println!("{}", output::json(v));
    } else {
        println!("{}", human());
    }
}

// ---------------------------------------------------------------- inspect

fn parse_split(s: &str) -> Result<(usize, usize), Failure> {
    let parsed = s.split_once(':').and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    match parsed {
        Some((o, i)) if o > 0 && i > 0 => Ok((o, i)),
        _ => Err(bad_input(format!("bad split `{s}`, expected OUT:IN"))),
    }
}

fn default_splits(n: usize) -> Vec<(usize, usize)> {
    let s: Vec<_> = (2..n).filter(|o| n % o == 0 && n / o >= 2).map(|o| (o, n / o)).collect();
    if s.is_empty() {
        vec![(n, 1), (1, n)]
    } else {
        s
    }
}

fn inspect(a: InspectArgs) -> CmdResult {
    let tol = default_tol(a.tol)?;
    let m = read_square(&a.matrix)?;
    let n = m.rows();
    m.require_hermitian(tol)?;
    let splits = if a.splits.is_empty() {
        default_splits(n)
    } else {
        a.splits.iter().map(|s| parse_split(s)).collect::<Result<_, _>>()?
    };

    let mut readings = Vec::new();
    let mut human = vec![format!("matrix {n}x{n}, trace {}", output::complex(m.trace()))];
    for &(dout, din) in &splits {
        if dout * din != n {
            return Err(bad_input(format!("split {dout}:{din} does not match a {n}x{n} matrix")));
        }
        // input-first means the stored factors are in ⊗ out
        let swapped = reorder_systems(&m, &DimVector::new(vec![din, dout])?, &[1, 0])?;
        for (order, mat) in [("output-first", m.clone()), ("input-first", swapped)] {
            let choi = ChoiMatrix::new(mat, DimVector::single(dout), DimVector::single(din), false)?;
            let marginal = choi.input_marginal();
            let residual = marginal.dist_max(&ComplexMatrix::identity(din));
            let margin = psd_margin(choi.matrix())?;
            let channel = residual <= tol && margin >= -tol;
            let image = apply_linear(&choi, &ComplexMatrix::unit(din, 0, 0));
            human.push(format!(
                "reading {order} out={dout} in={din}: {}\n  input marginal:\n{}\n  marginal residual {}, psd margin {}\n  image of |0><0|:\n{}",
                if channel { "valid channel" } else { "not a channel" },
                output::matrix(&marginal, "    "),
                output::num(residual),
                output::num(margin),
                output::matrix(&image, "    "),
            ));
            readings.push(json!({
                "order": order,
                "out_dims": [dout],
                "in_dims": [din],
                "input_marginal": marginal,
                "marginal_residual": residual,
                "psd_margin": margin,
                "channel": channel,
                "image_of_zero": image,
            }));
        }
    }
    let passing: Vec<&Value> = readings.iter().filter(|r| r["channel"] == json!(true)).collect();
    let agree = passing.windows(2).all(|w| {
        let a: ComplexMatrix = serde_json::from_value(w[0]["image_of_zero"].clone()).expect("own output");
        let b: ComplexMatrix = serde_json::from_value(w[1]["image_of_zero"].clone()).expect("own output");
        a.rows() == b.rows() && a.dist_max(&b) <= tol
    });
    let verdict = match passing.len() {
        0 => "no reading is a channel".to_string(),
        1 => format!("identified: {} out={} in={}", passing[0]["order"].as_str().unwrap_or(""), passing[0]["out_dims"][0], passing[0]["in_dims"][0]),
        k if agree => format!("inconclusive: {k} readings pass the marginal test (their images agree)"),
        k => format!("inconclusive: {k} readings pass the marginal test and disagree"),
    };
    human.push(verdict.clone());
    let v = json!({
        "command": "choi inspect",
        "dims": n,
        "trace": m.trace().re,
        "tol": tol,
        "seed": null,
        "readings": readings,
        "passing": passing.len(),
        "verdict": verdict,
    });
    emit(a.json, &v, || human.join("\n"));
    Ok(0)
}

// ----------------------------------------------------------------- verify

fn verify(a: VerifyArgs) -> CmdResult {
    let tol = default_tol(a.tol)?;
    let theory = theory_by_name(&a.theory)?;
    let dims = if a.dims.is_empty() {
        theory.default_dims()
    } else {
        a.dims.iter().map(|s| DimVector::parse(s)).collect::<Result<_, _>>()?
    };
    let opts = SuiteOptions { samples: a.samples, closure_samples: a.closure_samples, tol, ..SuiteOptions::default() };
    let reports = run_full_suite(theory.as_ref(), &dims, a.seed, &opts);
    let summary = summarize(theory.as_ref(), &reports);
    let v = json!({
        "command": "cdrt verify",
        "theory": theory.name(),
        "dims": dims,
        "seed": a.seed,
        "tol": tol,
        "samples": a.samples,
        "reports": reports,
        "summary": summary,
    });
    emit(a.json, &v, || {
        let mut lines = vec![format!("theory {} seed {} tol {}", theory.name(), a.seed, output::num(tol))];
        for r in &reports {
            let dims: Vec<String> = r.dims.iter().map(|d| d.to_string()).collect();
            let verdict = match r.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Unsupported => "unsupported",
            };
            lines.push(format!(
                "{:<17} {:<12} {:<11} samples {:>4}  worst margin {}  {}",
                r.condition.to_string(),
                dims.join(" "),
                verdict,
                r.samples,
                output::num(r.worst_margin),
                r.detail
            ));
        }
        lines.push(summary.message.clone());
        lines.join("\n")
    });
    Ok(if summary.ok { 0 } else { 1 })
}

// ------------------------------------------------------------------ quant

struct Solved {
    value: f64,
    solution: Solution,
    extra: Vec<(&'static str, Value)>,
    witness: Option<ChoiMatrix>,
}

fn quant(cmd: QuantCmd) -> CmdResult {
    let (name, common) = match &cmd {
        QuantCmd::DmaxState { common, .. } => ("dmax-state", common),
        QuantCmd::DmaxChannel { common, .. } => ("dmax-channel", common),
        QuantCmd::Monotone { common, .. } => ("monotone", common),
        QuantCmd::ConvertDistance { common, .. } => ("convert-distance", common),
        QuantCmd::Convertible { common, .. } => ("convertible", common),
    };
    let tol = default_tol(common.tol)?;
    let theory = theory_by_name(&common.theory)?;
    let t: &dyn FreeSet = theory.as_ref();
    let opts = SolverOptions { max_iter: common.max_iter, gap_tol: common.gap_tol, ..SolverOptions::default() };

    let solved = match &cmd {
        QuantCmd::DmaxState { state, dims, .. } => {
            let rho = read_square(state)?;
            let dims = dims_or(dims.as_deref(), rho.rows())?;
            let q = conic::dmax_state(t, &rho, &dims, &opts)?;
            Solved { value: q.value, solution: q.solution, extra: vec![("optimum", json!(q.optimum)), ("dims", json!(dims))], witness: None }
        }
        QuantCmd::DmaxChannel { choi, .. } => {
            let mu: ChoiMatrix = read_json(choi)?;
            mu.require_channel(tol)?;
            let q = conic::dmax_channel(t, &mu, &opts)?;
            let extra = vec![("optimum", json!(q.optimum)), ("out_dims", json!(mu.out_dims())), ("in_dims", json!(mu.in_dims()))];
            Solved { value: q.value, solution: q.solution, extra, witness: None }
        }
        QuantCmd::Monotone { tau, rho, in_dims, out_dims, .. } => {
            let (tau, rho) = (read_square(tau)?, read_square(rho)?);
            let ind = dims_or(in_dims.as_deref(), rho.rows())?;
            let outd = dims_or(out_dims.as_deref(), tau.rows())?;
            let q = conic::monotone(t, &tau, &rho, &ind, &outd, &opts)?;
            let bound = 1.0 / (ind.total() * outd.total()) as f64;
            let extra = vec![
                ("lower_bound", json!(bound)),
                ("bound_satisfied", json!(q.value >= bound - tol)),
                ("in_dims", json!(ind)),
                ("out_dims", json!(outd)),
            ];
            Solved { value: q.value, solution: q.solution, extra, witness: None }
        }
        QuantCmd::ConvertDistance { pair, .. } | QuantCmd::Convertible { pair, .. } => {
            let (rho, sigma) = (read_square(&pair.rho)?, read_square(&pair.sigma)?);
            let ind = dims_or(pair.in_dims.as_deref(), rho.rows())?;
            let outd = dims_or(pair.out_dims.as_deref(), sigma.rows())?;
            let c = if name == "convertible" {
                conic::convertible(t, &rho, &sigma, &ind, &outd, tol, &opts)?
            } else {
                conic::conversion_distance(t, &rho, &sigma, &ind, &outd, &opts)?
            };
            let mut extra = vec![("in_dims", json!(ind)), ("out_dims", json!(outd))];
            if name == "convertible" {
                extra.push(("convertible", json!(c.convertible)));
            }
            Solved { value: c.value, solution: c.solution, extra, witness: Some(c.witness) }
        }
    };

    if let Some(path) = &common.certificate {
        let cert = json!({
            "command": name,
            "theory": t.name(),
            "solution": solution_to_json(&solved.solution),
            "witness": solved.witness,
        });
        std::fs::write(path, output::json(&cert) + "\n")
            .map_err(|e| bad_input(format!("cannot write certificate {}: {e}", path.display())))?;
    }

    let s = &solved.solution;
    let mut v = json!({
        "command": name,
        "theory": t.name(),
        "value": solved.value,
        "status": s.status,
        "primal_value": s.primal_value,
        "dual_value": s.dual_value,
        "gap": s.gap,
        "iterations": s.iterations,
        "seed": null,
        "tol": tol,
        "solver": { "max_iter": opts.max_iter, "gap_tol": opts.gap_tol, "feas_tol": opts.feas_tol },
        "certificate_written": common.certificate.is_some(),
    });
    for (k, x) in &solved.extra {
        v[*k] = x.clone();
    }
    emit(common.json, &v, || {
        let unit = if name.starts_with("dmax") { " bits" } else { "" };
        let mut lines = vec![format!("{name} [{}]: {}{unit}", t.name(), output::num(solved.value))];
        for (k, x) in &solved.extra {
            let shown = match x {
                Value::Number(n) => output::num(n.as_f64().unwrap_or(f64::NAN)),
                other => other.to_string(),
            };
            lines.push(format!("  {k}: {shown}"));
        }
        lines.push(format!(
            "  status {}, primal {}, dual {}, gap {}, {} iterations",
            s.status,
            output::num(s.primal_value),
            output::num(s.dual_value),
            output::num(s.gap),
            s.iterations
        ));
        lines.push(format!(
            "  tol {}, max-iter {}, gap-tol {}",
            output::num(tol),
            opts.max_iter,
            output::num(opts.gap_tol)
        ));
        lines.join("\n")
    });
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Choi(ChoiCmd::Inspect(a)) => inspect(a),
        Cmd::Cdrt(CdrtCmd::Verify(a)) => verify(a),
        Cmd::Quant(q) => quant(q),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
