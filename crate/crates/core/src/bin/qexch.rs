//! Command-line front end. Exit codes: 0 when every check passes, 1 when a
//! check fails, 2 on input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qexch::cumulants::{moments_to_cumulants, MAX_CUMULANT_ORDER};
use qexch::exchangeability::finite_counterexample;
use qexch::magic::{bruteforce_collapse_sum, collapse_indicator, interval_collapse_sum};
use qexch::scalar::{distance, frobenius, identity, to_pairs};
use qexch::scenario::{
    build_functional, build_unitary, parse_scenario, run, CheckSpec, FunctionalSpec, Scenario, Settings, UnitarySpec,
    DEFAULT_TOLERANCE, TOLERANCE_ENV,
};
use qexch::{Error, Partition};

#[derive(Parser)]
#[command(
    name = "qexch",
    version,
    about = "Quantum exchangeability and operator-valued freeness checks"
)]
struct Cli {
    /// Residual tolerance; overrides the environment and the scenario file.
    #[arg(long, global = true, env = TOLERANCE_ENV)]
    tol: Option<f64>,

    /// Seed for sampled projections and tuples; overrides the scenario file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of a scenario file.
    Verify { scenario: PathBuf },
    /// Check the defining relations of one unitary or a list of unitaries
    /// (inline JSON or a file).
    CheckMagic { unitary: String },
    /// Print the cumulant and moment table of `x_1` up to order `n`.
    Cumulants {
        functional: String,
        #[arg(long)]
        n: usize,
    },
    /// Evaluate the interval-collapse sum for a partition and index tuple.
    Collapse {
        unitary: String,
        /// Blocks separated by `;`, e.g. `1,4;2,3`.
        #[arg(long)]
        pi: String,
        /// 1-based index tuple, e.g. `1,2,2,1`.
        #[arg(long)]
        i: String,
        /// Allow crossing partitions.
        #[arg(long)]
        unguarded: bool,
    },
    /// The commutative S_n counterexample (n = 2 or 3).
    Counterexample {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

struct Outcome {
    json: Value,
    text: String,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(out) => {
            let rendered = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable") + "\n",
                Format::Text => out.text,
            };
            print!("{rendered}");
            if let Some(path) = &cli.report {
                let body = serde_json::to_string_pretty(&out.json).expect("serializable") + "\n";
                if let Err(e) = std::fs::write(path, body) {
                    eprintln!("error: cannot write report {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(arg: &str) -> Result<String, String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| format!("cannot read {arg}: {e}"))
    }
}

fn parse_unitaries(text: &str) -> Result<Vec<UnitarySpec>, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("unitary spec: {e}"))?;
    let result = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|u| vec![u])
    };
    result.map_err(|e| format!("unitary spec: {e}"))
}

fn tolerance(cli: &Cli) -> f64 {
    cli.tol.unwrap_or(DEFAULT_TOLERANCE)
}

fn execute(cli: &Cli) -> Result<Outcome, String> {
    match &cli.command {
        Command::Verify { scenario } => {
            let text =
                std::fs::read_to_string(scenario).map_err(|e| format!("cannot read {}: {e}", scenario.display()))?;
            let s = parse_scenario(&text).map_err(|e| e.to_string())?;
            run_scenario(&s, cli)
        }
        Command::CheckMagic { unitary } => {
            let unitaries = parse_unitaries(&load(unitary)?)?;
            let s = Scenario {
                name: "check-magic".into(),
                tolerance: None,
                seed: None,
                functional: None,
                unitaries,
                checks: vec![CheckSpec::Relations],
            };
            run_scenario(&s, cli)
        }
        Command::Cumulants { functional, n } => cumulants(&load(functional)?, *n),
        Command::Collapse {
            unitary,
            pi,
            i,
            unguarded,
        } => collapse(cli, &load(unitary)?, pi, i, *unguarded),
        Command::Counterexample { n } => {
            let rep = finite_counterexample(*n).map_err(|e| e.to_string())?;
            let text = format!(
                "S_{n} with uniform Haar state\n  psi(u11)      = {}\n  psi(u11 u21)  = {}\n  psi(u11)^2    = {}\n  relations exact: {}\n  column exchangeable ({} words): {}\n  contradiction with freeness over scalars: {}\n",
                rep.psi_u11,
                rep.psi_u11_u21,
                rep.free_prediction,
                rep.relations_exact,
                rep.words_checked,
                rep.exchangeable,
                rep.contradiction
            );
            let json = serde_json::to_value(&rep).expect("serializable");
            Ok(Outcome {
                json,
                text,
                pass: rep.contradiction,
            })
        }
    }
}

fn run_scenario(s: &Scenario, cli: &Cli) -> Result<Outcome, String> {
    let settings = Settings::resolve(s, cli.tol, None, cli.seed);
    let report = run(s, &settings).map_err(|e| e.to_string())?;
    Ok(Outcome {
        json: serde_json::to_value(&report).expect("serializable"),
        text: report.to_text(),
        pass: report.pass,
    })
}

fn cumulants(text: &str, n: usize) -> Result<Outcome, String> {
    if n == 0 || n > MAX_CUMULANT_ORDER {
        return Err(Error::SizeOutOfRange {
            n,
            min: 1,
            max: MAX_CUMULANT_ORDER,
        }
        .to_string());
    }
    let spec: FunctionalSpec = serde_json::from_str(text).map_err(|e| format!("functional spec: {e}"))?;
    let f = build_functional(&spec).map_err(|e| e.to_string())?;
    let mf = f.as_dyn();
    let b_dim = mf.b_dim();
    let inner = vec![identity::<f64>(b_dim); n.saturating_sub(1)];
    let kappas = moments_to_cumulants(mf, &vec![0; n], &inner, n).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    let mut out = format!("{:>3}  {:>24}  {:>24}\n", "n", "phi(kappa_n)", "m_n");
    for (r, k) in kappas.iter().enumerate() {
        let m = mf.scalar_moment(&vec![0; r + 1]).map_err(|e| e.to_string())?;
        let pk = mf.phi_b(k);
        out += &format!(
            "{:>3}  {:>24}  {:>24}\n",
            r + 1,
            fmt_complex(pk.re, pk.im),
            fmt_complex(m.re, m.im)
        );
        rows.push(json!({
            "order": r + 1,
            "kappa": to_pairs(k),
            "phi_kappa": [pk.re, pk.im],
            "moment": [m.re, m.im],
        }));
    }
    Ok(Outcome {
        json: json!({ "b_dim": b_dim, "n": n, "table": rows }),
        text: out,
        pass: true,
    })
}

fn fmt_complex(re: f64, im: f64) -> String {
    let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
    let (re, im) = (clean(re), clean(im));
    if im == 0.0 {
        format!("{re:.10}")
    } else {
        format!("{re:.10}{im:+.10}i")
    }
}

fn collapse(cli: &Cli, text: &str, pi: &str, i: &str, unguarded: bool) -> Result<Outcome, String> {
    let specs = parse_unitaries(text)?;
    let [spec] = specs.as_slice() else {
        return Err("collapse takes exactly one unitary".into());
    };
    let u = build_unitary(spec, 0, cli.seed.unwrap_or(0)).map_err(|e| e.to_string())?;
    let pi: Partition = pi.parse().map_err(|e: Error| format!("--pi: {e}"))?;
    let tuple = i
        .split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(format!("--i: `{t}` is not a 1-based index")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sum = if unguarded {
        bruteforce_collapse_sum(&u, &tuple, &pi)
    } else {
        interval_collapse_sum(&u, &tuple, &pi)
    }
    .map_err(|e| e.to_string())?;
    let indicator = collapse_indicator(&tuple, &pi);
    let residual = if indicator {
        distance(&sum, &identity(u.d()))
    } else {
        frobenius(&sum)
    };
    let tol = tolerance(cli);
    let pass = residual <= tol;
    let mut out = format!("pi = {pi}, i = {i}\n");
    for r in 0..sum.nrows() {
        let row: Vec<String> = (0..sum.ncols())
            .map(|c| fmt_complex(sum[(r, c)].re, sum[(r, c)].im))
            .collect();
        out += &format!("  [{}]\n", row.join(", "));
    }
    out += &format!(
        "ker i >= pi: {indicator}; expected {}; residual {residual:.3e} ({})\n",
        if indicator { "identity" } else { "zero" },
        if pass { "PASS" } else { "FAIL" }
    );
    let json = json!({
        "pi": pi.to_string(),
        "tuple": tuple.iter().map(|t| t + 1).collect::<Vec<_>>(),
        "matrix": to_pairs(&sum),
        "indicator": indicator,
        "residual": residual,
        "tolerance": tol,
        "pass": pass,
    });
    Ok(Outcome { json, text: out, pass })
}
