//! Command-line driver: tables, hierarchy construction and verifications.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use serde_json::{json, Value};

use ilwhodge_core::diffalg::{reconstruct_functional_from_flow_seeded, DiffPoly};
use ilwhodge_core::exactnum::factorial;
use ilwhodge_core::{bernoulli, c_g, dispersion_coeff, hodge, ilw, CgTable, Rational, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Latex,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Cg,
    IlwT1,
    IlwT2,
    Commute,
    LinearTerm,
    Reverse,
    All,
}

#[derive(Debug, Parser)]
#[command(name = "ilwhodge", version, about = "Exact ILW hierarchy and one-point Hodge integral engine")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json", env = "ILWHODGE_FORMAT")]
    format: Format,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true, env = "ILWHODGE_OUTPUT")]
    output: Option<String>,
    /// Seed for the randomized self-adjointness probes.
    #[arg(long, global = true, default_value_t = 0x11a70de, env = "ILWHODGE_SEED")]
    seed: u64,
    /// Test mode: add `--perturb-delta` to C_g before verifying.
    #[arg(long, global = true, env = "ILWHODGE_PERTURB_CG")]
    perturb_cg: Option<u32>,
    #[arg(long, global = true, default_value = "1/1000000", env = "ILWHODGE_PERTURB_DELTA")]
    perturb_delta: Rational,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bernoulli numbers B_0..B_max and the constants C_g.
    Bernoulli {
        #[arg(long, env = "ILWHODGE_MAX")]
        max: u32,
    },
    /// C_g = |B_2g|/(2(2g)!) and the dispersion coefficients |B_2g|/(2g)!.
    Constants {
        #[arg(long, default_value_t = 5, env = "ILWHODGE_GENUS", value_parser = clap::value_parser!(u32).range(1..))]
        max_genus: u32,
    },
    /// One-point linear Hodge integrals <lambda_j tau_d>_g.
    OnePoint {
        #[arg(long, default_value_t = 5, env = "ILWHODGE_GENUS", value_parser = clap::value_parser!(u32).range(1..))]
        max_genus: u32,
    },
    /// Density of the i-th Hamiltonian.
    Hamiltonian {
        #[arg(long, default_value_t = 2, env = "ILWHODGE_INDEX", value_parser = clap::value_parser!(u32).range(1..))]
        index: u32,
        #[arg(long, default_value_t = 5, env = "ILWHODGE_GENUS")]
        genus: u32,
    },
    /// Flow du/dt_i of the i-th Hamiltonian.
    Flow {
        #[arg(long, default_value_t = 2, env = "ILWHODGE_INDEX", value_parser = clap::value_parser!(u32).range(1..))]
        index: u32,
        #[arg(long, default_value_t = 5, env = "ILWHODGE_GENUS")]
        genus: u32,
    },
    /// Run a verification suite; exit 1 on any mismatch.
    Verify {
        #[arg(value_enum)]
        which: Which,
        #[arg(long, default_value_t = 5, env = "ILWHODGE_GENUS", value_parser = clap::value_parser!(u32).range(1..))]
        genus: u32,
    },
}

struct Output {
    text: String,
    ok: bool,
}

fn envelope(command: &str, cli: &Cli, status: &str, details: Value) -> String {
    let config = json!({
        "format": format!("{:?}", cli.format).to_lowercase(),
        "seed": cli.seed,
        "output": cli.output,
        "perturb_cg": cli.perturb_cg,
        "perturb_delta": cli.perturb_delta.to_string(),
        "args": command_args(&cli.command),
    });
    let v = json!({"command": command, "config": config, "status": status, "details": details});
    serde_json::to_string_pretty(&v).expect("serializable") + "\n"
}

fn command_args(c: &Command) -> Value {
    match c {
        Command::Bernoulli { max } => json!({"max": max}),
        Command::Constants { max_genus } | Command::OnePoint { max_genus } => {
            json!({"max_genus": max_genus})
        }
        Command::Hamiltonian { index, genus } | Command::Flow { index, genus } => {
            json!({"index": index, "genus": genus})
        }
        Command::Verify { which, genus } => {
            json!({"which": format!("{which:?}").to_lowercase(), "genus": genus})
        }
    }
}

fn latex_rational(v: &Rational) -> String {
    let sign = if v.is_negative() { "-" } else { "" };
    if *v.denom() == 1.into() {
        v.to_string()
    } else {
        format!("{sign}\\frac{{{}}}{{{}}}", v.numer().magnitude(), v.denom())
    }
}

fn table(cli: &Cli, rows: &[(String, String, Rational)], command: &str) -> String {
    // rows: (kind, index, value)
    match cli.format {
        Format::Json => envelope(
            command,
            cli,
            "ok",
            Value::Array(
                rows.iter()
                    .map(|(k, i, v)| json!({"name": format!("{k}_{i}"), "value": v.to_string()}))
                    .collect(),
            ),
        ),
        Format::Csv => {
            let mut s = String::from("name,index,value\n");
            for (k, i, v) in rows {
                s.push_str(&format!("{k},{i},{v}\n"));
            }
            s
        }
        Format::Latex => {
            let mut s = String::from("\\begin{tabular}{cc}\n\\hline\n");
            for (k, i, v) in rows {
                s.push_str(&format!("${k}_{{{i}}}$ & ${}$ \\\\\n", latex_rational(v)));
            }
            s.push_str("\\end{tabular}\n");
            s
        }
        Format::Pretty => rows
            .iter()
            .map(|(k, i, v)| format!("{k}_{i} = {v}\n"))
            .collect(),
    }
}

fn render_poly(cli: &Cli, command: &str, p: &DiffPoly, extra: Value) -> String {
    match cli.format {
        Format::Json => envelope(
            command,
            cli,
            "ok",
            json!([{"pretty": p.pretty(), "latex": p.latex(), "terms": p.to_json(), "info": extra}]),
        ),
        Format::Csv => {
            let mut s = String::from("hbar,eps,u,coef\n");
            for (u, c) in p.iter() {
                let mono: Vec<String> = u.pairs().iter().map(|(k, m)| format!("{k}^{m}")).collect();
                for (e, v) in c.terms() {
                    s.push_str(&format!("{},{},{},{}\n", e[0], e[1], mono.join(" "), v));
                }
            }
            s
        }
        Format::Latex => p.latex() + "\n",
        Format::Pretty => p.pretty() + "\n",
    }
}

fn cg_table(cli: &Cli, genus: u32) -> CgTable {
    let t = CgTable::exact(genus);
    match cli.perturb_cg {
        Some(g) => t.perturbed(g, &cli.perturb_delta),
        None => t,
    }
}

/// Recovers the Hamiltonian from its flow and compares.
fn reconstruction_report(name: &str, h: &ilw::Hamiltonian, seed: u64) -> Report {
    match reconstruct_functional_from_flow_seeded(&h.flow(), seed, 6) {
        Ok(f) if f == h.functional => Report::ok(name, h.genus_order),
        Ok(f) => ilw::compare(name, h.genus_order, f.density(), h.density()),
        Err(e) => Report::mismatch(
            name,
            h.genus_order,
            ilwhodge_core::Mismatch {
                locus: "reconstruction".into(),
                hbar_order: 0,
                expected: "Hamiltonian flow".into(),
                found: e.to_string(),
            },
        ),
    }
}

fn run_verify(cli: &Cli, which: Which, genus: u32) -> Vec<Report> {
    let table = cg_table(cli, genus);
    let mut out = Vec::new();
    let all = which == Which::All;
    if all || which == Which::Cg {
        out.push(hodge::verify_cg(genus, &table));
    }
    if all || which == Which::IlwT1 {
        out.push(ilw::verify_flow_t1(genus, &table));
        out.push(reconstruction_report("ilw-t1-reconstruct", &ilw::h1_with(genus, &table), cli.seed));
    }
    if all || which == Which::IlwT2 {
        out.push(ilw::verify_flow_t2(genus, &table));
        if let Ok(h2) = ilw::hamiltonian_with(2, genus, &table) {
            out.push(reconstruction_report("ilw-t2-reconstruct", &h2, cli.seed));
        }
    }
    if all || which == Which::Commute {
        out.push(ilw::verify_commutation(2, 1, genus, &table));
        out.push(ilw::verify_commutation(3, 2, genus, &table));
    }
    if all || which == Which::LinearTerm {
        out.push(hodge::verify_linear_term_identity(genus, &table));
    }
    if all || which == Which::Reverse {
        out.push(hodge::verify_reverse(genus, &table));
    }
    out
}

fn run(cli: &Cli) -> Result<Output, String> {
    let ok = |text| Ok(Output { text, ok: true });
    match &cli.command {
        Command::Bernoulli { max } => {
            let mut rows: Vec<_> = (0..=*max).map(|n| ("B".to_string(), n.to_string(), bernoulli(n))).collect();
            rows.extend((1..=max / 2).map(|g| ("C".to_string(), g.to_string(), c_g(g))));
            ok(table(cli, &rows, "bernoulli"))
        }
        Command::Constants { max_genus } => {
            let mut rows: Vec<_> = (1..=*max_genus).map(|g| ("C".to_string(), g.to_string(), c_g(g))).collect();
            rows.extend((1..=*max_genus).map(|g| ("D".to_string(), g.to_string(), dispersion_coeff(g))));
            ok(table(cli, &rows, "constants"))
        }
        Command::OnePoint { max_genus } => {
            let t = hodge::one_point_table(*max_genus).map_err(|e| e.to_string())?;
            ok(match cli.format {
                Format::Json => envelope("one-point", cli, "ok", t.to_json()),
                Format::Csv => t.to_csv(),
                Format::Latex => t.to_latex(),
                Format::Pretty => t
                    .iter()
                    .map(|(g, j, d, v)| format!("<lambda_{j} tau_{}>_{g} = {v}\n", d[0]))
                    .collect(),
            })
        }
        Command::Hamiltonian { index, genus } => {
            let table = cg_table(cli, *genus);
            let h = ilw::hamiltonian_with(*index, *genus, &table).map_err(|e| e.to_string())?;
            let lead = Rational::new(1.into(), factorial(index + 2));
            ok(render_poly(cli, "hamiltonian", h.density(), json!({"index": index, "genus": genus, "leading": lead.to_string()})))
        }
        Command::Flow { index, genus } => {
            let table = cg_table(cli, *genus);
            let h = ilw::hamiltonian_with(*index, *genus, &table).map_err(|e| e.to_string())?;
            ok(render_poly(cli, "flow", &h.flow(), json!({"index": index, "genus": genus})))
        }
        Command::Verify { which, genus } => {
            let reports = run_verify(cli, *which, *genus);
            let all_ok = reports.iter().all(Report::is_ok);
            let status = if all_ok { "ok" } else { "mismatch" };
            let details = Value::Array(reports.iter().map(Report::to_json).collect());
            let text = match cli.format {
                Format::Pretty => {
                    let mut s: String = reports
                        .iter()
                        .map(|r| match &r.first_mismatch {
                            None => format!("{}: ok (order {})\n", r.name, r.order_checked),
                            Some(m) => format!(
                                "{}: MISMATCH at {} (expected {}, found {})\n",
                                r.name, m.locus, m.expected, m.found
                            ),
                        })
                        .collect();
                    if !all_ok {
                        s.push_str(&envelope("verify", cli, status, details));
                    }
                    s
                }
                _ => envelope("verify", cli, status, details),
            };
            Ok(Output { text, ok: all_ok })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, &out.text) {
                eprintln!("error: cannot write {path}: {e}");
                return ExitCode::from(2);
            }
        }
        None => print!("{}", out.text),
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
