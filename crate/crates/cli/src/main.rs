mod expr;
mod graph_file;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gkm_core::gkm::{
    check_formality, mod_p_warnings, required_truncation, solve_equivariant_cohomology, validate_graph,
};
use gkm_core::integrate::{find_generic_slope, integrate, integration_truncation, GenericSlope, IntegrateError};
use gkm_core::scalar::{Theory, TheoryConfig, TheoryKind};
use gkm_core::series::Homogeneity;

use graph_file::GraphFile;

const INPUT_ERROR: u8 = 2;
const INVALID_GRAPH: u8 = 3;
const LOCALIZATION_FAILURE: u8 = 4;

/// Truncation used when the command has nothing better to go on.
const DEFAULT_TRUNCATION: u32 = 8;

#[derive(Parser)]
#[command(name = "gkm", version, about = "Equivariant complex-oriented cohomology of GKM graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a formal group law and one of its [l]-series.
    Fgl {
        #[command(flatten)]
        theory: TheoryArgs,
        /// Multiplier l in [l](u); defaults to p when the theory has one, else 2.
        #[arg(long, allow_hyphen_values = true)]
        ell: Option<i64>,
    },
    /// Solve the edge congruences degree by degree.
    Solve {
        graph: PathBuf,
        #[command(flatten)]
        theory: TheoryArgs,
        #[arg(long, default_value_t = 8)]
        qmax: i64,
    },
    /// Integrate a class from the graph file by fixed-point localization.
    Integrate {
        graph: PathBuf,
        #[arg(long)]
        class: String,
        #[command(flatten)]
        theory: TheoryArgs,
        /// One-parameter subgroup, e.g. `1,2`; searched for when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        slope: Option<Vec<i64>>,
    },
    /// Compare solver ranks with the free-module prediction from the betti block.
    CheckFormality {
        graph: PathBuf,
        #[command(flatten)]
        theory: TheoryArgs,
        #[arg(long, default_value_t = 8)]
        qmax: i64,
    },
}

#[derive(Args)]
struct TheoryArgs {
    /// ordinary, rational, mod-p, mult or morava.
    #[arg(long, default_value = "ordinary")]
    theory: String,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    n: Option<u32>,
    /// Power-series truncation degree; chosen automatically when omitted (8 for fgl).
    #[arg(long)]
    trunc: Option<u32>,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl TheoryArgs {
    fn build(&self, truncation: u32) -> Result<Theory, Failure> {
        let Some(kind) = TheoryKind::from_name(&self.theory) else {
            return Err(fail(
                INPUT_ERROR,
                format!(
                    "--theory: unknown theory '{}' (expected ordinary, rational, mod-p, mult or morava)",
                    self.theory
                ),
            ));
        };
        let needs_p = matches!(kind, TheoryKind::OrdinaryModP | TheoryKind::Morava);
        if needs_p && self.p.is_none() {
            return Err(fail(INPUT_ERROR, format!("--p is required for --theory {}", kind.name())));
        }
        if kind == TheoryKind::Morava && self.n.is_none() {
            return Err(fail(INPUT_ERROR, "--n is required for --theory morava"));
        }
        if kind != TheoryKind::Morava && self.n.is_some() {
            return Err(fail(INPUT_ERROR, format!("--n does not apply to --theory {}", kind.name())));
        }
        let config = TheoryConfig { kind, p: self.p, n: self.n, truncation };
        Theory::new(config).map_err(|e| fail(INPUT_ERROR, e.to_string()))
    }

    /// The theory at the requested truncation, or at `auto(theory)` when none was given.
    fn build_auto(&self, auto: impl FnOnce(&Theory) -> Result<u32, Failure>) -> Result<Theory, Failure> {
        let provisional = self.build(self.trunc.unwrap_or(DEFAULT_TRUNCATION))?;
        match self.trunc {
            Some(_) => Ok(provisional),
            None => {
                let d = auto(&provisional)?;
                provisional.with_truncation(d).map_err(|e| fail(INPUT_ERROR, e.to_string()))
            }
        }
    }
}

fn load_graph(path: &Path) -> Result<GraphFile, Failure> {
    let file = GraphFile::load(path).map_err(|e| fail(INPUT_ERROR, e.to_string()))?;
    let violations = validate_graph(&file.graph);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(fail(INVALID_GRAPH, format!("invalid moment graph:\n{}", lines.join("\n"))));
    }
    Ok(file)
}

fn warn_mod_p(file: &GraphFile, theory: &Theory) {
    if let Some(p) = theory.prime() {
        for w in mod_p_warnings(&file.graph, p) {
            eprintln!("warning: {w}");
        }
    }
}

fn cmd_fgl(args: &TheoryArgs, ell: Option<i64>) -> Result<String, Failure> {
    let theory = args.build(args.trunc.unwrap_or(DEFAULT_TRUNCATION))?;
    let fgl = theory.fgl().map_err(|e| fail(INPUT_ERROR, e.to_string()))?;
    let ell = ell.unwrap_or_else(|| theory.prime().map_or(2, |p| p as i64));
    let series = fgl.n_series(ell).map_err(|e| fail(INPUT_ERROR, e.to_string()))?;
    Ok(format!("theory {}\nF(x,y) = {}\n[{ell}]u = {}\n", theory.describe(), fgl.format(), series.format(&["u"])))
}

fn cmd_solve(path: &Path, args: &TheoryArgs, qmax: i64) -> Result<String, Failure> {
    let file = load_graph(path)?;
    if qmax < 0 {
        return Err(fail(INPUT_ERROR, "--qmax must be non-negative"));
    }
    let theory =
        args.build_auto(|t| required_truncation(&file.graph, t, qmax).map_err(|e| fail(INPUT_ERROR, e.to_string())))?;
    warn_mod_p(&file, &theory);
    let solution =
        solve_equivariant_cohomology(&file.graph, &theory, qmax).map_err(|e| fail(INPUT_ERROR, e.to_string()))?;
    let mut out = format!("theory {}\n", theory.describe());
    if theory.kind() != TheoryKind::Morava {
        out.push_str("model: conjectural\n");
    }
    out.push_str(&solution.report());
    Ok(out)
}

fn cmd_check_formality(path: &Path, args: &TheoryArgs, qmax: i64) -> Result<(String, bool), Failure> {
    let file = load_graph(path)?;
    let Some(betti) = file.betti.clone() else {
        return Err(fail(INPUT_ERROR, format!("{}: no [[betti]] block", path.display())));
    };
    if qmax < 0 {
        return Err(fail(INPUT_ERROR, "--qmax must be non-negative"));
    }
    let theory =
        args.build_auto(|t| required_truncation(&file.graph, t, qmax).map_err(|e| fail(INPUT_ERROR, e.to_string())))?;
    warn_mod_p(&file, &theory);
    let solution =
        solve_equivariant_cohomology(&file.graph, &theory, qmax).map_err(|e| fail(INPUT_ERROR, e.to_string()))?;
    let report = check_formality(&file.graph, &betti, &solution);
    let mut out = format!("theory {}\n", theory.describe());
    out.push_str(&report.format());
    out.push_str(if report.all_pass() { "formality PASS\n" } else { "formality FAIL\n" });
    Ok((out, report.all_pass()))
}

fn localization_failure(e: IntegrateError) -> Failure {
    fail(LOCALIZATION_FAILURE, e.to_string())
}

fn cmd_integrate(path: &Path, name: &str, args: &TheoryArgs, slope: Option<&[i64]>) -> Result<(String, bool), Failure> {
    let file = load_graph(path)?;
    if !file.has_class(name) {
        let known = file.class_names().join(", ");
        return Err(fail(INPUT_ERROR, format!("{}: no class named '{name}' (classes: {known})", path.display())));
    }
    let provisional = args.build(args.trunc.unwrap_or(DEFAULT_TRUNCATION))?;
    let slope = match slope {
        Some(s) if s.len() != file.graph.rank => {
            return Err(fail(
                INPUT_ERROR,
                format!("--slope has {} entries, torus_rank is {}", s.len(), file.graph.rank),
            ))
        }
        Some(s) => GenericSlope(s.to_vec()),
        None => find_generic_slope(&file.graph, &provisional).map_err(localization_failure)?,
    };
    // the class degree decides how much precision the constant term needs
    let degree = file.class(name, &provisional).map_err(|e| fail(INPUT_ERROR, e.to_string()))?.degree.unwrap_or(0);
    let need = integration_truncation(&file.graph, &provisional, &slope, degree).map_err(localization_failure)?;
    let theory = match args.trunc {
        Some(d) if d < need => {
            return Err(fail(
                LOCALIZATION_FAILURE,
                format!("--trunc {d} is too small for this class: need at least {need}"),
            ))
        }
        Some(_) => provisional,
        None => provisional.with_truncation(need).map_err(|e| fail(INPUT_ERROR, e.to_string()))?,
    };
    warn_mod_p(&file, &theory);
    let class = file.class(name, &theory).map_err(|e| fail(INPUT_ERROR, e.to_string()))?;
    let result = integrate(&file.graph, &theory, &class, &slope).map_err(localization_failure)?;

    let mut out = format!("theory {}\n", theory.describe());
    if result.rationalized {
        out.push_str("coefficients extended to the rationals\n");
    }
    out.push_str(&format!("class {name}"));
    match class.degree {
        Some(q) => out.push_str(&format!(" degree {q}\n")),
        None if class.restrictions.iter().all(|f| f.homogeneity() == Homogeneity::Zero) => out.push_str(" zero\n"),
        None => out.push_str(" inhomogeneous\n"),
    }
    out.push_str(&format!("slope {}\n", result.slope));
    for (v, eu) in result.euler.classes.iter().enumerate() {
        out.push_str(&format!("euler {} = {}\n", file.graph.vertices[v], eu.format(&["s"])));
    }
    for (v, term) in result.terms.iter().enumerate() {
        out.push_str(&format!("term {} = {}\n", file.graph.vertices[v], term.format("s")));
    }
    out.push_str(&format!("sum = {}\n", result.sum.format("s")));
    out.push_str(if result.polar_part_vanishes { "polar part vanishes\n" } else { "polar part NONZERO\n" });
    if let Some(value) = &result.integral {
        out.push_str(&format!("integral = {}\n", result.theory.ring().format_scalar(value)));
        if result.rationalized {
            let integral = result.integral_is_integer().unwrap_or(false);
            out.push_str(if integral { "integral is an integer\n" } else { "integral is not an integer\n" });
        }
    }
    Ok((out, result.polar_part_vanishes))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Fgl { theory, ell } => cmd_fgl(theory, *ell).map(|s| (s, ExitCode::SUCCESS)),
        Command::Solve { graph, theory, qmax } => cmd_solve(graph, theory, *qmax).map(|s| (s, ExitCode::SUCCESS)),
        Command::Integrate { graph, class, theory, slope } => cmd_integrate(graph, class, theory, slope.as_deref())
            .map(|(s, ok)| (s, if ok { ExitCode::SUCCESS } else { ExitCode::from(LOCALIZATION_FAILURE) })),
        Command::CheckFormality { graph, theory, qmax } => cmd_check_formality(graph, theory, *qmax)
            .map(|(s, ok)| (s, if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })),
    };
    match outcome {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
