//! Command-line front end.
//!
//! Exit codes: 0 stable matching found or check passed, 1 no stable
//! matching (or the checked matching blocks), 2 usage or parse error,
//! 3 the requested method does not apply, 4 internal failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssmc::degree2::solve_degree2;
use ssmc::generators::{gen_b2sat, gen_instance, GenParams};
use ssmc::oracle::{enumerate_matchings, DEFAULT_BUDGET};
use ssmc::preprocess::{critical_hospitals, preprocess};
use ssmc::reductions::{parse_b2sat, parse_envy, reduce_envyfree, reduce_sat};
use ssmc::separated::{satisfies_star, solve_separated};
use ssmc::stability::{blocking_edges, is_stable, parse_matching};
use ssmc::verify::{run, Mode, VerifyConfig};
use ssmc::{parse_instance, EdgeSet, Error, Instance, Matching, Outcome};

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_NONE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "ssmc", version, about = "Stable matchings with closed hospitals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a stable matching or report that none exists.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Edge budget for brute force.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// List the edges blocking a matching.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        matching: PathBuf,
    },
    /// Print the forbidden set, choice set, matching and critical hospitals.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build an instance from a formula or an envy-free matching problem.
    Reduce {
        #[command(subcommand)]
        kind: ReduceKind,
    },
    /// Generate a random instance or formula.
    Gen(GenArgs),
    /// Cross-check a solver against brute force on random inputs.
    Verify {
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ReduceKind {
    Sat {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Where to write the vertex map; defaults to `<output>.map`.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    Envy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    doctors: usize,
    #[arg(long, default_value_t = 5)]
    hospitals: usize,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    #[arg(long, default_value_t = 0.3)]
    tie_prob: f64,
    #[arg(long, default_value_t = 0.3)]
    closure_prob: f64,
    /// Doctors rank open hospitals strictly above closed ones.
    #[arg(long)]
    star: bool,
    /// Doctors list at most two hospitals.
    #[arg(long)]
    degree2: bool,
    /// Emit a (3,B2) formula with this many variables instead.
    #[arg(long)]
    b2sat: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Separated,
    Degree2,
    Brute,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            _ if e.is_internal() => EXIT_INTERNAL,
            Error::StarViolated(_) | Error::Degree(_) | Error::Budget { .. } => EXIT_PRECONDITION,
            _ => EXIT_USAGE,
        };
        Failure { code, message: format!("{}: {e}", e.code()) }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| usage(format!("cannot write output: {e}"))),
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    Ok(parse_instance(&read(path)?)?)
}

/// Runs the command line `args` (including the program name).
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_FOUND };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Solve { input, method, output, budget } => {
            let inst = load_instance(&input)?;
            let (used, outcome) = solve(&inst, method, budget)?;
            if let Outcome::Stable(m) = &outcome {
                if !is_stable(&inst, m) {
                    return Err(Error::Invariant("solver returned an unstable matching".into()).into());
                }
            }
            let mut text = String::new();
            text.push_str(if outcome.exists() { "status: stable\n" } else { "status: none\n" });
            text.push_str(&format!("method: {used}\n"));
            if let Outcome::Stable(m) = &outcome {
                text.push_str(&m.display(&inst).to_string());
            }
            emit(out, output.as_deref(), &text)?;
            Ok(if outcome.exists() { EXIT_FOUND } else { EXIT_NONE })
        }
        Command::Check { input, matching } => {
            let inst = load_instance(&input)?;
            let m = parse_matching(&inst, &read(&matching)?)?;
            let report = blocking_edges(&inst, &m);
            let flag = |weak: bool, strong: bool| match (weak, strong) {
                (_, true) => "strong",
                (true, false) => "weak",
                _ => "none",
            };
            let mut text = String::new();
            for r in &report {
                let edge = inst.edge(r.edge);
                text.push_str(&format!(
                    "block {} {} doctor={} hospital={}\n",
                    inst.doctor_name(edge.doctor),
                    inst.hospital_name(edge.hospital),
                    flag(r.weak_on_doctor, r.strong_on_doctor),
                    flag(r.weak_on_hospital, r.strong_on_hospital),
                ));
            }
            emit(out, None, &text)?;
            Ok(if report.is_empty() { EXIT_FOUND } else { EXIT_NONE })
        }
        Command::Preprocess { input, output } => {
            let inst = load_instance(&input)?;
            let res = preprocess(&inst);
            let critical = critical_hospitals(&inst, &res);
            let mut text = String::new();
            text.push_str(&edge_section(&inst, "R", &res.forbidden));
            text.push_str(&edge_section(&inst, "L", &res.choice));
            text.push_str(&edge_section(&inst, "mu", &res.matching.to_edge_set(&inst)));
            text.push_str("critical:");
            for h in &critical {
                text.push(' ');
                text.push_str(inst.hospital_name(*h));
            }
            text.push('\n');
            text.push_str(&format!(
                "rounds: {}\ninner iterations: {:?}\n",
                res.stats.rounds, res.stats.inner_iterations
            ));
            emit(out, output.as_deref(), &text)?;
            Ok(EXIT_FOUND)
        }
        Command::Reduce { kind: ReduceKind::Sat { cnf, output, map } } => {
            let formula = parse_b2sat(&read(&cnf)?)?;
            for t in formula.complementary_clauses() {
                let _ = writeln!(err, "warning: clause {t} contains a literal and its negation");
            }
            let (inst, mapping) = reduce_sat(&formula);
            emit(out, output.as_deref(), &inst.to_string())?;
            let map_path = map.or_else(|| output.as_ref().map(|p| {
                let mut s = p.clone().into_os_string();
                s.push(".map");
                PathBuf::from(s)
            }));
            if let Some(p) = map_path {
                emit(out, Some(&p), &mapping.to_string())?;
            }
            Ok(EXIT_FOUND)
        }
        Command::Reduce { kind: ReduceKind::Envy { input, output } } => {
            let envy = parse_envy(&read(&input)?)?;
            emit(out, output.as_deref(), &reduce_envyfree(&envy).to_string())?;
            Ok(EXIT_FOUND)
        }
        Command::Gen(args) => {
            let text = match args.b2sat {
                Some(n) => gen_b2sat(n, args.seed)?.to_string(),
                None => gen_instance(&GenParams {
                    seed: args.seed,
                    n_doctors: args.doctors,
                    n_hospitals: args.hospitals,
                    max_degree: args.max_degree,
                    edge_prob: args.edge_prob,
                    tie_prob: args.tie_prob,
                    closure_prob: args.closure_prob,
                    enforce_star: args.star,
                    enforce_degree2: args.degree2,
                })?
                .to_string(),
            };
            emit(out, args.output.as_deref(), &text)?;
            Ok(EXIT_FOUND)
        }
        Command::Verify { mode, trials, seed, budget } => {
            let mode: Mode = mode.parse().map_err(usage)?;
            let cfg = VerifyConfig { budget, ..VerifyConfig::new(trials, seed) };
            let report = run(mode, &cfg);
            emit(out, None, &report.to_string())?;
            Ok(if report.all_passed() { EXIT_FOUND } else { EXIT_INTERNAL })
        }
    }
}

fn edge_section(inst: &Instance, name: &str, set: &EdgeSet) -> String {
    let mut text = format!("{name}:\n");
    for e in set.iter() {
        let edge = inst.edge(e);
        text.push_str(&format!("{} {}\n", inst.doctor_name(edge.doctor), inst.hospital_name(edge.hospital)));
    }
    text
}

fn brute(inst: &Instance, budget: usize) -> Result<Outcome, Error> {
    let found = enumerate_matchings(inst, budget)?.find(|m: &Matching| is_stable(inst, m));
    Ok(found.map_or(Outcome::NoStable, Outcome::Stable))
}

fn solve(inst: &Instance, method: Method, budget: usize) -> Result<(&'static str, Outcome), Failure> {
    Ok(match method {
        Method::Separated => ("separated", solve_separated(inst)?),
        Method::Degree2 => ("degree2", solve_degree2(inst)?),
        Method::Brute => ("brute", brute(inst, budget)?),
        Method::Auto if satisfies_star(inst) => ("separated", solve_separated(inst)?),
        Method::Auto if inst.max_doctor_degree() <= 2 => ("degree2", solve_degree2(inst)?),
        Method::Auto if inst.edge_count() <= budget => ("brute", brute(inst, budget)?),
        Method::Auto => {
            return Err(Failure {
                code: EXIT_PRECONDITION,
                message: format!(
                    "no method applies: separation fails, some doctor lists more than two hospitals, and {} edges exceed the brute-force budget {budget}",
                    inst.edge_count()
                ),
            })
        }
    })
}
