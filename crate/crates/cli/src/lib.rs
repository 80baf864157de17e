//! Command dispatch for the `hyperset` binary.
//!
//! Every command funnels through [`run`], which returns the process exit
//! code: 0 for success (and for a true `eq`), 1 for a false `eq`, 2 for
//! parse, validation, usage, and IO errors, 3 for resource-limit errors.
//! Diagnostics go to stderr as `file:line:col: message` where a position
//! exists; results go to stdout and are byte-for-byte deterministic.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use hyperset::{
    decorate, eval_expr, from_dot, from_dot_with_names, parse_system, print_canonical,
    print_element, quotient, to_dot, DotError, DslError, Element, GraphError, HSet, Limits,
};

const EXIT_UNEQUAL: u8 = 1;
const EXIT_USER: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hyperset",
    version,
    about = "Solve systems of set equations over hypersets, compare and analyze the results"
)]
struct Cli {
    /// Cap on how many graph nodes any single operation may build.
    #[arg(long, global = true, env = "HYPERSET_NODE_BUDGET")]
    node_budget: Option<usize>,
    /// Cap on the cardinality a power-set argument may have.
    #[arg(long, global = true)]
    power_set_bound: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    /// Canonical set expression.
    #[default]
    Canonical,
    /// One JSON object: {"canon": expression, "code": canonical code hex}.
    Json,
    /// The set's picture as a DOT graph.
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the equation system in FILE and print its bindings.
    Solve {
        file: PathBuf,
        /// Print only this binding.
        #[arg(long)]
        var: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Compare two sets; exits 0 when equal, 1 when different.
    Eq {
        /// Two set expressions (omit when comparing files).
        exprs: Vec<String>,
        /// Solve these two system files and compare bindings instead.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        files: Option<Vec<PathBuf>>,
        /// Binding to pick from each file; twice for different names,
        /// omitted when each file has a single binding.
        #[arg(long)]
        var: Vec<String>,
    },
    /// Transitive closure of a set expression.
    Tc {
        expr: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// The atoms a set expression is built from.
    Support { expr: String },
    /// Whether a set expression is well-founded; prints true or false.
    Wf { expr: String },
    /// Canonical form of a set expression.
    Canon {
        expr: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Write a set expression's picture as a DOT graph.
    Picture {
        expr: String,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print what every node of a DOT graph stands for.
    Decorate { file: PathBuf },
    /// Collapse a DOT graph to its smallest equivalent form.
    Minimize {
        file: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a system file without solving it.
    Check { file: PathBuf },
}

struct Failure {
    message: String,
    code: u8,
}

type CmdResult = Result<u8, Failure>;

fn fail(message: impl Into<String>, code: u8) -> Failure {
    Failure {
        message: message.into(),
        code,
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display()), EXIT_USER))
}

fn write_output(target: Option<&Path>, text: &str) -> Result<(), Failure> {
    match target {
        Some(path) => {
            fs::write(path, text).map_err(|e| fail(format!("{}: {e}", path.display()), EXIT_USER))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Positioned errors already start with "line:col:", so the file name slots
/// in front with a bare colon.
fn dsl_failure(path: Option<&Path>, e: DslError) -> Failure {
    let code = if e.is_resource_limit() {
        EXIT_LIMIT
    } else {
        EXIT_USER
    };
    match path {
        Some(p) => fail(format!("{}:{e}", p.display()), code),
        None => fail(format!("<expr>:{e}"), code),
    }
}

fn dot_failure(path: &Path, e: DotError) -> Failure {
    let code = match &e {
        DotError::Graph(GraphError::NodeBudget { .. }) => EXIT_LIMIT,
        _ => EXIT_USER,
    };
    fail(format!("{}:{e}", path.display()), code)
}

fn eval_arg(src: &str) -> Result<Element, Failure> {
    eval_expr(src).map_err(|e| dsl_failure(None, e))
}

fn eval_arg_set(src: &str) -> Result<HSet, Failure> {
    match eval_arg(src)? {
        Element::Set(s) => Ok(s),
        Element::Atom(a) => Err(fail(
            format!("<expr>: {a} is an atom, and this command needs a set"),
            EXIT_USER,
        )),
    }
}

fn render(s: &HSet, format: Format) -> String {
    match format {
        Format::Canonical => format!("{}\n", print_canonical(s)),
        Format::Json => format!(
            "{}\n",
            serde_json::json!({
                "canon": print_canonical(s),
                "code": s.code().to_hex(),
            })
        ),
        Format::Dot => to_dot(s.picture()),
    }
}

pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version surface as clap "errors" that exit cleanly.
            let code = if e.use_stderr() { EXIT_USER } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut limits = Limits::default();
    if let Some(n) = cli.node_budget {
        if n == 0 {
            eprintln!("the node budget must be positive");
            return EXIT_USER;
        }
        limits.node_budget = n;
    }
    if let Some(k) = cli.power_set_bound {
        if k == 0 {
            eprintln!("the power-set bound must be positive");
            return EXIT_USER;
        }
        limits.power_set_bound = k;
    }
    hyperset::limits::install(limits);
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.message);
            e.code
        }
    }
}

fn dispatch(cmd: Cmd) -> CmdResult {
    match cmd {
        Cmd::Solve { file, var, format } => cmd_solve(&file, var.as_deref(), format),
        Cmd::Eq { exprs, files, var } => cmd_eq(&exprs, files.as_deref(), &var),
        Cmd::Tc { expr, format } => {
            let closure = match eval_arg(&expr)? {
                Element::Set(s) => s.tc().map_err(value_failure)?,
                // An atom has no members, so nothing accumulates.
                Element::Atom(_) => HSet::empty(),
            };
            print!("{}", render(&closure, format));
            Ok(0)
        }
        Cmd::Support { expr } => {
            let atoms = match eval_arg(&expr)? {
                Element::Set(s) => s.support(),
                Element::Atom(a) => vec![a],
            };
            let members: Vec<Element> = atoms.into_iter().map(Element::Atom).collect();
            let s = HSet::set_of(&members).map_err(value_failure)?;
            println!("{}", print_canonical(&s));
            Ok(0)
        }
        Cmd::Wf { expr } => {
            println!("{}", eval_arg(&expr)?.is_well_founded());
            Ok(0)
        }
        Cmd::Canon { expr, format } => match eval_arg(&expr)? {
            Element::Set(s) => {
                print!("{}", render(&s, format));
                Ok(0)
            }
            Element::Atom(a) => match format {
                Format::Canonical => {
                    println!("{a}");
                    Ok(0)
                }
                Format::Json => {
                    println!(
                        "{}",
                        serde_json::json!({ "canon": a.name().as_ref(), "code": null })
                    );
                    Ok(0)
                }
                Format::Dot => Err(fail(
                    format!("<expr>: {a} is an atom and has no picture"),
                    EXIT_USER,
                )),
            },
        },
        Cmd::Picture { expr, output } => {
            let s = eval_arg_set(&expr)?;
            write_output(output.as_deref(), &to_dot(s.picture()))?;
            Ok(0)
        }
        Cmd::Decorate { file } => cmd_decorate(&file),
        Cmd::Minimize { file, output } => {
            let src = read_file(&file)?;
            let g = from_dot(&src).map_err(|e| dot_failure(&file, e))?;
            write_output(output.as_deref(), &to_dot(&quotient(&g)))?;
            Ok(0)
        }
        Cmd::Check { file } => cmd_check(&file),
    }
}

fn value_failure(e: hyperset::SetError) -> Failure {
    let code = if e.is_resource_limit() {
        EXIT_LIMIT
    } else {
        EXIT_USER
    };
    fail(format!("<expr>: {e}"), code)
}

fn cmd_solve(file: &Path, var: Option<&str>, format: Format) -> CmdResult {
    let src = read_file(file)?;
    let solution = parse_system(&src)
        .and_then(|ast| ast.to_system())
        .and_then(|sys| Ok(sys.solve()?))
        .map_err(|e| dsl_failure(Some(file), e))?;
    if let Some(name) = var {
        let value = solution.get(name).ok_or_else(|| {
            fail(
                format!("{}: no binding named {name:?}", file.display()),
                EXIT_USER,
            )
        })?;
        match format {
            Format::Canonical => println!("{name} = {}", print_canonical(value)),
            Format::Json | Format::Dot => print!("{}", render(value, format)),
        }
        return Ok(0);
    }
    match format {
        Format::Canonical => {
            for (x, value) in solution.iter() {
                println!("{x} = {}", print_canonical(value));
            }
        }
        Format::Json => {
            let mut map = serde_json::Map::new();
            for (x, value) in solution.iter() {
                map.insert(
                    x.name().to_string(),
                    serde_json::json!({
                        "canon": print_canonical(value),
                        "code": value.code().to_hex(),
                    }),
                );
            }
            println!("{}", serde_json::Value::Object(map));
        }
        Format::Dot => {
            return Err(fail(
                "dot output prints one graph, so pick a binding with --var",
                EXIT_USER,
            ))
        }
    }
    Ok(0)
}

fn cmd_eq(exprs: &[String], files: Option<&[PathBuf]>, vars: &[String]) -> CmdResult {
    let (a, b) = match files {
        None => {
            if exprs.len() != 2 {
                return Err(fail(
                    "eq compares exactly two expressions (or two files via --files)",
                    EXIT_USER,
                ));
            }
            if !vars.is_empty() {
                return Err(fail("--var only applies to --files", EXIT_USER));
            }
            (eval_arg(&exprs[0])?, eval_arg(&exprs[1])?)
        }
        Some(files) => {
            if !exprs.is_empty() {
                return Err(fail(
                    "give either two expressions or --files, not both",
                    EXIT_USER,
                ));
            }
            let [fa, fb] = files else {
                return Err(fail("--files takes exactly two paths", EXIT_USER));
            };
            let (va, vb) = match vars {
                [] => (None, None),
                [x] => (Some(x.as_str()), Some(x.as_str())),
                [x, y] => (Some(x.as_str()), Some(y.as_str())),
                _ => return Err(fail("--var may be given at most twice", EXIT_USER)),
            };
            (
                Element::Set(solved_binding(fa, va)?),
                Element::Set(solved_binding(fb, vb)?),
            )
        }
    };
    Ok(if a == b { 0 } else { EXIT_UNEQUAL })
}

/// Solves `file` and picks the named binding, or its only binding when no
/// name is given.
fn solved_binding(file: &Path, var: Option<&str>) -> Result<HSet, Failure> {
    let src = read_file(file)?;
    let ast = parse_system(&src).map_err(|e| dsl_failure(Some(file), e))?;
    let name = match var {
        Some(name) => name.to_string(),
        None => {
            let mut names = ast.binding_names();
            let first = names.next().expect("a system has at least one binding");
            if names.next().is_some() {
                return Err(fail(
                    format!(
                        "{}: several bindings, pick one with --var",
                        file.display()
                    ),
                    EXIT_USER,
                ));
            }
            first.to_string()
        }
    };
    let solution = ast
        .to_system()
        .and_then(|sys| Ok(sys.solve()?))
        .map_err(|e| dsl_failure(Some(file), e))?;
    solution.get(&name).cloned().ok_or_else(|| {
        fail(
            format!("{}: no binding named {name:?}", file.display()),
            EXIT_USER,
        )
    })
}

fn cmd_decorate(file: &Path) -> CmdResult {
    let src = read_file(file)?;
    let (g, names) = from_dot_with_names(&src).map_err(|e| dot_failure(file, e))?;
    let values = decorate(&g);
    for (v, value) in values.iter().enumerate() {
        println!("{} = {}", names[v], print_element(value));
    }
    println!("root: {}", names[g.root().index()]);
    Ok(0)
}

fn cmd_check(file: &Path) -> CmdResult {
    let src = read_file(file)?;
    let ast = parse_system(&src).map_err(|e| dsl_failure(Some(file), e))?;
    let sys = ast.to_system().map_err(|e| dsl_failure(Some(file), e))?;
    println!(
        "form: {}",
        if ast.is_flat() { "flat" } else { "generalized" }
    );
    println!("bindings: {}", ast.binding_names().count());
    println!("atoms: {}", ast.atom_names().count());
    println!(
        "well-founded: {}",
        if sys.is_well_founded() { "yes" } else { "no" }
    );
    Ok(0)
}
