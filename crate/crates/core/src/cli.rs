//! The `lyc` command-line front end.
//!
//! Exit codes: 0 accepted or true, 1 rejected or false, 2 unknown, 64 usage
//! error, 65 unreadable or malformed input, 69 domain over the size cap, 70
//! any other failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::automata::{accepts_bt, PrefixVerdict, TacAutomaton};
use crate::domains::{eval_closed, Model};
use crate::error::Error;
use crate::gfp::{gfp_check, GfpModel};
use crate::kmodel::{divergence_check, k_check, KModel};
use crate::reduction::{bohm_truncate, bohm_truncate_by_fuel, expand_bohm, oracle_for};
use crate::reflection::{legend, rbt_truncate, reflect_opt, reflect_with, ReflectOptions};
use crate::scheme::{scheme_to_lamy, Scheme};
use crate::syntax::{parse_program, parse_type, Signature, SimpleType, Term};
use crate::tree::LabeledTree;

pub const EXIT_ACCEPTED: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INPUT: i32 = 65;
pub const EXIT_TOO_LARGE: i32 = 69;
pub const EXIT_SOFTWARE: i32 = 70;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: Error },
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_INPUT,
            CliError::Input { source, .. } | CliError::Lib(source) => match source {
                Error::SpaceTooLarge { .. } => EXIT_TOO_LARGE,
                Error::Syntax { .. }
                | Error::UnknownConstant { .. }
                | Error::Type { .. }
                | Error::Signature(_)
                | Error::Scheme(_)
                | Error::Automaton(_)
                | Error::UnknownLabel(_)
                | Error::NotClosedBase(_)
                | Error::NotTreeSignature(_)
                | Error::ContainsLittleOmega => EXIT_INPUT,
                _ => EXIT_SOFTWARE,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "lyc",
    version,
    about = "Model checking of λY-terms against TAC automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide acceptance of the Böhm tree of each input by an automaton.
    Check(CheckArgs),
    /// Print a finite prefix of the Böhm tree.
    Bohm(BohmArgs),
    /// Print the Böhm tree prefix annotated with model values.
    Rbt(RbtArgs),
    /// Print the reflection of a term in a model.
    Reflect(ReflectArgs),
    /// Decide whether the Böhm tree is the single node Ω.
    Diverges(InputArgs),
    /// Print the value of a term in a model.
    Eval(EvalArgs),
    /// Print the elements and Hasse edges of a model domain.
    DumpDomain(DumpArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// The model K(Q, Q_Ω), exact for every automaton.
    K,
    /// The greatest fixpoint model, exact for Ω-blind automata.
    Gfp,
    /// The divergence model D; `check` bounds acceptance by Böhm tree prefixes.
    D,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TreeFormat {
    Sexpr,
    Indented,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Term file with a `main` binding.
    #[arg(value_name = "FILE")]
    file: Option<PathBuf>,
    /// Term file with a `main` binding.
    #[arg(long = "term", value_name = "FILE", conflicts_with = "file")]
    term: Option<PathBuf>,
    /// Recursion scheme, translated to a λY-term.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["file", "term"])]
    scheme: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AutArgs {
    /// Automaton file.
    #[arg(long, value_name = "FILE")]
    aut: PathBuf,
    /// Treat missing transitions as none instead of rejecting the file.
    #[arg(long)]
    total_default: bool,
    /// Largest domain that may be enumerated.
    #[arg(long, value_name = "N")]
    cap: Option<usize>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Term files, checked independently.
    #[arg(value_name = "FILE")]
    files: Vec<PathBuf>,
    /// Term file with a `main` binding; may be repeated.
    #[arg(long = "term", value_name = "FILE")]
    terms: Vec<PathBuf>,
    /// Recursion schemes; may be repeated.
    #[arg(long = "scheme", value_name = "FILE")]
    schemes: Vec<PathBuf>,
    #[command(flatten)]
    aut: AutArgs,
    #[arg(long, value_enum, default_value_t = Mode::K)]
    mode: Mode,
    /// Prefix depth for `--mode d` and for `--explain`.
    #[arg(long, value_name = "N", default_value_t = 8)]
    depth: usize,
    /// Print the model value of every Böhm tree node.
    #[arg(long)]
    explain: bool,
    /// Print the model domain at a type before the verdicts.
    #[arg(long, visible_alias = "dump-kdomain", value_name = "TYPE")]
    dump_domain: Option<String>,
    /// Number of inputs checked in parallel.
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct BohmArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_name = "N", default_value_t = 4)]
    depth: usize,
    /// Bound each head normalisation by N steps instead of deciding divergence.
    #[arg(long, value_name = "N")]
    fuel: Option<usize>,
    #[arg(long, value_enum, default_value_t = TreeFormat::Sexpr)]
    format: TreeFormat,
}

#[derive(Args, Debug)]
struct RbtArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    aut: AutArgs,
    #[arg(long, value_enum, default_value_t = Mode::K)]
    mode: Mode,
    #[arg(long, value_name = "N", default_value_t = 4)]
    depth: usize,
    #[arg(long, value_enum, default_value_t = TreeFormat::Sexpr)]
    format: TreeFormat,
}

#[derive(Args, Debug)]
struct ReflectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    aut: AutArgs,
    #[arg(long, value_enum, default_value_t = Mode::K)]
    mode: Mode,
    /// Emit Ω for subterms whose value denotes divergence.
    #[arg(long)]
    omega_shortcut: bool,
    /// Use the translation that drops cases on statically known arguments.
    #[arg(long)]
    optimized: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Automaton file; required unless `--mode d`.
    #[arg(long, value_name = "FILE")]
    aut: Option<PathBuf>,
    #[arg(long)]
    total_default: bool,
    #[arg(long, value_name = "N")]
    cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::K)]
    mode: Mode,
}

#[derive(Args, Debug)]
struct DumpArgs {
    /// A type such as `o -> o`.
    #[arg(value_name = "TYPE")]
    ty: String,
    /// Automaton file; required unless `--mode d`.
    #[arg(long, value_name = "FILE")]
    aut: Option<PathBuf>,
    #[arg(long)]
    total_default: bool,
    #[arg(long, value_name = "N")]
    cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::K)]
    mode: Mode,
}

/// Output of one command: text for stdout and stderr and the exit code.
struct Report {
    out: String,
    err: String,
    code: i32,
}

impl Report {
    fn new(code: i32) -> Self {
        Report {
            out: String::new(),
            err: String::new(),
            code,
        }
    }
}

/// Runs `lyc` on `args` (including the program name), printing to stdout and
/// stderr, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_ACCEPTED
            };
        }
    };
    let report = dispatch(cli.command).unwrap_or_else(|e| Report {
        out: String::new(),
        err: format!("error: {e}\n"),
        code: e.exit_code(),
    });
    print!("{}", report.out);
    eprint!("{}", report.err);
    report.code
}

fn dispatch(cmd: Command) -> CliResult<Report> {
    match cmd {
        Command::Check(a) => check(a),
        Command::Bohm(a) => bohm(a),
        Command::Rbt(a) => rbt(a),
        Command::Reflect(a) => reflect_cmd(a),
        Command::Diverges(a) => diverges(a),
        Command::Eval(a) => eval_cmd(a),
        Command::DumpDomain(a) => dump_domain(a),
    }
}

enum Source {
    Term(PathBuf),
    Scheme(PathBuf),
}

impl Source {
    fn path(&self) -> &Path {
        match self {
            Source::Term(p) | Source::Scheme(p) => p,
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a closed term together with its signature.
fn load(src: &Source) -> CliResult<(Signature, Term)> {
    let path = src.path();
    let text = read(path)?;
    let input = |source| CliError::Input {
        path: path.to_path_buf(),
        source,
    };
    match src {
        Source::Term(_) => {
            let prog = parse_program(&text).map_err(input)?;
            let main = prog.main.ok_or_else(|| {
                input(Error::Syntax {
                    line: 1,
                    col: 1,
                    msg: "no `main` binding".into(),
                })
            })?;
            Ok((prog.signature, main))
        }
        Source::Scheme(_) => {
            let s = Scheme::parse(&text).map_err(input)?;
            let t = scheme_to_lamy(&s).map_err(input)?;
            Ok((s.signature, t))
        }
    }
}

fn single_source(a: &InputArgs) -> CliResult<Source> {
    match (&a.file, &a.term, &a.scheme) {
        (Some(p), _, _) | (_, Some(p), _) => Ok(Source::Term(p.clone())),
        (_, _, Some(p)) => Ok(Source::Scheme(p.clone())),
        _ => Err(CliError::Usage(
            "no input: give a term file, --term FILE or --scheme FILE".into(),
        )),
    }
}

fn load_automaton(path: &Path, total_default: bool, sig: &Signature) -> CliResult<TacAutomaton> {
    let text = read(path)?;
    let input = |source| CliError::Input {
        path: path.to_path_buf(),
        source,
    };
    let mut aut = TacAutomaton::parse(&text, total_default).map_err(input)?;
    if total_default {
        aut.complete_for(sig);
    }
    aut.check_signature(sig).map_err(input)?;
    Ok(aut)
}

/// The model selected by `mode`. `t` supplies the tag sizes of the `D` model.
fn build_model(
    mode: Mode,
    aut: Option<&TacAutomaton>,
    cap: Option<usize>,
    t: Option<&Term>,
) -> CliResult<Box<dyn Model>> {
    let need = || CliError::Usage("this mode needs --aut FILE".into());
    Ok(match mode {
        Mode::K => {
            let m = KModel::new(aut.ok_or_else(need)?);
            Box::new(match cap {
                Some(c) => m.with_cap(c),
                None => m,
            })
        }
        Mode::Gfp => {
            let m = GfpModel::new(aut.ok_or_else(need)?);
            Box::new(match cap {
                Some(c) => m.with_cap(c),
                None => m,
            })
        }
        Mode::D => {
            let m = match t {
                Some(t) => oracle_for(t),
                None => crate::kmodel::DModel::new(),
            };
            Box::new(match cap {
                Some(c) => m.with_cap(c),
                None => m,
            })
        }
    })
}

fn render(tree: &LabeledTree, format: TreeFormat) -> String {
    match format {
        TreeFormat::Sexpr => format!("{tree}\n"),
        TreeFormat::Indented => tree.indented(),
    }
}

fn check(a: CheckArgs) -> CliResult<Report> {
    let mut sources: Vec<Source> = a
        .files
        .iter()
        .chain(&a.terms)
        .cloned()
        .map(Source::Term)
        .collect();
    sources.extend(a.schemes.iter().cloned().map(Source::Scheme));
    if sources.is_empty() {
        return Err(CliError::Usage(
            "no input: give term files, --term FILE or --scheme FILE".into(),
        ));
    }
    if a.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let mut report = Report::new(EXIT_ACCEPTED);
    if let Some(ty) = &a.dump_domain {
        let (sig, t) = load(&sources[0])?;
        let aut = load_automaton(&a.aut.aut, a.aut.total_default, &sig)?;
        report
            .out
            .push_str(&dump(a.mode, &aut, a.aut.cap, Some(&t), ty)?);
    }
    let labelled = sources.len() > 1;
    let results = run_parallel(&sources, a.jobs, |src| check_one(&a, src));
    for (src, r) in sources.iter().zip(results) {
        let r = r.unwrap_or_else(|e| Report {
            out: String::new(),
            err: format!("error: {e}\n"),
            code: e.exit_code(),
        });
        if labelled && !r.out.is_empty() {
            let _ = write!(report.out, "{}: ", src.path().display());
        }
        report.out.push_str(&r.out);
        report.err.push_str(&r.err);
        report.code = report.code.max(r.code);
    }
    Ok(report)
}

/// Applies `f` to every item on `jobs` threads; results keep the input order.
fn run_parallel<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut done: Vec<(usize, R)> = std::thread::scope(|s| {
        let workers: Vec<_> = (0..jobs.min(items.len()))
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= items.len() {
                            return out;
                        }
                        out.push((i, f(&items[i])));
                    }
                })
            })
            .collect();
        workers
            .into_iter()
            .flat_map(|w| w.join().expect("worker panicked"))
            .collect()
    });
    done.sort_by_key(|(i, _)| *i);
    done.into_iter().map(|(_, r)| r).collect()
}

fn verdict(accepted: bool) -> (&'static str, i32) {
    if accepted {
        ("accepted", EXIT_ACCEPTED)
    } else {
        ("rejected", EXIT_REJECTED)
    }
}

fn check_one(a: &CheckArgs, src: &Source) -> CliResult<Report> {
    let (sig, t) = load(src)?;
    let aut = load_automaton(&a.aut.aut, a.aut.total_default, &sig)?;
    let mut r = Report::new(EXIT_ACCEPTED);
    match a.mode {
        Mode::K => {
            let m = KModel::new(&aut);
            let m = match a.aut.cap {
                Some(c) => m.with_cap(c),
                None => m,
            };
            let c = k_check(&m, &t)?;
            let (word, code) = verdict(c.accepted);
            let _ = writeln!(r.out, "{word}: {}", c.rendered);
            r.code = code;
            if a.explain {
                r.out.push_str(&explain(&m, &t, a.depth)?);
            }
        }
        Mode::Gfp => {
            let m = GfpModel::new(&aut);
            let m = match a.aut.cap {
                Some(c) => m.with_cap(c),
                None => m,
            };
            let (c, insightful) = gfp_check(&m, &t)?;
            if insightful {
                r.err.push_str(
                    "warning: the automaton is not Ω-blind, so the GFP verdict may differ from acceptance; use --mode k\n",
                );
            }
            let (word, code) = verdict(c.accepted);
            let _ = writeln!(r.out, "{word}: {}", c.rendered);
            r.code = code;
            if a.explain {
                r.out.push_str(&explain(&m, &t, a.depth)?);
            }
        }
        Mode::D => {
            let (word, k, code) = match accepts_bt(&aut, &t, a.depth)? {
                PrefixVerdict::Accepted(k) => ("accepted", k, EXIT_ACCEPTED),
                PrefixVerdict::Rejected(k) => ("rejected", k, EXIT_REJECTED),
                PrefixVerdict::Unknown(k) => ("unknown", k, EXIT_UNKNOWN),
            };
            let _ = writeln!(r.out, "{word}: Böhm tree prefix of depth {k}");
            r.code = code;
            if a.explain {
                let d = oracle_for(&t);
                r.out.push_str(&explain(&d, &t, a.depth)?);
            }
        }
    }
    Ok(r)
}

/// One line per Böhm tree node: its address, head and model value.
fn explain(m: &dyn Model, t: &Term, depth: usize) -> CliResult<String> {
    let mut s = String::new();
    expand_bohm(t, depth, &mut |addr, sub| {
        let v = eval_closed(sub, m)?;
        let addr = if addr.is_empty() { "ε" } else { addr };
        let head = sub.spine().0.to_string();
        let _ = writeln!(s, "  {addr} {head} : {}", m.describe(&SimpleType::Base, &v));
        Ok(None)
    })?;
    Ok(s)
}

fn bohm(a: BohmArgs) -> CliResult<Report> {
    let (_, t) = load(&single_source(&a.input)?)?;
    let mut r = Report::new(EXIT_ACCEPTED);
    let tree = match a.fuel {
        Some(fuel) => {
            let (tree, committed) = bohm_truncate_by_fuel(&t, a.depth, fuel)?;
            if !committed {
                let _ = writeln!(
                    r.err,
                    "warning: some nodes ran out of fuel after {fuel} steps and are shown as Omega"
                );
            }
            tree
        }
        None => bohm_truncate(&t, a.depth)?,
    };
    r.out = render(&tree, a.format);
    Ok(r)
}

fn rbt(a: RbtArgs) -> CliResult<Report> {
    let (sig, t) = load(&single_source(&a.input)?)?;
    let aut = load_automaton(&a.aut.aut, a.aut.total_default, &sig)?;
    let m = build_model(a.mode, Some(&aut), a.aut.cap, Some(&t))?;
    let tree = rbt_truncate(m.as_ref(), &t, a.depth)?;
    let mut r = Report::new(EXIT_ACCEPTED);
    r.out = render(&tree, a.format);
    r.out.push_str(&legend(m.as_ref(), &Default::default())?);
    Ok(r)
}

fn reflect_cmd(a: ReflectArgs) -> CliResult<Report> {
    let (sig, t) = load(&single_source(&a.input)?)?;
    let aut = load_automaton(&a.aut.aut, a.aut.total_default, &sig)?;
    let m = build_model(a.mode, Some(&aut), a.aut.cap, Some(&t))?;
    if a.omega_shortcut && !m.observes_divergence() {
        return Err(CliError::Usage(format!(
            "--omega-shortcut needs a model that observes divergence, not {}",
            m.name()
        )));
    }
    let opts = ReflectOptions {
        omega_shortcut: a.omega_shortcut,
    };
    let refl = if a.optimized {
        reflect_opt(m.as_ref(), &t, &[], &[], opts)?
    } else {
        reflect_with(m.as_ref(), &t, &[], opts)?
    };
    let mut r = Report::new(EXIT_ACCEPTED);
    let _ = writeln!(r.out, "{}", refl.term);
    r.out.push_str(&legend(m.as_ref(), &refl.tags)?);
    Ok(r)
}

fn diverges(a: InputArgs) -> CliResult<Report> {
    let (_, t) = load(&single_source(&a)?)?;
    let d = divergence_check(&t)?;
    let mut r = Report::new(if d { EXIT_ACCEPTED } else { EXIT_REJECTED });
    let _ = writeln!(r.out, "{d}");
    Ok(r)
}

fn eval_cmd(a: EvalArgs) -> CliResult<Report> {
    let (sig, t) = load(&single_source(&a.input)?)?;
    let aut = match &a.aut {
        Some(p) => Some(load_automaton(p, a.total_default, &sig)?),
        None => None,
    };
    let m = build_model(a.mode, aut.as_ref(), a.cap, Some(&t))?;
    let ty = t.type_of()?;
    let v = eval_closed(&t, m.as_ref())?;
    let mut r = Report::new(EXIT_ACCEPTED);
    let _ = writeln!(r.out, "{}", m.describe(&ty, &v));
    Ok(r)
}

fn dump(
    mode: Mode,
    aut: &TacAutomaton,
    cap: Option<usize>,
    t: Option<&Term>,
    ty: &str,
) -> CliResult<String> {
    let ty = parse_type(ty).map_err(|e| CliError::Usage(format!("bad type `{ty}`: {e}")))?;
    dump_model(mode, Some(aut), cap, t, &ty)
}

fn dump_model(
    mode: Mode,
    aut: Option<&TacAutomaton>,
    cap: Option<usize>,
    t: Option<&Term>,
    ty: &SimpleType,
) -> CliResult<String> {
    if mode == Mode::K {
        let aut = aut.ok_or_else(|| CliError::Usage("this mode needs --aut FILE".into()))?;
        let m = KModel::new(aut);
        let m = match cap {
            Some(c) => m.with_cap(c),
            None => m,
        };
        return Ok(m.dump(ty)?);
    }
    let m = build_model(mode, aut, cap, t)?;
    let dom = m.domain(ty)?;
    Ok(dom.dump(&|i| m.describe(ty, dom.get(i)))?)
}

fn dump_domain(a: DumpArgs) -> CliResult<Report> {
    let ty = parse_type(&a.ty).map_err(|e| CliError::Usage(format!("bad type `{}`: {e}", a.ty)))?;
    let aut = match &a.aut {
        Some(p) => {
            let text = read(p)?;
            let aut =
                TacAutomaton::parse(&text, a.total_default).map_err(|source| CliError::Input {
                    path: p.clone(),
                    source,
                })?;
            Some(aut)
        }
        None => None,
    };
    let mut r = Report::new(EXIT_ACCEPTED);
    r.out = dump_model(a.mode, aut.as_ref(), a.cap, None, &ty)?;
    Ok(r)
}
