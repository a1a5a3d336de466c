//! `popbranch` — command-line front end for popular branchings in
//! preference-labeled digraphs.
//!
//! Conventions:
//! - stdout carries exactly one machine-readable JSON line per successful run
//!   (including negative verdicts); all prose — logs and error messages — goes
//!   to stderr. Set `POPBRANCH_LOG=info` (or `debug`) for progress logs.
//! - `-o FILE` additionally writes the result pretty-printed to the file;
//!   `emit-lp` instead writes the LP text there and reports it on stdout.
//! - Exit codes: 0 success; 1 negative verdict (no popular branching exists /
//!   the given branching is not popular); 2 usage error; 3 invalid input;
//!   4 budget or iteration limit exhausted.

use std::collections::BTreeSet;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use popbranch::factor::FactorError;
use popbranch::generators::{
    complete_top_instance,
    hampath::reduce_hampath,
    random_instance,
    sat::reduce_3sat,
    threedm::{reduce_3dm, ThreeDmInput},
    tight_factor_instance, PrefModel,
};
use popbranch::instance::{
    Arborescence, Branching, Instance, InstanceData, RootError, RootedInstance,
};
use popbranch::mixed::{MixedError, DEFAULT_MIXED_BUDGET};
use popbranch::oracle::DEFAULT_ENUMERATION_BUDGET;
use popbranch::polytope::{emit_extended_lp, emit_face_lp, lp_row_count, DEFAULT_FACE_CUTOFF};
use popbranch::popularity::DualCertificate;
use popbranch::report;

const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(
    name = "popbranch",
    version,
    about = "Popular branchings in preference-labeled digraphs",
    after_help = "Results are printed to stdout as a single JSON line; logs go to stderr \
                  (POPBRANCH_LOG=error|info|debug)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find a popular branching and a dual certificate, or report none exists
    Solve(InstanceArgs),
    /// Check a given branching for popularity (and its certificate, if present)
    Verify(BranchingArgs),
    /// Measure the unpopularity margin of a given branching
    Margin(BranchingArgs),
    /// Construct a branching of minimum unpopularity margin (weak rankings)
    #[command(name = "minmargin")]
    MinMargin(InstanceArgs),
    /// Construct a branching with unpopularity factor at most log n (strict rankings)
    Factor(InstanceArgs),
    /// Measure the exact unpopularity factor of a given branching
    #[command(name = "factor-of")]
    FactorOf(BranchingArgs),
    /// Find a popular mixed branching (a lottery over branchings)
    Mixed {
        #[command(flatten)]
        io: InstanceArgs,
        /// Refuse instances with more than this many nodes
        #[arg(long, default_value_t = DEFAULT_MIXED_BUDGET)]
        budget: usize,
    },
    /// Exhaustively enumerate branchings: ground truth for small instances
    Oracle {
        #[command(flatten)]
        io: InstanceArgs,
        /// Give up beyond this many branchings
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u64,
        /// Worker threads for the pairwise vote tally
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write an instance family member as instance JSON
    Gen {
        #[command(subcommand)]
        family: GenCmd,
    },
    /// Reduce a decision problem to a preference-labeled digraph
    Reduce {
        #[command(subcommand)]
        problem: ReduceCmd,
    },
    /// Write a linear-programming formulation of the popular-branching face
    #[command(name = "emit-lp")]
    EmitLp {
        /// Instance JSON file ('-' or omitted: stdin)
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Treat this existing in-degree-0 node as the root instead of adding one
        #[arg(long)]
        root: Option<String>,
        /// Write the LP text to this file (stdout reports the row count)
        #[arg(short, long)]
        output: PathBuf,
        /// Which formulation to emit
        #[arg(long, value_enum)]
        form: LpForm,
        /// Node limit for the subset-enumerating face formulation
        #[arg(long, default_value_t = DEFAULT_FACE_CUTOFF)]
        cutoff: usize,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON file ('-' or omitted: stdin)
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Also write the result JSON, pretty-printed, to this file
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Treat this existing in-degree-0 node as the root instead of adding one
    #[arg(long)]
    root: Option<String>,
}

#[derive(Args)]
struct BranchingArgs {
    #[command(flatten)]
    io: InstanceArgs,
    /// Branching JSON file {"branching":[edge ids]} ('-': stdin)
    #[arg(short, long)]
    branching: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LpForm {
    /// Subtour rows for every node subset plus the tight-set equalities
    Face,
    /// Flow-based extended formulation, polynomially many rows
    Extended,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Strict,
    Weak,
    Partial,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Random instance with the chosen preference model
    Random {
        /// Number of nodes
        #[arg(long)]
        n: usize,
        /// Number of edges
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Strict)]
        model: ModelArg,
        /// Largest tie class size (weak model)
        #[arg(long, default_value_t = 3)]
        max_ties: u32,
        /// Probability of keeping each dominance pair (partial model)
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the instance, pretty-printed, to this file
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Doubling family on 2^k nodes whose best unpopularity factor is log n
    TightFactor {
        #[arg(long)]
        k: u32,
        /// Also write the instance, pretty-printed, to this file
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// All nodes mutually top-choice: every spanning arborescence is popular
    CompleteTop {
        #[arg(long)]
        n: usize,
        /// Also write the instance, pretty-printed, to this file
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReduceCmd {
    /// DIMACS CNF (widths 2-3, each variable in at most 3 clauses) to an
    /// instance whose popular branchings with few descendants encode models
    Sat {
        /// Formula file in DIMACS CNF text format ('-' or omitted: stdin)
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Also write the instance, pretty-printed, to this file
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rooted digraph (instance JSON, preferences ignored) to an instance whose
    /// low-out-degree popular branchings encode Hamiltonian paths
    Hampath {
        /// Digraph file ('-' or omitted: stdin)
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Also write the instance, pretty-printed, to this file
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Three-dimensional matching input to an instance whose minimum
    /// unpopularity margin is 2|X| exactly when a perfect matching exists
    #[command(name = "3dm")]
    ThreeDm {
        /// JSON file {"x":[..],"y":[..],"z":[..],"triples":[[x,y,z],..]}
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Also write the instance, pretty-printed, to this file
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure {
        code,
        msg: msg.into(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("POPBRANCH_LOG", "error"),
    )
    .format_timestamp(None)
    .init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Cmd) -> Result<u8, Failure> {
    match cmd {
        Cmd::Solve(io) => cmd_solve(io),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Margin(a) => cmd_margin(a),
        Cmd::MinMargin(io) => cmd_minmargin(io),
        Cmd::Factor(io) => cmd_factor(io),
        Cmd::FactorOf(a) => cmd_factor_of(a),
        Cmd::Mixed { io, budget } => cmd_mixed(io, budget),
        Cmd::Oracle { io, budget, jobs } => cmd_oracle(io, budget, jobs),
        Cmd::Gen { family } => cmd_gen(family),
        Cmd::Reduce { problem } => cmd_reduce(problem),
        Cmd::EmitLp {
            input,
            root,
            output,
            form,
            cutoff,
        } => cmd_emit_lp(input.as_deref(), root.as_deref(), &output, form, cutoff),
    }
}

// ---------------------------------------------------------------- plumbing

fn read_text(path: Option<&Path>, what: &str) -> Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p)
            .map_err(|e| fail(EXIT_INPUT, format!("cannot read {what} '{}': {e}", p.display()))),
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| fail(EXIT_INPUT, format!("cannot read {what} from stdin: {e}")))?;
            Ok(text)
        }
    }
}

fn load_instance(input: Option<&Path>) -> Result<Instance, Failure> {
    let text = read_text(input, "instance")?;
    let inst = Instance::from_json(&text)
        .map_err(|e| fail(EXIT_INPUT, format!("invalid instance: {e}")))?;
    info!(
        "instance: {} nodes, {} edges, {:?} preferences",
        inst.n_nodes(),
        inst.n_edges(),
        inst.instance_class()
    );
    Ok(inst)
}

fn load_rooted(io: &InstanceArgs) -> Result<RootedInstance, Failure> {
    load_rooted_from(io.input.as_deref(), io.root.as_deref())
}

fn load_rooted_from(
    input: Option<&Path>,
    root: Option<&str>,
) -> Result<RootedInstance, Failure> {
    let inst = load_instance(input)?;
    match root {
        Some(name) => RootedInstance::adopt_root(inst, name)
            .map_err(|e| fail(EXIT_INPUT, e.to_string())),
        None => inst.augment_root().map_err(|e| match e {
            RootError::IdClash => fail(
                EXIT_INPUT,
                "instance already has a node 'r'; pass --root r to use it as the root",
            ),
            other => fail(EXIT_INPUT, other.to_string()),
        }),
    }
}

/// On-disk branching document. `solve` output parses directly, so
/// `popbranch solve -i g.json | popbranch verify -i g.json -b -` round-trips.
#[derive(serde::Deserialize)]
struct BranchingFile {
    branching: Vec<String>,
    #[serde(default)]
    certificate: Option<Vec<Vec<String>>>,
}

fn load_branching(
    rooted: &RootedInstance,
    path: &Path,
) -> Result<(Arborescence, Option<DualCertificate>), Failure> {
    let text = read_text(Some(path), "branching")?;
    let file: BranchingFile = serde_json::from_str(&text)
        .map_err(|e| fail(EXIT_INPUT, format!("invalid branching document: {e}")))?;
    let b = Branching::from_edges(rooted.instance(), file.branching.iter())
        .map_err(|e| fail(EXIT_INPUT, format!("invalid branching: {e}")))?;
    let arb = rooted
        .arborify(&b)
        .map_err(|e| fail(EXIT_INPUT, format!("invalid branching: {e}")))?;
    let cert = file
        .certificate
        .map(|sets| sets.into_iter().map(BTreeSet::from_iter).collect());
    Ok((arb, cert))
}

/// Print the result JSON to stdout (compact, one line); with `-o`, also write
/// it pretty-printed to the file.
fn finish(value: serde_json::Value, output: Option<&Path>) -> Result<(), Failure> {
    if let Some(p) = output {
        let mut pretty = serde_json::to_string_pretty(&value).expect("result serializes");
        pretty.push('\n');
        fs::write(p, pretty)
            .map_err(|e| fail(EXIT_INPUT, format!("cannot write '{}': {e}", p.display())))?;
    }
    println!("{value}");
    Ok(())
}

// ---------------------------------------------------------------- commands

fn cmd_solve(io: InstanceArgs) -> Result<u8, Failure> {
    let rooted = load_rooted(&io)?;
    let t0 = Instant::now();
    let (value, popular) = report::solve(&rooted);
    info!("solved in {:.1?}", t0.elapsed());
    finish(value, io.output.as_deref())?;
    Ok(if popular { 0 } else { EXIT_NEGATIVE })
}

fn cmd_verify(a: BranchingArgs) -> Result<u8, Failure> {
    let rooted = load_rooted(&a.io)?;
    let (arb, cert) = load_branching(&rooted, &a.branching)?;
    let (value, ok) = report::verify(&rooted, &arb, cert.as_ref());
    finish(value, a.io.output.as_deref())?;
    Ok(if ok { 0 } else { EXIT_NEGATIVE })
}

fn cmd_margin(a: BranchingArgs) -> Result<u8, Failure> {
    let rooted = load_rooted(&a.io)?;
    let (arb, _) = load_branching(&rooted, &a.branching)?;
    finish(report::margin(&rooted, &arb), a.io.output.as_deref())?;
    Ok(0)
}

fn cmd_minmargin(io: InstanceArgs) -> Result<u8, Failure> {
    let rooted = load_rooted(&io)?;
    let value = report::minmargin(&rooted).map_err(|e| fail(EXIT_INPUT, e.to_string()))?;
    finish(value, io.output.as_deref())?;
    Ok(0)
}

fn cmd_factor(io: InstanceArgs) -> Result<u8, Failure> {
    let rooted = load_rooted(&io)?;
    let value = report::factor(&rooted).map_err(|e| match e {
        FactorError::DidNotConverge => fail(EXIT_BUDGET, e.to_string()),
        other => fail(EXIT_INPUT, other.to_string()),
    })?;
    finish(value, io.output.as_deref())?;
    Ok(0)
}

fn cmd_factor_of(a: BranchingArgs) -> Result<u8, Failure> {
    let rooted = load_rooted(&a.io)?;
    let (arb, _) = load_branching(&rooted, &a.branching)?;
    finish(report::factor_of(&rooted, &arb), a.io.output.as_deref())?;
    Ok(0)
}

fn cmd_mixed(io: InstanceArgs, budget: usize) -> Result<u8, Failure> {
    let rooted = load_rooted(&io)?;
    let t0 = Instant::now();
    let value = report::mixed(&rooted, budget).map_err(|e| match e {
        MixedError::BudgetExceeded { .. }
        | MixedError::SupportTooLarge { .. }
        | MixedError::DidNotConverge(_) => fail(EXIT_BUDGET, e.to_string()),
        other => fail(EXIT_INPUT, other.to_string()),
    })?;
    info!("mixed solve finished in {:.1?}", t0.elapsed());
    finish(value, io.output.as_deref())?;
    Ok(0)
}

fn cmd_oracle(io: InstanceArgs, budget: u64, jobs: usize) -> Result<u8, Failure> {
    let inst = load_instance(io.input.as_deref())?;
    let t0 = Instant::now();
    let value =
        report::oracle(&inst, budget, jobs).map_err(|e| fail(EXIT_BUDGET, e.to_string()))?;
    info!(
        "tallied {} branchings in {:.1?} on {jobs} thread(s)",
        value["branchings"],
        t0.elapsed()
    );
    finish(value, io.output.as_deref())?;
    Ok(0)
}

fn cmd_gen(family: GenCmd) -> Result<u8, Failure> {
    let (inst, output) = match family {
        GenCmd::Random {
            n,
            m,
            model,
            max_ties,
            density,
            seed,
            output,
        } => {
            let model = match model {
                ModelArg::Strict => PrefModel::Strict,
                ModelArg::Weak => PrefModel::Weak { max_ties },
                ModelArg::Partial => PrefModel::Partial { density },
            };
            (
                random_instance(n, m, model, seed)
                    .map_err(|e| fail(EXIT_INPUT, e.to_string()))?,
                output,
            )
        }
        GenCmd::TightFactor { k, output } => (
            tight_factor_instance(k).map_err(|e| fail(EXIT_INPUT, e.to_string()))?,
            output,
        ),
        GenCmd::CompleteTop { n, output } => (
            complete_top_instance(n).map_err(|e| fail(EXIT_INPUT, e.to_string()))?,
            output,
        ),
    };
    emit_instance(&inst, output.as_deref())
}

fn emit_instance(inst: &Instance, output: Option<&Path>) -> Result<u8, Failure> {
    info!("instance: {} nodes, {} edges", inst.n_nodes(), inst.n_edges());
    if let Some(p) = output {
        let mut pretty = inst.to_json_pretty();
        pretty.push('\n');
        fs::write(p, pretty)
            .map_err(|e| fail(EXIT_INPUT, format!("cannot write '{}': {e}", p.display())))?;
    }
    println!("{}", inst.to_json());
    Ok(0)
}

fn cmd_reduce(problem: ReduceCmd) -> Result<u8, Failure> {
    match problem {
        ReduceCmd::Sat { input, output } => {
            let text = read_text(input.as_deref(), "formula")?;
            let red = reduce_3sat(&text).map_err(|e| fail(EXIT_INPUT, e.to_string()))?;
            info!(
                "{} variables, {} clauses: decide by searching for a popular branching with <= 9 descendants per node",
                red.n_vars,
                red.clauses.len()
            );
            emit_instance(&red.instance, output.as_deref())
        }
        ReduceCmd::Hampath { input, output } => {
            let text = read_text(input.as_deref(), "digraph")?;
            let data: InstanceData = serde_json::from_str(&text)
                .map_err(|e| fail(EXIT_INPUT, format!("invalid digraph document: {e}")))?;
            let red = reduce_hampath(&data).map_err(|e| fail(EXIT_INPUT, e.to_string()))?;
            info!(
                "root '{}': decide by searching for a popular branching with out-degree <= 2",
                red.root
            );
            emit_instance(&red.instance, output.as_deref())
        }
        ReduceCmd::ThreeDm { input, output } => {
            let text = read_text(input.as_deref(), "matching input")?;
            let input: ThreeDmInput = serde_json::from_str(&text)
                .map_err(|e| fail(EXIT_INPUT, format!("invalid matching document: {e}")))?;
            let red = reduce_3dm(&input).map_err(|e| fail(EXIT_INPUT, e.to_string()))?;
            let bound = 2 * input.x.len();
            info!(
                "instance has designated root 'r' (solve with --root r); a perfect matching \
                 exists iff some branching has unpopularity margin at most {bound}"
            );
            emit_instance(red.rooted.instance(), output.as_deref())
        }
    }
}

fn cmd_emit_lp(
    input: Option<&Path>,
    root: Option<&str>,
    out_path: &Path,
    form: LpForm,
    cutoff: usize,
) -> Result<u8, Failure> {
    let rooted = load_rooted_from(input, root)?;
    let text = match form {
        LpForm::Face => {
            emit_face_lp(&rooted, cutoff).map_err(|e| fail(EXIT_INPUT, e.to_string()))?
        }
        LpForm::Extended => {
            emit_extended_lp(&rooted).map_err(|e| fail(EXIT_INPUT, e.to_string()))?
        }
    };
    let rows = lp_row_count(&text);
    fs::write(out_path, &text)
        .map_err(|e| fail(EXIT_INPUT, format!("cannot write '{}': {e}", out_path.display())))?;
    let value = serde_json::json!({
        "rows": rows,
        "written": out_path.display().to_string(),
    });
    println!("{value}");
    Ok(0)
}
