use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use locc_core::analysis::{
    analyze_partition, classify_tripartite, resource_placement_analysis, sweep, threshold_scan,
    DistinguishabilityVerdict,
};
use locc_core::entanglement::{distribution_report, eq8_unitary, matrix_from_rows};
use locc_core::states::{self, verify_set};
use locc_core::tensor::ComplexMatrix;
use locc_core::{Error, Partition, StateSet, Tolerances};

/// Exit code when some verdict is inconclusive.
const EXIT_INCONCLUSIVE: u8 = 2;
/// Exit code when product-basis completion fails.
const EXIT_COMPLETION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "locc", version, about = "LOCC distinguishability of orthogonal product-state sets")]
struct Cli {
    /// Amplitude and witness tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    /// Recorded in the report configuration.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build, list and verify state sets.
    Sets {
        #[command(subcommand)]
        action: SetsAction,
    },
    /// Verdict for one partition.
    Analyze {
        #[command(flatten)]
        set: SetArgs,
        /// Partition in 1-based syntax, e.g. "1,2|3|4".
        #[arg(long)]
        partition: String,
    },
    /// Verdicts for every partition, or every k-block partition.
    Sweep {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Tripartite classification from the three bipartitions.
    Classify {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Smallest largest-block size that admits a protocol.
    Threshold {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Party pairs whose merge gives a protocol.
    Resource {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Bound-entanglement distribution report for a 3 x 2 x 2 set.
    BoundEnt {
        #[arg(long, default_value = "six-state")]
        set: String,
        /// JSON matrix of [re, im] pairs, row-major.
        #[arg(long)]
        unitary: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SetsAction {
    /// Names of the built-in sets.
    List,
    /// Emit a built-in set as JSON.
    Build {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Orthogonality and completeness report for a set.
    Verify {
        #[command(flatten)]
        set: SetArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct SetArgs {
    /// Built-in name or path to a StateSet JSON file.
    set: String,
    /// Local dimension for eq1 and eq3.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Party count for eq3.
    #[arg(long, default_value_t = 4)]
    m: usize,
}

const BUILT_IN: [(&str, &str); 8] = [
    ("bennett-qutrit", "nine-state two-qutrit product basis"),
    ("bennett-S", "eight-state subset of bennett-qutrit"),
    ("bennett-3qubit", "eight-state three-qubit product basis"),
    ("eq1", "6(d-1) tripartite states in (C^d)^3, --d"),
    ("eq2", "ten states in C^3 x C^2 x C^2"),
    ("eq3", "2m(d-1) states in (C^d)^m, --m --d"),
    ("eq5", "81-state product basis of (C^3)^4"),
    ("six-state", "six states in C^3 x C^2 x C^2"),
];

fn built_in(name: &str, d: usize, m: usize) -> Option<locc_core::Result<StateSet>> {
    Some(match name {
        "bennett-qutrit" => Ok(states::bennett_qutrit_basis()),
        "bennett-S" => Ok(states::bennett_subset_s()),
        "bennett-3qubit" => Ok(states::bennett_three_qubit_basis()),
        "eq1" => states::eq1_set(d),
        "eq2" => Ok(states::eq2_set()),
        "eq3" => states::eq3_set(m, d),
        "eq5" => Ok(states::eq5_basis()),
        "six-state" => Ok(states::six_state_set()),
        _ => return None,
    })
}

fn load_set(args: &SetArgs) -> anyhow::Result<StateSet> {
    if let Some(set) = built_in(&args.set, args.d, args.m) {
        return Ok(set?);
    }
    let path = Path::new(&args.set);
    if !path.exists() {
        let names: Vec<&str> = BUILT_IN.iter().map(|(n, _)| *n).collect();
        bail!("unknown set {:?}; built-in sets are {}", args.set, names.join(", "));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw: StateSet = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(StateSet::new(raw.name, raw.dims, raw.states)?)
}

fn load_unitary(path: &Path) -> anyhow::Result<ComplexMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(rows) = serde_json::from_str::<Vec<Vec<Complex64>>>(&text) {
        return Ok(matrix_from_rows(&rows)?);
    }
    let flat: Vec<Complex64> =
        serde_json::from_str(&text).with_context(|| format!("parsing unitary {}", path.display()))?;
    let n = (flat.len() as f64).sqrt().round() as usize;
    if n * n != flat.len() {
        bail!("{} entries do not form a square matrix", flat.len());
    }
    Ok(matrix_from_rows(&flat.chunks(n).map(<[Complex64]>::to_vec).collect::<Vec<_>>())?)
}

fn tolerances(cli: &Cli) -> anyhow::Result<Tolerances> {
    let mut t = Tolerances::default();
    if let Some(x) = cli.tol {
        if x <= 0.0 || !x.is_finite() {
            bail!("--tol must be positive");
        }
        t.amplitude = x;
        t.witness = x;
    }
    if let Some(x) = cli.rank_tol {
        if x <= 0.0 || !x.is_finite() {
            bail!("--rank-tol must be positive");
        }
        t.rank = x;
    }
    Ok(t)
}

fn require_orthogonal(set: &StateSet, t: &Tolerances) -> anyhow::Result<()> {
    let r = verify_set(set, t);
    if !r.orthogonal {
        bail!("set {} is not orthogonal: max overlap {:e}", set.name, r.gram_residual);
    }
    Ok(())
}

struct Run {
    result: Value,
    extra: Value,
    code: u8,
}

fn to_value<T: Serialize>(x: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn any_open(vs: &[DistinguishabilityVerdict]) -> bool {
    vs.iter().any(DistinguishabilityVerdict::is_inconclusive)
}

fn code_for(open: bool) -> u8 {
    if open {
        EXIT_INCONCLUSIVE
    } else {
        0
    }
}

fn set_config(args: &SetArgs, set: &StateSet) -> Value {
    json!({ "source": args.set, "name": set.name, "dims": set.dims })
}

fn execute(cli: &Cli, t: &Tolerances) -> anyhow::Result<Run> {
    let plain = |result: Value, extra: Value, code: u8| Ok(Run { result, extra, code });
    match &cli.command {
        Command::Sets { action } => match action {
            SetsAction::List => {
                let list: Vec<Value> = BUILT_IN
                    .iter()
                    .map(|(n, about)| json!({ "name": n, "description": about }))
                    .collect();
                plain(Value::Array(list), Value::Null, 0)
            }
            SetsAction::Build { set } => plain(to_value(&load_set(set)?)?, Value::Null, 0),
            SetsAction::Verify { set: args } => {
                let set = load_set(args)?;
                let report = verify_set(&set, t);
                if !report.orthogonal {
                    eprintln!("set {} is not orthogonal: max overlap {:e}", set.name, report.gram_residual);
                }
                let code = if report.orthogonal { 0 } else { 1 };
                plain(to_value(&report)?, json!({ "set": set_config(args, &set) }), code)
            }
        },
        Command::Analyze { set: args, partition } => {
            let set = load_set(args)?;
            require_orthogonal(&set, t)?;
            let p = Partition::parse(partition, set.party_count())?;
            let v = analyze_partition(&set, &p, t)?;
            let code = code_for(v.is_inconclusive());
            plain(to_value(&v)?, json!({ "set": set_config(args, &set), "partition": partition }), code)
        }
        Command::Sweep { set: args, k } => {
            let set = load_set(args)?;
            require_orthogonal(&set, t)?;
            let vs = sweep(&set, *k, t)?;
            plain(to_value(&vs)?, json!({ "set": set_config(args, &set), "k": k }), code_for(any_open(&vs)))
        }
        Command::Classify { set: args } => {
            let set = load_set(args)?;
            require_orthogonal(&set, t)?;
            let c = classify_tripartite(&set, t)?;
            let mut result = to_value(&c)?;
            result["class_label"] = json!(c.class.map(|x| x.roman()));
            plain(result, json!({ "set": set_config(args, &set) }), code_for(c.inconclusive))
        }
        Command::Threshold { set: args } => {
            let set = load_set(args)?;
            require_orthogonal(&set, t)?;
            let r = threshold_scan(&set, t)?;
            plain(to_value(&r)?, json!({ "set": set_config(args, &set) }), code_for(any_open(&r.verdicts)))
        }
        Command::Resource { set: args } => {
            let set = load_set(args)?;
            require_orthogonal(&set, t)?;
            let r = resource_placement_analysis(&set, t)?;
            plain(to_value(&r)?, json!({ "set": set_config(args, &set) }), code_for(r.inconclusive))
        }
        Command::BoundEnt { set, unitary } => {
            let args = SetArgs {
                set: set.clone(),
                d: 3,
                m: 4,
            };
            let s = load_set(&args)?;
            let u = match unitary {
                Some(path) => load_unitary(path)?,
                None => eq8_unitary(),
            };
            let report = distribution_report(&s, &u, t)?;
            let code = if report.bound_entanglement_distributed {
                0
            } else {
                EXIT_INCONCLUSIVE
            };
            let source = unitary.as_ref().map_or("eq8".to_string(), |p| p.display().to_string());
            plain(
                to_value(&report)?,
                json!({ "set": set_config(&args, &s), "unitary": source }),
                code,
            )
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sets { action } => match action {
            SetsAction::List => "sets list",
            SetsAction::Build { .. } => "sets build",
            SetsAction::Verify { .. } => "sets verify",
        },
        Command::Analyze { .. } => "analyze",
        Command::Sweep { .. } => "sweep",
        Command::Classify { .. } => "classify",
        Command::Threshold { .. } => "threshold",
        Command::Resource { .. } => "resource",
        Command::BoundEnt { .. } => "bound-ent",
    }
}

/// Sorted-key JSON. `sets build` emits the bare set so the file can be read back.
fn render(cli: &Cli, t: &Tolerances, run: &Run) -> anyhow::Result<String> {
    let doc = if matches!(cli.command, Command::Sets { action: SetsAction::Build { .. } }) {
        run.result.clone()
    } else {
        let mut config = json!({ "tolerances": t, "seed": cli.seed, "format": cli.format.name() });
        if let Value::Object(extra) = &run.extra {
            for (k, v) in extra {
                config[k] = v.clone();
            }
        }
        json!({ "command": command_name(&cli.command), "config": config, "result": run.result })
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::CompletionFailed(_)) => EXIT_COMPLETION,
        _ => 1,
    }
}

fn main() -> ExitCode {
    // usage errors exit with 1 so that 2 keeps meaning "inconclusive"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = tolerances(&cli).and_then(|t| {
        let run = execute(&cli, &t)?;
        let text = render(&cli, &t, &run)?;
        match &cli.output {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(run.code)
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
