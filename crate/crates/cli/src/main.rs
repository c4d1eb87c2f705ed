#![forbid(unsafe_code)]

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use exlab_cli::{
    parse_csv, plot_columns, run_experiment, EncodingRule, Error, ExperimentConfig, Result,
    EXIT_BUDGET, EXIT_CONFIG, EXIT_OK,
};
use exlab_core::density::{
    chromatic_number, ell_density, is_strictly_balanced, known_turan_density,
    threshold_probability, two_density,
};
use exlab_core::encode::family::default_target_family;
use exlab_core::encode::{encode_schur, Encoding, GroupSpec};
use exlab_core::exposure::{solve_schedule, verify_conditional_rounds};
use exlab_core::ledger::{
    check_constraints, ConstLogFn, ConstantsLedger, FloorTableLogFn, LogFn, LogMag,
};
use exlab_core::moments::{boundedness_report, mu_i_exact, mu_i_mc};
use exlab_core::solver::{max_free_subset, sample_and_solve, SolverBudget};
use exlab_core::stability::{
    stability_probe, target_distance, NearestTarget, PartitionSearchOpts, ProbeMode,
};
use exlab_core::subset::VertexSubset;

#[derive(Parser)]
#[command(
    name = "exlab",
    version,
    about = "Laboratory for extremal structure in random sparse hosts",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a constraint encoding; print it or write the file pair.
    Encode(EncodeCmd),
    /// Densities, balancedness, and thresholds of a named pattern.
    Density(DensityCmd),
    /// Exact (optionally Monte Carlo) degree second moments over a q grid.
    Mu(MuCmd),
    /// Second moments against the q^{2i}|H|^2/|V| unit over a q grid.
    Boundedness(BoundednessCmd),
    /// Multi-round exposure schedules.
    #[command(subcommand)]
    Exposure(ExposureCmd),
    /// Largest violation-free subsets, full-host or sampled.
    #[command(subcommand)]
    Extremal(ExtremalCmd),
    /// Batched experiments driven by a JSON config.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Distances to target families and stability probes.
    #[command(subcommand)]
    Stability(StabilityCmd),
    /// The constants ledger for given inputs, with its consistency check.
    Constants(ConstantsCmd),
}

/// Shared encoding selector: exactly one source must be given.
#[derive(Args, Clone)]
struct EncodingArgs {
    /// Copies of a named pattern (k3, c5, p4, book-3-2, book-4-3, fano).
    #[arg(long, value_name = "PATTERN")]
    copies: Option<String>,
    /// Arithmetic progressions of this length.
    #[arg(long, value_name = "LEN")]
    aps: Option<usize>,
    /// Schur triples in the product of these cyclic orders.
    #[arg(long, value_name = "ORDERS", value_delimiter = ',')]
    schur: Option<Vec<u64>>,
    /// Base scale: points for copies, interval length for progressions,
    /// cyclic order shorthand for --schur with no orders of its own.
    #[arg(long, short)]
    n: Option<usize>,
}

impl EncodingArgs {
    fn build(&self) -> Result<Encoding> {
        let n = || {
            self.n.ok_or_else(|| Error::Config("this encoding needs --n".into()))
        };
        match (&self.copies, self.aps, &self.schur) {
            (Some(pattern), None, None) => {
                EncodingRule::Copies { pattern: pattern.clone() }.build(n()?)
            }
            (None, Some(ap_length), None) => EncodingRule::Aps { ap_length }.build(n()?),
            (None, None, Some(orders)) => {
                Ok(encode_schur(&GroupSpec::new(orders.clone())?)?)
            }
            (None, None, None) => match self.n {
                Some(_) => Err(Error::Config(
                    "--n needs an encoding kind: --copies, --aps, or --schur".into(),
                )),
                None => Err(Error::Config(
                    "choose an encoding: --copies, --aps, or --schur".into(),
                )),
            },
            _ => Err(Error::Config(
                "choose exactly one of --copies, --aps, --schur".into(),
            )),
        }
    }
}

#[derive(Args)]
struct EncodeCmd {
    #[command(flatten)]
    encoding: EncodingArgs,
    /// Write <OUT>.txt and <OUT>.json instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the full JSON descriptor instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DensityCmd {
    /// Named pattern (k3, c5, p4, book-3-2, book-4-3, fano).
    #[arg(long)]
    pattern: String,
    /// Also report the appearance threshold probability at this host size.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MuCmd {
    #[command(flatten)]
    encoding: EncodingArgs,
    /// Degree level i.
    #[arg(long)]
    i: usize,
    /// Probability grid.
    #[arg(long, value_delimiter = ',', required = true)]
    q: Vec<f64>,
    /// Add a Monte Carlo column with this many trials per q.
    #[arg(long, requires = "seed")]
    mc: Option<u64>,
    /// Seed for the Monte Carlo column.
    #[arg(long, requires = "mc")]
    seed: Option<u64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundednessCmd {
    #[command(flatten)]
    encoding: EncodingArgs,
    /// Degree level i.
    #[arg(long)]
    i: usize,
    /// Reference probability the bounding unit is stated at.
    #[arg(long)]
    p: f64,
    /// Probability grid.
    #[arg(long, value_delimiter = ',', required = true)]
    q: Vec<f64>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExposureCmd {
    /// Solve per-round probabilities for a target union probability.
    Solve(ExposureSolveCmd),
    /// Check a schedule's composition and conditional round probabilities.
    Verify(ExposureVerifyCmd),
}

#[derive(Args)]
struct ExposureSolveCmd {
    /// Union probability the rounds must compose to.
    #[arg(long)]
    q: f64,
    #[arg(long)]
    rounds: usize,
    /// Geometric growth factor between consecutive rounds.
    #[arg(long, default_value_t = 1.0)]
    growth: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExposureVerifyCmd {
    #[arg(long)]
    q: f64,
    #[arg(long)]
    rounds: usize,
    #[arg(long, default_value_t = 1.0)]
    growth: f64,
    /// Tolerance for both the composition residual and the conditional check.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Subcommand)]
enum ExtremalCmd {
    /// Find a largest violation-free subset.
    Solve(ExtremalSolveCmd),
}

#[derive(Args)]
struct ExtremalSolveCmd {
    #[command(flatten)]
    encoding: EncodingArgs,
    /// Also forbid the degenerate (size 1 and 2) constraints.
    #[arg(long)]
    strict: bool,
    /// Solver node budget.
    #[arg(long, default_value_t = SolverBudget::default().max_nodes)]
    budget: u64,
    /// Sample each vertex with this probability first, then solve the sample.
    #[arg(long, requires = "seed")]
    p: Option<f64>,
    /// Seed for the sample draw.
    #[arg(long, requires = "p")]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Run a config; write JSONL records and a CSV summary.
    Run(ExperimentRunCmd),
    /// Plot one summary column against another as a standalone SVG.
    Plot(ExperimentPlotCmd),
}

#[derive(Args)]
struct ExperimentRunCmd {
    /// JSON experiment config ('-' for stdin).
    #[arg(long)]
    config: String,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Records destination ('-' for stdout); overrides the config.
    #[arg(long)]
    records: Option<String>,
    /// Summary destination ('-' for stdout); overrides the config.
    #[arg(long)]
    summary: Option<String>,
}

#[derive(Args)]
struct ExperimentPlotCmd {
    /// Summary CSV produced by `experiment run`.
    #[arg(long)]
    summary: PathBuf,
    /// Column for the horizontal axis.
    #[arg(long)]
    x: String,
    /// Column for the vertical axis.
    #[arg(long)]
    y: String,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
    /// Plot title (defaults to "<y> vs <x>").
    #[arg(long)]
    title: Option<String>,
}

#[derive(Subcommand)]
enum StabilityCmd {
    /// Distance from an explicit witness to the canonical target family.
    Distance(StabilityDistanceCmd),
    /// Search for subsets that are large and sparse yet far from the family.
    Probe(StabilityProbeCmd),
}

#[derive(Args)]
struct StabilityDistanceCmd {
    #[command(flatten)]
    encoding: EncodingArgs,
    /// Witness vertex ids.
    #[arg(long, value_delimiter = ',', required = true)]
    witness: Vec<usize>,
    /// Seed for the partition search past the exhaustive guard.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StabilityProbeCmd {
    #[command(flatten)]
    encoding: EncodingArgs,
    /// Density the subsets must nearly reach (size >= (alpha - eps)|V|).
    #[arg(long)]
    alpha: f64,
    /// Sparseness slack: subsets qualify below eps|H| induced edges.
    #[arg(long)]
    eps: f64,
    /// Distance floor: a violator sits further than delta|V| from the family.
    #[arg(long)]
    delta: f64,
    /// Search mode: exhaustive (complete, capped) or anneal.
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    /// Iterations for the anneal mode.
    #[arg(long, default_value_t = 20_000)]
    iterations: u64,
    /// Seed (required with --mode anneal).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConstantsCmd {
    /// Uniformity of the encodings the constants are for.
    #[arg(long)]
    k: usize,
    /// Boundedness constant K.
    #[arg(long)]
    k_bound: f64,
    /// Density the extremal structures live at.
    #[arg(long)]
    alpha: f64,
    /// Target stability gap.
    #[arg(long)]
    delta: f64,
    /// Stability input eps(d) as a constant ...
    #[arg(long)]
    eps_stab_const: Option<f64>,
    /// ... or as a floor-table file with `threshold,value` lines.
    #[arg(long)]
    eps_stab_table: Option<PathBuf>,
    /// Base fraction b^(eta) as a constant ...
    #[arg(long)]
    bhat_const: Option<f64>,
    /// ... or as a floor-table file with `threshold,value` lines.
    #[arg(long)]
    bhat_table: Option<PathBuf>,
    /// Lower bound beta on the relative extremal density.
    #[arg(long)]
    beta_floor: f64,
    /// Cap on the per-step round count R.
    #[arg(long)]
    r_cap: Option<u64>,
    #[arg(long)]
    json: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Encode(cmd) => cmd_encode(cmd),
        Command::Density(cmd) => cmd_density(cmd),
        Command::Mu(cmd) => cmd_mu(cmd),
        Command::Boundedness(cmd) => cmd_boundedness(cmd),
        Command::Exposure(ExposureCmd::Solve(cmd)) => cmd_exposure_solve(cmd),
        Command::Exposure(ExposureCmd::Verify(cmd)) => cmd_exposure_verify(cmd),
        Command::Extremal(ExtremalCmd::Solve(cmd)) => cmd_extremal_solve(cmd),
        Command::Experiment(ExperimentCmd::Run(cmd)) => cmd_experiment_run(cmd),
        Command::Experiment(ExperimentCmd::Plot(cmd)) => cmd_experiment_plot(cmd),
        Command::Stability(StabilityCmd::Distance(cmd)) => cmd_stability_distance(cmd),
        Command::Stability(StabilityCmd::Probe(cmd)) => cmd_stability_probe(cmd),
        Command::Constants(cmd) => cmd_constants(cmd),
    }
}

/// Print to stdout or write to a file when --out was given.
fn emit(out: Option<&PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, body)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn cmd_encode(cmd: EncodeCmd) -> Result<i32> {
    let enc = cmd.encoding.build()?;
    enc.validate()?;
    if let Some(base) = &cmd.out {
        enc.write_files(base)?;
        println!(
            "wrote {}.txt and {}.json ({})",
            base.display(),
            base.display(),
            enc.label
        );
        return Ok(EXIT_OK);
    }
    if cmd.json {
        println!("{}", serde_json::to_string_pretty(&enc).map_err(Error::Json)?);
        return Ok(EXIT_OK);
    }
    let h = &enc.hypergraph;
    println!("{}", enc.label);
    println!(
        "uniformity {}, {} vertices, {} edges, {} degenerate constraints",
        h.k(),
        h.n_vertices(),
        h.edge_count(),
        enc.degenerate_constraints.len()
    );
    print!("{}", h.to_text());
    Ok(EXIT_OK)
}

fn cmd_density(cmd: DensityCmd) -> Result<i32> {
    let pat = exlab_core::encode::patterns::named(&cmd.pattern)?;
    let m = ell_density(&pat)?;
    let balanced = is_strictly_balanced(&pat)?;
    // Graph-only readouts stay blank for higher uniformities.
    let is_graph = pat.k() == 2;
    let m2 = is_graph.then(|| two_density(&pat)).transpose()?;
    let chi = is_graph.then(|| chromatic_number(&pat)).transpose()?;
    let turan = known_turan_density(&cmd.pattern);
    let threshold = cmd.n.map(|n| threshold_probability(&pat, n)).transpose()?;
    if cmd.json {
        let body = serde_json::json!({
            "pattern": cmd.pattern,
            "uniformity": pat.k(),
            "vertices": pat.n_vertices(),
            "edges": pat.edge_count(),
            "ell_density": m.to_string(),
            "two_density": m2.as_ref().map(|d| d.to_string()),
            "strictly_balanced": balanced,
            "chromatic_number": chi,
            "turan_density": turan.map(|t| t.to_string()),
            "threshold": threshold.map(|t| serde_json::json!({"n": cmd.n, "p": t})),
        });
        println!("{}", serde_json::to_string_pretty(&body).map_err(Error::Json)?);
        return Ok(EXIT_OK);
    }
    println!(
        "pattern {}: uniformity {}, {} vertices, {} edges",
        cmd.pattern,
        pat.k(),
        pat.n_vertices(),
        pat.edge_count()
    );
    println!("growth density m = {m} (strictly balanced: {balanced})");
    if let Some(m2) = &m2 {
        println!("two-density m_2 = {m2}");
    }
    if let Some(chi) = chi {
        println!("chromatic number = {chi}");
    }
    match turan {
        Some(t) => println!("turan density = {t}"),
        None => println!("turan density = (not tabulated)"),
    }
    if let (Some(n), Some(p)) = (cmd.n, threshold) {
        println!("threshold p({n}) = {p}");
    }
    Ok(EXIT_OK)
}

fn cmd_mu(cmd: MuCmd) -> Result<i32> {
    let enc = cmd.encoding.build()?;
    let h = &enc.hypergraph;
    let mut body = String::new();
    body.push_str(if cmd.mc.is_some() { "q,mu_exact,mu_mc,mc_se\n" } else { "q,mu_exact\n" });
    for (idx, &q) in cmd.q.iter().enumerate() {
        let exact = mu_i_exact(h, q, cmd.i)?;
        match cmd.mc {
            Some(trials) => {
                let seed = cmd.seed.expect("clap ties --mc to --seed");
                let (est, se) =
                    mu_i_mc(h, q, cmd.i, trials, exlab_core::seeding::derive_seed(seed, &[idx as u64]))?;
                body.push_str(&format!("{q},{exact},{est},{se}\n"));
            }
            None => body.push_str(&format!("{q},{exact}\n")),
        }
    }
    emit(cmd.out.as_ref(), &body)?;
    Ok(EXIT_OK)
}

fn cmd_boundedness(cmd: BoundednessCmd) -> Result<i32> {
    let enc = cmd.encoding.build()?;
    let report = boundedness_report(&enc.hypergraph, cmd.p, cmd.i, &cmd.q)?;
    let body = if cmd.json {
        let mut s = serde_json::to_string_pretty(&report).map_err(Error::Json)?;
        s.push('\n');
        s
    } else {
        let mut s = String::new();
        s.push_str("q,mu_exact,unit,ratio\n");
        for (j, &q) in report.q_grid.iter().enumerate() {
            s.push_str(&format!(
                "{q},{},{},{}\n",
                report.mu_exact[j], report.rhs_unit[j], report.ratios[j]
            ));
        }
        match report.k_min {
            Some(k_min) => s.push_str(&format!("# K_min = {k_min}\n")),
            None => s.push_str("# K_min undefined (degenerate grid)\n"),
        }
        s
    };
    emit(cmd.out.as_ref(), &body)?;
    Ok(EXIT_OK)
}

fn cmd_exposure_solve(cmd: ExposureSolveCmd) -> Result<i32> {
    let schedule = solve_schedule(cmd.q, cmd.rounds, cmd.growth)?;
    schedule.validate()?;
    if cmd.json {
        println!("{}", serde_json::to_string_pretty(&schedule).map_err(Error::Json)?);
        return Ok(EXIT_OK);
    }
    println!(
        "union probability {} over {} rounds (growth {})",
        schedule.q, schedule.rounds, schedule.growth
    );
    for (s, q_s) in schedule.qs.iter().enumerate() {
        println!(
            "round {}: q_{} = {q_s} (conditional {})",
            s + 1,
            s + 1,
            schedule.conditional_round_probability(s + 1)?
        );
    }
    println!("composed union = {}", schedule.union_probability());
    Ok(EXIT_OK)
}

fn cmd_exposure_verify(cmd: ExposureVerifyCmd) -> Result<i32> {
    let schedule = solve_schedule(cmd.q, cmd.rounds, cmd.growth)?;
    schedule.validate()?;
    let residual = (schedule.union_probability() - cmd.q).abs();
    if residual > cmd.tol {
        return Err(Error::Config(format!(
            "composition residual {residual} exceeds tolerance {}",
            cmd.tol
        )));
    }
    let worst = verify_conditional_rounds(&schedule, cmd.tol)?;
    println!(
        "ok: composition residual {residual:.3e}, worst conditional error {worst:.3e} (tolerance {:e})",
        cmd.tol
    );
    Ok(EXIT_OK)
}

fn cmd_extremal_solve(cmd: ExtremalSolveCmd) -> Result<i32> {
    let enc = cmd.encoding.build()?;
    let budget = SolverBudget { max_nodes: cmd.budget };
    let nv = enc.hypergraph.n_vertices();
    match cmd.p {
        Some(p) => {
            let seed = cmd.seed.expect("clap ties --p to --seed");
            let outcome = sample_and_solve(&enc, p, seed, cmd.strict, budget)?;
            if cmd.json {
                println!("{}", serde_json::to_string_pretty(&outcome).map_err(Error::Json)?);
            } else {
                println!(
                    "sampled {} of {} vertices at p = {p}",
                    outcome.sampled_size, nv
                );
                println!(
                    "largest free subset: {} ({}), ratio {}",
                    outcome.extremal_size,
                    if outcome.exact { "exact" } else { "budget exhausted" },
                    outcome.ratio
                );
                println!("witness: {:?}", outcome.witness.members());
            }
            Ok(if outcome.exact { EXIT_OK } else { EXIT_BUDGET })
        }
        None => {
            let full = VertexSubset::full(nv);
            let result = max_free_subset(&enc, &full, cmd.strict, budget)?;
            if cmd.json {
                println!("{}", serde_json::to_string_pretty(&result).map_err(Error::Json)?);
            } else {
                println!(
                    "largest free subset of {}: {} of {} vertices ({}, {} nodes)",
                    enc.label,
                    result.size,
                    nv,
                    if result.exact { "exact" } else { "budget exhausted" },
                    result.nodes_explored
                );
                println!("witness: {:?}", result.witness.members());
            }
            Ok(if result.exact { EXIT_OK } else { EXIT_BUDGET })
        }
    }
}

fn cmd_experiment_run(cmd: ExperimentRunCmd) -> Result<i32> {
    let raw = if cmd.config == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        fs::read_to_string(&cmd.config)?
    };
    let config: ExperimentConfig =
        serde_json::from_str(&raw).map_err(|e| Error::Config(format!("config: {e}")))?;

    let records_dest = cmd
        .records
        .or_else(|| config.records_path.clone())
        .unwrap_or_else(|| "records.jsonl".into());
    let summary_dest = cmd
        .summary
        .or_else(|| config.summary_path.clone())
        .unwrap_or_else(|| "summary.csv".into());

    let started = Instant::now();
    let mut records_buf: Vec<u8> = Vec::new();
    let mut summary_buf: Vec<u8> = Vec::new();
    let outcome = run_experiment(&config, cmd.threads, &mut records_buf, &mut summary_buf)?;

    let deliver = |dest: &str, bytes: &[u8]| -> Result<()> {
        if dest == "-" {
            std::io::stdout().write_all(bytes)?;
        } else {
            fs::write(dest, bytes)?;
            eprintln!("wrote {dest}");
        }
        Ok(())
    };
    deliver(&records_dest, &records_buf)?;
    deliver(&summary_dest, &summary_buf)?;
    eprintln!(
        "{} records ({} without optimality proof) in {} ms",
        outcome.records,
        outcome.budget_exhausted,
        started.elapsed().as_millis()
    );
    Ok(if outcome.budget_exhausted > 0 { EXIT_BUDGET } else { EXIT_OK })
}

fn cmd_experiment_plot(cmd: ExperimentPlotCmd) -> Result<i32> {
    let text = fs::read_to_string(&cmd.summary)?;
    let table = parse_csv(&text)?;
    let title = cmd.title.unwrap_or_else(|| format!("{} vs {}", cmd.y, cmd.x));
    let svg = plot_columns(&table, &cmd.x, &cmd.y, &title)?;
    fs::write(&cmd.out, svg)?;
    println!("wrote {}", cmd.out.display());
    Ok(EXIT_OK)
}

fn require_family(enc: &Encoding) -> Result<exlab_core::encode::TargetFamily> {
    default_target_family(enc)?.ok_or_else(|| {
        Error::Config(format!("encoding {} has no canonical target family", enc.label))
    })
}

fn cmd_stability_distance(cmd: StabilityDistanceCmd) -> Result<i32> {
    let enc = cmd.encoding.build()?;
    let family = require_family(&enc)?;
    let w = VertexSubset::from_members(enc.hypergraph.n_vertices(), cmd.witness.iter().copied())?;
    let opts = PartitionSearchOpts { seed: cmd.seed, ..Default::default() };
    let d = target_distance(&w, &enc, &family, opts)?;
    if cmd.json {
        println!("{}", serde_json::to_string_pretty(&d).map_err(Error::Json)?);
        return Ok(EXIT_OK);
    }
    println!(
        "distance {} ({})",
        d.distance,
        if d.exact { "exact" } else { "local search" }
    );
    match &d.nearest {
        NearestTarget::FamilyIndex(i) => println!("nearest: family member {i}"),
        NearestTarget::Partition(parts) => println!("nearest: partition {parts:?}"),
    }
    Ok(EXIT_OK)
}

fn cmd_stability_probe(cmd: StabilityProbeCmd) -> Result<i32> {
    let enc = cmd.encoding.build()?;
    let family = require_family(&enc)?;
    let (mode, seed) = match cmd.mode.as_str() {
        "exhaustive" => (ProbeMode::Exhaustive, cmd.seed.unwrap_or(0)),
        "anneal" => {
            let seed = cmd.seed.ok_or_else(|| {
                Error::Config("--mode anneal draws random moves; give it a --seed".into())
            })?;
            (ProbeMode::Anneal { iterations: cmd.iterations }, seed)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown mode {other:?}; expected exhaustive or anneal"
            )))
        }
    };
    let opts = PartitionSearchOpts { seed, ..Default::default() };
    let found = stability_probe(&enc, &family, cmd.alpha, cmd.eps, cmd.delta, mode, opts)?;
    if cmd.json {
        println!("{}", serde_json::to_string_pretty(&found).map_err(Error::Json)?);
        return Ok(EXIT_OK);
    }
    match found {
        None => println!(
            "no violator found at alpha = {}, eps = {}, delta = {} ({} mode)",
            cmd.alpha, cmd.eps, cmd.delta, cmd.mode
        ),
        Some(v) => {
            println!(
                "violator: {} vertices, {} induced edges, distance {} ({})",
                v.size,
                v.induced_edges,
                v.distance,
                if v.distance_exact { "exact" } else { "local search" }
            );
            println!("subset: {:?}", v.subset.members());
        }
    }
    Ok(EXIT_OK)
}

fn load_log_fn(
    what: &str,
    constant: Option<f64>,
    table: Option<&PathBuf>,
) -> Result<Box<dyn LogFn>> {
    match (constant, table) {
        (Some(v), None) => Ok(Box::new(ConstLogFn::new(v)?)),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            let mut rows = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (a, b) = line.split_once(',').ok_or_else(|| {
                    Error::Config(format!(
                        "{}:{}: expected `threshold,value`",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                let parse = |s: &str| {
                    s.trim().parse::<f64>().map_err(|e| {
                        Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1))
                    })
                };
                rows.push((parse(a)?, parse(b)?));
            }
            Ok(Box::new(FloorTableLogFn::from_plain(&rows)?))
        }
        _ => Err(Error::Config(format!(
            "give exactly one of --{what}-const or --{what}-table"
        ))),
    }
}

fn fmt_mag(m: &LogMag) -> String {
    let val = m.linear();
    if val.is_finite() && (val != 0.0 || m.log10 == f64::NEG_INFINITY) {
        format!("{val:.6e}")
    } else {
        format!("{}10^{:.4}", if m.sign < 0 { "-" } else { "" }, m.log10)
    }
}

fn cmd_constants(cmd: ConstantsCmd) -> Result<i32> {
    let eps = load_log_fn("eps-stab", cmd.eps_stab_const, cmd.eps_stab_table.as_ref())?;
    let bhat = load_log_fn("bhat", cmd.bhat_const, cmd.bhat_table.as_ref())?;
    let ledger = ConstantsLedger::build(
        cmd.k,
        cmd.k_bound,
        cmd.alpha,
        cmd.delta,
        &*eps,
        &*bhat,
        cmd.beta_floor,
        cmd.r_cap,
    )?;
    let check = check_constraints(&ledger)?;
    let body = if cmd.json {
        let mut s = serde_json::to_string_pretty(&serde_json::json!({
            "ledger": ledger,
            "check": check,
        }))
        .map_err(Error::Json)?;
        s.push('\n');
        s
    } else {
        let mut s = String::new();
        s.push_str(&format!(
            "constants for k = {}, K = {}, alpha = {}, delta = {}, beta floor = {}\n",
            ledger.k,
            fmt_mag(&ledger.k_bound),
            ledger.alpha,
            fmt_mag(&ledger.delta_target),
            fmt_mag(&ledger.beta_floor),
        ));
        s.push_str("level,delta,xi,b,C,R\n");
        for entry in &ledger.levels {
            let r = match &entry.step {
                None => "-".to_string(),
                Some(step) => match step.r.exact {
                    Some(r) => r.to_string(),
                    None => format!("10^{:.4}", step.r.log10),
                },
            };
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                entry.level,
                fmt_mag(&entry.delta),
                fmt_mag(&entry.xi),
                fmt_mag(&entry.b),
                fmt_mag(&entry.c),
                r
            ));
        }
        s.push_str(&format!(
            "consistency: {} equations checked, {} violations\n",
            check.checked_equations,
            check.violations.len()
        ));
        for v in &check.violations {
            s.push_str(&format!("violation: {v}\n"));
        }
        s
    };
    emit(cmd.out.as_ref(), &body)?;
    if check.violations.is_empty() { Ok(EXIT_OK) } else { Ok(EXIT_CONFIG) }
}
