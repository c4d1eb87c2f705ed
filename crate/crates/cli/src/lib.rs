#![forbid(unsafe_code)]

//! Experiment harness behind the `exlab` binary: declarative experiment
//! configs, a deterministic parallel trial runner, JSONL/CSV persistence,
//! and a dependency-free SVG plotter for the summaries.

use std::collections::BTreeMap;
use std::io::Write;

use num::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use exlab_core::density::ell_density;
use exlab_core::encode::family::default_target_family;
use exlab_core::encode::{
    encode_aps, encode_graph_copies, encode_hypergraph_copies, encode_schur, patterns, Encoding,
    GroupSpec, TargetFamily,
};
use exlab_core::seeding::derive_seed;
use exlab_core::solver::{sample_and_solve, SolverBudget};
use exlab_core::stability::{target_distance, PartitionSearchOpts};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
/// Some results came back without an optimality proof (node budget ran out);
/// the outputs are still written in full.
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] exlab_core::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// 64-bit FNV-1a; stamps every record with the identity of the config that
/// produced it so mixed record streams stay attributable.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// How to build the constraint encoding at a given base scale n.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EncodingRule {
    /// Copies of a named pattern (`k3`, `c5`, `p4`, `book-3-2`, `book-4-3`,
    /// `fano`) inside the complete host on n points.
    Copies { pattern: String },
    /// ap_length-term arithmetic progressions in [1, n].
    Aps { ap_length: usize },
    /// Schur triples x + y = z in the cyclic group of order n.
    SchurCyclic,
}

impl EncodingRule {
    pub fn build(&self, n: usize) -> Result<Encoding> {
        match self {
            EncodingRule::Copies { pattern } => {
                let pat = patterns::named(pattern)?;
                if pat.k() == 2 {
                    Ok(encode_graph_copies(&pat, pattern, n)?)
                } else {
                    Ok(encode_hypergraph_copies(&pat, pattern, n)?)
                }
            }
            EncodingRule::Aps { ap_length } => Ok(encode_aps(n, *ap_length)?),
            EncodingRule::SchurCyclic => Ok(encode_schur(&GroupSpec::cyclic(n as u64)?)?),
        }
    }
}

/// The sampling probabilities to run at each n.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum PRule {
    /// The same explicit list at every n.
    Absolute { values: Vec<f64> },
    /// p = c * n^(-1/m) with m the pattern's subgraph growth density; only
    /// meaningful for copy encodings, rejected otherwise.
    Scaled { c: f64 },
}

/// Whether each trial's witness gets a distance-to-target measurement.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityRule {
    /// Skip distance measurements.
    None,
    /// Use the encoding's canonical target family when it has one.
    #[default]
    Auto,
}

/// A declarative experiment: a grid of (n, p) cells, a trial count per cell,
/// and one master seed from which every trial's randomness is derived.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub encoding: EncodingRule,
    pub n_list: Vec<usize>,
    pub p_rule: PRule,
    /// Trials per (n, p) cell.
    pub trials: u64,
    /// Master seed. Trial seeds are derived from (seed, n index, p index,
    /// trial index), so reruns reproduce records byte-for-byte at any thread
    /// count.
    pub seed: u64,
    #[serde(default)]
    pub strict: bool,
    /// Solver node budget per trial.
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub stability: StabilityRule,
    /// Output destinations. Not part of the config identity hash: moving
    /// files around must not orphan old records.
    #[serde(default)]
    pub records_path: Option<String>,
    #[serde(default)]
    pub summary_path: Option<String>,
}

fn default_budget() -> u64 {
    SolverBudget::default().max_nodes
}

/// One (n, p) grid cell, with the indices seed derivation uses.
#[derive(Clone, Debug)]
pub struct Cell {
    pub n_index: usize,
    pub p_index: usize,
    pub n: usize,
    pub p: f64,
}

impl ExperimentConfig {
    /// The full (n, p) grid, validated.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list must be nonempty".into()));
        }
        let mut cells = Vec::new();
        for (n_index, &n) in self.n_list.iter().enumerate() {
            for (p_index, p) in self.p_values(n)?.into_iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("p = {p} at n = {n} is outside [0, 1]")));
                }
                cells.push(Cell { n_index, p_index, n, p });
            }
        }
        Ok(cells)
    }

    fn p_values(&self, n: usize) -> Result<Vec<f64>> {
        match &self.p_rule {
            PRule::Absolute { values } => {
                if values.is_empty() {
                    return Err(Error::Config("p_rule values must be nonempty".into()));
                }
                Ok(values.clone())
            }
            PRule::Scaled { c } => {
                let EncodingRule::Copies { pattern } = &self.encoding else {
                    return Err(Error::Config(
                        "scaled p rule needs a copies encoding to read a density from".into(),
                    ));
                };
                if !c.is_finite() || *c <= 0.0 {
                    return Err(Error::Config(format!("scale factor c = {c} must be positive")));
                }
                let pat = patterns::named(pattern)?;
                let m = ell_density(&pat)?
                    .to_f64()
                    .ok_or_else(|| Error::Config("pattern density does not fit in f64".into()))?;
                Ok(vec![c * (n as f64).powf(-1.0 / m)])
            }
        }
    }

    /// Hash of everything that affects the records (output paths excluded).
    pub fn identity_hash(&self) -> String {
        let mut scrubbed = self.clone();
        scrubbed.records_path = None;
        scrubbed.summary_path = None;
        let json = serde_json::to_string(&scrubbed).expect("config serializes");
        format!("{:016x}", fnv1a64(json.as_bytes()))
    }
}

/// One line of the JSONL record stream.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Identity hash of the config that produced this record.
    pub config: String,
    pub n: usize,
    pub p: f64,
    pub trial: u64,
    /// The seed this trial ran under.
    pub seed: u64,
    pub sampled_size: usize,
    pub extremal_size: usize,
    /// Whether the solver proved optimality within its node budget.
    pub exact: bool,
    pub ratio: f64,
    /// Distance from the witness to the target family, when measured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_exact: Option<bool>,
    /// Witness as alternating absent/present run lengths (absent first;
    /// lengths sum to the vertex count).
    pub witness_rle: Vec<u32>,
}

/// Counters for exit-code mapping.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOutcome {
    pub records: u64,
    pub budget_exhausted: u64,
}

/// Run every cell of the grid and stream records (JSONL) and per-cell
/// aggregates (CSV) to the writers. Trials run in parallel on `threads`
/// workers but are written in grid order, so output bytes are independent of
/// the thread count.
pub fn run_experiment(
    config: &ExperimentConfig,
    threads: usize,
    records_out: &mut dyn Write,
    summary_out: &mut dyn Write,
) -> Result<RunOutcome> {
    let cells = config.cells()?;
    let hash = config.identity_hash();

    // Each distinct n gets its encoding (and family) built once, up front.
    let mut shared: BTreeMap<usize, (Encoding, Option<TargetFamily>)> = BTreeMap::new();
    for cell in &cells {
        if let std::collections::btree_map::Entry::Vacant(slot) = shared.entry(cell.n) {
            let enc = config.encoding.build(cell.n)?;
            let family = match config.stability {
                StabilityRule::None => None,
                StabilityRule::Auto => default_target_family(&enc)?,
            };
            slot.insert((enc, family));
        }
    }

    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|ci| (0..config.trials).map(move |t| (ci, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let budget = SolverBudget { max_nodes: config.budget };
    let records = pool.install(|| {
        jobs.par_iter()
            .map(|&(ci, trial)| {
                let cell = &cells[ci];
                let (enc, family) = &shared[&cell.n];
                run_trial(config, &hash, cell, trial, enc, family.as_ref(), budget)
            })
            .collect::<Result<Vec<TrialRecord>>>()
    })?;

    let mut outcome = RunOutcome { records: records.len() as u64, budget_exhausted: 0 };
    for r in &records {
        if !r.exact {
            outcome.budget_exhausted += 1;
        }
        serde_json::to_writer(&mut *records_out, r)?;
        records_out.write_all(b"\n")?;
    }
    write_summary(&cells, config.trials, &records, summary_out)?;
    Ok(outcome)
}

fn run_trial(
    config: &ExperimentConfig,
    hash: &str,
    cell: &Cell,
    trial: u64,
    enc: &Encoding,
    family: Option<&TargetFamily>,
    budget: SolverBudget,
) -> Result<TrialRecord> {
    let seed = derive_seed(config.seed, &[cell.n_index as u64, cell.p_index as u64, trial]);
    let outcome = sample_and_solve(enc, cell.p, seed, config.strict, budget)?;
    // Seed paths 0 and 1 belong to the solve above; 2 keeps the distance
    // search's randomness disjoint from it.
    let (distance, distance_exact) = match family {
        None => (None, None),
        Some(family) => {
            let opts =
                PartitionSearchOpts { seed: derive_seed(seed, &[2]), ..Default::default() };
            let d = target_distance(&outcome.witness, enc, family, opts)?;
            (Some(d.distance), Some(d.exact))
        }
    };
    Ok(TrialRecord {
        config: hash.to_string(),
        n: cell.n,
        p: cell.p,
        trial,
        seed,
        sampled_size: outcome.sampled_size,
        extremal_size: outcome.extremal_size,
        exact: outcome.exact,
        ratio: outcome.ratio,
        distance,
        distance_exact,
        witness_rle: outcome.witness.to_rle(),
    })
}

pub const SUMMARY_HEADER: &str = "n,p,trials,exact,budget_exhausted,ratio_mean,ratio_min,\
                                  ratio_max,distance_p25,distance_p50,distance_p75";

/// One aggregate CSV row per cell that ran at least one trial. Records must
/// be in grid order (as `run_experiment` produces them).
pub fn write_summary(
    cells: &[Cell],
    trials_per_cell: u64,
    records: &[TrialRecord],
    out: &mut dyn Write,
) -> Result<()> {
    writeln!(out, "{}", SUMMARY_HEADER.split_whitespace().collect::<String>())?;
    let t = trials_per_cell as usize;
    for (ci, cell) in cells.iter().enumerate() {
        let rows = &records[ci * t..(ci + 1) * t];
        if rows.is_empty() {
            continue;
        }
        let exact = rows.iter().filter(|r| r.exact).count();
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut dists: Vec<usize> = rows.iter().filter_map(|r| r.distance).collect();
        dists.sort_unstable();
        let q = |frac: f64| -> String {
            if dists.is_empty() {
                String::new()
            } else {
                let idx = ((dists.len() - 1) as f64 * frac).floor() as usize;
                dists[idx].to_string()
            }
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            cell.n,
            cell.p,
            rows.len(),
            exact,
            rows.len() - exact,
            mean,
            min,
            max,
            q(0.25),
            q(0.5),
            q(0.75),
        )?;
    }
    Ok(())
}

/// Column-oriented view of a small comma-separated table (no quoting — the
/// summaries never need it).
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV: nothing to plot".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|s| s.trim().to_string()).collect())
        .collect();
    Ok(CsvTable { header, rows })
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() { "0".to_string() } else { s.to_string() }
}

/// Render column y against column x as a self-contained 640x480 SVG line
/// plot. Rows where either value is missing or non-numeric are skipped;
/// zero usable rows is an error so empty plots are never written.
pub fn plot_columns(table: &CsvTable, x: &str, y: &str, title: &str) -> Result<String> {
    let col = |name: &str| -> Result<usize> {
        table.header.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!(
                "no column {name:?}; available: {}",
                table.header.join(", ")
            ))
        })
    };
    let (xi, yi) = (col(x)?, col(y)?);
    let mut points: Vec<(f64, f64)> = Vec::new();
    for row in &table.rows {
        let parse = |i: usize| row.get(i).and_then(|c| c.parse::<f64>().ok());
        if let (Some(a), Some(b)) = (parse(xi), parse(yi)) {
            if a.is_finite() && b.is_finite() {
                points.push((a, b));
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Config(format!("no numeric ({x}, {y}) rows to plot")));
    }
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));

    let (width, height) = (640.0_f64, 480.0_f64);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let span = |lo: f64, hi: f64| -> (f64, f64) {
        if lo < hi {
            (lo, hi)
        } else {
            // Degenerate range: pad around the single value.
            let pad = lo.abs().max(1.0) * 0.5;
            (lo - pad, lo + pad)
        }
    };
    let (xmin, xmax) = span(
        points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (ymin, ymax) = span(
        points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let px = |v: f64| ml + (v - xmin) / (xmax - xmin) * (width - ml - mr);
    let py = |v: f64| height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb);

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        width / 2.0,
        xml_escape(title)
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#333\"/>\n",
        height - mb,
        width - mr
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"#333\"/>\n",
        height - mb
    ));
    // Ticks: five per axis.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = xmin + f * (xmax - xmin);
        let yv = ymin + f * (ymax - ymin);
        let (tx, ty) = (px(xv), py(yv));
        svg.push_str(&format!(
            "<line x1=\"{tx}\" y1=\"{0}\" x2=\"{tx}\" y2=\"{1}\" stroke=\"#333\"/>\n",
            height - mb,
            height - mb + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{tx}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            height - mb + 20.0,
            tick_label(xv)
        ));
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{ty}\" x2=\"{ml}\" y2=\"{ty}\" stroke=\"#333\"/>\n",
            ml - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            ml - 9.0,
            ty + 4.0,
            tick_label(yv)
        ));
    }
    // Axis names.
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (ml + width - mr) / 2.0,
        height - 10.0,
        xml_escape(x)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
        (mt + height - mb) / 2.0,
        xml_escape(y)
    ));
    // Data.
    let path: Vec<String> =
        points.iter().map(|&(a, b)| format!("{},{}", px(a), py(b))).collect();
    if points.len() > 1 {
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#4682b4\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
    }
    for &(a, b) in &points {
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3.5\" fill=\"#4682b4\"/>\n",
            px(a),
            py(b)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
