//! `idnc` command line: parameter sweeps over the simulator, CSV output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use thiserror::Error;

use crate::error::Error;
use crate::format::sig6;
use crate::policies::PolicyKind;
use crate::sim::{run_experiment, simulate_frames, Deadline, ExperimentStats, SimConfig, DEFAULT_ERASURE_SPREAD};

pub const CSV_HEADER: &str = "policy,M,N,P,T,frames,seed,mean_sum_delay,mean_max_delay,\
mean_served_fraction,mean_recovery_transmissions";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Sim(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
}

#[derive(Parser, Debug)]
#[command(
    name = "idnc",
    version,
    about = "Simulate IDNC recovery under max- and sum-delay policies"
)]
struct Args {
    #[arg(long, default_value_t = 60)]
    receivers: usize,
    #[arg(long, default_value_t = 30)]
    packets: usize,
    /// Mean packet erasure probability
    #[arg(long, default_value_t = 0.5)]
    erasure: f64,
    /// Decoding-delay deadline for the served statistic, integer or `inf`
    #[arg(long, default_value = "inf", value_parser = parse_deadline)]
    deadline: Deadline,
    #[arg(long, default_value_t = 1000)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated: mdd, sdd, mdd-exact, sdd-exact
    #[arg(long, default_value = "mdd,sdd", value_delimiter = ',', value_parser = parse_policy)]
    policy: Vec<PolicyKind>,
    /// <param>=<start>:<step>:<end>, param one of receivers, packets, erasure, deadline
    #[arg(long, value_parser = parse_sweep)]
    sweep: Option<SweepSpec>,
    /// CSV destination; stdout when absent
    #[arg(long)]
    output: Option<PathBuf>,
    /// Recovery transmissions per frame before giving up [default: 100 * packets]
    #[arg(long)]
    max_transmissions: Option<usize>,
    /// Ceiling on the per-frame spread of receiver erasure probabilities around the mean
    #[arg(long, default_value_t = DEFAULT_ERASURE_SPREAD)]
    spread_cap: f64,
}

fn parse_deadline(s: &str) -> Result<Deadline, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sweep(s: &str) -> Result<SweepSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Receivers,
    Packets,
    Erasure,
    Deadline,
}

impl SweepParam {
    fn integral(self) -> bool {
        !matches!(self, SweepParam::Erasure)
    }
}

/// Inclusive arithmetic range over one configuration parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub start: f64,
    pub step: f64,
    pub end: f64,
}

impl FromStr for SweepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::invalid(format!("sweep `{s}` is not <param>=<start>:<step>:<end>"));
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let parameter = match name {
            "receivers" => SweepParam::Receivers,
            "packets" => SweepParam::Packets,
            "erasure" => SweepParam::Erasure,
            "deadline" => SweepParam::Deadline,
            other => return Err(Error::invalid(format!("unknown sweep parameter `{other}`"))),
        };
        let parts: Vec<f64> = range
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [start, step, end] = parts[..] else {
            return Err(bad());
        };
        if !(start.is_finite() && step.is_finite() && end.is_finite()) {
            return Err(bad());
        }
        if step <= 0.0 {
            return Err(Error::invalid("sweep step must be positive"));
        }
        if start > end {
            return Err(Error::invalid("sweep start exceeds end"));
        }
        let spec = SweepSpec {
            parameter,
            start,
            step,
            end,
        };
        if parameter.integral() {
            for x in [start, step, end] {
                if x.fract() != 0.0 || x < 0.0 {
                    return Err(Error::invalid(format!("{name} sweep needs non-negative integers")));
                }
            }
        }
        Ok(spec)
    }
}

impl SweepSpec {
    /// Ascending sweep values; `end` is included when it lies on the grid.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let x = self.start + k as f64 * self.step;
                (x * 1e12).round() / 1e12
            })
            .collect()
    }

    /// `base` with the swept parameter set to `value`.
    pub fn apply(&self, base: &SimConfig, value: f64, max_transmissions: Option<usize>) -> SimConfig {
        let mut cfg = base.clone();
        match self.parameter {
            SweepParam::Receivers => cfg.receivers = value as usize,
            SweepParam::Packets => {
                cfg.packets = value as usize;
                cfg.max_transmissions = max_transmissions.unwrap_or(100 * cfg.packets);
            }
            SweepParam::Erasure => cfg.avg_erasure = value,
            SweepParam::Deadline => cfg.deadline = Deadline::Finite(value as u32),
        }
        cfg
    }
}

/// A fully parsed command line.
#[derive(Debug, Clone)]
pub struct Invocation {
    /// Fixed parameters; `policy` holds the first requested policy.
    pub base: SimConfig,
    pub sweep: Option<SweepSpec>,
    pub output: Option<PathBuf>,
    pub policies: Vec<PolicyKind>,
    pub max_transmissions: Option<usize>,
}

impl Invocation {
    /// Every `(policy, config)` pair in output order.
    pub fn configs(&self) -> Vec<SimConfig> {
        let points = match &self.sweep {
            Some(s) => s
                .points()
                .into_iter()
                .map(|x| s.apply(&self.base, x, self.max_transmissions))
                .collect(),
            None => vec![self.base.clone()],
        };
        self.policies
            .iter()
            .flat_map(|&policy| points.iter().map(move |c| SimConfig { policy, ..c.clone() }))
            .collect()
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv)?;
    let mut base = SimConfig::new(args.receivers, args.packets, args.erasure);
    base.deadline = args.deadline;
    base.frames = args.frames;
    base.seed = args.seed;
    base.spread_cap = args.spread_cap;
    base.policy = args.policy[0];
    if let Some(cap) = args.max_transmissions {
        base.max_transmissions = cap;
    }
    let inv = Invocation {
        base,
        sweep: args.sweep,
        output: args.output,
        policies: args.policy,
        max_transmissions: args.max_transmissions,
    };
    for cfg in inv.configs() {
        cfg.validate().map_err(|e| match e {
            Error::ResourceLimit { vertices, bound } => CliError::Usage(format!(
                "policy {} enumerates every maximal clique and is limited to {bound} vertices, \
                 but receivers x packets = {vertices}",
                cfg.policy
            )),
            other => CliError::Usage(other.to_string()),
        })?;
    }
    Ok(inv)
}

/// One output line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub policy: PolicyKind,
    pub receivers: usize,
    pub packets: usize,
    pub avg_erasure: f64,
    pub deadline: Deadline,
    pub frames: usize,
    pub seed: u64,
    pub mean_sum_delay: f64,
    pub mean_max_delay: f64,
    pub mean_served_fraction: f64,
    pub mean_recovery_transmissions: f64,
}

impl CsvRow {
    pub fn new(cfg: &SimConfig, stats: &ExperimentStats) -> Self {
        CsvRow {
            policy: cfg.policy,
            receivers: cfg.receivers,
            packets: cfg.packets,
            avg_erasure: cfg.avg_erasure,
            deadline: cfg.deadline,
            frames: cfg.frames,
            seed: cfg.seed,
            mean_sum_delay: stats.mean_sum_delay,
            mean_max_delay: stats.mean_max_delay,
            mean_served_fraction: stats.mean_served_fraction,
            mean_recovery_transmissions: stats.mean_recovery_transmissions,
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.policy,
            self.receivers,
            self.packets,
            sig6(self.avg_erasure),
            self.deadline,
            self.frames,
            self.seed,
            sig6(self.mean_sum_delay),
            sig6(self.mean_max_delay),
            sig6(self.mean_served_fraction),
            sig6(self.mean_recovery_transmissions),
        )
    }

    pub fn parse(line: &str) -> Result<Self, Error> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(Error::invalid(format!("expected 11 fields, got {}", f.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number `{s}`")))
        };
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::invalid(format!("bad integer `{s}`")))
        };
        Ok(CsvRow {
            policy: f[0].parse()?,
            receivers: int(f[1])? as usize,
            packets: int(f[2])? as usize,
            avg_erasure: num(f[3])?,
            deadline: f[4].parse()?,
            frames: int(f[5])? as usize,
            seed: int(f[6])?,
            mean_sum_delay: num(f[7])?,
            mean_max_delay: num(f[8])?,
            mean_served_fraction: num(f[9])?,
            mean_recovery_transmissions: num(f[10])?,
        })
    }
}

/// Runs every `(policy, sweep point)` and writes the CSV to `csv`, then a
/// summary table to `summary`.
///
/// Deadline sweeps simulate each policy once and re-score the same frames at
/// every deadline; the deadline never changes what is transmitted.
pub fn run_and_emit(inv: &Invocation, csv: &mut dyn Write, summary: &mut dyn Write) -> Result<(), CliError> {
    let io_err = |source| CliError::Output {
        path: inv
            .output
            .as_ref()
            .map_or("<stdout>".into(), |p| p.display().to_string()),
        source,
    };
    writeln!(csv, "{CSV_HEADER}").map_err(io_err)?;
    let mut rows = Vec::new();
    match inv.sweep {
        Some(spec) if spec.parameter == SweepParam::Deadline => {
            for &policy in &inv.policies {
                let cfg = SimConfig {
                    policy,
                    ..inv.base.clone()
                };
                let frames = simulate_frames(&cfg)?;
                for t in spec.points() {
                    let at = spec.apply(&cfg, t, inv.max_transmissions);
                    let stats = ExperimentStats::from_frames(&frames, at.deadline);
                    let row = CsvRow::new(&at, &stats);
                    writeln!(csv, "{}", row.to_line()).map_err(io_err)?;
                    rows.push(row);
                }
            }
        }
        _ => {
            for cfg in inv.configs() {
                let row = CsvRow::new(&cfg, &run_experiment(&cfg)?);
                writeln!(csv, "{}", row.to_line()).map_err(io_err)?;
                rows.push(row);
            }
        }
    }
    csv.flush().map_err(io_err)?;
    write_summary(&rows, summary).map_err(io_err)
}

fn write_summary(rows: &[CsvRow], out: &mut dyn Write) -> io::Result<()> {
    writeln!(
        out,
        "{:<10} {:>5} {:>5} {:>9} {:>5} {:>12} {:>12} {:>9} {:>12}",
        "policy", "M", "N", "P", "T", "sum delay", "max delay", "served", "recovery tx"
    )?;
    for r in rows {
        writeln!(
            out,
            "{:<10} {:>5} {:>5} {:>9} {:>5} {:>12} {:>12} {:>9} {:>12}",
            r.policy.name(),
            r.receivers,
            r.packets,
            sig6(r.avg_erasure),
            r.deadline.to_string(),
            sig6(r.mean_sum_delay),
            sig6(r.mean_max_delay),
            sig6(r.mean_served_fraction),
            sig6(r.mean_recovery_transmissions),
        )?;
    }
    out.flush()
}

/// Opens the output and calls [`run_and_emit`]. With `--output` the summary
/// goes to stdout; otherwise the CSV takes stdout and the summary stderr.
pub fn execute(inv: &Invocation) -> Result<(), CliError> {
    match &inv.output {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Output {
                path: path.display().to_string(),
                source,
            })?;
            let mut csv = BufWriter::new(file);
            run_and_emit(inv, &mut csv, &mut io::stdout().lock())
        }
        None => run_and_emit(inv, &mut io::stdout().lock(), &mut io::stderr().lock()),
    }
}
