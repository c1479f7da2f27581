//! Command-line front end: `solve`, `distribute`, `sweep` and `verify`.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 verification failure,
//! 3 internal error.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph_state::{load_graph, GraphFamily, LabeledGraph};
use crate::noise_mc::{estimate_fidelity, write_results, NoiseModel, PauliFrame, ResultRow};
use crate::parallel::{parallel_distribute, ParallelConfig};
use crate::protocol::{
    baseline_factory, choose_hub, distribute, hub_system, DistributeOptions, HubChoice, OpKind, ResourceReport,
    Schedule,
};
use crate::sc_solver::{c2_report, solve, Method, ScSystem};
use crate::stabilizer_oracle::{Gate, Pauli, StabilizerTableau};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::TargetMismatch(_) | Error::SystemMismatch(_) => EXIT_VERIFY,
        Error::Parse(_)
        | Error::InvalidArgument(_)
        | Error::UnsupportedClass(_)
        | Error::UnknownVertex(_)
        | Error::SelfLoop(_)
        | Error::SizeLimitExceeded { .. }
        | Error::InsufficientAux { .. }
        | Error::InsufficientTargets { .. }
        | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Sc,
    ScParallel,
    Factory,
    FactoryParallel,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sc" => Ok(Protocol::Sc),
            "sc-parallel" => Ok(Protocol::ScParallel),
            "factory" => Ok(Protocol::Factory),
            "factory-parallel" => Ok(Protocol::FactoryParallel),
            other => Err(Error::Parse(format!(
                "unknown protocol `{other}` (sc|sc-parallel|factory|factory-parallel)"
            ))),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Sc => "sc",
            Protocol::ScParallel => "sc-parallel",
            Protocol::Factory => "factory",
            Protocol::FactoryParallel => "factory-parallel",
        })
    }
}

pub fn parse_hub(s: &str) -> Result<HubChoice> {
    match s {
        "auto" => Ok(HubChoice::Auto),
        "external" | "none" => Ok(HubChoice::External),
        v => v
            .parse()
            .map(HubChoice::Vertex)
            .map_err(|_| Error::Parse(format!("hub must be auto, external or a vertex id, got {v:?}"))),
    }
}

/// Everything needed to compile one schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildConfig {
    pub protocol: Protocol,
    pub method: Method,
    pub aux: Option<usize>,
    pub options: DistributeOptions,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            protocol: Protocol::Sc,
            method: Method::Best,
            aux: None,
            options: DistributeOptions::default(),
        }
    }
}

/// Solve, falling back to greedy when the requested method is too large.
pub fn solve_with_fallback(
    g: &LabeledGraph,
    hub: Option<usize>,
    method: Method,
    family: Option<&GraphFamily>,
    warn: &mut dyn Write,
) -> Result<ScSystem> {
    match hub_system(g, hub, method, family) {
        Err(e @ Error::SizeLimitExceeded { .. }) => {
            writeln!(warn, "warning: {e}; falling back to greedy")?;
            hub_system(g, hub, Method::Greedy, None)
        }
        other => other,
    }
}

pub fn build_schedule(
    g: &LabeledGraph,
    family: Option<&GraphFamily>,
    cfg: &BuildConfig,
    warn: &mut dyn Write,
) -> Result<(Schedule, ResourceReport)> {
    match cfg.protocol {
        Protocol::Factory => baseline_factory(g, false),
        Protocol::FactoryParallel => baseline_factory(g, true),
        Protocol::Sc | Protocol::ScParallel => {
            let hub = choose_hub(g, cfg.options.hub)?;
            let sys = solve_with_fallback(g, hub, cfg.method, family, warn)?;
            if cfg.protocol == Protocol::Sc {
                distribute(g, &sys, &cfg.options)
            } else {
                let pc = ParallelConfig {
                    aux_count: cfg.aux,
                    ..Default::default()
                };
                parallel_distribute(g, &sys, &pc, &cfg.options)
            }
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "gsdist", version, about = "Graph-state distribution over a star network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute an SC system and c2 bounds.
    Solve(SolveArgs),
    /// Compile a distribution schedule and print its resources.
    Distribute(DistributeArgs),
    /// Monte Carlo fidelity over a parameter grid.
    Sweep(SweepArgs),
    /// Oracle-equivalence suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct GraphArg {
    /// Generator string (e.g. `complete:6`) or edge-list file.
    #[arg(value_name = "GRAPH")]
    positional: Option<String>,
    #[arg(long = "graph", value_name = "GRAPH")]
    flag: Option<String>,
}

impl GraphArg {
    fn spec(&self) -> Result<&str> {
        self.flag
            .as_deref()
            .or(self.positional.as_deref())
            .ok_or_else(|| Error::InvalidArgument("a graph is required (positional or --graph)".into()))
    }
}

#[derive(Args, Debug)]
struct ScheduleArgs {
    #[arg(long, default_value = "auto")]
    method: String,
    /// Hub vertex: auto, external, or a vertex id.
    #[arg(long, default_value = "auto")]
    hub: String,
    /// Auxiliary qubits for sc-parallel.
    #[arg(long)]
    aux: Option<usize>,
    /// Full reset after every SC round, sets in system order.
    #[arg(long)]
    plain: bool,
}

impl ScheduleArgs {
    fn config(&self, protocol: Protocol) -> Result<BuildConfig> {
        let mut options = if self.plain {
            DistributeOptions::plain()
        } else {
            DistributeOptions::default()
        };
        options.hub = parse_hub(&self.hub)?;
        Ok(BuildConfig {
            protocol,
            method: self.method.parse()?,
            aux: self.aux,
            options,
        })
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, default_value = "auto")]
    method: String,
    /// Write the system here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DistributeArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, default_value = "sc")]
    protocol: String,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Schedule CSV path; stdout when absent (the report then goes to stderr).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Comma-separated protocols.
    #[arg(long = "protocol", alias = "protocols", value_delimiter = ',', default_value = "sc,factory")]
    protocols: Vec<String>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    pmem: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `p:START:END:POINTS` or `n:START:END:STEP`.
    #[arg(long)]
    vary: Option<String>,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    noise_on_measure: bool,
    /// Results CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out, err),
        Command::Distribute(a) => cmd_distribute(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (g, family) = load_graph(a.graph.spec()?)?;
    let method: Method = a.method.parse()?;
    let sys = match solve(&g, method, family.as_ref()) {
        Err(e @ Error::SizeLimitExceeded { .. }) => {
            writeln!(err, "warning: {e}; falling back to greedy")?;
            solve(&g, Method::Greedy, None)?
        }
        other => other?,
    };
    let report = c2_report(&g)?;
    match &a.out {
        Some(p) => create(p)?.write_all(sys.to_text().as_bytes())?,
        None => write!(out, "{}", sys.to_text())?,
    }
    let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
    writeln!(out, "# method {method}, provenance {}, d = {}", sys.provenance(), sys.len())?;
    writeln!(
        out,
        "# c2 lower {} ({}), upper {}, exact {}",
        report.lower,
        if report.lower_is_min_rank { "min-rank" } else { "cut-rank" },
        report.upper,
        report.exact.map_or("-".to_string(), |c| c.to_string())
    )?;
    if let Some(er) = report.avg_schmidt_rank {
        writeln!(out, "# mean cut-rank {er} ({:.4})", *er.numer() as f64 / *er.denom() as f64)?;
    }
    if let Some(class) = report.class {
        writeln!(out, "# class {class}")?;
    }
    let violations = report.violations();
    writeln!(out, "# c2 <= n - 1: {}", mark(report.upper < report.n.max(1)))?;
    if let (Some(c2), Some(er)) = (report.exact, report.avg_schmidt_rank) {
        if report.edges > 0 {
            writeln!(out, "# c2 > mean cut-rank: {}", mark(num_rational::Ratio::from_integer(c2 as u64) > er))?;
        }
    }
    for v in &violations {
        writeln!(err, "violation: {v}")?;
    }
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_distribute(a: &DistributeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (g, family) = load_graph(a.graph.spec()?)?;
    let cfg = a.schedule.config(a.protocol.parse()?)?;
    let (s, rep) = build_schedule(&g, family.as_ref(), &cfg, err)?;
    s.verify_graph()?;
    if s.qubits.len() <= crate::stabilizer_oracle::MAX_QUBITS {
        s.verify_oracle(&mut ChaCha8Rng::seed_from_u64(0))?;
    }
    let summary = format!("protocol {}\nn {}\n{rep}\n", s.protocol, g.vertex_count());
    match &a.out {
        Some(p) => {
            let mut f = create(p)?;
            s.write_csv(&mut f)?;
            f.flush()?;
            write!(out, "{summary}")?;
        }
        None => {
            s.write_csv(&mut *out)?;
            write!(err, "{summary}")?;
        }
    }
    Ok(EXIT_OK)
}

/// A sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    P(Vec<f64>),
    N(Vec<usize>),
}

pub fn parse_axis(s: &str) -> Result<Axis> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Parse(format!("bad --vary {s:?}; use p:START:END:POINTS or n:START:END:STEP"));
    if parts.len() != 4 {
        return Err(bad());
    }
    match parts[0] {
        "p" => {
            let lo: f64 = parts[1].parse().map_err(|_| bad())?;
            let hi: f64 = parts[2].parse().map_err(|_| bad())?;
            let points: usize = parts[3].parse().map_err(|_| bad())?;
            if points == 0 || hi < lo {
                return Err(bad());
            }
            let round = |x: f64| (x * 1e12).round() / 1e12;
            Ok(Axis::P(if points == 1 {
                vec![round(lo)]
            } else {
                (0..points).map(|i| round(lo + (hi - lo) * i as f64 / (points - 1) as f64)).collect()
            }))
        }
        "n" => {
            let lo: usize = parts[1].parse().map_err(|_| bad())?;
            let hi: usize = parts[2].parse().map_err(|_| bad())?;
            let step: usize = parts[3].parse().map_err(|_| bad())?;
            if step == 0 || hi < lo {
                return Err(bad());
            }
            Ok(Axis::N((lo..=hi).step_by(step).collect()))
        }
        _ => Err(bad()),
    }
}

/// Graph spec for size `n`: `{n}` and `{h}` (n / 2) placeholders, or a bare
/// family name (`bipartite` splits evenly).
pub fn graph_spec_for(template: &str, n: usize) -> Result<String> {
    if template.contains('{') {
        return Ok(template.replace("{n}", &n.to_string()).replace("{h}", &(n / 2).to_string()));
    }
    match template {
        "complete" | "ghz" => Ok(format!("complete:{n}")),
        "bipartite" => Ok(format!("bipartite:{},{}", n / 2, n - n / 2)),
        "path" | "cycle" | "star" | "wheel" => Ok(format!("{template}:{n}")),
        _ => Err(Error::Parse(format!(
            "cannot size {template:?}; use a family name or a template with {{n}}"
        ))),
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let template = a.graph.spec()?;
    let protocols: Vec<Protocol> = a.protocols.iter().map(|p| p.parse()).collect::<Result<_>>()?;
    if a.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be at least 1".into()));
    }
    let axis = match &a.vary {
        Some(v) => parse_axis(v)?,
        None => Axis::P(vec![a.p]),
    };
    let points: Vec<(f64, String, NoiseModel)> = match &axis {
        Axis::P(ps) => ps
            .iter()
            .map(|&p| Ok((p, template.to_string(), model(p, a)?)))
            .collect::<Result<_>>()?,
        Axis::N(ns) => ns
            .iter()
            .map(|&n| Ok((n as f64, graph_spec_for(template, n)?, model(a.p, a)?)))
            .collect::<Result<_>>()?,
    };
    let mut rows = Vec::new();
    let mut series: Vec<(String, Vec<(f64, f64)>)> = protocols.iter().map(|p| (p.to_string(), Vec::new())).collect();
    for (x, spec, m) in &points {
        let (g, family) = load_graph(spec)?;
        for (i, &protocol) in protocols.iter().enumerate() {
            let cfg = a.schedule.config(protocol)?;
            let (s, rep) = build_schedule(&g, family.as_ref(), &cfg, err)?;
            let est = estimate_fidelity(&s, m, a.trials, a.seed)?;
            series[i].1.push((*x, est.mean));
            rows.push(ResultRow {
                protocol: protocol.to_string(),
                n: g.vertex_count(),
                model: *m,
                estimate: est,
                resources: rep,
            });
        }
    }
    match &a.out {
        Some(p) => {
            let mut f = create(p)?;
            write_results(&rows, &mut f)?;
            f.flush()?;
        }
        None => write_results(&rows, &mut *out)?,
    }
    if let Some(path) = &a.svg {
        let xlabel = match axis {
            Axis::P(_) => "p",
            Axis::N(_) => "n",
        };
        let mut f = create(path)?;
        f.write_all(render_svg(&series, xlabel, template).as_bytes())?;
        f.flush()?;
    }
    Ok(EXIT_OK)
}

fn model(p: f64, a: &SweepArgs) -> Result<NoiseModel> {
    let m = NoiseModel {
        p_gate: p,
        p_mem: a.pmem,
        noise_on_measure: a.noise_on_measure,
    };
    m.validate()?;
    Ok(m)
}

const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf"];

/// Line plot of fidelity against the swept parameter, with a red reference
/// line at 0.75.
pub fn render_svg(series: &[(String, Vec<(f64, f64)>)], xlabel: &str, title: &str) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 60.0);
    let xs = series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.0));
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let ymin = series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.1)).fold(1.0f64, f64::min);
    let y0 = ((ymin * 10.0).floor() / 10.0).clamp(0.0, 0.7);
    let y1 = 1.0;
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| top + (y1 - y) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    s += &format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n");
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += &format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        (left + w - right) / 2.0,
        escape(title)
    );
    s += &format!(
        "<line x1=\"{left}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        h - bottom,
        w - right,
        h - bottom
    );
    s += &format!("<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{:.1}\" stroke=\"black\"/>\n", h - bottom);
    for i in 0..=5 {
        let x = x0 + (x1 - x0) * i as f64 / 5.0;
        let y = y0 + (y1 - y0) * i as f64 / 5.0;
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            px(x),
            h - bottom + 16.0,
            tick(x)
        );
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.2}</text>\n",
            left - 6.0,
            py(y) + 4.0,
            y
        );
    }
    s += &format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{xlabel}</text>\n",
        (left + w - right) / 2.0,
        h - 20.0
    );
    s += &format!(
        "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">fidelity</text>\n",
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0
    );
    s += &format!(
        "<line x1=\"{left}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"red\" stroke-dasharray=\"6 4\"/>\n",
        py(0.75),
        w - right,
        py(0.75)
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        s += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            path.join(" ")
        );
        for &(x, y) in pts {
            s += &format!("<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"{color}\"/>\n", px(x), py(y));
        }
        let ly = top + 16.0 * i as f64 + 8.0;
        s += &format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            w - right + 12.0,
            w - right + 32.0
        );
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            w - right + 38.0,
            ly + 4.0,
            escape(name)
        );
    }
    s += "</svg>\n";
    s
}

fn tick(x: f64) -> String {
    if x == x.round() && x.abs() >= 1.0 {
        format!("{x:.0}")
    } else {
        let t = format!("{x:.4}");
        t.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Graph rule under test in the verification suites.
pub type LcRule = fn(&mut LabeledGraph, usize) -> Result<()>;

fn standard_lc(g: &mut LabeledGraph, v: usize) -> Result<()> {
    g.local_complement(v)
}

/// Outcome of the verification suites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub lines: Vec<String>,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn edge_list(g: &LabeledGraph) -> String {
    let e: Vec<String> = g.edges().map(|(a, b)| format!("{a}-{b}")).collect();
    format!("n={} edges=[{}]", g.vertex_count(), e.join(" "))
}

/// Graph rules, compiled schedules and Pauli frames against the oracle.
/// Sample `i` of each suite uses seed `seed + i`.
pub fn verify_suites(n_max: usize, samples: usize, seed: u64, lc_rule: LcRule) -> Result<VerifyReport> {
    if !(2..=10).contains(&n_max) {
        return Err(Error::InvalidArgument(format!("--n-max must be in 2..=10, got {n_max}")));
    }
    let mut report = VerifyReport {
        lines: Vec::new(),
        failures: Vec::new(),
    };

    let mut ok = 0;
    for i in 0..samples {
        let s = seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let n = rng.gen_range(2..=n_max);
        let start = crate::graph_state::random_graph(n, 0.5, rng.gen())?;
        match graph_rule_sample(&start, lc_rule, &mut rng) {
            Ok(true) => ok += 1,
            Ok(false) => report.failures.push(format!("graph-rules seed={s} {}", edge_list(&start))),
            Err(e) => report.failures.push(format!("graph-rules seed={s} {}: {e}", edge_list(&start))),
        }
    }
    report.lines.push(format!("graph-rules {ok}/{samples}"));

    let protocols = [Protocol::Sc, Protocol::ScParallel, Protocol::Factory, Protocol::FactoryParallel];
    let methods = [Method::Greedy, Method::Elimination, Method::Best];
    let mut ok = 0;
    for i in 0..samples {
        let s = seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let n = rng.gen_range(2..=n_max);
        let g = crate::graph_state::random_graph(n, 0.5, rng.gen())?;
        let cfg = BuildConfig {
            protocol: protocols[i % protocols.len()],
            method: methods[rng.gen_range(0..methods.len())],
            ..Default::default()
        };
        let res = build_schedule(&g, None, &cfg, &mut std::io::sink()).and_then(|(sch, _)| sch.verify_oracle(&mut rng));
        match res {
            Ok(()) => ok += 1,
            Err(e) => report
                .failures
                .push(format!("schedules seed={s} protocol={} {}: {e}", cfg.protocol, edge_list(&g))),
        }
    }
    report.lines.push(format!("schedules {ok}/{samples}"));

    let mut ok = 0;
    let mut ops = 0;
    for i in 0..samples {
        let s = seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let n = rng.gen_range(2..=n_max.min(8));
        let g = crate::graph_state::random_graph(n, 0.5, rng.gen())?;
        let cfg = BuildConfig {
            protocol: protocols[i % protocols.len()],
            method: Method::Greedy,
            ..Default::default()
        };
        let (sch, _) = build_schedule(&g, None, &cfg, &mut std::io::sink())?;
        ops += sch.ops().count();
        match frame_sample(&sch, &mut rng) {
            Ok(true) => ok += 1,
            Ok(false) => report
                .failures
                .push(format!("frames seed={s} protocol={} {}", cfg.protocol, edge_list(&g))),
            Err(e) => report
                .failures
                .push(format!("frames seed={s} protocol={} {}: {e}", cfg.protocol, edge_list(&g))),
        }
    }
    report.lines.push(format!("frames {ok}/{samples} ({ops} ops)"));
    Ok(report)
}

/// Random CZ, LC, Z and Y measurements on the graph and the oracle.
fn graph_rule_sample(start: &LabeledGraph, lc_rule: LcRule, rng: &mut ChaCha8Rng) -> Result<bool> {
    let mut g = start.clone();
    let mut t = StabilizerTableau::from_graph(start)?;
    for _ in 0..3 * start.vertex_count() {
        let live: Vec<usize> = g.vertices().collect();
        let v = live[rng.gen_range(0..live.len())];
        match rng.gen_range(0..4) {
            0 if live.len() >= 2 => {
                let w = live[rng.gen_range(0..live.len())];
                if w != v {
                    g.toggle_edge(v, w)?;
                    t.apply_gate(Gate::Cz(v, w))?;
                }
            }
            1 => {
                lc_rule(&mut g, v)?;
                t.apply_gate(Gate::Lc(v))?;
            }
            2 if live.len() > 2 => {
                g.remove_vertex(v)?;
                t.measure_z_corrected(v, rng)?;
            }
            3 if live.len() > 2 => {
                lc_rule(&mut g, v)?;
                g.remove_vertex(v)?;
                t.measure_y_corrected(v, rng)?;
            }
            _ => {}
        }
    }
    t.stabilizer_equal(&StabilizerTableau::from_graph(&g)?)
}

/// Random Paulis injected around every op, tracked as a frame and applied
/// as gates on the oracle.
fn frame_sample(s: &Schedule, rng: &mut ChaCha8Rng) -> Result<bool> {
    let mut frame = PauliFrame::new(s.qubits.iter().copied());
    let mut t = StabilizerTableau::plus_state(s.qubits.iter().copied())?;
    let mut outcomes = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut inject = |frame: &mut PauliFrame, t: &mut StabilizerTableau, op: &crate::protocol::GateOp| -> Result<()> {
        if op.kind == OpKind::BellPrep {
            return Ok(());
        }
        for q in op.support() {
            if rng.gen_bool(0.3) {
                let p = [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)];
                frame.inject(p, q)?;
                t.apply_gate(Gate::Pauli(p, q))?;
            }
        }
        Ok(())
    };
    for op in s.ops() {
        if op.kind.is_measurement() {
            inject(&mut frame, &mut t, op)?;
        }
        frame.frame_update(op)?;
        for p in op.lower() {
            p.apply_oracle(&mut t, &mut outcomes)?;
        }
        if !op.kind.is_measurement() {
            inject(&mut frame, &mut t, op)?;
        }
    }
    let mut expect = StabilizerTableau::from_graph(&frame.graph)?;
    for q in frame.flipped() {
        expect.apply_gate(Gate::Pauli(Pauli::Z, q))?;
    }
    Ok(frame.graph == s.target && t.stabilizer_equal(&expect)?)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let report = verify_suites(a.n_max, a.samples, a.seed, standard_lc)?;
    print_verify(&report, out)
}

pub fn print_verify(report: &VerifyReport, out: &mut dyn Write) -> Result<i32> {
    for l in &report.lines {
        writeln!(out, "{l}")?;
    }
    for f in &report.failures {
        writeln!(out, "FAIL {f}")?;
    }
    writeln!(out, "{}", if report.passed() { "all suites pass" } else { "verification failed" })?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
}
