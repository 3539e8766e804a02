//! Command-line front end.
//!
//! Every command produces a [`Table`], written as CSV (default) or JSON to
//! stdout or `--out`. A `--config` file of `key=value` lines supplies
//! defaults for any flag of the chosen subcommand; flags given on the
//! command line take precedence.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 usage error, 3 domain
//! error, 4 unwritable output.

mod emit;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use emit::{emit, fmt_num, to_csv, to_json, Cell, Format, Table, INF};

use crate::bounds::{
    bound_cv, corrected_pipeline, flux_dv, sc_bound, BoundResult, StrongConverseParams, StrongConverseVariant,
};
use crate::channels::{CanonicalForm, DVChannelSpec};
use crate::qkd::{db_to_eta, sweep_thresholds, PROTOCOLS};
use crate::selftest;
use crate::telesim::{convergence_diagnostic, peel, sim_error_budget};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_OUTPUT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "qcap",
    version,
    about = "Capacity bounds, Gaussian entropies, teleportation-simulation budgets and CV-QKD thresholds",
    args_override_self = true
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// File of `key=value` lines supplying defaults for flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Flux bound (or capacity) of one channel.
    Bound(ChannelArgs),
    /// Two-way capacity of a distillable channel.
    Capacity(ChannelArgs),
    /// Bounds of one or more channels over a grid of one parameter.
    Sweep(SweepArgs),
    /// Security thresholds of all QKD protocols over a loss grid.
    QkdThresholds(QkdArgs),
    /// Finite-n strong-converse bound, optionally with a simulation budget.
    StrongConverse(StrongConverseArgs),
    /// Teleportation-simulation error, budget and convergence matrix.
    SimError(SimErrorArgs),
    /// Run the verification suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Default, Args)]
struct ChannelParams {
    /// Transmissivity.
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Mean thermal photon number.
    #[arg(long, allow_negative_numbers = true)]
    nbar: Option<f64>,
    /// Amplifier gain.
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Added noise of the additive-noise channel.
    #[arg(long, allow_negative_numbers = true)]
    xi: Option<f64>,
    /// Error probability of a qubit channel.
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// Pauli probabilities `p0,p1,p2,p3`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    probs: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// pure-loss, thermal-loss, amplifier, ql-amplifier, additive-noise,
    /// identity, b1, pauli, depolarizing, dephasing, erasure or
    /// amplitude-damping.
    #[arg(long)]
    channel: String,
    #[command(flatten)]
    params: ChannelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scale {
    Linear,
    Log,
    /// Grid in dB of loss; the swept parameter must be `eta`.
    Db,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated channel names, one output column each.
    #[arg(long, value_delimiter = ',', required = true)]
    channel: Vec<String>,
    /// Swept parameter: eta, nbar, g, xi or p.
    #[arg(long)]
    param: String,
    /// `start:stop:steps`.
    #[arg(long)]
    grid: String,
    #[arg(long, value_enum, default_value_t = Scale::Linear)]
    scale: Scale,
    #[command(flatten)]
    params: ChannelParams,
}

#[derive(Debug, Args)]
struct QkdArgs {
    /// Loss grid in dB, `start:stop:steps`.
    #[arg(long, default_value = "0:30:61")]
    db: String,
    /// Append solver diagnostics columns.
    #[arg(long)]
    diagnostics: bool,
}

#[derive(Debug, Args)]
struct StrongConverseArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Number of channel uses.
    #[arg(long)]
    n: u64,
    /// Security parameter.
    #[arg(long, allow_negative_numbers = true)]
    eps: f64,
    #[arg(long, default_value = "chebyshev")]
    variant: String,
    /// Simulation energy; enables the corrected pipeline.
    #[arg(long, allow_negative_numbers = true, requires = "n_photons")]
    mu: Option<f64>,
    /// Total mean photon number of the energy constraint.
    #[arg(long, allow_negative_numbers = true, requires = "mu")]
    n_photons: Option<f64>,
}

#[derive(Debug, Args)]
struct SimErrorArgs {
    #[arg(long, default_value = "identity")]
    channel: String,
    #[command(flatten)]
    params: ChannelParams,
    /// Simulation energy.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "mu_grid")]
    mu: Option<f64>,
    /// Log-spaced simulation energies, `start:stop:steps`.
    #[arg(long)]
    mu_grid: Option<String>,
    /// Total mean photon number of the energy constraint.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    n_photons: f64,
    /// Channel uses for the peeled budget (with `--eps`).
    #[arg(long, requires = "eps")]
    n_uses: Option<u64>,
    #[arg(long, allow_negative_numbers = true, requires = "n_uses")]
    eps: Option<f64>,
    /// Emit the infidelity matrix over `--mu-grid` × `--mu-in-grid`.
    #[arg(long, requires_all = ["mu_grid", "mu_in_grid"])]
    matrix: bool,
    /// Log-spaced input energies for `--matrix`, `start:stop:steps`.
    #[arg(long)]
    mu_in_grid: Option<String>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Run only this suite.
    #[arg(long)]
    suite: Option<u32>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(crate::Error),
    Output(String),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Run the CLI on `argv` (including the program name) and return the exit
/// code.
pub fn run(argv: &[String]) -> i32 {
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => return report(e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (table, code) = match dispatch(&cli.command) {
        Ok(t) => t,
        Err(e) => return report(e),
    };
    match write_output(&emit(&table, cli.format), cli.out.as_deref()) {
        Ok(()) => code,
        Err(e) => report(e),
    }
}

/// The bytes `run` would write for `argv`, or its exit code on failure.
/// `--out` is ignored.
pub fn render(argv: &[String]) -> std::result::Result<Vec<u8>, i32> {
    let argv = merge_config(argv).map_err(report)?;
    let cli = Cli::try_parse_from(&argv).map_err(|e| if e.use_stderr() { EXIT_USAGE } else { EXIT_OK })?;
    let (table, _) = dispatch(&cli.command).map_err(report)?;
    Ok(emit(&table, cli.format))
}

fn report(e: CliError) -> i32 {
    match e {
        CliError::Usage(m) => {
            eprintln!("error: {m}\n\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        CliError::Domain(err) => {
            eprintln!("error: {err}");
            EXIT_DOMAIN
        }
        CliError::Output(m) => {
            eprintln!("error: {m}");
            EXIT_OUTPUT
        }
    }
}

fn write_output(bytes: &[u8], out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::Output(format!("cannot write to stdout: {e}"))),
    }
}

const SUBCOMMANDS: [&str; 7] = [
    "bound",
    "capacity",
    "sweep",
    "qkd-thresholds",
    "strong-converse",
    "sim-error",
    "selftest",
];
const VALUE_GLOBALS: [&str; 3] = ["--format", "--out", "--config"];
const BOOL_KEYS: [&str; 2] = ["diagnostics", "matrix"];

/// Splice `--key value` pairs from the config file in front of the
/// subcommand's own flags, so that later (command-line) occurrences win.
fn merge_config(argv: &[String]) -> CliResult<Vec<String>> {
    let mut path = None;
    let mut sub_at = None;
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if a == "--config" {
            path = argv.get(i + 1).cloned();
            i += 1;
        } else if VALUE_GLOBALS.contains(&a.as_str()) {
            i += 1;
        } else if sub_at.is_none() && SUBCOMMANDS.contains(&a.as_str()) {
            sub_at = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub_at)) = (path, sub_at) else {
        return Ok(argv.to_vec());
    };
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{path}:{}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key == "config" {
            return Err(usage(format!("{path}:{}: invalid key '{key}'", lineno + 1)));
        }
        if BOOL_KEYS.contains(&key) {
            match value {
                "true" => extra.push(format!("--{key}")),
                "false" => {}
                _ => return Err(usage(format!("{path}:{}: {key} must be true or false", lineno + 1))),
            }
        } else {
            extra.push(format!("--{key}={value}"));
        }
    }
    let mut merged = argv[..=sub_at].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[sub_at + 1..]);
    Ok(merged)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Channel {
    Cv(CanonicalForm),
    Dv(DVChannelSpec),
}

impl Channel {
    fn bound(&self) -> crate::Result<BoundResult> {
        match self {
            Channel::Cv(f) => bound_cv(f),
            Channel::Dv(d) => flux_dv(d),
        }
    }
}

fn build_channel(name: &str, p: &ChannelParams, strict: bool) -> CliResult<Channel> {
    let need =
        |value: Option<f64>, flag: &str| value.ok_or_else(|| usage(format!("channel '{name}' requires --{flag}")));
    let (channel, used): (Channel, &[&str]) = match name {
        "pure-loss" => (
            Channel::Cv(CanonicalForm::PureLoss {
                eta: need(p.eta, "eta")?,
            }),
            &["eta"],
        ),
        "thermal-loss" => (
            Channel::Cv(CanonicalForm::ThermalLoss {
                eta: need(p.eta, "eta")?,
                nbar: need(p.nbar, "nbar")?,
            }),
            &["eta", "nbar"],
        ),
        "amplifier" => (
            Channel::Cv(CanonicalForm::Amplifier {
                g: need(p.g, "g")?,
                nbar: need(p.nbar, "nbar")?,
            }),
            &["g", "nbar"],
        ),
        "ql-amplifier" => (Channel::Cv(CanonicalForm::QLimAmplifier { g: need(p.g, "g")? }), &["g"]),
        "additive-noise" => (
            Channel::Cv(CanonicalForm::AdditiveNoise { xi: need(p.xi, "xi")? }),
            &["xi"],
        ),
        "identity" => (Channel::Cv(CanonicalForm::Identity), &[]),
        "b1" => (Channel::Cv(CanonicalForm::B1Form), &[]),
        "depolarizing" => (Channel::Dv(DVChannelSpec::Depolarizing(need(p.p, "p")?)), &["p"]),
        "dephasing" => (Channel::Dv(DVChannelSpec::Dephasing(need(p.p, "p")?)), &["p"]),
        "erasure" => (Channel::Dv(DVChannelSpec::Erasure(need(p.p, "p")?)), &["p"]),
        "amplitude-damping" => (Channel::Dv(DVChannelSpec::AmplitudeDamping(need(p.p, "p")?)), &["p"]),
        "pauli" => {
            let probs = p
                .probs
                .as_ref()
                .ok_or_else(|| usage("channel 'pauli' requires --probs p0,p1,p2,p3"))?;
            let arr: [f64; 4] = probs
                .as_slice()
                .try_into()
                .map_err(|_| usage(format!("--probs needs 4 values, got {}", probs.len())))?;
            (Channel::Dv(DVChannelSpec::Pauli(arr)), &["probs"])
        }
        other => return Err(usage(format!("unknown channel '{other}'"))),
    };
    if strict {
        let given = [
            ("eta", p.eta.is_some()),
            ("nbar", p.nbar.is_some()),
            ("g", p.g.is_some()),
            ("xi", p.xi.is_some()),
            ("p", p.p.is_some()),
            ("probs", p.probs.is_some()),
        ];
        if let Some((flag, _)) = given.iter().find(|(f, set)| *set && !used.contains(f)) {
            return Err(usage(format!("--{flag} does not apply to channel '{name}'")));
        }
    }
    Ok(channel)
}

fn channel_params(t: &mut Table, name: &str, p: &ChannelParams) {
    t.param("channel", name);
    for (k, v) in [("eta", p.eta), ("nbar", p.nbar), ("g", p.g), ("xi", p.xi), ("p", p.p)] {
        if let Some(v) = v {
            t.param(k, v);
        }
    }
    if let Some(ps) = &p.probs {
        t.param("probs", ps.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(","));
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Grid {
    start: f64,
    stop: f64,
    steps: usize,
}

impl Grid {
    fn parse(flag: &str, spec: &str, min_steps: usize) -> CliResult<Self> {
        let bad = || usage(format!("--{flag} expects start:stop:steps, got '{spec}'"));
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let start: f64 = a.trim().parse().map_err(|_| bad())?;
        let stop: f64 = b.trim().parse().map_err(|_| bad())?;
        let steps: usize = n.trim().parse().map_err(|_| bad())?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        if steps < min_steps {
            return Err(usage(format!("--{flag} needs at least {min_steps} steps, got {steps}")));
        }
        Ok(Self { start, stop, steps })
    }

    fn linear(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                let t = k as f64 / last;
                if k + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * t
                }
            })
            .collect()
    }

    fn log(&self) -> crate::Result<Vec<f64>> {
        if !(self.start > 0.0 && self.stop > 0.0) {
            return Err(crate::error::invalid(format!(
                "log grid needs positive endpoints, got {}:{}",
                self.start, self.stop
            )));
        }
        let g = Grid {
            start: self.start.log10(),
            stop: self.stop.log10(),
            steps: self.steps,
        };
        let mut v: Vec<f64> = g.linear().into_iter().map(|e| 10f64.powf(e)).collect();
        // exact endpoints
        v[0] = self.start;
        if let Some(last) = v.last_mut() {
            *last = self.stop;
        }
        Ok(v)
    }
}

fn dispatch(cmd: &Command) -> CliResult<(Table, i32)> {
    let table = match cmd {
        Command::Bound(a) => cmd_bound(a, "bound")?,
        Command::Capacity(a) => cmd_bound(a, "capacity")?,
        Command::Sweep(a) => cmd_sweep(a)?,
        Command::QkdThresholds(a) => cmd_qkd(a)?,
        Command::StrongConverse(a) => cmd_strong_converse(a)?,
        Command::SimError(a) => cmd_sim_error(a)?,
        Command::Selftest(a) => return cmd_selftest(a),
    };
    Ok((table, EXIT_OK))
}

fn bound_table(command: &str, r: &BoundResult) -> Table {
    let mut columns: Vec<String> = [
        "channel",
        "value",
        "kind",
        "formula_id",
        "zero_clamped",
        "hierarchy",
        "residual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    columns.extend(r.params.keys().cloned());
    let mut t = Table::new(command, columns);
    let mut row = vec![
        Cell::from(r.channel.clone()),
        Cell::Num(r.value.as_f64()),
        r.kind.as_str().into(),
        r.formula_id.into(),
        r.zero_clamped.into(),
        r.hierarchy.unwrap_or("").into(),
        r.residual.unwrap_or("").into(),
    ];
    row.extend(r.params.values().map(|&v| Cell::Num(v)));
    t.push(row);
    t
}

fn cmd_bound(a: &ChannelArgs, command: &str) -> CliResult<Table> {
    let ch = build_channel(&a.channel, &a.params, true)?;
    let r = ch.bound()?;
    if command == "capacity" && r.kind != crate::BoundKind::Capacity {
        return Err(CliError::Domain(crate::Error::Domain(format!(
            "{} is not distillable: only a {} bound is known (use `bound`)",
            r.channel, r.kind
        ))));
    }
    let mut t = bound_table(command, &r);
    channel_params(&mut t, &a.channel, &a.params);
    Ok(t)
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<Table> {
    let grid = Grid::parse("grid", &a.grid, 2)?;
    if !["eta", "nbar", "g", "xi", "p"].contains(&a.param.as_str()) {
        return Err(usage(format!(
            "cannot sweep '{}' (expected eta, nbar, g, xi or p)",
            a.param
        )));
    }
    if a.scale == Scale::Db && a.param != "eta" {
        return Err(usage("--scale db applies only to --param eta"));
    }
    let xs = match a.scale {
        Scale::Linear | Scale::Db => grid.linear(),
        Scale::Log => grid.log()?,
    };
    let first = if a.scale == Scale::Db {
        "loss_db".to_string()
    } else {
        a.param.clone()
    };
    let mut columns = vec![first];
    columns.extend(a.channel.iter().cloned());
    let mut t = Table::new("sweep", columns);
    t.param("param", a.param.as_str());
    t.param("grid", a.grid.as_str());
    t.param("scale", format!("{:?}", a.scale).to_lowercase());
    for x in xs {
        let value = if a.scale == Scale::Db { db_to_eta(x) } else { x };
        let mut p = a.params.clone();
        match a.param.as_str() {
            "eta" => p.eta = Some(value),
            "nbar" => p.nbar = Some(value),
            "g" => p.g = Some(value),
            "xi" => p.xi = Some(value),
            _ => p.p = Some(value),
        }
        let mut row = vec![Cell::Num(x)];
        for name in &a.channel {
            let r = build_channel(name, &p, false)?.bound()?;
            row.push(Cell::Num(r.value.as_f64()));
        }
        t.push(row);
    }
    for (k, v) in [
        ("eta", a.params.eta),
        ("nbar", a.params.nbar),
        ("g", a.params.g),
        ("xi", a.params.xi),
        ("p", a.params.p),
    ] {
        if let (Some(v), true) = (v, k != a.param) {
            t.param(k, v);
        }
    }
    Ok(t)
}

fn cmd_qkd(a: &QkdArgs) -> CliResult<Table> {
    let grid = Grid::parse("db", &a.db, 2)?;
    let curves = sweep_thresholds(&grid.linear())?;
    let mut columns = vec!["loss_db".to_string()];
    columns.extend(PROTOCOLS.iter().map(|s| s.to_string()));
    if a.diagnostics {
        columns.extend(
            [
                "eta",
                "eta_clamped",
                "eps_inf_residual",
                "eps_inf_monotone",
                "max_residual",
                "multiple_roots",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
    }
    let mut t = Table::new("qkd-thresholds", columns);
    t.param("db", a.db.as_str());
    let n = curves[0].points.len();
    for i in 0..n {
        let p0 = curves[0].points[i];
        let mut row = vec![Cell::Num(p0.loss_db)];
        row.extend(curves.iter().map(|c| Cell::Num(c.points[i].excess_noise)));
        if a.diagnostics {
            let inf = curves[2].points[i];
            let max_res = curves
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != 2)
                .map(|(_, c)| c.points[i].residual)
                .fold(0.0, f64::max);
            row.extend([
                Cell::Num(p0.eta),
                p0.eta_clamped.into(),
                Cell::Num(inf.residual),
                (!inf.non_monotone).into(),
                Cell::Num(max_res),
                curves.iter().any(|c| c.points[i].multiple_roots).into(),
            ]);
        }
        t.push(row);
    }
    let flagged = |f: fn(&crate::qkd::ThresholdPoint) -> bool| {
        curves.iter().flat_map(|c| c.points.iter()).filter(|p| f(p)).count() as u64
    };
    t.param(
        "eta_clamped_points",
        flagged(|p| p.eta_clamped) / PROTOCOLS.len() as u64,
    );
    t.param("multiple_root_points", flagged(|p| p.multiple_roots));
    t.param("non_monotone_points", flagged(|p| p.non_monotone));
    Ok(t)
}

fn cmd_strong_converse(a: &StrongConverseArgs) -> CliResult<Table> {
    let variant: StrongConverseVariant = a.variant.parse().map_err(|e: crate::Error| usage(e.to_string()))?;
    let ch = build_channel(&a.channel.channel, &a.channel.params, true)?;
    let Channel::Cv(form) = ch else {
        return Err(usage(
            "strong-converse bounds are implemented for bosonic channels only",
        ));
    };
    let mut t = match (a.mu, a.n_photons) {
        (Some(mu), Some(n_photons)) => {
            if variant != StrongConverseVariant::Chebyshev {
                return Err(usage("the corrected pipeline (--mu) uses the chebyshev variant"));
            }
            let (r, budget) = corrected_pipeline(&form, a.n, a.eps, mu, n_photons)?;
            let mut t = bound_table("strong-converse", &r);
            t.columns.push("saturated".into());
            t.rows[0].push(budget.saturated().into());
            t
        }
        _ => {
            let params = StrongConverseParams::for_form(&form, a.n, a.eps, variant)?;
            bound_table("strong-converse", &sc_bound(&form, &params)?)
        }
    };
    channel_params(&mut t, &a.channel.channel, &a.channel.params);
    t.param("variant", variant.as_str());
    Ok(t)
}

fn cmd_sim_error(a: &SimErrorArgs) -> CliResult<Table> {
    let ch = build_channel(&a.channel, &a.params, true)?;
    let Channel::Cv(form) = ch else {
        return Err(usage("teleportation simulation applies to bosonic channels only"));
    };
    if a.matrix {
        let mus = Grid::parse("mu-grid", a.mu_grid.as_deref().unwrap_or_default(), 1)?.log()?;
        let mts = Grid::parse("mu-in-grid", a.mu_in_grid.as_deref().unwrap_or_default(), 1)?.log()?;
        let rep = convergence_diagnostic(&mus, &mts)?;
        let mut columns = vec!["mu".to_string()];
        columns.extend(mts.iter().map(|m| format!("mu_in={}", fmt_num(*m))));
        let mut t = Table::new("sim-error", columns);
        for (mu, row) in mus.iter().zip(rep.infidelity.iter()) {
            let mut cells = vec![Cell::Num(*mu)];
            cells.extend(row.iter().map(|&x| Cell::Num(x)));
            t.push(cells);
        }
        t.param("quantity", "infidelity");
        if let Some(k) = rep.fitted_decay_exponent {
            t.param("fitted_decay_exponent", k);
        }
        return Ok(t);
    }
    let mus = match (&a.mu_grid, a.mu) {
        (Some(g), _) => Grid::parse("mu-grid", g, 1)?.log()?,
        (None, Some(mu)) => vec![mu],
        (None, None) => return Err(usage("sim-error requires --mu or --mu-grid")),
    };
    let mut columns: Vec<String> = ["mu", "n_photons", "delta"].iter().map(|s| s.to_string()).collect();
    if a.n_uses.is_some() {
        columns.extend(
            ["n_uses", "security_eps", "eps_tp", "eps_composed", "saturated"]
                .iter()
                .map(|s| s.to_string()),
        );
    }
    let mut t = Table::new("sim-error", columns);
    for mu in mus {
        let delta = sim_error_budget(&form, mu, a.n_photons)?;
        let mut row = vec![Cell::Num(mu), Cell::Num(a.n_photons), Cell::Num(delta)];
        if let (Some(n), Some(eps)) = (a.n_uses, a.eps) {
            let b = peel(n, delta, eps)?;
            row.extend([
                Cell::Int(n),
                Cell::Num(eps),
                Cell::Num(b.eps_tp),
                Cell::Num(b.eps_composed),
                b.saturated().into(),
            ]);
        }
        t.push(row);
    }
    channel_params(&mut t, &a.channel, &a.params);
    Ok(t)
}

fn cmd_selftest(a: &SelftestArgs) -> CliResult<(Table, i32)> {
    let reports = match a.suite {
        Some(id) => vec![selftest::run_suite(id).ok_or_else(|| usage(format!("no suite {id}")))?],
        None => selftest::run_all(),
    };
    let mut t = Table::new(
        "selftest",
        ["suite", "name", "check", "passed", "detail"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for r in &reports {
        for c in &r.checks {
            t.push(vec![
                Cell::Int(r.id as u64),
                r.name.into(),
                c.label.clone().into(),
                c.passed.into(),
                c.detail.clone().into(),
            ]);
        }
    }
    let passed = reports.iter().all(|r| r.passed());
    t.param("suites", reports.len() as u64);
    t.param("passed", passed);
    Ok((t, if passed { EXIT_OK } else { EXIT_SELFTEST_FAILED }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("qcap")
            .chain(s.split_whitespace())
            .map(String::from)
            .collect()
    }

    #[test]
    fn grid_parsing() {
        let g = Grid::parse("db", "0:30:61", 2).unwrap();
        let v = g.linear();
        assert_eq!(v.len(), 61);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[60], 30.0);
        assert_eq!(v[1], 0.5);
        assert!(Grid::parse("db", "0:30", 2).is_err());
        assert!(Grid::parse("db", "0:30:1", 2).is_err());
        assert!(Grid::parse("db", "a:30:3", 2).is_err());
        let l = Grid::parse("mu", "1:1000:4", 1).unwrap().log().unwrap();
        assert_eq!(l[0], 1.0);
        assert_eq!(l[3], 1000.0);
        assert!((l[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn channel_construction() {
        let p = ChannelParams {
            eta: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(build_channel("pure-loss", &p, true), Ok(Channel::Cv(_))));
        assert!(matches!(
            build_channel("thermal-loss", &p, true),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(build_channel("warp-drive", &p, true), Err(CliError::Usage(_))));
        assert!(matches!(build_channel("identity", &p, true), Err(CliError::Usage(_))));
        assert!(build_channel("identity", &p, false).is_ok());
        let p = ChannelParams {
            probs: Some(vec![0.7, 0.1, 0.1]),
            ..Default::default()
        };
        assert!(matches!(build_channel("pauli", &p, true), Err(CliError::Usage(_))));
    }

    #[test]
    fn config_is_spliced_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.conf");
        std::fs::write(&cfg, "# defaults\nchannel = pure-loss\neta=0.3\ndiagnostics=false\n").unwrap();
        let a = argv(&format!("--config {} bound --eta 0.5", cfg.display()));
        let merged = merge_config(&a).unwrap();
        let sub = merged.iter().position(|s| s == "bound").unwrap();
        assert_eq!(&merged[sub + 1..], ["--channel=pure-loss", "--eta=0.3", "--eta", "0.5"]);
        let cli = Cli::try_parse_from(&merged).unwrap();
        let Command::Bound(b) = cli.command else { panic!() };
        assert_eq!(b.params.eta, Some(0.5));
        std::fs::write(&cfg, "no equals sign\n").unwrap();
        assert!(matches!(merge_config(&a), Err(CliError::Usage(_))));
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("b.csv");
        let o = out.display();
        assert_eq!(
            run(&argv(&format!("bound --channel pure-loss --eta 0.5 --out {o}"))),
            EXIT_OK
        );
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains(",1.00000000000,capacity,"), "{text}");
        assert_eq!(run(&argv(&format!("bound --channel nope --out {o}"))), EXIT_USAGE);
        assert_eq!(
            run(&argv(&format!(
                "bound --channel pure-loss --eta 0.5 --bogus 1 --out {o}"
            ))),
            EXIT_USAGE
        );
        assert_eq!(
            run(&argv(&format!("bound --channel pure-loss --eta 1.5 --out {o}"))),
            EXIT_DOMAIN
        );
        assert_eq!(
            run(&argv(&format!("bound --channel pure-loss --eta -0.5 --out {o}"))),
            EXIT_DOMAIN
        );
        assert_eq!(
            run(&argv(&format!(
                "capacity --channel thermal-loss --eta 0.5 --nbar 0.1 --out {o}"
            ))),
            EXIT_DOMAIN
        );
        let bad = dir.path().join("missing").join("x.csv");
        assert_eq!(
            run(&argv(&format!(
                "bound --channel pure-loss --eta 0.5 --out {}",
                bad.display()
            ))),
            EXIT_OUTPUT
        );
    }
}
