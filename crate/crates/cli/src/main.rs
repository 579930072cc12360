use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperdyn::catalog::{block_cycling_measure, block_cycling_set, CatalogSystem, SystemDescriptor};
use hyperdyn::classify::classify;
use hyperdyn::cylinder::{CylinderSystem, Word};
use hyperdyn::hyperspace::{enumerate_kn_capped, kn_count, period_of_set, DEFAULT_KN_CAP};
use hyperdyn::joinings::{disjointness_sweep, is_disjoint_with, sweep_csv};
use hyperdyn::measures::{enumerate_mn_lattice_capped, lattice_count, measure_period};
use hyperdyn::recurrence::{
    banach_density_estimate, cylinder_return_times, max_run, return_times_point, return_times_set, syndetic_gap,
    upper_density_estimate,
};
use hyperdyn::sample::DEFAULT_SEED;
use hyperdyn::verify::{all_passed, resolve_ids, run_check, VerifyConfig};
use hyperdyn::{Error, Exec, FiniteSystem};
use serde::Serialize;
use serde_json::{json, Value};

const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "hyperdyn", version, about = "Induced hyperspace and measure dynamics of finite systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a system and summarize its return-time sets.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Enumerate K_n or the lattice M_n and histogram the element periods.
    Induce {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, conflicts_with = "measures", required_unless_present = "measures")]
        hyperspace: bool,
        #[arg(long)]
        measures: bool,
        /// Largest number of elements to enumerate.
        #[arg(long, default_value_t = DEFAULT_KN_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
        cap: u64,
    },
    /// Return-time set N(U, V) within a window, or its residue form on a
    /// cylinder system.
    Recurrence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        system: SystemArgs,
        /// Source set: comma-separated point indices, or a cylinder word.
        #[arg(long)]
        from: String,
        /// Target set, same form as `--from`. Defaults to `--from`.
        #[arg(long)]
        to: Option<String>,
        /// Interval length for the Banach density estimate.
        #[arg(long, default_value_t = 8)]
        len: u64,
    },
    /// Joinings of two systems, or the cycle disjointness sweep.
    Joining {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        system: SystemArgs,
        /// Second system descriptor.
        #[arg(long, required_unless_present = "sweep")]
        other: Option<String>,
        /// Sweep cycle(p) against cycle(q) for `LO..HI`, inclusive.
        #[arg(long, value_name = "LO..HI")]
        sweep: Option<String>,
    },
    /// Run a named check, or `all`.
    Verify {
        #[command(flatten)]
        common: Common,
        check: String,
        /// Record elapsed milliseconds per check (breaks byte stability).
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    window: u64,
    /// Enumeration order n for K_n and M_n.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Cylinder depth for cylinder systems.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=24))]
    depth: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run every sweep on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug, Clone)]
struct SystemArgs {
    /// Descriptor such as `cycle:5`, `cycle:2*cycle:3` or `@system.json`.
    #[arg(long, conflicts_with = "catalog")]
    system: Option<String>,
    #[arg(long, requires = "param")]
    catalog: Option<String>,
    #[arg(long)]
    param: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
struct Report<'a> {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a Value,
    #[serde(flatten)]
    body: Value,
}

enum Failure {
    Config(String),
    Cap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl SystemArgs {
    fn descriptor(&self) -> Result<SystemDescriptor, Failure> {
        match (&self.system, &self.catalog) {
            (Some(s), _) => Ok(SystemDescriptor::parse(s, self.param)?),
            (None, Some(name)) => Ok(SystemDescriptor::parse(name, self.param)?),
            (None, None) => Err(Failure::Config("one of --system or --catalog is required".into())),
        }
    }
}

fn exec(common: &Common) -> Exec {
    if common.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn config_echo(common: &Common, extra: Value) -> Value {
    let mut v = json!({
        "seed": common.seed,
        "window": common.window,
        "n": common.n,
        "depth": common.depth,
        "format": common.format,
    });
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    v
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// Returns whether every check passed.
fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Analyze { common, system } => analyze(&common, &system),
        Command::Induce { common, system, hyperspace, cap, .. } => induce(&common, &system, hyperspace, cap),
        Command::Recurrence { common, system, from, to, len } => {
            recurrence(&common, &system, &from, to.as_deref().unwrap_or(&from), len)
        }
        Command::Joining { common, system, other, sweep } => {
            joining(&common, &system, other.as_deref(), sweep.as_deref())
        }
        Command::Verify { common, check, timings } => verify(&common, &check, timings),
    }
}

fn emit(
    common: &Common,
    command: &'static str,
    config: &Value,
    body: Value,
    csv: Option<String>,
) -> Result<(), Failure> {
    let text = match (common.format, csv) {
        (Format::Csv, Some(csv)) => csv,
        (Format::Csv, None) => return Err(Failure::Config(format!("{command} has no csv output"))),
        (Format::Json, _) => {
            let report =
                Report { schema: SCHEMA, tool: "hyperdyn", version: env!("CARGO_PKG_VERSION"), command, config, body };
            let mut s = serde_json::to_string_pretty(&report).map_err(|e| Failure::Config(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match &common.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finite(desc: &SystemDescriptor) -> Result<FiniteSystem, Failure> {
    Ok(desc.resolve()?.into_finite()?)
}

fn analyze(common: &Common, args: &SystemArgs) -> Result<bool, Failure> {
    let desc = args.descriptor()?;
    let config = config_echo(common, json!({"system": desc.to_string()}));
    let system = match desc.resolve()? {
        CatalogSystem::Finite(s) => s,
        CatalogSystem::Cylinder(c) => {
            let cylinders = c.cylinders(common.depth as usize);
            let mut rows = Vec::new();
            for w in cylinders.iter().take(16) {
                let r = cylinder_return_times(&c, w, w)?;
                rows.push(json!({"cylinder": w.to_string(), "modulus": r.modulus(), "syndetic": r.is_syndetic(),
                                 "thick": r.is_thick(), "first": r.first()}));
            }
            let body = json!({"system": c.name(), "cylinders_at_depth": cylinders.len(), "return_times": rows});
            emit(common, "analyze", &config, body, None)?;
            return Ok(true);
        }
    };
    let report = classify(&system, system.len().max(1))?;
    let mut recurrence = Vec::new();
    for cycle in system.cycles() {
        let x = cycle[0];
        let times = return_times_point(&system, x, &[x], common.window)?;
        recurrence.push(json!({
            "point": x,
            "period": cycle.len(),
            "max_gap": syndetic_gap(&times)?.max_gap,
            "upper_density": upper_density_estimate(&times),
        }));
    }
    let mut body = json!({"classification": report, "recurrence": recurrence});
    if let SystemDescriptor::Catalog { name, param } = &desc {
        if name == "example33" || name == "example45-space" {
            let m = *param as u32;
            let bound = 2 * system.len();
            body["distinguished"] = json!({
                "hyperspace_period": period_of_set(&system, &block_cycling_set(m)?, bound)?,
                "measure_period": measure_period(&system, &block_cycling_measure(m)?, bound)?,
            });
        }
    }
    emit(common, "analyze", &config, body, None)?;
    Ok(true)
}

fn induce(common: &Common, args: &SystemArgs, hyperspace: bool, cap: u64) -> Result<bool, Failure> {
    let desc = args.descriptor()?;
    let target = if hyperspace { "hyperspace" } else { "measures" };
    let config = config_echo(common, json!({"system": desc.to_string(), "target": target, "cap": cap}));
    let system = finite(&desc)?;
    system.require_tds()?;
    let n = common.n as usize;
    let ex = exec(common);
    let periods: Vec<Option<usize>> = if hyperspace {
        let bound = kn_count(system.len(), n).min(usize::MAX as u128) as usize;
        let sets = enumerate_kn_capped(&system, n, cap as u128)?;
        ex.map_slice(&sets, |a| period_of_set(&system, a, bound)).into_iter().collect::<Result<_, _>>()?
    } else {
        let bound = lattice_count(system.len(), n).min(usize::MAX as u128) as usize;
        let lattice = enumerate_mn_lattice_capped(&system, n, cap as u128)?;
        ex.map_slice(&lattice, |mu| measure_period(&system, mu, bound)).into_iter().collect::<Result<_, _>>()?
    };
    let mut histogram: BTreeMap<String, usize> = BTreeMap::new();
    for p in &periods {
        let key = p.map_or_else(|| "none".to_string(), |p| p.to_string());
        *histogram.entry(key).or_default() += 1;
    }
    let all_periodic = periods.iter().all(Option::is_some);
    let mut csv = String::from("period,count\n");
    for (k, v) in &histogram {
        csv.push_str(&format!("{k},{v}\n"));
    }
    let body = json!({"elements": periods.len(), "all_periodic": all_periodic, "periods": histogram});
    emit(common, "induce", &config, body, Some(csv))?;
    Ok(true)
}

fn parse_points(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Failure::Config(format!("bad point index `{t}`"))))
        .collect()
}

fn recurrence(common: &Common, args: &SystemArgs, from: &str, to: &str, len: u64) -> Result<bool, Failure> {
    let desc = args.descriptor()?;
    let config = config_echo(common, json!({"system": desc.to_string(), "from": from, "to": to, "len": len}));
    match desc.resolve()? {
        CatalogSystem::Cylinder(c) => {
            let (u, v) = (word(&c, from)?, word(&c, to)?);
            let r = cylinder_return_times(&c, &u, &v)?;
            let times = r.window(common.window)?;
            let body = json!({
                "residues": r,
                "syndetic": r.is_syndetic(),
                "thick": r.is_thick(),
                "first": r.first(),
                "window": times.members(),
            });
            emit(common, "recurrence", &config, body, Some(times.to_csv()))?;
        }
        CatalogSystem::Finite(system) => {
            let (u, v) = (parse_points(from)?, parse_points(to)?);
            let times = return_times_set(&system, &u, &v, common.window)?;
            let gap = syndetic_gap(&times)?;
            let body = json!({
                "members": times.members(),
                "max_gap": gap.max_gap,
                "syndetic_in_window": gap.covers_window,
                "max_run": max_run(&times),
                "upper_density": upper_density_estimate(&times),
                "banach_density": banach_density_estimate(&times, len)?,
            });
            emit(common, "recurrence", &config, body, Some(times.to_csv()))?;
        }
    }
    Ok(true)
}

fn word(c: &CylinderSystem, s: &str) -> Result<Word, Failure> {
    let w: Word = s.parse()?;
    c.validate_word(&w)?;
    Ok(w)
}

fn joining(common: &Common, args: &SystemArgs, other: Option<&str>, sweep: Option<&str>) -> Result<bool, Failure> {
    if let Some(range) = sweep {
        let (lo, hi) = range
            .split_once("..")
            .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
            .ok_or_else(|| Failure::Config(format!("bad sweep range `{range}`, expected LO..HI")))?;
        let config = config_echo(common, json!({"sweep": [lo, hi]}));
        let rows = disjointness_sweep(lo, hi, exec(common))?;
        let csv = sweep_csv(&rows);
        emit(common, "joining", &config, json!({"sweep": rows}), Some(csv))?;
        return Ok(true);
    }
    let desc = args.descriptor()?;
    let other = SystemDescriptor::parse(other.unwrap_or_default(), args.param)?;
    let config = config_echo(common, json!({"system": desc.to_string(), "other": other.to_string()}));
    let (x, y) = (finite(&desc)?, finite(&other)?);
    let d = is_disjoint_with(&x, &y, exec(common))?;
    emit(common, "joining", &config, json!(d), None)?;
    Ok(true)
}

fn verify(common: &Common, check: &str, timings: bool) -> Result<bool, Failure> {
    let ids = resolve_ids(check)?;
    let cfg = VerifyConfig { seed: common.seed, exec: exec(common) };
    let config = config_echo(common, json!({"check": check, "timings": timings}));
    let mut records = Vec::with_capacity(ids.len());
    for id in ids {
        let mut r = run_check(id, &cfg)?;
        if !timings {
            r.elapsed_ms = None;
        }
        eprintln!("{} {}", if r.passed() { "PASS" } else { "FAIL" }, r.id);
        records.push(r);
    }
    let ok = all_passed(&records);
    emit(common, "verify", &config, json!({"passed": ok, "records": records}), None)?;
    Ok(ok)
}
