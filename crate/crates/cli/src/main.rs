use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use nlrouter_core::analytics::{formula, log_spaced, simulate, Protocol};
use nlrouter_core::protocols::{bell_success_patterns, BellState};
use nlrouter_core::rydberg::loss_from_phase;
use nlrouter_core::sweep::{
    circle_rows, configure_threads, opt_phase, parse_list, parse_range, parse_value, render_circle, render_opt_phase,
    render_sweep, run_sweep, SweepConfig,
};
use nlrouter_core::{Error, WorkingPoint};

const ANGLE_HELP: &str = "\
Angles and depths accept small expressions:

  range  := expr | expr ':' expr ':' count
  expr   := term (('+' | '-') term)*
  term   := unary (('*' | '/') unary)*
  unary  := ('+' | '-') unary | atom
  atom   := number atom? | 'pi' | 'inf' | '(' expr ')'

e.g. --phi 0:pi:128, --phi 2pi/3, --odb 30,60,inf

Environment: NLR_THREADS caps the number of worker threads.
Exit codes: 0 ok, 1 usage error, 2 numerical/model error, 3 I/O error.";

#[derive(Parser)]
#[command(name = "nlrouter", version, about = "Success-probability sweeps for nonlinear-router photonic protocols", after_help = ANGLE_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a protocol over a (phi, OD_b, P_DE) grid.
    Sweep(SweepArgs),
    /// Both branches of the phase-loss circle.
    Circle(CircleArgs),
    /// Optimal phase versus OD_b with fitted scaling exponents.
    OptPhase(OptPhaseArgs),
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with any of: protocol, phi, od_b, p_de, phi1_ratio, engine, format, output.
    #[arg(long)]
    config: Option<PathBuf>,
    /// router, bm, evl, ghz, cnot, cnot-evl, factorization, factorization-evl
    #[arg(long)]
    protocol: Option<String>,
    /// Phase value or start:stop:count.
    #[arg(long)]
    phi: Option<String>,
    /// Comma-separated OD_b values; `inf` means lossless.
    #[arg(long)]
    odb: Option<String>,
    /// Comma-separated detection efficiencies.
    #[arg(long)]
    pde: Option<String>,
    /// Detuning: phi1 = ratio * phi (e.g. -1/11).
    #[arg(long, allow_hyphen_values = true)]
    phi1_ratio: Option<String>,
    /// formula, simulator or both.
    #[arg(long)]
    engine: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CircleArgs {
    #[arg(long, default_value = "3.5,8")]
    odb: String,
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OptPhaseArgs {
    #[arg(long, default_value = "bm")]
    protocol: String,
    /// Comma-separated list, or lo:hi:count for log-spaced depths.
    #[arg(long, default_value = "60:2000:20")]
    odb: String,
    #[arg(long, default_value = "1")]
    pde: String,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Model(Error),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Model(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Num(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Num(v) => format!("{v:e}"),
            Scalar::Text(s) => s.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ListValue {
    One(Scalar),
    Many(Vec<Scalar>),
}

impl ListValue {
    fn text(&self) -> String {
        match self {
            ListValue::One(s) => s.text(),
            ListValue::Many(v) => v.iter().map(Scalar::text).collect::<Vec<_>>().join(","),
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    protocol: Option<String>,
    phi: Option<Scalar>,
    od_b: Option<ListValue>,
    p_de: Option<ListValue>,
    phi1_ratio: Option<Scalar>,
    engine: Option<String>,
    format: Option<String>,
    output: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn sweep_config(args: SweepArgs) -> Result<(SweepConfig, Option<PathBuf>), Failure> {
    let file = match &args.config {
        Some(p) => read_config(p)?,
        None => ConfigFile::default(),
    };
    let protocol = args.protocol.or(file.protocol).ok_or(Failure::Usage("--protocol is required".into()))?;
    let phi = args.phi.or(file.phi.map(|s| s.text())).ok_or(Failure::Usage("--phi is required".into()))?;
    let odb = args.odb.or(file.od_b.map(|l| l.text())).unwrap_or_else(|| "inf".into());
    let pde = args.pde.or(file.p_de.map(|l| l.text())).unwrap_or_else(|| "1".into());
    let mut config = SweepConfig::new(
        protocol.parse().map_err(usage)?,
        parse_range(&phi).map_err(usage)?,
        parse_list(&odb).map_err(usage)?,
        parse_list(&pde).map_err(usage)?,
    );
    if let Some(r) = args.phi1_ratio.or(file.phi1_ratio.map(|s| s.text())) {
        config.phi1_ratio = parse_value(&r).map_err(usage)?;
    }
    if let Some(e) = args.engine.or(file.engine) {
        config.engine = e.parse().map_err(usage)?;
    }
    if let Some(f) = args.format.or(file.format) {
        config.format = f.parse().map_err(usage)?;
    }
    config.validate().map_err(usage)?;
    Ok((config, args.output.or(file.output)))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let (config, output) = sweep_config(args)?;
    let out = run_sweep(&config).map_err(Failure::Model)?;
    let text = render_sweep(&out, config.format).map_err(Failure::Model)?;
    emit(&text, output.as_deref())
}

fn cmd_circle(args: CircleArgs) -> Result<(), Failure> {
    let ods = parse_list(&args.odb).map_err(usage)?;
    let rows = circle_rows(&ods, args.points).map_err(usage)?;
    emit(&render_circle(&rows), args.output.as_deref())
}

fn depth_list(src: &str) -> Result<Vec<f64>, Failure> {
    if src.contains(':') {
        let r = parse_range(src).map_err(usage)?;
        if r.start <= 0.0 {
            return Err(Failure::Usage("log-spaced depths need a positive start".into()));
        }
        Ok(log_spaced(r.start, r.stop, r.points))
    } else {
        parse_list(src).map_err(usage)
    }
}

fn cmd_opt_phase(args: OptPhaseArgs) -> Result<(), Failure> {
    let protocol: Protocol = args.protocol.parse().map_err(usage)?;
    let ods = depth_list(&args.odb)?;
    let p_de = parse_value(&args.pde).map_err(usage)?;
    let fit = opt_phase(protocol, &ods, p_de).map_err(Failure::Model)?;
    emit(&render_opt_phase(&fit), args.output.as_deref())
}

fn check(name: &str, ok: bool, detail: String, failures: &mut usize) {
    if ok {
        println!("PASS {name}: {detail}");
    } else {
        println!("FAIL {name}: {detail}");
        *failures += 1;
    }
}

fn cmd_selftest() -> Result<(), Failure> {
    let mut failures = 0;
    let model = Failure::Model;
    for p in [Protocol::Bm, Protocol::Evl, Protocol::Ghz, Protocol::Cnot, Protocol::Factorization] {
        let wp = WorkingPoint::lossless(0.0);
        let (f, s) = (formula(p, &wp).map_err(model)?, simulate(p, &wp).map_err(model)?);
        let ok = (f - p.linear_baseline()).abs() < 1e-12 && (s - p.linear_baseline()).abs() < 1e-12;
        check(&format!("linear baseline {p}"), ok, format!("formula {f:.12} simulator {s:.12}"), &mut failures);
        let wp = WorkingPoint::lossless(PI);
        let (f, s) = (formula(p, &wp).map_err(model)?, simulate(p, &wp).map_err(model)?);
        let ok = (f - 1.0).abs() < 1e-12 && (s - 1.0).abs() < 1e-12;
        check(&format!("strong limit {p}"), ok, format!("formula {f:.12} simulator {s:.12}"), &mut failures);
    }
    let mut worst: f64 = 0.0;
    for p in [Protocol::Bm, Protocol::Evl, Protocol::Ghz] {
        for (phi, od, pde) in [(PI / 3.0, 30.0, 0.98), (2.0, 15.0, 0.9), (2.9, 240.0, 1.0)] {
            for ratio in [0.0, -1.0 / 11.0] {
                let wp = WorkingPoint::new(phi, od, pde).with_phi1(ratio * phi);
                let d = (formula(p, &wp).map_err(model)? - simulate(p, &wp).map_err(model)?).abs();
                worst = worst.max(d);
            }
        }
    }
    check("engine agreement", worst < 1e-10, format!("max |formula - simulator| = {worst:.3e}"), &mut failures);
    let pats = bell_success_patterns(&WorkingPoint::lossless(PI)).map_err(model)?;
    let disjoint = BellState::ALL
        .iter()
        .enumerate()
        .all(|(i, a)| BellState::ALL[i + 1..].iter().all(|b| pats[a].is_disjoint(&pats[b])));
    check("disjoint Bell patterns at pi", disjoint, format!("{} patterns", pats.values().map(|s| s.len()).sum::<usize>()), &mut failures);
    let c = loss_from_phase(PI / 3.0, 30.0).map_err(model)?;
    check("circle residual", c.circle_residual().abs() < 1e-12, format!("tau(pi/3, 30) = {:.12}", c.tau), &mut failures);
    if failures > 0 {
        return Err(Failure::Model(Error::InvalidParameter(format!("{failures} self-test checks failed"))));
    }
    Ok(())
}

fn threads_from_env() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("NLR_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Usage(format!("NLR_THREADS must be a positive integer, got '{v}'")))?;
        configure_threads(n).map_err(usage)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = threads_from_env().and_then(|_| match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Circle(a) => cmd_circle(a),
        Command::OptPhase(a) => cmd_opt_phase(a),
        Command::Selftest => cmd_selftest(),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Model(e) => eprintln!("error: {e}"),
                Failure::Io(m) => eprintln!("I/O error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
