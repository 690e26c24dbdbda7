use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use mubcorr::closed_form::{ef_isotropic, ef_two_qubit, ef_werner};
use mubcorr::mub::wootters_fields_mubs;
use mubcorr::states::{bell_diagonal, load_state};
use mubcorr::verify::verify_nullity_theorem;
use mubcorr::{
    classical_correlation_c1, measure_c, measure_cm, measure_q2, quantum_discord, run_sweep, BlochTriple,
    DensityMatrix, Error, Family, MeasureKind, OptimizerConfig, SweepMode, SweepSpec,
};

#[derive(Parser)]
#[command(name = "mubcorr", version, about = "Correlations in mutually unbiased measurements")]
struct Cli {
    /// Base seed for the optimizer restarts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Restarts per optimization.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate measures on one state.
    Measure(MeasureArgs),
    /// Sweep a family parameter and write CSV.
    Sweep(SweepArgs),
    /// Check the nullity theorem on random states.
    Verify(VerifyArgs),
    /// Build a complete set of MUBs in prime dimension.
    Mubs(MubsArgs),
}

#[derive(Args)]
struct MeasureArgs {
    /// State JSON file.
    #[arg(long, conflicts_with = "family")]
    state: Option<PathBuf>,
    /// werner, isotropic, bell-diagonal, bell-diagonal-rho1, bell-diagonal-rho2.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Bloch triple `r1,r2,r3` for the bell-diagonal family.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, default_value = "C,Q2,C1,D")]
    measures: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value = "C")]
    measures: String,
    /// closed-form, numeric or both.
    #[arg(long, default_value = "closed-form")]
    mode: String,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    samples: usize,
    #[arg(long, default_value_t = 2)]
    da: usize,
    #[arg(long, default_value_t = 2)]
    db: usize,
    #[arg(long, default_value = "verification_report.json")]
    out: PathBuf,
}

#[derive(Args)]
struct MubsArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(cli: &Cli) -> OptimizerConfig {
    let cfg = OptimizerConfig::with_seed(cli.seed);
    match cli.restarts {
        Some(r) => cfg.with_restarts(r),
        None => cfg,
    }
}

/// Runs `f`, retrying once with doubled restarts on a numerical failure.
fn with_retry<T>(cfg: &OptimizerConfig, f: impl Fn(&OptimizerConfig) -> mubcorr::Result<T>) -> mubcorr::Result<T> {
    match f(cfg) {
        Err(Error::Numerical(msg)) => {
            eprintln!("numerical failure ({msg}); retrying with {} restarts", cfg.restarts * 2);
            f(&cfg.clone().with_restarts(cfg.restarts * 2))
        }
        other => other,
    }
}

fn need(v: Option<f64>, name: &str, family: &str) -> mubcorr::Result<f64> {
    v.ok_or_else(|| Error::Domain(format!("family {family} needs --{name}")))
}

fn parse_triple(s: &str) -> mubcorr::Result<BlochTriple> {
    let parts = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Domain(format!("bad number '{t}' in --r"))))
        .collect::<mubcorr::Result<Vec<f64>>>()?;
    match parts[..] {
        [a, b, c] => BlochTriple::new(a, b, c),
        _ => Err(Error::Domain("--r takes three comma-separated numbers".into())),
    }
}

enum Source {
    File,
    Werner(usize, f64),
    Isotropic(usize, f64),
    Other,
}

fn load_measure_state(args: &MeasureArgs) -> mubcorr::Result<(DensityMatrix, Source)> {
    match (&args.state, &args.family) {
        (Some(path), None) => Ok((load_state(path)?, Source::File)),
        (None, Some(name)) => match name.as_str() {
            "bell-diagonal" => {
                let r = args.r.as_deref().ok_or_else(|| Error::Domain("family bell-diagonal needs --r".into()))?;
                Ok((bell_diagonal(&parse_triple(r)?)?, Source::Other))
            }
            other => {
                let family: Family = other.parse()?;
                let (x, src) = match family {
                    Family::Werner => {
                        let a = need(args.alpha, "alpha", other)?;
                        (a, Source::Werner(args.d, a))
                    }
                    Family::Isotropic => {
                        let b = need(args.beta, "beta", other)?;
                        (b, Source::Isotropic(args.d, b))
                    }
                    _ => (need(args.p, "p", other)?, Source::Other),
                };
                let d = if matches!(family, Family::Werner | Family::Isotropic) { args.d } else { 2 };
                Ok((family.state(d, x)?.0, src))
            }
        },
        _ => Err(Error::Domain("give exactly one of --state FILE or --family NAME".into())),
    }
}

fn entanglement_of_formation(rho: &DensityMatrix, src: &Source) -> mubcorr::Result<f64> {
    if rho.dim_a() == 2 && rho.dim_b() == 2 {
        return ef_two_qubit(rho);
    }
    match *src {
        Source::Werner(d, a) => ef_werner(d, a),
        Source::Isotropic(d, b) => ef_isotropic(d, b),
        _ => Err(Error::Domain("Ef is available for two-qubit, Werner and isotropic states".into())),
    }
}

fn evaluate(m: MeasureKind, rho: &DensityMatrix, src: &Source, cfg: &OptimizerConfig) -> mubcorr::Result<f64> {
    match m {
        MeasureKind::C => Ok(measure_c(rho, cfg)?.value),
        MeasureKind::C3 => Ok(measure_cm(rho, 3, cfg)?.value),
        MeasureKind::Q2 => Ok(measure_q2(rho, cfg)?.value),
        MeasureKind::C1 => Ok(classical_correlation_c1(rho, cfg)?.value),
        MeasureKind::D => quantum_discord(rho, cfg),
        MeasureKind::Ef => entanglement_of_formation(rho, src),
    }
}

fn cmd_measure(cli: &Cli, args: &MeasureArgs) -> mubcorr::Result<()> {
    let measures = MeasureKind::parse_list(&args.measures)?;
    let (rho, src) = load_measure_state(args)?;
    let cfg = config(cli);
    let mut values = Vec::new();
    for m in measures {
        values.push((m, with_retry(&cfg, |c| evaluate(m, &rho, &src, c))?));
    }
    if cli.json {
        let map: Map<String, Value> = values.iter().map(|(m, v)| (m.to_string(), json!(v))).collect();
        println!("{}", Value::Object(map));
    } else {
        for (m, v) in values {
            println!("{m}={v:.6}");
        }
    }
    Ok(())
}

/// Writes through a sibling temp file so a failed run never leaves a partial file.
fn write_atomic(path: &Path, contents: &str) -> mubcorr::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    if let Err(e) = std::fs::write(&tmp, contents).and_then(|_| std::fs::rename(&tmp, path)) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> mubcorr::Result<()> {
    let family: Family = args.family.parse()?;
    let mode: SweepMode = args.mode.parse()?;
    let mut spec = SweepSpec::new(family, args.d, MeasureKind::parse_list(&args.measures)?, mode);
    if let Some(x) = args.from {
        spec.param_from = x;
    }
    if let Some(x) = args.to {
        spec.param_to = x;
    }
    if let Some(n) = args.steps {
        spec.steps = n;
    }
    let csv = with_retry(&config(cli), |c| run_sweep(&spec, c))?;
    match &args.out {
        Some(path) => {
            write_atomic(path, &csv)?;
            if cli.json {
                println!("{}", json!({ "out": path, "rows": spec.steps }));
            } else {
                println!("wrote {} rows to {}", spec.steps, path.display());
            }
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> mubcorr::Result<bool> {
    let report = verify_nullity_theorem(args.samples, args.da, args.db, cli.seed, &config(cli))?;
    write_atomic(&args.out, &report.to_json()?)?;
    if cli.json {
        println!("{}", report.to_json()?);
    } else {
        println!(
            "samples={} products_detected={} witnesses_found={} failures={} min_chi={} report={}",
            report.samples,
            report.products_detected,
            report.witnesses_found,
            report.failures.len(),
            report.min_chi_over_witnesses.map_or("n/a".to_string(), |x| format!("{x:.3e}")),
            args.out.display()
        );
    }
    Ok(report.is_success())
}

fn cmd_mubs(cli: &Cli, args: &MubsArgs) -> mubcorr::Result<()> {
    let set = wootters_fields_mubs(args.d)?;
    let defect = set.max_defect();
    let pass = defect < 1e-10;
    if let Some(path) = &args.out {
        write_atomic(path, &serde_json::to_string_pretty(&set.to_json())?)?;
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&set.to_json())?);
        return Ok(());
    }
    println!("d={} bases={}", set.dim(), set.len());
    for (b, basis) in set.bases().iter().enumerate() {
        println!("basis {b}:");
        let m = basis.matrix();
        for i in 0..set.dim() {
            let row: Vec<String> =
                (0..set.dim()).map(|k| format!("{:+.4}{:+.4}i", m[(i, k)].re, m[(i, k)].im)).collect();
            println!("  {}", row.join(" "));
        }
    }
    println!("validation {} (max defect {:.1e})", if pass { "PASS" } else { "FAIL" }, defect);
    if pass {
        Ok(())
    } else {
        Err(Error::Numerical(format!("MU defect {defect:e}")))
    }
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Numerical(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Measure(a) => cmd_measure(&cli, a),
        Command::Sweep(a) => cmd_sweep(&cli, a),
        Command::Mubs(a) => cmd_mubs(&cli, a),
        Command::Verify(a) => match cmd_verify(&cli, a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
