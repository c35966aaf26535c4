//! Command-line front end: `flow` runs an integrator and emits CSV plus a
//! JSON manifest, `check` runs identity suites, `reduce` emits a reduction
//! report. Exit codes: 0 pass, 1 numeric failure, 2 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::catalog;
use crate::checks::{self, ExampleKey};
use crate::error::{Error, Result};
use crate::exterior::{comb, Form, Grid};
use crate::flows::{as_flow, bryant_flow, AsBoundary, AsFlowState};

#[derive(Parser, Debug)]
#[command(
    name = "g2flow",
    about = "Laplacian flow, circle reduction and soliton checks for invariant G2-structures",
    version
)]
pub struct CliArgs {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate a Laplacian flow and write trajectory.csv + manifest.json.
    Flow(FlowArgs),
    /// Run identity, torsion or soliton suites; print a JSON report.
    Check(CheckArgs),
    /// Reduce an example along its circle direction; print a JSON report.
    Reduce(ReduceArgs),
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    /// bryant | as-soliton:k=<int> | as-torsionfree | flat
    #[arg(long)]
    pub example: String,
    /// u-grid as min:max:count (warped examples only)
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long = "t-end", default_value_t = 1.0)]
    pub t_end: f64,
    /// record every n-th step (0 = choose ~100 rows automatically)
    #[arg(long, default_value_t = 0)]
    pub record_every: usize,
    #[arg(long, default_value = "g2flow-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub example: String,
    /// lemmas | torsion | soliton
    #[arg(long)]
    pub what: String,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// randomized cases per suite
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(long, default_value_t = 2026)]
    pub seed: u64,
    /// also write the JSON report here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(long)]
    pub example: String,
    /// flow time for the Bryant example
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// report coefficient values at the sample nearest to this u
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses "min:max:count".
pub fn parse_grid(s: &str) -> Result<Grid> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("grid '{s}' is not min:max:count")));
    }
    let min: f64 =
        parts[0].parse().map_err(|_| Error::Config(format!("bad grid min '{}'", parts[0])))?;
    let max: f64 =
        parts[1].parse().map_err(|_| Error::Config(format!("bad grid max '{}'", parts[1])))?;
    let count: usize =
        parts[2].parse().map_err(|_| Error::Config(format!("bad grid count '{}'", parts[2])))?;
    Grid::new(min, max, count)
}

/// Thread cap from G2FLOW_THREADS (the kernels are deterministic and run
/// serially, which satisfies any cap >= 1); recorded in manifests.
pub fn thread_cap() -> Result<usize> {
    match std::env::var("G2FLOW_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| Error::Config(format!("G2FLOW_THREADS='{v}' is not an integer")))?;
            if n == 0 {
                return Err(Error::Config("G2FLOW_THREADS must be at least 1".into()));
            }
            Ok(n)
        }
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{}", columns.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
        writeln!(f, "{}", line.join(","))?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Coefficient values of a form at one sample, keyed by index tuple.
fn form_at_sample(form: &Form, sample: usize) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (r, &m) in comb::masks(form.n(), form.degree()).iter().enumerate() {
        let v = form.coeff_by_rank(r).eval(sample);
        if v != 0.0 {
            let key: String = comb::tuple(m).iter().map(|i| i.to_string()).collect();
            out.insert(format!("e{key}"), v);
        }
    }
    out
}

#[derive(Serialize)]
struct FlowManifest {
    command: String,
    example: String,
    frame: String,
    grid: Option<Grid>,
    dt: f64,
    t_end: f64,
    steps: usize,
    record_every: usize,
    columns: Vec<String>,
    csv: String,
    thread_cap: usize,
    tolerances: BTreeMap<String, f64>,
    warnings: Vec<String>,
    summary: BTreeMap<String, f64>,
}

pub fn cmd_flow(args: &FlowArgs) -> Result<()> {
    let key: ExampleKey = args.example.parse()?;
    if args.dt <= 0.0 || args.t_end <= 0.0 {
        return Err(Error::Config("dt and t-end must be positive".into()));
    }
    let steps = (args.t_end / args.dt).round().max(1.0) as usize;
    let record_every =
        if args.record_every == 0 { (steps / 100).max(1) } else { args.record_every };
    fs::create_dir_all(&args.out)?;
    let csv_path = args.out.join("trajectory.csv");
    let manifest_path = args.out.join("manifest.json");
    let threads = thread_cap()?;
    let mut warnings = Vec::new();
    let mut summary = BTreeMap::new();
    let mut tolerances = BTreeMap::new();

    let (frame_name, grid, columns, rows) = match key {
        ExampleKey::Bryant | ExampleKey::Flat => {
            if args.grid.is_some() {
                return Err(Error::Config(format!("example '{key}' does not take a grid")));
            }
            let (phi0, fs, frame_name) = if key == ExampleKey::Bryant {
                (catalog::bryant_phi(0.0), catalog::bryant_frame(), "fernandez7")
            } else {
                (catalog::standard_phi(), crate::exterior::registry("flat7", None)?, "flat7")
            };
            let traj = bryant_flow(&phi0, &fs, 0.0, args.dt, steps, record_every)?;
            let columns = vec![
                "t".to_string(),
                "coeff_e123".to_string(),
                "tau_norm_sq".to_string(),
                "vol_coeff".to_string(),
            ];
            let rows: Vec<Vec<f64>> = traj
                .states
                .iter()
                .map(|s| {
                    vec![s.t, s.phi.coeff(&[1, 2, 3]).eval(0), s.tau_norm_sq, s.vol_coeff]
                })
                .collect();
            summary.insert("final_tau_norm_sq".into(), traj.last().tau_norm_sq);
            summary.insert("final_vol_coeff".into(), traj.last().vol_coeff);
            tolerances.insert("torsion_residual".into(), checks::TOL_ANALYTIC);
            (frame_name.to_string(), None, columns, rows)
        }
        ExampleKey::AsSoliton { .. } | ExampleKey::AsTorsionFree => {
            let grid = match &args.grid {
                Some(s) => parse_grid(s)?,
                None => checks::default_grid(key, None)?,
            };
            let profiles = checks::example_profiles(key, grid)?.expect("warped example");
            let state0 = AsFlowState::from_profiles(&profiles, 0.0);
            let boundary = match key {
                ExampleKey::AsSoliton { k } => AsBoundary::SelfSimilar { k },
                _ => AsBoundary::Fixed,
            };
            let traj = as_flow(&state0, args.dt, steps, boundary, record_every)?;
            let columns = vec![
                "t".to_string(),
                "a_mid".to_string(),
                "b_mid".to_string(),
                "c_mid".to_string(),
                "tau_norm_sq_mid".to_string(),
                "vol_coeff_mid".to_string(),
                "constraint_drift".to_string(),
            ];
            let mid = grid.count / 2;
            let rows: Vec<Vec<f64>> = traj
                .states
                .iter()
                .map(|s| {
                    vec![
                        s.t,
                        s.a[mid],
                        s.b[mid],
                        s.c[mid],
                        s.tau_norm_sq_mid,
                        s.vol_coeff_mid,
                        s.drift,
                    ]
                })
                .collect();
            tolerances.insert("constraint_drift".into(), 1e-6);
            summary.insert("max_constraint_drift".into(), traj.max_drift);
            if traj.max_drift > 1e-6 {
                warnings.push(format!(
                    "closure-constraint drift {:.3e} exceeds 1e-6",
                    traj.max_drift
                ));
            }
            if let ExampleKey::AsSoliton { k } = key {
                // compare against the exact self-similar solution
                let last = traj.last();
                let mut max_rel = 0.0f64;
                for (i, &u) in grid.points().iter().enumerate() {
                    let (ea, eb, ec) =
                        crate::flows::as_exact_selfsimilar(k, last.t, u);
                    max_rel = max_rel
                        .max(((last.a[i] - ea) / ea).abs())
                        .max(((last.b[i] - eb) / eb).abs())
                        .max(((last.c[i] - ec) / ec).abs());
                }
                summary.insert("selfsimilar_rel_error".into(), max_rel);
            }
            ("as7".to_string(), Some(grid), columns, rows)
        }
    };

    write_csv(&csv_path, &columns.iter().map(|s| s.as_str()).collect::<Vec<_>>(), &rows)?;
    let manifest = FlowManifest {
        command: "flow".into(),
        example: args.example.clone(),
        frame: frame_name,
        grid,
        dt: args.dt,
        t_end: args.t_end,
        steps,
        record_every,
        columns,
        csv: "trajectory.csv".into(),
        thread_cap: threads,
        tolerances,
        warnings,
        summary,
    };
    write_json(&manifest_path, &serde_json::to_value(&manifest)?)?;
    println!("wrote {} and {}", csv_path.display(), manifest_path.display());
    Ok(())
}

pub fn cmd_check(args: &CheckArgs) -> Result<bool> {
    let key: ExampleKey = args.example.parse()?;
    let grid = match &args.grid {
        Some(s) => parse_grid(s)?,
        None => checks::default_grid(key, None)?,
    };
    let mut reports = Vec::new();
    let mut extras = serde_json::Map::new();
    match args.what.as_str() {
        "lemmas" => {
            reports.push(checks::interchange_suite(args.seed, args.cases, grid)?);
            reports.push(checks::reduction_identity_suite(args.seed + 1, args.cases, grid)?);
            reports.push(checks::pointwise_two_form_suite(args.seed + 2, args.cases)?);
        }
        "torsion" => {
            reports.push(checks::torsion_suite(key, grid)?);
        }
        "soliton" => {
            let k = match key {
                ExampleKey::AsSoliton { k } => k,
                _ => {
                    return Err(Error::Config(format!(
                        "'--what soliton' needs an as-soliton example, got '{key}'"
                    )))
                }
            };
            let (lambda, a) = catalog::as_soliton_constants(k);
            extras.insert("lambda".into(), json!(lambda));
            extras.insert("drift_coefficient".into(), json!(a));
            reports.push(checks::soliton_suite(k, grid)?);
            reports.push(checks::quotient_soliton_suite(k, grid)?);
        }
        other => {
            return Err(Error::Config(format!(
                "unknown check '{other}' (expected lemmas, torsion or soliton)"
            )))
        }
    }
    let all_pass = reports.iter().all(|r| r.all_pass());
    let value = json!({
        "command": "check",
        "example": args.example,
        "what": args.what,
        "grid": grid,
        "cases": args.cases,
        "seed": args.seed,
        "tolerances": {"analytic": checks::TOL_ANALYTIC, "fd": checks::TOL_FD},
        "extras": extras,
        "reports": reports,
        "pass": all_pass,
    });
    let text = serde_json::to_string_pretty(&value)?;
    println!("{text}");
    if let Some(path) = &args.out {
        fs::write(path, &text)?;
    }
    Ok(all_pass)
}

pub fn cmd_reduce(args: &ReduceArgs) -> Result<()> {
    let key: ExampleKey = args.example.parse()?;
    let grid = match &args.grid {
        Some(s) => parse_grid(s)?,
        None => checks::default_grid(key, None)?,
    };
    let r = checks::example_reduction(key, grid, args.t)?;
    let sample = match (args.u, r.h.grid()) {
        (Some(u), Some(g)) => g.nearest(u),
        _ => 0,
    };
    let tor = r.torsion()?;
    let classes = checks::torsion_class_report(&r)?;
    let value = json!({
        "command": "reduce",
        "example": args.example,
        "t": args.t,
        "u": args.u,
        "sample": sample,
        "circle_direction": r.y,
        "h": r.h.eval(sample),
        "xi": form_at_sample(&r.xi, sample),
        "omega": form_at_sample(&r.su3.omega, sample),
        "omega_plus": form_at_sample(&r.su3.omega_plus, sample),
        "omega_minus": form_at_sample(&r.su3.omega_minus, sample),
        "dxi6": form_at_sample(&r.dxi6, sample),
        "dxi8": form_at_sample(&r.dxi8, sample),
        "gamma16": form_at_sample(&r.gamma16, sample),
        "tau_h": form_at_sample(&tor.tau_h, sample),
        "tau_v": form_at_sample(&tor.tau_v, sample),
        "tau6": form_at_sample(&tor.tau6, sample),
        "tau8": form_at_sample(&tor.tau8, sample),
        "torsion_classes": {
            "sigma0": classes.sigma0.max_abs(),
            "pi0": classes.pi0.max_abs(),
            "nu1": classes.nu1.max_abs(),
            "pi1": form_at_sample(&classes.pi1, sample),
            "pi2": classes.pi2.max_abs(),
            "sigma2": classes.sigma2.max_abs(),
            "nu3": classes.nu3.max_abs(),
            "residuals": classes.residuals,
        },
        "residuals": {
            "reduction": r.residuals,
            "tau_match": tor.tau_match,
            "noomega": tor.noomega,
            "relation1": tor.relation1,
            "relation2": tor.relation2,
            "t68": tor.t68,
            "coclosed": tor.coclosed,
        },
    });
    let text = serde_json::to_string_pretty(&value)?;
    println!("{text}");
    if let Some(path) = &args.out {
        fs::write(path, &text)?;
    }
    Ok(())
}

/// Top-level dispatch with the exit-code contract: 0 pass, 1 numeric
/// failure, 2 usage error.
pub fn run(cli: CliArgs) -> i32 {
    let usage = |e: &Error| {
        eprintln!("error: {e}");
        2
    };
    match &cli.command {
        Command::Flow(args) => match cmd_flow(args) {
            Ok(()) => 0,
            Err(e @ Error::Config(_)) => usage(&e),
            Err(e) => {
                eprintln!("numeric failure: {e}");
                1
            }
        },
        Command::Check(args) => match cmd_check(args) {
            Ok(true) => 0,
            Ok(false) => {
                eprintln!("one or more checks failed");
                1
            }
            Err(e @ Error::Config(_)) => usage(&e),
            Err(e) => {
                eprintln!("numeric failure: {e}");
                1
            }
        },
        Command::Reduce(args) => match cmd_reduce(args) {
            Ok(()) => 0,
            Err(e @ Error::Config(_)) => usage(&e),
            Err(e) => {
                eprintln!("numeric failure: {e}");
                1
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("-1:1:2001").unwrap();
        assert_eq!(g.count, 2001);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:b:c").is_err());
    }

    #[test]
    fn csv_uses_full_precision() {
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        assert!(fmt17(std::f64::consts::PI).starts_with("3.1415926535897931e0"));
    }
}
