use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use painleve1::bvp::{count_solutions, solve_bvp, z_fn, BvpProblem};
use painleve1::extremal::{x_fn, x_min_fn, x_minus_fn, xi_fns};
use painleve1::integrals::constants;
use painleve1::integrate::{integrate_ivp, Direction, SolveConfig, Trajectory};
use painleve1::level::{
    cal_x, delta_sym, level_from_pole, slope_f, v_from_level, var_xi, PoleDatum, Side,
};
use painleve1::report::{
    run_table, scan_conjecture, sig15, sweep_csv, table_csv, trajectory_csv, ConstantsOut,
};
use painleve1::spacing::{delta_level, delta_pole_sup, delta_sup};

#[derive(Parser)]
#[command(name = "p1", about = "Qualitative numerics for y'' = 6y^2 - x on x <= 0", version)]
struct Cli {
    /// Relative/absolute tolerance of the integrator.
    #[arg(long, global = true)]
    rk_tol: Option<f64>,
    /// Override the pass tolerance of table checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Write the primary output to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized scans.
    #[arg(long, global = true, default_value_t = 20260809)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Subcommand)]
enum Command {
    /// Print the quadrature constants C, v_min^max, x_max, C(0).
    Constants,
    /// Initial slope realizing a prescribed minimum value.
    Slope(SlopeArgs),
    /// Level data of a pole solution: (x_pole, v) -> (y_l, x_min).
    Level(LevelArgs),
    /// Pole parameter from a level: (x_pole, y_l) -> v, with round trip.
    Polemap(PolemapArgs),
    /// Per-level pole/minimum abscissa functions.
    Calx(CalxArgs),
    /// Extremal functions X_min, X_-, X, Xi_min, Xi.
    Xfun(XfunArgs),
    /// Dirichlet boundary-value tools.
    Bvp(BvpArgs),
    /// Zero-spacing functions.
    Spacing(SpacingArgs),
    /// Reproduce a reference table (1..4).
    Table { n: u32 },
    /// Scan a conjecture (1..5).
    Conjecture { id: u32 },
}

#[derive(Args)]
struct SlopeArgs {
    #[arg(long, allow_negative_numbers = true)]
    x0: f64,
    #[arg(long, allow_negative_numbers = true)]
    y0: f64,
    #[arg(long, allow_negative_numbers = true)]
    yl: f64,
    /// Side of x0 on which the minimum is prescribed.
    #[arg(long, value_enum, default_value_t = CliSide::Left)]
    side: CliSide,
    /// Also print the symmetry defect.
    #[arg(long)]
    delta: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliSide {
    Left,
    Right,
}

impl From<CliSide> for Side {
    fn from(s: CliSide) -> Side {
        match s {
            CliSide::Left => Side::MinLeft,
            CliSide::Right => Side::MinRight,
        }
    }
}

#[derive(Args)]
struct LevelArgs {
    #[arg(long, allow_negative_numbers = true)]
    x0: f64,
    #[arg(long, allow_negative_numbers = true)]
    v: f64,
}

#[derive(Args)]
struct PolemapArgs {
    #[arg(long, allow_negative_numbers = true)]
    x0: f64,
    #[arg(long, allow_negative_numbers = true)]
    yl: f64,
}

#[derive(Args)]
struct CalxArgs {
    #[arg(long, allow_negative_numbers = true)]
    x0: f64,
    #[arg(long, allow_negative_numbers = true)]
    yl: f64,
    /// Evaluate the right-side (inverse) pair instead.
    #[arg(long)]
    right: bool,
}

#[derive(Args)]
struct XfunArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long, required_unless_present = "batch", allow_negative_numbers = true)]
    x0: Option<f64>,
    /// File of x0 values (one per line); emits CSV x0,value,arg.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Write the witness trajectory samples as CSV to this path.
    #[arg(long)]
    dump_witness: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Xmin,
    Xminus,
    X,
    Ximin,
    Xi,
}

#[derive(Args)]
struct BvpArgs {
    #[command(subcommand)]
    action: BvpAction,
}

#[derive(Subcommand)]
enum BvpAction {
    /// Z(x0, y0, yup) and its witness level.
    Z {
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, allow_negative_numbers = true)]
        y0: f64,
        #[arg(long, allow_negative_numbers = true)]
        yup: f64,
    },
    /// Number of solutions of the boundary problem.
    Count {
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, allow_negative_numbers = true)]
        y0: f64,
        #[arg(long, allow_negative_numbers = true)]
        x1: f64,
        #[arg(long, allow_negative_numbers = true)]
        yup: f64,
    },
    /// Both solutions by two-branch shooting.
    Solve {
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, allow_negative_numbers = true)]
        y0: f64,
        #[arg(long, allow_negative_numbers = true)]
        x1: f64,
        #[arg(long, allow_negative_numbers = true)]
        yup: f64,
        /// Write solution curves as CSV files with this path prefix.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SpacingArgs {
    #[arg(long, allow_negative_numbers = true)]
    x0: f64,
    /// Anchor value; omit with --pole for the pole family.
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
    /// Maximize over the pole family at x0 instead of over levels.
    #[arg(long)]
    pole: bool,
    #[arg(long, value_enum, default_value_t = CliSide::Left)]
    side: CliSide,
    /// Emit a CSV sweep of the spacing over this many levels.
    #[arg(long)]
    sweep: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn solve_config(cli: &Cli) -> SolveConfig {
    let mut cfg = SolveConfig::default();
    if let Some(t) = cli.rk_tol {
        cfg.rk_rel_tol = t;
        cfg.rk_abs_tol = t;
    }
    cfg
}

fn write_out(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn emit_record<T: Serialize>(cli: &Cli, record: &T, pretty: String) -> painleve1::Result<bool> {
    let text = match cli.format {
        Format::Json | Format::Csv => serde_json::to_string_pretty(record).expect("serializable"),
        Format::Pretty => pretty,
    };
    write_out(cli, &text)?;
    Ok(true)
}

fn run(cli: Cli) -> painleve1::Result<bool> {
    let cfg = solve_config(&cli);
    match &cli.command {
        Command::Constants => {
            let b = constants();
            let out = ConstantsOut { c: b.c, v_min_max: b.v_min_max, x_max: b.x_max, c0: b.c0 };
            let pretty = format!(
                "C         = {}\nv_min_max = {}\nx_max     = {}\nC0        = {}",
                sig15(out.c),
                sig15(out.v_min_max),
                sig15(out.x_max),
                sig15(out.c0)
            );
            emit_record(&cli, &out, pretty)
        }
        Command::Slope(a) => {
            let side: Side = a.side.into();
            let f = slope_f(a.x0, a.y0, a.yl, side, &cfg)?;
            let d = if a.delta { Some(delta_sym(a.x0, a.y0, a.yl, side, &cfg)?) } else { None };
            let record = json!({
                "inputs": { "x0": a.x0, "y0": a.y0, "y_l": a.yl },
                "value": f,
                "delta": d,
                "residual": slope_residual(a.x0, a.y0, a.yl, f, side, &cfg)?,
            });
            let pretty = match d {
                Some(d) => format!("f = {}\ndelta = {}", sig15(f), sig15(d)),
                None => format!("f = {}", sig15(f)),
            };
            emit_record(&cli, &record, pretty)
        }
        Command::Level(a) => {
            let (y_l, x_min) = level_from_pole(PoleDatum { x_pole: a.x0, v: a.v }, &cfg)?;
            let record = json!({
                "inputs": { "x_pole": a.x0, "v": a.v },
                "y_l": y_l,
                "x_min": x_min,
            });
            emit_record(&cli, &record, format!("y_l = {}\nx_min = {}", sig15(y_l), sig15(x_min)))
        }
        Command::Polemap(a) => {
            let v = v_from_level(a.x0, a.yl, &cfg)?;
            let (back, _) = level_from_pole(PoleDatum { x_pole: a.x0, v }, &cfg)?;
            let record = json!({
                "inputs": { "x_pole": a.x0, "y_l": a.yl },
                "value": v,
                "residual": (back - a.yl).abs(),
            });
            emit_record(
                &cli,
                &record,
                format!("v = {}\nround-trip residual = {:.3e}", sig15(v), (back - a.yl).abs()),
            )
        }
        Command::Calx(a) => {
            if a.right {
                let (xi_min, xi) = var_xi(a.x0, a.yl, &cfg)?;
                let residual = (cal_x(xi, a.yl, &cfg)? - a.x0).abs();
                let record = json!({
                    "inputs": { "x0": a.x0, "y_l": a.yl },
                    "xi_min_level": xi_min,
                    "xi_level": xi,
                    "residual": residual,
                });
                emit_record(
                    &cli,
                    &record,
                    format!("Xi_min-level = {}\nXi-level = {}", sig15(xi_min), sig15(xi)),
                )
            } else {
                let v = v_from_level(a.x0, a.yl, &cfg)?;
                let (level_back, xm) = level_from_pole(PoleDatum { x_pole: a.x0, v }, &cfg)?;
                let xx = cal_x(a.x0, a.yl, &cfg)?;
                let record = json!({
                    "inputs": { "x0": a.x0, "y_l": a.yl },
                    "x_min_level": xm,
                    "x_level": xx,
                    "residual": (level_back - a.yl).abs(),
                });
                emit_record(
                    &cli,
                    &record,
                    format!("X_min-level = {}\nX-level = {}", sig15(xm), sig15(xx)),
                )
            }
        }
        Command::Xfun(a) => run_xfun(&cli, a, &cfg),
        Command::Bvp(a) => run_bvp(&cli, a, &cfg),
        Command::Spacing(a) => run_spacing(&cli, a, &cfg),
        Command::Table { n } => {
            let mut rep = run_table(*n, &cfg)?;
            if let Some(t) = cli.tol {
                rep.tolerance = t;
                rep.pass = true;
                for r in &mut rep.rows {
                    r.pass = r.abs_error <= t;
                    rep.pass &= r.pass;
                }
            }
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&rep).expect("serializable"),
                Format::Csv => table_csv(&rep),
                Format::Pretty => {
                    let mut s = format!("table {} (tolerance {:.0e})\n", rep.table, rep.tolerance);
                    for r in &rep.rows {
                        s.push_str(&format!(
                            "  {:<22} computed {:>22}  reference {:>22}  |err| {:.2e}  {}\n",
                            r.quantity,
                            sig15(r.computed),
                            sig15(r.reference),
                            r.abs_error,
                            if r.pass { "pass" } else { "FAIL" }
                        ));
                    }
                    s.push_str(if rep.pass { "PASS" } else { "FAIL" });
                    s
                }
            };
            write_out(&cli, &text)?;
            Ok(rep.pass)
        }
        Command::Conjecture { id } => {
            let rep = scan_conjecture(*id, &cfg, cli.seed)?;
            let pretty = format!(
                "conjecture {}: {}\ncases: {}, violations: {}, worst margin: {}\n{}",
                rep.id,
                rep.statement,
                rep.cases,
                rep.violations,
                rep.worst_margin,
                rep.notes.join("\n")
            );
            let pass = rep.violations == 0;
            emit_record(&cli, &rep, pretty)?;
            Ok(pass)
        }
    }
}

fn slope_residual(
    x0: f64,
    y0: f64,
    yl: f64,
    slope: f64,
    side: Side,
    cfg: &SolveConfig,
) -> painleve1::Result<f64> {
    let dir = match side {
        Side::MinLeft => Direction::Left,
        Side::MinRight => Direction::Right,
    };
    let t = integrate_ivp(x0, y0, slope, dir, cfg)?;
    Ok(t.minimum().map(|(_, y)| (y - yl).abs()).unwrap_or(f64::NAN))
}

fn eval_xfun(which: Which, x0: f64, cfg: &SolveConfig) -> painleve1::Result<(f64, f64, Trajectory)> {
    Ok(match which {
        Which::Xmin => {
            let r = x_min_fn(x0, cfg)?;
            (r.value, r.arg, r.witness)
        }
        Which::Xminus => {
            let r = x_minus_fn(x0, cfg)?;
            (r.value, r.arg, r.witness)
        }
        Which::X => {
            let r = x_fn(x0, cfg)?;
            (r.value, r.arg, r.witness)
        }
        Which::Ximin => {
            let (r, _) = xi_fns(x0, cfg)?;
            (r.value, r.arg, r.witness)
        }
        Which::Xi => {
            let (_, r) = xi_fns(x0, cfg)?;
            (r.value, r.arg, r.witness)
        }
    })
}

fn run_xfun(cli: &Cli, a: &XfunArgs, cfg: &SolveConfig) -> painleve1::Result<bool> {
    if let Some(batch) = &a.batch {
        let text = fs::read_to_string(batch)?;
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "x0" {
                continue;
            }
            let x0: f64 = line
                .parse()
                .map_err(|_| painleve1::Error::Domain(format!("bad x0 line {line:?}")))?;
            let (value, arg, _) = eval_xfun(a.which, x0, cfg)?;
            rows.push((x0, value, arg));
        }
        write_out(cli, &sweep_csv(&rows, "x0,value,arg"))?;
        return Ok(true);
    }
    let x0 = a.x0.expect("clap enforces x0 without batch");
    let (value, arg, witness) = if a.dump_witness.is_some() {
        let mut c = *cfg;
        c.store_samples = true;
        eval_xfun(a.which, x0, &c)?
    } else {
        eval_xfun(a.which, x0, cfg)?
    };
    if let Some(path) = &a.dump_witness {
        fs::write(path, trajectory_csv(&witness))?;
    }
    let record = json!({
        "inputs": { "which": which_name(a.which), "x0": x0 },
        "value": value,
        "arg": arg,
    });
    emit_record(cli, &record, format!("value = {}\narg = {}", sig15(value), sig15(arg)))
}

fn which_name(w: Which) -> &'static str {
    match w {
        Which::Xmin => "xmin",
        Which::Xminus => "xminus",
        Which::X => "x",
        Which::Ximin => "ximin",
        Which::Xi => "xi",
    }
}

fn run_bvp(cli: &Cli, a: &BvpArgs, cfg: &SolveConfig) -> painleve1::Result<bool> {
    match &a.action {
        BvpAction::Z { x0, y0, yup } => {
            let z = z_fn(*x0, *y0, *yup, cfg)?;
            let record = json!({
                "inputs": { "x0": x0, "y0": y0, "y_up": yup },
                "z": z.value,
                "y_l": z.y_l,
                "slope": z.slope,
            });
            emit_record(cli, &record, format!("Z = {}\ny_l = {}", sig15(z.value), sig15(z.y_l)))
        }
        BvpAction::Count { x0, y0, x1, yup } => {
            let p = BvpProblem::new(*x0, *y0, *x1, *yup)?;
            let n = count_solutions(&p, cfg)?;
            let record =
                json!({ "inputs": { "x0": x0, "y0": y0, "x1": x1, "y_up": yup }, "count": n });
            emit_record(cli, &record, format!("count = {n}"))
        }
        BvpAction::Solve { x0, y0, x1, yup, dump } => {
            let p = BvpProblem::new(*x0, *y0, *x1, *yup)?;
            let out = if dump.is_some() {
                let mut c = *cfg;
                c.store_samples = true;
                solve_bvp(&p, &c)?
            } else {
                solve_bvp(&p, cfg)?
            };
            if let Some(prefix) = dump {
                for (i, sol) in out.solutions.iter().enumerate() {
                    let path = prefix.with_extension(format!("sol{i}.csv"));
                    fs::write(path, trajectory_csv(sol))?;
                }
            }
            let record = json!({
                "inputs": { "x0": x0, "y0": y0, "x1": x1, "y_up": yup },
                "count": out.count,
                "z": out.z_value,
                "slopes": out.slopes,
                "solutions": out.solutions,
            });
            let pretty = format!(
                "count = {}\nZ = {}\nslopes = {:?}",
                out.count,
                sig15(out.z_value),
                out.slopes
            );
            emit_record(cli, &record, pretty)
        }
    }
}

fn run_spacing(cli: &Cli, a: &SpacingArgs, cfg: &SolveConfig) -> painleve1::Result<bool> {
    let side: Side = a.side.into();
    if a.pole {
        let r = delta_pole_sup(a.x0, side, cfg)?;
        let record = json!({
            "inputs": { "x0": a.x0, "family": "pole" },
            "value": r.value,
            "v": r.arg,
            "multiple_optima": r.multiple_optima,
        });
        return emit_record(
            cli,
            &record,
            format!("delta = {}\nv = {}", sig15(r.value), sig15(r.arg)),
        );
    }
    let y0 = a
        .y0
        .ok_or_else(|| painleve1::Error::Domain("spacing needs --y0 or --pole".into()))?;
    if let Some(n) = a.sweep {
        let mut rows = Vec::new();
        for i in 0..n {
            let y_l = y0.min(0.0) - 0.02 - 2.0 * i as f64 / n.max(1) as f64;
            if let Ok(d) = delta_level(a.x0, y0, y_l, side, cfg) {
                rows.push((y_l, d, 0.0));
            }
        }
        write_out(cli, &sweep_csv(&rows, "y_l,delta,unused"))?;
        return Ok(true);
    }
    let r = delta_sup(a.x0, y0, side, cfg)?;
    let record = json!({
        "inputs": { "x0": a.x0, "y0": y0 },
        "value": r.value,
        "y_l": r.arg,
        "multiple_optima": r.multiple_optima,
    });
    emit_record(cli, &record, format!("delta = {}\ny_l = {}", sig15(r.value), sig15(r.arg)))
}
