//! `calm-probe <phi-sweep|falsify|certify|report>`.
//!
//! Exit codes: 0 ok or NotFalsified, 1 usage or I/O error, 2 Falsified,
//! 3 CenterRejected.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::builtins;
use crate::certificates::{
    check_uwsm_inequality, constant_rank_check, inner_semicontinuity_probe, luwsmc_probe,
    r_regularity_probe, uwsm_modulus_for_model, uwsm_modulus_sweep, Directions, IscVerdict, Omega,
    ProbeConfig, RankVerdict, RatioProbeReport, DEFAULT_SUBSET_CAP,
};
use crate::error::{Error, Result};
use crate::falsifier::{falsify, CalmnessVerdict, CenterCheck, FalsifyConfig, Verdict, DEFAULT_KAPPA_GRID};
use crate::lp::DEFAULT_BASIS_CAP;
use crate::model::{parse_model, parse_point, BilevelModel, Point, Schedule};
use crate::report::{num, nums, Report, Table};
use crate::sampling;
use crate::tol::Tolerances;
use crate::value_function::{phi, PhiValue};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FALSIFIED: i32 = 2;
pub const EXIT_CENTER_REJECTED: i32 = 3;

pub const DEFAULT_PROBE_RADII: [f64; 4] = [0.5, 0.1, 0.02, 0.004];

#[derive(Debug, Parser)]
#[command(name = "calm-probe", version, about = "Partial calmness diagnostics for bilevel programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate φ(x) over a grid.
    PhiSweep {
        #[command(flatten)]
        run: RunConfig,
        /// `lo:hi:count` per coordinate, comma separated; one spec applies to all.
        #[arg(long, default_value = "-2:2:9", allow_hyphen_values = true)]
        grid: String,
    },
    /// Verify the center, sweep required penalties, evaluate witness paths.
    Falsify {
        #[command(flatten)]
        run: RunConfig,
        #[command(flatten)]
        center: CenterArg,
        #[arg(long, value_delimiter = ',', default_values_t = crate::falsifier::DEFAULT_RADII)]
        radii: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KAPPA_GRID)]
        kappa_grid: Vec<f64>,
        #[arg(long, default_value_t = 2500)]
        samples: usize,
    },
    /// Weak-sharp modulus, ratio probes, constant-rank and inner-semicontinuity checks.
    Certify {
        #[command(flatten)]
        run: RunConfig,
        #[command(flatten)]
        center: CenterArg,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_PROBE_RADII)]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, value_delimiter = ',', default_values_t = Check::all())]
        checks: Vec<Check>,
        /// Radius of the parameter ball for the constant-rank check.
        #[arg(long, default_value_t = 0.5)]
        rank_radius: f64,
        /// Samples for the weak-sharp inequality check.
        #[arg(long, default_value_t = 1000)]
        uwsm_samples: usize,
    },
    /// Render a stored report.
    Report {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct ModelSource {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// example-4-2, example-4-3-center, example-4-4, example-4-5 or fully-linear-random.
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long, env = "CALM_PROBE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override `key=value` (feas, dual, vertex, rank, pivot).
    #[arg(long = "tol")]
    pub tol: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CenterArg {
    /// `x=(..),y=(..)`; defaults to the model's candidate.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Uwsm,
    Luwsmc,
    RRegularity,
    Rank,
    Isc,
}

impl Check {
    fn all() -> Vec<Check> {
        vec![Check::Uwsm, Check::Luwsmc, Check::RRegularity, Check::Rank, Check::Isc]
    }

    fn name(self) -> &'static str {
        match self {
            Check::Uwsm => "uwsm",
            Check::Luwsmc => "luwsmc",
            Check::RRegularity => "r-regularity",
            Check::Rank => "rank",
            Check::Isc => "isc",
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Raw,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let start = Instant::now();
    let result = execute(&cli.command, stdout);
    let _ = writeln!(stderr, "elapsed: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::PhiSweep { run, grid } => {
            let (mut report, model, tol) = prepare(run, "phi-sweep")?;
            report.config("grid", grid);
            cmd_phi_sweep(&mut report, &model, grid, &tol)?;
            emit(&report, run.out.as_ref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Falsify {
            run,
            center,
            radii,
            kappa_grid,
            samples,
        } => {
            let (mut report, model, tol) = prepare(run, "falsify")?;
            let center = resolve_center(&model, center)?;
            report.config("center", point_text(&center));
            report.config("radii", nums(radii));
            report.config("kappa-grid", nums(kappa_grid));
            report.config("samples", samples);
            let cfg = FalsifyConfig {
                radii: radii.clone(),
                samples_per_radius: *samples,
                seed: run.seed,
                kappa_grid: kappa_grid.clone(),
                tol,
                ..FalsifyConfig::default()
            };
            let verdict = cmd_falsify(&mut report, &model, &center, &cfg)?;
            emit(&report, run.out.as_ref(), stdout)?;
            Ok(match verdict {
                Verdict::Falsified => EXIT_FALSIFIED,
                Verdict::NotFalsified => EXIT_OK,
                Verdict::CenterRejected => EXIT_CENTER_REJECTED,
            })
        }
        Command::Certify {
            run,
            center,
            radii,
            samples,
            checks,
            rank_radius,
            uwsm_samples,
        } => {
            let (mut report, model, tol) = prepare(run, "certify")?;
            let center = resolve_center(&model, center)?;
            report.config("center", point_text(&center));
            report.config("radii", nums(radii));
            report.config("samples", samples);
            report.config(
                "checks",
                checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(","),
            );
            report.config("rank-radius", num(*rank_radius));
            report.config("uwsm-samples", uwsm_samples);
            let opts = CertifyOptions {
                radii: radii.clone(),
                samples: *samples,
                checks: checks.clone(),
                rank_radius: *rank_radius,
                uwsm_samples: *uwsm_samples,
                seed: run.seed,
                tol,
            };
            cmd_certify(&mut report, &model, &center, &opts)?;
            emit(&report, run.out.as_ref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Report { file, format, out } => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| Error::Io(format!("{}: {e}", file.display())))?;
            let report = Report::parse(&text)?;
            let rendered = match format {
                Format::Text => report.render(),
                Format::Csv => report.to_csv(),
                Format::Raw => report.to_text()?,
            };
            write_out(&rendered, out.as_ref(), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn load_model(run: &RunConfig) -> Result<(String, String)> {
    match (&run.source.model, &run.source.builtin) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            Ok((format!("model={}", path.display()), text))
        }
        (None, Some(name)) => Ok((format!("builtin={name}"), builtins::builtin_text(name, run.seed)?)),
        _ => Err(Error::Config("exactly one of --model and --builtin is required".into())),
    }
}

fn prepare(run: &RunConfig, command: &str) -> Result<(Report, BilevelModel, Tolerances)> {
    let mut tol = Tolerances::default();
    for o in &run.tol {
        tol.apply_override(o)?;
    }
    let (source, text) = load_model(run)?;
    let model = parse_model(&text)?;
    let mut report = Report::default();
    report.config("command", command);
    let (key, value) = source.split_once('=').expect("source is key=value");
    report.config(key, value);
    report.config("seed", run.seed);
    report.config(
        "tol",
        format!(
            "feas={} dual={} vertex={} rank={} pivot={}",
            num(tol.feas),
            num(tol.dual),
            num(tol.vertex),
            num(tol.rank),
            num(tol.pivot)
        ),
    );
    report.model = text;
    report.summary("n", model.n);
    report.summary("m", model.m);
    report.summary("q", model.q);
    report.summary("form", model.form);
    report.summary("inferred-form", model.infer_form());
    report.summary("paths", model.paths.len());
    if let Some(c) = &model.candidate {
        report.summary("candidate", point_text(c));
    }
    Ok((report, model, tol))
}

fn emit(report: &Report, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    write_out(&report.to_text()?, out, stdout)
}

fn write_out(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn point_text(p: &Point) -> String {
    let join = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ");
    format!("x=({}) y=({})", join(&p.x), join(&p.y))
}

fn resolve_center(model: &BilevelModel, arg: &CenterArg) -> Result<Point> {
    let center = match &arg.center {
        Some(text) => parse_point(text)?,
        None => model
            .candidate
            .clone()
            .ok_or_else(|| Error::Config("the model has no [candidate]; pass --center".into()))?,
    };
    model.check_point(&center)?;
    Ok(center)
}

/// Grid points from `lo:hi:count` specs, first coordinate varying slowest.
pub fn parse_grid(spec: &str, n: usize) -> Result<Vec<Vec<f64>>> {
    let bad = || Error::Config(format!("bad grid spec '{spec}' (expected lo:hi:count per coordinate)"));
    let mut axes = Vec::new();
    for part in spec.split(',') {
        let fields: Vec<&str> = part.trim().split(':').collect();
        let [lo, hi, count] = fields[..] else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        if count == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo || (count == 1 && hi != lo) {
            return Err(bad());
        }
        let axis: Vec<f64> = if count == 1 {
            vec![lo]
        } else {
            (0..count)
                .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
                .collect()
        };
        axes.push(axis);
    }
    if axes.len() == 1 && n > 1 {
        axes = vec![axes[0].clone(); n];
    }
    if axes.len() != n {
        return Err(Error::Config(format!(
            "grid has {} axes, model has n = {n}",
            axes.len()
        )));
    }
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

fn x_columns(n: usize, m: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=m).map(|i| format!("y{i}")))
        .collect()
}

pub fn cmd_phi_sweep(report: &mut Report, model: &BilevelModel, grid: &str, tol: &Tolerances) -> Result<()> {
    let points = parse_grid(grid, model.n)?;
    let mut columns = x_columns(model.n, 0);
    columns.extend(["status".to_string(), "value".to_string()]);
    let mut table = Table::with_columns("phi", columns);
    let mut finite = 0;
    for x in &points {
        let v = phi(model, x, tol)?;
        let (status, value) = match v {
            PhiValue::Finite(v) => {
                finite += 1;
                ("finite", v)
            }
            PhiValue::PlusInfinity => ("infeasible", f64::INFINITY),
            PhiValue::MinusInfinity => ("unbounded", f64::NEG_INFINITY),
        };
        let mut row: Vec<String> = x.iter().map(|v| num(*v)).collect();
        row.push(status.into());
        row.push(num(value));
        table.push(row);
    }
    report.result("points", points.len());
    report.result("finite", finite);
    report.tables.push(table);
    Ok(())
}

fn trace_table(name: &str, model: &BilevelModel, v: &CalmnessVerdict) -> Option<Table> {
    let w = v.witness.as_ref()?;
    let mut columns = vec!["t".to_string()];
    columns.extend(x_columns(model.n, model.m));
    columns.extend(["feasible", "F", "u"].map(String::from));
    columns.extend(w.kappa_grid.iter().map(|k| format!("penalized@{}", num(*k))));
    columns.push("required_kappa".into());
    let mut table = Table::with_columns(name, columns);
    for r in &w.trace {
        let mut row = vec![num(r.t)];
        row.extend(r.point.x.iter().chain(&r.point.y).map(|v| num(*v)));
        row.push(r.feasible.to_string());
        row.push(num(r.f_value));
        row.push(num(r.u));
        row.extend(r.penalized.iter().map(|v| num(*v)));
        row.push(num(r.required_kappa));
        table.push(row);
    }
    Some(table)
}

pub fn cmd_falsify(report: &mut Report, model: &BilevelModel, center: &Point, cfg: &FalsifyConfig) -> Result<Verdict> {
    let out = falsify(model, center, &model.paths, cfg)?;
    report.result("verdict", out.verdict);
    match &out.center_check {
        CenterCheck::Ok => report.result("center-check", "ok"),
        CenterCheck::Rejected(reason) => {
            report.result("center-check", "rejected");
            report.result("center-reason", reason);
        }
    }
    if let Some(sweep) = &out.sweep {
        report.result("sweep.verdict", sweep.verdict);
        report.result("sweep.trend", sweep.trend);
        report.result("sweep.kappa-hat", num(sweep.kappa_hat));
        report.result("sweep.samples", sweep.samples);
        let mut table = Table::new(
            "sweep",
            &["epsilon", "attempts", "samples", "skipped_phi", "infinite", "sup_required_kappa"],
        );
        for r in &sweep.per_radius {
            table.push(vec![
                num(r.epsilon),
                r.attempts.to_string(),
                r.sample_count.to_string(),
                r.skipped_phi.to_string(),
                r.infinite_count.to_string(),
                num(r.sup_required_kappa),
            ]);
        }
        report.tables.push(table);
        report.tables.extend(trace_table("sweep-witness", model, sweep));
    }
    for (i, p) in out.paths.iter().enumerate() {
        let key = format!("path{}", i + 1);
        report.result(&format!("{key}.verdict"), p.verdict);
        report.result(&format!("{key}.trend"), p.trend);
        report.result(&format!("{key}.kappa-hat"), num(p.kappa_hat));
        report.result(&format!("{key}.schedule"), &model.paths[i].schedule);
        report.tables.extend(trace_table(&key, model, p));
    }
    if out.verdict == Verdict::NotFalsified {
        report.result("note", "NotFalsified is sampling evidence; it does not certify partial calmness");
    }
    Ok(out.verdict)
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub radii: Vec<f64>,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub rank_radius: f64,
    pub uwsm_samples: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

fn ratio_table(name: &str, r: &RatioProbeReport) -> Table {
    let mut t = Table::new(
        name,
        &[
            "epsilon",
            "attempts",
            "samples",
            "ratios",
            "worst_ratio",
            "alpha_estimate",
            "skipped_phi",
            "skipped_zero",
            "hard_violations",
        ],
    );
    for s in &r.per_radius {
        t.push(vec![
            num(s.epsilon),
            s.attempts.to_string(),
            s.sample_count.to_string(),
            s.ratio_count.to_string(),
            num(s.worst_ratio),
            num(s.alpha_estimate),
            s.skipped_phi.to_string(),
            s.skipped_zero.to_string(),
            s.hard_violations.to_string(),
        ]);
    }
    t
}

fn record_error(report: &mut Report, check: Check, e: Error) -> Result<()> {
    match e {
        Error::Io(_) => Err(e),
        other => {
            report.result(&format!("{}.error", check.name()), other.to_string().replace('\n', " "));
            Ok(())
        }
    }
}

pub fn cmd_certify(report: &mut Report, model: &BilevelModel, center: &Point, opts: &CertifyOptions) -> Result<()> {
    let tol = &opts.tol;
    for &check in &opts.checks {
        let outcome = match check {
            Check::Uwsm => certify_uwsm(report, model, center, opts),
            Check::Luwsmc | Check::RRegularity => {
                let cfg = ProbeConfig {
                    tol: *tol,
                    ..ProbeConfig::new(opts.radii.clone(), opts.samples, opts.seed)
                };
                let probe = if check == Check::Luwsmc {
                    luwsmc_probe(model, center, &cfg)
                } else {
                    r_regularity_probe(model, center, &cfg, Omega::DomPhi)
                };
                probe.map(|r| {
                    report.result(&format!("{}.trend", check.name()), r.trend);
                    report.tables.push(ratio_table(check.name(), &r));
                })
            }
            Check::Rank => constant_rank_check(model, center, opts.rank_radius, 50, opts.seed, tol, DEFAULT_SUBSET_CAP)
                .map(|p| {
                    report.result("rank.verdict", p.verdict.name());
                    report.result(
                        "rank.active-set",
                        format!("{{{}}}", p.active_set.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")),
                    );
                    if let RankVerdict::Violated {
                        subset,
                        x_witness,
                        rank_center,
                        rank_witness,
                        ..
                    } = &p.verdict
                    {
                        report.result(
                            "rank.subset",
                            format!("{{{}}}", subset.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")),
                        );
                        report.result(
                            "rank.witness",
                            format!("rank {rank_center} at x̄, rank {rank_witness} at x = ({})", nums(x_witness)),
                        );
                    }
                    let mut t = Table::new("rank", &["subset", "ranks", "constant"]);
                    for s in &p.subset_results {
                        t.push(vec![
                            s.subset.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
                            s.ranks.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" "),
                            s.constant.to_string(),
                        ]);
                    }
                    report.tables.push(t);
                }),
            Check::Isc => inner_semicontinuity_probe(
                model,
                center,
                &Schedule::default().values(),
                &Directions::CoordinateAndRandom(4),
                opts.seed,
                tol,
            )
            .map(|r| {
                report.result("isc.verdict", r.verdict.name());
                if let IscVerdict::Violated(k) = r.verdict {
                    report.result("isc.direction", format!("({})", nums(&r.directions[k])));
                }
                report.result("isc.non-finite", r.non_finite.len());
                let mut t = Table::new("isc", &["t", "sup_dist"]);
                for (t_val, d) in r.schedule.iter().zip(&r.sup_per_t) {
                    t.push(vec![num(*t_val), num(*d)]);
                }
                report.tables.push(t);
            }),
        };
        if let Err(e) = outcome {
            record_error(report, check, e)?;
        }
    }
    Ok(())
}

fn certify_uwsm(report: &mut Report, model: &BilevelModel, center: &Point, opts: &CertifyOptions) -> Result<()> {
    let tol = &opts.tol;
    match uwsm_modulus_for_model(model, tol, DEFAULT_BASIS_CAP) {
        Ok(cert) => {
            report.result("uwsm.kind", "certificate");
            report.result("uwsm.M", num(cert.modulus));
            report.result("uwsm.vertices", cert.witness_vertices.len());
            let radius = opts.radii.first().copied().unwrap_or(0.5);
            let slack = tol.feas * (1.0 + cert.modulus);
            let check = check_uwsm_inequality(
                model,
                cert.modulus,
                &center.x,
                radius,
                opts.uwsm_samples,
                slack,
                opts.seed,
                tol,
            )?;
            report.result("uwsm.check.samples", check.samples);
            report.result("uwsm.check.violations", check.violations);
            report.result("uwsm.check.max-excess", num(check.max_excess));
            report.result("uwsm.check.max-duality-gap", num(check.max_duality_gap));
            report.result("uwsm.check.max-xi3", num(check.max_xi3));
            Ok(())
        }
        Err(Error::FormNotSupported(msg)) => {
            report.result("uwsm.kind", "sweep");
            report.result("uwsm.notice", msg);
            let radius = opts.radii.first().copied().unwrap_or(0.5);
            let mut rng = sampling::rng(opts.seed);
            let mut xs = vec![center.x.clone()];
            for _ in 0..8 {
                let u = sampling::unit_offset(&mut rng, model.n);
                xs.push(center.x.iter().zip(&u).map(|(c, u)| c + radius * u).collect());
            }
            let mut kept = Vec::new();
            for x in xs {
                if phi(model, &x, tol)?.finite().is_some() {
                    kept.push(x);
                }
            }
            let cert = uwsm_modulus_sweep(model, &kept, tol, DEFAULT_BASIS_CAP)?;
            report.result("uwsm.M", num(cert.modulus));
            report.result("uwsm.vertices", cert.witness_vertices.len());
            report.result("uwsm.growing", cert.growing);
            let mut columns = x_columns(model.n, 0);
            columns.push("M".into());
            let mut t = Table::with_columns("uwsm-sweep", columns);
            for (x, m) in &cert.per_x_moduli {
                let mut row: Vec<String> = x.iter().map(|v| num(*v)).collect();
                row.push(num(*m));
                t.push(row);
            }
            report.tables.push(t);
            Ok(())
        }
        Err(e) => Err(e),
    }
}
