//! Command-line front end: parameter ingestion, one subcommand per analysis,
//! and CSV / JSON / SVG output.

pub mod report;
pub mod svg;

use std::f64::consts::LN_10;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use motzkin_core::asymptotics::estimate;
use motzkin_core::closedform::{taylor_coefficients, EgfEvaluator};
use motzkin_core::exact::{
    big_ln, build_triangle_with_budget, final_log_row, log_poly_from_row, log_rows_at, HeightDistribution,
    Representation,
};
use motzkin_core::ldp::{LdpTable, LimitCgf};
use motzkin_core::saddlepoint::{profile, CumulantEvaluator, ProfileRow};
use motzkin_core::specfun::log_factorial;
use motzkin_core::ModelParams;

use report::{Cell, Report};
use svg::{svg_plot, Labels, Scale, Series};

/// Default memory budget for the big integers of an exact triangle.
pub const DEFAULT_BUDGET_MB: usize = 256;
/// Largest `n` for anything computed in log space.
pub const MAX_LOG_N: usize = 20_000;

const DEFAULT_U_GRID: &str = "0.05:0.95:19";
const FIGURE_N_LIST: [usize; 4] = [100, 200, 400, 800];

#[derive(Debug, Parser)]
#[command(name = "motzkin", version, about = "Terminal-height statistics of weighted Motzkin paths")]
pub struct Cli {
    /// Parameter file, or inline `a=1 b=5 c=6 alpha0=8 beta0=5 gamma0=1` or
    /// JSON. Defaults to the values shown.
    #[arg(long, global = true)]
    pub params: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file, or output directory for `figures` (default `figures`). Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight triangle w[n][k] for rows 0..=n.
    Triangle {
        #[arg(long)]
        n: usize,
        /// Store log-weights instead of exact integers.
        #[arg(long)]
        log_space: bool,
        /// Emit only row n (streamed, log space).
        #[arg(long)]
        final_row: bool,
        /// Memory budget in MiB for exact integers; exceeding it is a capacity error.
        #[arg(long, default_value_t = DEFAULT_BUDGET_MB)]
        budget_mb: usize,
    },
    /// Normalized distribution of the terminal height at length n.
    Dist {
        #[arg(long)]
        n: usize,
    },
    /// Exact versus asymptotic log P_n(x) and moments.
    Asym {
        #[arg(long)]
        n: Option<usize>,
        /// Comma list of lengths, one output row each.
        #[arg(long = "N-list")]
        n_list: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        x: f64,
    },
    /// Exact, Daniels and Gaussian point probabilities on [eps n, (1-eps) n].
    Saddle {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Log10 vertical axis for SVG output.
        #[arg(long)]
        log_scale: bool,
    },
    /// Rate function with empirical decay rates, or the limit CGF on a theta grid.
    Ldp {
        /// Comma list or `start:stop:count`.
        #[arg(long, conflicts_with = "theta_grid", allow_hyphen_values = true)]
        u_grid: Option<String>,
        /// Comma list or `start:stop:count`.
        #[arg(long, allow_hyphen_values = true)]
        theta_grid: Option<String>,
        /// Lengths for the empirical columns.
        #[arg(long = "N-list")]
        n_list: Option<String>,
    },
    /// Taylor coefficients of the closed form against the exact P_n(x)/n!.
    EgfCheck {
        /// Largest coefficient index.
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Comma list of evaluation points.
        #[arg(long, default_value = "0.5,1,2")]
        x: String,
    },
    /// Profile plots (linear and log10) and the rate-scaling table.
    Figures {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Comma list or `start:stop:count` [default: 0.05:0.95:19].
        #[arg(long)]
        u_grid: Option<String>,
        /// Lengths for the rate table [default: 100,200,400,800].
        #[arg(long = "N-list")]
        n_list: Option<String>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] motzkin_core::Error),
    #[error(transparent)]
    Plot(#[from] svg::PlotError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use motzkin_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(E::InvalidParams(_)) => 2,
            CliError::Core(E::Capacity(_) | E::Size(_)) => 4,
            CliError::Core(_) | CliError::Plot(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// One output file. `name` is `None` for single-artifact commands, which go
/// to `--out` or stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: Option<String>,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
}

impl Rendered {
    fn single(contents: String) -> Self {
        Rendered {
            artifacts: vec![Artifact {
                name: None,
                contents,
            }],
            warnings: Vec::new(),
        }
    }
}

/// Applies `MOTZKIN_THREADS` to the global worker pool.
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(v) = value else { return Ok(()) };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| config(format!("MOTZKIN_THREADS must be a positive integer, got `{v}`")))?;
    // A second call in the same process (tests) finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn load_params(arg: Option<&str>) -> Result<ModelParams> {
    let Some(arg) = arg else {
        return Ok(ModelParams::reference());
    };
    let path = Path::new(arg);
    let text = if !arg.contains('=') && !arg.trim_start().starts_with('{') && path.is_file() {
        fs::read_to_string(path).map_err(|e| CliError::Io {
            path: arg.to_string(),
            source: e,
        })?
    } else {
        arg.to_string()
    };
    Ok(ModelParams::parse(&text)?)
}

/// Comma-separated floats, or `start:stop:count` for an inclusive linear grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || config(format!("bad grid `{text}`: use `v1,v2,...` or `start:stop:count`"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(bad());
        };
        let start: f64 = start.trim().parse().map_err(|_| bad())?;
        let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        return Ok(match count {
            0 => return Err(bad()),
            1 => vec![start],
            _ => (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect(),
        });
    }
    let values = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

pub fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    let list = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| config(format!("bad --N-list entry `{t}`: expected a nonnegative integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    for &n in &list {
        check_log_n(n)?;
    }
    Ok(list)
}

fn check_log_n(n: usize) -> Result<()> {
    if n > MAX_LOG_N {
        return Err(config(format!("n = {n} exceeds the log-space limit {MAX_LOG_N}")));
    }
    Ok(())
}

fn no_svg(command: &str) -> CliError {
    config(format!("`{command}` has no SVG rendering; use --format csv or json"))
}

/// Computes every artifact for the command without touching the filesystem.
pub fn render(cli: &Cli) -> Result<Rendered> {
    let params = load_params(cli.params.as_deref())?;
    match &cli.command {
        Command::Triangle {
            n,
            log_space,
            final_row,
            budget_mb,
        } => triangle(&params, *n, *log_space, *final_row, *budget_mb, cli.format),
        Command::Dist { n } => dist(&params, *n, cli.format),
        Command::Asym { n, n_list, x } => asym(&params, *n, n_list.as_deref(), *x, cli.format),
        Command::Saddle { n, epsilon, log_scale } => saddle(&params, *n, *epsilon, *log_scale, cli.format),
        Command::Ldp { u_grid, theta_grid, n_list } => {
            let n_list = n_list.as_deref().map(parse_n_list).transpose()?.unwrap_or_default();
            match theta_grid {
                Some(g) => cgf_table(&params, &parse_grid(g)?, &n_list, cli.format),
                None => ldp(&params, &parse_grid(u_grid.as_deref().unwrap_or(DEFAULT_U_GRID))?, &n_list, cli.format),
            }
        }
        Command::EgfCheck { n, x } => egf_check(&params, *n, &parse_grid(x)?, cli.format),
        Command::Figures { n, epsilon, u_grid, n_list } => {
            let u_grid = parse_grid(u_grid.as_deref().unwrap_or(DEFAULT_U_GRID))?;
            let n_list = match n_list {
                Some(s) => parse_n_list(s)?,
                None => FIGURE_N_LIST.to_vec(),
            };
            figures(&params, *n, *epsilon, &u_grid, &n_list)
        }
    }
}

/// Renders and writes the artifacts; returns the warnings to report.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let rendered = render(cli)?;
    let is_figures = matches!(cli.command, Command::Figures { .. });
    if is_figures {
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        for a in &rendered.artifacts {
            let path = dir.join(a.name.as_deref().expect("figure artifacts are named"));
            fs::write(&path, &a.contents).map_err(|e| io_error(&path, e))?;
        }
    } else {
        let contents = &rendered.artifacts[0].contents;
        match &cli.out {
            Some(path) => fs::write(path, contents).map_err(|e| io_error(path, e))?,
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(contents.as_bytes())
                    .and_then(|_| lock.flush())
                    .map_err(|e| io_error(Path::new("<stdout>"), e))?;
            }
        }
    }
    Ok(rendered.warnings)
}

fn io_error(path: &Path, source: io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn emit(report: Report, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(report.to_csv()),
        Format::Json => Ok(report.to_json()),
        Format::Svg => Err(no_svg(&report.command)),
    }
}

fn triangle(
    params: &ModelParams,
    n: usize,
    log_space: bool,
    final_row: bool,
    budget_mb: usize,
    format: Format,
) -> Result<Rendered> {
    if format == Format::Svg {
        return Err(no_svg("triangle"));
    }
    let mut report = Report::new("triangle", params);
    if final_row {
        check_log_n(n)?;
        report.set_columns(&["n", "k", "log_weight"]);
        for (k, lw) in final_log_row(params, n).into_iter().enumerate() {
            report.push(vec![Cell::Int(n as i64), Cell::Int(k as i64), Cell::Float(lw)]);
        }
        return Ok(Rendered::single(emit(report, format)?));
    }
    let representation = if log_space {
        check_log_n(n)?;
        Representation::LogSpace
    } else {
        Representation::Exact
    };
    let tri = build_triangle_with_budget(params, n, representation, budget_mb.saturating_mul(1 << 20))?;
    match tri.representation() {
        Representation::Exact => {
            report.set_columns(&["n", "k", "log_weight", "weight_decimal"]);
            for row_n in 0..=n {
                for (k, w) in tri.exact_row(row_n).expect("exact rows").iter().enumerate() {
                    report.push(vec![
                        Cell::Int(row_n as i64),
                        Cell::Int(k as i64),
                        Cell::Float(big_ln(w)),
                        Cell::Text(w.to_string()),
                    ]);
                }
            }
        }
        Representation::LogSpace => {
            report.set_columns(&["n", "k", "log_weight"]);
            for row_n in 0..=n {
                for (k, lw) in tri.log_row(row_n).into_iter().enumerate() {
                    report.push(vec![Cell::Int(row_n as i64), Cell::Int(k as i64), Cell::Float(lw)]);
                }
            }
        }
    }
    Ok(Rendered::single(emit(report, format)?))
}

fn dist(params: &ModelParams, n: usize, format: Format) -> Result<Rendered> {
    check_log_n(n)?;
    let d = HeightDistribution::from_log_row(&final_log_row(params, n));
    let mut report = Report::new("dist", params);
    report.meta("n", Cell::Int(n as i64));
    report.meta("mean", Cell::Float(d.mean));
    report.meta("variance", Cell::Float(d.variance));
    report.meta("log_total", Cell::Float(d.log_total));
    report.set_columns(&["k", "log_prob", "prob"]);
    for (k, &lp) in d.log_p.iter().enumerate() {
        report.push(vec![Cell::Int(k as i64), Cell::Float(lp), Cell::Float(lp.exp())]);
    }
    if format == Format::Svg {
        let ks: Vec<f64> = (0..=n).map(|k| k as f64).collect();
        let probs: Vec<f64> = d.log_p.iter().map(|lp| lp.exp()).collect();
        let plot = svg_plot(
            &[Series::new("exact", ks, probs)],
            Scale::Linear,
            &Labels {
                title: &format!("Terminal height, n = {n}"),
                x: "k",
                y: "p(n,k)",
            },
        )?;
        return Ok(with_plot_warnings(plot));
    }
    Ok(Rendered::single(emit(report, format)?))
}

fn with_plot_warnings(plot: svg::Plot) -> Rendered {
    let mut r = Rendered::single(plot.svg);
    if plot.dropped > 0 {
        r.warnings.push(format!("{} non-positive or non-finite points dropped from the plot", plot.dropped));
    }
    r
}

fn asym(params: &ModelParams, n: Option<usize>, n_list: Option<&str>, x: f64, format: Format) -> Result<Rendered> {
    if format == Format::Svg {
        return Err(no_svg("asym"));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(config(format!("--x must be positive, got {x}")));
    }
    let ns = match (n, n_list) {
        (_, Some(list)) => parse_n_list(list)?,
        (Some(n), None) => {
            check_log_n(n)?;
            vec![n]
        }
        (None, None) => return Err(config("asym needs --n or --N-list")),
    };
    let rows = log_rows_at(params, &ns);
    let mut report = Report::new("asym", params);
    report.meta("x", Cell::Float(x));
    report.meta("regime", Cell::Text(params.classify().name().to_string()));
    report.set_columns(&[
        "n",
        "log_pn_exact",
        "log_pn_asym",
        "log_rel_err",
        "mean_exact",
        "mean_asym",
        "variance_exact",
        "variance_asym",
    ]);
    for (&n, row) in ns.iter().zip(&rows) {
        let est = estimate(params, x, n)?;
        let exact = log_poly_from_row(row, x);
        let d = HeightDistribution::from_log_row(row);
        report.push(vec![
            Cell::Int(n as i64),
            Cell::Float(exact),
            Cell::Float(est.log_pn),
            Cell::Float((est.log_pn - exact).abs() / exact.abs()),
            Cell::Float(d.mean),
            Cell::Float(est.mean),
            Cell::Float(d.variance),
            Cell::Float(est.variance),
        ]);
    }
    Ok(Rendered::single(emit(report, format)?))
}

fn profile_rows(params: &ModelParams, n: usize, epsilon: f64) -> Result<Vec<ProfileRow>> {
    check_log_n(n)?;
    let ev = CumulantEvaluator::from_params(params, n);
    Ok(profile(&ev, epsilon)?)
}

fn profile_series(rows: &[ProfileRow]) -> Vec<Series> {
    let ks: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let col = |f: fn(&ProfileRow) -> f64| rows.iter().map(|r| f(r).exp()).collect::<Vec<_>>();
    vec![
        Series::new("exact", ks.clone(), col(|r| r.log_exact)),
        Series::new("Gaussian", ks.clone(), col(|r| r.log_gaussian)),
        Series::new("Daniels", ks, col(|r| r.log_daniels)),
    ]
}

fn saddle(params: &ModelParams, n: usize, epsilon: f64, log_scale: bool, format: Format) -> Result<Rendered> {
    let rows = profile_rows(params, n, epsilon)?;
    if format == Format::Svg {
        let scale = if log_scale { Scale::Log10 } else { Scale::Linear };
        let plot = svg_plot(
            &profile_series(&rows),
            scale,
            &Labels {
                title: &format!("Point probabilities, n = {n}"),
                x: "k",
                y: "p(n,k)",
            },
        )?;
        return Ok(with_plot_warnings(plot));
    }
    let mut report = Report::new("saddle", params);
    report.meta("n", Cell::Int(n as i64));
    report.meta("epsilon", Cell::Float(epsilon));
    report.set_columns(&["k", "log10_exact", "log10_daniels", "log10_gaussian"]);
    for r in &rows {
        report.push(vec![
            Cell::Int(r.k as i64),
            Cell::Float(r.log_exact / LN_10),
            Cell::Float(r.log_daniels / LN_10),
            Cell::Float(r.log_gaussian / LN_10),
        ]);
    }
    Ok(Rendered::single(emit(report, format)?))
}

fn ldp_report(params: &ModelParams, table: &LdpTable) -> Report {
    let mut report = Report::new("ldp", params);
    let mut columns = vec!["u".to_string(), "theta".into(), "I".into()];
    columns.extend(table.n_list.iter().map(|n| format!("emp_{n}")));
    report.columns = columns;
    for (s, emp) in table.samples.iter().zip(&table.empirical) {
        let mut row = vec![Cell::Float(s.u), Cell::Float(s.theta), Cell::Float(s.rate)];
        row.extend(emp.iter().map(|&e| Cell::Float(e)));
        report.push(row);
    }
    report
}

fn ldp(params: &ModelParams, u_grid: &[f64], n_list: &[usize], format: Format) -> Result<Rendered> {
    let table = LdpTable::build(params, u_grid, n_list)?;
    if format == Format::Svg {
        let us: Vec<f64> = table.samples.iter().map(|s| s.u).collect();
        let mut series = vec![Series::new("I(u)", us.clone(), table.samples.iter().map(|s| s.rate).collect())];
        for (j, n) in table.n_list.iter().enumerate() {
            series.push(Series::new(
                format!("N = {n}"),
                us.clone(),
                table.empirical.iter().map(|e| e[j]).collect(),
            ));
        }
        let plot = svg_plot(
            &series,
            Scale::Linear,
            &Labels {
                title: "Rate function",
                x: "u",
                y: "I(u)",
            },
        )?;
        return Ok(with_plot_warnings(plot));
    }
    Ok(Rendered::single(emit(ldp_report(params, &table), format)?))
}

fn cgf_table(params: &ModelParams, thetas: &[f64], n_list: &[usize], format: Format) -> Result<Rendered> {
    if format == Format::Svg {
        return Err(no_svg("ldp --theta-grid"));
    }
    let cgf = LimitCgf::new(params)?;
    let evs: Vec<CumulantEvaluator> = log_rows_at(params, n_list)
        .into_iter()
        .map(CumulantEvaluator::from_log_row)
        .collect();
    let mut report = Report::new("ldp", params);
    let mut columns = vec!["theta".to_string(), "F".into(), "F1".into(), "F2".into()];
    columns.extend(n_list.iter().map(|n| format!("kappa_{n}")));
    report.columns = columns;
    for &t in thetas {
        let v = cgf.eval(t)?;
        let mut row = vec![Cell::Float(t), Cell::Float(v.f), Cell::Float(v.f1), Cell::Float(v.f2)];
        for ev in &evs {
            let n = ev.n().max(1) as f64;
            row.push(Cell::Float(ev.centered_kappa(t) / n));
        }
        report.push(row);
    }
    Ok(Rendered::single(emit(report, format)?))
}

fn egf_check(params: &ModelParams, n: usize, xs: &[f64], format: Format) -> Result<Rendered> {
    if format == Format::Svg {
        return Err(no_svg("egf-check"));
    }
    let ev = EgfEvaluator::new(params)?;
    let taylor = xs
        .iter()
        .map(|&x| taylor_coefficients(&ev, x, n.saturating_add(1)))
        .collect::<motzkin_core::Result<Vec<_>>>()?;
    let rows = log_rows_at(params, &(0..=n).collect::<Vec<_>>());
    let mut report = Report::new("egf-check", params);
    report.set_columns(&["n", "x", "taylor", "exact", "rel_err"]);
    for (&x, coeffs) in xs.iter().zip(&taylor) {
        for (m, (c, row)) in coeffs.iter().zip(&rows).enumerate() {
            let exact = (log_poly_from_row(row, x) - log_factorial(m as u64)).exp();
            report.push(vec![
                Cell::Int(m as i64),
                Cell::Float(x),
                Cell::Float(*c),
                Cell::Float(exact),
                Cell::Float((c - exact).abs() / exact),
            ]);
        }
    }
    Ok(Rendered::single(emit(report, format)?))
}

fn figures(params: &ModelParams, n: usize, epsilon: f64, u_grid: &[f64], n_list: &[usize]) -> Result<Rendered> {
    let rows = profile_rows(params, n, epsilon)?;
    let mut warnings = Vec::new();
    let title = format!("{params}, n = {n}");

    let linear = svg_plot(
        &profile_series(&rows),
        Scale::Linear,
        &Labels {
            title: &title,
            x: "k",
            y: "p(n,k)",
        },
    )?;

    let mut log_series = profile_series(&rows);
    match LimitCgf::new(params) {
        Ok(cgf) => {
            let mut ks = Vec::new();
            let mut line = Vec::new();
            for r in &rows {
                let u = r.k as f64 / n as f64;
                if let Ok(s) = cgf.rate(u) {
                    ks.push(r.k as f64);
                    line.push((-(n as f64) * s.rate).exp());
                }
            }
            if ks.len() == rows.len() {
                log_series.push(Series::new("-n I(k/n) / ln 10", ks, line));
            } else {
                warnings.push("rate function unavailable on part of the range; large-deviation line omitted".into());
            }
        }
        Err(e) => warnings.push(format!("large-deviation line omitted: {e}")),
    }
    let log = svg_plot(
        &log_series,
        Scale::Log10,
        &Labels {
            title: &title,
            x: "k",
            y: "p(n,k)",
        },
    )?;
    for (name, plot) in [("profile_linear.svg", &linear), ("profile_log.svg", &log)] {
        if plot.dropped > 0 {
            warnings.push(format!("{name}: {} points dropped", plot.dropped));
        }
    }

    let table = LdpTable::build(params, u_grid, n_list)?;
    let scaling = ldp_report(params, &table).to_csv();

    Ok(Rendered {
        artifacts: vec![
            Artifact {
                name: Some("profile_linear.svg".into()),
                contents: linear.svg,
            },
            Artifact {
                name: Some("profile_log.svg".into()),
                contents: log.svg,
            },
            Artifact {
                name: Some("rate_scaling.csv".into()),
                contents: scaling,
            },
        ],
        warnings,
    })
}
