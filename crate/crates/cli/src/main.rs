use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use conecert::certify::{Certifier, Strategy, Theorem};
use conecert::links::{catalog_enumerate, classify, CatalogId, Link, SlopeLetter};
use conecert::product::{minimal_product_with, ProductOptions, DEFAULT_RESOLUTION};
use conecert::vanishing::{
    vanishing_angle_gform_with, vanishing_angle_with, vanishing_table, BoundEvaluator, BoundKind,
    Outcome, SolverOptions, VanishingResult, DEFAULT_RTOL,
};
use conecert::Error;

const REPORT_SCHEMA: &str = "report/v1";
const TABLE_SCHEMA: &str = "table/v1";
const TRACE_SCHEMA: &str = "trace/v1";
const CATALOG_SCHEMA: &str = "catalog/v1";

#[derive(Parser, Debug)]
#[command(
    name = "conecert",
    version,
    about = "Certify area-minimizing cones over minimal links"
)]
struct Cli {
    /// Relative tolerance of the vanishing-angle integrator.
    #[arg(long, global = true, env = "CONECERT_RTOL", default_value_t = DEFAULT_RTOL)]
    rtol: f64,

    /// Add wall-clock time to JSON reports (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List catalog links up to a dimension.
    Catalog {
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Minimal product of links, written as link JSON.
    Product {
        #[command(flatten)]
        factors: Factors,
        /// Skip shape-operator spectra of the product.
        #[arg(long)]
        no_spectra: bool,
        /// Grid resolution for composed spectra.
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
    },
    /// Apply the vanishing-angle criterion to a link or a product.
    Certify {
        #[command(flatten)]
        factors: Factors,
        #[arg(long, value_enum, default_value_t = BoundArg::Auto)]
        bound: BoundArg,
    },
    /// Vanishing angles over an (m, alpha) grid.
    Table {
        /// Cone dimensions, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        alphas: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ScalarBound::C)]
        bound: ScalarBound,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Profile curve of one vanishing-angle solve, as plot-ready CSV.
    Trace {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = TraceBound::C)]
        bound: TraceBound,
        /// Link or catalog id, for det traces.
        #[arg(long)]
        link: Option<String>,
        /// `w`: (theta, w) with w = r^-m; `g`: (t, g) with t = tan theta.
        #[arg(long, value_enum, default_value_t = Form::W)]
        form: Form,
    },
    /// Smallest number of copies whose minimal product certifies.
    SearchCopies {
        /// Base links as ID or ID:min_count (catalog id or link file).
        #[arg(required = true)]
        base: Vec<String>,
        #[arg(long, default_value_t = 64)]
        n_max: usize,
        #[arg(long, default_value_t = conecert::certify::DEFAULT_WINDOW)]
        window: usize,
    },
    /// Certify seeded random products of catalog links.
    Sweep {
        #[arg(long, default_value_t = 37)]
        min_dim: usize,
        #[arg(long, default_value_t = 60)]
        max_dim: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Dimension from which every link with the given slope and gap bounds certifies.
    Threshold {
        #[arg(long)]
        max_slope: f64,
        #[arg(long)]
        min_gap: f64,
    },
    /// Check a configuration theorem's hypotheses and conclusion.
    Theorem {
        #[arg(long, value_parser = parse_theorem)]
        theorem: Theorem,
        #[command(flatten)]
        factors: Factors,
    },
}

#[derive(Args, Debug)]
struct Factors {
    /// Link JSON files.
    #[arg(long = "link")]
    links: Vec<String>,
    /// Catalog ids such as S^3, iso(4,1,2) or focal(6,1,1,+).
    #[arg(long = "id")]
    ids: Vec<String>,
    /// Links or catalog ids in product order.
    factors: Vec<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundArg {
    Auto,
    C,
    #[value(name = "F", alias = "f")]
    F,
    Det,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScalarBound {
    C,
    #[value(name = "F", alias = "f")]
    F,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TraceBound {
    C,
    #[value(name = "F", alias = "f")]
    F,
    Det,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Form {
    W,
    G,
}

fn parse_theorem(s: &str) -> Result<Theorem, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure classes and their exit codes.
enum Failure {
    /// Numerical non-existence, undetermined verdicts, failed hypotheses.
    Negative(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotFoundWithin { .. }
            | Error::ThresholdNotFound { .. }
            | Error::HypothesisFailed { .. } => Failure::Negative(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

struct Emitted {
    stdout: String,
    /// Set when the command succeeded but the answer is negative.
    negative: bool,
}

impl Emitted {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            negative: false,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !(cli.rtol.is_finite() && cli.rtol > 0.0 && cli.rtol < 1e-3) {
        eprintln!("error: --rtol must lie in (0, 1e-3), got {}", cli.rtol);
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            if out.negative {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Negative(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn solver(cli: &Cli) -> SolverOptions {
    SolverOptions::default().with_rtol(cli.rtol)
}

fn report(cli: &Cli, command: &str, inputs: Value, results: Value, started: Instant) -> String {
    let mut v = json!({
        "schema": REPORT_SCHEMA,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "inputs": inputs,
        "results": results,
    });
    if cli.timing {
        v["wall_time_s"] = json!(started.elapsed().as_secs_f64());
    }
    let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
    s.push('\n');
    s
}

fn load_link(spec: &str) -> Result<Link, Failure> {
    if let Ok(id) = spec.parse::<CatalogId>() {
        return Ok(id.build()?);
    }
    load_link_file(spec)
}

fn load_link_file(path: &str) -> Result<Link, Failure> {
    if !Path::new(path).exists() {
        return Err(Failure::Input(format!(
            "`{path}` is neither a catalog id nor an existing link file"
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("link file `{path}`: {e}")))?;
    Link::from_json(&text).map_err(|e| Failure::Input(format!("link file `{path}`: {e}")))
}

impl Factors {
    fn load(&self) -> Result<Vec<Link>, Failure> {
        let mut out = Vec::new();
        for p in &self.links {
            out.push(load_link_file(p)?);
        }
        for id in &self.ids {
            let id: CatalogId = id.parse()?;
            out.push(id.build()?);
        }
        for f in &self.factors {
            out.push(load_link(f)?);
        }
        if out.is_empty() {
            return Err(Failure::Input(
                "no links given (use --link, --id or positional ids)".into(),
            ));
        }
        Ok(out)
    }

    fn names(links: &[Link]) -> Value {
        json!(links.iter().map(Link::name).collect::<Vec<_>>())
    }
}

fn run(cli: &Cli) -> Result<Emitted, Failure> {
    let started = Instant::now();
    match &cli.command {
        Command::Catalog { max_dim, format } => {
            Ok(Emitted::ok(catalog(cli, *max_dim, *format, started)))
        }
        Command::Product {
            factors,
            no_spectra,
            resolution,
        } => {
            let links = factors.load()?;
            let opts = ProductOptions {
                compose_spectra: !no_spectra,
                resolution: *resolution,
            };
            let p = minimal_product_with(&links, &opts)?;
            Ok(Emitted::ok(p.to_json() + "\n"))
        }
        Command::Certify { factors, bound } => {
            let links = factors.load()?;
            let link = if links.len() == 1 {
                links[0].clone()
            } else {
                minimal_product_with(&links, &ProductOptions::default())?
            };
            let strategy = match bound {
                BoundArg::Auto => Strategy::Auto,
                BoundArg::C => Strategy::C,
                BoundArg::F => Strategy::F,
                BoundArg::Det => Strategy::Det,
            };
            let cert = Certifier::new(solver(cli)).certify(&link, strategy);
            let inputs = json!({
                "links": Factors::names(&links),
                "strategy": strategy,
                "rtol": cli.rtol,
            });
            Ok(Emitted {
                negative: !cert.is_area_minimizing(),
                stdout: report(cli, "certify", inputs, cert.to_json_value(), started),
            })
        }
        Command::Table {
            m,
            alphas,
            bound,
            format,
        } => table(cli, m, alphas, *bound, *format, started),
        Command::Trace {
            m,
            alpha,
            bound,
            link,
            form,
        } => trace(cli, *m, *alpha, *bound, link.as_deref(), *form),
        Command::SearchCopies {
            base,
            n_max,
            window,
        } => {
            let mut parsed = Vec::new();
            for b in base {
                let (spec, count) = match b.rsplit_once(':') {
                    Some((s, c)) if c.chars().all(|ch| ch.is_ascii_digit()) && !c.is_empty() => {
                        (s, c.parse::<usize>().expect("digits"))
                    }
                    _ => (b.as_str(), 1),
                };
                parsed.push((load_link(spec)?, count));
            }
            let r = Certifier::new(solver(cli)).min_copies(&parsed, *n_max, *window)?;
            let results = json!({
                "base": r.base.iter().map(|(n, c)| json!({"link": n, "min_count": c})).collect::<Vec<_>>(),
                "n_min": r.n_min,
                "first_certified": r.first_certified,
                "window_verified": r.window_verified,
                "certificates": r.certificates.iter().map(|(n, c)| json!({"n": n, "certificate": c.to_json_value()})).collect::<Vec<_>>(),
            });
            let inputs = json!({"base": base, "n_max": n_max, "window": window, "rtol": cli.rtol});
            Ok(Emitted::ok(report(
                cli,
                "search-copies",
                inputs,
                results,
                started,
            )))
        }
        Command::Sweep {
            min_dim,
            max_dim,
            samples,
            seed,
        } => {
            let s = Certifier::new(solver(cli))
                .isoparametric_sweep(*min_dim, *max_dim, *samples, *seed)?;
            let failures = s
                .iter()
                .filter(|x| !x.certificate.is_area_minimizing())
                .count();
            let results = json!({
                "certified": s.len() - failures,
                "failed": failures,
                "samples": s.iter().map(|x| json!({"factors": x.factors, "certificate": x.certificate.to_json_value()})).collect::<Vec<_>>(),
            });
            let inputs = json!({
                "min_dim": min_dim, "max_dim": max_dim, "samples": samples, "seed": seed,
                "bound": "c", "rtol": cli.rtol,
            });
            Ok(Emitted {
                negative: failures > 0,
                stdout: report(cli, "sweep", inputs, results, started),
            })
        }
        Command::Threshold { max_slope, min_gap } => {
            let c = Certifier::new(solver(cli));
            let k = c.uniform_dimension_threshold(*max_slope, *min_gap)?;
            let exists_from = c.existence_dimension(*max_slope)?;
            let results = json!({
                "k": k,
                "cone_dimension": k + 1,
                "existence_k": exists_from,
            });
            let inputs = json!({"max_slope": max_slope, "min_gap": min_gap, "rtol": cli.rtol});
            Ok(Emitted::ok(report(
                cli,
                "threshold",
                inputs,
                results,
                started,
            )))
        }
        Command::Theorem { theorem, factors } => {
            let links = factors.load()?;
            let r = Certifier::new(solver(cli)).check_theorem(&links, *theorem)?;
            let results = json!({
                "hypotheses": r.hypotheses,
                "product": r.product,
                "certificate": r.certificate.to_json_value(),
                "confirmed": r.confirmed,
            });
            let inputs =
                json!({"theorem": theorem, "links": Factors::names(&links), "rtol": cli.rtol});
            Ok(Emitted {
                negative: !r.confirmed,
                stdout: report(cli, "theorem", inputs, results, started),
            })
        }
    }
}

fn class_letter(l: &Link) -> &'static str {
    match classify(l).letter {
        SlopeLetter::A => "a",
        SlopeLetter::B => "b",
        SlopeLetter::C => "c",
    }
}

fn catalog(cli: &Cli, max_dim: usize, format: Format, started: Instant) -> String {
    let links = catalog_enumerate(max_dim);
    match format {
        Format::Csv => {
            let mut s =
                format!("# schema: {CATALOG_SCHEMA}\nid,k,alpha_sq,normal_radius,slope,class\n");
            for l in &links {
                writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    csv_field(l.name()),
                    l.k(),
                    l.alpha_sq(),
                    l.normal_radius(),
                    l.slope(),
                    class_letter(l)
                )
                .expect("string write");
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = links
                .iter()
                .map(|l| {
                    json!({
                        "id": l.name(),
                        "k": l.k(),
                        "alpha_sq": l.alpha_sq(),
                        "normal_radius": l.normal_radius(),
                        "slope": l.slope(),
                        "class": class_letter(l),
                    })
                })
                .collect();
            report(
                cli,
                "catalog",
                json!({"max_dim": max_dim}),
                json!(rows),
                started,
            )
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn outcome_label(r: &VanishingResult) -> String {
    match r.outcome {
        Outcome::Found { .. } => "found".into(),
        Outcome::NotFound(reason) => reason.as_str().into(),
    }
}

fn table(
    cli: &Cli,
    ms: &[usize],
    alphas: &[f64],
    bound: ScalarBound,
    format: Format,
    started: Instant,
) -> Result<Emitted, Failure> {
    let kind = match bound {
        ScalarBound::C => BoundKind::C,
        ScalarBound::F => BoundKind::F,
    };
    for &a in alphas {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Failure::Input(format!(
                "alpha must be finite and non-negative, got {a}"
            )));
        }
    }
    for &m in ms {
        if m < 2 {
            return Err(Failure::Input(format!(
                "cone dimension m must be at least 2, got {m}"
            )));
        }
    }
    let cells = vanishing_table(ms, alphas, kind, &solver(cli));
    let mut rows = Vec::with_capacity(cells.len());
    for cell in cells {
        let r = cell.result?;
        rows.push((cell.m, cell.alpha, r));
    }
    match format {
        Format::Csv => {
            let mut s =
                format!("# schema: {TABLE_SCHEMA}\nm,alpha,bound,theta_deg,tan_theta,outcome\n");
            for (m, a, r) in &rows {
                let (deg, tan) = match r.outcome {
                    Outcome::Found { theta0, tan_theta0 } => (
                        format!("{:.4}", theta0.to_degrees()),
                        format!("{tan_theta0:.10}"),
                    ),
                    Outcome::NotFound(_) => (String::new(), String::new()),
                };
                writeln!(s, "{m},{a},{kind},{deg},{tan},{}", outcome_label(r))
                    .expect("string write");
            }
            Ok(Emitted::ok(s))
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(m, a, r)| {
                    let mut v = json!({
                        "m": m,
                        "alpha": a,
                        "bound": kind,
                        "theta_rad": r.theta0(),
                        "tan_theta": r.tan_theta0(),
                        "outcome": outcome_label(r),
                    });
                    if let Outcome::NotFound(reason) = r.outcome {
                        v["reason"] = json!(reason);
                    }
                    v
                })
                .collect();
            let inputs = json!({"m": ms, "alphas": alphas, "bound": kind, "rtol": cli.rtol});
            Ok(Emitted::ok(report(
                cli,
                "table",
                inputs,
                json!(rows),
                started,
            )))
        }
    }
}

fn trace(
    cli: &Cli,
    m: Option<usize>,
    alpha: Option<f64>,
    bound: TraceBound,
    link: Option<&str>,
    form: Form,
) -> Result<Emitted, Failure> {
    let evaluator = match bound {
        TraceBound::Det => {
            let spec = link.ok_or_else(|| Failure::Input("det traces need --link".into()))?;
            BoundEvaluator::det(&load_link(spec)?)?
        }
        TraceBound::C | TraceBound::F => {
            let (m, alpha) = match (m, alpha, link) {
                (Some(m), Some(a), None) => (m, a),
                (None, None, Some(spec)) => {
                    let l = load_link(spec)?;
                    (l.k() + 1, l.alpha())
                }
                _ => {
                    return Err(Failure::Input(
                        "give either --m and --alpha, or --link".into(),
                    ))
                }
            };
            let kind = if matches!(bound, TraceBound::C) {
                BoundKind::C
            } else {
                BoundKind::F
            };
            BoundEvaluator::new(kind, m, alpha)?
        }
    };
    let opts = SolverOptions {
        record_trajectory: true,
        ..solver(cli)
    };
    let r = match form {
        Form::W => vanishing_angle_with(&evaluator, &opts)?,
        Form::G => vanishing_angle_gform_with(&evaluator, &opts)?,
    };
    let (x, y) = match form {
        Form::W => ("theta", "w"),
        Form::G => ("t", "g"),
    };
    let mut s = format!(
        "# schema: {TRACE_SCHEMA}\n# bound: {}, m: {}, outcome: {}\n{x},{y},envelope\n",
        evaluator.kind(),
        evaluator.m(),
        outcome_label(&r)
    );
    for &(xv, yv) in r.trajectory.as_deref().unwrap_or_default() {
        let env = match form {
            Form::W => evaluator.envelope_at(xv),
            Form::G => (1.0 + xv * xv).sqrt() * evaluator.eval(xv),
        };
        writeln!(s, "{xv:.12e},{yv:.12e},{env:.12e}").expect("string write");
    }
    Ok(Emitted {
        negative: !r.is_found(),
        stdout: s,
    })
}
