use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use predmem::api::{self, ApiError, HcurveOptions, SimulateOptions, StabilityOptions};
use predmem::model::{FunctionalResponse, GrowthLaw, ModelParams, NullclineGrid, Predator, State};
use predmem::stability::{sweep_to_csv, SweepParam};
use predmem::{oracle, presets, Error};
use serde::Serialize;
use serde_json::Value;

/// Analyses of n-predator / one-prey ratio-dependent systems with fading
/// memory of the prey density.
#[derive(Parser, Debug)]
#[command(name = "predmem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Positive equilibrium E* (and q* = x*).
    ///
    /// CSV columns: x, y1..yn, q, u1..un.
    Equilibrium(Common),
    /// Jacobians A and A_d at the equilibrium.
    ///
    /// CSV columns: matrix, row, col, value (one line per entry).
    Jacobian(Common),
    /// Stability report: sign-stability, Hurwitz and delay-robust conditions,
    /// eigenvalues.
    ///
    /// CSV columns: matrix, re, im (eigenvalues of A and A_d).
    Stability {
        #[command(flatten)]
        common: Common,
        /// Memory rates certified by the small/large alpha check.
        #[arg(long, default_value_t = 1e-3)]
        alpha_small: f64,
        #[arg(long, default_value_t = 1e3)]
        alpha_large: f64,
    },
    /// H(alpha) and the spectral abscissa of A_d on a log grid of alpha.
    ///
    /// CSV columns: alpha, H, abscissa, stable.
    Hscan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.01)]
        alpha_min: f64,
        #[arg(long, default_value_t = 100.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Integrate a trajectory (with memory when alpha is set).
    ///
    /// CSV columns: t, x, y1..yn, q (q only with memory).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-12)]
        abs_tol: f64,
        /// Output times, uniformly spaced, both ends included.
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        /// Relative offset from the equilibrium when --initial is absent.
        #[arg(long, default_value_t = 0.1)]
        perturbation: f64,
        /// Initial state as x,y1,..,yn[,q].
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        initial: Option<Vec<f64>>,
    },
    /// Classify the equilibrium along a parameter sweep.
    ///
    /// CSV columns: <param>, class, a11, abscissa_A, stable_A, sign_stable,
    /// delay_robust, abscissa_Ad, stable_Ad.
    Bifurcate {
        #[command(flatten)]
        common: Common,
        /// Swept parameter: r, K or alpha.
        #[arg(long, default_value = "r")]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
    /// Prey nullcline x(y1, y2) on a grid (two predators).
    ///
    /// CSV columns: y1, y2, x (one line per root, x empty when none).
    Nullcline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        y1_min: Option<f64>,
        #[arg(long)]
        y1_max: Option<f64>,
        #[arg(long)]
        y2_min: Option<f64>,
        #[arg(long)]
        y2_max: Option<f64>,
        #[arg(long)]
        n1: Option<usize>,
        #[arg(long)]
        n2: Option<usize>,
    },
    /// Run the built-in verification oracles.
    ///
    /// CSV columns: name, cases, max_abs_error, max_rel_error, tolerance,
    /// passed.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Built-in parameter set (paper-example); r defaults to 13, alpha to 1.
    #[arg(long)]
    preset: Option<String>,
    /// JSON parameter document {"r", "K", "alpha", "predators": [...]}.
    #[arg(long, value_name = "FILE.json")]
    params: Option<PathBuf>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Drop the memory rate and analyse the system without memory.
    #[arg(long, conflicts_with = "alpha")]
    no_alpha: bool,
    /// Predator as kind:m:a:d with kind holling or ivlev; repeatable,
    /// replaces the predators of the preset or file.
    #[arg(long, value_parser = parse_predator)]
    predator: Vec<Predator>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the artifact here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Omit the generator/timestamp header.
    #[arg(long)]
    no_meta: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Json,
    Csv,
    Table,
}

fn parse_predator(s: &str) -> Result<Predator, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [kind, m, a, d] = parts[..] else {
        return Err(format!("expected kind:m:a:d, got {s:?}"));
    };
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    let (m, a, d) = (num(m)?, num(a)?, num(d)?);
    let response = match kind {
        "holling" => FunctionalResponse::holling(m, a),
        "ivlev" => FunctionalResponse::ivlev(m, a),
        other => return Err(format!("unknown response {other:?} (holling or ivlev)")),
    };
    Ok(Predator::new(response, d))
}

/// Usage-level failure, reported with exit status 1.
struct Usage(String);

enum Failure {
    Usage(Usage),
    Model(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(Usage(msg.into()))
}

impl Common {
    fn params(&self) -> Result<ModelParams, Failure> {
        let base = match (&self.preset, &self.params) {
            (Some(_), Some(_)) => return Err(usage("--preset and --params are exclusive")),
            (Some(name), None) => Some(
                presets::by_name(
                    name,
                    self.r.unwrap_or(13.0),
                    Some(self.alpha.unwrap_or(1.0)),
                )
                .ok_or_else(|| {
                    usage(format!(
                        "unknown preset {name:?} (available: {})",
                        presets::names().join(", ")
                    ))
                })?,
            ),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                Some(
                    serde_json::from_str::<ModelParams>(&text)
                        .map_err(|e| usage(format!("{}: {e}", path.display())))?,
                )
            }
            (None, None) => None,
        };
        let (r, k, alpha, predators) = match base {
            Some(p) => (
                self.r.unwrap_or(p.r),
                self.k.unwrap_or(p.k()),
                self.alpha.or(p.alpha),
                if self.predator.is_empty() {
                    p.predators
                } else {
                    self.predator.clone()
                },
            ),
            None => {
                let (Some(r), Some(k)) = (self.r, self.k) else {
                    return Err(usage(
                        "give --preset, --params, or all of --r, --K and --predator",
                    ));
                };
                if self.predator.is_empty() {
                    return Err(usage("at least one --predator is required"));
                }
                (r, k, self.alpha, self.predator.clone())
            }
        };
        let alpha = if self.no_alpha { None } else { alpha };
        Ok(ModelParams::new(
            r,
            GrowthLaw::logistic(k),
            predators,
            alpha,
        )?)
    }
}

/// Rendered artifact in each supported format.
struct Artifact {
    json: String,
    csv: Option<String>,
}

impl Artifact {
    fn new<T: Serialize>(value: &T, csv: Option<String>) -> Self {
        Artifact {
            json: api::to_json(value),
            csv,
        }
    }
}

fn csv_rows<I, R>(header: &[&str], rows: I) -> Result<String, Error>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let io = |e: csv::Error| Error::Numeric(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numeric(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn run(cmd: &Command) -> Result<Artifact, Failure> {
    Ok(match cmd {
        Command::Equilibrium(c) => {
            let resp = api::equilibrium(&c.params()?)?;
            let e = &resp.result;
            let n = e.y_star.len();
            let mut header = vec!["x".to_string()];
            header.extend((1..=n).map(|i| format!("y{i}")));
            header.push("q".into());
            header.extend((1..=n).map(|i| format!("u{i}")));
            let mut row = vec![e.x_star];
            row.extend(&e.y_star);
            row.push(e.q_star);
            row.extend(&e.u_star);
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            let csv = csv_rows(&h, [row.iter().map(f64::to_string)])?;
            Artifact::new(&resp, Some(csv))
        }
        Command::Jacobian(c) => {
            let resp = api::jacobian(&c.params()?)?;
            let mut rows = Vec::new();
            let jac = &resp.result;
            for (name, m) in [("A", Some(&jac.a)), ("A_d", jac.a_d.as_ref())] {
                let Some(m) = m else { continue };
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        rows.push(vec![
                            name.to_string(),
                            i.to_string(),
                            j.to_string(),
                            m[(i, j)].to_string(),
                        ]);
                    }
                }
            }
            let csv = csv_rows(&["matrix", "row", "col", "value"], rows)?;
            Artifact::new(&resp, Some(csv))
        }
        Command::Stability {
            common,
            alpha_small,
            alpha_large,
        } => {
            let opts = StabilityOptions {
                alpha_small: *alpha_small,
                alpha_large: *alpha_large,
            };
            let resp = api::stability(&common.params()?, &opts)?;
            let rep = &resp.result.report;
            let mut rows = Vec::new();
            let spectra = [
                ("A", Some(&rep.eigenvalues_a)),
                ("A_d", rep.eigenvalues_ad.as_ref()),
            ];
            for (name, ev) in spectra {
                for z in ev.into_iter().flatten() {
                    rows.push(vec![name.to_string(), z.re.to_string(), z.im.to_string()]);
                }
            }
            let csv = csv_rows(&["matrix", "re", "im"], rows)?;
            Artifact::new(&resp, Some(csv))
        }
        Command::Hscan {
            common,
            alpha_min,
            alpha_max,
            points,
        } => {
            let opts = HcurveOptions {
                alpha_min: *alpha_min,
                alpha_max: *alpha_max,
                points: *points,
            };
            let resp = api::hcurve(&common.params()?, &opts)?;
            let csv = resp.result.to_csv()?;
            Artifact::new(&resp, Some(csv))
        }
        Command::Simulate {
            common,
            t_end,
            rel_tol,
            abs_tol,
            samples,
            perturbation,
            initial,
        } => {
            let params = common.params()?;
            let initial = match initial {
                None => None,
                Some(v) => Some(state_from(&params, v)?),
            };
            let opts = SimulateOptions {
                t_end: *t_end,
                rel_tol: *rel_tol,
                abs_tol: *abs_tol,
                samples: *samples,
                initial,
                perturbation: *perturbation,
            };
            let resp = api::simulate(&params, &opts)?;
            let csv = resp.result.trajectory.to_csv()?;
            Artifact::new(&resp, Some(csv))
        }
        Command::Bifurcate {
            common,
            param,
            from,
            to,
            steps,
        } => {
            let param: SweepParam = param.parse()?;
            let resp = api::bifurcate(&common.params()?, param, *from, *to, *steps)?;
            let csv = sweep_to_csv(&resp.result, param)?;
            Artifact::new(&resp, Some(csv))
        }
        Command::Nullcline {
            common,
            y1_min,
            y1_max,
            y2_min,
            y2_max,
            n1,
            n2,
        } => {
            let params = common.params()?;
            let d = api::default_nullcline_grid(&params);
            let grid = NullclineGrid {
                y1_min: y1_min.unwrap_or(d.y1_min),
                y1_max: y1_max.unwrap_or(d.y1_max),
                y2_min: y2_min.unwrap_or(d.y2_min),
                y2_max: y2_max.unwrap_or(d.y2_max),
                n1: n1.unwrap_or(d.n1),
                n2: n2.unwrap_or(d.n2),
            };
            let resp = api::nullcline(&params, Some(&grid))?;
            let mut rows = Vec::new();
            for c in &resp.result.cells {
                if c.roots.is_empty() {
                    rows.push(vec![c.y1.to_string(), c.y2.to_string(), String::new()]);
                }
                for x in &c.roots {
                    rows.push(vec![c.y1.to_string(), c.y2.to_string(), x.to_string()]);
                }
            }
            let csv = csv_rows(&["y1", "y2", "x"], rows)?;
            Artifact::new(&resp, Some(csv))
        }
        Command::Verify { seed, .. } => {
            let reports = oracle::verify_suite(*seed);
            let rows = reports.iter().map(|r| {
                vec![
                    r.name.clone(),
                    r.cases.to_string(),
                    r.max_abs_error.to_string(),
                    r.max_rel_error.to_string(),
                    r.tolerance.to_string(),
                    r.passed.to_string(),
                ]
            });
            let header = [
                "name",
                "cases",
                "max_abs_error",
                "max_rel_error",
                "tolerance",
                "passed",
            ];
            let csv = csv_rows(&header, rows)?;
            Artifact::new(&reports, Some(csv))
        }
    })
}

fn state_from(params: &ModelParams, v: &[f64]) -> Result<State, Failure> {
    let n = params.n();
    match v.len() {
        len if len == n + 1 => Ok(State::undelayed(v[0], v[1..].to_vec())),
        len if len == n + 2 => Ok(State::delayed(v[0], v[1..=n].to_vec(), v[n + 1])),
        len => Err(usage(format!(
            "--initial needs {} or {} values, got {len}",
            n + 1,
            n + 2
        ))),
    }
}

fn output_of(cmd: &Command) -> &Output {
    match cmd {
        Command::Equilibrium(c) | Command::Jacobian(c) => &c.output,
        Command::Stability { common, .. }
        | Command::Hscan { common, .. }
        | Command::Simulate { common, .. }
        | Command::Bifurcate { common, .. }
        | Command::Nullcline { common, .. } => &common.output,
        Command::Verify { output, .. } => output,
    }
}

fn meta() -> Value {
    serde_json::json!({
        "generator": concat!("predmem ", env!("CARGO_PKG_VERSION")),
        "generated_at": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    })
}

/// Inserts `"meta": {...}` as the first key of a pretty-printed object.
fn with_json_meta(json: &str) -> String {
    let Some(rest) = json.strip_prefix("{\n") else {
        return json.to_string();
    };
    let meta = serde_json::to_string_pretty(&meta()).expect("meta serializes");
    let meta = meta.replace('\n', "\n  ");
    format!("{{\n  \"meta\": {meta},\n{rest}")
}

fn with_csv_meta(csv: &str) -> String {
    let m = meta();
    format!(
        "# {} {}\n{csv}",
        m["generator"].as_str().unwrap_or_default(),
        m["generated_at"].as_str().unwrap_or_default()
    )
}

/// Aligned columns from CSV text.
fn csv_table(csv: &str) -> String {
    let rows: Vec<Vec<String>> = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(csv.as_bytes())
        .records()
        .filter_map(|r| r.ok())
        .map(|r| r.iter().map(str::to_string).collect())
        .collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|j| {
            rows.iter()
                .filter_map(|r| r.get(j))
                .map(|c| c.len())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(j, c)| format!("{c:<w$}", w = widths[j]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// `path  value` lines for every leaf of a JSON document.
fn json_table(v: &Value) -> String {
    fn walk(v: &Value, path: &str, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, v) in m {
                    let p = if path.is_empty() {
                        k.clone()
                    } else {
                        format!("{path}.{k}")
                    };
                    walk(v, &p, out);
                }
            }
            Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
                let items: Vec<String> = a.iter().map(Value::to_string).collect();
                out.push((path.to_string(), format!("[{}]", items.join(", "))));
            }
            Value::Array(a) => {
                for (i, v) in a.iter().enumerate() {
                    walk(v, &format!("{path}[{i}]"), out);
                }
            }
            other => out.push((path.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk(v, "", &mut rows);
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<w$}  {v}\n"))
        .collect()
}

fn render(art: &Artifact, out: &Output, cmd: &Command) -> String {
    match out.format {
        Format::Json if out.no_meta => art.json.clone(),
        Format::Json => with_json_meta(&art.json),
        Format::Csv => {
            let csv = art.csv.as_deref().unwrap_or_default();
            if out.no_meta {
                csv.to_string()
            } else {
                with_csv_meta(csv)
            }
        }
        Format::Table => match cmd {
            Command::Equilibrium(_) | Command::Jacobian(_) | Command::Stability { .. } => {
                let v: Value = serde_json::from_str(&art.json).expect("own output parses");
                json_table(&v)
            }
            _ => csv_table(art.csv.as_deref().unwrap_or_default()),
        },
    }
}

fn emit(text: &str, out: &Output) -> Result<(), Failure> {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let out = output_of(&cli.command);
    let result = run(&cli.command).and_then(|art| {
        emit(&render(&art, out, &cli.command), out)?;
        Ok(art)
    });
    match result {
        Ok(art) => {
            if let Command::Verify { .. } = cli.command {
                let reports: Vec<oracle::OracleReport> =
                    serde_json::from_str(&art.json).expect("own output parses");
                let failed: Vec<&str> = reports
                    .iter()
                    .filter(|r| !r.passed)
                    .map(|r| r.name.as_str())
                    .collect();
                if !failed.is_empty() {
                    eprintln!("verification failed: {}", failed.join(", "));
                    return ExitCode::from(3);
                }
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(Usage(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Model(e)) => {
            let mut body = ApiError::from(&e);
            if let Some(partial) = body.partial.take() {
                eprintln!(
                    "partial trajectory: {} states up to t = {}",
                    partial.len(),
                    partial.times.last().copied().unwrap_or(0.0)
                );
                if out.out.is_some() {
                    if let Ok(csv) = partial.to_csv() {
                        let _ = emit(&csv, out);
                    }
                }
            }
            eprint!("{}", api::to_json(&body));
            ExitCode::from(api::exit_code(&e) as u8)
        }
    }
}
