use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use germfold::obstruction::Verdict;
use germfold::trivial::{default_scales, lipschitz_scan, INVERSE_TOL};
use germfold::{corpus, scan_link, solve_arc, verify, Error, GermDefinition, GermSystem, SpherePoint, Trivializer, VerificationReport};

#[derive(Parser)]
#[command(name = "germfold", version, about = "Deformed arcs and contact trivializations of weighted-homogeneous germs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a germ definition and print its degrees, gap and weight groups.
    Check { path: PathBuf },
    /// Scan the link for the obstruction locus.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the deformed arc at one direction.
    Deform {
        path: PathBuf,
        /// Direction, comma separated; normalized onto the unit sphere.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        s: Vec<f64>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eps: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Map points through the trivialization, or scan its Jacobians across scales.
    Trivialize {
        path: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eps: f64,
        /// One point per line, comma or space separated.
        #[arg(long, conflicts_with = "scan")]
        points_file: Option<PathBuf>,
        #[arg(long)]
        scan: bool,
        /// Write the scan rows as CSV.
        #[arg(long, requires = "scan")]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the full property suite on one definition or the built-in corpus.
    Verify {
        #[arg(required_unless_present = "corpus")]
        path: Option<PathBuf>,
        #[arg(long, conflicts_with = "path")]
        corpus: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Truncation order K of the arc series.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Proceed on germs whose obstruction locus is nontrivial.
    #[arg(long)]
    allow_obstructed: bool,
}

impl Common {
    fn apply(&self, def: &mut GermDefinition) {
        let o = &mut def.options;
        if let Some(k) = self.order {
            o.order = k;
        }
        if let Some(n) = self.samples {
            o.samples = n;
        }
        if let Some(s) = self.seed {
            o.seed = s;
        }
        if let Some(t) = self.tol {
            o.tol = t;
        }
        o.allow_obstructed |= self.allow_obstructed;
    }
}

/// A failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let variant = format!("{e:?}");
        let variant = variant.split(['(', ' ', '{']).next().unwrap_or_default().to_string();
        Fail(e.exit_code() as u8, format!("{variant}: {e}"))
    }
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Fail {
    Fail(2, format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cmd: Command) -> Result<u8, Fail> {
    match cmd {
        Command::Check { path } => check(&path),
        Command::Analyze { path, common } => analyze(&path, &common),
        Command::Deform { path, s, eps, common } => deform(&path, &s, eps, &common),
        Command::Trivialize { path, eps, points_file, scan, csv, common } => {
            trivialize(&path, eps, points_file.as_deref(), scan, csv.as_deref(), &common)
        }
        Command::Verify { path, corpus, common } => verify_cmd(path.as_deref(), corpus, &common),
    }
}

fn load(path: &Path, common: &Common) -> Result<(GermDefinition, GermSystem), Fail> {
    let mut def = GermDefinition::from_path(path)?;
    common.apply(&mut def);
    let gs = def.build()?;
    Ok((def, gs))
}

fn emit<T: Serialize>(value: &T, target: Option<&Path>) -> Result<(), Fail> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Fail(2, e.to_string()))?;
    match target {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| io_fail(p, e)),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Fail(2, e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn summary_line(gs: &GermSystem) -> String {
    let p: Vec<String> = gs.degrees().iter().map(u64::to_string).collect();
    let p = if p.len() == 1 { p[0].clone() } else { format!("({})", p.join(",")) };
    let delta = match gs.delta().finite() {
        Some(d) => d.to_string(),
        None => "∞".into(),
    };
    let mode = serde_json::to_value(gs.mode()).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let groups: Vec<String> = gs.ws().group_ends().iter().map(usize::to_string).collect();
    format!("p={p} δ={delta} mode={mode} groups=({})", groups.join(","))
}

fn check(path: &Path) -> Result<u8, Fail> {
    let (_, gs) = load(path, &Common::default())?;
    println!("{}", summary_line(&gs));
    Ok(0)
}

fn analyze(path: &Path, common: &Common) -> Result<u8, Fail> {
    let (def, gs) = load(path, common)?;
    let o = &def.options;
    let rep = scan_link(&gs, o.samples, o.seed, o.tol)?;
    emit(&json!({ "germ": def.name, "report": rep }), common.json.as_deref())?;
    Ok(0)
}

fn deform(path: &Path, s: &[f64], eps: f64, common: &Common) -> Result<u8, Fail> {
    let (def, gs) = load(path, common)?;
    if s.len() != gs.nvars() {
        return Err(Error::DimensionMismatch { expected: gs.nvars(), got: s.len() }.into());
    }
    let s = SpherePoint::normalized(s.to_vec())?;
    let arc = solve_arc(&gs, s.as_slice(), eps, def.options.order)?;
    let residual_order = if arc.eps == 0.0 || arc.delta.is_infinite() {
        json!("exact")
    } else {
        json!(arc.residual_ord)
    };
    emit(&json!({ "germ": def.name, "residual_order": residual_order, "arc": arc }), common.json.as_deref())?;
    Ok(0)
}

fn read_points(path: &Path, n: usize) -> Result<Vec<Vec<f64>>, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| io_fail(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let p: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| io_fail(path, format!("line {}: {e}", i + 1)))?;
        if p.len() != n {
            return Err(io_fail(path, format!("line {}: expected {n} coordinates, got {}", i + 1, p.len())));
        }
        out.push(p);
    }
    Ok(out)
}

fn map_point(tr: &Trivializer, x: &[f64]) -> Value {
    let run = || -> Result<Value, Error> {
        let y = tr.psi(x)?;
        let back = tr.psi_inverse(&y, INVERSE_TOL)?;
        let roundtrip = back.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let u = if tr.germ().codim() == 1 { Some(tr.u_minus_one(x)? + 1.0) } else { None };
        Ok(json!({ "x": x, "psi": y, "roundtrip": roundtrip, "U": u, "f_p(x)": tr.germ().eval_f_p(x), "f_eps(psi)": tr.germ().eval_family(tr.eps(), &y) }))
    };
    run().unwrap_or_else(|e| json!({ "x": x, "error": e.to_string() }))
}

/// Refuses unless the obstruction locus is the origin; only the command-line
/// flag overrides this, not the definition's own option.
fn hypothesis(gs: &GermSystem, def: &GermDefinition, allow: bool) -> Result<(), Fail> {
    let o = &def.options;
    let rep = scan_link(gs, o.samples, o.seed, o.tol)?;
    if rep.verdict != Verdict::SigmaTrivial && !allow {
        return Err(Fail(
            3,
            format!(
                "obstruction locus is not trivial ({:?}, min coefficient {:e}); the trivialization needs it to be the origin",
                rep.verdict, rep.min_coeff
            ),
        ));
    }
    Ok(())
}

fn trivialize(path: &Path, eps: f64, points: Option<&Path>, scan: bool, csv_path: Option<&Path>, common: &Common) -> Result<u8, Fail> {
    let (def, gs) = load(path, common)?;
    hypothesis(&gs, &def, common.allow_obstructed)?;
    if points.is_none() && !scan {
        return Err(Fail(2, "one of --points-file or --scan is required".into()));
    }
    let o = &def.options;
    let tr = Trivializer::new(&gs, eps, o.order);
    let mapped: Vec<Value> = match points {
        Some(p) => read_points(p, gs.nvars())?.iter().map(|x| map_point(&tr, x)).collect(),
        None => Vec::new(),
    };
    let diagnostics = if scan {
        let n = common.samples.unwrap_or(o.scan_samples);
        let scales = default_scales(&tr, n, o.seed, 7);
        let d = lipschitz_scan(&tr, &scales, n, o.seed)?;
        if let Some(p) = csv_path {
            let mut w = csv::Writer::from_path(p).map_err(|e| io_fail(p, e))?;
            for row in &d.rows {
                w.serialize(row).map_err(|e| io_fail(p, e))?;
            }
            w.flush().map_err(|e| io_fail(p, e))?;
        }
        Some(d)
    } else {
        None
    };
    emit(
        &json!({ "germ": def.name, "eps": eps, "identity": tr.is_identity(), "points": mapped, "diagnostics": diagnostics }),
        common.json.as_deref(),
    )?;
    Ok(0)
}

fn summarize(r: &VerificationReport) {
    let status = if r.hypothesis_violated {
        "HYPOTHESIS"
    } else if r.pass {
        "PASS"
    } else {
        "FAIL"
    };
    eprintln!(
        "{status:<10} {:<20} δ={} link points {} refusals {} ({:.1}s)",
        r.name, r.delta, r.link_points, r.refusals, r.seconds
    );
    for p in r.properties.iter().filter(|p| !p.pass) {
        eprintln!("    {} measured {:e}, threshold {:e}: {}", p.name, p.measured, p.threshold, p.detail);
    }
}

fn verify_cmd(path: Option<&Path>, all: bool, common: &Common) -> Result<u8, Fail> {
    let mut defs = if all {
        corpus::all()
    } else {
        let p = path.expect("clap requires a path without --corpus");
        vec![GermDefinition::from_path(p)?]
    };
    for d in &mut defs {
        common.apply(d);
    }
    let mut reports = Vec::with_capacity(defs.len());
    for d in &defs {
        let r = verify(d)?;
        summarize(&r);
        reports.push(r);
    }
    if all {
        emit(&reports, common.json.as_deref())?;
    } else {
        emit(&reports[0], common.json.as_deref())?;
    }
    Ok(if reports.iter().any(|r| r.hypothesis_violated) {
        3
    } else if reports.iter().all(|r| r.pass) {
        0
    } else {
        1
    })
}
