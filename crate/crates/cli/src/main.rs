use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use polyiso::arith::{format_rat, format_vec, parse_rat, rat, QVec};
use polyiso::extension::{
    check_condition3, cyclic_extension, eventual_core, evaluate_condition3, search_extendability,
    ExtensionCertificate,
};
use polyiso::io::{
    from_json, parse_certificate, parse_partiso, parse_space, print_certificate, print_space, to_json,
    Certificate, CoreWire, MapWire, PartIsoWire,
};
use polyiso::partiso::{validate, PartialIsometry};
use polyiso::space::{
    dual, isometry_group_with_cap, l1_sum, linf_sum, quotient_space, subspace_space, Subspace, DEFAULT_VERTEX_CAP,
};

const GURARII_FIXTURE: &str = include_str!("../../core/fixtures/gurarii_counterexample.json");

#[derive(Parser, Debug)]
#[command(name = "polyiso", version, about = "Exact polyhedral normed spaces and extension of partial isometries")]
struct Cli {
    /// Input file; repeat for commands that take two spaces.
    #[arg(long = "in", global = true, value_name = "FILE")]
    input: Vec<PathBuf>,
    /// Write the main JSON result to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constructions on spaces.
    Space {
        #[command(subcommand)]
        op: SpaceOp,
    },
    /// Operations on partial isometries.
    Partiso {
        #[command(subcommand)]
        op: PartisoOp,
    },
    /// Test the cycle inequality at one length.
    Check {
        #[arg(long)]
        n: usize,
    },
    /// Find the least cycle length at which the partial isometry extends.
    Search {
        #[arg(long)]
        n_max: usize,
    },
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Re-check a certificate file.
    Verify,
    /// List the surjective linear isometries of a space.
    Isogroup {
        #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
        cap: usize,
    },
    /// Largest subspace on which the partial isometry is a surjective isometry.
    Core,
}

#[derive(Subcommand, Debug)]
enum SpaceOp {
    Dual,
    L1sum,
    Linfsum,
    /// Quotient by the span of `--basis`.
    Quotient {
        /// Vectors separated by `;`, entries by `,`, e.g. "1,1;0,1/2".
        #[arg(long)]
        basis: String,
    },
    /// Restriction of the norm to the span of `--basis`.
    Subspace {
        #[arg(long)]
        basis: String,
    },
}

#[derive(Subcommand, Debug)]
enum PartisoOp {
    Validate,
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// The partial isometry of the l1 plane that extends at no cycle length.
    Gurarii {
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
}

/// Input problems exit with 2; everything else is reported by the verdict.
#[derive(Debug)]
struct InputError(anyhow::Error);

enum Verdict {
    Positive,
    Negative,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(Verdict::Positive) => ExitCode::SUCCESS,
        Ok(Verdict::Negative) => ExitCode::from(1),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn input_err(e: impl Into<anyhow::Error>) -> InputError {
    InputError(e.into())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn inputs(cli: &Cli, count: usize) -> Result<Vec<(PathBuf, String)>, InputError> {
    if cli.input.len() != count {
        return Err(input_err(anyhow!("expected {count} --in file(s), got {}", cli.input.len())));
    }
    cli.input.iter().map(|p| read(p).map(|t| (p.clone(), t)).map_err(input_err)).collect()
}

fn single(cli: &Cli) -> Result<(PathBuf, String), InputError> {
    Ok(inputs(cli, 1)?.remove(0))
}

fn with_path<T>(path: &Path, r: polyiso::Result<T>) -> Result<T, InputError> {
    r.map_err(|e| input_err(anyhow!("{}: {e}", path.display())))
}

/// Writes the main result to `--out`, or to stdout.
fn emit(cli: &Cli, text: &str) -> Result<(), InputError> {
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())).map_err(input_err),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_basis(text: &str) -> Result<Vec<QVec>> {
    text.split(';')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.split(',').map(|x| parse_rat(x).map_err(|e| anyhow!("--basis: {e}"))).collect())
        .collect()
}

fn run(cli: &Cli) -> Result<Verdict, InputError> {
    match &cli.command {
        Command::Space { op } => run_space(cli, op),
        Command::Partiso { op: PartisoOp::Validate } => run_validate(cli),
        Command::Check { n } => run_check(cli, *n),
        Command::Search { n_max } => run_search(cli, *n_max),
        Command::Demo { which: Demo::Gurarii { n_max } } => run_demo(cli, *n_max),
        Command::Verify => run_verify(cli),
        Command::Isogroup { cap } => run_isogroup(cli, *cap),
        Command::Core => run_core(cli),
    }
}

fn run_space(cli: &Cli, op: &SpaceOp) -> Result<Verdict, InputError> {
    let spaces = match op {
        SpaceOp::L1sum | SpaceOp::Linfsum => inputs(cli, 2)?,
        _ => inputs(cli, 1)?,
    };
    let parsed = spaces
        .iter()
        .map(|(p, t)| with_path(p, parse_space(t)))
        .collect::<Result<Vec<_>, _>>()?;
    let s = &parsed[0];
    let subspace = |basis: &str| -> Result<Subspace, InputError> {
        let vs = parse_basis(basis).map_err(input_err)?;
        Subspace::new(s.dim(), vs).map_err(|e| input_err(anyhow!("--basis: {e}")))
    };
    let result = match op {
        SpaceOp::Dual => dual(s),
        SpaceOp::L1sum => l1_sum(s, &parsed[1]),
        SpaceOp::Linfsum => linf_sum(s, &parsed[1]),
        SpaceOp::Quotient { basis } => quotient_space(s, &subspace(basis)?).map_err(input_err)?.space,
        SpaceOp::Subspace { basis } => subspace_space(s, &subspace(basis)?).map_err(input_err)?,
    };
    emit(cli, &print_space(&result))?;
    Ok(Verdict::Positive)
}

/// Parses a partial isometry without validating it.
fn read_partiso_unchecked(cli: &Cli) -> Result<PartialIsometry, InputError> {
    let (path, text) = single(cli)?;
    let wire: PartIsoWire = with_path(&path, from_json(&text))?;
    with_path(&path, wire.to_unchecked(""))
}

fn read_partiso(cli: &Cli) -> Result<PartialIsometry, InputError> {
    let (path, text) = single(cli)?;
    with_path(&path, parse_partiso(&text))
}

fn run_validate(cli: &Cli) -> Result<Verdict, InputError> {
    let o = read_partiso_unchecked(cli)?;
    let v = validate(&o);
    let text = if cli.json {
        to_json(&json!({
            "valid": v.is_valid(),
            "violation": v.violation.as_ref().map(|x| x.to_string()),
        }))
    } else {
        match &v.violation {
            None => "valid\n".to_string(),
            Some(x) => format!("invalid: {x}\n"),
        }
    };
    emit(cli, &text)?;
    Ok(if v.is_valid() { Verdict::Positive } else { Verdict::Negative })
}

fn tuple_text(w: &[QVec]) -> String {
    w.iter().enumerate().map(|(i, a)| format!("a_{i} = {}", format_vec(a))).collect::<Vec<_>>().join(", ")
}

fn certificate_for(o: &PartialIsometry, n: usize) -> Result<Certificate, InputError> {
    let report = check_condition3(o, n).map_err(input_err)?;
    if report.holds {
        let system = cyclic_extension(o, n).and_then(|e| e.into_system()).map_err(input_err)?;
        Ok(Certificate::Extension(ExtensionCertificate { partiso: o.clone(), n, system }))
    } else {
        Ok(Certificate::Violation { partiso: o.clone(), report })
    }
}

/// Prints the certificate (JSON mode) or a summary; with `--out` the
/// certificate goes to the file and the summary to stdout.
fn report_certificate(cli: &Cli, cert: &Certificate, summary: &str) -> Result<(), InputError> {
    let body = print_certificate(cert);
    match (&cli.out, cli.json) {
        (Some(_), _) => {
            emit(cli, &body)?;
            print!("{summary}");
            Ok(())
        }
        (None, true) => emit(cli, &body),
        (None, false) => emit(cli, summary),
    }
}

fn run_check(cli: &Cli, n: usize) -> Result<Verdict, InputError> {
    if n == 0 {
        return Err(input_err(anyhow!("--n must be positive")));
    }
    let o = read_partiso(cli)?;
    let cert = certificate_for(&o, n)?;
    let (summary, verdict) = match &cert {
        Certificate::Extension(c) => (
            format!(
                "holds at n = {n}: extension of dimension {} with automorphism of order {}\n",
                c.system.space.dim(),
                c.system.order
            ),
            Verdict::Positive,
        ),
        Certificate::Violation { report, .. } => (
            format!(
                "fails at n = {n}: lhs = {}, rhs = {}, witness {}\n",
                format_rat(report.lhs.as_ref().expect("failing report")),
                format_rat(report.rhs.as_ref().expect("failing report")),
                tuple_text(report.witness.as_ref().expect("failing report"))
            ),
            Verdict::Negative,
        ),
        Certificate::Unknown { .. } => unreachable!("single-length check"),
    };
    report_certificate(cli, &cert, &summary)?;
    Ok(verdict)
}

fn run_search(cli: &Cli, n_max: usize) -> Result<Verdict, InputError> {
    let o = read_partiso(cli)?;
    match search_extendability(&o, n_max).map_err(input_err)? {
        Some(c) => {
            let summary = format!("extends at n = {}\n", c.n);
            report_certificate(cli, &Certificate::Extension(c), &summary)?;
            Ok(Verdict::Positive)
        }
        None => {
            let reports = (1..=n_max).map(|n| check_condition3(&o, n)).collect::<polyiso::Result<Vec<_>>>();
            let cert = Certificate::Unknown { partiso: o, n_max, reports: reports.map_err(input_err)? };
            report_certificate(cli, &cert, &format!("unknown up to {n_max}\n"))?;
            Ok(Verdict::Negative)
        }
    }
}

/// `a_i = (2^-i, 0)`, in domain-basis coordinates of the fixture.
fn halving_tuple(n: usize) -> Vec<QVec> {
    let half = rat(1, 2);
    let mut a = rat(1, 1);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(vec![a.clone()]);
        a *= &half;
    }
    out
}

fn run_demo(cli: &Cli, n_max: usize) -> Result<Verdict, InputError> {
    let o = match cli.input.first() {
        Some(p) => with_path(p, parse_partiso(&read(p).map_err(input_err)?))?,
        None => parse_partiso(GURARII_FIXTURE).map_err(input_err)?,
    };
    let mut rows = Vec::new();
    let mut text = String::from("n   holds  lhs  rhs\n");
    for n in 1..=n_max {
        let report = check_condition3(&o, n).map_err(input_err)?;
        let (lhs, rhs) = evaluate_condition3(&o, &halving_tuple(n)).map_err(input_err)?;
        text.push_str(&format!("{n:<3} {:<6} {:<4} {}\n", report.holds, format_rat(&lhs), format_rat(&rhs)));
        rows.push(json!({
            "n": n,
            "holds": report.holds,
            "lhs": format_rat(&lhs),
            "rhs": format_rat(&rhs),
            "decoded_lhs": report.lhs.as_ref().map(format_rat),
            "decoded_rhs": report.rhs.as_ref().map(format_rat),
        }));
    }
    if cli.json {
        emit(cli, &to_json(&json!({ "rows": rows })))?;
    } else {
        emit(cli, &text)?;
    }
    Ok(Verdict::Positive)
}

fn run_verify(cli: &Cli) -> Result<Verdict, InputError> {
    let (path, text) = single(cli)?;
    let cert = with_path(&path, parse_certificate(&text))?;
    let sound = cert.verify().map_err(input_err)?;
    let out = if cli.json {
        to_json(&json!({ "sound": sound }))
    } else if sound {
        "sound\n".to_string()
    } else {
        "unsound\n".to_string()
    };
    emit(cli, &out)?;
    Ok(if sound { Verdict::Positive } else { Verdict::Negative })
}

fn run_isogroup(cli: &Cli, cap: usize) -> Result<Verdict, InputError> {
    let (path, text) = single(cli)?;
    let s = with_path(&path, parse_space(&text))?;
    let group = isometry_group_with_cap(&s, cap).map_err(input_err)?;
    let out = if cli.json {
        let elements: Vec<MapWire> = group.iter().map(MapWire::from_map).collect();
        to_json(&json!({ "order": group.len(), "elements": elements }))
    } else {
        let mut t = format!("order {}\n", group.len());
        for g in &group {
            let rows: Vec<String> = g.matrix().row_vecs().iter().map(|r| format_vec(r)).collect();
            t.push_str(&format!("[{}]\n", rows.join(" ")));
        }
        t
    };
    emit(cli, &out)?;
    Ok(Verdict::Positive)
}

fn run_core(cli: &Cli) -> Result<Verdict, InputError> {
    let o = read_partiso(cli)?;
    let core = eventual_core(&o).map_err(input_err)?;
    if !core.verify(&o).map_err(input_err)? {
        return Err(input_err(anyhow!("restricted map failed re-verification")));
    }
    let out = if cli.json {
        to_json(&CoreWire::from_core(&core))
    } else {
        let basis: Vec<String> = core.core.basis().iter().map(|b| format_vec(b)).collect();
        format!("core dimension {} after {} steps; basis [{}]\n", core.core.dim(), core.steps, basis.join(", "))
    };
    emit(cli, &out)?;
    Ok(Verdict::Positive)
}
