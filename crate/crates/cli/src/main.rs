use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use spinlab::certificate::{Certificate, Manifest, SCHEMA_VERSION};
use spinlab::cocycle::{
    self, parse_trivializations, parse_units, EvaluationPlan, Representation, TransitionData, DEFAULT_PRIME,
};
use spinlab::quadform::{is_isometric_ff, verify_isometry, QuadraticForm};
use spinlab::scalar::Sign;
use spinlab::sporadic::{self, VerifyConfig};
use spinlab::wittcheck::{self, FuzzPlan};
use spinlab::{Error, ExactMatrix, FieldDescriptor, Scalar};

/// Exact verification of the low-rank spin isogenies, quadratic forms over
/// finite fields, and transition-function cocycles.
#[derive(Parser, Debug)]
#[command(name = "spinlab", version)]
struct Cli {
    /// Field: `q` for the rationals or `fp:<p>` for an odd prime p.
    #[arg(long, global = true, default_value = "q", value_parser = parse_field)]
    field: FieldDescriptor,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Random samples per check.
    #[arg(long, global = true, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verifiers and print a manifest of certificates.
    Verify {
        #[arg(required = true, value_enum)]
        names: Vec<CheckName>,
    },
    /// Quadratic forms read from JSON files.
    #[command(subcommand)]
    Form(FormCommand),
    /// Transition data read from JSON files.
    #[command(subcommand)]
    Cocycle(CocycleCommand),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum CheckName {
    Forms,
    Kernels,
    Stab56,
    Stab45,
    Stab34,
    Hypso4,
    Weyl,
    Cancellation,
    Chain,
    All,
}

#[derive(Subcommand, Debug)]
enum FormCommand {
    /// Orthogonal basis and diagonal Gram values.
    Diagonalize { form: PathBuf },
    /// Witt index and anisotropic residue (finite fields only).
    Witt { form: PathBuf },
    /// Isometry test with an explicit witness (finite fields only).
    Isometric { first: PathBuf, second: PathBuf },
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Evaluation prime for identity testing.
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u64,
}

#[derive(Subcommand, Debug)]
enum CocycleCommand {
    /// Cocycle condition and structure equations.
    Check {
        data: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Push forward along a representation.
    Push {
        data: PathBuf,
        #[arg(long)]
        rep: String,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Twist by a scalar cocycle.
    Twist {
        data: PathBuf,
        units: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Check chart trivializations `g_ij = h_i h_j⁻¹`.
    Witness {
        data: PathBuf,
        trivializations: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
    },
}

fn parse_field(s: &str) -> Result<FieldDescriptor, String> {
    s.parse::<FieldDescriptor>().map_err(|e| e.to_string())
}

/// Failure modes beyond a FAIL certificate.
enum Failure {
    Usage(String),
    WrongField(String),
    Checked(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::WrongField => Failure::WrongField(e.to_string()),
            Error::NotACocycle(_) => Failure::Checked(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { names } => cmd_verify(&cli, names),
        Command::Form(f) => cmd_form(&cli, f),
        Command::Cocycle(c) => cmd_cocycle(&cli, c),
    };
    match result {
        Ok((value, ok)) => {
            let text = serde_json::to_string_pretty(&value).expect("JSON values serialize") + "\n";
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("FAIL: see counterexample in output");
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::WrongField(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Checked(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cmd_verify(cli: &Cli, names: &[CheckName]) -> Outcome {
    let mut selected: Vec<CheckName> = if names.contains(&CheckName::All) {
        vec![
            CheckName::Forms,
            CheckName::Kernels,
            CheckName::Stab56,
            CheckName::Stab45,
            CheckName::Stab34,
            CheckName::Hypso4,
            CheckName::Weyl,
            CheckName::Cancellation,
            CheckName::Chain,
        ]
    } else {
        names.to_vec()
    };
    selected.sort();
    selected.dedup();
    let cfg = VerifyConfig::new(cli.field, cli.seed, cli.trials as usize);
    let mut certs = Vec::new();
    for name in selected {
        let cert = match name {
            CheckName::Forms => sporadic::verify_forms(&cfg)?,
            CheckName::Kernels => sporadic::verify_kernels(&cfg)?,
            CheckName::Stab56 => sporadic::verify_stab56(&cfg)?,
            CheckName::Stab45 => sporadic::verify_stab45(&cfg)?,
            CheckName::Stab34 => sporadic::verify_stab34(&cfg)?,
            CheckName::Hypso4 => sporadic::verify_hypso4(&cfg)?,
            CheckName::Weyl => sporadic::verify_weyl_equivalence(&cfg)?,
            CheckName::Cancellation => {
                let plan = match cli.field.modulus() {
                    Some(p) => FuzzPlan::new(vec![p], 1, wittcheck::MAX_RANK, cli.trials as usize, cli.seed)?,
                    None => FuzzPlan::standard(cli.trials as usize, cli.seed),
                };
                wittcheck::run_cancellation_suite(&plan)?
            }
            CheckName::Chain => wittcheck::run_stabilization_chain(cli.seed, cli.trials as usize)?,
            CheckName::All => unreachable!("expanded above"),
        };
        certs.push(cert);
    }
    let manifest = Manifest::new(certs);
    let ok = manifest.all_pass;
    Ok((serde_json::to_value(&manifest).expect("manifest serializes"), ok))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// `{"field": tag, "gram": [[…], …]}` or the library's own form encoding.
fn read_form(path: &Path, default_field: FieldDescriptor) -> Result<QuadraticForm, Failure> {
    let v = read_json(path)?;
    if let Some(rows) = v.get("gram").and_then(Value::as_array) {
        let field = match v.get("field").and_then(Value::as_str) {
            Some(tag) => tag.parse::<FieldDescriptor>()?,
            None => default_field,
        };
        let rows = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("gram rows must be arrays".into()))?
                    .iter()
                    .map(|x| Scalar::from_json(x, field))
                    .collect::<Result<Vec<_>, Error>>()
            })
            .collect::<Result<Vec<_>, Error>>()?;
        if rows.is_empty() {
            return Ok(QuadraticForm::zero(field));
        }
        return Ok(QuadraticForm::new(ExactMatrix::from_rows(field, rows)?)?);
    }
    serde_json::from_value(v).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn vec_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(Scalar::to_json).collect())
}

fn cmd_form(cli: &Cli, cmd: &FormCommand) -> Outcome {
    match cmd {
        FormCommand::Diagonalize { form } => {
            let q = read_form(form, cli.field)?;
            let d = q.diagonalize()?;
            // square classes of the diagonal; over ℚ only the sign is reported
            let (label_a, label_b, count_a) = match q.field() {
                FieldDescriptor::Rationals => (
                    "positive",
                    "negative",
                    d.diagonal.iter().filter(|x| x.sign() == Some(Sign::Plus)).count(),
                ),
                _ => (
                    "square",
                    "nonsquare",
                    d.diagonal.iter().map(Scalar::is_square).collect::<Result<Vec<_>, _>>()?.into_iter().filter(|&s| s).count(),
                ),
            };
            let n = d.diagonal.len();
            Ok((
                json!({
                    "schema": SCHEMA_VERSION,
                    "field": q.field().tag(),
                    "change_of_basis": d.change_of_basis.to_json(),
                    "diagonal": vec_json(&d.diagonal),
                    "square_classes": {label_a: count_a, label_b: n - count_a},
                }),
                true,
            ))
        }
        FormCommand::Witt { form } => {
            let q = read_form(form, cli.field)?;
            let w = q.witt_decompose()?;
            let mut v = w.to_json();
            v["schema"] = json!(SCHEMA_VERSION);
            v["field"] = json!(q.field().tag());
            Ok((v, true))
        }
        FormCommand::Isometric { first, second } => {
            let f = read_form(first, cli.field)?;
            let g = read_form(second, cli.field)?;
            let iso = is_isometric_ff(&f, &g)?;
            let mut v = json!({"schema": SCHEMA_VERSION, "field": f.field().tag(), "isometric": iso});
            let mut ok = true;
            if iso {
                let w = f.isometry_witness_ff(&g)?.ok_or_else(|| Failure::Checked("no witness found".into()))?;
                let cert = verify_isometry(&w, &f, &g)?;
                ok = cert.passed();
                v["certificate"] = cert.to_json();
            }
            Ok((v, ok))
        }
    }
}

fn plan(cli: &Cli, p: &PlanArgs) -> Result<EvaluationPlan, Failure> {
    Ok(EvaluationPlan::new(p.prime, cli.trials as usize, cli.seed)?)
}

fn report(result: Option<Value>, certs: Vec<Certificate>) -> Outcome {
    let ok = certs.iter().all(Certificate::passed);
    let mut v = json!({
        "schema": SCHEMA_VERSION,
        "all_pass": ok,
        "certificates": certs.iter().map(Certificate::to_json).collect::<Vec<_>>(),
    });
    if let Some(r) = result {
        v["result"] = r;
    }
    Ok((v, ok))
}

fn cmd_cocycle(cli: &Cli, cmd: &CocycleCommand) -> Outcome {
    match cmd {
        CocycleCommand::Check { data, plan: p } => {
            let t = TransitionData::from_json(&read_json(data)?)?;
            let plan = plan(cli, p)?;
            report(None, vec![cocycle::check_cocycle(&t, &plan)?, cocycle::structure_check(&t, &plan)?])
        }
        CocycleCommand::Push { data, rep, plan: p } => {
            let t = TransitionData::from_json(&read_json(data)?)?;
            let rep: Representation = rep.parse()?;
            let plan = plan(cli, p)?;
            let pushed = cocycle::pushforward(&t, rep)?;
            let certs = vec![cocycle::check_cocycle(&pushed, &plan)?, cocycle::structure_check(&pushed, &plan)?];
            report(Some(pushed.to_json()), certs)
        }
        CocycleCommand::Twist { data, units, plan: p } => {
            let t = TransitionData::from_json(&read_json(data)?)?;
            let u = parse_units(&read_json(units)?)?;
            let plan = plan(cli, p)?;
            let out = cocycle::twist_by_unit(&t, &u, &plan)?;
            let (mut v, ok) = report(Some(out.data.to_json()), vec![out.unit_cocycle.clone()])?;
            v["structure"] = json!(out.data.structure.name());
            v["structure_retained"] = json!(out.structure_retained);
            if let Some(torsion) = &out.torsion {
                v["torsion"] = torsion.to_json();
            }
            if !out.structure_retained {
                let msg = format!(
                    "unit cocycle is not {}-torsion; structure {} downgraded to GL",
                    t.rank,
                    t.structure.name()
                );
                eprintln!("warning: {msg}");
                v["warning"] = json!(msg);
            }
            Ok((v, ok))
        }
        CocycleCommand::Witness { data, trivializations, plan: p } => {
            let t = TransitionData::from_json(&read_json(data)?)?;
            let h = parse_trivializations(&read_json(trivializations)?)?;
            let plan = plan(cli, p)?;
            report(None, vec![cocycle::verify_coboundary_witness(&t, &h, &plan)?])
        }
    }
}
