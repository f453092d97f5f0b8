use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use frobdyn::field::parse::parse_rational_function;
use frobdyn::fsets::{fset_member, frob_eq_count};
use frobdyn::reduction::{build_normal_form, ReductionError};
use frobdyn::report::{
    frob_count_json, jordan_json, membership_json, normal_form_json, orbit_csv, point_json, verdict_json,
    FSetInput, FrobEqInput, JordanInput, JordanMatrix, PointInput,
};
use frobdyn::skew::jordan_form_central;
use frobdyn::system::{InputError, System, SystemDescription};
use frobdyn::trichotomy::{
    analyze, construct_dense_point, simulate_orbit, AnalyzeOptions, EvidenceOptions, TorsionRule, TrichotomyError,
};

/// Exact analysis of self-maps of split semiabelian varieties over F_q(t1..td).
#[derive(Parser, Debug)]
#[command(name = "frobdyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Write the orbit CSV here instead of stdout (simulate).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Seed for specialization trials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the transcendence degree of the system.
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Orbit length.
    #[arg(long, global = true, default_value_t = 50)]
    steps: usize,
    /// Degree bound for the specialization test.
    #[arg(long, global = true, default_value_t = 3)]
    degree_bound: u32,
    /// Bound on m in the Frobenius-power test.
    #[arg(long, global = true)]
    m_bound: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normal form, conditions B and C, and orbit evidence for condition A.
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        index_bound: u64,
    },
    /// Orbit table of the torus part.
    Simulate {
        file: PathBuf,
        /// Starting point as comma-separated literals (default: the
        /// constructed dense point).
        #[arg(long, value_delimiter = ',')]
        start: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = Rule::Deterministic)]
        torsion_rule: Rule,
    },
    /// Normal form of the map.
    Reduce { file: PathBuf },
    /// Jordan form of a matrix with a single central eigenvalue.
    Jordan { file: PathBuf },
    /// Membership of a point in an F-set.
    FsetMember { point: PathBuf, fset: PathBuf },
    /// Count n ≤ N for which a Frobenius-power equation is solvable.
    CountFrobeq { file: PathBuf, n: u64 },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Rule {
    Deterministic,
    Enumerate,
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Invariant(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<TrichotomyError> for Failure {
    fn from(e: TrichotomyError) -> Self {
        match e {
            TrichotomyError::Invariant(_) => Failure::Invariant(e.to_string()),
            TrichotomyError::Reduction(r) => r.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(text: &str, dest: Option<&PathBuf>) -> Outcome {
    match dest {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(v: &Value, cli: &Cli) -> Outcome {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    emit(&s, cli.json.as_ref())
}

fn load_system(path: &Path, cli: &Cli) -> Result<System, Failure> {
    let src = read(path)?;
    let mut sys = SystemDescription::from_json(&src)?.build(cli.d)?;
    if let Some(m) = cli.m_bound {
        sys.map.m_bound = m;
    }
    Ok(sys)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Analyze { file, trials, index_bound } => {
            let sys = load_system(file, cli)?;
            let opts = AnalyzeOptions {
                steps: cli.steps,
                evidence: EvidenceOptions {
                    index_bound: *index_bound,
                    spec_trials: *trials,
                    degree_bound: cli.degree_bound,
                    seed: cli.seed,
                    subset: None,
                },
                gamma_avoid: Vec::new(),
            };
            let v = analyze(&sys, &opts)?;
            emit_json(&verdict_json(&v, &sys.basis, &sys.names), cli)
        }
        Command::Simulate { file, start, torsion_rule } => {
            let sys = load_system(file, cli)?;
            let (sys, x0) = match start {
                Some(lits) => {
                    let parsed = lits
                        .iter()
                        .enumerate()
                        .map(|(i, l)| {
                            parse_rational_function(l, sys.ctx(), &sys.names)
                                .map_err(|e| Failure::Input(format!("start[{i}]: {e}")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let sys = sys.rebase(&parsed).map_err(|e| Failure::Input(format!("start: {e}")))?;
                    let x0 = sys.point_from_literals(lits)?;
                    (sys, x0)
                }
                None => {
                    let nf = build_normal_form(&sys.map)?;
                    let plan = construct_dense_point(&sys, &nf, &[], true)?;
                    (plan.system, plan.start)
                }
            };
            let rule = match torsion_rule {
                Rule::Deterministic => TorsionRule::Deterministic,
                Rule::Enumerate => TorsionRule::Enumerate,
            };
            let orbit = simulate_orbit(&sys, &x0, cli.steps, rule)?;
            let csv = orbit_csv(&orbit).map_err(|e| Failure::Input(e.to_string()))?;
            emit(&csv, cli.csv.as_ref())?;
            if let Some(j) = &cli.json {
                let v = serde_json::json!({
                    "basis": frobdyn::report::basis_json(&sys.basis, &sys.names),
                    "points": orbit.points.iter().map(|x| point_json(x, &sys.basis, &sys.names)).collect::<Vec<_>>(),
                    "torsionModulus": orbit.torsion_modulus.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                });
                emit(&format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")), Some(j))?;
            }
            Ok(())
        }
        Command::Reduce { file } => {
            let sys = load_system(file, cli)?;
            let nf = build_normal_form(&sys.map)?;
            emit_json(&normal_form_json(&nf, &sys.basis, &sys.names), cli)
        }
        Command::Jordan { file } => {
            let input = JordanInput::from_json(&read(file)?)?;
            let v = match input.build()? {
                JordanMatrix::Rational(a) => {
                    let j = jordan_form_central(&a).map_err(|e| Failure::Input(e.to_string()))?;
                    jordan_json(&a, &j)
                }
                JordanMatrix::Ring(_, a) => {
                    let j = jordan_form_central(&a).map_err(|e| Failure::Input(e.to_string()))?;
                    jordan_json(&a, &j)
                }
            };
            if v["verified"] != Value::Bool(true) {
                return Err(Failure::Invariant("P⁻¹AP differs from the Jordan matrix".into()));
            }
            emit_json(&v, cli)
        }
        Command::FsetMember { point, fset } => {
            let pt = PointInput::from_json(&read(point)?)?;
            let prob = FSetInput::from_json(&read(fset)?)?.build(&pt)?;
            let m = fset_member(&prob.point, &prob.set).map_err(|e| Failure::Input(e.to_string()))?;
            if let Some(c) = &m.certificate {
                if !prob.set.point(&c.ns, &c.h_coeffs).mul(&prob.point.inv()).killed_by(&prob.set.ell) {
                    return Err(Failure::Invariant("membership certificate does not reproduce the point".into()));
                }
            }
            emit_json(&membership_json(&m), cli)
        }
        Command::CountFrobeq { file, n } => {
            let e = FrobEqInput::from_json(&read(file)?)?.build()?;
            let c = frob_eq_count(&e, *n);
            emit_json(&frob_count_json(&c, *n), cli)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("internal invariant violated: {m}");
            ExitCode::from(3)
        }
    }
}
