//! Command-line front end. Every artifact is JSON; results go to stdout unless `--out`
//! is given. Exit status: 0 success, 1 a check or computation failed, 2 bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tropical_mirror::interface::{
    self, parse_ints, parse_points, parse_rats, run_checks, ComplexSpec, InterfaceError, ProblemSpec, Suite,
    TableFile, TableRecord, ThetaRecord, VertexFile,
};
use tropical_mirror::scattering::complete;
use tropical_mirror::theta::{theta_local, MirrorAlgebra, ThetaError};

#[derive(Parser)]
#[command(name = "tmirror", version, about = "Scattering diagrams, theta functions and mirror algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Complete the initial walls of a problem file to a consistent diagram.
    Scatter {
        #[arg(long)]
        input: PathBuf,
        /// Overrides the order in the file.
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run invariant suites on a diagram; exits 1 on the first failing suite.
    Check {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Local theta function at a basepoint.
    Theta {
        #[arg(long)]
        diagram: PathBuf,
        /// Integer point, e.g. `1,0`.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        /// Rational point, e.g. `1/2,-3/7`.
        #[arg(long, allow_hyphen_values = true)]
        basepoint: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structure constants of a product of theta functions.
    Multiply {
        #[arg(long)]
        diagram: PathBuf,
        /// Points separated by `;`, e.g. `1,0;0,1`.
        #[arg(long, allow_hyphen_values = true)]
        inputs: String,
        /// Only this target; all nonzero targets otherwise.
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All binary structure constants of basis points up to a norm.
    Table {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        max_norm: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vertex algebra of a Δ-complex with its pseudomanifold and link reports.
    Vertex {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, InterfaceError> {
    std::fs::read_to_string(path).map_err(|e| InterfaceError::Input(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), InterfaceError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| InterfaceError::Input(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(InterfaceError::Input(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn theta_err(e: ThetaError) -> InterfaceError {
    match e {
        ThetaError::NonGeneric(_) | ThetaError::OutsideSupport(_) | ThetaError::Input(_) => {
            InterfaceError::Input(e.to_string())
        }
        e => InterfaceError::Compute(e.to_string()),
    }
}

fn run(cli: Cli) -> Result<bool, InterfaceError> {
    match cli.cmd {
        Cmd::Scatter { input, order, out } => {
            let mut spec = ProblemSpec::parse(&read(&input)?)?;
            if let Some(k) = order {
                spec.order = k;
            }
            let d = spec.diagram()?;
            let done = complete(&d).map_err(|e| InterfaceError::Compute(e.to_string()))?;
            emit(&out, &interface::to_json(&ProblemSpec::from_diagram(&done, &spec)))?;
            Ok(true)
        }
        Cmd::Check { diagram, suite, out } => {
            let spec = ProblemSpec::parse(&read(&diagram)?)?;
            let report = run_checks(&spec, suite)?;
            emit(&out, &interface::to_json(&report))?;
            Ok(report.passed)
        }
        Cmd::Theta {
            diagram,
            direction,
            basepoint,
            out,
        } => {
            let d = ProblemSpec::parse(&read(&diagram)?)?.diagram()?;
            let p = parse_ints("direction", &direction)?;
            let x = parse_rats("basepoint", &basepoint)?;
            if p.len() != d.ambient.rank() || x.len() != d.ambient.rank() {
                return Err(InterfaceError::field("direction", "point has the wrong rank"));
            }
            let t = theta_local(&d, &p, &x).map_err(theta_err)?;
            emit(&out, &interface::to_json(&ThetaRecord::from(&t)))?;
            Ok(true)
        }
        Cmd::Multiply {
            diagram,
            inputs,
            target,
            out,
        } => {
            let spec = ProblemSpec::parse(&read(&diagram)?)?;
            let alg = MirrorAlgebra::new(spec.diagram()?, spec.options()).map_err(theta_err)?;
            let mut ins = parse_points("inputs", &inputs)?;
            ins.sort();
            let records: Vec<TableRecord> = match target {
                Some(t) => {
                    let q = parse_ints("target", &t)?;
                    let c = alg.structure_constant(&ins, &q).map_err(theta_err)?;
                    vec![TableRecord {
                        inputs: ins,
                        q,
                        terms: c.to_records(),
                    }]
                }
                None => alg
                    .multiply_points(&ins)
                    .map_err(theta_err)?
                    .into_iter()
                    .map(|(q, c)| TableRecord {
                        inputs: ins.clone(),
                        q,
                        terms: c.to_records(),
                    })
                    .collect(),
            };
            emit(&out, &interface::to_json(&records))?;
            Ok(true)
        }
        Cmd::Table {
            diagram,
            max_norm,
            out,
        } => {
            let mut spec = ProblemSpec::parse(&read(&diagram)?)?;
            if let Some(n) = max_norm {
                spec.bound = n;
                spec.validate()?;
            }
            let alg = MirrorAlgebra::new(spec.diagram()?, spec.options()).map_err(theta_err)?;
            let table = alg.table().map_err(theta_err)?;
            emit(&out, &interface::to_json(&TableFile::from(&table)))?;
            Ok(true)
        }
        Cmd::Vertex { input, out } => {
            let spec = ComplexSpec::parse(&read(&input)?)?;
            let file = VertexFile::build(&spec)?;
            emit(&out, &interface::to_json(&file))?;
            Ok(file.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
