use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use looplock_core::automaton::{build_from_closed, Automaton};
use looplock_core::dsl::{self, Checked, Decl, SpecFile};
use looplock_core::epsilon::{epsilon_eliminate, epsilon_eliminate_general};
use looplock_core::extension::{commutative_extension_with_stats, DEFAULT_STATE_LIMIT};
use looplock_core::interp::{run_system, trace_to_jsonl, Interpretation, RunLimits};
use looplock_core::shapes::Shape;
use looplock_core::system::{compose, normal_form, ClosedLoop, DeclaredSystem};
use looplock_core::value::Value;
use looplock_core::verify::{verify, VerifyOptions};

/// Exit codes: 0 success (or `similar`), 1 error, 2 `not similar`.
#[derive(Parser)]
#[command(
    name = "looplock",
    version,
    about = "Check that a controlled plant performs every computation a specification asks for"
)]
struct Cli {
    /// Render combinators and systems in mathematical notation.
    #[arg(long, global = true)]
    unicode: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck every declaration.
    Check { file: PathBuf },
    /// Compose a plant with a controller and print the closed loop.
    Compose {
        file: PathBuf,
        #[arg(long)]
        plant: String,
        #[arg(long)]
        controller: String,
        /// Name of the composed system in the output.
        #[arg(long, default_value = "Composed")]
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the automaton of a closed-loop system.
    Elaborate {
        file: PathBuf,
        /// A closed-loop system of the file; or give --plant and --controller.
        #[arg(long, required_unless_present = "plant")]
        system: Option<String>,
        #[arg(long, requires = "controller")]
        plant: Option<String>,
        #[arg(long)]
        controller: Option<String>,
        #[arg(long, value_enum, default_value_t = Emit::Json)]
        emit: Emit,
        /// Remove ε-transitions (and unreachable states).
        #[arg(long)]
        eps_eliminate: bool,
        /// Build the commutative extension; implies a prior ε-elimination.
        #[arg(long)]
        commutative_extension: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether spec ≲ plant ⊗ controller.
    Verify {
        file: PathBuf,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        plant: String,
        #[arg(long)]
        controller: String,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Compare against the composed automaton without extending it.
        #[arg(long)]
        no_extension: bool,
    },
    /// Run a closed-loop system against a scripted interpretation.
    Simulate {
        file: PathBuf,
        /// A closed-loop system of the file; or give --plant and --controller.
        #[arg(long, required_unless_present = "plant")]
        system: Option<String>,
        #[arg(long, requires = "controller")]
        plant: Option<String>,
        #[arg(long)]
        controller: Option<String>,
        /// JSON scenario: payload domains and tables for the opaque functions.
        #[arg(long)]
        interp: PathBuf,
        /// Initial parameter as a JSON literal.
        #[arg(long)]
        param: String,
        #[arg(long)]
        cycles: usize,
        /// Write the trace as JSON lines here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Json,
    Dot,
}

#[derive(Clone, Copy)]
struct Style {
    color: bool,
}

impl Style {
    fn from_env() -> Style {
        let color = match std::env::var("LOOPLOCK_COLOR").as_deref() {
            Ok("always") => true,
            Ok("never") => false,
            _ => std::io::stdout().is_terminal() && std::io::stderr().is_terminal(),
        };
        Style { color }
    }

    fn paint(&self, code: &str, s: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }

    fn good(&self, s: &str) -> String {
        self.paint("32", s)
    }

    fn bad(&self, s: &str) -> String {
        self.paint("31", s)
    }
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

fn load(path: &Path) -> Res<SpecFile> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    dsl::parse(&text).map_err(|e| Failure(format!("{}:{e}", path.display())))
}

fn system<'a>(f: &'a SpecFile, name: &str) -> Res<&'a DeclaredSystem> {
    f.system(name)
        .ok_or_else(|| Failure(format!("no system named `{name}`")))
}

fn closed_or_composed(
    f: &SpecFile,
    name: Option<String>,
    plant: Option<String>,
    controller: Option<String>,
) -> Res<ClosedLoop> {
    match (name, plant, controller) {
        (Some(n), None, None) => closed_loop(f, &n),
        (None, Some(p), Some(c)) => Ok(compose(&f.symbols, system(f, &p)?, system(f, &c)?)?),
        _ => Err(Failure("give either --system or both --plant and --controller".into())),
    }
}

fn closed_loop(f: &SpecFile, name: &str) -> Res<ClosedLoop> {
    let s = system(f, name)?;
    if s.shape != Shape::Id {
        return Err(Failure(format!(
            "`{name}` has shape {}, not a closed loop (Id); compose it with a controller via --plant/--controller",
            s.shape
        )));
    }
    Ok(normal_form(&f.symbols, &s.expr, s.param.as_ref())?)
}

fn emit(output: Option<&Path>, text: &str) -> Res<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli, style: Style) -> Res<ExitCode> {
    let unicode = cli.unicode;
    match cli.command {
        Command::Check { file } => {
            let f = load(&file)?;
            let mut failed = false;
            for r in f.check() {
                match r {
                    Ok(Checked::Def { name, ty }) => println!("def {name} : {ty}"),
                    Ok(Checked::Sys { name, typing }) => {
                        println!(
                            "sys {name} : {}  (loop state {})",
                            typing.system_type, typing.loop_state
                        )
                    }
                    Err(e) => {
                        failed = true;
                        eprintln!("{}: {e}", style.bad("error"));
                    }
                }
            }
            Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Compose {
            file,
            plant,
            controller,
            name,
            output,
        } => {
            let f = load(&file)?;
            let closed = compose(&f.symbols, system(&f, &plant)?, system(&f, &controller)?)?;
            // Context first, so the output can be checked on its own.
            let mut decls: Vec<Decl> = f
                .decls
                .iter()
                .filter(|d| matches!(d, Decl::Type(_) | Decl::Fn { .. }))
                .cloned()
                .collect();
            decls.push(Decl::Sys {
                name,
                system: DeclaredSystem {
                    shape: Shape::Id,
                    param: Some(closed.param.clone()),
                    expr: closed.to_system(),
                },
            });
            let out = SpecFile {
                decls,
                symbols: f.symbols.clone(),
            };
            let header = format!("-- {plant} composed with {controller}; loop state {}\n", closed.state);
            let body = if unicode { out.to_unicode() } else { out.to_source() };
            emit(output.as_deref(), &(header + &body))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Elaborate {
            file,
            system: name,
            plant,
            controller,
            emit: format,
            eps_eliminate,
            commutative_extension,
            output,
        } => {
            let f = load(&file)?;
            let closed = closed_or_composed(&f, name, plant, controller)?;
            let mut a: Automaton = build_from_closed(&f.symbols, &closed)?;
            if eps_eliminate || commutative_extension {
                a = epsilon_eliminate(&a)?.trim();
            }
            if commutative_extension {
                a = commutative_extension_with_stats(&a, DEFAULT_STATE_LIMIT)?.0;
                if eps_eliminate {
                    a = epsilon_eliminate_general(&a).trim();
                }
            }
            let text = match format {
                Emit::Json => serde_json::to_string_pretty(&a.to_json())? + "\n",
                Emit::Dot => a.to_dot(),
            };
            emit(output.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            file,
            spec,
            plant,
            controller,
            report,
            no_extension,
        } => {
            let f = load(&file)?;
            let opts = VerifyOptions {
                skip_extension: no_extension,
                ..VerifyOptions::default()
            };
            let r = verify(
                &f.symbols,
                system(&f, &spec)?,
                system(&f, &plant)?,
                system(&f, &controller)?,
                opts,
            )?;
            if let Some(p) = report {
                fs::write(&p, serde_json::to_string_pretty(&r.to_json())? + "\n")
                    .map_err(|e| Failure(format!("{}: {e}", p.display())))?;
            }
            if r.verdict {
                println!("{}: {spec} ≲ {plant} ⊗ {controller}", style.good("similar"));
                return Ok(ExitCode::SUCCESS);
            }
            println!(
                "{}: {spec} is not simulated by {plant} ⊗ {controller}",
                style.bad("not similar")
            );
            if let Some(cx) = &r.counterexample {
                let steps: Vec<String> = cx
                    .path
                    .iter()
                    .map(|s| format!("{}[{}→{}]", s.function, s.dom_variant, s.outcome))
                    .collect();
                let path = if steps.is_empty() {
                    "start".into()
                } else {
                    steps.join(" ; ")
                };
                println!(
                    "  after {path}, the specification applies `{}` (argument variant {}) and the composed system cannot follow",
                    cx.unmatched.function, cx.unmatched.dom_variant
                );
            }
            Ok(ExitCode::from(2))
        }
        Command::Simulate {
            file,
            system: name,
            plant,
            controller,
            interp,
            param,
            cycles,
            trace,
        } => {
            let f = load(&file)?;
            let closed = closed_or_composed(&f, name, plant, controller)?;
            let script: serde_json::Value = serde_json::from_str(
                &fs::read_to_string(&interp).map_err(|e| Failure(format!("{}: {e}", interp.display())))?,
            )?;
            let interp = Interpretation::from_script(&f.symbols, &script)?;
            let x0 = Value::from_json(&closed.param, &serde_json::from_str(&param)?)?;
            let run = run_system(&closed, &interp, &x0, RunLimits::steps(cycles))?;
            let out = serde_json::json!({
                "diamond": run.diamond().to_json(),
                "applications": run.applications.len(),
                "stop": run.stop,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            if let Some(p) = trace {
                fs::write(&p, trace_to_jsonl(&run.trace)).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style::from_env();
    match run(cli, style) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("{}: {msg}", style.bad("error"));
            ExitCode::FAILURE
        }
    }
}
