//! Command line front end for the scene-graph DSL toolchain.
//!
//! Four subcommands cover the pipeline: `check` parses and validates a
//! model and reports function-block compatibility, `gen` emits the setup
//! program and interface stubs, `run` instantiates the world (optionally
//! executing function blocks) and writes snapshot and graph renderings,
//! and `viz` prints the Graphviz form directly.
//!
//! Exit codes: 0 on success (warnings allowed), 1 on diagnostics or
//! runtime failures, 2 on usage and I/O errors. Diagnostics go to stderr
//! as `file:line:col: severity: CODE: message`; all file outputs are byte
//! deterministic for a fixed invocation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rsg_core::ast::{parse, SourceModel};
use rsg_core::codegen::dot::to_dot;
use rsg_core::codegen::stub::{backend_for, block_interface};
use rsg_core::codegen::{emit_setup_program, instantiate};
use rsg_core::diag::Diagnostic;
use rsg_core::runtime::block::FunctionBlockInstance;
use rsg_core::runtime::demo::builtin_body;
use rsg_core::runtime::TimeStamp;
use rsg_core::sem::pattern::check_block_compatibility;
use rsg_core::sem::{resolve, validate, ValidatedModel};

#[derive(Parser)]
#[command(name = "rsgdsl", version, about = "Scene graph DSL toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model; report block compatibility.
    Check {
        /// Model source file.
        file: PathBuf,
    },
    /// Generate the setup program and function-block interface stubs.
    Gen {
        /// Model source file.
        file: PathBuf,
        /// Output directory; defaults to the input file's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Stub language.
        #[arg(long, default_value = "rust")]
        language: String,
    },
    /// Instantiate the world model and write snapshot and graph files.
    Run {
        /// Model source file.
        file: PathBuf,
        /// Output directory; defaults to the input file's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Function block to execute after setup; repeatable.
        #[arg(long)]
        exec: Vec<String>,
        /// Execution time in nanoseconds.
        #[arg(long, default_value_t = 0)]
        at: i64,
    },
    /// Render the instantiated world as Graphviz.
    Viz {
        /// Model source file.
        file: PathBuf,
        /// Write the graph here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { file } => check(&file),
        Command::Gen { file, out_dir, language } => gen(&file, out_dir.as_deref(), &language),
        Command::Run { file, out_dir, exec, at } => run(&file, out_dir.as_deref(), &exec, at),
        Command::Viz { file, output } => viz(&file, output.as_deref()),
    };
    ExitCode::from(code)
}

fn print_diagnostics(file: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}:{d}", file.display());
    }
}

/// Runs the front half of the pipeline and hands the validated model to
/// `then`. Returns the exit code.
fn with_validated(file: &Path, then: impl FnOnce(&ValidatedModel<'_>) -> u8) -> u8 {
    let text = match fs::read_to_string(file) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return 2;
        }
    };
    let model: SourceModel = match parse(&text) {
        Ok(model) => model,
        Err(diags) => {
            print_diagnostics(file, &diags);
            return 1;
        }
    };
    let symbols = match resolve(&model) {
        Ok(symbols) => symbols,
        Err(diags) => {
            print_diagnostics(file, &diags);
            return 1;
        }
    };
    match validate(&model, symbols) {
        Ok((vm, warnings)) => {
            print_diagnostics(file, &warnings);
            then(&vm)
        }
        Err(diags) => {
            print_diagnostics(file, &diags);
            1
        }
    }
}

fn check(file: &Path) -> u8 {
    with_validated(file, |vm| {
        println!(
            "ok: {} declarations, {} scene nodes, {} function blocks",
            vm.source.decls.len(),
            vm.scene_space.len(),
            vm.blocks.len()
        );
        let blocks: Vec<_> = vm.block_decls().collect();
        for producer in &blocks {
            for consumer in &blocks {
                match check_block_compatibility(producer, consumer, vm) {
                    Ok(c) if c.compatible => println!(
                        "compat {} -> {}: compatible",
                        producer.name.text, consumer.name.text
                    ),
                    Ok(c) => println!(
                        "compat {} -> {}: incompatible ({})",
                        producer.name.text, consumer.name.text, c.explanation
                    ),
                    Err(d) => {
                        eprintln!("{}:{d}", file.display());
                        return 1;
                    }
                }
            }
        }
        0
    })
}

fn write_output(path: &Path, contents: &str) -> Result<(), u8> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = fs::create_dir_all(parent) {
                eprintln!("error: cannot create {}: {e}", parent.display());
                return Err(2);
            }
        }
    }
    match fs::write(path, contents) {
        Ok(()) => {
            println!("wrote {}", path.display());
            Ok(())
        }
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", path.display());
            Err(2)
        }
    }
}

fn out_base(file: &Path, out_dir: Option<&Path>) -> PathBuf {
    match out_dir {
        Some(dir) => dir.to_path_buf(),
        None => file.parent().map(Path::to_path_buf).unwrap_or_default(),
    }
}

fn stem(file: &Path) -> String {
    file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into())
}

fn gen(file: &Path, out_dir: Option<&Path>, language: &str) -> u8 {
    let Some(backend) = backend_for(language) else {
        eprintln!("error: no stub backend for language `{language}`");
        return 2;
    };
    with_validated(file, |vm| {
        let program = match emit_setup_program(vm) {
            Ok(program) => program,
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        };
        let base = out_base(file, out_dir);
        if let Err(code) = write_output(
            &base.join(format!("{}.setup.json", stem(file))),
            &program.to_json_pretty(),
        ) {
            return code;
        }
        for decl in vm.block_decls() {
            let interface = match block_interface(decl, vm) {
                Ok(interface) => interface,
                Err(d) => {
                    eprintln!("{}:{d}", file.display());
                    return 1;
                }
            };
            let path = base.join("gen").join(backend.file_name(&interface.name));
            if let Err(code) = write_output(&path, &backend.render(&interface)) {
                return code;
            }
        }
        0
    })
}

fn run(file: &Path, out_dir: Option<&Path>, exec: &[String], at: i64) -> u8 {
    with_validated(file, |vm| {
        let mut wm = match instantiate(vm) {
            Ok(wm) => wm,
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        };
        for name in exec {
            let Some(decl) = vm.decl(name) else {
                eprintln!("error: unknown function block `{name}`");
                return 1;
            };
            let Some(body) = builtin_body(name) else {
                eprintln!("error: no built-in body registered for block `{name}`");
                return 1;
            };
            let instance = match FunctionBlockInstance::from_decl(decl, vm, body) {
                Ok(instance) => instance,
                Err(d) => {
                    eprintln!("{}:{d}", file.display());
                    return 1;
                }
            };
            match wm.execute_function_block(&instance, TimeStamp(at)) {
                Ok(report) => println!(
                    "executed {}: created {} nodes at hook {}",
                    report.block,
                    report.created.len(),
                    report.output_hook
                ),
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
        }
        let doc = wm.snapshot();
        let base = out_base(file, out_dir);
        let s = stem(file);
        if let Err(code) =
            write_output(&base.join(format!("{s}.snapshot.json")), &doc.to_json_pretty())
        {
            return code;
        }
        if let Err(code) = write_output(&base.join(format!("{s}.dot")), &to_dot(&doc)) {
            return code;
        }
        0
    })
}

fn viz(file: &Path, output: Option<&Path>) -> u8 {
    with_validated(file, |vm| {
        let wm = match instantiate(vm) {
            Ok(wm) => wm,
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        };
        let dot = to_dot(&wm.snapshot());
        match output {
            Some(path) => match write_output(path, &dot) {
                Ok(()) => 0,
                Err(code) => code,
            },
            None => {
                print!("{dot}");
                0
            }
        }
    })
}
