//! `corelucid`: split, parse, translate, check and evaluate hybrid
//! intensional programs.

use std::io::{self, BufRead, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use corelucid::context::{parse_context_literal, SimpleContext};
use corelucid::eval::{Eagerness, EvalStats, Evaluator, EvaluatorConfig, Program};
use corelucid::hybrid::{
    compile, compile_bare, has_markers, HybridError, HybridProgram, ProviderRegistry, RunError,
    TagKind, TagRegistry,
};
use corelucid::syntax::{parse, translate_to_core, Dialect, Expression};
use corelucid::types::{CoreValue, TypeMappingTable};

mod tree;

#[derive(Parser)]
#[command(
    name = "corelucid",
    version,
    about = "Evaluate context-aware intensional programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every intensional segment at a context
    Run(FileArgs),
    /// Print the syntax tree of every intensional segment
    Parse(FileArgs),
    /// Print every intensional segment translated to the core dialect
    Translate(FileArgs),
    /// List the segments of a hybrid file with their line ranges
    Segments(FileArgs),
    /// Print the declaration dictionary and check calls against it
    Check(FileArgs),
    /// Evaluate one expression per input line
    Repl(Options),
}

#[derive(Args)]
struct FileArgs {
    /// Source file, or `-` for standard input
    input: PathBuf,
    #[command(flatten)]
    opts: Options,
}

#[derive(Clone, Copy, ValueEnum)]
enum EagerMode {
    Context,
    Dimension,
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Core,
    Indexical,
}

#[derive(Args)]
struct Options {
    /// Context to evaluate at, e.g. `{t:7}`
    #[arg(long, value_name = "LITERAL", default_value = "{}")]
    context: String,
    /// Print evaluation events to standard error
    #[arg(long)]
    trace: bool,
    /// Print warehouse counters to standard error
    #[arg(long)]
    warehouse_stats: bool,
    /// Evaluate without the warehouse
    #[arg(long)]
    no_warehouse: bool,
    #[arg(long, value_enum, default_value = "context")]
    eager_mode: EagerMode,
    /// Dialect of files without segment markers (and of repl lines)
    #[arg(long, value_enum)]
    dialect: Option<DialectArg>,
    #[arg(long, default_value_t = 10_000)]
    max_depth: usize,
    /// Structured output on standard output
    #[arg(long)]
    json: bool,
    /// Provider manifest; defaults to $CORELUCID_PROVIDERS
    #[arg(long, value_name = "PATH")]
    providers: Option<PathBuf>,
    /// Extra type mapping rows (tab separated)
    #[arg(long, value_name = "PATH")]
    type_table: Option<PathBuf>,
    /// Extra segment tag, `NAME` or `NAME=imperative|intensional|core`
    #[arg(long, value_name = "TAG")]
    tag: Vec<String>,
}

/// Exit codes: program errors are 1, usage errors 2.
enum Failure {
    Program(String),
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn program(msg: impl Into<String>) -> Failure {
    Failure::Program(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(&a),
        Command::Parse(a) => parse_cmd(&a),
        Command::Translate(a) => translate_cmd(&a),
        Command::Segments(a) => segments_cmd(&a),
        Command::Check(a) => check_cmd(&a),
        Command::Repl(o) => repl(&o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Program(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("corelucid: {msg}");
            ExitCode::from(2)
        }
    }
}

impl Options {
    fn context(&self) -> Result<SimpleContext, Failure> {
        let lit =
            parse_context_literal(&self.context).map_err(|e| usage(format!("--context: {e}")))?;
        lit.into_point()
            .ok_or_else(|| usage("--context must be a simple context such as {t:1}"))
    }

    fn config(&self) -> EvaluatorConfig {
        EvaluatorConfig {
            eagerness: match self.eager_mode {
                EagerMode::Context => Eagerness::ContextEager,
                EagerMode::Dimension => Eagerness::DimensionEager,
            },
            max_depth: self.max_depth,
            trace_enabled: self.trace,
            use_warehouse: !self.no_warehouse,
        }
    }

    fn tags(&self) -> Result<TagRegistry, Failure> {
        let mut r = TagRegistry::standard();
        for t in &self.tag {
            let (name, kind) = t.split_once('=').unwrap_or((t, "imperative"));
            let kind = match kind {
                "imperative" => TagKind::Imperative,
                "intensional" | "indexical" => TagKind::Intensional(Dialect::Surface),
                "core" => TagKind::Intensional(Dialect::Core),
                other => return Err(usage(format!("--tag {t}: unknown kind `{other}`"))),
            };
            let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && name.chars().all(|c| c.is_ascii_alphanumeric());
            if !valid {
                return Err(usage(format!(
                    "--tag {t}: a tag is a letter followed by letters and digits"
                )));
            }
            r.register(name, kind);
        }
        Ok(r)
    }

    fn table(&self) -> Result<TypeMappingTable, Failure> {
        let mut table = TypeMappingTable::standard();
        if let Some(path) = &self.type_table {
            let src = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            table
                .extend_from_tsv(&src)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        }
        Ok(table)
    }

    fn providers(&self) -> Result<ProviderRegistry, Failure> {
        let path = self
            .providers
            .clone()
            .or_else(|| std::env::var_os("CORELUCID_PROVIDERS").map(PathBuf::from));
        match path {
            Some(p) => ProviderRegistry::load_manifest(&p)
                .map_err(|e| usage(format!("{}: {e}", p.display()))),
            None => Ok(ProviderRegistry::new()),
        }
    }

    fn dialect(&self, default: Dialect) -> Dialect {
        match self.dialect {
            Some(DialectArg::Core) => Dialect::Core,
            Some(DialectArg::Indexical) => Dialect::Surface,
            None => default,
        }
    }
}

struct Source {
    name: String,
    text: String,
}

fn read_source(path: &PathBuf) -> Result<Source, Failure> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| usage(format!("standard input: {e}")))?;
        return Ok(Source {
            name: "<stdin>".into(),
            text,
        });
    }
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(Source { name, text })
}

fn describe(file: &str, e: &HybridError) -> String {
    match e {
        HybridError::Syntax { tag, error } => format!("{file}:{error} (in #{tag})"),
        other => format!("{file}: {other}"),
    }
}

/// Compiles the input. A file without markers is one segment in the
/// dialect chosen by `--dialect`.
fn load(a: &FileArgs) -> Result<(Source, HybridProgram), Failure> {
    let src = read_source(&a.input)?;
    let tags = a.opts.tags()?;
    let table = a.opts.table()?;
    let compiled = if has_markers(&src.text, &tags) {
        compile(&src.text, &tags, &table)
    } else {
        match a.opts.dialect(Dialect::Surface) {
            Dialect::Core => compile_bare(&src.text, "GIPL", Dialect::Core),
            Dialect::Surface => compile_bare(&src.text, "INDEXICALLUCID", Dialect::Surface),
        }
    };
    let p = compiled.map_err(|e| program(describe(&src.name, &e)))?;
    Ok((src, p))
}

fn print_stats(opts: &Options, ev: &Evaluator) {
    let trace = ev.trace();
    if opts.trace {
        if opts.json {
            eprintln!("{}", serde_json::to_string(trace).unwrap_or_default());
        } else {
            for e in trace {
                eprintln!("{e}");
            }
        }
    }
    if opts.warehouse_stats {
        let w = ev.warehouse().stats();
        let s: &EvalStats = ev.stats();
        if opts.json {
            eprintln!("{}", json!({"warehouse": w, "evaluation": s}));
        } else {
            eprintln!(
                "warehouse: demands {} hits {} misses {} entries {}",
                w.demands, w.hits, w.misses, w.entries
            );
            eprintln!(
                "events {} stores {} max depth {}",
                s.events, s.stores, s.max_depth
            );
        }
    }
}

fn value_line(v: &CoreValue) -> String {
    match v.as_special() {
        Some(s) => match &s.origin {
            Some(at) => format!("{v} at {at}"),
            None => v.to_string(),
        },
        None => v.to_string(),
    }
}

fn run(a: &FileArgs) -> Outcome {
    let ctx = a.opts.context()?;
    let providers = a.opts.providers()?;
    let (src, p) = load(a)?;
    let mut ev = Evaluator::new(a.opts.config());
    let result = p.evaluate(&mut ev, &providers, &ctx, Some(&src.name));
    print_stats(&a.opts, &ev);
    let values = result.map_err(|e| match e {
        RunError::Bind(e) => program(format!("{}: {e}", src.name)),
        RunError::Eval(e) => program(format!("error: {e}")),
    })?;
    if a.opts.json {
        let results: Vec<Value> = p
            .units
            .iter()
            .zip(&values)
            .map(|(u, v)| {
                json!({
                    "tag": u.tag,
                    "line": u.start_line,
                    "value": v.to_string(),
                    "type": v.core_type().to_string(),
                    "special": v.is_special(),
                })
            })
            .collect();
        println!(
            "{}",
            json!({ "file": src.name, "context": ctx, "results": results })
        );
    } else {
        for v in &values {
            println!("{}", value_line(v));
        }
    }
    if values.iter().any(CoreValue::is_special) {
        return Err(program(""));
    }
    Ok(())
}

fn parse_cmd(a: &FileArgs) -> Outcome {
    let (src, p) = load(a)?;
    if a.opts.json {
        let units: Vec<Value> = p
            .units
            .iter()
            .map(|u| json!({"tag": u.tag, "line": u.start_line, "tree": tree::to_json(&u.source)}))
            .collect();
        println!("{}", json!({ "file": src.name, "units": units }));
        return Ok(());
    }
    for u in &p.units {
        if p.units.len() > 1 {
            println!("#{} (line {})", u.tag, u.start_line);
        }
        print!("{}", tree::render(&u.source));
    }
    Ok(())
}

fn translate_cmd(a: &FileArgs) -> Outcome {
    let (src, p) = load(a)?;
    if a.opts.json {
        let units: Vec<Value> = p
            .units
            .iter()
            .map(|u| json!({"tag": u.tag, "line": u.start_line, "core": u.core.to_string()}))
            .collect();
        println!("{}", json!({ "file": src.name, "units": units }));
        return Ok(());
    }
    for u in &p.units {
        if p.units.len() > 1 {
            println!("#{}", u.tag);
        }
        println!("{}", u.core);
    }
    Ok(())
}

fn segments_cmd(a: &FileArgs) -> Outcome {
    let (src, p) = load(a)?;
    if a.opts.json {
        let segs: Vec<Value> = p
            .segments
            .segments
            .iter()
            .map(|s| {
                json!({
                    "tag": s.tag,
                    "markerLine": s.marker_line,
                    "startLine": s.start_line,
                    "endLine": s.end_line,
                })
            })
            .collect();
        println!("{}", json!({ "file": src.name, "segments": segs }));
        return Ok(());
    }
    for s in &p.segments.segments {
        println!("{s}");
    }
    Ok(())
}

fn check_cmd(a: &FileArgs) -> Outcome {
    let (src, p) = load(a)?;
    let d = &p.dictionary;
    let diagnostics: Vec<String> = p
        .diagnostics()
        .map(|e| format!("{}:{e}", src.name))
        .collect();
    if a.opts.json {
        let protos: Vec<Value> = d
            .prototypes
            .values()
            .map(|f| {
                json!({
                    "name": f.name,
                    "returnType": f.return_type.to_string(),
                    "paramTypes": f.param_types.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    "sourceUrl": f.source_url,
                    "alias": f.alias,
                    "languageTag": f.language_tag,
                    "line": f.line,
                })
            })
            .collect();
        let calls: Vec<Value> = p
            .units
            .iter()
            .flat_map(|u| &u.calls.annotations)
            .map(|c| {
                json!({
                    "line": c.loc.line,
                    "column": c.loc.column,
                    "name": c.name,
                    "callee": c.callee,
                    "returnType": c.return_type.to_string(),
                })
            })
            .collect();
        println!(
            "{}",
            json!({
                "file": src.name,
                "userTypes": d.user_types,
                "prototypes": protos,
                "aliases": d.aliases,
                "calls": calls,
                "diagnostics": diagnostics,
            })
        );
    } else {
        for t in &d.user_types {
            println!("type {t}");
        }
        for f in d.prototypes.values() {
            println!("function {f}");
        }
        for u in &p.units {
            for c in &u.calls.annotations {
                println!("call {c}");
            }
        }
        for e in &diagnostics {
            eprintln!("{e}");
        }
    }
    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(program(format!("{} call error(s)", diagnostics.len())))
    }
}

fn repl(opts: &Options) -> Outcome {
    let ctx = opts.context()?;
    let dialect = opts.dialect(Dialect::Core);
    let mut ev = Evaluator::new(opts.config());
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    for (i, line) in stdin.lock().lines().enumerate() {
        let line = line.map_err(|e| usage(format!("standard input: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match parse(&line, dialect, i as u32 + 1) {
            Ok(e) => eval_line(&mut ev, e, &ctx),
            Err(e) => format!("error: {e}"),
        };
        writeln!(out, "{reply}").map_err(|e| usage(format!("standard output: {e}")))?;
    }
    print_stats(opts, &ev);
    Ok(())
}

fn eval_line(ev: &mut Evaluator, e: Expression, ctx: &SimpleContext) -> String {
    let program = Program::new(translate_to_core(&e)).with_file("<repl>");
    match ev.evaluate(&program, ctx) {
        Ok(v) => value_line(&v),
        Err(e) => format!("error: {e}"),
    }
}
