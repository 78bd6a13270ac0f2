//! Command-line front end: load programs, run a query, print answers.
//!
//! Exit status: 0 with at least one answer, 1 when the query has no
//! models, 2 on usage or load errors.

use std::io::Write;
use std::path::PathBuf;

use crate::ec::{find_scenario, scenarios, BundledResolver};
use crate::engine::{compile, solve, SolveError, SolveOpts};
use crate::render::{render_answer_json, render_answer_text, render_store_dump, RenderOpts};
use crate::syntax::{parse_program_with_includes, parse_query, rule_to_string, Program};

/// Everything one invocation needs.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub files: Vec<PathBuf>,
    pub example: Option<String>,
    pub query: Option<String>,
    /// 0 enumerates all answers.
    pub max_answers: usize,
    pub decimal: bool,
    pub json: bool,
    pub dump_dual: bool,
    pub dump_store: bool,
    pub depth: Option<u32>,
    pub run_nmr: bool,
}

const USAGE: &str = "\
usage: ecscasp [options] [FILE...]

options:
  --example NAME     load a bundled scenario instead of files
                     (light, light-constrained, watertap, watertap-abducible)
  -q, --query STR    query to evaluate, e.g. \"?- holdsAt(level(H),15/2).\"
  -s N               stop after N answers (0 = all, the default)
  -r                 print rationals in decimal notation (approximate)
  --json             emit answers as a JSON document
  --dump-dual        print the dual and consistency-check program
  --dump-store       print each answer's constraint store
  --depth N          bound the call depth; exceeding it reports unknown
  --no-nmr           skip the consistency check (debugging aid)
  -h, --help         this help
";

pub fn parse_args(args: &[String]) -> Result<RunConfig, String> {
    let mut config = RunConfig { run_nmr: true, ..RunConfig::default() };
    let mut i = 0;
    while i < args.len() {
        let arg = args[i].as_str();
        let take_value = |name: &str, i: &mut usize| -> Result<String, String> {
            *i += 1;
            args.get(*i).cloned().ok_or_else(|| format!("{name} expects a value"))
        };
        match arg {
            "-h" | "--help" => return Err(String::new()),
            "--example" => config.example = Some(take_value("--example", &mut i)?),
            "-q" | "--query" => config.query = Some(take_value("--query", &mut i)?),
            "-s" => {
                let v = take_value("-s", &mut i)?;
                config.max_answers =
                    v.parse().map_err(|_| format!("bad answer count `{v}`"))?;
            }
            "-r" => config.decimal = true,
            "--json" => config.json = true,
            "--dump-dual" => config.dump_dual = true,
            "--dump-store" => config.dump_store = true,
            "--depth" => {
                let v = take_value("--depth", &mut i)?;
                config.depth = Some(v.parse().map_err(|_| format!("bad depth `{v}`"))?);
            }
            "--no-nmr" => config.run_nmr = false,
            other if other.starts_with('-') => {
                return Err(format!("unknown flag `{other}`"));
            }
            file => config.files.push(PathBuf::from(file)),
        }
        i += 1;
    }
    if config.example.is_some() && !config.files.is_empty() {
        return Err("give either --example or program files, not both".into());
    }
    if config.query.is_some() && config.example.is_none() && config.files.is_empty() {
        return Err("a query needs a program: give FILEs or --example NAME".into());
    }
    if config.example.is_none() && config.files.is_empty() && !config.dump_dual {
        return Err("nothing to do: give FILEs or --example NAME".into());
    }
    Ok(config)
}

fn load_program(config: &RunConfig) -> Result<Program, String> {
    if let Some(name) = &config.example {
        let scenario = find_scenario(name).ok_or_else(|| {
            let known: Vec<&str> = scenarios().iter().map(|s| s.name).collect();
            format!("unknown example `{name}`; known: {}", known.join(", "))
        })?;
        return scenario.program().map_err(|e| format!("{name}: {e}"));
    }
    let mut program = Program::default();
    for path in &config.files {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        let resolver = BundledResolver;
        let base = path.clone();
        let unit = parse_with_base(&text, &resolver, &base)
            .map_err(|e| format!("{}:{e}", path.display()))?;
        program.merge(unit);
    }
    Ok(program)
}

fn parse_with_base(
    text: &str,
    resolver: &BundledResolver,
    base: &std::path::Path,
) -> Result<Program, crate::syntax::ParseError> {
    // Includes resolve relative to the including file; wrap the resolver
    // so the top-level file's directory is the starting point.
    struct Based<'a> {
        inner: &'a BundledResolver,
        base: PathBuf,
    }
    impl crate::syntax::FileResolver for Based<'_> {
        fn resolve(
            &self,
            name: &str,
            from: Option<&std::path::Path>,
        ) -> Result<(String, Option<PathBuf>), String> {
            self.inner.resolve(name, from.or(Some(self.base.as_path())))
        }
    }
    parse_program_with_includes(text, &Based { inner: resolver, base: base.to_path_buf() })
}

/// Run a full invocation, writing to the given streams.  Returns the
/// process exit code.
pub fn run_to(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let config = match parse_args(args) {
        Ok(c) => c,
        Err(msg) if msg.is_empty() => {
            let _ = out.write_all(USAGE.as_bytes());
            return 0;
        }
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            let _ = err.write_all(USAGE.as_bytes());
            return 2;
        }
    };

    let program = match load_program(&config) {
        Ok(p) => p,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
    };
    let compiled = match compile(&program) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };

    if config.dump_dual {
        let _ = writeln!(out, "% dual program");
        for rule in &compiled.dual_rules {
            let _ = writeln!(out, "{}", rule_to_string(rule));
        }
        let _ = writeln!(out, "% consistency checks");
        for rule in &compiled.nmr.check_rules {
            let _ = writeln!(out, "{}", rule_to_string(rule));
        }
        let _ = writeln!(out, "{}", rule_to_string(&compiled.nmr.entry_rule));
    }

    let Some(query_text) = &config.query else {
        return 0;
    };
    let query = match parse_query(query_text) {
        Ok(q) => q,
        Err(e) => {
            let _ = writeln!(err, "error: query: {e}");
            return 2;
        }
    };

    let opts = SolveOpts {
        max_answers: config.max_answers,
        depth: config.depth,
        run_nmr: config.run_nmr,
        ..SolveOpts::default()
    };
    let render = RenderOpts { decimal: config.decimal };

    let mut count = 0usize;
    let mut json_answers = Vec::new();
    let mut failure: Option<SolveError> = None;
    for item in solve(&compiled, &query, &opts) {
        match item {
            Ok(answer) => {
                count += 1;
                if config.json {
                    json_answers.push(render_answer_json(&answer, &compiled, render));
                } else {
                    let _ = writeln!(out, "% answer {count}");
                    let _ = writeln!(out, "{}", render_answer_text(&answer, &compiled, render));
                    if config.dump_store {
                        for line in render_store_dump(&answer) {
                            let _ = writeln!(out, "% store: {line}");
                        }
                    }
                    let _ = writeln!(out);
                }
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    if config.json {
        let doc = serde_json::json!({
            "query": query_text,
            "answers": json_answers,
            "complete": failure.is_none(),
        });
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("valid json"));
    }

    match failure {
        Some(SolveError::DepthLimit) => {
            let _ = writeln!(err, "% depth limit exceeded: result unknown");
        }
        Some(SolveError::ForallBudget) => {
            let _ = writeln!(err, "error: forall region budget exceeded");
            return 2;
        }
        None => {}
    }
    if count > 0 {
        0
    } else {
        let _ = writeln!(err, "no models");
        1
    }
}

pub fn run(args: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_to(args, &mut stdout.lock(), &mut stderr.lock())
}
