//! `agtool`: gentle-algebra derived invariants from bound quivers and
//! `(m+2)`-angulations of marked surfaces.
//!
//! Every subcommand reads one file (`-` for stdin) and writes deterministic
//! text. Exit codes: 0 success, 1 verification mismatch or fuzz failure,
//! 2 documented formula/walk divergence, 64 usage, 65 malformed or invalid
//! input.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write as _};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ag_core::bridge::{ag_invariant_formula, naive_per_component, remove_boundary_bridges};
use ag_core::build::{build_quiver, build_quiver_partial, inflate, validate_partial};
use ag_core::quiver::{parse_quiver, serialize_quiver, validate_gentle, validate_string};
use ag_core::surface::{parse_angulation, random_disc_angulation, serialize_angulation};
use ag_core::threads::enumerate_threads;
use ag_core::verify::{run_fuzz, verify_angulation, FuzzOptions, Verdict};
use ag_core::walk::{ag_walk, ThreadContext};
use ag_core::{Angulation, BoundQuiver};

#[derive(Parser)]
#[command(
    name = "agtool",
    version,
    about = "Derived invariants of gentle algebras, from quivers and from surface angulations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a quiver or angulation file and print a summary.
    Check { file: String },
    /// List the permitted and forbidden threads of a string quiver.
    Threads { file: String },
    /// Compute the derived invariant of a gentle quiver by the
    /// thread-pairing walk.
    Ag {
        file: String,
        /// Also print every tour as permitted/forbidden thread pairs.
        #[arg(long)]
        trace: bool,
    },
    /// Build the gentle quiver of an angulation or partial triangulation.
    Build { file: String },
    /// Compute the invariant from the surface by the closed formula
    /// (boundary bridges are removed first).
    Formula {
        file: String,
        /// Skip bridging: apply the per-component formula as-is. Wrong on
        /// degenerate angulations; kept as a diagnostic.
        #[arg(long)]
        naive: bool,
    },
    /// Remove boundary bridges and print the resulting angulation.
    Bridge { file: String },
    /// Compute the invariant both ways and compare.
    Verify {
        file: String,
        /// Exit 0 instead of 2 on the known isolated-arc divergence.
        #[arg(long)]
        allow_isolated: bool,
    },
    /// Grow a partial triangulation into an (m+2)-angulation with the
    /// same quiver.
    Inflate {
        file: String,
        #[arg(long)]
        m: usize,
    },
    /// Generate a seeded random disc angulation.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        arcs: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Export a quiver (digraph) or angulation (graph) as DOT text.
    Dot { file: String },
    /// Generate many random instances and cross-check every computation.
    Fuzz {
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Inverse-bridge mutations to test on top of the instances.
        #[arg(long, default_value_t = 100)]
        merges: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Comma-separated face sizes to draw from (m values).
        #[arg(long, default_value = "1,2,3,4")]
        ms: String,
        #[arg(long, default_value_t = 12)]
        max_arcs: usize,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure {
        code,
        msg: msg.into(),
    }
}

/// Collected stdout text plus the exit code to finish with.
struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(64)
                }
            };
        }
    };
    match run(cli.cmd) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            match stdout
                .write_all(out.text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Ok(()) => ExitCode::from(out.code),
                // A closed pipe (e.g. `agtool dot f | head`) is not an error.
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::from(out.code),
                Err(e) => {
                    eprintln!("stdout: {e}");
                    ExitCode::from(65)
                }
            }
        }
        Err(f) => {
            eprintln!("{}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| fail(65, format!("stdin: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| fail(65, format!("{path}: {e}")))
    }
}

/// The first directive decides the format: `quiver` or `angulation ...`.
fn sniff(text: &str) -> Option<&str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
}

fn load_quiver(path: &str) -> Result<BoundQuiver, Failure> {
    let text = load(path)?;
    parse_quiver(&text).map_err(|e| fail(65, format!("{path}: {e}")))
}

fn load_surface(path: &str) -> Result<Angulation, Failure> {
    let text = load(path)?;
    parse_angulation(&text).map_err(|e| fail(65, format!("{path}: {e}")))
}

enum Input {
    Quiver(BoundQuiver),
    Surface(Angulation),
}

fn load_any(path: &str) -> Result<Input, Failure> {
    let text = load(path)?;
    match sniff(&text) {
        Some("quiver") => Ok(Input::Quiver(
            parse_quiver(&text).map_err(|e| fail(65, format!("{path}: {e}")))?,
        )),
        Some("angulation") => Ok(Input::Surface(
            parse_angulation(&text).map_err(|e| fail(65, format!("{path}: {e}")))?,
        )),
        _ => Err(fail(
            65,
            format!("{path}: expected a \"quiver\" or \"angulation\" header"),
        )),
    }
}

fn gentle_or_fail(bq: &BoundQuiver) -> Result<(), Failure> {
    let violations = validate_gentle(bq);
    if violations.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = violations
        .iter()
        .map(|v| format!("violation {}", v.describe(bq)))
        .collect();
    Err(fail(65, lines.join("\n")))
}

fn run(cmd: Cmd) -> Result<Output, Failure> {
    match cmd {
        Cmd::Check { file } => check(&file),
        Cmd::Threads { file } => threads(&file),
        Cmd::Ag { file, trace } => ag(&file, trace),
        Cmd::Build { file } => build(&file),
        Cmd::Formula { file, naive } => formula(&file, naive),
        Cmd::Bridge { file } => bridge(&file),
        Cmd::Verify {
            file,
            allow_isolated,
        } => verify(&file, allow_isolated),
        Cmd::Inflate { file, m } => inflate_cmd(&file, m),
        Cmd::Gen { m, arcs, seed } => gen(m, arcs, seed),
        Cmd::Dot { file } => dot(&file),
        Cmd::Fuzz {
            count,
            merges,
            seed,
            ms,
            max_arcs,
        } => fuzz(count, merges, seed, &ms, max_arcs),
    }
}

fn check(path: &str) -> Result<Output, Failure> {
    let mut out = String::new();
    match load_any(path)? {
        Input::Quiver(bq) => {
            let _ = writeln!(
                out,
                "quiver: {} vertices, {} arrows, {} relations",
                bq.vertex_count(),
                bq.arrow_count(),
                bq.relation_count()
            );
            let violations = validate_gentle(&bq);
            if violations.is_empty() {
                out.push_str("gentle\n");
                return Ok(Output::ok(out));
            }
            for v in &violations {
                let _ = writeln!(out, "violation {}", v.describe(&bq));
            }
            if validate_string(&bq).is_empty() {
                out.push_str("string, but not gentle\n");
            }
            print_and_fail(out, 65, format!("{path}: {} axiom violations", violations.len()))
        }
        Input::Surface(a) => {
            let _ = writeln!(
                out,
                "angulation{}: m={}, {} points, {} boundary components, {} arcs, {} faces",
                if a.is_partial() { " (partial)" } else { "" },
                a.m(),
                a.point_count(),
                a.components().len(),
                a.arcs().len(),
                a.faces().len()
            );
            for w in a.warnings() {
                let _ = writeln!(out, "note: {w}");
            }
            if a.is_partial() {
                let violations = validate_partial(&a);
                if !violations.is_empty() {
                    for v in &violations {
                        let _ = writeln!(out, "violation: {v}");
                    }
                    return print_and_fail(
                        out,
                        65,
                        format!("{path}: not a usable partial triangulation"),
                    );
                }
                out.push_str("partial triangulation, inflatable\n");
            } else if a.is_degenerate() {
                let names: Vec<&str> = a
                    .degenerate_faces()
                    .into_iter()
                    .map(|f| a.faces()[f].id.as_str())
                    .collect();
                let _ = writeln!(
                    out,
                    "degenerate: faces {} meet several boundary runs",
                    names.join(", ")
                );
            } else {
                out.push_str("non-degenerate\n");
            }
            Ok(Output::ok(out))
        }
    }
}

/// Flush partial findings to stdout before failing; keeps `check` output
/// visible even though the command exits nonzero.
fn print_and_fail(text: String, code: u8, msg: String) -> Result<Output, Failure> {
    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
    let _ = stdout.flush();
    Err(fail(code, msg))
}

fn threads(path: &str) -> Result<Output, Failure> {
    let bq = load_quiver(path)?;
    let violations = validate_string(&bq);
    if !violations.is_empty() {
        let lines: Vec<String> = violations
            .iter()
            .map(|v| format!("violation {}", v.describe(&bq)))
            .collect();
        return Err(fail(65, lines.join("\n")));
    }
    let system = enumerate_threads(&bq).map_err(|e| fail(65, format!("{path}: {e}")))?;
    let mut out = String::new();
    for t in &system.permitted {
        let _ = writeln!(out, "permitted {}", t.label(&bq));
    }
    for t in system.pairable_forbidden() {
        let _ = writeln!(out, "forbidden {}", t.label(&bq));
    }
    for c in &system.cycles {
        let ids: Vec<&str> = c.iter().map(|&ar| bq.arrow(ar).id.as_str()).collect();
        let _ = writeln!(out, "cycle {}", ids.join(" "));
    }
    Ok(Output::ok(out))
}

fn ag(path: &str, trace: bool) -> Result<Output, Failure> {
    let bq = load_quiver(path)?;
    gentle_or_fail(&bq)?;
    let ctx = ThreadContext::new(&bq).map_err(|e| fail(65, format!("{path}: {e}")))?;
    let walk = ag_walk(&ctx).map_err(|e| fail(65, format!("{path}: {e}")))?;
    let mut out = String::new();
    if trace {
        for (i, tour) in walk.tours.iter().enumerate() {
            let _ = writeln!(out, "tour {} pair ({}, {})", i + 1, tour.pair.0, tour.pair.1);
            for step in &tour.steps {
                let _ = writeln!(
                    out,
                    "  {} | {}",
                    step.permitted.label(&bq),
                    step.forbidden.label(&bq)
                );
            }
        }
        for &(n, m) in &walk.cycle_pairs {
            let _ = writeln!(out, "cycle pair ({n}, {m})");
        }
        out.push_str("invariant:\n");
    }
    let _ = write!(out, "{}", walk.invariant());
    Ok(Output::ok(out))
}

fn build(path: &str) -> Result<Output, Failure> {
    let a = load_surface(path)?;
    let bq = if a.is_partial() {
        build_quiver_partial(&a).map_err(|violations| {
            let lines: Vec<String> = violations.iter().map(|v| format!("{v}")).collect();
            fail(65, lines.join("\n"))
        })?
    } else {
        build_quiver(&a)
    };
    Ok(Output::ok(serialize_quiver(&bq)))
}

fn formula(path: &str, naive: bool) -> Result<Output, Failure> {
    let a = load_surface(path)?;
    let value = if naive {
        naive_per_component(&a)
    } else {
        ag_invariant_formula(&a)
    }
    .map_err(|e| fail(65, format!("{path}: {e}")))?;
    Ok(Output::ok(format!("{value}")))
}

fn bridge(path: &str) -> Result<Output, Failure> {
    let a = load_surface(path)?;
    let tilde = remove_boundary_bridges(&a).map_err(|e| fail(65, format!("{path}: {e}")))?;
    Ok(Output::ok(serialize_angulation(&tilde)))
}

fn verify(path: &str, allow_isolated: bool) -> Result<Output, Failure> {
    let a = load_surface(path)?;
    let outcome = verify_angulation(&a).map_err(|e| fail(65, format!("{path}: {e}")))?;
    let mut out = String::new();
    out.push_str("formula:\n");
    let _ = write!(out, "{}", outcome.formula);
    out.push_str("direct:\n");
    let _ = write!(out, "{}", outcome.direct);
    let _ = writeln!(out, "isolated-arcs {}", outcome.isolated);
    let code = match outcome.verdict {
        Verdict::Match => {
            out.push_str("verdict match\n");
            0
        }
        Verdict::DocumentedDivergence => {
            out.push_str("verdict documented-divergence\n");
            if allow_isolated {
                0
            } else {
                2
            }
        }
        Verdict::Mismatch => {
            out.push_str("verdict mismatch\n");
            1
        }
    };
    Ok(Output { text: out, code })
}

fn inflate_cmd(path: &str, m: usize) -> Result<Output, Failure> {
    let a = load_surface(path)?;
    let full = inflate(&a, m).map_err(|e| fail(65, format!("{path}: {e}")))?;
    Ok(Output::ok(serialize_angulation(&full)))
}

fn gen(m: usize, arcs: usize, seed: u64) -> Result<Output, Failure> {
    let a = random_disc_angulation(m, arcs, seed).map_err(|e| fail(65, format!("{e}")))?;
    Ok(Output::ok(serialize_angulation(&a)))
}

fn dot(path: &str) -> Result<Output, Failure> {
    let mut out = String::new();
    match load_any(path)? {
        Input::Quiver(bq) => {
            out.push_str("digraph quiver {\n  rankdir=LR;\n");
            for v in bq.vertex_names() {
                let _ = writeln!(out, "  \"{v}\";");
            }
            for ar in bq.arrows() {
                let _ = writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [label=\"{}\"];",
                    bq.vertex_name(ar.source),
                    bq.vertex_name(ar.target),
                    ar.id
                );
            }
            for (first, second) in bq.relations() {
                let _ = writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [style=dashed, constraint=false, label=\"{} {}\"];",
                    bq.vertex_name(bq.arrow(first).source),
                    bq.vertex_name(bq.arrow(second).target),
                    bq.arrow(first).id,
                    bq.arrow(second).id
                );
            }
            out.push_str("}\n");
        }
        Input::Surface(a) => {
            out.push_str("graph angulation {\n  layout=circo;\n");
            for p in a.point_names() {
                let _ = writeln!(out, "  \"{p}\";");
            }
            for c in a.components() {
                let size = c.points.len();
                if size == 1 {
                    continue;
                }
                for (i, &p) in c.points.iter().enumerate() {
                    let q = c.points[(i + 1) % size];
                    let _ = writeln!(
                        out,
                        "  \"{}\" -- \"{}\" [style=bold];",
                        a.point_name(p),
                        a.point_name(q)
                    );
                }
            }
            for arc in a.arcs() {
                let _ = writeln!(
                    out,
                    "  \"{}\" -- \"{}\" [label=\"{}\"];",
                    a.point_name(arc.ends.0),
                    a.point_name(arc.ends.1),
                    arc.id
                );
            }
            out.push_str("}\n");
        }
    }
    Ok(Output::ok(out))
}

fn fuzz(
    count: usize,
    merges: usize,
    seed: u64,
    ms: &str,
    max_arcs: usize,
) -> Result<Output, Failure> {
    let ms: Vec<usize> = ms
        .split(',')
        .map(|part| part.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| fail(64, "--ms expects a comma-separated list of integers"))?;
    if ms.iter().any(|&m| m == 0) {
        return Err(fail(64, "--ms values must be at least 1"));
    }
    let report = run_fuzz(&FuzzOptions {
        count,
        merge_count: merges,
        seed,
        ms,
        max_arcs,
    });
    Ok(Output {
        text: format!("{report}\n"),
        code: if report.ok() { 0 } else { 1 },
    })
}
