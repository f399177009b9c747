//! The `probint` command line.

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use probint_core::global::{GlobalEngine, Verdict};
use probint_core::graph::{dot_graph, dot_join_tree, dot_triangulated};
use probint_core::jointree::{build_local_systems, build_marginal_joint_system, calibrate, check_consistency_wrt_g, GraphConsistency};
use probint_core::model::{localize, parse_model, PartialSpecification};
use probint_core::{Bounds, Error, EventExpr};
use probint_service::SessionStore;

#[derive(Debug, Parser)]
#[command(name = "probint")]
#[command(about = "Probability intervals from partial specifications over an undirected I-map")]
#[command(version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report local and global consistency of a model
    Check {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = CheckMode::Jointree)]
        mode: CheckMode,
    },
    /// Bounds on Pr(query) or Pr(query | given)
    Interval {
        model: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long)]
        given: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Jointree)]
        mode: Mode,
    },
    /// Print the I-map, its triangulation or its join tree as DOT
    Graph {
        model: PathBuf,
        #[arg(long, value_enum, num_args = 0..=1, default_value_t = DotKind::Input, default_missing_value = "input")]
        dot: DotKind,
    },
    /// Run the HTTP service
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory for session snapshots; sessions found there are reloaded
        #[arg(long)]
        state_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckMode {
    Jointree,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Jointree,
    Global,
    DirectJoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DotKind {
    Input,
    Triangulated,
    Jointree,
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_INCONSISTENT: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_LOCALITY: u8 = 3;
pub const EXIT_SIZE_CAP: u8 = 4;

pub fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Inconsistent => EXIT_INCONSISTENT,
        Error::Locality { .. } => EXIT_LOCALITY,
        Error::SizeCap { .. } => EXIT_SIZE_CAP,
        _ => EXIT_INVALID,
    }
}

fn load(path: &Path) -> Result<PartialSpecification, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

fn parse_event(text: &str) -> Result<EventExpr, Error> {
    text.parse()
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "CONSISTENT"
    } else {
        "INCONSISTENT"
    }
}

fn check(spec: &PartialSpecification, mode: CheckMode, out: &mut dyn Write) -> Result<u8, Error> {
    let consistent = match mode {
        CheckMode::Global => {
            let ok = GlobalEngine::default().check_consistency(spec)? == Verdict::Consistent;
            writeln!(out, "GLOBAL {}", verdict(ok)).ok();
            ok
        }
        CheckMode::Jointree => {
            let tree = spec.structure()?.tree;
            let nodes = build_local_systems(&localize(spec, &tree)?)?;
            match check_consistency_wrt_g(&nodes, &tree) {
                GraphConsistency::LocallyInconsistent { cliques } => {
                    let names: Vec<String> = cliques.iter().map(|&c| nodes[c].scope.to_string()).collect();
                    writeln!(out, "LOCAL INCONSISTENT {}", names.join(" ")).ok();
                    writeln!(out, "GLOBAL INCONSISTENT").ok();
                    false
                }
                GraphConsistency::GloballyInconsistent => {
                    writeln!(out, "LOCAL CONSISTENT").ok();
                    writeln!(out, "GLOBAL INCONSISTENT").ok();
                    false
                }
                GraphConsistency::Consistent => {
                    writeln!(out, "LOCAL CONSISTENT").ok();
                    writeln!(out, "GLOBAL CONSISTENT").ok();
                    true
                }
            }
        }
    };
    writeln!(out, "{}", verdict(consistent)).ok();
    Ok(if consistent { EXIT_OK } else { EXIT_INCONSISTENT })
}

pub fn interval(
    spec: &PartialSpecification,
    query: &EventExpr,
    given: Option<&EventExpr>,
    mode: Mode,
) -> Result<Bounds, Error> {
    spec.check_declared(query)?;
    if let Some(g) = given {
        spec.check_declared(g)?;
    }
    match mode {
        Mode::Global => GlobalEngine::default().interval(spec, query, given),
        Mode::Jointree | Mode::DirectJoint => {
            let tree = spec.structure()?.tree;
            let nodes = build_local_systems(&localize(spec, &tree)?)?;
            if mode == Mode::DirectJoint {
                let joint = build_marginal_joint_system(&nodes, &tree);
                return Ok(joint.interval(&tree, query, given)?.1);
            }
            Ok(calibrate(nodes, &tree, 0).local_interval(query, given)?.bounds)
        }
    }
}

fn graph(spec: &PartialSpecification, kind: DotKind, out: &mut dyn Write) -> Result<u8, Error> {
    let text = match kind {
        DotKind::Input => dot_graph(&spec.imap),
        DotKind::Triangulated => dot_triangulated(&spec.structure()?.triangulation),
        DotKind::Jointree => dot_join_tree(&spec.structure()?.tree),
    };
    write!(out, "{text}").ok();
    Ok(EXIT_OK)
}

fn serve(addr: SocketAddr, state_dir: Option<PathBuf>, err: &mut dyn Write) -> u8 {
    let store = match state_dir {
        Some(dir) => match SessionStore::open(&dir) {
            Ok(s) => s,
            Err(e) => {
                writeln!(err, "error: cannot open state directory {}: {e}", dir.display()).ok();
                return EXIT_INVALID;
            }
        },
        None => SessionStore::in_memory(),
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            return EXIT_INVALID;
        }
    };
    let served = runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        writeln!(err, "listening on http://{}", listener.local_addr()?).ok();
        err.flush().ok();
        probint_service::serve(listener, store).await
    });
    match served {
        Ok(()) => EXIT_OK,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            EXIT_INVALID
        }
    }
}

/// Runs one command, writing results to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Check { model, mode } => load(&model).and_then(|spec| check(&spec, mode, out)),
        Command::Interval {
            model,
            query,
            given,
            mode,
        } => (|| {
            let spec = load(&model)?;
            let query = parse_event(&query)?;
            let given = given.as_deref().map(parse_event).transpose()?;
            let b = interval(&spec, &query, given.as_ref(), mode)?;
            writeln!(out, "{}", b.interval.render()).ok();
            if b.condition_may_vanish {
                writeln!(
                    err,
                    "note: the condition can have probability 0; bounds range over extensions where it is positive"
                )
                .ok();
            }
            Ok(EXIT_OK)
        })(),
        Command::Graph { model, dot } => load(&model).and_then(|spec| graph(&spec, dot, out)),
        Command::Serve { port, host, state_dir } => return serve(SocketAddr::new(host, port), state_dir, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            exit_code(&e)
        }
    }
}
