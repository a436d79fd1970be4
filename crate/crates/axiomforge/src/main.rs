use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use axiomforge::server;
use axiomforge_core::persist;
use axiomforge_core::script;
use axiomforge_core::store::OntologyStore;
use axiomforge_core::textgen;
use axiomforge_core::wsml::parse_ontology_with_diagnostics;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "axiomforge", version, about = "Build WSML axioms from ontology-typed graphs")]
struct Cli {
    /// Directory of `.wsml` files that ontologies are loaded from by IRI.
    #[arg(long, global = true, default_value = "ontologies")]
    ontology_store: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse an ontology file and report diagnostics.
    Lint { file: PathBuf },
    /// Run an edit script and print the resulting expression.
    Build {
        script: PathBuf,
        /// Break the expression onto an indented line.
        #[arg(long)]
        pretty: bool,
        /// Also save the built axiom to this file.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Print the expression of a saved axiom.
    Emit {
        file: PathBuf,
        #[arg(long)]
        pretty: bool,
    },
    /// Load, save and reload an axiom file, checking nothing changes.
    Roundtrip { file: PathBuf },
    /// Serve the HTTP session protocol.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let store = OntologyStore::new(&cli.ontology_store);
    match cli.command {
        Command::Lint { file } => lint(&file),
        Command::Build { script, pretty, save } => build(store, &script, pretty, save.as_deref()),
        Command::Emit { file, pretty } => emit(store, &file, pretty),
        Command::Roundtrip { file } => roundtrip(store, &file),
        Command::Serve { port, host } => serve(store, SocketAddr::new(host, port)),
    }
}

fn lint(file: &Path) -> Result<ExitCode> {
    let source = fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    let (ontology, diagnostics) = parse_ontology_with_diagnostics(&source);
    for d in &diagnostics {
        println!("{}:{d}", file.display());
    }
    match ontology {
        Some(o) if !diagnostics.iter().any(|d| d.is_error()) => {
            println!(
                "{}: ok: {} ({} concepts, {} relations, {} instances)",
                file.display(),
                o.iri,
                o.concepts.len(),
                o.relations.len(),
                o.instances.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        _ => Ok(ExitCode::FAILURE),
    }
}

fn build(mut store: OntologyStore, path: &Path, pretty: bool, save: Option<&Path>) -> Result<ExitCode> {
    let source = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (run, expr) = match script::run_script(&mut store, &source, pretty) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return Ok(ExitCode::FAILURE);
        }
    };
    if let Some(out) = save {
        persist::save_axiom(&run.graph, out)?;
    }
    println!("{}", expr.text);
    Ok(ExitCode::SUCCESS)
}

fn emit(mut store: OntologyStore, path: &Path, pretty: bool) -> Result<ExitCode> {
    let graph = persist::load_axiom(&mut store, path)?;
    match textgen::generate(&graph, pretty) {
        Ok(expr) => {
            println!("{}", expr.text);
            Ok(ExitCode::SUCCESS)
        }
        Err(incomplete) => {
            eprintln!("{}: {incomplete}", path.display());
            Ok(ExitCode::FAILURE)
        }
    }
}

fn roundtrip(mut store: OntologyStore, path: &Path) -> Result<ExitCode> {
    let graph = persist::load_axiom(&mut store, path)?;
    let saved = persist::to_text(&graph);
    let reloaded = persist::parse_axiom(&mut store, &saved)?;
    if !reloaded.is_isomorphic(&graph) {
        bail!("{} changed across save and load", path.display());
    }
    let original = fs::read_to_string(path)?;
    let canonical = saved == original;
    println!(
        "{}: ok: {} nodes, {} connections, isomorphic after reload{}",
        path.display(),
        graph.node_count(),
        graph.connections().count(),
        if canonical { ", file is in canonical form" } else { "" }
    );
    Ok(ExitCode::SUCCESS)
}

fn serve(store: OntologyStore, addr: SocketAddr) -> Result<ExitCode> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot listen on {addr}"))?;
        eprintln!("axiomforge listening on http://{}", listener.local_addr()?);
        axum::serve(listener, server::router(server::AppState::new(store)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(ExitCode::SUCCESS)
    })
}
