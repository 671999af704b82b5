use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use discharge_cli::{export_if_proven, load_library, read_fragment};
use discharge_core::prover::{
    attempt_reduce, batch_reduce, derive_fragment_patterns, export_proof, generate_d, library_request,
    load_entries, replay_bundle, CEntry, CommitRequest, Evidence, Justification, Outcome,
    ReduceOptions, Session, SessionLock,
};
use discharge_core::words::parse_patterns;

#[derive(Parser)]
#[command(name = "discharge", about = "Discharging-proof search for the square colouring bound")]
struct Cli {
    /// Session directory.
    #[arg(long, global = true, default_value = "session")]
    session: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate D and create an empty session.
    Gen {
        #[arg(long)]
        force: bool,
    },
    /// Run one round: filter D by C, solve, verify, log.
    Solve {
        /// Constrain every rule variable to be nonnegative from now on.
        #[arg(long)]
        nonneg: bool,
    },
    /// Tight words of the last round.
    Tight {
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Try to reduce a fragment; prints evidence or the failure diagnostics.
    Reduce {
        fragment: PathBuf,
        /// Distant pair to colour alike, `b,c`.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        pivot: Option<String>,
        #[arg(long)]
        k: Option<i64>,
        /// Write the evidence here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Patterns implied by a fragment over D.
    Derive {
        fragment: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add an entry to C from a pattern file (or a whole `.entry` file).
    Commit {
        patterns: PathBuf,
        #[arg(long, group = "why")]
        evidence: Option<PathBuf>,
        #[arg(long, group = "why")]
        assert: Option<String>,
        #[arg(long, group = "why")]
        pending: bool,
        #[arg(long)]
        fragment: Option<PathBuf>,
        /// Entry name; defaults to the pattern file stem.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        principal: Option<String>,
    },
    /// Commit every `.entry` file of a directory, in name order.
    Load { dir: PathBuf },
    /// Reduce and commit every library fragment found in a tight word.
    Batch {
        #[arg(long, default_value = "fixtures/fragments")]
        library: PathBuf,
    },
    /// Write entry files for every fragment of a library.
    Library { fragments: PathBuf, out: PathBuf },
    /// Export the proof bundle of a successful session.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independently replay a proof bundle.
    Replay { bundle: PathBuf },
    /// Session summary.
    Status,
    /// Round log.
    History,
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "fixtures/fragments")]
        library: PathBuf,
    },
}

fn principal(p: Option<String>) -> String {
    p.or_else(|| std::env::var("USER").ok()).unwrap_or_else(|| "cli".into())
}

fn open(dir: &Path) -> Result<Session> {
    Session::load(dir).with_context(|| format!("loading session {}", dir.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let dir = cli.session.as_path();
    match cli.cmd {
        Cmd::Gen { force } => {
            if dir.join("manifest.txt").exists() && !force {
                bail!("{} already holds a session (use --force)", dir.display());
            }
            fs::create_dir_all(dir)?;
            let _lock = SessionLock::acquire(dir)?;
            let id = dir
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "session".into());
            let s = Session::new(&id);
            s.save(dir)?;
            for d in &s.d {
                println!("{} {} {}", d.kind.prefix(), d.count, d.sha256);
            }
        }
        Cmd::Solve { nonneg } => {
            let _lock = SessionLock::acquire(dir)?;
            let mut s = open(dir)?;
            if nonneg {
                s.options.nonneg_omega = true;
            }
            let r = s.iterate(None)?;
            s.save(dir)?;
            println!("round {} alpha {}", r.round, r.alpha);
            println!("unabsorbed {}", r.unabsorbed);
            match r.outcome {
                Outcome::Success => {
                    let report = export_if_proven(&s, dir)?.expect("success");
                    println!("success, bundle in {}", discharge_cli::bundle_dir(dir).display());
                    print!("{}", report.to_text());
                }
                Outcome::Tight(words) => println!("tight {}", words.len()),
            }
        }
        Cmd::Tight { limit } => {
            let s = open(dir)?;
            let Some(r) = s.last() else { bail!("no round has been run") };
            for t in r.tight.iter().take(limit.unwrap_or(usize::MAX)) {
                println!("{t}");
            }
        }
        Cmd::Reduce { fragment, pair, pivot, k, out } => {
            let (_, frag) = read_fragment(&fragment)?;
            let pairs = match pair {
                Some(p) => {
                    let (a, b) = p.split_once(',').context("--pair takes `b,c`")?;
                    vec![(a.trim().to_string(), b.trim().to_string())]
                }
                None => Vec::new(),
            };
            let opts = ReduceOptions { pivot, pairs, k: k.unwrap_or(0) };
            match attempt_reduce(&frag, &opts)? {
                Ok(ev) => match out {
                    Some(p) => {
                        fs::write(&p, ev.to_text())?;
                        println!("reduced ({}), evidence in {}", ev.method.as_str(), p.display());
                    }
                    None => print!("{}", ev.to_text()),
                },
                Err(f) => {
                    print!("{}", f.to_text());
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Cmd::Derive { fragment, out } => {
            let (name, frag) = read_fragment(&fragment)?;
            let words = generate_d();
            let text: String = derive_fragment_patterns(&name, &frag, &words)
                .iter()
                .map(|p| p.to_line() + "\n")
                .collect();
            match out {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
        Cmd::Commit { patterns, evidence, assert, pending, fragment, name, principal: who } => {
            let _lock = SessionLock::acquire(dir)?;
            let mut s = open(dir)?;
            let text = fs::read_to_string(&patterns)?;
            let who = principal(who);
            let mut req = if patterns.extension().is_some_and(|x| x == "entry") {
                CEntry::parse(&text)?.to_request(&who)
            } else {
                CommitRequest {
                    name: name.clone().unwrap_or_else(|| {
                        patterns.file_stem().unwrap_or_default().to_string_lossy().into_owned()
                    }),
                    patterns: parse_patterns(&text)?,
                    fragment: None,
                    justification: Justification::Pending,
                    principal: who,
                }
            };
            if let Some(n) = name {
                req.name = n;
            }
            if let Some(f) = fragment {
                req.fragment = Some(read_fragment(&f)?.1);
            }
            if let Some(e) = evidence {
                req.justification = Justification::Evidence(Evidence::parse(&fs::read_to_string(e)?)?);
            } else if let Some(r) = assert {
                req.justification = Justification::Assert(r);
            } else if pending {
                req.justification = Justification::Pending;
            }
            let e = s.commit(req)?;
            println!("committed {} ({}, {} patterns)", e.name, e.status.as_str(), e.patterns.len());
            s.save(dir)?;
        }
        Cmd::Load { dir: from } => {
            let _lock = SessionLock::acquire(dir)?;
            let mut s = open(dir)?;
            let who = principal(None);
            for e in load_entries(&from)? {
                let e = s.commit(e.to_request(&who))?;
                println!("committed {} ({})", e.name, e.status.as_str());
            }
            s.save(dir)?;
        }
        Cmd::Batch { library } => {
            let _lock = SessionLock::acquire(dir)?;
            let mut s = open(dir)?;
            let lib = load_library(&library)?;
            for r in batch_reduce(&mut s, &lib, &principal(None))? {
                if r.committed {
                    println!("committed {} ({} patterns)", r.fragment, r.patterns);
                } else {
                    println!("skipped {}: {}", r.fragment, r.note);
                }
            }
            s.save(dir)?;
        }
        Cmd::Library { fragments, out } => {
            let words = generate_d();
            fs::create_dir_all(&out)?;
            for (i, (name, frag)) in load_library(&fragments)?.iter().enumerate() {
                let req = library_request(name, frag, &words, "library")?;
                let mut probe = Session::with_words("library", std::sync::Arc::new(Vec::new()));
                let e = probe.commit(req)?;
                fs::write(out.join(format!("{:03}-{name}.entry", i + 1)), e.to_text())?;
                println!("{name} {} {}", e.status.as_str(), e.patterns.len());
            }
        }
        Cmd::Export { out } => {
            let s = open(dir)?;
            let out = out.unwrap_or_else(|| discharge_cli::bundle_dir(dir));
            let report = export_proof(&s, &out)?;
            print!("{}", report.to_text());
        }
        Cmd::Replay { bundle } => {
            let report = replay_bundle(&bundle)?;
            print!("{}", report.to_text());
            if !report.ok() {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Status => {
            let s = open(dir)?;
            println!("session {}", s.id);
            for d in &s.d {
                println!("d {} {}", d.kind.prefix(), d.count);
            }
            println!("entries {}", s.entries.len());
            for e in &s.entries {
                println!("  {} {} {}", e.name, e.status.as_str(), e.patterns.len());
            }
            match s.last() {
                Some(r) => println!(
                    "round {} alpha {} {} unabsorbed {}",
                    r.round,
                    r.alpha,
                    if r.success { "success" } else { "tight" },
                    r.unabsorbed
                ),
                None => println!("no rounds"),
            }
        }
        Cmd::History => {
            let s = open(dir)?;
            for r in &s.log {
                println!(
                    "round {} alpha {} tight {} delta {}",
                    r.round,
                    r.alpha,
                    r.tight.len(),
                    r.delta.join(",")
                );
            }
        }
        Cmd::Serve { port, library } => {
            let lock = SessionLock::acquire(dir)?;
            let s = open(dir)?;
            let lib = load_library(&library)?;
            let state = discharge_cli::api::AppState::new(s, dir.to_path_buf(), lib, Some(lock));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
                eprintln!("listening on http://127.0.0.1:{port}");
                axum::serve(listener, discharge_cli::api::router(state)).await
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
