//! `dic`: key generation, upload, audit, server mode and the security games.
//!
//! Exit codes: 0 on success or a true verdict, 1 on a false verdict (or any
//! accepted forgery), 2 on usage or operational errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dic_audit::{tpa_audit, upload, CloudServer, FileStore, InProc, TcpClient, TcpServerHandle, Transport};
use dic_core::games::{estimate_advantage, estimate_soundness, AdversaryKind};
use dic_core::pairing::random_scalar;
use dic_core::protocol::{chunk_file, sample_challenge, BlockVector, SchemeId};
use dic_core::scheme::{keygen, respond, token_gen, verify, PublicKey, UserKeys};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Parser, Debug)]
#[command(name = "dic", version, about = "Pairing-based remote data integrity checking")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Config {
    /// Directory holding keys and the server's storage.
    #[arg(long, global = true, env = "DIC_STORE_DIR", default_value = "dic-store")]
    store_dir: PathBuf,
    /// mht, blinded or gs. Defaults to the scheme of the last keygen.
    #[arg(long, global = true)]
    scheme: Option<SchemeId>,
    /// Challenge size.
    #[arg(short = 'c', long = "challenge-size", global = true, default_value_t = 10,
          value_parser = clap::value_parser!(u64).range(1..))]
    c: u64,
    /// Seed for every random choice; drawn from the OS when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// host:port of a running server, or "inproc" to use the store directly.
    #[arg(long, global = true, default_value = "inproc")]
    endpoint: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate and store a key pair for a scheme.
    Keygen {
        /// Replace existing keys for the scheme.
        #[arg(long)]
        force: bool,
    },
    /// Split a file into blocks, compute tokens and send everything to the server.
    Upload {
        file: PathBuf,
        /// Stored name; defaults to the file's base name.
        #[arg(long)]
        name: Option<String>,
    },
    /// Audit a stored file as the third-party auditor.
    Audit {
        /// Stored name, or a path whose base name is used.
        file: String,
    },
    /// Run the cloud server over TCP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
    },
    /// Estimate a distinguisher's advantage in the zero-knowledge game.
    Attack {
        #[arg(long)]
        target: SchemeId,
        /// fig2, fig4 or random; all three when absent.
        #[arg(long)]
        adversary: Option<AdversaryKind>,
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
    /// Run single-block tamper soundness games.
    Soundness {
        #[arg(long, default_value_t = 200)]
        trials: u64,
        /// Blocks per file.
        #[arg(long, default_value_t = 16)]
        blocks: usize,
    },
    /// Proof sizes and respond/verify timings per scheme.
    Bench {
        #[arg(long, default_value_t = 64)]
        blocks: usize,
        #[arg(long, default_value_t = 5)]
        iterations: u32,
    },
}

struct Outcome {
    lines: Vec<String>,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            for line in out.lines {
                println!("{line}");
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = cli.config;
    let seed = cfg.seed.unwrap_or_else(rand::random);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let keys_dir = cfg.store_dir.join("keys");
    match cli.command {
        Command::Keygen { force } => {
            let scheme = cfg.scheme.unwrap_or(SchemeId::Gs);
            let sk_path = keys_dir.join(format!("{scheme}.key"));
            if sk_path.exists() && !force {
                bail!("keys for {scheme} already exist in {} (use --force)", keys_dir.display());
            }
            let keys = keygen(scheme, &mut rng);
            fs::create_dir_all(&keys_dir)?;
            fs::write(&sk_path, keys.encode())?;
            let pk = keys.public().encode();
            fs::write(keys_dir.join(format!("{scheme}.pub")), &pk)?;
            fs::write(keys_dir.join("default"), scheme.as_str())?;
            Ok(Outcome {
                lines: vec![format!("keygen scheme={scheme} pk_bytes={} seed={seed}", pk.len())],
                ok: true,
            })
        }
        Command::Upload { file, name } => {
            let scheme = resolve_scheme(cfg.scheme, &keys_dir)?;
            let keys = UserKeys::decode(&read(&keys_dir.join(format!("{scheme}.key")))?)?;
            let name = match name {
                Some(n) => n,
                None => base_name(&file.to_string_lossy())?,
            };
            let data = read(&file)?;
            let blocks = chunk_file(&data, name.as_bytes())?;
            let transport = connect(&cfg.endpoint, &cfg.store_dir, seed)?;
            upload(transport.as_ref(), &keys, &blocks, &mut rng)?;
            Ok(Outcome {
                lines: vec![format!(
                    "upload scheme={scheme} name={name} bytes={} blocks={} seed={seed}",
                    data.len(),
                    blocks.len()
                )],
                ok: true,
            })
        }
        Command::Audit { file } => {
            let scheme = resolve_scheme(cfg.scheme, &keys_dir)?;
            let pk = PublicKey::decode(&read(&keys_dir.join(format!("{scheme}.pub")))?)?;
            let name = base_name(&file)?;
            let transport = connect(&cfg.endpoint, &cfg.store_dir, seed)?;
            let report = tpa_audit(transport.as_ref(), &pk, name.as_bytes(), cfg.c as usize, &mut rng)?;
            Ok(Outcome {
                lines: vec![format!(
                    "audit scheme={scheme} name={name} n={} c={} proof_bytes={} verdict={} seed={seed}",
                    report.n, report.c, report.proof_bytes, report.outcome
                )],
                ok: report.outcome.is_pass(),
            })
        }
        Command::Serve { listen } => {
            let server = Arc::new(CloudServer::new(server_store(&cfg.store_dir)?, cfg.seed));
            let handle = TcpServerHandle::spawn(listen.as_str(), server)?;
            println!("serve listen={} store={} seed={}", handle.addr(), cfg.store_dir.display(), seed);
            loop {
                std::thread::park();
            }
        }
        Command::Attack { target, adversary, trials } => {
            let kinds = match adversary {
                Some(k) => vec![k],
                None => AdversaryKind::ALL.to_vec(),
            };
            let mut lines = Vec::new();
            for kind in kinds {
                let est = estimate_advantage(target, &|| kind.build(), trials, seed)?;
                lines.push(est.report_line());
            }
            Ok(Outcome { lines, ok: true })
        }
        Command::Soundness { trials, blocks } => {
            let scheme = cfg.scheme.unwrap_or(SchemeId::Gs);
            let c = (cfg.c as usize).min(blocks);
            let report = estimate_soundness(scheme, blocks, c, trials, seed)?;
            Ok(Outcome { lines: vec![report.report_line()], ok: report.accepted == 0 })
        }
        Command::Bench { blocks, iterations } => {
            if blocks == 0 || iterations == 0 {
                bail!("--blocks and --iterations must be positive");
            }
            let schemes = match cfg.scheme {
                Some(s) => vec![s],
                None => SchemeId::ALL.to_vec(),
            };
            let c = (cfg.c as usize).min(blocks);
            let lines = schemes
                .into_iter()
                .map(|s| bench(s, blocks, c, iterations, seed, &mut rng))
                .collect::<Result<_>>()?;
            Ok(Outcome { lines, ok: true })
        }
    }
}

fn bench(scheme: SchemeId, n: usize, c: usize, iterations: u32, seed: u64, rng: &mut ChaCha20Rng) -> Result<String> {
    let keys = keygen(scheme, rng);
    let pk = keys.public();
    let file = BlockVector::new(b"bench".to_vec(), (0..n).map(|_| random_scalar(rng)).collect())?;
    let (tag, state) = token_gen(&keys, &file, rng)?;
    let chal = sample_challenge(n, c, rng)?;
    let mut proof = respond(&file, &state, &pk, &chal, rng)?;
    let start = Instant::now();
    for _ in 0..iterations {
        proof = respond(&file, &state, &pk, &chal, rng)?;
    }
    let respond_ms = start.elapsed().as_secs_f64() * 1e3 / iterations as f64;
    let start = Instant::now();
    let mut accepted = 0;
    for _ in 0..iterations {
        accepted += verify(&pk, &tag, &chal, &proof).is_accept() as u32;
    }
    let verify_ms = start.elapsed().as_secs_f64() * 1e3 / iterations as f64;
    Ok(format!(
        "bench scheme={scheme} n={n} c={c} iterations={iterations} proof_bytes={} tag_bytes={} \
         server_state_bytes={} accepted={accepted} respond_ms={respond_ms:.2} verify_ms={verify_ms:.2} seed={seed}",
        proof.encode().len(),
        tag.encode().len(),
        state.encode().len(),
    ))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn resolve_scheme(flag: Option<SchemeId>, keys_dir: &Path) -> Result<SchemeId> {
    if let Some(s) = flag {
        return Ok(s);
    }
    let text = fs::read_to_string(keys_dir.join("default"))
        .with_context(|| format!("no --scheme given and no keys in {}; run keygen first", keys_dir.display()))?;
    Ok(text.trim().parse()?)
}

fn base_name(path: &str) -> Result<String> {
    Path::new(path)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .with_context(|| format!("{path:?} has no file name"))
}

fn server_store(store_dir: &Path) -> Result<FileStore> {
    Ok(FileStore::open(store_dir.join("server"))?)
}

fn connect(endpoint: &str, store_dir: &Path, seed: u64) -> Result<Box<dyn Transport>> {
    if endpoint == "inproc" {
        let server = CloudServer::new(server_store(store_dir)?, Some(seed));
        Ok(Box::new(InProc::new(Arc::new(server))))
    } else {
        Ok(Box::new(TcpClient::new(endpoint).with_context(|| format!("resolving {endpoint}"))?))
    }
}
