use std::path::PathBuf;
use std::sync::Arc;

use hyperglauber::chain::{ChainState, Start};
use hyperglauber::coupling::CoupledChains;
use hyperglauber::diagnostics::{self, GoodnessScale};
use hyperglauber::generate;
use hyperglauber::io;
use hyperglauber::oracle;
use hyperglauber::rng::derive_seed;
use hyperglauber::Hypergraph;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{colouring_hash, csv, emit, emit_json, envelope};
use crate::{Cli, Command, Failure, Format};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::GenRandom(args) => gen_random(cli, args),
        Command::GenBlocked(args) => gen_blocked(cli, args),
        Command::Sample(args) => sample(cli, args),
        Command::Couple(args) => couple(cli, args),
        Command::Trace(args) => trace(cli, args),
        Command::MixExact(args) => mix_exact(cli, args),
        Command::Components(args) => components(cli, args),
        Command::CheckConditions(args) => check_conditions(cli, args),
        Command::Diagnose(args) => diagnose(cli, args),
    }
}

fn require_json(cli: &Cli, command: &str) -> Result<(), Failure> {
    if cli.format == Format::Csv {
        return Err(Failure::config(format!(
            "{command} does not support --format csv"
        )));
    }
    Ok(())
}

fn load_instance(path: &PathBuf) -> Result<Arc<Hypergraph>, Failure> {
    Ok(Arc::new(io::read_hypergraph_file(path)?))
}

/// Resolve q and the start from --q / --colouring.
fn resolve_start(
    h: &Hypergraph,
    q: Option<u32>,
    colouring: &Option<PathBuf>,
) -> Result<(u32, Start), Failure> {
    match colouring {
        Some(path) => {
            let x = io::read_colouring_file(path)?;
            if x.len() != h.n() {
                return Err(Failure::from(hyperglauber::Error::Dimension(format!(
                    "colouring has {} vertices, instance has {}",
                    x.len(),
                    h.n()
                ))));
            }
            if let Some(q) = q {
                if q != x.q() {
                    return Err(Failure::config(format!(
                        "--q {q} disagrees with the colouring file (q = {})",
                        x.q()
                    )));
                }
            }
            Ok((x.q(), Start::Colouring(x)))
        }
        None => {
            let q = q.ok_or_else(|| Failure::config("--q is required without --colouring"))?;
            Ok((q, Start::UniformRandom))
        }
    }
}

fn goodness_flag(state: &ChainState, scale: GoodnessScale) -> Option<bool> {
    if state.hypergraph().k() < 3 {
        return None;
    }
    diagnostics::goodness(state, scale)
        .ok()
        .map(|r| r.is_good())
}

fn gen_random(cli: &Cli, args: &crate::GenRandomArgs) -> Result<(), Failure> {
    require_json(cli, "gen-random")?;
    let h = generate::random_simple_with_budget(
        args.n,
        args.k,
        args.edges,
        args.max_deg,
        cli.seed,
        args.attempts,
    )?;
    let path = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("hypergraph.hg"));
    io::write_hypergraph_file(&h, &path)?;
    let report = h.validate_simple();
    let payload = envelope(
        "gen-random",
        json!({
            "n": args.n, "k": args.k, "edges": args.edges, "max_deg": args.max_deg,
            "seed": cli.seed, "attempts_factor": args.attempts,
        }),
        json!({
            "instance": path.display().to_string(),
            "n": h.n(), "k": h.k(), "m": h.num_edges(),
            "max_degree": h.max_degree(),
            "simple": report.is_simple,
        }),
        !cli.no_timestamp,
    );
    // The instance goes to --out; the summary always goes to stdout.
    emit_json(&payload, None)
}

fn gen_blocked(cli: &Cli, args: &crate::GenBlockedArgs) -> Result<(), Failure> {
    require_json(cli, "gen-blocked")?;
    let b = generate::blocked_instance(args.m, args.q, args.k, cli.seed, args.augment)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(hyperglauber::Error::from)?;
    let hg_path = dir.join("hypergraph.hg");
    let col_path = dir.join("colouring.col");
    io::write_hypergraph_file(&b.hypergraph, &hg_path)?;
    io::write_colouring_file(&b.colouring, &col_path)?;

    let simple = b.hypergraph.validate_simple().is_simple;
    let proper = b.hypergraph.is_proper(&b.colouring);
    let blocked = (0..b.n()).all(|v| {
        hyperglauber::chain::available_colours_of(&b.hypergraph, &b.colouring, v)
            == vec![b.colouring.colour(v)]
    });
    let payload = envelope(
        "gen-blocked",
        json!({
            "m": args.m, "q": args.q, "k": args.k, "seed": cli.seed,
            "augment": args.augment,
        }),
        json!({
            "instance": hg_path.display().to_string(),
            "colouring": col_path.display().to_string(),
            "n": b.n(), "k": args.k, "m": b.hypergraph.num_edges(),
            "max_degree": b.hypergraph.max_degree(),
            "f2_edges": b.f2_edges.len(),
            "simple": simple,
            "proper": proper,
            "blocked": blocked,
        }),
        !cli.no_timestamp,
    );
    emit_json(&payload, None)
}

struct ReplicaStats {
    replica: u64,
    seed: u64,
    proper: bool,
    eps_good: Option<bool>,
    two_eps_good: Option<bool>,
    changed: u64,
    empty_available: u64,
    hash: String,
    proper_at: Vec<(u64, bool)>,
    log: Option<Vec<hyperglauber::StepRecord>>,
}

fn sample(cli: &Cli, args: &crate::SampleArgs) -> Result<(), Failure> {
    let h = load_instance(&args.instance)?;
    let (q, start) = resolve_start(&h, args.q, &args.colouring)?;

    let stats: Vec<Result<ReplicaStats, Failure>> = (0..args.replicas)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(cli.seed, r);
            let mut state = ChainState::new(Arc::clone(&h), q, start.clone(), seed)?;
            let want_log = r == 0 && args.log.is_some();
            let mut records = Vec::new();
            let summary = if want_log {
                let mut summary = hyperglauber::RunSummary {
                    steps: args.steps,
                    ..Default::default()
                };
                for i in 0..args.steps {
                    let rec = state.step();
                    if rec.available == 0 {
                        summary.empty_available += 1;
                    }
                    if rec.new_colour != rec.old_colour {
                        summary.changed += 1;
                    }
                    if args.checkpoint_every > 0
                        && ((i + 1) % args.checkpoint_every == 0 || i + 1 == args.steps)
                    {
                        summary.proper_at.push((state.t(), state.is_proper()));
                    }
                    records.push(rec);
                }
                summary
            } else {
                state.run_with_checkpoints(args.steps, args.checkpoint_every)
            };
            Ok(ReplicaStats {
                replica: r,
                seed,
                proper: state.is_proper(),
                eps_good: goodness_flag(&state, GoodnessScale::Eps),
                two_eps_good: goodness_flag(&state, GoodnessScale::TwoEps),
                changed: summary.changed,
                empty_available: summary.empty_available,
                hash: colouring_hash(state.colouring()),
                proper_at: summary.proper_at,
                log: want_log.then_some(records),
            })
        })
        .collect();
    let mut replicas = Vec::with_capacity(stats.len());
    for s in stats {
        replicas.push(s?);
    }

    if let Some(log_path) = &args.log {
        let records = replicas
            .get_mut(0)
            .and_then(|r| r.log.take())
            .unwrap_or_default();
        let rows = records.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                r.t, r.vertex, r.old_colour, r.new_colour, r.available
            )
        });
        let text = csv("t,v,old_colour,new_colour,avail_size", rows);
        emit(&text, Some(log_path))?;
    }

    let rate = |f: &dyn Fn(&ReplicaStats) -> Option<bool>| -> Option<f64> {
        let flags: Vec<bool> = replicas.iter().filter_map(f).collect();
        if flags.is_empty() {
            None
        } else {
            Some(flags.iter().filter(|&&b| b).count() as f64 / flags.len() as f64)
        }
    };
    let properness_rate =
        replicas.iter().filter(|s| s.proper).count() as f64 / replicas.len().max(1) as f64;
    let eps_good_rate = rate(&|s: &ReplicaStats| s.eps_good);
    let two_eps_good_rate = rate(&|s: &ReplicaStats| s.two_eps_good);

    let inputs = json!({
        "instance": args.instance.display().to_string(),
        "colouring": args.colouring.as_ref().map(|p| p.display().to_string()),
        "q": q, "steps": args.steps, "replicas": args.replicas, "seed": cli.seed,
        "checkpoint_every": args.checkpoint_every,
    });
    match cli.format {
        Format::Json => {
            let rows: Vec<Value> = replicas
                .iter()
                .map(|s| {
                    json!({
                        "replica": s.replica, "seed": s.seed, "proper": s.proper,
                        "eps_good": s.eps_good, "two_eps_good": s.two_eps_good,
                        "changed": s.changed, "empty_available": s.empty_available,
                        "final_hash": s.hash,
                        "proper_at": s.proper_at,
                    })
                })
                .collect();
            let payload = envelope(
                "sample",
                inputs,
                json!({
                    "properness_rate": properness_rate,
                    "eps_good_rate": eps_good_rate,
                    "two_eps_good_rate": two_eps_good_rate,
                    "replicas": rows,
                }),
                !cli.no_timestamp,
            );
            emit_json(&payload, cli.out.as_ref())
        }
        Format::Csv => {
            let opt = |b: Option<bool>| b.map_or(String::from(""), |b| b.to_string());
            let rows = replicas.iter().map(|s| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    s.replica,
                    s.seed,
                    s.proper,
                    opt(s.eps_good),
                    opt(s.two_eps_good),
                    s.changed,
                    s.empty_available,
                    s.hash
                )
            });
            let text = csv(
                "replica,seed,proper,eps_good,two_eps_good,changed,empty_available,final_hash",
                rows,
            );
            emit(&text, cli.out.as_ref())
        }
    }
}

fn couple(cli: &Cli, args: &crate::CoupleArgs) -> Result<(), Failure> {
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(Failure::config(format!(
            "--delta must lie in (0,1), got {}",
            args.delta
        )));
    }
    let h = load_instance(&args.instance)?;
    let n = h.n() as f64;
    let t_delta = 2.0 * n * (2.0 * n / args.delta).ln();
    let t_delta_ceil = t_delta.ceil() as u64;

    struct PairStats {
        replica: u64,
        seed_x: u64,
        seed_y: u64,
        seed_shared: u64,
        time: Option<u64>,
        final_hamming: usize,
        log: Option<Vec<hyperglauber::CoupledStepRecord>>,
    }

    let results: Vec<Result<PairStats, Failure>> = (0..args.replicas)
        .into_par_iter()
        .map(|r| {
            let seed_x = derive_seed(cli.seed, 3 * r);
            let seed_y = derive_seed(cli.seed, 3 * r + 1);
            let seed_shared = derive_seed(cli.seed, 3 * r + 2);
            let x = ChainState::new(Arc::clone(&h), args.q, Start::UniformRandom, seed_x)?;
            let y = ChainState::new(Arc::clone(&h), args.q, Start::UniformRandom, seed_y)?;
            let mut pair = CoupledChains::new(x, y, seed_shared)?;
            let want_log = r == 0 && args.log.is_some();
            let mut records = Vec::new();
            while pair.hamming() != 0 && pair.t() < args.steps {
                let rec = pair.step();
                if want_log {
                    records.push(rec);
                }
            }
            let time = (pair.hamming() == 0).then(|| pair.t());
            Ok(PairStats {
                replica: r,
                seed_x,
                seed_y,
                seed_shared,
                time,
                final_hamming: pair.hamming(),
                log: want_log.then_some(records),
            })
        })
        .collect();
    let mut pairs = Vec::with_capacity(results.len());
    for p in results {
        pairs.push(p?);
    }

    if let Some(log_path) = &args.log {
        let records = pairs
            .get_mut(0)
            .and_then(|p| p.log.take())
            .unwrap_or_default();
        let rows = records.iter().map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.t, r.vertex, r.available_x, r.available_y, r.agreed, r.hamming
            )
        });
        let text = csv("t,v,avail_x,avail_y,agreed,hamming", rows);
        emit(&text, Some(log_path))?;
    }

    let total = pairs.len().max(1) as f64;
    let coalesced = pairs.iter().filter(|p| p.time.is_some()).count();
    let within_t_delta = pairs
        .iter()
        .filter(|p| p.time.is_some_and(|t| t <= t_delta_ceil))
        .count();

    let inputs = json!({
        "instance": args.instance.display().to_string(),
        "q": args.q, "steps": args.steps, "replicas": args.replicas,
        "delta": args.delta, "seed": cli.seed,
    });
    match cli.format {
        Format::Json => {
            let rows: Vec<Value> = pairs
                .iter()
                .map(|p| {
                    json!({
                        "replica": p.replica,
                        "seed_x": p.seed_x, "seed_y": p.seed_y, "seed_shared": p.seed_shared,
                        "coalesced": p.time.is_some(),
                        "time": p.time,
                        "final_hamming": p.final_hamming,
                    })
                })
                .collect();
            let payload = envelope(
                "couple",
                inputs,
                json!({
                    "n": h.n(),
                    "t_delta": t_delta,
                    "t_delta_ceil": t_delta_ceil,
                    "coalesced_fraction": coalesced as f64 / total,
                    "fraction_within_t_delta": within_t_delta as f64 / total,
                    "replicas": rows,
                }),
                !cli.no_timestamp,
            );
            emit_json(&payload, cli.out.as_ref())
        }
        Format::Csv => {
            let rows = pairs.iter().map(|p| {
                format!(
                    "{},{},{},{},{},{},{}",
                    p.replica,
                    p.seed_x,
                    p.seed_y,
                    p.seed_shared,
                    p.time.is_some(),
                    p.time.map_or(String::new(), |t| t.to_string()),
                    p.final_hamming
                )
            });
            let text = csv(
                "replica,seed_x,seed_y,seed_shared,coalesced,time,final_hamming",
                rows,
            );
            emit(&text, cli.out.as_ref())
        }
    }
}

fn trace(cli: &Cli, args: &crate::TraceArgs) -> Result<(), Failure> {
    if args.steps < 1 {
        return Err(Failure::config("--steps must be at least 1"));
    }
    let h = load_instance(&args.instance)?;
    if h.k() < 3 {
        return Err(Failure::config("goodness traces need k >= 3"));
    }
    let (q, start) = resolve_start(&h, args.q, &args.colouring)?;
    let tr = diagnostics::goodness_trace(
        Arc::clone(&h),
        q,
        start,
        args.steps,
        args.checkpoints,
        cli.seed,
    )?;

    let inputs = json!({
        "instance": args.instance.display().to_string(),
        "colouring": args.colouring.as_ref().map(|p| p.display().to_string()),
        "q": q, "steps": args.steps, "checkpoints": args.checkpoints, "seed": cli.seed,
    });
    match cli.format {
        Format::Json => {
            let payload = envelope(
                "trace",
                inputs,
                serde_json::to_value(&tr).map_err(|e| Failure {
                    code: 2,
                    message: e.to_string(),
                })?,
                !cli.no_timestamp,
            );
            emit_json(&payload, cli.out.as_ref())
        }
        Format::Csv => {
            let k = h.k();
            let mut header = String::from("t");
            for i in 1..=k - 2 {
                header.push_str(&format!(",max_z_delta_{i}"));
            }
            header.push_str(",scale2_good");
            let rows = tr.checkpoints.iter().map(|cp| {
                let mut row = cp.t.to_string();
                for d in &cp.max_z_delta {
                    row.push_str(&format!(",{d}"));
                }
                row.push_str(&format!(",{}", cp.scale2_good));
                row
            });
            let text = csv(&header, rows);
            emit(&text, cli.out.as_ref())
        }
    }
}

fn mix_exact(cli: &Cli, args: &crate::MixExactArgs) -> Result<(), Failure> {
    let h = io::read_hypergraph_file(&args.instance)?;
    let series = oracle::mixing_profile::<f64>(&h, args.q, args.steps, cli.budget)?;
    let inputs = json!({
        "instance": args.instance.display().to_string(),
        "q": args.q, "steps": args.steps, "budget": cli.budget,
    });
    match cli.format {
        Format::Json => {
            let rows: Vec<Value> = series
                .iter()
                .map(|(t, tv)| json!({"t": t, "tv": tv}))
                .collect();
            let payload = envelope(
                "mix-exact",
                inputs,
                json!({ "series": rows }),
                !cli.no_timestamp,
            );
            emit_json(&payload, cli.out.as_ref())
        }
        Format::Csv => {
            let rows = series.iter().map(|(t, tv)| format!("{t},{tv}"));
            let text = csv("t,tv", rows);
            emit(&text, cli.out.as_ref())
        }
    }
}

fn components(cli: &Cli, args: &crate::ComponentsArgs) -> Result<(), Failure> {
    require_json(cli, "components")?;
    let h = io::read_hypergraph_file(&args.instance)?;
    let report = oracle::gamma_q_components(&h, args.q, cli.budget)?;
    let payload = envelope(
        "components",
        json!({
            "instance": args.instance.display().to_string(),
            "q": args.q, "budget": cli.budget,
        }),
        serde_json::to_value(&report).map_err(|e| Failure {
            code: 2,
            message: e.to_string(),
        })?,
        !cli.no_timestamp,
    );
    emit_json(&payload, cli.out.as_ref())
}

fn check_conditions(cli: &Cli, args: &crate::CheckConditionsArgs) -> Result<(), Failure> {
    require_json(cli, "check-conditions")?;
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(Failure::config(format!(
            "--delta must lie in (0,1), got {}",
            args.delta
        )));
    }
    if args.k < 3 {
        return Err(Failure::config("the condition checks need k >= 3"));
    }
    let report = diagnostics::check_conditions(
        args.n,
        args.k,
        args.q,
        args.max_deg,
        args.big_k,
        args.delta,
    )?;
    let payload = envelope(
        "check-conditions",
        json!({
            "n": args.n, "k": args.k, "q": args.q, "max_deg": args.max_deg,
            "K": args.big_k, "delta": args.delta,
        }),
        serde_json::to_value(&report).map_err(|e| Failure {
            code: 2,
            message: e.to_string(),
        })?,
        !cli.no_timestamp,
    );
    emit_json(&payload, cli.out.as_ref())
}

fn diagnose(cli: &Cli, args: &crate::DiagnoseArgs) -> Result<(), Failure> {
    require_json(cli, "diagnose")?;
    let scale = match args.scale {
        1 => GoodnessScale::Eps,
        2 => GoodnessScale::TwoEps,
        s => return Err(Failure::config(format!("--scale must be 1 or 2, got {s}"))),
    };
    let h = load_instance(&args.instance)?;
    if h.k() < 3 {
        return Err(Failure::config("goodness diagnostics need k >= 3"));
    }
    let x = io::read_colouring_file(&args.colouring)?;
    let state = ChainState::new(Arc::clone(&h), x.q(), Start::Colouring(x), 0)?;
    let report = diagnostics::goodness(&state, scale)?;
    let payload = envelope(
        "diagnose",
        json!({
            "instance": args.instance.display().to_string(),
            "colouring": args.colouring.display().to_string(),
            "scale": args.scale,
        }),
        serde_json::to_value(&report).map_err(|e| Failure {
            code: 2,
            message: e.to_string(),
        })?,
        !cli.no_timestamp,
    );
    emit_json(&payload, cli.out.as_ref())
}
