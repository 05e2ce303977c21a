//! `ctxpat`: mine flanking contexts, build and query count indexes, and
//! cross-check every engine against the brute-force reference.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 oracle
//! mismatch (`oracle-check` only). All outputs are tab-separated; sentinel
//! bytes render as `$` (terminator) and `#` (gap marker).

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use ctxpat::em::{mine_em, EmConfig};
use ctxpat::index::{build_index, build_optimized_index};
use ctxpat::lz77::{build_modified_string, factorize};
use ctxpat::mine::{format_patterns, mine_im};
use ctxpat::oracle::{context_oracle, cpm_oracle, flank_pair};
use ctxpat::text::{SentinelPolicy, Text};
use ctxpat::{load_index_file, save_index_file};

/// Largest text the brute-force reference is allowed to chew on.
const ORACLE_MAX_N: usize = 5000;

#[derive(Parser)]
#[command(name = "ctxpat", version, about = "Flanking-context mining and counting")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// In-memory pipeline.
    Im,
    /// External-memory pipeline with a RAM budget.
    Em,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report every length-m pattern whose distinct flank-pair set has at
    /// least tau members, with the pairs.
    Mine {
        /// Input text file; one trailing newline is ignored.
        #[arg(long)]
        text: PathBuf,
        /// Smallest reported context size (>= 1).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        tau: u64,
        /// Pattern length (>= 1).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
        /// Left flank extent.
        #[arg(long)]
        l: u64,
        /// Right flank extent.
        #[arg(long)]
        r: u64,
        #[arg(long, value_enum, default_value_t = Engine::Im)]
        engine: Engine,
        /// RAM budget in bytes for the external engine.
        #[arg(long, default_value_t = 16 << 20)]
        budget: u64,
        /// Disk block size in bytes for the external engine.
        #[arg(long, default_value_t = 1 << 20)]
        block: u64,
        /// Directory for external-run files (default: a fresh temp dir).
        #[arg(long)]
        tmp_dir: Option<PathBuf>,
        /// Write records here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a count index and save it to a file.
    IndexBuild {
        #[arg(long)]
        text: PathBuf,
        /// Window bound B: keep only letters within B of a parse-phrase
        /// start. Queries must then satisfy l+m+r <= B. Omit for the full
        /// index.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        bound: Option<u32>,
        #[arg(long)]
        index_out: PathBuf,
    },
    /// Print the context count |C(P,l,r)| for one pattern.
    Query {
        #[arg(long)]
        index_in: PathBuf,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        l: u64,
        #[arg(long)]
        r: u64,
    },
    /// Count contexts for a whole pattern family: every distinct length-m
    /// substring, or the patterns listed in a file.
    Workload {
        #[arg(long)]
        index_in: PathBuf,
        /// Pattern length when deriving the family from the indexed text.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
        #[arg(long)]
        l: u64,
        #[arg(long)]
        r: u64,
        /// Newline-separated pattern file overriding the derived family.
        #[arg(long)]
        patterns: Option<PathBuf>,
    },
    /// Run every engine against the brute-force reference on a parameter
    /// grid. Exits 3 if anything disagrees.
    OracleCheck {
        #[arg(long)]
        text: PathBuf,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        tau_max: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        m_max: u64,
        #[arg(long, default_value_t = 2)]
        l_max: u64,
        #[arg(long, default_value_t = 2)]
        r_max: u64,
    },
    /// Show the greedy leftmost-longest parse of the text, and optionally
    /// the bound-B reduced string.
    Lz77 {
        #[arg(long)]
        text: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        bound: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(code) => code,
        // A reader hanging up mid-stream (`ctxpat ... | head`) is not an
        // error; anything else is a data problem.
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ctxpat: error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn load_text(path: &Path) -> Result<Text> {
    let mut bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.last() == Some(&b'\n') {
        bytes.pop();
        if bytes.last() == Some(&b'\r') {
            bytes.pop();
        }
    }
    Text::from_bytes(&bytes, SentinelPolicy::AppendIfMissing)
        .with_context(|| format!("loading {}", path.display()))
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Mine { text, tau, m, l, r, engine, budget, block, tmp_dir, out } => {
            let t = load_text(&text)?;
            let (tau, m, l, r) = (tau as usize, m as usize, l as usize, r as usize);
            let records = match engine {
                Engine::Im => mine_im(&t, tau, m, l, r)?,
                Engine::Em => {
                    // Run files are named by a per-session counter, so every
                    // run needs its own directory unless the caller manages
                    // one.
                    let scratch;
                    let dir = match &tmp_dir {
                        Some(d) => d.clone(),
                        None => {
                            scratch = tempfile::tempdir().context("creating temp dir")?;
                            scratch.path().to_path_buf()
                        }
                    };
                    let cfg = EmConfig {
                        budget_bytes: budget as usize,
                        block_bytes: block as usize,
                        tmp_dir: dir,
                    };
                    mine_em(&t, tau, m, l, r, &cfg)?
                }
            };
            let bytes = format_patterns(&t, &records);
            match out {
                Some(p) => std::fs::write(&p, bytes)
                    .with_context(|| format!("writing {}", p.display()))?,
                None => std::io::stdout().write_all(&bytes)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::IndexBuild { text, bound, index_out } => {
            let t = load_text(&text)?;
            let idx = match bound {
                None => build_index(&t),
                Some(b) => build_optimized_index(&t, b)?,
            };
            save_index_file(&idx, &index_out)?;
            let bytes = std::fs::metadata(&index_out).map(|m| m.len()).unwrap_or(0);
            let mut out = std::io::stdout().lock();
            writeln!(out, "# n\tstored\tphrases\tbound\tpoints\tbytes")?;
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{bytes}",
                u64::from(idx.original_len()) - 1,
                idx.indexed_len() - 1,
                idx.parse_size(),
                idx.bound().map_or_else(|| "-".to_string(), |b| b.to_string()),
                idx.total_points(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Query { index_in, pattern, l, r } => {
            let idx = load_index_file(&index_in)?;
            let count = idx.count(pattern.as_bytes(), l as usize, r as usize)?;
            writeln!(std::io::stdout().lock(), "{count}")?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Workload { index_in, m, l, r, patterns } => {
            let idx = load_index_file(&index_in)?;
            let (m, l, r) = (m as usize, l as usize, r as usize);
            if let Some(b) = idx.bound() {
                if (l + m + r) as u64 > u64::from(b) {
                    bail!("window l+m+r = {} exceeds the index bound {b}", l + m + r);
                }
            }
            let family: Vec<Vec<u8>> = match patterns {
                Some(p) => std::fs::read(&p)
                    .with_context(|| format!("reading {}", p.display()))?
                    .split(|&c| c == b'\n')
                    .filter(|line| !line.is_empty())
                    .map(|line| line.strip_suffix(b"\r").unwrap_or(line).to_vec())
                    .collect(),
                None => idx.distinct_windows(m),
            };
            let stdout = std::io::stdout();
            let mut w = std::io::BufWriter::new(stdout.lock());
            let mut total = std::time::Duration::ZERO;
            for p in &family {
                let t0 = Instant::now();
                let count = idx.count(p, l, r)?;
                total += t0.elapsed();
                w.write_all(p)?;
                writeln!(w, "\t{count}")?;
            }
            let mean_ns = total.as_nanos().checked_div(family.len() as u128).unwrap_or(0);
            writeln!(w, "# queries\t{}\tmean_query_ns\t{mean_ns}", family.len())?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::OracleCheck { text, tau_max, m_max, l_max, r_max } => {
            let t = load_text(&text)?;
            oracle_check(&t, tau_max as usize, m_max as usize, l_max as usize, r_max as usize)
        }
        Cmd::Lz77 { text, bound } => {
            let t = load_text(&text)?;
            let f = factorize(&t);
            let mut out = std::io::stdout().lock();
            writeln!(out, "phrases\t{}", f.z())?;
            let starts: Vec<String> = f.starts().iter().map(u32::to_string).collect();
            writeln!(out, "starts\t{}", starts.join(" "))?;
            if let Some(b) = bound {
                let ms = build_modified_string(&t, &f, b);
                let shown = ms.text().render(ms.text().payload());
                writeln!(out, "reduced\t{}", String::from_utf8_lossy(&shown))?;
                writeln!(out, "reduced_len\t{}", ms.len() - 1)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Every engine against the brute-force scan on the full parameter grid.
/// Prints one line per disagreement (capped) and a closing summary.
fn oracle_check(t: &Text, tau_max: usize, m_max: usize, l_max: usize, r_max: usize) -> Result<ExitCode> {
    let n = t.payload_len();
    if n > ORACLE_MAX_N {
        bail!("text has {n} letters; the brute-force reference is capped at {ORACLE_MAX_N}");
    }
    let mut mismatches = 0u64;
    let mut lines: Vec<String> = Vec::new();
    let mut report = |what: String| {
        mismatches += 1;
        if lines.len() < 20 {
            lines.push(what);
        }
    };

    let scratch = tempfile::tempdir().context("creating temp dir")?;
    let mut runs = 0u64;
    for tau in 1..=tau_max {
        for m in 1..=m_max {
            for l in 0..=l_max {
                for r in 0..=r_max {
                    let im = mine_im(t, tau, m, l, r)?;
                    let want = cpm_oracle(t, tau, m, l, r);
                    if im != want {
                        report(format!("mine-im\ttau={tau} m={m} l={l} r={r}"));
                    }
                    let cfg = EmConfig {
                        budget_bytes: 1 << 20,
                        block_bytes: 64 << 10,
                        tmp_dir: scratch.path().join(format!("run-{tau}-{m}-{l}-{r}")),
                    };
                    std::fs::create_dir_all(&cfg.tmp_dir)?;
                    let em = mine_em(t, tau, m, l, r, &cfg)?;
                    if format_patterns(t, &em) != format_patterns(t, &im) {
                        report(format!("mine-em\ttau={tau} m={m} l={l} r={r}"));
                    }
                    runs += 1;
                }
            }
        }
    }

    let full = build_index(t);
    let b = (m_max + l_max + r_max) as u32;
    let reduced = build_optimized_index(t, b)?;
    let mut queries = 0u64;
    for m in 1..=m_max {
        if m > n {
            break;
        }
        let payload = t.payload().to_vec();
        let mut seen: BTreeSet<&[u8]> = BTreeSet::new();
        for i in 0..=(n - m) {
            seen.insert(&payload[i..i + m]);
        }
        for p in seen {
            let occ: Vec<usize> =
                (1..=n - m + 1).filter(|&i| &payload[i - 1..i - 1 + m] == p).collect();
            for l in 0..=l_max {
                for r in 0..=r_max {
                    let want =
                        occ.iter().map(|&i| flank_pair(t, i, m, l, r)).collect::<BTreeSet<_>>();
                    debug_assert_eq!(want, context_oracle(t, p, l, r));
                    let want = want.len() as u64;
                    if full.count(p, l, r)? != want {
                        report(format!(
                            "count-full\tP={} l={l} r={r}",
                            String::from_utf8_lossy(p)
                        ));
                    }
                    if reduced.count(p, l, r)? != want {
                        report(format!(
                            "count-reduced\tP={} l={l} r={r} bound={b}",
                            String::from_utf8_lossy(p)
                        ));
                    }
                    queries += 1;
                }
            }
        }
    }

    let mut out = std::io::stdout().lock();
    for what in &lines {
        writeln!(out, "MISMATCH\t{what}")?;
    }
    writeln!(out, "checked\tmine_runs={runs}\tcount_queries={queries}\tmismatches={mismatches}")?;
    Ok(if mismatches == 0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
}
