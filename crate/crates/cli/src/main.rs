//! Batch front end for the lefgrowth toolkit. Validates growth tables,
//! builds layered actions and their artifacts, emits growth-bound CSVs,
//! writes and replays embedding witnesses, and runs coset enumeration.
//!
//! Exit codes: 0 success, 1 mathematical failure or counterexample,
//! 2 usage error (bad flags, malformed input, missing files).
//!
//! Commands that write files accept `--manifest <path>` and record the
//! canonical parameter list plus a SHA-256 digest per output; `replay`
//! re-runs a manifest and fails unless every output is byte-identical.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use lefgrowth::elem_enrich::is_prime;
use lefgrowth::embeddings::{
    log10_of, write_bounds_csv, GrowthBoundRecord, PartialMapWitness, WitnessStatus,
};
use lefgrowth::permissible::{
    build_finite_action, build_omega, builtin_table, check_permissible, irregular_table,
    PermissibleFn,
};
use lefgrowth::presentations::Presentation;
use lefgrowth::schreier::{write_growth_csv, ActionGraph};
use lefgrowth::sym_enrich::{build_phi_for_approx, enrich_bounds_table};
use lefgrowth::todd_coxeter::{todd_coxeter_with, TcStatus, TcStrategy};

const EXIT_OK: u8 = 0;
const EXIT_MATH: u8 = 1;

#[derive(Parser)]
#[command(name = "lefgrowth", version, about = "Exact growth artifacts for layered group actions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a growth table against the layering conditions
    Permissible(PermissibleArgs),
    /// Build the layered action, check its growth, and emit DOT/CSV
    Omega(OmegaArgs),
    /// Emit growth-bound records over a level range as CSV
    Bounds(BoundsArgs),
    /// Build a local-embedding witness file for a finite approximation
    Witness(WitnessArgs),
    /// Re-verify a witness file by deterministic recomputation
    Verify(VerifyArgs),
    /// Coset enumeration over text presentations
    #[command(subcommand)]
    Tc(TcCmd),
    /// Re-run a manifest and compare output digests
    Replay(ReplayArgs),
}

/// Growth-table source shared by table-consuming commands. Exactly one
/// of the three inputs must be given.
#[derive(Args, Clone)]
struct TableSource {
    /// Builtin family: linear, pow2, poly:<alpha>, odd, irregular
    #[arg(long)]
    builtin: Option<String>,
    /// Comma-separated values, e.g. 1,2,3,5
    #[arg(long)]
    table: Option<String>,
    /// Path to a JSON array of values
    #[arg(long)]
    json: Option<PathBuf>,
}

impl TableSource {
    /// Resolves to a raw table; builtin families are generated at
    /// `builtin_len` entries.
    fn resolve(&self, builtin_len: usize) -> anyhow::Result<Vec<u64>> {
        match (&self.builtin, &self.table, &self.json) {
            (Some(name), None, None) => Ok(match name.as_str() {
                "odd" => PermissibleFn::odd(builtin_len).values().to_vec(),
                "irregular" => irregular_table(),
                other => builtin_table(other, builtin_len)?,
            }),
            (None, Some(csv), None) => csv
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u64>()
                        .with_context(|| format!("bad table entry '{t}'"))
                })
                .collect(),
            (None, None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str::<Vec<u64>>(&text)
                    .with_context(|| format!("parsing {} as a JSON array", path.display()))
            }
            _ => bail!("provide exactly one of --builtin, --table, --json"),
        }
    }

    /// The canonical parameter fragment for manifests.
    fn params(&self) -> Vec<String> {
        match (&self.builtin, &self.table, &self.json) {
            (Some(name), _, _) => vec!["--builtin".into(), name.clone()],
            (_, Some(csv), _) => vec!["--table".into(), csv.clone()],
            (_, _, Some(path)) => vec!["--json".into(), path.display().to_string()],
            _ => Vec::new(),
        }
    }
}

#[derive(Args)]
struct PermissibleArgs {
    #[command(flatten)]
    source: TableSource,
    /// Table length for builtin families
    #[arg(long, default_value_t = 10)]
    depth: usize,
}

#[derive(Args)]
struct OmegaArgs {
    #[command(flatten)]
    source: TableSource,
    /// Universe depth; the table must cover indices 0..=depth
    #[arg(long)]
    depth: usize,
    /// Write the ball graph in DOT format
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write the measured growth as radius,ball_size CSV
    #[arg(long)]
    growth_csv: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Flavor {
    /// Symmetric enrichment rows: order upper bounds and quotient floors
    Sym,
    /// Elementary enrichment over Z/q with q = 2^(n+1) + 1
    ElemZ,
    /// Elementary enrichment over a prime field
    ElemP,
}

impl Flavor {
    fn name(self) -> &'static str {
        match self {
            Flavor::Sym => "sym",
            Flavor::ElemZ => "elem-z",
            Flavor::ElemP => "elem-p",
        }
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    source: TableSource,
    #[arg(long, value_enum)]
    flavor: Flavor,
    /// Inclusive level range lo:hi; lo > hi emits only the header
    #[arg(long)]
    range: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Window sizes above this skip the order computation
    #[arg(long, default_value_t = 64)]
    window_cap: usize,
    /// Coefficient prime for the elem-p flavor
    #[arg(long, default_value_t = 2)]
    prime: u64,
    /// CSV output path; stdout when omitted
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    source: TableSource,
    /// Approximation level n (at least 2); the table must cover 2n+1
    #[arg(long)]
    level: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampled pair count for windows too large to check exhaustively
    #[arg(long, default_value_t = 20_000)]
    pairs: usize,
    /// Witness JSON output path
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Witness file written by the witness command
    file: PathBuf,
}

#[derive(Subcommand)]
enum TcCmd {
    /// Enumerate cosets for a presentation in text format
    Run(TcRunArgs),
}

#[derive(Args)]
struct TcRunArgs {
    /// Presentation file: one generator-names line, one relator per line
    #[arg(long)]
    file: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
    #[arg(long, value_enum, default_value_t = Strategy::Hlt)]
    strategy: Strategy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Hlt,
    Felsch,
}

#[derive(Args)]
struct ReplayArgs {
    /// Manifest file written by a previous run
    manifest: PathBuf,
}

/// Run record: enough to re-execute the command and check its outputs.
#[derive(Serialize, Deserialize)]
struct RunManifest {
    command: String,
    parameters: Vec<String>,
    seed: Option<u64>,
    version: String,
    outputs: Vec<OutputRecord>,
}

#[derive(Serialize, Deserialize)]
struct OutputRecord {
    path: String,
    sha256: String,
}

/// Accumulates output digests for a command run.
struct ManifestSink {
    command: String,
    parameters: Vec<String>,
    seed: Option<u64>,
    outputs: Vec<OutputRecord>,
}

impl ManifestSink {
    fn new(command: &str, parameters: Vec<String>, seed: Option<u64>) -> ManifestSink {
        ManifestSink {
            command: command.into(),
            parameters,
            seed,
            outputs: Vec::new(),
        }
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(OutputRecord {
            path: path.display().to_string(),
            sha256: hex_digest(bytes),
        });
        Ok(())
    }

    fn finish(self, manifest_path: Option<&Path>) -> anyhow::Result<()> {
        let Some(path) = manifest_path else {
            return Ok(());
        };
        let record = RunManifest {
            command: self.command,
            parameters: self.parameters,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").into(),
            outputs: self.outputs,
        };
        let text = serde_json::to_string_pretty(&record)?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Joins a relative path under --out-dir; absolute paths pass through.
fn under(dir: &Option<PathBuf>, path: &Path) -> PathBuf {
    match dir {
        Some(d) if path.is_relative() => d.join(path),
        _ => path.to_path_buf(),
    }
}

fn parse_range(text: &str) -> anyhow::Result<(usize, usize)> {
    let (lo, hi) = text
        .split_once(':')
        .with_context(|| format!("range '{text}' is not of the form lo:hi"))?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 0 for --help/--version and 2 for usage errors.
        Err(e) => e.exit(),
    };
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> anyhow::Result<u8> {
    match cmd {
        Cmd::Permissible(args) => cmd_permissible(&args),
        Cmd::Omega(args) => cmd_omega(&args),
        Cmd::Bounds(args) => cmd_bounds(&args),
        Cmd::Witness(args) => cmd_witness(&args),
        Cmd::Verify(args) => cmd_verify(&args),
        Cmd::Tc(TcCmd::Run(args)) => cmd_tc_run(&args),
        Cmd::Replay(args) => cmd_replay(&args),
    }
}

fn cmd_permissible(args: &PermissibleArgs) -> anyhow::Result<u8> {
    let table = args.source.resolve(args.depth)?;
    let violations = check_permissible(&table);
    let report = json!({
        "table": table,
        "ok": violations.is_empty(),
        "violations": violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_MATH
    })
}

fn cmd_omega(args: &OmegaArgs) -> anyhow::Result<u8> {
    if args.depth == 0 {
        bail!("--depth must be at least 1");
    }
    let table = args.source.resolve(args.depth + 1)?;
    let f = PermissibleFn::new(table)?;
    let omega = build_omega(&f, args.depth)?;
    let graph = ActionGraph::ball(&omega, args.depth - 1)?;
    let growth = graph.ball_sizes();

    let mut params = vec!["omega".to_string()];
    params.extend(args.source.params());
    params.extend(["--depth".into(), args.depth.to_string()]);
    if let Some(p) = &args.dot {
        params.extend(["--dot".into(), p.display().to_string()]);
    }
    if let Some(p) = &args.growth_csv {
        params.extend(["--growth-csv".into(), p.display().to_string()]);
    }
    if let Some(d) = &args.out_dir {
        params.extend(["--out-dir".into(), d.display().to_string()]);
    }
    let mut sink = ManifestSink::new("omega", params, None);

    // The measured ball sizes must reproduce the input table.
    let expected: Vec<usize> = f.values()[..args.depth].iter().map(|&v| v as usize).collect();
    if growth != expected {
        let report = json!({
            "ok": false,
            "counterexample": {
                "measured": growth,
                "expected": expected,
            },
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(EXIT_MATH);
    }

    if let Some(dot_path) = &args.dot {
        let mut buf = Vec::new();
        graph.write_dot(&mut buf)?;
        sink.write(&under(&args.out_dir, dot_path), &buf)?;
    }
    if let Some(csv_path) = &args.growth_csv {
        let mut buf = Vec::new();
        write_growth_csv(&growth, &mut buf)?;
        sink.write(&under(&args.out_dir, csv_path), &buf)?;
    }

    let report = json!({
        "ok": true,
        "depth": args.depth,
        "points": omega.points().len(),
        "growth": growth,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    sink.finish(args.manifest.as_deref())?;
    Ok(EXIT_OK)
}

/// Elementary-flavor rows: the reduction target `E(Z/q) x| Q_n` has at
/// most `q^(|X_n|^2) * |Q_n|` elements, an order upper bound at level n.
/// Over Z the modulus is the smallest integer satisfying the injectivity
/// threshold, `q = 2^(n+1) + 1`; over a prime field it is `p`.
fn elem_bounds_rows(
    f: &PermissibleFn,
    lo: usize,
    hi: usize,
    seed: u64,
    window_cap: usize,
    flavor: Flavor,
    prime: u64,
) -> anyhow::Result<Vec<GrowthBoundRecord>> {
    if lo < 2 && lo <= hi {
        bail!("elementary bound rows need level at least 2");
    }
    if flavor == Flavor::ElemP && !is_prime(prime) {
        bail!("--prime {prime} is not prime");
    }
    let mut out = Vec::new();
    for n in lo..=hi {
        let x_size = *f
            .values()
            .get(2 * n)
            .with_context(|| format!("table too short for level {n}: index {} needed", 2 * n))?
            as usize;
        if x_size > window_cap {
            out.push(GrowthBoundRecord {
                radius: n as u64,
                lower: None,
                lower_provenance: String::new(),
                upper: None,
                upper_provenance: String::new(),
                notes: format!(
                    "window of {x_size} points exceeds the cap of {window_cap}; upper bound skipped"
                ),
            });
            continue;
        }
        let approx = build_finite_action(f, n, seed)?;
        let q = match flavor {
            Flavor::ElemZ => (BigUint::from(1u32) << (n + 1)) + 1u32,
            Flavor::ElemP => BigUint::from(prime),
            Flavor::Sym => unreachable!("sym flavor handled separately"),
        };
        let cells = u32::try_from(x_size * x_size).context("window too large")?;
        let upper = q.pow(cells) * approx.q_group.order();
        let mut notes = format!("q = {q}, |X_n| = {x_size}");
        if upper > BigUint::from(u64::MAX) {
            notes.push_str(&format!("; log10 = {:.3}", log10_of(&upper)));
        }
        out.push(GrowthBoundRecord {
            radius: n as u64,
            lower: None,
            lower_provenance: String::new(),
            upper: Some(upper),
            upper_provenance: "congruence enrichment order q^(|X_n|^2) * |Q_n|".into(),
            notes,
        });
    }
    Ok(out)
}

fn cmd_bounds(args: &BoundsArgs) -> anyhow::Result<u8> {
    let (lo, hi) = parse_range(&args.range)?;
    let builtin_len = 2 * hi + 2;
    let table = args.source.resolve(builtin_len)?;
    let f = PermissibleFn::new(table)?;
    let records = if lo > hi {
        Vec::new()
    } else {
        match args.flavor {
            Flavor::Sym => enrich_bounds_table(&f, lo..=hi, args.seed, args.window_cap)?,
            Flavor::ElemZ | Flavor::ElemP => elem_bounds_rows(
                &f,
                lo,
                hi,
                args.seed,
                args.window_cap,
                args.flavor,
                args.prime,
            )?,
        }
    };

    let mut buf = Vec::new();
    write_bounds_csv(&records, &mut buf)?;

    let mut params = vec!["bounds".to_string()];
    params.extend(args.source.params());
    params.extend([
        "--flavor".into(),
        args.flavor.name().into(),
        "--range".into(),
        args.range.clone(),
        "--seed".into(),
        args.seed.to_string(),
        "--window-cap".into(),
        args.window_cap.to_string(),
    ]);
    if args.flavor == Flavor::ElemP {
        params.extend(["--prime".into(), args.prime.to_string()]);
    }
    if let Some(p) = &args.csv {
        params.extend(["--csv".into(), p.display().to_string()]);
    }
    if let Some(d) = &args.out_dir {
        params.extend(["--out-dir".into(), d.display().to_string()]);
    }
    let mut sink = ManifestSink::new("bounds", params, Some(args.seed));

    match &args.csv {
        Some(path) => {
            sink.write(&under(&args.out_dir, path), &buf)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "rows": records.len(),
                    "csv": under(&args.out_dir, path).display().to_string(),
                }))?
            );
        }
        None => print!("{}", String::from_utf8(buf).expect("CSV is UTF-8")),
    }
    sink.finish(args.manifest.as_deref())?;
    Ok(EXIT_OK)
}

/// On-disk witness format: the construction parameters plus the checked
/// partial map, enough to recompute everything deterministically.
#[derive(Serialize, Deserialize)]
struct WitnessEnvelope {
    kind: String,
    table: Vec<u64>,
    level: usize,
    seed: u64,
    sampled_pairs: usize,
    support_checks: usize,
    support_violations: usize,
    target_order: String,
    witness: PartialMapWitness,
}

const WITNESS_KIND: &str = "sym-enrichment-local-embedding";

fn cmd_witness(args: &WitnessArgs) -> anyhow::Result<u8> {
    let table = args.source.resolve(2 * args.level + 2)?;
    let f = PermissibleFn::new(table.clone())?;
    let approx = build_finite_action(&f, args.level, args.seed)?;
    let report = build_phi_for_approx(&approx, args.seed, args.pairs)?;
    let envelope = WitnessEnvelope {
        kind: WITNESS_KIND.into(),
        table,
        level: args.level,
        seed: args.seed,
        sampled_pairs: args.pairs,
        support_checks: report.support_checks,
        support_violations: report.support_violations,
        target_order: report.target_order.to_string(),
        witness: report.witness.clone(),
    };

    let mut params = vec!["witness".to_string()];
    params.extend(args.source.params());
    params.extend([
        "--level".into(),
        args.level.to_string(),
        "--seed".into(),
        args.seed.to_string(),
        "--pairs".into(),
        args.pairs.to_string(),
        "--out".into(),
        args.out.display().to_string(),
    ]);
    if let Some(d) = &args.out_dir {
        params.extend(["--out-dir".into(), d.display().to_string()]);
    }
    let mut sink = ManifestSink::new("witness", params, Some(args.seed));
    let text = serde_json::to_string_pretty(&envelope)?;
    sink.write(&under(&args.out_dir, &args.out), text.as_bytes())?;
    sink.finish(args.manifest.as_deref())?;

    let summary = json!({
        "verified": report.verified(),
        "domain_size": report.witness.domain_size,
        "pairs_checked": report.witness.pairs_checked,
        "products_inside": report.witness.products_inside,
        "support_checks": report.support_checks,
        "target_order": report.target_order.to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if report.verified() {
        Ok(EXIT_OK)
    } else {
        println!("counterexample: {:?}", report.witness.status);
        Ok(EXIT_MATH)
    }
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    let text = fs::read_to_string(&args.file)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let envelope: WitnessEnvelope =
        serde_json::from_str(&text).context("malformed witness file")?;
    if envelope.kind != WITNESS_KIND {
        bail!("unknown witness kind '{}'", envelope.kind);
    }
    if let WitnessStatus::Failed(c) = &envelope.witness.status {
        println!("stored witness already failed: {c:?}");
        return Ok(EXIT_MATH);
    }

    let f = PermissibleFn::new(envelope.table.clone())?;
    let approx = build_finite_action(&f, envelope.level, envelope.seed)?;
    let report = build_phi_for_approx(&approx, envelope.seed, envelope.sampled_pairs)?;

    if !report.verified() {
        println!("recomputation failed: {:?}", report.witness.status);
        return Ok(EXIT_MATH);
    }
    if report.witness.table.len() != envelope.witness.table.len() {
        println!(
            "counterexample: stored table has {} entries, recomputation {}",
            envelope.witness.table.len(),
            report.witness.table.len()
        );
        return Ok(EXIT_MATH);
    }
    for (stored, fresh) in envelope.witness.table.iter().zip(&report.witness.table) {
        if stored != fresh {
            println!(
                "counterexample: stored entry {} -> {} disagrees with recomputed {} -> {}",
                stored.0, stored.1, fresh.0, fresh.1
            );
            return Ok(EXIT_MATH);
        }
    }
    let summary = json!({
        "verified": true,
        "domain_size": report.witness.domain_size,
        "pairs_checked": report.witness.pairs_checked,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(EXIT_OK)
}

fn cmd_tc_run(args: &TcRunArgs) -> anyhow::Result<u8> {
    let text = fs::read_to_string(&args.file)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let pres = Presentation::from_text(&text)?;
    let strategy = match args.strategy {
        Strategy::Hlt => TcStrategy::Hlt,
        Strategy::Felsch => TcStrategy::Felsch,
    };
    let table = todd_coxeter_with(&pres, args.cap, strategy)?;
    let status = match table.status() {
        TcStatus::Complete => "complete",
        TcStatus::Collapsed => "collapsed",
        TcStatus::Aborted => "aborted",
    };
    let report = json!({
        "generators": pres.rank(),
        "relators": pres.relators.len(),
        "status": status,
        "cosets": table.coset_count(),
        "defined_total": table.defined_total(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if table.status() == TcStatus::Aborted {
        EXIT_MATH
    } else {
        EXIT_OK
    })
}

fn cmd_replay(args: &ReplayArgs) -> anyhow::Result<u8> {
    let text = fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading {}", args.manifest.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text).context("malformed manifest")?;
    let mut argv = vec!["lefgrowth".to_string()];
    argv.extend(manifest.parameters.iter().cloned());
    let cli = Cli::try_parse_from(&argv).context("manifest parameters do not parse")?;
    if matches!(cli.cmd, Cmd::Replay(_)) {
        bail!("manifests cannot record replay runs");
    }
    let code = run(cli.cmd)?;
    if code != EXIT_OK {
        println!("replayed command exited {code}");
        return Ok(code);
    }
    for output in &manifest.outputs {
        let bytes = fs::read(&output.path)
            .with_context(|| format!("reading replayed output {}", output.path))?;
        let fresh = hex_digest(&bytes);
        if fresh != output.sha256 {
            println!(
                "counterexample: {} digest {} != recorded {}",
                output.path, fresh, output.sha256
            );
            return Ok(EXIT_MATH);
        }
    }
    println!(
        "replay reproduced {} output(s) byte-identically",
        manifest.outputs.len()
    );
    Ok(EXIT_OK)
}
