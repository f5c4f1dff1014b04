//! `esc` — analyze distribution families, generate keys, encrypt/decrypt
//! fixed-width records, and run the exact verification suite.
//!
//! Exit codes: 0 success (all checks pass), 1 a verification check failed,
//! 2 usage or parse error (including any operational failure such as a
//! fingerprint mismatch), 3 enumeration/resource guard exceeded.

mod records;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use esc_core::ratio::ratio_to_string;
use esc_core::sbcipher::DEFAULT_PLAN_MAX_ELL;
use esc_core::{
    build_code, build_shtarkov, decrypt_with_space, delta_gap, encrypt, fingerprint,
    gf2::modulus_to_string, key_from_file_string, key_to_file_string, parse_family, plan_params,
    CipherParams, CiphertextContainer, CodeTable, DeltaSource, Error, FamilyKind, FamilySpec,
    Guards, Key, RandomSource, Result, SecurityMode, ShtarkovModel, SmallBiasSpace,
};

use records::{parse_records, render_records, RecordFormat};

#[derive(Parser)]
#[command(
    name = "esc",
    version,
    about = "Entropically secure cipher for partially known sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a family: Shtarkov model, code size, and key-length plan.
    Analyze(AnalyzeArgs),
    /// Generate a key file sized for a family and leakage target.
    Keygen(KeygenArgs),
    /// Encrypt a record file.
    Encrypt(EncryptArgs),
    /// Decrypt a container file.
    Decrypt(DecryptArgs),
    /// Run the exhaustive verification suite against a family.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Entropic,
    Indist,
}

impl From<ModeArg> for SecurityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Entropic => SecurityMode::EntropicSecurity,
            ModeArg::Indist => SecurityMode::Indistinguishability,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DeltaArg {
    /// Size the key for the always-valid bound ceil(log2 S_P) + 2.
    Bound,
    /// Size the key for the exactly computed min-entropy gap.
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecordsArg {
    Text,
    Binary,
}

impl From<RecordsArg> for RecordFormat {
    fn from(r: RecordsArg) -> Self {
        match r {
            RecordsArg::Text => RecordFormat::Text,
            RecordsArg::Binary => RecordFormat::Binary,
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    /// Family configuration file.
    #[arg(long)]
    family: PathBuf,
    /// Leakage target, in (0, 1).
    #[arg(long)]
    epsilon: f64,
    /// Security notion the key budget targets.
    #[arg(long, value_enum, default_value = "entropic")]
    mode: ModeArg,
    /// Gap accounting used to size the key.
    #[arg(long, value_enum, default_value = "bound")]
    delta: DeltaArg,
    /// Cap on the field degree the planner may choose.
    #[arg(long = "max-ell")]
    max_ell: Option<u32>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    plan: PlanArgs,
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Key file to write.
    #[arg(long = "out")]
    out: PathBuf,
    /// Deterministic key material (test mode).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EncryptArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Key file.
    #[arg(long)]
    key: PathBuf,
    /// Plaintext record file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Container file to write.
    #[arg(long = "out")]
    out: PathBuf,
    /// Deterministic filler bits (test mode).
    #[arg(long)]
    seed: Option<u64>,
    /// Record encoding of the plaintext file.
    #[arg(long, value_enum, default_value = "text")]
    records: RecordsArg,
}

#[derive(Args)]
struct DecryptArgs {
    /// Family configuration file.
    #[arg(long)]
    family: PathBuf,
    /// Key file.
    #[arg(long)]
    key: PathBuf,
    /// Container file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Plaintext record file to write.
    #[arg(long = "out")]
    out: PathBuf,
    /// Record encoding of the plaintext file.
    #[arg(long, value_enum, default_value = "text")]
    records: RecordsArg,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Override the n enumeration guard (default 8).
    #[arg(long = "max-n")]
    max_n: Option<u32>,
    /// Adversarial override: force the field degree below the planner's
    /// choice to demonstrate a detectable failure.
    #[arg(long = "force-ell")]
    force_ell: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Keygen(args) => cmd_keygen(args),
        Command::Encrypt(args) => cmd_encrypt(args),
        Command::Decrypt(args) => cmd_decrypt(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::GuardExceeded(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// Everything the planning-based commands share: family, model, table, and
/// sized parameters.
struct Pipeline {
    family: FamilySpec,
    model: ShtarkovModel,
    table: CodeTable,
    params: CipherParams,
    gap: Option<f64>,
}

fn build_pipeline(plan: &PlanArgs) -> Result<Pipeline> {
    let text = fs::read_to_string(&plan.family)?;
    let family = parse_family(&text)?;
    let model = build_shtarkov(&family)?;
    let table = build_code(&model)?;
    let (delta_source, gap) = match plan.delta {
        DeltaArg::Bound => (DeltaSource::Bound, None),
        DeltaArg::Exact => {
            let gap = delta_gap(&table, &family)?;
            (DeltaSource::Exact(gap), Some(gap))
        }
    };
    let params = plan_params(
        model.s_p(),
        family.n(),
        table.n_star(),
        plan.epsilon,
        SecurityMode::from(plan.mode),
        delta_source,
        plan.max_ell.unwrap_or(DEFAULT_PLAN_MAX_ELL),
    )?;
    Ok(Pipeline {
        family,
        model,
        table,
        params,
        gap,
    })
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<u8> {
    let p = build_pipeline(&args.plan)?;
    println!("n: {}", p.family.n());
    if p.family.kind() == FamilyKind::Explicit {
        println!("members: {}", p.family.members().len());
    }
    println!(
        "s_p: {} ({:.6})",
        ratio_to_string(p.model.s_p()),
        esc_core::ratio::to_f64_lossy(p.model.s_p())
    );
    println!("n_star: {}", p.table.n_star());
    println!("delta_hat: {}", p.params.delta_hat);
    if let Some(gap) = p.gap {
        println!("delta_gap: {gap}");
    }
    println!("k_theory: {}", p.params.k_theory);
    println!("k_actual: {}", p.params.k_actual);
    println!(
        "expansion: {}",
        p.table.n_star() as i64 - p.family.n() as i64
    );
    println!("ell: {}", p.params.ell);
    println!(
        "modulus: {}",
        modulus_to_string(esc_core::SmallBiasSpace::new(p.params.ell, p.table.n_star())?.modulus())
    );
    println!("delta_req: {}", p.params.delta_req);
    println!("k_theory_statement: {}", p.params.k_theory_statement);
    Ok(0)
}

fn cmd_keygen(args: KeygenArgs) -> Result<u8> {
    let p = build_pipeline(&args.plan)?;
    let space = esc_core::build_space(&p.params)?;
    let mut rnd = match args.seed {
        Some(seed) => RandomSource::seeded(seed),
        None => RandomSource::os(),
    };
    let key = Key::generate(p.params.ell, &mut rnd)?;
    fs::write(&args.out, key_to_file_string(&space, &key))?;
    Ok(0)
}

/// Loads a key file and checks it against a planned space.
fn load_key(path: &PathBuf, space: &SmallBiasSpace) -> Result<Key> {
    let text = fs::read_to_string(path)?;
    let (ell, modulus, key) = key_from_file_string(&text)?;
    if ell != space.ell() || modulus != space.modulus() {
        return Err(Error::HeaderMismatch(format!(
            "key file was generated for ell={ell} modulus={}, but these parameters need ell={} modulus={}",
            modulus_to_string(modulus),
            space.ell(),
            modulus_to_string(space.modulus()),
        )));
    }
    Ok(key)
}

fn cmd_encrypt(args: EncryptArgs) -> Result<u8> {
    let p = build_pipeline(&args.plan)?;
    let space = esc_core::build_space(&p.params)?;
    let key = load_key(&args.key, &space)?;
    let fp = fingerprint(&p.family);
    let data = fs::read(&args.input)?;
    let messages = parse_records(&data, p.family.n() as usize, RecordFormat::from(args.records))?;
    let mut rnd = match args.seed {
        Some(seed) => RandomSource::seeded(seed),
        None => RandomSource::os(),
    };
    let mut out = Vec::new();
    for m in &messages {
        let container = encrypt(&p.table, &p.params, &space, &key, m, &mut rnd, fp)?;
        out.extend_from_slice(&container.to_bytes());
    }
    fs::write(&args.out, out)?;
    Ok(0)
}

fn cmd_decrypt(args: DecryptArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.family)?;
    let family = parse_family(&text)?;
    let model = build_shtarkov(&family)?;
    let table = build_code(&model)?;
    let fp = fingerprint(&family);

    let key_text = fs::read_to_string(&args.key)?;
    let (ell, modulus, key) = key_from_file_string(&key_text)?;
    let space = SmallBiasSpace::from_parts(ell, table.n_star(), modulus)?;

    let data = fs::read(&args.input)?;
    let mut messages = Vec::new();
    let mut offset = 0usize;
    while offset < data.len() {
        let (container, consumed) = CiphertextContainer::parse(&data[offset..])?;
        offset += consumed;
        messages.push(decrypt_with_space(&table, &space, &key, &container, fp)?);
    }
    fs::write(&args.out, render_records(&messages, RecordFormat::from(args.records)))?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let mut guards = Guards::default();
    if let Some(max_n) = args.max_n {
        guards.max_n = max_n;
    }
    if let Some(max_ell) = args.plan.max_ell {
        guards.max_ell = max_ell;
    }
    let text = fs::read_to_string(&args.plan.family)?;
    let report = esc_core::audit_config(
        &text,
        args.plan.epsilon,
        SecurityMode::from(args.plan.mode),
        matches!(args.plan.delta, DeltaArg::Exact),
        &guards,
        args.force_ell,
    )?;
    println!("{report}");
    Ok(if report.all_pass() { 0 } else { 1 })
}
