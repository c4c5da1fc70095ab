//! Command line front end for the cocycle toolkit.
//!
//! Four subcommands cover the pipeline: `spectrum` prints the Lyapunov
//! exponents of one periodic orbit, `tower` grows and verifies a tower
//! of periodic orbits with a vanishing center exponent, `equalize`
//! deforms an explicit matrix sequence until two consecutive exponents
//! merge, and `classify` labels a model by its orbit inventory.
//!
//! Exit codes are stable: 0 success, 1 usage or parse problems, 2 an
//! infeasible construction (including failed tower verification), 3 a
//! hypothesis refusal (the input carries a dominated splitting that
//! makes the request meaningless).

mod manifest;
mod seqfile;

use clap::{Args, Parser, Subcommand};
use ergoshift::{
    build_tower, builtin, classify_case, equalize, exact_spectrum, monotonicity_report,
    partial_exponent, total_variation, ClassReport, ClassifyOptions, Error, ModelConfig,
    TowerSchedule, Word, ZeroExponentReport,
};
use manifest::{emit, write_stamp, Manifest};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Window-search cap handed to the tower verifier: windows are multiples
/// of the level period, and in practice one or two periods suffice.
const VERIFY_K_MAX: u32 = 64;

#[derive(Parser)]
#[command(name = "ergoshift", version, about = "Periodic-orbit machinery for matrix cocycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lyapunov exponents of one periodic orbit
    Spectrum(SpectrumArgs),
    /// Grow a periodic-orbit tower and verify its zero-exponent limit
    Tower(TowerArgs),
    /// Deform a matrix sequence until two consecutive exponents merge
    Equalize(EqualizeArgs),
    /// Label a model by the spectra and splittings of its inventory
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct SpectrumArgs {
    /// Model: a TOML file path, or builtin:NAME
    #[arg(long)]
    model: String,
    /// Periodic word over the model alphabet, e.g. 001
    #[arg(long)]
    word: String,
    /// Also report finite-window values over this many steps
    #[arg(long)]
    window: Option<u64>,
    /// Output directory (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TowerArgs {
    /// Model: a TOML file path, or builtin:NAME
    #[arg(long)]
    model: String,
    /// Seed word override (defaults to the model's seed)
    #[arg(long)]
    word: Option<String>,
    /// Number of levels to grow above the seed
    #[arg(long, default_value_t = 8)]
    levels: usize,
    /// Shadowing quality of level 1; later levels shrink by 15/32
    #[arg(long, default_value_t = 0.234375)]
    gamma1: f64,
    /// Bound the extrapolated center exponent must meet
    #[arg(long, default_value_t = 0.00390625)]
    tol: f64,
    /// Output directory for the level table, cylinder series and report
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EqualizeArgs {
    /// Plain-text matrix sequence: one row per line, blank line between
    /// matrices, # comments
    sequence: PathBuf,
    /// Merge exponents index and index+1
    #[arg(long, default_value_t = 1)]
    index: usize,
    /// Operator-norm budget for each perturbed step
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Scan resolution of the deformation parameter
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Endpoint gap to reach
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Domination horizon checked before deforming
    #[arg(long, default_value_t = 20)]
    tmax: u32,
    /// Output directory (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Model: a TOML file path, or builtin:NAME
    #[arg(long)]
    model: String,
    /// Word inventory file, one word per line (defaults to the model's)
    inventory: Option<PathBuf>,
    /// Largest time scale tried when certifying domination
    #[arg(long, default_value_t = 20)]
    tmax: u32,
    /// Output directory (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Infeasible { .. }
            | Error::TunerInfeasible { .. }
            | Error::PeriodBudget { .. }
            | Error::WindowNotFound { .. }
            | Error::NoSplitting { .. }
            | Error::DegenerateSpectrum { .. }
            | Error::BudgetExhausted { .. }
            | Error::NonHyperbolic { .. }
            | Error::WitnessInvalid { .. } => 2,
            Error::DominationHypothesis { .. } => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure { code: 1, message: format!("cannot read {}: {e}", path.display()) })
}

fn load_model(spec: &str) -> Result<ModelConfig, Failure> {
    match spec.strip_prefix("builtin:") {
        Some(name) => Ok(builtin(name)?),
        None => Ok(ModelConfig::parse_toml(&read_input(Path::new(spec))?)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are clean exits; anything else is usage.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Tower(a) => cmd_tower(a),
        Command::Equalize(a) => cmd_equalize(a),
        Command::Classify(a) => cmd_classify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<(), Failure> {
    let cfg = load_model(&a.model)?;
    let cocycle = cfg.cocycle()?;
    let word = Word::parse(&a.word, cfg.alphabet)?;
    let spec = exact_spectrum(&cocycle, &word)?;

    let mut man = Manifest::new("spectrum")
        .input("model", &cfg.name, cfg.to_toml().as_bytes())
        .param("word", &a.word);
    if let Some(m) = a.window {
        man = man.param("window", m);
    }
    let mut text = man.header();
    text.push_str(if a.window.is_some() { "j,chi,L,L_window\n" } else { "j,chi,L\n" });
    for j in 1..=spec.dim() {
        let chi = spec.exponent(j);
        let l = spec.partial_sum(j);
        match a.window {
            Some(m) => {
                let lw = partial_exponent(&cocycle, &word, 0, j, m)?;
                text.push_str(&format!("{j},{chi},{l},{lw}\n"));
            }
            None => text.push_str(&format!("{j},{chi},{l}\n")),
        }
    }
    emit(a.out.as_deref(), "spectrum.csv", &text)?;
    if let Some(dir) = &a.out {
        write_stamp(dir, "spectrum")?;
    }
    Ok(())
}

fn cmd_tower(a: TowerArgs) -> Result<(), Failure> {
    let cfg = load_model(&a.model)?;
    let cocycle = cfg.cocycle()?;
    let seed = match &a.word {
        Some(w) => Word::parse(w, cfg.alphabet)?,
        None => cfg.seed_word()?,
    };
    let schedule = TowerSchedule::geometric(a.levels, a.gamma1);
    let tuner = cfg.tuner_words()?;
    let mut tower = build_tower(cocycle, seed.clone(), cfg.center_index()?, schedule, tuner)?;

    // Levels above the seed get their windows from the verifier; with
    // none grown there is nothing to verify and the run passes trivially.
    let report = if a.levels > 0 { Some(tower.verify_zero_exponent(VERIFY_K_MAX)?) } else { None };

    let man = |cmd: &str| {
        Manifest::new(cmd)
            .input("model", &cfg.name, cfg.to_toml().as_bytes())
            .param("word", &seed)
            .param("levels", a.levels)
            .param("gamma1", a.gamma1)
            .param("tol", a.tol)
    };

    let mut levels_csv = man("tower").header();
    let d = tower.dim();
    let chi_cols: Vec<String> = (1..=d).map(|j| format!("chi_{j}")).collect();
    levels_csv.push_str(&format!(
        "n,period,copies,gamma,kappa,epsilon,{},window_k,window_value\n",
        chi_cols.join(",")
    ));
    for (n, lv) in tower.levels.iter().enumerate() {
        let chis: Vec<String> =
            (1..=d).map(|j| format!("{}", lv.spectrum.exponent(j))).collect();
        let (wk, wv) = match &lv.window {
            Some(w) => (format!("{}", w.k), format!("{}", w.max_value)),
            None => (String::new(), String::new()),
        };
        levels_csv.push_str(&format!(
            "{n},{},{},{},{},{},{},{wk},{wv}\n",
            lv.period,
            lv.copies,
            lv.gamma,
            lv.kappa,
            lv.epsilon,
            chis.join(","),
        ));
    }
    emit(Some(&a.out), "levels.csv", &levels_csv)?;

    let mut cyl_csv = man("tower").header();
    cyl_csv.push_str("n,L,block,frequency,tv_from_previous\n");
    for len in 1..=3usize {
        let mut prev = None;
        for n in 0..tower.levels.len() {
            let cur = tower.cylinder_measures(n, len)?;
            let tv = match &prev {
                Some(p) => format!("{}", total_variation(p, &cur)),
                None => String::new(),
            };
            for (block, freq) in &cur {
                let name: String =
                    block.iter().map(|s| char::from_digit(*s as u32, 10).unwrap_or('?')).collect();
                cyl_csv.push_str(&format!("{n},{len},{name},{freq},{tv}\n"));
            }
            prev = Some(cur);
        }
    }
    emit(Some(&a.out), "cylinders.csv", &cyl_csv)?;

    let verdict = render_verification(report.as_ref(), a.tol);
    let mut verify_txt = man("tower").header();
    verify_txt.push_str(&verdict.text);
    emit(Some(&a.out), "verify.txt", &verify_txt)?;
    write_stamp(&a.out, "tower")?;

    if verdict.passed {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: format!("tower verification failed: {}", verdict.failing.join(", ")),
        })
    }
}

struct Verdict {
    text: String,
    passed: bool,
    failing: Vec<String>,
}

/// Renders the verification outcome; the extrapolated-limit check uses
/// the caller's tolerance instead of the library default.
fn render_verification(report: Option<&ZeroExponentReport>, tol: f64) -> Verdict {
    let mut text = String::new();
    let mut failing = Vec::new();
    let report = match report {
        Some(r) => r,
        None => {
            text.push_str("levels 0\nno levels grown; verification is vacuous\noverall pass\n");
            return Verdict { text, passed: true, failing };
        }
    };
    let mut check = |name: &str, ok: bool, detail: String| {
        let state = if ok { "pass" } else { "fail" };
        if detail.is_empty() {
            text.push_str(&format!("{name} {state}\n"));
        } else {
            text.push_str(&format!("{name} {state} {detail}\n"));
        }
        if !ok {
            failing.push(name.to_string());
        }
    };
    let chis: Vec<String> = report.center_exponents.iter().map(|x| format!("{x}")).collect();
    check("exponent-bounds", report.exponent_bounds_ok, format!("center=[{}]", chis.join(" ")));
    let ks: Vec<String> = report
        .window_ks
        .iter()
        .skip(1)
        .map(|k| k.map_or("none".to_string(), |v| v.to_string()))
        .collect();
    check("windows", report.windows_ok, format!("k=[{}]", ks.join(" ")));
    check("coverage", report.kappa_ok, String::new());
    let aitken_ok = report.aitken_estimate.abs() <= tol;
    check(
        "extrapolated-limit",
        aitken_ok,
        format!("estimate={} tol={tol}", report.aitken_estimate),
    );
    check("mass", report.mass_ok, format!("bound={}", report.mass_lower_bound));
    let passed = failing.is_empty();
    text.push_str(&format!("overall {}\n", if passed { "pass" } else { "fail" }));
    Verdict { text, passed, failing }
}

fn cmd_equalize(a: EqualizeArgs) -> Result<(), Failure> {
    let raw = read_input(&a.sequence)?;
    let mats = seqfile::parse_sequence(&raw)?;
    let (cocycle, word) = seqfile::sequence_cocycle(&mats)?;
    let report = equalize(&cocycle, &word, a.index, a.epsilon, a.grid, a.tmax, a.tol)?;
    let mono = monotonicity_report(&report.family, a.grid)?;

    let name = a.sequence.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let mut text = Manifest::new("equalize")
        .input("sequence", &name, seqfile::canonical_sequence(&mats).as_bytes())
        .param("index", a.index)
        .param("epsilon", a.epsilon)
        .param("grid", a.grid)
        .param("tol", a.tol)
        .param("tmax", a.tmax)
        .header();
    let d = cocycle.dim();
    let chi_cols: Vec<String> = (1..=d).map(|j| format!("chi_{j}")).collect();
    text.push_str(&format!("t,{}\n", chi_cols.join(",")));
    for k in 0..=a.grid {
        let s = k as f64 / a.grid as f64;
        let spec = report.family.spectrum(s)?;
        let chis: Vec<String> = (1..=d).map(|j| format!("{}", spec.exponent(j))).collect();
        text.push_str(&format!("{s},{}\n", chis.join(",")));
    }
    let end = report.family.spectrum(1.0)?;
    text.push_str(&format!("# endpoint-gap {}\n", report.achieved_gap));
    text.push_str(&format!("# t-star {}\n", report.t_star));
    text.push_str(&format!(
        "# endpoint-exponents {}\n",
        (1..=d).map(|j| format!("{}", end.exponent(j))).collect::<Vec<_>>().join(" ")
    ));
    text.push_str(&format!("# max-monotonicity-rise {}\n", mono.max_rise));
    emit(a.out.as_deref(), "equalize.csv", &text)?;
    if let Some(dir) = &a.out {
        write_stamp(dir, "equalize")?;
    }
    Ok(())
}

fn cmd_classify(a: ClassifyArgs) -> Result<(), Failure> {
    let cfg = load_model(&a.model)?;
    let cocycle = cfg.cocycle()?;
    let (words, inventory_note) = match &a.inventory {
        Some(path) => {
            let raw = read_input(path)?;
            (seqfile::parse_word_lines(&raw, cfg.alphabet)?, "file")
        }
        None => (cfg.inventory_words()?, "model"),
    };
    let opts = ClassifyOptions { t_max: a.tmax, ..ClassifyOptions::default() };
    let report = classify_case(&cocycle, &words, opts)?;

    let mut text = Manifest::new("classify")
        .input("model", &cfg.name, cfg.to_toml().as_bytes())
        .param("inventory", inventory_note)
        .param("tmax", a.tmax)
        .header();
    text.push_str(&render_class_report(&report));
    emit(a.out.as_deref(), "classify.txt", &text)?;
    if let Some(dir) = &a.out {
        write_stamp(dir, "classify")?;
    }
    Ok(())
}

fn render_class_report(report: &ClassReport) -> String {
    let mut text = String::new();
    text.push_str(&format!("label {}\n", report.label));
    match report.common_index {
        Some(i) => text.push_str(&format!("common-index {i}\n")),
        None => text.push_str("common-index mixed\n"),
    }
    text.push_str(&format!("min-abs-exponent {}\n", report.min_abs_exponent));
    text.push_str(&format!("evidence {}\n", report.evidence));
    for w in &report.words {
        let chis: Vec<String> = w.exponents.iter().map(|x| format!("{x}")).collect();
        let dom = w.domination_time.map_or("none".to_string(), |t| t.to_string());
        text.push_str(&format!(
            "word {} period {} index {} exponents [{}] domination {dom}\n",
            w.word,
            w.period,
            w.negative_index,
            chis.join(" "),
        ));
    }
    text
}
