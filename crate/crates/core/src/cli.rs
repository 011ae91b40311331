//! Command-line front end. Every subcommand produces one [`Report`], written
//! as CSV or JSON to `--out`, to `$QFGAMES_OUT_DIR`, or to stdout.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{stabilizer_generator, AlgebraVector};
use crate::forms::{gap_at, lattice_of_lambda, value_spectrum};
use crate::game::{
    play, AliceMove, AlicePolicy, Ball, BobPolicy, GameConfig, MoveRecord, Outcome, Point, RandomAlice, RandomBob,
    TargetSeekingBob, Transcript, Variant,
};
use crate::geometry::{
    cond_f, cond_hf, embedding_radius, lie_span_rank, make_zv, thicken_immersed, thickening_embedded, transversality_constant, Chart,
    Horospherical, Submanifold,
};
use crate::lattice::orbit_systole_trace;
use crate::strategy::{
    avoid_scenario_with, bounded_domain, derive_constants, run_avoid_game, run_bounded_game_with, target_submanifold,
    zv_arc, AvoidGame, AvoidParams, BoundedOutcome, Dummy, Target, AVOID_BETA, AVOID_R0, AVOID_TAU, BOUNDED_BETA,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "qfgames", version, about = "Games on the space of lattices and values of binary quadratic forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file. Defaults to a file in the output directory, or stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "QFGAMES_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Values of q0 on the lattice of λ over the box [−N, N]², sorted.
    Spectrum {
        #[arg(long, value_parser = parse_real)]
        lambda: f64,
        #[arg(long = "N")]
        n: i64,
    },
    /// min |q0 − a| over the box [−N, N]², with the witnessing point.
    Gap {
        #[arg(long, value_parser = parse_real)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_real, default_value = "0")]
        a: f64,
        #[arg(long = "N")]
        n: i64,
    },
    /// Systole along the diagonal orbit of the lattice of λ.
    Orbit {
        #[arg(long, value_parser = parse_real)]
        lambda: f64,
        #[arg(long, default_value_t = 20.0)]
        tmax: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Transversality of the closed horocycle Z_{v(a)} and its thickening.
    Transversality {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_real, default_value = "4")]
        a: f64,
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
        /// β used for the avoidance constants.
        #[arg(long, default_value_t = AVOID_BETA)]
        beta: f64,
        /// Orbit time step used for the avoidance constants.
        #[arg(long, default_value_t = AVOID_TAU)]
        game_tau: f64,
    },
    /// One game with a transcript and a check of its outcome.
    Play(PlayArgs),
    /// Batch runs with a pass/fail summary.
    Suite {
        #[command(subcommand)]
        suite: SuiteCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantKind {
    Classic,
    Haw,
    Hpw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AliceKind {
    Dummy,
    Random,
    /// The avoidance strategy in the potential game (hpw, dimension 3).
    Avoid,
    /// The bounded-orbit policy lifted to dimension 3 (haw).
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BobKind {
    Random,
    #[value(name = "target_seeking")]
    TargetSeeking,
}

impl BobKind {
    pub fn name(self) -> &'static str {
        match self {
            BobKind::Random => "random",
            BobKind::TargetSeeking => "target_seeking",
        }
    }

    /// A seeking Bob heads for `target`.
    pub fn policy(self, target: &Point) -> Box<dyn BobPolicy> {
        match self {
            BobKind::Random => Box::new(RandomBob::default()),
            BobKind::TargetSeeking => Box::new(TargetSeekingBob { target: target.clone() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetKind {
    Point,
    Arc,
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    #[arg(long, value_enum)]
    pub variant: VariantKind,
    #[arg(long, value_enum, default_value_t = AliceKind::Dummy)]
    pub alice: AliceKind,
    #[arg(long, value_enum, default_value_t = BobKind::Random)]
    pub bob: BobKind,
    #[arg(long)]
    pub beta: f64,
    /// Alice's ratio in the classic game.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Time step of the orbit for the avoidance strategy.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// With `--target arc`, avoid an arc of Z_{v(a)}.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real, default_value = "4")]
    pub a: f64,
    #[arg(long, value_enum, default_value_t = TargetKind::Point)]
    pub target: TargetKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Round limit; defaults to 400 for avoid, 300 for bounded and 100 otherwise.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Dimension for dummy and random Alice.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.0)]
    pub radius_floor: f64,
}

#[derive(Debug, Subcommand)]
pub enum SuiteCommand {
    /// The avoidance strategy against both Bobs, for the golden point and
    /// the arc of Z_{v(4)}.
    AvoidZ {
        /// Games per (Bob, target) pair.
        #[arg(long, default_value_t = 500)]
        games: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, default_value_t = 6)]
        min_stages: u32,
    },
    /// The lifted bounded-orbit policy against a random Bob.
    Bounded {
        #[arg(long, default_value_t = 50)]
        games: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, default_value_t = 300)]
        rounds: usize,
    },
}

/// A real number: a decimal, `sqrtK`, `√K`, `phi` or `φ`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let root = t.strip_prefix("sqrt").or_else(|| t.strip_prefix('√'));
    let x = match (t, root) {
        ("phi" | "φ" | "golden", _) => 0.5 * (1.0 + 5f64.sqrt()),
        (_, Some(r)) => r.trim_matches(|c| c == '(' || c == ')').parse::<f64>().map_err(|e| e.to_string())?.sqrt(),
        _ => t.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not a finite real"))
    }
}

/// Output of one invocation. CSV carries `command`, `params` and `summary`
/// as `#` header lines followed by the table; JSON is this struct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub params: BTreeMap<String, Value>,
    pub summary: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Full move list, for `play` in JSON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Value>,
    pub passed: bool,
}

impl Report {
    fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            params: BTreeMap::new(),
            summary: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
            transcript: None,
            passed: true,
        }
    }

    fn param(&mut self, k: &str, v: impl Serialize) -> &mut Self {
        self.params.insert(k.into(), json!(v));
        self
    }

    fn sum(&mut self, k: &str, v: impl Serialize) -> &mut Self {
        self.summary.insert(k.into(), json!(v));
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# qfgames {} {}\n", self.version, self.command);
        for (k, v) in &self.params {
            out.push_str(&format!("# param {k}={}\n", cell(v)));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# summary {k}={}\n", cell(v)));
        }
        out.push_str(&format!("# passed={}\n", self.passed));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(cell).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Invalid(#[from] crate::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs, writes the report and returns
/// the exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli).and_then(|r| emit(&cli, &r).map(|_| r)) {
        Ok(r) if r.passed => ExitCode::from(EXIT_OK),
        Ok(r) => {
            eprintln!("qfgames: {} failed", r.command);
            ExitCode::from(EXIT_FAILURE)
        }
        Err(e) => {
            eprintln!("qfgames: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(cli: &Cli, r: &Report) -> CliResult<()> {
    let text = r.render(cli.format);
    let ext = match cli.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = match (&cli.out, &cli.out_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(d)) => d.join(format!("{}.{ext}", file_stem(r))),
        (None, None) => {
            print!("{text}");
            return Ok(());
        }
    };
    let io = |source| CliError::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(&path, text).map_err(io)
}

fn file_stem(r: &Report) -> String {
    let mut stem = r.command.replace(' ', "-");
    for k in ["variant", "alice", "seed"] {
        if let Some(v) = r.params.get(k) {
            stem.push('-');
            stem.push_str(&cell(v));
        }
    }
    stem
}

pub fn run(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::Spectrum { lambda, n } => spectrum(*lambda, *n),
        Command::Gap { lambda, a, n } => gap(*lambda, *a, *n),
        Command::Orbit { lambda, tmax, step } => orbit(*lambda, *tmax, *step),
        Command::Transversality { a, tau, beta, game_tau } => transversality(*a, *tau, *beta, *game_tau),
        Command::Play(p) => play_cmd(p, cli.format == Format::Json),
        Command::Suite { suite: SuiteCommand::AvoidZ { games, first_seed, min_stages } } => {
            suite_avoid_z_report(*first_seed, *games, *min_stages)
        }
        Command::Suite { suite: SuiteCommand::Bounded { games, first_seed, rounds } } => {
            suite_bounded_report(*first_seed, *games, *rounds)
        }
    }
}

fn spectrum(lambda: f64, n: i64) -> CliResult<Report> {
    let entries = value_spectrum(&lattice_of_lambda(lambda)?, n)?;
    let mut r = Report::new("spectrum", &["value", "p", "q"]);
    r.param("lambda", lambda).param("N", n);
    r.sum("count", entries.len());
    r.rows = entries.iter().map(|e| vec![json!(e.value), json!(e.p), json!(e.q)]).collect();
    Ok(r)
}

fn gap(lambda: f64, a: f64, n: i64) -> CliResult<Report> {
    let g = gap_at(&lattice_of_lambda(lambda)?, a, n)?;
    let mut r = Report::new("gap", &["gap", "p", "q", "form_value"]);
    r.param("lambda", lambda).param("a", a).param("N", n);
    let (p, q) = (g.p as f64, g.q as f64);
    // the unscaled form p² − λ²q²
    let form = p * p - lambda * lambda * q * q;
    r.rows = vec![vec![json!(g.gap), json!(g.p), json!(g.q), json!(form)]];
    r.sum("gap", g.gap);
    Ok(r)
}

fn orbit(lambda: f64, tmax: f64, step: f64) -> CliResult<Report> {
    let trace = orbit_systole_trace(&lattice_of_lambda(lambda)?, tmax, step)?;
    let mut r = Report::new("orbit", &["t", "systole"]);
    r.param("lambda", lambda).param("tmax", tmax).param("step", step);
    let (s, t) = trace.iter().map(|&(t, s)| (s, t)).fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    r.sum("min_systole", s).sum("min_systole_time", t);
    r.rows = trace.iter().map(|&(t, s)| vec![json!(t), json!(s)]).collect();
    Ok(r)
}

fn transversality(a: f64, tau: f64, beta: f64, game_tau: f64) -> CliResult<Report> {
    let mut r = Report::new("transversality", &["quantity", "value"]);
    r.param("a", a).param("tau", tau).param("beta", beta).param("game_tau", game_tau).param("r0", AVOID_R0);
    let mut rows: Vec<(String, Value)> = vec![];
    let mut ok = true;
    for (sign, aa) in [("plus", a.abs()), ("minus", -a.abs())] {
        let v = stabilizer_generator(aa)?;
        for h in [Horospherical::Upper, Horospherical::Lower] {
            let rank = lie_span_rank(&[AlgebraVector::H, h.generator(), v]);
            ok &= rank == 3;
            rows.push((format!("lie_span_rank_{sign}_{}", horo_name(h)), json!(rank)));
        }
    }
    // (F) and (H,F) on the curve, θ on its thickening
    let z = make_zv(a, 1)?.remove(0);
    let n = z.samples().len();
    let all_f = (0..n).all(|i| cond_f(&z, i));
    rows.push(("samples".into(), json!(n)));
    rows.push(("cond_f".into(), json!(all_f)));
    ok &= all_f;
    let th = thicken_immersed(&z, tau);
    rows.push(("thickening_embedded".into(), json!(thickening_embedded(&z, tau))));
    rows.push(("embedding_radius".into(), json!(embedding_radius(&z, tau))));
    for h in [Horospherical::Upper, Horospherical::Lower] {
        let hf = (0..n).all(|i| cond_hf(&z, i, h));
        let theta = transversality_constant(&th, h);
        ok &= hf && theta > 0.0;
        rows.push((format!("cond_hf_{}", horo_name(h)), json!(hf)));
        rows.push((format!("theta_min_{}", horo_name(h)), json!(theta)));
    }
    // constants for the arc of Z_{v(a)}, charted at its midpoint
    let arc = zv_arc(a)?;
    let chart = Chart::new(&arc.at(0.5), crate::strategy::AVOID_CHART_RADIUS)?;
    match derive_constants(&arc, &chart, beta, game_tau, AVOID_R0) {
        Ok(c) => {
            let v = serde_json::to_value(&c).expect("serializable");
            for (k, x) in v.as_object().expect("struct").iter() {
                rows.push((format!("constants_{k}"), x.clone()));
            }
            rows.push(("constants_valid".into(), json!(c.is_valid())));
            ok &= c.is_valid();
        }
        Err(e) => {
            rows.push(("constants_error".into(), json!(e.to_string())));
            ok = false;
        }
    }
    for (k, v) in &rows {
        r.summary.insert(k.clone(), v.clone());
    }
    r.rows = rows.into_iter().map(|(k, v)| vec![json!(k), v]).collect();
    r.passed = ok;
    Ok(r)
}

fn horo_name(h: Horospherical) -> &'static str {
    match h {
        Horospherical::Upper => "upper",
        Horospherical::Lower => "lower",
    }
}

fn play_cmd(p: &PlayArgs, with_transcript: bool) -> CliResult<Report> {
    let mut r = Report::new(
        "play",
        &["round", "mover", "kind", "slabs", "radius", "x0", "x1", "x2", "legal"],
    );
    let variant = match p.variant {
        VariantKind::Classic => Variant::Classic { alpha: p.alpha, beta: p.beta },
        VariantKind::Haw => Variant::Haw { beta: p.beta },
        VariantKind::Hpw => Variant::Hpw { beta: p.beta },
    };
    r.param("variant", variant.name())
        .param("alice", format!("{:?}", p.alice).to_lowercase())
        .param("bob", p.bob.name())
        .param("beta", p.beta)
        .param("seed", p.seed);
    if let Variant::Classic { alpha, .. } = variant {
        r.param("alpha", alpha);
    }
    let transcript = match p.alice {
        AliceKind::Avoid => {
            if p.variant != VariantKind::Hpw {
                return Err(CliError::Usage("--alice avoid plays the hpw variant".into()));
            }
            let target = match p.target {
                TargetKind::Point => Target::Point,
                TargetKind::Arc => Target::Arc { a: p.a },
            };
            let params = AvoidParams { beta: p.beta, tau: p.tau, max_rounds: p.rounds.unwrap_or(400), ..Default::default() };
            r.param("tau", p.tau).param("target", target).param("rounds", params.max_rounds).param("r0", params.r0);
            let g = avoid_game(target, target_submanifold(target)?, p.bob, p.seed, &params)?;
            r.param("dimension", 3).param("radius_floor", g.transcript.config.radius_floor);
            avoid_summary(&mut r, &g);
            r.passed = g.transcript.outcome.is_completed() && g.check.passed();
            g.transcript
        }
        AliceKind::Bounded => {
            if p.variant != VariantKind::Haw {
                return Err(CliError::Usage("--alice bounded plays the haw variant".into()));
            }
            let rounds = p.rounds.unwrap_or(300);
            let cfg = GameConfig::new(variant, bounded_domain()?, rounds, p.radius_floor, p.seed)?;
            r.param("dimension", 3).param("rounds", rounds).param("radius_floor", p.radius_floor);
            let mut bob = p.bob.policy(&cfg.domain.center);
            let (t, o) = run_bounded_game_with(bob.as_mut(), &cfg)?;
            bounded_summary(&mut r, &o);
            r.passed = t.outcome.is_completed();
            t
        }
        AliceKind::Dummy | AliceKind::Random => {
            let rounds = p.rounds.unwrap_or(100);
            let domain = Ball::new(Point::origin(p.dim)?, 1.0)?;
            let cfg = GameConfig::new(variant, domain, rounds, p.radius_floor, p.seed)?;
            r.param("dimension", p.dim).param("rounds", rounds).param("radius_floor", p.radius_floor);
            let mut alice: Box<dyn AlicePolicy> = match p.alice {
                AliceKind::Dummy => Box::new(Dummy),
                _ => Box::new(RandomAlice::new(p.seed)),
            };
            let mut bob = p.bob.policy(&cfg.domain.center);
            let t = play(alice.as_mut(), bob.as_mut(), &cfg)?;
            r.passed = t.outcome.is_completed();
            t
        }
    };
    outcome_summary(&mut r, &transcript);
    r.rows = transcript_rows(&transcript);
    if with_transcript {
        r.transcript = Some(serde_json::to_value(&transcript.records).expect("serializable"));
    }
    Ok(r)
}

fn transcript_rows(t: &Transcript) -> Vec<Vec<Value>> {
    t.records
        .iter()
        .map(|rec| {
            let mover = match rec.mv {
                MoveRecord::Alice(_) => "alice",
                MoveRecord::Bob(_) => "bob",
            };
            let (kind, slabs, ball) = match &rec.mv {
                MoveRecord::Bob(b) => ("ball", 0, Some(b)),
                MoveRecord::Alice(AliceMove::Ball(b)) => ("ball", 0, Some(b)),
                MoveRecord::Alice(AliceMove::Slab(_)) => ("slab", 1, None),
                MoveRecord::Alice(AliceMove::Slabs(v)) => ("slabs", v.len(), None),
            };
            let mut row = vec![json!(rec.round), json!(mover), json!(kind), json!(slabs)];
            let coords = ball.map(|b| b.center.to_f64()).unwrap_or_default();
            row.push(ball.map_or(Value::Null, |b| json!(b.radius)));
            row.extend((0..3).map(|j| coords.get(j).map_or(Value::Null, |x| json!(x))));
            row.push(json!(rec.verdict.is_legal()));
            row
        })
        .collect()
}

fn outcome_summary(r: &mut Report, t: &Transcript) {
    let v = serde_json::to_value(&t.outcome).expect("serializable");
    r.sum("outcome", v["kind"].clone());
    match &t.outcome {
        Outcome::Point { center, radius } => {
            r.sum("final_center", center.to_f64()).sum("final_radius", radius);
        }
        Outcome::Region { ball } => {
            r.sum("final_center", ball.center.to_f64()).sum("final_radius", ball.radius);
        }
        _ => {
            r.sum("fault", v);
        }
    }
    r.sum("moves", t.records.len()).sum("nested", t.is_nested());
}

fn avoid_summary(r: &mut Report, g: &AvoidGame) {
    r.sum("completed_stages", g.check.completed_stages)
        .sum("checked_times", &g.check.checked)
        .sum("failed_times", &g.check.failures)
        .sum("min_distance_ratio", g.check.min_ratio)
        .sum("epsilon", g.consts.epsilon)
        .sum("r1", g.consts.r1)
        .sum("dummy_rounds", g.report.dummy_rounds);
}

fn bounded_summary(r: &mut Report, o: &BoundedOutcome) {
    r.sum("min_systole", o.min_systole)
        .sum("min_systole_time", o.min_systole_time)
        .sum("max_quotient", o.max_quotient)
        .sum("unique_fraction", o.unique_fraction)
        .sum("projection_consistent", o.projection_consistent)
        .sum("bounded_checks", o.passed());
}

/// One avoidance game; a seeking Bob heads for the domain center, which the
/// orbit carries onto `Z`.
pub fn avoid_game(
    target: Target,
    z: Arc<dyn Submanifold>,
    bob: BobKind,
    seed: u64,
    params: &AvoidParams,
) -> crate::Result<AvoidGame> {
    let scn = avoid_scenario_with(target, z, seed, params)?;
    let mut b = bob.policy(&scn.config.domain.center);
    run_avoid_game(&scn, b.as_mut())
}

#[derive(Clone, Debug, Serialize)]
pub struct AvoidRow {
    pub bob: BobKind,
    pub target: &'static str,
    pub seed: u64,
    pub completed_stages: u32,
    pub checked: usize,
    pub failures: usize,
    pub min_ratio: f64,
    pub passed: bool,
    /// Set when the game could not be set up or played.
    pub error: Option<String>,
}

/// All (Bob, target) pairs for seeds `first..first + games`, in a fixed
/// order whatever the thread count.
pub fn suite_avoid_z(first: u64, games: u64, min_stages: u32) -> crate::Result<Vec<AvoidRow>> {
    let targets = [Target::Point, Target::ARC4];
    let zs = targets.iter().map(|&t| target_submanifold(t)).collect::<crate::Result<Vec<_>>>()?;
    let params = AvoidParams::default();
    let mut jobs = vec![];
    for bob in [BobKind::Random, BobKind::TargetSeeking] {
        for (t, z) in targets.iter().zip(&zs) {
            for seed in first..first + games {
                jobs.push((bob, *t, z.clone(), seed));
            }
        }
    }
    Ok(jobs
        .into_par_iter()
        .map(|(bob, target, z, seed)| {
            let row = AvoidRow {
                bob,
                target: target.name(),
                seed,
                completed_stages: 0,
                checked: 0,
                failures: 0,
                min_ratio: f64::NAN,
                passed: false,
                error: None,
            };
            match avoid_game(target, z, bob, seed, &params) {
                Ok(g) => AvoidRow {
                    completed_stages: g.check.completed_stages,
                    checked: g.check.checked.len(),
                    failures: g.check.failures.len(),
                    min_ratio: g.check.min_ratio,
                    passed: g.passed(min_stages),
                    ..row
                },
                Err(e) => AvoidRow { error: Some(e.to_string()), ..row },
            }
        })
        .collect())
}

fn suite_avoid_z_report(first: u64, games: u64, min_stages: u32) -> CliResult<Report> {
    let rows = suite_avoid_z(first, games, min_stages)?;
    let p = AvoidParams::default();
    let mut r = Report::new(
        "suite avoid-z",
        &["bob", "target", "seed", "completed_stages", "checked", "failures", "min_ratio", "passed", "error"],
    );
    r.param("first_seed", first)
        .param("games", games)
        .param("min_stages", min_stages)
        .param("beta", p.beta)
        .param("tau", p.tau)
        .param("r0", p.r0)
        .param("rounds", p.max_rounds);
    let failed = rows.iter().filter(|x| !x.passed).count();
    r.sum("games", rows.len()).sum("failed", failed);
    r.sum("min_completed_stages", rows.iter().map(|x| x.completed_stages).min());
    r.rows = rows
        .iter()
        .map(|x| {
            vec![
                json!(x.bob.name()),
                json!(x.target),
                json!(x.seed),
                json!(x.completed_stages),
                json!(x.checked),
                json!(x.failures),
                json!(x.min_ratio),
                json!(x.passed),
                json!(x.error),
            ]
        })
        .collect();
    r.passed = failed == 0;
    Ok(r)
}

/// Bounded games for seeds `first..first + games` against a random Bob.
pub fn suite_bounded(first: u64, games: u64, rounds: usize) -> crate::Result<Vec<BoundedOutcome>> {
    (first..first + games)
        .into_par_iter()
        .map(|seed| {
            let cfg = GameConfig::new(Variant::Haw { beta: BOUNDED_BETA }, bounded_domain()?, rounds, 0.0, seed)?;
            run_bounded_game_with(&mut RandomBob::default(), &cfg).map(|(_, o)| o)
        })
        .collect()
}

fn suite_bounded_report(first: u64, games: u64, rounds: usize) -> CliResult<Report> {
    let outs = suite_bounded(first, games, rounds)?;
    let mut r = Report::new(
        "suite bounded",
        &["seed", "rounds", "radius", "min_systole", "min_systole_time", "max_quotient", "unique_fraction", "projection_consistent", "passed"],
    );
    r.param("first_seed", first).param("games", games).param("rounds", rounds).param("beta", BOUNDED_BETA);
    let failed = outs.iter().filter(|o| !o.passed()).count();
    r.sum("games", outs.len()).sum("failed", failed);
    r.sum("min_systole", outs.iter().map(|o| o.min_systole).fold(f64::INFINITY, f64::min));
    r.sum("max_quotient", outs.iter().filter_map(|o| o.max_quotient).max());
    r.rows = outs
        .iter()
        .map(|o| {
            vec![
                json!(o.seed),
                json!(o.rounds),
                json!(o.radius),
                json!(o.min_systole),
                json!(o.min_systole_time),
                json!(o.max_quotient),
                json!(o.unique_fraction),
                json!(o.projection_consistent),
                json!(o.passed()),
            ]
        })
        .collect();
    r.passed = failed == 0;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("sqrt2").unwrap(), 2f64.sqrt());
        assert_eq!(parse_real("√3").unwrap(), 3f64.sqrt());
        assert!((parse_real("phi").unwrap() - 1.618033988749895).abs() < 1e-15);
        assert_eq!(parse_real("-0.5").unwrap(), -0.5);
        assert!(parse_real("x").is_err());
        assert!(parse_real("inf").is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = gap(2f64.sqrt(), 0.0, 10).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("# qfgames "));
        assert!(csv.contains("# param N=10\n"));
        assert!(csv.contains("\ngap,p,q,form_value\n"));
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
