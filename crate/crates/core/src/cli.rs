//! Command-line front end.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::expected::{
    conditions_fat_line, d0, hilbert_poly_pn, lenarcik_special, split_r_q, vdim_p1p1, Bidegree,
    ExpectedError,
};
use crate::interp::{
    build_matrix, is_prime, matrix_shape, mix_seed, p1p1_h0, realize, verify_maximal_rank,
    ConsensusReport, InterpError, PrimeField, RankReport, DEFAULT_PRIME, SECOND_PRIME,
};
use crate::ledger::{
    build_sequence, escalate_with_rank_oracle, two_fat_points_hypotheses, LedgerError,
    SequenceReport,
};
use crate::schemes::{label_to_scheme, LabelKind, OmegaSpec, SchemeSpec, SystemLabel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTER_EVIDENCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

pub const DEFAULT_RETRIES: u32 = 3;
pub const DEFAULT_MAX_COLS: u64 = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "postlab", version, about = "Maximal rank checks for lines plus a fat line in P^3")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Prime for rank computations.
    #[arg(long, global = true, env = "POSTLAB_PRIME")]
    pub prime: Option<u64>,
    /// Second prime for cross-checks.
    #[arg(long, global = true)]
    pub second_prime: Option<u64>,
    /// Seed, or `random` to draw one (echoed in the output).
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, global = true)]
    pub retries: Option<u32>,
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// key=value file with defaults for the options above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Column budget for a single matrix.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_COLS)]
    pub max_cols: u64,
    /// Run jobs over the column budget.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form counts: c(n,m,d), dim of forms, r, q, d0(m).
    Expected {
        #[arg(long, default_value_t = 3)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        d: u64,
    },
    /// Exact rank check of the B/I systems or a custom scheme.
    Verify {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, conflicts_with = "custom")]
        variant: Option<Variant>,
        /// Custom scheme, e.g. "m=2,r=2,q=1" (keys m, r, s, q, z).
        #[arg(long)]
        custom: Option<String>,
        /// Also run over the second prime.
        #[arg(long)]
        multi_prime: bool,
        /// Dump the first realization's matrix to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Replay and audit a specialization sequence.
    Ledger {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        m: u64,
        #[arg(long, conflicts_with = "d", requires = "eps")]
        k: Option<u64>,
        #[arg(long, requires = "k")]
        eps: Option<u64>,
        #[arg(long)]
        d: Option<u64>,
        /// Certify remaining traces with the rank oracle.
        #[arg(long)]
        escalate: bool,
    },
    /// Grid scan below the theorem's threshold, both variants per cell.
    Scan {
        /// Multiplicity range `a..b` (inclusive) or a single value.
        #[arg(long)]
        m: String,
        /// Degree range `a..b` (inclusive) or a single value.
        #[arg(long)]
        d: String,
    },
    /// Speciality of a point system on P^1 x P^1: predicate vs rank.
    P1p1 {
        #[arg(long)]
        a: i64,
        #[arg(long)]
        b: i64,
        /// Simple points.
        #[arg(long, alias = "p", default_value_t = 0)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        pd: u64,
        #[arg(long, default_value_t = 0)]
        pm: u64,
        #[arg(long, default_value_t = 0)]
        mpt: u64,
        /// Add simple points until the virtual dimension is zero.
        #[arg(long)]
        fill: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Bijective,
    Injective,
}

impl Variant {
    fn kind(self) -> LabelKind {
        match self {
            Variant::Bijective => LabelKind::B,
            Variant::Injective => LabelKind::I,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    #[value(name = "B", alias = "b")]
    B,
    #[value(name = "I", alias = "i")]
    I,
}

/// Resolved job settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JobConfig {
    pub prime: u64,
    pub second_prime: u64,
    pub seed: u64,
    pub retries: u32,
    pub parallelism: usize,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            prime: DEFAULT_PRIME,
            second_prime: SECOND_PRIME,
            seed: 0,
            retries: DEFAULT_RETRIES,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            output: None,
            format: None,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: msg.into() }
    }

    fn domain(msg: impl ToString) -> Self {
        Self { code: EXIT_DOMAIN, message: msg.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::usage(format!("i/o error: {e}"))
    }
}

impl From<ExpectedError> for Failure {
    fn from(e: ExpectedError) -> Self {
        Self::domain(e)
    }
}

impl From<InterpError> for Failure {
    fn from(e: InterpError) -> Self {
        Self::domain(e)
    }
}

impl From<LedgerError> for Failure {
    fn from(e: LedgerError) -> Self {
        Self::domain(e)
    }
}

fn parse_seed(s: &str) -> Result<u64, Failure> {
    if s == "random" {
        return Ok(rand::random());
    }
    s.parse().map_err(|_| Failure::usage(format!("bad seed `{s}`")))
}

fn parse_config_file(path: &Path, cfg: &mut JobConfig) -> Result<(), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("{}:{}: expected key=value", path.display(), no + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        let bad = || Failure::usage(format!("{}:{}: bad value for {k}", path.display(), no + 1));
        match k {
            "prime" => cfg.prime = v.parse().map_err(|_| bad())?,
            "second_prime" => cfg.second_prime = v.parse().map_err(|_| bad())?,
            "seed" => cfg.seed = parse_seed(v)?,
            "retries" => cfg.retries = v.parse().map_err(|_| bad())?,
            "parallelism" => cfg.parallelism = v.parse().map_err(|_| bad())?,
            "output" => cfg.output = Some(PathBuf::from(v)),
            "format" => cfg.format = Some(Format::from_str(v, true).map_err(|_| bad())?),
            other => return Err(Failure::usage(format!("unknown config key `{other}`"))),
        }
    }
    Ok(())
}

/// Merges defaults, config file, environment and flags (later wins).
pub fn resolve_config(g: &GlobalOpts) -> Result<JobConfig, Failure> {
    let mut cfg = JobConfig::default();
    if let Some(path) = &g.config {
        parse_config_file(path, &mut cfg)?;
    }
    if let Some(p) = g.prime {
        cfg.prime = p;
    }
    if let Some(p) = g.second_prime {
        cfg.second_prime = p;
    }
    if let Some(s) = &g.seed {
        cfg.seed = parse_seed(s)?;
    }
    if let Some(r) = g.retries {
        cfg.retries = r;
    }
    if let Some(p) = g.parallelism {
        cfg.parallelism = p;
    }
    if g.output.is_some() {
        cfg.output = g.output.clone();
    }
    if g.format.is_some() {
        cfg.format = g.format;
    }
    for p in [cfg.prime, cfg.second_prime] {
        if p >= 1 << 32 || !is_prime(p) {
            return Err(Failure::usage(format!("{p} is not a prime below 2^32")));
        }
    }
    if cfg.prime == cfg.second_prime {
        return Err(Failure::usage("prime and second prime must differ"));
    }
    if cfg.retries < 1 {
        return Err(Failure::usage("retries must be at least 1"));
    }
    cfg.parallelism = cfg.parallelism.max(1);
    Ok(cfg)
}

fn parse_range(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::usage(format!("bad range `{s}`"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => {
            let hi = b.strip_prefix('=').unwrap_or(b);
            (a.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?)
        }
        None => {
            let v: u64 = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    Ok((lo..=hi).collect())
}

fn parse_custom(s: &str, default_m: u64) -> Result<SchemeSpec, Failure> {
    let mut z = SchemeSpec::new(default_m, 0, 0, 0, 0);
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("bad scheme component `{part}`")))?;
        let v: u64 = v.trim().parse().map_err(|_| Failure::usage(format!("bad value in `{part}`")))?;
        match k.trim() {
            "m" => z.m = v,
            "r" => z.r = v,
            "s" => z.s = v,
            "q" => z.q = v,
            "z" => z.z = v,
            other => return Err(Failure::usage(format!("unknown scheme key `{other}`"))),
        }
    }
    Ok(crate::schemes::canonicalize(z))
}

fn json_line<T: Serialize>(out: &mut dyn Write, v: &T) -> io::Result<()> {
    writeln!(out, "{}", serde_json::to_string(v).expect("serializable"))
}

fn check_budget(cols: u64, g: &GlobalOpts) -> Result<(), Failure> {
    if cols > g.max_cols && !g.force {
        return Err(Failure::usage(format!(
            "matrix has {cols} columns, over the budget of {}; pass --force",
            g.max_cols
        )));
    }
    Ok(())
}

fn cmd_expected(n: u64, m: u64, d: u64, fmt: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let c = conditions_fat_line(n, m, d)?;
    let chi = hilbert_poly_pn(n, d);
    let rq = if n == 3 { Some(split_r_q(d, m)?) } else { None };
    let v = json!({
        "n": n, "m": m, "d": d, "c": c, "chi": chi,
        "r": rq.map(|x| x.0), "q": rq.map(|x| x.1), "d0": d0(m),
    });
    match fmt {
        Format::Text => {
            writeln!(out, "c = {c}\nchi = {chi}")?;
            if let Some((r, q)) = rq {
                writeln!(out, "r = {r}\nq = {q}")?;
            }
            writeln!(out, "d0 = {}", d0(m))?;
        }
        _ => json_line(out, &v)?,
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct VerifyJob {
    label: Option<String>,
    scheme: SchemeSpec,
    d: u64,
    n: usize,
    report: RankReport,
}

fn text_report(out: &mut dyn Write, name: &str, r: &RankReport) -> io::Result<()> {
    writeln!(
        out,
        "{name}: {}x{} rank {} expected {} defect {} {} p={} seed={} retries={}",
        r.rows,
        r.cols,
        r.rank,
        r.expected_rank,
        r.defect(),
        serde_json::to_value(r.verdict).unwrap().as_str().unwrap(),
        r.prime,
        r.seed,
        r.retries_used
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    m: u64,
    d: u64,
    n: usize,
    variant: Option<Variant>,
    custom: Option<&str>,
    multi: bool,
    dump: Option<&Path>,
    cfg: &JobConfig,
    g: &GlobalOpts,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    if d < m {
        return Err(Failure::domain(format!("degree {d} below multiplicity {m}")));
    }
    let mut jobs: Vec<(Option<String>, SchemeSpec)> = Vec::new();
    if let Some(c) = custom {
        jobs.push((None, parse_custom(c, m)?));
    } else {
        if n != 3 {
            return Err(Failure::usage("B/I variants live in P^3; use --custom for other n"));
        }
        let variants = match variant {
            Some(v) => vec![v],
            None => vec![Variant::Bijective, Variant::Injective],
        };
        for v in variants {
            let lab = SystemLabel::from_degree(v.kind(), d, m);
            jobs.push((Some(lab.to_string()), label_to_scheme(lab)?));
        }
    }
    let mut primes = vec![cfg.prime];
    if multi {
        primes.push(cfg.second_prime);
    }
    let fmt = cfg.format.unwrap_or(Format::Json);
    let mut all_ok = true;
    for (label, z) in jobs {
        let (_, cols) = matrix_shape(&z, d, n)?;
        check_budget(cols, g)?;
        if let Some(path) = dump {
            let field = PrimeField::new(cfg.prime)?;
            let c = realize(&z, n, field, mix_seed(&[cfg.seed, 0]))?;
            let mat = build_matrix(&c, d)?;
            mat.write_dump(BufWriter::new(File::create(path)?))?;
        }
        let mut reports = Vec::new();
        for &p in &primes {
            let field = PrimeField::new(p)?;
            let seed = if p == cfg.prime { cfg.seed } else { mix_seed(&[cfg.seed, p]) };
            reports.push(verify_maximal_rank(&z, d, n, field, seed, cfg.retries)?);
        }
        let consensus = ConsensusReport::from_reports(reports);
        all_ok &= consensus.certified;
        let name = label.clone().unwrap_or_else(|| z.to_string());
        for r in consensus.reports {
            match fmt {
                Format::Text => text_report(out, &name, &r)?,
                _ => json_line(out, &VerifyJob { label: label.clone(), scheme: z, d, n, report: r })?,
            }
        }
        if let Some(flag) = consensus.flag {
            eprintln!("{name}: {flag}");
        }
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_COUNTER_EVIDENCE })
}

fn text_ledger(out: &mut dyn Write, rep: &SequenceReport) -> io::Result<()> {
    writeln!(out, "{} -> expected {} in {} steps", rep.label, rep.expected_final, rep.expected_length)?;
    for s in &rep.steps {
        match (&s.mv, &s.trace) {
            (Some(mv), Some(tr)) => writeln!(
                out,
                "  d={} {} {} trace ({},{}) {} vdim {} {}",
                s.degree,
                s.scheme,
                mv,
                tr.bidegree.a,
                tr.bidegree.b,
                tr.omega,
                s.trace_vdim.unwrap_or_default(),
                s.trace_certificate.map(|c| c.to_string()).unwrap_or_default()
            )?,
            _ => writeln!(out, "  d={} {}", s.degree, s.scheme)?,
        }
    }
    let fin = rep.final_label.map(|l| l.to_string()).unwrap_or_else(|| "none".into());
    writeln!(out, "final {fin}; ok = {}", rep.ok)?;
    for v in &rep.violations {
        writeln!(out, "  violation: {v}")?;
    }
    for n in &rep.notes {
        writeln!(out, "  note: {n}")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_ledger(
    kind: Kind,
    m: u64,
    k: Option<u64>,
    eps: Option<u64>,
    d: Option<u64>,
    escalate: bool,
    cfg: &JobConfig,
    g: &GlobalOpts,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let kind = match kind {
        Kind::B => LabelKind::B,
        Kind::I => LabelKind::I,
    };
    let lab = match (k, eps, d) {
        (Some(k), Some(eps), None) => SystemLabel::new(kind, k, eps, m),
        (None, None, Some(d)) => SystemLabel::from_degree(kind, d, m),
        _ => return Err(Failure::usage("give either --k and --eps, or --d")),
    };
    let mut rep = build_sequence(lab)?;
    if escalate && !rep.ok {
        let field = PrimeField::new(cfg.prime)?;
        escalate_with_rank_oracle(&mut rep, field, cfg.seed, cfg.retries, g.max_cols);
    }
    match cfg.format.unwrap_or(Format::Json) {
        Format::Text => text_ledger(out, &rep)?,
        _ => writeln!(out, "{}", serde_json::to_string_pretty(&rep).expect("serializable"))?,
    }
    if !rep.ok {
        for v in &rep.violations {
            eprintln!("violation: {v}");
        }
        return Ok(EXIT_COUNTER_EVIDENCE);
    }
    Ok(EXIT_OK)
}

/// One CSV row of a scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanRow {
    pub m: u64,
    pub d: u64,
    pub variant: String,
    pub rows: u64,
    pub cols: u64,
    pub rank: u64,
    pub expected: u64,
    pub defect: u64,
    pub verdict: String,
    pub prime: u64,
    pub seed: u64,
}

struct CellOutcome {
    rows: Vec<ScanRow>,
    persistent: bool,
}

fn scan_cell(m: u64, d: u64, kind: LabelKind, cfg: &JobConfig, g: &GlobalOpts) -> CellOutcome {
    let variant = match kind {
        LabelKind::B => "B",
        LabelKind::I => "I",
    }
    .to_string();
    let row = |verdict: &str, p: u64, seed: u64| ScanRow {
        m,
        d,
        variant: variant.clone(),
        rows: 0,
        cols: hilbert_poly_pn(3, d),
        rank: 0,
        expected: 0,
        defect: 0,
        verdict: verdict.into(),
        prime: p,
        seed,
    };
    let z = match label_to_scheme(SystemLabel::from_degree(kind, d, m)) {
        Ok(z) => z,
        Err(_) => return CellOutcome { rows: vec![row("ERROR", cfg.prime, cfg.seed)], persistent: false },
    };
    if hilbert_poly_pn(3, d) > g.max_cols && !g.force {
        return CellOutcome { rows: vec![row("SKIPPED_BUDGET", cfg.prime, cfg.seed)], persistent: false };
    }
    let mut rows = Vec::new();
    for p in [cfg.prime, cfg.second_prime] {
        let seed = mix_seed(&[cfg.seed, m, d, z.r, 0, p]);
        let field = PrimeField::new(p).expect("validated prime");
        match verify_maximal_rank(&z, d, 3, field, seed, cfg.retries) {
            Ok(r) => {
                let ok = r.certified();
                rows.push(ScanRow {
                    m,
                    d,
                    variant: variant.clone(),
                    rows: r.rows,
                    cols: r.cols,
                    rank: r.rank,
                    expected: r.expected_rank,
                    defect: r.defect(),
                    verdict: serde_json::to_value(r.verdict).unwrap().as_str().unwrap().into(),
                    prime: p,
                    seed,
                });
                if ok {
                    return CellOutcome { rows, persistent: false };
                }
            }
            Err(_) => rows.push(row("ERROR", p, seed)),
        }
    }
    CellOutcome { rows, persistent: true }
}

/// Runs the scan grid and returns the rows in `(m, d, variant)` order along
/// with the cells whose defect persisted over both primes.
pub fn run_scan(
    ms: &[u64],
    ds: &[u64],
    cfg: &JobConfig,
    g: &GlobalOpts,
) -> (Vec<ScanRow>, Vec<(u64, u64, String)>) {
    let mut cells = Vec::new();
    for &m in ms {
        for &d in ds {
            if d >= 1 && d >= m && d < d0(m) {
                cells.push((m, d, LabelKind::B));
                cells.push((m, d, LabelKind::I));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .expect("thread pool");
    let outcomes: Vec<CellOutcome> =
        pool.install(|| cells.par_iter().map(|&(m, d, k)| scan_cell(m, d, k, cfg, g)).collect());
    let mut rows = Vec::new();
    let mut persistent = Vec::new();
    for (o, &(m, d, k)) in outcomes.into_iter().zip(&cells) {
        if o.persistent {
            persistent.push((m, d, format!("{k:?}")));
        }
        rows.extend(o.rows);
    }
    (rows, persistent)
}

fn cmd_scan(m: &str, d: &str, cfg: &JobConfig, g: &GlobalOpts, out: &mut dyn Write) -> Result<i32, Failure> {
    let ms = parse_range(m)?;
    let ds = parse_range(d)?;
    let (rows, persistent) = run_scan(&ms, &ds, cfg, g);
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "m", "d", "variant", "rows", "cols", "rank", "expected", "defect", "verdict", "prime", "seed",
        ])
        .map_err(|e| Failure::usage(e.to_string()))?;
    }
    for r in &rows {
        w.serialize(r).map_err(|e| Failure::usage(e.to_string()))?;
    }
    w.flush()?;
    for (m, d, v) in &persistent {
        eprintln!("PERSISTENT DEFECT: m={m} d={d} variant={v}");
    }
    Ok(if persistent.is_empty() { EXIT_OK } else { EXIT_COUNTER_EVIDENCE })
}

#[derive(Debug, Serialize)]
struct P1p1Report {
    a: i64,
    b: i64,
    omega: OmegaSpec,
    vdim: i64,
    h0: u64,
    rank_special: bool,
    /// Verdict of the classification lemma that applies, if any.
    predicate: Option<&'static str>,
    predicate_special: Option<bool>,
    agree: bool,
    prime: u64,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_p1p1(
    a: i64,
    b: i64,
    q: u64,
    pd: u64,
    pm: u64,
    mpt: u64,
    fill: bool,
    cfg: &JobConfig,
    g: &GlobalOpts,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let bd = Bidegree::new(a, b);
    if !bd.is_valid() {
        return Err(Failure::domain(format!("invalid bidegree ({a}, {b})")));
    }
    let mut om = OmegaSpec::new(q, pd, pm, mpt);
    om.check().map_err(Failure::domain)?;
    if fill {
        let v = vdim_p1p1(bd, &om);
        if v > 0 {
            om.p += v as u64;
        }
    }
    let cols = ((a + 1) * (b + 1)) as u64;
    check_budget(cols, g)?;
    let field = PrimeField::new(cfg.prime)?;
    let vdim = vdim_p1p1(bd, &om);
    let h0 = p1p1_h0(bd, &om, field, cfg.seed, cfg.retries)?;
    let rank_special = h0 as i64 > vdim.max(0);

    let fat = om.p_m > 0 && om.m_pt > 0;
    let (predicate, predicate_special) = if !fat || om.m_pt <= 2 {
        let doubles = om.p_d + if fat && om.m_pt == 2 { om.p_m } else { 0 };
        let simples = om.p + if fat && om.m_pt == 1 { om.p_m } else { 0 };
        (Some("lenarcik"), Some(lenarcik_special(bd, doubles, simples)))
    } else if om.p_d == 0 && two_fat_points_hypotheses(bd, om.m_pt) && vdim <= 0 {
        (Some("two_fat_points"), Some(false))
    } else {
        (None, None)
    };
    let agree = predicate_special.map_or(true, |s| s == rank_special);
    let rep = P1p1Report {
        a,
        b,
        omega: om,
        vdim,
        h0,
        rank_special,
        predicate,
        predicate_special,
        agree,
        prime: cfg.prime,
        seed: cfg.seed,
    };
    match cfg.format.unwrap_or(Format::Json) {
        Format::Text => {
            let word = |s: bool| if s { "special" } else { "nonspecial" };
            writeln!(out, "bidegree ({a},{b}) {om}: vdim {vdim}, h0 {h0}")?;
            writeln!(out, "rank oracle: {}", word(rank_special))?;
            match (predicate, predicate_special) {
                (Some(p), Some(s)) => writeln!(out, "{p}: {}", word(s))?,
                _ => writeln!(out, "no classification applies")?,
            }
            writeln!(out, "agree: {agree}")?;
        }
        _ => json_line(out, &rep)?,
    }
    Ok(if agree { EXIT_OK } else { EXIT_COUNTER_EVIDENCE })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = resolve_config(&cli.global)?;
    let g = &cli.global;
    let mut file_out;
    let out: &mut dyn Write = match &cfg.output {
        Some(p) => {
            file_out = BufWriter::new(File::create(p)?);
            &mut file_out
        }
        None => out,
    };
    let code = match cli.command {
        Command::Expected { n, m, d } => cmd_expected(n, m, d, cfg.format.unwrap_or(Format::Json), out),
        Command::Verify { m, d, n, variant, custom, multi_prime, dump } => cmd_verify(
            m,
            d,
            n,
            variant,
            custom.as_deref(),
            multi_prime,
            dump.as_deref(),
            &cfg,
            g,
            out,
        ),
        Command::Ledger { kind, m, k, eps, d, escalate } => {
            cmd_ledger(kind, m, k, eps, d, escalate, &cfg, g, out)
        }
        Command::Scan { m, d } => cmd_scan(&m, &d, &cfg, g, out),
        Command::P1p1 { a, b, q, pd, pm, mpt, fill } => {
            cmd_p1p1(a, b, q, pd, pm, mpt, fill, &cfg, g, out)
        }
    }?;
    out.flush()?;
    Ok(code)
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["postlab"];
        full.extend_from_slice(args);
        let code = run_with(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn expected_examples() {
        let (code, out, _) = call(&["expected", "--n", "3", "--m", "2", "--d", "6"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!((v["c"].as_u64(), v["r"].as_u64(), v["q"].as_u64()), (Some(19), Some(9), Some(2)));
        let (_, out, _) = call(&["expected", "--m", "1", "--d", "7", "--format", "text"]);
        assert!(out.contains("c = 8"));
        assert_eq!(call(&["expected", "--n", "1", "--m", "1", "--d", "5"]).0, 3);
        assert_eq!(call(&["expected", "--m", "x", "--d", "5"]).0, 2);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_range("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert!(parse_range("5..3").unwrap().is_empty());
        assert!(parse_range("a..b").is_err());
    }

    #[test]
    fn custom_schemes() {
        assert_eq!(parse_custom("m=2,r=2", 0).unwrap(), SchemeSpec::new(2, 2, 0, 0, 0));
        assert_eq!(parse_custom("r=1,z=1", 3).unwrap(), SchemeSpec::new(3, 2, 0, 0, 0));
        assert!(parse_custom("w=1", 0).is_err());
    }

    #[test]
    fn config_precedence() {
        let dir = std::env::temp_dir().join(format!("postlab-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("job.cfg");
        fs::write(&path, "# defaults\nprime = 101\nseed=9\nretries=5\nformat=text\n").unwrap();
        let cli = Cli::try_parse_from([
            "postlab",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "4",
            "expected",
            "--m",
            "1",
            "--d",
            "1",
        ])
        .unwrap();
        let cfg = resolve_config(&cli.global).unwrap();
        assert_eq!((cfg.seed, cfg.retries, cfg.format), (4, 5, Some(Format::Text)));
        if std::env::var("POSTLAB_PRIME").is_err() {
            assert_eq!(cfg.prime, 101);
        }
        fs::write(&path, "colour=blue\n").unwrap();
        let cli = Cli::try_parse_from(["postlab", "--config", path.to_str().unwrap(), "expected", "--m", "1", "--d", "1"]).unwrap();
        assert_eq!(resolve_config(&cli.global).unwrap_err().code, EXIT_USAGE);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn bad_primes_are_usage_errors() {
        assert_eq!(call(&["--prime", "100", "expected", "--m", "1", "--d", "2"]).0, 2);
        assert_eq!(
            call(&["--prime", "65521", "--second-prime", "65521", "expected", "--m", "1", "--d", "2"]).0,
            2
        );
    }

    #[test]
    fn ledger_examples() {
        let (code, out, _) = call(&["ledger", "--kind", "B", "--k", "2", "--eps", "0", "--m", "2"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["steps"].as_array().unwrap().len(), 2);
        assert_eq!(v["final_label"], json!({"kind": "B", "k": 1, "eps": 1, "m": 1}));
        let (code, _, _) = call(&["ledger", "--kind", "I", "--k", "1", "--eps", "0", "--m", "3"]);
        assert_eq!(code, 3);
    }

    #[test]
    fn p1p1_examples() {
        let (code, out, _) = call(&["p1p1", "--a", "0", "--b", "3", "--pd", "1", "--q", "1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["rank_special"], json!(true));
        let (code, out, _) = call(&["p1p1", "--a", "3", "--b", "12", "--pm", "2", "--mpt", "3", "--fill"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["rank_special"], json!(false));
        assert_eq!(v["omega"]["p"], json!(40));
    }

    #[test]
    fn empty_scan_has_header() {
        let (code, out, _) = call(&["scan", "--m", "3", "--d", "20..21"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "m,d,variant,rows,cols,rank,expected,defect,verdict,prime,seed");
    }

    #[test]
    fn budget_requires_force() {
        let (code, _, err) = call(&["--max-cols", "50", "verify", "--m", "1", "--d", "6", "--variant", "bijective"]);
        assert_eq!(code, 2);
        assert!(err.contains("--force"));
    }
}
