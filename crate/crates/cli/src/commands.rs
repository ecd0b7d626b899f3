use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use lacunary::diophantine::{
    check_a_omega, count_solutions, lemma1_prediction, moment_exact_with_budget, witness_summary,
    DiophantineQuery, DiophantineSolution, DEFAULT_MOMENT_BUDGET, DEFAULT_WORK_BUDGET,
};
use lacunary::limitlaw::{char_function, f_func, g_func, levy_density, levy_l, limit_cdf_grid};
use lacunary::periodic::TrigPolynomial;
use lacunary::sequences::{
    check_gap, gen_block_sequence, gen_erdos_fortet, gen_geometric, gen_hlp, gen_random_omega, read_sequence,
    write_sequence, BlockParams, IntegerSequence, OmegaSchedule,
};
use lacunary::stats::{
    empirical_cf, excess_kurtosis, ks_distance, ks_fitted_normal, lil_scan, mean_and_variance, normal_cdf,
    random_point, sample_sums, SampleSpec, DEFAULT_GRID,
};

use crate::report::{num, Format, Report, Table, SCHEMA};
use crate::{Command, Global};

#[derive(Debug)]
pub enum CliError {
    Core(lacunary::Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(lacunary::Error::WorkBudgetExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<lacunary::Error> for CliError {
    fn from(e: lacunary::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn run(command: Command, global: &Global) -> Result<()> {
    if let Some(n) = global.threads {
        if n == 0 {
            return usage("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let text = match command {
        Command::Gen(a) => gen(&a, global)?,
        Command::Gap(a) => gap(&a)?.render(global.format.unwrap_or(Format::Json)),
        Command::Dioph(a) => dioph(&a)?.render(global.format.unwrap_or(Format::Json)),
        Command::Aomega(a) => aomega(&a)?.render(global.format.unwrap_or(Format::Json)),
        Command::Moments(a) => moments(&a)?.render(global.format.unwrap_or(Format::Json)),
        Command::Clt(a) => clt(&a, global.seed)?.render(global.format.unwrap_or(Format::Json)),
        Command::Lil(a) => lil(&a, global.seed)?.render(global.format.unwrap_or(Format::Csv)),
        Command::Levy(a) => levy(&a)?.render(global.format.unwrap_or(Format::Csv)),
    };
    match &global.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn load_sequence(path: &Path) -> Result<IntegerSequence> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_sequence(BufReader::new(file))?)
}

fn sequence_config(path: &Path, seq: &IntegerSequence) -> Vec<(&'static str, Value)> {
    vec![
        ("seq", json!(path.display().to_string())),
        ("seq_len", json!(seq.len())),
        ("seq_fingerprint", json!(format!("{:016x}", seq.fingerprint()))),
    ]
}

fn parse_function(s: &str) -> Result<TrigPolynomial> {
    Ok(s.parse::<TrigPolynomial>()?)
}

/// `p/q`, an integer, or a terminating decimal, read exactly.
fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("not a rational number: '{s}'"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let p: BigInt = digits.parse().map_err(|_| bad())?;
    let q = pow10(frac.len());
    Ok(BigRational::new(p, q))
}

fn pow10(e: usize) -> BigInt {
    (0..e).fold(BigInt::from(1), |acc, _| acc * 10)
}

// ---------------------------------------------------------------- gen

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Geometric,
    #[value(name = "erdos_fortet", alias = "erdos-fortet")]
    ErdosFortet,
    Block,
    #[value(name = "random_omega", alias = "random-omega")]
    RandomOmega,
    Hlp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Clt,
    Lil,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Number of terms (number of blocks for `block --variant lil` without --r).
    #[arg(long)]
    count: Option<usize>,
    /// Base of the geometric family.
    #[arg(long, default_value_t = 2)]
    base: u64,
    /// Block variant.
    #[arg(long, value_enum, default_value_t = Variant::Clt)]
    variant: Variant,
    /// Block lengths r_1,r_2,...
    #[arg(long, value_delimiter = ',')]
    r: Vec<u64>,
    /// Omega schedule for the random family: sqrt, logpow:a, constlog:c, const:c, eta:<preset>.
    #[arg(long, default_value = "sqrt")]
    omega: String,
    /// Interval parameter a of the random family.
    #[arg(long, default_value_t = 1)]
    a: u64,
    /// Generating primes of the hlp family.
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    primes: Vec<u64>,
}

fn gen(a: &GenArgs, global: &Global) -> Result<String> {
    let need_count = || a.count.ok_or_else(|| CliError::Usage("--count is required for this family".into()));
    let mut config: Vec<(&'static str, Value)> = vec![("family", json!(family_name(a.family)))];
    let seq = match a.family {
        Family::Geometric => {
            let count = need_count()?;
            config.extend([("base", json!(a.base)), ("count", json!(count))]);
            gen_geometric(a.base, count)?
        }
        Family::ErdosFortet => {
            let count = need_count()?;
            config.push(("count", json!(count)));
            gen_erdos_fortet(count)?
        }
        Family::Block => {
            let params = match (a.variant, a.r.is_empty()) {
                (Variant::Clt, false) => BlockParams::clt_minimal(a.r.clone())?,
                (Variant::Clt, true) => return usage("--r is required for clt blocks"),
                (Variant::Lil, false) => BlockParams::lil_with_r(a.r.clone())?,
                (Variant::Lil, true) => BlockParams::lil_minimal(need_count()?)?,
            };
            config.extend([
                ("variant", json!(format!("{:?}", a.variant).to_lowercase())),
                ("r", json!(params.r)),
            ]);
            gen_block_sequence(params)?.sequence
        }
        Family::RandomOmega => {
            let count = need_count()?;
            let omega: OmegaSchedule = a.omega.parse()?;
            config.extend([
                ("omega", json!(omega.to_string())),
                ("a", json!(a.a)),
                ("count", json!(count)),
                ("seed", json!(global.seed)),
            ]);
            gen_random_omega(&omega, a.a, count, global.seed)?
        }
        Family::Hlp => {
            let count = need_count()?;
            config.extend([("primes", json!(a.primes)), ("count", json!(count))]);
            gen_hlp(&a.primes, count)?
        }
    };
    match global.format {
        Some(Format::Json) => {
            let mut r = Report::new("gen", config);
            r.set("len", seq.len());
            r.set("fingerprint", format!("{:016x}", seq.fingerprint()));
            r.set("terms", seq.terms().iter().map(|t| t.to_string()).collect::<Vec<_>>());
            Ok(r.render(Format::Json))
        }
        _ => {
            let mut buf = format!("# schema={SCHEMA}\n").into_bytes();
            write_sequence(&seq, &mut buf)?;
            Ok(String::from_utf8(buf).expect("ascii"))
        }
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Geometric => "geometric",
        Family::ErdosFortet => "erdos_fortet",
        Family::Block => "block",
        Family::RandomOmega => "random_omega",
        Family::Hlp => "hlp",
    }
}

// ---------------------------------------------------------------- gap

#[derive(Args, Debug)]
pub struct GapArgs {
    #[arg(long)]
    seq: PathBuf,
    /// Required excess: n_{k+1}/n_k >= 1 + eps; `p/q` or a decimal.
    #[arg(long, default_value = "0")]
    eps: String,
    /// First index checked.
    #[arg(long, default_value_t = 1)]
    k0: usize,
}

fn gap(a: &GapArgs) -> Result<Report> {
    let seq = load_sequence(&a.seq)?;
    let eps = parse_rational(&a.eps)?;
    let mut config = sequence_config(&a.seq, &seq);
    config.extend([("eps", json!(eps.to_string())), ("k0", json!(a.k0))]);
    let rep = check_gap(&seq, |_| eps.clone(), a.k0);
    let mut r = Report::new("gap", config);
    r.set("passed", rep.passed);
    if let Some(v) = rep.first_violation {
        r.set(
            "first_violation",
            json!({
                "k": v.k,
                "ratio": v.ratio.to_string(),
                "required": v.required.to_string(),
            }),
        );
    }
    Ok(r)
}

// ---------------------------------------------------------------- dioph

#[derive(Args, Debug)]
pub struct DiophArgs {
    #[arg(long)]
    seq: PathBuf,
    /// Number of terms in a relation.
    #[arg(long)]
    r: usize,
    /// Coefficient bound: 1 <= |a_i| <= amax.
    #[arg(long)]
    amax: u64,
    /// Only indices up to kmax (default: the whole file).
    #[arg(long)]
    kmax: Option<usize>,
    /// Work budget in enumerated partial sums.
    #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
    budget: u64,
}

fn solution_json(seq: &IntegerSequence, s: &DiophantineSolution) -> Vec<Value> {
    vec![
        json!(s.indices),
        json!(s.coeffs),
        json!(s.elements(seq).iter().map(|e| e.to_string()).collect::<Vec<_>>()),
    ]
}

fn dioph(a: &DiophArgs) -> Result<Report> {
    let seq = load_sequence(&a.seq)?;
    let kmax = a.kmax.unwrap_or(seq.len());
    let query = DiophantineQuery::new(a.r, a.amax, kmax).with_budget(a.budget);
    let sols = count_solutions(&seq, &query)?;
    let mut config = sequence_config(&a.seq, &seq);
    config.extend([
        ("r", json!(a.r)),
        ("amax", json!(a.amax)),
        ("kmax", json!(kmax)),
        ("budget", json!(a.budget)),
    ]);
    let mut r = Report::new("dioph", config);
    r.json_lines = true;
    r.set("count", sols.len());
    let mut t = Table::new("solutions", &["indices", "coeffs", "elements"]);
    for s in &sols {
        t.push(solution_json(&seq, s));
    }
    r.tables.push(t);
    Ok(r)
}

// ---------------------------------------------------------------- aomega

#[derive(Args, Debug)]
pub struct AomegaArgs {
    #[arg(long)]
    seq: PathBuf,
    /// sqrt, logpow:a, constlog:c, const:c or eta:<preset>.
    #[arg(long)]
    omega: String,
    /// Level N.
    #[arg(long)]
    level: usize,
    /// Cap on the number of terms of a relation.
    #[arg(long)]
    rmax: usize,
    /// Cap on the coefficient size.
    #[arg(long)]
    amax: u64,
    #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
    budget: u64,
}

fn aomega(a: &AomegaArgs) -> Result<Report> {
    let seq = load_sequence(&a.seq)?;
    let omega: OmegaSchedule = a.omega.parse()?;
    let v = check_a_omega(&seq, &omega, a.level, (a.rmax, a.amax), a.budget)?;
    let mut config = sequence_config(&a.seq, &seq);
    config.extend([
        ("omega", json!(omega.to_string())),
        ("level", json!(a.level)),
        ("rmax", json!(a.rmax)),
        ("amax", json!(a.amax)),
        ("budget", json!(a.budget)),
    ]);
    let mut r = Report::new("aomega", config);
    r.set("level", v.level);
    r.set("omega_n", num(v.omega_n));
    r.set("caps", json!([v.caps.0, v.caps.1]));
    r.set("theoretical", json!([v.theoretical.0, v.theoretical.1]));
    r.set("outcome", v.outcome.to_string());
    if let Some(w) = &v.witness {
        let [indices, coeffs, elements] = <[Value; 3]>::try_from(solution_json(&seq, w)).expect("three fields");
        r.set(
            "witness",
            json!({
                "indices": indices,
                "coeffs": coeffs,
                "elements": elements,
                "relation": witness_summary(&seq, w),
            }),
        );
    }
    r.set("smallest_n_set", json!(v.smallest_n_set));
    Ok(r)
}

// ---------------------------------------------------------------- moments

#[derive(Args, Debug)]
pub struct MomentsArgs {
    /// `cos:j:c,sin:j:c,...`
    #[arg(long)]
    function: String,
    #[arg(long)]
    seq: PathBuf,
    /// Number of terms N.
    #[arg(long = "N")]
    n: usize,
    /// Moment orders.
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    p: Vec<u32>,
    /// Work budget in multiplied frequency terms.
    #[arg(long, default_value_t = DEFAULT_MOMENT_BUDGET)]
    budget: u64,
}

fn moments(a: &MomentsArgs) -> Result<Report> {
    let f = parse_function(&a.function)?;
    let seq = load_sequence(&a.seq)?;
    if a.n < 1 {
        return usage("--N must be at least 1");
    }
    let mut config = sequence_config(&a.seq, &seq);
    config.extend([
        ("function", json!(f.to_string())),
        ("N", json!(a.n)),
        ("p", json!(a.p)),
        ("budget", json!(a.budget)),
    ]);
    let m2 = moment_exact_with_budget(&f, &seq, a.n, 2, a.budget)?;
    let sigma = m2.sqrt();
    let nf = a.n as f64;
    let mut t = Table::new("moments", &["p", "moment", "normalized", "gaussian", "error_scale"]);
    for &p in &a.p {
        let m = moment_exact_with_budget(&f, &seq, a.n, p, a.budget)?;
        let (main, err) = if p >= 2 {
            let (main, err) = lemma1_prediction(p, sigma, a.n)?;
            (num(main), num(err))
        } else {
            (num(if p == 0 { 1.0 } else { 0.0 }), Value::Null)
        };
        t.push(vec![json!(p), num(m), num(m / nf.powf(p as f64 / 2.0)), main, err]);
    }
    let mut r = Report::new("moments", config);
    r.set("N", a.n);
    r.set("variance", num(m2));
    r.set("variance_ratio", num(m2 / (nf * f.l2_norm_sq())));
    r.tables.push(t);
    Ok(r)
}

// ---------------------------------------------------------------- clt

#[derive(Args, Debug)]
pub struct CltArgs {
    #[arg(long)]
    function: String,
    #[arg(long)]
    seq: PathBuf,
    #[arg(long = "N")]
    n: usize,
    /// Grid of M midpoints (2i+1)/(2M); M should be prime.
    #[arg(long, conflicts_with = "random")]
    grid: Option<u64>,
    /// M random dyadic points drawn from --seed instead of a grid.
    #[arg(long)]
    random: Option<usize>,
    /// Arguments of the empirical characteristic function.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    t: Vec<f64>,
    /// Also report the KS distance to N(0, variance).
    #[arg(long)]
    variance: Option<f64>,
    /// Include every sample value in the output.
    #[arg(long)]
    samples: bool,
}

fn clt(a: &CltArgs, seed: u64) -> Result<Report> {
    let f = parse_function(&a.function)?;
    let seq = load_sequence(&a.seq)?;
    let spec = match a.random {
        Some(m) => SampleSpec::random_for(&seq.prefix(a.n.min(seq.len()))?, m, seed),
        None => SampleSpec::grid(a.grid.unwrap_or(DEFAULT_GRID)),
    };
    let sample = sample_sums(&f, &seq, None, a.n, &spec)?;
    let values = sample.values();
    let mut config = sequence_config(&a.seq, &seq);
    config.extend([
        ("function", json!(f.to_string())),
        ("N", json!(a.n)),
        ("sample", json!(spec.to_string())),
        ("t", json!(a.t)),
        ("variance", a.variance.map_or(Value::Null, num)),
        ("samples", json!(a.samples)),
    ]);
    let (mean, var) = mean_and_variance(values)?;
    let mut r = Report::new("clt", config);
    r.set("N", a.n);
    r.set("M", values.len());
    r.set("mean", num(mean));
    r.set("var", num(var));
    r.set("ks", num(ks_fitted_normal(values)?));
    if let Some(v) = a.variance {
        if !(v > 0.0) {
            return usage("--variance must be positive");
        }
        r.set("ks_reference", num(ks_distance(values, normal_cdf(0.0, v)?)?));
    }
    r.set("kurtosis", num(excess_kurtosis(values)?));
    let cf = a
        .t
        .iter()
        .map(|&t| empirical_cf(values, t).map(|c| json!([num(t), num(c.re), num(c.im)])))
        .collect::<lacunary::Result<Vec<_>>>()?;
    r.set("cf", cf);
    if a.samples {
        let mut t = Table::new("samples", &["x_index", "value"]);
        for (i, v) in values.iter().enumerate() {
            t.push(vec![json!(i), num(*v)]);
        }
        r.tables.push(t);
    }
    Ok(r)
}

// ---------------------------------------------------------------- lil

#[derive(Args, Debug)]
pub struct LilArgs {
    #[arg(long)]
    function: String,
    #[arg(long)]
    seq: PathBuf,
    /// Number of terms (default: the whole file).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Number of random sample points.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Checkpoints (default: 4, 8, 16, ... and N).
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
}

fn lil(a: &LilArgs, seed: u64) -> Result<Report> {
    let f = parse_function(&a.function)?;
    let seq = load_sequence(&a.seq)?;
    let n = a.n.unwrap_or(seq.len());
    if n > seq.len() {
        return usage(format!("--N {n} exceeds the sequence length {}", seq.len()));
    }
    let checkpoints = if a.checkpoints.is_empty() {
        let mut c: Vec<usize> = (2..usize::BITS).map(|e| 1usize << e).take_while(|&c| c < n).collect();
        c.push(n);
        c
    } else {
        a.checkpoints.clone()
    };
    let bits = seq.terms()[..n].iter().map(|t| t.bits()).max().unwrap_or(1);
    let precision = (bits + 64).div_ceil(64) * 64;
    let points = (0..a.points as u64)
        .map(|i| random_point(seed, i, precision))
        .collect::<lacunary::Result<Vec<_>>>()?;
    let scan = lil_scan(&f, &seq, None, &points, &checkpoints)?;
    let mut config = sequence_config(&a.seq, &seq);
    config.extend([
        ("function", json!(f.to_string())),
        ("N", json!(n)),
        ("points", json!(a.points)),
        ("precision_bits", json!(precision)),
        ("seed", json!(seed)),
        ("checkpoints", json!(checkpoints)),
    ]);
    let maxima = scan.maxima();
    let mut r = Report::new("lil", config);
    r.set("points_above_one", maxima.iter().filter(|&&m| m > 1.0).count());
    r.set("max_ratio", num(maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
    let mut t = Table::new("ratios", &["x_index", "N", "ratio"]);
    for (i, row) in scan.ratios.iter().enumerate() {
        for (c, ratio) in checkpoints.iter().zip(row) {
            t.push(vec![json!(i), json!(c), num(*ratio)]);
        }
    }
    r.tables.push(t);
    Ok(r)
}

// ---------------------------------------------------------------- levy

#[derive(Args, Debug)]
pub struct LevyArgs {
    /// Points per table.
    #[arg(long, default_value_t = 80)]
    steps: usize,
    /// Range (0, tmax] of the F and G table.
    #[arg(long, default_value_t = 1.0)]
    tmax: f64,
    /// Range [0, psi_tmax] of the characteristic function table.
    #[arg(long, default_value_t = 16.0)]
    psi_tmax: f64,
    /// Range [-ymax, ymax] of the distribution function table.
    #[arg(long, default_value_t = 2.0)]
    ymax: f64,
}

fn levy(a: &LevyArgs) -> Result<Report> {
    if a.steps < 2 {
        return usage("--steps must be at least 2");
    }
    for (name, v) in [("tmax", a.tmax), ("psi-tmax", a.psi_tmax), ("ymax", a.ymax)] {
        if !(v > 0.0 && v.is_finite()) {
            return usage(format!("--{name} must be positive"));
        }
    }
    let s = a.steps;
    let config = vec![
        ("steps", json!(s)),
        ("tmax", num(a.tmax)),
        ("psi_tmax", num(a.psi_tmax)),
        ("ymax", num(a.ymax)),
    ];
    let mut fg = Table::new("fg", &["t", "F", "G"]);
    for i in 1..=s {
        let t = a.tmax * i as f64 / s as f64;
        fg.push(vec![num(t), num(f_func(t)?), num(g_func(t)?)]);
    }
    // x runs over the open interval (-1, 1) without 0, where L jumps
    let mut ll = Table::new("levy", &["x", "L", "density"]);
    for i in 0..2 * s {
        let x = -1.0 + (i as f64 + 0.5) / s as f64;
        ll.push(vec![num(x), num(levy_l(x)?), num(levy_density(x)?)]);
    }
    let mut cf = Table::new("cf", &["t", "re", "im"]);
    for i in 0..=s {
        let t = a.psi_tmax * i as f64 / s as f64;
        let c = char_function(t);
        cf.push(vec![num(t), num(c.re), num(c.im)]);
    }
    let ys: Vec<f64> = (0..=s).map(|i| a.ymax * (2.0 * i as f64 / s as f64 - 1.0)).collect();
    let mut cdf = Table::new("cdf", &["y", "cdf"]);
    for (y, c) in ys.iter().zip(limit_cdf_grid(&ys)) {
        cdf.push(vec![num(*y), num(c)]);
    }
    let mut r = Report::new("levy", config);
    r.tables = vec![fg, ll, cf, cdf];
    Ok(r)
}
