use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num::{BigRational, Signed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bsf_core::beta::parse_rational;
use bsf_core::constructor::{
    build_checkpointed_stream, build_property_p_stream, Budget, Certificate, PropertyPSchedule,
    TargetPlan, WindowRule,
};
use bsf_core::format::{decimal12, read_digit_file, DigitWriter, Record};
use bsf_core::freqstats::{cesaro_trajectory, frequency_vector_in, l1_distance, BlockIndex};
use bsf_core::spectrum::{invariant_polytope, is_in_spectrum, parry_measure};
use bsf_core::suites::{run_suite, SuiteOptions};
use bsf_core::{
    BetaSystem, DenominatorMode, Error, FrequencyVector, QuadraticNumber, ShiftKind, ShiftSpec,
    Word,
};

use crate::config::Config;
use crate::{AnalyzeArgs, ConstructArgs, ExpandArgs, Failure, SampleArgs, SpectrumArgs, VerifyArgs};

type CmdResult = Result<(), Failure>;

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::input(format!("creating {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_shift(s: &str) -> Result<ShiftSpec, Failure> {
    Ok(s.parse::<ShiftSpec>()?)
}

/// Sets the specification constant from the flag, or probes for it.
fn with_spec_constant(spec: ShiftSpec, given: Option<usize>) -> Result<ShiftSpec, Failure> {
    if let Some(j) = given {
        return Ok(spec.with_spec_constant(j));
    }
    let probe = spec.context_len().max(1) + 1;
    Ok(spec.with_computed_spec_constant(probe, 64)?)
}

/// Parses `;`-separated target vectors over `L_k`, rejecting any outside the
/// spectrum.
fn parse_targets(spec: &ShiftSpec, k: usize, text: &str) -> Result<Vec<FrequencyVector>, Failure> {
    let blocks = Arc::new(spec.enumerate_language(k)?);
    let mut out = Vec::new();
    for part in text.split([';', '\n']).map(str::trim).filter(|p| !p.is_empty() && !p.starts_with('#')) {
        let q = FrequencyVector::parse(blocks.clone(), part)?;
        if !is_in_spectrum(&q, spec, k)? {
            return Err(Error::Infeasible(format!(
                "target ({part}) is outside the frequency spectrum of {spec} for k = {k}: \
                 no shift-invariant measure has these block frequencies"
            ))
            .into());
        }
        out.push(q);
    }
    Ok(out)
}

fn vector_token(q: &FrequencyVector) -> String {
    q.entries()
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn exact(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn expand(a: ExpandArgs, cfg: &Config) -> CmdResult {
    let beta: String = cfg.require(a.beta, "beta")?;
    let x: String = cfg.require(a.x, "x")?;
    let n: usize = cfg.require(a.n, "n")?;
    let out_path: Option<PathBuf> = cfg.pick(a.out, "out")?;
    let sys = BetaSystem::parse(&beta)?;
    let value = parse_rational(&x)?;
    if value.is_negative() || value >= BigRational::from_integer(1.into()) {
        return Err(Failure::input(format!("x = {x} is outside [0, 1)")));
    }
    let digits = sys.greedy_expansion(&QuadraticNumber::rational(value), n)?;
    let mut w = DigitWriter::new(output(out_path.as_deref())?);
    w.header("shift", &ShiftSpec::beta(sys).describe())?;
    w.header("x", &x)?;
    w.extend(digits.iter().copied())?;
    w.finish()?;
    Ok(())
}

fn certificate_record(c: &Certificate) -> Record {
    match c {
        Certificate::Checkpoint(e) => Record::new()
            .with("kind", "checkpoint")
            .with("stage", e.stage)
            .with("target", e.target_index)
            .with("n", e.n)
            .with("precision", e.precision)
            .with("stage_len", e.stage_len)
            .with("distance", decimal12(&e.distance))
            .with("exact", exact(&e.distance))
            .with("epsilon", &e.epsilon),
        Certificate::Window(w) => Record::new()
            .with("kind", "window")
            .with("stage", w.stage)
            .with("target", w.tuple.target_index)
            .with("m", w.tuple.m)
            .with("i", w.tuple.i)
            .with("h", w.tuple.h)
            .with("precision", w.precision)
            .with("gamma_len", w.gamma_len)
            .with("copies", w.copies)
            .with("j", w.j)
            .with("window_end", w.window_end)
            .with("checkpoint_distance", format!("{:.12}", w.checkpoint_distance))
            .with("sup_distance", format!("{:.12}", w.sup_distance))
            .with("epsilon", format!("{:.12}", w.epsilon)),
    }
}

pub fn construct(a: ConstructArgs, cfg: &Config) -> CmdResult {
    let shift: String = cfg.require(a.shift, "shift")?;
    let k: usize = cfg.pick(a.k, "k")?.unwrap_or(1);
    let method: String = cfg.pick(a.method, "method")?.unwrap_or_else(|| "checkpoint".into());
    let cycle = cfg.flag(a.cycle, "cycle")?;
    let spec_constant = cfg.pick(a.spec_constant, "spec_constant")?;
    let spec = with_spec_constant(parse_shift(&shift)?, spec_constant)?;

    let mut target_text = cfg.pick(a.targets, "targets")?.unwrap_or_default();
    if let Some(path) = cfg.pick::<PathBuf>(a.targets_file, "targets_file")? {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Failure::input(format!("reading {}: {e}", path.display())))?;
        target_text.push(';');
        target_text.push_str(&text);
    }
    let targets = parse_targets(&spec, k, &target_text)?;

    let mut budget = Budget::default();
    if let Some(s) = cfg.pick(a.symbols, "symbols")? {
        budget.max_symbols = s;
    }
    if let Some(s) = cfg.pick(a.max_stages, "max_stages")? {
        budget.max_stages = s;
    }
    let mut headers = vec![("shift", spec.describe()), ("k", k.to_string()), ("method", method.clone())];

    let (stream, open_ended) = match method.as_str() {
        "checkpoint" => {
            let eps: String = cfg.pick(a.epsilon, "epsilon")?.unwrap_or_else(|| "1/10".into());
            let epsilon = parse_rational(&eps)?;
            let mut plan = TargetPlan::new(targets, epsilon);
            if let Some(p) = cfg.pick::<String>(a.prefix, "prefix")? {
                plan = plan.with_prefix(p.parse::<Word>()?);
            }
            if cycle {
                plan = plan.cycling();
            }
            headers.push(("epsilon", eps));
            (build_checkpointed_stream(&spec, plan, &budget)?, cycle)
        }
        "property-p" => {
            let h: u64 = cfg.pick(a.h, "h")?.unwrap_or(10);
            let window: String = cfg.pick(a.window, "window")?.unwrap_or_else(|| "8".into());
            let rule = if window == "tower" {
                WindowRule::TowerExact
            } else {
                WindowRule::WindowFactor(
                    window
                        .parse()
                        .map_err(|_| Failure::input(format!("window must be an integer or `tower`, got {window:?}")))?,
                )
            };
            let mut schedule = PropertyPSchedule::new(targets, h, rule);
            schedule.cycle = true;
            headers.push(("h", h.to_string()));
            headers.push(("window", window));
            (build_property_p_stream(&spec, schedule, &budget)?, true)
        }
        other => return Err(Failure::input(format!("unknown method {other:?}; use checkpoint or property-p"))),
    };

    let out_path: Option<PathBuf> = cfg.pick(a.out, "out")?;
    let mut w = DigitWriter::new(output(out_path.as_deref())?);
    for (key, v) in &headers {
        w.header(key, v)?;
    }
    let mut stream = stream;
    w.extend(stream.by_ref())?;
    w.finish()?;

    if let Some(path) = cfg.pick::<PathBuf>(a.certificates, "certificates")? {
        let mut out = output(Some(&path))?;
        for c in stream.certificates() {
            writeln!(out, "{}", certificate_record(&c))?;
        }
        out.flush()?;
    }
    match stream.termination() {
        None => Ok(()),
        Some(Error::Budget { what: "symbol", limit }) if open_ended => {
            eprintln!("bsf: stopped at the symbol budget of {limit}");
            Ok(())
        }
        Some(e) => Err(e.clone().into()),
    }
}

pub fn analyze(a: AnalyzeArgs, cfg: &Config) -> CmdResult {
    let input: PathBuf = cfg.require(a.input, "input")?;
    let file = File::open(&input).map_err(|e| Failure::input(format!("opening {}: {e}", input.display())))?;
    let digits = read_digit_file(BufReader::new(file))?;
    let shift = match cfg.pick::<String>(a.shift, "shift")? {
        Some(s) => s,
        None => digits
            .header("shift")
            .map(str::to_string)
            .ok_or_else(|| Failure::input("no --shift given and the file has no shift header"))?,
    };
    let spec = parse_shift(&shift)?;
    let k: usize = cfg.pick(a.k, "k")?.unwrap_or(1);
    let r: usize = cfg.pick(a.r, "r")?.unwrap_or(0);
    let symbols = digits.symbols.as_slice();
    if k == 0 || k > symbols.len() {
        return Err(Failure::input(format!(
            "k = {k} must be in 1..={} (the file length)",
            symbols.len()
        )));
    }
    let checkpoints: Vec<u64> = match cfg.pick::<String>(a.checkpoints, "checkpoints")? {
        Some(text) => text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Failure::input(format!("bad checkpoint {t:?}")))
            })
            .collect::<Result<_, _>>()?,
        None => vec![symbols.len() as u64],
    };
    let mut sorted = checkpoints.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&last) = sorted.last() {
        if last as usize > symbols.len() || sorted[0] == 0 {
            return Err(Failure::input(format!(
                "checkpoints must lie in 1..={}",
                symbols.len()
            )));
        }
    }
    if !spec.is_allowed(symbols)? {
        return Err(Failure::input(format!("the digits are not an allowed word of {spec}")));
    }

    let mut out = output(cfg.pick::<PathBuf>(a.out, "out")?.as_deref())?;
    let points = cesaro_trajectory(symbols.iter().copied(), k, r, &spec, &sorted).map_err(Error::from)?;
    for p in &points {
        for (block, value) in p.vector.iter() {
            let record = Record::new()
                .with("n", p.n)
                .with("r", p.r)
                .with("block", block)
                .with("value", decimal12(value))
                .with("exact", exact(&reduced(value)));
            writeln!(out, "{record}")?;
        }
    }
    if let Some(text) = cfg.pick::<String>(a.targets, "targets")? {
        let targets = parse_targets(&spec, k, &text)?;
        let index = BlockIndex::new(&spec, k)?;
        for &n in &sorted {
            let p = frequency_vector_in(&index, &symbols[..n as usize], DenominatorMode::FittedWindows)?;
            for (t, q) in targets.iter().enumerate() {
                let d = l1_distance(&p, q)?;
                let record = Record::new()
                    .with("kind", "distance")
                    .with("n", n)
                    .with("target", t)
                    .with("distance", decimal12(&d))
                    .with("exact", exact(&d));
                writeln!(out, "{record}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn reduced(x: &BigRational) -> BigRational {
    BigRational::new(x.numer().clone(), x.denom().clone())
}

pub fn spectrum(a: SpectrumArgs, cfg: &Config) -> CmdResult {
    let spec = parse_shift(&cfg.require::<String>(a.shift, "shift")?)?;
    let k: usize = cfg.pick(a.k, "k")?.unwrap_or(1);
    let q: u64 = cfg.pick(a.q, "q")?.unwrap_or(4);
    let polytope = invariant_polytope(&spec, k)?;
    let mut out = output(cfg.pick::<PathBuf>(a.out, "out")?.as_deref())?;
    writeln!(
        out,
        "{}",
        Record::new()
            .with("kind", "blocks")
            .with("k", k)
            .with("lift", polytope.lift_level())
            .with("words", polytope.blocks().iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","))
    )?;
    for c in polytope.constraints() {
        let terms: Vec<String> = c.terms.iter().map(|(w, a)| format!("{a:+}*{w}")).collect();
        let record = Record::new()
            .with("kind", "constraint")
            .with("label", &c.label)
            .with("terms", terms.join(""))
            .with("rhs", &c.rhs);
        writeln!(out, "{record}")?;
    }
    for v in polytope.vertices()? {
        let record = Record::new()
            .with("kind", "vertex")
            .with("vector", vector_token(&v.vector))
            .with("cycle", &v.cycle);
        writeln!(out, "{record}")?;
    }
    for t in polytope.rational_targets(q)?.targets {
        writeln!(out, "{}", Record::new().with("kind", "target").with("vector", vector_token(&t)))?;
    }
    out.flush()?;
    Ok(())
}

pub fn verify(a: VerifyArgs, cfg: &Config) -> CmdResult {
    let mut opts = SuiteOptions::default();
    if let Some(w) = cfg.pick(a.window, "window")? {
        opts.window_factor = w;
    }
    if let Some(s) = cfg.pick(a.seed, "seed")? {
        opts.seed = s;
    }
    if let Some(s) = cfg.pick(a.symbols, "symbols")? {
        opts.budget.max_symbols = s;
    }
    let reports = run_suite(&a.suite, &opts)?;
    let mut out = io::stdout().lock();
    let mut failed = Vec::new();
    for report in &reports {
        for c in &report.cases {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{status} {} :: {} :: {}", report.suite, c.name, c.detail)?;
        }
        let verdict = match (report.negative_control, report.succeeded()) {
            (false, true) => "ok".to_string(),
            (false, false) => format!("FAILED ({} of {} cases)", report.failures(), report.cases.len()),
            (true, true) => format!(
                "expected failure: {} of {} cases violated (negative control)",
                report.failures(),
                report.cases.len()
            ),
            (true, false) => "negative control found no violation".to_string(),
        };
        writeln!(out, "suite {}: {verdict}", report.suite)?;
        if !report.succeeded() {
            failed.push(report.suite.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: 5,
            message: format!("verification failed: {}", failed.join(", ")),
        })
    }
}

pub fn sample(a: SampleArgs, cfg: &Config) -> CmdResult {
    let spec = parse_shift(&cfg.require::<String>(a.shift, "shift")?)?;
    if matches!(spec.kind(), ShiftKind::Beta(_)) {
        return Err(Failure::input("sampling needs a full shift or a forbidden-word shift"));
    }
    let n: usize = cfg.require(a.n, "n")?;
    let seed: u64 = cfg.pick(a.seed, "seed")?.unwrap_or(1);
    let mu = parry_measure(&spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = mu.sample_path(&mut rng, n);
    let mut w = DigitWriter::new(output(cfg.pick::<PathBuf>(a.out, "out")?.as_deref())?);
    w.header("shift", &spec.describe())?;
    w.header("seed", &seed.to_string())?;
    w.header("entropy", &format!("{:.12}", mu.entropy()))?;
    w.extend(path.iter().copied())?;
    w.finish()?;
    Ok(())
}
