//! Differential soundness testing: random small programs are typechecked,
//! and every accepted one is run through the log oracle.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::driver::{check_sources, Options};
use crate::log::{oracle, OracleVerdict};
use crate::typeck::CheckConfig;

/// A generated program kept as lines so commands can be deleted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenProgram {
    pub externs: Vec<String>,
    pub signature: String,
    pub body: Vec<String>,
}

impl GenProgram {
    pub fn source(&self) -> String {
        let mut out = self.externs.join("\n");
        out.push('\n');
        out.push_str(&self.signature);
        out.push_str(" {\n");
        for c in &self.body {
            out.push_str("  ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str("}\n");
        out
    }
}

fn ev(offset: u64) -> String {
    if offset == 0 {
        "G".to_string()
    } else {
        format!("G+{offset}")
    }
}

fn window(start: u64, len: u64) -> String {
    format!("@[{}, {}]", ev(start), ev(start + len))
}

struct Extern {
    /// (start, length) of each input window, relative to the event.
    inputs: Vec<(u64, u64)>,
    out_start: u64,
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    *xs.choose(rng).expect("non-empty")
}

/// Draws a window length, usually shrunk to fit within `delay`.
fn fit(rng: &mut ChaCha8Rng, lens: &[u64], delay: u64) -> u64 {
    let len = pick(rng, lens);
    if len > delay && rng.gen_bool(0.8) {
        delay
    } else {
        len
    }
}

/// Draws a program with at most 3 instances and 5 invocations, offsets and
/// delays at most 8. Small delays, repeated instances, and arguments that
/// line up with their sources are favored so that a fair share of programs
/// typecheck and the pipelining rules are exercised.
pub fn generate(rng: &mut ChaCha8Rng) -> GenProgram {
    let mut externs = Vec::new();
    let mut shapes = Vec::new();
    let mut delays = Vec::new();
    for k in 0..rng.gen_range(1..=2) {
        let d = pick(rng, &[1u64, 1, 1, 2, 2, 3, 4, 8]);
        let inputs: Vec<(u64, u64)> = (0..rng.gen_range(1..=2))
            .map(|_| (pick(rng, &[0u64, 0, 1, 2]), fit(rng, &[1, 1, 1, 2], d)))
            .collect();
        let out_start = rng.gen_range(0..=3);
        let ins: Vec<String> =
            inputs.iter().enumerate().map(|(j, (s, l))| format!("{} in{j}: 8", window(*s, *l))).collect();
        externs.push(format!(
            "extern comp E{k}<G: {d}>(@interface[G] go: 1, {}) -> ({} out: 8);",
            ins.join(", "),
            window(out_start, 1)
        ));
        shapes.push(Extern { inputs, out_start });
        delays.push(d);
    }

    let slowest = delays.iter().copied().max().unwrap_or(1);
    let delay = match pick(rng, &[1u64, 1, 2, 2, 3, 4, 6, 8]) {
        d if d < slowest && rng.gen_bool(0.7) => slowest,
        d => d,
    };
    // Available sources as (name, start, end).
    let mut sources: Vec<(String, u64, u64)> = Vec::new();
    let mut inputs = Vec::new();
    for j in 0..rng.gen_range(1..=2) {
        let (s, l) = (pick(rng, &[0u64, 0, 0, 1, 2]), fit(rng, &[1, 1, 1, 2, 3], delay));
        inputs.push(format!("{} x{j}: 8", window(s, l)));
        sources.push((format!("x{j}"), s, s + l));
    }

    let mut body = Vec::new();
    let n_inst = rng.gen_range(1..=3);
    let kinds: Vec<usize> = (0..n_inst).map(|_| rng.gen_range(0..shapes.len())).collect();
    for (i, k) in kinds.iter().enumerate() {
        body.push(format!("I{i} := new E{k};"));
    }
    let mut outs: Vec<(String, u64)> = Vec::new();
    for v in 0..rng.gen_range(1..=5) {
        let i = if rng.gen_bool(0.6) { 0 } else { rng.gen_range(0..n_inst) };
        let shape = &shapes[kinds[i]];
        let (s0, _) = shape.inputs[0];
        let anchor = sources.choose(rng).expect("non-empty").1;
        let offset = if rng.gen_bool(0.8) && anchor >= s0 && anchor - s0 <= 8 {
            anchor - s0
        } else {
            pick(rng, &[0u64, 0, 1, 1, 2, 3, 4, 6, 8])
        };
        let args: Vec<String> = shape
            .inputs
            .iter()
            .map(|(s, l)| {
                let (need_s, need_e) = (offset + s, offset + s + l);
                let fits: Vec<&String> =
                    sources.iter().filter(|(_, a, b)| *a <= need_s && need_e <= *b).map(|(n, _, _)| n).collect();
                if !fits.is_empty() && rng.gen_bool(0.9) {
                    (*fits.choose(rng).unwrap()).clone()
                } else {
                    sources.choose(rng).expect("non-empty").0.clone()
                }
            })
            .collect();
        body.push(format!("v{v} := I{i}<{}>({});", ev(offset), args.join(", ")));
        let out = offset + shape.out_start;
        outs.push((format!("v{v}"), out));
        sources.push((format!("v{v}.out"), out, out + 1));
    }
    let (src, avail) = outs.choose(rng).unwrap().clone();
    let out_start = if rng.gen_bool(0.9) { avail } else { rng.gen_range(0..=8) };
    body.push(format!("y = {src}.out;"));
    let signature = format!(
        "comp Main<G: {delay}>(@interface[G] go: 1, {}) -> ({} y: 8)",
        inputs.join(", "),
        window(out_start, 1)
    );
    GenProgram { externs, signature, body }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Did not parse or resolve.
    Malformed,
    /// Rejected; carries the first diagnostic's kind.
    Rejected(String),
    Accepted,
    /// Accepted, yet the oracle finds a hazard.
    Unsound(String),
}

pub fn judge(src: &str, checks: CheckConfig) -> Outcome {
    let checked = check_sources(&[("fuzz.fil".to_string(), src.to_string())], &Options { stdlib: false, checks });
    let Some(rp) = &checked.program else { return Outcome::Malformed };
    if !checked.diagnostics.is_empty() {
        return Outcome::Rejected(checked.diagnostics[0].code.name());
    }
    match oracle(rp, rp.get("Main")) {
        OracleVerdict::Ok => Outcome::Accepted,
        OracleVerdict::IllFormed(v) => Outcome::Unsound(format!("ill-formed log: {v}")),
        OracleVerdict::Unpipelinable(p) => Outcome::Unsound(format!("unsafe pipelining: {p}")),
    }
}

/// Deletes body commands one at a time while the program stays unsound.
pub fn minimize(p: &GenProgram, checks: CheckConfig) -> GenProgram {
    let mut best = p.clone();
    loop {
        let mut shrunk = false;
        for i in (0..best.body.len()).rev() {
            let mut cand = best.clone();
            cand.body.remove(i);
            if matches!(judge(&cand.source(), checks), Outcome::Unsound(_)) {
                best = cand;
                shrunk = true;
            }
        }
        if !shrunk {
            return best;
        }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub trial: u64,
    pub reason: String,
    pub program: GenProgram,
    pub minimized: GenProgram,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub trials: u64,
    pub accepted: u64,
    pub rejected: u64,
    /// Rejections by the kind of their first diagnostic.
    pub rejected_by: std::collections::BTreeMap<String, u64>,
    pub malformed: u64,
    pub violations: Vec<Counterexample>,
}

impl fmt::Display for FuzzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rate = if self.trials == 0 { 0.0 } else { 100.0 * self.accepted as f64 / self.trials as f64 };
        writeln!(
            f,
            "trials: {}  accepted: {} ({rate:.1}%)  rejected: {}  malformed: {}  violations: {}",
            self.trials,
            self.accepted,
            self.rejected,
            self.malformed,
            self.violations.len()
        )?;
        for (code, n) in &self.rejected_by {
            writeln!(f, "  rejected with {code}: {n}")?;
        }
        for cx in &self.violations {
            writeln!(f, "\ntrial {}: {}\n{}", cx.trial, cx.reason, cx.minimized.source())?;
        }
        Ok(())
    }
}

fn run_trial(seed: u64, trial: u64, checks: CheckConfig) -> (Outcome, GenProgram) {
    let program = generate(&mut trial_rng(seed, trial));
    (judge(&program.source(), checks), program)
}

fn counterexample(trial: u64, reason: String, program: GenProgram, checks: CheckConfig) -> Counterexample {
    let minimized = minimize(&program, checks);
    Counterexample { trial, reason, program, minimized }
}

/// Runs `trials` independent trials in parallel; reports at most
/// `keep` minimized counterexamples.
pub fn fuzz(seed: u64, trials: u64, checks: CheckConfig, keep: usize) -> FuzzReport {
    let results: Vec<(u64, Outcome, GenProgram)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (o, p) = run_trial(seed, t, checks);
            (t, o, p)
        })
        .collect();
    let mut report = FuzzReport { trials, ..Default::default() };
    for (t, o, p) in results {
        match o {
            Outcome::Malformed => report.malformed += 1,
            Outcome::Rejected(code) => {
                report.rejected += 1;
                *report.rejected_by.entry(code).or_default() += 1;
            }
            Outcome::Accepted => report.accepted += 1,
            Outcome::Unsound(reason) => {
                report.accepted += 1;
                if report.violations.len() < keep {
                    report.violations.push(counterexample(t, reason, p, checks));
                } else {
                    report.violations.push(Counterexample { trial: t, reason, minimized: p.clone(), program: p });
                }
            }
        }
    }
    report
}

/// Lowest-numbered unsound trial, if any.
pub fn first_violation(seed: u64, trials: u64, checks: CheckConfig) -> Option<Counterexample> {
    (0..trials)
        .into_par_iter()
        .find_map_first(|t| match run_trial(seed, t, checks) {
            (Outcome::Unsound(reason), p) => Some((t, reason, p)),
            _ => None,
        })
        .map(|(t, reason, p)| counterexample(t, reason, p, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_and_bounded() {
        for t in 0..200 {
            let a = generate(&mut trial_rng(0, t));
            assert_eq!(a, generate(&mut trial_rng(0, t)));
            let instances = a.body.iter().filter(|c| c.contains(":= new")).count();
            let invokes = a.body.iter().filter(|c| c.contains(":= I")).count();
            assert!((1..=3).contains(&instances) && (1..=5).contains(&invokes));
            assert_ne!(judge(&a.source(), CheckConfig::default()), Outcome::Malformed, "{}", a.source());
        }
    }

    #[test]
    fn zero_trials_is_an_empty_report() {
        let r = fuzz(0, 0, CheckConfig::default(), 1);
        assert_eq!(r, FuzzReport::default());
    }

    #[test]
    fn small_campaign_is_sound() {
        let r = fuzz(1, 300, CheckConfig::default(), 1);
        assert!(r.violations.is_empty(), "{r}");
        assert!(r.accepted > 0 && r.rejected > 0, "{r}");
    }

    #[test]
    fn minimization_keeps_the_violation() {
        let checks = CheckConfig::without("conflicts").unwrap();
        let cx = first_violation(0, 2000, checks).expect("a conflict slips through");
        assert!(cx.minimized.body.len() <= cx.program.body.len());
        assert!(matches!(judge(&cx.minimized.source(), checks), Outcome::Unsound(_)));
    }
}
