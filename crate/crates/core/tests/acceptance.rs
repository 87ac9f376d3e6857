//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use fil_core::diag::Code;
use fil_core::fuzz::{first_violation, fuzz};
use fil_core::log::component_log;
use fil_core::low::{verify_low, Guard};
use fil_core::netlist::{build, NetlistSim};
use fil_core::parser::parse;
use fil_core::sim::{captured, check_trace, gen_stimulus, run_and_check, simulate, LowSim, Mode};
use fil_core::typeck::CheckConfig;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn codes(file: &str) -> Vec<Code> {
    check(file).diagnostics.iter().map(|d| d.code).collect()
}

fn verdicts() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(1);
    let start = Instant::now();

    let naive = check("alu_naive.fil");
    ensure(naive.diagnostics.len() == 1, format!("naive ALU: {} diagnostics", naive.diagnostics.len()))?;
    let d = &naive.diagnostics[0];
    ensure(d.code == Code::InsufficientAvailability, format!("naive ALU: {:?}", d.code))?;
    ensure(
        d.message.contains("[G+2, G+3)") && d.message.contains("[G, G+1)"),
        format!("naive ALU message: {}", d.message),
    )?;
    ensure(codes("alu_sequential.fil").contains(&Code::DelayTooShort), "sequential ALU lacks DelayTooShort")?;
    ensure(codes("alu_slow_mult.fil").contains(&Code::UnsafeTrigger), "slow-multiplier ALU lacks UnsafeTrigger")?;
    for f in ["alu.fil", "div_comb.fil", "div_pipe.fil", "div_iter.fil"] {
        let c = check(f);
        ensure(c.ok(), format!("{f} rejected:\n{}", c.render()))?;
    }
    ensure(!check("div_iter_fast.fil").ok(), "iterative divider with delay 1 accepted")?;
    ensure(codes("shared_mult.fil").contains(&Code::PipelineSpanExceedsDelay), "shared multiplier accepted")?;
    ensure(codes("dyn.fil").contains(&Code::MixedEventSharing), "mixed-event sharing accepted")?;

    let elapsed = start.elapsed();
    ensure(elapsed < BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!("10 verdicts in {elapsed:.2?} (budget {BUDGET:?})"))
}

fn oracle_goldens() -> Outcome {
    let cases = [
        (
            "extern comp add<G: 1>(@interface[G] go: 1, @[G, G+1] l: 32, @[G, G+1] r: 32) -> (@[G, G+1] out: 32);",
            include_str!("../goldens/add.log"),
        ),
        (
            "extern comp mul<G: 2>(@interface[G] go: 1, @[G, G+1] l: 32, @[G, G+1] r: 32) -> (@[G+2, G+3] out: 32);",
            include_str!("../goldens/mul.log"),
        ),
    ];
    for (src, golden) in cases {
        let c = parse(src).map_err(|e| e.message)?.components.remove(0);
        let at0: HashMap<String, u64> = c.events.iter().map(|e| (e.var.clone(), 0)).collect();
        let got = component_log(&c, &at0).dump();
        ensure(got == golden, format!("`{}` log:\n{got}expected:\n{golden}", c.name))?;
    }
    Ok("add and mul logs byte-identical to goldens".into())
}

fn differential_soundness() -> Outcome {
    const TRIALS: u64 = 10_000;
    const BUDGET: Duration = Duration::from_secs(60);
    let start = Instant::now();
    let report = fuzz(0, TRIALS, CheckConfig::default(), 1);
    ensure(report.violations.is_empty(), format!("unsound acceptance:\n{report}"))?;
    let mut found = Vec::new();
    for m in CheckConfig::MUTATIONS {
        let cfg = CheckConfig::without(m).expect("known check");
        let cx = first_violation(0, TRIALS, cfg).ok_or_else(|| format!("disabling {m} went unnoticed"))?;
        found.push(format!("{m}@{}", cx.trial));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{TRIALS} trials, {} accepted, 0 violations; mutations caught at trial {}; {elapsed:.1?}",
        report.accepted,
        found.join(", ")
    ))
}

fn lowering_goldens() -> Outcome {
    let (_, lp) = load("adder_reuse.fil");
    let got = lp.to_string();
    ensure(got == include_str!("../goldens/adder_reuse.low"), format!("lowered text:\n{got}"))?;
    let c = lp.get("Example").ok_or("missing Example")?;
    ensure(c.fsms.len() == 1 && c.fsms[0].states == 3, "expected one 3-state FSM")?;
    let go: Vec<String> = c.assigns.iter().filter(|a| a.dst == "A.go").map(|a| a.guard.to_string()).collect();
    ensure(go == ["Gf._0", "Gf._2"], format!("go guards {go:?}"))?;
    verify_low(c).map_err(|e| e.to_string())?;
    let (_, lp) = load("continuous.fil");
    let pairs = lp.get("Pairs").ok_or("missing Pairs")?;
    ensure(pairs.fsms.is_empty(), "continuous pipeline has an FSM")?;
    ensure(pairs.assigns.iter().all(|a| a.guard == Guard::True), "continuous pipeline has guards")?;
    Ok("3-state FSM, go at stages 0 and 2, disjoint guards; phantom pipeline has 0 FSMs".into())
}

/// Runs `vectors` back-to-back and each one alone; both must match `golden`
/// and each other.
fn pipelined_run(
    file: &str,
    top: &str,
    vectors: &[Vector],
    golden: &dyn Fn(&Vector) -> Vector,
) -> Result<Vec<u64>, String> {
    let (rp, lp) = load(file);
    let sig = rp.get(top);
    let stim = gen_stimulus(sig, vectors, Mode::BackToBack, 0).map_err(|e| e.to_string())?;
    let mut sim = LowSim::new(&rp, &lp, top).map_err(|e| e.to_string())?;
    let trace = simulate(&mut sim, &stim).map_err(|e| e.to_string())?;
    let bad = check_trace(&trace, &stim, vectors, golden);
    ensure(bad.is_empty(), format!("{top}: {}", bad.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("; ")))?;
    ensure(trace.invalid_reads.is_empty(), format!("{top}: invalid reads {:?}", trace.invalid_reads))?;
    let together = captured(&trace, &stim);
    for (k, v) in vectors.iter().enumerate() {
        let one = std::slice::from_ref(v);
        let s = gen_stimulus(sig, one, Mode::BackToBack, 0).map_err(|e| e.to_string())?;
        let mut sim = LowSim::new(&rp, &lp, top).map_err(|e| e.to_string())?;
        let t = simulate(&mut sim, &s).map_err(|e| e.to_string())?;
        ensure(captured(&t, &s)[0] == together[k], format!("{top}: vector {k} differs when run alone"))?;
    }
    Ok(stim.triggers)
}

fn simulation() -> Outcome {
    let mut alu = random_vectors(&load("alu.fil").0, "ALU", 100, 1);
    for v in &mut alu {
        *v.get_mut("op").expect("op") &= 1;
    }
    let t = pipelined_run("alu.fil", "ALU", &alu, &alu_golden)?;
    ensure(t.windows(2).all(|w| w[1] - w[0] == 1), "ALU not triggered every cycle")?;
    let (rp, _) = load("alu.fil");
    let out = rp.get("ALU").output("o").and_then(|p| p.interval()).ok_or("ALU output")?;
    ensure(out.start.offset == 2, "ALU latency is not 2")?;

    let div = division_vectors(100, 2);
    pipelined_run("div_pipe.fil", "Pipe", &div, &division_golden)?;
    let (rp, _) = load("div_pipe.fil");
    let q = rp.get("Pipe").output("q").and_then(|p| p.interval()).ok_or("Pipe output")?;
    ensure(q.start.offset == 7, "pipelined quotient is not at t+7")?;

    let t = pipelined_run("div_iter.fil", "Iter", &division_vectors(100, 3), &division_golden)?;
    ensure(t.windows(2).all(|w| w[1] - w[0] == 8), "iterative divider not triggered every 8 cycles")?;
    Ok("ALU 100/100 (II 1, latency 2), pipelined divider 100/100 (q at t+7), iterative divider 100/100 (II 8); back-to-back = isolated".into())
}

fn harness_discipline() -> Outcome {
    let (rp, lp) = load("div_pipe.fil");
    let vectors = division_vectors(20, 4);
    let stim = gen_stimulus(rp.get("Pipe"), &vectors, Mode::BackToBack, 0).map_err(|e| e.to_string())?;
    for port in ["left", "right"] {
        let driven = stim.inputs.iter().filter(|f| f[port].as_bits().is_some()).count();
        ensure(driven == vectors.len(), format!("`{port}` driven for {driven} cycles"))?;
    }
    let mut sim = LowSim::new(&rp, &lp, "Pipe").map_err(|e| e.to_string())?;
    let bad = run_and_check(&mut sim, rp.get("Pipe"), &vectors, Mode::BackToBack, 0, &division_golden)
        .map_err(|e| e.to_string())?;
    ensure(bad.is_empty(), format!("one-cycle inputs failed: {bad:?}"))?;

    let sum3 = |v: &Vector| -> Vector { [("out".to_string(), 3 * v["x"])].into_iter().collect() };
    let vectors: Vec<Vector> = (1..=10).map(|x| [("x".to_string(), x)].into_iter().collect()).collect();
    let (rp, lp) = load("sum3.fil");
    let mut sim = LowSim::new(&rp, &lp, "Sum3").map_err(|e| e.to_string())?;
    let bad = run_and_check(&mut sim, rp.get("Sum3"), &vectors, Mode::BackToBack, 0, &sum3).map_err(|e| e.to_string())?;
    ensure(bad.is_empty(), format!("correctly declared Sum3 failed: {bad:?}"))?;

    let (rp, lp) = load("sum3_misdeclared.fil");
    let mut sim = LowSim::new(&rp, &lp, "Sum3").map_err(|e| e.to_string())?;
    let bad = run_and_check(&mut sim, rp.get("Sum3"), &vectors, Mode::BackToBack, 0, &sum3).map_err(|e| e.to_string())?;
    ensure(!bad.is_empty(), "mis-declared Sum3 passed")?;
    Ok(format!("1-cycle divider inputs pass; mis-declared window caught ({} mismatches, first: {})", bad.len(), bad[0]))
}

fn netlist_consistency() -> Outcome {
    let mut cycles = 0;
    for (k, (file, top)) in SIMULABLE.iter().enumerate() {
        let (rp, lp) = load(file);
        let vectors = random_vectors(&rp, top, 20, 10 + k as u64);
        let stim = gen_stimulus(rp.get(top), &vectors, Mode::RandomGaps, k as u64).map_err(|e| e.to_string())?;
        let mut low = LowSim::new(&rp, &lp, top).map_err(|e| e.to_string())?;
        let nl = build(&rp, &lp).map_err(|e| e.to_string())?;
        let mut net = NetlistSim::new(&nl, top).map_err(|e| e.to_string())?;
        let a = simulate(&mut low, &stim).map_err(|e| e.to_string())?;
        let b = simulate(&mut net, &stim).map_err(|e| e.to_string())?;
        ensure(a.widths == b.widths, format!("{top}: signal sets differ"))?;
        for (c, (fa, fb)) in a.frames.iter().zip(&b.frames).enumerate() {
            if fa != fb {
                let diff: BTreeMap<_, _> = fa.iter().filter(|(k, v)| fb.get(*k) != Some(v)).collect();
                return Err(format!("{file}/{top}: cycle {c} differs on {diff:?}"));
            }
        }
        ensure(a.frames.len() == b.frames.len(), "trace lengths differ")?;
        cycles += a.frames.len();
    }
    Ok(format!("{} corpus designs, {cycles} cycles, traces identical", SIMULABLE.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("worked-example verdicts", verdicts),
        ("oracle fidelity", oracle_goldens),
        ("differential soundness", differential_soundness),
        ("lowering goldens", lowering_goldens),
        ("simulation correctness", simulation),
        ("harness discipline", harness_discipline),
        ("emitted netlist consistency", netlist_consistency),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
