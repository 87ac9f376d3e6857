#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use fil_core::driver::{check_source, Checked};
use fil_core::low::{lower_program, LowProgram};
use fil_core::prims::mask;
use fil_core::resolve::ResolvedProgram;
use fil_core::typeck::port_width;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Vector = BTreeMap<String, u64>;

pub fn corpus_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(file)
}

pub fn check(file: &str) -> Checked {
    check_source(file, &std::fs::read_to_string(corpus_path(file)).expect("corpus file"))
}

pub fn load(file: &str) -> (ResolvedProgram, LowProgram) {
    let rp = check(file).into_program().unwrap_or_else(|e| panic!("{file}:\n{e}"));
    let lp = lower_program(&rp);
    (rp, lp)
}

/// Random values for every data input of `comp`, masked to port widths.
pub fn random_vectors(rp: &ResolvedProgram, comp: &str, n: usize, seed: u64) -> Vec<Vector> {
    let sig = rp.get(comp);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            sig.data_inputs()
                .map(|p| (p.name.clone(), rng.gen::<u64>() & mask(port_width(sig, &[], p))))
                .collect()
        })
        .collect()
}

/// Random division operands with a non-zero divisor.
pub fn division_vectors(n: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let left = rng.gen_range(0..=255u64);
            let right = rng.gen_range(1..=255u64);
            [("left".to_string(), left), ("right".to_string(), right)].into_iter().collect()
        })
        .collect()
}

pub fn alu_golden(v: &Vector) -> Vector {
    let (l, r) = (v["l"], v["r"]);
    let o = if v["op"] == 1 { l.wrapping_mul(r) } else { l.wrapping_add(r) } & mask(32);
    [("o".to_string(), o)].into_iter().collect()
}

pub fn division_golden(v: &Vector) -> Vector {
    [("q".to_string(), v["left"] / v["right"])].into_iter().collect()
}

/// Accepted corpus programs whose components all have behavior models,
/// paired with the component to simulate.
pub const SIMULABLE: &[(&str, &str)] = &[
    ("alu.fil", "ALU"),
    ("adder_reuse.fil", "Example"),
    ("continuous.fil", "Pairs"),
    ("div_comb.fil", "Comb"),
    ("div_pipe.fil", "Pipe"),
    ("div_iter.fil", "Iter"),
    ("sum3.fil", "Sum3"),
    ("systolic.fil", "Process"),
    ("systolic.fil", "Systolic"),
];
