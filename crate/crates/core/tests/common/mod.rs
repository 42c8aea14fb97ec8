#![allow(dead_code)]

use std::path::PathBuf;
use std::time::Duration;

use countbmc::logic::{ClientAtom, LcFormula};
use countbmc::net::{NetBuilder, PetriNet};
use countbmc::solver::SolverConfig;
use rand::Rng;

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn model(rel: &str) -> PathBuf {
    models_dir().join(rel)
}

pub fn solver() -> SolverConfig {
    SolverConfig::from_env(Duration::from_secs(60)).expect("solver command line")
}

/// Up to 4 places and 5 transitions with weights 1..=2 and 0/1 initial tokens.
pub fn random_net(rng: &mut impl Rng) -> PetriNet {
    let places = rng.gen_range(1..=4);
    let transitions = rng.gen_range(1..=5);
    let mut b = NetBuilder::new();
    for p in 0..places {
        b.place(&format!("p{p}"), rng.gen_range(0..=1)).unwrap();
    }
    for t in 0..transitions {
        let name = format!("t{t}");
        b.transition(&name).unwrap();
        for p in 0..places {
            let place = format!("p{p}");
            if rng.gen_bool(0.35) {
                b.arc(&place, &name, rng.gen_range(1..=2)).unwrap();
            }
            if rng.gen_bool(0.35) {
                b.arc(&name, &place, rng.gen_range(1..=2)).unwrap();
            }
        }
    }
    b.build().unwrap()
}

fn random_atom(rng: &mut impl Rng, net: &PetriNet) -> LcFormula {
    let place =
        |rng: &mut dyn rand::RngCore| net.places()[rng.gen_range(0..net.places().len())].clone();
    match rng.gen_range(0..5) {
        0 => {
            let t = &net.transitions()[rng.gen_range(0..net.transitions().len())];
            LcFormula::prop(t)
        }
        1 => LcFormula::client(ClientAtom::CountGt(place(rng), rng.gen_range(0..=1))),
        2 => LcFormula::client(ClientAtom::CountLe(place(rng), rng.gen_range(0..=1))),
        3 => LcFormula::client(ClientAtom::CmpGt(place(rng), place(rng))),
        _ => LcFormula::client(ClientAtom::CmpLe(place(rng), place(rng))),
    }
}

/// A formula over the net's names; may contain `Not` anywhere.
pub fn random_formula(rng: &mut impl Rng, net: &PetriNet, depth: usize) -> LcFormula {
    if depth == 0 || rng.gen_bool(0.25) {
        return random_atom(rng, net);
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => LcFormula::not(random_formula(rng, net, d)),
        1 => LcFormula::and(random_formula(rng, net, d), random_formula(rng, net, d)),
        2 => LcFormula::or(random_formula(rng, net, d), random_formula(rng, net, d)),
        3 => LcFormula::next(random_formula(rng, net, d)),
        4 => LcFormula::finally(random_formula(rng, net, d)),
        5 => LcFormula::globally(random_formula(rng, net, d)),
        6 => LcFormula::until(random_formula(rng, net, d), random_formula(rng, net, d)),
        _ => LcFormula::release(random_formula(rng, net, d), random_formula(rng, net, d)),
    }
}
