use std::collections::BTreeSet;

use cagasp_core::ground::{ground, herbrand_instantiate, GroundProgram};
use cagasp_core::lang::{parse_program, Program};
use cagasp_core::solve::{check_stable, enumerate_brute_force, solve_all, AnswerSet};
use cagasp_core::testgen;

fn fixtures() -> Vec<Program> {
    let hcp = parse_program(include_str!("../fixtures/hcp.lp")).unwrap();
    let inst = parse_program(include_str!("../fixtures/hcp_example_instance.lp")).unwrap();
    vec![
        parse_program(include_str!("../fixtures/module_frame.lp")).unwrap(),
        hcp.with_facts(inst.facts),
    ]
}

#[test]
fn solver_matches_brute_force_on_random_programs() {
    for seed in 0..500 {
        let g = testgen::ground_program(&mut testgen::rng(seed), 14);
        let fast = solve_all(&g).unwrap();
        let slow = enumerate_brute_force(&g).unwrap();
        assert_eq!(fast, slow, "seed {seed}:\n{}", g.render());
        for m in &fast {
            assert!(check_stable(&g, &m.to_interpretation()));
        }
    }
}

fn answer_sets(g: &GroundProgram) -> Vec<AnswerSet> {
    let models = solve_all(g).unwrap();
    let open = g.atoms().difference(&g.facts).count();
    if open <= 12 {
        assert_eq!(models, enumerate_brute_force(g).unwrap(), "{}", g.render());
    }
    models
}

#[test]
fn grounder_matches_herbrand_oracle() {
    for seed in 0..300 {
        let mut rng = testgen::rng(seed);
        let p = if seed % 2 == 0 {
            testgen::safe_program(&mut rng)
        } else {
            testgen::guess_check_program(&mut rng)
        };
        let simplified = ground(&p).unwrap();
        let naive = herbrand_instantiate(&p).unwrap();
        assert!(
            simplified.rules.len() <= naive.rules.len(),
            "seed {seed}: shrinkage violated"
        );
        assert_eq!(answer_sets(&simplified), answer_sets(&naive), "seed {seed}:\n{p}");
    }
}

#[test]
fn fixtures_agree_across_oracles() {
    for p in fixtures() {
        let simplified = ground(&p).unwrap();
        let naive = herbrand_instantiate(&p).unwrap();
        assert!(simplified.rules.len() <= naive.rules.len());
        assert_eq!(solve_all(&simplified).unwrap(), solve_all(&naive).unwrap());
    }
}

#[test]
fn grounding_is_deterministic() {
    for p in fixtures() {
        assert_eq!(ground(&p).unwrap().render(), ground(&p).unwrap().render());
    }
}

#[test]
fn generated_programs_round_trip() {
    for seed in 0..200 {
        let p = testgen::guess_check_program(&mut testgen::rng(seed));
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
        let q = testgen::safe_program(&mut testgen::rng(seed));
        assert_eq!(parse_program(&q.to_string()).unwrap(), q);
    }
    for p in fixtures() {
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }
}

#[test]
fn module_frame_listing_matches_grounding() {
    let p = parse_program(include_str!("../fixtures/module_frame.lp")).unwrap();
    let g = ground(&p).unwrap();
    let listing = parse_program(include_str!("data/module_frame_ground_listing.lp")).unwrap();
    let merge = |rules: &[cagasp_core::lang::Rule]| -> BTreeSet<_> {
        rules
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.body.sort();
                r
            })
            .collect()
    };
    assert_eq!(merge(&g.rules), merge(&listing.rules));
    for f in &listing.facts {
        assert!(g.facts.contains(f));
    }
}
