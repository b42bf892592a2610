//! Seeded generators of small random programs for property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ground::GroundProgram;
use crate::lang::{parse_program, Program};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const OPS: [&str; 6] = ["<", "<=", ">", ">=", "=", "<>"];

/// A propositional program over at most `max_atoms` atoms `a0, a1, ...`,
/// with even loops, constraints, and the occasional `#count` aggregate.
pub fn ground_program(rng: &mut impl Rng, max_atoms: usize) -> GroundProgram {
    let n = rng.gen_range(1..=max_atoms.max(1));
    let atom = |rng: &mut dyn rand::RngCore| format!("a{}", rng.gen_range(0..n));
    let mut text = String::new();
    if rng.gen_bool(0.3) {
        text.push_str(&format!("{}.\n", atom(rng)));
    }
    for _ in 0..rng.gen_range(0..=n / 2) {
        let (x, y) = (atom(rng), atom(rng));
        if x != y {
            text.push_str(&format!("{x} :- not {y}.\n{y} :- not {x}.\n"));
        }
    }
    for _ in 0..rng.gen_range(1..=n + 2) {
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let a = atom(rng);
            body.push(if rng.gen_bool(0.5) { a } else { format!("not {a}") });
        }
        if rng.gen_bool(0.15) {
            let elems: Vec<String> = (0..rng.gen_range(0..=3))
                .map(|i| {
                    let cond = if rng.gen_bool(0.8) {
                        atom(rng)
                    } else {
                        format!("not {}", atom(rng))
                    };
                    format!("{} : {cond}", i % 2)
                })
                .collect();
            let op = OPS.choose(rng).unwrap();
            body.push(format!(
                "#count {{ {} }} {op} {}",
                elems.join("; "),
                rng.gen_range(0..=2)
            ));
        }
        let head = if rng.gen_bool(0.2) { String::new() } else { atom(rng) };
        if head.is_empty() && body.is_empty() {
            continue;
        }
        if body.is_empty() {
            text.push_str(&format!("{head} :- not {}.\n", atom(rng)));
        } else {
            text.push_str(&format!("{head} :- {}.\n", body.join(", ")));
        }
    }
    let p = parse_program(&text).expect("generated program parses");
    GroundProgram {
        rules: p.rules,
        facts: p.facts.into_iter().collect(),
    }
}

/// A safe non-ground guess-and-check program small enough for the
/// brute-force oracle after grounding.
///
/// Guess pairs `gI(X)` / `gI_n(X)` range over `dom/1`, a definition rule
/// derives `h/1`, and constraints mix guesses, definitions, builtins,
/// negation and aggregates. Constraint variables reuse the rule-variable
/// names on purpose.
pub fn guess_check_program(rng: &mut impl Rng) -> Program {
    let k = rng.gen_range(2..=3);
    let guesses = if k == 3 { 2 } else { rng.gen_range(1..=3) };
    let mut text = String::new();
    for i in 1..=k {
        text.push_str(&format!("dom({i}). "));
    }
    for _ in 0..rng.gen_range(0..=k) {
        text.push_str(&format!("e({},{}). ", rng.gen_range(1..=k), rng.gen_range(1..=k)));
    }
    text.push('\n');
    for g in 0..guesses {
        text.push_str(&format!(
            "g{g}(X) :- dom(X), not g{g}_n(X).\ng{g}_n(X) :- dom(X), not g{g}(X).\n"
        ));
    }
    let gpred = |rng: &mut dyn rand::RngCore| format!("g{}", rng.gen_range(0..guesses));
    let with_h = rng.gen_bool(0.6);
    if with_h {
        let a = gpred(rng);
        match rng.gen_range(0..3) {
            0 => text.push_str(&format!("h(X) :- {a}(X).\n")),
            1 => text.push_str(&format!("h(X) :- {a}(X), e(X,Y).\n")),
            _ => text.push_str(&format!("h(X) :- {a}(Y), e(X,Y), dom(X).\n")),
        }
    }
    let vars = ["X", "Y", "Z"];
    for _ in 0..rng.gen_range(1..=3) {
        let mut body: Vec<String> = Vec::new();
        let mut used: Vec<&str> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let v = *vars.choose(rng).unwrap();
            if !used.contains(&v) {
                used.push(v);
            }
            let pred = if with_h && rng.gen_bool(0.3) {
                "h".to_string()
            } else {
                gpred(rng)
            };
            body.push(format!("{pred}({v})"));
        }
        if used.len() >= 2 && rng.gen_bool(0.6) {
            let op = ["<", "<>", "="].choose(rng).unwrap();
            body.push(format!("{} {op} {}", used[0], used[1]));
        }
        if rng.gen_bool(0.25) {
            body.push(format!("not {}({})", gpred(rng), used.choose(rng).unwrap()));
        }
        if rng.gen_bool(0.2) {
            let v = used.choose(rng).unwrap();
            body.push(format!("#count {{ W : e({v},W), {}(W) }} >= 1", gpred(rng)));
        }
        body.shuffle(rng);
        text.push_str(&format!(":- {}.\n", body.join(", ")));
    }
    if rng.gen_bool(0.3) {
        let a = gpred(rng);
        let bound = rng.gen_range(1..=k);
        if rng.gen_bool(0.5) {
            text.push_str(&format!(":- {bound} <= #count {{ X : {a}(X) }}.\n"));
        } else {
            text.push_str(&format!(":- #count {{ X : {a}(X) }} < 1.\n"));
        }
    }
    parse_program(&text).expect("generated program parses")
}

/// A safe non-ground program over a small domain without the guess-and-check
/// shape: recursion, negation and aggregates in rule bodies.
pub fn safe_program(rng: &mut impl Rng) -> Program {
    let k = rng.gen_range(1..=3);
    let mut text = String::new();
    for i in 1..=k {
        text.push_str(&format!("d({i}). "));
    }
    for _ in 0..rng.gen_range(0..=3) {
        text.push_str(&format!("e({},{}). ", rng.gen_range(1..=k), rng.gen_range(1..=k)));
    }
    text.push('\n');
    let preds = ["p", "q", "r"];
    for _ in 0..rng.gen_range(1..=5) {
        let head = preds.choose(rng).unwrap();
        let mut body = vec![match rng.gen_range(0..3) {
            0 => "d(X)".to_string(),
            1 => "e(X,Y)".to_string(),
            _ => format!("{}(X)", preds.choose(rng).unwrap()),
        }];
        if rng.gen_bool(0.5) {
            body.push(format!("not {}(X)", preds.choose(rng).unwrap()));
        }
        if rng.gen_bool(0.3) {
            body.push(format!("{}(X)", preds.choose(rng).unwrap()));
        }
        if body[0].starts_with('e') && rng.gen_bool(0.5) {
            body.push(format!("X {} Y", OPS.choose(rng).unwrap()));
        }
        if rng.gen_bool(0.2) {
            body.push(format!(
                "#count {{ Z : {}(Z) }} {} {}",
                preds.choose(rng).unwrap(),
                OPS.choose(rng).unwrap(),
                rng.gen_range(0..=2)
            ));
        }
        let head = if rng.gen_bool(0.15) {
            String::new()
        } else {
            format!("{head}(X)")
        };
        text.push_str(&format!("{head} :- {}.\n", body.join(", ")));
    }
    parse_program(&text).expect("generated program parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::check_safety;

    #[test]
    fn generators_are_deterministic_and_safe() {
        for seed in 0..50 {
            let a = guess_check_program(&mut rng(seed));
            let b = guess_check_program(&mut rng(seed));
            assert_eq!(a, b);
            assert!(a.rules.iter().all(|r| check_safety(r).is_empty()), "{a}");
            let s = safe_program(&mut rng(seed));
            assert!(s.rules.iter().all(|r| check_safety(r).is_empty()), "{s}");
            ground_program(&mut rng(seed), 14);
        }
    }
}
