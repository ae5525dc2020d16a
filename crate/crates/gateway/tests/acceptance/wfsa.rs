//! Epsilon removal, trimming, intersection and path enumeration against
//! brute-force path search on 200 random acceptor pairs.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use elicit_core::wfsa::{intersect, Label, StateId, SymbolTable, Weight, Wfsa, WfsaBuilder};

use crate::{ensure, Outcome};

const PAIRS: u64 = 200;
const MAX_LEN: usize = 4;
const TOL: f64 = 1e-9;

fn random_acceptor(rng: &mut ChaCha8Rng, symbols: &Arc<SymbolTable>) -> Wfsa {
    let n = rng.random_range(1..=5);
    let mut b = WfsaBuilder::with_states(symbols.clone(), n);
    b.set_start(rng.random_range(0..n) as StateId);
    for _ in 0..rng.random_range(0..=3 * n) {
        let src = rng.random_range(0..n) as StateId;
        let dst = rng.random_range(0..n) as StateId;
        let w = Weight::new(rng.random_range(0..40) as f64 / 8.0);
        if rng.random_bool(0.25) {
            b.add_epsilon(src, w, dst).unwrap();
        } else {
            let label = rng.random_range(1..=symbols.len()) as Label;
            b.add_arc(src, label, w, dst).unwrap();
        }
    }
    for s in 0..n {
        if rng.random_bool(0.5) {
            let w = Weight::new(rng.random_range(0..16) as f64 / 8.0);
            b.set_final(s as StateId, w).unwrap();
        }
    }
    b.build().unwrap()
}

/// Cheapest explicit path reading `input`, or infinity. A path never needs
/// to revisit a `(state, position)` pair since weights are non-negative.
fn path_weight(a: &Wfsa, input: &[Label]) -> f64 {
    fn go(a: &Wfsa, input: &[Label], s: StateId, pos: usize, acc: f64, seen: &mut Vec<(StateId, usize)>) -> f64 {
        let mut best = f64::INFINITY;
        if pos == input.len() && a.is_final(s) {
            best = acc + a.final_weight(s).value();
        }
        for arc in a.arcs(s) {
            let next = if arc.is_epsilon() {
                pos
            } else if pos < input.len() && arc.label == input[pos] {
                pos + 1
            } else {
                continue;
            };
            if seen.contains(&(arc.target, next)) {
                continue;
            }
            seen.push((arc.target, next));
            best = best.min(go(a, input, arc.target, next, acc + arc.weight.value(), seen));
            seen.pop();
        }
        best
    }
    go(a, input, a.start(), 0, 0.0, &mut vec![(a.start(), 0)])
}

fn all_strings(alphabet: usize) -> Vec<Vec<Label>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<Label>> = vec![vec![]];
    for _ in 0..MAX_LEN {
        let next: Vec<Vec<Label>> = frontier
            .iter()
            .flat_map(|s| {
                (1..=alphabet as Label).map(move |l| {
                    let mut t = s.clone();
                    t.push(l);
                    t
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn weight_of(a: &Wfsa, s: &[Label]) -> f64 {
    a.accept_labels(s).map_or(f64::INFINITY, Weight::value)
}

fn same(x: f64, y: f64) -> bool {
    (x.is_infinite() && y.is_infinite()) || (x - y).abs() <= TOL
}

/// Every state lies on some start-to-final path.
fn is_trim(a: &Wfsa) -> bool {
    let n = a.num_states();
    let mut reach = vec![false; n];
    let mut stack = vec![a.start()];
    reach[a.start() as usize] = true;
    while let Some(s) = stack.pop() {
        for arc in a.arcs(s) {
            if !reach[arc.target as usize] {
                reach[arc.target as usize] = true;
                stack.push(arc.target);
            }
        }
    }
    let mut coreach: Vec<bool> = (0..n).map(|s| a.is_final(s as StateId)).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !coreach[s] && a.arcs(s as StateId).iter().any(|t| coreach[t.target as usize]) {
                coreach[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    a.is_empty_language() && n <= 1 || (0..n).all(|s| reach[s] && coreach[s])
}

pub fn check() -> Outcome {
    let started = Instant::now();
    let tokens = ["a", "b", "c"];
    let mut strings_checked = 0usize;
    let mut nonempty = 0usize;
    for seed in 0..PAIRS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..=3);
        let symbols = Arc::new(SymbolTable::from_tokens(&tokens[..k]));
        let a = random_acceptor(&mut rng, &symbols);
        let b = random_acceptor(&mut rng, &symbols);
        let strings = all_strings(k);

        let ea = a.remove_epsilon();
        let eb = b.remove_epsilon();
        ensure!(ea.is_epsilon_free() && eb.is_epsilon_free(), "seed {seed}: epsilons survive removal");
        let ta = a.trim();
        ensure!(is_trim(&ta), "seed {seed}: trim left a useless state");
        let c = intersect(&ea, &eb).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(is_trim(&c), "seed {seed}: intersection is not trim");

        let mut expected: BTreeMap<Vec<Label>, f64> = BTreeMap::new();
        for s in &strings {
            let (wa, wb) = (path_weight(&a, s), path_weight(&b, s));
            ensure!(same(weight_of(&a, s), wa), "seed {seed} {s:?}: accept differs from paths");
            ensure!(same(weight_of(&ea, s), wa), "seed {seed} {s:?}: epsilon removal changed weight");
            ensure!(same(weight_of(&ta, s), wa), "seed {seed} {s:?}: trim changed weight");
            let want = wa + wb;
            ensure!(
                same(weight_of(&c, s), want),
                "seed {seed} {s:?}: intersection {} vs {want}",
                weight_of(&c, s)
            );
            if want.is_finite() {
                expected.insert(s.clone(), want);
            }
            strings_checked += 1;
        }
        let listed = c.enumerate(MAX_LEN);
        ensure!(
            listed.len() == expected.len(),
            "seed {seed}: enumerated {} strings, expected {}",
            listed.len(),
            expected.len()
        );
        for (s, w) in listed {
            let want = expected.get(&s).copied().unwrap_or(f64::INFINITY);
            ensure!(same(w.value(), want), "seed {seed} {s:?}: enumerated {} vs {want}", w.value());
        }
        if !expected.is_empty() {
            nonempty += 1;
        }
        if !a.is_epsilon_free() {
            ensure!(intersect(&a, &eb).is_err(), "seed {seed}: epsilon input accepted");
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure!(secs < 30.0, "suite took {secs:.1} s");
    ensure!(nonempty >= PAIRS as usize / 10, "only {nonempty} pairs had a non-empty intersection");
    Ok(format!(
        "{PAIRS} pairs, {strings_checked} strings, {nonempty} non-empty intersections, {secs:.2} s"
    ))
}
