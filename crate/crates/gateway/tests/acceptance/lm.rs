//! N-gram model: normalization, exact count ratios, and agreement between
//! the compiled acceptor and the sequence score.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use elicit_core::ngram::NgramModel;

use crate::{ensure, Outcome};

const ALPHA: f64 = 0.4;

/// Independent counts for orders `0..=n` (order 0 is the token total).
fn count_all(tokens: &[String], n: usize) -> HashMap<Vec<String>, u64> {
    let mut counts = HashMap::new();
    counts.insert(Vec::new(), tokens.len() as u64);
    for k in 1..=n {
        for g in tokens.windows(k) {
            *counts.entry(g.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

/// Stupid backoff written out from the definition.
fn oracle_nll(counts: &HashMap<Vec<String>, u64>, n: usize, seq: &[String]) -> f64 {
    let total = counts[&Vec::new()] as f64;
    let c = |g: &[String]| counts.get(g).copied().unwrap_or(0) as f64;
    let mut nll = 0.0;
    for i in 0..seq.len() {
        let mut gram = &seq[i.saturating_sub(n - 1)..=i];
        let mut factor = 1.0;
        let p = loop {
            if gram.len() == 1 {
                break factor * if c(gram) > 0.0 { c(gram) / total } else { 1.0 / (total + 1.0) };
            }
            if c(gram) > 0.0 {
                break factor * c(gram) / c(&gram[..gram.len() - 1]);
            }
            factor *= ALPHA;
            gram = &gram[1..];
        };
        nll -= p.ln();
    }
    nll
}

pub fn check() -> Outcome {
    let mut grams_checked = 0usize;
    let mut agreements = 0usize;
    let mut bound_checks = 0usize;
    let mut strict = 0usize;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = rng.random_range(2..=6);
        let len = rng.random_range(1..=80);
        let tokens: Vec<String> = (0..len)
            .map(|_| format!("w{}", rng.random_range(0..v)))
            .collect();
        let n = rng.random_range(1..=4);
        let model = NgramModel::count_ngrams(&tokens, n).map_err(|e| e.to_string())?;
        let counts = count_all(&tokens, n);

        let sum: f64 = model.vocab().iter().map(|w| model.score(w, &[])).sum();
        ensure!((sum - 1.0).abs() <= 1e-9, "seed {seed}: unigram scores sum to {sum}");

        for (gram, &c) in &counts {
            ensure!(model.count(gram) == c, "seed {seed}: count of {gram:?}");
            if gram.len() >= 2 {
                let (h, w) = gram.split_at(gram.len() - 1);
                let want = c as f64 / counts[h] as f64;
                let got = model.score(&w[0], h);
                ensure!(got == want, "seed {seed}: score({w:?} | {h:?}) = {got}, ratio {want}");
                grams_checked += 1;
            }
        }

        let fst = model.compile_to_wfsa().map_err(|e| e.to_string())?;
        // Substrings of the corpus: every n-gram observed, no backoff.
        for _ in 0..10 {
            let l = rng.random_range(1..=tokens.len().min(10));
            let s = rng.random_range(0..=tokens.len() - l);
            let seq = &tokens[s..s + l];
            let nll = model.sequence_nll(seq);
            let want = oracle_nll(&counts, n, seq);
            ensure!((nll - want).abs() <= 1e-9, "seed {seed}: nll {nll} vs oracle {want}");
            let acc = fst.accept(seq).ok_or(format!("seed {seed}: {seq:?} rejected"))?.value();
            ensure!((acc - nll).abs() <= 1e-6, "seed {seed}: accept {acc} vs nll {nll} on {seq:?}");
            agreements += 1;
        }
        // Arbitrary in-vocabulary sequences: shortest path never costs more.
        let vocab: Vec<&String> = model.vocab().iter().collect();
        let l = rng.random_range(1..=10);
        let seq: Vec<String> = (0..l).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect();
        let nll = model.sequence_nll(&seq);
        let want = oracle_nll(&counts, n, &seq);
        ensure!((nll - want).abs() <= 1e-9, "seed {seed}: nll {nll} vs oracle {want}");
        let acc = fst.accept(&seq).ok_or(format!("seed {seed}: {seq:?} rejected"))?.value();
        ensure!(acc <= nll + 1e-9, "seed {seed}: accept {acc} exceeds nll {nll} on {seq:?}");
        if acc < nll - 1e-9 {
            strict += 1;
        }
        bound_checks += 1;
    }
    Ok(format!(
        "100 corpora, {grams_checked} count ratios, {agreements} backoff-free agreements, \
         {bound_checks} random sequences bounded ({strict} strictly cheaper)"
    ))
}
