//! Classifier training: convergence on a separable set, subgradient
//! correctness, persistence and determinism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use elicit_core::classify::svm::{example_objective, example_subgradient};
use elicit_core::classify::{
    read_examples_path, train, train_traced, Example, Hyperparams, ModelArtifact, TrainConfig,
};

use crate::common::fixtures;
use crate::{ensure, Outcome};

fn separable() -> Vec<Example> {
    let pos = ["reliable", "fast", "secure", "stable", "robust"];
    let neg = ["crash", "slow", "leak", "broken", "stall"];
    let mut out = Vec::new();
    for i in 0..10 {
        let p = format!("{} {} {}", pos[i % 5], pos[(i + 1) % 5], pos[(i + 3) % 5]);
        let n = format!("{} {} {}", neg[i % 5], neg[(i + 2) % 5], neg[(i + 4) % 5]);
        out.push(Example::new("pos", p));
        out.push(Example::new("neg", n));
    }
    out
}

/// `lambda/2 (|w|^2 + b^2) + max(0, 1 - y (w.x + b))`, written out again.
fn objective(w: &[f64], b: f64, x: &[(usize, f64)], y: f64, lambda: f64) -> f64 {
    let dot: f64 = x.iter().map(|&(i, v)| w[i] * v).sum();
    let norm2: f64 = w.iter().map(|v| v * v).sum::<f64>() + b * b;
    lambda / 2.0 * norm2 + f64::max(0.0, 1.0 - y * (dot + b))
}

fn finite_differences() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (dim, lambda, h) = (24, 0.05, 1e-6);
    let mut tested = 0;
    while tested < 50 {
        let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let mut x = Vec::new();
        for i in 0..dim {
            if rng.random_bool(0.4) {
                x.push((i, rng.random_range(-1.0..1.0)));
            }
        }
        let y = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let dot: f64 = x.iter().map(|&(i, v)| w[i] * v).sum();
        let margin = y * (dot + b);
        // Strictly active, away from the kink.
        if margin > 1.0 - 1e-2 {
            continue;
        }
        let f = objective(&w, b, &x, y, lambda);
        let g = example_objective(&w, b, &x, y, lambda);
        ensure!((f - g).abs() <= 1e-12 * f.abs().max(1.0), "objective {g} vs {f}");
        let (gw, gb) = example_subgradient(&w, b, &x, y, lambda);
        let close = |analytic: f64, numeric: f64| {
            (analytic - numeric).abs() <= 1e-4 * analytic.abs().max(numeric.abs()).max(1e-6)
        };
        for i in 0..dim {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[i] += h;
            down[i] -= h;
            let numeric = (objective(&up, b, &x, y, lambda) - objective(&down, b, &x, y, lambda)) / (2.0 * h);
            ensure!(close(gw[i], numeric), "d/dw{i}: {} vs {numeric}", gw[i]);
        }
        let numeric = (objective(&w, b + h, &x, y, lambda) - objective(&w, b - h, &x, y, lambda)) / (2.0 * h);
        ensure!(close(gb, numeric), "d/db: {gb} vs {numeric}");
        tested += 1;
    }
    Ok(tested)
}

fn bits(model: &ModelArtifact, texts: &[String]) -> Vec<(String, Vec<u64>)> {
    texts
        .iter()
        .map(|t| {
            let p = model.predict(t);
            (p.label, p.decisions.values().map(|v| v.to_bits()).collect())
        })
        .collect()
}

pub fn check() -> Outcome {
    let data = separable();
    let config = TrainConfig {
        hyper: Hyperparams { lambda: 1e-3, epochs: 200, seed: 7 },
        ..Default::default()
    };
    let (model, trace) = train_traced(&data, &config).map_err(|e| e.to_string())?;
    let first = trace
        .iter()
        .find(|t| t.train_accuracy == 1.0)
        .map(|t| t.epoch)
        .ok_or("training accuracy never reached 1.0 in 200 epochs")?;
    let acc = model.evaluate(&data).map_err(|e| e.to_string())?.accuracy;
    ensure!(acc == 1.0, "final training accuracy {acc}");

    let fd = finite_differences()?;

    let examples = read_examples_path(&fixtures().join("train.csv")).map_err(|e| e.to_string())?;
    let model = train(&examples, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.elimdl");
    model.save(&path).map_err(|e| e.to_string())?;
    let loaded = ModelArtifact::load(&path).map_err(|e| e.to_string())?;
    let mut texts: Vec<String> = examples.iter().map(|e| e.text.clone()).collect();
    texts.extend(["".into(), "completely unseen vocabulary".into(), "the password".into()]);
    ensure!(bits(&model, &texts) == bits(&loaded, &texts), "loaded model predicts differently");

    let again = train(&examples, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    model.write_to(&mut a).map_err(|e| e.to_string())?;
    again.write_to(&mut b).map_err(|e| e.to_string())?;
    ensure!(a == b, "two trainings with the same seed produced different models");
    ensure!(bits(&model, &texts) == bits(&again, &texts), "decisions differ between trainings");

    Ok(format!(
        "separable set at accuracy 1.0 from epoch {first}; {fd} finite-difference checks; \
         save/load and retraining bit-identical"
    ))
}
