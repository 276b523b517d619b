use rand::Rng;

use crate::channel::Pdp;
use crate::error::{Error, Result};
use crate::seed;

/// Powers below this are treated as empty bins before dB conversion.
pub const PDP_FLOOR: f64 = 1e-12;

fn aligned(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Misaligned(a, b));
    }
    Ok(())
}

/// `(N_error, N_all)` with `N_error = Σ|pred − truth|` and `N_all = Σ truth`.
pub fn error_totals(pred: &[usize], truth: &[usize]) -> Result<(u64, u64)> {
    aligned(pred.len(), truth.len())?;
    let n_error = pred.iter().zip(truth).map(|(&p, &t)| p.abs_diff(t) as u64).sum();
    let n_all = truth.iter().map(|&t| t as u64).sum();
    Ok((n_error, n_all))
}

/// `P = 1 − N_error / N_all`, pooled over the whole set and not clamped.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let (n_error, n_all) = error_totals(pred, truth)?;
    if n_all == 0 {
        return Err(Error::EmptyTruth);
    }
    Ok(1.0 - n_error as f64 / n_all as f64)
}

/// Probability of each absolute error value `0..=max`.
pub fn error_histogram(pred: &[usize], truth: &[usize]) -> Result<Vec<f64>> {
    aligned(pred.len(), truth.len())?;
    if pred.is_empty() {
        return Ok(Vec::new());
    }
    let mut counts: Vec<u64> = Vec::new();
    for (&p, &t) in pred.iter().zip(truth) {
        let e = p.abs_diff(t);
        if counts.len() <= e {
            counts.resize(e + 1, 0);
        }
        counts[e] += 1;
    }
    let n = pred.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Fraction of clusters where `pred > 0` agrees with `truth > 0`.
pub fn binary_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    aligned(pred.len(), truth.len())?;
    if pred.is_empty() {
        return Ok(1.0);
    }
    let hits = pred.iter().zip(truth).filter(|(&p, &t)| (p > 0) == (t > 0)).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Independent draws from the empirical distribution of `train_counts`.
pub fn random_baseline(train_counts: &[usize], n: usize, seed_value: u64) -> Result<Vec<usize>> {
    if train_counts.is_empty() {
        return Err(Error::Config("random baseline needs training counts".into()));
    }
    let mut rng = seed::rng(seed_value, &[0xBA5E]);
    Ok((0..n).map(|_| train_counts[rng.gen_range(0..train_counts.len())]).collect())
}

fn same_grid(a: &Pdp, b: &Pdp) -> Result<()> {
    if a.delay_bins.len() != b.delay_bins.len() || a.powers.len() != b.powers.len() || a.powers.len() != a.delay_bins.len() {
        return Err(Error::GridMismatch(format!("{} vs {} bins", a.delay_bins.len(), b.delay_bins.len())));
    }
    for (x, y) in a.delay_bins.iter().zip(&b.delay_bins) {
        if (x - y).abs() > 1e-12 * x.abs().max(y.abs()) {
            return Err(Error::GridMismatch(format!("bin at {x:e} s vs {y:e} s")));
        }
    }
    Ok(())
}

/// Pooled root-mean-square dB difference over every bin whose truth power is
/// above [`PDP_FLOOR`]; simulated powers are floored before conversion.
pub fn compare_pdp(sim: &[Pdp], truth: &[Pdp]) -> Result<f64> {
    aligned(sim.len(), truth.len())?;
    let mut sse = 0.0;
    let mut n = 0usize;
    for (s, t) in sim.iter().zip(truth) {
        same_grid(s, t)?;
        for (&ps, &pt) in s.powers.iter().zip(&t.powers) {
            if pt > PDP_FLOOR {
                let d = 10.0 * ps.max(PDP_FLOOR).log10() - 10.0 * pt.log10();
                sse += d * d;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::EmptyTruth);
    }
    Ok((sse / n as f64).sqrt())
}
