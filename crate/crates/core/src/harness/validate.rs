//! Statistical self-checks of the channel simulator against its closed forms.

use crate::bounds::moment_oracle;
use crate::decoders::{coal_scores, psi0};
use crate::error::Result;
use crate::model::{channel_stats, design_p, gen_test_matrix, sample_defective_set, simulate_outcomes, NoiseParams};
use crate::seed::derive;
use crate::stats::wilson_interval;

/// One named pass/fail check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn proportion_check(name: &str, hits: u64, n: u64, expected: f64, z: f64) -> Check {
    let (lo, hi) = wilson_interval(hits, n, z);
    Check {
        name: name.to_string(),
        passed: lo <= expected && expected <= hi,
        detail: format!("empirical {:.5} ({hits}/{n}), expected {expected:.5}, interval ({lo:.5}, {hi:.5})", hits as f64 / n as f64),
    }
}

/// Outcome frequencies of `tests` simulated tests against the closed forms,
/// at `z` standard deviations.
pub fn channel_checks(
    n: usize,
    k: usize,
    noise: NoiseParams,
    tests: usize,
    z: f64,
    seed: u64,
) -> Result<Vec<Check>> {
    let p = design_p(k, noise.u(), true)?;
    let stats = channel_stats(p, k, noise)?;
    let sd = sample_defective_set(n, k, derive(seed, "defectives", 0))?;
    let design = gen_test_matrix(tests, n, p, derive(seed, "design", 0))?;
    let inst = simulate_outcomes(design, &sd, noise, derive(seed, "dilution", 0), derive(seed, "additive", 0))?;
    let x = inst.design.matrix();
    let i = sd[0];

    let zeros = (tests - inst.y.count_ones()) as u64;
    let (mut with, mut with_neg, mut without, mut without_neg) = (0u64, 0u64, 0u64, 0u64);
    for l in 0..tests {
        let neg = !inst.y.get(l);
        if x.get(l, i) {
            with += 1;
            with_neg += u64::from(neg);
        } else {
            without += 1;
            without_neg += u64::from(neg);
        }
    }
    Ok(vec![
        proportion_check("P(Y=0)", zeros, tests as u64, stats.gamma, z),
        proportion_check("P(Y=0 | defective in pool)", with_neg, with, stats.p_neg_given_def1, z),
        proportion_check("P(Y=0 | defective not in pool)", without_neg, without, stats.p_neg_given_def0, z),
        proportion_check("P(defective in pool | Y=0)", with_neg, zeros, stats.p_def1_given_neg, z),
    ])
}

/// Column-statistic means over `reps` independent instances with `m` tests,
/// against the closed-form moments at `z` standard deviations.
///
/// Per instance the class average (defectives or non-defectives) has variance
/// at most that of a single item's score, which sets the tolerance.
pub fn moment_checks(
    n: usize,
    k: usize,
    noise: NoiseParams,
    m: usize,
    reps: usize,
    z: f64,
    seed: u64,
) -> Result<Vec<Check>> {
    let p = design_p(k, noise.u(), true)?;
    let stats = channel_stats(p, k, noise)?;
    let psi = psi0(&stats)?;
    let mo = moment_oracle(m, p, &stats, psi)?;
    let (mut sum_i, mut sum_j) = (0.0, 0.0);
    for r in 0..reps as u64 {
        let sd = sample_defective_set(n, k, derive(seed, "defectives", r))?;
        let design = gen_test_matrix(m, n, p, derive(seed, "design", r))?;
        let inst = simulate_outcomes(design, &sd, noise, derive(seed, "dilution", r), derive(seed, "additive", r))?;
        let t = coal_scores(&inst, psi)?.scores;
        let def: f64 = sd.iter().map(|&i| t[i]).sum::<f64>() / k as f64;
        let non: f64 = (0..n).filter(|i| sd.binary_search(i).is_err()).map(|i| t[i]).sum::<f64>() / (n - k) as f64;
        sum_i += def;
        sum_j += non;
    }
    // exact per-item variance: M (E[t^2] - E[t]^2) per test
    let var = |a: f64| {
        let mean = p * (a - psi * (1.0 - a));
        m as f64 * (p * (a + psi * psi * (1.0 - a)) - mean * mean)
    };
    let g = stats.gamma;
    let gi = stats.gamma0 * g;
    let check = |name: &str, mean: f64, expected: f64, v: f64| {
        let sigma = (v / reps as f64).sqrt();
        Check {
            name: name.to_string(),
            passed: (mean - expected).abs() <= z * sigma,
            detail: format!("empirical mean {mean:.3}, expected {expected:.3}, sigma {sigma:.3}"),
        }
    };
    Ok(vec![
        check("column statistic mean, defective", sum_i / reps as f64, mo.mu_i, var(gi)),
        check("column statistic mean, non-defective", sum_j / reps as f64, mo.mu_j, var(g)),
    ])
}
