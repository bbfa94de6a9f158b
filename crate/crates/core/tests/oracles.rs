//! Independent-oracle checks: every fitted quantity is recomputed here by a
//! different route (closed forms, dense grids, brute-force definitions,
//! direct Monte Carlo) and the library implementation must agree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use seqab_core::glm::{fit_logistic, ArmCounts};
use seqab_core::multiplicity::{benjamini_hochberg, fixed_sample_power, PValueSet};
use seqab_core::pool::{fit_hierarchical, prob_best, ArmSummary, PosteriorDraws};

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Log-likelihood of grouped binomial data at the observed proportions,
/// written directly from the definition.
fn saturated_log_lik(counts: &[ArmCounts]) -> f64 {
    counts
        .iter()
        .map(|c| {
            let p = c.s as f64 / c.n as f64;
            c.s as f64 * p.ln() + (c.n - c.s) as f64 * (1.0 - p).ln()
        })
        .sum()
}

#[test]
fn newton_fit_matches_closed_form_logits() {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let n_arms = rng.gen_range(1..=6);
        let counts: Vec<ArmCounts> = (0..n_arms)
            .map(|arm_id| {
                let n = rng.gen_range(5..=500_u64);
                let s = rng.gen_range(1..n);
                ArmCounts::new(arm_id, n, s)
            })
            .collect();
        let fit = fit_logistic(&counts).unwrap();

        let p0 = counts[0].s as f64 / counts[0].n as f64;
        worst = worst.max((fit.coefficients[0] - logit(p0)).abs());
        for c in &counts[1..] {
            let p = c.s as f64 / c.n as f64;
            let expected = logit(p) - logit(p0);
            worst = worst.max((fit.effect(c.arm_id).unwrap() - expected).abs());
        }
        worst = worst.max((fit.log_lik - saturated_log_lik(&counts)).abs() / (1.0 + fit.log_lik.abs()));
    }
    assert!(worst < 1e-8, "worst deviation {worst}");
}

/// Marginal log-likelihood of the two-level normal model evaluated at one
/// (mu, sigma) point, straight from the density.
fn marginal_at(summaries: &[ArmSummary], mu: f64, sigma: f64) -> f64 {
    summaries
        .iter()
        .map(|a| {
            let tau = a.v + sigma * sigma;
            let d = a.y - mu;
            -0.5 * ((2.0 * std::f64::consts::PI * tau).ln() + d * d / tau)
        })
        .sum()
}

/// Dense 2-D grid maximum of the marginal log-likelihood. The inner mu scan
/// uses the per-sigma sufficient statistics so the full grid stays cheap.
fn grid_max(
    summaries: &[ArmSummary],
    mu_range: (f64, f64),
    sigma_range: (f64, f64),
    step: f64,
) -> (f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let n_sigma = ((sigma_range.1 - sigma_range.0) / step).round() as usize;
    let n_mu = ((mu_range.1 - mu_range.0) / step).round() as usize;
    for i in 0..=n_sigma {
        let sigma = sigma_range.0 + i as f64 * step;
        let s2 = sigma * sigma;
        let mut a = 0.0;
        let mut b = 0.0;
        let mut c = 0.0;
        let mut log_det = 0.0;
        for arm in summaries {
            let tau = arm.v + s2;
            a += 1.0 / tau;
            b += arm.y / tau;
            c += arm.y * arm.y / tau;
            log_det += (2.0 * std::f64::consts::PI * tau).ln();
        }
        for j in 0..=n_mu {
            let mu = mu_range.0 + j as f64 * step;
            let ll = -0.5 * (log_det + a * mu * mu - 2.0 * b * mu + c);
            if ll > best.0 {
                best = (ll, mu, sigma);
            }
        }
    }
    best
}

#[test]
fn hierarchy_fit_attains_the_grid_maximum() {
    let mut rng = ChaCha8Rng::seed_from_u64(602);
    for round in 0..50 {
        let n_arms = rng.gen_range(2..=6);
        let summaries: Vec<ArmSummary> = (0..n_arms)
            .map(|arm_id| ArmSummary {
                arm_id,
                y: rng.gen_range(-2.0..2.0),
                v: rng.gen_range(0.001..0.5),
            })
            .collect();
        let fit = fit_hierarchical(&summaries).unwrap();

        let y_lo = summaries.iter().map(|a| a.y).fold(f64::INFINITY, f64::min);
        let y_hi = summaries.iter().map(|a| a.y).fold(f64::NEG_INFINITY, f64::max);
        let (grid_ll, _, _) = grid_max(&summaries, (y_lo - 0.25, y_hi + 0.25), (0.0, 3.0), 1e-3);

        assert!(
            fit.log_marginal >= grid_ll - 1e-6,
            "round {round}: fit {} below grid {}",
            fit.log_marginal,
            grid_ll
        );
        let direct = marginal_at(&summaries, fit.mu, fit.sigma_alpha);
        assert!((direct - fit.log_marginal).abs() < 1e-9);
    }
}

#[test]
fn two_arm_fit_agrees_with_the_stated_grid() {
    let summaries = [
        ArmSummary { arm_id: 0, y: 0.0, v: 0.04 },
        ArmSummary { arm_id: 1, y: 1.0, v: 0.04 },
    ];
    let fit = fit_hierarchical(&summaries).unwrap();
    let (grid_ll, grid_mu, grid_sigma) = grid_max(&summaries, (-1.0, 2.0), (0.0, 2.0), 1e-3);
    assert!(fit.log_marginal >= grid_ll - 1e-9);
    assert!((fit.mu - grid_mu).abs() <= 2e-3);
    assert!((fit.sigma_alpha - grid_sigma).abs() <= 2e-3);
}

/// Step-up selection written as the literal definition: walk k from m down,
/// stop at the first k whose k-th smallest p-value passes, reject at or
/// below it.
fn step_up_by_definition(values: &[f64], q: f64) -> Vec<bool> {
    let m = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for k in (1..=m).rev() {
        if sorted[k - 1] <= q * k as f64 / m as f64 {
            return values.iter().map(|&p| p <= sorted[k - 1]).collect();
        }
    }
    vec![false; m]
}

#[test]
fn step_up_matches_the_brute_force_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(603);
    for _ in 0..10_000 {
        let m = rng.gen_range(1..=12);
        let values: Vec<f64> = (0..m)
            .map(|_| {
                let p: f64 = rng.gen_range(0.0..=1.0);
                // Round a share of the values so exact ties occur often.
                if rng.gen_bool(0.5) {
                    (p * 20.0).round() / 20.0
                } else {
                    p
                }
            })
            .collect();
        let q = rng.gen_range(0.01..0.3);
        let set = PValueSet::new((0..m).collect(), values.clone()).unwrap();
        let got = benjamini_hochberg(&set, q).unwrap();
        assert_eq!(got, step_up_by_definition(&values, q));
    }
}

#[test]
fn prob_best_matches_direct_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(604);
    for _ in 0..500 {
        let m = rng.gen_range(1..=6);
        let n_draws = rng.gen_range(1..=200);
        let values: Vec<f64> = (0..n_draws * m)
            .map(|_| {
                // Draws from a tiny value set so ties at the maximum occur.
                if rng.gen_bool(0.5) {
                    rng.gen_range(0..=2) as f64 / 2.0
                } else {
                    rng.gen_range(-1.0..1.0)
                }
            })
            .collect();
        let draws = PosteriorDraws {
            arm_ids: (0..m).collect(),
            n_draws,
            values: values.clone(),
            seed: 0,
        };

        let mut tally = vec![0.0_f64; m];
        for row in values.chunks(m) {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let winners: Vec<usize> =
                (0..m).filter(|&j| row[j] == max).collect();
            for &j in &winners {
                tally[j] += 1.0 / winners.len() as f64;
            }
        }
        let expected: Vec<f64> = tally.iter().map(|t| t / n_draws as f64).collect();

        assert_eq!(prob_best(&draws), expected);
    }
}

#[test]
fn fixed_sample_power_matches_a_simulated_z_test() {
    let formula = fixed_sample_power(1000, 0.5, 0.6, 0.05).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(605);
    let n = 1000_u64;
    let reps = 1_000_000;
    let control = Binomial::new(n, 0.5).unwrap();
    let treatment = Binomial::new(n, 0.6).unwrap();
    let mut rejections = 0_u64;
    for _ in 0..reps {
        let s0 = control.sample(&mut rng) as f64;
        let s1 = treatment.sample(&mut rng) as f64;
        let p0 = s0 / n as f64;
        let p1 = s1 / n as f64;
        let se = (p0 * (1.0 - p0) / n as f64 + p1 * (1.0 - p1) / n as f64).sqrt();
        let z = (p1 - p0).abs() / se;
        if z > 1.959963984540054 {
            rejections += 1;
        }
    }
    let simulated = rejections as f64 / reps as f64;

    // The formula is a normal approximation of a discrete test, so the
    // band covers approximation error on top of Monte Carlo noise.
    assert!(
        (formula - simulated).abs() < 2e-3,
        "formula {formula} vs simulated {simulated}"
    );
    assert!((formula - 0.9947).abs() < 2e-4);
}
