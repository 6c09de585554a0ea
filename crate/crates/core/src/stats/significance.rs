//! Two-sample t and F tests, and the approximate randomization test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::special::{f_upper_tail, t_two_tailed};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTest {
    pub f: f64,
    pub df_num: f64,
    pub df_den: f64,
    pub p: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn need_two(xs: &[f64], which: &str) -> Result<()> {
    if xs.len() < 2 {
        return Err(Error::DegenerateSample(format!("sample {which} has {} value(s)", xs.len())));
    }
    Ok(())
}

/// Two-sample t-test, two-tailed. Pooled variance (Student) by default,
/// unequal variances (Welch) when `welch` is set.
///
/// Zero variance with equal means gives `t = 0, p = 1`; zero variance with
/// different means is a degenerate sample.
pub fn t_test(a: &[f64], b: &[f64], welch: bool) -> Result<TTest> {
    need_two(a, "a")?;
    need_two(b, "b")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_var(a), sample_var(b));
    let (se, df) = if welch {
        let (qa, qb) = (va / na, vb / nb);
        let se2 = qa + qb;
        let df = if se2 > 0.0 {
            se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
        } else {
            na + nb - 2.0
        };
        (se2.sqrt(), df)
    } else {
        let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        ((pooled * (1.0 / na + 1.0 / nb)).sqrt(), na + nb - 2.0)
    };
    if se == 0.0 {
        if ma == mb {
            return Ok(TTest { t: 0.0, df, p: 1.0 });
        }
        return Err(Error::DegenerateSample("zero variance with different means".into()));
    }
    let t = (ma - mb) / se;
    Ok(TTest {
        t,
        df,
        p: t_two_tailed(t, df),
    })
}

/// Variance-ratio test: larger sample variance over smaller, two-tailed p
/// from doubling the upper tail (capped at 1).
pub fn f_test(a: &[f64], b: &[f64]) -> Result<FTest> {
    need_two(a, "a")?;
    need_two(b, "b")?;
    let (va, vb) = (sample_var(a), sample_var(b));
    if va == 0.0 || vb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let (num, den) = if va >= vb { (a, b) } else { (b, a) };
    let f = va.max(vb) / va.min(vb);
    let (d1, d2) = ((num.len() - 1) as f64, (den.len() - 1) as f64);
    Ok(FTest {
        f,
        df_num: d1,
        df_den: d2,
        p: (2.0 * f_upper_tail(f, d1, d2)).min(1.0),
    })
}

/// Paired approximate randomization test on per-instance outcomes.
///
/// Each round swaps every instance's pair of outcomes with probability 1/2
/// and recomputes `|metric(a) − metric(b)|`. Returns
/// `(count(Δ' ≥ Δ) + 1) / (rounds + 1)`. Round `r` draws from its own
/// stream of the seeded generator, so results do not depend on evaluation
/// order.
pub fn approx_randomization<T, M>(a: &[T], b: &[T], metric: M, rounds: usize, seed: u64) -> Result<f64>
where
    T: Clone,
    M: Fn(&[T]) -> f64,
{
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if rounds == 0 {
        return Err(Error::config("rounds", "need at least one round"));
    }
    let observed = (metric(a) - metric(b)).abs();
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    let mut hits = 0usize;
    for round in 0..rounds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(round as u64);
        for i in 0..a.len() {
            if rng.gen::<bool>() {
                xa[i] = b[i].clone();
                xb[i] = a[i].clone();
            } else {
                xa[i] = a[i].clone();
                xb[i] = b[i].clone();
            }
        }
        if (metric(&xa) - metric(&xb)).abs() >= observed {
            hits += 1;
        }
    }
    Ok((hits + 1) as f64 / (rounds + 1) as f64)
}
