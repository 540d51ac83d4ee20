use crate::error::{Error, Result};

/// Terms smaller than this fraction of the running sum are dropped.
const TRUNCATION: f64 = 1e-18;

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Exact binomial upper tail `P(S_n >= threshold)` for `S_n ~ Bin(n, p)`.
///
/// This is the critical-volume NTCP for `n` independent FSUs each killed
/// with probability `p`. `threshold = 1` gives the serial model and
/// `threshold = n` tumor control.
///
/// Probabilities are built by the term ratio
/// `P(k+1)/P(k) = (n-k)/(k+1) * p/q` outward from the mode, starting from an
/// unnormalized weight of 1, and normalized by their total at the end. No
/// factorials or gamma functions are involved.
pub fn ntcp_exact(n: u64, p: f64, threshold: u64) -> Result<f64> {
    check_probability(p)?;
    if threshold > n + 1 {
        return Err(Error::Domain(format!(
            "threshold {threshold} outside [0, {}]",
            n + 1
        )));
    }
    if threshold == 0 {
        return Ok(1.0);
    }
    if threshold == n + 1 {
        return Ok(0.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }

    let q = 1.0 - p;
    let odds = p / q;
    let mode = (((n + 1) as f64 * p).floor() as u64).min(n);

    let mut total = 1.0;
    let mut tail = if mode >= threshold { 1.0 } else { 0.0 };

    // upward from the mode
    let mut w = 1.0;
    for k in mode..n {
        w *= (n - k) as f64 / (k + 1) as f64 * odds;
        if w == 0.0 {
            break;
        }
        total += w;
        if k + 1 >= threshold {
            tail += w;
            if w < TRUNCATION * tail {
                break;
            }
        }
    }

    // downward from the mode
    let mut w = 1.0;
    for k in (1..=mode).rev() {
        w *= k as f64 / (n - k + 1) as f64 / odds;
        if w == 0.0 {
            break;
        }
        total += w;
        if k > threshold {
            tail += w;
        } else if w < TRUNCATION * total {
            break;
        }
    }

    Ok((tail / total).min(1.0))
}
