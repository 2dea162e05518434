use crate::error::{Error, Result};
use crate::solver::Trace;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    /// Empirical exponent: `f_gap ≈ exp(intercept) · k^slope`.
    pub slope: f64,
    pub intercept: f64,
    /// Rows used in the regression.
    pub rows: usize,
}

/// Least-squares line through `(ln k, ln f_gap)` after dropping the first
/// `floor(burn_in_fraction · rows)` rows. Rows with `k = 0` carry no
/// information on a log axis and are skipped.
pub fn fit_rate(trace: &Trace, burn_in_fraction: f64) -> Result<RateFit> {
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::invalid(format!(
            "burn-in fraction must lie in [0, 1), got {burn_in_fraction}"
        )));
    }
    let skip = (burn_in_fraction * trace.rows.len() as f64).floor() as usize;
    let rows: Vec<_> = trace.rows[skip..].iter().filter(|r| r.k > 0).collect();
    let bad = rows.iter().filter(|r| !matches!(r.f_gap, Some(g) if g > 0.0)).count();
    if bad > 0 {
        return Err(Error::NonPositiveGaps { count: bad });
    }
    if rows.len() < 2 {
        return Err(Error::TooFewRows(rows.len()));
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.k as f64).ln(), r.f_gap.unwrap().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewRows(1));
    }
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        rows: pts.len(),
    })
}
