//! Scan results, tail fits and limit extrapolation.

use serde::{Deserialize, Serialize};

/// Inclusive range of chain lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NRange {
    pub min: usize,
    pub max: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    1
}

impl NRange {
    pub fn new(min: usize, max: usize, stride: usize) -> crate::Result<Self> {
        let r = Self { min, max, stride };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.min == 0 || self.min > self.max || self.stride == 0 {
            return Err(crate::Error::InvalidInput(format!(
                "invalid N range {}..={} step {} (need 1 ≤ min ≤ max, stride ≥ 1)",
                self.min, self.max, self.stride
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<usize> {
        (self.min..=self.max).step_by(self.stride.max(1)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub value: f64,
    /// Companion quantity, e.g. the operator norm next to a lower bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub n: usize,
    pub message: String,
}

/// Least-squares fit of `log|value|` against `log N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: [usize; 2],
    pub points: usize,
}

/// Least-squares fit of `value ≈ alpha_inf + c / N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitFit {
    pub alpha_inf: f64,
    pub c: f64,
    pub window: [usize; 2],
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub kind: String,
    pub rows: Vec<ScanRow>,
    pub fit: Option<LogLogFit>,
    pub extrapolated_limit: Option<LimitFit>,
    pub max_tail_difference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbolic_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<PointFailure>,
}

/// Values at or below this are treated as exact zeros and left out of log fits.
pub const FIT_FLOOR: f64 = 1e-300;

impl ScanResult {
    /// Sorts rows and computes the tail statistics.
    pub fn new(kind: &str, mut rows: Vec<ScanRow>, failures: Vec<PointFailure>) -> Self {
        rows.sort_by_key(|r| r.n);
        let mut out = Self {
            kind: kind.to_string(),
            rows,
            fit: None,
            extrapolated_limit: None,
            max_tail_difference: None,
            symbolic_residual: None,
            failures,
        };
        out.fit = fit_loglog(out.tail());
        out.extrapolated_limit = fit_limit(out.tail());
        out.max_tail_difference = out.tail_differences().iter().map(|d| d.abs()).reduce(f64::max);
        out
    }

    /// Upper half of the rows: the last ⌈len/2⌉.
    pub fn tail(&self) -> &[ScanRow] {
        let k = self.rows.len().div_ceil(2);
        &self.rows[self.rows.len() - k..]
    }

    /// `v_{k+1} − v_k` over the tail.
    pub fn tail_differences(&self) -> Vec<f64> {
        self.tail().windows(2).map(|w| w[1].value - w[0].value).collect()
    }

    /// Rows with N ≤ `n_max`, refitted.
    pub fn truncated(&self, n_max: usize) -> Self {
        let rows = self.rows.iter().filter(|r| r.n <= n_max).cloned().collect();
        let mut out = Self::new(&self.kind, rows, Vec::new());
        out.symbolic_residual = self.symbolic_residual;
        out
    }

    pub fn max_value(&self) -> f64 {
        self.rows.iter().map(|r| r.value).fold(0.0, f64::max)
    }

    /// `max/min` of `N·value` over the tail; `None` if some tail value is zero.
    pub fn tail_scaled_ratio(&self) -> Option<f64> {
        let scaled: Vec<f64> = self.tail().iter().map(|r| r.n as f64 * r.value).collect();
        let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        let max = scaled.iter().copied().fold(0.0, f64::max);
        (min > 0.0 && !scaled.is_empty()).then(|| max / min)
    }

    /// Every tail value is below its predecessor.
    pub fn tail_strictly_decreasing(&self) -> bool {
        self.tail().windows(2).all(|w| w[1].value < w[0].value)
    }

    /// `|v_{k+1} − v_k|` never grows by more than `tol` along the tail.
    pub fn tail_differences_non_increasing(&self, tol: f64) -> bool {
        let d: Vec<f64> = self.tail_differences().iter().map(|d| d.abs()).collect();
        d.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

pub fn fit_loglog(rows: &[ScanRow]) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64, usize)> = rows
        .iter()
        .filter(|r| r.value.is_finite() && r.value.abs() > FIT_FLOOR)
        .map(|r| ((r.n as f64).ln(), r.value.abs().ln(), r.n))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let (slope, intercept) = least_squares(pts.iter().map(|p| (p.0, p.1)))?;
    Some(LogLogFit { slope, intercept, window: [pts[0].2, pts[pts.len() - 1].2], points: pts.len() })
}

pub fn fit_limit(rows: &[ScanRow]) -> Option<LimitFit> {
    let pts: Vec<&ScanRow> = rows.iter().filter(|r| r.value.is_finite()).collect();
    if pts.len() < 3 {
        return None;
    }
    let (c, alpha_inf) = least_squares(pts.iter().map(|r| (1.0 / r.n as f64, r.value)))?;
    Some(LimitFit { alpha_inf, c, window: [pts[0].n, pts[pts.len() - 1].n], points: pts.len() })
}

/// `(slope, intercept)` of `y ≈ slope·x + intercept`.
fn least_squares(pts: impl Iterator<Item = (f64, f64)>) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = pts.collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
