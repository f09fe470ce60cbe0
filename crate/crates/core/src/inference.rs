//! Monte-Carlo null calibration, split-grid scans and test reports.
//!
//! Replicates and grid cells are independent work units evaluated with
//! rayon. Replicate `i` draws from its own stream keyed by `(seed, i)`, and
//! all reductions happen after collection in index order, so outputs are
//! bit-identical for any number of worker threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic::normal_product_cov;
use crate::cond_stats::{moments_on_windows, CondMoments, RankedView, SpearmanMode};
use crate::quantile::{ranks_unchecked, QuantileSplit};
use crate::special_fn::{derive_stream_id, RngStream};
use crate::timeseries::{lag_moments, AcfOptions};
use crate::{Error, Result};

/// Smallest number of replicates accepted by [`mc_null`].
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullStatistic {
    Corr,
    Spearman,
    AbsCorr,
}

impl NullStatistic {
    fn extract(&self, m: &CondMoments) -> f64 {
        match self {
            NullStatistic::Corr => m.corr,
            NullStatistic::Spearman => m.spearman,
            NullStatistic::AbsCorr => m.corr.abs(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NullStatistic::Corr => "corr",
            NullStatistic::Spearman => "spearman",
            NullStatistic::AbsCorr => "abs_corr",
        }
    }
}

impl FromStr for NullStatistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corr" => Ok(NullStatistic::Corr),
            "spearman" => Ok(NullStatistic::Spearman),
            "abs_corr" | "abs-corr" => Ok(NullStatistic::AbsCorr),
            other => Err(Error::domain(
                "inference::mc_null",
                format!("unknown statistic {other:?} (corr, spearman, abs_corr)"),
            )),
        }
    }
}

/// Shape of the simulated null data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// `n` independent pairs.
    IidPairs,
    /// A length-`n` i.i.d. series paired with itself at lag 1 (`n − 1` pairs).
    Lag1Series,
}

impl Pairing {
    pub fn name(&self) -> &'static str {
        match self {
            Pairing::IidPairs => "iid-pairs",
            Pairing::Lag1Series => "lag1-series",
        }
    }
}

impl FromStr for Pairing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid-pairs" | "pairs" => Ok(Pairing::IidPairs),
            "lag1-series" | "lag1" => Ok(Pairing::Lag1Series),
            other => Err(Error::domain(
                "inference::mc_null",
                format!("unknown pairing {other:?} (iid-pairs, lag1-series)"),
            )),
        }
    }
}

/// Marginal law of the simulated null data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NullMarginal {
    #[default]
    Normal,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McNullSpec {
    pub n: usize,
    /// Applied to both coordinates.
    pub split: QuantileSplit,
    pub replicates: usize,
    pub seed: u64,
    pub statistic: NullStatistic,
    pub pairing: Pairing,
    pub marginal: NullMarginal,
}

impl McNullSpec {
    /// Signed correlation of a lag-1 normal series.
    pub fn new(n: usize, split: QuantileSplit, replicates: usize, seed: u64) -> Self {
        McNullSpec {
            n,
            split,
            replicates,
            seed,
            statistic: NullStatistic::Corr,
            pairing: Pairing::Lag1Series,
            marginal: NullMarginal::Normal,
        }
    }

    pub fn statistic(mut self, statistic: NullStatistic) -> Self {
        self.statistic = statistic;
        self
    }

    pub fn pairing(mut self, pairing: Pairing) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn marginal(mut self, marginal: NullMarginal) -> Self {
        self.marginal = marginal;
        self
    }
}

/// Sorted Monte-Carlo replicates of a conditional statistic under
/// independence.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    values: Vec<f64>,
    spec: McNullSpec,
    redraws: usize,
}

impl NullDistribution {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> &McNullSpec {
        &self.spec
    }

    pub fn replicates(&self) -> usize {
        self.values.len()
    }

    /// Replicates that had to be redrawn because their conditioning set was
    /// too small or degenerate.
    pub fn redraws(&self) -> usize {
        self.redraws
    }
}

fn draw(stream: &mut RngStream, marginal: NullMarginal) -> f64 {
    match marginal {
        NullMarginal::Normal => stream.normal(),
        NullMarginal::Uniform => stream.uniform(),
    }
}

fn replicate_statistic(spec: &McNullSpec, stream: &mut RngStream) -> Result<f64> {
    let moments = match spec.pairing {
        Pairing::IidPairs => {
            let x: Vec<f64> = (0..spec.n).map(|_| draw(stream, spec.marginal)).collect();
            let y: Vec<f64> = (0..spec.n).map(|_| draw(stream, spec.marginal)).collect();
            let (rx, ry) = (ranks_unchecked(&x), ranks_unchecked(&y));
            moments_on_windows(
                "inference::mc_null",
                RankedView {
                    values: &x,
                    ranks: &rx,
                    n_ranked: spec.n,
                },
                RankedView {
                    values: &y,
                    ranks: &ry,
                    n_ranked: spec.n,
                },
                spec.split,
                spec.split,
                SpearmanMode::GlobalRanks,
            )?
        }
        Pairing::Lag1Series => {
            let series: Vec<f64> = (0..spec.n).map(|_| draw(stream, spec.marginal)).collect();
            lag_moments(&series, None, 1, &AcfOptions::new(spec.split))?
        }
    };
    Ok(spec.statistic.extract(&moments))
}

/// Simulates the null distribution of the conditional statistic.
///
/// A replicate whose conditioning set is too small or degenerate is redrawn
/// from a fresh sub-stream; the call fails if redraws exceed 10% of the
/// replicate count.
pub fn mc_null(spec: &McNullSpec) -> Result<NullDistribution> {
    const OP: &str = "inference::mc_null";
    if spec.n < 10 {
        return Err(Error::domain(
            OP,
            format!("n must be at least 10, got {}", spec.n),
        ));
    }
    if spec.replicates < MIN_REPLICATES {
        return Err(Error::domain(
            OP,
            format!(
                "need at least {MIN_REPLICATES} replicates, got {}",
                spec.replicates
            ),
        ));
    }
    let budget = spec.replicates / 10;
    let outcomes: Vec<Option<(f64, usize)>> = (0..spec.replicates as u64)
        .into_par_iter()
        .map(|index| {
            for attempt in 0..=budget as u64 + 1 {
                let mut stream = RngStream::new(spec.seed, derive_stream_id(&[index, attempt]));
                match replicate_statistic(spec, &mut stream) {
                    Ok(v) => return Some((v, attempt as usize)),
                    Err(Error::InsufficientData { .. } | Error::DegenerateVariance { .. }) => {}
                    Err(e) => unreachable!("unexpected replicate failure: {e}"),
                }
            }
            None
        })
        .collect();

    let mut redraws = 0usize;
    let mut values = Vec::with_capacity(spec.replicates);
    for outcome in outcomes {
        match outcome {
            Some((v, r)) => {
                redraws += r;
                values.push(v);
            }
            None => redraws += budget + 2,
        }
    }
    if redraws > budget {
        return Err(Error::ExcessiveRedraws {
            op: OP,
            redraws,
            replicates: spec.replicates,
        });
    }
    values.sort_by(f64::total_cmp);
    Ok(NullDistribution {
        values,
        spec: *spec,
        redraws,
    })
}

/// Order statistic at 1-based index `⌈M·level⌉`, clamped to `1..=M`.
pub fn null_quantile(dist: &NullDistribution, level: f64) -> f64 {
    let m = dist.values.len();
    let k = crate::quantile::ceil_rank(m, level).clamp(1, m);
    dist.values[k - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Reject,
    FailToReject,
}

impl Decision {
    pub fn name(&self) -> &'static str {
        match self {
            Decision::Reject => "reject",
            Decision::FailToReject => "fail-to-reject",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of comparing an observed statistic with its Monte-Carlo null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestReport {
    pub observed: f64,
    /// Upper `(1 − alpha)` null quantile.
    pub threshold: f64,
    pub alpha: f64,
    pub decision: Decision,
    pub seed: u64,
    pub replicates: usize,
    pub n: usize,
    pub split: QuantileSplit,
    pub statistic: NullStatistic,
    pub pairing: Pairing,
    pub redraws: usize,
}

/// One-sided upper-tail test: reject iff the observed statistic strictly
/// exceeds the `(1 − alpha)` null quantile. For an `AbsCorr` null the
/// observed value is taken in absolute value, which gives the two-sided
/// variant.
pub fn test_statistic(observed: f64, dist: &NullDistribution, alpha: f64) -> Result<TestReport> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::domain(
            "inference::test_statistic",
            format!("alpha must lie in (0, 0.5], got {alpha}"),
        ));
    }
    let spec = dist.spec;
    let observed = match spec.statistic {
        NullStatistic::AbsCorr => observed.abs(),
        _ => observed,
    };
    let threshold = null_quantile(dist, 1.0 - alpha);
    let decision = if observed > threshold {
        Decision::Reject
    } else {
        Decision::FailToReject
    };
    Ok(TestReport {
        observed,
        threshold,
        alpha,
        decision,
        seed: spec.seed,
        replicates: dist.values.len(),
        n: spec.n,
        split: spec.split,
        statistic: spec.statistic,
        pairing: spec.pairing,
        redraws: dist.redraws,
    })
}

/// One axis of a split grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Fixed(f64),
    /// `steps` evenly spaced values from `start` to `end`, inclusive.
    Range {
        start: f64,
        end: f64,
        steps: usize,
    },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Fixed(v) => vec![v],
            Axis::Range {
                start, steps: 1, ..
            } => vec![start],
            Axis::Range { start, end, steps } => {
                let h = (end - start) / (steps - 1) as f64;
                (0..steps)
                    .map(|i| {
                        if i + 1 == steps {
                            end
                        } else {
                            start + i as f64 * h
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Axis::Fixed(_) => 1,
            Axis::Range { steps, .. } => *steps,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `v` for a fixed value, `start:end:steps` for a range.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain("inference::ScanSpec", format!("bad axis {s:?}"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            [v] => Ok(Axis::Fixed(num(v)?)),
            [a, b, k] => {
                let steps: usize = k.parse().map_err(|_| bad())?;
                if steps == 0 {
                    return Err(bad());
                }
                Ok(Axis::Range {
                    start: num(a)?,
                    end: num(b)?,
                    steps,
                })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanStatistic {
    Cov,
    Corr,
    Spearman,
}

impl ScanStatistic {
    fn extract(&self, m: &CondMoments) -> f64 {
        match self {
            ScanStatistic::Cov => m.cov,
            ScanStatistic::Corr => m.corr,
            ScanStatistic::Spearman => m.spearman,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScanStatistic::Cov => "cov",
            ScanStatistic::Corr => "corr",
            ScanStatistic::Spearman => "spearman",
        }
    }
}

impl FromStr for ScanStatistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cov" => Ok(ScanStatistic::Cov),
            "corr" => Ok(ScanStatistic::Corr),
            "spearman" => Ok(ScanStatistic::Spearman),
            other => Err(Error::domain(
                "inference::scan_splits",
                format!("unknown statistic {other:?} (cov, corr, spearman)"),
            )),
        }
    }
}

/// Grid of quantile splits `(p1, q1) × (p2, q2)`; cells are the Cartesian
/// product of the four axes, `p1` varying slowest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub p1: Axis,
    pub q1: Axis,
    pub p2: Axis,
    pub q2: Axis,
    pub statistic: ScanStatistic,
}

impl ScanSpec {
    /// `0.2 ≤ p1, q1 ≤ 0.8` with `p2 = 0.5`, `q2 = 0.8`.
    pub fn left_panel(steps: usize) -> Self {
        let axis = Axis::Range {
            start: 0.2,
            end: 0.8,
            steps,
        };
        ScanSpec {
            p1: axis,
            q1: axis,
            p2: Axis::Fixed(0.5),
            q2: Axis::Fixed(0.8),
            statistic: ScanStatistic::Cov,
        }
    }

    /// `p1 = p2 = 0.2` with `q1, q2` ranging over `[0.2, 1.0]`.
    pub fn right_panel(steps: usize) -> Self {
        let axis = Axis::Range {
            start: 0.2,
            end: 1.0,
            steps,
        };
        ScanSpec {
            p1: Axis::Fixed(0.2),
            q1: axis,
            p2: Axis::Fixed(0.2),
            q2: axis,
            statistic: ScanStatistic::Cov,
        }
    }

    pub fn with_statistic(mut self, statistic: ScanStatistic) -> Self {
        self.statistic = statistic;
        self
    }

    pub fn cell_count(&self) -> usize {
        self.p1.len() * self.q1.len() * self.p2.len() * self.q2.len()
    }

    fn points(&self) -> Vec<[f64; 4]> {
        let (a, b, c, d) = (
            self.p1.values(),
            self.q1.values(),
            self.p2.values(),
            self.q2.values(),
        );
        let mut out = Vec::with_capacity(self.cell_count());
        for &p1 in &a {
            for &q1 in &b {
                for &p2 in &c {
                    for &q2 in &d {
                        out.push([p1, q1, p2, q2]);
                    }
                }
            }
        }
        out
    }
}

impl FromStr for ScanSpec {
    type Err = Error;

    /// `p1=AXIS,q1=AXIS,p2=AXIS,q2=AXIS` where AXIS is `v` or
    /// `start:end:steps`. Missing axes default to the full range
    /// (`p = 0`, `q = 1`). The statistic defaults to `cov`.
    fn from_str(s: &str) -> Result<Self> {
        let mut spec = ScanSpec {
            p1: Axis::Fixed(0.0),
            q1: Axis::Fixed(1.0),
            p2: Axis::Fixed(0.0),
            q2: Axis::Fixed(1.0),
            statistic: ScanStatistic::Cov,
        };
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::domain(
                    "inference::ScanSpec",
                    format!("expected key=axis, got {item:?}"),
                )
            })?;
            let axis: Axis = value.parse()?;
            match key.trim() {
                "p1" => spec.p1 = axis,
                "q1" => spec.q1 = axis,
                "p2" => spec.p2 = axis,
                "q2" => spec.q2 = axis,
                other => {
                    return Err(Error::domain(
                        "inference::ScanSpec",
                        format!("unknown axis {other:?} (p1, q1, p2, q2)"),
                    ))
                }
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanCell {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    /// `None` marks an invalid cell.
    pub value: Option<f64>,
    /// Member count, when data was involved and the split was admissible.
    pub m: Option<usize>,
}

impl ScanCell {
    pub fn is_valid(&self) -> bool {
        self.value.is_some()
    }

    fn splits(&self, interior: bool) -> Option<(QuantileSplit, QuantileSplit)> {
        let sx = QuantileSplit::new(self.p1, self.q1).ok()?;
        let sy = QuantileSplit::new(self.p2, self.q2).ok()?;
        if interior && !(sx.is_interior() && sy.is_interior()) {
            return None;
        }
        Some((sx, sy))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub spec: ScanSpec,
    pub cells: Vec<ScanCell>,
}

impl ScanGrid {
    pub fn valid_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_valid()).count()
    }

    /// The valid cell with the largest `|value|` (first one on ties).
    pub fn max_abs_cell(&self) -> Option<&ScanCell> {
        self.cells
            .iter()
            .filter(|c| c.is_valid())
            .fold(None, |best: Option<&ScanCell>, c| match best {
                Some(b) if b.value.unwrap().abs() >= c.value.unwrap().abs() => Some(b),
                _ => Some(c),
            })
    }

    pub fn find(&self, p1: f64, q1: f64, p2: f64, q2: f64) -> Option<&ScanCell> {
        const TOL: f64 = 1e-12;
        self.cells.iter().find(|c| {
            (c.p1 - p1).abs() < TOL
                && (c.q1 - q1).abs() < TOL
                && (c.p2 - p2).abs() < TOL
                && (c.q2 - q2).abs() < TOL
        })
    }
}

fn blank(point: [f64; 4]) -> ScanCell {
    ScanCell {
        p1: point[0],
        q1: point[1],
        p2: point[2],
        q2: point[3],
        value: None,
        m: None,
    }
}

/// Fills the grid with the conditional statistic of `(x, y)`. Ranks are
/// computed once; each cell is a rank-window lookup. Cells with `p ≥ q`, or
/// whose set has fewer than three members or a degenerate variance, are
/// left invalid.
pub fn scan_splits(x: &[f64], y: &[f64], spec: &ScanSpec) -> Result<ScanGrid> {
    const OP: &str = "inference::scan_splits";
    if x.len() != y.len() {
        return Err(Error::domain(
            OP,
            format!("length mismatch: {} vs {}", x.len(), y.len()),
        ));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::domain(OP, format!("non-finite value {v}")));
    }
    let n = x.len();
    let (rx, ry) = (ranks_unchecked(x), ranks_unchecked(y));
    let cells = spec
        .points()
        .into_par_iter()
        .map(|point| {
            let mut cell = blank(point);
            if let Some((sx, sy)) = cell.splits(false) {
                let wx = sx.rank_window(n);
                let wy = sy.rank_window(n);
                let m = (0..n)
                    .filter(|&i| {
                        QuantileSplit::contains_rank(wx, rx[i])
                            && QuantileSplit::contains_rank(wy, ry[i])
                    })
                    .count();
                cell.m = Some(m);
                let view_x = RankedView {
                    values: x,
                    ranks: &rx,
                    n_ranked: n,
                };
                let view_y = RankedView {
                    values: y,
                    ranks: &ry,
                    n_ranked: n,
                };
                if let Ok(mo) =
                    moments_on_windows(OP, view_x, view_y, sx, sy, SpearmanMode::GlobalRanks)
                {
                    cell.value = Some(spec.statistic.extract(&mo));
                }
            }
            cell
        })
        .collect();
    Ok(ScanGrid { spec: *spec, cells })
}

/// Fills the grid with the closed-form conditional covariance of `(X, W·X)`.
/// Cells that are not strictly interior, have `p ≥ q`, or miss the support
/// are left invalid.
pub fn analytic_scan(spec: &ScanSpec) -> ScanGrid {
    let cells = spec
        .points()
        .into_par_iter()
        .map(|point| {
            let mut cell = blank(point);
            if let Some((sx, sy)) = cell.splits(true) {
                cell.value = normal_product_cov(sx, sy).ok();
            }
            cell
        })
        .collect();
    ScanGrid {
        spec: ScanSpec {
            statistic: ScanStatistic::Cov,
            ..*spec
        },
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::standard_normal_sample;

    fn split(p: f64, q: f64) -> QuantileSplit {
        QuantileSplit::new(p, q).unwrap()
    }

    fn fake_null(values: Vec<f64>) -> NullDistribution {
        NullDistribution {
            values,
            spec: McNullSpec::new(100, QuantileSplit::FULL, 100, 0),
            redraws: 0,
        }
    }

    #[test]
    fn quantile_order_statistics() {
        let d = fake_null((1..=100).map(f64::from).collect());
        assert_eq!(null_quantile(&d, 0.5), 50.0);
        assert_eq!(null_quantile(&d, 0.999_999), 100.0);
        assert_eq!(null_quantile(&d, 0.999), 100.0);
        assert_eq!(null_quantile(&d, 0.01), 1.0);
        assert_eq!(null_quantile(&d, 1e-9), 1.0);
    }

    #[test]
    fn decisions() {
        let d = fake_null((1..=100).map(|i| i as f64 / 400.0).collect());
        let t = null_quantile(&d, 0.99);
        assert_eq!(
            test_statistic(0.0, &d, 0.01).unwrap().decision,
            Decision::FailToReject
        );
        assert_eq!(
            test_statistic(t, &d, 0.01).unwrap().decision,
            Decision::FailToReject
        );
        assert_eq!(
            test_statistic(t + 1e-9, &d, 0.01).unwrap().decision,
            Decision::Reject
        );
        assert!(test_statistic(0.1, &d, 0.0).is_err());
        assert!(test_statistic(0.1, &d, 0.6).is_err());
    }

    #[test]
    fn mc_null_validation() {
        assert!(mc_null(&McNullSpec::new(5, QuantileSplit::FULL, 1000, 0)).is_err());
        assert!(mc_null(&McNullSpec::new(50, QuantileSplit::FULL, 99, 0)).is_err());
    }

    #[test]
    fn mc_null_redraw_cap() {
        // n = 10 with a 5% window keeps at most one member per coordinate
        let spec = McNullSpec::new(10, split(0.0, 0.05), 100, 1).pairing(Pairing::IidPairs);
        assert!(matches!(
            mc_null(&spec),
            Err(Error::ExcessiveRedraws { .. })
        ));
    }

    #[test]
    fn mc_null_is_sorted_and_reproducible() {
        let spec = McNullSpec::new(60, split(0.1, 0.9), 500, 3);
        let a = mc_null(&spec).unwrap();
        assert_eq!(a.replicates(), 500);
        assert!(a.values().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a, mc_null(&spec).unwrap());
        let b = mc_null(&McNullSpec { seed: 4, ..spec }).unwrap();
        assert_ne!(a.values(), b.values());
    }

    #[test]
    fn iid_pairs_null_is_symmetric() {
        let m = 4000;
        let spec = McNullSpec::new(80, QuantileSplit::FULL, m, 12).pairing(Pairing::IidPairs);
        let d = mc_null(&spec).unwrap();
        let median = null_quantile(&d, 0.5);
        let iqr = null_quantile(&d, 0.75) - null_quantile(&d, 0.25);
        assert!(
            median.abs() < 3.0 / (m as f64).sqrt() * iqr,
            "median {median}, iqr {iqr}"
        );
    }

    #[test]
    fn axis_and_spec_parsing() {
        assert_eq!("0.5".parse::<Axis>().unwrap(), Axis::Fixed(0.5));
        let r: Axis = "0.2:0.8:4".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 0.2);
        assert_eq!(v[3], 0.8);
        assert!("0.2:0.8".parse::<Axis>().is_err());
        assert!("0.2:0.8:0".parse::<Axis>().is_err());
        let s: ScanSpec = "p1=0.2:0.8:7,q1=0.2:0.8:7,p2=0.5,q2=0.8".parse().unwrap();
        assert_eq!(s.cell_count(), 49);
        assert_eq!(s.p2, Axis::Fixed(0.5));
        assert!("p3=0.1".parse::<ScanSpec>().is_err());
    }

    #[test]
    fn comonotone_scan() {
        let x = standard_normal_sample(&RngStream::new(2, 0), 2000);
        let spec: ScanSpec = "p1=0.1:0.5:5,q1=0.6:0.9:4".parse().unwrap();
        let spec = spec.with_statistic(ScanStatistic::Corr);
        let grid = scan_splits(&x, &x, &spec).unwrap();
        assert_eq!(grid.cells.len(), 20);
        for c in &grid.cells {
            assert!((c.value.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_marks_invalid_cells() {
        let x = standard_normal_sample(&RngStream::new(2, 0), 500);
        let y = standard_normal_sample(&RngStream::new(2, 1), 500);
        let grid = scan_splits(&x, &y, &ScanSpec::left_panel(5)).unwrap();
        for c in &grid.cells {
            if c.p1 >= c.q1 {
                assert!(!c.is_valid());
                assert_eq!(c.m, None);
            } else {
                assert!(c.is_valid());
            }
        }
        assert_eq!(grid.valid_count(), 10);
        let best = grid.max_abs_cell().unwrap();
        assert!(grid
            .cells
            .iter()
            .filter_map(|c| c.value)
            .all(|v| v.abs() <= best.value.unwrap().abs()));
    }

    #[test]
    fn analytic_scan_panels() {
        let left = analytic_scan(&ScanSpec::left_panel(13));
        let anchor = left.find(0.5, 0.8, 0.5, 0.8).unwrap();
        assert!((anchor.value.unwrap() - 0.0573).abs() < 5e-4);
        for c in &left.cells {
            assert_eq!(c.is_valid(), c.p1 < c.q1);
            if let Some(v) = c.value {
                assert!(v.is_finite());
            }
        }
        let right = analytic_scan(&ScanSpec::right_panel(9));
        for c in right.cells.iter().filter(|c| c.is_valid()) {
            let swapped = right.find(c.p2, c.q2, c.p1, c.q1).unwrap();
            assert!((c.value.unwrap() - swapped.value.unwrap()).abs() < 1e-14);
        }
        // q = 1 and q = p = 0.2 are invalid
        assert!(right
            .cells
            .iter()
            .filter(|c| c.q1 == 1.0)
            .all(|c| !c.is_valid()));
        assert!(right
            .cells
            .iter()
            .filter(|c| c.q1 == 0.2)
            .all(|c| !c.is_valid()));
    }
}
