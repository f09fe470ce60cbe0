//! Lagged pairs and the conditional autocorrelation function.
//!
//! For lag `k` the pair sample is `(x_{k+1..n}, x_{1..n−k})`. By default each
//! pair coordinate is ranked on its own, so the lagged pair is treated as an
//! ordinary bivariate sample; [`PairRanking::WholeSeries`] ranks the series
//! once instead. Transforms are applied before ranking.

use std::str::FromStr;

use rayon::prelude::*;

use crate::cond_stats::{moments_on_windows, CondMoments, RankedView, SpearmanMode, MIN_MEMBERS};
use crate::quantile::{ranks_unchecked, QuantileSplit};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    timestamps: Option<Vec<String>>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        const OP: &str = "timeseries::Series";
        if values.len() < 2 {
            return Err(Error::domain(OP, "a series needs at least two values"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(OP, format!("non-finite value {v}")));
        }
        Ok(Series {
            values,
            timestamps: None,
        })
    }

    pub fn with_timestamps(mut self, timestamps: Vec<String>) -> Result<Self> {
        if timestamps.len() != self.values.len() {
            return Err(Error::domain(
                "timeseries::Series",
                format!(
                    "{} timestamps for {} values",
                    timestamps.len(),
                    self.values.len()
                ),
            ));
        }
        self.timestamps = Some(timestamps);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transform {
    #[default]
    Identity,
    Absolute,
    Square,
}

impl Transform {
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Absolute => v.abs(),
            Transform::Square => v * v,
        }
    }
}

impl FromStr for Transform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" | "none" => Ok(Transform::Identity),
            "absolute" | "abs" => Ok(Transform::Absolute),
            "square" | "squared" => Ok(Transform::Square),
            other => Err(Error::domain(
                "timeseries::Transform",
                format!("unknown transform {other:?} (identity, absolute, square)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairRanking {
    /// Rank `x_{k+1..n}` and `x_{1..n−k}` separately.
    #[default]
    PairCoordinates,
    /// Rank the whole (transformed) series once and reuse those ranks.
    WholeSeries,
}

/// Splits and options for [`cond_acf`]. `split_current` conditions
/// `x_t`, `split_lagged` conditions `x_{t−k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfOptions {
    pub split_current: QuantileSplit,
    pub split_lagged: QuantileSplit,
    pub transform: Transform,
    pub ranking: PairRanking,
}

impl AcfOptions {
    /// Same split on both coordinates, identity transform, pair ranking.
    pub fn new(split: QuantileSplit) -> Self {
        AcfOptions {
            split_current: split,
            split_lagged: split,
            transform: Transform::Identity,
            ranking: PairRanking::PairCoordinates,
        }
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    pub fn with_ranking(mut self, ranking: PairRanking) -> Self {
        self.ranking = ranking;
        self
    }
}

/// `(x_{k+1..n}, x_{1..n−k})`.
pub fn lag_pairs(values: &[f64], k: usize) -> Result<(&[f64], &[f64])> {
    let n = values.len();
    if k == 0 || k >= n {
        return Err(Error::domain(
            "timeseries::lag_pairs",
            format!("lag must lie in 1..{n}, got {k}"),
        ));
    }
    Ok((&values[k..], &values[..n - k]))
}

/// Outcome for one lag. A lag whose conditioning set is too small or
/// degenerate keeps its error instead of failing the whole curve.
#[derive(Debug, Clone, PartialEq)]
pub struct LagRecord {
    pub lag: usize,
    pub result: Result<CondMoments>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondAcfResult {
    pub records: Vec<LagRecord>,
    pub max_lag: usize,
    pub options: AcfOptions,
}

impl CondAcfResult {
    pub fn corr(&self, lag: usize) -> Option<f64> {
        self.records
            .get(lag.checked_sub(1)?)
            .and_then(|r| r.result.as_ref().ok())
            .map(|m| m.corr)
    }
}

/// Conditional autocorrelation for lags `1..=max_lag`.
pub fn cond_acf(series: &Series, max_lag: usize, options: AcfOptions) -> Result<CondAcfResult> {
    let n = series.len();
    if max_lag == 0 || max_lag + 2 >= n {
        return Err(Error::domain(
            "timeseries::cond_acf",
            format!(
                "max_lag must lie in 1..{}, got {max_lag}",
                n.saturating_sub(2)
            ),
        ));
    }
    let values: Vec<f64> = series
        .values()
        .iter()
        .map(|&v| options.transform.apply(v))
        .collect();
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(
            "timeseries::cond_acf",
            format!("transform produced non-finite value {v}"),
        ));
    }
    let whole_ranks = match options.ranking {
        PairRanking::WholeSeries => Some(ranks_unchecked(&values)),
        PairRanking::PairCoordinates => None,
    };
    let records = (1..=max_lag)
        .into_par_iter()
        .map(|k| LagRecord {
            lag: k,
            result: lag_moments(&values, whole_ranks.as_deref(), k, &options),
        })
        .collect();
    Ok(CondAcfResult {
        records,
        max_lag,
        options,
    })
}

/// Conditional correlation of one lag on already-transformed values.
pub(crate) fn lag_moments(
    values: &[f64],
    whole_ranks: Option<&[usize]>,
    k: usize,
    options: &AcfOptions,
) -> Result<CondMoments> {
    const OP: &str = "timeseries::cond_acf";
    let (current, lagged) = lag_pairs(values, k)?;
    if current.len() < MIN_MEMBERS {
        return Err(Error::InsufficientData {
            op: OP,
            m: current.len(),
            need: MIN_MEMBERS,
        });
    }
    let n = values.len();
    match whole_ranks {
        Some(ranks) => moments_on_windows(
            OP,
            RankedView {
                values: current,
                ranks: &ranks[k..],
                n_ranked: n,
            },
            RankedView {
                values: lagged,
                ranks: &ranks[..n - k],
                n_ranked: n,
            },
            options.split_current,
            options.split_lagged,
            SpearmanMode::GlobalRanks,
        ),
        None => {
            let rc = ranks_unchecked(current);
            let rl = ranks_unchecked(lagged);
            moments_on_windows(
                OP,
                RankedView {
                    values: current,
                    ranks: &rc,
                    n_ranked: current.len(),
                },
                RankedView {
                    values: lagged,
                    ranks: &rl,
                    n_ranked: lagged.len(),
                },
                options.split_current,
                options.split_lagged,
                SpearmanMode::GlobalRanks,
            )
        }
    }
}

/// One point of a lag plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagPoint {
    /// 1-based time index of the current observation.
    pub t: usize,
    pub current: f64,
    pub lagged: f64,
    pub member: bool,
}

/// The lag-`k` scatter `(x_t, x_{t−k})` of the transformed series, with the
/// quantile-set membership of each point.
pub fn lag_plot(series: &Series, k: usize, options: AcfOptions) -> Result<Vec<LagPoint>> {
    let values: Vec<f64> = series
        .values()
        .iter()
        .map(|&v| options.transform.apply(v))
        .collect();
    let (current, lagged) = lag_pairs(&values, k)?;
    let n = values.len();
    let (rc, rl, nc, nl) = match options.ranking {
        PairRanking::PairCoordinates => (
            ranks_unchecked(current),
            ranks_unchecked(lagged),
            current.len(),
            lagged.len(),
        ),
        PairRanking::WholeSeries => {
            let r = ranks_unchecked(&values);
            (r[k..].to_vec(), r[..n - k].to_vec(), n, n)
        }
    };
    let wc = options.split_current.rank_window(nc);
    let wl = options.split_lagged.rank_window(nl);
    Ok((0..current.len())
        .map(|i| LagPoint {
            t: i + k + 1,
            current: current[i],
            lagged: lagged[i],
            member: QuantileSplit::contains_rank(wc, rc[i])
                && QuantileSplit::contains_rank(wl, rl[i]),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::{standard_normal_sample, RngStream};
    use crate::synth::{generate, Family, GeneratorSpec};

    fn split(p: f64, q: f64) -> QuantileSplit {
        QuantileSplit::new(p, q).unwrap()
    }

    #[test]
    fn lag_pair_examples() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(
            lag_pairs(&v, 1).unwrap(),
            (&[2.0, 3.0, 4.0][..], &[1.0, 2.0, 3.0][..])
        );
        assert_eq!(lag_pairs(&v, 3).unwrap(), (&[4.0][..], &[1.0][..]));
        let w = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(
            lag_pairs(&w, 2).unwrap(),
            (&[3.0, 4.0, 5.0][..], &[1.0, 2.0, 3.0][..])
        );
        assert!(lag_pairs(&v, 4).is_err());
        assert!(lag_pairs(&v, 0).is_err());
    }

    #[test]
    fn iid_series_within_null_band() {
        let s = Series::new(standard_normal_sample(&RngStream::new(31, 0), 5000)).unwrap();
        let acf = cond_acf(&s, 10, AcfOptions::new(QuantileSplit::FULL)).unwrap();
        assert_eq!(acf.records.len(), 10);
        for rec in &acf.records {
            let c = rec.result.as_ref().unwrap().corr;
            assert!(c.abs() < 0.05, "lag {} corr {c}", rec.lag);
        }
    }

    #[test]
    fn trend_is_comonotone() {
        let s = Series::new((1..=200).map(f64::from).collect()).unwrap();
        let acf = cond_acf(&s, 3, AcfOptions::new(QuantileSplit::FULL)).unwrap();
        assert!((acf.corr(1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_range_matches_pairwise_pearson() {
        let s = Series::new(standard_normal_sample(&RngStream::new(8, 0), 300)).unwrap();
        let acf = cond_acf(&s, 5, AcfOptions::new(QuantileSplit::FULL)).unwrap();
        for k in 1..=5 {
            let (a, b) = lag_pairs(s.values(), k).unwrap();
            assert_eq!(
                acf.corr(k).unwrap(),
                crate::cond_stats::pearson(a, b).unwrap()
            );
        }
    }

    #[test]
    fn heavy_tails_stay_bounded() {
        let data = generate(&GeneratorSpec::new(Family::StudentT { nu: 2.0 }, 5000, 3)).unwrap();
        let s = Series::new(data.column(0).to_vec()).unwrap();
        let acf = cond_acf(&s, 1, AcfOptions::new(split(0.01, 0.7))).unwrap();
        let c = acf.corr(1).unwrap();
        assert!(c.is_finite() && c.abs() <= 1.0);
        // crude null band for m ≈ 0.69² · 4999 members
        assert!(c.abs() < 4.0 / (0.47f64 * 5000.0).sqrt(), "{c}");
    }

    #[test]
    fn invariances() {
        let raw = standard_normal_sample(&RngStream::new(12, 0), 400);
        let s = Series::new(raw.clone()).unwrap();
        let opts = AcfOptions::new(split(0.1, 0.8));
        let base = cond_acf(&s, 4, opts).unwrap();

        let bent = Series::new(raw.iter().map(|v| (0.5 * v).exp()).collect()).unwrap();
        let moved = Series::new(raw.iter().map(|v| 3.5 * v - 2.0).collect()).unwrap();
        let b = cond_acf(&bent, 4, opts).unwrap();
        let m = cond_acf(&moved, 4, opts).unwrap();
        for k in 0..4 {
            let r0 = base.records[k].result.as_ref().unwrap();
            let rb = b.records[k].result.as_ref().unwrap();
            let rm = m.records[k].result.as_ref().unwrap();
            assert_eq!(r0.spearman, rb.spearman);
            assert_eq!(r0.m, rb.m);
            assert!((r0.corr - rm.corr).abs() < 1e-12);
            assert_eq!(r0.spearman, rm.spearman);
        }
    }

    #[test]
    fn transforms_and_ranking_options() {
        let raw = standard_normal_sample(&RngStream::new(4, 0), 500);
        let s = Series::new(raw.clone()).unwrap();
        let abs = cond_acf(
            &s,
            2,
            AcfOptions::new(QuantileSplit::FULL).with_transform(Transform::Absolute),
        )
        .unwrap();
        let absolute: Vec<f64> = raw.iter().map(|v| v.abs()).collect();
        let (a, b) = lag_pairs(&absolute, 1).unwrap();
        assert_eq!(
            abs.corr(1).unwrap(),
            crate::cond_stats::pearson(a, b).unwrap()
        );

        let whole = cond_acf(
            &s,
            2,
            AcfOptions::new(split(0.1, 0.9)).with_ranking(PairRanking::WholeSeries),
        )
        .unwrap();
        assert!(whole.corr(1).unwrap().abs() < 0.2);
        assert_eq!("square".parse::<Transform>().unwrap(), Transform::Square);
        assert!("cube".parse::<Transform>().is_err());
    }

    #[test]
    fn small_lag_sets_flagged_per_lag() {
        let s = Series::new(standard_normal_sample(&RngStream::new(1, 0), 12)).unwrap();
        let acf = cond_acf(&s, 9, AcfOptions::new(split(0.0, 0.3))).unwrap();
        assert!(acf
            .records
            .iter()
            .any(|r| matches!(r.result, Err(Error::InsufficientData { .. }))));
        assert!(cond_acf(&s, 10, AcfOptions::new(QuantileSplit::FULL)).is_err());
    }

    #[test]
    fn lag_plot_membership_matches_acf() {
        let s = Series::new(standard_normal_sample(&RngStream::new(6, 0), 312)).unwrap();
        let opts = AcfOptions::new(split(0.01, 0.7));
        let pts = lag_plot(&s, 1, opts).unwrap();
        assert_eq!(pts.len(), 311);
        assert_eq!(pts[0].t, 2);
        let m = pts.iter().filter(|p| p.member).count();
        let acf = cond_acf(&s, 1, opts).unwrap();
        assert_eq!(m, acf.records[0].result.as_ref().unwrap().m);
    }
}
