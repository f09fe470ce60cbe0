//! Quantile splits, ordinal ranks, empirical quantiles and membership masks.
//!
//! The empirical quantile set is realised through *rank windows*: with
//! ordinal ranks `R` in `1..=n`, a value belongs to the window of split
//! `(p, q)` iff `⌈n·p⌉ ≤ R ≤ ⌈n·q⌉` (no lower bound when `p = 0`). Because
//! only ranks enter, masks are unchanged by any strictly increasing
//! transform of a coordinate.

use std::str::FromStr;

use crate::{Error, Result};

/// A pair of probabilities `0 ≤ p < q ≤ 1` bounding one coordinate's
/// quantile range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileSplit {
    lower: f64,
    upper: f64,
}

impl QuantileSplit {
    /// The full range `(0, 1)`; conditioning on it changes nothing.
    pub const FULL: QuantileSplit = QuantileSplit {
        lower: 0.0,
        upper: 1.0,
    };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower >= 0.0 && upper <= 1.0 && lower < upper) {
            return Err(Error::domain(
                "quantile::QuantileSplit",
                format!("need 0 <= p < q <= 1, got p={lower}, q={upper}"),
            ));
        }
        Ok(QuantileSplit { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// True when both endpoints lie strictly inside (0, 1).
    pub fn is_interior(&self) -> bool {
        self.lower > 0.0 && self.upper < 1.0
    }

    /// Inclusive rank bounds `(lo, hi)` for a sample of size `n`.
    pub fn rank_window(&self, n: usize) -> (usize, usize) {
        let lo = if self.lower == 0.0 {
            1
        } else {
            ceil_rank(n, self.lower)
        };
        (lo, ceil_rank(n, self.upper))
    }

    #[inline]
    pub(crate) fn contains_rank(window: (usize, usize), rank: usize) -> bool {
        window.0 <= rank && rank <= window.1
    }
}

impl FromStr for QuantileSplit {
    type Err = Error;

    /// Parses `"p,q"` or `"p:q"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split([',', ':']).map(str::trim).collect();
        let parse = |t: &str| {
            t.parse::<f64>().map_err(|_| {
                Error::domain(
                    "quantile::QuantileSplit",
                    format!("not a probability: {t:?}"),
                )
            })
        };
        match parts.as_slice() {
            [p, q] => QuantileSplit::new(parse(p)?, parse(q)?),
            _ => Err(Error::domain(
                "quantile::QuantileSplit",
                format!("expected \"p,q\", got {s:?}"),
            )),
        }
    }
}

/// `⌈n·p⌉`, snapping products that are within rounding noise of an integer
/// (so `10 × 0.7` is 7, not 8).
pub(crate) fn ceil_rank(n: usize, p: f64) -> usize {
    let x = n as f64 * p;
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest as usize
    } else {
        x.ceil() as usize
    }
}

/// One split per coordinate; the quantile set is the intersection of the
/// per-coordinate windows.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBox {
    splits: Vec<QuantileSplit>,
}

impl QuantileBox {
    pub fn new(splits: Vec<QuantileSplit>) -> Result<Self> {
        if splits.is_empty() {
            return Err(Error::domain(
                "quantile::QuantileBox",
                "a box needs at least one split",
            ));
        }
        Ok(QuantileBox { splits })
    }

    /// The same split repeated over `d` coordinates.
    pub fn uniform(split: QuantileSplit, d: usize) -> Result<Self> {
        QuantileBox::new(vec![split; d])
    }

    pub fn splits(&self) -> &[QuantileSplit] {
        &self.splits
    }

    pub fn dim(&self) -> usize {
        self.splits.len()
    }
}

/// `n` observations of `d` labelled real coordinates, stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl SampleMatrix {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        const OP: &str = "quantile::SampleMatrix";
        if columns.is_empty() {
            return Err(Error::domain(OP, "need at least one column"));
        }
        if names.len() != columns.len() {
            return Err(Error::domain(
                OP,
                format!("{} names for {} columns", names.len(), columns.len()),
            ));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::domain(OP, "need at least one row"));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::domain(
                    OP,
                    format!("column {name:?} has {} rows, expected {n}", col.len()),
                ));
            }
            if let Some(v) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::domain(
                    OP,
                    format!("column {name:?} holds non-finite value {v}"),
                ));
            }
        }
        Ok(SampleMatrix { names, columns })
    }

    /// Columns named `x1, x2, ...`.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (1..=columns.len()).map(|j| format!("x{j}")).collect();
        SampleMatrix::new(names, columns)
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// The sub-matrix made of the first `k` columns.
    pub fn leading(&self, k: usize) -> SampleMatrix {
        SampleMatrix {
            names: self.names[..k].to_vec(),
            columns: self.columns[..k].to_vec(),
        }
    }
}

/// Membership of each row in an empirical quantile set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionMask {
    member: Vec<bool>,
    m: usize,
}

impl ConditionMask {
    pub fn from_members(member: Vec<bool>) -> Self {
        let m = member.iter().filter(|&&b| b).count();
        ConditionMask { member, m }
    }

    pub fn members(&self) -> &[bool] {
        &self.member
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.member.len()
    }

    /// Empirical probability of the quantile set, `m / n`.
    pub fn p_hat(&self) -> f64 {
        self.m as f64 / self.member.len() as f64
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn is_subset_of(&self, other: &ConditionMask) -> bool {
        self.member.len() == other.member.len()
            && self
                .member
                .iter()
                .zip(&other.member)
                .all(|(&a, &b)| !a || b)
    }
}

/// Ordinal ranks `1..=n`; ties are broken by original position.
pub fn ordinal_ranks(column: &[f64]) -> Result<Vec<usize>> {
    const OP: &str = "quantile::ordinal_ranks";
    if column.is_empty() {
        return Err(Error::domain(OP, "empty input"));
    }
    if let Some(v) = column.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(OP, format!("non-finite value {v}")));
    }
    Ok(ranks_unchecked(column))
}

pub(crate) fn ranks_unchecked(column: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..column.len()).collect();
    // sort_by is stable, so equal values keep index order
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
    let mut ranks = vec![0; column.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// The `⌈n·p⌉`-th order statistic.
pub fn empirical_quantile(column: &[f64], p: f64) -> Result<f64> {
    const OP: &str = "quantile::empirical_quantile";
    if column.is_empty() {
        return Err(Error::domain(OP, "empty input"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(
            OP,
            format!("probability must lie in (0, 1], got {p}"),
        ));
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ceil_rank(sorted.len(), p).clamp(1, sorted.len());
    Ok(sorted[k - 1])
}

/// Ranks of every column of a sample, computed once and reused for any
/// number of boxes.
#[derive(Debug, Clone)]
pub struct RankedSample {
    ranks: Vec<Vec<usize>>,
    n: usize,
}

impl RankedSample {
    pub fn new(sample: &SampleMatrix) -> Self {
        RankedSample {
            ranks: sample
                .columns()
                .iter()
                .map(|c| ranks_unchecked(c))
                .collect(),
            n: sample.n(),
        }
    }

    pub fn ranks(&self, j: usize) -> &[usize] {
        &self.ranks[j]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self, qbox: &QuantileBox) -> Result<ConditionMask> {
        if qbox.dim() != self.ranks.len() {
            return Err(Error::domain(
                "quantile::membership_mask",
                format!(
                    "box has {} splits but the sample has {} columns",
                    qbox.dim(),
                    self.ranks.len()
                ),
            ));
        }
        let windows: Vec<(usize, usize)> = qbox
            .splits()
            .iter()
            .map(|s| s.rank_window(self.n))
            .collect();
        let member = (0..self.n)
            .map(|i| {
                windows
                    .iter()
                    .zip(&self.ranks)
                    .all(|(&w, r)| QuantileSplit::contains_rank(w, r[i]))
            })
            .collect();
        Ok(ConditionMask::from_members(member))
    }
}

/// Rows whose every coordinate falls inside its split's rank window.
pub fn membership_mask(sample: &SampleMatrix, qbox: &QuantileBox) -> Result<ConditionMask> {
    if qbox.dim() != sample.d() {
        return Err(Error::domain(
            "quantile::membership_mask",
            format!(
                "box has {} splits but the sample has {} columns",
                qbox.dim(),
                sample.d()
            ),
        ));
    }
    RankedSample::new(sample).mask(qbox)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::RngStream;
    use proptest::prelude::*;

    fn split(p: f64, q: f64) -> QuantileSplit {
        QuantileSplit::new(p, q).unwrap()
    }

    #[test]
    fn split_validation() {
        assert!(QuantileSplit::new(0.0, 1.0).is_ok());
        assert!(QuantileSplit::new(0.5, 0.5).is_err());
        assert!(QuantileSplit::new(0.6, 0.5).is_err());
        assert!(QuantileSplit::new(-0.1, 0.5).is_err());
        assert!(QuantileSplit::new(0.1, 1.01).is_err());
        assert!(QuantileSplit::new(f64::NAN, 0.5).is_err());
        assert_eq!(
            "0.01,0.7".parse::<QuantileSplit>().unwrap(),
            split(0.01, 0.7)
        );
        assert!("0.1".parse::<QuantileSplit>().is_err());
    }

    #[test]
    fn ranks_examples() {
        assert_eq!(ordinal_ranks(&[3.1, 1.0, 2.5]).unwrap(), vec![3, 1, 2]);
        assert_eq!(ordinal_ranks(&[5.0, 5.0, 1.0]).unwrap(), vec![2, 3, 1]);
        let inc: Vec<f64> = (0..50).map(|i| i as f64 * 0.5).collect();
        assert_eq!(ordinal_ranks(&inc).unwrap(), (1..=50).collect::<Vec<_>>());
        assert!(ordinal_ranks(&[]).is_err());
        assert!(ordinal_ranks(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(empirical_quantile(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), 2.0);
        assert_eq!(empirical_quantile(&[4.0, 9.0, 3.0, 2.0], 1.0).unwrap(), 9.0);
        assert_eq!(empirical_quantile(&[10.0, 20.0, 30.0], 0.34).unwrap(), 20.0);
        assert!(empirical_quantile(&[1.0, 2.0], 0.0).is_err());
        assert!(empirical_quantile(&[1.0, 2.0], 1.2).is_err());
    }

    #[test]
    fn rank_window_snaps_products() {
        assert_eq!(split(0.2, 0.7).rank_window(10), (2, 7));
        assert_eq!(split(0.3, 0.9).rank_window(10), (3, 9));
        assert_eq!(split(0.0, 1.0).rank_window(7), (1, 7));
        assert_eq!(split(0.01, 0.7).rank_window(311), (4, 218));
    }

    #[test]
    fn mask_single_coordinate() {
        let col: Vec<f64> = vec![0.3, 0.9, 0.1, 0.5, 0.8, 0.2, 1.0, 0.6, 0.4, 0.7];
        let sample = SampleMatrix::from_columns(vec![col.clone()]).unwrap();
        let qbox = QuantileBox::new(vec![split(0.2, 0.7)]).unwrap();
        let mask = membership_mask(&sample, &qbox).unwrap();
        assert_eq!(mask.m(), 6);
        let ranks = ordinal_ranks(&col).unwrap();
        for (i, &member) in mask.members().iter().enumerate() {
            assert_eq!(member, (2..=7).contains(&ranks[i]));
        }
    }

    #[test]
    fn mask_full_range() {
        let sample =
            SampleMatrix::from_columns(vec![vec![1.0, 5.0, 2.0], vec![0.0, -1.0, 3.0]]).unwrap();
        let mask = membership_mask(
            &sample,
            &QuantileBox::uniform(QuantileSplit::FULL, 2).unwrap(),
        )
        .unwrap();
        assert_eq!(mask.m(), 3);
        assert_eq!(mask.p_hat(), 1.0);
    }

    #[test]
    fn mask_dimension_mismatch() {
        let sample = SampleMatrix::from_columns(vec![vec![1.0, 2.0]]).unwrap();
        let qbox = QuantileBox::uniform(QuantileSplit::FULL, 2).unwrap();
        assert!(matches!(
            membership_mask(&sample, &qbox),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn mask_independent_uniforms() {
        let mut s = RngStream::new(11, 0);
        let a: Vec<f64> = (0..1000).map(|_| s.uniform()).collect();
        let b: Vec<f64> = (0..1000).map(|_| s.uniform()).collect();
        let sample = SampleMatrix::from_columns(vec![a, b]).unwrap();
        let qbox = QuantileBox::uniform(split(0.2, 0.8), 2).unwrap();
        let p_hat = membership_mask(&sample, &qbox).unwrap().p_hat();
        assert!((p_hat - 0.36).abs() <= 0.06, "p_hat {p_hat}");
    }

    #[test]
    fn sample_matrix_validation() {
        assert!(SampleMatrix::from_columns(vec![]).is_err());
        assert!(SampleMatrix::from_columns(vec![vec![]]).is_err());
        assert!(SampleMatrix::from_columns(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(SampleMatrix::from_columns(vec![vec![1.0, f64::INFINITY]]).is_err());
    }

    proptest! {
        #[test]
        fn ranks_are_permutation(v in prop::collection::vec(-1e6f64..1e6, 1..200)) {
            let mut r = ordinal_ranks(&v).unwrap();
            r.sort_unstable();
            prop_assert_eq!(r, (1..=v.len()).collect::<Vec<_>>());
        }

        #[test]
        fn mask_invariant_under_increasing_maps(
            a in prop::collection::vec(-5.0f64..5.0, 5..120),
            seed in 0u64..1000,
            p in 0.0f64..0.5,
            width in 0.05f64..0.5,
        ) {
            let mut s = RngStream::new(seed, 0);
            let b: Vec<f64> = a.iter().map(|_| s.normal()).collect();
            let qbox = QuantileBox::new(vec![split(p, p + width), split(p / 2.0, 1.0)]).unwrap();
            let base = membership_mask(&SampleMatrix::from_columns(vec![a.clone(), b.clone()]).unwrap(), &qbox).unwrap();
            let ta: Vec<f64> = a.iter().map(|x| x.exp()).collect();
            let tb: Vec<f64> = b.iter().map(|x| x * x * x + 2.0 * x).collect();
            let moved = membership_mask(&SampleMatrix::from_columns(vec![ta, tb]).unwrap(), &qbox).unwrap();
            prop_assert_eq!(base, moved);
        }

        #[test]
        fn nested_boxes_nest_masks(
            seed in 0u64..1000,
            n in 10usize..300,
            p in 0.0f64..0.4,
            q in 0.6f64..1.0,
            shrink in 0.0f64..0.1,
        ) {
            let mut s = RngStream::new(seed, 1);
            let a: Vec<f64> = (0..n).map(|_| s.normal()).collect();
            let b: Vec<f64> = (0..n).map(|_| s.normal()).collect();
            let sample = SampleMatrix::from_columns(vec![a, b]).unwrap();
            let outer = QuantileBox::uniform(split(p, q), 2).unwrap();
            let inner = QuantileBox::uniform(split(p + shrink, q - shrink), 2).unwrap();
            let ranked = RankedSample::new(&sample);
            prop_assert!(ranked.mask(&inner).unwrap().is_subset_of(&ranked.mask(&outer).unwrap()));
        }

        #[test]
        fn marginal_p_hat_close_to_width(
            seed in 0u64..1000,
            n in 5usize..500,
            p in 0.0f64..0.9,
            width in 0.01f64..0.1,
        ) {
            let q = (p + width).min(1.0);
            let mut s = RngStream::new(seed, 2);
            let a: Vec<f64> = (0..n).map(|_| s.normal()).collect();
            let sample = SampleMatrix::from_columns(vec![a]).unwrap();
            let mask = membership_mask(&sample, &QuantileBox::new(vec![split(p, q)]).unwrap()).unwrap();
            prop_assert!((mask.p_hat() - (q - p)).abs() <= 2.0 / n as f64);
        }
    }
}
