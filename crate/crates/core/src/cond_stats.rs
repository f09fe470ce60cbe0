//! Conditional moments on quantile sets.
//!
//! All moments are plug-in (divide by the member count `m`). The conditional
//! Spearman coefficient is the Pearson correlation of the global
//! pseudo-observations `R/(n+1)` restricted to the members; re-ranking inside
//! the set is available through [`SpearmanMode::WithinMask`].

use rayon::prelude::*;

use crate::quantile::{ranks_unchecked, QuantileBox, QuantileSplit, RankedSample};
use crate::special_fn::{derive_stream_id, RngStream};
use crate::{Error, Result, SampleMatrix};

/// Variances at or below this are treated as zero.
pub const DEGENERATE_VARIANCE: f64 = 1e-24;

/// Minimum number of members for a conditional moment.
pub const MIN_MEMBERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpearmanMode {
    /// Ranks over the whole sample, scaled to `R/(n+1)`.
    #[default]
    GlobalRanks,
    /// Ranks recomputed among the members only.
    WithinMask,
}

/// Conditional moments of a pair on one quantile set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondMoments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov: f64,
    pub corr: f64,
    pub spearman: f64,
    pub m: usize,
    pub p_hat: f64,
}

/// A ranked coordinate: values, their ordinal ranks, and the sample size
/// the ranks refer to (the rank window is computed against that size).
#[derive(Debug, Clone, Copy)]
pub(crate) struct RankedView<'a> {
    pub values: &'a [f64],
    pub ranks: &'a [usize],
    pub n_ranked: usize,
}

fn check_pair(op: &'static str, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::domain(
            op,
            format!("length mismatch: {} vs {}", x.len(), y.len()),
        ));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::domain(op, format!("non-finite value {v}")));
    }
    if x.len() < MIN_MEMBERS {
        return Err(Error::InsufficientData {
            op,
            m: x.len(),
            need: MIN_MEMBERS,
        });
    }
    Ok(())
}

/// Conditional moments of `(x, y)` on the quantile set of
/// `split_x × split_y`.
pub fn cond_moments(
    x: &[f64],
    y: &[f64],
    split_x: QuantileSplit,
    split_y: QuantileSplit,
) -> Result<CondMoments> {
    cond_moments_with(x, y, split_x, split_y, SpearmanMode::GlobalRanks)
}

pub fn cond_moments_with(
    x: &[f64],
    y: &[f64],
    split_x: QuantileSplit,
    split_y: QuantileSplit,
    mode: SpearmanMode,
) -> Result<CondMoments> {
    const OP: &str = "cond_stats::cond_moments";
    check_pair(OP, x, y)?;
    let rx = ranks_unchecked(x);
    let ry = ranks_unchecked(y);
    let n = x.len();
    moments_on_windows(
        OP,
        RankedView {
            values: x,
            ranks: &rx,
            n_ranked: n,
        },
        RankedView {
            values: y,
            ranks: &ry,
            n_ranked: n,
        },
        split_x,
        split_y,
        mode,
    )
}

pub(crate) fn moments_on_windows(
    op: &'static str,
    x: RankedView<'_>,
    y: RankedView<'_>,
    split_x: QuantileSplit,
    split_y: QuantileSplit,
    mode: SpearmanMode,
) -> Result<CondMoments> {
    let wx = split_x.rank_window(x.n_ranked);
    let wy = split_y.rank_window(y.n_ranked);
    let members: Vec<usize> = (0..x.values.len())
        .filter(|&i| {
            QuantileSplit::contains_rank(wx, x.ranks[i])
                && QuantileSplit::contains_rank(wy, y.ranks[i])
        })
        .collect();
    moments_on_members(op, x, y, &members, mode)
}

pub(crate) fn moments_on_members(
    op: &'static str,
    x: RankedView<'_>,
    y: RankedView<'_>,
    members: &[usize],
    mode: SpearmanMode,
) -> Result<CondMoments> {
    let m = members.len();
    if m < MIN_MEMBERS {
        return Err(Error::InsufficientData {
            op,
            m,
            need: MIN_MEMBERS,
        });
    }
    let (mean_x, mean_y, var_x, var_y, cov) =
        plug_in(members.iter().map(|&i| (x.values[i], y.values[i])), m);
    if var_x <= DEGENERATE_VARIANCE {
        return Err(Error::DegenerateVariance { op, column: 0 });
    }
    if var_y <= DEGENERATE_VARIANCE {
        return Err(Error::DegenerateVariance { op, column: 1 });
    }
    let corr = ratio(cov, var_x, var_y);

    let spearman = match mode {
        SpearmanMode::GlobalRanks => {
            let sx = (x.n_ranked + 1) as f64;
            let sy = (y.n_ranked + 1) as f64;
            let (_, _, vu, vv, c) = plug_in(
                members
                    .iter()
                    .map(|&i| (x.ranks[i] as f64 / sx, y.ranks[i] as f64 / sy)),
                m,
            );
            ratio(c, vu, vv)
        }
        SpearmanMode::WithinMask => {
            let xs: Vec<f64> = members.iter().map(|&i| x.values[i]).collect();
            let ys: Vec<f64> = members.iter().map(|&i| y.values[i]).collect();
            let scale = (m + 1) as f64;
            let ru = ranks_unchecked(&xs);
            let rv = ranks_unchecked(&ys);
            let (_, _, vu, vv, c) = plug_in(
                ru.iter()
                    .zip(&rv)
                    .map(|(&a, &b)| (a as f64 / scale, b as f64 / scale)),
                m,
            );
            ratio(c, vu, vv)
        }
    };

    Ok(CondMoments {
        mean_x,
        mean_y,
        var_x,
        var_y,
        cov,
        corr,
        spearman,
        m,
        p_hat: m as f64 / x.values.len() as f64,
    })
}

/// Two-pass plug-in means, variances and covariance, summed in index order.
fn plug_in<I>(pairs: I, m: usize) -> (f64, f64, f64, f64, f64)
where
    I: Iterator<Item = (f64, f64)> + Clone,
{
    let mf = m as f64;
    let (sx, sy) = pairs
        .clone()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / mf, sy / mf);
    let (vx, vy, c) = pairs.fold((0.0, 0.0, 0.0), |(vx, vy, c), (x, y)| {
        let (dx, dy) = (x - mx, y - my);
        (vx + dx * dx, vy + dy * dy, c + dx * dy)
    });
    (mx, my, vx / mf, vy / mf, c / mf)
}

fn ratio(cov: f64, var_x: f64, var_y: f64) -> f64 {
    (cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0)
}

/// Unconditional plug-in Pearson correlation. Uses the same arithmetic as
/// [`cond_moments`], so the full-range split reproduces it bit for bit.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    const OP: &str = "cond_stats::pearson";
    check_pair(OP, x, y)?;
    let (_, _, vx, vy, c) = plug_in(x.iter().copied().zip(y.iter().copied()), x.len());
    if vx <= DEGENERATE_VARIANCE {
        return Err(Error::DegenerateVariance { op: OP, column: 0 });
    }
    if vy <= DEGENERATE_VARIANCE {
        return Err(Error::DegenerateVariance { op: OP, column: 1 });
    }
    Ok(ratio(c, vx, vy))
}

/// Conditional correlation matrix on the joint quantile set of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct CondCorrMatrix {
    entries: Vec<Vec<f64>>,
    qbox: QuantileBox,
    m: usize,
}

impl CondCorrMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn qbox(&self) -> &QuantileBox {
        &self.qbox
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.entries[i][j].abs())
            .fold(0.0, f64::max)
    }
}

pub fn cond_corr_matrix(sample: &SampleMatrix, qbox: &QuantileBox) -> Result<CondCorrMatrix> {
    const OP: &str = "cond_stats::cond_corr_matrix";
    let d = sample.d();
    if d < 2 {
        return Err(Error::domain(OP, "need at least two columns"));
    }
    let mask = RankedSample::new(sample).mask(qbox)?;
    let m = mask.m();
    if m < d + 1 {
        return Err(Error::InsufficientData {
            op: OP,
            m,
            need: d + 1,
        });
    }
    let members: Vec<usize> = mask.indices().collect();
    let mf = m as f64;

    let centered: Vec<Vec<f64>> = sample
        .columns()
        .iter()
        .map(|col| {
            let mean = members.iter().map(|&i| col[i]).sum::<f64>() / mf;
            members.iter().map(|&i| col[i] - mean).collect()
        })
        .collect();
    let vars: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / mf)
        .collect();
    if let Some(column) = vars.iter().position(|&v| v <= DEGENERATE_VARIANCE) {
        return Err(Error::DegenerateVariance { op: OP, column });
    }

    let mut entries = vec![vec![0.0; d]; d];
    for i in 0..d {
        entries[i][i] = 1.0;
        for j in i + 1..d {
            let cov = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / mf;
            let r = ratio(cov, vars[i], vars[j]);
            entries[i][j] = r;
            entries[j][i] = r;
        }
    }
    Ok(CondCorrMatrix {
        entries,
        qbox: qbox.clone(),
        m,
    })
}

fn project(sample: &SampleMatrix, dir: &[f64]) -> Vec<f64> {
    (0..sample.n())
        .map(|i| {
            sample
                .columns()
                .iter()
                .zip(dir)
                .map(|(c, a)| c[i] * a)
                .sum()
        })
        .collect()
}

fn check_direction(op: &'static str, sample: &SampleMatrix, dir: &[f64], name: &str) -> Result<()> {
    if dir.len() != sample.d() {
        return Err(Error::domain(
            op,
            format!(
                "{name} has {} entries for {} columns",
                dir.len(),
                sample.d()
            ),
        ));
    }
    if dir.iter().any(|v| !v.is_finite()) || dir.iter().all(|&v| v == 0.0) {
        return Err(Error::domain(
            op,
            format!("{name} must be a finite nonzero vector"),
        ));
    }
    Ok(())
}

/// Conditional moments of the projections `⟨x_i, alpha⟩` and `⟨y_i, beta⟩`.
pub fn projection_cond_corr(
    xs: &SampleMatrix,
    ys: &SampleMatrix,
    alpha: &[f64],
    beta: &[f64],
    split_x: QuantileSplit,
    split_y: QuantileSplit,
) -> Result<CondMoments> {
    const OP: &str = "cond_stats::projection_cond_corr";
    if xs.n() != ys.n() {
        return Err(Error::domain(
            OP,
            format!("row counts differ: {} vs {}", xs.n(), ys.n()),
        ));
    }
    check_direction(OP, xs, alpha, "alpha")?;
    check_direction(OP, ys, beta, "beta")?;
    cond_moments(&project(xs, alpha), &project(ys, beta), split_x, split_y)
}

/// Uniform direction on the unit sphere of R^dim (normalised normal vector).
pub fn random_direction(stream: &mut RngStream, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| stream.normal()).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// One probed pair of directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub moments: CondMoments,
}

/// Evaluates [`projection_cond_corr`] along `count` seeded random direction
/// pairs. Direction `j` comes from its own stream, so the result does not
/// depend on scheduling.
pub fn projection_probe(
    xs: &SampleMatrix,
    ys: &SampleMatrix,
    count: usize,
    split_x: QuantileSplit,
    split_y: QuantileSplit,
    seed: u64,
) -> Result<Vec<ProbeRecord>> {
    if count == 0 {
        return Err(Error::domain(
            "cond_stats::projection_probe",
            "need at least one direction",
        ));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|j| {
            let mut s = RngStream::new(seed, derive_stream_id(&[0x5052_4f4a, j]));
            let alpha = random_direction(&mut s, xs.d());
            let beta = random_direction(&mut s, ys.d());
            let moments = projection_cond_corr(xs, ys, &alpha, &beta, split_x, split_y)?;
            Ok(ProbeRecord {
                alpha,
                beta,
                moments,
            })
        })
        .collect()
}

/// Per-level outcome of [`recursive_independence_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    /// Number of leading coordinates projected (`1..d`).
    pub level: usize,
    pub max_abs_corr: f64,
    /// Direction in R^level attaining `max_abs_corr`.
    pub direction: Vec<f64>,
}

/// For each `k = 1..d−1`, probes conditional correlation between column
/// `k+1` and `⟨X^{1:k}, α⟩` over `directions_per_level` seeded unit
/// directions `α`, using `split` on both coordinates.
pub fn recursive_independence_probe(
    sample: &SampleMatrix,
    directions_per_level: usize,
    split: QuantileSplit,
    seed: u64,
) -> Result<Vec<LevelReport>> {
    const OP: &str = "cond_stats::recursive_independence_probe";
    let d = sample.d();
    if d < 2 {
        return Err(Error::domain(OP, "need at least two columns"));
    }
    if directions_per_level == 0 {
        return Err(Error::domain(OP, "need at least one direction per level"));
    }
    (1..d)
        .map(|k| {
            let head = sample.leading(k);
            let next = SampleMatrix::new(
                vec![sample.names()[k].clone()],
                vec![sample.column(k).to_vec()],
            )?;
            let results: Vec<(Vec<f64>, f64)> = (0..directions_per_level as u64)
                .into_par_iter()
                .map(|j| {
                    let mut s = RngStream::new(seed, derive_stream_id(&[k as u64, j]));
                    let alpha = random_direction(&mut s, k);
                    let mo = projection_cond_corr(&head, &next, &alpha, &[1.0], split, split)?;
                    Ok((alpha, mo.corr.abs()))
                })
                .collect::<Result<_>>()?;
            // first maximum in direction order
            let (direction, max_abs_corr) = results
                .into_iter()
                .reduce(|best, cur| if cur.1 > best.1 { cur } else { best })
                .expect("at least one direction");
            Ok(LevelReport {
                level: k,
                max_abs_corr,
                direction,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn split(p: f64, q: f64) -> QuantileSplit {
        QuantileSplit::new(p, q).unwrap()
    }

    fn normals(seed: u64, stream: u64, n: usize) -> Vec<f64> {
        crate::special_fn::standard_normal_sample(&RngStream::new(seed, stream), n)
    }

    #[test]
    fn identity_pair() {
        let x = [1.0, 2.0, 3.0];
        let mo = cond_moments(&x, &x, QuantileSplit::FULL, QuantileSplit::FULL).unwrap();
        assert!((mo.cov - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(mo.corr, 1.0);
        assert!((mo.spearman - 1.0).abs() < 1e-15);
        assert_eq!(mo.m, 3);
        assert_eq!(mo.p_hat, 1.0);
    }

    #[test]
    fn antisymmetric_pair() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let mo = cond_moments(&x, &y, QuantileSplit::FULL, QuantileSplit::FULL).unwrap();
        assert!((mo.corr + 1.0).abs() < 1e-15);
        assert!((mo.spearman + 1.0).abs() < 1e-15);
    }

    #[test]
    fn error_paths() {
        let x = [1.0, 2.0];
        assert!(matches!(
            cond_moments(&x, &x, QuantileSplit::FULL, QuantileSplit::FULL),
            Err(Error::InsufficientData { .. })
        ));
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(matches!(
            cond_moments(&x, &x, split(0.0, 0.1), QuantileSplit::FULL),
            Err(Error::InsufficientData { m: 2, .. })
        ));
        let c = vec![1.0; 20];
        assert!(matches!(
            cond_moments(&x, &c, QuantileSplit::FULL, QuantileSplit::FULL),
            Err(Error::DegenerateVariance { column: 1, .. })
        ));
        assert!(cond_moments(&x, &x[..10], QuantileSplit::FULL, QuantileSplit::FULL).is_err());
    }

    #[test]
    fn full_range_is_pearson() {
        let x = normals(5, 0, 500);
        let y: Vec<f64> = normals(5, 1, 500)
            .iter()
            .zip(&x)
            .map(|(a, b)| a + 0.3 * b)
            .collect();
        let mo = cond_moments(&x, &y, QuantileSplit::FULL, QuantileSplit::FULL).unwrap();
        assert_eq!(mo.corr, pearson(&x, &y).unwrap());
    }

    #[test]
    fn within_mask_spearman_is_rank_based() {
        let x = normals(9, 0, 400);
        let y = normals(9, 1, 400);
        let a = cond_moments_with(
            &x,
            &y,
            split(0.1, 0.9),
            split(0.1, 0.9),
            SpearmanMode::WithinMask,
        )
        .unwrap();
        let b = cond_moments(&x, &y, split(0.1, 0.9), split(0.1, 0.9)).unwrap();
        assert_eq!(a.corr, b.corr);
        assert!(a.spearman.abs() <= 1.0);
        let tx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let c = cond_moments_with(
            &tx,
            &y,
            split(0.1, 0.9),
            split(0.1, 0.9),
            SpearmanMode::WithinMask,
        )
        .unwrap();
        assert_eq!(a.spearman, c.spearman);
    }

    #[test]
    fn matrix_on_independent_normals() {
        let cols: Vec<Vec<f64>> = (0..3).map(|j| normals(77, j, 50_000)).collect();
        let sample = SampleMatrix::from_columns(cols).unwrap();
        let qbox = QuantileBox::uniform(split(0.1, 0.9), 3).unwrap();
        let mat = cond_corr_matrix(&sample, &qbox).unwrap();
        assert!(mat.max_off_diagonal() < 0.03, "{:?}", mat.entries());
        for i in 0..3 {
            assert_eq!(mat.get(i, i), 1.0);
            for j in 0..3 {
                assert_eq!(mat.get(i, j), mat.get(j, i));
            }
        }
    }

    #[test]
    fn matrix_comonotone_pair() {
        let x = normals(3, 0, 300);
        let sample = SampleMatrix::from_columns(vec![x.clone(), x]).unwrap();
        let mat =
            cond_corr_matrix(&sample, &QuantileBox::uniform(split(0.2, 0.9), 2).unwrap()).unwrap();
        assert!((mat.get(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_errors() {
        let x = normals(3, 0, 30);
        let single = SampleMatrix::from_columns(vec![x.clone()]).unwrap();
        assert!(cond_corr_matrix(
            &single,
            &QuantileBox::uniform(QuantileSplit::FULL, 1).unwrap()
        )
        .is_err());
        let with_const = SampleMatrix::from_columns(vec![x.clone(), vec![2.0; 30]]).unwrap();
        assert!(matches!(
            cond_corr_matrix(
                &with_const,
                &QuantileBox::uniform(QuantileSplit::FULL, 2).unwrap()
            ),
            Err(Error::DegenerateVariance { column: 1, .. })
        ));
        let pair = SampleMatrix::from_columns(vec![x.clone(), x]).unwrap();
        assert!(matches!(
            cond_corr_matrix(&pair, &QuantileBox::uniform(split(0.0, 0.05), 2).unwrap()),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn projection_unit_vectors_reduce() {
        let xs = SampleMatrix::from_columns(vec![normals(1, 0, 400), normals(1, 1, 400)]).unwrap();
        let ys = SampleMatrix::from_columns(vec![normals(1, 2, 400), normals(1, 3, 400)]).unwrap();
        let s = split(0.2, 0.8);
        let proj = projection_cond_corr(&xs, &ys, &[1.0, 0.0], &[1.0, 0.0], s, s).unwrap();
        let direct = cond_moments(xs.column(0), ys.column(0), s, s).unwrap();
        assert_eq!(proj, direct);

        let a = projection_cond_corr(&xs, &ys, &[0.3, -0.7], &[0.6, 0.2], s, s).unwrap();
        let b = projection_cond_corr(&xs, &ys, &[0.6, -1.4], &[0.6, 0.2], s, s).unwrap();
        assert_eq!(a.corr, b.corr);
        assert_eq!(a.spearman, b.spearman);

        assert!(projection_cond_corr(&xs, &ys, &[0.0, 0.0], &[1.0, 0.0], s, s).is_err());
        assert!(projection_cond_corr(&xs, &ys, &[1.0], &[1.0, 0.0], s, s).is_err());
    }

    #[test]
    fn projection_probe_under_independence() {
        let n = 50_000;
        let xs = SampleMatrix::from_columns(vec![normals(8, 0, n), normals(8, 1, n)]).unwrap();
        let ys = SampleMatrix::from_columns(vec![normals(8, 2, n), normals(8, 3, n)]).unwrap();
        let s = split(0.2, 0.8);
        let records = projection_probe(&xs, &ys, 20, s, s, 99).unwrap();
        assert_eq!(records.len(), 20);
        let max = records
            .iter()
            .map(|r| r.moments.corr.abs())
            .fold(0.0, f64::max);
        assert!(max < 0.04, "max {max}");
        assert_eq!(records, projection_probe(&xs, &ys, 20, s, s, 99).unwrap());
    }

    #[test]
    fn recursive_probe_null() {
        let cols: Vec<Vec<f64>> = (0..3).map(|j| normals(21, j, 50_000)).collect();
        let sample = SampleMatrix::from_columns(cols).unwrap();
        let report = recursive_independence_probe(&sample, 10, split(0.1, 0.9), 4).unwrap();
        assert_eq!(report.len(), 2);
        for (k, level) in report.iter().enumerate() {
            assert_eq!(level.level, k + 1);
            assert_eq!(level.direction.len(), k + 1);
            assert!(level.max_abs_corr < 0.04, "{level:?}");
        }
        assert_eq!(
            report,
            recursive_independence_probe(&sample, 10, split(0.1, 0.9), 4).unwrap()
        );
    }

    #[test]
    fn recursive_probe_comonotone() {
        let x = normals(2, 0, 2000);
        let sample = SampleMatrix::from_columns(vec![x.clone(), x]).unwrap();
        let report = recursive_independence_probe(&sample, 3, split(0.1, 0.9), 1).unwrap();
        assert!(report[0].max_abs_corr > 0.9);
        assert_eq!(report[0].direction.len(), 1);
        assert!((report[0].direction[0].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn independent_data_has_small_conditional_corr() {
        let x = normals(404, 0, 100_000);
        let y = normals(404, 1, 100_000);
        let mo = cond_moments(&x, &y, split(0.2, 0.8), split(0.2, 0.8)).unwrap();
        assert!(mo.corr.abs() < 0.02, "{}", mo.corr);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn swap_symmetry_and_bounds(
            seed in 0u64..10_000,
            n in 20usize..400,
            p1 in 0.0f64..0.4, w1 in 0.3f64..0.6,
            p2 in 0.0f64..0.4, w2 in 0.3f64..0.6,
            rho in -0.95f64..0.95,
        ) {
            let x = normals(seed, 0, n);
            let y: Vec<f64> = normals(seed, 1, n).iter().zip(&x)
                .map(|(e, a)| rho * a + (1.0 - rho * rho).sqrt() * e).collect();
            let (sx, sy) = (split(p1, p1 + w1), split(p2, p2 + w2));
            if let Ok(a) = cond_moments(&x, &y, sx, sy) {
                let b = cond_moments(&y, &x, sy, sx).unwrap();
                prop_assert_eq!(a.cov, b.cov);
                prop_assert!(a.corr.abs() <= 1.0 + 1e-12);
                prop_assert!(a.spearman.abs() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn affine_and_monotone_invariance(
            seed in 0u64..10_000,
            n in 20usize..400,
            p in 0.0f64..0.4,
            w in 0.3f64..0.6,
            scale_exp in -4i32..5,
            a in 0.1f64..10.0,
            b in -5.0f64..5.0,
        ) {
            let x = normals(seed, 0, n);
            let y: Vec<f64> = normals(seed, 1, n).iter().zip(&x).map(|(e, v)| e + v * v).collect();
            let s = split(p, p + w);
            let base = cond_moments(&x, &y, s, s).unwrap();

            // power-of-two scaling is exact in floating point
            let k = 2f64.powi(scale_exp);
            let scaled: Vec<f64> = x.iter().map(|v| k * v).collect();
            let sm = cond_moments(&scaled, &y, s, s).unwrap();
            prop_assert_eq!(sm.m, base.m);
            prop_assert_eq!(sm.corr, base.corr);
            prop_assert_eq!(sm.spearman, base.spearman);
            prop_assert_eq!(sm.cov, k * base.cov);

            // general affine map: same members and ranks, corr up to rounding
            let moved: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let am = cond_moments(&moved, &y, s, s).unwrap();
            prop_assert_eq!(am.m, base.m);
            prop_assert_eq!(am.spearman, base.spearman);
            prop_assert!((am.corr - base.corr).abs() < 1e-12);
            prop_assert!((am.cov - a * base.cov).abs() < 1e-12 * a.max(1.0));

            let bent: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let bm = cond_moments(&bent, &y, s, s).unwrap();
            prop_assert_eq!(bm.m, base.m);
            prop_assert_eq!(bm.spearman, base.spearman);
        }
    }
}
