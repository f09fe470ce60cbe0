use std::fs;
use std::io::Write;
use std::path::Path;

use qcorr::analytic::normal_product_cov;
use qcorr::cond_stats::{
    cond_corr_matrix, cond_moments_with, projection_cond_corr, projection_probe,
    recursive_independence_probe, CondMoments, SpearmanMode,
};
use qcorr::inference::{
    analytic_scan, mc_null, scan_splits, test_statistic, McNullSpec, Pairing, ScanGrid, ScanSpec,
};
use qcorr::synth::{generate, Family, GeneratorSpec};
use qcorr::timeseries::{cond_acf, lag_pairs, lag_plot, AcfOptions, PairRanking, Series};
use qcorr::{QuantileBox, QuantileSplit, SampleMatrix};

use crate::args::*;
use crate::error::{CliError, Result};
use crate::ingest::{ingest_csv, Ingested};
use crate::output::{Format, Table, Value};

/// Executes one parsed command line, writing to `--output` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let (table, default_format) = match &cli.command {
        Command::Ccor(a) => (ccor(a, stderr)?, Format::JsonLines),
        Command::Cmatrix(a) => (cmatrix(a, stderr)?, Format::Csv),
        Command::Cacf(a) => (cacf(a, cli.format, stderr)?, Format::Csv),
        Command::Scan(a) => (scan(a, stderr)?, Format::Csv),
        Command::AnalyticDemo(a) => (analytic_demo(a)?, Format::Csv),
        Command::McTest(a) => (mc_test(a, cli.seed, stderr)?, Format::JsonLines),
        Command::Simulate(a) => (simulate(a, cli.seed)?, Format::Csv),
        Command::Project(a) => (project(a, cli.seed, stderr)?, Format::JsonLines),
        Command::Recursive(a) => (recursive(a, cli.seed, stderr)?, Format::JsonLines),
    };
    let bytes = table.render(cli.format.unwrap_or(default_format));
    match &cli.output {
        Some(path) => write_file(path, &bytes),
        None => stdout
            .write_all(&bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn load(path: &Path, cols: &[String], stderr: &mut dyn Write) -> Result<SampleMatrix> {
    let Ingested { sample, dropped } = ingest_csv(path, cols)?;
    if dropped > 0 {
        let _ = writeln!(
            stderr,
            "warning: dropped {dropped} row(s) with missing or non-numeric values"
        );
    }
    Ok(sample)
}

fn need_columns(sample: &SampleMatrix, want: usize, command: &str) -> Result<()> {
    if sample.d() != want {
        return Err(CliError::Usage(format!(
            "{command} needs exactly {want} column(s), got {} ({}); select them with --cols",
            sample.d(),
            sample.names().join(", ")
        )));
    }
    Ok(())
}

fn split_pair(values: &[f64]) -> Result<(QuantileSplit, QuantileSplit)> {
    Ok((
        QuantileSplit::new(values[0], values[1])?,
        QuantileSplit::new(values[2], values[3])?,
    ))
}

fn four_splits(split: &Option<Vec<f64>>) -> Result<(QuantileSplit, QuantileSplit)> {
    match split {
        Some(v) => split_pair(v),
        None => Ok((QuantileSplit::FULL, QuantileSplit::FULL)),
    }
}

fn moment_columns() -> Vec<&'static str> {
    vec![
        "m", "n", "p_hat", "mean_x", "mean_y", "var_x", "var_y", "cov", "corr", "spearman",
    ]
}

fn moment_values(m: &CondMoments, n: usize) -> Vec<Value> {
    vec![
        m.m.into(),
        n.into(),
        m.p_hat.into(),
        m.mean_x.into(),
        m.mean_y.into(),
        m.var_x.into(),
        m.var_y.into(),
        m.cov.into(),
        m.corr.into(),
        m.spearman.into(),
    ]
}

fn split_values(sx: QuantileSplit, sy: QuantileSplit) -> Vec<Value> {
    vec![
        sx.lower().into(),
        sx.upper().into(),
        sy.lower().into(),
        sy.upper().into(),
    ]
}

fn ccor(a: &CcorArgs, stderr: &mut dyn Write) -> Result<Table> {
    let sample = load(&a.input.input, &a.input.cols, stderr)?;
    need_columns(&sample, 2, "ccor")?;
    let (sx, sy) = four_splits(&a.split)?;
    let mode = match a.spearman {
        SpearmanArg::Global => SpearmanMode::GlobalRanks,
        SpearmanArg::Within => SpearmanMode::WithinMask,
    };
    let m = cond_moments_with(sample.column(0), sample.column(1), sx, sy, mode)?;
    let mut cols = vec!["col_x", "col_y", "p1", "q1", "p2", "q2"];
    cols.extend(moment_columns());
    let mut table = Table::new(cols);
    let mut row: Vec<Value> = vec![
        sample.names()[0].as_str().into(),
        sample.names()[1].as_str().into(),
    ];
    row.extend(split_values(sx, sy));
    row.extend(moment_values(&m, sample.n()));
    table.push(row);
    Ok(table)
}

fn cmatrix(a: &CmatrixArgs, stderr: &mut dyn Write) -> Result<Table> {
    let sample = load(&a.input.input, &a.input.cols, stderr)?;
    let d = sample.d();
    let splits = match &a.split {
        None => vec![QuantileSplit::FULL; d],
        Some(v) if v.len() == 2 => vec![QuantileSplit::new(v[0], v[1])?; d],
        Some(v) if v.len() == 2 * d => v
            .chunks(2)
            .map(|c| QuantileSplit::new(c[0], c[1]))
            .collect::<qcorr::Result<_>>()?,
        Some(v) => {
            return Err(CliError::Usage(format!(
                "--split takes 2 or {} values for {d} columns, got {}",
                2 * d,
                v.len()
            )))
        }
    };
    let mat = cond_corr_matrix(&sample, &QuantileBox::new(splits)?)?;
    let mut table = Table::new(["row", "col", "corr", "m"]);
    for i in 0..d {
        for j in 0..d {
            table.push(vec![
                sample.names()[i].as_str().into(),
                sample.names()[j].as_str().into(),
                mat.get(i, j).into(),
                mat.m().into(),
            ]);
        }
    }
    Ok(table)
}

fn cacf(a: &CacfArgs, format: Option<Format>, stderr: &mut dyn Write) -> Result<Table> {
    let sample = load(&a.input.input, &a.input.cols, stderr)?;
    need_columns(&sample, 1, "cacf")?;
    let (sx, sy) = four_splits(&a.split)?;
    let options = AcfOptions {
        split_current: sx,
        split_lagged: sy,
        transform: a.transform,
        ranking: match a.ranking {
            RankingArg::Pair => PairRanking::PairCoordinates,
            RankingArg::Whole => PairRanking::WholeSeries,
        },
    };
    let series = Series::new(sample.column(0).to_vec())?;
    let acf = cond_acf(&series, a.lags, options)?;
    let mut cols = vec!["lag", "valid"];
    cols.extend(moment_columns());
    cols.push("note");
    let mut table = Table::new(cols);
    for rec in &acf.records {
        let pairs = lag_pairs(series.values(), rec.lag)?.0.len();
        let mut row: Vec<Value> = vec![rec.lag.into(), rec.result.is_ok().into()];
        match &rec.result {
            Ok(m) => {
                row.extend(moment_values(m, pairs));
                row.push(Value::Missing);
            }
            Err(e) => {
                row.push(Value::Missing);
                row.push(pairs.into());
                row.extend(std::iter::repeat_n(Value::Missing, 8));
                row.push(e.to_string().as_str().into());
            }
        }
        table.push(row);
    }

    if let Some(path) = &a.pairs_output {
        let mut pairs = Table::new(["lag", "t", "current", "lagged", "member"]);
        for k in 1..=a.lags {
            for p in lag_plot(&series, k, options)? {
                pairs.push(vec![
                    k.into(),
                    p.t.into(),
                    p.current.into(),
                    p.lagged.into(),
                    p.member.into(),
                ]);
            }
        }
        write_file(path, &pairs.render(format.unwrap_or(Format::Csv)))?;
    }
    Ok(table)
}

fn grid_table(grid: &ScanGrid, panel: Option<&str>) -> Table {
    let mut cols = vec!["p1", "q1", "p2", "q2", "value", "valid", "m"];
    if panel.is_some() {
        cols.insert(0, "panel");
    }
    let mut table = Table::new(cols);
    for c in &grid.cells {
        let mut row: Vec<Value> = Vec::with_capacity(8);
        if let Some(p) = panel {
            row.push(p.into());
        }
        row.extend([
            c.p1.into(),
            c.q1.into(),
            c.p2.into(),
            c.q2.into(),
            c.value.into(),
            c.is_valid().into(),
            c.m.into(),
        ]);
        table.push(row);
    }
    table
}

fn scan(a: &ScanArgs, stderr: &mut dyn Write) -> Result<Table> {
    let sample = load(&a.input.input, &a.input.cols, stderr)?;
    need_columns(&sample, 2, "scan")?;
    let spec = a.grid.parse::<ScanSpec>()?.with_statistic(a.statistic);
    let grid = scan_splits(sample.column(0), sample.column(1), &spec)?;
    let _ = match grid.max_abs_cell() {
        Some(c) => writeln!(
            stderr,
            "{} valid of {} cells; max |{}| = {} at ({}, {}, {}, {})",
            grid.valid_count(),
            grid.cells.len(),
            spec.statistic.name(),
            crate::output::sig10(c.value.unwrap().abs()),
            c.p1,
            c.q1,
            c.p2,
            c.q2
        ),
        None => writeln!(stderr, "no valid cells among {}", grid.cells.len()),
    };
    Ok(grid_table(&grid, None))
}

fn analytic_demo(a: &AnalyticDemoArgs) -> Result<Table> {
    if a.steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    let anchor = QuantileSplit::new(0.5, 0.8)?;
    let mut table = grid_table(
        &analytic_scan(&ScanSpec::left_panel(a.steps)),
        Some("left"),
    );
    let right = grid_table(
        &analytic_scan(&ScanSpec::right_panel(a.steps)),
        Some("right"),
    );
    table.rows.extend(right.rows);
    let mut row: Vec<Value> = vec!["anchor".into()];
    row.extend(split_values(anchor, anchor));
    row.extend([
        normal_product_cov(anchor, anchor)?.into(),
        true.into(),
        Value::Missing,
    ]);
    table.push(row);
    Ok(table)
}

fn mc_test(a: &McTestArgs, seed: u64, stderr: &mut dyn Write) -> Result<Table> {
    let sample = load(&a.input.input, &a.input.cols, stderr)?;
    let split = match a.split.as_deref() {
        None => QuantileSplit::FULL,
        Some([p, q]) => QuantileSplit::new(*p, *q)?,
        Some([p1, q1, p2, q2]) if p1 == p2 && q1 == q2 => QuantileSplit::new(*p1, *q1)?,
        Some(_) => {
            return Err(CliError::Usage(
                "--split takes `P Q` (the same split is used for both coordinates)".into(),
            ))
        }
    };
    let pairing = a.pairing.unwrap_or(if sample.d() == 1 {
        Pairing::Lag1Series
    } else {
        Pairing::IidPairs
    });
    let observed = match pairing {
        Pairing::Lag1Series => {
            need_columns(&sample, 1, "mc-test with lag1-series pairing")?;
            let series = Series::new(sample.column(0).to_vec())?;
            let acf = cond_acf(&series, 1, AcfOptions::new(split))?;
            acf.records[0].result.clone()?
        }
        Pairing::IidPairs => {
            need_columns(&sample, 2, "mc-test with iid-pairs pairing")?;
            cond_moments_with(
                sample.column(0),
                sample.column(1),
                split,
                split,
                SpearmanMode::GlobalRanks,
            )?
        }
    };
    let statistic = match a.statistic {
        qcorr::inference::NullStatistic::Spearman => observed.spearman,
        _ => observed.corr,
    };
    let spec = McNullSpec::new(sample.n(), split, a.replicates, seed)
        .statistic(a.statistic)
        .pairing(pairing);
    let null = mc_null(&spec)?;
    let r = test_statistic(statistic, &null, a.alpha)?;
    let mut table = Table::new([
        "observed",
        "threshold",
        "alpha",
        "decision",
        "statistic",
        "pairing",
        "n",
        "p",
        "q",
        "m",
        "replicates",
        "redraws",
        "seed",
    ]);
    table.push(vec![
        r.observed.into(),
        r.threshold.into(),
        r.alpha.into(),
        r.decision.name().into(),
        r.statistic.name().into(),
        r.pairing.name().into(),
        r.n.into(),
        r.split.lower().into(),
        r.split.upper().into(),
        observed.m.into(),
        r.replicates.into(),
        r.redraws.into(),
        Value::Int(r.seed),
    ]);
    Ok(table)
}

fn simulate(a: &SimulateArgs, seed: u64) -> Result<Table> {
    let family = Family::parse(&a.family, a.param)?;
    let sample = generate(&GeneratorSpec::new(family, a.n, seed))?;
    let mut table = Table::new(sample.names().to_vec());
    for i in 0..sample.n() {
        table.push(sample.row(i).into_iter().map(Value::Exact).collect());
    }
    Ok(table)
}

fn project(a: &ProjectArgs, seed: u64, stderr: &mut dyn Write) -> Result<Table> {
    let mut all = a.cols.clone();
    all.extend(a.cols_y.iter().cloned());
    let sample = load(&a.input, &all, stderr)?;
    let k = a.cols.len();
    let xs = SampleMatrix::new(all[..k].to_vec(), sample.columns()[..k].to_vec())?;
    let ys = SampleMatrix::new(all[k..].to_vec(), sample.columns()[k..].to_vec())?;
    let (sx, sy) = four_splits(&a.split)?;
    let mut cols = vec!["index", "alpha", "beta"];
    cols.extend(moment_columns());
    let mut table = Table::new(cols);
    let n = sample.n();
    if let (Some(dx), Some(dy)) = (&a.dir_x, &a.dir_y) {
        let m = projection_cond_corr(&xs, &ys, dx, dy, sx, sy)?;
        let mut row: Vec<Value> = vec![
            0usize.into(),
            Value::List(dx.clone()),
            Value::List(dy.clone()),
        ];
        row.extend(moment_values(&m, n));
        table.push(row);
        return Ok(table);
    }
    for (i, rec) in projection_probe(&xs, &ys, a.directions, sx, sy, seed)?
        .into_iter()
        .enumerate()
    {
        let mut row: Vec<Value> = vec![i.into(), Value::List(rec.alpha), Value::List(rec.beta)];
        row.extend(moment_values(&rec.moments, n));
        table.push(row);
    }
    Ok(table)
}

fn recursive(a: &RecursiveArgs, seed: u64, stderr: &mut dyn Write) -> Result<Table> {
    let sample = load(&a.input.input, &a.input.cols, stderr)?;
    let split = match a.split.as_deref() {
        Some([p, q]) => QuantileSplit::new(*p, *q)?,
        _ => QuantileSplit::FULL,
    };
    let levels = recursive_independence_probe(&sample, a.directions, split, seed)?;
    let mut table = Table::new(["level", "target", "max_abs_corr", "direction"]);
    for l in levels {
        table.push(vec![
            l.level.into(),
            sample.names()[l.level].as_str().into(),
            l.max_abs_corr.into(),
            Value::List(l.direction),
        ]);
    }
    Ok(table)
}
