//! Command implementations. Each returns the stdout text; files are written
//! directly.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kdep::apps::causal::{causal_rank, CausalConfig, CausalPair, WeightedCurves};
use kdep::apps::synthetic::anm_pairs;
use kdep::apps::{rank_features, RankConfig};
use kdep::bench::{median, min_wall_time, repetition_seed, ErrorKinds, ExactReference};
use kdep::hsic::{centered_maps, rhsic_from_data};
use kdep::seeding::{domain, indexed_rng};
use kdep::sensmap::{aggregate, hsic_sensitivity, rhsic_sensitivity};
use kdep::{hsic, rhsic, Bandwidth, BandwidthSpec, DataMatrix, Estimator, TestConfig};
use ndarray::{Array2, Axis};
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::args::{parse_bandwidth, BenchArgs, CausalArgs, EstimatorArgs, RankArgs, SensitivityArgs, SynthArgs, TestArgs};
use crate::error::{CliError, CliResult};
use crate::io::{fmt_float, read_matrix, read_metadata, read_pair, resolve_pair_file, write_file, write_matrix, Table};
use crate::record::{to_line, CausalRecord, RankRecord, ResultRecord, SensitivityRecord};

/// `<prefix><suffix>`, e.g. `out/run` + `_Sx.csv`.
pub fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

fn read_variables(x: &Path, y: &Path, standardize: bool) -> CliResult<(Table, Table)> {
    let mut tx = read_matrix(x)?;
    let mut ty = read_matrix(y)?;
    if tx.data.n() != ty.data.n() {
        return Err(CliError::Input(format!(
            "{} has {} rows but {} has {}",
            x.display(),
            tx.data.n(),
            y.display(),
            ty.data.n()
        )));
    }
    if standardize {
        tx.data = tx.data.standardized();
        ty.data = ty.data.standardized();
    }
    Ok((tx, ty))
}

fn single_bandwidth(text: &str) -> CliResult<BandwidthSpec> {
    let (a, b) = parse_bandwidth(text)?;
    if a != b {
        return Err(CliError::Input("this command takes a single bandwidth".into()));
    }
    Ok(a)
}

pub fn cmd_test(args: &TestArgs) -> CliResult<String> {
    let start = Instant::now();
    let (tx, ty) = read_variables(&args.x, &args.y, args.estimator.standardize)?;
    let (bx, by) = args.estimator.bandwidths()?;
    let (sx, sy) = (bx.resolve(&tx.data)?, by.resolve(&ty.data)?);
    let config = TestConfig {
        estimator: args.estimator.estimator()?,
        alpha: args.alpha,
        null: args.null_kind(),
        permutations: args.permutations(),
        seed: args.estimator.seed,
        redraw_frequencies: args.redraw_frequencies,
    };
    let result = kdep::independence_test(&tx.data, &ty.data, sx, sy, &config)?;
    let record = ResultRecord {
        method: result.statistic.method.as_str().into(),
        statistic: result.statistic.reported(),
        p_value: result.p_value,
        threshold: result.threshold,
        reject: result.reject,
        n: result.statistic.n,
        features: result.statistic.features,
        sigma_x: sx.sigma(),
        sigma_y: sy.sigma(),
        seed: config.seed,
        wall_time_ms: args.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        alpha: config.alpha,
        null: match config.null {
            kdep::NullKind::Permutation => "permutation".into(),
            kdep::NullKind::GammaMomentMatched => "gamma".into(),
        },
        permutations: config.permutations,
    };
    to_line(&record)
}

/// A constant variable contributes nothing to the map at any bandwidth, so
/// the sensitivity command falls back to `σ = 1` where the heuristic has no
/// distances to work with.
fn sensitivity_bandwidth(spec: BandwidthSpec, x: &DataMatrix) -> CliResult<Bandwidth> {
    match spec.resolve(x) {
        Err(kdep::Error::AllSamplesIdentical) => Ok(Bandwidth::fixed(1.0)?),
        other => Ok(other?),
    }
}

pub fn cmd_sensitivity(args: &SensitivityArgs) -> CliResult<String> {
    let est: &EstimatorArgs = &args.estimator;
    let (tx, ty) = read_variables(&args.x, &args.y, est.standardize)?;
    let (bx, by) = est.bandwidths()?;
    let (sx, sy) = (sensitivity_bandwidth(bx, &tx.data)?, sensitivity_bandwidth(by, &ty.data)?);
    let estimator = est.estimator()?;
    let (value, map) = match estimator {
        Estimator::Exact => (
            hsic(&tx.data, &ty.data, sx, sy)?,
            hsic_sensitivity(&tx.data, &ty.data, sx, sy)?,
        ),
        Estimator::Randomized { features } => {
            let (zx, zy) = centered_maps(&tx.data, &ty.data, sx, sy, features, est.seed)?;
            (rhsic(&zx, &zy)?, rhsic_sensitivity(&tx.data, &ty.data, &zx, &zy)?)
        }
    };
    let x_names = tx.column_names("x");
    let y_names = ty.column_names("y");
    let paths = [
        suffixed(&args.out, "_Sx.csv"),
        suffixed(&args.out, "_Sy.csv"),
        suffixed(&args.out, "_aggregates.csv"),
    ];
    write_file(&paths[0], |w| write_matrix(w, &x_names, &map.sx))?;
    write_file(&paths[1], |w| write_matrix(w, &y_names, &map.sy))?;
    let agg = aggregate(&map);
    write_file(&paths[2], |w| {
        writeln!(w, "kind,index,name,value")?;
        let series: [(&str, &[f64]); 3] = [
            ("sample_mean_square", &agg.per_sample),
            ("sample_norm", &agg.sample_norms),
            ("sample_norm_x", &agg.sample_norms_x),
        ];
        for (kind, values) in series {
            for (i, v) in values.iter().enumerate() {
                writeln!(w, "{kind},{i},,{}", fmt_float(*v))?;
            }
        }
        let names = x_names.iter().map(|s| format!("x:{s}")).chain(y_names.iter().map(|s| format!("y:{s}")));
        for (j, (v, name)) in agg.per_feature.iter().zip(names).enumerate() {
            writeln!(w, "feature_mean_square,{j},{},{}", csv_cell(&name), fmt_float(*v))?;
        }
        Ok(())
    })?;
    to_line(&SensitivityRecord {
        method: value.method.as_str().into(),
        statistic: value.reported(),
        n: value.n,
        features: value.features,
        sigma_x: sx.sigma(),
        sigma_y: sy.sigma(),
        seed: est.seed,
        files: paths.iter().map(|p| p.display().to_string()).collect(),
    })
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn cmd_rank(args: &RankArgs) -> CliResult<String> {
    let (tx, ty) = read_variables(&args.x, &args.y, args.standardize)?;
    if ty.data.d() != 1 {
        return Err(CliError::Input(format!(
            "{}: the target must have one column, found {}",
            args.y.display(),
            ty.data.d()
        )));
    }
    let d = tx.data.d();
    let nf = args.nf.unwrap_or(d);
    if nf == 0 || nf > d {
        return Err(CliError::Input(format!("--nf must lie in 1..={d}, got {nf}")));
    }
    let config = RankConfig {
        bandwidth: single_bandwidth(&args.bandwidth)?,
    };
    let ranking = rank_features(&tx.data, &ty.data, args.criterion, &config)?;
    let names = tx.column_names("x");
    let selected = ranking.top(nf).to_vec();
    to_line(&RankRecord {
        criterion: args.criterion.as_str().into(),
        n: tx.data.n(),
        nf,
        selected_names: selected.iter().map(|&j| names[j].clone()).collect(),
        features: names,
        scores: ranking.scores.clone(),
        order: ranking.order.clone(),
        selected,
    })
}

fn write_curves(prefix: &Path, curves: &WeightedCurves) -> CliResult<Vec<PathBuf>> {
    let tag = curves.score.as_str();
    let roc = suffixed(prefix, &format!("_roc_{tag}.csv"));
    let pr = suffixed(prefix, &format!("_pr_{tag}.csv"));
    let ranked = suffixed(prefix, &format!("_ranked_{tag}.csv"));
    write_file(&roc, |w| {
        writeln!(w, "threshold,fpr,tpr")?;
        for p in &curves.roc {
            writeln!(w, "{},{},{}", fmt_float(p.threshold), fmt_float(p.false_positive_rate), fmt_float(p.true_positive_rate))?;
        }
        Ok(())
    })?;
    write_file(&pr, |w| {
        writeln!(w, "threshold,recall,precision")?;
        for p in &curves.pr {
            writeln!(w, "{},{},{}", fmt_float(p.threshold), fmt_float(p.recall), fmt_float(p.precision))?;
        }
        Ok(())
    })?;
    write_file(&ranked, |w| {
        writeln!(w, "rank,id,score,predicted,truth,weight,cumulative_correct,cumulative_incorrect")?;
        for (r, d) in curves.ranked.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r + 1,
                csv_cell(&d.id),
                fmt_float(d.score),
                d.predicted,
                d.truth.map_or("", |t| t.as_str()),
                fmt_float(d.weight),
                fmt_float(d.cumulative_correct),
                fmt_float(d.cumulative_incorrect)
            )?;
        }
        Ok(())
    })?;
    Ok(vec![roc, pr, ranked])
}

pub fn cmd_causal(args: &CausalArgs) -> CliResult<String> {
    let meta = read_metadata(&args.metafile)?;
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for row in &meta {
        let Some(truth) = row.truth else {
            skipped.push(row.id.clone());
            continue;
        };
        let path = resolve_pair_file(&args.pairdir, row, &args.metafile)?;
        let (mut x, mut y) = read_pair(&path)?;
        if args.estimator.standardize {
            x = DataMatrix::from_column(&x)?.standardized().column_values(0);
            y = DataMatrix::from_column(&y)?.standardized().column_values(0);
        }
        pairs.push(CausalPair {
            id: row.id.clone(),
            x,
            y,
            truth: Some(truth),
            weight: row.weight,
        });
    }
    if pairs.is_empty() {
        return Err(CliError::Input(format!("{}: no usable pairs", args.metafile.display())));
    }
    let config = CausalConfig {
        estimator: args.estimator.estimator()?,
        bandwidth: single_bandwidth(&args.estimator.bandwidth)?,
        neighbors: args.neighbors,
        score: args.score,
        seed: args.estimator.seed,
    };
    let ranking = causal_rank(&pairs, &config)?;
    let decisions = suffixed(&args.out, "_decisions.csv");
    write_file(&decisions, |w| {
        writeln!(w, "id,truth,weight,C,Cs,direction_C,direction_Cs,chosen")?;
        for (p, d) in pairs.iter().zip(&ranking.decisions) {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                csv_cell(&p.id),
                p.truth.map_or("", |t| t.as_str()),
                fmt_float(p.weight),
                fmt_float(d.score_c),
                fmt_float(d.score_cs),
                d.direction_by(kdep::apps::ScoreKind::Statistic),
                d.direction_by(kdep::apps::ScoreKind::Sensitivity),
                d.direction
            )?;
        }
        Ok(())
    })?;
    let mut files = vec![decisions];
    files.extend(write_curves(&args.out, &ranking.statistic)?);
    files.extend(write_curves(&args.out, &ranking.sensitivity)?);
    to_line(&CausalRecord {
        method: config.estimator.method().as_str().into(),
        features: config.estimator.features(),
        seed: config.seed,
        pairs: pairs.len(),
        skipped,
        auc_c: ranking.statistic.auc,
        auc_cs: ranking.sensitivity.auc,
        accuracy_c: ranking.statistic.accuracy,
        accuracy_cs: ranking.sensitivity.accuracy,
        files: files.iter().map(|p| p.display().to_string()).collect(),
    })
}

/// Rows of the bandwidth subsample used by `bench`.
pub const BENCH_BANDWIDTH_ROWS: usize = 1000;

/// `x ~ U[0, 1]`, `y = x + 0.25 ε`.
pub fn bench_data(n: usize, seed: u64) -> (DataMatrix, DataMatrix) {
    let mut rng = indexed_rng(seed, domain::DATA, n as u64);
    let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
    let mut x = Array2::zeros((n, 1));
    let mut y = Array2::zeros((n, 1));
    for i in 0..n {
        let e: f64 = StandardNormal.sample(&mut rng);
        x[[i, 0]] = unit.sample(&mut rng);
        y[[i, 0]] = x[[i, 0]] + 0.25 * e;
    }
    (DataMatrix::new(x).expect("finite"), DataMatrix::new(y).expect("finite"))
}

/// Mean-distance bandwidth of the first [`BENCH_BANDWIDTH_ROWS`] rows.
pub fn bench_bandwidth(x: &DataMatrix) -> CliResult<Bandwidth> {
    let rows = x.n().min(BENCH_BANDWIDTH_ROWS);
    let head = DataMatrix::new(x.values().slice_axis(Axis(0), (0..rows).into()).to_owned())?;
    Ok(BandwidthSpec::AutoMean.resolve(&head)?)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<String> {
    if args.sizes.is_empty() || args.grid.is_empty() {
        return Err(CliError::Input("--sizes and --grid must be non-empty".into()));
    }
    if args.reps == 0 {
        return Err(CliError::Input("--reps must be at least 1".into()));
    }
    if let Some(&n) = args.sizes.iter().find(|&&n| n < 2) {
        return Err(CliError::Input(format!("sample size {n} is below 2")));
    }
    if args.grid.contains(&0) {
        return Err(CliError::Input("feature counts must be at least 1".into()));
    }
    let mut out = String::from("n,D,hsic,rhsic,rhsic_error,sensitivity_error");
    if args.timing {
        out.push_str(",hsic_ms,rhsic_ms");
    }
    out.push('\n');
    for &n in &args.sizes {
        let (x, y) = bench_data(n, args.seed);
        let (sx, sy) = (bench_bandwidth(&x)?, bench_bandwidth(&y)?);
        let exact = if n <= args.exact_limit {
            let reference = ExactReference::new(&x, &y, sx, sy)?;
            let map = reference.sensitivity()?;
            let hsic_ms = if args.timing {
                Some(min_wall_time(args.reps, || hsic(&x, &y, sx, sy))?.0 * 1e3)
            } else {
                None
            };
            Some((reference, map, hsic_ms))
        } else {
            None
        };
        for &features in &args.grid {
            let seeds: Vec<u64> = (0..args.reps).map(|r| repetition_seed(args.seed, r)).collect();
            let (values, stat_err, sens_err) = match &exact {
                Some((reference, map, _)) => {
                    let kinds = ErrorKinds {
                        sensitivity: true,
                        product: false,
                    };
                    let errs = seeds
                        .iter()
                        .map(|&s| reference.errors(features, s, kinds, Some(map)))
                        .collect::<kdep::Result<Vec<_>>>()?;
                    let sens: Vec<f64> = errs.iter().filter_map(|e| e.sensitivity).collect();
                    (
                        errs.iter().map(|e| e.rhsic).collect::<Vec<_>>(),
                        Some(median(&errs.iter().map(|e| e.statistic).collect::<Vec<_>>())),
                        Some(median(&sens)),
                    )
                }
                None => (
                    seeds
                        .iter()
                        .map(|&s| rhsic_from_data(&x, &y, sx, sy, features, s).map(|v| v.value))
                        .collect::<kdep::Result<Vec<_>>>()?,
                    None,
                    None,
                ),
            };
            let hsic_value = exact.as_ref().map(|(r, _, _)| r.hsic);
            out.push_str(&format!(
                "{n},{features},{},{},{},{}",
                opt_cell(hsic_value),
                fmt_float(median(&values)),
                opt_cell(stat_err),
                opt_cell(sens_err)
            ));
            if args.timing {
                let mut k = 0usize;
                let (secs, _) = min_wall_time(args.reps, || {
                    let s = seeds[k % seeds.len()];
                    k += 1;
                    rhsic_from_data(&x, &y, sx, sy, features, s)
                })?;
                let hsic_ms = exact.as_ref().and_then(|e| e.2);
                out.push_str(&format!(",{},{}", opt_cell(hsic_ms), fmt_float(secs * 1e3)));
            }
            out.push('\n');
        }
    }
    match &args.out {
        Some(path) => {
            write_file(path, |w| w.write_all(out.as_bytes()))?;
            Ok(String::new())
        }
        None => Ok(out.trim_end().to_string()),
    }
}

pub fn cmd_synth_pairs(args: &SynthArgs) -> CliResult<String> {
    if args.n < 3 || args.count == 0 {
        return Err(CliError::Input("need --count ≥ 1 and -n ≥ 3".into()));
    }
    fs::create_dir_all(&args.out).map_err(|e| CliError::Input(format!("{}: {e}", args.out.display())))?;
    let pairs = anm_pairs(args.count, args.n, args.seed);
    let mut meta = String::from("id,direction,weight\n");
    for p in &pairs {
        write_file(&args.out.join(format!("{}.txt", p.id)), |w| {
            for (a, b) in p.x.iter().zip(&p.y) {
                writeln!(w, "{} {}", fmt_float(*a), fmt_float(*b))?;
            }
            Ok(())
        })?;
        let dir = match p.truth {
            Some(kdep::apps::Direction::YcausesX) => "2->1",
            _ => "1->2",
        };
        meta.push_str(&format!("{},{dir},{}\n", p.id, fmt_float(p.weight)));
    }
    write_file(&args.out.join("pairmeta.csv"), |w| w.write_all(meta.as_bytes()))?;
    Ok(String::new())
}
