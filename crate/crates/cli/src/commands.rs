use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use heatwave_core::diagnostics::{
    chi_curve, extremal_index, frechet_rank_transform, lag_pairs, pacf, posterior_predictive_check,
};
use heatwave_core::generator::{
    detect_huth, detect_implicit, detect_worst_annual, huth_thresholds, retrospective_summaries, simulate_draw,
    DefinitionSummary, HeatWaveEvent, Rule, SimulatedSummer,
};
use heatwave_core::inference::{run_chain, state_inclusion_probabilities, PriorSpec};
use heatwave_core::io::{self, fmt_f64};
use heatwave_core::model::{ModelParams, StateSequence, SummerSegment};
use heatwave_core::preprocess::{
    deseasonalize, extract_jja, fit_seasonal_quantile_spline, parse_series, pooled_day_values,
};
use heatwave_core::stats;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Context, Result};

pub const VERSION: &str = concat!("heatwave ", env!("CARGO_PKG_VERSION"));

/// Posterior draws simulated together before their results are written.
const DRAW_CHUNK: usize = 64;

const RULES: [Rule; 3] = [Rule::Implicit, Rule::Huth, Rule::WorstAnnual];

struct Output {
    dir: PathBuf,
}

impl Output {
    /// Creates the directory and records the resolved config and version.
    fn prepare(cfg: &RunConfig, command: &str) -> Result<Self> {
        let dir = cfg.out.clone();
        std::fs::create_dir_all(&dir).map_err(|source| CliError::File { path: dir.display().to_string(), source })?;
        let out = Self { dir };
        let mut w = out.create(&format!("{command}.config.toml"))?;
        write_all(&mut w, cfg.to_toml().as_bytes(), &out.path(&format!("{command}.config.toml")))?;
        let mut v = out.create("VERSION")?;
        write_all(&mut v, format!("{VERSION}\n").as_bytes(), &out.path("VERSION"))?;
        Ok(out)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let p = self.path(name);
        File::create(&p)
            .map(BufWriter::new)
            .map_err(|source| CliError::File { path: p.display().to_string(), source })
    }

    fn write(&self, name: &str, f: impl FnOnce(BufWriter<File>) -> heatwave_core::Result<()>) -> Result<()> {
        f(self.create(name)?).context(format!("writing {}", self.path(name).display()))
    }
}

fn write_all(w: &mut impl Write, bytes: &[u8], path: &Path) -> Result<()> {
    w.write_all(bytes)
        .and_then(|()| w.flush())
        .map_err(|source| CliError::File { path: path.display().to_string(), source })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| CliError::File { path: path.display().to_string(), source })
}

fn read_segments(path: &Path) -> Result<Vec<SummerSegment>> {
    io::read_segments(open(path)?).context(path.display().to_string())
}

fn read_draws(path: &Path) -> Result<Vec<ModelParams>> {
    let rows = io::read_samples(open(path)?).context(path.display().to_string())?;
    if rows.is_empty() {
        return Err(CliError::Core {
            context: path.display().to_string(),
            source: heatwave_core::Error::InvalidInput("no posterior draws".into()),
        });
    }
    Ok(rows.into_iter().map(|(p, _)| p).collect())
}

fn segment_values(segments: &[SummerSegment]) -> Vec<Vec<f64>> {
    segments.iter().map(|s| (0..s.len()).map(|t| s.get(t).unwrap_or(f64::NAN)).collect()).collect()
}

fn pooled(segments: &[SummerSegment]) -> Vec<f64> {
    segments.iter().flat_map(|s| s.observed()).collect()
}

pub fn preprocess(cfg: &RunConfig) -> Result<()> {
    let p = &cfg.preprocess;
    let input = p
        .input
        .as_deref()
        .ok_or_else(|| CliError::Config("no input file (positional argument or preprocess.input)".into()))?;
    let text = std::fs::read_to_string(input)
        .map_err(|source| CliError::File { path: input.display().to_string(), source })?;
    let mut series = parse_series(&text).context(input.display().to_string())?;
    println!(
        "{}: {} days, {} suspect, {} missing",
        input.display(),
        series.dates.len(),
        series.n_suspect(),
        series.n_missing()
    );
    if p.drop_suspect {
        series.drop_suspect();
    }
    let (raw, warnings) = extract_jja(&series, p.year_from, p.year_to).context("extracting JJA")?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let out = Output::prepare(cfg, "preprocess")?;
    out.write("raw_segments.csv", |w| io::write_segments(w, &raw))?;
    let segments = if p.deseasonalize {
        let curve = fit_seasonal_quantile_spline(&pooled_day_values(&raw), &p.spline()).context("seasonal spline")?;
        println!("seasonal median curve: lambda {}, {} iterations", curve.lambda, curve.iterations);
        out.write("seasonal_curve.csv", |w| io::write_seasonal_curve(w, &curve))?;
        deseasonalize(&raw, &curve).context("de-seasonalizing")?
    } else {
        raw
    };
    out.write("segments.csv", |w| io::write_segments(w, &segments))?;
    let missing: usize = segments.iter().map(SummerSegment::n_missing).sum();
    println!("{} summers {}-{}, {} missing values", segments.len(), p.year_from, p.year_to, missing);
    for s in segments.iter().filter(|s| s.n_missing() > 0) {
        println!("  {}: {} missing", s.year, s.n_missing());
    }
    Ok(())
}

pub fn fit(cfg: &RunConfig, segments_path: &Path) -> Result<()> {
    let segments = read_segments(segments_path)?;
    let prior = cfg.prior.apply(PriorSpec::from_data(&segments).context("prior")?);
    let mc = cfg.mcmc.to_config(cfg.seed);
    let out = Output::prepare(cfg, "fit")?;
    let chain = run_chain(&segments, &prior, &mc).context("sampler")?;

    out.write("samples.csv", |w| io::write_samples(w, &chain.samples))?;
    let probs = state_inclusion_probabilities(&chain.samples);
    out.write("state_probs.csv", |w| io::write_state_probs(w, &segments, &probs))?;
    out.write("state_draws.csv", |w| io::write_state_draws(w, &segments, &chain.samples))?;
    out.write("runs.csv", |w| io::write_runs(w, &segments, &chain.samples))?;
    out.write("imputed.csv", |w| io::write_imputed(w, &segments, &chain.samples))?;
    out.write("trace.csv", |w| io::write_trace(w, &chain.log_posterior_trace))?;

    let scale = |name: &str| chain.final_scales.iter().find(|s| s.0 == name).map_or(f64::NAN, |s| s.1);
    let mut acc: Vec<[String; 3]> = chain
        .acceptance
        .iter()
        .map(|(name, rate)| [name.to_string(), fmt_f64(*rate), fmt_f64(scale(name))])
        .collect();
    acc.push(["a0_a1".into(), fmt_f64(chain.transition_acceptance), io::NA.into()]);
    acc.push(["u_block".into(), fmt_f64(chain.threshold_block_acceptance), fmt_f64(scale("u_block"))]);
    out.write("acceptance.csv", |w| io::write_rows(w, &["update", "acceptance_rate", "proposal_scale"], acc.iter()))?;

    println!("{} retained draws from {} iterations", chain.samples.len(), mc.n_iterations);
    println!("{:<10} {:>10} {:>10} {:>10} {:>10}", "parameter", "q0.05", "median", "q0.95", "accept");
    for (i, name) in ModelParams::NAMES.iter().enumerate() {
        let v: Vec<f64> = chain.samples.iter().map(|s| s.params.to_array()[i]).collect();
        let rate = chain.acceptance.iter().find(|a| a.0 == *name).map(|a| a.1);
        let rate = rate.unwrap_or(if i < 2 { chain.transition_acceptance } else { f64::NAN });
        println!(
            "{:<10} {:>10.4} {:>10.4} {:>10.4} {:>10.3}",
            name,
            stats::quantile(&v, 0.05),
            stats::quantile(&v, 0.5),
            stats::quantile(&v, 0.95),
            rate
        );
    }
    println!("threshold block move acceptance {:.3}", chain.threshold_block_acceptance);
    Ok(())
}

/// Aggregates over all simulated summers for one heat-wave definition.
#[derive(Debug, Clone, Default)]
struct Tally {
    summers: u64,
    events: u64,
    days: u64,
    sum_mean_temp: f64,
    lengths: BTreeMap<usize, u64>,
    counts: BTreeMap<usize, u64>,
    temp_bins: BTreeMap<i64, u64>,
}

impl Tally {
    fn add(&mut self, events: &[HeatWaveEvent], bin: f64) {
        self.summers += 1;
        *self.counts.entry(events.len()).or_default() += 1;
        for e in events {
            self.events += 1;
            self.days += e.length as u64;
            self.sum_mean_temp += e.mean_temp();
            *self.lengths.entry(e.length).or_default() += 1;
            *self.temp_bins.entry((e.mean_temp() / bin).floor() as i64).or_default() += 1;
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.summers += other.summers;
        self.events += other.events;
        self.days += other.days;
        self.sum_mean_temp += other.sum_mean_temp;
        for (k, v) in &other.lengths {
            *self.lengths.entry(*k).or_default() += v;
        }
        for (k, v) in &other.counts {
            *self.counts.entry(*k).or_default() += v;
        }
        for (k, v) in &other.temp_bins {
            *self.temp_bins.entry(*k).or_default() += v;
        }
    }
}

struct DrawResult {
    tallies: [Tally; 3],
    /// Kept only when every summer is written out.
    summers: Vec<(SimulatedSummer, [Vec<HeatWaveEvent>; 3])>,
}

fn detect_all(s: &SimulatedSummer, t1: f64, t2: f64, window: usize) -> [Vec<HeatWaveEvent>; 3] {
    [
        detect_implicit(&s.states, &s.values),
        detect_huth(&s.values, t1, t2),
        detect_worst_annual(&s.values, window).into_iter().collect(),
    ]
}

fn huth_pair(cfg: &RunConfig, observed: Option<&[SummerSegment]>) -> Result<(f64, f64, &'static str)> {
    let g = &cfg.generator;
    match (g.huth_t1, g.huth_t2, observed) {
        (Some(t1), Some(t2), _) => Ok((t1, t2, "config")),
        (t1, t2, Some(obs)) => {
            let (q1, q2) = huth_thresholds(&pooled(obs));
            Ok((t1.unwrap_or(q1), t2.unwrap_or(q2), "observed"))
        }
        _ => Err(CliError::Config("Huth thresholds need --observed or both huth_t1 and huth_t2".into())),
    }
}

pub fn simulate(cfg: &RunConfig, samples: &Path, observed: Option<&Path>, states: Option<&Path>) -> Result<()> {
    let g = &cfg.generator;
    if g.summers_per_draw == 0 || g.n_days < 2 || g.worst_window == 0 || g.worst_window > g.n_days {
        return Err(CliError::Config("generator: need summers_per_draw > 0 and 1 <= worst_window <= n_days".into()));
    }
    if !(g.temperature_bin > 0.0) {
        return Err(CliError::Config("generator.temperature_bin must be positive".into()));
    }
    let draws = read_draws(samples)?;
    let observed = observed.map(read_segments).transpose()?;
    let (t1, t2, source) = huth_pair(cfg, observed.as_deref())?;
    if t2 >= t1 {
        return Err(CliError::Config(format!("Huth thresholds need T2 < T1, got T1={t1}, T2={t2}")));
    }
    let out = Output::prepare(cfg, "simulate")?;
    out.write("huth_thresholds.csv", |w| {
        io::write_rows(w, &["t1", "t2", "source"], [[fmt_f64(t1), fmt_f64(t2), source.to_string()]])
    })?;

    let mut summer_writer = if g.write_summers {
        Some(io::SummerWriter::new(out.create("summers.csv")?).context("summers.csv")?)
    } else {
        None
    };
    let mut event_writer = if g.write_summers {
        Some(io::EventWriter::new(out.create("events.csv")?, out.create("definition_summaries.csv")?).context("events.csv")?)
    } else {
        None
    };

    let mut total: [Tally; 3] = Default::default();
    for start in (0..draws.len()).step_by(DRAW_CHUNK) {
        let end = (start + DRAW_CHUNK).min(draws.len());
        let results: Vec<DrawResult> = (start..end)
            .into_par_iter()
            .map(|d| {
                let summers = simulate_draw(&draws[d], d, g.summers_per_draw, g.n_days, cfg.seed)?;
                let mut r = DrawResult { tallies: Default::default(), summers: Vec::new() };
                for s in summers {
                    let ev = detect_all(&s, t1, t2, g.worst_window);
                    for (tally, e) in r.tallies.iter_mut().zip(&ev) {
                        tally.add(e, g.temperature_bin);
                    }
                    if g.write_summers {
                        r.summers.push((s, ev));
                    }
                }
                Ok(r)
            })
            .collect::<heatwave_core::Result<_>>()
            .context("simulating summers")?;
        for r in &results {
            for (t, x) in total.iter_mut().zip(&r.tallies) {
                t.merge(x);
            }
            for (k, (s, ev)) in r.summers.iter().enumerate() {
                if let Some(w) = summer_writer.as_mut() {
                    w.write(k, s).context("summers.csv")?;
                }
                if let Some(w) = event_writer.as_mut() {
                    for (rule, e) in RULES.iter().zip(ev) {
                        w.write(s.source_draw, k, e, &DefinitionSummary::from_events(*rule, e)).context("events.csv")?;
                    }
                }
            }
        }
    }
    if let Some(w) = summer_writer {
        w.finish().context("summers.csv")?;
    }
    if let Some(w) = event_writer {
        w.finish().context("events.csv")?;
    }

    let comparison: Vec<[String; 6]> = RULES
        .iter()
        .zip(&total)
        .map(|(rule, t)| {
            let per = |x: f64, n: u64| if n > 0 { x / n as f64 } else { f64::NAN };
            [
                rule.to_string(),
                t.summers.to_string(),
                t.events.to_string(),
                fmt_f64(per(t.events as f64, t.summers)),
                fmt_f64(per(t.days as f64, t.events)),
                fmt_f64(per(t.sum_mean_temp, t.events)),
            ]
        })
        .collect();
    out.write("definition_comparison.csv", |w| {
        io::write_rows(
            w,
            &["rule", "n_summers", "n_events", "events_per_summer", "mean_length", "mean_temp"],
            comparison.iter(),
        )
    })?;
    let pmf_rows = |f: fn(&Tally) -> (&BTreeMap<usize, u64>, u64)| -> Vec<[String; 3]> {
        RULES
            .iter()
            .zip(&total)
            .flat_map(|(rule, t)| {
                let (m, n) = f(t);
                m.iter().map(move |(k, c)| [rule.to_string(), k.to_string(), fmt_f64(*c as f64 / n as f64)])
            })
            .collect()
    };
    let durations = pmf_rows(|t| (&t.lengths, t.events));
    out.write("duration_pmf.csv", |w| io::write_rows(w, &["rule", "length", "probability"], durations.iter()))?;
    let frequencies = pmf_rows(|t| (&t.counts, t.summers));
    out.write("frequency_pmf.csv", |w| io::write_rows(w, &["rule", "n_events", "probability"], frequencies.iter()))?;
    let bin = g.temperature_bin;
    let density: Vec<[String; 4]> = RULES
        .iter()
        .zip(&total)
        .flat_map(|(rule, t)| {
            t.temp_bins.iter().map(move |(b, c)| {
                [
                    rule.to_string(),
                    fmt_f64(*b as f64 * bin),
                    fmt_f64((*b + 1) as f64 * bin),
                    fmt_f64(*c as f64 / (t.events as f64 * bin)),
                ]
            })
        })
        .collect();
    out.write("temperature_density.csv", |w| {
        io::write_rows(w, &["rule", "bin_lower", "bin_upper", "density"], density.iter())
    })?;

    if let (Some(path), Some(obs)) = (states, observed.as_deref()) {
        let by_draw = group_state_draws(path, obs)?;
        let retro = retrospective_summaries(&by_draw, obs);
        out.write("retrospective_duration_pmf.csv", |w| io::write_pmf(w, "length", &retro.length_pmf))?;
        out.write("retrospective_frequency_pmf.csv", |w| io::write_pmf(w, "n_events", &retro.count_pmf))?;
        out.write("retrospective_temperatures.csv", |w| io::write_values(w, "temperature", &retro.temperatures))?;
    }

    println!("{} draws x {} summers, Huth T1 {:.2} T2 {:.2} ({source})", draws.len(), g.summers_per_draw, t1, t2);
    println!("{:<13} {:>10} {:>12} {:>12} {:>10}", "rule", "events", "per summer", "mean length", "mean temp");
    for row in &comparison {
        let num = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
        println!("{:<13} {:>10} {:>12.3} {:>12.3} {:>10.2}", row[0], row[2], num(&row[3]), num(&row[4]), num(&row[5]));
    }
    Ok(())
}

/// State draws from `fit`, grouped per draw in segment order.
fn group_state_draws(path: &Path, segments: &[SummerSegment]) -> Result<Vec<Vec<StateSequence>>> {
    let rows = io::read_state_draws(open(path)?).context(path.display().to_string())?;
    let bad = |msg: String| CliError::Core {
        context: path.display().to_string(),
        source: heatwave_core::Error::InvalidInput(msg),
    };
    let mut by_draw: BTreeMap<usize, BTreeMap<i32, StateSequence>> = BTreeMap::new();
    for (d, year, s) in rows {
        by_draw.entry(d).or_default().insert(year, s);
    }
    by_draw
        .into_iter()
        .map(|(d, mut years)| {
            segments
                .iter()
                .map(|seg| {
                    let s = years.remove(&seg.year).ok_or_else(|| bad(format!("draw {d} has no states for {}", seg.year)))?;
                    if s.len() != seg.len() {
                        return Err(bad(format!("draw {d}, {}: {} states for {} days", seg.year, s.len(), seg.len())));
                    }
                    Ok(s)
                })
                .collect()
        })
        .collect()
}

pub fn diagnose(cfg: &RunConfig, segments_path: &Path, samples: Option<&Path>) -> Result<()> {
    let d = &cfg.diagnostics;
    let segments = read_segments(segments_path)?;
    let values = segment_values(&segments);
    let all = pooled(&segments);
    let draws = samples.map(read_draws).transpose()?;
    let out = Output::prepare(cfg, "diagnose")?;

    let mut chi_rows = Vec::new();
    for &lag in &d.chi_lags {
        for (q, chi) in chi_curve(&values, &d.chi_quantiles, lag) {
            chi_rows.push((lag, q, stats::quantile(&all, q), chi));
        }
    }
    out.write("chi.csv", |w| io::write_chi(w, &chi_rows))?;
    let p = pacf(&values, d.pacf_max_lag).context("partial autocorrelation")?;
    out.write("pacf.csv", |w| io::write_pacf(w, &p))?;
    let ei: Vec<(f64, f64, Option<f64>)> = d
        .extremal_quantiles
        .iter()
        .map(|&q| {
            let u = stats::quantile(&all, q);
            (q, u, extremal_index(&values, u))
        })
        .collect();
    out.write("extremal_index.csv", |w| io::write_extremal(w, &ei))?;
    out.write("pairs_lag1.csv", |w| io::write_pairs(w, ["y_prev", "y"], &lag_pairs(&values, 1)))?;
    let flat: Vec<f64> = values.iter().flatten().copied().collect();
    let z = frechet_rank_transform(&flat);
    let mut offset = 0;
    let z_segments: Vec<&[f64]> = values
        .iter()
        .map(|v| {
            let s = &z[offset..offset + v.len()];
            offset += v.len();
            s
        })
        .collect();
    out.write("pairs_lag1_frechet.csv", |w| io::write_pairs(w, ["z_prev", "z"], &lag_pairs(&z_segments, 1)))?;
    println!("{} summers, {} observed values; exploratory outputs written", segments.len(), all.len());

    if let Some(draws) = draws {
        if d.ppc_summers_per_draw < d.ppc_summers {
            return Err(CliError::Config(format!(
                "ppc_summers_per_draw ({}) is below the replicate size ({})",
                d.ppc_summers_per_draw, d.ppc_summers
            )));
        }
        let n_days = segments.iter().map(SummerSegment::len).max().unwrap_or(0);
        let (spd, seed) = (d.ppc_summers_per_draw, cfg.seed);
        let sims = (0..draws.len()).step_by(DRAW_CHUNK).flat_map(|start| {
            let end = (start + DRAW_CHUNK).min(draws.len());
            let block: Vec<heatwave_core::Result<Vec<SimulatedSummer>>> =
                (start..end).into_par_iter().map(|k| simulate_draw(&draws[k], k, spd, n_days, seed)).collect();
            block.into_iter().flat_map(|r| match r {
                Ok(v) => v.into_iter().map(Ok).collect::<Vec<_>>(),
                Err(e) => vec![Err(e)],
            })
        });
        let report = posterior_predictive_check(sims, &segments, &d.ppc()).context("posterior predictive check")?;
        out.write("ppc.csv", |w| io::write_ppc(w, &report))?;
        let table = report.to_string();
        let mut f = out.create("ppc.txt")?;
        write_all(&mut f, table.as_bytes(), &out.path("ppc.txt"))?;
        println!("{table}");
        println!("{} of {} statistics inside their 95% predictive intervals", report.n_inside(), report.rows.len());
    }
    Ok(())
}
