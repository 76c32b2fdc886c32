//! CSV interchange formats. Every file has a header row; floats are written
//! with 17 significant digits and undefined values as `NA`.

use std::io::{Read, Write};

use crate::diagnostics::{PPCReport, Pacf};
use crate::generator::{DefinitionSummary, HeatWaveEvent, SimulatedSummer};
use crate::inference::PosteriorSample;
use crate::model::{ModelParams, SummerSegment};
use crate::preprocess::SeasonalCurve;
use crate::{Error, Result};

pub const NA: &str = "NA";

pub const SEGMENT_HEADER: [&str; 4] = ["year", "day_of_season", "value", "missing"];
pub const SAMPLE_HEADER: [&str; 12] = [
    "draw", "a0", "a1", "u", "sigma", "xi", "mu", "sigma_n2", "phi", "alpha", "alpha01", "log_posterior",
];

/// Round-trippable float text.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        NA.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), fmt_f64)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line, msg: format!("{other:?}") },
    }
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    Ok(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn reader<R: Read>(r: R, header: &[&str]) -> Result<csv::Reader<R>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let got = rd.headers().map_err(csv_err)?.clone();
    if got.iter().collect::<Vec<_>>() != header {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header {:?}, found {:?}", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        });
    }
    Ok(rd)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line() as usize);
    let s = rec.get(i).ok_or_else(|| Error::Parse { line, msg: format!("missing field {name}") })?;
    s.parse().map_err(|_| Error::Parse { line, msg: format!("bad {name} value {s:?}") })
}

fn float_field(rec: &csv::StringRecord, i: usize, name: &str) -> Result<f64> {
    if rec.get(i) == Some(NA) {
        return Ok(f64::NAN);
    }
    field(rec, i, name)
}

pub fn write_segments<W: Write>(w: W, segments: &[SummerSegment]) -> Result<()> {
    let mut out = writer(w, &SEGMENT_HEADER)?;
    for s in segments {
        for t in 0..s.len() {
            out.write_record([
                s.year.to_string(),
                (t + 1).to_string(),
                fmt_opt(s.get(t)),
                u8::from(s.missing[t]).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(out)
}

/// Reads the segment table. Rows of one year must be contiguous with
/// `day_of_season` running 1, 2, ...
pub fn read_segments<R: Read>(r: R) -> Result<Vec<SummerSegment>> {
    let mut rd = reader(r, &SEGMENT_HEADER)?;
    let mut out: Vec<(i32, Vec<f64>, Vec<bool>)> = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let year: i32 = field(&rec, 0, "year")?;
        let day: usize = field(&rec, 1, "day_of_season")?;
        let missing = match rec.get(3) {
            Some("0") => false,
            Some("1") => true,
            other => return Err(Error::Parse { line, msg: format!("missing flag must be 0 or 1, found {other:?}") }),
        };
        let value = if missing { f64::NAN } else { float_field(&rec, 2, "value")? };
        if !missing && !value.is_finite() {
            return Err(Error::Parse { line, msg: "observed value is not finite".into() });
        }
        if out.last().is_none_or(|s| s.0 != year) {
            if out.iter().any(|s| s.0 == year) {
                return Err(Error::Parse { line, msg: format!("rows of year {year} are not contiguous") });
            }
            out.push((year, Vec::new(), Vec::new()));
        }
        let seg = out.last_mut().unwrap();
        if day != seg.1.len() + 1 {
            return Err(Error::Parse { line, msg: format!("expected day_of_season {}, found {day}", seg.1.len() + 1) });
        }
        seg.1.push(value);
        seg.2.push(missing);
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("segment file has no rows".into()));
    }
    out.into_iter().map(|(y, v, m)| SummerSegment::new(y, v, m)).collect()
}

pub fn write_seasonal_curve<W: Write>(w: W, curve: &SeasonalCurve) -> Result<()> {
    let mut out = writer(w, &["day_of_season", "value"])?;
    for (d, v) in curve.values.iter().enumerate() {
        out.write_record([(d + 1).to_string(), fmt_f64(*v)]).map_err(csv_err)?;
    }
    finish(out)
}

pub fn write_samples<W: Write>(w: W, samples: &[PosteriorSample]) -> Result<()> {
    let mut out = writer(w, &SAMPLE_HEADER)?;
    for (i, s) in samples.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(s.params.to_array().iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(s.log_posterior));
        out.write_record(&row).map_err(csv_err)?;
    }
    finish(out)
}

/// Parameter draws and their log posterior from a samples file.
pub fn read_samples<R: Read>(r: R) -> Result<Vec<(ModelParams, f64)>> {
    let mut rd = reader(r, &SAMPLE_HEADER)?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut a = [0.0; 10];
        for (k, v) in a.iter_mut().enumerate() {
            *v = field(&rec, k + 1, SAMPLE_HEADER[k + 1])?;
        }
        let p = ModelParams::from_array(a);
        p.validate().map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        out.push((p, float_field(&rec, 11, "log_posterior")?));
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("samples file has no rows".into()));
    }
    Ok(out)
}

pub fn write_state_probs<W: Write>(w: W, segments: &[SummerSegment], probs: &[Vec<f64>]) -> Result<()> {
    let mut out = writer(w, &["year", "day_of_season", "p_heat_wave"])?;
    for (s, p) in segments.iter().zip(probs) {
        for (t, v) in p.iter().enumerate() {
            out.write_record([s.year.to_string(), (t + 1).to_string(), fmt_f64(*v)]).map_err(csv_err)?;
        }
    }
    finish(out)
}

/// One row per implicit heat-wave run per draw and segment.
pub fn write_runs<W: Write>(w: W, segments: &[SummerSegment], samples: &[PosteriorSample]) -> Result<()> {
    let mut out = writer(w, &["draw", "year", "start_day", "length"])?;
    for (i, s) in samples.iter().enumerate() {
        for (seg, states) in segments.iter().zip(&s.states) {
            for ev in crate::generator::detect_implicit(states, &seg.values) {
                out.write_record([i.to_string(), seg.year.to_string(), (ev.start + 1).to_string(), ev.length.to_string()])
                    .map_err(csv_err)?;
            }
        }
    }
    finish(out)
}

/// State paths per draw as `0`/`1` strings, one row per draw and segment.
pub fn write_state_draws<W: Write>(w: W, segments: &[SummerSegment], samples: &[PosteriorSample]) -> Result<()> {
    let mut out = writer(w, &["draw", "year", "states"])?;
    for (i, s) in samples.iter().enumerate() {
        for (seg, st) in segments.iter().zip(&s.states) {
            let bits: String = st.as_slice().iter().map(|x| if x.is_heat_wave() { '1' } else { '0' }).collect();
            out.write_record([i.to_string(), seg.year.to_string(), bits]).map_err(csv_err)?;
        }
    }
    finish(out)
}

pub fn read_state_draws<R: Read>(r: R) -> Result<Vec<(usize, i32, crate::model::StateSequence)>> {
    let mut rd = reader(r, &["draw", "year", "states"])?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bits = rec.get(2).unwrap_or("");
        if !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Parse { line, msg: "states must be a 0/1 string".into() });
        }
        out.push((field(&rec, 0, "draw")?, field(&rec, 1, "year")?, crate::model::StateSequence::from_bits(bits)));
    }
    Ok(out)
}

pub fn write_imputed<W: Write>(w: W, segments: &[SummerSegment], samples: &[PosteriorSample]) -> Result<()> {
    let mut out = writer(w, &["draw", "year", "day_of_season", "value"])?;
    for (i, s) in samples.iter().enumerate() {
        for (seg, imp) in segments.iter().zip(&s.imputed) {
            let days = (0..seg.len()).filter(|&t| seg.missing[t]);
            for (t, v) in days.zip(imp) {
                out.write_record([i.to_string(), seg.year.to_string(), (t + 1).to_string(), fmt_f64(*v)])
                    .map_err(csv_err)?;
            }
        }
    }
    finish(out)
}

pub fn write_trace<W: Write>(w: W, trace: &[f64]) -> Result<()> {
    let mut out = writer(w, &["iteration", "log_posterior"])?;
    for (i, v) in trace.iter().enumerate() {
        out.write_record([(i + 1).to_string(), fmt_f64(*v)]).map_err(csv_err)?;
    }
    finish(out)
}

/// Streaming writer for simulated summers.
pub struct SummerWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> SummerWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        Ok(Self { out: writer(w, &["draw_index", "summer_index", "day", "value", "state"])? })
    }

    pub fn write(&mut self, summer_index: usize, s: &SimulatedSummer) -> Result<()> {
        for (t, (v, st)) in s.values.iter().zip(s.states.as_slice()).enumerate() {
            self.out
                .write_record([
                    s.source_draw.to_string(),
                    summer_index.to_string(),
                    (t + 1).to_string(),
                    fmt_f64(*v),
                    st.index().to_string(),
                ])
                .map_err(csv_err)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        finish(self.out)
    }
}

/// Streaming writer for detected events and per-summer definition
/// summaries.
pub struct EventWriter<W: Write> {
    events: csv::Writer<W>,
    summaries: csv::Writer<W>,
}

impl<W: Write> EventWriter<W> {
    pub fn new(events: W, summaries: W) -> Result<Self> {
        Ok(Self {
            events: writer(events, &["draw_index", "summer_index", "rule", "start_day", "length", "mean_temp", "max_temp"])?,
            summaries: writer(
                summaries,
                &["draw_index", "summer_index", "rule", "n_events", "total_days", "mean_length", "mean_temp"],
            )?,
        })
    }

    pub fn write(&mut self, draw: usize, summer: usize, events: &[HeatWaveEvent], summary: &DefinitionSummary) -> Result<()> {
        for ev in events {
            let max = ev.temps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            self.events
                .write_record([
                    draw.to_string(),
                    summer.to_string(),
                    ev.rule.to_string(),
                    (ev.start + 1).to_string(),
                    ev.length.to_string(),
                    fmt_f64(ev.mean_temp()),
                    fmt_f64(max),
                ])
                .map_err(csv_err)?;
        }
        self.summaries
            .write_record([
                draw.to_string(),
                summer.to_string(),
                summary.rule.to_string(),
                summary.n_events.to_string(),
                summary.total_days.to_string(),
                fmt_f64(summary.mean_length),
                fmt_f64(summary.mean_temp),
            ])
            .map_err(csv_err)?;
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        finish(self.events)?;
        finish(self.summaries)
    }
}

/// Any table of preformatted cells under `header`.
pub fn write_rows<W, I, R>(w: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut out = writer(w, header)?;
    for row in rows {
        out.write_record(row).map_err(csv_err)?;
    }
    finish(out)
}

pub fn write_pmf<W: Write>(w: W, name: &str, pmf: &[(usize, f64)]) -> Result<()> {
    let mut out = writer(w, &[name, "probability"])?;
    for (k, p) in pmf {
        out.write_record([k.to_string(), fmt_f64(*p)]).map_err(csv_err)?;
    }
    finish(out)
}

pub fn write_values<W: Write>(w: W, name: &str, values: &[f64]) -> Result<()> {
    let mut out = writer(w, &[name])?;
    for v in values {
        out.write_record([fmt_f64(*v)]).map_err(csv_err)?;
    }
    finish(out)
}

/// `(lag, quantile, threshold, chi)` rows of χ̂ curves.
pub fn write_chi<W: Write>(w: W, rows: &[(usize, f64, f64, Option<f64>)]) -> Result<()> {
    let mut out = writer(w, &["lag", "quantile", "threshold", "chi"])?;
    for (lag, q, u, c) in rows {
        out.write_record([lag.to_string(), fmt_f64(*q), fmt_f64(*u), fmt_opt(*c)]).map_err(csv_err)?;
    }
    finish(out)
}

pub fn write_pacf<W: Write>(w: W, p: &Pacf) -> Result<()> {
    let mut out = writer(w, &["lag", "pacf", "band_lower", "band_upper"])?;
    for (k, v) in p.values.iter().enumerate() {
        out.write_record([(k + 1).to_string(), fmt_f64(*v), fmt_f64(-p.band), fmt_f64(p.band)]).map_err(csv_err)?;
    }
    finish(out)
}

/// `(quantile, threshold, theta)` rows.
pub fn write_extremal<W: Write>(w: W, rows: &[(f64, f64, Option<f64>)]) -> Result<()> {
    let mut out = writer(w, &["quantile", "threshold", "theta"])?;
    for (q, u, t) in rows {
        out.write_record([fmt_f64(*q), fmt_f64(*u), fmt_opt(*t)]).map_err(csv_err)?;
    }
    finish(out)
}

/// `(x, y)` pairs such as lag scatter or Fréchet-scale data.
pub fn write_pairs<W: Write>(w: W, names: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut out = writer(w, &names)?;
    for (x, y) in rows {
        out.write_record([fmt_f64(*x), fmt_f64(*y)]).map_err(csv_err)?;
    }
    finish(out)
}

pub fn write_ppc<W: Write>(w: W, report: &PPCReport) -> Result<()> {
    let mut out = writer(w, &["statistic", "lower", "observed", "upper", "inside", "n_valid", "n_excluded"])?;
    for r in &report.rows {
        out.write_record([
            r.name.clone(),
            fmt_f64(r.lower),
            fmt_opt(r.observed),
            fmt_f64(r.upper),
            u8::from(r.inside).to_string(),
            r.n_valid.to_string(),
            r.n_excluded.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(out)
}
