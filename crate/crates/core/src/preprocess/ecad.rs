use chrono::{Datelike, NaiveDate};

use crate::model::SummerSegment;
use crate::{Error, Result};

/// Days from June 1 to August 31.
pub const JJA_DAYS: usize = 92;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quality {
    Valid,
    Suspect,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawStationSeries {
    pub dates: Vec<NaiveDate>,
    /// Daily maximum in °C; `NaN` where missing.
    pub tx: Vec<f64>,
    pub quality: Vec<Quality>,
}

impl RawStationSeries {
    pub fn n_suspect(&self) -> usize {
        self.quality.iter().filter(|&&q| q == Quality::Suspect).count()
    }

    pub fn n_missing(&self) -> usize {
        self.quality.iter().filter(|&&q| q == Quality::Missing).count()
    }

    /// Marks suspect values as missing.
    pub fn drop_suspect(&mut self) {
        for (q, v) in self.quality.iter_mut().zip(&mut self.tx) {
            if *q == Quality::Suspect {
                *q = Quality::Missing;
                *v = f64::NAN;
            }
        }
    }

    fn push(&mut self, line: usize, date: NaiveDate, tx: f64, q: Quality) -> Result<()> {
        if let Some(last) = self.dates.last() {
            if date <= *last {
                return Err(Error::Parse { line, msg: format!("date {date} does not increase") });
            }
        }
        self.dates.push(date);
        self.tx.push(if q == Quality::Missing { f64::NAN } else { tx });
        self.quality.push(q);
        Ok(())
    }
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    let s = s.trim();
    let fmt = if s.contains('-') { "%Y-%m-%d" } else { "%Y%m%d" };
    NaiveDate::parse_from_str(s, fmt).map_err(|e| Error::Parse { line, msg: format!("bad date {s:?}: {e}") })
}

fn parse_int(s: &str, what: &str, line: usize) -> Result<i64> {
    s.trim().parse().map_err(|_| Error::Parse { line, msg: format!("non-numeric {what} field {:?}", s.trim()) })
}

/// ECA&D daily TX text: free-text header, a column line starting with
/// `SOUID` or `STAID`, then comma-separated rows. TX is in tenths of °C;
/// `Q_TX` of 1 is suspect, 9 missing; TX of -9999 is missing. Suspect values
/// are kept.
pub fn parse_ecad(text: &str) -> Result<RawStationSeries> {
    let mut lines = text.lines().enumerate();
    let (header_line, cols) = loop {
        let Some((i, l)) = lines.next() else {
            return Err(Error::Parse { line: 0, msg: "no SOUID/STAID column header found".into() });
        };
        let t = l.trim_start();
        if t.starts_with("SOUID") || t.starts_with("STAID") {
            break (i + 1, t.split(',').map(|c| c.trim().to_ascii_uppercase()).collect::<Vec<_>>());
        }
    };
    let find = |name: &str| {
        cols.iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse { line: header_line, msg: format!("column {name} missing from header") })
    };
    let (di, ti, qi) = (find("DATE")?, find("TX")?, find("Q_TX")?);
    let mut out = RawStationSeries::default();
    for (i, l) in lines {
        let line = i + 1;
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() < cols.len() {
            return Err(Error::Parse { line, msg: format!("expected {} fields, found {}", cols.len(), f.len()) });
        }
        let date = parse_date(f[di], line)?;
        let tx = parse_int(f[ti], "TX", line)?;
        let q = match parse_int(f[qi], "Q_TX", line)? {
            0 => Quality::Valid,
            1 => Quality::Suspect,
            9 => Quality::Missing,
            other => return Err(Error::Parse { line, msg: format!("unknown Q_TX flag {other}") }),
        };
        let q = if tx == -9999 { Quality::Missing } else { q };
        out.push(line, date, tx as f64 / 10.0, q)?;
    }
    Ok(out)
}

/// Plain `date,value` CSV with values in °C. A header row is skipped when
/// its first field is not a date; empty, `NA` and `NaN` values are missing.
pub fn parse_two_column_csv(text: &str) -> Result<RawStationSeries> {
    let mut out = RawStationSeries::default();
    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = t.split(',').map(str::trim).collect();
        if f.len() != 2 {
            return Err(Error::Parse { line, msg: format!("expected 2 fields, found {}", f.len()) });
        }
        if out.dates.is_empty() && !f[0].starts_with(|c: char| c.is_ascii_digit()) {
            continue;
        }
        let date = parse_date(f[0], line)?;
        let (v, q) = match f[1] {
            "" | "NA" | "NaN" | "nan" => (f64::NAN, Quality::Missing),
            s => {
                let v: f64 = s.parse().map_err(|_| Error::Parse { line, msg: format!("non-numeric value {s:?}") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { line, msg: format!("non-finite value {s:?}") });
                }
                (v, Quality::Valid)
            }
        };
        out.push(line, date, v, q)?;
    }
    Ok(out)
}

/// ECA&D text when a `SOUID`/`STAID` column line is present, otherwise the
/// 2-column CSV.
pub fn parse_series(text: &str) -> Result<RawStationSeries> {
    let is_ecad = text.lines().any(|l| {
        let t = l.trim_start();
        t.starts_with("SOUID") || t.starts_with("STAID")
    });
    if is_ecad {
        parse_ecad(text)
    } else {
        parse_two_column_csv(text)
    }
}

/// One 92-day segment (June 1 to August 31) per year in
/// `year_from..=year_to`. Dates absent from the series are missing. Returns
/// the segments and a warning for each year with more than half its days
/// missing.
pub fn extract_jja(series: &RawStationSeries, year_from: i32, year_to: i32) -> Result<(Vec<SummerSegment>, Vec<String>)> {
    if year_from > year_to {
        return Err(Error::InvalidInput(format!("year range {year_from}..{year_to} is empty")));
    }
    let mut segments = Vec::new();
    let mut warnings = Vec::new();
    for year in year_from..=year_to {
        let start = NaiveDate::from_ymd_opt(year, 6, 1)
            .ok_or_else(|| Error::InvalidInput(format!("year {year} out of range")))?;
        let mut values = vec![f64::NAN; JJA_DAYS];
        let mut missing = vec![true; JJA_DAYS];
        let first = series.dates.partition_point(|d| *d < start);
        for (d, (&v, &q)) in series.dates[first..].iter().zip(series.tx[first..].iter().zip(&series.quality[first..])) {
            let offset = (*d - start).num_days() as usize;
            if offset >= JJA_DAYS {
                break;
            }
            if q != Quality::Missing {
                values[offset] = v;
                missing[offset] = false;
            }
        }
        debug_assert_eq!((start + chrono::Days::new(JJA_DAYS as u64 - 1)).month(), 8);
        let n_missing = missing.iter().filter(|&&m| m).count();
        if 2 * n_missing > JJA_DAYS {
            warnings.push(format!("{year}: {n_missing} of {JJA_DAYS} JJA days missing"));
        }
        segments.push(SummerSegment::new(year, values, missing)?);
    }
    Ok((segments, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "EUROPEAN CLIMATE ASSESSMENT & DATASET (ECA&D)\n\
        FILE FORMAT (MISSING VALUE CODE IS -9999):\n\
        \n\
        SOUID,    DATE,   TX, Q_TX\n\
        111446,20030810,  394,    0\n\
        111446,20030811,  371,    1\n\
        111446,20030812,  360,    9\n\
        111446,20030813,-9999,    0\n";

    #[test]
    fn ecad_rows() {
        let s = parse_ecad(SAMPLE).unwrap();
        assert_eq!(s.dates[0], NaiveDate::from_ymd_opt(2003, 8, 10).unwrap());
        assert_eq!(s.tx[0], 39.4);
        assert_eq!(s.quality, vec![Quality::Valid, Quality::Suspect, Quality::Missing, Quality::Missing]);
        assert!(s.tx[2].is_nan() && s.tx[3].is_nan());
        assert_eq!(s.n_suspect(), 1);
    }

    #[test]
    fn ecad_errors_carry_line_numbers() {
        let bad = SAMPLE.replace("20030811", "2003O811");
        match parse_ecad(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let bad = SAMPLE.replace("  371", "  x71");
        assert!(matches!(parse_ecad(&bad), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn jja_has_92_days_in_leap_and_common_years() {
        let mut s = RawStationSeries::default();
        let mut d = NaiveDate::from_ymd_opt(2003, 1, 1).unwrap();
        let mut line = 0;
        while d.year() <= 2004 {
            line += 1;
            s.push(line, d, 20.0, Quality::Valid).unwrap();
            d = d.succ_opt().unwrap();
        }
        let (segs, warn) = extract_jja(&s, 2003, 2005).unwrap();
        assert_eq!(segs.len(), 3);
        assert!(segs.iter().all(|g| g.len() == 92));
        assert_eq!(segs[0].n_missing() + segs[1].n_missing(), 0);
        assert_eq!(segs[2].n_missing(), 92);
        assert_eq!(warn.len(), 1);
    }

    #[test]
    fn two_column_csv() {
        let s = parse_series("date,tx\n2003-06-01,25.5\n2003-06-02,NA\n").unwrap();
        assert_eq!(s.tx[0], 25.5);
        assert_eq!(s.quality[1], Quality::Missing);
    }
}
