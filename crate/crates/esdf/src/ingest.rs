//! Loading, validation, and alignment of the three input time series.
//!
//! CSV formats (UTF-8, comma-separated, ISO-8601 dates):
//! - mobility: `date,rr,gp,pa,ts,wp,re`
//! - cases:    `date,active,recovered,deaths` (raw counts)
//! - index:    `date,close`
//!
//! The aligned dataset joins mobility and epidemic observations on dates,
//! attaches index closes where present, and carries the trailing 5-day
//! mobility means used by the infection regression.

use std::fmt;
use std::path::Path;

use chrono::NaiveDate;

use crate::epidemic::EpidemicState;
use crate::error::{Error, Result};
use crate::mobility::{MobilityVector, MOBILITY_NAMES};

/// Whether mobility files carry percentages (public exports) or fractions
/// (the model's unit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MobilityUnits {
    Percent,
    #[default]
    Fraction,
}

/// Non-fatal events observed while loading or aligning.
#[derive(Debug, Clone)]
pub enum IngestWarning {
    DecreasingConfirmedBeforeCutoff { date: NaiveDate, from: f64, to: f64 },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::DecreasingConfirmedBeforeCutoff { date, from, to } => write!(
                f,
                "cumulative confirmed decreases at {date} ({from} -> {to}); tolerated before the cleaning start date"
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MobilityTimeSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<MobilityVector>,
}

impl MobilityTimeSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<MobilityVector>) -> Result<Self> {
        assert_eq!(dates.len(), values.len());
        check_strictly_increasing(&dates, "mobility series")?;
        Ok(Self { dates, values })
    }

    /// Trailing 5-observation mean per date; `None` until five
    /// observations have accumulated.
    pub fn moving_average(&self) -> Vec<Option<MobilityVector>> {
        self.values
            .iter()
            .enumerate()
            .map(|(j, _)| {
                if j >= 4 {
                    Some(MobilityVector::mean(&self.values[j - 4..=j]))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }
}

#[derive(Debug, Clone)]
pub struct EpidemicTimeSeries {
    pub dates: Vec<NaiveDate>,
    pub states: Vec<EpidemicState>,
    pub population: u64,
}

#[derive(Debug, Clone)]
pub struct IndexTimeSeries {
    pub dates: Vec<NaiveDate>,
    pub closes: Vec<f64>,
}

impl IndexTimeSeries {
    pub fn new(dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self> {
        assert_eq!(dates.len(), closes.len());
        check_strictly_increasing(&dates, "index series")?;
        for (&date, &close) in dates.iter().zip(&closes) {
            if !(close > 0.0) {
                return Err(Error::OutOfRange {
                    context: format!("index close at {date}"),
                    value: close,
                    range: "(0, inf)".into(),
                });
            }
        }
        Ok(Self { dates, closes })
    }

    /// Empty series, for runs without price data.
    pub fn empty() -> Self {
        Self { dates: Vec::new(), closes: Vec::new() }
    }
}

/// Calibration cutoffs recorded on the aligned dataset: the infection
/// regression uses data from `beta_start`, the recovery/death increment
/// fits from `gamma_delta_start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AlignConfig {
    pub beta_start: NaiveDate,
    pub gamma_delta_start: NaiveDate,
}

#[derive(Debug, Clone)]
pub struct AlignedDataset {
    pub dates: Vec<NaiveDate>,
    pub mobility: Vec<MobilityVector>,
    pub mobility_ma: Vec<Option<MobilityVector>>,
    pub epidemic: Vec<EpidemicState>,
    pub index_close: Vec<Option<f64>>,
    pub population: u64,
    pub beta_start: NaiveDate,
    pub gamma_delta_start: NaiveDate,
}

fn check_strictly_increasing(dates: &[NaiveDate], context: &str) -> Result<()> {
    for pair in dates.windows(2) {
        if pair[1] == pair[0] {
            return Err(Error::DuplicateDate {
                context: context.into(),
                date: pair[1].to_string(),
            });
        }
        if pair[1] < pair[0] {
            return Err(Error::UnsortedDates {
                context: context.into(),
                date: pair[1].to_string(),
            });
        }
    }
    Ok(())
}

fn check_daily(dates: &[NaiveDate], context: &str) -> Result<()> {
    for pair in dates.windows(2) {
        if (pair[1] - pair[0]).num_days() != 1 {
            return Err(Error::DateGap {
                context: context.into(),
                date: pair[1].to_string(),
            });
        }
    }
    Ok(())
}

struct CsvTable {
    file: String,
    header: Vec<String>,
    /// (1-based line number, fields)
    rows: Vec<(usize, Vec<String>)>,
}

fn read_csv(path: &Path) -> Result<CsvTable> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: file.clone(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.split(',').map(|s| s.trim().to_lowercase()).collect(),
        None => {
            return Err(Error::Csv {
                file,
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        rows.push((idx + 1, line.split(',').map(|s| s.trim().to_string()).collect()));
    }
    Ok(CsvTable { file, header, rows })
}

impl CsvTable {
    fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                file: self.file.clone(),
                column: name.into(),
            })
    }

    fn date(&self, row: &(usize, Vec<String>), col: usize) -> Result<NaiveDate> {
        let raw = self.field(row, col)?;
        NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|e| Error::Csv {
            file: self.file.clone(),
            line: row.0,
            message: format!("bad date `{raw}`: {e}"),
        })
    }

    fn number(&self, row: &(usize, Vec<String>), col: usize) -> Result<f64> {
        let raw = self.field(row, col)?;
        raw.parse::<f64>().map_err(|_| Error::Csv {
            file: self.file.clone(),
            line: row.0,
            message: format!("unparseable value `{raw}`"),
        })
    }

    fn field<'a>(&self, row: &'a (usize, Vec<String>), col: usize) -> Result<&'a str> {
        row.1.get(col).map(|s| s.as_str()).ok_or_else(|| Error::Csv {
            file: self.file.clone(),
            line: row.0,
            message: format!("missing field {}", col + 1),
        })
    }
}

/// Loads a mobility CSV, converting percentages to fractions when asked.
/// Gaps in the daily dates are rejected rather than imputed.
pub fn load_mobility_csv(path: impl AsRef<Path>, units: MobilityUnits) -> Result<MobilityTimeSeries> {
    let table = read_csv(path.as_ref())?;
    let date_col = table.column("date")?;
    let index_cols: Vec<usize> = MOBILITY_NAMES
        .iter()
        .map(|name| table.column(name))
        .collect::<Result<_>>()?;

    let mut dates = Vec::with_capacity(table.rows.len());
    let mut values = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let date = table.date(row, date_col)?;
        let mut components = [0.0; 6];
        for (k, &col) in index_cols.iter().enumerate() {
            let mut v = table.number(row, col)?;
            if units == MobilityUnits::Percent {
                v /= 100.0;
            }
            components[k] = v;
        }
        dates.push(date);
        values.push(MobilityVector::validated(components, &format!("{} line {}", table.file, row.0))?);
    }

    let series = MobilityTimeSeries::new(dates, values)?;
    check_daily(&series.dates, "mobility series")?;
    Ok(series)
}

/// Loads raw case counts and converts them to population fractions.
/// Decreasing cumulative confirmed counts are tolerated with a warning
/// before `cleaning_start` and rejected after it (strict everywhere when
/// `None`).
pub fn load_cases_csv(
    path: impl AsRef<Path>,
    population: u64,
    cleaning_start: Option<NaiveDate>,
) -> Result<(EpidemicTimeSeries, Vec<IngestWarning>)> {
    assert!(population > 0, "population must be positive");
    let table = read_csv(path.as_ref())?;
    let date_col = table.column("date")?;
    let active_col = table.column("active")?;
    let recovered_col = table.column("recovered")?;
    let deaths_col = table.column("deaths")?;

    let pop = population as f64;
    let mut dates = Vec::with_capacity(table.rows.len());
    let mut states = Vec::with_capacity(table.rows.len());
    let mut warnings = Vec::new();
    let mut prev_confirmed: Option<f64> = None;

    for row in &table.rows {
        let date = table.date(row, date_col)?;
        let active = table.number(row, active_col)?;
        let recovered = table.number(row, recovered_col)?;
        let deaths = table.number(row, deaths_col)?;
        for (name, v) in [("active", active), ("recovered", recovered), ("deaths", deaths)] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::OutOfRange {
                    context: format!("{} line {} column {name}", table.file, row.0),
                    value: v,
                    range: "[0, population)".into(),
                });
            }
        }
        let confirmed = active + recovered + deaths;
        if confirmed >= pop {
            return Err(Error::OutOfRange {
                context: format!("{} line {}: confirmed counts", table.file, row.0),
                value: confirmed,
                range: format!("[0, {population})"),
            });
        }
        if let Some(prev) = prev_confirmed {
            if confirmed < prev {
                let strict = cleaning_start.map_or(true, |cutoff| date >= cutoff);
                if strict {
                    return Err(Error::NonMonotoneConfirmed { date: date.to_string() });
                }
                warnings.push(IngestWarning::DecreasingConfirmedBeforeCutoff {
                    date,
                    from: prev,
                    to: confirmed,
                });
            }
        }
        prev_confirmed = Some(confirmed);

        let i = active / pop;
        let r = recovered / pop;
        let d = deaths / pop;
        dates.push(date);
        states.push(EpidemicState { s: 1.0 - i - r - d, i, r, d });
    }

    check_strictly_increasing(&dates, "cases series")?;
    check_daily(&dates, "cases series")?;
    Ok((EpidemicTimeSeries { dates, states, population }, warnings))
}

/// Loads index closing prices; dates only need to be strictly increasing
/// (non-trading days are simply absent).
pub fn load_index_csv(path: impl AsRef<Path>) -> Result<IndexTimeSeries> {
    let table = read_csv(path.as_ref())?;
    let date_col = table.column("date")?;
    let close_col = table.column("close")?;
    let mut dates = Vec::with_capacity(table.rows.len());
    let mut closes = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        dates.push(table.date(row, date_col)?);
        closes.push(table.number(row, close_col)?);
    }
    IndexTimeSeries::new(dates, closes)
}

/// Inner-joins mobility and epidemic observations over the overlap of
/// their date ranges, attaches index closes where present, and records
/// the calibration cutoffs.
pub fn align(
    mobility: &MobilityTimeSeries,
    epidemic: &EpidemicTimeSeries,
    index: &IndexTimeSeries,
    config: AlignConfig,
) -> Result<AlignedDataset> {
    let (Some(&mob_first), Some(&mob_last)) = (mobility.dates.first(), mobility.dates.last()) else {
        return Err(Error::InsufficientOverlap { days: 0, required: 10 });
    };
    let (Some(&epi_first), Some(&epi_last)) = (epidemic.dates.first(), epidemic.dates.last()) else {
        return Err(Error::InsufficientOverlap { days: 0, required: 10 });
    };
    let start = mob_first.max(epi_first);
    let end = mob_last.min(epi_last);
    let overlap = (end - start).num_days() + 1;
    if overlap < 10 {
        return Err(Error::InsufficientOverlap { days: overlap.max(0), required: 10 });
    }

    let ma = mobility.moving_average();
    let mut dates = Vec::new();
    let mut out_mobility = Vec::new();
    let mut out_ma = Vec::new();
    let mut out_epidemic = Vec::new();
    let mut out_close = Vec::new();

    for (k, &date) in epidemic.dates.iter().enumerate() {
        if date < start || date > end {
            continue;
        }
        let j = mobility
            .index_of(date)
            .ok_or_else(|| Error::MissingMobility { date: date.to_string() })?;
        dates.push(date);
        out_mobility.push(mobility.values[j]);
        out_ma.push(ma[j]);
        out_epidemic.push(epidemic.states[k]);
        let close = index
            .dates
            .binary_search(&date)
            .ok()
            .map(|pos| index.closes[pos]);
        out_close.push(close);
    }

    Ok(AlignedDataset {
        dates,
        mobility: out_mobility,
        mobility_ma: out_ma,
        epidemic: out_epidemic,
        index_close: out_close,
        population: epidemic.population,
        beta_start: config.beta_start,
        gamma_delta_start: config.gamma_delta_start,
    })
}

impl AlignedDataset {
    /// Epidemic observations as a standalone series (for log-odds
    /// extraction).
    pub fn epidemic_series(&self) -> EpidemicTimeSeries {
        EpidemicTimeSeries {
            dates: self.dates.clone(),
            states: self.epidemic.clone(),
            population: self.population,
        }
    }

    /// Canonical CSV form:
    /// `date,rr,...,re,ma_rr,...,ma_re,s,i,r,d,close` with empty fields
    /// for missing moving averages and closes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,rr,gp,pa,ts,wp,re,ma_rr,ma_gp,ma_pa,ma_ts,ma_wp,ma_re,s,i,r,d,close\n");
        for k in 0..self.dates.len() {
            out.push_str(&self.dates[k].to_string());
            for v in self.mobility[k].0 {
                out.push(',');
                out.push_str(&format_f64(v));
            }
            match &self.mobility_ma[k] {
                Some(ma) => {
                    for v in ma.0 {
                        out.push(',');
                        out.push_str(&format_f64(v));
                    }
                }
                None => out.push_str(",,,,,,"),
            }
            let e = &self.epidemic[k];
            for v in [e.s, e.i, e.r, e.d] {
                out.push(',');
                out.push_str(&format_f64(v));
            }
            out.push(',');
            if let Some(close) = self.index_close[k] {
                out.push_str(&format_f64(close));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_csv()).map_err(|source| Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        })
    }

    /// Reloads the canonical CSV form. The calibration cutoffs are
    /// configuration, not data, so they are supplied by the caller.
    pub fn from_csv(text: &str, population: u64, config: AlignConfig) -> Result<AlignedDataset> {
        let mut dates = Vec::new();
        let mut mobility = Vec::new();
        let mut mobility_ma = Vec::new();
        let mut epidemic = Vec::new();
        let mut index_close = Vec::new();

        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let fail = |message: String| Error::Csv {
                file: "<aligned csv>".into(),
                line: idx + 1,
                message,
            };
            if fields.len() != 18 {
                return Err(fail(format!("expected 18 fields, got {}", fields.len())));
            }
            let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d")
                .map_err(|e| fail(format!("bad date `{}`: {e}", fields[0])))?;
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| fail(format!("unparseable value `{s}`")))
            };
            let mut mob = [0.0; 6];
            for k in 0..6 {
                mob[k] = num(fields[1 + k])?;
            }
            let ma = if fields[7].is_empty() {
                None
            } else {
                let mut v = [0.0; 6];
                for k in 0..6 {
                    v[k] = num(fields[7 + k])?;
                }
                Some(MobilityVector(v))
            };
            let state = EpidemicState {
                s: num(fields[13])?,
                i: num(fields[14])?,
                r: num(fields[15])?,
                d: num(fields[16])?,
            };
            let close = if fields[17].is_empty() { None } else { Some(num(fields[17])?) };

            dates.push(date);
            mobility.push(MobilityVector(mob));
            mobility_ma.push(ma);
            epidemic.push(state);
            index_close.push(close);
        }

        check_strictly_increasing(&dates, "aligned dataset")?;
        Ok(AlignedDataset {
            dates,
            mobility,
            mobility_ma,
            epidemic,
            index_close,
            population,
            beta_start: config.beta_start,
            gamma_delta_start: config.gamma_delta_start,
        })
    }
}

/// Shortest round-trip decimal form; reparsing reproduces the exact bits.
pub(crate) fn format_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if s.ends_with(".0") {
        s.truncate(s.len() - 2);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn write_tmp(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("esdf-ingest-{name}-{}", std::process::id()));
        std::fs::write(&path, contents).unwrap();
        path
    }

    fn daily_mobility(start: &str, rows: &[[f64; 6]]) -> MobilityTimeSeries {
        let d0 = date(start);
        MobilityTimeSeries::new(
            (0..rows.len() as i64).map(|k| d0 + chrono::Duration::days(k)).collect(),
            rows.iter().map(|r| MobilityVector(*r)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn loads_single_baseline_row() {
        let path = write_tmp("base", "date,rr,gp,pa,ts,wp,re\n2020-03-01,0,0,0,0,0,0\n");
        let series = load_mobility_csv(&path, MobilityUnits::Fraction).unwrap();
        assert_eq!(series.values, vec![MobilityVector::ZERO]);
    }

    #[test]
    fn stores_table_row_exactly_and_converts_percent() {
        let body = "date,rr,gp,pa,ts,wp,re\n2020-05-06,-30,-7,6,-42,-40,15\n";
        let path = write_tmp("pct", body);
        let series = load_mobility_csv(&path, MobilityUnits::Percent).unwrap();
        assert_eq!(series.values[0], MobilityVector([-0.3, -0.07, 0.06, -0.42, -0.4, 0.15]));
    }

    #[test]
    fn rejects_out_of_range_and_duplicate_and_missing_column() {
        let path = write_tmp("range", "date,rr,gp,pa,ts,wp,re\n2020-03-01,1.5,0,0,0,0,0\n");
        assert!(matches!(
            load_mobility_csv(&path, MobilityUnits::Fraction),
            Err(Error::OutOfRange { .. })
        ));

        let path = write_tmp(
            "dup",
            "date,rr,gp,pa,ts,wp,re\n2020-03-01,0,0,0,0,0,0\n2020-03-01,0,0,0,0,0,0\n",
        );
        assert!(matches!(
            load_mobility_csv(&path, MobilityUnits::Fraction),
            Err(Error::DuplicateDate { .. })
        ));

        let path = write_tmp("col", "date,rr,gp,pa,ts,wp\n2020-03-01,0,0,0,0,0\n");
        assert!(matches!(
            load_mobility_csv(&path, MobilityUnits::Fraction),
            Err(Error::MissingColumn { .. })
        ));
    }

    #[test]
    fn cases_fractions_are_counts_over_population() {
        let path = write_tmp("cases", "date,active,recovered,deaths\n2020-03-01,10,5,1\n");
        let (series, warnings) = load_cases_csv(&path, 100, None).unwrap();
        assert!(warnings.is_empty());
        let st = series.states[0];
        assert_eq!((st.s, st.i, st.r, st.d), (0.84, 0.10, 0.05, 0.01));
    }

    #[test]
    fn empty_epidemic_is_all_susceptible() {
        let path = write_tmp("zero", "date,active,recovered,deaths\n2020-03-01,0,0,0\n");
        let (series, _) = load_cases_csv(&path, 100, None).unwrap();
        assert_eq!(series.states[0], EpidemicState { s: 1.0, i: 0.0, r: 0.0, d: 0.0 });
    }

    #[test]
    fn decreasing_confirmed_is_error_after_cutoff_warning_before() {
        let body = "date,active,recovered,deaths\n2020-03-01,10,5,1\n2020-03-02,8,5,1\n";
        let path = write_tmp("dec", body);
        assert!(matches!(
            load_cases_csv(&path, 100, None),
            Err(Error::NonMonotoneConfirmed { .. })
        ));
        let (_, warnings) = load_cases_csv(&path, 100, Some(date("2020-03-19"))).unwrap();
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn align_computes_trailing_means_and_joins_closes() {
        let mobility = daily_mobility(
            "2020-03-01",
            &(0..12)
                .map(|k| {
                    let mut row = [0.0; 6];
                    row[0] = 0.1 * (k as f64).min(4.0);
                    row
                })
                .collect::<Vec<_>>(),
        );
        let d0 = date("2020-03-01");
        let epidemic = EpidemicTimeSeries {
            dates: (0..12).map(|k| d0 + chrono::Duration::days(k)).collect(),
            states: vec![EpidemicState { s: 0.97, i: 0.02, r: 0.008, d: 0.002 }; 12],
            population: 1000,
        };
        let index = IndexTimeSeries::new(vec![date("2020-03-03")], vec![2875.8]).unwrap();
        let config = AlignConfig {
            beta_start: date("2020-03-01"),
            gamma_delta_start: date("2020-03-05"),
        };
        let ds = align(&mobility, &epidemic, &index, config).unwrap();

        assert_eq!(ds.dates.len(), 12);
        assert!(ds.mobility_ma[3].is_none());
        // Components 0.0, 0.1, 0.2, 0.3, 0.4 average to 0.2 at the 5th date.
        assert!((ds.mobility_ma[4].unwrap().0[0] - 0.2).abs() < 1e-15);
        assert_eq!(ds.index_close[2], Some(2875.8));
        assert_eq!(ds.index_close[0], None);
    }

    #[test]
    fn align_requires_overlap_and_mobility_cover() {
        let mobility = daily_mobility("2020-03-01", &vec![[0.0; 6]; 12]);
        let d0 = date("2020-06-01");
        let epidemic = EpidemicTimeSeries {
            dates: (0..12).map(|k| d0 + chrono::Duration::days(k)).collect(),
            states: vec![EpidemicState { s: 0.97, i: 0.02, r: 0.008, d: 0.002 }; 12],
            population: 1000,
        };
        let config = AlignConfig {
            beta_start: date("2020-03-01"),
            gamma_delta_start: date("2020-03-01"),
        };
        assert!(matches!(
            align(&mobility, &epidemic, &IndexTimeSeries::empty(), config),
            Err(Error::InsufficientOverlap { .. })
        ));

        // A mobility series with an interior hole: the epidemic date on the
        // hole has no observation.
        let dates: Vec<NaiveDate> = (0..12)
            .filter(|&k| k != 6)
            .map(|k| date("2020-03-01") + chrono::Duration::days(k))
            .collect();
        let holed = MobilityTimeSeries::new(dates, vec![MobilityVector::ZERO; 11]).unwrap();
        let d0 = date("2020-03-01");
        let epidemic = EpidemicTimeSeries {
            dates: (0..12).map(|k| d0 + chrono::Duration::days(k)).collect(),
            states: vec![EpidemicState { s: 0.97, i: 0.02, r: 0.008, d: 0.002 }; 12],
            population: 1000,
        };
        assert!(matches!(
            align(&holed, &epidemic, &IndexTimeSeries::empty(), config),
            Err(Error::MissingMobility { .. })
        ));
    }

    #[test]
    fn constant_mobility_has_constant_moving_average() {
        let v = [0.07, 0.02, 0.12, 0.02, 0.02, -0.01];
        let mobility = daily_mobility("2020-03-01", &vec![v; 9]);
        let ma = mobility.moving_average();
        assert!(ma[..4].iter().all(Option::is_none));
        for entry in &ma[4..] {
            assert_eq!(entry.unwrap(), MobilityVector(v));
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mobility = daily_mobility(
            "2020-03-01",
            &(0..15)
                .map(|k| {
                    let x = k as f64;
                    [
                        (x * 0.013).sin() * 0.3,
                        -0.07 + 0.001 * x,
                        0.06,
                        -0.42 + 0.01 * x,
                        -0.4,
                        0.15 - 0.002 * x,
                    ]
                })
                .collect::<Vec<_>>(),
        );
        let d0 = date("2020-03-01");
        let epidemic = EpidemicTimeSeries {
            dates: (0..15).map(|k| d0 + chrono::Duration::days(k)).collect(),
            states: (0..15)
                .map(|k| {
                    let i = 0.02 + 0.001 * k as f64;
                    let r = 0.008 + 0.0005 * k as f64;
                    let d = 0.002 + 0.0001 * k as f64;
                    EpidemicState { s: 1.0 - i - r - d, i, r, d }
                })
                .collect(),
            population: 331_000_000,
        };
        let index = IndexTimeSeries::new(
            vec![date("2020-03-02"), date("2020-03-04")],
            vec![2919.7, 2875.8123456789],
        )
        .unwrap();
        let config = AlignConfig {
            beta_start: date("2020-03-01"),
            gamma_delta_start: date("2020-03-05"),
        };
        let ds = align(&mobility, &epidemic, &index, config).unwrap();
        let text = ds.to_csv();
        let back = AlignedDataset::from_csv(&text, ds.population, config).unwrap();

        assert_eq!(ds.dates, back.dates);
        for k in 0..ds.dates.len() {
            assert_eq!(ds.mobility[k].0.map(f64::to_bits), back.mobility[k].0.map(f64::to_bits));
            assert_eq!(
                ds.mobility_ma[k].map(|v| v.0.map(f64::to_bits)),
                back.mobility_ma[k].map(|v| v.0.map(f64::to_bits))
            );
            assert_eq!(ds.epidemic[k].s.to_bits(), back.epidemic[k].s.to_bits());
            assert_eq!(ds.index_close[k].map(f64::to_bits), back.index_close[k].map(f64::to_bits));
        }
    }

    #[test]
    fn moving_average_is_linear() {
        let rows_a: Vec<[f64; 6]> = (0..10).map(|k| [0.01 * k as f64; 6]).collect();
        let rows_b: Vec<[f64; 6]> = (0..10).map(|k| [((k * k) % 7) as f64 * 0.02; 6]).collect();
        let a = daily_mobility("2020-03-01", &rows_a);
        let b = daily_mobility("2020-03-01", &rows_b);
        let sum = daily_mobility(
            "2020-03-01",
            &(0..10)
                .map(|k| {
                    let mut row = [0.0; 6];
                    for c in 0..6 {
                        row[c] = rows_a[k][c] + rows_b[k][c];
                    }
                    row
                })
                .collect::<Vec<_>>(),
        );
        let (ma_a, ma_b, ma_sum) = (a.moving_average(), b.moving_average(), sum.moving_average());
        for k in 4..10 {
            for c in 0..6 {
                let lhs = ma_sum[k].unwrap().0[c];
                let rhs = ma_a[k].unwrap().0[c] + ma_b[k].unwrap().0[c];
                assert!((lhs - rhs).abs() < 1e-15);
            }
        }
    }
}
