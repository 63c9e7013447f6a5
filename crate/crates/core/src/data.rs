//! Datasets: the two-integer artificial task, monthly incidence series, and
//! lag-feature construction for outbreak forecasting.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;

use crate::binarizer::{FeatureKind, Schema};
use crate::error::{Error, Result};

/// Monthly incidence per 100,000 population above which a month counts as
/// an outbreak (strictly greater).
pub const OUTBREAK_THRESHOLD: f64 = 20.0;

/// Pseudo-region holding the all-region total.
pub const TOTAL: &str = "Total";

/// Calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period {
    pub year: i32,
    pub month: u32,
}

impl Period {
    pub fn new(year: i32, month: u32) -> Self {
        Self { year, month }
    }

    fn index(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    fn from_index(i: i64) -> Self {
        Self { year: i.div_euclid(12) as i32, month: (i.rem_euclid(12) + 1) as u32 }
    }

    /// The period `months` months earlier.
    pub fn back(self, months: i64) -> Self {
        Self::from_index(self.index() - months)
    }
}

impl std::fmt::Display for Period {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{:02}", self.year, self.month)
    }
}

/// Real-valued feature rows with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub names: Vec<String>,
    pub kinds: Vec<FeatureKind>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// Month of each row, for time-ordered splits.
    pub periods: Option<Vec<Period>>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn schema(&self) -> Schema {
        Schema { names: self.names.clone(), kinds: self.kinds.clone() }
    }

    pub fn class_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            periods: self.periods.as_ref().map(|p| indices.iter().map(|&i| p[i]).collect()),
        }
    }

    /// Rows before `year` for training, rows of `year` for testing.
    pub fn split_at_year(&self, year: i32) -> Result<(LabeledDataset, LabeledDataset)> {
        let periods = self.periods.as_ref().ok_or_else(|| Error::Data("dataset has no year/month columns".into()))?;
        let train: Vec<usize> = (0..self.len()).filter(|&i| periods[i].year < year).collect();
        let test: Vec<usize> = (0..self.len()).filter(|&i| periods[i].year == year).collect();
        if train.is_empty() || test.is_empty() {
            return Err(Error::Data(format!("no rows on one side of the {year} split")));
        }
        Ok((self.subset(&train), self.subset(&test)))
    }

    /// Mark the named columns as categorical.
    pub fn set_categorical(&mut self, columns: &[String]) -> Result<()> {
        for col in columns {
            let f = self
                .names
                .iter()
                .position(|n| n == col)
                .ok_or_else(|| Error::Data(format!("unknown column `{col}`")))?;
            self.kinds[f] = FeatureKind::Categorical;
        }
        Ok(())
    }

    /// Read a header-first CSV. `label` names the label column; `year` and
    /// `month` columns, when both present, become row periods instead of
    /// features.
    pub fn read_csv<R: Read>(reader: R, label: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let label_col = headers
            .iter()
            .position(|h| h == label)
            .ok_or_else(|| Error::Parse { line: 1, message: format!("missing column `{label}`") })?;
        let year_col = headers.iter().position(|h| h == "year");
        let month_col = headers.iter().position(|h| h == "month");
        let period_cols = year_col.zip(month_col);
        let feature_cols: Vec<usize> = (0..headers.len())
            .filter(|&c| c != label_col && period_cols.is_none_or(|(y, m)| c != y && c != m))
            .collect();

        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut periods = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record?;
            let field = |c: usize| record.get(c).unwrap_or("");
            let number = |c: usize| -> Result<f64> {
                let v: f64 = field(c).parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{}` is not a number in column `{}`", field(c), headers[c]),
                })?;
                if v.is_nan() {
                    return Err(Error::Parse { line, message: format!("missing value in `{}`", headers[c]) });
                }
                Ok(v)
            };
            rows.push(feature_cols.iter().map(|&c| number(c)).collect::<Result<Vec<_>>>()?);
            let y: usize = field(label_col).parse().map_err(|_| Error::Parse {
                line,
                message: format!("label `{}` is not a class index", field(label_col)),
            })?;
            labels.push(y);
            if let Some((yc, mc)) = period_cols {
                let year = field(yc).parse().map_err(|_| Error::Parse { line, message: "bad year".into() })?;
                let month: u32 = field(mc).parse().map_err(|_| Error::Parse { line, message: "bad month".into() })?;
                if !(1..=12).contains(&month) {
                    return Err(Error::Parse { line, message: format!("month {month} out of range") });
                }
                periods.push(Period::new(year, month));
            }
        }
        let names: Vec<String> = feature_cols.iter().map(|&c| headers[c].clone()).collect();
        Ok(Self {
            kinds: vec![FeatureKind::Continuous; names.len()],
            names,
            rows,
            labels,
            periods: period_cols.map(|_| periods),
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = Vec::new();
        if self.periods.is_some() {
            header.extend(["year", "month"]);
        }
        header.extend(self.names.iter().map(String::as_str));
        header.push("label");
        w.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec: Vec<String> = Vec::with_capacity(header.len());
            if let Some(p) = &self.periods {
                rec.push(p[i].year.to_string());
                rec.push(p[i].month.to_string());
            }
            rec.extend(row.iter().map(|v| v.to_string()));
            rec.push(self.labels[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Class of the artificial task: 1 iff `x1 + x2 == 9`.
pub fn artificial_label(x1: u32, x2: u32) -> usize {
    usize::from(x1 + x2 == 9)
}

/// Samples of the two-integer task, `0 <= x1 <= 4`, `0 <= x2 <= 5`.
///
/// With `positive_fraction = None` pairs are uniform over the 30 cells, so
/// class 1 occurs with probability 1/30. With `Some(p)` the only positive
/// cell `(4, 5)` is drawn with probability `p` and the remaining draws are
/// uniform over the 29 negative cells.
pub fn generate_artificial<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    positive_fraction: Option<f64>,
) -> LabeledDataset {
    let mut rows = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let (x1, x2) = match positive_fraction {
            None => (rng.gen_range(0..=4), rng.gen_range(0..=5)),
            Some(p) if rng.gen::<f64>() < p => (4, 5),
            Some(_) => loop {
                let pair = (rng.gen_range(0..=4), rng.gen_range(0..=5));
                if artificial_label(pair.0, pair.1) == 0 {
                    break pair;
                }
            },
        };
        rows.push(vec![f64::from(x1), f64::from(x2)]);
        labels.push(artificial_label(x1, x2));
    }
    LabeledDataset {
        names: vec!["x1".into(), "x2".into()],
        kinds: vec![FeatureKind::Categorical; 2],
        rows,
        labels,
        periods: None,
    }
}

/// 1 iff `incidence` strictly exceeds [`OUTBREAK_THRESHOLD`].
pub fn label_outbreak(incidence: f64) -> Result<usize> {
    if incidence.is_nan() || incidence < 0.0 {
        return Err(Error::Data(format!("incidence must be ≥ 0, got {incidence}")));
    }
    Ok(usize::from(incidence > OUTBREAK_THRESHOLD))
}

/// Monthly incidence rates per region.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesTable {
    series: BTreeMap<String, BTreeMap<Period, f64>>,
}

impl SeriesTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert one cell; fails on a duplicate key or a negative rate.
    pub fn insert(&mut self, region: &str, period: Period, rate: f64) -> Result<()> {
        if rate.is_nan() || rate < 0.0 {
            return Err(Error::Data(format!("{region} {period}: rate must be ≥ 0, got {rate}")));
        }
        let cells = self.series.entry(region.to_string()).or_default();
        if cells.insert(period, rate).is_some() {
            return Err(Error::Data(format!("duplicate cell ({region}, {period})")));
        }
        Ok(())
    }

    pub fn regions(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    pub fn contains_region(&self, region: &str) -> bool {
        self.series.contains_key(region)
    }

    pub fn get(&self, region: &str, period: Period) -> Option<f64> {
        self.series.get(region)?.get(&period).copied()
    }

    pub fn len(&self) -> usize {
        self.series.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Periods of `region` in order.
    pub fn periods(&self, region: &str) -> Vec<Period> {
        self.series.get(region).map(|c| c.keys().copied().collect()).unwrap_or_default()
    }

    /// Add a [`TOTAL`] series as the sum of every regional rate per month,
    /// unless one is already present.
    pub fn ensure_total(&mut self) {
        if self.series.contains_key(TOTAL) {
            return;
        }
        let mut total: BTreeMap<Period, f64> = BTreeMap::new();
        for cells in self.series.values() {
            for (&p, &v) in cells {
                *total.entry(p).or_default() += v;
            }
        }
        self.series.insert(TOTAL.to_string(), total);
    }

    /// Every region must cover a contiguous run of months.
    pub fn check_contiguous(&self) -> Result<()> {
        for (region, cells) in &self.series {
            for pair in cells.keys().collect::<Vec<_>>().windows(2) {
                let (a, b) = (*pair[0], *pair[1]);
                if b.index() != a.index() + 1 {
                    return Err(Error::Data(format!(
                        "region {region}: gap between {a} and {b} (missing {})",
                        Period::from_index(a.index() + 1)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["region", "year", "month", "rate"])?;
        for (region, cells) in &self.series {
            for (p, v) in cells {
                w.write_record([region.clone(), p.year.to_string(), p.month.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Parse `region,year,month,rate` rows into a validated [`SeriesTable`].
pub fn load_series<R: Read>(reader: R) -> Result<SeriesTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { line: 1, message: format!("missing column `{name}`") })
    };
    let (rc, yc, mc, vc) = (col("region")?, col("year")?, col("month")?, col("rate")?);
    let mut table = SeriesTable::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let bad = |what: &str, c: usize| Error::Parse { line, message: format!("{what} `{}` is not valid", field(c)) };
        let year: i32 = field(yc).parse().map_err(|_| bad("year", yc))?;
        let month: u32 = field(mc).parse().map_err(|_| bad("month", mc))?;
        if !(1..=12).contains(&month) {
            return Err(bad("month", mc));
        }
        let rate: f64 = field(vc).parse().map_err(|_| bad("rate", vc))?;
        table
            .insert(field(rc), Period::new(year, month), rate)
            .map_err(|e| Error::Parse { line, message: e.to_string() })?;
    }
    table.check_contiguous()?;
    Ok(table)
}

/// Source regions whose previous-month rates feed each target region.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeighborConfig {
    entries: Vec<(String, Vec<String>)>,
}

/// Bundled neighbour selection for the 17 Philippine regions: a target per
/// line, followed by its source regions.
pub const DEFAULT_NEIGHBORS: &str = "\
I,II,III,IVA,XIV,Total
II,I,III,IVA,XIV,Total
III,I,II,IVA,XVI
IVA,III,IVB,V,XVI,Total
IVB,II,IVA,VI,Total
V,IVA,VI,Total
VI,IVB,V,VII,XII,Total
VII,IVA,V,VI,XII,Total
VIII,V,VI
IX,X,XI,XII
X,IX,XI,XII,XIV,XV
XI,IX,X,XII,XV
XII,IX,X,XI,XV,Total
XIII,IX,X,XII,XV,Total
XIV,I,II,III,IVA,IVB,Total
XV,IX,X,XI,XII
XVI,I,III,IVA,V
";

impl NeighborConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bundled() -> Self {
        Self::read(DEFAULT_NEIGHBORS.as_bytes()).expect("bundled neighbour table parses")
    }

    pub fn insert(&mut self, target: &str, sources: Vec<String>) {
        match self.entries.iter_mut().find(|(t, _)| t == target) {
            Some(entry) => entry.1 = sources,
            None => self.entries.push((target.to_string(), sources)),
        }
    }

    pub fn sources(&self, target: &str) -> Option<&[String]> {
        self.entries.iter().find(|(t, _)| t == target).map(|(_, s)| s.as_slice())
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    /// One line per target: `target,source,source,...`.
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut cfg = Self::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let mut fields = record.iter().filter(|f| !f.is_empty());
            let Some(target) = fields.next() else { continue };
            if cfg.sources(target).is_some() {
                return Err(Error::Parse { line: i + 1, message: format!("target {target} listed twice") });
            }
            cfg.insert(target, fields.map(str::to_string).collect());
        }
        Ok(cfg)
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        for (target, sources) in &self.entries {
            let mut line = target.clone();
            for s in sources {
                line.push(',');
                line.push_str(s);
            }
            writeln!(writer, "{line}")?;
        }
        Ok(())
    }

    /// Every referenced region must exist in `table` ([`TOTAL`] may be
    /// derived).
    pub fn validate(&self, table: &SeriesTable) -> Result<()> {
        for (target, sources) in &self.entries {
            for region in std::iter::once(target).chain(sources) {
                if region != TOTAL && !table.contains_region(region) {
                    return Err(Error::Data(format!("unknown region `{region}` in neighbour config")));
                }
            }
        }
        Ok(())
    }
}

/// Lagged features for `target`: its own rate one month and twelve months
/// back, then each configured source's rate one month back. One row per
/// month with a full year of history; the label is that month's outbreak
/// indicator.
pub fn build_lag_features(table: &SeriesTable, target: &str, config: &NeighborConfig) -> Result<LabeledDataset> {
    let sources =
        config.sources(target).ok_or_else(|| Error::Data(format!("no neighbour entry for target `{target}`")))?;
    if !table.contains_region(target) {
        return Err(Error::Data(format!("unknown target region `{target}`")));
    }
    let mut table = table.clone();
    if sources.iter().any(|s| s == TOTAL) {
        table.ensure_total();
    }
    for s in sources {
        if !table.contains_region(s) {
            return Err(Error::Data(format!("unknown source region `{s}`")));
        }
    }
    let periods = table.periods(target);
    if periods.len() < 13 {
        return Err(Error::Data(format!("target `{target}` spans {} months; at least 13 are needed", periods.len())));
    }

    let cell = |region: &str, p: Period| {
        table.get(region, p).ok_or_else(|| Error::Data(format!("missing cell ({region}, {p})")))
    };

    let mut names = vec![format!("{target}_prev_month"), format!("{target}_prev_year")];
    names.extend(sources.iter().map(|s| format!("{s}_prev_month")));

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut out_periods = Vec::new();
    for &p in &periods[12..] {
        let mut row = vec![cell(target, p.back(1))?, cell(target, p.back(12))?];
        for s in sources {
            row.push(cell(s, p.back(1))?);
        }
        rows.push(row);
        labels.push(label_outbreak(cell(target, p)?)?);
        out_periods.push(p);
    }
    Ok(LabeledDataset {
        kinds: vec![FeatureKind::Continuous; names.len()],
        names,
        rows,
        labels,
        periods: Some(out_periods),
    })
}

/// Settings of the planted-rule spatio-temporal generator.
///
/// Every rate is drawn uniformly from a small grid of levels, so a held-out
/// year only contains values already seen during training.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedOutbreak {
    pub months: usize,
    pub start_year: i32,
    /// The target has an outbreak in month `t` iff the driver region's rate
    /// in month `t - 1` exceeds this cutoff.
    pub cutoff: f64,
    /// Probability that a driver month is above the cutoff.
    pub high_fraction: f64,
    /// Driver levels below / above the cutoff.
    pub driver_low: Vec<f64>,
    pub driver_high: Vec<f64>,
    /// Levels of the independent third region.
    pub distractor: Vec<f64>,
    /// Target levels in calm and outbreak months.
    pub target_calm: Vec<f64>,
    pub target_outbreak: Vec<f64>,
}

impl Default for PlantedOutbreak {
    fn default() -> Self {
        Self {
            months: 96,
            start_year: 2008,
            cutoff: 12.0,
            high_fraction: 0.5,
            driver_low: vec![5.0, 10.0],
            driver_high: vec![15.0, 25.0],
            distractor: vec![5.0, 25.0],
            target_calm: vec![5.0, 15.0],
            target_outbreak: vec![30.0],
        }
    }
}

impl PlantedOutbreak {
    pub const TARGET: &'static str = "R1";
    pub const DRIVER: &'static str = "R2";
    pub const DISTRACTOR: &'static str = "R3";

    /// Three-region series where `R1` breaks out exactly one month after
    /// `R2` exceeds the cutoff and `R3` is independent noise. The returned
    /// config feeds each region's lags from the other two.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> (SeriesTable, NeighborConfig) {
        let pick = |rng: &mut R, levels: &[f64]| levels[rng.gen_range(0..levels.len())];
        let mut table = SeriesTable::new();
        let start = Period::new(self.start_year, 1);
        let mut previous_driver = None;
        for t in 0..self.months {
            let p = start.back(-(t as i64));
            let driver = if rng.gen::<f64>() < self.high_fraction {
                pick(rng, &self.driver_high)
            } else {
                pick(rng, &self.driver_low)
            };
            let noise = pick(rng, &self.distractor);
            let outbreak = previous_driver.is_some_and(|d| d > self.cutoff);
            let target = if outbreak { pick(rng, &self.target_outbreak) } else { pick(rng, &self.target_calm) };
            previous_driver = Some(driver);
            table.insert(Self::DRIVER, p, driver).expect("fresh cell");
            table.insert(Self::DISTRACTOR, p, noise).expect("fresh cell");
            table.insert(Self::TARGET, p, target).expect("fresh cell");
        }
        let mut cfg = NeighborConfig::new();
        cfg.insert(Self::TARGET, vec![Self::DRIVER.into(), Self::DISTRACTOR.into()]);
        cfg.insert(Self::DRIVER, vec![Self::TARGET.into(), Self::DISTRACTOR.into()]);
        cfg.insert(Self::DISTRACTOR, vec![Self::TARGET.into(), Self::DRIVER.into()]);
        (table, cfg)
    }
}
