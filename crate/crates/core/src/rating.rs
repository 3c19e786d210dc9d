//! Ordinal rating levels, the SEER-SEM/COCOMO correspondence table, and the
//! COCOMO 81 to COCOMO II driver conversion.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::{Mode, ProjectRecord};
use crate::error::{Error, Result};

pub const DEFAULT_MAPPING_CSV: &str = include_str!("../config/seer_cocomo_mapping.csv");
pub const DEFAULT_ROSETTA_CSV: &str = include_str!("../config/rosetta_cocomo81.csv");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    VLo,
    Low,
    Nom,
    Hi,
    VHi,
    XHi,
    EHi,
}

impl Base {
    pub const ALL: [Base; 7] = [
        Base::VLo,
        Base::Low,
        Base::Nom,
        Base::Hi,
        Base::VHi,
        Base::XHi,
        Base::EHi,
    ];

    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    fn token(self) -> &'static str {
        match self {
            Base::VLo => "VLo",
            Base::Low => "Low",
            Base::Nom => "Nom",
            Base::Hi => "Hi",
            Base::VHi => "VHi",
            Base::XHi => "XHi",
            Base::EHi => "EHi",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modifier {
    Minus,
    None,
    Plus,
}

/// A linguistic rating such as `Nom`, `VLo-` or `Hi+`.
///
/// `ordinal = base index (VLo = 1 .. EHi = 7) + modifier (-0.5, 0, +0.5)`.
/// Equality and ordering follow the ordinal, so `Low-` equals `VLo+`.
#[derive(Clone, Copy, Debug)]
pub struct RatingLevel {
    pub base: Base,
    pub modifier: Modifier,
}

impl RatingLevel {
    pub const NOMINAL: RatingLevel = RatingLevel::new(Base::Nom, Modifier::None);

    pub const fn new(base: Base, modifier: Modifier) -> Self {
        RatingLevel { base, modifier }
    }

    pub const fn plain(base: Base) -> Self {
        RatingLevel::new(base, Modifier::None)
    }

    pub fn ordinal(self) -> f64 {
        let offset = match self.modifier {
            Modifier::Minus => -0.5,
            Modifier::None => 0.0,
            Modifier::Plus => 0.5,
        };
        f64::from(self.base.index()) + offset
    }

    /// Nearest representable level, rounding to the closest half step.
    /// Half steps are written with a `+` on the lower base (`2.5` is `Low+`),
    /// except below the scale where `0.5` is `VLo-`.
    pub fn from_ordinal(ordinal: f64) -> Option<Self> {
        if !ordinal.is_finite() {
            return None;
        }
        let halves = (ordinal * 2.0).round() as i64;
        if !(1..=15).contains(&halves) {
            return None;
        }
        if halves == 1 {
            return Some(RatingLevel::new(Base::VLo, Modifier::Minus));
        }
        let base = Base::ALL[(halves / 2 - 1) as usize];
        let modifier = if halves % 2 == 0 {
            Modifier::None
        } else {
            Modifier::Plus
        };
        Some(RatingLevel::new(base, modifier))
    }
}

impl PartialEq for RatingLevel {
    fn eq(&self, other: &Self) -> bool {
        self.ordinal() == other.ordinal()
    }
}

impl Eq for RatingLevel {}

impl std::hash::Hash for RatingLevel {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ordinal().to_bits().hash(state);
    }
}

impl Ord for RatingLevel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ordinal().total_cmp(&other.ordinal())
    }
}

impl PartialOrd for RatingLevel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RatingLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = match self.modifier {
            Modifier::Minus => "-",
            Modifier::None => "",
            Modifier::Plus => "+",
        };
        write!(f, "{}{}", self.base.token(), suffix)
    }
}

impl FromStr for RatingLevel {
    type Err = Error;

    /// Accepts the SEER spellings (`VLo`, `Nom+`), the COCOMO spellings used in
    /// public datasets (`vl`, `l`, `n`, `h`, `vh`, `xh`) and long forms
    /// (`very_low`, `nominal`, ...), case-insensitively.
    fn from_str(token: &str) -> Result<Self> {
        let trimmed = token.trim();
        let (stem, modifier) = if let Some(s) = trimmed.strip_suffix('+') {
            (s, Modifier::Plus)
        } else if let Some(s) = trimmed.strip_suffix('-').or_else(|| trimmed.strip_suffix('\u{2212}')) {
            (s, Modifier::Minus)
        } else {
            (trimmed, Modifier::None)
        };
        let key: String = stem
            .chars()
            .filter(|c| !matches!(c, '_' | ' ' | '-'))
            .collect::<String>()
            .to_ascii_lowercase();
        let base = match key.as_str() {
            "vlo" | "vl" | "verylow" => Base::VLo,
            "low" | "lo" | "l" => Base::Low,
            "nom" | "n" | "nominal" => Base::Nom,
            "hi" | "h" | "high" => Base::Hi,
            "vhi" | "vh" | "veryhigh" => Base::VHi,
            "xhi" | "xh" | "extrahigh" => Base::XHi,
            "ehi" | "eh" => Base::EHi,
            _ => return Err(Error::RatingParse(token.to_string())),
        };
        Ok(RatingLevel::new(base, modifier))
    }
}

impl Serialize for RatingLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RatingLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let token = String::deserialize(deserializer)?;
        token.parse().map_err(serde::de::Error::custom)
    }
}

pub fn rating_to_ordinal(token: &str) -> Result<f64> {
    Ok(token.parse::<RatingLevel>()?.ordinal())
}

fn parse_rating_list(cell: &str) -> Result<Vec<RatingLevel>> {
    cell.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn join_ratings(levels: &[RatingLevel]) -> String {
    levels.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

/// A COCOMO rating and the SEER level it maps to.
type LevelPair = (RatingLevel, RatingLevel);

/// One printed row of the correspondence table.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingRow {
    pub seer_param: String,
    /// Empty when the COCOMO rating has no SEER counterpart; two entries
    /// when a single COCOMO rating spans two SEER levels.
    pub seer_ratings: Vec<RatingLevel>,
    pub cocomo_driver: String,
    /// Empty when no COCOMO rating reaches this SEER level.
    pub cocomo_ratings: Vec<RatingLevel>,
}

impl MappingRow {
    /// The single SEER level a COCOMO rating on this row collapses to.
    /// Multi-level cells resolve to the midpoint of their ordinals.
    pub fn seer_level(&self) -> Option<RatingLevel> {
        match self.seer_ratings.as_slice() {
            [] => None,
            [one] => Some(*one),
            many => {
                let mid = many.iter().map(|l| l.ordinal()).sum::<f64>() / many.len() as f64;
                RatingLevel::from_ordinal(mid)
            }
        }
    }
}

/// A resolved COCOMO -> SEER step.
#[derive(Clone, Debug, PartialEq)]
pub struct SeerRating {
    pub param: String,
    pub level: RatingLevel,
    /// Index of the table row applied; `None` when the level was interpolated.
    pub row: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MappingTable {
    rows: Vec<MappingRow>,
}

#[derive(Deserialize)]
struct MappingCsvRow {
    seer_param: String,
    seer_rating: String,
    cocomo_driver: String,
    cocomo_ratings: String,
}

impl MappingTable {
    pub fn new(rows: Vec<MappingRow>) -> Result<Self> {
        let table = MappingTable { rows };
        table.validate()?;
        Ok(table)
    }

    /// The table shipped with the crate.
    pub fn shipped() -> Self {
        MappingTable::from_csv_reader(DEFAULT_MAPPING_CSV.as_bytes()).expect("shipped mapping table is valid")
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.deserialize() {
            let raw: MappingCsvRow = rec?;
            rows.push(MappingRow {
                seer_param: raw.seer_param,
                seer_ratings: parse_rating_list(&raw.seer_rating)?,
                cocomo_driver: raw.cocomo_driver,
                cocomo_ratings: parse_rating_list(&raw.cocomo_ratings)?,
            });
        }
        MappingTable::new(rows)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        MappingTable::from_csv_reader(file)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("seer_param,seer_rating,cocomo_driver,cocomo_ratings\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.seer_param,
                join_ratings(&r.seer_ratings),
                r.cocomo_driver,
                join_ratings(&r.cocomo_ratings)
            ));
        }
        out
    }

    /// Each (driver, COCOMO rating) may feed at most one row per SEER parameter.
    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for r in &self.rows {
            if r.seer_ratings.is_empty() && r.cocomo_ratings.is_empty() {
                return Err(Error::Argument(format!(
                    "mapping row {}/{} has neither a SEER nor a COCOMO rating",
                    r.seer_param, r.cocomo_driver
                )));
            }
            for c in &r.cocomo_ratings {
                if !seen.insert((r.seer_param.clone(), r.cocomo_driver.clone(), *c)) {
                    return Err(Error::Argument(format!(
                        "{}={} maps to more than one {} rating",
                        r.cocomo_driver, c, r.seer_param
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> &[MappingRow] {
        &self.rows
    }

    pub fn drivers(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.cocomo_driver.as_str()).collect()
    }

    /// SEER parameters fed by a COCOMO driver, in table order.
    pub fn parameters_for(&self, driver: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in self.rows.iter().filter(|r| r.cocomo_driver == driver) {
            if !out.contains(&r.seer_param.as_str()) {
                out.push(&r.seer_param);
            }
        }
        out
    }

    /// SEER levels defined for a parameter, in ordinal order.
    pub fn seer_levels(&self, param: &str) -> Vec<RatingLevel> {
        self.rows
            .iter()
            .filter(|r| r.seer_param == param)
            .flat_map(|r| r.seer_ratings.iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn seer_parameters(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.seer_param.as_str()) {
                out.push(&r.seer_param);
            }
        }
        out
    }

    /// Maps one COCOMO rating onto one SEER parameter.
    pub fn cocomo_to_seer(&self, driver: &str, rating: RatingLevel, param: &str) -> Result<SeerRating> {
        let hit =
            self.rows.iter().enumerate().find(|(_, r)| {
                r.cocomo_driver == driver && r.seer_param == param && r.cocomo_ratings.contains(&rating)
            });
        match hit.and_then(|(i, r)| r.seer_level().map(|level| (i, level))) {
            Some((row, level)) => Ok(SeerRating {
                param: param.to_string(),
                level,
                row: Some(row),
            }),
            None => Err(self.gap(driver, rating, param)),
        }
    }

    /// Maps one COCOMO rating onto every SEER parameter its driver feeds.
    pub fn cocomo_to_seer_all(&self, driver: &str, rating: RatingLevel) -> Vec<(String, Result<SeerRating>)> {
        self.parameters_for(driver)
            .into_iter()
            .map(|p| (p.to_string(), self.cocomo_to_seer(driver, rating, p)))
            .collect()
    }

    /// Defined (COCOMO rating, SEER level) pairs for one driver/parameter.
    fn defined_pairs(&self, driver: &str, param: &str) -> Vec<(RatingLevel, RatingLevel)> {
        let mut pairs: Vec<(RatingLevel, RatingLevel)> = self
            .rows
            .iter()
            .filter(|r| r.cocomo_driver == driver && r.seer_param == param)
            .filter_map(|r| r.seer_level().map(|s| (r, s)))
            .flat_map(|(r, s)| r.cocomo_ratings.iter().map(move |c| (*c, s)))
            .collect();
        pairs.sort();
        pairs
    }

    fn neighbors(&self, driver: &str, rating: RatingLevel, param: &str) -> (Option<LevelPair>, Option<LevelPair>) {
        let pairs = self.defined_pairs(driver, param);
        let below = pairs.iter().rev().find(|(c, _)| *c < rating).copied();
        let above = pairs.iter().find(|(c, _)| *c > rating).copied();
        (below, above)
    }

    fn gap(&self, driver: &str, rating: RatingLevel, param: &str) -> Error {
        let (below, above) = self.neighbors(driver, rating, param);
        let neighbors = [below, above]
            .into_iter()
            .flatten()
            .map(|(c, s)| format!("{driver}={c} -> {param}={s}"))
            .collect();
        Error::MappingGap {
            driver: driver.to_string(),
            rating: rating.to_string(),
            neighbors,
        }
    }

    /// Fills a gap with the midpoint of the nearest defined SEER levels on
    /// either side (or the single neighbor at the end of the scale).
    pub fn interpolate_gap(&self, driver: &str, rating: RatingLevel, param: &str) -> Option<SeerRating> {
        let level = match self.neighbors(driver, rating, param) {
            (Some((_, lo)), Some((_, hi))) => RatingLevel::from_ordinal(0.5 * (lo.ordinal() + hi.ordinal()))?,
            (Some((_, only)), None) | (None, Some((_, only))) => only,
            (None, None) => return None,
        };
        Some(SeerRating {
            param: param.to_string(),
            level,
            row: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RosettaRule {
    pub from_driver: String,
    /// `None` drops the driver.
    pub to_driver: Option<String>,
    /// `None` matches every rating.
    pub from_ratings: Option<Vec<RatingLevel>>,
    /// `None` keeps the rating.
    pub to_rating: Option<RatingLevel>,
}

/// COCOMO 81 -> COCOMO II conversion rules.
#[derive(Clone, Debug, PartialEq)]
pub struct Rosetta {
    rules: Vec<RosettaRule>,
}

#[derive(Deserialize)]
struct RosettaCsvRow {
    cocomo81_driver: String,
    cocomo2_driver: String,
    cocomo81_ratings: String,
    cocomo2_rating: String,
}

/// Result of converting one COCOMO 81 record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Converted {
    pub ratings: BTreeMap<String, RatingLevel>,
    /// (COCOMO 81 driver, rating, COCOMO II driver, rating) per applied rule.
    pub applied: Vec<(String, RatingLevel, String, RatingLevel)>,
    /// Drivers a rule explicitly dropped.
    pub dropped: Vec<String>,
}

impl Rosetta {
    pub fn new(rules: Vec<RosettaRule>) -> Self {
        Rosetta { rules }
    }

    pub fn shipped() -> Self {
        Rosetta::from_csv_reader(DEFAULT_ROSETTA_CSV.as_bytes()).expect("shipped rosetta is valid")
    }

    /// Renames nothing and keeps every rating, for the listed drivers.
    pub fn identity<'a>(drivers: impl IntoIterator<Item = &'a str>) -> Self {
        Rosetta::new(
            drivers
                .into_iter()
                .map(|d| RosettaRule {
                    from_driver: d.to_string(),
                    to_driver: Some(d.to_string()),
                    from_ratings: None,
                    to_rating: None,
                })
                .collect(),
        )
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rules = Vec::new();
        for rec in rdr.deserialize() {
            let raw: RosettaCsvRow = rec?;
            rules.push(RosettaRule {
                from_driver: raw.cocomo81_driver,
                to_driver: (!raw.cocomo2_driver.is_empty()).then_some(raw.cocomo2_driver),
                from_ratings: match raw.cocomo81_ratings.as_str() {
                    "*" | "" => None,
                    cell => Some(parse_rating_list(cell)?),
                },
                to_rating: match raw.cocomo2_rating.as_str() {
                    "" => None,
                    cell => Some(cell.parse()?),
                },
            });
        }
        Ok(Rosetta { rules })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Rosetta::from_csv_reader(file)
    }

    pub fn rules(&self) -> &[RosettaRule] {
        &self.rules
    }

    pub fn covers(&self, driver: &str) -> bool {
        self.rules.iter().any(|r| r.from_driver == driver)
    }

    /// Converts a COCOMO 81 rating map to COCOMO II form.
    pub fn cocomo81_to_cocomo2(&self, record: &BTreeMap<String, RatingLevel>) -> Result<Converted> {
        let mut out = Converted::default();
        for (driver, &rating) in record {
            if !self.covers(driver) {
                return Err(Error::Conversion(driver.clone()));
            }
            let rule = self
                .rules
                .iter()
                .find(|r| r.from_driver == *driver && r.from_ratings.as_ref().is_none_or(|rs| rs.contains(&rating)));
            let Some(rule) = rule else {
                return Err(Error::MappingGap {
                    driver: driver.clone(),
                    rating: rating.to_string(),
                    neighbors: Vec::new(),
                });
            };
            match &rule.to_driver {
                None => out.dropped.push(driver.clone()),
                Some(to) => {
                    let to_rating = rule.to_rating.unwrap_or(rating);
                    out.ratings.insert(to.clone(), to_rating);
                    out.applied.push((driver.clone(), rating, to.clone(), to_rating));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CocomoVersion {
    #[serde(rename = "cocomo81")]
    Cocomo81,
    #[serde(rename = "cocomo2")]
    Cocomo2,
}

/// Driver names that exist only in COCOMO 81.
const COCOMO81_ONLY: [&str; 5] = ["VIRT", "AEXP", "VEXP", "LEXP", "MODP"];

impl CocomoVersion {
    pub fn detect<'a>(drivers: impl IntoIterator<Item = &'a str>) -> Self {
        if drivers.into_iter().any(|d| COCOMO81_ONLY.contains(&d)) {
            CocomoVersion::Cocomo81
        } else {
            CocomoVersion::Cocomo2
        }
    }
}

/// A project rated with COCOMO drivers.
#[derive(Clone, Debug, PartialEq)]
pub struct CocomoRecord {
    pub id: String,
    pub source: String,
    pub mode: Mode,
    pub size_kloc: f64,
    pub actual_effort_pm: f64,
    pub ratings: BTreeMap<String, RatingLevel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogStage {
    Rosetta,
    Mapping,
    Interpolated,
    Dropped,
    Unused,
}

/// One line of the transformation log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogEntry {
    pub record: String,
    pub stage: LogStage,
    pub from_driver: String,
    pub from_rating: String,
    pub to: String,
    pub to_rating: String,
    pub table_row: String,
}

#[derive(Debug, Default)]
pub struct TransformOutcome {
    pub projects: Vec<ProjectRecord>,
    pub log: Vec<LogEntry>,
    /// Records that could not be transformed, with the reason.
    pub failures: Vec<(String, Error)>,
}

pub fn write_log_csv(log: &[LogEntry], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for entry in log {
        w.serialize(entry)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Converts COCOMO-rated records to SEER-rated projects.
///
/// In strict mode any mapping gap or conversion failure aborts the batch with
/// an error naming the record. Otherwise gaps are filled by
/// [`MappingTable::interpolate_gap`], failing records are collected in
/// `failures`, and the batch only errors when every record failed.
pub fn transform_dataset(
    records: &[CocomoRecord],
    version: CocomoVersion,
    rosetta: &Rosetta,
    table: &MappingTable,
    strict: bool,
) -> Result<TransformOutcome> {
    let mut outcome = TransformOutcome::default();
    for rec in records {
        match transform_record(rec, version, rosetta, table, strict) {
            Ok((project, log)) => {
                outcome.projects.push(project);
                outcome.log.extend(log);
            }
            Err(e) if strict => return Err(e.in_record(&rec.id)),
            Err(e) => outcome.failures.push((rec.id.clone(), e)),
        }
    }
    if !records.is_empty() && outcome.projects.is_empty() {
        let (id, first) = outcome.failures.remove(0);
        return Err(first.in_record(&id));
    }
    Ok(outcome)
}

fn transform_record(
    rec: &CocomoRecord,
    version: CocomoVersion,
    rosetta: &Rosetta,
    table: &MappingTable,
    strict: bool,
) -> Result<(ProjectRecord, Vec<LogEntry>)> {
    let mut log = Vec::new();
    let entry = |stage, from_driver: &str, from_rating: String, to: &str, to_rating: String, row: String| LogEntry {
        record: rec.id.clone(),
        stage,
        from_driver: from_driver.to_string(),
        from_rating,
        to: to.to_string(),
        to_rating,
        table_row: row,
    };

    let cocomo2 = match version {
        CocomoVersion::Cocomo2 => rec.ratings.clone(),
        CocomoVersion::Cocomo81 => {
            let converted = rosetta.cocomo81_to_cocomo2(&rec.ratings)?;
            for (fd, fr, td, tr) in &converted.applied {
                log.push(entry(
                    LogStage::Rosetta,
                    fd,
                    fr.to_string(),
                    td,
                    tr.to_string(),
                    String::new(),
                ));
            }
            for d in &converted.dropped {
                log.push(entry(
                    LogStage::Dropped,
                    d,
                    rec.ratings[d].to_string(),
                    "",
                    String::new(),
                    String::new(),
                ));
            }
            converted.ratings
        }
    };

    let mut seer = BTreeMap::new();
    for (driver, &rating) in &cocomo2 {
        let params = table.parameters_for(driver);
        if params.is_empty() {
            log.push(entry(
                LogStage::Unused,
                driver,
                rating.to_string(),
                "",
                String::new(),
                String::new(),
            ));
            continue;
        }
        for param in params {
            let mapped = match table.cocomo_to_seer(driver, rating, param) {
                Ok(m) => m,
                Err(gap) if strict => return Err(gap),
                Err(gap) => table.interpolate_gap(driver, rating, param).ok_or(gap)?,
            };
            let (stage, row) = match mapped.row {
                Some(i) => (LogStage::Mapping, (i + 1).to_string()),
                None => (LogStage::Interpolated, String::new()),
            };
            log.push(entry(
                stage,
                driver,
                rating.to_string(),
                param,
                mapped.level.to_string(),
                row,
            ));
            seer.insert(param.to_string(), mapped.level);
        }
    }

    let project = ProjectRecord {
        id: rec.id.clone(),
        source: rec.source.clone(),
        mode: rec.mode,
        size_kloc: rec.size_kloc,
        actual_effort_pm: rec.actual_effort_pm,
        ratings: seer,
        staffing_complexity: None,
    };
    project.validate()?;
    Ok((project, log))
}
