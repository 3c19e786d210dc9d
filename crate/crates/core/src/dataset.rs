//! Project records, dataset files, and k-fold plans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rating::{transform_dataset, CocomoRecord, CocomoVersion, LogEntry, MappingTable, RatingLevel, Rosetta};

pub const FIXED_COLUMNS: [&str; 5] = ["id", "source", "mode", "kloc", "effort_pm"];
pub const STAFFING_COLUMN: &str = "staffing_complexity";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Embedded,
    Organic,
    Semidetached,
    Unknown,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "embedded" => Ok(Mode::Embedded),
            "organic" => Ok(Mode::Organic),
            "semidetached" | "semi-detached" => Ok(Mode::Semidetached),
            "unknown" | "" | "?" => Ok(Mode::Unknown),
            other => Err(Error::Argument(format!("unknown development mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Embedded => "embedded",
            Mode::Organic => "organic",
            Mode::Semidetached => "semidetached",
            Mode::Unknown => "unknown",
        })
    }
}

/// One software project with SEER parameter ratings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub id: String,
    pub source: String,
    pub mode: Mode,
    pub size_kloc: f64,
    pub actual_effort_pm: f64,
    pub ratings: BTreeMap<String, RatingLevel>,
    pub staffing_complexity: Option<f64>,
}

impl ProjectRecord {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::Data {
                record: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        if !(self.size_kloc.is_finite() && self.size_kloc > 0.0) {
            return fail("non-positive size");
        }
        if !(self.actual_effort_pm.is_finite() && self.actual_effort_pm > 0.0) {
            return fail("non-positive effort");
        }
        if let Some(d) = self.staffing_complexity {
            if !(d.is_finite() && d > 0.0) {
                return fail("non-positive staffing complexity");
            }
        }
        Ok(())
    }

    pub fn ordinals(&self) -> BTreeMap<String, f64> {
        self.ratings.iter().map(|(k, v)| (k.clone(), v.ordinal())).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    SeerCsv,
    CocomoCsv,
    /// The PROMISE repository ARFF layout of the NASA 93 dataset.
    PromiseArff,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seer-csv" => Ok(Format::SeerCsv),
            "cocomo-csv" => Ok(Format::CocomoCsv),
            "promise-arff" => Ok(Format::PromiseArff),
            other => Err(Error::Argument(format!(
                "unknown format `{other}` (expected seer-csv, cocomo-csv or promise-arff)"
            ))),
        }
    }
}

/// A data row that failed validation.
#[derive(Clone, Debug, PartialEq)]
pub struct Rejection {
    /// 1-based index among data rows.
    pub row: usize,
    pub id: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct LoadOutcome {
    pub records: Vec<ProjectRecord>,
    pub rejected: Vec<Rejection>,
    /// COCOMO -> SEER transformation log (empty for seer-csv).
    pub log: Vec<LogEntry>,
}

pub struct LoadOptions {
    pub rosetta: Rosetta,
    pub table: MappingTable,
    pub strict: bool,
    /// Allowed SEER parameter columns; `None` accepts any.
    pub roster: Option<BTreeSet<String>>,
    /// Forces the COCOMO version instead of detecting it from the header.
    pub cocomo_version: Option<CocomoVersion>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            rosetta: Rosetta::shipped(),
            table: MappingTable::shipped(),
            strict: false,
            roster: None,
            cocomo_version: None,
        }
    }
}

pub fn load_projects(path: &Path, format: Format, opts: &LoadOptions) -> Result<LoadOutcome> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let result = match format {
        Format::SeerCsv => read_seer_csv(file, opts.roster.as_ref()),
        Format::CocomoCsv => {
            let (records, rejected) = read_cocomo_csv(file)?;
            finish_cocomo(records, rejected, opts)
        }
        Format::PromiseArff => {
            let mut text = String::new();
            let mut file = file;
            file.read_to_string(&mut text).map_err(|e| Error::io(path, e))?;
            let (records, rejected) = parse_promise_arff(&text)?;
            finish_cocomo(records, rejected, opts)
        }
    };
    result.map_err(|e| match e {
        Error::Argument(reason) => Error::Schema {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })
}

fn finish_cocomo(records: Vec<CocomoRecord>, mut rejected: Vec<Rejection>, opts: &LoadOptions) -> Result<LoadOutcome> {
    let version = opts
        .cocomo_version
        .unwrap_or_else(|| CocomoVersion::detect(records.iter().flat_map(|r| r.ratings.keys().map(String::as_str))));
    let positions: BTreeMap<&str, usize> = records.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let transformed = transform_dataset(&records, version, &opts.rosetta, &opts.table, opts.strict)?;
    for (id, err) in &transformed.failures {
        rejected.push(Rejection {
            row: positions.get(id.as_str()).map_or(0, |i| i + 1),
            id: id.clone(),
            reason: err.to_string(),
        });
    }
    rejected.sort_by_key(|r| r.row);
    Ok(LoadOutcome {
        records: transformed.projects,
        rejected,
        log: transformed.log,
    })
}

fn check_fixed_header(headers: &csv::StringRecord) -> Result<()> {
    let fixed: Vec<&str> = headers.iter().take(FIXED_COLUMNS.len()).collect();
    if fixed != FIXED_COLUMNS {
        return Err(Error::Argument(format!(
            "header must start with {}, found {}",
            FIXED_COLUMNS.join(","),
            fixed.join(",")
        )));
    }
    Ok(())
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader)
}

struct FixedFields {
    id: String,
    source: String,
    mode: Mode,
    kloc: f64,
    effort: f64,
}

fn parse_fixed(row: &csv::StringRecord) -> std::result::Result<FixedFields, String> {
    let number = |i: usize, what: &str| -> std::result::Result<f64, String> {
        row[i]
            .parse::<f64>()
            .map_err(|_| format!("unparseable {what} `{}`", &row[i]))
    };
    let fields = FixedFields {
        id: row[0].to_string(),
        source: row[1].to_string(),
        mode: row[2].parse().map_err(|e: Error| e.to_string())?,
        kloc: number(3, "size")?,
        effort: number(4, "effort")?,
    };
    if fields.id.is_empty() {
        return Err("missing id".into());
    }
    if !(fields.kloc.is_finite() && fields.kloc > 0.0) {
        return Err("non-positive size".into());
    }
    if !(fields.effort.is_finite() && fields.effort > 0.0) {
        return Err("non-positive effort".into());
    }
    Ok(fields)
}

/// Reads the seer-csv layout: `id,source,mode,kloc,effort_pm,<PARAM>...`.
/// An optional `staffing_complexity` column overrides the staffing default
/// per project. Empty rating cells leave the parameter unrated.
pub fn read_seer_csv<R: Read>(reader: R, roster: Option<&BTreeSet<String>>) -> Result<LoadOutcome> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    check_fixed_header(&headers)?;
    let columns: Vec<String> = headers.iter().skip(FIXED_COLUMNS.len()).map(str::to_string).collect();
    let mut seen = BTreeSet::new();
    for c in &columns {
        if !seen.insert(c) {
            return Err(Error::Argument(format!("duplicate column `{c}`")));
        }
        if c != STAFFING_COLUMN && roster.is_some_and(|r| !r.contains(c)) {
            return Err(Error::Argument(format!("column `{c}` is not a known SEER parameter")));
        }
    }

    let mut out = LoadOutcome::default();
    let mut ids = BTreeSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let reject = |out: &mut LoadOutcome, reason: String| {
            out.rejected.push(Rejection {
                row: i + 1,
                id: row.get(0).unwrap_or("").to_string(),
                reason,
            })
        };
        if row.len() != headers.len() {
            reject(
                &mut out,
                format!("expected {} fields, found {}", headers.len(), row.len()),
            );
            continue;
        }
        let fixed = match parse_fixed(&row) {
            Ok(f) => f,
            Err(reason) => {
                reject(&mut out, reason);
                continue;
            }
        };
        let mut ratings = BTreeMap::new();
        let mut staffing = None;
        let mut problem = None;
        for (col, cell) in columns.iter().zip(row.iter().skip(FIXED_COLUMNS.len())) {
            if cell.is_empty() {
                continue;
            }
            if col == STAFFING_COLUMN {
                match cell.parse::<f64>() {
                    Ok(d) if d.is_finite() && d > 0.0 => staffing = Some(d),
                    _ => problem = Some(format!("invalid staffing complexity `{cell}`")),
                }
                continue;
            }
            match cell.parse::<RatingLevel>() {
                Ok(level) => {
                    ratings.insert(col.clone(), level);
                }
                Err(e) => problem = Some(format!("{col}: {e}")),
            }
        }
        if let Some(reason) = problem {
            reject(&mut out, reason);
            continue;
        }
        if !ids.insert(fixed.id.clone()) {
            reject(&mut out, format!("duplicate id `{}`", fixed.id));
            continue;
        }
        out.records.push(ProjectRecord {
            id: fixed.id,
            source: fixed.source,
            mode: fixed.mode,
            size_kloc: fixed.kloc,
            actual_effort_pm: fixed.effort,
            ratings,
            staffing_complexity: staffing,
        });
    }
    Ok(out)
}

/// Reads the cocomo-csv layout: `id,source,mode,kloc,effort_pm,<DRIVER>...`.
pub fn read_cocomo_csv<R: Read>(reader: R) -> Result<(Vec<CocomoRecord>, Vec<Rejection>)> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?.clone();
    check_fixed_header(&headers)?;
    let drivers: Vec<String> = headers
        .iter()
        .skip(FIXED_COLUMNS.len())
        .map(|d| d.to_ascii_uppercase())
        .collect();
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let mut reject = |reason: String| {
            rejected.push(Rejection {
                row: i + 1,
                id: row.get(0).unwrap_or("").to_string(),
                reason,
            })
        };
        if row.len() != headers.len() {
            reject(format!("expected {} fields, found {}", headers.len(), row.len()));
            continue;
        }
        let fixed = match parse_fixed(&row) {
            Ok(f) => f,
            Err(reason) => {
                reject(reason);
                continue;
            }
        };
        let ratings: std::result::Result<BTreeMap<String, RatingLevel>, Error> = drivers
            .iter()
            .zip(row.iter().skip(FIXED_COLUMNS.len()))
            .filter(|(_, cell)| !cell.is_empty() && *cell != "?")
            .map(|(d, cell)| Ok((d.clone(), cell.parse()?)))
            .collect();
        let ratings = match ratings {
            Ok(r) => r,
            Err(e) => {
                reject(e.to_string());
                continue;
            }
        };
        if !ids.insert(fixed.id.clone()) {
            reject(format!("duplicate id `{}`", fixed.id));
            continue;
        }
        records.push(CocomoRecord {
            id: fixed.id,
            source: fixed.source,
            mode: fixed.mode,
            size_kloc: fixed.kloc,
            actual_effort_pm: fixed.effort,
            ratings,
        });
    }
    Ok((records, rejected))
}

const ARFF_DRIVERS: [&str; 15] = [
    "rely", "data", "cplx", "time", "stor", "virt", "turn", "acap", "aexp", "pcap", "vexp", "lexp", "modp", "tool",
    "sced",
];

/// Parses the PROMISE NASA 93 ARFF file into COCOMO 81 records.
///
/// Uses `recordnumber` (or the row index) as id, `center` as source, `mode`,
/// `equivphyskloc` as size and `act_effort` as effort; the fifteen COCOMO 81
/// drivers are read by their lower-case attribute names.
pub fn parse_promise_arff(text: &str) -> Result<(Vec<CocomoRecord>, Vec<Rejection>)> {
    let mut attributes = Vec::new();
    let mut data_lines = Vec::new();
    let mut in_data = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if in_data {
            data_lines.push(line);
        } else if lower.starts_with("@attribute") {
            let name = line.split_whitespace().nth(1).unwrap_or("").trim_matches('\'');
            attributes.push(name.to_ascii_lowercase());
        } else if lower.starts_with("@data") {
            in_data = true;
        }
    }
    let col = |name: &str| attributes.iter().position(|a| a == name);
    let (Some(kloc), Some(effort)) = (col("equivphyskloc"), col("act_effort")) else {
        return Err(Error::Argument("ARFF lacks equivphyskloc/act_effort attributes".into()));
    };
    let id_col = col("recordnumber");
    let center = col("center");
    let mode = col("mode");
    let drivers: Vec<(usize, String)> = ARFF_DRIVERS
        .iter()
        .filter_map(|d| col(d).map(|i| (i, d.to_ascii_uppercase())))
        .collect();

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in data_lines.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').map(|c| c.trim().trim_matches('\'')).collect();
        let id = id_col.map_or_else(|| (i + 1).to_string(), |c| cells.get(c).unwrap_or(&"").to_string());
        let mut reject = |reason: String| {
            rejected.push(Rejection {
                row: i + 1,
                id: id.clone(),
                reason,
            })
        };
        if cells.len() != attributes.len() {
            reject(format!("expected {} fields, found {}", attributes.len(), cells.len()));
            continue;
        }
        let parsed = (|| -> std::result::Result<CocomoRecord, String> {
            let size: f64 = cells[kloc]
                .parse()
                .map_err(|_| format!("unparseable size `{}`", cells[kloc]))?;
            let pm: f64 = cells[effort]
                .parse()
                .map_err(|_| format!("unparseable effort `{}`", cells[effort]))?;
            if !(size > 0.0) {
                return Err("non-positive size".into());
            }
            if !(pm > 0.0) {
                return Err("non-positive effort".into());
            }
            let mut ratings = BTreeMap::new();
            for (c, name) in &drivers {
                if cells[*c] != "?" {
                    ratings.insert(
                        name.clone(),
                        cells[*c].parse::<RatingLevel>().map_err(|e| e.to_string())?,
                    );
                }
            }
            Ok(CocomoRecord {
                id: id.clone(),
                source: center.map_or_else(|| "nasa".to_string(), |c| format!("nasa-center-{}", cells[c])),
                mode: mode
                    .map_or(Ok(Mode::Unknown), |c| cells[c].parse())
                    .map_err(|e: Error| e.to_string())?,
                size_kloc: size,
                actual_effort_pm: pm,
                ratings,
            })
        })();
        match parsed {
            Ok(r) => records.push(r),
            Err(reason) => reject(reason),
        }
    }
    Ok((records, rejected))
}

/// Writes records in the seer-csv layout. Columns are the sorted union of
/// all rated parameters, plus `staffing_complexity` when any record sets it.
pub fn write_seer_csv<W: Write>(records: &[ProjectRecord], writer: W) -> Result<()> {
    let params: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.ratings.keys().map(String::as_str))
        .collect();
    let staffing = records.iter().any(|r| r.staffing_complexity.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = FIXED_COLUMNS.to_vec();
    header.extend(params.iter());
    if staffing {
        header.push(STAFFING_COLUMN);
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.id.clone(),
            r.source.clone(),
            r.mode.to_string(),
            r.size_kloc.to_string(),
            r.actual_effort_pm.to_string(),
        ];
        row.extend(
            params
                .iter()
                .map(|p| r.ratings.get(*p).map_or(String::new(), ToString::to_string)),
        );
        if staffing {
            row.push(r.staffing_complexity.map_or(String::new(), |d| d.to_string()));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

pub fn save_seer_csv(records: &[ProjectRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_seer_csv(records, std::io::BufWriter::new(file))
}

/// Assignment of every record to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub assignments: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignments.get(id).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignments.values() {
            sizes[f] += 1;
        }
        sizes
    }

    /// Record indices per fold, each in dataset order.
    pub fn fold_indices(&self, records: &[ProjectRecord]) -> Result<Vec<Vec<usize>>> {
        let mut folds = vec![Vec::new(); self.k];
        for (i, r) in records.iter().enumerate() {
            let f = self
                .fold_of(&r.id)
                .ok_or_else(|| Error::Argument(format!("record `{}` is not in the fold plan", r.id)))?;
            folds[f].push(i);
        }
        Ok(folds)
    }
}

/// Shuffles with a seeded ChaCha stream and deals records round-robin, so
/// fold sizes differ by at most one. With `stratify`, the shuffled order is
/// grouped by development mode before dealing. `k = n` gives leave-one-out.
pub fn split_kfold(records: &[ProjectRecord], k: usize, seed: u64, stratify: bool) -> Result<FoldPlan> {
    let n = records.len();
    if k < 2 {
        return Err(Error::Argument(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::Argument(format!("k = {k} exceeds the {n} available records")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    if stratify {
        order.sort_by_key(|&i| records[i].mode);
    }
    let mut assignments = BTreeMap::new();
    for (pos, &i) in order.iter().enumerate() {
        if assignments.insert(records[i].id.clone(), pos % k).is_some() {
            return Err(Error::Argument(format!("duplicate record id `{}`", records[i].id)));
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        stratified: stratify,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, mode: Mode) -> ProjectRecord {
        ProjectRecord {
            id: id.into(),
            source: "t".into(),
            mode,
            size_kloc: 1.0,
            actual_effort_pm: 1.0,
            ratings: BTreeMap::new(),
            staffing_complexity: None,
        }
    }

    #[test]
    fn fixture_rows_parse() {
        let csv = "# comment line\nid,source,mode,kloc,effort_pm,ACAP,TOOL,staffing_complexity\n\
                   a,nasa,organic,12.5,60,Hi,Nom+,\n\
                   b,nasa,embedded,100,900,VLo-,,1.5\n\
                   c,industrial,semidetached,3,10.25,,VHi,\n";
        let out = read_seer_csv(csv.as_bytes(), None).unwrap();
        assert!(out.rejected.is_empty());
        assert_eq!(out.records.len(), 3);
        let b = &out.records[1];
        assert_eq!(b.mode, Mode::Embedded);
        assert_eq!(b.size_kloc, 100.0);
        assert_eq!(b.ratings["ACAP"].to_string(), "VLo-");
        assert!(!b.ratings.contains_key("TOOL"));
        assert_eq!(b.staffing_complexity, Some(1.5));
        assert_eq!(out.records[2].actual_effort_pm, 10.25);
        assert_eq!(out.records[0].ratings["TOOL"].ordinal(), 3.5);
    }

    #[test]
    fn zero_effort_rejected() {
        let csv = "id,source,mode,kloc,effort_pm,ACAP\na,x,organic,1,0,Nom\nb,x,organic,1,2,Nom\n";
        let out = read_seer_csv(csv.as_bytes(), None).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.rejected[0].reason, "non-positive effort");
        assert_eq!(out.rejected[0].row, 1);
    }

    #[test]
    fn header_only_is_empty() {
        let out = read_seer_csv("id,source,mode,kloc,effort_pm,ACAP\n".as_bytes(), None).unwrap();
        assert!(out.records.is_empty() && out.rejected.is_empty());
    }

    #[test]
    fn malformed_header_is_schema_error() {
        assert!(read_seer_csv("name,kloc\n".as_bytes(), None).is_err());
        let roster: BTreeSet<String> = ["ACAP".to_string()].into();
        assert!(read_seer_csv("id,source,mode,kloc,effort_pm,BOGUS\n".as_bytes(), Some(&roster)).is_err());
    }

    #[test]
    fn kfold_ten_by_five() {
        let recs: Vec<_> = (0..10).map(|i| rec(&i.to_string(), Mode::Organic)).collect();
        let plan = split_kfold(&recs, 5, 7, false).unwrap();
        assert_eq!(plan.fold_sizes(), vec![2; 5]);
        let folds = plan.fold_indices(&recs).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_ninety_nine_by_ten() {
        let recs: Vec<_> = (0..99).map(|i| rec(&i.to_string(), Mode::Organic)).collect();
        let mut sizes = split_kfold(&recs, 10, 42, false).unwrap().fold_sizes();
        sizes.sort();
        assert_eq!(sizes, [vec![9], vec![10; 9]].concat());
    }

    #[test]
    fn kfold_is_seeded() {
        let recs: Vec<_> = (0..30).map(|i| rec(&i.to_string(), Mode::Organic)).collect();
        assert_eq!(
            split_kfold(&recs, 4, 3, false).unwrap(),
            split_kfold(&recs, 4, 3, false).unwrap()
        );
        assert_ne!(
            split_kfold(&recs, 4, 3, false).unwrap().assignments,
            split_kfold(&recs, 4, 4, false).unwrap().assignments
        );
    }

    #[test]
    fn kfold_rejects_bad_k() {
        let recs: Vec<_> = (0..3).map(|i| rec(&i.to_string(), Mode::Organic)).collect();
        assert!(split_kfold(&recs, 4, 0, false).is_err());
        assert!(split_kfold(&recs, 1, 0, false).is_err());
        assert_eq!(split_kfold(&recs, 3, 0, false).unwrap().fold_sizes(), vec![1, 1, 1]);
    }

    #[test]
    fn stratified_folds_balance_modes() {
        let recs: Vec<_> = (0..20)
            .map(|i| rec(&i.to_string(), if i < 10 { Mode::Organic } else { Mode::Embedded }))
            .collect();
        let plan = split_kfold(&recs, 5, 1, true).unwrap();
        for fold in plan.fold_indices(&recs).unwrap() {
            let organic = fold.iter().filter(|&&i| recs[i].mode == Mode::Organic).count();
            assert_eq!(organic, 2);
        }
    }

    #[test]
    fn arff_parses() {
        let arff = "@relation nasa93\n@attribute recordnumber numeric\n@attribute center numeric\n\
                    @attribute mode {embedded,organic,semidetached}\n@attribute rely {vl,l,n,h,vh,xh}\n\
                    @attribute acap {vl,l,n,h,vh,xh}\n@attribute equivphyskloc numeric\n\
                    @attribute act_effort numeric\n@data\n1,2,embedded,h,n,25.9,117.6\n2,2,organic,?,vh,10,0\n";
        let (recs, rej) = parse_promise_arff(arff).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].source, "nasa-center-2");
        assert_eq!(recs[0].ratings["RELY"].to_string(), "Hi");
        assert_eq!(rej[0].reason, "non-positive effort");
    }
}
