//! Contact-log ingestion and tensor dumps.
//!
//! Two text inputs are understood:
//!
//! * `tsv` — raw contact records `timestamp<TAB>id<TAB>id`, one per active
//!   recording window (20 s in the Hypertext 2009 data). `#` lines are
//!   comments.
//! * `csv` — already aggregated quadruples `id,id,interval,count`, with an
//!   optional header line.
//!
//! Raw records are binned into equal-width intervals: a record at time `t`
//! falls in bin `⌊(t − t_start) / bin_width⌋`, so bins are `[start, end)`.
//! A record stamped exactly on a boundary opens the next bin.
//!
//! Tensors are dumped as `csv` quadruples plus a JSON sidecar carrying the
//! shape, the interval width and both id dictionaries (and, for simulated
//! data, the true labels).

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::TriPartition;
use crate::tensor::{CountTensor, EventRecord};

/// One raw contact record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawContact {
    /// Seconds.
    pub t: i64,
    pub u_id: String,
    pub v_id: String,
}

impl RawContact {
    pub fn new(t: i64, u_id: impl Into<String>, v_id: impl Into<String>) -> Self {
        Self {
            t,
            u_id: u_id.into(),
            v_id: v_id.into(),
        }
    }
}

/// Equal-width binning of `[t_start, t_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub t_start: i64,
    pub t_end: i64,
    pub bin_width: i64,
    /// Seconds of contact each raw record stands for.
    pub record_duration: i64,
}

impl BinningSpec {
    pub const DEFAULT_RECORD_DURATION: i64 = 20;

    pub fn new(t_start: i64, t_end: i64, bin_width: i64) -> Result<Self> {
        let spec = Self {
            t_start,
            t_end,
            bin_width,
            record_duration: Self::DEFAULT_RECORD_DURATION,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bin_width <= 0 {
            return Err(Error::Config(format!(
                "bin width {} must be > 0",
                self.bin_width
            )));
        }
        if self.t_end <= self.t_start {
            return Err(Error::Config(format!(
                "empty horizon [{}, {})",
                self.t_start, self.t_end
            )));
        }
        if (self.t_end - self.t_start) % self.bin_width != 0 {
            return Err(Error::Config(format!(
                "horizon length {} is not a multiple of bin width {}",
                self.t_end - self.t_start,
                self.bin_width
            )));
        }
        if self.record_duration <= 0 {
            return Err(Error::Config("record duration must be > 0".into()));
        }
        Ok(())
    }

    /// Number of intervals `U`.
    pub fn n_bins(&self) -> usize {
        ((self.t_end - self.t_start) / self.bin_width) as usize
    }

    /// Bin of timestamp `t`, or `None` outside the horizon.
    pub fn bin_of(&self, t: i64) -> Option<usize> {
        (self.t_start..self.t_end)
            .contains(&t)
            .then(|| ((t - self.t_start) / self.bin_width) as usize)
    }
}

/// How identifiers map onto the two node sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeSets {
    /// First ids index rows, second ids index columns.
    #[default]
    Bipartite,
    /// One population: a single dictionary serves rows and columns, pairs
    /// are unordered and self-pairs are rejected.
    Unipartite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// `timestamp<TAB>id<TAB>id`.
    TsvTIJ,
    /// `id,id,interval,count`.
    CsvQuad,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" | "tsv_t_i_j" => Ok(Self::TsvTIJ),
            "csv" | "csv_quad" => Ok(Self::CsvQuad),
            other => Err(Error::Config(format!("unknown input format {other:?}"))),
        }
    }
}

/// Identifier → dense index, in first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct IdDictionary {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for IdDictionary {
    fn from(ids: Vec<String>) -> Self {
        let mut dict = IdDictionary::default();
        ids.into_iter().for_each(|id| {
            dict.intern(&id);
        });
        dict
    }
}

impl From<IdDictionary> for Vec<String> {
    fn from(d: IdDictionary) -> Self {
        d.ids
    }
}

impl IdDictionary {
    /// Ids `"0"`, `"1"`, … `"n-1"`.
    pub fn sequential(n: usize) -> Self {
        (0..n).map(|i| i.to_string()).collect::<Vec<_>>().into()
    }

    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Parsed raw records with their dictionaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactLog {
    pub contacts: Vec<RawContact>,
    pub rows: IdDictionary,
    pub cols: IdDictionary,
    pub nodes: NodeSets,
}

impl ContactLog {
    /// Builds the dictionaries for `contacts` in first-appearance order.
    /// In unipartite mode both positions feed one shared dictionary.
    pub fn from_contacts(contacts: Vec<RawContact>, nodes: NodeSets) -> Self {
        let mut rows = IdDictionary::default();
        let mut cols = IdDictionary::default();
        for c in &contacts {
            match nodes {
                NodeSets::Bipartite => {
                    rows.intern(&c.u_id);
                    cols.intern(&c.v_id);
                }
                NodeSets::Unipartite => {
                    rows.intern(&c.u_id);
                    rows.intern(&c.v_id);
                }
            }
        }
        if nodes == NodeSets::Unipartite {
            cols = rows.clone();
        }
        Self {
            contacts,
            rows,
            cols,
            nodes,
        }
    }
}

/// Aggregated quadruples with their dictionaries.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadTable {
    pub records: Vec<EventRecord>,
    pub rows: IdDictionary,
    pub cols: IdDictionary,
}

/// Either kind of parsed input.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Contacts(ContactLog),
    Quads(QuadTable),
}

/// A count tensor with the identifiers of its rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub tensor: CountTensor,
    pub rows: IdDictionary,
    pub cols: IdDictionary,
    pub delta_t: f64,
}

impl Network {
    /// Wraps a tensor with sequential ids.
    pub fn anonymous(tensor: CountTensor, delta_t: f64) -> Self {
        Self {
            rows: IdDictionary::sequential(tensor.n_rows()),
            cols: IdDictionary::sequential(tensor.n_cols()),
            tensor,
            delta_t,
        }
    }

    /// Cells keyed by identifiers, for order-independent comparisons.
    pub fn keyed_cells(&self) -> Vec<(String, String, usize, u64)> {
        let mut cells: Vec<_> = self
            .tensor
            .entries()
            .iter()
            .map(|e| {
                (
                    self.rows.id(e.row).to_owned(),
                    self.cols.id(e.col).to_owned(),
                    e.interval,
                    e.count,
                )
            })
            .collect();
        cells.sort();
        cells
    }
}

fn reader(r: impl Read, delimiter: u8) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_int<T: std::str::FromStr>(field: &str, what: &str, line: u64) -> Result<T> {
    field.parse().map_err(|_| {
        parse_error(
            line,
            format!("{what} {field:?} is not a non-negative integer"),
        )
    })
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn is_blank(record: &csv::StringRecord) -> bool {
    record.iter().all(str::is_empty)
}

/// Parses `timestamp<TAB>id<TAB>id` records.
pub fn parse_tsv<R: Read>(input: R, nodes: NodeSets) -> Result<ContactLog> {
    let mut contacts = Vec::new();
    for record in reader(input, b'\t').records() {
        let record = record?;
        if is_blank(&record) {
            continue;
        }
        let line = line_of(&record);
        if record.len() != 3 {
            return Err(parse_error(
                line,
                format!("expected 3 fields, found {}", record.len()),
            ));
        }
        let t: i64 = parse_int(&record[0], "timestamp", line)?;
        if t < 0 {
            return Err(parse_error(line, format!("negative timestamp {t}")));
        }
        contacts.push(RawContact::new(t, &record[1], &record[2]));
    }
    Ok(ContactLog::from_contacts(contacts, nodes))
}

/// Parses `id,id,interval,count` rows; the first line may be a header.
pub fn parse_csv_quad<R: Read>(input: R, nodes: NodeSets) -> Result<QuadTable> {
    let mut rows = IdDictionary::default();
    let mut cols = IdDictionary::default();
    let mut records = Vec::new();
    let mut first = true;
    for record in reader(input, b',').records() {
        let record = record?;
        if is_blank(&record) {
            continue;
        }
        let line = line_of(&record);
        if record.len() != 4 {
            return Err(parse_error(
                line,
                format!("expected 4 fields, found {}", record.len()),
            ));
        }
        let header =
            first && record[2].parse::<u64>().is_err() && record[3].parse::<u64>().is_err();
        first = false;
        if header {
            continue;
        }
        let interval = parse_int(&record[2], "interval", line)?;
        let count = parse_int(&record[3], "count", line)?;
        let (row, col) = match nodes {
            NodeSets::Bipartite => (rows.intern(&record[0]), cols.intern(&record[1])),
            NodeSets::Unipartite => {
                if record[0] == record[1] {
                    return Err(parse_error(line, format!("self-pair {:?}", &record[0])));
                }
                (rows.intern(&record[0]), rows.intern(&record[1]))
            }
        };
        records.push(EventRecord::new(row, col, interval, count));
    }
    if nodes == NodeSets::Unipartite {
        cols = rows.clone();
    }
    Ok(QuadTable {
        records,
        rows,
        cols,
    })
}

/// Parses either format.
pub fn parse_contacts<R: Read>(input: R, format: InputFormat, nodes: NodeSets) -> Result<Parsed> {
    match format {
        InputFormat::TsvTIJ => parse_tsv(input, nodes).map(Parsed::Contacts),
        InputFormat::CsvQuad => parse_csv_quad(input, nodes).map(Parsed::Quads),
    }
}

/// Order of two ids: numerically when both are integers, else as strings.
fn id_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<i128>(), b.parse::<i128>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Bins raw contacts into a count tensor: each record adds one to the cell
/// of its pair and bin.
pub fn aggregate(log: &ContactLog, spec: &BinningSpec) -> Result<Network> {
    spec.validate()?;
    let mut records = Vec::with_capacity(log.contacts.len());
    for (n, c) in log.contacts.iter().enumerate() {
        let interval = spec.bin_of(c.t).ok_or(Error::TimestampOutOfRange {
            record: n,
            t: c.t,
            t_start: spec.t_start,
            t_end: spec.t_end,
        })?;
        let (u, v) = match log.nodes {
            NodeSets::Bipartite => (&c.u_id, &c.v_id),
            NodeSets::Unipartite => match id_order(&c.u_id, &c.v_id) {
                Ordering::Less => (&c.u_id, &c.v_id),
                Ordering::Greater => (&c.v_id, &c.u_id),
                Ordering::Equal => {
                    return Err(Error::Contract(format!(
                        "record {n}: self-pair {:?} in unipartite data",
                        c.u_id
                    )))
                }
            },
        };
        let missing =
            |id: &str| Error::Contract(format!("record {n}: id {id:?} not in dictionary"));
        let row = log.rows.get(u).ok_or_else(|| missing(u))?;
        let col = log.cols.get(v).ok_or_else(|| missing(v))?;
        records.push(EventRecord::new(row, col, interval, 1));
    }
    let tensor = CountTensor::from_records(
        log.rows.len().max(1),
        log.cols.len().max(1),
        spec.n_bins(),
        records,
    )?;
    Ok(Network {
        tensor,
        rows: log.rows.clone(),
        cols: log.cols.clone(),
        delta_t: 1.0,
    })
}

impl QuadTable {
    /// Builds the tensor; `n_intervals` defaults to one past the largest
    /// interval index seen.
    pub fn into_network(self, n_intervals: Option<usize>, delta_t: f64) -> Result<Network> {
        let u = match n_intervals {
            Some(u) => u,
            None => self
                .records
                .iter()
                .map(|r| r.interval + 1)
                .max()
                .unwrap_or(1),
        };
        let tensor = CountTensor::from_records(
            self.rows.len().max(1),
            self.cols.len().max(1),
            u,
            self.records,
        )?;
        Ok(Network {
            tensor,
            rows: self.rows,
            cols: self.cols,
            delta_t,
        })
    }
}

/// JSON sidecar of a tensor dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpSidecar {
    pub format_version: u32,
    /// File name of the quadruple CSV, relative to the sidecar.
    pub data: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub n_intervals: usize,
    pub delta_t: f64,
    pub row_ids: IdDictionary,
    pub col_ids: IdDictionary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TriPartition>,
}

/// Sidecar path for a dump CSV: same stem, `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the quadruples with header `row,col,interval,count`.
pub fn write_csv_quad<W: Write>(network: &Network, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "interval", "count"])?;
    for e in network.tensor.entries() {
        w.write_record([
            network.rows.id(e.row),
            network.cols.id(e.col),
            &e.interval.to_string(),
            &e.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `csv_path` and its sidecar. Returns the sidecar path.
pub fn write_dump(
    network: &Network,
    truth: Option<&TriPartition>,
    csv_path: &Path,
) -> Result<PathBuf> {
    if let Some(p) = truth {
        p.check_shape(network.tensor.shape())?;
    }
    write_csv_quad(network, BufWriter::new(File::create(csv_path)?))?;
    let sidecar = DumpSidecar {
        format_version: 1,
        data: csv_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        n_rows: network.tensor.n_rows(),
        n_cols: network.tensor.n_cols(),
        n_intervals: network.tensor.n_intervals(),
        delta_t: network.delta_t,
        row_ids: network.rows.clone(),
        col_ids: network.cols.clone(),
        truth: truth.cloned(),
    };
    let path = sidecar_path(csv_path);
    let mut f = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut f, &sidecar)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(path)
}

/// Reads quadruples against fixed dictionaries (ids must be known).
pub fn read_csv_quad_with<R: Read>(
    input: R,
    rows: &IdDictionary,
    cols: &IdDictionary,
    n_intervals: usize,
    delta_t: f64,
) -> Result<Network> {
    let table = parse_csv_quad(input, NodeSets::Bipartite)?;
    let mut records = Vec::with_capacity(table.records.len());
    for r in table.records {
        let (rid, cid) = (table.rows.id(r.row), table.cols.id(r.col));
        let unknown =
            |id: &str| parse_error(0, format!("id {id:?} missing from sidecar dictionary"));
        records.push(EventRecord::new(
            rows.get(rid).ok_or_else(|| unknown(rid))?,
            cols.get(cid).ok_or_else(|| unknown(cid))?,
            r.interval,
            r.count,
        ));
    }
    let tensor = CountTensor::from_records(rows.len(), cols.len(), n_intervals, records)?;
    Ok(Network {
        tensor,
        rows: rows.clone(),
        cols: cols.clone(),
        delta_t,
    })
}

/// Loads a dump from its sidecar.
pub fn read_dump(sidecar: &Path) -> Result<(Network, Option<TriPartition>)> {
    let meta: DumpSidecar = serde_json::from_reader(BufReader::new(File::open(sidecar)?))?;
    if meta.format_version != 1 {
        return Err(Error::Config(format!(
            "unsupported dump format version {}",
            meta.format_version
        )));
    }
    if meta.row_ids.len() != meta.n_rows || meta.col_ids.len() != meta.n_cols {
        return Err(Error::Config(
            "sidecar dictionaries disagree with its shape".into(),
        ));
    }
    let data = sidecar.parent().unwrap_or(Path::new(".")).join(&meta.data);
    let network = read_csv_quad_with(
        BufReader::new(File::open(data)?),
        &meta.row_ids,
        &meta.col_ids,
        meta.n_intervals,
        meta.delta_t,
    )?;
    if let Some(p) = &meta.truth {
        p.check_shape(network.tensor.shape())?;
    }
    Ok((network, meta.truth))
}
