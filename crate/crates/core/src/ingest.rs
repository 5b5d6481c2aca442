//! Loading provider, location and specialty records from line-delimited JSON
//! and building the frozen knowledge graph from them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    validate, GeoPoint, Graph, GraphError, HoursOfOperation, Interval, NodeId, Ontology,
    PropertyValue, Props, Violation, Weekday, MINUTES_PER_DAY,
};

pub const PROVIDER: &str = "Provider";
pub const LOCATION: &str = "Location";
pub const SPECIALTY: &str = "Specialty";
pub const DEPARTMENT: &str = "Department";

pub const HAS_SPECIALTY: &str = "HAS_SPECIALTY";
pub const WORKS_AT: &str = "WORKS_AT";
pub const HAS_DEPARTMENT: &str = "HAS_DEPARTMENT";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("bad time of day {0:?}")]
    BadTime(String),
    #[error("ingest failed in strict mode: {} dangling references, {} violations", .0.dangling_refs.len(), .0.violations.len())]
    Strict(Box<IngestReport>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
    X,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderRecord {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub specialties: Vec<String>,
    #[serde(default)]
    pub gender: Option<Gender>,
    #[serde(default)]
    pub languages: Vec<String>,
    #[serde(default)]
    pub accepting_new_patients: bool,
    #[serde(default)]
    pub locations: Vec<String>,
}

/// One opening interval as written in `locations.jsonl`. A close time at or
/// before the open time means the interval runs past midnight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInterval {
    pub day: Weekday,
    pub open: String,
    pub close: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLocation {
    id: String,
    name: String,
    city: String,
    geo: GeoPoint,
    #[serde(default)]
    hours: Vec<RawInterval>,
    #[serde(default)]
    departments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocationRecord {
    pub id: String,
    pub name: String,
    pub city: String,
    pub geo: GeoPoint,
    pub hours: HoursOfOperation,
    pub departments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialtyRecord {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Provider,
    Location,
    Specialty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Providers(Vec<ProviderRecord>),
    Locations(Vec<LocationRecord>),
    Specialties(Vec<SpecialtyRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Providers(r) => r.len(),
            Records::Locations(r) => r.len(),
            Records::Specialties(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuildMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub nodes: BTreeMap<String, usize>,
    pub edges: BTreeMap<String, usize>,
    /// (source record id, missing target)
    pub dangling_refs: Vec<(String, String)>,
    pub violations: Vec<Violation>,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.dangling_refs.is_empty() && self.violations.is_empty()
    }
}

/// Parses `HH:MM` into minutes since midnight. `24:00` is not accepted here;
/// callers normalize it to 1440 first.
pub fn parse_time_of_day(text: &str) -> Result<u16, IngestError> {
    let bad = || IngestError::BadTime(text.to_string());
    let (h, m) = text.split_once(':').ok_or_else(bad)?;
    let digits = |s: &str, max_len: usize| {
        !s.is_empty() && s.len() <= max_len && s.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits(h, 2) || !digits(m, 2) || m.len() != 2 {
        return Err(bad());
    }
    let hours: u16 = h.parse().map_err(|_| bad())?;
    let minutes: u16 = m.parse().map_err(|_| bad())?;
    if hours > 23 || minutes > 59 {
        return Err(bad());
    }
    Ok(hours * 60 + minutes)
}

fn parse_close(text: &str) -> Result<u16, IngestError> {
    if text == "24:00" {
        Ok(MINUTES_PER_DAY)
    } else {
        parse_time_of_day(text)
    }
}

/// Converts raw intervals to validated hours, splitting intervals that run
/// past midnight into two.
pub fn hours_from_raw(raw: &[RawInterval]) -> Result<HoursOfOperation, String> {
    let mut intervals = Vec::with_capacity(raw.len());
    for r in raw {
        let open = parse_time_of_day(&r.open).map_err(|e| e.to_string())?;
        let close = parse_close(&r.close).map_err(|e| e.to_string())?;
        if close > open {
            intervals.push(Interval::new(r.day, open, close).map_err(|e| e.to_string())?);
        } else if close == open {
            return Err(format!("{} interval {}-{} is empty", r.day, r.open, r.close));
        } else {
            intervals.push(Interval::new(r.day, open, MINUTES_PER_DAY).map_err(|e| e.to_string())?);
            if close > 0 {
                intervals.push(Interval::new(r.day.next(), 0, close).map_err(|e| e.to_string())?);
            }
        }
    }
    HoursOfOperation::new(intervals).map_err(|e| e.to_string())
}

trait Record {
    fn id(&self) -> &str;
    fn check(&self) -> Result<(), String>;
}

impl Record for ProviderRecord {
    fn id(&self) -> &str {
        &self.id
    }

    fn check(&self) -> Result<(), String> {
        if self.languages.iter().any(String::is_empty) {
            return Err("empty language code".into());
        }
        Ok(())
    }
}

impl Record for SpecialtyRecord {
    fn id(&self) -> &str {
        &self.id
    }

    fn check(&self) -> Result<(), String> {
        if let Some(s) = self.synonyms.iter().find(|s| s.to_lowercase() != **s || s.is_empty()) {
            return Err(format!("synonym {s:?} must be non-empty lowercase"));
        }
        if self.synonyms.contains(&self.name.to_lowercase()) {
            return Err(format!("name {:?} repeated among synonyms", self.name));
        }
        Ok(())
    }
}

impl Record for RawLocation {
    fn id(&self) -> &str {
        &self.id
    }

    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}

/// Parses every non-empty line, returning each record with its 1-based line number.
fn read_lines<T>(path: &Path) -> Result<Vec<(usize, T)>, IngestError>
where
    T: DeserializeOwned + Record,
{
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |line: usize, reason: String| IngestError::MalformedLine {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(line).map_err(|e| malformed(line_no, e.to_string()))?;
        if record.id().is_empty() {
            return Err(malformed(line_no, "empty id".into()));
        }
        if !seen.insert(record.id().to_string()) {
            return Err(malformed(line_no, format!("duplicate id {:?}", record.id())));
        }
        record.check().map_err(|reason| malformed(line_no, reason))?;
        out.push((line_no, record));
    }
    Ok(out)
}

pub fn load_providers(path: &Path) -> Result<Vec<ProviderRecord>, IngestError> {
    Ok(read_lines(path)?.into_iter().map(|(_, r)| r).collect())
}

pub fn load_specialties(path: &Path) -> Result<Vec<SpecialtyRecord>, IngestError> {
    Ok(read_lines(path)?.into_iter().map(|(_, r)| r).collect())
}

pub fn load_locations(path: &Path) -> Result<Vec<LocationRecord>, IngestError> {
    let raw: Vec<(usize, RawLocation)> = read_lines(path)?;
    raw.into_iter()
        .map(|(line, r)| {
            let hours = hours_from_raw(&r.hours).map_err(|reason| IngestError::MalformedLine {
                path: path.to_path_buf(),
                line,
                reason,
            })?;
            Ok(LocationRecord {
                id: r.id,
                name: r.name,
                city: r.city,
                geo: r.geo,
                hours,
                departments: r.departments,
            })
        })
        .collect()
}

pub fn load_records(path: &Path, kind: RecordKind) -> Result<Records, IngestError> {
    Ok(match kind {
        RecordKind::Provider => Records::Providers(load_providers(path)?),
        RecordKind::Location => Records::Locations(load_locations(path)?),
        RecordKind::Specialty => Records::Specialties(load_specialties(path)?),
    })
}

/// The three fixture files of a data directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub providers: Vec<ProviderRecord>,
    pub locations: Vec<LocationRecord>,
    pub specialties: Vec<SpecialtyRecord>,
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Self, IngestError> {
        Ok(Dataset {
            providers: load_providers(&dir.join("providers.jsonl"))?,
            locations: load_locations(&dir.join("locations.jsonl"))?,
            specialties: load_specialties(&dir.join("specialties.jsonl"))?,
        })
    }
}

fn text_props(pairs: &[(&str, &str)]) -> Props {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), PropertyValue::from(*v)))
        .collect()
}

/// Builds the knowledge graph. Nodes are created in the order specialties,
/// locations, departments (first-seen order), providers; edges in the order
/// HAS_DEPARTMENT, then per provider HAS_SPECIALTY followed by WORKS_AT.
/// The returned graph is frozen.
pub fn build_graph(
    providers: &[ProviderRecord],
    locations: &[LocationRecord],
    specialties: &[SpecialtyRecord],
    ontology: &Ontology,
    mode: BuildMode,
) -> Result<(Graph, IngestReport), IngestError> {
    let mut graph = Graph::new();
    let mut report = IngestReport::default();

    let mut specialty_ids: HashMap<&str, NodeId> = HashMap::new();
    for s in specialties {
        let mut props = text_props(&[("ext_id", &s.id), ("name", &s.name)]);
        props.insert("synonyms".into(), PropertyValue::TextList(s.synonyms.clone()));
        let id = graph.add_node([SPECIALTY], props)?;
        specialty_ids.entry(s.name.as_str()).or_insert(id);
    }

    let mut location_ids: HashMap<&str, NodeId> = HashMap::new();
    for l in locations {
        let mut props = text_props(&[("ext_id", &l.id), ("name", &l.name), ("city", &l.city)]);
        props.insert("geo".into(), l.geo.into());
        props.insert("hours".into(), l.hours.clone().into());
        let id = graph.add_node([LOCATION], props)?;
        location_ids.insert(l.id.as_str(), id);
    }

    let mut department_ids: HashMap<&str, NodeId> = HashMap::new();
    for l in locations {
        for d in &l.departments {
            if !department_ids.contains_key(d.as_str()) {
                let id = graph.add_node([DEPARTMENT], text_props(&[("name", d)]))?;
                department_ids.insert(d.as_str(), id);
            }
        }
    }

    let mut provider_ids = Vec::with_capacity(providers.len());
    for p in providers {
        let mut props = text_props(&[("ext_id", &p.id), ("name", &p.name)]);
        if let Some(g) = p.gender {
            let code = match g {
                Gender::F => "F",
                Gender::M => "M",
                Gender::X => "X",
            };
            props.insert("gender".into(), code.into());
        }
        props.insert("languages".into(), PropertyValue::TextList(p.languages.clone()));
        props.insert(
            "accepting_new_patients".into(),
            p.accepting_new_patients.into(),
        );
        provider_ids.push(graph.add_node([PROVIDER], props)?);
    }

    for l in locations {
        let src = location_ids[l.id.as_str()];
        for d in &l.departments {
            graph.add_edge(HAS_DEPARTMENT, src, department_ids[d.as_str()], Props::new())?;
        }
    }

    for (p, &src) in providers.iter().zip(&provider_ids) {
        for s in &p.specialties {
            match specialty_ids.get(s.as_str()) {
                Some(&dst) => {
                    graph.add_edge(HAS_SPECIALTY, src, dst, Props::new())?;
                }
                None => report.dangling_refs.push((p.id.clone(), s.clone())),
            }
        }
        for l in &p.locations {
            match location_ids.get(l.as_str()) {
                Some(&dst) => {
                    graph.add_edge(WORKS_AT, src, dst, Props::new())?;
                }
                None => report.dangling_refs.push((p.id.clone(), l.clone())),
            }
        }
    }

    graph.freeze();
    for label in [PROVIDER, LOCATION, SPECIALTY, DEPARTMENT] {
        report
            .nodes
            .insert(label.to_string(), graph.node_ids_with_label(label).len());
    }
    for e in graph.edges() {
        *report.edges.entry(e.rel_type.clone()).or_default() += 1;
    }
    report.violations = validate(&graph, ontology);

    if mode == BuildMode::Strict && !report.is_clean() {
        return Err(IngestError::Strict(Box::new(report)));
    }
    Ok((graph, report))
}
