//! The search service: ingest, snapshot loading, and the single search
//! pipeline shared by the CLI and the HTTP server.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::gql::{self, haversine_km, Params, ResultTable, ReturnItem, Value};
use crate::graph::{Direction, GeoPoint, Graph, GraphError, Node, NodeId, Ontology, OntologyError};
use crate::ingest::{
    build_graph, BuildMode, Dataset, IngestError, IngestReport, SpecialtyRecord, LOCATION,
    PROVIDER, SPECIALTY, WORKS_AT,
};
use crate::keyword::{build_index, search_tokens, InvertedIndex, KeywordError};
use crate::nl::{
    instantiate, interpret_tokens, load_templates, Interpretation, Lexicon, LexiconError, SlotType,
    Template, TemplateError, UserContext,
};
use crate::rank::{merge, KeywordCandidate, KgCandidate, MergePolicy, RankError, Source};
use crate::text::{correct_all, normalize, Vocabulary, STOPWORDS};

pub const GRAPH_SNAPSHOT: &str = "graph.json";
pub const INDEX_SNAPSHOT: &str = "index.json";

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no snapshot at {0}; run ingest first")]
    SnapshotMissing(PathBuf),
    #[error("graph snapshot: {0}")]
    Graph(#[from] GraphError),
    #[error("index snapshot: {0}")]
    Index(#[from] KeywordError),
    #[error("ontology: {0}")]
    Ontology(#[from] OntologyError),
    #[error("templates: {0}")]
    Templates(#[from] TemplateError),
    #[error("lexicon: {0}")]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Policy(#[from] RankError),
}

fn read(path: &Path) -> Result<String, EngineError> {
    std::fs::read_to_string(path).map_err(|source| EngineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), EngineError> {
    std::fs::write(path, text).map_err(|source| EngineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads the data directory, builds and validates the graph, and indexes it.
pub fn ingest(config: &Config) -> Result<(Graph, InvertedIndex, IngestReport), EngineError> {
    let ontology = Ontology::from_json(&read(&config.ontology_path)?)?;
    let data = Dataset::load(&config.data_dir)?;
    let mode = if config.lenient {
        BuildMode::Lenient
    } else {
        BuildMode::Strict
    };
    let (graph, report) = build_graph(&data.providers, &data.locations, &data.specialties, &ontology, mode)?;
    let index = build_index(&graph);
    Ok((graph, index, report))
}

pub fn write_snapshot(dir: &Path, graph: &Graph, index: &InvertedIndex) -> Result<(), EngineError> {
    std::fs::create_dir_all(dir).map_err(|source| EngineError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write(&dir.join(GRAPH_SNAPSHOT), &graph.to_snapshot_json())?;
    write(&dir.join(INDEX_SNAPSHOT), &index.to_json())
}

/// Specialty records recovered from the graph's Specialty nodes.
pub fn specialty_records(graph: &Graph) -> Vec<SpecialtyRecord> {
    graph
        .nodes_with_label(SPECIALTY)
        .into_iter()
        .map(|n| SpecialtyRecord {
            id: text(n, "ext_id").unwrap_or_default().to_string(),
            name: text(n, "name").unwrap_or_default().to_string(),
            synonyms: n
                .prop("synonyms")
                .and_then(|v| v.as_text_list())
                .map(<[String]>::to_vec)
                .unwrap_or_default(),
        })
        .collect()
}

fn text<'a>(node: &'a Node, prop: &str) -> Option<&'a str> {
    node.prop(prop).and_then(|v| v.as_text())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchRequest {
    pub q: String,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    pub city: Option<String>,
    pub k: Option<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum RequestError {
    #[error("q must be non-empty")]
    EmptyQuery,
    #[error("lat and lon must be given together")]
    LoneCoordinate,
    #[error("k must be at least 1")]
    BadK,
    #[error("invalid coordinates: {0}")]
    BadCoordinates(String),
}

impl SearchRequest {
    /// Checks the request and returns the caller's position, if any.
    pub fn validate(&self) -> Result<Option<GeoPoint>, RequestError> {
        if self.q.trim().is_empty() {
            return Err(RequestError::EmptyQuery);
        }
        if self.k == Some(0) {
            return Err(RequestError::BadK);
        }
        match (self.lat, self.lon) {
            (Some(lat), Some(lon)) => GeoPoint::new(lat, lon)
                .map(Some)
                .map_err(|e| RequestError::BadCoordinates(e.to_string())),
            (None, None) => Ok(None),
            _ => Err(RequestError::LoneCoordinate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpretationOut {
    pub template_id: String,
    pub bindings: BTreeMap<SlotType, String>,
    pub confidence: f64,
    pub instantiated_query: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultItem {
    pub entity_id: String,
    pub name: String,
    pub kind: String,
    pub city: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_km: Option<f64>,
    pub score: f64,
    pub source: Source,
    /// Group size, for aggregate rows only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResponse {
    pub query: String,
    pub corrected_query: String,
    pub interpretation: Option<InterpretationOut>,
    pub results: Vec<ResultItem>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl SearchResponse {
    /// The JSON body served by both the CLI and the HTTP API.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("response serializes")
    }
}

/// An immutable loaded snapshot plus templates, lexicon and policy.
#[derive(Debug, Clone)]
pub struct Engine {
    graph: Graph,
    index: InvertedIndex,
    templates: Vec<Template>,
    lexicon: Lexicon,
    vocabulary: Vocabulary,
    policy: MergePolicy,
    default_k: usize,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

struct Kg {
    interpretation: InterpretationOut,
    confidence: f64,
    aggregate: bool,
    table: ResultTable,
}

impl Engine {
    /// Specialty names and synonyms from the graph are added to the lexicon.
    /// The spell-correction vocabulary is the lexicon words, the index terms
    /// and the stopwords.
    pub fn new(
        graph: Graph,
        index: InvertedIndex,
        templates: Vec<Template>,
        mut lexicon: Lexicon,
        policy: MergePolicy,
        default_k: usize,
    ) -> Result<Engine, EngineError> {
        policy.validate()?;
        lexicon.augment_with_specialties(&specialty_records(&graph));
        let mut vocabulary = Vocabulary::new();
        lexicon.add_words_to(&mut vocabulary);
        vocabulary.extend(index.terms());
        vocabulary.extend(STOPWORDS.iter().copied());
        Ok(Engine {
            graph,
            index,
            templates,
            lexicon,
            vocabulary,
            policy,
            default_k: default_k.max(1),
        })
    }

    fn with_parts(config: &Config, graph: Graph, index: InvertedIndex) -> Result<Engine, EngineError> {
        let templates = load_templates(&read(&config.templates_path)?)?;
        let lexicon = Lexicon::from_json(&read(&config.lexicon_path)?)?;
        Engine::new(graph, index, templates, lexicon, config.policy, config.default_k)
    }

    /// Ingests the data directory in memory without touching the snapshot.
    pub fn build(config: &Config) -> Result<(Engine, IngestReport), EngineError> {
        let (graph, index, report) = ingest(config)?;
        Ok((Engine::with_parts(config, graph, index)?, report))
    }

    /// Loads the snapshot written by `ingest`.
    pub fn load(config: &Config) -> Result<Engine, EngineError> {
        let graph_path = config.snapshot_dir.join(GRAPH_SNAPSHOT);
        if !graph_path.exists() {
            return Err(EngineError::SnapshotMissing(config.snapshot_dir.clone()));
        }
        let graph = Graph::from_snapshot_json(&read(&graph_path)?)?;
        let index = InvertedIndex::from_json(&read(&config.snapshot_dir.join(INDEX_SNAPSHOT))?)?;
        Engine::with_parts(config, graph, index)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn default_k(&self) -> usize {
        self.default_k
    }

    fn corrected_tokens(&self, q: &str) -> Vec<String> {
        correct_all(&normalize(q), &self.vocabulary)
    }

    /// Ranked interpretations of a question.
    pub fn interpret(&self, q: &str) -> Vec<Interpretation> {
        interpret_tokens(&self.corrected_tokens(q), &self.templates, &self.lexicon)
    }

    fn geo_of(&self, id: NodeId) -> Option<GeoPoint> {
        self.graph.node(id)?.prop("geo")?.as_geo()
    }

    fn distance(&self, loc: NodeId, user: Option<GeoPoint>) -> Option<f64> {
        Some(haversine_km(user?, self.geo_of(loc)?))
    }

    /// The location shown for a provider found without one: the nearest with
    /// coordinates when the caller's position is known, else the lowest id.
    fn default_location(&self, provider: NodeId, user: Option<GeoPoint>) -> Option<NodeId> {
        let locations: Vec<NodeId> = self
            .graph
            .neighbors(provider, Some(WORKS_AT), Direction::Out)
            .ok()?
            .into_iter()
            .map(|(_, n)| n.id)
            .collect();
        let nearest = locations
            .iter()
            .filter_map(|&l| self.distance(l, user).map(|d| (d, l)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        nearest.map(|(_, l)| l).or_else(|| locations.iter().min().copied())
    }

    fn item(&self, id: NodeId, location: Option<NodeId>, user: Option<GeoPoint>) -> ResultItem {
        let node = self.graph.node(id).expect("result ids come from the graph");
        let kind = if node.has_label(PROVIDER) {
            "provider"
        } else if node.has_label(LOCATION) {
            "location"
        } else {
            node.primary_label()
        }
        .to_lowercase();
        let place = if node.has_label(LOCATION) { Some(id) } else { location };
        let place_node = place.and_then(|l| self.graph.node(l));
        ResultItem {
            entity_id: text(node, "ext_id").unwrap_or_default().to_string(),
            name: text(node, "name").unwrap_or_default().to_string(),
            kind,
            city: place_node.and_then(|n| text(n, "city")).map(str::to_string),
            distance_km: place.and_then(|l| self.distance(l, user)),
            score: 0.0,
            source: Source::Kg,
            count: None,
        }
    }

    /// Runs the ranked interpretations until one instantiates and evaluates.
    fn run_kg(&self, interps: &[Interpretation], ctx: &UserContext) -> Option<Kg> {
        let mut params = Params::new();
        if let (Some(lat), Some(lon)) = (ctx.lat, ctx.lon) {
            params.insert("lat".into(), Value::Num(lat));
            params.insert("lon".into(), Value::Num(lon));
        }
        for interp in interps {
            let Some(template) = self.templates.iter().find(|t| t.id == interp.template_id) else {
                continue;
            };
            let Ok(text) = instantiate(interp, template, ctx) else {
                continue;
            };
            let query = gql::parse(&text).expect("instantiate only returns parseable text");
            let Ok(table) = gql::evaluate(&query, &self.graph, &params) else {
                continue;
            };
            return Some(Kg {
                interpretation: InterpretationOut {
                    template_id: interp.template_id.clone(),
                    bindings: interp.bindings.clone(),
                    confidence: interp.confidence,
                    instantiated_query: text,
                },
                confidence: interp.confidence,
                aggregate: query.is_aggregate(),
                table,
            });
        }
        None
    }

    fn aggregate_items(&self, kg: &Kg, k: usize) -> Vec<ResultItem> {
        let query = gql::parse(&kg.interpretation.instantiated_query).expect("parsed before");
        let count_col = query.returns.iter().position(ReturnItem::is_aggregate);
        let city_col = kg.table.columns.iter().position(|c| c.ends_with(".city"));
        kg.table
            .rows
            .iter()
            .take(k)
            .map(|row| {
                let key: Vec<String> = row
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| Some(*i) != count_col)
                    .map(|(_, v)| value_text(v))
                    .collect();
                ResultItem {
                    entity_id: format!("group:{}", key.join("|")),
                    name: if key.is_empty() { "all".to_string() } else { key.join(", ") },
                    kind: "aggregate".to_string(),
                    city: city_col.and_then(|i| row[i].as_str()).map(str::to_string),
                    distance_km: None,
                    score: 1.0,
                    source: Source::Kg,
                    count: count_col.and_then(|i| row[i].as_num()).map(|n| n as u64),
                }
            })
            .collect()
    }

    /// Entities in first-row order, each with the location it is shown at:
    /// for providers, the nearest location appearing in its rows (or the
    /// first such row without a caller position).
    fn kg_entities(&self, table: &ResultTable, user: Option<GeoPoint>) -> Vec<(NodeId, Option<NodeId>)> {
        let mut order: Vec<NodeId> = Vec::new();
        let mut shown: BTreeMap<NodeId, Option<NodeId>> = BTreeMap::new();
        for row in &table.rows {
            let mut nodes = row.iter().filter_map(Value::as_node);
            let Some(entity) = nodes.next() else { continue };
            let row_location = nodes.find(|&n| self.graph.node(n).is_some_and(|n| n.has_label(LOCATION)));
            match shown.get_mut(&entity) {
                None => {
                    order.push(entity);
                    shown.insert(entity, row_location);
                }
                Some(current) => {
                    let better = match (row_location, *current) {
                        (Some(new), Some(old)) => match (self.distance(new, user), self.distance(old, user)) {
                            (Some(dn), Some(d_old)) => dn < d_old,
                            _ => false,
                        },
                        (Some(_), None) => true,
                        _ => false,
                    };
                    if better {
                        *current = row_location;
                    }
                }
            }
        }
        order
            .into_iter()
            .map(|e| {
                let loc = shown[&e].or_else(|| self.default_location(e, user));
                (e, loc)
            })
            .collect()
    }

    /// The keyword path alone, as response items in keyword rank order.
    pub fn keyword_search(&self, q: &str, k: usize) -> Vec<ResultItem> {
        search_tokens(&self.corrected_tokens(q), k, &self.index)
            .into_iter()
            .map(|h| {
                let mut item = self.item(h.entity_ref, self.default_location(h.entity_ref, None), None);
                item.score = h.score;
                item.source = Source::Keyword;
                item
            })
            .collect()
    }

    /// interpret, instantiate, evaluate, keyword search, merge, truncate.
    pub fn search(&self, req: &SearchRequest) -> Result<SearchResponse, RequestError> {
        let total = Instant::now();
        let user = req.validate()?;
        let k = req.k.unwrap_or(self.default_k);
        let mut timings = BTreeMap::new();

        let start = Instant::now();
        let tokens = self.corrected_tokens(&req.q);
        let interps = interpret_tokens(&tokens, &self.templates, &self.lexicon);
        timings.insert("interpret".to_string(), elapsed_ms(start));

        let start = Instant::now();
        let ctx = UserContext {
            lat: req.lat,
            lon: req.lon,
            city: req.city.clone(),
            k: Some(k),
        };
        let kg = self.run_kg(&interps, &ctx);
        timings.insert("graph".to_string(), elapsed_ms(start));

        let start = Instant::now();
        let hits = search_tokens(&tokens, k, &self.index);
        timings.insert("keyword".to_string(), elapsed_ms(start));

        let start = Instant::now();
        let aggregate = kg
            .as_ref()
            .filter(|kg| kg.aggregate)
            // Group rows are capped only by an explicit k.
            .map(|kg| self.aggregate_items(kg, req.k.unwrap_or(usize::MAX)))
            .filter(|items| !items.is_empty());
        let results = match aggregate {
            Some(items) => items,
            None => {
                let (confidence, entities) = match &kg {
                    Some(kg) if !kg.aggregate => (kg.confidence, self.kg_entities(&kg.table, user)),
                    _ => (0.0, Vec::new()),
                };
                let mut shown: BTreeMap<NodeId, Option<NodeId>> = entities.iter().copied().collect();
                for h in &hits {
                    shown
                        .entry(h.entity_ref)
                        .or_insert_with(|| self.default_location(h.entity_ref, user));
                }
                let distance = |id: NodeId| -> Option<f64> {
                    let node = self.graph.node(id)?;
                    let place = if node.has_label(LOCATION) { Some(id) } else { shown[&id] };
                    self.distance(place?, user)
                };
                let kg_candidates: Vec<KgCandidate> = entities
                    .iter()
                    .map(|&(e, _)| KgCandidate {
                        entity_ref: e,
                        distance_km: distance(e),
                    })
                    .collect();
                let kw_candidates: Vec<KeywordCandidate> = hits
                    .iter()
                    .map(|h| KeywordCandidate {
                        entity_ref: h.entity_ref,
                        bm25: h.score,
                        distance_km: distance(h.entity_ref),
                    })
                    .collect();
                merge(confidence, &kg_candidates, &kw_candidates, &self.policy)
                    .expect("policy validated at construction")
                    .into_iter()
                    .take(k)
                    .map(|r| {
                        let mut item = self.item(r.entity_ref, shown[&r.entity_ref], user);
                        item.score = r.score;
                        item.source = r.source;
                        item
                    })
                    .collect()
            }
        };
        timings.insert("merge".to_string(), elapsed_ms(start));
        timings.insert("total".to_string(), elapsed_ms(total));

        Ok(SearchResponse {
            query: req.q.clone(),
            corrected_query: tokens.join(" "),
            interpretation: kg.map(|kg| kg.interpretation),
            results,
            timings_ms: timings,
        })
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Null => "null".to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Num(n) => n.to_string(),
        Value::Str(s) => s.clone(),
        Value::List(items) => items.join(","),
        Value::Node(id) => id.to_string(),
        Value::Geo(g) => format!("{},{}", g.lat(), g.lon()),
        Value::Hours(_) => "hours".to_string(),
    }
}

/// Ids of the providers and locations in a set of results.
pub fn entity_ids(results: &[ResultItem]) -> BTreeSet<&str> {
    results
        .iter()
        .filter(|r| r.kind != "aggregate")
        .map(|r| r.entity_id.as_str())
        .collect()
}
