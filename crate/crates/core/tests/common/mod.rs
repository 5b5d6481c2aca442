//! Generators and brute-force oracles shared by the integration tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use fdl_core::config::Config;
use fdl_core::gql::{
    CmpOp, CountTarget, EdgeDirection, EdgePattern, Expr, Function, Literal, NodePattern,
    PathPattern, Query, ReturnItem, SortDirection, SortKey, Value,
};
use fdl_core::graph::{Graph, NodeId, PropertyValue};
use fdl_core::pipeline::Engine;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config as RunnerConfig, RngAlgorithm, TestRng, TestRunner};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn data_dir() -> PathBuf {
    repo_root().join("data")
}

/// The bundled engine, built in memory so tests never depend on a snapshot.
pub fn bundled_engine() -> Engine {
    let config = Config::load(&data_dir().join("fdl.json")).unwrap();
    Engine::build(&config).unwrap().0
}

/// A runner with a fixed seed, so reported case counts are reproducible.
pub fn runner(cases: u32) -> TestRunner {
    let config = RunnerConfig {
        cases,
        failure_persistence: None,
        ..RunnerConfig::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Draws `n` values from a strategy with a fixed seed.
pub fn sample<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
    let mut r = runner(n as u32);
    (0..n)
        .map(|_| strategy.new_tree(&mut r).unwrap().current())
        .collect()
}

// ---------------------------------------------------------------------------
// Query generator

const VAR_POOL: &[&str] = &["a", "b", "p", "loc", "x_1"];
const LABEL_POOL: &[&str] = &["Provider", "Location", "Specialty", "X", "match"];
const REL_POOL: &[&str] = &["WORKS_AT", "HAS_SPECIALTY", "R", "order"];
const PROP_POOL: &[&str] = &["name", "city", "age", "x_1", "count", "Asc"];
const PARAM_POOL: &[&str] = &["lat", "lon", "p_1", "_x", "Where", "match"];

fn pick(pool: &'static [&'static str]) -> impl Strategy<Value = String> {
    proptest::sample::select(pool).prop_map(str::to_string)
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        "[ -~\\n\\t\u{e9}\u{4e2d}]{0,8}".prop_map(Literal::Str),
        (-1.0e6f64..1.0e6).prop_map(Literal::Num),
        (0u32..1000).prop_map(|n| Literal::Num(n as f64)),
        (-50i32..50).prop_map(|n| Literal::Num(n as f64 / 4.0)),
        any::<bool>().prop_map(Literal::Bool),
    ]
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    proptest::sample::select(vec![CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge])
}

fn function() -> impl Strategy<Value = Function> {
    proptest::sample::select(vec![
        Function::Distance,
        Function::Point,
        Function::OpensDuring,
        Function::Lower,
        Function::Contains,
    ])
}

/// Syntactically valid expressions over the bound variables `vars`.
pub fn expr(vars: Vec<String>) -> impl Strategy<Value = Expr> {
    let var = proptest::sample::select(vars);
    let leaf = prop_oneof![
        literal().prop_map(Expr::Literal),
        pick(PARAM_POOL).prop_map(Expr::Param),
        var.clone().prop_map(Expr::Var),
        (var, pick(PROP_POOL)).prop_map(|(v, p)| Expr::Prop(v, p)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (cmp_op(), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::Compare(op, Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::And(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Or(Box::new(l), Box::new(r))),
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            (function(), proptest::collection::vec(inner, 2)).prop_map(|(f, mut args)| {
                args.truncate(f.arity());
                Expr::Call(f, args)
            }),
        ]
    })
}

fn node_pattern(vars: &'static [&'static str]) -> impl Strategy<Value = NodePattern> {
    (pick(vars), proptest::option::of(pick(LABEL_POOL))).prop_map(|(var, label)| NodePattern { var, label })
}

fn path_pattern(vars: &'static [&'static str], max_steps: usize) -> impl Strategy<Value = PathPattern> {
    let edge = (
        proptest::option::of(pick(REL_POOL)),
        prop_oneof![Just(EdgeDirection::LeftToRight), Just(EdgeDirection::RightToLeft)],
    )
        .prop_map(|(rel_type, direction)| EdgePattern { rel_type, direction });
    (
        node_pattern(vars),
        proptest::collection::vec((edge, node_pattern(vars)), 0..=max_steps),
    )
        .prop_map(|(start, steps)| PathPattern { start, steps })
}

fn bound_vars(matches: &[PathPattern]) -> Vec<String> {
    let mut vars: Vec<String> = Vec::new();
    for m in matches {
        for n in m.nodes() {
            if !vars.contains(&n.var) {
                vars.push(n.var.clone());
            }
        }
    }
    vars
}

fn direction() -> impl Strategy<Value = SortDirection> {
    prop_oneof![Just(SortDirection::Asc), Just(SortDirection::Desc)]
}

/// Arbitrary well-formed queries: every variable bound, counts only as
/// return or sort items, aggregate sort keys drawn from the return items.
pub fn query() -> impl Strategy<Value = Query> {
    proptest::collection::vec(path_pattern(VAR_POOL, 2), 1..=2).prop_flat_map(|matches| {
        let vars = bound_vars(&matches);
        let count = prop_oneof![
            Just(CountTarget::Star),
            proptest::sample::select(vars.clone()).prop_map(CountTarget::Var),
        ];
        (
            Just(matches),
            proptest::option::of(expr(vars.clone())),
            proptest::collection::vec(expr(vars.clone()).prop_map(ReturnItem::Expr), 0..=3),
            proptest::option::of(count.prop_map(ReturnItem::Count)),
            proptest::collection::vec((expr(vars), direction()), 0..=2),
            proptest::collection::vec((any::<proptest::sample::Index>(), direction()), 0..=2),
            proptest::option::of(0u64..(1 << 53)),
        )
            .prop_map(|(matches, filter, mut returns, count, plain_keys, agg_keys, limit)| {
                let order = if let Some(c) = count {
                    returns.push(c);
                    agg_keys
                        .into_iter()
                        .map(|(i, direction)| SortKey { item: i.get(&returns).clone(), direction })
                        .collect()
                } else {
                    if returns.is_empty() {
                        returns.push(ReturnItem::Expr(Expr::Var(matches[0].start.var.clone())));
                    }
                    plain_keys
                        .into_iter()
                        .map(|(e, direction)| SortKey { item: ReturnItem::Expr(e), direction })
                        .collect()
                };
                Query { matches, filter, returns, order, limit }
            })
    })
}

/// Mutations of canonical text that can never parse. Each returns the
/// mutated string.
pub fn mutate(text: &str, kind: usize, cut: usize) -> String {
    let boundaries: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
    let at = boundaries[cut % boundaries.len()];
    match kind % 4 {
        // '@' is not a token anywhere outside a string, and a truncated
        // string literal is unterminated.
        0 => format!("{}@", &text[..at]),
        // No query ends with an opening parenthesis.
        1 => format!("{}(", &text[..at]),
        // Every query starts with MATCH.
        2 => text.trim_start_matches("MATCH").to_string(),
        // WHERE is reserved, so it can never start an expression.
        _ => format!("{} WHERE WHERE", &text[..at]),
    }
}

// ---------------------------------------------------------------------------
// Random graphs and a brute-force matcher

pub const G_LABELS: &[&str] = &["A", "B", "C"];
pub const G_RELS: &[&str] = &["R", "S"];
const G_STRINGS: &[&str] = &["x", "y", "z"];

#[derive(Debug, Clone)]
pub struct RawNode {
    pub labels: BTreeSet<String>,
    pub n: Option<i32>,
    pub s: Option<String>,
    pub f: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RawGraph {
    pub nodes: Vec<RawNode>,
    pub edges: Vec<(usize, String, usize)>,
}

impl RawGraph {
    pub fn build(&self) -> Graph {
        let mut g = Graph::new();
        for n in &self.nodes {
            let mut props = BTreeMap::new();
            if let Some(v) = n.n {
                props.insert("n".to_string(), PropertyValue::Number(v as f64));
            }
            if let Some(v) = &n.s {
                props.insert("s".to_string(), PropertyValue::Text(v.clone()));
            }
            if let Some(v) = n.f {
                props.insert("f".to_string(), PropertyValue::Flag(v));
            }
            g.add_node(n.labels.iter().cloned(), props).unwrap();
        }
        for (src, rel, dst) in &self.edges {
            g.add_edge(rel.clone(), NodeId(*src), NodeId(*dst), BTreeMap::new()).unwrap();
        }
        g.freeze();
        g
    }
}

pub fn raw_graph(max_nodes: usize) -> impl Strategy<Value = RawGraph> {
    let node = (
        proptest::sample::subsequence(G_LABELS, 1..=2),
        proptest::option::of(-3i32..4),
        proptest::option::of(pick(G_STRINGS)),
        proptest::option::of(any::<bool>()),
    )
        .prop_map(|(labels, n, s, f)| RawNode {
            labels: labels.into_iter().map(str::to_string).collect(),
            n,
            s,
            f,
        });
    proptest::collection::vec(node, 1..=max_nodes).prop_flat_map(|nodes| {
        let len = nodes.len();
        let edge = (0..len, pick(G_RELS), 0..len);
        (Just(nodes), proptest::collection::vec(edge, 0..=2 * len))
            .prop_map(|(nodes, edges)| RawGraph { nodes, edges })
    })
}

const E_VARS: &[&str] = &["a", "b", "c"];
const E_PROPS: &[&str] = &["n", "s", "f"];

fn operand(vars: Vec<String>) -> impl Strategy<Value = Expr> {
    let var = proptest::sample::select(vars);
    prop_oneof![
        3 => (var.clone(), pick(E_PROPS)).prop_map(|(v, p)| Expr::Prop(v, p)),
        1 => var.prop_map(Expr::Var),
        1 => (-3i32..4).prop_map(|n| Expr::Literal(Literal::Num(n as f64))),
        1 => pick(G_STRINGS).prop_map(|s| Expr::Literal(Literal::Str(s))),
        1 => any::<bool>().prop_map(|b| Expr::Literal(Literal::Bool(b))),
    ]
}

/// Filters that always evaluate to a boolean or null, exercising
/// three-valued logic through missing properties and mixed-type comparisons.
pub fn bool_expr(vars: Vec<String>) -> impl Strategy<Value = Expr> {
    let v = proptest::sample::select(vars.clone());
    let leaf = prop_oneof![
        4 => (cmp_op(), operand(vars.clone()), operand(vars))
            .prop_map(|(op, l, r)| Expr::Compare(op, Box::new(l), Box::new(r))),
        1 => v.prop_map(|v| Expr::Prop(v, "f".to_string())),
        1 => any::<bool>().prop_map(|b| Expr::Literal(Literal::Bool(b))),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::And(Box::new(l), Box::new(r))),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Or(Box::new(l), Box::new(r))),
            inner.prop_map(|e| Expr::Not(Box::new(e))),
        ]
    })
}

/// One or two patterns over at most three variables; labels and relation
/// types from the random-graph vocabulary. No LIMIT, so row multisets are
/// comparable.
pub fn eval_query() -> impl Strategy<Value = Query> {
    let node = || (pick(E_VARS), proptest::option::of(pick(G_LABELS))).prop_map(|(var, label)| NodePattern { var, label });
    let edge = (
        proptest::option::of(pick(G_RELS)),
        prop_oneof![Just(EdgeDirection::LeftToRight), Just(EdgeDirection::RightToLeft)],
    )
        .prop_map(|(rel_type, direction)| EdgePattern { rel_type, direction });
    let path = (node(), proptest::collection::vec((edge, node()), 0..=2))
        .prop_map(|(start, steps)| PathPattern { start, steps });
    proptest::collection::vec(path, 1..=2).prop_flat_map(|matches: Vec<PathPattern>| {
        let vars = bound_vars(&matches);
        let v = proptest::sample::select(vars.clone());
        let item = prop_oneof![
            v.clone().prop_map(Expr::Var),
            (v.clone(), pick(E_PROPS)).prop_map(|(v, p)| Expr::Prop(v, p)),
        ];
        (
            Just(matches),
            proptest::option::of(bool_expr(vars)),
            proptest::collection::vec(item, 0..=2),
            proptest::option::of(prop_oneof![
                Just(CountTarget::Star),
                v.prop_map(CountTarget::Var),
            ]),
            any::<bool>(),
        )
            .prop_map(|(matches, filter, items, count, sort)| {
                let mut returns: Vec<ReturnItem> = items.into_iter().map(ReturnItem::Expr).collect();
                if let Some(c) = count {
                    returns.push(ReturnItem::Count(c));
                } else if returns.is_empty() {
                    returns.push(ReturnItem::Expr(Expr::Var(matches[0].start.var.clone())));
                }
                let order = if sort {
                    vec![SortKey { item: returns[0].clone(), direction: SortDirection::Desc }]
                } else {
                    Vec::new()
                };
                Query { matches, filter, returns, order, limit: None }
            })
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Val {
    Null,
    Bool(bool),
    Num(f64),
    Str(String),
    Node(usize),
}

fn prop_of(raw: &RawGraph, node: usize, prop: &str) -> Val {
    let n = &raw.nodes[node];
    match prop {
        "n" => n.n.map_or(Val::Null, |v| Val::Num(v as f64)),
        "s" => n.s.clone().map_or(Val::Null, Val::Str),
        "f" => n.f.map_or(Val::Null, Val::Bool),
        _ => Val::Null,
    }
}

fn oracle_value(raw: &RawGraph, e: &Expr, env: &BTreeMap<String, usize>) -> Val {
    match e {
        Expr::Literal(Literal::Num(n)) => Val::Num(*n),
        Expr::Literal(Literal::Str(s)) => Val::Str(s.clone()),
        Expr::Literal(Literal::Bool(b)) => Val::Bool(*b),
        Expr::Var(v) => Val::Node(env[v]),
        Expr::Prop(v, p) => prop_of(raw, env[v], p),
        Expr::Compare(op, l, r) => {
            let (l, r) = (oracle_value(raw, l, env), oracle_value(raw, r, env));
            if l == Val::Null || r == Val::Null {
                return Val::Null;
            }
            let ord = match (&l, &r) {
                (Val::Num(a), Val::Num(b)) => a.partial_cmp(b),
                (Val::Str(a), Val::Str(b)) => Some(a.cmp(b)),
                _ => None,
            };
            use std::cmp::Ordering::*;
            match (op, ord) {
                (CmpOp::Eq, _) => Val::Bool(l == r),
                (CmpOp::Ne, _) => Val::Bool(l != r),
                (_, None) => Val::Null,
                (CmpOp::Lt, Some(o)) => Val::Bool(o == Less),
                (CmpOp::Le, Some(o)) => Val::Bool(o != Greater),
                (CmpOp::Gt, Some(o)) => Val::Bool(o == Greater),
                (CmpOp::Ge, Some(o)) => Val::Bool(o != Less),
            }
        }
        Expr::Not(_) | Expr::And(..) | Expr::Or(..) => match kleene(raw, e, env) {
            Some(b) => Val::Bool(b),
            None => Val::Null,
        },
        other => panic!("oracle does not evaluate {other}"),
    }
}

fn kleene(raw: &RawGraph, e: &Expr, env: &BTreeMap<String, usize>) -> Option<bool> {
    match e {
        Expr::Not(x) => kleene(raw, x, env).map(|b| !b),
        Expr::And(l, r) => match (kleene(raw, l, env), kleene(raw, r, env)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Expr::Or(l, r) => match (kleene(raw, l, env), kleene(raw, r, env)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        _ => match oracle_value(raw, e, env) {
            Val::Bool(b) => Some(b),
            Val::Null => None,
            other => panic!("non-boolean filter value {other:?}"),
        },
    }
}

fn to_value(v: Val) -> Value {
    match v {
        Val::Null => Value::Null,
        Val::Bool(b) => Value::Bool(b),
        Val::Num(n) => Value::Num(n),
        Val::Str(s) => Value::Str(s),
        Val::Node(i) => Value::Node(NodeId(i)),
    }
}

/// Enumerates every assignment of nodes to the query's variables and keeps
/// those satisfying all patterns and the filter. Rows come back in
/// canonical order.
pub fn brute_force(raw: &RawGraph, q: &Query) -> Vec<Vec<Value>> {
    let vars = bound_vars(&q.matches);
    let edges: HashSet<(usize, &str, usize)> = raw.edges.iter().map(|(s, r, d)| (*s, r.as_str(), *d)).collect();
    let has_edge = |from: usize, to: usize, e: &EdgePattern| {
        let (s, d) = match e.direction {
            EdgeDirection::LeftToRight => (from, to),
            EdgeDirection::RightToLeft => (to, from),
        };
        match &e.rel_type {
            Some(r) => edges.contains(&(s, r.as_str(), d)),
            None => G_RELS.iter().any(|r| edges.contains(&(s, *r, d))),
        }
    };
    let n = raw.nodes.len();
    let total = n.pow(vars.len() as u32);
    let mut kept: Vec<BTreeMap<String, usize>> = Vec::new();
    for code in 0..total {
        let mut rest = code;
        let env: BTreeMap<String, usize> = vars
            .iter()
            .map(|v| {
                let id = rest % n;
                rest /= n;
                (v.clone(), id)
            })
            .collect();
        let label_ok = |p: &NodePattern| p.label.as_ref().is_none_or(|l| raw.nodes[env[&p.var]].labels.contains(l));
        let matched = q.matches.iter().all(|m| {
            m.nodes().all(label_ok)
                && m.steps.iter().enumerate().all(|(i, (edge, node))| {
                    let prev = if i == 0 { &m.start } else { &m.steps[i - 1].1 };
                    has_edge(env[&prev.var], env[&node.var], edge)
                })
        });
        let keep = matched && q.filter.as_ref().is_none_or(|f| kleene(raw, f, &env) == Some(true));
        if keep {
            kept.push(env);
        }
    }

    let mut rows: Vec<Vec<Value>> = if q.is_aggregate() {
        let mut groups: Vec<(Vec<Val>, u64)> = Vec::new();
        for env in &kept {
            let key: Vec<Val> = q
                .returns
                .iter()
                .filter_map(ReturnItem::expr)
                .map(|e| oracle_value(raw, e, env))
                .collect();
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some(g) => g.1 += 1,
                None => groups.push((key, 1)),
            }
        }
        if groups.is_empty() && q.returns.iter().all(ReturnItem::is_aggregate) {
            groups.push((Vec::new(), 0));
        }
        groups
            .into_iter()
            .map(|(key, count)| {
                let mut key = key.into_iter();
                q.returns
                    .iter()
                    .map(|r| match r {
                        ReturnItem::Expr(_) => to_value(key.next().unwrap()),
                        ReturnItem::Count(_) => Value::Num(count as f64),
                    })
                    .collect()
            })
            .collect()
    } else {
        kept.iter()
            .map(|env| {
                q.returns
                    .iter()
                    .map(|r| to_value(oracle_value(raw, r.expr().unwrap(), env)))
                    .collect()
            })
            .collect()
    };
    canonical_sort(&mut rows);
    rows
}

pub fn canonical_sort(rows: &mut [Vec<Value>]) {
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

// ---------------------------------------------------------------------------
// Oracles over the raw bundled JSONL

pub fn read_jsonl(name: &str) -> Vec<serde_json::Value> {
    std::fs::read_to_string(data_dir().join(name))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// Great-circle distance with a mean Earth radius of 6371 km.
pub fn haversine(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * 6371.0 * a.sqrt().asin()
}

fn minutes(t: &str) -> u32 {
    let (h, m) = t.split_once(':').unwrap();
    h.parse::<u32>().unwrap() * 60 + m.parse::<u32>().unwrap()
}

/// True when any opening interval, after splitting at midnight, falls on a
/// Saturday or Sunday.
pub fn open_on_weekend(location: &serde_json::Value) -> bool {
    const DAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
    location["hours"].as_array().unwrap().iter().any(|h| {
        let day = DAYS.iter().position(|d| *d == h["day"].as_str().unwrap()).unwrap();
        let (open, close) = (minutes(h["open"].as_str().unwrap()), minutes(h["close"].as_str().unwrap()));
        let weekend = |d: usize| d % 7 >= 5;
        if close > open {
            weekend(day)
        } else {
            // Crosses midnight: [open, 24:00) today and [00:00, close) tomorrow.
            weekend(day) || (close > 0 && weekend(day + 1))
        }
    })
}

/// Pediatrics providers with at least one weekend-open location, each with
/// its distance to the nearest such location.
pub fn weekend_pediatricians(lat: f64, lon: f64) -> BTreeMap<String, f64> {
    let locations: BTreeMap<String, serde_json::Value> = read_jsonl("locations.jsonl")
        .into_iter()
        .map(|l| (l["id"].as_str().unwrap().to_string(), l))
        .collect();
    let mut out = BTreeMap::new();
    for p in read_jsonl("providers.jsonl") {
        let specialties = p["specialties"].as_array().unwrap();
        if !specialties.iter().any(|s| s == "Pediatrics") {
            continue;
        }
        let nearest = p["locations"]
            .as_array()
            .unwrap()
            .iter()
            .map(|id| &locations[id.as_str().unwrap()])
            .filter(|l| open_on_weekend(l))
            .map(|l| haversine(lat, lon, l["geo"]["lat"].as_f64().unwrap(), l["geo"]["lon"].as_f64().unwrap()))
            .min_by(f64::total_cmp);
        if let Some(d) = nearest {
            out.insert(p["id"].as_str().unwrap().to_string(), d);
        }
    }
    out
}

/// Distinct (provider, location) pairs with a Pediatrics provider, counted
/// per location city.
pub fn pediatricians_per_city() -> BTreeMap<String, u64> {
    let city: BTreeMap<String, String> = read_jsonl("locations.jsonl")
        .into_iter()
        .map(|l| (l["id"].as_str().unwrap().to_string(), l["city"].as_str().unwrap().to_string()))
        .collect();
    let mut out = BTreeMap::new();
    for p in read_jsonl("providers.jsonl") {
        if !p["specialties"].as_array().unwrap().iter().any(|s| s == "Pediatrics") {
            continue;
        }
        let locs: BTreeSet<&str> = p["locations"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
        for l in locs {
            *out.entry(city[l].clone()).or_default() += 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Merge inputs

use fdl_core::rank::{KeywordCandidate, KgCandidate};

#[derive(Debug, Clone)]
pub struct MergeInput {
    pub confidence: f64,
    pub kg: Vec<KgCandidate>,
    pub kw: Vec<KeywordCandidate>,
}

/// Overlapping id ranges with repeats; BM25 scores on a coarse grid so ties
/// are exact, distances continuous so mixed-feature ties do not occur.
pub fn merge_input() -> impl Strategy<Value = MergeInput> {
    let distance = proptest::option::of(0.0f64..80.0);
    let kg = proptest::collection::vec((0usize..30, distance.clone()), 0..15).prop_map(|v| {
        v.into_iter()
            .map(|(i, d)| KgCandidate { entity_ref: NodeId(i), distance_km: d })
            .collect::<Vec<_>>()
    });
    let kw = proptest::collection::vec((0usize..30, 1u32..80, distance), 0..15).prop_map(|v| {
        let mut v: Vec<KeywordCandidate> = v
            .into_iter()
            .map(|(i, s, d)| KeywordCandidate { entity_ref: NodeId(i), bm25: s as f64 / 4.0, distance_km: d })
            .collect();
        v.sort_by(|a, b| b.bm25.total_cmp(&a.bm25).then(a.entity_ref.cmp(&b.entity_ref)));
        v
    });
    (0.0f64..1.0, kg, kw).prop_map(|(confidence, kg, kw)| MergeInput { confidence, kg, kw })
}

/// One bundled engine per test binary, for property tests that would
/// otherwise rebuild it per case.
pub fn bundled_engine_cached() -> &'static Engine {
    static ENGINE: std::sync::OnceLock<Engine> = std::sync::OnceLock::new();
    ENGINE.get_or_init(bundled_engine)
}
