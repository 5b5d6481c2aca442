use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use thiserror::Error;

use super::ast::*;
use super::functions::{haversine_km, parse_window};
use crate::graph::{GeoPoint, Graph, HoursOfOperation, NodeId, PropertyValue};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("missing parameter ${0}")]
    MissingParameter(String),
    #[error("{function} expects {expected}, got {found}")]
    TypeMismatch {
        function: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("unknown window {0:?} (named windows: WEEKEND = Saturday 00:00 to Sunday 24:00 local time, WEEKDAY, EVENING = 17:00-21:00, or a day name; explicit windows look like \"Sat 09:00-12:00, Sun 10:00-14:00\")")]
    UnknownWindow(String),
    #[error("invalid argument to {function}: {detail}")]
    InvalidArgument { function: String, detail: String },
    #[error("queries run on frozen graphs only")]
    GraphNotFrozen,
}

/// A runtime value: a property value, a node reference, or null for missing
/// properties.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Num(f64),
    Str(String),
    List(Vec<String>),
    Geo(GeoPoint),
    Hours(HoursOfOperation),
    Node(NodeId),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Num(_) => "number",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Geo(_) => "geo point",
            Value::Hours(_) => "hours",
            Value::Node(_) => "node",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Num(_) => 1,
            Value::Str(_) => 2,
            Value::List(_) => 3,
            Value::Geo(_) => 4,
            Value::Hours(_) => 5,
            Value::Node(_) => 6,
            Value::Null => 7,
        }
    }

    /// Total order used for sorting and grouping: values order by kind first,
    /// then naturally within a kind. Null sorts last.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Num(a), Value::Num(b)) => a.total_cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::List(a), Value::List(b)) => a.cmp(b),
            (Value::Geo(a), Value::Geo(b)) => a
                .lat()
                .total_cmp(&b.lat())
                .then(a.lon().total_cmp(&b.lon())),
            (Value::Hours(a), Value::Hours(b)) => a.intervals().cmp(b.intervals()),
            (Value::Node(a), Value::Node(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }

    pub fn as_node(&self) -> Option<NodeId> {
        match self {
            Value::Node(id) => Some(*id),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl From<&PropertyValue> for Value {
    fn from(p: &PropertyValue) -> Self {
        match p {
            PropertyValue::Text(s) => Value::Str(s.clone()),
            PropertyValue::Number(n) => Value::Num(*n),
            PropertyValue::Flag(b) => Value::Bool(*b),
            PropertyValue::TextList(l) => Value::List(l.clone()),
            PropertyValue::Geo(g) => Value::Geo(*g),
            PropertyValue::Hours(h) => Value::Hours(h.clone()),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Null => s.serialize_unit(),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Num(n) => s.serialize_f64(*n),
            Value::Str(v) => s.serialize_str(v),
            Value::List(items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for i in items {
                    seq.serialize_element(i)?;
                }
                seq.end()
            }
            Value::Geo(g) => g.serialize(s),
            Value::Hours(h) => h.serialize(s),
            Value::Node(id) => {
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("node", &id.0)?;
                map.end()
            }
        }
    }
}

/// Query output. Serializes as `{"columns": [...], "rows": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

pub type Params = BTreeMap<String, Value>;

type Binding = Vec<NodeId>;

struct Matcher<'a> {
    graph: &'a Graph,
    query: &'a Query,
    slots: BTreeMap<&'a str, usize>,
    current: Vec<Option<NodeId>>,
    found: BTreeSet<Binding>,
}

impl<'a> Matcher<'a> {
    fn node_ok(&self, id: NodeId, pattern: &NodePattern) -> bool {
        pattern
            .label
            .as_deref()
            .is_none_or(|l| self.graph.nodes()[id.0].has_label(l))
    }

    fn match_pattern(&mut self, pattern_idx: usize) {
        if pattern_idx == self.query.matches.len() {
            self.found
                .insert(self.current.iter().map(|b| b.expect("all bound")).collect());
            return;
        }
        let start = &self.query.matches[pattern_idx].start;
        let slot = self.slots[start.var.as_str()];
        match self.current[slot] {
            Some(id) => {
                if self.node_ok(id, start) {
                    self.match_step(pattern_idx, 0, id);
                }
            }
            None => {
                let candidates: Vec<NodeId> = match &start.label {
                    Some(l) => self.graph.node_ids_with_label(l).to_vec(),
                    None => self.graph.nodes().iter().map(|n| n.id).collect(),
                };
                for id in candidates {
                    self.current[slot] = Some(id);
                    self.match_step(pattern_idx, 0, id);
                }
                self.current[slot] = None;
            }
        }
    }

    fn match_step(&mut self, pattern_idx: usize, step_idx: usize, at: NodeId) {
        let pattern = &self.query.matches[pattern_idx];
        if step_idx == pattern.steps.len() {
            self.match_pattern(pattern_idx + 1);
            return;
        }
        let (edge, node) = &pattern.steps[step_idx];
        let outgoing = edge.direction == EdgeDirection::LeftToRight;
        let slot = self.slots[node.var.as_str()];
        let mut targets: Vec<NodeId> = self
            .graph
            .adjacent_ids(at, edge.rel_type.as_deref(), outgoing)
            .filter(|&id| self.node_ok(id, node))
            .collect();
        targets.sort_unstable();
        targets.dedup();
        match self.current[slot] {
            Some(bound) => {
                if targets.binary_search(&bound).is_ok() {
                    self.match_step(pattern_idx, step_idx + 1, bound);
                }
            }
            None => {
                for id in targets {
                    self.current[slot] = Some(id);
                    self.match_step(pattern_idx, step_idx + 1, id);
                }
                self.current[slot] = None;
            }
        }
    }
}

struct Scope<'a> {
    graph: &'a Graph,
    slots: &'a BTreeMap<&'a str, usize>,
    params: &'a Params,
}

impl Scope<'_> {
    fn eval(&self, expr: &Expr, binding: &[NodeId]) -> Result<Value, EvalError> {
        Ok(match expr {
            Expr::Literal(Literal::Str(s)) => Value::Str(s.clone()),
            Expr::Literal(Literal::Num(n)) => Value::Num(*n),
            Expr::Literal(Literal::Bool(b)) => Value::Bool(*b),
            Expr::Param(name) => self
                .params
                .get(name)
                .cloned()
                .ok_or_else(|| EvalError::MissingParameter(name.clone()))?,
            Expr::Var(v) => Value::Node(binding[self.slots[v.as_str()]]),
            Expr::Prop(v, p) => {
                let node = &self.graph.nodes()[binding[self.slots[v.as_str()]].0];
                node.prop(p).map_or(Value::Null, Value::from)
            }
            Expr::Call(f, args) => {
                let args = args
                    .iter()
                    .map(|a| self.eval(a, binding))
                    .collect::<Result<Vec<_>, _>>()?;
                call(*f, args)?
            }
            Expr::Compare(op, l, r) => compare(*op, &self.eval(l, binding)?, &self.eval(r, binding)?),
            Expr::Not(e) => match truth(&self.eval(e, binding)?, "NOT")? {
                Some(b) => Value::Bool(!b),
                None => Value::Null,
            },
            Expr::And(l, r) => {
                let a = truth(&self.eval(l, binding)?, "AND")?;
                if a == Some(false) {
                    return Ok(Value::Bool(false));
                }
                match (a, truth(&self.eval(r, binding)?, "AND")?) {
                    (_, Some(false)) => Value::Bool(false),
                    (Some(true), Some(true)) => Value::Bool(true),
                    _ => Value::Null,
                }
            }
            Expr::Or(l, r) => {
                let a = truth(&self.eval(l, binding)?, "OR")?;
                if a == Some(true) {
                    return Ok(Value::Bool(true));
                }
                match (a, truth(&self.eval(r, binding)?, "OR")?) {
                    (_, Some(true)) => Value::Bool(true),
                    (Some(false), Some(false)) => Value::Bool(false),
                    _ => Value::Null,
                }
            }
        })
    }
}

fn truth(v: &Value, op: &str) -> Result<Option<bool>, EvalError> {
    match v {
        Value::Bool(b) => Ok(Some(*b)),
        Value::Null => Ok(None),
        other => Err(EvalError::TypeMismatch {
            function: op.to_string(),
            expected: "boolean",
            found: other.type_name(),
        }),
    }
}

/// Three-valued comparison: null operands give null; equality across kinds is
/// false; ordering is defined only between two numbers or two strings.
pub fn compare(op: CmpOp, l: &Value, r: &Value) -> Value {
    if matches!(l, Value::Null) || matches!(r, Value::Null) {
        return Value::Null;
    }
    let ord = match (l, r) {
        (Value::Num(a), Value::Num(b)) => a.partial_cmp(b),
        (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
        _ => None,
    };
    match op {
        CmpOp::Eq => Value::Bool(values_equal(l, r)),
        CmpOp::Ne => Value::Bool(!values_equal(l, r)),
        _ => match ord {
            None => Value::Null,
            Some(o) => Value::Bool(match op {
                CmpOp::Lt => o == Ordering::Less,
                CmpOp::Le => o != Ordering::Greater,
                CmpOp::Gt => o == Ordering::Greater,
                CmpOp::Ge => o != Ordering::Less,
                CmpOp::Eq | CmpOp::Ne => unreachable!(),
            }),
        },
    }
}

fn values_equal(l: &Value, r: &Value) -> bool {
    match (l, r) {
        (Value::Num(a), Value::Num(b)) => a == b,
        _ => l == r,
    }
}

fn mismatch(f: Function, expected: &'static str, found: &Value) -> EvalError {
    EvalError::TypeMismatch {
        function: f.name().to_string(),
        expected,
        found: found.type_name(),
    }
}

fn call(f: Function, args: Vec<Value>) -> Result<Value, EvalError> {
    if args.iter().any(|a| matches!(a, Value::Null)) {
        return Ok(Value::Null);
    }
    match f {
        Function::Distance => match (&args[0], &args[1]) {
            (Value::Geo(a), Value::Geo(b)) => Ok(Value::Num(haversine_km(*a, *b))),
            (Value::Geo(_), other) | (other, _) => Err(mismatch(f, "two geo points", other)),
        },
        Function::Point => match (&args[0], &args[1]) {
            (Value::Num(lat), Value::Num(lon)) => GeoPoint::new(*lat, *lon)
                .map(Value::Geo)
                .map_err(|e| EvalError::InvalidArgument {
                    function: f.name().into(),
                    detail: e.to_string(),
                }),
            (Value::Num(_), other) | (other, _) => Err(mismatch(f, "two numbers", other)),
        },
        Function::OpensDuring => {
            let Value::Hours(hours) = &args[0] else {
                return Err(mismatch(f, "hours as first argument", &args[0]));
            };
            let window = match &args[1] {
                Value::Str(name) => {
                    parse_window(name).ok_or_else(|| EvalError::UnknownWindow(name.clone()))?
                }
                Value::Hours(h) => h.intervals().to_vec(),
                other => return Err(mismatch(f, "a window name or hours", other)),
            };
            Ok(Value::Bool(hours.overlaps_any(&window)))
        }
        Function::Lower => match &args[0] {
            Value::Str(s) => Ok(Value::Str(s.to_lowercase())),
            Value::List(items) => Ok(Value::List(items.iter().map(|s| s.to_lowercase()).collect())),
            other => Err(mismatch(f, "a string", other)),
        },
        Function::Contains => match (&args[0], &args[1]) {
            (Value::Str(hay), Value::Str(needle)) => Ok(Value::Bool(hay.contains(needle.as_str()))),
            (Value::List(items), Value::Str(needle)) => Ok(Value::Bool(items.contains(needle))),
            (Value::Str(_) | Value::List(_), other) => Err(mismatch(f, "a string to look for", other)),
            (other, _) => Err(mismatch(f, "a string or list", other)),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
struct OrdValue(Value);

impl Eq for OrdValue {}

impl PartialOrd for OrdValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn sort_rows(rows: &mut [(Vec<Value>, Vec<Value>)], keys: &[SortKey]) {
    rows.sort_by(|(_, a), (_, b)| {
        for (i, key) in keys.iter().enumerate() {
            let ord = a[i].total_cmp(&b[i]);
            let ord = match key.direction {
                SortDirection::Asc => ord,
                SortDirection::Desc => ord.reverse(),
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    });
}

/// Runs `query` against a frozen graph.
///
/// Every assignment of pattern variables to nodes that satisfies all patterns
/// and the filter yields one row; parallel edges do not duplicate rows. Rows
/// come out ascending by the tuple of bound node ids (variables in order of
/// first appearance) unless ORDER BY says otherwise; sorting is stable.
/// Aggregate queries group on their non-aggregate columns, with groups in
/// order of first appearance.
pub fn evaluate(query: &Query, graph: &Graph, params: &Params) -> Result<ResultTable, EvalError> {
    if !graph.is_frozen() {
        return Err(EvalError::GraphNotFrozen);
    }
    if let Some(missing) = query.parameters().into_iter().find(|p| !params.contains_key(*p)) {
        return Err(EvalError::MissingParameter(missing.to_string()));
    }
    let vars = query.variables();
    let slots: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let columns = query.returns.iter().map(ToString::to_string).collect();

    if query.limit == Some(0) {
        return Ok(ResultTable {
            columns,
            rows: Vec::new(),
        });
    }

    let mut matcher = Matcher {
        graph,
        query,
        slots: slots.clone(),
        current: vec![None; vars.len()],
        found: BTreeSet::new(),
    };
    matcher.match_pattern(0);

    let scope = Scope {
        graph,
        slots: &slots,
        params,
    };
    let mut bindings = Vec::new();
    for binding in matcher.found {
        let keep = match &query.filter {
            Some(f) => truth(&scope.eval(f, &binding)?, "WHERE")? == Some(true),
            None => true,
        };
        if keep {
            bindings.push(binding);
        }
    }

    let mut rows: Vec<(Vec<Value>, Vec<Value>)> = if query.is_aggregate() {
        let mut groups: Vec<(Vec<Value>, u64)> = Vec::new();
        let mut index: BTreeMap<Vec<OrdValue>, usize> = BTreeMap::new();
        for binding in &bindings {
            let key = query
                .returns
                .iter()
                .filter_map(ReturnItem::expr)
                .map(|e| scope.eval(e, binding))
                .collect::<Result<Vec<_>, _>>()?;
            let ord_key: Vec<OrdValue> = key.iter().cloned().map(OrdValue).collect();
            let slot = *index.entry(ord_key).or_insert_with(|| {
                groups.push((key, 0));
                groups.len() - 1
            });
            groups[slot].1 += 1;
        }
        // A global aggregate over no rows still reports a single zero count.
        if groups.is_empty() && query.returns.iter().all(ReturnItem::is_aggregate) {
            groups.push((Vec::new(), 0));
        }
        groups
            .into_iter()
            .map(|(key, count)| {
                let mut key_iter = key.into_iter();
                let row: Vec<Value> = query
                    .returns
                    .iter()
                    .map(|item| match item {
                        ReturnItem::Expr(_) => key_iter.next().expect("key per column"),
                        ReturnItem::Count(_) => Value::Num(count as f64),
                    })
                    .collect();
                let sort_keys = query
                    .order
                    .iter()
                    .map(|k| {
                        let col = query.returns.iter().position(|r| r == &k.item).expect("validated");
                        row[col].clone()
                    })
                    .collect();
                (row, sort_keys)
            })
            .collect()
    } else {
        bindings
            .iter()
            .map(|binding| {
                let row = query
                    .returns
                    .iter()
                    .map(|item| scope.eval(item.expr().expect("non-aggregate"), binding))
                    .collect::<Result<Vec<_>, _>>()?;
                let keys = query
                    .order
                    .iter()
                    .map(|k| scope.eval(k.item.expr().expect("non-aggregate"), binding))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((row, keys))
            })
            .collect::<Result<_, EvalError>>()?
    };

    if !query.order.is_empty() {
        sort_rows(&mut rows, &query.order);
    }
    let mut rows: Vec<Vec<Value>> = rows.into_iter().map(|(row, _)| row).collect();
    if let Some(limit) = query.limit {
        rows.truncate(limit as usize);
    }
    Ok(ResultTable { columns, rows })
}
