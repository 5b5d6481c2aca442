//! The graph query language: a small pattern-matching language with filters,
//! semantic predicate functions, ordering, limits and counting aggregates.

mod ast;
mod eval;
mod functions;
mod parser;

pub use ast::{
    CmpOp, CountTarget, EdgeDirection, EdgePattern, Expr, Function, Literal, NodePattern,
    PathPattern, Query, ReturnItem, SortDirection, SortKey,
};
pub use eval::{compare, evaluate, EvalError, Params, ResultTable, Value};
pub use functions::{haversine_km, named_window, parse_window, EARTH_RADIUS_KM};
pub use parser::{is_reserved, is_valid_variable, parse, ParseError};

/// Canonical text for a query; `parse(&pretty(q))` gives back `q`.
pub fn pretty(query: &Query) -> String {
    query.to_string()
}
