use std::fmt::{self, Write};

/// A parsed `MATCH … [WHERE …] RETURN … [ORDER BY …] [LIMIT n]` query.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub matches: Vec<PathPattern>,
    pub filter: Option<Expr>,
    pub returns: Vec<ReturnItem>,
    pub order: Vec<SortKey>,
    pub limit: Option<u64>,
}

impl Query {
    pub fn is_aggregate(&self) -> bool {
        self.returns.iter().any(ReturnItem::is_aggregate)
    }

    /// Variables in order of first appearance in the MATCH patterns.
    pub fn variables(&self) -> Vec<&str> {
        let mut vars: Vec<&str> = Vec::new();
        for pattern in &self.matches {
            for node in pattern.nodes() {
                if !vars.contains(&node.var.as_str()) {
                    vars.push(&node.var);
                }
            }
        }
        vars
    }

    /// Parameter names referenced anywhere in the query.
    pub fn parameters(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let exprs = self
            .filter
            .iter()
            .chain(self.returns.iter().filter_map(ReturnItem::expr))
            .chain(self.order.iter().filter_map(|k| k.item.expr()));
        for e in exprs {
            e.visit(&mut |e| {
                if let Expr::Param(name) = e {
                    if !out.contains(&name.as_str()) {
                        out.push(name.as_str());
                    }
                }
            });
        }
        out
    }
}

/// A chain of node patterns joined by edge patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPattern {
    pub start: NodePattern,
    pub steps: Vec<(EdgePattern, NodePattern)>,
}

impl PathPattern {
    pub fn nodes(&self) -> impl Iterator<Item = &NodePattern> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|(_, n)| n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodePattern {
    pub var: String,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeDirection {
    /// `-[…]->`
    LeftToRight,
    /// `<-[…]-`
    RightToLeft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgePattern {
    pub rel_type: Option<String>,
    pub direction: EdgeDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Distance,
    Point,
    OpensDuring,
    Lower,
    Contains,
}

impl Function {
    pub fn from_name(name: &str) -> Option<Function> {
        let f = match name.to_ascii_lowercase().as_str() {
            "distance" => Function::Distance,
            "point" => Function::Point,
            "opens_during" => Function::OpensDuring,
            "lower" => Function::Lower,
            "contains" => Function::Contains,
            _ => return None,
        };
        Some(f)
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Distance => "distance",
            Function::Point => "point",
            Function::OpensDuring => "opens_during",
            Function::Lower => "lower",
            Function::Contains => "contains",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Function::Lower => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    Num(f64),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Literal),
    Param(String),
    Var(String),
    Prop(String, String),
    Call(Function, Vec<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            Expr::Compare(_, l, r) | Expr::And(l, r) | Expr::Or(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Expr::Not(e) => e.visit(f),
            _ => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(..) => 3,
            Expr::Compare(..) => 4,
            _ => 5,
        }
    }

    fn write_prec(&self, out: &mut String, min: u8) {
        let prec = self.precedence();
        let paren = prec < min;
        if paren {
            out.push('(');
        }
        match self {
            Expr::Literal(lit) => write_literal(out, lit),
            Expr::Param(name) => {
                out.push('$');
                out.push_str(name);
            }
            Expr::Var(v) => out.push_str(v),
            Expr::Prop(v, p) => {
                let _ = write!(out, "{v}.{p}");
            }
            Expr::Call(f, args) => {
                out.push_str(f.name());
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    a.write_prec(out, 0);
                }
                out.push(')');
            }
            Expr::Compare(op, l, r) => {
                l.write_prec(out, 5);
                let _ = write!(out, " {} ", op.symbol());
                r.write_prec(out, 5);
            }
            Expr::And(l, r) => {
                l.write_prec(out, 2);
                out.push_str(" AND ");
                r.write_prec(out, 3);
            }
            Expr::Or(l, r) => {
                l.write_prec(out, 1);
                out.push_str(" OR ");
                r.write_prec(out, 2);
            }
            Expr::Not(e) => {
                out.push_str("NOT ");
                e.write_prec(out, 3);
            }
        }
        if paren {
            out.push(')');
        }
    }
}

fn write_literal(out: &mut String, lit: &Literal) {
    match lit {
        Literal::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        Literal::Num(n) => {
            let _ = write!(out, "{n}");
        }
        Literal::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountTarget {
    Var(String),
    Star,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReturnItem {
    Expr(Expr),
    Count(CountTarget),
}

impl ReturnItem {
    pub fn is_aggregate(&self) -> bool {
        matches!(self, ReturnItem::Count(_))
    }

    pub fn expr(&self) -> Option<&Expr> {
        match self {
            ReturnItem::Expr(e) => Some(e),
            ReturnItem::Count(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortDirection {
    #[default]
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortKey {
    pub item: ReturnItem,
    pub direction: SortDirection,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write_prec(&mut out, 0);
        f.write_str(&out)
    }
}

impl fmt::Display for ReturnItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReturnItem::Expr(e) => write!(f, "{e}"),
            ReturnItem::Count(CountTarget::Star) => f.write_str("count(*)"),
            ReturnItem::Count(CountTarget::Var(v)) => write!(f, "count({v})"),
        }
    }
}

impl fmt::Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(label) => write!(f, "({}:{})", self.var, label),
            None => write!(f, "({})", self.var),
        }
    }
}

impl fmt::Display for EdgePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = match &self.rel_type {
            Some(t) => format!("[:{t}]"),
            None => "[]".to_string(),
        };
        match self.direction {
            EdgeDirection::LeftToRight => write!(f, "-{inner}->"),
            EdgeDirection::RightToLeft => write!(f, "<-{inner}-"),
        }
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for (edge, node) in &self.steps {
            write!(f, "{edge}{node}")?;
        }
        Ok(())
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical text: uppercase keywords, single spaces, explicit sort directions.
impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MATCH {}", join(&self.matches))?;
        if let Some(filter) = &self.filter {
            write!(f, " WHERE {filter}")?;
        }
        write!(f, " RETURN {}", join(&self.returns))?;
        if !self.order.is_empty() {
            let keys: Vec<String> = self
                .order
                .iter()
                .map(|k| {
                    let dir = match k.direction {
                        SortDirection::Asc => "ASC",
                        SortDirection::Desc => "DESC",
                    };
                    format!("{} {dir}", k.item)
                })
                .collect();
            write!(f, " ORDER BY {}", keys.join(", "))?;
        }
        if let Some(n) = self.limit {
            write!(f, " LIMIT {n}")?;
        }
        Ok(())
    }
}
