//! Recursive-descent parser for the query language. See
//! `docs/query-language.md` for the grammar.

use std::collections::HashSet;
use std::fmt;

use super::ast::*;

/// A parse failure at byte `offset`. `found` is always a substring of the
/// input (empty at end of input).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.found.is_empty() {
            write!(f, "at offset {}: expected {}, found end of input", self.offset, self.expected)
        } else {
            write!(
                f,
                "at offset {}: expected {}, found {:?}",
                self.offset, self.expected, self.found
            )
        }
    }
}

impl std::error::Error for ParseError {}

const KEYWORDS: &[&str] = &[
    "match", "where", "return", "order", "by", "limit", "and", "or", "not", "asc", "desc",
    "true", "false", "count", "null",
];

pub fn is_reserved(word: &str) -> bool {
    let lower = word.to_ascii_lowercase();
    KEYWORDS.contains(&lower.as_str()) || Function::from_name(&lower).is_some()
}

/// Variable names are lowercase identifiers that are not reserved words.
pub fn is_valid_variable(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
        && !is_reserved(name)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Dot,
    Dash,
    ArrowRight,
    ArrowLeft,
    Cmp(CmpOp),
    Star,
    Ident(String),
    Param(String),
    Str(String),
    Num(f64),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(input: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let err = |offset: usize, end: usize, expected: &str| ParseError {
        offset,
        expected: expected.to_string(),
        found: input[offset..end].to_string(),
    };
    while i < bytes.len() {
        let c = input[i..].chars().next().unwrap();
        let start = i;
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let two = input.get(i..i + 2).unwrap_or("");
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ':' => (Tok::Colon, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            '*' => (Tok::Star, 1),
            '=' => (Tok::Cmp(CmpOp::Eq), 1),
            '-' if two == "->" => (Tok::ArrowRight, 2),
            '-' => (Tok::Dash, 1),
            '<' if two == "<-" => (Tok::ArrowLeft, 2),
            '<' if two == "<=" => (Tok::Cmp(CmpOp::Le), 2),
            '<' if two == "<>" => (Tok::Cmp(CmpOp::Ne), 2),
            '<' => (Tok::Cmp(CmpOp::Lt), 1),
            '>' if two == ">=" => (Tok::Cmp(CmpOp::Ge), 2),
            '>' => (Tok::Cmp(CmpOp::Gt), 1),
            '!' if two == "!=" => (Tok::Cmp(CmpOp::Ne), 2),
            '"' | '\'' => {
                let quote = c;
                let mut value = String::new();
                let mut j = i + 1;
                loop {
                    let Some(ch) = input[j..].chars().next() else {
                        return Err(err(start, input.len(), "closing quote"));
                    };
                    j += ch.len_utf8();
                    if ch == quote {
                        break;
                    }
                    if ch == '\\' {
                        let Some(esc) = input[j..].chars().next() else {
                            return Err(err(start, input.len(), "closing quote"));
                        };
                        let resolved = match esc {
                            'n' => '\n',
                            't' => '\t',
                            '\\' | '"' | '\'' => esc,
                            _ => {
                                return Err(err(j - 1, j + esc.len_utf8(), "valid escape sequence"))
                            }
                        };
                        j += esc.len_utf8();
                        value.push(resolved);
                    } else {
                        value.push(ch);
                    }
                }
                (Tok::Str(value), j - i)
            }
            '$' => {
                let name_len = ident_len(&input[i + 1..]);
                if name_len == 0 {
                    return Err(err(start, start + 1, "parameter name after '$'"));
                }
                (Tok::Param(input[i + 1..i + 1 + name_len].to_string()), name_len + 1)
            }
            '0'..='9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < bytes.len() && bytes[j] == b'.' && bytes[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let value: f64 = input[i..j]
                    .parse()
                    .map_err(|_| err(start, j, "number"))?;
                if !value.is_finite() {
                    return Err(err(start, j, "finite number"));
                }
                (Tok::Num(value), j - i)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let len = ident_len(&input[i..]);
                (Tok::Ident(input[i..i + len].to_string()), len)
            }
            _ => return Err(err(start, start + c.len_utf8(), "a token")),
        };
        i += len;
        tokens.push(Token {
            tok,
            start,
            end: i,
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        start: input.len(),
        end: input.len(),
    });
    Ok(tokens)
}

fn ident_len(s: &str) -> usize {
    let mut len = 0;
    for (idx, b) in s.bytes().enumerate() {
        let ok = if idx == 0 {
            b.is_ascii_alphabetic() || b == b'_'
        } else {
            b.is_ascii_alphanumeric() || b == b'_'
        };
        if !ok {
            break;
        }
        len += 1;
    }
    len
}

struct Parser<'a> {
    input: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    bound: HashSet<String>,
}

pub fn parse(input: &str) -> Result<Query, ParseError> {
    let tokens = lex(input)?;
    let mut parser = Parser {
        input,
        tokens,
        pos: 0,
        bound: HashSet::new(),
    };
    parser.query()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, token: &Token, expected: impl Into<String>) -> ParseError {
        ParseError {
            offset: token.start,
            expected: expected.into(),
            found: self.input[token.start..token.end].to_string(),
        }
    }

    fn fail<T>(&self, expected: impl Into<String>) -> Result<T, ParseError> {
        Err(self.error_at(self.peek(), expected))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(w) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.fail(kw.to_ascii_uppercase())
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, expected: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.fail(expected)
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(name) => {
                let name = name.clone();
                self.advance();
                Ok(name)
            }
            _ => self.fail(expected),
        }
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        self.expect_keyword("match")?;
        let mut matches = vec![self.path_pattern()?];
        while self.eat(&Tok::Comma) {
            matches.push(self.path_pattern()?);
        }
        let filter = if self.eat_keyword("where") {
            Some(self.expr()?)
        } else {
            None
        };
        if !self.at_keyword("return") {
            return self.fail(if filter.is_some() { "RETURN" } else { "WHERE or RETURN" });
        }
        self.advance();
        let mut returns = vec![self.return_item()?];
        while self.eat(&Tok::Comma) {
            returns.push(self.return_item()?);
        }
        let aggregate = returns.iter().any(ReturnItem::is_aggregate);

        let mut order = Vec::new();
        if self.eat_keyword("order") {
            self.expect_keyword("by")?;
            loop {
                let key_token = self.peek().clone();
                let item = self.return_item()?;
                if aggregate && !returns.contains(&item) {
                    return Err(self.error_at(
                        &key_token,
                        "a returned column (aggregate queries sort by their output columns)",
                    ));
                }
                if !aggregate && item.is_aggregate() {
                    return Err(self.error_at(&key_token, "a non-aggregate sort key"));
                }
                let direction = if self.eat_keyword("desc") {
                    SortDirection::Desc
                } else {
                    self.eat_keyword("asc");
                    SortDirection::Asc
                };
                order.push(SortKey { item, direction });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }

        let limit = if self.eat_keyword("limit") {
            let token = self.advance();
            match token.tok {
                Tok::Num(n) if n.fract() == 0.0 && n >= 0.0 && n <= u64::MAX as f64 => Some(n as u64),
                _ => return Err(self.error_at(&token, "a non-negative integer")),
            }
        } else {
            None
        };

        if self.peek().tok != Tok::Eof {
            return self.fail(if limit.is_some() {
                "end of query"
            } else if order.is_empty() {
                "ORDER BY, LIMIT or end of query"
            } else {
                "LIMIT or end of query"
            });
        }
        Ok(Query {
            matches,
            filter,
            returns,
            order,
            limit,
        })
    }

    fn path_pattern(&mut self) -> Result<PathPattern, ParseError> {
        let start = self.node_pattern()?;
        let mut steps = Vec::new();
        loop {
            let direction = match self.peek().tok {
                Tok::Dash => EdgeDirection::LeftToRight,
                Tok::ArrowLeft => EdgeDirection::RightToLeft,
                _ => break,
            };
            self.advance();
            self.expect(&Tok::LBracket, "'['")?;
            let rel_type = if self.eat(&Tok::Colon) {
                Some(self.ident("relation type")?)
            } else {
                None
            };
            self.expect(&Tok::RBracket, "']'")?;
            match direction {
                EdgeDirection::LeftToRight => self.expect(&Tok::ArrowRight, "'->'")?,
                EdgeDirection::RightToLeft => self.expect(&Tok::Dash, "'-'")?,
            }
            let node = self.node_pattern()?;
            steps.push((EdgePattern { rel_type, direction }, node));
        }
        Ok(PathPattern { start, steps })
    }

    fn node_pattern(&mut self) -> Result<NodePattern, ParseError> {
        self.expect(&Tok::LParen, "'('")?;
        let token = self.peek().clone();
        let var = self.ident("variable name")?;
        if !is_valid_variable(&var) {
            return Err(self.error_at(&token, "variable name matching [a-z][a-z0-9_]* (not a keyword)"));
        }
        let label = if self.eat(&Tok::Colon) {
            Some(self.ident("label")?)
        } else {
            None
        };
        self.expect(&Tok::RParen, "')'")?;
        self.bound.insert(var.clone());
        Ok(NodePattern { var, label })
    }

    fn return_item(&mut self) -> Result<ReturnItem, ParseError> {
        if self.at_keyword("count") && self.peek_at(1) == &Tok::LParen {
            self.advance();
            self.advance();
            let target = if self.eat(&Tok::Star) {
                CountTarget::Star
            } else {
                let token = self.peek().clone();
                let var = self.ident("variable or '*'")?;
                self.check_bound(&var, &token)?;
                CountTarget::Var(var)
            };
            self.expect(&Tok::RParen, "')'")?;
            return Ok(ReturnItem::Count(target));
        }
        Ok(ReturnItem::Expr(self.expr()?))
    }

    fn check_bound(&self, var: &str, token: &Token) -> Result<(), ParseError> {
        if self.bound.contains(var) {
            Ok(())
        } else {
            Err(self.error_at(token, format!("a bound variable (unbound variable {var})")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.and_expr()?;
        while self.eat_keyword("or") {
            let right = self.and_expr()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.not_expr()?;
        while self.eat_keyword("and") {
            let right = self.not_expr()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_keyword("not") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let left = self.primary()?;
        let (op, negate_right) = match self.peek().tok {
            Tok::Cmp(op) => (op, false),
            // `a<-1` lexes as an arrow; inside an expression it means `a < -1`.
            Tok::ArrowLeft => (CmpOp::Lt, true),
            _ => return Ok(left),
        };
        self.advance();
        let right = if negate_right {
            let token = self.advance();
            match token.tok {
                Tok::Num(n) => Expr::Literal(Literal::Num(-n)),
                _ => return Err(self.error_at(&token, "number")),
            }
        } else {
            self.primary()?
        };
        Ok(Expr::Compare(op, Box::new(left), Box::new(right)))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let token = self.peek().clone();
        match &token.tok {
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::Literal(Literal::Str(s.clone())))
            }
            Tok::Num(n) => {
                self.advance();
                Ok(Expr::Literal(Literal::Num(*n)))
            }
            Tok::Dash => {
                self.advance();
                let next = self.advance();
                match next.tok {
                    Tok::Num(n) => Ok(Expr::Literal(Literal::Num(-n))),
                    _ => Err(self.error_at(&next, "number after '-'")),
                }
            }
            Tok::Param(name) => {
                self.advance();
                Ok(Expr::Param(name.clone()))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(word) => {
                let word = word.clone();
                if word.eq_ignore_ascii_case("true") || word.eq_ignore_ascii_case("false") {
                    self.advance();
                    return Ok(Expr::Literal(Literal::Bool(word.eq_ignore_ascii_case("true"))));
                }
                if self.peek_at(1) == &Tok::LParen {
                    if word.eq_ignore_ascii_case("count") {
                        return Err(self.error_at(&token, "an expression (count is only allowed as a RETURN or ORDER BY item)"));
                    }
                    let Some(function) = Function::from_name(&word) else {
                        return Err(self.error_at(&token, "a known function (distance, point, opens_during, lower, contains)"));
                    };
                    self.advance();
                    self.advance();
                    let mut args = Vec::new();
                    if self.peek().tok != Tok::RParen {
                        args.push(self.expr()?);
                        while self.eat(&Tok::Comma) {
                            args.push(self.expr()?);
                        }
                    }
                    let close = self.peek().clone();
                    self.expect(&Tok::RParen, "')'")?;
                    if args.len() != function.arity() {
                        return Err(self.error_at(
                            &close,
                            format!("{} argument(s) for {}", function.arity(), function.name()),
                        ));
                    }
                    return Ok(Expr::Call(function, args));
                }
                if is_reserved(&word) {
                    return self.fail("an expression");
                }
                self.check_bound(&word, &token)?;
                self.advance();
                if self.eat(&Tok::Dot) {
                    let prop = self.ident("property name")?;
                    Ok(Expr::Prop(word, prop))
                } else {
                    Ok(Expr::Var(word))
                }
            }
            _ => self.fail("an expression"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_query() {
        let q = parse("MATCH (p:Provider) RETURN p").unwrap();
        assert_eq!(q.matches.len(), 1);
        assert!(q.matches[0].steps.is_empty());
        assert_eq!(q.matches[0].start.label.as_deref(), Some("Provider"));
        assert_eq!(q.returns, vec![ReturnItem::Expr(Expr::Var("p".into()))]);
    }

    #[test]
    fn unclosed_node_pattern() {
        let text = "MATCH (p:Provider RETURN p";
        let err = parse(text).unwrap_err();
        assert_eq!(err.offset, text.find("RETURN").unwrap());
        assert_eq!(err.found, "RETURN");
    }

    #[test]
    fn unbound_variable() {
        let text = "MATCH (p:Provider) RETURN q";
        let err = parse(text).unwrap_err();
        assert_eq!(err.offset, text.len() - 1);
        assert!(err.expected.contains("unbound variable q"), "{err}");
    }

    #[test]
    fn keywords_case_insensitive() {
        let a = parse("match (p:Provider) where p.x > 1 return p order by p.x desc limit 3").unwrap();
        let b = parse("MATCH (p:Provider) WHERE p.x > 1 RETURN p ORDER BY p.x DESC LIMIT 3").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.limit, Some(3));
    }

    #[test]
    fn edges_both_directions() {
        let q = parse("MATCH (a)-[:R]->(b)<-[]-(c) RETURN a, b, c").unwrap();
        let steps = &q.matches[0].steps;
        assert_eq!(steps[0].0.direction, EdgeDirection::LeftToRight);
        assert_eq!(steps[0].0.rel_type.as_deref(), Some("R"));
        assert_eq!(steps[1].0.direction, EdgeDirection::RightToLeft);
        assert_eq!(steps[1].0.rel_type, None);
    }

    #[test]
    fn precedence() {
        let q = parse("MATCH (a) WHERE NOT a.x = 1 AND a.y = 2 OR a.z = 3 RETURN a").unwrap();
        match q.filter.unwrap() {
            Expr::Or(l, _) => match *l {
                Expr::And(ll, _) => assert!(matches!(*ll, Expr::Not(_))),
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_numbers() {
        let q = parse("MATCH (a) WHERE a.x<-1 AND a.y > -2.5 RETURN a").unwrap();
        let text = q.to_string();
        assert_eq!(text, "MATCH (a) WHERE a.x < -1 AND a.y > -2.5 RETURN a");
    }

    #[test]
    fn function_arity_checked() {
        assert!(parse("MATCH (a) RETURN lower(a.x, a.y)").is_err());
        assert!(parse("MATCH (a) RETURN nope(a.x)").is_err());
        assert!(parse("MATCH (a) RETURN distance(a.g, point(1, 2))").is_ok());
    }

    #[test]
    fn aggregate_rules() {
        assert!(parse("MATCH (a)-[:R]->(b) RETURN b.name, count(a) ORDER BY count(a) DESC").is_ok());
        assert!(parse("MATCH (a) RETURN a.name, count(*) ORDER BY a.x").is_err());
        assert!(parse("MATCH (a) RETURN a ORDER BY count(a)").is_err());
        assert!(parse("MATCH (a) WHERE count(a) > 1 RETURN a").is_err());
        assert!(parse("MATCH (a) RETURN count(b)").is_err());
    }

    #[test]
    fn variables_must_be_lowercase_and_unreserved() {
        assert!(parse("MATCH (P:Provider) RETURN P").is_err());
        assert!(parse("MATCH (order) RETURN order").is_err());
        assert!(parse("MATCH (p_1) RETURN p_1").is_ok());
    }

    #[test]
    fn strings_and_errors() {
        let q = parse(r#"MATCH (a) WHERE a.n = 'it\'s' OR a.n = "say \"hi\"" RETURN a"#).unwrap();
        assert!(q.to_string().contains(r#""it's""#));
        let err = parse(r#"MATCH (a) WHERE a.n = "open"#).unwrap_err();
        assert_eq!(err.offset, 22);
        assert_eq!(err.found, "\"open");
        let err = parse("MATCH (a) RETURN a LIMIT 1.5").unwrap_err();
        assert_eq!(err.found, "1.5");
        let err = parse("MATCH (a) RETURN a @").unwrap_err();
        assert_eq!((err.offset, err.found.as_str()), (19, "@"));
        let err = parse("").unwrap_err();
        assert_eq!((err.offset, err.found.as_str()), (0, ""));
    }
}
