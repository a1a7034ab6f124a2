//! Recursive-descent parser for the `.tfn` text format.
//!
//! ```text
//! dim 2
//! # comments run to the end of the line
//! 1: max(x1, 0.5*x2)
//! 2: max(0.5*x1, x2)
//! ```
//!
//! Newlines are ordinary whitespace, so an expression may span several lines.

use num_rational::BigRational;
use num_traits::Zero;

use super::expr::{parse_decimal, Coef, ExprNode, Term};
use super::TopicalFn;
use crate::error::ModelError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Var(usize),
    Star,
    Slash,
    Colon,
    Comma,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Var(k) => format!("`x{k}`"),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ModelError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = match c {
            '*' => {
                i += 1;
                Tok::Star
            }
            '/' => {
                i += 1;
                Tok::Slash
            }
            ':' => {
                i += 1;
                Tok::Colon
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '-' => return Err(syntax(pos, "negative numbers are not allowed; coefficients must be positive")),
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                Tok::Number(chars[start..i].iter().collect())
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.strip_prefix('x') {
                    Some(digits) if !digits.is_empty() && digits.chars().all(|d| d.is_ascii_digit()) => {
                        let k: usize = digits
                            .parse()
                            .map_err(|_| syntax(pos, format!("variable index too large in `{word}`")))?;
                        if k == 0 {
                            return Err(syntax(pos, "variables are numbered from x1"));
                        }
                        Tok::Var(k)
                    }
                    _ => Tok::Ident(word),
                }
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        };
        column += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ModelError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(())
        } else {
            Err(syntax(pos, format!("expected {}, found {}", want.describe(), tok.describe())))
        }
    }

    fn integer(&mut self, what: &str) -> Result<usize, ModelError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Number(s) if s.chars().all(|c| c.is_ascii_digit()) => s
                .parse()
                .map_err(|_| syntax(pos, format!("{what} `{s}` is too large"))),
            other => Err(syntax(pos, format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn number(&mut self) -> Result<(BigRational, String, Pos), ModelError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Number(s) => {
                let r = parse_decimal(&s).ok_or_else(|| syntax(pos, format!("malformed number `{s}`")))?;
                Ok((r, s, pos))
            }
            other => Err(syntax(pos, format!("expected a number, found {}", other.describe()))),
        }
    }

    /// posnum := number | number '/' number
    fn posnum(&mut self) -> Result<Coef, ModelError> {
        let (mut ratio, mut literal, pos) = self.number()?;
        if *self.peek() == Tok::Slash {
            self.bump();
            let (den, den_lit, _) = self.number()?;
            literal = format!("{literal}/{den_lit}");
            if den.is_zero() {
                return Err(ModelError::NonPositiveCoefficient {
                    literal,
                    line: pos.line,
                    column: pos.column,
                });
            }
            ratio /= den;
        }
        Coef::new(ratio).map_err(|_| ModelError::NonPositiveCoefficient {
            literal,
            line: pos.line,
            column: pos.column,
        })
    }

    fn expr(&mut self) -> Result<ExprNode, ModelError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Var(k) => {
                self.bump();
                Ok(ExprNode::Var(k - 1))
            }
            Tok::Number(_) => {
                let c = self.posnum()?;
                self.expect(Tok::Star)?;
                let e = self.expr()?;
                Ok(ExprNode::scale(c, e))
            }
            Tok::Ident(name) => {
                self.bump();
                self.expect(Tok::LParen)?;
                let node = match name.as_str() {
                    "max" => ExprNode::Max(self.list(Self::expr)?),
                    "min" => ExprNode::Min(self.list(Self::expr)?),
                    "lin" => ExprNode::Lin(self.list(Self::weighted_term)?),
                    "har" => ExprNode::Har(self.list(Self::weighted_term)?),
                    "geo" => ExprNode::Geo(self.list(Self::geo_term)?),
                    other => return Err(syntax(pos, format!("unknown function `{other}`"))),
                };
                Ok(node)
            }
            other => Err(syntax(pos, format!("expected an expression, found {}", other.describe()))),
        }
    }

    /// `w*expr`; a bare `expr` gets weight 1.
    fn weighted_term(&mut self) -> Result<Term, ModelError> {
        if let Tok::Number(_) = self.peek() {
            let w = self.posnum()?;
            self.expect(Tok::Star)?;
            let e = self.expr()?;
            Ok(Term::new(w, e))
        } else {
            Ok(Term::new(Coef::one(), self.expr()?))
        }
    }

    fn geo_term(&mut self) -> Result<Term, ModelError> {
        let e = self.expr()?;
        self.expect(Tok::Colon)?;
        let w = self.posnum()?;
        Ok(Term::new(w, e))
    }

    fn list<T>(&mut self, item: fn(&mut Self) -> Result<T, ModelError>) -> Result<Vec<T>, ModelError> {
        let mut items = Vec::new();
        if *self.peek() == Tok::RParen {
            let pos = self.pos();
            return Err(syntax(pos, "empty argument list"));
        }
        loop {
            items.push(item(self)?);
            let (tok, pos) = self.bump();
            match tok {
                Tok::Comma => continue,
                Tok::RParen => return Ok(items),
                other => {
                    return Err(syntax(pos, format!("expected `,` or `)`, found {}", other.describe())))
                }
            }
        }
    }

    fn file(&mut self) -> Result<(usize, Vec<ExprNode>), ModelError> {
        let (tok, pos) = self.bump();
        if tok != Tok::Ident("dim".into()) {
            return Err(syntax(pos, format!("expected `dim`, found {}", tok.describe())));
        }
        let dim_pos = self.pos();
        let dim = self.integer("dimension")?;
        if dim == 0 {
            return Err(syntax(dim_pos, "dimension must be positive"));
        }
        let mut coords: Vec<Option<ExprNode>> = vec![None; dim];
        while *self.peek() != Tok::Eof {
            let idx_pos = self.pos();
            let i = self.integer("coordinate index")?;
            if i == 0 || i > dim {
                return Err(syntax(idx_pos, format!("coordinate index {i} outside 1..={dim}")));
            }
            self.expect(Tok::Colon)?;
            let e = self.expr()?;
            if coords[i - 1].is_some() {
                return Err(ModelError::DuplicateCoordinate(i));
            }
            coords[i - 1] = Some(e);
        }
        let coords = coords
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or(ModelError::MissingCoordinate(i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((dim, coords))
    }
}

/// Parses and validates a `.tfn` source text.
pub fn parse(text: &str) -> Result<TopicalFn, ModelError> {
    let mut parser = Parser { toks: lex(text)?, at: 0 };
    let (dim, coords) = parser.file()?;
    let mut f = TopicalFn::new(dim, coords)?;
    f.source = Some(text.to_string());
    Ok(f)
}

/// Parses a single expression (no `dim` header); variables are checked against `dim`.
pub fn parse_expr(text: &str, dim: usize) -> Result<ExprNode, ModelError> {
    let mut parser = Parser { toks: lex(text)?, at: 0 };
    let e = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        let pos = parser.pos();
        return Err(syntax(pos, format!("unexpected trailing {}", parser.peek().describe())));
    }
    e.validate(dim)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_identity() {
        let f = parse("dim 1\n1: x1").unwrap();
        assert_eq!(f.dim(), 1);
        assert_eq!(f.coords()[0], ExprNode::Var(0));
    }

    #[test]
    fn comments_and_multiline_expressions() {
        let f = parse("# two-dimensional\ndim 2\n1: max(x1,\n   0.5*x2) # tail\n2: max(0.5*x1, x2)\n").unwrap();
        assert_eq!(f.dim(), 2);
        assert_eq!(f.coords()[0].to_string(), "max(x1, 0.5*x2)");
    }

    #[test]
    fn coordinates_may_come_in_any_order() {
        let f = parse("dim 2\n2: x1\n1: x2").unwrap();
        assert_eq!(f.coords()[0], ExprNode::Var(1));
    }

    #[test]
    fn rational_literals() {
        let f = parse("dim 3\n1: geo(x1:1/3, x2:1/3, x3:1/3)\n2: x2\n3: x3").unwrap();
        assert_eq!(f.coords()[0].to_string(), "geo(x1:1/3, x2:1/3, x3:1/3)");
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse("dim 2\n1: max(x1 x2)\n2: x2") {
            Err(ModelError::Syntax { line, column, .. }) => {
                assert_eq!((line, column), (2, 11));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_nonpositive_coefficient() {
        assert!(matches!(
            parse("dim 1\n1: 0*x1"),
            Err(ModelError::NonPositiveCoefficient { .. })
        ));
        assert!(matches!(
            parse("dim 1\n1: 1/0*x1"),
            Err(ModelError::NonPositiveCoefficient { .. })
        ));
        assert!(matches!(parse("dim 1\n1: -2*x1"), Err(ModelError::Syntax { .. })));
    }

    #[test]
    fn rejects_bad_geo_weights() {
        assert!(matches!(
            parse("dim 2\n1: geo(x1:0.5, x2:0.6)\n2: x2"),
            Err(ModelError::GeoWeights { .. })
        ));
    }

    #[test]
    fn rejects_out_of_range_variable() {
        assert_eq!(
            parse("dim 2\n1: x3\n2: x1").unwrap_err(),
            ModelError::VarOutOfRange { index: 3, dim: 2 }
        );
    }

    #[test]
    fn rejects_missing_and_duplicate_coordinates() {
        assert_eq!(parse("dim 2\n1: x1").unwrap_err(), ModelError::MissingCoordinate(2));
        assert_eq!(
            parse("dim 1\n1: x1\n1: x1").unwrap_err(),
            ModelError::DuplicateCoordinate(1)
        );
    }

    #[test]
    fn rejects_empty_lists_and_unknown_functions() {
        assert!(parse("dim 1\n1: max()").is_err());
        assert!(parse("dim 1\n1: foo(x1)").is_err());
        assert!(parse("dim 1\n1: x0").is_err());
        assert!(parse("dim 0").is_err());
    }

    #[test]
    fn bare_lin_terms_default_to_unit_weight() {
        let f = parse("dim 2\n1: lin(x1, 2*x2)\n2: x2").unwrap();
        assert_eq!(f.coords()[0].to_string(), "lin(1*x1, 2*x2)");
    }

    #[test]
    fn parse_expr_checks_trailing_input() {
        assert!(parse_expr("max(x1, x2)", 2).is_ok());
        assert!(parse_expr("max(x1, x2) x1", 2).is_err());
        assert!(parse_expr("x3", 2).is_err());
    }
}
