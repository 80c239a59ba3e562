//! Recursive-descent parser for the measure DSL.
//!
//! ```text
//! measure  = [ ("circle" | "real") ":" ] term { "+" term } ;
//! term     = [ number "*" ] atom ;
//! atom     = builtin [ on ] | "delta(" number ")" | expr [ on ] ;
//! on       = "on" "[" number "," number "]" ;
//! builtin  = "legendre" | "chebyshev" | "jacobi(" number "," number ")"
//!          | "lebesgue_circle" | "bernstein_szego(" number ")" ;
//! ```
//!
//! Expressions inside a term are products of factors; a sum must be
//! parenthesized since a bare `+` separates terms.

use std::f64::consts::TAU;

use super::expr::{Func, Variable, WeightExpr};
use super::{AcTerm, Builtin, Domain, Interval, MeasureSpec, PointMass, Weight};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Colon => "':'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            _ if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let lexeme = &text[i..j];
                let v: f64 = lexeme.parse().map_err(|_| Error::Syntax {
                    position: i,
                    expected: vec!["number".into()],
                    found: format!("'{lexeme}'"),
                })?;
                i = j;
                out.push((Tok::Num(v), start));
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let ident = text[i..j].to_string();
                i = j;
                out.push((Tok::Ident(ident), start));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    position: i,
                    expected: vec!["a token".into()],
                    found: format!("'{c}'"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    /// Variable seen so far, if any; fixes the domain.
    var: Option<Variable>,
}

enum Atom {
    Ac(Weight, Option<Interval>),
    Delta(f64),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> Error {
        let (tok, position) = &self.toks[self.pos];
        Error::Syntax {
            position: *position,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.error(&["number"])),
        }
    }

    fn measure(&mut self) -> Result<(Option<Domain>, Vec<(f64, Atom)>)> {
        let mut declared = None;
        if let Tok::Ident(name) = self.peek().clone() {
            if *self.peek_at(1) == Tok::Colon {
                declared = Some(match name.as_str() {
                    "circle" => Domain::UnitCircle,
                    "real" => Domain::RealLine,
                    _ => return Err(self.error(&["'circle'", "'real'"])),
                });
                self.bump();
                self.bump();
            }
        }
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Eof => break,
                _ => return Err(self.error(&["'+'", "end of input"])),
            }
        }
        Ok((declared, terms))
    }

    fn term(&mut self) -> Result<(f64, Atom)> {
        let mut coefficient = 1.0;
        if let (Tok::Num(v), Tok::Star) = (self.peek().clone(), self.peek_at(1).clone()) {
            coefficient = v;
            self.bump();
            self.bump();
        }
        Ok((coefficient, self.atom()?))
    }

    fn atom(&mut self) -> Result<Atom> {
        if let Tok::Ident(name) = self.peek().clone() {
            let builtin = match name.as_str() {
                "legendre" => Some(Builtin::Legendre),
                "chebyshev" => Some(Builtin::Chebyshev),
                "lebesgue_circle" => Some(Builtin::LebesgueCircle),
                "jacobi" => {
                    self.bump();
                    self.expect(Tok::LParen, "'('")?;
                    let alpha = self.signed_number()?;
                    self.expect(Tok::Comma, "','")?;
                    let beta = self.signed_number()?;
                    self.expect(Tok::RParen, "')'")?;
                    let restriction = self.restriction()?;
                    return Ok(Atom::Ac(
                        Weight::Builtin(Builtin::Jacobi { alpha, beta }),
                        restriction,
                    ));
                }
                "bernstein_szego" => {
                    self.bump();
                    self.expect(Tok::LParen, "'('")?;
                    let a = self.signed_number()?;
                    self.expect(Tok::RParen, "')'")?;
                    let restriction = self.restriction()?;
                    return Ok(Atom::Ac(
                        Weight::Builtin(Builtin::BernsteinSzego { a }),
                        restriction,
                    ));
                }
                "delta" => {
                    self.bump();
                    self.expect(Tok::LParen, "'('")?;
                    let at = self.signed_number()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Atom::Delta(at));
                }
                _ => None,
            };
            if let Some(b) = builtin {
                self.bump();
                let restriction = self.restriction()?;
                return Ok(Atom::Ac(Weight::Builtin(b), restriction));
            }
        }
        let e = self.product()?;
        let restriction = self.restriction()?;
        Ok(Atom::Ac(Weight::Expr(e), restriction))
    }

    fn restriction(&mut self) -> Result<Option<Interval>> {
        if *self.peek() != Tok::Ident("on".into()) {
            return Ok(None);
        }
        self.bump();
        self.expect(Tok::LBracket, "'['")?;
        let lo = self.signed_number()?;
        self.expect(Tok::Comma, "','")?;
        let hi = self.signed_number()?;
        self.expect(Tok::RBracket, "']'")?;
        Ok(Some(Interval::new(lo, hi)))
    }

    fn sum(&mut self) -> Result<WeightExpr> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = WeightExpr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = WeightExpr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<WeightExpr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = WeightExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = WeightExpr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<WeightExpr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(match inner {
                WeightExpr::Num(v) => WeightExpr::Num(-v),
                other => WeightExpr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<WeightExpr> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(WeightExpr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<WeightExpr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(WeightExpr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let var = match name.as_str() {
                    "x" => Some(Variable::X),
                    "theta" => Some(Variable::Theta),
                    _ => None,
                };
                if let Some(v) = var {
                    if let Some(seen) = self.var {
                        if seen != v {
                            return Err(Error::Semantic(
                                "expression mixes x and theta".into(),
                            ));
                        }
                    }
                    self.var = Some(v);
                    self.bump();
                    return Ok(WeightExpr::Var(v));
                }
                if name == "pi" {
                    self.bump();
                    return Ok(WeightExpr::Pi);
                }
                if let Some(f) = Func::from_name(&name) {
                    self.bump();
                    self.expect(Tok::LParen, "'('")?;
                    let arg = self.sum()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(WeightExpr::Call(f, Box::new(arg)));
                }
                Err(self.error(&["number", "variable", "function", "'('"]))
            }
            _ => Err(self.error(&["number", "variable", "function", "'('"])),
        }
    }
}

/// Parse a measure, inferring its domain from builtins and variables
/// (real line when nothing decides it).
pub fn parse_measure(text: &str) -> Result<MeasureSpec> {
    parse_measure_in(text, None)
}

/// Parse a measure with an optional domain hint for inputs that do not
/// determine their own domain (constants, bare atoms).
pub fn parse_measure_in(text: &str, hint: Option<Domain>) -> Result<MeasureSpec> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        var: None,
    };
    let (declared, terms) = p.measure()?;

    let mut inferred: Option<Domain> = None;
    let mut note = |d: Domain| -> Result<()> {
        match inferred {
            Some(prev) if prev != d => Err(Error::Semantic(
                "measure mixes real-line and unit-circle terms".into(),
            )),
            _ => {
                inferred = Some(d);
                Ok(())
            }
        }
    };
    for (_, atom) in &terms {
        if let Atom::Ac(w, _) = atom {
            match w {
                Weight::Builtin(b) => note(b.domain())?,
                Weight::Expr(e) => {
                    if let Some(v) = e.variable() {
                        note(match v {
                            Variable::X => Domain::RealLine,
                            Variable::Theta => Domain::UnitCircle,
                        })?
                    }
                }
            }
        }
    }
    let domain = match (declared, inferred, hint) {
        (Some(d), Some(i), _) if d != i => {
            return Err(Error::Semantic(format!(
                "declared domain {} conflicts with its terms",
                d.name()
            )))
        }
        (Some(d), _, _) => d,
        (None, Some(i), _) => i,
        (None, None, Some(h)) => h,
        (None, None, None) => Domain::RealLine,
    };

    let mut ac_terms = Vec::new();
    let mut point_masses = Vec::new();
    for (coefficient, atom) in terms {
        match atom {
            Atom::Ac(weight, restriction) => ac_terms.push(AcTerm {
                coefficient,
                weight,
                restriction,
            }),
            Atom::Delta(at) => {
                let location = match domain {
                    Domain::UnitCircle => at.rem_euclid(TAU),
                    Domain::RealLine => at,
                };
                point_masses.push(PointMass {
                    location,
                    mass: coefficient,
                })
            }
        }
    }
    MeasureSpec::new(domain, ac_terms, point_masses)
}

/// Parse a single weight (builtin name or expression) for a known domain.
const BUILTIN_NAMES: [&str; 5] = ["legendre", "chebyshev", "lebesgue_circle", "jacobi", "bernstein_szego"];

/// A single weight as written in JSON: a builtin name or a whole expression.
pub(crate) fn parse_weight(text: &str, domain: Domain) -> Result<Weight> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        var: None,
    };
    let builtin = matches!(p.peek(), Tok::Ident(n) if BUILTIN_NAMES.contains(&n.as_str()));
    let atom = if builtin { p.atom()? } else { Atom::Ac(Weight::Expr(p.sum()?), None) };
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["end of input"]));
    }
    match atom {
        Atom::Ac(w, None) => {
            if let Weight::Builtin(b) = &w {
                if b.domain() != domain {
                    return Err(Error::Semantic(format!("{b} is not a {} weight", domain.name())));
                }
            }
            Ok(w)
        }
        _ => Err(Error::Semantic(format!("'{text}' is not a weight"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_legendre() {
        let m = parse_measure("legendre").unwrap();
        assert_eq!(m.domain, Domain::RealLine);
        assert_eq!(m.ac_terms.len(), 1);
        assert!(m.point_masses.is_empty());
        assert_eq!(m.ac_terms[0].weight, Weight::Builtin(Builtin::Legendre));
        assert_eq!(m.ac_density(0.3), 0.5);
    }

    #[test]
    fn circle_with_atom() {
        let m = parse_measure("lebesgue_circle + 0.5*delta(0.3)").unwrap();
        assert_eq!(m.domain, Domain::UnitCircle);
        assert_eq!(
            m.point_masses,
            vec![PointMass {
                location: 0.3,
                mass: 0.5
            }]
        );
    }

    #[test]
    fn singular_power_parses() {
        let m = parse_measure("(1-x^2)^(-0.7) on [-1,1]").unwrap();
        assert_eq!(m.ac_terms[0].restriction, Some(Interval::new(-1.0, 1.0)));
        let w = m.ac_density(0.0);
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_measure("legendre + + chebyshev").unwrap_err();
        match err {
            Error::Syntax { position, .. } => assert_eq!(position, 11),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_measure("x^2 - 1").unwrap_err();
        assert!(matches!(err, Error::Syntax { position: 4, .. }), "{err:?}");
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(
            parse_measure("-0.5*delta(0)"),
            Err(Error::Syntax { .. } | Error::Semantic(_))
        ));
        assert!(matches!(parse_measure("0*delta(0)"), Err(Error::Semantic(_))));
        assert!(matches!(
            parse_measure("legendre on [0.5,2]"),
            Err(Error::Semantic(_))
        ));
        assert!(matches!(
            parse_measure("legendre + lebesgue_circle"),
            Err(Error::Semantic(_))
        ));
        assert!(matches!(parse_measure("jacobi(-1,0)"), Err(Error::Semantic(_))));
        assert!(matches!(parse_measure("1 on [1,1]"), Err(Error::Semantic(_))));
    }

    #[test]
    fn domain_prefix_and_hint() {
        let m = parse_measure("circle: 1 on [1,2]").unwrap();
        assert_eq!(m.domain, Domain::UnitCircle);
        let m = parse_measure_in("delta(0)", Some(Domain::UnitCircle)).unwrap();
        assert_eq!(m.domain, Domain::UnitCircle);
        assert_eq!(parse_measure("delta(0)").unwrap().domain, Domain::RealLine);
    }

    #[test]
    fn circle_atoms_wrap_into_range() {
        let m = parse_measure("lebesgue_circle + delta(-0.5)").unwrap();
        assert!((m.point_masses[0].location - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn pretty_print_round_trip_examples() {
        for text in [
            "legendre",
            "chebyshev on [-0.5,0.5] + 0.25*delta(0.9)",
            "jacobi(1,0.5)",
            "abs(x)",
            "2*x^2*exp(-x) on [0,3]",
            "(1-x^2)^(-0.7) on [-1,1]",
            "bernstein_szego(0.5) + 0.1*delta(3)",
            "circle: 1 on [1.5,4.5]",
            "(1+cos(theta))",
            "-x*-x",
        ] {
            let m = parse_measure(text).unwrap();
            let printed = m.to_string();
            let again = parse_measure(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
            assert_eq!(m, again, "{text} -> {printed}");
        }
    }
}
