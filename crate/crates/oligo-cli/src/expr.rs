//! The expression language for building decorated groups.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr := term ("x" term)*
//! term := "Sinf" | "AutQ" | "RevQ" | "AutQZ" | "RevQZ"
//!       | S(n) | C(n) | D(n) | Id(n) | Group("(a b)(c d)", ...)
//!       | wr(F [, outer=F2]) | hybrid(F1, F2) | rep(KIND, F) | ker(F)
//! ```
//!
//! `x` is a left-associative product. Calls are fully parenthesized; the
//! only infix operator is `x`. Parse errors carry the byte offset and the
//! set of expected tokens.

use std::fmt;

use oligo_core::decorated::{self, DecoratedGroup, HHKind};
use oligo_core::perm::FiniteGroup;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupExpr {
    Atom(HHKind),
    Sym(usize),
    Cyc(usize),
    Dih(usize),
    Id(usize),
    Gens(Vec<String>),
    Wreath(Box<GroupExpr>, Option<Box<GroupExpr>>),
    Hybrid(Box<GroupExpr>, Box<GroupExpr>),
    Replicate(HHKind, Box<GroupExpr>),
    Kernel(Box<GroupExpr>),
    Product(Vec<GroupExpr>),
}

#[derive(Clone, Debug)]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at byte {}: found {}, expected {}",
            self.offset,
            self.found,
            self.expected.join(" | ")
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(usize),
    Str(String),
    LParen,
    RParen,
    Comma,
    Eq,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Num(n) => format!("number `{n}`"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Eq => "`=`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            ',' => {
                out.push((i, Tok::Comma));
                i += 1;
            }
            '=' => {
                out.push((i, Tok::Eq));
                i += 1;
            }
            '"' => {
                let start = i;
                i += 1;
                let from = i;
                while i < bytes.len() && bytes[i] as char != '"' {
                    i += 1;
                }
                if i == bytes.len() {
                    return Err(ParseError {
                        offset: start,
                        expected: vec!["closing `\"`".into()],
                        found: "end of input".into(),
                    });
                }
                out.push((start, Tok::Str(text[from..i].to_string())));
                i += 1;
            }
            '0'..='9' => {
                let from = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((from, Tok::Num(text[from..i].parse().unwrap())));
            }
            c if c.is_ascii_alphabetic() => {
                let from = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((from, Tok::Ident(text[from..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    expected: vec!["identifier".into(), "number".into(), "punctuation".into()],
                    found: format!("`{c}`"),
                })
            }
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &(usize, Tok) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let (offset, tok) = self.peek();
        Err(ParseError {
            offset: *offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: describe(tok),
        })
    }

    fn expect(&mut self, want: &Tok, label: &str) -> Result<(), ParseError> {
        if &self.peek().1 == want {
            self.bump();
            Ok(())
        } else {
            self.fail(&[label])
        }
    }

    fn number(&mut self) -> Result<usize, ParseError> {
        if let (_, Tok::Num(n)) = self.peek() {
            let n = *n;
            self.bump();
            Ok(n)
        } else {
            self.fail(&["number"])
        }
    }

    fn expr(&mut self) -> Result<GroupExpr, ParseError> {
        let mut terms = vec![self.term()?];
        while let (_, Tok::Ident(name)) = self.peek() {
            if name != "x" {
                break;
            }
            self.bump();
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            GroupExpr::Product(terms)
        })
    }

    fn atom_kind(name: &str) -> Option<HHKind> {
        match name {
            "Sinf" => Some(HHKind::SymInf),
            "AutQ" => Some(HHKind::AutQ),
            "RevQ" => Some(HHKind::RevQ),
            "AutQZ" => Some(HHKind::AutQZ),
            "RevQZ" => Some(HHKind::RevQZ),
            _ => None,
        }
    }

    fn term(&mut self) -> Result<GroupExpr, ParseError> {
        let (_, tok) = self.peek().clone();
        let name = match tok {
            Tok::Ident(name) => name,
            _ => {
                return self.fail(&[
                    "`Sinf`/`AutQ`/`RevQ`/`AutQZ`/`RevQZ`",
                    "`S`/`C`/`D`/`Id`/`Group`",
                    "`wr`/`hybrid`/`rep`/`ker`",
                ])
            }
        };
        if let Some(kind) = Self::atom_kind(&name) {
            self.bump();
            return Ok(GroupExpr::Atom(kind));
        }
        self.bump();
        self.expect(&Tok::LParen, "`(`")?;
        let node = match name.as_str() {
            "S" | "C" | "D" | "Id" => {
                let n = self.number()?;
                match name.as_str() {
                    "S" => GroupExpr::Sym(n),
                    "C" => GroupExpr::Cyc(n),
                    "D" => GroupExpr::Dih(n),
                    _ => GroupExpr::Id(n),
                }
            }
            "Group" => {
                let mut strings = Vec::new();
                loop {
                    if let (_, Tok::Str(s)) = self.peek() {
                        strings.push(s.clone());
                        self.bump();
                    } else {
                        return self.fail(&["cycle string"]);
                    }
                    if self.peek().1 == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                GroupExpr::Gens(strings)
            }
            "wr" => {
                let inner = self.term()?;
                let mut outer = None;
                if self.peek().1 == Tok::Comma {
                    self.bump();
                    if let (_, Tok::Ident(kw)) = self.peek() {
                        if kw != "outer" {
                            return self.fail(&["`outer`"]);
                        }
                    } else {
                        return self.fail(&["`outer`"]);
                    }
                    self.bump();
                    self.expect(&Tok::Eq, "`=`")?;
                    outer = Some(Box::new(self.term()?));
                }
                GroupExpr::Wreath(Box::new(inner), outer)
            }
            "hybrid" => {
                let h0 = self.term()?;
                self.expect(&Tok::Comma, "`,`")?;
                let h = self.term()?;
                GroupExpr::Hybrid(Box::new(h0), Box::new(h))
            }
            "rep" => {
                let kind = if let (_, Tok::Ident(k)) = self.peek() {
                    match Self::atom_kind(k) {
                        Some(kind) => kind,
                        None => return self.fail(&["`Sinf`/`AutQ`/`RevQ`/`AutQZ`/`RevQZ`"]),
                    }
                } else {
                    return self.fail(&["`Sinf`/`AutQ`/`RevQ`/`AutQZ`/`RevQZ`"]);
                };
                self.bump();
                self.expect(&Tok::Comma, "`,`")?;
                let outer = self.term()?;
                GroupExpr::Replicate(kind, Box::new(outer))
            }
            "ker" => GroupExpr::Kernel(Box::new(self.term()?)),
            _ => {
                self.pos -= 2; // report at the unknown name
                return self.fail(&[
                    "`S`/`C`/`D`/`Id`/`Group`",
                    "`wr`/`hybrid`/`rep`/`ker`",
                ]);
            }
        };
        self.expect(&Tok::RParen, "`)`")?;
        Ok(node)
    }
}

/// Parses an expression; the whole input must be consumed.
pub fn parse(text: &str) -> Result<GroupExpr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.peek().1 != Tok::End {
        return p.fail(&["`x`", "end of input"]);
    }
    Ok(e)
}

/// Canonical text form; `parse(print(e)) == e`.
pub fn print(e: &GroupExpr) -> String {
    match e {
        GroupExpr::Atom(kind) => atom_name(*kind).to_string(),
        GroupExpr::Sym(n) => format!("S({n})"),
        GroupExpr::Cyc(n) => format!("C({n})"),
        GroupExpr::Dih(n) => format!("D({n})"),
        GroupExpr::Id(n) => format!("Id({n})"),
        GroupExpr::Gens(strings) => {
            let quoted: Vec<String> = strings.iter().map(|s| format!("{s:?}")).collect();
            format!("Group({})", quoted.join(", "))
        }
        GroupExpr::Wreath(inner, None) => format!("wr({})", print(inner)),
        GroupExpr::Wreath(inner, Some(outer)) => {
            format!("wr({}, outer={})", print(inner), print(outer))
        }
        GroupExpr::Hybrid(h0, h) => format!("hybrid({}, {})", print(h0), print(h)),
        GroupExpr::Replicate(kind, outer) => {
            format!("rep({}, {})", atom_name(*kind), print(outer))
        }
        GroupExpr::Kernel(f) => format!("ker({})", print(f)),
        GroupExpr::Product(terms) => terms
            .iter()
            .map(print)
            .collect::<Vec<_>>()
            .join(" x "),
    }
}

fn atom_name(kind: HHKind) -> &'static str {
    match kind {
        HHKind::SymInf => "Sinf",
        HHKind::AutQ => "AutQ",
        HHKind::RevQ => "RevQ",
        HHKind::AutQZ => "AutQZ",
        HHKind::RevQZ => "RevQZ",
        HHKind::TrivialKernel => "TrivialKernel",
    }
}

/// Elaborates a finite-group leaf.
pub fn elaborate_finite(e: &GroupExpr) -> Result<FiniteGroup, String> {
    match e {
        GroupExpr::Sym(n) => Ok(FiniteGroup::symmetric(*n)),
        GroupExpr::Cyc(n) => Ok(FiniteGroup::cyclic(*n)),
        GroupExpr::Dih(n) => Ok(FiniteGroup::dihedral(*n)),
        GroupExpr::Id(n) => Ok(FiniteGroup::identity_group(*n)),
        GroupExpr::Gens(strings) => {
            let degree = inferred_degree(strings)?;
            let refs: Vec<&str> = strings.iter().map(|s| s.as_str()).collect();
            FiniteGroup::from_cycle_strings(degree, &refs).map_err(|e| e.to_string())
        }
        other => Err(format!(
            "expected a finite group, got the decorated expression `{}`",
            print(other)
        )),
    }
}

/// Degree of a generator list: one past the largest point mentioned.
fn inferred_degree(strings: &[String]) -> Result<usize, String> {
    let mut max: Option<usize> = None;
    for s in strings {
        for tok in s.split(|c: char| !c.is_ascii_digit()) {
            if !tok.is_empty() {
                let p: usize = tok.parse().map_err(|_| format!("bad point `{tok}`"))?;
                max = Some(max.map_or(p, |m| m.max(p)));
            }
        }
    }
    match max {
        Some(m) => Ok(m + 1),
        None => Err("generator list mentions no points".into()),
    }
}

/// Elaborates an expression to a decorated group.
pub fn elaborate(e: &GroupExpr) -> Result<DecoratedGroup, String> {
    let lib = |r: Result<DecoratedGroup, oligo_core::Error>| r.map_err(|e| e.to_string());
    match e {
        GroupExpr::Atom(kind) => lib(decorated::hh_atom(*kind)),
        GroupExpr::Wreath(inner, None) => lib(decorated::wreath_hh(&elaborate_finite(inner)?)),
        GroupExpr::Wreath(inner, Some(outer)) => lib(decorated::wreath_outer(
            &elaborate_finite(inner)?,
            &elaborate_finite(outer)?,
        )),
        GroupExpr::Hybrid(h0, h) => lib(decorated::hybrid(
            &elaborate_finite(h0)?,
            &elaborate_finite(h)?,
        )),
        GroupExpr::Replicate(kind, outer) => {
            lib(decorated::replicate_hh(*kind, &elaborate_finite(outer)?))
        }
        GroupExpr::Kernel(f) => lib(decorated::kernel_atom(&elaborate_finite(f)?)),
        GroupExpr::Product(terms) => {
            let mut acc = DecoratedGroup::empty();
            for t in terms {
                acc = lib(decorated::direct_product(&acc, &elaborate(t)?))?;
            }
            Ok(acc)
        }
        finite => Err(format!(
            "`{}` is a finite group, not a decorated group; wrap it in wr/ker/hybrid",
            print(finite)
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse("wr(C(2))").unwrap(),
            GroupExpr::Wreath(Box::new(GroupExpr::Cyc(2)), None)
        );
        assert_eq!(
            parse("wr(C(4), outer=C(3))").unwrap(),
            GroupExpr::Wreath(
                Box::new(GroupExpr::Cyc(4)),
                Some(Box::new(GroupExpr::Cyc(3)))
            )
        );
        assert_eq!(
            parse("rep(Sinf, S(2)) x ker(Id(1))").unwrap(),
            GroupExpr::Product(vec![
                GroupExpr::Replicate(HHKind::SymInf, Box::new(GroupExpr::Sym(2))),
                GroupExpr::Kernel(Box::new(GroupExpr::Id(1))),
            ])
        );
    }

    #[test]
    fn parse_is_whitespace_insensitive() {
        assert_eq!(
            parse("  hybrid( S(2) ,Id(2) )  ").unwrap(),
            parse("hybrid(S(2),Id(2))").unwrap()
        );
    }

    #[test]
    fn product_is_left_associative_and_flat() {
        let e = parse("ker(S(2)) x wr(C(2)) x Sinf").unwrap();
        match e {
            GroupExpr::Product(terms) => assert_eq!(terms.len(), 3),
            other => panic!("expected product, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_offset_and_expectations() {
        let err = parse("wr(C(2)").unwrap_err();
        assert_eq!(err.offset, 7);
        assert!(err.expected.iter().any(|s| s.contains(')')));

        let err = parse("frob(3)").unwrap_err();
        assert_eq!(err.offset, 0);

        let err = parse("wr(C(x))").unwrap_err();
        assert_eq!(err.offset, 5);
        assert!(err.expected.iter().any(|s| s.contains("number")));
    }

    #[test]
    fn print_round_trips() {
        for text in [
            "wr(C(2))",
            "wr(C(4), outer=C(3))",
            "hybrid(S(2), Id(2))",
            "hybrid(C(4), Group(\"(0 2)(1 3)\"))",
            "rep(Sinf, S(2))",
            "rep(AutQ, C(3))",
            "rep(RevQZ, S(2))",
            "ker(S(2)) x wr(C(2))",
            "Sinf",
            "wr(Group(\"(0 1)\", \"(2 3)\"))",
        ] {
            let ast = parse(text).unwrap();
            assert_eq!(parse(&print(&ast)).unwrap(), ast, "round-trip of {text}");
        }
    }

    #[test]
    fn elaboration_examples() {
        let nested = elaborate(&parse("wr(C(4), outer=C(3))").unwrap()).unwrap();
        assert_eq!(nested.degree(), 12);
        assert!(nested.is_valid());

        let gens = elaborate_finite(&parse("Group(\"(0 1)\", \"(2 3)\")").unwrap()).unwrap();
        assert_eq!(gens.degree(), 4);
        assert_eq!(gens.order(), 4);

        assert!(elaborate(&parse("S(3)").unwrap()).is_err());
    }
}
