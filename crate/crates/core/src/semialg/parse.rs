//! Parser for the family-file format:
//!
//! ```text
//! params m=1
//! vars   n=2
//! bound  R = T1 + 1
//! formula (x1^2 + x2^2 - T1^2 <= 0)
//! ```
//!
//! The formula may continue over several lines. Polynomials use `T<k>`,
//! `x<k>`, integer or `p/q` literals, `+ - *` and `^` with a nonnegative
//! integer exponent. Atoms compare a polynomial with `0` via `<=`, `<` or
//! `=`; `&` binds tighter than `|`.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Atom, FamilySpec, Formula, Relation};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
    Param(usize),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    And,
    Or,
    Le,
    Lt,
    Eq,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str, line0: usize, col0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (line0, col0);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, column: tc });
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '+' => push(&mut out, Tok::Plus),
            '-' => push(&mut out, Tok::Minus),
            '*' => push(&mut out, Tok::Star),
            '^' => push(&mut out, Tok::Caret),
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            '&' => push(&mut out, Tok::And),
            '|' => push(&mut out, Tok::Or),
            '=' => push(&mut out, Tok::Eq),
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(&mut out, Tok::Le);
                    i += 1;
                    col += 1;
                } else {
                    push(&mut out, Tok::Lt);
                }
            }
            'T' | 'x' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start {
                    return Err(syntax(tl, tc, format!("expected an index after '{c}'")));
                }
                let idx: usize = chars[start..j]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| syntax(tl, tc, "variable index out of range"))?;
                push(&mut out, if c == 'T' { Tok::Param(idx) } else { Tok::Var(idx) });
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let num: BigInt = chars[i..j].iter().collect::<String>().parse().unwrap();
                let mut value = Rat::from_integer(num);
                // `p/q` literal: the slash must be followed directly by digits.
                if chars.get(j) == Some(&'/') && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    let den: BigInt = chars[j + 1..k].iter().collect::<String>().parse().unwrap();
                    if den.is_zero() {
                        return Err(syntax(tl, tc, "zero denominator"));
                    }
                    value /= Rat::from_integer(den);
                    j = k;
                }
                push(&mut out, Tok::Num(value));
                col += j - i;
                i = j;
                continue;
            }
            other => return Err(syntax(tl, tc, format!("unexpected character '{other}'"))),
        }
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    m: usize,
    n: usize,
    atoms: Vec<Atom>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unbump(&mut self, t: &Tok) {
        if *t != Tok::End {
            self.pos -= 1;
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Or {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut parts = vec![self.primary()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.primary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn primary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::LParen {
            // Either a parenthesized formula or an atom whose polynomial
            // starts with a parenthesis; try the former first.
            let save = (self.pos, self.atoms.len());
            self.bump();
            if let Ok(f) = self.formula() {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    if !matches!(
                        self.peek(),
                        Tok::Caret | Tok::Star | Tok::Plus | Tok::Minus | Tok::Le | Tok::Lt | Tok::Eq
                    ) {
                        return Ok(f);
                    }
                }
            }
            self.pos = save.0;
            self.atoms.truncate(save.1);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        let poly = self.poly()?;
        let rel = match self.bump() {
            Tok::Le => Relation::Le,
            Tok::Lt => Relation::Lt,
            Tok::Eq => Relation::Eq,
            other => {
                self.unbump(&other);
                return Err(self.err("expected '<=', '<' or '='"));
            }
        };
        match self.bump() {
            Tok::Num(v) if v.is_zero() => {}
            other => {
                self.unbump(&other);
                return Err(self.err("the right-hand side of an atom must be 0"));
            }
        }
        self.atoms.push(Atom::new(poly, rel));
        Ok(Formula::Atom(self.atoms.len() - 1))
    }

    fn poly(&mut self) -> Result<Polynomial> {
        let mut acc = match self.peek() {
            Tok::Minus => {
                self.bump();
                self.term()?.neg()
            }
            Tok::Plus => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            match self.bump() {
                Tok::Num(k) if k.is_integer() && k >= Rat::zero() => {
                    let e: u32 = k
                        .to_integer()
                        .try_into()
                        .map_err(|_| self.err("exponent too large"))?;
                    Ok(base.pow(e))
                }
                other => {
                    self.unbump(&other);
                    Err(self.err("expected a nonnegative integer exponent"))
                }
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Polynomial> {
        match self.bump() {
            Tok::Num(v) => Ok(Polynomial::constant(self.m, self.n, v)),
            Tok::Param(k) => {
                if k == 0 || k > self.m {
                    return Err(Error::Arity {
                        name: format!("T{k}"),
                        limit: self.m,
                    });
                }
                Ok(Polynomial::param(self.m, self.n, k - 1))
            }
            Tok::Var(k) => {
                if k == 0 || k > self.n {
                    return Err(Error::Arity {
                        name: format!("x{k}"),
                        limit: self.n,
                    });
                }
                Ok(Polynomial::var(self.m, self.n, k - 1))
            }
            Tok::LParen => {
                let p = self.poly()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(p)
            }
            Tok::Minus => Ok(self.factor()?.neg()),
            other => {
                self.unbump(&other);
                Err(self.err("expected a number, variable or '('"))
            }
        }
    }
}

fn parser_for(text: &str, line: usize, column: usize, m: usize, n: usize) -> Result<Parser> {
    Ok(Parser {
        toks: lex(text, line, column)?,
        pos: 0,
        m,
        n,
        atoms: Vec::new(),
    })
}

/// Parses a bare polynomial over `T1..Tm, x1..xn`.
pub fn parse_polynomial(text: &str, m: usize, n: usize) -> Result<Polynomial> {
    let mut p = parser_for(text, 1, 1, m, n)?;
    let poly = p.poly()?;
    if *p.peek() != Tok::End {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(poly)
}

/// Parses a bare formula, returning its atoms and tree.
pub fn parse_formula(text: &str, m: usize, n: usize) -> Result<(Vec<Atom>, Formula)> {
    formula_at(text, 1, 1, m, n)
}

fn formula_at(text: &str, line: usize, col: usize, m: usize, n: usize) -> Result<(Vec<Atom>, Formula)> {
    let mut p = parser_for(text, line, col, m, n)?;
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.err("unexpected trailing input"));
    }
    Ok((p.atoms, f))
}

/// Parses a complete family file.
pub fn parse_family(text: &str) -> Result<FamilySpec> {
    let mut m: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut bound: Option<(String, usize, usize)> = None;
    let mut formula: Option<(String, usize, usize)> = None;

    let lines: Vec<&str> = text.lines().collect();
    let mut idx = 0;
    while idx < lines.len() {
        let raw = lines[idx];
        let lineno = idx + 1;
        idx += 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.len() - trimmed.len();
        let (key, rest) = trimmed
            .split_once(char::is_whitespace)
            .unwrap_or((trimmed.trim_end(), ""));
        let rest_col = indent + key.len() + 2;
        match key {
            "params" | "vars" => {
                let want = if key == "params" { 'm' } else { 'n' };
                let value = parse_assignment(rest, want)
                    .ok_or_else(|| syntax(lineno, rest_col, format!("expected '{want}=<integer>'")))?;
                if key == "params" {
                    m = Some(value);
                } else {
                    n = Some(value);
                }
            }
            "bound" => {
                let body = rest.trim_start();
                let Some(expr) = body.strip_prefix('R').map(str::trim_start).and_then(|s| s.strip_prefix('=')) else {
                    return Err(syntax(lineno, rest_col, "expected 'R = <polynomial>'"));
                };
                let col = raw.len() - expr.len() + 1;
                bound = Some((expr.to_string(), lineno, col));
            }
            "formula" => {
                // The formula runs to the end of the file.
                let mut body = rest.to_string();
                let col = raw.len() - rest.len() + 1;
                for more in &lines[idx..] {
                    body.push('\n');
                    body.push_str(more.split('#').next().unwrap_or(""));
                }
                idx = lines.len();
                formula = Some((body, lineno, col));
            }
            other => {
                return Err(syntax(lineno, indent + 1, format!("unknown directive '{other}'")));
            }
        }
    }

    let end = lines.len().max(1);
    let m = m.ok_or_else(|| syntax(end, 1, "missing 'params m=<integer>'"))?;
    let n = n.ok_or_else(|| syntax(end, 1, "missing 'vars n=<integer>'"))?;
    if n == 0 {
        return Err(syntax(end, 1, "n must be positive"));
    }
    let (btext, bl, bc) = bound.ok_or_else(|| syntax(end, 1, "missing 'bound R = ...'"))?;
    let (ftext, fl, fc) = formula.ok_or_else(|| syntax(end, 1, "missing 'formula ...'"))?;

    let mut bp = parser_for(&btext, bl, bc, m, n)?;
    let bound = bp.poly()?;
    if *bp.peek() != Tok::End {
        return Err(bp.err("unexpected trailing input in bound"));
    }
    if !bound.is_param_only() {
        return Err(syntax(bl, bc, "the bound R may only use parameters T<k>"));
    }
    let (atoms, f) = formula_at(&ftext, fl, fc, m, n)?;
    FamilySpec::new(m, n, atoms, f, bound)
}

fn parse_assignment(rest: &str, name: char) -> Option<usize> {
    let s: String = rest.chars().filter(|c| !c.is_whitespace()).collect();
    s.strip_prefix(name)?.strip_prefix('=')?.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn single_atom_disk() {
        let (atoms, f) = parse_formula("x1^2 + x2^2 - T1^2 <= 0", 1, 2).unwrap();
        assert_eq!(f, Formula::Atom(0));
        assert_eq!(atoms[0].rel, Relation::Le);
        assert_eq!(atoms[0].poly.to_string(), "x1^2 + x2^2 - T1^2");
    }

    #[test]
    fn weil_height_conjunction() {
        let text = "(x1^2*x2^2 - T1^2 <= 0) & (x1^2 - T1^2 <= 0) & (x2^2 - T1^2 <= 0)";
        let (atoms, f) = parse_formula(text, 1, 2).unwrap();
        assert_eq!(atoms.len(), 3);
        assert_eq!(f, Formula::all_of(3));
    }

    #[test]
    fn malformed_power_is_a_syntax_error() {
        let err = parse_formula("x1 ^", 0, 1).unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, column: 5, .. }), "{err:?}");
    }

    #[test]
    fn arity_is_checked() {
        assert!(matches!(
            parse_formula("x3 <= 0", 1, 2),
            Err(Error::Arity { .. })
        ));
        assert!(matches!(
            parse_formula("T2 + x1 <= 0", 1, 2),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn rational_literals_and_parenthesized_polynomials() {
        let p = parse_polynomial("3/4*(x1 + 1)^2 - 1/2", 0, 1).unwrap();
        let v = p.eval(&[], &[int(1)]);
        assert_eq!(v, rat(5, 2));
        let (atoms, f) = parse_formula("((x1 - 1)*(x1 + 1) <= 0) | (x1 = 0)", 0, 1).unwrap();
        assert_eq!(atoms.len(), 2);
        assert!(matches!(f, Formula::Or(_)));
        let (_, f) = parse_formula("(x1 - 1)^2 - 4 < 0", 0, 1).unwrap();
        assert_eq!(f, Formula::Atom(0));
    }

    #[test]
    fn file_format_with_multiline_formula() {
        let text = "# a comment\nparams m=1\nvars   n=2\nbound  R = T1 + 1\nformula (x1^2 + x2^2 - T1^2 <= 0)\n  & (x1 - T1 <= 0)\n";
        let fam = parse_family(text).unwrap();
        assert_eq!(fam.atoms().len(), 2);
        assert_eq!(fam.num_params(), 1);
        assert_eq!(fam.radius(&[int(2)]).unwrap(), int(3));
    }

    #[test]
    fn missing_sections_are_reported() {
        assert!(matches!(
            parse_family("params m=1\nvars n=2\nformula x1 <= 0\n"),
            Err(Error::Syntax { .. })
        ));
        let err = parse_family("params m=1\nvars n=2\nbound R = x1\nformula x1 <= 0\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, .. }));
    }

    #[test]
    fn nonzero_right_hand_side_rejected() {
        assert!(parse_formula("x1 <= 1", 0, 1).is_err());
    }
}
