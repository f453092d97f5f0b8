//! Recursive-descent parser for rational function literals such as
//! `(t1^2 + g*t1 + 2)/(t1 - 1)`.

use std::sync::Arc;

use crate::scalar::Int;

use super::gf::GfCtx;
use super::mpoly::MPoly;
use super::ratfunc::RationalFunction;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    /// 1-based column of the offending character.
    pub column: usize,
    pub message: String,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    ctx: &'a Arc<GfCtx>,
    names: &'a [String],
}

/// Parses `src` over `ctx` with variables named by `names` (`t1`, `t2`, ...
/// by convention; `t` is accepted for the first variable).
pub fn parse_rational_function(
    src: &str,
    ctx: &Arc<GfCtx>,
    names: &[String],
) -> Result<RationalFunction, ParseError> {
    let mut p = Parser { chars: src.chars().collect(), pos: 0, ctx, names };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.err(format!("unexpected '{}'", p.chars[p.pos])));
    }
    Ok(v)
}

impl Parser<'_> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { column: self.pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn nvars(&self) -> usize {
        self.names.len()
    }

    fn expr(&mut self) -> Result<RationalFunction, ParseError> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFunction, ParseError> {
        let mut acc = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == '*' {
                acc.mul(&rhs)
            } else {
                acc.div(&rhs).map_err(|_| ParseError {
                    column: at + 1,
                    message: "division by zero".into(),
                })?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RationalFunction, ParseError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if self.peek() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFunction, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.pos;
        let exp = self.exponent()?;
        base.pow(exp).map_err(|e| ParseError { column: at + 1, message: e.to_string() })
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.exponent()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some('-') => {
                self.pos += 1;
                Ok(-self.exponent()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let s = self.digits();
                s.parse().map_err(|_| self.err("exponent out of range"))
            }
            _ => Err(self.err("expected integer exponent")),
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn atom(&mut self) -> Result<RationalFunction, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n: Int = self.digits().parse().unwrap();
                Ok(RationalFunction::constant(self.ctx.from_big(&n), self.nvars()))
            }
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                if name == "g" {
                    if self.ctx.e() == 1 {
                        self.pos = start;
                        return Err(self.err("generator g needs an extension field (e > 1)"));
                    }
                    return Ok(RationalFunction::constant(self.ctx.generator(), self.nvars()));
                }
                let idx = self.names.iter().position(|n| *n == name).or_else(|| {
                    (name == "t" && !self.names.is_empty()).then_some(0)
                });
                match idx {
                    Some(i) => Ok(RationalFunction::from_poly(MPoly::var(self.ctx, self.nvars(), i))),
                    None => {
                        self.pos = start;
                        Err(self.err(format!("unknown variable '{name}'")))
                    }
                }
            }
            Some(c) => Err(self.err(format!("unexpected '{c}'"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Default variable names `t1..td`.
pub fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("t{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spec_style_literal() {
        let f = GfCtx::new(3, 2).unwrap();
        let names = default_names(1);
        let r = parse_rational_function("(t1^2 + g*t1 + 2)/(t1 - 1)", &f, &names).unwrap();
        let t = RationalFunction::var(&f, 1, 0);
        let g = RationalFunction::constant(f.generator(), 1);
        let two = RationalFunction::constant(f.from_int(2), 1);
        let one = RationalFunction::one(&f, 1);
        let expect = t.mul(&t).add(&g.mul(&t)).add(&two).div(&t.sub(&one)).unwrap();
        assert_eq!(r, expect);
    }

    #[test]
    fn negative_exponent_and_alias() {
        let f = GfCtx::new(5, 1).unwrap();
        let names = default_names(1);
        let a = parse_rational_function("t^-2", &f, &names).unwrap();
        let b = parse_rational_function("1/(t1*t1)", &f, &names).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reports_columns() {
        let f = GfCtx::new(5, 1).unwrap();
        let names = default_names(2);
        let e = parse_rational_function("t1 + t3", &f, &names).unwrap_err();
        assert_eq!(e.column, 6);
        let e = parse_rational_function("(t1 + 1", &f, &names).unwrap_err();
        assert_eq!(e.column, 8);
        let e = parse_rational_function("g", &f, &names).unwrap_err();
        assert_eq!(e.column, 1);
        assert!(parse_rational_function("1/(t1 - t1)", &f, &names).is_err());
    }
}
