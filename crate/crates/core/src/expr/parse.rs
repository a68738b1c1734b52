//! Recursive-descent parser for the expression surface syntax.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' exponent)?
//! exponent := '-'? INT | '(' '-'? INT ('/' INT)? ')'
//! atom   := INT | IDENT | '(' expr ')' | 'abs' '(' expr ')'
//! ```
//!
//! `abs(e)` is resolved on the chart where `e > 0`; together with a
//! fractional exponent it produces a radical atom over `e`.

use num_bigint::BigInt;

use super::space::VariableSpace;
use super::{Expression, ExprError, Rational, Sign};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '/' => out.push((start, Tok::Slash)),
            '^' => out.push((start, Tok::Caret)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().unwrap();
                out.push((start, Tok::Int(n)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    space: Option<&'a VariableSpace>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expression, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.offset();
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs).map_err(|e| match e {
                        ExprError::DivisionByZero => ExprError::Syntax {
                            pos: at,
                            msg: "division by zero".into(),
                        },
                        other => other,
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expression, ExprError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn int(&mut self) -> Result<BigInt, ExprError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected integer"),
        }
    }

    fn exponent(&mut self) -> Result<Rational, ExprError> {
        let negate = |neg: bool, q: Rational| if neg { -q } else { q };
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let neg = self.peek() == Some(&Tok::Minus);
            if neg {
                self.pos += 1;
            }
            let n = self.int()?;
            let q = if self.peek() == Some(&Tok::Slash) {
                self.pos += 1;
                let at = self.offset();
                let d = self.int()?;
                if d == BigInt::from(0) {
                    return Err(ExprError::Syntax {
                        pos: at,
                        msg: "zero denominator in exponent".into(),
                    });
                }
                Rational::new(n, d)
            } else {
                Rational::from_integer(n)
            };
            self.expect(Tok::RParen, "`)` closing exponent")?;
            return Ok(negate(neg, q));
        }
        let neg = self.peek() == Some(&Tok::Minus);
        if neg {
            self.pos += 1;
        }
        Ok(negate(neg, Rational::from_integer(self.int()?)))
    }

    fn power(&mut self) -> Result<Expression, ExprError> {
        let (base, is_abs) = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.offset();
        let q = self.exponent()?;
        let res = if is_abs {
            base.abs_pow(&q, Sign::Positive)
        } else {
            base.rational_pow(&q)
        };
        res.map_err(|e| match e {
            ExprError::DivisionByZero | ExprError::NegativeBase => ExprError::Syntax {
                pos: at,
                msg: e.to_string(),
            },
            other => other,
        })
    }

    fn atom(&mut self) -> Result<(Expression, bool), ExprError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok((Expression::constant(Rational::from_integer(n)), false))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "abs" && self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "`)` closing abs")?;
                    return Ok((inner, true));
                }
                if let Some(space) = self.space {
                    if !space.contains(&name) {
                        return Err(ExprError::UnknownVariable(name));
                    }
                }
                let _ = at;
                Ok((Expression::var(&name), false))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok((inner, false))
            }
            Some(_) => self.err("expected a number, variable or `(`"),
            None => self.err("unexpected end of input"),
        }
    }
}

fn run(text: &str, space: Option<&VariableSpace>) -> Result<Expression, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        space,
    };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parses an expression into canonical form.
pub fn parse(text: &str) -> Result<Expression, ExprError> {
    run(text, None)
}

/// Parses, rejecting any variable not declared in `space`.
pub fn parse_in(text: &str, space: &VariableSpace) -> Result<Expression, ExprError> {
    run(text, Some(space))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(parse("2*x^2").unwrap(), parse("2*(x^2)").unwrap());
        assert_eq!(parse("-x^2").unwrap(), parse("-(x^2)").unwrap());
        assert_eq!(parse("a - b - c").unwrap(), parse("a - (b + c)").unwrap());
        assert_eq!(parse("a/b/c").unwrap(), parse("a/(b*c)").unwrap());
    }

    #[test]
    fn identity_collapses_to_zero() {
        assert!(parse("(x+y)^2 - x^2 - 2*x*y - y^2").unwrap().is_zero());
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("x + * y") {
            Err(ExprError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("(x"), Err(ExprError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("x $ y"), Err(ExprError::Syntax { pos: 2, .. })));
        assert!(matches!(parse(""), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn declared_only_mode() {
        let space = VariableSpace::jet_space(&["f"], 1);
        assert!(parse_in("p*f_y - 3*f", &space).is_ok());
        assert_eq!(
            parse_in("q + f", &space),
            Err(ExprError::UnknownVariable("q".into()))
        );
    }

    #[test]
    fn jet_names_are_symmetric() {
        assert_eq!(parse("f_yx").unwrap(), parse("f_xy").unwrap());
        assert_eq!(parse("g_pyx").unwrap(), parse("g_xyp").unwrap());
    }

    #[test]
    fn fractional_exponents() {
        let a = parse("abs(I1)^(1/2)").unwrap();
        assert_eq!(a.atoms().len(), 1);
        let b = parse("abs(I1)^(3/2)").unwrap();
        assert_eq!(b, parse("I1*abs(I1)^(1/2)").unwrap());
        assert_eq!(parse("x^(-1)").unwrap(), parse("1/x").unwrap());
        assert_eq!(parse("4^(1/2)").unwrap(), Expression::int(2));
    }
}
