//! Printing in the same surface syntax the parser accepts.

use std::fmt;

use num_traits::{One, Signed};

use super::poly::{Monomial, Poly};
use super::store::{self, ATOM_BIT};
use super::{Expression, Rational};

fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (v, e) in m.iter() {
        if v & ATOM_BIT != 0 {
            let info = store::atom(v);
            let q = Rational::new(e.into(), info.degree.into());
            parts.push(format!("abs({})^({})", fmt_poly(&info.base), fmt_rational(&q)));
        } else {
            let name = store::var_name(v);
            if e == 1 {
                parts.push(name.to_string());
            } else {
                parts.push(format!("{name}^{e}"));
            }
        }
    }
    parts.join("*")
}

pub(crate) fn fmt_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms.iter().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&fmt_rational(&abs));
        } else if abs.is_one() {
            out.push_str(&fmt_monomial(m));
        } else {
            out.push_str(&fmt_rational(&abs));
            out.push('*');
            out.push_str(&fmt_monomial(m));
        }
    }
    out
}

fn fmt_factor(p: &Poly) -> String {
    let s = fmt_poly(p);
    if p.len() == 1 && p.terms[0].1.is_one() {
        s
    } else {
        format!("({s})")
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", fmt_poly(&self.num));
        }
        let den: Vec<String> = self
            .den
            .iter()
            .map(|&(id, k)| {
                let base = fmt_factor(&store::factor(id).poly);
                if k == 1 {
                    base
                } else {
                    format!("{base}^{k}")
                }
            })
            .collect();
        let num = fmt_poly(&self.num);
        let num = if self.num.len() == 1 && !num.starts_with('-') {
            num
        } else {
            format!("({num})")
        };
        if den.len() == 1 {
            write!(f, "{num}/{}", den[0])
        } else {
            write!(f, "{num}/({})", den.join("*"))
        }
    }
}
