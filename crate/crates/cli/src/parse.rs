//! Text syntax for fields, ring elements and diagonal forms.
//!
//! Elements: integers, `w` (the uniformizer), `t` (θ, q = 4 only), with
//! `+ - * ^` and parentheses, e.g. `1+2*t`, `5*w^3`, `-(1+w)`.
//! Forms: signed terms `c*x_i^2`, e.g. `x_1^2 - 5*x_2^2` or `(1+2*t)*x^2`.

use dyadic::local_ring::{LocalField, RingElem};
use dyadic::qform::DiagonalForm;
use dyadic::{Error, Result};

/// `q2`, `q4`, `q2r` (ℚ₂(√2)) or `zp:P` for an odd prime P.
pub fn field(s: &str) -> Result<LocalField> {
    match s {
        "q2" => Ok(LocalField::q2()),
        "q4" => Ok(LocalField::q4()),
        "q2r" => Ok(LocalField::q2_sqrt2()),
        _ => {
            let p = s
                .strip_prefix("zp:")
                .and_then(|p| p.parse::<u64>().ok())
                .ok_or_else(|| Error::Parse(format!("unknown field {s:?}; use q2, q4, q2r or zp:P")))?;
            LocalField::qp(p)
        }
    }
}

struct Parser<'a> {
    k: &'a LocalField,
    src: Vec<char>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&mut self) -> Option<char> {
        while self.src.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        let s: String = self.src.iter().collect();
        Error::Parse(format!("{what} at position {} in {s:?}", self.pos))
    }

    fn expr(&mut self) -> Result<RingElem> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { self.k.add(&acc, &t) } else { self.k.sub(&acc, &t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RingElem> {
        let mut acc = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = self.k.mul(&acc, &f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RingElem> {
        if self.peek() == Some('-') {
            self.pos += 1;
            let f = self.factor()?;
            return Ok(self.k.neg(&f));
        }
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let e = self.integer()?;
            let e = u32::try_from(e).map_err(|_| self.err("bad exponent"))?;
            return Ok(self.k.pow(&base, e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64> {
        self.peek();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.src[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.err("expected an integer"))
    }

    fn atom(&mut self) -> Result<RingElem> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('w') => {
                self.pos += 1;
                Ok(self.k.uniformizer())
            }
            Some('t') => {
                self.pos += 1;
                self.k.theta().ok_or_else(|| self.err("θ exists only in q4"))
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(self.k.elem(n))
            }
            _ => Err(self.err("expected an integer, w, t or '('")),
        }
    }
}

pub fn element(k: &LocalField, s: &str) -> Result<RingElem> {
    let mut p = Parser { k, src: s.chars().collect(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Split at top-level `+`/`-`, keeping each sign with its term.
fn signed_terms(s: &str) -> Result<Vec<(bool, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut negative = false;
    let mut prev: Option<char> = None;
    for c in s.chars().filter(|c| !c.is_whitespace()) {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        // A sign right after '^', '*' or '(' belongs to the coefficient.
        let binary = depth == 0 && (c == '+' || c == '-') && !matches!(prev, Some('^' | '*' | '('));
        if binary {
            if !cur.is_empty() {
                out.push((negative, std::mem::take(&mut cur)));
            } else if prev.is_some() {
                return Err(Error::Parse(format!("empty term in {s:?}")));
            }
            negative = c == '-';
        } else {
            cur.push(c);
        }
        prev = Some(c);
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in {s:?}")));
    }
    if cur.is_empty() {
        return Err(Error::Parse(format!("empty form term in {s:?}")));
    }
    out.push((negative, cur));
    Ok(out)
}

/// Parse `Σ ± c*x_i^2`; terms may appear in any order of i.
pub fn form(k: &LocalField, s: &str) -> Result<DiagonalForm> {
    if s.trim() == "0" {
        return Ok(DiagonalForm::empty(k));
    }
    let mut indexed: Vec<(usize, RingElem)> = Vec::new();
    for (n, (negative, term)) in signed_terms(s)?.into_iter().enumerate() {
        let body = term
            .strip_suffix("^2")
            .ok_or_else(|| Error::Parse(format!("term {term:?} must end in ^2")))?;
        let (coef, var) = match body.rfind('*') {
            Some(i) => (&body[..i], &body[i + 1..]),
            None => ("1", body),
        };
        let index = match var.strip_prefix('x') {
            Some("") => n + 1,
            Some(rest) => rest
                .trim_start_matches('_')
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad variable {var:?}")))?,
            None => return Err(Error::Parse(format!("bad variable {var:?}"))),
        };
        let mut c = element(k, coef)?;
        if negative {
            c = k.neg(&c);
        }
        if k.is_zero(&c) {
            return Err(Error::ZeroArgument("form coefficient"));
        }
        if indexed.iter().any(|(i, _)| *i == index) {
            return Err(Error::Parse(format!("x_{index} appears twice")));
        }
        indexed.push((index, c));
    }
    indexed.sort_by_key(|(i, _)| *i);
    let coeffs: Vec<RingElem> = indexed.into_iter().map(|(_, c)| c).collect();
    DiagonalForm::new(k, &coeffs)
}

/// `a..b` (inclusive) or a single integer.
pub fn range(s: &str) -> Result<std::ops::RangeInclusive<u32>> {
    let bad = || Error::Parse(format!("bad range {s:?}; use N or A..B"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a = a.parse().map_err(|_| bad())?;
            let b = b.trim_start_matches('=').parse().map_err(|_| bad())?;
            Ok(a..=b)
        }
        None => {
            let n = s.parse().map_err(|_| bad())?;
            Ok(n..=n)
        }
    }
}
