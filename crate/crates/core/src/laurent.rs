//! Bivariate Laurent polynomials over `F_q`, i.e. elements of
//! `F_q[x^±1, y^±1]`, together with a parser for the notation used in code
//! tables (`"x y^-1 + 1 + y^-2"`, `"-x^3 - x y^-1 + 1"`, `"3 x^3 + 1"`).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{FieldElement, PrimeField};

/// Exponent pair `(i, j)` standing for the monomial `x^i y^j`.
pub type Exponent = (i32, i32);

/// A finitely supported map `Z^2 -> F_q \ {0}`. Zero coefficients are never
/// stored.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    field: PrimeField,
    terms: BTreeMap<Exponent, FieldElement>,
}

impl LaurentPoly {
    pub fn zero(field: &PrimeField) -> Self {
        LaurentPoly {
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: &PrimeField) -> Self {
        Self::monomial(field, (0, 0), field.one())
    }

    pub fn monomial(field: &PrimeField, exp: Exponent, coeff: FieldElement) -> Self {
        let mut p = Self::zero(field);
        p.add_term(exp, coeff);
        p
    }

    /// Builds a polynomial from `(i, j, c)` triples; `c` is reduced mod `q`
    /// and like terms are combined.
    pub fn from_terms<I>(field: &PrimeField, terms: I) -> Self
    where
        I: IntoIterator<Item = (i32, i32, i64)>,
    {
        let mut p = Self::zero(field);
        for (i, j, c) in terms {
            p.add_term((i, j), field.elem(c));
        }
        p
    }

    pub fn parse(text: &str, field: &PrimeField) -> Result<Self> {
        Parser::new(text, field).parse_poly()
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of nonzero monomials.
    pub fn weight(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: Exponent) -> FieldElement {
        self.terms.get(&exp).copied().unwrap_or(FieldElement::ZERO)
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, FieldElement)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn support(&self) -> impl Iterator<Item = Exponent> + '_ {
        self.terms.keys().copied()
    }

    fn add_term(&mut self, exp: Exponent, coeff: FieldElement) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert(FieldElement::ZERO);
        *entry = self.field.add(*entry, coeff);
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.q(), other.field.q()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(self.field.elem(-1))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        let mut out = Self::zero(&self.field);
        for (&(i1, j1), &c1) in &self.terms {
            for (&(i2, j2), &c2) in &other.terms {
                out.add_term((i1 + i2, j1 + j2), self.field.mul(c1, c2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: FieldElement) -> Self {
        let mut out = Self::zero(&self.field);
        for (e, v) in self.terms() {
            out.add_term(e, self.field.mul(v, c));
        }
        out
    }

    /// Multiplication by the monomial `x^i y^j`.
    pub fn shift(&self, by: Exponent) -> Self {
        LaurentPoly {
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), &c)| ((i + by.0, j + by.1), c))
                .collect(),
        }
    }

    /// The antipode `x^m y^n -> x^-m y^-n`.
    pub fn antipode(&self) -> Self {
        self.map_exponents(|(i, j)| (-i, -j))
    }

    /// Applies an invertible linear change of lattice coordinates to the
    /// exponents.
    pub fn map_exponents(&self, map: impl Fn(Exponent) -> Exponent) -> Self {
        let mut out = Self::zero(&self.field);
        for (e, c) in self.terms() {
            out.add_term(map(e), c);
        }
        out
    }

    /// Componentwise minimum exponent over the support; `None` for zero.
    pub fn min_exponents(&self) -> Option<Exponent> {
        let mut it = self.terms.keys();
        let &(mut a, mut b) = it.next()?;
        for &(i, j) in it {
            a = a.min(i);
            b = b.min(j);
        }
        Some((a, b))
    }

    /// Translation and unit rescaling sending the lexicographically smallest
    /// monomial to the constant `1`.
    pub fn normalized(&self) -> Result<Self> {
        let (&pivot, &lead) = self.terms.iter().next().ok_or(Error::ZeroPolynomial)?;
        let unit = self.field.inv(lead)?;
        Ok(self.shift((-pivot.0, -pivot.1)).scale(unit))
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self.terms.iter().next(), Some((&(0, 0), c)) if c.value() == 1)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (&(i, j), &c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if c.value() != 1 || (i == 0 && j == 0) {
                parts.push(c.value().to_string());
            }
            for (var, e) in [('x', i), ('y', j)] {
                match e {
                    0 => {}
                    1 => parts.push(var.to_string()),
                    _ => parts.push(format!("{var}^{e}")),
                }
            }
            f.write_str(&parts.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly[F_{}]({})", self.field.q(), self)
    }
}

/// A normalized pair `(f, g)` of bulk polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub f: LaurentPoly,
    pub g: LaurentPoly,
    pub normalized: bool,
}

impl AnsatzSpec {
    pub fn new(f: LaurentPoly, g: LaurentPoly) -> Self {
        let normalized = f.is_normalized() && g.is_normalized();
        AnsatzSpec { f, g, normalized }
    }
}

/// Normalizes `f` and `g` independently so that each contains the constant
/// term `1` (pivot: the lexicographically smallest exponent).
pub fn normalize_ansatz(f: &LaurentPoly, g: &LaurentPoly) -> Result<AnsatzSpec> {
    f.check_field(g)?;
    Ok(AnsatzSpec {
        f: f.normalized()?,
        g: g.normalized()?,
        normalized: true,
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    field: &'a PrimeField,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, field: &'a PrimeField) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            field,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn parse_poly(mut self) -> Result<LaurentPoly> {
        let mut poly = LaurentPoly::zero(self.field);
        self.skip_ws();
        let mut negate = false;
        if self.peek() == Some(b'-') {
            negate = true;
            self.pos += 1;
            self.skip_ws();
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
            self.skip_ws();
        }
        loop {
            let (exp, mut coeff) = self.parse_term()?;
            if negate {
                coeff = self.field.neg(coeff);
            }
            poly.add_term(exp, coeff);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => negate = false,
                Some(b'-') => negate = true,
                Some(c) => return self.err(format!("expected '+' or '-', found {:?}", c as char)),
            }
            self.pos += 1;
            self.skip_ws();
        }
        Ok(poly)
    }

    fn parse_term(&mut self) -> Result<(Exponent, FieldElement)> {
        match self.peek() {
            Some(b'0'..=b'9') => {
                let coeff = self.parse_coeff();
                let save = self.pos;
                self.skip_ws();
                let mut star = false;
                if self.peek() == Some(b'*') {
                    star = true;
                    self.pos += 1;
                    self.skip_ws();
                }
                if matches!(self.peek(), Some(b'x' | b'y')) {
                    Ok((self.parse_mono()?, coeff))
                } else if star {
                    self.err("expected 'x' or 'y' after '*'")
                } else {
                    self.pos = save;
                    Ok(((0, 0), coeff))
                }
            }
            Some(b'x' | b'y') => Ok((self.parse_mono()?, self.field.one())),
            Some(c) => self.err(format!("expected a term, found {:?}", c as char)),
            None => self.err("expected a term, found end of input"),
        }
    }

    fn parse_coeff(&mut self) -> FieldElement {
        let q = self.field.q() as u64;
        let mut v = 0u64;
        while let Some(d @ b'0'..=b'9') = self.peek() {
            v = (v * 10 + (d - b'0') as u64) % q;
            self.pos += 1;
        }
        self.field.elem(v as i64)
    }

    fn parse_mono(&mut self) -> Result<Exponent> {
        let mut exp = (0i32, 0i32);
        loop {
            let var = self.peek();
            self.pos += 1;
            let e = self.parse_power()?;
            let slot = if var == Some(b'x') { &mut exp.0 } else { &mut exp.1 };
            *slot = slot.checked_add(e).ok_or_else(|| Error::Syntax {
                offset: self.pos,
                message: "exponent overflow".into(),
            })?;
            let save = self.pos;
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
                self.skip_ws();
                if !matches!(self.peek(), Some(b'x' | b'y')) {
                    return self.err("expected 'x' or 'y' after '*'");
                }
            }
            if !matches!(self.peek(), Some(b'x' | b'y')) {
                self.pos = save;
                return Ok(exp);
            }
        }
    }

    fn parse_power(&mut self) -> Result<i32> {
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        let braced = self.peek() == Some(b'{');
        if braced {
            self.pos += 1;
        }
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == digits {
            return self.err("expected an integer exponent");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let value: i32 = match text.parse() {
            Ok(v) => v,
            Err(_) => {
                self.pos = start;
                return self.err("exponent out of range");
            }
        };
        if braced {
            if self.peek() != Some(b'}') {
                return self.err("expected '}'");
            }
            self.pos += 1;
        }
        Ok(value)
    }
}
