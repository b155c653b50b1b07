//! Buchberger's algorithm over `F_q[v_0, ..., v_{n-1}]` for up to four
//! variables, and the infinite-plane quantities built on it.
//!
//! Laurent polynomials are turned into ordinary polynomials by clearing
//! denominators, and the Laurent ring is recovered by saturating with respect
//! to `xy`: add `1 - t x y` and eliminate `t`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{FieldElement, PrimeField};
use crate::laurent::LaurentPoly;

pub const MAX_VARS: usize = 4;

/// Exponent vector; unused trailing variables stay zero.
pub type Monomial = [u16; MAX_VARS];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonomialOrder {
    /// Graded reverse lexicographic.
    Grevlex,
    /// The first `block` variables are eliminated: compare them by grevlex
    /// first, then the remaining variables by grevlex.
    Elimination { block: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRing {
    field: PrimeField,
    num_vars: usize,
    order: MonomialOrder,
}

impl PolyRing {
    pub fn new(field: &PrimeField, num_vars: usize, order: MonomialOrder) -> Result<Self> {
        if num_vars == 0 || num_vars > MAX_VARS {
            return Err(Error::InvalidConfig(format!(
                "{num_vars} variables; 1 to {MAX_VARS} are supported"
            )));
        }
        if let MonomialOrder::Elimination { block } = order {
            if block == 0 || block >= num_vars {
                return Err(Error::InvalidConfig(format!(
                    "elimination block {block} in {num_vars} variables"
                )));
            }
        }
        Ok(PolyRing {
            field: field.clone(),
            num_vars,
            order,
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self.order {
            MonomialOrder::Grevlex => grevlex(&a[..self.num_vars], &b[..self.num_vars]),
            MonomialOrder::Elimination { block } => grevlex(&a[..block], &b[..block])
                .then_with(|| grevlex(&a[block..self.num_vars], &b[block..self.num_vars])),
        }
    }
}

fn grevlex(a: &[u16], b: &[u16]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().zip(b).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

pub fn degree(m: &Monomial) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

fn divides(a: &Monomial, b: &Monomial) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &Monomial, b: &Monomial) -> Monomial {
    std::array::from_fn(|i| a[i].max(b[i]))
}

fn quotient(b: &Monomial, a: &Monomial) -> Monomial {
    std::array::from_fn(|i| b[i] - a[i])
}

fn product(a: &Monomial, b: &Monomial) -> Monomial {
    std::array::from_fn(|i| a[i] + b[i])
}

/// Polynomial with terms sorted from the leading term down.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: Vec<(Monomial, FieldElement)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    /// Builds a polynomial from exponent/coefficient pairs, combining
    /// repeated monomials.
    pub fn from_terms(ring: &PolyRing, terms: impl IntoIterator<Item = (Monomial, i64)>) -> Self {
        let field = ring.field();
        let mut raw: Vec<(Monomial, FieldElement)> = terms.into_iter().map(|(m, c)| (m, field.elem(c))).collect();
        raw.sort_by(|a, b| ring.cmp(&b.0, &a.0));
        let mut out: Vec<(Monomial, FieldElement)> = Vec::with_capacity(raw.len());
        for (m, c) in raw {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = field.add(*lc, c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, FieldElement)] {
        &self.terms
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|(m, _)| m)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| degree(m)).max().unwrap_or(0)
    }

    /// `self + c * m * other`, merging in the ring order.
    fn add_scaled(&self, ring: &PolyRing, other: &Poly, c: FieldElement, m: &Monomial) -> Poly {
        let field = ring.field();
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = other
            .terms
            .iter()
            .map(|(om, oc)| (product(om, m), field.mul(*oc, c)))
            .peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => match ring.cmp(&x.0, &y.0) {
                    Ordering::Greater => out.push(*a.next().unwrap()),
                    Ordering::Less => out.push(b.next().unwrap()),
                    Ordering::Equal => {
                        let s = field.add(x.1, y.1);
                        if !s.is_zero() {
                            out.push((x.0, s));
                        }
                        a.next();
                        b.next();
                    }
                },
                (Some(_), None) => out.push(*a.next().unwrap()),
                (None, Some(_)) => out.push(b.next().unwrap()),
                (None, None) => break,
            }
        }
        Poly { terms: out }
    }

    pub fn add(&self, ring: &PolyRing, other: &Poly) -> Poly {
        self.add_scaled(ring, other, ring.field().one(), &[0; MAX_VARS])
    }

    pub fn sub(&self, ring: &PolyRing, other: &Poly) -> Poly {
        self.add_scaled(ring, other, ring.field().neg(ring.field().one()), &[0; MAX_VARS])
    }

    pub fn mul(&self, ring: &PolyRing, other: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for (m, c) in &other.terms {
            acc = acc.add_scaled(ring, self, *c, m);
        }
        acc
    }

    /// Scales so the leading coefficient is 1.
    pub fn monic(&self, ring: &PolyRing) -> Poly {
        let Some((_, lc)) = self.terms.first() else {
            return Poly::zero();
        };
        let field = ring.field();
        let inv = field.inv(*lc).expect("leading coefficient is nonzero");
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, field.mul(*c, inv))).collect(),
        }
    }

    /// Moves every exponent `shift` variables to the right.
    fn shifted(&self, ring: &PolyRing, shift: usize) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut out = [0; MAX_VARS];
            out[shift..].copy_from_slice(&m[..MAX_VARS - shift]);
            (out, c.value() as i64)
        });
        Poly::from_terms(ring, terms)
    }

    /// Moves every exponent `shift` variables to the left; the dropped
    /// variables must not occur.
    fn unshifted(&self, ring: &PolyRing, shift: usize) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| {
            debug_assert!(m[..shift].iter().all(|&e| e == 0));
            let mut out = [0; MAX_VARS];
            out[..MAX_VARS - shift].copy_from_slice(&m[shift..]);
            (out, c.value() as i64)
        });
        Poly::from_terms(ring, terms)
    }

    pub fn display<'a>(&'a self, names: &'a [&'a str]) -> impl fmt::Display + 'a {
        PolyDisplay { poly: self, names }
    }
}

struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: &'a [&'a str],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.poly.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let vars: Vec<String> = m
                .iter()
                .zip(self.names)
                .filter(|(e, _)| **e > 0)
                .map(|(e, name)| {
                    if *e == 1 {
                        name.to_string()
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            match (c.value(), vars.is_empty()) {
                (_, true) => write!(f, "{c}")?,
                (1, false) => write!(f, "{}", vars.join(" "))?,
                (_, false) => write!(f, "{c} {}", vars.join(" "))?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Ideal {
    pub ring: PolyRing,
    pub generators: Vec<Poly>,
}

impl Ideal {
    pub fn new(ring: &PolyRing, generators: Vec<Poly>) -> Self {
        Ideal {
            ring: ring.clone(),
            generators: generators.into_iter().filter(|g| !g.is_zero()).collect(),
        }
    }
}

/// Limits beyond which [`buchberger`] gives up with [`Error::ResourceLimit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroebnerBudget {
    pub max_degree: u32,
    pub max_basis: usize,
}

impl Default for GroebnerBudget {
    fn default() -> Self {
        GroebnerBudget {
            max_degree: 60,
            max_basis: 5000,
        }
    }
}

/// Full reduction of `p` by `basis`: no term of the result is divisible by a
/// leading monomial of the basis.
pub fn normal_form(ring: &PolyRing, p: &Poly, basis: &[Poly]) -> Poly {
    let field = ring.field();
    let mut rest = p.clone();
    let mut out = Vec::new();
    while let Some(&(m, c)) = rest.terms.first() {
        let divisor = basis
            .iter()
            .find(|b| b.leading_monomial().is_some_and(|lm| divides(lm, &m)));
        match divisor {
            Some(b) => {
                let (lm, lc) = b.terms[0];
                let factor = field.neg(field.div(c, lc).expect("nonzero leading coefficient"));
                rest = rest.add_scaled(ring, b, factor, &quotient(&m, &lm));
            }
            None => {
                out.push((m, c));
                rest.terms.remove(0);
            }
        }
    }
    Poly { terms: out }
}

fn s_polynomial(ring: &PolyRing, a: &Poly, b: &Poly) -> Poly {
    let field = ring.field();
    let (ma, ca) = a.terms[0];
    let (mb, cb) = b.terms[0];
    let l = lcm(&ma, &mb);
    let left = Poly::zero().add_scaled(ring, a, field.inv(ca).expect("nonzero"), &quotient(&l, &ma));
    left.add_scaled(ring, b, field.neg(field.inv(cb).expect("nonzero")), &quotient(&l, &mb))
}

/// Reduced Groebner basis of `ideal`, sorted by leading monomial, largest
/// first.
pub fn buchberger(ideal: &Ideal) -> Result<Vec<Poly>> {
    buchberger_with_budget(ideal, &GroebnerBudget::default())
}

pub fn buchberger_with_budget(ideal: &Ideal, budget: &GroebnerBudget) -> Result<Vec<Poly>> {
    let ring = &ideal.ring;
    let mut basis: Vec<Poly> = Vec::new();
    for g in &ideal.generators {
        let r = normal_form(ring, g, &basis);
        if !r.is_zero() {
            basis.push(r.monic(ring));
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    let mut done = std::collections::HashSet::new();
    while !pairs.is_empty() {
        // normal selection strategy: smallest lcm first
        let (idx, _) = pairs
            .iter()
            .enumerate()
            .min_by(|(_, &(a, b)), (_, &(c, d))| {
                let l1 = lcm(
                    basis[a].leading_monomial().unwrap(),
                    basis[b].leading_monomial().unwrap(),
                );
                let l2 = lcm(
                    basis[c].leading_monomial().unwrap(),
                    basis[d].leading_monomial().unwrap(),
                );
                ring.cmp(&l1, &l2)
            })
            .expect("nonempty");
        let (i, j) = pairs.swap_remove(idx);
        done.insert((i, j));
        let (li, lj) = (basis[i].terms[0].0, basis[j].terms[0].0);
        let l = lcm(&li, &lj);
        if l == product(&li, &lj) {
            continue;
        }
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && divides(&basis[k].terms[0].0, &l)
                && done.contains(&(i.min(k), i.max(k)))
                && done.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        let r = normal_form(ring, &s_polynomial(ring, &basis[i], &basis[j]), &basis);
        if r.is_zero() {
            continue;
        }
        if r.total_degree() > budget.max_degree {
            return Err(Error::ResourceLimit(format!(
                "basis element of degree {} exceeds the limit {}",
                r.total_degree(),
                budget.max_degree
            )));
        }
        if basis.len() >= budget.max_basis {
            return Err(Error::ResourceLimit(format!(
                "basis exceeds {} polynomials",
                budget.max_basis
            )));
        }
        let new = basis.len();
        basis.push(r.monic(ring));
        for i in 0..new {
            pairs.push((i, new));
        }
    }
    Ok(reduce_basis(ring, basis))
}

fn reduce_basis(ring: &PolyRing, basis: Vec<Poly>) -> Vec<Poly> {
    let mut minimal: Vec<Poly> = Vec::new();
    for (i, p) in basis.iter().enumerate() {
        let lm = p.terms[0].0;
        let redundant = basis.iter().enumerate().any(|(j, q)| {
            let lq = q.terms[0].0;
            j != i && divides(&lq, &lm) && (lq != lm || j < i)
        });
        if !redundant {
            minimal.push(p.clone());
        }
    }
    let mut reduced: Vec<Poly> = (0..minimal.len())
        .map(|i| {
            let others: Vec<Poly> = minimal
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| p.clone())
                .collect();
            let head = Poly {
                terms: vec![minimal[i].terms[0]],
            };
            let tail = Poly {
                terms: minimal[i].terms[1..].to_vec(),
            };
            head.add(ring, &normal_form(ring, &tail, &others)).monic(ring)
        })
        .collect();
    reduced.sort_by(|a, b| ring.cmp(&b.terms[0].0, &a.terms[0].0));
    reduced
}

/// Number of standard monomials of a Groebner basis in two variables, or
/// `None` when the ideal is not zero-dimensional.
fn count_standard_monomials(basis: &[Poly], vars: (usize, usize)) -> Option<usize> {
    let lms: Vec<Monomial> = basis.iter().map(|p| p.terms[0].0).collect();
    if lms.iter().any(|m| degree(m) == 0) {
        return Some(0);
    }
    let pure = |v: usize, w: usize| lms.iter().filter(|m| m[w] == 0).map(|m| m[v]).min();
    let bx = pure(vars.0, vars.1)?;
    let by = pure(vars.1, vars.0)?;
    let mut count = 0;
    for a in 0..bx {
        for b in 0..by {
            let mut m = [0; MAX_VARS];
            m[vars.0] = a;
            m[vars.1] = b;
            if !lms.iter().any(|l| divides(l, &m)) {
                count += 1;
            }
        }
    }
    Some(count)
}

/// Quotient dimension of the Laurent ring by `(f, g)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LaurentDim {
    Finite(usize),
    Infinite,
}

/// Ring `F_q[t, x, y]` eliminating `t`.
fn elimination_ring(field: &PrimeField) -> PolyRing {
    PolyRing::new(field, 3, MonomialOrder::Elimination { block: 1 }).expect("valid ring")
}

fn grevlex_ring(field: &PrimeField) -> PolyRing {
    PolyRing::new(field, 2, MonomialOrder::Grevlex).expect("valid ring")
}

/// `p` with denominators cleared, as a polynomial in `F_q[x, y]`.
pub fn clear_denominators(p: &LaurentPoly, ring: &PolyRing) -> Poly {
    let (mi, mj) = p.min_exponents().unwrap_or((0, 0));
    Poly::from_terms(
        ring,
        p.terms().map(|((i, j), c)| {
            let mut m = [0; MAX_VARS];
            m[0] = (i - mi) as u16;
            m[1] = (j - mj) as u16;
            (m, c.value() as i64)
        }),
    )
}

/// Generators in `F_q[x, y]` of the elimination ideal `(gens) ∩ F_q[x, y]`
/// where `gens` live in `F_q[t, x, y]`. The result is a grevlex Groebner
/// basis.
fn eliminate_t(field: &PrimeField, gens: Vec<Poly>, budget: &GroebnerBudget) -> Result<Vec<Poly>> {
    let ring3 = elimination_ring(field);
    let gb = buchberger_with_budget(&Ideal::new(&ring3, gens), budget)?;
    let ring2 = grevlex_ring(field);
    Ok(gb
        .iter()
        .filter(|p| p.terms.iter().all(|(m, _)| m[0] == 0))
        .map(|p| p.unshifted(&ring2, 1))
        .collect())
}

/// Saturation of the ideal generated by `gens` in `F_q[x, y]` with respect
/// to `xy`, returned as a reduced grevlex Groebner basis.
pub fn saturate_xy(field: &PrimeField, gens: &[Poly], budget: &GroebnerBudget) -> Result<Vec<Poly>> {
    let ring3 = elimination_ring(field);
    let mut lifted: Vec<Poly> = gens.iter().map(|g| g.shifted(&ring3, 1)).collect();
    // 1 - t x y
    lifted.push(Poly::from_terms(&ring3, [([0; MAX_VARS], 1), ([1, 1, 1, 0], -1)]));
    eliminate_t(field, lifted, budget)
}

fn check_pair(f: &LaurentPoly, g: &LaurentPoly) -> Result<()> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if f.field() != g.field() {
        return Err(Error::FieldMismatch(f.field().q(), g.field().q()));
    }
    Ok(())
}

/// `dim_{F_q} F_q[x^±1, y^±1] / (f, g)`.
pub fn laurent_dim(f: &LaurentPoly, g: &LaurentPoly) -> Result<LaurentDim> {
    laurent_dim_with_budget(f, g, &GroebnerBudget::default())
}

pub fn laurent_dim_with_budget(f: &LaurentPoly, g: &LaurentPoly, budget: &GroebnerBudget) -> Result<LaurentDim> {
    check_pair(f, g)?;
    let field = f.field();
    let ring2 = grevlex_ring(field);
    let gens = [clear_denominators(f, &ring2), clear_denominators(g, &ring2)];
    let sat = saturate_xy(field, &gens, budget)?;
    Ok(match count_standard_monomials(&sat, (0, 1)) {
        Some(d) => LaurentDim::Finite(d),
        None => LaurentDim::Infinite,
    })
}

/// `2 dim R/(f, g)`, the largest number of logical qudits any torus can
/// carry; `None` when the quotient is infinite-dimensional.
pub fn k_max(f: &LaurentPoly, g: &LaurentPoly) -> Result<Option<usize>> {
    Ok(match laurent_dim(f, g)? {
        LaurentDim::Finite(d) => Some(2 * d),
        LaurentDim::Infinite => None,
    })
}

/// Whether `(f) ∩ (g) = (fg)` in the Laurent ring.
pub fn to_condition(f: &LaurentPoly, g: &LaurentPoly) -> Result<bool> {
    to_condition_with_budget(f, g, &GroebnerBudget::default())
}

pub fn to_condition_with_budget(f: &LaurentPoly, g: &LaurentPoly, budget: &GroebnerBudget) -> Result<bool> {
    check_pair(f, g)?;
    let field = f.field();
    let ring2 = grevlex_ring(field);
    let ring3 = elimination_ring(field);
    let ft = clear_denominators(f, &ring2);
    let gt = clear_denominators(g, &ring2);

    // (f) ∩ (g) = (t f, (1 - t) g) ∩ F_q[x, y]
    let t = Poly::from_terms(&ring3, [([1, 0, 0, 0], 1)]);
    let one_minus_t = Poly::from_terms(&ring3, [([0; MAX_VARS], 1), ([1, 0, 0, 0], -1)]);
    let gens = vec![
        t.mul(&ring3, &ft.shifted(&ring3, 1)),
        one_minus_t.mul(&ring3, &gt.shifted(&ring3, 1)),
    ];
    let meet = eliminate_t(field, gens, budget)?;

    let meet_sat = saturate_xy(field, &meet, budget)?;
    let prod_sat = saturate_xy(field, &[ft.mul(&ring2, &gt)], budget)?;
    let contained = |a: &[Poly], b: &[Poly]| a.iter().all(|p| normal_form(&ring2, p, b).is_zero());
    Ok(contained(&meet_sat, &prod_sat) && contained(&prod_sat, &meet_sat))
}
