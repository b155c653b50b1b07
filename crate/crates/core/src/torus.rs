//! Twisted tori: `Z^2` modulo the lattice spanned by `(0, alpha)` and
//! `(beta, gamma)`, and the multiplication action of Laurent polynomials on
//! the group algebra `F_q[x^±1, y^±1] / (y^alpha - 1, x^beta y^gamma - 1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fqlinalg::FqMatrix;
use crate::laurent::LaurentPoly;

/// Boundary data `(alpha, beta, gamma)`. `gamma` is stored reduced into
/// `[0, alpha)`; the value as supplied is kept in `gamma_input`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistSpec {
    alpha: u32,
    beta: u32,
    gamma: u32,
    gamma_input: i64,
}

impl TwistSpec {
    pub fn new(alpha: i64, beta: i64, gamma: i64) -> Result<Self> {
        if alpha < 1 || beta < 1 {
            return Err(Error::InvalidTwist(format!(
                "alpha and beta must be positive, got ({alpha}, {beta}, {gamma})"
            )));
        }
        if alpha > u16::MAX as i64 || beta > u16::MAX as i64 {
            return Err(Error::InvalidTwist(format!("torus ({alpha}, {beta}) is too large")));
        }
        Ok(TwistSpec {
            alpha: alpha as u32,
            beta: beta as u32,
            gamma: gamma.rem_euclid(alpha) as u32,
            gamma_input: gamma,
        })
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    /// Twist reduced into `[0, alpha)`.
    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    /// Twist as originally supplied (tables print e.g. `-2`).
    pub fn gamma_input(&self) -> i64 {
        self.gamma_input
    }

    pub fn cell_count(&self) -> usize {
        self.alpha as usize * self.beta as usize
    }

    /// Physical qudits, two per unit cell.
    pub fn num_qudits(&self) -> usize {
        2 * self.cell_count()
    }

    /// Lattice vectors `a1 = (0, alpha)` and `a2 = (beta, gamma)` as printed.
    pub fn lattice_vectors(&self) -> ((i64, i64), (i64, i64)) {
        ((0, self.alpha as i64), (self.beta as i64, self.gamma_input))
    }

    /// Canonical representative of `(m, n)`, using `x^beta = y^-gamma` and
    /// `y^alpha = 1`.
    pub fn canonical_form(&self, m: i64, n: i64) -> CellIndex {
        let beta = self.beta as i64;
        let alpha = self.alpha as i64;
        let s = m.div_euclid(beta);
        let m0 = m.rem_euclid(beta);
        let n0 = (n - s * self.gamma as i64).rem_euclid(alpha);
        CellIndex {
            m: m0 as u32,
            n: n0 as u32,
        }
    }

    pub fn linear_index(&self, c: CellIndex) -> usize {
        c.m as usize * self.alpha as usize + c.n as usize
    }

    pub fn cell(&self, index: usize) -> CellIndex {
        let a = self.alpha as usize;
        CellIndex {
            m: (index / a) as u32,
            n: (index % a) as u32,
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.cell_count()).map(|i| self.cell(i))
    }
}

impl fmt::Display for TwistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(0,{}) ({},{})", self.alpha, self.beta, self.gamma_input)
    }
}

/// A unit cell `(m, n)` of the fundamental domain `0 <= m < beta`,
/// `0 <= n < alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub m: u32,
    pub n: u32,
}

pub fn canonical_form(m: i64, n: i64, t: &TwistSpec) -> CellIndex {
    t.canonical_form(m, n)
}

/// Matrix of multiplication by `p` on the quotient ring; column `c` holds
/// `p * x^m y^n` for the cell `c = (m, n)`.
pub fn mult_matrix(p: &LaurentPoly, t: &TwistSpec) -> FqMatrix {
    let size = t.cell_count();
    let mut out = FqMatrix::zeros(p.field(), size, size);
    for col in 0..size {
        let c = t.cell(col);
        for ((i, j), coeff) in p.terms() {
            let target = t.canonical_form(c.m as i64 + i as i64, c.n as i64 + j as i64);
            out.add_at(t.linear_index(target), col, coeff);
        }
    }
    out
}

/// Checks that the antipode of `p` acts as the transpose of `p`.
pub fn antipode_transpose_check(p: &LaurentPoly, t: &TwistSpec) -> bool {
    mult_matrix(&p.antipode(), t) == mult_matrix(p, t).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::PrimeField;
    use proptest::prelude::*;
    use std::collections::{HashMap, VecDeque};

    /// Independent oracle: flood-fills the orbit of `(m, n)` under the
    /// translations `(0, ±alpha)` and `±(beta, gamma)` inside a window and
    /// returns the member lying in the fundamental domain.
    fn brute_force_class(m: i64, n: i64, alpha: i64, beta: i64, gamma: i64, window: i64) -> (i64, i64) {
        let moves = [(0, alpha), (0, -alpha), (beta, gamma), (-beta, -gamma)];
        let mut seen = HashMap::new();
        let mut queue = VecDeque::from([(m, n)]);
        seen.insert((m, n), ());
        while let Some((a, b)) = queue.pop_front() {
            if (0..beta).contains(&a) && (0..alpha).contains(&b) {
                return (a, b);
            }
            for (da, db) in moves {
                let next = (a + da, b + db);
                if next.0.abs() <= window && next.1.abs() <= window && !seen.contains_key(&next) {
                    seen.insert(next, ());
                    queue.push_back(next);
                }
            }
        }
        panic!("no representative found in window");
    }

    #[test]
    fn canonical_form_examples() {
        let t = TwistSpec::new(3, 3, -2).unwrap();
        assert_eq!(t.gamma(), 1);
        assert_eq!(t.gamma_input(), -2);
        assert_eq!(t.canonical_form(0, 3), CellIndex { m: 0, n: 0 });
        assert_eq!(t.canonical_form(3, 0), CellIndex { m: 0, n: 2 });
        assert_eq!(t.canonical_form(-1, 0), CellIndex { m: 2, n: 1 });
        for (m, n, want) in [(3, 0, (0, 2)), (-1, 0, (2, 1))] {
            assert_eq!(brute_force_class(m, n, 3, 3, -2, 20), want);
        }
    }

    #[test]
    fn canonical_form_matches_orbit_oracle() {
        for (a, b, g) in [(3, 3, -2), (4, 6, -3), (7, 2, -4), (5, 5, 0), (1, 4, 7), (6, 1, 5)] {
            let t = TwistSpec::new(a, b, g).unwrap();
            for m in -7..=7 {
                for n in -7..=7 {
                    let c = t.canonical_form(m, n);
                    assert_eq!((c.m as i64, c.n as i64), brute_force_class(m, n, a, b, g, 20));
                }
            }
        }
    }

    #[test]
    fn rejects_degenerate_tori() {
        assert!(TwistSpec::new(0, 3, 0).is_err());
        assert!(TwistSpec::new(3, -1, 0).is_err());
    }

    #[test]
    fn mult_matrix_examples() {
        let f3 = PrimeField::new(3).unwrap();
        let t = TwistSpec::new(3, 4, 2).unwrap();
        assert_eq!(mult_matrix(&LaurentPoly::one(&f3), &t), FqMatrix::identity(&f3, 12));
        let p = LaurentPoly::parse("x y^-1 + 1 + y^-2", &f3).unwrap();
        let m = mult_matrix(&p, &TwistSpec::new(1, 1, 0).unwrap());
        assert_eq!(m, FqMatrix::zeros(&f3, 1, 1));
    }

    #[test]
    fn antipode_transpose_examples() {
        let f5 = PrimeField::new(5).unwrap();
        assert!(antipode_transpose_check(
            &LaurentPoly::one(&f5),
            &TwistSpec::new(4, 3, 1).unwrap()
        ));
        let x = LaurentPoly::parse("x", &f5).unwrap();
        let t = TwistSpec::new(2, 2, 1).unwrap();
        assert!(antipode_transpose_check(&x, &t));
        // direct comparison: x sends cell (m,n) to (m+1,n); x^-1 is the inverse permutation
        let mx = mult_matrix(&x, &t);
        let mxi = mult_matrix(&x.antipode(), &t);
        assert_eq!(mx.mul(&mxi).unwrap(), FqMatrix::identity(&f5, 4));
    }

    fn arb_poly(q: u64, weight: usize) -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((-3i32..=3, -3i32..=3, 1i64..q as i64), weight)
            .prop_map(move |ts| LaurentPoly::from_terms(&PrimeField::new(q).unwrap(), ts))
    }

    fn arb_twist() -> impl Strategy<Value = TwistSpec> {
        (1i64..6, 1i64..6, -6i64..6).prop_map(|(a, b, g)| TwistSpec::new(a, b, g).unwrap())
    }

    proptest! {
        #[test]
        fn canonical_form_is_constant_on_orbits(t in arb_twist(), m in -20i64..20, n in -20i64..20) {
            let c = t.canonical_form(m, n);
            let (a, b, g) = (t.alpha() as i64, t.beta() as i64, t.gamma_input());
            prop_assert_eq!(t.canonical_form(m + b, n + g), c);
            prop_assert_eq!(t.canonical_form(m, n + a), c);
            prop_assert_eq!(t.canonical_form(c.m as i64, c.n as i64), c);
        }

        #[test]
        fn gamma_only_matters_mod_alpha(a in 1i64..6, b in 1i64..6, g in -6i64..6, p in arb_poly(3, 3)) {
            let t1 = TwistSpec::new(a, b, g).unwrap();
            let t2 = TwistSpec::new(a, b, g + a).unwrap();
            prop_assert_eq!(mult_matrix(&p, &t1), mult_matrix(&p, &t2));
        }

        #[test]
        fn mult_matrix_is_a_ring_homomorphism(f in arb_poly(5, 3), g in arb_poly(5, 2), t in arb_twist()) {
            let mf = mult_matrix(&f, &t);
            let mg = mult_matrix(&g, &t);
            prop_assert_eq!(mult_matrix(&f.mul(&g).unwrap(), &t), mf.mul(&mg).unwrap());
            prop_assert_eq!(mult_matrix(&f.add(&g).unwrap(), &t), mf.add(&mg).unwrap());
        }

        #[test]
        fn antipode_is_transpose(p in arb_poly(7, 3), t in arb_twist()) {
            prop_assert!(antipode_transpose_check(&p, &t));
        }

        #[test]
        fn monomials_act_as_scaled_permutations(i in -4i32..4, j in -4i32..4, c in 1i64..7, t in arb_twist()) {
            let field = PrimeField::new(7).unwrap();
            let m = mult_matrix(&LaurentPoly::from_terms(&field, [(i, j, c)]), &t);
            for r in 0..m.rows() {
                let nz: Vec<_> = m.row(r).iter().filter(|v| !v.is_zero()).collect();
                prop_assert_eq!(nz.len(), 1);
                prop_assert_eq!(nz[0].value() as i64, c);
            }
            prop_assert_eq!(m.rank(), t.cell_count());
        }
    }
}
