//! The qudit CSS code of a pair `(f, g)` placed on a twisted torus.
//!
//! Qudits are ordered sublattice 1 first, then sublattice 2, each by cell
//! linear index. With `M_p` the multiplication matrix of `p`,
//!
//! ```text
//! HX = [ M_f   | M_g    ]
//! HZ = [ M_g^T | -M_f^T ]
//! ```
//!
//! so `HX HZ^T = M_f M_g - M_g M_f = 0` because the quotient ring is
//! commutative. The minus sign is what makes the two check types commute
//! for odd `q`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fqlinalg::{dot, FqMatrix, Rref};
use crate::gf::{FieldElement, PrimeField};
use crate::laurent::LaurentPoly;
use crate::torus::{mult_matrix, TwistSpec};

/// Which logical sector a vector belongs to. `Z` vectors are Z-type
/// operators: they must commute with the X checks (`HX v = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    X,
    Z,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::Z, Sector::X];

    pub fn other(self) -> Sector {
        match self {
            Sector::X => Sector::Z,
            Sector::Z => Sector::X,
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::X => "X",
            Sector::Z => "Z",
        })
    }
}

/// Serialized description of a code: the unit of CLI input and of search
/// checkpoints. Polynomials use the `laurent` text grammar.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeSpec {
    pub q: u64,
    pub f: String,
    pub g: String,
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
}

impl CodeSpec {
    pub fn field(&self) -> Result<PrimeField> {
        PrimeField::new(self.q)
    }

    pub fn parts(&self) -> Result<(PrimeField, LaurentPoly, LaurentPoly, TwistSpec)> {
        let field = self.field()?;
        let f = LaurentPoly::parse(&self.f, &field)?;
        let g = LaurentPoly::parse(&self.g, &field)?;
        let twist = TwistSpec::new(self.alpha, self.beta, self.gamma)?;
        Ok((field, f, g, twist))
    }

    pub fn build(&self) -> Result<CssCode> {
        let (field, f, g, twist) = self.parts()?;
        build_code(&field, &f, &g, &twist)
    }

    pub fn from_parts(f: &LaurentPoly, g: &LaurentPoly, twist: &TwistSpec) -> Self {
        CodeSpec {
            q: f.field().q() as u64,
            f: f.to_string(),
            g: g.to_string(),
            alpha: twist.alpha() as i64,
            beta: twist.beta() as i64,
            gamma: twist.gamma_input(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CssCode {
    field: PrimeField,
    f: LaurentPoly,
    g: LaurentPoly,
    twist: TwistSpec,
    hx: FqMatrix,
    hz: FqMatrix,
    hx_rref: Rref,
    hz_rref: Rref,
    n: usize,
    k: usize,
}

fn check_inputs(field: &PrimeField, f: &LaurentPoly, g: &LaurentPoly) -> Result<()> {
    for p in [f, g] {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if p.field() != field {
            return Err(Error::FieldMismatch(field.q(), p.field().q()));
        }
    }
    Ok(())
}

pub fn build_code(field: &PrimeField, f: &LaurentPoly, g: &LaurentPoly, twist: &TwistSpec) -> Result<CssCode> {
    check_inputs(field, f, g)?;
    let mf = mult_matrix(f, twist);
    let mg = mult_matrix(g, twist);
    let hx = mf.hstack(&mg)?;
    let hz = mg.transpose().hstack(&mf.transpose().neg())?;
    if !hx.mul(&hz.transpose())?.is_zero() {
        return Err(Error::CssViolation);
    }
    let hx_rref = hx.rref();
    let hz_rref = hz.rref();
    let n = twist.num_qudits();
    let k = n - hx_rref.rank - hz_rref.rank;
    // HX is literally [M_f | M_g], so this is the quotient-module count
    let k_module = 2 * (twist.cell_count() - hx_rref.rank);
    if k != k_module {
        return Err(Error::KFormulaMismatch(k, k_module));
    }
    Ok(CssCode {
        field: field.clone(),
        f: f.clone(),
        g: g.clone(),
        twist: *twist,
        hx,
        hz,
        hx_rref,
        hz_rref,
        n,
        k,
    })
}

/// Logical-qudit count `2 (alpha beta - rank [M_f | M_g])` without
/// assembling `HZ`.
pub fn compute_k(field: &PrimeField, f: &LaurentPoly, g: &LaurentPoly, twist: &TwistSpec) -> Result<usize> {
    check_inputs(field, f, g)?;
    let m = mult_matrix(f, twist).hstack(&mult_matrix(g, twist))?;
    Ok(2 * (twist.cell_count() - m.rank()))
}

impl CssCode {
    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn f(&self) -> &LaurentPoly {
        &self.f
    }

    pub fn g(&self) -> &LaurentPoly {
        &self.g
    }

    pub fn twist(&self) -> &TwistSpec {
        &self.twist
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn hx(&self) -> &FqMatrix {
        &self.hx
    }

    pub fn hz(&self) -> &FqMatrix {
        &self.hz
    }

    pub fn rank_hx(&self) -> usize {
        self.hx_rref.rank
    }

    pub fn rank_hz(&self) -> usize {
        self.hz_rref.rank
    }

    pub fn spec(&self) -> CodeSpec {
        CodeSpec::from_parts(&self.f, &self.g, &self.twist)
    }

    /// Check matrix a sector's logicals must satisfy: `HX` for Z-type
    /// vectors, `HZ` for X-type vectors.
    pub fn checks_for(&self, sector: Sector) -> &FqMatrix {
        match sector {
            Sector::Z => &self.hx,
            Sector::X => &self.hz,
        }
    }

    /// Row-reduced stabilizers of the same type as the sector's vectors.
    pub fn stabilizers_for(&self, sector: Sector) -> &Rref {
        match sector {
            Sector::Z => &self.hz_rref,
            Sector::X => &self.hx_rref,
        }
    }

    pub fn css_condition_holds(&self) -> bool {
        self.hx.mul(&self.hz.transpose()).map(|m| m.is_zero()).unwrap_or(false)
    }

    /// True iff `v` commutes with every check of the opposite type and is not
    /// itself a stabilizer.
    pub fn is_logical(&self, v: &[FieldElement], sector: Sector) -> Result<bool> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let syndrome = self.checks_for(sector).mul_vec(v)?;
        if syndrome.iter().any(|s| !s.is_zero()) {
            return Ok(false);
        }
        Ok(!self.stabilizers_for(sector).in_rowspace(v)?)
    }

    /// `(x_syndrome, z_syndrome)` with `x_syndrome = HZ v_x` and
    /// `z_syndrome = HX v_z`.
    pub fn syndrome(&self, v: &PauliVector) -> Result<(Vec<FieldElement>, Vec<FieldElement>)> {
        self.check_len(v)?;
        Ok((self.hz.mul_vec(&v.x_part)?, self.hx.mul_vec(&v.z_part)?))
    }

    fn check_len(&self, v: &PauliVector) -> Result<()> {
        for part in [&v.x_part, &v.z_part] {
            if part.len() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: part.len(),
                });
            }
        }
        Ok(())
    }

    /// Stabilizer generators as Pauli vectors: rows of HX as X-type, rows of
    /// HZ as Z-type.
    pub fn stabilizer_generators(&self) -> impl Iterator<Item = PauliVector> + '_ {
        let zero = vec![FieldElement::ZERO; self.n];
        let xs = (0..self.hx.rows()).map(move |r| PauliVector::x_type(self.hx.row(r).to_vec(), self.n));
        let zs = (0..self.hz.rows()).map(move |r| PauliVector {
            x_part: zero.clone(),
            z_part: self.hz.row(r).to_vec(),
        });
        xs.chain(zs)
    }
}

/// Exponent data of a Pauli operator, phases dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliVector {
    pub x_part: Vec<FieldElement>,
    pub z_part: Vec<FieldElement>,
}

impl PauliVector {
    pub fn identity(n: usize) -> Self {
        PauliVector {
            x_part: vec![FieldElement::ZERO; n],
            z_part: vec![FieldElement::ZERO; n],
        }
    }

    pub fn x_type(x_part: Vec<FieldElement>, n: usize) -> Self {
        PauliVector {
            x_part,
            z_part: vec![FieldElement::ZERO; n],
        }
    }

    pub fn z_type(z_part: Vec<FieldElement>, n: usize) -> Self {
        PauliVector {
            x_part: vec![FieldElement::ZERO; n],
            z_part,
        }
    }

    /// Number of qudits acted on nontrivially.
    pub fn weight(&self) -> usize {
        self.x_part
            .iter()
            .zip(&self.z_part)
            .filter(|(a, b)| !a.is_zero() || !b.is_zero())
            .count()
    }
}

/// `<u_x, v_z> - <u_z, v_x>`; zero iff the operators commute.
pub fn symplectic_product(field: &PrimeField, u: &PauliVector, v: &PauliVector) -> Result<FieldElement> {
    let n = u.x_part.len();
    for part in [&u.z_part, &v.x_part, &v.z_part] {
        if part.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: part.len(),
            });
        }
    }
    Ok(field.sub(dot(field, &u.x_part, &v.z_part), dot(field, &u.z_part, &v.x_part)))
}
