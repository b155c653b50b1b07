//! Fixtures shared by the benchmarks.

use qtwist_core::tables::{bundled, TableRow};
use qtwist_core::{CssCode, LaurentPoly, PrimeField};

/// The bundled table row printed as `label` over `F_q`.
pub fn row(label: &str, q: u64) -> TableRow {
    bundled()
        .expect("bundled tables parse")
        .rows
        .into_iter()
        .find(|r| r.label == label && r.q == q)
        .unwrap_or_else(|| panic!("no row {label} over F_{q}"))
}

pub fn code(label: &str, q: u64) -> CssCode {
    row(label, q).spec().build().expect("table rows build")
}

pub fn pair(label: &str, q: u64) -> (LaurentPoly, LaurentPoly) {
    let r = row(label, q);
    let field = PrimeField::new(q).unwrap();
    (
        LaurentPoly::parse(&r.f, &field).unwrap(),
        LaurentPoly::parse(&r.g, &field).unwrap(),
    )
}
