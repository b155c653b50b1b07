//! Qudit CSS codes on twisted tori built from bivariate Laurent polynomials.
//!
//! A pair `(f, g)` of Laurent polynomials over a prime field `F_q` defines a
//! translation-invariant CSS pattern with two qudits per unit cell. Placing
//! it on the torus `Z^2 / <(0, alpha), (beta, gamma)>` gives a finite code
//! whose parameters this crate computes:
//!
//! - [`csscode`]: parity-check matrices, exact `n` and `k`;
//! - [`distance`]: randomized information-set upper bounds on `d`, plus an
//!   exhaustive oracle for small codes;
//! - [`groebner`]: infinite-plane quantities (`k_max`, the topological-order
//!   ideal condition);
//! - [`search`]: the weight-6 ansatz search ranked by `k d^2 / n`.

pub mod csscode;
pub mod distance;
pub mod error;
pub mod fqlinalg;
pub mod gf;
pub mod groebner;
pub mod laurent;
pub mod search;
pub mod tables;
pub mod torus;

pub use csscode::{build_code, compute_k, CodeSpec, CssCode, PauliVector, Sector};
pub use distance::{estimate_distance, DistanceEstimate};
pub use error::{Error, Result};
pub use fqlinalg::FqMatrix;
pub use gf::{FieldElement, PrimeField};
pub use laurent::{normalize_ansatz, AnsatzSpec, LaurentPoly};
pub use search::{run_search, CandidateRecord, Leaderboard, SearchConfig};
pub use torus::{CellIndex, TwistSpec};
