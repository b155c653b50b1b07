//! Distance of a CSS code: randomized information-set upper bounds and an
//! exhaustive oracle for small codes.
//!
//! For a sector with check matrix `H` (`HX` for Z-type vectors), every trial
//! draws a random column order, brings the rows of `H` to reduced echelon
//! form in that order and reads off one codeword of `ker H` per non-pivot
//! column: a 1 on that column and minus the column's entries on the pivots.
//! Those codewords, and pairwise combinations `v_j + lambda v_l`, are kept if
//! they are logical. Logicality is decided with a fixed set of logical
//! representatives `L` of the opposite type: `v` in `ker H` is a stabilizer
//! exactly when it is orthogonal to all of `L`. The `L` rows ride along in
//! the elimination, so after reduction the test is a lookup.
//!
//! Trials are keyed by `(seed, sector, trial index)` and the winner is the
//! minimum of `(weight, trial index)`, so results do not depend on how trials
//! are scheduled across threads and a longer run never does worse than a
//! shorter one with the same seed.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csscode::{CssCode, Sector};
use crate::error::{Error, Result};
use crate::fqlinalg::{weight, FqMatrix};
use crate::gf::{FieldElement, PrimeField};

/// Default enumeration budget of [`brute_force_distance`].
pub const BRUTE_FORCE_BUDGET: u64 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Information sets drawn for each sector.
    pub trials: u64,
    pub seed: u64,
    /// 1 scores single reduced rows, 2 also scores pairs `v_j + lambda v_l`.
    pub depth: u8,
}

impl EstimatorConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        EstimatorConfig { trials, seed, depth: 2 }
    }
}

/// A minimum-weight logical vector found by the estimator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub sector: Sector,
    pub vector: Vec<FieldElement>,
}

impl Witness {
    pub fn weight(&self) -> usize {
        weight(&self.vector)
    }

    /// Re-checks the witness against `code`.
    pub fn verify(&self, code: &CssCode) -> Result<bool> {
        code.is_logical(&self.vector, self.sector)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorEstimate {
    pub sector: Sector,
    pub d_upper: usize,
    /// Index of the first trial reaching `d_upper`.
    pub trial: u64,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub d_upper: usize,
    /// `(dX_upper, dZ_upper)`.
    pub sector_d: (usize, usize),
    /// Information sets per sector.
    pub trials_used: u64,
    pub seed: u64,
    pub depth: u8,
    pub witness: Witness,
}

/// Upper bound on the distance from `num_information_sets` random
/// information sets per sector.
pub fn estimate_distance(code: &CssCode, num_information_sets: u64, seed: u64) -> Result<DistanceEstimate> {
    estimate_distance_with(code, &EstimatorConfig::new(num_information_sets, seed))
}

pub fn estimate_distance_with(code: &CssCode, config: &EstimatorConfig) -> Result<DistanceEstimate> {
    let z = estimate_sector(code, Sector::Z, config)?;
    let x = estimate_sector(code, Sector::X, config)?;
    let best = if x.d_upper < z.d_upper { &x } else { &z };
    Ok(DistanceEstimate {
        d_upper: best.d_upper,
        sector_d: (x.d_upper, z.d_upper),
        trials_used: config.trials,
        seed: config.seed,
        depth: config.depth,
        witness: best.witness.clone(),
    })
}

/// Basis of logical representatives of `sector`: vectors in the kernel of the
/// sector's checks, independent modulo its stabilizers. Has `k` elements.
pub fn logical_representatives(code: &CssCode, sector: Sector) -> Vec<Vec<FieldElement>> {
    let stabilizers = code.stabilizers_for(sector);
    let field = code.field();
    let rank = stabilizers.rank;
    let mut span = FqMatrix::zeros(field, rank, code.n());
    for i in 0..rank {
        span.row_mut(i).copy_from_slice(stabilizers.reduced.row(i));
    }
    let mut span_rref = span.rref();
    let mut reps = Vec::new();
    for v in code.checks_for(sector).kernel_basis() {
        if reps.len() == code.k() {
            break;
        }
        let rem = span_rref.reduce(&v).expect("kernel vectors have length n");
        if rem.iter().all(|x| x.is_zero()) {
            continue;
        }
        reps.push(v);
        span = span
            .vstack(&FqMatrix::from_vectors(field, code.n(), &[rem]).expect("length n"))
            .expect("same width");
        span_rref = span.rref();
    }
    reps
}

/// Per-sector data shared by all trials.
struct SectorSetup {
    checks: FqMatrix,
    duals: FqMatrix,
}

impl SectorSetup {
    fn new(code: &CssCode, sector: Sector) -> Self {
        let field = code.field();
        let rref = code.checks_for(sector).rref();
        let mut checks = FqMatrix::zeros(field, rref.rank, code.n());
        for i in 0..rref.rank {
            checks.row_mut(i).copy_from_slice(rref.reduced.row(i));
        }
        let duals = FqMatrix::from_vectors(field, code.n(), &logical_representatives(code, sector.other()))
            .expect("representatives have length n");
        SectorSetup { checks, duals }
    }
}

fn trial_rng(seed: u64, sector: Sector, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16] = match sector {
        Sector::X => 1,
        Sector::Z => 2,
    };
    ChaCha8Rng::from_seed(key)
}

/// Estimate for one sector.
pub fn estimate_sector(code: &CssCode, sector: Sector, config: &EstimatorConfig) -> Result<SectorEstimate> {
    if code.k() == 0 {
        return Err(Error::NoLogicals);
    }
    if config.trials == 0 {
        return Err(Error::InvalidConfig("at least one information set is required".into()));
    }
    let setup = SectorSetup::new(code, sector);
    let shared_best = AtomicUsize::new(usize::MAX);
    let found = (0..config.trials)
        .into_par_iter()
        .map_init(
            || Scratch::new(&setup, code.field().q()),
            |scratch, t| {
                let bound = shared_best.load(Ordering::Relaxed);
                let (w, v) = scratch.run(code.field(), &setup, sector, config, t, bound)?;
                shared_best.fetch_min(w, Ordering::Relaxed);
                Some((w, t, v))
            },
        )
        .flatten()
        .min_by_key(|(w, t, _)| (*w, *t));
    let (d_upper, trial, vector) = found.expect("a code with k > 0 has a logical on every information set");
    Ok(SectorEstimate {
        sector,
        d_upper,
        trial,
        witness: Witness { sector, vector },
    })
}

/// Buffers reused across the trials run by one worker.
struct Scratch {
    perm: Vec<usize>,
    work: Work,
    pivots: Vec<usize>,
    free: Vec<usize>,
    // per free column: entries on the pivot rows, support bitmask, weight of
    // the codeword, and entries on the dual rows
    values: Vec<u16>,
    masks: Vec<u64>,
    weights: Vec<usize>,
    duals: Vec<u16>,
}

impl Scratch {
    fn new(setup: &SectorSetup, q: u16) -> Self {
        let n = setup.checks.cols();
        Scratch {
            perm: Vec::with_capacity(n),
            work: Work::new(q, setup.checks.rows() + setup.duals.rows(), n),
            pivots: Vec::new(),
            free: Vec::new(),
            values: Vec::new(),
            masks: Vec::new(),
            weights: Vec::new(),
            duals: Vec::new(),
        }
    }

    /// One information set. Returns the lightest logical of weight at most
    /// `bound`, the first one in a fixed scan order.
    fn run(
        &mut self,
        field: &PrimeField,
        setup: &SectorSetup,
        sector: Sector,
        config: &EstimatorConfig,
        trial: u64,
        bound: usize,
    ) -> Option<(usize, Vec<FieldElement>)> {
        let n = setup.checks.cols();
        let r = setup.checks.rows();
        let k = setup.duals.rows();
        self.perm.clear();
        self.perm.extend(0..n);
        self.perm.shuffle(&mut trial_rng(config.seed, sector, trial));

        let rows = (0..r)
            .map(|i| setup.checks.row(i))
            .chain((0..k).map(|i| setup.duals.row(i)));
        for (i, src) in rows.enumerate() {
            let dst = self.work.row_mut(i);
            for (d, &p) in dst.iter_mut().zip(&self.perm) {
                *d = src[p].0;
            }
        }
        self.work.eliminate(r, field, &mut self.pivots);

        let words = r.div_ceil(64).max(1);
        self.free.clear();
        let mut next_pivot = self.pivots.iter().peekable();
        for c in 0..n {
            if next_pivot.peek() == Some(&&c) {
                next_pivot.next();
            } else {
                self.free.push(c);
            }
        }
        let nf = self.free.len();
        self.values.clear();
        self.values.resize(nf * r, 0);
        self.masks.clear();
        self.masks.resize(nf * words, 0);
        self.weights.clear();
        self.duals.clear();
        self.duals.resize(nf * k, 0);
        for (a, &c) in self.free.iter().enumerate() {
            let values = &mut self.values[a * r..(a + 1) * r];
            let mask = &mut self.masks[a * words..(a + 1) * words];
            for (i, v) in values.iter_mut().enumerate() {
                *v = self.work.get(i, c);
                if *v != 0 {
                    mask[i / 64] |= 1 << (i % 64);
                }
            }
            self.weights
                .push(1 + mask.iter().map(|w| w.count_ones() as usize).sum::<usize>());
            for t in 0..k {
                self.duals[a * k + t] = self.work.get(r + t, c);
            }
        }

        let mut best = bound.saturating_add(1);
        let mut choice = None;
        for a in 0..nf {
            if self.weights[a] < best && self.duals[a * k..(a + 1) * k].iter().any(|&d| d != 0) {
                best = self.weights[a];
                choice = Some((a, 0, 0u16));
            }
        }
        if config.depth >= 2 {
            for a in 0..nf {
                for b in a + 1..nf {
                    if best <= 2 {
                        break;
                    }
                    if 2 + self.weights[a].abs_diff(self.weights[b]) >= best {
                        continue;
                    }
                    let (ma, mb) = (
                        &self.masks[a * words..(a + 1) * words],
                        &self.masks[b * words..(b + 1) * words],
                    );
                    let sym: usize = ma.iter().zip(mb).map(|(x, y)| (x ^ y).count_ones() as usize).sum();
                    if 2 + sym >= best {
                        continue;
                    }
                    let (da, db) = (&self.duals[a * k..(a + 1) * k], &self.duals[b * k..(b + 1) * k]);
                    let (va, vb) = (&self.values[a * r..(a + 1) * r], &self.values[b * r..(b + 1) * r]);
                    for lambda in 1..field.q() {
                        let logical = da
                            .iter()
                            .zip(db)
                            .any(|(&x, &y)| field.add_raw(x, field.mul_raw(lambda, y)) != 0);
                        if !logical {
                            continue;
                        }
                        let mut w = 2;
                        for (word, (x, y)) in ma.iter().zip(mb).enumerate() {
                            let mut bits = x | y;
                            while bits != 0 && w < best {
                                let i = word * 64 + bits.trailing_zeros() as usize;
                                bits &= bits - 1;
                                if field.add_raw(va[i], field.mul_raw(lambda, vb[i])) != 0 {
                                    w += 1;
                                }
                            }
                        }
                        if w < best {
                            best = w;
                            choice = Some((a, b, lambda));
                        }
                    }
                }
            }
        }

        let (a, b, lambda) = choice?;
        let mut v = vec![FieldElement::ZERO; n];
        let mut place = |col: usize, scale: u16| {
            let free_col = self.perm[self.free[col]];
            v[free_col] = FieldElement(field.add_raw(v[free_col].0, scale));
            for (i, &p) in self.pivots.iter().enumerate() {
                let t = field.mul_raw(scale, self.values[col * r + i]);
                let at = self.perm[p];
                v[at] = FieldElement(field.sub_raw(v[at].0, t));
            }
        };
        place(a, 1);
        if lambda != 0 {
            place(b, lambda);
        }
        debug_assert_eq!(weight(&v), best);
        Some((best, v))
    }
}

/// Row-major scratch matrix for the per-trial elimination, holding raw
/// residues. For `q <= 13` the update `d + c s` is reduced with a 12-bit
/// multiply-high that stays within `u16` lanes.
struct Work {
    q: u16,
    magic: u16,
    cols: usize,
    data: Vec<u16>,
    pivot_row: Vec<u16>,
}

const WORK_FAST_MAX_Q: u16 = 13;

impl Work {
    fn new(q: u16, rows: usize, cols: usize) -> Self {
        Work {
            q,
            magic: 4096u16.div_ceil(q),
            cols,
            data: vec![0; rows * cols],
            pivot_row: vec![0; cols],
        }
    }

    fn get(&self, r: usize, c: usize) -> u16 {
        self.data[r * self.cols + c]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u16] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Gauss-Jordan on all rows, with pivots taken from the first
    /// `pivot_rows` rows only. Pivot columns are written to `pivots`.
    fn eliminate(&mut self, pivot_rows: usize, field: &PrimeField, pivots: &mut Vec<usize>) {
        let cols = self.cols;
        let rows = self.data.len().checked_div(cols).unwrap_or(0);
        pivots.clear();
        for col in 0..cols {
            let rank = pivots.len();
            if rank == pivot_rows {
                break;
            }
            let Some(p) = (rank..pivot_rows).find(|&i| self.get(i, col) != 0) else {
                continue;
            };
            if p != rank {
                for c in col..cols {
                    self.data.swap(p * cols + c, rank * cols + c);
                }
            }
            let lead = self.get(rank, col);
            if lead != 1 {
                let inv = field.inv(FieldElement(lead)).expect("pivot is nonzero").0;
                for v in &mut self.data[rank * cols + col..(rank + 1) * cols] {
                    *v = field.mul_raw(*v, inv);
                }
            }
            let mut pivot_row = std::mem::take(&mut self.pivot_row);
            pivot_row[col..].copy_from_slice(&self.data[rank * cols + col..(rank + 1) * cols]);
            for i in 0..rows {
                let c = self.data[i * cols + col];
                if i != rank && c != 0 {
                    self.axpy_row(i, &pivot_row[col..], self.q - c, col);
                }
            }
            self.pivot_row = pivot_row;
            pivots.push(col);
        }
    }

    #[inline]
    fn axpy_row(&mut self, row: usize, src: &[u16], c: u16, from: usize) {
        let q = self.q;
        let dst = &mut self.data[row * self.cols + from..(row + 1) * self.cols];
        if q <= WORK_FAST_MAX_Q {
            // t < q^2 and q <= 13 keep t * magic below 2^16 and the quotient exact
            let magic = self.magic;
            for (d, &s) in dst.iter_mut().zip(src) {
                let t = *d + c * s;
                *d = t - ((t * magic) >> 12) * q;
            }
        } else {
            let (q, c) = (q as u32, c as u32);
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = ((*d as u32 + c * s as u32) % q) as u16;
            }
        }
    }
}

/// Exact distance of one sector by enumerating every `F_q`-combination of a
/// kernel basis of the sector's checks, in Gray-code order.
pub fn brute_force_distance(code: &CssCode, sector: Sector) -> Result<usize> {
    brute_force_distance_with_budget(code, sector, BRUTE_FORCE_BUDGET)
}

pub fn brute_force_distance_with_budget(code: &CssCode, sector: Sector, budget: u64) -> Result<usize> {
    if code.k() == 0 {
        return Err(Error::NoLogicals);
    }
    let field = code.field();
    let q = field.q() as u64;
    let basis = code.checks_for(sector).kernel_basis();
    let needed = (q as f64).powi(basis.len() as i32);
    if needed > budget as f64 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let total = q.pow(basis.len() as u32);
    let mut v = vec![FieldElement::ZERO; code.n()];
    let mut best = usize::MAX;
    for step in 1..total {
        // modular Gray code: step s increments digit nu_q(s)
        let mut s = step;
        let mut digit = 0;
        while s % q == 0 {
            s /= q;
            digit += 1;
        }
        field.axpy(&mut v, &basis[digit], field.one());
        let w = weight(&v);
        if w < best && code.is_logical(&v, sector)? {
            best = w;
        }
    }
    Ok(best)
}

/// Exact distance, the minimum over both sectors.
pub fn brute_force_code_distance(code: &CssCode) -> Result<usize> {
    let z = brute_force_distance(code, Sector::Z)?;
    let x = brute_force_distance(code, Sector::X)?;
    Ok(z.min(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csscode::build_code;
    use crate::gf::PrimeField;
    use crate::laurent::LaurentPoly;
    use crate::torus::TwistSpec;

    fn code(q: u64, f: &str, g: &str, a: i64, b: i64, c: i64) -> CssCode {
        let field = PrimeField::new(q).unwrap();
        build_code(
            &field,
            &LaurentPoly::parse(f, &field).unwrap(),
            &LaurentPoly::parse(g, &field).unwrap(),
            &TwistSpec::new(a, b, c).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn toy_code_has_single_qudit_logicals() {
        let c = code(3, "x y^-1 + 1 + y^-2", "x^2 y^2 + x y^-3 + 1", 1, 1, 0);
        assert_eq!(brute_force_distance(&c, Sector::Z).unwrap(), 1);
        assert_eq!(estimate_distance(&c, 10, 1).unwrap().d_upper, 1);
    }

    #[test]
    fn zero_k_is_rejected() {
        let c = code(3, "1", "1", 3, 2, 1);
        assert!(matches!(estimate_distance(&c, 10, 0), Err(Error::NoLogicals)));
        assert!(matches!(brute_force_distance(&c, Sector::X), Err(Error::NoLogicals)));
    }

    #[test]
    fn logical_representatives_count_is_k() {
        let c = code(3, "x y^-1 + 1 + y^-2", "x^2 y^2 + x y^-3 + 1", 3, 3, -2);
        for s in Sector::BOTH {
            let reps = logical_representatives(&c, s);
            assert_eq!(reps.len(), c.k());
            for v in &reps {
                assert!(c.is_logical(v, s).unwrap());
            }
        }
    }

    #[test]
    fn estimator_matches_brute_force_on_small_codes() {
        // The 3x3 twisted torus with the first table pair.
        let c = code(3, "x y^-1 + 1 + y^-2", "x^2 y^2 + x y^-3 + 1", 3, 3, -2);
        let exact = brute_force_code_distance(&c).unwrap();
        let est = estimate_distance(&c, 2000, 5).unwrap();
        assert_eq!(est.d_upper, exact);
        assert!(est.witness.verify(&c).unwrap());
        assert_eq!(est.witness.weight(), est.d_upper);
    }

    #[test]
    fn deterministic_and_monotone() {
        let c = code(5, "1 + x + 2 y", "1 + 3 x^-1 y + y^2", 4, 3, 1);
        if c.k() == 0 {
            return;
        }
        let a = estimate_distance(&c, 300, 9).unwrap();
        let b = estimate_distance(&c, 300, 9).unwrap();
        assert_eq!(a, b);
        let more = estimate_distance(&c, 900, 9).unwrap();
        assert!(more.d_upper <= a.d_upper);
    }

    #[test]
    fn budget_is_enforced() {
        let c = code(7, "1 + x + y", "1 + 2 x + 3 y^-1", 4, 4, 0);
        if c.k() == 0 {
            return;
        }
        assert!(matches!(
            brute_force_distance_with_budget(&c, Sector::Z, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
