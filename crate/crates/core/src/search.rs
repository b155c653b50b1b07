//! Search over the weight-6 ansatz `f = 1 + l1 m1 + l2 m2`, `g` likewise,
//! on twisted tori, ranked by the figure of merit `k d^2 / n`.
//!
//! Candidates are the product of the (deduplicated) ansatz list with the twist
//! list, numbered `ansatz_index * twists + twist_index`. They are evaluated in
//! fixed-size batches; within a batch the work is spread over the rayon pool
//! but results are collected in index order, and every candidate's distance
//! seed is derived from the search seed and its index. The leaderboard is
//! therefore a function of the configuration alone.
//!
//! The checkpoint is a JSON-lines file: a header, then one [`CandidateRecord`]
//! per line for every candidate that received a distance estimate, with a
//! progress marker after each batch. Resuming discards anything written after
//! the last marker.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::csscode::{build_code, compute_k, CodeSpec};
use crate::distance::estimate_distance;
use crate::error::{Error, Result};
use crate::gf::{is_prime, PrimeField};
use crate::groebner::to_condition;
use crate::laurent::{AnsatzSpec, Exponent, LaurentPoly};
use crate::torus::TwistSpec;

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

/// Which tori to place every ansatz on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TwistSet {
    /// Explicit `(alpha, beta, gamma)` triples.
    Explicit { twists: Vec<[i64; 3]> },
    /// Every torus with `n = 2 alpha beta` in the range and `gamma` in
    /// `[0, alpha)`.
    NRange { n_min: usize, n_max: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub q: u64,
    /// Bound `E` on the absolute value of every exponent.
    pub exponent_bound: i32,
    /// Allowed coefficients `l1, l2`; all of `F_q^x` when absent.
    #[serde(default)]
    pub coefficients: Option<Vec<u64>>,
    /// Fixed `(f, g)` pairs to use instead of enumerating the ansatz.
    #[serde(default)]
    pub pinned: Option<Vec<[String; 2]>>,
    pub twist_set: TwistSet,
    #[serde(default)]
    pub k_target: Option<usize>,
    pub trials_screen: u64,
    pub trials_final: u64,
    pub seed: u64,
    /// Screened candidates with at least this merit are re-estimated with
    /// `trials_final` information sets.
    #[serde(default)]
    pub merit_floor: f64,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    /// Run the topological-order check on finalized candidates.
    #[serde(default)]
    pub check_to: bool,
    /// Candidates per checkpoint batch.
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
}

fn default_top_n() -> usize {
    5
}

fn default_batch_size() -> usize {
    256
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            q: 3,
            exponent_bound: 3,
            coefficients: None,
            pinned: None,
            twist_set: TwistSet::NRange { n_min: 2, n_max: 72 },
            k_target: None,
            trials_screen: 2000,
            trials_final: 50_000,
            seed: 0,
            merit_floor: 0.0,
            top_n: default_top_n(),
            check_to: false,
            batch_size: default_batch_size(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !is_prime(self.q) || self.q > u16::MAX as u64 {
            return Err(Error::NotPrime(self.q));
        }
        if self.exponent_bound < 1 {
            return bad(format!(
                "exponent bound must be at least 1, got {}",
                self.exponent_bound
            ));
        }
        if self.trials_screen > self.trials_final {
            return bad(format!(
                "trials_screen ({}) exceeds trials_final ({})",
                self.trials_screen, self.trials_final
            ));
        }
        if self.top_n == 0 || self.batch_size == 0 {
            return bad("top_n and batch_size must be positive".into());
        }
        if !self.merit_floor.is_finite() {
            return bad("merit_floor must be finite".into());
        }
        if let Some(cs) = &self.coefficients {
            if cs.is_empty() || cs.iter().any(|&c| c % self.q == 0) {
                return bad("coefficients must be a nonempty list of units".into());
            }
        }
        match &self.twist_set {
            TwistSet::Explicit { twists } => {
                for t in twists {
                    TwistSpec::new(t[0], t[1], t[2])?;
                }
            }
            TwistSet::NRange { n_min, n_max } => {
                if n_min > n_max {
                    return bad(format!("empty n range {n_min}..={n_max}"));
                }
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }

    fn field(&self) -> Result<PrimeField> {
        PrimeField::new(self.q)
    }
}

/// The tori of `config` in search order.
pub fn enumerate_twists(config: &SearchConfig) -> Result<Vec<TwistSpec>> {
    match &config.twist_set {
        TwistSet::Explicit { twists } => twists.iter().map(|t| TwistSpec::new(t[0], t[1], t[2])).collect(),
        TwistSet::NRange { n_min, n_max } => {
            let mut out = Vec::new();
            for n in (*n_min).max(2)..=*n_max {
                if n % 2 != 0 {
                    continue;
                }
                let cells = (n / 2) as i64;
                for alpha in (1..=cells).filter(|a| cells % a == 0) {
                    for gamma in 0..alpha {
                        out.push(TwistSpec::new(alpha, cells / alpha, gamma)?);
                    }
                }
            }
            Ok(out)
        }
    }
}

type Lattice = [[i32; 2]; 2];

const IDENTITY: Lattice = [[1, 0], [0, 1]];
const NEGATION: Lattice = [[-1, 0], [0, -1]];

/// The dihedral group generated by `x -> 1/x`, `y -> 1/y` and `x <-> y`.
const DIHEDRAL: [Lattice; 8] = [
    IDENTITY,
    NEGATION,
    [[-1, 0], [0, 1]],
    [[1, 0], [0, -1]],
    [[0, 1], [1, 0]],
    [[0, -1], [-1, 0]],
    [[0, -1], [1, 0]],
    [[0, 1], [-1, 0]],
];

/// Lattice maps used for deduplication. With an explicit twist list only
/// the antipode (which fixes every torus) is safe; over a full `n` range the
/// other maps just permute the tori of each size.
fn lattice_group(config: &SearchConfig) -> &'static [Lattice] {
    match config.twist_set {
        TwistSet::Explicit { .. } => &DIHEDRAL[..2],
        TwistSet::NRange { .. } => &DIHEDRAL,
    }
}

fn apply(m: &Lattice, p: &LaurentPoly) -> LaurentPoly {
    p.map_exponents(|(i, j)| (m[0][0] * i + m[0][1] * j, m[1][0] * i + m[1][1] * j))
}

type TermKey = Vec<(Exponent, u16)>;

fn key(p: &LaurentPoly) -> TermKey {
    let p = p.normalized().expect("ansatz polynomials are nonzero");
    p.terms().map(|(e, c)| (e, c.value())).collect()
}

/// Canonical representative of the orbit of `(f, g)` under translation and
/// scaling of each polynomial, the lattice maps and the swap `f <-> g`.
fn orbit_key(group: &[Lattice], f: &LaurentPoly, g: &LaurentPoly) -> (TermKey, TermKey) {
    let mut best: Option<(TermKey, TermKey)> = None;
    for m in group {
        let (kf, kg) = (key(&apply(m, f)), key(&apply(m, g)));
        for cand in [(kf.clone(), kg.clone()), (kg, kf)] {
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.expect("group is nonempty")
}

/// Every `1 + l1 x^a y^b + l2 x^c y^d` with distinct nonzero exponents in the
/// window, before any deduplication.
pub fn weight3_polynomials(field: &PrimeField, bound: i32, coefficients: &[u64]) -> Vec<LaurentPoly> {
    let mut monomials = Vec::new();
    for i in -bound..=bound {
        for j in -bound..=bound {
            if (i, j) != (0, 0) {
                monomials.push((i, j));
            }
        }
    }
    let mut out = Vec::new();
    for (s, &m1) in monomials.iter().enumerate() {
        for &m2 in &monomials[s + 1..] {
            for &l1 in coefficients {
                for &l2 in coefficients {
                    out.push(LaurentPoly::from_terms(
                        field,
                        [(0, 0, 1), (m1.0, m1.1, l1 as i64), (m2.0, m2.1, l2 as i64)],
                    ));
                }
            }
        }
    }
    out
}

fn coefficient_list(config: &SearchConfig, field: &PrimeField) -> Vec<u64> {
    match &config.coefficients {
        Some(cs) => {
            let mut cs: Vec<u64> = cs.iter().map(|c| c % config.q).collect();
            cs.sort_unstable();
            cs.dedup();
            cs
        }
        None => field.units().map(|u| u.value() as u64).collect(),
    }
}

/// The ansatz list of `config`: the pinned pairs if given, otherwise all
/// weight-3 pairs with one representative per symmetry orbit, in
/// enumeration order.
pub fn enumerate_ansatz(config: &SearchConfig) -> Result<Vec<AnsatzSpec>> {
    config.validate()?;
    let field = config.field()?;
    if let Some(pinned) = &config.pinned {
        return pinned
            .iter()
            .map(|[f, g]| {
                let f = LaurentPoly::parse(f, &field)?;
                let g = LaurentPoly::parse(g, &field)?;
                if f.is_zero() || g.is_zero() {
                    return Err(Error::ZeroPolynomial);
                }
                Ok(AnsatzSpec::new(f, g))
            })
            .collect();
    }
    let polys = weight3_polynomials(&field, config.exponent_bound, &coefficient_list(config, &field));
    let group = lattice_group(config);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for f in &polys {
        for g in &polys {
            if seen.insert(orbit_key(group, f, g)) {
                out.push(AnsatzSpec::new(f.clone(), g.clone()));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateStatus {
    Screened,
    Finalized,
    ToVerified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToCheck {
    Holds,
    Fails,
    /// The Groebner computation hit its budget.
    Unknown,
}

/// One evaluated candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub index: u64,
    pub spec: CodeSpec,
    pub n: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_upper: Option<usize>,
    /// `k d^2 / n` in lowest terms.
    pub merit_num: u64,
    pub merit_den: u64,
    pub merit: f64,
    /// Information sets per sector behind `d_upper`.
    pub trials: u64,
    pub seed: u64,
    pub status: CandidateStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_condition: Option<ToCheck>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `k d^2 / n` as a reduced fraction.
pub fn merit_fraction(n: usize, k: usize, d: usize) -> (u64, u64) {
    let (num, den) = ((k * d * d) as u64, n.max(1) as u64);
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

impl CandidateRecord {
    fn set_distance(&mut self, d: Option<usize>) {
        self.d_upper = d;
        let (num, den) = merit_fraction(self.n, self.k, d.unwrap_or(0));
        self.merit_num = num;
        self.merit_den = den;
        self.merit = num as f64 / den as f64;
    }

    /// True when the stored merit equals `k d^2 / n` of the stored fields.
    pub fn merit_consistent(&self) -> bool {
        let (num, den) = merit_fraction(self.n, self.k, self.d_upper.unwrap_or(0));
        num == self.merit_num && den == self.merit_den && (self.merit - num as f64 / den as f64).abs() < 1e-12
    }

    fn cmp_merit(&self, other: &Self) -> Ordering {
        let lhs = self.merit_num as u128 * other.merit_den as u128;
        let rhs = other.merit_num as u128 * self.merit_den as u128;
        lhs.cmp(&rhs)
    }

    pub fn label(&self) -> String {
        match self.d_upper {
            Some(d) => format!("[[{},{},{}]]_{}", self.n, self.k, d, self.spec.q),
            None => format!("[[{},{},?]]_{}", self.n, self.k, self.spec.q),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Distance seed of candidate `index`.
pub fn candidate_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Evaluates one ansatz on one torus. Never fails because of the
/// topological-order check; a budget overrun there is recorded as
/// [`ToCheck::Unknown`].
pub fn evaluate_candidate(
    ansatz: &AnsatzSpec,
    twist: &TwistSpec,
    config: &SearchConfig,
    index: u64,
) -> Result<CandidateRecord> {
    let field = ansatz.f.field().clone();
    let k = compute_k(&field, &ansatz.f, &ansatz.g, twist)?;
    let mut record = CandidateRecord {
        index,
        spec: CodeSpec::from_parts(&ansatz.f, &ansatz.g, twist),
        n: twist.num_qudits(),
        k,
        d_upper: None,
        merit_num: 0,
        merit_den: 1,
        merit: 0.0,
        trials: 0,
        seed: candidate_seed(config.seed, index),
        status: CandidateStatus::Screened,
        to_condition: None,
    };
    if k == 0 || config.k_target.is_some_and(|t| t != k) || config.trials_screen == 0 {
        return Ok(record);
    }
    let code = build_code(&field, &ansatz.f, &ansatz.g, twist)?;
    let screen = estimate_distance(&code, config.trials_screen, record.seed)?;
    record.trials = config.trials_screen;
    record.set_distance(Some(screen.d_upper));
    if record.merit >= config.merit_floor {
        if config.trials_final > config.trials_screen {
            let fin = estimate_distance(&code, config.trials_final, record.seed)?;
            record.trials = config.trials_final;
            record.set_distance(Some(fin.d_upper));
        }
        record.status = CandidateStatus::Finalized;
        if config.check_to {
            let check = match to_condition(&ansatz.f, &ansatz.g) {
                Ok(true) => ToCheck::Holds,
                Ok(false) => ToCheck::Fails,
                Err(Error::ResourceLimit(_)) => ToCheck::Unknown,
                Err(e) => return Err(e),
            };
            if check == ToCheck::Holds {
                record.status = CandidateStatus::ToVerified;
            }
            record.to_condition = Some(check);
        }
    }
    Ok(record)
}

/// Best candidates per `(n, k)`, highest merit first; ties go to the lower
/// candidate index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub top_n: usize,
    pub cells: Vec<LeaderboardCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardCell {
    pub n: usize,
    pub k: usize,
    pub records: Vec<CandidateRecord>,
}

impl Leaderboard {
    pub fn new(top_n: usize) -> Self {
        Leaderboard {
            top_n,
            cells: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Offers a record; those without a distance are ignored.
    pub fn offer(&mut self, record: &CandidateRecord) {
        if record.d_upper.is_none() || record.k == 0 {
            return;
        }
        let pos = match self.cells.binary_search_by(|c| (c.n, c.k).cmp(&(record.n, record.k))) {
            Ok(p) => p,
            Err(p) => {
                self.cells.insert(
                    p,
                    LeaderboardCell {
                        n: record.n,
                        k: record.k,
                        records: Vec::new(),
                    },
                );
                p
            }
        };
        let records = &mut self.cells[pos].records;
        let at = records
            .iter()
            .position(|r| record.cmp_merit(r).then_with(|| r.index.cmp(&record.index)) == Ordering::Greater)
            .unwrap_or(records.len());
        if at < self.top_n {
            records.insert(at, record.clone());
            records.truncate(self.top_n);
        }
    }

    pub fn records(&self) -> impl Iterator<Item = &CandidateRecord> {
        self.cells.iter().flat_map(|c| c.records.iter())
    }

    fn rows(&self) -> Vec<[String; 6]> {
        self.records()
            .map(|r| {
                [
                    r.label(),
                    r.spec.f.clone(),
                    r.spec.g.clone(),
                    format!("(0,{})", r.spec.alpha),
                    format!("({},{})", r.spec.beta, r.spec.gamma),
                    format!("{:.2}", r.merit),
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(LEADERBOARD_COLUMNS).map_err(io)?;
        for row in self.rows() {
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let rows = self.rows();
        let mut widths = LEADERBOARD_COLUMNS.map(|c| c.chars().count());
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let header = LEADERBOARD_COLUMNS.map(String::from);
        for row in std::iter::once(&header).chain(&rows) {
            let line: Vec<String> = row
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (cell, w))| {
                    if i == 5 {
                        format!("{cell:>w$}")
                    } else {
                        format!("{cell:<w$}")
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

pub const LEADERBOARD_COLUMNS: [&str; 6] = ["[[n,k,d]]_q", "f", "g", "a1", "a2", "kd2/n"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgressMarker {
    progress: u64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CheckpointLine {
    Progress(ProgressMarker),
    Record(Box<CandidateRecord>),
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Discard an existing checkpoint that does not match the configuration
    /// instead of refusing to run.
    pub overwrite: bool,
    /// Stop after this many batches (the checkpoint stays resumable).
    pub max_batches: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub leaderboard: Leaderboard,
    pub ansatz_count: usize,
    pub twist_count: usize,
    pub total_candidates: u64,
    /// Candidates evaluated by this call.
    pub evaluated: u64,
    /// Candidates restored from the checkpoint.
    pub resumed: u64,
    pub complete: bool,
}

struct Restored {
    next_index: u64,
    records: Vec<CandidateRecord>,
    /// Byte length of the valid prefix.
    valid_len: u64,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CheckpointCorrupt(msg.into())
}

fn read_checkpoint(path: &Path, header: &CheckpointHeader) -> Result<Option<Restored>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut offset = reader.read_line(&mut line)? as u64;
    if offset == 0 {
        return Ok(None);
    }
    let found: CheckpointHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| corrupt(format!("unreadable header: {e}")))?;
    if !line.ends_with('\n') {
        return Err(corrupt("truncated header"));
    }
    if found != *header {
        return Err(corrupt(format!(
            "header {found:?} does not match this configuration (hash {}, seed {})",
            header.config_hash, header.seed
        )));
    }
    let mut restored = Restored {
        next_index: 0,
        records: Vec::new(),
        valid_len: offset,
    };
    let mut pending = Vec::new();
    loop {
        line.clear();
        let len = reader.read_line(&mut line)? as u64;
        if len == 0 {
            break;
        }
        offset += len;
        let complete = line.ends_with('\n');
        match serde_json::from_str::<CheckpointLine>(line.trim_end()) {
            Ok(_) if !complete => break,
            Ok(CheckpointLine::Record(r)) => {
                let floor = pending
                    .last()
                    .map_or(restored.next_index, |p: &CandidateRecord| p.index + 1);
                if r.index < floor {
                    return Err(corrupt(format!("record {} out of order", r.index)));
                }
                pending.push(*r);
            }
            Ok(CheckpointLine::Progress(m)) => {
                if m.progress < restored.next_index || pending.iter().any(|r| r.index >= m.progress) {
                    return Err(corrupt(format!("inconsistent progress marker {}", m.progress)));
                }
                restored.next_index = m.progress;
                restored.records.append(&mut pending);
                restored.valid_len = offset;
            }
            // a torn final write is expected after a kill
            Err(_) if !complete => break,
            Err(e) => return Err(corrupt(format!("line at byte {}: {e}", offset - len))),
        }
    }
    Ok(Some(restored))
}

fn write_line<T: Serialize>(w: &mut impl Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Runs (or resumes) a search. Without a checkpoint path nothing is
/// persisted.
pub fn run_search(config: &SearchConfig, checkpoint: Option<&Path>, options: &RunOptions) -> Result<SearchOutcome> {
    config.validate()?;
    let ansatz = enumerate_ansatz(config)?;
    let twists = enumerate_twists(config)?;
    let total = ansatz.len() as u64 * twists.len() as u64;
    let header = CheckpointHeader {
        schema_version: CHECKPOINT_SCHEMA_VERSION,
        config_hash: config.hash(),
        seed: config.seed,
    };

    let mut leaderboard = Leaderboard::new(config.top_n);
    let mut next = 0u64;
    let mut resumed = 0u64;
    let mut writer = None;
    if let Some(path) = checkpoint {
        let restored = match read_checkpoint(path, &header) {
            Err(Error::CheckpointCorrupt(_)) if options.overwrite => None,
            other => other?,
        };
        let file = match restored {
            Some(r) => {
                for rec in &r.records {
                    leaderboard.offer(rec);
                }
                next = r.next_index.min(total);
                resumed = next;
                let mut file = OpenOptions::new().write(true).open(path)?;
                file.set_len(r.valid_len)?;
                file.seek(SeekFrom::End(0))?;
                file
            }
            None => {
                let mut file = File::create(path)?;
                write_line(&mut file, &header)?;
                file
            }
        };
        writer = Some(BufWriter::new(file));
    }

    let mut evaluated = 0u64;
    let mut batches = 0u64;
    let nt = twists.len() as u64;
    while next < total {
        if options.max_batches.is_some_and(|m| batches >= m) {
            break;
        }
        let end = (next + config.batch_size as u64).min(total);
        let results: Vec<Result<CandidateRecord>> = (next..end)
            .into_par_iter()
            .map(|i| evaluate_candidate(&ansatz[(i / nt) as usize], &twists[(i % nt) as usize], config, i))
            .collect();
        for rec in results {
            let rec = rec?;
            if rec.d_upper.is_some() {
                leaderboard.offer(&rec);
                if let Some(w) = writer.as_mut() {
                    write_line(w, &rec)?;
                }
            }
        }
        if let Some(w) = writer.as_mut() {
            write_line(w, &ProgressMarker { progress: end })?;
            w.flush()?;
        }
        evaluated += end - next;
        next = end;
        batches += 1;
    }
    Ok(SearchOutcome {
        leaderboard,
        ansatz_count: ansatz.len(),
        twist_count: twists.len(),
        total_candidates: total,
        evaluated,
        resumed,
        complete: next >= total,
    })
}
