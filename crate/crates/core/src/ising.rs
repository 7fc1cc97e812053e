//! Weighted Ising models over ±1 spins.
//!
//! An [`IsingModel`] stores the energy function
//! `offset + Σ J_ij x_i x_j` over a set of integer vertex ids. MAX-CUT
//! instances are encoded with `J_ij = -w/2` per edge and `offset = Σ w/2`,
//! so the energy of an assignment is exactly its weighted cut value.
//!
//! Contraction eliminates one vertex through a sign constraint
//! `x_k = s · x_l` and keeps the energy identity exact: the contracted model
//! evaluated at `x'` equals the original model evaluated at the lifted
//! assignment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex identifier.
pub type Vertex = usize;

/// Couplings whose magnitude falls below this value are dropped.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Default vertex cap for [`IsingModel::brute_force_max`].
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsingError {
    #[error("malformed edge ({i}, {j}): {reason}")]
    MalformedEdge {
        i: Vertex,
        j: Vertex,
        reason: String,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid size {0}: a complete graph needs at least 2 vertices")]
    InvalidSize(usize),
    #[error("assignment does not cover vertex {0}")]
    IncompleteAssignment(Vertex),
    #[error("model has {vertices} vertices, above the cap of {cap}")]
    SizeLimit { vertices: usize, cap: usize },
    #[error("invalid contraction: {0}")]
    InvalidContraction(String),
    #[error("inconsistent constraint stack: {0}")]
    InconsistentStack(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// A ±1 value: a spin, or the sign of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Sign of a nonzero real; zero maps to `Plus`.
    pub fn of(value: f64) -> Self {
        if value < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i8(value: i8) -> Option<Self> {
        match value {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// Computational-basis bit: 0 for +1, 1 for -1.
    pub fn bit(self) -> u64 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn from_bit(bit: u64) -> Self {
        if bit & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+1"),
            Sign::Minus => write!(f, "-1"),
        }
    }
}

/// Map from vertex id to spin.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinAssignment(BTreeMap<Vertex, Sign>);

impl SpinAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: Vertex) -> Option<Sign> {
        self.0.get(&v).copied()
    }

    pub fn set(&mut self, v: Vertex, s: Sign) {
        self.0.insert(v, s);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vertex, Sign)> + '_ {
        self.0.iter().map(|(&v, &s)| (v, s))
    }

    /// Every spin flipped.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|(&v, &s)| (v, -s)).collect())
    }

    /// Spins for `register[q]` read from bit `q` of `index` (bit 0 is +1).
    pub fn from_basis_index(register: &[Vertex], index: u64) -> Self {
        Self(
            register
                .iter()
                .enumerate()
                .map(|(q, &v)| (v, Sign::from_bit(index >> q)))
                .collect(),
        )
    }

    /// Inverse of [`SpinAssignment::from_basis_index`].
    pub fn basis_index(&self, register: &[Vertex]) -> Result<u64, IsingError> {
        register.iter().enumerate().try_fold(0u64, |acc, (q, &v)| {
            let s = self.get(v).ok_or(IsingError::IncompleteAssignment(v))?;
            Ok(acc | (s.bit() << q))
        })
    }
}

impl FromIterator<(Vertex, Sign)> for SpinAssignment {
    fn from_iter<I: IntoIterator<Item = (Vertex, Sign)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for SpinAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(v, s)| format!("{v}:{s}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// One elimination `x_eliminated = sign · x_surviving`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub eliminated: Vertex,
    pub surviving: Vertex,
    pub sign: Sign,
}

impl ConstraintRecord {
    pub fn new(eliminated: Vertex, surviving: Vertex, sign: Sign) -> Result<Self, IsingError> {
        if eliminated == surviving {
            return Err(IsingError::InconsistentStack(format!(
                "vertex {eliminated} cannot be constrained to itself"
            )));
        }
        Ok(Self {
            eliminated,
            surviving,
            sign,
        })
    }
}

/// Eliminations in the order they were made.
///
/// No vertex is eliminated twice, and once eliminated a vertex never shows
/// up again as the surviving side of a later record.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintStack {
    records: Vec<ConstraintRecord>,
}

impl ConstraintStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(
        records: impl IntoIterator<Item = ConstraintRecord>,
    ) -> Result<Self, IsingError> {
        let mut stack = Self::new();
        for r in records {
            stack.push(r)?;
        }
        Ok(stack)
    }

    pub fn push(&mut self, record: ConstraintRecord) -> Result<(), IsingError> {
        if record.eliminated == record.surviving {
            return Err(IsingError::InconsistentStack(format!(
                "vertex {} cannot be constrained to itself",
                record.eliminated
            )));
        }
        for r in &self.records {
            if r.eliminated == record.eliminated {
                return Err(IsingError::InconsistentStack(format!(
                    "vertex {} is eliminated twice",
                    record.eliminated
                )));
            }
            if r.eliminated == record.surviving {
                return Err(IsingError::InconsistentStack(format!(
                    "vertex {} survives after being eliminated",
                    record.surviving
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[ConstraintRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Replays the records in reverse, setting each eliminated spin from its
    /// surviving partner.
    pub fn reconstruct(&self, base: &SpinAssignment) -> Result<SpinAssignment, IsingError> {
        let mut out = base.clone();
        for r in self.records.iter().rev() {
            let s = out.get(r.surviving).ok_or_else(|| {
                IsingError::InconsistentStack(format!(
                    "surviving vertex {} of eliminated vertex {} is unassigned",
                    r.surviving, r.eliminated
                ))
            })?;
            out.set(r.eliminated, r.sign * s);
        }
        Ok(out)
    }
}

fn canonical(i: Vertex, j: Vertex) -> (Vertex, Vertex) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Ising energy function `offset + Σ J_ij x_i x_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelJson", try_from = "ModelJson")]
pub struct IsingModel {
    vertices: BTreeSet<Vertex>,
    couplings: BTreeMap<(Vertex, Vertex), f64>,
    offset: f64,
}

/// Canonical interchange form: sorted vertices, sorted coupling triples.
#[derive(Serialize, Deserialize)]
struct ModelJson {
    vertices: Vec<Vertex>,
    couplings: Vec<(Vertex, Vertex, f64)>,
    offset: f64,
}

impl From<IsingModel> for ModelJson {
    fn from(m: IsingModel) -> Self {
        ModelJson {
            vertices: m.vertices.into_iter().collect(),
            couplings: m
                .couplings
                .into_iter()
                .map(|((i, j), c)| (i, j, c))
                .collect(),
            offset: m.offset,
        }
    }
}

impl TryFrom<ModelJson> for IsingModel {
    type Error = IsingError;

    fn try_from(m: ModelJson) -> Result<Self, IsingError> {
        IsingModel::from_parts(m.vertices, m.couplings, m.offset)
    }
}

impl IsingModel {
    /// Builds a model, summing duplicate pairs and dropping near-zero
    /// couplings. Coupling endpoints must be listed in `vertices`.
    pub fn from_parts(
        vertices: impl IntoIterator<Item = Vertex>,
        couplings: impl IntoIterator<Item = (Vertex, Vertex, f64)>,
        offset: f64,
    ) -> Result<Self, IsingError> {
        let vertices: BTreeSet<Vertex> = vertices.into_iter().collect();
        let mut merged = BTreeMap::new();
        for (i, j, c) in couplings {
            if i == j {
                return Err(IsingError::MalformedEdge {
                    i,
                    j,
                    reason: "self-loop".into(),
                });
            }
            if !c.is_finite() {
                return Err(IsingError::MalformedEdge {
                    i,
                    j,
                    reason: format!("non-finite coefficient {c}"),
                });
            }
            for v in [i, j] {
                if !vertices.contains(&v) {
                    return Err(IsingError::InvalidModel(format!(
                        "coupling ({i}, {j}) references unknown vertex {v}"
                    )));
                }
            }
            *merged.entry(canonical(i, j)).or_insert(0.0) += c;
        }
        if !offset.is_finite() {
            return Err(IsingError::InvalidModel(format!(
                "non-finite offset {offset}"
            )));
        }
        merged.retain(|_, c: &mut f64| c.abs() >= ZERO_TOLERANCE);
        Ok(Self {
            vertices,
            couplings: merged,
            offset,
        })
    }

    /// MAX-CUT cost `Σ w/2 (1 - x_i x_j)` for a weighted edge list.
    ///
    /// Duplicate edges merge by weight summation. The offset is summed over
    /// the merged couplings in canonical order, which makes edge-list
    /// round-trips bit-exact.
    pub fn maxcut(edges: &[(Vertex, Vertex, f64)]) -> Result<Self, IsingError> {
        let mut vertices = BTreeSet::new();
        let mut weights: BTreeMap<(Vertex, Vertex), f64> = BTreeMap::new();
        for &(i, j, w) in edges {
            if i == j {
                return Err(IsingError::MalformedEdge {
                    i,
                    j,
                    reason: "self-loop".into(),
                });
            }
            if !w.is_finite() {
                return Err(IsingError::MalformedEdge {
                    i,
                    j,
                    reason: format!("non-finite weight {w}"),
                });
            }
            vertices.insert(i);
            vertices.insert(j);
            *weights.entry(canonical(i, j)).or_insert(0.0) += w;
        }
        let couplings: BTreeMap<_, _> = weights
            .into_iter()
            .map(|(k, w)| (k, -w / 2.0))
            .filter(|(_, c)| c.abs() >= ZERO_TOLERANCE)
            .collect();
        let offset = couplings.values().map(|c| -c).sum();
        Ok(Self {
            vertices,
            couplings,
            offset,
        })
    }

    /// Unit-weight MAX-CUT model on the complete graph `K_m`, vertices `0..m`.
    pub fn complete(m: usize) -> Result<Self, IsingError> {
        if m < 2 {
            return Err(IsingError::InvalidSize(m));
        }
        let edges: Vec<_> = (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j, 1.0)))
            .collect();
        Self::maxcut(&edges)
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = Vertex> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    /// Couplings in canonical `(i < j)` order.
    pub fn couplings(&self) -> impl ExactSizeIterator<Item = ((Vertex, Vertex), f64)> + '_ {
        self.couplings.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coupling_count(&self) -> usize {
        self.couplings.len()
    }

    pub fn coupling(&self, i: Vertex, j: Vertex) -> f64 {
        self.couplings.get(&canonical(i, j)).copied().unwrap_or(0.0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Vertices touched by at least one coupling.
    pub fn active_vertices(&self) -> BTreeSet<Vertex> {
        self.couplings.keys().flat_map(|&(i, j)| [i, j]).collect()
    }

    /// The same energy function restricted to the active vertices.
    pub fn without_isolated(&self) -> Self {
        Self {
            vertices: self.active_vertices(),
            couplings: self.couplings.clone(),
            offset: self.offset,
        }
    }

    /// Vertices in ascending order, the register layout used by simulators.
    pub fn register(&self) -> Vec<Vertex> {
        self.vertices.iter().copied().collect()
    }

    pub fn energy(&self, x: &SpinAssignment) -> Result<f64, IsingError> {
        if let Some(v) = self.vertices.iter().find(|&&v| x.get(v).is_none()) {
            return Err(IsingError::IncompleteAssignment(*v));
        }
        let mut e = self.offset;
        for (&(i, j), &c) in &self.couplings {
            // both present: checked above
            e += c * (x.get(i).unwrap() * x.get(j).unwrap()).value();
        }
        Ok(e)
    }

    /// Eliminates `k` through `x_k = sign · x_l`.
    ///
    /// Couplings `(i, k)` move to `(i, l)` scaled by `sign` and merge into
    /// any existing `(i, l)`; the `(k, l)` coupling becomes the constant
    /// `sign · J_kl`. Vertices left without couplings stay in the model.
    pub fn contract(
        &self,
        k: Vertex,
        l: Vertex,
        sign: Sign,
    ) -> Result<(IsingModel, ConstraintRecord), IsingError> {
        if k == l {
            return Err(IsingError::InvalidContraction(format!(
                "cannot contract vertex {k} into itself"
            )));
        }
        for v in [k, l] {
            if !self.contains(v) {
                return Err(IsingError::InvalidContraction(format!(
                    "vertex {v} is not in the model"
                )));
            }
        }
        let s = sign.value();
        let mut offset = self.offset;
        let mut couplings: BTreeMap<(Vertex, Vertex), f64> = BTreeMap::new();
        for (&(a, b), &c) in &self.couplings {
            if a == k || b == k {
                let other = if a == k { b } else { a };
                if other == l {
                    offset += s * c;
                } else {
                    *couplings.entry(canonical(other, l)).or_insert(0.0) += s * c;
                }
            } else {
                *couplings.entry((a, b)).or_insert(0.0) += c;
            }
        }
        couplings.retain(|_, c| c.abs() >= ZERO_TOLERANCE);
        let mut vertices = self.vertices.clone();
        vertices.remove(&k);
        let record = ConstraintRecord {
            eliminated: k,
            surviving: l,
            sign,
        };
        Ok((
            IsingModel {
                vertices,
                couplings,
                offset,
            },
            record,
        ))
    }

    /// Global maximizer by exhaustive search with the default cap.
    pub fn brute_force_max(&self) -> Result<(SpinAssignment, f64), IsingError> {
        self.brute_force_max_with_cap(DEFAULT_BRUTE_FORCE_CAP)
    }

    /// Global maximizer by exhaustive search.
    ///
    /// The first vertex is pinned to +1 (energies are invariant under a
    /// global flip). Ties go to the lexicographically smallest assignment in
    /// vertex order, with +1 ordered before -1.
    pub fn brute_force_max_with_cap(
        &self,
        cap: usize,
    ) -> Result<(SpinAssignment, f64), IsingError> {
        let n = self.vertex_count();
        if n > cap || n > 63 {
            return Err(IsingError::SizeLimit {
                vertices: n,
                cap: cap.min(63),
            });
        }
        let register = self.register();
        if n == 0 {
            return Ok((SpinAssignment::new(), self.offset));
        }
        let dense = DenseCouplings::new(self, &register);
        let free = n - 1;
        let chunk_bits = free.min(6);
        let inner_bits = free - chunk_bits;
        let scale = 1.0 + dense.abs_sum();
        let tol = 1e-9 * scale;
        let best = (0u64..1 << chunk_bits)
            .into_par_iter()
            .map(|chunk| dense.scan_chunk(chunk << (1 + inner_bits), inner_bits, tol))
            .collect::<Vec<_>>()
            .into_iter()
            .reduce(|a, b| better(a, b, n, tol))
            .expect("at least one chunk");
        let x = SpinAssignment::from_basis_index(&register, best.1);
        let value = self.energy(&x)?;
        Ok((x, value))
    }
}

/// Lexicographic key of a basis index: position 0 is most significant.
fn lex_key(index: u64, n: usize) -> u64 {
    index.reverse_bits() >> (64 - n)
}

fn better(a: (f64, u64), b: (f64, u64), n: usize, tol: f64) -> (f64, u64) {
    let tied = b.0 >= a.0 - tol && lex_key(b.1, n) < lex_key(a.1, n);
    if b.0 > a.0 + tol || tied {
        b
    } else {
        a
    }
}

/// Adjacency form over register positions used by the exhaustive search.
struct DenseCouplings {
    n: usize,
    offset: f64,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl DenseCouplings {
    fn new(model: &IsingModel, register: &[Vertex]) -> Self {
        let pos: BTreeMap<Vertex, usize> =
            register.iter().enumerate().map(|(q, &v)| (v, q)).collect();
        let mut neighbors = vec![Vec::new(); register.len()];
        for ((i, j), c) in model.couplings() {
            let (a, b) = (pos[&i], pos[&j]);
            neighbors[a].push((b, c));
            neighbors[b].push((a, c));
        }
        Self {
            n: register.len(),
            offset: model.offset,
            neighbors,
        }
    }

    fn abs_sum(&self) -> f64 {
        self.neighbors
            .iter()
            .flatten()
            .map(|(_, c)| c.abs())
            .sum::<f64>()
            / 2.0
    }

    /// Gray-code walk over the `inner_bits` positions above position 0, with
    /// the remaining high bits fixed by `base`. Returns (energy, index).
    fn scan_chunk(&self, base: u64, inner_bits: usize, tol: f64) -> (f64, u64) {
        let spin = |idx: u64, q: usize| if (idx >> q) & 1 == 0 { 1.0 } else { -1.0 };
        let mut idx = base;
        // local fields h_q = Σ_j J_qj x_j
        let mut field: Vec<f64> = (0..self.n)
            .map(|q| {
                self.neighbors[q]
                    .iter()
                    .map(|&(j, c)| c * spin(idx, j))
                    .sum()
            })
            .collect();
        let mut energy =
            self.offset + (0..self.n).map(|q| spin(idx, q) * field[q]).sum::<f64>() / 2.0;
        let mut best = (energy, idx);
        for step in 1u64..1 << inner_bits {
            let q = step.trailing_zeros() as usize + 1;
            let old = spin(idx, q);
            energy -= 2.0 * old * field[q];
            for &(j, c) in &self.neighbors[q] {
                field[j] -= 2.0 * c * old;
            }
            idx ^= 1 << q;
            best = better(best, (energy, idx), self.n, tol);
        }
        best
    }
}

/// Parses the edge-list text format into a MAX-CUT model.
///
/// Each non-blank line is `i j [w]` with `w` defaulting to 1; `#` starts a
/// comment.
pub fn parse_edge_list(text: &str) -> Result<IsingModel, IsingError> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(IsingError::Parse {
                line,
                message: format!("expected `i j [w]`, found {} fields", tokens.len()),
            });
        }
        let vertex = |t: &str| {
            t.parse::<Vertex>().map_err(|_| IsingError::Parse {
                line,
                message: format!("invalid vertex id `{t}`"),
            })
        };
        let i = vertex(tokens[0])?;
        let j = vertex(tokens[1])?;
        let w = match tokens.get(2) {
            Some(t) => t
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite())
                .ok_or_else(|| IsingError::Parse {
                    line,
                    message: format!("invalid weight `{t}`"),
                })?,
            None => 1.0,
        };
        if i == j {
            return Err(IsingError::Parse {
                line,
                message: format!("self-loop on vertex {i}"),
            });
        }
        edges.push((i, j, w));
    }
    IsingModel::maxcut(&edges)
}

/// Writes the canonical edge list of a MAX-CUT model (`w = -2 J_ij`).
pub fn serialize_edge_list(model: &IsingModel) -> String {
    let mut out = String::new();
    for ((i, j), c) in model.couplings() {
        out.push_str(&format!("{i} {j} {}\n", -2.0 * c));
    }
    out
}

pub fn to_json(model: &IsingModel) -> String {
    serde_json::to_string(model).expect("model serializes")
}

pub fn from_json(text: &str) -> Result<IsingModel, IsingError> {
    serde_json::from_str(text).map_err(|e| IsingError::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}
