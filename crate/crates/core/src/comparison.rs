//! Modulo-d arithmetic of the comparison pipeline: one-time-pad style
//! encoding of private digits, TP1's decoding, pairwise differencing and the
//! three-way classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qudit::Dimension;

/// A residue in `[0, d - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModDigit {
    value: usize,
    dim: Dimension,
}

impl ModDigit {
    pub fn new(value: usize, dim: Dimension) -> Result<Self> {
        dim.check_index(value)?;
        Ok(ModDigit { value, dim })
    }

    pub fn value(self) -> usize {
        self.value
    }

    pub fn dim(self) -> Dimension {
        self.dim
    }

    fn same_dim(self, other: ModDigit) -> Result<usize> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim.get(),
                right: other.dim.get(),
            });
        }
        Ok(self.dim.get())
    }
}

impl fmt::Display for ModDigit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A private input digit in `[0, h]`, `h = (d - 1) / 2`.
///
/// Out-of-range values are rejected rather than wrapped: a wrapped digit
/// would compare incorrectly without any visible failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrivateDigit {
    value: usize,
    dim: Dimension,
}

impl PrivateDigit {
    pub fn new(value: usize, dim: Dimension) -> Result<Self> {
        if value > dim.h() {
            return Err(Error::PrivateDigitOutOfRange { value, h: dim.h() });
        }
        Ok(PrivateDigit { value, dim })
    }

    pub fn value(self) -> usize {
        self.value
    }

    pub fn dim(self) -> Dimension {
        self.dim
    }

    pub fn as_mod(self) -> ModDigit {
        ModDigit {
            value: self.value,
            dim: self.dim,
        }
    }
}

/// Outcome of comparing `p_n` against `p_n'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Relation {
    Less = -1,
    Equal = 0,
    Greater = 1,
}

impl Relation {
    pub fn reversed(self) -> Relation {
        match self {
            Relation::Less => Relation::Greater,
            Relation::Equal => Relation::Equal,
            Relation::Greater => Relation::Less,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::Equal => "=",
            Relation::Greater => ">",
        }
    }
}

impl From<Relation> for i8 {
    fn from(r: Relation) -> i8 {
        r as i8
    }
}

impl TryFrom<i8> for Relation {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Relation::Less),
            0 => Ok(Relation::Equal),
            1 => Ok(Relation::Greater),
            other => Err(format!("relation must be -1, 0 or 1, got {other}")),
        }
    }
}

pub fn mod_add(a: ModDigit, b: ModDigit) -> Result<ModDigit> {
    let d = a.same_dim(b)?;
    Ok(ModDigit {
        value: (a.value + b.value) % d,
        dim: a.dim,
    })
}

pub fn mod_sub(a: ModDigit, b: ModDigit) -> Result<ModDigit> {
    let d = a.same_dim(b)?;
    Ok(ModDigit {
        value: (a.value + d - b.value) % d,
        dim: a.dim,
    })
}

/// `c = m + k + p (mod d)`, what a user announces.
pub fn encode(m: ModDigit, k: ModDigit, p: PrivateDigit) -> Result<ModDigit> {
    mod_add(mod_add(m, k)?, p.as_mod())
}

/// `f = c - m (mod d)`, TP1's view with the measurement value removed.
pub fn decode(c: ModDigit, m: ModDigit) -> Result<ModDigit> {
    mod_sub(c, m)
}

/// `R = f_n - f_n' (mod d)`.
pub fn pairwise_difference(f_n: ModDigit, f_other: ModDigit) -> Result<ModDigit> {
    mod_sub(f_n, f_other)
}

/// Greater if `0 < R <= h`, Equal if `R = 0`, Less if `h < R <= 2h`.
pub fn classify(r: ModDigit) -> Relation {
    let h = r.dim.h();
    match r.value {
        0 => Relation::Equal,
        v if v <= h => Relation::Greater,
        _ => Relation::Less,
    }
}

/// Ground truth by integer comparison.
pub fn direct_oracle(p_n: PrivateDigit, p_other: PrivateDigit) -> Relation {
    match p_n.value.cmp(&p_other.value) {
        std::cmp::Ordering::Less => Relation::Less,
        std::cmp::Ordering::Equal => Relation::Equal,
        std::cmp::Ordering::Greater => Relation::Greater,
    }
}

/// Antisymmetric N x N relation table; entry `(a, b)` relates user `a` to
/// user `b` (0-based). The diagonal is `Equal`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<Relation>>", try_from = "Vec<Vec<Relation>>")]
pub struct RelationMatrix {
    users: usize,
    entries: Vec<Relation>,
}

impl RelationMatrix {
    /// Fills the upper triangle from `f(a, b)` and mirrors it.
    pub fn from_upper<F: FnMut(usize, usize) -> Relation>(users: usize, mut f: F) -> Self {
        let mut entries = vec![Relation::Equal; users * users];
        for a in 0..users {
            for b in a + 1..users {
                let r = f(a, b);
                entries[a * users + b] = r;
                entries[b * users + a] = r.reversed();
            }
        }
        RelationMatrix { users, entries }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn get(&self, a: usize, b: usize) -> Relation {
        self.entries[a * self.users + b]
    }

    pub fn rows(&self) -> Vec<Vec<Relation>> {
        self.entries
            .chunks(self.users.max(1))
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.users).all(|a| {
            self.get(a, a) == Relation::Equal
                && (0..self.users).all(|b| self.get(a, b) == self.get(b, a).reversed())
        })
    }

    /// Users grouped into equivalence classes in ascending order, if the
    /// relations are consistent with a total preorder.
    pub fn ordering(&self) -> Option<Vec<Vec<usize>>> {
        let mut order: Vec<usize> = (0..self.users).collect();
        // Rank = number of users strictly below.
        let rank = |a: usize| {
            (0..self.users)
                .filter(|&b| self.get(a, b) == Relation::Greater)
                .count()
        };
        order.sort_by_key(|&a| (rank(a), a));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for a in order {
            match groups.last_mut() {
                Some(g) if self.get(g[0], a) == Relation::Equal => g.push(a),
                _ => groups.push(vec![a]),
            }
        }
        // Verify the grouping reproduces every entry.
        let pos: Vec<usize> = {
            let mut p = vec![0; self.users];
            for (gi, g) in groups.iter().enumerate() {
                for &a in g {
                    p[a] = gi;
                }
            }
            p
        };
        let consistent = (0..self.users).all(|a| {
            (0..self.users).all(|b| {
                let expect = match pos[a].cmp(&pos[b]) {
                    std::cmp::Ordering::Less => Relation::Less,
                    std::cmp::Ordering::Equal => Relation::Equal,
                    std::cmp::Ordering::Greater => Relation::Greater,
                };
                self.get(a, b) == expect
            })
        });
        consistent.then_some(groups)
    }

    /// Human-readable chain such as `p2 < p1 = p3 < p4` (1-based labels).
    pub fn ordering_string(&self) -> Option<String> {
        let groups = self.ordering()?;
        Some(
            groups
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|a| format!("p{}", a + 1))
                        .collect::<Vec<_>>()
                        .join(" = ")
                })
                .collect::<Vec<_>>()
                .join(" < "),
        )
    }
}

impl From<RelationMatrix> for Vec<Vec<Relation>> {
    fn from(m: RelationMatrix) -> Self {
        m.rows()
    }
}

impl TryFrom<Vec<Vec<Relation>>> for RelationMatrix {
    type Error = String;
    fn try_from(rows: Vec<Vec<Relation>>) -> std::result::Result<Self, String> {
        let users = rows.len();
        if rows.iter().any(|r| r.len() != users) {
            return Err("relation matrix must be square".into());
        }
        let m = RelationMatrix {
            users,
            entries: rows.into_iter().flatten().collect(),
        };
        if !m.is_antisymmetric() {
            return Err("relation matrix must be antisymmetric".into());
        }
        Ok(m)
    }
}

/// Every intermediate value of one comparison index, for audit output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonTrace {
    pub c: Vec<usize>,
    pub f: Vec<usize>,
    /// `(n, n', R, y)` for `n < n'`, 1-based user labels.
    pub pairs: Vec<PairTrace>,
    pub relations: RelationMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTrace {
    pub n: usize,
    pub other: usize,
    pub r: usize,
    pub y: Relation,
}

/// Runs encode / decode / difference / classify for all users at one index,
/// keeping the intermediates.
pub fn compare_with_trace(
    m: &[ModDigit],
    k: ModDigit,
    p: &[PrivateDigit],
) -> Result<ComparisonTrace> {
    let c = m
        .iter()
        .zip(p)
        .map(|(&m_n, &p_n)| encode(m_n, k, p_n))
        .collect::<Result<Vec<_>>>()?;
    decode_with_trace(&c, m)
}

/// TP1's half of the pipeline: from announced `c` and own `m` to relations.
pub fn decode_with_trace(c: &[ModDigit], m: &[ModDigit]) -> Result<ComparisonTrace> {
    if c.len() != m.len() {
        return Err(Error::InvalidConfig(format!(
            "{} announcements for {} measurement values",
            c.len(),
            m.len()
        )));
    }
    if c.len() < 2 {
        return Err(Error::TooFewUsers(c.len()));
    }
    let f = c
        .iter()
        .zip(m)
        .map(|(&c_n, &m_n)| decode(c_n, m_n))
        .collect::<Result<Vec<_>>>()?;
    let users = f.len();
    let mut pairs = Vec::with_capacity(users * (users - 1) / 2);
    for a in 0..users {
        for b in a + 1..users {
            let r = pairwise_difference(f[a], f[b])?;
            pairs.push(PairTrace {
                n: a + 1,
                other: b + 1,
                r: r.value(),
                y: classify(r),
            });
        }
    }
    let mut it = pairs.iter();
    let relations = RelationMatrix::from_upper(users, |_, _| {
        it.next().map(|p| p.y).unwrap_or(Relation::Equal)
    });
    Ok(ComparisonTrace {
        c: c.iter().map(|x| x.value()).collect(),
        f: f.iter().map(|x| x.value()).collect(),
        pairs,
        relations,
    })
}

/// Relation matrix for one comparison index.
pub fn compare_pipeline(m: &[ModDigit], k: ModDigit, p: &[PrivateDigit]) -> Result<RelationMatrix> {
    if m.len() != p.len() {
        return Err(Error::InvalidConfig(format!(
            "{} measurement values for {} private digits",
            m.len(),
            p.len()
        )));
    }
    compare_with_trace(m, k, p).map(|t| t.relations)
}

/// Relation matrix of the true private digits.
pub fn oracle_matrix(p: &[PrivateDigit]) -> RelationMatrix {
    RelationMatrix::from_upper(p.len(), |a, b| direct_oracle(p[a], p[b]))
}
