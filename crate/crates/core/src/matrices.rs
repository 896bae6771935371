//! Matrix rings over coefficient or group rings.
//!
//! A `RingMatrix` is a square matrix whose entries are group-ring
//! elements; a plain coefficient ring R is handled as R[1] over the
//! trivial group. On top of exact arithmetic this module provides
//! block-upper shapes, the XY=I ⇒ YX=I check, an exact right-inverse
//! solver over F_q[Γ] via the regular representation, one-sided-unit
//! searches, unitriangular inversion by the doubling iteration, and
//! Hensel lifting of inverses mod p to inverses mod p^m.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement, GroupSpec, Payload};
use crate::rings::{CoeffRing, GroupRingElement, RingScalar, ScalarRepr};
use crate::rng::SplitMix64;

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// A d×d matrix over the group ring `ring[group]`. A bare coefficient
/// ring is represented with the trivial group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMatrix {
    ring: CoeffRing,
    group: Group,
    d: usize,
    entries: Vec<GroupRingElement>,
}

impl RingMatrix {
    pub fn new(
        ring: CoeffRing,
        group: Group,
        d: usize,
        entries: Vec<GroupRingElement>,
    ) -> Result<RingMatrix> {
        if entries.len() != d * d {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        for e in &entries {
            if *e.ring() != ring || e.group() != &group {
                return Err(Error::Mismatch);
            }
        }
        Ok(RingMatrix {
            ring,
            group,
            d,
            entries,
        })
    }

    pub fn identity(ring: CoeffRing, group: Group, d: usize) -> RingMatrix {
        RingMatrix::scaled_identity(ring, group, d, 1)
    }

    /// c·I for an integer c (mapped through the canonical map Z → R).
    pub fn scaled_identity(ring: CoeffRing, group: Group, d: usize, c: i64) -> RingMatrix {
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    entries.push(
                        GroupRingElement::scalar(ring.clone(), group.clone(), ring.from_int(c))
                            .expect("scalar"),
                    );
                } else {
                    entries.push(GroupRingElement::zero(ring.clone(), group.clone()));
                }
            }
        }
        RingMatrix {
            ring,
            group,
            d,
            entries,
        }
    }

    pub fn zero(ring: CoeffRing, group: Group, d: usize) -> RingMatrix {
        let entries = vec![GroupRingElement::zero(ring.clone(), group.clone()); d * d];
        RingMatrix {
            ring,
            group,
            d,
            entries,
        }
    }

    /// 1×1 matrix from a single group-ring element.
    pub fn from_element(e: GroupRingElement) -> RingMatrix {
        RingMatrix {
            ring: e.ring().clone(),
            group: e.group().clone(),
            d: 1,
            entries: vec![e],
        }
    }

    /// Matrix over a bare coefficient ring (trivial group).
    pub fn from_scalars(ring: CoeffRing, d: usize, scalars: Vec<RingScalar>) -> Result<RingMatrix> {
        let group = Group::trivial();
        let entries = scalars
            .into_iter()
            .map(|c| GroupRingElement::scalar(ring.clone(), group.clone(), c))
            .collect::<Result<Vec<_>>>()?;
        RingMatrix::new(ring, group, d, entries)
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> &GroupRingElement {
        &self.entries[i * self.d + j]
    }

    pub fn entries(&self) -> &[GroupRingElement] {
        &self.entries
    }

    fn same_ambient(&self, other: &RingMatrix) -> Result<()> {
        if self.ring != other.ring || self.group != other.group || self.d != other.d {
            return Err(Error::Mismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.same_ambient(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(RingMatrix {
            ring: self.ring.clone(),
            group: self.group.clone(),
            d: self.d,
            entries,
        })
    }

    pub fn sub(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.same_ambient(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(RingMatrix {
            ring: self.ring.clone(),
            group: self.group.clone(),
            d: self.d,
            entries,
        })
    }

    pub fn mul(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.same_ambient(other)?;
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = GroupRingElement::zero(self.ring.clone(), self.group.clone());
                for l in 0..d {
                    acc = acc.add(&self.entry(i, l).mul(other.entry(l, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(RingMatrix {
            ring: self.ring.clone(),
            group: self.group.clone(),
            d,
            entries,
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == RingMatrix::identity(self.ring.clone(), self.group.clone(), self.d)
    }

    pub fn map_entries<F>(&self, f: F) -> Result<RingMatrix>
    where
        F: Fn(&GroupRingElement) -> Result<GroupRingElement>,
    {
        let entries = self
            .entries
            .iter()
            .map(&f)
            .collect::<Result<Vec<_>>>()?;
        let first = entries.first().expect("nonempty");
        Ok(RingMatrix {
            ring: first.ring().clone(),
            group: first.group().clone(),
            d: self.d,
            entries,
        })
    }

    /// Row vector times matrix: v·M with v of length d.
    pub fn row_action(&self, v: &[GroupRingElement]) -> Result<Vec<GroupRingElement>> {
        if v.len() != self.d {
            return Err(Error::ShapeMismatch("row length".into()));
        }
        let mut out = Vec::with_capacity(self.d);
        for j in 0..self.d {
            let mut acc = GroupRingElement::zero(self.ring.clone(), self.group.clone());
            for (i, vi) in v.iter().enumerate() {
                acc = acc.add(&vi.mul(self.entry(i, j))?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }
}

impl fmt::Display for RingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.d {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.d {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.entry(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// Block shapes
// ---------------------------------------------------------------------------

/// A partition (d_1, …, d_m) of a matrix dimension into diagonal blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockShape {
    parts: Vec<usize>,
}

impl BlockShape {
    pub fn new(parts: Vec<usize>) -> BlockShape {
        assert!(!parts.is_empty() && parts.iter().all(|&p| p > 0));
        BlockShape { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn max_part(&self) -> usize {
        *self.parts.iter().max().unwrap()
    }

    /// Truncated shape (d_i, …, d_m).
    pub fn tail(&self, i: usize) -> BlockShape {
        BlockShape::new(self.parts[i..].to_vec())
    }

    /// Which block a row/column index belongs to.
    pub fn block_of(&self, index: usize) -> usize {
        let mut acc = 0;
        for (b, &p) in self.parts.iter().enumerate() {
            acc += p;
            if index < acc {
                return b;
            }
        }
        panic!("index out of range");
    }
}

/// True iff all entries strictly below the diagonal blocks are zero.
pub fn is_block_upper(x: &RingMatrix, shape: &BlockShape) -> Result<bool> {
    if shape.total() != x.dim() {
        return Err(Error::ShapeMismatch(format!(
            "shape total {} vs dimension {}",
            shape.total(),
            x.dim()
        )));
    }
    for i in 0..x.dim() {
        for j in 0..x.dim() {
            if shape.block_of(i) > shape.block_of(j) && !x.entry(i, j).is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Direct-finiteness checks
// ---------------------------------------------------------------------------

/// Outcome of checking a one-sided unit pair.
#[derive(Debug, Clone, PartialEq)]
pub enum DfOutcome {
    ConfirmsDF,
    /// YX ≠ I; carries YX as the refutation witness.
    RefutesDF(RingMatrix),
}

/// Given XY = I (checked), evaluates YX. `ConfirmsDF` iff YX = I.
pub fn check_df_pair(x: &RingMatrix, y: &RingMatrix) -> Result<DfOutcome> {
    if !x.mul(y)?.is_identity() {
        return Err(Error::NotOneSidedPair);
    }
    let yx = y.mul(x)?;
    if yx.is_identity() {
        Ok(DfOutcome::ConfirmsDF)
    } else {
        Ok(DfOutcome::RefutesDF(yx))
    }
}

/// Verifies Y is block-upper given XY = I with X block-upper; returns the
/// first violating below-diagonal block position otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockCheck {
    InShape,
    Violation(usize, usize),
}

pub fn block_left_unit_check(
    x: &RingMatrix,
    y: &RingMatrix,
    shape: &BlockShape,
) -> Result<BlockCheck> {
    if !is_block_upper(x, shape)? {
        return Err(Error::ShapeViolation(0, 0));
    }
    if !x.mul(y)?.is_identity() {
        return Err(Error::NotOneSidedPair);
    }
    for i in 0..y.dim() {
        for j in 0..y.dim() {
            let (bi, bj) = (shape.block_of(i), shape.block_of(j));
            if bi > bj && !y.entry(i, j).is_zero() {
                return Ok(BlockCheck::Violation(bi, bj));
            }
        }
    }
    Ok(BlockCheck::InShape)
}

// ---------------------------------------------------------------------------
// Exact right-inverse solver over F_q[Γ]
// ---------------------------------------------------------------------------

/// Elements of Γ allowed in the support of the unknown: the whole group
/// when finite, the exponent box [-w, w]^r for Z and Z^r.
pub fn window_elements(group: &Group, window: i64) -> Result<Vec<GroupElement>> {
    if group.is_finite() {
        return group.enumerate();
    }
    match group.spec() {
        GroupSpec::Cyclic(0) => (-window..=window)
            .map(|k| group.element(Payload::Int(BigInt::from(k))))
            .collect(),
        GroupSpec::FreeAbelian(r) => {
            let mut out = vec![vec![]];
            for _ in 0..*r {
                let mut next = Vec::new();
                for prefix in &out {
                    for k in -window..=window {
                        let mut v: Vec<BigInt> = prefix.clone();
                        v.push(BigInt::from(k));
                        next.push(v);
                    }
                }
                out = next;
            }
            out.into_iter()
                .map(|v| group.element(Payload::Vector(v)))
                .collect()
        }
        _ => Err(Error::UnsupportedGroup(format!("{group}"))),
    }
}

/// Gaussian elimination over a gf field: solves rows·y = rhs exactly;
/// free variables are set to zero; `None` when inconsistent.
fn solve_field_system(
    ring: &CoeffRing,
    mut rows: Vec<Vec<RingScalar>>,
    mut rhs: Vec<RingScalar>,
) -> Option<Vec<RingScalar>> {
    let n_eq = rows.len();
    let n_var = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut pivot_col_of_row = Vec::new();
    let mut row = 0;
    for col in 0..n_var {
        let Some(p) = (row..n_eq).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(row, p);
        rhs.swap(row, p);
        let inv = rows[row][col].inv().expect("field pivot");
        for c in col..n_var {
            rows[row][c] = rows[row][c].mul(&inv).unwrap();
        }
        rhs[row] = rhs[row].mul(&inv).unwrap();
        for r in 0..n_eq {
            if r != row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..n_var {
                    let t = rows[row][c].mul(&factor).unwrap();
                    rows[r][c] = rows[r][c].sub(&t).unwrap();
                }
                let t = rhs[row].mul(&factor).unwrap();
                rhs[r] = rhs[r].sub(&t).unwrap();
            }
        }
        pivot_col_of_row.push(col);
        row += 1;
        if row == n_eq {
            break;
        }
    }
    // Consistency: zero rows must have zero rhs.
    for r in row..n_eq {
        if !rhs[r].is_zero() {
            return None;
        }
    }
    let mut y = vec![ring.zero(); n_var];
    for (r, &col) in pivot_col_of_row.iter().enumerate() {
        y[col] = rhs[r].clone();
    }
    Some(y)
}

/// Solves XY = I for Y over F_q[Γ], exactly, restricting supports of the
/// unknown to `window` for infinite Γ. Returns `None` when no solution
/// exists within the window; for infinite Γ this means "not found
/// (bounded)", never a proof of nonexistence.
pub fn solve_right_inverse(x: &RingMatrix, window: Option<i64>) -> Result<Option<RingMatrix>> {
    let ring = x.ring().clone();
    if !matches!(ring, CoeffRing::Gf(_)) {
        return Err(Error::UnsupportedGroup(
            "right-inverse solving needs gf coefficients".into(),
        ));
    }
    let group = x.group().clone();
    let support: Vec<GroupElement> = if group.is_finite() {
        group.enumerate()?
    } else {
        window_elements(&group, window.ok_or_else(|| {
            Error::UnsupportedGroup("infinite group needs a window".into())
        })?)?
    };
    let d = x.dim();
    // Equation support: identity plus every product supp(X)·candidate.
    let mut eq_support: Vec<GroupElement> = vec![group.identity()];
    for e in x.entries() {
        for (g, _) in e.support() {
            for b in &support {
                let p = group.mul(g, b)?;
                if !eq_support.contains(&p) {
                    eq_support.push(p);
                }
            }
        }
    }
    eq_support.sort_by(|a, b| a.canonical_cmp(b));

    let n_w = support.len();
    let n_h = eq_support.len();
    let mut columns: Vec<Vec<GroupRingElement>> = Vec::with_capacity(d);
    for j in 0..d {
        // Unknowns: y_{l,b} for l in 0..d, b in support.
        let mut rows = Vec::with_capacity(d * n_h);
        let mut rhs = Vec::with_capacity(d * n_h);
        for i in 0..d {
            for h in eq_support.iter() {
                let mut row = vec![ring.zero(); d * n_w];
                for l in 0..d {
                    let xe = x.entry(i, l);
                    for (bi, b) in support.iter().enumerate() {
                        // coefficient of y_{l,b} is x_{il}(h·b^{-1})
                        let a = group.mul(h, &group.inv(b)?)?;
                        let c = xe.coefficient(&a);
                        if !c.is_zero() {
                            row[l * n_w + bi] = c;
                        }
                    }
                }
                rows.push(row);
                let want_one = h.is_identity() && i == j;
                rhs.push(if want_one { ring.one() } else { ring.zero() });
            }
        }
        let Some(sol) = solve_field_system(&ring, rows, rhs) else {
            return Ok(None);
        };
        let mut col = Vec::with_capacity(d);
        for l in 0..d {
            let terms: Vec<(GroupElement, RingScalar)> = support
                .iter()
                .enumerate()
                .map(|(bi, b)| (b.clone(), sol[l * n_w + bi].clone()))
                .collect();
            col.push(GroupRingElement::new(ring.clone(), group.clone(), terms)?);
        }
        columns.push(col);
    }
    let mut entries = Vec::with_capacity(d * d);
    for l in 0..d {
        for j in 0..d {
            entries.push(columns[j][l].clone());
        }
    }
    let y = RingMatrix::new(ring, group, d, entries)?;
    // The linear system encodes XY = I exactly; double-check.
    debug_assert!(x.mul(&y).unwrap().is_identity());
    Ok(Some(y))
}

// ---------------------------------------------------------------------------
// One-sided unit search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum SearchScope {
    /// All ordered pairs of a finite instance.
    Exhaustive,
    /// Seeded uniform sample of ordered pairs of a finite instance.
    Sampled { pairs: u64, seed: u64 },
    /// Infinite Γ: X ranges over supports in the window, Y is solved.
    Windowed { window: i64 },
}

#[derive(Debug, Clone)]
pub struct UnitSearchReport {
    pub ring: String,
    pub d: usize,
    pub scope: SearchScope,
    pub elements_scanned: u64,
    pub pairs_checked: u64,
    pub one_sided_pairs: u64,
    pub witnesses: Vec<(RingMatrix, RingMatrix)>,
    pub exhaustive: bool,
    /// True when the scan was a bounded window into an infinite ring.
    pub bounded: bool,
}

/// Enumerates all matrices of a finite group-ring instance, entries in
/// lexicographic order.
pub fn enumerate_matrices(ring: &CoeffRing, group: &Group, d: usize) -> Result<Vec<RingMatrix>> {
    let elems = GroupRingElement::enumerate_all(ring, group)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; d * d];
    loop {
        let entries: Vec<GroupRingElement> = idx.iter().map(|&i| elems[i].clone()).collect();
        out.push(RingMatrix::new(ring.clone(), group.clone(), d, entries)?);
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn random_matrix(
    ring: &CoeffRing,
    group: &Group,
    d: usize,
    rng: &mut SplitMix64,
) -> RingMatrix {
    let scalars = ring.enumerate().expect("finite ring");
    let elems = group.enumerate().expect("finite group");
    let entries: Vec<GroupRingElement> = (0..d * d)
        .map(|_| {
            let terms: Vec<(GroupElement, RingScalar)> = elems
                .iter()
                .map(|g| {
                    (
                        g.clone(),
                        scalars[rng.below(scalars.len() as u64) as usize].clone(),
                    )
                })
                .collect();
            GroupRingElement::new(ring.clone(), group.clone(), terms).expect("consistent")
        })
        .collect();
    RingMatrix::new(ring.clone(), group.clone(), d, entries).expect("consistent")
}

/// Sweeps pairs (X, Y) in M_d(ring[group]) looking for XY=I with YX≠I.
/// Over the supported instances the expected witness count is zero; any
/// witness indicates a software fault and must be independently
/// re-verified.
pub fn one_sided_unit_search(
    ring: &CoeffRing,
    group: &Group,
    d: usize,
    scope: SearchScope,
    budget: u64,
) -> Result<UnitSearchReport> {
    let name = if group.is_trivial() {
        format!("M_{}({})", d, ring)
    } else {
        format!("M_{}({}[{}])", d, ring, group)
    };
    match scope {
        SearchScope::Exhaustive => {
            let ring_size = ring
                .size()
                .ok_or_else(|| Error::UnsupportedGroup("infinite coefficient ring".into()))?;
            let group_order = group.order().ok_or(Error::InfiniteGroup)?;
            let per_entry = ring_size
                .checked_pow(group_order as u32)
                .ok_or(Error::BudgetExceeded { needed: u64::MAX, budget })?;
            let n = per_entry
                .checked_pow((d * d) as u32)
                .ok_or(Error::BudgetExceeded { needed: u64::MAX, budget })?;
            let pairs = n
                .checked_mul(n)
                .ok_or(Error::BudgetExceeded { needed: u64::MAX, budget })?;
            if pairs > budget {
                return Err(Error::BudgetExceeded { needed: pairs, budget });
            }
            let all = enumerate_matrices(ring, group, d)?;
            let mut report = UnitSearchReport {
                ring: name,
                d,
                scope,
                elements_scanned: n,
                pairs_checked: 0,
                one_sided_pairs: 0,
                witnesses: vec![],
                exhaustive: true,
                bounded: false,
            };
            for x in &all {
                for y in &all {
                    report.pairs_checked += 1;
                    if x.mul(y)?.is_identity() {
                        report.one_sided_pairs += 1;
                        if let DfOutcome::RefutesDF(_) = check_df_pair(x, y)? {
                            report.witnesses.push((x.clone(), y.clone()));
                        }
                    }
                }
            }
            Ok(report)
        }
        SearchScope::Sampled { pairs, seed } => {
            let mut rng = SplitMix64::new(seed);
            let pairs = pairs.min(budget);
            let mut report = UnitSearchReport {
                ring: name,
                d,
                scope,
                elements_scanned: 0,
                pairs_checked: 0,
                one_sided_pairs: 0,
                witnesses: vec![],
                exhaustive: false,
                bounded: false,
            };
            for _ in 0..pairs {
                let x = random_matrix(ring, group, d, &mut rng);
                let y = random_matrix(ring, group, d, &mut rng);
                report.pairs_checked += 1;
                if x.mul(&y)?.is_identity() {
                    report.one_sided_pairs += 1;
                    if let DfOutcome::RefutesDF(_) = check_df_pair(&x, &y)? {
                        report.witnesses.push((x.clone(), y.clone()));
                    }
                }
            }
            report.elements_scanned = report.pairs_checked;
            Ok(report)
        }
        SearchScope::Windowed { window } => {
            if group.is_finite() {
                return Err(Error::UnsupportedGroup(
                    "windowed search is for infinite groups".into(),
                ));
            }
            let support = window_elements(group, window)?;
            let scalars = ring.enumerate()?;
            // X entries supported in the window; enumerate all assignments.
            let per_entry = (scalars.len() as u64)
                .checked_pow(support.len() as u32)
                .ok_or(Error::BudgetExceeded { needed: u64::MAX, budget })?;
            let total = per_entry
                .checked_pow((d * d) as u32)
                .ok_or(Error::BudgetExceeded { needed: u64::MAX, budget })?;
            if total > budget {
                return Err(Error::BudgetExceeded { needed: total, budget });
            }
            let mut report = UnitSearchReport {
                ring: name,
                d,
                scope,
                elements_scanned: total,
                pairs_checked: 0,
                one_sided_pairs: 0,
                witnesses: vec![],
                exhaustive: false,
                bounded: true,
            };
            let mut idx = vec![0usize; d * d * support.len()];
            'outer: loop {
                let entries: Vec<GroupRingElement> = (0..d * d)
                    .map(|e| {
                        let terms: Vec<(GroupElement, RingScalar)> = support
                            .iter()
                            .enumerate()
                            .map(|(si, g)| {
                                (g.clone(), scalars[idx[e * support.len() + si]].clone())
                            })
                            .collect();
                        GroupRingElement::new(ring.clone(), group.clone(), terms)
                            .expect("consistent")
                    })
                    .collect();
                let x = RingMatrix::new(ring.clone(), group.clone(), d, entries)?;
                if let Some(y) = solve_right_inverse(&x, Some(window))? {
                    report.pairs_checked += 1;
                    report.one_sided_pairs += 1;
                    if let DfOutcome::RefutesDF(_) = check_df_pair(&x, &y)? {
                        report.witnesses.push((x, y));
                    }
                }
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        break 'outer;
                    }
                    idx[pos] += 1;
                    if idx[pos] < scalars.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
            Ok(report)
        }
    }
}

// ---------------------------------------------------------------------------
// Unitriangular inversion
// ---------------------------------------------------------------------------

pub fn is_unitriangular(a: &RingMatrix) -> bool {
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let e = a.entry(i, j);
            if i == j && !e.is_one() {
                return false;
            }
            if i > j && !e.is_zero() {
                return false;
            }
        }
    }
    true
}

/// Inverts an upper-unitriangular matrix by the doubling iteration
/// B ← B·(2I − P), P ← P·(2I − P); the strictly-upper defect squares
/// each round, so at most ⌈log₂ D⌉ rounds run. Returns (inverse, rounds).
pub fn unitriangular_inverse(a: &RingMatrix) -> Result<(RingMatrix, u32)> {
    if !is_unitriangular(a) {
        return Err(Error::NotUnitriangular);
    }
    let two_i = RingMatrix::scaled_identity(a.ring().clone(), a.group().clone(), a.dim(), 2);
    let mut b = RingMatrix::identity(a.ring().clone(), a.group().clone(), a.dim());
    let mut p = a.clone();
    let mut rounds = 0u32;
    while !p.is_identity() {
        let factor = two_i.sub(&p)?;
        b = b.mul(&factor)?;
        p = p.mul(&factor)?;
        rounds += 1;
        assert!(rounds <= 64, "doubling iteration must terminate");
    }
    debug_assert!(a.mul(&b)?.is_identity() && b.mul(a)?.is_identity());
    Ok((b, rounds))
}

// ---------------------------------------------------------------------------
// Hensel lifting
// ---------------------------------------------------------------------------

fn reduce_entries_mod(m: &RingMatrix, modulus: &BigInt) -> Result<RingMatrix> {
    m.map_entries(|e| {
        let terms = e
            .support()
            .iter()
            .map(|(g, c)| {
                let ScalarRepr::Int(v) = &c.repr else {
                    unreachable!("integer coefficients")
                };
                let r = v.mod_floor(modulus);
                (
                    g.clone(),
                    RingScalar {
                        ring: CoeffRing::Integers,
                        repr: ScalarRepr::Int(r),
                    },
                )
            })
            .collect();
        GroupRingElement::new(CoeffRing::Integers, e.group().clone(), terms)
    })
}

fn congruent_to_identity_mod(m: &RingMatrix, modulus: &BigInt) -> Result<bool> {
    let i = RingMatrix::identity(m.ring().clone(), m.group().clone(), m.dim());
    let diff = m.sub(&i)?;
    let reduced = reduce_entries_mod(&diff, modulus)?;
    Ok(reduced.entries().iter().all(|e| e.is_zero()))
}

/// Lifts a left inverse mod p to a left inverse mod p^m by the quadratic
/// iteration Z ← (2I − Z·Y)·Z. Entries stay in Z[Γ] with coefficients
/// reduced into [0, p^m); block-upper inputs give block-upper output.
pub fn hensel_lift(zt: &RingMatrix, yt: &RingMatrix, p: u64, m: u32) -> Result<RingMatrix> {
    if *zt.ring() != CoeffRing::Integers || *yt.ring() != CoeffRing::Integers {
        return Err(Error::RingMismatch("hensel_lift needs Z[Γ] matrices".into()));
    }
    let p_big = BigInt::from(p);
    let target = p_big.pow(m);
    if !congruent_to_identity_mod(&zt.mul(yt)?, &p_big)? {
        return Err(Error::NotCongruentModP);
    }
    let two_i = RingMatrix::scaled_identity(zt.ring().clone(), zt.group().clone(), zt.dim(), 2);
    let mut z = reduce_entries_mod(zt, &target)?;
    let mut k = 1u32;
    while k < m {
        let correction = two_i.sub(&z.mul(yt)?)?;
        z = reduce_entries_mod(&correction.mul(&z)?, &target)?;
        k *= 2;
    }
    debug_assert!(congruent_to_identity_mod(&z.mul(yt)?, &target)?);
    Ok(z)
}

/// Congruence Z·Y ≡ I mod p^m, exposed for oracles.
pub fn verify_inverse_mod(z: &RingMatrix, y: &RingMatrix, p: u64, m: u32) -> Result<bool> {
    congruent_to_identity_mod(&z.mul(y)?, &BigInt::from(p).pow(m))
}

// ---------------------------------------------------------------------------
// Block-shape direct-finiteness reduction check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BlockDfReport {
    pub shape: Vec<usize>,
    pub block_pairs_checked: u64,
    pub block_one_sided: u64,
    pub block_violations: u64,
    pub full_pairs_checked: u64,
    pub full_one_sided: u64,
    pub full_violations: u64,
    pub exhaustive: bool,
}

/// Enumerates matrices in B_shape(R) (below-diagonal blocks zero).
pub fn enumerate_block_upper(
    ring: &CoeffRing,
    group: &Group,
    shape: &BlockShape,
) -> Result<Vec<RingMatrix>> {
    let elems = GroupRingElement::enumerate_all(ring, group)?;
    let d = shape.total();
    let free: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| shape.block_of(i) <= shape.block_of(j))
        .collect();
    let zero = GroupRingElement::zero(ring.clone(), group.clone());
    let mut out = Vec::new();
    let mut idx = vec![0usize; free.len()];
    loop {
        let mut entries = vec![zero.clone(); d * d];
        for (f, &(i, j)) in free.iter().enumerate() {
            entries[i * d + j] = elems[idx[f]].clone();
        }
        out.push(RingMatrix::new(ring.clone(), group.clone(), d, entries)?);
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < elems.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Confirms, on a finite instance, that one-sided-unit pairs in
/// B_shape(R) are two-sided exactly when the same holds in
/// M_{max part}(R) (both always hold for finite R; the check is a
/// machine-checked consistency suite, exhaustive within budget).
pub fn block_df_reduction_check(
    ring: &CoeffRing,
    group: &Group,
    shape: &BlockShape,
    budget: u64,
    seed: u64,
) -> Result<BlockDfReport> {
    let per_elem = ring
        .size()
        .ok_or_else(|| Error::UnsupportedGroup("finite ring required".into()))?
        .pow(group.order().ok_or(Error::InfiniteGroup)? as u32);
    let d = shape.total();
    let free_positions = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| shape.block_of(i) <= shape.block_of(j))
        .count();
    let block_count = per_elem.checked_pow(free_positions as u32);
    let full_d = shape.max_part();
    let full_count = per_elem.checked_pow((full_d * full_d) as u32);
    let exhaustive = match (block_count, full_count) {
        (Some(b), Some(f)) => {
            b.checked_mul(b).is_some_and(|bp| bp <= budget)
                && f.checked_mul(f).is_some_and(|fp| fp <= budget)
        }
        _ => false,
    };
    let mut report = BlockDfReport {
        shape: shape.parts().to_vec(),
        block_pairs_checked: 0,
        block_one_sided: 0,
        block_violations: 0,
        full_pairs_checked: 0,
        full_one_sided: 0,
        full_violations: 0,
        exhaustive,
    };
    let scan = |xs: &[RingMatrix],
                    ys: &[RingMatrix],
                    pairs: &mut u64,
                    one_sided: &mut u64,
                    violations: &mut u64|
     -> Result<()> {
        for x in xs {
            for y in ys {
                *pairs += 1;
                if x.mul(y)?.is_identity() {
                    *one_sided += 1;
                    if let DfOutcome::RefutesDF(_) = check_df_pair(x, y)? {
                        *violations += 1;
                    }
                }
            }
        }
        Ok(())
    };
    if exhaustive {
        let block = enumerate_block_upper(ring, group, shape)?;
        scan(
            &block,
            &block,
            &mut report.block_pairs_checked,
            &mut report.block_one_sided,
            &mut report.block_violations,
        )?;
        let full = enumerate_matrices(ring, group, full_d)?;
        scan(
            &full,
            &full,
            &mut report.full_pairs_checked,
            &mut report.full_one_sided,
            &mut report.full_violations,
        )?;
    } else {
        // Seeded sample of the same size on both sides.
        let mut rng = SplitMix64::new(seed);
        let n = budget.max(1);
        for _ in 0..n {
            let x = random_block_upper(ring, group, shape, &mut rng)?;
            let y = random_block_upper(ring, group, shape, &mut rng)?;
            report.block_pairs_checked += 1;
            if x.mul(&y)?.is_identity() {
                report.block_one_sided += 1;
                if let DfOutcome::RefutesDF(_) = check_df_pair(&x, &y)? {
                    report.block_violations += 1;
                }
            }
            let x = random_matrix(ring, group, full_d, &mut rng);
            let y = random_matrix(ring, group, full_d, &mut rng);
            report.full_pairs_checked += 1;
            if x.mul(&y)?.is_identity() {
                report.full_one_sided += 1;
                if let DfOutcome::RefutesDF(_) = check_df_pair(&x, &y)? {
                    report.full_violations += 1;
                }
            }
        }
    }
    Ok(report)
}

fn random_block_upper(
    ring: &CoeffRing,
    group: &Group,
    shape: &BlockShape,
    rng: &mut SplitMix64,
) -> Result<RingMatrix> {
    let d = shape.total();
    let m = random_matrix(ring, group, d, rng);
    let zero = GroupRingElement::zero(ring.clone(), group.clone());
    let entries: Vec<GroupRingElement> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| {
            if shape.block_of(i) > shape.block_of(j) {
                zero.clone()
            } else {
                m.entry(i, j).clone()
            }
        })
        .collect();
    RingMatrix::new(ring.clone(), group.clone(), d, entries)
}

/// Decides unit-ness of a group-ring element over a *finite* instance by
/// exhaustive inverse search (independent oracle for the solver).
pub fn is_unit_exhaustive(e: &GroupRingElement) -> Result<bool> {
    let all = GroupRingElement::enumerate_all(e.ring(), e.group())?;
    for y in &all {
        if e.mul(y)?.is_one() && y.mul(e)?.is_one() {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::make_gf;

    fn f2() -> CoeffRing {
        make_gf(2, 1).unwrap()
    }

    fn f2_matrix(d: usize, bits: &[u64]) -> RingMatrix {
        let ring = f2();
        let scalars = bits.iter().map(|&b| ring.from_int(b as i64)).collect();
        RingMatrix::from_scalars(ring, d, scalars).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let a = f2_matrix(2, &[1, 1, 0, 1]);
        let i = RingMatrix::identity(f2(), Group::trivial(), 2);
        assert_eq!(i.mul(&a).unwrap(), a);
        assert_eq!(a.mul(&i).unwrap(), a);
    }

    #[test]
    fn f2_unitriangular_squares_to_identity() {
        let a = f2_matrix(2, &[1, 1, 0, 1]);
        assert!(a.mul(&a).unwrap().is_identity());
    }

    #[test]
    fn group_ring_entries_multiply() {
        // Over F_2[C3]: [1+s]·[1+s+s^2] = [0].
        let ring = f2();
        let c3 = Group::cyclic(3);
        let s = |k: u64| c3.element(Payload::Residue(k)).unwrap();
        let a = GroupRingElement::new(
            ring.clone(),
            c3.clone(),
            vec![(s(0), ring.one()), (s(1), ring.one())],
        )
        .unwrap();
        let b = GroupRingElement::new(
            ring.clone(),
            c3.clone(),
            vec![(s(0), ring.one()), (s(1), ring.one()), (s(2), ring.one())],
        )
        .unwrap();
        let ma = RingMatrix::from_element(a);
        let mb = RingMatrix::from_element(b);
        assert!(ma.mul(&mb).unwrap().entry(0, 0).is_zero());
    }

    #[test]
    fn block_upper_checks() {
        let i3 = RingMatrix::identity(f2(), Group::trivial(), 3);
        assert!(is_block_upper(&i3, &BlockShape::new(vec![1, 2])).unwrap());
        let low = f2_matrix(2, &[1, 0, 1, 1]);
        assert!(!is_block_upper(&low, &BlockShape::new(vec![1, 1])).unwrap());
        let up = f2_matrix(2, &[1, 1, 0, 1]);
        assert!(is_block_upper(&up, &BlockShape::new(vec![1, 1])).unwrap());
        assert!(matches!(
            is_block_upper(&up, &BlockShape::new(vec![1, 2])),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn check_df_pair_basics() {
        let i = RingMatrix::identity(f2(), Group::trivial(), 2);
        assert_eq!(check_df_pair(&i, &i).unwrap(), DfOutcome::ConfirmsDF);
        // Over F_2[C2] with X = Y = [g]: g^2 = 1.
        let ring = f2();
        let c2 = Group::cyclic(2);
        let g = GroupRingElement::term(
            ring.clone(),
            c2.element(Payload::Residue(1)).unwrap(),
            ring.one(),
        )
        .unwrap();
        let mg = RingMatrix::from_element(g);
        assert_eq!(check_df_pair(&mg, &mg).unwrap(), DfOutcome::ConfirmsDF);
        // Non-pair errors.
        let z = RingMatrix::zero(f2(), Group::trivial(), 2);
        assert_eq!(check_df_pair(&z, &z).unwrap_err(), Error::NotOneSidedPair);
    }

    #[test]
    fn solve_right_inverse_identity_and_shift() {
        let ring = f2();
        let c3 = Group::cyclic(3);
        let i = RingMatrix::identity(ring.clone(), c3.clone(), 1);
        let y = solve_right_inverse(&i, None).unwrap().unwrap();
        assert!(y.is_identity());
        // X = [s] over F_2[C3] has inverse [s^2].
        let s = GroupRingElement::term(
            ring.clone(),
            c3.element(Payload::Residue(1)).unwrap(),
            ring.one(),
        )
        .unwrap();
        let s2 = GroupRingElement::term(
            ring.clone(),
            c3.element(Payload::Residue(2)).unwrap(),
            ring.one(),
        )
        .unwrap();
        let y = solve_right_inverse(&RingMatrix::from_element(s), None)
            .unwrap()
            .unwrap();
        assert_eq!(*y.entry(0, 0), s2);
    }

    #[test]
    fn solve_right_inverse_zero_divisor_has_none() {
        // 1+s is a zero divisor in F_2[C3]; cross-check by exhaustive scan.
        let ring = f2();
        let c3 = Group::cyclic(3);
        let s = |k: u64| c3.element(Payload::Residue(k)).unwrap();
        let a = GroupRingElement::new(
            ring.clone(),
            c3.clone(),
            vec![(s(0), ring.one()), (s(1), ring.one())],
        )
        .unwrap();
        let solved = solve_right_inverse(&RingMatrix::from_element(a.clone()), None).unwrap();
        assert!(solved.is_none());
        assert!(!is_unit_exhaustive(&a).unwrap());
    }

    #[test]
    fn windowed_solver_inverts_monomials_over_z() {
        // x^2 in F_2[Z] has inverse x^-2 inside window 2.
        let ring = f2();
        let z = Group::infinite_cyclic();
        let x2 = GroupRingElement::term(
            ring.clone(),
            z.element(Payload::Int(BigInt::from(2))).unwrap(),
            ring.one(),
        )
        .unwrap();
        let y = solve_right_inverse(&RingMatrix::from_element(x2.clone()), Some(2))
            .unwrap()
            .unwrap();
        let prod = RingMatrix::from_element(x2)
            .mul(&y)
            .unwrap();
        assert!(prod.is_identity());
        // 1+x has no inverse within any window (not a unit of F_2[Z]).
        let e = GroupRingElement::new(
            ring.clone(),
            z.clone(),
            vec![
                (z.element(Payload::Int(BigInt::from(0))).unwrap(), ring.one()),
                (z.element(Payload::Int(BigInt::from(1))).unwrap(), ring.one()),
            ],
        )
        .unwrap();
        assert!(solve_right_inverse(&RingMatrix::from_element(e), Some(3))
            .unwrap()
            .is_none());
    }

    #[test]
    fn unit_search_m1_f2c2_is_clean() {
        let report = one_sided_unit_search(
            &f2(),
            &Group::cyclic(2),
            1,
            SearchScope::Exhaustive,
            1_000_000,
        )
        .unwrap();
        assert_eq!(report.elements_scanned, 4);
        assert_eq!(report.pairs_checked, 16);
        assert!(report.witnesses.is_empty());
        assert!(report.exhaustive);
    }

    #[test]
    fn unit_search_windowed_f2_z() {
        let report = one_sided_unit_search(
            &f2(),
            &Group::infinite_cyclic(),
            1,
            SearchScope::Windowed { window: 2 },
            1_000_000,
        )
        .unwrap();
        // Supports in [-2,2]: 2^5 = 32 candidates; the only invertible
        // ones within the window are the 5 monomials.
        assert_eq!(report.elements_scanned, 32);
        assert_eq!(report.one_sided_pairs, 5);
        assert!(report.witnesses.is_empty());
        assert!(report.bounded);
    }

    #[test]
    fn unitriangular_inverse_examples() {
        // I -> I in 0 rounds.
        let i = RingMatrix::identity(f2(), Group::trivial(), 3);
        let (b, rounds) = unitriangular_inverse(&i).unwrap();
        assert!(b.is_identity());
        assert_eq!(rounds, 0);
        // F_2: [[1,1],[0,1]] is self-inverse.
        let a = f2_matrix(2, &[1, 1, 0, 1]);
        let (b, rounds) = unitriangular_inverse(&a).unwrap();
        assert_eq!(b, a);
        assert!(rounds <= 1);
        // Z: [[1,2],[0,1]] inverts to [[1,-2],[0,1]].
        let zr = CoeffRing::Integers;
        let a = RingMatrix::from_scalars(
            zr.clone(),
            2,
            vec![zr.from_int(1), zr.from_int(2), zr.from_int(0), zr.from_int(1)],
        )
        .unwrap();
        let (b, _) = unitriangular_inverse(&a).unwrap();
        assert!(a.mul(&b).unwrap().is_identity());
        assert!(b.mul(&a).unwrap().is_identity());
        assert_eq!(*b.entry(0, 1), GroupRingElement::scalar(
            zr.clone(),
            Group::trivial(),
            zr.from_int(-2)
        )
        .unwrap());
        // Rejects non-unitriangular input.
        let r = unitriangular_inverse(&f2_matrix(2, &[1, 0, 1, 1]));
        assert_eq!(r.unwrap_err(), Error::NotUnitriangular);
    }

    #[test]
    fn hensel_lift_scalar_example() {
        // 1x1 over Z: Zt=[1], Yt=[3], p=2, m=2 -> [3] since 3*3 = 9 ≡ 1 mod 4.
        let zr = CoeffRing::Integers;
        let zt = RingMatrix::from_scalars(zr.clone(), 1, vec![zr.from_int(1)]).unwrap();
        let yt = RingMatrix::from_scalars(zr.clone(), 1, vec![zr.from_int(3)]).unwrap();
        let lifted = hensel_lift(&zt, &yt, 2, 2).unwrap();
        assert_eq!(
            *lifted.entry(0, 0),
            GroupRingElement::scalar(zr.clone(), Group::trivial(), zr.from_int(3)).unwrap()
        );
        assert!(verify_inverse_mod(&lifted, &yt, 2, 2).unwrap());
        // Zt=Yt=I stays I.
        let i = RingMatrix::identity(zr.clone(), Group::trivial(), 2);
        assert!(hensel_lift(&i, &i, 3, 5).unwrap().is_identity());
    }

    #[test]
    fn hensel_lift_over_z_c2() {
        // Yt = [1+2g], Zt = [1], p=2, m=3: lifted Z satisfies Z(1+2g) ≡ 1 mod 8.
        let zr = CoeffRing::Integers;
        let c2 = Group::cyclic(2);
        let yt = RingMatrix::from_element(
            GroupRingElement::new(
                zr.clone(),
                c2.clone(),
                vec![
                    (c2.element(Payload::Residue(0)).unwrap(), zr.from_int(1)),
                    (c2.element(Payload::Residue(1)).unwrap(), zr.from_int(2)),
                ],
            )
            .unwrap(),
        );
        let zt = RingMatrix::identity(zr.clone(), c2.clone(), 1);
        let lifted = hensel_lift(&zt, &yt, 2, 3).unwrap();
        assert!(verify_inverse_mod(&lifted, &yt, 2, 3).unwrap());
        // Coefficients are canonical in [0, 8).
        for e in lifted.entries() {
            for (_, c) in e.support() {
                let ScalarRepr::Int(v) = &c.repr else { unreachable!() };
                assert!(*v >= BigInt::from(0) && *v < BigInt::from(8));
            }
        }
    }

    #[test]
    fn hensel_rejects_non_congruent() {
        let zr = CoeffRing::Integers;
        let z2 = RingMatrix::from_scalars(zr.clone(), 1, vec![zr.from_int(2)]).unwrap();
        assert_eq!(
            hensel_lift(&z2, &z2, 2, 2).unwrap_err(),
            Error::NotCongruentModP
        );
    }

    #[test]
    fn block_left_unit_check_examples() {
        let shape = BlockShape::new(vec![1, 1]);
        let i = RingMatrix::identity(f2(), Group::trivial(), 2);
        assert_eq!(
            block_left_unit_check(&i, &i, &shape).unwrap(),
            BlockCheck::InShape
        );
        let a = f2_matrix(2, &[1, 1, 0, 1]);
        let (b, _) = unitriangular_inverse(&a).unwrap();
        assert_eq!(
            block_left_unit_check(&a, &b, &shape).unwrap(),
            BlockCheck::InShape
        );
    }

    #[test]
    fn block_left_unit_check_solved_over_c3() {
        // X = diag(s, s^2) with upper entry 1, solved Y is block-upper.
        let ring = f2();
        let c3 = Group::cyclic(3);
        let s = |k: u64| {
            GroupRingElement::term(
                ring.clone(),
                c3.element(Payload::Residue(k)).unwrap(),
                ring.one(),
            )
            .unwrap()
        };
        let zero = GroupRingElement::zero(ring.clone(), c3.clone());
        let x = RingMatrix::new(
            ring.clone(),
            c3.clone(),
            2,
            vec![s(1), s(0), zero.clone(), s(2)],
        )
        .unwrap();
        let y = solve_right_inverse(&x, None).unwrap().unwrap();
        assert_eq!(
            block_left_unit_check(&x, &y, &BlockShape::new(vec![1, 1])).unwrap(),
            BlockCheck::InShape
        );
    }

    #[test]
    fn block_df_reduction_on_f2() {
        // Shape (1,1) over F_2: 8 block matrices, 64 block pairs.
        let report = block_df_reduction_check(
            &f2(),
            &Group::trivial(),
            &BlockShape::new(vec![1, 1]),
            1_000_000,
            1,
        )
        .unwrap();
        assert!(report.exhaustive);
        assert_eq!(report.block_pairs_checked, 64);
        assert_eq!(report.block_violations, 0);
        assert_eq!(report.full_violations, 0);
    }

    #[test]
    fn block_df_reduction_on_zmod4_and_sampled_group_ring() {
        // Z/4, shape (1,1): exhaustive, both sides directly finite.
        let report = block_df_reduction_check(
            &CoeffRing::z_mod(4),
            &Group::trivial(),
            &BlockShape::new(vec![1, 1]),
            1_000_000,
            1,
        )
        .unwrap();
        assert!(report.exhaustive);
        assert_eq!(report.block_pairs_checked, 64 * 64);
        assert_eq!(report.block_violations, 0);
        assert_eq!(report.full_violations, 0);
        // F_2[C2], shape (1,1): the exhaustive space is 4096 + 256 pairs;
        // force the sampled path with a small budget.
        let report = block_df_reduction_check(
            &f2(),
            &Group::cyclic(2),
            &BlockShape::new(vec![1, 1]),
            500,
            9,
        )
        .unwrap();
        assert!(!report.exhaustive);
        assert_eq!(report.block_violations, 0);
        assert_eq!(report.full_violations, 0);
    }

    #[test]
    fn product_of_block_upper_stays_block_upper() {
        let shape = BlockShape::new(vec![1, 2]);
        let mut rng = SplitMix64::new(5);
        for _ in 0..50 {
            let a = random_block_upper(&f2(), &Group::trivial(), &shape, &mut rng).unwrap();
            let b = random_block_upper(&f2(), &Group::trivial(), &shape, &mut rng).unwrap();
            assert!(is_block_upper(&a.mul(&b).unwrap(), &shape).unwrap());
            assert!(is_block_upper(&a.add(&b).unwrap(), &shape).unwrap());
        }
    }
}
