//! Concrete computable groups with exact element arithmetic.
//!
//! The catalogue covers cyclic groups (including the infinite cyclic
//! group), free abelian groups, permutation groups given by generators,
//! explicit multiplication tables, finite products, and central quotients.
//! Every element carries a canonical payload, so equality of elements is
//! structural equality of payloads. Finite groups enumerate
//! deterministically: identity first, then lexicographic payload order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Default cap on the order of finite groups; exhaustive oracles must
/// stay desk-scale.
pub const DEFAULT_ORDER_CAP: u64 = 4096;

/// Number of sampled pairs used to spot-check homomorphisms with
/// infinite source.
const HOM_SAMPLE_PAIRS: usize = 1000;

/// Fixed seed for internal spot checks, so construction is deterministic.
const INTERNAL_CHECK_SEED: u64 = 0x5741_5254_4845_4652;

// ---------------------------------------------------------------------------
// Specs and payloads
// ---------------------------------------------------------------------------

/// A description of a catalogue group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    /// `Cyclic(n)` with `n >= 1` is Z/nZ; `Cyclic(0)` is the infinite
    /// cyclic group Z.
    Cyclic(u64),
    /// Free abelian group of the given rank (rank 0 is the trivial group).
    FreeAbelian(usize),
    /// Permutation group generated by the given permutations in one-line
    /// form (0-based images; all of equal length).
    Permutation(Vec<Vec<usize>>),
    /// Explicit multiplication table: `table[i][j]` is the index of the
    /// product of elements `i` and `j`.
    Table(Vec<Vec<usize>>),
    /// Direct product of catalogue groups.
    Product(Vec<GroupSpec>),
    /// Quotient of a parent group by the cyclic subgroup generated by a
    /// central element of finite order. The parent must be finite or
    /// abelian.
    CentralQuotient(Box<GroupSpec>, Payload),
}

/// Canonical element payload. Within one group all payloads share a
/// variant, and equality of elements is equality of payloads.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Payload {
    /// Residue in `[0, n)` for finite cyclic groups.
    Residue(u64),
    /// Exponent for the infinite cyclic group.
    Int(BigInt),
    /// Fixed-length exponent vector for free abelian groups.
    Vector(Vec<BigInt>),
    /// One-line image of a permutation.
    Perm(Vec<usize>),
    /// Index into a multiplication table.
    Index(usize),
    /// Componentwise payloads for products.
    Tuple(Vec<Payload>),
    /// Canonical (payload-minimal) coset representative for central
    /// quotients.
    Coset(Box<Payload>),
}

impl Payload {
    fn discriminant(&self) -> u8 {
        match self {
            Payload::Residue(_) => 0,
            Payload::Int(_) => 1,
            Payload::Vector(_) => 2,
            Payload::Perm(_) => 3,
            Payload::Index(_) => 4,
            Payload::Tuple(_) => 5,
            Payload::Coset(_) => 6,
        }
    }
}

impl Ord for Payload {
    fn cmp(&self, other: &Self) -> Ordering {
        use Payload::*;
        match (self, other) {
            (Residue(a), Residue(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Vector(a), Vector(b)) => a.cmp(b),
            (Perm(a), Perm(b)) => a.cmp(b),
            (Index(a), Index(b)) => a.cmp(b),
            (Tuple(a), Tuple(b)) => a.cmp(b),
            (Coset(a), Coset(b)) => a.cmp(b),
            _ => self.discriminant().cmp(&other.discriminant()),
        }
    }
}

impl PartialOrd for Payload {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Residue(r) => write!(f, "{r}"),
            Payload::Int(n) => write!(f, "{n}"),
            Payload::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Payload::Perm(p) => {
                write!(f, "[")?;
                for (i, x) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", x + 1)?;
                }
                write!(f, "]")
            }
            Payload::Index(i) => write!(f, "#{i}"),
            Payload::Tuple(t) => {
                write!(f, "(")?;
                for (i, x) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Payload::Coset(p) => write!(f, "{p}~"),
        }
    }
}

// ---------------------------------------------------------------------------
// Group handles
// ---------------------------------------------------------------------------

enum Repr {
    Cyclic(u64),
    FreeAbelian(usize),
    Permutation {
        points: usize,
        elements: Vec<Vec<usize>>,
    },
    Table {
        table: Vec<Vec<usize>>,
        identity: usize,
        inverses: Vec<usize>,
    },
    Product(Vec<Group>),
    CentralQuotient {
        parent: Group,
        /// Elements of the central subgroup being quotiented by.
        subgroup: Vec<Payload>,
    },
}

struct GroupInner {
    spec: GroupSpec,
    repr: Repr,
    order: Option<u64>,
    /// Cached enumeration, identity first; only for finite groups.
    elements: Option<Vec<Payload>>,
}

/// An immutable, shareable handle to a catalogue group.
#[derive(Clone)]
pub struct Group(Arc<GroupInner>);

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}
impl Eq for Group {}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({:?})", self.0.spec)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.spec {
            GroupSpec::Cyclic(0) => write!(f, "Z"),
            GroupSpec::Cyclic(n) => write!(f, "C{n}"),
            GroupSpec::FreeAbelian(r) => write!(f, "Z^{r}"),
            GroupSpec::Permutation(_) => match self.order() {
                Some(n) => write!(f, "perm<{n}>"),
                None => write!(f, "perm"),
            },
            GroupSpec::Table(_) => write!(f, "table<{}>", self.order().unwrap_or(0)),
            GroupSpec::Product(_) => {
                let Repr::Product(fs) = &self.0.repr else {
                    unreachable!()
                };
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "x")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
            GroupSpec::CentralQuotient(_, _) => {
                let Repr::CentralQuotient { parent, subgroup } = &self.0.repr else {
                    unreachable!()
                };
                write!(f, "{parent}/<{}>", subgroup.len())
            }
        }
    }
}

/// An element of a catalogue group in canonical form.
#[derive(Clone)]
pub struct GroupElement {
    group: Group,
    payload: Payload,
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.payload == other.payload && self.group == other.group
    }
}
impl Eq for GroupElement {}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.payload)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.payload)
    }
}

impl GroupElement {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn is_identity(&self) -> bool {
        self.payload == self.group.identity().payload
    }

    /// Canonical total order on elements of one group.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.payload.cmp(&other.payload)
    }
}

pub fn make_group(spec: GroupSpec) -> Result<Group> {
    Group::new_with_cap(spec, DEFAULT_ORDER_CAP)
}

impl Group {
    pub fn new(spec: GroupSpec) -> Result<Group> {
        Group::new_with_cap(spec, DEFAULT_ORDER_CAP)
    }

    pub fn new_with_cap(spec: GroupSpec, cap: u64) -> Result<Group> {
        let (repr, order) = match &spec {
            GroupSpec::Cyclic(n) => (Repr::Cyclic(*n), if *n == 0 { None } else { Some(*n) }),
            GroupSpec::FreeAbelian(r) => {
                (Repr::FreeAbelian(*r), if *r == 0 { Some(1) } else { None })
            }
            GroupSpec::Permutation(gens) => {
                let elements = close_permutations(gens, cap)?;
                let points = elements[0].len();
                let order = elements.len() as u64;
                (Repr::Permutation { points, elements }, Some(order))
            }
            GroupSpec::Table(table) => {
                let (identity, inverses) = validate_table(table)?;
                let order = table.len() as u64;
                if order > cap {
                    return Err(Error::OrderCapExceeded(cap));
                }
                (
                    Repr::Table {
                        table: table.clone(),
                        identity,
                        inverses,
                    },
                    Some(order),
                )
            }
            GroupSpec::Product(specs) => {
                let factors = specs
                    .iter()
                    .map(|s| Group::new_with_cap(s.clone(), cap))
                    .collect::<Result<Vec<_>>>()?;
                let mut order = Some(1u64);
                for g in &factors {
                    order = match (order, g.order()) {
                        (Some(a), Some(b)) => a.checked_mul(b),
                        _ => None,
                    };
                }
                if let Some(o) = order {
                    if o > cap {
                        return Err(Error::OrderCapExceeded(cap));
                    }
                }
                (Repr::Product(factors), order)
            }
            GroupSpec::CentralQuotient(parent_spec, z) => {
                let parent = Group::new_with_cap((**parent_spec).clone(), cap)?;
                if !(parent.is_finite() || parent.is_abelian()) {
                    return Err(Error::Unsupported(
                        "central quotient requires a finite or abelian parent".into(),
                    ));
                }
                let z = parent.element(z.clone())?;
                if !parent.is_central(&z)? {
                    return Err(Error::NonCentralElement);
                }
                let subgroup = cyclic_subgroup(&parent, &z, cap)?;
                let order = parent.order().map(|o| o / subgroup.len() as u64);
                (
                    Repr::CentralQuotient {
                        parent,
                        subgroup: subgroup.into_iter().map(|e| e.payload).collect(),
                    },
                    order,
                )
            }
        };
        let mut inner = GroupInner {
            spec,
            repr,
            order,
            elements: None,
        };
        if let Some(o) = inner.order {
            if o > cap {
                return Err(Error::OrderCapExceeded(cap));
            }
            inner.elements = Some(enumerate_payloads(&inner)?);
        }
        Ok(Group(Arc::new(inner)))
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.0.spec
    }

    pub fn is_finite(&self) -> bool {
        self.0.order.is_some()
    }

    pub fn order(&self) -> Option<u64> {
        self.0.order
    }

    pub fn is_trivial(&self) -> bool {
        self.0.order == Some(1)
    }

    /// Convenience constructors.
    pub fn cyclic(n: u64) -> Group {
        Group::new(GroupSpec::Cyclic(n)).expect("cyclic group")
    }

    pub fn trivial() -> Group {
        Group::cyclic(1)
    }

    pub fn infinite_cyclic() -> Group {
        Group::cyclic(0)
    }

    pub fn free_abelian(rank: usize) -> Group {
        Group::new(GroupSpec::FreeAbelian(rank)).expect("free abelian group")
    }

    pub fn product(factors: Vec<Group>) -> Result<Group> {
        Group::new(GroupSpec::Product(
            factors.iter().map(|g| g.spec().clone()).collect(),
        ))
    }

    /// Symmetric group on `1..=n` as a permutation group.
    pub fn symmetric(n: usize) -> Result<Group> {
        if n <= 1 {
            return Group::new(GroupSpec::Permutation(vec![(0..n.max(1)).collect()]));
        }
        let mut transposition: Vec<usize> = (0..n).collect();
        transposition.swap(0, 1);
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        Group::new(GroupSpec::Permutation(vec![transposition, cycle]))
    }

    /// Wraps a payload, validating it against this group's canonical form.
    pub fn element(&self, payload: Payload) -> Result<GroupElement> {
        if !self.payload_valid(&payload) {
            return Err(Error::GroupMismatch);
        }
        Ok(GroupElement {
            group: self.clone(),
            payload,
        })
    }

    fn payload_valid(&self, p: &Payload) -> bool {
        match (&self.0.repr, p) {
            (Repr::Cyclic(0), Payload::Int(_)) => true,
            (Repr::Cyclic(n), Payload::Residue(r)) => *n > 0 && r < n,
            (Repr::FreeAbelian(r), Payload::Vector(v)) => v.len() == *r,
            (Repr::Permutation { points, elements }, Payload::Perm(img)) => {
                img.len() == *points && elements.contains(img)
            }
            (Repr::Table { table, .. }, Payload::Index(i)) => *i < table.len(),
            (Repr::Product(fs), Payload::Tuple(ps)) => {
                ps.len() == fs.len() && fs.iter().zip(ps).all(|(g, q)| g.payload_valid(q))
            }
            (Repr::CentralQuotient { parent, subgroup }, Payload::Coset(rep)) => {
                parent.payload_valid(rep)
                    && canonical_coset_rep(parent, subgroup, rep.as_ref().clone()) == **rep
            }
            _ => false,
        }
    }

    pub fn identity(&self) -> GroupElement {
        let payload = match &self.0.repr {
            Repr::Cyclic(0) => Payload::Int(BigInt::zero()),
            Repr::Cyclic(_) => Payload::Residue(0),
            Repr::FreeAbelian(r) => Payload::Vector(vec![BigInt::zero(); *r]),
            Repr::Permutation { points, .. } => Payload::Perm((0..*points).collect()),
            Repr::Table { identity, .. } => Payload::Index(*identity),
            Repr::Product(fs) => Payload::Tuple(fs.iter().map(|g| g.identity().payload).collect()),
            Repr::CentralQuotient { parent, subgroup } => {
                let rep = canonical_coset_rep(parent, subgroup, parent.identity().payload);
                Payload::Coset(Box::new(rep))
            }
        };
        GroupElement {
            group: self.clone(),
            payload,
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        if a.group != *self || b.group != *self {
            return Err(Error::GroupMismatch);
        }
        Ok(GroupElement {
            group: self.clone(),
            payload: self.mul_payload(&a.payload, &b.payload),
        })
    }

    pub fn inv(&self, a: &GroupElement) -> Result<GroupElement> {
        if a.group != *self {
            return Err(Error::GroupMismatch);
        }
        Ok(GroupElement {
            group: self.clone(),
            payload: self.inv_payload(&a.payload),
        })
    }

    fn mul_payload(&self, a: &Payload, b: &Payload) -> Payload {
        match (&self.0.repr, a, b) {
            (Repr::Cyclic(0), Payload::Int(x), Payload::Int(y)) => Payload::Int(x + y),
            (Repr::Cyclic(n), Payload::Residue(x), Payload::Residue(y)) => {
                Payload::Residue((x + y) % n)
            }
            (Repr::FreeAbelian(_), Payload::Vector(x), Payload::Vector(y)) => {
                Payload::Vector(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (Repr::Permutation { .. }, Payload::Perm(x), Payload::Perm(y)) => {
                // Composition: apply a first, then b.
                Payload::Perm(x.iter().map(|&i| y[i]).collect())
            }
            (Repr::Table { table, .. }, Payload::Index(i), Payload::Index(j)) => {
                Payload::Index(table[*i][*j])
            }
            (Repr::Product(fs), Payload::Tuple(xs), Payload::Tuple(ys)) => Payload::Tuple(
                fs.iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(g, (x, y))| g.mul_payload(x, y))
                    .collect(),
            ),
            (Repr::CentralQuotient { parent, subgroup }, Payload::Coset(x), Payload::Coset(y)) => {
                let prod = parent.mul_payload(x, y);
                Payload::Coset(Box::new(canonical_coset_rep(parent, subgroup, prod)))
            }
            _ => unreachable!("payload variant mismatch"),
        }
    }

    fn inv_payload(&self, a: &Payload) -> Payload {
        match (&self.0.repr, a) {
            (Repr::Cyclic(0), Payload::Int(x)) => Payload::Int(-x),
            (Repr::Cyclic(n), Payload::Residue(x)) => {
                Payload::Residue(if *x == 0 { 0 } else { n - x })
            }
            (Repr::FreeAbelian(_), Payload::Vector(x)) => {
                Payload::Vector(x.iter().map(|p| -p).collect())
            }
            (Repr::Permutation { points, .. }, Payload::Perm(x)) => {
                let mut inv = vec![0; *points];
                for (i, &img) in x.iter().enumerate() {
                    inv[img] = i;
                }
                Payload::Perm(inv)
            }
            (Repr::Table { inverses, .. }, Payload::Index(i)) => Payload::Index(inverses[*i]),
            (Repr::Product(fs), Payload::Tuple(xs)) => Payload::Tuple(
                fs.iter()
                    .zip(xs)
                    .map(|(g, x)| g.inv_payload(x))
                    .collect(),
            ),
            (Repr::CentralQuotient { parent, subgroup }, Payload::Coset(x)) => {
                let inv = parent.inv_payload(x);
                Payload::Coset(Box::new(canonical_coset_rep(parent, subgroup, inv)))
            }
            _ => unreachable!("payload variant mismatch"),
        }
    }

    /// Deterministic enumeration of a finite group: identity first, then
    /// lexicographic payload order.
    pub fn enumerate(&self) -> Result<Vec<GroupElement>> {
        let elements = self.0.elements.as_ref().ok_or(Error::InfiniteGroup)?;
        Ok(elements
            .iter()
            .map(|p| GroupElement {
                group: self.clone(),
                payload: p.clone(),
            })
            .collect())
    }

    /// Exact centre of a finite group by exhaustive commutation test.
    pub fn centre(&self) -> Result<Vec<GroupElement>> {
        let all = self.enumerate()?;
        Ok(all
            .iter()
            .filter(|z| {
                all.iter().all(|g| {
                    self.mul_payload(&z.payload, &g.payload)
                        == self.mul_payload(&g.payload, &z.payload)
                })
            })
            .cloned()
            .collect())
    }

    fn is_central(&self, z: &GroupElement) -> Result<bool> {
        if self.is_abelian() {
            return Ok(true);
        }
        let all = self.enumerate()?;
        Ok(all.iter().all(|g| {
            self.mul_payload(&z.payload, &g.payload) == self.mul_payload(&g.payload, &z.payload)
        }))
    }

    /// Structural abelianness; exact for the whole catalogue.
    pub fn is_abelian(&self) -> bool {
        match &self.0.repr {
            Repr::Cyclic(_) | Repr::FreeAbelian(_) => true,
            Repr::Product(fs) => fs.iter().all(|g| g.is_abelian()),
            Repr::Permutation { elements, .. } => {
                let g = self;
                elements.iter().all(|a| {
                    elements.iter().all(|b| {
                        g.mul_payload(&Payload::Perm(a.clone()), &Payload::Perm(b.clone()))
                            == g.mul_payload(&Payload::Perm(b.clone()), &Payload::Perm(a.clone()))
                    })
                })
            }
            Repr::Table { table, .. } => {
                (0..table.len()).all(|i| (0..table.len()).all(|j| table[i][j] == table[j][i]))
            }
            Repr::CentralQuotient { parent, .. } => {
                if parent.is_abelian() {
                    true
                } else {
                    // Parent is finite here by the construction invariant.
                    let elems = self.0.elements.as_ref().expect("finite quotient");
                    elems.iter().all(|a| {
                        elems
                            .iter()
                            .all(|b| self.mul_payload(a, b) == self.mul_payload(b, a))
                    })
                }
            }
        }
    }

    /// Abelianization together with the projection homomorphism.
    ///
    /// Abelian groups are their own abelianization (identity map); finite
    /// groups quotient by the commutator subgroup; other infinite
    /// variants are unsupported.
    pub fn abelianization(&self) -> Result<(Group, GroupHom)> {
        if self.is_abelian() {
            return Ok((self.clone(), GroupHom::identity(self)));
        }
        if !self.is_finite() {
            return Err(Error::Unsupported(
                "abelianization of infinite non-abelian groups".into(),
            ));
        }
        let all = self.enumerate()?;
        // Commutator subgroup: closure of all commutators.
        let mut comms = BTreeSet::new();
        for a in &all {
            for b in &all {
                let ab = self.mul_payload(&a.payload, &b.payload);
                let ba = self.mul_payload(&b.payload, &a.payload);
                // [a,b] = a b a^-1 b^-1  =  (ab)(ba)^-1
                let c = self.mul_payload(&ab, &self.inv_payload(&ba));
                comms.insert(c);
            }
        }
        let subgroup = close_subset(self, comms);
        // Cosets xH, keyed by their sorted element sets.
        let mut coset_of: BTreeMap<Payload, usize> = BTreeMap::new();
        let mut reps: Vec<Payload> = Vec::new();
        for x in &all {
            if coset_of.contains_key(&x.payload) {
                continue;
            }
            let idx = reps.len();
            let mut coset: Vec<Payload> = subgroup
                .iter()
                .map(|h| self.mul_payload(&x.payload, h))
                .collect();
            coset.sort();
            for c in &coset {
                coset_of.insert(c.clone(), idx);
            }
            reps.push(coset[0].clone());
        }
        // Identity's coset first, remaining cosets by representative order.
        let id_idx = coset_of[&self.identity().payload];
        let mut order: Vec<usize> = (0..reps.len()).collect();
        order.sort_by_key(|&i| (i != id_idx, reps[i].clone()));
        let mut new_index = vec![0usize; reps.len()];
        for (new_i, &old_i) in order.iter().enumerate() {
            new_index[old_i] = new_i;
        }
        let q = reps.len();
        let mut table = vec![vec![0usize; q]; q];
        for (old_i, _) in reps.iter().enumerate() {
            for (old_j, _) in reps.iter().enumerate() {
                let prod = self.mul_payload(&reps[old_i], &reps[old_j]);
                table[new_index[old_i]][new_index[old_j]] = new_index[coset_of[&prod]];
            }
        }
        let quotient = Group::new(GroupSpec::Table(table))?;
        let coset_of = Arc::new(coset_of);
        let new_index = Arc::new(new_index);
        let tgt = quotient.clone();
        let hom = GroupHom::new(self.clone(), quotient.clone(), move |x| {
            tgt.element(Payload::Index(new_index[coset_of[x.payload()]]))
                .expect("coset index")
        })?;
        Ok((quotient, hom))
    }

    /// Deterministic pseudo-random element, used by sampled verifiers.
    /// For infinite directions, exponents are drawn from [-50, 50].
    pub fn random_element(&self, rng: &mut SplitMix64) -> GroupElement {
        let payload = self.random_payload(rng);
        GroupElement {
            group: self.clone(),
            payload,
        }
    }

    fn random_payload(&self, rng: &mut SplitMix64) -> Payload {
        match &self.0.repr {
            Repr::Cyclic(0) => Payload::Int(BigInt::from(rng.signed(50))),
            Repr::Cyclic(n) => Payload::Residue(rng.below(*n)),
            Repr::FreeAbelian(r) => {
                Payload::Vector((0..*r).map(|_| BigInt::from(rng.signed(50))).collect())
            }
            Repr::Permutation { elements, .. } => {
                Payload::Perm(elements[rng.below(elements.len() as u64) as usize].clone())
            }
            Repr::Table { table, .. } => Payload::Index(rng.below(table.len() as u64) as usize),
            Repr::Product(fs) => {
                Payload::Tuple(fs.iter().map(|g| g.random_payload(rng)).collect())
            }
            Repr::CentralQuotient { parent, subgroup } => {
                let p = parent.random_payload(rng);
                Payload::Coset(Box::new(canonical_coset_rep(parent, subgroup, p)))
            }
        }
    }

    /// The order of an element (number of steps until identity), capped.
    pub fn element_order(&self, a: &GroupElement, cap: u64) -> Result<u64> {
        let id = self.identity().payload;
        let mut acc = a.payload.clone();
        let mut k = 1u64;
        while acc != id {
            if k > cap {
                return Err(Error::ElementInfiniteOrder);
            }
            acc = self.mul_payload(&acc, &a.payload);
            k += 1;
        }
        Ok(k)
    }

    /// Converts a finite group into an explicit table group, together
    /// with the index assignment following the canonical enumeration.
    pub fn to_table(&self) -> Result<(Group, GroupHom)> {
        let all = self.enumerate()?;
        let index: BTreeMap<Payload, usize> = all
            .iter()
            .enumerate()
            .map(|(i, e)| (e.payload.clone(), i))
            .collect();
        let n = all.len();
        let mut table = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                table[i][j] = index[&self.mul_payload(&all[i].payload, &all[j].payload)];
            }
        }
        let tg = Group::new(GroupSpec::Table(table))?;
        let index = Arc::new(index);
        let tgt = tg.clone();
        let hom = GroupHom::new(self.clone(), tg.clone(), move |x| {
            tgt.element(Payload::Index(index[x.payload()])).unwrap()
        })?;
        Ok((tg, hom))
    }
}

/// Closure of a payload set into a subgroup (finite ambient group).
pub(crate) fn close_subset(g: &Group, seed: BTreeSet<Payload>) -> Vec<Payload> {
    let mut set: BTreeSet<Payload> = seed;
    set.insert(g.identity().payload);
    loop {
        let mut grew = false;
        let snapshot: Vec<Payload> = set.iter().cloned().collect();
        for a in &snapshot {
            let inv = g.inv_payload(a);
            if set.insert(inv) {
                grew = true;
            }
            for b in &snapshot {
                let p = g.mul_payload(a, b);
                if set.insert(p) {
                    grew = true;
                }
            }
        }
        if !grew {
            return set.into_iter().collect();
        }
    }
}

fn cyclic_subgroup(parent: &Group, z: &GroupElement, cap: u64) -> Result<Vec<GroupElement>> {
    let id = parent.identity();
    let mut elems = vec![id.clone()];
    let mut acc = z.clone();
    while acc != id {
        if elems.len() as u64 > cap {
            return Err(Error::ElementInfiniteOrder);
        }
        elems.push(acc.clone());
        acc = parent.mul(&acc, z)?;
    }
    Ok(elems)
}

fn canonical_coset_rep(parent: &Group, subgroup: &[Payload], x: Payload) -> Payload {
    subgroup
        .iter()
        .map(|s| parent.mul_payload(&x, s))
        .min()
        .expect("nonempty subgroup")
}

fn close_permutations(gens: &[Vec<usize>], cap: u64) -> Result<Vec<Vec<usize>>> {
    if gens.is_empty() {
        return Err(Error::Unsupported(
            "permutation group needs at least one generator".into(),
        ));
    }
    let n = gens[0].len();
    for g in gens {
        if g.len() != n {
            return Err(Error::Unsupported(
                "permutation generators act on different point sets".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &i in g {
            if i >= n || seen[i] {
                return Err(Error::Unsupported("invalid permutation image".into()));
            }
            seen[i] = true;
        }
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
    set.insert(identity.clone());
    let mut frontier = vec![identity];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y: Vec<usize> = x.iter().map(|&i| g[i]).collect();
            if set.insert(y.clone()) {
                if set.len() as u64 > cap {
                    return Err(Error::OrderCapExceeded(cap));
                }
                frontier.push(y);
            }
        }
    }
    Ok(set.into_iter().collect())
}

fn validate_table(table: &[Vec<usize>]) -> Result<(usize, Vec<usize>)> {
    let n = table.len();
    if n == 0 {
        return Err(Error::InvalidTable("empty table".into()));
    }
    for row in table {
        if row.len() != n {
            return Err(Error::InvalidTable("table is not square".into()));
        }
        if row.iter().any(|&e| e >= n) {
            return Err(Error::InvalidTable("entry out of range".into()));
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
        .ok_or_else(|| Error::InvalidTable("no identity element".into()))?;
    let mut inverses = vec![usize::MAX; n];
    for x in 0..n {
        inverses[x] = (0..n)
            .find(|&y| table[x][y] == identity && table[y][x] == identity)
            .ok_or_else(|| Error::InvalidTable(format!("element {x} has no inverse")))?;
    }
    // Associativity: exhaustive for order <= 64, sampled beyond.
    if n <= 64 {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidTable(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
    } else {
        let mut rng = SplitMix64::new(INTERNAL_CHECK_SEED);
        for _ in 0..1000 {
            let a = rng.below(n as u64) as usize;
            let b = rng.below(n as u64) as usize;
            let c = rng.below(n as u64) as usize;
            if table[table[a][b]][c] != table[a][table[b][c]] {
                return Err(Error::InvalidTable(format!(
                    "associativity fails at ({a},{b},{c})"
                )));
            }
        }
    }
    Ok((identity, inverses))
}

fn enumerate_payloads(inner: &GroupInner) -> Result<Vec<Payload>> {
    fn all_payloads(repr: &Repr) -> Vec<Payload> {
        match repr {
            Repr::Cyclic(n) => (0..*n).map(Payload::Residue).collect(),
            Repr::FreeAbelian(0) => vec![Payload::Vector(vec![])],
            Repr::Permutation { elements, .. } => {
                elements.iter().cloned().map(Payload::Perm).collect()
            }
            Repr::Table { table, .. } => (0..table.len()).map(Payload::Index).collect(),
            Repr::Product(fs) => {
                let mut acc = vec![vec![]];
                for g in fs {
                    let parts = all_payloads(&g.0.repr);
                    let mut next = Vec::with_capacity(acc.len() * parts.len());
                    for prefix in &acc {
                        for p in &parts {
                            let mut t: Vec<Payload> = prefix.clone();
                            t.push(p.clone());
                            next.push(t);
                        }
                    }
                    acc = next;
                }
                acc.into_iter().map(Payload::Tuple).collect()
            }
            Repr::CentralQuotient { parent, subgroup } => {
                let mut set = BTreeSet::new();
                for p in all_payloads(&parent.0.repr) {
                    set.insert(Payload::Coset(Box::new(canonical_coset_rep(
                        parent, subgroup, p,
                    ))));
                }
                set.into_iter().collect()
            }
            Repr::FreeAbelian(_) => unreachable!("infinite"),
        }
    }
    let mut payloads = all_payloads(&inner.repr);
    payloads.sort();
    payloads.dedup();
    // Identity first, the rest in lexicographic payload order.
    let identity = match &inner.repr {
        Repr::Table { identity, .. } => Payload::Index(*identity),
        Repr::CentralQuotient { parent, subgroup } => Payload::Coset(Box::new(
            canonical_coset_rep(parent, subgroup, parent.identity().payload),
        )),
        Repr::Cyclic(_) => Payload::Residue(0),
        Repr::FreeAbelian(_) => Payload::Vector(vec![]),
        Repr::Permutation { points, .. } => Payload::Perm((0..*points).collect()),
        Repr::Product(fs) => Payload::Tuple(fs.iter().map(|g| g.identity().payload).collect()),
    };
    let pos = payloads
        .iter()
        .position(|p| *p == identity)
        .expect("identity enumerated");
    payloads.remove(pos);
    payloads.insert(0, identity);
    Ok(payloads)
}

// ---------------------------------------------------------------------------
// Homomorphisms
// ---------------------------------------------------------------------------

type HomRule = Arc<dyn Fn(&GroupElement) -> GroupElement + Send + Sync>;

/// A verified homomorphism between catalogue groups.
///
/// Multiplicativity is checked exhaustively for finite sources and on
/// 1000 deterministic samples otherwise.
#[derive(Clone)]
pub struct GroupHom {
    source: Group,
    target: Group,
    rule: HomRule,
}

impl fmt::Debug for GroupHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupHom({} -> {})", self.source, self.target)
    }
}

impl GroupHom {
    pub fn new<F>(source: Group, target: Group, rule: F) -> Result<GroupHom>
    where
        F: Fn(&GroupElement) -> GroupElement + Send + Sync + 'static,
    {
        let hom = GroupHom {
            source,
            target,
            rule: Arc::new(rule),
        };
        hom.verify()?;
        Ok(hom)
    }

    fn verify(&self) -> Result<()> {
        let check = |a: &GroupElement, b: &GroupElement| -> Result<()> {
            let ab = self.source.mul(a, b)?;
            let lhs = self.apply(&ab)?;
            let rhs = self.target.mul(&self.apply(a)?, &self.apply(b)?)?;
            if lhs != rhs {
                return Err(Error::NotAHomomorphism(format!("({a}, {b})")));
            }
            Ok(())
        };
        if self.source.is_finite() {
            let all = self.source.enumerate()?;
            for a in &all {
                for b in &all {
                    check(a, b)?;
                }
            }
        } else {
            let mut rng = SplitMix64::new(INTERNAL_CHECK_SEED);
            for _ in 0..HOM_SAMPLE_PAIRS {
                let a = self.source.random_element(&mut rng);
                let b = self.source.random_element(&mut rng);
                check(&a, &b)?;
            }
        }
        let id_img = self.apply(&self.source.identity())?;
        if id_img != self.target.identity() {
            return Err(Error::NotAHomomorphism("identity".into()));
        }
        Ok(())
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        if *x.group() != self.source {
            return Err(Error::GroupMismatch);
        }
        let y = (self.rule)(x);
        debug_assert_eq!(*y.group(), self.target);
        Ok(y)
    }

    pub fn source(&self) -> &Group {
        &self.source
    }

    pub fn target(&self) -> &Group {
        &self.target
    }

    pub fn identity(g: &Group) -> GroupHom {
        GroupHom {
            source: g.clone(),
            target: g.clone(),
            rule: Arc::new(|x: &GroupElement| x.clone()),
        }
    }

    /// `self` after `first` (i.e. x ↦ self(first(x))).
    pub fn compose(&self, first: &GroupHom) -> Result<GroupHom> {
        if first.target != self.source {
            return Err(Error::GroupMismatch);
        }
        let f = first.clone();
        let g = self.clone();
        Ok(GroupHom {
            source: first.source.clone(),
            target: self.target.clone(),
            rule: Arc::new(move |x| g.apply(&f.apply(x).unwrap()).unwrap()),
        })
    }

    /// Reduction C_m -> C_n for n | m, or Z -> C_n; x ↦ x mod n.
    pub fn cyclic_reduction(source: &Group, n: u64) -> Result<GroupHom> {
        let target = Group::cyclic(n);
        match source.spec() {
            GroupSpec::Cyclic(0) => {
                let tgt = target.clone();
                GroupHom::new(source.clone(), target.clone(), move |x| {
                    let Payload::Int(v) = x.payload() else {
                        unreachable!()
                    };
                    let m = BigInt::from(n);
                    let mut r = v % &m;
                    if r.is_negative() {
                        r += &m;
                    }
                    let r: u64 = r.try_into().expect("residue fits");
                    tgt.element(Payload::Residue(r)).unwrap()
                })
            }
            GroupSpec::Cyclic(m) if *m > 0 && m % n == 0 => {
                let tgt = target.clone();
                GroupHom::new(source.clone(), target.clone(), move |x| {
                    let Payload::Residue(v) = x.payload() else {
                        unreachable!()
                    };
                    tgt.element(Payload::Residue(v % n)).unwrap()
                })
            }
            _ => Err(Error::Unsupported(
                "cyclic reduction needs a cyclic source with compatible modulus".into(),
            )),
        }
    }

    /// Projection of a product group onto one factor.
    pub fn projection(source: &Group, index: usize) -> Result<GroupHom> {
        let GroupSpec::Product(specs) = source.spec() else {
            return Err(Error::Unsupported("projection needs a product group".into()));
        };
        if index >= specs.len() {
            return Err(Error::Unsupported("projection index out of range".into()));
        }
        let target = Group::new(specs[index].clone())?;
        let tgt = target.clone();
        GroupHom::new(source.clone(), target.clone(), move |x| {
            let Payload::Tuple(parts) = x.payload() else {
                unreachable!()
            };
            tgt.element(parts[index].clone()).unwrap()
        })
    }

    /// The map onto the trivial group.
    pub fn to_trivial(source: &Group) -> GroupHom {
        let target = Group::trivial();
        let tgt = target.clone();
        GroupHom {
            source: source.clone(),
            target,
            rule: Arc::new(move |_| tgt.identity()),
        }
    }

    /// Quotient map onto a central quotient of the source.
    pub fn quotient_map(source: &Group, z: &GroupElement) -> Result<GroupHom> {
        let quotient = Group::new(GroupSpec::CentralQuotient(
            Box::new(source.spec().clone()),
            z.payload().clone(),
        ))?;
        let tgt = quotient.clone();
        let Repr::CentralQuotient { parent, subgroup } = &quotient.0.repr else {
            unreachable!()
        };
        let parent = parent.clone();
        let subgroup: Arc<Vec<Payload>> = Arc::new(subgroup.clone());
        GroupHom::new(source.clone(), quotient.clone(), move |x| {
            let rep = canonical_coset_rep(&parent, &subgroup, x.payload().clone());
            tgt.element(Payload::Coset(Box::new(rep))).unwrap()
        })
    }

    /// Exhaustive image and kernel of a hom with finite source.
    pub fn image_kernel(&self) -> Result<(Vec<GroupElement>, Vec<GroupElement>)> {
        let all = self.source.enumerate()?;
        let mut image = BTreeSet::new();
        let mut kernel = Vec::new();
        let tid = self.target.identity();
        for x in &all {
            let y = self.apply(x)?;
            if y == tid {
                kernel.push(x.clone());
            }
            image.insert(y.payload().clone());
        }
        let image = image
            .into_iter()
            .map(|p| self.target.element(p))
            .collect::<Result<Vec<_>>>()?;
        Ok((image, kernel))
    }

    pub fn is_surjective(&self) -> Result<bool> {
        let (image, _) = self.image_kernel()?;
        Ok(Some(image.len() as u64) == self.target.order())
    }

    pub fn is_injective(&self) -> Result<bool> {
        let (_, kernel) = self.image_kernel()?;
        Ok(kernel.len() == 1)
    }
}

/// D8 = ⟨r, s | r⁴ = s² = 1, s r s = r⁻¹⟩ as an explicit table group;
/// elements indexed r^i s^j with index 2i + j. Test helper shared with
/// the wreath module's isomorphism checks.
#[cfg(test)]
pub(crate) fn tests_d8_table() -> Group {
    let idx = |i: usize, j: usize| 2 * (i % 4) + (j % 2);
    let mut table = vec![vec![0usize; 8]; 8];
    for i1 in 0..4 {
        for j1 in 0..2 {
            for i2 in 0..4 {
                for j2 in 0..2 {
                    // (r^i1 s^j1)(r^i2 s^j2) = r^(i1 + (-1)^j1 * i2) s^(j1+j2)
                    let i = if j1 == 0 { (i1 + i2) % 4 } else { (i1 + 4 - i2) % 4 };
                    table[idx(i1, j1)][idx(i2, j2)] = idx(i, j1 + j2);
                }
            }
        }
    }
    Group::new(GroupSpec::Table(table)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> Group {
        // perm:[(1 2),(1 2 3)]
        Group::new(GroupSpec::Permutation(vec![vec![1, 0, 2], vec![1, 2, 0]])).unwrap()
    }

    #[test]
    fn cyclic_2_has_order_2() {
        let g = Group::cyclic(2);
        assert_eq!(g.order(), Some(2));
        let a = g.element(Payload::Residue(1)).unwrap();
        assert_eq!(g.mul(&a, &a).unwrap(), g.identity());
    }

    #[test]
    fn s3_closure_has_order_6() {
        // Oracle: closure enumeration of {(1 2), (1 2 3)} equals S3.
        let g = s3();
        assert_eq!(g.order(), Some(6));
        let elems = g.enumerate().unwrap();
        assert_eq!(elems.len(), 6);
        assert!(elems[0].is_identity());
        // No duplicates.
        let set: BTreeSet<_> = elems.iter().map(|e| e.payload().clone()).collect();
        assert_eq!(set.len(), 6);
    }

    #[test]
    fn central_quotient_of_c4_by_2_has_order_2() {
        // Oracle: coset enumeration of C4 / <2>.
        let q = Group::new(GroupSpec::CentralQuotient(
            Box::new(GroupSpec::Cyclic(4)),
            Payload::Residue(2),
        ))
        .unwrap();
        assert_eq!(q.order(), Some(2));
        let elems = q.enumerate().unwrap();
        assert_eq!(elems.len(), 2);
    }

    #[test]
    fn central_quotient_rejects_noncentral() {
        // In S3 only the identity is central.
        let g = s3();
        let transposition = g.element(Payload::Perm(vec![1, 0, 2])).unwrap();
        let err = Group::new(GroupSpec::CentralQuotient(
            Box::new(g.spec().clone()),
            transposition.payload().clone(),
        ))
        .unwrap_err();
        assert_eq!(err, Error::NonCentralElement);
    }

    #[test]
    fn enumerate_cyclic_3() {
        let g = Group::cyclic(3);
        let elems = g.enumerate().unwrap();
        let res: Vec<u64> = elems
            .iter()
            .map(|e| match e.payload() {
                Payload::Residue(r) => *r,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(res, vec![0, 1, 2]);
    }

    #[test]
    fn enumerate_c2_x_c2() {
        let g = Group::product(vec![Group::cyclic(2), Group::cyclic(2)]).unwrap();
        assert_eq!(g.enumerate().unwrap().len(), 4);
    }

    #[test]
    fn infinite_group_enumerate_errors() {
        let z = Group::infinite_cyclic();
        assert!(!z.is_finite());
        assert_eq!(z.enumerate().unwrap_err(), Error::InfiniteGroup);
    }

    #[test]
    fn centre_of_cyclic_4_is_everything() {
        let g = Group::cyclic(4);
        assert_eq!(g.centre().unwrap().len(), 4);
    }

    #[test]
    fn centre_of_s3_is_trivial() {
        // Oracle: exhaustive commutation.
        let g = s3();
        let z = g.centre().unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].is_identity());
    }

    #[test]
    fn centre_of_d8_has_order_2() {
        let d8 = d8_table();
        let z = d8.centre().unwrap();
        assert_eq!(z.len(), 2);
    }

    fn d8_table() -> Group {
        tests_d8_table()
    }

    #[test]
    fn abelianization_of_cyclic_is_identity() {
        let g = Group::cyclic(5);
        let (ab, hom) = g.abelianization().unwrap();
        assert_eq!(ab, g);
        let x = g.element(Payload::Residue(3)).unwrap();
        assert_eq!(hom.apply(&x).unwrap(), x);
    }

    #[test]
    fn abelianization_of_s3_has_order_2() {
        // Oracle: commutator subgroup of S3 is A3 (order 3).
        let g = s3();
        let (ab, hom) = g.abelianization().unwrap();
        assert_eq!(ab.order(), Some(2));
        assert!(hom.is_surjective().unwrap());
    }

    #[test]
    fn abelianization_of_d8_has_order_4() {
        let d8 = d8_table();
        let (ab, _) = d8.abelianization().unwrap();
        assert_eq!(ab.order(), Some(4));
        assert!(ab.is_abelian());
    }

    #[test]
    fn group_axioms_hold_on_finite_samples() {
        for g in [
            Group::cyclic(6),
            s3(),
            Group::product(vec![Group::cyclic(2), Group::cyclic(4)]).unwrap(),
            d8_table(),
        ] {
            let elems = g.enumerate().unwrap();
            let id = g.identity();
            for a in &elems {
                assert_eq!(g.mul(a, &id).unwrap(), *a);
                assert_eq!(g.mul(&id, a).unwrap(), *a);
                let ainv = g.inv(a).unwrap();
                assert_eq!(g.mul(a, &ainv).unwrap(), id);
                for b in &elems {
                    for c in &elems {
                        let left = g.mul(&g.mul(a, b).unwrap(), c).unwrap();
                        let right = g.mul(a, &g.mul(b, c).unwrap()).unwrap();
                        assert_eq!(left, right);
                    }
                }
            }
        }
    }

    #[test]
    fn associativity_sampled_for_infinite_variants() {
        let mut rng = SplitMix64::new(7);
        for g in [Group::infinite_cyclic(), Group::free_abelian(2)] {
            for _ in 0..1000 {
                let a = g.random_element(&mut rng);
                let b = g.random_element(&mut rng);
                let c = g.random_element(&mut rng);
                let left = g.mul(&g.mul(&a, &b).unwrap(), &c).unwrap();
                let right = g.mul(&a, &g.mul(&b, &c).unwrap()).unwrap();
                assert_eq!(left, right);
            }
        }
    }

    #[test]
    fn centre_witnesses_for_noncentral_elements() {
        let g = s3();
        let centre = g.centre().unwrap();
        for e in g.enumerate().unwrap() {
            if centre.contains(&e) {
                continue;
            }
            let witness = g
                .enumerate()
                .unwrap()
                .into_iter()
                .find(|w| g.mul(&e, w).unwrap() != g.mul(w, &e).unwrap());
            assert!(witness.is_some(), "non-centre element must have a witness");
        }
    }

    #[test]
    fn hom_verification_rejects_non_homs() {
        let c4 = Group::cyclic(4);
        let c2 = Group::cyclic(2);
        let tgt = c2.clone();
        // x -> 1 for all x is not a homomorphism.
        let err = GroupHom::new(c4, c2, move |_| tgt.element(Payload::Residue(1)).unwrap());
        assert!(err.is_err());
    }

    #[test]
    fn cyclic_reduction_and_composition() {
        let z = Group::infinite_cyclic();
        let red4 = GroupHom::cyclic_reduction(&z, 4).unwrap();
        let c4 = red4.target().clone();
        let red2 = GroupHom::cyclic_reduction(&c4, 2).unwrap();
        let comp = red2.compose(&red4).unwrap();
        let x = z.element(Payload::Int(BigInt::from(-3))).unwrap();
        let y = comp.apply(&x).unwrap();
        assert_eq!(*y.payload(), Payload::Residue(1));
        // Composition with identity is neutral.
        let idh = GroupHom::identity(&z);
        let comp2 = comp.compose(&idh).unwrap();
        assert_eq!(comp2.apply(&x).unwrap(), y);
    }

    #[test]
    fn hom_composition_is_associative() {
        let c8 = Group::cyclic(8);
        let red4 = GroupHom::cyclic_reduction(&c8, 4).unwrap();
        let c4 = red4.target().clone();
        let red2 = GroupHom::cyclic_reduction(&c4, 2).unwrap();
        let c2 = red2.target().clone();
        let to_triv = GroupHom::to_trivial(&c2);
        let left = to_triv.compose(&red2).unwrap().compose(&red4).unwrap();
        let right = to_triv.compose(&red2.compose(&red4).unwrap()).unwrap();
        for x in c8.enumerate().unwrap() {
            assert_eq!(left.apply(&x).unwrap(), right.apply(&x).unwrap());
        }
    }

    #[test]
    fn table_group_validation() {
        // A latin square that is not associative: the "subtraction mod 3" table.
        let bad = vec![vec![0, 2, 1], vec![1, 0, 2], vec![2, 1, 0]];
        assert!(matches!(
            Group::new(GroupSpec::Table(bad)),
            Err(Error::InvalidTable(_))
        ));
    }

    #[test]
    fn quotient_map_kernel() {
        let c4 = Group::cyclic(4);
        let z = c4.element(Payload::Residue(2)).unwrap();
        let q = GroupHom::quotient_map(&c4, &z).unwrap();
        let (image, kernel) = q.image_kernel().unwrap();
        assert_eq!(image.len(), 2);
        assert_eq!(kernel.len(), 2);
    }
}
